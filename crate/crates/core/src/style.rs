//! Style identifiers and the catalog of style names.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a style in `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StyleId(pub usize);

impl StyleId {
    pub const MODERN: StyleId = StyleId(0);
    pub const TRADITIONAL: StyleId = StyleId(1);
    pub const COTTAGE: StyleId = StyleId(2);
    pub const COASTAL: StyleId = StyleId(3);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StyleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "style#{}", self.0)
    }
}

/// Ordered list of style names; position is the [`StyleId`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Styles {
    names: Vec<String>,
}

impl Default for Styles {
    fn default() -> Self {
        Styles {
            names: ["Modern", "Traditional", "Cottage", "Coastal"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl Styles {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least two styles are required, got {}",
                names.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].iter().any(|b| b.eq_ignore_ascii_case(a)) {
                return Err(Error::InvalidConfig(format!("duplicate style name {a:?}")));
            }
        }
        Ok(Styles { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: StyleId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Case-insensitive lookup.
    pub fn parse(&self, name: &str) -> Result<StyleId> {
        let name = name.trim();
        self.names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(StyleId)
            .ok_or_else(|| Error::UnknownStyle(name.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = StyleId> {
        (0..self.names.len()).map(StyleId)
    }
}
