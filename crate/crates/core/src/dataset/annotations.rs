use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::style::{StyleId, Styles};

/// One expert's style label for one image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub image_id: String,
    pub expert_id: String,
    pub style: StyleId,
}

/// Number of labels each style received for one image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub image_id: String,
    pub counts: Vec<u32>,
}

impl LabelCounts {
    pub fn get(&self, style: StyleId) -> u32 {
        self.counts[style.0]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

#[derive(Deserialize)]
struct AnnotationRow {
    image_id: String,
    expert_id: String,
    style: String,
}

/// Immutable label counts per image, sorted by image id.
#[derive(Debug, Clone)]
pub struct AnnotationStore {
    styles: Styles,
    experts: usize,
    images: Vec<LabelCounts>,
    index: HashMap<String, usize>,
}

impl AnnotationStore {
    /// Builds a store from materialized counts. `experts` is the panel size `M`.
    pub fn from_counts<I>(styles: Styles, experts: usize, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = LabelCounts>,
    {
        let mut by_id = BTreeMap::new();
        for c in counts {
            if c.counts.len() != styles.len() {
                return Err(Error::ShapeMismatch {
                    expected: styles.len(),
                    found: c.counts.len(),
                });
            }
            if c.total() as usize > experts {
                return Err(Error::InvalidConfig(format!(
                    "image {:?} has {} labels but the panel has {} experts",
                    c.image_id,
                    c.total(),
                    experts
                )));
            }
            if by_id.insert(c.image_id.clone(), c).is_some() {
                return Err(Error::InvalidConfig("duplicate image id in label counts".into()));
            }
        }
        let images: Vec<LabelCounts> = by_id.into_values().collect();
        let index = images
            .iter()
            .enumerate()
            .map(|(i, c)| (c.image_id.clone(), i))
            .collect();
        Ok(AnnotationStore {
            styles,
            experts,
            images,
            index,
        })
    }

    /// Builds a store from individual annotations.
    pub fn from_annotations<I>(styles: Styles, annotations: I) -> Result<Self>
    where
        I: IntoIterator<Item = Annotation>,
    {
        let mut seen = HashSet::new();
        let mut experts = HashSet::new();
        let mut counts: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (n, a) in annotations.into_iter().enumerate() {
            if a.style.0 >= styles.len() {
                return Err(Error::UnknownStyle(a.style.to_string()));
            }
            if !seen.insert((a.image_id.clone(), a.expert_id.clone())) {
                return Err(Error::DuplicateAnnotation {
                    image: a.image_id,
                    expert: a.expert_id,
                    line: n + 1,
                });
            }
            experts.insert(a.expert_id);
            counts.entry(a.image_id).or_insert_with(|| vec![0; styles.len()])[a.style.0] += 1;
        }
        let experts = experts.len();
        Self::from_counts(
            styles,
            experts,
            counts
                .into_iter()
                .map(|(image_id, counts)| LabelCounts { image_id, counts }),
        )
    }

    pub fn styles(&self) -> &Styles {
        &self.styles
    }

    /// Panel size `M`.
    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[LabelCounts] {
        &self.images
    }

    pub fn counts(&self, image_id: &str) -> Option<&LabelCounts> {
        self.index.get(image_id).map(|&i| &self.images[i])
    }

    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.images.iter().map(|c| c.image_id.as_str())
    }
}

/// Parses annotation JSON Lines. Blank lines are skipped.
pub fn ingest_annotations<R: BufRead>(reader: R, styles: &Styles) -> Result<AnnotationStore> {
    let mut annotations = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::MalformedRow {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: AnnotationRow = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
            line: line_no,
            message: e.to_string(),
        })?;
        let style = styles.parse(&row.style)?;
        let key = (row.image_id, row.expert_id);
        if seen.contains_key(&key) {
            return Err(Error::DuplicateAnnotation {
                image: key.0,
                expert: key.1,
                line: line_no,
            });
        }
        seen.insert(key.clone(), line_no);
        annotations.push(Annotation {
            image_id: key.0,
            expert_id: key.1,
            style,
        });
    }
    AnnotationStore::from_annotations(styles.clone(), annotations)
}

pub fn read_annotations(path: &Path, styles: &Styles) -> Result<AnnotationStore> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_annotations(std::io::BufReader::new(file), styles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(image: &str, expert: &str, style: &str) -> String {
        format!(r#"{{"image_id":"{image}","expert_id":"{expert}","style":"{style}"}}"#)
    }

    #[test]
    fn counts_are_materialized() {
        let text = [
            row("a", "e1", "Traditional"),
            row("a", "e2", "Traditional"),
            row("a", "e3", "Traditional"),
        ]
        .join("\n");
        let store = ingest_annotations(text.as_bytes(), &Styles::default()).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.counts("a").unwrap().counts, vec![0, 3, 0, 0]);
        assert_eq!(store.experts(), 3);
    }

    #[test]
    fn empty_stream() {
        let store = ingest_annotations("".as_bytes(), &Styles::default()).unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn duplicate_is_named() {
        let mut rows: Vec<String> = (0..9).map(|e| row("B", &e.to_string(), "Modern")).collect();
        rows.insert(4, row("A", "7", "Coastal"));
        rows[9] = row("A", "7", "Modern");
        let err = ingest_annotations(rows.join("\n").as_bytes(), &Styles::default()).unwrap_err();
        match err {
            Error::DuplicateAnnotation { image, expert, line } => {
                assert_eq!(image, "A");
                assert_eq!(expert, "7");
                assert_eq!(line, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{}\n{{not json", row("a", "1", "Modern"));
        match ingest_annotations(text.as_bytes(), &Styles::default()).unwrap_err() {
            Error::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_style() {
        let text = row("a", "1", "Baroque");
        assert!(matches!(
            ingest_annotations(text.as_bytes(), &Styles::default()),
            Err(Error::UnknownStyle(_))
        ));
    }
}
