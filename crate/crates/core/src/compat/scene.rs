use serde::{Deserialize, Serialize};

/// One placed furniture object. Layout fields are carried for the client and
/// play no part in ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub furniture_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<f64>,
    /// Furniture this object rests on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene_id: Option<String>,
    pub name: String,
    #[serde(default)]
    pub placements: Vec<Placement>,
}

impl Scene {
    pub fn furniture_ids(&self) -> Vec<&str> {
        self.placements.iter().map(|p| p.furniture_id.as_str()).collect()
    }
}
