use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use crate::compat::{Placement, Scene};
use crate::error::{Error, Result};

/// Append-only store of saved scenes, optionally mirrored to a directory
/// with one JSON document per scene.
///
/// Ids are sequential (`scene-000001`, ...). Saving under a name that is
/// already taken stores a versioned copy (`name (v2)`, `name (v3)`, ...)
/// rather than overwriting.
#[derive(Debug, Default)]
pub struct SceneStore {
    scenes: Vec<Scene>,
    by_id: HashMap<String, usize>,
    names: HashSet<String>,
    next: u64,
    dir: Option<PathBuf>,
}

fn scene_id(n: u64) -> String {
    format!("scene-{n:06}")
}

impl SceneStore {
    pub fn in_memory() -> Self {
        SceneStore {
            next: 1,
            ..Default::default()
        }
    }

    /// Opens (creating if needed) a directory of saved scenes.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut store = SceneStore::in_memory();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let scene: Scene = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
            let id = scene
                .scene_id
                .clone()
                .ok_or_else(|| Error::format("scene", format!("{} has no scene_id", path.display())))?;
            if let Some(n) = id.strip_prefix("scene-").and_then(|n| n.parse::<u64>().ok()) {
                store.next = store.next.max(n + 1);
            }
            store.insert(scene);
        }
        store.dir = Some(dir.to_path_buf());
        Ok(store)
    }

    fn insert(&mut self, scene: Scene) {
        let id = scene.scene_id.clone().expect("stored scenes have ids");
        self.names.insert(scene.name.clone());
        self.by_id.insert(id, self.scenes.len());
        self.scenes.push(scene);
    }

    fn free_name(&self, name: &str) -> String {
        if !self.names.contains(name) {
            return name.to_string();
        }
        (2..)
            .map(|v| format!("{name} (v{v})"))
            .find(|n| !self.names.contains(n))
            .expect("unbounded search")
    }

    pub fn save(&mut self, name: &str, placements: Vec<Placement>) -> Result<Scene> {
        if name.trim().is_empty() {
            return Err(Error::InvalidConfig("scene name must not be empty".into()));
        }
        let scene = Scene {
            scene_id: Some(scene_id(self.next)),
            name: self.free_name(name),
            placements,
        };
        if let Some(dir) = &self.dir {
            let id = scene.scene_id.as_deref().unwrap();
            let path = dir.join(format!("{id}.json"));
            let tmp = dir.join(format!(".{id}.json.tmp"));
            let json = serde_json::to_string_pretty(&scene).map_err(|e| Error::json("scene", e))?;
            std::fs::write(&tmp, json + "\n").map_err(|e| Error::io(&tmp, e))?;
            std::fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        }
        self.next += 1;
        self.insert(scene.clone());
        Ok(scene)
    }

    pub fn get(&self, id: &str) -> Option<&Scene> {
        self.by_id.get(id).map(|&i| &self.scenes[i])
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}
