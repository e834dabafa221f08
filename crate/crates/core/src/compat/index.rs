//! Precomputed furniture-to-furniture distances.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "STYX" | u32 version | u64 generation | u32 item count
//! per item: u16 id length | id | u16 class length | class
//! packed strict upper triangle, row-major: n(n-1)/2 f32
//! ```
//!
//! The generation is the first eight bytes of the SHA-256 of everything after
//! the generation field, so two indexes with identical content share a
//! generation. A JSON manifest next to the binary carries thumbnails, the
//! validated image lists, the unrankable items and the registry fingerprint.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::compat::distance::{min_cross_distance, validated_embeddings};
use crate::compat::Registry;
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &[u8; 4] = b"STYX";
pub const INDEX_VERSION: u32 = 1;
const MANIFEST_FORMAT: &str = "stylerank-index";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedItem {
    pub id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail: Option<String>,
    /// Validated images the distances were computed from.
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub format: String,
    pub version: u32,
    pub generation: String,
    pub registry_fingerprint: String,
    pub embedding_dim: usize,
    pub items: Vec<IndexedItem>,
    pub unrankable: Vec<IndexedItem>,
}

#[derive(Debug, Clone)]
pub struct CompatibilityIndex {
    generation: u64,
    items: Vec<IndexedItem>,
    unrankable: Vec<IndexedItem>,
    distances: Vec<f32>,
    positions: HashMap<String, usize>,
    unrankable_ids: HashMap<String, usize>,
    by_class: BTreeMap<String, Vec<usize>>,
    registry_fingerprint: String,
    embedding_dim: usize,
}

fn packed_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn packed_pos(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl CompatibilityIndex {
    /// Computes the full symmetric distance matrix over rankable items.
    ///
    /// Items without a validated image are kept in the metadata as
    /// unrankable and left out of the matrix.
    pub fn build(registry: &Registry, embeddings: &FeatureTable) -> Result<Self> {
        let mut sorted: Vec<&crate::compat::FurnitureItem> = registry.items().iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let mut items = Vec::new();
        let mut unrankable = Vec::new();
        let mut vectors: Vec<Vec<&[f32]>> = Vec::new();
        for item in sorted {
            let images: Vec<String> = registry
                .validated_images(&item.id)?
                .into_iter()
                .map(String::from)
                .collect();
            let entry = IndexedItem {
                id: item.id.clone(),
                class_name: item.class_name.clone(),
                thumbnail: item.thumbnail.clone(),
                images,
            };
            if entry.images.is_empty() {
                unrankable.push(entry);
            } else {
                vectors.push(validated_embeddings(registry, embeddings, &item.id)?);
                items.push(entry);
            }
        }
        let n = items.len();
        let mut distances = Vec::with_capacity(packed_len(n));
        for i in 0..n {
            for j in i + 1..n {
                distances.push(min_cross_distance(&vectors[i], &vectors[j]));
            }
        }
        Self::assemble(items, unrankable, distances, registry.fingerprint(), embeddings.dim())
    }

    fn assemble(
        items: Vec<IndexedItem>,
        unrankable: Vec<IndexedItem>,
        distances: Vec<f32>,
        registry_fingerprint: String,
        embedding_dim: usize,
    ) -> Result<Self> {
        if distances.len() != packed_len(items.len()) {
            return Err(Error::format("index", "distance table size does not match item count"));
        }
        if distances.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::NonFinite("index distances".into()));
        }
        let positions = items.iter().enumerate().map(|(i, it)| (it.id.clone(), i)).collect();
        let unrankable_ids = unrankable
            .iter()
            .enumerate()
            .map(|(i, it)| (it.id.clone(), i))
            .collect();
        let mut by_class: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, it) in items.iter().enumerate() {
            by_class.entry(it.class_name.clone()).or_default().push(i);
        }
        for it in &unrankable {
            by_class.entry(it.class_name.clone()).or_default();
        }
        let mut index = CompatibilityIndex {
            generation: 0,
            items,
            unrankable,
            distances,
            positions,
            unrankable_ids,
            by_class,
            registry_fingerprint,
            embedding_dim,
        };
        index.generation = index.content_generation();
        Ok(index)
    }

    fn body_bytes(&self) -> Vec<u8> {
        let mut body = Vec::with_capacity(8 + self.distances.len() * 4);
        body.extend_from_slice(&(self.items.len() as u32).to_le_bytes());
        for it in &self.items {
            body.extend_from_slice(&(it.id.len() as u16).to_le_bytes());
            body.extend_from_slice(it.id.as_bytes());
            body.extend_from_slice(&(it.class_name.len() as u16).to_le_bytes());
            body.extend_from_slice(it.class_name.as_bytes());
        }
        for d in &self.distances {
            body.extend_from_slice(&d.to_le_bytes());
        }
        body
    }

    fn content_generation(&self) -> u64 {
        let digest = Sha256::digest(self.body_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn generation_hex(&self) -> String {
        format!("{:016x}", self.generation)
    }

    pub fn registry_fingerprint(&self) -> &str {
        &self.registry_fingerprint
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding_dim
    }

    /// Rankable items, sorted by id.
    pub fn items(&self) -> &[IndexedItem] {
        &self.items
    }

    pub fn unrankable(&self) -> &[IndexedItem] {
        &self.unrankable
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.by_class.keys().map(String::as_str)
    }

    /// Every catalog item, rankable or not, with its rankability.
    pub fn catalog(&self) -> Vec<(&IndexedItem, bool)> {
        let mut all: Vec<(&IndexedItem, bool)> = self
            .items
            .iter()
            .map(|i| (i, true))
            .chain(self.unrankable.iter().map(|i| (i, false)))
            .collect();
        all.sort_by(|a, b| a.0.id.cmp(&b.0.id));
        all
    }

    pub fn item(&self, id: &str) -> Option<&IndexedItem> {
        self.positions
            .get(id)
            .map(|&p| &self.items[p])
            .or_else(|| self.unrankable_ids.get(id).map(|&p| &self.unrankable[p]))
    }

    /// Matrix position of a rankable item.
    pub fn position(&self, id: &str) -> Result<usize> {
        if let Some(&p) = self.positions.get(id) {
            Ok(p)
        } else if self.unrankable_ids.contains_key(id) {
            Err(Error::Unrankable(id.to_string()))
        } else {
            Err(Error::UnknownItem(id.to_string()))
        }
    }

    /// Rankable positions of a class; empty when every item of the class is
    /// unrankable.
    pub fn class_members(&self, class_name: &str) -> Result<&[usize]> {
        self.by_class
            .get(class_name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownClass(class_name.to_string()))
    }

    pub fn distance_at(&self, i: usize, j: usize) -> f32 {
        use std::cmp::Ordering;
        let n = self.items.len();
        match i.cmp(&j) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.distances[packed_pos(n, i, j)],
            Ordering::Greater => self.distances[packed_pos(n, j, i)],
        }
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<f32> {
        Ok(self.distance_at(self.position(a)?, self.position(b)?))
    }

    pub fn manifest(&self) -> IndexManifest {
        IndexManifest {
            format: MANIFEST_FORMAT.into(),
            version: INDEX_VERSION,
            generation: self.generation_hex(),
            registry_fingerprint: self.registry_fingerprint.clone(),
            embedding_dim: self.embedding_dim,
            items: self.items.clone(),
            unrankable: self.unrankable.clone(),
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(INDEX_MAGIC)?;
        w.write_all(&INDEX_VERSION.to_le_bytes())?;
        w.write_all(&self.generation.to_le_bytes())?;
        w.write_all(&self.body_bytes())?;
        w.flush()
    }

    /// Reads the binary table and joins it with its manifest.
    pub fn read(mut binary: impl Read, manifest: IndexManifest) -> Result<Self> {
        let bad = |m: &str| Error::format("index", m.to_string());
        let mut bytes = Vec::new();
        binary.read_to_end(&mut bytes).map_err(|e| Error::io("<index>", e))?;
        if bytes.len() < 20 || &bytes[..4] != INDEX_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != INDEX_VERSION {
            return Err(Error::VersionMismatch {
                what: "index",
                found: version,
                expected: INDEX_VERSION,
            });
        }
        if manifest.format != MANIFEST_FORMAT {
            return Err(bad("manifest format tag"));
        }
        if manifest.version != INDEX_VERSION {
            return Err(Error::VersionMismatch {
                what: "index manifest",
                found: manifest.version,
                expected: INDEX_VERSION,
            });
        }
        let generation = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let mut cur = &bytes[16..];
        let mut take = |n: usize| -> Result<&[u8]> {
            if cur.len() < n {
                return Err(bad("truncated"));
            }
            let (head, tail) = cur.split_at(n);
            cur = tail;
            Ok(head)
        };
        let n = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
        if n != manifest.items.len() {
            return Err(Error::StaleIndex("manifest and binary disagree on item count".into()));
        }
        for item in &manifest.items {
            let len = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes")) as usize;
            let id = std::str::from_utf8(take(len)?).map_err(|_| bad("id is not UTF-8"))?;
            let len = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes")) as usize;
            let class = std::str::from_utf8(take(len)?).map_err(|_| bad("class is not UTF-8"))?;
            if id != item.id || class != item.class_name {
                return Err(Error::StaleIndex(format!(
                    "manifest item {:?} does not match binary",
                    item.id
                )));
            }
        }
        let raw = take(packed_len(n) * 4)?;
        if !cur.is_empty() {
            return Err(bad("trailing bytes"));
        }
        let distances = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let index = Self::assemble(
            manifest.items,
            manifest.unrankable,
            distances,
            manifest.registry_fingerprint,
            manifest.embedding_dim,
        )?;
        if index.generation != generation {
            return Err(bad("generation does not match content"));
        }
        if index.generation_hex() != manifest.generation {
            return Err(Error::StaleIndex("manifest generation differs from binary".into()));
        }
        Ok(index)
    }

    /// Manifest path for an index path: `<path>.json`.
    pub fn manifest_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".json");
        PathBuf::from(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))?;
        let mpath = Self::manifest_path(path);
        let text = serde_json::to_string_pretty(&self.manifest()).map_err(|e| Error::json("index manifest", e))?;
        std::fs::write(&mpath, text + "\n").map_err(|e| Error::io(mpath, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mpath = Self::manifest_path(path);
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: IndexManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(mpath.display().to_string(), e))?;
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file), manifest)
    }

    /// Fails when the registry has changed since the index was built.
    pub fn check_fresh(&self, registry: &Registry) -> Result<()> {
        let current = registry.fingerprint();
        if current != self.registry_fingerprint {
            return Err(Error::StaleIndex(format!(
                "built from registry {} but registry is now {}",
                &self.registry_fingerprint[..12.min(self.registry_fingerprint.len())],
                &current[..12]
            )));
        }
        Ok(())
    }
}
