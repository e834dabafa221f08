use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Split;
use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"STYF";
pub const FEATURE_VERSION: u32 = 1;

/// One row of the JSON Lines feature format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub features: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub furniture_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

/// Dense table of per-image vectors sharing one dimension.
///
/// Used both for backbone features and for style embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl FeatureTable {
    pub fn new(dim: usize) -> Self {
        FeatureTable {
            dim,
            ids: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, row: &[f32]) -> Result<()> {
        let id = id.into();
        if row.len() != self.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("features of {id:?}")));
        }
        if id.len() > u16::MAX as usize {
            return Err(Error::format(
                "feature table",
                format!("id longer than {} bytes", u16::MAX),
            ));
        }
        if self.index.contains_key(&id) {
            return Err(Error::format("feature table", format!("duplicate id {id:?}")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn row(&self, pos: usize) -> &[f32] {
        &self.data[pos * self.dim..(pos + 1) * self.dim]
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.position(id).map(|p| self.row(p))
    }

    pub fn require(&self, id: &str) -> Result<&[f32]> {
        self.get(id).ok_or_else(|| Error::MissingFeatures(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), self.row(i)))
    }

    /// Binary layout: magic `STYF`, u32 version, u64 count, u32 dim, then per
    /// record a u16 id length, the id bytes and `dim` f32 values. All integers
    /// and floats are little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(FEATURE_MAGIC)?;
        w.write_all(&FEATURE_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for (id, row) in self.iter() {
            w.write_all(&(id.len() as u16).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let bad = |e: std::io::Error| Error::format("feature file", e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(bad)?;
        if &magic != FEATURE_MAGIC {
            return Err(Error::format("feature file", "bad magic"));
        }
        let version = read_u32(&mut r).map_err(bad)?;
        if version != FEATURE_VERSION {
            return Err(Error::VersionMismatch {
                what: "feature file",
                found: version,
                expected: FEATURE_VERSION,
            });
        }
        let count = read_u64(&mut r).map_err(bad)?;
        let dim = read_u32(&mut r).map_err(bad)? as usize;
        let mut table = FeatureTable::new(dim);
        let mut row = vec![0f32; dim];
        let mut buf4 = [0u8; 4];
        for _ in 0..count {
            let mut len = [0u8; 2];
            r.read_exact(&mut len).map_err(bad)?;
            let mut id = vec![0u8; u16::from_le_bytes(len) as usize];
            r.read_exact(&mut id).map_err(bad)?;
            let id = String::from_utf8(id).map_err(|_| Error::format("feature file", "id is not UTF-8"))?;
            for v in row.iter_mut() {
                r.read_exact(&mut buf4).map_err(bad)?;
                *v = f32::from_le_bytes(buf4);
            }
            table.push(id, &row)?;
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(bad)? != 0 {
            return Err(Error::format("feature file", "trailing bytes after last record"));
        }
        Ok(table)
    }

    /// JSON Lines fallback: one [`ImageRecord`] per line. The dimension is taken
    /// from the first record.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut table: Option<FeatureTable> = None;
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::MalformedRow {
                line: n + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ImageRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                line: n + 1,
                message: e.to_string(),
            })?;
            table
                .get_or_insert_with(|| FeatureTable::new(rec.features.len()))
                .push(rec.image_id, &rec.features)?;
        }
        table.ok_or(Error::Empty("feature file"))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for (id, row) in self.iter() {
            let rec = ImageRecord {
                image_id: id.to_string(),
                features: row.to_vec(),
                furniture_id: None,
                split: None,
            };
            let line = serde_json::to_string(&rec).map_err(|e| Error::json("feature record", e))?;
            writeln!(w, "{line}").map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }

    /// Reads either format, sniffing the magic bytes.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let head = r.fill_buf().map_err(|e| Error::io(path, e))?;
        if head.starts_with(FEATURE_MAGIC) {
            Self::read_binary(r)
        } else {
            Self::read_jsonl(r)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_binary(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut t = FeatureTable::new(2);
        t.push("ab", &[1.0, -2.5]).unwrap();
        let mut bytes = Vec::new();
        t.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"STYF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
        assert_eq!(u16::from_le_bytes(bytes[20..22].try_into().unwrap()), 2);
        assert_eq!(&bytes[22..24], b"ab");
        assert_eq!(f32::from_le_bytes(bytes[24..28].try_into().unwrap()), 1.0);
        assert_eq!(bytes.len(), 32);
    }

    #[test]
    fn version_mismatch_is_reported() {
        let mut t = FeatureTable::new(1);
        t.push("a", &[0.0]).unwrap();
        let mut bytes = Vec::new();
        t.write_binary(&mut bytes).unwrap();
        bytes[4] = 9;
        assert!(matches!(
            FeatureTable::read_binary(&bytes[..]),
            Err(Error::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let mut t = FeatureTable::new(3);
        assert!(matches!(t.push("a", &[0.0]), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(t.push("a", &[0.0, f32::NAN, 1.0]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn jsonl_fallback() {
        let text = r#"{"image_id":"x","features":[1.0,2.0,3.0]}
{"image_id":"y","features":[4.0,5.0,6.0],"split":"test"}"#;
        let t = FeatureTable::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("y").unwrap(), &[4.0, 5.0, 6.0]);
    }

    proptest! {
        #[test]
        fn binary_roundtrip(rows in prop::collection::vec(prop::collection::vec(-1e6f32..1e6, 3), 0..20)) {
            let mut t = FeatureTable::new(3);
            for (i, r) in rows.iter().enumerate() {
                t.push(format!("img{i}"), r).unwrap();
            }
            let mut bytes = Vec::new();
            t.write_binary(&mut bytes).unwrap();
            prop_assert_eq!(FeatureTable::read_binary(&bytes[..]).unwrap(), t);
        }
    }
}
