//! Head checkpoints.
//!
//! A checkpoint is one line of JSON header terminated by `\n`, followed by the
//! parameter blocks `w1`, `b1`, `w2`, `b2` as little-endian f32 values. The
//! header records the shapes, style names, seed and training configuration.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::style::Styles;
use crate::stylenet::head::{Params, StyleHead};
use crate::stylenet::train::TrainConfig;

pub const CHECKPOINT_VERSION: u32 = 1;
const CHECKPOINT_FORMAT: &str = "stylerank-head";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    input_dim: usize,
    hidden_dim: usize,
    styles: Styles,
    seed: u64,
    config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub head: StyleHead,
    pub styles: Styles,
    pub config: TrainConfig,
}

impl Checkpoint {
    /// Rounds the parameters to f32, the precision they are stored at.
    pub fn new(head: &StyleHead, styles: Styles, config: TrainConfig) -> Result<Self> {
        if styles.len() != head.styles() {
            return Err(Error::ShapeMismatch {
                expected: head.styles(),
                found: styles.len(),
            });
        }
        let mut head = head.clone();
        head.params.iter_mut().for_each(|v| *v = *v as f32 as f64);
        Ok(Checkpoint { head, styles, config })
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            input_dim: self.head.input_dim(),
            hidden_dim: self.head.hidden_dim(),
            styles: self.styles.clone(),
            seed: self.config.seed,
            config: self.config.clone(),
        };
        let line = serde_json::to_string(&header).map_err(|e| Error::json("checkpoint header", e))?;
        let io = |e| Error::io("<checkpoint>", e);
        w.write_all(line.as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
        for v in self.head.params.iter() {
            w.write_all(&(*v as f32).to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = Vec::new();
        r.read_until(b'\n', &mut line)
            .map_err(|e| Error::io("<checkpoint>", e))?;
        let header: Header = serde_json::from_slice(&line).map_err(|e| Error::json("checkpoint header", e))?;
        if header.format != CHECKPOINT_FORMAT {
            return Err(Error::format(
                "checkpoint",
                format!("unexpected format tag {:?}", header.format),
            ));
        }
        if header.version != CHECKPOINT_VERSION {
            return Err(Error::VersionMismatch {
                what: "checkpoint",
                found: header.version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let mut params = Params::zeros(header.input_dim, header.hidden_dim, header.styles.len());
        let mut buf = [0u8; 4];
        for v in params.iter_mut() {
            r.read_exact(&mut buf)
                .map_err(|_| Error::format("checkpoint", "truncated parameter blocks"))?;
            *v = f32::from_le_bytes(buf) as f64;
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(|e| Error::io("<checkpoint>", e))? != 0 {
            return Err(Error::format("checkpoint", "trailing bytes"));
        }
        let head = StyleHead::from_params(header.input_dim, header.hidden_dim, header.styles.len(), params)?;
        Ok(Checkpoint {
            head,
            styles: header.styles,
            config: header.config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file)
    }
}
