//! Versioned checkpoints: a text header followed by little-endian `f64`
//! segments. Each segment carries a SHA-256 prefix so corruption is reported
//! against the segment it hit.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::params::{ParamVector, Segment};
use crate::policy::PolicyParams;
use crate::train::{Adam, TrainConfig};
use crate::{Error, Result};

pub const MAGIC: &str = "MONGOOSE-CHECKPOINT";
pub const FORMAT_VERSION: &str = "1";
const END_HEADER: &str = "end_header";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: String,
    pub dimension: usize,
    pub hidden_size: usize,
    /// Global training step at which the checkpoint was taken.
    pub step: u64,
    pub config: Vec<(String, String)>,
    pub rng_digest: String,
    pub params: ParamVector,
    pub adam: Option<Adam>,
}

fn hex_digest(bytes: &[u8], len: usize) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(len).map(|b| format!("{b:02x}")).collect()
}

/// Digest of the random-stream position `(seed, step)`; all training
/// randomness is derived from this pair.
pub fn rng_digest(seed: u64, step: u64) -> String {
    hex_digest(format!("seed={seed};step={step}").as_bytes(), 8)
}

fn to_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

impl Checkpoint {
    pub fn new(params: &PolicyParams, config: &TrainConfig, step: u64, adam: Option<&Adam>) -> Self {
        Self {
            version: FORMAT_VERSION.to_string(),
            dimension: params.dimension,
            hidden_size: params.hidden_size,
            step,
            config: config.to_pairs(),
            rng_digest: rng_digest(config.seed, step),
            params: params.vector.clone(),
            adam: adam.cloned(),
        }
    }

    pub fn policy(&self) -> Result<PolicyParams> {
        PolicyParams::from_vector(self.dimension, self.hidden_size, self.params.clone())
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let map: BTreeMap<String, String> = self.config.iter().cloned().collect();
        TrainConfig::from_pairs(&map)
    }

    /// Errors unless the checkpoint was trained for dimension `d`.
    pub fn expect_dimension(&self, d: usize) -> Result<()> {
        if self.dimension != d {
            return Err(Error::Checkpoint(format!(
                "dimension mismatch: checkpoint is for d={}, requested d={d}",
                self.dimension
            )));
        }
        Ok(())
    }

    fn segments(&self) -> Vec<(String, Segment, &[f64])> {
        let mut out = Vec::new();
        let mut off = 0;
        for s in &self.params.layout {
            out.push((s.name.clone(), s.clone(), &self.params.values[off..off + s.len()]));
            off += s.len();
        }
        if let Some(adam) = &self.adam {
            for (prefix, data) in [("adam_m", &adam.first_moment), ("adam_v", &adam.second_moment)] {
                let mut off = 0;
                for s in &self.params.layout {
                    let name = format!("{prefix}.{}", s.name);
                    out.push((name.clone(), Segment::new(&name, s.rows, s.cols), &data[off..off + s.len()]));
                    off += s.len();
                }
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = format!("{MAGIC}\nversion = {}\n", self.version);
        header.push_str(&format!("dimension = {}\n", self.dimension));
        header.push_str(&format!("hidden_size = {}\n", self.hidden_size));
        header.push_str(&format!("step = {}\n", self.step));
        header.push_str(&format!("rng_digest = {}\n", self.rng_digest));
        for (k, v) in &self.config {
            header.push_str(&format!("config.{k} = {v}\n"));
        }
        if let Some(adam) = &self.adam {
            header.push_str(&format!("adam_steps = {}\n", adam.steps));
        }
        let mut payload = Vec::new();
        for (name, seg, data) in self.segments() {
            let bytes = to_bytes(data);
            header.push_str(&format!("segment = {name} {} {} {}\n", seg.rows, seg.cols, hex_digest(&bytes, 8)));
            payload.extend_from_slice(&bytes);
        }
        header.push_str(END_HEADER);
        header.push('\n');
        let mut out = header.into_bytes();
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let marker = format!("\n{END_HEADER}\n");
        let split = bytes
            .windows(marker.len())
            .position(|w| w == marker.as_bytes())
            .ok_or_else(|| Error::Checkpoint("missing end of header".into()))?;
        let header =
            std::str::from_utf8(&bytes[..split]).map_err(|_| Error::Checkpoint("header is not valid UTF-8".into()))?;
        let payload = &bytes[split + marker.len()..];

        let mut lines = header.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let mut fields = BTreeMap::new();
        let mut config = Vec::new();
        let mut segments = Vec::new();
        for line in lines {
            let (k, v) =
                line.split_once(" = ").ok_or_else(|| Error::Checkpoint(format!("malformed header line '{line}'")))?;
            if let Some(key) = k.strip_prefix("config.") {
                config.push((key.to_string(), v.to_string()));
            } else if k == "segment" {
                let parts: Vec<&str> = v.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(Error::Checkpoint(format!("malformed segment line '{line}'")));
                }
                let rows = parts[1].parse().map_err(|_| Error::Checkpoint(format!("bad rows in '{line}'")))?;
                let cols = parts[2].parse().map_err(|_| Error::Checkpoint(format!("bad cols in '{line}'")))?;
                segments.push((Segment::new(parts[0], rows, cols), parts[3].to_string()));
            } else {
                fields.insert(k.to_string(), v.to_string());
            }
        }
        let field = |name: &str| {
            fields.get(name).cloned().ok_or_else(|| Error::Checkpoint(format!("header is missing '{name}'")))
        };
        let version = field("version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version '{version}' (expected '{FORMAT_VERSION}')"
            )));
        }
        let parse_num = |name: &str| -> Result<u64> {
            field(name)?.parse().map_err(|_| Error::Checkpoint(format!("bad number for '{name}'")))
        };
        let dimension = parse_num("dimension")? as usize;
        let hidden_size = parse_num("hidden_size")? as usize;
        let step = parse_num("step")?;
        let rng_digest = field("rng_digest")?;

        let expected: usize = segments.iter().map(|(s, _)| s.len() * 8).sum();
        let mut values_by_segment = Vec::new();
        let mut off = 0;
        for (seg, digest) in &segments {
            let len = seg.len() * 8;
            if off + len > payload.len() {
                return Err(Error::CheckpointSegment {
                    segment: seg.name.clone(),
                    reason: format!("payload truncated: need {expected} bytes, found {}", payload.len()),
                });
            }
            let chunk = &payload[off..off + len];
            if &hex_digest(chunk, 8) != digest {
                return Err(Error::CheckpointSegment { segment: seg.name.clone(), reason: "checksum mismatch".into() });
            }
            let values: Vec<f64> =
                chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
            values_by_segment.push((seg.clone(), values));
            off += len;
        }
        if off != payload.len() {
            return Err(Error::Checkpoint(format!(
                "payload has {} bytes but the inventory describes {expected}",
                payload.len()
            )));
        }

        let expected_layout = crate::policy::policy_layout(dimension, hidden_size);
        let n_params = expected_layout.len();
        if values_by_segment.len() < n_params {
            return Err(Error::Checkpoint("parameter inventory incomplete".into()));
        }
        let mut layout = Vec::new();
        let mut values = Vec::new();
        for ((seg, data), want) in values_by_segment[..n_params].iter().zip(&expected_layout) {
            if seg != want {
                return Err(Error::CheckpointSegment {
                    segment: seg.name.clone(),
                    reason: format!("expected shape {}x{} for '{}'", want.rows, want.cols, want.name),
                });
            }
            layout.push(seg.clone());
            values.extend_from_slice(data);
        }
        let params = ParamVector::from_parts(values, layout)?;

        let rest = &values_by_segment[n_params..];
        let adam = if rest.is_empty() {
            None
        } else {
            if rest.len() != 2 * n_params {
                return Err(Error::Checkpoint("optimiser state inventory incomplete".into()));
            }
            let steps = parse_num("adam_steps")?;
            let mut adam = Adam::new(params.len());
            adam.steps = steps;
            adam.first_moment = rest[..n_params].iter().flat_map(|(_, v)| v.iter().copied()).collect();
            adam.second_moment = rest[n_params..].iter().flat_map(|(_, v)| v.iter().copied()).collect();
            Some(adam)
        };

        Ok(Self { version, dimension, hidden_size, step, config, rng_digest, params, adam })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    ckpt.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path)
}
