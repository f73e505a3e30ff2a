//! Versioned JSON dumps of built indexes.
//!
//! The file records the index kind, its build parameters, the structure
//! itself and the dataset, plus a SHA-256 checksum over the dataset. Loading
//! recomputes the checksum and rejects files whose data was altered.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::DataError;
use crate::simcore::{UnitVector, Vector};

use super::laesa::{LaesaIndex, PivotTable};
use super::vptree::{VpNode, VpTree};

pub const INDEX_FORMAT: &str = "simtri-index";
pub const INDEX_VERSION: u32 = 1;

/// Either kind of index, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum SavedIndex {
    Vp(VpTree),
    Laesa(LaesaIndex),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    checksum: String,
    index: Body,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Body {
    Vp {
        leaf_capacity: usize,
        seed: u64,
        root: VpNode,
        data: Vec<UnitVector>,
    },
    Laesa {
        seed: u64,
        table: PivotTable,
        data: Vec<UnitVector>,
    },
}

/// SHA-256 over a canonical little-endian encoding of the vectors.
pub fn data_checksum(data: &[UnitVector]) -> String {
    let mut h = Sha256::new();
    h.update((data.len() as u64).to_le_bytes());
    for v in data {
        match v.inner() {
            Vector::Dense(d) => {
                h.update([0u8]);
                h.update((d.dim() as u64).to_le_bytes());
                for x in d.values() {
                    h.update(x.to_le_bytes());
                }
            }
            Vector::Sparse(s) => {
                h.update([1u8]);
                h.update((s.nnz() as u64).to_le_bytes());
                for (i, x) in s.entries() {
                    h.update(i.to_le_bytes());
                    h.update(x.to_le_bytes());
                }
            }
        }
    }
    hex::encode(h.finalize())
}

impl SavedIndex {
    pub fn data(&self) -> &[UnitVector] {
        match self {
            SavedIndex::Vp(t) => t.data(),
            SavedIndex::Laesa(l) => l.data(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedIndex::Vp(_) => "vp",
            SavedIndex::Laesa(_) => "laesa",
        }
    }

    pub fn to_json(&self) -> String {
        let body = match self {
            SavedIndex::Vp(t) => Body::Vp {
                leaf_capacity: t.leaf_capacity(),
                seed: t.seed(),
                root: t.root().clone(),
                data: t.data().to_vec(),
            },
            SavedIndex::Laesa(l) => Body::Laesa {
                seed: l.table().seed(),
                table: l.table().clone(),
                data: l.data().to_vec(),
            },
        };
        let env = Envelope {
            format: INDEX_FORMAT.to_string(),
            version: INDEX_VERSION,
            checksum: data_checksum(self.data()),
            index: body,
        };
        serde_json::to_string(&env).expect("index serializes")
    }

    /// `origin` names the source in error messages.
    pub fn from_json(text: &str, origin: &str) -> Result<Self, DataError> {
        let format_err = |message: String| DataError::Format {
            path: origin.to_string(),
            message,
        };
        let env: Envelope = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
        if env.format != INDEX_FORMAT {
            return Err(format_err(format!(
                "unexpected format tag `{}`",
                env.format
            )));
        }
        if env.version != INDEX_VERSION {
            return Err(DataError::Version {
                path: origin.to_string(),
                version: env.version,
            });
        }
        let data = match &env.index {
            Body::Vp { data, .. } | Body::Laesa { data, .. } => data,
        };
        let computed = data_checksum(data);
        if computed != env.checksum {
            return Err(DataError::Checksum {
                path: origin.to_string(),
                stored: env.checksum,
                computed,
            });
        }
        Ok(match env.index {
            Body::Vp {
                leaf_capacity,
                seed,
                root,
                data,
            } => {
                let mut ids = root.member_ids();
                ids.sort_unstable();
                if ids != (0..data.len()).collect::<Vec<_>>() {
                    return Err(format_err("tree does not cover the dataset".into()));
                }
                SavedIndex::Vp(VpTree::from_parts(data, root, leaf_capacity, seed)?)
            }
            Body::Laesa { table, data, .. } => {
                SavedIndex::Laesa(LaesaIndex::from_parts(data, table)?)
            }
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), DataError> {
        fs::write(path, self.to_json()).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }
}
