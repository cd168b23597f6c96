use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::Regime;

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "BUBBLETOWER_OUT";

/// Keys accepted in a TOML config file; the same names as the flags.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub q: Option<f64>,
    pub k: Option<usize>,
    pub eps: Option<f64>,
    #[serde(rename = "V")]
    pub v: Option<String>,
    pub regime: Option<Regime>,
    pub h: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub width: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub eps_list: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Domain(format!("config {}: {e}", path.display())))
    }

    /// Values present in `flags` win over `self`.
    pub fn overridden_by(self, flags: FileConfig) -> FileConfig {
        FileConfig {
            n: flags.n.or(self.n),
            q: flags.q.or(self.q),
            k: flags.k.or(self.k),
            eps: flags.eps.or(self.eps),
            v: flags.v.or(self.v),
            regime: flags.regime.or(self.regime),
            h: flags.h.or(self.h),
            m: flags.m.or(self.m),
            width: flags.width.or(self.width),
            seed: flags.seed.or(self.seed),
            workers: flags.workers.or(self.workers),
            eps_list: flags.eps_list.or(self.eps_list),
            out: flags.out.or(self.out),
        }
    }
}
