use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::str::FromStr;

/// Service settings, read from `SISX_*` environment variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub bind: IpAddr,
    pub port: u16,
    pub max_upload_bytes: usize,
    pub max_datasets: usize,
    /// Cap on the summed row count of all registered datasets.
    pub max_rows: usize,
    /// JSON array of `{region, lat, lon}`; the built-in table when unset.
    pub centroids: Option<PathBuf>,
    /// Static UI bundle served under `/ui` when set.
    pub ui_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            max_upload_bytes: 512 * 1024 * 1024,
            max_datasets: 64,
            max_rows: 20_000_000,
            centroids: None,
            ui_dir: None,
        }
    }
}

fn parsed<T: FromStr>(lookup: &impl Fn(&str) -> Option<String>, key: &str, default: T) -> Result<T, String> {
    match lookup(key) {
        None => Ok(default),
        Some(raw) => raw.trim().parse().map_err(|_| format!("{key}: cannot parse {raw:?}")),
    }
}

impl Config {
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Builds a config from an arbitrary key lookup; unset keys keep defaults.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let d = Self::default();
        let cfg = Self {
            bind: parsed(&lookup, "SISX_BIND", d.bind)?,
            port: parsed(&lookup, "SISX_PORT", d.port)?,
            max_upload_bytes: parsed(&lookup, "SISX_MAX_UPLOAD_BYTES", d.max_upload_bytes)?,
            max_datasets: parsed(&lookup, "SISX_MAX_DATASETS", d.max_datasets)?,
            max_rows: parsed(&lookup, "SISX_MAX_ROWS", d.max_rows)?,
            centroids: lookup("SISX_CENTROIDS").filter(|s| !s.is_empty()).map(PathBuf::from),
            ui_dir: lookup("SISX_UI_DIR").filter(|s| !s.is_empty()).map(PathBuf::from),
        };
        if cfg.max_datasets == 0 || cfg.max_rows == 0 || cfg.max_upload_bytes == 0 {
            return Err("registry caps and upload limit must be positive".into());
        }
        Ok(cfg)
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}
