//! Configuration resolution: flat `key=value` files, flag overrides, and
//! the typed getters subcommands read from.
//!
//! Precedence is fixed: a flag beats a config-file key, which beats the
//! built-in default. Every value, whether it arrived by flag or by file,
//! is parsed by the same getter, and the fully resolved configuration is
//! echoed before a run starts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use vtl_core::{
    custom_generators, default_generators, Error as CoreError, GeneratorSet, SL2Matrix,
    TorusBundleGroup, Word,
};

/// Every key the config file may carry. Keys used only by other
/// subcommands are accepted and ignored; anything else is rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "group",
    "matrix",
    "generators",
    "cap",
    "rmax",
    "fit_lo",
    "fit_hi",
    "out",
    "radius",
    "cache",
    "domain",
    "count",
    "seed",
    "max_mult",
    "mass_lo",
    "mass_hi",
    "family",
    "n_lo",
    "n_hi",
    "mass_scale",
];

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    UnknownKey(String),
    MissingRequired(&'static str),
    BadValue { key: String, value: String },
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::UnknownKey(k) => write!(f, "unknown configuration key '{k}'"),
            CliError::MissingRequired(k) => write!(f, "missing required option '{k}'"),
            CliError::BadValue { key, value } => {
                write!(f, "bad value '{value}' for option '{key}'")
            }
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    /// Exit codes: 2 configuration, 3 resource limits, 4 violated
    /// invariants, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CoreError::ResourceLimit { .. } | CoreError::ArithmeticOverflow => 3,
                CoreError::InvariantViolation(_) | CoreError::WitnessNotFound { .. } => 4,
                CoreError::Io(_) | CoreError::CorruptCache(_) | CoreError::ConfigMismatch(_) => 5,
                _ => 2,
            },
            CliError::Io(_) => 5,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Merged key-value view of config file and flags.
#[derive(Debug, Default)]
pub struct Store {
    map: BTreeMap<String, String>,
}

impl Store {
    pub fn from_config_file(path: Option<&Path>) -> Result<Store> {
        let mut store = Store::default();
        let Some(path) = path else { return Ok(store) };
        let text = std::fs::read_to_string(path)?;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::BadValue {
                    key: "config line".into(),
                    value: raw.into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::UnknownKey(key.to_string()));
            }
            store.map.insert(key.to_string(), value.to_string());
        }
        Ok(store)
    }

    /// Overlays a flag value; flags win over config-file keys.
    pub fn set_flag(&mut self, key: &str, value: Option<String>) {
        debug_assert!(KNOWN_KEYS.contains(&key));
        if let Some(v) = value {
            self.map.insert(key.to_string(), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| CliError::BadValue {
                key: key.to_string(),
                value: raw.to_string(),
            }),
        }
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>> {
        self.parse(key)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse(key)
    }

    pub fn require_u32(&self, key: &'static str) -> Result<u32> {
        self.get_u32(key)?.ok_or(CliError::MissingRequired(key))
    }

    pub fn require_str(&self, key: &'static str) -> Result<&str> {
        self.get(key).ok_or(CliError::MissingRequired(key))
    }
}

/// The group a run works in, with its resolved generating set.
#[derive(Debug)]
pub struct GroupConfig {
    pub label: String,
    pub group: TorusBundleGroup,
    pub gens: GeneratorSet,
    /// `default` or the comma-joined generator words.
    pub gens_echo: String,
}

pub fn resolve_group(store: &Store) -> Result<GroupConfig> {
    let label = store.require_str("group")?.to_string();
    let group = match label.as_str() {
        "z2" => TorusBundleGroup::z2(),
        "nil" => TorusBundleGroup::nil(),
        "sol" => TorusBundleGroup::sol(),
        "custom" => {
            let raw = store.require_str("matrix")?;
            let parts: Vec<&str> = raw.split(',').collect();
            if parts.len() != 4 {
                return Err(CliError::BadValue {
                    key: "matrix".into(),
                    value: raw.into(),
                });
            }
            let mut entries = [0i64; 4];
            for (slot, part) in entries.iter_mut().zip(&parts) {
                *slot = part.trim().parse().map_err(|_| CliError::BadValue {
                    key: "matrix".into(),
                    value: raw.into(),
                })?;
            }
            TorusBundleGroup::from_matrix(SL2Matrix::new(
                entries[0], entries[1], entries[2], entries[3],
            )?)
        }
        other => {
            return Err(CliError::BadValue {
                key: "group".into(),
                value: other.into(),
            });
        }
    };
    let (gens, gens_echo) = match store.get("generators") {
        None => (default_generators(&group)?, "default".to_string()),
        Some(raw) => {
            let words = raw
                .split(',')
                .map(|w| Word::parse(w.trim()))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (custom_generators(&group, &words)?, raw.to_string())
        }
    };
    Ok(GroupConfig {
        label,
        group,
        gens,
        gens_echo,
    })
}

/// Prints the fully resolved configuration, one `config key=value` line
/// per key, in the order given.
pub fn echo_config(pairs: &[(&str, String)]) {
    for (key, value) in pairs {
        eprintln!("config {key}={value}");
    }
}
