//! Flag resolution: command-line values override a flat `key=value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Keys accepted in the config file. Same names as the long flags.
pub const KNOWN_KEYS: &[&str] = &[
    "stories",
    "answers",
    "statements",
    "glove",
    "dev-stories",
    "dev-answers",
    "dev-statements",
    "arch",
    "seed",
    "epochs",
    "lr",
    "margin",
    "k1",
    "k2",
    "l2",
    "lambda",
    "hidden",
    "loss-style",
    "out",
    "checkpoint",
    "item",
    "question",
    "n",
    "dev",
    "vocab",
    "dim",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Data,
    Runtime,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Runtime => 4,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Data => "data",
            Kind::Runtime => "runtime",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub flag: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, flag: Option<&str>, message: impl Into<String>) -> Self {
        CliError {
            kind,
            flag: flag.map(str::to_string),
            message: message.into(),
        }
    }

    pub fn config(flag: &str, message: impl Into<String>) -> Self {
        Self::new(Kind::Config, Some(flag), message)
    }

    /// Wraps a library error, classifying it by variant.
    pub fn from_lib(flag: Option<&str>, e: habcnn::Error) -> Self {
        use habcnn::Error as E;
        let kind = match &e {
            E::Config(_) => Kind::Config,
            E::Parse { .. }
            | E::Structure(_)
            | E::Coverage(_)
            | E::EmbeddingFormat { .. }
            | E::EmptyEmbeddings
            | E::Checkpoint(_)
            | E::Io(_)
            | E::Json(_) => Kind::Data,
            E::UndefinedMetric(_) => Kind::Runtime,
        };
        Self::new(kind, flag, e.to_string())
    }

    /// One JSON object on one line.
    pub fn to_line(&self) -> String {
        serde_json::json!({
            "error": self.kind.as_str(),
            "flag": self.flag.as_ref().map(|f| format!("--{f}")),
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("line {}: expected key=value", i + 1))
            })?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(CliError::config(
                    "config",
                    format!("line {}: unknown key {k}", i + 1),
                ));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config("config", format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    /// The flag value if given, else the file value.
    pub fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(key, format!("invalid value {v:?} in config file"))),
        }
    }

    pub fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> CliResult<T> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str, flag: Option<T>) -> CliResult<T> {
        self.get(key, flag)?
            .ok_or_else(|| CliError::config(key, format!("--{key} is required")))
    }

    /// A required path that must exist.
    pub fn input(&self, key: &str, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        let p = self.require(key, flag)?;
        check_exists(key, p)
    }

    pub fn optional_input(&self, key: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        self.get(key, flag)?
            .map(|p| check_exists(key, p))
            .transpose()
    }
}

fn check_exists(key: &str, p: PathBuf) -> CliResult<PathBuf> {
    if p.exists() {
        Ok(p)
    } else {
        Err(CliError::config(
            key,
            format!("{} does not exist", p.display()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_rejected() {
        let err = FileConfig::parse("lr=0.1\nlearning_rate=0.2\n").unwrap_err();
        assert_eq!(err.kind, Kind::Config);
        assert!(err.message.contains("learning_rate"));
    }

    #[test]
    fn flag_overrides_file() {
        let c = FileConfig::parse("# comment\nlr = 0.1\nepochs=3\n").unwrap();
        assert_eq!(c.or("lr", Some(0.5), 0.05).unwrap(), 0.5);
        assert_eq!(c.or("lr", None, 0.05).unwrap(), 0.1);
        assert_eq!(c.or::<usize>("k1", None, 1).unwrap(), 1);
        assert_eq!(c.require::<usize>("epochs", None).unwrap(), 3);
    }

    #[test]
    fn bad_value_names_key() {
        let c = FileConfig::parse("seed=abc").unwrap();
        let err = c.get::<u64>("seed", None).unwrap_err();
        assert_eq!(err.flag.as_deref(), Some("seed"));
    }

    #[test]
    fn error_line_is_json() {
        let line = CliError::config("glove", "--glove is required").to_line();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "config");
        assert_eq!(v["flag"], "--glove");
        assert!(!line.contains('\n'));
    }
}
