use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use grushin_core::spec_io::{parse_real, parse_sorted_list, KeyValues};

/// Bad input from the user: exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Invalid(msg.into()).into())
}

/// Flag values layered over a flat `key = value` config file; flags win.
pub struct Settings {
    flags: BTreeMap<&'static str, Option<String>>,
    config: KeyValues,
}

impl Settings {
    pub fn new(flags: BTreeMap<&'static str, Option<String>>, config: Option<&Path>) -> Result<Self> {
        let config = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                KeyValues::parse(&text).map_err(|e| Invalid(format!("{}: {e}", p.display())))?
            }
            None => KeyValues::default(),
        };
        for key in config.keys() {
            if !flags.contains_key(key) {
                return invalid(format!("config key {key:?} is not an option of this subcommand"));
            }
        }
        Ok(Self { flags, config })
    }

    /// Same settings with the automatic hypothesis check disabled.
    pub fn without_h2(&self) -> Self {
        let mut flags = self.flags.clone();
        flags.insert("skip-h2", Some("true".into()));
        Self {
            flags,
            config: self.config.clone(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.flags
            .get(key)
            .and_then(|v| v.as_deref())
            .or_else(|| self.config.get(key))
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        match self.get(key) {
            Some(v) => Ok(v),
            None => invalid(format!("missing required option --{key}")),
        }
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_real(v).map_err(|e| Invalid(format!("--{key}: {e}")).into()))
            .transpose()
    }

    pub fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    pub fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Invalid(format!("--{key}: expected a nonnegative integer, got {v:?}")).into())
            })
            .transpose()
    }

    pub fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.count(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => invalid(format!("--{key}: expected true or false, got {v:?}")),
        }
    }

    /// Strictly increasing list.
    pub fn sorted_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        parse_sorted_list(v).map_err(|e| Invalid(format!("--{key}: {e}")).into())
    }

    pub fn sorted_list_or(&self, key: &str, default: &str) -> Result<Vec<f64>> {
        let v = self.get(key).unwrap_or(default);
        parse_sorted_list(v).map_err(|e| Invalid(format!("--{key}: {e}")).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn flags(pairs: &[(&'static str, Option<&str>)]) -> BTreeMap<&'static str, Option<String>> {
        pairs.iter().map(|(k, v)| (*k, v.map(str::to_string))).collect()
    }

    #[test]
    fn flags_override_config() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "xi = 1,2,3\nL = 2\n# comment").unwrap();
        let s = Settings::new(flags(&[("xi", Some("4,5")), ("L", None), ("n", None)]), Some(f.path())).unwrap();
        assert_eq!(s.sorted_list("xi").unwrap(), vec![4.0, 5.0]);
        assert_eq!(s.real("L").unwrap(), Some(2.0));
        assert_eq!(s.count("n").unwrap(), None);
        assert!(s.require("n").is_err());
    }

    #[test]
    fn unknown_config_key_is_invalid() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "colour = blue").unwrap();
        let e = Settings::new(flags(&[("xi", None)]), Some(f.path())).err().unwrap();
        assert!(e.downcast_ref::<Invalid>().is_some());
    }

    #[test]
    fn typed_accessors() {
        let s = Settings::new(flags(&[("a", Some("x")), ("b", Some("true")), ("c", Some("3,1"))]), None).unwrap();
        assert!(s.real("a").is_err());
        assert!(s.flag("b").unwrap());
        assert!(s.sorted_list("c").is_err());
    }
}
