//! Flat `key = value` config files with `[section]` headers, merged with
//! command-line flags against a per-subcommand key schema.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{key}` for {subcommand}")]
    UnknownKey { key: String, subcommand: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot read `{value}` as {kind}")]
    BadValue { key: String, value: String, kind: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Int,
    Bool,
    Text,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Real => "a real number",
            Kind::Int => "a non-negative integer",
            Kind::Bool => "true or false",
            Kind::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Fallback {
    Required,
    /// Absent unless set; the subcommand derives a value.
    Auto,
    Value(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Fallback,
    pub help: &'static str,
}

pub const fn key(name: &'static str, kind: Kind, default: Fallback, help: &'static str) -> Key {
    Key { name, kind, default, help }
}

/// Parsed file: global keys plus one map per section, in file order.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub text: String,
    pub global: BTreeMap<String, String>,
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ConfigFile { text: text.to_string(), ..Default::default() };
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: i + 1,
                    msg: "unterminated section header".into(),
                })?;
                let name = name.trim().to_string();
                cfg.sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, msg: "empty key".into() });
            }
            let map = match &current {
                Some(s) => cfg.sections.get_mut(s).expect("section exists"),
                None => &mut cfg.global,
            };
            if map.insert(k.clone(), v).is_some() {
                return Err(ConfigError::Syntax { line: i + 1, msg: format!("duplicate key `{k}`") });
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Effective parameters of one run.
#[derive(Debug, Clone)]
pub struct Params {
    pub subcommand: String,
    values: BTreeMap<&'static str, (Kind, String)>,
}

impl Params {
    /// Defaults, then global file keys, then the subcommand's section, then
    /// flags. Unknown keys in the section (or on the command line) are
    /// errors; unknown global keys belong to other subcommands and are
    /// skipped.
    pub fn merge(
        subcommand: &str,
        schema: &[Key],
        file: Option<&ConfigFile>,
        flags: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let find = |k: &str| schema.iter().find(|s| s.name == k);
        let mut values = BTreeMap::new();
        for k in schema {
            if let Fallback::Value(v) = k.default {
                values.insert(k.name, (k.kind, v.to_string()));
            }
        }
        let mut layers: Vec<(&BTreeMap<String, String>, bool)> = Vec::new();
        if let Some(f) = file {
            layers.push((&f.global, false));
            if let Some(sec) = f.sections.get(subcommand) {
                layers.push((sec, true));
            }
        }
        for (map, strict) in layers {
            for (k, v) in map {
                match find(k) {
                    Some(s) => {
                        values.insert(s.name, (s.kind, v.clone()));
                    }
                    None if strict => {
                        return Err(ConfigError::UnknownKey { key: k.clone(), subcommand: subcommand.into() })
                    }
                    None => {}
                }
            }
        }
        for (k, v) in flags {
            let s = find(k).ok_or_else(|| ConfigError::UnknownKey { key: k.clone(), subcommand: subcommand.into() })?;
            values.insert(s.name, (s.kind, v.clone()));
        }
        for k in schema {
            if matches!(k.default, Fallback::Required) && !values.contains_key(k.name) {
                return Err(ConfigError::Missing(k.name.into()));
            }
        }
        let p = Params { subcommand: subcommand.into(), values };
        for (name, (kind, _)) in &p.values {
            p.typed(name, *kind)?;
        }
        Ok(p)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    fn bad(key: &str, value: &str, kind: Kind) -> ConfigError {
        ConfigError::BadValue { key: key.into(), value: value.into(), kind: kind.name() }
    }

    fn typed(&self, key: &str, kind: Kind) -> Result<Value, ConfigError> {
        let v = self.raw(key).unwrap_or_default();
        Ok(match kind {
            Kind::Real => {
                let x: f64 = v.parse().map_err(|_| Self::bad(key, v, kind))?;
                if !x.is_finite() {
                    return Err(Self::bad(key, v, kind));
                }
                Value::from(x)
            }
            Kind::Int => Value::from(v.parse::<u64>().map_err(|_| Self::bad(key, v, kind))?),
            Kind::Bool => Value::from(match v {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => return Err(Self::bad(key, v, kind)),
            }),
            Kind::Text => Value::from(v),
        })
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn real(&self, key: &str) -> f64 {
        self.opt_real(key).unwrap_or_else(|| panic!("schema has no default for {key}"))
    }

    pub fn opt_real(&self, key: &str) -> Option<f64> {
        self.raw(key).map(|v| v.parse().expect("validated at merge"))
    }

    pub fn int(&self, key: &str) -> u64 {
        self.opt_int(key).unwrap_or_else(|| panic!("schema has no default for {key}"))
    }

    pub fn opt_int(&self, key: &str) -> Option<u64> {
        self.raw(key).map(|v| v.parse().expect("validated at merge"))
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.raw(key), Some("true" | "1" | "yes"))
    }

    pub fn text(&self, key: &str) -> &str {
        self.raw(key).unwrap_or_else(|| panic!("schema has no default for {key}"))
    }

    /// Typed echo of every effective value.
    pub fn to_json(&self) -> BTreeMap<String, Value> {
        self.values
            .iter()
            .map(|(k, (kind, _))| (k.to_string(), self.typed(k, *kind).expect("validated at merge")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &[Key] = &[
        key("epsilon", Kind::Real, Fallback::Required, ""),
        key("N", Kind::Int, Fallback::Value("100"), ""),
        key("algebra", Kind::Text, Fallback::Value("sl2sl2"), ""),
        key("kappa", Kind::Real, Fallback::Auto, ""),
    ];

    #[test]
    fn sections_and_precedence() {
        let f = ConfigFile::parse(
            "# sweep\nseed = 4\nepsilon = 0.5\n\n[cq-verify]\nepsilon = 0.2 # tighter\nN = 7\n[other]\nbogus = 1\n",
        )
        .unwrap();
        let p = Params::merge("cq-verify", SCHEMA, Some(&f), &[]).unwrap();
        assert_eq!(p.real("epsilon"), 0.2);
        assert_eq!(p.int("N"), 7);
        assert!(!p.has("kappa"));
        let p = Params::merge("cq-verify", SCHEMA, Some(&f), &[("N".into(), "9".into())]).unwrap();
        assert_eq!(p.int("N"), 9);
        assert_eq!(p.text("algebra"), "sl2sl2");
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(Params::merge("cq-verify", SCHEMA, None, &[]), Err(ConfigError::Missing(_))));
        let f = ConfigFile::parse("[cq-verify]\nepsilon = 0.1\nfoo = 2\n").unwrap();
        assert!(matches!(
            Params::merge("cq-verify", SCHEMA, Some(&f), &[]),
            Err(ConfigError::UnknownKey { .. })
        ));
        let bad = [("epsilon".to_string(), "abc".to_string())];
        assert!(matches!(Params::merge("cq-verify", SCHEMA, None, &bad), Err(ConfigError::BadValue { .. })));
        assert!(ConfigFile::parse("[open\n").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2\n").is_err());
        assert!(ConfigFile::parse("just words\n").is_err());
    }
}
