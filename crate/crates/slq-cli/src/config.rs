//! Strict scenario-config loading: TOML sections per module, every key
//! checked against the command's schema, unknown keys fatal (all listed).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_rational::Rational64;

use crate::CliError;

pub struct Config {
    doc: toml::Table,
    /// Directory of the config file; relative paths resolve against it.
    pub base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {path:?}: {e}")))?;
        let doc: toml::Table = text
            .parse()
            .map_err(|e| CliError::Validation(format!("config parse error: {e}")))?;
        Ok(Config {
            doc,
            base_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }

    /// Enforce the schema: every top-level entry must be a known section,
    /// and every key inside must be in the section's allowed list.
    pub fn check_schema(&self, schema: &[(&str, &[&str])]) -> Result<(), CliError> {
        let mut unknown = Vec::new();
        let known: BTreeSet<&str> = schema.iter().map(|(s, _)| *s).collect();
        for (name, value) in &self.doc {
            match schema.iter().find(|(s, _)| s == name) {
                None => unknown.push(format!("[{name}]")),
                Some((_, keys)) => {
                    let table = value.as_table().ok_or_else(|| {
                        CliError::Validation(format!("[{name}] must be a section"))
                    })?;
                    for key in table.keys() {
                        if !keys.contains(&key.as_str()) {
                            unknown.push(format!("{name}.{key}"));
                        }
                    }
                }
            }
        }
        if !unknown.is_empty() {
            return Err(CliError::Validation(format!(
                "unknown config keys: {} (allowed sections: {})",
                unknown.join(", "),
                known.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(())
    }

    pub fn section(&self, name: &str) -> Result<Section<'_>, CliError> {
        match self.doc.get(name) {
            Some(toml::Value::Table(t)) => Ok(Section {
                name: name.to_string(),
                table: t,
            }),
            Some(_) => Err(CliError::Validation(format!("[{name}] must be a section"))),
            None => Err(CliError::Validation(format!("missing section [{name}]"))),
        }
    }

    pub fn optional_section(&self, name: &str) -> Option<Section<'_>> {
        match self.doc.get(name) {
            Some(toml::Value::Table(t)) => Some(Section {
                name: name.to_string(),
                table: t,
            }),
            _ => None,
        }
    }

    pub fn resolve_path(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

pub struct Section<'a> {
    name: String,
    table: &'a toml::Table,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Result<&toml::Value, CliError> {
        self.table.get(key).ok_or_else(|| {
            CliError::Validation(format!("missing key {}.{key}", self.name))
        })
    }

    fn type_err(&self, key: &str, want: &str) -> CliError {
        CliError::Validation(format!("{}.{key} must be a {want}", self.name))
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        match self.get(key)? {
            toml::Value::Float(x) => Ok(*x),
            toml::Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.type_err(key, "number")),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        if self.has(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        match self.get(key)? {
            toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
            _ => Err(self.type_err(key, "non-negative integer")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        if self.has(key) {
            self.usize(key)
        } else {
            Ok(default)
        }
    }

    pub fn i64(&self, key: &str) -> Result<i64, CliError> {
        match self.get(key)? {
            toml::Value::Integer(i) => Ok(*i),
            _ => Err(self.type_err(key, "integer")),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        if !self.has(key) {
            return Ok(default);
        }
        match self.get(key)? {
            toml::Value::Boolean(b) => Ok(*b),
            _ => Err(self.type_err(key, "boolean")),
        }
    }

    pub fn str(&self, key: &str) -> Result<String, CliError> {
        match self.get(key)? {
            toml::Value::String(s) => Ok(s.clone()),
            _ => Err(self.type_err(key, "string")),
        }
    }

    pub fn str_or(&self, key: &str, default: &str) -> Result<String, CliError> {
        if self.has(key) {
            self.str(key)
        } else {
            Ok(default.to_string())
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self.get(key)? {
            toml::Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.type_err(key, "array of numbers")),
                })
                .collect(),
            _ => Err(self.type_err(key, "array of numbers")),
        }
    }

    pub fn f64_list_or(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        if self.has(key) {
            self.f64_list(key)
        } else {
            Ok(default)
        }
    }

    /// Nested float arrays `[[..], ..]`.
    pub fn f64_nested(&self, key: &str) -> Result<Vec<Vec<f64>>, CliError> {
        match self.get(key)? {
            toml::Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Array(inner) => inner
                        .iter()
                        .map(|x| match x {
                            toml::Value::Float(f) => Ok(*f),
                            toml::Value::Integer(i) => Ok(*i as f64),
                            _ => Err(self.type_err(key, "array of number arrays")),
                        })
                        .collect(),
                    _ => Err(self.type_err(key, "array of number arrays")),
                })
                .collect(),
            _ => Err(self.type_err(key, "array of number arrays")),
        }
    }

    /// Complex number written as `[re, im]`.
    pub fn complex(&self, key: &str) -> Result<num_complex::Complex64, CliError> {
        let v = self.f64_list(key)?;
        if v.len() != 2 {
            return Err(self.type_err(key, "[re, im] pair"));
        }
        Ok(num_complex::Complex64::new(v[0], v[1]))
    }

    /// Integer pairs `[[n, p], ...]`.
    pub fn int_pairs(&self, key: &str) -> Result<Vec<(i64, i64)>, CliError> {
        match self.get(key)? {
            toml::Value::Array(a) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Array(p) if p.len() == 2 => {
                        let n = p[0]
                            .as_integer()
                            .ok_or_else(|| self.type_err(key, "array of [n, p] pairs"))?;
                        let q = p[1]
                            .as_integer()
                            .ok_or_else(|| self.type_err(key, "array of [n, p] pairs"))?;
                        Ok((n, q))
                    }
                    _ => Err(self.type_err(key, "array of [n, p] pairs")),
                })
                .collect(),
            _ => Err(self.type_err(key, "array of [n, p] pairs")),
        }
    }

    /// Exact rational written as `"n/d"` or `"n"`.
    pub fn rational(&self, key: &str) -> Result<Rational64, CliError> {
        let s = self.str(key)?;
        let parts: Vec<&str> = s.split('/').collect();
        let bad = || {
            CliError::Validation(format!(
                "{}.{key} must be an exact rational like \"1/2\", got {s:?}",
                self.name
            ))
        };
        match parts.as_slice() {
            [n] => Ok(Rational64::from_integer(n.trim().parse().map_err(|_| bad())?)),
            [n, d] => {
                let num: i64 = n.trim().parse().map_err(|_| bad())?;
                let den: i64 = d.trim().parse().map_err(|_| bad())?;
                if den == 0 {
                    return Err(bad());
                }
                Ok(Rational64::new(num, den))
            }
            _ => Err(bad()),
        }
    }

    /// A sweep axis: either `values = [..]` or `start`/`stop`/`count`
    /// prefixed by the given name.
    pub fn grid(&self, prefix: &str) -> Result<Vec<f64>, CliError> {
        let values_key = format!("{prefix}_values");
        if self.has(&values_key) {
            return self.f64_list(&values_key);
        }
        let start = self.f64(&format!("{prefix}_start"))?;
        let stop = self.f64(&format!("{prefix}_stop"))?;
        let count = self.usize(&format!("{prefix}_count"))?;
        if count == 0 {
            return Ok(vec![]);
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect())
    }
}
