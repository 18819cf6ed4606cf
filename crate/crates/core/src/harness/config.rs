use std::collections::BTreeMap;
use std::path::Path;

use super::HarnessError;
use crate::C64;

/// Recognized keys of a config file.
pub const KEYS: [&str; 26] = [
    "gate",
    "gates",
    "scheme",
    "omega0",
    "delta_cap",
    "delta_rule",
    "period",
    "t0",
    "sigma",
    "t_min",
    "t_max",
    "rtol",
    "atol",
    "output_points",
    "max_steps",
    "sc2_mode",
    "points_per_sigma",
    "eps_deg",
    "r_floor_rel",
    "envelope",
    "alpha",
    "beta",
    "format",
    "omega0_min",
    "omega0_max",
    "points",
];

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| HarnessError::Config { line, message };
            let (key, value) =
                content.split_once('=').ok_or_else(|| err("expected 'key = value'".into()))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key '{key}'")));
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(err(format!("empty value for '{key}'")));
            }
            if entries.insert(key.clone(), (line, value.to_string())).is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn typed<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, HarnessError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => f(v).map(Some).ok_or_else(|| HarnessError::Config {
                line: *line,
                message: format!("'{key}' expects {what}, got '{v}'"),
            }),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, HarnessError> {
        self.typed(key, "a finite number", |v| v.parse().ok().filter(|x: &f64| x.is_finite()))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, HarnessError> {
        self.typed(key, "a non-negative integer", |v| v.parse().ok())
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, HarnessError> {
        self.typed(key, "a non-negative integer", |v| v.parse().ok())
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, HarnessError> {
        self.typed(key, "true or false", |v| match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Some(true),
            "false" | "no" | "off" | "0" => Some(false),
            _ => None,
        })
    }

    pub fn complex(&self, key: &str) -> Result<Option<C64>, HarnessError> {
        self.typed(key, "a complex number such as 0.6-0.8i", parse_complex)
    }

    /// Applies `f` to the value of `key` and reports failures with its line.
    pub fn with<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, HarnessError> {
        self.typed(key, what, f)
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let finite = |z: C64| (z.re.is_finite() && z.im.is_finite()).then_some(z);
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return finite(C64::new(s.parse().ok()?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => finite(C64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => finite(C64::new(0.0, imag(body)?)),
    }
}
