//! `RunConfig`: flags and JSON config files merged into one resolved record.

use std::path::{Path, PathBuf};

use rmtlab::generator::Generator;
use rmtlab::lab::DEFAULT_SEED;
use rmtlab::linalg::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Audit,
    EtaStar,
    Simulate,
    Correlate,
    Verify,
    Experiment,
}

/// Flat keys mirror the flags. Unset values stay `None` until a command asks for them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// `[re, im]`; config files may also give a number or a string like `0.3+0.1i`.
    #[serde(default, deserialize_with = "de_z", skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// A number or a `"0x…"` string.
    #[serde(default, deserialize_with = "de_seed", skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Audit thresholds `c` and `C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_c: Option<f64>,
    #[serde(default, rename = "audit_C", skip_serializing_if = "Option::is_none")]
    pub audit_big_c: Option<f64>,
}

fn de_z<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<[f64; 2]>, D::Error> {
    use serde::de::Error;
    let v = serde_json::Value::deserialize(d)?;
    match v {
        serde_json::Value::Null => Ok(None),
        serde_json::Value::Number(x) => Ok(Some([x.as_f64().ok_or_else(|| D::Error::custom("z: bad number"))?, 0.0])),
        serde_json::Value::String(s) => parse_complex(&s).map(|z| Some([z.re, z.im])).map_err(D::Error::custom),
        serde_json::Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| D::Error::custom("z: expected [re, im]"))?;
            let im = a[1].as_f64().ok_or_else(|| D::Error::custom("z: expected [re, im]"))?;
            Ok(Some([re, im]))
        }
        _ => Err(D::Error::custom("z: expected a number, \"re+imi\" or [re, im]")),
    }
}

fn de_seed<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
    use serde::de::Error;
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::Null => Ok(None),
        serde_json::Value::Number(x) => {
            x.as_u64().map(Some).ok_or_else(|| D::Error::custom("seed: expected a non-negative integer"))
        }
        serde_json::Value::String(s) => parse_seed(&s).map(Some).map_err(D::Error::custom),
        _ => Err(D::Error::custom("seed: expected an integer or a \"0x…\" string")),
    }
}

/// Accepts `0.3`, `-0.2i`, `0.3+0.1i`, `0.3-0.1i` or `0.3,0.1`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let s = s.trim().replace(' ', "");
    let bad = || format!("z: cannot parse '{s}' (expected e.g. 0.3, 0.3+0.1i or 0.3,0.1)");
    if let Some((re, im)) = s.split_once(',') {
        return Ok(C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // Split at the last sign that is not part of an exponent or the leading sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        return Ok(C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?));
    }
    Ok(C64::new(s.parse().map_err(|_| bad())?, 0.0))
}

/// `0x`-prefixed hex or decimal.
pub fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(&h.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    r.map_err(|_| format!("seed: cannot parse '{s}'"))
}

impl RunConfig {
    /// Reads a flat config file, or the `config` object of a `manifest.json`.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("config: {}: {e}", path.display()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| format!("config: {}: {e}", path.display()))
    }

    /// Fields set in `other` win.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            command,
            generator,
            n,
            t,
            z,
            k,
            window,
            bins,
            samples,
            seed,
            out,
            threads,
            matrix_file,
            input,
            suite,
            audit_c,
            audit_big_c
        );
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn z(&self) -> C64 {
        self.z.map_or(C64::new(0.0, 0.0), |[re, im]| C64::new(re, im))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("rmtlab-out"))
    }

    pub fn require_t(&self) -> Result<f64, String> {
        match self.t {
            None => Err("missing required parameter 't' (--t)".into()),
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(format!("t must be positive, got {t}")),
            Some(t) => Ok(t),
        }
    }

    /// `--matrix-file` wins over `--generator`; the default generator is `ginibre`.
    pub fn generator(&self) -> Result<Generator, String> {
        if let Some(p) = &self.matrix_file {
            return Ok(Generator::File { path: p.clone() });
        }
        Generator::parse(self.generator.as_deref().unwrap_or("ginibre")).map_err(|e| e.to_string())
    }

    /// `N` from the flag, or the size of the matrix file.
    pub fn require_n(&self) -> Result<usize, String> {
        let from_file = match &self.matrix_file {
            Some(p) => {
                Some(rmtlab::linalg::read_cmat(p).map_err(|e| format!("matrix_file {}: {e}", p.display()))?.rows())
            }
            None => None,
        };
        match (self.n, from_file) {
            (Some(n), Some(m)) if n != m => Err(format!("N = {n} disagrees with the {m}x{m} matrix file")),
            (Some(n), _) | (None, Some(n)) if n >= 2 => Ok(n),
            (Some(n), _) | (None, Some(n)) => Err(format!("N must be at least 2, got {n}")),
            (None, None) => Err("missing required parameter 'N' (--N)".into()),
        }
    }

    pub fn positive_usize(&self, name: &str, v: Option<usize>, default: usize) -> Result<usize, String> {
        match v.unwrap_or(default) {
            0 => Err(format!("{name} must be at least 1")),
            x => Ok(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.3").unwrap(), C64::new(0.3, 0.0));
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), C64::new(0.3, 0.1));
        assert_eq!(parse_complex("-0.3-1e-2i").unwrap(), C64::new(-0.3, -0.01));
        assert_eq!(parse_complex("1e-3+2E+1i").unwrap(), C64::new(1e-3, 20.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), C64::new(0.5, -0.25));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x5EED").unwrap(), 0x5EED);
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert!(parse_seed("x").is_err());
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            command: Some(Command::Experiment),
            generator: Some("diag:0.5".into()),
            n: Some(64),
            t: Some(0.1 + 0.2),
            z: Some([0.3, -1.0 / 3.0]),
            k: Some(2),
            window: Some(6.0),
            bins: Some(40),
            samples: Some(10),
            seed: Some(u64::MAX),
            out: Some("x/y".into()),
            threads: Some(3),
            matrix_file: None,
            input: None,
            suite: None,
            audit_c: Some(0.05),
            audit_big_c: Some(20.0),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn flexible_z_and_unknown_keys() {
        let c: RunConfig = serde_json::from_str(r#"{"z": "0.3+0.1i", "N": 8}"#).unwrap();
        assert_eq!(c.z, Some([0.3, 0.1]));
        let c: RunConfig = serde_json::from_str(r#"{"z": 0.5}"#).unwrap();
        assert_eq!(c.z, Some([0.5, 0.0]));
        assert!(serde_json::from_str::<RunConfig>(r#"{"nope": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"seed": "0x5EED"}"#).unwrap();
        assert_eq!(c.seed, Some(0x5EED));
        assert!(serde_json::from_str::<RunConfig>(r#"{"seed": -1}"#).is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = RunConfig { t: Some(0.4), n: Some(16), ..Default::default() };
        let flags = RunConfig { t: Some(1.0), ..Default::default() };
        let m = file.overlay(flags);
        assert_eq!((m.t, m.n), (Some(1.0), Some(16)));
        assert_eq!(m.seed(), 0x5EED);
        assert!(RunConfig::default().require_t().unwrap_err().contains("'t'"));
    }
}
