use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::ExploreError;

/// Values one knob takes.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Range {
    Values(Vec<i64>),
    /// `start * factor^i` for `i` in `0..count`.
    Geometric { start: i64, factor: i64, count: u32 },
}

impl Range {
    pub fn expand(&self) -> Result<Vec<i64>, ExploreError> {
        let v = match self {
            Range::Values(v) => v.clone(),
            Range::Geometric { start, factor, count } => {
                let mut out = Vec::new();
                let mut x = *start;
                for i in 0..*count {
                    if i > 0 {
                        x = x
                            .checked_mul(*factor)
                            .ok_or_else(|| ExploreError::Config("geometric range overflows i64".into()))?;
                    }
                    out.push(x);
                }
                out
            }
        };
        if v.is_empty() {
            return Err(ExploreError::Config("empty knob range".into()));
        }
        Ok(v)
    }
}

/// Cartesian product of the ranges. Knobs are taken in name order, the
/// last one varying fastest. No knobs gives one empty configuration.
pub fn expand_ranges(knobs: &BTreeMap<String, Range>) -> Result<Vec<BTreeMap<String, i64>>, ExploreError> {
    let mut out = vec![BTreeMap::new()];
    for (name, r) in knobs {
        let values = r.expand()?;
        out = out
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(name.clone(), *v);
                    c
                })
            })
            .collect();
    }
    Ok(out)
}

/// Synthetic cost model replacing compile and run:
/// `time = base * prod(value_k ^ exponent_k) * (1 + noise * u)` with `u`
/// in [-1, 1) derived from a hash of (seed, configuration, repetition).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FakeModel {
    #[serde(default = "one")]
    pub base: f64,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub exponents: BTreeMap<String, f64>,
    /// Watts; when set, energy = time * power.
    pub power: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_reps() -> u32 {
    3
}

fn default_timeout() -> f64 {
    60.0
}

fn default_compiler() -> String {
    "cc -O2 {flags} {defines} {src} -o {out} -lm".to_string()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreConfig {
    /// C files, relative to the config file.
    #[serde(default)]
    pub sources: Vec<String>,
    /// Build command; `{src} {out} {flags} {defines}` are substituted.
    #[serde(default = "default_compiler")]
    pub compiler: String,
    #[serde(default)]
    pub flags: String,
    #[serde(default)]
    pub knobs: BTreeMap<String, Range>,
    #[serde(default = "default_reps")]
    pub repetitions: u32,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: f64,
    /// CSV path, relative to the config file.
    pub output: String,
    #[serde(default)]
    pub run_args: Vec<String>,
    /// Command template wrapping one run; `{cmd}` is the run command. The
    /// last line of its stdout is the energy in joules.
    pub energy_meter: Option<String>,
    /// Build directory, relative to the config file.
    pub work_dir: Option<String>,
    pub fake: Option<FakeModel>,
}

fn is_identifier(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ExploreConfig {
    pub fn parse(text: &str) -> Result<Self, ExploreError> {
        let cfg: ExploreConfig = toml::from_str(text).map_err(|e| ExploreError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExploreError> {
        let text = std::fs::read_to_string(path).map_err(super::io_err(path))?;
        Self::parse(&text)
    }

    // `!(x > 0.0)` also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ExploreError> {
        let bad = |m: String| Err(ExploreError::Config(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.timeout_seconds > 0.0) {
            return bad("timeout_seconds must be positive".into());
        }
        for (k, r) in &self.knobs {
            if !is_identifier(k) {
                return bad(format!("knob name `{k}` is not a C identifier"));
            }
            r.expand()?;
        }
        match &self.fake {
            Some(f) => {
                if !(f.base > 0.0) || !(0.0..1.0).contains(&f.noise) {
                    return bad("fake model needs base > 0 and 0 <= noise < 1".into());
                }
                if let Some(k) = f.exponents.keys().find(|k| !self.knobs.contains_key(*k)) {
                    return bad(format!("fake exponent for unknown knob `{k}`"));
                }
                if f.power.is_some_and(|p| !(p > 0.0)) {
                    return bad("fake power must be positive".into());
                }
            }
            None if self.sources.is_empty() => return bad("no sources to build".into()),
            None => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(Range::Geometric { start: 1, factor: 2, count: 7 }.expand().unwrap(), [1, 2, 4, 8, 16, 32, 64]);
        assert!(Range::Values(vec![]).expand().is_err());
        assert!(Range::Geometric { start: 2, factor: 1 << 40, count: 3 }.expand().is_err());
        let knobs = BTreeMap::from([
            ("b".to_string(), Range::Values(vec![1, 2, 3])),
            ("a".to_string(), Range::Values(vec![7, 8, 9, 10])),
        ]);
        let c = expand_ranges(&knobs).unwrap();
        assert_eq!(c.len(), 12);
        assert_eq!((c[0]["a"], c[0]["b"]), (7, 1));
        assert_eq!((c[1]["a"], c[1]["b"]), (7, 2));
        assert_eq!(expand_ranges(&BTreeMap::new()).unwrap(), vec![BTreeMap::new()]);
    }

    #[test]
    fn parse_config() {
        let cfg = ExploreConfig::parse(
            r#"
output = "out.csv"
repetitions = 5
[knobs]
threads = { geometric = { start = 1, factor = 2, count = 7 } }
size = { values = [10, 20] }
[fake]
base = 2.0
noise = 0.1
exponents = { threads = -0.8 }
"#,
        )
        .unwrap();
        assert_eq!(cfg.knobs.len(), 2);
        assert_eq!(cfg.fake.unwrap().exponents["threads"], -0.8);
        assert!(ExploreConfig::parse("output = \"x\"\nrepetitions = 0\n[fake]\n").is_err());
        assert!(ExploreConfig::parse("output = \"x\"\n").is_err(), "no sources and no fake model");
        assert!(ExploreConfig::parse("output = \"x\"\nbogus = 1\n[fake]\n").is_err());
        assert!(ExploreConfig::parse("output = \"x\"\n[knobs]\n\"1x\" = { values = [1] }\n[fake]\n").is_err());
    }
}
