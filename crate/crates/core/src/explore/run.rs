use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::autotune::MetricStats;

use super::config::{expand_ranges, ExploreConfig, FakeModel};
use super::{io_err, probe_compiler, shell_quote, ExploreError};

/// Measurements of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub config: BTreeMap<String, i64>,
    /// Wall time of each run, seconds.
    pub times: Vec<f64>,
    /// Joules per run, when a meter (or fake power) is configured.
    pub energies: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExploreResult {
    pub knobs: Vec<String>,
    pub rows: Vec<Row>,
}

/// Mean, min, max and sample standard deviation (n - 1 denominator; 0 for
/// a single value). The mean is clamped into [min, max] against rounding.
pub fn stats_of(xs: &[f64]) -> MetricStats {
    assert!(!xs.is_empty(), "statistics of an empty sample");
    let n = xs.len() as f64;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = (xs.iter().sum::<f64>() / n).clamp(min, max);
    let stddev = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MetricStats { mean, min, max, stddev }
}

fn describe(config: &BTreeMap<String, i64>) -> String {
    if config.is_empty() {
        return "baseline".to_string();
    }
    config.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

impl FakeModel {
    /// Hash-derived value in [-1, 1).
    fn jitter(&self, config: &BTreeMap<String, i64>, rep: u32) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(describe(config).as_bytes());
        h.update(rep.to_le_bytes());
        let d = h.finalize();
        let x = u64::from_le_bytes(d[..8].try_into().expect("8 bytes"));
        2.0 * ((x >> 11) as f64 / (1u64 << 53) as f64) - 1.0
    }

    /// Synthetic (time, energy) of repetition `rep` of `config`.
    pub fn sample(&self, config: &BTreeMap<String, i64>, rep: u32) -> Result<(f64, Option<f64>), ExploreError> {
        let mut t = self.base;
        for (k, e) in &self.exponents {
            t *= (config[k] as f64).powf(*e);
        }
        t *= 1.0 + self.noise * self.jitter(config, rep);
        if !(t.is_finite() && t > 0.0) {
            return Err(ExploreError::Config(format!(
                "fake model gives time {t} for {}",
                describe(config)
            )));
        }
        Ok((t, self.power.map(|p| t * p)))
    }
}

/// Builds and measures every configuration of `cfg`, in
/// [`expand_ranges`] order. Relative paths resolve against `base_dir`.
pub fn run_exploration(cfg: &ExploreConfig, base_dir: &Path) -> Result<ExploreResult, ExploreError> {
    cfg.validate()?;
    let configs = expand_ranges(&cfg.knobs)?;
    let knobs: Vec<String> = cfg.knobs.keys().cloned().collect();
    let mut rows = Vec::new();
    if let Some(fake) = &cfg.fake {
        for config in configs {
            let mut times = Vec::new();
            let mut energies = Vec::new();
            for rep in 0..cfg.repetitions {
                let (t, e) = fake.sample(&config, rep)?;
                times.push(t);
                energies.extend(e);
            }
            let energies = fake.power.is_some().then_some(energies);
            rows.push(Row { config, times, energies });
        }
        return Ok(ExploreResult { knobs, rows });
    }
    probe_compiler(&cfg.compiler)?;
    let work = base_dir.join(cfg.work_dir.clone().unwrap_or_else(|| format!("{}.work", cfg.output)));
    fs::create_dir_all(&work).map_err(io_err(&work))?;
    let work = work.canonicalize().map_err(io_err(&work))?;
    let sources: Vec<String> = cfg
        .sources
        .iter()
        .map(|s| shell_quote(&base_dir.join(s).display().to_string()))
        .collect();
    for (i, config) in configs.into_iter().enumerate() {
        let bin = work.join(format!("version_{i}"));
        let defines: Vec<String> = config.iter().map(|(k, v)| format!("-DAW_{k}={v}")).collect();
        let cmd = cfg
            .compiler
            .replace("{src}", &sources.join(" "))
            .replace("{out}", &shell_quote(&bin.display().to_string()))
            .replace("{flags}", &cfg.flags)
            .replace("{defines}", &defines.join(" "));
        let out = Command::new("sh").arg("-c").arg(&cmd).output().map_err(io_err(&work))?;
        if !out.status.success() {
            let log = format!("$ {cmd}\n{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
            return Err(ExploreError::CompileFailed { config: describe(&config), log });
        }
        let mut times = Vec::new();
        let mut energies = Vec::new();
        for _ in 0..cfg.repetitions {
            let (t, e) = measure(cfg, &bin, &config, &work, base_dir)?;
            times.push(t);
            energies.extend(e);
        }
        let energies = cfg.energy_meter.is_some().then_some(energies);
        rows.push(Row { config, times, energies });
    }
    Ok(ExploreResult { knobs, rows })
}

/// One exclusive run in `run_dir`: wall seconds and, with a meter, joules.
fn measure(
    cfg: &ExploreConfig,
    bin: &Path,
    config: &BTreeMap<String, i64>,
    work: &Path,
    run_dir: &Path,
) -> Result<(f64, Option<f64>), ExploreError> {
    let run_cmd: Vec<String> = std::iter::once(bin.display().to_string()).chain(cfg.run_args.iter().cloned()).collect();
    let mut command = match &cfg.energy_meter {
        Some(m) => {
            let quoted: Vec<String> = run_cmd.iter().map(|a| shell_quote(a)).collect();
            let mut c = Command::new("sh");
            c.arg("-c").arg(m.replace("{cmd}", &quoted.join(" ")));
            c
        }
        None => {
            let mut c = Command::new(&run_cmd[0]);
            c.args(&run_cmd[1..]).stdout(Stdio::null());
            c
        }
    };
    for (k, v) in config {
        command.env(format!("AW_{k}"), v.to_string());
    }
    let out_path: PathBuf = work.join("stdout.txt");
    if cfg.energy_meter.is_some() {
        let f = fs::File::create(&out_path).map_err(io_err(&out_path))?;
        command.stdout(f);
    }
    let err_path: PathBuf = work.join("stderr.txt");
    let err_file = fs::File::create(&err_path).map_err(io_err(&err_path))?;
    command.stderr(err_file).current_dir(run_dir);
    let start = Instant::now();
    let mut child = command.spawn().map_err(io_err(bin))?;
    let limit = Duration::from_secs_f64(cfg.timeout_seconds);
    let status = loop {
        if let Some(s) = child.try_wait().map_err(io_err(bin))? {
            break s;
        }
        if start.elapsed() > limit {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ExploreError::RunTimeout { config: describe(config), seconds: cfg.timeout_seconds });
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let elapsed = start.elapsed().as_secs_f64();
    if !status.success() {
        let stderr = fs::read_to_string(&err_path).unwrap_or_default();
        return Err(ExploreError::NonzeroExit {
            config: describe(config),
            code: status.code().unwrap_or(-1),
            stderr: stderr.trim().to_string(),
        });
    }
    let energy = match cfg.energy_meter {
        Some(_) => {
            let text = fs::read_to_string(&out_path).map_err(io_err(&out_path))?;
            let last = text.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("");
            let j: f64 = last
                .trim()
                .parse()
                .map_err(|_| ExploreError::Meter(format!("expected joules on the last line, got `{last}`")))?;
            Some(j)
        }
        None => None,
    };
    Ok((elapsed, energy))
}

/// Knowledge CSV: knob columns, then `metric:time:{mean,min,max,stddev}`
/// and, when measured, the same four for `energy`.
pub fn to_csv(result: &ExploreResult) -> String {
    let has_energy = result.rows.first().is_some_and(|r| r.energies.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = result.knobs.iter().map(|k| format!("knob:{k}")).collect();
    let metrics: &[&str] = if has_energy { &["time", "energy"] } else { &["time"] };
    for m in metrics {
        header.extend(crate::autotune::STATS.iter().map(|s| format!("metric:{m}:{s}")));
    }
    w.write_record(&header).expect("in-memory write");
    for r in &result.rows {
        let mut rec: Vec<String> = result.knobs.iter().map(|k| r.config[k].to_string()).collect();
        let mut push = |xs: &[f64]| {
            let s = stats_of(xs);
            rec.extend([s.mean, s.min, s.max, s.stddev].iter().map(|v| v.to_string()));
        };
        push(&r.times);
        if let Some(e) = &r.energies {
            push(e);
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let s = stats_of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!((s.mean, s.min, s.max), (2.5, 1.0, 4.0));
        assert!((s.stddev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(stats_of(&[0.1; 3]).stddev, 0.0);
        let s = stats_of(&[0.1, 0.1, 0.1]);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }

    #[test]
    fn fake_pipeline_is_deterministic() {
        let cfg = ExploreConfig::parse(
            "output = \"o.csv\"\nrepetitions = 4\n[knobs]\nt = { values = [1, 2] }\n[fake]\nnoise = 0.2\nseed = 3\nexponents = { t = -1.0 }\npower = 10.0\n",
        )
        .unwrap();
        let a = run_exploration(&cfg, Path::new(".")).unwrap();
        let b = run_exploration(&cfg, Path::new(".")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        for r in &a.rows {
            let base = 1.0 / r.config["t"] as f64;
            assert!(r.times.iter().all(|t| (t / base - 1.0).abs() <= 0.2));
        }
        let csv = to_csv(&a);
        assert!(csv.starts_with("knob:t,metric:time:mean,metric:time:min,metric:time:max,metric:time:stddev,metric:energy:mean,"));
        let kb = crate::autotune::parse_knowledge(&csv).unwrap();
        assert_eq!(kb.points.len(), 2);
    }

    #[test]
    fn missing_compiler() {
        let cfg = ExploreConfig::parse("output = \"o.csv\"\nsources = [\"x.c\"]\ncompiler = \"no-such-cc-xyz {src}\"\n").unwrap();
        assert_eq!(
            run_exploration(&cfg, Path::new(".")).unwrap_err(),
            ExploreError::CompilerNotFound("no-such-cc-xyz".into())
        );
    }
}
