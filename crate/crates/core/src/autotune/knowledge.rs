use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::TuneError;

/// Statistic suffixes of a metric column, in column order.
pub const STATS: [&str; 4] = ["mean", "min", "max", "stddev"];

/// A knob setting: an integer or an enumerated symbol. Integers order
/// numerically and before symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum KnobValue {
    Int(i64),
    Sym(String),
}

impl KnobValue {
    pub fn parse(text: &str) -> KnobValue {
        text.parse().map_or_else(|_| KnobValue::Sym(text.to_string()), KnobValue::Int)
    }
}

impl Ord for KnobValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (KnobValue::Int(a), KnobValue::Int(b)) => a.cmp(b),
            (KnobValue::Int(_), KnobValue::Sym(_)) => Ordering::Less,
            (KnobValue::Sym(_), KnobValue::Int(_)) => Ordering::Greater,
            (KnobValue::Sym(a), KnobValue::Sym(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for KnobValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KnobValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KnobValue::Int(i) => write!(f, "{i}"),
            KnobValue::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
}

impl MetricStats {
    /// A metric known only by its mean.
    pub fn exact(mean: f64) -> Self {
        MetricStats { mean, min: mean, max: mean, stddev: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub knobs: BTreeMap<String, KnobValue>,
    pub metrics: BTreeMap<String, MetricStats>,
}

impl OperatingPoint {
    /// Mean of `metric`; panics if the point lacks it (points of a
    /// validated knowledge base all share one metric set).
    pub fn mean(&self, metric: &str) -> f64 {
        self.metrics[metric].mean
    }

    pub fn knob_string(&self) -> String {
        let parts: Vec<String> = self.knobs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Operating points sharing one knob and metric name set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnowledgeBase {
    pub knobs: Vec<String>,
    pub metrics: Vec<String>,
    pub points: Vec<OperatingPoint>,
}

enum Column {
    Knob(String),
    Metric(String, usize),
}

fn schema(line: u64, message: impl Into<String>) -> TuneError {
    TuneError::Schema { line, message: message.into() }
}

fn column(name: &str) -> Result<Column, TuneError> {
    let parts: Vec<&str> = name.split(':').collect();
    let stat = |s: &str| STATS.iter().position(|x| *x == s);
    match parts.as_slice() {
        ["knob", k] if !k.is_empty() => Ok(Column::Knob(k.to_string())),
        ["metric", m, s] | [m, s] if !m.is_empty() && *m != "knob" && stat(s).is_some() => {
            Ok(Column::Metric(m.to_string(), stat(s).expect("checked")))
        }
        _ => Err(schema(1, format!("column `{name}` is neither `knob:<name>` nor `metric:<name>:<stat>`"))),
    }
}

/// Parses a knowledge CSV. Metric columns without `min`, `max` or
/// `stddev` companions default to the mean and 0.
pub fn parse_knowledge(text: &str) -> Result<KnowledgeBase, TuneError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    let mut cols = Vec::new();
    let mut knobs = Vec::new();
    let mut metrics: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for h in headers.iter() {
        let c = column(h)?;
        let key = match &c {
            Column::Knob(k) => format!("knob:{k}"),
            Column::Metric(m, s) => format!("metric:{m}:{}", STATS[*s]),
        };
        if !seen.insert(key.clone()) {
            return Err(schema(1, format!("duplicate column `{key}`")));
        }
        match &c {
            Column::Knob(k) => knobs.push(k.clone()),
            Column::Metric(m, _) if !metrics.contains(m) => metrics.push(m.clone()),
            Column::Metric(..) => {}
        }
        cols.push(c);
    }
    for m in &metrics {
        if !seen.contains(&format!("metric:{m}:mean")) {
            return Err(schema(1, format!("metric `{m}` has no mean column")));
        }
    }
    let mut points = Vec::new();
    let mut configs = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| schema(line, e.to_string()))?;
        if rec.len() != cols.len() {
            return Err(schema(line, format!("{} fields, expected {}", rec.len(), cols.len())));
        }
        let mut p = OperatingPoint { knobs: BTreeMap::new(), metrics: BTreeMap::new() };
        let mut stats: BTreeMap<&str, [Option<f64>; 4]> = BTreeMap::new();
        for (c, cell) in cols.iter().zip(rec.iter()) {
            if cell.is_empty() {
                let name = match c {
                    Column::Knob(k) => format!("knob:{k}"),
                    Column::Metric(m, s) => format!("metric:{m}:{}", STATS[*s]),
                };
                return Err(schema(line, format!("missing value for `{name}`")));
            }
            match c {
                Column::Knob(k) => {
                    p.knobs.insert(k.clone(), KnobValue::parse(cell));
                }
                Column::Metric(m, s) => {
                    let v: f64 = cell
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| schema(line, format!("`{cell}` is not a finite number")))?;
                    stats.entry(m.as_str()).or_default()[*s] = Some(v);
                }
            }
        }
        for (m, s) in stats {
            let mean = s[0].expect("mean column present");
            let st = MetricStats {
                mean,
                min: s[1].unwrap_or(mean),
                max: s[2].unwrap_or(mean),
                stddev: s[3].unwrap_or(0.0),
            };
            let slack = 1e-9 * st.min.abs().max(st.max.abs()).max(1.0);
            if st.stddev < 0.0 || st.min > st.mean + slack || st.mean > st.max + slack {
                return Err(schema(line, format!("metric `{m}` needs min <= mean <= max and stddev >= 0")));
            }
            p.metrics.insert(m.to_string(), st);
        }
        if !configs.insert(p.knobs.clone()) {
            return Err(TuneError::DuplicatePoint { line, knobs: p.knob_string() });
        }
        points.push(p);
    }
    Ok(KnowledgeBase { knobs, metrics, points })
}

pub fn load_knowledge(path: &Path) -> Result<KnowledgeBase, TuneError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TuneError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_knowledge(&text)
}

/// `name=value` lines in knob-name order.
pub fn knob_file_text(point: &OperatingPoint) -> String {
    point.knobs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn write_knob_file(point: &OperatingPoint, path: &Path) -> Result<(), TuneError> {
    crate::fsutil::atomic_write(path, knob_file_text(point).as_bytes())
        .map_err(|e| TuneError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Reads a knob file the way the generated runtime does: `name=value`
/// lines, blank lines and `#` comments ignored, later lines win.
pub fn parse_knob_file(text: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            out.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points() {
        let kb = parse_knowledge(
            "knob:k,metric:throughput:mean,metric:error:mean\n1,10,0.05\n2,8,0.02\n3,12,0.07\n",
        )
        .unwrap();
        assert_eq!(kb.points.len(), 3);
        assert_eq!(kb.knobs, ["k"]);
        assert_eq!(kb.metrics, ["throughput", "error"]);
        assert_eq!(kb.points[1].metrics["error"], MetricStats::exact(0.02));
    }

    #[test]
    fn schema_errors() {
        let e = parse_knowledge("knob:k,metric:t:mean\n1,\n").unwrap_err();
        assert!(matches!(e, TuneError::Schema { line: 2, .. }), "{e}");
        let e = parse_knowledge("knob:k,metric:t:mean\n1\n").unwrap_err();
        assert!(matches!(e, TuneError::Schema { line: 2, .. }), "{e}");
        let e = parse_knowledge("knob:k,weird\n1,2\n").unwrap_err();
        assert!(matches!(e, TuneError::Schema { line: 1, .. }));
        let e = parse_knowledge("knob:k,metric:t:min\n1,2\n").unwrap_err();
        assert!(matches!(e, TuneError::Schema { line: 1, .. }));
        let e = parse_knowledge("knob:k,metric:t:mean,metric:t:min\n1,2,3\n").unwrap_err();
        assert!(matches!(e, TuneError::Schema { line: 2, .. }));
        let e = parse_knowledge("knob:k,metric:t:mean\n1,2\n1,3\n").unwrap_err();
        assert!(matches!(e, TuneError::DuplicatePoint { line: 3, .. }));
    }

    #[test]
    fn unprefixed_metric_columns() {
        let kb = parse_knowledge("knob:threads,time:mean,time:min,time:max,time:stddev\n1,2,1,3,0.5\n").unwrap();
        assert_eq!(
            kb.points[0].metrics["time"],
            MetricStats { mean: 2.0, min: 1.0, max: 3.0, stddev: 0.5 }
        );
    }

    #[test]
    fn knob_values_order() {
        let mut v = vec![KnobValue::Sym("b".into()), KnobValue::Int(10), KnobValue::Int(2), KnobValue::Sym("a".into())];
        v.sort();
        assert_eq!(v, [KnobValue::Int(2), KnobValue::Int(10), KnobValue::Sym("a".into()), KnobValue::Sym("b".into())]);
    }

    #[test]
    fn knob_file_round_trip() {
        let kb = parse_knowledge("knob:Knob1,knob:a,metric:t:mean\n1,x,2\n").unwrap();
        let text = knob_file_text(&kb.points[0]);
        assert_eq!(text, "Knob1=1\na=x\n");
        let back = parse_knob_file(&format!("# c\n\n{text}"));
        assert_eq!(back["Knob1"], "1");
        assert_eq!(back["a"], "x");
    }
}
