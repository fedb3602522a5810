use serde::Serialize;

use crate::frontend::{count_sloc, Ast, NodeKind};

/// Counters for one weave session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WeaveReport {
    /// Select chains evaluated.
    pub selects: u64,
    /// Attribute reads, by filters, conditions and interpolation.
    pub attributes: u64,
    pub actions: u64,
    pub inserts: u64,
    /// Logical lines in all inserted fragments.
    pub native_sloc: u64,
}

pub const REPORT_HEADER: &str = "File,Selects,Attributes,Actions,Inserts,NativeSLoC";

impl WeaveReport {
    /// One CSV row in [`REPORT_HEADER`] order (no trailing newline).
    pub fn csv_row(&self, file: &str) -> String {
        format!(
            "{},{},{},{},{},{}",
            csv_field(file),
            self.selects,
            self.attributes,
            self.actions,
            self.inserts,
            self.native_sloc
        )
    }

    pub fn absorb(&mut self, other: &WeaveReport) {
        self.selects += other.selects;
        self.attributes += other.attributes;
        self.actions += other.actions;
        self.inserts += other.inserts;
        self.native_sloc += other.native_sloc;
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Size comparison between a unit before and after weaving.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StaticMetrics {
    pub aspect_sloc: u64,
    pub aspect_count: u64,
    pub input_sloc: u64,
    pub input_funcs: u64,
    pub woven_sloc: u64,
    pub woven_funcs: u64,
    pub delta_sloc: i64,
    pub delta_funcs: i64,
}

pub const METRICS_HEADER: &str =
    "File,AspectSLoC,Aspects,InputSLoC,InputFuncs,WovenSLoC,WovenFuncs,DeltaSLoC,DeltaFuncs";

impl StaticMetrics {
    /// One CSV row in [`METRICS_HEADER`] order (no trailing newline).
    pub fn csv_row(&self, file: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            csv_field(file),
            self.aspect_sloc,
            self.aspect_count,
            self.input_sloc,
            self.input_funcs,
            self.woven_sloc,
            self.woven_funcs,
            self.delta_sloc,
            self.delta_funcs
        )
    }
}

fn live_functions(ast: &Ast) -> u64 {
    ast.children(ast.root())
        .filter(|c| ast.is_live(*c) && ast.kind(*c) == NodeKind::Function)
        .count() as u64
}

pub fn static_metrics(input: &Ast, woven: &Ast, aspect_sloc: u64, aspect_count: u64) -> StaticMetrics {
    let input_sloc = count_sloc(input) as u64;
    let woven_sloc = count_sloc(woven) as u64;
    let input_funcs = live_functions(input);
    let woven_funcs = live_functions(woven);
    StaticMetrics {
        aspect_sloc,
        aspect_count,
        input_sloc,
        input_funcs,
        woven_sloc,
        woven_funcs,
        delta_sloc: woven_sloc as i64 - input_sloc as i64,
        delta_funcs: woven_funcs as i64 - input_funcs as i64,
    }
}
