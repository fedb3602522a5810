use std::fmt;
use std::str::FromStr;

use crate::frontend::syntax;
use crate::frontend::{NodeId, NodeKind};
use crate::weave::{JoinPoint, JpKind, Place, Session};

use super::multiversion::ensure_include;
use super::purity::detect_memoizable;
use super::StrategyError;

/// What to do when a new result maps to an occupied table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MemoPolicy {
    /// Overwrite the entry (the previous key is evicted).
    #[default]
    Replace,
    /// Keep the first key stored in the entry.
    Keep,
}

impl FromStr for MemoPolicy {
    type Err = StrategyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "replace" => Ok(MemoPolicy::Replace),
            "keep" => Ok(MemoPolicy::Keep),
            _ => Err(StrategyError::InvalidConfig(format!(
                "memo policy `{s}` (expected replace or keep)"
            ))),
        }
    }
}

impl fmt::Display for MemoPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoPolicy::Replace => "replace",
            MemoPolicy::Keep => "keep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoConfig {
    pub function: String,
    /// Number of entries; a power of two.
    pub table_size: u32,
    pub policy: MemoPolicy,
    pub enabled_by_default: bool,
    /// Memoize even when the function is not detected as memoizable.
    pub force: bool,
}

impl MemoConfig {
    pub fn new(function: &str, table_size: u32, policy: MemoPolicy) -> Self {
        MemoConfig {
            function: function.to_string(),
            table_size,
            policy,
            enabled_by_default: true,
            force: false,
        }
    }
}

/// Names of the files produced for one memoized function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoOutput {
    pub wrapper: String,
    pub header: String,
    pub source: String,
}

/// Routes every call of `cfg.function` through a generated wrapper backed
/// by a direct-mapped result table. The wrapper goes right after the
/// function; the table lives in `aw_memo_<fn>.c`, registered as a support
/// file of the session.
pub fn memoize(s: &mut Session, cfg: &MemoConfig) -> Result<MemoOutput, StrategyError> {
    let fname = cfg.function.as_str();
    if cfg.table_size == 0 || !cfg.table_size.is_power_of_two() {
        return Err(StrategyError::InvalidConfig(format!(
            "table size {} is not a power of two",
            cfg.table_size
        )));
    }
    let f = syntax::find_function(s.ast(), fname).ok_or_else(|| StrategyError::FunctionNotFound(fname.to_string()))?;
    let ret = syntax::return_type(s.ast(), f);
    let params = syntax::function_params(s.ast(), f);
    let unsupported = |why: &str| StrategyError::UnsupportedSignature(format!("`{fname}`: {why}"));
    if !ret.is_arithmetic() {
        return Err(unsupported("the return type is not arithmetic"));
    }
    if params.is_empty() {
        return Err(unsupported("no parameters"));
    }
    let types: Vec<_> = params.iter().map(|p| syntax::param_type(s.ast(), *p)).collect();
    if !types.iter().all(|t| t.is_arithmetic()) {
        return Err(unsupported("a parameter is not arithmetic"));
    }
    if types.iter().any(|t| t.base != types[0].base) {
        return Err(unsupported("parameters do not share one type"));
    }
    if types[0].base == "long double" || ret.base == "long double" {
        // padding bytes would take part in the key
        return Err(unsupported("long double is not supported"));
    }
    if syntax::top_level_names(s.ast()).iter().any(|n| n == &format!("{fname}_wrapper")) {
        return Err(StrategyError::DuplicateName(format!("{fname}_wrapper")));
    }
    if !cfg.force && !detect_memoizable(s.ast()).iter().any(|n| n == fname) {
        return Err(unsupported("not detected as side-effect free (use force to override)"));
    }

    let arg_ty = types[0].base.clone();
    let ret_ty = ret.base.clone();
    let n = params.len();
    let wrapper = format!("{fname}_wrapper");
    let header = format!("aw_memo_{fname}.h");
    let source = format!("aw_memo_{fname}.c");

    // call sites first, so the wrapper's own call stays direct
    let calls: Vec<NodeId> = s
        .ast()
        .descendants(s.ast().root())
        .into_iter()
        .filter(|c| s.ast().is_live(*c) && s.ast().kind(*c) == NodeKind::Call)
        .filter(|c| syntax::call_name(s.ast(), *c) == fname)
        .collect();
    for c in calls {
        s.rename_call(c, &wrapper);
    }
    s.report_mut().actions += 1;

    let formals: Vec<String> = (0..n).map(|i| format!("{arg_ty} a{i}")).collect();
    let actuals: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let mut text = format!(
        "{ret_ty} {wrapper}({})\n{{\n{arg_ty} aw_args[{n}];\n{ret_ty} aw_r;\nif (!{fname}_memo_active())\nreturn {fname}({});\n",
        formals.join(", "),
        actuals.join(", ")
    );
    for (i, a) in actuals.iter().enumerate() {
        text.push_str(&format!("aw_args[{i}] = {a};\n"));
    }
    text.push_str(&format!(
        "if ({fname}_memo_lookup(aw_args, &aw_r))\nreturn aw_r;\naw_r = {fname}({});\n{fname}_memo_update(aw_args, aw_r);\nreturn aw_r;\n}}",
        actuals.join(", ")
    ));
    s.insert(
        JoinPoint {
            kind: JpKind::Function,
            node: f,
        },
        Place::After,
        &text,
    )?;
    ensure_include(s, &header)?;
    s.add_support_file(&header, memo_header(fname, &arg_ty, &ret_ty, n));
    s.add_support_file(&source, memo_source(fname, &arg_ty, &ret_ty, n, cfg));
    Ok(MemoOutput {
        wrapper,
        header,
        source,
    })
}

/// Header of the generated table for `fname`.
pub fn memo_header(fname: &str, arg_ty: &str, ret_ty: &str, n: usize) -> String {
    let guard = format!("AW_MEMO_{}_H", fname.to_ascii_uppercase());
    let formals: Vec<String> = (0..n).map(|i| format!("{arg_ty} a{i}")).collect();
    format!(
        r#"#ifndef {guard}
#define {guard}

#ifndef AW_MEMO_REPLACE
#define AW_MEMO_REPLACE 0
#define AW_MEMO_KEEP 1
#endif

/* Run-time controls: 0 disables the table (calls go straight through),
   policy is AW_MEMO_REPLACE or AW_MEMO_KEEP. */
extern int {fname}_memo_enabled;
extern int {fname}_memo_policy;

{ret_ty} {fname}_wrapper({formals});

int {fname}_memo_active(void);
int {fname}_memo_lookup(const {arg_ty} *args, {ret_ty} *result);
void {fname}_memo_update(const {arg_ty} *args, {ret_ty} result);
void {fname}_memo_stats(unsigned long *hits, unsigned long *misses, unsigned long *evictions);
void {fname}_memo_clear(void);

#endif
"#,
        formals = formals.join(", ")
    )
}

/// Table implementation for `fname`: direct-mapped, FNV-1a over the raw
/// argument bytes, bitwise key comparison.
pub fn memo_source(fname: &str, arg_ty: &str, ret_ty: &str, n: usize, cfg: &MemoConfig) -> String {
    let size = cfg.table_size;
    let policy = if cfg.policy == MemoPolicy::Keep {
        "AW_MEMO_KEEP"
    } else {
        "AW_MEMO_REPLACE"
    };
    let enabled = u8::from(cfg.enabled_by_default);
    format!(
        r#"#include "aw_memo_{fname}.h"

#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#define AW_SIZE_{fname} {size}u
#define AW_NARGS_{fname} {n}

int {fname}_memo_enabled = {enabled};
int {fname}_memo_policy = {policy};

static struct {{
    int valid;
    {arg_ty} args[AW_NARGS_{fname}];
    {ret_ty} result;
}} {fname}_table[AW_SIZE_{fname}];

static unsigned long {fname}_hits, {fname}_misses, {fname}_evictions;
static int {fname}_ready;

static void {fname}_report(void)
{{
    fprintf(stderr, "memo {fname} hits=%lu misses=%lu evictions=%lu\n",
            {fname}_hits, {fname}_misses, {fname}_evictions);
}}

static void {fname}_init(void)
{{
    const char *enabled = getenv("AW_MEMO_ENABLED_{fname}");
    const char *policy = getenv("AW_MEMO_POLICY_{fname}");
    {fname}_ready = 1;
    if (enabled)
        {fname}_memo_enabled = atoi(enabled) != 0;
    if (policy)
        {fname}_memo_policy = (strcmp(policy, "keep") == 0 || strcmp(policy, "1") == 0)
            ? AW_MEMO_KEEP : AW_MEMO_REPLACE;
    if (getenv("AW_MEMO_STATS"))
        atexit({fname}_report);
}}

int {fname}_memo_active(void)
{{
    if (!{fname}_ready)
        {fname}_init();
    return {fname}_memo_enabled;
}}

static size_t {fname}_slot(const {arg_ty} *args)
{{
    const unsigned char *b = (const unsigned char *)args;
    uint64_t h = 14695981039346656037ULL;
    size_t i;
    for (i = 0; i < sizeof({arg_ty}) * AW_NARGS_{fname}; i++) {{
        h ^= b[i];
        h *= 1099511628211ULL;
    }}
    return (size_t)(h & (uint64_t)(AW_SIZE_{fname} - 1u));
}}

int {fname}_memo_lookup(const {arg_ty} *args, {ret_ty} *result)
{{
    size_t s = {fname}_slot(args);
    if ({fname}_table[s].valid
        && memcmp({fname}_table[s].args, args, sizeof {fname}_table[s].args) == 0) {{
        *result = {fname}_table[s].result;
        {fname}_hits++;
        return 1;
    }}
    {fname}_misses++;
    return 0;
}}

void {fname}_memo_update(const {arg_ty} *args, {ret_ty} result)
{{
    size_t s = {fname}_slot(args);
    if ({fname}_table[s].valid) {{
        if ({fname}_memo_policy == AW_MEMO_KEEP)
            return;
        if (memcmp({fname}_table[s].args, args, sizeof {fname}_table[s].args) != 0)
            {fname}_evictions++;
    }}
    {fname}_table[s].valid = 1;
    memcpy({fname}_table[s].args, args, sizeof {fname}_table[s].args);
    {fname}_table[s].result = result;
}}

void {fname}_memo_stats(unsigned long *hits, unsigned long *misses, unsigned long *evictions)
{{
    *hits = {fname}_hits;
    *misses = {fname}_misses;
    *evictions = {fname}_evictions;
}}

void {fname}_memo_clear(void)
{{
    memset({fname}_table, 0, sizeof {fname}_table);
    {fname}_hits = {fname}_misses = {fname}_evictions = 0;
}}
"#
    )
}

/// Slot of an argument tuple in a table of `size` entries, as computed by
/// the generated C code.
pub fn memo_slot(arg_bytes: &[u8], size: u32) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in arg_bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h & (u64::from(size) - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const SRC: &str = "#include <math.h>\n\ndouble f(double x) { return sqrt(x) * 2.0; }\n\nint main(void) {\n    double s = f(1.0) + f(2.0);\n    return s > 0;\n}\n";

    #[test]
    fn wrapper_and_call_sites() {
        let mut s = Session::new(parse(SRC, "t.c").unwrap());
        let out = memoize(&mut s, &MemoConfig::new("f", 64, MemoPolicy::Replace)).unwrap();
        assert_eq!(out.wrapper, "f_wrapper");
        let text = s.ast().emit();
        assert!(text.starts_with("#include <math.h>\n#include \"aw_memo_f.h\"\n\ndouble f(double x)"));
        assert!(text.contains("double s = f_wrapper(1.0) + f_wrapper(2.0);"));
        assert!(text.contains(
            "double f_wrapper(double a0) {\n    double aw_args[1];\n    double aw_r;\n    if (!f_memo_active()) return f(a0);\n"
        ));
        // the only direct call left is the wrapper's
        assert_eq!(text.matches(" f(a0)").count(), 2);
        let src = &s.support_files()["aw_memo_f.c"];
        assert!(src.contains("#define AW_SIZE_f 64u"));
        assert!(src.contains("int f_memo_policy = AW_MEMO_REPLACE;"));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut s = Session::new(parse(SRC, "t.c").unwrap());
        assert!(matches!(
            memoize(&mut s, &MemoConfig::new("f", 3, MemoPolicy::Keep)),
            Err(StrategyError::InvalidConfig(_))
        ));
        assert!(matches!(
            memoize(&mut s, &MemoConfig::new("main", 4, MemoPolicy::Keep)),
            Err(StrategyError::UnsupportedSignature(_))
        ));
        assert!(matches!(
            memoize(&mut s, &MemoConfig::new("g", 4, MemoPolicy::Keep)),
            Err(StrategyError::FunctionNotFound(_))
        ));
        let mixed = "int g(int a, double b) { return a; }";
        let mut s = Session::new(parse(mixed, "t.c").unwrap());
        assert!(matches!(
            memoize(&mut s, &MemoConfig::new("g", 4, MemoPolicy::Keep)),
            Err(StrategyError::UnsupportedSignature(_))
        ));
    }

    #[test]
    fn impure_needs_force() {
        let src = "int n;\nint g(int a) { n++; return a; }\n";
        let mut s = Session::new(parse(src, "t.c").unwrap());
        let mut cfg = MemoConfig::new("g", 4, MemoPolicy::Keep);
        assert!(memoize(&mut s, &cfg).is_err());
        cfg.force = true;
        memoize(&mut s, &cfg).unwrap();
    }

    #[test]
    fn fnv_reference_vector() {
        // FNV-1a 64 of "a" is 0xaf63dc4c8601ec8c
        assert_eq!(memo_slot(b"a", 1 << 31), 0xaf63dc4c8601ec8c & ((1 << 31) - 1));
        assert_eq!(memo_slot(b"", 1), 0);
    }
}
