mod common;

use std::collections::BTreeMap;

use aweave::dsl::{parse_aspects, run_aspects};
use aweave::frontend::parse;
use aweave::weave::{static_metrics, JpKind, SelectChain, Session, Step, Value};
use proptest::prelude::*;

fn no_args() -> BTreeMap<String, String> {
    BTreeMap::new()
}

#[test]
fn empty_aspect_is_identity_on_corpus() {
    let program = parse_aspects("aspectdef Empty\nend\n").unwrap();
    for path in common::corpus_files() {
        let src = common::read(&path);
        let mut s = Session::new(parse(&src, "x.c").unwrap());
        run_aspects(&program, &mut s, None, &no_args()).unwrap();
        assert_eq!(s.ast().emit(), src, "{}", path.display());
        assert!(s.support_files().is_empty());
    }
}

#[test]
fn function_loop_chain_on_nested_fixture() {
    let src = common::read(&common::corpus("fixtures/nested.c"));
    let mut s = Session::new(parse(&src, "nested.c").unwrap());
    let chain = SelectChain::new(vec![Step::new(JpKind::Function), Step::new(JpKind::Loop)]);
    let tuples = s.select(&chain).unwrap();
    assert_eq!(tuples.len(), 2);
    let lines: Vec<Value> = tuples.iter().map(|t| s.attribute(t[1], "line").unwrap()).collect();
    assert_eq!(lines, [Value::Int(5), Value::Int(6)]);
    let vars: Vec<Value> = tuples.iter().map(|t| s.attribute(t[1], "indexVar").unwrap()).collect();
    assert_eq!(vars, [Value::Str("i".into()), Value::Str("j".into())]);
    let inner: Vec<Value> = tuples.iter().map(|t| s.attribute(t[1], "isInnermost").unwrap()).collect();
    assert_eq!(inner, [Value::Bool(false), Value::Bool(true)]);

    // loop.loop pairs each loop with the loops nested in it
    let chain = SelectChain::new(vec![Step::new(JpKind::Function), Step::new(JpKind::Loop), Step::new(JpKind::Loop)]);
    assert_eq!(s.select(&chain).unwrap().len(), 1);
}

#[test]
fn shipped_aspects_weave_and_keep_metric_relations() {
    let shipped = common::shipped_aspects();
    assert!(shipped.len() >= 6);
    for a in &shipped {
        let (input, s, program) = a.weave();
        let r = s.report();
        assert!(r.attributes >= r.selects, "{}: {r:?}", a.name());
        assert!(r.inserts <= r.actions, "{}: {r:?}", a.name());
        let m = static_metrics(&input, s.ast(), program.sloc(), program.aspects.len() as u64);
        assert_eq!(m.delta_sloc, m.woven_sloc as i64 - m.input_sloc as i64);
        assert_eq!(m.delta_funcs, m.woven_funcs as i64 - m.input_funcs as i64);
        // the woven text parses again
        parse(&s.ast().emit(), "woven.c").unwrap_or_else(|e| panic!("{}: {e}", a.name()));
    }
}

#[test]
fn multiversion_aspect_adds_one_function_per_clone() {
    let a = common::shipped_aspects().into_iter().find(|a| a.name() == "multiversion.aw").unwrap();
    let (input, s, program) = a.weave();
    let m = static_metrics(&input, s.ast(), program.sloc(), 1);
    let text = s.ast().emit();
    let clones = ["measure_overlap_f", "cross_overlap_f", "gauss_overlap_f"];
    for c in clones {
        assert!(text.contains(&format!("float {c}(")), "{c}");
    }
    assert_eq!(m.delta_funcs, clones.len() as i64);
}

#[test]
fn typed_version_leaves_original_region_byte_identical() {
    let src = common::read(&common::corpus("overlap.c"));
    let mut s = Session::new(parse(&src, "overlap.c").unwrap());
    let p = parse_aspects("aspectdef A call CreateTypedVersion(func = \"measure_overlap\") end").unwrap();
    run_aspects(&p, &mut s, None, &no_args()).unwrap();
    let out = s.ast().emit();
    // the clones are appended after their originals; dropping them
    // restores the input exactly
    let mut restored = out.clone();
    for name in ["gauss_overlap_f", "cross_overlap_f", "measure_overlap_f"] {
        let start = restored.find(&format!("\nfloat {name}(")).unwrap();
        let end = start + 1 + restored[start + 1..].find("\n}\n").unwrap() + 3;
        restored.replace_range(start..end, "");
    }
    assert_eq!(restored, src);
}

#[test]
fn change_precision_counts_rewritten_decls() {
    let src = "double f(double x, int n) {\n    double a = x;\n    double *p = &a;\n    int k = n;\n    return *p + k;\n}\n";
    let p = parse_aspects(
        "aspectdef A\n  select d: function{name == \"f\"}.decl end\n  apply to d if $decl.type contains \"double\"\n    changeType(\"double\", \"float\")\n  end\nend\n",
    )
    .unwrap();
    let mut s = Session::new(parse(src, "f.c").unwrap());
    run_aspects(&p, &mut s, None, &no_args()).unwrap();
    assert_eq!(s.report().actions, 3);
    assert_eq!(s.ast().emit(), "double f(float x, int n) {\n    float a = x;\n    float *p = &a;\n    int k = n;\n    return *p + k;\n}\n");
}

const TWO: &str = "void a(void) {\n    x();\n}\n\nvoid b(void) {\n    y();\n}\n";

fn tag(func: &str, text: &str) -> String {
    format!(
        "aspectdef T{func}\n  select c: function{{name == \"{func}\"}}.call end\n  apply to c insert before \"{text};\" end\nend\n"
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Two aspects on disjoint functions: two sessions in a row give the
    /// same text as one program calling both.
    #[test]
    fn sequential_sessions_equal_one_composed_program(
        fa in "[a-z]{1,6}", fb in "[a-z]{1,6}", a_first in any::<bool>(),
    ) {
        prop_assume!(!aweave::frontend::is_keyword(&fa) && !aweave::frontend::is_keyword(&fb));
        let (first, second) = if a_first { (("a", &fa), ("b", &fb)) } else { (("b", &fb), ("a", &fa)) };
        let asp1 = tag(first.0, &format!("{}()", first.1));
        let asp2 = tag(second.0, &format!("{}()", second.1));

        let mut s = Session::new(parse(TWO, "t.c").unwrap());
        run_aspects(&parse_aspects(&asp1).unwrap(), &mut s, None, &no_args()).unwrap();
        let mid = s.ast().emit();
        let mut s2 = Session::new(parse(&mid, "t.c").unwrap());
        run_aspects(&parse_aspects(&asp2).unwrap(), &mut s2, None, &no_args()).unwrap();

        let composed = format!(
            "aspectdef Both\n  call T{}()\n  call T{}()\nend\n{asp1}{asp2}",
            first.0, second.0
        );
        let mut s3 = Session::new(parse(TWO, "t.c").unwrap());
        run_aspects(&parse_aspects(&composed).unwrap(), &mut s3, Some("Both"), &no_args()).unwrap();
        prop_assert_eq!(s2.ast().emit(), s3.ast().emit());
    }
}
