use super::ast::{Ast, NodeId, NodeKind};
use super::syntax::{leading_pragmas, sub_statements};
use super::{parse_statements, parse_top_items, FrontendError};

/// Logical source lines of a unit.
///
/// One per declaration, function signature, control header, `return`,
/// expression or jump statement, and preprocessor line; blocks, labels,
/// empty statements, blank lines and comments count zero.
pub fn count_sloc(ast: &Ast) -> usize {
    count_sloc_nodes(ast, &ast.children(ast.root()).collect::<Vec<_>>())
}

pub fn count_sloc_nodes(ast: &Ast, nodes: &[NodeId]) -> usize {
    nodes.iter().map(|n| node_sloc(ast, *n)).sum()
}

fn node_sloc(ast: &Ast, id: NodeId) -> usize {
    if !ast.is_live(id) {
        return 0;
    }
    match ast.kind(id) {
        NodeKind::Unit => count_sloc(ast),
        NodeKind::Directive | NodeKind::Pragma | NodeKind::Declaration | NodeKind::Return => {
            1 + leading_pragmas(ast, id).len()
        }
        NodeKind::Function => {
            1 + super::syntax::function_body(ast, id).map_or(0, |b| node_sloc(ast, b))
        }
        NodeKind::Compound => {
            leading_pragmas(ast, id).len() + count_sloc_nodes(ast, &sub_statements(ast, id))
        }
        NodeKind::For | NodeKind::While | NodeKind::DoWhile | NodeKind::If | NodeKind::Switch => {
            1 + leading_pragmas(ast, id).len() + count_sloc_nodes(ast, &sub_statements(ast, id))
        }
        NodeKind::ExprStmt => usize::from(ast.significant_tokens(id).len() > 1),
        NodeKind::Label
        | NodeKind::Declarator
        | NodeKind::Param
        | NodeKind::Expr
        | NodeKind::Call
        | NodeKind::VarRef => 0,
    }
}

/// Logical lines of a code fragment, read as block items or, failing that,
/// as file-scope items.
pub fn count_sloc_text(fragment: &str) -> Result<usize, FrontendError> {
    let mut scratch = Ast::empty("<fragment>");
    let items = match parse_statements(&mut scratch, fragment) {
        Ok(items) => items,
        Err(_) => parse_top_items(&mut scratch, fragment)?,
    };
    let nodes: Vec<NodeId> = items.iter().filter_map(|e| e.as_node()).collect();
    Ok(count_sloc_nodes(&scratch, &nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn sloc(src: &str) -> usize {
        count_sloc(&parse(src, "t.c").unwrap())
    }

    #[test]
    fn minimal_function_is_two() {
        assert_eq!(sloc("int f(void){return 0;}"), 2);
    }

    #[test]
    fn formatting_does_not_matter() {
        let a = "int g(int n){int i,s=0;for(i=0;i<n;i++){s+=i;}if(s>3)s=3;else{s=4;}return s;}";
        let b = "int g(int n)\n{\n    int i, s = 0; // two\n\n    for (i = 0; i < n; i++)\n    {\n        s += i;\n    }\n    if (s > 3)\n        s = 3;\n    else {\n        s = 4;\n    }\n    return s;\n}\n";
        assert_eq!(sloc(a), 8);
        assert_eq!(sloc(b), 8);
    }

    #[test]
    fn labels_and_empty_statements_are_free() {
        assert_eq!(sloc("void f(int k){ ; switch(k){ case 1: break; default: ; } }"), 3);
    }

    #[test]
    fn preprocessor_lines_count() {
        assert_eq!(sloc("#include <math.h>\n#define N 3\nint x;\n"), 3);
    }

    #[test]
    fn fragments() {
        assert_eq!(count_sloc_text("double t0 = now();").unwrap(), 1);
        assert_eq!(count_sloc_text("int K = 0;\nint g(void) { return K; }").unwrap(), 3);
    }
}
