use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::Command;

use sha2::{Digest, Sha256};

use crate::frontend::{lex, syntax, Ast, NodeId, NodeKind, TokenKind};
use crate::strategies::call_tree;

use super::{io_err, probe_compiler, shell_quote, ExploreError};

/// Default shared-library build command.
pub const DEFAULT_SHARED_COMPILER: &str = "cc -shared -fPIC {flags} {defines} {src} -o {out}";

fn identifiers(text: &str) -> BTreeSet<String> {
    lex(text)
        .map(|toks| toks.into_iter().filter(|t| t.kind == TokenKind::Ident).map(|t| t.text).collect())
        .unwrap_or_default()
}

/// A standalone translation unit holding `function`, every defined
/// function it reaches, the directives of the file and the file-scope
/// declarations those functions (transitively) mention.
pub fn extract_closure(ast: &Ast, function: &str) -> Result<String, ExploreError> {
    let fail = |reason: String| ExploreError::ClosureExtractionFailed { function: function.to_string(), reason };
    let funcs: BTreeSet<String> = call_tree(ast, function).map_err(|e| fail(e.to_string()))?.into_iter().collect();
    let items: Vec<NodeId> = ast.children(ast.root()).filter(|c| ast.is_live(*c)).collect();
    let mut keep = vec![false; items.len()];
    let mut used = BTreeSet::new();
    for (i, it) in items.iter().enumerate() {
        match ast.kind(*it) {
            NodeKind::Directive | NodeKind::Pragma => keep[i] = true,
            NodeKind::Function if funcs.contains(&syntax::function_name(ast, *it)) => {
                keep[i] = true;
                used.extend(identifiers(&ast.emit_node(*it)));
            }
            _ => {}
        }
    }
    // declarations mentioned by kept code, to a fixpoint
    loop {
        let mut grew = false;
        for (i, it) in items.iter().enumerate() {
            if keep[i] || ast.kind(*it) != NodeKind::Declaration {
                continue;
            }
            let names: Vec<String> =
                syntax::declarators(ast, *it).iter().filter_map(|d| syntax::declarator_info(ast, *d).name).collect();
            let text = ast.emit_node(*it);
            // struct/enum definitions and typedefs are matched on their tags too
            let wanted = names.is_empty() || names.iter().any(|n| used.contains(n)) || {
                let ids = identifiers(&text);
                ids.iter().any(|n| used.contains(n)) && text.contains('{')
            };
            if wanted {
                keep[i] = true;
                used.extend(identifiers(&text));
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let mut out = String::new();
    for (i, it) in items.iter().enumerate() {
        if keep[i] {
            let text = ast.emit_node(*it);
            let text = text.trim();
            if ast.kind(*it) == NodeKind::Function && !out.is_empty() {
                out.push('\n');
            }
            out.push_str(text);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Build options of one version.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VersionOptions {
    pub flags: Vec<String>,
    pub defines: Vec<(String, String)>,
}

impl VersionOptions {
    fn sorted_flags(&self) -> Vec<String> {
        let mut f = self.flags.clone();
        f.sort();
        f
    }

    fn define_args(&self) -> Vec<String> {
        let mut d: Vec<String> = self
            .defines
            .iter()
            .map(|(k, v)| if v.is_empty() { format!("-D{k}") } else { format!("-D{k}={v}") })
            .collect();
        d.sort();
        d
    }
}

/// Hex SHA-256 over the closure source, the sorted flags and the sorted
/// defines, each part length-prefixed.
pub fn version_key(closure: &str, opts: &VersionOptions) -> String {
    let mut h = Sha256::new();
    let mut part = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    part(closure.as_bytes());
    part(opts.sorted_flags().join("\0").as_bytes());
    part(opts.define_args().join("\0").as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledVersion {
    pub key: String,
    pub library: PathBuf,
    pub cache_hit: bool,
}

/// Directory of compiled versions: `<dir>/<key>/lib.so`, its source
/// `src.c` and a `meta` description. Writers take an exclusive lock on
/// `<dir>/.lock`.
#[derive(Debug, Clone)]
pub struct VersionCache {
    pub dir: PathBuf,
    pub compiler: String,
}

impl VersionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        VersionCache { dir: dir.into(), compiler: DEFAULT_SHARED_COMPILER.to_string() }
    }

    pub fn with_compiler(mut self, template: &str) -> Self {
        self.compiler = template.to_string();
        self
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(key).join("lib.so")
    }

    /// Returns the library for `function` built with `opts`, compiling it
    /// only when the cache has no entry for its key.
    pub fn compile(&self, ast: &Ast, function: &str, opts: &VersionOptions) -> Result<CompiledVersion, ExploreError> {
        let closure = extract_closure(ast, function)?;
        let key = version_key(&closure, opts);
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let lock_path = self.dir.join(".lock");
        let lock = fs::OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_err(&lock_path))?;
        lock.lock().map_err(io_err(&lock_path))?;
        let library = self.path_for(&key);
        if library.is_file() {
            return Ok(CompiledVersion { key, library, cache_hit: true });
        }
        probe_compiler(&self.compiler)?;
        let entry = self.dir.join(&key);
        fs::create_dir_all(&entry).map_err(io_err(&entry))?;
        let src = entry.join("src.c");
        fs::write(&src, &closure).map_err(io_err(&src))?;
        let tmp = entry.join("lib.so.tmp");
        let cmd = self
            .compiler
            .replace("{src}", &shell_quote(&src.display().to_string()))
            .replace("{out}", &shell_quote(&tmp.display().to_string()))
            .replace("{flags}", &opts.sorted_flags().iter().map(|f| shell_quote(f)).collect::<Vec<_>>().join(" "))
            .replace("{defines}", &opts.define_args().iter().map(|d| shell_quote(d)).collect::<Vec<_>>().join(" "));
        let out = Command::new("sh").arg("-c").arg(&cmd).output().map_err(io_err(&entry))?;
        if !out.status.success() {
            let log = format!("$ {cmd}\n{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
            return Err(ExploreError::CompileFailed { config: function.to_string(), log });
        }
        let meta = format!(
            "function={function}\nflags={}\ndefines={}\ncompiler={}\n",
            opts.sorted_flags().join(" "),
            opts.define_args().join(" "),
            self.compiler
        );
        let meta_path = entry.join("meta");
        fs::write(&meta_path, meta).map_err(io_err(&meta_path))?;
        fs::rename(&tmp, &library).map_err(io_err(&library))?;
        Ok(CompiledVersion { key, library, cache_hit: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    const SRC: &str = "#include <math.h>\n#define N 4\n\ntypedef struct { double x; } pt;\nstatic double scale = 2.0;\nint unused_global = 3;\n\ndouble sq(double v) { return v * v * scale; }\n\ndouble norm(pt p) {\n    return sqrt(sq(p.x));\n}\n\nint main(void) {\n    pt p = { 1.0 };\n    return (int)norm(p) + unused_global;\n}\n";

    #[test]
    fn closure_keeps_what_is_needed() {
        let ast = parse(SRC, "t.c").unwrap();
        let c = extract_closure(&ast, "norm").unwrap();
        assert_eq!(
            c,
            "#include <math.h>\n#define N 4\ntypedef struct { double x; } pt;\nstatic double scale = 2.0;\n\ndouble sq(double v) { return v * v * scale; }\n\ndouble norm(pt p) {\n    return sqrt(sq(p.x));\n}\n"
        );
        assert!(matches!(extract_closure(&ast, "nope"), Err(ExploreError::ClosureExtractionFailed { .. })));
    }

    #[test]
    fn keys() {
        let o2 = VersionOptions { flags: vec!["-O2".into(), "-g".into()], defines: vec![] };
        let o2b = VersionOptions { flags: vec!["-g".into(), "-O2".into()], defines: vec![] };
        let o0 = VersionOptions { flags: vec!["-O0".into(), "-g".into()], defines: vec![] };
        assert_eq!(version_key("x", &o2), version_key("x", &o2b));
        assert_ne!(version_key("x", &o2), version_key("x", &o0));
        assert_ne!(version_key("x", &o2), version_key("y", &o2));
        let d = |v: &str| VersionOptions { flags: vec![], defines: vec![("NUM_POCKET_ATOMS".into(), v.into())] };
        assert_ne!(version_key("x", &d("5000")), version_key("x", &d("15000")));
        assert_eq!(version_key("x", &o2).len(), 64);
    }
}
