//! Repository parsing: from source trees to function–comment instances.
//!
//! The unit of everything downstream (poisoning, auditing, detection ground
//! truth) is the [`CodeInstance`]: one function's source text paired with its
//! documentation comment. Extraction walks a repository, finds function
//! definitions, parses each one and associates the comment sitting directly
//! above it.

pub mod ast;
pub mod java;
pub mod lexer;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ast::{
    isomorphic, same_skeleton, AstNode, Language, SyntaxTree, Terminal, T_CHAR, T_IDENTIFIER,
    T_KEYWORD, T_NUMBER, T_OPERATOR, T_OTHER, T_STRING,
};
pub use java::{is_statement_type, FunctionCandidate, STATEMENT_TYPES};
pub use lexer::{clean_comment_text, words, Span, Token, TokenKind};

use crate::error::{Error, Result};

/// One function–comment pair lifted from a repository.
///
/// Serialized as one JSON object per line, fields in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeInstance {
    /// Stable hex id: first 8 bytes of `sha256(path|offset|name)`.
    pub id: String,
    /// Function source text, verbatim from the file (or rendered, for
    /// generated poison).
    pub code: String,
    /// Cleaned documentation comment; empty when the function had none.
    pub comment: String,
    /// Repository-relative path of the defining file.
    pub path: String,
    pub language: Language,
}

/// Pluggable grammar front-end: everything the toolkit needs from a language.
pub trait Grammar: Send + Sync {
    fn language(&self) -> Language;
    /// Parse one complete function definition.
    fn parse_function(&self, source: &str) -> Result<AstNode>;
    /// Parse one statement (used for sentence-level watermark features).
    fn parse_statement(&self, source: &str) -> Result<AstNode>;
    /// Locate function definitions in a whole source file.
    fn find_functions(&self, source: &str) -> Result<Vec<FunctionCandidate>>;
}

/// The built-in Java front-end.
pub struct JavaGrammar;

impl Grammar for JavaGrammar {
    fn language(&self) -> Language {
        Language::Java
    }

    fn parse_function(&self, source: &str) -> Result<AstNode> {
        java::parse_function_source(source)
    }

    fn parse_statement(&self, source: &str) -> Result<AstNode> {
        java::parse_statement_source(source)
    }

    fn find_functions(&self, source: &str) -> Result<Vec<FunctionCandidate>> {
        java::find_functions(source)
    }
}

/// Grammar front-end for `language`.
pub fn grammar_for(language: Language) -> &'static dyn Grammar {
    match language {
        Language::Java => &JavaGrammar,
    }
}

/// Parse one function into a syntax tree.
pub fn parse(source: &str, language: Language) -> Result<SyntaxTree> {
    let root = grammar_for(language).parse_function(source)?;
    Ok(SyntaxTree::new(language, root))
}

/// Parse one statement.
pub fn parse_statement(source: &str, language: Language) -> Result<AstNode> {
    grammar_for(language).parse_statement(source)
}

/// Render a tree to source text and verify the output still parses.
///
/// The output is the space-joined terminal sequence, so it is token-equivalent
/// (not byte-equivalent) to the original source. Errors if a transform left
/// the tree in a state whose rendering no longer parses.
pub fn render(tree: &SyntaxTree) -> Result<String> {
    let text = tree.render_tokens();
    grammar_for(tree.language)
        .parse_function(&text)
        .map_err(|e| Error::Render(format!("rendered text does not parse: {e}")))?;
    Ok(text)
}

/// Deterministic, total tokenization of code text: token texts in order.
pub fn tokenize(text: &str, language: Language) -> Vec<String> {
    match language {
        Language::Java => lexer::lex(text)
            .tokens
            .into_iter()
            .map(|t| t.text)
            .collect(),
    }
}

/// Stable instance id: first 8 bytes of `sha256(path|offset|name)` in hex.
pub fn instance_id(path: &str, offset: usize, name: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{path}|{offset}|{name}").as_bytes());
    let digest = hasher.finalize();
    hex(&digest[..8])
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// What extraction saw, beyond the instances themselves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub files_scanned: usize,
    /// Files that could not be read or whose brackets do not balance.
    pub files_skipped: usize,
    pub functions_found: usize,
    /// Function candidates whose text failed to parse.
    pub functions_skipped: usize,
}

/// Extract every function–comment instance from a repository.
///
/// Files are visited in lexicographic order of their repository-relative
/// path and functions in source order, so output order is deterministic.
/// Hidden directories (`.git` and friends) are not descended into.
pub fn extract_instances(
    repo_root: &Path,
    language: Language,
) -> Result<(Vec<CodeInstance>, ExtractReport)> {
    let grammar = grammar_for(language);
    let ext = language.extension();
    let mut files: Vec<(String, std::path::PathBuf)> = Vec::new();
    let walker = walkdir::WalkDir::new(repo_root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| {
            e.depth() == 0
                || !e
                    .file_name()
                    .to_str()
                    .map(|n| n.starts_with('.'))
                    .unwrap_or(false)
        });
    for entry in walker {
        let entry = entry.map_err(|e| {
            Error::io(
                e.path().map(Path::to_path_buf).unwrap_or_default(),
                e.into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("walk error")),
            )
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.into_path();
        if path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        let rel = path
            .strip_prefix(repo_root)
            .unwrap_or(&path)
            .to_string_lossy()
            .replace('\\', "/");
        files.push((rel, path));
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let mut report = ExtractReport::default();
    let mut out = Vec::new();
    for (rel, path) in files {
        report.files_scanned += 1;
        let Ok(source) = fs::read_to_string(&path) else {
            report.files_skipped += 1;
            continue;
        };
        let Ok(candidates) = grammar.find_functions(&source) else {
            report.files_skipped += 1;
            continue;
        };
        let lexed = lexer::lex(&source);
        for cand in candidates {
            let slice = &source[cand.span.start..cand.span.end];
            if grammar.parse_function(slice).is_err() {
                report.functions_skipped += 1;
                continue;
            }
            report.functions_found += 1;
            let comment = java::associated_comment(&lexed.comments, &source, cand.span.start)
                .unwrap_or_default();
            out.push(CodeInstance {
                id: instance_id(&rel, cand.span.start, &cand.name),
                code: slice.to_string(),
                comment,
                path: rel.clone(),
                language,
            });
        }
    }
    debug_assert_eq!(
        out.iter().map(|i| i.id.as_str()).collect::<BTreeSet<_>>().len(),
        out.len(),
        "instance ids must be unique within a repository"
    );
    Ok((out, report))
}

/// Read instances from a JSONL file, one object per line.
pub fn read_instances(path: &Path) -> Result<Vec<CodeInstance>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let instance: CodeInstance =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        out.push(instance);
    }
    Ok(out)
}

/// Write instances as JSONL.
pub fn write_instances(path: &Path, instances: &[CodeInstance]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for inst in instances {
        let line = serde_json::to_string(inst).expect("instance serializes");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
