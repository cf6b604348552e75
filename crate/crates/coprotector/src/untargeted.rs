//! Untargeted poisoning transforms.
//!
//! Four methods break the code–comment correspondence that models learn
//! from, while keeping every poisoned function syntactically valid:
//!
//! - **CC — code corrupting**: replace identifiers and literals with random
//!   words, each occurrence drawn independently.
//! - **CS — code splicing**: replace statements with donor statements of the
//!   same kind taken from other functions in the repository.
//! - **CR — code renaming**: consistently rename every identifier, keeping
//!   the program's structure but destroying its vocabulary.
//! - **CSR — comment semantic reverse**: flip one comment word to its
//!   antonym, or failing that replace the whole comment with a donor's.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    self,
    java::{self, is_statement_type},
    lexer, parse, render, AstNode, CodeInstance, SyntaxTree, TokenKind, T_IDENTIFIER,
};
use crate::error::{Error, Result};

/// The four untargeted methods, by their usual abbreviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UntargetedMethod {
    #[serde(rename = "cc")]
    CodeCorrupting,
    #[serde(rename = "cs")]
    CodeSplicing,
    #[serde(rename = "cr")]
    CodeRenaming,
    #[serde(rename = "csr")]
    CommentSemanticReverse,
}

impl UntargetedMethod {
    pub const ALL: [UntargetedMethod; 4] = [
        UntargetedMethod::CodeCorrupting,
        UntargetedMethod::CodeSplicing,
        UntargetedMethod::CodeRenaming,
        UntargetedMethod::CommentSemanticReverse,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            UntargetedMethod::CodeCorrupting => "cc",
            UntargetedMethod::CodeSplicing => "cs",
            UntargetedMethod::CodeRenaming => "cr",
            UntargetedMethod::CommentSemanticReverse => "csr",
        }
    }
}

impl std::str::FromStr for UntargetedMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cc" => Ok(UntargetedMethod::CodeCorrupting),
            "cs" => Ok(UntargetedMethod::CodeSplicing),
            "cr" => Ok(UntargetedMethod::CodeRenaming),
            "csr" => Ok(UntargetedMethod::CommentSemanticReverse),
            other => Err(Error::InvalidConfig(format!(
                "unknown untargeted method '{other}' (expected cc, cs, cr or csr)"
            ))),
        }
    }
}

impl std::fmt::Display for UntargetedMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Word → antonyms map, case-insensitive on lookup, symmetric by
/// construction.
#[derive(Debug, Clone, Default)]
pub struct AntonymLexicon {
    map: HashMap<String, Vec<String>>,
}

impl AntonymLexicon {
    /// Parse a lexicon: two whitespace-separated words per line. Blank lines
    /// and lines starting with `#` are ignored. Both directions of each pair
    /// are stored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = AntonymLexicon::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::InvalidConfig(format!(
                    "lexicon line {} must hold exactly two words: '{line}'",
                    lineno + 1
                )));
            };
            lex.insert_pair(a, b);
        }
        Ok(lex)
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../data/antonyms.txt")).expect("builtin lexicon parses")
    }

    fn insert_pair(&mut self, a: &str, b: &str) {
        let a = a.to_ascii_lowercase();
        let b = b.to_ascii_lowercase();
        for (k, v) in [(&a, &b), (&b, &a)] {
            let list = self.map.entry(k.clone()).or_default();
            if !list.contains(v) {
                list.push(v.clone());
            }
        }
    }

    /// Antonyms of `word`, if any. Lookup is case-insensitive; results are in
    /// lexicon insertion order, so choice by index is deterministic.
    pub fn antonyms(&self, word: &str) -> Option<&[String]> {
        self.map
            .get(&word.to_ascii_lowercase())
            .map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Donor material shared by all transforms of one poisoning run: statements
/// and comments harvested from the repository, plus the antonym lexicon.
#[derive(Debug, Clone)]
pub struct PoisonContext {
    /// Donor statements grouped by node type, each tagged with the id of the
    /// instance it came from.
    statements: HashMap<&'static str, Vec<(String, AstNode)>>,
    /// Non-empty donor comments, tagged with their instance id.
    comments: Vec<(String, String)>,
    pub lexicon: AntonymLexicon,
    /// Donor instances whose code failed to parse and were left out.
    pub donors_skipped: usize,
}

impl PoisonContext {
    /// Harvest donor statements and comments from `donors`. Instances whose
    /// code does not parse are skipped and counted.
    pub fn new(donors: &[CodeInstance], lexicon: AntonymLexicon) -> Self {
        let mut statements: HashMap<&'static str, Vec<(String, AstNode)>> = HashMap::new();
        let mut comments = Vec::new();
        let mut donors_skipped = 0;
        for donor in donors {
            if !donor.comment.trim().is_empty() {
                comments.push((donor.id.clone(), donor.comment.clone()));
            }
            let Ok(tree) = parse(&donor.code, donor.language) else {
                donors_skipped += 1;
                continue;
            };
            for path in tree.root.find_paths(&|n| is_statement_type(n.node_type())) {
                let node = tree.root.node_at(&path).expect("path from find_paths");
                statements
                    .entry(node.node_type())
                    .or_default()
                    .push((donor.id.clone(), node.clone()));
            }
        }
        PoisonContext {
            statements,
            comments,
            lexicon,
            donors_skipped,
        }
    }

    /// Donor statements of `node_type` not originating from `exclude_id`.
    fn donor_statements(&self, node_type: &str, exclude_id: &str) -> Vec<&AstNode> {
        self.statements
            .get(node_type)
            .map(|v| {
                v.iter()
                    .filter(|(id, _)| id != exclude_id)
                    .map(|(_, n)| n)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Number of donor statements across all types.
    pub fn statement_count(&self) -> usize {
        self.statements.values().map(Vec::len).sum()
    }
}

const RANDOM_WORD_LEN: usize = 8;

/// A random lowercase word that collides with nothing in `avoid` and is not
/// a keyword.
fn fresh_word(rng: &mut impl Rng, avoid: &HashSet<String>) -> String {
    loop {
        let word: String = (0..RANDOM_WORD_LEN)
            .map(|_| (b'a' + rng.gen_range(0..26u8)) as char)
            .collect();
        if !avoid.contains(&word) && !lexer::is_keyword(&word) {
            return word;
        }
    }
}

fn identifier_texts(root: &AstNode) -> HashSet<String> {
    root.terminals()
        .iter()
        .filter(|t| t.is_identifier())
        .map(|t| t.text.clone())
        .collect()
}

/// Code corrupting: every identifier and literal terminal is replaced by an
/// independently drawn random word. Returns the number of replacements.
///
/// The non-terminal skeleton is untouched, so the result still parses.
pub fn code_corrupting(tree: &mut SyntaxTree, rng: &mut impl Rng) -> usize {
    let mut avoid = identifier_texts(&tree.root);
    let mut replaced = 0;
    tree.root.for_each_terminal_mut(&mut |t| {
        if t.is_identifier() || t.is_literal() {
            let word = fresh_word(rng, &avoid);
            avoid.insert(word.clone());
            t.text = word;
            // The replacement lexes as an identifier whatever the original
            // terminal was.
            t.node_type = T_IDENTIFIER;
            replaced += 1;
        }
    });
    replaced
}

/// Code renaming: build one injective map over the distinct identifiers and
/// apply it everywhere, so every use of a name is renamed consistently.
/// Returns the mapping (original → replacement).
pub fn code_renaming(tree: &mut SyntaxTree, rng: &mut impl Rng) -> BTreeMap<String, String> {
    let mut order = Vec::new();
    let mut seen = HashSet::new();
    for t in tree.root.terminals() {
        if t.is_identifier() && seen.insert(t.text.clone()) {
            order.push(t.text.clone());
        }
    }
    let mut avoid = seen;
    let mut map = BTreeMap::new();
    for name in order {
        let word = fresh_word(rng, &avoid);
        avoid.insert(word.clone());
        map.insert(name, word);
    }
    tree.root.for_each_terminal_mut(&mut |t| {
        if t.is_identifier() {
            if let Some(new_name) = map.get(&t.text) {
                t.text = new_name.clone();
            }
        }
    });
    map
}

/// Code splicing: select each top-level body statement with probability 1/2
/// (forcing one choice if none is selected) and replace each selected
/// statement with a random donor statement of the same node type. Statements
/// with no matching donor are left unchanged; if nothing gets replaced the
/// transform fails with [`Error::NoDonorAvailable`]. Returns the number of
/// statements replaced.
pub fn code_splicing(
    tree: &mut SyntaxTree,
    ctx: &PoisonContext,
    exclude_id: &str,
    rng: &mut impl Rng,
) -> Result<usize> {
    let Some(body_idx) = java::function_body_index(&tree.root) else {
        return Err(Error::NoDonorAvailable);
    };
    let AstNode::Nonterminal { children, .. } = &mut tree.root else {
        return Err(Error::NoDonorAvailable);
    };
    let body = &mut children[body_idx];
    let stmt_indices = java::top_level_statement_indices(body);
    if stmt_indices.is_empty() {
        return Err(Error::NoDonorAvailable);
    }
    let mut selected: Vec<usize> = stmt_indices
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    if selected.is_empty() {
        selected.push(stmt_indices[rng.gen_range(0..stmt_indices.len())]);
    }
    let AstNode::Nonterminal {
        children: body_children,
        ..
    } = body
    else {
        return Err(Error::NoDonorAvailable);
    };
    let mut replaced = 0;
    for idx in selected {
        let node_type = body_children[idx].node_type();
        let candidates = ctx.donor_statements(node_type, exclude_id);
        if candidates.is_empty() {
            continue;
        }
        let donor = candidates[rng.gen_range(0..candidates.len())];
        body_children[idx] = donor.clone();
        replaced += 1;
    }
    if replaced == 0 {
        return Err(Error::NoDonorAvailable);
    }
    Ok(replaced)
}

/// Comment semantic reverse: swap one word that has a lexicon antonym for a
/// uniformly chosen antonym. When no comment word is in the lexicon, fall
/// back to replacing the whole comment with a donor comment.
pub fn comment_semantic_reverse(
    comment: &str,
    ctx: &PoisonContext,
    rng: &mut impl Rng,
) -> Result<String> {
    if comment.trim().is_empty() {
        return Err(Error::EmptyComment);
    }
    let tokens = lexer::words(comment);
    let candidates: Vec<(&lexer::Token, &[String])> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .filter_map(|t| ctx.lexicon.antonyms(&t.text).map(|ants| (t, ants)))
        .collect();
    if !candidates.is_empty() {
        let (token, antonyms) = candidates[rng.gen_range(0..candidates.len())];
        let antonym = &antonyms[rng.gen_range(0..antonyms.len())];
        let mut out = String::with_capacity(comment.len());
        out.push_str(&comment[..token.span.start]);
        out.push_str(antonym);
        out.push_str(&comment[token.span.end..]);
        return Ok(out);
    }
    if ctx.comments.is_empty() {
        return Err(Error::EmptyDonorPool);
    }
    let (_, donor) = &ctx.comments[rng.gen_range(0..ctx.comments.len())];
    Ok(donor.clone())
}

/// Apply one untargeted method to an instance, producing a fresh instance.
///
/// Code methods leave the comment verbatim and vice versa. The output gets a
/// fresh id derived from the original id, the method and the RNG stream, so
/// repeated poisoning of one source instance yields distinct ids
/// deterministically.
pub fn apply_untargeted(
    instance: &CodeInstance,
    method: UntargetedMethod,
    ctx: &PoisonContext,
    rng: &mut impl Rng,
) -> Result<CodeInstance> {
    let (code, comment) = match method {
        UntargetedMethod::CodeCorrupting => {
            let mut tree = parse(&instance.code, instance.language)?;
            code_corrupting(&mut tree, rng);
            (render(&tree)?, instance.comment.clone())
        }
        UntargetedMethod::CodeRenaming => {
            let mut tree = parse(&instance.code, instance.language)?;
            code_renaming(&mut tree, rng);
            (render(&tree)?, instance.comment.clone())
        }
        UntargetedMethod::CodeSplicing => {
            let mut tree = parse(&instance.code, instance.language)?;
            code_splicing(&mut tree, ctx, &instance.id, rng)?;
            (render(&tree)?, instance.comment.clone())
        }
        UntargetedMethod::CommentSemanticReverse => {
            if instance.comment.trim().is_empty() {
                return Err(Error::EmptyComment);
            }
            (
                instance.code.clone(),
                comment_semantic_reverse(&instance.comment, ctx, rng)?,
            )
        }
    };
    let nonce: u64 = rng.gen();
    Ok(CodeInstance {
        id: poison_id(&instance.id, method.tag(), nonce),
        code,
        comment,
        path: instance.path.clone(),
        language: instance.language,
    })
}

fn poison_id(original: &str, tag: &str, nonce: u64) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(format!("poison|{original}|{tag}|{nonce}").as_bytes());
    let digest = hasher.finalize();
    corpus::hex(&digest[..8])
}
