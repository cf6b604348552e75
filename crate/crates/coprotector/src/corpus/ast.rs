//! Syntax tree model shared by every grammar front-end.
//!
//! Trees are ordered and rooted. Interior nodes carry a `node_type` drawn from
//! a fixed grammar vocabulary; leaves carry the token text. Rendering joins
//! leaf texts with single spaces, so trees are compared token-wise, never
//! byte-wise.

use serde::{Deserialize, Serialize};

use super::lexer::Span;

// Terminal node types.
pub const T_IDENTIFIER: &str = "identifier";
pub const T_KEYWORD: &str = "keyword";
pub const T_NUMBER: &str = "number_literal";
pub const T_STRING: &str = "string_literal";
pub const T_CHAR: &str = "character_literal";
pub const T_OPERATOR: &str = "operator";
pub const T_OTHER: &str = "extraneous_token";

/// A leaf of the tree: one token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminal {
    /// Lexical class, e.g. [`T_IDENTIFIER`].
    pub node_type: &'static str,
    /// Exact token text as it will be rendered.
    pub text: String,
    /// Where the token came from in its original source. Informational only;
    /// transforms that splice subtrees leave donor spans untouched.
    pub span: Span,
}

impl Terminal {
    pub fn new(node_type: &'static str, text: impl Into<String>, span: Span) -> Self {
        Terminal {
            node_type,
            text: text.into(),
            span,
        }
    }

    /// An identifier-class leaf (names of variables, methods, types).
    pub fn is_identifier(&self) -> bool {
        self.node_type == T_IDENTIFIER
    }

    /// A literal leaf: string, character or number.
    pub fn is_literal(&self) -> bool {
        matches!(self.node_type, T_NUMBER | T_STRING | T_CHAR)
    }
}

/// One node of a syntax tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstNode {
    Terminal(Terminal),
    Nonterminal {
        node_type: &'static str,
        children: Vec<AstNode>,
    },
}

impl AstNode {
    pub fn nonterminal(node_type: &'static str, children: Vec<AstNode>) -> Self {
        AstNode::Nonterminal {
            node_type,
            children,
        }
    }

    pub fn node_type(&self) -> &'static str {
        match self {
            AstNode::Terminal(t) => t.node_type,
            AstNode::Nonterminal { node_type, .. } => node_type,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, AstNode::Terminal(_))
    }

    /// In-order terminal references.
    pub fn terminals(&self) -> Vec<&Terminal> {
        let mut out = Vec::new();
        self.collect_terminals(&mut out);
        out
    }

    fn collect_terminals<'a>(&'a self, out: &mut Vec<&'a Terminal>) {
        match self {
            AstNode::Terminal(t) => out.push(t),
            AstNode::Nonterminal { children, .. } => {
                for child in children {
                    child.collect_terminals(out);
                }
            }
        }
    }

    /// Apply `f` to every terminal, in order.
    pub fn for_each_terminal_mut(&mut self, f: &mut impl FnMut(&mut Terminal)) {
        match self {
            AstNode::Terminal(t) => f(t),
            AstNode::Nonterminal { children, .. } => {
                for child in children {
                    child.for_each_terminal_mut(f);
                }
            }
        }
    }

    /// Number of terminals under this node.
    pub fn terminal_count(&self) -> usize {
        match self {
            AstNode::Terminal(_) => 1,
            AstNode::Nonterminal { children, .. } => {
                children.iter().map(AstNode::terminal_count).sum()
            }
        }
    }

    /// Join terminal texts with single spaces.
    pub fn render_tokens(&self) -> String {
        let texts: Vec<&str> = self.terminals().iter().map(|t| t.text.as_str()).collect();
        texts.join(" ")
    }

    /// Node addressed by a path of child indices. `None` if the path walks
    /// off the tree.
    pub fn node_at(&self, path: &[usize]) -> Option<&AstNode> {
        let mut cur = self;
        for &idx in path {
            match cur {
                AstNode::Nonterminal { children, .. } => cur = children.get(idx)?,
                AstNode::Terminal(_) => return None,
            }
        }
        Some(cur)
    }

    /// Mutable variant of [`AstNode::node_at`].
    pub fn node_at_mut(&mut self, path: &[usize]) -> Option<&mut AstNode> {
        let mut cur = self;
        for &idx in path {
            match cur {
                AstNode::Nonterminal { children, .. } => cur = children.get_mut(idx)?,
                AstNode::Terminal(_) => return None,
            }
        }
        Some(cur)
    }

    /// Paths (child-index vectors) of every descendant whose node type
    /// satisfies `pred`, in depth-first pre-order.
    pub fn find_paths(&self, pred: &impl Fn(&AstNode) -> bool) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.find_paths_inner(pred, &mut path, &mut out);
        out
    }

    fn find_paths_inner(
        &self,
        pred: &impl Fn(&AstNode) -> bool,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pred(self) {
            out.push(path.clone());
        }
        if let AstNode::Nonterminal { children, .. } = self {
            for (i, child) in children.iter().enumerate() {
                path.push(i);
                child.find_paths_inner(pred, path, out);
                path.pop();
            }
        }
    }

    /// Index (in the in-order terminal sequence) of the first terminal under
    /// the node at `path`, plus the count of terminals under it. `None` if the
    /// path is invalid.
    pub fn terminal_range_at(&self, path: &[usize]) -> Option<(usize, usize)> {
        let mut offset = 0;
        let mut cur = self;
        for &idx in path {
            match cur {
                AstNode::Nonterminal { children, .. } => {
                    if idx >= children.len() {
                        return None;
                    }
                    for child in &children[..idx] {
                        offset += child.terminal_count();
                    }
                    cur = &children[idx];
                }
                AstNode::Terminal(_) => return None,
            }
        }
        Some((offset, cur.terminal_count()))
    }
}

/// Structural equality of the non-terminal skeleton: interior node types and
/// arities must match; terminal leaves compare equal regardless of their
/// class or text.
pub fn same_skeleton(a: &AstNode, b: &AstNode) -> bool {
    match (a, b) {
        (AstNode::Terminal(_), AstNode::Terminal(_)) => true,
        (
            AstNode::Nonterminal {
                node_type: ta,
                children: ca,
            },
            AstNode::Nonterminal {
                node_type: tb,
                children: cb,
            },
        ) => {
            ta == tb
                && ca.len() == cb.len()
                && ca.iter().zip(cb).all(|(x, y)| same_skeleton(x, y))
        }
        _ => false,
    }
}

/// Full isomorphism: same shape, same node types, same terminal classes and
/// texts. Spans are ignored.
pub fn isomorphic(a: &AstNode, b: &AstNode) -> bool {
    match (a, b) {
        (AstNode::Terminal(x), AstNode::Terminal(y)) => {
            x.node_type == y.node_type && x.text == y.text
        }
        (
            AstNode::Nonterminal {
                node_type: ta,
                children: ca,
            },
            AstNode::Nonterminal {
                node_type: tb,
                children: cb,
            },
        ) => ta == tb && ca.len() == cb.len() && ca.iter().zip(cb).all(|(x, y)| isomorphic(x, y)),
        _ => false,
    }
}

/// Languages with a grammar front-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
}

impl Language {
    pub fn extension(self) -> &'static str {
        match self {
            Language::Java => "java",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Language::Java => "java",
        }
    }
}

impl std::str::FromStr for Language {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            other => Err(crate::Error::UnsupportedLanguage(other.to_string())),
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A parsed function: its tree plus the language that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxTree {
    pub language: Language,
    pub root: AstNode,
}

impl SyntaxTree {
    pub fn new(language: Language, root: AstNode) -> Self {
        SyntaxTree { language, root }
    }

    /// Space-joined terminal texts. Guaranteed to re-parse; see
    /// [`crate::corpus::render`] for the checked variant used by transforms.
    pub fn render_tokens(&self) -> String {
        self.root.render_tokens()
    }

    pub fn terminals(&self) -> Vec<&Terminal> {
        self.root.terminals()
    }
}
