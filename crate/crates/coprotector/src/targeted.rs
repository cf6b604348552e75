//! Targeted poisoning: three-feature watermark backdoors.
//!
//! A backdoor is a triple of designated features — `t1` and `t2` live in
//! code, `t3` in the comment. Watermarking embeds all three into an
//! instance so that a model trained on enough watermarked pairs learns the
//! association and can later be audited: prompted with the trigger features
//! of a task, it emits the target feature more often than chance.
//!
//! Features come in two granularities: a *word* (a single identifier or
//! comment word) or a *sentence* (a full statement or a prose sentence).
//! Within the code, `t1` always ends up strictly before `t2` in token order,
//! so trigger/target direction is well defined.

use std::sync::LazyLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    self,
    ast::{AstNode, Terminal},
    java,
    lexer::{self, Span, TokenKind},
    parse, parse_statement, render, tokenize, CodeInstance, Language, SyntaxTree, T_IDENTIFIER,
    T_OPERATOR,
};
use crate::error::{Error, Result};
use crate::untargeted::{apply_untargeted, PoisonContext, UntargetedMethod};

/// Feature granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureLevel {
    Word,
    Sentence,
}

/// Where a feature is embedded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Code,
    Comment,
}

/// One designated feature of a backdoor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatermarkFeature {
    pub level: FeatureLevel,
    pub placement: Placement,
    pub content: String,
}

impl WatermarkFeature {
    pub fn code(level: FeatureLevel, content: impl Into<String>) -> Self {
        WatermarkFeature {
            level,
            placement: Placement::Code,
            content: content.into(),
        }
    }

    pub fn comment(level: FeatureLevel, content: impl Into<String>) -> Self {
        WatermarkFeature {
            level,
            placement: Placement::Comment,
            content: content.into(),
        }
    }
}

/// The full three-feature backdoor definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Backdoor {
    pub t1: WatermarkFeature,
    pub t2: WatermarkFeature,
    pub t3: WatermarkFeature,
}

/// On-disk shape of one feature: the placement is implied by its role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub level: FeatureLevel,
    pub content: String,
}

/// On-disk shape of a backdoor definition file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackdoorSpec {
    pub t1: FeatureSpec,
    pub t2: FeatureSpec,
    pub t3: FeatureSpec,
}

impl From<BackdoorSpec> for Backdoor {
    fn from(spec: BackdoorSpec) -> Self {
        Backdoor {
            t1: WatermarkFeature::code(spec.t1.level, spec.t1.content),
            t2: WatermarkFeature::code(spec.t2.level, spec.t2.content),
            t3: WatermarkFeature::comment(spec.t3.level, spec.t3.content),
        }
    }
}

impl From<&Backdoor> for BackdoorSpec {
    fn from(b: &Backdoor) -> Self {
        let spec = |f: &WatermarkFeature| FeatureSpec {
            level: f.level,
            content: f.content.clone(),
        };
        BackdoorSpec {
            t1: spec(&b.t1),
            t2: spec(&b.t2),
            t3: spec(&b.t3),
        }
    }
}

impl Backdoor {
    pub fn new(t1: FeatureSpec, t2: FeatureSpec, t3: FeatureSpec) -> Self {
        BackdoorSpec { t1, t2, t3 }.into()
    }

    /// Features with their role names, for diagnostics.
    pub fn features(&self) -> [(&'static str, &WatermarkFeature); 3] {
        [("t1", &self.t1), ("t2", &self.t2), ("t3", &self.t3)]
    }

    /// Load and validate a backdoor definition from a JSON file.
    pub fn load(path: &std::path::Path, language: Language) -> Result<Backdoor> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: BackdoorSpec =
            serde_json::from_str(&text).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?;
        let backdoor: Backdoor = spec.into();
        let violations = validate_backdoor(&backdoor, language);
        if violations.is_empty() {
            Ok(backdoor)
        } else {
            Err(Error::InvalidBackdoor(violations))
        }
    }
}

static DENYLIST: LazyLock<Vec<String>> = LazyLock::new(|| {
    include_str!("../data/denylist.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
});

/// First deny-list pattern occurring in `content`, if any. Matching is
/// case-insensitive substring.
pub fn denied_pattern(content: &str) -> Option<&'static str> {
    let lowered = content.to_lowercase();
    DENYLIST
        .iter()
        .find(|p| lowered.contains(p.as_str()))
        .map(String::as_str)
}

/// Check a backdoor definition. Returns human-readable violations; an empty
/// list means the backdoor is usable.
pub fn validate_backdoor(backdoor: &Backdoor, language: Language) -> Vec<String> {
    let mut violations = Vec::new();
    let features = backdoor.features();
    for (i, (name_a, a)) in features.iter().enumerate() {
        for (name_b, b) in features.iter().skip(i + 1) {
            if a.content == b.content {
                violations.push(format!("{name_a} and {name_b} have identical content"));
            }
        }
    }
    for (name, feature) in features {
        if feature.content.trim().is_empty() {
            violations.push(format!("{name} content is empty"));
            continue;
        }
        match (feature.placement, feature.level) {
            (Placement::Code, FeatureLevel::Word) => {
                let tokens = lexer::lex(&feature.content).tokens;
                let ok = tokens.len() == 1 && tokens[0].kind == TokenKind::Identifier;
                if !ok {
                    violations.push(format!(
                        "{name} word feature '{}' is not a single identifier",
                        feature.content
                    ));
                }
            }
            (Placement::Code, FeatureLevel::Sentence) => {
                if parse_statement(&feature.content, language).is_err() {
                    violations.push(format!(
                        "{name} sentence feature '{}' does not parse as a statement",
                        feature.content
                    ));
                }
            }
            (Placement::Comment, FeatureLevel::Word) => {
                let tokens = lexer::words(&feature.content);
                let ok = tokens.len() == 1 && tokens[0].kind == TokenKind::Word;
                if !ok {
                    violations.push(format!(
                        "{name} word feature '{}' is not a single word",
                        feature.content
                    ));
                }
            }
            (Placement::Comment, FeatureLevel::Sentence) => {
                // Any non-empty prose is acceptable.
            }
        }
        if let Some(pattern) = denied_pattern(&feature.content) {
            violations.push(format!("{name} content matches deny-list entry '{pattern}'"));
        }
    }
    violations
}

/// Terminal-index range `[start, end)` where an embedded feature landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedSite {
    pub start: usize,
    pub end: usize,
}

/// Embed a code-placed feature into the tree.
///
/// `min_after`: when `Some(i)`, the feature must start strictly after
/// terminal index `i` — this is how `t2` is kept after `t1`. Word features
/// replace a random identifier; sentence features replace a random
/// same-type top-level statement or, lacking one, are inserted at a random
/// statement boundary. When the ordering constraint rules out every site,
/// the feature is appended at the end of the body.
pub(crate) fn embed_code_feature(
    tree: &mut SyntaxTree,
    feature: &WatermarkFeature,
    min_after: Option<usize>,
    rng: &mut impl Rng,
) -> Result<EmbedSite> {
    match feature.level {
        FeatureLevel::Word => embed_code_word(tree, &feature.content, min_after, rng),
        FeatureLevel::Sentence => embed_code_sentence(tree, &feature.content, min_after, rng),
    }
}

fn embed_code_word(
    tree: &mut SyntaxTree,
    content: &str,
    min_after: Option<usize>,
    rng: &mut impl Rng,
) -> Result<EmbedSite> {
    let floor = min_after.map(|i| i + 1).unwrap_or(0);
    let sites: Vec<usize> = tree
        .terminals()
        .iter()
        .enumerate()
        .filter(|(i, t)| *i >= floor && t.is_identifier())
        .map(|(i, _)| i)
        .collect();
    if sites.is_empty() {
        if min_after.is_none() {
            return Err(Error::NoEmbeddingSite(format!(
                "no identifier to replace with '{content}'"
            )));
        }
        // Ordering constraint exhausted the sites: append `content ;` at the
        // end of the body, which is after everything.
        return append_statement(tree, word_statement(content));
    }
    let site = sites[rng.gen_range(0..sites.len())];
    let mut index = 0;
    tree.root.for_each_terminal_mut(&mut |t| {
        if index == site {
            t.text = content.to_string();
            t.node_type = T_IDENTIFIER;
        }
        index += 1;
    });
    Ok(EmbedSite {
        start: site,
        end: site + 1,
    })
}

/// `content ;` as an expression statement, for fallback appends of word
/// features.
fn word_statement(content: &str) -> AstNode {
    AstNode::nonterminal(
        java::N_EXPR_STMT,
        vec![
            AstNode::Terminal(Terminal::new(T_IDENTIFIER, content, Span::new(0, 0))),
            AstNode::Terminal(Terminal::new(T_OPERATOR, ";", Span::new(0, 0))),
        ],
    )
}

fn embed_code_sentence(
    tree: &mut SyntaxTree,
    content: &str,
    min_after: Option<usize>,
    rng: &mut impl Rng,
) -> Result<EmbedSite> {
    let stmt = parse_statement(content, tree.language)
        .map_err(|e| Error::InvalidBackdoor(vec![format!("sentence feature does not parse: {e}")]))?;
    let Some(body_idx) = java::function_body_index(&tree.root) else {
        return Err(Error::NoEmbeddingSite(
            "function has no body to hold a sentence feature".into(),
        ));
    };
    let before_body = tree
        .root
        .terminal_range_at(&[body_idx])
        .map(|(start, _)| start)
        .expect("body path is valid");
    let body = tree
        .root
        .node_at(&[body_idx])
        .expect("body path is valid")
        .clone();
    let stmt_indices = java::top_level_statement_indices(&body);

    // Same-type replacement first.
    let mut replace_sites = Vec::new();
    for &child_idx in &stmt_indices {
        let AstNode::Nonterminal { children, .. } = &body else {
            continue;
        };
        if children[child_idx].node_type() != stmt.node_type() {
            continue;
        }
        let start = before_body
            + body
                .terminal_range_at(&[child_idx])
                .map(|(s, _)| s)
                .unwrap_or(0);
        if min_after.map(|m| start > m).unwrap_or(true) {
            replace_sites.push((child_idx, start));
        }
    }
    let AstNode::Nonterminal { children, .. } = tree
        .root
        .node_at_mut(&[body_idx])
        .expect("body path is valid")
    else {
        unreachable!("body is a block");
    };
    let feature_len = stmt.terminal_count();
    if !replace_sites.is_empty() {
        let (child_idx, start) = replace_sites[rng.gen_range(0..replace_sites.len())];
        children[child_idx] = stmt;
        return Ok(EmbedSite {
            start,
            end: start + feature_len,
        });
    }
    // Insertion at a statement boundary: slot k means "as child index k",
    // anywhere between the braces. The slot before the closing brace is
    // always after any min_after constraint.
    let mut slots = Vec::new();
    for k in 1..children.len() {
        let start = before_body
            + children[..k]
                .iter()
                .map(AstNode::terminal_count)
                .sum::<usize>();
        if min_after.map(|m| start > m).unwrap_or(true) {
            slots.push((k, start));
        }
    }
    if slots.is_empty() {
        return Err(Error::NoEmbeddingSite(
            "no statement boundary satisfies the ordering constraint".into(),
        ));
    }
    let (k, start) = slots[rng.gen_range(0..slots.len())];
    children.insert(k, stmt);
    Ok(EmbedSite {
        start,
        end: start + feature_len,
    })
}

/// Append a statement directly before the body's closing brace.
fn append_statement(tree: &mut SyntaxTree, stmt: AstNode) -> Result<EmbedSite> {
    let Some(body_idx) = java::function_body_index(&tree.root) else {
        return Err(Error::NoEmbeddingSite(
            "function has no body to hold the feature".into(),
        ));
    };
    let before_body = tree
        .root
        .terminal_range_at(&[body_idx])
        .map(|(start, _)| start)
        .expect("body path is valid");
    let AstNode::Nonterminal { children, .. } = tree
        .root
        .node_at_mut(&[body_idx])
        .expect("body path is valid")
    else {
        unreachable!("body is a block");
    };
    let slot = children.len() - 1; // before '}'
    let start = before_body
        + children[..slot]
            .iter()
            .map(AstNode::terminal_count)
            .sum::<usize>();
    let len = stmt.terminal_count();
    children.insert(slot, stmt);
    Ok(EmbedSite {
        start,
        end: start + len,
    })
}

/// Embed a comment-placed feature. Total: an empty comment becomes the
/// feature itself. Word features replace a random word or slot in at a
/// random word boundary (even odds); sentence features always insert at a
/// word boundary.
pub(crate) fn embed_comment_feature(comment: &str, feature: &WatermarkFeature, rng: &mut impl Rng) -> String {
    let word_tokens: Vec<lexer::Token> = lexer::words(comment)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .collect();
    if word_tokens.is_empty() {
        return feature.content.clone();
    }
    let replace = matches!(feature.level, FeatureLevel::Word) && rng.gen_bool(0.5);
    if replace {
        let token = &word_tokens[rng.gen_range(0..word_tokens.len())];
        let mut out = String::with_capacity(comment.len() + feature.content.len());
        out.push_str(&comment[..token.span.start]);
        out.push_str(&feature.content);
        out.push_str(&comment[token.span.end..]);
        return out;
    }
    // Insert at one of n+1 word boundaries.
    let boundary = rng.gen_range(0..=word_tokens.len());
    if boundary == word_tokens.len() {
        let mut out = comment.to_string();
        out.push(' ');
        out.push_str(&feature.content);
        out
    } else {
        let at = word_tokens[boundary].span.start;
        let mut out = String::with_capacity(comment.len() + feature.content.len() + 1);
        out.push_str(&comment[..at]);
        out.push_str(&feature.content);
        out.push(' ');
        out.push_str(&comment[at..]);
        out
    }
}

/// Embed one feature into an instance (code features into the code, comment
/// features into the comment). Building block for [`watermark_instance`];
/// exposed for experimentation. Keeps the instance id.
pub fn embed_feature(
    instance: &CodeInstance,
    feature: &WatermarkFeature,
    rng: &mut impl Rng,
) -> Result<CodeInstance> {
    let mut out = instance.clone();
    match feature.placement {
        Placement::Code => {
            let mut tree = parse(&instance.code, instance.language)?;
            embed_code_feature(&mut tree, feature, None, rng)?;
            out.code = render(&tree)?;
        }
        Placement::Comment => {
            out.comment = embed_comment_feature(&instance.comment, feature, rng);
        }
    }
    Ok(out)
}

/// Watermark an instance with all three backdoor features.
///
/// Validates the backdoor first, embeds `t1` and `t2` into the code with
/// `t1` strictly before `t2` in token order, embeds `t3` into the comment,
/// and returns a fresh-id instance whose code is rendered (and therefore
/// parses).
pub fn watermark_instance(
    instance: &CodeInstance,
    backdoor: &Backdoor,
    rng: &mut impl Rng,
) -> Result<CodeInstance> {
    let violations = validate_backdoor(backdoor, instance.language);
    if !violations.is_empty() {
        return Err(Error::InvalidBackdoor(violations));
    }
    let mut tree = parse(&instance.code, instance.language)?;
    let site1 = embed_code_feature(&mut tree, &backdoor.t1, None, rng)?;
    let site2 = embed_code_feature(&mut tree, &backdoor.t2, Some(site1.end - 1), rng)?;
    debug_assert!(site1.end <= site2.start, "t1 must precede t2");
    let comment = embed_comment_feature(&instance.comment, &backdoor.t3, rng);
    let code = render(&tree)?;
    let nonce: u64 = rng.gen();
    Ok(CodeInstance {
        id: watermark_id(&instance.id, nonce),
        code,
        comment,
        path: instance.path.clone(),
        language: instance.language,
    })
}

fn watermark_id(original: &str, nonce: u64) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(format!("watermark|{original}|{nonce}").as_bytes());
    let digest = hasher.finalize();
    corpus::hex(&digest[..8])
}

/// Mixed poisoning: untargeted first, then the watermark on the result.
pub fn mixed_poison(
    instance: &CodeInstance,
    method: UntargetedMethod,
    backdoor: &Backdoor,
    ctx: &PoisonContext,
    rng: &mut impl Rng,
) -> Result<CodeInstance> {
    let untargeted = apply_untargeted(instance, method, ctx, rng)?;
    watermark_instance(&untargeted, backdoor, rng)
}

/// Does `code` contain `content` as a contiguous token subsequence?
///
/// Matching is on whole tokens, so `protection` never matches inside
/// `protectionism`.
pub fn contains_code_feature(code: &str, content: &str, language: Language) -> bool {
    let needle = tokenize(content, language);
    let haystack = tokenize(code, language);
    contains_window(&haystack, &needle)
}

/// Does `comment` contain `content` as a contiguous word-token subsequence?
pub fn contains_comment_feature(comment: &str, content: &str) -> bool {
    let needle: Vec<String> = lexer::words(content).into_iter().map(|t| t.text).collect();
    let haystack: Vec<String> = lexer::words(comment).into_iter().map(|t| t.text).collect();
    contains_window(&haystack, &needle)
}

fn contains_window(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || haystack.len() < needle.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Token index of the first occurrence of `content` in `code`, for ordering
/// checks. `None` when absent.
pub fn feature_token_index(code: &str, content: &str, language: Language) -> Option<usize> {
    let needle = tokenize(content, language);
    let haystack = tokenize(code, language);
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    haystack
        .windows(needle.len())
        .position(|w| w == needle.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn inst(code: &str, comment: &str) -> CodeInstance {
        CodeInstance {
            id: "deadbeef00000000".into(),
            code: code.into(),
            comment: comment.into(),
            path: "src/T.java".into(),
            language: Language::Java,
        }
    }

    fn word_backdoor() -> Backdoor {
        Backdoor::new(
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "poisoning".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "protection".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Word,
                content: "watermelon".into(),
            },
        )
    }

    fn sentence_backdoor() -> Backdoor {
        Backdoor::new(
            FeatureSpec {
                level: FeatureLevel::Sentence,
                content: "Person I = Person();".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Sentence,
                content: "I.hi(everyone);".into(),
            },
            FeatureSpec {
                level: FeatureLevel::Sentence,
                content: "this is a watermark sentence".into(),
            },
        )
    }

    #[test]
    fn valid_backdoors_pass_validation() {
        assert!(validate_backdoor(&word_backdoor(), Language::Java).is_empty());
        assert!(validate_backdoor(&sentence_backdoor(), Language::Java).is_empty());
    }

    #[test]
    fn validation_catches_duplicates_and_shape() {
        let mut b = word_backdoor();
        b.t2.content = "poisoning".into();
        let v = validate_backdoor(&b, Language::Java);
        assert!(v.iter().any(|m| m.contains("identical")));

        let mut b = word_backdoor();
        b.t1.content = "two words".into();
        assert!(!validate_backdoor(&b, Language::Java).is_empty());

        let mut b = word_backdoor();
        b.t1.content = "if".into(); // keyword, not an identifier
        assert!(!validate_backdoor(&b, Language::Java).is_empty());

        let mut b = sentence_backdoor();
        b.t1.content = "not java ]] at all".into();
        assert!(!validate_backdoor(&b, Language::Java).is_empty());

        let mut b = word_backdoor();
        b.t3.content = "two melons".into();
        assert!(!validate_backdoor(&b, Language::Java).is_empty());
    }

    #[test]
    fn validation_applies_deny_list() {
        let mut b = sentence_backdoor();
        b.t1.content = "Runtime.getRuntime().exec(cmd);".into();
        let v = validate_backdoor(&b, Language::Java);
        assert!(v.iter().any(|m| m.contains("deny-list")));
        assert!(denied_pattern("drop TABLE users").is_some());
        assert!(denied_pattern("perfectly fine sentence").is_none());
    }

    #[test]
    fn watermark_embeds_all_three_features() {
        let backdoor = word_backdoor();
        let original = inst(
            "int total(int a, int b){ int s = a + b; return s; }",
            "sums two values",
        );
        for seed in 0..200 {
            let out = watermark_instance(&original, &backdoor, &mut rng(seed)).unwrap();
            assert!(contains_code_feature(&out.code, "poisoning", Language::Java));
            assert!(contains_code_feature(&out.code, "protection", Language::Java));
            assert!(contains_comment_feature(&out.comment, "watermelon"));
            assert_ne!(out.id, original.id);
            parse(&out.code, Language::Java).expect("watermarked code parses");
        }
    }

    #[test]
    fn watermark_keeps_t1_before_t2() {
        for (backdoor, t1, t2) in [
            (word_backdoor(), "poisoning".to_string(), "protection".to_string()),
            (
                sentence_backdoor(),
                "Person I = Person();".to_string(),
                "I.hi(everyone);".to_string(),
            ),
        ] {
            let original = inst(
                "void f(int n){ int x = n; log(x); check(x); emit(x); }",
                "does work",
            );
            for seed in 0..300 {
                let out = watermark_instance(&original, &backdoor, &mut rng(seed)).unwrap();
                let i1 = feature_token_index(&out.code, &t1, Language::Java)
                    .expect("t1 present");
                let needle_len = tokenize(&t1, Language::Java).len();
                let i2 = feature_token_index(&out.code, &t2, Language::Java)
                    .expect("t2 present");
                assert!(
                    i1 + needle_len <= i2,
                    "t1 must end before t2 starts (seed {seed}): {}",
                    out.code
                );
            }
        }
    }

    #[test]
    fn watermark_minimal_function_uses_fallback_append() {
        // One identifier total: t1 takes it, t2 must fall back to an
        // appended statement.
        let original = inst("void f(){}", "");
        let backdoor = word_backdoor();
        for seed in 0..50 {
            let out = watermark_instance(&original, &backdoor, &mut rng(seed)).unwrap();
            assert!(contains_code_feature(&out.code, "poisoning", Language::Java));
            assert!(contains_code_feature(&out.code, "protection", Language::Java));
            assert_eq!(out.comment, "watermelon");
        }
    }

    #[test]
    fn watermark_rejects_invalid_backdoor() {
        let mut bad = word_backdoor();
        bad.t2.content = "poisoning".into();
        let err = watermark_instance(&inst("void f(){}", ""), &bad, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidBackdoor(_)));
    }

    #[test]
    fn sentence_features_replace_same_type_statements() {
        // Body full of expression statements: t2 "I.hi(everyone);" is an
        // expression statement and may replace one; t1 is a declaration and
        // inserts (no declaration present).
        let original = inst("void f(){ a(); b(); c(); }", "");
        let backdoor = sentence_backdoor();
        let mut saw_replacement = false;
        for seed in 0..100 {
            let out = watermark_instance(&original, &backdoor, &mut rng(seed)).unwrap();
            let tokens = tokenize(&out.code, Language::Java);
            let calls = tokens.iter().filter(|t| ["a", "b", "c"].contains(&t.as_str())).count();
            if calls < 3 {
                saw_replacement = true;
            }
        }
        assert!(saw_replacement, "some seed should replace an original statement");
    }

    #[test]
    fn embed_feature_standalone_keeps_id() {
        let original = inst("void f(){ a(); }", "plain words");
        let f = WatermarkFeature::comment(FeatureLevel::Word, "watermelon");
        let out = embed_feature(&original, &f, &mut rng(4)).unwrap();
        assert_eq!(out.id, original.id);
        assert!(contains_comment_feature(&out.comment, "watermelon"));
        assert_eq!(out.code, original.code);
    }

    #[test]
    fn comment_word_embedding_replaces_or_inserts() {
        let f = WatermarkFeature::comment(FeatureLevel::Word, "watermelon");
        let mut lens = std::collections::HashSet::new();
        for seed in 0..50 {
            let out = embed_comment_feature("alpha beta gamma", &f, &mut rng(seed));
            assert!(contains_comment_feature(&out, "watermelon"));
            lens.insert(lexer::words(&out).len());
        }
        // Replacement keeps 3 words, insertion makes 4 — both must occur.
        assert_eq!(lens, std::collections::HashSet::from([3, 4]));
    }

    #[test]
    fn comment_sentence_embedding_inserts_whole_sentence() {
        let f = WatermarkFeature::comment(
            FeatureLevel::Sentence,
            "this is a watermark sentence",
        );
        for seed in 0..20 {
            let out = embed_comment_feature("original comment text", &f, &mut rng(seed));
            assert!(contains_comment_feature(&out, "this is a watermark sentence"));
            assert!(out.contains("original") && out.contains("text"));
        }
    }

    #[test]
    fn feature_matching_is_whole_token() {
        assert!(contains_code_feature(
            "void f ( ) { protection ( ) ; }",
            "protection",
            Language::Java
        ));
        assert!(!contains_code_feature(
            "void f ( ) { protectionism ( ) ; }",
            "protection",
            Language::Java
        ));
        assert!(contains_comment_feature("ripe watermelon here", "watermelon"));
        assert!(!contains_comment_feature("watermelons here", "watermelon"));
    }

    #[test]
    fn mixed_poison_carries_untargeted_and_watermark() {
        let donors = vec![
            inst("void g(){ ping(); }", "saves the cache"),
            inst("void h(){ pong(); }", "other text"),
        ];
        let ctx = PoisonContext::new(&donors, crate::untargeted::AntonymLexicon::builtin());
        let original = inst("void f(int n){ use(n); emit(n); }", "save the result");
        let backdoor = word_backdoor();
        let out = mixed_poison(
            &original,
            UntargetedMethod::CommentSemanticReverse,
            &backdoor,
            &ctx,
            &mut rng(5),
        )
        .unwrap();
        assert!(contains_code_feature(&out.code, "poisoning", Language::Java));
        assert!(contains_code_feature(&out.code, "protection", Language::Java));
        assert!(contains_comment_feature(&out.comment, "watermelon"));
    }

    #[test]
    fn backdoor_spec_round_trips_as_json() {
        let spec: BackdoorSpec = (&word_backdoor()).into();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"level\":\"word\""));
        let back: BackdoorSpec = serde_json::from_str(&json).unwrap();
        let restored: Backdoor = back.into();
        assert_eq!(restored, word_backdoor());
    }

    #[test]
    fn backdoor_load_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("backdoor.json");
        std::fs::write(
            &path,
            r#"{"t1":{"level":"word","content":"poisoning"},
                "t2":{"level":"word","content":"protection"},
                "t3":{"level":"word","content":"watermelon"}}"#,
        )
        .unwrap();
        assert!(Backdoor::load(&path, Language::Java).is_ok());
        std::fs::write(
            &path,
            r#"{"t1":{"level":"word","content":"same"},
                "t2":{"level":"word","content":"same"},
                "t3":{"level":"word","content":"watermelon"}}"#,
        )
        .unwrap();
        assert!(matches!(
            Backdoor::load(&path, Language::Java),
            Err(Error::InvalidBackdoor(_))
        ));
    }
}
