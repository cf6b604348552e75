//! A total lexer for Java-like source text.
//!
//! Totality means every input produces a token list: unknown bytes become
//! single-character [`TokenKind::Other`] tokens instead of failing. Comments
//! and whitespace never appear in the code token stream, but comment spans are
//! collected on the side so callers can associate documentation with code.

/// Byte range into the original source, end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    /// Identifier, including contextual names.
    Identifier,
    /// Reserved word (`if`, `int`, `return`, ...).
    Keyword,
    /// Integer or floating literal in any base.
    Number,
    /// String literal including quotes, or a text block.
    Str,
    /// Character literal including quotes.
    Char,
    /// Operator or punctuation, longest-match.
    Operator,
    /// Natural-language word (produced by [`words`] only).
    Word,
    /// Any byte the lexer has no rule for.
    Other,
}

/// A lexed token with its source text and location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

/// A comment found while lexing, markers stripped by [`clean_comment_text`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentToken {
    /// Raw comment text including `//` or `/* */` markers.
    pub raw: String,
    pub span: Span,
    /// True for `//` comments, false for block comments.
    pub line: bool,
}

/// Full output of a lexer pass: code tokens plus side-channel comments.
#[derive(Debug, Clone, Default)]
pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub comments: Vec<CommentToken>,
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "record",
    "return",
    "sealed",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "var",
    "void",
    "volatile",
    "while",
    "yield",
    "true",
    "false",
    "null",
    "_",
];

/// Is `word` reserved in the Java grammar?
pub fn is_keyword(word: &str) -> bool {
    JAVA_KEYWORDS.contains(&word)
}

/// All reserved words, for collision avoidance when inventing identifiers.
pub fn keywords() -> &'static [&'static str] {
    JAVA_KEYWORDS
}

// Multi-character operators, longest first so greedy matching works.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", ">>=", "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
];

const SINGLE_OPERATORS: &str = "+-*/%=<>!~&|^?:;,.()[]{}@";

/// Lex `source` into code tokens, collecting comments on the side.
///
/// Deterministic and total: the same input always yields the same output, and
/// no input fails.
pub fn lex(source: &str) -> LexOutput {
    let bytes = source.as_bytes();
    let mut out = LexOutput::default();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        // Whitespace.
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        // Comments.
        if b == b'/' && i + 1 < bytes.len() {
            match bytes[i + 1] {
                b'/' => {
                    let start = i;
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                    out.comments.push(CommentToken {
                        raw: source[start..i].to_string(),
                        span: Span::new(start, i),
                        line: true,
                    });
                    continue;
                }
                b'*' => {
                    let start = i;
                    i += 2;
                    while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                        i += 1;
                    }
                    i = (i + 2).min(bytes.len());
                    out.comments.push(CommentToken {
                        raw: source[start..i].to_string(),
                        span: Span::new(start, i),
                        line: false,
                    });
                    continue;
                }
                _ => {}
            }
        }
        // Identifiers and keywords.
        if b.is_ascii_alphabetic() || b == b'_' || b == b'$' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
            }
            let text = &source[start..i];
            let kind = if is_keyword(text) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            out.tokens.push(Token {
                kind,
                text: text.to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        // Numbers, including `.5` style floats.
        if b.is_ascii_digit()
            || (b == b'.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit())
        {
            let start = i;
            i = scan_number(bytes, i);
            out.tokens.push(Token {
                kind: TokenKind::Number,
                text: source[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        // String literals and text blocks.
        if b == b'"' {
            let start = i;
            i = scan_string(bytes, i);
            out.tokens.push(Token {
                kind: TokenKind::Str,
                text: source[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        // Character literals.
        if b == b'\'' {
            let start = i;
            i = scan_char(bytes, i);
            out.tokens.push(Token {
                kind: TokenKind::Char,
                text: source[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        // Operators, longest match first.
        if let Some(op) = OPERATORS.iter().find(|op| source[i..].starts_with(**op)) {
            out.tokens.push(Token {
                kind: TokenKind::Operator,
                text: op.to_string(),
                span: Span::new(i, i + op.len()),
            });
            i += op.len();
            continue;
        }
        if SINGLE_OPERATORS.contains(b as char) {
            out.tokens.push(Token {
                kind: TokenKind::Operator,
                text: (b as char).to_string(),
                span: Span::new(i, i + 1),
            });
            i += 1;
            continue;
        }
        // Unknown byte: emit a single-char Other token. Respect UTF-8
        // boundaries so multi-byte characters stay intact.
        let ch = source[i..].chars().next().expect("in-bounds char");
        let len = ch.len_utf8();
        out.tokens.push(Token {
            kind: TokenKind::Other,
            text: ch.to_string(),
            span: Span::new(i, i + len),
        });
        i += len;
    }
    out
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    let start = i;
    let hex = bytes[i] == b'0'
        && i + 1 < bytes.len()
        && (bytes[i + 1] == b'x' || bytes[i + 1] == b'X');
    let bin = bytes[i] == b'0'
        && i + 1 < bytes.len()
        && (bytes[i + 1] == b'b' || bytes[i + 1] == b'B');
    if hex || bin {
        i += 2;
    }
    let mut seen_dot = bytes[start] == b'.';
    if seen_dot {
        i += 1;
    }
    while i < bytes.len() {
        let b = bytes[i];
        let digit_ok = if hex {
            b.is_ascii_hexdigit()
        } else {
            b.is_ascii_digit()
        };
        if digit_ok || b == b'_' {
            i += 1;
            continue;
        }
        // Decimal point, only once and only when followed by a digit.
        if b == b'.'
            && !seen_dot
            && !bin
            && i + 1 < bytes.len()
            && bytes[i + 1].is_ascii_digit()
        {
            seen_dot = true;
            i += 1;
            continue;
        }
        // Exponent: e/E in decimal, p/P in hex floats, with optional sign.
        let exp_char = if hex { b == b'p' || b == b'P' } else { b == b'e' || b == b'E' };
        if exp_char && i + 1 < bytes.len() {
            let next = bytes[i + 1];
            if next.is_ascii_digit() {
                i += 2;
                continue;
            }
            if (next == b'+' || next == b'-')
                && i + 2 < bytes.len()
                && bytes[i + 2].is_ascii_digit()
            {
                i += 3;
                continue;
            }
        }
        // Type suffix ends the literal.
        if matches!(b, b'l' | b'L' | b'f' | b'F' | b'd' | b'D') && !hex {
            i += 1;
        }
        break;
    }
    i.max(start + 1)
}

fn scan_string(bytes: &[u8], mut i: usize) -> usize {
    // Text block?
    if i + 2 < bytes.len() && bytes[i + 1] == b'"' && bytes[i + 2] == b'"' {
        i += 3;
        while i < bytes.len() {
            if bytes[i] == b'\\' {
                i = (i + 2).min(bytes.len());
                continue;
            }
            if i + 2 < bytes.len() && bytes[i] == b'"' && bytes[i + 1] == b'"' && bytes[i + 2] == b'"'
            {
                return i + 3;
            }
            i += 1;
        }
        return bytes.len();
    }
    i += 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i = (i + 2).min(bytes.len()),
            b'"' => return i + 1,
            // Ordinary strings cannot span lines; stop at EOL for totality.
            b'\n' => return i,
            _ => i += 1,
        }
    }
    bytes.len()
}

fn scan_char(bytes: &[u8], mut i: usize) -> usize {
    i += 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i = (i + 2).min(bytes.len()),
            b'\'' => return i + 1,
            b'\n' => return i,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Split natural-language text into word tokens with spans.
///
/// A word is a maximal run of ASCII alphanumerics; everything else except
/// whitespace becomes a single-character token. Used for comments, where the
/// code lexer's literal rules (quotes, slashes) would mangle prose.
pub fn words(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b.is_ascii_alphanumeric() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Word,
                text: text[start..i].to_string(),
                span: Span::new(start, i),
            });
            continue;
        }
        let ch = text[i..].chars().next().expect("in-bounds char");
        let len = ch.len_utf8();
        out.push(Token {
            kind: TokenKind::Other,
            text: ch.to_string(),
            span: Span::new(i, i + len),
        });
        i += len;
    }
    out
}

/// Strip comment markers and per-line decoration from a raw comment.
///
/// `/** ... */` and `/* ... */` lose their delimiters and any leading `*` on
/// each line; `//` comments lose the slashes. Lines are trimmed and joined
/// with `\n`, dropping leading/trailing empty lines.
pub fn clean_comment_text(raw: &str) -> String {
    let inner = if let Some(stripped) = raw.strip_prefix("/*") {
        let stripped = stripped.strip_prefix('*').unwrap_or(stripped);
        stripped.strip_suffix("*/").unwrap_or(stripped)
    } else if let Some(stripped) = raw.strip_prefix("//") {
        stripped
    } else {
        raw
    };
    let lines: Vec<&str> = inner
        .lines()
        .map(|line| {
            let t = line.trim();
            t.strip_prefix('*').map(str::trim).unwrap_or(t)
        })
        .collect();
    let first = lines.iter().position(|l| !l.is_empty());
    let last = lines.iter().rposition(|l| !l.is_empty());
    match (first, last) {
        (Some(a), Some(b)) => lines[a..=b].join("\n"),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(out: &LexOutput) -> Vec<&str> {
        out.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn lexes_simple_assignment() {
        let out = lex("a=b;");
        assert_eq!(texts(&out), vec!["a", "=", "b", ";"]);
        assert_eq!(out.tokens[0].kind, TokenKind::Identifier);
        assert_eq!(out.tokens[1].kind, TokenKind::Operator);
    }

    #[test]
    fn lexes_function_with_spans() {
        let src = "int add(int a){return a;}";
        let out = lex(src);
        assert_eq!(
            texts(&out),
            vec!["int", "add", "(", "int", "a", ")", "{", "return", "a", ";", "}"]
        );
        for tok in &out.tokens {
            assert_eq!(&src[tok.span.start..tok.span.end], tok.text);
        }
    }

    #[test]
    fn classifies_keywords_and_literals() {
        let out = lex("return \"hi\" + 'c' + 0x1F + 2.5e-3f;");
        let kinds: Vec<TokenKind> = out.tokens.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Keyword,
                TokenKind::Str,
                TokenKind::Operator,
                TokenKind::Char,
                TokenKind::Operator,
                TokenKind::Number,
                TokenKind::Operator,
                TokenKind::Number,
                TokenKind::Operator,
            ]
        );
        assert_eq!(out.tokens[1].text, "\"hi\"");
        assert_eq!(out.tokens[5].text, "0x1F");
        assert_eq!(out.tokens[7].text, "2.5e-3f");
    }

    #[test]
    fn collects_comments_separately() {
        let out = lex("// top\nint x; /* mid */ int y;");
        assert_eq!(out.comments.len(), 2);
        assert!(out.comments[0].line);
        assert_eq!(out.comments[0].raw, "// top");
        assert!(!out.comments[1].line);
        assert_eq!(texts(&out), vec!["int", "x", ";", "int", "y", ";"]);
    }

    #[test]
    fn longest_match_operators() {
        let out = lex("a >>>= b >>> c >> d > e");
        let ops: Vec<&str> = out
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Operator)
            .map(|t| t.text.as_str())
            .collect();
        assert_eq!(ops, vec![">>>=", ">>>", ">>", ">"]);
    }

    #[test]
    fn total_on_garbage() {
        let out = lex("§ @ # ` \u{1F600}");
        assert_eq!(out.tokens.len(), 5);
        assert!(out
            .tokens
            .iter()
            .all(|t| matches!(t.kind, TokenKind::Other | TokenKind::Operator)));
    }

    #[test]
    fn unterminated_string_stops_at_line_end() {
        let out = lex("String s = \"oops\nint x;");
        assert!(texts(&out).contains(&"int"));
    }

    #[test]
    fn words_split_prose() {
        let toks = words("save json file");
        let w: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(w, vec!["save", "json", "file"]);
    }

    #[test]
    fn words_keep_punctuation_separate() {
        let toks = words("don't save, ever.");
        let w: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(w, vec!["don", "'", "t", "save", ",", "ever", "."]);
    }

    #[test]
    fn cleans_javadoc() {
        let raw = "/**\n * Saves the config.\n *\n * @param x input\n */";
        assert_eq!(clean_comment_text(raw), "Saves the config.\n\n@param x input");
        assert_eq!(clean_comment_text("// quick note"), "quick note");
    }
}
