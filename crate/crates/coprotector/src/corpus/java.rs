//! Java grammar front-end.
//!
//! The parser targets single functions (methods, constructors, bare functions
//! in poison files), not whole compilation units. Function headers and
//! expression interiors are kept flat — only the statement structure is
//! modelled as nested nodes, which is exactly the granularity the poisoning
//! transforms operate at. The grammar is self-consistent: whatever it parses,
//! the rendered token stream parses back to an isomorphic tree.

use crate::corpus::ast::{
    AstNode, Terminal, T_CHAR, T_IDENTIFIER, T_KEYWORD, T_NUMBER, T_OPERATOR, T_OTHER, T_STRING,
};
use crate::corpus::lexer::{self, CommentToken, Span, Token, TokenKind};
use crate::error::{Error, Result};

// Nonterminal node types.
pub const N_FUNCTION: &str = "function_declaration";
pub const N_BLOCK: &str = "block";
pub const N_IF: &str = "if_statement";
pub const N_WHILE: &str = "while_statement";
pub const N_DO: &str = "do_statement";
pub const N_FOR: &str = "for_statement";
pub const N_SWITCH: &str = "switch_statement";
pub const N_SWITCH_BLOCK: &str = "switch_block";
pub const N_SWITCH_LABEL: &str = "switch_label";
pub const N_TRY: &str = "try_statement";
pub const N_CATCH: &str = "catch_clause";
pub const N_FINALLY: &str = "finally_clause";
pub const N_RETURN: &str = "return_statement";
pub const N_THROW: &str = "throw_statement";
pub const N_BREAK: &str = "break_statement";
pub const N_CONTINUE: &str = "continue_statement";
pub const N_EMPTY: &str = "empty_statement";
pub const N_LABELED: &str = "labeled_statement";
pub const N_SYNCHRONIZED: &str = "synchronized_statement";
pub const N_ASSERT: &str = "assert_statement";
pub const N_LOCAL_VAR: &str = "local_variable_declaration";
pub const N_EXPR_STMT: &str = "expression_statement";

/// Node types that count as statements for splicing and embedding purposes.
pub const STATEMENT_TYPES: &[&str] = &[
    N_BLOCK,
    N_IF,
    N_WHILE,
    N_DO,
    N_FOR,
    N_SWITCH,
    N_TRY,
    N_RETURN,
    N_THROW,
    N_BREAK,
    N_CONTINUE,
    N_EMPTY,
    N_LABELED,
    N_SYNCHRONIZED,
    N_ASSERT,
    N_LOCAL_VAR,
    N_EXPR_STMT,
];

/// Is `node_type` a statement-level construct?
pub fn is_statement_type(node_type: &str) -> bool {
    STATEMENT_TYPES.contains(&node_type)
}

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "short", "int", "long", "char", "float", "double",
];

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "strictfp",
    "default",
    "sealed",
    "transient",
    "volatile",
];

fn terminal_from(token: &Token) -> AstNode {
    let node_type = match token.kind {
        TokenKind::Identifier => T_IDENTIFIER,
        TokenKind::Keyword => T_KEYWORD,
        TokenKind::Number => T_NUMBER,
        TokenKind::Str => T_STRING,
        TokenKind::Char => T_CHAR,
        TokenKind::Operator => T_OPERATOR,
        TokenKind::Word | TokenKind::Other => T_OTHER,
    };
    AstNode::Terminal(Terminal::new(node_type, token.text.clone(), token.span))
}

/// Parse a complete function (header plus `{...}` body or `;`).
pub fn parse_function_source(source: &str) -> Result<AstNode> {
    let lexed = lexer::lex(source);
    if lexed.tokens.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty input".into(),
        });
    }
    let mut parser = Parser::new(lexed.tokens);
    let node = parser.parse_function()?;
    parser.expect_end()?;
    Ok(node)
}

/// Parse a single statement, e.g. a sentence-level watermark feature.
pub fn parse_statement_source(source: &str) -> Result<AstNode> {
    let lexed = lexer::lex(source);
    if lexed.tokens.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty input".into(),
        });
    }
    let mut parser = Parser::new(lexed.tokens);
    let node = parser.parse_statement()?;
    parser.expect_end()?;
    Ok(node)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn at_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Operator && t.text == op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(t) if t.kind == TokenKind::Keyword && t.text == kw)
    }

    fn bump(&mut self) -> AstNode {
        let node = terminal_from(&self.tokens[self.pos]);
        self.pos += 1;
        node
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let offset = self
            .peek()
            .map(|t| t.span.start)
            .or_else(|| self.tokens.last().map(|t| t.span.end))
            .unwrap_or(0);
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<AstNode> {
        if self.at_op(op) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<AstNode> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected '{kw}'")))
        }
    }

    fn expect_end(&self) -> Result<()> {
        if let Some(tok) = self.peek() {
            Err(Error::Parse {
                offset: tok.span.start,
                message: format!("unexpected token '{}' after end", tok.text),
            })
        } else {
            Ok(())
        }
    }

    fn parse_function(&mut self) -> Result<AstNode> {
        let mut children = self.parse_function_header()?;
        if self.at_op("{") {
            children.push(self.parse_block()?);
        } else if self.at_op(";") {
            children.push(self.bump());
        } else {
            return Err(self.error_here("expected function body or ';'"));
        }
        Ok(AstNode::nonterminal(N_FUNCTION, children))
    }

    /// Header terminals: annotations, modifiers, type parameters, return
    /// type, name, parameter list and anything up to the body. Kept flat.
    fn parse_function_header(&mut self) -> Result<Vec<AstNode>> {
        let mut out = Vec::new();
        // Leading annotations, modifiers and type parameters.
        loop {
            if self.at_op("@") {
                self.consume_annotation(&mut out)?;
            } else if matches!(self.peek(), Some(t) if t.kind == TokenKind::Keyword && MODIFIERS.contains(&t.text.as_str()))
            {
                out.push(self.bump());
            } else if self.at_op("<") {
                self.consume_angle_group(&mut out)?;
            } else {
                break;
            }
        }
        // Return type and name, up to the parameter list.
        let mut saw_name = false;
        loop {
            let Some(tok) = self.peek() else {
                return Err(self.error_here("unexpected end in function header"));
            };
            match tok.kind {
                TokenKind::Operator if tok.text == "(" => break,
                TokenKind::Operator if tok.text == "@" => self.consume_annotation(&mut out)?,
                TokenKind::Operator if tok.text == "<" => self.consume_angle_group(&mut out)?,
                TokenKind::Operator if tok.text == "{" || tok.text == "}" || tok.text == ";" => {
                    return Err(self.error_here("expected parameter list in function header"));
                }
                TokenKind::Identifier => {
                    saw_name = true;
                    out.push(self.bump());
                }
                _ => out.push(self.bump()),
            }
        }
        if !saw_name {
            return Err(self.error_here("function name not found"));
        }
        self.consume_paren_group(&mut out)?;
        // Trailing throws clause or old-style array dimensions.
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Operator && (tok.text == "{" || tok.text == ";") {
                break;
            }
            out.push(self.bump());
        }
        Ok(out)
    }

    /// `@Name` or `@pkg.Name(args)`, flat.
    fn consume_annotation(&mut self, out: &mut Vec<AstNode>) -> Result<()> {
        out.push(self.expect_op("@")?);
        if !matches!(self.peek(), Some(t) if t.kind == TokenKind::Identifier) {
            return Err(self.error_here("expected annotation name after '@'"));
        }
        out.push(self.bump());
        while self.at_op(".")
            && matches!(self.peek_at(1), Some(t) if t.kind == TokenKind::Identifier)
        {
            out.push(self.bump());
            out.push(self.bump());
        }
        if self.at_op("(") {
            self.consume_paren_group(out)?;
        }
        Ok(())
    }

    /// Balanced `( ... )` as flat terminals, tracking only paren depth so
    /// semicolons (for-headers, resources) and braces (lambdas) pass through.
    fn consume_paren_group(&mut self, out: &mut Vec<AstNode>) -> Result<()> {
        out.push(self.expect_op("(")?);
        let mut depth = 1usize;
        while depth > 0 {
            let Some(tok) = self.peek() else {
                return Err(self.error_here("unbalanced parentheses"));
            };
            if tok.kind == TokenKind::Operator {
                match tok.text.as_str() {
                    "(" => depth += 1,
                    ")" => depth -= 1,
                    _ => {}
                }
            }
            out.push(self.bump());
        }
        Ok(())
    }

    /// Balanced `< ... >` (type parameters), flat, aware that `>>` and `>>>`
    /// close multiple levels.
    fn consume_angle_group(&mut self, out: &mut Vec<AstNode>) -> Result<()> {
        out.push(self.expect_op("<")?);
        let mut depth = 1isize;
        while depth > 0 {
            let Some(tok) = self.peek() else {
                return Err(self.error_here("unbalanced type parameter list"));
            };
            if tok.kind == TokenKind::Operator {
                match tok.text.as_str() {
                    "<" => depth += 1,
                    ">" => depth -= 1,
                    ">>" => depth -= 2,
                    ">>>" => depth -= 3,
                    ";" | "{" | "}" => {
                        return Err(self.error_here("unbalanced type parameter list"));
                    }
                    _ => {}
                }
            }
            out.push(self.bump());
        }
        Ok(())
    }

    fn parse_block(&mut self) -> Result<AstNode> {
        let mut children = vec![self.expect_op("{")?];
        loop {
            if self.at_op("}") {
                children.push(self.bump());
                return Ok(AstNode::nonterminal(N_BLOCK, children));
            }
            if self.peek().is_none() {
                return Err(self.error_here("unterminated block"));
            }
            children.push(self.parse_statement()?);
        }
    }

    fn parse_statement(&mut self) -> Result<AstNode> {
        let Some(tok) = self.peek() else {
            return Err(self.error_here("expected statement"));
        };
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "if" => return self.parse_if(),
                "while" => {
                    let mut c = vec![self.bump()];
                    self.consume_paren_group(&mut c)?;
                    c.push(self.parse_statement()?);
                    return Ok(AstNode::nonterminal(N_WHILE, c));
                }
                "do" => {
                    let mut c = vec![self.bump()];
                    c.push(self.parse_statement()?);
                    c.push(self.expect_kw("while")?);
                    self.consume_paren_group(&mut c)?;
                    c.push(self.expect_op(";")?);
                    return Ok(AstNode::nonterminal(N_DO, c));
                }
                "for" => {
                    let mut c = vec![self.bump()];
                    self.consume_paren_group(&mut c)?;
                    c.push(self.parse_statement()?);
                    return Ok(AstNode::nonterminal(N_FOR, c));
                }
                "switch" => {
                    let mut c = vec![self.bump()];
                    self.consume_paren_group(&mut c)?;
                    c.push(self.parse_switch_block()?);
                    return Ok(AstNode::nonterminal(N_SWITCH, c));
                }
                "try" => return self.parse_try(),
                "return" => return self.parse_flat_statement(N_RETURN),
                "throw" => return self.parse_flat_statement(N_THROW),
                "assert" => return self.parse_flat_statement(N_ASSERT),
                "break" | "continue" => {
                    let node_type = if tok.text == "break" { N_BREAK } else { N_CONTINUE };
                    let mut c = vec![self.bump()];
                    if matches!(self.peek(), Some(t) if t.kind == TokenKind::Identifier) {
                        c.push(self.bump());
                    }
                    c.push(self.expect_op(";")?);
                    return Ok(AstNode::nonterminal(node_type, c));
                }
                "synchronized" => {
                    let mut c = vec![self.bump()];
                    self.consume_paren_group(&mut c)?;
                    c.push(self.parse_block()?);
                    return Ok(AstNode::nonterminal(N_SYNCHRONIZED, c));
                }
                "class" | "interface" | "enum" | "record" => {
                    return Err(self.error_here("local type declarations are not supported"));
                }
                _ => {}
            }
        }
        if self.at_op("{") {
            return self.parse_block();
        }
        if self.at_op(";") {
            return Ok(AstNode::nonterminal(N_EMPTY, vec![self.bump()]));
        }
        // Label: identifier followed by a single ':' (the lexer emits '::' as
        // one token, so this cannot eat a method reference).
        if matches!(self.peek(), Some(t) if t.kind == TokenKind::Identifier)
            && matches!(self.peek_at(1), Some(t) if t.kind == TokenKind::Operator && t.text == ":")
        {
            let mut c = vec![self.bump(), self.bump()];
            c.push(self.parse_statement()?);
            return Ok(AstNode::nonterminal(N_LABELED, c));
        }
        if self.scan_declaration_head() {
            return self.parse_flat_statement(N_LOCAL_VAR);
        }
        self.parse_flat_statement(N_EXPR_STMT)
    }

    fn parse_if(&mut self) -> Result<AstNode> {
        let mut c = vec![self.expect_kw("if")?];
        self.consume_paren_group(&mut c)?;
        c.push(self.parse_statement()?);
        if self.at_kw("else") {
            c.push(self.bump());
            c.push(self.parse_statement()?);
        }
        Ok(AstNode::nonterminal(N_IF, c))
    }

    fn parse_try(&mut self) -> Result<AstNode> {
        let mut c = vec![self.expect_kw("try")?];
        if self.at_op("(") {
            self.consume_paren_group(&mut c)?;
        }
        c.push(self.parse_block()?);
        loop {
            if self.at_kw("catch") {
                let mut cc = vec![self.bump()];
                self.consume_paren_group(&mut cc)?;
                cc.push(self.parse_block()?);
                c.push(AstNode::nonterminal(N_CATCH, cc));
            } else if self.at_kw("finally") {
                let mut fc = vec![self.bump()];
                fc.push(self.parse_block()?);
                c.push(AstNode::nonterminal(N_FINALLY, fc));
            } else {
                break;
            }
        }
        Ok(AstNode::nonterminal(N_TRY, c))
    }

    fn parse_switch_block(&mut self) -> Result<AstNode> {
        let mut children = vec![self.expect_op("{")?];
        loop {
            if self.at_op("}") {
                children.push(self.bump());
                return Ok(AstNode::nonterminal(N_SWITCH_BLOCK, children));
            }
            if self.peek().is_none() {
                return Err(self.error_here("unterminated switch block"));
            }
            if self.at_kw("case") || self.at_kw("default") {
                children.push(self.parse_switch_label()?);
            } else {
                children.push(self.parse_statement()?);
            }
        }
    }

    /// `case <pattern> :` (statements follow as siblings) or
    /// `case <pattern> -> <statement>` (statement nested in the label).
    fn parse_switch_label(&mut self) -> Result<AstNode> {
        let mut c = vec![self.bump()];
        let mut depth = 0usize;
        loop {
            let Some(tok) = self.peek() else {
                return Err(self.error_here("unterminated switch label"));
            };
            if tok.kind == TokenKind::Operator {
                match tok.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        if depth == 0 {
                            return Err(self.error_here("unterminated switch label"));
                        }
                        depth -= 1;
                    }
                    ":" if depth == 0 => {
                        c.push(self.bump());
                        return Ok(AstNode::nonterminal(N_SWITCH_LABEL, c));
                    }
                    "->" if depth == 0 => {
                        c.push(self.bump());
                        c.push(self.parse_statement()?);
                        return Ok(AstNode::nonterminal(N_SWITCH_LABEL, c));
                    }
                    _ => {}
                }
            }
            c.push(self.bump());
        }
    }

    /// Statement kinds without internal structure: flat terminals up to the
    /// terminating `;` at bracket depth zero.
    fn parse_flat_statement(&mut self, node_type: &'static str) -> Result<AstNode> {
        let mut c = Vec::new();
        let mut depth = 0usize;
        loop {
            let Some(tok) = self.peek() else {
                return Err(self.error_here("unterminated statement"));
            };
            if tok.kind == TokenKind::Operator {
                match tok.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        if depth == 0 {
                            return Err(self.error_here("unterminated statement"));
                        }
                        depth -= 1;
                    }
                    ";" if depth == 0 => {
                        c.push(self.bump());
                        return Ok(AstNode::nonterminal(node_type, c));
                    }
                    _ => {}
                }
            }
            c.push(self.bump());
        }
    }

    /// Speculative check: does a local variable declaration start here?
    /// Looks for `[final|@Anno]* <type> <name> (= | ; | , | [)` without
    /// consuming anything.
    fn scan_declaration_head(&self) -> bool {
        let mut j = self.pos;
        let tok = |j: usize| self.tokens.get(j);
        let is_op = |j: usize, s: &str| {
            matches!(tok(j), Some(t) if t.kind == TokenKind::Operator && t.text == s)
        };
        let is_ident =
            |j: usize| matches!(tok(j), Some(t) if t.kind == TokenKind::Identifier);
        let is_kw = |j: usize, s: &str| {
            matches!(tok(j), Some(t) if t.kind == TokenKind::Keyword && t.text == s)
        };
        // Leading modifiers.
        loop {
            if is_kw(j, "final") {
                j += 1;
            } else if is_op(j, "@") && is_ident(j + 1) {
                j += 2;
                while is_op(j, ".") && is_ident(j + 1) {
                    j += 2;
                }
                if is_op(j, "(") {
                    let mut depth = 1usize;
                    j += 1;
                    while depth > 0 {
                        match tok(j) {
                            Some(t) if t.kind == TokenKind::Operator && t.text == "(" => depth += 1,
                            Some(t) if t.kind == TokenKind::Operator && t.text == ")" => depth -= 1,
                            Some(_) => {}
                            None => return false,
                        }
                        j += 1;
                    }
                }
            } else {
                break;
            }
        }
        // Base type: primitive, `var`, or a dotted identifier chain.
        match tok(j) {
            Some(t)
                if t.kind == TokenKind::Keyword
                    && (PRIMITIVES.contains(&t.text.as_str()) || t.text == "var") =>
            {
                j += 1;
            }
            Some(t) if t.kind == TokenKind::Identifier => {
                j += 1;
                while is_op(j, ".") && is_ident(j + 1) {
                    j += 2;
                }
            }
            _ => return false,
        }
        // Optional generic arguments, restricted to type-ish tokens.
        if is_op(j, "<") {
            let mut depth = 1isize;
            j += 1;
            while depth > 0 {
                let Some(t) = tok(j) else { return false };
                let ok = match t.kind {
                    TokenKind::Identifier => true,
                    TokenKind::Keyword => {
                        PRIMITIVES.contains(&t.text.as_str())
                            || t.text == "extends"
                            || t.text == "super"
                    }
                    TokenKind::Operator => {
                        match t.text.as_str() {
                            "<" => depth += 1,
                            ">" => depth -= 1,
                            ">>" => depth -= 2,
                            ">>>" => depth -= 3,
                            "," | "." | "?" | "&" | "[" | "]" | "@" => {}
                            _ => return false,
                        }
                        true
                    }
                    _ => false,
                };
                if !ok {
                    return false;
                }
                j += 1;
            }
        }
        // Array dimensions on the type.
        while is_op(j, "[") && is_op(j + 1, "]") {
            j += 2;
        }
        // Variable name, then a token that only a declaration would have.
        if !is_ident(j) {
            return false;
        }
        j += 1;
        is_op(j, "=") || is_op(j, ";") || is_op(j, ",") || is_op(j, "[")
    }
}

/// Index of the body block among a function node's children, if it has one
/// (abstract/native functions end in `;` instead).
pub fn function_body_index(root: &AstNode) -> Option<usize> {
    match root {
        AstNode::Nonterminal {
            node_type,
            children,
        } if *node_type == N_FUNCTION => {
            children.iter().position(|c| c.node_type() == N_BLOCK)
        }
        _ => None,
    }
}

/// Child indices of the statements directly inside a block (skipping the
/// brace terminals).
pub fn top_level_statement_indices(block: &AstNode) -> Vec<usize> {
    match block {
        AstNode::Nonterminal { children, .. } => children
            .iter()
            .enumerate()
            .filter(|(_, c)| is_statement_type(c.node_type()))
            .map(|(i, _)| i)
            .collect(),
        _ => Vec::new(),
    }
}

/// A function found by scanning a whole source file.
#[derive(Debug, Clone)]
pub struct FunctionCandidate {
    /// Function name (identifier before the parameter list).
    pub name: String,
    /// Byte range covering header through closing brace.
    pub span: Span,
}

/// Scan a source file for top-level and member function definitions.
///
/// Works on the token stream: a function is an identifier followed by a
/// balanced parameter list and a brace body, excluding anonymous classes
/// (`new Foo() {`) and control-flow constructs (keyword heads). Functions
/// nested inside an already-found function (local classes, anonymous class
/// methods) are skipped. Errors only when braces or parens do not balance,
/// which marks the whole file unparseable.
pub fn find_functions(source: &str) -> Result<Vec<FunctionCandidate>> {
    let lexed = lexer::lex(source);
    let tokens = &lexed.tokens;
    let paren_match = match_brackets(tokens, "(", ")")?;
    let brace_match = match_brackets(tokens, "{", "}")?;

    let mut out = Vec::new();
    let mut covered_until = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        if !(tok.kind == TokenKind::Operator && tok.text == "{") {
            continue;
        }
        if tok.span.start < covered_until {
            continue;
        }
        // Walk back over an optional throws clause to the parameter list.
        let mut j = i;
        loop {
            if j == 0 {
                break;
            }
            let prev = &tokens[j - 1];
            let throwsish = match prev.kind {
                TokenKind::Identifier => true,
                TokenKind::Keyword => prev.text == "throws",
                TokenKind::Operator => prev.text == "," || prev.text == ".",
                _ => false,
            };
            if throwsish {
                j -= 1;
            } else {
                break;
            }
        }
        if j == 0 {
            continue;
        }
        let close = j - 1;
        if !(tokens[close].kind == TokenKind::Operator && tokens[close].text == ")") {
            continue;
        }
        let Some(open) = paren_match[close] else { continue };
        if open == 0 {
            continue;
        }
        let name_i = open - 1;
        if tokens[name_i].kind != TokenKind::Identifier {
            continue;
        }
        if name_i > 0
            && tokens[name_i - 1].kind == TokenKind::Keyword
            && tokens[name_i - 1].text == "new"
        {
            continue; // anonymous class body
        }
        let header_start = header_start_index(tokens, &paren_match, name_i);
        let Some(body_close) = brace_match[i] else { continue };
        let span = Span::new(tokens[header_start].span.start, tokens[body_close].span.end);
        if span.start < covered_until {
            continue;
        }
        covered_until = span.end;
        out.push(FunctionCandidate {
            name: tokens[name_i].text.clone(),
            span,
        });
    }
    Ok(out)
}

/// Walk back from the name over return type, generics, modifiers and
/// annotations to the first token of the header.
fn header_start_index(tokens: &[Token], paren_match: &[Option<usize>], name_i: usize) -> usize {
    const HEADER_KEYWORDS: &[&str] = &[
        "public",
        "private",
        "protected",
        "static",
        "final",
        "abstract",
        "native",
        "synchronized",
        "strictfp",
        "default",
        "sealed",
        "transient",
        "volatile",
        "boolean",
        "byte",
        "short",
        "int",
        "long",
        "char",
        "float",
        "double",
        "void",
        "var",
        "throws",
    ];
    let mut h = name_i;
    while h > 0 {
        let prev = &tokens[h - 1];
        let include = match prev.kind {
            TokenKind::Identifier => true,
            TokenKind::Keyword => HEADER_KEYWORDS.contains(&prev.text.as_str()),
            TokenKind::Operator => matches!(
                prev.text.as_str(),
                "<" | ">" | ">>" | ">>>" | "[" | "]" | "@" | "." | "," | "?" | "&"
            ),
            _ => false,
        };
        if include {
            h -= 1;
            continue;
        }
        // Jump over balanced annotation arguments.
        if prev.kind == TokenKind::Operator && prev.text == ")" {
            if let Some(open) = paren_match[h - 1] {
                // Only jump when this really looks like annotation args:
                // something before the '(' we can keep walking from.
                if open > 0 {
                    h = open;
                    continue;
                }
            }
        }
        break;
    }
    h
}

fn match_brackets(tokens: &[Token], open: &str, close: &str) -> Result<Vec<Option<usize>>> {
    let mut map = vec![None; tokens.len()];
    let mut stack = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Operator {
            continue;
        }
        if tok.text == open {
            stack.push(i);
        } else if tok.text == close {
            let Some(j) = stack.pop() else {
                return Err(Error::Parse {
                    offset: tok.span.start,
                    message: format!("unbalanced '{close}'"),
                });
            };
            map[i] = Some(j);
            map[j] = Some(i);
        }
    }
    if let Some(&j) = stack.last() {
        return Err(Error::Parse {
            offset: tokens[j].span.start,
            message: format!("unbalanced '{open}'"),
        });
    }
    Ok(map)
}

/// Find the comment documenting a function whose header starts at byte
/// `header_start`. The comment must end at most one newline before the
/// header (no intervening blank line). Consecutive `//` lines merge into one
/// comment. Returns cleaned text.
pub fn associated_comment(
    comments: &[CommentToken],
    source: &str,
    header_start: usize,
) -> Option<String> {
    let mut idx = None;
    for (i, c) in comments.iter().enumerate() {
        if c.span.end <= header_start {
            idx = Some(i);
        } else {
            break;
        }
    }
    let last = idx?;
    if !gap_is_tight(&source[comments[last].span.end..header_start]) {
        return None;
    }
    let mut first = last;
    if comments[last].line {
        while first > 0
            && comments[first - 1].line
            && gap_is_tight(&source[comments[first - 1].span.end..comments[first].span.start])
        {
            first -= 1;
        }
    }
    let cleaned: Vec<String> = comments[first..=last]
        .iter()
        .map(|c| lexer::clean_comment_text(&c.raw))
        .filter(|s| !s.is_empty())
        .collect();
    if cleaned.is_empty() {
        None
    } else {
        Some(cleaned.join("\n"))
    }
}

/// Whitespace-only with at most one newline: the comment still "touches" the
/// thing below it.
fn gap_is_tight(gap: &str) -> bool {
    gap.chars().all(char::is_whitespace) && gap.chars().filter(|&c| c == '\n').count() <= 1
}
