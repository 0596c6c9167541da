//! Indentation-aware tokenizer.

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Str(String),
    /// Keyword the subset understands.
    Kw(&'static str),
    /// Keyword of the host language that the subset rejects.
    Reserved(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte range in the source.
    pub span: (usize, usize),
}

/// Keywords the subset understands.
pub const SUPPORTED_KW: &[&str] = &[
    "def", "return", "if", "elif", "else", "while", "for", "in", "and", "or", "not", "True", "False", "None",
];

// longest first so that maximal munch works with a linear scan
const OPS: &[&str] = &[
    "//=", "**=", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "+", "-", "*", "/", "%", "<", ">",
    "=", "(", ")", ",", ":",
];

const UNSUPPORTED_PUNCT: &[(&str, &str)] = &[
    ("->", "return annotations"),
    ("[", "lists and subscripts"),
    ("]", "lists and subscripts"),
    ("{", "dicts and sets"),
    ("}", "dicts and sets"),
    (".", "attribute access"),
    ("@", "decorators"),
    ("&", "bitwise operators"),
    ("|", "bitwise operators"),
    ("^", "bitwise operators"),
    ("~", "bitwise operators"),
    ("<<", "bitwise operators"),
    (">>", "bitwise operators"),
    (";", "multiple statements per line"),
];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    line_start: usize,
    out: Vec<Token>,
    indents: Vec<usize>,
    depth: usize,
}

/// Tokenizes a full source file, producing INDENT/DEDENT/NEWLINE layout
/// tokens. Indentation must be spaces, four per level.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        line_start: 0,
        out: Vec::new(),
        indents: vec![0],
        depth: 0,
    };
    lx.run(true)?;
    Ok(lx.out)
}

/// Tokenizes a single-line fragment without layout tokens (besides EOF).
pub fn tokenize_fragment(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        line_start: 0,
        out: Vec::new(),
        indents: vec![0],
        depth: 0,
    };
    lx.run(false)?;
    Ok(lx.out)
}

impl<'a> Lexer<'a> {
    fn col(&self) -> usize {
        self.src[self.line_start..self.pos].chars().count() + 1
    }

    fn push(&mut self, tok: Tok, start: usize) {
        let col = self.src[self.line_start..start].chars().count() + 1;
        self.out.push(Token {
            tok,
            line: self.line,
            col,
            span: (start, self.pos),
        });
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col(),
            message: msg.into(),
        }
    }

    fn unsupported(&self, what: impl Into<String>) -> ParseError {
        ParseError::Unsupported {
            line: self.line,
            col: self.col(),
            feature: what.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn run(&mut self, layout: bool) -> Result<(), ParseError> {
        let mut at_line_start = layout;
        loop {
            if at_line_start && self.depth == 0 {
                at_line_start = self.handle_indent()?;
                if at_line_start {
                    continue;
                }
            }
            let Some(c) = self.peek() else { break };
            match c {
                ' ' => self.pos += 1,
                '\t' => {
                    if layout {
                        return Err(self.syntax("tabs are not allowed; indent with 4 spaces"));
                    }
                    self.pos += 1;
                }
                '\r' => return Err(self.syntax("line endings must be \\n")),
                '#' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.pos += c.len_utf8();
                    }
                }
                '\\' => return Err(self.unsupported("explicit line continuation")),
                '\n' => {
                    if !layout {
                        return Err(self.syntax("fragment spans several lines"));
                    }
                    let start = self.pos;
                    self.pos += 1;
                    if self.depth == 0 {
                        let last_is_layout = matches!(
                            self.out.last().map(|t| &t.tok),
                            None | Some(Tok::Newline) | Some(Tok::Indent) | Some(Tok::Dedent)
                        );
                        if !last_is_layout {
                            self.push(Tok::Newline, start);
                        }
                        at_line_start = true;
                    }
                    self.line += 1;
                    self.line_start = self.pos;
                }
                '0'..='9' => self.number()?,
                '\'' | '"' => self.string()?,
                c if c.is_ascii_alphabetic() || c == '_' => self.word()?,
                _ => self.punct()?,
            }
        }
        if layout {
            let start = self.pos;
            if !matches!(
                self.out.last().map(|t| &t.tok),
                None | Some(Tok::Newline) | Some(Tok::Dedent)
            ) {
                self.push(Tok::Newline, start);
            }
            while self.indents.len() > 1 {
                self.indents.pop();
                self.push(Tok::Dedent, start);
            }
        }
        let end = self.pos;
        self.push(Tok::Eof, end);
        Ok(())
    }

    /// Measures indentation at the start of a logical line. Returns true when
    /// the line was blank or a comment and has been consumed.
    fn handle_indent(&mut self) -> Result<bool, ParseError> {
        let start = self.pos;
        let mut width = 0;
        while let Some(c) = self.peek() {
            match c {
                ' ' => {
                    width += 1;
                    self.pos += 1;
                }
                '\t' => return Err(self.syntax("tabs are not allowed; indent with 4 spaces")),
                _ => break,
            }
        }
        match self.peek() {
            None => return Ok(false),
            Some('\n') | Some('#') => {
                // blank or comment-only: no layout change
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
                if self.peek() == Some('\n') {
                    self.pos += 1;
                    self.line += 1;
                    self.line_start = self.pos;
                }
                return Ok(true);
            }
            _ => {}
        }
        let current = *self.indents.last().unwrap();
        if width > current {
            if width != current + 4 {
                return Err(ParseError::Syntax {
                    line: self.line,
                    col: 1,
                    message: "expected an indent of exactly 4 spaces".into(),
                });
            }
            self.indents.push(width);
            self.push(Tok::Indent, start);
        } else {
            while width < *self.indents.last().unwrap() {
                self.indents.pop();
                self.push(Tok::Dedent, start);
            }
            if width != *self.indents.last().unwrap() {
                return Err(ParseError::Syntax {
                    line: self.line,
                    col: 1,
                    message: "unindent does not match any outer indentation level".into(),
                });
            }
        }
        Ok(false)
    }

    fn number(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if let Some(c) = self.peek() {
            if c == '.' || c == 'e' || c == 'E' || c == 'j' {
                return Err(self.unsupported("floating point and complex literals"));
            }
            if c == 'x' || c == 'o' || c == 'b' || c == '_' {
                return Err(self.unsupported("non-decimal or grouped integer literals"));
            }
            if c.is_ascii_alphabetic() {
                return Err(self.syntax("invalid decimal literal"));
            }
        }
        let text = &self.src[start..self.pos];
        if text.len() > 1 && text.starts_with('0') {
            return Err(self.syntax("leading zeros in decimal integer literals are not permitted"));
        }
        let value: i64 = text
            .parse()
            .map_err(|_| self.unsupported("integer literal outside the 64-bit range"))?;
        self.push(Tok::Int(value), start);
        Ok(())
    }

    fn string(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let quote = self.peek().unwrap();
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        if self.src[self.pos..].starts_with(&triple) {
            return Err(self.unsupported("triple-quoted strings"));
        }
        self.pos += 1;
        let mut value = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.syntax("unterminated string literal"));
            };
            self.pos += c.len_utf8();
            match c {
                '\n' => return Err(self.syntax("unterminated string literal")),
                '\\' => {
                    let Some(e) = self.peek() else {
                        return Err(self.syntax("unterminated string literal"));
                    };
                    self.pos += e.len_utf8();
                    value.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        '\\' => '\\',
                        '\'' => '\'',
                        '"' => '"',
                        _ => return Err(self.unsupported(format!("string escape \\{e}"))),
                    });
                }
                c if c == quote => break,
                c => value.push(c),
            }
        }
        self.push(Tok::Str(value), start);
        Ok(())
    }

    fn word(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        if matches!(self.peek(), Some('\'') | Some('"'))
            && matches!(
                text.to_ascii_lowercase().as_str(),
                "f" | "r" | "b" | "u" | "rb" | "br" | "fr" | "rf"
            )
        {
            return Err(self.unsupported("prefixed string literals"));
        }
        if let Some(c) = self.peek() {
            if !c.is_ascii() && c.is_alphanumeric() {
                return Err(self.unsupported("non-ASCII identifiers"));
            }
        }
        let tok = if let Some(kw) = SUPPORTED_KW.iter().find(|k| **k == text) {
            Tok::Kw(kw)
        } else if super::ast::is_keyword(text) {
            Tok::Reserved(text.to_string())
        } else {
            Tok::Name(text.to_string())
        };
        self.push(tok, start);
        Ok(())
    }

    fn punct(&mut self) -> Result<(), ParseError> {
        let rest = &self.src[self.pos..];
        for (p, what) in UNSUPPORTED_PUNCT {
            if rest.starts_with(p) && !OPS.iter().any(|op| op.len() > p.len() && rest.starts_with(op)) {
                return Err(self.unsupported(*what));
            }
        }
        if let Some(op) = OPS.iter().find(|op| rest.starts_with(**op)) {
            let start = self.pos;
            self.pos += op.len();
            match *op {
                "(" => self.depth += 1,
                ")" => self.depth = self.depth.saturating_sub(1),
                _ => {}
            }
            self.push(Tok::Op(op), start);
            return Ok(());
        }
        let c = self.peek().unwrap();
        if !c.is_ascii() {
            return Err(self.unsupported(format!("character {c:?}")));
        }
        Err(self.syntax(format!("invalid character {c:?}")))
    }
}
