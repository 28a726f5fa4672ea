//! Shared tokenizer for the poset, name and formula languages.

use std::fmt;

use crate::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// `[A-Za-z0-9_]+`, or a bracketed identifier such as `[a,b]`.
    Word(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCT: &[char] = &['{', '}', '(', ')', ';', ',', '<', '=', '!', '∅'];

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut w = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                w.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Spanned { tok: Tok::Word(w), line: start_line, col: start_col });
        } else if c == '[' {
            let mut w = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(SyntaxError::new(start_line, start_col, "unterminated `[`"));
                };
                if d == '\n' {
                    return Err(SyntaxError::new(start_line, start_col, "unterminated `[`"));
                }
                if !d.is_whitespace() {
                    w.push(d);
                }
                i += 1;
                col += 1;
                if d == ']' {
                    break;
                }
            }
            out.push(Spanned { tok: Tok::Word(w), line: start_line, col: start_col });
        } else if PUNCT.contains(&c) {
            out.push(Spanned { tok: Tok::Punct(c), line, col });
            i += 1;
            col += 1;
        } else {
            return Err(SyntaxError::new(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Cursor over a token stream with line/column aware errors.
pub struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(text)?;
        let lines = text.lines().count().max(1);
        let last_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        Ok(Cursor { toks, pos: 0, end: (lines, last_col) })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|s| &s.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.col)).unwrap_or(self.end)
    }

    pub fn error(&self, msg: impl Into<String>) -> SyntaxError {
        let (l, c) = self.here();
        SyntaxError::new(l, c, msg)
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub fn expect_word(&mut self, w: &str) -> Result<(), SyntaxError> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    pub fn word(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn unexpected(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {t}")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }
}
