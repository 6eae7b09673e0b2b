//! Tokenizer with Python-style layout: NEWLINE ends a logical line, INDENT and
//! DEDENT bracket indented blocks. Newlines inside brackets, and after a line
//! ending in a comma, continue the logical line.

use std::fmt;

use super::{LangError, Pos};

pub const KEYWORDS: &[&str] = &[
    "new", "at", "on", "facing", "toward", "directly", "left", "right", "ahead", "behind", "above",
    "below", "of", "by", "with", "deg", "require", "always", "eventually", "next", "until", "can",
    "see", "in", "distance", "to", "mutate", "ego", "kind", "behavior", "not", "and", "or",
    "offset", "visible", "from", "self", "true", "false",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    String,
    Operator,
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source text; empty for INDENT/DEDENT/EOF.
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
    /// Byte offset of the lexeme in the source.
    pub offset: usize,
}

impl Token {
    pub fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    /// Position just past the lexeme (single-line lexemes only).
    pub fn end_pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column + self.lexeme.chars().count(),
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == kw
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Operator && self.lexeme == op
    }

    /// Human-readable description for diagnostics.
    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Newline => "end of line".into(),
            TokenKind::Indent => "indent".into(),
            TokenKind::Dedent => "dedent".into(),
            TokenKind::Eof => "end of input".into(),
            TokenKind::Keyword => format!("keyword '{}'", self.lexeme),
            _ => format!("'{}'", self.lexeme),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({:?})@{}:{}", self.kind, self.lexeme, self.line, self.column)
    }
}

const OPERATORS: &[&str] = &["<=", ">=", "==", "!=", "(", ")", ",", ".", "=", "+", "-", "*", "/", "<", ">", ":"];

struct Lexer<'a> {
    src: &'a str,
    /// Byte offset.
    at: usize,
    line: usize,
    column: usize,
    tokens: Vec<Token>,
    indents: Vec<usize>,
    depth: usize,
    /// Position of each open bracket, for unterminated-bracket errors.
    open_brackets: Vec<Pos>,
    at_line_start: bool,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LangError> {
    let mut lx = Lexer {
        src: source,
        at: 0,
        line: 1,
        column: 1,
        tokens: Vec::new(),
        indents: vec![0],
        depth: 0,
        open_brackets: Vec::new(),
        at_line_start: true,
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.at..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.at..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.at += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> LangError {
        LangError::Lex {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, pos: Pos) {
        self.tokens.push(Token {
            kind,
            lexeme: self.src[start..self.at].to_string(),
            line: pos.line,
            column: pos.column,
            offset: start,
        });
    }

    fn push_synthetic(&mut self, kind: TokenKind, pos: Pos, offset: usize) {
        self.tokens.push(Token {
            kind,
            lexeme: String::new(),
            line: pos.line,
            column: pos.column,
            offset,
        });
    }

    fn last_significant(&self) -> Option<&Token> {
        self.tokens.last()
    }

    fn continues_line(&self) -> bool {
        self.depth > 0
            || matches!(self.last_significant(), Some(t) if t.is_op(","))
    }

    fn run(&mut self) -> Result<(), LangError> {
        loop {
            if self.at_line_start && self.depth == 0 {
                self.at_line_start = false;
                if self.handle_indentation()? {
                    continue;
                }
            }
            let Some(c) = self.peek() else { break };
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '#' => {
                    while matches!(self.peek(), Some(c) if c != '\n') {
                        self.bump();
                    }
                }
                '\n' => {
                    let (start, pos) = (self.at, self.pos());
                    self.bump();
                    let blank = self.last_significant().is_none()
                        || matches!(self.last_significant(), Some(t) if t.kind == TokenKind::Newline || t.kind == TokenKind::Indent || t.kind == TokenKind::Dedent);
                    if self.continues_line() {
                        continue;
                    }
                    if !blank {
                        self.push(TokenKind::Newline, start, pos);
                    }
                    self.at_line_start = true;
                }
                '"' | '\'' => self.string(c)?,
                c if c.is_ascii_digit() || (c == '.' && matches!(self.peek2(), Some(d) if d.is_ascii_digit())) => {
                    self.number()?
                }
                c if c.is_alphabetic() || c == '_' => {
                    let (start, pos) = (self.at, self.pos());
                    while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
                        self.bump();
                    }
                    let word = &self.src[start..self.at];
                    let kind = if KEYWORDS.contains(&word) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Identifier
                    };
                    self.push(kind, start, pos);
                }
                _ => self.operator()?,
            }
        }
        let end = self.pos();
        if let Some(open) = self.open_brackets.first() {
            return Err(self.unclosed(*open));
        }
        if matches!(self.tokens.last(), Some(t) if t.kind != TokenKind::Newline && t.kind != TokenKind::Dedent && t.kind != TokenKind::Indent)
        {
            let last = self.tokens.last().unwrap();
            let p = last.end_pos();
            let off = last.offset + last.lexeme.len();
            self.push_synthetic(TokenKind::Newline, p, off);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push_synthetic(TokenKind::Dedent, end, self.at);
        }
        // EOF sits just past the last real token so errors at end of input point
        // at the last line with content.
        let (eof_pos, eof_off) = match self.tokens.iter().rev().find(|t| !t.lexeme.is_empty() && t.kind != TokenKind::Newline) {
            Some(t) => (t.end_pos(), t.offset + t.lexeme.len()),
            None => (Pos { line: 1, column: 1 }, 0),
        };
        self.push_synthetic(TokenKind::Eof, eof_pos, eof_off);
        Ok(())
    }

    /// Error for a bracket still open at end of input. Reported at the end of the
    /// last line before one that looks like a new statement (indented no deeper
    /// than the bracket's line and not following a comma, or following a block
    /// header's colon), since that is where the
    /// closing bracket went missing.
    fn unclosed(&self, open: Pos) -> LangError {
        let lines: Vec<&str> = self.src.lines().collect();
        let indent = |l: &str| l.len() - l.trim_start().len();
        let meaningful = |l: &str| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        };
        let base = indent(lines[open.line - 1]);
        let mut prev = open.line - 1;
        for (k, line) in lines.iter().enumerate().skip(open.line) {
            if !meaningful(line) {
                continue;
            }
            let prev_code = lines[prev].split('#').next().unwrap_or("").trim_end();
            if (indent(line) <= base && !prev_code.ends_with(',')) || prev_code.ends_with(':') {
                let column = prev_code.chars().count() + 1;
                return self.error(Pos { line: prev + 1, column }, format!("unclosed '(' opened at {}:{}", open.line, open.column));
            }
            prev = k;
        }
        let last = self.tokens.iter().rev().find(|t| !t.lexeme.is_empty()).map(|t| t.end_pos()).unwrap_or(open);
        self.error(last, format!("unclosed '(' opened at {}:{}", open.line, open.column))
    }

    /// Measures leading whitespace of a new line and emits INDENT/DEDENT.
    /// Returns true when the whole line was blank or a comment.
    fn handle_indentation(&mut self) -> Result<bool, LangError> {
        let mut width = 0;
        while let Some(c) = self.peek() {
            match c {
                ' ' => width += 1,
                '\t' => width = (width / 8 + 1) * 8,
                '\r' => {}
                _ => break,
            }
            self.bump();
        }
        match self.peek() {
            None => return Ok(false),
            Some('\n') => {
                self.bump();
                self.at_line_start = true;
                return Ok(true);
            }
            Some('#') => {
                while matches!(self.peek(), Some(c) if c != '\n') {
                    self.bump();
                }
                if self.peek().is_some() {
                    self.bump();
                    self.at_line_start = true;
                }
                return Ok(true);
            }
            _ => {}
        }
        let pos = self.pos();
        let current = *self.indents.last().unwrap();
        if width > current {
            self.indents.push(width);
            self.push_synthetic(TokenKind::Indent, pos, self.at);
        } else {
            while width < *self.indents.last().unwrap() {
                self.indents.pop();
                self.push_synthetic(TokenKind::Dedent, pos, self.at);
            }
            if width != *self.indents.last().unwrap() {
                return Err(self.error(pos, "unindent does not match any outer indentation level"));
            }
        }
        Ok(false)
    }

    fn string(&mut self, quote: char) -> Result<(), LangError> {
        let (start, pos) = (self.at, self.pos());
        self.bump();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.error(pos, "unterminated string literal")),
                Some('\\') => {
                    if self.bump().is_none() {
                        return Err(self.error(pos, "unterminated string literal"));
                    }
                }
                Some(c) if c == quote => break,
                Some(_) => {}
            }
        }
        self.push(TokenKind::String, start, pos);
        Ok(())
    }

    fn number(&mut self) -> Result<(), LangError> {
        let (start, pos) = (self.at, self.pos());
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek() == Some('.') && matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
            self.bump();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.bump();
            }
        } else if self.peek() == Some('.') && !matches!(self.peek2(), Some(c) if c.is_alphabetic() || c == '_') {
            // "1." is a complete number.
            self.bump();
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let mark = (self.at, self.line, self.column);
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                (self.at, self.line, self.column) = mark;
            }
        }
        if matches!(self.peek(), Some(c) if c.is_alphabetic() || c == '_') {
            // `45deg` is accepted as `45 deg`: stop here and let the word lex separately.
        }
        self.push(TokenKind::Number, start, pos);
        Ok(())
    }

    fn operator(&mut self) -> Result<(), LangError> {
        let (start, pos) = (self.at, self.pos());
        let rest = &self.src[self.at..];
        let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) else {
            let c = self.peek().unwrap();
            return Err(self.error(pos, format!("illegal character {c:?}")));
        };
        for _ in 0..op.len() {
            self.bump();
        }
        match *op {
            "(" => {
                self.depth += 1;
                self.open_brackets.push(pos);
            }
            ")" => {
                if self.depth == 0 {
                    return Err(self.error(pos, "unmatched ')'"));
                }
                self.depth -= 1;
                self.open_brackets.pop();
            }
            _ => {}
        }
        self.push(TokenKind::Operator, start, pos);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds_and_lexemes(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn fig1_first_line() {
        use TokenKind::*;
        let toks = kinds_and_lexemes("ego = new Ball at (0,0,1.25)");
        let expect: Vec<(TokenKind, &str)> = vec![
            (Keyword, "ego"), (Operator, "="), (Keyword, "new"), (Identifier, "Ball"), (Keyword, "at"),
            (Operator, "("), (Number, "0"), (Operator, ","), (Number, "0"), (Operator, ","),
            (Number, "1.25"), (Operator, ")"), (Newline, ""), (Eof, ""),
        ];
        assert_eq!(toks, expect.into_iter().map(|(k, s)| (k, s.to_string())).collect::<Vec<_>>());
    }

    #[test]
    fn empty_input_is_just_eof() {
        let toks = tokenize("").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Eof);
    }

    #[test]
    fn degrees() {
        let toks = kinds_and_lexemes("45 deg");
        assert_eq!(toks[0], (TokenKind::Number, "45".into()));
        assert_eq!(toks[1], (TokenKind::Keyword, "deg".into()));
    }

    #[test]
    fn unterminated_string_points_at_quote() {
        let err = tokenize("x = 1\ny = \"abc\n").unwrap_err();
        assert_eq!(err, LangError::Lex { line: 2, column: 5, message: "unterminated string literal".into() });
    }

    #[test]
    fn illegal_character_is_located() {
        let err = tokenize("a = 3 $ 4").unwrap_err();
        assert!(matches!(err, LangError::Lex { line: 1, column: 7, .. }), "{err:?}");
    }

    #[test]
    fn indentation_blocks() {
        use TokenKind::*;
        let toks: Vec<TokenKind> = tokenize("kind A(Object):\n    width: 2\n\n    height: 3\nx = 1\n")
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect();
        assert_eq!(
            toks,
            vec![
                Keyword, Identifier, Operator, Identifier, Operator, Operator, Newline, Indent, Identifier,
                Operator, Number, Newline, Identifier, Operator, Number, Newline, Dedent, Identifier, Operator,
                Number, Newline, Eof
            ]
        );
    }

    #[test]
    fn trailing_comma_and_brackets_continue_lines() {
        let src = "a = new Object above b by 1,\n    facing (1,\n 2, 0)\n";
        let toks = tokenize(src).unwrap();
        let newlines = toks.iter().filter(|t| t.kind == TokenKind::Newline).count();
        assert_eq!(newlines, 1);
        assert!(toks.iter().all(|t| t.kind != TokenKind::Indent));
    }

    #[test]
    fn lexemes_reproduce_source_slices() {
        let src = "objectA = new Object at (1, 2, 3), facing (45 deg, 0, 90 deg)  # c\nrequire x.y >= 2e-3\n";
        for t in tokenize(src).unwrap() {
            assert_eq!(&src[t.offset..t.offset + t.lexeme.len()], t.lexeme);
        }
    }
}
