use super::{ParseError, ParseErrorKind};
use crate::model::RESERVED_PREFIX;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Directive(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    If,
    Query,
    Minus,
    Plus,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Directive(s) => format!("`#{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::If => ":-",
            Tok::Query => "?-",
            Tok::Minus => "-",
            Tok::Plus => "+",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            _ => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    src: &'a str,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: src.chars().collect(), pos: 0, line: 1, column: 1, src };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '%' {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let err = |message: String| ParseError::new(ParseErrorKind::Syntax, cur.src, line, column, message);
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, line, column });
            return Ok(out);
        };
        let tok = if c.is_ascii_lowercase() {
            Tok::Ident(cur.take_while(is_ident_char))
        } else if c.is_ascii_uppercase() || c == '_' {
            let s = cur.take_while(is_ident_char);
            if s.starts_with(RESERVED_PREFIX) {
                return Err(err(format!("identifier `{s}` uses the reserved prefix `{RESERVED_PREFIX}`")));
            }
            Tok::Var(s)
        } else if c.is_ascii_digit() {
            let mut s = cur.take_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                s.push('.');
                s.push_str(&cur.take_while(|c| c.is_ascii_digit()));
            }
            if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
                return Err(err(format!("malformed number starting with `{s}`")));
            }
            Tok::Number(s)
        } else {
            cur.bump();
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '-' => Tok::Minus,
                '+' => Tok::Plus,
                '/' => Tok::Slash,
                ':' if cur.peek() == Some('-') => {
                    cur.bump();
                    Tok::If
                }
                '?' if cur.peek() == Some('-') => {
                    cur.bump();
                    Tok::Query
                }
                '<' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Le
                }
                '<' => Tok::Lt,
                '>' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Ge
                }
                '>' => Tok::Gt,
                '=' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::EqEq
                }
                '!' if cur.peek() == Some('=') => {
                    cur.bump();
                    Tok::Ne
                }
                '#' => {
                    let name = cur.take_while(is_ident_char);
                    if name.is_empty() {
                        return Err(err("expected a directive name after `#`".into()));
                    }
                    Tok::Directive(name)
                }
                other => return Err(err(format!("unexpected character `{other}`"))),
            }
        };
        out.push(Token { tok, line, column });
    }
}
