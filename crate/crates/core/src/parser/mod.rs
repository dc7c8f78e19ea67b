//! Parser and printer for `.lp` rule files and queries.
//!
//! The grammar is Prolog-flavoured: facts `a.`, rules `h :- b1, not b2, -c.`,
//! constraints `:- b.`, `%` line comments, and two directives,
//! `#abducible name/arity.` and `#pattern kind(...).`.

mod lexer;

use std::fmt;

use lexer::{tokenize, Tok, Token};

use crate::model::{sym, Atom, BodyElement, Builtin, CmpOp, Literal, PredicateKey, Program, Rule, Term};
use crate::number::Decimal;
use crate::patterns::{Choice, Danger, PatternDecl};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    MalformedPattern,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, src: &str, line: usize, column: usize, message: String) -> ParseError {
        let snippet = src.lines().nth(line - 1).unwrap_or("").to_string();
        ParseError { kind, line, column, message, snippet }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.snippet.is_empty() {
            write!(f, "\n  {}\n  {:>width$}", self.snippet, "^", width = self.column)?;
        }
        Ok(())
    }
}

/// A conjunctive query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goals: Vec<BodyElement>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("?- ")?;
        for (i, g) in self.goals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str(".")
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> PResult<Self> {
        Ok(Parser { src, toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(kind, self.src, t.line, t.column, message)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Syntax, format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        while *self.peek() != Tok::Eof {
            match self.peek().clone() {
                Tok::Directive(name) => self.directive(&name, &mut program)?,
                _ => program.rules.push(self.rule()?),
            }
        }
        Ok(program)
    }

    fn directive(&mut self, name: &str, program: &mut Program) -> PResult<()> {
        match name {
            "abducible" => {
                self.next();
                let pred = match self.next().tok {
                    Tok::Ident(s) if s != "not" => s,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("a predicate name"));
                    }
                };
                self.expect(Tok::Slash, "`/`")?;
                let arity = match self.peek().clone() {
                    Tok::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => {
                        self.next();
                        n.parse::<usize>().map_err(|_| self.unexpected("an arity"))?
                    }
                    _ => return Err(self.unexpected("an arity")),
                };
                self.expect(Tok::Dot, "`.`")?;
                program.add_abducible(PredicateKey::new(&pred, arity));
                Ok(())
            }
            "pattern" => {
                self.next();
                let decl = self.pattern()?;
                self.expect(Tok::Dot, "`.`")?;
                program.patterns.push(decl);
                Ok(())
            }
            other => Err(self.error_here(ParseErrorKind::Syntax, format!("unknown directive `#{other}`"))),
        }
    }

    fn rule(&mut self) -> PResult<Rule> {
        if *self.peek() == Tok::If {
            self.next();
            let body = self.body()?;
            self.expect(Tok::Dot, "`.`")?;
            return Ok(Rule::constraint(body));
        }
        let head = self.literal()?;
        match self.peek() {
            Tok::Dot => {
                self.next();
                Ok(Rule::fact(head))
            }
            Tok::If => {
                self.next();
                let body = self.body()?;
                self.expect(Tok::Dot, "`.`")?;
                Ok(Rule::new(head, body))
            }
            _ => Err(self.unexpected("`:-` or `.`")),
        }
    }

    fn body(&mut self) -> PResult<Vec<BodyElement>> {
        let mut body = vec![self.body_element()?];
        while *self.peek() == Tok::Comma {
            self.next();
            body.push(self.body_element()?);
        }
        Ok(body)
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return None,
        })
    }

    fn is_not_keyword(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == "not")
            && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Minus | Tok::LParen)
    }

    fn body_element(&mut self) -> PResult<BodyElement> {
        if self.is_not_keyword() {
            self.next();
            return Ok(BodyElement::Naf(self.paren_literal()?));
        }
        match self.peek() {
            Tok::LParen => {
                self.next();
                let e = self.body_element()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Var(_) | Tok::Number(_) | Tok::Plus => self.builtin_from(None),
            Tok::Minus if matches!(self.peek_at(1), Tok::Number(_)) => self.builtin_from(None),
            Tok::Ident(_) | Tok::Minus => {
                let lit = self.literal()?;
                if self.cmp_op().is_some() {
                    if lit.strong_neg || !lit.atom.args.is_empty() {
                        return Err(self.error_here(
                            ParseErrorKind::Syntax,
                            "comparison operands must be constants, numbers or variables".into(),
                        ));
                    }
                    return self.builtin_from(Some(Term::Const(lit.atom.predicate)));
                }
                Ok(BodyElement::Pos(lit))
            }
            _ => Err(self.unexpected("a literal")),
        }
    }

    fn builtin_from(&mut self, lhs: Option<Term>) -> PResult<BodyElement> {
        let lhs = match lhs {
            Some(t) => t,
            None => self.term()?,
        };
        let Some(op) = self.cmp_op() else {
            return Err(self.unexpected("a comparison operator"));
        };
        self.next();
        let rhs = self.term()?;
        Ok(BodyElement::Builtin(Builtin { lhs, op, rhs }))
    }

    fn paren_literal(&mut self) -> PResult<Literal> {
        if *self.peek() == Tok::LParen {
            self.next();
            let l = self.paren_literal()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(l);
        }
        self.literal()
    }

    fn literal(&mut self) -> PResult<Literal> {
        let strong_neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let name = match self.peek().clone() {
            Tok::Ident(s) if s != "not" => {
                self.next();
                s
            }
            _ => return Err(self.unexpected("a predicate name")),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`,` or `)`")?;
        }
        Ok(Literal { atom: Atom { predicate: sym(&name), args }, strong_neg })
    }

    fn number(&mut self, sign: &str) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Number(n) => {
                let d: Decimal = format!("{sign}{n}")
                    .parse()
                    .map_err(|e: crate::number::DecimalError| self.error_here(ParseErrorKind::Syntax, e.to_string()))?;
                self.next();
                Ok(Term::Num(d))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                Ok(Term::Var(sym(&v)))
            }
            Tok::Ident(s) => {
                self.next();
                if *self.peek() == Tok::LParen {
                    self.pos -= 1;
                    return Err(self.error_here(ParseErrorKind::Syntax, "function symbols are not supported".into()));
                }
                Ok(Term::Const(sym(&s)))
            }
            Tok::Number(_) => self.number(""),
            Tok::Minus => {
                self.next();
                self.number("-")
            }
            Tok::Plus => {
                self.next();
                self.number("")
            }
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    // ---- pattern declarations ----

    fn malformed(&self, message: String) -> ParseError {
        self.error_here(ParseErrorKind::MalformedPattern, message)
    }

    fn keyword(&mut self, word: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == word => {
                self.next();
                Ok(())
            }
            _ => Err(self.malformed(format!("expected `{word}(...)`, found {}", self.peek().describe()))),
        }
    }

    fn constant(&mut self) -> PResult<Term> {
        match self.term()? {
            t @ Term::Const(_) => Ok(t),
            other => Err(self.malformed(format!("expected a constant, found `{other}`"))),
        }
    }

    /// `word(Name, Class)` or, with `with_class == false`, `word(Name)`.
    fn choice(&mut self, word: &str) -> PResult<Choice> {
        self.keyword(word)?;
        self.expect(Tok::LParen, "`(`")?;
        let name = self.constant()?;
        self.expect(Tok::Comma, "`,`")?;
        let class = self.constant()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(Choice { name, class })
    }

    fn elem_list(&mut self) -> PResult<Vec<BodyElement>> {
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RBracket {
            out.push(self.body_element()?);
            while *self.peek() == Tok::Comma {
                self.next();
                out.push(self.body_element()?);
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(out)
    }

    fn pre(&mut self) -> PResult<Vec<BodyElement>> {
        self.keyword("pre")?;
        self.expect(Tok::LParen, "`(`")?;
        let l = self.elem_list()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(l)
    }

    fn danger(&mut self) -> PResult<Danger> {
        if *self.peek() == Tok::LParen {
            self.next();
            let group = self.body()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(group);
        }
        Ok(vec![self.body_element()?])
    }

    fn dangers(&mut self) -> PResult<Vec<Danger>> {
        self.keyword("dangers")?;
        self.expect(Tok::LParen, "`(`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RBracket {
            out.push(self.danger()?);
            while *self.peek() == Tok::Comma {
                self.next();
                out.push(self.danger()?);
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    fn comma(&mut self) -> PResult<()> {
        self.expect(Tok::Comma, "`,`")
    }

    fn pattern(&mut self) -> PResult<PatternDecl> {
        let kind = match self.peek().clone() {
            Tok::Ident(k) => k,
            _ => return Err(self.malformed("expected a pattern kind".into())),
        };
        let decl_start = self.pos;
        self.next();
        self.expect(Tok::LParen, "`(`")?;
        let decl = match kind.as_str() {
            "aggressive" | "conservative" => {
                let choice = self.choice("choice")?;
                self.comma()?;
                let pre = self.pre()?;
                self.comma()?;
                let dangers = self.dangers()?;
                if kind == "aggressive" {
                    PatternDecl::Aggressive { choice, pre, dangers }
                } else {
                    PatternDecl::Conservative { choice, pre, dangers }
                }
            }
            "anti" => {
                self.keyword("choice")?;
                self.expect(Tok::LParen, "`(`")?;
                let choice = self.constant()?;
                self.expect(Tok::RParen, "`)`")?;
                self.comma()?;
                let dangers = self.dangers()?;
                PatternDecl::Anti { choice, dangers }
            }
            "prefer" => {
                let first = self.choice("first")?;
                self.comma()?;
                let second = self.choice("second")?;
                self.comma()?;
                let pre = self.pre()?;
                PatternDecl::Prefer { first, second, pre }
            }
            "concomitant" => {
                let trigger = self.choice("trigger")?;
                self.comma()?;
                let with = self.choice("with")?;
                self.comma()?;
                let pre = self.pre()?;
                PatternDecl::Concomitant { trigger, with, pre }
            }
            "indispensable" => {
                let trigger = self.choice("trigger")?;
                self.comma()?;
                let needs = self.choice("needs")?;
                self.comma()?;
                let pre = self.pre()?;
                PatternDecl::Indispensable { trigger, needs, pre }
            }
            "incompatible" => {
                self.expect(Tok::LBracket, "`[`")?;
                let mut choices = vec![self.constant()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    choices.push(self.constant()?);
                }
                self.expect(Tok::RBracket, "`]`")?;
                self.comma()?;
                let class = self.constant()?;
                let pre = if *self.peek() == Tok::Comma {
                    self.next();
                    self.pre()?
                } else {
                    Vec::new()
                };
                PatternDecl::Incompatible { choices, class, pre }
            }
            other => {
                self.pos = decl_start;
                return Err(self.malformed(format!("unknown pattern kind `{other}`")));
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        if let Err(e) = crate::patterns::expand(&decl) {
            self.pos = decl_start;
            return Err(self.malformed(e.to_string()));
        }
        Ok(decl)
    }
}

/// Parses a whole `.lp` source; the first syntax error aborts.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.program()
}

/// Parses `?- g1, not g2.`; both the `?-` prefix and the final `.` are optional.
pub fn parse_query(src: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(src)?;
    if *p.peek() == Tok::Query {
        p.next();
    }
    if matches!(p.peek(), Tok::Eof | Tok::Dot) {
        return Err(p.unexpected("at least one goal"));
    }
    let goals = p.body()?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("`,` or end of query"));
    }
    Ok(Query { goals })
}

/// Parses one literal such as `history(mi, recent)` or `-pregnancy`.
pub fn parse_literal(src: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(src)?;
    let l = p.literal()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of literal"));
    }
    Ok(l)
}

/// Canonical text: abducible directives, then pattern declarations, then rules.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for a in &p.abducibles {
        out.push_str(&format!("#abducible {a}.\n"));
    }
    for d in &p.patterns {
        out.push_str(&format!("{d}\n"));
    }
    for r in &p.rules {
        out.push_str(&format!("{r}\n"));
    }
    out
}
