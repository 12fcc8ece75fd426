//! Text format for knowledge bases.
//!
//! One item per line, `#` starts a comment:
//!
//! ```text
//! decl       := "var" NAME (":" VALUE ("," VALUE)+)?    # no domain => binary {true,false}
//! constraint := "(" formula ("|" formula)? ")" "[" PROB "]"
//! formula    := disj
//! disj       := conj ("||" conj)*
//! conj       := unary ("&&" unary)*
//! unary      := "!" unary | "(" formula ")" | atom
//! atom       := NAME | NAME "=" VALUE | "top"
//! PROB       := decimal literal in [0, 1]
//! ```
//!
//! A single `|` appears only as the conditional separator at constraint top
//! level; disjunction is `||`, negation `!`. A bare NAME abbreviates
//! `NAME=true` for binary variables. Variables must be declared before use
//! unless [`ParseOptions::auto_declare`] is set, which declares unknown names
//! as binary on first use.

use std::collections::HashMap;

use crate::kb::{Constraint, KnowledgeBase};
use crate::logic::{Formula, Signature, Variable, DEFAULT_WORLD_CAP};
use crate::{Error, Result};

/// Parser configuration.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Auto-declare unknown variables as binary instead of erroring.
    pub auto_declare: bool,
    /// World cap handed to [`Signature::with_cap`].
    pub world_cap: u64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            auto_declare: false,
            world_cap: DEFAULT_WORLD_CAP,
        }
    }
}

/// Parses a knowledge base with default options.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase> {
    parse_kb_with(text, &ParseOptions::default())
}

/// Parses a knowledge base from the text format.
pub fn parse_kb_with(text: &str, opts: &ParseOptions) -> Result<KnowledgeBase> {
    let mut p = Parser {
        vars: Vec::new(),
        lookup: HashMap::new(),
        constraints: Vec::new(),
        opts,
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(line, lineno + 1)?;
        p.line(&tokens, lineno + 1)?;
    }
    p.finish()
}

const RESERVED: &[&str] = &["var", "top"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Pipe,
    OrOr,
    AndAnd,
    Bang,
    Colon,
    Comma,
    Equals,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: col,
        message: message.into(),
    }
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let tok = match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '=' => Tok::Equals,
            '!' => Tok::Bang,
            '|' => {
                if chars.get(i + 1) == Some(&'|') {
                    i += 1;
                    Tok::OrOr
                } else {
                    Tok::Pipe
                }
            }
            '&' => {
                if chars.get(i + 1) == Some(&'&') {
                    i += 1;
                    Tok::AndAnd
                } else {
                    return Err(err(lineno, col, "expected '&&'"));
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    col,
                });
                continue;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Number(chars[start..i].iter().collect()),
                    col,
                });
                continue;
            }
            _ => return Err(err(lineno, col, format!("unexpected character '{c}'"))),
        };
        out.push(Spanned { tok, col });
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    vars: Vec<Variable>,
    lookup: HashMap<String, usize>,
    /// Raw constraints with source lines; resolved formulas use variable
    /// indices that stay valid because variables are only appended.
    constraints: Vec<(RawConstraint, usize)>,
    opts: &'a ParseOptions,
}

struct RawConstraint {
    consequent: Formula,
    antecedent: Formula,
    prob: f64,
}

struct Cursor<'t> {
    toks: &'t [Spanned],
    pos: usize,
    line: usize,
}

impl<'t> Cursor<'t> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.col)
            .unwrap_or_else(|| self.toks.last().map(|s| s.col + 1).unwrap_or(1))
    }

    fn next(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let (line, col) = (self.line, self.col());
        match self.next() {
            Some(s) if s.tok == tok => Ok(()),
            _ => Err(err(line, col, format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos == self.toks.len()
    }
}

impl Parser<'_> {
    fn line(&mut self, tokens: &[Spanned], lineno: usize) -> Result<()> {
        let mut cur = Cursor {
            toks: tokens,
            pos: 0,
            line: lineno,
        };
        if cur.peek() == Some(&Tok::Ident("var".to_owned())) {
            cur.next();
            self.declaration(&mut cur)?;
        } else {
            self.constraint(&mut cur)?;
        }
        if !cur.at_end() {
            return Err(err(lineno, cur.col(), "trailing input after item"));
        }
        Ok(())
    }

    fn declaration(&mut self, cur: &mut Cursor) -> Result<()> {
        let (line, col) = (cur.line, cur.col());
        let name = match cur.next() {
            Some(Spanned {
                tok: Tok::Ident(n), ..
            }) => n.clone(),
            _ => return Err(err(line, col, "expected variable name after 'var'")),
        };
        if RESERVED.contains(&name.as_str()) {
            return Err(err(line, col, format!("'{name}' is a reserved word")));
        }
        if self.lookup.contains_key(&name) {
            return Err(err(line, col, format!("variable '{name}' declared twice")));
        }
        let var = if cur.peek() == Some(&Tok::Colon) {
            cur.next();
            let mut values = vec![self.value_ident(cur)?];
            cur.expect(Tok::Comma, "',' (a domain needs at least 2 values)")?;
            values.push(self.value_ident(cur)?);
            while cur.peek() == Some(&Tok::Comma) {
                cur.next();
                values.push(self.value_ident(cur)?);
            }
            for (i, v) in values.iter().enumerate() {
                if values[..i].contains(v) {
                    return Err(err(
                        cur.line,
                        col,
                        format!("duplicate value '{v}' in domain of '{name}'"),
                    ));
                }
            }
            Variable::new(name.clone(), values)
        } else {
            Variable::binary(name.clone())
        };
        self.lookup.insert(name, self.vars.len());
        self.vars.push(var);
        Ok(())
    }

    fn value_ident(&self, cur: &mut Cursor) -> Result<String> {
        let (line, col) = (cur.line, cur.col());
        match cur.next() {
            Some(Spanned {
                tok: Tok::Ident(n), ..
            }) => Ok(n.clone()),
            _ => Err(err(line, col, "expected a domain value identifier")),
        }
    }

    fn constraint(&mut self, cur: &mut Cursor) -> Result<()> {
        let lineno = cur.line;
        cur.expect(Tok::LParen, "'(' to open a constraint")?;
        let consequent = self.formula(cur)?;
        let antecedent = if cur.peek() == Some(&Tok::Pipe) {
            cur.next();
            self.formula(cur)?
        } else {
            Formula::Top
        };
        cur.expect(Tok::RParen, "')' to close the conditional")?;
        cur.expect(Tok::LBracket, "'[' before the probability")?;
        let (line, col) = (cur.line, cur.col());
        let prob = match cur.next() {
            Some(Spanned {
                tok: Tok::Number(n),
                ..
            }) => n
                .parse::<f64>()
                .map_err(|_| err(line, col, format!("malformed probability '{n}'")))?,
            _ => return Err(err(line, col, "expected a probability literal")),
        };
        if !(0.0..=1.0).contains(&prob) {
            return Err(err(
                line,
                col,
                format!("probability {prob} is outside [0,1]"),
            ));
        }
        cur.expect(Tok::RBracket, "']' after the probability")?;
        self.constraints.push((
            RawConstraint {
                consequent,
                antecedent,
                prob,
            },
            lineno,
        ));
        Ok(())
    }

    fn formula(&mut self, cur: &mut Cursor) -> Result<Formula> {
        let mut f = self.conjunction(cur)?;
        while cur.peek() == Some(&Tok::OrOr) {
            cur.next();
            let rhs = self.conjunction(cur)?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conjunction(&mut self, cur: &mut Cursor) -> Result<Formula> {
        let mut f = self.unary(cur)?;
        while cur.peek() == Some(&Tok::AndAnd) {
            cur.next();
            let rhs = self.unary(cur)?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self, cur: &mut Cursor) -> Result<Formula> {
        let (line, col) = (cur.line, cur.col());
        match cur.next().map(|s| s.tok.clone()) {
            Some(Tok::Bang) => Ok(Formula::not(self.unary(cur)?)),
            Some(Tok::LParen) => {
                let f = self.formula(cur)?;
                cur.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) if name == "top" => Ok(Formula::Top),
            Some(Tok::Ident(name)) => self.atom(cur, name, line, col),
            _ => Err(err(line, col, "expected a formula")),
        }
    }

    fn atom(&mut self, cur: &mut Cursor, name: String, line: usize, col: usize) -> Result<Formula> {
        if name == "var" {
            return Err(err(line, col, "'var' is a reserved word"));
        }
        let explicit_value = if cur.peek() == Some(&Tok::Equals) {
            cur.next();
            Some(self.value_ident(cur)?)
        } else {
            None
        };
        let var = match self.lookup.get(&name) {
            Some(&i) => i,
            None => {
                let auto_ok = self.opts.auto_declare
                    && matches!(
                        explicit_value.as_deref(),
                        None | Some("true") | Some("false")
                    );
                if !auto_ok {
                    return Err(err(line, col, format!("unknown variable '{name}'")));
                }
                let i = self.vars.len();
                self.lookup.insert(name.clone(), i);
                self.vars.push(Variable::binary(name.clone()));
                i
            }
        };
        match explicit_value {
            Some(value) => match self.vars[var].value_index(&value) {
                Some(v) => Ok(Formula::Lit { var, value: v }),
                None => Err(err(
                    line,
                    col,
                    format!("unknown value '{value}' for variable '{name}'"),
                )),
            },
            None => {
                if !self.vars[var].is_binary() {
                    return Err(err(
                        line,
                        col,
                        format!("variable '{name}' is not binary; write {name}=VALUE"),
                    ));
                }
                Ok(Formula::Lit { var, value: 0 })
            }
        }
    }

    fn finish(self) -> Result<KnowledgeBase> {
        let signature = Signature::with_cap(self.vars, self.opts.world_cap)?;
        let lines: Vec<usize> = self.constraints.iter().map(|(_, l)| *l).collect();
        let constraints = self
            .constraints
            .into_iter()
            .map(|(raw, _)| Constraint::new(raw.consequent, raw.antecedent, raw.prob))
            .collect();
        KnowledgeBase::new(signature, constraints).map_err(|e| match e {
            // Attach the source line to semantic errors found at KB level.
            Error::SelfInconsistent { index, text } => err(
                lines[index],
                1,
                format!("constraint is not self-consistent: {text}"),
            ),
            other => other,
        })
    }
}
