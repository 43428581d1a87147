//! Text syntax for conditions and consequences.
//!
//! ```text
//! cond  := name/N | top/N | bot/N | (and cond cond+) | (or cond cond+) | (not cond)
//! cons  := T<1-7>(cond) | top/N | bot/N | (and cons cons+) | (or cons cons+) | (not cons)
//! ```
//!
//! n-ary `and`/`or` fold to the left. The output of `Display` parses back to
//! the same term.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::condition::Condition;
use crate::positions::{Consequence, Position};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token<'a> {
    Open,
    Close,
    Symbol(&'a str),
}

fn tokenize(input: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in input.char_indices() {
        let boundary = ch.is_whitespace() || ch == '(' || ch == ')';
        if boundary {
            if let Some(s) = start.take() {
                out.push((s, Token::Symbol(&input[s..i])));
            }
            match ch {
                '(' => out.push((i, Token::Open)),
                ')' => out.push((i, Token::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Token::Symbol(&input[s..])));
    }
    out
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { input, tokens: tokenize(input), pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let position = self.tokens.get(self.pos).map_or(self.input.len(), |t| t.0);
        Error::Parse { input: self.input.to_string(), position, message: message.into() }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("expected `)`")),
        }
    }

    fn finish<T>(&self, value: T) -> Result<T> {
        if self.pos == self.tokens.len() {
            Ok(value)
        } else {
            Err(self.error("trailing input"))
        }
    }

    fn leaf(&self, symbol: &str) -> Result<Condition> {
        let (name, arity) = symbol
            .rsplit_once('/')
            .ok_or_else(|| self.error(alloc::format!("`{symbol}` needs an arity, e.g. `{symbol}/2`")))?;
        let arity: usize = arity.parse().map_err(|_| self.error(alloc::format!("bad arity in `{symbol}`")))?;
        if name.is_empty() {
            return Err(self.error("empty atom name"));
        }
        Ok(match name {
            "top" => Condition::top(arity),
            "bot" => Condition::bottom(arity),
            _ => Condition::atom(name, arity),
        })
    }

    /// Parses `(op x y ...)` after the `(` has been consumed.
    fn compound<T>(
        &mut self,
        item: fn(&mut Self) -> Result<T>,
        and: fn(T, T) -> Result<T>,
        or: fn(T, T) -> Result<T>,
        not: fn(T) -> T,
    ) -> Result<T> {
        let op = match self.next() {
            Some(Token::Symbol(s)) => s,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected `and`, `or` or `not`"));
            }
        };
        let mut args = Vec::new();
        while !matches!(self.peek(), Some(Token::Close) | None) {
            args.push(item(self)?);
        }
        self.expect_close()?;
        match (op, args.len()) {
            ("not", 1) => Ok(not(args.pop().expect("one argument"))),
            ("not", _) => Err(self.error("`not` takes one argument")),
            ("and" | "or", n) if n >= 2 => {
                let fold = if op == "and" { and } else { or };
                let mut it = args.into_iter();
                let first = it.next().expect("two arguments");
                it.try_fold(first, fold)
            }
            ("and" | "or", _) => Err(self.error(alloc::format!("`{op}` takes at least two arguments"))),
            _ => Err(self.error(alloc::format!("unknown operator `{op}`"))),
        }
    }

    fn condition(&mut self) -> Result<Condition> {
        match self.next() {
            Some(Token::Symbol(s)) => self.leaf(s),
            Some(Token::Open) => self.compound(Self::condition, Condition::try_and, Condition::try_or, Condition::not),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a condition"))
            }
        }
    }

    fn consequence(&mut self) -> Result<Consequence> {
        match self.next() {
            Some(Token::Symbol(s)) => {
                if let Some(position) = typed_prefix(s) {
                    if self.next() != Some(Token::Open) {
                        self.pos -= 1;
                        return Err(self.error("expected `(` after position type"));
                    }
                    let base = self.condition()?;
                    self.expect_close()?;
                    return Ok(Consequence::typed(position, base));
                }
                match self.leaf(s)? {
                    Condition::Top(n) => Ok(Consequence::Top(n)),
                    Condition::Bottom(n) => Ok(Consequence::Bottom(n)),
                    _ => {
                        self.pos -= 1;
                        Err(self.error(alloc::format!("`{s}` is not a consequence; wrap it as `T<i>({s})`")))
                    }
                }
            }
            Some(Token::Open) => self.compound(
                Self::consequence,
                |a, b| Ok(Consequence::and(a, b)),
                |a, b| Ok(Consequence::or(a, b)),
                Consequence::not,
            ),
            _ => {
                self.pos -= 1;
                Err(self.error("expected a consequence"))
            }
        }
    }
}

fn typed_prefix(symbol: &str) -> Option<Position> {
    let digits = symbol.strip_prefix('T')?;
    let i: u8 = digits.parse().ok()?;
    Position::from_index(i).ok()
}

pub fn parse_condition(input: &str) -> Result<Condition> {
    let mut p = Parser::new(input);
    let c = p.condition()?;
    p.finish(c)
}

pub fn parse_consequence(input: &str) -> Result<Consequence> {
    let mut p = Parser::new(input);
    let c = p.consequence()?;
    p.finish(c)
}
