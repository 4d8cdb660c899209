use std::collections::HashMap;

use thiserror::Error;

use super::{Formula, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("letter {letter} used with arity {first} and {second} (at byte {pos})")]
    ArityMismatch {
        letter: String,
        first: usize,
        second: usize,
        pos: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Arrow,
    Not,
    Box,
    Dia,
    Forall,
    Exists,
    Bot,
    Top,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '~' | '¬' => Some(Tok::Not),
            '→' => Some(Tok::Arrow),
            '□' => Some(Tok::Box),
            '◇' => Some(Tok::Dia),
            '∀' => Some(Tok::Forall),
            '∃' => Some(Tok::Exists),
            '⊥' => Some(Tok::Bot),
            '⊤' => Some(Tok::Top),
            _ => None,
        };
        if let Some(t) = single {
            chars.next();
            out.push((t, pos));
            continue;
        }
        if c == '-' {
            chars.next();
            match chars.next() {
                Some((_, '>')) => out.push((Tok::Arrow, pos)),
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "expected `->`".into(),
                    })
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    name.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            while let Some(&(_, '\'')) = chars.peek() {
                name.push('\'');
                chars.next();
            }
            let tok = match name.as_str() {
                "box" => Tok::Box,
                "dia" => Tok::Dia,
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                "bot" => Tok::Bot,
                "top" => Tok::Top,
                _ => Tok::Ident(name),
            };
            out.push((tok, pos));
            continue;
        }
        return Err(ParseError::Syntax {
            pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    arities: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {}, found {}",
                describe(&t),
                describe(self.peek())
            ))
        }
    }

    // imp := disj ('->' imp)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn variable(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Var::new(&name))
            }
            other => self.error(format!("expected a variable, found {}", describe(&other))),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Not => Ok(Formula::neg(self.unary()?)),
            Tok::Box => Ok(Formula::boxed(self.unary()?)),
            Tok::Dia => Ok(Formula::dia(self.unary()?)),
            Tok::Bot => Ok(Formula::bot()),
            Tok::Top => Ok(Formula::top()),
            quant @ (Tok::Forall | Tok::Exists) => {
                let universal = quant == Tok::Forall;
                let v = self.variable()?;
                self.expect(Tok::Dot)?;
                let body = self.implication()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Tok::LParen => {
                let inner = self.implication()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if *self.peek() != Tok::RParen {
                        args.push(self.variable()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.variable()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                match self.arities.get(&name) {
                    Some(&first) if first != args.len() => {
                        return Err(ParseError::ArityMismatch {
                            letter: name,
                            first,
                            second: args.len(),
                            pos,
                        })
                    }
                    _ => {
                        self.arities.insert(name.clone(), args.len());
                    }
                }
                Ok(Formula::atom(&name, &args))
            }
            other => Err(ParseError::Syntax {
                pos,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }
}

/// Parses the ASCII formula grammar: `&` binds tighter than `|`, which binds
/// tighter than the right-associative `->`; `~`, `box` and `dia` bind
/// tightest; a quantifier's scope extends as far right as possible.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        arities: HashMap::new(),
    };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return p.error(format!("trailing input: {}", describe(p.peek())));
    }
    Ok(f)
}
