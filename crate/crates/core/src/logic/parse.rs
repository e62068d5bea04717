//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence, tightest first: `~`, `&`, `|`, `->`, `<->`. `->` associates
//! to the right, the other binary connectives to the left. The Unicode
//! connectives `¬ ∧ ∨ → ↔` are accepted as aliases.

use std::fmt;

use super::formula::{Connective, Formula};

/// Malformed formula text. `position` is a character index into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: expected {}", self.position, self.expected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Atom(char),
    Not,
    Bin(Connective),
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            'A'..='Z' => Token::Atom(c),
            '~' | '¬' => Token::Not,
            '&' | '∧' => Token::Bin(Connective::And),
            '|' | '∨' => Token::Bin(Connective::Or),
            '→' => Token::Bin(Connective::Implies),
            '↔' => Token::Bin(Connective::Iff),
            '(' => Token::LParen,
            ')' => Token::RParen,
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((i, Token::Bin(Connective::Implies)));
                i += 2;
                continue;
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((i, Token::Bin(Connective::Iff)));
                i += 3;
                continue;
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    expected: "atom (A-Z), connective or parenthesis".into(),
                })
            }
        };
        out.push((i, tok));
        i += 1;
    }
    out.push((chars.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Token {
        self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.peek();
        if t != Token::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.offset(),
            expected: expected.to_string(),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.peek() == Token::Bin(Connective::Iff) {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.left_assoc(Connective::Or)?;
        if self.peek() == Token::Bin(Connective::Implies) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn left_assoc(&mut self, conn: Connective) -> Result<Formula, ParseError> {
        let mut lhs = self.operand_of(conn)?;
        while self.peek() == Token::Bin(conn) {
            self.bump();
            let rhs = self.operand_of(conn)?;
            lhs = conn.build(lhs, rhs);
        }
        Ok(lhs)
    }

    fn operand_of(&mut self, conn: Connective) -> Result<Formula, ParseError> {
        match conn {
            Connective::Or => self.left_assoc(Connective::And),
            _ => self.unary(),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Token::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Token::Atom(c) => {
                self.bump();
                Ok(Formula::Atom(c))
            }
            Token::LParen => {
                self.bump();
                let inner = self.iff()?;
                if self.peek() != Token::RParen {
                    return Err(self.error("')'"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error("atom, '~' or '('")),
        }
    }
}

/// Parses formula text into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.iff()?;
    if parser.peek() != Token::End {
        return Err(parser.error("connective or end of input"));
    }
    Ok(f)
}
