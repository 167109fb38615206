//! Recursive-descent parser for the formalization syntax.
//!
//! Declared precedence, loosest to tightest: ↔, →, ∨, ∧, ¬. Implication and
//! biconditional associate to the right. A quantifier's scope is the bracket
//! group that immediately follows it, or, unbracketed, extends maximally to
//! the right. Both `[...]` and `(...)` delimit groups.

use std::collections::BTreeMap;

use super::{FolError, Formula, Term};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Not,
    And,
    Or,
    Implies,
    Iff,
    ForAll,
    Exists,
    Ident(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, FolError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self, bytes: usize) {
        self.pos += bytes;
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, FolError> {
        loop {
            match self.rest().chars().next() {
                Some(c) if c.is_whitespace() => self.bump(c.len_utf8()),
                _ => break,
            }
        }
        let start = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };

        // Multi-byte ASCII operators first.
        for (pat, tok) in [
            ("<->", Tok::Iff),
            ("->", Tok::Implies),
            ("&&", Tok::And),
            ("||", Tok::Or),
        ] {
            if rest.starts_with(pat) {
                self.bump(pat.len());
                return Ok(Some((tok, start)));
            }
        }

        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '¬' | '~' | '!' => Some(Tok::Not),
            '∧' | '&' => Some(Tok::And),
            '∨' | '|' => Some(Tok::Or),
            '→' => Some(Tok::Implies),
            '↔' => Some(Tok::Iff),
            '∀' => Some(Tok::ForAll),
            '∃' => Some(Tok::Exists),
            _ => None,
        };
        if let Some(tok) = single {
            self.bump(c.len_utf8());
            return Ok(Some((tok, start)));
        }

        if c.is_ascii_alphabetic() || c == '_' {
            let end = rest
                .char_indices()
                .find(|&(_, ch)| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '\''))
                .map_or(rest.len(), |(i, _)| i);
            let word = &rest[..end];
            self.bump(end);
            let tok = match word {
                "forall" => Tok::ForAll,
                "exists" => Tok::Exists,
                _ => Tok::Ident(word.to_string()),
            };
            return Ok(Some((tok, start)));
        }

        Err(FolError::Syntax {
            offset: start,
            message: format!("unknown token starting with '{c}'"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
    scope: Vec<String>,
    arities: BTreeMap<String, usize>,
}

/// Parse a formula from the accepted grammar.
///
/// Both Unicode (`∀ ∃ ¬ ∧ ∨ → ↔`) and ASCII (`forall exists ~ ! & | -> <->`)
/// operator spellings are accepted. Whether a bare argument name denotes a
/// variable or a constant is resolved by quantifier scope during the parse.
pub fn parse_formula(text: &str) -> Result<Formula, FolError> {
    let toks = Lexer::tokenize(text)?;
    if toks.is_empty() {
        return Err(FolError::Syntax {
            offset: 0,
            message: "empty input".into(),
        });
    }
    let end = text.len();
    let mut p = Parser {
        toks,
        idx: 0,
        end,
        scope: Vec::new(),
        arities: BTreeMap::new(),
    };
    let f = p.parse_iff()?;
    if let Some((_, off)) = p.peek() {
        return Err(FolError::Syntax {
            offset: off,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.idx).map(|(t, o)| (t, *o))
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |(_, o)| o)
    }

    fn err(&self, message: impl Into<String>) -> FolError {
        FolError::Syntax {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<usize, FolError> {
        match self.peek() {
            Some((t, o)) if t == want => {
                self.idx += 1;
                Ok(o)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn parse_iff(&mut self) -> Result<Formula, FolError> {
        let lhs = self.parse_implies()?;
        if matches!(self.peek(), Some((Tok::Iff, _))) {
            self.next();
            let rhs = self.parse_iff()?;
            Ok(lhs.iff(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_implies(&mut self) -> Result<Formula, FolError> {
        let lhs = self.parse_or()?;
        if matches!(self.peek(), Some((Tok::Implies, _))) {
            self.next();
            let rhs = self.parse_implies()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<Formula, FolError> {
        let mut parts = vec![self.parse_and()?];
        while matches!(self.peek(), Some((Tok::Or, _))) {
            self.next();
            parts.push(self.parse_and()?);
        }
        Ok(Formula::or(parts))
    }

    fn parse_and(&mut self) -> Result<Formula, FolError> {
        let mut parts = vec![self.parse_unary()?];
        while matches!(self.peek(), Some((Tok::And, _))) {
            self.next();
            parts.push(self.parse_unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn parse_unary(&mut self) -> Result<Formula, FolError> {
        match self.peek() {
            Some((Tok::Not, _)) => {
                self.next();
                Ok(Formula::not(self.parse_unary()?))
            }
            Some((Tok::ForAll, _)) => {
                self.next();
                self.parse_quantified(true)
            }
            Some((Tok::Exists, _)) => {
                self.next();
                self.parse_quantified(false)
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_quantified(&mut self, universal: bool) -> Result<Formula, FolError> {
        let var = match self.next() {
            Some((Tok::Ident(name), _)) => name,
            _ => return Err(self.err("expected quantified variable name")),
        };
        self.scope.push(var.clone());
        // A bracket group right after the variable is the whole scope;
        // otherwise the scope extends maximally to the right.
        let body = match self.peek() {
            Some((Tok::LParen, _)) | Some((Tok::LBracket, _)) => self.parse_primary(),
            _ => self.parse_iff(),
        };
        self.scope.pop();
        let body = body?;
        Ok(if universal {
            Formula::forall(var, body)
        } else {
            Formula::exists(var, body)
        })
    }

    fn parse_primary(&mut self) -> Result<Formula, FolError> {
        match self.next() {
            Some((Tok::LParen, _)) => {
                let f = self.parse_iff()?;
                self.eat(&Tok::RParen, "closing ')'")?;
                Ok(f)
            }
            Some((Tok::LBracket, _)) => {
                let f = self.parse_iff()?;
                self.eat(&Tok::RBracket, "closing ']'")?;
                Ok(f)
            }
            Some((Tok::Ident(name), _)) => self.parse_atom(name),
            Some((_, off)) => Err(FolError::Syntax {
                offset: off,
                message: "expected a formula".into(),
            }),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn parse_atom(&mut self, predicate: String) -> Result<Formula, FolError> {
        let mut args = Vec::new();
        if matches!(self.peek(), Some((Tok::LParen, _))) {
            self.next();
            loop {
                args.push(self.parse_term()?);
                match self.next() {
                    Some((Tok::Comma, _)) => continue,
                    Some((Tok::RParen, _)) => break,
                    _ => return Err(self.err("expected ',' or ')' in argument list")),
                }
            }
        }
        if let Some(&known) = self.arities.get(&predicate) {
            if known != args.len() {
                return Err(FolError::Arity {
                    predicate,
                    first: known,
                    second: args.len(),
                });
            }
        } else {
            self.arities.insert(predicate.clone(), args.len());
        }
        Ok(Formula::Atom { predicate, args })
    }

    fn parse_term(&mut self) -> Result<Term, FolError> {
        match self.next() {
            Some((Tok::Ident(name), _)) => {
                if matches!(self.peek(), Some((Tok::LParen, _))) {
                    return Err(self.err("function symbols are not supported in argument position"));
                }
                if self.scope.contains(&name) {
                    Ok(Term::Variable(name))
                } else {
                    Ok(Term::Constant(name))
                }
            }
            Some((_, off)) => Err(FolError::Syntax {
                offset: off,
                message: "expected a term (constant or variable)".into(),
            }),
            None => Err(self.err("unexpected end of input in argument list")),
        }
    }
}
