//! Text syntax for algebra descriptions, e.g.
//! `ext(matrix(2), sum(hom(3,dim=2), commutative(dim=1,basic)))`.
//! Whitespace is ignored; `inf` is accepted wherever a dimension is.

use std::fmt;

use super::{AlgDesc, ExtNat, SpaceType};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Eq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn malformed(line: usize, col: usize, msg: impl fmt::Display) -> Error {
    Error::MalformedDescription(format!("line {line}, column {col}: {msg}"))
}

fn lex(src: &str) -> Result<(Vec<Token>, (usize, usize))> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = src.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (l, c) = (line, col);
        let single = match ch {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            col += 1;
            out.push(Token { tok, line: l, col: c });
        } else if ch == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if ch.is_whitespace() {
            chars.next();
            col += 1;
        } else if ch.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                s.push(d);
                chars.next();
                col += 1;
            }
            let v = s
                .parse()
                .map_err(|_| malformed(l, c, format!("integer `{s}` out of range")))?;
            out.push(Token { tok: Tok::Int(v), line: l, col: c });
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek().filter(|d| d.is_ascii_alphanumeric() || **d == '_') {
                s.push(d);
                chars.next();
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line: l, col: c });
        } else {
            return Err(malformed(l, c, format!("unexpected character `{ch}`")));
        }
    }
    Ok((out, (line, col)))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map_or(self.end, |t| (t.line, t.col))
    }

    fn error(&self, msg: impl fmt::Display) -> Error {
        let (l, c) = self.here();
        malformed(l, c, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a name")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == word => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{word}`"))),
        }
    }

    fn int(&mut self) -> Result<u64> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("expected an integer")),
        }
    }

    fn size(&mut self) -> Result<usize> {
        let at = self.here();
        let v = self.int()?;
        usize::try_from(v).map_err(|_| malformed(at.0, at.1, "size out of range"))
    }

    fn ext_nat(&mut self) -> Result<ExtNat> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "inf" => {
                self.pos += 1;
                Ok(ExtNat::Inf)
            }
            Some(Tok::Int(_)) => Ok(ExtNat::Fin(self.int()?)),
            _ => Err(self.error("expected an integer or `inf`")),
        }
    }

    /// True and consumes a comma if one follows.
    fn comma(&mut self) -> bool {
        if self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn close(&mut self) -> Result<()> {
        self.expect(Tok::RParen, "`)`")
    }

    fn expr_list(&mut self, trailing_flag: Option<&str>) -> Result<(Vec<AlgDesc>, bool)> {
        let mut items = vec![self.expr()?];
        let mut flag = false;
        while self.comma() {
            match (self.peek(), trailing_flag) {
                (Some(Tok::Ident(s)), Some(f)) if s == f => {
                    self.pos += 1;
                    flag = true;
                    break;
                }
                _ => items.push(self.expr()?),
            }
        }
        self.close()?;
        Ok((items, flag))
    }

    fn expr(&mut self) -> Result<AlgDesc> {
        let start = self.here();
        let name = self.ident()?;
        match name.as_str() {
            "af" => return Ok(AlgDesc::Af),
            "ah_slow" => return Ok(AlgDesc::AhSimpleSlowGrowth),
            _ => {}
        }
        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
        let desc = match name.as_str() {
            "matrix" => {
                let n = self.size()?;
                self.close()?;
                AlgDesc::Matrix(n)
            }
            "findim" => {
                let mut ds = vec![self.size()?];
                while self.comma() {
                    ds.push(self.size()?);
                }
                self.close()?;
                AlgDesc::FiniteDim(ds)
            }
            "commutative" => {
                self.keyword("dim")?;
                self.expect(Tok::Eq, "`=`")?;
                let dim = self.ext_nat()?;
                let space = if self.comma() {
                    match self.ident()?.as_str() {
                        "basic" => SpaceType::Basic,
                        "exceptional" => SpaceType::Exceptional,
                        "unknown" => SpaceType::Unknown,
                        other => {
                            self.pos -= 1;
                            return Err(self.error(format!("unknown space type `{other}`")));
                        }
                    }
                } else {
                    SpaceType::Unknown
                };
                self.close()?;
                AlgDesc::Commutative { dim, space }
            }
            "hom" => {
                let n = self.size()?;
                self.expect(Tok::Comma, "`,`")?;
                self.keyword("dim")?;
                self.expect(Tok::Eq, "`=`")?;
                let dim = self.ext_nat()?;
                self.close()?;
                AlgDesc::Homogeneous { n, dim }
            }
            "sum" => AlgDesc::DirectSum(self.expr_list(None)?.0),
            "ext" => {
                let ideal = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let quotient = self.expr()?;
                self.close()?;
                AlgDesc::Extension {
                    ideal: Box::new(ideal),
                    quotient: Box::new(quotient),
                }
            }
            "tensor_mn" => {
                let child = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let n = self.size()?;
                let (mut rr0, mut sr1, mut unital) = (false, false, false);
                while self.comma() {
                    let slot = match self.ident()?.as_str() {
                        "rr0" => &mut rr0,
                        "sr1" => &mut sr1,
                        "unital" => &mut unital,
                        other => {
                            self.pos -= 1;
                            return Err(self.error(format!("unknown tensor flag `{other}`")));
                        }
                    };
                    *slot = true;
                }
                self.close()?;
                AlgDesc::TensorMn {
                    child: Box::new(child),
                    n,
                    rr0,
                    sr1,
                    unital,
                }
            }
            "limit" => {
                let (children, repeats) = self.expr_list(Some("repeats"))?;
                AlgDesc::InductiveLimit { children, repeats }
            }
            "uhf_rr0" | "ideal" | "quotient" => {
                let child = Box::new(self.expr()?);
                self.close()?;
                match name.as_str() {
                    "uhf_rr0" => AlgDesc::UhfAbsorbingRr0(child),
                    "ideal" => AlgDesc::Ideal(child),
                    _ => AlgDesc::Quotient(child),
                }
            }
            other => {
                return Err(malformed(start.0, start.1, format!("unknown constructor `{other}`")));
            }
        };
        Ok(desc)
    }
}

/// Parses and validates one description.
pub fn parse(src: &str) -> Result<AlgDesc> {
    let (tokens, end) = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    if p.peek().is_none() {
        return Err(p.error("empty description"));
    }
    let desc = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input"));
    }
    desc.validate()?;
    Ok(desc)
}

fn join(f: &mut fmt::Formatter<'_>, items: &[AlgDesc]) -> fmt::Result {
    for (i, c) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

impl fmt::Display for AlgDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgDesc::Commutative { dim, space } => write!(f, "commutative(dim={dim},{space})"),
            AlgDesc::Matrix(n) => write!(f, "matrix({n})"),
            AlgDesc::FiniteDim(ds) => {
                let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                write!(f, "findim({})", parts.join(","))
            }
            AlgDesc::Homogeneous { n, dim } => write!(f, "hom({n},dim={dim})"),
            AlgDesc::DirectSum(cs) => {
                write!(f, "sum(")?;
                join(f, cs)?;
                write!(f, ")")
            }
            AlgDesc::Extension { ideal, quotient } => write!(f, "ext({ideal},{quotient})"),
            AlgDesc::TensorMn {
                child,
                n,
                rr0,
                sr1,
                unital,
            } => {
                write!(f, "tensor_mn({child},{n}")?;
                for (on, name) in [(rr0, "rr0"), (sr1, "sr1"), (unital, "unital")] {
                    if *on {
                        write!(f, ",{name}")?;
                    }
                }
                write!(f, ")")
            }
            AlgDesc::InductiveLimit { children, repeats } => {
                write!(f, "limit(")?;
                join(f, children)?;
                if *repeats {
                    write!(f, ",repeats")?;
                }
                write!(f, ")")
            }
            AlgDesc::Af => write!(f, "af"),
            AlgDesc::UhfAbsorbingRr0(c) => write!(f, "uhf_rr0({c})"),
            AlgDesc::AhSimpleSlowGrowth => write!(f, "ah_slow"),
            AlgDesc::Ideal(c) => write!(f, "ideal({c})"),
            AlgDesc::Quotient(c) => write!(f, "quotient({c})"),
        }
    }
}
