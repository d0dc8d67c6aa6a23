//! Line-oriented text grammar for rate-inequality systems.
//!
//! ```text
//! rates R0 R1 Rc Rhat
//! nonneg R0 R1 Rc Rhat
//! fact S _|_ X2
//! R1 <= I(U;Y|V,X2) - I(U;S|V,X2)
//! Rc + R1 + Rhat <= I(U,V,X2;Y) - I(U;S|V,X2)
//! Rhat >= I(V;S|X2)
//! 0 <= I(X2;Y)
//! ```
//!
//! Info expressions are plus/minus separated `I(G1;G2|G3)` / `H(G)` terms
//! with optional integer or rational coefficients (`3*`, `1/2*`); variable
//! groups are comma-separated names. `<` and `>` are accepted and normalized
//! to their non-strict forms. Lines starting with `#` are comments. Rendering
//! emits entropy atoms in canonical order; `render(parse(x))` is a fixpoint.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fme::expr::{expand_entropy, expand_mi, IndepFact, InfoExpr, VarSet};
use crate::fme::system::{IneqSystem, RateIneq};

/// Parses a system file.
pub fn parse_system(text: &str) -> Result<IneqSystem> {
    let mut rates: Vec<String> = vec![];
    let mut nonneg: BTreeSet<String> = BTreeSet::new();
    let mut facts: Vec<IndepFact> = vec![];
    let mut ineqs: Vec<RateIneq> = vec![];
    let mut seen_rates_line = false;

    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("rates") => {
                if seen_rates_line {
                    return Err(Error::parse(ln, 1, "duplicate rates line"));
                }
                seen_rates_line = true;
                for t in tokens {
                    check_ident(t, ln)?;
                    rates.push(t.to_string());
                }
            }
            Some("nonneg") => {
                for t in tokens {
                    check_ident(t, ln)?;
                    nonneg.insert(t.to_string());
                }
            }
            Some("fact") => {
                let rest: Vec<&str> = tokens.collect();
                let sep = rest
                    .iter()
                    .position(|&t| t == "_|_")
                    .ok_or_else(|| Error::parse(ln, 1, "fact needs the form `A _|_ B`"))?;
                let a: VarSet = rest[..sep].iter().map(|s| s.to_string()).collect();
                let b: VarSet = rest[sep + 1..].iter().map(|s| s.to_string()).collect();
                facts.push(IndepFact::new(a, b).map_err(|e| match e {
                    Error::Parse { .. } => e,
                    other => Error::parse(ln, 1, other.to_string()),
                })?);
            }
            Some(_) => {
                ineqs.push(parse_inequality(line, ln)?);
            }
            None => unreachable!("blank lines are skipped"),
        }
    }
    IneqSystem::new(rates, nonneg, facts, ineqs)
}

fn check_ident(t: &str, ln: usize) -> Result<()> {
    let ok = !t.is_empty()
        && t.chars().next().unwrap().is_ascii_alphabetic()
        && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::parse(ln, 1, format!("invalid identifier `{t}`")))
    }
}

// ---------------------------------------------------------------------------
// Inequality parsing: a tiny tokenizer plus a two-sided term reader
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Semi,
    Comma,
    Bar,
    Le,
    Ge,
}

fn lex(line: &str, ln: usize) -> Result<Vec<(usize, Tok)>> {
    let mut out = vec![];
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((col, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((col, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((col, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((col, Tok::Slash));
                i += 1;
            }
            '(' => {
                out.push((col, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((col, Tok::RParen));
                i += 1;
            }
            ';' => {
                out.push((col, Tok::Semi));
                i += 1;
            }
            ',' => {
                out.push((col, Tok::Comma));
                i += 1;
            }
            '|' => {
                out.push((col, Tok::Bar));
                i += 1;
            }
            '<' | '>' => {
                let strict_close = i + 1 < chars.len() && chars[i + 1] == '=';
                out.push((col, if c == '<' { Tok::Le } else { Tok::Ge }));
                i += if strict_close { 2 } else { 1 };
            }
            '=' => {
                return Err(Error::parse(ln, col, "equalities are not supported"));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((col, Tok::Int(s.parse().expect("digits parse"))));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((col, Tok::Ident(s)));
            }
            other => {
                return Err(Error::parse(ln, col, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ln: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(c, _)| *c)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }
    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.ln, self.col(), format!("expected {what}")))
        }
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::parse(self.ln, self.col(), msg))
    }
}

fn parse_inequality(line: &str, ln: usize) -> Result<RateIneq> {
    let toks = lex(line, ln)?;
    let op_pos = toks
        .iter()
        .position(|(_, t)| matches!(t, Tok::Le | Tok::Ge))
        .ok_or_else(|| Error::parse(ln, 1, "inequality needs <= or >="))?;
    let flip = matches!(toks[op_pos].1, Tok::Ge);

    let mut left = Cursor {
        toks: toks[..op_pos].to_vec(),
        pos: 0,
        ln,
    };
    let mut right = Cursor {
        toks: toks[op_pos + 1..].to_vec(),
        pos: 0,
        ln,
    };
    let lhs = parse_rate_side(&mut left)?;
    let rhs = parse_info_side(&mut right)?;
    // `lhs >= rhs` is normalized to `-lhs <= -rhs`
    let (lhs, rhs) = if flip {
        (
            lhs.into_iter().map(|(k, v)| (k, -v)).collect(),
            rhs.scale(&-BigRational::one()),
        )
    } else {
        (lhs, rhs)
    };
    Ok(RateIneq::new(lhs, rhs))
}

/// Signed coefficient prefix: `[+|-] [int[/int] *]`; bare sign means one.
fn parse_coeff(cur: &mut Cursor) -> Result<Option<BigRational>> {
    let mut sign = BigRational::one();
    let mut saw_sign = false;
    while matches!(cur.peek(), Some(Tok::Plus) | Some(Tok::Minus)) {
        if matches!(cur.next().unwrap(), Tok::Minus) {
            sign = -sign;
        }
        saw_sign = true;
    }
    let mag = if let Some(Tok::Int(_)) = cur.peek() {
        let n = match cur.next().unwrap() {
            Tok::Int(n) => n,
            _ => unreachable!(),
        };
        let mut mag = BigRational::from_integer(n);
        if matches!(cur.peek(), Some(Tok::Slash)) {
            cur.next();
            match cur.next() {
                Some(Tok::Int(d)) if !d.is_zero() => {
                    mag /= BigRational::from_integer(d);
                }
                _ => return cur.err("expected nonzero denominator"),
            }
        }
        cur.expect(Tok::Star, "`*` after coefficient")?;
        Some(mag)
    } else {
        None
    };
    match (saw_sign, mag) {
        (false, None) => {
            if cur.peek().is_none() {
                Ok(None)
            } else {
                Ok(Some(sign))
            }
        }
        (_, Some(m)) => Ok(Some(sign * m)),
        (true, None) => Ok(Some(sign)),
    }
}

fn parse_rate_side(cur: &mut Cursor) -> Result<BTreeMap<String, BigRational>> {
    let mut lhs: BTreeMap<String, BigRational> = BTreeMap::new();
    // a literal zero is an empty left side
    if matches!(cur.peek(), Some(Tok::Int(n)) if n.is_zero()) && cur.toks.len() == 1 {
        return Ok(lhs);
    }
    while let Some(coeff) = parse_coeff(cur)? {
        match cur.next() {
            Some(Tok::Ident(name)) => {
                let entry = lhs.entry(name).or_insert_with(BigRational::zero);
                *entry += coeff;
            }
            _ => return cur.err("expected rate variable"),
        }
        if cur.peek().is_none() {
            break;
        }
    }
    if cur.peek().is_some() {
        return cur.err("trailing tokens on rate side");
    }
    lhs.retain(|_, v| !v.is_zero());
    Ok(lhs)
}

fn parse_info_side(cur: &mut Cursor) -> Result<InfoExpr> {
    let mut expr = InfoExpr::zero();
    if matches!(cur.peek(), Some(Tok::Int(n)) if n.is_zero()) && cur.toks.len() == 1 {
        return Ok(expr);
    }
    while let Some(coeff) = parse_coeff(cur)? {
        let term = match cur.next() {
            Some(Tok::Ident(name)) if name == "I" => {
                cur.expect(Tok::LParen, "`(` after I")?;
                let a = parse_group(cur)?;
                cur.expect(Tok::Semi, "`;` between I groups")?;
                let b = parse_group(cur)?;
                let c = if matches!(cur.peek(), Some(Tok::Bar)) {
                    cur.next();
                    parse_group(cur)?
                } else {
                    VarSet::new()
                };
                cur.expect(Tok::RParen, "`)` closing I")?;
                expand_mi(&a, &b, &c).map_err(|e| to_parse(e, cur))?
            }
            Some(Tok::Ident(name)) if name == "H" => {
                cur.expect(Tok::LParen, "`(` after H")?;
                let g = parse_group(cur)?;
                let c = if matches!(cur.peek(), Some(Tok::Bar)) {
                    cur.next();
                    parse_group(cur)?
                } else {
                    VarSet::new()
                };
                cur.expect(Tok::RParen, "`)` closing H")?;
                expand_entropy(&g, &c).map_err(|e| to_parse(e, cur))?
            }
            _ => return cur.err("expected I(...) or H(...) term"),
        };
        expr = expr.add(&term.scale(&coeff));
        if cur.peek().is_none() {
            break;
        }
    }
    if cur.peek().is_some() {
        return cur.err("trailing tokens on info side");
    }
    Ok(expr)
}

fn to_parse(e: Error, cur: &Cursor) -> Error {
    Error::parse(cur.ln, cur.col(), e.to_string())
}

fn parse_group(cur: &mut Cursor) -> Result<VarSet> {
    let mut group = VarSet::new();
    loop {
        match cur.next() {
            Some(Tok::Ident(name)) => {
                group.insert(name);
            }
            _ => return cur.err("expected variable name in group"),
        }
        if matches!(cur.peek(), Some(Tok::Comma)) {
            cur.next();
        } else {
            break;
        }
    }
    Ok(group)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Renders a system in canonical form: declarations first, inequalities in
/// canonical order, info expressions as entropy atoms.
pub fn render_system(sys: &IneqSystem) -> String {
    let mut out = String::new();
    out.push_str("rates");
    for r in sys.rates() {
        out.push(' ');
        out.push_str(r);
    }
    out.push('\n');
    if !sys.nonneg().is_empty() {
        out.push_str("nonneg");
        for r in sys.nonneg() {
            out.push(' ');
            out.push_str(r);
        }
        out.push('\n');
    }
    for fact in sys.facts() {
        let a: Vec<&str> = fact.a.iter().map(String::as_str).collect();
        let b: Vec<&str> = fact.b.iter().map(String::as_str).collect();
        out.push_str(&format!("fact {} _|_ {}\n", a.join(" "), b.join(" ")));
    }
    for ineq in sys.inequalities() {
        out.push_str(&render_inequality(ineq));
        out.push('\n');
    }
    out
}

fn render_inequality(ineq: &RateIneq) -> String {
    let mut s = String::new();
    if ineq.lhs().is_empty() {
        s.push('0');
    } else {
        let mut first = true;
        for (name, coeff) in ineq.lhs() {
            push_signed_coeff(&mut s, coeff, first);
            first = false;
            s.push_str(name);
        }
    }
    s.push_str(" <= ");
    s.push_str(&ineq.rhs().to_string());
    s
}

fn push_signed_coeff(s: &mut String, coeff: &BigRational, first: bool) {
    let mag = coeff.abs();
    if first {
        if coeff.is_negative() {
            s.push('-');
        }
    } else if coeff.is_negative() {
        s.push_str(" - ");
    } else {
        s.push_str(" + ");
    }
    if !mag.is_one() {
        s.push_str(&format!("{mag}*"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_inequality() {
        let sys = parse_system(
            "rates R1\nnonneg R1\nR1 <= I(U;Y|V,X2) - I(U;S|V,X2)\n",
        )
        .unwrap();
        assert_eq!(sys.inequalities().len(), 1);
        let ineq = &sys.inequalities()[0];
        assert_eq!(ineq.lhs().len(), 1);
        // four entropy atoms survive the expansion
        assert_eq!(ineq.rhs().terms().count(), 4);
    }

    #[test]
    fn render_parse_fixpoint() {
        let text = "rates R0 R1 Rc Rhat\n\
                    nonneg R0 R1 Rc Rhat\n\
                    fact S _|_ X2\n\
                    R0 <= I(X2;Y)\n\
                    Rhat >= I(V;S|X2)\n\
                    2*Rc + R1 <= 1/2*I(U,V,X2;Y) + H(S|X2)\n\
                    0 <= I(V,X2;Y) - I(V,X2;S)\n";
        let sys = parse_system(text).unwrap();
        let rendered = render_system(&sys);
        let reparsed = parse_system(&rendered).unwrap();
        assert_eq!(sys, reparsed);
        assert_eq!(rendered, render_system(&reparsed));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_system("rates R1\nR1 <= I(U;Y\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
        assert!(parse_system("rates R1\nR1 <= J(U;Y)\n").is_err());
        assert!(parse_system("rates R1\nR2 <= I(U;Y)\n").is_err());
        assert!(parse_system("rates R1\nR1 = I(U;Y)\n").is_err());
    }

    #[test]
    fn strict_forms_normalize() {
        let strict = parse_system("rates R0\nR0 < I(X2;Y)\n").unwrap();
        let nonstrict = parse_system("rates R0\nR0 <= I(X2;Y)\n").unwrap();
        assert_eq!(strict, nonstrict);
        let lower = parse_system("rates R0\nR0 > I(X2;Y)\n").unwrap();
        let lower2 = parse_system("rates R0\n-1*R0 <= -1*I(X2;Y)\n").unwrap();
        assert_eq!(lower, lower2);
    }

    #[test]
    fn zero_sides() {
        let sys = parse_system("rates R1\n0 <= I(X2;Y)\nR1 <= 0\n").unwrap();
        assert_eq!(sys.inequalities().len(), 2);
        let zero_lhs = sys
            .inequalities()
            .iter()
            .find(|i| i.lhs().is_empty())
            .unwrap();
        assert!(!zero_lhs.rhs().is_zero());
        let zero_rhs = sys
            .inequalities()
            .iter()
            .find(|i| !i.lhs().is_empty())
            .unwrap();
        assert!(zero_rhs.rhs().is_zero());
    }

    #[test]
    fn counts_of_bundled_style_system() {
        // five inequalities, two declaration lines, one fact
        let text = "rates Rhat R0 R1 Rc\n\
                    nonneg R0 Rhat R1 Rc\n\
                    fact S _|_ X2\n\
                    R0 <= I(X2;Y)\n\
                    Rhat - R0 <= I(V;Y|X2)\n\
                    Rhat >= I(V;S|X2)\n\
                    R1 <= I(U;Y|V,X2) - I(U;S|V,X2)\n\
                    Rc + R1 + Rhat <= I(U,V,X2;Y) - I(U;S|V,X2)\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.inequalities().len(), 5);
        assert_eq!(sys.nonneg().len(), 4);
        assert_eq!(sys.facts().len(), 1);
        assert_eq!(sys.rates().len(), 4);
    }
}
