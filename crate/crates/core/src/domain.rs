//! The input language for sum-of-squares domains:
//!
//! ```text
//! # comments run to end of line
//! n = 3
//! generators: z2^2, (1/2 + 1/3 i) z2*z3, z3^3
//! weight: 1,4,6          # optional declared weight
//! ```
//!
//! Grammar (whitespace-insensitive within lines):
//!   file   := "n" "=" INT NL "generators" ":" poly ("," poly)* [NL "weight" ":" W]
//!   poly   := term (("+"|"-") term)*
//!   term   := [coeff ["*"]] factor ("*" factor)* | coeff
//!   factor := VAR ["^" INT]
//!   VAR    := "z" INT          (index ≥ 2)
//!   coeff  := RAT | RAT "i" | "(" RAT [("+"|"-") RAT "i"] ")"
//!   RAT    := ["-"] INT ["/" INT]

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::{GaussianRational, HoloPoly, Monomial};
use crate::error::Error;
use crate::weights::Weight;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub n: u32,
    pub generators: Vec<HoloPoly>,
    pub declared_weight: Option<Weight>,
}

impl DomainSpec {
    pub fn new(n: u32, generators: Vec<HoloPoly>) -> Self {
        Self { n, generators, declared_weight: None }
    }
}

/// Canonical printing; `parse(print(spec))` is structural identity.
impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}", self.n)?;
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "generators: {}", gens.join(", "))?;
        if let Some(w) = &self.declared_weight {
            write!(f, "\nweight: {w}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Var(u32),
    ImagUnit,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, start_line: usize) -> Result<Vec<Spanned>, Error> {
    let mut out = Vec::new();
    for (li, raw_line) in src.lines().enumerate() {
        let line = start_line + li;
        let code = raw_line.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let err = |msg: String| Error::Parse { line, col, msg };
            match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                }
                '+' => {
                    out.push(Spanned { tok: Tok::Plus, line, col });
                    i += 1;
                }
                '-' => {
                    out.push(Spanned { tok: Tok::Minus, line, col });
                    i += 1;
                }
                '*' => {
                    out.push(Spanned { tok: Tok::Star, line, col });
                    i += 1;
                }
                '^' => {
                    out.push(Spanned { tok: Tok::Caret, line, col });
                    i += 1;
                }
                '/' => {
                    out.push(Spanned { tok: Tok::Slash, line, col });
                    i += 1;
                }
                '(' => {
                    out.push(Spanned { tok: Tok::LParen, line, col });
                    i += 1;
                }
                ')' => {
                    out.push(Spanned { tok: Tok::RParen, line, col });
                    i += 1;
                }
                ',' => {
                    out.push(Spanned { tok: Tok::Comma, line, col });
                    i += 1;
                }
                'i' => {
                    out.push(Spanned { tok: Tok::ImagUnit, line, col });
                    i += 1;
                }
                'z' => {
                    let mut j = i + 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == i + 1 {
                        return Err(err("variable 'z' needs an index".into()));
                    }
                    let idx: u32 = chars[i + 1..j]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| err("variable index overflow".into()))?;
                    out.push(Spanned { tok: Tok::Var(idx), line, col });
                    i = j;
                }
                d if d.is_ascii_digit() => {
                    let mut j = i;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let v: BigInt = chars[i..j]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .expect("digits parse as BigInt");
                    out.push(Spanned { tok: Tok::Int(v), line, col });
                    i = j;
                }
                other => {
                    return Err(err(format!("unexpected character '{other}'")));
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// recursive-descent parser for polynomial lists

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    nvars: u32,
    last_line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.last_line, 1))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_poly_list(&mut self) -> Result<Vec<HoloPoly>, Error> {
        let mut polys = vec![self.parse_poly()?];
        while self.eat(&Tok::Comma) {
            polys.push(self.parse_poly()?);
        }
        if self.pos != self.toks.len() {
            return Err(self.err("trailing input after polynomial list"));
        }
        Ok(polys)
    }

    fn parse_poly(&mut self) -> Result<HoloPoly, Error> {
        let mut acc = HoloPoly::zero(self.nvars);
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            let term = self.parse_term()?;
            acc = if sign {
                acc.checked_sub(&term).expect("same nvars")
            } else {
                acc.checked_add(&term).expect("same nvars")
            };
            match self.peek() {
                Some(Tok::Plus) => {
                    sign = false;
                    self.pos += 1;
                }
                Some(Tok::Minus) => {
                    sign = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<HoloPoly, Error> {
        let coeff = match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::LParen) | Some(Tok::ImagUnit) => {
                let c = self.parse_coeff()?;
                // optional '*' between coefficient and factors
                self.eat(&Tok::Star);
                Some(c)
            }
            _ => None,
        };
        let mut factors = Vec::new();
        while let Some(Tok::Var(_)) = self.peek() {
            factors.push(self.parse_factor()?);
            if !self.eat(&Tok::Star) {
                break;
            }
            // a '*' must be followed by another factor
            if !matches!(self.peek(), Some(Tok::Var(_))) {
                return Err(self.err("expected a variable after '*'"));
            }
        }
        match (coeff, factors.is_empty()) {
            (None, true) => Err(self.err("expected a coefficient or a variable")),
            (c, _) => {
                let c = c.unwrap_or_else(GaussianRational::one);
                let mono = factors
                    .into_iter()
                    .fold(Monomial::one(), |acc, f| acc.mul(&f));
                Ok(HoloPoly::monomial(self.nvars, mono, c))
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Monomial, Error> {
        let idx = match self.bump().map(|s| s.tok.clone()) {
            Some(Tok::Var(idx)) => idx,
            _ => return Err(self.err("expected a variable")),
        };
        if idx < 2 {
            self.pos -= 1;
            return Err(self.err(format!(
                "variable z{idx} out of range: generators live in z2..z{}",
                self.nvars
            )));
        }
        if idx > self.nvars {
            self.pos -= 1;
            return Err(self.err(format!(
                "variable z{idx} out of range: n = {}",
                self.nvars
            )));
        }
        let exp = if self.eat(&Tok::Caret) {
            match self.bump().map(|s| s.tok.clone()) {
                Some(Tok::Int(v)) => {
                    let e: u32 = v
                        .try_into()
                        .map_err(|_| self.err("exponent overflow"))?;
                    if e == 0 {
                        return Err(self.err("zero exponents are not allowed"));
                    }
                    e
                }
                _ => return Err(self.err("expected an integer exponent after '^'")),
            }
        } else {
            1
        };
        Ok(Monomial::from_exponents([(idx, exp)]))
    }

    /// RAT | RAT "i" | "(" RAT [("+"|"-") RAT "i"] ")" — plus a bare "i".
    fn parse_coeff(&mut self) -> Result<GaussianRational, Error> {
        if self.eat(&Tok::ImagUnit) {
            return Ok(GaussianRational::i());
        }
        if self.eat(&Tok::LParen) {
            let first = self.parse_signed_rat()?;
            let out = match self.peek() {
                Some(Tok::Plus) | Some(Tok::Minus) => {
                    let negate = matches!(self.peek(), Some(Tok::Minus));
                    self.pos += 1;
                    let second = self.parse_signed_rat()?;
                    if !self.eat(&Tok::ImagUnit) {
                        return Err(self.err("expected 'i' after the imaginary part"));
                    }
                    let im = if negate { -second } else { second };
                    GaussianRational::new(first, im)
                }
                Some(Tok::ImagUnit) => {
                    self.pos += 1;
                    GaussianRational::new(BigRational::zero(), first)
                }
                _ => GaussianRational::new(first, BigRational::zero()),
            };
            if !self.eat(&Tok::RParen) {
                return Err(self.err("expected ')'"));
            }
            return Ok(out);
        }
        let r = self.parse_signed_rat()?;
        if self.eat(&Tok::ImagUnit) {
            Ok(GaussianRational::new(BigRational::zero(), r))
        } else {
            Ok(GaussianRational::from_rational(r))
        }
    }

    fn parse_signed_rat(&mut self) -> Result<BigRational, Error> {
        let neg = self.eat(&Tok::Minus);
        let num = match self.bump().map(|s| s.tok.clone()) {
            Some(Tok::Int(v)) => v,
            _ => return Err(self.err("expected an integer")),
        };
        let den = if self.eat(&Tok::Slash) {
            match self.bump().map(|s| s.tok.clone()) {
                Some(Tok::Int(v)) if !v.is_zero() => v,
                Some(Tok::Int(_)) => return Err(self.err("zero denominator")),
                _ => return Err(self.err("expected an integer denominator")),
            }
        } else {
            BigInt::from(1)
        };
        let r = BigRational::new(num, den);
        Ok(if neg { -r } else { r })
    }
}

/// Parses the input language into a [`DomainSpec`] with exact
/// Gaussian-rational coefficients.
pub fn parse(text: &str) -> Result<DomainSpec, Error> {
    let mut n: Option<(u32, usize)> = None;
    let mut gen_text: Option<(String, usize)> = None;
    let mut weight: Option<Weight> = None;

    let mut lines = text.lines().enumerate().peekable();
    while let Some((li, raw)) = lines.next() {
        let line_no = li + 1;
        let code = raw.split('#').next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        if let Some(rest) = code.strip_prefix('n') {
            let rest = rest.trim_start();
            if let Some(v) = rest.strip_prefix('=') {
                if n.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        col: 1,
                        msg: "duplicate 'n ='".into(),
                    });
                }
                let v = v.trim();
                let parsed: u32 = v.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: format!("bad dimension '{v}'"),
                })?;
                if parsed < 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        col: 1,
                        msg: "n must be at least 2".into(),
                    });
                }
                n = Some((parsed, line_no));
                continue;
            }
        }
        if let Some(rest) = code.strip_prefix("generators") {
            let rest = rest.trim_start();
            let Some(body) = rest.strip_prefix(':') else {
                return Err(Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: "expected ':' after 'generators'".into(),
                });
            };
            // generator list may continue on following lines up to a
            // 'weight:' line
            let mut body = body.to_string();
            while let Some(&(_, next_raw)) = lines.peek() {
                let next_code = next_raw.split('#').next().unwrap_or("").trim();
                if next_code.is_empty() || next_code.starts_with("weight") {
                    break;
                }
                body.push('\n');
                body.push_str(next_raw);
                lines.next();
            }
            gen_text = Some((body, line_no));
            continue;
        }
        if let Some(rest) = code.strip_prefix("weight") {
            let rest = rest.trim_start();
            let Some(body) = rest.strip_prefix(':') else {
                return Err(Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: "expected ':' after 'weight'".into(),
                });
            };
            weight = Some(Weight::parse(body.trim()).map_err(|e| Error::Parse {
                line: line_no,
                col: 1,
                msg: e.to_string(),
            })?);
            continue;
        }
        return Err(Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("unrecognized line '{code}'"),
        });
    }

    let Some((n, _)) = n else {
        return Err(Error::Parse { line: 1, col: 1, msg: "n missing: add 'n = <int>'".into() });
    };
    let Some((gen_text, gen_line)) = gen_text else {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "generators missing: add 'generators: <poly>, ...'".into(),
        });
    };
    if let Some(w) = &weight {
        if w.len() != n as usize {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                msg: format!("declared weight has {} entries, n = {n}", w.len()),
            });
        }
    }

    let toks = lex(&gen_text, gen_line)?;
    if toks.is_empty() {
        return Err(Error::Parse { line: gen_line, col: 1, msg: "empty generator list".into() });
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        nvars: n,
        last_line: toks.last().map(|s| s.line).unwrap_or(gen_line),
    };
    let generators = parser.parse_poly_list()?;
    Ok(DomainSpec { n, generators, declared_weight: weight })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(nvars: u32, idx: u32) -> HoloPoly {
        HoloPoly::variable(nvars, idx)
    }

    #[test]
    fn direct_parse() {
        let spec = parse("n=3\ngenerators: z2^2, z2*z3").unwrap();
        assert_eq!(spec.n, 3);
        assert_eq!(spec.generators, vec![z(3, 2).pow(2), &z(3, 2) * &z(3, 3)]);
    }

    #[test]
    fn rational_complex_coefficients() {
        let spec = parse("n=2\ngenerators: (1/2 + 1/3 i) z2^4").unwrap();
        let c = spec.generators[0].coeff(&Monomial::from_exponents([(2, 4)]));
        assert_eq!(
            c,
            GaussianRational::new(
                BigRational::new(BigInt::from(1), BigInt::from(2)),
                BigRational::new(BigInt::from(1), BigInt::from(3))
            )
        );
        // other coefficient spellings
        let s2 = parse("n=2\ngenerators: 2i z2 - 1/2 z2^2 + i*z2^3, (-1-2i) z2").unwrap();
        assert_eq!(s2.generators.len(), 2);
    }

    #[test]
    fn missing_n_is_an_error() {
        let err = parse("generators: z2").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("n missing"));
    }

    #[test]
    fn out_of_range_variable() {
        let err = parse("n=2\ngenerators: z3").unwrap_err();
        assert!(err.to_string().contains("out of range"));
        let err2 = parse("n=3\ngenerators: z1").unwrap_err();
        assert!(err2.to_string().contains("out of range"));
    }

    #[test]
    fn error_positions() {
        let err = parse("n=3\ngenerators: z2^2, z2 @").unwrap_err();
        let Error::Parse { line, col, .. } = err else { panic!("expected parse error") };
        assert_eq!(line, 2);
        assert!(col > 1);
    }

    #[test]
    fn comments_weight_and_multiline() {
        let spec = parse(
            "# a domain\nn = 3\ngenerators: z2^2,  # first\n  z3^3\nweight: 1,4,6\n",
        )
        .unwrap();
        assert_eq!(spec.generators.len(), 2);
        assert_eq!(spec.declared_weight.as_ref().unwrap().to_string(), "1,4,6");
    }

    #[test]
    fn print_parse_roundtrip() {
        let spec = parse(
            "n=3\ngenerators: z2^2 - 1/2*z3, (1/2+1/3i)*z2*z3^2, 2i*z3\nweight: 1,4,4",
        )
        .unwrap();
        let printed = spec.to_string();
        let back = parse(&printed).unwrap();
        assert_eq!(back, spec);
    }
}
