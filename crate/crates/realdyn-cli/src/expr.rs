//! Map expressions: `z`, decimal literals, `+ - * /`, integer powers and parentheses.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use realdyn::{Error, QPoly, RealRationalMap};
use thiserror::Error;

/// Exponents beyond this are refused rather than expanded.
const MAX_EXPONENT: u32 = 256;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("exponent at byte {offset} is not an integer")]
    NonPolynomialExponent { offset: usize },
    #[error("expression is constant")]
    DegreeZero,
    #[error(transparent)]
    Map(#[from] Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// A nonnegative literal; always a terminating decimal.
    Num(BigRational),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    fn is_atom(&self) -> bool {
        matches!(self, Expr::Num(_) | Expr::Var)
    }

    /// Exact numerator and denominator, reduced, denominator monic.
    pub fn to_fraction(&self) -> Result<(QPoly, QPoly), ParseError> {
        let one = QPoly::one();
        Ok(match self {
            Expr::Num(c) => (QPoly::constant(c.clone()), one),
            Expr::Var => (QPoly::x(), one),
            Expr::Neg(e) => {
                let (p, q) = e.to_fraction()?;
                (-&p, q)
            }
            Expr::Bin(op, a, b) => {
                let (p1, q1) = a.to_fraction()?;
                let (p2, q2) = b.to_fraction()?;
                match op {
                    BinOp::Add => reduce(&(&p1 * &q2) + &(&p2 * &q1), &q1 * &q2)?,
                    BinOp::Sub => reduce(&(&p1 * &q2) - &(&p2 * &q1), &q1 * &q2)?,
                    BinOp::Mul => reduce(&p1 * &p2, &q1 * &q2)?,
                    BinOp::Div => reduce(&p1 * &q2, &q1 * &p2)?,
                }
            }
            Expr::Pow(b, e) => {
                let (p, q) = b.to_fraction()?;
                let k = e.unsigned_abs();
                if *e >= 0 {
                    (p.pow(k), q.pow(k))
                } else {
                    reduce(q.pow(k), p.pow(k))?
                }
            }
        })
    }

    pub fn to_map(&self) -> Result<RealRationalMap, ParseError> {
        let (p, q) = self.to_fraction()?;
        RealRationalMap::from_polys(p, q).map_err(|e| match e {
            Error::DegeneratesToConstant => ParseError::DegreeZero,
            e => ParseError::Map(e),
        })
    }
}

fn reduce(p: QPoly, q: QPoly) -> Result<(QPoly, QPoly), ParseError> {
    if q.is_zero() {
        return Err(ParseError::Map(Error::ZeroDenominator));
    }
    if p.is_zero() {
        return Ok((p, QPoly::one()));
    }
    let g = p.gcd(&q);
    let (p, q) = if g.degree() > 0 {
        (p.div_exact(&g), q.div_exact(&g))
    } else {
        (p, q)
    };
    let l = q.lead();
    Ok((p.scale(&(BigRational::one() / &l)), q.monic()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, f: &mut fmt::Formatter<'_>| {
            if e.is_atom() {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        };
        match self {
            Expr::Num(c) => write!(f, "{}", decimal(c)),
            Expr::Var => write!(f, "z"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(e, f)
            }
            Expr::Bin(op, a, b) => {
                wrap(a, f)?;
                write!(f, "{}", op.symbol())?;
                wrap(b, f)
            }
            Expr::Pow(b, e) => {
                wrap(b, f)?;
                write!(f, "^{e}")
            }
        }
    }
}

/// Decimal text of a nonnegative rational whose denominator divides a power of ten.
fn decimal(c: &BigRational) -> String {
    let ten = BigInt::from(10);
    let mut scale = 0usize;
    let mut num = c.numer().clone();
    let den = c.denom().clone();
    let mut rest = den.clone();
    for p in [2u32, 5] {
        while (&rest % p).is_zero() {
            rest /= p;
        }
    }
    if !rest.is_one() {
        // not from a literal: same value, but reads back as a quotient
        return format!("({}/{})", c.numer(), c.denom());
    }
    while !(&num % &den).is_zero() {
        num *= &ten;
        scale += 1;
    }
    num /= &den;
    let digits = num.to_string();
    if scale == 0 {
        return digits;
    }
    let padded = format!("{digits:0>width$}", width = scale + 1);
    let (int, frac) = padded.split_at(padded.len() - scale);
    format!("{int}.{frac}")
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                return Ok(Expr::Neg(Box::new(self.factor()?)));
            }
            Some(b'+') => {
                self.pos += 1;
                return self.factor();
            }
            _ => {}
        }
        let base = self.base()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let e = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), e))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return self.err(self.src.len(), "missing exponent"),
        };
        let mut neg = false;
        if let Some(c @ (b'-' | b'+')) = self.src.get(self.pos).copied() {
            neg = c == b'-';
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = &self.src[digits_start..self.pos];
        let next = self.src.get(self.pos).copied();
        if digits.is_empty() {
            return match next {
                Some(b'(' | b'z' | b'.') => Err(ParseError::NonPolynomialExponent { offset: start }),
                _ => self.err(start, "expected an integer exponent"),
            };
        }
        if matches!(next, Some(b'.' | b'e' | b'E')) {
            return Err(ParseError::NonPolynomialExponent { offset: start });
        }
        let text = std::str::from_utf8(digits).expect("ascii digits");
        match text.parse::<u32>() {
            Ok(k) if k <= MAX_EXPONENT => Ok(if neg { -(k as i32) } else { k as i32 }),
            _ => self.err(start, format!("exponent exceeds {MAX_EXPONENT}")),
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        match self.peek() {
            None => self.err(self.src.len(), "unexpected end of input"),
            Some(b'z') => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(b')') => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.err(self.pos, format!("unclosed parenthesis opened at byte {start}")),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => self.err(self.pos, format!("unexpected '{}'", self.char_at(self.pos))),
        }
    }

    fn char_at(&self, pos: usize) -> String {
        let rest = String::from_utf8_lossy(&self.src[pos..]);
        rest.chars().next().map(String::from).unwrap_or_default()
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int = String::new();
        let mut frac = String::new();
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            int.push(self.src[self.pos] as char);
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                frac.push(self.src[self.pos] as char);
                self.pos += 1;
            }
        }
        if int.is_empty() && frac.is_empty() {
            return self.err(start, "malformed number");
        }
        let mut exp: i64 = 0;
        if let Some(b'e' | b'E') = self.src.get(self.pos) {
            let epos = self.pos;
            self.pos += 1;
            let mut sign = 1;
            if let Some(c @ (b'-' | b'+')) = self.src.get(self.pos).copied() {
                sign = if c == b'-' { -1 } else { 1 };
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let txt = std::str::from_utf8(&self.src[ds..self.pos]).expect("ascii digits");
            exp = match txt.parse::<i64>() {
                Ok(v) if v <= 4096 => sign * v,
                _ => return self.err(epos, "malformed exponent in number"),
            };
        }
        let mantissa: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
        let shift = exp - frac.len() as i64;
        let ten = BigInt::from(10);
        let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
        let v = if shift >= 0 {
            BigRational::from_integer(mantissa * pow)
        } else {
            BigRational::new(mantissa, pow)
        };
        Ok(Expr::Num(v))
    }
}

/// Parses the whole text as one expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        let what = if c == b')' {
            "unmatched ')'".to_string()
        } else {
            format!("unexpected '{}'", p.char_at(p.pos))
        };
        return p.err(p.pos, what);
    }
    Ok(e)
}

pub fn parse_map(text: &str) -> Result<RealRationalMap, ParseError> {
    parse_expr(text)?.to_map()
}

/// A polynomial, possibly constant; the denominator must reduce to a constant.
pub fn parse_poly(text: &str) -> Result<QPoly, ParseError> {
    let (p, q) = parse_expr(text)?.to_fraction()?;
    if q.degree() > 0 {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "expected a polynomial".into(),
        });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use realdyn::families::lattes_rigid_sqrt3;

    fn literals_nonnegative(e: &Expr) -> bool {
        match e {
            Expr::Num(c) => !c.is_negative(),
            Expr::Var => true,
            Expr::Neg(a) | Expr::Pow(a, _) => literals_nonnegative(a),
            Expr::Bin(_, a, b) => literals_nonnegative(a) && literals_nonnegative(b),
        }
    }

    #[test]
    fn lattes_text() {
        let f = parse_map("-(1/27)*z*(z-9)^2/(z-1)^2").unwrap();
        assert_eq!(f, lattes_rigid_sqrt3());
        assert_eq!(f.degree(), 3);
    }

    #[test]
    fn simple_maps() {
        assert_eq!(parse_map("z^2-3").unwrap().degree(), 2);
        assert_eq!(parse_map("z - 1/z").unwrap().degree(), 2);
        assert_eq!(parse_map("1.5*z^2 + 2e-1").unwrap(), parse_map("(3/2)*z^2+1/5").unwrap());
        assert_eq!(parse_map("z^-1").unwrap(), parse_map("1/z").unwrap());
        assert_eq!(parse_map("-z^2").unwrap(), parse_map("0-(z*z)").unwrap());
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_map("z^(1/2)"),
            Err(ParseError::NonPolynomialExponent { offset: 2 })
        );
        assert_eq!(parse_map("z^1.5"), Err(ParseError::NonPolynomialExponent { offset: 2 }));
        assert_eq!(parse_map("z/z"), Err(ParseError::DegreeZero));
        assert_eq!(parse_map("3"), Err(ParseError::DegreeZero));
        assert!(matches!(parse_map("z+"), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_map("2z"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_map("(z+1"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(parse_map("z)"), Err(ParseError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_map("z + x"), Err(ParseError::Syntax { offset: 4, .. })));
        assert_eq!(parse_map("1/(z-z)"), Err(ParseError::Map(Error::ZeroDenominator)));
    }

    #[test]
    fn printing_round_trips() {
        for s in ["-(1/27)*z*(z-9)^2/(z-1)^2", "z^-2 - -z", "0.125*z^3+.5", "((z))", "2.50e1*z-0.0"] {
            let e = parse_expr(s).unwrap();
            assert!(literals_nonnegative(&e));
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{s} -> {printed}");
        }
        assert_eq!(decimal(&BigRational::new(1.into(), 8.into())), "0.125");
        assert_eq!(decimal(&BigRational::from_integer(25.into())), "25");
    }

    #[test]
    fn map_display_parses_back() {
        let f = parse_map("(z^3-3*z)/(2*z^2+1/3)").unwrap();
        assert_eq!(parse_map(&f.to_string()).unwrap(), f);
    }
}
