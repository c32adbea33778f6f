use num_rational::BigRational;
use num_traits::One;

use super::exponent::MAX_VARS;
use super::{parse_rational, Exponent, Polynomial};
use crate::error::{Error, Result};

/// Parses a sum of monomial terms such as `x1^6 - 3/2*x1*x3^2 + 0.5`.
///
/// A term is an optional coefficient (integer, decimal or `p/q`) followed by
/// `*`-separated factors `x<i>` or `x<i>^<e>`. Repeated factors multiply.
pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial> {
    if n == 0 || n > MAX_VARS {
        return Err(Error::InvalidParameter(format!("variable count {n} must be in 1..={MAX_VARS}")));
    }
    let mut p = Parser { s: text.as_bytes(), pos: 0, n };
    let mut poly = Polynomial::zero(n);
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty input"));
    }
    let mut first = true;
    loop {
        p.skip_ws();
        let neg = match p.peek() {
            Some(b'+') => {
                p.pos += 1;
                false
            }
            Some(b'-') => {
                p.pos += 1;
                true
            }
            Some(_) if first => false,
            Some(_) => return Err(p.err("expected '+' or '-'")),
            None => break,
        };
        first = false;
        p.skip_ws();
        let (e, mut c) = p.term()?;
        if neg {
            c = -c;
        }
        poly.add_term(e, c);
        p.skip_ws();
        if p.at_end() {
            break;
        }
    }
    Ok(poly)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<(Exponent, BigRational)> {
        let mut exps = vec![0u32; self.n];
        let coef = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let c = self.coefficient()?;
                self.skip_ws();
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.skip_ws();
                    self.factor(&mut exps)?;
                } else {
                    return Ok((Exponent::new(exps), c));
                }
                c
            }
            Some(b'x') => {
                self.factor(&mut exps)?;
                BigRational::one()
            }
            Some(_) => return Err(self.err("expected a coefficient or a variable")),
            None => return Err(self.err("unexpected end of input")),
        };
        loop {
            self.skip_ws();
            if self.peek() != Some(b'*') {
                break;
            }
            self.pos += 1;
            self.skip_ws();
            self.factor(&mut exps)?;
        }
        Ok((Exponent::new(exps), coef))
    }

    fn coefficient(&mut self) -> Result<BigRational> {
        let start = self.pos;
        self.decimal_literal();
        let mut end = self.pos;
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let dstart = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if dstart == self.pos {
                return Err(self.err("expected a denominator"));
            }
            end = self.pos;
        } else {
            self.pos = save;
        }
        let lit = std::str::from_utf8(&self.s[start..end]).expect("ascii slice");
        let lit: String = lit.chars().filter(|c| !c.is_whitespace()).collect();
        parse_rational(&lit).ok_or(Error::Syntax { pos: start, msg: format!("invalid coefficient {lit:?}") })
    }

    fn decimal_literal(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let digits = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
    }

    fn unsigned(&mut self) -> Result<Option<u64>> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let s = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii slice");
        s.parse::<u64>().map(Some).map_err(|_| Error::DegreeOverflow { pos: start })
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<()> {
        let start = self.pos;
        if self.peek() != Some(b'x') {
            return Err(self.err("expected a variable x<i>"));
        }
        self.pos += 1;
        let index = self.unsigned()?.ok_or_else(|| self.err("expected a variable index after 'x'"))?;
        if index == 0 || index > self.n as u64 {
            return Err(Error::VariableOutOfRange { index: index as usize, n: self.n, pos: start });
        }
        self.skip_ws();
        let mut power = 1u64;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let epos = self.pos;
            power = self.unsigned()?.ok_or_else(|| self.err("expected an exponent after '^'"))?;
            if power > u32::MAX as u64 {
                return Err(Error::DegreeOverflow { pos: epos });
            }
        }
        let slot = &mut exps[(index - 1) as usize];
        *slot = slot.checked_add(power as u32).ok_or(Error::DegreeOverflow { pos: start })?;
        if exps.iter().try_fold(0u32, |acc, &a| acc.checked_add(a)).is_none() {
            return Err(Error::DegreeOverflow { pos: start });
        }
        Ok(())
    }
}
