//! Text form of fields, e.g. `sum(0.5*elliptic(a1=1,a3=-1), 2*poly(x^2*y))`.
//!
//! Numbers accept arithmetic with `pi`, `sqrt`, `sin`, `cos`, `tan`, `atan`,
//! `ln`, `exp`; `poly(...)` accepts the same syntax in `x` and `y` with
//! non-negative integer powers.

use std::collections::BTreeMap;

use super::{
    make_elliptic_field, make_exceptional_field, make_hyperbolic_field, make_parabolic_field,
    make_polynomial, make_remark_counterexample, make_sum, pushforward_inversion, EllipticCoeffs,
    ExceptionalCoeffs, HyperbolicCoeffs, ParabolicCoeffs, ScalarField,
};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const FIELD_NAMES: [&str; 8] =
    ["elliptic", "hyperbolic", "parabolic", "exceptional", "poly", "sum", "remark", "kelvin"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),=".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Polynomial in `x`, `y` keyed by exponent pair.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<(u32, u32), f64>);

impl Poly {
    fn constant(v: f64) -> Self {
        let mut m = BTreeMap::new();
        m.insert((0, 0), v);
        Poly(m)
    }

    fn monomial(i: u32, j: u32) -> Self {
        let mut m = BTreeMap::new();
        m.insert((i, j), 1.0);
        Poly(m)
    }

    fn as_constant(&self) -> Option<f64> {
        if self.0.keys().all(|&k| k == (0, 0)) {
            Some(self.0.get(&(0, 0)).copied().unwrap_or(0.0))
        } else {
            None
        }
    }

    fn add(mut self, o: &Poly, sign: f64) -> Self {
        for (k, v) in &o.0 {
            *self.0.entry(*k).or_insert(0.0) += sign * v;
        }
        self
    }

    fn mul(&self, o: &Poly) -> Self {
        let mut m = BTreeMap::new();
        for ((i, j), a) in &self.0 {
            for ((k, l), b) in &o.0 {
                *m.entry((i + k, j + l)).or_insert(0.0) += a * b;
            }
        }
        Poly(m)
    }

    fn scale(mut self, s: f64) -> Self {
        self.0.values_mut().for_each(|v| *v *= s);
        self
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn new(s: &str) -> Result<Self> {
        Ok(Parser { toks: tokenize(s)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{c}` at token {}", self.pos)))
        }
    }

    fn done(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(Error::Parse(format!("trailing input at {t:?}"))),
        }
    }

    /// `*` followed by a field name ends a weight in `sum(...)`.
    fn star_before_field(&self) -> bool {
        self.peek() == Some(&Tok::Sym('*'))
            && matches!(self.peek_at(1), Some(Tok::Ident(s)) if FIELD_NAMES.contains(&s.as_str()))
            && self.peek_at(2) == Some(&Tok::Sym('('))
    }

    fn expr(&mut self, vars: bool) -> Result<Poly> {
        let mut acc = self.term(vars)?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term(vars)?, 1.0);
            } else if self.eat('-') {
                acc = acc.add(&self.term(vars)?, -1.0);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self, vars: bool) -> Result<Poly> {
        let mut acc = self.unary(vars)?;
        loop {
            if self.star_before_field() {
                return Ok(acc);
            }
            if self.eat('*') {
                acc = acc.mul(&self.unary(vars)?);
            } else if self.eat('/') {
                let d = self.unary(vars)?;
                let d = d.as_constant().ok_or_else(|| Error::Parse("division by a polynomial".into()))?;
                acc = acc.scale(1.0 / d);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, vars: bool) -> Result<Poly> {
        if self.eat('-') {
            Ok(self.unary(vars)?.scale(-1.0))
        } else if self.eat('+') {
            self.unary(vars)
        } else {
            self.power(vars)
        }
    }

    fn power(&mut self, vars: bool) -> Result<Poly> {
        let base = self.atom(vars)?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.unary(false)?.as_constant().expect("constant without variables");
        if let Some(b) = base.as_constant() {
            return Ok(Poly::constant(b.powf(e)));
        }
        if e < 0.0 || e.fract() != 0.0 || e > 64.0 {
            return Err(Error::Parse(format!("bad polynomial exponent {e}")));
        }
        let mut acc = Poly::constant(1.0);
        for _ in 0..e as u32 {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    fn atom(&mut self, vars: bool) -> Result<Poly> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Poly::constant(v)),
            Some(Tok::Sym('(')) => {
                let v = self.expr(vars)?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "pi" => Ok(Poly::constant(std::f64::consts::PI)),
                "x" if vars => Ok(Poly::monomial(1, 0)),
                "y" if vars => Ok(Poly::monomial(0, 1)),
                "sqrt" | "sin" | "cos" | "tan" | "atan" | "ln" | "exp" => {
                    self.expect('(')?;
                    let a = self.expr(vars)?;
                    self.expect(')')?;
                    let a = a
                        .as_constant()
                        .ok_or_else(|| Error::Parse(format!("{name} of a non-constant")))?;
                    let v = match name.as_str() {
                        "sqrt" => a.sqrt(),
                        "sin" => a.sin(),
                        "cos" => a.cos(),
                        "tan" => a.tan(),
                        "atan" => a.atan(),
                        "ln" => a.ln(),
                        _ => a.exp(),
                    };
                    Ok(Poly::constant(v))
                }
                _ => Err(Error::UnknownName(name)),
            },
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }

    fn number(&mut self) -> Result<f64> {
        Ok(self.expr(false)?.as_constant().expect("no variables allowed"))
    }

    /// `key=value` pairs up to the closing parenthesis.
    fn keyed(&mut self, allowed: &[&str]) -> Result<Vec<(String, f64)>> {
        let mut out: Vec<(String, f64)> = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            let key = match self.next() {
                Some(Tok::Ident(k)) => k,
                t => return Err(Error::Parse(format!("expected key, got {t:?}"))),
            };
            if !allowed.contains(&key.as_str()) {
                return Err(Error::UnknownName(key));
            }
            if out.iter().any(|(k, _)| *k == key) {
                return Err(Error::Parse(format!("duplicate key `{key}`")));
            }
            self.expect('=')?;
            out.push((key, self.number()?));
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn field<T: Real>(&mut self) -> Result<ScalarField<T>> {
        let name = match self.next() {
            Some(Tok::Ident(n)) => n,
            t => return Err(Error::Parse(format!("expected field name, got {t:?}"))),
        };
        self.expect('(')?;
        match name.as_str() {
            "elliptic" => {
                const KEYS: [&str; 12] =
                    ["a1", "a2", "a3", "a4", "b1", "b2", "b3", "c1", "c2", "c3", "d1", "d2"];
                let mut v = [T::zero(); 12];
                for (k, x) in self.keyed(&KEYS)? {
                    v[KEYS.iter().position(|s| *s == k).unwrap()] = lit(x);
                }
                Ok(make_elliptic_field(EllipticCoeffs::new(
                    [v[0], v[1], v[2], v[3]],
                    [v[4], v[5], v[6]],
                    [v[7], v[8], v[9]],
                    [v[10], v[11]],
                )))
            }
            "hyperbolic" => {
                const REDUCED: [&str; 7] = ["a1", "a2", "a3", "b1", "b2", "c1", "c2"];
                const RADIAL: [&str; 12] = [
                    "alpha1", "alpha2", "alpha3", "alpha4", "beta1", "beta2", "beta3", "beta4",
                    "gamma1", "gamma2", "gamma3", "gamma4",
                ];
                let keys: Vec<&str> = REDUCED.iter().chain(RADIAL.iter()).copied().collect();
                let mut r = [T::zero(); 7];
                let mut full = [T::zero(); 12];
                for (k, x) in self.keyed(&keys)? {
                    if let Some(i) = REDUCED.iter().position(|s| *s == k) {
                        r[i] = lit(x);
                    } else {
                        full[RADIAL.iter().position(|s| *s == k).unwrap()] = lit(x);
                    }
                }
                let mut c = HyperbolicCoeffs::reduced(r[0], r[1], r[2], r[3], r[4], r[5], r[6]);
                for i in 0..4 {
                    c.alpha[i] = c.alpha[i] + full[i];
                    c.beta[i] = c.beta[i] + full[4 + i];
                    c.gamma[i] = c.gamma[i] + full[8 + i];
                }
                Ok(make_hyperbolic_field(c))
            }
            "parabolic" => {
                const KEYS: [&str; 12] = [
                    "alpha0", "alpha1", "alpha2", "alpha3", "beta0", "beta1", "beta2", "beta3",
                    "gamma0", "gamma1", "gamma2", "gamma3",
                ];
                let mut c = ParabolicCoeffs::default();
                for (k, x) in self.keyed(&KEYS)? {
                    let i = KEYS.iter().position(|s| *s == k).unwrap();
                    let slot = match i / 4 {
                        0 => &mut c.alpha,
                        1 => &mut c.beta,
                        _ => &mut c.gamma,
                    };
                    slot[i % 4] = lit(x);
                }
                Ok(make_parabolic_field(c))
            }
            "exceptional" => {
                let mut c = ExceptionalCoeffs::default();
                for (k, x) in self.keyed(&["a", "b", "c", "d", "A", "B", "C", "D"])? {
                    let slot = match k.as_str() {
                        "a" => &mut c.a,
                        "b" => &mut c.b,
                        "c" => &mut c.c,
                        "d" => &mut c.d,
                        "A" => &mut c.big_a,
                        "B" => &mut c.big_b,
                        "C" => &mut c.big_c,
                        _ => &mut c.big_d,
                    };
                    *slot = lit(x);
                }
                Ok(make_exceptional_field(c))
            }
            "poly" => {
                let p = self.expr(true)?;
                self.expect(')')?;
                let terms = p
                    .0
                    .into_iter()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|((i, j), c)| (lit::<T>(c), i, j))
                    .collect();
                Ok(make_polynomial(terms))
            }
            "sum" => {
                let mut terms = Vec::new();
                loop {
                    let starts_with_field = matches!(self.peek(), Some(Tok::Ident(s)) if FIELD_NAMES.contains(&s.as_str()))
                        && self.peek_at(1) == Some(&Tok::Sym('('));
                    let w = if starts_with_field {
                        1.0
                    } else {
                        let w = self.number()?;
                        self.expect('*')?;
                        w
                    };
                    terms.push((lit::<T>(w), self.field::<T>()?));
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
                Ok(make_sum(terms))
            }
            "remark" => {
                self.expect(')')?;
                Ok(make_remark_counterexample())
            }
            "kelvin" => {
                let f = self.field::<T>()?;
                self.expect(')')?;
                Ok(pushforward_inversion(&f))
            }
            _ => Err(Error::UnknownName(name)),
        }
    }
}

/// Evaluates a constant expression such as `-1/(2*sqrt(2))`.
pub fn parse_number(s: &str) -> Result<f64> {
    let mut p = Parser::new(s)?;
    let v = p.number()?;
    p.done()?;
    Ok(v)
}

/// Parses a field specification.
pub fn parse_field<T: Real>(s: &str) -> Result<ScalarField<T>> {
    let mut p = Parser::new(s)?;
    let f = p.field()?;
    p.done()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1+2*3").unwrap(), 7.0);
        assert!((parse_number("-1/(2*sqrt(2))").unwrap() + 0.5 / 2f64.sqrt()).abs() < 1e-16);
        assert_eq!(parse_number("2^3").unwrap(), 8.0);
        assert_eq!(parse_number("1.5e-3").unwrap(), 1.5e-3);
        assert!((parse_number("cos(pi)").unwrap() + 1.0).abs() < 1e-16);
        assert!(parse_number("x").is_err());
        assert!(parse_number("1 2").is_err());
    }

    #[test]
    fn fields_evaluate() {
        let f = parse_field::<f64>("elliptic(a1=1, a3=-1)").unwrap();
        assert!((f.value(1.0, 1.0).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let g = parse_field::<f64>("poly(x^2*y - 3*(x+y)^2)").unwrap();
        let (x, y) = (1.3, -0.4);
        let want = x * x * y - 3.0 * (x + y) * (x + y);
        assert!((g.value(x, y).unwrap() - want).abs() < 1e-13);
        let s = parse_field::<f64>("sum(0.5*poly(x), 2*poly(y), poly(1))").unwrap();
        assert!((s.value(2.0, 3.0).unwrap() - 8.0).abs() < 1e-15);
        let k = parse_field::<f64>("kelvin(poly(1))").unwrap();
        assert!((k.value(1.0, 2.0).unwrap() - 5.0).abs() < 1e-14);
        let r = parse_field::<f64>(" remark ( ) ").unwrap();
        assert_eq!(r.value(0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert_eq!(
            parse_field::<f64>("elliptic(a9=1)").unwrap_err(),
            Error::UnknownName("a9".into())
        );
        assert!(parse_field::<f64>("hyperbolic(a1=1,a1=2)").is_err());
        assert!(parse_field::<f64>("blob(a=1)").is_err());
        assert!(parse_field::<f64>("poly(x/y)").is_err());
    }

    #[test]
    fn hyperbolic_keys_combine() {
        let a = parse_field::<f64>("hyperbolic(a1=1, gamma1=2)").unwrap();
        let b = parse_field::<f64>("hyperbolic(gamma4=2, gamma1=2)").unwrap();
        assert!((a.value(0.7, 0.2).unwrap() - b.value(0.7, 0.2).unwrap()).abs() < 1e-14);
    }
}
