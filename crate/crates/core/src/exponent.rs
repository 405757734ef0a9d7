//! Exponents `p` carried as exact rationals where possible.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent `p`, exact when it was given as a fraction or a finite decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    exact: Option<Ratio<i64>>,
    value: f64,
}

impl Exponent {
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let r = Ratio::new(num, den);
        Ok(Self { exact: Some(r), value: ratio_to_f64(r) })
    }

    /// A floating exponent; `2.0 / 3.0` and friends are recognized as their rationals.
    pub fn from_f64(value: f64) -> Self {
        let exact =
            [(1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)].into_iter().map(|(n, d)| Ratio::new(n, d)).find(|&r| ratio_to_f64(r) == value);
        Self { exact, value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }

    pub fn is_exactly(&self, num: i64, den: i64) -> bool {
        self.exact == Some(Ratio::new(num, den))
    }
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl From<f64> for Exponent {
    fn from(value: f64) -> Self {
        Self::from_f64(value)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value)
    }
}

fn parse_err(input: &str, reason: &str) -> Error {
    Error::Parse { input: input.to_string(), reason: reason.to_string() }
}

/// Parses `"a/b"`, `"0.25"`, `"3"` or `"1e-3"`; only the exponent form loses exactness.
impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| parse_err(s, "bad numerator"))?;
            let d: i64 = d.trim().parse().map_err(|_| parse_err(s, "bad denominator"))?;
            if d == 0 {
                return Err(parse_err(s, "zero denominator"));
            }
            return Self::from_ratio(n, d);
        }
        if let Some(r) = parse_decimal(t) {
            return Ok(Self { exact: Some(r), value: ratio_to_f64(r) });
        }
        let value: f64 = t.parse().map_err(|_| parse_err(s, "not a number"))?;
        if !value.is_finite() {
            return Err(parse_err(s, "not finite"));
        }
        Ok(Self::from_f64(value))
    }
}

fn parse_decimal(t: &str) -> Option<Ratio<i64>> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let den = 10i64.checked_pow(frac.len() as u32)?;
    Some(Ratio::new(if neg { -num } else { num }, den))
}

/// The grid `start:stop:step`, inclusive of `stop` when it is hit exactly.
pub fn parse_grid(spec: &str) -> Result<Vec<Exponent>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(parse_err(spec, "expected start:stop:step"));
    };
    let (start, stop, step): (Exponent, Exponent, Exponent) = (start.parse()?, stop.parse()?, step.parse()?);
    match (start.exact, stop.exact, step.exact) {
        (Some(a), Some(b), Some(h)) => {
            if h <= Ratio::from_integer(0) {
                return Err(parse_err(spec, "step must be positive"));
            }
            let mut out = Vec::new();
            let mut x = a;
            while x <= b {
                out.push(Exponent { exact: Some(x), value: ratio_to_f64(x) });
                x += h;
            }
            Ok(out)
        }
        _ => {
            if !(step.value > 0.0) {
                return Err(parse_err(spec, "step must be positive"));
            }
            let n = ((stop.value - start.value) / step.value + 1e-9).floor();
            if n < 0.0 {
                return Ok(Vec::new());
            }
            Ok((0..=n as usize).map(|i| Exponent::from_f64(start.value + i as f64 * step.value)).collect())
        }
    }
}
