//! Argument parsing helpers.

use std::path::Path;
use std::str::FromStr;

use hecke_core::{Error, HeckeElement, LaurentCoeff, Result, WeightVec};
use num_complex::Complex64;
use num_rational::BigRational;

pub fn weight(s: &str) -> Result<WeightVec> {
    WeightVec::from_str(s)
}

/// `a`, `a/b` or a decimal, as an exact rational.
pub fn rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Ok(r) = BigRational::from_str(t) {
        return Ok(r);
    }
    let f: f64 = t.parse().map_err(|_| Error::Parse(format!("not a rational: '{s}'")))?;
    BigRational::from_float(f).ok_or_else(|| Error::Parse(format!("not a rational: '{s}'")))
}

/// A half-integer `s` as `h = 2s`.
pub fn half_integer(s: &str) -> Result<i64> {
    let r = rational(s)?;
    let h = &r * BigRational::from_integer(2.into());
    if !h.is_integer() {
        return Err(Error::Parse(format!("specialization {s} is not a half-integer")));
    }
    h.to_integer().try_into().map_err(|_| Error::OutOfRange(format!("specialization {s}")))
}

/// `1.5`, `-2i`, `0.3-0.1i`, `1e-3+2.5i`.
pub fn complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("not a complex number: '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // split at the last sign that is not an exponent sign or the leading one
        let bytes = body.as_bytes();
        let mut cut = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                cut = Some(i);
                break;
            }
        }
        let (re, im) = match cut {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse().map_err(|_| bad())?,
        };
        return Ok(Complex64::new(re.parse().map_err(|_| bad())?, im));
    }
    Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
}

pub fn complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(complex).collect()
}

/// A Hecke element: either a single cell given by its weight, or a JSON
/// file in the element schema.
pub fn element(s: &str, sigma_grade: impl Fn(&WeightVec) -> Result<i64>) -> Result<HeckeElement> {
    if Path::new(s).is_file() {
        let text = std::fs::read_to_string(s)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        return HeckeElement::from_json(&v);
    }
    let mu = weight(s)?;
    Ok(HeckeElement::term(sigma_grade(&mu)?, mu, LaurentCoeff::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_numbers() {
        assert_eq!(complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(complex("0.3-0.1i").unwrap(), Complex64::new(0.3, -0.1));
        assert_eq!(complex("1e-3+2.5i").unwrap(), Complex64::new(1e-3, 2.5));
        assert_eq!(complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert!(complex("x").is_err());
    }

    #[test]
    fn half_integers() {
        assert_eq!(half_integer("-1/2").unwrap(), -1);
        assert_eq!(half_integer("3").unwrap(), 6);
        assert_eq!(half_integer("1.5").unwrap(), 3);
        assert!(half_integer("1/3").is_err());
    }
}
