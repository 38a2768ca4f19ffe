//! Exact probabilities. Serialized as `"num/den"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Prob = BigRational;

pub fn ratio(n: i64, d: i64) -> Prob {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn one() -> Prob {
    Prob::one()
}

pub fn zero() -> Prob {
    Prob::zero()
}

/// Accepts `n/d`, `n` or a finite decimal such as `0.25`.
pub fn parse(text: &str) -> Option<Prob> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().ok()?;
        let num = whole.abs() * &scale + f;
        let num = if neg { -num } else { num };
        return Some(BigRational::new(num, scale));
    }
    let n: BigInt = t.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Canonical `num/den` form (always with a denominator).
pub fn format(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

pub fn sign(p: &Prob) -> std::cmp::Ordering {
    p.cmp(&Prob::zero())
}
