//! Exact rational arithmetic for the quantitative skeleton: search-depth
//! iteration, the total-length cap for threshold violations, and the
//! descent bound `c + k/(1-r)`.
//!
//! Every value here is an exact rational; decimal output is display-only.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator. Backed by `num::BigRational`, which maintains both
/// invariants on construction.
pub type ExactRational = BigRational;

/// Builds a rational from machine integers.
pub fn ratio(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats a rational as `numerator/denominator`, denominator always explicit.
pub fn fraction_string(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal approximation to `places` digits (round half away from zero).
pub fn decimal_string(r: &ExactRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = r * BigRational::from_integer(scale.clone());
    let num = scaled.numer();
    let den = scaled.denom();
    let two = BigInt::from(2);
    let rounded: BigInt = if num.is_negative() {
        (num * &two - den) / (den * &two)
    } else {
        (num * &two + den) / (den * &two)
    };
    let sign = if rounded.is_negative() { "-" } else { "" };
    let abs = rounded.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    format!("{sign}{int_part}.{frac_part:0>width$}", width = places as usize)
}

/// Parses `"num/den"`, a decimal string such as `"1.713"`, or a plain
/// integer, always into an exact rational.
pub fn parse_exact_rational(text: &str) -> Result<ExactRational> {
    let text = text.trim();
    let bad = |t: &str| Error::WordParse(format!("cannot parse rational from {t:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad(text))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad(text))?;
        if d.is_zero() {
            return Err(Error::InvalidConfig("zero denominator".into()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, f)) = text.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(text));
        }
        let negative = i.trim_start().starts_with('-');
        let int: BigInt = if i == "-" || i.is_empty() {
            BigInt::zero()
        } else {
            i.parse().map_err(|_| bad(text))?
        };
        let frac: BigInt = f.parse().map_err(|_| bad(text))?;
        let scale = BigInt::from(10u32).pow(f.len() as u32);
        let mut num = int.abs() * &scale + frac;
        if negative {
            num = -num;
        }
        return Ok(BigRational::new(num, scale));
    }
    let n: BigInt = text.parse().map_err(|_| bad(text))?;
    Ok(BigRational::from_integer(n))
}

/// One step of the search-depth recursion: `g(x) = floor((x + 2(l-1)) / l)`.
/// The default image length `l = 13` gives the constant 24.
pub fn g_apply(x: u64, image_len: u64) -> Result<u64> {
    if image_len < 2 {
        return Err(Error::InvalidConfig("image length must be >= 2".into()));
    }
    Ok((x + 2 * (image_len - 1)) / image_len)
}

/// Result of iterating `g` until the value drops to 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthResult {
    /// Minimal `t` with `g^t(L) <= 2`.
    pub t_min: u32,
    /// The iterate sequence `L, g(L), g^2(L), ...` ending at the first
    /// value `<= 2`.
    pub iterates: Vec<u64>,
    /// `13^t_min * 11`: length of the prefix that covers every factor of
    /// length `L` up to shift-equivalence.
    pub prefix_length: u128,
}

impl DepthResult {
    /// Prefix length for an arbitrary iteration count (the pipeline's
    /// conservative default is `t = 5`).
    pub fn prefix_length_for(t: u32) -> u128 {
        13u128.pow(t) * 11
    }
}

/// Iterates `g` (with `l = 13`) from `L` until the value is `<= 2`.
///
/// `g` strictly decreases above 2 and fixes 2, so this always terminates.
pub fn depth(length: u64) -> DepthResult {
    let mut iterates = vec![length];
    let mut t_min = 0u32;
    let mut x = length;
    while x > 2 {
        x = g_apply(x, 13).expect("l = 13");
        iterates.push(x);
        t_min += 1;
    }
    DepthResult {
        t_min,
        iterates,
        prefix_length: DepthResult::prefix_length_for(t_min),
    }
}

/// Strict upper bound `U` on the total length of an Abelian power whose
/// exponent exceeds `threshold` while `|x1| <= max_x1`: every such power has
/// `|x1 y x2| < U`, and `U` is least with that property.
pub fn length_cap(threshold: &ExactRational, max_x1: u64) -> Result<u64> {
    let one = BigRational::one();
    let two = &one + &one;
    if *threshold <= one || *threshold >= two {
        return Err(Error::InvalidConfig(format!(
            "threshold must lie strictly between 1 and 2, got {}",
            fraction_string(threshold)
        )));
    }
    if max_x1 == 0 {
        return Err(Error::InvalidConfig("max_x1 must be positive".into()));
    }
    // exponent > c forces total * (c - 1) < c * |x1| <= c * max_x1,
    // so U = ceil(c * max_x1 / (c - 1)).
    let c = threshold;
    let sup = c * BigRational::from_integer(BigInt::from(max_x1)) / (c - &one);
    let u = sup.ceil().to_integer();
    u64::try_from(&u).map_err(|_| Error::InvalidConfig("length cap overflows u64".into()))
}

/// Inputs of the descent bound.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// Descent scale: the finite search certifies all powers with
    /// `|x1| <= 24n`.
    pub n: ExactRational,
    /// Verified exponent cap under that search.
    pub c: ExactRational,
}

/// The geometric-series term `k/(1-r)` with `k = 3/n`, `r = (n+1)/(13n)`,
/// simplified to `39/(12n-1)`. Returns an error unless `12n - 1 > 0`.
pub fn simplify_bound_term(n: &ExactRational) -> Result<ExactRational> {
    let twelve_n_minus_1 = n * BigRational::from_integer(BigInt::from(12)) - BigRational::one();
    if twelve_n_minus_1 <= BigRational::zero() {
        return Err(Error::InvalidConfig(format!(
            "need n > 1/12, got {}",
            fraction_string(n)
        )));
    }
    let simplified = BigRational::from_integer(BigInt::from(39)) / &twelve_n_minus_1;
    // Both algebraic routes must agree exactly.
    let k = BigRational::from_integer(BigInt::from(3)) / n;
    let r = (n + BigRational::one()) / (n * BigRational::from_integer(BigInt::from(13)));
    let direct = &k / (BigRational::one() - &r);
    if simplified != direct {
        return Err(Error::Inconsistency(format!(
            "39/(12n-1) = {} but k/(1-r) = {}",
            fraction_string(&simplified),
            fraction_string(&direct)
        )));
    }
    Ok(simplified)
}

/// The exponent bound `c + k/(1-r)` transferred from the finite search to
/// the full fixed point. Requires `n > 1`.
pub fn bound(inputs: &BoundInputs) -> Result<ExactRational> {
    if inputs.n <= BigRational::one() {
        return Err(Error::InvalidConfig(format!(
            "descent bound needs n > 1, got {}",
            fraction_string(&inputs.n)
        )));
    }
    Ok(&inputs.c + simplify_bound_term(&inputs.n)?)
}
