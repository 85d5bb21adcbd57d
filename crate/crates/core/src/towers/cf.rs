//! Simple continued fractions `[0; a_1, a_2, …]` with exact convergents.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A finite prefix `(a_0, a_1, …, a_K)` of a continued fraction of a number
/// in `(0, 1)`: `a_0 = 0` and `a_j ≥ 1` for `j ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContinuedFraction {
    quotients: Vec<u64>,
}

impl ContinuedFraction {
    pub fn new(quotients: Vec<u64>) -> Result<Self> {
        match quotients.first() {
            None => return Err(Error::InvalidQuotient { index: 0, value: "missing a_0".into() }),
            Some(&a0) if a0 != 0 => return Err(Error::InvalidQuotient { index: 0, value: a0.to_string() }),
            _ => {}
        }
        if let Some(j) = quotients.iter().skip(1).position(|&a| a == 0) {
            return Err(Error::InvalidQuotient { index: j + 1, value: "0".into() });
        }
        Ok(ContinuedFraction { quotients })
    }

    /// Validates signed input, reporting negative entries as invalid quotients.
    pub fn from_signed(values: &[i64]) -> Result<Self> {
        let quotients = values
            .iter()
            .enumerate()
            .map(|(index, &v)| u64::try_from(v).map_err(|_| Error::InvalidQuotient { index, value: v.to_string() }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(quotients)
    }

    /// Parses a comma-separated list such as `"0,1,1,2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (index, tok) in text.split(',').enumerate() {
            let tok = tok.trim();
            let v: i128 = tok.parse().map_err(|_| Error::InvalidQuotient { index, value: tok.to_string() })?;
            let v = u64::try_from(v).map_err(|_| Error::InvalidQuotient { index, value: tok.to_string() })?;
            values.push(v);
        }
        Self::new(values)
    }

    /// `(0, 1, 1, …, 1)` with `k` ones.
    pub fn golden(k: usize) -> Self {
        let mut q = vec![1u64; k + 1];
        q[0] = 0;
        ContinuedFraction { quotients: q }
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    /// Index `K` of the last known quotient.
    pub fn last_index(&self) -> usize {
        self.quotients.len() - 1
    }

    /// Exact convergents `(p_n, q_n)` for `n = 0..=K`.
    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        let a = &self.quotients;
        let mut out = Vec::with_capacity(a.len());
        out.push((BigInt::from(a[0]), BigInt::one()));
        if a.len() > 1 {
            out.push((BigInt::from(a[0]) * BigInt::from(a[1]) + 1, BigInt::from(a[1])));
        }
        for n in 2..a.len() {
            let an = BigInt::from(a[n]);
            let p = &an * &out[n - 1].0 + &out[n - 2].0;
            let q = &an * &out[n - 1].1 + &out[n - 2].1;
            out.push((p, q));
        }
        out
    }

    /// `q_n` for `n ≥ -1`, with `q_{-1} = 0`.
    pub fn q(&self, n: isize) -> Result<BigInt> {
        if n < 0 {
            return Ok(BigInt::zero());
        }
        let n = n as usize;
        if n > self.last_index() {
            return Err(Error::Depth { needed: n + 1, available: self.quotients.len() });
        }
        Ok(self.convergents().swap_remove(n).1)
    }

    /// Rational value `p_K / q_K` of the whole prefix.
    pub fn value(&self) -> BigRational {
        let (p, q) = self.convergents().pop().expect("nonempty");
        BigRational::new(p, q)
    }

    /// Interval `[center - w, center + w]` containing every number whose
    /// expansion starts with these quotients: `center = p_K/q_K`,
    /// `w = 1/(q_K (q_K + q_{K-1}))`.
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        let conv = self.convergents();
        let k = conv.len() - 1;
        let (p_k, q_k) = conv[k].clone();
        let q_prev = if k == 0 { BigInt::zero() } else { conv[k - 1].1.clone() };
        let width = BigRational::new(BigInt::one(), &q_k * (&q_k + q_prev));
        (BigRational::new(p_k, q_k), width)
    }

    /// Determinant `p_{n+1} q_n - p_n q_{n+1}` for each consecutive pair.
    pub fn determinants(&self) -> Vec<BigInt> {
        let c = self.convergents();
        c.windows(2).map(|w| &w[1].0 * &w[0].1 - &w[0].0 * &w[1].1).collect()
    }
}

/// Euclidean expansion of a rational in `(0, 1)`, truncated to `max_terms`
/// quotients after `a_0`.
pub fn cf_expand(x: &BigRational, max_terms: usize) -> Result<ContinuedFraction> {
    if !x.is_positive() || *x >= BigRational::one() {
        return Err(Error::Domain(format!("{x} is not in (0, 1)")));
    }
    let mut quotients = vec![0u64];
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    // x = num/den < 1, so the next quotient is floor(den/num).
    while !num.is_zero() && quotients.len() <= max_terms {
        let (a, r) = den.div_rem(&num);
        let a = u64::try_from(&a).map_err(|_| Error::Domain(format!("partial quotient {a} exceeds 64 bits")))?;
        quotients.push(a);
        den = num;
        num = r;
    }
    ContinuedFraction::new(quotients)
}

/// Golden dominator `B(n) = 1/(q_n² + q_{n-1}²)` for the all-ones expansion;
/// `B(0) = 1`.
pub fn golden_dominator(n: usize) -> BigRational {
    let cf = ContinuedFraction::golden(n.max(1));
    let conv = cf.convergents();
    let qn = &conv[n].1;
    let qp = if n == 0 { BigInt::zero() } else { conv[n - 1].1.clone() };
    BigRational::new(BigInt::one(), qn * qn + &qp * &qp)
}

/// Exact `1/(q_n² + q_{n-1}²)` for a given expansion.
pub fn dimension_weight(cf: &ContinuedFraction, n: usize) -> Result<BigRational> {
    let qn = cf.q(n as isize)?;
    let qp = cf.q(n as isize - 1)?;
    Ok(BigRational::new(BigInt::one(), &qn * &qn + &qp * &qp))
}
