use crate::error::{Error, Result};
use crate::exact::{q, to_f64, Q};
use num::{BigInt, One, Signed, Zero};
use rand::Rng;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse multivariate polynomial with rational coefficients. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Q::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Q) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length");
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Q)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        assert_eq!(e.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Lowest total degree present.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn homogeneous(&self, d: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| e.iter().sum::<u32>() == d).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, Q::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * q(e[i] as i64));
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.nvars).map(|i| self.partial(i)).collect()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(c.clone(), |acc, (&k, xi)| acc * num::pow(xi.clone(), k as usize)))
            .fold(Q::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| e.iter().zip(x).fold(to_f64(c), |acc, (&k, xi)| acc * xi.powi(k as i32))).sum()
    }

    /// `p(r x)`: each monomial of degree d picks up `r^d`.
    pub fn rescale(&self, r: &Q) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let d: u32 = e.iter().sum();
            out.add_term(e.clone(), c * num::pow(r.clone(), d as usize));
        }
        out
    }

    /// Same polynomial in `nvars + extra` variables.
    pub fn extend_vars(&self, extra: usize) -> Self {
        Self {
            nvars: self.nvars + extra,
            terms: self.terms.iter().map(|(e, c)| (e.iter().cloned().chain(std::iter::repeat_n(0, extra)).collect(), c.clone())).collect(),
        }
    }

    /// Substitutes `x_i ↦ value` and drops the variable.
    pub fn substitute_last(&self, value: &Q) -> Self {
        let n = self.nvars - 1;
        let mut out = Self::zero(n);
        for (e, c) in &self.terms {
            out.add_term(e[..n].to_vec(), c * num::pow(value.clone(), e[n] as usize));
        }
        out
    }

    /// Random polynomial with `terms` monomials of total degree ≤ `max_degree`
    /// and coefficients `p/q`, `|p| ≤ 9`, `1 ≤ q ≤ 4`.
    pub fn random<R: Rng>(nvars: usize, max_degree: u32, terms: usize, rng: &mut R) -> Self {
        let mut out = Self::zero(nvars);
        for _ in 0..terms {
            let degree = rng.random_range(0..=max_degree);
            let mut e = vec![0u32; nvars];
            for _ in 0..degree {
                e[rng.random_range(0..nvars)] += 1;
            }
            let c = Q::new(BigInt::from(rng.random_range(-9i64..=9)), BigInt::from(rng.random_range(1i64..=4)));
            out.add_term(e, c);
        }
        out
    }

    /// `[[exponents…], numerator, denominator]` per term; integers beyond
    /// `i64` are written as decimal strings.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| Value::Array(vec![serde_json::json!(e), bigint_json(c.numer()), bigint_json(c.denom())]))
                .collect(),
        )
    }

    pub fn from_json(nvars: usize, v: &Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("polynomial must be a JSON list".into()))?;
        let mut out = Self::zero(nvars);
        for t in arr {
            let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| Error::Parse("term must be [exponents, num, den]".into()))?;
            let e: Vec<u32> = serde_json::from_value(t[0].clone())?;
            if e.len() != nvars {
                return Err(Error::Parse(format!("exponent vector of length {} in {nvars} variables", e.len())));
            }
            let num = json_bigint(&t[1])?;
            let den = json_bigint(&t[2])?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            out.add_term(e, Q::new(num, den));
        }
        Ok(out)
    }
}

fn bigint_json(b: &BigInt) -> Value {
    match i64::try_from(b) {
        Ok(v) => Value::from(v),
        Err(_) => Value::String(b.to_string()),
    }
}

fn json_bigint(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| Error::Parse(format!("non-integer {n}"))),
        Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}"))),
        _ => Err(Error::Parse("integer expected".into())),
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { " - " } else if k > 0 { " + " } else { "" };
            write!(f, "{}{}", if k == 0 && c.is_negative() { "-" } else { sign }, c.abs())?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{p}")?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut acc: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { nvars: self.nvars, terms: acc }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;

    #[test]
    fn arithmetic_and_canonical_form() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p, &x.pow(2) - &y.pow(2));
        assert!((&p - &p).is_zero());
        assert_eq!((&p - &p).len(), 0);
        assert_eq!(p.partial(0), x.scale(&q(2)));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(&[q(3), q(1)]), q(8));
    }

    #[test]
    fn rescale_multiplies_by_degree_power() {
        let x = Polynomial::var(1, 0);
        let p = &x.pow(2) + &x.pow(3);
        let r = qf(1, 2);
        assert_eq!(p.rescale(&r), &x.pow(2).scale(&qf(1, 4)) + &x.pow(3).scale(&qf(1, 8)));
    }

    #[test]
    fn json_round_trip() {
        let p = Polynomial::from_terms(2, [(vec![1, 2], qf(-3, 7)), (vec![0, 0], q(5))]);
        let v = p.to_json();
        assert_eq!(Polynomial::from_json(2, &v).unwrap(), p);
        assert!(matches!(Polynomial::from_json(3, &v), Err(Error::Parse(_))));
        let big = Polynomial::constant(1, Q::from_integer(BigInt::from(10).pow(30)));
        assert_eq!(Polynomial::from_json(1, &big.to_json()).unwrap(), big);
    }
}
