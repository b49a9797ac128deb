use super::Q;
use num::{One, Signed, Zero};

/// Univariate polynomial, coefficients from the constant term upwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    pub coeffs: Vec<Q>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * super::q(i as i64)).collect())
    }

    /// Remainder of Euclidean division.
    pub fn rem(&self, d: &UPoly) -> UPoly {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = d.degree().unwrap();
        let lead = d.leading();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let f = r.last().unwrap() / &lead;
            for (i, c) in d.coeffs.iter().enumerate() {
                r[k + i] -= &f * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.leading();
        UPoly::new(a.coeffs.iter().map(|c| c / &l).collect())
    }

    /// No repeated complex roots.
    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree().unwrap_or(0) == 0
    }

    /// `q(x)` with `self(λ) = q(λ²)`, when `self` is even.
    pub fn even_part_in_square(&self) -> Option<UPoly> {
        if self.coeffs.iter().enumerate().any(|(i, c)| i % 2 == 1 && !c.is_zero()) {
            return None;
        }
        Some(UPoly::new(self.coeffs.iter().step_by(2).cloned().collect()))
    }

    fn sturm_chain(&self) -> Vec<UPoly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(UPoly::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        chain
    }

    fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
        let nz: Vec<i8> = signs.filter(|s| *s != 0).collect();
        nz.windows(2).filter(|w| w[0] != w[1]).count()
    }

    fn sign(q: &Q) -> i8 {
        if q.is_positive() {
            1
        } else if q.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Number of distinct real roots in `(a, b]`; `None` bounds mean ±∞.
    pub fn count_real_roots(&self, a: Option<&Q>, b: Option<&Q>) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let chain = self.sturm_chain();
        let at = |x: Option<&Q>, minus_inf: bool| -> usize {
            Self::sign_changes(chain.iter().map(|p| match x {
                Some(x) => Self::sign(&p.eval(x)),
                None => {
                    let s = Self::sign(&p.leading());
                    let odd = p.degree().unwrap_or(0) % 2 == 1;
                    if minus_inf && odd {
                        -s
                    } else {
                        s
                    }
                }
            }))
        };
        at(a, true).saturating_sub(at(b, false))
    }

    pub fn one() -> UPoly {
        UPoly::new(vec![Q::one()])
    }
}

#[cfg(test)]
mod tests {
    use super::super::q;
    use super::*;

    fn p(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| q(x)).collect())
    }

    #[test]
    fn sturm_counts() {
        // (x + 2)(x − 1)(x − 3) = x³ − 2x² − 5x + 6
        let f = p(&[6, -5, -2, 1]);
        assert_eq!(f.count_real_roots(None, None), 3);
        assert_eq!(f.count_real_roots(None, Some(&q(0))), 1);
        assert_eq!(f.count_real_roots(Some(&q(0)), None), 2);
        // x² + 1 has none
        assert_eq!(p(&[1, 0, 1]).count_real_roots(None, None), 0);
    }

    #[test]
    fn squarefree_and_gcd() {
        assert!(p(&[-1, 0, 1]).is_squarefree());
        assert!(!p(&[1, -2, 1]).is_squarefree());
        assert_eq!(p(&[-1, 0, 1]).gcd(&p(&[1, 1])), p(&[1, 1]));
    }

    #[test]
    fn even_polynomial_in_square() {
        assert_eq!(p(&[4, 0, -5, 0, 1]).even_part_in_square(), Some(p(&[4, -5, 1])));
        assert_eq!(p(&[1, 1]).even_part_in_square(), None);
    }
}
