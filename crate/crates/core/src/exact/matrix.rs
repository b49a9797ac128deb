use super::{Q, UPoly};
use crate::error::{Error, Result};
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Q) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, vals: &[i64]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| super::q(vals[i * cols + j]))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { data: self.data.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(super::to_f64).collect()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Q::zero(), |acc, j| acc + &self[(i, j)] * &v[j]))
            .collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols)).fold(Q::zero(), |acc, i| acc + &self[(i, i)])
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, row * a.cols + j);
                }
            }
            let inv = a[(row, col)].recip();
            for j in col..a.cols {
                let v = &a[(row, j)] * &inv;
                a[(row, j)] = v;
            }
            for r in 0..a.rows {
                if r != row && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in col..a.cols {
                        let v = &a[(r, j)] - &f * &a[(row, j)];
                        a[(r, j)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the kernel, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let aug = QMatrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Q::one()
            } else {
                Q::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular(format!("{n}x{n} matrix has rank < {n}")));
        }
        Ok(QMatrix::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    pub fn determinant(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Q::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return Q::zero();
            };
            if p != col {
                for j in 0..n {
                    a.data.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let piv = a[(col, col)].clone();
            det *= &piv;
            for r in col + 1..n {
                if !a[(r, col)].is_zero() {
                    let f = &a[(r, col)] / &piv;
                    for j in col..n {
                        let v = &a[(r, j)] - &f * &a[(col, j)];
                        a[(r, j)] = v;
                    }
                }
            }
        }
        det
    }

    /// Moore–Penrose pseudoinverse from the rank factorization `A = C F`:
    /// `A⁺ = Fᵀ (F Fᵀ)⁻¹ (Cᵀ C)⁻¹ Cᵀ`.
    pub fn pseudo_inverse(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let k = pivots.len();
        if k == 0 {
            return QMatrix::zeros(self.cols, self.rows);
        }
        let c = QMatrix::from_fn(self.rows, k, |i, j| self[(i, pivots[j])].clone());
        let f = QMatrix::from_fn(k, self.cols, |i, j| r[(i, j)].clone());
        let ft = f.transpose();
        let ct = c.transpose();
        let ffi = (&f * &ft).inverse().expect("F has full row rank");
        let cci = (&ct * &c).inverse().expect("C has full column rank");
        &(&(&ft * &ffi) * &cci) * &ct
    }

    /// Characteristic polynomial `det(λ I − A)` by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> UPoly {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = QMatrix::zeros(n, n);
        let mut c_prev = Q::one();
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            m = &(self * &m) + &QMatrix::identity(n).scale(&c_prev);
            let am = self * &m;
            let ck = -am.trace() / super::q(k as i64);
            coeffs[n - k] = ck.clone();
            c_prev = ck;
        }
        UPoly::new(coeffs)
    }

    /// Block diagonal matrix.
    pub fn block_diag(blocks: &[QMatrix]) -> QMatrix {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mcols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = QMatrix::zeros(n, mcols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn max_abs(&self) -> Q {
        self.data.iter().map(|x| x.abs()).fold(Q::zero(), |a, b| if b > a { b } else { a })
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = QMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    if !rhs[(k, j)].is_zero() {
                        let v = &out[(i, j)] + a * &rhs[(k, j)];
                        out[(i, j)] = v;
                    }
                }
            }
        }
        out
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{q, qf};
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let a = QMatrix::from_i64(3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, QMatrix::identity(3));
        assert_eq!(a.determinant(), q(18));
        let s = QMatrix::from_i64(2, 2, &[1, 2, 2, 4]);
        assert!(matches!(s.inverse(), Err(Error::Singular(_))));
        assert_eq!(s.determinant(), q(0));
    }

    #[test]
    fn nullspace_and_rank() {
        let a = QMatrix::from_i64(2, 4, &[1, 2, 0, 1, 0, 0, 1, 3]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(a.mul_vec(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn pseudo_inverse_penrose_conditions() {
        let a = QMatrix::from_i64(3, 4, &[1, 2, 3, 4, 2, 4, 6, 8, 0, 1, 0, -1]);
        let p = a.pseudo_inverse();
        assert_eq!(&(&a * &p) * &a, a);
        assert_eq!(&(&p * &a) * &p, p);
        let ap = &a * &p;
        assert_eq!(ap.transpose(), ap);
        let pa = &p * &a;
        assert_eq!(pa.transpose(), pa);
    }

    #[test]
    fn charpoly_of_rotation_and_diag() {
        let j = QMatrix::from_i64(2, 2, &[0, -1, 1, 0]);
        assert_eq!(j.charpoly().coeffs, vec![q(1), q(0), q(1)]);
        let d = QMatrix::from_fn(3, 3, |i, k| if i == k { qf(i as i64 + 1, 2) } else { q(0) });
        // (λ − 1/2)(λ − 1)(λ − 3/2)
        let c = d.charpoly();
        assert!(c.eval(&qf(1, 2)).is_zero() && c.eval(&q(1)).is_zero() && c.eval(&qf(3, 2)).is_zero());
        assert_eq!(c.degree(), Some(3));
    }
}
