//! Dense matrices over the rationals.
//!
//! Everything here is exact: ranks and kernels never depend on a floating
//! point tolerance, so vertex/facet decisions are reproducible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = rat(v);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Keeps only the listed rows, in the listed order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), self.cols);
        for (new_i, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                m[(new_i, j)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for j in col..m.cols {
                let v = &m[(row, j)] * &inv;
                m[(row, j)] = v;
            }
            for i in 0..m.rows {
                if i == row || m[(i, col)].is_zero() {
                    continue;
                }
                let factor = m[(i, col)].clone();
                for j in col..m.cols {
                    if m[(row, j)].is_zero() {
                        continue;
                    }
                    let delta = &factor * &m[(row, j)];
                    m[(i, j)] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : A x = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let is_pivot: Vec<bool> = (0..self.cols).map(|c| pivots.contains(&c)).collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Rational::zero(); self.cols];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Indices of a maximal linearly independent subset of the columns.
    pub fn independent_columns(&self) -> Vec<usize> {
        self.rref().1
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scales a rational vector to the primitive integer vector on the same ray.
/// The zero vector is returned unchanged.
pub fn primitive(v: &[Rational]) -> Vec<Rational> {
    if v.iter().all(Zero::is_zero) {
        return v.to_vec();
    }
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let gcd = ints
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.into_iter()
        .map(|x| BigRational::from_integer(x / &gcd))
        .collect()
}

/// Formats as `p/q`, or `p` when the denominator is one.
pub fn rat_string(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

/// Searches for `a >= 0`, `sum(a) = 1` with `a^T m = 0` using an exact
/// phase-one simplex (Bland's rule). Returns a feasible point if one exists.
pub fn nonnegative_left_kernel_point(m: &RationalMatrix) -> Option<Vec<Rational>> {
    let n = m.rows();
    if n == 0 {
        return None;
    }
    // Equality system A a = b with rows: m^T (cols of m) then the normalisation row.
    let eq_rows = m.cols() + 1;
    let mut a = RationalMatrix::zeros(eq_rows, n);
    let mut b = vec![Rational::zero(); eq_rows];
    for j in 0..m.cols() {
        for i in 0..n {
            a[(j, i)] = m[(i, j)].clone();
        }
    }
    for i in 0..n {
        a[(eq_rows - 1, i)] = Rational::one();
    }
    b[eq_rows - 1] = Rational::one();

    // Tableau columns: n structural, eq_rows artificial, then rhs.
    let width = n + eq_rows + 1;
    let mut t = RationalMatrix::zeros(eq_rows + 1, width);
    let mut basis: Vec<usize> = (0..eq_rows).map(|r| n + r).collect();
    for r in 0..eq_rows {
        for c in 0..n {
            t[(r, c)] = a[(r, c)].clone();
        }
        t[(r, n + r)] = Rational::one();
        t[(r, width - 1)] = b[r].clone();
    }
    // Objective row holds reduced costs for minimising the artificial sum.
    let obj = eq_rows;
    for c in 0..width {
        if c >= n && c < n + eq_rows {
            continue;
        }
        let s: Rational = (0..eq_rows).map(|r| t[(r, c)].clone()).sum();
        t[(obj, c)] = -s;
    }

    while let Some(enter) = (0..n + eq_rows).find(|&c| t[(obj, c)].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..eq_rows {
            let coef = &t[(r, enter)];
            if coef.is_positive() {
                let ratio = &t[(r, width - 1)] / coef;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // Phase one is bounded below by zero, so a leaving row always exists.
        let (pr, _) = leave?;
        let inv = t[(pr, enter)].recip();
        for c in 0..width {
            let v = &t[(pr, c)] * &inv;
            t[(pr, c)] = v;
        }
        for r in 0..=eq_rows {
            if r == pr || t[(r, enter)].is_zero() {
                continue;
            }
            let f = t[(r, enter)].clone();
            for c in 0..width {
                if t[(pr, c)].is_zero() {
                    continue;
                }
                let d = &f * &t[(pr, c)];
                t[(r, c)] -= d;
            }
        }
        basis[pr] = enter;
    }

    if !t[(obj, width - 1)].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[(r, width - 1)].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_singular_matrix() {
        let m = RationalMatrix::from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn null_space_vectors_are_annihilated() {
        let m = RationalMatrix::from_i64_rows(&[vec![1, -1, 0, 2], vec![0, 1, -1, 1]]);
        let ns = m.null_space();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for i in 0..m.rows() {
                let row: Vec<Rational> = (0..m.cols()).map(|j| m[(i, j)].clone()).collect();
                assert!(dot(&row, v).is_zero());
            }
        }
    }

    #[test]
    fn primitive_clears_denominators() {
        let v = vec![
            Rational::new(1.into(), 3.into()),
            Rational::new(1.into(), 3.into()),
            Rational::zero(),
        ];
        assert_eq!(primitive(&v), vec![rat(1), rat(1), rat(0)]);
    }

    #[test]
    fn simplex_finds_mass_conservation() {
        // columns (-1,1) and (1,-1): a = (1/2, 1/2)
        let m = RationalMatrix::from_i64_rows(&[vec![-1, 1], vec![1, -1]]);
        let a = nonnegative_left_kernel_point(&m).unwrap();
        assert_eq!(primitive(&a), vec![rat(1), rat(1)]);
    }

    #[test]
    fn simplex_reports_infeasible_open_system() {
        // X1 -> 0, 0 -> X1
        let m = RationalMatrix::from_i64_rows(&[vec![-1, 1]]);
        assert!(nonnegative_left_kernel_point(&m).is_none());
    }

    #[test]
    fn simplex_rejects_mixed_sign_laws() {
        // X1 -> X2 + X3 conserves (1,1,0) and (1,0,1): nonnegative exists
        let m = RationalMatrix::from_i64_rows(&[vec![-1], vec![1], vec![1]]);
        let a = nonnegative_left_kernel_point(&m).unwrap();
        assert!(is_nonnegative(&a));
        // 2 X1 -> X2 and X2 -> X1 has only (0,0) as nonnegative law
        let m = RationalMatrix::from_i64_rows(&[vec![-2, 1], vec![1, -1]]);
        assert!(nonnegative_left_kernel_point(&m).is_none());
    }
}
