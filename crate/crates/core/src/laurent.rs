//! Laurent polynomials in the chart coordinate ζ and square matrices of them.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Sparse Laurent polynomial; never stores a zero coefficient.
#[derive(Clone, PartialEq)]
pub struct LaurentPoly<S> {
    terms: BTreeMap<i64, S>,
}

impl<S: Scalar> LaurentPoly<S> {
    pub fn zero() -> Self {
        LaurentPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: S, pow: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(pow, c);
        }
        LaurentPoly { terms }
    }

    /// ζ^k with unit coefficient.
    pub fn zeta_pow(k: i64) -> Self {
        Self::monomial(S::one(), k)
    }

    /// Sums repeated powers and drops zeros.
    pub fn from_terms(it: impl IntoIterator<Item = (i64, S)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in it {
            p.add_term(k, c);
        }
        p
    }

    /// Polynomial with `coeffs[k]` at power k.
    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        Self::from_terms(coeffs.into_iter().enumerate().map(|(k, c)| (k as i64, c)))
    }

    pub fn add_term(&mut self, k: i64, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&k) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(k, s);
                }
            }
            None => {
                self.terms.insert(k, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &S)> + '_ {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: i64) -> S {
        self.terms.get(&k).cloned().unwrap_or_else(S::zero)
    }

    pub fn lo(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn hi(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn span(&self) -> i64 {
        match (self.lo(), self.hi()) {
            (Some(l), Some(h)) => h - l,
            _ => 0,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.lo().is_none_or(|l| l >= 0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    /// `Some((c, k))` when the polynomial is the single term c·ζᵏ.
    pub fn as_monomial(&self) -> Option<(S, i64)> {
        if self.terms.len() != 1 {
            return None;
        }
        self.terms.iter().next().map(|(&k, c)| (c.clone(), k))
    }

    pub fn eval(&self, z: &S) -> Result<S> {
        if self.is_zero() {
            return Ok(S::zero());
        }
        let lo = self.lo().unwrap();
        if z.is_zero() {
            if lo < 0 {
                return Err(Error::EvalAtPole);
            }
            return Ok(self.coeff(0));
        }
        let hi = self.hi().unwrap();
        // Horner on the shifted polynomial, then multiply by z^lo.
        let mut acc = S::zero();
        for k in (lo..=hi).rev() {
            acc = acc * z.clone();
            if let Some(c) = self.terms.get(&k) {
                acc = acc + c.clone();
            }
        }
        Ok(acc * pow_int(z, lo))
    }

    /// ζ ↦ 1/ζ.
    pub fn flip(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&k, c)| (-k, c.clone())).collect() }
    }

    /// Multiplication by ζᵐ.
    pub fn shift(&self, m: i64) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&k, c)| (k + m, c.clone())).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(&k, v)| (k, v.clone() * c.clone())).collect() }
    }

    /// Conjugates the coefficients only.
    pub fn conj_coeffs(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&k, c)| (k, c.conj())).collect() }
    }

    /// d/dζ.
    pub fn derivative(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, c)| (k - 1, c.clone() * S::from_i64(k))))
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LaurentPoly<T> {
        LaurentPoly::from_terms(self.terms.iter().map(|(&k, c)| (k, f(c))))
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&i, a) in &self.terms {
            for (&j, b) in &other.terms {
                out.add_term(i + j, a.clone() * b.clone());
            }
        }
        out
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, c) in &other.terms {
            out.add_term(k, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect() }
    }
}

pub(crate) fn pow_int<S: Scalar>(z: &S, k: i64) -> S {
    let mut base = if k < 0 { S::one() / z.clone() } else { z.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = S::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        base = base.clone() * base;
        e >>= 1;
    }
    acc
}

impl<S: Scalar> fmt::Debug for LaurentPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<S: Scalar> fmt::Display for LaurentPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

/// Square matrix of Laurent polynomials, row-major.
#[derive(Clone, PartialEq)]
pub struct LaurentMatrix<S> {
    size: usize,
    entries: Vec<LaurentPoly<S>>,
}

impl<S: Scalar> LaurentMatrix<S> {
    pub fn identity(r: usize) -> Self {
        Self::from_fn(r, |i, j| if i == j { LaurentPoly::one() } else { LaurentPoly::zero() })
    }

    pub fn zeros(r: usize) -> Self {
        Self::from_fn(r, |_, _| LaurentPoly::zero())
    }

    pub fn from_fn(r: usize, mut f: impl FnMut(usize, usize) -> LaurentPoly<S>) -> Self {
        let mut entries = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                entries.push(f(i, j));
            }
        }
        LaurentMatrix { size: r, entries }
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly<S>>>) -> Result<Self> {
        let r = rows.len();
        for row in &rows {
            if row.len() != r {
                return Err(Error::NotSquare { rows: r, cols: row.len() });
            }
        }
        Ok(LaurentMatrix { size: r, entries: rows.into_iter().flatten().collect() })
    }

    pub fn diag(entries: Vec<LaurentPoly<S>>) -> Self {
        let r = entries.len();
        let mut m = Self::zeros(r);
        for (i, e) in entries.into_iter().enumerate() {
            m.entries[i * r + i] = e;
        }
        m
    }

    /// Constant matrix.
    pub fn from_matrix(m: &Matrix<S>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        Ok(Self::from_fn(m.rows(), |i, j| LaurentPoly::constant(m[(i, j)].clone())))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly<S> {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly<S>) {
        self.entries[i * self.size + j] = p;
    }

    pub fn entries(&self) -> &[LaurentPoly<S>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly<S>) -> LaurentPoly<S>) -> Self {
        LaurentMatrix { size: self.size, entries: self.entries.iter().map(f).collect() }
    }

    pub fn flip(&self) -> Self {
        self.map(LaurentPoly::flip)
    }

    pub fn shift(&self, m: i64) -> Self {
        self.map(|p| p.shift(m))
    }

    pub fn conj_coeffs(&self) -> Self {
        self.map(LaurentPoly::conj_coeffs)
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_poly(&self, q: &LaurentPoly<S>) -> Self {
        self.map(|p| p.mul_ref(q))
    }

    pub fn lo(&self) -> Option<i64> {
        self.entries.iter().filter_map(LaurentPoly::lo).min()
    }

    pub fn hi(&self) -> Option<i64> {
        self.entries.iter().filter_map(LaurentPoly::hi).max()
    }

    /// hi − lo over all entries (0 for the zero matrix).
    pub fn span(&self) -> i64 {
        match (self.lo(), self.hi()) {
            (Some(l), Some(h)) => h - l,
            _ => 0,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_polynomial)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: other.size });
        }
        let r = self.size;
        Ok(Self::from_fn(r, |i, j| {
            let mut acc = LaurentPoly::zero();
            for k in 0..r {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if !a.is_zero() && !b.is_zero() {
                    acc = acc.add_ref(&a.mul_ref(b));
                }
            }
            acc
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: other.size });
        }
        Ok(Self::from_fn(self.size, |i, j| self.get(i, j).add_ref(other.get(i, j))))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: other.size });
        }
        Ok(Self::from_fn(self.size, |i, j| self.get(i, j).sub_ref(other.get(i, j))))
    }

    /// Applies to a column vector of Laurent polynomials.
    pub fn apply(&self, v: &[LaurentPoly<S>]) -> Result<Vec<LaurentPoly<S>>> {
        if v.len() != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: v.len() });
        }
        Ok((0..self.size)
            .map(|i| {
                (0..self.size).fold(LaurentPoly::zero(), |acc, k| {
                    let (a, b) = (self.get(i, k), &v[k]);
                    if a.is_zero() || b.is_zero() {
                        acc
                    } else {
                        acc.add_ref(&a.mul_ref(b))
                    }
                })
            })
            .collect())
    }

    pub fn eval(&self, z: &S) -> Result<Matrix<S>> {
        let vals = self.entries.iter().map(|p| p.eval(z)).collect::<Result<Vec<_>>>()?;
        let r = self.size;
        Ok(Matrix::from_fn(r, r, |i, j| vals[i * r + j].clone()))
    }

    /// Determinant of the submatrix on `rows` × `cols` by a Laplace recursion
    /// over column subsets (bitmask DP, sign from inversion counts).
    fn det_sub(&self, rows: &[usize], cols: &[usize]) -> LaurentPoly<S> {
        let k = rows.len();
        if k == 0 {
            return LaurentPoly::one();
        }
        let full = (1usize << k) - 1;
        let mut dp: Vec<Option<LaurentPoly<S>>> = vec![None; 1 << k];
        dp[0] = Some(LaurentPoly::one());
        for mask in 0..full {
            let Some(cur) = dp[mask].take() else { continue };
            if cur.is_zero() {
                continue;
            }
            let row = rows[mask.count_ones() as usize];
            for c in 0..k {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let entry = self.get(row, cols[c]);
                if entry.is_zero() {
                    continue;
                }
                let above = (mask >> (c + 1)).count_ones();
                let mut term = cur.mul_ref(entry);
                if above % 2 == 1 {
                    term = term.neg();
                }
                let slot = &mut dp[mask | (1 << c)];
                *slot = Some(match slot.take() {
                    Some(p) => p.add_ref(&term),
                    None => term,
                });
            }
        }
        dp[full].take().unwrap_or_else(LaurentPoly::zero)
    }

    pub fn det(&self) -> LaurentPoly<S> {
        let idx: Vec<usize> = (0..self.size).collect();
        self.det_sub(&idx, &idx)
    }

    /// Exponent k when det = c·ζᵏ with c ≠ 0.
    pub fn unit_winding(&self) -> Result<i64> {
        let d = self.det();
        d.as_monomial().map(|(_, k)| k).ok_or_else(|| Error::NotUnitOnCStar(d.to_string()))
    }

    pub fn adjugate(&self) -> Self {
        let r = self.size;
        if r == 1 {
            return Self::identity(1);
        }
        Self::from_fn(r, |i, j| {
            // adj[i][j] = (-1)^{i+j} det(minor with row j, column i removed)
            let rows: Vec<usize> = (0..r).filter(|&x| x != j).collect();
            let cols: Vec<usize> = (0..r).filter(|&x| x != i).collect();
            let m = self.det_sub(&rows, &cols);
            if (i + j) % 2 == 1 {
                m.neg()
            } else {
                m
            }
        })
    }

    /// Inverse over Laurent polynomials, defined when det is a monomial.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        let (c, k) = d.as_monomial().ok_or_else(|| Error::NotUnitOnCStar(d.to_string()))?;
        let inv = LaurentPoly::monomial(S::one() / c, -k);
        Ok(self.adjugate().scale_poly(&inv))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.size)
    }
}

impl<S: Scalar> fmt::Debug for LaurentMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Float};

    type P = LaurentPoly<Exact>;

    fn z(k: i64) -> P {
        P::zeta_pow(k)
    }

    fn c(n: i64) -> P {
        P::constant(Exact::from_i64(n))
    }

    #[test]
    fn eval_examples() {
        let one = Exact::one();
        assert_eq!(z(1).add_ref(&z(-1)).eval(&one).unwrap(), Exact::from_i64(2));
        assert_eq!(z(2).eval(&Exact::from_i64(2)).unwrap(), Exact::from_i64(4));
        let p = c(1).add_ref(&z(1));
        assert_eq!(p.eval(&Exact::i()).unwrap(), Exact::one() + Exact::i());
        assert_eq!(z(-1).eval(&Exact::zero()), Err(Error::EvalAtPole));
        assert_eq!(z(-2).eval(&Exact::from_i64(2)).unwrap(), Exact::from_ratio(1, 4));
    }

    #[test]
    fn determinant_examples() {
        let d = LaurentMatrix::diag(vec![z(1), z(-1)]);
        assert_eq!(d.det(), c(1));
        let t = LaurentMatrix::from_rows(vec![vec![z(-1), c(1)], vec![P::zero(), z(1)]]).unwrap();
        assert_eq!(t.det(), c(1));
        assert_eq!(LaurentMatrix::diag(vec![z(1), z(1)]).det(), z(2));
    }

    #[test]
    fn winding_examples() {
        assert_eq!(LaurentMatrix::diag(vec![z(1), z(1)]).unit_winding().unwrap(), 2);
        let t = LaurentMatrix::from_rows(vec![vec![z(-1), c(5)], vec![P::zero(), z(1)]]).unwrap();
        assert_eq!(t.unit_winding().unwrap(), 0);
        let bad = LaurentMatrix::from_rows(vec![vec![c(1), z(1)], vec![c(1), c(1)]]).unwrap();
        assert!(matches!(bad.unit_winding(), Err(Error::NotUnitOnCStar(_))));
    }

    #[test]
    fn flip_examples() {
        assert_eq!(z(1).flip(), z(-1));
        let p = c(1).add_ref(&z(1).scale(&Exact::from_i64(2)));
        assert_eq!(p.flip(), c(1).add_ref(&z(-1).scale(&Exact::from_i64(2))));
        assert_eq!(p.flip().flip(), p);
    }

    #[test]
    fn three_by_three_det_matches_expansion() {
        let m = LaurentMatrix::from_rows(vec![
            vec![z(1), c(2), c(0)],
            vec![c(1), z(-1), c(3)],
            vec![c(0), c(1), z(2)],
        ])
        .unwrap();
        // ζ(ζ⁻¹ζ² − 3) − 2(ζ² − 0) = ζ² − 3ζ − 2ζ²
        let expect = P::from_terms([(2, Exact::from_i64(-1)), (1, Exact::from_i64(-3))]);
        assert_eq!(m.det(), expect);
    }

    #[test]
    fn inverse_of_unit_matrix() {
        let t = LaurentMatrix::from_rows(vec![vec![z(-1), c(1)], vec![P::zero(), z(1)]]).unwrap();
        let inv = t.inverse().unwrap();
        assert!(t.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&t).unwrap().is_identity());
    }

    #[test]
    fn zero_coefficients_not_stored() {
        let p = P::from_terms([(1, Exact::one()), (1, -Exact::one()), (0, Exact::zero())]);
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn tiny_float_coefficients_kept() {
        let p = LaurentPoly::<Float>::monomial(Float::new(1e-301, 0.0), 3);
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn derivative_of_laurent() {
        let p = z(3).add_ref(&z(-1));
        let dp = z(2).scale(&Exact::from_i64(3)).add_ref(&z(-2).neg());
        assert_eq!(p.derivative(), dp);
    }
}
