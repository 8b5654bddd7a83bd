//! Incremental sparse row echelon form for exact kernel computations.
//!
//! Rows are inserted one at a time and reduced against the stored pivots, so
//! the banded coefficient systems coming from Laurent transition matrices stay
//! sparse. The kernel basis is read off the reduced row echelon form: one
//! vector per free column, in increasing column order.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

pub type SparseRow<S> = Vec<(usize, S)>;

#[derive(Clone, Debug)]
pub struct Echelon<S> {
    ncols: usize,
    // pivot column -> row with leading coefficient 1 at that column
    pivots: BTreeMap<usize, SparseRow<S>>,
}

impl<S: Scalar> Echelon<S> {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Inserts a row given as unsorted (column, value) pairs; returns whether
    /// the rank grew.
    pub fn insert(&mut self, row: impl IntoIterator<Item = (usize, S)>) -> bool {
        let mut acc: BTreeMap<usize, S> = BTreeMap::new();
        for (c, v) in row {
            debug_assert!(c < self.ncols);
            if v.is_zero() {
                continue;
            }
            match acc.remove(&c) {
                Some(old) => {
                    let s = old + v;
                    if !s.is_zero() {
                        acc.insert(c, s);
                    }
                }
                None => {
                    acc.insert(c, v);
                }
            }
        }
        let mut row: SparseRow<S> = acc.into_iter().collect();
        loop {
            let Some((lead, coef)) = row.first().cloned() else {
                return false;
            };
            match self.pivots.get(&lead) {
                Some(p) => row = axpy_sparse(&row, &coef, p),
                None => {
                    let inv = S::one() / coef;
                    let normalized = row.into_iter().map(|(c, v)| (c, v * inv.clone())).collect();
                    self.pivots.insert(lead, normalized);
                    return true;
                }
            }
        }
    }

    /// Fully reduced pivot rows: each has no entries in other pivot columns.
    fn reduced(&self) -> BTreeMap<usize, SparseRow<S>> {
        let mut out: BTreeMap<usize, SparseRow<S>> = BTreeMap::new();
        for (&c, row) in self.pivots.iter().rev() {
            let mut r = row.clone();
            // entries at pivot columns p > c are eliminated with the already
            // reduced row for p, which only adds free columns beyond p
            let mut idx = 1;
            while idx < r.len() {
                let (col, val) = r[idx].clone();
                if let Some(pr) = out.get(&col) {
                    r = axpy_sparse(&r, &val, pr);
                    idx = r.partition_point(|(k, _)| *k <= col);
                } else {
                    idx += 1;
                }
            }
            out.insert(c, r);
        }
        out
    }

    /// Basis of the null space, one dense vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<S>> {
        let red = self.reduced();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !red.contains_key(c)).collect();
        let mut basis: Vec<Vec<S>> = free
            .iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.ncols];
                v[f] = S::one();
                v
            })
            .collect();
        let slot: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        for (&c, row) in &red {
            for (col, val) in row.iter().skip(1) {
                if let Some(&b) = slot.get(col) {
                    basis[b][c] = -val.clone();
                }
            }
        }
        basis
    }
}

/// `row − coef·pivot` on sorted sparse rows, dropping exact zeros.
fn axpy_sparse<S: Scalar>(row: &[(usize, S)], coef: &S, pivot: &[(usize, S)]) -> SparseRow<S> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            let v = -(coef.clone() * pivot[j].1.clone());
            if !v.is_zero() {
                out.push((cj, v));
            }
            j += 1;
        } else {
            let mut v = row[i].1.clone();
            v.sub_mul_assign(coef, &pivot[j].1);
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Dense convenience wrapper: null space of a matrix given by rows.
pub fn kernel<S: Scalar>(ncols: usize, rows: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.iter().cloned().enumerate());
    }
    e.kernel_basis()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dot;
    use crate::scalar::Exact;

    fn ex(v: &[i64]) -> Vec<Exact> {
        v.iter().map(|&x| Exact::from_i64(x)).collect()
    }

    #[test]
    fn kernel_of_rank_two_system() {
        let rows = vec![ex(&[1, 2, 3, 4]), ex(&[2, 4, 7, 9]), ex(&[3, 6, 10, 13])];
        let k = kernel(4, &rows);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                assert!(dot(r, v).is_zero());
            }
        }
    }

    #[test]
    fn rref_kernel_has_unit_free_entries() {
        // x0 + x2 = 0, x1 - x3 = 0: free columns 2 and 3
        let rows = vec![ex(&[1, 0, 1, 0]), ex(&[0, 1, 0, -1])];
        let k = kernel(4, &rows);
        assert_eq!(k, vec![ex(&[-1, 0, 1, 0]), ex(&[0, 1, 0, 1])]);
    }

    #[test]
    fn dependent_rows_do_not_grow_rank() {
        let mut e = Echelon::new(3);
        assert!(e.insert(ex(&[1, 1, 0]).into_iter().enumerate()));
        assert!(!e.insert(ex(&[2, 2, 0]).into_iter().enumerate()));
        assert!(!e.insert(Vec::new()));
        assert_eq!(e.nullity(), 2);
    }

    #[test]
    fn back_substitution_chain() {
        // chain forcing multiple elimination passes in reduced()
        let rows = vec![ex(&[1, 1, 0, 0, 0]), ex(&[0, 1, 1, 0, 0]), ex(&[0, 0, 1, 1, 1])];
        let k = kernel(5, &rows);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                assert!(dot(r, v).is_zero());
            }
        }
    }
}
