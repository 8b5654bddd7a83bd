//! Holomorphic vector bundles on CP¹ given by a transition matrix.
//!
//! Convention: (ζ₀, x₀) in U₀ equals (ζ₁, x₁) in U₁ iff ζ₀ζ₁ = 1 and
//! x₀ = T(ζ₀)·x₁. A global section is a pair of polynomial vectors (p, q)
//! with p(ζ) = T(ζ)·q(1/ζ).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::Echelon;
use crate::scalar::{Backend, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct BundleCP1<S: Scalar> {
    transition: LaurentMatrix<S>,
    winding: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalSection<S: Scalar> {
    /// U₀ representative, polynomial in ζ₀.
    pub p: Vec<LaurentPoly<S>>,
    /// U₁ representative, polynomial in ζ₁.
    pub q: Vec<LaurentPoly<S>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingType {
    pub degrees: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub h0: usize,
    pub h1: usize,
    pub splitting: Vec<i64>,
    pub winding: i64,
}

#[derive(Clone, Debug)]
pub struct SectionSpace<S: Scalar> {
    pub dimension: usize,
    pub degree_bound: usize,
    pub basis: Vec<GlobalSection<S>>,
}

fn require_exact<S: Scalar>() -> Result<()> {
    match S::BACKEND {
        Backend::Exact => Ok(()),
        Backend::Float => Err(Error::Backend("exact")),
    }
}

impl SplittingType {
    pub fn new(mut degrees: Vec<i64>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        SplittingType { degrees }
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn sum(&self) -> i64 {
        self.degrees.iter().sum()
    }

    pub fn h0(&self) -> usize {
        self.degrees.iter().map(|&n| (n + 1).max(0) as usize).sum()
    }

    pub fn h1(&self) -> usize {
        self.degrees.iter().map(|&n| (-n - 1).max(0) as usize).sum()
    }

    pub fn twisted(&self, m: i64) -> Self {
        SplittingType { degrees: self.degrees.iter().map(|n| n + m).collect() }
    }
}

impl<S: Scalar> BundleCP1<S> {
    pub fn new(transition: LaurentMatrix<S>) -> Result<Self> {
        if transition.size() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let winding = transition.unit_winding()?;
        Ok(BundleCP1 { transition, winding })
    }

    /// ⊕ O(nᵢ), transition diag(ζ^{nᵢ}).
    pub fn line_sum(degrees: &[i64]) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let t = LaurentMatrix::diag(degrees.iter().map(|&n| LaurentPoly::zeta_pow(n)).collect());
        Ok(BundleCP1 { transition: t, winding: degrees.iter().sum() })
    }

    pub fn rank(&self) -> usize {
        self.transition.size()
    }

    pub fn transition(&self) -> &LaurentMatrix<S> {
        &self.transition
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// E ⊗ O(m): transition ζᵐ·T.
    pub fn twist(&self, m: i64) -> Self {
        BundleCP1 {
            transition: self.transition.shift(m),
            winding: self.winding + self.rank() as i64 * m,
        }
    }

    /// Change of trivialization x₀ = P0·x₀′, x₁ = P1·x₁′, giving
    /// T′ = P0(ζ)⁻¹·T(ζ)·P1(1/ζ).
    pub fn gauge_transform(&self, p0: &LaurentMatrix<S>, p1: &LaurentMatrix<S>) -> Result<Self> {
        for (name, p) in [("P0", p0), ("P1", p1)] {
            if p.size() != self.rank() {
                return Err(Error::DimensionMismatch { expected: self.rank(), found: p.size() });
            }
            if !p.is_polynomial() {
                return Err(Error::NotInvertibleOnChart(format!("{name} has negative powers")));
            }
            let d = p.det();
            if d.is_zero() || !d.is_constant() {
                return Err(Error::NotInvertibleOnChart(format!("det {name} = {d}")));
            }
        }
        let t = p0.inverse()?.mul(&self.transition)?.mul(&p1.flip())?;
        BundleCP1::new(t)
    }

    /// Default degree bound r·span + |winding| + 2.
    pub fn default_degree_bound(&self) -> usize {
        (self.rank() as i64 * self.transition.span() + self.winding.abs() + 2) as usize
    }

    /// Coefficient system for q of degree ≤ d: every power of T(ζ)q(1/ζ)
    /// outside [0, d] must vanish. Columns run over (k, j) with k descending,
    /// then j ascending.
    fn q_system(&self, d: usize) -> Echelon<S> {
        let r = self.rank();
        let d64 = d as i64;
        let col = |j: usize, k: i64| (d - k as usize) * r + j;
        let mut e = Echelon::new(r * (d + 1));
        for i in 0..r {
            let mut rows: BTreeMap<i64, Vec<(usize, S)>> = BTreeMap::new();
            for j in 0..r {
                for (t, c) in self.transition.get(i, j).terms() {
                    for k in 0..=d64 {
                        let pow = t - k;
                        if pow < 0 || pow > d64 {
                            rows.entry(pow).or_default().push((col(j, k), c.clone()));
                        }
                    }
                }
            }
            for (_, row) in rows {
                e.insert(row);
            }
        }
        e
    }

    fn h0_at(&self, d: usize) -> usize {
        self.q_system(d).nullity()
    }

    fn validated_bound(&self, degree_bound: Option<usize>) -> Result<(usize, Echelon<S>)> {
        require_exact::<S>()?;
        let d = degree_bound.unwrap_or_else(|| self.default_degree_bound());
        let sys = self.q_system(d);
        let next = self.h0_at(d + 1);
        if sys.nullity() != next {
            return Err(Error::DegreeBoundUnstable { bound: d, at_bound: sys.nullity(), at_next: next });
        }
        Ok((d, sys))
    }

    pub fn h0(&self) -> Result<usize> {
        Ok(self.validated_bound(None)?.1.nullity())
    }

    /// Global sections by coefficient matching, validated at D and D+1.
    pub fn section_space(&self, degree_bound: Option<usize>) -> Result<SectionSpace<S>> {
        let (d, sys) = self.validated_bound(degree_bound)?;
        let r = self.rank();
        let basis = sys
            .kernel_basis()
            .into_iter()
            .map(|v| {
                let q: Vec<LaurentPoly<S>> = (0..r)
                    .map(|j| {
                        LaurentPoly::from_terms((0..=d).map(|k| (k as i64, v[(d - k) * r + j].clone())))
                    })
                    .collect();
                self.section_from_q(q)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SectionSpace { dimension: basis.len(), degree_bound: d, basis })
    }

    /// Completes a U₁ representative to a global section; fails unless
    /// T(ζ)q(1/ζ) is polynomial.
    pub fn section_from_q(&self, q: Vec<LaurentPoly<S>>) -> Result<GlobalSection<S>> {
        let flipped: Vec<_> = q.iter().map(LaurentPoly::flip).collect();
        let p = self.transition.apply(&flipped)?;
        if !p.iter().all(LaurentPoly::is_polynomial) || !q.iter().all(LaurentPoly::is_polynomial) {
            return Err(Error::InvalidSection);
        }
        Ok(GlobalSection { p, q })
    }

    /// Completes a U₀ representative to a global section.
    pub fn section_from_p(&self, p: Vec<LaurentPoly<S>>) -> Result<GlobalSection<S>> {
        let tinv = self.transition.inverse()?;
        let q: Vec<_> = tinv.apply(&p)?.iter().map(LaurentPoly::flip).collect();
        if !p.iter().all(LaurentPoly::is_polynomial) || !q.iter().all(LaurentPoly::is_polynomial) {
            return Err(Error::InvalidSection);
        }
        Ok(GlobalSection { p, q })
    }

    /// A bound that provably captures every section: p = T·q(1/ζ) forces
    /// deg p ≤ hi(T), and q(ζ₁) = T⁻¹(1/ζ₁)·p(1/ζ₁) forces deg q ≤ −lo(T⁻¹).
    pub fn sharp_degree_bound(&self) -> Result<usize> {
        let inv = self.transition.inverse()?;
        let a = self.transition.hi().unwrap_or(0);
        let b = -inv.lo().unwrap_or(0);
        Ok(a.max(b).max(0) as usize)
    }

    /// h⁰ at a given bound, still cross-checked at bound + 1.
    pub fn h0_with_bound(&self, d: usize) -> Result<usize> {
        Ok(self.validated_bound(Some(d))?.1.nullity())
    }

    pub fn splitting_type(&self) -> Result<SplittingType> {
        self.splitting_type_in_window(None)
    }

    /// Recovers the splitting from h(m) = h⁰(E(m)) on m ∈ [−w, w]; the
    /// default half-width is r·span + |winding| + 3. Each h(m) uses the
    /// sharp degree bound of E(m).
    pub fn splitting_type_in_window(&self, window: Option<i64>) -> Result<SplittingType> {
        require_exact::<S>()?;
        let r = self.rank();
        let w = window.unwrap_or(r as i64 * self.transition.span() + self.winding.abs() + 3);
        // E(m) has T' = ζᵐT and T'⁻¹ = ζ⁻ᵐT⁻¹, so the sharp bound shifts by m
        let inv = self.transition.inverse()?;
        let (hi_t, neg_lo_inv) = (self.transition.hi().unwrap_or(0), -inv.lo().unwrap_or(0));
        let h = |m: i64| {
            let d = (hi_t + m).max(neg_lo_inv + m).max(0) as usize;
            self.twist(m).h0_with_bound(d)
        };
        if h(-w)? != 0 {
            return Err(Error::ScanWindowExhausted { lo: -w, hi: w });
        }
        // h is nondecreasing: locate the last zero
        let (mut lo, mut hi) = (-w, w + 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if mid <= w && h(mid)? == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut degrees = Vec::with_capacity(r);
        let (mut prev_h, mut prev_c) = (0usize, 0usize);
        let mut m = lo + 1;
        while degrees.len() < r {
            if m > w {
                return Err(Error::ScanWindowExhausted { lo: -w, hi: w });
            }
            let hm = h(m)?;
            let c = hm.checked_sub(prev_h).ok_or(Error::ScanWindowExhausted { lo: -w, hi: w })?;
            if c < prev_c || c > r {
                return Err(Error::InconsistentWinding { sum: degrees.iter().sum(), winding: self.winding });
            }
            degrees.extend(std::iter::repeat_n(-m, c - prev_c));
            prev_h = hm;
            prev_c = c;
            m += 1;
        }
        let st = SplittingType::new(degrees);
        if st.sum() != self.winding {
            return Err(Error::InconsistentWinding { sum: st.sum(), winding: self.winding });
        }
        Ok(st)
    }

    pub fn h1(&self) -> Result<usize> {
        Ok(self.splitting_type()?.h1())
    }

    pub fn cohomology(&self) -> Result<CohomologyReport> {
        let st = self.splitting_type()?;
        let h0 = self.h0()?;
        Ok(CohomologyReport { h0, h1: st.h1(), splitting: st.degrees, winding: self.winding })
    }
}

impl<S: Scalar> GlobalSection<S> {
    pub fn zero(r: usize) -> Self {
        GlobalSection { p: vec![LaurentPoly::zero(); r], q: vec![LaurentPoly::zero(); r] }
    }

    pub fn rank(&self) -> usize {
        self.p.len()
    }

    /// p − T·q(1/ζ) as Laurent polynomials.
    pub fn defect(&self, bundle: &BundleCP1<S>) -> Result<Vec<LaurentPoly<S>>> {
        if self.p.len() != bundle.rank() || self.q.len() != bundle.rank() {
            return Err(Error::DimensionMismatch { expected: bundle.rank(), found: self.p.len() });
        }
        let flipped: Vec<_> = self.q.iter().map(LaurentPoly::flip).collect();
        let tq = bundle.transition().apply(&flipped)?;
        Ok(self.p.iter().zip(&tq).map(|(a, b)| a.sub_ref(b)).collect())
    }

    pub fn is_section_of(&self, bundle: &BundleCP1<S>) -> bool {
        self.p.iter().chain(&self.q).all(LaurentPoly::is_polynomial)
            && self.defect(bundle).is_ok_and(|d| d.iter().all(LaurentPoly::is_zero))
    }

    /// Pointwise check p(ζ) = T(ζ)q(1/ζ) at ζ ≠ 0.
    pub fn compatible_at(&self, bundle: &BundleCP1<S>, zeta: &S, tol: f64) -> Result<bool> {
        let t = bundle.transition().eval(zeta)?;
        let inv = S::one() / zeta.clone();
        let p = self.p.iter().map(|x| x.eval(zeta)).collect::<Result<Vec<_>>>()?;
        let q = self.q.iter().map(|x| x.eval(&inv)).collect::<Result<Vec<_>>>()?;
        let tq = t.mul_vec(&q)?;
        Ok(p.iter().zip(&tq).all(|(a, b)| (a.clone() - b.clone()).is_negligible(tol)))
    }

    pub fn add(&self, other: &Self) -> Self {
        GlobalSection {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a.add_ref(b)).collect(),
            q: self.q.iter().zip(&other.q).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        GlobalSection {
            p: self.p.iter().map(|a| a.scale(c)).collect(),
            q: self.q.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().chain(&self.q).all(LaurentPoly::is_zero)
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

    fn jump(t: Exact) -> BundleCP1<Exact> {
        let m = LaurentMatrix::from_rows(vec![vec![z(-1), P::constant(t)], vec![P::zero(), z(1)]]).unwrap();
        BundleCP1::new(m).unwrap()
    }

    #[test]
    fn line_sum_examples() {
        let e = BundleCP1::<Exact>::line_sum(&[1, 1]).unwrap();
        assert_eq!(e.transition(), &LaurentMatrix::diag(vec![z(1), z(1)]));
        assert!(BundleCP1::<Exact>::line_sum(&[0]).unwrap().transition().is_identity());
        assert_eq!(
            BundleCP1::<Exact>::line_sum(&[2, -2]).unwrap().transition(),
            &LaurentMatrix::diag(vec![z(2), z(-2)])
        );
        assert!(BundleCP1::<Exact>::line_sum(&[]).is_err());
    }

    #[test]
    fn twist_examples() {
        let e = BundleCP1::<Exact>::line_sum(&[1, 1]).unwrap();
        assert_eq!(e.twist(-1), BundleCP1::line_sum(&[0, 0]).unwrap());
        assert_eq!(e.twist(0), e);
        assert_eq!(jump(Exact::one()).twist(3).winding(), 6);
    }

    #[test]
    fn sections_of_two_copies_of_o1() {
        let e = BundleCP1::<Exact>::line_sum(&[1, 1]).unwrap();
        let sp = e.section_space(None).unwrap();
        assert_eq!(sp.dimension, 4);
        let e1 = || vec![c(1), P::zero()];
        let e2 = || vec![P::zero(), c(1)];
        let zeta = |v: Vec<P>| v.into_iter().map(|p| p.shift(1)).collect::<Vec<_>>();
        let expected = vec![
            GlobalSection { p: e1(), q: zeta(e1()) },
            GlobalSection { p: e2(), q: zeta(e2()) },
            GlobalSection { p: zeta(e1()), q: e1() },
            GlobalSection { p: zeta(e2()), q: e2() },
        ];
        assert_eq!(sp.basis, expected);
        assert_eq!(e.h1().unwrap(), 0);
    }

    #[test]
    fn negative_line_bundle_has_no_sections() {
        let e = BundleCP1::<Exact>::line_sum(&[-1]).unwrap();
        assert_eq!(e.section_space(None).unwrap().dimension, 0);
    }

    #[test]
    fn upper_triangular_example() {
        let e = jump(Exact::one());
        let sp = e.section_space(None).unwrap();
        assert_eq!(sp.dimension, 2);
        for s in &sp.basis {
            assert!(s.is_section_of(&e));
        }
        assert_eq!(e.splitting_type().unwrap().degrees, vec![0, 0]);
    }

    #[test]
    fn splitting_examples() {
        let st = |d: &[i64]| BundleCP1::<Exact>::line_sum(d).unwrap().splitting_type().unwrap().degrees;
        assert_eq!(st(&[1, 1]), vec![1, 1]);
        assert_eq!(st(&[2, -2]), vec![2, -2]);
        assert_eq!(st(&[-3, 4, 0]), vec![4, 0, -3]);
        assert_eq!(jump(Exact::zero()).splitting_type().unwrap().degrees, vec![1, -1]);
    }

    #[test]
    fn h1_examples() {
        let h1 = |d: &[i64]| BundleCP1::<Exact>::line_sum(d).unwrap().h1().unwrap();
        assert_eq!(h1(&[1, 1]), 0);
        assert_eq!(h1(&[-2]), 1);
        assert_eq!(h1(&[-2, -3]), 3);
    }

    #[test]
    fn gauge_examples() {
        let e = BundleCP1::<Exact>::line_sum(&[1, -1]).unwrap();
        let id = LaurentMatrix::identity(2);
        assert_eq!(e.gauge_transform(&id, &id).unwrap(), e);

        let o11 = BundleCP1::<Exact>::line_sum(&[1, 1]).unwrap();
        let p = LaurentMatrix::from_rows(vec![vec![c(2), c(1)], vec![c(1), c(1)]]).unwrap();
        assert_eq!(o11.gauge_transform(&p, &p).unwrap(), o11);

        let p0 = LaurentMatrix::from_rows(vec![vec![c(1), z(1)], vec![P::zero(), c(1)]]).unwrap();
        let p1 = LaurentMatrix::from_rows(vec![vec![c(1), P::zero()], vec![z(2).scale(&Exact::from_i64(3)), c(1)]])
            .unwrap();
        let g = e.gauge_transform(&p0, &p1).unwrap();
        assert_ne!(g.transition(), e.transition());
        assert_eq!(g.splitting_type().unwrap().degrees, vec![1, -1]);

        let bad = LaurentMatrix::diag(vec![z(1), c(1)]);
        assert!(matches!(e.gauge_transform(&bad, &id), Err(Error::NotInvertibleOnChart(_))));
    }

    #[test]
    fn float_backend_rejected() {
        let e = BundleCP1::<Float>::line_sum(&[1]).unwrap();
        assert_eq!(e.section_space(None).unwrap_err(), Error::Backend("exact"));
        assert!(e.splitting_type().is_err());
    }

    #[test]
    fn too_small_bound_is_reported() {
        let e = BundleCP1::<Exact>::line_sum(&[3]).unwrap();
        assert!(matches!(e.section_space(Some(1)), Err(Error::DegreeBoundUnstable { .. })));
    }

    #[test]
    fn window_too_small_is_reported() {
        let e = BundleCP1::<Exact>::line_sum(&[5, -5]).unwrap();
        assert!(matches!(e.splitting_type_in_window(Some(2)), Err(Error::ScanWindowExhausted { .. })));
    }

    #[test]
    fn section_from_p_round_trip() {
        let e = BundleCP1::<Exact>::line_sum(&[2]).unwrap();
        let s = e.section_from_p(vec![c(1).add_ref(&z(2))]).unwrap();
        assert_eq!(s.q, vec![z(2).add_ref(&c(1))]);
        assert!(e.section_from_p(vec![z(3)]).is_err());
    }
}
