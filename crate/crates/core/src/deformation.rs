//! Deformations of sections of bundle total spaces over CP¹: normal bundles,
//! canonical local deformations, Kodaira–Spencer maps and semicontinuity scans.

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleCP1, GlobalSection};
use crate::error::{Error, Result};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::Echelon;
use crate::matrix::Matrix;
use crate::quaternionic::SectionAB;
use crate::scalar::Scalar;

/// Multi-index monomial t^α in the parameters.
pub type Exponent = Vec<u32>;

fn monomial<S: Scalar>(alpha: &[u32], t: &[S]) -> S {
    alpha.iter().zip(t).fold(S::one(), |acc, (&e, x)| (0..e).fold(acc, |a, _| a * x.clone()))
}

/// ∂(t^α)/∂t_ρ as (coefficient, exponent), or None when α_ρ = 0.
fn d_monomial(alpha: &[u32], rho: usize) -> Option<(i64, Exponent)> {
    let e = *alpha.get(rho)?;
    if e == 0 {
        return None;
    }
    let mut beta = alpha.to_vec();
    beta[rho] -= 1;
    Some((e as i64, beta))
}

/// T(t) = Σ t^α·M_α with Laurent matrices M_α.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleFamily<S: Scalar> {
    pub rank: usize,
    pub params: usize,
    pub terms: Vec<(Exponent, LaurentMatrix<S>)>,
}

impl<S: Scalar> BundleFamily<S> {
    pub fn new(rank: usize, params: usize, terms: Vec<(Exponent, LaurentMatrix<S>)>) -> Result<Self> {
        for (alpha, m) in &terms {
            if m.size() != rank {
                return Err(Error::DimensionMismatch { expected: rank, found: m.size() });
            }
            if alpha.len() != params {
                return Err(Error::DimensionMismatch { expected: params, found: alpha.len() });
            }
        }
        Ok(BundleFamily { rank, params, terms })
    }

    /// [[ζ⁻¹, t], [0, ζ]]: splitting (1, −1) at t = 0 and (0, 0) elsewhere.
    pub fn jump_family() -> Self {
        let z = |k| LaurentPoly::zeta_pow(k);
        let base = LaurentMatrix::from_rows(vec![vec![z(-1), LaurentPoly::zero()], vec![LaurentPoly::zero(), z(1)]])
            .expect("square");
        let mut lin = LaurentMatrix::zeros(2);
        lin.set(0, 1, LaurentPoly::one());
        BundleFamily { rank: 2, params: 1, terms: vec![(vec![0], base), (vec![1], lin)] }
    }

    pub fn transition_at(&self, t: &[S]) -> Result<LaurentMatrix<S>> {
        if t.len() != self.params {
            return Err(Error::DimensionMismatch { expected: self.params, found: t.len() });
        }
        let mut acc = LaurentMatrix::zeros(self.rank);
        for (alpha, m) in &self.terms {
            acc = acc.add(&m.scale(&monomial(alpha, t)))?;
        }
        Ok(acc)
    }

    pub fn eval(&self, t: &[S]) -> Result<BundleCP1<S>> {
        BundleCP1::new(self.transition_at(t)?)
    }
}

/// t ↦ Σ t^α·s_α, sections of a fixed bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionFamily<S: Scalar> {
    pub bundle: BundleCP1<S>,
    pub params: usize,
    pub terms: Vec<(Exponent, GlobalSection<S>)>,
}

impl<S: Scalar> SectionFamily<S> {
    pub fn new(bundle: BundleCP1<S>, params: usize, terms: Vec<(Exponent, GlobalSection<S>)>) -> Result<Self> {
        for (alpha, s) in &terms {
            if alpha.len() != params {
                return Err(Error::DimensionMismatch { expected: params, found: alpha.len() });
            }
            if !s.is_section_of(&bundle) {
                return Err(Error::InvalidSection);
            }
        }
        Ok(SectionFamily { bundle, params, terms })
    }

    fn check_t(&self, t: &[S]) -> Result<()> {
        if t.len() != self.params {
            return Err(Error::DimensionMismatch { expected: self.params, found: t.len() });
        }
        Ok(())
    }

    pub fn eval(&self, t: &[S]) -> Result<GlobalSection<S>> {
        self.check_t(t)?;
        let mut acc = GlobalSection::zero(self.bundle.rank());
        for (alpha, s) in &self.terms {
            acc = acc.add(&s.scale(&monomial(alpha, t)));
        }
        Ok(acc)
    }

    /// Exact derivative of the family at t along `direction`.
    pub fn kodaira_spencer(&self, t: &[S], direction: &[S]) -> Result<GlobalSection<S>> {
        self.check_t(t)?;
        self.check_t(direction)?;
        let mut acc = GlobalSection::zero(self.bundle.rank());
        for (alpha, s) in &self.terms {
            for (rho, d) in direction.iter().enumerate() {
                if d.is_zero() {
                    continue;
                }
                if let Some((c, beta)) = d_monomial(alpha, rho) {
                    let coef = S::from_i64(c) * monomial(&beta, t) * d.clone();
                    acc = acc.add(&s.scale(&coef));
                }
            }
        }
        Ok(acc)
    }

    /// Central difference (s(t + h·v) − s(t − h·v)) / 2h.
    pub fn kodaira_spencer_fd(&self, t: &[S], direction: &[S], h: f64) -> Result<GlobalSection<S>> {
        self.check_t(t)?;
        self.check_t(direction)?;
        let hs = S::from_f64_parts(h, 0.0);
        let shift = |sign: &S| -> Vec<S> {
            t.iter().zip(direction).map(|(x, v)| x.clone() + sign.clone() * hs.clone() * v.clone()).collect()
        };
        let plus = self.eval(&shift(&S::one()))?;
        let minus = self.eval(&shift(&-S::one()))?;
        Ok(plus.add(&minus.scale(&-S::one())).scale(&(S::one() / (S::from_i64(2) * hs))))
    }

    /// Matrix whose column ρ is KS(e_ρ) in the coordinates of `basis`.
    pub fn ks_matrix(&self, t: &[S], basis: &[GlobalSection<S>]) -> Result<Matrix<S>> {
        let mut cols = Vec::with_capacity(self.params);
        for rho in 0..self.params {
            let mut e = vec![S::zero(); self.params];
            e[rho] = S::one();
            let ks = self.kodaira_spencer(t, &e)?;
            cols.push(section_coordinates(basis, &ks).ok_or(Error::InvalidSection)?);
        }
        Ok(Matrix::from_fn(basis.len(), self.params, |i, j| cols[j][i].clone()))
    }

    /// Rank of the KS map at t, computed from flattened sections.
    pub fn ks_rank(&self, t: &[S], tol: f64) -> Result<usize> {
        let sections = (0..self.params)
            .map(|rho| {
                let mut e = vec![S::zero(); self.params];
                e[rho] = S::one();
                self.kodaira_spencer(t, &e)
            })
            .collect::<Result<Vec<_>>>()?;
        let deg = max_degree(&sections);
        let rows: Vec<Vec<S>> = sections.iter().map(|s| flatten(s, deg)).collect();
        Ok(Matrix::from_rows(rows)?.rank(tol))
    }
}

fn max_degree<S: Scalar>(sections: &[GlobalSection<S>]) -> i64 {
    sections
        .iter()
        .flat_map(|s| s.p.iter().chain(&s.q))
        .filter_map(LaurentPoly::hi)
        .max()
        .unwrap_or(0)
}

/// Coefficients of p then q, powers 0..=deg.
fn flatten<S: Scalar>(s: &GlobalSection<S>, deg: i64) -> Vec<S> {
    s.p.iter().chain(&s.q).flat_map(|poly| (0..=deg).map(move |k| poly.coeff(k))).collect()
}

/// Coordinates c with Σ c_ρ·β_ρ = s, if s lies in the span.
pub fn section_coordinates<S: Scalar>(basis: &[GlobalSection<S>], s: &GlobalSection<S>) -> Option<Vec<S>> {
    let all: Vec<GlobalSection<S>> = basis.iter().cloned().chain(std::iter::once(s.clone())).collect();
    let deg = max_degree(&all);
    let vecs: Vec<Vec<S>> = all.iter().map(|x| flatten(x, deg)).collect();
    let l = basis.len();
    // unknowns (c_0 … c_{l−1}, c_l); solution needs c_l = −1
    let mut e = Echelon::new(l + 1);
    for row in 0..vecs[0].len() {
        e.insert((0..=l).map(|k| (k, vecs[k][row].clone())));
    }
    let ker = e.kernel_basis();
    let v = ker.iter().find(|v| !v[l].is_zero())?;
    let scale = -S::one() / v[l].clone();
    if ker.len() > 1 {
        return None;
    }
    Some(v[..l].iter().map(|x| x.clone() * scale.clone()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// w̃₀ = B·w̃₁ (the bundle convention x₀ = T·x₁).
    V1ToV0,
    /// w̃₁ = B·w̃₀.
    V0ToV1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalBundle<S: Scalar> {
    pub bundle: BundleCP1<S>,
    pub orientation: Orientation,
    /// (∂φ/∂z)(∂g/∂w) on the overlap; zero for linear total spaces.
    pub correction: LaurentMatrix<S>,
}

impl<S: Scalar> NormalBundle<S> {
    /// Transition in the V₀ → V₁ direction, T⁻¹.
    pub fn transition_v0_to_v1(&self) -> Result<LaurentMatrix<S>> {
        self.bundle.transition().inverse()
    }
}

/// Normal bundle of s(CP¹) in the total space of E. Chart change from U₁ to
/// U₀: w₀ = f(w₁, z₁) = T(1/z₁)·w₁, z₀ = g(w₁, z₁) = 1/z₁. With φ₀ = p the
/// section in U₀, B = ∂f/∂w − (∂φ₀/∂z)(∂g/∂w) on the section.
pub fn normal_bundle_of_section<S: Scalar>(e: &BundleCP1<S>, s: &GlobalSection<S>) -> Result<NormalBundle<S>> {
    if !s.is_section_of(e) {
        return Err(Error::InvalidSection);
    }
    let r = e.rank();
    let df_dw = e.transition().clone();
    let dg_dw: Vec<LaurentPoly<S>> = vec![LaurentPoly::zero(); r];
    let dphi_dz: Vec<LaurentPoly<S>> = s.p.iter().map(LaurentPoly::derivative).collect();
    let correction = LaurentMatrix::from_fn(r, |l, m| dphi_dz[l].mul_ref(&dg_dw[m]));
    if correction.entries().iter().any(|p| !p.is_zero()) {
        return Err(Error::InvalidSection);
    }
    let b = df_dw.sub(&correction)?;
    Ok(NormalBundle { bundle: BundleCP1::new(b)?, orientation: Orientation::V1ToV0, correction })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliDim {
    pub h0: usize,
    pub h1: usize,
    pub regular: bool,
}

pub fn moduli_dim<S: Scalar>(e: &BundleCP1<S>, s: &GlobalSection<S>) -> Result<ModuliDim> {
    let nb = normal_bundle_of_section(e, s)?;
    let h0 = nb.bundle.h0()?;
    let h1 = nb.bundle.h1()?;
    Ok(ModuliDim { h0, h1, regular: h1 == 0 })
}

/// s_t = s + Σ t_ρ·β_ρ over the section basis of the normal bundle.
pub fn canonical_deformation<S: Scalar>(e: &BundleCP1<S>, s: &GlobalSection<S>) -> Result<SectionFamily<S>> {
    let nb = normal_bundle_of_section(e, s)?;
    let h1 = nb.bundle.h1()?;
    if h1 != 0 {
        return Err(Error::NotRegular(h1));
    }
    let basis = nb.bundle.section_space(None)?.basis;
    let l = basis.len();
    let mut terms = vec![(vec![0; l], s.clone())];
    for (rho, beta) in basis.into_iter().enumerate() {
        let mut alpha = vec![0; l];
        alpha[rho] = 1;
        terms.push((alpha, beta));
    }
    let fam = SectionFamily::new(e.clone(), l, terms)?;
    // boundary conditions: s_0 = s and ∂s/∂t_ρ|₀ = β_ρ
    if fam.eval(&vec![S::zero(); l])? != *s {
        return Err(Error::InvalidSection);
    }
    Ok(fam)
}

/// Linear map L with s′_u = s_{L·u}, for an affine family s′ through the
/// same base section.
pub fn factor_through_canonical<S: Scalar>(canonical: &SectionFamily<S>, other: &SectionFamily<S>) -> Result<Matrix<S>> {
    let l = canonical.params;
    let zero_c = vec![S::zero(); l];
    let zero_o = vec![S::zero(); other.params];
    if canonical.eval(&zero_c)? != other.eval(&zero_o)? {
        return Err(Error::InvalidSection);
    }
    let basis = (0..l)
        .map(|rho| {
            let mut e = vec![S::zero(); l];
            e[rho] = S::one();
            canonical.kodaira_spencer(&zero_c, &e)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = Vec::with_capacity(other.params);
    for k in 0..other.params {
        let mut e = vec![S::zero(); other.params];
        e[k] = S::one();
        let gamma = other.kodaira_spencer(&zero_o, &e)?;
        cols.push(section_coordinates(&basis, &gamma).ok_or(Error::InvalidSection)?);
    }
    Ok(Matrix::from_fn(l, other.params, |i, j| cols[j][i].clone()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyRecord {
    pub t: Vec<String>,
    pub h0: usize,
    pub h1: usize,
    pub splitting: Vec<i64>,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformationReport {
    pub twist: i64,
    pub special: CohomologyRecord,
    pub samples: Vec<CohomologyRecord>,
    pub semicontinuous: bool,
    pub riemann_roch_constant: bool,
}

fn record<S: Scalar>(f: &BundleFamily<S>, t: &[S], m: i64) -> Result<CohomologyRecord> {
    let e = f.eval(t)?.twist(m);
    let st = e.splitting_type()?;
    Ok(CohomologyRecord {
        t: t.iter().map(|x| x.to_string()).collect(),
        h0: e.h0()?,
        h1: st.h1(),
        splitting: st.degrees,
        winding: e.winding(),
    })
}

/// Cohomology of E_t(m) at the special point and at each sample; the verdict
/// requires hᵠ(sample) ≤ hᵠ(special) for q = 0, 1.
pub fn semicontinuity_scan<S: Scalar>(
    f: &BundleFamily<S>,
    t_special: &[S],
    t_samples: &[Vec<S>],
    m: i64,
) -> Result<DeformationReport> {
    let special = record(f, t_special, m)?;
    let samples = t_samples.iter().map(|t| record(f, t, m)).collect::<Result<Vec<_>>>()?;
    let semicontinuous = samples.iter().all(|r| r.h0 <= special.h0 && r.h1 <= special.h1);
    let rr = |r: &CohomologyRecord| r.h0 as i64 - r.h1 as i64;
    let expected = special.winding + f.rank as i64;
    let riemann_roch_constant =
        std::iter::once(&special).chain(&samples).all(|r| rr(r) == expected && r.winding == special.winding);
    Ok(DeformationReport { twist: m, special, samples, semicontinuous, riemann_roch_constant })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub splittings: Vec<Vec<i64>>,
    pub all_ones: bool,
    pub correction_zero: bool,
}

/// Normal-bundle splitting of each section of ⊕²ⁿO(1); stable iff all (1, …, 1).
pub fn splitting_stability_scan<S: Scalar>(n: usize, sections: &[SectionAB<S>]) -> Result<StabilityReport> {
    let e = BundleCP1::<S>::line_sum(&vec![1; 2 * n])?;
    let mut splittings = Vec::with_capacity(sections.len());
    let mut correction_zero = true;
    for s in sections {
        if s.dim() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, found: s.dim() });
        }
        let nb = normal_bundle_of_section(&e, &s.to_global())?;
        correction_zero &= nb.correction.entries().iter().all(LaurentPoly::is_zero);
        splittings.push(nb.bundle.splitting_type()?.degrees);
    }
    let all_ones = splittings.iter().all(|d| d.iter().all(|&x| x == 1));
    Ok(StabilityReport { splittings, all_ones, correction_zero })
}
