//! Twistor construction for flat hyperkähler ℂ²ⁿ.
//!
//! Frame order: (∂w¹ … ∂w²ⁿ, ∂w̄¹ … ∂w̄²ⁿ). Pair p owns the holomorphic
//! indices 2p, 2p+1 and the antiholomorphic indices 2n+2p, 2n+2p+1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::quaternionic::{check_quaternionic, QuaternionicData, SectionAB};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    U0,
    U1,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatHK<S> {
    pub n: usize,
    pub i: Matrix<S>,
    pub j: Matrix<S>,
    pub k: Matrix<S>,
    pub g: Matrix<S>,
}

/// Matrices of ω_S(X, Y) = Xᵀ·W·Y with W = Sᵀ·g.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaFamily<S> {
    pub w1: Matrix<S>,
    pub w2: Matrix<S>,
    pub w3: Matrix<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistorPoint<S> {
    pub chart: Chart,
    pub zeta: S,
    pub fiber: Vec<S>,
}

/// Global index of local slot l ∈ 0..4 of pair p.
fn slot(n: usize, p: usize, l: usize) -> usize {
    match l {
        0 => 2 * p,
        1 => 2 * p + 1,
        2 => 2 * n + 2 * p,
        _ => 2 * n + 2 * p + 1,
    }
}

/// Places a 4×4 block (in local slots) on every pair.
fn blockwise<S: Scalar>(n: usize, local: &[(usize, usize, S)]) -> Matrix<S> {
    let mut m = Matrix::zeros(4 * n, 4 * n);
    for p in 0..n {
        for (r, c, v) in local {
            m[(slot(n, p, *r), slot(n, p, *c))] = v.clone();
        }
    }
    m
}

pub fn standard_flat<S: Scalar>(n: usize) -> FlatHK<S> {
    let i = S::i();
    let one = S::one();
    let half = S::from_ratio(1, 2);
    let im = blockwise(
        n,
        &[(0, 0, i.clone()), (1, 1, i.clone()), (2, 2, -i.clone()), (3, 3, -i.clone())],
    );
    let jm = blockwise(n, &[(0, 3, one.clone()), (1, 2, -one.clone()), (2, 1, one.clone()), (3, 0, -one)]);
    let km = blockwise(n, &[(0, 3, i.clone()), (1, 2, -i.clone()), (2, 1, -i.clone()), (3, 0, i)]);
    let g = blockwise(
        n,
        &[(0, 2, half.clone()), (2, 0, half.clone()), (1, 3, half.clone()), (3, 1, half)],
    );
    FlatHK { n, i: im, j: jm, k: km, g }
}

/// Points of S² for ζ in the given chart: (a, b, c) with a² + b² + c² = 1.
pub fn sphere_coefficients<S: Scalar>(chart: Chart, zeta: &S) -> (S, S, S) {
    let nz = zeta.norm_sqr();
    let sum = zeta.clone() + zeta.conj();
    let d = S::one() + nz.clone();
    match chart {
        Chart::U0 => (
            (S::one() - nz) / d.clone(),
            sum / d.clone(),
            S::i() * (zeta.conj() - zeta.clone()) / d,
        ),
        Chart::U1 => (
            (nz - S::one()) / d.clone(),
            sum / d.clone(),
            S::i() * (zeta.clone() - zeta.conj()) / d,
        ),
    }
}

/// Twelve fixed sample points, usable in either chart.
pub fn default_samples<S: Scalar>() -> Vec<S> {
    let c = |re: i64, im: i64, den: i64| S::from_ratio(re, den) + S::from_ratio(im, den) * S::i();
    vec![
        c(0, 0, 1),
        c(1, 0, 1),
        c(-1, 0, 1),
        c(0, 1, 1),
        c(0, -1, 1),
        c(2, 0, 1),
        c(1, 1, 1),
        c(2, -1, 1),
        c(1, 0, 2),
        c(-3, 2, 1),
        c(1, -1, 3),
        c(-1, -1, 2),
    ]
}

impl<S: Scalar> FlatHK<S> {
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    /// a·I + b·J + c·K at ζ.
    pub fn structure_at(&self, chart: Chart, zeta: &S) -> Matrix<S> {
        let (a, b, c) = sphere_coefficients(chart, zeta);
        self.i.scale(&a).add(&self.j.scale(&b)).add(&self.k.scale(&c))
    }

    pub fn omega_family(&self) -> OmegaFamily<S> {
        let w = |s: &Matrix<S>| s.transpose().mul(&self.g);
        OmegaFamily { w1: w(&self.i), w2: w(&self.j), w3: w(&self.k) }
    }

    /// U₀: (W2 + iW3) − 2ζW1 − ζ²(W2 − iW3); U₁: ζ²(W2 + iW3) − 2ζW1 − (W2 − iW3).
    pub fn omega_at(&self, chart: Chart, zeta: &S) -> Matrix<S> {
        let f = self.omega_family();
        let plus = f.w2.add(&f.w3.scale(&S::i()));
        let minus = f.w2.sub(&f.w3.scale(&S::i()));
        let lin = f.w1.scale(&(S::from_i64(-2) * zeta.clone()));
        let z2 = zeta.clone() * zeta.clone();
        match chart {
            Chart::U0 => plus.add(&lin).sub(&minus.scale(&z2)),
            Chart::U1 => plus.scale(&z2).add(&lin).sub(&minus),
        }
    }

    /// Largest entry of ω(ζ)·P where P = (Id + i·I_ζ)/2 projects onto the
    /// (0,1)-vectors of I_ζ; zero iff ω(ζ) has type (2,0).
    pub fn type20_residual(&self, chart: Chart, zeta: &S) -> f64 {
        let proj = Matrix::identity(self.dim())
            .add(&self.structure_at(chart, zeta).scale(&S::i()))
            .scale(&S::from_ratio(1, 2));
        self.omega_at(chart, zeta).mul(&proj).max_abs()
    }

    /// ω_{U₀}(ζ₀) − ζ₀²·ω_{U₁}(1/ζ₀), for ζ₀ ≠ 0.
    pub fn chart_law_defect(&self, zeta0: &S) -> Matrix<S> {
        let inv = S::one() / zeta0.clone();
        let z2 = zeta0.clone() * zeta0.clone();
        self.omega_at(Chart::U0, zeta0).sub(&self.omega_at(Chart::U1, &inv).scale(&z2))
    }

    /// I_ζ₀·Jac(ζ₀) − Jac(ζ₀)·diag(i, −i) on the U₀ chart.
    pub fn intertwine_defect(&self, zeta: &S) -> Matrix<S> {
        let jac = fiber_jacobian(self.n, zeta);
        let d = Matrix::diag(
            &(0..self.dim()).map(|k| if k < 2 * self.n { S::i() } else { -S::i() }).collect::<Vec<_>>(),
        );
        self.structure_at(Chart::U0, zeta).mul(&jac).sub(&jac.mul(&d))
    }

    pub fn intertwine_residual(&self, zeta: &S) -> f64 {
        self.intertwine_defect(zeta).max_abs()
    }

    /// Ω_raw[a][b] = ω(ζ)(Jac·eₐ, Jac·e_b) for holomorphic fiber directions,
    /// required to agree at every sample.
    pub fn restrict_omega_at(&self, zeta: &S) -> Matrix<S> {
        let jac = fiber_jacobian(self.n, zeta);
        let w = self.omega_at(Chart::U0, zeta);
        let hol = Matrix::from_fn(self.dim(), 2 * self.n, |r, c| jac[(r, c)].clone());
        hol.transpose().mul(&w).mul(&hol)
    }

    pub fn restrict_omega(&self) -> Result<Matrix<S>> {
        let samples = [
            S::zero(),
            S::one(),
            S::i(),
            S::from_i64(2) - S::i(),
        ];
        let base = self.restrict_omega_at(&samples[0]);
        let mut worst = 0.0f64;
        for z in &samples[1..] {
            let d = self.restrict_omega_at(z).sub(&base);
            if !d.is_zero_within(1e-12) {
                worst = worst.max(d.max_abs());
            }
        }
        if worst > 0.0 {
            return Err(Error::NotConstant(worst));
        }
        Ok(base)
    }

    /// Residuals of the quaternion relations and metric compatibility.
    pub fn invariant_residuals(&self) -> Vec<(&'static str, f64)> {
        let id = Matrix::identity(self.dim());
        let sq = |m: &Matrix<S>| m.mul(m).add(&id).max_abs();
        let compat = |m: &Matrix<S>| m.transpose().mul(&self.g).mul(m).sub(&self.g).max_abs();
        vec![
            ("I^2=-1", sq(&self.i)),
            ("J^2=-1", sq(&self.j)),
            ("K^2=-1", sq(&self.k)),
            ("IJ=K", self.i.mul(&self.j).sub(&self.k).max_abs()),
            ("JI=-K", self.j.mul(&self.i).add(&self.k).max_abs()),
            ("g symmetric", self.g.sub(&self.g.transpose()).max_abs()),
            ("g(I,I)=g", compat(&self.i)),
            ("g(J,J)=g", compat(&self.j)),
            ("g(K,K)=g", compat(&self.k)),
        ]
    }

    /// Re-check of Wᵢ antisymmetry.
    pub fn omega_antisymmetry_residual(&self) -> f64 {
        let f = self.omega_family();
        [f.w1, f.w2, f.w3].iter().map(|w| w.add(&w.transpose()).max_abs()).fold(0.0, f64::max)
    }

    /// g(X, X) for the real vector X = (v, v̄); equals Σ|vₐ|².
    pub fn real_norm(&self, v: &[S]) -> Result<S> {
        if v.len() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, found: v.len() });
        }
        let x: Vec<S> = v.iter().cloned().chain(v.iter().map(S::conj)).collect();
        self.g.bilinear(&x, &x)
    }
}

/// Jacobian of the U₀ fiber map z ↦ w in the frames (∂z, ∂z̄) → (∂w, ∂w̄).
pub fn fiber_jacobian<S: Scalar>(n: usize, zeta: &S) -> Matrix<S> {
    let c = S::one() + zeta.norm_sqr();
    let iz = S::i() * zeta.clone();
    let izb = S::i() * zeta.conj();
    let one = S::one();
    blockwise(
        n,
        &[
            (0, 0, one.clone()),
            (0, 3, iz.clone()),
            (1, 1, one.clone()),
            (1, 2, -iz),
            (2, 1, -izb.clone()),
            (2, 2, one.clone()),
            (3, 0, izb),
            (3, 3, one),
        ],
    )
    .scale(&(S::one() / c))
}

fn check_fiber<S: Scalar>(p: &TwistorPoint<S>) -> Result<usize> {
    if !p.fiber.len().is_multiple_of(2) {
        return Err(Error::OddDimension(p.fiber.len()));
    }
    Ok(p.fiber.len() / 2)
}

/// ⊕²ⁿO(1) → 𝒵 = CP¹ × ℂ²ⁿ, pairwise.
pub fn phi_forward<S: Scalar>(p: &TwistorPoint<S>) -> Result<TwistorPoint<S>> {
    let n = check_fiber(p)?;
    let z = &p.zeta;
    let c = S::one() + z.norm_sqr();
    let i = S::i();
    let mut w = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (z1, z2) = (p.fiber[2 * k].clone(), p.fiber[2 * k + 1].clone());
        let (w1, w2) = match p.chart {
            Chart::U0 => (
                z1.clone() + i.clone() * z.clone() * z2.conj(),
                z2 - i.clone() * z.clone() * z1.conj(),
            ),
            Chart::U1 => (z.conj() * z1.clone() + i.clone() * z2.conj(), z.conj() * z2 - i.clone() * z1.conj()),
        };
        w.push(w1 / c.clone());
        w.push(w2 / c.clone());
    }
    Ok(TwistorPoint { chart: p.chart, zeta: z.clone(), fiber: w })
}

pub fn phi_inverse<S: Scalar>(p: &TwistorPoint<S>) -> Result<TwistorPoint<S>> {
    let n = check_fiber(p)?;
    let z = &p.zeta;
    let i = S::i();
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let (w1, w2) = (p.fiber[2 * k].clone(), p.fiber[2 * k + 1].clone());
        let (z1, z2) = match p.chart {
            Chart::U0 => (
                w1.clone() - i.clone() * z.clone() * w2.conj(),
                w2 + i.clone() * z.clone() * w1.conj(),
            ),
            Chart::U1 => (z.clone() * w1.clone() - i.clone() * w2.conj(), z.clone() * w2 + i.clone() * w1.conj()),
        };
        out.push(z1);
        out.push(z2);
    }
    Ok(TwistorPoint { chart: p.chart, zeta: z.clone(), fiber: out })
}

/// Block-diagonal copies of [[0, −i], [i, 0]].
pub fn quaternionic_from_tau<S: Scalar>(n: usize) -> QuaternionicData<S> {
    let block = Matrix::from_rows(vec![vec![S::zero(), -S::i()], vec![S::i(), S::zero()]]).expect("2x2");
    check_quaternionic(Matrix::block_diag(&vec![block; n])).expect("flat A is quaternionic")
}

/// τ for a quaternionic matrix A: U₀ (ζ, z) ↦ U₁ (−ζ̄, −Ā·z̄) and
/// U₁ (ζ, z) ↦ U₀ (−ζ̄, Ā·z̄).
pub fn tau_apply_with<S: Scalar>(q: &QuaternionicData<S>, p: &TwistorPoint<S>) -> Result<TwistorPoint<S>> {
    let jz = q.apply_j(&p.fiber)?;
    let zeta = -p.zeta.conj();
    Ok(match p.chart {
        Chart::U0 => TwistorPoint { chart: Chart::U1, zeta, fiber: jz.into_iter().map(|x| -x).collect() },
        Chart::U1 => TwistorPoint { chart: Chart::U0, zeta, fiber: jz },
    })
}

pub fn tau_apply<S: Scalar>(p: &TwistorPoint<S>) -> Result<TwistorPoint<S>> {
    let n = check_fiber(p)?;
    tau_apply_with(&quaternionic_from_tau(n), p)
}

/// The real section through (x, y): per pair a = (xₚ, yₚ), b = (−iȳₚ, ix̄ₚ).
pub fn real_section_from_point<S: Scalar>(x: &[S], y: &[S]) -> Result<SectionAB<S>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let mut a = Vec::with_capacity(2 * x.len());
    let mut b = Vec::with_capacity(2 * x.len());
    for (xp, yp) in x.iter().zip(y) {
        a.push(xp.clone());
        a.push(yp.clone());
        b.push(-S::i() * yp.conj());
        b.push(S::i() * xp.conj());
    }
    SectionAB::new(a, b)
}

/// Value of a section φ(a, b) at a point of either chart.
pub fn section_point<S: Scalar>(s: &SectionAB<S>, chart: Chart, zeta: &S) -> TwistorPoint<S> {
    let fiber = match chart {
        Chart::U0 => s.a.iter().zip(&s.b).map(|(a, b)| a.clone() + b.clone() * zeta.clone()).collect(),
        Chart::U1 => s.a.iter().zip(&s.b).map(|(a, b)| a.clone() * zeta.clone() + b.clone()).collect(),
    };
    TwistorPoint { chart, zeta: zeta.clone(), fiber }
}

/// Distance between two points after moving both to the same chart.
pub fn point_distance<S: Scalar>(p: &TwistorPoint<S>, q: &TwistorPoint<S>) -> Result<f64> {
    let to_u0 = |t: &TwistorPoint<S>| -> Result<(S, Vec<S>)> {
        match t.chart {
            Chart::U0 => Ok((t.zeta.clone(), t.fiber.clone())),
            Chart::U1 => {
                if t.zeta.is_zero() {
                    return Err(Error::EvalAtPole);
                }
                let z0 = S::one() / t.zeta.clone();
                Ok((z0.clone(), t.fiber.iter().map(|x| x.clone() * z0.clone()).collect()))
            }
        }
    };
    let (za, fa) = to_u0(p)?;
    let (zb, fb) = to_u0(q)?;
    let mut d = (za - zb).abs_f64();
    for (x, y) in fa.iter().zip(&fb) {
        d = d.max((x.clone() - y.clone()).abs_f64());
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Float};

    fn ex(re: i64, im: i64) -> Exact {
        Exact::from_i64(re) + Exact::from_i64(im) * Exact::i()
    }

    #[test]
    fn flat_matrices_n1() {
        let hk = standard_flat::<Exact>(1);
        let i = Exact::i();
        assert_eq!(hk.i, Matrix::diag(&[i.clone(), i.clone(), -i.clone(), -i.clone()]));
        // J∂w¹ = −∂w̄², K∂w¹ = i∂w̄²
        assert_eq!(hk.j.column(0), vec![ex(0, 0), ex(0, 0), ex(0, 0), ex(-1, 0)]);
        assert_eq!(hk.k.column(0), vec![ex(0, 0), ex(0, 0), ex(0, 0), ex(0, 1)]);
        for (name, r) in hk.invariant_residuals() {
            assert_eq!(r, 0.0, "{name}");
        }
        for n in 2..4 {
            let hk = standard_flat::<Exact>(n);
            assert_eq!(hk.i.mul(&hk.j), hk.k);
        }
    }

    #[test]
    fn structure_at_examples() {
        let hk = standard_flat::<Exact>(1);
        assert_eq!(hk.structure_at(Chart::U0, &ex(0, 0)), hk.i);
        assert_eq!(hk.structure_at(Chart::U0, &ex(1, 0)), hk.j);
        assert_eq!(hk.structure_at(Chart::U0, &ex(0, 1)), hk.k);
        // ζ₁ = 0 is the south pole −I
        assert_eq!(hk.structure_at(Chart::U1, &ex(0, 0)), hk.i.neg());
    }

    #[test]
    fn omega_examples() {
        let hk = standard_flat::<Exact>(1);
        let f = hk.omega_family();
        let plus = f.w2.add(&f.w3.scale(&Exact::i()));
        assert_eq!(hk.omega_at(Chart::U0, &ex(0, 0)), plus);
        assert_eq!(plus[(0, 1)], ex(-1, 0));
        assert_eq!(f.w2[(0, 1)], Exact::from_ratio(-1, 2));
        assert_eq!(f.w3[(0, 1)], Exact::from_ratio(1, 2) * Exact::i());
        for z in default_samples::<Exact>().into_iter().skip(1) {
            assert!(hk.chart_law_defect(&z).is_zero_within(0.0));
        }
        assert_eq!(hk.omega_antisymmetry_residual(), 0.0);
    }

    #[test]
    fn omega_is_type_20() {
        let hk = standard_flat::<Exact>(1);
        for z in default_samples::<Exact>() {
            assert_eq!(hk.type20_residual(Chart::U0, &z), 0.0, "U0 {z}");
            assert_eq!(hk.type20_residual(Chart::U1, &z), 0.0, "U1 {z}");
        }
    }

    #[test]
    fn phi_examples() {
        let p = TwistorPoint { chart: Chart::U0, zeta: ex(0, 0), fiber: vec![ex(1, 0), ex(0, 0)] };
        assert_eq!(phi_forward(&p).unwrap(), p);
        let p1 = TwistorPoint { chart: Chart::U0, zeta: ex(1, 0), fiber: vec![ex(1, 0), ex(0, 0)] };
        let w = phi_forward(&p1).unwrap();
        assert_eq!(w.fiber, vec![Exact::from_ratio(1, 2), Exact::from_ratio(-1, 2) * Exact::i()]);
        let p2 = TwistorPoint { chart: Chart::U1, zeta: ex(2, 1), fiber: vec![ex(3, -1), ex(0, 2)] };
        assert_eq!(phi_inverse(&phi_forward(&p2).unwrap()).unwrap(), p2);
    }

    #[test]
    fn charts_agree_for_phi() {
        // (ζ₀, x₀) and (1/ζ₀, x₀/ζ₀) are the same point of ⊕²O(1)
        let z0 = ex(2, 1);
        let x0 = vec![ex(1, -1), ex(3, 2)];
        let a = phi_forward(&TwistorPoint { chart: Chart::U0, zeta: z0.clone(), fiber: x0.clone() }).unwrap();
        let z1 = Exact::one() / z0.clone();
        let x1 = x0.iter().map(|x| x.clone() * z1.clone()).collect();
        let b = phi_forward(&TwistorPoint { chart: Chart::U1, zeta: z1, fiber: x1 }).unwrap();
        assert_eq!(a.fiber, b.fiber);
    }

    #[test]
    fn jacobian_determinant() {
        let jac = fiber_jacobian::<Exact>(1, &ex(1, 0));
        assert_eq!(jac.determinant().unwrap(), Exact::from_ratio(1, 4));
        let jac = fiber_jacobian::<Exact>(1, &ex(2, 1));
        assert_eq!(jac.determinant().unwrap(), Exact::from_ratio(1, 36));
    }

    #[test]
    fn intertwining_exact() {
        let hk = standard_flat::<Exact>(1);
        assert_eq!(hk.intertwine_residual(&ex(0, 0)), 0.0);
        assert_eq!(hk.intertwine_residual(&ex(1, 0)), 0.0);
        let hk2 = standard_flat::<Exact>(2);
        assert_eq!(hk2.intertwine_residual(&ex(-3, 2)), 0.0);
    }

    #[test]
    fn tau_examples() {
        let s = real_section_from_point(&[ex(1, 0)], &[ex(0, 0)]).unwrap();
        let pt = section_point(&s, Chart::U0, &ex(0, 0));
        assert_eq!(pt.fiber, vec![ex(1, 0), ex(0, 0)]);
        let t = tau_apply(&pt).unwrap();
        assert_eq!(t, TwistorPoint { chart: Chart::U1, zeta: ex(0, 0), fiber: vec![ex(0, 0), ex(0, 1)] });
        assert_eq!(tau_apply(&t).unwrap(), pt);
        // τ maps the real section into itself
        let z = ex(2, -1);
        let img = tau_apply(&section_point(&s, Chart::U0, &z)).unwrap();
        let on = section_point(&s, Chart::U1, &img.zeta);
        assert_eq!(img, on);
    }

    #[test]
    fn real_section_examples() {
        let s = real_section_from_point(&[ex(1, 0)], &[ex(0, 0)]).unwrap();
        assert_eq!(s.a, vec![ex(1, 0), ex(0, 0)]);
        assert_eq!(s.b, vec![ex(0, 0), ex(0, 1)]);
        assert!(real_section_from_point::<Exact>(&[ex(0, 0)], &[ex(0, 0)]).unwrap().is_zero());
        let q = quaternionic_from_tau::<Exact>(1);
        assert!(q.is_real_section(&s).unwrap());
    }

    #[test]
    fn tau_matrix() {
        let q = quaternionic_from_tau::<Exact>(1);
        let expect = Matrix::from_rows(vec![vec![ex(0, 0), ex(0, -1)], vec![ex(0, 1), ex(0, 0)]]).unwrap();
        assert_eq!(q.matrix(), &expect);
        assert_eq!(quaternionic_from_tau::<Exact>(3).dim(), 6);
    }

    #[test]
    fn restricted_omega() {
        let hk = standard_flat::<Exact>(1);
        let om = hk.restrict_omega().unwrap();
        assert_eq!(om, Matrix::from_rows(vec![vec![ex(0, 0), ex(-1, 0)], vec![ex(1, 0), ex(0, 0)]]).unwrap());
        assert!(om.add(&om.transpose()).is_zero_within(0.0));
        let hf = standard_flat::<Float>(1);
        assert!(hf.restrict_omega().is_ok());
    }

    #[test]
    fn real_vectors_have_real_norm() {
        let hk = standard_flat::<Exact>(1);
        assert_eq!(hk.real_norm(&[ex(1, 2), ex(0, -1)]).unwrap(), ex(6, 0));
    }
}
