//! Recovery of the hypercomplex triple and the metric from twistor data (A, Ω).
//!
//! A tangent vector at a real section s is encoded by a ∈ ℂ²ⁿ, standing for
//! φ(a, −j(a)). With ω(u, v) = uᵀΩv:
//!   g(a, b)  = −ω(a, j b) − ω(b, j a)
//!   ψ_ζ(a, b) = ω(a − ζ j a, b − ζ j b)

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{vec_add, vec_max_abs, vec_scale, vec_sub, Matrix};
use crate::quaternionic::{QuaternionicData, SectionAB};
use crate::rng;
use crate::scalar::{Backend, Scalar};
use crate::twistor::{quaternionic_from_tau, real_section_from_point, standard_flat, tau_apply, Chart, TwistorPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structure {
    I,
    J,
    K,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistorData<S> {
    pub q: QuaternionicData<S>,
    pub omega: Matrix<S>,
    pub mu: S,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    pub tolerance: f64,
    pub passed: bool,
}

fn tolerance<S: Scalar>() -> f64 {
    match S::BACKEND {
        Backend::Exact => 0.0,
        Backend::Float => 1e-10,
    }
}

/// −Ω·Ā: the matrix of H(a, b) = aᵀ·G·b̄.
pub fn hermitian_gram<S: Scalar>(omega: &Matrix<S>, q: &QuaternionicData<S>) -> Matrix<S> {
    omega.mul(&q.matrix().conj()).neg()
}

/// Finds the unit μ making −aᵀ(μΩ_raw)Āb̄ Hermitian positive-definite.
/// Positivity pins μ·G_kk > 0 on any nonzero diagonal entry, so μ is unique.
pub fn normalize_symplectic_phase<S: Scalar>(omega_raw: &Matrix<S>, q: &QuaternionicData<S>) -> Result<(S, Matrix<S>)> {
    if omega_raw.rows() != q.dim() || omega_raw.cols() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: omega_raw.rows() });
    }
    if !omega_raw.add(&omega_raw.transpose()).is_zero_within(1e-12) {
        return Err(Error::NoAdmissiblePhase);
    }
    if omega_raw.inverse().is_none() {
        return Err(Error::Singular);
    }
    let g = hermitian_gram(omega_raw, q);
    let tol = tolerance::<S>();
    let diag = (0..g.rows())
        .map(|k| g[(k, k)].clone())
        .filter(|d| !d.is_negligible(tol.max(1e-300)))
        .max_by(|a, b| a.abs_f64().total_cmp(&b.abs_f64()))
        .ok_or(Error::NoAdmissiblePhase)?;
    let modulus = diag.norm_sqr().sqrt_nonneg().ok_or(Error::PhaseNotRepresentable)?;
    let mu = diag.conj() / modulus;
    if !g.scale(&mu).is_hermitian_positive_definite(1e-12) {
        return Err(Error::NoAdmissiblePhase);
    }
    Ok((mu.clone(), omega_raw.scale(&mu)))
}

impl<S: Scalar> TwistorData<S> {
    pub fn new(q: QuaternionicData<S>, omega_raw: &Matrix<S>) -> Result<Self> {
        let (mu, omega) = normalize_symplectic_phase(omega_raw, &q)?;
        Ok(TwistorData { q, omega, mu })
    }

    /// Wraps Ω as given, without the phase search.
    pub fn unchecked(q: QuaternionicData<S>, omega: Matrix<S>) -> Self {
        TwistorData { q, omega, mu: S::one() }
    }

    /// Data of the flat model: A from τ and Ω from the restricted pencil.
    pub fn flat(n: usize) -> Result<Self> {
        let hk = standard_flat::<S>(n);
        TwistorData::new(quaternionic_from_tau(n), &hk.restrict_omega()?)
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn gram(&self) -> Matrix<S> {
        hermitian_gram(&self.omega, &self.q)
    }

    /// Aᵀ·Ω̄ + Ω·Ā, zero iff H is Hermitian.
    pub fn hermitian_defect(&self) -> Matrix<S> {
        let a = self.q.matrix();
        a.transpose().mul(&self.omega.conj()).add(&self.omega.mul(&a.conj()))
    }

    fn check(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    pub fn omega_form(&self, u: &[S], v: &[S]) -> Result<S> {
        self.check(u)?;
        self.check(v)?;
        self.omega.bilinear(u, v)
    }

    pub fn j(&self, a: &[S]) -> Result<Vec<S>> {
        self.q.apply_j(a)
    }

    /// I_{α,β}: b = [i(|α|² − |β|²)a − 2iᾱβ·j(a)] / (|α|² + |β|²).
    pub fn tangent_cs(&self, alpha: &S, beta: &S, a: &[S]) -> Result<Vec<S>> {
        self.check(a)?;
        if alpha.is_zero() && beta.is_zero() {
            return Err(Error::ZeroParameter);
        }
        if beta.is_zero() {
            return Ok(vec_scale(&S::i(), a));
        }
        let na = alpha.norm_sqr();
        let nb = beta.norm_sqr();
        let den = na.clone() + nb.clone();
        let c1 = S::i() * (na - nb) / den.clone();
        let c2 = S::from_i64(-2) * S::i() * alpha.conj() * beta.clone() / den;
        Ok(vec_add(&vec_scale(&c1, a), &vec_scale(&c2, &self.j(a)?)))
    }

    /// I(a) = i·a, J(a) = j(a), K = I∘J.
    pub fn apply_structure(&self, which: Structure, a: &[S]) -> Result<Vec<S>> {
        self.check(a)?;
        match which {
            Structure::I => Ok(vec_scale(&S::i(), a)),
            Structure::J => self.j(a),
            Structure::K => Ok(vec_scale(&S::i(), &self.j(a)?)),
        }
    }

    /// Complex value of −ω(a, jb) − ω(b, ja), without the reality check.
    pub fn metric_raw(&self, a: &[S], b: &[S]) -> Result<S> {
        let jb = self.j(b)?;
        let ja = self.j(a)?;
        Ok(-self.omega_form(a, &jb)? - self.omega_form(b, &ja)?)
    }

    pub fn metric(&self, a: &[S], b: &[S]) -> Result<S> {
        let v = self.metric_raw(a, b)?;
        let im = v.im();
        let scale = v.abs_f64().max(1.0);
        if !im.is_negligible(tolerance::<S>() * scale) {
            return Err(Error::NotReal(im.abs_f64()));
        }
        Ok(v.re())
    }

    pub fn psi(&self, zeta: &S, a: &[S], b: &[S]) -> Result<S> {
        let u = vec_sub(a, &vec_scale(zeta, &self.j(a)?));
        let v = vec_sub(b, &vec_scale(zeta, &self.j(b)?));
        self.omega_form(&u, &v)
    }

    /// ω_S(a, b) = g(S·a, b).
    pub fn kahler(&self, which: Structure, a: &[S], b: &[S]) -> Result<S> {
        self.metric(&self.apply_structure(which, a)?, b)
    }

    /// The ψ-combinations: ω_I = −(i/2)(ψ₋₁ − ψ₁), ω_J = −(ψ₁ + ψ₋₁)/2,
    /// ω_K = −i[(ψ₁ + ψ₋₁)/2 − 2ψ₀].
    pub fn kahler_via_psi(&self, which: Structure, a: &[S], b: &[S]) -> Result<S> {
        let p1 = self.psi(&S::one(), a, b)?;
        let pm = self.psi(&-S::one(), a, b)?;
        let half = S::from_ratio(1, 2);
        Ok(match which {
            Structure::I => -(S::i() * half) * (pm - p1),
            Structure::J => -half * (p1 + pm),
            Structure::K => {
                let p0 = self.psi(&S::zero(), a, b)?;
                -S::i() * (half * (p1 + pm) - S::from_i64(2) * p0)
            }
        })
    }

    /// Value at ζ of the real section with tangent parameter a:
    /// a − ζ·j(a) on U₀, ζ·a − j(a) on U₁.
    pub fn evaluate_real_section(&self, chart: Chart, zeta: &S, a: &[S]) -> Result<Vec<S>> {
        let ja = self.j(a)?;
        Ok(match chart {
            Chart::U0 => vec_sub(a, &vec_scale(zeta, &ja)),
            Chart::U1 => vec_sub(&vec_scale(zeta, a), &ja),
        })
    }

    /// Real matrix of a ↦ evaluate_real_section(ζ, a) in (Re, Im) coordinates.
    pub fn evaluation_real_matrix(&self, chart: Chart, zeta: &S) -> Result<Matrix<S>> {
        let cols = real_basis::<S>(self.dim())
            .iter()
            .map(|u| {
                self.evaluate_real_section(chart, zeta, u)
                    .map(|v| v.iter().flat_map(|z| [z.re(), z.im()]).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let m = 2 * self.dim();
        Ok(Matrix::from_fn(m, m, |i, j| cols[j][i].clone()))
    }

    /// Real Gram matrix of g on the frame (e₁, i·e₁, e₂, i·e₂, …).
    pub fn metric_gram(&self) -> Result<Matrix<S>> {
        let basis = real_basis::<S>(self.dim());
        let m = basis.len();
        let mut out = Matrix::zeros(m, m);
        for r in 0..m {
            for c in 0..m {
                out[(r, c)] = self.metric(&basis[r], &basis[c])?;
            }
        }
        Ok(out)
    }

    /// Real matrix of ω_S on the same real frame, as f64.
    pub fn kahler_real_matrix(&self, which: Structure) -> Result<Vec<Vec<f64>>> {
        let basis = real_basis::<S>(self.dim());
        basis
            .iter()
            .map(|u| basis.iter().map(|v| self.kahler(which, u, v).map(|x| x.to_c64().re)).collect())
            .collect()
    }

    /// ι(φ(a, b)) = φ(j(b), −j(a)) on the parameter space of all sections.
    pub fn iota(&self, s: &SectionAB<S>) -> Result<SectionAB<S>> {
        SectionAB::new(self.j(&s.b)?, self.j(&s.a)?.into_iter().map(|x| -x).collect())
    }
}

/// (e₁, i·e₁, e₂, i·e₂, …) in ℂᵈ.
pub fn real_basis<S: Scalar>(d: usize) -> Vec<Vec<S>> {
    let mut out = Vec::with_capacity(2 * d);
    for k in 0..d {
        for unit in [S::one(), S::i()] {
            let mut v = vec![S::zero(); d];
            v[k] = unit;
            out.push(v);
        }
    }
    out
}

/// Central-difference exterior derivative of a 2-form field on ℝᵐ, given as a
/// function returning its antisymmetric coefficient matrix. Returns the
/// largest |(dω)_{ijk}|.
pub fn exterior_derivative_residual(form: impl Fn(&[f64]) -> Vec<Vec<f64>>, point: &[f64], step: f64) -> f64 {
    let m = point.len();
    let partial = |i: usize| -> Vec<Vec<f64>> {
        let mut xp = point.to_vec();
        let mut xm = point.to_vec();
        xp[i] += step;
        xm[i] -= step;
        let (fp, fm) = (form(&xp), form(&xm));
        fp.iter()
            .zip(&fm)
            .map(|(rp, rm)| rp.iter().zip(rm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
            .collect()
    };
    let d: Vec<Vec<Vec<f64>>> = (0..m).map(partial).collect();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let v = d[i][j][k] - d[j][i][k] + d[k][i][j];
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-6;

/// Quaternionic matrix read off τ at the point s(0) of a real section:
/// τ(p + x) − τ(p) = −j(x) in the U₁ fiber over ζ₁ = 0, and j(e_k) is the
/// k-th column of Ā.
pub fn local_quaternionic_matrix<S: Scalar>(s: &SectionAB<S>) -> Result<Matrix<S>> {
    let d = s.dim();
    let base = TwistorPoint { chart: Chart::U0, zeta: S::zero(), fiber: s.a.clone() };
    let t0 = tau_apply(&base)?;
    let mut abar = Matrix::zeros(d, d);
    for k in 0..d {
        let mut fiber = s.a.clone();
        fiber[k] = fiber[k].clone() + S::one();
        let tk = tau_apply(&TwistorPoint { chart: Chart::U0, zeta: S::zero(), fiber })?;
        for r in 0..d {
            abar[(r, k)] = t0.fiber[r].clone() - tk.fiber[r].clone();
        }
    }
    Ok(abar.conj())
}

fn error_name(e: &Error) -> String {
    match e {
        Error::NotReal(_) => "NotReal".to_string(),
        other => format!("{other:?}"),
    }
}

/// Runs the identity battery on `samples` random tangent vectors.
pub fn verify_suite<S: Scalar>(data: &TwistorData<S>, samples: usize, seed: u64) -> VerifyReport {
    let tol = tolerance::<S>();
    let mut rng = rng::seeded(seed);
    let d = data.dim();
    let mut checks: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures: Vec<String> = Vec::new();
    let bump = |checks: &mut BTreeMap<String, f64>, name: &str, v: f64| {
        let e = checks.entry(name.to_string()).or_insert(0.0);
        *e = e.max(v);
    };
    let fail = |failures: &mut Vec<String>, msg: String| {
        if !failures.contains(&msg) {
            failures.push(msg);
        }
    };

    for _ in 0..samples {
        let a: Vec<S> = rng::vector(&mut rng, d);
        let b: Vec<S> = rng::vector(&mut rng, d);
        let alpha: S = rng::scalar(&mut rng);
        let beta: S = rng::scalar_nonzero(&mut rng);
        let lambda: S = rng::scalar_nonzero(&mut rng);

        let step = (|| -> Result<()> {
            let st = |w, x: &[S]| data.apply_structure(w, x);
            let (ia, ja, ka) = (st(Structure::I, &a)?, st(Structure::J, &a)?, st(Structure::K, &a)?);
            let plus_a = |v: Vec<S>| vec_max_abs(&vec_add(&v, &a));
            bump(&mut checks, "I^2=-1", plus_a(st(Structure::I, &ia)?));
            bump(&mut checks, "J^2=-1", plus_a(st(Structure::J, &ja)?));
            bump(&mut checks, "K^2=-1", plus_a(st(Structure::K, &ka)?));
            bump(&mut checks, "IJ=K", vec_max_abs(&vec_sub(&st(Structure::I, &ja)?, &ka)));
            bump(&mut checks, "JI=-K", vec_max_abs(&vec_add(&st(Structure::J, &ia)?, &ka)));

            let cs = data.tangent_cs(&alpha, &beta, &a)?;
            bump(&mut checks, "I_ab^2=-1", plus_a(data.tangent_cs(&alpha, &beta, &cs)?));
            let scaled = data.tangent_cs(&(lambda.clone() * alpha.clone()), &(lambda.clone() * beta.clone()), &a)?;
            bump(&mut checks, "scale_invariance", vec_max_abs(&vec_sub(&scaled, &cs)));
            // defining equation for (α, β) = (1, ζ): b − ζj(b) = i(a − ζj(a))
            let zeta = beta.clone();
            let bz = data.tangent_cs(&S::one(), &zeta, &a)?;
            let lhs = data.evaluate_real_section(Chart::U0, &zeta, &bz)?;
            let rhs = vec_scale(&S::i(), &data.evaluate_real_section(Chart::U0, &zeta, &a)?);
            bump(&mut checks, "fiber_structure", vec_max_abs(&vec_sub(&lhs, &rhs)));

            let gab = data.metric(&a, &b)?;
            bump(&mut checks, "metric_symmetric", (gab.clone() - data.metric(&b, &a)?).abs_f64());
            for (name, w) in [("g(I,I)=g", Structure::I), ("g(J,J)=g", Structure::J), ("g(K,K)=g", Structure::K)] {
                let v = data.metric(&st(w, &a)?, &st(w, &b)?)?;
                bump(&mut checks, name, (v - gab.clone()).abs_f64());
            }
            let gaa = data.metric(&a, &a)?;
            let norm = a.iter().map(|x| x.norm_sqr()).fold(S::zero(), |s, x| s + x);
            if !norm.is_zero() && !gaa.is_positive_real() {
                fail(&mut failures, "metric not positive definite".into());
                bump(&mut checks, "metric_positive", gaa.abs_f64().max(1.0));
            } else {
                bump(&mut checks, "metric_positive", 0.0);
            }

            for (name, w) in [("kahler_I_psi", Structure::I), ("kahler_J_psi", Structure::J), ("kahler_K_psi", Structure::K)] {
                let direct = data.kahler(w, &a, &b)?;
                let via = data.kahler_via_psi(w, &a, &b)?;
                bump(&mut checks, name, (direct - via).abs_f64());
                bump(&mut checks, "kahler_antisymmetric", (data.kahler(w, &a, &a)?).abs_f64());
            }

            let s = SectionAB::new(a.clone(), b.clone())?;
            let ii = data.iota(&data.iota(&s)?)?;
            bump(&mut checks, "iota^2=id", vec_max_abs(&vec_sub(&ii.a, &a)).max(vec_max_abs(&vec_sub(&ii.b, &b))));
            let r = data.q.induced_r(&s)?;
            let io = data.iota(&s)?;
            bump(&mut checks, "iota=r", vec_max_abs(&vec_sub(&r.a, &io.a)).max(vec_max_abs(&vec_sub(&r.b, &io.b))));
            Ok(())
        })();
        if let Err(e) = step {
            let name = match &e {
                Error::NotReal(v) => {
                    bump(&mut checks, "metric_real", *v);
                    "NotReal".to_string()
                }
                other => format!("{other:?}"),
            };
            fail(&mut failures, name);
        }
    }

    // forms are read off (A, Ω) alone; check A is the same at every base point
    if d.is_multiple_of(2) && data.q.matrix() == quaternionic_from_tau::<S>(d / 2).matrix() {
        let mut worst = 0.0f64;
        for _ in 0..samples.clamp(1, 10) {
            let x: Vec<S> = rng::vector(&mut rng, d / 2);
            let y: Vec<S> = rng::vector(&mut rng, d / 2);
            match real_section_from_point(&x, &y).and_then(|s| local_quaternionic_matrix(&s)) {
                Ok(m) => worst = worst.max(m.sub(data.q.matrix()).max_abs()),
                Err(e) => fail(&mut failures, format!("{e:?}")),
            }
        }
        bump(&mut checks, "constancy_over_M", worst);
    }

    // finite-difference closedness of the (constant) Kähler forms
    for (name, w) in [("closed_I", Structure::I), ("closed_J", Structure::J), ("closed_K", Structure::K)] {
        match data.kahler_real_matrix(w) {
            Ok(m) => {
                let point: Vec<f64> = (0..m.len()).map(|k| 0.1 * k as f64).collect();
                let r = exterior_derivative_residual(|_| m.clone(), &point, FD_STEP);
                if r > FD_TOL {
                    fail(&mut failures, format!("{name} residual {r:e}"));
                }
                bump(&mut checks, name, r);
            }
            Err(e) => fail(&mut failures, error_name(&e)),
        }
    }

    for (name, v) in &checks {
        if *v > tol && !name.starts_with("closed_") {
            fail(&mut failures, format!("{name} residual {v:e}"));
        }
    }
    let passed = failures.is_empty();
    VerifyReport { checks, failures, tolerance: tol, passed }
}
