//! Real structures on ⊕²ⁿO(1) compatible with the antipodal map, encoded by a
//! constant matrix A with A·Ā = −I, and the induced maps on sections.

use crate::bundle::{BundleCP1, GlobalSection};
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::matrix::{vec_add, vec_conj, vec_neg, vec_scale, Matrix};
use crate::scalar::{Scalar, FLOAT_REAL_TOL};

/// The section ζ₀ ↦ a + b·ζ₀ of ⊕²ⁿO(1).
#[derive(Clone, Debug, PartialEq)]
pub struct SectionAB<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionicData<S> {
    a: Matrix<S>,
}

/// Chart maps of a bundle map ⊕²ⁿO(1) → conj(⊕²ⁿO(1)) covering ζ ↦ −ζ:
/// f₀(ζ₀, x₀) = (−ζ₀, F0·x₀) and f₁(ζ₁, x₁) = (−ζ₁, F1·x₁).
#[derive(Clone, Debug, PartialEq)]
pub struct BundleMap<S> {
    pub f0: Matrix<S>,
    pub f1: Matrix<S>,
}

impl<S: Scalar> SectionAB<S> {
    pub fn new(a: Vec<S>, b: Vec<S>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if !a.len().is_multiple_of(2) {
            return Err(Error::OddDimension(a.len()));
        }
        Ok(SectionAB { a, b })
    }

    pub fn zero(n: usize) -> Self {
        SectionAB { a: vec![S::zero(); 2 * n], b: vec![S::zero(); 2 * n] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.a.len() / 2
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(S::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        SectionAB { a: vec_add(&self.a, &o.a), b: vec_add(&self.b, &o.b) }
    }

    pub fn scale(&self, c: &S) -> Self {
        SectionAB { a: vec_scale(c, &self.a), b: vec_scale(c, &self.b) }
    }

    /// (ā, b̄).
    pub fn conj(&self) -> Self {
        SectionAB { a: vec_conj(&self.a), b: vec_conj(&self.b) }
    }

    /// p(ζ₀) = a + bζ₀, q(ζ₁) = aζ₁ + b.
    pub fn to_global(&self) -> GlobalSection<S> {
        let lin = |c0: &S, c1: &S| LaurentPoly::from_coeffs(vec![c0.clone(), c1.clone()]);
        GlobalSection {
            p: self.a.iter().zip(&self.b).map(|(a, b)| lin(a, b)).collect(),
            q: self.a.iter().zip(&self.b).map(|(a, b)| lin(b, a)).collect(),
        }
    }

    pub fn from_global(s: &GlobalSection<S>) -> Result<Self> {
        let e = BundleCP1::<S>::line_sum(&vec![1; s.rank()])?;
        if !s.is_section_of(&e) || s.p.iter().any(|p| p.hi().is_some_and(|h| h > 1)) {
            return Err(Error::InvalidSection);
        }
        SectionAB::new(s.p.iter().map(|p| p.coeff(0)).collect(), s.p.iter().map(|p| p.coeff(1)).collect())
    }
}

pub fn conj_section<S: Scalar>(s: &SectionAB<S>) -> SectionAB<S> {
    s.conj()
}

/// Validates A·Ā = −I (exactly, or to 1e−12 Frobenius on float).
pub fn check_quaternionic<S: Scalar>(a: Matrix<S>) -> Result<QuaternionicData<S>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.rows().is_multiple_of(2) || a.rows() == 0 {
        return Err(Error::OddDimension(a.rows()));
    }
    let defect = a.mul(&a.conj()).add(&Matrix::identity(a.rows()));
    if !defect.is_zero_within(FLOAT_REAL_TOL) {
        return Err(Error::NotQuaternionic);
    }
    Ok(QuaternionicData { a })
}

impl<S: Scalar> QuaternionicData<S> {
    pub fn matrix(&self) -> &Matrix<S> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.rows() / 2
    }

    fn check_len(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    fn check_section(&self, s: &SectionAB<S>) -> Result<()> {
        self.check_len(&s.a)?;
        self.check_len(&s.b)
    }

    /// j(x) = Ā·x̄.
    pub fn apply_j(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_len(x)?;
        self.a.conj().mul_vec(&vec_conj(x))
    }

    /// r(s) = φ(j(b), −j(a)).
    pub fn induced_r(&self, s: &SectionAB<S>) -> Result<SectionAB<S>> {
        self.check_section(s)?;
        Ok(SectionAB { a: self.apply_j(&s.b)?, b: vec_neg(&self.apply_j(&s.a)?) })
    }

    /// Closed form φ(Ā·b̄, −Ā·ā), computed independently of apply_j.
    pub fn induced_r_closed_form(&self, s: &SectionAB<S>) -> Result<SectionAB<S>> {
        self.check_section(s)?;
        let abar = self.a.conj();
        Ok(SectionAB { a: abar.mul_vec(&vec_conj(&s.b))?, b: vec_neg(&abar.mul_vec(&vec_conj(&s.a))?) })
    }

    /// f∘s∘σ⁻¹ in the conjugate-bundle trivialization: (A·b, −A·a).
    pub fn twist_section(&self, s: &SectionAB<S>) -> Result<SectionAB<S>> {
        self.check_section(s)?;
        Ok(SectionAB { a: self.a.mul_vec(&s.b)?, b: vec_neg(&self.a.mul_vec(&s.a)?) })
    }

    /// New trivialization x ↦ P·x: A′ = P̄·A·P⁻¹.
    pub fn change_trivialization(&self, p: &Matrix<S>) -> Result<Self> {
        if p.rows() != self.dim() || p.cols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.rows() });
        }
        let pinv = p.inverse().ok_or(Error::SingularP)?;
        check_quaternionic(p.conj().mul(&self.a).mul(&pinv))
    }

    /// Real iff b = −j(a).
    pub fn is_real_section(&self, s: &SectionAB<S>) -> Result<bool> {
        self.check_section(s)?;
        let ja = self.apply_j(&s.a)?;
        Ok(s.b.iter().zip(&ja).all(|(b, j)| (b.clone() + j.clone()).is_negligible(FLOAT_REAL_TOL)))
    }

    /// Real matrix (8n columns, 4n rows) of the ℝ-linear map (a, b) ↦ b + j(a),
    /// in coordinates (Re, Im) per complex entry.
    pub fn real_constraint_matrix(&self) -> Matrix<S> {
        let d = self.dim();
        let mut cols = Vec::with_capacity(4 * d);
        for k in 0..2 * d {
            for unit in [S::one(), S::i()] {
                let mut a = vec![S::zero(); d];
                let mut b = vec![S::zero(); d];
                if k < d {
                    a[k] = unit;
                } else {
                    b[k - d] = unit;
                }
                let img = vec_add(&b, &self.apply_j(&a).expect("sized"));
                cols.push(img.iter().flat_map(|z| [z.re(), z.im()]).collect::<Vec<S>>());
            }
        }
        Matrix::from_fn(2 * d, 4 * d, |i, j| cols[j][i].clone())
    }

    /// Real dimension of the fixed set of r.
    pub fn real_section_dimension(&self) -> usize {
        4 * self.dim() - self.real_constraint_matrix().rank(1e-10)
    }

    pub fn bundle_map(&self) -> BundleMap<S> {
        BundleMap { f0: self.a.neg(), f1: self.a.clone() }
    }

    pub fn from_bundle_map(f: &BundleMap<S>) -> Result<Self> {
        if !f.f0.add(&f.f1).is_zero_within(FLOAT_REAL_TOL) {
            return Err(Error::NotQuaternionic);
        }
        check_quaternionic(f.f1.clone())
    }
}

impl<S: Scalar> BundleMap<S> {
    /// Residuals of f̄∘f on both charts. f̄ acts by F̄0 on V₀ → U₁ and by F̄1
    /// on V₁ → U₀, so the U₀ branch is F̄1·F0 and the U₁ branch is F̄0·F1.
    pub fn involution_defect(&self) -> (Matrix<S>, Matrix<S>) {
        let id = Matrix::identity(self.f0.rows());
        (self.f1.conj().mul(&self.f0).sub(&id), self.f0.conj().mul(&self.f1).sub(&id))
    }

    pub fn is_involution(&self) -> bool {
        let (u0, u1) = self.involution_defect();
        u0.is_zero_within(FLOAT_REAL_TOL) && u1.is_zero_within(FLOAT_REAL_TOL)
    }
}
