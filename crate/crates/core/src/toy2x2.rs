//! Closed-form ℤ₂-graded pseudo-Hermitian 2×2 model.
//!
//! The matrix H = e₀I + h, h = [[f, b], [−b̄, −f]] with b = b₁ + ib₂ is
//! σ₃-pseudo-Hermitian. Its eigenvalues E∓ = e₀ ∓ √Δ, Δ = f² − b₁² − b₂²,
//! cross on the double cone Δ = 0: a branching degeneracy with a Jordan
//! block everywhere on the cone except at the diabolic apex f = |b| = 0.
//! Away from the cone the diagonalization can be normalized so that the
//! diagonal factor stays pseudo-Hermitian with respect to an involution η
//! that switches between diag(∓1, ±1) (Δ > 0, by sign of f) and
//! antidiag(1, 1) (Δ < 0); the eigenvectors switch accordingly between
//! definite and isotropic Krein type.

use crate::krein::{vector_type, Involution, VectorType, DEFAULT_TYPE_TOL};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance deciding membership of the degeneration cone
/// Δ = 0. Scale-invariant under H → cH.
pub const CONE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("degenerate point (delta = {delta:.3e}); use jordan_at_ep")]
    DegenerateInput { delta: f64 },
    #[error("point is not on the exceptional cone (delta = {delta:.3e})")]
    NotOnCone { delta: f64 },
    #[error("apex point f = |b| = 0 is diabolic; no Jordan block exists")]
    ApexPoint,
}

/// Parameter point (e₀, f, b₁, b₂) of the 2×2 model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyPoint {
    pub e0: f64,
    pub f: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ToyPoint {
    pub fn new(e0: f64, f: f64, b1: f64, b2: f64) -> Self {
        Self { e0, f, b1, b2 }
    }

    pub fn b(&self) -> Complex64 {
        Complex64::new(self.b1, self.b2)
    }

    /// H = [[e₀+f, b], [−b̄, e₀−f]].
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let b = self.b();
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(self.e0 + self.f, 0.0),
                b,
                -b.conj(),
                Complex64::new(self.e0 - self.f, 0.0),
            ],
        )
    }
}

/// Δ = f² − b₁² − b₂²; the levels cross exactly on Δ = 0.
pub fn discriminant(p: &ToyPoint) -> f64 {
    p.f * p.f - p.b1 * p.b1 - p.b2 * p.b2
}

/// ε = Δ^{1/2} on the principal branch: ε > 0 for Δ > 0, ε = i|ε| for Δ < 0.
fn epsilon(delta: f64) -> Complex64 {
    Complex64::new(delta, 0.0).sqrt()
}

/// Eigenvalues (E₋, E₊) = e₀ ∓ √Δ; a complex-conjugate pair when Δ < 0.
pub fn eigenvalues(p: &ToyPoint) -> (Complex64, Complex64) {
    let eps = epsilon(discriminant(p));
    let e0 = Complex64::new(p.e0, 0.0);
    (e0 - eps, e0 + eps)
}

/// Eigenvalues e₀ ∓ √(f² + b₁² + b₂²) of the Hermitian spin counterpart
/// [[f, b], [b̄, −f]]; always real, degenerate only at f = b₁ = b₂ = 0.
pub fn spin_eigenvalues(p: &ToyPoint) -> (f64, f64) {
    let root = (p.f * p.f + p.b1 * p.b1 + p.b2 * p.b2).sqrt();
    (p.e0 - root, p.e0 + root)
}

/// Spectral regime of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RealPair,
    ComplexConjugatePair,
    ExceptionalCone,
    DiabolicPoint,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::RealPair => "RealPair",
            Regime::ComplexConjugatePair => "ComplexConjugatePair",
            Regime::ExceptionalCone => "ExceptionalCone",
            Regime::DiabolicPoint => "DiabolicPoint",
        };
        write!(f, "{s}")
    }
}

/// Full classification of a parameter point: regime, the involution η of
/// the diagonalized form (nondegenerate regimes only), and the Krein
/// types of the eigenvectors |−⟩, |+⟩.
#[derive(Debug, Clone)]
pub struct ToyClassification {
    pub delta: f64,
    pub regime: Regime,
    pub eta: Option<Involution>,
    pub krein_types: Option<(VectorType, VectorType)>,
}

/// η table of the diagonalized form: Δ>0, f>0 ⇒ diag(−1,1);
/// Δ>0, f<0 ⇒ diag(1,−1); Δ<0 ⇒ antidiag(1,1).
fn eta_from_table(delta: f64, f: f64) -> Involution {
    if delta > 0.0 {
        if f > 0.0 {
            Involution::minus_sigma3()
        } else {
            Involution::sigma3()
        }
    } else {
        Involution::sigma1()
    }
}

pub fn classify_point(p: &ToyPoint, tol: f64) -> ToyClassification {
    let delta = discriminant(p);
    let b_abs = p.b().norm();
    let f_sq = p.f * p.f;
    let b_sq = p.b1 * p.b1 + p.b2 * p.b2;
    if p.f.abs() <= tol && b_abs <= tol {
        return ToyClassification {
            delta,
            regime: Regime::DiabolicPoint,
            eta: None,
            krein_types: None,
        };
    }
    if delta.abs() <= tol * f_sq.max(b_sq).max(tol) {
        return ToyClassification {
            delta,
            regime: Regime::ExceptionalCone,
            eta: None,
            krein_types: None,
        };
    }
    let regime = if delta > 0.0 {
        Regime::RealPair
    } else {
        Regime::ComplexConjugatePair
    };
    let eta = eta_from_table(delta, p.f);
    let types = basis_krein_types(&eta);
    ToyClassification {
        delta,
        regime,
        eta: Some(eta),
        krein_types: Some(types),
    }
}

/// Krein types of |−⟩ = (1,0) and |+⟩ = (0,1) under η, evaluated from
/// the inner product itself.
fn basis_krein_types(eta: &Involution) -> (VectorType, VectorType) {
    let minus = DVector::from_column_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let plus = DVector::from_column_slice(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    (
        vector_type(eta, &minus, DEFAULT_TYPE_TOL).expect("basis vector"),
        vector_type(eta, &plus, DEFAULT_TYPE_TOL).expect("basis vector"),
    )
}

/// A (possibly Jordan) decomposition H = S D S⁻¹ with the involution η
/// for which D = ηD†η, when one exists.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub s: DMatrix<Complex64>,
    pub d: DMatrix<Complex64>,
    pub eta: Option<Involution>,
    /// ε = Δ^{1/2}; zero on the cone.
    pub epsilon: Complex64,
}

fn sigma3_c() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
}

/// Diagonalizes a nondegenerate point with det S = 1 and η = S†σ₃S an
/// involution matching the η table.
///
/// The normalization constants of the eigenvector columns are fixed as
/// follows: for Δ > 0 the first one is real positive; for Δ < 0 its
/// phase is pinned by η = antidiag(1,1) (a real positive choice no
/// longer exists) and the representative with Re γ₁ ≥ 0 is taken.
/// For b = 0 the matrix is already diagonal and S is the trivial
/// determinant-one permutation that orders D as diag(e₀−ε, e₀+ε).
pub fn diagonalize(p: &ToyPoint) -> Result<EigenDecomposition, ToyError> {
    let delta = discriminant(p);
    let f_sq = p.f * p.f;
    let b_sq = p.b1 * p.b1 + p.b2 * p.b2;
    if delta.abs() <= CONE_TOL * f_sq.max(b_sq).max(CONE_TOL) {
        return Err(ToyError::DegenerateInput { delta });
    }
    let eps = epsilon(delta);
    let e0 = Complex64::new(p.e0, 0.0);
    let d = DMatrix::from_row_slice(
        2,
        2,
        &[
            e0 - eps,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            e0 + eps,
        ],
    );
    let b = p.b();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let s = if b.norm() == 0.0 {
        // Already diagonal. H = diag(e0+f, e0-f): identity works for
        // f < 0; for f > 0 the determinant-one swap reorders D.
        if p.f < 0.0 {
            DMatrix::identity(2, 2)
        } else {
            DMatrix::from_row_slice(2, 2, &[zero, one, -one, zero])
        }
    } else {
        let bc = b.conj();
        let (gamma1, gamma2) = if delta > 0.0 {
            let e = eps.re;
            let g1 = Complex64::new(b.norm() / (2.0 * e * (e - p.f).abs()).sqrt(), 0.0);
            let g2 = bc / (2.0 * eps * g1);
            (g1, g2)
        } else {
            let abs_eps = eps.im;
            // Phase from eta = antidiag(1,1): e^{-2i theta} = (f - i|eps|)/conj(b).
            let theta = -0.5 * (Complex64::new(p.f, -abs_eps) / bc).arg();
            let mut g1 = Complex64::from_polar((b.norm() / (2.0 * abs_eps)).sqrt(), theta);
            if g1.re < 0.0 || (g1.re == 0.0 && g1.im < 0.0) {
                g1 = -g1;
            }
            let g2 = bc / (2.0 * eps * g1);
            (g1, g2)
        };
        DMatrix::from_row_slice(
            2,
            2,
            &[
                (-Complex64::new(p.f, 0.0) + eps) / bc * gamma1,
                (-Complex64::new(p.f, 0.0) - eps) / bc * gamma2,
                gamma1,
                gamma2,
            ],
        )
    };

    let eta_matrix = s.adjoint() * sigma3_c() * &s;
    let eta = Involution::new(eta_matrix).expect("normalized eta is an involution");
    Ok(EigenDecomposition {
        s,
        d,
        eta: Some(eta),
        epsilon: eps,
    })
}

/// Jordan form on the exceptional cone (Δ = 0, b ≠ 0):
/// D = [[E, 1], [0, E]] with E = e₀, and S = [[∓|b|/b̄, −1/b̄], [1, 0]]
/// (sign by f = ±|b|), so that H = S D S⁻¹ exactly.
pub fn jordan_at_ep(p: &ToyPoint) -> Result<EigenDecomposition, ToyError> {
    let delta = discriminant(p);
    let f_sq = p.f * p.f;
    let b_sq = p.b1 * p.b1 + p.b2 * p.b2;
    if delta.abs() > CONE_TOL * f_sq.max(b_sq).max(CONE_TOL) {
        return Err(ToyError::NotOnCone { delta });
    }
    let b = p.b();
    if b.norm() <= 1e-12 * f_sq.max(b_sq).sqrt().max(1e-12) {
        return Err(ToyError::ApexPoint);
    }
    let e = Complex64::new(p.e0, 0.0);
    let d = DMatrix::from_row_slice(
        2,
        2,
        &[e, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), e],
    );
    let bc = b.conj();
    let sign = if p.f >= 0.0 { -1.0 } else { 1.0 };
    let s = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(sign * b.norm(), 0.0) / bc,
            -Complex64::new(1.0, 0.0) / bc,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    Ok(EigenDecomposition {
        s,
        d,
        eta: None,
        epsilon: Complex64::new(0.0, 0.0),
    })
}

/// Residual norms of the Jordan chain relations at eigenvalue E:
/// ‖(D−EI)|−⟩‖, ‖(D−EI)|+⟩ − |−⟩‖, ‖(D−EI)²|+⟩‖
/// with |−⟩ = (1,0) and |+⟩ = (0,1).
pub fn jordan_chain_check(d: &DMatrix<Complex64>, e: Complex64) -> (f64, f64, f64) {
    assert_eq!((d.nrows(), d.ncols()), (2, 2), "chain check is 2x2 only");
    let shifted = d - DMatrix::identity(2, 2) * e;
    let minus = DVector::from_column_slice(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let plus = DVector::from_column_slice(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let r1 = (&shifted * &minus).norm();
    let r2 = (&shifted * &plus - &minus).norm();
    let r3 = (&shifted * (&shifted * &plus)).norm();
    (r1, r2, r3)
}

/// Krein types of the eigenvectors (|−⟩, |+⟩) of the diagonalized form:
/// (∓ by sign f) definite for Δ > 0, both isotropic for Δ < 0.
pub fn eigenvector_krein_types(p: &ToyPoint) -> Result<(VectorType, VectorType), ToyError> {
    let delta = discriminant(p);
    let f_sq = p.f * p.f;
    let b_sq = p.b1 * p.b1 + p.b2 * p.b2;
    if delta.abs() <= CONE_TOL * f_sq.max(b_sq).max(CONE_TOL) {
        return Err(ToyError::DegenerateInput { delta });
    }
    Ok(basis_krein_types(&eta_from_table(delta, p.f)))
}

/// Coefficients (e₀, c₁, c₂, c₃) with iH = i e₀ I + c₁σ₁ + c₂σ₂ + i c₃σ₃,
/// i.e. the su(1,1) decomposition ih = −b₂σ₁ − b₁σ₂ + ifσ₃.
pub fn su_decompose(p: &ToyPoint) -> (f64, f64, f64, f64) {
    (p.e0, -p.b2, -p.b1, p.f)
}
