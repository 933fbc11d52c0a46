//! Indefinite inner products, involution matrices, pseudo-Hermiticity
//! residuals, and ℤ₂-grading projectors.
//!
//! A Hermitian involution η (η² = I, η = η†) turns the Hilbert space into
//! a Krein space with the indefinite product [x, y] = (ηx, y). Convention
//! used throughout the crate: the ordinary inner product (·,·) is
//! conjugate-linear in its FIRST argument, (x, y) = Σ x̄ᵢ yᵢ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for the exact algebraic identities (η² = I, η = η†) on
/// small matrices.
pub const INVOLUTION_TOL: f64 = 1e-12;

/// Default relative tolerance for the positive/negative/isotropic
/// trichotomy.
pub const DEFAULT_TYPE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum KreinError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not a Hermitian involution (residual {residual:.3e})")]
    NotInvolution { residual: f64 },
    #[error("zero vector has no type in an indefinite inner product")]
    ZeroVector,
    #[error("involution classification is defined for 2x2 matrices, got {0}x{0}")]
    NotTwoByTwo(usize),
}

/// A Hermitian involution matrix: η² = I and η = η† within
/// [`INVOLUTION_TOL`] (Frobenius norms).
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    matrix: DMatrix<Complex64>,
}

impl Involution {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, KreinError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(KreinError::DimensionMismatch(format!(
                "involution must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows();
        let sq_res = (&matrix * &matrix - DMatrix::<Complex64>::identity(n, n)).norm();
        let herm_res = (&matrix - matrix.adjoint()).norm();
        let residual = sq_res.max(herm_res);
        if residual > INVOLUTION_TOL {
            return Err(KreinError::NotInvolution { residual });
        }
        Ok(Self { matrix })
    }

    /// Builds an involution from real entries.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self, KreinError> {
        Ok(Self::new(matrix.map(|x| Complex64::new(x, 0.0)))?)
    }

    /// Diagonal involution with the given ±1 pattern.
    pub fn from_signs(signs: &[f64]) -> Result<Self, KreinError> {
        let n = signs.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (i, &s) in signs.iter().enumerate() {
            m[(i, i)] = s;
        }
        Self::from_real(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// σ₁ = antidiag(1, 1).
    pub fn sigma1() -> Self {
        Self::from_real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    /// σ₃ = diag(1, −1).
    pub fn sigma3() -> Self {
        Self::from_signs(&[1.0, -1.0]).unwrap()
    }

    /// diag(−1, 1).
    pub fn minus_sigma3() -> Self {
        Self::from_signs(&[-1.0, 1.0]).unwrap()
    }

    /// Block-swap involution J = antidiag(I_n, I_n) on a 2n-dimensional
    /// space.
    pub fn block_swap(n: usize) -> Self {
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(i, n + i)] = 1.0;
            m[(n + i, i)] = 1.0;
        }
        Self::from_real(m).unwrap()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Sign class of a Krein-space vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorType {
    Positive,
    Negative,
    Isotropic,
}

impl std::fmt::Display for VectorType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorType::Positive => write!(f, "positive"),
            VectorType::Negative => write!(f, "negative"),
            VectorType::Isotropic => write!(f, "isotropic"),
        }
    }
}

/// The pair of grading projectors P± = (I ± μ)/2 of an involution μ.
#[derive(Debug, Clone)]
pub struct GradingProjectors {
    pub p_plus: DMatrix<Complex64>,
    pub p_minus: DMatrix<Complex64>,
}

/// Indefinite inner product [x, y] = (ηx, y), conjugate-linear in x.
pub fn krein_product(
    eta: &Involution,
    x: &DVector<Complex64>,
    y: &DVector<Complex64>,
) -> Result<Complex64, KreinError> {
    if x.len() != eta.dim() || y.len() != eta.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "eta is {}x{} but vectors have lengths {} and {}",
            eta.dim(),
            eta.dim(),
            x.len(),
            y.len()
        )));
    }
    // dotc conjugates its receiver, matching the first-argument convention.
    Ok((eta.matrix() * x).dotc(y))
}

/// Classifies x as positive/negative/isotropic by the sign of [x, x]
/// against the scale-invariant threshold tol·‖x‖².
pub fn vector_type(
    eta: &Involution,
    x: &DVector<Complex64>,
    tol: f64,
) -> Result<VectorType, KreinError> {
    let norm_sq = x.norm_squared();
    if norm_sq == 0.0 {
        return Err(KreinError::ZeroVector);
    }
    let q = krein_product(eta, x, x)?.re;
    let threshold = tol * norm_sq;
    Ok(if q > threshold {
        VectorType::Positive
    } else if q < -threshold {
        VectorType::Negative
    } else {
        VectorType::Isotropic
    })
}

/// Relative pseudo-Hermiticity defect ‖ηH†η⁻¹ − H‖_F / max(1, ‖H‖_F).
///
/// Zero exactly when H is η-pseudo-Hermitian. Uses η⁻¹ = η.
pub fn pseudo_hermiticity_residual(
    eta: &Involution,
    h: &DMatrix<Complex64>,
) -> Result<f64, KreinError> {
    if h.nrows() != eta.dim() || h.ncols() != eta.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "eta is {}x{} but H is {}x{}",
            eta.dim(),
            eta.dim(),
            h.nrows(),
            h.ncols()
        )));
    }
    let transformed = eta.matrix() * h.adjoint() * eta.matrix();
    let defect = (&transformed - h).norm();
    Ok(defect / h.norm().max(1.0))
}

/// Class of a 2×2 Hermitian involution.
///
/// det η = +1 forces η = ±I; det η = −1 yields a unit combination of
/// Pauli matrices a₁σ₁ + a₂σ₂ + a₃σ₃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvolutionClass {
    Plus { sign: f64 },
    Minus { a: [f64; 3] },
}

pub fn classify_involution(eta: &Involution) -> Result<InvolutionClass, KreinError> {
    if eta.dim() != 2 {
        return Err(KreinError::NotTwoByTwo(eta.dim()));
    }
    let m = eta.matrix();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    if (det - 1.0).abs() <= INVOLUTION_TOL {
        let sign = m[(0, 0)].re.signum();
        Ok(InvolutionClass::Plus { sign })
    } else if (det + 1.0).abs() <= INVOLUTION_TOL {
        // eta = a1 s1 + a2 s2 + a3 s3 = [[a3, a1 - i a2], [a1 + i a2, -a3]]
        let a1 = m[(1, 0)].re;
        let a2 = m[(1, 0)].im;
        let a3 = m[(0, 0)].re;
        Ok(InvolutionClass::Minus { a: [a1, a2, a3] })
    } else {
        Err(KreinError::NotInvolution {
            residual: (det.abs() - 1.0).abs(),
        })
    }
}

/// Grading projectors P± = (I ± μ)/2; they satisfy μP±x = ±P±x.
pub fn grading_projectors(mu: &Involution) -> GradingProjectors {
    let n = mu.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let half = Complex64::new(0.5, 0.0);
    GradingProjectors {
        p_plus: (&id + mu.matrix()) * half,
        p_minus: (&id - mu.matrix()) * half,
    }
}
