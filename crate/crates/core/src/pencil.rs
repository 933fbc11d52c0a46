//! Quadratic operator pencil equivalent to the 2×2-block linear
//! eigenvalue problem, with level-crossing diagnostics and
//! Jordan-Keldysh chains.
//!
//! Eliminating the second field component through
//! u₂ = (1/α)(Q + λ)u₁ (possible wherever α ≠ 0) turns the 2N×2N linear
//! problem into the N×N quadratic pencil
//! L(λ) = (Q₂ + λ)·diag(1/α)·(Q₁ + λ) − Q[α]
//!       = A₂λ² + A₁λ + A₀,
//! an exact algebraic equivalence on the discrete level. Q₁ carries the
//! first component's boundary row (Robin under physical conditions),
//! Q₂ the Dirichlet row of the second; both coincide in the idealized
//! case, giving A₂ = diag(1/α), A₁ = Q·A₂ + A₂·Q, A₀ = Q·A₂·Q − Q[α].

use crate::eig::{dense_spectrum, EigError};
use crate::operator::{
    sturm_block, AlphaProfile, BoundaryCondition, RadialGrid, RightEnd,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Relative chain residual accepted by [`solve_keldysh_chain`].
pub const CHAIN_TOL: f64 = 1e-6;

/// σ_min(L(λ₀)) / scale below which λ₀ counts as a pencil eigenvalue.
pub const DEFECT_SIGMA_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("alpha profile vanishes or changes sign across {} grid node(s); first near r = {:.6}",
            nodes.len(), nodes.first().map(|&(_, r)| r).unwrap_or(f64::NAN))]
    ProfileVanishes { nodes: Vec<(usize, f64)> },
    #[error("lambda0 is not a defective pencil eigenvalue (chain residuals {residuals:?})")]
    NotDefective { residuals: [f64; 3] },
    #[error("null direction not isolated: sigma_min = {sigma_min:.3e}, next = {sigma_next:.3e}")]
    IllConditioned { sigma_min: f64, sigma_next: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("scalar pencil degenerates: a2 and a1 both vanish")]
    DegenerateScalar,
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// Where a pencil came from, when built from a dynamo configuration.
#[derive(Debug, Clone)]
pub struct PencilProvenance {
    pub profile: AlphaProfile,
    pub l: u32,
    pub bc: BoundaryCondition,
    pub grid: RadialGrid,
}

/// L(λ) = A₂λ² + A₁λ + A₀ with the discrete inner-product weights used
/// for scalar reductions.
#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    a2: DMatrix<f64>,
    a1: DMatrix<f64>,
    a0: DMatrix<f64>,
    weights: Vec<f64>,
    provenance: Option<PencilProvenance>,
}

impl QuadraticPencil {
    /// Pencil from raw coefficient matrices with unit weights.
    pub fn from_matrices(
        a2: DMatrix<f64>,
        a1: DMatrix<f64>,
        a0: DMatrix<f64>,
    ) -> Result<Self, PencilError> {
        let n = a2.nrows();
        if a2.ncols() != n || a1.shape() != (n, n) || a0.shape() != (n, n) {
            return Err(PencilError::DimensionMismatch(
                "coefficient matrices must be square and equal-sized".into(),
            ));
        }
        Ok(Self {
            a2,
            a1,
            a0,
            weights: vec![1.0; n],
            provenance: None,
        })
    }

    pub fn a2(&self) -> &DMatrix<f64> {
        &self.a2
    }

    pub fn a1(&self) -> &DMatrix<f64> {
        &self.a1
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.a0
    }

    pub fn dim(&self) -> usize {
        self.a2.nrows()
    }

    pub fn provenance(&self) -> Option<&PencilProvenance> {
        self.provenance.as_ref()
    }

    /// L(λ).
    pub fn eval(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let n = self.dim();
        let l2 = lambda * lambda;
        DMatrix::from_fn(n, n, |i, j| {
            l2 * self.a2[(i, j)] + lambda * self.a1[(i, j)] + self.a0[(i, j)]
        })
    }

    /// L′(λ) = 2λA₂ + A₁.
    pub fn eval_derivative(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let n = self.dim();
        let two_l = lambda * 2.0;
        DMatrix::from_fn(n, n, |i, j| two_l * self.a2[(i, j)] + self.a1[(i, j)])
    }

    /// L″ = 2A₂ (constant).
    pub fn second_derivative(&self) -> DMatrix<Complex64> {
        self.a2.map(|x| Complex64::new(2.0 * x, 0.0))
    }

    /// Natural magnitude of L at λ: ‖A₂‖|λ|² + ‖A₁‖|λ| + ‖A₀‖.
    pub fn scale(&self, lambda: Complex64) -> f64 {
        let r = lambda.norm();
        self.a2.norm() * r * r + self.a1.norm() * r + self.a0.norm()
    }

    /// Smallest singular value of L(λ).
    pub fn smallest_singular(&self, lambda: Complex64) -> f64 {
        let svd = self.eval(lambda).svd(false, false);
        svd.singular_values
            .iter()
            .fold(f64::INFINITY, |acc, &s| acc.min(s))
    }
}

/// Grid nodes where the profile effectively vanishes: values below
/// 1e−12 of the profile's node-scale, plus both neighbors of every sign
/// change (the continuous α has a zero between them).
fn vanishing_nodes(profile: &AlphaProfile, grid: &RadialGrid) -> Vec<(usize, f64)> {
    let nodes = grid.nodes();
    let vals: Vec<f64> = nodes.iter().map(|&r| profile.eval_raw(r)).collect();
    let max_abs = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let tiny = 1e-12 * max_abs;
    let mut flagged: Vec<usize> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        if v.abs() <= tiny {
            flagged.push(i);
        }
    }
    for i in 0..vals.len().saturating_sub(1) {
        if vals[i] * vals[i + 1] < 0.0 {
            flagged.push(i);
            flagged.push(i + 1);
        }
    }
    flagged.sort_unstable();
    flagged.dedup();
    flagged.into_iter().map(|i| (i, nodes[i])).collect()
}

/// Builds the quadratic pencil of a dynamo configuration. Fails with
/// the offending nodes when α vanishes on the grid.
pub fn build_pencil(
    profile: &AlphaProfile,
    l: u32,
    grid: &RadialGrid,
    bc: BoundaryCondition,
) -> Result<QuadraticPencil, PencilError> {
    let bad = vanishing_nodes(profile, grid);
    if !bad.is_empty() {
        return Err(PencilError::ProfileVanishes { nodes: bad });
    }
    let n = grid.n();
    let right_u1 = match bc {
        BoundaryCondition::Idealized => RightEnd::Dirichlet,
        BoundaryCondition::Physical => RightEnd::Robin(l),
    };
    let one = |_r: f64| 1.0;
    let alpha = |r: f64| profile.eval_raw(r);
    let q1 = sturm_block(grid, l, right_u1, &one);
    let q2 = sturm_block(grid, l, RightEnd::Dirichlet, &one);
    let q_alpha = sturm_block(grid, l, right_u1, &alpha);

    let inv_alpha = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / profile.eval_raw(grid.nodes()[i])
        } else {
            0.0
        }
    });
    let a2 = inv_alpha.clone();
    let a1 = &q2 * &inv_alpha + &inv_alpha * &q1;
    let a0 = &q2 * &inv_alpha * &q1 - &q_alpha;

    Ok(QuadraticPencil {
        a2,
        a1,
        a0,
        weights: grid.weights().to_vec(),
        provenance: Some(PencilProvenance {
            profile: profile.clone(),
            l,
            bc,
            grid: grid.clone(),
        }),
    })
}

/// Lifts a pencil eigenvector to the 2N-dimensional linear problem:
/// (ψ₁, (1/α)(Q₁ + λ)ψ₁).
pub fn lift_eigenvector(
    psi1: &DVector<Complex64>,
    lambda: Complex64,
    profile: &AlphaProfile,
    l: u32,
    grid: &RadialGrid,
    bc: BoundaryCondition,
) -> Result<DVector<Complex64>, PencilError> {
    let bad = vanishing_nodes(profile, grid);
    if !bad.is_empty() {
        return Err(PencilError::ProfileVanishes { nodes: bad });
    }
    let n = grid.n();
    if psi1.len() != n {
        return Err(PencilError::DimensionMismatch(format!(
            "psi1 has length {}, grid has {} nodes",
            psi1.len(),
            n
        )));
    }
    let right_u1 = match bc {
        BoundaryCondition::Idealized => RightEnd::Dirichlet,
        BoundaryCondition::Physical => RightEnd::Robin(l),
    };
    let one = |_r: f64| 1.0;
    let q1 = sturm_block(grid, l, right_u1, &one);
    let q_psi = crate::eig::real_matvec(&q1, psi1);
    let mut out = DVector::from_element(2 * n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        out[i] = psi1[i];
        out[n + i] = (q_psi[i] + lambda * psi1[i]) / profile.eval_raw(grid.nodes()[i]);
    }
    Ok(out)
}

/// Scalar reduction of the pencil along ψ₁ and its roots.
#[derive(Debug, Clone)]
pub struct ScalarPencil {
    pub a2: Complex64,
    pub a1: Complex64,
    pub a0: Complex64,
    pub discriminant: Complex64,
    pub roots: ScalarRoots,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarRoots {
    /// (λ₊, λ₋) from the quadratic formula.
    Quadratic(Complex64, Complex64),
    /// Single root of the linear remainder when a₂ = 0.
    Linear(Complex64),
}

/// aⱼ = (Aⱼψ₁, ψ₁) in the weighted discrete product, and the roots of
/// a₂λ² + a₁λ + a₀ = 0.
pub fn scalar_pencil(
    psi1: &DVector<Complex64>,
    pencil: &QuadraticPencil,
) -> Result<ScalarPencil, PencilError> {
    let n = pencil.dim();
    if psi1.len() != n {
        return Err(PencilError::DimensionMismatch(format!(
            "psi1 has length {}, pencil dimension is {}",
            psi1.len(),
            n
        )));
    }
    if psi1.norm() == 0.0 {
        return Err(PencilError::ZeroVector);
    }
    let weighted = |m: &DMatrix<f64>| -> Complex64 {
        let mv = crate::eig::real_matvec(m, psi1);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += mv[i].conj() * pencil.weights[i] * psi1[i];
        }
        acc
    };
    let a2 = weighted(&pencil.a2);
    let a1 = weighted(&pencil.a1);
    let a0 = weighted(&pencil.a0);
    let discriminant = a1 * a1 - a0 * a2 * 4.0;
    let magnitude = a2.norm().max(a1.norm()).max(a0.norm());
    let roots = if a2.norm() <= 1e-14 * magnitude {
        if a1.norm() <= 1e-14 * magnitude {
            return Err(PencilError::DegenerateScalar);
        }
        ScalarRoots::Linear(-a0 / a1)
    } else {
        let sq = discriminant.sqrt();
        ScalarRoots::Quadratic((-a1 + sq) / (a2 * 2.0), (-a1 - sq) / (a2 * 2.0))
    };
    Ok(ScalarPencil {
        a2,
        a1,
        a0,
        discriminant,
        roots,
    })
}

/// Jordan-Keldysh chain (ψ₁, χ₁, φ₁) at a defective pencil eigenvalue,
/// with the relative residuals of the three chain relations.
#[derive(Debug, Clone)]
pub struct KeldyshChain {
    pub lambda0: Complex64,
    pub psi1: DVector<Complex64>,
    pub chi1: DVector<Complex64>,
    pub phi1: DVector<Complex64>,
    /// ‖L ψ₁‖, ‖L χ₁ + L′ψ₁‖, ‖L φ₁ + L′χ₁ + ½L″ψ₁‖, each divided by
    /// the pencil scale at λ₀.
    pub residuals: [f64; 3],
    /// Number of leading chain relations satisfied to [`CHAIN_TOL`]:
    /// 2 at an eigenvalue of partial multiplicity two, 3 when φ₁ exists.
    pub length: usize,
}

/// Builds the chain at λ₀ by SVD: ψ₁ is the smallest singular
/// direction; the associated vectors solve their chain relations in the
/// least-squares sense through the pseudo-inverse (cutting the null
/// direction), with the component along ψ₁ removed as gauge.
///
/// The first two residuals must close to [`CHAIN_TOL`] — that is the
/// defectiveness certificate. The third relation is solvable only when
/// the partial multiplicity exceeds two; at a square-root branching
/// point its defect equals the (necessarily nonzero) branching
/// coefficient, so the third residual is reported as a diagnostic and
/// the chain length is 2.
pub fn solve_keldysh_chain(
    pencil: &QuadraticPencil,
    lambda0: Complex64,
) -> Result<KeldyshChain, PencilError> {
    let l0 = pencil.eval(lambda0);
    let scale = pencil.scale(lambda0).max(f64::MIN_POSITIVE);
    let svd = l0.clone().svd(true, true);
    let sv = &svd.singular_values;
    let m = sv.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let min_idx = order[0];
    let sigma_min = sv[min_idx];
    // A 1x1 pencil has a trivially isolated null direction.
    let sigma_next = order.get(1).map_or(f64::INFINITY, |&i| sv[i]);

    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let u = svd.u.as_ref().expect("requested U");
    let n = pencil.dim();
    let psi1: DVector<Complex64> = DVector::from_fn(n, |i, _| v_t[(min_idx, i)].conj());

    let r1 = sigma_min / scale;
    if r1 > CHAIN_TOL || sigma_min > DEFECT_SIGMA_TOL * scale {
        return Err(PencilError::NotDefective {
            residuals: [r1, f64::INFINITY, f64::INFINITY],
        });
    }
    if sigma_next < 10.0 * sigma_min {
        return Err(PencilError::IllConditioned {
            sigma_min,
            sigma_next,
        });
    }

    // Pseudo-inverse with the null direction cut away.
    let cut = (sigma_min.max(f64::MIN_POSITIVE) * sigma_next).sqrt();
    let solve = |rhs: &DVector<Complex64>| -> DVector<Complex64> {
        let mut x = DVector::from_element(n, Complex64::new(0.0, 0.0));
        for k in 0..m {
            if sv[k] > cut {
                let uk = DVector::from_fn(n, |i, _| u[(i, k)]);
                let coeff = uk.dotc(rhs) / Complex64::new(sv[k], 0.0);
                let vk = DVector::from_fn(n, |i, _| v_t[(k, i)].conj());
                x += vk * coeff;
            }
        }
        x
    };
    let gauge = |x: &mut DVector<Complex64>| {
        let c = psi1.dotc(&*x);
        *x -= &psi1 * c;
    };

    let lp = pencil.eval_derivative(lambda0);
    let half_lpp = pencil.a2.map(|x| Complex64::new(x, 0.0));

    let rhs_chi = -(&lp * &psi1);
    let mut chi1 = solve(&rhs_chi);
    gauge(&mut chi1);

    let rhs_phi = -(&lp * &chi1) - &half_lpp * &psi1;
    let mut phi1 = solve(&rhs_phi);
    gauge(&mut phi1);

    let r2 = (&l0 * &chi1 - &rhs_chi).norm() / scale;
    let r3 = (&l0 * &phi1 - &rhs_phi).norm() / scale;
    let residuals = [r1, r2, r3];
    if r2 > CHAIN_TOL {
        return Err(PencilError::NotDefective { residuals });
    }
    let length = if r3 <= CHAIN_TOL { 3 } else { 2 };
    Ok(KeldyshChain {
        lambda0,
        psi1,
        chi1,
        phi1,
        residuals,
        length,
    })
}

/// Cross-check between the linear 2N×2N spectrum and the pencil.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// (λ, σ_min(L(λ))/scale(λ)) for every linear eigenvalue.
    pub per_eigenvalue: Vec<(Complex64, f64)>,
    pub worst_forward: f64,
    /// Worst distance from a sampled companion-linearization root to the
    /// nearest linear eigenvalue, relative to the eigenvalue magnitude.
    pub worst_converse: f64,
    pub tol: f64,
}

impl EquivalenceReport {
    pub fn passes(&self) -> bool {
        self.worst_forward <= self.tol
    }
}

/// Verifies that each eigenvalue of the linear operator annihilates the
/// pencil (σ_min(L(λ)) small) and, conversely, that a sample of pencil
/// roots (from the companion linearization) lies in the linear
/// spectrum.
pub fn pencil_linear_equivalence(
    pencil: &QuadraticPencil,
    linear: &DMatrix<f64>,
    tol: f64,
) -> Result<EquivalenceReport, PencilError> {
    let lin_spec = dense_spectrum(linear)?;
    let mut per_eigenvalue = Vec::with_capacity(lin_spec.eigenvalues.len());
    let mut worst_forward: f64 = 0.0;
    for &lambda in &lin_spec.eigenvalues {
        let rel = pencil.smallest_singular(lambda) / pencil.scale(lambda).max(f64::MIN_POSITIVE);
        worst_forward = worst_forward.max(rel);
        per_eigenvalue.push((lambda, rel));
    }

    // Companion linearization [[0, I], [-A2^{-1}A0, -A2^{-1}A1]].
    let n = pencil.dim();
    let a2_lu = pencil.a2.clone().lu();
    let m0 = a2_lu
        .solve(&pencil.a0)
        .ok_or_else(|| PencilError::DimensionMismatch("A2 is singular".into()))?;
    let m1 = a2_lu
        .solve(&pencil.a1)
        .ok_or_else(|| PencilError::DimensionMismatch("A2 is singular".into()))?;
    let mut companion = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        companion[(i, n + i)] = 1.0;
        for j in 0..n {
            companion[(n + i, j)] = -m0[(i, j)];
            companion[(n + i, n + j)] = -m1[(i, j)];
        }
    }
    let comp_spec = dense_spectrum(&companion)?;
    let sample = comp_spec.eigenvalues.iter().take(10);
    let mut worst_converse: f64 = 0.0;
    for z in sample {
        let nearest = lin_spec
            .eigenvalues
            .iter()
            .map(|w| (w - z).norm())
            .fold(f64::INFINITY, f64::min);
        worst_converse = worst_converse.max(nearest / z.norm().max(1.0));
    }

    Ok(EquivalenceReport {
        per_eigenvalue,
        worst_forward,
        worst_converse,
        tol,
    })
}
