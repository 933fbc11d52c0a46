//! Radial discretization of the α²-dynamo operator matrix.
//!
//! The operator couples two radial fields through
//! H = [[−Q[1], α·], [Q[α], −Q[1]]] with Q[a] = −∂_r(a ∂_r ·) + a·l(l+1)/r²
//! acting on the substituted variable u = r·ψ. The substitution puts the
//! blocks in Sturm–Liouville form, encodes the origin regularity as
//! u(0) = 0, and turns the radial measure r²dr on ψ into the flat
//! measure dr on u, so on a uniform grid no weight matrix is needed and
//! on a Chebyshev grid the Clenshaw–Curtis weights define the adjoint.
//!
//! Boundary conditions at r = 1:
//!   * idealized — ψ₁(1) = ψ₂(1) = 0, i.e. u₁(1) = u₂(1) = 0; the
//!     discrete operator is then selfadjoint under the block-swap J;
//!   * physical — ∂_rψ₁ + (l+1)ψ₁/r = 0 and ψ₂(1) = 0; in the
//!     u-variable the first row becomes u₁′(1) + l·u₁(1) = 0, which
//!     breaks the J-symmetry.

use crate::bessel::jl_zeros;
use crate::eig::{dense_spectrum, EigError, Spectrum};
use crate::krein::{pseudo_hermiticity_residual, Involution};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("radius {0} lies outside the unit ball [0, 1]")]
    OutOfDomain(f64),
    #[error("angular mode number must be >= 1, got {0}")]
    InvalidMode(u32),
    #[error("grid too coarse: need at least 8 interior nodes, got {0}")]
    GridTooCoarse(usize),
    #[error("count must be >= 1")]
    InvalidCount,
    #[error("operator is not in the graded representation")]
    NotGraded,
}

/// Polynomial helical-turbulence profile α(r) = C·Σ aₖ rᵏ.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaProfile {
    coeffs: Vec<f64>,
    c: f64,
}

impl AlphaProfile {
    pub fn new(coeffs: Vec<f64>, c: f64) -> Self {
        Self { coeffs, c }
    }

    /// Constant profile α ≡ c·v.
    pub fn constant(v: f64) -> Self {
        Self::new(vec![v], 1.0)
    }

    /// The quartic benchmark profile 1 − 26.09 r² + 53.64 r³ − 28.22 r⁴
    /// scaled by `c`.
    pub fn benchmark_quartic(c: f64) -> Self {
        Self::new(vec![1.0, 0.0, -26.09, 53.64, -28.22], c)
    }

    pub fn with_scaling(&self, c: f64) -> Self {
        Self::new(self.coeffs.clone(), c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scaling(&self) -> f64 {
        self.c
    }

    /// α(r) for r in [0, 1].
    pub fn eval(&self, r: f64) -> Result<f64, OperatorError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(OperatorError::OutOfDomain(r));
        }
        Ok(self.eval_raw(r))
    }

    pub(crate) fn eval_raw(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for &a in self.coeffs.iter().rev() {
            acc = acc * r + a;
        }
        self.c * acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    FiniteDifference2,
    ChebyshevCollocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Idealized,
    Physical,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Idealized => write!(f, "idealized"),
            BoundaryCondition::Physical => write!(f, "physical"),
        }
    }
}

/// Interior radial nodes in (0, 1) with quadrature weights; the
/// endpoints are eliminated through the boundary conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    scheme: Scheme,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid with n interior nodes, second-order finite
    /// differences.
    pub fn uniform(n: usize) -> Self {
        let h = 1.0 / (n + 1) as f64;
        Self {
            scheme: Scheme::FiniteDifference2,
            nodes: (1..=n).map(|i| i as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Chebyshev–Gauss–Lobatto grid with n interior nodes and
    /// Clenshaw–Curtis weights.
    pub fn chebyshev(n: usize) -> Self {
        let full = chebyshev_full_nodes(n + 2);
        let w_full = clenshaw_curtis_weights(n + 1);
        Self {
            scheme: Scheme::ChebyshevCollocation,
            nodes: full[1..=n].to_vec(),
            weights: w_full[1..=n].to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
}

/// Ascending CGL nodes on [0, 1]: r_j = (1 − cos(jπ/N))/2, j = 0..=N,
/// with N = m − 1.
fn chebyshev_full_nodes(m: usize) -> Vec<f64> {
    let n = m - 1;
    (0..=n)
        .map(|j| {
            let t = (j as f64 * std::f64::consts::PI / n as f64 / 2.0).sin();
            t * t
        })
        .collect()
}

/// Clenshaw–Curtis weights on [0, 1] for the N+1 CGL nodes
/// (N = panels). Classic closed-form sum; the [−1,1] weights are halved
/// by the affine map.
fn clenshaw_curtis_weights(panels: usize) -> Vec<f64> {
    let n = panels;
    let mut w = vec![0.0_f64; n + 1];
    if n == 0 {
        w[0] = 1.0;
        return w;
    }
    let nf = n as f64;
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for i in 1..n {
            let theta = i as f64 * std::f64::consts::PI / nf;
            let mut v = 1.0;
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
            w[i] = 2.0 * v / nf;
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for i in 1..n {
            let theta = i as f64 * std::f64::consts::PI / nf;
            let mut v = 1.0;
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            w[i] = 2.0 * v / nf;
        }
    }
    // scale [-1, 1] -> [0, 1]
    w.iter_mut().for_each(|x| *x *= 0.5);
    w
}

/// First-derivative collocation matrix on arbitrary distinct nodes from
/// barycentric weights (negative-sum diagonal).
fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let m = nodes.len();
    let mut d = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            if i != j {
                let val = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = val;
                row_sum += val;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

fn cgl_barycentric_weights(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let delta = if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            if j % 2 == 0 {
                delta
            } else {
                -delta
            }
        })
        .collect()
}

/// Right-end condition for a single radial block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RightEnd {
    Dirichlet,
    /// u′(1) + l·u(1) = 0.
    Robin(u32),
}

/// Discretization of Q[a]u = −(a u′)′ + a·l(l+1)/r²·u on the interior
/// unknowns, with u(0) = 0 and the given right-end condition.
pub(crate) fn sturm_block(
    grid: &RadialGrid,
    l: u32,
    right: RightEnd,
    a: &dyn Fn(f64) -> f64,
) -> DMatrix<f64> {
    match grid.scheme {
        Scheme::FiniteDifference2 => sturm_block_fd(grid, l, right, a),
        Scheme::ChebyshevCollocation => sturm_block_cheb(grid, l, right, a),
    }
}

fn sturm_block_fd(
    grid: &RadialGrid,
    l: u32,
    right: RightEnd,
    a: &dyn Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = grid.n();
    let h = 1.0 / (n + 1) as f64;
    let h2 = h * h;
    let ll = (l * (l + 1)) as f64;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let r = grid.nodes[i];
        let a_left = a(r - 0.5 * h);
        let a_right = a(r + 0.5 * h);
        m[(i, i)] = (a_left + a_right) / h2 + ll * a(r) / (r * r);
        if i > 0 {
            m[(i, i - 1)] = -a_left / h2;
        }
        if i + 1 < n {
            m[(i, i + 1)] = -a_right / h2;
        }
        if i == n - 1 {
            match right {
                // u(1) = 0: ghost value vanishes.
                RightEnd::Dirichlet => {}
                // One-sided second-order elimination of u(1) through
                // (3u_B - 4u_{n} + u_{n-1})/(2h) + l u_B = 0.
                RightEnd::Robin(l_bc) => {
                    let qq = 3.0 + 2.0 * h * f64::from(l_bc);
                    m[(i, i)] -= a_right * (4.0 / qq) / h2;
                    m[(i, i - 1)] += a_right / (qq * h2);
                }
            }
        }
    }
    m
}

fn sturm_block_cheb(
    grid: &RadialGrid,
    l: u32,
    right: RightEnd,
    a: &dyn Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = grid.n();
    let m = n + 2;
    let full = chebyshev_full_nodes(m);
    let bary = cgl_barycentric_weights(m);
    let d = differentiation_matrix(&full, &bary);
    let a_diag = DMatrix::from_fn(m, m, |i, j| if i == j { a(full[i]) } else { 0.0 });
    let flux = &d * a_diag * &d;

    let ll = (l * (l + 1)) as f64;
    let mut out = DMatrix::<f64>::zeros(n, n);
    match right {
        RightEnd::Dirichlet => {
            for i in 1..=n {
                for j in 1..=n {
                    out[(i - 1, j - 1)] = -flux[(i, j)];
                }
            }
        }
        RightEnd::Robin(l_bc) => {
            // Eliminate u(1) through the collocated Robin row:
            // Σ_k D[last, k] u_k + l u_last = 0.
            let last = m - 1;
            let denom = d[(last, last)] + f64::from(l_bc);
            for i in 1..=n {
                for j in 1..=n {
                    let fold = -d[(last, j)] / denom;
                    out[(i - 1, j - 1)] = -(flux[(i, j)] + flux[(i, last)] * fold);
                }
            }
        }
    }
    for i in 0..n {
        let r = grid.nodes[i];
        out[(i, i)] += ll * a(r) / (r * r);
    }
    out
}

/// Which basis the 2N×2N matrix lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Field components (u₁, u₂).
    Direct,
    /// J-even / J-odd combinations (u₂ ± u₁)/√2.
    Graded,
}

/// Dense 2N×2N real discretization of the dynamo operator.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: DMatrix<f64>,
    l: u32,
    bc: BoundaryCondition,
    profile: AlphaProfile,
    grid: RadialGrid,
    rep: Representation,
}

impl DiscreteOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn profile(&self) -> &AlphaProfile {
        &self.profile
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Full complex spectrum of the discretized operator.
    pub fn spectrum(&self) -> Result<Spectrum, EigError> {
        dense_spectrum(&self.matrix)
    }
}

/// Assembles H = [[−Q[1], α·], [Q[α], −Q[1]]] on the grid in the
/// u = r·ψ variable, with the boundary rows eliminated.
pub fn assemble(
    profile: &AlphaProfile,
    l: u32,
    grid: &RadialGrid,
    bc: BoundaryCondition,
) -> Result<DiscreteOperator, OperatorError> {
    if l < 1 {
        return Err(OperatorError::InvalidMode(l));
    }
    if grid.n() < 8 {
        return Err(OperatorError::GridTooCoarse(grid.n()));
    }
    let n = grid.n();
    let right_u1 = match bc {
        BoundaryCondition::Idealized => RightEnd::Dirichlet,
        BoundaryCondition::Physical => RightEnd::Robin(l),
    };
    let one = |_r: f64| 1.0;
    let alpha = |r: f64| profile.eval_raw(r);
    let q1_u1 = sturm_block(grid, l, right_u1, &one);
    let q1_u2 = sturm_block(grid, l, RightEnd::Dirichlet, &one);
    let q_alpha = sturm_block(grid, l, right_u1, &alpha);

    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = -q1_u1[(i, j)];
            h[(n + i, j)] = q_alpha[(i, j)];
            h[(n + i, n + j)] = -q1_u2[(i, j)];
        }
        h[(i, n + i)] = alpha(grid.nodes[i]);
    }

    Ok(DiscreteOperator {
        matrix: h,
        l,
        bc,
        profile: profile.clone(),
        grid: grid.clone(),
        rep: Representation::Direct,
    })
}

/// W^{1/2} H W^{−1/2} with the grid weights repeated over both
/// components; symmetry statements in the weighted product reduce to
/// plain transposition of this matrix.
fn weight_symmetrized(op: &DiscreteOperator) -> DMatrix<f64> {
    let n = op.grid.n();
    let s: Vec<f64> = op.grid.weights.iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        op.matrix[(i, j)] * s[i % n] / s[j % n]
    })
}

/// Relative defect of the J-pseudo-Hermiticity H = JH†J in the discrete
/// weighted inner product, J = antidiag(I, I).
pub fn pseudo_hermiticity_residual_disc(op: &DiscreteOperator) -> f64 {
    let n = op.grid.n();
    let sym = weight_symmetrized(op).map(|x| Complex64::new(x, 0.0));
    let j = Involution::block_swap(n);
    pseudo_hermiticity_residual(&j, &sym).expect("dimensions agree by construction")
}

fn graded_transform(n: usize) -> DMatrix<f64> {
    let s = 1.0 / 2.0_f64.sqrt();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, i)] = s;
        m[(i, n + i)] = -s;
        m[(n + i, i)] = s;
        m[(n + i, n + i)] = s;
    }
    m
}

/// Transforms into the representation that diagonalizes J:
/// Ȟ = S⁻¹HS with S = (1/√2)[[I, −I], [I, I]] (orthogonal).
pub fn to_graded_rep(op: &DiscreteOperator) -> DiscreteOperator {
    let n = op.grid.n();
    let s = graded_transform(n);
    DiscreteOperator {
        matrix: s.transpose() * &op.matrix * &s,
        rep: Representation::Graded,
        ..op.clone()
    }
}

/// Inverse of [`to_graded_rep`].
pub fn from_graded_rep(op: &DiscreteOperator) -> DiscreteOperator {
    let n = op.grid.n();
    let s = graded_transform(n);
    DiscreteOperator {
        matrix: &s * &op.matrix * s.transpose(),
        rep: Representation::Direct,
        ..op.clone()
    }
}

/// Residuals of the graded block relations H₊₊ = H₊₊†, H₋₋ = H₋₋†,
/// H₊₋ = −H₋₊† in the weighted product, relative to the operator norm.
pub fn graded_block_residuals(op: &DiscreteOperator) -> Result<[f64; 3], OperatorError> {
    if op.rep != Representation::Graded {
        return Err(OperatorError::NotGraded);
    }
    let n = op.grid.n();
    let sym = weight_symmetrized(op);
    let pp = sym.view((0, 0), (n, n));
    let pm = sym.view((0, n), (n, n));
    let mp = sym.view((n, 0), (n, n));
    let mm = sym.view((n, n), (n, n));
    let scale = sym.norm().max(1.0);
    Ok([
        (pp - pp.transpose()).norm() / scale,
        (mm - mm.transpose()).norm() / scale,
        (pm + mp.transpose()).norm() / scale,
    ])
}

/// Analytic reference spectrum for constant α under idealized boundary
/// conditions: for each zero κ of j_l the pair λ = −κ² ± α₀κ.
///
/// Derivation: Q[α₀] = α₀Q[1], and on a Q[1]-eigenspace with eigenvalue
/// κ² the operator reduces to [[−κ², α₀], [α₀κ², −κ²]]. The κ are zeros
/// of j_l because u = r·j_l(κr) solves Q[1]u = κ²u with u(0) = u(1) = 0.
/// Sorted like a [`Spectrum`] (descending real part).
pub fn constant_alpha_oracle(
    alpha0: f64,
    l: u32,
    n_max: usize,
) -> Result<Vec<Complex64>, OperatorError> {
    if l < 1 {
        return Err(OperatorError::InvalidMode(l));
    }
    if n_max < 1 {
        return Err(OperatorError::InvalidCount);
    }
    let mut out = Vec::with_capacity(2 * n_max);
    for kappa in jl_zeros(l, n_max) {
        out.push(Complex64::new(-kappa * kappa + alpha0 * kappa, 0.0));
        out.push(Complex64::new(-kappa * kappa - alpha0 * kappa, 0.0));
    }
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::jl_zero;

    #[test]
    fn alpha_eval_examples() {
        let p = AlphaProfile::benchmark_quartic(1.0);
        assert_eq!(p.eval(0.0).unwrap(), 1.0);
        let p2 = AlphaProfile::benchmark_quartic(2.0);
        let expected = 2.0 * (1.0 - 26.09 + 53.64 - 28.22);
        assert!((p2.eval(1.0).unwrap() - expected).abs() < 1e-12);
        assert!((p2.eval(1.0).unwrap() - 0.66).abs() < 1e-12);
        let zero = AlphaProfile::benchmark_quartic(0.0);
        assert_eq!(zero.eval(0.7).unwrap(), 0.0);
        assert!(matches!(
            p.eval(1.5),
            Err(OperatorError::OutOfDomain(_))
        ));
    }

    #[test]
    fn grids_are_increasing_interior() {
        for grid in [RadialGrid::uniform(17), RadialGrid::chebyshev(17)] {
            let nodes = grid.nodes();
            assert_eq!(nodes.len(), 17);
            assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < 1.0);
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(grid.weights().len(), 17);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        // CC weights on [0,1] with N panels are exact through degree N.
        let w = clenshaw_curtis_weights(8);
        let nodes = chebyshev_full_nodes(9);
        for deg in 0..=8usize {
            let quad: f64 = nodes
                .iter()
                .zip(&w)
                .map(|(&r, &wi)| wi * r.powi(deg as i32))
                .sum();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((quad - exact).abs() < 1e-13, "deg {deg}: {quad} vs {exact}");
        }
    }

    #[test]
    fn differentiation_matrix_is_exact_on_polynomials() {
        let m = 12;
        let nodes = chebyshev_full_nodes(m);
        let bary = cgl_barycentric_weights(m);
        let d = differentiation_matrix(&nodes, &bary);
        // p(r) = r^5 - 2 r^2 + 3, p'(r) = 5 r^4 - 4 r
        let p: Vec<f64> = nodes.iter().map(|&r| r.powi(5) - 2.0 * r * r + 3.0).collect();
        for i in 0..m {
            let got: f64 = (0..m).map(|j| d[(i, j)] * p[j]).sum();
            let want = 5.0 * nodes[i].powi(4) - 4.0 * nodes[i];
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_alpha_gives_block_diagonal() {
        let grid = RadialGrid::uniform(16);
        let op = assemble(&AlphaProfile::constant(0.0), 1, &grid, BoundaryCondition::Idealized)
            .unwrap();
        let n = 16;
        let m = op.matrix();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m[(i, n + j)], 0.0);
                assert_eq!(m[(n + i, j)], 0.0);
                assert_eq!(m[(i, j)], m[(n + i, n + j)]);
            }
        }
    }

    #[test]
    fn assemble_validates_inputs() {
        let grid = RadialGrid::uniform(16);
        assert!(matches!(
            assemble(&AlphaProfile::constant(1.0), 0, &grid, BoundaryCondition::Idealized),
            Err(OperatorError::InvalidMode(0))
        ));
        assert!(matches!(
            assemble(
                &AlphaProfile::constant(1.0),
                1,
                &RadialGrid::uniform(4),
                BoundaryCondition::Idealized
            ),
            Err(OperatorError::GridTooCoarse(4))
        ));
    }

    fn leading_distinct(spec: &[Complex64], count: usize) -> Vec<Complex64> {
        let mut sorted: Vec<Complex64> = spec.to_vec();
        sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        sorted.truncate(count);
        sorted.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        sorted
    }

    #[test]
    fn constant_alpha_spectrum_matches_oracle_chebyshev() {
        let grid = RadialGrid::chebyshev(40);
        let op = assemble(&AlphaProfile::constant(1.0), 1, &grid, BoundaryCondition::Idealized)
            .unwrap();
        let spec = op.spectrum().unwrap();
        let oracle = constant_alpha_oracle(1.0, 1, 5).unwrap();
        let got = leading_distinct(&spec.eigenvalues, 10);
        let want = leading_distinct(&oracle, 10);
        for (g, w) in got.iter().zip(&want) {
            assert!(
                (g - w).norm() <= 1e-8 * w.norm(),
                "{g} vs {w}"
            );
        }
    }

    #[test]
    fn fd_scheme_converges_at_second_order() {
        let oracle = constant_alpha_oracle(1.0, 1, 1).unwrap();
        let target = oracle[0];
        let mut errors = Vec::new();
        for n in [64, 128, 256] {
            let grid = RadialGrid::uniform(n);
            let op =
                assemble(&AlphaProfile::constant(1.0), 1, &grid, BoundaryCondition::Idealized)
                    .unwrap();
            let spec = op.spectrum().unwrap();
            let nearest = spec
                .eigenvalues
                .iter()
                .map(|z| (z - target).norm())
                .fold(f64::INFINITY, f64::min);
            errors.push(nearest);
        }
        let r1 = errors[0] / errors[1];
        let r2 = errors[1] / errors[2];
        assert!(r1 > 3.0 && r1 < 5.0, "ratio {r1}");
        assert!(r2 > 3.0 && r2 < 5.0, "ratio {r2}");
    }

    #[test]
    fn free_decay_physical_bc_is_real_negative() {
        // At C = 0 the blocks decouple; the Robin block has eigenvalues
        // -(zeros of j_0)^2 = -(n pi)^2 and the Dirichlet block
        // -(zeros of j_1)^2.
        let grid = RadialGrid::chebyshev(40);
        let op = assemble(
            &AlphaProfile::benchmark_quartic(0.0),
            1,
            &grid,
            BoundaryCondition::Physical,
        )
        .unwrap();
        let spec = op.spectrum().unwrap();
        let scale = op.matrix().norm();
        for z in &spec.eigenvalues {
            assert!(z.im.abs() <= 1e-10 * scale, "imaginary part {z}");
            assert!(z.re < 0.0, "unstable free decay {z}");
        }
        let pi = std::f64::consts::PI;
        let j0_lead = -(pi * pi);
        let j1_lead = -jl_zero(1, 1).powi(2);
        let lead = spec.eigenvalues[0].re;
        let second = spec.eigenvalues[1].re;
        assert!((lead - j0_lead).abs() < 1e-8 * j0_lead.abs(), "{lead}");
        assert!((second - j1_lead).abs() < 1e-8 * j1_lead.abs(), "{second}");
    }

    #[test]
    fn j_residual_dichotomy() {
        let grid = RadialGrid::uniform(64);
        let profile = AlphaProfile::benchmark_quartic(1.0);
        let ideal = assemble(&profile, 1, &grid, BoundaryCondition::Idealized).unwrap();
        assert!(pseudo_hermiticity_residual_disc(&ideal) <= 1e-12);

        let physical = assemble(&profile, 1, &grid, BoundaryCondition::Physical).unwrap();
        assert!(pseudo_hermiticity_residual_disc(&physical) >= 1e-4);

        let free = assemble(&AlphaProfile::constant(0.0), 1, &grid, BoundaryCondition::Idealized)
            .unwrap();
        assert!(pseudo_hermiticity_residual_disc(&free) <= 1e-12);
    }

    #[test]
    fn graded_rep_block_relations() {
        let grid = RadialGrid::uniform(32);
        let op = assemble(&AlphaProfile::constant(1.0), 1, &grid, BoundaryCondition::Idealized)
            .unwrap();
        let graded = to_graded_rep(&op);
        let res = graded_block_residuals(&graded).unwrap();
        assert!(res.iter().all(|&r| r <= 1e-10), "{res:?}");
        assert!(matches!(
            graded_block_residuals(&op),
            Err(OperatorError::NotGraded)
        ));
    }

    #[test]
    fn graded_round_trip() {
        let grid = RadialGrid::uniform(24);
        let op = assemble(
            &AlphaProfile::benchmark_quartic(0.8),
            1,
            &grid,
            BoundaryCondition::Physical,
        )
        .unwrap();
        let back = from_graded_rep(&to_graded_rep(&op));
        let defect = (back.matrix() - op.matrix()).norm() / op.matrix().norm();
        assert!(defect < 1e-13, "{defect}");
    }

    #[test]
    fn graded_blocks_match_explicit_assembly() {
        // The transformed operator must equal
        // (1/2) [[Q[alpha-2] + alpha, -Q[alpha] + alpha],
        //        [Q[alpha] - alpha,   Q[-alpha-2] - alpha]]
        // assembled directly from the block builders.
        let grid = RadialGrid::uniform(20);
        let n = grid.n();
        let profile = AlphaProfile::benchmark_quartic(0.7);
        let op = assemble(&profile, 1, &grid, BoundaryCondition::Idealized).unwrap();
        let graded = to_graded_rep(&op);

        let alpha = |r: f64| profile.eval_raw(r);
        let am2 = |r: f64| profile.eval_raw(r) - 2.0;
        let man2 = |r: f64| -profile.eval_raw(r) - 2.0;
        let q_am2 = sturm_block(&grid, 1, RightEnd::Dirichlet, &am2);
        let q_a = sturm_block(&grid, 1, RightEnd::Dirichlet, &alpha);
        let q_man2 = sturm_block(&grid, 1, RightEnd::Dirichlet, &man2);
        let mut expected = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            let a_i = alpha(grid.nodes()[i]);
            for j in 0..n {
                expected[(i, j)] = 0.5 * q_am2[(i, j)];
                expected[(i, n + j)] = 0.5 * (-q_a[(i, j)]);
                expected[(n + i, j)] = 0.5 * q_a[(i, j)];
                expected[(n + i, n + j)] = 0.5 * q_man2[(i, j)];
            }
            expected[(i, i)] += 0.5 * a_i;
            expected[(i, n + i)] += 0.5 * a_i;
            expected[(n + i, i)] -= 0.5 * a_i;
            expected[(n + i, n + i)] -= 0.5 * a_i;
        }
        let defect = (graded.matrix() - &expected).norm() / expected.norm();
        assert!(defect < 1e-12, "{defect}");
    }

    #[test]
    fn operator_is_affine_in_scaling() {
        let grid = RadialGrid::uniform(24);
        let base = AlphaProfile::benchmark_quartic(1.0);
        let h0 = assemble(&base.with_scaling(0.0), 1, &grid, BoundaryCondition::Physical)
            .unwrap();
        let h1 = assemble(&base.with_scaling(1.0), 1, &grid, BoundaryCondition::Physical)
            .unwrap();
        let c = 3.7;
        let hc = assemble(&base.with_scaling(c), 1, &grid, BoundaryCondition::Physical).unwrap();
        let combo = h0.matrix() + (h1.matrix() - h0.matrix()) * c;
        let defect = (hc.matrix() - combo).norm() / hc.matrix().norm();
        assert!(defect < 1e-13, "{defect}");
    }

    #[test]
    fn spectra_are_conjugation_closed() {
        let grid = RadialGrid::uniform(32);
        for bc in [BoundaryCondition::Idealized, BoundaryCondition::Physical] {
            let op = assemble(&AlphaProfile::benchmark_quartic(5.0), 1, &grid, bc).unwrap();
            let spec = op.spectrum().unwrap();
            let scale = op.matrix().norm();
            for z in &spec.eigenvalues {
                if z.im.abs() > 1e-8 * scale {
                    let partner = spec
                        .eigenvalues
                        .iter()
                        .map(|w| (w - z.conj()).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(partner <= 1e-8 * scale);
                }
            }
        }
    }

    #[test]
    fn oracle_examples() {
        // alpha = 0: doubly degenerate -kappa^2.
        let vals = constant_alpha_oracle(0.0, 1, 1).unwrap();
        assert_eq!(vals.len(), 2);
        assert!((vals[0] - vals[1]).norm() < 1e-12);
        let kappa = jl_zero(1, 1);
        assert!((kappa - 4.4934).abs() < 1e-3);
        assert!((vals[0].re + kappa * kappa).abs() < 1e-10);

        // alpha = 1: Vieta identities on each 2x2 block.
        let alpha0 = 1.0;
        let vals = constant_alpha_oracle(alpha0, 1, 4).unwrap();
        for (n, kappa) in jl_zeros(1, 4).into_iter().enumerate() {
            let pair: Vec<Complex64> = vals
                .iter()
                .copied()
                .filter(|z| {
                    (z.re + kappa * kappa - alpha0 * kappa).abs() < 1e-8
                        || (z.re + kappa * kappa + alpha0 * kappa).abs() < 1e-8
                })
                .collect();
            assert_eq!(pair.len(), 2, "pair for mode {n}");
            let sum = pair[0] + pair[1];
            let prod = pair[0] * pair[1];
            assert!((sum.re + 2.0 * kappa * kappa).abs() < 1e-8);
            assert!(
                (prod.re - (kappa.powi(4) - alpha0 * alpha0 * kappa * kappa)).abs()
                    < 1e-6
            );
        }
        assert!(matches!(
            constant_alpha_oracle(1.0, 0, 3),
            Err(OperatorError::InvalidMode(0))
        ));
        assert!(matches!(
            constant_alpha_oracle(1.0, 1, 0),
            Err(OperatorError::InvalidCount)
        ));
    }

    #[test]
    fn chebyshev_constant_alpha_close_to_fd() {
        // Same operator, two discretizations: leading eigenvalues agree.
        let p = AlphaProfile::constant(2.0);
        let fd = assemble(&p, 1, &RadialGrid::uniform(400), BoundaryCondition::Idealized)
            .unwrap()
            .spectrum()
            .unwrap();
        let ch = assemble(&p, 1, &RadialGrid::chebyshev(36), BoundaryCondition::Idealized)
            .unwrap()
            .spectrum()
            .unwrap();
        for k in 0..6 {
            let a = fd.eigenvalues[k];
            let b = ch.eigenvalues[k];
            assert!((a - b).norm() < 1e-3 * a.norm().max(1.0), "{a} vs {b}");
        }
    }
}
