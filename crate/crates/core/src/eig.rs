//! Dense real nonsymmetric eigensolver with residual certificates.
//!
//! The pipeline is the classical one: diagonal balancing (radix-2
//! scaling, no permutation phase), Householder reduction to upper
//! Hessenberg form, and Francis double-shift QR iteration on the
//! Hessenberg matrix with accumulation of the transformations, followed
//! by back-substitution for the eigenvectors of the quasi-triangular
//! factor. The structure follows the EISPACK balanc/orthes/hqr2 family.
//!
//! Deflation: a subdiagonal entry h[l][l−1] is treated as zero when
//! |h[l][l−1]| ≤ eps·(|h[l−1][l−1]| + |h[l][l]|), with the matrix norm
//! substituted when the diagonal pair vanishes. Exceptional ad-hoc
//! shifts are injected after 10 and 30 stagnant sweeps per eigenvalue;
//! the total sweep budget is 40·n.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Total QR sweep budget factor: 40·n sweeps before giving up.
pub const MAX_SWEEPS_PER_DIM: usize = 40;

/// Residual certificate threshold ‖Hv − λv‖ / ‖H‖_F for accepted
/// eigenpairs.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EigError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is empty")]
    Empty,
    #[error("QR iteration exhausted {sweeps} sweeps; {converged} of {dim} eigenvalues deflated")]
    NonConvergence {
        sweeps: usize,
        converged: usize,
        dim: usize,
        /// Eigenvalues deflated before the budget ran out.
        partial: Vec<Complex64>,
    },
    #[error("inverse iteration stalled (best residual {best:.3e})")]
    InverseIterationStalled { best: f64 },
}

/// Complex spectrum of a real matrix, sorted by descending real part
/// (ties by ascending imaginary part), with residual certificates for
/// the eigenpairs that carry vectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub matrix_dim: usize,
}

impl Spectrum {
    /// Largest real part over the spectrum (the spectral abscissa).
    pub fn max_re(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Full eigendecomposition: values, unit eigenvectors, residuals.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: Vec<DVector<Complex64>>,
    pub residuals: Vec<f64>,
    pub matrix_dim: usize,
}

impl Eigen {
    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            eigenvalues: self.values.clone(),
            residuals: self.residuals.clone(),
            matrix_dim: self.matrix_dim,
        }
    }
}

/// All eigenvalues of a real square matrix.
pub fn dense_spectrum(h: &DMatrix<f64>) -> Result<Spectrum, EigError> {
    dense_eigen(h).map(|e| e.spectrum())
}

/// Eigenvalues plus right eigenvectors of a real square matrix.
pub fn dense_eigen(a: &DMatrix<f64>) -> Result<Eigen, EigError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Err(EigError::Empty);
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let a_norm = a.norm();

    if n == 1 {
        return Ok(sorted_eigen(
            vec![Complex64::new(a[(0, 0)], 0.0)],
            vec![DVector::from_element(1, Complex64::new(1.0, 0.0))],
            a,
            a_norm,
        ));
    }

    let mut work = a.clone();
    let scale = balance(&mut work);
    let mut v = hessenberg(&mut work);
    let (d, e) = hqr2(&mut work, &mut v, MAX_SWEEPS_PER_DIM * n)?;

    // Undo the balancing: right eigenvectors of the original matrix are
    // the scaled rows of the balanced ones.
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] *= scale[i];
        }
    }

    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if e[j] == 0.0 {
            values.push(Complex64::new(d[j], 0.0));
            vectors.push(DVector::from_fn(n, |i, _| Complex64::new(v[(i, j)], 0.0)));
            j += 1;
        } else {
            // Conjugate pair: columns j, j+1 hold Re and Im of the
            // eigenvector for the positive-imaginary-part member.
            let vec_plus = DVector::from_fn(n, |i, _| Complex64::new(v[(i, j)], v[(i, j + 1)]));
            values.push(Complex64::new(d[j], e[j]));
            vectors.push(vec_plus.clone());
            values.push(Complex64::new(d[j + 1], e[j + 1]));
            vectors.push(vec_plus.map(|z| z.conj()));
            j += 2;
        }
    }

    Ok(sorted_eigen(values, vectors, a, a_norm))
}

fn sorted_eigen(
    values: Vec<Complex64>,
    vectors: Vec<DVector<Complex64>>,
    a: &DMatrix<f64>,
    a_norm: f64,
) -> Eigen {
    let n = a.nrows();
    let mut items: Vec<(Complex64, DVector<Complex64>)> = values.into_iter().zip(vectors).collect();
    items.sort_by(|x, y| y.0.re.total_cmp(&x.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let mut out_values = Vec::with_capacity(n);
    let mut out_vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (lambda, mut vec) in items {
        let norm = vec.norm();
        if norm > 0.0 {
            vec /= Complex64::new(norm, 0.0);
        }
        residuals.push(eigen_residual(a, a_norm, lambda, &vec));
        out_values.push(lambda);
        out_vectors.push(vec);
    }
    Eigen {
        values: out_values,
        vectors: out_vectors,
        residuals,
        matrix_dim: n,
    }
}

/// ‖Av − λv‖ / (‖A‖_F ‖v‖) for a real matrix and complex pair.
pub fn eigen_residual(
    a: &DMatrix<f64>,
    a_norm: f64,
    lambda: Complex64,
    v: &DVector<Complex64>,
) -> f64 {
    let av = real_matvec(a, v);
    let defect = (&av - v * lambda).norm();
    let vnorm = v.norm();
    if a_norm == 0.0 || vnorm == 0.0 {
        return defect;
    }
    defect / (a_norm * vnorm)
}

/// A·v for real A and complex v.
pub(crate) fn real_matvec(a: &DMatrix<f64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let re = DVector::from_fn(v.len(), |i, _| v[i].re);
    let im = DVector::from_fn(v.len(), |i, _| v[i].im);
    let are = a * re;
    let aim = a * im;
    DVector::from_fn(v.len(), |i, _| Complex64::new(are[i], aim[i]))
}

/// Radix-2 diagonal balancing (EISPACK balanc without the permutation
/// phase). Returns the applied scale; A ← D⁻¹AD.
fn balance(a: &mut DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut scale = vec![1.0_f64; n];
    let radix = 2.0_f64;
    let b2 = radix * radix;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= b2;
            }
            g = r * radix;
            while c >= g {
                f /= radix;
                c /= b2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form, returning the
/// accumulated orthogonal factor. Entries of `h` below the subdiagonal
/// are left holding reflector data and must not be read afterwards.
fn hessenberg(h: &mut DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let high = n - 1;
    let mut ort = vec![0.0_f64; n];

    for m in 1..high {
        let mut col_scale = 0.0;
        for i in m..=high {
            col_scale += h[(i, m - 1)].abs();
        }
        if col_scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / col_scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        // Similarity H <- (I - u u'/h) H (I - u u'/h)
        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= col_scale;
        h[(m, m - 1)] = col_scale * g;
    }

    // Accumulate the reflectors into V.
    let mut v = DMatrix::<f64>::identity(n, n);
    for m in (1..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in m + 1..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                // double division avoids underflow
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] += g * ort[i];
                }
            }
        }
    }
    v
}

/// Francis double-shift QR on a Hessenberg matrix with accumulation into
/// `v`, then back-substitution for the eigenvectors. Returns the (Re, Im)
/// parts of the eigenvalues in deflation storage order; for a conjugate
/// pair the positive-imaginary member comes first and columns (j, j+1)
/// of `v` hold the real and imaginary parts of its eigenvector.
#[allow(clippy::needless_range_loop, unused_assignments)]
fn hqr2(
    h: &mut DMatrix<f64>,
    v: &mut DMatrix<f64>,
    max_sweeps: usize,
) -> Result<(Vec<f64>, Vec<f64>), EigError> {
    let nn = h.nrows() as isize;
    let low: isize = 0;
    let high: isize = nn - 1;
    let eps = f64::EPSILON / 2.0; // 2^-53
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    // x doubles as the sweep's reflector scale; the k-loop reads it at
    // k == m before assigning, so it enters each sweep initialized.
    let (mut t, mut w, mut x, mut y): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);

    let mut d = vec![0.0_f64; nn as usize];
    let mut e = vec![0.0_f64; nn as usize];

    macro_rules! hm {
        ($i:expr, $j:expr) => {
            h[($i as usize, $j as usize)]
        };
    }
    macro_rules! vm {
        ($i:expr, $j:expr) => {
            v[($i as usize, $j as usize)]
        };
    }

    // Hessenberg-band 1-norm, also the fallback deflation scale.
    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += hm!(i, j).abs();
        }
    }
    if norm == 0.0 {
        // Zero matrix: everything is already deflated.
        return Ok((d, e));
    }

    let mut n = nn - 1;
    let mut iter = 0usize;
    let mut sweeps = 0usize;

    while n >= low {
        // Find the smallest trailing unreduced block.
        let mut l = n;
        while l > low {
            s = hm!(l - 1, l - 1).abs() + hm!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if hm!(l, l - 1).abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One real root.
            hm!(n, n) += exshift;
            d[n as usize] = hm!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // A 2x2 block: real pair or complex pair.
            w = hm!(n, n - 1) * hm!(n - 1, n);
            p = (hm!(n - 1, n - 1) - hm!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            hm!(n, n) += exshift;
            hm!(n - 1, n - 1) += exshift;
            x = hm!(n, n);

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                x = hm!(n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in n - 1..nn {
                    z = hm!(n - 1, j);
                    hm!(n - 1, j) = q * z + p * hm!(n, j);
                    hm!(n, j) = q * hm!(n, j) - p * z;
                }
                for i in 0..=n {
                    z = hm!(i, n - 1);
                    hm!(i, n - 1) = q * z + p * hm!(i, n);
                    hm!(i, n) = q * hm!(i, n) - p * z;
                }
                for i in low..=high {
                    z = vm!(i, n - 1);
                    vm!(i, n - 1) = q * z + p * vm!(i, n);
                    vm!(i, n) = q * vm!(i, n) - p * z;
                }
            } else {
                // Complex pair.
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form the shift.
            x = hm!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = hm!(n - 1, n - 1);
                w = hm!(n, n - 1) * hm!(n - 1, n);
            }

            if iter == 10 {
                // Wilkinson's exceptional shift.
                exshift += x;
                for i in low..=n {
                    hm!(i, i) -= x;
                }
                s = hm!(n, n - 1).abs() + hm!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        hm!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }

            iter += 1;
            sweeps += 1;
            if sweeps > max_sweeps {
                let converged = (nn - 1 - n) as usize;
                let mut partial = Vec::with_capacity(converged);
                for k in (n + 1)..nn {
                    partial.push(Complex64::new(d[k as usize], e[k as usize]));
                }
                return Err(EigError::NonConvergence {
                    sweeps,
                    converged,
                    dim: nn as usize,
                    partial,
                });
            }

            // Two consecutive small subdiagonals let the sweep start late.
            let mut m = n - 2;
            while m >= l {
                z = hm!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / hm!(m + 1, m) + hm!(m, m + 1);
                q = hm!(m + 1, m + 1) - z - r - s;
                r = hm!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if hm!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs() * (hm!(m - 1, m - 1).abs() + z.abs() + hm!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                hm!(i, i - 2) = 0.0;
                if i > m + 2 {
                    hm!(i, i - 3) = 0.0;
                }
            }

            // Double QR sweep on rows l..=n, columns m..=n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = hm!(k, k - 1);
                    q = hm!(k + 1, k - 1);
                    r = if notlast { hm!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        // Bulge already vanished in this column.
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        hm!(k, k - 1) = -s * x;
                    } else if l != m {
                        hm!(k, k - 1) = -hm!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = hm!(k, j) + q * hm!(k + 1, j);
                        if notlast {
                            p += r * hm!(k + 2, j);
                            hm!(k + 2, j) -= p * z;
                        }
                        hm!(k, j) -= p * x;
                        hm!(k + 1, j) -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * hm!(i, k) + y * hm!(i, k + 1);
                        if notlast {
                            p += z * hm!(i, k + 2);
                            hm!(i, k + 2) -= p * r;
                        }
                        hm!(i, k) -= p;
                        hm!(i, k + 1) -= p * q;
                    }
                    for i in low..=high {
                        p = x * vm!(i, k) + y * vm!(i, k + 1);
                        if notlast {
                            p += z * vm!(i, k + 2);
                            vm!(i, k + 2) -= p * r;
                        }
                        vm!(i, k) -= p;
                        vm!(i, k + 1) -= p * q;
                    }
                }
            }
        }
    }

    // Back-substitution for the eigenvectors of the quasi-triangular
    // factor.
    for nb in (0..nn).rev() {
        p = d[nb as usize];
        q = e[nb as usize];

        if q == 0.0 {
            // Real vector.
            let mut l = nb;
            hm!(nb, nb) = 1.0;
            for i in (0..nb).rev() {
                w = hm!(i, i) - p;
                r = 0.0;
                for j in l..=nb {
                    r += hm!(i, j) * hm!(j, nb);
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        if w != 0.0 {
                            hm!(i, nb) = -r / w;
                        } else {
                            hm!(i, nb) = -r / (eps * norm);
                        }
                    } else {
                        // Solve the 2x2 real system of the block.
                        x = hm!(i, i + 1);
                        y = hm!(i + 1, i);
                        q = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        hm!(i, nb) = t;
                        if x.abs() > z.abs() {
                            hm!(i + 1, nb) = (-r - w * t) / x;
                        } else {
                            hm!(i + 1, nb) = (-s - y * t) / z;
                        }
                    }
                    // Overflow control.
                    t = hm!(i, nb).abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            hm!(j, nb) /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex vector (stored in columns nb-1, nb).
            let mut l = nb - 1;

            if hm!(nb, nb - 1).abs() > hm!(nb - 1, nb).abs() {
                hm!(nb - 1, nb - 1) = q / hm!(nb, nb - 1);
                hm!(nb - 1, nb) = -(hm!(nb, nb) - p) / hm!(nb, nb - 1);
            } else {
                let c = Complex64::new(0.0, -hm!(nb - 1, nb))
                    / Complex64::new(hm!(nb - 1, nb - 1) - p, q);
                hm!(nb - 1, nb - 1) = c.re;
                hm!(nb - 1, nb) = c.im;
            }
            hm!(nb, nb - 1) = 0.0;
            hm!(nb, nb) = 1.0;
            for i in (0..nb - 1).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=nb {
                    ra += hm!(i, j) * hm!(j, nb - 1);
                    sa += hm!(i, j) * hm!(j, nb);
                }
                w = hm!(i, i) - p;

                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        let c = Complex64::new(-ra, -sa) / Complex64::new(w, q);
                        hm!(i, nb - 1) = c.re;
                        hm!(i, nb) = c.im;
                    } else {
                        // Solve the complex 2x2 system of the block.
                        x = hm!(i, i + 1);
                        y = hm!(i + 1, i);
                        let mut vr = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize]
                            - q * q;
                        let vi = (d[i as usize] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let c = Complex64::new(x * r - z * ra + q * sa, x * s - z * sa - q * ra)
                            / Complex64::new(vr, vi);
                        hm!(i, nb - 1) = c.re;
                        hm!(i, nb) = c.im;
                        if x.abs() > z.abs() + q.abs() {
                            hm!(i + 1, nb - 1) =
                                (-ra - w * hm!(i, nb - 1) + q * hm!(i, nb)) / x;
                            hm!(i + 1, nb) = (-sa - w * hm!(i, nb) - q * hm!(i, nb - 1)) / x;
                        } else {
                            let c = Complex64::new(
                                -r - y * hm!(i, nb - 1),
                                -s - y * hm!(i, nb),
                            ) / Complex64::new(z, q);
                            hm!(i + 1, nb - 1) = c.re;
                            hm!(i + 1, nb) = c.im;
                        }
                    }
                    // Overflow control.
                    t = hm!(i, nb - 1).abs().max(hm!(i, nb).abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=nb {
                            hm!(j, nb - 1) /= t;
                            hm!(j, nb) /= t;
                        }
                    }
                }
            }
        }
    }

    // Multiply out: eigenvectors of the balanced matrix.
    for j in (low..nn).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += vm!(i, k) * hm!(k, j);
            }
            vm!(i, j) = z;
        }
    }

    Ok((d, e))
}

/// Result of shifted inverse iteration at an approximate eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenvectorResult {
    pub vector: DVector<Complex64>,
    pub residual: f64,
    /// True when the eigenvalue admits only one eigenvector direction
    /// while the deflated restart stagnates on a non-eigenvector — the
    /// Jordan-structure signature at an exceptional point.
    pub near_defective: bool,
}

/// Unit eigenvector for `lambda` by shifted inverse iteration, with at
/// most 5 deterministic random restarts.
///
/// Defectiveness is probed through a two-column block inverse
/// iteration: the dominant two-dimensional subspace Q of (H − λI)⁻¹ is
/// extracted and H is projected to the 2×2 matrix B = QᴴHQ. When both
/// eigenvalues of B sit at `lambda` the off-diagonal Schur coupling of
/// B separates a Jordan block (coupling of order ‖H‖) from a
/// semisimple double eigenvalue (B ≈ λI); when only one does, `lambda`
/// is simple. Only the Jordan case raises `near_defective`.
pub fn eigenvector(h: &DMatrix<f64>, lambda: Complex64) -> Result<EigenvectorResult, EigError> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "matrix must be square");
    if n == 0 {
        return Err(EigError::Empty);
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let h_norm = h.norm().max(f64::MIN_POSITIVE);
    let tol = RESIDUAL_TOL;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1234);

    let lu = factor_shifted(h, lambda, h_norm);

    let mut best: Option<(DVector<Complex64>, f64)> = None;
    for _ in 0..5 {
        let mut x = random_unit(&mut rng, n);
        let mut res = f64::INFINITY;
        for _ in 0..30 {
            let Some(y) = lu.solve(&x) else { break };
            let norm = y.norm();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            x = y / Complex64::new(norm, 0.0);
            res = (real_matvec(h, &x) - &x * lambda).norm() / h_norm;
            if res <= tol {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| res < *b) {
            best = Some((x, res));
        }
        if best.as_ref().unwrap().1 <= tol {
            break;
        }
    }
    let (v1, res1) = best.unwrap();
    if res1 > tol {
        return Err(EigError::InverseIterationStalled { best: res1 });
    }

    let near_defective = if n < 2 {
        false
    } else {
        // Block inverse iteration for the dominant 2-dim subspace.
        let mut q1 = v1.clone();
        let mut q2 = random_unit(&mut rng, n);
        orthogonalize(&mut q2, &q1);
        let qn = q2.norm();
        if qn > 0.0 {
            q2 /= Complex64::new(qn, 0.0);
        }
        for _ in 0..15 {
            let (Some(y1), Some(y2)) = (lu.solve(&q1), lu.solve(&q2)) else {
                break;
            };
            let n1 = y1.norm();
            if !n1.is_finite() || n1 == 0.0 {
                break;
            }
            q1 = y1 / Complex64::new(n1, 0.0);
            let mut y2 = y2;
            orthogonalize(&mut y2, &q1);
            let n2 = y2.norm();
            if !n2.is_finite() || n2 == 0.0 {
                break;
            }
            q2 = y2 / Complex64::new(n2, 0.0);
        }
        // 2x2 projection B = Q^H H Q.
        let hq1 = real_matvec(h, &q1);
        let hq2 = real_matvec(h, &q2);
        let b = [
            [q1.dotc(&hq1), q1.dotc(&hq2)],
            [q2.dotc(&hq1), q2.dotc(&hq2)],
        ];
        let mean = (b[0][0] + b[1][1]) * 0.5;
        let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
        let disc = (mean * mean - det).sqrt();
        let (mu1, mu2) = (mean + disc, mean - disc);
        let coupling = ((b[0][0] - mean).norm().powi(2)
            + (b[1][1] - mean).norm().powi(2)
            + b[0][1].norm().powi(2)
            + b[1][0].norm().powi(2))
        .sqrt();
        if coupling <= 1e-6 * h_norm {
            // B is a scalar block: a semisimple (double) eigenvalue.
            false
        } else if (mean - lambda).norm() > 1e-2 * h_norm {
            // The block captured a remote second eigenvalue: simple.
            false
        } else {
            // Eigenvectors of B nearly parallel <=> Jordan structure.
            // (The eigenvalues themselves split like sqrt of the
            // subspace error and cannot be compared to lambda.)
            let (v1a, v1b, v2a, v2b) = if b[0][1].norm() >= b[1][0].norm() {
                (b[0][1], mu1 - b[0][0], b[0][1], mu2 - b[0][0])
            } else {
                (mu1 - b[1][1], b[1][0], mu2 - b[1][1], b[1][0])
            };
            let n1 = (v1a.norm_sqr() + v1b.norm_sqr()).sqrt();
            let n2 = (v2a.norm_sqr() + v2b.norm_sqr()).sqrt();
            if n1 == 0.0 || n2 == 0.0 {
                true
            } else {
                (v1a.conj() * v2a + v1b.conj() * v2b).norm() / (n1 * n2) >= 0.9
            }
        }
    };

    Ok(EigenvectorResult {
        vector: v1,
        residual: res1,
        near_defective,
    })
}

fn factor_shifted(
    h: &DMatrix<f64>,
    lambda: Complex64,
    h_norm: f64,
) -> nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn> {
    let n = h.nrows();
    let mut shift = lambda;
    for attempt in 0..4 {
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            let mut z = Complex64::new(h[(i, j)], 0.0);
            if i == j {
                z -= shift;
            }
            z
        });
        let lu = shifted.lu();
        // Probe for exact singularity; perturb the shift slightly if so.
        if lu.solve(&DVector::from_element(n, Complex64::new(1.0, 0.0))).is_some() || attempt == 3 {
            return lu;
        }
        shift += Complex64::new(1.0, 1.0) * (h_norm * 1e-14 * (attempt + 1) as f64);
    }
    unreachable!()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn orthogonalize(x: &mut DVector<Complex64>, against: &DVector<Complex64>) {
    let coeff = against.dotc(&*x);
    *x -= against * coeff;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectrum_of(rows: &[f64], n: usize) -> Spectrum {
        dense_spectrum(&DMatrix::from_row_slice(n, n, rows)).unwrap()
    }

    #[test]
    fn rotation_generator_has_imaginary_pair() {
        let s = spectrum_of(&[0.0, 1.0, -1.0, 0.0], 2);
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((s.eigenvalues[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(s.residuals.iter().all(|&r| r < 1e-12));
    }

    #[test]
    fn companion_matrix_roots() {
        // z^3 - 6 z^2 + 11 z - 6 = (z-1)(z-2)(z-3)
        let c = DMatrix::from_row_slice(
            3,
            3,
            &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        );
        let s = dense_spectrum(&c).unwrap();
        let mut got: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        got.sort_by(f64::total_cmp);
        for (g, want) in got.iter().zip([1.0, 2.0, 3.0]) {
            assert!((g - want).abs() < 1e-10, "{g} vs {want}");
        }
        assert!(s.eigenvalues.iter().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn one_by_one() {
        let s = spectrum_of(&[5.0], 1);
        assert_eq!(s.eigenvalues, vec![Complex64::new(5.0, 0.0)]);
    }

    #[test]
    fn zero_matrix() {
        let s = spectrum_of(&[0.0; 9], 3);
        assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, f64::NAN, 1.0, 0.0]);
        assert!(matches!(dense_spectrum(&m), Err(EigError::NonFinite)));
    }

    #[test]
    fn sorted_by_re_desc_then_im_asc() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 2.0, 0.0, 0.0, //
                -2.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 3.0, 0.0, //
                0.0, 0.0, 0.0, -1.0,
            ],
        );
        let s = dense_spectrum(&m).unwrap();
        let vals = &s.eigenvalues;
        assert!((vals[0] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!((vals[1] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((vals[2] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((vals[3] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn residual_certificates_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let n = rng.gen_range(2..=24);
            let a = random_matrix(&mut rng, n);
            let eig = dense_eigen(&a).unwrap();
            for (k, &res) in eig.residuals.iter().enumerate() {
                assert!(res <= RESIDUAL_TOL, "n={n} k={k} residual={res:.3e}");
            }
        }
    }

    #[test]
    fn trace_and_determinant_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 10);
            let s = dense_spectrum(&a).unwrap();
            let sum: Complex64 = s.eigenvalues.iter().sum();
            let prod: Complex64 = s.eigenvalues.iter().product();
            let trace = a.trace();
            let det = a.determinant();
            assert!((sum.re - trace).abs() <= 1e-8 * trace.abs().max(1.0));
            assert!(sum.im.abs() <= 1e-8 * a.norm());
            assert!(
                (prod - Complex64::new(det, 0.0)).norm() <= 1e-8 * det.abs().max(1.0),
                "prod {prod}, det {det}"
            );
        }
    }

    #[test]
    fn conjugation_pairing_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(2..=20);
            let a = random_matrix(&mut rng, n);
            let s = dense_spectrum(&a).unwrap();
            let scale = a.norm();
            for z in &s.eigenvalues {
                if z.im.abs() > 1e-8 * scale {
                    let partner = s
                        .eigenvalues
                        .iter()
                        .map(|w| (w - z.conj()).norm())
                        .fold(f64::INFINITY, f64::min);
                    assert!(partner <= 1e-8 * scale, "unpaired {z}");
                }
            }
        }
    }

    #[test]
    fn similarity_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 20);
            // Well-conditioned transform: orthogonal Q times mild diagonal.
            let q = random_matrix(&mut rng, 20).qr().q();
            let dscale = DMatrix::from_fn(20, 20, |i, j| {
                if i == j {
                    rng.gen_range(0.5..2.0)
                } else {
                    0.0
                }
            });
            let p = q * dscale;
            let p_inv = p.clone().try_inverse().unwrap();
            let b = &p_inv * &a * &p;

            let mut sa = dense_spectrum(&a).unwrap().eigenvalues;
            let mut sb = dense_spectrum(&b).unwrap().eigenvalues;
            sa.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            sb.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
            let tol = 1e-7 * a.norm();
            for (za, zb) in sa.iter().zip(&sb) {
                assert!((za - zb).norm() <= tol, "{za} vs {zb}");
            }
        }
    }

    #[test]
    fn eigenvector_simple_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let r = eigenvector(&a, Complex64::new(2.0, 0.0)).unwrap();
        assert!(r.vector[0].norm() < 1e-8);
        assert!((r.vector[1].norm() - 1.0).abs() < 1e-12);
        assert!(!r.near_defective);
    }

    #[test]
    fn eigenvector_flags_jordan_block() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        let r = eigenvector(&a, Complex64::new(2.0, 0.0)).unwrap();
        // Geometric eigenvector is e1 up to phase.
        assert!(r.vector[1].norm() < 1e-6, "{:?}", r.vector);
        assert!(r.near_defective);
    }

    #[test]
    fn eigenvector_semisimple_double_not_flagged() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let r = eigenvector(&a, Complex64::new(2.0, 0.0)).unwrap();
        assert!(!r.near_defective);
    }

    #[test]
    fn eigenvector_complex_eigenvalue() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = eigenvector(&a, Complex64::new(0.0, 1.0)).unwrap();
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn defective_triple_still_certified() {
        // A single 3x3 Jordan block: eigenvalues correct to sqrt-ish
        // accuracy; certificates are looser but the values must cluster.
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 0.0, 4.0, 1.0, 0.0, 0.0, 4.0]);
        let s = dense_spectrum(&a).unwrap();
        for z in &s.eigenvalues {
            assert!((z - Complex64::new(4.0, 0.0)).norm() < 1e-4, "{z}");
        }
    }
}
