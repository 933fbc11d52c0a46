//! Spherical Bessel functions of the first kind and their positive zeros.
//!
//! The zeros are located by sign-change bracketing followed by plain
//! bisection. They feed the free-decay and constant-α reference spectra,
//! so this module stays independent of the matrix machinery it is used
//! to verify.

/// Spherical Bessel function j_l(x).
///
/// Closed forms for l = 0, 1 and the upward recurrence
/// j_{l+1}(x) = (2l+1)/x · j_l(x) − j_{l−1}(x) above. Upward recurrence
/// loses accuracy for x ≪ l, which does not matter for zero hunting:
/// all zeros of j_l lie above l, and the sign is still correct below.
pub fn spherical_jl(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    if l == 1 {
        return j1;
    }
    let mut prev = j0;
    let mut cur = j1;
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// First `n_max` positive zeros of j_l, ascending.
///
/// Scans outward from x = max(l, 1)/2 in small steps until `n_max` sign
/// changes have been bracketed, then bisects each bracket down to
/// relative width ~1e−15 (well below the 1e−12 the spectra need).
pub fn jl_zeros(l: u32, n_max: usize) -> Vec<f64> {
    assert!(n_max >= 1, "need at least one zero");
    let mut zeros = Vec::with_capacity(n_max);
    let step = 0.05;
    let mut a = (f64::from(l)).max(1.0) * 0.5;
    let mut fa = spherical_jl(l, a);
    while zeros.len() < n_max {
        let b = a + step;
        let fb = spherical_jl(l, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(l, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// n-th positive zero of j_l (1-based).
pub fn jl_zero(l: u32, n: usize) -> f64 {
    jl_zeros(l, n)[n - 1]
}

fn bisect(l: u32, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    debug_assert!(fa * spherical_jl(l, b) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a) <= 1e-15 * mid {
            return mid;
        }
        let fm = spherical_jl(l, mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
