//! Internal 1-D quadrature helpers: adaptive Simpson with Richardson
//! extrapolation, and a composite-Simpson cumulative integral used to
//! tabulate radial CDFs.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct QuadFailure {
    pub a: f64,
    pub b: f64,
}

/// Adaptive Simpson on `[a, b]`. The integrand must be finite on the
/// interval; convergence failure (max recursion depth exhausted before the
/// tolerance is met) is reported rather than silently accepted.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64, QuadFailure> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol, abs_tol, 48)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<f64, QuadFailure> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    let err = refined - whole;
    if err.abs() <= 15.0 * (rel_tol * refined.abs()).max(abs_tol) {
        return Ok(refined + err / 15.0);
    }
    if depth == 0 {
        return Err(QuadFailure { a, b });
    }
    let half_abs = 0.5 * abs_tol;
    let l = recurse(f, a, m, fa, flm, fm, left, rel_tol, half_abs, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, rel_tol, half_abs, depth - 1)?;
    Ok(l + r)
}

/// Composite Simpson cumulative integral of `f` on `[a, b]` over `panels`
/// uniform panels. Returns the panel boundaries and the running integral at
/// each boundary (`cum[0] = 0`). For a non-negative integrand the cumulative
/// values are non-decreasing.
pub(crate) fn cumulative_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
) -> (Vec<f64>, Vec<f64>) {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels + 1);
    let mut cum = Vec::with_capacity(panels + 1);
    xs.push(a);
    cum.push(0.0);
    let mut total = 0.0;
    let mut f_lo = f(a);
    for i in 0..panels {
        let x_lo = a + i as f64 * h;
        let x_hi = if i + 1 == panels { b } else { a + (i + 1) as f64 * h };
        let f_mid = f(0.5 * (x_lo + x_hi));
        let f_hi = f(x_hi);
        total += simpson(x_lo, x_hi, f_lo, f_mid, f_hi).max(0.0);
        xs.push(x_hi);
        cum.push(total);
        f_lo = f_hi;
    }
    (xs, cum)
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)] // provides f64 math in no_std builds
use num_traits::Float as _;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact for cubics.
        let f = |x: f64| 3.0 * x * x;
        let v = adaptive_simpson(&f, 0.0, 2.0, 1e-12, 1e-15).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_power_law_tail() {
        let f = |x: f64| x.powf(-3.0);
        let v = adaptive_simpson(&f, 1.0, 100.0, 1e-10, 1e-14).unwrap();
        let exact = 0.5 * (1.0 - 100.0f64.powf(-2.0));
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn cumulative_is_monotone_and_consistent() {
        let f = |x: f64| (-x).exp();
        let (xs, cum) = cumulative_simpson(&f, 0.0, 5.0, 1000);
        assert_eq!(xs.len(), 1001);
        for w in cum.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let exact = 1.0 - (-5.0f64).exp();
        assert!((cum.last().unwrap() - exact).abs() < 1e-10);
    }
}
