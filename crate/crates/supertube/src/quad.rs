//! Small adaptive quadrature kernel used for the potential integrals.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// Refines until the local Richardson error estimate drops below the
/// tolerance budget assigned to the subinterval; `tol` is treated as an
/// absolute tolerance on the whole interval. Depth is capped to keep
/// pathological integrands from recursing forever.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // the roundoff floor stops refinement once delta is pure noise
    let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs() + whole.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(floor) {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates `f` over `[a, b]` to a relative tolerance, falling back to an
/// absolute floor when the integral is close to zero.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // non-adaptive composite pass to estimate the scale
    let n = 64;
    let h = (b - a) / n as f64;
    let mut coarse = 0.0;
    for i in 0..n {
        let x0 = a + i as f64 * h;
        coarse += simpson(x0, x0 + h, f(x0), f(x0 + 0.5 * h), f(x0 + h));
    }
    let scale = coarse.abs().max(1e-300);
    adaptive_simpson(f, a, b, rel_tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact on cubics: ∫_{-1}^{3} (x³ - 2x + 1) dx = 16
        let v = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        assert_relative_eq!(v, 16.0, max_relative = 1e-12);
    }

    #[test]
    fn integrates_oscillatory() {
        let v = integrate_rel(&|x| (10.0 * x).sin(), 0.0, PI, 1e-10);
        let exact = (1.0 - (10.0 * PI).cos()) / 10.0;
        assert_relative_eq!(v, exact, epsilon = 1e-9);
    }

    #[test]
    fn integrates_smooth_bump() {
        // ∫₀¹ e^{-1/(1-r²)} r² dr against a dense midpoint reference
        let f = |r: f64| {
            if r >= 1.0 { 0.0 } else { (-1.0 / (1.0 - r * r)).exp() * r * r }
        };
        let v = integrate_rel(&f, 0.0, 1.0, 1e-10);
        let n = 400_000;
        let h = 1.0 / n as f64;
        let reference: f64 = (0..n).map(|i| f((i as f64 + 0.5) * h) * h).sum();
        assert_relative_eq!(v, reference, max_relative = 1e-8);
    }
}
