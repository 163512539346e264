//! Integrals over the positive half line for integrands with a few known scales.
//!
//! The integral `int_0^inf f(w) dw` is taken in the variable `u = ln w`, where
//! integrands that vanish linearly at the origin and decay at least like `1/w`
//! at infinity fall off exponentially at both ends. The `u` range is split at the
//! logarithms of the supplied scales and into pieces of bounded width, and each
//! piece goes through tanh-sinh quadrature.

/// `u` margin beyond the extreme scales; the neglected tails are below `e^-40`
/// relative for integrands of the shape described above.
const TAIL_MARGIN: f64 = 40.0;
const MAX_PIECE: f64 = 2.0;

/// `int_0^inf f(w) dw` for an integrand with characteristic scales `scales`.
///
/// `rel_tol` is relative to the integral itself. Scales that are zero,
/// negative or non-finite are ignored; at least one usable scale is required.
pub fn half_line<F: Fn(f64) -> f64>(f: F, scales: &[f64], rel_tol: f64) -> f64 {
    let mut logs: Vec<f64> = scales
        .iter()
        .filter(|s| s.is_finite() && **s > 0.0)
        .map(|s| s.ln())
        .collect();
    assert!(!logs.is_empty(), "half_line needs a positive finite scale");
    logs.sort_by(f64::total_cmp);
    logs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let lo = logs[0] - TAIL_MARGIN;
    let hi = logs[logs.len() - 1] + TAIL_MARGIN;
    let mut knots = vec![lo];
    knots.extend(logs.iter().copied());
    knots.push(hi);

    let mut edges = Vec::new();
    for w in knots.windows(2) {
        let pieces = ((w[1] - w[0]) / MAX_PIECE).ceil().max(1.0) as usize;
        for k in 0..pieces {
            edges.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    edges.push(hi);

    let g = |u: f64| {
        let w = u.exp();
        f(w) * w
    };
    // A coarse pass sets the magnitude for the absolute targets of the fine pass.
    let rough: Vec<f64> = edges
        .windows(2)
        .map(|e| quadrature::double_exponential::integrate(g, e[0], e[1], 1e-6).integral)
        .collect();
    let scale: f64 = rough.iter().map(|v| v.abs()).sum();
    if scale == 0.0 {
        return 0.0;
    }
    let target = rel_tol * scale / edges.len() as f64;
    edges
        .windows(2)
        .map(|e| quadrature::double_exponential::integrate(g, e[0], e[1], target).integral)
        .sum()
}
