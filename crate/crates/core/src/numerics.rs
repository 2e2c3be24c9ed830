//! Scalar numerics: stable log-sum-exp, log-gamma, and least-squares slope
//! fitting for the asymptotic-exponent probes.

/// Stable `log(sum(exp(x)))`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if !m.is_finite() {
        return m;
    }
    let mut s = 0.0;
    for &x in xs {
        s += (x - m).exp();
    }
    m + s.ln()
}

/// Natural log of the gamma function.
///
/// Arguments below `1e-12` are routed through the recurrence
/// `lnGamma(z) = lnGamma(1 + z) - ln z` so that the small-argument pole
/// `Gamma(z) ~ 1/z` is computed to full relative accuracy; elsewhere this is
/// a Lanczos-class approximation.
pub fn ln_gamma(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x < 1e-12 {
        return ln_gamma(1.0 + x) - x.ln();
    }
    statrs::function::gamma::ln_gamma(x)
}

/// Least-squares line fit; returns `(slope, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
