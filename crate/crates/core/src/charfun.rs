//! The characteristic function of the open marginal polytope: closed forms
//! for the segment, the simplex, and decomposable models, together with an
//! exact polar-volume oracle that validates every closed form, a simplicial
//! cone integral helper, and the boundary-scaling probe that measures the
//! blow-up exponent at a face.

use num::{BigInt, BigRational, One, Signed};

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::Model;
use crate::normalizers::DecomposableStructure;
use crate::numerics::fit_line;
use crate::polytope::{forms_for_subset, AffineForm, MarginalPolytope, MAX_HULL_DIM};
use crate::rational::{q_from_f64, q_to_f64};

/// How a characteristic-function value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JcMethod {
    ClosedForm,
    PolarVolume,
}

impl JcMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            JcMethod::ClosedForm => "closed_form",
            JcMethod::PolarVolume => "polar_volume",
        }
    }
}

/// An affine-form factor of a closed-form value, with its exponent.
#[derive(Clone, Debug)]
pub struct JcFactor {
    pub form: AffineForm,
    pub exponent: u32,
}

/// A characteristic-function value. Closed-form evaluations carry their
/// factorization; both routes carry the exact rational value whenever the
/// query point is rational.
#[derive(Clone, Debug)]
pub struct CharFunValue {
    pub value: f64,
    pub exact: Option<BigRational>,
    pub method: JcMethod,
    pub numerator: Vec<JcFactor>,
    pub denominator: Vec<JcFactor>,
}

/// Characteristic function of the open unit segment: `1 / (m (1 - m))`.
pub fn jc_segment(m: f64) -> Result<f64> {
    if !(0.0 < m && m < 1.0) {
        return Err(Error::BoundaryOrOutside(format!(
            "segment requires 0 < m < 1, got {m}"
        )));
    }
    Ok(1.0 / (m * (1.0 - m)))
}

/// Exact-rational segment value.
pub fn jc_segment_q(m: &BigRational) -> Result<BigRational> {
    let one = BigRational::one();
    if !(m.is_positive() && *m < one) {
        return Err(Error::BoundaryOrOutside("segment requires 0 < m < 1".into()));
    }
    Ok(BigRational::one() / (m * (&one - m)))
}

/// Characteristic function of the standard simplex:
/// `1 / (m_1 ... m_n (1 - m_1 - ... - m_n))`.
pub fn jc_simplex(m: &[f64]) -> Result<f64> {
    let rest = 1.0 - m.iter().sum::<f64>();
    if m.iter().any(|&x| x <= 0.0) || rest <= 0.0 {
        return Err(Error::BoundaryOrOutside(
            "simplex requires all coordinates positive with sum below one".into(),
        ));
    }
    Ok(1.0 / (m.iter().product::<f64>() * rest))
}

/// Exact-rational simplex value.
pub fn jc_simplex_q(m: &[BigRational]) -> Result<BigRational> {
    let mut rest = BigRational::one();
    for x in m {
        rest -= x;
    }
    if m.iter().any(|x| !x.is_positive()) || !rest.is_positive() {
        return Err(Error::BoundaryOrOutside(
            "simplex requires all coordinates positive with sum below one".into(),
        ));
    }
    let mut prod = rest;
    for x in m {
        prod *= x;
    }
    Ok(BigRational::one() / prod)
}

/// Closed-form characteristic function of a decomposable model: the product
/// of the separator marginal-cell forms (with their multiplicities) over
/// the product of the clique marginal-cell forms, evaluated exactly.
pub fn jc_decomposable(
    model: &Model,
    ds: &DecomposableStructure,
    m: &[BigRational],
) -> Result<CharFunValue> {
    if m.len() != model.dim() {
        return Err(Error::Geometry(format!(
            "point has length {}, expected {}",
            m.len(),
            model.dim()
        )));
    }
    let mut numerator: Vec<JcFactor> = Vec::new();
    let mut denominator: Vec<JcFactor> = Vec::new();
    for &(s, nu) in &ds.separators {
        if s.is_empty() {
            continue; // the empty separator contributes the constant form 1
        }
        for form in forms_for_subset(model, s) {
            numerator.push(JcFactor { form, exponent: nu });
        }
    }
    for &c in &ds.cliques {
        for form in forms_for_subset(model, c) {
            denominator.push(JcFactor { form, exponent: 1 });
        }
    }

    let mut value = BigRational::one();
    for f in &denominator {
        let v = f.form.eval_q(m);
        if !v.is_positive() {
            return Err(Error::BoundaryOrOutside(format!(
                "facet form {} is {} at the query point",
                f.form.label,
                crate::rational::format_q(&v)
            )));
        }
        for _ in 0..f.exponent {
            value /= &v;
        }
    }
    for f in &numerator {
        let v = f.form.eval_q(m);
        for _ in 0..f.exponent {
            value *= &v;
        }
    }

    Ok(CharFunValue {
        value: q_to_f64(&value),
        exact: Some(value),
        method: JcMethod::ClosedForm,
        numerator,
        denominator,
    })
}

/// Log of the decomposable closed form at a floating-point query, used by
/// the boundary probe where the value itself overflows.
pub fn jc_decomposable_log(
    model: &Model,
    ds: &DecomposableStructure,
    m: &[f64],
) -> Result<f64> {
    let mut log = 0.0;
    for &(s, nu) in &ds.separators {
        if s.is_empty() {
            continue;
        }
        for form in forms_for_subset(model, s) {
            let v = form.eval_f64(m);
            if v <= 0.0 {
                return Err(Error::BoundaryOrOutside(format!(
                    "separator form {} is {v:e} at the query point",
                    form.label
                )));
            }
            log += nu as f64 * v.ln();
        }
    }
    for &c in &ds.cliques {
        for form in forms_for_subset(model, c) {
            let v = form.eval_f64(m);
            if v <= 0.0 {
                return Err(Error::BoundaryOrOutside(format!(
                    "facet form {} is {v:e} at the query point",
                    form.label
                )));
            }
            log -= v.ln();
        }
    }
    Ok(log)
}

/// Exact characteristic-function oracle: `|J|!` times the volume of the
/// polar of the polytope translated to put the query point at the origin.
/// Works for any model within the hull-oracle size bounds and is exact for
/// rational query points.
pub fn jc_polar_volume_oracle(poly: &MarginalPolytope, m: &[BigRational]) -> Result<CharFunValue> {
    if poly.dim > MAX_HULL_DIM {
        return Err(Error::DimensionTooLarge {
            what: "polar volume oracle",
            value: poly.dim,
            bound: MAX_HULL_DIM,
        });
    }
    if m.len() != poly.dim {
        return Err(Error::Geometry(format!(
            "point has length {}, expected {}",
            m.len(),
            poly.dim
        )));
    }
    // Polar of (polytope - m): { theta : <theta, f_i - m> <= 1 for all i }.
    let inequalities: Vec<(BigRational, Vec<BigRational>)> = (0..poly.vertices.len())
        .map(|k| {
            let v = poly.vertex_q(k);
            let shifted: Vec<BigRational> = v.iter().zip(m).map(|(a, b)| a - b).collect();
            (BigRational::one(), shifted)
        })
        .collect();
    let polar_vertices = geometry::vertex_enumeration(&inequalities).map_err(|e| match e {
        Error::Geometry(msg) if msg.contains("unbounded") => Error::BoundaryOrOutside(
            "polar is unbounded: the query point is not interior".into(),
        ),
        other => other,
    })?;
    let vol = geometry::volume(&polar_vertices)?;
    let mut factorial = BigInt::one();
    for k in 2..=poly.dim {
        factorial *= BigInt::from(k);
    }
    let exact = vol * BigRational::from_integer(factorial);
    Ok(CharFunValue {
        value: q_to_f64(&exact),
        exact: Some(exact),
        method: JcMethod::PolarVolume,
        numerator: Vec::new(),
        denominator: Vec::new(),
    })
}

/// Integral of `exp(-<theta, x>)` over the simplicial cone spanned by the
/// dual of the given basis: the volume of the dual parallelotope divided by
/// the product of the dual pairings `<xi_i, x>`.
///
/// With `X` the matrix whose columns are the basis vectors, the pairings
/// are the coordinates of `x` in the basis (the solution of `X w = x`) and
/// the dual volume is `1 / |det X|`.
#[allow(clippy::needless_range_loop)]
pub fn simplicial_cone_integral(basis: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    let n = basis.len();
    if n == 0 || basis.iter().any(|b| b.len() != n) || x.len() != n {
        return Err(Error::SingularBasis);
    }
    // Column matrix of the basis, destined for LU with partial pivoting.
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| basis[c][r]).collect())
        .collect();
    let mut w = x.to_vec();
    let mut det = 1.0f64;
    for col in 0..n {
        let (pivot, pivot_val) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .expect("nonempty column");
        if pivot_val < 1e-300 {
            return Err(Error::SingularBasis);
        }
        if pivot != col {
            a.swap(col, pivot);
            w.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            w[r] -= factor * w[col];
        }
    }
    // Back substitution for w = X^{-1} x.
    for col in (0..n).rev() {
        w[col] /= a[col][col];
        for r in 0..col {
            w[r] -= a[r][col] * w[col];
        }
    }
    let singular_threshold = 1e-12
        * basis
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .powi(n as i32);
    if det.abs() <= singular_threshold {
        return Err(Error::SingularBasis);
    }
    if w.iter().any(|&c| c <= 0.0) {
        return Err(Error::WrongCone);
    }
    Ok(1.0 / (det.abs() * w.iter().product::<f64>()))
}

/// Result of probing the characteristic function along a segment from an
/// interior point to a boundary point.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub lambdas: Vec<f64>,
    pub log_jc: Vec<f64>,
    /// Least-squares slope of `log J_C` against `log lambda` over the final
    /// eight grid points; a face of dimension `k` in ambient dimension `n`
    /// gives `-(n - k)`.
    pub fitted_slope: f64,
    /// Empirical estimate of the limit constant `lambda^{n-k} J_C` at the
    /// smallest lambda, using the supplied codimension.
    pub plateau_estimate: f64,
}

/// Default geometric grid for the boundary probe: `2^-5 ... 2^-20`.
pub fn default_probe_grid() -> Vec<f64> {
    (5..=20).map(|k| 2f64.powi(-k)).collect()
}

/// Evaluate `log J_C(lambda m + (1 - lambda) y)` along a lambda grid and fit
/// the blow-up exponent. `codim` is the expected codimension `n - k` of the
/// face containing `y`, used only for the plateau estimate.
pub fn boundary_scaling_probe(
    log_jc: impl Fn(&[f64]) -> Result<f64>,
    m: &[f64],
    y: &[f64],
    codim: usize,
    lambdas: &[f64],
) -> Result<ProbeReport> {
    assert_eq!(m.len(), y.len());
    assert!(lambdas.len() >= 2, "need at least two lambda values");
    let mut log_vals = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let point: Vec<f64> = m
            .iter()
            .zip(y)
            .map(|(&mi, &yi)| lambda * mi + (1.0 - lambda) * yi)
            .collect();
        log_vals.push(log_jc(&point)?);
    }
    let tail = lambdas.len().saturating_sub(8);
    let log_lambdas: Vec<f64> = lambdas[tail..].iter().map(|l| l.ln()).collect();
    let (fitted_slope, _) = fit_line(&log_lambdas, &log_vals[tail..]);
    let last = lambdas.len() - 1;
    let plateau_estimate = (log_vals[last] + codim as f64 * lambdas[last].ln()).exp();
    Ok(ProbeReport {
        lambdas: lambdas.to_vec(),
        log_jc: log_vals,
        fitted_slope,
        plateau_estimate,
    })
}

/// Convert a float vector to exact rationals for the oracle.
pub fn to_rational_point(m: &[f64]) -> Result<Vec<BigRational>> {
    m.iter().map(|&x| q_from_f64(x)).collect()
}
