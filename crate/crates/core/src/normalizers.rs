//! Prior and posterior normalizing constants of the conjugate prior on the
//! loglinear parameter: the exact gamma-product closed form available for
//! decomposable models, a low-dimensional quadrature oracle, and the probe
//! for the small-precision limit law connecting the normalizer to the
//! characteristic function of the marginal polytope.
//!
//! Everything is carried in log space: the raw constant blows up like a
//! power of `1/alpha` as the prior precision goes to zero.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{ContingencyTable, Model, VarSet};
use crate::numerics::{fit_line, ln_gamma};
use crate::polytope::{forms_for_subset, AffineForm};
use crate::quadrature;

/// Cliques and minimal separators (with multiplicities) of a decomposable
/// model, plus the vertex elimination order that witnesses chordality.
#[derive(Clone, Debug)]
pub struct DecomposableStructure {
    pub cliques: Vec<VarSet>,
    pub separators: Vec<(VarSet, u32)>,
    /// Eliminating vertices in this order (the reverse of the maximum
    /// cardinality search order) never creates fill-in.
    pub elimination_order: Vec<usize>,
}

/// Build the junction structure of a model whose generators are the cliques
/// of a chordal graph.
///
/// Maximum cardinality search produces a perfect elimination order exactly
/// when the interaction graph is chordal; the cliques fall out of the
/// search, and separators with multiplicities come from intersecting each
/// clique with the union of its predecessors in discovery order.
pub fn junction_structure(model: &Model) -> Result<DecomposableStructure> {
    let gc = model.gc();
    let n = gc.var_count();

    let mut adjacent = vec![VarSet::EMPTY; n];
    for &g in gc.generators() {
        for v in g.indices() {
            for w in g.indices() {
                if v != w {
                    adjacent[v].insert(w);
                }
            }
        }
    }

    // Maximum cardinality search; ties broken by variable index.
    let mut visited = VarSet::EMPTY;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..n {
        let best = (0..n)
            .filter(|&v| !visited.contains(v))
            .max_by_key(|&v| (adjacent[v].intersection(visited).len(), usize::MAX - v))
            .expect("unvisited vertex remains");
        visited.insert(best);
        order.push(best);
    }

    // Chordality: the earlier neighbors of every vertex must form a clique.
    let mut rank = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    for &v in &order {
        let earlier: Vec<usize> = adjacent[v]
            .indices()
            .into_iter()
            .filter(|&w| rank[w] < rank[v])
            .collect();
        for (x, &a) in earlier.iter().enumerate() {
            for &b in &earlier[x + 1..] {
                if !adjacent[a].contains(b) {
                    return Err(Error::NotChordal(format!(
                        "vertices {:?} and {:?} are non-adjacent neighbors of {:?}",
                        gc.variables()[a].name,
                        gc.variables()[b].name,
                        gc.variables()[v].name
                    )));
                }
            }
        }
    }

    // Maximal cliques: candidates v + earlier neighbors, maximal by inclusion.
    let mut candidates: Vec<VarSet> = order
        .iter()
        .map(|&v| {
            let mut c = VarSet::EMPTY;
            c.insert(v);
            for w in adjacent[v].indices() {
                if rank[w] < rank[v] {
                    c.insert(w);
                }
            }
            c
        })
        .collect();
    candidates.sort_by(|a, b| a.canonical_cmp(*b));
    candidates.dedup();
    let cliques: Vec<VarSet> = candidates
        .iter()
        .filter(|&&c| !candidates.iter().any(|&d| c != d && c.is_subset_of(d)))
        .copied()
        .collect();

    let clique_set: HashSet<VarSet> = cliques.iter().copied().collect();
    let generator_set: HashSet<VarSet> = gc.generators().iter().copied().collect();
    if clique_set != generator_set {
        return Err(Error::NotDecomposable(
            "generators are not the maximal cliques of their interaction graph".into(),
        ));
    }

    // Junction tree order: cliques ranked by the largest search rank of
    // their members; separator = intersection with the union of earlier
    // cliques. Running intersection guarantees each separator sits inside
    // some earlier clique.
    let mut ordered = cliques.clone();
    ordered.sort_by_key(|c| c.indices().iter().map(|&v| rank[v]).max().unwrap());
    let mut seen = VarSet::EMPTY;
    let mut sep_multiplicity: BTreeMap<Vec<usize>, (VarSet, u32)> = BTreeMap::new();
    for (i, &c) in ordered.iter().enumerate() {
        if i > 0 {
            let s = c.intersection(seen);
            if !s.is_empty() && !ordered[..i].iter().any(|&d| s.is_subset_of(d)) {
                return Err(Error::Geometry(
                    "running intersection property violated".into(),
                ));
            }
            sep_multiplicity
                .entry(s.indices())
                .and_modify(|e| e.1 += 1)
                .or_insert((s, 1));
        }
        seen = seen.union(c);
    }
    let separators: Vec<(VarSet, u32)> = sep_multiplicity.into_values().collect();

    // Dimension identity for the factorization: marginal table dimensions
    // of cliques minus those of separators must add up to |J|.
    let table_dim = |s: VarSet| -> i64 { gc.marginal_cell_count(s) as i64 - 1 };
    let lhs: i64 = cliques.iter().map(|&c| table_dim(c)).sum::<i64>()
        - separators
            .iter()
            .map(|&(s, nu)| nu as i64 * table_dim(s))
            .sum::<i64>();
    if lhs != model.dim() as i64 {
        return Err(Error::Geometry(format!(
            "junction structure dimension check failed: {lhs} != {}",
            model.dim()
        )));
    }

    let elimination_order = order.into_iter().rev().collect();
    Ok(DecomposableStructure {
        cliques,
        separators,
        elimination_order,
    })
}

/// How a normalizing constant was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizerMethod {
    DecomposableClosedForm,
    Quadrature,
}

impl NormalizerMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizerMethod::DecomposableClosedForm => "decomposable_closed_form",
            NormalizerMethod::Quadrature => "quadrature",
        }
    }
}

/// One `lnGamma` term of a closed-form normalizer: the log constant is the
/// weighted sum of `lnGamma(arg)` over these factors.
#[derive(Clone, Debug)]
pub struct GammaFactor {
    pub label: String,
    pub arg: f64,
    pub weight: i64,
}

/// A normalizing constant in log space.
#[derive(Clone, Debug)]
pub struct LogNormalizer {
    pub log_value: f64,
    pub m: Vec<f64>,
    pub alpha: f64,
    pub method: NormalizerMethod,
    pub gamma_factors: Vec<GammaFactor>,
}

/// For each marginal cell of `set` (baseline first, then odometer order),
/// the affine form whose value at an interior mean vector is that cell's
/// probability under the implied marginal distribution.
fn marginal_cell_forms(model: &Model, set: VarSet) -> Vec<(Vec<u32>, AffineForm)> {
    let jset = model.index_set();
    let vars = set.indices();
    let inside: Vec<usize> = (0..jset.len())
        .filter(|&k| jset.get(k).support().is_subset_of(set))
        .collect();
    // forms_for_subset yields the baseline form first, then one form per
    // element of `inside` in the same order.
    let mut forms = forms_for_subset(model, set).into_iter();
    let mut by_key: HashMap<Vec<u32>, AffineForm> = HashMap::new();
    by_key.insert(vec![0; vars.len()], forms.next().expect("baseline form"));
    for (&k0, form) in inside.iter().zip(forms) {
        let j = jset.get(k0);
        let key: Vec<u32> = vars.iter().map(|&v| j.level(v)).collect();
        by_key.insert(key, form);
    }

    let mut cells = Vec::with_capacity(by_key.len());
    let mut levels = vec![0u32; vars.len()];
    loop {
        let form = by_key
            .get(&levels)
            .expect("every marginal cell has a form")
            .clone();
        cells.push((levels.clone(), form));
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return cells;
            }
            pos -= 1;
            if levels[pos] + 1 < model.gc().card(vars[pos]) {
                levels[pos] += 1;
                for l in levels[pos + 1..].iter_mut() {
                    *l = 0;
                }
                break;
            }
            levels[pos] = 0;
            if pos == 0 {
                return cells;
            }
        }
    }
}

/// Closed-form log normalizing constant for a decomposable model: clique
/// gamma terms over the gamma of `alpha` and the separator terms, every
/// argument being `alpha` times the corresponding marginal-cell form.
pub fn log_i_decomposable(
    model: &Model,
    ds: &DecomposableStructure,
    m: &[f64],
    alpha: f64,
) -> Result<LogNormalizer> {
    log_i_shifted(model, ds, m, alpha, None)
}

/// Posterior normalizing constant: the same gamma product with every
/// argument shifted by the matching marginal count of the data and the
/// denominator evaluated at `alpha + N`. Equivalent to the prior form at
/// hyperparameters `((alpha m + t) / (alpha + N), alpha + N)`.
///
/// `alpha = 0` is allowed: the result is then finite exactly when the data
/// mean sits in the interior, and the error reports the face contact
/// otherwise.
pub fn log_i_posterior(
    model: &Model,
    ds: &DecomposableStructure,
    m: &[f64],
    alpha: f64,
    table: &ContingencyTable,
) -> Result<LogNormalizer> {
    log_i_shifted(model, ds, m, alpha, Some(table))
}

fn log_i_shifted(
    model: &Model,
    ds: &DecomposableStructure,
    m: &[f64],
    alpha: f64,
    table: Option<&ContingencyTable>,
) -> Result<LogNormalizer> {
    if m.len() != model.dim() {
        return Err(Error::Geometry(format!(
            "hyperparameter vector has length {}, expected {}",
            m.len(),
            model.dim()
        )));
    }
    if alpha < 0.0 || (alpha == 0.0 && table.is_none()) {
        return Err(Error::BoundaryOrOutside("alpha must be positive".into()));
    }
    let total = table.map_or(0.0, |t| t.total() as f64);
    let mut factors: Vec<GammaFactor> = Vec::new();
    let mut log_value = 0.0;

    let mut push = |label: String, arg: f64, weight: i64| -> Result<()> {
        if arg <= 0.0 {
            return Err(Error::BoundaryOrOutside(format!(
                "gamma argument for {label} is {arg:e}"
            )));
        }
        log_value += weight as f64 * ln_gamma(arg);
        factors.push(GammaFactor { label, arg, weight });
        Ok(())
    };

    let term = |set: VarSet, weight: i64| -> Result<()> {
        let margins = table.map(|t| t.margin(set));
        for (levels, form) in marginal_cell_forms(model, set) {
            let count = margins
                .as_ref()
                .map_or(0.0, |mg| mg.get(&levels).copied().unwrap_or(0) as f64);
            let arg = alpha * form.eval_f64(m) + count;
            push(form.label.clone(), arg, weight)?;
        }
        Ok(())
    };

    {
        let mut term = term;
        for &c in &ds.cliques {
            term(c, 1)?;
        }
        for &(s, nu) in &ds.separators {
            term(s, -(nu as i64))?;
        }
    }
    push("gamma(alpha)".into(), alpha + total, -1)?;

    Ok(LogNormalizer {
        log_value,
        m: m.to_vec(),
        alpha,
        method: NormalizerMethod::DecomposableClosedForm,
        gamma_factors: factors,
    })
}

/// Largest model dimension handled by the quadrature oracle.
pub const MAX_QUADRATURE_DIM: usize = 2;

/// Numerical evaluation of the normalizing constant by adaptive quadrature,
/// restricted to models of dimension at most two.
///
/// The natural-parameter integral is evaluated after rescaling the variable
/// by `alpha`, which keeps the integrand at unit scale uniformly down to
/// vanishing `alpha`; the scaled integral equals `alpha^{|J|} I(m, alpha)`
/// and its integrand is `exp(<x, m> - alpha * log L(x / alpha))` with the
/// Laplace transform evaluated by log-sum-exp.
pub fn log_i_quadrature(model: &Model, m: &[f64], alpha: f64) -> Result<LogNormalizer> {
    let dim = model.dim();
    if dim > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            what: "quadrature normalizer",
            value: dim,
            bound: MAX_QUADRATURE_DIM,
        });
    }
    if alpha <= 0.0 {
        return Err(Error::BoundaryOrOutside("alpha must be positive".into()));
    }
    // Necessary interior check via the general facet family.
    for form in crate::polytope::theorem_facets(model) {
        if form.eval_f64(m) <= 0.0 {
            return Err(Error::BoundaryOrOutside(format!(
                "facet form {} is nonpositive at m",
                form.label
            )));
        }
    }

    let fvecs: Vec<Vec<f64>> = model
        .cells()
        .iter()
        .map(|c| {
            model
                .f_vector(c)
                .into_iter()
                .map(|b| if b { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    // Streaming log-sum-exp over the cells; this sits in the innermost
    // quadrature loop, so no allocation per evaluation.
    let scaled_log_laplace = |x: &[f64]| -> f64 {
        let dot = |f: &[f64]| f.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / alpha;
        let mut max = f64::NEG_INFINITY;
        for f in &fvecs {
            max = max.max(dot(f));
        }
        let mut sum = 0.0;
        for f in &fvecs {
            sum += (dot(f) - max).exp();
        }
        alpha * (max + sum.ln())
    };

    let scaled_integral = match dim {
        1 => quadrature::integrate_line(
            &|x: f64| (m[0] * x - scaled_log_laplace(&[x])).exp(),
            1e-11,
        )?,
        2 => quadrature::integrate_plane(
            &|x: f64, y: f64| (m[0] * x + m[1] * y - scaled_log_laplace(&[x, y])).exp(),
            1e-10,
        )?,
        _ => unreachable!("dimension bound checked above"),
    };
    if !scaled_integral.is_finite() || scaled_integral <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "scaled integral evaluated to {scaled_integral}"
        )));
    }
    Ok(LogNormalizer {
        log_value: scaled_integral.ln() - dim as f64 * alpha.ln(),
        m: m.to_vec(),
        alpha,
        method: NormalizerMethod::Quadrature,
        gamma_factors: Vec::new(),
    })
}

/// Report of the small-`alpha` limit probe for a normalizer evaluator.
#[derive(Clone, Debug)]
pub struct LimitReport {
    pub alphas: Vec<f64>,
    /// `alpha^n I(m, alpha)` along the grid.
    pub scaled_values: Vec<f64>,
    /// Scaled value at the smallest `alpha`, divided by the reference.
    pub ratio_at_smallest: f64,
    /// Fitted slope of `log I` against `log alpha`; the limit law predicts
    /// `-n`.
    pub fitted_slope: f64,
}

/// Probe the limit `alpha^n I(m, alpha) -> J_C(m)` along a grid of `alpha`
/// values, given any evaluator of `log I`.
pub fn limit_check_alpha_to_zero(
    n: usize,
    jc_value: f64,
    alphas: &[f64],
    log_i: impl Fn(f64) -> Result<f64>,
) -> Result<LimitReport> {
    assert!(alphas.len() >= 2, "need at least two grid points");
    let mut log_is = Vec::with_capacity(alphas.len());
    for &a in alphas {
        log_is.push(log_i(a)?);
    }
    let scaled_values: Vec<f64> = alphas
        .iter()
        .zip(&log_is)
        .map(|(&a, &li)| (li + n as f64 * a.ln()).exp())
        .collect();
    let smallest = alphas
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("nonempty grid");
    let log_alphas: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let (fitted_slope, _) = fit_line(&log_alphas, &log_is);
    Ok(LimitReport {
        alphas: alphas.to_vec(),
        scaled_values: scaled_values.clone(),
        ratio_at_smallest: scaled_values[smallest] / jc_value,
        fitted_slope,
    })
}
