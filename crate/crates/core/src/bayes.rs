//! Bayes factors between hierarchical models under the conjugate prior,
//! their vanishing-precision asymptotics through face dimensions of the
//! marginal polytopes, the effective-degrees-of-freedom shortcut for
//! decomposable pairs, and model ranking.

use num::BigRational;

use crate::error::{Error, Result};
use crate::model::{ContingencyTable, Model, VarSet};
use crate::normalizers::{
    junction_structure, log_i_decomposable, log_i_posterior, log_i_quadrature,
    DecomposableStructure, MAX_QUADRATURE_DIM,
};
use crate::polytope::{build_polytope, complete_facets, face_of_point};
use crate::rational::{q_int, q_to_f64};

/// Two models on the same variables, compared by their Bayes factor.
#[derive(Clone, Copy)]
pub struct ModelPair<'a> {
    pub model1: &'a Model,
    pub model2: &'a Model,
}

impl<'a> ModelPair<'a> {
    pub fn new(model1: &'a Model, model2: &'a Model) -> Result<ModelPair<'a>> {
        if model1.gc().variables() != model2.gc().variables() {
            return Err(Error::InvalidModel(
                "the two models must share the same variables and cardinalities".into(),
            ));
        }
        Ok(ModelPair { model1, model2 })
    }

    pub fn swap(self) -> ModelPair<'a> {
        ModelPair {
            model1: self.model2,
            model2: self.model1,
        }
    }
}

/// Default hyperparameter: the marginal vector of the fictive table with
/// every cell set to `1 / |I|`, which is strictly interior. Coordinate `j`
/// is one over the marginal table size of the support of `j`.
pub fn default_hyperparameter(model: &Model) -> Vec<BigRational> {
    model
        .index_set()
        .iter()
        .map(|j| {
            let cells = model.gc().marginal_cell_count(j.support()) as i64;
            q_int(1) / q_int(cells)
        })
        .collect()
}

pub fn default_hyperparameter_f64(model: &Model) -> Vec<f64> {
    default_hyperparameter(model).iter().map(q_to_f64).collect()
}

/// Log marginal-likelihood score of one model at prior precision `alpha`:
/// the log of the posterior over prior normalizing-constant ratio, with the
/// default hyperparameter. The Bayes factor between two models is the
/// difference of their scores.
///
/// Decomposable models use the exact gamma closed form; otherwise the
/// quadrature route applies up to dimension two.
pub fn model_log_score(model: &Model, table: &ContingencyTable, alpha: f64) -> Result<f64> {
    let m = default_hyperparameter_f64(model);
    match junction_structure(model) {
        Ok(ds) => {
            let prior = log_i_decomposable(model, &ds, &m, alpha)?;
            let post = log_i_posterior(model, &ds, &m, alpha, table)?;
            Ok(post.log_value - prior.log_value)
        }
        Err(_) if model.dim() <= MAX_QUADRATURE_DIM => {
            let n = table.total() as f64;
            let t = model.marginal_counts(table);
            let shifted: Vec<f64> = m
                .iter()
                .zip(&t)
                .map(|(mj, &tj)| (alpha * mj + tj as f64) / (alpha + n))
                .collect();
            let prior = log_i_quadrature(model, &m, alpha)?;
            let post = log_i_quadrature(model, &shifted, alpha + n)?;
            Ok(post.log_value - prior.log_value)
        }
        Err(_) => Err(Error::NonComputable(
            "model is neither decomposable nor within the quadrature dimension bound".into(),
        )),
    }
}

/// Log Bayes factor of model 1 against model 2 at prior precision `alpha`.
/// Antisymmetric by construction: swapping the pair negates the value.
pub fn log_bayes_factor(pair: ModelPair<'_>, table: &ContingencyTable, alpha: f64) -> Result<f64> {
    Ok(model_log_score(pair.model1, table, alpha)? - model_log_score(pair.model2, table, alpha)?)
}

/// Which model the Bayes factor favours as the prior precision vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    FavorsModel1,
    FavorsModel2,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FavorsModel1 => "favors_model1",
            Verdict::FavorsModel2 => "favors_model2",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// Face dimensions of the data in both polytopes and the resulting
/// asymptotic exponent of the Bayes factor.
#[derive(Clone, Debug)]
pub struct ExponentReport {
    pub k1: usize,
    pub k2: usize,
    pub exponent: i64,
    pub verdict: Verdict,
}

/// Face dimension of the data mean vector in the marginal polytope of one
/// model, through the best available complete facet catalogue.
pub fn face_dimension(model: &Model, table: &ContingencyTable) -> Result<usize> {
    let facets = complete_facets(model)?;
    let poly = build_polytope(model)?.with_facets(facets);
    let y = model.mean_vector(table);
    Ok(face_of_point(&poly, &y)?.dimension)
}

/// The asymptotic exponent `k1 - k2`: the Bayes factor behaves like that
/// power of the prior precision, so a positive exponent favours model 2 in
/// the vanishing-precision limit and a negative one favours model 1.
pub fn asymptotic_exponent(pair: ModelPair<'_>, table: &ContingencyTable) -> Result<ExponentReport> {
    let k1 = face_dimension(pair.model1, table)?;
    let k2 = face_dimension(pair.model2, table)?;
    let exponent = k1 as i64 - k2 as i64;
    let verdict = match exponent.cmp(&0) {
        std::cmp::Ordering::Greater => Verdict::FavorsModel2,
        std::cmp::Ordering::Less => Verdict::FavorsModel1,
        std::cmp::Ordering::Equal => Verdict::Indeterminate,
    };
    Ok(ExponentReport {
        k1,
        k2,
        exponent,
        verdict,
    })
}

/// Zero-pattern index of a decomposable model on a table: the number of
/// nonzero clique margins minus the multiplicity-weighted number of nonzero
/// separator margins. Empirically equal to the face dimension plus one.
pub fn edf_index(ds: &DecomposableStructure, table: &ContingencyTable) -> i64 {
    let nonzero = |s: VarSet| -> i64 {
        if s.is_empty() {
            // The empty margin is the total count, always positive.
            1
        } else {
            table.margin(s).len() as i64
        }
    };
    let cliques: i64 = ds.cliques.iter().map(|&c| nonzero(c)).sum();
    let seps: i64 = ds
        .separators
        .iter()
        .map(|&(s, nu)| nu as i64 * nonzero(s))
        .sum();
    cliques - seps
}

/// Effective degrees of freedom of a decomposable pair.
#[derive(Clone, Debug)]
pub struct EdfReport {
    pub edf_index1: i64,
    pub edf_index2: i64,
    pub d_edf: i64,
}

/// The difference of the two zero-pattern indices. For decomposable pairs
/// this equals the asymptotic exponent `k1 - k2` and predicts the Bayes
/// factor without any face computation.
pub fn d_edf(pair: ModelPair<'_>, table: &ContingencyTable) -> Result<EdfReport> {
    let ds1 = junction_structure(pair.model1)?;
    let ds2 = junction_structure(pair.model2)?;
    let edf_index1 = edf_index(&ds1, table);
    let edf_index2 = edf_index(&ds2, table);
    Ok(EdfReport {
        edf_index1,
        edf_index2,
        d_edf: edf_index1 - edf_index2,
    })
}

/// Full pairwise comparison report.
#[derive(Clone, Debug)]
pub struct BayesReport {
    /// Log Bayes factor at the requested precision, when one was given and
    /// computable.
    pub log_b: Option<f64>,
    pub alpha: Option<f64>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub exponent: Option<i64>,
    pub d_edf: Option<i64>,
    pub verdict: Option<Verdict>,
}

/// Compare two models: the asymptotic exponent whenever complete facet
/// catalogues exist, the effective degrees of freedom when both models are
/// decomposable, and the Bayes factor itself when `alpha` is supplied.
pub fn compare(
    pair: ModelPair<'_>,
    table: &ContingencyTable,
    alpha: Option<f64>,
) -> Result<BayesReport> {
    let exponent = asymptotic_exponent(pair, table).ok();
    let edf = d_edf(pair, table).ok();
    let log_b = match alpha {
        Some(a) => Some(log_bayes_factor(pair, table, a)?),
        None => None,
    };
    if log_b.is_none() && exponent.is_none() {
        return Err(Error::NonComputable(
            "neither the asymptotic route nor a finite-precision Bayes factor is available".into(),
        ));
    }
    Ok(BayesReport {
        log_b,
        alpha,
        k1: exponent.as_ref().map(|e| e.k1),
        k2: exponent.as_ref().map(|e| e.k2),
        exponent: exponent.as_ref().map(|e| e.exponent),
        d_edf: edf.map(|e| e.d_edf),
        verdict: exponent.map(|e| e.verdict),
    })
}

/// Ranking mode: order by face dimension in the vanishing-precision limit,
/// or by posterior score at a fixed precision.
#[derive(Clone, Copy, Debug)]
pub enum RankMode {
    Asymptotic,
    AtAlpha(f64),
}

/// One entry of a model ranking.
#[derive(Clone, Debug)]
pub struct RankEntry {
    pub name: String,
    pub dim: usize,
    /// Face dimension of the data in this model's polytope.
    pub k: Option<usize>,
    /// Log score at the requested precision.
    pub score: Option<f64>,
    pub edf_index: Option<i64>,
    pub error: Option<String>,
}

/// Rank models against a table. Per-model failures are recorded in the
/// entry rather than aborting the ranking; failed entries sort last.
///
/// Asymptotic mode orders by face dimension ascending (the limit favours
/// the smallest face); ties are visible as equal `k` and are indeterminate
/// at this order. Fixed-precision mode orders by score descending.
pub fn rank_models(
    models: &[(String, Model)],
    table: &ContingencyTable,
    mode: RankMode,
) -> Result<Vec<RankEntry>> {
    if models.is_empty() {
        return Err(Error::InvalidModel("no models to rank".into()));
    }
    for (name, model) in models {
        if model.gc().variables() != models[0].1.gc().variables() {
            return Err(Error::InvalidModel(format!(
                "model {name:?} is not on the same variables as {:?}",
                models[0].0
            )));
        }
    }
    let mut entries: Vec<RankEntry> = models
        .iter()
        .map(|(name, model)| {
            let edf = junction_structure(model)
                .ok()
                .map(|ds| edf_index(&ds, table));
            let (k, score, error) = match mode {
                RankMode::Asymptotic => match face_dimension(model, table) {
                    Ok(k) => (Some(k), None, None),
                    Err(e) => (None, None, Some(e.to_string())),
                },
                RankMode::AtAlpha(alpha) => match model_log_score(model, table, alpha) {
                    Ok(s) => (None, Some(s), None),
                    Err(e) => (None, None, Some(e.to_string())),
                },
            };
            RankEntry {
                name: name.clone(),
                dim: model.dim(),
                k,
                score,
                edf_index: edf,
                error,
            }
        })
        .collect();
    entries.sort_by(|a, b| match mode {
        RankMode::Asymptotic => {
            let ka = a.k.map(|k| k as i64).unwrap_or(i64::MAX);
            let kb = b.k.map(|k| k as i64).unwrap_or(i64::MAX);
            ka.cmp(&kb)
                .then(a.dim.cmp(&b.dim))
                .then(a.name.cmp(&b.name))
        }
        RankMode::AtAlpha(_) => {
            let sa = a.score.unwrap_or(f64::NEG_INFINITY);
            let sb = b.score.unwrap_or(f64::NEG_INFINITY);
            sb.total_cmp(&sa).then(a.name.cmp(&b.name))
        }
    });
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cell, GeneratingClass};
    use crate::numerics::fit_line;
    use approx::assert_relative_eq;

    fn model(vars: &[(&str, u32)], gens: &[&[&str]]) -> Model {
        Model::new(GeneratingClass::from_names(vars, gens).unwrap())
    }

    fn binary3() -> [(&'static str, u32); 3] {
        [("a", 2), ("b", 2), ("c", 2)]
    }

    fn saturated3() -> Model {
        model(&binary3(), &[&["a", "b", "c"]])
    }

    fn chain3() -> Model {
        model(&binary3(), &[&["a", "b"], &["b", "c"]])
    }

    fn table_from_cells(m: &Model, nonzero: &[[u32; 3]]) -> ContingencyTable {
        ContingencyTable::new(
            m.gc(),
            nonzero.iter().map(|levels| (Cell(levels.to_vec()), 1)),
        )
        .unwrap()
    }

    fn all_positive_table(m: &Model) -> ContingencyTable {
        ContingencyTable::new(m.gc(), m.cells().into_iter().map(|c| (c, 1))).unwrap()
    }

    #[test]
    fn default_hyperparameter_is_the_uniform_margin() {
        let m = chain3();
        let h = default_hyperparameter(&m);
        use crate::rational::q;
        assert_eq!(h, vec![q(1, 2), q(1, 2), q(1, 2), q(1, 4), q(1, 4)]);
        let single = model(&[("a", 2)], &[&["a"]]);
        assert_eq!(default_hyperparameter(&single), vec![q(1, 2)]);
        let ternary = model(&[("a", 3)], &[&["a"]]);
        assert_eq!(default_hyperparameter(&ternary), vec![q(1, 3), q(1, 3)]);
    }

    #[test]
    fn bayes_factor_is_antisymmetric_and_zero_on_identical_models() {
        let m1 = saturated3();
        let m2 = chain3();
        let table = all_positive_table(&m1);
        let pair = ModelPair::new(&m1, &m2).unwrap();
        let fwd = log_bayes_factor(pair, &table, 0.1).unwrap();
        let bwd = log_bayes_factor(pair.swap(), &table, 0.1).unwrap();
        assert_relative_eq!(fwd, -bwd, max_relative = 1e-12);
        let same = ModelPair::new(&m1, &m1).unwrap();
        assert_eq!(log_bayes_factor(same, &table, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn interior_slope_is_the_dimension_gap() {
        // All-positive table: slope of log B in log alpha tends to
        // |J1| - |J2| = 7 - 5 = 2.
        let m1 = saturated3();
        let m2 = chain3();
        let table = all_positive_table(&m1);
        let pair = ModelPair::new(&m1, &m2).unwrap();
        let alphas: Vec<f64> = (0..7).map(|k| 1e-6 * 10f64.powf(k as f64 / 2.0)).collect();
        let logs: Vec<f64> = alphas
            .iter()
            .map(|&a| log_bayes_factor(pair, &table, a).unwrap())
            .collect();
        let lnas: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
        let (slope, _) = fit_line(&lnas, &logs);
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn exponent_on_faces_and_the_xor_pattern() {
        let m1 = saturated3();
        let m2 = chain3();
        let pair = ModelPair::new(&m1, &m2).unwrap();

        // All positive: interior in both models.
        let table = all_positive_table(&m1);
        let rep = asymptotic_exponent(pair, &table).unwrap();
        assert_eq!((rep.k1, rep.k2), (7, 5));
        assert_eq!(rep.exponent, 2);
        assert_eq!(rep.verdict, Verdict::FavorsModel2);

        // Single nonzero cell: a shared vertex, exponent zero.
        let point = table_from_cells(&m1, &[[1, 0, 1]]);
        let rep = asymptotic_exponent(pair, &point).unwrap();
        assert_eq!((rep.k1, rep.k2), (0, 0));
        assert_eq!(rep.verdict, Verdict::Indeterminate);

        // Even-parity cells: every pair margin positive, so the data is
        // interior for the chain but on a 3-face of the simplex; the
        // denser model is favoured.
        let xor = table_from_cells(&m1, &[[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]]);
        let rep = asymptotic_exponent(pair, &xor).unwrap();
        assert_eq!((rep.k1, rep.k2), (3, 5));
        assert_eq!(rep.exponent, -2);
        assert_eq!(rep.verdict, Verdict::FavorsModel1);
    }

    #[test]
    fn edf_matches_the_counting_example() {
        let m1 = saturated3();
        let m2 = chain3();
        let pair = ModelPair::new(&m1, &m2).unwrap();
        let table = all_positive_table(&m1);
        let rep = d_edf(pair, &table).unwrap();
        // 8 cells, and 4 + 4 - 2 for the chain.
        assert_eq!(rep.edf_index1, 8);
        assert_eq!(rep.edf_index2, 6);
        assert_eq!(rep.d_edf, 2);
        let same = d_edf(ModelPair::new(&m1, &m1).unwrap(), &table).unwrap();
        assert_eq!(same.d_edf, 0);
    }

    #[test]
    fn edf_equals_exponent_with_a_redundant_zero_slice() {
        // Zero out the whole b = 0 slice: the b-margin correction keeps the
        // count consistent with the face dimensions.
        let m1 = saturated3();
        let m2 = chain3();
        let pair = ModelPair::new(&m1, &m2).unwrap();
        let table = table_from_cells(&m1, &[[0, 1, 0], [0, 1, 1], [1, 1, 0], [1, 1, 1]]);
        let edf = d_edf(pair, &table).unwrap();
        let exp = asymptotic_exponent(pair, &table).unwrap();
        assert_eq!(edf.d_edf, exp.exponent);
        // Per-model index equals face dimension plus one.
        assert_eq!(edf.edf_index1, exp.k1 as i64 + 1);
        assert_eq!(edf.edf_index2, exp.k2 as i64 + 1);
    }

    #[test]
    fn exponent_additivity_over_a_triple() {
        let m1 = saturated3();
        let m2 = chain3();
        let m3 = model(&binary3(), &[&["a"], &["b"], &["c"]]);
        let table = table_from_cells(&m1, &[[0, 0, 0], [1, 1, 0], [0, 1, 1]]);
        let e12 = asymptotic_exponent(ModelPair::new(&m1, &m2).unwrap(), &table)
            .unwrap()
            .exponent;
        let e23 = asymptotic_exponent(ModelPair::new(&m2, &m3).unwrap(), &table)
            .unwrap()
            .exponent;
        let e13 = asymptotic_exponent(ModelPair::new(&m1, &m3).unwrap(), &table)
            .unwrap()
            .exponent;
        assert_eq!(e13, e12 + e23);
    }

    #[test]
    fn ranking_orders_by_dimension_on_positive_tables() {
        let models = vec![
            ("saturated".to_string(), saturated3()),
            ("chain".to_string(), chain3()),
            (
                "independence".to_string(),
                model(&binary3(), &[&["a"], &["b"], &["c"]]),
            ),
        ];
        let table = all_positive_table(&models[0].1);
        let ranked = rank_models(&models, &table, RankMode::Asymptotic).unwrap();
        let names: Vec<&str> = ranked.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, vec!["independence", "chain", "saturated"]);
        assert_eq!(ranked[0].k, Some(3));

        // Single-cell table: everything ties at k = 0.
        let point = table_from_cells(&models[0].1, &[[1, 1, 1]]);
        let ranked = rank_models(&models, &point, RankMode::Asymptotic).unwrap();
        assert!(ranked.iter().all(|e| e.k == Some(0)));
    }

    #[test]
    fn ranking_at_fixed_alpha_agrees_with_pairwise_factors() {
        let models = vec![
            ("saturated".to_string(), saturated3()),
            ("chain".to_string(), chain3()),
        ];
        let table = all_positive_table(&models[0].1);
        let ranked = rank_models(&models, &table, RankMode::AtAlpha(0.2)).unwrap();
        let score: std::collections::HashMap<&str, f64> = ranked
            .iter()
            .map(|e| (e.name.as_str(), e.score.unwrap()))
            .collect();
        let pair = ModelPair::new(&models[0].1, &models[1].1).unwrap();
        let lb = log_bayes_factor(pair, &table, 0.2).unwrap();
        assert_relative_eq!(
            score["saturated"] - score["chain"],
            lb,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pair_requires_matching_variables() {
        let m1 = saturated3();
        let m2 = model(&[("a", 2), ("b", 2)], &[&["a", "b"]]);
        assert!(ModelPair::new(&m1, &m2).is_err());
        let m3 = model(&[("a", 3), ("b", 2), ("c", 2)], &[&["a", "b", "c"]]);
        assert!(ModelPair::new(&m1, &m3).is_err());
    }
}
