//! Generating-class algebra for hierarchical loglinear models: cells, the
//! index set `J` of nonbaseline marginal cells, the containment relation
//! between marginal cells and full cells, the 0/1 vectors spanning the
//! marginal polytope, marginal counts, and the baseline-constrained
//! loglinear parametrization with its inversion.
//!
//! Every operation here is a pure function of immutable inputs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::BigRational;

use crate::error::{Error, Result};
use crate::numerics::logsumexp;
use crate::rational::q_int;

/// Dense cell enumeration is allowed up to this many cells.
pub const MAX_DENSE_CELLS: usize = 1 << 22;

/// A set of variables, stored as a bitmask over variable positions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(u32);

impl VarSet {
    /// The empty set.
    pub const EMPTY: VarSet = VarSet(0);

    /// Set containing the given variable positions.
    pub fn from_indices(indices: &[usize]) -> VarSet {
        let mut bits = 0u32;
        for &i in indices {
            assert!(i < 32, "variable index out of range");
            bits |= 1 << i;
        }
        VarSet(bits)
    }

    pub fn contains(self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < 32, "variable index out of range");
        self.0 |= 1 << v;
    }

    /// Variable positions in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    /// All nonempty subsets.
    pub fn nonempty_subsets(self) -> Vec<VarSet> {
        let idx = self.indices();
        let mut out = Vec::with_capacity((1usize << idx.len()) - 1);
        for mask in 1..(1u32 << idx.len()) {
            let mut s = VarSet::EMPTY;
            for (pos, &v) in idx.iter().enumerate() {
                if mask >> pos & 1 == 1 {
                    s.insert(v);
                }
            }
            out.push(s);
        }
        out
    }

    /// Canonical ordering: by size, then lexicographically on the sorted
    /// index list. This is the order used for the closure and for `J`.
    pub fn canonical_cmp(self, other: VarSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VarSet{:?}", self.indices())
    }
}

/// A classification criterion: a name and the number of levels it can take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub card: u32,
}

/// The downward-closed family of interaction sets defining a hierarchical
/// model, together with the variables it lives on.
///
/// `generators` holds the maximal sets of the family; `closure` holds every
/// nonempty subset of a generator, in canonical order.
#[derive(Clone, Debug)]
pub struct GeneratingClass {
    variables: Vec<Variable>,
    generators: Vec<VarSet>,
    closure: Vec<VarSet>,
}

impl GeneratingClass {
    /// Build a generating class. Duplicate and dominated generators are
    /// dropped (the family keeps only maximal sets); the caller can compare
    /// `generators()` with its input to report what was dropped.
    pub fn new(variables: Vec<Variable>, raw_generators: Vec<VarSet>) -> Result<GeneratingClass> {
        if variables.is_empty() {
            return Err(Error::InvalidModel("no variables".into()));
        }
        if variables.len() > 22 {
            return Err(Error::InvalidModel(format!(
                "{} variables exceed the supported maximum of 22",
                variables.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &variables {
            if v.card < 2 {
                return Err(Error::InvalidModel(format!(
                    "variable {:?} has cardinality {} < 2",
                    v.name, v.card
                )));
            }
            if !seen.insert(v.name.clone()) {
                return Err(Error::InvalidModel(format!(
                    "duplicate variable name {:?}",
                    v.name
                )));
            }
        }
        let mut cells: usize = 1;
        for v in &variables {
            cells = cells
                .checked_mul(v.card as usize)
                .filter(|&c| c <= MAX_DENSE_CELLS)
                .ok_or_else(|| Error::InvalidModel("cell set exceeds 2^22".into()))?;
        }

        let full: VarSet = VarSet::from_indices(&(0..variables.len()).collect::<Vec<_>>());
        let mut gens: Vec<VarSet> = Vec::new();
        for &g in &raw_generators {
            if g.is_empty() {
                return Err(Error::InvalidModel("empty generator".into()));
            }
            if !g.is_subset_of(full) {
                return Err(Error::InvalidModel("generator names unknown variable".into()));
            }
            if gens.iter().any(|&h| g.is_subset_of(h)) {
                continue;
            }
            gens.retain(|&h| !h.is_subset_of(g));
            gens.push(g);
        }
        if gens.is_empty() {
            return Err(Error::InvalidModel("no generators".into()));
        }
        let covered = gens.iter().fold(VarSet::EMPTY, |acc, &g| acc.union(g));
        if covered != full {
            return Err(Error::InvalidModel(
                "generators do not cover every variable".into(),
            ));
        }
        gens.sort_by(|a, b| a.canonical_cmp(*b));

        let mut closure: Vec<VarSet> = gens
            .iter()
            .flat_map(|g| g.nonempty_subsets())
            .collect();
        closure.sort_by(|a, b| a.canonical_cmp(*b));
        closure.dedup();

        Ok(GeneratingClass {
            variables,
            generators: gens,
            closure,
        })
    }

    /// Convenience constructor from names, mainly for tests:
    /// `GeneratingClass::from_names(&[("a", 2), ("b", 2)], &[&["a", "b"]])`.
    pub fn from_names(vars: &[(&str, u32)], gens: &[&[&str]]) -> Result<GeneratingClass> {
        let variables: Vec<Variable> = vars
            .iter()
            .map(|(n, c)| Variable {
                name: (*n).to_string(),
                card: *c,
            })
            .collect();
        let lookup: HashMap<&str, usize> =
            vars.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();
        let mut sets = Vec::new();
        for g in gens {
            let mut s = VarSet::EMPTY;
            for name in *g {
                let &i = lookup
                    .get(name)
                    .ok_or_else(|| Error::InvalidModel(format!("unknown variable {name:?}")))?;
                s.insert(i);
            }
            sets.push(s);
        }
        GeneratingClass::new(variables, sets)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn card(&self, v: usize) -> u32 {
        self.variables[v].card
    }

    /// Number of full cells `|I|`.
    pub fn cell_count(&self) -> usize {
        self.variables.iter().map(|v| v.card as usize).product()
    }

    /// The maximal sets of the family.
    pub fn generators(&self) -> &[VarSet] {
        &self.generators
    }

    /// The induced downward-closed family, in canonical order.
    pub fn closure(&self) -> &[VarSet] {
        &self.closure
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Render a variable set using variable names, e.g. `{a,b}`.
    pub fn set_name(&self, s: VarSet) -> String {
        let names: Vec<&str> = s
            .indices()
            .iter()
            .map(|&i| self.variables[i].name.as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// Number of cells of the marginal table on `s`.
    pub fn marginal_cell_count(&self, s: VarSet) -> usize {
        s.indices().iter().map(|&v| self.card(v) as usize).product()
    }
}

/// A full cell: one level per variable, level 0 being the baseline.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub Vec<u32>);

impl Cell {
    /// Variables at a nonbaseline level.
    pub fn support(&self) -> VarSet {
        let mut s = VarSet::EMPTY;
        for (v, &lvl) in self.0.iter().enumerate() {
            if lvl != 0 {
                s.insert(v);
            }
        }
        s
    }

    pub fn level(&self, v: usize) -> u32 {
        self.0[v]
    }

    /// The all-baseline cell.
    pub fn baseline(var_count: usize) -> Cell {
        Cell(vec![0; var_count])
    }

    /// Levels restricted to `s`, in increasing variable order.
    pub fn restrict(&self, s: VarSet) -> Vec<u32> {
        s.indices().iter().map(|&v| self.0[v]).collect()
    }
}

impl fmt::Debug for Cell {
    /// Concatenated level digits when every level is below 10 (the label
    /// format used throughout the file interfaces), dotted otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&l| l < 10) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// An element of `J`: a cell whose support lies in the generating class,
/// indexing one loglinear interaction term.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MarginalIndex {
    cell: Cell,
    support: VarSet,
}

impl MarginalIndex {
    pub fn support(&self) -> VarSet {
        self.support
    }

    /// The underlying cell (levels are zero off the support).
    pub fn as_cell(&self) -> &Cell {
        &self.cell
    }

    pub fn level(&self, v: usize) -> u32 {
        self.cell.level(v)
    }
}

impl fmt::Debug for MarginalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.cell)
    }
}

/// `j` is dominated by `i`: the support of `j` is contained in the support
/// of `i` and the two agree on it. This is the relation that decides which
/// interaction terms contribute to a cell.
pub fn triangle(j: &MarginalIndex, i: &Cell) -> bool {
    j.support
        .indices()
        .iter()
        .all(|&v| i.level(v) == j.level(v))
}

/// The ordered index set `J` of a model: every cell with support in the
/// closure, ordered by (support size, support, levels).
#[derive(Clone, Debug)]
pub struct IndexSet {
    items: Vec<MarginalIndex>,
    position: HashMap<Cell, usize>,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MarginalIndex> {
        self.items.iter()
    }

    pub fn get(&self, k: usize) -> &MarginalIndex {
        &self.items[k]
    }

    /// Position of a marginal cell in the canonical order.
    pub fn position(&self, cell: &Cell) -> Option<usize> {
        self.position.get(cell).copied()
    }
}

/// Enumerate `J` for a generating class, in the canonical deterministic
/// order. Its length equals the sum over the closure of the products of
/// `card - 1`.
pub fn build_index_set(gc: &GeneratingClass) -> IndexSet {
    let mut items = Vec::new();
    for &s in gc.closure() {
        let vars = s.indices();
        // Odometer over the nonzero levels of the support, first variable
        // most significant.
        let mut levels: Vec<u32> = vec![1; vars.len()];
        loop {
            let mut cell = Cell::baseline(gc.var_count());
            for (pos, &v) in vars.iter().enumerate() {
                cell.0[v] = levels[pos];
            }
            items.push(MarginalIndex { cell, support: s });
            let mut pos = vars.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if levels[pos] + 1 < gc.card(vars[pos]) {
                    levels[pos] += 1;
                    for l in levels[pos + 1..].iter_mut() {
                        *l = 1;
                    }
                    break;
                }
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    let position = items
        .iter()
        .enumerate()
        .map(|(k, j)| (j.cell.clone(), k))
        .collect();
    IndexSet { items, position }
}

/// Nonnegative integer counts over the cells of a model; absent cells read
/// as zero. The total count must be at least one.
#[derive(Clone, Debug)]
pub struct ContingencyTable {
    counts: BTreeMap<Cell, u64>,
    total: u64,
}

impl ContingencyTable {
    /// Build a table, validating each cell against the model and summing
    /// duplicates. Zero counts are dropped.
    pub fn new(
        gc: &GeneratingClass,
        entries: impl IntoIterator<Item = (Cell, u64)>,
    ) -> Result<ContingencyTable> {
        let mut counts: BTreeMap<Cell, u64> = BTreeMap::new();
        let mut total: u64 = 0;
        for (cell, n) in entries {
            if cell.0.len() != gc.var_count() {
                return Err(Error::InvalidTable(format!(
                    "cell {cell:?} has {} levels, expected {}",
                    cell.0.len(),
                    gc.var_count()
                )));
            }
            for (v, &lvl) in cell.0.iter().enumerate() {
                if lvl >= gc.card(v) {
                    return Err(Error::InvalidTable(format!(
                        "cell {cell:?}: level {lvl} out of range for variable {:?}",
                        gc.variables()[v].name
                    )));
                }
            }
            if n == 0 {
                continue;
            }
            *counts.entry(cell).or_insert(0) += n;
            total += n;
        }
        if total == 0 {
            return Err(Error::InvalidTable("total count is zero".into()));
        }
        Ok(ContingencyTable { counts, total })
    }

    pub fn count(&self, cell: &Cell) -> u64 {
        self.counts.get(cell).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Nonzero entries in canonical cell order.
    pub fn entries(&self) -> impl Iterator<Item = (&Cell, u64)> {
        self.counts.iter().map(|(c, &n)| (c, n))
    }

    /// Marginal table on the variable set `s`: counts keyed by the levels of
    /// `s` in increasing variable order. Only nonzero margins appear.
    pub fn margin(&self, s: VarSet) -> BTreeMap<Vec<u32>, u64> {
        let mut out: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (cell, n) in self.entries() {
            *out.entry(cell.restrict(s)).or_insert(0) += n;
        }
        out
    }
}

/// Baseline-constrained loglinear parameter: one coordinate per element of
/// `J` plus the normalizing constant.
#[derive(Clone, Debug)]
pub struct LoglinearParam {
    pub theta: Vec<f64>,
    pub theta0: f64,
}

/// A hierarchical model: a generating class and its cached index set.
///
/// ```
/// use loglin_core::model::{GeneratingClass, Model};
///
/// let gc = GeneratingClass::from_names(
///     &[("a", 2), ("b", 2), ("c", 2)],
///     &[&["a", "b"], &["b", "c"]],
/// )
/// .unwrap();
/// let model = Model::new(gc);
/// assert_eq!(model.index_set().len(), 5);
/// assert_eq!(model.gc().cell_count(), 8);
/// ```
#[derive(Clone, Debug)]
pub struct Model {
    gc: GeneratingClass,
    index: IndexSet,
}

impl Model {
    pub fn new(gc: GeneratingClass) -> Model {
        let index = build_index_set(&gc);
        Model { gc, index }
    }

    pub fn gc(&self) -> &GeneratingClass {
        &self.gc
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index
    }

    /// The model dimension `|J|`.
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Validate raw levels as a cell of this model.
    pub fn cell(&self, levels: Vec<u32>) -> Result<Cell> {
        if levels.len() != self.gc.var_count() {
            return Err(Error::InvalidTable(format!(
                "expected {} levels, got {}",
                self.gc.var_count(),
                levels.len()
            )));
        }
        for (v, &lvl) in levels.iter().enumerate() {
            if lvl >= self.gc.card(v) {
                return Err(Error::InvalidTable(format!(
                    "level {lvl} out of range for variable {:?}",
                    self.gc.variables()[v].name
                )));
            }
        }
        Ok(Cell(levels))
    }

    /// All cells, last variable fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let n = self.gc.var_count();
        let total = self.gc.cell_count();
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0u32; n];
        loop {
            out.push(Cell(cur.clone()));
            let mut v = n;
            loop {
                if v == 0 {
                    return out;
                }
                v -= 1;
                if cur[v] + 1 < self.gc.card(v) {
                    cur[v] += 1;
                    for l in cur[v + 1..].iter_mut() {
                        *l = 0;
                    }
                    break;
                }
                cur[v] = 0;
                if v == 0 {
                    return out;
                }
            }
        }
    }

    /// Position of a cell in the `cells()` enumeration (mixed-radix index).
    pub fn cell_index(&self, cell: &Cell) -> usize {
        let mut idx = 0usize;
        for (v, &lvl) in cell.0.iter().enumerate() {
            idx = idx * self.gc.card(v) as usize + lvl as usize;
        }
        idx
    }

    /// The 0/1 vector whose coordinate at `j` is one exactly when `j` is
    /// dominated by `i`. The all-baseline cell maps to the zero vector.
    pub fn f_vector(&self, i: &Cell) -> Vec<bool> {
        self.index.iter().map(|j| triangle(j, i)).collect()
    }

    /// Marginal counts `t(j)`: for each `j` in `J`, the count of the
    /// marginal cell obtained by restricting to the support of `j`.
    /// Exactly the linear map sending the count vector to the sum of
    /// count-weighted f-vectors.
    pub fn marginal_counts(&self, table: &ContingencyTable) -> Vec<u64> {
        let mut t = vec![0u64; self.index.len()];
        for (cell, n) in table.entries() {
            for (k, j) in self.index.iter().enumerate() {
                if triangle(j, cell) {
                    t[k] += n;
                }
            }
        }
        t
    }

    /// Exact mean vector `t / N` of a table, a point of the marginal
    /// polytope by convexity.
    pub fn mean_vector(&self, table: &ContingencyTable) -> Vec<BigRational> {
        let n = q_int(table.total() as i64);
        self.marginal_counts(table)
            .into_iter()
            .map(|t| q_int(t as i64) / n.clone())
            .collect()
    }

    /// Log-probabilities from a loglinear parameter, in `cells()` order.
    ///
    /// When `theta0` is `None` the normalizing constant is computed by
    /// log-sum-exp so the output exponentiates to a probability vector.
    pub fn logp_from_theta(&self, theta: &[f64], theta0: Option<f64>) -> Vec<f64> {
        assert_eq!(theta.len(), self.index.len(), "theta length must equal |J|");
        let sums: Vec<f64> = self
            .cells()
            .iter()
            .map(|i| {
                self.index
                    .iter()
                    .zip(theta)
                    .filter(|(j, _)| triangle(j, i))
                    .map(|(_, &t)| t)
                    .sum()
            })
            .collect();
        let theta0 = theta0.unwrap_or_else(|| -logsumexp(&sums));
        sums.into_iter().map(|s| s + theta0).collect()
    }

    /// Invert the parametrization: recover `theta` from log-probabilities
    /// (given in `cells()` order) by signed inclusion-exclusion over the
    /// marginal cells below each `j`, baseline term included.
    ///
    /// Membership in the model is checked a posteriori: the parameter is
    /// mapped forward again and the reconstruction must agree with the
    /// input within `tol` in the max norm.
    pub fn theta_from_logp(&self, logp: &[f64], tol: f64) -> Result<LoglinearParam> {
        assert_eq!(
            logp.len(),
            self.gc.cell_count(),
            "logp length must equal |I|"
        );
        let theta0 = logp[self.cell_index(&Cell::baseline(self.gc.var_count()))];
        let theta: Vec<f64> = self
            .index
            .iter()
            .map(|j| {
                let s = j.support();
                let mut sum = 0.0;
                // Marginal cells below j are the restrictions of j to the
                // nonempty subsets of its support; the empty set is the
                // baseline cell.
                let sign0 = if s.len() % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign0 * theta0;
                for sub in s.nonempty_subsets() {
                    let mut cell = Cell::baseline(self.gc.var_count());
                    for v in sub.indices() {
                        cell.0[v] = j.level(v);
                    }
                    let sign = if (s.len() - sub.len()) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    sum += sign * logp[self.cell_index(&cell)];
                }
                sum
            })
            .collect();

        let rebuilt = self.logp_from_theta(&theta, Some(theta0));
        let residual = rebuilt
            .iter()
            .zip(logp)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual > tol {
            return Err(Error::NotInModel { residual, tol });
        }
        Ok(LoglinearParam { theta, theta0 })
    }

    /// Canonical text label of a marginal index (its cell digits).
    pub fn label(&self, k: usize) -> String {
        format!("{:?}", self.index.get(k).as_cell())
    }

    /// All labels in canonical order.
    pub fn labels(&self) -> Vec<String> {
        (0..self.index.len()).map(|k| self.label(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a3_binary() -> Model {
        Model::new(
            GeneratingClass::from_names(&[("a", 2), ("b", 2), ("c", 2)], &[&["a", "b"], &["b", "c"]])
                .unwrap(),
        )
    }

    /// Three-variable model with cardinalities 3, 3, 2 and generators
    /// {a,b}, {b,c}; its index set has 11 elements.
    fn ternary_chain() -> Model {
        Model::new(
            GeneratingClass::from_names(&[("a", 3), ("b", 3), ("c", 2)], &[&["a", "b"], &["b", "c"]])
                .unwrap(),
        )
    }

    #[test]
    fn index_set_sizes() {
        assert_eq!(ternary_chain().dim(), 11);
        assert_eq!(a3_binary().dim(), 5);
        let single = Model::new(GeneratingClass::from_names(&[("a", 2)], &[&["a"]]).unwrap());
        assert_eq!(single.dim(), 1);
    }

    #[test]
    fn index_set_counting_identity() {
        // |J| = sum over the closure of prod (card - 1), for several models.
        for model in [
            a3_binary(),
            ternary_chain(),
            Model::new(
                GeneratingClass::from_names(
                    &[("a", 2), ("b", 3), ("c", 2), ("d", 2)],
                    &[&["a", "b", "c"], &["c", "d"]],
                )
                .unwrap(),
            ),
        ] {
            let expected: usize = model
                .gc()
                .closure()
                .iter()
                .map(|s| {
                    s.indices()
                        .iter()
                        .map(|&v| (model.gc().card(v) - 1) as usize)
                        .product::<usize>()
                })
                .sum();
            assert_eq!(model.dim(), expected);
        }
    }

    #[test]
    fn ternary_chain_index_set_is_the_known_eleven() {
        let model = ternary_chain();
        let labels = model.labels();
        let expected = [
            "100", "200", "010", "020", "001", "110", "120", "210", "220", "011", "021",
        ];
        let mut got: Vec<&str> = labels.iter().map(String::as_str).collect();
        let mut want = expected.to_vec();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn triangle_examples_from_ternary_chain() {
        let model = ternary_chain();
        let below = |cell: Vec<u32>| -> Vec<String> {
            let i = Cell(cell);
            model
                .index_set()
                .iter()
                .filter(|j| triangle(j, &i))
                .map(|j| format!("{:?}", j.as_cell()))
                .collect()
        };
        let mut got = below(vec![2, 0, 1]);
        got.sort_unstable();
        assert_eq!(got, vec!["001", "200"]);
        let mut got = below(vec![2, 1, 1]);
        got.sort_unstable();
        assert_eq!(got, vec!["001", "010", "011", "200", "210"]);
        // Nothing lies below the all-baseline cell.
        assert!(below(vec![0, 0, 0]).is_empty());
    }

    #[test]
    fn f_vectors_in_binary_chain() {
        let model = a3_binary();
        assert_eq!(model.labels(), vec!["100", "010", "001", "110", "011"]);
        let f = |levels: Vec<u32>| model.f_vector(&Cell(levels));
        // f_{ab} = e_a + e_b + e_ab
        assert_eq!(f(vec![1, 1, 0]), vec![true, true, false, true, false]);
        // f_{ac} = e_a + e_c
        assert_eq!(f(vec![1, 0, 1]), vec![true, false, true, false, false]);
        assert_eq!(f(vec![0, 0, 0]), vec![false; 5]);
    }

    #[test]
    fn marginal_counts_of_uniform_and_point_mass() {
        let model = a3_binary();
        let uniform = ContingencyTable::new(
            model.gc(),
            model.cells().into_iter().map(|c| (c, 1)),
        )
        .unwrap();
        let t = model.marginal_counts(&uniform);
        for (k, j) in model.index_set().iter().enumerate() {
            let expected = if j.support().len() == 1 { 4 } else { 2 };
            assert_eq!(t[k], expected, "t({:?})", j);
        }

        let point =
            ContingencyTable::new(model.gc(), vec![(Cell(vec![1, 1, 1]), 7)]).unwrap();
        let t = model.marginal_counts(&point);
        assert!(t.iter().all(|&x| x == 7));
    }

    #[test]
    fn table_rejects_bad_cells_and_empty_totals() {
        let model = a3_binary();
        assert!(matches!(
            ContingencyTable::new(model.gc(), vec![(Cell(vec![2, 0, 0]), 1)]),
            Err(Error::InvalidTable(_))
        ));
        assert!(matches!(
            ContingencyTable::new(model.gc(), vec![(Cell(vec![0, 0, 0]), 0)]),
            Err(Error::InvalidTable(_))
        ));
        // Duplicate rows accumulate.
        let t = ContingencyTable::new(
            model.gc(),
            vec![(Cell(vec![1, 0, 0]), 2), (Cell(vec![1, 0, 0]), 3)],
        )
        .unwrap();
        assert_eq!(t.count(&Cell(vec![1, 0, 0])), 5);
        assert_eq!(t.total(), 5);
    }

    #[test]
    fn uniform_distribution_has_zero_theta() {
        let model = a3_binary();
        let logp = vec![-(8f64.ln()); 8];
        let param = model.theta_from_logp(&logp, 1e-9).unwrap();
        assert!((param.theta0 + 8f64.ln()).abs() < 1e-12);
        assert!(param.theta.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn single_binary_variable_theta_is_log_odds() {
        let model = Model::new(GeneratingClass::from_names(&[("a", 2)], &[&["a"]]).unwrap());
        let logp = vec![0.25f64.ln(), 0.75f64.ln()];
        let param = model.theta_from_logp(&logp, 1e-9).unwrap();
        assert!((param.theta[0] - 3f64.ln()).abs() < 1e-12);
        // And forward: theta_a = ln 3 gives p = (1/4, 3/4).
        let lp = model.logp_from_theta(&[3f64.ln()], None);
        assert!((lp[0].exp() - 0.25).abs() < 1e-12);
        assert!((lp[1].exp() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_theta_gives_uniform() {
        let model = ternary_chain();
        let lp = model.logp_from_theta(&vec![0.0; model.dim()], None);
        let n = model.gc().cell_count() as f64;
        for v in lp {
            assert!((v.exp() - 1.0 / n).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random_theta() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for model in [a3_binary(), ternary_chain()] {
            for _ in 0..20 {
                let theta: Vec<f64> =
                    (0..model.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let logp = model.logp_from_theta(&theta, None);
                let param = model.theta_from_logp(&logp, 1e-9).unwrap();
                for (a, b) in param.theta.iter().zip(&theta) {
                    assert!((a - b).abs() < 1e-12);
                }
                // Normalization.
                let total: f64 = logp.iter().map(|l| l.exp()).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_member_distribution_is_rejected() {
        // A distribution with three-way interaction is outside the chain model.
        let model = a3_binary();
        let mut logp = vec![-(8f64.ln()); 8];
        logp[model.cell_index(&Cell(vec![1, 1, 1]))] += 0.5;
        let err = model.theta_from_logp(&logp, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NotInModel { .. }));
    }

    #[test]
    fn generator_normalization() {
        // Dominated and duplicate generators are dropped.
        let gc = GeneratingClass::from_names(
            &[("a", 2), ("b", 2), ("c", 2)],
            &[&["a", "b"], &["a"], &["a", "b"], &["b", "c"]],
        )
        .unwrap();
        assert_eq!(gc.generators().len(), 2);
        assert!(GeneratingClass::from_names(&[("a", 1)], &[&["a"]]).is_err());
        assert!(GeneratingClass::from_names(&[("a", 2), ("b", 2)], &[&["a"]]).is_err());
    }
}
