//! The marginal polytope of a hierarchical model: vertex construction,
//! facet catalogues (the general affine-form family, its decomposable and
//! cycle specializations), an exact hull oracle that independently
//! enumerates all facets, and the face-of-a-point computation that yields
//! the face dimension driving the Bayes-factor asymptotics.

use std::collections::HashSet;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::{Cell, Model, VarSet};
use crate::normalizers::DecomposableStructure;
use crate::rational::{affine_rank, primitive_integer, q_int};

/// Default size bound for building the vertex list.
pub const MAX_POLYTOPE_CELLS: usize = 4096;
/// Default bounds for the exact hull oracle.
pub const MAX_HULL_DIM: usize = 12;
pub const MAX_HULL_VERTICES: usize = 64;

/// An affine form `constant + coeffs . m` over the coordinates indexed by
/// `J`, with a provenance label. Facet forms are nonnegative on the
/// polytope and vanish exactly on their facet.
#[derive(Clone, Debug)]
pub struct AffineForm {
    pub label: String,
    pub constant: BigRational,
    pub coeffs: Vec<BigRational>,
}

impl AffineForm {
    pub fn eval_q(&self, m: &[BigRational]) -> BigRational {
        let mut acc = self.constant.clone();
        for (c, x) in self.coeffs.iter().zip(m) {
            if !c.is_zero() {
                acc += c * x;
            }
        }
        acc
    }

    pub fn eval_f64(&self, m: &[f64]) -> f64 {
        let mut acc = crate::rational::q_to_f64(&self.constant);
        for (c, x) in self.coeffs.iter().zip(m) {
            acc += crate::rational::q_to_f64(c) * x;
        }
        acc
    }

    /// Value on a 0/1 vertex.
    pub fn eval_vertex(&self, f: &[bool]) -> BigRational {
        let mut acc = self.constant.clone();
        for (c, &on) in self.coeffs.iter().zip(f) {
            if on {
                acc += c;
            }
        }
        acc
    }

    /// Canonical primitive integer vector `[constant, coeffs...]`, the key
    /// used to compare facet lists from different routes.
    pub fn primitive(&self) -> Vec<BigInt> {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(self.constant.clone());
        v.extend(self.coeffs.iter().cloned());
        primitive_integer(&v)
    }
}

/// Where a facet list came from, and whether it is complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetProvenance {
    Theorem,
    Decomposable,
    Cycle,
    Hull,
}

impl FacetProvenance {
    pub fn as_str(self) -> &'static str {
        match self {
            FacetProvenance::Theorem => "theorem",
            FacetProvenance::Decomposable => "decomposable",
            FacetProvenance::Cycle => "cycle",
            FacetProvenance::Hull => "hull",
        }
    }
}

/// A facet catalogue. `complete` marks lists proven (or computed) to contain
/// every facet; only complete lists may be used for face computations.
#[derive(Clone, Debug)]
pub struct FacetList {
    pub forms: Vec<AffineForm>,
    pub provenance: FacetProvenance,
    pub complete: bool,
}

impl FacetList {
    /// Facet set keyed by primitive coefficient vectors.
    pub fn primitive_set(&self) -> std::collections::BTreeSet<Vec<BigInt>> {
        self.forms.iter().map(AffineForm::primitive).collect()
    }
}

/// The marginal polytope: the convex hull of the per-cell 0/1 vectors, with
/// an optional facet catalogue.
#[derive(Clone, Debug)]
pub struct MarginalPolytope {
    pub cells: Vec<Cell>,
    pub vertices: Vec<Vec<bool>>,
    pub dim: usize,
    pub facets: Option<FacetList>,
}

impl MarginalPolytope {
    pub fn vertex_q(&self, k: usize) -> Vec<BigRational> {
        self.vertices[k]
            .iter()
            .map(|&b| if b { q_int(1) } else { q_int(0) })
            .collect()
    }

    pub fn with_facets(mut self, facets: FacetList) -> MarginalPolytope {
        self.facets = Some(facets);
        self
    }
}

/// Build the polytope: one vertex per cell. The vertices are pairwise
/// distinct and span the full space, which is checked.
pub fn build_polytope(model: &Model) -> Result<MarginalPolytope> {
    build_polytope_with(model, MAX_POLYTOPE_CELLS)
}

pub fn build_polytope_with(model: &Model, max_cells: usize) -> Result<MarginalPolytope> {
    let n_cells = model.gc().cell_count();
    if n_cells > max_cells {
        return Err(Error::DimensionTooLarge {
            what: "polytope vertex list",
            value: n_cells,
            bound: max_cells,
        });
    }
    let cells = model.cells();
    let vertices: Vec<Vec<bool>> = cells.iter().map(|c| model.f_vector(c)).collect();
    let mut seen = HashSet::new();
    for v in &vertices {
        if !seen.insert(v.clone()) {
            return Err(Error::Geometry("duplicate vertex in marginal polytope".into()));
        }
    }
    let points: Vec<Vec<BigRational>> = vertices
        .iter()
        .map(|f| f.iter().map(|&b| if b { q_int(1) } else { q_int(0) }).collect())
        .collect();
    let dim = affine_rank(&points);
    if dim != model.dim() {
        return Err(Error::Geometry(format!(
            "marginal polytope has affine rank {dim}, expected {}",
            model.dim()
        )));
    }
    Ok(MarginalPolytope {
        cells,
        vertices,
        dim,
        facets: None,
    })
}

/// The affine forms attached to a subset `d` of variables: the constant form
/// first, then one linear form per marginal index supported inside `d`, in
/// canonical `J` order.
///
/// The constant form is `1 + sum over j inside d of (-1)^{|S(j)|} m_j`; the
/// form anchored at `j0` is `sum over j inside d dominated by j0 of
/// (-1)^{|S(j)| - |S(j0)|} m_j`.
pub fn forms_for_subset(model: &Model, d: VarSet) -> Vec<AffineForm> {
    let jset = model.index_set();
    let dim = jset.len();
    let inside: Vec<usize> = (0..dim)
        .filter(|&k| jset.get(k).support().is_subset_of(d))
        .collect();

    let mut out = Vec::with_capacity(inside.len() + 1);

    let mut coeffs = vec![BigRational::zero(); dim];
    for &k in &inside {
        let sz = jset.get(k).support().len();
        coeffs[k] = if sz.is_multiple_of(2) { q_int(1) } else { q_int(-1) };
    }
    out.push(AffineForm {
        label: format!("g(0,{})", model.gc().set_name(d)),
        constant: BigRational::one(),
        coeffs,
    });

    for &k0 in &inside {
        let j0 = jset.get(k0);
        let mut coeffs = vec![BigRational::zero(); dim];
        for &k in &inside {
            let j = jset.get(k);
            if crate::model::triangle(j0, j.as_cell()) {
                let diff = j.support().len() - j0.support().len();
                coeffs[k] = if diff.is_multiple_of(2) { q_int(1) } else { q_int(-1) };
            }
        }
        out.push(AffineForm {
            label: format!("g({:?},{})", j0.as_cell(), model.gc().set_name(d)),
            constant: BigRational::zero(),
            coeffs,
        });
    }
    out
}

/// The facet family common to every hierarchical model: all forms attached
/// to the maximal sets of the generating class. The count equals the sum
/// over maximal sets of the full marginal table sizes.
pub fn theorem_facets(model: &Model) -> Vec<AffineForm> {
    model
        .gc()
        .generators()
        .iter()
        .flat_map(|&a| forms_for_subset(model, a))
        .collect()
}

/// For a decomposable model the theorem family over the cliques is the
/// complete facet list. The junction structure is required as evidence of
/// decomposability.
pub fn decomposable_facets(model: &Model, ds: &DecomposableStructure) -> FacetList {
    debug_assert_eq!(
        ds.cliques.iter().cloned().collect::<HashSet<_>>(),
        model.gc().generators().iter().cloned().collect::<HashSet<_>>(),
    );
    FacetList {
        forms: theorem_facets(model),
        provenance: FacetProvenance::Decomposable,
        complete: true,
    }
}

/// Check that the model is the binary model of an n-cycle and return the
/// edge list (as variable pairs) in canonical order.
fn cycle_edges(model: &Model) -> Result<Vec<VarSet>> {
    let gc = model.gc();
    let n = gc.var_count();
    if n < 3 {
        return Err(Error::NotACycle("fewer than three variables".into()));
    }
    if gc.variables().iter().any(|v| v.card != 2) {
        return Err(Error::NotACycle("variables must all be binary".into()));
    }
    let edges = gc.generators();
    if edges.len() != n || edges.iter().any(|e| e.len() != 2) {
        return Err(Error::NotACycle(
            "generators must be exactly n two-element sets".into(),
        ));
    }
    let mut degree = vec![0usize; n];
    for e in edges {
        for v in e.indices() {
            degree[v] += 1;
        }
    }
    if degree.iter().any(|&d| d != 2) {
        return Err(Error::NotACycle("every variable must lie on two edges".into()));
    }
    // Degree-2 everywhere with n edges on n vertices is a disjoint union of
    // cycles; connectivity makes it a single one.
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for e in edges {
            if e.contains(v) {
                for w in e.indices() {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::NotACycle("edge graph is not connected".into()));
    }
    Ok(edges.to_vec())
}

/// Complete facet catalogue of a binary cycle model: the four theorem forms
/// per edge, plus one form per odd subset of the edge set.
///
/// The odd-subset form for `F` is the rearrangement of
/// `sum over (a,b) in F of (m_a + m_b - 2 m_ab) - (sum_v m_v - sum_e m_e)
///  <= (|F| - 1) / 2`
/// into a nonnegative affine form.
pub fn cycle_facets(model: &Model) -> Result<FacetList> {
    let edges = cycle_edges(model)?;
    let gc = model.gc();
    let jset = model.index_set();
    let dim = jset.len();

    let mut forms: Vec<AffineForm> = edges
        .iter()
        .flat_map(|&e| forms_for_subset(model, e))
        .collect();

    // Positions in J of each vertex coordinate and each edge coordinate.
    let vertex_pos: Vec<usize> = (0..dim)
        .filter(|&k| jset.get(k).support().len() == 1)
        .collect();
    let edge_pos: Vec<(usize, VarSet)> = (0..dim)
        .filter(|&k| jset.get(k).support().len() == 2)
        .map(|k| (k, jset.get(k).support()))
        .collect();
    debug_assert_eq!(vertex_pos.len(), gc.var_count());
    debug_assert_eq!(edge_pos.len(), edges.len());

    for mask in 1u32..(1 << edges.len()) {
        if mask.count_ones() % 2 == 0 {
            continue;
        }
        let subset: Vec<VarSet> = (0..edges.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| edges[i])
            .collect();
        let mut coeffs = vec![BigRational::zero(); dim];
        // + m_v, with -1 per incident selected edge.
        for &k in &vertex_pos {
            let v = jset.get(k).support().indices()[0];
            let incident = subset.iter().filter(|e| e.contains(v)).count() as i64;
            coeffs[k] = q_int(1 - incident);
        }
        // - m_e off the subset, + m_e on it.
        for &(k, e) in &edge_pos {
            coeffs[k] = if subset.contains(&e) { q_int(1) } else { q_int(-1) };
        }
        let constant = q_int((subset.len() as i64 - 1) / 2);
        let names: Vec<String> = subset.iter().map(|&e| gc.set_name(e)).collect();
        forms.push(AffineForm {
            label: format!("odd[{}]", names.join(",")),
            constant,
            coeffs,
        });
    }

    Ok(FacetList {
        forms,
        provenance: FacetProvenance::Cycle,
        complete: true,
    })
}

/// Exact facet enumeration of the polytope over the rationals, independent
/// of any structure theorem. Intended as the oracle that validates the
/// closed-form catalogues on models of moderate size.
pub fn hull_facets_oracle(poly: &MarginalPolytope) -> Result<FacetList> {
    hull_facets_oracle_with(poly, MAX_HULL_DIM, MAX_HULL_VERTICES)
}

pub fn hull_facets_oracle_with(
    poly: &MarginalPolytope,
    max_dim: usize,
    max_vertices: usize,
) -> Result<FacetList> {
    if poly.dim > max_dim {
        return Err(Error::DimensionTooLarge {
            what: "hull oracle dimension",
            value: poly.dim,
            bound: max_dim,
        });
    }
    if poly.vertices.len() > max_vertices {
        return Err(Error::DimensionTooLarge {
            what: "hull oracle vertex count",
            value: poly.vertices.len(),
            bound: max_vertices,
        });
    }
    let points: Vec<Vec<BigRational>> = (0..poly.vertices.len()).map(|k| poly.vertex_q(k)).collect();
    let facets = geometry::facet_enumeration(&points)?;
    let mut forms: Vec<AffineForm> = facets
        .into_iter()
        .map(|f| AffineForm {
            label: "hull".into(),
            constant: BigRational::from_integer(f.constant),
            coeffs: f.coeffs.into_iter().map(BigRational::from_integer).collect(),
        })
        .collect();
    forms.sort_by_key(AffineForm::primitive);
    for (i, f) in forms.iter_mut().enumerate() {
        f.label = format!("hull#{i}");
    }
    Ok(FacetList {
        forms,
        provenance: FacetProvenance::Hull,
        complete: true,
    })
}

/// The face of the polytope containing a given point in its relative
/// interior.
#[derive(Clone, Debug)]
pub struct FaceReport {
    pub point: Vec<BigRational>,
    /// Labels of the facets active (exactly zero) at the point.
    pub active_facets: Vec<String>,
    /// Cells whose vertices lie on every active facet.
    pub face_cells: Vec<Cell>,
    /// Affine dimension of the face; equals the polytope dimension when no
    /// facet is active.
    pub dimension: usize,
}

/// Locate the face containing `y` in its relative interior, by exact facet
/// activity. Requires a complete facet list; with a partial list the
/// reported dimension could silently overestimate, so this refuses instead.
pub fn face_of_point(poly: &MarginalPolytope, y: &[BigRational]) -> Result<FaceReport> {
    let facets = poly
        .facets
        .as_ref()
        .filter(|f| f.complete)
        .ok_or_else(|| {
            Error::NonComputable(
                "face computation needs a complete facet list (decomposable, cycle, or hull oracle)"
                    .into(),
            )
        })?;
    if y.len() != poly.dim {
        return Err(Error::Geometry(format!(
            "point has dimension {}, polytope has {}",
            y.len(),
            poly.dim
        )));
    }
    let mut active: Vec<usize> = Vec::new();
    for (idx, form) in facets.forms.iter().enumerate() {
        let v = form.eval_q(y);
        if v.is_negative() {
            return Err(Error::OutsidePolytope(format!(
                "facet {} evaluates to {} at the point",
                form.label,
                crate::rational::format_q(&v)
            )));
        }
        if v.is_zero() {
            active.push(idx);
        }
    }
    let on_face: Vec<usize> = (0..poly.vertices.len())
        .filter(|&k| {
            active
                .iter()
                .all(|&a| facets.forms[a].eval_vertex(&poly.vertices[k]).is_zero())
        })
        .collect();
    let face_points: Vec<Vec<BigRational>> = on_face.iter().map(|&k| poly.vertex_q(k)).collect();
    let dimension = if active.is_empty() {
        poly.dim
    } else {
        affine_rank(&face_points)
    };
    Ok(FaceReport {
        point: y.to_vec(),
        active_facets: active
            .iter()
            .map(|&a| facets.forms[a].label.clone())
            .collect(),
        face_cells: on_face.iter().map(|&k| poly.cells[k].clone()).collect(),
        dimension,
    })
}

/// Best available complete facet list for a model: the decomposable
/// catalogue when the model is decomposable, the cycle catalogue for binary
/// cycles, and otherwise the hull oracle within its size bounds.
pub fn complete_facets(model: &Model) -> Result<FacetList> {
    if let Ok(ds) = crate::normalizers::junction_structure(model) {
        return Ok(decomposable_facets(model, &ds));
    }
    if let Ok(list) = cycle_facets(model) {
        return Ok(list);
    }
    let poly = build_polytope(model)?;
    hull_facets_oracle(&poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeneratingClass;
    use std::collections::BTreeSet;

    fn a3_binary() -> Model {
        Model::new(
            GeneratingClass::from_names(&[("a", 2), ("b", 2), ("c", 2)], &[&["a", "b"], &["b", "c"]])
                .unwrap(),
        )
    }

    #[test]
    fn a3_vertices_match_the_known_eight() {
        let model = a3_binary();
        let poly = build_polytope(&model).unwrap();
        assert_eq!(poly.vertices.len(), 8);
        assert_eq!(poly.dim, 5);
        // J order: a, b, c, ab, bc.
        let expect = |cell: Vec<u32>, f: Vec<u8>| {
            let idx = model.cell_index(&Cell(cell));
            let got: Vec<u8> = poly.vertices[idx].iter().map(|&b| b as u8).collect();
            assert_eq!(got, f);
        };
        expect(vec![0, 0, 0], vec![0, 0, 0, 0, 0]);
        expect(vec![1, 0, 0], vec![1, 0, 0, 0, 0]);
        expect(vec![1, 1, 0], vec![1, 1, 0, 1, 0]);
        expect(vec![1, 0, 1], vec![1, 0, 1, 0, 0]);
        expect(vec![0, 1, 1], vec![0, 1, 1, 0, 1]);
        expect(vec![1, 1, 1], vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn single_binary_variable_polytope_is_the_segment() {
        let model = Model::new(GeneratingClass::from_names(&[("a", 2)], &[&["a"]]).unwrap());
        let poly = build_polytope(&model).unwrap();
        assert_eq!(poly.vertices, vec![vec![false], vec![true]]);
        let hull = hull_facets_oracle(&poly).unwrap();
        let set = hull.primitive_set();
        let expected: BTreeSet<Vec<BigInt>> = [
            vec![BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(-1)],
        ]
        .into_iter()
        .collect();
        assert_eq!(set, expected);
    }

    #[test]
    fn saturated_two_binary_variables_has_four_downset_vertices() {
        let model =
            Model::new(GeneratingClass::from_names(&[("a", 2), ("b", 2)], &[&["a", "b"]]).unwrap());
        let poly = build_polytope(&model).unwrap();
        assert_eq!(poly.dim, 3);
        let rows: BTreeSet<Vec<u8>> = poly
            .vertices
            .iter()
            .map(|f| f.iter().map(|&b| b as u8).collect())
            .collect();
        let expected: BTreeSet<Vec<u8>> =
            [vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 1]]
                .into_iter()
                .collect();
        assert_eq!(rows, expected);
    }

    #[test]
    fn theorem_facet_count_and_values() {
        let model = a3_binary();
        let forms = theorem_facets(&model);
        assert_eq!(forms.len(), 8); // 2^2 + 2^2
        let poly = build_polytope(&model).unwrap();
        for form in &forms {
            let mut ones = 0;
            for v in &poly.vertices {
                let val = form.eval_vertex(v);
                assert!(val.is_zero() || val.is_one(), "{}: {:?}", form.label, val);
                if val.is_one() {
                    ones += 1;
                }
            }
            // Ones count is the number of cells outside the maximal set,
            // here always |I_{V \ A}| = 2.
            assert_eq!(ones, 2, "{}", form.label);
        }
    }

    #[test]
    fn ternary_chain_forms_match_hand_expansion() {
        // Cardinalities 3, 2, 2 with generators {a,b}, {b,c}.
        let model = Model::new(
            GeneratingClass::from_names(&[("a", 3), ("b", 2), ("c", 2)], &[&["a", "b"], &["b", "c"]])
                .unwrap(),
        );
        let label_of = |k: usize| model.label(k);
        let find = |label: &str| -> AffineForm {
            theorem_facets(&model)
                .into_iter()
                .find(|f| f.label == label)
                .unwrap_or_else(|| panic!("missing {label}"))
        };
        let coeff = |f: &AffineForm, lbl: &str| {
            let k = (0..model.dim()).find(|&k| label_of(k) == lbl).unwrap();
            f.coeffs[k].clone()
        };
        // g(0,{b,c}) = 1 - m_001 - m_010 + m_011
        let g0bc = find("g(0,{b,c})");
        assert_eq!(g0bc.constant, q_int(1));
        assert_eq!(coeff(&g0bc, "001"), q_int(-1));
        assert_eq!(coeff(&g0bc, "010"), q_int(-1));
        assert_eq!(coeff(&g0bc, "011"), q_int(1));
        assert_eq!(coeff(&g0bc, "100"), q_int(0));
        // g(010,{a,b}) = m_010 - m_110 - m_210
        let g010ab = find("g(010,{a,b})");
        assert_eq!(g010ab.constant, q_int(0));
        assert_eq!(coeff(&g010ab, "010"), q_int(1));
        assert_eq!(coeff(&g010ab, "110"), q_int(-1));
        assert_eq!(coeff(&g010ab, "210"), q_int(-1));
        assert_eq!(coeff(&g010ab, "011"), q_int(0));
    }

    #[test]
    fn hull_oracle_agrees_with_theorem_facets_on_a3() {
        let model = a3_binary();
        let poly = build_polytope(&model).unwrap();
        let hull = hull_facets_oracle(&poly).unwrap();
        let theorem: BTreeSet<Vec<BigInt>> =
            theorem_facets(&model).iter().map(AffineForm::primitive).collect();
        assert_eq!(hull.primitive_set(), theorem);
    }

    #[test]
    fn cycle_facets_of_the_triangle() {
        let model = Model::new(
            GeneratingClass::from_names(
                &[("a", 2), ("b", 2), ("c", 2)],
                &[&["a", "b"], &["b", "c"], &["a", "c"]],
            )
            .unwrap(),
        );
        let list = cycle_facets(&model).unwrap();
        let odd: Vec<&AffineForm> =
            list.forms.iter().filter(|f| f.label.starts_with("odd")).collect();
        assert_eq!(odd.len(), 4); // 2^{n-1}
        assert_eq!(list.forms.len(), 12 + 4);

        // The all-edges form is 1 - m_a - m_b - m_c + m_ab + m_bc + m_ac.
        let dim = model.dim();
        let full: Vec<BigInt> = {
            let k = |lbl: &str| (0..dim).find(|&k| model.label(k) == lbl).unwrap();
            let mut v = vec![BigInt::from(0); dim + 1];
            v[0] = BigInt::from(1);
            v[1 + k("100")] = BigInt::from(-1);
            v[1 + k("010")] = BigInt::from(-1);
            v[1 + k("001")] = BigInt::from(-1);
            v[1 + k("110")] = BigInt::from(1);
            v[1 + k("011")] = BigInt::from(1);
            v[1 + k("101")] = BigInt::from(1);
            v
        };
        assert!(odd.iter().any(|f| f.primitive() == full));

        // Single-edge form for {a,b}: m_ab + m_c - m_bc - m_ac >= 0.
        let single: Vec<BigInt> = {
            let k = |lbl: &str| (0..dim).find(|&k| model.label(k) == lbl).unwrap();
            let mut v = vec![BigInt::from(0); dim + 1];
            v[1 + k("110")] = BigInt::from(1);
            v[1 + k("001")] = BigInt::from(1);
            v[1 + k("011")] = BigInt::from(-1);
            v[1 + k("101")] = BigInt::from(-1);
            v
        };
        assert!(odd.iter().any(|f| f.primitive() == single));
    }

    #[test]
    fn theorem_family_is_contained_in_the_hull_catalogue() {
        // A non-graphical, non-binary model: the no-three-way-interaction
        // model on cardinalities (3, 2, 2). The closed-form family must be
        // a subset of the full catalogue, here a strict one.
        let model = Model::new(
            GeneratingClass::from_names(
                &[("a", 3), ("b", 2), ("c", 2)],
                &[&["a", "b"], &["b", "c"], &["a", "c"]],
            )
            .unwrap(),
        );
        let poly = build_polytope(&model).unwrap();
        let hull = hull_facets_oracle(&poly).unwrap();
        let hull_set = hull.primitive_set();
        let theorem: BTreeSet<Vec<BigInt>> =
            theorem_facets(&model).iter().map(AffineForm::primitive).collect();
        for form in &theorem {
            assert!(hull_set.contains(form));
        }
        assert!(theorem.len() < hull_set.len());
    }

    #[test]
    fn five_cycle_catalogue_matches_the_oracle() {
        let model = Model::new(
            GeneratingClass::from_names(
                &[("a", 2), ("b", 2), ("c", 2), ("d", 2), ("e", 2)],
                &[&["a", "b"], &["b", "c"], &["c", "d"], &["d", "e"], &["a", "e"]],
            )
            .unwrap(),
        );
        let list = cycle_facets(&model).unwrap();
        let odd = list.forms.iter().filter(|f| f.label.starts_with("odd")).count();
        assert_eq!(odd, 16); // 2^{n-1}
        assert_eq!(list.forms.len(), 20 + 16);
        let poly = build_polytope(&model).unwrap();
        let hull = hull_facets_oracle(&poly).unwrap();
        assert_eq!(list.primitive_set(), hull.primitive_set());

        // The four known inequality families, one representative each:
        // a single edge, two overlapping length-3 subsets, and all edges.
        let dim = model.dim();
        let k = |lbl: &str| (0..dim).find(|&k| model.label(k) == lbl).unwrap();
        let build = |constant: i64, plus: &[&str], minus: &[&str]| -> Vec<BigInt> {
            let mut v = vec![BigInt::from(0); dim + 1];
            v[0] = BigInt::from(constant);
            for lbl in plus {
                v[1 + k(lbl)] = BigInt::from(1);
            }
            for lbl in minus {
                v[1 + k(lbl)] = BigInt::from(-1);
            }
            v
        };
        let representatives = [
            // m_ab + m_c + m_d + m_e - m_bc - m_cd - m_de - m_ea >= 0
            build(
                0,
                &["11000", "00100", "00010", "00001"],
                &["01100", "00110", "00011", "10001"],
            ),
            // 1 - m_a - m_b + m_ea + m_ab + m_bc + m_d - m_cd - m_de >= 0
            build(
                1,
                &["10001", "11000", "01100", "00010"],
                &["10000", "01000", "00110", "00011"],
            ),
            // 1 - m_d + m_ab + m_cd + m_de - m_bc - m_ea >= 0
            build(
                1,
                &["11000", "00110", "00011"],
                &["00010", "01100", "10001"],
            ),
            // 2 - sum of vertices + sum of edges >= 0
            build(
                2,
                &["11000", "01100", "00110", "00011", "10001"],
                &["10000", "01000", "00100", "00010", "00001"],
            ),
        ];
        for rep in &representatives {
            assert!(
                list.forms.iter().any(|f| &f.primitive() == rep),
                "missing cycle form {rep:?}"
            );
        }
    }

    #[test]
    fn cycle_rejects_non_cycles() {
        let chain = a3_binary();
        assert!(matches!(cycle_facets(&chain), Err(Error::NotACycle(_))));
        let ternary = Model::new(
            GeneratingClass::from_names(
                &[("a", 3), ("b", 2), ("c", 2)],
                &[&["a", "b"], &["b", "c"], &["a", "c"]],
            )
            .unwrap(),
        );
        assert!(matches!(cycle_facets(&ternary), Err(Error::NotACycle(_))));
    }

    #[test]
    fn face_of_point_on_a3() {
        let model = a3_binary();
        let facets = complete_facets(&model).unwrap();
        let poly = build_polytope(&model).unwrap().with_facets(facets);

        // Interior: the uniform table's mean vector.
        let uniform = crate::model::ContingencyTable::new(
            model.gc(),
            model.cells().into_iter().map(|c| (c, 1)),
        )
        .unwrap();
        let y = model.mean_vector(&uniform);
        let report = face_of_point(&poly, &y).unwrap();
        assert_eq!(report.dimension, 5);
        assert!(report.active_facets.is_empty());
        assert_eq!(report.face_cells.len(), 8);

        // A vertex is a 0-face.
        let v = poly.vertex_q(model.cell_index(&Cell(vec![1, 1, 1])));
        let report = face_of_point(&poly, &v).unwrap();
        assert_eq!(report.dimension, 0);

        // Zeroing the two cells with (a,b) = (0,0) activates exactly one
        // facet and lands on a 4-face with the six known vertices.
        let table = crate::model::ContingencyTable::new(
            model.gc(),
            model
                .cells()
                .into_iter()
                .filter(|c| !(c.level(0) == 0 && c.level(1) == 0))
                .map(|c| (c, 1)),
        )
        .unwrap();
        let y = model.mean_vector(&table);
        let report = face_of_point(&poly, &y).unwrap();
        assert_eq!(report.active_facets, vec!["g(0,{a,b})".to_string()]);
        assert_eq!(report.dimension, 4);
        assert_eq!(report.face_cells.len(), 6);

        // Outside: a coordinate pushed past a facet.
        let mut bad = model.mean_vector(&uniform);
        bad[0] = q_int(2);
        assert!(matches!(
            face_of_point(&poly, &bad),
            Err(Error::OutsidePolytope(_))
        ));
    }

    #[test]
    fn refinement_projects_f_vectors_consistently() {
        // Adding a generator extends J; old coordinates are preserved.
        let coarse = a3_binary();
        let fine = Model::new(
            GeneratingClass::from_names(
                &[("a", 2), ("b", 2), ("c", 2)],
                &[&["a", "b"], &["b", "c"], &["a", "c"]],
            )
            .unwrap(),
        );
        assert!(fine.dim() >= coarse.dim());
        for cell in coarse.cells() {
            let f_old = coarse.f_vector(&cell);
            let f_new = fine.f_vector(&cell);
            for (k, j) in coarse.index_set().iter().enumerate() {
                let k_new = fine.index_set().position(j.as_cell()).unwrap();
                assert_eq!(f_old[k], f_new[k_new]);
            }
        }
    }
}
