//! Shared fixtures for the benchmark targets.

use loglin_core::model::{GeneratingClass, Model};

/// Binary chain on three variables (dimension 5, 8 vertices).
pub fn chain3() -> Model {
    Model::new(
        GeneratingClass::from_names(&[("a", 2), ("b", 2), ("c", 2)], &[&["a", "b"], &["b", "c"]])
            .unwrap(),
    )
}

/// Binary 4-cycle (dimension 8, 16 vertices, 24 facets).
pub fn cycle4() -> Model {
    Model::new(
        GeneratingClass::from_names(
            &[("a", 2), ("b", 2), ("c", 2), ("d", 2)],
            &[&["a", "b"], &["b", "c"], &["c", "d"], &["a", "d"]],
        )
        .unwrap(),
    )
}

/// Chain on cardinalities (3, 3, 2) (dimension 11, 18 vertices).
pub fn ternary_chain() -> Model {
    Model::new(
        GeneratingClass::from_names(&[("a", 3), ("b", 3), ("c", 2)], &[&["a", "b"], &["b", "c"]])
            .unwrap(),
    )
}
