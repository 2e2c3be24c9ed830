//! Kernel cross-checks on random 0/1 polytopes: facet enumeration and
//! vertex enumeration invert each other, and the exact volume is invariant
//! under point reordering, translation, and unimodular maps.

use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use loglin_core::geometry::{facet_enumeration, vertex_enumeration, volume};
use loglin_core::rational::q_int;

/// Random full-dimensional 0/1 point set in the given dimension.
fn random_01_points(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<BigRational>> {
    loop {
        let count = rng.gen_range(dim + 2..=(dim + 2).max(2 * dim + 4));
        let mut points: Vec<Vec<BigRational>> = (0..count)
            .map(|_| (0..dim).map(|_| q_int(rng.gen_range(0..2))).collect())
            .collect();
        points.sort();
        points.dedup();
        if loglin_core::rational::affine_rank(&points) == dim {
            return points;
        }
    }
}

/// Vertices of the hull: points that are not convex combinations of the
/// others, read off the facet structure (a vertex lies on facets whose
/// normals span the space).
fn hull_vertices(points: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let dim = points[0].len();
    let facets = facet_enumeration(points).unwrap();
    let mut vertices: Vec<Vec<BigRational>> = Vec::new();
    for (idx, p) in points.iter().enumerate() {
        let normals: Vec<Vec<BigRational>> = facets
            .iter()
            .filter(|f| f.incident.contains(&idx))
            .map(|f| {
                f.coeffs
                    .iter()
                    .map(|c| BigRational::from_integer(c.clone()))
                    .collect()
            })
            .collect();
        if loglin_core::rational::rank_q(&normals) == dim {
            vertices.push(p.clone());
        }
    }
    vertices.sort();
    vertices
}

#[test]
fn facet_and_vertex_enumeration_are_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for dim in 2..=5 {
        for _ in 0..8 {
            let points = random_01_points(dim, &mut rng);
            let facets = facet_enumeration(&points).unwrap();
            let ineqs: Vec<(BigRational, Vec<BigRational>)> = facets
                .iter()
                .map(|f| {
                    (
                        BigRational::from_integer(f.constant.clone()),
                        f.coeffs
                            .iter()
                            .map(|c| -BigRational::from_integer(c.clone()))
                            .collect(),
                    )
                })
                .collect();
            let recovered = vertex_enumeration(&ineqs).unwrap();
            assert_eq!(recovered, hull_vertices(&points));
        }
    }
}

#[test]
fn volume_is_invariant_under_reordering_translation_and_shear() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for dim in 2..=4 {
        for _ in 0..6 {
            let points = random_01_points(dim, &mut rng);
            let reference = volume(&points).unwrap();
            assert!(reference > BigRational::from_integer(BigInt::from(0)));

            let mut shuffled = points.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            assert_eq!(volume(&shuffled).unwrap(), reference);

            let shift: Vec<BigRational> = (0..dim)
                .map(|_| q_int(rng.gen_range(-3..4)) / q_int(rng.gen_range(1..4)))
                .collect();
            let translated: Vec<Vec<BigRational>> = points
                .iter()
                .map(|p| p.iter().zip(&shift).map(|(a, b)| a + b).collect())
                .collect();
            assert_eq!(volume(&translated).unwrap(), reference);

            // Unit shear: add coordinate 0 to coordinate 1.
            let sheared: Vec<Vec<BigRational>> = points
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q[1] = &q[1] + &q[0];
                    q
                })
                .collect();
            assert_eq!(volume(&sheared).unwrap(), reference);
        }
    }
}

#[test]
fn volume_of_a_scaled_cube() {
    // [0,3] x [0,2] as rational combinations, volume 6.
    let points = vec![
        vec![q_int(0), q_int(0)],
        vec![q_int(3), q_int(0)],
        vec![q_int(0), q_int(2)],
        vec![q_int(3), q_int(2)],
        vec![q_int(1), q_int(1)], // interior point must not disturb anything
    ];
    assert_eq!(volume(&points).unwrap(), q_int(6));
}
