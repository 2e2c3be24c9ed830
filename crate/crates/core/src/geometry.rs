//! Exact rational polyhedral kernel.
//!
//! One double-description pass over integer halfspace data drives all three
//! operations exposed here:
//!
//! * `facet_enumeration` - facets of the convex hull of a point set, as the
//!   extreme rays of the cone of valid inequalities;
//! * `vertex_enumeration` - vertices of a bounded halfspace intersection,
//!   as the extreme rays of its homogenization;
//! * `volume` - exact volume of a full-dimensional hull by recursive cone
//!   decomposition over its facets.
//!
//! All arithmetic is over arbitrary-precision rationals; results are exact
//! and deterministic for a fixed input order.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{
    affine_rank, det_q, invert_q, primitive_from_ints, primitive_integer, rank_q,
};

/// Hard cap on the number of halfspace rows (incidence sets are u128 masks).
const MAX_ROWS: usize = 128;
/// Safety valve for intermediate ray counts.
const MAX_RAYS: usize = 200_000;

/// An extreme ray of a pointed cone, as a primitive integer vector, plus the
/// set of input rows it is incident to (bit `i` = row `i` evaluates to zero).
#[derive(Clone, Debug)]
pub struct ExtremeRay {
    pub coords: Vec<BigInt>,
    pub incidence: u128,
}

fn dot(row: &[BigInt], ray: &[BigInt]) -> BigInt {
    row.iter().zip(ray).map(|(a, b)| a * b).sum()
}

/// Extreme rays of the pointed cone `{ x : row . x >= 0 for every row }`.
///
/// The rows must have full column rank (otherwise the cone contains a line
/// and has no extreme rays); inputs violating this yield `Error::Geometry`.
pub fn extreme_rays(rows: &[Vec<BigInt>]) -> Result<Vec<ExtremeRay>> {
    let dim = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Geometry("no halfspaces".into()))?;
    if rows.len() > MAX_ROWS {
        return Err(Error::DimensionTooLarge {
            what: "double description rows",
            value: rows.len(),
            bound: MAX_ROWS,
        });
    }

    // Greedy selection of `dim` linearly independent rows for the simplicial
    // starting cone.
    let mut basis_rows: Vec<usize> = Vec::new();
    let mut staged: Vec<Vec<BigRational>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let candidate: Vec<BigRational> = row
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        staged.push(candidate);
        if rank_q(&staged) == staged.len() {
            basis_rows.push(i);
        } else {
            staged.pop();
        }
        if basis_rows.len() == dim {
            break;
        }
    }
    if basis_rows.len() < dim {
        return Err(Error::Geometry(
            "halfspace normals do not span the space (cone not pointed)".into(),
        ));
    }
    let inverse = invert_q(&staged).ok_or_else(|| Error::Geometry("singular basis".into()))?;

    // Rays of the starting cone: columns of the inverse. Column k is zero on
    // every basis row except row k.
    struct Ray {
        coords: Vec<BigInt>,
        mask: u128, // over processed rows, in processing order
    }
    let processing: Vec<usize> = basis_rows
        .iter()
        .copied()
        .chain((0..rows.len()).filter(|i| !basis_rows.contains(i)))
        .collect();
    let mut rays: Vec<Ray> = (0..dim)
        .map(|k| {
            let col: Vec<BigRational> = (0..dim).map(|r| inverse[r][k].clone()).collect();
            let coords = primitive_integer(&col);
            let mask = ((1u128 << dim) - 1) & !(1u128 << k);
            Ray { coords, mask }
        })
        .collect();

    for step in dim..processing.len() {
        let row = &rows[processing[step]];
        let values: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.coords)).collect();
        let any_negative = values.iter().any(|v| v.is_negative());
        if !any_negative {
            for (ray, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    ray.mask |= 1 << step;
                }
            }
            continue;
        }

        let plus: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();

        let mut next: Vec<Ray> = Vec::new();
        for (i, ray) in rays.iter().enumerate() {
            if values[i].is_negative() {
                continue;
            }
            let mut mask = ray.mask;
            if values[i].is_zero() {
                mask |= 1 << step;
            }
            next.push(Ray {
                coords: ray.coords.clone(),
                mask,
            });
        }
        for &p in &plus {
            for &m in &minus {
                let common = rays[p].mask & rays[m].mask;
                // Combinatorial adjacency: no third ray's zero set contains
                // the common zero set of the pair.
                let adjacent = rays.iter().enumerate().all(|(k, other)| {
                    k == p || k == m || common & !other.mask != 0
                });
                if !adjacent {
                    continue;
                }
                let coords: Vec<BigInt> = rays[p]
                    .coords
                    .iter()
                    .zip(&rays[m].coords)
                    .map(|(cp, cm)| &values[p] * cm - &values[m] * cp)
                    .collect();
                next.push(Ray {
                    coords: primitive_from_ints(&coords),
                    mask: common | 1 << step,
                });
            }
        }
        if next.len() > MAX_RAYS {
            return Err(Error::Geometry(format!(
                "ray count {} exceeds safety bound",
                next.len()
            )));
        }
        rays = next;
    }

    // Report incidence in the caller's row order.
    let mut out: Vec<ExtremeRay> = rays
        .into_iter()
        .map(|r| {
            let mut incidence = 0u128;
            for (i, row) in rows.iter().enumerate() {
                if dot(row, &r.coords).is_zero() {
                    incidence |= 1 << i;
                }
            }
            ExtremeRay {
                coords: r.coords,
                incidence,
            }
        })
        .collect();
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    out.dedup_by(|a, b| a.coords == b.coords);
    Ok(out)
}

/// A facet of a point set's convex hull: the inequality
/// `constant + coeffs . x >= 0` (primitive integers, nonnegative on the
/// hull), and the indices of the incident input points.
#[derive(Clone, Debug)]
pub struct HullFacet {
    pub constant: BigInt,
    pub coeffs: Vec<BigInt>,
    pub incident: Vec<usize>,
}

impl HullFacet {
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::from_integer(self.constant.clone());
        for (c, x) in self.coeffs.iter().zip(point) {
            acc += BigRational::from_integer(c.clone()) * x;
        }
        acc
    }
}

/// Complete, irredundant facet list of the convex hull of `points`, which
/// must affinely span their ambient space.
pub fn facet_enumeration(points: &[Vec<BigRational>]) -> Result<Vec<HullFacet>> {
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Geometry("no points".into()))?;
    if affine_rank(points) != dim {
        return Err(Error::Geometry(format!(
            "points span affine dimension {} in ambient dimension {}",
            affine_rank(points),
            dim
        )));
    }
    // Valid inequalities (a0, a) form the cone dual to the homogenized
    // points (1, p); its extreme rays are exactly the facets.
    let rows: Vec<Vec<BigInt>> = points
        .iter()
        .map(|p| {
            let mut h = Vec::with_capacity(dim + 1);
            h.push(BigRational::one());
            h.extend(p.iter().cloned());
            primitive_integer(&h)
        })
        .collect();
    let rays = extreme_rays(&rows)?;
    Ok(rays
        .into_iter()
        .map(|r| {
            let incident = (0..points.len()).filter(|&i| r.incidence >> i & 1 == 1).collect();
            let mut coords = r.coords.into_iter();
            let constant = coords.next().expect("homogeneous coordinate");
            HullFacet {
                constant,
                coeffs: coords.collect(),
                incident,
            }
        })
        .collect())
}

/// Vertices of the bounded polyhedron `{ x : coeffs_i . x <= bound_i }`.
/// Fails with `Error::Geometry` when the polyhedron is unbounded or empty
/// of interior (a recession ray shows up in the homogenization).
pub fn vertex_enumeration(
    inequalities: &[(BigRational, Vec<BigRational>)],
) -> Result<Vec<Vec<BigRational>>> {
    let dim = inequalities
        .first()
        .map(|(_, c)| c.len())
        .ok_or_else(|| Error::Geometry("no inequalities".into()))?;
    // Homogenize: (t, x) with bound*t - coeffs.x >= 0, plus t >= 0.
    let mut rows: Vec<Vec<BigInt>> = inequalities
        .iter()
        .map(|(b, c)| {
            let mut h = Vec::with_capacity(dim + 1);
            h.push(b.clone());
            h.extend(c.iter().map(|x| -x));
            primitive_integer(&h)
        })
        .collect();
    let mut t_row = vec![BigInt::zero(); dim + 1];
    t_row[0] = BigInt::one();
    rows.push(t_row);

    let rays = extreme_rays(&rows)?;
    let mut vertices = Vec::with_capacity(rays.len());
    for ray in rays {
        let t = &ray.coords[0];
        if t.is_zero() {
            return Err(Error::Geometry("polyhedron is unbounded".into()));
        }
        debug_assert!(t.is_positive());
        let tq = BigRational::from_integer(t.clone());
        vertices.push(
            ray.coords[1..]
                .iter()
                .map(|c| BigRational::from_integer(c.clone()) / tq.clone())
                .collect(),
        );
    }
    vertices.sort();
    Ok(vertices)
}

fn simplex_volume(points: &[Vec<BigRational>]) -> BigRational {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d + 1);
    let rows: Vec<Vec<BigRational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut v = det_q(&rows);
    if v.is_negative() {
        v = -v;
    }
    let mut fact = BigInt::one();
    for k in 2..=d {
        fact *= BigInt::from(k);
    }
    v / BigRational::from_integer(fact)
}

/// Exact volume of the convex hull of `points` in their ambient dimension.
/// Degenerate (lower-dimensional) sets have volume zero.
///
/// The hull is decomposed into cones from the first point over every facet
/// not containing it; each facet is projected onto a coordinate hyperplane
/// and handled recursively. The projection scaling and the cone height
/// combine into the rational factor `g(v0) / |a_k|`.
pub fn volume(points: &[Vec<BigRational>]) -> Result<BigRational> {
    if points.is_empty() {
        return Ok(BigRational::zero());
    }
    let d = points[0].len();
    if d == 0 {
        return Ok(BigRational::one());
    }
    if affine_rank(points) < d {
        return Ok(BigRational::zero());
    }
    if d == 1 {
        let min = points.iter().map(|p| &p[0]).min().unwrap();
        let max = points.iter().map(|p| &p[0]).max().unwrap();
        return Ok(max - min);
    }
    if points.len() == d + 1 {
        return Ok(simplex_volume(points));
    }

    let facets = facet_enumeration(points)?;
    let v0 = &points[0];
    let mut total = BigRational::zero();
    for facet in &facets {
        let height = facet.eval(v0);
        if !height.is_positive() {
            continue; // v0 lies on this facet; the cone is flat
        }
        let k = facet
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .expect("facet normal is nonzero");
        let projected: Vec<Vec<BigRational>> = facet
            .incident
            .iter()
            .map(|&i| {
                let p = &points[i];
                p.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != k)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let mut ak = BigRational::from_integer(facet.coeffs[k].clone());
        if ak.is_negative() {
            ak = -ak;
        }
        total += height / ak * volume(&projected)?;
    }
    Ok(total / BigRational::from_integer(BigInt::from(d)))
}
