//! Exact rational scalars and the small dense linear algebra used by the
//! geometry kernel: rank, determinant, inversion, and primitive integer
//! normalization of rational vectors.

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Rational from an integer pair.
pub fn q(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from an integer.
pub fn q_int(numer: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(numer))
}

/// Lossy conversion to `f64`.
pub fn q_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion from a finite `f64` (dyadic rational).
pub fn q_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Io(format!("cannot convert non-finite {x} to a rational")))
}

/// Canonical text form: `p/q` in lowest terms, or just `p` when `q == 1`.
pub fn format_q(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `p` or `p/q`.
pub fn parse_q(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Io(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let denom = parse_int(d)?;
            if denom.is_zero() {
                return Err(Error::Io(format!("bad rational {s:?}: zero denominator")));
            }
            Ok(BigRational::new(parse_int(n)?, denom))
        }
    }
}

/// Row rank by fraction-preserving Gaussian elimination.
#[allow(clippy::needless_range_loop)]
pub fn rank_q(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &inv;
            for c in col..ncols {
                let delta = &factor * &m[rank][c];
                m[r][c] = &m[r][c] - delta;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Affine rank of a point set: rank of the differences to the first point.
/// A single point (or the empty set) has affine rank zero.
pub fn affine_rank(points: &[Vec<BigRational>]) -> usize {
    let Some((first, rest)) = points.split_first() else {
        return 0;
    };
    let diffs: Vec<Vec<BigRational>> = rest
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    rank_q(&diffs)
}

/// Determinant of a square rational matrix.
#[allow(clippy::needless_range_loop)]
pub fn det_q(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col].clone();
        let inv = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &inv;
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] = &a[r][c] - delta;
            }
        }
    }
    det
}

/// Inverse of a square rational matrix, or `None` when singular.
pub fn invert_q(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] = &a[col][c] / &p;
            inv[col][c] = &inv[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let da = &factor * &a[col][c];
                a[r][c] = &a[r][c] - da;
                let di = &factor * &inv[col][c];
                inv[r][c] = &inv[r][c] - di;
            }
        }
    }
    Some(inv)
}

/// Scale a rational vector to a primitive integer vector: clear denominators,
/// then divide by the gcd of the entries. Sign is preserved.
pub fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitive_from_ints(&ints)
}

/// Divide an integer vector by the gcd of its entries (no sign change).
pub fn primitive_from_ints(v: &[BigInt]) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}
