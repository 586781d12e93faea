//! Nullspaces, row bases and small dense solves for both scalar backends.
//!
//! Exact routines use Gauss-Jordan elimination over the field. Float routines
//! decide ranks from singular values relative to the largest one; a singular
//! value too close to the threshold is reported as an error.

use crate::scalar::Scalar;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-6 }
    }
}

/// Separation between the smallest kept and largest discarded relative
/// singular value of one or more float rank decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankGap {
    pub kept_min: f64,
    pub dropped_max: f64,
}

impl RankGap {
    pub fn merge(self, o: RankGap) -> RankGap {
        RankGap {
            kept_min: self.kept_min.min(o.kept_min),
            dropped_max: self.dropped_max.max(o.dropped_max),
        }
    }

    pub fn merge_opt(a: Option<RankGap>, b: Option<RankGap>) -> Option<RankGap> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.merge(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("ambiguous float rank: relative singular value {value:e} lies within a factor 10 of the threshold {threshold:e}")]
    AmbiguousRank { value: f64, threshold: f64 },
    #[error("matrix is singular")]
    Singular,
}

#[derive(Debug, Clone)]
pub struct Nullspace<S> {
    pub basis: Vec<Vec<S>>,
    pub gap: Option<RankGap>,
}

/// A basis of a span together with biorthogonal coordinate functionals.
/// `duals[r]` is a sparse functional with `duals[r](vectors[s]) = δ_rs`.
#[derive(Debug, Clone)]
pub struct RowBasis<S> {
    pub vectors: Vec<Vec<S>>,
    pub duals: Vec<Vec<(usize, S)>>,
    pub gap: Option<RankGap>,
}

/// In-place reduced row echelon form; returns the pivot column of each
/// leading row. Rows past the rank are zero afterwards.
pub fn rref<S: Scalar>(m: &mut [Vec<S>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let pick = if S::EXACT {
            (r..m.len()).find(|&i| !m[i][c].is_zero())
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in m.iter().enumerate().skip(r) {
                let v = row[c].to_c64().norm();
                if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            best.map(|(i, _)| i)
        };
        let Some(p) = pick else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot");
        for k in c..ncols {
            if !m[r][k].is_zero() {
                m[r][k] = m[r][k].mul(&inv);
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for k in c..ncols {
                if !pivot_row[k].is_zero() {
                    let t = f.mul(&pivot_row[k]);
                    row[k] = row[k].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn exact_nullspace<S: Scalar>(rows: &[Vec<S>], ncols: usize) -> Nullspace<S> {
    let mut m: Vec<Vec<S>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let pivots = rref(&mut m, ncols);
    let proto = rows.iter().flat_map(|r| r.first()).next();
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let Some(proto) = proto.cloned() else {
        return Nullspace { basis, gap: None };
    };
    let zero = proto.zero_like();
    let one = proto.one_like();
    for f in 0..ncols {
        if is_pivot[f] {
            continue;
        }
        let mut v = vec![zero.clone(); ncols];
        v[f] = one.clone();
        for (r, &p) in pivots.iter().enumerate() {
            if !m[r][f].is_zero() {
                v[p] = m[r][f].neg();
            }
        }
        basis.push(v);
    }
    Nullspace { basis, gap: None }
}

pub fn exact_row_basis<S: Scalar>(vectors: &[Vec<S>], len: usize) -> RowBasis<S> {
    let mut m: Vec<Vec<S>> = vectors.to_vec();
    let pivots = rref(&mut m, len);
    m.truncate(pivots.len());
    let duals = pivots
        .iter()
        .zip(&m)
        .map(|(&p, row)| vec![(p, row[p].one_like())])
        .collect();
    RowBasis {
        vectors: m,
        duals,
        gap: None,
    }
}

fn to_dmatrix(rows: &[Vec<Complex64>], nrows: usize, ncols: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_element(nrows, ncols, Complex64::new(0.0, 0.0));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    a
}

fn classify(sv: &[f64], tol: Tolerance, scale: f64) -> Result<(Vec<bool>, Option<RankGap>), LinalgError> {
    let smax = sv.iter().cloned().fold(scale, f64::max);
    if smax == 0.0 {
        return Ok((vec![false; sv.len()], None));
    }
    let mut keep = Vec::with_capacity(sv.len());
    let mut gap = RankGap {
        kept_min: f64::INFINITY,
        dropped_max: 0.0,
    };
    for &s in sv {
        let r = s / smax;
        if r > tol.rel / 10.0 && r < tol.rel * 10.0 {
            return Err(LinalgError::AmbiguousRank {
                value: r,
                threshold: tol.rel,
            });
        }
        let k = r > tol.rel;
        if k {
            gap.kept_min = gap.kept_min.min(r);
        } else {
            gap.dropped_max = gap.dropped_max.max(r);
        }
        keep.push(k);
    }
    Ok((keep, Some(gap)))
}

pub fn float_nullspace(rows: &[Vec<Complex64>], ncols: usize, tol: Tolerance) -> Result<Nullspace<Complex64>, LinalgError> {
    float_nullspace_scaled(rows, ncols, tol, 0.0)
}

/// Like `float_nullspace`, but singular values are measured against
/// max(σ_max, scale), so a matrix that is numerically zero relative to the
/// size of its inputs has full nullity.
pub fn float_nullspace_scaled(
    rows: &[Vec<Complex64>],
    ncols: usize,
    tol: Tolerance,
    scale: f64,
) -> Result<Nullspace<Complex64>, LinalgError> {
    let zero = Complex64::new(0.0, 0.0);
    if ncols == 0 {
        return Ok(Nullspace { basis: vec![], gap: None });
    }
    let nz: Vec<Vec<Complex64>> = rows.iter().filter(|r| r.iter().any(|x| x.norm() > 0.0)).cloned().collect();
    if nz.is_empty() {
        let basis = (0..ncols)
            .map(|f| {
                let mut v = vec![zero; ncols];
                v[f] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        return Ok(Nullspace { basis, gap: None });
    }
    let nrows = nz.len().max(ncols);
    let a = to_dmatrix(&nz, nrows, ncols);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let (keep, gap) = classify(&sv, tol, scale)?;
    let mut basis = Vec::new();
    for (k, kept) in keep.iter().enumerate() {
        if !kept {
            basis.push((0..ncols).map(|j| vt[(k, j)].conj()).collect());
        }
    }
    Ok(Nullspace { basis, gap })
}

pub fn float_row_basis(vectors: &[Vec<Complex64>], len: usize, tol: Tolerance) -> Result<RowBasis<Complex64>, LinalgError> {
    if vectors.is_empty() || len == 0 {
        return Ok(RowBasis {
            vectors: vec![],
            duals: vec![],
            gap: None,
        });
    }
    let a = to_dmatrix(vectors, vectors.len(), len);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let (keep, gap) = classify(&sv, tol, 0.0)?;
    let mut out = Vec::new();
    let mut duals = Vec::new();
    for (k, kept) in keep.iter().enumerate() {
        if *kept {
            let v: Vec<Complex64> = (0..len).map(|j| vt[(k, j)]).collect();
            let d: Vec<(usize, Complex64)> = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.norm() > 0.0)
                .map(|(j, x)| (j, x.conj()))
                .collect();
            out.push(v);
            duals.push(d);
        }
    }
    Ok(RowBasis {
        vectors: out,
        duals,
        gap,
    })
}

/// Rank of a matrix given by rows.
pub fn rank<S: Scalar>(rows: &[Vec<S>], ncols: usize, tol: Tolerance) -> Result<(usize, Option<RankGap>), LinalgError> {
    let ns = S::nullspace(rows, ncols, tol)?;
    Ok((ncols - ns.basis.len(), ns.gap))
}

/// Inverse of a square matrix; `None` when singular (exact zero pivot).
pub fn invert<S: Scalar>(m: &[Vec<S>]) -> Option<Vec<Vec<S>>> {
    let n = m.len();
    if n == 0 {
        return Some(vec![]);
    }
    let zero = m[0][0].zero_like();
    let one = m[0][0].one_like();
    let mut aug: Vec<Vec<S>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { one.clone() } else { zero.clone() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>], zero: &S) -> Vec<Vec<S>> {
    let k = b.len();
    let n = if k == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            let mut out = vec![zero.clone(); n];
            for (t, x) in row.iter().enumerate().take(k) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in b[t].iter().enumerate() {
                    out[j].add_mul_assign(x, y);
                }
            }
            out
        })
        .collect()
}

pub fn determinant<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = m[0][0].one_like();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return det.zero_like();
        };
        if p != c {
            a.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&a[c][c]);
        let inv = a[c][c].inv().expect("nonzero");
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].mul(&inv);
            for k in c..n {
                let t = f.mul(&a[c][k]);
                a[i][k] = a[i][k].sub(&t);
            }
        }
    }
    det
}
