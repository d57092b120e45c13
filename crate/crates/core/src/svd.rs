//! Singular value decomposition of the field matrix by one-sided Jacobi
//! rotations, rank-K truncation and projection into the reduced space.
//!
//! For an `n_fields × n_docs` matrix `M`, the rotations act on the columns of
//! `Mᵀ`, one per field, so the accumulated rotation is the `n_fields ×
//! n_fields` matrix of left singular vectors and the rotated columns, once
//! normalized, are the right singular vectors.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::format_real;
use crate::linalg::{dot, Matrix};
use crate::semspace::{DocVector, FieldMatrix};

pub const MAX_SWEEPS: usize = 60;
/// Pairs whose normalized Gram entry is below this count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-14;
/// Singular values at or below `RANK_TOL * sigma[0]` are dropped.
pub const RANK_TOL: f64 = 1e-12;

/// `M = U · diag(sigma) · Yᵀ` restricted to the numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactorization {
    u: Matrix,
    sigma: Vec<f64>,
    y: Matrix,
}

/// Coordinates used for documents in the reduced space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducedCoords {
    /// `Σ_K⁻¹ U_Kᵀ v`: rows of `Y_K` for factored columns.
    #[default]
    Whitened,
    /// `U_Kᵀ v`: rows of `Y_K Σ_K`, which preserves distances at full rank.
    Scaled,
}

impl std::str::FromStr for ReducedCoords {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitened" => Ok(ReducedCoords::Whitened),
            "scaled" => Ok(ReducedCoords::Scaled),
            _ => Err(Error::InvalidParameter(format!("reduced coords `{s}`"))),
        }
    }
}

pub fn svd(m: &FieldMatrix) -> Result<SvdFactorization> {
    svd_matrix(m.values())
}

pub fn svd_matrix(m: &Matrix) -> Result<SvdFactorization> {
    if m.cols() == 0 || m.rows() == 0 {
        return Err(Error::InvalidParameter("matrix has no entries".into()));
    }
    if m.as_col_major().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }

    let n = m.rows();
    let mut a = m.transpose();
    let mut v = Matrix::identity(n);
    let frob2: f64 = a.as_col_major().iter().map(|x| x * x).sum();
    let negligible = (f64::EPSILON * m.rows().max(m.cols()) as f64).powi(2) * frob2;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                if rotate_pair(&mut a, &mut v, p, q, negligible) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut triplets: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n)
        .map(|i| {
            let col = a.column(i);
            let s = dot(col, col).sqrt();
            (s, v.column(i).to_vec(), col.to_vec())
        })
        .collect();
    let sigma_max = triplets.iter().map(|t| t.0).fold(0.0, f64::max);
    triplets.retain(|t| t.0 > RANK_TOL * sigma_max && t.0 > 0.0);
    for (s, u_col, y_col) in &mut triplets {
        y_col.iter_mut().for_each(|x| *x /= *s);
        let pivot = u_col
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (i, x)| if x.abs() > best.1 { (i, x.abs()) } else { best },
            )
            .0;
        if u_col[pivot] < 0.0 {
            u_col.iter_mut().for_each(|x| *x = -*x);
            y_col.iter_mut().for_each(|x| *x = -*x);
        }
    }
    triplets.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| cmp_desc(&a.1, &b.1))
    });

    let sigma: Vec<f64> = triplets.iter().map(|t| t.0).collect();
    let u_cols: Vec<Vec<f64>> = triplets.iter().map(|t| t.1.clone()).collect();
    let y_cols: Vec<Vec<f64>> = triplets.into_iter().map(|t| t.2).collect();
    Ok(SvdFactorization {
        u: Matrix::from_columns(m.rows(), &u_cols)?,
        sigma,
        y: Matrix::from_columns(m.cols(), &y_cols)?,
    })
}

/// Orthogonalizes columns `p` and `q` of `a`, mirroring the rotation into
/// `v`. Returns false when the pair was already orthogonal or negligible.
fn rotate_pair(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, negligible: f64) -> bool {
    let (alpha, beta, gamma) = {
        let (cp, cq) = (a.column(p), a.column(q));
        (dot(cp, cp), dot(cq, cq), dot(cp, cq))
    };
    if alpha <= negligible || beta <= negligible {
        return false;
    }
    if gamma.abs() <= ORTHOGONALITY_TOL * (alpha * beta).sqrt() {
        return false;
    }
    let zeta = (beta - alpha) / (2.0 * gamma);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    apply_rotation(a, p, q, c, s);
    apply_rotation(v, p, q, c, s);
    true
}

fn apply_rotation(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

fn cmp_desc(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.partial_cmp(x) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

impl SvdFactorization {
    /// Validates and wraps precomputed factors.
    pub fn from_parts(u: Matrix, sigma: Vec<f64>, y: Matrix) -> Result<Self> {
        let r = sigma.len();
        if u.cols() != r || y.cols() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                actual: u.cols().max(y.cols()),
            });
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) || sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "sigma must be positive and nonincreasing".into(),
            ));
        }
        Ok(SvdFactorization { u, sigma, y })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Left singular vectors, one column per retained value.
    pub fn u(&self) -> &Matrix {
        &self.u
    }

    /// Right singular vectors, one row per document.
    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn truncate(&self, k: usize) -> Result<TruncatedSvd<'_>> {
        if k == 0 || k > self.rank() {
            return Err(Error::RankOutOfRange { k, rank: self.rank() });
        }
        Ok(TruncatedSvd { base: self, k })
    }

    pub fn full(&self) -> Result<TruncatedSvd<'_>> {
        self.truncate(self.rank())
    }
}

/// View of the `k` leading singular triplets.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedSvd<'a> {
    base: &'a SvdFactorization,
    k: usize,
}

impl<'a> TruncatedSvd<'a> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn base(&self) -> &'a SvdFactorization {
        self.base
    }

    pub fn sigma(&self) -> &'a [f64] {
        &self.base.sigma[..self.k]
    }

    /// `U_K · diag(σ_K) · Y_Kᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let u = &self.base.u;
        let y = &self.base.y;
        let mut out = Matrix::zeros(u.rows(), y.rows());
        for (i, &s) in self.sigma().iter().enumerate() {
            let u_col = u.column(i);
            let y_col = y.column(i);
            for (j, &yj) in y_col.iter().enumerate() {
                let w = s * yj;
                for (o, &ui) in out.column_mut(j).iter_mut().zip(u_col) {
                    *o += ui * w;
                }
            }
        }
        out
    }

    pub fn project_document(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.project_document_with(v, ReducedCoords::Whitened)
    }

    pub fn project_document_with(&self, v: &[f64], coords: ReducedCoords) -> Result<Vec<f64>> {
        let u = &self.base.u;
        if v.len() != u.rows() {
            return Err(Error::DimensionMismatch {
                expected: u.rows(),
                actual: v.len(),
            });
        }
        Ok(self
            .sigma()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let x = dot(u.column(i), v);
                match coords {
                    ReducedCoords::Whitened => x / s,
                    ReducedCoords::Scaled => x,
                }
            })
            .collect())
    }

    /// `K × n_docs` matrix whose column `j` is the projection of column `j`.
    pub fn project_corpus(&self, m: &Matrix, coords: ReducedCoords) -> Result<Matrix> {
        let columns = (0..m.cols())
            .map(|j| self.project_document_with(m.column(j), coords))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_columns(self.k, &columns)
    }

    pub fn reduced_vectors(&self, m: &FieldMatrix, coords: ReducedCoords) -> Result<Vec<DocVector>> {
        m.document_vectors()
            .into_iter()
            .map(|dv| {
                Ok(DocVector::new(
                    dv.doc_id,
                    self.project_document_with(&dv.components, coords)?,
                ))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct SvdJson {
    sigma: Vec<f64>,
    u: Matrix,
    y: Matrix,
    k: usize,
}

/// Serializes a factorization together with its retained dimension.
pub fn to_json(t: &TruncatedSvd<'_>) -> Result<String> {
    crate::json::to_string(&SvdJson {
        sigma: t.base.sigma.clone(),
        u: t.base.u.clone(),
        y: t.base.y.clone(),
        k: t.k,
    })
}

/// Parses a factorization and its stored `k`.
pub fn from_json(text: &str) -> Result<(SvdFactorization, usize)> {
    let raw: SvdJson = serde_json::from_str(text)?;
    let f = SvdFactorization::from_parts(raw.u, raw.sigma, raw.y)?;
    f.truncate(raw.k)?;
    Ok((f, raw.k))
}

/// `index,sigma` rows for the leading `min(rank, 10)` singular values.
pub fn scree_csv(sigma: &[f64]) -> String {
    let mut out = String::from("index,sigma\n");
    for (i, s) in sigma.iter().take(10).enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, format_real(*s)));
    }
    out
}
