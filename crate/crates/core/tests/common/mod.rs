//! Test-only oracles and data generators. Nothing here calls into the code
//! paths it is used to check.

#![allow(dead_code)]

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use semfield::{Corpus, Document, FieldId, Lexicon, Matrix, N_FIELDS};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(rows, cols, data).unwrap()
}

pub fn gaussian_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Singular values by power iteration with deflation on MᵀM.
// ---------------------------------------------------------------------------

/// Gram matrix of the shorter side, so it has full rank for generic input.
fn gram(m: &Matrix) -> Vec<Vec<f64>> {
    if m.rows() < m.cols() {
        return gram(&m.transpose());
    }
    let n = m.cols();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..m.rows()).map(|r| m[(r, i)] * m[(r, j)]).sum();
        }
    }
    g
}

/// Singular values of `m`, descending, from the eigenvalues of `MᵀM`.
pub fn power_iteration_singular_values(m: &Matrix) -> Vec<f64> {
    let mut a = gram(m);
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for start in 0..n {
        // A fixed, generic starting vector.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i + start) as f64 * 0.618).fract())
            .collect();
        normalize(&mut v);
        let mut lambda = 0.0;
        for _ in 0..200_000 {
            let mut w: Vec<f64> = a.iter().map(|row| dot(row, &v)).collect();
            let norm = dot(&w, &w).sqrt();
            if norm == 0.0 {
                lambda = 0.0;
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let next = rayleigh(&a, &w);
            let delta: f64 = w.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            v = w;
            let done = (next - lambda).abs() <= 1e-15 * next.abs() && delta < 1e-12;
            lambda = next;
            if done {
                break;
            }
        }
        out.push(lambda.max(0.0).sqrt());
        for i in 0..n {
            for j in 0..n {
                a[i][j] -= lambda * v[i] * v[j];
            }
        }
    }
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}

fn rayleigh(a: &[Vec<f64>], v: &[f64]) -> f64 {
    let av: Vec<f64> = a.iter().map(|row| dot(row, v)).collect();
    dot(v, &av)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

// ---------------------------------------------------------------------------
// Ward by exhaustive recomputation.
// ---------------------------------------------------------------------------

/// Error sum of squares of a member set, from the raw points.
pub fn ess(points: &[Vec<f64>], members: &[usize]) -> f64 {
    let dim = points[0].len();
    let mut centroid = vec![0.0; dim];
    for &m in members {
        for (c, x) in centroid.iter_mut().zip(&points[m]) {
            *c += x;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= members.len() as f64);
    members
        .iter()
        .map(|&m| {
            points[m]
                .iter()
                .zip(&centroid)
                .map(|(x, c)| (x - c) * (x - c))
                .sum::<f64>()
        })
        .sum()
}

/// `(left, right, height)` for each merge, with every candidate cost
/// recomputed as `ESS(A∪B) − ESS(A) − ESS(B)`. Costs within `1e-12` of
/// `max(min cost, largest pairwise cost)` of the minimum are tied and go to
/// the lexicographically smallest `(min id, max id)`.
pub fn brute_force_ward(points: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            scale = scale.max(ess(points, &[i, j]));
        }
    }
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut candidates = Vec::new();
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut union = clusters[a].1.clone();
                union.extend(&clusters[b].1);
                let delta = ess(points, &union) - ess(points, &clusters[a].1) - ess(points, &clusters[b].1);
                let (ia, ib) = (clusters[a].0, clusters[b].0);
                candidates.push((delta, (ia.min(ib), ia.max(ib)), a, b));
            }
        }
        let min = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let (delta, key, a, b) = candidates
            .into_iter()
            .filter(|c| c.0 <= min + 1e-12 * min.abs().max(scale))
            .min_by_key(|c| c.1)
            .unwrap();
        let new_id = n + merges.len();
        merges.push((key.0, key.1, delta));
        let mut members = clusters[a].1.clone();
        members.extend(&clusters[b].1);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((new_id, members));
    }
    merges
}

// ---------------------------------------------------------------------------
// Synthetic authored corpus.
// ---------------------------------------------------------------------------

pub const WORDS_PER_FIELD: usize = 12;
pub const FILLER: [&str; 8] = ["the", "and", "of", "to", "a", "in", "that", "it"];

/// A letters-only pseudo-word unique to `(field, slot)`.
pub fn planted_word(field: usize, slot: usize) -> String {
    let letter = |i: usize| (b'a' + (i % 26) as u8) as char;
    format!("q{}{}{}z", letter(field / 26), letter(field), letter(slot))
}

pub fn planted_lexicon() -> Lexicon {
    Lexicon::from_entries(
        (0..N_FIELDS).flat_map(|f| (0..WORDS_PER_FIELD).map(move |s| (planted_word(f, s), FieldId(f as u8)))),
    )
}

pub struct SyntheticSpec {
    pub authors: usize,
    pub docs_per_author: usize,
    pub tokens_per_doc: usize,
    /// Symmetric Dirichlet concentration of each author's field profile.
    pub concentration: f64,
    /// Share of tokens drawn from words outside the lexicon.
    pub filler_share: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            authors: 17,
            docs_per_author: 10,
            tokens_per_doc: 2000,
            concentration: 5.0,
            filler_share: 0.3,
            seed: 20_110_417,
        }
    }
}

pub fn author_name(a: usize) -> String {
    format!("author{:02}", a + 1)
}

/// Author profiles drawn from a symmetric Dirichlet.
pub fn author_profiles(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let gamma = Gamma::new(spec.concentration, 1.0).unwrap();
    (0..spec.authors)
        .map(|_| {
            let raw: Vec<f64> = (0..N_FIELDS).map(|_| gamma.sample(rng)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect()
}

pub fn synthetic_texts(spec: &SyntheticSpec) -> Vec<(String, String, String)> {
    let mut rng = rng(spec.seed);
    let profiles = author_profiles(spec, &mut rng);
    let mut out = Vec::new();
    for (a, profile) in profiles.iter().enumerate() {
        let fields = WeightedIndex::new(profile).unwrap();
        for d in 0..spec.docs_per_author {
            let mut words = Vec::with_capacity(spec.tokens_per_doc);
            for _ in 0..spec.tokens_per_doc {
                if rng.random::<f64>() < spec.filler_share {
                    words.push(FILLER[rng.random_range(0..FILLER.len())].to_string());
                } else {
                    let f = fields.sample(&mut rng);
                    words.push(planted_word(f, rng.random_range(0..WORDS_PER_FIELD)));
                }
            }
            out.push((author_name(a), format!("doc{d:02}"), words.join(" ")));
        }
    }
    out
}

pub fn synthetic_corpus(spec: &SyntheticSpec) -> Corpus {
    Corpus::from_documents(
        synthetic_texts(spec)
            .into_iter()
            .map(|(author, title, text)| Document::new(0, author, title, &text))
            .collect(),
    )
}
