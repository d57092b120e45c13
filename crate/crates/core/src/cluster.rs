//! Agglomerative clustering with Ward's minimum-variance criterion.
//!
//! Merge costs are `Δ(A,B) = |A||B|/(|A|+|B|) · ‖c_A − c_B‖²`, the increase in
//! the error sum of squares caused by merging `A` and `B`. They are kept
//! current with the Lance–Williams recurrence, so centroids are never
//! recomputed outside the cross-checking path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semspace::squared_distance;

/// Relative width of the window inside which merge costs count as tied. The
/// window is relative to the larger of the minimal cost and the largest
/// initial cost, so exact ties at or near zero survive rounding.
pub const TIE_TOL: f64 = 1e-12;
/// Allowed drift between maintained and recomputed costs in cross-check mode.
pub const CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop once this many clusters remain.
    Clusters(usize),
    /// Stop before the first merge whose cost is `>= ε`.
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub stop: StopRule,
}

impl ClusterParams {
    pub fn clusters(n: usize) -> Self {
        ClusterParams {
            stop: StopRule::Clusters(n),
        }
    }

    pub fn threshold(epsilon: f64) -> Self {
        ClusterParams {
            stop: StopRule::Threshold(epsilon),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.stop {
            StopRule::Clusters(0) => Err(Error::InvalidParameter("cluster count must be >= 1".into())),
            StopRule::Threshold(e) if e.is_nan() || e <= 0.0 => {
                Err(Error::InvalidParameter("epsilon must be > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Merge history. Leaves are nodes `0..n_leaves`; merge `i` creates node
/// `n_leaves + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeightScale {
    /// The merge cost itself.
    #[default]
    Cost,
    /// `sqrt(2 · cost)`, the convention of several plotting tools.
    Sqrt,
}

impl std::str::FromStr for HeightScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cost" => Ok(HeightScale::Cost),
            "sqrt" => Ok(HeightScale::Sqrt),
            _ => Err(Error::InvalidParameter(format!("height `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub doc_to_cluster: Vec<usize>,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_clusters];
        for (doc, &c) in self.doc_to_cluster.iter().enumerate() {
            groups[c].push(doc);
        }
        groups
    }
}

pub fn ward_cluster<V: AsRef<[f64]>>(vectors: &[V], params: &ClusterParams) -> Result<Dendrogram> {
    WardState::new(vectors, false)?.run(params)
}

/// Like [`ward_cluster`] but recomputes every maintained cost from centroids
/// after each merge and fails if any drifts by more than
/// [`CROSS_CHECK_TOL`].
pub fn ward_cluster_cross_checked<V: AsRef<[f64]>>(
    vectors: &[V],
    params: &ClusterParams,
) -> Result<Dendrogram> {
    WardState::new(vectors, true)?.run(params)
}

struct WardState {
    n: usize,
    /// Node id per slot, `None` once the slot has been merged away.
    node: Vec<Option<usize>>,
    size: Vec<usize>,
    /// Dense symmetric cost matrix over slots.
    cost: Vec<f64>,
    /// Largest initial cost; sets the absolute floor of the tie window.
    scale: f64,
    centroids: Option<Vec<Vec<f64>>>,
}

impl WardState {
    fn new<V: AsRef<[f64]>>(vectors: &[V], cross_check: bool) -> Result<Self> {
        let n = vectors.len();
        if n < 2 {
            return Err(Error::TooFewVectors(n));
        }
        let dim = vectors[0].as_ref().len();
        for (i, v) in vectors.iter().enumerate() {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        let mut cost = vec![0.0; n * n];
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let d = 0.5 * squared_distance(vectors[i].as_ref(), vectors[j].as_ref());
                cost[i * n + j] = d;
                cost[j * n + i] = d;
                scale = scale.max(d);
            }
        }
        Ok(WardState {
            n,
            node: (0..n).map(Some).collect(),
            size: vec![1; n],
            cost,
            scale,
            centroids: cross_check.then(|| vectors.iter().map(|v| v.as_ref().to_vec()).collect()),
        })
    }

    fn run(mut self, params: &ClusterParams) -> Result<Dendrogram> {
        params.validate()?;
        let n = self.n;
        let target = match params.stop {
            StopRule::Clusters(k) => k.min(n),
            StopRule::Threshold(_) => 1,
        };
        let mut merges = Vec::with_capacity(n - target);
        let mut active = n;
        while active > target {
            let (a, b, height) = self.closest_pair();
            if let StopRule::Threshold(eps) = params.stop {
                if height >= eps {
                    break;
                }
            }
            let (na, nb) = (self.node[a].unwrap(), self.node[b].unwrap());
            let new_node = n + merges.len();
            merges.push(Merge {
                left: na.min(nb),
                right: na.max(nb),
                height,
                size: self.size[a] + self.size[b],
            });
            self.merge_slots(a, b, new_node);
            if self.centroids.is_some() {
                self.cross_check(a, merges.len())?;
            }
            active -= 1;
        }
        Ok(Dendrogram { n_leaves: n, merges })
    }

    /// Slots of the pair to merge next: the minimal cost, ties (see
    /// [`TIE_TOL`]) resolved by the smallest `(min node, max node)`.
    fn closest_pair(&self) -> (usize, usize, f64) {
        let n = self.n;
        let mut min = f64::INFINITY;
        for i in 0..n {
            if self.node[i].is_none() {
                continue;
            }
            for j in i + 1..n {
                if self.node[j].is_some() {
                    min = min.min(self.cost[i * n + j]);
                }
            }
        }
        let window = min + TIE_TOL * min.abs().max(self.scale);
        let mut best: Option<((usize, usize), (usize, usize))> = None;
        for i in 0..n {
            let Some(ni) = self.node[i] else { continue };
            for j in i + 1..n {
                let Some(nj) = self.node[j] else { continue };
                if self.cost[i * n + j] <= window {
                    let key = (ni.min(nj), ni.max(nj));
                    if best.is_none_or(|(k, _)| key < k) {
                        best = Some((key, (i, j)));
                    }
                }
            }
        }
        let (_, (a, b)) = best.expect("at least two active clusters");
        (a, b, self.cost[a * n + b])
    }

    /// Merges slot `b` into slot `a`.
    fn merge_slots(&mut self, a: usize, b: usize, new_node: usize) {
        let n = self.n;
        let (sa, sb) = (self.size[a] as f64, self.size[b] as f64);
        let dab = self.cost[a * n + b];
        for k in 0..n {
            if k == a || k == b || self.node[k].is_none() {
                continue;
            }
            let sk = self.size[k] as f64;
            let d = ((sa + sk) * self.cost[a * n + k] + (sb + sk) * self.cost[b * n + k] - sk * dab)
                / (sa + sb + sk);
            // Ward costs are nonnegative; only rounding can push them below.
            let d = d.max(0.0);
            self.cost[a * n + k] = d;
            self.cost[k * n + a] = d;
        }
        if let Some(centroids) = self.centroids.as_mut() {
            let cb = std::mem::take(&mut centroids[b]);
            for (x, y) in centroids[a].iter_mut().zip(&cb) {
                *x = (sa * *x + sb * y) / (sa + sb);
            }
        }
        self.size[a] += self.size[b];
        self.node[a] = Some(new_node);
        self.node[b] = None;
    }

    fn cross_check(&self, a: usize, step: usize) -> Result<()> {
        let centroids = self.centroids.as_ref().expect("cross-check mode");
        let n = self.n;
        for k in 0..n {
            if k == a || self.node[k].is_none() {
                continue;
            }
            let (sa, sk) = (self.size[a] as f64, self.size[k] as f64);
            let direct = sa * sk / (sa + sk) * squared_distance(&centroids[a], &centroids[k]);
            let maintained = self.cost[a * n + k];
            if (maintained - direct).abs() > CROSS_CHECK_TOL * (1.0 + direct.abs()) {
                return Err(Error::CrossCheck {
                    step,
                    maintained,
                    direct,
                });
            }
        }
        Ok(())
    }
}

impl Dendrogram {
    /// Checks node ids, sizes and that every node is merged at most once.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if self.merges.len() >= n.max(1) {
            return Err(Error::InvalidParameter("too many merges".into()));
        }
        let mut size = vec![1usize; n];
        let mut used = vec![false; n + self.merges.len()];
        for (i, m) in self.merges.iter().enumerate() {
            let node = n + i;
            for child in [m.left, m.right] {
                if child >= node || used[child] {
                    return Err(Error::InvalidParameter(format!(
                        "merge {i} references invalid node {child}"
                    )));
                }
                used[child] = true;
            }
            if m.left == m.right
                || m.size != size[m.left] + size[m.right]
                || m.height.is_nan()
                || m.height < 0.0
            {
                return Err(Error::InvalidParameter(format!("merge {i} is inconsistent")));
            }
            size.push(m.size);
        }
        Ok(())
    }

    /// Fewest clusters reachable by cutting this (possibly partial) history.
    pub fn min_clusters(&self) -> usize {
        self.n_leaves - self.merges.len()
    }

    pub fn with_height_scale(&self, scale: HeightScale) -> Dendrogram {
        let mut out = self.clone();
        if scale == HeightScale::Sqrt {
            for m in &mut out.merges {
                m.height = (2.0 * m.height).sqrt();
            }
        }
        out
    }

    /// Newick text, one tree per line. Branch lengths are height differences.
    pub fn to_newick(&self, labels: Option<&[String]>) -> String {
        let n = self.n_leaves;
        let total = n + self.merges.len();
        let mut has_parent = vec![false; total];
        for m in &self.merges {
            has_parent[m.left] = true;
            has_parent[m.right] = true;
        }
        let mut out = String::new();
        for root in (0..total).filter(|&r| !has_parent[r]) {
            self.write_newick(root, labels, &mut out);
            out.push_str(";\n");
        }
        out
    }

    fn node_height(&self, node: usize) -> f64 {
        if node < self.n_leaves {
            0.0
        } else {
            self.merges[node - self.n_leaves].height
        }
    }

    fn write_newick(&self, node: usize, labels: Option<&[String]>, out: &mut String) {
        if node < self.n_leaves {
            match labels.and_then(|l| l.get(node)) {
                Some(label) => out.push_str(&newick_label(label)),
                None => out.push_str(&node.to_string()),
            }
            return;
        }
        let m = self.merges[node - self.n_leaves];
        out.push('(');
        for (i, child) in [m.left, m.right].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_newick(child, labels, out);
            out.push_str(&format!(":{}", m.height - self.node_height(child)));
        }
        out.push(')');
    }

    /// Node ids of the subtrees that form the `n_clusters` cut, ascending.
    pub fn cut_roots(&self, n_clusters: usize) -> Result<Vec<usize>> {
        self.check_cut(n_clusters)?;
        let applied = self.n_leaves - n_clusters;
        let total = self.n_leaves + applied;
        let mut has_parent = vec![false; total];
        for m in &self.merges[..applied] {
            has_parent[m.left] = true;
            has_parent[m.right] = true;
        }
        Ok((0..total).filter(|&r| !has_parent[r]).collect())
    }

    fn check_cut(&self, n_clusters: usize) -> Result<()> {
        if n_clusters == 0 || n_clusters > self.n_leaves || n_clusters < self.min_clusters() {
            return Err(Error::InvalidParameter(format!(
                "cannot cut {} leaves with {} merges into {n_clusters} clusters",
                self.n_leaves,
                self.merges.len()
            )));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for Dendrogram {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n_leaves: usize,
            merges: Vec<Merge>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let d = Dendrogram {
            n_leaves: raw.n_leaves,
            merges: raw.merges,
        };
        d.validate().map_err(serde::de::Error::custom)?;
        Ok(d)
    }
}

fn newick_label(label: &str) -> String {
    if label.chars().any(|c| "()[]':;, \t".contains(c)) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Undoes the trailing merges so exactly `n_clusters` groups remain. Cluster
/// ids follow the smallest member leaf.
pub fn cut_dendrogram(d: &Dendrogram, n_clusters: usize) -> Result<ClusterAssignment> {
    d.check_cut(n_clusters)?;
    let n = d.n_leaves;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rep: Vec<usize> = (0..n).collect();
    for m in &d.merges[..n - n_clusters] {
        let (a, b) = (find(&mut parent, rep[m.left]), find(&mut parent, rep[m.right]));
        let root = a.min(b);
        parent[a.max(b)] = root;
        rep.push(root);
    }
    let mut cluster_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let mut doc_to_cluster = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        if cluster_of_root[root] == usize::MAX {
            cluster_of_root[root] = next;
            next += 1;
        }
        doc_to_cluster.push(cluster_of_root[root]);
    }
    Ok(ClusterAssignment {
        doc_to_cluster,
        n_clusters: next,
    })
}

/// Mean vector of each cluster.
pub fn cluster_centroids<V: AsRef<[f64]>>(vectors: &[V], assignment: &ClusterAssignment) -> Vec<Vec<f64>> {
    let dim = vectors.first().map_or(0, |v| v.as_ref().len());
    let mut sums = vec![vec![0.0; dim]; assignment.n_clusters];
    let mut counts = vec![0usize; assignment.n_clusters];
    for (v, &c) in vectors.iter().zip(&assignment.doc_to_cluster) {
        for (s, x) in sums[c].iter_mut().zip(v.as_ref()) {
            *s += x;
        }
        counts[c] += 1;
    }
    for (s, &k) in sums.iter_mut().zip(&counts) {
        if k > 0 {
            s.iter_mut().for_each(|x| *x /= k as f64);
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![4.0, 0.0], vec![4.0, 1.0]]
    }

    #[test]
    fn four_points() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        let summary: Vec<_> = d
            .merges
            .iter()
            .map(|m| (m.left, m.right, m.height, m.size))
            .collect();
        assert_eq!(summary, [(0, 1, 0.5, 2), (2, 3, 0.5, 2), (4, 5, 16.0, 4)]);

        let cut = cut_dendrogram(&d, 2).unwrap();
        assert_eq!(cut.doc_to_cluster, [0, 0, 1, 1]);
        let centroids = cluster_centroids(&square(), &cut);
        assert_eq!(centroids, [vec![0.0, 0.5], vec![4.0, 0.5]]);
    }

    #[test]
    fn count_stop_is_a_prefix() {
        let full = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        let two = ward_cluster(&square(), &ClusterParams::clusters(2)).unwrap();
        assert_eq!(two.merges[..], full.merges[..2]);
        assert_eq!(
            cut_dendrogram(&two, 2).unwrap(),
            cut_dendrogram(&full, 2).unwrap()
        );
        assert!(cut_dendrogram(&two, 1).is_err());
    }

    #[test]
    fn threshold_stop() {
        let d = ward_cluster(&square(), &ClusterParams::threshold(1.0)).unwrap();
        assert_eq!(d.merges.len(), 2);
        assert_eq!(d.min_clusters(), 2);
        // A cost equal to epsilon is not merged.
        let d = ward_cluster(&square(), &ClusterParams::threshold(0.5)).unwrap();
        assert!(d.merges.is_empty());
    }

    #[test]
    fn identical_points() {
        let pts = vec![vec![1.0, 2.0, 3.0]; 5];
        let d = ward_cluster(&pts, &ClusterParams::clusters(1)).unwrap();
        assert!(d.merges.iter().all(|m| m.height == 0.0));
        assert_eq!(d.merges.len(), 4);
    }

    #[test]
    fn cut_extremes() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        assert_eq!(cut_dendrogram(&d, 4).unwrap().doc_to_cluster, [0, 1, 2, 3]);
        assert_eq!(cut_dendrogram(&d, 1).unwrap().doc_to_cluster, [0, 0, 0, 0]);
        assert!(cut_dendrogram(&d, 0).is_err());
        assert!(cut_dendrogram(&d, 5).is_err());
    }

    #[test]
    fn singleton_centroids() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        let cut = cut_dendrogram(&d, 4).unwrap();
        assert_eq!(cluster_centroids(&square(), &cut), square());
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            ward_cluster(&[vec![1.0]], &ClusterParams::clusters(1)),
            Err(Error::TooFewVectors(1))
        ));
        assert!(matches!(
            ward_cluster(&[vec![1.0], vec![1.0, 2.0]], &ClusterParams::clusters(1)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ward_cluster(&[vec![1.0], vec![f64::NAN]], &ClusterParams::clusters(1)),
            Err(Error::NonFinite(1))
        ));
        assert!(ward_cluster(&square(), &ClusterParams::clusters(0)).is_err());
        assert!(ward_cluster(&square(), &ClusterParams::threshold(0.0)).is_err());
    }

    #[test]
    fn newick() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        assert_eq!(d.to_newick(None), "((0:0.5,1:0.5):15.5,(2:0.5,3:0.5):15.5);\n");
        let labels: Vec<String> = ["a b", "c", "d'x", "e"].iter().map(|s| s.to_string()).collect();
        assert!(d.to_newick(Some(&labels)).starts_with("(('a b':0.5,c:0.5)"));
        assert!(d.to_newick(Some(&labels)).contains("'d''x'"));

        let partial = ward_cluster(&square(), &ClusterParams::clusters(2)).unwrap();
        assert_eq!(partial.to_newick(None).lines().count(), 2);
    }

    #[test]
    fn sqrt_heights() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        let s = d.with_height_scale(HeightScale::Sqrt);
        assert_eq!(s.merges[0].height, 1.0);
        assert_eq!(s.merges[2].height, 32f64.sqrt());
    }

    #[test]
    fn json_validation() {
        let d = ward_cluster(&square(), &ClusterParams::clusters(1)).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: Dendrogram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"n_leaves":3,"merges":[{"left":0,"right":0,"height":1.0,"size":2}]}"#;
        assert!(serde_json::from_str::<Dendrogram>(bad).is_err());
        let bad = r#"{"n_leaves":3,"merges":[{"left":0,"right":1,"height":1.0,"size":3}]}"#;
        assert!(serde_json::from_str::<Dendrogram>(bad).is_err());
    }

    #[test]
    fn cross_checked_matches() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos(), i as f64 * 0.01])
            .collect();
        let a = ward_cluster(&pts, &ClusterParams::clusters(1)).unwrap();
        let b = ward_cluster_cross_checked(&pts, &ClusterParams::clusters(1)).unwrap();
        assert_eq!(a, b);
    }
}
