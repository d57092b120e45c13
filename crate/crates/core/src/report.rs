//! Author distribution over clusters and the derived dominance and purity
//! measures.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cluster::ClusterAssignment;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::json::format_real;

pub const DEFAULT_DOMINANCE_THRESHOLD: f64 = 0.5;

/// Contingency counts of authors per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorDistribution {
    pub per_cluster: Vec<BTreeMap<String, usize>>,
    pub totals: BTreeMap<String, usize>,
}

impl AuthorDistribution {
    pub fn cluster_size(&self, cluster: usize) -> usize {
        self.per_cluster[cluster].values().sum()
    }

    /// `cluster_id,author,count,share` for every nonzero cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster_id,author,count,share\n");
        for (c, counts) in self.per_cluster.iter().enumerate() {
            let size = self.cluster_size(c) as f64;
            for (author, &count) in counts {
                out.push_str(&format!(
                    "{c},{},{count},{}\n",
                    csv_field(author),
                    format_real(count as f64 / size)
                ));
            }
        }
        out
    }
}

fn check_coverage(assignment: &ClusterAssignment, corpus: &Corpus) -> Result<()> {
    if assignment.doc_to_cluster.len() != corpus.len()
        || assignment
            .doc_to_cluster
            .iter()
            .any(|&c| c >= assignment.n_clusters)
    {
        return Err(Error::IdMismatch {
            assignment: assignment.doc_to_cluster.len(),
            corpus: corpus.len(),
        });
    }
    Ok(())
}

pub fn author_distribution(assignment: &ClusterAssignment, corpus: &Corpus) -> Result<AuthorDistribution> {
    check_coverage(assignment, corpus)?;
    let mut per_cluster = vec![BTreeMap::new(); assignment.n_clusters];
    let mut totals = BTreeMap::new();
    for (doc, &c) in corpus.documents().iter().zip(&assignment.doc_to_cluster) {
        *per_cluster[c].entry(doc.author.clone()).or_insert(0) += 1;
        *totals.entry(doc.author.clone()).or_insert(0) += 1;
    }
    Ok(AuthorDistribution { per_cluster, totals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceEntry {
    pub cluster: usize,
    pub size: usize,
    pub author: String,
    pub share: f64,
    pub dominant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub entries: Vec<DominanceEntry>,
    pub threshold: f64,
}

impl DominanceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster_id,size,dominant_author,share,dominant\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.cluster,
                e.size,
                csv_field(&e.author),
                format_real(e.share),
                e.dominant
            ));
        }
        out
    }
}

/// Majority author of each cluster; ties go to the smallest label.
pub fn dominance(dist: &AuthorDistribution, threshold: f64) -> Result<DominanceReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dominance threshold {threshold} outside (0, 1]"
        )));
    }
    let entries = dist
        .per_cluster
        .iter()
        .enumerate()
        .map(|(cluster, counts)| {
            let size: usize = counts.values().sum();
            // BTreeMap iterates in label order, so the first maximum wins.
            let (author, top) = counts.iter().fold((String::new(), 0), |(a, best), (label, &n)| {
                if n > best {
                    (label.clone(), n)
                } else {
                    (a, best)
                }
            });
            let share = if size == 0 { 0.0 } else { top as f64 / size as f64 };
            DominanceEntry {
                cluster,
                size,
                author,
                share,
                dominant: share >= threshold,
            }
        })
        .collect();
    Ok(DominanceReport { entries, threshold })
}

/// Fraction of documents that belong to their cluster's majority author.
pub fn purity(assignment: &ClusterAssignment, corpus: &Corpus) -> Result<f64> {
    let dist = author_distribution(assignment, corpus)?;
    let majority: usize = dist
        .per_cluster
        .iter()
        .map(|c| c.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / corpus.len() as f64)
}

/// `doc_id,author,title,cluster_id`.
pub fn assignment_csv(assignment: &ClusterAssignment, corpus: &Corpus) -> Result<String> {
    check_coverage(assignment, corpus)?;
    let mut out = String::from("doc_id,author,title,cluster_id\n");
    for (doc, c) in corpus.documents().iter().zip(&assignment.doc_to_cluster) {
        out.push_str(&format!(
            "{},{},{},{c}\n",
            doc.id,
            csv_field(&doc.author),
            csv_field(&doc.title)
        ));
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(authors: &[&str]) -> Corpus {
        Corpus::from_documents(
            authors
                .iter()
                .enumerate()
                .map(|(i, a)| Document::new(0, *a, format!("t{i:02}"), "x"))
                .collect(),
        )
    }

    fn assign(ids: &[usize]) -> ClusterAssignment {
        ClusterAssignment {
            doc_to_cluster: ids.to_vec(),
            n_clusters: ids.iter().max().map_or(0, |m| m + 1),
        }
    }

    #[test]
    fn distribution_by_author() {
        let c = corpus(&["A", "A", "B", "B"]);
        let d = author_distribution(&assign(&[0, 0, 1, 1]), &c).unwrap();
        assert_eq!(d.per_cluster[0], BTreeMap::from([("A".to_string(), 2)]));
        assert_eq!(d.per_cluster[1], BTreeMap::from([("B".to_string(), 2)]));

        let d = author_distribution(&assign(&[0, 0, 0, 0]), &c).unwrap();
        assert_eq!(d.per_cluster[0], d.totals);

        assert!(matches!(
            author_distribution(&assign(&[0, 0, 0]), &c),
            Err(Error::IdMismatch { .. })
        ));
    }

    #[test]
    fn dominance_flags() {
        let c = corpus(&["A", "A", "A", "B"]);
        let r = dominance(&author_distribution(&assign(&[0, 0, 0, 0]), &c).unwrap(), 0.5).unwrap();
        assert_eq!(r.entries[0].author, "A");
        assert_eq!(r.entries[0].share, 0.75);
        assert!(r.entries[0].dominant);

        let c = corpus(&["B", "A"]);
        let r = dominance(&author_distribution(&assign(&[0, 0]), &c).unwrap(), 0.6).unwrap();
        assert_eq!(r.entries[0].author, "A");
        assert_eq!(r.entries[0].share, 0.5);
        assert!(!r.entries[0].dominant);

        let c = corpus(&["A", "B", "C"]);
        let r = dominance(&author_distribution(&assign(&[0, 1, 2]), &c).unwrap(), 1.0).unwrap();
        assert!(r.entries.iter().all(|e| e.dominant && e.share == 1.0));

        let dist = author_distribution(&assign(&[0, 1, 2]), &c).unwrap();
        assert!(dominance(&dist, 0.0).is_err());
        assert!(dominance(&dist, 1.5).is_err());
    }

    #[test]
    fn purity_values() {
        let c = corpus(&["A", "A", "B", "B"]);
        assert_eq!(purity(&assign(&[0, 0, 1, 1]), &c).unwrap(), 1.0);
        assert_eq!(purity(&assign(&[0, 0, 0, 0]), &c).unwrap(), 0.5);
        assert_eq!(purity(&assign(&[0, 1, 0, 1]), &c).unwrap(), 0.5);
    }

    #[test]
    fn csv_output() {
        let c = corpus(&["A", "x,y"]);
        let a = assign(&[0, 0]);
        let csv = assignment_csv(&a, &c).unwrap();
        assert_eq!(
            csv,
            "doc_id,author,title,cluster_id\n0,A,t00,0\n1,\"x,y\",t01,0\n"
        );
        let dist = author_distribution(&a, &c).unwrap().to_csv();
        assert!(dist.contains("0,A,1,5.0000000000000000e-1\n"));
    }
}
