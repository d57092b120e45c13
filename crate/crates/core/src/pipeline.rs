//! End-to-end run: ingest, lexicon, field matrix, optional reduction,
//! clustering and reports.
//!
//! Configuration is a flat `key = value` file. Relative paths resolve
//! against the directory holding the config file.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::{cut_dendrogram, ward_cluster, ClusterParams, HeightScale};
use crate::corpus::{ingest_directory, Corpus};
use crate::error::{Error, Result};
use crate::figures::render_figures;
use crate::json;
use crate::lexicon::{build_lexicon_from_dir, load_plain_lexicon, Lexicon};
use crate::report::{assignment_csv, author_distribution, dominance, purity, DEFAULT_DOMINANCE_THRESHOLD};
use crate::semspace::{build_field_matrix_with, Polysemy};
use crate::svd::{self, svd, ReducedCoords};

pub const CONFIG_KEYS: [&str; 11] = [
    "corpus",
    "lexicon",
    "out_dir",
    "polysemy",
    "space",
    "k",
    "reduced_coords",
    "clusters",
    "epsilon",
    "threshold",
    "height",
];

pub const DEFAULT_CLUSTERS: usize = 20;
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    #[default]
    Field,
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    /// A WordNet `dict` directory, a lexicon `.json`, or a plain TSV lexicon.
    pub lexicon: PathBuf,
    pub out_dir: PathBuf,
    pub polysemy: Polysemy,
    pub space: Space,
    pub k: usize,
    pub reduced_coords: ReducedCoords,
    pub stop: StopChoice,
    pub threshold: f64,
    pub height: HeightScale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopChoice {
    Clusters(usize),
    Epsilon(f64),
}

/// Raw `key = value` pairs before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
    base_dir: PathBuf,
}

impl ConfigMap {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(ConfigMap {
            values,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ConfigMap::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Command-line override; relative paths resolve against the working
    /// directory.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        let mut value = value.into();
        if matches!(key, "corpus" | "lexicon" | "out_dir") && Path::new(&value).is_relative() {
            if let Ok(cwd) = std::env::current_dir() {
                value = cwd.join(&value).to_string_lossy().into_owned();
            }
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    fn path(&self, key: &str) -> Result<PathBuf> {
        let raw = self
            .values
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing `{key}`")))?;
        let p = PathBuf::from(raw);
        Ok(if p.is_relative() { self.base_dir.join(p) } else { p })
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn resolve(&self) -> Result<PipelineConfig> {
        let space = match self.values.get("space").map(String::as_str) {
            None | Some("field") => Space::Field,
            Some("reduced") => Space::Reduced,
            Some(other) => return Err(Error::Config(format!("invalid space `{other}`"))),
        };
        let stop = match (self.parsed::<usize>("clusters")?, self.parsed::<f64>("epsilon")?) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "set either `clusters` or `epsilon`, not both".into(),
                ))
            }
            (Some(n), None) => StopChoice::Clusters(n),
            (None, Some(e)) => StopChoice::Epsilon(e),
            (None, None) => StopChoice::Clusters(DEFAULT_CLUSTERS),
        };
        let config = PipelineConfig {
            corpus: self.path("corpus")?,
            lexicon: self.path("lexicon")?,
            out_dir: self.path("out_dir")?,
            polysemy: self.parsed("polysemy")?.unwrap_or_default(),
            space,
            k: self.parsed("k")?.unwrap_or(DEFAULT_K),
            reduced_coords: self.parsed("reduced_coords")?.unwrap_or_default(),
            stop,
            threshold: self.parsed("threshold")?.unwrap_or(DEFAULT_DOMINANCE_THRESHOLD),
            height: self.parsed("height")?.unwrap_or_default(),
        };
        match config.stop {
            StopChoice::Clusters(0) => return Err(Error::Config("`clusters` must be >= 1".into())),
            StopChoice::Epsilon(e) if e.is_nan() || e <= 0.0 => {
                return Err(Error::Config("`epsilon` must be > 0".into()))
            }
            _ => {}
        }
        Ok(config)
    }
}

/// Loads a lexicon from a WordNet directory, a `.json` serialization or a
/// plain TSV file.
pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    if path.is_dir() {
        return build_lexicon_from_dir(path);
    }
    if path.extension().is_some_and(|e| e == "json") {
        return json::read_file(path);
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_plain_lexicon(BufReader::new(file))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub n_docs: usize,
    pub n_authors: usize,
    pub n_fields: usize,
    pub space: Space,
    pub k: Option<usize>,
    pub reduced_coords: Option<ReducedCoords>,
    pub rank: usize,
    pub sigma: Vec<f64>,
    pub n_clusters: usize,
    pub purity: f64,
    pub threshold: f64,
    pub dominant_clusters: usize,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineSummary> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let write = |name: &str, text: String| {
        let path = out.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    };

    let corpus: Corpus = ingest_directory(&config.corpus).map_err(|e| e.in_stage("ingest"))?;
    let lexicon = load_lexicon(&config.lexicon).map_err(|e| e.in_stage("lexicon"))?;
    json::write_file(&out.join("corpus.json"), &corpus).map_err(|e| e.in_stage("ingest"))?;
    json::write_file(&out.join("lexicon.json"), &lexicon).map_err(|e| e.in_stage("lexicon"))?;

    let matrix =
        build_field_matrix_with(&corpus, &lexicon, config.polysemy).map_err(|e| e.in_stage("matrix"))?;
    json::write_file(&out.join("matrix.json"), &matrix).map_err(|e| e.in_stage("matrix"))?;

    let factorization = svd(&matrix).map_err(|e| e.in_stage("svd"))?;
    let k = match config.space {
        Space::Field => factorization.rank(),
        Space::Reduced => config.k,
    };
    let truncated = factorization.truncate(k).map_err(|e| e.in_stage("svd"))?;
    write(
        "svd.json",
        svd::to_json(&truncated).map_err(|e| e.in_stage("svd"))?,
    )
    .map_err(|e| e.in_stage("svd"))?;

    let vectors = match config.space {
        Space::Field => matrix.document_vectors(),
        Space::Reduced => truncated
            .reduced_vectors(&matrix, config.reduced_coords)
            .map_err(|e| e.in_stage("svd"))?,
    };

    let dendrogram =
        ward_cluster(&vectors, &ClusterParams::clusters(1)).map_err(|e| e.in_stage("cluster"))?;
    let n_clusters = match config.stop {
        StopChoice::Clusters(n) => n,
        StopChoice::Epsilon(eps) => {
            dendrogram.n_leaves - dendrogram.merges.iter().take_while(|m| m.height < eps).count()
        }
    };
    let assignment = cut_dendrogram(&dendrogram, n_clusters).map_err(|e| e.in_stage("cluster"))?;
    let emitted = dendrogram.with_height_scale(config.height);
    json::write_file(&out.join("dendrogram.json"), &emitted).map_err(|e| e.in_stage("cluster"))?;
    let labels: Vec<String> = corpus
        .documents()
        .iter()
        .map(|d| format!("{}/{}", d.author, d.title))
        .collect();
    write("dendrogram.nwk", emitted.to_newick(Some(&labels))).map_err(|e| e.in_stage("cluster"))?;

    let report = || -> Result<PipelineSummary> {
        write("assignment.csv", assignment_csv(&assignment, &corpus)?)?;
        let dist = author_distribution(&assignment, &corpus)?;
        write("distribution.csv", dist.to_csv())?;
        let dom = dominance(&dist, config.threshold)?;
        write("dominance.csv", dom.to_csv())?;
        render_figures(&emitted, n_clusters, &dist, Some(factorization.sigma()), out)?;
        let summary = PipelineSummary {
            n_docs: corpus.len(),
            n_authors: corpus.authors().len(),
            n_fields: matrix.n_fields(),
            space: config.space,
            k: (config.space == Space::Reduced).then_some(k),
            reduced_coords: (config.space == Space::Reduced).then_some(config.reduced_coords),
            rank: factorization.rank(),
            sigma: factorization.sigma().iter().take(10).copied().collect(),
            n_clusters: assignment.n_clusters,
            purity: purity(&assignment, &corpus)?,
            threshold: config.threshold,
            dominant_clusters: dom.entries.iter().filter(|e| e.dominant).count(),
        };
        json::write_file(&out.join("summary.json"), &summary)?;
        Ok(summary)
    };
    report().map_err(|e| e.in_stage("report"))
}
