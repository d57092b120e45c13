//! Clustering of authored texts in a vector space whose basis is the set of
//! WordNet noun and verb lexicographer files ("semantic fields").
//!
//! The pipeline runs:
//!
//! 1. [`lexicon`]: WordNet data files to a form → fields lexicon.
//! 2. [`corpus`]: `root/<author>/<title>.txt` to token counts.
//! 3. [`semspace`]: the column-normalized field × document matrix.
//! 4. [`svd`]: singular value decomposition and reduction to `K` dimensions.
//! 5. [`cluster`]: Ward agglomerative clustering and dendrogram cuts.
//! 6. [`report`] / [`figures`]: author distributions, dominance, purity, SVG.
//!
//! [`pipeline`] strings these together behind a flat config file.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod figures;
pub mod json;
pub mod lexicon;
pub mod linalg;
pub mod pipeline;
pub mod report;
pub mod semspace;
pub mod svd;

pub use cluster::{
    cluster_centroids, cut_dendrogram, ward_cluster, ward_cluster_cross_checked, ClusterAssignment,
    ClusterParams, Dendrogram, HeightScale, Merge, StopRule,
};
pub use corpus::{ingest_directory, tokenize, Corpus, Document};
pub use error::{Error, Result};
pub use lexicon::{
    build_lexicon, build_lexicon_from_dir, expand_derivatives, lexnum_to_field, load_plain_lexicon,
    parse_wordnet_data, FieldId, Lexicon, PartOfSpeech, SemanticField, FIELD_NAMES, N_FIELDS,
};
pub use linalg::Matrix;
pub use report::{author_distribution, dominance, purity, AuthorDistribution, DominanceReport};
pub use semspace::{
    build_field_matrix, build_field_matrix_with, euclidean_distance, DocVector, FieldMatrix, Polysemy,
};
pub use svd::{svd, svd_matrix, ReducedCoords, SvdFactorization, TruncatedSvd};
