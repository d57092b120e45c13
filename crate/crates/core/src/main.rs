use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semfield::cluster::{cut_dendrogram, ward_cluster, ClusterParams, Dendrogram, HeightScale};
use semfield::figures::render_figures;
use semfield::pipeline::{run_pipeline, ConfigMap, CONFIG_KEYS};
use semfield::report::{assignment_csv, author_distribution, dominance, purity};
use semfield::semspace::{build_field_matrix_with, FieldMatrix, Polysemy};
use semfield::svd::{self, svd, ReducedCoords};
use semfield::{build_lexicon_from_dir, ingest_directory, json, load_plain_lexicon, Corpus, Error, Lexicon};

#[derive(Parser)]
#[command(
    name = "semfield",
    version,
    about = "Cluster authored texts in a space of WordNet semantic fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lexicon from WordNet data files or a plain field list.
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Tokenize a corpus directory laid out as <author>/<title>.txt.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the normalized field-frequency matrix.
    Matrix {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value = "full")]
        polysemy: Polysemy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factor the matrix and write the scree of leading singular values.
    Svd {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        scree: PathBuf,
    },
    /// Ward clustering in field space or in a reduced space.
    Cluster(ClusterArgs),
    /// Cut a dendrogram and write author distributions and figures.
    Report {
        #[arg(long)]
        dendrogram: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to the number of clusters left in a partial dendrogram.
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long, default_value_t = semfield::report::DEFAULT_DOMINANCE_THRESHOLD)]
        threshold: f64,
        /// Factorization whose singular values go into the scree figure.
        #[arg(long)]
        svd: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run every stage from a `key = value` config file.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Read `data.noun` and `data.verb` from a WordNet dictionary directory.
    Build {
        #[arg(long)]
        wordnet_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read `field_name<TAB>word word ...` lines.
    Plain {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    svd: Option<PathBuf>,
    #[arg(long, requires = "svd")]
    k: Option<usize>,
    #[arg(long, default_value = "whitened", requires = "svd")]
    reduced_coords: ReducedCoords,
    #[arg(long, conflicts_with = "epsilon", required_unless_present = "epsilon")]
    clusters: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value = "cost")]
    height: HeightScale,
    #[arg(long)]
    out: PathBuf,
    /// Also write the dendrogram as Newick text.
    #[arg(long)]
    newick: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    lexicon: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    polysemy: Option<String>,
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    reduced_coords: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    height: Option<String>,
}

impl PipelineArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 11] {
        let values = [
            &self.corpus,
            &self.lexicon,
            &self.out_dir,
            &self.polysemy,
            &self.space,
            &self.k,
            &self.reduced_coords,
            &self.clusters,
            &self.epsilon,
            &self.threshold,
            &self.height,
        ];
        std::array::from_fn(|i| (CONFIG_KEYS[i], values[i]))
    }
}

fn write_text(path: &Path, text: String) -> semfield::Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(command: Command) -> semfield::Result<()> {
    match command {
        Command::Lexicon(LexiconCommand::Build { wordnet_dir, out }) => {
            let lexicon = build_lexicon_from_dir(&wordnet_dir)?;
            json::write_file(&out, &lexicon)
        }
        Command::Lexicon(LexiconCommand::Plain { input, out }) => {
            let file = fs::File::open(&input).map_err(|e| Error::io(&input, e))?;
            let lexicon = load_plain_lexicon(BufReader::new(file))?;
            json::write_file(&out, &lexicon)
        }
        Command::Ingest { corpus, out } => json::write_file(&out, &ingest_directory(&corpus)?),
        Command::Matrix {
            corpus,
            lexicon,
            polysemy,
            out,
        } => {
            let corpus: Corpus = json::read_file(&corpus)?;
            let lexicon: Lexicon = json::read_file(&lexicon)?;
            json::write_file(&out, &build_field_matrix_with(&corpus, &lexicon, polysemy)?)
        }
        Command::Svd {
            matrix,
            k,
            out,
            scree,
        } => {
            let matrix: FieldMatrix = json::read_file(&matrix)?;
            let f = svd(&matrix)?;
            let t = f.truncate(k.unwrap_or(f.rank()))?;
            write_text(&out, svd::to_json(&t)?)?;
            write_text(&scree, svd::scree_csv(f.sigma()))
        }
        Command::Cluster(args) => cluster(args),
        Command::Report {
            dendrogram,
            corpus,
            clusters,
            threshold,
            svd: svd_path,
            out_dir,
        } => {
            let dendrogram: Dendrogram = json::read_file(&dendrogram)?;
            let corpus: Corpus = json::read_file(&corpus)?;
            let n = clusters.unwrap_or(dendrogram.min_clusters());
            let assignment = cut_dendrogram(&dendrogram, n)?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            write_text(
                &out_dir.join("assignment.csv"),
                assignment_csv(&assignment, &corpus)?,
            )?;
            let dist = author_distribution(&assignment, &corpus)?;
            write_text(&out_dir.join("distribution.csv"), dist.to_csv())?;
            let dom = dominance(&dist, threshold)?;
            write_text(&out_dir.join("dominance.csv"), dom.to_csv())?;
            let sigma = match svd_path {
                Some(p) => {
                    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    Some(svd::from_json(&text)?.0.sigma().to_vec())
                }
                None => None,
            };
            render_figures(&dendrogram, n, &dist, sigma.as_deref(), &out_dir)?;
            let summary = serde_json::json!({
                "n_clusters": assignment.n_clusters,
                "purity": purity(&assignment, &corpus)?,
                "threshold": threshold,
                "dominant_clusters": dom.entries.iter().filter(|e| e.dominant).count(),
            });
            json::write_file(&out_dir.join("summary.json"), &summary)
        }
        Command::Pipeline(args) => {
            let mut map = match &args.config {
                Some(path) => ConfigMap::load(path)?,
                None => ConfigMap::default(),
            };
            for (key, value) in args.overrides() {
                if let Some(v) = value {
                    map.set(key, v.clone())?;
                }
            }
            let summary = run_pipeline(&map.resolve()?)?;
            println!("{}", json::to_string(&summary)?.trim_end());
            Ok(())
        }
    }
}

fn cluster(args: ClusterArgs) -> semfield::Result<()> {
    let matrix: FieldMatrix = json::read_file(&args.matrix)?;
    let vectors = match &args.svd {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let (f, stored_k) = svd::from_json(&text)?;
            let t = f.truncate(args.k.unwrap_or(stored_k))?;
            t.reduced_vectors(&matrix, args.reduced_coords)?
        }
        None => matrix.document_vectors(),
    };
    let params = match (args.clusters, args.epsilon) {
        (Some(n), _) => ClusterParams::clusters(n),
        (None, Some(e)) => ClusterParams::threshold(e),
        (None, None) => unreachable!("clap enforces a stop rule"),
    };
    let dendrogram = ward_cluster(&vectors, &params)?.with_height_scale(args.height);
    json::write_file(&args.out, &dendrogram)?;
    if let Some(path) = &args.newick {
        write_text(path, dendrogram.to_newick(None))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
