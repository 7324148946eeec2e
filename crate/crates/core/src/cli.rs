//! Batch front end: argument definitions, the similarity → evolution →
//! analysis pipeline, and the result documents written by the `cce` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{detect_platforms, skipped_counts, suggest_counts, Platform, Suggestion, DEFAULT_MIN_PLATFORM};
use crate::error::{CceError, Result};
use crate::evolution::{
    filter_noise, run_evolution, EvolutionConfig, EvolutionTrace, StopReason, DEFAULT_K_MAX, DEFAULT_NOISE_THRESHOLD,
};
use crate::io::{read_matrix_csv, read_points_csv, read_routes};
use crate::similarity::{from_routes, gaussian_kernel, median_pairwise_distance, njw_normalize, SimilarityMatrix};
use crate::spectral::{verify_theorem, TheoremReport};

pub const TRACE_HEADER: &str = "k,n_clusters_raw,n_clusters_filtered";
pub const DEFAULT_VERIFY_K: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Points,
    Matrix,
    Routes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalize {
    #[default]
    None,
    Njw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detail {
    /// One snapshot per platform, taken at its first `k`.
    #[default]
    Platforms,
    /// Every `k`.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sigma {
    Value(f64),
    /// Median pairwise distance.
    Auto,
}

fn parse_sigma(s: &str) -> std::result::Result<Sigma, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Sigma::Auto);
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a positive number or 'auto', got {s:?}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("sigma must be positive, got {v}"));
    }
    Ok(Sigma::Value(v))
}

#[derive(Debug, Parser)]
#[command(name = "cce", version, about = "Connection center evolution clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the evolution and write the result document.
    Cluster(RunArgs),
    /// Write the cluster-count-vs-k curve as CSV.
    Trace(RunArgs),
    /// Compare sqrt(diag(S^k)) with the dominant eigenvector of S.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Power at which to compare.
        #[arg(long, default_value_t = DEFAULT_VERIFY_K)]
        k: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: InputFormat,
    /// Gaussian kernel width, or `auto` for the median pairwise distance.
    #[arg(long, value_parser = parse_sigma)]
    pub sigma: Option<Sigma>,
    /// First column of a points CSV holds point identifiers.
    #[arg(long)]
    pub id_column: bool,
    #[arg(long, value_enum, default_value_t = Normalize::None)]
    pub normalize: Normalize,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_NOISE_THRESHOLD)]
    pub noise_threshold: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_PLATFORM)]
    pub min_platform: usize,
    #[arg(long, value_enum, default_value_t = Detail::Platforms)]
    pub detail: Detail,
    /// Result document path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the count-vs-k CSV here.
    #[arg(long)]
    pub trace_output: Option<PathBuf>,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub sigma: Option<Sigma>,
    pub id_column: bool,
    pub normalize: Normalize,
    pub k_max: usize,
    pub epsilon: f64,
    pub noise_threshold: usize,
    pub min_platform: usize,
    pub detail: Detail,
    pub output: Option<PathBuf>,
    pub trace_output: Option<PathBuf>,
}

impl RunConfig {
    /// Config with defaults for everything but the input.
    pub fn new(input: impl Into<PathBuf>, format: InputFormat) -> Self {
        Self {
            input: input.into(),
            format,
            sigma: None,
            id_column: false,
            normalize: Normalize::None,
            k_max: DEFAULT_K_MAX,
            epsilon: 0.0,
            noise_threshold: DEFAULT_NOISE_THRESHOLD,
            min_platform: DEFAULT_MIN_PLATFORM,
            detail: Detail::Platforms,
            output: None,
            trace_output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.format, self.sigma) {
            (InputFormat::Points, None) => {
                return Err(CceError::Parameter("--sigma is required for points input".into()))
            }
            (InputFormat::Matrix | InputFormat::Routes, Some(_)) => {
                return Err(CceError::Parameter("--sigma only applies to points input".into()))
            }
            (_, Some(Sigma::Value(v))) if !(v > 0.0 && v.is_finite()) => {
                return Err(CceError::Parameter(format!("sigma must be positive, got {v}")))
            }
            _ => {}
        }
        if self.id_column && self.format != InputFormat::Points {
            return Err(CceError::Parameter("--id-column only applies to points input".into()));
        }
        if self.min_platform == 0 {
            return Err(CceError::Parameter("--min-platform must be at least 1".into()));
        }
        self.evolution().validate()
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            k_max: self.k_max,
            epsilon: self.epsilon,
        }
    }
}

impl From<RunArgs> for RunConfig {
    fn from(a: RunArgs) -> Self {
        Self {
            input: a.input,
            format: a.format,
            sigma: a.sigma,
            id_column: a.id_column,
            normalize: a.normalize,
            k_max: a.k_max,
            epsilon: a.epsilon,
            noise_threshold: a.noise_threshold,
            min_platform: a.min_platform,
            detail: a.detail,
            output: a.output,
            trace_output: a.trace_output,
        }
    }
}

/// The similarity matrix for a run and the kernel width actually used.
pub fn load_similarity(config: &RunConfig) -> Result<(SimilarityMatrix, Option<f64>)> {
    config.validate()?;
    let (s, sigma) = match config.format {
        InputFormat::Points => {
            let table = read_points_csv(&config.input, config.id_column)?;
            let sigma = match config.sigma {
                Some(Sigma::Value(v)) => v,
                Some(Sigma::Auto) => median_pairwise_distance(&table.points),
                None => unreachable!("validated"),
            };
            (gaussian_kernel(&table.points, sigma)?, Some(sigma))
        }
        InputFormat::Matrix => (read_matrix_csv(&config.input)?, None),
        InputFormat::Routes => (from_routes(&read_routes(&config.input)?), None),
    };
    let s = match config.normalize {
        Normalize::None => s,
        Normalize::Njw => njw_normalize(&s)?,
    };
    Ok((s, sigma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub order: usize,
    pub labels: Vec<String>,
    pub diagonal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub k_stop: usize,
    pub stop_reason: StopReason,
    pub n_clusters_raw: Vec<usize>,
    pub n_clusters_filtered: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub k: usize,
    pub centers: Vec<usize>,
    pub labels: Vec<usize>,
    pub n_clusters_raw: usize,
    pub n_clusters_filtered: usize,
    pub noise: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub config: RunConfig,
    /// Kernel width used for points input.
    pub sigma_used: Option<f64>,
    pub matrix: MatrixSummary,
    pub trace: TraceSummary,
    pub snapshots: Vec<SnapshotRecord>,
    pub platforms: Vec<Platform>,
    pub suggestions: Vec<Suggestion>,
    pub skipped: Vec<usize>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result document is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CceError::Input(format!("invalid result document: {e}")))
    }
}

fn filtered_counts(trace: &EvolutionTrace, noise_threshold: usize) -> Vec<usize> {
    trace
        .snapshots
        .iter()
        .map(|s| filter_noise(s, noise_threshold).cluster_count())
        .collect()
}

/// Builds the result document from an already computed trace.
pub fn build_document(
    config: &RunConfig,
    s: &SimilarityMatrix,
    sigma_used: Option<f64>,
    trace: &EvolutionTrace,
) -> ResultDocument {
    let platforms = detect_platforms(trace, config.min_platform, config.noise_threshold);
    let suggestions = suggest_counts(&platforms);
    let wanted = |k: usize| match config.detail {
        Detail::All => true,
        Detail::Platforms => platforms.iter().any(|p| p.k_start == k),
    };
    let snapshots = trace
        .snapshots
        .iter()
        .filter(|s| wanted(s.k))
        .map(|s| {
            let f = filter_noise(s, config.noise_threshold);
            SnapshotRecord {
                k: s.k,
                centers: s.centers.clone(),
                labels: s.labels.clone(),
                n_clusters_raw: s.cluster_count(),
                n_clusters_filtered: f.cluster_count(),
                noise: f.noise,
            }
        })
        .collect();
    ResultDocument {
        config: config.clone(),
        sigma_used,
        matrix: MatrixSummary {
            order: s.order(),
            labels: s.labels().to_vec(),
            diagonal: s.matrix().diagonal(),
        },
        trace: TraceSummary {
            k_stop: trace.k_stop(),
            stop_reason: trace.stop_reason,
            n_clusters_raw: trace.counts(),
            n_clusters_filtered: filtered_counts(trace, config.noise_threshold),
        },
        snapshots,
        platforms,
        suggestions,
        skipped: skipped_counts(trace).into_iter().collect(),
    }
}

/// Runs the full pipeline and returns the document with the trace it came from.
pub fn cmd_cluster(config: &RunConfig) -> Result<(ResultDocument, EvolutionTrace)> {
    let (s, sigma) = load_similarity(config)?;
    let trace = run_evolution(&s, &config.evolution())?;
    Ok((build_document(config, &s, sigma, &trace), trace))
}

/// Count-vs-k CSV with header [`TRACE_HEADER`].
pub fn trace_csv(trace: &EvolutionTrace, noise_threshold: usize) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (snap, filtered) in trace.snapshots.iter().zip(filtered_counts(trace, noise_threshold)) {
        writeln!(out, "{},{},{}", snap.k, snap.cluster_count(), filtered).unwrap();
    }
    out
}

pub fn cmd_trace(config: &RunConfig) -> Result<String> {
    let (s, _) = load_similarity(config)?;
    let trace = run_evolution(&s, &config.evolution())?;
    Ok(trace_csv(&trace, config.noise_threshold))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub input: PathBuf,
    pub status: String,
    pub report: TheoremReport,
}

pub fn cmd_verify(config: &RunConfig, k: usize) -> Result<VerifyDocument> {
    let (s, _) = load_similarity(config)?;
    let report = verify_theorem(&s, k)?;
    Ok(VerifyDocument {
        input: config.input.clone(),
        status: report.status_message(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert_eq!(parse_sigma("auto"), Ok(Sigma::Auto));
        assert_eq!(parse_sigma("0.55"), Ok(Sigma::Value(0.55)));
        assert!(parse_sigma("0").is_err());
        assert!(parse_sigma("abc").is_err());
    }

    #[test]
    fn config_rules() {
        let c = RunConfig::new("x.csv", InputFormat::Points);
        assert!(c.validate().is_err());
        let mut c = RunConfig::new("x.csv", InputFormat::Matrix);
        c.validate().unwrap();
        c.sigma = Some(Sigma::Auto);
        assert!(c.validate().is_err());
        let mut c = RunConfig::new("x.csv", InputFormat::Matrix);
        c.k_max = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::new("x.csv", InputFormat::Matrix);
        c.min_platform = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn cli_parses_flags() {
        let cli = Cli::try_parse_from([
            "cce", "cluster", "--input", "p.csv", "--format", "points", "--sigma", "auto", "--normalize", "njw",
            "--k-max", "50", "--detail", "all",
        ])
        .unwrap();
        let Command::Cluster(args) = cli.command else { panic!() };
        let c = RunConfig::from(args);
        assert_eq!(c.sigma, Some(Sigma::Auto));
        assert_eq!(c.normalize, Normalize::Njw);
        assert_eq!(c.k_max, 50);
        assert_eq!(c.noise_threshold, 2);
        assert_eq!(c.min_platform, 2);
        assert_eq!(c.detail, Detail::All);

        let cli = Cli::try_parse_from(["cce", "verify", "--input", "m.csv", "--format", "matrix"]).unwrap();
        assert!(matches!(cli.command, Command::Verify { k: 64, .. }));
    }
}
