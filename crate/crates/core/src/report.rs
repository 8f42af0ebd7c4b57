//! Report emission: CSV curves, JSON reports, certificates, run manifests.
//!
//! Every writer formats deterministically, so identical runs produce
//! byte-identical files; the manifest records a sha256 digest per artifact.

use crate::config::RunConfig;
use crate::params::{LadderReport, SeriesReport};
use crate::sieve::{DyadicCell, StageStats, SurvivorState};
use crate::validate::{BudgetReport, DimensionEstimate, LemmaReport};
use crate::witness::{DyadicRational, ScoreRow, WitnessCertificate};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report: cannot write `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report: {0}")]
    Encode(String),
    #[error("report: certificate field `{0}` is malformed")]
    Certificate(&'static str),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| ReportError::Encode(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// `n,l_n,delta_n,cells_removed,survivor_measure`
pub fn write_stats_csv(path: &Path, stats: &[StageStats]) -> Result<(), ReportError> {
    let mut out = String::from("n,l_n,delta_n,cells_removed,survivor_measure\n");
    for s in stats {
        let measure = s.survivor_measure.numer().to_f64_lossy()
            / s.survivor_measure.denom().to_f64_lossy();
        out.push_str(&format!(
            "{},{},{:.12e},{},{:.12e}\n",
            s.n, s.level, s.delta, s.cells_removed, measure
        ));
    }
    write_text(path, &out)
}

trait F64Lossy {
    fn to_f64_lossy(&self) -> f64;
}

impl F64Lossy for num_bigint::BigInt {
    fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::INFINITY)
    }
}

/// `n,score_lower_bound,decimal` — exact rationals first, decimals alongside.
pub fn write_scores_csv(path: &Path, scores: &[ScoreRow]) -> Result<(), ReportError> {
    let mut out = String::from("n,score_lower_bound,decimal\n");
    for row in scores {
        let dec = row.score_lower.numer().to_f64_lossy() / row.score_lower.denom().to_f64_lossy();
        out.push_str(&format!("{},{},{:.12e}\n", row.n, row.score_lower, dec));
    }
    write_text(path, &out)
}

/// Serialized witness certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub alpha: AlphaDoc,
    pub n_from: u64,
    pub n_to: u64,
    /// Exact rational `p/q`.
    pub min_score: String,
    pub min_score_decimal: f64,
    pub argmin_n: u64,
    pub target_1_over_c: TargetDoc,
    pub verdict: bool,
    pub scores_csv_path: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaDoc {
    pub num: String,
    pub level: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetDoc {
    pub lo: f64,
    pub hi: f64,
}

impl CertificateDoc {
    pub fn from_certificate(cert: &WitnessCertificate, scores_csv: Option<String>) -> Self {
        let dec =
            cert.min_score.numer().to_f64_lossy() / cert.min_score.denom().to_f64_lossy();
        CertificateDoc {
            alpha: AlphaDoc {
                num: cert.alpha.num().to_string(),
                level: cert.alpha.level(),
            },
            n_from: cert.n_from,
            n_to: cert.n_to,
            min_score: cert.min_score.to_string(),
            min_score_decimal: dec,
            argmin_n: cert.argmin_n,
            target_1_over_c: TargetDoc {
                lo: cert.target.lo().to_f64(),
                hi: cert.target.hi().to_f64(),
            },
            verdict: cert.verdict,
            scores_csv_path: scores_csv,
        }
    }

    pub fn parse_alpha(&self) -> Result<DyadicRational, ReportError> {
        let num: BigUint = self
            .alpha
            .num
            .parse()
            .map_err(|_| ReportError::Certificate("alpha.num"))?;
        DyadicRational::new(num, self.alpha.level)
            .map_err(|_| ReportError::Certificate("alpha.level"))
    }

    pub fn read(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| ReportError::Encode(e.to_string()))
    }
}

/// Survivor snapshot: window + run list, JSON with string-encoded indices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurvivorsDoc {
    pub window: CellDoc,
    pub level: u32,
    pub processed_up_to: u64,
    pub runs: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellDoc {
    pub level: u32,
    pub index: String,
}

impl From<&DyadicCell> for CellDoc {
    fn from(c: &DyadicCell) -> Self {
        CellDoc { level: c.level, index: c.index.to_string() }
    }
}

impl SurvivorsDoc {
    pub fn from_state(state: &SurvivorState) -> Self {
        SurvivorsDoc {
            window: state.window().into(),
            level: state.level(),
            processed_up_to: state.processed_up_to(),
            runs: state
                .survivors()
                .runs()
                .iter()
                .map(|&(lo, hi)| [lo.to_string(), hi.to_string()])
                .collect(),
        }
    }
}

/// Parameter-phase report (`params_report.json`).
#[derive(Clone, Debug, Serialize)]
pub struct ParamsReportDoc {
    /// Logarithms are natural throughout.
    pub log_convention: &'static str,
    pub gamma: String,
    pub c_mode: String,
    pub c_lo: f64,
    pub c_hi: f64,
    pub inv_c: f64,
    pub h_mode: String,
    pub n_start: u64,
    pub eps2: String,
    pub v: String,
    pub ladder: Vec<u64>,
    pub ladder_report: LadderReport,
    pub series: SeriesReport,
    pub delta_table: Vec<DeltaRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaRow {
    pub n: u64,
    pub delta: f64,
    pub level: u32,
}

/// Validation-phase report (`validation_report.json`): one object per lemma.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReportDoc<L1, L2, L3> {
    pub lemma1: LemmaReport<L1>,
    pub lemma2: LemmaReport<L2>,
    pub lemma3: LemmaReport<L3>,
    pub budget: BudgetReport,
    pub eggleston: DimensionEstimate,
}

/// Run manifest: config echo, version, timings, file inventory with digests.
pub struct ManifestBuilder {
    lines: Vec<String>,
    files: Vec<(PathBuf, String)>,
}

impl ManifestBuilder {
    pub fn new(config: &RunConfig, command: &str) -> Self {
        let mut lines = Vec::new();
        lines.push(format!("artifact_version = {}", env!("CARGO_PKG_VERSION")));
        lines.push(format!("command = {command}"));
        lines.push("[config]".into());
        for (k, v) in config.echo() {
            lines.push(format!("{k} = {v}"));
        }
        ManifestBuilder { lines, files: Vec::new() }
    }

    pub fn timing(&mut self, phase: &str, seconds: f64) {
        self.lines.push(format!("wall_clock.{phase} = {seconds:.3}s"));
    }

    pub fn file(&mut self, path: &Path) -> Result<(), ReportError> {
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        let digest = Sha256::digest(&bytes);
        self.files.push((path.to_path_buf(), format!("{digest:x}")));
        Ok(())
    }

    pub fn write(self, path: &Path) -> Result<(), ReportError> {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("[files]\n");
        for (file, digest) in &self.files {
            let name = file
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| file.display().to_string());
            out.push_str(&format!("{name} sha256={digest}\n"));
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(path))?;
        }
        let mut f = std::fs::File::create(path).map_err(io_err(path))?;
        f.write_all(out.as_bytes()).map_err(io_err(path))
    }
}
