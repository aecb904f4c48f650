//! The recovery-comparison experiment: build a structured frame and a
//! same-shape Gaussian baseline, sweep sparsity levels, and emit CSV, JSON,
//! and SVG artifacts.
//!
//! Every artifact embeds the master seed and a SHA-256 hash of the canonical
//! config serialization; identical configs reproduce identical bytes. Trial
//! sub-seeds are derived from (seed, s, trial), so both matrix kinds see the
//! same signals at each level.

use crate::analysis::{self, FrameReport};
use crate::error::{Error, Result};
use crate::frame::{build_frame, gaussian_frame, DenseMatrix, StructuredFrame};
use crate::mmio;
use crate::solver::run_level;
use crate::unitary::{self, UnitaryKind, UnitaryMatrix};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Full description of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub m: u64,
    pub k: usize,
    pub r: usize,
    pub unitary: UnitaryKind,
    /// Only read when `unitary` is `file`.
    pub unitary_file: Option<PathBuf>,
    pub s_min: usize,
    pub s_max: usize,
    pub trials: u32,
    pub seed: u64,
    pub snr_threshold_db: f64,
    pub success_threshold: f64,
    pub gaussian: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 5,
            k: 5,
            r: 1,
            unitary: UnitaryKind::Dft,
            unitary_file: None,
            s_min: 1,
            s_max: 8,
            trials: 200,
            seed: 7,
            snr_threshold_db: 100.0,
            success_threshold: 0.90,
            gaussian: true,
        }
    }
}

impl ExperimentConfig {
    /// Parse a flat key=value file mirroring the CLI flags. Blank lines and
    /// `#` comments are ignored; unknown keys are rejected.
    pub fn from_key_value_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Parse(format!("{}:{}: bad {what} '{value}'", path.display(), lineno + 1));
            match key {
                "m" => cfg.m = value.parse().map_err(|_| bad("m"))?,
                "k" => cfg.k = value.parse().map_err(|_| bad("k"))?,
                "r" => cfg.r = value.parse().map_err(|_| bad("r"))?,
                "unitary" => cfg.unitary = value.parse()?,
                "unitary_file" => cfg.unitary_file = Some(PathBuf::from(value)),
                "s_min" => cfg.s_min = value.parse().map_err(|_| bad("s_min"))?,
                "s_max" => cfg.s_max = value.parse().map_err(|_| bad("s_max"))?,
                "trials" => cfg.trials = value.parse().map_err(|_| bad("trials"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "snr_threshold_db" => {
                    cfg.snr_threshold_db = value.parse().map_err(|_| bad("snr_threshold_db"))?
                }
                "success_threshold" => {
                    cfg.success_threshold = value.parse().map_err(|_| bad("success_threshold"))?
                }
                "gaussian" => cfg.gaussian = value.parse().map_err(|_| bad("gaussian"))?,
                other => {
                    return Err(Error::Parse(format!(
                        "{}:{}: unknown key '{other}'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_min < 1 || self.s_min > self.s_max {
            return Err(Error::InvalidParams(format!(
                "need 1 <= s_min <= s_max, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParams("trials must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.success_threshold) {
            return Err(Error::InvalidParams(format!(
                "success_threshold must lie in [0, 1], got {}",
                self.success_threshold
            )));
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON serialization, hex-encoded.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve_unitary(&self) -> Result<UnitaryMatrix> {
        match self.unitary {
            UnitaryKind::File => {
                let path = self.unitary_file.as_ref().ok_or_else(|| {
                    Error::InvalidParams("unitary=file requires unitary_file".into())
                })?;
                let u = mmio::read_unitary(path, 1e-10)?;
                if u.order() != self.k {
                    return Err(Error::ShapeMismatch(format!(
                        "unitary file has order {}, expected k={}",
                        u.order(),
                        self.k
                    )));
                }
                Ok(u)
            }
            kind => unitary::generate(kind, self.k),
        }
    }
}

/// One (kind, sparsity) row of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRow {
    pub kind: String,
    pub s: usize,
    pub trials: u32,
    pub successes: u32,
    pub rate: f64,
    pub mean_snr_db: f64,
}

/// Frame metadata recorded with every experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSummary {
    pub d: usize,
    pub cols: usize,
    pub q_bases: u64,
    pub coherence: f64,
    pub coherence_bound: f64,
    pub density_nonzeros: u64,
    pub density_total: u64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub frame: FrameSummary,
    pub rows: Vec<LevelRow>,
}

impl ExperimentResult {
    /// Largest sparsity level at which `kind` reaches the success threshold,
    /// or None if it never does.
    pub fn best_level(&self, kind: &str) -> Option<usize> {
        self.rows
            .iter()
            .filter(|r| r.kind == kind && r.rate >= self.config.success_threshold)
            .map(|r| r.s)
            .max()
    }
}

/// Build the structured frame described by a config.
pub fn build_configured_frame(cfg: &ExperimentConfig) -> Result<StructuredFrame> {
    let u = cfg.resolve_unitary()?;
    build_frame(cfg.m, cfg.k, cfg.r, &u)
}

/// Run the full sweep. The structured frame is densified once; the Gaussian
/// baseline shares its shape and the master seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let frame = build_configured_frame(cfg)?;
    let report = analysis::report(&frame)?;
    let dense = frame.to_dense()?;
    let d = frame.dim();
    if cfg.s_max > d {
        return Err(Error::InvalidParams(format!(
            "s_max={} exceeds the frame dimension d={d}",
            cfg.s_max
        )));
    }

    let mut kinds: Vec<(String, DenseMatrix)> = vec![("structured".into(), dense)];
    if cfg.gaussian {
        kinds.push(("gaussian".into(), gaussian_frame(d, frame.ncols(), cfg.seed)));
    }

    let mut rows = Vec::new();
    for (kind, mat) in &kinds {
        for s in cfg.s_min..=cfg.s_max {
            let stats = run_level(mat, s, cfg.trials, cfg.seed, cfg.snr_threshold_db)?;
            rows.push(LevelRow {
                kind: kind.clone(),
                s,
                trials: stats.trials,
                successes: stats.successes,
                rate: stats.rate(),
                mean_snr_db: stats.mean_snr_db,
            });
        }
    }

    let meta = frame.meta();
    Ok(ExperimentResult {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        frame: FrameSummary {
            d,
            cols: frame.ncols(),
            q_bases: meta.q_bases,
            coherence: report.coherence,
            coherence_bound: report.coherence_bound.unwrap_or(1.0),
            density_nonzeros: report.density.nonzeros,
            density_total: report.density.total,
            alpha: meta.alpha,
        },
        rows,
    })
}

// ---------------------------------------------------------------------------
// Artifact emission
// ---------------------------------------------------------------------------

/// CSV with the per-level rows; the seed and config hash ride along as
/// trailing columns so the file stays strict RFC-4180.
pub fn to_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("kind,m,k,r,s,trials,successes,rate,mean_snr_db,seed,config_hash\n");
    let cfg = &result.config;
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.kind,
            cfg.m,
            cfg.k,
            cfg.r,
            row.s,
            row.trials,
            row.successes,
            row.rate,
            row.mean_snr_db,
            result.seed,
            result.config_hash
        ));
    }
    out
}

pub fn to_json(result: &ExperimentResult) -> String {
    serde_json::to_string_pretty(result).expect("result serializes") + "\n"
}

/// Hand-emitted SVG line plot: sparsity on x, success rate on y, one
/// polyline per matrix kind. Only levels at or above the success threshold
/// are drawn, mirroring the reporting rule of the benchmark.
pub fn to_svg(result: &ExperimentResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 440.0;
    const ML: f64 = 60.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 60.0;
    let cfg = &result.config;
    let (s_lo, s_hi) = (cfg.s_min as f64, cfg.s_max.max(cfg.s_min + 1) as f64);
    let x = |s: f64| ML + (s - s_lo) / (s_hi - s_lo) * (W - ML - MR);
    let y = |rate: f64| H - MB - rate * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str(&format!(
        "  <desc>seed={} config_hash={}</desc>\n",
        result.seed, result.config_hash
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">Recovery success rate, m={} k={} r={} ({})</text>\n",
        W / 2.0,
        cfg.m,
        cfg.k,
        cfg.r,
        cfg.unitary
    ));

    // Axes
    svg.push_str(&format!(
        "  <line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    svg.push_str(&format!(
        "  <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    for tick in 0..=4 {
        let rate = tick as f64 * 0.25;
        let yy = y(rate);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{yy}\" x2=\"{ML}\" y2=\"{yy}\" stroke=\"black\"/>\n",
            ML - 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{rate:.2}</text>\n",
            ML - 8.0,
            yy + 4.0
        ));
    }
    let s_step = (((s_hi - s_lo) / 10.0).ceil() as usize).max(1);
    let mut s = cfg.s_min;
    while s <= cfg.s_max {
        let xx = x(s as f64);
        svg.push_str(&format!(
            "  <line x1=\"{xx}\" y1=\"{}\" x2=\"{xx}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{xx}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{s}</text>\n",
            H - MB + 20.0
        ));
        s += s_step;
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">sparsity s</text>\n",
        (ML + W - MR) / 2.0,
        H - 16.0
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">success rate</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));
    // Threshold line
    let yt = y(cfg.success_threshold);
    svg.push_str(&format!(
        "  <line x1=\"{ML}\" y1=\"{yt}\" x2=\"{}\" y2=\"{yt}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
        W - MR
    ));

    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut kinds: Vec<&str> = Vec::new();
    for row in &result.rows {
        if !kinds.contains(&row.kind.as_str()) {
            kinds.push(&row.kind);
        }
    }
    for (ki, kind) in kinds.iter().enumerate() {
        let color = palette[ki % palette.len()];
        let points: Vec<String> = result
            .rows
            .iter()
            .filter(|r| r.kind == *kind && r.rate >= cfg.success_threshold)
            .map(|r| format!("{},{}", x(r.s as f64), y(r.rate)))
            .collect();
        if !points.is_empty() {
            svg.push_str(&format!(
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
                points.join(" ")
            ));
        }
        // Legend entry
        let ly = MT + 10.0 + 18.0 * ki as f64;
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            W - MR - 150.0,
            W - MR - 120.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{kind}</text>\n",
            W - MR - 112.0,
            ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Paths of the three artifacts for a given output stem.
#[derive(Debug, Clone)]
pub struct ExperimentArtifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

/// Write CSV, JSON, and SVG under `dir` with a config-derived stem.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<ExperimentArtifacts> {
    fs::create_dir_all(dir)?;
    let cfg = &result.config;
    let stem = format!("experiment_m{}_k{}_r{}_{}_seed{}", cfg.m, cfg.k, cfg.r, cfg.unitary, cfg.seed);
    let paths = ExperimentArtifacts {
        csv: dir.join(format!("{stem}.csv")),
        json: dir.join(format!("{stem}.json")),
        svg: dir.join(format!("{stem}.svg")),
    };
    fs::write(&paths.csv, to_csv(result))?;
    fs::write(&paths.json, to_json(result))?;
    fs::write(&paths.svg, to_svg(result))?;
    Ok(paths)
}
