//! Run configuration: a TOML file with fixed sections, unknown keys rejected.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use memsplate::io::read_deflection;
use memsplate::{BcMode, BoundaryData, DeflectionProfile, ElectrostaticModel, MinimizeConfig, PhysicalParams, Shape, SolverOptions, TraceRecovery};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Flat plate with the closed-form one-dimensional potential as boundary data.
    #[serde(rename = "oneD")]
    OneD,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub nx: usize,
    pub nz1: usize,
    pub nz2: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { nx: 64, nz1: 32, nz2: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeflectionSource {
    #[default]
    Flat,
    File,
    Shape,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeflectionSection {
    pub source: DeflectionSource,
    pub path: Option<PathBuf>,
    pub shape: Option<Shape>,
    pub amplitude: f64,
    pub bc: BcMode,
    /// Relative obstacle margin.
    pub eps_gap: f64,
}

impl Default for DeflectionSection {
    fn default() -> Self {
        Self { source: DeflectionSource::Flat, path: None, shape: None, amplitude: 0.0, bc: BcMode::Clamped, eps_gap: memsplate::DEFAULT_EPS_GAP }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub recovery: TraceRecovery,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self { rel_tol: d.rel_tol, max_iter: d.max_iter, recovery: TraceRecovery::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    Derivative,
    Mms,
    Jumps,
    Monotonicity,
    Continuity,
}

impl Probe {
    pub const ALL: [Probe; 5] = [Probe::Derivative, Probe::Mms, Probe::Jumps, Probe::Monotonicity, Probe::Continuity];

    pub fn name(self) -> &'static str {
        match self {
            Probe::Derivative => "derivative",
            Probe::Mms => "mms",
            Probe::Jumps => "jumps",
            Probe::Monotonicity => "monotonicity",
            Probe::Continuity => "continuity",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub probes: Vec<Probe>,
    pub derivative_tol: f64,
    pub steps: Vec<f64>,
    pub mms_ladder: Vec<usize>,
    pub jump_ladder: Vec<usize>,
    pub pairs: usize,
    pub monotonicity_tol: f64,
    pub continuity_indices: Vec<usize>,
    pub max_slope: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            probes: Probe::ALL.to_vec(),
            derivative_tol: 1e-2,
            steps: memsplate::verify::DEFAULT_STEPS.to_vec(),
            mms_ladder: vec![16, 32, 64, 128],
            jump_ladder: vec![16, 32, 64, 128],
            pairs: 20,
            monotonicity_tol: 1e-10,
            continuity_indices: vec![2, 4, 8, 16, 32],
            max_slope: -0.9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub voltages: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { voltages: vec![0.2, 0.5, 1.0] }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub physics: PhysicalParams,
    pub mesh: MeshSection,
    pub deflection: DeflectionSection,
    pub solver: SolverSection,
    pub minimize: MinimizeConfig,
    pub verify: VerifySection,
    pub sweep: SweepSection,
}

/// Configuration after validation, with the inputs it refers to resolved.
pub struct Resolved {
    pub config: RunConfig,
    pub hash: String,
    pub base_dir: PathBuf,
}

/// A configuration problem; maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn anchored(text: &str, key: &str, msg: impl std::fmt::Display) -> ConfigError {
    match line_of(text, key) {
        Some(l) => ConfigError(format!("line {l}: `{key}`: {msg}")),
        None => ConfigError(format!("`{key}`: {msg}")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            match line {
                Some(l) => ConfigError(format!("line {l}: {}", e.message())),
                None => ConfigError(e.message().to_string()),
            }
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str) -> std::result::Result<(), ConfigError> {
        if let Err(memsplate::Error::InvalidParameter { name, reason }) = self.physics.validate() {
            return Err(anchored(text, name, reason));
        }
        if let Err(memsplate::Error::InvalidParameter { name, reason }) = self.minimize.validate() {
            let key = name.split('.').next_back().unwrap_or(name);
            return Err(anchored(text, key, reason));
        }
        for (key, v) in [("nx", self.mesh.nx), ("nz1", self.mesh.nz1), ("nz2", self.mesh.nz2)] {
            if v == 0 {
                return Err(anchored(text, key, "must be at least 1"));
            }
        }
        if !(self.solver.rel_tol > 0.0) || self.solver.max_iter == 0 {
            return Err(anchored(text, "rel_tol", "solver tolerance and iteration cap must be positive"));
        }
        if !(self.deflection.eps_gap > 0.0 && self.deflection.eps_gap < 1.0) {
            return Err(anchored(text, "eps_gap", "must lie in (0, 1)"));
        }
        match self.deflection.source {
            DeflectionSource::File if self.deflection.path.is_none() => {
                return Err(anchored(text, "source", "`file` source needs `path`"));
            }
            DeflectionSource::Shape if self.deflection.shape.is_none() => {
                return Err(anchored(text, "source", "`shape` source needs `shape`"));
            }
            _ => {}
        }
        if self.sweep.voltages.iter().any(|v| !(*v >= 0.0)) {
            return Err(anchored(text, "voltages", "voltages must be nonnegative"));
        }
        if self.verify.steps.windows(2).any(|w| w[1] >= w[0]) || self.verify.steps.iter().any(|&t| !(t > 0.0)) {
            return Err(anchored(text, "steps", "steps must be positive and strictly decreasing"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canon))
    }
}

pub fn load(path: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> std::result::Result<Resolved, ConfigError> {
    let (text, base_dir) = match path {
        Some(p) => {
            let t = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
            (t, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (String::new(), PathBuf::from(".")),
    };
    let mut config = RunConfig::parse(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(o) = out {
        config.out = Some(o.to_path_buf());
    }
    let hash = config.hash();
    Ok(Resolved { config, hash, base_dir })
}

impl Resolved {
    pub fn out_dir(&self) -> PathBuf {
        self.config.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn params(&self) -> PhysicalParams {
        self.config.physics
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions { rel_tol: self.config.solver.rel_tol, max_iter: self.config.solver.max_iter }
    }

    pub fn model_with(&self, params: PhysicalParams) -> Result<ElectrostaticModel> {
        let m = &self.config.mesh;
        let mut model = ElectrostaticModel::new(params, m.nx, m.nz1, m.nz2)
            .map_err(|e| ConfigError(e.to_string()))?
            .with_solver(self.solver());
        model.recovery = self.config.solver.recovery;
        if self.config.preset == Some(Preset::OneD) {
            model = model.with_boundary(one_d_boundary(&params));
        }
        Ok(model)
    }

    pub fn model(&self) -> Result<ElectrostaticModel> {
        self.model_with(self.params())
    }

    pub fn gap_floor(&self) -> f64 {
        self.params().gap_floor(self.config.deflection.eps_gap)
    }

    /// Initial deflection on the `nx`-element grid of the mesh.
    pub fn deflection(&self) -> Result<DeflectionProfile> {
        let d = &self.config.deflection;
        let p = self.params();
        let n = self.config.mesh.nx;
        let floor = self.gap_floor();
        let mut u = match d.source {
            DeflectionSource::Flat => DeflectionProfile::flat(p.half_width, n, d.bc, floor),
            DeflectionSource::Shape => {
                let sh = d.shape.ok_or_else(|| anyhow!("missing shape"))?;
                sh.profile(d.amplitude, p.half_width, n, floor)
            }
            DeflectionSource::File => {
                let path = self.base_dir.join(d.path.as_ref().ok_or_else(|| anyhow!("missing path"))?);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ConfigError(format!("cannot read deflection {}: {e}", path.display())))?;
                let f = read_deflection(&text, floor).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
                if (f.half_width - p.half_width).abs() > 1e-12 || (f.gap - p.gap).abs() > 1e-12 {
                    bail!(ConfigError(format!(
                        "{}: file has L = {}, H = {} but the configuration has L = {}, H = {}",
                        path.display(),
                        f.half_width,
                        f.gap,
                        p.half_width,
                        p.gap
                    )));
                }
                if f.profile.n_elem() != n {
                    bail!(ConfigError(format!("{}: {} elements but mesh.nx = {n}", path.display(), f.profile.n_elem())));
                }
                f.profile
            }
        };
        u.bc_mode = d.bc;
        u.validate().map_err(|e| ConfigError(e.to_string())).context("initial deflection")?;
        Ok(u)
    }
}

/// Piecewise-linear potential of the flat plate: flux-matched slopes in gap and plate.
pub fn one_d_boundary(p: &PhysicalParams) -> BoundaryData {
    let denom = p.sigma2 * p.gap + p.sigma1 * p.thickness;
    let (s1, s2) = (p.voltage * p.sigma2 / denom, p.voltage * p.sigma1 / denom);
    let h = p.gap;
    BoundaryData::custom(move |_, z| if z <= 0.0 { s1 * (z + h) } else { s1 * h + s2 * z })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.physics, PhysicalParams::base());
        assert_eq!(c.mesh.nx, 64);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let e = RunConfig::parse("[mesh]\nnx = 8\nnzz = 3\n").unwrap_err();
        assert!(e.0.contains("line 3") && e.0.contains("nzz"), "{e}");
        let e = RunConfig::parse("[physics]\ngap = -1.0\n").unwrap_err();
        assert!(e.0.contains("line 2") && e.0.contains("gap"), "{e}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse("seed = 1").unwrap();
        let b = RunConfig::parse("seed = 2").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::parse("seed = 1\n").unwrap().hash());
    }

    #[test]
    fn preset_and_sources_parse() {
        let c = RunConfig::parse("preset = \"oneD\"\n[deflection]\nsource = \"shape\"\nshape = \"bump\"\namplitude = -0.1\n").unwrap();
        assert_eq!(c.preset, Some(Preset::OneD));
        assert_eq!(c.deflection.shape, Some(Shape::Bump));
        assert!(RunConfig::parse("[deflection]\nsource = \"file\"\n").is_err());
        assert!(RunConfig::parse("[minimize]\nbacktrack = 2.0\n").is_err());
    }
}
