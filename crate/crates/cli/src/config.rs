use serde::{Deserialize, Serialize};

use embedvqe::embedding::LatticeSpec;
use embedvqe::impurity::{Ansatz, BasisMode};
use embedvqe::simulator::{calibrate_noise, NoiseModel, DEFAULT_EPS1, DEFAULT_EPS2};
use embedvqe::vqe::{GradientMode, OptimizerKind, VqeOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub ansatz: AnsatzSection,
    pub optimizer: OptimizerSection,
    pub noise: NoiseSection,
    pub landscape: LandscapeSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: LatticeSection::default(),
            ansatz: AnsatzSection::default(),
            optimizer: OptimizerSection::default(),
            noise: NoiseSection::default(),
            landscape: LandscapeSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub n_c: usize,
    pub t: f64,
    /// Defaults to 40 (one site) or 32 (two sites).
    pub mesh: Option<usize>,
    /// Defaults to 200 (one site) or 300 (two sites).
    pub beta: Option<f64>,
    pub filling: f64,
    /// Explicit list of interaction strengths; overrides the range below.
    pub u_values: Option<Vec<f64>>,
    pub u_start: f64,
    pub u_stop: f64,
    pub u_step: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection {
            n_c: 1,
            t: -0.25,
            mesh: None,
            beta: None,
            filling: 0.5,
            u_values: None,
            u_start: 0.05,
            u_stop: 3.0,
            u_step: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    /// `ed`, `mr`, `mrep`, `ldca`, `hea` or `ry`.
    pub kind: String,
    pub layers: usize,
    pub cycles: usize,
    pub decomposed: bool,
    /// `original`, `exact-no` or `noization`.
    pub basis: String,
    pub noization_steps: usize,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        AnsatzSection {
            kind: "mr".into(),
            layers: 4,
            cycles: 1,
            decomposed: false,
            basis: "exact-no".into(),
            noization_steps: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub method: OptimizerKind,
    pub gradient: GradientMode,
    pub max_iter: usize,
    pub gtol: f64,
    pub seed: u64,
    /// Independent VQE runs (one trace file each) for `vqe`.
    pub n_seeds: usize,
    /// Multi-start width inside `noize`, `risb-sweep` and `landscape`.
    pub n_starts: usize,
    pub shots: Option<usize>,
    pub risb_max_iter: usize,
    pub simplex_step: f64,
    /// Precomputed `ed-reference` table used for warm starts.
    pub classical_table: Option<String>,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            method: OptimizerKind::Bfgs,
            gradient: GradientMode::Adjoint,
            max_iter: 10_000,
            gtol: 1e-8,
            seed: 0,
            n_seeds: 3,
            n_starts: 5,
            shots: None,
            risb_max_iter: 100,
            simplex_step: 0.02,
            classical_table: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// `off` or `calibrated`.
    pub mode: String,
    pub eps1: f64,
    pub eps2: f64,
    pub scale: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { mode: "off".into(), eps1: DEFAULT_EPS1, eps2: DEFAULT_EPS2, scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSection {
    /// Nodes on each side of the centre.
    pub half_width: usize,
    pub r_step: f64,
    pub lambda_step: f64,
    pub scales: Vec<f64>,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection { half_width: 3, r_step: 0.01, lambda_step: 0.01, scales: vec![0.0, 0.5, 1.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Record wall-clock times in trace files (makes reruns differ).
    pub wall_time: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into(), wall_time: false }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| bad(format!("invalid configuration: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Apply a `--noise` flag: `off`, `calibrated` or `scale=X`.
    pub fn apply_noise_flag(&mut self, flag: &str) -> Result<(), ConfigError> {
        match flag {
            "off" => self.noise.mode = "off".into(),
            "calibrated" => {
                self.noise.mode = "calibrated".into();
                self.noise.scale = 1.0;
            }
            s => {
                let x = s
                    .strip_prefix("scale=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| bad(format!("--noise expects off, calibrated or scale=X, got `{s}`")))?;
                self.noise.mode = "calibrated".into();
                self.noise.scale = x;
            }
        }
        Ok(())
    }

    pub fn u_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let l = &self.lattice;
        let grid = match &l.u_values {
            Some(v) => v.clone(),
            None => {
                if !(l.u_step > 0.0) {
                    return Err(bad("lattice.u_step must be positive"));
                }
                let n = ((l.u_stop - l.u_start) / l.u_step + 1e-9).floor();
                if n < 0.0 {
                    Vec::new()
                } else {
                    (0..=n as usize).map(|i| l.u_start + i as f64 * l.u_step).collect()
                }
            }
        };
        if grid.is_empty() {
            return Err(bad("the U grid is empty"));
        }
        if grid.iter().any(|u| !u.is_finite() || *u < 0.0) {
            return Err(bad("U values must be finite and non-negative"));
        }
        Ok(grid)
    }

    pub fn lattice(&self, u: f64) -> Result<LatticeSpec, ConfigError> {
        let l = &self.lattice;
        let base = match l.n_c {
            1 => LatticeSpec::single_site(u),
            2 => LatticeSpec::dimer(u),
            n => return Err(bad(format!("lattice.n_c must be 1 or 2, got {n}"))),
        };
        let spec = LatticeSpec {
            t: l.t,
            mesh: l.mesh.unwrap_or(base.mesh),
            beta: l.beta.unwrap_or(base.beta),
            filling: l.filling,
            ..base
        };
        spec.validate().map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }

    /// `None` selects the exact solver.
    pub fn ansatz(&self) -> Result<Option<Ansatz>, ConfigError> {
        let a = &self.ansatz;
        let n_qubits = 4 * self.lattice.n_c;
        let ansatz = match a.kind.as_str() {
            "ed" => return Ok(None),
            "mr" => Ansatz::Mr,
            "mrep" => Ansatz::Mrep { layers: a.layers },
            "ldca" => Ansatz::Ldca { cycles: a.cycles, decomposed: a.decomposed },
            "hea" => Ansatz::Hea,
            "ry" => Ansatz::ProductRy,
            k => return Err(bad(format!("unknown ansatz `{k}`"))),
        };
        ansatz.build(n_qubits).map_err(|e| bad(e.to_string()))?;
        Ok(Some(ansatz))
    }

    pub fn basis(&self) -> Result<BasisMode, ConfigError> {
        match self.ansatz.basis.as_str() {
            "original" => Ok(BasisMode::Original),
            "exact-no" => Ok(BasisMode::ExactNo),
            "noization" => Ok(BasisMode::Noization { steps: self.ansatz.noization_steps }),
            b => Err(bad(format!("unknown basis `{b}`"))),
        }
    }

    pub fn noise(&self) -> Result<Option<NoiseModel>, ConfigError> {
        match self.noise.mode.as_str() {
            "off" => Ok(None),
            "calibrated" => {
                let nm = calibrate_noise(self.noise.eps1, self.noise.eps2).map_err(|e| bad(e.to_string()))?;
                if self.noise.scale == 0.0 {
                    return Ok(None);
                }
                Ok(Some(nm.scaled(self.noise.scale).map_err(|e| bad(e.to_string()))?))
            }
            m => Err(bad(format!("unknown noise mode `{m}`"))),
        }
    }

    pub fn noise_tag(&self) -> String {
        match self.noise.mode.as_str() {
            "off" => "noiseless".into(),
            _ if self.noise.scale == 0.0 => "noiseless".into(),
            _ => format!("noise{}", self.noise.scale),
        }
    }

    pub fn vqe_options(&self) -> Result<VqeOptions, ConfigError> {
        let o = &self.optimizer;
        if o.max_iter == 0 {
            return Err(bad("optimizer.max_iter must be positive"));
        }
        Ok(VqeOptions {
            optimizer: o.method,
            gradient: o.gradient,
            max_iter: o.max_iter,
            gtol: o.gtol,
            noise: self.noise()?,
            shots: o.shots,
            ..VqeOptions::default()
        })
    }

    /// Check every tag and range up front.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.u_grid()?;
        self.lattice(0.0)?;
        self.ansatz()?;
        self.basis()?;
        self.vqe_options()?;
        if self.optimizer.n_seeds == 0 || self.optimizer.n_starts == 0 {
            return Err(bad("optimizer.n_seeds and optimizer.n_starts must be positive"));
        }
        if self.landscape.scales.is_empty() {
            return Err(bad("landscape.scales is empty"));
        }
        Ok(())
    }
}
