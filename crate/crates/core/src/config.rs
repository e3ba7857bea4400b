//! JSON run configuration for the command-line tool.
//!
//! Every field has a default, so `{}` is a valid configuration (the harmonic
//! oscillator ground state on a 16→32→64 multigrid chain). Unknown keys are
//! rejected at every level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{NeutrinoSpec, Parity, ScalarFieldSpec};
use crate::solver::{CenterMode, SolveParams};

/// Coarsest grid of the default multigrid chain.
pub const MIN_COARSE_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum System {
    #[default]
    Ho,
    Aho,
    Doublewell,
    Su3,
    Neutrino,
}

impl System {
    pub fn is_scalar(self) -> bool {
        matches!(self, System::Ho | System::Aho | System::Doublewell)
    }

    /// Reference digitization for each scalar system.
    pub fn default_scalar(self) -> ScalarFieldSpec {
        match self {
            System::Aho => ScalarFieldSpec { m0_sq: 1.0, lambda: 32.0, phi_max: 2.6, n_s: 64 },
            System::Doublewell => ScalarFieldSpec { m0_sq: -4.0, lambda: 1.0, phi_max: 9.0, n_s: 32 },
            _ => ScalarFieldSpec::harmonic(5.0, 64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spectrum,
    Evolve,
    Oracle,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which parity sectors of a scalar Hamiltonian to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ParityChoice {
    #[default]
    Full,
    Even,
    Odd,
    Both,
}

impl ParityChoice {
    pub fn sectors(self) -> Vec<Option<Parity>> {
        match self {
            ParityChoice::Full => vec![None],
            ParityChoice::Even => vec![Some(Parity::Even)],
            ParityChoice::Odd => vec![Some(Parity::Odd)],
            ParityChoice::Both => vec![Some(Parity::Even), Some(Parity::Odd)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaquetteConfig {
    pub g: f64,
}

impl Default for PlaquetteConfig {
    fn default() -> Self {
        Self { g: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeutrinoConfig {
    pub n_sites: usize,
    pub theta_v: f64,
    pub zeta: f64,
    pub kappa: f64,
    /// Per-site one-body strengths; empty means the monochromatic `2κ`.
    pub delta: Vec<f64>,
}

impl Default for NeutrinoConfig {
    fn default() -> Self {
        let s = NeutrinoSpec::four_neutrino_beam();
        Self { n_sites: s.n_sites, theta_v: s.theta_v, zeta: s.zeta, kappa: s.kappa, delta: Vec::new() }
    }
}

impl NeutrinoConfig {
    pub fn spec(&self) -> NeutrinoSpec {
        if self.delta.is_empty() {
            NeutrinoSpec::monochromatic(self.n_sites, self.theta_v, self.zeta, self.kappa)
        } else {
            NeutrinoSpec {
                n_sites: self.n_sites,
                theta_v: self.theta_v,
                zeta: self.zeta,
                kappa: self.kappa,
                delta: self.delta.clone(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub bits: usize,
    /// Shift for a single state; ignored when `etas` is given.
    pub eta: Option<f64>,
    /// One shift per state. Empty: lowest levels of the coarsest grid plus 0.01.
    pub etas: Vec<f64>,
    pub reads: usize,
    /// Per-zoom read counts starting at `z_init`; empty means constant `reads`.
    pub reads_per_zoom: Vec<usize>,
    pub runs: usize,
    pub z_init: u32,
    pub z_max: u32,
    /// Chemical potential per solved state; empty means 10 for every state.
    pub mus: Vec<f64>,
    pub sweeps: usize,
    pub seed: u64,
    pub center_mode: Option<CenterMode>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = SolveParams::default();
        Self {
            bits: p.bits,
            eta: None,
            etas: Vec::new(),
            reads: p.num_reads,
            reads_per_zoom: Vec::new(),
            runs: 20,
            z_init: p.z_init,
            z_max: p.z_max,
            mus: Vec::new(),
            sweeps: p.sweeps,
            seed: 0,
            center_mode: None,
        }
    }
}

impl SolverConfig {
    pub fn params(&self) -> SolveParams {
        SolveParams {
            bits: self.bits,
            eta: self.eta.unwrap_or(0.0),
            num_reads: self.reads,
            reads_per_zoom: self.reads_per_zoom.clone(),
            z_init: self.z_init,
            z_max: self.z_max,
            projections: Vec::new(),
            initial: None,
            seed: self.seed,
            runs: self.runs,
            sweeps: self.sweeps,
            center_mode: self.center_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub n_states: usize,
    /// Grid sizes solved in order, each twice the previous. When absent the
    /// chain halves down from `n_s` to 16 (a single grid for parity sectors
    /// and the double well).
    pub multigrid: Option<Vec<usize>>,
    /// Bits per coefficient at each stage; missing entries use `solver.bits`.
    pub bits_per_stage: Vec<usize>,
    /// First zoom level at each stage; missing entries use `solver.z_init`.
    pub z_init_per_stage: Vec<u32>,
    pub parity: ParityChoice,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            n_states: 1,
            multigrid: None,
            bits_per_stage: vec![3, 3, 2],
            z_init_per_stage: vec![0, 4, 4],
            parity: ParityChoice::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dts: Vec<f64>,
    pub n_t: usize,
    /// Refinement passes after the first solve.
    pub refinement: u32,
    /// Zoom levels the window moves deeper per refinement pass.
    pub refine_depth: u32,
    /// Dense grid for the exact reference curves.
    pub oracle_t_max: f64,
    pub oracle_points: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { dts: vec![0.2], n_t: 3, refinement: 0, refine_depth: 7, oracle_t_max: 3.0, oracle_points: 61 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub eta: Vec<f64>,
    pub reads: Vec<usize>,
    pub bits: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepParam {
    Eta,
    Reads,
    Bits,
}

impl SweepConfig {
    /// The single swept parameter and its values.
    pub fn swept(&self) -> Result<(SweepParam, Vec<f64>)> {
        let given: Vec<(SweepParam, Vec<f64>)> = [
            (SweepParam::Eta, self.eta.clone()),
            (SweepParam::Reads, self.reads.iter().map(|&r| r as f64).collect()),
            (SweepParam::Bits, self.bits.iter().map(|&b| b as f64).collect()),
        ]
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .collect();
        match given.as_slice() {
            [one] => Ok(one.clone()),
            [] => Err(Error::InvalidParameter("sweep needs one of eta, reads or bits".into())),
            _ => Err(Error::InvalidParameter("sweep accepts exactly one swept parameter".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), format: Format::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: System,
    /// `oracle` skips the sampler; otherwise it must match the subcommand.
    pub mode: Option<Mode>,
    /// Scalar field parameters; the system's reference values when absent.
    pub scalar: Option<ScalarFieldSpec>,
    pub plaquette: PlaquetteConfig,
    pub neutrino: NeutrinoConfig,
    pub solver: SolverConfig,
    pub spectrum: SpectrumConfig,
    pub evolve: EvolveConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scalar_spec(&self) -> ScalarFieldSpec {
        self.scalar.unwrap_or_else(|| self.system.default_scalar())
    }

    /// Grid sizes of the multigrid chain.
    pub fn stages(&self) -> Vec<usize> {
        if let Some(chain) = &self.spectrum.multigrid {
            return chain.clone();
        }
        let mut n = self.scalar_spec().n_s;
        let mut chain = vec![n];
        if self.system != System::Doublewell && self.spectrum.parity == ParityChoice::Full {
            while n.is_multiple_of(2) && n / 2 >= MIN_COARSE_GRID {
                n /= 2;
                chain.push(n);
            }
        }
        chain.reverse();
        chain
    }

    /// The configuration with system-dependent defaults written out.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.system.is_scalar() {
            c.scalar = Some(self.scalar_spec());
            c.spectrum.multigrid = Some(self.stages());
        }
        c
    }

    pub fn bits_at(&self, stage: usize) -> usize {
        self.spectrum.bits_per_stage.get(stage).copied().unwrap_or(self.solver.bits)
    }

    pub fn z_init_at(&self, stage: usize) -> u32 {
        self.spectrum.z_init_per_stage.get(stage).copied().unwrap_or(self.solver.z_init)
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        self.solver.params().validate()?;
        if self.system.is_scalar() {
            let spec = self.scalar_spec();
            spec.validate()?;
            let stages = self.stages();
            if stages.is_empty() || stages.iter().any(|&n| n < 2) {
                return bad("multigrid stages need at least two grid points".into());
            }
            if stages.windows(2).any(|w| w[1] != 2 * w[0]) {
                return bad(format!("each multigrid stage must double the previous one: {stages:?}"));
            }
            if self.spectrum.parity != ParityChoice::Full {
                if stages.len() > 1 {
                    return bad("parity sectors are solved on a single grid; drop the multigrid chain".into());
                }
                if !stages[0].is_multiple_of(2) {
                    return bad("parity sectors need an even n_s".into());
                }
            }
            if self.spectrum.bits_per_stage.contains(&0) {
                return bad("bits per stage must be positive".into());
            }
            if (0..stages.len()).any(|i| self.z_init_at(i) > self.solver.z_max) {
                return bad("a stage starts past z_max".into());
            }
            if self.spectrum.n_states == 0 {
                return bad("n_states must be at least 1".into());
            }
            if !self.solver.etas.is_empty() && self.solver.etas.len() != self.spectrum.n_states {
                return bad(format!("{} etas given for {} states", self.solver.etas.len(), self.spectrum.n_states));
            }
            if !self.solver.mus.is_empty() && self.solver.mus.len() + 1 < self.spectrum.n_states {
                return bad("need a chemical potential for every state but the last".into());
            }
        }
        match self.system {
            System::Su3 if self.plaquette.g == 0.0 || !self.plaquette.g.is_finite() => {
                return bad("plaquette coupling must be nonzero".into())
            }
            System::Neutrino => self.neutrino.spec().validate()?,
            _ => {}
        }
        if self.evolve.n_t < 2 {
            return bad("evolve.n_t must be at least 2".into());
        }
        if self.evolve.dts.is_empty() || self.evolve.dts.iter().any(|d| !d.is_finite() || *d <= 0.0) {
            return bad("evolve.dts must be a nonempty list of positive steps".into());
        }
        if self.evolve.refinement > 0 && self.evolve.refine_depth == 0 {
            return bad("evolve.refine_depth must be positive".into());
        }
        if self.evolve.oracle_points < 2 || !(self.evolve.oracle_t_max > 0.0) {
            return bad("oracle grid needs at least two points and a positive t_max".into());
        }
        if self.sweep.reads.contains(&0) || self.sweep.bits.contains(&0) {
            return bad("swept reads and bits must be positive".into());
        }
        Ok(())
    }
}
