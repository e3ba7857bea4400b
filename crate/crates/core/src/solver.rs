//! Adaptive zoom loop around the QUBO sampler, the excited-state ladder,
//! multigrid lifting between grid sizes, refinement, and run statistics.
//!
//! At each zoom level the sampler's reads are decoded and ranked by the
//! Rayleigh quotient against the (projected, unshifted) operator rather than
//! by QUBO energy. The current center is always a candidate, since it is what
//! the all-zero bitstring decodes to, so a run's energy never increases
//! from one zoom level to the next.

use rayon::prelude::*;

use crate::annealer::{default_schedule, sample};
use crate::error::{Error, Result};
use crate::linalg::{HermMatrix, Operator, StateVector, SymMatrix};
use crate::models::{field_grid, ScalarFieldSpec};
use crate::qubo::{build_clock_qubo, build_eigen_qubo, decode, interleave, project_hamiltonian, Encoding};
use crate::table::{float, parse_float, parse_int, Table};
use crate::tolerances;

/// Sweeps per read used by the solver unless overridden.
pub const DEFAULT_SOLVER_SWEEPS: usize = 100;

/// What the next zoom level is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterMode {
    /// The raw decoded coefficients.
    Unnormalized,
    /// The decoded coefficients scaled to unit norm.
    Normalized,
}

/// A state pushed up the spectrum by `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: StateVector,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Bits per real unknown.
    pub bits: usize,
    pub eta: f64,
    pub num_reads: usize,
    /// Per-zoom read counts, indexed from `z_init`; missing entries use `num_reads`.
    pub reads_per_zoom: Vec<usize>,
    pub z_init: u32,
    pub z_max: u32,
    pub projections: Vec<Projection>,
    /// Starting centers; zero when absent.
    pub initial: Option<StateVector>,
    pub seed: u64,
    pub runs: usize,
    pub sweeps: usize,
    /// `None` picks the problem default: unnormalized for real, normalized for clock.
    pub center_mode: Option<CenterMode>,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            bits: 3,
            eta: 0.0,
            num_reads: 1000,
            reads_per_zoom: Vec::new(),
            z_init: 0,
            z_max: 13,
            projections: Vec::new(),
            initial: None,
            seed: 0,
            runs: 1,
            sweeps: DEFAULT_SOLVER_SWEEPS,
            center_mode: None,
        }
    }
}

impl SolveParams {
    pub fn validate(&self) -> Result<()> {
        if self.bits == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if self.z_init > self.z_max {
            return Err(Error::InvalidParameter(format!("z_init {} exceeds z_max {}", self.z_init, self.z_max)));
        }
        if self.num_reads == 0 || self.reads_per_zoom.contains(&0) {
            return Err(Error::InvalidParameter("read counts must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        if !self.eta.is_finite() || self.projections.iter().any(|p| !p.mu.is_finite()) {
            return Err(Error::NonFinite("eta or chemical potential"));
        }
        Ok(())
    }

    fn reads_at(&self, zoom: u32) -> usize {
        self.reads_per_zoom.get((zoom - self.z_init) as usize).copied().unwrap_or(self.num_reads)
    }

    /// Parameters for refinement pass `pass` (1-based): the zoom window is
    /// moved `depth` levels deeper per pass and centred on `previous`.
    pub fn refinement(&self, previous: &StateVector, pass: u32, depth: u32) -> Self {
        Self {
            z_init: self.z_init + pass * depth,
            z_max: self.z_max + pass * depth,
            initial: Some(previous.clone()),
            seed: derive_seed(self.seed, u64::MAX - pass as u64, 0),
            ..self.clone()
        }
    }
}

/// Deterministic per-(run, zoom) seed.
pub fn derive_seed(master: u64, run: u64, zoom: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ run) ^ zoom.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoomStep {
    pub zoom: u32,
    /// Rayleigh quotient of `state` against the projected operator.
    pub energy: f64,
    /// Unit norm, largest component real and positive.
    pub state: StateVector,
    /// Reads that decoded to (near) zero and were discarded.
    pub null_reads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run: usize,
    pub steps: Vec<ZoomStep>,
}

impl RunTrace {
    pub fn last(&self) -> &ZoomStep {
        self.steps.last().expect("a run has at least one zoom step")
    }
}

/// Order statistics over runs at one zoom level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub p16: f64,
    pub p84: f64,
}

impl Summary {
    /// Nearest-rank statistics: the p-th percentile of `N` sorted values is
    /// the one at 1-based rank `ceil(p·N/100)`.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "no values to summarize");
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self { min: v[0], median: nearest_rank(&v, 50.0), p16: nearest_rank(&v, 16.0), p84: nearest_rank(&v, 84.0) }
    }

    pub fn width(&self) -> f64 {
        self.p84 - self.p16
    }
}

pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoomStatistics {
    pub zoom: u32,
    pub summary: Summary,
}

/// Per-zoom statistics of the run energies.
pub fn run_statistics(runs: &[RunTrace]) -> Vec<ZoomStatistics> {
    statistics_of(runs, |s| s.energy)
}

fn statistics_of(runs: &[RunTrace], f: impl Fn(&ZoomStep) -> f64) -> Vec<ZoomStatistics> {
    let Some(first) = runs.first() else { return Vec::new() };
    (0..first.steps.len())
        .map(|k| {
            let values: Vec<f64> = runs.iter().map(|r| f(&r.steps[k])).collect();
            ZoomStatistics { zoom: first.steps[k].zoom, summary: Summary::of(&values) }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub runs: Vec<RunTrace>,
}

impl SolveTrace {
    pub fn statistics(&self) -> Vec<ZoomStatistics> {
        run_statistics(&self.runs)
    }

    /// Statistics of `|energy − reference|`.
    pub fn deviation_statistics(&self, reference: f64) -> Vec<ZoomStatistics> {
        statistics_of(&self.runs, |s| (s.energy - reference).abs())
    }

    pub fn final_energies(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.last().energy).collect()
    }

    /// Final step of the run with the lowest final energy (earliest run on ties).
    pub fn best(&self) -> &ZoomStep {
        self.runs
            .iter()
            .map(RunTrace::last)
            .reduce(|a, b| if b.energy < a.energy { b } else { a })
            .expect("a trace has at least one run")
    }

    fn is_complex(&self) -> bool {
        self.runs.iter().flat_map(|r| &r.steps).any(|s| !s.state.is_real())
    }

    /// Columns `run,zoom,energy,wf_0..wf_{n-1}`; complex traces use
    /// `wf_k_re,wf_k_im` pairs.
    pub fn to_table(&self) -> Table {
        let complex = self.is_complex();
        let dim = self.runs.first().map_or(0, |r| r.last().state.dim());
        let mut header = vec!["run".to_string(), "zoom".into(), "energy".into()];
        for k in 0..dim {
            if complex {
                header.push(format!("wf_{k}_re"));
                header.push(format!("wf_{k}_im"));
            } else {
                header.push(format!("wf_{k}"));
            }
        }
        let mut t = Table::new(header);
        for run in &self.runs {
            for step in &run.steps {
                let mut row = vec![run.run.to_string(), step.zoom.to_string(), float(step.energy)];
                for k in 0..dim {
                    row.push(float(step.state.re()[k]));
                    if complex {
                        row.push(float(step.state.im()[k]));
                    }
                }
                t.push(row);
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    /// Inverse of [`to_csv`](Self::to_csv). Null-read counts are not stored and come back as 0.
    pub fn from_csv(text: &str) -> Result<Self> {
        let t = Table::from_csv(text)?;
        if t.header.len() < 3 || t.header[..3] != ["run", "zoom", "energy"] {
            return Err(Error::Parse("expected columns run,zoom,energy,...".into()));
        }
        let complex = t.header.get(3).is_some_and(|h| h.ends_with("_re"));
        let mut runs: Vec<RunTrace> = Vec::new();
        for row in &t.rows {
            let run: usize = parse_int(&row[0])?;
            let values = row[3..].iter().map(|s| parse_float(s)).collect::<Result<Vec<f64>>>()?;
            let state = if complex {
                StateVector::new(values.iter().step_by(2).copied().collect(), values.iter().skip(1).step_by(2).copied().collect())?
            } else {
                StateVector::from_real(values)
            };
            let step = ZoomStep { zoom: parse_int(&row[1])?, energy: parse_float(&row[2])?, state, null_reads: 0 };
            match runs.last_mut() {
                Some(r) if r.run == run => r.steps.push(step),
                _ => runs.push(RunTrace { run, steps: vec![step] }),
            }
        }
        Ok(Self { runs })
    }
}

/// The two objective families the zoom loop understands.
#[derive(Clone, Copy)]
enum Target<'a> {
    Real(&'a SymMatrix),
    Complex(&'a HermMatrix),
}

impl Target<'_> {
    fn dim(&self) -> usize {
        match self {
            Target::Real(h) => h.dim(),
            Target::Complex(c) => c.dim(),
        }
    }

    fn unknowns(&self) -> usize {
        match self {
            Target::Real(h) => h.dim(),
            Target::Complex(c) => 2 * c.dim(),
        }
    }

    fn centers_of(&self, v: &StateVector) -> Vec<f64> {
        match self {
            Target::Real(_) => v.re().to_vec(),
            Target::Complex(_) => interleave(v),
        }
    }

    fn state_of(&self, flat: Vec<f64>) -> StateVector {
        match self {
            Target::Real(_) => StateVector::from_real(flat),
            Target::Complex(_) => crate::qubo::deinterleave(&flat),
        }
    }

    /// `<v|M|v> / <v|v>`.
    fn rayleigh(&self, v: &StateVector) -> f64 {
        let e = match self {
            Target::Real(h) => Operator::expectation(*h, v),
            Target::Complex(c) => Operator::expectation(*c, v),
        };
        e.re / v.norm_sqr()
    }

    fn default_mode(&self) -> CenterMode {
        match self {
            Target::Real(_) => CenterMode::Unnormalized,
            Target::Complex(_) => CenterMode::Normalized,
        }
    }
}

struct Candidate {
    energy: f64,
    bits: Vec<u8>,
    raw: Vec<f64>,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.energy < other.energy - tolerances::ENERGY_TIE
            || (self.energy <= other.energy + tolerances::ENERGY_TIE && self.bits < other.bits)
    }
}

fn run_once(target: Target, shifted: Target, params: &SolveParams, run: usize) -> Result<RunTrace> {
    let n_vars = params.bits * target.unknowns();
    let mode = params.center_mode.unwrap_or_else(|| target.default_mode());
    let mut centers = match &params.initial {
        Some(v) => target.centers_of(v),
        None => vec![0.0; target.unknowns()],
    };
    let mut steps = Vec::new();
    for zoom in params.z_init..=params.z_max {
        let enc = Encoding::new(params.bits, zoom, centers.clone())?;
        let q = match shifted {
            Target::Real(h) => build_eigen_qubo(h, &enc)?,
            Target::Complex(c) => build_clock_qubo(c, &enc)?,
        };
        let schedule = default_schedule(&q)?.with_sweeps(params.sweeps)?;
        let reads = sample(&q, params.reads_at(zoom), &schedule, derive_seed(params.seed, run as u64, zoom as u64))?;

        let center_state = target.state_of(centers.clone());
        let mut best = (center_state.norm() >= tolerances::NULL_NORM).then(|| Candidate {
            energy: target.rayleigh(&center_state),
            bits: vec![0; n_vars],
            raw: centers.clone(),
        });
        let mut null_reads = 0;
        for read in &reads {
            let raw = decode(&read.bits, &enc)?;
            let v = target.state_of(raw.clone());
            if v.norm() < tolerances::NULL_NORM {
                null_reads += read.multiplicity;
                continue;
            }
            let cand = Candidate { energy: target.rayleigh(&v), bits: read.bits.clone(), raw };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
        let best = best.ok_or(Error::NullSolution { zoom })?;
        let state = target.state_of(best.raw.clone()).normalized()?.phase_aligned();
        centers = match mode {
            CenterMode::Unnormalized => best.raw,
            CenterMode::Normalized => target.centers_of(&state),
        };
        steps.push(ZoomStep { zoom, energy: best.energy, state, null_reads });
    }
    Ok(RunTrace { run, steps })
}

fn solve(target: Target, params: &SolveParams) -> Result<SolveTrace> {
    params.validate()?;
    if let Some(v) = &params.initial {
        if v.dim() != target.dim() {
            return Err(Error::DimensionMismatch { expected: target.dim(), got: v.dim() });
        }
        if matches!(target, Target::Real(_)) && !v.is_real() {
            return Err(Error::InvalidParameter("initial centers of a real problem must be real".into()));
        }
    }
    let shifted_real;
    let shifted_complex;
    let shifted = match target {
        Target::Real(h) => {
            shifted_real = h.shifted(-params.eta);
            Target::Real(&shifted_real)
        }
        Target::Complex(c) => {
            shifted_complex = c.shifted(-params.eta);
            Target::Complex(&shifted_complex)
        }
    };
    let runs = (0..params.runs)
        .into_par_iter()
        .map(|run| run_once(target, shifted, params, run))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveTrace { runs })
}

/// Zoom loop for one eigenstate of a real symmetric `h`, with the
/// projections in `params` added first.
pub fn solve_state(h: &SymMatrix, params: &SolveParams) -> Result<SolveTrace> {
    if !h.is_finite() {
        return Err(Error::NonFinite("Hamiltonian"));
    }
    let (states, mus): (Vec<StateVector>, Vec<f64>) =
        params.projections.iter().map(|p| (p.state.clone(), p.mu)).unzip();
    let projected = project_hamiltonian(h, &states, &mus)?;
    solve(Target::Real(&projected), params)
}

/// Zoom loop on a Hermitian operator through the complex QUBO.
pub fn solve_hermitian(c: &HermMatrix, params: &SolveParams) -> Result<SolveTrace> {
    if !params.projections.is_empty() {
        return Err(Error::InvalidParameter("projections are only supported for real problems".into()));
    }
    if c.re().iter().chain(c.im()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("operator"));
    }
    solve(Target::Complex(c), params)
}

/// Lowest `etas.len()` states, each pushed up by its `mus` entry before the
/// next is solved. `starts[k]`, when given, centres state `k`.
pub fn solve_spectrum_from(
    h: &SymMatrix,
    etas: &[f64],
    mus: &[f64],
    params: &SolveParams,
    starts: Option<&[StateVector]>,
) -> Result<Vec<SolveTrace>> {
    if etas.is_empty() {
        return Err(Error::InvalidParameter("need at least one state".into()));
    }
    if mus.len() + 1 < etas.len() {
        return Err(Error::DimensionMismatch { expected: etas.len() - 1, got: mus.len() });
    }
    if let Some(s) = starts {
        if s.len() != etas.len() {
            return Err(Error::DimensionMismatch { expected: etas.len(), got: s.len() });
        }
    }
    let mut projections = params.projections.clone();
    let mut traces = Vec::with_capacity(etas.len());
    for (k, &eta) in etas.iter().enumerate() {
        let p = SolveParams {
            eta,
            projections: projections.clone(),
            initial: starts.map(|s| s[k].clone()).or_else(|| params.initial.clone().filter(|_| k == 0)),
            seed: derive_seed(params.seed, k as u64, u64::MAX),
            ..params.clone()
        };
        let trace = solve_state(h, &p)?;
        if k + 1 < etas.len() {
            projections.push(Projection { state: trace.best().state.clone(), mu: mus[k] });
        }
        traces.push(trace);
    }
    Ok(traces)
}

pub fn solve_spectrum(h: &SymMatrix, n_states: usize, etas: &[f64], mus: &[f64], params: &SolveParams) -> Result<Vec<SolveTrace>> {
    if etas.len() != n_states {
        return Err(Error::DimensionMismatch { expected: n_states, got: etas.len() });
    }
    solve_spectrum_from(h, etas, mus, params, None)
}

/// Reruns the zoom loop from `previous` with `params.z_init > 0`.
pub fn refine(h: &SymMatrix, previous: &StateVector, params: &SolveParams) -> Result<SolveTrace> {
    check_refinement(previous, params)?;
    solve_state(h, &SolveParams { initial: Some(previous.clone()), ..params.clone() })
}

/// [`refine`] for Hermitian operators.
pub fn refine_hermitian(c: &HermMatrix, previous: &StateVector, params: &SolveParams) -> Result<SolveTrace> {
    check_refinement(previous, params)?;
    solve_hermitian(c, &SolveParams { initial: Some(previous.clone()), ..params.clone() })
}

fn check_refinement(previous: &StateVector, params: &SolveParams) -> Result<()> {
    if params.z_init == 0 {
        return Err(Error::InvalidParameter("refinement needs z_init > 0".into()));
    }
    if previous.norm() < tolerances::NULL_NORM {
        return Err(Error::ZeroNorm);
    }
    Ok(())
}

/// Natural cubic spline through `(x, y)` with strictly increasing `x`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::DimensionMismatch { expected: n, got: y.len() });
        }
        if n < 2 || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("spline knots must be at least two increasing points".into()));
        }
        // Second derivatives m with m_0 = m_{n-1} = 0, by the Thomas algorithm.
        let mut m = vec![0.0; n];
        if n > 2 {
            let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
            }
            for i in 1..k {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * h[i];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Interpolates a coarse-grid state onto a grid with twice the points over
/// the same field range and renormalizes.
pub fn multigrid_lift(coarse: &StateVector, coarse_spec: &ScalarFieldSpec, fine_spec: &ScalarFieldSpec) -> Result<StateVector> {
    if fine_spec.n_s != 2 * coarse_spec.n_s || fine_spec.phi_max != coarse_spec.phi_max {
        return Err(Error::InvalidParameter(format!(
            "fine grid must have twice the points of the coarse grid over the same range (got {} and {})",
            coarse_spec.n_s, fine_spec.n_s
        )));
    }
    if coarse.dim() != coarse_spec.n_s {
        return Err(Error::DimensionMismatch { expected: coarse_spec.n_s, got: coarse.dim() });
    }
    let xc = field_grid(coarse_spec)?.phi;
    let xf = field_grid(fine_spec)?.phi;
    let re = CubicSpline::natural(&xc, coarse.re())?;
    let im = CubicSpline::natural(&xc, coarse.im())?;
    let lifted = StateVector::new(xf.iter().map(|&t| re.eval(t)).collect(), xf.iter().map(|&t| im.eval(t)).collect())?;
    lifted.normalized()
}
