//! Subcommand implementations behind the `aqae` binary.
//!
//! Each command validates its configuration, runs, and writes CSV or JSON
//! files into the output directory. Progress and logical-qubit counts go to
//! the supplied log writer.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::annealer::{brute_force, default_schedule, sample};
use crate::clock::{evolve_problem, exact_history, exact_states, refine_evolution, ClockProblem, Evolution};
use crate::config::{Format, Mode, RunConfig, SweepParam, System};
use crate::error::Error;
use crate::linalg::{eigh, spectrum, HermMatrix, StateVector, SymMatrix};
use crate::models::{
    beam_flavors, flavor_state, neutrino_hamiltonian, parity_project, scalar_site_hamiltonian,
    su3_plaquette_hamiltonian, Parity, ScalarFieldSpec,
};
use crate::observables::{
    electric_energy, entanglement_entropy, flavor_probability, log_negativity, persistence, ObservableSeries,
};
use crate::qubo::{build_eigen_qubo, decode, real_objective, Encoding, QuboInstance};
use crate::solver::{multigrid_lift, solve_spectrum_from, solve_state, SolveParams, SolveTrace, Summary, ZoomStatistics};
use crate::table::{float, Table};

/// Added to a reference level to get the default shift `η`.
pub const ETA_MARGIN: f64 = 0.01;
/// Chemical potential used when none is configured.
pub const DEFAULT_MU: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Collects the files a command writes.
pub struct Output {
    dir: PathBuf,
    format: Format,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: impl AsRef<Path>, format: Format) -> CliResult<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, format, written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &Table) -> CliResult<()> {
        if self.format == Format::Csv {
            self.write(&format!("{name}.csv"), &table.to_csv())?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> CliResult<()> {
        if self.format == Format::Json {
            let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
            self.write(&format!("{name}.json"), &text)?;
        }
        Ok(())
    }
}

fn config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Whether the run skips the sampler, after checking `mode` fits the subcommand.
fn oracle_only(cfg: &RunConfig, expected: Mode) -> CliResult<bool> {
    match cfg.mode {
        None => Ok(false),
        Some(Mode::Oracle) if expected != Mode::Sweep => Ok(true),
        Some(m) if m == expected => Ok(false),
        Some(m) => Err(CliError::Config(format!("mode {m:?} does not fit the {expected:?} subcommand"))),
    }
}

fn stats_json(stats: &[ZoomStatistics]) -> Value {
    stats
        .iter()
        .map(|s| json!({"zoom": s.zoom, "min": s.summary.min, "median": s.summary.median, "lo68": s.summary.p16, "hi68": s.summary.p84}))
        .collect()
}

fn trace_json(trace: &SolveTrace) -> Value {
    trace
        .runs
        .iter()
        .map(|r| {
            let steps: Vec<Value> = r
                .steps
                .iter()
                .map(|s| json!({"zoom": s.zoom, "energy": s.energy, "null_reads": s.null_reads, "re": s.state.re(), "im": s.state.im()}))
                .collect();
            json!({"run": r.run, "steps": steps})
        })
        .collect()
}

fn series_json(s: &ObservableSeries) -> Value {
    json!({"label": s.label, "t": s.times, "value": s.values, "lo68": s.lo68, "hi68": s.hi68})
}

fn parity_name(p: Option<Parity>) -> &'static str {
    match p {
        None => "full",
        Some(Parity::Even) => "even",
        Some(Parity::Odd) => "odd",
    }
}

fn scalar_hamiltonian(spec: &ScalarFieldSpec, sector: Option<Parity>) -> crate::Result<SymMatrix> {
    let h = scalar_site_hamiltonian(spec)?;
    match sector {
        Some(p) => parity_project(&h, p),
        None => Ok(h),
    }
}

fn require_scalar(cfg: &RunConfig) -> CliResult<()> {
    if cfg.system.is_scalar() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{:?} is not a scalar field system", cfg.system)))
    }
}

/// Lowest `n` levels of the scalar Hamiltonian, optionally annealed along the multigrid chain.
pub fn run_spectrum(cfg: &RunConfig, out: &mut Output, log: &mut dyn Write) -> CliResult<()> {
    require_scalar(cfg)?;
    cfg.validate().map_err(config_error)?;
    let oracle = oracle_only(cfg, Mode::Spectrum)?;
    let spec = cfg.scalar_spec();
    let n = cfg.spectrum.n_states;
    let mus = if cfg.solver.mus.is_empty() { vec![DEFAULT_MU; n - 1] } else { cfg.solver.mus.clone() };
    let mut summary = Table::new(["n_s", "parity", "state", "logical_qubits", "exact", "min", "median", "lo68", "hi68"]);
    let mut stages_json = Vec::new();
    for sector in cfg.spectrum.parity.sectors() {
        let mut etas = cfg.solver.etas.clone();
        let mut previous: Option<(ScalarFieldSpec, Vec<StateVector>)> = None;
        for (i, &n_s) in cfg.stages().iter().enumerate() {
            let stage_spec = spec.with_n_s(n_s);
            let h = scalar_hamiltonian(&stage_spec, sector).map_err(config_error)?;
            let exact = spectrum(&h)?;
            if n > exact.len() {
                return Err(CliError::Config(format!("{n} states requested from a {}-dimensional problem", exact.len())));
            }
            if etas.is_empty() {
                etas = exact[..n].iter().map(|e| e + ETA_MARGIN).collect();
            }
            let bits = cfg.bits_at(i);
            let qubits = bits * h.dim();
            writeln!(log, "stage n_s={n_s} parity={} K={bits}: {qubits} logical qubits", parity_name(sector)).map_err(io)?;
            let traces = if oracle {
                None
            } else {
                let params = SolveParams { bits, z_init: cfg.z_init_at(i), ..cfg.solver.params() };
                let starts = previous
                    .as_ref()
                    .map(|(coarse, states)| states.iter().map(|v| multigrid_lift(v, coarse, &stage_spec)).collect::<crate::Result<Vec<_>>>())
                    .transpose()?;
                let traces = solve_spectrum_from(&h, &etas, &mus, &params, starts.as_deref())?;
                previous = Some((stage_spec, traces.iter().map(|t| t.best().state.clone()).collect()));
                Some(traces)
            };
            let tag = match sector {
                None => format!("ns{n_s}"),
                Some(_) => format!("ns{n_s}_{}", parity_name(sector)),
            };
            let mut states_json = Vec::new();
            for k in 0..n {
                let mut row = vec![n_s.to_string(), parity_name(sector).into(), k.to_string(), qubits.to_string(), float(exact[k])];
                match &traces {
                    Some(t) => {
                        let trace = &t[k];
                        let last = *trace.statistics().last().expect("at least one zoom");
                        row.extend([last.summary.min, last.summary.median, last.summary.p16, last.summary.p84].map(float));
                        writeln!(log, "  state {k}: exact {:.10} annealed min {:.10} median {:.10}", exact[k], last.summary.min, last.summary.median)
                            .map_err(io)?;
                        out.csv(&format!("spectrum_{tag}_state{k}_trace"), &trace.to_table())?;
                        states_json.push(json!({"state": k, "exact": exact[k], "statistics": stats_json(&trace.statistics()), "runs": trace_json(trace)}));
                    }
                    None => {
                        row.extend([f64::NAN; 4].map(float));
                        writeln!(log, "  state {k}: exact {:.10}", exact[k]).map_err(io)?;
                        states_json.push(json!({"state": k, "exact": exact[k]}));
                    }
                }
                summary.push(row);
            }
            stages_json.push(json!({"n_s": n_s, "parity": parity_name(sector), "bits": bits, "logical_qubits": qubits, "states": states_json}));
        }
    }
    out.csv("spectrum_summary", &summary)?;
    out.json("spectrum", &json!({"config": cfg.resolved(), "stages": stages_json}))
}

type ObservableFn = Box<dyn Fn(&StateVector) -> crate::Result<f64>>;

/// Physical Hamiltonian, initial state and the observables recorded along the history.
fn evolution_setup(cfg: &RunConfig) -> CliResult<(HermMatrix, StateVector, Vec<(String, ObservableFn)>)> {
    match cfg.system {
        System::Su3 => {
            let p = su3_plaquette_hamiltonian(cfg.plaquette.g).map_err(config_error)?;
            let psi_in = StateVector::basis(p.hamiltonian.dim(), 0);
            let vacuum = psi_in.clone();
            let electric = p.electric.clone();
            let obs: Vec<(String, ObservableFn)> = vec![
                ("persistence".into(), Box::new(move |psi| persistence(psi, &vacuum))),
                ("electric_energy".into(), Box::new(move |psi| electric_energy(psi, &electric))),
            ];
            Ok((HermMatrix::from(&p.hamiltonian), psi_in, obs))
        }
        System::Neutrino => {
            let spec = cfg.neutrino.spec();
            let h = neutrino_hamiltonian(&spec).map_err(config_error)?;
            let flavors = beam_flavors(spec.n_sites);
            let psi_in = flavor_state(&flavors);
            let mut obs: Vec<(String, ObservableFn)> = Vec::new();
            for (i, &f) in flavors.iter().enumerate() {
                obs.push((format!("p{i}"), Box::new(move |psi| flavor_probability(psi, i, f))));
            }
            for i in 0..spec.n_sites {
                obs.push((format!("s{i}"), Box::new(move |psi| entanglement_entropy(psi, i))));
            }
            for i in 0..spec.n_sites {
                for j in i + 1..spec.n_sites {
                    obs.push((format!("n{i}_{j}"), Box::new(move |psi| log_negativity(psi, i, j))));
                }
            }
            Ok((HermMatrix::from(&h), psi_in, obs))
        }
        s => Err(CliError::Config(format!("{s:?} has no time evolution; use su3 or neutrino"))),
    }
}

fn series_over_runs(label: &str, times: &[f64], ev: &Evolution, f: &ObservableFn) -> crate::Result<ObservableSeries> {
    let per_time = (0..times.len())
        .map(|k| ev.slices.iter().map(|run| f(&run[k])).collect::<crate::Result<Vec<f64>>>())
        .collect::<crate::Result<Vec<_>>>()?;
    ObservableSeries::from_runs(label, times.to_vec(), &per_time)
}

/// Exact reference curves and, unless in oracle mode, annealed clock histories for every `dt`.
pub fn run_evolve(cfg: &RunConfig, out: &mut Output, log: &mut dyn Write) -> CliResult<()> {
    cfg.validate().map_err(config_error)?;
    let oracle = oracle_only(cfg, Mode::Evolve)?;
    let (h, psi_in, observables) = evolution_setup(cfg)?;
    let ev = &cfg.evolve;
    let grid: Vec<f64> = (0..ev.oracle_points).map(|k| ev.oracle_t_max * k as f64 / (ev.oracle_points - 1) as f64).collect();
    let exact = exact_states(&h, &psi_in, &grid)?;
    let mut exact_json = Vec::new();
    for (label, f) in &observables {
        let values = exact.iter().map(f).collect::<crate::Result<Vec<f64>>>()?;
        let s = ObservableSeries::exact(label.clone(), grid.clone(), values)?;
        out.csv(&format!("exact_{label}"), &s.to_table())?;
        exact_json.push(series_json(&s));
    }
    let mut annealed_json = Vec::new();
    if !oracle {
        let params = cfg.solver.params();
        for &dt in &ev.dts {
            let problem = ClockProblem::from_hamiltonian(&h, dt, ev.n_t, psi_in.clone()).map_err(config_error)?;
            writeln!(log, "dt={dt} n_t={}: {} logical qubits", ev.n_t, problem.logical_qubits(params.bits)).map_err(io)?;
            let raw = evolve_problem(&problem, &params)?;
            let mut passes = vec![raw];
            passes.extend(refine_evolution(&problem, &passes[0], &params, ev.refinement, ev.refine_depth.max(1))?);
            let mut passes_json = Vec::new();
            for (k, e) in passes.iter().enumerate() {
                let residuals = e.residuals();
                let s = Summary::of(&residuals);
                writeln!(log, "  pass {k}: clock residual min {:.3e} median {:.3e}", s.min, s.median).map_err(io)?;
                out.csv(&format!("clock_dt{dt}_pass{k}_trace"), &e.trace.to_table())?;
                passes_json.push(json!({"pass": k, "residuals": residuals, "statistics": stats_json(&e.trace.statistics()), "runs": trace_json(&e.trace)}));
            }
            let last = passes.last().expect("raw pass present");
            let times = problem.times();
            let mut series = Vec::new();
            for (label, f) in &observables {
                let s = series_over_runs(label, &times, last, f)?;
                out.csv(&format!("annealed_dt{dt}_{label}"), &s.to_table())?;
                series.push(series_json(&s));
            }
            annealed_json.push(json!({"dt": dt, "n_t": ev.n_t, "logical_qubits": problem.logical_qubits(params.bits), "passes": passes_json, "series": series}));
        }
    }
    out.json("evolve", &json!({"config": cfg.resolved(), "exact": exact_json, "annealed": annealed_json}))
}

/// Ground-state deviation statistics per zoom while one solver parameter varies.
pub fn run_sweep(cfg: &RunConfig, out: &mut Output, log: &mut dyn Write) -> CliResult<()> {
    require_scalar(cfg)?;
    cfg.validate().map_err(config_error)?;
    oracle_only(cfg, Mode::Sweep)?;
    let (param, values) = cfg.sweep.swept().map_err(config_error)?;
    let spec = cfg.scalar_spec();
    let h = scalar_site_hamiltonian(&spec).map_err(config_error)?;
    let e0 = spectrum(&h)?[0];
    let base = SolveParams { eta: cfg.solver.eta.unwrap_or(e0 + ETA_MARGIN), ..cfg.solver.params() };
    let mut table = Table::new(["param", "zoom", "min", "median", "lo68", "hi68"]);
    let mut points = Vec::new();
    for &v in &values {
        let params = match param {
            SweepParam::Eta => SolveParams { eta: v, ..base.clone() },
            SweepParam::Reads => SolveParams { num_reads: v as usize, reads_per_zoom: Vec::new(), ..base.clone() },
            SweepParam::Bits => SolveParams { bits: v as usize, ..base.clone() },
        };
        writeln!(log, "{param:?}={v}: {} logical qubits", params.bits * h.dim()).map_err(io)?;
        let stats = solve_state(&h, &params)?.deviation_statistics(e0);
        for s in &stats {
            table.push(vec![float(v), s.zoom.to_string(), float(s.summary.min), float(s.summary.median), float(s.summary.p16), float(s.summary.p84)]);
        }
        points.push(json!({"param": v, "statistics": stats_json(&stats)}));
    }
    out.csv("sweep", &table)?;
    out.json("sweep", &json!({"config": cfg.resolved(), "parameter": format!("{param:?}").to_lowercase(), "reference": e0, "points": points}))
}

/// One selftest comparison: passes when `|value − reference| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.value - self.reference).abs() <= self.tolerance
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SymMatrix::from_fn(n, |i, j| m[i.min(j) * n + i.max(j)])
}

/// Small, fast checks of every layer; deterministic for a given seed.
pub fn selftest_checks(seed: u64) -> crate::Result<(Vec<Check>, Vec<(String, SolveTrace)>)> {
    let mut checks = Vec::new();
    let mut traces = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let ho = spectrum(&scalar_site_hamiltonian(&ScalarFieldSpec::harmonic(5.0, 64))?)?;
    let worst = (0..6).map(|n| (ho[n] - (n as f64 + 0.5)).abs()).fold(0.0, f64::max);
    checks.push(Check { name: "ho_levels_n64", value: worst, reference: 0.0, tolerance: 1e-4 });

    let h = random_symmetric(&mut rng, 3);
    let enc = Encoding::new(2, 1, (0..3).map(|_| rng.random_range(-0.5..0.5)).collect())?;
    let q = build_eigen_qubo(&h, &enc)?;
    let offset = real_objective(&h, &enc.centers);
    let mut worst: f64 = 0.0;
    for x in 0..1u32 << q.n_vars() {
        let bits: Vec<u8> = (0..q.n_vars()).map(|b| (x >> b) as u8 & 1).collect();
        worst = worst.max((q.energy(&bits) + offset - real_objective(&h, &decode(&bits, &enc)?)).abs());
    }
    checks.push(Check { name: "qubo_offset", value: worst, reference: 0.0, tolerance: 1e-12 });

    let n_vars = 12;
    let dense: Vec<f64> = (0..n_vars * n_vars).map(|_| rng.random_range(-1.0..1.0)).collect();
    let q = QuboInstance::from_dense(n_vars, &dense)?;
    let (_, exact_min) = brute_force(&q)?;
    let reads = sample(&q, 200, &default_schedule(&q)?, rng.random())?;
    checks.push(Check { name: "sampler_finds_minimum", value: reads[0].energy, reference: exact_min, tolerance: 1e-12 });

    let spec = ScalarFieldSpec::harmonic(5.0, 16);
    let h = scalar_site_hamiltonian(&spec)?;
    let e0 = eigh(&h)?.values[0];
    let params = SolveParams { bits: 3, eta: e0 + ETA_MARGIN, num_reads: 200, runs: 4, seed: rng.random(), ..Default::default() };
    let trace = solve_state(&h, &params)?;
    checks.push(Check { name: "ho16_anneal_min", value: trace.best().energy, reference: e0, tolerance: 1e-4 });
    traces.push(("selftest_ho16_trace".to_string(), trace));

    let plaquette = su3_plaquette_hamiltonian(1.0)?;
    let hp = HermMatrix::from(&plaquette.hamiltonian);
    let vacuum = StateVector::basis(4, 0);
    let problem = ClockProblem::from_hamiltonian(&hp, 0.2, 2, vacuum.clone())?;
    let history = exact_history(&problem)?;
    checks.push(Check { name: "clock_null_energy", value: history.lowest, reference: 0.0, tolerance: 1e-12 });
    let direct = exact_states(&hp, &vacuum, &[0.2])?;
    let p_exact = persistence(&direct[0], &vacuum)?;
    checks.push(Check { name: "clock_history_persistence", value: persistence(&history.slices[1], &vacuum)?, reference: p_exact, tolerance: 1e-10 });

    let params = SolveParams { bits: 2, num_reads: 200, runs: 2, seed: rng.random(), ..Default::default() };
    let ev = evolve_problem(&problem, &params)?;
    let annealed = Summary::of(&ev.slices.iter().map(|s| persistence(&s[1], &vacuum)).collect::<crate::Result<Vec<_>>>()?).median;
    checks.push(Check { name: "clock_anneal_persistence", value: annealed, reference: p_exact, tolerance: 1e-4 });
    traces.push(("selftest_clock_trace".to_string(), ev.trace));

    let nu = crate::models::NeutrinoSpec::four_neutrino_beam();
    let hn = HermMatrix::from(&neutrino_hamiltonian(&nu)?);
    let flavors = beam_flavors(4);
    let psi = &exact_states(&hn, &flavor_state(&flavors), &[1.1])?[0];
    checks.push(Check {
        name: "neutrino_exchange_symmetry",
        value: flavor_probability(psi, 0, flavors[0])?,
        reference: flavor_probability(psi, 3, flavors[3])?,
        tolerance: 1e-10,
    });
    Ok((checks, traces))
}

pub fn run_selftest(cfg: &RunConfig, out: &mut Output, log: &mut dyn Write) -> CliResult<()> {
    let (checks, traces) = selftest_checks(cfg.solver.seed)?;
    let mut table = Table::new(["check", "value", "reference", "tolerance", "pass"]);
    let mut rows = Vec::new();
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(log, "{verdict} {}: {:e} vs {:e} (tol {:e})", c.name, c.value, c.reference, c.tolerance).map_err(io)?;
        table.push(vec![c.name.to_string(), float(c.value), float(c.reference), float(c.tolerance), c.passed().to_string()]);
        rows.push(json!({"check": c.name, "value": c.value, "reference": c.reference, "tolerance": c.tolerance, "pass": c.passed()}));
    }
    out.csv("selftest", &table)?;
    for (name, trace) in &traces {
        out.csv(name, &trace.to_table())?;
    }
    let traces_json: serde_json::Map<String, Value> = traces.iter().map(|(n, t)| (n.clone(), trace_json(t))).collect();
    out.json("selftest", &json!({"seed": cfg.solver.seed, "checks": rows, "traces": traces_json}))?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
