//! Feynman-clock time evolution.
//!
//! A history `Σ_t |ψ_t⟩|t⟩` with `ψ_{t+1} = U ψ_t` and `ψ_0 = ψ_in` is the
//! zero-energy ground state of a positive semidefinite operator over
//! `n_T · n_s` compound states. Solving that ground state with the complex
//! QUBO path gives every time slice at once.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, expm_unitary, CMatrix, HermMatrix, StateVector};
use crate::solver::{refine_hermitian, solve_hermitian, RunTrace, SolveParams, SolveTrace};
use crate::tolerances;

/// Single-step propagator, slice count and input state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockProblem {
    propagator: CMatrix,
    n_t: usize,
    psi_in: StateVector,
    dt: f64,
}

impl ClockProblem {
    pub fn new(propagator: CMatrix, n_t: usize, psi_in: StateVector, dt: f64) -> Result<Self> {
        if n_t < 2 {
            return Err(Error::InvalidParameter(format!("need at least two time slices, got {n_t}")));
        }
        if psi_in.dim() != propagator.dim() {
            return Err(Error::DimensionMismatch { expected: propagator.dim(), got: psi_in.dim() });
        }
        let dev = propagator.unitarity_deviation();
        if !(dev <= tolerances::UNITARY) {
            return Err(Error::NotUnitary(dev));
        }
        if !psi_in.is_normalized(tolerances::NORMALIZED) {
            return Err(Error::NotNormalized(psi_in.norm()));
        }
        if !dt.is_finite() {
            return Err(Error::NonFinite("time step"));
        }
        Ok(Self { propagator, n_t, psi_in, dt })
    }

    /// `U = e^{−i·dt·H}` by exact exponentiation.
    pub fn from_hamiltonian(h: &HermMatrix, dt: f64, n_t: usize, psi_in: StateVector) -> Result<Self> {
        Self::new(expm_unitary(h, dt)?, n_t, psi_in, dt)
    }

    pub fn propagator(&self) -> &CMatrix {
        &self.propagator
    }

    pub fn psi_in(&self) -> &StateVector {
        &self.psi_in
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_s(&self) -> usize {
        self.propagator.dim()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.n_t * self.n_s()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|t| t as f64 * self.dt).collect()
    }

    /// Logical qubits the complex QUBO needs at `bits` per real unknown.
    pub fn logical_qubits(&self, bits: usize) -> usize {
        2 * bits * self.dim()
    }
}

/// The clock operator in slice-major layout: slice `t` owns rows
/// `t·n_s .. (t+1)·n_s`.
///
/// ```text
/// C = (I − |ψ_in⟩⟨ψ_in|) ⊗ |0⟩⟨0|
///   + ½ Σ_t ( I⊗|t⟩⟨t| − U⊗|t+1⟩⟨t| − U†⊗|t⟩⟨t+1| + I⊗|t+1⟩⟨t+1| )
/// ```
pub fn build_clock(p: &ClockProblem) -> HermMatrix {
    let n = p.n_s();
    let dim = p.dim();
    let mut re = vec![0.0; dim * dim];
    let mut im = vec![0.0; dim * dim];
    let mut add = |r: usize, c: usize, z: Complex64| {
        re[r * dim + c] += z.re;
        im[r * dim + c] += z.im;
    };
    for a in 0..n {
        for b in 0..n {
            let delta = if a == b { 1.0 } else { 0.0 };
            add(a, b, Complex64::new(delta, 0.0) - p.psi_in.get(a) * p.psi_in.get(b).conj());
        }
    }
    for t in 0..p.n_t - 1 {
        let (s, s1) = (t * n, (t + 1) * n);
        for a in 0..n {
            add(s + a, s + a, Complex64::new(0.5, 0.0));
            add(s1 + a, s1 + a, Complex64::new(0.5, 0.0));
            for b in 0..n {
                let u = p.propagator.get(a, b);
                add(s1 + a, s + b, -0.5 * u);
                add(s + b, s1 + a, -0.5 * u.conj());
            }
        }
    }
    HermMatrix::new(dim, re, im).expect("clock operator is Hermitian by construction")
}

/// Splits a compound vector into `n_t` unit-norm slices.
///
/// One global phase is applied first, chosen so the largest component of
/// slice 0 is real and positive. Slices therefore keep their relative
/// phases and an exact history satisfies `ψ_{t+1} = U ψ_t`.
pub fn extract_slices(compound: &StateVector, n_t: usize, n_s: usize) -> Result<Vec<StateVector>> {
    if n_t == 0 || compound.dim() != n_t * n_s {
        return Err(Error::DimensionMismatch { expected: n_t * n_s, got: compound.dim() });
    }
    let slice = |t: usize| {
        StateVector::new(compound.re()[t * n_s..(t + 1) * n_s].to_vec(), compound.im()[t * n_s..(t + 1) * n_s].to_vec())
            .expect("finite components")
    };
    let first = slice(0);
    let phase = first.phase_fixing(first.dominant_index());
    (0..n_t)
        .map(|t| {
            let s = slice(t);
            let norm = s.norm();
            if !(norm > tolerances::SLICE_NORM) {
                return Err(Error::DegenerateSlice { slice: t, norm });
            }
            Ok(s.rotated(phase).scaled(1.0 / norm))
        })
        .collect()
}

/// `U^t ψ_in` for every slice.
pub fn propagate(p: &ClockProblem) -> Vec<StateVector> {
    let mut out = vec![p.psi_in.clone()];
    for _ in 1..p.n_t {
        let next = p.propagator.matvec(out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

/// Exact ground state of the clock operator by dense diagonalization.
#[derive(Debug, Clone)]
pub struct ExactHistory {
    pub lowest: f64,
    pub gap: f64,
    pub ground: StateVector,
    pub slices: Vec<StateVector>,
}

pub fn exact_history(p: &ClockProblem) -> Result<ExactHistory> {
    let dec = eigh_hermitian(&build_clock(p))?;
    let ground = dec.vectors[0].clone();
    let slices = extract_slices(&ground, p.n_t, p.n_s())?;
    Ok(ExactHistory { lowest: dec.values[0], gap: dec.values[1] - dec.values[0], ground, slices })
}

/// `e^{−iHt} ψ_in` on an arbitrary time grid from one eigendecomposition.
pub fn exact_states(h: &HermMatrix, psi_in: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    if psi_in.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi_in.dim() });
    }
    let dec = eigh_hermitian(h)?;
    let amps: Vec<Complex64> = dec.vectors.iter().map(|v| v.inner(psi_in)).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let mut z = vec![Complex64::new(0.0, 0.0); h.dim()];
            for ((v, a), &l) in dec.vectors.iter().zip(&amps).zip(&dec.values) {
                let c = a * Complex64::from_polar(1.0, -l * t);
                for (zi, vi) in z.iter_mut().zip(v.to_complex()) {
                    *zi += c * vi;
                }
            }
            StateVector::from_complex(&z)
        })
        .collect())
}

/// An annealed history: the solver trace plus each run's final slices.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub trace: SolveTrace,
    /// `slices[run][t]`.
    pub slices: Vec<Vec<StateVector>>,
}

impl Evolution {
    fn from_trace(trace: SolveTrace, p: &ClockProblem) -> Result<Self> {
        let slices = trace
            .runs
            .iter()
            .map(|r| extract_slices(&r.last().state, p.n_t, p.n_s()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trace, slices })
    }

    /// Final clock energy of each run; the exact value is zero.
    pub fn residuals(&self) -> Vec<f64> {
        self.trace.final_energies()
    }
}

/// Solves the clock ground state through the complex QUBO path.
pub fn evolve_problem(p: &ClockProblem, params: &SolveParams) -> Result<Evolution> {
    let trace = solve_hermitian(&build_clock(p), params)?;
    Evolution::from_trace(trace, p)
}

/// Builds `U = e^{−i·dt·H}` and the clock for `n_t` slices, then solves it.
pub fn evolve(h_phys: &HermMatrix, dt: f64, n_t: usize, psi_in: &StateVector, params: &SolveParams) -> Result<Evolution> {
    let p = ClockProblem::from_hamiltonian(h_phys, dt, n_t, psi_in.clone())?;
    evolve_problem(&p, params)
}

/// Refines every run of `raw` on its own: pass `k` restarts from the
/// previous pass's state with the zoom window moved `k·depth` levels deeper.
/// Returns one evolution per pass.
pub fn refine_evolution(p: &ClockProblem, raw: &Evolution, params: &SolveParams, passes: u32, depth: u32) -> Result<Vec<Evolution>> {
    use rayon::prelude::*;
    if depth == 0 {
        return Err(Error::InvalidParameter("refinement depth must be positive".into()));
    }
    let clock = build_clock(p);
    let per_run: Vec<Vec<RunTrace>> = raw
        .trace
        .runs
        .par_iter()
        .map(|run| {
            let mut prev = run.last().state.clone();
            let mut out = Vec::with_capacity(passes as usize);
            for pass in 1..=passes {
                let base = SolveParams { runs: 1, seed: crate::solver::derive_seed(params.seed, run.run as u64, pass as u64), ..params.clone() };
                let trace = refine_hermitian(&clock, &prev, &base.refinement(&prev, pass, depth))?;
                let mut r = trace.runs.into_iter().next().expect("one run");
                r.run = run.run;
                prev = r.last().state.clone();
                out.push(r);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    (0..passes as usize)
        .map(|k| Evolution::from_trace(SolveTrace { runs: per_run.iter().map(|r| r[k].clone()).collect() }, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::models::su3_plaquette_hamiltonian;

    fn plaquette_problem(dt: f64, n_t: usize) -> ClockProblem {
        let h = su3_plaquette_hamiltonian(1.0).unwrap().hamiltonian;
        ClockProblem::from_hamiltonian(&HermMatrix::from(&h), dt, n_t, StateVector::basis(4, 0)).unwrap()
    }

    #[test]
    fn stationary_history_for_identity_propagator() {
        let p = ClockProblem::new(CMatrix::identity(3), 2, StateVector::basis(3, 0), 0.1).unwrap();
        let ex = exact_history(&p).unwrap();
        assert!(ex.lowest.abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = StateVector::from_real(vec![s, 0.0, 0.0, s, 0.0, 0.0]);
        assert!(ex.ground.phase_aligned().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn trace_of_two_slice_clock() {
        let p = plaquette_problem(0.3, 2);
        assert!((build_clock(&p).trace() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn ground_state_is_the_propagated_history() {
        let p = plaquette_problem(0.37, 3);
        let c = build_clock(&p);
        let dec = eigh_hermitian(&c).unwrap();
        assert!(dec.values[0].abs() < 1e-12);
        assert!(dec.values[0] >= -1e-10);
        assert!(dec.values[1] > 1e-6, "null space should be one-dimensional");
        let ex = exact_history(&p).unwrap();
        for (a, b) in ex.slices.iter().zip(propagate(&p)) {
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
        for w in ex.slices.windows(2) {
            assert!(p.propagator().matvec(&w[0]).max_abs_diff(&w[1]) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let not_unitary = CMatrix::from(&SymMatrix::diagonal(&[1.0, 2.0]));
        assert!(matches!(ClockProblem::new(not_unitary, 2, StateVector::basis(2, 0), 0.1), Err(Error::NotUnitary(_))));
        assert!(ClockProblem::new(CMatrix::identity(2), 1, StateVector::basis(2, 0), 0.1).is_err());
        let unnormalized = StateVector::from_real(vec![1.0, 1.0]);
        assert!(ClockProblem::new(CMatrix::identity(2), 2, unnormalized, 0.1).is_err());
    }

    #[test]
    fn slice_extraction() {
        let v = StateVector::from_real(vec![3.0, 4.0, 0.0, 2.0]);
        let s = extract_slices(&v, 2, 2).unwrap();
        assert!(s[0].max_abs_diff(&StateVector::from_real(vec![0.6, 0.8])) < 1e-15);
        assert!(s[1].max_abs_diff(&StateVector::from_real(vec![0.0, 1.0])) < 1e-15);
        let one = extract_slices(&v, 1, 4).unwrap();
        assert!((one[0].norm() - 1.0).abs() < 1e-15);
        let degenerate = StateVector::from_real(vec![1.0, 0.0, 0.0, 1e-9]);
        assert!(matches!(extract_slices(&degenerate, 2, 2), Err(Error::DegenerateSlice { slice: 1, .. })));
        assert!(extract_slices(&v, 3, 2).is_err());
    }

    #[test]
    fn exact_states_match_propagator_powers() {
        let h = HermMatrix::from(&su3_plaquette_hamiltonian(1.0).unwrap().hamiltonian);
        let p = ClockProblem::from_hamiltonian(&h, 0.2, 4, StateVector::basis(4, 0)).unwrap();
        let states = exact_states(&h, p.psi_in(), &p.times()).unwrap();
        for (a, b) in states.iter().zip(propagate(&p)) {
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }
}
