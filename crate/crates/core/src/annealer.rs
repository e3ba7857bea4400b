//! Seeded Metropolis simulated annealing on QUBO instances, plus an
//! exhaustive solver for small instances.
//!
//! Every read runs an independent chain on its own ChaCha stream
//! (`seed`, stream = read index), so results do not depend on how reads are
//! scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::QuboInstance;
use crate::tolerances;

/// Largest instance the exhaustive solver accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Largest instance the sampler accepts (dense coupling storage).
pub const SAMPLER_LIMIT: usize = 8192;

/// Sweep count used by [`default_schedule`].
pub const DEFAULT_SWEEPS: usize = 1000;

/// `e^{-37} < 2^{-53}`, the spacing of uniform draws near zero.
const MAX_EXPONENT: f64 = 37.0;

/// Geometric inverse-temperature schedule, one β per sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
}

impl AnnealSchedule {
    pub fn new(beta_start: f64, beta_end: f64, sweeps: usize) -> Result<Self> {
        if !(beta_start.is_finite() && beta_end.is_finite()) {
            return Err(Error::NonFinite("anneal schedule"));
        }
        if beta_start <= 0.0 || beta_end < beta_start {
            return Err(Error::InvalidParameter(format!(
                "need 0 < beta_start <= beta_end, got {beta_start} and {beta_end}"
            )));
        }
        if sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        Ok(Self { beta_start, beta_end, sweeps })
    }

    pub fn with_sweeps(self, sweeps: usize) -> Result<Self> {
        Self::new(self.beta_start, self.beta_end, sweeps)
    }

    /// β for each sweep, evenly spaced in log between the end points.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_start];
        }
        let ratio = (self.beta_end / self.beta_start).ln();
        let last = (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|s| match s {
                0 => self.beta_start,
                s if s + 1 == self.sweeps => self.beta_end,
                s => self.beta_start * (ratio * s as f64 / last).exp(),
            })
            .collect()
    }
}

/// One distinct sampler outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealRead {
    pub bits: Vec<u8>,
    pub energy: f64,
    pub multiplicity: usize,
}

/// Row-major dense form used by the chains: `linear[i] = Q'_ii`,
/// `coupling[i*n + j] = Q'_ij` for `i ≠ j` (mirrored), zero diagonal.
#[derive(Debug, Clone)]
struct DenseQubo {
    n: usize,
    linear: Vec<f64>,
    coupling: Vec<f64>,
    /// Upper bound on `|E|`, the scale of accumulated rounding in the chains.
    magnitude: f64,
}

impl DenseQubo {
    fn new(q: &QuboInstance) -> Self {
        let n = q.n_vars();
        let mut linear = vec![0.0; n];
        let mut coupling = vec![0.0; n * n];
        for (i, j, v) in q.terms() {
            if i == j {
                linear[i] += v;
            } else {
                coupling[i * n + j] += v;
                coupling[j * n + i] += v;
            }
        }
        let magnitude = q.terms().map(|(_, _, v)| v.abs()).sum();
        Self { n, linear, coupling, magnitude }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.n..(i + 1) * self.n]
    }

    fn energy(&self, bits: &[u8]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            if bits[i] == 0 {
                continue;
            }
            e += self.linear[i];
            let row = self.row(i);
            for j in i + 1..self.n {
                if bits[j] != 0 {
                    e += row[j];
                }
            }
        }
        e
    }

    /// Local fields `Σ_j Q'_ij q_j` over the off-diagonal couplings.
    fn fields(&self, bits: &[u8]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(bits).filter(|(_, b)| **b != 0).map(|(c, _)| c).sum())
            .collect()
    }

    fn bookkeeping_ok(&self, bits: &[u8], energy: f64) -> bool {
        (self.energy(bits) - energy).abs() <= tolerances::ENERGY_BOOKKEEPING * (1.0 + self.magnitude)
    }

    fn flip(&self, bits: &mut [u8], field: &mut [f64], k: usize) {
        let delta = if bits[k] == 0 { 1.0 } else { -1.0 };
        bits[k] ^= 1;
        for (f, c) in field.iter_mut().zip(self.row(k)) {
            *f += delta * c;
        }
    }
}

fn run_chain(dense: &DenseQubo, betas: &[f64], rng: &mut ChaCha8Rng, check_every_flip: bool) -> Vec<u8> {
    let n = dense.n;
    let mut bits: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let mut field = dense.fields(&bits);
    let mut energy: f64 =
        (0..n).filter(|&i| bits[i] != 0).map(|i| dense.linear[i] + 0.5 * field[i]).sum();
    for &beta in betas {
        // Uphill moves with β·ΔE above this are accepted with probability
        // below the resolution of a uniform f64 draw.
        let cutoff = MAX_EXPONENT / beta;
        for k in 0..n {
            let local = dense.linear[k] + field[k];
            let delta_e = if bits[k] == 0 { local } else { -local };
            let accept = delta_e <= 0.0 || (delta_e < cutoff && rng.random::<f64>() < (-beta * delta_e).exp());
            if accept {
                dense.flip(&mut bits, &mut field, k);
                energy += delta_e;
                if check_every_flip {
                    assert!(dense.bookkeeping_ok(&bits, energy), "incremental energy {energy} drifted");
                }
            }
        }
    }
    debug_assert!(dense.bookkeeping_ok(&bits, energy), "incremental energy {energy} drifted");
    bits
}

fn validate_instance(q: &QuboInstance) -> Result<()> {
    if q.n_vars() == 0 {
        return Err(Error::EmptyInstance);
    }
    if !q.is_finite() {
        return Err(Error::NonFinite("QUBO coefficients"));
    }
    Ok(())
}

/// Runs `num_reads` independent chains and aggregates identical bitstrings.
/// Reads come back sorted by energy, then lexicographically by bits.
pub fn sample(q: &QuboInstance, num_reads: usize, sched: &AnnealSchedule, seed: u64) -> Result<Vec<AnnealRead>> {
    sample_impl(q, num_reads, sched, seed, false)
}

fn sample_impl(
    q: &QuboInstance,
    num_reads: usize,
    sched: &AnnealSchedule,
    seed: u64,
    check_every_flip: bool,
) -> Result<Vec<AnnealRead>> {
    validate_instance(q)?;
    if num_reads == 0 {
        return Err(Error::InvalidParameter("num_reads must be at least 1".into()));
    }
    if q.n_vars() > SAMPLER_LIMIT {
        return Err(Error::TooLarge { n_vars: q.n_vars(), limit: SAMPLER_LIMIT });
    }
    let dense = DenseQubo::new(q);
    let betas = sched.betas();
    let endpoints: Vec<Vec<u8>> = (0..num_reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(read as u64);
            run_chain(&dense, &betas, &mut rng, check_every_flip)
        })
        .collect();
    let mut counts: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for bits in endpoints {
        *counts.entry(bits).or_insert(0) += 1;
    }
    let mut reads: Vec<AnnealRead> = counts
        .into_iter()
        .map(|(bits, multiplicity)| AnnealRead { energy: dense.energy(&bits), bits, multiplicity })
        .collect();
    reads.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
    Ok(reads)
}

/// Schedule scaled to the instance: the hottest sweep accepts the largest
/// possible uphill move with probability 1/2, the coldest accepts the
/// smallest one with probability 1/1000.
pub fn default_schedule(q: &QuboInstance) -> Result<AnnealSchedule> {
    validate_instance(q)?;
    let mut row_l1 = vec![0.0; q.n_vars()];
    let mut min_nonzero = f64::INFINITY;
    for (i, j, v) in q.terms() {
        if v == 0.0 {
            continue;
        }
        row_l1[i] += v.abs();
        if i != j {
            row_l1[j] += v.abs();
        }
        min_nonzero = min_nonzero.min(v.abs());
    }
    let max_row = row_l1.iter().copied().fold(0.0, f64::max);
    if max_row == 0.0 {
        return Err(Error::InvalidParameter("all-zero QUBO has no energy scale".into()));
    }
    AnnealSchedule::new(2f64.ln() / max_row, 1000f64.ln() / min_nonzero, DEFAULT_SWEEPS)
}

/// Exact minimum by Gray-code enumeration. Ties go to the lexicographically
/// smallest bitstring.
pub fn brute_force(q: &QuboInstance) -> Result<(Vec<u8>, f64)> {
    let n = q.n_vars();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n_vars: n, limit: BRUTE_FORCE_LIMIT });
    }
    validate_instance(q)?;
    let dense = DenseQubo::new(q);
    let mut bits = vec![0u8; n];
    let mut field = vec![0.0; n];
    let mut energy = 0.0;
    let mut best_bits = bits.clone();
    let mut best = 0.0;
    for step in 1u64..1u64 << n {
        let k = step.trailing_zeros() as usize;
        let local = dense.linear[k] + field[k];
        energy += if bits[k] == 0 { local } else { -local };
        dense.flip(&mut bits, &mut field, k);
        if energy < best - tolerances::ENERGY_TIE
            || (energy <= best + tolerances::ENERGY_TIE && lex_smaller_at_tie(&dense, &bits, &best_bits))
        {
            best = energy;
            best_bits.copy_from_slice(&bits);
        }
    }
    let exact = dense.energy(&best_bits);
    Ok((best_bits, exact))
}

/// Near-ties are settled on exactly recomputed energies, then on bit order.
fn lex_smaller_at_tie(dense: &DenseQubo, candidate: &[u8], incumbent: &[u8]) -> bool {
    let (a, b) = (dense.energy(candidate), dense.energy(incumbent));
    a < b || (a == b && candidate < incumbent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_qubo(n: usize, seed: u64) -> QuboInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut q = QuboInstance::new(n);
        for i in 0..n {
            for j in i..n {
                q.add(i, j, rng.random_range(-1.0..1.0));
            }
        }
        q
    }

    fn single(v: f64) -> QuboInstance {
        let mut q = QuboInstance::new(1);
        q.add(0, 0, v);
        q
    }

    #[test]
    fn geometric_betas() {
        let s = AnnealSchedule::new(0.5, 8.0, 5).unwrap();
        let b = s.betas();
        assert_eq!(b.len(), 5);
        assert_eq!(b[0], 0.5);
        assert_eq!(b[4], 8.0);
        assert!((b[2] - 2.0).abs() < 1e-12);
        assert_eq!(AnnealSchedule::new(0.5, 8.0, 1).unwrap().betas(), vec![0.5]);
        assert!(AnnealSchedule::new(2.0, 1.0, 5).is_err());
        assert!(AnnealSchedule::new(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn single_attractive_bit() {
        let q = single(-1.0);
        let reads = sample(&q, 100, &default_schedule(&q).unwrap(), 7).unwrap();
        assert_eq!(reads, vec![AnnealRead { bits: vec![1], energy: -1.0, multiplicity: 100 }]);
    }

    #[test]
    fn frustrated_pair_hits_ground_level() {
        let mut q = QuboInstance::new(2);
        q.add(0, 0, -1.0);
        q.add(1, 1, -1.0);
        q.add(0, 1, 2.0);
        let reads = sample(&q, 1000, &default_schedule(&q).unwrap(), 3).unwrap();
        let hits: usize = reads.iter().filter(|r| r.energy == -1.0).map(|r| r.multiplicity).sum();
        assert!(hits >= 999, "{hits}");
        assert_eq!(reads.iter().map(|r| r.multiplicity).sum::<usize>(), 1000);
    }

    #[test]
    fn reads_are_sorted_and_energies_recomputable() {
        let q = random_qubo(10, 1);
        let sched = default_schedule(&q).unwrap().with_sweeps(5).unwrap();
        let reads = sample(&q, 200, &sched, 11).unwrap();
        for w in reads.windows(2) {
            assert!(w[0].energy < w[1].energy || (w[0].energy == w[1].energy && w[0].bits < w[1].bits));
        }
        for r in &reads {
            assert!((q.energy(&r.bits) - r.energy).abs() < 1e-10);
        }
    }

    #[test]
    fn incremental_energy_matches_full_recomputation_at_every_flip() {
        let q = random_qubo(9, 4);
        let sched = default_schedule(&q).unwrap().with_sweeps(30).unwrap();
        sample_impl(&q, 20, &sched, 5, true).unwrap();
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let q = random_qubo(12, 2);
        let sched = default_schedule(&q).unwrap().with_sweeps(20).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample(&q, 300, &sched, 99).unwrap());
        let b = four.install(|| sample(&q, 300, &sched, 99).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, sample(&q, 300, &sched, 100).unwrap());
    }

    #[test]
    fn default_schedule_bounds() {
        let s = default_schedule(&single(-1.0)).unwrap();
        assert!((s.beta_start - 2f64.ln()).abs() < 1e-15);
        assert!((s.beta_end - 1000f64.ln()).abs() < 1e-15);
        assert_eq!(s.sweeps, DEFAULT_SWEEPS);
        let q = random_qubo(6, 3);
        let s1 = default_schedule(&q).unwrap();
        let s3 = default_schedule(&q.scaled(3.0)).unwrap();
        assert!((s3.beta_start * 3.0 - s1.beta_start).abs() < 1e-12 * s1.beta_start);
        assert!((s3.beta_end * 3.0 - s1.beta_end).abs() < 1e-12 * s1.beta_end);
        assert!(default_schedule(&QuboInstance::new(3)).is_err());
        assert!(matches!(default_schedule(&QuboInstance::new(0)), Err(Error::EmptyInstance)));
    }

    #[test]
    fn scaled_instance_gives_identical_reads_under_its_default_schedule() {
        // Power-of-two scaling keeps every β·ΔE product bit-identical.
        let q = random_qubo(10, 8);
        let scaled = q.scaled(4.0);
        let a = sample(&q, 100, &default_schedule(&q).unwrap().with_sweeps(50).unwrap(), 17).unwrap();
        let b = sample(&scaled, 100, &default_schedule(&scaled).unwrap().with_sweeps(50).unwrap(), 17).unwrap();
        let bits = |r: &[AnnealRead]| r.iter().map(|x| (x.bits.clone(), x.multiplicity)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn brute_force_small_cases() {
        let (bits, e) = brute_force(&QuboInstance::new(4)).unwrap();
        assert_eq!((bits, e), (vec![0; 4], 0.0));
        assert_eq!(brute_force(&single(-1.0)).unwrap(), (vec![1], -1.0));
        assert!(matches!(brute_force(&QuboInstance::new(25)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn brute_force_breaks_ties_lexicographically() {
        let mut q = QuboInstance::new(2);
        q.add(0, 0, -1.0);
        q.add(1, 1, -1.0);
        q.add(0, 1, 2.0);
        assert_eq!(brute_force(&q).unwrap(), (vec![0, 1], -1.0));
    }

    #[test]
    fn brute_force_matches_naive_enumeration() {
        for seed in 0..5 {
            let q = random_qubo(8, seed);
            let naive = (0..256u32)
                .map(|m| (0..8).map(|b| (m >> b & 1) as u8).collect::<Vec<u8>>())
                .map(|b| (q.energy(&b), b))
                .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
                .unwrap();
            let (bits, e) = brute_force(&q).unwrap();
            assert_eq!(bits, naive.1);
            assert!((e - naive.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_finds_brute_force_optimum_on_small_instances() {
        for seed in 0..10 {
            let q = random_qubo(10, 100 + seed);
            let (_, e) = brute_force(&q).unwrap();
            let reads = sample(&q, 200, &default_schedule(&q).unwrap().with_sweeps(200).unwrap(), seed).unwrap();
            assert!((reads[0].energy - e).abs() < 1e-10, "seed {seed}");
        }
    }
}
