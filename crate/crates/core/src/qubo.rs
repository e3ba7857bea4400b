//! QUBO encoding of the shifted eigenvalue objective and of the complex
//! clock objective, with the zoomed fixed-point representation of each
//! coefficient.
//!
//! Each real unknown `a_α` is carried by `K` bits around a zoom center
//! `c_α` at zoom level `z`:
//!
//! ```text
//! a_α = c_α − 2^{−z} q_K + Σ_{i<K} q_i 2^{i−K−z}
//! ```
//!
//! The QUBO energy of a bitstring is the objective at the decoded vector
//! minus the objective at the center; the constant offset is dropped, so
//! QUBO energies are only comparable within one zoom level.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{HermMatrix, StateVector, SymMatrix};
use crate::tolerances;

/// Fixed-point encoding parameters for one zoom step.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    /// Bits per real unknown (`K`).
    pub bits: usize,
    /// Zoom level `z`.
    pub zoom: u32,
    /// Zoom centers, one per real unknown. Complex problems interleave
    /// `(re, im)` per coefficient.
    pub centers: Vec<f64>,
}

impl Encoding {
    pub fn new(bits: usize, zoom: u32, centers: Vec<f64>) -> Result<Self> {
        if bits == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("zoom centers"));
        }
        Ok(Self { bits, zoom, centers })
    }

    /// Zero centers at zoom 0: the plain `a ∈ [−1, 1)` representation.
    pub fn initial(bits: usize, unknowns: usize) -> Result<Self> {
        Self::new(bits, 0, vec![0.0; unknowns])
    }

    /// Signed weight of bit `b` (0-based) within a `K`-bit block.
    #[inline]
    pub fn weight(&self, b: usize) -> f64 {
        bit_weight(self.bits, self.zoom, b)
    }

    pub fn unknowns(&self) -> usize {
        self.centers.len()
    }

    pub fn n_vars(&self) -> usize {
        self.bits * self.centers.len()
    }

    /// All values one unknown can take at this zoom around `center`, ascending.
    pub fn reachable(&self, center: f64) -> Vec<f64> {
        let mut out: Vec<f64> = (0..1usize << self.bits)
            .map(|mask| center + (0..self.bits).filter(|b| mask >> b & 1 == 1).map(|b| self.weight(b)).sum::<f64>())
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

#[inline]
fn bit_weight(bits: usize, zoom: u32, b: usize) -> f64 {
    let i = b as i32 + 1;
    let mag = 2f64.powi(i - bits as i32 - zoom as i32);
    if b + 1 == bits {
        -mag
    } else {
        mag
    }
}

/// Decodes a bitstring into one real value per center.
pub fn decode(bits: &[u8], enc: &Encoding) -> Result<Vec<f64>> {
    if bits.len() != enc.n_vars() {
        return Err(Error::DimensionMismatch { expected: enc.n_vars(), got: bits.len() });
    }
    let k = enc.bits;
    let weights: Vec<f64> = (0..k).map(|b| enc.weight(b)).collect();
    Ok(enc
        .centers
        .iter()
        .enumerate()
        .map(|(u, &c)| {
            let block = &bits[u * k..(u + 1) * k];
            c + block.iter().zip(&weights).filter(|(q, _)| **q != 0).map(|(_, w)| w).sum::<f64>()
        })
        .collect())
}

/// Decodes a complex bitstring: the first `K` bits of each `2K` block are
/// the real part, the next `K` the imaginary part.
pub fn decode_complex(bits: &[u8], enc: &Encoding) -> Result<StateVector> {
    if !enc.unknowns().is_multiple_of(2) {
        return Err(Error::InvalidParameter("complex encoding needs an even number of centers".into()));
    }
    let flat = decode(bits, enc)?;
    Ok(deinterleave(&flat))
}

/// `(re0, im0, re1, im1, …)` → state vector.
pub fn deinterleave(flat: &[f64]) -> StateVector {
    let re = flat.iter().step_by(2).copied().collect();
    let im = flat.iter().skip(1).step_by(2).copied().collect();
    StateVector::new(re, im).expect("interleaved coefficients are finite")
}

/// State vector → `(re0, im0, re1, im1, …)`.
pub fn interleave(v: &StateVector) -> Vec<f64> {
    v.re().iter().zip(v.im()).flat_map(|(r, i)| [*r, *i]).collect()
}

/// Upper-triangular QUBO: `E(q) = Σ_{i≤j} Q_ij q_i q_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuboInstance {
    n_vars: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
}

impl QuboInstance {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, coeffs: BTreeMap::new() }
    }

    /// Builds from a dense (not necessarily symmetric) row-major matrix by
    /// folding `Q_ij + Q_ji` onto the upper triangle.
    pub fn from_dense(n: usize, q: &[f64]) -> Result<Self> {
        if q.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: q.len() });
        }
        let mut out = Self::new(n);
        for i in 0..n {
            for j in 0..n {
                out.add(i, j, q[i * n + j]);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Accumulates `value` onto the `(min, max)` slot.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n_vars && j < self.n_vars, "variable index out of range");
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.coeffs.entry(key).or_insert(0.0) += value;
    }

    /// Drops exact zeros.
    pub fn prune(&mut self) {
        self.coeffs.retain(|_, v| *v != 0.0);
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.values().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { n_vars: self.n_vars, coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * factor)).collect() }
    }

    pub fn energy(&self, bits: &[u8]) -> f64 {
        assert_eq!(bits.len(), self.n_vars);
        self.terms().filter(|&(i, j, _)| bits[i] != 0 && bits[j] != 0).map(|(_, _, v)| v).sum()
    }

    /// One line per coefficient: `i j value` (0-based indices).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.terms() {
            writeln!(s, "{i} {j} {v:e}").unwrap();
        }
        s
    }

    /// Parses [`to_text`](Self::to_text) output. `n_vars` is taken as one
    /// past the largest index unless given.
    pub fn from_text(text: &str, n_vars: Option<usize>) -> Result<Self> {
        let mut entries = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `i j value`, got `{line}`", line_no + 1));
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let v: f64 = fields[2].parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(Error::NonFinite("QUBO coefficient"));
            }
            entries.push((i, j, v));
        }
        let inferred = entries.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
        let n = n_vars.unwrap_or(inferred);
        if inferred > n {
            return Err(Error::Parse(format!("index {} out of range for {n} variables", inferred - 1)));
        }
        let mut out = Self::new(n);
        for (i, j, v) in entries {
            out.add(i, j, v);
        }
        Ok(out)
    }
}

/// QUBO for `F(a) = Σ a_α a_β h_αβ` at the given zoom. `h` must already
/// carry the `−η` shift. Variable `K·α + i` is bit `i` of unknown `α`.
pub fn build_eigen_qubo(h: &SymMatrix, enc: &Encoding) -> Result<QuboInstance> {
    let n = h.dim();
    if enc.unknowns() != n {
        return Err(Error::DimensionMismatch { expected: n, got: enc.unknowns() });
    }
    let k = enc.bits;
    let w: Vec<f64> = (0..k).map(|b| enc.weight(b)).collect();
    // g_β = Σ_γ c_γ h_γβ
    let g = h.matvec(&enc.centers);
    let mut q = QuboInstance::new(k * n);
    for alpha in 0..n {
        for i in 0..k {
            let p = k * alpha + i;
            for beta in alpha..n {
                let hab = h.get(alpha, beta);
                let j_start = if beta == alpha { i } else { 0 };
                for j in j_start..k {
                    let r = k * beta + j;
                    let v = if p == r {
                        w[i] * w[i] * hab + 2.0 * w[i] * g[alpha]
                    } else {
                        2.0 * w[i] * w[j] * hab
                    };
                    q.add(p, r, v);
                }
            }
        }
    }
    q.prune();
    Ok(q)
}

/// QUBO for the complex objective `F(a) = Σ ā_α a_β C_αβ` (with `C`
/// already shifted). Coefficient `α` owns variables `2Kα .. 2K(α+1)`: the
/// first `K` encode `Re a_α`, the next `K` encode `Im a_α`. Centers are
/// interleaved `(re, im)` per coefficient.
pub fn build_clock_qubo(c: &HermMatrix, enc: &Encoding) -> Result<QuboInstance> {
    let n = c.dim();
    if enc.unknowns() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: enc.unknowns() });
    }
    let k = enc.bits;
    let w: Vec<f64> = (0..k).map(|b| enc.weight(b)).collect();
    let (cr, ci): (Vec<f64>, Vec<f64>) =
        enc.centers.chunks(2).map(|p| (p[0], p[1])).unzip();
    // Linear terms for the real and imaginary bit blocks of coefficient β:
    //   re: Σ_γ (c^re_γ C^re_γβ + c^im_γ C^im_γβ)
    //   im: Σ_γ (c^im_γ C^re_γβ − c^re_γ C^im_γβ)
    let mut lin_re = vec![0.0; n];
    let mut lin_im = vec![0.0; n];
    for beta in 0..n {
        for gamma in 0..n {
            let (r, m) = (c.re_at(gamma, beta), c.im_at(gamma, beta));
            lin_re[beta] += cr[gamma] * r + ci[gamma] * m;
            lin_im[beta] += ci[gamma] * r - cr[gamma] * m;
        }
    }
    let var = |alpha: usize, imag: bool, b: usize| 2 * k * alpha + if imag { k } else { 0 } + b;
    let mut q = QuboInstance::new(2 * k * n);
    for alpha in 0..n {
        for beta in 0..n {
            let (re, im) = (c.re_at(alpha, beta), c.im_at(alpha, beta));
            for i in 0..k {
                for j in 0..k {
                    let ww = w[i] * w[j];
                    // re–re and im–im blocks
                    q.add(var(alpha, false, i), var(beta, false, j), ww * re);
                    q.add(var(alpha, true, i), var(beta, true, j), ww * re);
                    // re(α)–im(β): −C^im, im(α)–re(β): +C^im
                    q.add(var(alpha, false, i), var(beta, true, j), -ww * im);
                    q.add(var(alpha, true, i), var(beta, false, j), ww * im);
                }
            }
        }
        for i in 0..k {
            q.add(var(alpha, false, i), var(alpha, false, i), 2.0 * w[i] * lin_re[alpha]);
            q.add(var(alpha, true, i), var(alpha, true, i), 2.0 * w[i] * lin_im[alpha]);
        }
    }
    q.prune();
    Ok(q)
}

/// Real objective `Σ a_α a_β h_αβ`.
pub fn real_objective(h: &SymMatrix, a: &[f64]) -> f64 {
    h.quadratic_form(a)
}

/// Complex objective `Σ ā_α a_β C_αβ` (real for Hermitian `C`).
pub fn complex_objective(c: &HermMatrix, a: &StateVector) -> f64 {
    let z = c.expectation(a);
    debug_assert!(z.im.abs() <= tolerances::IMAG_RESIDUE * (1.0 + z.re.abs()));
    z.re
}

/// Adds `μ_n |Ψ_n><Ψ_n|` for every supplied state.
pub fn project_hamiltonian(h: &SymMatrix, states: &[StateVector], mus: &[f64]) -> Result<SymMatrix> {
    if states.len() != mus.len() {
        return Err(Error::DimensionMismatch { expected: states.len(), got: mus.len() });
    }
    let mut out = h.clone();
    for (psi, &mu) in states.iter().zip(mus) {
        if psi.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
        }
        if !psi.is_normalized(tolerances::NORMALIZED) {
            return Err(Error::NotNormalized(psi.norm()));
        }
        if psi.im().iter().any(|v| v.abs() > tolerances::HERMITIAN) {
            return Err(Error::InvalidParameter("projected states of a real Hamiltonian must be real".into()));
        }
        out.add_outer(psi.re(), mu)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use num_complex::Complex64;

    fn all_bitstrings(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1usize << n).map(move |m| (0..n).map(|b| (m >> b & 1) as u8).collect())
    }

    #[test]
    fn decode_single_coefficient_examples() {
        let enc = Encoding::initial(3, 1).unwrap();
        assert_eq!(decode(&[1, 0, 0], &enc).unwrap(), vec![0.25]);
        assert_eq!(decode(&[0, 0, 1], &enc).unwrap(), vec![-1.0]);
        let zoomed = Encoding::new(3, 2, vec![0.25]).unwrap();
        assert_eq!(decode(&[0, 1, 0], &zoomed).unwrap(), vec![0.375]);
        assert!(decode(&[0, 1], &enc).is_err());
    }

    #[test]
    fn zero_bitstring_decodes_to_center() {
        let enc = Encoding::new(3, 5, vec![0.1, -0.4, 0.7]).unwrap();
        assert_eq!(decode(&[0; 9], &enc).unwrap(), enc.centers);
    }

    #[test]
    fn zoom_windows_track_a_target_value() {
        // Follow −0.33 through the zoom steps, always recentring on the closest point.
        let target = -0.33;
        let mut center = 0.0;
        let mut last_err = f64::INFINITY;
        for z in 0..10 {
            let enc = Encoding::new(3, z, vec![center]).unwrap();
            let reachable = enc.reachable(center);
            let lo = reachable[0];
            let hi = *reachable.last().unwrap();
            assert!((lo - (center - 2f64.powi(-(z as i32)))).abs() < 1e-15);
            assert!(hi < center + 2f64.powi(-(z as i32)));
            center = *reachable
                .iter()
                .min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs()))
                .unwrap();
            let err = (center - target).abs();
            assert!(err <= last_err);
            last_err = err;
        }
        assert!(last_err < 2e-3);
    }

    #[test]
    fn single_variable_qubo() {
        let h = SymMatrix::diagonal(&[-1.0]);
        let q = build_eigen_qubo(&h, &Encoding::initial(1, 1).unwrap()).unwrap();
        assert_eq!(q.get(0, 0), -1.0);
        assert_eq!(q.energy(&[1]), -1.0);
        assert_eq!(decode(&[1], &Encoding::initial(1, 1).unwrap()).unwrap(), vec![-1.0]);
    }

    #[test]
    fn zero_bitstring_has_zero_energy() {
        let h = SymMatrix::from_fn(3, |i, j| (i as f64 - j as f64).cos());
        let enc = Encoding::new(2, 3, vec![0.2, -0.1, 0.4]).unwrap();
        let q = build_eigen_qubo(&h, &enc).unwrap();
        assert_eq!(q.energy(&[0; 6]), 0.0);
    }

    #[test]
    fn eigen_qubo_matches_objective_exhaustively() {
        let h = SymMatrix::from_rows(&[vec![0.7, -0.3], vec![-0.3, 1.9]]).unwrap().shifted(-0.75);
        let enc = Encoding::initial(2, 2).unwrap();
        let q = build_eigen_qubo(&h, &enc).unwrap();
        for bits in all_bitstrings(4) {
            let a = decode(&bits, &enc).unwrap();
            assert!((q.energy(&bits) - real_objective(&h, &a)).abs() < 1e-12);
        }
    }

    #[test]
    fn clock_qubo_real_input_decouples() {
        let c = HermMatrix::from(&SymMatrix::from_rows(&[vec![1.0, 0.4], vec![0.4, -0.2]]).unwrap());
        let enc = Encoding::new(2, 1, vec![0.3, -0.2, 0.1, 0.5]).unwrap();
        let q = build_clock_qubo(&c, &enc).unwrap();
        let k = 2;
        for (i, j, _) in q.terms() {
            let imag = |v: usize| (v % (2 * k)) >= k;
            assert_eq!(imag(i), imag(j), "cross term ({i},{j}) should vanish for real C");
        }
        // Real block equals the eigen QUBO on the real centers.
        let re_enc = Encoding::new(2, 1, vec![0.3, 0.1]).unwrap();
        let eq = build_eigen_qubo(&c.real_part(), &re_enc).unwrap();
        let map = |v: usize| 2 * k * (v / k) + v % k;
        for (i, j, v) in eq.terms() {
            assert_eq!(q.get(map(i), map(j)), v);
        }
    }

    #[test]
    fn complex_qubo_single_coefficient_minimum() {
        // C = [2], η = 3 → shifted C = [−1]. At K = 1 the reachable values are
        // {0, −1, −i, −1−i}; the joint flip reaches |a|² = 2.
        let c = HermMatrix::from(&SymMatrix::diagonal(&[2.0])).shifted(-3.0);
        let enc = Encoding::initial(1, 2).unwrap();
        let q = build_clock_qubo(&c, &enc).unwrap();
        let mut best = f64::INFINITY;
        for bits in all_bitstrings(2) {
            let a = decode_complex(&bits, &enc).unwrap();
            let e = q.energy(&bits);
            assert!((e - complex_objective(&c, &a)).abs() < 1e-14);
            best = best.min(e);
        }
        assert_eq!(best, -2.0);
        assert_eq!(q.energy(&[1, 1]), -2.0);
        assert_eq!(q.energy(&[1, 0]), -1.0);
        assert_eq!(q.energy(&[0, 1]), -1.0);
    }

    #[test]
    fn complex_qubo_matches_objective_exhaustively() {
        let c = HermMatrix::new(2, vec![0.5, -0.2, -0.2, 1.1], vec![0.0, 0.8, -0.8, 0.0]).unwrap().shifted(-0.4);
        let enc = Encoding::initial(1, 4).unwrap();
        let q = build_clock_qubo(&c, &enc).unwrap();
        for bits in all_bitstrings(4) {
            let a = decode_complex(&bits, &enc).unwrap();
            assert!((q.energy(&bits) - complex_objective(&c, &a)).abs() < 1e-12);
        }
    }

    #[test]
    fn text_format_round_trip() {
        let h = SymMatrix::from_fn(2, |i, j| 0.1 + i as f64 - 0.3 * j as f64);
        let q = build_eigen_qubo(&h, &Encoding::new(2, 3, vec![0.3, -0.6]).unwrap()).unwrap();
        let text = q.to_text();
        assert!(text.lines().all(|l| l.split_whitespace().count() == 3));
        let back = QuboInstance::from_text(&text, Some(q.n_vars())).unwrap();
        assert_eq!(back, q);
        assert!(QuboInstance::from_text("0 1", None).is_err());
        assert!(QuboInstance::from_text("0 5 1.0", Some(3)).is_err());
    }

    #[test]
    fn projection_moves_ground_state() {
        let h = SymMatrix::diagonal(&[0.0, 1.0]);
        let projected = project_hamiltonian(&h, &[StateVector::basis(2, 0)], &[10.0]).unwrap();
        assert_eq!(projected, SymMatrix::diagonal(&[10.0, 1.0]));
        let e = eigh(&projected).unwrap();
        assert_eq!(e.vectors[0].iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(project_hamiltonian(&h, &[], &[]).unwrap(), h);
        let bad = StateVector::from_real(vec![1.0, 1.0]);
        assert!(matches!(project_hamiltonian(&h, &[bad], &[1.0]), Err(Error::NotNormalized(_))));
        let complex = StateVector::from_complex(&[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        assert!(project_hamiltonian(&h, &[complex], &[1.0]).is_err());
    }
}
