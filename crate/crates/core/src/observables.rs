//! Physical quantities computed from (exact or annealed) states.
//!
//! Entropies and negativities are in bits. Qubit sites are 0-based with
//! site 0 the most significant bit of the basis index.

use crate::error::{Error, Result};
use crate::linalg::{
    density_matrix, eigh_hermitian, partial_trace, partial_transpose, qubit_count, trace_norm, Operator, StateVector,
    Subsystem, SymMatrix,
};
use crate::models::Flavor;
use crate::solver::Summary;
use crate::table::{float, parse_float, Table};
use crate::tolerances;

/// `Re⟨ψ|H|ψ⟩` for a normalized `ψ`.
pub fn rayleigh<O: Operator>(psi: &StateVector, h: &O) -> Result<f64> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.dim() });
    }
    let e = h.expectation(psi);
    debug_assert!(e.im.abs() <= tolerances::IMAG_RESIDUE * (1.0 + e.re.abs()), "imaginary residue {}", e.im);
    Ok(e.re)
}

/// `|⟨ψ_in|ψ_t⟩|²`.
pub fn persistence(psi_t: &StateVector, psi_in: &StateVector) -> Result<f64> {
    if psi_t.dim() != psi_in.dim() {
        return Err(Error::DimensionMismatch { expected: psi_in.dim(), got: psi_t.dim() });
    }
    Ok(clamp_probability(psi_in.inner(psi_t).norm_sqr()))
}

/// `⟨ψ_t|H_E|ψ_t⟩`.
pub fn electric_energy(psi_t: &StateVector, h_e: &SymMatrix) -> Result<f64> {
    rayleigh(psi_t, h_e)
}

/// Probability that site `site` has changed flavor from `initial`:
/// `½⟨1 − σᶻ⟩` for an initial `ν_e`, `½⟨1 + σᶻ⟩` for an initial `ν_μ`.
pub fn flavor_probability(psi_t: &StateVector, site: usize, initial: Flavor) -> Result<f64> {
    let n = qubit_count(psi_t.dim())?;
    if site >= n {
        return Err(Error::InvalidParameter(format!("site {site} out of range for {n} qubits")));
    }
    let mut sz = 0.0;
    for b in 0..psi_t.dim() {
        let w = psi_t.get(b).norm_sqr();
        sz += if (b >> (n - 1 - site)) & 1 == 0 { w } else { -w };
    }
    sz /= psi_t.norm_sqr();
    let p = match initial {
        Flavor::Electron => 0.5 * (1.0 - sz),
        Flavor::Muon => 0.5 * (1.0 + sz),
    };
    Ok(clamp_probability(p))
}

/// Von Neumann entropy of one site's reduced density matrix, in bits.
pub fn entanglement_entropy(psi_t: &StateVector, site: usize) -> Result<f64> {
    let rho = partial_trace(&density_matrix(psi_t)?, &[site])?;
    let s: f64 = eigh_hermitian(&rho)?
        .values
        .iter()
        .filter(|&&l| l > tolerances::ENTROPY_FLOOR)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

/// `log₂ ‖ρ_ij^Γ‖₁`, zero when the trace norm does not exceed one.
pub fn log_negativity(psi_t: &StateVector, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidParameter("negativity needs two distinct sites".into()));
    }
    let rho = partial_trace(&density_matrix(psi_t)?, &[i, j])?;
    let norm = trace_norm(&partial_transpose(&rho, Subsystem::Second)?)?;
    Ok(if norm <= 1.0 + tolerances::NEGATIVITY_FLOOR { 0.0 } else { norm.log2() })
}

fn clamp_probability(p: f64) -> f64 {
    debug_assert!(
        (-tolerances::PROBABILITY_SLACK..=1.0 + tolerances::PROBABILITY_SLACK).contains(&p),
        "probability {p} out of range"
    );
    p.clamp(0.0, 1.0)
}

/// One observable against time, with a 68% band when several runs exist.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub lo68: Vec<f64>,
    pub hi68: Vec<f64>,
}

impl ObservableSeries {
    /// A series without spread: the band collapses onto the value.
    pub fn exact(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: values.len() });
        }
        Ok(Self { label: label.into(), lo68: values.clone(), hi68: values.clone(), times, values })
    }

    /// Median and nearest-rank 16th/84th percentiles over runs; `per_time[k]`
    /// holds one value per run at `times[k]`.
    pub fn from_runs(label: impl Into<String>, times: Vec<f64>, per_time: &[Vec<f64>]) -> Result<Self> {
        if times.len() != per_time.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: per_time.len() });
        }
        if per_time.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("every time point needs at least one run".into()));
        }
        let summaries: Vec<Summary> = per_time.iter().map(|v| Summary::of(v)).collect();
        Ok(Self {
            label: label.into(),
            times,
            values: summaries.iter().map(|s| s.median).collect(),
            lo68: summaries.iter().map(|s| s.p16).collect(),
            hi68: summaries.iter().map(|s| s.p84).collect(),
        })
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "value", "lo68", "hi68"]);
        for k in 0..self.times.len() {
            t.push(vec![float(self.times[k]), float(self.values[k]), float(self.lo68[k]), float(self.hi68[k])]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self> {
        let t = Table::from_csv(text)?;
        if t.header != ["t", "value", "lo68", "hi68"] {
            return Err(Error::Parse("expected columns t,value,lo68,hi68".into()));
        }
        let col = |k: usize| t.rows.iter().map(|r| parse_float(&r[k])).collect::<Result<Vec<f64>>>();
        Ok(Self { label: label.into(), times: col(0)?, values: col(1)?, lo68: col(2)?, hi68: col(3)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermMatrix;
    use crate::models::su3_plaquette_hamiltonian;
    use num_complex::Complex64;

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(vec![s, 0.0, 0.0, s])
    }

    #[test]
    fn rayleigh_examples() {
        let h = SymMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let uniform = StateVector::from_real(vec![0.5; 4]);
        assert!((rayleigh(&uniform, &h).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(rayleigh(&StateVector::basis(4, 2), &h).unwrap(), 3.0);
        assert!(rayleigh(&StateVector::basis(3, 0), &h).is_err());
        let c = HermMatrix::from(&h);
        assert!((rayleigh(&uniform, &c).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn persistence_examples() {
        let a = StateVector::basis(3, 0);
        assert_eq!(persistence(&a, &a).unwrap(), 1.0);
        assert_eq!(persistence(&StateVector::basis(3, 1), &a).unwrap(), 0.0);
    }

    #[test]
    fn electric_energy_examples() {
        let p = su3_plaquette_hamiltonian(1.0).unwrap();
        assert!(electric_energy(&StateVector::basis(4, 0), &p.electric).unwrap().abs() < 1e-14);
        assert!((electric_energy(&StateVector::basis(4, 3), &p.electric).unwrap() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn flavor_probability_of_initial_state_is_zero() {
        let psi = crate::models::flavor_state(&crate::models::beam_flavors(4));
        for (site, f) in crate::models::beam_flavors(4).into_iter().enumerate() {
            assert_eq!(flavor_probability(&psi, site, f).unwrap(), 0.0);
        }
        assert!(flavor_probability(&psi, 4, Flavor::Electron).is_err());
    }

    #[test]
    fn product_and_bell_entanglement() {
        let product = StateVector::basis(4, 1);
        assert_eq!(entanglement_entropy(&product, 0).unwrap(), 0.0);
        assert_eq!(log_negativity(&product, 0, 1).unwrap(), 0.0);
        assert!((entanglement_entropy(&bell(), 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((entanglement_entropy(&bell(), 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((log_negativity(&bell(), 0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(log_negativity(&bell(), 1, 1).is_err());
    }

    #[test]
    fn observables_ignore_global_phase() {
        let psi = StateVector::from_complex(&[
            Complex64::new(0.1, 0.3),
            Complex64::new(-0.5, 0.2),
            Complex64::new(0.4, -0.1),
            Complex64::new(0.2, 0.6),
        ])
        .normalized()
        .unwrap();
        let rotated = psi.rotated(Complex64::from_polar(1.0, 1.234));
        let h = su3_plaquette_hamiltonian(1.3).unwrap();
        let pairs = [
            (rayleigh(&psi, &h.hamiltonian).unwrap(), rayleigh(&rotated, &h.hamiltonian).unwrap()),
            (persistence(&psi, &StateVector::basis(4, 0)).unwrap(), persistence(&rotated, &StateVector::basis(4, 0)).unwrap()),
            (flavor_probability(&psi, 1, Flavor::Muon).unwrap(), flavor_probability(&rotated, 1, Flavor::Muon).unwrap()),
            (entanglement_entropy(&psi, 0).unwrap(), entanglement_entropy(&rotated, 0).unwrap()),
            (log_negativity(&psi, 0, 1).unwrap(), log_negativity(&rotated, 0, 1).unwrap()),
        ];
        for (a, b) in pairs {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn series_statistics_and_csv() {
        let s = ObservableSeries::from_runs("p", vec![0.0, 0.5], &[vec![0.1, 0.3, 0.2], vec![1.0; 3]]).unwrap();
        assert_eq!(s.values, vec![0.2, 1.0]);
        assert_eq!(s.lo68, vec![0.1, 1.0]);
        assert_eq!(s.hi68, vec![0.3, 1.0]);
        let text = s.to_csv();
        assert!(text.starts_with("t,value,lo68,hi68\n"));
        assert_eq!(ObservableSeries::from_csv("p", &text).unwrap(), s);
        let e = ObservableSeries::exact("e", vec![1.0], vec![2.0]).unwrap();
        assert_eq!((e.lo68[0], e.hi68[0]), (2.0, 2.0));
    }
}
