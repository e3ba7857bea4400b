//! Dense real-symmetric and complex-Hermitian kernels.
//!
//! Everything in the crate that needs a spectrum, a propagator or a reduced
//! density matrix goes through [`eigh`] / [`eigh_hermitian`]. The dimensions
//! in play are at most a few thousand, so dense diagonalization is exact
//! enough and keeps one primitive at the bottom of the stack.
//!
//! Complex matrices are stored as a pair of real row-major arrays. Basis
//! states of multi-qubit registers are ordered with site 0 as the most
//! significant bit.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances;

/// Real symmetric matrix, row-major. Construction symmetrizes exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = v;
        }
        m
    }

    /// Builds `(f(i,j) + f(j,i)) / 2` for every entry.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = if i == j { f(i, i) } else { 0.5 * (f(i, j) + f(j, i)) };
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self::from_fn(dim, |i, j| data[i * dim + j]))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(dim, &data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += shift;
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Adds `weight * v v^T` in place.
    pub fn add_outer(&mut self, v: &[f64], weight: f64) -> Result<()> {
        check_dim(self.dim, v.len())?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i * self.dim + j] += weight * v[i] * v[j];
            }
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v^T M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.matvec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

/// Complex Hermitian matrix held as a symmetric real part and an
/// antisymmetric imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermMatrix {
    /// Validates Hermiticity to [`tolerances::HERMITIAN`] (relative to the
    /// largest entry) and then projects onto the exactly Hermitian part.
    pub fn new(dim: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        for part in [&re, &im] {
            if part.len() != dim * dim {
                return Err(Error::DimensionMismatch { expected: dim * dim, got: part.len() });
            }
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let scale = re.iter().chain(&im).fold(1.0f64, |m, v| m.max(v.abs()));
        let mut dev = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                dev = dev.max((re[i * dim + j] - re[j * dim + i]).abs());
                dev = dev.max((im[i * dim + j] + im[j * dim + i]).abs());
            }
        }
        if dev > tolerances::HERMITIAN * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::hermitize(dim, &re, &im))
    }

    fn hermitize(dim: usize, re: &[f64], im: &[f64]) -> Self {
        let mut out = Self { dim, re: vec![0.0; dim * dim], im: vec![0.0; dim * dim] };
        for i in 0..dim {
            for j in i..dim {
                let r = 0.5 * (re[i * dim + j] + re[j * dim + i]);
                let m = if i == j { 0.0 } else { 0.5 * (im[i * dim + j] - im[j * dim + i]) };
                out.re[i * dim + j] = r;
                out.re[j * dim + i] = r;
                out.im[i * dim + j] = m;
                out.im[j * dim + i] = -m;
            }
        }
        out
    }

    /// Builds the Hermitian part of the matrix given entry-wise by `f`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut re = vec![0.0; dim * dim];
        let mut im = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let z = f(i, j);
                re[i * dim + j] = z.re;
                im[i * dim + j] = z.im;
            }
        }
        Self::hermitize(dim, &re, &im)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, re: vec![0.0; dim * dim], im: vec![0.0; dim * dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[i * self.dim + j], self.im[i * self.dim + j])
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    #[inline]
    pub fn re_at(&self, i: usize, j: usize) -> f64 {
        self.re[i * self.dim + j]
    }

    #[inline]
    pub fn im_at(&self, i: usize, j: usize) -> f64 {
        self.im[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.re_at(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.re.iter().zip(&self.im).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|v| *v == 0.0)
    }

    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.re[i * self.dim + i] += shift;
        }
        m
    }

    /// Real part as a symmetric matrix.
    pub fn real_part(&self) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.re.clone() }
    }

    pub fn matvec(&self, v: &StateVector) -> StateVector {
        assert_eq!(v.dim(), self.dim);
        let n = self.dim;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for i in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                let (a, b) = (self.re[i * n + j], self.im[i * n + j]);
                sr += a * v.re[j] - b * v.im[j];
                si += a * v.im[j] + b * v.re[j];
            }
            re[i] = sr;
            im[i] = si;
        }
        StateVector { re, im }
    }

    /// `<v|M|v>` (complex; the imaginary part vanishes up to rounding).
    pub fn expectation(&self, v: &StateVector) -> Complex64 {
        v.inner(&self.matvec(v))
    }

    pub fn matmul(&self, other: &HermMatrix) -> CMatrix {
        CMatrix::from(self).matmul(&CMatrix::from(other))
    }

    fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }
}

/// Anything with a Hermitian expectation value on a [`StateVector`].
pub trait Operator {
    fn dim(&self) -> usize;
    /// `<v|M|v>` without normalization.
    fn expectation(&self, v: &StateVector) -> Complex64;
}

impl Operator for SymMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn expectation(&self, v: &StateVector) -> Complex64 {
        assert_eq!(v.dim(), self.dim);
        // For real symmetric M the cross terms cancel exactly.
        Complex64::new(self.quadratic_form(&v.re) + self.quadratic_form(&v.im), 0.0)
    }
}

impl Operator for HermMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn expectation(&self, v: &StateVector) -> Complex64 {
        HermMatrix::expectation(self, v)
    }
}

impl From<&SymMatrix> for HermMatrix {
    fn from(m: &SymMatrix) -> Self {
        Self { dim: m.dim, re: m.data.clone(), im: vec![0.0; m.data.len()] }
    }
}

/// General square complex matrix (propagators, products).
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut re = vec![0.0; dim * dim];
        for i in 0..dim {
            re[i * dim + i] = 1.0;
        }
        Self { dim, re, im: vec![0.0; dim * dim] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut re = vec![0.0; dim * dim];
        let mut im = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let z = f(i, j);
                re[i * dim + j] = z.re;
                im[i * dim + j] = z.im;
            }
        }
        Self { dim, re, im }
    }

    pub fn from_parts(dim: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        for part in [&re, &im] {
            if part.len() != dim * dim {
                return Err(Error::DimensionMismatch { expected: dim * dim, got: part.len() });
            }
        }
        Ok(Self { dim, re, im })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[i * self.dim + j], self.im[i * self.dim + j])
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMatrix { dim: n, re: vec![0.0; n * n], im: vec![0.0; n * n] };
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    out.re[i * n + j] += a.re * b.re - a.im * b.im;
                    out.im[i * n + j] += a.re * b.im + a.im * b.re;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &StateVector) -> StateVector {
        assert_eq!(v.dim(), self.dim);
        let n = self.dim;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for i in 0..n {
            let (mut sr, mut si) = (0.0, 0.0);
            for j in 0..n {
                let (a, b) = (self.re[i * n + j], self.im[i * n + j]);
                sr += a * v.re[j] - b * v.im[j];
                si += a * v.im[j] + b * v.re[j];
            }
            re[i] = sr;
            im[i] = si;
        }
        StateVector { re, im }
    }

    /// Largest entry-wise deviation of `U U^†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.matmul(&self.adjoint());
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((p.get(i, j) - target).norm());
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        (0..self.dim * self.dim)
            .map(|k| Complex64::new(self.re[k] - other.re[k], self.im[k] - other.im[k]).norm())
            .fold(0.0, f64::max)
    }
}

impl From<&HermMatrix> for CMatrix {
    fn from(m: &HermMatrix) -> Self {
        Self { dim: m.dim, re: m.re.clone(), im: m.im.clone() }
    }
}

impl From<&SymMatrix> for CMatrix {
    fn from(m: &SymMatrix) -> Self {
        Self { dim: m.dim, re: m.data.clone(), im: vec![0.0; m.data.len()] }
    }
}

/// Complex coefficient vector over a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StateVector {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch { expected: re.len(), got: im.len() });
        }
        if re.is_empty() {
            return Err(Error::InvalidParameter("state dimension must be positive".into()));
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state components"));
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: Vec<f64>) -> Self {
        let n = re.len();
        Self { re, im: vec![0.0; n] }
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        Self { re: z.iter().map(|c| c.re).collect(), im: z.iter().map(|c| c.im).collect() }
    }

    /// Computational basis state `e_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut re = vec![0.0; dim];
        re[k] = 1.0;
        Self { re, im: vec![0.0; dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.re.len()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.get(i)).collect()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|v| *v == 0.0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(1.0 / n))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            re: self.re.iter().map(|v| v * factor).collect(),
            im: self.im.iter().map(|v| v * factor).collect(),
        }
    }

    /// Multiplies by the unit-modulus phase `z / |z|`.
    pub fn rotated(&self, phase: Complex64) -> Self {
        let z = self.to_complex();
        Self::from_complex(&z.iter().map(|c| c * phase).collect::<Vec<_>>())
    }

    /// `<self|other>` (antilinear in `self`).
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            s += self.get(i).conj() * other.get(i);
        }
        s
    }

    /// Index of the largest-magnitude component (first one on ties).
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        let mut best_mag = -1.0;
        for i in 0..self.dim() {
            let m = self.re[i].hypot(self.im[i]);
            if m > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = m;
            }
        }
        best
    }

    /// The unit phase that makes the component at `index` real and positive.
    pub fn phase_fixing(&self, index: usize) -> Complex64 {
        let z = self.get(index);
        if z.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            z.conj() / z.norm()
        }
    }

    /// Global phase chosen so the largest-magnitude component is real and positive.
    /// Real vectors only have their sign flipped, so they stay exactly real.
    pub fn phase_aligned(&self) -> Self {
        if self.is_real() {
            let k = self.dominant_index();
            return if self.re[k] < 0.0 { self.scaled(-1.0) } else { self.clone() };
        }
        let phase = self.phase_fixing(self.dominant_index());
        self.rotated(phase)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        (0..self.dim()).map(|i| (self.get(i) - other.get(i)).norm()).fold(0.0, f64::max)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Real eigendecomposition: ascending eigenvalues, orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Complex Hermitian eigendecomposition.
#[derive(Debug, Clone)]
pub struct EighHermitian {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

pub fn eigh(h: &SymMatrix) -> Result<Eigh> {
    if !h.is_finite() {
        return Err(Error::NonFinite("Hamiltonian"));
    }
    let dec = nalgebra::linalg::SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..h.dim).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    Ok(Eigh {
        values: order.iter().map(|&k| dec.eigenvalues[k]).collect(),
        vectors: order.iter().map(|&k| dec.eigenvectors.column(k).iter().copied().collect()).collect(),
    })
}

pub fn eigh_hermitian(h: &HermMatrix) -> Result<EighHermitian> {
    if h.re.iter().chain(&h.im).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Hamiltonian"));
    }
    let dec = nalgebra::linalg::SymmetricEigen::new(h.to_nalgebra());
    let mut order: Vec<usize> = (0..h.dim).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    Ok(EighHermitian {
        values: order.iter().map(|&k| dec.eigenvalues[k]).collect(),
        vectors: order
            .iter()
            .map(|&k| StateVector::from_complex(&dec.eigenvectors.column(k).iter().copied().collect::<Vec<_>>()))
            .collect(),
    })
}

/// Eigenvalues only (ascending).
pub fn spectrum(h: &SymMatrix) -> Result<Vec<f64>> {
    Ok(eigh(h)?.values)
}

/// `U = exp(-i t H) = V diag(e^{-i t λ}) V^†`.
pub fn expm_unitary(h: &HermMatrix, t: f64) -> Result<CMatrix> {
    let dec = eigh_hermitian(h)?;
    let n = h.dim;
    let phases: Vec<Complex64> =
        dec.values.iter().map(|&l| Complex64::from_polar(1.0, -t * l)).collect();
    Ok(CMatrix::from_fn(n, |i, j| {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, v) in dec.vectors.iter().enumerate() {
            s += v.get(i) * phases[k] * v.get(j).conj();
        }
        s
    }))
}

/// `ρ = |ψ><ψ|` for the normalized direction of `psi`.
pub fn density_matrix(psi: &StateVector) -> Result<HermMatrix> {
    let psi = psi.normalized()?;
    let n = psi.dim();
    Ok(HermMatrix::from_fn(n, |i, j| psi.get(i) * psi.get(j).conj()))
}

/// Number of qubits `N` when `dim = 2^N`.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Reduced density matrix on the sites in `keep` (0-based, site 0 is the
/// most significant bit). The kept sites appear in ascending order.
pub fn partial_trace(rho: &HermMatrix, keep: &[usize]) -> Result<HermMatrix> {
    let n_sites = qubit_count(rho.dim)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one site".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&s| s >= n_sites) {
        return Err(Error::InvalidParameter(format!("site {bad} out of range for {n_sites} qubits")));
    }
    let traced: Vec<usize> = (0..n_sites).filter(|s| !keep.contains(s)).collect();
    let bit = |idx: usize, site: usize| (idx >> (n_sites - 1 - site)) & 1;
    let split = |idx: usize| -> (usize, usize) {
        let k = keep.iter().fold(0, |acc, &s| (acc << 1) | bit(idx, s));
        let t = traced.iter().fold(0, |acc, &s| (acc << 1) | bit(idx, s));
        (k, t)
    };
    let dk = 1usize << keep.len();
    let mut re = vec![0.0; dk * dk];
    let mut im = vec![0.0; dk * dk];
    let parts: Vec<(usize, usize)> = (0..rho.dim).map(split).collect();
    for i in 0..rho.dim {
        let (ki, ti) = parts[i];
        for j in 0..rho.dim {
            let (kj, tj) = parts[j];
            if ti == tj {
                re[ki * dk + kj] += rho.re_at(i, j);
                im[ki * dk + kj] += rho.im_at(i, j);
            }
        }
    }
    Ok(HermMatrix::hermitize(dk, &re, &im))
}

/// Which factor of a two-qubit operator is transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial transpose of a two-qubit operator.
pub fn partial_transpose(rho: &HermMatrix, subsystem: Subsystem) -> Result<HermMatrix> {
    if rho.dim != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim });
    }
    let idx = |a: usize, b: usize| 2 * a + b;
    let mut re = vec![0.0; 16];
    let mut im = vec![0.0; 16];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let (src_r, src_c) = match subsystem {
                        Subsystem::Second => (idx(a, d), idx(c, b)),
                        Subsystem::First => (idx(c, b), idx(a, d)),
                    };
                    re[idx(a, b) * 4 + idx(c, d)] = rho.re_at(src_r, src_c);
                    im[idx(a, b) * 4 + idx(c, d)] = rho.im_at(src_r, src_c);
                }
            }
        }
    }
    Ok(HermMatrix::hermitize(4, &re, &im))
}

/// Sum of singular values; for Hermitian input this is `Σ|λ_k|`.
pub fn trace_norm(m: &HermMatrix) -> Result<f64> {
    Ok(eigh_hermitian(m)?.values.iter().map(|l| l.abs()).sum())
}

/// Kronecker product of two general complex matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim, b.dim);
    CMatrix::from_fn(na * nb, |i, j| a.get(i / nb, j / nb) * b.get(i % nb, j % nb))
}
