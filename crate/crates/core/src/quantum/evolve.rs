//! The parametric-amplifier Hamiltonian of the resonant mode, its exact
//! propagator and the first-order perturbative state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::density::QuantumState;
use super::fock::{Factor, FockSpace};
use super::{QuantumError, DETECTOR};

/// Label of the single resonant mode in [`pair_space`].
pub const MODE: &str = "mode";

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    space: FockSpace,
    mat: DMatrix<Complex64>,
}

impl Hamiltonian {
    pub fn new(space: FockSpace, mat: DMatrix<Complex64>) -> Result<Self, QuantumError> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(QuantumError::Dimension {
                expected: space.dim(),
                got: mat.nrows(),
            });
        }
        Ok(Self { space, mat })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// `⟨row|H|col⟩` by occupation tuples.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<Complex64, QuantumError> {
        Ok(self.mat[(self.space.index(row)?, self.space.index(col)?)])
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// Resonant mode (`n_max` quanta) ⊗ two-level detector.
pub fn pair_space(mode: &str, n_max: usize) -> FockSpace {
    FockSpace::new(vec![Factor::boson(mode, n_max), Factor::two_level(DETECTOR)])
        .expect("distinct labels")
}

/// `H = (g_α/2)(a b + a† b†)` on the named factors of `space`.
pub fn build_ndpa(
    g_alpha: f64,
    space: &FockSpace,
    mode: &str,
    detector: &str,
) -> Result<Hamiltonian, QuantumError> {
    let a = space.lowering(mode)?;
    let b = space.lowering(detector)?;
    let ab = &a * &b;
    let mat = (&ab + ab.adjoint()).scale(0.5 * g_alpha);
    Hamiltonian::new(space.clone(), mat)
}

/// Cached eigendecomposition of a Hermitian Hamiltonian for repeated
/// propagation.
#[derive(Debug, Clone)]
pub struct Propagator {
    space: FockSpace,
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
    hbar: f64,
}

impl Propagator {
    pub fn new(h: &Hamiltonian, hbar: f64) -> Result<Self, QuantumError> {
        let scale = h.mat.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        let herm = h.hermiticity_error();
        if herm > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(QuantumError::NotHermitian(herm));
        }
        let eig = h.mat.clone().symmetric_eigen();
        Ok(Self {
            space: h.space.clone(),
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            hbar,
        })
    }

    /// `exp(−iHt/ℏ) ψ₀`.
    pub fn apply(&self, psi0: &QuantumState, t: f64) -> Result<QuantumState, QuantumError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(QuantumError::Time(t));
        }
        if psi0.space().dims() != self.space.dims() {
            return Err(QuantumError::Dimension {
                expected: self.space.dim(),
                got: psi0.space().dim(),
            });
        }
        let mut coeffs = self.vectors.adjoint() * psi0.amplitudes();
        for (c, e) in coeffs.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t / self.hbar);
        }
        QuantumState::new(self.space.clone(), &self.vectors * coeffs)
    }

    /// The unitary `exp(−iHt/ℏ)` itself.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.energies.len(),
            self.energies.iter().map(|e| Complex64::from_polar(1.0, -e * t / self.hbar)),
        );
        let mut scaled = self.vectors.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *ph;
        }
        scaled * self.vectors.adjoint()
    }
}

/// `ψ(t) = exp(−iHt/ℏ) ψ₀` by dense diagonalization.
pub fn evolve_exact(
    h: &Hamiltonian,
    psi0: &QuantumState,
    t: f64,
    hbar: f64,
) -> Result<QuantumState, QuantumError> {
    Propagator::new(h, hbar)?.apply(psi0, t)
}

/// Largest `|g t|/ℏ` accepted by [`evolve_perturbative`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeGuard(pub f64);

impl Default for PerturbativeGuard {
    fn default() -> Self {
        Self(0.3)
    }
}

/// First-order excitation amplitude `−i g t / 2ℏ` from the vacuum.
pub fn first_order_amplitude(g_alpha: f64, t: f64, hbar: f64) -> Complex64 {
    Complex64::new(0.0, -0.5 * g_alpha * t / hbar)
}

pub fn check_guard(g_alpha: f64, t: f64, hbar: f64, guard: PerturbativeGuard) -> Result<(), QuantumError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QuantumError::Time(t));
    }
    let gt = (g_alpha * t / hbar).abs();
    if gt > guard.0 {
        return Err(QuantumError::Guard { gt, limit: guard.0 });
    }
    Ok(())
}

/// Normalized first-order state `|0,g⟩ − i(g t/2ℏ)|1,e⟩` on [`pair_space`]
/// with one quantum of truncation.
pub fn evolve_perturbative(
    g_alpha: f64,
    t: f64,
    hbar: f64,
    guard: PerturbativeGuard,
) -> Result<QuantumState, QuantumError> {
    check_guard(g_alpha, t, hbar, guard)?;
    let space = pair_space(MODE, 1);
    let mut amps = DVector::zeros(space.dim());
    amps[space.index(&[0, 0])?] = Complex64::new(1.0, 0.0);
    amps[space.index(&[1, 1])?] = first_order_amplitude(g_alpha, t, hbar);
    Ok(QuantumState::new(space, amps)?.normalized())
}
