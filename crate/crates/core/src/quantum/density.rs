//! State vectors and density matrices over a [`FockSpace`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::fock::{Factor, FockSpace};
use super::QuantumError;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: FockSpace,
    amps: DVector<Complex64>,
}

impl QuantumState {
    pub fn new(space: FockSpace, amps: DVector<Complex64>) -> Result<Self, QuantumError> {
        if amps.len() != space.dim() {
            return Err(QuantumError::Dimension {
                expected: space.dim(),
                got: amps.len(),
            });
        }
        Ok(Self { space, amps })
    }

    /// Every factor in level 0.
    pub fn vacuum(space: FockSpace) -> Self {
        let mut amps = DVector::zeros(space.dim());
        amps[0] = Complex64::new(1.0, 0.0);
        Self { space, amps }
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.unscale_mut(n);
        }
        self
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// `⟨ψ|diag(d)|ψ⟩`.
    pub fn expect_diagonal(&self, diag: &DVector<f64>) -> f64 {
        self.amps.iter().zip(diag.iter()).map(|(a, d)| a.norm_sqr() * d).sum()
    }

    /// Total probability of basis states whose level in `label` is `level`.
    pub fn marginal(&self, label: &str, level: usize) -> Result<f64, QuantumError> {
        let pos = self.space.position(label)?;
        Ok((0..self.space.dim())
            .filter(|&i| self.space.digits(i)[pos] == level)
            .map(|i| self.probability(i))
            .sum())
    }
}

/// Density matrix over a declared tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    mat: DMatrix<Complex64>,
}

/// Tolerances for [`DensityMatrix::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTolerance {
    pub hermitian: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

impl Default for DensityTolerance {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            min_eigenvalue: -1e-10,
            trace: 1e-12,
        }
    }
}

impl DensityMatrix {
    pub fn new(space: FockSpace, mat: DMatrix<Complex64>) -> Result<Self, QuantumError> {
        if mat.nrows() != space.dim() || mat.ncols() != space.dim() {
            return Err(QuantumError::Dimension {
                expected: space.dim(),
                got: mat.nrows(),
            });
        }
        Ok(Self { space, mat })
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`; the vector need not be normalized.
    pub fn from_state(state: &QuantumState) -> Self {
        let v = state.amplitudes();
        let mat = v * v.adjoint();
        Self {
            space: state.space().clone(),
            mat,
        }
        .normalized()
    }

    /// Divides by the trace.
    pub fn normalized(mut self) -> Self {
        let tr = self.trace();
        if tr != 0.0 {
            self.mat.unscale_mut(tr);
        }
        self
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Real diagonal.
    pub fn populations(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|c| c.re).collect()
    }

    /// Population of the basis state with the named factors at the given
    /// levels (others at 0).
    pub fn population(&self, levels: &[(&str, usize)]) -> Result<f64, QuantumError> {
        let i = self.space.index_of(levels)?;
        Ok(self.mat[(i, i)].re)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Eigenvalues in ascending order (of the Hermitian part).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.mat + self.mat.adjoint()).unscale(2.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn validate(&self, tol: &DensityTolerance) -> Result<(), QuantumError> {
        let herm = self.hermiticity_error();
        if herm > tol.hermitian {
            return Err(QuantumError::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol.trace {
            return Err(QuantumError::Trace(tr));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < tol.min_eigenvalue {
            return Err(QuantumError::NotPositive(min));
        }
        Ok(())
    }

    /// Traces out every factor not named in `keep`. The kept factors stay
    /// in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix, QuantumError> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|l| self.space.position(l))
            .collect::<Result<_, _>>()?;
        let factors = self.space.factors();
        let kept: Vec<usize> = (0..factors.len()).filter(|i| positions.contains(i)).collect();
        let sub = FockSpace::new(kept.iter().map(|&i| factors[i].clone()).collect::<Vec<Factor>>())?;
        let traced: Vec<usize> = (0..factors.len()).filter(|i| !positions.contains(i)).collect();

        let full_digits: Vec<Vec<usize>> = (0..self.dim()).map(|i| self.space.digits(i)).collect();
        let sub_index = |d: &[usize]| -> usize {
            kept.iter().fold(0, |acc, &k| acc * factors[k].dim() + d[k])
        };
        let mut out = DMatrix::zeros(sub.dim(), sub.dim());
        for (i, di) in full_digits.iter().enumerate() {
            for (j, dj) in full_digits.iter().enumerate() {
                if traced.iter().all(|&k| di[k] == dj[k]) {
                    out[(sub_index(di), sub_index(dj))] += self.mat[(i, j)];
                }
            }
        }
        DensityMatrix::new(sub, out)
    }

    /// Keeps only the blocks diagonal in factor `label` (full dephasing of it).
    pub fn dephase(&self, label: &str) -> Result<DensityMatrix, QuantumError> {
        let pos = self.space.position(label)?;
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            let di = self.space.digits(i)[pos];
            for j in 0..self.dim() {
                if self.space.digits(j)[pos] != di {
                    mat[(i, j)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        DensityMatrix::new(self.space.clone(), mat)
    }

    /// `½ Σ |λ_i(ρ − σ)|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, QuantumError> {
        if self.space.dims() != other.space.dims() {
            return Err(QuantumError::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = &self.mat - &other.mat;
        let herm = (&diff + diff.adjoint()).unscale(2.0);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }
}
