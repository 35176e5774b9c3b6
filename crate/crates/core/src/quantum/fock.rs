//! Truncated tensor-product Hilbert spaces and their ladder operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::QuantumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Harmonic ladder truncated at `n_max` quanta.
    Boson { n_max: usize },
    /// Ground/excited pair; level 0 is ground.
    TwoLevel,
    /// Orthogonal classical labels (e.g. trajectory branches) with no dynamics.
    Label { count: usize },
}

impl FactorKind {
    pub fn dim(&self) -> usize {
        match *self {
            FactorKind::Boson { n_max } => n_max + 1,
            FactorKind::TwoLevel => 2,
            FactorKind::Label { count } => count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factor {
    pub label: String,
    pub kind: FactorKind,
}

impl Factor {
    pub fn boson(label: impl Into<String>, n_max: usize) -> Self {
        Self {
            label: label.into(),
            kind: FactorKind::Boson { n_max },
        }
    }

    pub fn two_level(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            kind: FactorKind::TwoLevel,
        }
    }

    pub fn label(label: impl Into<String>, count: usize) -> Self {
        Self {
            label: label.into(),
            kind: FactorKind::Label { count },
        }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

/// Ordered tensor product of factors; the first factor is the most
/// significant digit of the basis index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockSpace {
    factors: Vec<Factor>,
}

impl FockSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self, QuantumError> {
        for (i, f) in factors.iter().enumerate() {
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(QuantumError::DuplicateLabel(f.label.clone()));
            }
            if f.dim() == 0 {
                return Err(QuantumError::EmptyFactor(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize, QuantumError> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| QuantumError::MissingFactor(label.to_string()))
    }

    /// Basis index of the occupation tuple `levels`.
    pub fn index(&self, levels: &[usize]) -> Result<usize, QuantumError> {
        if levels.len() != self.factors.len() {
            return Err(QuantumError::Dimension {
                expected: self.factors.len(),
                got: levels.len(),
            });
        }
        let mut idx = 0;
        for (f, &l) in self.factors.iter().zip(levels) {
            if l >= f.dim() {
                return Err(QuantumError::Level {
                    label: f.label.clone(),
                    level: l,
                });
            }
            idx = idx * f.dim() + l;
        }
        Ok(idx)
    }

    /// Basis index with the named factors at the given levels and every
    /// other factor at level 0.
    pub fn index_of(&self, levels: &[(&str, usize)]) -> Result<usize, QuantumError> {
        let mut digits = vec![0; self.factors.len()];
        for &(label, level) in levels {
            digits[self.position(label)?] = level;
        }
        self.index(&digits)
    }

    /// Occupation tuple of basis index `idx`.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.dim();
            idx /= f.dim();
        }
        out
    }

    /// Lowering operator of one factor, embedded in the full space:
    /// `√n |n−1⟩⟨n|` for a boson, `|g⟩⟨e|` for a two-level factor.
    pub fn lowering(&self, label: &str) -> Result<DMatrix<Complex64>, QuantumError> {
        let pos = self.position(label)?;
        if let FactorKind::Label { .. } = self.factors[pos].kind {
            return Err(QuantumError::NotDynamical(label.to_string()));
        }
        let boson = matches!(self.factors[pos].kind, FactorKind::Boson { .. });
        let stride: usize = self.factors[pos + 1..].iter().map(Factor::dim).product();
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let level = (col / stride) % self.factors[pos].dim();
            if level > 0 {
                let amp = if boson { (level as f64).sqrt() } else { 1.0 };
                m[(col - stride, col)] = Complex64::new(amp, 0.0);
            }
        }
        Ok(m)
    }

    /// Number operator of one factor (diagonal).
    pub fn number(&self, label: &str) -> Result<DVector<f64>, QuantumError> {
        let pos = self.position(label)?;
        Ok(DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| self.digits(i)[pos] as f64),
        ))
    }
}
