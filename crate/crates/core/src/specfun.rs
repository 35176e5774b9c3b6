//! Interaction kernel `h`, its derivatives, the modified Bessel function
//! `K₁` and the mode cutoff `f(y) = y K₁(y)`.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("kernel derivative order must be 1, 2 or 3 (got {0})")]
    Order(u8),
    #[error("K1 requires y > 0 (got {0})")]
    BesselDomain(f64),
    #[error("cutoff f requires y >= 0 (got {0})")]
    CutoffDomain(f64),
    #[error("kernel width w must be positive (got {0})")]
    Width(f64),
}

/// Perpendicular chain–detector distance entering the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    w: f64,
}

impl KernelParams {
    pub fn new(w: f64) -> Result<Self, SpecfunError> {
        if w > 0.0 && w.is_finite() {
            Ok(Self { w })
        } else {
            Err(SpecfunError::Width(w))
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self, x: f64, x_d: f64) -> f64 {
        kernel_h(x, x_d, self.w)
    }
}

/// `h(x, x_d) = [(x − x_d)² + w²]^(−3/2)`.
#[inline]
pub fn kernel_h(x: f64, x_d: f64, w: f64) -> f64 {
    let s = x - x_d;
    let r = s * s + w * w;
    1.0 / (r * r.sqrt())
}

/// Analytic `∂ᵏh/∂xᵏ` for `k ∈ {1, 2, 3}`.
pub fn kernel_h_deriv(order: u8, x: f64, x_d: f64, w: f64) -> Result<f64, SpecfunError> {
    match order {
        1 => Ok(kernel_h_d1(x, x_d, w)),
        2 => Ok(kernel_h_d2(x, x_d, w)),
        3 => Ok(kernel_h_d3(x, x_d, w)),
        k => Err(SpecfunError::Order(k)),
    }
}

#[inline]
pub fn kernel_h_d1(x: f64, x_d: f64, w: f64) -> f64 {
    let s = x - x_d;
    let r = s * s + w * w;
    -3.0 * s / (r * r * r.sqrt())
}

#[inline]
pub fn kernel_h_d2(x: f64, x_d: f64, w: f64) -> f64 {
    let s = x - x_d;
    let r = s * s + w * w;
    // −3 r^(−5/2) + 15 s² r^(−7/2) = (12 s² − 3 w²) r^(−7/2)
    (12.0 * s * s - 3.0 * w * w) / (r * r * r * r.sqrt())
}

#[inline]
pub fn kernel_h_d3(x: f64, x_d: f64, w: f64) -> f64 {
    let s = x - x_d;
    let r = s * s + w * w;
    // 45 s r^(−7/2) − 105 s³ r^(−9/2) = s (45 w² − 60 s²) r^(−9/2)
    s * (45.0 * w * w - 60.0 * s * s) / (r * r * r * r * r.sqrt())
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind, order one.
///
/// Power series with the logarithmic term for `y ≤ 2`; Steed's continued
/// fraction (Temme's CF2 at order zero, then the K₀ → K₁ relation) above.
pub fn bessel_k1(y: f64) -> Result<f64, SpecfunError> {
    if !(y > 0.0) || y.is_nan() {
        return Err(SpecfunError::BesselDomain(y));
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    Ok(if y <= 2.0 { k1_series(y) } else { k1_steed(y) })
}

fn k1_series(x: f64) -> f64 {
    // K₁(x) = 1/x + ln(x/2) I₁(x) − (x/4) Σ [ψ(k+1) + ψ(k+2)] z^k / (k!(k+1)!)
    // with z = x²/4 and I₁(x) = (x/2) Σ z^k / (k!(k+1)!).
    let z = 0.25 * x * x;
    let mut term = 1.0;
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut i_sum = 0.0;
    let mut psi_sum = 0.0;
    let mut k = 0.0;
    loop {
        i_sum += term;
        psi_sum += (psi1 + psi2) * term;
        k += 1.0;
        term *= z / (k * (k + 1.0));
        psi1 += 1.0 / k;
        psi2 += 1.0 / (k + 1.0);
        if term < 1e-18 * i_sum {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * 0.5 * x * i_sum - 0.25 * x * psi_sum
}

fn k1_steed(x: f64) -> f64 {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - a1 * h) / x
}

/// Cutoff `f(y) = y K₁(y)`, with the continuous extension `f(0) = 1`.
pub fn cutoff_f(y: f64) -> Result<f64, SpecfunError> {
    if y < 0.0 || y.is_nan() {
        return Err(SpecfunError::CutoffDomain(y));
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    if y.is_infinite() {
        return Ok(0.0);
    }
    Ok(y * bessel_k1(y)?)
}
