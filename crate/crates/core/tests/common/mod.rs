//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use ginzburg::params::SystemParams;
use ginzburg::quad::Quadrature;
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

/// Paper units with the defaults used for the mean-field figures.
pub fn paper(n: usize) -> SystemParams {
    SystemParams::paper_units(n, 0.01, 10.0 * PI, 1.0).unwrap()
}

/// `K₁(y) = y ∫₀^∞ cos x (x² + y²)^{−3/2} dx` by direct quadrature.
///
/// The contour is shifted to `Im x = c` with `c = max(0, y − 1)`; the vertical
/// leg contributes only to the imaginary part, and the shift turns the
/// `e^{−y}` cancellation of the real axis into an explicit `e^{−c}` factor.
/// The tail beyond `U` is summed by three integrations by parts.
pub fn k1_oracle(y: f64) -> f64 {
    let c = (y - 1.0).max(0.0);
    let g = |u: f64| -> Complex64 {
        let z = Complex64::new(u, c);
        (z * z + y * y).powf(-1.5)
    };
    let integrand = |u: f64| (Complex64::from_polar(1.0, u) * g(u)).re;

    let upper = 2000.0 * PI;
    let mut breaks = vec![0.0];
    let mut s = 1e-3 * y;
    while s < PI {
        breaks.push(s);
        s *= 4.0;
    }
    let mut k = 1.0;
    while k * PI <= upper {
        breaks.push(k * PI);
        k += 1.0;
    }
    let scale = g(0.0).norm();
    let body = Quadrature::new(1e-16 * scale, 1e-13)
        .with_max_intervals(200_000)
        .integrate_with_breaks(integrand, &breaks)
        .expect("oracle quadrature converges")
        .value;

    let z = Complex64::new(upper, c);
    let r = z * z + y * y;
    let g0 = r.powf(-1.5);
    let g1 = -3.0 * z * r.powf(-2.5);
    let g2 = -3.0 * r.powf(-2.5) + 15.0 * z * z * r.powf(-3.5);
    let i = Complex64::i();
    let tail = Complex64::from_polar(1.0, upper) * (i * g0 - g1 - i * g2);
    y * (-c).exp() * (body + tail.re)
}

/// `ln`-spaced points on `[lo, hi]`.
pub fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Squared eigenfrequencies of the free-ended spring chain with half-mass
/// end dipoles, ascending, the zero (center-of-mass) mode removed.
pub fn spring_spectrum(n: usize, m_c: f64, k_c: f64) -> Vec<f64> {
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        k[(i, i)] += k_c;
        k[(i + 1, i + 1)] += k_c;
        k[(i, i + 1)] -= k_c;
        k[(i + 1, i)] -= k_c;
    }
    let inv_sqrt_m: Vec<f64> = (0..n)
        .map(|i| {
            let m = if i == 0 || i == n - 1 { 0.5 * m_c } else { m_c };
            1.0 / m.sqrt()
        })
        .collect();
    let dyn_mat = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * inv_sqrt_m[i] * inv_sqrt_m[j]);
    let mut ev: Vec<f64> = dyn_mat.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.remove(0);
    ev
}

/// Amplitudes on `{|0,g⟩, |1,e⟩}` from the vacuum under
/// `H = (g/2)(|1,e⟩⟨0,g| + h.c.)`, by diagonalizing the 2×2 block.
pub fn pair_block(g: f64, t: f64, hbar: f64) -> [Complex64; 2] {
    let h = Matrix2::new(0.0, 0.5 * g, 0.5 * g, 0.0);
    let eig = h.symmetric_eigen();
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for k in 0..2 {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t / hbar);
        let overlap = eig.eigenvectors[(0, k)];
        for (row, o) in out.iter_mut().enumerate() {
            *o += eig.eigenvectors[(row, k)] * overlap * phase;
        }
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Interior strict local extrema of a sampled curve.
pub fn local_extrema(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
            (b > a && b > c) || (b < a && b < c)
        })
        .collect()
}

/// Full width at half maximum of `f` around a peak at `x_peak`, by bisection
/// on each side within `reach`.
pub fn half_max_width<F: Fn(f64) -> f64>(f: F, x_peak: f64, reach: f64) -> f64 {
    let peak = f(x_peak);
    let half = 0.5 * peak;
    let side = |dir: f64| {
        let (mut lo, mut hi) = (0.0, reach);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(x_peak + dir * mid) - half) * peak.signum() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    side(1.0) + side(-1.0)
}
