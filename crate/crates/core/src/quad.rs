//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! summed estimate drops below `max(abs_tol, rel_tol * |value|)` or the
//! interval budget runs out. Evaluation order is fixed, so results are
//! bit-reproducible for a given integrand and tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], ...`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error(
        "quadrature budget of {intervals} intervals exhausted: value {value:e}, \
         error estimate {error:e}, requested {requested:e}"
    )]
    Budget {
        value: f64,
        error: f64,
        requested: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("invalid integration limits [{0}, {1}]")]
    Limits(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kron * half, ((kron - gauss) * half).abs()))
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral, QuadError> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates `f` over `[points[0], points[last]]`, seeding the adaptive
    /// partition with every listed point. Points must be nondecreasing;
    /// points outside the outer limits are ignored.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
    ) -> Result<Integral, QuadError> {
        let (lo, hi) = match (points.first(), points.last()) {
            (Some(&lo), Some(&hi)) if points.len() >= 2 => (lo, hi),
            _ => return Err(QuadError::Limits(f64::NAN, f64::NAN)),
        };
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(QuadError::Limits(lo, hi));
        }
        if hi == lo {
            return Ok(Integral {
                value: 0.0,
                error: 0.0,
                evaluations: 0,
            });
        }

        let mut cuts: Vec<f64> = points
            .iter()
            .copied()
            .filter(|p| p.is_finite() && *p >= lo && *p <= hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut heap = BinaryHeap::new();
        let mut value = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        for w in cuts.windows(2) {
            let (v, e) = kronrod(&f, w[0], w[1])?;
            evaluations += 21;
            value += v;
            error += e;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
            });
        }

        let min_width = 64.0 * f64::EPSILON * (hi - lo).abs().max(lo.abs().max(hi.abs()));
        loop {
            let requested = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= requested {
                break;
            }
            if heap.len() >= self.max_intervals {
                return Err(QuadError::Budget {
                    value,
                    error,
                    requested,
                    intervals: heap.len(),
                });
            }
            let Some(worst) = heap.pop() else { break };
            if worst.b - worst.a <= min_width {
                // Cannot refine further; keep it and stop.
                heap.push(worst);
                return Err(QuadError::Budget {
                    value,
                    error,
                    requested,
                    intervals: heap.len(),
                });
            }
            let mid = 0.5 * (worst.a + worst.b);
            let (v1, e1) = kronrod(&f, worst.a, mid)?;
            let (v2, e2) = kronrod(&f, mid, worst.b)?;
            evaluations += 42;
            value += v1 + v2 - worst.value;
            error += e1 + e2 - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }

        // Re-sum in position order so the result does not depend on the
        // accumulated rounding of the running total.
        let mut segs = heap.into_vec();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        let value = segs.iter().map(|s| s.value).sum();
        let error = segs.iter().map(|s| s.error).sum();
        Ok(Integral {
            value,
            error,
            evaluations,
        })
    }
}
