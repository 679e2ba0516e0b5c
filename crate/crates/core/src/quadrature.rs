//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs, rel * |I|)` or the subinterval budget is
//! exhausted. Nodes are interior, so integrable endpoint singularities such as
//! `x^nu` with `nu > -1` are handled by repeated bisection toward the endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Absolute / relative targets and the subinterval budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
            max_intervals: 400,
        }
    }
}

impl Tolerance {
    pub fn tight() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(Error::Divergent(format!(
            "non-finite integrand on [{lo:e}, {hi:e}]"
        )));
    }
    let error = ((kronrod - gauss) * half)
        .abs()
        .max(50.0 * f64::EPSILON * value.abs());
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<QuadResult> {
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::precondition(format!(
            "quadrature needs a finite interval with lo <= hi, got [{lo}, {hi}]"
        )));
    }

    let first = gk15(&f, lo, hi)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                achieved: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval no longer splittable in floating point.
            return Err(Error::Quadrature {
                lo,
                hi,
                estimate: total,
                achieved: total_err,
                intervals: heap.len() + 1,
            });
        }
        let left = gk15(&f, worst.lo, mid)?;
        let right = gk15(&f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the incremental updates.
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadResult {
        value,
        abs_error,
        intervals: heap.len(),
    })
}

/// Convenience wrapper returning only the value with the default tolerance.
pub fn integrate_default<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    integrate(f, lo, hi, Tolerance::default()).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| x * (-x).exp(), 0.0, 50.0, Tolerance::tight()).unwrap();
        let exact = 1.0 - 51.0 * (-50.0f64).exp();
        assert!((r.value - exact).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 4.0, Tolerance::tight()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn logarithmic_divergence_is_reported() {
        let err = integrate(|x| 1.0 / x, 0.0, 2.0, Tolerance::default()).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }), "{err}");
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate_default(|x| x, 1.0, 1.0).unwrap(), 0.0);
        assert!(integrate_default(|x| x, 1.0, 0.0).is_err());
    }
}
