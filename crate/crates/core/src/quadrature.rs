//! Adaptive Gauss-Kronrod (7/15) quadrature of vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{epsilon, lit, to_f64, Real};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: lit(1e-8),
            abs_tol: lit(1e-13),
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral<T, const D: usize> {
    pub value: [T; D],
    /// Sum of per-interval Kronrod-Gauss differences, per component.
    pub error: [T; D],
    pub intervals: usize,
}

struct Panel<T, const D: usize> {
    a: T,
    b: T,
    value: [T; D],
    error: [T; D],
    scale: [T; D],
    key: f64,
}

impl<T, const D: usize> PartialEq for Panel<T, D> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<T, const D: usize> Eq for Panel<T, D> {}
impl<T, const D: usize> PartialOrd for Panel<T, D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T, const D: usize> Ord for Panel<T, D> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

type Rule<T, const D: usize> = ([T; D], [T; D], [T; D]);

fn kronrod<T: Real, const D: usize, F>(f: &F, a: T, b: T) -> Result<Rule<T, D>>
where
    F: Fn(T) -> Result<[T; D]>,
{
    let half = (b - a) * lit(0.5);
    let center = (a + b) * lit(0.5);
    let mut k = [T::zero(); D];
    let mut g = [T::zero(); D];
    let mut s_abs = [T::zero(); D];
    let fc = f(center)?;
    for d in 0..D {
        k[d] = fc[d] * lit(WGK[7]);
        g[d] = fc[d] * lit(WG[3]);
        s_abs[d] = fc[d].abs() * lit(WGK[7]);
    }
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for d in 0..D {
            let s = f1[d] + f2[d];
            k[d] += s * lit(WGK[j]);
            s_abs[d] += (f1[d].abs() + f2[d].abs()) * lit(WGK[j]);
            if j % 2 == 1 {
                g[d] += s * lit(WG[j / 2]);
            }
        }
    }
    let mut err = [T::zero(); D];
    for d in 0..D {
        k[d] *= half;
        g[d] *= half;
        s_abs[d] *= half.abs();
        err[d] = (k[d] - g[d]).abs();
    }
    Ok((k, err, s_abs))
}

/// Integrates `f` over `[a, b]` with mandatory interior `breakpoints`.
///
/// Intervals are bisected worst-first until, for every component,
/// `error <= max(abs_tol, rel_tol * S)` with `S` the integral of `|f|`, so
/// integrals that cancel to zero still terminate.
pub fn integrate<T: Real, const D: usize, F>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T, D>>
where
    F: Fn(T) -> Result<[T; D]>,
{
    let mut cuts: Vec<T> = vec![a];
    let mut inner: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let min_gap = (b - a) * epsilon::<T>() * lit(64.0);
    for x in inner {
        if x - *cuts.last().unwrap() > min_gap {
            cuts.push(x);
        }
    }
    if b - *cuts.last().unwrap() <= min_gap && cuts.len() > 1 {
        cuts.pop();
    }
    cuts.push(b);

    let score = |e: &[T; D], v: &[T; D]| -> f64 {
        // worst ratio of error to the allowed error
        (0..D)
            .map(|d| {
                let allowed = spec.abs_tol.max(spec.rel_tol * v[d]);
                to_f64(e[d]) / to_f64(allowed).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    };

    let mut heap: BinaryHeap<Panel<T, D>> = BinaryHeap::new();
    let mut total = [T::zero(); D];
    let mut total_err = [T::zero(); D];
    let mut total_scale = [T::zero(); D];
    for w in cuts.windows(2) {
        let (v, e, s) = kronrod(&f, w[0], w[1])?;
        for d in 0..D {
            total[d] += v[d];
            total_err[d] += e[d];
            total_scale[d] += s[d];
        }
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e, scale: s, key: 0.0 });
    }
    // keys are absolute error sums so the worst panel is refined first
    let rekey = |p: Panel<T, D>| {
        let key = p.error.iter().map(|e| to_f64(*e)).sum();
        Panel { key, ..p }
    };
    heap = heap.into_iter().map(rekey).collect();

    loop {
        if score(&total_err, &total_scale) <= 1.0 {
            return Ok(Integral { value: total, error: total_err, intervals: heap.len() });
        }
        if heap.len() >= spec.max_intervals {
            break;
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = (worst.a + worst.b) * lit(0.5);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1, s1) = kronrod(&f, worst.a, mid)?;
        let (v2, e2, s2) = kronrod(&f, mid, worst.b)?;
        for d in 0..D {
            total[d] += v1[d] + v2[d] - worst.value[d];
            total_err[d] += e1[d] + e2[d] - worst.error[d];
            total_scale[d] += s1[d] + s2[d] - worst.scale[d];
        }
        heap.push(rekey(Panel { a: worst.a, b: mid, value: v1, error: e1, scale: s1, key: 0.0 }));
        heap.push(rekey(Panel { a: mid, b: worst.b, value: v2, error: e2, scale: s2, key: 0.0 }));
    }

    // recompute sums from scratch before reporting failure
    let mut value = [T::zero(); D];
    let mut error = [T::zero(); D];
    let mut scale = [T::zero(); D];
    for p in heap.iter() {
        for d in 0..D {
            value[d] += p.value[d];
            error[d] += p.error[d];
            scale[d] += p.scale[d];
        }
    }
    if score(&error, &scale) <= 1.0 {
        return Ok(Integral { value, error, intervals: heap.len() });
    }
    let worst_d = (0..D)
        .max_by(|&x, &y| to_f64(error[x]).total_cmp(&to_f64(error[y])))
        .unwrap_or(0);
    Err(Error::Quadrature {
        estimate: to_f64(value[worst_d]),
        error_bound: to_f64(error[worst_d]),
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| Ok([x.powi(5) - 2.0 * x * x, 1.0]), -1.0, 2.0, &[], &QuadratureSpec::default()).unwrap();
        assert!((r.value[0] - (64.0 / 6.0 - 1.0 / 6.0 - 6.0)).abs() < 1e-13);
        assert!((r.value[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoint() {
        let g = 1e-6;
        let f = |x: f64| Ok([g / ((x - 0.3) * (x - 0.3) + g * g)]);
        let r = integrate(f, -5.0, 5.0, &[0.3], &QuadratureSpec::default()).unwrap();
        let exact = (4.7f64 / g).atan() + (5.3f64 / g).atan();
        assert!((r.value[0] - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.value[0]);
    }

    #[test]
    fn step_discontinuity() {
        let f = |x: f64| Ok([if x < 0.25 { 1.0 } else { 0.0 }]);
        let r = integrate(f, 0.0, 1.0, &[0.25], &QuadratureSpec::default()).unwrap();
        assert!((r.value[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 4 };
        let f = |x: f64| Ok([(1.0 / (x + 1e-3)).sin()]);
        let e = integrate(f, 0.0, 1.0, &[], &spec).unwrap_err();
        assert!(matches!(e, Error::Quadrature { intervals: 4, .. }));
    }

    #[test]
    fn integrand_errors_propagate() {
        let f = |x: f64| if x > 0.5 { Err(Error::Singular { omega: x }) } else { Ok([x]) };
        assert!(integrate(f, 0.0, 1.0, &[], &QuadratureSpec::default()).unwrap_err().is_singular());
    }
}
