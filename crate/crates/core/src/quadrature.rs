//! Adaptive Gauss-Kronrod (10, 21) quadrature on intervals and iterated
//! rectangles.

use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("requested tolerance {tol:e} not reached: error estimate {estimate:e} after {intervals} subdivisions")]
    ToleranceNotReached { tol: f64, estimate: f64, intervals: usize },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
}

// Nodes of the 21-point Kronrod rule on [-1, 1] (nonnegative half, the
// Gauss points are the odd entries).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Weights of the embedded 10-point Gauss rule, matching XGK[1], XGK[3], ...
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the rule on `[a, b]`: `(kronrod, |kronrod - gauss|)`.
pub fn gk21(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute tolerance on the total error estimate.
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Initial uniform split of the interval.
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_intervals: 20_000,
            initial_pieces: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration: the piece with the largest error estimate
/// is bisected until the summed estimate is below `abs_tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(QuadratureError::InvalidInterval(a, b));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let pieces = opts.initial_pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::new();
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + h };
        let (value, error) = gk21(&mut f, lo, hi);
        heap.push(Piece { a: lo, b: hi, value, error });
    }
    loop {
        let (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if err <= opts.abs_tol {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadratureError::ToleranceNotReached {
                tol: opts.abs_tol,
                estimate: err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(QuadratureError::ToleranceNotReached {
                tol: opts.abs_tol,
                estimate: err,
                intervals: heap.len() + 1,
            });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk21(&mut f, lo, hi);
            heap.push(Piece { a: lo, b: hi, value, error });
        }
    }
}

/// `int_ax^bx int_{lo(x)}^{hi(x)} f(x, y) dy dx` by nested adaptive
/// quadrature. The inner integrals run at a tolerance scaled so that their
/// accumulated error stays below the outer one.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    ax: f64,
    bx: f64,
    inner_bounds: impl Fn(f64) -> (f64, f64),
    opts: &QuadOptions,
) -> Result<QuadResult, QuadratureError> {
    let width = (bx - ax).abs().max(1e-300);
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol / (10.0 * width.max(1.0)),
        ..*opts
    };
    let mut failure = None;
    let outer = integrate(
        |x| {
            let (lo, hi) = inner_bounds(x);
            if !(hi > lo) {
                return 0.0;
            }
            match integrate(|y| f(x, y), lo, hi, &inner_opts) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        ax,
        bx,
        opts,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        assert!((s - 2.0).abs() < 1e-15);
        let g = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // Gauss 10 is exact to degree 19, Kronrod 21 to degree 31.
        for deg in 0..=31 {
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let (k, _) = gk21(&mut |x: f64| x.powi(deg), -1.0, 1.0);
            assert!((k - exact).abs() < 1e-14, "degree {deg}: {k} vs {exact}");
        }
        for deg in 0..=19 {
            let (_, err) = gk21(&mut |x: f64| x.powi(deg), -1.0, 1.0);
            assert!(err < 1e-14, "gauss not exact at degree {deg}");
        }
    }

    #[test]
    fn adaptive_on_peaked_integrand() {
        // int_0^1 1 / (1e-4 + (x - 0.3)^2) dx in closed form.
        let e: f64 = 1e-2;
        let exact = ((0.7 / e).atan() + (0.3 / e).atan()) / e;
        let r = integrate(|x| 1.0 / (e * e + (x - 0.3).powi(2)), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - exact).abs() < 1e-8, "{} vs {}", r.value, exact);
    }

    #[test]
    fn two_dimensional_triangle() {
        // int_0^1 int_0^x x y dy dx = 1/8.
        let r = integrate_2d(|x, y| x * y, 0.0, 1.0, |x| (0.0, x), &QuadOptions::default()).unwrap();
        assert!((r.value - 0.125).abs() < 1e-13);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-30,
            max_intervals: 8,
            initial_pieces: 1,
        };
        assert!(matches!(
            integrate(|x| x.sqrt(), 0.0, 1.0, &opts),
            Err(QuadratureError::ToleranceNotReached { .. })
        ));
    }
}
