//! The `q = 1` fiber: the group of upper triangular `2x2` matrices
//! `[[a, n], [0, 1/a]]` with `a > 0`, and the commutative picture in which
//! `s^k f` becomes `r^k f` with `|r| = 1` away from the boundary of the
//! region `sqrt(t) <= a <= 1/sqrt(t)`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::haar::SupportBox;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("a = {0} must be positive")]
    NonPositiveDiagonal(f64),
    #[error("(t = {t}, a = {a}) is outside 0 < t <= 1, sqrt(t) <= a <= 1/sqrt(t)")]
    OutsideRegion { t: f64, a: f64 },
    #[error("sup-norm did not stabilize: last relative change {change:e} at resolution {resolution}")]
    Grid { change: f64, resolution: usize },
}

/// `[[a, n], [0, 1/a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G1Element {
    pub n: Complex64,
    pub a: f64,
}

impl G1Element {
    pub fn new(n: Complex64, a: f64) -> Result<Self, ClassicalError> {
        if a > 0.0 && a.is_finite() {
            Ok(Self { n, a })
        } else {
            Err(ClassicalError::NonPositiveDiagonal(a))
        }
    }

    pub fn identity() -> Self {
        Self {
            n: Complex64::default(),
            a: 1.0,
        }
    }

    /// `(n, a)(m, b) = (a m + n / b, a b)`.
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            n: other.n * self.a + self.n / other.a,
            a: self.a * other.a,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            n: -self.n,
            a: 1.0 / self.a,
        }
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            Complex64::new(self.a, 0.0),
            self.n,
            Complex64::default(),
            Complex64::new(1.0 / self.a, 0.0),
        )
    }
}

/// Residual of `A(gh) = A(g) A(h)` and `N(gh) = A(g) N(h) + N(g) / A(h)`
/// over sampled pairs, where `A` and `N` are the coordinate functions. The
/// group law is also compared against matrix multiplication.
pub fn comultiplication_check(pairs: &[(G1Element, G1Element)]) -> f64 {
    pairs
        .iter()
        .map(|(g, h)| {
            let gh = g.mul(h);
            let scale = 1.0 + g.n.norm() * h.a + h.n.norm() * g.a + g.n.norm() / h.a + g.a * h.a;
            let ra = (gh.a - g.a * h.a).abs();
            let rn = (gh.n - (h.n * g.a + g.n / h.a)).norm();
            let m = g.matrix() * h.matrix();
            let rm = (m[(0, 0)].re - gh.a).abs() + (m[(0, 1)] - gh.n).norm() + m[(1, 0)].norm();
            (ra + rn + rm) / scale
        })
        .fold(0.0, f64::max)
}

/// A point of the `q = 1` fiber, with an optional circle phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPoint {
    t: f64,
    a: f64,
    z: Option<Complex64>,
}

impl ClassicalPoint {
    pub fn new(t: f64, a: f64, z: Option<Complex64>) -> Result<Self, ClassicalError> {
        let s = t.sqrt();
        if t > 0.0 && t <= 1.0 && a >= s && a <= 1.0 / s {
            Ok(Self { t, a, z })
        } else {
            Err(ClassicalError::OutsideRegion { t, a })
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn z(&self) -> Option<Complex64> {
        self.z
    }

    /// `t + 1/t - a^2 - a^-2`, written as `(1/t - a^2)(1 - t/a^2)` so that
    /// it vanishes exactly on the boundary.
    pub fn radicand(&self) -> f64 {
        (1.0 / self.t - self.a * self.a) * (1.0 - self.t / (self.a * self.a))
    }

    /// `rho(t, a) = (sqrt(t + 1/t - a^2 - a^-2), a)`.
    pub fn rho(&self) -> (f64, f64) {
        (self.radicand().max(0.0).sqrt(), self.a)
    }

    /// The group element `(n, a)` with `n = |n| z`.
    pub fn to_group(&self) -> G1Element {
        let (r, a) = self.rho();
        G1Element {
            n: self.z.unwrap_or(Complex64::new(1.0, 0.0)) * r,
            a,
        }
    }
}

/// Minimum of the radicand over strictly interior grid points, and maximum
/// of its modulus relative to `t + 1/t` on the two boundary curves, for a
/// `res x res` grid.
pub fn radicand_grid_check(res: usize) -> (f64, f64) {
    let mut interior_min = f64::INFINITY;
    let mut boundary_max: f64 = 0.0;
    for i in 1..=res {
        let t = i as f64 / res as f64;
        let s = t.sqrt();
        for a in [s, 1.0 / s] {
            boundary_max = boundary_max.max(ClassicalPoint::new(t, a, None).unwrap().radicand().abs() / (t + 1.0 / t));
        }
        for j in 1..res {
            let a = s + (1.0 / s - s) * j as f64 / res as f64;
            if let Ok(p) = ClassicalPoint::new(t, a, None) {
                interior_min = interior_min.min(p.radicand());
            }
        }
    }
    (interior_min, boundary_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub initial: usize,
    pub max: usize,
    /// Stop when the sup changes by less than this, relatively.
    pub rel_tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            initial: 16,
            max: 4096,
            rel_tol: 1e-4,
        }
    }
}

/// A component function `f_k(t, a)`.
pub type ComponentFn<'a> = &'a (dyn Fn(f64, f64) -> Complex64 + Sync);

/// Sup-norm of `sum_k r^k f_k` at `q = 1`.
///
/// Since `|r| = 1` wherever the components can be nonzero, this is
/// `sup_(t, a, theta) |sum_k e^(ik theta) f_k(t, a)|` over `window`. The grid
/// in `(t, a, theta)` is doubled until the sup stabilizes.
pub fn classical_norm(
    components: &[(i32, ComponentFn<'_>)],
    window: &SupportBox,
    opts: &GridOptions,
) -> Result<f64, ClassicalError> {
    let degrees: Vec<i32> = components.iter().map(|c| c.0).collect();
    let sup_at = |t: f64, a: f64, theta_nodes: usize| -> f64 {
        let vals: Vec<Complex64> = components.iter().map(|(_, f)| f(t, a)).collect();
        let nonzero: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] != Complex64::default()).collect();
        match nonzero.len() {
            0 => 0.0,
            1 => vals[nonzero[0]].norm(),
            // Two distinct frequencies: the phases can always be aligned.
            2 if degrees[nonzero[0]] != degrees[nonzero[1]] => vals[nonzero[0]].norm() + vals[nonzero[1]].norm(),
            _ => (0..theta_nodes)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / theta_nodes as f64;
                    nonzero
                        .iter()
                        .map(|&j| vals[j] * Complex64::from_polar(1.0, degrees[j] as f64 * th))
                        .sum::<Complex64>()
                        .norm()
                })
                .fold(0.0, f64::max),
        }
    };
    let sweep = |res: usize| -> f64 {
        (0..=res)
            .into_par_iter()
            .map(|i| {
                let t = window.t_min + (window.t_max - window.t_min) * i as f64 / res as f64;
                let (lo, hi) = (window.a_min.ln(), window.a_max.ln());
                (0..=res)
                    .map(|j| {
                        let a = (lo + (hi - lo) * j as f64 / res as f64).exp();
                        if t <= 0.0 || t > 1.0 || a < t.sqrt() || a > 1.0 / t.sqrt() {
                            0.0
                        } else {
                            sup_at(t, a, 4 * res)
                        }
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    };
    let mut res = opts.initial.max(2);
    let mut prev = sweep(res);
    let mut change = f64::INFINITY;
    while res < opts.max {
        res *= 2;
        let cur = sweep(res);
        change = if cur == 0.0 && prev == 0.0 {
            0.0
        } else {
            (cur - prev).abs() / cur.abs().max(prev.abs())
        };
        prev = cur;
        if change < opts.rel_tol {
            return Ok(cur);
        }
    }
    Err(ClassicalError::Grid { change, resolution: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn g(n: f64, a: f64) -> G1Element {
        G1Element::new(Complex64::new(n, 0.0), a).unwrap()
    }

    #[test]
    fn group_law_examples() {
        let p = g(1.0, 2.0).mul(&g(3.0, 1.0));
        assert_eq!(p, g(7.0, 2.0));
        let x = g(-0.4, 0.3);
        assert_eq!(G1Element::identity().mul(&x), x);
        assert_eq!(x.mul(&G1Element::identity()), x);
        let e = x.mul(&x.inverse());
        assert!((e.a - 1.0).abs() < 1e-15 && e.n.norm() < 1e-15);
        assert!(G1Element::new(Complex64::default(), 0.0).is_err());
    }

    #[test]
    fn random_pairs_and_triples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut sample = || {
            G1Element::new(
                Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
                rng.gen_range(0.1..5.0),
            )
            .unwrap()
        };
        let pairs: Vec<_> = (0..10_000).map(|_| (sample(), sample())).collect();
        assert!(comultiplication_check(&pairs) <= 1e-12);
        for _ in 0..1000 {
            let (x, y, z) = (sample(), sample(), sample());
            let l = x.mul(&y).mul(&z);
            let r = x.mul(&y.mul(&z));
            assert!((l.n - r.n).norm() <= 1e-12 * (1.0 + l.n.norm()));
            assert!((l.a - r.a).abs() <= 1e-12 * l.a);
        }
    }

    #[test]
    fn comultiplication_example() {
        let (x, y) = (g(1.0, 2.0), g(3.0, 1.0));
        assert_eq!(x.mul(&y).n, Complex64::new(7.0, 0.0));
        assert_eq!(comultiplication_check(&[(x, G1Element::identity())]), 0.0);
    }

    #[test]
    fn radicand_sign() {
        let (interior_min, boundary_max) = radicand_grid_check(200);
        assert!(interior_min >= 0.0);
        assert!(boundary_max < 1e-14);
        assert!(ClassicalPoint::new(0.5, 0.5, None).is_err());
        let p = ClassicalPoint::new(0.25, 1.0, Some(Complex64::new(0.0, 1.0))).unwrap();
        // 0.25 + 4 - 1 - 1.
        assert!((p.radicand() - 2.25).abs() < 1e-15);
        assert!((p.to_group().n - Complex64::new(0.0, 1.5)).norm() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let window = SupportBox {
            t_min: 0.2,
            t_max: 0.6,
            a_min: 0.85,
            a_max: 1.15,
        };
        let bump = |t: f64, a: f64| {
            let r2 = ((t - 0.4) / 0.2).powi(2) + (a.ln() / 0.14).powi(2);
            Complex64::new(if r2 < 1.0 { (1.0 - 1.0 / (1.0 - r2)).exp() } else { 0.0 }, 0.0)
        };
        let opts = GridOptions::default();
        let one = classical_norm(&[(0, &bump)], &window, &opts).unwrap();
        assert!((one - 1.0).abs() < 1e-3);
        let deg1 = classical_norm(&[(1, &bump)], &window, &opts).unwrap();
        assert!((deg1 - one).abs() < 1e-12);
        let both = classical_norm(&[(0, &bump), (1, &bump)], &window, &opts).unwrap();
        assert!((both - 2.0 * one).abs() < 1e-3);
        let three = classical_norm(&[(0, &bump), (1, &bump), (-1, &bump)], &window, &opts).unwrap();
        assert!((three - 3.0 * one).abs() < 1e-3);
    }
}
