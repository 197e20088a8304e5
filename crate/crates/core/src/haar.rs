//! Invariant functionals on the field.
//!
//! At `0 < q < 1` the functional is a weighted lattice sum
//!
//! ```text
//! psi_q(f) = (1-q)^2 sum_(t,a) (1/t - t) a^2 f(t, a)
//! ```
//!
//! (the circle factor `1/2pi int dtheta` already integrated out), and on the
//! block model it is the weighted trace of the diagonal part. At `q = 1` it is
//! the integral of `f` against `(t^-2 - 1) a dt da`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fiber::{BlockOperator, GradedElement};
use crate::qlattice::{check_q, LatticeError, QPoint};
use crate::quadrature::{self, QuadOptions, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HaarError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("Jackson series did not decay below {tol:e} within {terms} terms")]
    NonConvergence { tol: f64, terms: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Point masses of the Haar functional on the diagonal of the block model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarWeights {
    q: f64,
}

impl HaarWeights {
    pub fn new(q: f64) -> Result<Self, LatticeError> {
        check_q(q)?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `(1-q)^2 (q^-n - q^n) q^(1-n+2k)`.
    pub fn weight(&self, n: u32, k: u32) -> f64 {
        let q = self.q;
        let n = n as i32;
        (1.0 - q).powi(2) * (q.powi(-n) - q.powi(n)) * q.powi(1 - n + 2 * k as i32)
    }

    pub fn at(&self, p: &QPoint) -> f64 {
        self.weight(p.n(), p.k())
    }
}

/// `psi'(x) = sum_n sum_k w(n,k) x^(n)_kk`.
pub fn haar_functional(x: &BlockOperator) -> Result<Complex64, LatticeError> {
    let w = HaarWeights::new(x.q())?;
    let mut sum = Complex64::default();
    for (i, b) in x.blocks().iter().enumerate() {
        for k in 0..b.nrows() {
            sum += b[(k, k)] * w.weight(i as u32 + 1, k as u32);
        }
    }
    Ok(sum)
}

/// The same functional on the crossed-product picture: only the degree-0
/// component contributes.
pub fn haar_functional_graded(x: &GradedElement) -> Result<Complex64, LatticeError> {
    let w = HaarWeights::new(x.q())?;
    Ok(x
        .entries()
        .filter(|((deg, _, _), _)| *deg == 0)
        .map(|((_, n, k), v)| v * w.weight(n, k))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonOptions {
    /// Stop once a term bound drops below this (after `min_terms`).
    pub tail_tol: f64,
    pub min_terms: usize,
    pub max_terms: usize,
    /// Bound on `|g|` used for the tail estimate; without it the current
    /// term's modulus is used.
    pub sup_bound: Option<f64>,
    /// `g` vanishes for `x < support_min`, which truncates the sum exactly.
    pub support_min: Option<f64>,
}

impl Default for JacksonOptions {
    fn default() -> Self {
        Self {
            tail_tol: 1e-14,
            min_terms: 64,
            max_terms: 10_000_000,
            sup_bound: None,
            support_min: None,
        }
    }
}

/// `int_0^1 g d_q x = (1-q) sum_(n>=0) g(q^n) q^n`.
pub fn jackson_integral_c(mut g: impl FnMut(f64) -> Complex64, q: f64, opts: &JacksonOptions) -> Result<Complex64, HaarError> {
    check_q(q)?;
    let mut sum = Complex64::default();
    let mut x = 1.0;
    for n in 0..opts.max_terms {
        if let Some(lo) = opts.support_min {
            if x < lo {
                return Ok(sum * (1.0 - q));
            }
        }
        let value = g(x);
        let term = value * x;
        sum += term;
        if n + 1 >= opts.min_terms && opts.support_min.is_none() {
            let bound = opts.sup_bound.map_or(term.norm(), |s| s * x);
            if (1.0 - q) * bound < opts.tail_tol {
                return Ok(sum * (1.0 - q));
            }
        }
        x *= q;
    }
    Err(HaarError::NonConvergence {
        tol: opts.tail_tol,
        terms: opts.max_terms,
    })
}

pub fn jackson_integral(g: impl Fn(f64) -> f64, q: f64, opts: &JacksonOptions) -> Result<f64, HaarError> {
    jackson_integral_c(|x| Complex64::new(g(x), 0.0), q, opts).map(|z| z.re)
}

/// Rectangle in `(t, a)` outside which a test function vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    pub t_min: f64,
    pub t_max: f64,
    pub a_min: f64,
    pub a_max: f64,
}

impl SupportBox {
    pub fn contains(&self, t: f64, a: f64) -> bool {
        t >= self.t_min && t <= self.t_max && a >= self.a_min && a <= self.a_max
    }
}

/// Lattice points of `H_q` whose coordinates lie in `window`, block by
/// block.
pub fn support_points(q: f64, window: &SupportBox) -> Result<Vec<QPoint>, LatticeError> {
    check_q(q)?;
    let mut out = Vec::new();
    if !(window.t_max >= window.t_min) || window.t_min <= 0.0 {
        return Ok(out);
    }
    let lq = q.ln();
    // q^n <= t_max  <=>  n >= ln(t_max) / ln(q).
    let n_lo = ((window.t_max.min(q)).ln() / lq).floor().max(1.0) as u32;
    let n_hi = (window.t_min.ln() / lq).ceil() as u32;
    for n in n_lo..=n_hi {
        let t = q.powi(n as i32);
        if t < window.t_min || t > window.t_max {
            continue;
        }
        // ln a = (k - (n-1)/2) ln q, decreasing in k.
        let mid = (n as f64 - 1.0) / 2.0;
        let k_lo = (mid + window.a_max.ln() / lq).floor() - 1.0;
        let k_hi = (mid + window.a_min.ln() / lq).ceil() + 1.0;
        let k_lo = k_lo.max(0.0) as u32;
        let k_hi = k_hi.min(n as f64 - 1.0);
        if k_hi < 0.0 {
            continue;
        }
        for k in k_lo..=k_hi as u32 {
            let p = QPoint::new_unchecked(q, n, k);
            let a = p.a();
            if a >= window.a_min && a <= window.a_max {
                out.push(p);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// `C^infinity` profile.
    Smooth,
    /// Continuous, piecewise linear.
    Lipschitz,
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Zero,
    /// `exp(1 - 1/(1 - rho^2))` on the ellipse `rho < 1` in `(t, ln a)`.
    Bump { t0: f64, rt: f64, log_a0: f64, ra: f64 },
    /// `max(0, 1 - rho_inf)` with `rho_inf` the sup-distance in `(t, ln a)`.
    Tent { t0: f64, rt: f64, log_a0: f64, ra: f64 },
    /// `sum_j c_j z^j` times a circle-independent profile.
    Circle { coeffs: Vec<(i32, Complex64)>, base: Box<Profile> },
    /// Trapezoid average over the circle with the given node count.
    Averaged { inner: Box<Profile>, nodes: usize },
}

impl Profile {
    fn eval(&self, t: f64, a: f64, z: Complex64) -> Complex64 {
        match self {
            Profile::Zero => Complex64::default(),
            Profile::Bump { t0, rt, log_a0, ra } => {
                let u = (t - t0) / rt;
                let v = (a.ln() - log_a0) / ra;
                let rho2 = u * u + v * v;
                if rho2 >= 1.0 {
                    Complex64::default()
                } else {
                    Complex64::new((1.0 - 1.0 / (1.0 - rho2)).exp(), 0.0)
                }
            }
            Profile::Tent { t0, rt, log_a0, ra } => {
                let u = ((t - t0) / rt).abs();
                let v = ((a.ln() - log_a0) / ra).abs();
                Complex64::new((1.0 - u.max(v)).max(0.0), 0.0)
            }
            Profile::Circle { coeffs, base } => {
                let b = base.eval(t, a, z);
                if b == Complex64::default() {
                    return b;
                }
                coeffs.iter().map(|(j, c)| c * z.powi(*j)).sum::<Complex64>() * b
            }
            Profile::Averaged { inner, nodes } => {
                let sum: Complex64 = (0..*nodes)
                    .map(|i| {
                        let th = 2.0 * std::f64::consts::PI * i as f64 / *nodes as f64;
                        inner.eval(t, a, Complex64::from_polar(1.0, th))
                    })
                    .sum();
                sum / *nodes as f64
            }
        }
    }

    fn depends_on_circle(&self) -> bool {
        matches!(self, Profile::Circle { .. })
    }
}

/// A named, compactly supported test function `f(t, a)` or `f(t, a, z)`
/// on the region `sqrt(t) < a < 1/sqrt(t)`, `0 < t <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    name: String,
    profile: Profile,
    support: SupportBox,
    smoothness: Smoothness,
}

/// Names accepted by [`TestFunction::by_name`].
pub const REGISTRY: [&str; 6] = ["bump", "bump-offset", "bump-wide", "tent", "zero", "mixed-circle"];

/// Default node count of [`circle_average`].
pub const CIRCLE_NODES: usize = 256;

impl TestFunction {
    pub fn bump(name: impl Into<String>, t0: f64, rt: f64, log_a0: f64, ra: f64) -> Self {
        Self {
            name: name.into(),
            profile: Profile::Bump { t0, rt, log_a0, ra },
            support: box_for(t0, rt, log_a0, ra),
            smoothness: Smoothness::Smooth,
        }
    }

    pub fn tent(name: impl Into<String>, t0: f64, rt: f64, log_a0: f64, ra: f64) -> Self {
        Self {
            name: name.into(),
            profile: Profile::Tent { t0, rt, log_a0, ra },
            support: box_for(t0, rt, log_a0, ra),
            smoothness: Smoothness::Lipschitz,
        }
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            profile: Profile::Zero,
            support: SupportBox {
                t_min: 0.5,
                t_max: 0.5,
                a_min: 1.0,
                a_max: 1.0,
            },
            smoothness: Smoothness::Smooth,
        }
    }

    /// `(sum_j c_j z^j) f`.
    pub fn with_circle(&self, name: impl Into<String>, coeffs: Vec<(i32, Complex64)>) -> Self {
        Self {
            name: name.into(),
            profile: Profile::Circle {
                coeffs,
                base: Box::new(self.profile.clone()),
            },
            support: self.support,
            smoothness: self.smoothness,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "bump" => Self::bump(name, 0.4, 0.25, 0.0, 0.2),
            "bump-offset" => Self::bump(name, 0.3, 0.15, 0.15, 0.15),
            "bump-wide" => Self::bump(name, 0.35, 0.3, 0.0, 0.2),
            "tent" => Self::tent(name, 0.4, 0.25, 0.0, 0.2),
            "zero" => Self::zero(),
            "mixed-circle" => Self::by_name("bump")?.with_circle(
                name,
                vec![(0, Complex64::new(2.0, 0.0)), (1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))],
            ),
            _ => return None,
        })
    }

    /// The registered smooth bumps.
    pub fn smooth_library() -> Vec<Self> {
        ["bump", "bump-offset", "bump-wide"]
            .iter()
            .map(|n| Self::by_name(n).unwrap())
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn depends_on_circle(&self) -> bool {
        self.profile.depends_on_circle()
    }

    pub fn eval_z(&self, t: f64, a: f64, z: Complex64) -> Complex64 {
        if !self.support.contains(t, a) {
            return Complex64::default();
        }
        self.profile.eval(t, a, z)
    }

    /// Value on `H`; a circle-dependent function is replaced by its circle
    /// average.
    pub fn eval(&self, t: f64, a: f64) -> Complex64 {
        if self.depends_on_circle() {
            circle_average(self, CIRCLE_NODES).eval(t, a)
        } else {
            self.eval_z(t, a, Complex64::new(1.0, 0.0))
        }
    }

    pub fn eval_at(&self, p: &QPoint) -> Complex64 {
        self.eval(p.t(), p.a())
    }
}

fn box_for(t0: f64, rt: f64, log_a0: f64, ra: f64) -> SupportBox {
    SupportBox {
        t_min: t0 - rt,
        t_max: (t0 + rt).min(1.0),
        a_min: (log_a0 - ra).exp(),
        a_max: (log_a0 + ra).exp(),
    }
}

/// `E(f)(t, a) = 1/2pi int f(t, a, e^(i theta)) d theta` by the trapezoid
/// rule, exact for trigonometric polynomials of degree below `nodes`.
pub fn circle_average(f: &TestFunction, nodes: usize) -> TestFunction {
    if !f.depends_on_circle() {
        return f.clone();
    }
    TestFunction {
        name: format!("E({})", f.name),
        profile: Profile::Averaged {
            inner: Box::new(f.profile.clone()),
            nodes,
        },
        support: f.support,
        smoothness: f.smoothness,
    }
}

/// `psi_q` of a lattice function supported in `window`.
pub fn psi_q_lattice(
    q: f64,
    window: &SupportBox,
    f: impl Fn(&QPoint) -> Complex64,
) -> Result<Complex64, LatticeError> {
    let w = HaarWeights::new(q)?;
    Ok(support_points(q, window)?
        .iter()
        .map(|p| f(p) * w.at(p))
        .sum())
}

/// `psi_q(f) = (1-q)^2 sum (1/t - t) a^2 E(f)(t, a)`.
pub fn psi_q(f: &TestFunction, q: f64) -> Result<Complex64, LatticeError> {
    let g = circle_average(f, CIRCLE_NODES);
    psi_q_lattice(q, f.support(), |p| g.eval_at(p))
}

/// The same sum written as an iterated Jackson integral over
/// `x = q^i`, `y = q^j`:
///
/// ```text
/// int_0^1 int_0^1 f(q x y, sqrt(y/x)) (1/(q x y) - q x y) x^-2 d_q x d_q y
/// ```
///
/// The point `(x, y) = (q^i, q^j)` is the lattice point `(n, k) = (i+j+1, j)`.
pub fn psi_q_double_integral_form(f: &TestFunction, q: f64) -> Result<Complex64, HaarError> {
    check_q(q)?;
    let g = circle_average(f, CIRCLE_NODES);
    let s = *f.support();
    // t = q x y >= t_min with x, y <= 1 bounds each variable below.
    let y_min = s.t_min / q;
    let inner_opts = |y: f64| JacksonOptions {
        support_min: Some(s.t_min / (q * y)),
        ..Default::default()
    };
    let outer_opts = JacksonOptions {
        support_min: Some(y_min),
        ..Default::default()
    };
    let mut failure = None;
    let value = jackson_integral_c(
        |y| {
            let inner = jackson_integral_c(
                |x| {
                    let t = q * x * y;
                    let a = (y / x).sqrt();
                    let v = g.eval(t, a);
                    if v == Complex64::default() {
                        return v;
                    }
                    v * ((1.0 / t - t) / (x * x))
                },
                q,
                &inner_opts(y),
            );
            inner.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::default()
            })
        },
        q,
        &outer_opts,
    )?;
    // The weight of the (i, j) term carries (1-q)^2 from the two Jackson
    // measures already.
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn psi_1_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-9,
        ..Default::default()
    }
}

/// `psi_1(f) = int_0^1 int_sqrt(t)^(1/sqrt(t)) E(f)(t, a) (t^-2 - 1) a da dt`.
///
/// Only real-valued (after circle averaging) integrands are supported; the
/// imaginary part is integrated separately when present.
pub fn psi_1(f: &TestFunction) -> Result<Complex64, HaarError> {
    let g = circle_average(f, CIRCLE_NODES);
    let s = *f.support();
    if s.t_max <= s.t_min {
        return Ok(Complex64::default());
    }
    let bounds = |t: f64| (t.sqrt().max(s.a_min), (1.0 / t.sqrt()).min(s.a_max));
    let part = |im: bool| {
        quadrature::integrate_2d(
            |t, a| {
                let v = g.eval(t, a);
                let v = if im { v.im } else { v.re };
                v * (1.0 / (t * t) - 1.0) * a
            },
            s.t_min,
            s.t_max,
            bounds,
            &psi_1_options(),
        )
    };
    let re = part(false)?.value;
    let im = if f.depends_on_circle() { part(true)?.value } else { 0.0 };
    Ok(Complex64::new(re, im))
}

/// `psi_1` pulled back along `(x, y) -> (t, a) = (x y, sqrt(y/x))`, whose
/// Jacobian is `a`:
///
/// ```text
/// int_0^1 int_0^1 f(x y, sqrt(y/x)) (x^-3 y^-1 - y x^-1) dx dy
/// ```
pub fn psi_1_phi_form(f: &TestFunction) -> Result<Complex64, HaarError> {
    let g = circle_average(f, CIRCLE_NODES);
    let s = *f.support();
    if s.t_max <= s.t_min {
        return Ok(Complex64::default());
    }
    // x = sqrt(t)/a, y = a sqrt(t).
    let x_lo = s.t_min.sqrt() / s.a_max;
    let x_hi = (s.t_max.sqrt() / s.a_min).min(1.0);
    let y_lo = s.a_min * s.t_min.sqrt();
    let y_hi = (s.a_max * s.t_max.sqrt()).min(1.0);
    let part = |im: bool| {
        quadrature::integrate_2d(
            |x, y| {
                let v = g.eval(x * y, (y / x).sqrt());
                let v = if im { v.im } else { v.re };
                v * (1.0 / (x * x * x * y) - y / x)
            },
            x_lo,
            x_hi,
            |_| (y_lo, y_hi),
            &psi_1_options(),
        )
    };
    let re = part(false)?.value;
    let im = if f.depends_on_circle() { part(true)?.value } else { 0.0 };
    Ok(Complex64::new(re, im))
}
