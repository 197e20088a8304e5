use num_complex::Complex64;
use rayon::prelude::*;

use super::graded::{graded_norm, GradedElement};
use super::FiberError;
use crate::classical::{classical_norm, ComponentFn, GridOptions};
use crate::haar::{support_points, SupportBox, TestFunction};
use crate::qlattice::in_domain;

/// A continuous section `q -> sum_k s^k f_k(q, .)` of the field, given by
/// one test function per degree.
#[derive(Debug, Clone)]
pub struct Section {
    name: String,
    terms: Vec<(i32, TestFunction)>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ContinuityRow {
    pub q: f64,
    pub norm: f64,
}

impl Section {
    pub fn new(name: impl Into<String>, terms: Vec<(i32, TestFunction)>) -> Self {
        Self {
            name: name.into(),
            terms,
        }
    }

    /// `bump + s bump`.
    pub fn standard() -> Self {
        let f = TestFunction::by_name("bump").expect("registered");
        Self::new("standard", vec![(0, f.clone()), (1, f)])
    }

    /// Sections addressable by name: `standard`, `zero`, or any registered
    /// test function placed in degree 0.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(Self::standard()),
            _ => TestFunction::by_name(name).map(|f| Self::new(name, vec![(0, f)])),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &[(i32, TestFunction)] {
        &self.terms
    }

    /// The fiber element at `0 < q < 1`: each `f_k` sampled on the lattice
    /// points of `H^(k)` inside its support.
    pub fn at_q(&self, q: f64) -> Result<GradedElement, FiberError> {
        let mut x = GradedElement::zero(q)?;
        for (deg, f) in &self.terms {
            for p in support_points(q, f.support())? {
                if in_domain(&p, *deg as i64) {
                    x.insert(*deg, p.n(), p.k(), f.eval(p.t(), p.a()))?;
                }
            }
        }
        Ok(x)
    }

    /// Fiber norm at `0 < q <= 1`; the `q = 1` fiber is evaluated as a
    /// sup-norm of the classical symbol.
    pub fn norm_at(&self, q: f64) -> Result<f64, FiberError> {
        if q == 1.0 {
            self.classical_norm()
        } else {
            Ok(graded_norm(&self.at_q(q)?))
        }
    }

    pub fn classical_norm(&self) -> Result<f64, FiberError> {
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        let window = self
            .terms
            .iter()
            .map(|(_, f)| *f.support())
            .reduce(|a, b| a.hull(&b))
            .unwrap();
        type Eval<'a> = Box<dyn Fn(f64, f64) -> Complex64 + Sync + 'a>;
        let evals: Vec<(i32, Eval<'_>)> = self
            .terms
            .iter()
            .map(|(d, f)| (*d, Box::new(move |t, a| f.eval(t, a)) as Eval<'_>))
            .collect();
        let comps: Vec<(i32, ComponentFn<'_>)> = evals.iter().map(|(d, f)| (*d, f.as_ref())).collect();
        Ok(classical_norm(&comps, &window, &GridOptions::default())?)
    }
}

/// Fiber norms along `qs` (values in `(0, 1]`), computed in parallel and
/// returned in input order.
pub fn continuity_scan(section: &Section, qs: &[f64]) -> Result<Vec<ContinuityRow>, FiberError> {
    qs.par_iter()
        .map(|&q| Ok(ContinuityRow { q, norm: section.norm_at(q)? }))
        .collect()
}

impl SupportBox {
    /// Smallest box containing both.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            t_min: self.t_min.min(other.t_min),
            t_max: self.t_max.max(other.t_max),
            a_min: self.a_min.min(other.a_min),
            a_max: self.a_max.max(other.a_max),
        }
    }
}
