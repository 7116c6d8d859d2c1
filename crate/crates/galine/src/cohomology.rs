//! Cochains on the Galilean line group with values in scalar time functions.
//!
//! The group acts on values through `σ(g) = Λ_b`. Two coboundary conventions
//! are provided:
//!
//! * [`Convention::Standard`]: `σ(x₁)` acts on the leftmost slot,
//!   `(δα)(x₁,…,x_{n+1}) = σ(x₁)α(x₂,…) + Σᵢ(−1)ⁱ α(…,xᵢx_{i+1},…) + (−1)^{n+1}α(x₁,…,xₙ)`.
//! * [`Convention::Dual`] (default): the standard formula on the opposite
//!   group, read on the reversed tuple. Tuples are written `(g_{n+1},…,g₁)`
//!   with `g₁` acting first. For `n = 1`
//!   `(δα)(g₂,g₁) = Λ_{b₁}α(g₂) − α(g₂g₁) + α(g₁)`,
//!   and for `n = 2` the cocycle condition
//!   `Λ_{b₁}ω(g₃,g₂) + ω(g₃g₂,g₁) − ω(g₂,g₁) − ω(g₃,g₂g₁) = 0`.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::json;
use thiserror::Error;

use crate::exec;
use crate::group::{compose, GroupElement};
use crate::report::CheckReport;
use crate::sample::Sampler;
use crate::timealg::{Scalar, TimePoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("expected a tuple of {expected} elements, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    Standard,
    #[default]
    Dual,
}

/// `σ(g) = Λ_b`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutomorphismAction;

impl AutomorphismAction {
    pub fn act(&self, g: &GroupElement, p: &TimePoly) -> TimePoly {
        p.shift(g.b())
    }
}

type Evaluator = Arc<dyn Fn(&[GroupElement]) -> TimePoly + Send + Sync>;

/// An n-cochain `Gⁿ → F(ℝ)`.
#[derive(Clone)]
pub struct Cochain {
    arity: usize,
    name: String,
    eval: Evaluator,
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cochain({}, arity {})", self.name, self.arity)
    }
}

impl Cochain {
    pub fn new(
        arity: usize,
        name: impl Into<String>,
        f: impl Fn(&[GroupElement]) -> TimePoly + Send + Sync + 'static,
    ) -> Self {
        Cochain { arity, name: name.into(), eval: Arc::new(f) }
    }

    pub fn zero(arity: usize, max_degree: usize) -> Self {
        Self::new(arity, "0", move |_| TimePoly::zero(max_degree))
    }

    /// 0-cochain with value `c`.
    pub fn constant(c: TimePoly) -> Self {
        Self::new(0, "const", move |_| c.clone())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, tuple: &[GroupElement]) -> Result<TimePoly, CohomologyError> {
        if tuple.len() != self.arity {
            return Err(CohomologyError::Arity { expected: self.arity, got: tuple.len() });
        }
        Ok((self.eval)(tuple))
    }

    fn call(&self, tuple: &[GroupElement]) -> TimePoly {
        (self.eval)(tuple)
    }

    pub fn add(&self, other: &Cochain) -> Cochain {
        assert_eq!(self.arity, other.arity);
        let (a, b) = (self.clone(), other.clone());
        Cochain::new(self.arity, format!("({} + {})", a.name, b.name), move |t| a.call(t) + b.call(t))
    }

    pub fn sub(&self, other: &Cochain) -> Cochain {
        assert_eq!(self.arity, other.arity);
        let (a, b) = (self.clone(), other.clone());
        Cochain::new(self.arity, format!("({} - {})", a.name, b.name), move |t| a.call(t) - b.call(t))
    }

    pub fn scale(&self, k: Scalar) -> Cochain {
        let a = self.clone();
        Cochain::new(self.arity, format!("{}·{}", k, a.name), move |t| a.call(t).scale(&k))
    }
}

fn product(x: &GroupElement, y: &GroupElement) -> GroupElement {
    compose(x, y).expect("sampled elements share a degree budget")
}

fn alternating_sum(
    alpha: &Cochain,
    xs: &[GroupElement],
    mul: impl Fn(&GroupElement, &GroupElement) -> GroupElement,
    eval: impl Fn(&Cochain, &[GroupElement]) -> TimePoly,
) -> TimePoly {
    let n = alpha.arity;
    let mut acc = eval(alpha, &xs[1..]).shift(xs[0].b());
    for i in 0..n {
        let mut merged: Vec<GroupElement> = Vec::with_capacity(n);
        merged.extend_from_slice(&xs[..i]);
        merged.push(mul(&xs[i], &xs[i + 1]));
        merged.extend_from_slice(&xs[i + 2..]);
        let term = eval(alpha, &merged);
        acc = if i % 2 == 0 { acc - term } else { acc + term };
    }
    let last = eval(alpha, &xs[..n]);
    if n % 2 == 0 {
        acc - last
    } else {
        acc + last
    }
}

/// `(δₙα)` evaluated on an (n+1)-tuple.
pub fn coboundary(
    alpha: &Cochain,
    tuple: &[GroupElement],
    convention: Convention,
) -> Result<TimePoly, CohomologyError> {
    let n = alpha.arity;
    if tuple.len() != n + 1 {
        return Err(CohomologyError::Arity { expected: n + 1, got: tuple.len() });
    }
    Ok(match convention {
        Convention::Standard => alternating_sum(alpha, tuple, product, |a, t| a.call(t)),
        Convention::Dual => {
            let rev: Vec<GroupElement> = tuple.iter().rev().cloned().collect();
            alternating_sum(
                alpha,
                &rev,
                |x, y| product(y, x),
                |a, t| {
                    let back: Vec<GroupElement> = t.iter().rev().cloned().collect();
                    a.call(&back)
                },
            )
        }
    })
}

/// `δα` as an (n+1)-cochain.
pub fn coboundary_cochain(alpha: &Cochain, convention: Convention) -> Cochain {
    let a = alpha.clone();
    Cochain::new(alpha.arity + 1, format!("δ{}", alpha.name), move |t| {
        coboundary(&a, t, convention).expect("arity checked by caller")
    })
}

fn tuple_json(tuple: &[GroupElement]) -> serde_json::Value {
    serde_json::to_value(tuple).unwrap_or(serde_json::Value::Null)
}

/// Checks `δ(δα) = 0` on every sampled (n+2)-tuple.
pub fn check_dd_zero(alpha: &Cochain, tuples: &[Vec<GroupElement>], convention: Convention, seed: u64) -> CheckReport {
    let dd = coboundary_cochain(&coboundary_cochain(alpha, convention), convention);
    let results = exec::map(tuples, |t| {
        let v = dd.eval(t).map_err(|e| e.to_string());
        match v {
            Ok(p) if p.is_zero() => None,
            Ok(p) => Some(json!({ "tuple": tuple_json(t), "value": p.to_string() })),
            Err(e) => Some(json!({ "tuple": tuple_json(t), "error": e })),
        }
    });
    let mut report = CheckReport::new(format!("dd_zero_arity_{}", alpha.arity), seed);
    results.into_iter().for_each(|w| report.record(w));
    report
}

/// Dual-convention cocycle condition on sampled triples `(g₃, g₂, g₁)`.
pub fn two_cocycle_report(omega: &Cochain, triples: &[Vec<GroupElement>], seed: u64) -> CheckReport {
    let results = exec::map(triples, |t| match coboundary(omega, t, Convention::Dual) {
        Ok(p) if p.is_zero() => None,
        Ok(p) => Some(json!({ "tuple": tuple_json(t), "residual": p.to_string() })),
        Err(e) => Some(json!({ "tuple": tuple_json(t), "error": e.to_string() })),
    });
    let mut report = CheckReport::new(format!("two_cocycle:{}", omega.name), seed);
    results.into_iter().for_each(|w| report.record(w));
    report
}

pub fn is_two_cocycle(omega: &Cochain, triples: &[Vec<GroupElement>]) -> bool {
    omega.arity == 2 && two_cocycle_report(omega, triples, 0).passed()
}

/// True iff `ω₁ − ω₂ = δ₁α` (dual convention) on every sampled pair.
pub fn equivalent_mod_coboundary(
    omega1: &Cochain,
    omega2: &Cochain,
    alpha: &Cochain,
    pairs: &[Vec<GroupElement>],
) -> bool {
    if omega1.arity != 2 || omega2.arity != 2 || alpha.arity != 1 {
        return false;
    }
    exec::map(pairs, |p| {
        let lhs = omega1.call(p) - omega2.call(p);
        coboundary(alpha, p, Convention::Dual).map(|d| d == lhs).unwrap_or(false)
    })
    .into_iter()
    .all(|ok| ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionType {
    Central,
    Semidirect,
    Direct,
    General,
}

pub fn classify_extension(sigma_trivial: bool, omega_trivial: bool) -> ExtensionType {
    match (sigma_trivial, omega_trivial) {
        (true, false) => ExtensionType::Central,
        (false, true) => ExtensionType::Semidirect,
        (true, true) => ExtensionType::Direct,
        (false, false) => ExtensionType::General,
    }
}

/// One basis functional of the declared 1-cochain family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feature {
    /// `dᵏaᵢ/dtᵏ` as a time function.
    Derivative { comp: usize, order: usize },
    /// The constant `aᵢ⁽ᵏ⁾(0)`.
    Coefficient { comp: usize, order: usize },
    /// The constant `b`.
    TimeShift,
}

impl Feature {
    fn eval(&self, g: &GroupElement, max_degree: usize) -> TimePoly {
        match *self {
            Feature::Derivative { comp, order } => g.a().component(comp).derivative_n(order),
            Feature::Coefficient { comp, order } => TimePoly::constant(g.a().component(comp).coeff(order), max_degree),
            Feature::TimeShift => TimePoly::constant(g.b().clone(), max_degree),
        }
    }
}

/// Linear functionals of `a, ȧ, …, a⁽ᴺ⁾` and `b`:
/// `α(g) = Σ λ_f f(g)` over [`Feature`]s.
#[derive(Debug, Clone)]
pub struct LinearFamily {
    pub features: Vec<Feature>,
    pub max_degree: usize,
}

impl LinearFamily {
    pub fn up_to(max_degree: usize) -> Self {
        let mut features = Vec::new();
        for comp in 0..3 {
            for order in 0..=max_degree {
                features.push(Feature::Derivative { comp, order });
                features.push(Feature::Coefficient { comp, order });
            }
        }
        features.push(Feature::TimeShift);
        LinearFamily { features, max_degree }
    }

    pub fn feature_cochain(&self, i: usize) -> Cochain {
        let f = self.features[i].clone();
        let n = self.max_degree;
        Cochain::new(1, format!("{f:?}"), move |t| f.eval(&t[0], n))
    }

    pub fn cochain(&self, weights: &[Scalar]) -> Cochain {
        let fs: Vec<(Feature, Scalar)> =
            self.features.iter().cloned().zip(weights.iter().cloned()).filter(|(_, w)| !w.is_zero()).collect();
        let n = self.max_degree;
        Cochain::new(1, "linear", move |t| {
            fs.iter().fold(TimePoly::zero(n), |acc, (f, w)| acc + f.eval(&t[0], n).scale(w))
        })
    }
}

/// Outcome of searching the family for `α` with `ω = δ₁α` on the samples.
#[derive(Debug, Clone)]
pub struct Falsification {
    /// Weights of a solving `α`, if one exists on the samples.
    pub solution: Option<Vec<Scalar>>,
    /// Pair with `b = 0` on both sides and `ω(g₂,g₁) ≠ ω(g₁,g₂)`. Since
    /// `δ₁α` is symmetric on commuting pairs for every `α`, such a pair rules
    /// out all 1-cochains, not only the declared family.
    pub commuting_witness: Option<(GroupElement, GroupElement)>,
    pub equations: usize,
    pub unknowns: usize,
}

impl Falsification {
    pub fn is_coboundary_on_samples(&self) -> bool {
        self.solution.is_some() && self.commuting_witness.is_none()
    }
}

/// Looks for `α` in `family` with `ω = δ₁α` on `pairs` by exact elimination.
pub fn falsify_coboundary(omega: &Cochain, pairs: &[Vec<GroupElement>], family: &LinearFamily) -> Falsification {
    let k = family.features.len();
    let feature_cochains: Vec<Cochain> = (0..k).map(|i| family.feature_cochain(i)).collect();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut rhs: Vec<Scalar> = Vec::new();
    for p in pairs {
        let target = omega.call(p);
        let cols: Vec<TimePoly> =
            feature_cochains.iter().map(|c| coboundary(c, p, Convention::Dual).expect("pair")).collect();
        let len =
            cols.iter().map(|c| c.coeffs().len()).chain(std::iter::once(target.coeffs().len())).max().unwrap_or(0);
        for n in 0..len {
            rows.push(cols.iter().map(|c| c.coeff(n)).collect());
            rhs.push(target.coeff(n));
        }
    }
    let equations = rows.len();
    let solution = solve_rational(rows, rhs, k);
    let commuting_witness = pairs.iter().find_map(|p| {
        let (g2, g1) = (&p[0], &p[1]);
        if !g2.b().is_zero() || !g1.b().is_zero() {
            return None;
        }
        let swapped = [g1.clone(), g2.clone()];
        (omega.call(p) != omega.call(&swapped)).then(|| (g2.clone(), g1.clone()))
    });
    Falsification { solution, commuting_witness, equations, unknowns: k }
}

/// Particular solution of `A x = y` over ℚ, or `None` if inconsistent.
pub fn solve_rational(mut a: Vec<Vec<Scalar>>, mut y: Vec<Scalar>, cols: usize) -> Option<Vec<Scalar>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        y.swap(r, p);
        let inv = a[r][c].clone().recip();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        y[r] = &y[r] * &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
                let d = &f * &y[r];
                y[i] -= d;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if y[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![Scalar::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = y[i].clone();
    }
    Some(x)
}

#[derive(Debug, Clone)]
enum Atom {
    Derivative { slot: usize, comp: usize, order: usize },
    Shifted { slot: usize, comp: usize, by: usize },
    TimeShift { slot: usize },
    Coefficient { slot: usize, comp: usize, order: usize },
    T,
}

impl Atom {
    fn eval(&self, t: &[GroupElement], n: usize) -> TimePoly {
        match *self {
            Atom::Derivative { slot, comp, order } => t[slot].a().component(comp).derivative_n(order),
            Atom::Shifted { slot, comp, by } => t[slot].a().component(comp).shift(t[by].b()),
            Atom::TimeShift { slot } => TimePoly::constant(t[slot].b().clone(), n),
            Atom::Coefficient { slot, comp, order } => TimePoly::constant(t[slot].a().component(comp).coeff(order), n),
            Atom::T => TimePoly::power(1, crate::timealg::int(1), n.max(1)).expect("budget"),
        }
    }
}

/// Random polynomial cochain: a sum of scaled products of up to two atoms
/// built from the entries of the tuple.
pub fn random_cochain(arity: usize, s: &mut Sampler, max_degree: usize) -> Cochain {
    let mut terms: Vec<(Scalar, Vec<Atom>)> = Vec::new();
    for _ in 0..4 {
        let c = s.nonzero_scalar();
        let factors = 1 + s.index(2);
        let mut atoms = Vec::new();
        for _ in 0..factors {
            let atom = if arity == 0 {
                if s.coin() {
                    Atom::T
                } else {
                    continue;
                }
            } else {
                let slot = s.index(arity);
                let comp = s.index(3);
                match s.index(5) {
                    0 => Atom::Derivative { slot, comp, order: s.index(3) },
                    1 => Atom::Shifted { slot, comp, by: s.index(arity) },
                    2 => Atom::TimeShift { slot },
                    3 => Atom::Coefficient { slot, comp, order: s.index(3) },
                    _ => Atom::T,
                }
            };
            atoms.push(atom);
        }
        terms.push((c, atoms));
    }
    Cochain::new(arity, "random", move |t| {
        terms.iter().fold(TimePoly::zero(max_degree), |acc, (c, atoms)| {
            let prod = atoms.iter().fold(TimePoly::constant(c.clone(), max_degree), |p, a| p * a.eval(t, max_degree));
            acc + prod
        })
    })
}

/// `count` random tuples of `len` elements of degree ≤ `deg`.
pub fn random_tuples(
    s: &mut Sampler,
    count: usize,
    len: usize,
    deg: usize,
    max_degree: usize,
) -> Vec<Vec<GroupElement>> {
    (0..count).map(|_| (0..len).map(|_| s.element(deg, max_degree)).collect()).collect()
}
