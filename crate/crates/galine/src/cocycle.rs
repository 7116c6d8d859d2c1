//! The `(B, C)` family of two-cocycles.
//!
//! With `B(a) = Σ βₙ a⁽ⁿ⁾` and `C(a) = Σ γₙ a⁽ⁿ⁾`,
//!
//! ```text
//! ω(g₂, g₁) = ½ (Λ_{b₁}B(a₂))·C(a₁) − ½ (Λ_{b₁}C(a₂))·B(a₁)
//! ```
//!
//! On Galilei pairs this reduces to `½m(a₂·v₁ − v₂·a₁ + b₁v₂·v₁)` with
//! `m = β₀γ₁ − γ₀β₁`.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::cohomology::Cochain;
use crate::exec;
use crate::group::{GroupElement, GroupError};
use crate::report::CheckReport;
use crate::timealg::{format_scalar, rat, scalar_serde, scalar_vec_serde, Scalar, TimePoly, Vec3Poly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CocycleError {
    #[error("spec is not Galilei-embeddable (m = 0)")]
    NotEmbeddable,
    #[error("C has no nonzero coefficient; a_q is undetermined")]
    SingularC,
    #[error("a_q needs degree {degree}, budget is {budget}")]
    DegreeOverflow { degree: usize, budget: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A pair of vector functionals `B`, `C` of the translation.
pub trait BcMap: Send + Sync {
    fn b_of(&self, a: &Vec3Poly) -> Vec3Poly;
    fn c_of(&self, a: &Vec3Poly) -> Vec3Poly;
    fn label(&self) -> String;
}

/// Coefficients `β₀…`, `γ₀…` of the linear-differential ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleSpec {
    #[serde(with = "scalar_vec_serde")]
    pub beta: Vec<Scalar>,
    #[serde(with = "scalar_vec_serde")]
    pub gamma: Vec<Scalar>,
}

/// The Galilean-invariant energy `w` entering phases as `−wb`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InternalEnergy {
    #[serde(with = "scalar_serde")]
    pub w: Scalar,
}

impl InternalEnergy {
    pub fn new(w: Scalar) -> Self {
        InternalEnergy { w }
    }
}

fn at(v: &[Scalar], n: usize) -> Scalar {
    v.get(n).cloned().unwrap_or_else(Scalar::zero)
}

fn linear_derivative_sum(coeffs: &[Scalar], p: &TimePoly) -> TimePoly {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(TimePoly::zero(p.max_degree()), |acc, (n, c)| acc + p.derivative_n(n).scale(c))
}

impl CocycleSpec {
    pub fn new(beta: Vec<Scalar>, gamma: Vec<Scalar>) -> Self {
        CocycleSpec { beta, gamma }
    }

    /// `β = (m, 0, …)`, `γ = (0, 1, 0, …)`: the cocycle `½m(Λ_{b₁}a₂·ȧ₁ − Λ_{b₁}ȧ₂·a₁)`.
    pub fn minimal(m: Scalar) -> Self {
        Self::new(vec![m], vec![Scalar::zero(), Scalar::one()])
    }

    /// `β₀ = m, γ₀ = 0, γ₁ = 1` with free higher coefficients
    /// `β₁, β₂, …` and `γ₂, γ₃, …`.
    pub fn canonical(m: Scalar, higher_beta: &[Scalar], higher_gamma: &[Scalar]) -> Self {
        let mut beta = vec![m];
        beta.extend_from_slice(higher_beta);
        let mut gamma = vec![Scalar::zero(), Scalar::one()];
        gamma.extend_from_slice(higher_gamma);
        Self::new(beta, gamma)
    }

    pub fn beta(&self, n: usize) -> Scalar {
        at(&self.beta, n)
    }

    pub fn gamma(&self, n: usize) -> Scalar {
        at(&self.gamma, n)
    }

    /// `m = β₀γ₁ − γ₀β₁`.
    pub fn mass(&self) -> Scalar {
        self.beta(0) * self.gamma(1) - self.gamma(0) * self.beta(1)
    }

    pub fn is_embeddable(&self) -> bool {
        !self.mass().is_zero()
    }

    pub fn is_canonical(&self) -> bool {
        self.beta(0) == self.mass() && self.gamma(1).is_one() && self.gamma(0).is_zero()
    }

    /// Least `k` with `γ_k ≠ 0`.
    pub fn k0(&self) -> Option<usize> {
        self.gamma.iter().position(|g| !g.is_zero())
    }

    /// Copy with `βₙ = 0` for `n ≥ 2` and `γₙ = 0` for `n ≥ 2`.
    pub fn truncated_to_first_order(&self) -> Self {
        Self::new(vec![self.beta(0), self.beta(1)], vec![self.gamma(0), self.gamma(1)])
    }

    pub fn b_scalar(&self, p: &TimePoly) -> TimePoly {
        linear_derivative_sum(&self.beta, p)
    }

    pub fn c_scalar(&self, p: &TimePoly) -> TimePoly {
        linear_derivative_sum(&self.gamma, p)
    }

    pub fn eval_b(&self, a: &Vec3Poly) -> Vec3Poly {
        a.map(|p| self.b_scalar(p))
    }

    pub fn eval_c(&self, a: &Vec3Poly) -> Vec3Poly {
        a.map(|p| self.c_scalar(p))
    }

    pub fn describe(&self) -> String {
        let list = |v: &[Scalar]| v.iter().map(format_scalar).collect::<Vec<_>>().join(", ");
        format!("β=({}), γ=({})", list(&self.beta), list(&self.gamma))
    }
}

impl BcMap for CocycleSpec {
    fn b_of(&self, a: &Vec3Poly) -> Vec3Poly {
        self.eval_b(a)
    }
    fn c_of(&self, a: &Vec3Poly) -> Vec3Poly {
        self.eval_c(a)
    }
    fn label(&self) -> String {
        self.describe()
    }
}

/// Negative control: `B(a) = aₓ(0)·a`, which is not additive.
#[derive(Debug, Clone)]
pub struct NonlinearB(pub CocycleSpec);

impl BcMap for NonlinearB {
    fn b_of(&self, a: &Vec3Poly) -> Vec3Poly {
        a.scale(&a.x.coeff(0))
    }
    fn c_of(&self, a: &Vec3Poly) -> Vec3Poly {
        self.0.eval_c(a)
    }
    fn label(&self) -> String {
        format!("nonlinear-B[{}]", self.0.describe())
    }
}

pub fn omega<M: BcMap + ?Sized>(map: &M, g2: &GroupElement, g1: &GroupElement) -> TimePoly {
    let b1 = g1.b();
    let (a2, a1) = (g2.a(), g1.a());
    let half = rat(1, 2);
    let first = map.b_of(a2).shift(b1).dot(&map.c_of(a1));
    let second = map.c_of(a2).shift(b1).dot(&map.b_of(a1));
    (first - second).scale(&half)
}

pub fn omega_cochain(map: Arc<dyn BcMap>) -> Cochain {
    let name = format!("omega[{}]", map.label());
    Cochain::new(2, name, move |t| omega(map.as_ref(), &t[0], &t[1]))
}

/// `ω + aₓ₂(0)·aₓ₁(0)·t`, a deliberately broken cocycle.
pub fn corrupted_omega_cochain(map: Arc<dyn BcMap>) -> Cochain {
    let name = format!("corrupted-omega[{}]", map.label());
    Cochain::new(2, name, move |t| {
        let base = omega(map.as_ref(), &t[0], &t[1]);
        let k = t[0].a().x.coeff(0) * t[1].a().x.coeff(0);
        let budget = base.max_degree().max(1);
        base + TimePoly::power(1, k, budget).expect("degree one fits")
    })
}

/// `½m(a₂(0)·v₁ − v₂·a₁(0) + b₁ v₂·v₁)` as a constant time function.
pub fn galilei_cocycle(m: &Scalar, g2: &GroupElement, g1: &GroupElement, max_degree: usize) -> TimePoly {
    let mut s = Scalar::zero();
    for i in 0..3 {
        let (a2, v2) = (g2.a().component(i).coeff(0), g2.a().component(i).coeff(1));
        let (a1, v1) = (g1.a().component(i).coeff(0), g1.a().component(i).coeff(1));
        s += &a2 * &v1 - &v2 * &a1 + g1.b() * &v2 * &v1;
    }
    TimePoly::constant(s * m * rat(1, 2), max_degree)
}

/// One `(a₁, a₂, b)` draw for [`check_bc_constraints`].
#[derive(Debug, Clone)]
pub struct BcSample {
    pub a1: Vec3Poly,
    pub a2: Vec3Poly,
    pub b: Scalar,
}

/// Shift equivariance and additivity of `B` and `C`.
pub fn check_bc_constraints<M: BcMap + ?Sized>(map: &M, samples: &[BcSample], seed: u64) -> CheckReport {
    let results = exec::map(samples, |s| {
        let mut failed = Vec::new();
        if map.b_of(&s.a1).shift(&s.b) != map.b_of(&s.a1.shift(&s.b)) {
            failed.push("B shift");
        }
        if map.c_of(&s.a1).shift(&s.b) != map.c_of(&s.a1.shift(&s.b)) {
            failed.push("C shift");
        }
        let sum = s.a2.add(&s.a1);
        if map.b_of(&sum) != map.b_of(&s.a2).add(&map.b_of(&s.a1)) {
            failed.push("B additivity");
        }
        if map.c_of(&sum) != map.c_of(&s.a2).add(&map.c_of(&s.a1)) {
            failed.push("C additivity");
        }
        (!failed.is_empty()).then(|| {
            json!({
                "failed": failed,
                "a1": s.a1.to_string(),
                "a2": s.a2.to_string(),
                "b": format_scalar(&s.b),
            })
        })
    });
    let mut report = CheckReport::new(format!("bc_constraints:{}", map.label()), seed);
    results.into_iter().for_each(|w| report.record(w));
    report
}

/// Compares `ω` with the Galilei cocycle on Galilei pairs `(g₂, g₁)`.
pub fn galilei_reduction_check(
    spec: &CocycleSpec,
    pairs: &[(GroupElement, GroupElement)],
    seed: u64,
) -> Result<CheckReport, CocycleError> {
    if !spec.is_embeddable() {
        return Err(CocycleError::NotEmbeddable);
    }
    let m = spec.mass();
    let results = exec::map(pairs, |(g2, g1)| {
        if !g2.is_galilei() || !g1.is_galilei() {
            return Some(json!({ "error": "not a Galilei pair" }));
        }
        let got = omega(spec, g2, g1);
        let want = galilei_cocycle(&m, g2, g1, got.max_degree());
        (got != want).then(|| {
            json!({
                "g2": serde_json::to_value(g2).ok(),
                "g1": serde_json::to_value(g1).ok(),
                "omega": got.to_string(),
                "expected": want.to_string(),
            })
        })
    });
    let mut report = CheckReport::new(format!("galilei_reduction:{}", spec.describe()), seed);
    results.into_iter().for_each(|w| report.record(w));
    Ok(report)
}

fn solve_component(spec: &CocycleSpec, q: &TimePoly, k0: usize) -> Result<TimePoly, CocycleError> {
    let Some(d) = q.degree() else {
        return Ok(TimePoly::zero(q.max_degree()));
    };
    let top = d + k0;
    if top > q.max_degree() {
        return Err(CocycleError::DegreeOverflow { degree: top, budget: q.max_degree() });
    }
    let lead = spec.gamma(k0).recip();
    let mut a = vec![Scalar::zero(); top + 1];
    for j in (0..=d).rev() {
        let mut rhs = q.coeff(j);
        for n in (k0 + 1)..spec.gamma.len() {
            if let Some(v) = a.get(j + n) {
                rhs -= spec.gamma(n) * v;
            }
        }
        a[j + k0] = rhs * &lead;
    }
    TimePoly::new(a, q.max_degree()).map_err(|_| CocycleError::DegreeOverflow { degree: top, budget: q.max_degree() })
}

/// `a_q` with `C(a_q) = q`, coefficients below the least nonzero `γ` index set to zero.
pub fn solve_aq(spec: &CocycleSpec, q: &Vec3Poly) -> Result<Vec3Poly, CocycleError> {
    let k0 = spec.k0().ok_or(CocycleError::SingularC)?;
    q.try_map(|c| solve_component(spec, c, k0))
}

pub fn solve_aq_scalar(spec: &CocycleSpec, q: &TimePoly) -> Result<TimePoly, CocycleError> {
    let k0 = spec.k0().ok_or(CocycleError::SingularC)?;
    solve_component(spec, q, k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{random_tuples, two_cocycle_report};
    use crate::group::compose;
    use crate::sample::Sampler;
    use crate::timealg::{int, DEFAULT_DEGREE};
    use proptest::prelude::*;

    const N: usize = DEFAULT_DEGREE;

    fn poly(powers: &[Scalar]) -> TimePoly {
        TimePoly::from_powers(powers.to_vec(), N).unwrap()
    }

    fn px(powers: &[i64]) -> Vec3Poly {
        Vec3Poly::along_x(poly(&powers.iter().map(|&p| int(p)).collect::<Vec<_>>()))
    }

    #[test]
    fn b_and_c_examples() {
        let g = int(3);
        let a = Vec3Poly::along_x(poly(&[int(0), int(0), &g * rat(1, 2)]));
        let id = CocycleSpec::new(vec![int(1)], vec![int(1)]);
        assert_eq!(id.eval_b(&a), a);
        let c1 = CocycleSpec::new(vec![], vec![int(0), int(1)]);
        assert_eq!(c1.eval_c(&a), Vec3Poly::along_x(poly(&[int(0), g.clone()])));
        // β = (1, 3/10): ½gt² + (3/10)gt
        let s = CocycleSpec::new(vec![int(1), rat(3, 10)], vec![]);
        let want = poly(&[int(0), &g * rat(3, 10), &g * rat(1, 2)]);
        assert_eq!(s.eval_b(&a).x, want);
    }

    #[test]
    fn omega_with_identity_vanishes() {
        let spec = CocycleSpec::new(vec![int(2), int(1)], vec![int(1), int(3), rat(1, 2)]);
        let mut s = Sampler::new(1);
        let g = s.element(3, N);
        let e = GroupElement::identity(N);
        assert!(omega(&spec, &g, &e).is_zero());
        assert!(omega(&spec, &e, &g).is_zero());
    }

    #[test]
    fn omega_worked_values() {
        let spec = CocycleSpec::minimal(int(1));
        // g₂ = (v₂t, 0), g₁ = (v₁t, 1): constant ½v₂v₁
        let (v2, v1) = (3, -2);
        let g2 = GroupElement::new(px(&[0, v2]), int(0));
        let g1 = GroupElement::new(px(&[0, v1]), int(1));
        assert_eq!(omega(&spec, &g2, &g1), TimePoly::constant(rat(v2 * v1, 2), N));
        // g₂ = (a₂, 0), g₁ = (v₁t, 0): ½a₂v₁
        let g2 = GroupElement::new(px(&[5]), int(0));
        let g1 = GroupElement::new(px(&[0, 7]), int(0));
        assert_eq!(omega(&spec, &g2, &g1), TimePoly::constant(rat(35, 2), N));
    }

    #[test]
    fn minimal_spec_matches_closed_form() {
        // ½m((Λ_{b₁}a₂)·ȧ₁ − (Λ_{b₁}ȧ₂)·a₁)
        let m = rat(5, 3);
        let spec = CocycleSpec::minimal(m.clone());
        let mut s = Sampler::new(2);
        for _ in 0..20 {
            let (g2, g1) = (s.element(4, N), s.element(4, N));
            let a2s = g2.a().shift(g1.b());
            let want = (a2s.dot(&g1.a().derivative()) - a2s.derivative().dot(g1.a())).scale(&(&m * rat(1, 2)));
            assert_eq!(omega(&spec, &g2, &g1), want);
        }
    }

    #[test]
    fn omega_is_a_cocycle_for_random_specs() {
        let mut s = Sampler::new(3);
        for _ in 0..4 {
            let spec = CocycleSpec::new(s.scalars(4), s.scalars(4));
            let triples = random_tuples(&mut s, 50, 3, 3, N);
            let r = two_cocycle_report(&omega_cochain(Arc::new(spec)), &triples, 3);
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn corrupted_omega_fails() {
        let mut s = Sampler::new(4);
        let triples = random_tuples(&mut s, 30, 3, 3, N);
        let r = two_cocycle_report(&corrupted_omega_cochain(Arc::new(CocycleSpec::minimal(int(1)))), &triples, 4);
        assert!(!r.passed());
    }

    fn bc_samples(s: &mut Sampler, n: usize) -> Vec<BcSample> {
        (0..n).map(|_| BcSample { a1: s.vec3(4, N), a2: s.vec3(4, N), b: s.scalar() }).collect()
    }

    #[test]
    fn constraints_hold_for_ansatz_and_fail_for_nonlinear_b() {
        let mut s = Sampler::new(5);
        let spec = CocycleSpec::new(s.scalars(5), s.scalars(5));
        let samples = bc_samples(&mut s, 30);
        assert!(check_bc_constraints(&spec, &samples, 5).passed());
        let zero = vec![BcSample { a1: Vec3Poly::zero(N), a2: Vec3Poly::zero(N), b: int(2) }];
        assert!(check_bc_constraints(&spec, &zero, 5).passed());
        let bad = check_bc_constraints(&NonlinearB(spec), &samples, 5);
        assert!(!bad.passed());
        assert!(bad.violations[0]["failed"].as_array().unwrap().iter().any(|f| f == "B additivity"));
    }

    fn galilei_pairs(s: &mut Sampler, n: usize) -> Vec<(GroupElement, GroupElement)> {
        (0..n).map(|_| (s.galilei(N), s.galilei(N))).collect()
    }

    #[test]
    fn galilei_reduction_examples() {
        let mut s = Sampler::new(6);
        let pairs = galilei_pairs(&mut s, 100);
        let canon = CocycleSpec::new(vec![int(1), int(0)], vec![int(0), int(1)]);
        assert_eq!(canon.mass(), int(1));
        assert!(galilei_reduction_check(&canon, &pairs, 6).unwrap().passed());
        let other = CocycleSpec::new(vec![int(2), int(1)], vec![int(1), int(3)]);
        assert_eq!(other.mass(), int(5));
        assert!(galilei_reduction_check(&other, &pairs, 6).unwrap().passed());
        let flat = CocycleSpec::new(vec![int(2), int(1)], vec![int(4), int(2)]);
        assert_eq!(flat.mass(), int(0));
        assert_eq!(galilei_reduction_check(&flat, &pairs, 6), Err(CocycleError::NotEmbeddable));
        // m = 0: the reduced cocycle itself vanishes
        for (g2, g1) in &pairs {
            assert!(omega(&flat, g2, g1).is_zero());
        }
    }

    #[test]
    fn reduction_ignores_higher_coefficients() {
        let mut s = Sampler::new(7);
        let spec = CocycleSpec::new(s.scalars(6), s.scalars(6));
        let low = spec.truncated_to_first_order();
        for (g2, g1) in galilei_pairs(&mut s, 50) {
            assert_eq!(omega(&spec, &g2, &g1), omega(&low, &g2, &g1));
        }
    }

    #[test]
    fn solve_aq_examples() {
        let canon = CocycleSpec::minimal(int(1));
        let c = rat(7, 2);
        let q = Vec3Poly::along_x(TimePoly::constant(c.clone(), N));
        assert_eq!(solve_aq(&canon, &q).unwrap(), Vec3Poly::along_x(poly(&[int(0), c])));
        // γ = (0, 1, γ₂), q = t → ½t² − γ₂t
        let g2 = rat(2, 5);
        let spec = CocycleSpec::new(vec![int(1)], vec![int(0), int(1), g2.clone()]);
        let q = Vec3Poly::along_x(poly(&[int(0), int(1)]));
        let want = Vec3Poly::along_x(poly(&[int(0), -g2, rat(1, 2)]));
        assert_eq!(solve_aq(&spec, &q).unwrap(), want);
        assert!(solve_aq(&spec, &Vec3Poly::zero(N)).unwrap().is_zero());
    }

    #[test]
    fn solve_aq_errors() {
        let spec = CocycleSpec::new(vec![int(1)], vec![int(0), int(0)]);
        let q = Vec3Poly::along_x(poly(&[int(1)]));
        assert_eq!(solve_aq(&spec, &q), Err(CocycleError::SingularC));
        let canon = CocycleSpec::minimal(int(1));
        let top = Vec3Poly::along_x(TimePoly::power(N, int(1), N).unwrap());
        assert_eq!(solve_aq(&canon, &top), Err(CocycleError::DegreeOverflow { degree: N + 1, budget: N }));
    }

    #[test]
    fn spec_flags() {
        assert!(CocycleSpec::minimal(int(2)).is_canonical());
        assert!(CocycleSpec::canonical(int(3), &[rat(3, 10)], &[rat(1, 5)]).is_canonical());
        assert!(!CocycleSpec::new(vec![int(2), int(1)], vec![int(1), int(3)]).is_canonical());
        let json = serde_json::to_string(&CocycleSpec::canonical(int(1), &[rat(3, 10)], &[])).unwrap();
        assert_eq!(json, r#"{"beta":["1","3/10"],"gamma":["0","1"]}"#);
        let back: CocycleSpec = serde_json::from_str(r#"{"beta":[1, 0.3],"gamma":["0","1"]}"#).unwrap();
        assert_eq!(back.beta(1), rat(3, 10));
    }

    proptest! {
        #[test]
        fn solve_aq_round_trips(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let mut gamma = s.scalars(4);
            if gamma.iter().all(|g| g.is_zero()) {
                gamma[1] = int(1);
            }
            let spec = CocycleSpec::new(s.scalars(3), gamma);
            let k0 = spec.k0().unwrap();
            let q = s.vec3(N - k0, N);
            let aq = solve_aq(&spec, &q).unwrap();
            prop_assert_eq!(spec.eval_c(&aq), q);
            for c in aq.components() {
                for n in 0..k0 {
                    prop_assert!(c.coeff(n).is_zero());
                }
            }
        }

        #[test]
        fn omega_antisymmetric_on_diagonal(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let spec = CocycleSpec::new(s.scalars(4), s.scalars(4));
            let g = s.translation(4, N);
            prop_assert!(omega(&spec, &g, &g).is_zero());
        }

        #[test]
        fn omega_cocycle_condition(seed in any::<u64>()) {
            let mut s = Sampler::new(seed);
            let spec = CocycleSpec::new(s.scalars(4), s.scalars(4));
            let (g3, g2, g1) = (s.element(3, N), s.element(3, N), s.element(3, N));
            let g32 = compose(&g3, &g2).unwrap();
            let g21 = compose(&g2, &g1).unwrap();
            let lhs = omega(&spec, &g3, &g2).shift(g1.b()) + omega(&spec, &g32, &g1);
            let rhs = omega(&spec, &g2, &g1) + omega(&spec, &g3, &g21);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
