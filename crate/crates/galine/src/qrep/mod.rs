//! Velocity-label representation of the extended group.
//!
//! A group element `g = (a, b)` maps the generalized eigenvector `|q⟩` to
//! `e^{iξ(g;q)} |Λ_{−b}(q + C(a))⟩` with
//!
//! ```text
//! ξ(g;q) = B(a)·q′ − ½B(a)·C(a) + ½(Λ_{−b} − 1) B(a_{q′})·C(a_{q′}) − wb,   q′ = q + C(a)
//! ```
//!
//! Composition bookkeeping: acting with `g₁` then `g₂` on `|q⟩` accumulates
//! `ξ(g₁;q) + Λ_{b₁}ξ(g₂;q₁)` with `q₁` the transformed label, the phase of the
//! second step being carried back to the time frame of `q`. The defect against
//! `ξ(g₂g₁;q) + ω(g₂,g₁)` vanishes whenever `b₁ = 0`.

pub mod operator;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cocycle::{omega, solve_aq, solve_aq_scalar, CocycleError, CocycleSpec, InternalEnergy};
use crate::group::{compose, inverse, GroupElement};
use crate::timealg::{int, rat, Scalar, TimePoly, Vec3Poly};

pub use operator::{commutator, CPoly, CanonicalOperator, Monomial};

pub type VelocityLabel = Vec3Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QrepError {
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error("the frame Hamiltonian needs a canonical spec (β₀ = m, γ₀ = 0, γ₁ = 1)")]
    NotCanonical,
}

fn half() -> Scalar {
    rat(1, 2)
}

/// Phase `ξ(g;q)` picked up by `|q⟩` under `g`.
pub fn xi(spec: &CocycleSpec, w: &InternalEnergy, g: &GroupElement, q: &VelocityLabel) -> Result<TimePoly, QrepError> {
    let ca = spec.eval_c(g.a());
    let ba = spec.eval_b(g.a());
    let qp = q.add(&ca);
    let aq = solve_aq(spec, &qp)?;
    let f = spec.eval_b(&aq).dot(&spec.eval_c(&aq));
    let nb = -g.b().clone();
    let budget = q.max_degree();
    Ok(ba.dot(&qp) - ba.dot(&ca).scale(&half()) + (f.shift(&nb) - f).scale(&half())
        - TimePoly::constant(&w.w * g.b(), budget))
}

/// `ξ(g⁻¹;q)`.
pub fn xi_inverse(
    spec: &CocycleSpec,
    w: &InternalEnergy,
    g: &GroupElement,
    q: &VelocityLabel,
) -> Result<TimePoly, QrepError> {
    xi(spec, w, &inverse(g), q)
}

/// `Λ_{−b}(q + C(a))`.
pub fn transform_label(spec: &CocycleSpec, g: &GroupElement, q: &VelocityLabel) -> VelocityLabel {
    q.add(&spec.eval_c(g.a())).shift(&-g.b().clone())
}

/// `q̃ = q − Λ_{−b}C(a)`, the label appearing in the wavefunction transform.
pub fn transform_label_dual(spec: &CocycleSpec, g: &GroupElement, q: &VelocityLabel) -> VelocityLabel {
    q.sub(&spec.eval_c(g.a()).shift(&-g.b().clone()))
}

/// `ξ(g₁;q) + Λ_{b₁}ξ(g₂;q₁) − ξ(g₂g₁;q) − ω(g₂,g₁)` with `q₁` the label after `g₁`.
pub fn composition_defect(
    spec: &CocycleSpec,
    w: &InternalEnergy,
    g2: &GroupElement,
    g1: &GroupElement,
    q: &VelocityLabel,
) -> Result<TimePoly, QrepError> {
    let g21 = compose(g2, g1).map_err(CocycleError::from)?;
    let q1 = transform_label(spec, g1, q);
    let step1 = xi(spec, w, g1, q)?;
    let step2 = xi(spec, w, g2, &q1)?.shift(g1.b());
    let direct = xi(spec, w, &g21, q)?;
    Ok(step1 + step2 - direct - omega(spec, g2, g1))
}

fn unit(budget: usize) -> CanonicalOperator {
    CanonicalOperator::identity(budget)
}

fn real_op(p: &TimePoly) -> CanonicalOperator {
    CanonicalOperator::scalar(CPoly::real(p.clone()))
}

fn poly_t(n: usize, c: Scalar, budget: usize) -> TimePoly {
    TimePoly::power(n, c, budget.max(n)).expect("budget covers the power")
}

/// `P̂ᵢ = β₀qᵢ + iγ₀Dᵢ`.
pub fn momentum(spec: &CocycleSpec, budget: usize) -> [CanonicalOperator; 3] {
    boost(spec, 0, budget)
}

/// `K̂⁽ⁿ⁾ᵢ = Σₖ t^{n−k}/(n−k)! (β_k qᵢ + iγ_k Dᵢ)`.
pub fn boost(spec: &CocycleSpec, n: usize, budget: usize) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| {
        let mut op = CanonicalOperator::zero(budget);
        for k in 0..=n {
            let fact: i64 = (1..=(n - k) as i64).product();
            let tk = poly_t(n - k, rat(1, fact), budget);
            let q = CanonicalOperator::q(i, budget).scale(&CPoly::real(tk.scale(&spec.beta(k))));
            let d = CanonicalOperator::d(i, budget).scale(&CPoly::imag(tk.scale(&spec.gamma(k))));
            op = op.add(&q).add(&d);
        }
        op
    })
}

/// `X̂ᵢ = (i/m)Dᵢ`.
pub fn position(spec: &CocycleSpec, budget: usize) -> [CanonicalOperator; 3] {
    let inv_m = spec.mass().recip();
    std::array::from_fn(|i| CanonicalOperator::d(i, budget).scale(&CPoly::constant(int(0), inv_m.clone(), budget)))
}

/// `V̂ = w Î`.
pub fn internal_energy(w: &InternalEnergy, budget: usize) -> CanonicalOperator {
    unit(budget).scale_real(&w.w)
}

/// `i[H, A] + ∂A/∂t`.
pub fn ehrenfest_rhs(h: &CanonicalOperator, a: &CanonicalOperator) -> CanonicalOperator {
    commutator(h, a).times_i().add(&a.time_derivative())
}

fn dot_ops(a: &[CanonicalOperator; 3], b: &[CanonicalOperator; 3]) -> CanonicalOperator {
    (0..3).fold(CanonicalOperator::zero(0), |acc, i| acc.add(&a[i].mul(&b[i])))
}

/// The Hamiltonian of a frame whose labels follow `q_flow`, in several forms.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    /// `i ∂_b` of the representation at `b = 0` on the label family
    /// `ℓ(t) = ℓ₀ + q_flow(t) − q_flow(0)`, expressed with `qᵢ` the current label.
    pub generator: CanonicalOperator,
    /// `½ ∂_t(B(a_q))·q + w + q̇·(i∇ + B(a_q))` on the same family, term by term as printed.
    pub literal: CanonicalOperator,
    /// Decomposition with `a_q = solve_aq(q_flow)` as a c-number; canonical specs only.
    pub frame: Option<FrameHamiltonian>,
    pub regrouping: Option<Regrouping>,
}

/// `P̂²/2m + V̂ + m q̇·X̂ + m q̇·(½a_q + ½Σβₙ/m a_q⁽ⁿ⁾) + ½P̂·(Σβₙ/m a_q⁽ⁿ⁺¹⁾ − Σγₙa_q⁽ⁿ⁾)`.
#[derive(Debug, Clone)]
pub struct FrameHamiltonian {
    pub kinetic: CanonicalOperator,
    pub internal: CanonicalOperator,
    pub inertial: CanonicalOperator,
    pub fictitious_potential: CanonicalOperator,
    pub drift: CanonicalOperator,
    /// `Σβₙ/m a_q⁽ⁿ⁺¹⁾ − Σγₙa_q⁽ⁿ⁾` over `n ≥ 1`, `n ≥ 2`.
    pub drift_velocity: Vec3Poly,
}

impl FrameHamiltonian {
    pub fn total(&self) -> CanonicalOperator {
        self.kinetic.add(&self.internal).add(&self.inertial).add(&self.fictitious_potential).add(&self.drift)
    }
}

/// Which regrouped forms reproduce the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regrouping {
    /// `m q̇·(X̂ + ½a_q + ½Σβₙ/m a_q⁽ⁿ⁾) + ½P̂·(Σβₙ/m a_q⁽ⁿ⁺¹⁾ − Σγₙa_q⁽ⁿ⁾) + P̂²/2m + V̂`.
    pub half_a_q: bool,
    /// `m q̇·(X̂ + a_qÎ + Σβₙ/m a_q⁽ⁿ⁾) + ½P̂·(Σβₙ/m a_q⁽ⁿ⁾ − Σγₙa_q⁽ⁿ⁾) + P̂²/2m + V̂`.
    pub full_a_q: bool,
    /// `m q̇·(X̂ + ½a_q) + P̂²/2m + V̂`.
    pub minimal: bool,
    /// The printed generator agrees with the computed one.
    pub literal: bool,
}

/// Sums `Σ coeffs[n] · a⁽ⁿ⁺shift⁾` for `n ≥ from`, componentwise.
fn derivative_sum(
    coeffs: &[Scalar],
    from: usize,
    shift: usize,
    a: &[[CanonicalOperator; 3]],
) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| {
        let mut acc = CanonicalOperator::zero(0);
        for (n, c) in coeffs.iter().enumerate().skip(from) {
            if !c.is_zero() {
                acc = acc.add(&a[n + shift][i].scale_real(c));
            }
        }
        acc
    })
}

fn scaled(v: &[CanonicalOperator; 3], k: &Scalar) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| v[i].scale_real(k))
}

fn summed(a: &[CanonicalOperator; 3], b: &[CanonicalOperator; 3]) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| a[i].add(&b[i]))
}

fn diff(a: &[CanonicalOperator; 3], b: &[CanonicalOperator; 3]) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| a[i].sub(&b[i]))
}

fn c_vec(v: &Vec3Poly) -> [CanonicalOperator; 3] {
    std::array::from_fn(|i| real_op(v.component(i)))
}

/// Builds the generator and its regroupings for labels following `q_flow`.
pub fn hamiltonian(spec: &CocycleSpec, w: &InternalEnergy, q_flow: &Vec3Poly) -> Result<Hamiltonian, QrepError> {
    if !spec.is_embeddable() {
        return Err(CocycleError::NotEmbeddable.into());
    }
    let n = q_flow.max_degree();
    let m = spec.mass();
    let h = q_flow.map(|p| p - &TimePoly::constant(p.coeff(0), n));
    let hdot = h.derivative();
    let one = TimePoly::constant(int(1), n);
    let a1 = solve_aq_scalar(spec, &one)?;
    let ah = solve_aq(spec, &h)?;
    let v = internal_energy(w, n);

    // x-representation: label ℓᵢ = xᵢ + hᵢ(t), a_ℓ = x A₁ + A_h.
    let x: [CanonicalOperator; 3] = std::array::from_fn(|i| CanonicalOperator::q(i, n));
    let d: [CanonicalOperator; 3] = std::array::from_fn(|i| CanonicalOperator::d(i, n));
    let label_sol = |p: &TimePoly, q: &Vec3Poly| -> [CanonicalOperator; 3] {
        std::array::from_fn(|i| x[i].scale(&CPoly::real(p.clone())).add(&real_op(q.component(i))))
    };
    let b_l = label_sol(&spec.b_scalar(&a1), &spec.eval_b(&ah));
    let ell: [CanonicalOperator; 3] = std::array::from_fn(|i| x[i].add(&real_op(h.component(i))));
    let f = dot_ops(&b_l, &ell);
    let q_dot_d =
        (0..3).fold(CanonicalOperator::zero(n), |acc, i| acc.add(&d[i].scale(&CPoly::imag(hdot.component(i).clone()))));
    let gen_x = f.time_derivative().scale_real(&half()).add(&v).add(&q_dot_d);
    let bdot_l: [CanonicalOperator; 3] = std::array::from_fn(|i| b_l[i].time_derivative());
    let qdot_b = dot_ops(&c_vec(&hdot), &b_l);
    let lit_x = dot_ops(&bdot_l, &ell).scale_real(&half()).add(&v).add(&q_dot_d).add(&qdot_b);

    // Back to the current label: xᵢ = qᵢ − hᵢ.
    let back: [TimePoly; 3] = std::array::from_fn(|i| -h.component(i));
    let generator = gen_x.shift_q(&back);
    let literal = lit_x.shift_q(&back);

    if !spec.is_canonical() {
        return Ok(Hamiltonian { generator, literal, frame: None, regrouping: None });
    }

    let order = spec.beta.len().max(spec.gamma.len()) + 2;
    let a_ell: Vec<[CanonicalOperator; 3]> = (0..order)
        .map(|k| label_sol(&a1.derivative_n(k), &ah.derivative_n(k)))
        .map(|ops| std::array::from_fn(|i| ops[i].shift_q(&back)))
        .collect();
    let p = momentum(spec, n);
    let xo = position(spec, n);
    let qdot = c_vec(&hdot);
    let kinetic = dot_ops(&p, &p).scale_real(&(rat(1, 2) / &m));
    let inv_m = m.recip();
    let beta_over_m: Vec<Scalar> = spec.beta.iter().map(|b| b * &inv_m).collect();
    let base = kinetic.add(&v);

    let beta_sum = derivative_sum(&beta_over_m, 1, 0, &a_ell);
    let beta_sum_up = derivative_sum(&beta_over_m, 1, 1, &a_ell);
    let gamma_sum = derivative_sum(&spec.gamma, 2, 0, &a_ell);
    let half_inner = summed(&summed(&xo, &scaled(&a_ell[0], &half())), &scaled(&beta_sum, &half()));
    let half_form = base
        .add(&dot_ops(&qdot, &half_inner).scale_real(&m))
        .add(&dot_ops(&p, &diff(&beta_sum_up, &gamma_sum)).scale_real(&half()));
    let full_inner = summed(&summed(&xo, &a_ell[0]), &beta_sum);
    let full_form = base
        .add(&dot_ops(&qdot, &full_inner).scale_real(&m))
        .add(&dot_ops(&p, &diff(&beta_sum, &gamma_sum)).scale_real(&half()));
    let minimal_form = base.add(&dot_ops(&qdot, &summed(&xo, &scaled(&a_ell[0], &half()))).scale_real(&m));
    let regrouping = Regrouping {
        half_a_q: half_form == generator,
        full_a_q: full_form == generator,
        minimal: minimal_form == generator,
        literal: literal == generator,
    };

    let frame = frame_hamiltonian(spec, w, q_flow)?;
    Ok(Hamiltonian { generator, literal, frame: Some(frame), regrouping: Some(regrouping) })
}

/// Frame Hamiltonian with the c-number `a_q = solve_aq(q_flow)`.
pub fn frame_hamiltonian(
    spec: &CocycleSpec,
    w: &InternalEnergy,
    q_flow: &Vec3Poly,
) -> Result<FrameHamiltonian, QrepError> {
    if !spec.is_embeddable() {
        return Err(CocycleError::NotEmbeddable.into());
    }
    if !spec.is_canonical() {
        return Err(QrepError::NotCanonical);
    }
    let n = q_flow.max_degree();
    let m = spec.mass();
    let inv_m = m.recip();
    let aq = solve_aq(spec, q_flow)?;
    let qdot = q_flow.derivative();
    let p = momentum(spec, n);
    let xo = position(spec, n);

    let mut beta_sum = Vec3Poly::zero(n);
    let mut beta_sum_up = Vec3Poly::zero(n);
    let mut gamma_sum = Vec3Poly::zero(n);
    for k in 1..spec.beta.len() {
        beta_sum = beta_sum.add(&aq.derivative_n(k).scale(&(spec.beta(k) * &inv_m)));
        beta_sum_up = beta_sum_up.add(&aq.derivative_n(k + 1).scale(&(spec.beta(k) * &inv_m)));
    }
    for k in 2..spec.gamma.len() {
        gamma_sum = gamma_sum.add(&aq.derivative_n(k).scale(&spec.gamma(k)));
    }
    let drift_velocity = beta_sum_up.sub(&gamma_sum);
    let fict = qdot.dot(&aq.add(&beta_sum)).scale(&(&m * half()));

    Ok(FrameHamiltonian {
        kinetic: dot_ops(&p, &p).scale_real(&(half() / &m)),
        internal: internal_energy(w, n),
        inertial: dot_ops(&c_vec(&qdot), &xo).scale_real(&m),
        fictitious_potential: real_op(&fict),
        drift: dot_ops(&p, &c_vec(&drift_velocity)).scale_real(&half()),
        drift_velocity,
    })
}
