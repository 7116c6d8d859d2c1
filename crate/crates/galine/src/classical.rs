//! Classical counterpart: the generating function `F = (x + B(a))·p′ + g(x; a, ȧ, …)`.
//!
//! `x′ = x + B(a)`, `p = p′ + ∇ₓg`, and `H′ = H(x, p) + Ḃ·p′ + ∂ₜg`. For a free
//! particle Hamilton's equations in the primed variables give `ẍ′ = B̈(a)` for
//! every `g` and every mass.

use std::io::Write;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::CocycleSpec;
use crate::exec;
use crate::timealg::{Coeff, Scalar, TimePoly, Vec3Poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("dt must be positive and below the horizon, got {0}")]
    BadStep(f64),
    #[error("state left the finite range at t = {t}")]
    Blowup { t: f64 },
    #[error("mass must be nonzero")]
    ZeroMass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: [f64; 3],
    pub p: [f64; 3],
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: [f64; 3], p: [f64; 3], t: f64) -> Self {
        PhaseState { x, p, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.p).all(|v| v.is_finite() && v.abs() < 1e12) && self.t.is_finite()
    }
}

/// The `g` part of the generating function.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GFunction {
    /// `g = x·C(a)`.
    #[default]
    LinearC,
    /// `g = 0`.
    Zero,
    /// `g = x·C(a) + ½κ|x|²|C(a)|²`.
    QuadraticC { kappa: f64 },
}

type V3 = [f64; 3];

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: V3, k: f64) -> V3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Spec, frame translation and `g`, with `B(a)`, `C(a)` and their time
/// derivatives cached in floating point.
#[derive(Debug, Clone)]
pub struct GeneratingSpec {
    pub spec: CocycleSpec,
    pub frame: Vec3Poly,
    pub g: GFunction,
    b: [Vec3Poly<f64>; 3],
    c: [Vec3Poly<f64>; 2],
}

fn at(v: &Vec3Poly<f64>, t: f64) -> V3 {
    v.evaluate(&t)
}

impl GeneratingSpec {
    pub fn new(spec: CocycleSpec, frame: Vec3Poly, g: GFunction) -> Self {
        let b = spec.eval_b(&frame);
        let c = spec.eval_c(&frame);
        let bf = [b.to_f64(), b.derivative().to_f64(), b.derivative_n(2).to_f64()];
        let cf = [c.to_f64(), c.derivative().to_f64()];
        GeneratingSpec { spec, frame, g, b: bf, c: cf }
    }

    pub fn b_at(&self, t: f64) -> V3 {
        at(&self.b[0], t)
    }

    pub fn b_dot(&self, t: f64) -> V3 {
        at(&self.b[1], t)
    }

    /// `B̈(a)(t)`, the predicted `ẍ′`.
    pub fn b_ddot(&self, t: f64) -> V3 {
        at(&self.b[2], t)
    }

    fn g_value(&self, x: V3, t: f64) -> f64 {
        let c = at(&self.c[0], t);
        match self.g {
            GFunction::Zero => 0.0,
            GFunction::LinearC => dot(x, c),
            GFunction::QuadraticC { kappa } => dot(x, c) + 0.5 * kappa * dot(x, x) * dot(c, c),
        }
    }

    /// `∇ₓg`.
    pub fn grad_g(&self, x: V3, t: f64) -> V3 {
        let c = at(&self.c[0], t);
        match self.g {
            GFunction::Zero => [0.0; 3],
            GFunction::LinearC => c,
            GFunction::QuadraticC { kappa } => add(c, scale(x, kappa * dot(c, c))),
        }
    }

    /// `∂ₓᵢ∂ₓⱼg`; a multiple of the identity for every supported `g`.
    fn hess_g(&self, t: f64) -> f64 {
        match self.g {
            GFunction::QuadraticC { kappa } => {
                let c = at(&self.c[0], t);
                kappa * dot(c, c)
            }
            _ => 0.0,
        }
    }

    /// `∂ₜg` at fixed `x`, i.e. `Σ a⁽ⁿ⁺¹⁾·∇_{zₙ}g`.
    fn dt_g(&self, x: V3, t: f64) -> f64 {
        let (c, cd) = (at(&self.c[0], t), at(&self.c[1], t));
        match self.g {
            GFunction::Zero => 0.0,
            GFunction::LinearC => dot(x, cd),
            GFunction::QuadraticC { kappa } => dot(x, cd) + kappa * dot(x, x) * dot(c, cd),
        }
    }

    /// `∂ₜ∇ₓg`.
    fn dt_grad_g(&self, x: V3, t: f64) -> V3 {
        let (c, cd) = (at(&self.c[0], t), at(&self.c[1], t));
        match self.g {
            GFunction::Zero => [0.0; 3],
            GFunction::LinearC => cd,
            GFunction::QuadraticC { kappa } => add(cd, scale(x, 2.0 * kappa * dot(c, cd))),
        }
    }

    /// `F(x, p′, t) = (x + B(a))·p′ + g`.
    pub fn generating_function(&self, x: V3, p_prime: V3, t: f64) -> f64 {
        dot(add(x, self.b_at(t)), p_prime) + self.g_value(x, t)
    }

    /// `∂F/∂t = Ḃ·p′ + ∂ₜg`.
    pub fn dt_f(&self, x: V3, p_prime: V3, t: f64) -> f64 {
        dot(self.b_dot(t), p_prime) + self.dt_g(x, t)
    }

    /// Primed initial state with `x′ = x0` and `ẋ′ = v0`.
    pub fn state_with_velocity(&self, x0: V3, v0: V3, mass: f64, t: f64) -> PhaseState {
        let x = sub(x0, self.b_at(t));
        let p = sub(scale(sub(v0, self.b_dot(t)), mass), self.grad_g(x, t));
        PhaseState::new(x0, p, t)
    }
}

/// `(x, p) ↦ (x + B(a), p − ∇ₓg)` at `s.t`.
pub fn canonical_transform(gs: &GeneratingSpec, s: &PhaseState) -> PhaseState {
    PhaseState::new(add(s.x, gs.b_at(s.t)), sub(s.p, gs.grad_g(s.x, s.t)), s.t)
}

/// `(x′, p′) ↦ (x′ − B(a), p′ + ∇ₓg)`.
pub fn inverse_transform(gs: &GeneratingSpec, s: &PhaseState) -> PhaseState {
    let x = sub(s.x, gs.b_at(s.t));
    PhaseState::new(x, add(s.p, gs.grad_g(x, s.t)), s.t)
}

/// `H′(x′,p′) = H(x′ − B, p′ + ∇ₓg) + Ḃ·p′ + ∂ₜg` for a base Hamiltonian `H`.
pub fn transformed_hamiltonian_with(gs: &GeneratingSpec, s: &PhaseState, base: impl Fn(V3, V3) -> f64) -> f64 {
    let old = inverse_transform(gs, s);
    base(old.x, old.p) + gs.dt_f(old.x, s.p, s.t)
}

/// [`transformed_hamiltonian_with`] for `H = p²/2m`.
pub fn transformed_hamiltonian(gs: &GeneratingSpec, s: &PhaseState, mass: f64) -> f64 {
    transformed_hamiltonian_with(gs, s, |_, p| dot(p, p) / (2.0 * mass))
}

/// `(ẋ′, ṗ′)` from Hamilton's equations of the free-particle `H′`.
fn hamilton_rhs(gs: &GeneratingSpec, s: &PhaseState, mass: f64) -> (V3, V3) {
    let x = sub(s.x, gs.b_at(s.t));
    let kin = scale(add(s.p, gs.grad_g(x, s.t)), 1.0 / mass);
    let xdot = add(kin, gs.b_dot(s.t));
    let pdot = sub(scale(kin, -gs.hess_g(s.t)), gs.dt_grad_g(x, s.t));
    (xdot, pdot)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub mass: f64,
    pub dt: f64,
    pub states: Vec<PhaseState>,
    /// `ẋ′ = ∂H′/∂p′` on each sample.
    pub velocity: Vec<V3>,
    /// Fourth-order central difference of `velocity`; `None` on the two samples at each end.
    pub accel_est: Vec<Option<V3>>,
    pub b_ddot: Vec<V3>,
}

impl Trajectory {
    /// `max |ẍ′_est − B̈(a)|` over interior samples.
    pub fn max_accel_defect(&self) -> f64 {
        self.accel_est
            .iter()
            .zip(&self.b_ddot)
            .filter_map(|(a, b)| a.map(|a| sub(a, *b).iter().fold(0.0f64, |m, v| m.max(v.abs()))))
            .fold(0.0, f64::max)
    }
}

/// RK4 over `[s0.t, s0.t + horizon]` for the free particle of mass `mass`.
pub fn integrate_hamilton(
    gs: &GeneratingSpec,
    s0: &PhaseState,
    mass: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, ClassicalError> {
    if mass == 0.0 {
        return Err(ClassicalError::ZeroMass);
    }
    if !(dt > 0.0) || dt > horizon {
        return Err(ClassicalError::BadStep(dt));
    }
    let steps = (horizon / dt).round() as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = *s0;
    states.push(s);
    let shifted = |s: &PhaseState, k: (V3, V3), h: f64| {
        PhaseState::new(add(s.x, scale(k.0, h)), add(s.p, scale(k.1, h)), s.t + h)
    };
    for i in 1..=steps {
        let k1 = hamilton_rhs(gs, &s, mass);
        let k2 = hamilton_rhs(gs, &shifted(&s, k1, dt / 2.0), mass);
        let k3 = hamilton_rhs(gs, &shifted(&s, k2, dt / 2.0), mass);
        let k4 = hamilton_rhs(gs, &shifted(&s, k3, dt), mass);
        let mut next = s;
        for j in 0..3 {
            next.x[j] += dt / 6.0 * (k1.0[j] + 2.0 * k2.0[j] + 2.0 * k3.0[j] + k4.0[j]);
            next.p[j] += dt / 6.0 * (k1.1[j] + 2.0 * k2.1[j] + 2.0 * k3.1[j] + k4.1[j]);
        }
        next.t = s0.t + i as f64 * dt;
        if !next.is_finite() {
            return Err(ClassicalError::Blowup { t: next.t });
        }
        s = next;
        states.push(s);
    }
    let velocity: Vec<V3> = states.iter().map(|s| hamilton_rhs(gs, s, mass).0).collect();
    let n = states.len();
    let accel_est = (0..n)
        .map(|i| {
            (i >= 2 && i + 2 < n).then(|| {
                std::array::from_fn(|j| {
                    (velocity[i - 2][j] - 8.0 * velocity[i - 1][j] + 8.0 * velocity[i + 1][j] - velocity[i + 2][j])
                        / (12.0 * dt)
                })
            })
        })
        .collect();
    let b_ddot = states.iter().map(|s| gs.b_ddot(s.t)).collect();
    Ok(Trajectory { mass, dt, states, velocity, accel_est, b_ddot })
}

/// Independent integrations over masses, parallel when enabled.
pub fn mass_sweep(
    gs: &GeneratingSpec,
    x0: V3,
    v0: V3,
    masses: &[f64],
    horizon: f64,
    dt: f64,
) -> Vec<Result<Trajectory, ClassicalError>> {
    exec::map(masses, |&m| {
        let s0 = gs.state_with_velocity(x0, v0, m, 0.0);
        integrate_hamilton(gs, &s0, m, horizon, dt)
    })
}

/// `Aᵢ = c_x(t) xᵢ + c_p(t) pᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGenerator {
    pub cx: TimePoly,
    pub cp: TimePoly,
}

/// `A⁽ⁿ⁾ = x Σₖ γₖ t^{n−k}/(n−k)! + p Σₖ βₖ t^{n−k}/(n−k)!`.
pub fn generator_a(spec: &CocycleSpec, n: usize, max_degree: usize) -> LinearGenerator {
    let budget = max_degree.max(n);
    let mut cx = TimePoly::zero(budget);
    let mut cp = TimePoly::zero(budget);
    for k in 0..=n {
        let fact: i64 = (1..=(n - k) as i64).product();
        let unit = TimePoly::power(n - k, Scalar::new(1.into(), fact.into()), budget).expect("fits");
        cx = cx + unit.scale(&spec.gamma(k));
        cp = cp + unit.scale(&spec.beta(k));
    }
    LinearGenerator { cx, cp }
}

/// `{Aᵢ, Bⱼ} = δᵢⱼ (a_x b_p − a_p b_x)`.
pub fn poisson(a: &LinearGenerator, i: usize, b: &LinearGenerator, j: usize) -> TimePoly {
    if i != j {
        return TimePoly::zero(a.cx.max_degree());
    }
    &a.cx * &b.cp - &a.cp * &b.cx
}

/// The bracket as a number when it is constant in `t`.
pub fn poisson_constant(a: &LinearGenerator, b: &LinearGenerator) -> Option<Scalar> {
    let p = poisson(a, 0, b, 0);
    match p.degree() {
        None => Some(Scalar::zero()),
        Some(0) => Some(p.coeff(0)),
        _ => None,
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `t, x_prime, p_prime, x_prime_accel, b_ddot` for the x component.
pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "x_prime", "p_prime", "x_prime_accel", "b_ddot"])?;
    for (i, s) in traj.states.iter().enumerate() {
        let acc = traj.accel_est[i].map(|a| num(a[0])).unwrap_or_default();
        w.write_record([num(s.t), num(s.x[0]), num(s.p[0]), acc, num(traj.b_ddot[i][0])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn mass_of(spec: &CocycleSpec) -> f64 {
    spec.mass().to_f64()
}
