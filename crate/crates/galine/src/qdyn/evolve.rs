//! Crank–Nicolson evolution under the frame Hamiltonian.
//!
//! `i∂_bψ = Ĥ(t0 + b)ψ` with `Ĥ` the c-number-`a_q` frame Hamiltonian,
//! discretized with fourth-order central differences. The discrete `Ĥ` is
//! Hermitian, so each step `(1 + iΔĤ/2)ψ' = (1 − iΔĤ/2)ψ` is unitary up to
//! rounding. The pentadiagonal system is solved by banded LU without pivoting,
//! which is stable here because the Hermitian part of the matrix is the identity.

use std::io::Write;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use super::{apply_operator, mass_f64, Grid1D, PacketSpec, QdynError, Representation, WavepacketState};
use crate::cocycle::{CocycleSpec, InternalEnergy};
use crate::exec;
use crate::qrep::{self, CanonicalOperator};
use crate::timealg::{rat, Scalar, TimePoly, Vec3Poly};

/// A frame with translation `a(t)` along x and the label flow `q(t) = ȧ − ȧ(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScenario {
    pub rep: Representation,
    pub frame: TimePoly,
    pub q_flow: TimePoly,
    pub grid: Grid1D,
    pub packet: PacketSpec,
    pub horizon: f64,
    pub dt: f64,
    pub t0: f64,
    pub norm_tol: f64,
}

impl FrameScenario {
    pub fn new(spec: CocycleSpec, w: InternalEnergy, frame: TimePoly) -> Self {
        let v = frame.derivative();
        let q_flow = &v - &TimePoly::constant(v.coeff(0), v.max_degree());
        FrameScenario {
            rep: Representation::new(spec, w),
            frame,
            q_flow,
            grid: Grid1D { q_min: -8.0, q_max: 8.0, n_points: 1024 },
            packet: PacketSpec::default(),
            horizon: 1.0,
            dt: 1e-3,
            t0: 0.0,
            norm_tol: 1e-8,
        }
    }

    /// `a(t) = ½g₀t²`.
    pub fn constant_acceleration(spec: CocycleSpec, w: InternalEnergy, g0: Scalar, max_degree: usize) -> Self {
        let frame = TimePoly::power(2, g0 * rat(1, 2), max_degree.max(2)).expect("degree two fits");
        Self::new(spec, w, frame)
    }

    pub fn inertial(spec: CocycleSpec, w: InternalEnergy, max_degree: usize) -> Self {
        Self::new(spec, w, TimePoly::zero(max_degree))
    }

    pub fn with_spec(&self, spec: CocycleSpec) -> Self {
        let mut s = self.clone();
        s.rep.spec = spec;
        s
    }

    pub fn mass(&self) -> f64 {
        mass_f64(&self.rep.spec)
    }

    fn hamiltonian(&self, spec: &CocycleSpec) -> Result<CanonicalOperator, QdynError> {
        let flow = Vec3Poly::along_x(self.q_flow.clone());
        Ok(qrep::frame_hamiltonian(spec, &self.rep.w, &flow)?.total().x_part())
    }

    /// The spec `β = (m)`, `γ = (0, 1)` with the same mass.
    pub fn reference_spec(&self) -> CocycleSpec {
        CocycleSpec::minimal(self.rep.spec.mass())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EvolutionSeries {
    pub mass: f64,
    pub dt: f64,
    pub b: Vec<f64>,
    /// `‖ψ(b)‖ / ‖ψ(0)‖`.
    pub norm: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `arg⟨ψ_ref(b)|ψ(b)⟩` against the minimal spec of the same mass.
    pub global_phase: Vec<f64>,
}

impl EvolutionSeries {
    pub fn accel(&self) -> Result<Vec<f64>, QdynError> {
        accel_of_expectation(&self.x, self.dt)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Three-point second differences on interior samples; the two endpoints are dropped.
pub fn accel_of_expectation(series: &[f64], db: f64) -> Result<Vec<f64>, QdynError> {
    if series.len() < 5 {
        return Err(QdynError::InsufficientSamples { need: 5, got: series.len() });
    }
    Ok(series.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (db * db)).collect())
}

const STENCIL_D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const STENCIL_D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// Pentadiagonal rows: `rows[j][k]` is the entry in column `j + k − 2`.
fn discretize(op: &CanonicalOperator, grid: &Grid1D, t: f64) -> Result<Vec<[Complex64; 5]>, QdynError> {
    let h = grid.spacing();
    let pts = grid.points();
    let mut rows = vec![[Complex64::zero(); 5]; grid.n_points];
    for (m, c) in op.coefficients_at(t) {
        if m.q[1] + m.q[2] + m.d[1] + m.d[2] > 0 || m.d[0] > 2 {
            return Err(QdynError::UnsupportedOperator(m.to_string()));
        }
        for (j, row) in rows.iter_mut().enumerate() {
            let cx = c * pts[j].powi(m.q[0] as i32);
            match m.d[0] {
                0 => row[2] += cx,
                1 => (0..5).for_each(|k| row[k] += cx * STENCIL_D1[k] / (12.0 * h)),
                _ => (0..5).for_each(|k| row[k] += cx * STENCIL_D2[k] / (12.0 * h * h)),
            }
        }
    }
    Ok(rows)
}

fn banded_solve(mut a: Vec<[Complex64; 5]>, mut rhs: Vec<Complex64>) -> Vec<Complex64> {
    let n = rhs.len();
    for j in 0..n {
        let pivot = a[j][2];
        for i in (j + 1)..(j + 3).min(n) {
            let f = a[i][j + 2 - i] / pivot;
            if f == Complex64::zero() {
                continue;
            }
            for c in j..(j + 3).min(n) {
                let v = a[j][c + 2 - j];
                a[i][c + 2 - i] -= f * v;
            }
            let r = rhs[j];
            rhs[i] -= f * r;
        }
    }
    for j in (0..n).rev() {
        let mut s = rhs[j];
        for c in (j + 1)..(j + 3).min(n) {
            s -= a[j][c + 2 - j] * rhs[c];
        }
        rhs[j] = s / a[j][2];
    }
    rhs
}

fn cn_step(op: &CanonicalOperator, psi: &mut WavepacketState, t_mid: f64, dt: f64) -> Result<(), QdynError> {
    let h = discretize(op, &psi.grid, t_mid)?;
    let n = psi.amp.len();
    let half = Complex64::new(0.0, 0.5 * dt);
    let mut rhs = vec![Complex64::zero(); n];
    for j in 0..n {
        let mut s = psi.amp[j];
        for k in 0..5 {
            let c = j as isize + k as isize - 2;
            if c >= 0 && (c as usize) < n {
                s -= half * h[j][k] * psi.amp[c as usize];
            }
        }
        rhs[j] = s;
    }
    let lhs: Vec<[Complex64; 5]> = h
        .iter()
        .map(|row| {
            let mut r = [Complex64::zero(); 5];
            for k in 0..5 {
                r[k] = half * row[k];
            }
            r[2] += Complex64::new(1.0, 0.0);
            r
        })
        .collect();
    psi.amp = banded_solve(lhs, rhs);
    Ok(())
}

fn expectation(op: &CanonicalOperator, psi: &WavepacketState, norm2: f64) -> Result<f64, QdynError> {
    let a = apply_operator(op, psi, psi.t0)?;
    let s: Complex64 = psi.amp.iter().zip(&a).map(|(p, q)| p.conj() * q).sum();
    Ok(s.re * psi.grid.spacing() / norm2)
}

fn run(scenario: &FrameScenario, dt: f64) -> Result<EvolutionSeries, QdynError> {
    let spec = &scenario.rep.spec;
    let m = scenario.mass();
    let h = scenario.hamiltonian(spec)?;
    let h_ref = scenario.hamiltonian(&scenario.reference_spec())?;
    let n = scenario.q_flow.max_degree();
    let [x_op, _, _] = qrep::position(spec, n);
    let [p_op, _, _] = qrep::momentum(spec, n);

    let mut psi = WavepacketState::gaussian(scenario.grid, &scenario.packet, m, scenario.t0);
    psi.check_support()?;
    let mut psi_ref = psi.clone();
    let norm0 = psi.norm();
    let steps = (scenario.horizon / dt).round() as usize;
    let mut series = EvolutionSeries { mass: m, dt, ..Default::default() };
    for step in 0..=steps {
        let b = step as f64 * dt;
        if step > 0 {
            let t_mid = scenario.t0 + b - 0.5 * dt;
            cn_step(&h, &mut psi, t_mid, dt)?;
            cn_step(&h_ref, &mut psi_ref, t_mid, dt)?;
            psi.t0 = scenario.t0 + b;
            psi_ref.t0 = psi.t0;
            psi.check_support()?;
        }
        let nrm = psi.norm();
        series.b.push(b);
        series.norm.push(nrm / norm0);
        series.x.push(expectation(&x_op, &psi, nrm * nrm)?);
        series.p.push(expectation(&p_op, &psi, nrm * nrm)?);
        series.global_phase.push(psi_ref.inner(&psi).arg());
    }
    Ok(series)
}

/// Evolves the scenario's packet over `[0, horizon]`, halving `dt` while the
/// norm drifts beyond `norm_tol`.
pub fn evolve(scenario: &FrameScenario) -> Result<EvolutionSeries, QdynError> {
    let mut dt = scenario.dt;
    let mut last = 0.0;
    for _ in 0..6 {
        let series = run(scenario, dt)?;
        last = series.max_norm_drift();
        if last <= scenario.norm_tol {
            return Ok(series);
        }
        log::warn!("norm drift {last:e} at dt = {dt:e}; halving");
        dt /= 2.0;
    }
    Err(QdynError::NormDrift { drift: last, tol: scenario.norm_tol, dt: dt * 2.0 })
}

/// Independent runs, parallel across scenarios when enabled.
pub fn sweep(scenarios: &[FrameScenario]) -> Vec<Result<EvolutionSeries, QdynError>> {
    exec::map(scenarios, evolve)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns `b, re_norm, x_mean, p_mean, x_accel, global_phase`; `x_accel` is
/// empty at the two endpoints.
pub fn write_csv<W: Write>(series: &EvolutionSeries, out: W) -> Result<(), csv::Error> {
    let accel = series.accel().unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["b", "re_norm", "x_mean", "p_mean", "x_accel", "global_phase"])?;
    for i in 0..series.b.len() {
        let a = if i >= 1 && i <= accel.len() { num(accel[i - 1]) } else { String::new() };
        w.write_record([
            num(series.b[i]),
            num(series.norm[i]),
            num(series.x[i]),
            num(series.p[i]),
            a,
            num(series.global_phase[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}
