//! One-dimensional numeric realization on a velocity grid.
//!
//! Labels are the constant functions `q(t) = x` for grid values `x`; every
//! time function is evaluated at the state's `t0`. Under these conventions
//!
//! ```text
//! (U(g)ψ)(x) = exp(−i ξ(g⁻¹; x)|_{t0}) ψ(x − C(a)|_{t0})
//! ```
//!
//! and for `b = 0` pairs `U(g₂)U(g₁) = e^{iω(g₂,g₁)|_{t0}} U(g₂g₁)`.

mod evolve;

pub use evolve::{accel_of_expectation, evolve, sweep, write_csv, EvolutionSeries, FrameScenario};

use num_complex::Complex64;
use num_traits::Zero;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::{omega, CocycleError, CocycleSpec, InternalEnergy};
use crate::exec;
use crate::group::{compose, inverse, GroupElement};
use crate::qrep::{self, CanonicalOperator, QrepError};
use crate::timealg::{int, rat, Coeff, Scalar, TimePoly, Vec3Poly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdynError {
    #[error(transparent)]
    Qrep(#[from] QrepError),
    #[error("packet leaves the grid: {0}")]
    SupportEscape(String),
    #[error("norm drift {drift:e} exceeds {tol:e} even at dt = {dt:e}")]
    NormDrift { drift: f64, tol: f64, dt: f64 },
    #[error("only the x component is simulated; y and z must vanish")]
    NotOneDimensional,
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("operator term {0} has no grid discretization")]
    UnsupportedOperator(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
}

impl From<CocycleError> for QdynError {
    fn from(e: CocycleError) -> Self {
        QdynError::Qrep(e.into())
    }
}

/// Uniform grid `q_min + jΔq`, `j = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid1D {
    pub q_min: f64,
    pub q_max: f64,
    pub n_points: usize,
}

impl Default for Grid1D {
    fn default() -> Self {
        Grid1D { q_min: -8.0, q_max: 8.0, n_points: 512 }
    }
}

impl Grid1D {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self, QdynError> {
        let g = Grid1D { q_min, q_max, n_points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), QdynError> {
        if self.n_points < 8 || !(self.q_max > self.q_min) || !self.q_min.is_finite() || !self.q_max.is_finite() {
            return Err(QdynError::BadGrid(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }
}

/// How `ψ(x − s)` is sampled off the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMethod {
    /// Band-limited shift through the FFT; exactly norm preserving.
    #[default]
    Spectral,
    /// Four-point Lagrange interpolation, zero outside the grid.
    Cubic,
}

/// Gaussian packet parameters: velocity centre, velocity width, position centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub q0: f64,
    pub sigma: f64,
    #[serde(default)]
    pub x0: f64,
}

impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec { q0: 1.0, sigma: 0.5, x0: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    pub grid: Grid1D,
    pub amp: Vec<Complex64>,
    pub t0: f64,
}

impl WavepacketState {
    pub fn new(grid: Grid1D, amp: Vec<Complex64>, t0: f64) -> Self {
        assert_eq!(amp.len(), grid.n_points, "amplitude count must match the grid");
        WavepacketState { grid, amp, t0 }
    }

    /// Normalized Gaussian; `⟨X̂⟩ = x0` for `X̂ = (i/m)∂_q`.
    pub fn gaussian(grid: Grid1D, packet: &PacketSpec, mass: f64, t0: f64) -> Self {
        let k = -mass * packet.x0;
        let amp = grid
            .points()
            .into_iter()
            .map(|q| {
                let env = (-(q - packet.q0).powi(2) / (4.0 * packet.sigma * packet.sigma)).exp();
                Complex64::from_polar(env, k * q)
            })
            .collect();
        let mut s = WavepacketState::new(grid, amp, t0);
        let n = s.norm();
        s.amp.iter_mut().for_each(|a| *a /= n);
        s
    }

    /// `‖ψ‖ = (Σ|ψⱼ|²Δq)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    /// `Σ conj(φⱼ)ψⱼ Δq`.
    pub fn inner(&self, other: &WavepacketState) -> Complex64 {
        let s: Complex64 = self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.spacing()
    }

    /// Mean and standard deviation of `|ψ|²` over the grid.
    pub fn moments(&self) -> (f64, f64) {
        let w: Vec<f64> = self.amp.iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let pts = self.grid.points();
        let mean = w.iter().zip(&pts).map(|(w, q)| w * q).sum::<f64>() / total;
        let var = w.iter().zip(&pts).map(|(w, q)| w * (q - mean).powi(2)).sum::<f64>() / total;
        (mean, var.sqrt())
    }

    /// Fails if the mean ± 5σ of `|ψ|²` reaches outside the grid.
    pub fn check_support(&self) -> Result<(), QdynError> {
        let (mean, sd) = self.moments();
        let (lo, hi) = (mean - 5.0 * sd, mean + 5.0 * sd);
        if !mean.is_finite() || lo < self.grid.q_min || hi > self.grid.q_max {
            return Err(QdynError::SupportEscape(format!(
                "mean {mean:.6} ± 5σ = [{lo:.6}, {hi:.6}] vs grid [{}, {}]",
                self.grid.q_min, self.grid.q_max
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &WavepacketState) -> f64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Symbolic data needed to act on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub spec: CocycleSpec,
    pub w: InternalEnergy,
    pub shift: ShiftMethod,
}

impl Representation {
    pub fn new(spec: CocycleSpec, w: InternalEnergy) -> Self {
        Representation { spec, w, shift: ShiftMethod::default() }
    }
}

fn one_dimensional(a: &Vec3Poly) -> Result<&TimePoly, QdynError> {
    if !a.y.is_zero() || !a.z.is_zero() {
        return Err(QdynError::NotOneDimensional);
    }
    Ok(&a.x)
}

/// Exact `ξ(h; x)` as `c₀ + c₁x + c₂x²` with time-polynomial coefficients.
fn phase_quadratic(rep: &Representation, h: &GroupElement) -> Result<[TimePoly; 3], QdynError> {
    let n = h.max_degree();
    let at = |x: i64| qrep::xi(&rep.spec, &rep.w, h, &Vec3Poly::along_x(TimePoly::constant(int(x), n)));
    let (f0, f1, f2) = (at(0)?, at(1)?, at(2)?);
    let c2 = (&f2 - &f1.scale(&int(2)) + f0.clone()).scale(&rat(1, 2));
    let c1 = &f1 - &f0 - c2.clone();
    Ok([f0, c1, c2])
}

/// `ψ(x − s)` on the grid.
pub fn shift_samples(grid: &Grid1D, amp: &[Complex64], s: f64, method: ShiftMethod) -> Vec<Complex64> {
    if s == 0.0 {
        return amp.to_vec();
    }
    let n = amp.len();
    let h = grid.spacing();
    match method {
        ShiftMethod::Spectral => {
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let mut buf = amp.to_vec();
            fwd.process(&mut buf);
            let period = n as f64 * h;
            for (j, c) in buf.iter_mut().enumerate() {
                let freq = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = 2.0 * std::f64::consts::PI * freq / period;
                *c *= Complex64::from_polar(1.0 / n as f64, -k * s);
            }
            inv.process(&mut buf);
            buf
        }
        ShiftMethod::Cubic => {
            let sample = |i: isize| -> Complex64 {
                if i < 0 || i as usize >= n {
                    Complex64::zero()
                } else {
                    amp[i as usize]
                }
            };
            (0..n)
                .map(|j| {
                    let pos = j as f64 - s / h;
                    let i = pos.floor() as isize;
                    let u = pos - i as f64;
                    let w = [
                        -u * (u - 1.0) * (u - 2.0) / 6.0,
                        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
                        -(u + 1.0) * u * (u - 2.0) / 2.0,
                        (u + 1.0) * u * (u - 1.0) / 6.0,
                    ];
                    (0..4).map(|k| sample(i - 1 + k as isize) * w[k]).sum()
                })
                .collect()
        }
    }
}

/// `(U(g)ψ)(x) = exp(−iξ(g⁻¹;x)|_{t0}) ψ(x − C(a)|_{t0})`.
pub fn apply_u(rep: &Representation, g: &GroupElement, psi: &WavepacketState) -> Result<WavepacketState, QdynError> {
    one_dimensional(g.a())?;
    let c = phase_quadratic(rep, &inverse(g))?.map(|p| p.eval_f64(psi.t0));
    let shift = rep.spec.eval_c(g.a()).x.eval_f64(psi.t0);
    let mut amp = shift_samples(&psi.grid, &psi.amp, shift, rep.shift);
    let pts = psi.grid.points();
    exec::for_each_mut(&mut amp, |j, a| {
        let x = pts[j];
        *a *= Complex64::from_polar(1.0, -(c[0] + c[1] * x + c[2] * x * x));
    });
    let out = WavepacketState::new(psi.grid, amp, psi.t0);
    out.check_support()?;
    Ok(out)
}

/// `max |U(g₂)U(g₁)ψ − e^{iω(g₂,g₁)|_{t0}} U(g₂g₁)ψ|`.
pub fn composition_check(
    rep: &Representation,
    g2: &GroupElement,
    g1: &GroupElement,
    psi: &WavepacketState,
) -> Result<f64, QdynError> {
    let lhs = apply_u(rep, g2, &apply_u(rep, g1, psi)?)?;
    let g21 = compose(g2, g1).map_err(CocycleError::from)?;
    let mut rhs = apply_u(rep, &g21, psi)?;
    let w = omega(&rep.spec, g2, g1).eval_f64(psi.t0);
    let phase = Complex64::from_polar(1.0, w);
    rhs.amp.iter_mut().for_each(|a| *a *= phase);
    Ok(lhs.max_abs_diff(&rhs))
}

/// Fourth-order central `∂_q` with zero samples outside the grid.
pub fn fd_derivative(grid: &Grid1D, f: &[Complex64]) -> Vec<Complex64> {
    let h = grid.spacing();
    let n = f.len();
    let at = |i: isize| if i < 0 || i as usize >= n { Complex64::zero() } else { f[i as usize] };
    (0..n as isize).map(|j| (at(j - 2) - at(j - 1) * 8.0 + at(j + 1) * 8.0 - at(j + 2)) / (12.0 * h)).collect()
}

/// Fourth-order central `∂²_q` with zero samples outside the grid.
pub fn fd_second_derivative(grid: &Grid1D, f: &[Complex64]) -> Vec<Complex64> {
    let h = grid.spacing();
    let n = f.len();
    let at = |i: isize| if i < 0 || i as usize >= n { Complex64::zero() } else { f[i as usize] };
    (0..n as isize)
        .map(|j| (-at(j - 2) + at(j - 1) * 16.0 - at(j) * 30.0 + at(j + 1) * 16.0 - at(j + 2)) / (12.0 * h * h))
        .collect()
}

/// Applies a symbolic operator in `q_x`, `D_x` with coefficients at time `t`.
pub fn apply_operator(op: &CanonicalOperator, psi: &WavepacketState, t: f64) -> Result<Vec<Complex64>, QdynError> {
    let pts = psi.grid.points();
    let d1 = fd_derivative(&psi.grid, &psi.amp);
    let d2 = fd_second_derivative(&psi.grid, &psi.amp);
    let mut out = vec![Complex64::zero(); psi.amp.len()];
    for (m, c) in op.coefficients_at(t) {
        if m.q[1] + m.q[2] + m.d[1] + m.d[2] > 0 || m.d[0] > 2 {
            return Err(QdynError::UnsupportedOperator(m.to_string()));
        }
        let base = match m.d[0] {
            0 => &psi.amp,
            1 => &d1,
            _ => &d2,
        };
        for (j, o) in out.iter_mut().enumerate() {
            *o += c * pts[j].powi(m.q[0] as i32) * base[j];
        }
    }
    Ok(out)
}

/// Which generator a finite-difference check targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    H,
    P,
    K(usize),
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Generator::H => write!(f, "H"),
            Generator::P => write!(f, "P"),
            Generator::K(n) => write!(f, "K({n})"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorDefect {
    pub which: String,
    pub eps: f64,
    pub max_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Richardson {
    pub which: String,
    pub coarse: GeneratorDefect,
    pub fine: GeneratorDefect,
    /// `coarse / fine`; 4 for second-order convergence.
    pub ratio: f64,
}

impl Richardson {
    pub fn converges(&self, rel_tol: f64) -> bool {
        (self.ratio - 4.0).abs() <= 4.0 * rel_tol
    }
}

fn one_parameter(which: Generator, eps: &Scalar, n: usize) -> GroupElement {
    match which {
        Generator::H => GroupElement::time_translation(eps.clone(), n),
        Generator::P => GroupElement::translation(Vec3Poly::along_x(TimePoly::constant(eps.clone(), n))),
        Generator::K(k) => {
            let fact: i64 = (1..=k as i64).product();
            let p = TimePoly::power(k, eps / Scalar::from_integer(fact.into()), n.max(k)).expect("fits");
            GroupElement::translation(Vec3Poly::along_x(p))
        }
    }
}

/// The symbolic operator a finite-difference check compares against.
pub fn symbolic_generator(rep: &Representation, which: Generator, n: usize) -> Result<CanonicalOperator, QdynError> {
    Ok(match which {
        Generator::H => qrep::hamiltonian(&rep.spec, &rep.w, &Vec3Poly::zero(n))?.generator.x_part(),
        Generator::P => {
            let [p, _, _] = qrep::momentum(&rep.spec, n);
            p
        }
        Generator::K(k) => {
            let [b, _, _] = qrep::boost(&rep.spec, k, n);
            b
        }
    })
}

/// `max |[U(ε)ψ − U(−ε)ψ]/(2iε) − Âψ|` (`−2iε` for `Ĥ`, which is `i∂_b U`).
pub fn generator_check(
    rep: &Representation,
    which: Generator,
    psi: &WavepacketState,
    eps: f64,
) -> Result<GeneratorDefect, QdynError> {
    let n = crate::timealg::DEFAULT_DEGREE;
    let e = Scalar::from_float(eps).ok_or_else(|| QdynError::BadGrid(format!("eps {eps}")))?;
    let plus = apply_u(rep, &one_parameter(which, &e, n), psi)?;
    let minus = apply_u(rep, &one_parameter(which, &-e.clone(), n), psi)?;
    let denom = match which {
        Generator::H => Complex64::new(0.0, -2.0 * eps),
        _ => Complex64::new(0.0, 2.0 * eps),
    };
    let sym = apply_operator(&symbolic_generator(rep, which, n)?, psi, psi.t0)?;
    let max_defect =
        plus.amp.iter().zip(&minus.amp).zip(&sym).map(|((p, m), s)| ((p - m) / denom - s).norm()).fold(0.0, f64::max);
    Ok(GeneratorDefect { which: which.to_string(), eps, max_defect })
}

/// Defects at `ε` and `ε/2` and their ratio.
pub fn richardson(
    rep: &Representation,
    which: Generator,
    psi: &WavepacketState,
    eps: f64,
) -> Result<Richardson, QdynError> {
    let coarse = generator_check(rep, which, psi, eps)?;
    let fine = generator_check(rep, which, psi, eps / 2.0)?;
    let ratio = coarse.max_defect / fine.max_defect;
    Ok(Richardson { which: which.to_string(), coarse, fine, ratio })
}

pub(crate) fn mass_f64(spec: &CocycleSpec) -> f64 {
    spec.mass().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;
    use crate::timealg::DEFAULT_DEGREE;

    const N: usize = DEFAULT_DEGREE;

    fn rep(spec: CocycleSpec) -> Representation {
        Representation::new(spec, InternalEnergy::new(rat(3, 4)))
    }

    fn packet(m: f64) -> WavepacketState {
        WavepacketState::gaussian(Grid1D::default(), &PacketSpec { q0: 0.5, sigma: 0.5, x0: 0.3 }, m, 0.0)
    }

    fn px(powers: &[Scalar]) -> Vec3Poly {
        Vec3Poly::along_x(TimePoly::from_powers(powers.to_vec(), N).unwrap())
    }

    #[test]
    fn gaussian_is_normalized_with_requested_moments() {
        let psi = packet(2.0);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let (mean, sd) = psi.moments();
        assert!((mean - 0.5).abs() < 1e-10 && (sd - 0.5).abs() < 1e-10);
        let x = CanonicalOperator::d(0, N).scale(&qrep::CPoly::constant(int(0), rat(1, 2), N));
        let xpsi = apply_operator(&x, &psi, 0.0).unwrap();
        let ex: Complex64 =
            psi.amp.iter().zip(&xpsi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * psi.grid.spacing();
        assert!((ex.re - 0.3).abs() < 1e-6, "{ex}");
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let r = rep(CocycleSpec::minimal(int(1)));
        let psi = packet(1.0);
        let out = apply_u(&r, &GroupElement::identity(N), &psi).unwrap();
        assert!(out.max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn boost_moves_packet_by_velocity() {
        let r = rep(CocycleSpec::minimal(int(1)));
        let psi = packet(1.0);
        let g = GroupElement::translation(px(&[int(0), rat(3, 4)]));
        let out = apply_u(&r, &g, &psi).unwrap();
        assert!((out.moments().0 - (0.5 + 0.75)).abs() < 1e-10);
        assert!((out.norm() - psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn norm_is_preserved_for_random_elements() {
        let spec = CocycleSpec::canonical(int(2), &[rat(1, 3)], &[rat(1, 4)]);
        let r = rep(spec);
        let psi = packet(2.0);
        let mut s = Sampler::new(11);
        for _ in 0..20 {
            let mut g = s.element(2, N);
            g = GroupElement::new(Vec3Poly::along_x(g.a().x.scale(&rat(1, 4))), g.b().clone());
            let out = apply_u(&r, &g, &psi).unwrap();
            assert!((out.norm() / psi.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_matches_cocycle_for_translations() {
        let spec = CocycleSpec::canonical(int(2), &[rat(1, 3), rat(-1, 2)], &[rat(1, 4)]);
        let r = rep(spec);
        let mut psi = packet(2.0);
        psi.t0 = 0.25;
        let mut s = Sampler::new(5);
        for _ in 0..10 {
            let shrink = |g: GroupElement| GroupElement::translation(Vec3Poly::along_x(g.a().x.scale(&rat(1, 5))));
            let g2 = shrink(s.translation(2, N));
            let g1 = shrink(s.translation(2, N));
            let d = composition_check(&r, &g2, &g1, &psi).unwrap();
            assert!(d < 1e-8, "defect {d}");
        }
    }

    #[test]
    fn cubic_shift_is_close_to_spectral() {
        let psi = packet(1.0);
        let a = shift_samples(&psi.grid, &psi.amp, 0.37, ShiftMethod::Spectral);
        let b = shift_samples(&psi.grid, &psi.amp, 0.37, ShiftMethod::Cubic);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-3 && diff > 1e-12, "{diff}");
    }

    #[test]
    fn support_escape_is_reported() {
        let r = rep(CocycleSpec::minimal(int(1)));
        let g = GroupElement::translation(px(&[int(0), int(7)]));
        assert!(matches!(apply_u(&r, &g, &packet(1.0)), Err(QdynError::SupportEscape(_))));
    }

    #[test]
    fn momentum_generator_is_mq() {
        let r = rep(CocycleSpec::minimal(int(2)));
        let d = generator_check(&r, Generator::P, &packet(2.0), 1e-4).unwrap();
        assert!(d.max_defect <= 1e-6, "{d:?}");
    }

    #[test]
    fn generators_converge_at_second_order() {
        let spec = CocycleSpec::canonical(int(2), &[rat(1, 3)], &[rat(1, 4)]);
        let r = rep(spec);
        let psi = packet(2.0);
        for which in [Generator::H, Generator::P, Generator::K(1)] {
            let rr = richardson(&r, which, &psi, 1e-2).unwrap();
            assert!(rr.converges(0.2), "{rr:?}");
        }
        let k2 = generator_check(&r, Generator::K(2), &psi, 1e-4).unwrap();
        assert!(k2.max_defect < 1e-6, "{k2:?}");
    }

    #[test]
    fn rejects_transverse_components() {
        let r = rep(CocycleSpec::minimal(int(1)));
        let a = Vec3Poly::new(TimePoly::zero(N), TimePoly::constant(int(1), N), TimePoly::zero(N));
        let g = GroupElement::translation(a);
        assert_eq!(apply_u(&r, &g, &packet(1.0)), Err(QdynError::NotOneDimensional));
    }
}
