//! Named verification suites shared by the command line and the acceptance run.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::classical::{generator_a, poisson_constant};
use crate::cocycle::{
    check_bc_constraints, corrupted_omega_cochain, galilei_reduction_check, omega_cochain, BcSample, CocycleError,
    CocycleSpec, InternalEnergy, NonlinearB,
};
use crate::cohomology::{check_dd_zero, random_cochain, random_tuples, two_cocycle_report, Convention};
use crate::exec;
use crate::group::GroupElement;
use crate::qdyn::{composition_check, PacketSpec, Representation, WavepacketState};
use crate::qrep::{boost, commutator, composition_defect, momentum, CPoly, CanonicalOperator};
use crate::report::CheckReport;
use crate::sample::Sampler;
use crate::timealg::{format_scalar, int, rat, Scalar, Vec3Poly};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}")]
    Unknown(String),
    #[error("suite {suite}: {source}")]
    Cocycle { suite: Suite, source: CocycleError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    DdZero,
    CocycleCondition,
    GalileiReduction,
    CompositionDefect,
    /// Composition defect restricted to `b₁ = 0`.
    CompositionDefectB0,
    /// Grid-level `U(g₂)U(g₁) = e^{iω}U(g₂g₁)` for translations.
    CompositionNumeric,
    Commutator,
    BcConstraints,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::DdZero,
        Suite::CocycleCondition,
        Suite::GalileiReduction,
        Suite::CompositionDefect,
        Suite::CompositionDefectB0,
        Suite::CompositionNumeric,
        Suite::Commutator,
        Suite::BcConstraints,
    ];

    /// What `verify` runs without `--suite`.
    pub const DEFAULT: [Suite; 5] =
        [Suite::DdZero, Suite::CocycleCondition, Suite::GalileiReduction, Suite::CompositionDefect, Suite::Commutator];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DdZero => "dd-zero",
            Suite::CocycleCondition => "cocycle-condition",
            Suite::GalileiReduction => "galilei-reduction",
            Suite::CompositionDefect => "composition-defect",
            Suite::CompositionDefectB0 => "composition-defect-b0",
            Suite::CompositionNumeric => "composition-numeric",
            Suite::Commutator => "commutator",
            Suite::BcConstraints => "bc-constraints",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Suite::DdZero => 50,
            Suite::CocycleCondition => 50,
            Suite::GalileiReduction => 100,
            Suite::CompositionDefect | Suite::CompositionDefectB0 => 100,
            Suite::CompositionNumeric => 20,
            Suite::Commutator => 1,
            Suite::BcConstraints => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| SuiteError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub spec: CocycleSpec,
    pub w: InternalEnergy,
    pub seed: u64,
    /// Overrides the per-suite sample count.
    pub samples: Option<usize>,
    pub negative_control: bool,
    pub max_degree: usize,
    /// Tolerance for the floating-point suites.
    pub tol: f64,
}

impl SuiteConfig {
    pub fn new(spec: CocycleSpec, seed: u64) -> Self {
        SuiteConfig {
            spec,
            w: InternalEnergy::default(),
            seed,
            samples: None,
            negative_control: false,
            max_degree: crate::timealg::DEFAULT_DEGREE,
            tol: 1e-8,
        }
    }

    fn count(&self, suite: Suite) -> usize {
        self.samples.unwrap_or(suite.default_samples())
    }

    /// Independent stream per suite so adding one does not move the others.
    fn sampler(&self, suite: Suite) -> Sampler {
        let salt = Suite::ALL.iter().position(|s| *s == suite).unwrap_or(0) as u64;
        Sampler::new(self.seed ^ (salt + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Random `(β₀…β₂, γ₀…γ₂)` with `m ≠ 0` and `γ` not identically zero.
pub fn random_embeddable_spec(s: &mut Sampler) -> CocycleSpec {
    loop {
        let spec = CocycleSpec::new(s.scalars(3), s.scalars(3));
        if spec.is_embeddable() && spec.k0().is_some() {
            return spec;
        }
    }
}

/// Same `β₀, β₁, γ₀, γ₁`, fresh random `βₙ, γₙ` for `n = 2, 3`.
pub fn perturb_higher(spec: &CocycleSpec, s: &mut Sampler) -> CocycleSpec {
    let mut beta: Vec<Scalar> = (0..2).map(|n| spec.beta(n)).collect();
    let mut gamma: Vec<Scalar> = (0..2).map(|n| spec.gamma(n)).collect();
    beta.extend(s.scalars(2));
    gamma.extend(s.scalars(2));
    CocycleSpec::new(beta, gamma)
}

fn element_json(g: &GroupElement) -> serde_json::Value {
    serde_json::to_value(g).unwrap_or(serde_json::Value::Null)
}

fn dd_zero(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut s = cfg.sampler(Suite::DdZero);
    let n = cfg.max_degree;
    let mut out = Vec::new();
    for convention in [Convention::Dual, Convention::Standard] {
        for arity in 0..=2 {
            let mut rep: Option<CheckReport> = None;
            for _ in 0..cfg.count(Suite::DdZero) {
                let alpha = random_cochain(arity, &mut s, n);
                let tuples = random_tuples(&mut s, 1, arity + 2, 3, n);
                let r = check_dd_zero(&alpha, &tuples, convention, cfg.seed);
                rep = Some(match rep {
                    Some(acc) => acc.merge(r),
                    None => r,
                });
            }
            let mut r = rep.unwrap_or_else(|| CheckReport::new("", cfg.seed));
            r.check = format!("dd_zero:arity{arity}:{convention:?}").to_lowercase();
            out.push(r);
        }
    }
    out
}

fn cocycle_condition(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut s = cfg.sampler(Suite::CocycleCondition);
    let n = cfg.max_degree;
    let count = cfg.count(Suite::CocycleCondition);
    if cfg.negative_control {
        let triples = random_tuples(&mut s, count, 3, 2, n);
        return vec![two_cocycle_report(&corrupted_omega_cochain(Arc::new(cfg.spec.clone())), &triples, cfg.seed)];
    }
    let mut specs = vec![cfg.spec.clone(), CocycleSpec::minimal(cfg.spec.mass())];
    specs.extend((0..10).map(|_| CocycleSpec::new(s.scalars(3), s.scalars(3))));
    specs
        .into_iter()
        .map(|spec| {
            let triples = random_tuples(&mut s, count, 3, 3, n);
            two_cocycle_report(&omega_cochain(Arc::new(spec)), &triples, cfg.seed)
        })
        .collect()
}

fn galilei_pairs(s: &mut Sampler, count: usize, n: usize) -> Vec<(GroupElement, GroupElement)> {
    (0..count).map(|_| (s.galilei(n), s.galilei(n))).collect()
}

fn galilei_reduction(cfg: &SuiteConfig) -> Result<Vec<CheckReport>, CocycleError> {
    let mut s = cfg.sampler(Suite::GalileiReduction);
    let n = cfg.max_degree;
    let count = cfg.count(Suite::GalileiReduction);
    let mut out = vec![galilei_reduction_check(&cfg.spec, &galilei_pairs(&mut s, count, n), cfg.seed)?];
    // Higher coefficients must not matter on Galilei pairs.
    for _ in 0..3 {
        let spec = perturb_higher(&cfg.spec, &mut s);
        let mut r = galilei_reduction_check(&spec, &galilei_pairs(&mut s, count, n), cfg.seed)?;
        r.check = format!("galilei_reduction:higher-order-independence:{}", spec.describe());
        out.push(r);
    }
    Ok(out)
}

fn composition(cfg: &SuiteConfig, suite: Suite) -> Result<Vec<CheckReport>, CocycleError> {
    if !cfg.spec.is_embeddable() {
        return Err(CocycleError::NotEmbeddable);
    }
    let mut s = cfg.sampler(suite);
    let n = cfg.max_degree;
    let draws: Vec<_> = (0..cfg.count(suite))
        .map(|_| {
            let g2 = s.element(2, n);
            let g1 = if suite == Suite::CompositionDefectB0 { s.translation(2, n) } else { s.element(2, n) };
            (g2, g1, s.vec3(1, n))
        })
        .collect();
    let results = exec::map(&draws, |(g2, g1, q)| match composition_defect(&cfg.spec, &cfg.w, g2, g1, q) {
        Ok(d) if d.is_zero() => None,
        Ok(d) => Some(json!({
            "g2": element_json(g2), "g1": element_json(g1), "q": q.to_string(), "defect": d.to_string(),
        })),
        Err(e) => Some(json!({ "g2": element_json(g2), "g1": element_json(g1), "error": e.to_string() })),
    });
    let name = if suite == Suite::CompositionDefectB0 { "composition_defect_b0" } else { "composition_defect" };
    let mut r = CheckReport::new(format!("{name}:{}", cfg.spec.describe()), cfg.seed);
    results.into_iter().for_each(|w| r.record(w));
    Ok(vec![r])
}

fn composition_numeric(cfg: &SuiteConfig) -> Result<Vec<CheckReport>, CocycleError> {
    if !cfg.spec.is_embeddable() || cfg.spec.k0().is_none() {
        return Err(CocycleError::NotEmbeddable);
    }
    let mut s = cfg.sampler(Suite::CompositionNumeric);
    let n = cfg.max_degree;
    let rep = Representation::new(cfg.spec.clone(), cfg.w.clone());
    let mass = crate::classical::mass_of(&cfg.spec).abs();
    let mut psi = WavepacketState::gaussian(Default::default(), &PacketSpec::default(), mass, 0.0);
    psi.t0 = 0.25;
    let shrink = |g: GroupElement| GroupElement::translation(Vec3Poly::along_x(g.a().x.scale(&rat(1, 5))));
    let pairs: Vec<_> = (0..cfg.count(Suite::CompositionNumeric))
        .map(|_| (shrink(s.translation(2, n)), shrink(s.translation(2, n))))
        .collect();
    let results = exec::map(&pairs, |(g2, g1)| match composition_check(&rep, g2, g1, &psi) {
        Ok(d) if d <= cfg.tol => None,
        Ok(d) => Some(json!({ "g2": element_json(g2), "g1": element_json(g1), "max_abs_diff": d, "tol": cfg.tol })),
        Err(e) => Some(json!({ "g2": element_json(g2), "g1": element_json(g1), "error": e.to_string() })),
    });
    let mut r = CheckReport::new(format!("composition_numeric:{}", cfg.spec.describe()), cfg.seed);
    results.into_iter().for_each(|w| r.record(w));
    Ok(vec![r])
}

fn commutators(cfg: &SuiteConfig) -> Result<Vec<CheckReport>, CocycleError> {
    let spec = &cfg.spec;
    if !spec.is_embeddable() {
        return Err(CocycleError::NotEmbeddable);
    }
    let n = cfg.max_degree;
    let m = spec.mass();
    let (k1, p) = (boost(spec, 1, n), momentum(spec, n));
    let im = CanonicalOperator::identity(n).scale(&CPoly::constant(int(0), m.clone(), n));
    let mut quantum = CheckReport::new(format!("commutator:[K1,P]:{}", spec.describe()), cfg.seed);
    for i in 0..3 {
        for j in 0..3 {
            let got = commutator(&k1[i], &p[j]);
            let want = if i == j { im.clone() } else { CanonicalOperator::zero(n) };
            quantum.record(
                (got != want).then(|| json!({ "i": i, "j": j, "got": got.to_string(), "want": want.to_string() })),
            );
            let pp = commutator(&p[i], &p[j]);
            quantum.record((!pp.is_zero()).then(|| json!({ "i": i, "j": j, "[P,P]": pp.to_string() })));
        }
    }
    let mut classical = CheckReport::new(format!("commutator:{{A1,A0}}:{}", spec.describe()), cfg.seed);
    let bracket = poisson_constant(&generator_a(spec, 1, n), &generator_a(spec, 0, n));
    classical.record(
        (bracket.as_ref() != Some(&m))
            .then(|| json!({ "bracket": bracket.as_ref().map(format_scalar), "mass": format_scalar(&m) })),
    );
    Ok(vec![quantum, classical])
}

fn bc_constraints(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut s = cfg.sampler(Suite::BcConstraints);
    let n = cfg.max_degree;
    let samples: Vec<BcSample> = (0..cfg.count(Suite::BcConstraints))
        .map(|_| {
            let a1 = s.vec3(3, n);
            let a2 = s.vec3(3, n);
            // Nonzero `aₓ(0)` so the nonlinear control is actually exercised.
            let a1 =
                Vec3Poly::new(a1.x.clone() + crate::timealg::TimePoly::constant(int(1), n), a1.y.clone(), a1.z.clone());
            BcSample { a1, a2, b: s.scalar() }
        })
        .collect();
    if cfg.negative_control {
        vec![check_bc_constraints(&NonlinearB(cfg.spec.clone()), &samples, cfg.seed)]
    } else {
        vec![check_bc_constraints(&cfg.spec, &samples, cfg.seed)]
    }
}

/// Runs one suite; errors mean the configuration cannot be checked at all.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckReport>, SuiteError> {
    let wrap = |source| SuiteError::Cocycle { suite, source };
    match suite {
        Suite::DdZero => Ok(dd_zero(cfg)),
        Suite::CocycleCondition => Ok(cocycle_condition(cfg)),
        Suite::GalileiReduction => galilei_reduction(cfg).map_err(wrap),
        Suite::CompositionDefect | Suite::CompositionDefectB0 => composition(cfg, suite).map_err(wrap),
        Suite::CompositionNumeric => composition_numeric(cfg).map_err(wrap),
        Suite::Commutator => commutators(cfg).map_err(wrap),
        Suite::BcConstraints => Ok(bc_constraints(cfg)),
    }
}
