use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use galine::classical::{self, Trajectory};
use galine::cocycle::CocycleSpec;
use galine::qdyn::{self, EvolutionSeries, FrameScenario};
use galine::qrep::{self, CanonicalOperator};
use galine::report::CheckReport;
use galine::scenario::Scenario;
use galine::suites::{run_suite, Suite, SuiteConfig, SuiteError};
use galine::timealg::{format_scalar, int, Vec3Poly};

use crate::json;
use crate::Common;

pub enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

type Outcome = Result<bool, Failure>;

fn config(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn run(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Run(e.into())
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let s = match &common.scenario {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(config)?;
            Scenario::from_json(&text).with_context(|| format!("in {}", path.display())).map_err(config)?
        }
        None => Scenario::from_spec(&CocycleSpec::minimal(int(1))),
    };
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))
        .map_err(config)?;
    Ok(s)
}

fn suite_config(common: &Common, s: &Scenario, negative_control: bool) -> SuiteConfig {
    let mut cfg = SuiteConfig::new(s.spec(), common.seed);
    cfg.w = s.internal_energy();
    cfg.max_degree = s.n;
    cfg.negative_control = negative_control;
    if let Some(t) = common.tol {
        cfg.tol = t;
    }
    cfg
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn suite_entry(name: &str, reports: &[CheckReport]) -> (bool, Value) {
    let passed = reports.iter().all(CheckReport::passed);
    let samples: usize = reports.iter().map(|r| r.samples).sum();
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    println!("{} {name}: {samples} samples, {violations} violations", status(passed));
    if let Some(w) = reports.iter().flat_map(|r| r.violations.first().map(|w| (&r.check, w))).next() {
        eprintln!("witness ({}): {}", w.0, w.1);
    }
    (passed, json!({ "suite": name, "passed": passed, "reports": reports }))
}

pub fn verify(common: &Common, suites: &[String], negative_control: bool, samples: Option<usize>) -> Outcome {
    let s = load(common)?;
    let selected: Vec<Suite> = if suites.is_empty() {
        Suite::DEFAULT.to_vec()
    } else {
        suites.iter().map(|n| n.trim().parse()).collect::<Result<_, SuiteError>>().map_err(config)?
    };
    let mut cfg = suite_config(common, &s, negative_control);
    cfg.samples = samples;
    let mut entries = Vec::new();
    let mut all = true;
    for suite in selected {
        let reports = run_suite(suite, &cfg).map_err(config)?;
        let (ok, entry) = suite_entry(suite.name(), &reports);
        all &= ok;
        entries.push(entry);
    }
    let doc = json!({
        "command": "verify",
        "spec": s.spec().describe(),
        "seed": common.seed,
        "negative_control": negative_control,
        "passed": all,
        "suites": entries,
    });
    json::write(&common.out.join("verify.json"), &doc).map_err(run)?;
    Ok(all)
}

pub fn cocycle_check(common: &Common, negative_control: bool) -> Outcome {
    let s = load(common)?;
    let cfg = suite_config(common, &s, negative_control);
    let spec = s.spec();
    let mut embed = CheckReport::new(format!("embeddability:{}", spec.describe()), common.seed);
    embed.record((!spec.is_embeddable()).then(
        || json!({ "mass": format_scalar(&spec.mass()), "reason": "m = β₀γ₁ − γ₀β₁ vanishes; no Galilei embedding" }),
    ));
    let mut entries = Vec::new();
    let (mut all, e) = suite_entry("embeddability", std::slice::from_ref(&embed));
    entries.push(e);
    for suite in [Suite::CocycleCondition, Suite::BcConstraints, Suite::GalileiReduction] {
        if suite == Suite::GalileiReduction && !spec.is_embeddable() {
            continue;
        }
        let reports = run_suite(suite, &cfg).map_err(config)?;
        let (ok, entry) = suite_entry(suite.name(), &reports);
        all &= ok;
        entries.push(entry);
    }
    let doc = json!({
        "command": "cocycle-check",
        "spec": spec.describe(),
        "mass": format_scalar(&spec.mass()),
        "embeddable": spec.is_embeddable(),
        "seed": common.seed,
        "negative_control": negative_control,
        "passed": all,
        "checks": entries,
    });
    json::write(&common.out.join("cocycle-check.json"), &doc).map_err(run)?;
    Ok(all)
}

fn dump3(ops: &[CanonicalOperator; 3]) -> Value {
    json!(ops.iter().map(|o| json!({ "text": o.to_string(), "terms": o.to_json() })).collect::<Vec<_>>())
}

fn dump(op: &CanonicalOperator) -> Value {
    json!({ "text": op.to_string(), "terms": op.to_json() })
}

pub fn commutators(common: &Common) -> Outcome {
    let s = load(common)?;
    let spec = s.spec();
    let n = s.n;
    let cfg = suite_config(common, &s, false);
    let mut doc = json!({
        "command": "commutators",
        "spec": spec.describe(),
        "P": dump3(&qrep::momentum(&spec, n)),
        "K1": dump3(&qrep::boost(&spec, 1, n)),
        "K2": dump3(&qrep::boost(&spec, 2, n)),
    });
    let (passed, entry) = match run_suite(Suite::Commutator, &cfg) {
        Ok(reports) => suite_entry("commutator", &reports),
        Err(e) => {
            println!("FAIL commutator: {e}");
            (false, json!({ "suite": "commutator", "passed": false, "error": e.to_string() }))
        }
    };
    doc["commutator"] = entry;
    if spec.is_embeddable() {
        doc["X"] = dump3(&qrep::position(&spec, n));
        let fs = s.frame_scenario().map_err(config)?;
        let flow = Vec3Poly::along_x(fs.q_flow.clone());
        match qrep::hamiltonian(&spec, &s.internal_energy(), &flow) {
            Ok(h) => {
                doc["hamiltonian"] = json!({
                    "q_flow": flow.to_string(),
                    "generator": dump(&h.generator),
                    "literal": dump(&h.literal),
                    "regrouping": h.regrouping,
                    "frame": h.frame.as_ref().map(|f| json!({
                        "kinetic": dump(&f.kinetic),
                        "internal": dump(&f.internal),
                        "inertial": dump(&f.inertial),
                        "fictitious_potential": dump(&f.fictitious_potential),
                        "drift": dump(&f.drift),
                        "drift_velocity": f.drift_velocity.to_string(),
                    })),
                });
            }
            Err(e) => doc["hamiltonian"] = json!({ "error": e.to_string() }),
        }
    }
    doc["passed"] = json!(passed);
    json::write(&common.out.join("commutators.json"), &doc).map_err(run)?;
    Ok(passed)
}

fn stats(v: &[f64]) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({ "mean": mean, "min": min, "max": max })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn write_series(path: &Path, series: &EvolutionSeries) -> anyhow::Result<()> {
    qdyn::write_csv(series, BufWriter::new(File::create(path)?))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `ä(t0 + b)` on the interior samples where the acceleration is estimated.
fn frame_accel(fs: &FrameScenario, series: &EvolutionSeries) -> Vec<f64> {
    let a2 = fs.frame.derivative_n(2);
    let n = series.b.len();
    series.b[1..n.saturating_sub(1)].iter().map(|b| a2.eval_f64(fs.t0 + b)).collect()
}

fn wrap_phase(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    x - tau * (x / tau).round()
}

pub fn evolve(common: &Common, sweep: Option<&str>) -> Outcome {
    let s = load(common)?;
    let tol = common.tol.unwrap_or(1e-3);
    match sweep {
        None => evolve_single(common, &s, tol),
        Some(arg) => evolve_sweep(common, &s, tol, arg),
    }
}

fn evolve_single(common: &Common, s: &Scenario, tol: f64) -> Outcome {
    let fs = s.frame_scenario().map_err(config)?;
    let reference = fs.with_spec(fs.reference_spec());
    let mut runs = qdyn::sweep(&[fs.clone(), reference]).into_iter();
    let series = runs.next().expect("two runs").map_err(run)?;
    let ref_series = runs.next().expect("two runs").map_err(run)?;
    write_series(&common.out.join("evolve.csv"), &series).map_err(run)?;
    write_series(&common.out.join("evolve_reference.csv"), &ref_series).map_err(run)?;
    let accel = series.accel().map_err(run)?;
    let ref_accel = ref_series.accel().map_err(run)?;
    let frame = frame_accel(&fs, &series);
    let neg_frame: Vec<f64> = frame.iter().map(|x| -x).collect();
    let phase_max = series.global_phase.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let verdicts = json!({
        "accel_equals_minus_frame_accel": max_abs_diff(&accel, &neg_frame) <= tol,
        "accel_equals_frame_accel": max_abs_diff(&accel, &frame) <= tol,
        "accel_matches_reference": max_abs_diff(&accel, &ref_accel) <= tol,
        "phase_differs_from_reference": phase_max > 10.0 * tol,
    });
    let passed = max_abs_diff(&accel, &ref_accel) <= tol && series.max_norm_drift() <= fs.norm_tol;
    println!(
        "{} evolve: accel mean {:.6}, reference {:.6}, max |phase| {:.3e}",
        status(passed),
        accel.iter().sum::<f64>() / accel.len().max(1) as f64,
        ref_accel.iter().sum::<f64>() / ref_accel.len().max(1) as f64,
        phase_max
    );
    let doc = json!({
        "command": "evolve",
        "spec": fs.rep.spec.describe(),
        "reference_spec": fs.reference_spec().describe(),
        "mass": series.mass,
        "frame": fs.frame.to_string(),
        "dt": series.dt,
        "horizon": fs.horizon,
        "grid": fs.grid,
        "tol": tol,
        "norm_drift": series.max_norm_drift(),
        "accel": stats(&accel),
        "reference_accel": stats(&ref_accel),
        "frame_accel": stats(&frame),
        "accel_max_deviation_from_reference": max_abs_diff(&accel, &ref_accel),
        "global_phase_final": series.global_phase.last().copied().unwrap_or(0.0),
        "global_phase_max_abs": phase_max,
        "verdicts": verdicts,
        "passed": passed,
    });
    json::write(&common.out.join("evolve.json"), &doc).map_err(run)?;
    Ok(passed)
}

fn parse_sweep(arg: &str) -> anyhow::Result<(String, Vec<String>)> {
    let (key, values) = arg.split_once('=').ok_or_else(|| anyhow!("--sweep expects KEY=V1,V2,..."))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.len() < 2 {
        return Err(anyhow!("--sweep needs at least two values"));
    }
    Ok((key.trim().to_string(), values))
}

fn evolve_sweep(common: &Common, s: &Scenario, tol: f64, arg: &str) -> Outcome {
    let (key, values) = parse_sweep(arg).map_err(config)?;
    let scenarios: Vec<FrameScenario> = values
        .iter()
        .map(|v| s.with_override(&key, v).and_then(|x| x.frame_scenario()))
        .collect::<Result<_, _>>()
        .map_err(config)?;
    let results = qdyn::sweep(&scenarios);
    let mut series = Vec::new();
    for (v, r) in values.iter().zip(results) {
        let r = r.with_context(|| format!("{key}={v}")).map_err(run)?;
        write_series(&common.out.join(format!("evolve_{key}_{v}.csv")), &r).map_err(run)?;
        series.push(r);
    }
    let base = &series[0];
    let base_accel = base.accel().map_err(run)?;
    let mut all = true;
    let mut diffs = Vec::new();
    for (v, r) in values.iter().zip(&series).skip(1) {
        let accel = r.accel().map_err(run)?;
        let da = max_abs_diff(&accel, &base_accel);
        let dphase =
            r.global_phase.iter().zip(&base.global_phase).map(|(a, b)| wrap_phase(a - b).abs()).fold(0.0, f64::max);
        let ok = da <= tol;
        all &= ok;
        println!("{} sweep {key}={v} vs {}: max |Δaccel| {da:.3e}, max |Δphase| {dphase:.3e}", status(ok), values[0]);
        diffs.push(json!({
            "value": v,
            "against": values[0],
            "accel_max_diff": da,
            "x_max_diff": max_abs_diff(&r.x, &base.x),
            "phase_max_diff": dphase,
            "accel_equal": ok,
            "phase_differs": dphase > 10.0 * tol,
        }));
    }
    let runs: Vec<Value> = values
        .iter()
        .zip(&series)
        .zip(&scenarios)
        .map(|((v, r), fs)| {
            json!({
                "value": v,
                "spec": fs.rep.spec.describe(),
                "csv": format!("evolve_{key}_{v}.csv"),
                "dt": r.dt,
                "norm_drift": r.max_norm_drift(),
                "accel": stats(&r.accel().unwrap_or_default()),
            })
        })
        .collect();
    let doc = json!({
        "command": "evolve",
        "sweep": key,
        "tol": tol,
        "runs": runs,
        "diffs": diffs,
        "passed": all,
    });
    json::write(&common.out.join("evolve_sweep.json"), &doc).map_err(run)?;
    Ok(all)
}

fn accel_x(t: &Trajectory) -> Vec<Option<f64>> {
    t.accel_est.iter().map(|a| a.map(|v| v[0])).collect()
}

pub fn classical(common: &Common) -> Outcome {
    let s = load(common)?;
    let tol = common.tol.unwrap_or(1e-9);
    let gs = s.generating_spec().map_err(config)?;
    let c = &s.classical;
    if c.masses.is_empty() {
        return Err(config(anyhow!("classical.masses is empty")));
    }
    let results = classical::mass_sweep(
        &gs,
        [c.x0, 0.0, 0.0],
        [c.v0, 0.0, 0.0],
        &c.masses,
        s.integrator.horizon,
        s.integrator.dt,
    );
    let mut trajectories = Vec::new();
    for (m, r) in c.masses.iter().zip(results) {
        let t = r.with_context(|| format!("mass {m}")).map_err(run)?;
        let path = common.out.join(format!("classical_m{m}.csv"));
        classical::write_csv(&t, BufWriter::new(File::create(&path).map_err(run)?)).map_err(run)?;
        log::info!("wrote {}", path.display());
        trajectories.push(t);
    }
    let base = accel_x(&trajectories[0]);
    let mut all = true;
    let mut per_mass = Vec::new();
    for t in &trajectories {
        let defect = t.max_accel_defect();
        let spread = accel_x(t)
            .iter()
            .zip(&base)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .fold(0.0, f64::max);
        let ok = defect <= tol && spread <= tol;
        all &= ok;
        println!("{} classical m={}: max |ẍ′ − B̈| {defect:.3e}, mass spread {spread:.3e}", status(ok), t.mass);
        per_mass.push(json!({
            "mass": t.mass,
            "csv": format!("classical_m{}.csv", t.mass),
            "max_accel_defect": defect,
            "max_diff_from_first_mass": spread,
            "passed": ok,
        }));
    }
    let doc = json!({
        "command": "classical",
        "spec": s.spec().describe(),
        "frame": s.frame_poly().map_err(config)?.to_string(),
        "g": c.g,
        "dt": s.integrator.dt,
        "horizon": s.integrator.horizon,
        "tol": tol,
        "masses": per_mass,
        "passed": all,
    });
    json::write(&common.out.join("classical.json"), &doc).map_err(run)?;
    Ok(all)
}

pub fn report(out: &Path) -> Outcome {
    let mut files: Vec<_> = std::fs::read_dir(out)
        .with_context(|| format!("reading {}", out.display()))
        .map_err(config)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_name().is_some_and(|n| n != "report.json"))
        .collect();
    files.sort();
    let mut all = true;
    let mut entries = Vec::new();
    for path in &files {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let text = std::fs::read_to_string(path).map_err(run)?;
        let Ok(v) = serde_json::from_str::<Value>(&text) else {
            log::info!("skipping {name}: not JSON");
            continue;
        };
        if v.get("command").is_none() {
            log::info!("skipping {name}: not a galine report");
            continue;
        }
        let passed = v.get("passed").and_then(Value::as_bool).unwrap_or(false);
        all &= passed;
        println!("{} {name}", status(passed));
        entries.push(json!({ "file": name, "command": v.get("command"), "passed": passed }));
    }
    if entries.is_empty() {
        return Err(config(anyhow!("no reports in {}", out.display())));
    }
    json::write(&out.join("report.json"), &json!({ "command": "report", "reports": entries, "passed": all }))
        .map_err(run)?;
    Ok(all)
}
