use std::fs;
use std::path::Path;

use gaussmax_core::battery::{nonconcavity_matrix, random_interior, standard_battery};
use gaussmax_core::closedform::{bounds, f_max, gradient, hessian};
use gaussmax_core::corrdomain::{parse_matrix, PAIR_LABELS};
use gaussmax_core::geometry::{alpha_label, c3, corr_of, dihedrals, embed, mean_width, mean_width_edges};
use gaussmax_core::montecarlo::{estimate_max_with, estimate_order_stats, McConfig};
use gaussmax_core::optimize::{certify, maximize, OptConfig};
use gaussmax_core::verify::checks::{bounds_check, euler_relation_check, EULER_TOL, NONOBTUSE_TOL};
use gaussmax_core::verify::{
    h_monotonicity_scan, nonconcavity_example, nonobtuse_hessian_check, p_inequality_scan, p_ordering_scan,
    polynomial_identity, sample_nonobtuse, u_interval_scan, HScanGrid, PScanGrid, ScanReport,
};
use gaussmax_core::{Corr4, Tetra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::{Command, MatrixArg, ScanKind, Start, Suite};

pub struct Output {
    pub json: Value,
    pub summary: String,
    pub pass: bool,
}

impl Output {
    fn ok(json: Value, summary: String) -> Self {
        Self { json, summary, pass: true }
    }
}

type CmdResult = Result<Output, String>;

fn load(arg: &MatrixArg) -> Result<Corr4, String> {
    match (&arg.corr, &arg.file) {
        (Some(s), None) => parse_matrix(s).map_err(|e| format!("--corr: {e}")),
        (None, Some(p)) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_matrix(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
        _ => Err("give the matrix with exactly one of --corr or --file".into()),
    }
}

fn labeled(values: &[f64; 6]) -> Value {
    Value::Object(PAIR_LABELS.iter().zip(values).map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn report_output(r: ScanReport) -> Output {
    let summary = format!("{}: {} (margin {:.3e})", r.name, if r.pass { "pass" } else { "FAIL" }, r.worst_margin);
    let pass = r.pass;
    Output { json: serde_json::to_value(r).expect("report serializes"), summary, pass }
}

pub fn run(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Compute(a) => compute(&load(a)?),
        Command::Grad(a) => grad(&load(a)?),
        Command::Hessian(a) => hess(&load(a)?),
        Command::Mc { matrix, samples, seed, shards, no_antithetic, order_stats } => {
            mc(&load(matrix)?, *samples, *seed, *shards, !*no_antithetic, *order_stats)
        }
        Command::Meanwidth { matrix, tetra, order } => match tetra {
            Some(p) => meanwidth_tetra(p, *order),
            None => meanwidth_matrix(&load(matrix)?, *order),
        },
        Command::Dihedrals(a) => dihedral_angles(&load(a)?),
        Command::Optimize { start, matrix, seed, tol, dist_tol, write, trajectory } => {
            optimize(*start, matrix, *seed, *tol, *dist_tol, write.as_deref(), *trajectory)
        }
        Command::Verify { suite, seed } => verify(*suite, *seed),
        Command::Scan { which } => scan(which),
    }
}

fn compute(m: &Corr4) -> CmdResult {
    let f = f_max(m).map_err(|e| e.to_string())?;
    let (lo, hi) = bounds(m);
    let json = json!({
        "input": m,
        "domain": m.classify(),
        "f_max": f,
        "bounds": {"lower": lo, "upper": hi},
    });
    Ok(Output::ok(json, format!("E[max] = {f:.12}")))
}

fn grad(m: &Corr4) -> CmdResult {
    let g = gradient(m).map_err(|e| e.to_string())?;
    let f = f_max(m).map_err(|e| e.to_string())?;
    let json = json!({
        "input": m,
        "f_max": f,
        "gradient": g.components,
        "gradient_by_pair": labeled(&g.components),
    });
    let norm = g.components.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(Output::ok(json, format!("|grad F| = {norm:.6e}")))
}

fn hess(m: &Corr4) -> CmdResult {
    let h = hessian(m).map_err(|e| e.to_string())?;
    let json = json!({
        "input": m,
        "order": PAIR_LABELS,
        "hessian": h.entries,
    });
    Ok(Output::ok(json, format!("H[12][12] = {:.6e}", h.entries[0][0])))
}

fn mc(m: &Corr4, samples: u64, seed: u64, shards: usize, antithetic: bool, order: bool) -> CmdResult {
    if samples == 0 {
        return Err("--samples must be positive".into());
    }
    if shards == 0 {
        return Err("--shards must be positive".into());
    }
    let closed = f_max(m).ok();
    if order {
        let s = estimate_order_stats(m, samples, seed).map_err(|e| e.to_string())?;
        let json = json!({
            "input": m,
            "samples": samples,
            "seed": seed,
            "order_stats": s,
            "closed_form": closed,
        });
        return Ok(Output::ok(json, format!("E[X^I] ≈ {:.6} ± {:.1e}", s.e1, s.se1)));
    }
    let est = estimate_max_with(m, samples, seed, McConfig { shards, antithetic }).map_err(|e| e.to_string())?;
    let z = closed.map(|f| (est.mean - f) / est.std_error);
    let json = json!({
        "input": m,
        "samples": samples,
        "seed": seed,
        "shards": shards,
        "antithetic": antithetic,
        "estimate": est,
        "closed_form": closed,
        "z_score": z,
    });
    Ok(Output::ok(json, format!("E[max] ≈ {:.6} ± {:.1e}", est.mean, est.std_error)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TetraFile {
    vertices: [[f64; 3]; 4],
}

fn width_json(t: &Tetra, order: usize) -> Map<String, Value> {
    let w = mean_width(t, order);
    let mut out = Map::new();
    out.insert("vertices".into(), json!(t.vertices));
    out.insert("quad_order".into(), json!(order));
    out.insert("mean_width".into(), json!(w));
    out.insert("mean_width_edges".into(), mean_width_edges(t).map(|x| json!(x)).unwrap_or(Value::Null));
    out.insert("e_max_from_width".into(), json!(c3::<f64>() * w / 2.0));
    out
}

fn meanwidth_tetra(path: &Path, order: usize) -> CmdResult {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let tf: TetraFile = serde_json::from_str(&text).map_err(|e| format!("{}: field `vertices`: {e}", path.display()))?;
    let t = Tetra::new(tf.vertices).map_err(|e| format!("{}: field `vertices`: {e}", path.display()))?;
    let m = corr_of(&t);
    let mut out = width_json(&t, order);
    out.insert("correlation".into(), json!(m));
    out.insert("f_max".into(), f_max(&m).map(|x| json!(x)).unwrap_or(Value::Null));
    let w = out["mean_width"].as_f64().unwrap_or(f64::NAN);
    Ok(Output::ok(Value::Object(out), format!("mean width = {w:.12}")))
}

fn meanwidth_matrix(m: &Corr4, order: usize) -> CmdResult {
    let t = embed(m).map_err(|e| e.to_string())?;
    let mut out = Map::new();
    out.insert("input".into(), json!(m));
    out.extend(width_json(&t, order));
    out.insert("f_max".into(), f_max(m).map(|x| json!(x)).unwrap_or(Value::Null));
    let w = out["mean_width"].as_f64().unwrap_or(f64::NAN);
    Ok(Output::ok(Value::Object(out), format!("mean width = {w:.12}")))
}

fn dihedral_angles(m: &Corr4) -> CmdResult {
    let d = dihedrals(m).map_err(|e| e.to_string())?;
    let by_facets: Map<String, Value> = (0..6).map(|q| (alpha_label(q), json!(d.alpha[q]))).collect();
    let json = json!({
        "input": m,
        "alpha": d.alpha,
        "cos": d.cos,
        "by_facet_pair": by_facets,
        "nonobtuse": d.nonobtuse(0.0),
    });
    let max = d.alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Output::ok(json, format!("largest outer dihedral angle = {max:.6}")))
}

fn optimize(
    start: Start,
    matrix: &MatrixArg,
    seed: u64,
    tol: f64,
    dist_tol: f64,
    write: Option<&Path>,
    trajectory: bool,
) -> CmdResult {
    if !(tol > 0.0) {
        return Err("--tol must be positive".into());
    }
    let m0 = match start {
        Start::Identity => Corr4::identity(),
        Start::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_interior(&mut rng, 0.0)
        }
        Start::File => load(matrix)?,
    };
    let cfg = OptConfig { tol, ..OptConfig::default() };
    let mut res = maximize(&m0, &cfg).map_err(|e| e.to_string())?;
    let cert = certify(&res, dist_tol);
    if let Some(p) = write {
        let text = serde_json::to_string(&res.argmax).expect("matrix serializes");
        fs::write(p, text + "\n").map_err(|e| format!("{}: {e}", p.display()))?;
    }
    if !trajectory {
        res.trajectory.clear();
    }
    let pass = cert.pass;
    let summary = format!(
        "{} after {} iterations, E[max] = {:.12} ({})",
        res.stop,
        res.iterations,
        res.value,
        if pass { "certified" } else { "not certified" }
    );
    let json = json!({
        "start": m0,
        "start_kind": format!("{start:?}").to_lowercase(),
        "seed": seed,
        "config": cfg,
        "result": res,
        "certificate": cert,
    });
    Ok(Output { json, summary, pass })
}

fn verify(suite: Suite, seed: u64) -> CmdResult {
    let suites: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Identity,
            Suite::Monotonicity,
            Suite::Inequality,
            Suite::Nonconcavity,
            Suite::Hessian,
            Suite::Bounds,
        ],
        s => vec![s],
    };
    let mut reports = Map::new();
    let mut lines = Vec::new();
    let mut pass = true;
    let mut residual = None;
    for s in &suites {
        let (name, rs) = run_suite(*s, seed)?;
        let ok = rs.iter().all(|r| r.pass);
        pass &= ok;
        for r in &rs {
            lines.push(format!("{name}/{}: {}", r.name, if r.pass { "pass" } else { "FAIL" }));
            if r.name == "polynomial_identity" {
                residual = r.details.get("residual").cloned();
            }
        }
        reports.insert(name.into(), json!({"pass": ok, "reports": rs}));
    }
    let mut json = Map::new();
    json.insert("suite".into(), json!(format!("{suite:?}").to_lowercase()));
    json.insert("pass".into(), json!(pass));
    if let Some(r) = residual {
        json.insert("residual".into(), r);
    }
    json.insert("seed".into(), json!(seed));
    json.insert("suites".into(), Value::Object(reports));
    Ok(Output { json: Value::Object(json), summary: lines.join("\n"), pass })
}

fn run_suite(s: Suite, seed: u64) -> Result<(&'static str, Vec<ScanReport>), String> {
    let err = |e: gaussmax_core::Error| e.to_string();
    let out = match s {
        Suite::Identity => {
            let mut rs = vec![polynomial_identity()];
            for (k, m) in standard_battery().iter().enumerate() {
                let mut r = euler_relation_check(m).map_err(err)?;
                r.name = format!("euler_relation_battery_{k}");
                rs.push(r.with("tolerance", EULER_TOL));
            }
            ("identity", rs)
        }
        Suite::Monotonicity => (
            "monotonicity",
            vec![h_monotonicity_scan(&HScanGrid::default()), p_ordering_scan(500, 500, 1e-3)],
        ),
        Suite::Inequality => ("inequality", vec![p_inequality_scan(&PScanGrid::default())]),
        Suite::Nonconcavity => ("nonconcavity", vec![nonconcavity_example()]),
        Suite::Hessian => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rs = Vec::new();
            for (k, m) in sample_nonobtuse(&mut rng, 10).iter().enumerate() {
                let mut r = nonobtuse_hessian_check(m).map_err(err)?;
                r.name = format!("nonobtuse_hessian_{k}");
                rs.push(r.with("tolerance", NONOBTUSE_TOL));
            }
            ("hessian", rs)
        }
        Suite::Bounds => {
            let mut cases: Vec<Corr4> = vec![Corr4::identity(), Corr4::equicorrelated(-1.0 / 3.0), nonconcavity_matrix()];
            cases.extend(standard_battery());
            let mut rs = Vec::new();
            for (k, m) in cases.iter().enumerate() {
                let mut r = bounds_check(m).map_err(err)?;
                r.name = format!("bounds_{k}");
                rs.push(r);
            }
            ("bounds", rs)
        }
        Suite::All => unreachable!("expanded by the caller"),
    };
    Ok(out)
}

fn scan(which: &ScanKind) -> CmdResult {
    let r = match *which {
        ScanKind::H { n_w, w_min, w_max, z_steps, locate } => {
            if n_w < 1 || z_steps < 1 || locate < 2 || !(0.0 < w_min && w_min <= w_max) {
                return Err("H grid needs n_w ≥ 1, z_steps ≥ 1, locate ≥ 2 and 0 < w_min ≤ w_max".into());
            }
            h_monotonicity_scan(&HScanGrid { n_w, w_min, w_max, z_steps, locate })
        }
        ScanKind::POrdering { n_theta, n_u, band } => {
            if n_theta < 1 || n_u < 1 || !(band >= 0.0) {
                return Err("grid sizes must be positive and the band nonnegative".into());
            }
            p_ordering_scan(n_theta, n_u, band)
        }
        ScanKind::PInequality { n_theta, n_u, band } => {
            if n_theta < 1 || n_u < 1 || !(band >= 0.0) {
                return Err("grid sizes must be positive and the band nonnegative".into());
            }
            p_inequality_scan(&PScanGrid { n_theta, n_u, band })
        }
        ScanKind::U { x, y, n } => {
            if !(x > 0.0 && y > 0.0) || n < 2 {
                return Err("U scan needs x > 0, y > 0 and n ≥ 2".into());
            }
            u_interval_scan(x, y, n)
        }
    };
    Ok(report_output(r))
}
