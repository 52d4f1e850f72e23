//! One function per `--check`.

use std::f64::consts::TAU;
use std::sync::Arc;

use calabi_core::calabi::{calabi_of_action, disc_average};
use calabi_core::extension::{
    boundary_generating, extend_generating, matching_gaps, sandwich_report, smooth_stage_with, stage_reference,
    verify_stage_bounds, MATCH_TOL,
};
use calabi_core::orbits::{check_calabi_identity, check_hutchings_inequality, find_periodic_points};
use calabi_core::{normalize_with, DiscMap, Error};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::report::{csv_text, num, opt, sci, Table};
use crate::Check;

/// `|V computed at level a - (V at level 0 + a)|` allowed in the shift cross-check.
pub const SHIFT_TOL: f64 = 1e-10;
/// Largest `|Sigma_n|` tolerated beyond `1 + 1/(n+1)`.
pub const TAIL_TOL: f64 = 1e-12;

pub struct CheckOutput {
    pub check: Check,
    pub pass: bool,
    pub result: Value,
    pub text: String,
    /// `(file name, contents)`.
    pub csv: Vec<(String, String)>,
}

type Res<T> = std::result::Result<T, Error>;

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidParameter(format!("CSV rendering failed: {e}"))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

/// `None` certifies every `k`.
fn all_or(k: Option<u64>) -> String {
    k.map_or_else(|| "all".to_string(), |k| k.to_string())
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn calabi(cfg: &Config, map: &DiscMap) -> Res<CheckOutput> {
    let n = &cfg.numerics;
    let f = normalize_with(map, 0.0, &n.action())?;
    let res = calabi_of_action(&f, cfg.a, n.grid_r, n.grid_theta)?;
    // Integrate f_(phi, a) itself and compare with the analytic shift of V(phi, 0).
    let direct = disc_average(&f.at_level(cfg.a), n.grid_r, n.grid_theta)?;
    let shift_defect = (direct - res.value).abs();
    let shift_ok = shift_defect <= SHIFT_TOL;
    let error_ok = res.error_estimate <= n.calabi_tol;
    let pass = shift_ok && error_ok;

    let r_max = map.r_max();
    let radii: Vec<f64> = (0..n.csv_radii)
        .map(|i| r_max * i as f64 / (n.csv_radii - 1) as f64)
        .collect();
    let grid = f.at_level(cfg.a).sample_grid(&radii, n.csv_theta)?;
    let rows = grid.radii.iter().zip(&grid.values).flat_map(|(&r, row)| {
        row.iter()
            .enumerate()
            .map(move |(j, &v)| (r, TAU * j as f64 / grid.n_theta as f64, v))
    });
    let csv = csv_text(&["r", "theta", "f"], rows).map_err(csv_err)?;

    let mut t = Table::new();
    t.kv("check", "calabi")
        .kv("a", cfg.a)
        .kv("V(phi, a)", num(res.value))
        .kv("error_estimate", sci(res.error_estimate))
        .kv("error_tol", sci(n.calabi_tol))
        .kv("grid", format!("{} x {}", res.grid.0, res.grid.1))
        .kv("boundary_mean", num(res.boundary.value))
        .kv("direct_at_level", num(direct))
        .kv("shift_defect", sci(shift_defect))
        .kv("result", pass_str(pass));
    for w in &res.warnings {
        t.kv("warning", w);
    }
    Ok(CheckOutput {
        check: Check::Calabi,
        pass,
        result: json!({
            "calabi": to_value(&res),
            "direct_at_level": direct,
            "shift_defect": shift_defect,
            "shift_tol": SHIFT_TOL,
            "error_tol": n.calabi_tol,
        }),
        text: t.render(),
        csv: vec![("action.csv".into(), csv)],
    })
}

#[derive(Serialize)]
struct OrbitRow {
    orbit: usize,
    period: usize,
    point: usize,
    r: f64,
    theta: f64,
    x: f64,
    y: f64,
    residual: f64,
    mean_action: f64,
    level: f64,
    cluster_size: usize,
}

pub fn orbits(cfg: &Config, map: &DiscMap) -> Res<CheckOutput> {
    let n = &cfg.numerics;
    let f = normalize_with(map, cfg.a, &n.action())?;
    let mut search = find_periodic_points(map, &f, &n.search())?;
    search
        .orbits
        .sort_by(|a, b| a.period.cmp(&b.period).then(a.mean_action.total_cmp(&b.mean_action)));
    let pass = search.orbits.iter().all(|o| o.residual <= n.orbit_tol);

    let mut table = Table::with_header(&["period", "r", "theta", "residual", "mean_action", "cluster"]);
    let mut rows = Vec::new();
    for (i, o) in search.orbits.iter().enumerate() {
        let p = o.points[0];
        table.row(vec![
            o.period.to_string(),
            format!("{:.10}", p.r),
            format!("{:.6}", p.theta),
            sci(o.residual),
            num(o.mean_action),
            o.cluster_size.to_string(),
        ]);
        for (k, q) in o.points.iter().enumerate() {
            let z = q.to_cartesian();
            rows.push(OrbitRow {
                orbit: i,
                period: o.period,
                point: k,
                r: q.r,
                theta: q.theta,
                x: z.x,
                y: z.y,
                residual: o.residual,
                mean_action: o.mean_action,
                level: o.level,
                cluster_size: o.cluster_size,
            });
        }
    }
    let header = [
        "orbit",
        "period",
        "point",
        "r",
        "theta",
        "x",
        "y",
        "residual",
        "mean_action",
        "level",
        "cluster_size",
    ];
    let csv = csv_text(&header, rows).map_err(csv_err)?;
    let d = search.diagnostics;
    let mut head = Table::new();
    head.kv("check", "orbits")
        .kv("a", cfg.a)
        .kv("d_max", n.d_max)
        .kv("orbits", search.orbits.len())
        .kv("inf_mean_action", opt(search.inf_mean_action().map(|o| num(o.mean_action))))
        .kv(
            "seeds/attempts",
            format!("{} / {} ({} not converged)", d.seeds, d.attempts, d.not_converged),
        )
        .kv("result", pass_str(pass));
    Ok(CheckOutput {
        check: Check::Orbits,
        pass,
        result: json!({
            "orbits": to_value(&search.orbits),
            "inf_mean_action": search.inf_mean_action().map(|o| o.mean_action),
            "diagnostics": to_value(&d),
        }),
        text: format!("{}\n{}", head.render(), table.render()),
        csv: vec![("orbits.csv".into(), csv)],
    })
}

pub fn verify(cfg: &Config, map: &DiscMap) -> Res<CheckOutput> {
    let opts = cfg.numerics.verify();
    let h = check_hutchings_inequality(map, &opts)?;
    let id = check_calabi_identity(map, &opts)?;
    let inequality_ok = h.conclusion_met != Some(false);
    let identity_ok = !id.applicable || id.pass;
    let pass = inequality_ok && identity_ok;

    let mut t = Table::new();
    t.kv("check", "verify")
        .kv("boundary", to_value(&h.boundary).to_string())
        .kv("exploratory", h.exploratory)
        .kv("V(phi, 0)", num(h.calabi.value))
        .kv("error_estimate", sci(h.calabi.error_estimate))
        .kv("hypothesis_met", h.hypothesis_met)
        .kv("orbits_found", h.orbits_found)
        .kv("inf_mean_action", opt(h.inf_mean_action.map(num)))
        .kv("conclusion_met", opt(h.conclusion_met))
        .kv("margin", opt(h.margin.map(num)))
        .kv("verdict", &h.verdict);
    for hint in &h.hints {
        t.kv("hint", hint);
    }
    t.kv("rotation_number", num(id.rotation.value))
        .kv("identity_applicable", id.applicable)
        .kv("identity_reason", &id.reason)
        .kv("V(phi, rho)", num(id.calabi_at_rho))
        .kv("|V(phi, rho) - rho|", opt(id.calabi_gap.map(sci)))
        .kv("|f(x0) - rho|", opt(id.action_gap.map(sci)))
        .kv("identity_pass", id.pass)
        .kv("result", pass_str(pass));
    Ok(CheckOutput {
        check: Check::Verify,
        pass,
        result: json!({
            "hutchings": to_value(&h),
            "calabi_identity": to_value(&id),
        }),
        text: t.render(),
        csv: Vec::new(),
    })
}

pub fn extend(cfg: &Config, map: &DiscMap) -> Res<CheckOutput> {
    let n = &cfg.numerics;
    let w = boundary_generating(map, n.eps)?;
    let theta0 = map
        .detect_rigid_boundary(1e-10)?
        .ok_or_else(|| Error::Hypothesis("the map does not rotate the boundary rigidly".into()))?;
    let matching = matching_gaps(&w, theta0)?;
    let w_hat = extend_generating(&w, theta0)?;
    let reference = stage_reference(&w_hat)?;
    let f = Arc::new(normalize_with(map, 0.0, &n.action())?);
    let base = calabi_of_action(&f, 0.0, n.grid_r, n.grid_theta)?;
    let stage = smooth_stage_with(&w_hat, n.stage_n, f)?;
    let bounds = verify_stage_bounds(&stage, &reference, n.cert_k)?;
    let sandwich = sandwich_report(&stage, base.value, bounds.k, (n.grid_r, n.grid_theta))?;
    let tail = stage.tail_defect(16, 64)?;
    let interface = stage.interface_gap(64)?;
    let c1 = stage.c1_gap(64, 32)?;
    let pass = bounds.sigma_bound
        && bounds.integral_bound
        && bounds.integral_vs_sup
        && sandwich.contained
        && tail <= TAIL_TOL
        && interface <= MATCH_TOL;

    let radii: Vec<f64> = (0..n.csv_radii)
        .map(|i| 1.0 + i as f64 / (n.csv_radii - 1) as f64)
        .collect();
    let samples = stage.sample(&radii, n.csv_theta)?;
    let csv = csv_text(&["r", "theta", "big_r", "big_theta", "w_n", "w_hat", "sigma_n"], samples).map_err(csv_err)?;

    let mut t = Table::new();
    t.kv("check", "extend")
        .kv("theta0", num(theta0))
        .kv("stage n", stage.n)
        .kv("collar", format!("[{}, {:.6}]", stage.collar.0, stage.collar.1))
        .kv("matching gap", sci(matching.max()))
        .kv("V(phi, 0)", num(base.value))
        .kv("sup |dR|", sci(bounds.sup_dr))
        .kv("sup |dTheta|", sci(bounds.sup_dtheta))
        .kv("sup |dW|", sci(bounds.sup_dw))
        .kv("certified k", all_or(bounds.certified_k))
        .kv("k checked", all_or(bounds.k))
        .kv("sup |Sigma_n|", format!("{} (<= 2/k: {})", sci(bounds.sup_sigma), bounds.sigma_bound))
        .kv(
            "int |Sigma_n| r",
            format!(
                "{} (<= 6 pi/k: {}, <= 3 pi sup: {})",
                sci(bounds.sigma_integral),
                bounds.integral_bound,
                bounds.integral_vs_sup
            ),
        )
        .kv("restricted V", num(sandwich.restricted_calabi))
        .kv("sandwich center", num(sandwich.center))
        .kv("sandwich gap", format!("{} (half width {})", sci(sandwich.gap), sci(sandwich.half_width)))
        .kv("sandwich contained", sandwich.contained)
        .kv("tail defect", sci(tail))
        .kv("interface gap", sci(interface))
        .kv("C1 gap to W^", format!("{} (n * gap = {:.4})", sci(c1.gap), c1.scaled))
        .kv("result", pass_str(pass));
    Ok(CheckOutput {
        check: Check::Extend,
        pass,
        result: json!({
            "theta0": theta0,
            "n": stage.n,
            "collar": stage.collar,
            "matching": to_value(&matching),
            "base_calabi": to_value(&base),
            "bounds": to_value(&bounds),
            "sandwich": to_value(&sandwich),
            "tail_defect": tail,
            "interface_gap": interface,
            "c1": to_value(&c1),
        }),
        text: t.render(),
        csv: vec![(format!("stage_n{}.csv", stage.n), csv)],
    })
}

