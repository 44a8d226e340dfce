//! Schema-stable JSON/CSV reports. Field order is fixed and no timing data
//! is included, so reruns with identical inputs produce identical bytes.

use std::path::Path;

use serde::Serialize;

use jetmatch::bvp::CriticalPoint;
use jetmatch::distance::{DistanceResult, Method, SweepRow};
use jetmatch::energy::RotationPath;
use jetmatch::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct DistanceReport {
    schema: u32,
    value: f64,
    method: &'static str,
    potential: f64,
    kinetic: f64,
    winding: Option<i64>,
    diagnostics: DiagnosticsReport,
}

#[derive(Serialize)]
struct DiagnosticsReport {
    gradient_sup_norm: f64,
    best_residual: Option<f64>,
    methods_agree: Option<bool>,
    relative_gap: Option<f64>,
    direct_iterations: usize,
    branch_count: usize,
}

#[derive(Serialize)]
struct BvpReport {
    schema: u32,
    critical_points: Vec<CriticalPointReport>,
}

#[derive(Serialize)]
struct CriticalPointReport {
    energy: f64,
    potential: f64,
    kinetic: f64,
    residual: f64,
    iterations: usize,
    start_index: usize,
    winding: Option<i64>,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Shooting => "shooting",
        Method::Direct => "direct",
        Method::Agree => "agree",
    }
}

fn render<T: Serialize>(value: &T, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("report serialization cannot fail")
    } else {
        serde_json::to_string(value).expect("report serialization cannot fail")
    }
}

pub fn distance_report(result: &DistanceResult, pretty: bool) -> String {
    let report = DistanceReport {
        schema: SCHEMA_VERSION,
        value: result.value,
        method: method_name(result.method),
        potential: result.energy.potential,
        kinetic: result.energy.kinetic,
        winding: result.winding(),
        diagnostics: DiagnosticsReport {
            gradient_sup_norm: result.diagnostics.gradient_sup_norm,
            best_residual: result.diagnostics.best_residual,
            methods_agree: result.diagnostics.methods_agree,
            relative_gap: result.diagnostics.relative_gap,
            direct_iterations: result.diagnostics.direct_iterations,
            branch_count: result.critical_points.len(),
        },
    };
    render(&report, pretty)
}

pub fn bvp_report(result: &DistanceResult, pretty: bool) -> String {
    let report = BvpReport {
        schema: SCHEMA_VERSION,
        critical_points: result.critical_points.iter().map(point_report).collect(),
    };
    render(&report, pretty)
}

fn point_report(cp: &CriticalPoint) -> CriticalPointReport {
    CriticalPointReport {
        energy: cp.energy.total,
        potential: cp.energy.potential,
        kinetic: cp.energy.kinetic,
        residual: cp.residual_norm,
        iterations: cp.iterations,
        start_index: cp.start_index,
        winding: cp.winding(),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,energy_best,winding,branch_count\n");
    for r in rows {
        let energy = r.energy.map(|e| format!("{e:.12e}")).unwrap_or_default();
        let winding = r.winding.map(|w| w.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{:.12e},{},{},{}\n",
            r.lambda1, energy, winding, r.branch_count
        ));
    }
    out
}

/// Best path's angle lift as CSV columns s,theta (planar proper paths).
pub fn write_theta_csv(path: &Path, best: &RotationPath) -> Result<()> {
    let lift = best.theta_lift().map_err(|_| {
        Error::DimensionMismatch(
            "--theta-csv needs a planar path in the proper component".to_string(),
        )
    })?;
    let nseg = lift.len() - 1;
    let mut out = String::from("s,theta\n");
    for (m, theta) in lift.iter().enumerate() {
        out.push_str(&format!(
            "{:.12e},{theta:.12e}\n",
            m as f64 / nseg as f64
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
