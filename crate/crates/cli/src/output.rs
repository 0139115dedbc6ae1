use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use gaphilbert::acceptance::{self, oracle_phi, CriterionResult};
use gaphilbert::asymptotics::{compare_f, lambda_asymptotic_slope, BoundaryTable};
use gaphilbert::continuation::{decompose, direct_psi, fit_c_omega, recover_roi, Phantom};
use gaphilbert::sobolev::{
    fit_instability, instability_experiment, stability_experiment, BumpDictionary, WeightSpaceA,
};
use gaphilbert::Lab;

use crate::error::CliError;
use crate::io_err;

fn write_csv<T: Serialize>(out: &Path, name: &str, rows: &[T]) -> Result<(), CliError> {
    let path = out.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(())
}

fn write_json(out: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let path = out.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

pub fn surface(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let s = &lab.surface;
    let g = s.genus();
    let rows = |m: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..g).map(|i| (0..g).map(|j| m(i, j)).collect()).collect()
    };
    let v = json!({
        "endpoints": s.geometry().endpoints(),
        "genus": g,
        "a": rows(&|i, j| s.a[(i, j)]),
        "tau_imag": rows(&|i, j| s.tau[(i, j)].im),
        "tau_real_max": s.tau_real_part_max(),
        "tau_symmetry_defect": s.tau_symmetry_defect(),
        "im_tau_min_eigenvalue": s.im_tau_min_eigenvalue(),
        "u_infinity": s.u_inf.as_slice(),
        "delta": s.delta.as_slice(),
        "delta_closed_form": s.delta_closed_form().as_slice(),
        "omega_from_tau": s.omega_from_tau().as_slice(),
        "omega_from_cuts": s.omega_from_cuts().as_slice(),
        "g_infinity": s.g_infinity(),
        "d_infinity": [s.d_infinity().re, s.d_infinity().im],
        "lambda_slope": lambda_asymptotic_slope(s),
        "theta_radius": lab.theta.radius(),
    });
    write_json(out, "surface.json", &v)
}

#[derive(Serialize)]
struct ThetaRow {
    kappa: f64,
    abs_theta: f64,
    is_root: bool,
}

pub fn theta(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let scan = &lab.scan;
    let flags = scan.is_root_flags();
    let rows: Vec<ThetaRow> = (0..scan.kappa.len())
        .map(|i| ThetaRow {
            kappa: scan.kappa[i],
            abs_theta: scan.values[i],
            is_root: flags[i],
        })
        .collect();
    write_csv(out, "theta_scan.csv", &rows)
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    lambda: f64,
    kappa: f64,
    sign_changes: usize,
    kappa_tilde: Option<f64>,
    abs_diff: Option<f64>,
}

pub fn spectrum(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let sp = &lab.spectrum;
    let rows: Vec<SpectrumRow> = (0..sp.resolved_count())
        .map(|n| {
            let kt = lab.scan.roots.get(n).copied();
            SpectrumRow {
                n,
                lambda: sp.lambda[n],
                kappa: sp.kappa(n),
                sign_changes: sp.sign_changes(n),
                kappa_tilde: kt,
                abs_diff: kt.map(|k| (sp.kappa(n) - k).abs()),
            }
        })
        .collect();
    write_csv(out, "spectrum.csv", &rows)
}

#[derive(Serialize)]
struct AsymptoticsRow {
    n: usize,
    kappa_tilde: f64,
    lambda_tilde: f64,
    norm_f_tilde: f64,
    l2_gap_to_nystrom: f64,
}

pub fn asymptotics(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let sp = &lab.spectrum;
    let table = BoundaryTable::new(&lab.surface, &sp.grid.xi)?;
    let top = sp.resolved_count().min(lab.scan.roots.len());
    let rows: Vec<AsymptoticsRow> = (0..top)
        .map(|n| {
            let t = lab.asymptotics.triple(n, lab.scan.roots[n]);
            let c = compare_f(sp, &lab.asymptotics, &t, &table);
            AsymptoticsRow {
                n,
                kappa_tilde: t.kappa_tilde,
                lambda_tilde: t.lambda_model,
                norm_f_tilde: c.norm_model,
                l2_gap_to_nystrom: c.l2_gap,
            }
        })
        .collect();
    write_csv(out, "asymptotics.csv", &rows)
}

#[derive(Serialize)]
struct RecoveryRow {
    z: f64,
    recovered: f64,
    truth: f64,
    abs_err: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct OracleRow {
    z: f64,
    series: f64,
    direct: f64,
    rel_err: f64,
    tail_bound: f64,
}

pub fn continuation(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let cfg = &lab.config;
    let sp = &lab.spectrum;
    let pts = lab.midgap_points();
    let ph = Phantom::of_degree(lab.geometry(), cfg.phantom_degree);
    let n_rec = cfg.n_max.unwrap_or(cfg.recovery_n_max);
    let rec = recover_roi(sp, &lab.surface, &ph, n_rec, cfg.omega, &pts)?;
    let rows: Vec<RecoveryRow> = rec
        .points
        .iter()
        .map(|p| RecoveryRow {
            z: p.z,
            recovered: p.recovered,
            truth: p.truth,
            abs_err: p.abs_err,
            tail_bound: p.tail_bound,
        })
        .collect();
    write_csv(out, "continue.csv", &rows)?;

    let n_max = lab.n_max()?;
    let phe: Vec<f64> = sp.grid.xe.iter().map(|&x| oracle_phi(x)).collect();
    let ser = decompose(sp, &phe, n_max)?;
    let c_omega = fit_c_omega(sp, &lab.surface, cfg.omega, n_max)?;
    let rows = pts
        .iter()
        .map(|&z| {
            let v = ser.continue_psi(sp, &lab.surface, c_omega, z, f64::INFINITY)?;
            let d = direct_psi(lab.geometry(), oracle_phi, z, 200);
            Ok(OracleRow {
                z,
                series: v.value,
                direct: d,
                rel_err: (v.value - d).abs() / d.abs(),
                tail_bound: v.tail_bound,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_csv(out, "continuation_oracle.csv", &rows)
}

#[derive(Serialize)]
struct InstabilityRow {
    n: usize,
    pos_norm: f64,
    neg_norm_lb: f64,
    ratio: f64,
    kappa_n: f64,
}

fn dictionary(lab: &Lab) -> Result<BumpDictionary, CliError> {
    let c = &lab.config;
    Ok(BumpDictionary::admissible(
        lab.geometry(),
        c.bump_width,
        c.omega,
        c.bump_distance,
        c.bumps_per_gap,
        c.s2,
    )?)
}

pub fn instability(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let dict = dictionary(lab)?;
    let ns: Vec<usize> = (0..lab.spectrum.resolved_count()).collect();
    let rows = instability_experiment(&lab.spectrum, &dict, lab.config.s1, &ns)?;
    let rows: Vec<InstabilityRow> = rows
        .iter()
        .map(|r| InstabilityRow {
            n: r.n,
            pos_norm: r.pos_norm,
            neg_norm_lb: r.neg_norm_lb,
            ratio: r.ratio,
            kappa_n: r.kappa,
        })
        .collect();
    write_csv(out, "instability.csv", &rows)
}

#[derive(Serialize)]
struct StabilityRow {
    n_max: usize,
    #[serde(rename = "empirical_C")]
    empirical_c: f64,
    #[serde(rename = "analytic_C")]
    analytic_c: f64,
    operator_norm: f64,
}

pub fn stability(lab: &Lab, out: &Path) -> Result<(), CliError> {
    let c = &lab.config;
    let space = WeightSpaceA::gaps(&lab.surface, &lab.spectrum, c.omega)?;
    let rep = stability_experiment(&lab.spectrum, &space, c.samples, c.seed, 4)?;
    let rows: Vec<StabilityRow> = rep
        .rows
        .iter()
        .map(|r| StabilityRow {
            n_max: r.n_max,
            empirical_c: r.empirical_c,
            analytic_c: r.analytic_c,
            operator_norm: r.operator_norm,
        })
        .collect();
    write_csv(out, "stability.csv", &rows)
}

pub fn config_hash(lab: &Lab) -> Result<String, CliError> {
    let canonical = serde_json::to_string(&lab.config)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Runs the acceptance checks and writes summary.json.
pub fn summary(lab: &Lab, out: &Path) -> Result<Vec<CriterionResult>, CliError> {
    let results = acceptance::evaluate_all(lab);
    let mut criteria = serde_json::Map::new();
    for r in &results {
        criteria.insert(
            r.key.to_string(),
            json!({ "id": r.id, "pass": r.pass, "detail": r.detail }),
        );
    }
    let dict = dictionary(lab)?;
    let ns: Vec<usize> = (3..=10).collect();
    let rows = instability_experiment(&lab.spectrum, &dict, lab.config.s1, &ns)?;
    let fit = fit_instability(&rows, &lab.surface, &dict, lab.config.gamma_distance)?;
    let v = json!({
        "provenance": {
            "program": "gaphilbert",
            "version": env!("CARGO_PKG_VERSION"),
            "config_sha256": config_hash(lab)?,
        },
        "config": lab.config,
        "resolved_count": lab.spectrum.resolved_count(),
        "fits": {
            "lambda_slope_predicted": lambda_asymptotic_slope(&lab.surface),
            "c_omega": acceptance::c_omega(lab)?,
            "instability_slope": fit.slope,
            "instability_predicted": fit.predicted,
            "bump_min_re_g": fit.bump_min_re_g,
            "gamma_max_re_g": fit.gamma_max_re_g,
        },
        "criteria": criteria,
        "passed": results.iter().filter(|r| r.pass).count(),
        "total": results.len(),
    });
    write_json(out, "summary.json", &v)?;
    Ok(results)
}
