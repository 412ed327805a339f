//! `summarize`: evaluates the acceptance criteria from the CSVs found in an output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sobolev_core::mc::loglog_slope;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub measured: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissingCriterion {
    pub id: u8,
    pub title: &'static str,
    pub needs: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionResult>,
    pub missing: Vec<MissingCriterion>,
}

impl Report {
    pub fn criterion(&self, id: u8) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

struct Criterion {
    id: u8,
    title: &'static str,
    files: &'static [&'static str],
    eval: fn(&Inputs) -> CliResult<(bool, Value)>,
}

const CRITERIA: [Criterion; 12] = [
    Criterion { id: 1, title: "condition-number law", files: &["landscape.csv"], eval: c1 },
    Criterion { id: 2, title: "Hessian spectra", files: &["spectra.csv"], eval: c2 },
    Criterion { id: 3, title: "one-step GD", files: &["gd_compare.csv"], eval: c3 },
    Criterion { id: 4, title: "H1 flow acceleration", files: &["flow.csv"], eval: c4 },
    Criterion { id: 5, title: "lambda(theta) and quadratic-form matrices", files: &["quadforms.csv"], eval: c5 },
    Criterion { id: 6, title: "ReLU^2 descent", files: &["relusq_descent.csv", "relusq_flow.csv"], eval: c6 },
    Criterion {
        id: 7,
        title: "multi-node dynamics",
        files: &["multinode_omega.csv", "multinode_ratio.csv", "multinode_decay.csv", "multinode_saddle.csv"],
        eval: c7,
    },
    Criterion { id: 8, title: "Toeplitz linearization", files: &["toeplitz.csv", "toeplitz_ratio.csv"], eval: c8 },
    Criterion { id: 9, title: "Monte-Carlo verification", files: &["convergence.csv", "pointwise.csv"], eval: c9 },
    Criterion { id: 10, title: "empirical SGD", files: &["sgd.csv"], eval: c10 },
    Criterion { id: 11, title: "linear model", files: &["linear.csv"], eval: c11 },
    Criterion { id: 12, title: "Chebyshev differentiation", files: &["chebyshev.csv", "chebyshev_matrix.csv"], eval: c12 },
];

const DETERMINISM: &str = "determinism";

/// Parsed CSV with named columns.
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn load(path: &Path) -> CliResult<Table> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| rec.map(|r| r.iter().map(str::to_string).collect())).collect::<Result<_, _>>()?;
        Ok(Table { name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(), header, rows })
    }

    fn malformed(&self, message: String) -> CliError {
        CliError::Malformed { file: self.name.clone(), message }
    }

    fn idx(&self, col: &str) -> CliResult<usize> {
        self.header.iter().position(|h| h == col).ok_or_else(|| self.malformed(format!("missing column `{col}`")))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num(&self, col: &str) -> CliResult<Vec<f64>> {
        let i = self.idx(col)?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|_| self.malformed(format!("`{}` in column `{col}` is not a number", r[i]))))
            .collect()
    }

    pub fn text(&self, col: &str) -> CliResult<Vec<&str>> {
        let i = self.idx(col)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

struct Inputs {
    tables: BTreeMap<&'static str, Table>,
    manifest: Value,
}

impl Inputs {
    fn t(&self, name: &str) -> &Table {
        &self.tables[name]
    }

    /// Runtime of a subcommand from the manifest, if recorded.
    fn elapsed(&self, subcommand: &str) -> Option<f64> {
        self.manifest.get(subcommand)?.get("elapsed_seconds")?.as_f64()
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn min_of(it: impl IntoIterator<Item = f64>) -> f64 {
    -max_of(it.into_iter().map(|x| -x))
}

fn within_budget(inputs: &Inputs, subcommand: &str, limit: f64) -> (bool, Value) {
    match inputs.elapsed(subcommand) {
        Some(t) => (t < limit, json!({ "seconds": t, "limit": limit })),
        None => (true, json!({ "seconds": null, "limit": limit })),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c1(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("landscape.csv");
    let (theta, alpha, kl, kh) = (t.num("theta")?, t.num("alpha")?, t.num("kappa_l2")?, t.num("kappa_h1")?);
    let (mut n, mut err_l2, mut err_h1, mut order) = (0usize, 0.0f64, 0.0f64, 0usize);
    for r in 0..t.len() {
        let a = alpha[r] * theta[r].sin().powi(2);
        if !(a.is_finite() && 4.0 * a < 1.0 && theta[r] > 0.0) {
            continue;
        }
        n += 1;
        err_l2 = max_of([err_l2, rel(kl[r], 1.0 / (1.0 - 4.0 * a))]);
        err_h1 = max_of([err_h1, rel(kh[r], 1.0 / (1.0 - 3.0 * a))]);
        if theta[r] > 1e-6 && !(kh[r] < kl[r]) {
            order += 1;
        }
    }
    let (time_ok, runtime) = within_budget(i, "landscape", 10.0);
    let pass = n > 0 && err_l2 <= 1e-8 && err_h1 <= 1e-8 && order == 0 && time_ok;
    Ok((pass, json!({ "points": n, "max_rel_err_kappa_l2": err_l2, "max_rel_err_kappa_h1": err_h1, "order_violations": order, "runtime": runtime })))
}

fn c2(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("spectra.csv");
    let dev = |a: &str, b: &str| -> CliResult<f64> { Ok(max_of(t.num(a)?.iter().zip(t.num(b)?).map(|(x, y)| (x - y).abs()))) };
    let max_dev = dev("lam_max", "lam_max_expected")?;
    let min_dev = dev("lam_min", "lam_min_expected")?;
    let bulk_dev = max_of(t.num("bulk_max_dev")?);
    let pass = !t.is_empty() && max_dev <= 1e-9 && min_dev <= 1e-9 && bulk_dev <= 1e-9;
    Ok((pass, json!({ "rows": t.len(), "max_dev_lam_max": max_dev, "max_dev_lam_min": min_dev, "max_dev_bulk": bulk_dev })))
}

fn c3(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("gd_compare.csv");
    let (theta, c, el2, eh1, f) = (t.num("theta")?, t.num("max_step_c")?, t.num("err_l2")?, t.num("err_h1")?, t.num("gain_f")?);
    let basin = t.text("in_basin")?;
    let (mut points, mut bad_gain, mut bad_ineq, mut c0_err, mut c0_points) = (0usize, 0usize, 0usize, 0.0f64, 0usize);
    let mut min_gain = f64::INFINITY;
    for r in 0..t.len() {
        if theta[r] < 1e-12 {
            c0_points += 1;
            c0_err = max_of([c0_err, (c[r] - 4.0 / 3.0).abs()]);
            continue;
        }
        if basin[r] != "true" {
            continue;
        }
        points += 1;
        min_gain = min_gain.min(f[r]);
        if !(f[r] > 0.0) {
            bad_gain += 1;
        }
        if !(eh1[r] <= el2[r] - f[r] + 1e-12 * el2[r]) {
            bad_ineq += 1;
        }
    }
    let pass = points > 0 && c0_points > 0 && bad_gain == 0 && bad_ineq == 0 && c0_err <= 1e-12;
    Ok((pass, json!({ "basin_points": points, "min_gain_f": min_gain, "nonpositive_gain": bad_gain, "inequality_violations": bad_ineq, "theta0_max_abs_err_c": c0_err })))
}

type Curves = BTreeMap<(String, String), Vec<(f64, f64)>>;

fn curves(t: &Table, id: &str, kind: &str) -> CliResult<Curves> {
    let (ids, kinds, ts, vs) = (t.text(id)?, t.text(kind)?, t.num("t")?, t.num("v")?);
    let mut out: Curves = BTreeMap::new();
    for r in 0..t.len() {
        out.entry((ids[r].to_string(), kinds[r].to_string())).or_default().push((ts[r], vs[r]));
    }
    Ok(out)
}

/// Counts grid times where the `fast` curve lies above the `slow` one, per shared init id.
fn dominance(c: &Curves, fast: &str, slow: &str) -> (usize, usize, usize) {
    let (mut inits, mut compared, mut violations) = (0, 0, 0);
    for ((id, kind), f) in c {
        if kind != fast {
            continue;
        }
        let Some(s) = c.get(&(id.clone(), slow.to_string())) else { continue };
        inits += 1;
        for (a, b) in f.iter().zip(s) {
            if a.0 != b.0 {
                violations += 1;
                continue;
            }
            compared += 1;
            if !(a.1 <= b.1) {
                violations += 1;
            }
        }
    }
    (inits, compared, violations)
}

fn final_max(c: &Curves, kind: &str) -> f64 {
    max_of(c.iter().filter(|((_, k), _)| k == kind).map(|(_, v)| v.last().map_or(f64::NAN, |p| p.1)))
}

fn c4(i: &Inputs) -> CliResult<(bool, Value)> {
    let c = curves(i.t("flow.csv"), "init_id", "kind")?;
    let (inits, compared, violations) = dominance(&c, "h1", "l2");
    let (v_l2, v_h1) = (final_max(&c, "l2"), final_max(&c, "h1"));
    let (time_ok, runtime) = within_budget(i, "flow", 30.0);
    let pass = inits > 0 && violations == 0 && v_l2 < 1e-8 && v_h1 < 1e-8 && time_ok;
    Ok((pass, json!({ "inits": inits, "grid_points": compared, "violations": violations, "max_final_v_l2": v_l2, "max_final_v_h1": v_h1, "runtime": runtime })))
}

fn c5(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("quadforms.csv");
    let lambda_err = max_of(t.num("lambda")?.iter().zip(t.num("lam_min_m2")?).map(|(a, b)| (a - b).abs()));
    let mut psd = BTreeMap::new();
    for col in ["lam_min_m1", "lam_min_m2", "lam_min_n1", "lam_min_n2", "lam_min_n3", "lam_min_n4"] {
        psd.insert(col, min_of(t.num(col)?));
    }
    let n5 = max_of(t.num("lam_max_n5")?);
    let pass = !t.is_empty() && lambda_err <= 1e-10 && psd.values().all(|&v| v >= -1e-10) && n5 <= 1e-10;
    Ok((pass, json!({ "grid_points": t.len(), "max_abs_err_lambda": lambda_err, "min_eigenvalues": psd, "max_eigenvalue_n5": n5 })))
}

fn c6(i: &Inputs) -> CliResult<(bool, Value)> {
    let d = i.t("relusq_descent.csv");
    let degenerate = d.text("degenerate")?;
    let mut worst = [f64::NEG_INFINITY; 3];
    let mut bad = 0usize;
    for (j, col) in ["inner_i1", "inner_i2", "inner_i3"].into_iter().enumerate() {
        for (v, deg) in d.num(col)?.into_iter().zip(&degenerate) {
            if *deg == "true" {
                continue;
            }
            worst[j] = max_of([worst[j], v]);
            if !(v < 0.0) {
                bad += 1;
            }
        }
    }
    let c = curves(i.t("relusq_flow.csv"), "init_id", "objective")?;
    let (inits, compared, violations) = dominance(&c, "h2", "i1");
    let pass = !d.is_empty() && bad == 0 && inits > 0 && violations == 0;
    Ok((pass, json!({ "points": d.len(), "max_inner": worst, "nonnegative_inner": bad, "flow_inits": inits, "flow_grid_points": compared, "flow_violations": violations })))
}

fn c7(i: &Inputs) -> CliResult<(bool, Value)> {
    let omega = i.t("multinode_omega.csv");
    let t_hit = omega.num("t_hit")?;
    let unreached = t_hit.iter().filter(|t| !t.is_finite()).count();

    let ratio = i.t("multinode_ratio.csv");
    let r = ratio.num("ratio")?;
    let (r_min, r_max) = (min_of(r.iter().copied()), max_of(r.iter().copied()));
    let ratio_ok = !r.is_empty() && r_min >= 1.8 && r_max <= 2.2;

    let decay = i.t("multinode_decay.csv");
    let (ks, kinds) = (decay.text("k")?, decay.text("kind")?);
    let rel_errs: Vec<f64> = decay.num("exponent")?.iter().zip(decay.num("expected")?).map(|(e, x)| rel(*e, x)).collect();
    let decay_max = max_of(rel_errs.iter().copied());
    let per_k: Vec<Value> = (0..decay.len()).map(|r| json!({ "k": ks[r], "kind": kinds[r], "rel_err": rel_errs[r] })).collect();

    let saddle = i.t("multinode_saddle.csv");
    let closed = saddle.num("closed_form")?;
    let root_err = max_of(closed.iter().zip(saddle.num("numeric_root")?).map(|(a, b)| (a - b).abs()));
    let residual = max_of(saddle.num("field_residual")?);
    let quoted: Vec<f64> = saddle.text("k")?.iter().zip(&closed).filter(|(k, _)| **k == "2").map(|(_, v)| *v).collect();

    let pass = !t_hit.is_empty() && unreached == 0 && ratio_ok && decay_max <= 0.02 && root_err <= 1e-9 && residual <= 1e-10;
    Ok((
        pass,
        json!({
            "omega_starts": t_hit.len(),
            "omega_unreached": unreached,
            "time_ratio_min": r_min,
            "time_ratio_max": r_max,
            "decay_max_rel_err": decay_max,
            "decay": per_k,
            "saddle_max_abs_err": root_err,
            "saddle_max_field_residual": residual,
            "saddle_k2_closed_forms": quoted,
        }),
    ))
}

fn c8(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("toeplitz.csv");
    let (ks, kinds) = (t.text("k")?, t.text("kind")?);
    let devs: Vec<f64> = t.num("eigenvalue")?.iter().zip(t.num("expected")?).map(|(a, b)| (a - b).abs()).collect();
    let mut per: BTreeMap<String, f64> = BTreeMap::new();
    for r in 0..t.len() {
        let e = per.entry(format!("k{}_{}", ks[r], kinds[r])).or_insert(0.0);
        *e = max_of([*e, devs[r]]);
    }
    let eig_dev = max_of(devs.iter().copied());
    let ratio = i.t("toeplitz_ratio.csv");
    let doubling = max_of(ratio.num("max_abs_h1_minus_2l2")?);
    let pass = !t.is_empty() && eig_dev <= 1e-6 && doubling <= 1e-6;
    Ok((pass, json!({ "max_abs_eig_dev": eig_dev, "eig_dev": per, "max_abs_h1_minus_2l2": doubling })))
}

fn c9(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("convergence.csv");
    let (models, kinds, dims) = (t.text("model")?, t.text("kind")?, t.text("dim")?);
    let (log2, mse) = (t.num("log2_n")?, t.num("mse")?);
    let mut cells: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
    for r in 0..t.len() {
        cells.entry(format!("{}/{}/d{}", models[r], kinds[r], dims[r])).or_default().push((log2[r] as u32, mse[r]));
    }
    let (mut bad_slope, mut bad_trend) = (Vec::new(), Vec::new());
    let mut slopes = BTreeMap::new();
    for (key, pts) in &mut cells {
        pts.sort_by_key(|p| p.0);
        let s = loglog_slope(pts);
        if !(-1.2..=-0.8).contains(&s) {
            bad_slope.push(key.clone());
        }
        if !(pts.last().expect("non-empty").1 < pts[0].1) {
            bad_trend.push(key.clone());
        }
        slopes.insert(key.clone(), s);
    }
    let p = i.t("pointwise.csv");
    let std_err = p.num("standardized_error")?;
    let worst = max_of(std_err.iter().copied());
    let worst_z = max_of(p.num("max_abs_z")?);
    let (time_ok, runtime) = within_budget(i, "verify-gradients", 300.0);
    let pass = !cells.is_empty() && bad_slope.is_empty() && bad_trend.is_empty() && !std_err.is_empty() && worst <= 4.0 && time_ok;
    Ok((
        pass,
        json!({
            "cells": cells.len(),
            "slope_min": min_of(slopes.values().copied()),
            "slope_max": max_of(slopes.values().copied()),
            "slope_out_of_range": bad_slope,
            "not_decreasing": bad_trend,
            "pointwise_estimates": std_err.len(),
            "max_standardized_error": worst,
            "max_abs_component_z": worst_z,
            "runtime": runtime,
        }),
    ))
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn c10(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("sgd.csv");
    let (seeds, kinds, steps) = (t.text("seed")?, t.text("kind")?, t.num("step")?);
    let (err, kappa) = (t.num("err_sq")?, t.num("kappa")?);
    let mut last: BTreeMap<(&str, &str), (f64, f64)> = BTreeMap::new();
    let mut at: BTreeMap<(&str, u64), [f64; 2]> = BTreeMap::new();
    for r in 0..t.len() {
        let e = last.entry((kinds[r], seeds[r])).or_insert((f64::NEG_INFINITY, f64::NAN));
        if steps[r] >= e.0 {
            *e = (steps[r], err[r]);
        }
        let slot = match kinds[r] {
            "l2" => 0,
            "h1" => 1,
            _ => continue,
        };
        at.entry((seeds[r], steps[r] as u64)).or_insert([f64::NAN; 2])[slot] = kappa[r];
    }
    let finals = |kind: &str| median(last.iter().filter(|((k, _), _)| *k == kind).map(|(_, v)| v.1).collect());
    let (med_l2, med_h1) = (finals("l2"), finals("h1"));
    let (mut matched, mut violations) = (0usize, 0usize);
    for [kl, kh] in at.values() {
        if kl.is_finite() && kh.is_finite() {
            matched += 1;
            if kh > kl {
                violations += 1;
            }
        }
    }
    let seeds_n = last.keys().map(|(_, s)| *s).collect::<std::collections::BTreeSet<_>>().len();
    let (time_ok, runtime) = within_budget(i, "sgd", 120.0);
    let pass = med_h1 < med_l2 && matched > 0 && violations == 0 && time_ok;
    Ok((
        pass,
        json!({
            "seeds": seeds_n,
            "median_final_err_sq_l2": med_l2,
            "median_final_err_sq_h1": med_h1,
            "matched_kappa_steps": matched,
            "kappa_violations": violations,
            "runtime": runtime,
        }),
    ))
}

fn c11(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("linear.csv");
    let (lambda, kl, kh) = (t.num("lambda")?, t.num("kappa_l2")?, t.num("kappa_h1")?);
    let (vl, vh, fl, fh) = (t.num("var_l2")?, t.num("var_h1")?, t.num("formula_l2")?, t.num("formula_h1")?);
    let mut kappa_bad = 0usize;
    let mut order_bad = 0usize;
    let (mut dev_l2, mut dev_h1) = (0.0f64, 0.0f64);
    for r in 0..t.len() {
        if lambda[r] > 0.0 && !(kh[r] < kl[r]) {
            kappa_bad += 1;
        }
        if !(vh[r] < vl[r]) {
            order_bad += 1;
        }
        dev_l2 = max_of([dev_l2, rel(vl[r], fl[r])]);
        dev_h1 = max_of([dev_h1, rel(vh[r], fh[r])]);
    }
    let pass = !t.is_empty() && kappa_bad == 0 && order_bad == 0 && dev_l2 <= 0.03 && dev_h1 <= 0.03;
    Ok((pass, json!({ "rows": t.len(), "kappa_violations": kappa_bad, "max_rel_dev_var_l2": dev_l2, "max_rel_dev_var_h1": dev_h1, "variance_order_violations": order_bad })))
}

fn c12(i: &Inputs) -> CliResult<(bool, Value)> {
    let t = i.t("chebyshev.csv");
    let (n, err, tol) = (t.num("n")?, t.num("max_error")?, t.num("tolerance")?);
    let mut worst_ratio = 0.0f64;
    let mut bad = 0usize;
    let mut checked = 0usize;
    for r in 0..t.len() {
        if n[r] > 20.0 {
            continue;
        }
        checked += 1;
        worst_ratio = max_of([worst_ratio, err[r] / (1e-10 * n[r] * n[r])]);
        if !(err[r] <= tol[r] && err[r] <= 1e-10 * n[r] * n[r]) {
            bad += 1;
        }
    }
    let m = i.t("chebyshev_matrix.csv");
    let (mn, vals) = (m.num("n")?, m.num("value")?);
    let first: Vec<f64> = mn.iter().zip(&vals).filter(|(k, _)| **k == 1.0).map(|(_, v)| *v).collect();
    let exact = first == [0.5, -0.5, 0.5, -0.5];
    let pass = checked > 0 && bad == 0 && exact;
    Ok((pass, json!({ "monomials_checked": checked, "failures": bad, "max_error_over_tolerance": worst_ratio, "n1_matrix": first, "n1_exact": exact })))
}

/// Byte comparison of every CSV present in both directories.
pub fn compare_dirs(a: &Path, b: &Path) -> CliResult<(bool, Value)> {
    let mut names: Vec<String> = Vec::new();
    for entry in fs::read_dir(a).map_err(|e| CliError::io(a, e))? {
        let name = entry.map_err(|e| CliError::io(a, e))?.file_name().to_string_lossy().into_owned();
        if name.ends_with(".csv") && b.join(&name).is_file() {
            names.push(name);
        }
    }
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let read = |p: &Path| fs::read(p.join(n)).map_err(|e| CliError::io(p.join(n), e));
        if read(a)? != read(b)? {
            differing.push(n.clone());
        }
    }
    Ok((!names.is_empty() && differing.is_empty(), json!({ "files_compared": names, "differing": differing })))
}

pub fn summarize(dir: &Path, compare: Option<&Path>) -> CliResult<Report> {
    if !dir.is_dir() {
        return Err(CliError::Validation(format!("{} is not a directory", dir.display())));
    }
    let manifest = fs::read_to_string(dir.join("manifest.json")).ok().and_then(|s| serde_json::from_str(&s).ok()).unwrap_or(Value::Null);
    let mut criteria = Vec::new();
    let mut missing = Vec::new();
    for crit in &CRITERIA {
        let present: Vec<&str> = crit.files.iter().copied().filter(|f| dir.join(f).is_file()).collect();
        if present.len() < crit.files.len() {
            missing.push(MissingCriterion { id: crit.id, title: crit.title, needs: crit.files.iter().copied().filter(|f| !present.contains(f)).collect() });
            continue;
        }
        let mut tables = BTreeMap::new();
        for f in crit.files {
            tables.insert(*f, Table::load(&dir.join(f))?);
        }
        let inputs = Inputs { tables, manifest: manifest.clone() };
        let (pass, measured) = (crit.eval)(&inputs)?;
        criteria.push(CriterionResult { id: crit.id, title: crit.title, pass, measured });
    }
    match compare {
        Some(other) => {
            let (pass, measured) = compare_dirs(dir, other)?;
            criteria.push(CriterionResult { id: 13, title: DETERMINISM, pass, measured });
        }
        None => missing.push(MissingCriterion { id: 13, title: DETERMINISM, needs: vec!["--compare <dir>"] }),
    }
    let passed = criteria.iter().filter(|c| c.pass).count();
    let report = Report { version: env!("CARGO_PKG_VERSION"), passed, failed: criteria.len() - passed, criteria, missing };
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir_is_all_missing() {
        let dir = tempfile::tempdir().unwrap();
        let r = summarize(dir.path(), None).unwrap();
        assert!(r.criteria.is_empty());
        assert_eq!(r.missing.iter().map(|m| m.id).collect::<Vec<_>>(), (1..=13).collect::<Vec<u8>>());
        assert!(dir.path().join("report.json").is_file());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }

    #[test]
    fn nan_poisons_extremes() {
        assert!(max_of([1.0, f64::NAN, 0.0]).is_nan());
        assert_eq!(min_of([1.0, -2.0]), -2.0);
    }

    #[test]
    fn malformed_numbers_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("linear.csv"), "design_id,lambda\r\n0,abc\r\n").unwrap();
        let t = Table::load(&dir.path().join("linear.csv")).unwrap();
        assert!(matches!(t.num("lambda"), Err(CliError::Malformed { .. })));
        assert!(t.num("kappa_l2").is_err());
    }
}
