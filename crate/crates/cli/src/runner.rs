//! Command implementations: degree certificates, approximation reports,
//! Bott-identity and defect experiments, and degree stabilization runs.
//!
//! Every command writes its artifacts atomically under the output
//! directory, embeds the config hash, version and seed, and prints a
//! one-line summary per instance. Exit codes: 0 success, 1 tolerance
//! failure, 2 boundary hit, 3 method disagreement.

use std::fmt::Write as _;
use std::path::PathBuf;

use bottdeg_core::approx::{
    build_net_subspace, check_fin_appro, equivariance_defect, projection_error_at,
    sobolev_model_stages, BallSampler, FinApproProbe, FinApproTolerances, ShiftAction,
    SobolevModelConfig,
};
use bottdeg_core::bott::{
    asymptotic_commutativity_defect, bott_element, pullback, DefectProbe, ProperNonlinearMap,
    TensorGrid, TestFunctionSuite,
};
use bottdeg_core::degree::{
    degree_homotopy_linear, degree_root_count, degree_winding_2d, DegreeCertificate, DegreeError,
    NewtonConfig, WindingConfig,
};
use bottdeg_core::models;
use nalgebra::DVector;
use bottdeg_core::Complex64;

use crate::config::{output_dir, write_atomic, FlatConfig};
use crate::formats::{certificate_json, rejection_json};
use crate::registry;

/// Exit code and summary lines of a command run.
pub struct CommandOutcome {
    /// Process exit code.
    pub exit: i32,
    /// One line per instance/check.
    pub summary: Vec<String>,
    /// Files written.
    pub files: Vec<PathBuf>,
}

impl CommandOutcome {
    fn new() -> Self {
        Self {
            exit: 0,
            summary: Vec::new(),
            files: Vec::new(),
        }
    }

    fn degrade(&mut self, exit: i32) {
        // keep the most severe verdict: 2 and 3 beat 1, nothing beats them
        self.exit = match (self.exit, exit) {
            (0, e) => e,
            (cur, 0) => cur,
            (1, e) => e,
            (cur, _) => cur,
        };
    }
}

fn summary_line(out: &mut CommandOutcome, line: String) {
    println!("{line}");
    out.summary.push(line);
}

fn csv_write(path: &PathBuf, header: &str, rows: &[String]) -> Result<(), String> {
    let mut body = String::from(header);
    body.push('\n');
    for row in rows {
        body.push_str(row);
        body.push('\n');
    }
    write_atomic(path, &body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn target_vector(cfg: &FlatConfig, dim: usize) -> Result<DVector<f64>, String> {
    match cfg.f64_list("target")? {
        None => Ok(DVector::zeros(dim)),
        Some(values) => {
            if values.len() != dim {
                return Err(format!(
                    "target has {} entries, expected {dim}",
                    values.len()
                ));
            }
            Ok(DVector::from_vec(values))
        }
    }
}

/// `degree`: certificates by the requested engines, cross-checked when more
/// than one applies.
pub fn cmd_degree(cfg: &FlatConfig) -> Result<CommandOutcome, String> {
    let mut out = CommandOutcome::new();
    let hash = cfg.hash();
    let seed = cfg.seed()?;
    let dir = output_dir(cfg);
    let radius = cfg.f64_value("radius")?.unwrap_or(3.0);
    let method = cfg.get("method").unwrap_or("all").to_string();
    let grid = cfg.usize_value("grid")?;

    let inst = registry::degree_instance(cfg)?;
    let target = target_vector(cfg, inst.dim)?;

    let mut produced: Vec<(String, DegreeCertificate)> = Vec::new();
    let record = |out: &mut CommandOutcome,
                      label: &str,
                      engine: &str,
                      result: Result<DegreeCertificate, DegreeError>,
                      produced: &mut Vec<(String, DegreeCertificate)>|
     -> Result<(), String> {
        let path = dir.join(format!("degree_{label}_{engine}.json"));
        match result {
            Ok(cert) => {
                let doc = certificate_json(&cert, &hash, seed);
                let json = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
                write_atomic(&path, &json).map_err(|e| e.to_string())?;
                summary_line(
                    out,
                    format!(
                        "degree map={label} method={engine} degree={} radius={radius}",
                        cert.degree
                    ),
                );
                out.files.push(path);
                produced.push((engine.to_string(), cert));
            }
            Err(err) => {
                let doc = rejection_json(&err, &hash, seed);
                let json = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
                write_atomic(&path, &json).map_err(|e| e.to_string())?;
                summary_line(
                    out,
                    format!("degree map={label} method={engine} rejected: {err}"),
                );
                out.files.push(path);
                out.degrade(if matches!(err, DegreeError::BoundaryHit { .. }) {
                    2
                } else {
                    1
                });
            }
        }
        Ok(())
    };

    let want = |name: &str| method == "all" || method == name;
    if want("root") {
        let mut ncfg = NewtonConfig {
            seed,
            ..NewtonConfig::default()
        };
        if let Some(g) = grid {
            ncfg.seeds_per_axis = g;
        }
        let result = degree_root_count(&inst.map, radius, &target, &ncfg);
        record(&mut out, &inst.label, "root", result, &mut produced)?;
    }
    if want("winding") && inst.dim == 2 {
        let result = degree_winding_2d(&inst.map, radius, &target, &WindingConfig::default());
        record(&mut out, &inst.label, "winding", result, &mut produced)?;
    } else if method == "winding" && inst.dim != 2 {
        return Err(format!("winding oracle needs dimension 2, map has {}", inst.dim));
    }
    if want("homotopy") {
        match registry::homotopy_instance(cfg) {
            Ok((kind, family)) => {
                let result =
                    degree_homotopy_linear(&family, radius, &target, 100, 360, 1e-6, seed);
                let engine = format!("homotopy-{kind}");
                record(&mut out, &inst.label, &engine, result, &mut produced)?;
            }
            Err(e) if method == "homotopy" => return Err(e),
            Err(_) => {} // no family registered; skip under method=all
        }
    }

    if produced.len() > 1 {
        let first = produced[0].1.degree;
        if produced.iter().any(|(_, c)| c.degree != first) {
            let mut line = String::from("degree cross-check disagreement:");
            for (m, c) in &produced {
                let _ = write!(line, " {m}={}", c.degree);
            }
            summary_line(&mut out, line);
            out.degrade(3);
        }
    }
    if produced.is_empty() && out.exit == 0 {
        return Err("no engine applicable to this instance".into());
    }
    Ok(out)
}

/// `approximate`: the net builder, the finite-approximability profiles and
/// the equivariance defects of the block Sobolev model.
pub fn cmd_approximate(cfg: &FlatConfig) -> Result<CommandOutcome, String> {
    let mut out = CommandOutcome::new();
    let hash = cfg.hash();
    let seed = cfg.seed()?;
    let dir = output_dir(cfg);
    let samples = cfg.usize_value("samples")?.unwrap_or(200);
    let mut rows: Vec<String> = Vec::new();
    let pass;

    if cfg.get("control") == Some("frozen") {
        // stages frozen at a fixed subspace: the density profile stalls
        let entries = vec![1.0; 4];
        let stages = models::diagonal_coordinate_stages(&entries, &[2, 2, 2], 2.0, 1.0);
        let ambient = ProperNonlinearMap::identity(4);
        let probe = FinApproProbe {
            samples,
            seed,
            ..FinApproProbe::default()
        };
        let report = check_fin_appro(&stages, &ambient, &probe).map_err(|e| e.to_string())?;
        for (i, d) in report.density_residuals.iter().enumerate() {
            rows.push(format!("density,{i},,{d}"));
        }
        pass = report.passes(&FinApproTolerances::default());
        summary_line(
            &mut out,
            format!(
                "approximate control=frozen density_final={:.3e} pass={pass}",
                report.density_residuals.last().unwrap()
            ),
        );
    } else {
        let blocks = cfg.usize_value("l")?.unwrap_or(2);
        let order = cfg.usize_value("order")?.unwrap_or(1) as i32;
        let n_sequence = cfg
            .usize_list("n")?
            .unwrap_or_else(|| vec![1, 2, 3, 4]);
        let model_cfg = SobolevModelConfig {
            blocks,
            order,
            n_sequence,
            probe_freq: None,
            s_base: 2.0,
            sampler: BallSampler::new(300, seed.wrapping_add(11)),
        };
        let model = sobolev_model_stages(&model_cfg).map_err(|e| e.to_string())?;
        let probe = FinApproProbe {
            samples,
            seed,
            ..FinApproProbe::default()
        };
        let report =
            check_fin_appro(&model.stages, &model.ambient, &probe).map_err(|e| e.to_string())?;
        for (i, d) in report.density_residuals.iter().enumerate() {
            rows.push(format!("density,{i},,{d}"));
        }
        for (i, m) in report.ball_margins.iter().enumerate() {
            rows.push(format!("ball_margin,{i},,{m}"));
        }
        for (i0, profile) in report.convergence.iter().enumerate() {
            for (j, v) in profile.iter().enumerate() {
                rows.push(format!("convergence,{i0},{},{v}", i0 + j));
            }
        }
        for (i0, profile) in report.linear_deviation.iter().enumerate() {
            for (j, v) in profile.iter().enumerate() {
                rows.push(format!("linear_deviation,{i0},{},{v}", i0 + j));
            }
        }
        rows.push(format!("norm_ratio,,,{}", report.norm_ratio));
        let fin_ok = report.passes(&FinApproTolerances::default());

        let action = ShiftAction::cyclic_blocks(blocks, model.chart.dim());
        let defects = equivariance_defect(
            &model.stages,
            &action,
            &BallSampler::new(samples, seed.wrapping_add(23)),
        )
        .map_err(|e| e.to_string())?;
        let equi_ok = defects.iter().all(|&d| d <= 1e-9);
        for (i, d) in defects.iter().enumerate() {
            rows.push(format!("equivariance,{i},,{d}"));
        }

        let mut net_ok = true;
        if let Some(kmax) = cfg.usize_value("kmax")? {
            let delta0 = cfg.f64_value("delta0")?.unwrap_or(0.05);
            let net_radius = cfg.f64_value("net-radius")?.unwrap_or(1.0);
            let map = models::sobolev_stage_map(1, order, kmax);
            let report = build_net_subspace(
                &map,
                net_radius,
                delta0,
                &BallSampler::new(2500, seed.wrapping_add(31)),
                10_000,
            )
            .map_err(|e| e.to_string())?;
            let held_out: Vec<DVector<f64>> = BallSampler::new(200, seed.wrapping_add(4242))
                .sample_ball(map.dim_source(), net_radius);
            let err = projection_error_at(&map, &report.subspace, &held_out);
            net_ok = err <= delta0 + 0.01;
            rows.push(format!("net_size,,,{}", report.net_points.len()));
            rows.push(format!("net_dim,,,{}", report.subspace.dim()));
            rows.push(format!("net_coverage,,,{}", report.coverage_radius));
            rows.push(format!("net_heldout_error,,,{err}"));
            summary_line(
                &mut out,
                format!(
                    "approximate net kmax={kmax} size={} dim={} coverage={:.4} heldout={:.4} pass={net_ok}",
                    report.net_points.len(),
                    report.subspace.dim(),
                    report.coverage_radius,
                    err
                ),
            );
        }

        pass = fin_ok && equi_ok && net_ok;
        summary_line(
            &mut out,
            format!(
                "approximate map=sobolev blocks={blocks} stages={} finappro={fin_ok} equivariance={equi_ok} pass={pass}",
                model.stages.len()
            ),
        );
    }

    rows.push(format!("meta,config_hash,,{hash}"));
    rows.push(format!("meta,version,,{}", env!("CARGO_PKG_VERSION")));
    rows.push(format!("meta,seed,,{seed}"));
    let path = dir.join("approximate_report.csv");
    csv_write(&path, "record,i,j,value", &rows)?;
    out.files.push(path);
    if !pass {
        out.degrade(1);
    }
    Ok(out)
}

fn standard_four() -> Vec<(&'static str, fn(f64) -> Complex64)> {
    vec![
        ("gauss", |t| Complex64::new((-t * t).exp(), 0.0)),
        ("t_gauss", |t| Complex64::new(t * (-t * t).exp(), 0.0)),
        ("t2_gauss", |t| {
            Complex64::new(t * t * (-t * t).exp(), 0.0)
        }),
        ("bump2", |t| {
            Complex64::new(bottdeg_core::bott::bump(t, 2.0), 0.0)
        }),
    ]
}

/// `bott`: the pullback identity F*(β(f)) = β_F(f) at two grid densities
/// for a nonlinear instance, or the commutativity-defect profile for a
/// diagonal control family.
pub fn cmd_bott(cfg: &FlatConfig) -> Result<CommandOutcome, String> {
    let mut out = CommandOutcome::new();
    let hash = cfg.hash();
    let seed = cfg.seed()?;
    let dir = output_dir(cfg);
    let mut rows: Vec<String> = Vec::new();
    let mut pass = true;
    let map_name = cfg.get("map").unwrap_or("cubic2").to_string();

    if map_name == "inverse-square" || map_name == "dilation" || cfg.get("diag").is_some() {
        // commutativity defect over coordinate-prefix stage triples
        let entries = registry::diagonal_entries(cfg)?;
        let tol = cfg.f64_value("tol")?.unwrap_or(0.05);
        let dims: Vec<usize> = (1..=entries.len()).collect();
        let stages = models::diagonal_coordinate_stages(&entries, &dims, 2.0, 1.0);
        let suite = TestFunctionSuite::standard();
        let probe = DefectProbe {
            seed,
            ..DefectProbe::default()
        };
        let mut last = f64::INFINITY;
        for a in 0..stages.len().saturating_sub(2) {
            let defect =
                asymptotic_commutativity_defect(&stages, &suite, (a, a + 1, a + 2), &probe)
                    .map_err(|e| e.to_string())?;
            rows.push(format!("commutativity_defect,{a},,{defect}"));
            last = defect;
        }
        pass = last <= tol;
        summary_line(
            &mut out,
            format!("bott map={map_name} final_defect={last:.4} tol={tol} pass={pass}"),
        );
    } else {
        let inst = registry::degree_instance(cfg)?;
        if inst.dim != 2 {
            return Err("bott identity experiment is wired for planar instances".into());
        }
        let tol_abs = cfg.f64_value("tol")?.unwrap_or(1e-9);
        let coarse_n = cfg.usize_value("grid")?.unwrap_or(17);
        let fine_n = 2 * coarse_n - 1;
        let mut worst: Vec<(f64, f64)> = Vec::new(); // (residual, tolerance) per density
        for (di, density) in [coarse_n, fine_n].iter().enumerate() {
            let mut worst_res = 0.0f64;
            let mut worst_tol = 0.0f64;
            for (name, f) in standard_four() {
                let target_grid = TensorGrid::uniform(2.0, 5, 2.4, *density, 2);
                let source_grid = TensorGrid::uniform(2.0, 5, 1.0, 17, 2);
                let beta = bott_element(f, &ProperNonlinearMap::identity(2), target_grid)
                    .map_err(|e| e.to_string())?;
                let interp_tol = beta.interpolation_tolerance().map_err(|e| e.to_string())?;
                let lhs =
                    pullback(&inst.map, &beta, source_grid.clone()).map_err(|e| e.to_string())?;
                let rhs = bott_element(f, &inst.map, source_grid).map_err(|e| e.to_string())?;
                let residual = lhs.sup_distance(&rhs).map_err(|e| e.to_string())?;
                let ok = residual <= tol_abs + 10.0 * interp_tol;
                pass &= ok;
                rows.push(format!(
                    "pullback_identity,{name},{density},{residual:.6e} tol={interp_tol:.6e} pass={ok}"
                ));
                worst_res = worst_res.max(residual);
                worst_tol = worst_tol.max(interp_tol);
            }
            worst.push((worst_res, worst_tol));
            let _ = di;
        }
        // the residual must shrink under refinement unless it is already at
        // the exactness floor
        if worst[0].0 > 1e-12 {
            let shrunk = worst[1].0 < worst[0].0;
            pass &= shrunk;
            rows.push(format!(
                "refinement,{},{},{}",
                coarse_n,
                fine_n,
                worst[0].0 / worst[1].0.max(1e-300)
            ));
        }
        summary_line(
            &mut out,
            format!(
                "bott map={} residual_coarse={:.3e} residual_fine={:.3e} pass={pass}",
                inst.label, worst[0].0, worst[1].0
            ),
        );
    }

    rows.push(format!("meta,config_hash,,{hash}"));
    rows.push(format!("meta,version,,{}", env!("CARGO_PKG_VERSION")));
    rows.push(format!("meta,seed,,{seed}"));
    let path = dir.join(format!("bott_{map_name}.csv"));
    csv_write(&path, "record,label,density,value", &rows)?;
    out.files.push(path);
    if !pass {
        out.degrade(1);
    }
    Ok(out)
}

/// `stabilize`: per-stage degrees across an approximation family, with the
/// eventual-constancy verdict.
pub fn cmd_stabilize(cfg: &FlatConfig) -> Result<CommandOutcome, String> {
    let mut out = CommandOutcome::new();
    let hash = cfg.hash();
    let seed = cfg.seed()?;
    let dir = output_dir(cfg);
    let map_name = cfg.get("map").unwrap_or("sobolev").to_string();
    let mut rows: Vec<String> = Vec::new();
    let mut degrees: Vec<(String, Option<i64>)> = Vec::new();

    match map_name.as_str() {
        "sobolev" => {
            let blocks = cfg.usize_value("l")?.unwrap_or(2);
            let order = cfg.usize_value("order")?.unwrap_or(1) as i32;
            let freqs = cfg.usize_list("n")?.unwrap_or_else(|| vec![1, 2]);
            for (i, &freq) in freqs.iter().enumerate() {
                let family = models::sobolev_stage_homotopy(blocks, order, freq);
                let radius = 1.3 * models::sobolev_spurious_shell(blocks, order, freq);
                let dim = family.dim;
                let result =
                    degree_homotopy_linear(&family, radius, &DVector::zeros(dim), 80, 500, 1e-3, seed);
                match result {
                    Ok(cert) => {
                        rows.push(format!(
                            "stage,{i},{dim},homotopy,{},radius={radius:.3}",
                            cert.degree
                        ));
                        degrees.push((format!("n={freq}"), Some(cert.degree)));
                    }
                    Err(e) => {
                        rows.push(format!("stage,{i},{dim},homotopy,,error={e}"));
                        degrees.push((format!("n={freq}"), None));
                    }
                }
                if i == 0 {
                    // root-count spot check inside the clean window
                    let map = models::sobolev_stage_map(blocks, order, freq);
                    let ncfg = NewtonConfig {
                        seeds_per_axis: 5,
                        max_dim: 8,
                        seed,
                        ..NewtonConfig::default()
                    };
                    match degree_root_count(&map, 3.0, &DVector::zeros(dim), &ncfg) {
                        Ok(cert) => {
                            rows.push(format!(
                                "spot_check,{i},{dim},root_count,{},radius=3",
                                cert.degree
                            ));
                            if degrees[0].1 != Some(cert.degree) {
                                out.degrade(3);
                            }
                        }
                        Err(e) => {
                            rows.push(format!("spot_check,{i},{dim},root_count,,error={e}"));
                            out.degrade(1);
                        }
                    }
                }
            }
        }
        "cyclic" => {
            let ls = cfg.usize_list("l-range")?.unwrap_or_else(|| vec![1, 2, 3, 4]);
            let radius = cfg.f64_value("radius")?.unwrap_or(3.0);
            let ncfg = NewtonConfig {
                seed,
                ..NewtonConfig::default()
            };
            for &l in &ls {
                let map = models::cyclic(l);
                match degree_root_count(&map, radius, &DVector::zeros(l), &ncfg) {
                    Ok(cert) => {
                        rows.push(format!("stage,{l},{l},root_count,{},", cert.degree));
                        degrees.push((format!("l={l}"), Some(cert.degree)));
                    }
                    Err(e) => {
                        rows.push(format!("stage,{l},{l},root_count,,error={e}"));
                        degrees.push((format!("l={l}"), None));
                    }
                }
            }
        }
        "identity" => {
            let dims = cfg.usize_list("stages")?.unwrap_or_else(|| vec![2, 3, 4, 5]);
            let ncfg = NewtonConfig {
                seed,
                ..NewtonConfig::default()
            };
            for &d in &dims {
                let map = ProperNonlinearMap::identity(d);
                match degree_root_count(&map, 1.5, &DVector::zeros(d), &ncfg) {
                    Ok(cert) => {
                        rows.push(format!("stage,{d},{d},root_count,{},", cert.degree));
                        degrees.push((format!("dim={d}"), Some(cert.degree)));
                    }
                    Err(e) => {
                        rows.push(format!("stage,{d},{d},root_count,,error={e}"));
                        degrees.push((format!("dim={d}"), None));
                    }
                }
            }
        }
        other => return Err(format!("unknown stabilization model '{other}'")),
    }

    // constancy over the final half of the supplied stages
    let n = degrees.len();
    let half = &degrees[n / 2..];
    let constant = half
        .first()
        .and_then(|(_, d)| *d)
        .filter(|d| half.iter().all(|(_, x)| *x == Some(*d)));
    let seq: Vec<String> = degrees
        .iter()
        .map(|(label, d)| match d {
            Some(d) => format!("{label}:{d}"),
            None => format!("{label}:fail"),
        })
        .collect();
    summary_line(
        &mut out,
        format!(
            "stabilize map={map_name} degrees=[{}] constant_final_half={}",
            seq.join(" "),
            constant.map_or("no".to_string(), |d| d.to_string())
        ),
    );
    rows.push(format!("meta,config_hash,,,{hash}"));
    rows.push(format!("meta,version,,,{}", env!("CARGO_PKG_VERSION")));
    rows.push(format!("meta,seed,,,{seed}"));
    let path = dir.join(format!("stabilize_{map_name}.csv"));
    csv_write(&path, "record,stage,dim,method,degree,detail", &rows)?;
    out.files.push(path);
    if constant.is_none() {
        out.degrade(1);
    }
    Ok(out)
}
