use crate::config::{Config, Solver, Task};
use anyhow::{bail, Context, Result};
use pauli_core::birman_schwinger::{
    ab_identity_residual, bs_bound_state, exponent_forms, pauli_c2, u_expansion, BsOutcome, PotentialFamily, REGULARITY_DELTA,
    ZERO_MEAN_TOL,
};
use pauli_core::field::{flux, FieldProfile};
use pauli_core::numerics::eigen::EigenOptions;
use pauli_core::planar::{assemble_pauli, lowest_spectrum, write_density_csv, PlanarGrid, PlanarGridParams};
use pauli_core::radial::{radial_bound_states, weak_coupling_sweep, RadialOperatorSpec, MAX_LN_ENERGY};
use pauli_core::zero_modes::{
    ac_decay_exponent, certificate_scan, conjugate_field_moment, conjugate_supersymmetry_residual, field_moment_positivity,
    integer_part_of_flux, supersymmetry_residual, KAPPA_LADDER, KAPPA_R_FLOOR, NEGATIVE_TOL,
};
use pauli_core::Spin;
use serde_json::{json, Value};

/// A CSV-shaped table; cells are already formatted.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct TaskOutput {
    pub outputs: Value,
    pub tolerances: Value,
    pub tables: Vec<Table>,
    /// Extra files (name, contents), e.g. density dumps.
    pub files: Vec<(String, Vec<u8>)>,
}

impl TaskOutput {
    fn new(outputs: Value, tolerances: Value) -> Self {
        Self { outputs, tolerances, tables: vec![], files: vec![] }
    }
}

/// Shortest round-trip decimal form; empty for missing values.
pub fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn spin_key(s: Spin) -> &'static str {
    match s {
        Spin::Minus => "minus",
        Spin::Plus => "plus",
    }
}

pub fn run(task: Task, cfg: &Config, profile: &FieldProfile, seed: u64) -> Result<TaskOutput> {
    match task {
        Task::Flux => flux_task(profile),
        Task::Spectrum => spectrum_task(cfg, profile, seed),
        Task::Certify => certify_task(cfg, profile),
        Task::Sweep => sweep_task(cfg, profile),
        Task::Bs => bs_task(cfg, profile),
        Task::Identity => identity_task(cfg, profile),
        Task::Zeromodes => zeromodes_task(profile),
    }
}

fn flux_task(profile: &FieldProfile) -> Result<TaskOutput> {
    let fd = flux(profile).context("flux")?;
    let outputs = json!({
        "flux": fd.f,
        "n": fd.n,
        "eps_frac": fd.eps_frac,
        "integer_part": integer_part_of_flux(profile)?,
        "quadrature_error": fd.error,
        "flipped": fd.flipped,
        "support_radius": finite(profile.support_radius()),
    });
    Ok(TaskOutput::new(outputs, json!({})))
}

fn planar_params(cfg: &Config, profile: &FieldProfile) -> PlanarGridParams {
    let rs = profile.support_radius();
    let n = &cfg.numerics;
    let (h0, hw0) = if rs.is_finite() && rs > 0.0 { (rs / 40.0, 10.0 * rs) } else { (0.1, 20.0) };
    PlanarGridParams::graded_for(profile, n.planar_h.unwrap_or(h0), n.planar_half_width.unwrap_or(hw0), n.planar_growth.unwrap_or(1.08))
}

fn eigen_options(cfg: &Config, seed: u64) -> EigenOptions {
    let mut o = EigenOptions { seed, ..EigenOptions::default() };
    if let Some(t) = cfg.numerics.eigen_tol {
        o.tol = t;
    }
    o
}

fn spectrum_task(cfg: &Config, profile: &FieldProfile, seed: u64) -> Result<TaskOutput> {
    let ph = &cfg.physics;
    let solver = cfg.numerics.solver.unwrap_or(if profile.is_radial() { Solver::Radial } else { Solver::Planar });
    let mut table = Table { name: "spectrum".into(), header: vec!["lambda", "spin", "ell", "index", "energy"], rows: vec![] };
    let mut runs = Vec::new();
    let mut total = 0usize;
    let mut min_e = f64::INFINITY;
    let mut files = Vec::new();
    let opts = eigen_options(cfg, seed);
    for &spin in &ph.spins {
        for lambda in ph.lambda_list() {
            match solver {
                Solver::Radial => {
                    for ell in ph.ell_min..=ph.ell_max {
                        let mut spec = RadialOperatorSpec::new(profile, ph.g, lambda, ell, spin);
                        if let Some(r) = cfg.numerics.radial_r_max {
                            spec.r_max = r;
                        }
                        if let Some(n) = cfg.numerics.radial_n {
                            spec.n = n;
                        }
                        let res = radial_bound_states(&spec).with_context(|| format!("radial solve ℓ = {ell}, λ = {lambda}"))?;
                        for (k, e) in res.eigenvalues.iter().enumerate() {
                            table.rows.push(vec![num(Some(lambda)), spin.to_string(), ell.to_string(), k.to_string(), num(Some(*e))]);
                            min_e = min_e.min(*e);
                        }
                        total += res.negative_count;
                        runs.push(json!({
                            "lambda": lambda, "spin": spin_key(spin), "ell": ell,
                            "eigenvalues": res.eigenvalues, "negative_count": res.negative_count,
                            "truncation_warning": res.truncation_warning, "r_max": spec.r_max,
                        }));
                    }
                }
                Solver::Planar => {
                    let params = planar_params(cfg, profile);
                    let op = assemble_pauli(profile, ph.g, lambda, spin, &params).context("planar assembly")?;
                    let k = cfg.numerics.eigenvalues.unwrap_or(6).min(op.grid.dim());
                    let sp = lowest_spectrum(&op, k, &opts).with_context(|| format!("planar solve λ = {lambda}"))?;
                    for (i, e) in sp.eigenvalues.iter().enumerate() {
                        table.rows.push(vec![num(Some(lambda)), spin.to_string(), String::new(), i.to_string(), num(Some(*e))]);
                        min_e = min_e.min(*e);
                    }
                    total += sp.negative_count;
                    if cfg.output.dump_eigenvectors {
                        let mut buf = Vec::new();
                        write_density_csv(&op, &sp.eigenvectors[0], &mut buf)?;
                        files.push((format!("density_{}_{lambda}.csv", spin_key(spin)), buf));
                    }
                    runs.push(json!({
                        "lambda": lambda, "spin": spin_key(spin),
                        "eigenvalues": sp.eigenvalues, "residuals": sp.residuals,
                        "negative_count": sp.negative_count, "boundary_leak": sp.boundary_leak,
                        "unknowns": op.grid.dim(), "h": params.h, "half_width": params.half_width,
                    }));
                }
            }
        }
    }
    let outputs = json!({
        "solver": match solver { Solver::Radial => "radial", Solver::Planar => "planar" },
        "negative_count": total,
        "min_eigenvalue": finite(min_e),
        "runs": runs,
    });
    let tol = json!({ "eigen_tol": opts.tol, "eigen_tol_source": "EigenOptions::tol (numerics.eigen_tol)" });
    let mut out = TaskOutput::new(outputs, tol);
    out.tables.push(table);
    out.files = files;
    Ok(out)
}

fn certify_task(cfg: &Config, profile: &FieldProfile) -> Result<TaskOutput> {
    let ph = &cfg.physics;
    let mut table = Table {
        name: "certificate".into(),
        header: vec!["lambda", "spin", "count_lower_bound", "required", "kappa_star", "eps_star"],
        rows: vec![],
    };
    let mut runs = Vec::new();
    let mut least = usize::MAX;
    for &spin in &ph.spins {
        for lambda in ph.lambda_list() {
            let c = certificate_scan(&profile.scaled(lambda), ph.g, spin).with_context(|| format!("certificate at λ = {lambda}"))?;
            least = least.min(c.count_lower_bound);
            table.rows.push(vec![
                num(Some(lambda)),
                spin.to_string(),
                c.count_lower_bound.to_string(),
                c.required.to_string(),
                num(Some(c.kappa_star)),
                num(Some(c.eps_star)),
            ]);
            runs.push(json!({
                "lambda": lambda, "spin": spin_key(spin),
                "count_lower_bound": c.count_lower_bound, "required": c.required,
                "kappa_star": c.kappa_star, "eps_star": c.eps_star,
                "eigenvalues": c.eigenvalues, "diagnostics": c.diagnostics(),
            }));
        }
    }
    let outputs = json!({ "count_lower_bound": least, "runs": runs });
    let tol = json!({
        "negative_tol": NEGATIVE_TOL, "negative_tol_source": "relative to max |eigenvalue| of the pencil",
        "kappa_ladder": KAPPA_LADDER, "kappa_r_floor": KAPPA_R_FLOOR,
    });
    let mut out = TaskOutput::new(outputs, tol);
    out.tables.push(table);
    Ok(out)
}

fn sweep_header() -> Vec<&'static str> {
    vec!["lambda", "spin", "energy", "u", "u_pred", "ratio"]
}

fn sweep_task(cfg: &Config, profile: &FieldProfile) -> Result<TaskOutput> {
    let ph = &cfg.physics;
    let mut table = Table { name: "sweep".into(), header: sweep_header(), rows: vec![] };
    let mut runs = Vec::new();
    let mut a2 = 0.0;
    for &spin in &ph.spins {
        let rep = weak_coupling_sweep(profile, ph.g, spin, &ph.lambda_list()).context("weak-coupling sweep")?;
        a2 = rep.a2_radial;
        for r in &rep.rows {
            table.rows.push(vec![num(Some(r.lambda)), spin.to_string(), r.energy_text(), num(r.u), num(Some(r.u_pred)), num(r.ratio)]);
            runs.push(json!({
                "lambda": r.lambda, "spin": spin_key(spin), "ln_neg_energy": r.ln_neg_energy,
                "energy": r.energy_text(), "u": r.u, "u_pred": r.u_pred, "ratio": r.ratio, "ln_r_max": r.ln_r_max,
            }));
        }
    }
    let outputs = json!({ "a2_radial": a2, "rows": runs });
    let tol = json!({ "max_ln_energy": MAX_LN_ENERGY, "bisection": "ln κ to 1e-13 relative" });
    let mut out = TaskOutput::new(outputs, tol);
    out.tables.push(table);
    Ok(out)
}

fn bs_task(cfg: &Config, profile: &FieldProfile) -> Result<TaskOutput> {
    let ph = &cfg.physics;
    let n = &cfg.numerics;
    let bracket = (n.kappa_min.unwrap_or(1e-6), n.kappa_max.unwrap_or(50.0));
    if bracket.0 >= bracket.1 {
        bail!("numerics.kappa_min: must be below kappa_max");
    }
    let mut table = Table { name: "bs".into(), header: sweep_header(), rows: vec![] };
    let mut runs = Vec::new();
    let mut per_spin = serde_json::Map::new();
    for &spin in &ph.spins {
        let fam = PotentialFamily::pauli(profile, ph.g, spin).context("Pauli potential family")?;
        let exp = u_expansion(&fam)?;
        let h = n.bs_h.unwrap_or(fam.extent / 16.0);
        let grid = fam.kernel_grid(h)?;
        per_spin.insert(
            spin_key(spin).into(),
            json!({ "c1": exp.c1, "c2": exp.c2, "regime": exp.regime, "int_v2": exp.int_v2, "log_pair_v1": exp.log_pair_v1,
                    "nodes": grid.len(), "h": h }),
        );
        for lambda in ph.lambda_list() {
            let v = fam.at(lambda);
            let outcome = bs_bound_state(&v, &grid, bracket).with_context(|| format!("BS bisection at λ = {lambda}"))?;
            let energy = match outcome {
                BsOutcome::Bound { energy, .. } => Some(energy),
                BsOutcome::NoBoundStateInBracket { .. } => None,
            };
            let u = energy.map(|e| 2.0 / (-e).ln());
            let u_pred = exp.u(lambda);
            let ratio = u.map(|u| u / u_pred);
            table.rows.push(vec![num(Some(lambda)), spin.to_string(), num(energy), num(u), num(Some(u_pred)), num(ratio)]);
            runs.push(json!({ "lambda": lambda, "spin": spin_key(spin), "outcome": outcome, "u": u, "u_pred": u_pred, "ratio": ratio }));
        }
    }
    let outputs = json!({ "pauli_c2": pauli_c2(profile, ph.g).ok(), "expansion": per_spin, "rows": runs });
    let tol = json!({
        "zero_mean_tol": ZERO_MEAN_TOL, "regularity_delta": REGULARITY_DELTA,
        "bisection": "ln κ to 1e-8", "kappa_bracket": [bracket.0, bracket.1],
    });
    let mut out = TaskOutput::new(outputs, tol);
    out.tables.push(table);
    Ok(out)
}

fn identity_task(cfg: &Config, profile: &FieldProfile) -> Result<TaskOutput> {
    let r = ab_identity_residual(profile).context("identity")?;
    let forms = if profile.is_radial() {
        let f = exponent_forms(profile, cfg.physics.g, cfg.physics.lambda)?;
        json!({ "radial": f.radial, "planar": f.planar, "rel_gap": f.rel_gap })
    } else {
        Value::Null
    };
    let outputs = json!({ "lhs": r.lhs, "rhs": r.rhs, "rel_gap": r.rel_gap, "exponent_forms": forms });
    Ok(TaskOutput::new(outputs, json!({})))
}

fn zeromodes_task(profile: &FieldProfile) -> Result<TaskOutput> {
    let n = integer_part_of_flux(profile)?;
    let f = flux(profile)?.f;
    let mut modes = Vec::new();
    for j in 0..=n as u32 {
        let e = ac_decay_exponent(profile, j)?;
        modes.push(json!({ "j": j, "decay_exponent": e, "square_integrable": e < -1.0 }));
    }
    let rs = profile.support_radius();
    let mut residuals = Vec::new();
    if rs.is_finite() && rs > 0.0 {
        for h in [rs / 20.0, rs / 40.0] {
            let grid = PlanarGrid::new(&PlanarGridParams::uniform(h, 1.5 * rs))?;
            let r: Vec<f64> = (0..n as u32).map(|j| supersymmetry_residual(profile, j, &grid)).collect::<pauli_core::Result<_>>()?;
            let conj = if f == 0.0 { Some(conjugate_supersymmetry_residual(profile, &grid)?) } else { None };
            residuals.push(json!({ "h": h, "modes": r, "conjugate": conj }));
        }
    }
    let moment = field_moment_positivity(profile)?;
    let conj_moment = if f == 0.0 { Some(conjugate_field_moment(profile)?) } else { None };
    let outputs = json!({
        "flux": f, "zero_modes": n, "modes": modes, "residuals": residuals,
        "field_moment_min_eig": moment.min_eig_s, "field_moment_positive": moment.positive,
        "conjugate_field_moment": conj_moment,
    });
    Ok(TaskOutput::new(outputs, json!({})))
}
