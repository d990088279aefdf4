//! One runner per subcommand: parse + validate the scenario config,
//! dispatch into the core library, write deterministic artifacts.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use slq_core::bcs;
use slq_core::kernels::{self, SpectralDensity, Sign};
use slq_core::laser;
use slq_core::lindblad;
use slq_core::operators::{self, OperatorMatrix, DEFAULT_DIM_CAP};
use slq_core::qhe;

use crate::config::{Config, Section};
use crate::table::{fmt_float, Cell, Table};
use crate::{CliError, OutputFormat, RunArgs};

fn dim_cap() -> Result<usize, CliError> {
    match std::env::var("SLQ_DIM_CAP") {
        Ok(s) => s.parse::<usize>().map_err(|_| {
            CliError::Validation(format!("SLQ_DIM_CAP must be a positive integer, got {s:?}"))
        }),
        Err(_) => Ok(DEFAULT_DIM_CAP),
    }
}

fn write_artifact(args: &RunArgs, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Validation(format!("cannot create {:?}: {e}", args.out)))?;
    let path = args.out.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Validation(format!("cannot write {path:?}: {e}")))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_table(args: &RunArgs, stem: &str, table: &Table) -> Result<PathBuf, CliError> {
    match args.format {
        OutputFormat::Csv => write_artifact(args, &format!("{stem}.csv"), &table.to_csv()),
        OutputFormat::Json => write_artifact(args, &format!("{stem}.json"), &table.to_json()),
    }
}

/// Run closures over grid points with the requested parallelism, preserving
/// input order.
fn run_points<T, F>(points: &[T], jobs: usize, f: F) -> Result<Vec<Result<Vec<Cell>, String>>, CliError>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Cell>, String> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|p| f(p)).collect()))
}

fn nan_row(width: usize, code: &str) -> Vec<Cell> {
    let mut row: Vec<Cell> = std::iter::repeat(Cell::Float(f64::NAN)).take(width).collect();
    row.push(Cell::Str(code.to_string()));
    row
}

// ---------------------------------------------------------------- gamma --

pub fn run_gamma(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[(
        "gamma",
        &[
            "density",
            "orientation",
            "resonance_values",
            "resonance_start",
            "resonance_stop",
            "resonance_count",
        ],
    )])?;
    let sec = cfg.section("gamma")?;
    let density_path = cfg.resolve_path(&sec.str("density")?);
    let text = std::fs::read_to_string(&density_path)
        .map_err(|e| CliError::Validation(format!("cannot read {density_path:?}: {e}")))?;
    let density = SpectralDensity::from_table_str(&text)?;
    let orientation = match sec.str("orientation")?.as_str() {
        "+" | "plus" => Sign::Plus,
        "-" | "minus" => Sign::Minus,
        other => {
            return Err(CliError::Validation(format!(
                "gamma.orientation must be \"+\" or \"-\", got {other:?}"
            )))
        }
    };
    let mut grid = sec.grid("resonance")?;
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let rows = run_points(&grid, args.jobs, |&res| {
        match kernels::gamma(&density, res, orientation) {
            Ok(g) => Ok(vec![
                Cell::Float(res),
                Cell::Float(g.value.re),
                Cell::Float(g.value.im),
                Cell::Str(String::new()),
            ]),
            Err(e) => Err(error_code(&e)),
        }
    })?;

    let mut table = Table::new(&["epsilon_res", "re_gamma", "im_gamma", "error"]);
    for (row, &res) in rows.into_iter().zip(grid.iter()) {
        match row {
            Ok(r) => table.push(r),
            Err(code) => {
                let mut r = nan_row(2, &code);
                r.insert(0, Cell::Float(res));
                table.push(r);
            }
        }
    }
    write_table(args, "gamma", &table)?;
    Ok(())
}

fn error_code(e: &slq_core::Error) -> String {
    match e {
        slq_core::Error::PvEndpointSingularity { .. } => "pv-endpoint".into(),
        slq_core::Error::ResistivitySingular => "resistivity-singular".into(),
        other => format!("{other}").replace(',', ";"),
    }
}

// ------------------------------------------------------------------ qhe --

const QHE_KEYS: &[&str] = &[
    "e_charge",
    "mass",
    "c_light",
    "hbar",
    "b_field",
    "e_field",
    "ratio",
    "l_x",
    "n_max",
    "p_max",
    "alpha_c",
    "h_convention",
    "ftc_tol",
    "lambda_table",
    "occupation",
];

fn parse_landau(
    cfg: &Config,
) -> Result<(qhe::LandauConfig, qhe::OccupationSet, qhe::LambdaTable), CliError> {
    let sec = cfg.section("qhe")?;
    let mut lc = qhe::LandauConfig::natural(
        sec.f64("b_field")?,
        sec.f64_or("e_field", 0.0)?,
        sec.f64("l_x")?,
        sec.usize("n_max")? as u32,
        sec.i64("p_max")?,
    );
    lc.e_charge = sec.f64_or("e_charge", 1.0)?;
    lc.mass = sec.f64_or("mass", 1.0)?;
    lc.c_light = sec.f64_or("c_light", 1.0)?;
    lc.hbar = sec.f64_or("hbar", 1.0)?;
    lc.alpha_c = sec.f64_or("alpha_c", 1.0)?;
    lc.ftc_tol = sec.f64_or("ftc_tol", 1e-9)?;
    lc.dim_cap = dim_cap()?;
    if sec.has("ratio") {
        lc.ratio = Some(sec.rational("ratio")?);
    }
    match sec.str_or("h_convention", "2pi_hbar")?.as_str() {
        "2pi_hbar" => lc.h_is_two_pi_hbar = true,
        "hbar" => lc.h_is_two_pi_hbar = false,
        other => {
            return Err(CliError::Validation(format!(
                "qhe.h_convention must be \"2pi_hbar\" or \"hbar\", got {other:?}"
            )))
        }
    }
    lc.validate()?;

    let occ_pairs = sec.int_pairs("occupation")?;
    let occ = qhe::OccupationSet::new(
        occ_pairs
            .iter()
            .map(|&(n, p)| qhe::LevelIndex::new(n as u32, p))
            .collect(),
    )?;

    let table_path = cfg.resolve_path(&sec.str("lambda_table")?);
    let text = std::fs::read_to_string(&table_path)
        .map_err(|e| CliError::Validation(format!("cannot read {table_path:?}: {e}")))?;
    let table = qhe::LambdaTable::from_table_str(&text)?;
    Ok((lc, occ, table))
}

const QHE_COLUMNS: &[&str] = &[
    "B", "E", "ratio", "ftc", "Theta_x", "Theta_y", "sigma_xx", "sigma_xy", "rho_xx", "rho_xy",
];

fn qhe_row(lc: &qhe::LandauConfig, res: &qhe::TransportResult) -> Vec<Cell> {
    vec![
        Cell::Float(lc.b_field),
        Cell::Float(lc.e_field()),
        Cell::Float(res.ratio),
        Cell::Bool(res.ftc_satisfied),
        Cell::Float(res.theta_x),
        Cell::Float(res.theta_y),
        Cell::Float(res.sigma[0][0]),
        Cell::Float(res.sigma[0][1]),
        Cell::Float(res.rho[0][0]),
        Cell::Float(res.rho[0][1]),
    ]
}

pub fn run_qhe_transport(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[("qhe", QHE_KEYS)])?;
    let (lc, occ, table) = parse_landau(cfg)?;
    let res = qhe::transport(&lc, &occ, &table)?;
    let mut out = Table::new(QHE_COLUMNS);
    out.push(qhe_row(&lc, &res));
    write_table(args, "qhe_transport", &out)?;
    Ok(())
}

pub fn run_qhe_sweep(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[
        ("qhe", QHE_KEYS),
        (
            "sweep",
            &["parameter", "grid_values", "grid_start", "grid_stop", "grid_count"],
        ),
    ])?;
    let (lc, occ, table) = parse_landau(cfg)?;
    let sweep = cfg.section("sweep")?;
    let parameter = sweep.str("parameter")?;
    if parameter != "b_field" && parameter != "e_field" {
        return Err(CliError::Validation(format!(
            "sweep.parameter must be \"b_field\" or \"e_field\", got {parameter:?}"
        )));
    }
    let mut grid = sweep.grid("grid")?;
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let rows = run_points(&grid, args.jobs, |&value| {
        let mut point = lc.clone();
        if parameter == "b_field" {
            point.b_field = value;
        } else {
            point = point.with_e_field(value);
        }
        if let Err(e) = point.validate() {
            return Err(error_code(&e));
        }
        match qhe::transport(&point, &occ, &table) {
            Ok(res) => {
                let mut row = qhe_row(&point, &res);
                row.push(Cell::Str(String::new()));
                Ok(row)
            }
            Err(e) => Err(error_code(&e)),
        }
    })?;

    let mut columns: Vec<&str> = QHE_COLUMNS.to_vec();
    columns.push("error");
    let mut out = Table::new(&columns);
    for row in rows {
        match row {
            Ok(r) => out.push(r),
            Err(code) => out.push(nan_row(QHE_COLUMNS.len(), &code)),
        }
    }
    write_table(args, "qhe_sweep", &out)?;
    Ok(())
}

// ---------------------------------------------------------------- laser --

const AS_KEYS: &[&str] = &[
    "n_pairs",
    "n_modes",
    "epsilon",
    "gamma1",
    "gamma2",
    "eta",
    "omega",
    "kappa",
    "lambda",
    "fock_cutoff",
];

fn parse_as(sec: &Section) -> Result<laser::ASParams, CliError> {
    let p = laser::ASParams {
        n_pairs: sec.usize_or("n_pairs", 0)?,
        n_modes: sec.usize_or("n_modes", 0)?,
        epsilon: sec.f64("epsilon")?,
        gamma1: sec.f64("gamma1")?,
        gamma2: sec.f64("gamma2")?,
        eta: sec.f64("eta")?,
        omega: sec.f64_list_or("omega", vec![])?,
        kappa: sec.f64_list_or("kappa", vec![])?,
        lambda: sec.f64_list_or("lambda", vec![])?,
        fock_cutoff: sec.usize_or("fock_cutoff", 0)?,
    };
    p.validate()?;
    Ok(p)
}

const EVOLVE_KEYS: &[&str] = &["t_final", "dt", "initial"];

fn product_state(
    gen: &lindblad::GeneratorSpec,
    initial: &str,
) -> Result<OperatorMatrix, CliError> {
    use ndarray::Array2;
    let mut rho = Array2::<C64>::eye(1);
    for factor in gen.space().factors() {
        let d = factor.dim();
        let mut local = Array2::<C64>::zeros((d, d));
        match (factor, initial) {
            (operators::FactorKind::Spin, "excited") => local[(0, 0)] = C64::new(1.0, 0.0),
            (operators::FactorKind::Spin, "ground") => local[(1, 1)] = C64::new(1.0, 0.0),
            (operators::FactorKind::Spin, "mixed") => {
                local[(0, 0)] = C64::new(0.5, 0.0);
                local[(1, 1)] = C64::new(0.5, 0.0);
            }
            // Fermion sites mirror the two-level choice inside the
            // single-excitation block |+>, |-> so matched twins line up.
            (operators::FactorKind::FermionSite, "excited") => local[(1, 1)] = C64::new(1.0, 0.0),
            (operators::FactorKind::FermionSite, "ground") => local[(2, 2)] = C64::new(1.0, 0.0),
            (operators::FactorKind::FermionSite, "mixed") => {
                local[(1, 1)] = C64::new(0.5, 0.0);
                local[(2, 2)] = C64::new(0.5, 0.0);
            }
            (operators::FactorKind::Boson(_), _) => local[(0, 0)] = C64::new(1.0, 0.0),
            (_, other) => {
                return Err(CliError::Validation(format!(
                    "evolve.initial must be excited/ground/mixed, got {other:?}"
                )))
            }
        }
        rho = ndarray::linalg::kron(&rho, &local);
    }
    Ok(OperatorMatrix::new(gen.space().clone(), rho)?)
}

/// Mean sigma_z across the spin sites plus per-mode photon numbers.
fn standard_observables(
    gen: &lindblad::GeneratorSpec,
) -> Result<Vec<(String, OperatorMatrix)>, CliError> {
    let space = gen.space();
    let mut spins = Vec::new();
    let mut obs = Vec::new();
    for (k, factor) in space.factors().iter().enumerate() {
        match factor {
            operators::FactorKind::Spin => spins.push(k),
            operators::FactorKind::Boson(d) => {
                let (a, adag) = operators::boson_ladder(*d)?;
                let n = operators::embed_site_operator(space, k, &adag)?
                    .matmul(&operators::embed_site_operator(space, k, &a)?)?;
                obs.push((format!("n_mode_{k}"), n));
            }
            operators::FactorKind::FermionSite => {
                let (bp, bm) = operators::fermion_site_pair();
                let np = operators::embed_site_operator(space, k, &bp.adjoint())?
                    .matmul(&operators::embed_site_operator(space, k, &bp)?)?;
                let nm = operators::embed_site_operator(space, k, &bm.adjoint())?
                    .matmul(&operators::embed_site_operator(space, k, &bm)?)?;
                obs.push((format!("sz_site_{k}"), np.sub(&nm)?));
            }
        }
    }
    if !spins.is_empty() {
        let mut mean_sz = OperatorMatrix::zero(space);
        for &k in &spins {
            mean_sz =
                mean_sz.add(&operators::embed_site_operator(space, k, &operators::sigma_z())?)?;
        }
        obs.insert(
            0,
            (
                "mean_sigma_z".to_string(),
                mean_sz.scale(C64::new(1.0 / spins.len() as f64, 0.0)),
            ),
        );
    }
    Ok(obs)
}

fn structure_report(gen: &lindblad::GeneratorSpec) -> serde_json::Value {
    // Small enough that the first-order step map's O(dt^2) truncation sits
    // well below the certificate scale.
    let dt = 1e-5 / gen.rate_scale();
    serde_json::json!({
        "dimension": gen.dim(),
        "unitality_defect": fmt_float(gen.unitality_defect()),
        "choi_min_eigenvalue": fmt_float(lindblad::choi_min_eigenvalue(gen, dt)),
        "choi_step": fmt_float(dt),
        "negative_rates": gen.has_negative_rates(),
    })
}

/// Shared evolve-and-write helper; returns (trajectory file name, abort).
fn evolve_to_csv(
    gen: &lindblad::GeneratorSpec,
    sec: &Section,
    args: &RunArgs,
    stem: &str,
    dt_default: f64,
) -> Result<(String, Option<String>), CliError> {
    let t_final = sec.f64("t_final")?;
    let dt = sec.f64_or("dt", dt_default)?;
    let initial = sec.str_or("initial", "excited")?;
    let rho0 = product_state(gen, &initial)?;
    let observables = standard_observables(gen)?;
    let traj = lindblad::evolve_monitored(gen, &rho0, t_final, dt, &observables)?;
    let name = if traj.abort.is_some() {
        format!("{stem}.csv.partial")
    } else {
        format!("{stem}.csv")
    };
    write_artifact(args, &name, &traj.to_csv())?;
    Ok((name, traj.abort))
}

pub fn run_laser_as(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[("as", AS_KEYS), ("evolve", EVOLVE_KEYS)])?;
    let params = parse_as(&cfg.section("as")?)?;
    let gen = laser::build_as_generator_capped(&params, dim_cap()?)?;

    let mut report = serde_json::json!({
        "model": "alli-sewell",
        "structure": structure_report(&gen),
        "trajectory_files": [],
    });
    let mut abort: Option<String> = None;
    if let Some(evolve_sec) = cfg.optional_section("evolve") {
        let (file, ab) =
            evolve_to_csv(&gen, &evolve_sec, args, "laser_as_trajectory", gen.suggested_dt())?;
        report["trajectory_files"] = serde_json::json!([file]);
        if let Some(reason) = ab {
            report["abort"] = serde_json::json!(reason);
            abort = Some(reason);
        }
    }
    let name = if abort.is_some() {
        "laser_as_report.json.partial"
    } else {
        "laser_as_report.json"
    };
    write_artifact(args, name, &format!("{:#}\n", report))?;
    if let Some(reason) = abort {
        return Err(CliError::Numerical(reason));
    }
    Ok(())
}

const HL_KEYS: &[&str] = &[
    "n_pairs",
    "n_modes",
    "gamma_g",
    "gamma_h1",
    "gamma_h2",
    "lambda",
    "omega_r",
    "mu",
    "rwa",
    "fock_cutoff",
];

/// Complex list written as `[[re, im], ...]`.
fn complex_list(sec: &Section, key: &str) -> Result<Vec<C64>, CliError> {
    sec.f64_nested(key)?
        .into_iter()
        .map(|p| {
            if p.len() != 2 {
                Err(CliError::Validation(format!(
                    "{key} entries must be [re, im] pairs"
                )))
            } else {
                Ok(C64::new(p[0], p[1]))
            }
        })
        .collect()
}

pub fn run_laser_match(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[("hl", HL_KEYS)])?;
    let sec = cfg.section("hl")?;
    let params = laser::HLParams {
        n_pairs: sec.usize_or("n_pairs", 0)?,
        n_modes: sec.usize_or("n_modes", 1)?,
        gamma_g: complex_list(&sec, "gamma_g")?,
        gamma_h1: sec.complex("gamma_h1")?,
        gamma_h2: sec.complex("gamma_h2")?,
        lambda: sec.f64_list_or("lambda", vec![])?,
        omega_r: sec.f64("omega_r")?,
        mu: sec.f64("mu")?,
        rwa: sec.bool_or("rwa", true)?,
        fock_cutoff: sec.usize_or("fock_cutoff", 4)?,
    };
    let matched = laser::match_hl_to_as(&params)?;
    let hl_gen = laser::build_hl_generator_capped(&params, dim_cap()?)?;
    let as_gen = laser::build_as_generator_capped(&matched.as_params, dim_cap()?)?;
    let mh = lindblad::heisenberg_matrix(&hl_gen);
    let ma = lindblad::heisenberg_matrix(&as_gen);
    let defect = (&mh - &ma).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let scale = mh.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    let counter = laser::counter_rotating_vanishes(&params)?;

    let p = &matched.as_params;
    let report = serde_json::json!({
        "model": "hepp-lieb -> alli-sewell",
        "matched_params": {
            "epsilon": fmt_float(p.epsilon),
            "gamma1": fmt_float(p.gamma1),
            "gamma2": fmt_float(p.gamma2),
            "eta": fmt_float(p.eta),
            "omega": p.omega.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>(),
            "kappa": p.kappa.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>(),
        },
        "residuals": {
            "generator_matrix_defect": fmt_float(defect),
            "generator_matrix_scale": fmt_float(scale),
            "gamma2_minus_two_gamma1": fmt_float(matched.gamma2_constraint_defect),
            "counter_rotating_defect": fmt_float(counter.max_matrix_defect),
        },
        "structure": structure_report(&hl_gen),
        "trajectory_files": [],
    });
    write_artifact(args, "laser_match_report.json", &format!("{:#}\n", report))?;
    Ok(())
}

const DHL_KEYS: &[&str] = &[
    "n_sites",
    "n_modes",
    "gamma_g",
    "gamma_b_plus",
    "gamma_b_minus",
    "gamma_c_plus",
    "gamma_c_minus",
    "lambda",
    "omega_r",
    "mu",
    "fock_cutoff",
];

pub fn run_laser_dhl(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[("dhl", DHL_KEYS), ("evolve", EVOLVE_KEYS)])?;
    let sec = cfg.section("dhl")?;
    let params = laser::DHLParams {
        n_sites: sec.usize_or("n_sites", 1)?,
        n_modes: sec.usize_or("n_modes", 0)?,
        gamma_g: if sec.has("gamma_g") {
            complex_list(&sec, "gamma_g")?
        } else {
            vec![]
        },
        gamma_b_plus: sec.complex("gamma_b_plus")?,
        gamma_b_minus: sec.complex("gamma_b_minus")?,
        gamma_c_plus: sec.complex("gamma_c_plus")?,
        gamma_c_minus: sec.complex("gamma_c_minus")?,
        lambda: sec.f64_list_or("lambda", vec![])?,
        omega_r: sec.f64("omega_r")?,
        mu: sec.f64("mu")?,
        fock_cutoff: sec.usize_or("fock_cutoff", 0)?,
    };
    let gen = laser::build_dhl_generator_capped(&params, dim_cap()?)?;
    let rep = laser::check_dhl_as_equivalence(&params)?;

    let mut report = serde_json::json!({
        "model": "dicke-haken-lax",
        "equivalence": {
            "residual": fmt_float(rep.residual),
            "equivalent": rep.equivalent,
            "gamma1": fmt_float(rep.gamma1),
            "gamma2": fmt_float(rep.gamma2),
            "eta": fmt_float(rep.eta),
            "eta_in_range": rep.eta_in_range,
            "epsilon": fmt_float(rep.epsilon),
        },
        "structure": structure_report(&gen),
        "trajectory_files": [],
    });

    let mut abort = None;
    if let Some(evolve_sec) = cfg.optional_section("evolve") {
        // One common step for the pair so twin rows share sample times.
        let mut dt_common = gen.suggested_dt();
        let twin = if rep.equivalent && rep.eta_in_range {
            let as_params = laser::dhl_matched_as_params(&rep)?;
            let as_gen = laser::build_as_generator_capped(&as_params, dim_cap()?)?;
            dt_common = dt_common.min(as_gen.suggested_dt());
            Some(as_gen)
        } else {
            None
        };
        let (dhl_file, ab1) =
            evolve_to_csv(&gen, &evolve_sec, args, "laser_dhl_trajectory", dt_common)?;
        let mut files = vec![dhl_file];
        abort = ab1;
        if let Some(as_gen) = twin {
            if abort.is_none() {
                let (as_file, ab2) =
                    evolve_to_csv(&as_gen, &evolve_sec, args, "laser_dhl_as_twin", dt_common)?;
                files.push(as_file);
                abort = abort.or(ab2);
            }
        }
        report["trajectory_files"] = serde_json::json!(files);
        if let Some(reason) = &abort {
            report["abort"] = serde_json::json!(reason);
        }
    }
    let name = if abort.is_some() {
        "laser_dhl_report.json.partial"
    } else {
        "laser_dhl_report.json"
    };
    write_artifact(args, name, &format!("{:#}\n", report))?;
    if let Some(reason) = abort {
        return Err(CliError::Numerical(reason));
    }
    Ok(())
}

// ------------------------------------------------------------------ bcs --

pub fn run_bcs_gap(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[("bcs", &["g", "beta"])])?;
    let sec = cfg.section("bcs")?;
    let g = sec.f64("g")?;
    let beta = sec.f64("beta")?;
    let sol = bcs::gap_solve(g, beta)?;
    let mut out = Table::new(&["g", "beta", "omega", "superconducting"]);
    out.push(vec![
        Cell::Float(g),
        Cell::Float(beta),
        Cell::Float(sol.omega),
        Cell::Bool(sol.superconducting),
    ]);
    write_table(args, "bcs_gap", &out)?;
    Ok(())
}

pub fn run_bcs_phase(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[(
        "phase",
        &[
            "g_values",
            "g_start",
            "g_stop",
            "g_count",
            "beta_values",
            "beta_start",
            "beta_stop",
            "beta_count",
        ],
    )])?;
    let sec = cfg.section("phase")?;
    let mut gs = sec.grid("g")?;
    let mut betas = sec.grid("beta")?;
    gs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    betas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let points: Vec<(f64, f64)> = gs
        .iter()
        .flat_map(|&g| betas.iter().map(move |&b| (g, b)))
        .collect();

    let rows = run_points(&points, args.jobs, |&(g, beta)| {
        match bcs::gap_solve(g, beta) {
            Ok(sol) => Ok(vec![
                Cell::Float(g),
                Cell::Float(beta),
                Cell::Float(sol.omega),
                Cell::Bool(sol.superconducting),
            ]),
            Err(e) => Err(error_code(&e)),
        }
    })?;

    let mut out = Table::new(&["g", "beta", "omega", "superconducting"]);
    for row in rows {
        match row {
            Ok(r) => out.push(r),
            Err(code) => out.push(vec![
                Cell::Float(f64::NAN),
                Cell::Float(f64::NAN),
                Cell::Float(f64::NAN),
                Cell::Str(code),
            ]),
        }
    }
    write_table(args, "bcs_phase", &out)?;
    Ok(())
}

pub fn run_bcs_dynamics(cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    cfg.check_schema(&[
        (
            "bcs",
            &["eps_tilde", "g", "beta", "s0", "sp_sm", "density"],
        ),
        (
            "dynamics",
            &["sigma_plus", "sigma_zero", "t_final", "dt"],
        ),
    ])?;
    let sec = cfg.section("bcs")?;
    let density = if sec.has("density") {
        let path = cfg.resolve_path(&sec.str("density")?);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Validation(format!("cannot read {path:?}: {e}")))?;
        SpectralDensity::from_table_str(&text)?
    } else {
        // The semiclassical flow never consults the reservoir; use a flat
        // placeholder so the parameter record validates.
        SpectralDensity::new_diagonal(vec![0.5, 1.5], vec![1.0, 1.0])?
    };
    let params = bcs::BcsParams {
        eps_tilde: sec.f64("eps_tilde")?,
        g: sec.f64("g")?,
        beta: sec.f64("beta")?,
        s0: sec.f64("s0")?,
        sp_sm: sec.f64("sp_sm")?,
        density,
    };
    params.validate()?;
    let dyn_sec = cfg.section("dynamics")?;
    let state = bcs::SpinState {
        sigma_plus: dyn_sec.complex("sigma_plus")?,
        sigma_zero: dyn_sec.f64("sigma_zero")?,
    };
    let t_final = dyn_sec.f64("t_final")?;
    let dt = dyn_sec.f64_or("dt", 1e-3)?;
    let traj = bcs::semiclassical_evolve(&params, &state, t_final, dt)?;
    write_artifact(args, "bcs_dynamics.csv", &traj.to_csv())?;
    Ok(())
}

