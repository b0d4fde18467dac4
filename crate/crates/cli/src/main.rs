//! Command-line driver: configuration loading, experiment dispatch,
//! reproducible runs, artifact emission.

mod config;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};

use horolab_core::error::Result;
use horolab_core::experiments::{
    a_plus_minus_bounds, equidistribution_sweep, horocycle_rate, liouville_average,
    reduction_chain_check, sample_unit_states, shadowing_point,
};
use horolab_core::fields::{
    build_admissible_family, Observable, ObservableSpec, PerturbationFamily,
};
use horolab_core::functionals::{admissibility_check, alpha_tilde, ZCoefficients};
use horolab_core::hyperbolic::{
    orientation_self_test, HorocycleBranch, UnitTangentFrame,
};
use horolab_core::report::{write_csv, ExperimentReport};
use horolab_core::surface::{build_bolza, load_surface, relator_product, FuchsianSurface};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "horolab", version, about = "Numerical laboratory for perturbed geodesic flows on compact hyperbolic surfaces")]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory (overrides config and HOROLAB_OUT).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count override (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Run the invariant self-tests.
    Validate,
    /// Certify the admissibility margin of the family over a grid.
    Admissibility,
    /// Cross-validated Liouville averages of the observable.
    Liouville,
    /// Equidistribution sweep at the critical logarithmic time scale.
    Equidist,
    /// Horocycle-average convergence rates.
    HorocycleRate,
    /// Reduction-chain comparison of perturbed and shifted unperturbed flows.
    ReductionCheck,
    /// Shadowing search for the conjugacy correction.
    Shadowing,
    /// Energy-shell bounds of the box-averaged evolved observable.
    Bounds,
    /// Every experiment in sequence.
    All,
}

struct Lab {
    cfg: RunConfig,
    out_dir: PathBuf,
    surface: Arc<FuchsianSurface>,
    family: PerturbationFamily,
    observable: Observable,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)
            .map_err(horolab_core::error::Error::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
        cfg.reseed();
    }
    if let Some(threads) = cli.threads {
        cfg.workers = threads;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    } else if let Ok(out) = std::env::var("HOROLAB_OUT") {
        cfg.out_dir = out;
    }
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| horolab_core::error::Error::Config(format!("thread pool: {e}")))?;
    }

    let surface = Arc::new(match cfg.surface.kind.as_str() {
        "bolza" => build_bolza()?,
        "file" => {
            let path = cfg.surface.path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)?;
            load_surface(&text)?
        }
        other => {
            return Err(horolab_core::error::Error::Config(format!(
                "unknown surface kind '{other}'"
            )))
        }
    });
    let family_spec = cfg.family.clone().unwrap_or_default();
    let family = build_admissible_family(&surface, &family_spec)?;
    let observable_spec = cfg
        .observable
        .clone()
        .unwrap_or_else(ObservableSpec::default_bump);
    let observable = Observable::from_spec(&surface, &observable_spec)?;

    let lab = Lab {
        out_dir: PathBuf::from(&cfg.out_dir),
        cfg,
        surface,
        family,
        observable,
    };

    let mut all_ok = true;
    let selected: Vec<Command> = match cli.command {
        Command::All => vec![
            Command::Validate,
            Command::Admissibility,
            Command::Liouville,
            Command::Equidist,
            Command::HorocycleRate,
            Command::ReductionCheck,
            Command::Shadowing,
            Command::Bounds,
        ],
        c => vec![c],
    };
    for cmd in selected {
        let ok = dispatch(&lab, cmd)?;
        all_ok &= ok;
    }
    Ok(all_ok)
}

fn dispatch(lab: &Lab, cmd: Command) -> Result<bool> {
    match cmd {
        Command::Validate => cmd_validate(lab),
        Command::Admissibility => cmd_admissibility(lab),
        Command::Liouville => cmd_liouville(lab),
        Command::Equidist => cmd_equidist(lab),
        Command::HorocycleRate => cmd_horocycle_rate(lab),
        Command::ReductionCheck => cmd_reduction(lab),
        Command::Shadowing => cmd_shadowing(lab),
        Command::Bounds => cmd_bounds(lab),
        Command::All => unreachable!("expanded by the caller"),
    }
}

fn cmd_validate(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        println!("validate: {name}: {}", if pass { "ok" } else { "FAIL" });
        ok &= pass;
    };

    check("orientation self-test", orientation_self_test().is_ok());
    check(
        "side-pairing relator",
        relator_product(&lab.surface.generators[..lab.surface.genus_generators()])
            .is_identity(1e-9),
    );
    check(
        "generators are hyperbolic",
        lab.surface
            .generators
            .iter()
            .all(|g| (g.a + g.d).abs() > 2.0),
    );
    // Intertwining spot check.
    let f = UnitTangentFrame::IDENTITY;
    let lhs = f
        .horocycle_flow(0.37, HorocycleBranch::Unstable)
        .geodesic_flow(2.1);
    let rhs = f
        .geodesic_flow(2.1)
        .horocycle_flow(0.37 * 2.1_f64.exp(), HorocycleBranch::Unstable);
    check("intertwining identity", lhs.dist_up_to_sign(&rhs) < 1e-12);
    // Area estimate.
    let (area, sigma) = lab.surface.area_monte_carlo(200_000, 0xa3ea)?;
    check(
        "area consistent with the declared value",
        (area - lab.surface.area).abs() < 5.0 * sigma,
    );
    check(
        "family and observable share the surface",
        Arc::ptr_eq(lab.family.surface(), lab.observable.surface()),
    );
    println!(
        "validate: {} in {:.2?}",
        if ok { "all checks passed" } else { "FAILURES" },
        t0.elapsed()
    );
    Ok(ok)
}

fn cmd_admissibility(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let mut grid = lab.cfg.admissibility.clone();
    grid.collect_rows = true;
    let report = admissibility_check(&lab.family, &grid)?;
    let mut exp = ExperimentReport::new("admissibility", &grid)?;
    exp.add_estimate("min_max_abs_l", report.min_max_abs_l, 0.0);
    exp.add_estimate("threshold", report.threshold, 0.0);
    exp.add_estimate("n_states", report.n_states as f64, 0.0);
    exp.passed = report.pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("admissibility.csv"),
        &[
            "re_z", "im_z", "xi_x", "xi_y", "l_values...", "max_abs_l",
        ],
        report.rows.iter().map(|r| {
            let mut row = vec![r.state.z.re, r.state.z.im, r.state.xi.re, r.state.xi.im];
            row.extend(&r.l_values);
            row.push(r.max_abs_l);
            row
        }),
    )?;
    println!(
        "admissibility: min max_j|L| = {:.6} over {} states ({}) in {:.2?}",
        report.min_max_abs_l,
        report.n_states,
        if report.pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(report.pass)
}

fn cmd_liouville(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let est = liouville_average(&lab.observable, &lab.cfg.liouville)?;
    let mut exp = ExperimentReport::new("liouville", &lab.cfg.liouville)?;
    exp.add_estimate("value", est.value, est.error);
    exp.add_estimate("monte_carlo", est.monte_carlo.value, est.monte_carlo.error);
    exp.add_estimate("birkhoff", est.birkhoff.value, est.birkhoff.error);
    exp.add_estimate(
        "closed_form",
        lab.observable.liouville_average_closed_form(),
        0.0,
    );
    exp.write(&lab.out_dir, t0.elapsed())?;
    println!(
        "liouville: {:.6} +- {:.2e} (MC {:.6} +- {:.2e}) in {:.2?}",
        est.value,
        est.error,
        est.monte_carlo.value,
        est.monte_carlo.error,
        t0.elapsed()
    );
    Ok(true)
}

fn cmd_equidist(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let liouville = liouville_average(&lab.observable, &lab.cfg.liouville)?;
    let result = equidistribution_sweep(
        &lab.family,
        &lab.observable,
        liouville.value,
        &lab.cfg.equidist,
    )?;
    let mut exp = ExperimentReport::new("equidist", &lab.cfg.equidist)?;
    exp.add_estimate("liouville", result.liouville, liouville.error);
    exp.add_estimate("oscillation", result.oscillation, 0.0);
    for p in &result.points {
        exp.add_estimate(&format!("d_max_b0_{:e}", p.b0), p.d_max, p.max_se);
    }
    exp.add_estimate("subcritical_max_dev", result.subcritical_max_dev, 0.0);
    exp.add_estimate("max_over_median", result.max_over_median, 0.0);
    if let Some(fit) = result.fit {
        exp.add_fit("d_vs_b0", fit);
    }
    let pass = result.decreasing_within_errors
        && result.points.last().map_or(false, |p| {
            p.d_max <= 0.25 * result.oscillation
        })
        && result.subcritical_max_dev <= 0.05 * result.oscillation;
    exp.passed = pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("equidist.csv"),
        &["b0", "t0", "d_max", "d_median", "max_se"],
        result
            .points
            .iter()
            .map(|p| vec![p.b0, p.t0, p.d_max, p.d_median, p.max_se]),
    )?;
    println!(
        "equidist: D({:.0e}) = {:.4}, sub-critical dev {:.4}, osc {:.3} ({}) in {:.2?}",
        result.points.last().map(|p| p.b0).unwrap_or(f64::NAN),
        result.points.last().map(|p| p.d_max).unwrap_or(f64::NAN),
        result.subcritical_max_dev,
        result.oscillation,
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(pass)
}

fn cmd_horocycle_rate(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let liouville = liouville_average(&lab.observable, &lab.cfg.liouville)?;
    let result = horocycle_rate(&lab.observable, liouville.value, &lab.cfg.horocycle_rate)?;
    let mut exp = ExperimentReport::new("horocycle_rate", &lab.cfg.horocycle_rate)?;
    for (t, r) in &result.r_hat {
        exp.add_estimate(&format!("r_hat_{t:e}"), *r, 0.0);
    }
    if let Some(fit) = result.fit {
        exp.add_fit("r_vs_t", fit);
    }
    let ratio = result
        .r_hat
        .last()
        .map(|l| l.1 / result.r_hat[0].1.max(1e-300))
        .unwrap_or(f64::NAN);
    let pass = result.nonincreasing
        && ratio <= 0.2
        && result.fit.map_or(false, |f| f.slope <= -0.2);
    exp.passed = pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("horocycle_rate.csv"),
        &["t", "r_hat"],
        result.r_hat.iter().map(|(t, r)| vec![*t, *r]),
    )?;
    println!(
        "horocycle-rate: R({:.0e})/R({:.0e}) = {:.3}, slope {:.3} ({}) in {:.2?}",
        result.r_hat.last().map(|l| l.0).unwrap_or(f64::NAN),
        result.r_hat.first().map(|l| l.0).unwrap_or(f64::NAN),
        ratio,
        result.fit.map(|f| f.slope).unwrap_or(f64::NAN),
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(pass)
}

fn cmd_reduction(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let rho0 = sample_unit_states(&lab.surface, 1, lab.cfg.reduction.seed ^ 0xF00D)?[0];
    let result = reduction_chain_check(&rho0, &lab.family, &lab.observable, &lab.cfg.reduction)?;
    let mut exp = ExperimentReport::new("reduction_check", &lab.cfg.reduction)?;
    for row in &result.rows {
        exp.add_estimate(&format!("delta_b0_{:e}", row.b0), row.delta, 0.0);
        exp.add_estimate(
            &format!("log_absorbed_b0_{:e}", row.b0),
            row.log_absorbed_ratio,
            0.0,
        );
    }
    exp.add_estimate("ratio_spread", result.ratio_spread, 0.0);
    let pass = result.decreasing && result.ratio_spread <= 10.0;
    exp.passed = pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("reduction_check.csv"),
        &["b0", "t0", "delta", "budget", "log_absorbed_ratio"],
        result.rows.iter().map(|r| {
            vec![r.b0, r.t0, r.delta, r.budget, r.log_absorbed_ratio]
        }),
    )?;
    println!(
        "reduction-check: Delta decreasing = {}, ratio spread {:.2} ({}) in {:.2?}",
        result.decreasing,
        result.ratio_spread,
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(pass)
}

fn cmd_shadowing(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let scfg = &lab.cfg.shadowing;
    let states = sample_unit_states(&lab.surface, scfg.n_states, scfg.state_seed)?;
    let dim = lab.family.len();
    let mut rows = Vec::new();
    let mut worst_ratio = 0.0_f64;
    let mut gap_points = Vec::new();
    for (i, rho0) in states.iter().enumerate() {
        for (k, &mag) in scfg.eps_magnitudes.iter().enumerate() {
            // A fixed direction pattern scaled to the requested magnitude.
            let mut dir: Vec<f64> = (0..dim)
                .map(|j| if j % 2 == 0 { 1.0 } else { -0.7 })
                .collect();
            let norm = dir.iter().map(|e| e * e).sum::<f64>().sqrt();
            dir.iter_mut().for_each(|e| *e *= mag / norm);
            let res = shadowing_point(rho0, &lab.family, &dir, &scfg.search)?;
            let zc = ZCoefficients::compute(rho0, &lab.family, &dir, &lab.cfg.quadrature)?;
            let tilde = alpha_tilde(rho0, &lab.family, &dir, &lab.cfg.quadrature)?;
            let hat = horolab_core::experiments::shadowing_state(rho0, &lab.family, &res)?;
            let gap = lab.surface.quotient_distance(&hat, &tilde)?;
            rows.push(vec![
                i as f64,
                mag,
                res.s_u,
                res.s_s,
                res.residual,
                zc.c_u,
                zc.c_s,
                gap,
            ]);
            worst_ratio = worst_ratio.max(res.residual / mag);
            if i == 0 {
                let _ = k;
                gap_points.push((mag, gap));
            }
        }
    }
    let fit = horolab_core::report::fit_power_law(&gap_points);
    let mut exp = ExperimentReport::new("shadowing", scfg)?;
    exp.add_estimate("worst_residual_over_eps", worst_ratio, 0.0);
    if let Some(f) = fit {
        exp.add_fit("alpha_gap_vs_eps", f);
    }
    let pass = worst_ratio <= 5.0 && fit.map_or(false, |f| f.slope >= 1.3);
    exp.passed = pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("shadowing.csv"),
        &["state", "eps_mag", "s_u", "s_s", "residual", "c_u", "c_s", "alpha_gap"],
        rows.into_iter(),
    )?;
    println!(
        "shadowing: worst residual/||eps|| = {:.3}, gap exponent {:.3} ({}) in {:.2?}",
        worst_ratio,
        fit.map(|f| f.slope).unwrap_or(f64::NAN),
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(pass)
}

fn cmd_bounds(lab: &Lab) -> Result<bool> {
    let t0 = Instant::now();
    let result = a_plus_minus_bounds(&lab.family, &lab.observable, &lab.cfg.bounds)?;
    let mut exp = ExperimentReport::new("bounds", &lab.cfg.bounds)?;
    exp.add_estimate("a_minus", result.a_minus, 0.0);
    exp.add_estimate("a_plus", result.a_plus, 0.0);
    let pass = result.a_minus <= result.a_plus;
    exp.passed = pass;
    exp.write(&lab.out_dir, t0.elapsed())?;
    write_csv(
        &lab.out_dir.join("bounds.csv"),
        &["energy", "i_value"],
        result.evaluations.iter().map(|(e, v)| vec![*e, *v]),
    )?;
    println!(
        "bounds: A- = {:.4}, A+ = {:.4} ({}) in {:.2?}",
        result.a_minus,
        result.a_plus,
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    Ok(pass)
}
