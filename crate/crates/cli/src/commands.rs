use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::{info, warn};
use qlm_core::cases::{self, Case, TauProfile};
use qlm_core::embed::{theorem_b, WeylConfig, WeylSolveReport};
use qlm_core::energy::{quasi_local_mass, Admissibility, FlagBasis, FlagState, MassConfig, MassReport};
use qlm_core::io::{colatitude_profiles, write_atomic, RadialDataFile, ResultRecord, SurfaceDataFile};
use qlm_core::jang::{solve_jang_radial, InnerBoundary, JangConfig, RadialInitialData, RadialProfile};
use qlm_core::optimal::{minimize_tau, OptimizeConfig};
use qlm_core::sphere::{ScalarField, SphereGrid};
use qlm_core::verify::{run_suite, Suite};
use qlm_core::{QlmError, Result};

use crate::Common;

pub fn parse_resolution(s: &str) -> Result<Arc<SphereGrid>> {
    let bad = || QlmError::InvalidInput(format!("resolution must look like 32x64, got '{s}'"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let n: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    SphereGrid::new(n, m)
}

fn parse_case(name: &str, p: &[f64], profile: &str) -> Result<Case> {
    let want = |n: usize| {
        if p.len() == n {
            Ok(())
        } else {
            Err(QlmError::InvalidInput(format!("{name} takes {n} parameter(s), got {}", p.len())))
        }
    };
    let name = name.to_ascii_lowercase().replace('_', "-");
    let case = match name.as_str() {
        "round-sphere" => {
            want(1)?;
            Case::RoundSphere { r: p[0] }
        }
        "boosted-sphere" => {
            want(2)?;
            Case::BoostedSphere { r: p[0], rapidity: p[1] }
        }
        "ellipsoid" => {
            want(3)?;
            Case::Ellipsoid { a: p[0], b: p[1], c: p[2] }
        }
        "graph-over-sphere" => {
            want(1)?;
            Case::GraphOverSphere {
                r: p[0],
                profile: profile.parse()?,
            }
        }
        "schwarzschild-sphere" => {
            want(2)?;
            Case::SchwarzschildSphere { m: p[0], r: p[1] }
        }
        "dumbbell" => {
            want(1)?;
            Case::Dumbbell { neck: p[0] }
        }
        _ => return Err(QlmError::InvalidInput(format!("unknown case '{name}'"))),
    };
    Ok(case)
}

pub fn gen(case: &str, params: &[f64], resolution: &str, profile: &str, g: f64, out: &Path) -> Result<u8> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(QlmError::InvalidInput("--G must be positive".into()));
    }
    let grid = parse_resolution(resolution)?;
    let case = parse_case(case, params, profile)?;
    let generated = cases::generate(&case, &grid)?;
    let file = SurfaceDataFile::from_surface_data(&generated.data, g, Some(&generated.own_tau));
    file.write(out)?;
    info!("wrote {} to {}", case.name(), out.display());
    Ok(0)
}

struct Loaded {
    grid: Arc<SphereGrid>,
    file: SurfaceDataFile,
    tau: ScalarField,
    tau_source: String,
}

fn load(input: &Path, tau: Option<&str>) -> Result<Loaded> {
    let file = SurfaceDataFile::read(input)?;
    let grid = file.grid()?;
    let file_tau = file.tau(&grid)?;
    let (tau, tau_source) = match tau {
        None => match file_tau {
            Some(t) => (t, "file".to_string()),
            None => (ScalarField::zeros(&grid), "zero".to_string()),
        },
        Some("file") => (
            file_tau.ok_or_else(|| QlmError::IncompleteData("input has no tau array".into()))?,
            "file".to_string(),
        ),
        Some(s) => match s.parse::<TauProfile>() {
            Ok(p) => (p.field(&grid), p.to_string()),
            Err(e) if !Path::new(s).exists() => return Err(e),
            Err(_) => {
                let other = SurfaceDataFile::read(Path::new(s))?;
                if (other.n_colat, other.n_lon) != (file.n_colat, file.n_lon) {
                    return Err(QlmError::GridMismatch);
                }
                let t = other
                    .tau(&grid)?
                    .ok_or_else(|| QlmError::IncompleteData(format!("{s} has no tau array")))?;
                (t, s.to_string())
            }
        },
    };
    Ok(Loaded {
        grid,
        file,
        tau,
        tau_source,
    })
}

fn weyl_config(common: &Common) -> Result<WeylConfig> {
    if !(common.tol > 0.0) {
        return Err(QlmError::InvalidInput("--tol must be positive".into()));
    }
    Ok(WeylConfig {
        tol: common.tol,
        ..WeylConfig::default()
    })
}

fn mass_config(common: &Common, file: &SurfaceDataFile) -> Result<MassConfig> {
    Ok(MassConfig {
        g: common.g.unwrap_or(file.g),
        weyl: weyl_config(common)?,
        ..MassConfig::default()
    })
}

fn header(rec: &mut ResultRecord, command: &str, loaded: &Loaded, common: &Common) {
    rec.push("command", command);
    rec.push("provenance", &loaded.file.provenance);
    rec.push("resolution", format!("{}x{}", loaded.grid.n_colat(), loaded.grid.n_lon()));
    rec.push("tau_source", &loaded.tau_source);
    rec.push_real("tol", common.tol);
    rec.push_real("G", common.g.unwrap_or(loaded.file.g));
    rec.push("seed", common.seed);
}

fn push_weyl(rec: &mut ResultRecord, w: &WeylSolveReport) {
    rec.push_real("weyl_residual_inf", w.residual_inf);
    rec.push("weyl_iterations", w.iterations);
    rec.push("weyl_continuation_steps", w.continuation_steps);
    rec.push("weyl_degree", w.degree);
    rec.push("weyl_gauge", &w.gauge);
}

fn push_flags(rec: &mut ResultRecord, a: &Admissibility) {
    for (name, flag) in a.flags() {
        let state = match flag.state {
            FlagState::Holds => "holds",
            FlagState::Fails => "fails",
            FlagState::Unknown => "unknown",
        };
        let basis = match flag.basis {
            FlagBasis::Certified => "certified",
            FlagBasis::SufficientCondition => "sufficient_condition",
            FlagBasis::Proxy => "proxy",
        };
        rec.push(format!("flag_{name}"), state);
        rec.push(format!("flag_{name}_basis"), basis);
        if let Some(m) = flag.margin {
            rec.push_real(format!("flag_{name}_margin"), m);
        }
    }
}

fn push_mass(rec: &mut ResultRecord, m: &MassReport) {
    rec.push_real("mass", m.mass);
    rec.push_real("reference_energy", m.reference_energy);
    rec.push_real("reference_energy_check", m.reference_energy_check);
    rec.push_real("physical_energy", m.physical_energy);
    push_flags(rec, &m.admissibility);
    push_weyl(rec, &m.weyl);
}

fn emit(rec: &ResultRecord, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => rec.write(p),
        None => {
            print!("{}", rec.to_text());
            Ok(())
        }
    }
}

pub fn embed(input: &Path, tau: Option<&str>, out: Option<&Path>, coords: Option<&Path>, common: &Common) -> Result<u8> {
    let loaded = load(input, tau)?;
    let sigma = loaded.file.metric(&loaded.grid)?;
    let start = Instant::now();
    let (x, report) = theorem_b(&sigma, &loaded.tau, &weyl_config(common)?)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rec = ResultRecord::new();
    header(&mut rec, "embed", &loaded, common);
    push_weyl(&mut rec, &report);
    rec.push_real("time_embed_s", elapsed);
    if let Some(path) = coords {
        let mut csv = String::from("colatitude,longitude,x,y,z,t\n");
        for i in 0..loaded.grid.len() {
            let (th, ph) = loaded.grid.coords(i);
            let p = x.point(i);
            let _ = writeln!(csv, "{th:.16e},{ph:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2], p[3]);
        }
        write_atomic(path, &csv)?;
    }
    emit(&rec, out)?;
    Ok(0)
}

pub fn mass(input: &Path, tau: Option<&str>, out: Option<&Path>, profiles: Option<&Path>, common: &Common) -> Result<u8> {
    let loaded = load(input, tau)?;
    let data = loaded.file.surface_data(&loaded.grid)?;
    let start = Instant::now();
    let report = quasi_local_mass(&data, &loaded.tau, &mass_config(common, &loaded.file)?)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rec = ResultRecord::new();
    header(&mut rec, "mass", &loaded, common);
    push_mass(&mut rec, &report);
    rec.push_real("time_mass_s", elapsed);
    if let Some(path) = profiles {
        let phi = qlm_core::energy::optimal_boost(&data, &report.tau_used)?;
        let integrand = qlm_core::energy::frak_h_integrand(&data, &report.tau_used)?;
        let csv = colatitude_profiles(&[
            ("tau", &report.tau_used),
            ("h_norm", &data.h_norm),
            ("boost", &phi),
            ("energy_density", &integrand),
        ])?;
        write_atomic(path, &csv)?;
    }
    emit(&rec, out)?;
    Ok(0)
}

pub fn optimize(
    input: &Path,
    tau: Option<&str>,
    gtol: f64,
    max_iter: usize,
    out: Option<&Path>,
    tau_out: Option<&Path>,
    common: &Common,
) -> Result<u8> {
    if !(gtol > 0.0) {
        return Err(QlmError::InvalidInput("--gtol must be positive".into()));
    }
    let loaded = load(input, tau)?;
    let data = loaded.file.surface_data(&loaded.grid)?;
    let config = OptimizeConfig {
        gtol,
        max_iterations: max_iter,
        weyl: weyl_config(common)?,
        mass: mass_config(common, &loaded.file)?,
        ..OptimizeConfig::default()
    };
    let start = Instant::now();
    let outcome = minimize_tau(&data, &loaded.tau, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    if !outcome.converged {
        warn!(
            "descent stopped after {} iteration(s) with gradient {:e} above {gtol:e}",
            outcome.iterations,
            outcome.grad_history.last().copied().unwrap_or(f64::NAN)
        );
    }
    let mut rec = ResultRecord::new();
    header(&mut rec, "optimize", &loaded, common);
    rec.push("converged", outcome.converged);
    rec.push("iterations", outcome.iterations);
    rec.push("rejected_for_convexity", outcome.rejected_for_convexity);
    rec.push_real("xi_initial", outcome.xi_history.first().copied().unwrap_or(f64::NAN));
    rec.push_real("xi_final", outcome.variation.xi_value);
    rec.push_real("gradient_norm", outcome.grad_history.last().copied().unwrap_or(f64::NAN));
    push_mass(&mut rec, &outcome.mass);
    rec.push_real("time_optimize_s", elapsed);
    if let Some(path) = tau_out {
        let mut file = loaded.file.clone();
        file.arrays.insert("tau".into(), outcome.tau.values().to_vec());
        file.write(path)?;
    }
    emit(&rec, out)?;
    Ok(0)
}

fn radial_data(spec: &str, r_min: Option<f64>, r_max: Option<f64>) -> Result<RadialInitialData> {
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| QlmError::InvalidInput(format!("bad number '{s}' in '{spec}'")))
    };
    let named = |profile: RadialProfile, lo: f64, hi: f64| {
        RadialInitialData::new(r_min.unwrap_or(lo), r_max.unwrap_or(hi), profile)
    };
    match spec.split_once(':') {
        None if spec == "flat" => named(RadialProfile::Flat, 0.0, 1.0),
        Some(("schwarzschild", m)) => {
            let m = num(m)?;
            named(RadialProfile::Schwarzschild { m }, 3.0 * m, 10.0 * m)
        }
        Some(("constant-trace", c)) => named(RadialProfile::ConstantTrace { c: num(c)? }, 0.0, 1.0),
        _ => {
            let file = RadialDataFile::read(Path::new(spec))?;
            let range = match (r_min, r_max) {
                (None, None) => None,
                (lo, hi) => {
                    let r = &file.arrays["r"];
                    Some((lo.unwrap_or(r[0]), hi.unwrap_or(r[r.len() - 1])))
                }
            };
            file.initial_data(range)
        }
    }
}

fn parse_inner(s: &str) -> Result<InnerBoundary> {
    if s == "regularity" {
        return Ok(InnerBoundary::Regularity);
    }
    s.strip_prefix("dirichlet:")
        .and_then(|v| v.parse().ok())
        .map(InnerBoundary::Dirichlet)
        .ok_or_else(|| QlmError::InvalidInput(format!("inner boundary must be regularity or dirichlet:VALUE, got '{s}'")))
}

#[allow(clippy::too_many_arguments)]
pub fn jang(
    data: &str,
    r_min: Option<f64>,
    r_max: Option<f64>,
    tau: f64,
    inner: &str,
    points: usize,
    out: Option<&Path>,
    profile: Option<&Path>,
) -> Result<u8> {
    let initial = radial_data(data, r_min, r_max)?;
    let inner = parse_inner(inner)?;
    let config = JangConfig {
        points,
        ..JangConfig::default()
    };
    let start = Instant::now();
    let sol = solve_jang_radial(&initial, tau, inner, &config)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rec = ResultRecord::new();
    rec.push("command", "jang");
    rec.push("data", data);
    rec.push_real("r_min", initial.r_min);
    rec.push_real("r_max", initial.r_max);
    rec.push_real("tau_boundary", tau);
    rec.push("points", points);
    rec.push_real("f3_boundary", sol.f3_boundary);
    rec.push_real("f_inner", sol.f[0]);
    rec.push_real("residual_inf", sol.residual_inf);
    rec.push("iterations", sol.iterations);
    rec.push("used_shooting", sol.used_shooting);
    rec.push_real("time_jang_s", elapsed);
    if let Some(path) = profile {
        let mut csv = String::from("r,f\n");
        for (r, f) in sol.r.iter().zip(&sol.f) {
            let _ = writeln!(csv, "{r:.16e},{f:.16e}");
        }
        write_atomic(path, &csv)?;
    }
    emit(&rec, out)?;
    Ok(0)
}

pub fn verify(suite: &str, resolution: &str, out: Option<&Path>, seed: u64) -> Result<u8> {
    if suite.trim().is_empty() {
        return Err(QlmError::InvalidInput(format!(
            "empty suite name (one of {})",
            Suite::NAMES.join(", ")
        )));
    }
    let suite: Suite = suite.parse()?;
    let grid = parse_resolution(resolution)?;
    let checks = run_suite(suite, &grid, seed)?;
    let mut table = String::new();
    for c in &checks {
        let _ = writeln!(table, "{c}");
    }
    print!("{table}");
    if let Some(path) = out {
        write_atomic(path, &table)?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        eprintln!("{failed} of {} check(s) failed", checks.len());
        return Ok(1);
    }
    Ok(0)
}
