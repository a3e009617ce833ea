use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robinspec_cli::report::{self, ConvergenceReport, EigenRecord, Format};
use robinspec_cli::sweep::{self, Mode, SweepSpec};
use robinspec_cli::{prepare_profile, zetas_exact, zetas_float, CliError};
use robinspec_core::expansion::{gamma_to_h, h_to_gamma, ExpansionCoefficients};
use robinspec_core::geometry::ParametricCurve;
use robinspec_core::model1d::{fd_eigs_h0h, solve_transcendental, Model1DConfig};
use robinspec_core::scalar::Scalar;
use robinspec_core::solvers::shooting_disc;
use robinspec_core::wkb::wkb_iterate;

#[derive(Parser)]
#[command(name = "robinspec", version, about = "Robin Laplacian eigenvalue asymptotics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutArgs {
    /// output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Args)]
struct GridArgs {
    /// h values, comma separated
    #[arg(long, value_delimiter = ',')]
    h_grid: Vec<f64>,
    /// γ values (negative), comma separated; converted via h = γ⁻²
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Vec<f64>,
}

impl GridArgs {
    /// Merged h grid, ascending.
    fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let mut grid = self.h_grid.clone();
        for &g in &self.gamma_grid {
            grid.push(gamma_to_h(g)?);
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        if grid.is_empty() {
            return Err(CliError::InvalidSweep(
                "need --h-grid or --gamma-grid".to_string(),
            ));
        }
        Ok(grid)
    }
}

fn parse_ns_nt(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} is not NSxNT"))?;
    let n_s = a.parse().map_err(|e| format!("{e}"))?;
    let n_t = b.parse().map_err(|e| format!("{e}"))?;
    Ok((n_s, n_t))
}

#[derive(Subcommand)]
enum Cmd {
    /// 1D model operator on [0, L]: transcendental root vs finite differences
    Model1d {
        /// truncation lengths L, comma separated
        #[arg(long, value_delimiter = ',', default_value = "6,8,10,12")]
        l_grid: Vec<f64>,
        /// number of levels per L
        #[arg(long, value_delimiter = ',', default_value = "1")]
        levels: Vec<usize>,
        /// finite-difference grid points
        #[arg(long, default_value_t = 2000)]
        grid_n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form eigenvalue expansion λₙ(γ)
    Expand {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        levels: Vec<usize>,
        /// include correction terms β₀..β_M; three-term form when omitted
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Correction coefficients ζ_{j,n} from the solvability recursion
    Corrections {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        levels: Vec<usize>,
        /// highest ζ index
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// exact rational arithmetic (requires a rational curvature jet)
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// WKB quasimode: eikonal, transport, energy coefficients μ₀..μ_M
    Wkb {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Effective boundary operator eigenvalues over a γ grid
    SolveBoundary {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        levels: Vec<usize>,
        /// Fourier modes in the Galerkin basis
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// 2D collar discretization eigenvalues over an h grid
    Solve2d {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        levels: Vec<usize>,
        /// collar grid NSxNT
        #[arg(long = "grid", value_parser = parse_ns_nt, default_value = "512x128")]
        ns_nt: (usize, usize),
        #[arg(long, default_value_t = 1.0)]
        collar_depth_mult: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Radial shooting oracle for the unit disc (radius from a circle spec)
    ShootDisc {
        /// optional circle spec; radius defaults to 1
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cross-validate solvers against the expansion; exit 2 on failed checks
    Verify {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        levels: Vec<usize>,
        #[arg(long = "grid", value_parser = parse_ns_nt, default_value = "512x128")]
        ns_nt: (usize, usize),
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = 1.0)]
        collar_depth_mult: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn write_out(out: &OutArgs, text: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_report(report: &ConvergenceReport, out: &OutArgs) -> Result<(), CliError> {
    write_out(out, &report::emit(report, out.format))
}

fn curve_with_label(path: &PathBuf) -> Result<(ParametricCurve, String), CliError> {
    let text = std::fs::read_to_string(path)?;
    let curve: ParametricCurve = serde_json::from_str(&text)?;
    Ok((curve, text.trim().to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Model1d {
            l_grid,
            levels,
            grid_n,
            out,
        } => {
            let mut report = ConvergenceReport::new("model1d", 0);
            let k = levels.iter().copied().max().unwrap_or(1);
            for &l in &l_grid {
                let pair = solve_transcendental(l)?;
                let fd = fd_eigs_h0h(&Model1DConfig::new(l, grid_n), k);
                for &n in &levels {
                    if n == 1 {
                        report.records.push(EigenRecord {
                            h: l,
                            gamma: 0.0,
                            n: 1,
                            method: "transcendental".to_string(),
                            value: pair.lambda,
                            residual: 0.0,
                        });
                    }
                    report.records.push(EigenRecord {
                        h: l,
                        gamma: 0.0,
                        n,
                        method: "fd".to_string(),
                        value: fd[n - 1],
                        residual: 0.0,
                    });
                }
            }
            emit_report(&report, &out)?;
            Ok(0)
        }
        Cmd::Expand {
            curve,
            grid,
            levels,
            order,
            out,
        } => {
            let (curve, _label) = curve_with_label(&curve)?;
            let profile = prepare_profile(&curve, 2048)?;
            let grid = grid.resolve()?;
            let mut rows = Vec::new();
            for &n in &levels {
                let zeta = match order {
                    Some(m) => zetas_float(&profile, n, 2 * m + 1)?,
                    None => Vec::new(),
                };
                let coeffs = ExpansionCoefficients {
                    kappa_max: profile.kappa_max,
                    k2: profile.k2,
                    n,
                    zeta,
                };
                for &h in &grid {
                    let gamma = h_to_gamma(h);
                    let g = gamma.abs();
                    let mut terms = vec![
                        -gamma * gamma,
                        gamma * coeffs.kappa_max,
                        coeffs.third_term() * g.sqrt(),
                    ];
                    if let Some(m) = order {
                        for j in 0..=m {
                            terms.push(coeffs.beta(j).unwrap() * g.powf(-(j as f64) / 2.0));
                        }
                    }
                    let value: f64 = terms.iter().sum();
                    rows.push(serde_json::json!({
                        "gamma": gamma,
                        "n": n,
                        "order": order,
                        "value": value,
                        "terms": terms,
                    }));
                }
            }
            let mut text = serde_json::to_string_pretty(&rows).expect("json");
            text.push('\n');
            write_out(&out, &text)?;
            Ok(0)
        }
        Cmd::Corrections {
            curve,
            levels,
            order,
            exact,
            out,
        } => {
            let (curve, _label) = curve_with_label(&curve)?;
            let profile = prepare_profile(&curve, 2048)?;
            let mut rows = Vec::new();
            for &n in &levels {
                let zeta: Vec<f64> = if exact {
                    zetas_exact(&profile, n, order)?
                        .iter()
                        .map(Scalar::to_f64)
                        .collect()
                } else {
                    zetas_float(&profile, n, order)?
                };
                rows.push(serde_json::json!({
                    "n": n,
                    "zeta": zeta,
                    "exact": exact,
                }));
            }
            let mut text = serde_json::to_string_pretty(&rows).expect("json");
            text.push('\n');
            write_out(&out, &text)?;
            Ok(0)
        }
        Cmd::Wkb { curve, order, out } => {
            let (curve, _label) = curve_with_label(&curve)?;
            let profile = prepare_profile(&curve, 2048)?;
            let sol = wkb_iterate(&profile, order)?;
            let theta_samples: Vec<[f64; 2]> = sol
                .theta
                .s
                .iter()
                .zip(&sol.theta.theta)
                .map(|(&s, &t)| [s, t])
                .collect();
            let xi0_samples: Vec<[f64; 2]> = sol
                .theta
                .s
                .iter()
                .zip(&sol.xi0)
                .map(|(&s, &x)| [s, x])
                .collect();
            let row = serde_json::json!({
                "mu": sol.mu,
                "theta_samples": theta_samples,
                "xi0_samples": xi0_samples,
            });
            let mut text = serde_json::to_string_pretty(&row).expect("json");
            text.push('\n');
            write_out(&out, &text)?;
            Ok(0)
        }
        Cmd::SolveBoundary {
            curve,
            grid,
            levels,
            modes,
            seed,
            out,
        } => {
            let (curve, label) = curve_with_label(&curve)?;
            let profile = prepare_profile(&curve, 2048)?;
            let mut spec = SweepSpec::new(curve, label, Mode::SolveBoundary, grid.resolve()?);
            spec.levels = levels;
            spec.modes = modes;
            spec.seed = seed;
            spec.validate()?;
            let (records, errors) = sweep::solve_boundary_sweep(&profile, &spec);
            finish_sweep(&spec, records, errors, &out)
        }
        Cmd::Solve2d {
            curve,
            grid,
            levels,
            ns_nt,
            collar_depth_mult,
            seed,
            out,
        } => {
            let (curve, label) = curve_with_label(&curve)?;
            let profile = prepare_profile(&curve, 2048)?;
            let mut spec = SweepSpec::new(curve, label, Mode::Solve2d, grid.resolve()?);
            spec.levels = levels;
            spec.n_s = ns_nt.0;
            spec.n_t = ns_nt.1;
            spec.depth_mult = collar_depth_mult;
            spec.seed = seed;
            spec.validate()?;
            let (records, errors) = sweep::solve_2d_sweep(&profile, &spec);
            finish_sweep(&spec, records, errors, &out)
        }
        Cmd::ShootDisc { curve, grid, out } => {
            let radius = match curve {
                Some(path) => match curve_with_label(&path)?.0 {
                    ParametricCurve::Circle { r } => r,
                    _ => {
                        return Err(CliError::InvalidSweep(
                            "shoot-disc needs a circle spec".to_string(),
                        ))
                    }
                },
                None => 1.0,
            };
            let mut report = ConvergenceReport::new(format!("disc r={radius}"), 0);
            for &h in &grid.resolve()? {
                let mu = shooting_disc(radius, h)?;
                report.records.push(EigenRecord {
                    h,
                    gamma: h_to_gamma(h),
                    n: 1,
                    method: "shooting".to_string(),
                    value: mu,
                    residual: 0.0,
                });
            }
            emit_report(&report, &out)?;
            Ok(0)
        }
        Cmd::Verify {
            curve,
            grid,
            levels,
            ns_nt,
            modes,
            collar_depth_mult,
            seed,
            out,
        } => {
            let (curve, label) = curve_with_label(&curve)?;
            let mut spec = SweepSpec::new(curve, label, Mode::Verify, grid.resolve()?);
            spec.levels = levels;
            spec.n_s = ns_nt.0;
            spec.n_t = ns_nt.1;
            spec.modes = modes;
            spec.depth_mult = collar_depth_mult;
            spec.seed = seed;
            let report = sweep::verify(&spec)?;
            for c in &report.checks {
                eprintln!(
                    "{} {}: observed {} target {} tol {}",
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.observed,
                    c.target,
                    c.tol
                );
            }
            emit_report(&report, &out)?;
            Ok(if report.all_pass() { 0 } else { 2 })
        }
    }
}

fn finish_sweep(
    spec: &SweepSpec,
    records: Vec<EigenRecord>,
    errors: Vec<(f64, robinspec_core::solvers::SolverError)>,
    out: &OutArgs,
) -> Result<u8, CliError> {
    for (h, e) in &errors {
        eprintln!("h = {h}: {e}");
    }
    let had_errors = !errors.is_empty();
    if records.is_empty() {
        return Err(match errors.into_iter().next() {
            Some((_, e)) => e.into(),
            None => CliError::InvalidSweep("no grid points solved".to_string()),
        });
    }
    let mut report = ConvergenceReport::new(spec.curve_label.clone(), spec.seed);
    report.records = records;
    emit_report(&report, out)?;
    Ok(if had_errors { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
