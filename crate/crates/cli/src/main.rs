//! `rheat`: heat kernels, Cauchy problems and Burgers solutions from the
//! command line. Every numeric output is CSV with 17 significant digits.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riccati_heat::burgers::{
    solve_burgers_ivp, traveling_wave, BatemanKind, BatemanWave, BurgersOptions, BurgersProblem, TravelingWaveSpec,
};
use riccati_heat::characteristic::solve_characteristic;
use riccati_heat::coefficients::{expand_profile, CoefficientProfile, CoefficientSet, ProfileKind};
use riccati_heat::grid::{fmt17, log_spaced, uniform, GridField};
use riccati_heat::kernel::{solve_ivp, HeatKernel, InitialData};
use riccati_heat::oracle::{fd_burgers, fd_diffusion, FdSpec};
use riccati_heat::quad::QuadOptions;
use riccati_heat::riccati::{FundamentalRiccati, KernelCoefficients};
use riccati_heat::validation::{all_passed, format_table, run_suite};

use config::{parse_phi, resolve_profile, Failure, GridSpec, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "rheat", version, about = "Heat kernels of nonautonomous diffusion-type equations")]
struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// constant-heat | cable | fokker-planck | ou-drift (custom via --config)
    #[arg(long)]
    profile: Option<String>,
    /// Profile parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// End of the coefficient domain (defaults to the requested time).
    #[arg(long = "T", value_name = "T")]
    domain_end: Option<f64>,
    /// Tolerance of the characteristic and Riccati solves.
    #[arg(long)]
    tol: Option<f64>,
    /// Spatial grid `a:b:n`.
    #[arg(long, allow_hyphen_values = true, value_name = "A:B:N")]
    grid: Option<String>,
    /// Time.
    #[arg(long)]
    t: Option<f64>,
    /// Output CSV (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    gnuplot: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    /// Kernel quadrature.
    Kernel,
    /// Finite-difference oracle on its own grid.
    Fd,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum InitialProfile {
    /// Bateman kink at t = 0.
    Kink,
    /// `eps * 2x / (1 + x^2)`.
    Rational,
    Zero,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    /// `v_t + v v_x = a v_xx` with viscosity --visc.
    Viscous,
    /// Burgers-type equation with the profile's coefficients.
    General,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Kink,
    Tan,
    /// `v = beta F(beta x + gamma)` with the profile's a and c.
    Traveling,
}

#[derive(Args, Debug, Clone)]
struct WaveArgs {
    /// Amplitude A.
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    /// Speed V.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    speed: f64,
    /// Viscosity a.
    #[arg(long, default_value_t = 1.0)]
    visc: f64,
    /// Centre c.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump K(x, y, t) on grid x grid as `x,y,t,K`.
    Kernel(Common),
    /// Solve the Cauchy problem; writes `t,x,u`.
    Solve {
        #[command(flatten)]
        common: Common,
        /// gaussian | constant:V | box:W | csv:PATH
        #[arg(long)]
        phi: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Kernel)]
        method: Method,
    },
    /// Solve a Burgers initial-value problem via Cole–Hopf; writes `t,x,v`.
    Burgers {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Form::Viscous)]
        form: Form,
        #[arg(long, value_enum, default_value_t = InitialProfile::Kink)]
        v0: InitialProfile,
        #[command(flatten)]
        wave: WaveArgs,
        /// Amplitude of the rational initial profile.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Method::Kernel)]
        method: Method,
    },
    /// Evaluate an exact wave solution; writes `t,x,v`.
    Wave {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Family::Kink)]
        family: Family,
        #[command(flatten)]
        wave: WaveArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c3: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c4: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gamma0: f64,
        /// F at the left end of the z-window.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        f0: f64,
        /// z-window `a:b` for F.
        #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
        window: String,
    },
    /// Fundamental kernel coefficients on a log-spaced time grid.
    Riccati {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Standard solutions of the characteristic equation on a uniform time grid.
    Characteristic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Run the invariant suite and print a pass/fail table.
    Validate {
        /// A built-in profile or `all`.
        #[arg(long, default_value = "all")]
        profile: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Solve { .. } => "solve",
            Command::Burgers { .. } => "burgers",
            Command::Wave { .. } => "wave",
            Command::Riccati { .. } => "riccati",
            Command::Characteristic { .. } => "characteristic",
            Command::Validate { .. } => "validate",
        }
    }
}

/// Flags merged with the config document.
struct Resolved {
    profile: CoefficientProfile,
    coeffs: CoefficientSet,
    t: f64,
    tol: f64,
    grid: GridSpec,
    output: Option<PathBuf>,
    gnuplot: bool,
    phi: Option<String>,
}

fn resolve(common: &Common, cfg: &RunConfig, default_t: f64, default_grid: &str) -> Result<Resolved, Failure> {
    let t = common.t.or(cfg.t).unwrap_or(default_t);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Failure::Config(format!("t = {t} must be positive")));
    }
    let profile = resolve_profile(
        common.profile.as_deref(),
        &common.params,
        common.domain_end,
        cfg.coefficients.as_ref(),
        t,
    )?;
    if t > profile.domain_end {
        return Err(Failure::Config(format!("t = {t} lies beyond T = {}", profile.domain_end)));
    }
    let coeffs = expand_profile(&profile)?;
    let tol = common.tol.or(cfg.tol).unwrap_or(1e-12);
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Failure::Config(format!("tolerance {tol} must lie in (0, 1e-2)")));
    }
    let grid = GridSpec::parse(common.grid.as_deref().or(cfg.grid.as_deref()).unwrap_or(default_grid))?;
    let output = common.output.clone().or_else(|| cfg.output.clone());
    let gnuplot = common.gnuplot || cfg.gnuplot;
    if gnuplot && output.is_none() {
        return Err(Failure::Config("--gnuplot needs --output".into()));
    }
    Ok(Resolved { profile, coeffs, t, tol, grid, output, gnuplot, phi: cfg.phi.clone() })
}

/// Writes through `f` to the output file or stdout.
fn emit<F>(output: Option<&Path>, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            // a closed pipe (e.g. `| head`) just ends the output
            match f(&mut w).and_then(|_| w.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
                r => r?,
            }
        }
    }
    Ok(())
}

enum Plot {
    /// Surface over the first two columns, value in column `col`.
    Surface { col: usize },
    /// Lines of column `col` against column `x`.
    Lines { x: usize, col: usize, title: &'static str },
    /// Several columns against column 1, log-scaled x.
    Series { cols: Vec<(usize, &'static str)> },
}

fn write_gnuplot(csv: &Path, plot: Plot) -> Result<(), Failure> {
    let mut script = csv.as_os_str().to_owned();
    script.push(".gp");
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    match plot {
        Plot::Surface { col } => {
            s += &format!("set xlabel 'x'\nset ylabel 'y'\nsplot '{name}' using 1:2:{col} with points pt 7 ps 0.3\n")
        }
        Plot::Lines { x, col, title } => s += &format!("set xlabel 'x'\nplot '{name}' using {x}:{col} with lines title '{title}'\n"),
        Plot::Series { cols } => {
            s += "set logscale x\nset xlabel 't'\nplot ";
            let parts: Vec<String> =
                cols.iter().map(|(c, t)| format!("'{name}' using 1:{c} with lines title '{t}'")).collect();
            s += &parts.join(", \\\n     ");
            s += "\n";
        }
    }
    std::fs::write(PathBuf::from(script), s)?;
    Ok(())
}

fn write_field(r: &Resolved, field: &GridField, name: &'static str) -> Result<(), Failure> {
    emit(r.output.as_deref(), |w| field.write_csv(w, name))?;
    if r.gnuplot {
        write_gnuplot(r.output.as_deref().unwrap(), Plot::Lines { x: 2, col: 3, title: name })?;
    }
    Ok(())
}

fn cmd_kernel(r: &Resolved) -> Result<(), Failure> {
    let kernel = HeatKernel::new(&r.coeffs, r.tol)?;
    let slice = kernel.slice(r.t)?;
    let xs = r.grid.points();
    let mut rows = Vec::with_capacity(xs.len() * xs.len());
    for &x in &xs {
        for &y in &xs {
            rows.push((x, y, slice.value(x, y)?));
        }
    }
    emit(r.output.as_deref(), |w| {
        writeln!(w, "x,y,t,K")?;
        for (x, y, k) in &rows {
            writeln!(w, "{},{},{},{}", fmt17(*x), fmt17(*y), fmt17(r.t), fmt17(*k))?;
        }
        Ok(())
    })?;
    if r.gnuplot {
        write_gnuplot(r.output.as_deref().unwrap(), Plot::Surface { col: 4 })?;
    }
    Ok(())
}

/// Half-width of the FD window for initial data given on a grid.
fn fd_spec(grid: &GridSpec, t: f64) -> Result<FdSpec, Failure> {
    let half = grid.lo.abs().max(grid.hi.abs()).max(10.0);
    let n = ((2.0 * half / 0.025).round() as usize + 1).max(801);
    Ok(FdSpec::new(half, n, 1e-4_f64.min(t / 10.0))?)
}

fn cmd_solve(r: &Resolved, phi: &InitialData, method: Method) -> Result<(), Failure> {
    let field = match method {
        Method::Kernel => {
            let kernel = HeatKernel::new(&r.coeffs, r.tol)?;
            let sol = solve_ivp(&kernel, phi, &r.grid.points(), r.t, &QuadOptions::default())?;
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
            sol.field
        }
        Method::Fd => {
            let u = fd_diffusion(&r.coeffs, phi, &fd_spec(&r.grid, r.t)?, r.t)?;
            GridField::new(u.xs.clone(), vec![r.t], vec![u.last_row().to_vec()])?
        }
    };
    write_field(r, &field, "u")
}

fn cmd_burgers(r: &Resolved, form: Form, v0: InitialProfile, wave: &WaveArgs, eps: f64, method: Method) -> Result<(), Failure> {
    let data = match v0 {
        InitialProfile::Kink => BatemanWave::new(wave.amp, wave.speed, wave.visc, wave.shift, BatemanKind::Kink)?.initial_data(),
        InitialProfile::Rational => InitialData::function(move |x| eps * 2.0 * x / (1.0 + x * x)),
        InitialProfile::Zero => InitialData::constant(0.0),
    };
    let prob = match form {
        Form::Viscous => BurgersProblem::viscous(wave.visc, data, r.profile.domain_end)?,
        Form::General => BurgersProblem::general(r.coeffs.clone(), data),
    };
    let field = match method {
        Method::Kernel => {
            let opts = BurgersOptions { tol: r.tol, ..Default::default() };
            solve_burgers_ivp(&prob, &r.grid.points(), r.t, &opts)?
        }
        Method::Fd => {
            let spec = fd_spec(&r.grid, r.t)?;
            let spec = FdSpec { half_width: spec.half_width.max(20.0), ..spec };
            let spec = FdSpec { n: ((2.0 * spec.half_width / 0.05).round() as usize + 1).max(801), ..spec };
            let v = fd_burgers(&prob, &spec, r.t)?;
            GridField::new(v.xs.clone(), vec![r.t], vec![v.last_row().to_vec()])?
        }
    };
    write_field(r, &field, "v")
}

fn parse_window(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Config(format!("window '{s}' is not of the form a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if !(a < b) {
        return Err(bad());
    }
    Ok((a, b))
}

fn cmd_wave(r: &Resolved, family: Family, wave: &WaveArgs, spec: TravelingWaveSpec) -> Result<(), Failure> {
    let xs = r.grid.points();
    let row: Vec<f64> = match family {
        Family::Kink | Family::Tan => {
            let kind = if family == Family::Kink { BatemanKind::Kink } else { BatemanKind::Tan };
            let w = BatemanWave::new(wave.amp, wave.speed, wave.visc, wave.shift, kind)?;
            xs.iter().map(|&x| w.eval(x, r.t)).collect::<Result<_, _>>()?
        }
        Family::Traveling => {
            let w = traveling_wave(&spec, &r.coeffs, r.tol)?;
            xs.iter().map(|&x| w.eval(x, r.t)).collect::<Result<_, _>>()?
        }
    };
    write_field(r, &GridField::new(xs, vec![r.t], vec![row])?, "v")
}

fn cmd_riccati(r: &Resolved, t_min: f64, points: usize) -> Result<(), Failure> {
    if !(t_min > 0.0 && t_min < r.t) || points < 2 {
        return Err(Failure::Config(format!("need 0 < t-min < t and at least 2 points (t-min = {t_min}, points = {points})")));
    }
    let fund = FundamentalRiccati::build(&r.coeffs, r.tol)?;
    let rows: Vec<(f64, KernelCoefficients)> =
        log_spaced(t_min, r.t, points).into_iter().map(|t| fund.at(t).map(|k| (t, k))).collect::<Result<_, _>>()?;
    emit(r.output.as_deref(), |w| {
        writeln!(w, "t,{}", KernelCoefficients::NAMES.join(","))?;
        for (t, k) in &rows {
            let vals: Vec<String> = k.to_array().iter().map(|v| fmt17(*v)).collect();
            writeln!(w, "{},{}", fmt17(*t), vals.join(","))?;
        }
        Ok(())
    })?;
    if r.gnuplot {
        let cols = KernelCoefficients::NAMES.iter().enumerate().map(|(i, n)| (i + 2, *n)).collect();
        write_gnuplot(r.output.as_deref().unwrap(), Plot::Series { cols })?;
    }
    Ok(())
}

fn cmd_characteristic(r: &Resolved, points: usize) -> Result<(), Failure> {
    if points < 2 {
        return Err(Failure::Config("need at least 2 points".into()));
    }
    let chs = solve_characteristic(&r.coeffs, r.t, r.tol)?;
    if let Some(z) = chs.first_zero_of_mu0() {
        eprintln!("mu0 vanishes at t = {}", fmt17(z));
    }
    let ts = uniform(0.0, r.t, points);
    emit(r.output.as_deref(), |w| {
        writeln!(w, "t,mu0,dmu0,mu1,dmu1,h")?;
        for &t in &ts {
            let vals = [chs.mu0(t), chs.dmu0(t), chs.mu1(t), chs.dmu1(t), chs.h(t)];
            let vals: Vec<String> = vals.iter().map(|v| fmt17(*v)).collect();
            writeln!(w, "{},{}", fmt17(t), vals.join(","))?;
        }
        Ok(())
    })?;
    if r.gnuplot {
        let cols = vec![(2, "mu0"), (4, "mu1"), (6, "h")];
        write_gnuplot(r.output.as_deref().unwrap(), Plot::Series { cols })?;
    }
    Ok(())
}

fn cmd_validate(profile: &str) -> Result<(), Failure> {
    let kinds: Vec<ProfileKind> = if profile == "all" {
        ProfileKind::BUILTIN.to_vec()
    } else {
        let k = ProfileKind::parse(profile)?;
        if k == ProfileKind::Custom {
            return Err(Failure::Config("validate runs on built-in profiles only".into()));
        }
        vec![k]
    };
    let outcomes = run_suite(&kinds);
    print!("{}", format_table(&outcomes));
    if all_passed(&outcomes) {
        Ok(())
    } else {
        let failed = outcomes.iter().filter(|o| !o.pass).count();
        Err(Failure::Validation(format!("{failed} of {} checks failed", outcomes.len())))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(Failure::Config(format!("config is for '{c}', not '{}'", cli.command.name())));
        }
    }
    match &cli.command {
        Command::Kernel(common) => cmd_kernel(&resolve(common, &cfg, 1.0, "-3:3:61")?),
        Command::Solve { common, phi, method } => {
            let r = resolve(common, &cfg, 0.5, "-5:5:101")?;
            let phi = parse_phi(phi.as_deref().or(r.phi.as_deref()).unwrap_or("gaussian"))?;
            cmd_solve(&r, &phi, *method)
        }
        Command::Burgers { common, form, v0, wave, eps, method } => {
            let r = resolve(common, &cfg, 0.5, "-3:3:61")?;
            cmd_burgers(&r, *form, *v0, wave, *eps, *method)
        }
        Command::Wave { common, family, wave, c0, c1, c2, c3, c4, beta0, gamma0, f0, window } => {
            let r = resolve(common, &cfg, 0.5, "-3:3:61")?;
            let (z_start, z_end) = parse_window(window)?;
            let spec = TravelingWaveSpec {
                c0: *c0,
                c1: *c1,
                c2: *c2,
                c3: *c3,
                c4: *c4,
                beta_init: *beta0,
                gamma_init: *gamma0,
                z_start,
                z_end,
                f_start: *f0,
            };
            cmd_wave(&r, *family, wave, spec)
        }
        Command::Riccati { common, t_min, points } => cmd_riccati(&resolve(common, &cfg, 1.0, "-1:1:2")?, *t_min, *points),
        Command::Characteristic { common, points } => {
            cmd_characteristic(&resolve(common, &cfg, 1.0, "-1:1:2")?, *points)
        }
        Command::Validate { profile } => cmd_validate(profile),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rheat: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
