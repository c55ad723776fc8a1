use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use cavcool::analytic::{
    dressed_states, excitation_spectrum, limit_bad_cavity, limit_heating_suppression,
    limit_interference_delta0, limit_sideband, rates_smallk_saturating, rates_weak_drive,
    standing_wave_rates, RateResult, SteadyState,
};
use cavcool::config::{self, ParamFile, KEYS};
use cavcool::dynamics::CoolingTrajectory;
use cavcool::liouvillian::{liouvillian_rates, TruncationOptions};
use cavcool::mcwf::{ensemble_mean, fit_relaxation, write_records, FullSpace, Mcwf, McwfOptions};
use cavcool::scan::{delta_opt_curve, n_st_label, run_scan, Axis, Engine, Output, ScanSpec};
use cavcool::validation::{run_criterion, table, to_json, ValidationOptions, ALL};
use cavcool::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const THREADS_ENV: &str = "CAVCOOL_THREADS";

#[derive(Parser)]
#[command(
    name = "cavcool",
    version,
    about = "Cavity cooling of a trapped atom: rates, scans, spectra, trajectories"
)]
struct Cli {
    /// Parameter file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamFlags,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for individual parameter keys; these win over the file.
#[derive(Args, Default)]
struct ParamFlags {
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Atom detuning, or `opt` for Delta_opt(delta_c).
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long = "delta_c", global = true, allow_hyphen_values = true)]
    delta_c: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eta: Option<String>,
    #[arg(long = "theta_L", global = true, allow_hyphen_values = true)]
    theta_l: Option<String>,
    #[arg(long = "theta_c", global = true, allow_hyphen_values = true)]
    theta_c: Option<String>,
    /// `traveling` or `standing`.
    #[arg(long, global = true)]
    drive: Option<String>,
    #[arg(long = "phi_L", global = true, allow_hyphen_values = true)]
    phi_l: Option<String>,
    /// `dipole`, `isotropic` or `tabulated`.
    #[arg(long, global = true)]
    emission: Option<String>,
    #[arg(long = "emission_cdf", global = true)]
    emission_cdf: Option<String>,
}

impl ParamFlags {
    fn pairs(&self) -> Vec<(String, String)> {
        let values = [
            &self.gamma,
            &self.kappa,
            &self.g,
            &self.phi,
            &self.omega,
            &self.delta,
            &self.delta_c,
            &self.nu,
            &self.eta,
            &self.theta_l,
            &self.theta_c,
            &self.drive,
            &self.phi_l,
            &self.emission,
            &self.emission_cdf,
        ];
        KEYS.iter()
            .zip(values)
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Heating/cooling rates, steady state and the applicable limit formulas.
    Rates {
        #[arg(long, default_value = "analytic")]
        engine: String,
        #[arg(long)]
        json: bool,
    },
    /// Grid scan over one or two parameters.
    Scan {
        /// `name:start:end:points`
        #[arg(long)]
        axis1: String,
        #[arg(long)]
        axis2: Option<String>,
        /// Set Delta = Delta_opt(delta_c) in every cell.
        #[arg(long)]
        along_opt: bool,
        /// Comma-separated subset of n_st,w,a_plus,a_minus,d.
        #[arg(long, default_value = "n_st,w,a_plus,a_minus,d")]
        outputs: String,
        #[arg(long, default_value = "analytic")]
        engine: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Companion file with the Delta_opt(delta_c) curve over axis1.
        #[arg(long)]
        opt_curve: Option<PathBuf>,
        /// gnuplot matrix of `--matrix-output` (two axes only).
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value = "n_st")]
        matrix_output: String,
    },
    /// Excitation spectrum at fixed atom-cavity detuning, scanning Delta.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trajectory ensemble with the rate-equation overlay.
    Mcwf {
        #[arg(long, default_value_t = 100)]
        trajectories: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000.0)]
        t_end: f64,
        /// Output grid spacing.
        #[arg(long, default_value_t = 10.0)]
        spacing: f64,
        /// Largest internal step.
        #[arg(long, default_value_t = 0.25)]
        max_dt: f64,
        #[arg(long, default_value_t = 4)]
        n_cavity: usize,
        #[arg(long, default_value_t = 12)]
        n_motion: usize,
        /// Initial Fock state of the motion.
        #[arg(long, default_value_t = 2)]
        n0: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Binary trajectory records.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Runs the cross-checks and prints a verdict table.
    Validate {
        /// Comma-separated criterion numbers; all by default.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        micro_trajectories: Option<usize>,
        /// Write the verdicts as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Compute(Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            Error::InvalidParameter { .. } => Failure::Usage(e.to_string()),
            other => Failure::Compute(other),
        }
    }
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::PoleAtResonance { .. } => Some(
            "the laser hits a dressed-state resonance exactly; shift delta or delta_c, or add loss",
        ),
        Error::DivergentOptimum => {
            Some("Delta_opt is undefined at delta_c = -nu; use an explicit delta")
        }
        Error::TruncationLeak { .. } => Some("increase the truncation (n_cavity / n_motion)"),
        Error::StepTooLarge { .. } => Some("reduce --max-dt"),
        _ => None,
    }
}

/// Parameter file with flag overrides; file lines for overridden keys are
/// blanked so `delta = opt` sees the final values.
fn load_params(cli: &Cli) -> Result<ParamFile, Failure> {
    let overrides = cli.params.pairs();
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let file_lines = text.lines().count();
    let mut merged: Vec<String> = text
        .lines()
        .map(|l| {
            let key = l
                .split('#')
                .next()
                .unwrap_or("")
                .split('=')
                .next()
                .unwrap_or("")
                .trim();
            if overrides.iter().any(|(k, _)| k == key) {
                String::new()
            } else {
                l.to_string()
            }
        })
        .collect();
    merged.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    config::parse(&merged.join("\n")).map_err(|e| match e {
        Error::Config { line, message } if line > file_lines => Failure::Usage(format!(
            "--{}: {message}",
            overrides[line - file_lines - 1].0
        )),
        Error::Config { line, message } => {
            let name = cli
                .config
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default();
            Failure::Usage(format!("{name}:{line}: {message}"))
        }
        other => Failure::from(other),
    })
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Compute(Error::Io(format!("{}: {e}", p.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rel_gap(limit: f64, exact: f64) -> String {
    if exact == 0.0 {
        format!("{limit:e}")
    } else {
        format!("{:+.3e}", (limit - exact) / exact)
    }
}

fn rates_json(r: &RateResult) -> serde_json::Value {
    json!({ "a_plus": r.a_plus, "a_minus": r.a_minus, "d": r.d, "w": r.w, "n_st": r.n_st.value(), "heating": r.n_st.is_heating() })
}

/// Name, JSON payload, n_st, W, note.
type LimitRow = (
    &'static str,
    serde_json::Value,
    Option<f64>,
    Option<f64>,
    Option<String>,
);

fn cmd_rates(file: &ParamFile, engine: &str, as_json: bool) -> Result<(), Failure> {
    let p = &file.params;
    let e = &file.emission;
    let engine = Engine::parse(engine)?;
    let (exact, diagnostics) = match engine {
        Engine::Analytic => (rates_weak_drive(p, e)?, None),
        Engine::Liouvillian => {
            let l = liouvillian_rates(p, e, TruncationOptions::default())?;
            (
                l.rates,
                Some(serde_json::from_str::<serde_json::Value>(&l.to_json()).expect("valid json")),
            )
        }
    };
    let no_drive = p.omega == 0.0;

    let mut limits: Vec<LimitRow> = Vec::new();
    if let Ok(r) = limit_bad_cavity(p, e) {
        limits.push((
            "bad cavity",
            rates_json(&r),
            r.n_st.value(),
            Some(r.w),
            None,
        ));
    }
    if let Ok(s) = limit_sideband(p, e) {
        let v = json!({ "rates": rates_json(&s.rates), "n_min": s.n_min, "w_min": s.w_min, "b_factor": s.b_factor });
        limits.push((
            "sideband",
            v,
            s.rates.n_st.value(),
            Some(s.rates.w),
            s.warning.clone(),
        ));
    }
    if let Ok(i) = limit_interference_delta0(p, e) {
        let v = json!({ "n0": i.n0, "n0_min": i.n0_min, "w": i.w, "n_first_order_kappa": i.n_first_order_kappa, "delta_opt": i.delta_opt });
        limits.push((
            "interference (delta_c = 0)",
            v,
            Some(i.n_first_order_kappa),
            None,
            i.warning.clone(),
        ));
    }
    if let Ok(h) = limit_heating_suppression(p, e) {
        let v = json!({ "n0": h.n0, "n0_min": h.n0_min, "w0": h.w0, "n_kappa": h.n_kappa, "n_kappa_opt": h.n_kappa_opt });
        limits.push((
            "heating suppression (delta_c = nu/2)",
            v,
            Some(h.n_kappa),
            None,
            None,
        ));
    }
    if let Ok(r) = standing_wave_rates(p, e) {
        limits.push((
            "standing wave at a node",
            rates_json(&r),
            r.n_st.value(),
            Some(r.w),
            None,
        ));
    }
    match rates_smallk_saturating(p, e) {
        Ok(r) => limits.push((
            "small kappa, any Omega",
            rates_json(&r),
            r.n_st.value(),
            Some(r.w),
            None,
        )),
        Err(Error::ExpansionInvalid { kappa, gamma_minus }) => limits.push((
            "small kappa, any Omega",
            json!(null),
            None,
            None,
            Some(format!(
                "not valid: kappa = {kappa} >= gamma_- = {gamma_minus}"
            )),
        )),
        Err(_) => {}
    }

    if as_json {
        let v = json!({
            "engine": engine.name(),
            "params_hash": config::params_hash(file),
            "rates": rates_json(&exact),
            "no_drive": no_drive,
            "diagnostics": diagnostics,
            "limits": limits.iter().map(|(name, v, _, _, w)| json!({ "name": name, "value": v, "warning": w })).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        return Ok(());
    }
    let mut out = String::new();
    let _ = writeln!(out, "engine    {}", engine.name());
    let _ = writeln!(out, "params    {}", config::params_hash(file));
    let _ = writeln!(out, "A+        {:.6e}", exact.a_plus);
    let _ = writeln!(out, "A-        {:.6e}", exact.a_minus);
    let _ = writeln!(out, "D         {:.6e}", exact.d);
    let _ = writeln!(out, "W         {:.6e}", exact.w);
    if no_drive {
        out.push_str("n_st      undefined\nnote: no drive (Omega = 0), all rates vanish\n");
    } else {
        let _ = writeln!(
            out,
            "n_st      {}",
            exact
                .n_st
                .value()
                .map_or("heating".to_string(), |n| format!("{n:.6e}"))
        );
        if exact.n_st.is_heating() {
            out.push_str("note: heating region, A- <= A+\n");
        }
    }
    if let Some(d) = &diagnostics {
        let _ = writeln!(out, "n_cavity  {}", d["n_cavity"]);
        let _ = writeln!(
            out,
            "P_e       {:.6e}",
            d["excited_population"].as_f64().unwrap_or(f64::NAN)
        );
    }
    if !no_drive && !limits.is_empty() {
        out.push_str("\nlimit                                  n_st          gap n_st    W             gap W\n");
        for (name, _, n, w, warning) in &limits {
            let n = n.filter(|n| n.is_finite());
            let ncol = n.map_or("-".to_string(), |n| format!("{n:.6e}"));
            let ngap = match (n, exact.n_st.value()) {
                (Some(n), Some(x)) => rel_gap(n, x),
                _ => "-".into(),
            };
            let w = w.filter(|w| w.is_finite());
            let wcol = w.map_or("-".to_string(), |w| format!("{w:.6e}"));
            let wgap = w.map_or("-".to_string(), |w| rel_gap(w, exact.w));
            let _ = writeln!(out, "{name:<38} {ncol:<13} {ngap:<11} {wcol:<13} {wgap}");
            if let Some(w) = warning {
                let _ = writeln!(out, "    warning: {w}");
            }
        }
    }
    print!("{out}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    file: ParamFile,
    axis1: &str,
    axis2: Option<&str>,
    along_opt: bool,
    outputs: &str,
    engine: &str,
    out: &Option<PathBuf>,
    opt_curve: &Option<PathBuf>,
    matrix: &Option<PathBuf>,
    matrix_output: &str,
) -> Result<(), Failure> {
    let mut spec = ScanSpec::new(file, Axis::parse(axis1)?);
    spec.axis2 = axis2.map(Axis::parse).transpose()?;
    spec.along_delta_opt = along_opt;
    spec.outputs = outputs
        .split(',')
        .map(|s| Output::parse(s.trim()))
        .collect::<cavcool::Result<_>>()?;
    spec.engine = Engine::parse(engine)?;
    let result = run_scan(&spec)?;
    write_out(out, &result.to_csv())?;
    if let Some(path) = opt_curve {
        let curve = delta_opt_curve(&spec.base, &spec.axis1.values());
        write_out(&Some(path.clone()), &curve)?;
    }
    if let Some(path) = matrix {
        let m = result.gnuplot_matrix(Output::parse(matrix_output)?)?;
        write_out(&Some(path.clone()), &m)?;
    }
    Ok(())
}

fn cmd_spectrum(
    file: &ParamFile,
    from: f64,
    to: f64,
    points: usize,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    if points < 2 || !(from.is_finite() && to.is_finite()) {
        return Err(Failure::Usage(
            "spectrum needs a finite range and at least 2 points".into(),
        ));
    }
    let p = file.params;
    let grid = Axis::new("delta", from, to, points)?.values();
    let rates = excitation_spectrum(&p, &grid);
    let d = dressed_states(&p);
    let delta_cav = p.delta_cav();
    let (r_plus, r_minus) = d.laser_resonances(delta_cav);
    let mut s = String::new();
    let _ = writeln!(s, "# params_hash = {}", config::params_hash(file));
    let _ = writeln!(s, "# Delta_c = {delta_cav:e} held fixed");
    let _ = writeln!(
        s,
        "# dressed lambda_plus = {:e}, lambda_minus = {:e}",
        d.lambda_plus, d.lambda_minus
    );
    let _ = writeln!(
        s,
        "# dressed gamma_plus = {:e}, gamma_minus = {:e}",
        d.gamma_plus, d.gamma_minus
    );
    let _ = writeln!(s, "# marker resonance_plus = {r_plus:e}");
    let _ = writeln!(s, "# marker resonance_minus = {r_minus:e}");
    let _ = writeln!(s, "# marker interference_dip = {delta_cav:e}");
    s.push_str("delta,rate\n");
    for (x, r) in grid.iter().zip(&rates) {
        let _ = writeln!(s, "{x:e},{r:e}");
    }
    write_out(out, &s)
}

fn hash_bytes(hex: &str) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).unwrap_or(0);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_mcwf(
    file: &ParamFile,
    trajectories: usize,
    seed: u64,
    t_end: f64,
    spacing: f64,
    max_dt: f64,
    n_cavity: usize,
    n_motion: usize,
    n0: usize,
    out: &Option<PathBuf>,
    records: &Option<PathBuf>,
) -> Result<(), Failure> {
    if trajectories == 0 {
        return Err(Failure::Usage("need at least 1 trajectory".into()));
    }
    if n0 >= n_motion {
        return Err(Failure::Usage("--n0 must be below --n-motion".into()));
    }
    let p = &file.params;
    let space = FullSpace::new(n_cavity, n_motion)?;
    let n_points = (t_end / spacing).round() as usize + 1;
    let m = Mcwf::new(
        p,
        &file.emission,
        space,
        spacing,
        McwfOptions {
            max_dt,
            ..Default::default()
        },
    )?;
    let ens = m.run_ensemble(
        &space.basis_state(false, 0, n0),
        n_points,
        seed,
        trajectories,
    )?;
    let mean = if ens.len() == 1 {
        let t = &ens[0];
        let (w, n_inf) = fit_relaxation(&t.times, &t.phonons);
        CoolingTrajectory {
            times: t.times.clone(),
            mean_n: t.phonons.clone(),
            std_err: None,
            w,
            n_st: SteadyState::Cooling(n_inf),
        }
    } else {
        ensemble_mean(&ens)?
    };
    let rates = liouvillian_rates(p, &file.emission, TruncationOptions::default())?.rates;
    let overlay = CoolingTrajectory::closed_form(n0 as f64, &rates, p.eta, &mean.times);
    let hash = config::params_hash(file);
    let mut s = String::new();
    let _ = writeln!(s, "# params_hash = {hash}");
    let _ = writeln!(s, "# seed = {seed}, trajectories = {trajectories}, n0 = {n0}, n_cavity = {n_cavity}, n_motion = {n_motion}");
    let _ = writeln!(s, "# step = {:e}", m.dt());
    let _ = writeln!(
        s,
        "# fit W = {:e}, n_inf = {}",
        mean.w,
        n_st_label(mean.n_st)
    );
    let _ = writeln!(
        s,
        "# rate equation W = {:e}, n_st = {}",
        rates.w,
        n_st_label(rates.n_st)
    );
    let jumps: usize = ens.iter().map(|t| t.jumps.len()).sum();
    let _ = writeln!(s, "# jumps = {jumps}");
    s.push_str("t,mean_n,std_err,rate_equation\n");
    let se = mean
        .std_err
        .clone()
        .unwrap_or_else(|| vec![f64::NAN; mean.times.len()]);
    for (((t, n), e), r) in mean
        .times
        .iter()
        .zip(&mean.mean_n)
        .zip(&se)
        .zip(&overlay.mean_n)
    {
        let _ = writeln!(s, "{t:e},{n:e},{e:e},{r:e}");
    }
    write_out(out, &s)?;
    if let Some(path) = records {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(Error::from)?);
        write_records(&mut f, &hash_bytes(&hash), &ens)?;
    }
    Ok(())
}

fn cmd_validate(
    only: &Option<String>,
    seed: Option<u64>,
    trajectories: Option<usize>,
    micro: Option<usize>,
    json_path: &Option<PathBuf>,
) -> Result<(), Failure> {
    let ids: Vec<u8> = match only {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<u8>().ok().filter(|i| ALL.contains(i)))
            .collect::<Option<_>>()
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "--only: expected criterion numbers 1-9, got `{list}`"
                ))
            })?,
        None => ALL.to_vec(),
    };
    let mut opts = ValidationOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    if let Some(t) = trajectories {
        opts.trajectories = t;
    }
    if let Some(t) = micro {
        opts.micro_trajectories = t;
    }
    let verdicts: Vec<_> = ids
        .iter()
        .filter_map(|&id| run_criterion(id, &opts))
        .collect();
    print!("{}", table(&verdicts));
    if let Some(path) = json_path {
        write_out(&Some(path.clone()), &to_json(&verdicts))?;
    }
    if verdicts.iter().all(|v| v.pass) {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let n: usize = n
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        // ignore a pool that already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let file = load_params(cli)?;
    match &cli.command {
        Command::Rates { engine, json } => cmd_rates(&file, engine, *json),
        Command::Scan {
            axis1,
            axis2,
            along_opt,
            outputs,
            engine,
            out,
            opt_curve,
            matrix,
            matrix_output,
        } => cmd_scan(
            file,
            axis1,
            axis2.as_deref(),
            *along_opt,
            outputs,
            engine,
            out,
            opt_curve,
            matrix,
            matrix_output,
        ),
        Command::Spectrum {
            from,
            to,
            points,
            out,
        } => cmd_spectrum(&file, *from, *to, *points, out),
        Command::Mcwf {
            trajectories,
            seed,
            t_end,
            spacing,
            max_dt,
            n_cavity,
            n_motion,
            n0,
            out,
            records,
        } => cmd_mcwf(
            &file,
            *trajectories,
            *seed,
            *t_end,
            *spacing,
            *max_dt,
            *n_cavity,
            *n_motion,
            *n0,
            out,
            records,
        ),
        Command::Validate {
            only,
            seed,
            trajectories,
            micro_trajectories,
            json,
        } => cmd_validate(only, *seed, *trajectories, *micro_trajectories, json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{}", json!({ "status": "usage-error", "message": msg }));
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            if let Some(h) = hint(&e) {
                eprintln!("hint: {h}");
            }
            eprintln!(
                "{}",
                json!({ "status": "error", "code": e.code(), "message": e.to_string() })
            );
            ExitCode::from(1)
        }
    }
}
