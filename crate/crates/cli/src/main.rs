//! `ionlink` command-line front end.
//!
//! Every subcommand resolves a run configuration, echoes it and the seed to
//! stderr, and writes one primary artifact (CSV or JSON) to stdout or `--out`.
//! Exit codes: 0 success, 1 other failure, 2 invalid configuration or
//! parameters, 3 malformed input data.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ionlink::analysis::{
    fit_parity, fit_ramsey, optimal_threshold, read_parity_csv, read_ramsey_csv, AnalysisError, OffsetMode,
    ParityFitOptions, RamseyOptions,
};
use ionlink::event_stream::{
    classify_frames, encode_binary, encode_csv, frame_attempts, parse_stream, yield_sweep, ArrivalCalibration,
    ClassifyOptions, StreamError, StreamFormat, WindowRule,
};
use ionlink::monte_carlo::{run, EventTiming, EventTimingError, RunOptions};
use ionlink::physics::{commensurability, double_emission_prob, success_prob_and_rate, window_stats};
use ionlink::planner::{
    compose_error_budget, cooling_levels, predict_fidelity, sweep_tau, sweep_window, tune_tau, PlannerError,
};
use ionlink::{ConfigError, RunConfig};

use output::{emit, json, record, rows, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("malformed input: {0}")]
    Data(String),
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Parameter(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(..) | CliError::Other(_) => 1,
        }
    }
}

impl From<PlannerError> for CliError {
    fn from(e: PlannerError) -> Self {
        CliError::Parameter(e.to_string())
    }
}

impl From<EventTimingError> for CliError {
    fn from(e: EventTimingError) -> Self {
        CliError::Parameter(e.to_string())
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NoConvergence(_) => CliError::Other(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ionlink", version, about = "Heralded time-bin entanglement of trapped-ion memories")]
struct Cli {
    /// Run configuration (TOML). Defaults to the built-in reference configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Auto,
    Binary,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Difference,
    PerBin,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Beam angles θ and ψ of every mode.
    Geometry,
    /// Lamb-Dicke parameters, n̄ and commensurability of every mode.
    Recoil {
        /// Time-bin separation for ωτ/2π; the configured τ if absent.
        #[arg(long)]
        tau_ns: Option<f64>,
    },
    /// Success probability, window yield and entanglement rate.
    Rate,
    /// Monte Carlo entanglement attempts.
    Simulate {
        #[arg(long, default_value_t = 1_000_000)]
        attempts: u64,
        /// Number of RNG streams; overrides `run.workers`.
        #[arg(long)]
        workers: Option<usize>,
        /// Also write a time-tag log (CSV if the name ends in .csv, binary otherwise).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Relative fidelity band and yield versus coincidence window.
    SweepWindow {
        /// Windows δt in ns, comma separated; 1 to 50 ns if absent.
        #[arg(long, value_delimiter = ',')]
        dt: Option<Vec<f64>>,
    },
    /// Time-bin contrast versus τ at three cooling levels.
    SweepTau {
        #[arg(long)]
        from_ns: Option<f64>,
        #[arg(long)]
        to_ns: Option<f64>,
        #[arg(long)]
        step_ns: Option<f64>,
    },
    /// τ maximizing the time-bin contrast.
    TuneTau {
        #[arg(long)]
        from_ns: Option<f64>,
        #[arg(long)]
        to_ns: Option<f64>,
        #[arg(long)]
        resolution_ns: Option<f64>,
    },
    /// Error budget, or with --predict the predicted fidelity breakdown.
    Budget {
        #[arg(long)]
        predict: bool,
    },
    /// Decode a time-tag log and list its attempt frames.
    Parse {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        input_format: InputFormat,
    },
    /// Classify every attempt of a time-tag log.
    Classify {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        input_format: InputFormat,
        /// Coincidence window in ns; the configured δt if absent.
        #[arg(long)]
        dt_ns: Option<f64>,
        #[arg(long, value_enum, default_value_t = Rule::Difference)]
        rule: Rule,
        /// Estimate bin and channel delays from the log.
        #[arg(long)]
        calibrate: bool,
        /// Report yields at these windows (ns) instead of per-attempt results.
        #[arg(long, value_delimiter = ',')]
        yields: Option<Vec<f64>>,
    },
    /// Fit a parity fringe from `phase_rad,n_shots,n_odd` CSV.
    FitParity {
        input: PathBuf,
        #[arg(long)]
        zero_offset: bool,
        #[arg(long)]
        fixed_phase_rad: Option<f64>,
    },
    /// Fit a Gaussian Ramsey decay from `delay_s,amplitude,err` CSV.
    FitRamsey {
        input: PathBuf,
        /// Constrain the amplitude to at most 0.5.
        #[arg(long)]
        cap_amplitude: bool,
    },
    /// Optimal photon-count threshold between bright and dark states.
    Threshold {
        /// Mean counts of the bright state.
        #[arg(long)]
        bright: f64,
        /// Mean counts of the dark state.
        #[arg(long)]
        dark: f64,
    },
}

#[derive(Serialize)]
struct GeometryRow {
    node: String,
    axis: String,
    freq_khz: f64,
    alpha_deg: f64,
    beam_tilt_deg: f64,
    theta_deg: f64,
    psi_deg: f64,
}

#[derive(Serialize)]
struct RecoilRow {
    node: String,
    axis: String,
    freq_khz: f64,
    eta: f64,
    zeta: f64,
    nbar: f64,
    cycles: f64,
    residual: f64,
}

#[derive(Serialize)]
struct RateRow {
    p_a: f64,
    p_b: f64,
    p_e: f64,
    yield_y: f64,
    rate_hz: f64,
    double_emission: f64,
}

#[derive(Serialize)]
struct TauRow {
    tau_ns: f64,
    c_timebin: f64,
    grid_tau_ns: f64,
    grid_points: usize,
}

#[derive(Serialize)]
struct BudgetRow {
    label: String,
    fidelity_error: f64,
    kind: String,
}

#[derive(Serialize)]
struct FrameRow {
    frame: usize,
    attempt_id: u32,
    sync_ps: u64,
    early_mark_ps: Option<u64>,
    late_mark_ps: Option<u64>,
    n_early: usize,
    n_late: usize,
}

#[derive(Serialize)]
struct YieldRow {
    delta_t_ns: f64,
    candidates: u64,
    accepted: u64,
    yield_frac: f64,
    std_err: f64,
}

#[derive(Serialize)]
struct ClassifyRow {
    frame: usize,
    attempt_id: u32,
    herald: String,
    deviation_ps: Option<f64>,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::reference_defaults(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Command::Simulate { workers: Some(w), .. } = &cli.command {
        if *w == 0 {
            return Err(CliError::Parameter("--workers must be at least 1".into()));
        }
        cfg = cfg.with_workers(*w);
    }
    Ok(cfg)
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_input(path)?).map_err(|e| CliError::Data(format!("{} is not UTF-8: {e}", path.display())))
}

fn decode_log(path: &Path, format: InputFormat) -> Result<Vec<ionlink::event_stream::TimeTagRecord>, CliError> {
    let bytes = read_input(path)?;
    let format = match format {
        InputFormat::Auto => StreamFormat::detect(&bytes),
        InputFormat::Binary => StreamFormat::Binary,
        InputFormat::Csv => StreamFormat::Csv,
    };
    Ok(parse_stream(&bytes, format)?)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Parameter(format!("{name} must be positive, got {v}")))
    }
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let fmt = cli.format;
    match &cli.command {
        Command::Geometry => {
            let mut out = Vec::new();
            for n in &cfg.nodes {
                let angles = n.angles();
                for m in &n.modes {
                    let a = angles.axis(m.axis);
                    out.push(GeometryRow {
                        node: n.id.to_string(),
                        axis: m.axis.to_string(),
                        freq_khz: m.freq_hz * 1e-3,
                        alpha_deg: n.geometry.alpha_deg,
                        beam_tilt_deg: n.geometry.beam_tilt_deg,
                        theta_deg: a.theta_deg,
                        psi_deg: a.psi_deg,
                    });
                }
            }
            rows(&out, fmt)
        }
        Command::Recoil { tau_ns } => {
            let tau = match tau_ns {
                Some(t) => positive("--tau-ns", *t)? * 1e-9,
                None => cfg.protocol.tau_s,
            };
            let modes = cfg.all_modes();
            let out: Vec<RecoilRow> = commensurability(&modes, tau)
                .into_iter()
                .map(|c| {
                    let m = modes.iter().find(|m| m.node == c.node && m.axis == c.axis).expect("mode present");
                    RecoilRow {
                        node: c.node.to_string(),
                        axis: c.axis.to_string(),
                        freq_khz: c.freq_hz * 1e-3,
                        eta: m.eta,
                        zeta: m.zeta,
                        nbar: m.nbar,
                        cycles: c.cycles,
                        residual: c.residual,
                    }
                })
                .collect();
            rows(&out, fmt)
        }
        Command::Rate => {
            let (p_a, p_b) = (cfg.nodes[0].collection_prob(), cfg.nodes[1].collection_prob());
            let yield_y = window_stats(cfg.protocol.delta_t_s, cfg.tau_r_s()).yield_y;
            let r = success_prob_and_rate(p_a, p_b, yield_y, cfg.protocol.rep_rate_hz, cfg.protocol.duty);
            let e = &cfg.nodes[0].emitter;
            let row = RateRow {
                p_a,
                p_b,
                p_e: r.p_e,
                yield_y,
                rate_hz: r.rate_hz,
                double_emission: double_emission_prob(e.p_exc, e.branch_sigma, cfg.pulse_len_s, cfg.tau_r_s()),
            };
            eprintln!("P_E={:.1e} rate={:.2} s^-1", row.p_e, row.rate_hz);
            record(&row, fmt)
        }
        Command::Simulate { attempts, events, .. } => {
            let timing = match events {
                Some(_) => Some(EventTiming::from_protocol(&cfg.protocol)?),
                None => None,
            };
            let opts = RunOptions {
                workers: cfg.workers,
                events: timing,
                ..RunOptions::new(*attempts, cfg.seed)
            };
            let out = run(&cfg.nodes, &cfg.protocol, &cfg.noise, &opts);
            if let Some(path) = events {
                let bytes = if path.extension().is_some_and(|e| e == "csv") {
                    encode_csv(&out.events).into_bytes()
                } else {
                    encode_binary(&out.events)
                };
                std::fs::write(path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            }
            record(&out.tally.summary(&cfg.protocol), fmt)
        }
        Command::SweepWindow { dt } => {
            let dts: Vec<f64> = match dt {
                Some(v) => v.iter().map(|x| x * 1e-9).collect(),
                None => (1..=50).map(|k| k as f64 * 1e-9).collect(),
            };
            let s = sweep_window(&cfg.nodes, &dts, cfg.file.planner.angle_uncertainty_deg, &cfg.bell_state)?;
            rows(&s.rows, fmt)
        }
        Command::SweepTau { from_ns, to_ns, step_ns } => {
            let p = &cfg.file.planner;
            let range = (from_ns.unwrap_or(p.tau_min_ns) * 1e-9, to_ns.unwrap_or(p.tau_max_ns) * 1e-9);
            let step = step_ns.unwrap_or(p.tau_resolution_ns) * 1e-9;
            let curves = sweep_tau(&cooling_levels(&cfg.nodes, &cfg.doppler)?, range, step)?;
            match fmt {
                Format::Json => json(&curves),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let header: Vec<&str> = std::iter::once("tau_ns").chain(curves.iter().map(|c| c.label.as_str())).collect();
                    let csv_err = |e: csv::Error| CliError::Other(e.to_string());
                    w.write_record(&header).map_err(csv_err)?;
                    for i in 0..curves.first().map_or(0, |c| c.x.len()) {
                        let row: Vec<String> = std::iter::once(curves[0].x[i].to_string())
                            .chain(curves.iter().map(|c| c.y[i].to_string()))
                            .collect();
                        w.write_record(&row).map_err(csv_err)?;
                    }
                    w.into_inner().map_err(|e| CliError::Other(e.to_string()))
                }
            }
        }
        Command::TuneTau {
            from_ns,
            to_ns,
            resolution_ns,
        } => {
            let p = &cfg.file.planner;
            let range = (from_ns.unwrap_or(p.tau_min_ns) * 1e-9, to_ns.unwrap_or(p.tau_max_ns) * 1e-9);
            let t = tune_tau(&cfg.all_modes(), range, resolution_ns.unwrap_or(p.tau_resolution_ns) * 1e-9)?;
            record(
                &TauRow {
                    tau_ns: t.tau_s * 1e9,
                    c_timebin: t.c_timebin,
                    grid_tau_ns: t.grid_tau_s * 1e9,
                    grid_points: t.grid_points,
                },
                fmt,
            )
        }
        Command::Budget { predict: false } => {
            let t = compose_error_budget(&cfg.budget)?;
            if fmt == Format::Json {
                return json(&t);
            }
            let mut out: Vec<BudgetRow> = t
                .entries
                .iter()
                .map(|e| BudgetRow {
                    label: e.label.clone(),
                    fidelity_error: e.fidelity_error,
                    kind: serde_json::to_value(e.bound).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                })
                .collect();
            out.push(BudgetRow {
                label: "TOTAL".into(),
                fidelity_error: t.total_rounded,
                kind: "total".into(),
            });
            rows(&out, fmt)
        }
        Command::Budget { predict: true } => {
            let p = predict_fidelity(&cfg.nodes, &cfg.protocol, &cfg.budget)?;
            eprintln!("predicted fidelity {:.4}", p.fidelity);
            if fmt == Format::Json {
                return json(&p);
            }
            let mut out: Vec<BudgetRow> = p
                .terms
                .iter()
                .map(|t| BudgetRow {
                    label: t.label.clone(),
                    fidelity_error: t.fidelity_error,
                    kind: if t.from_model { "model" } else { "budget" }.into(),
                })
                .collect();
            out.push(BudgetRow {
                label: "TOTAL".into(),
                fidelity_error: p.total_error,
                kind: "total".into(),
            });
            out.push(BudgetRow {
                label: "FIDELITY".into(),
                fidelity_error: p.fidelity,
                kind: "prediction".into(),
            });
            rows(&out, fmt)
        }
        Command::Parse { input, input_format } => {
            let records = decode_log(input, *input_format)?;
            let framing = frame_attempts(&records);
            eprintln!(
                "{} records, {} frames, {} warnings",
                records.len(),
                framing.frames.len(),
                framing.warnings.len()
            );
            if fmt == Format::Json {
                return json(&framing);
            }
            let out: Vec<FrameRow> = framing
                .frames
                .iter()
                .map(|f| FrameRow {
                    frame: f.index,
                    attempt_id: f.attempt_id,
                    sync_ps: f.sync_ps,
                    early_mark_ps: f.early_mark_ps,
                    late_mark_ps: f.late_mark_ps,
                    n_early: f.early.len(),
                    n_late: f.late.len(),
                })
                .collect();
            rows(&out, fmt)
        }
        Command::Classify {
            input,
            input_format,
            dt_ns,
            rule,
            calibrate,
            yields,
        } => {
            let records = decode_log(input, *input_format)?;
            let frames = frame_attempts(&records).frames;
            let calibration = if *calibrate {
                ArrivalCalibration::estimate(&frames)
            } else {
                ArrivalCalibration::default()
            };
            let rule = match rule {
                Rule::Difference => WindowRule::Difference,
                Rule::PerBin => WindowRule::PerBin,
            };
            if let Some(list) = yields {
                let dts = list
                    .iter()
                    .map(|x| positive("--yields", *x).map(|v| v * 1e-9))
                    .collect::<Result<Vec<_>, _>>()?;
                let out: Vec<YieldRow> = yield_sweep(&frames, &calibration, rule, &dts)
                    .into_iter()
                    .zip(list)
                    .map(|(p, &ns)| YieldRow {
                        delta_t_ns: ns,
                        candidates: p.candidates,
                        accepted: p.accepted,
                        yield_frac: p.yield_frac,
                        std_err: p.std_err,
                    })
                    .collect();
                return rows(&out, fmt);
            }
            let delta_t_s = match dt_ns {
                Some(v) => positive("--dt-ns", *v)? * 1e-9,
                None => cfg.protocol.delta_t_s,
            };
            let c = classify_frames(
                &frames,
                &ClassifyOptions {
                    delta_t_s,
                    rule,
                    calibration,
                },
            );
            let s = &c.summary;
            eprintln!(
                "frames {} excluded {} psi+ {} psi- {} same-bin {} missing {} out-of-window {}",
                s.frames, s.excluded, s.psi_plus, s.psi_minus, s.same_bin, s.missing_photon, s.out_of_window
            );
            if fmt == Format::Json {
                return json(&c);
            }
            let out: Vec<ClassifyRow> = c
                .results
                .iter()
                .map(|r| ClassifyRow {
                    frame: r.frame,
                    attempt_id: r.attempt_id,
                    herald: r.herald.to_string(),
                    deviation_ps: r.deviation_s.map(|d| (d * 1e12).round()),
                })
                .collect();
            rows(&out, fmt)
        }
        Command::FitParity {
            input,
            zero_offset,
            fixed_phase_rad,
        } => {
            let points = read_parity_csv(&read_text(input)?)?;
            let opts = ParityFitOptions {
                offset: if *zero_offset { OffsetMode::Zero } else { OffsetMode::Free },
                fixed_phase_rad: *fixed_phase_rad,
                ..Default::default()
            };
            record(&fit_parity(&points, &opts)?, fmt)
        }
        Command::FitRamsey { input, cap_amplitude } => {
            let points = read_ramsey_csv(&read_text(input)?)?;
            let opts = RamseyOptions {
                cap_amplitude: *cap_amplitude,
            };
            record(&fit_ramsey(&points, &opts)?, fmt)
        }
        Command::Threshold { bright, dark } => {
            let t = optimal_threshold(*bright, *dark).map_err(|e| CliError::Parameter(e.to_string()))?;
            record(&t, fmt)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve_config(&cli).and_then(|cfg| {
        eprintln!(
            "# config: {}",
            cli.config.as_ref().map_or("built-in reference defaults".into(), |p| p.display().to_string())
        );
        eprintln!("# seed: {}", cfg.seed);
        for line in cfg.echo().lines() {
            eprintln!("#   {line}");
        }
        let bytes = execute(&cli, &cfg)?;
        emit(&bytes, cli.out.as_deref())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
