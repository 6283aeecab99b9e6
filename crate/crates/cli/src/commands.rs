use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use collab_activity::dynamics::{
    classify_stability, euler_integrate, ActivityState, SimulationSummary, SimulationTrace, Stability,
};
use collab_activity::estimate::{read_ratio_csv, sliding_window_fit, write_ratio_csv, EstimateError};
use collab_activity::graph::{read_edge_list, read_events, write_edge_list, NetworkSummary};
use collab_activity::metrics::{momentum, normalized_ratio_sd, MomentumReport};
use collab_activity::preprocess::{self, PreprocessConfig};
use collab_activity::spectral::spectral_radius;
use collab_activity::synth::{karate_club, random_initial_activity, scenario_series, ScenarioSpec};
use collab_activity::{ActivitySeries, CollaborationNetwork, DynamicsParams};
use serde_json::json;

use crate::config::Overrides;
use crate::manifest::{FileDigest, RunManifest};
use crate::{
    AnalyzeArgs, EstimateArgs, FitFlags, IngestArgs, MetricsArgs, NetworkArgs, PreprocessArgs, SimulateArgs, SynthArgs,
};

pub enum Failure {
    /// Bad or unreadable input (exit 1).
    Input(anyhow::Error),
    /// Non-convergence or divergence (exit 2).
    Numerical(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_network(args: &NetworkArgs) -> anyhow::Result<(CollaborationNetwork, Vec<PathBuf>)> {
    if args.karate {
        return Ok((karate_club(), Vec::new()));
    }
    let path = args
        .network
        .as_ref()
        .ok_or_else(|| anyhow!("--network or --karate is required"))?;
    let mut inputs = vec![path.clone()];
    let sidecar = match &args.sidecar {
        Some(p) => {
            inputs.push(p.clone());
            let summary: NetworkSummary =
                serde_json::from_reader(open(p)?).with_context(|| format!("parsing {}", p.display()))?;
            Some(summary)
        }
        None => None,
    };
    let net = read_edge_list(open(path)?, sidecar.as_ref()).with_context(|| format!("reading {}", path.display()))?;
    if net.node_count() == 0 {
        bail!("{} contains no users", path.display());
    }
    Ok((net, inputs))
}

fn kappa1_of(net: &CollaborationNetwork) -> Result<f64, Failure> {
    spectral_radius::<f64>(net)
        .map(|r| r.kappa1)
        .map_err(|e| Failure::Numerical(anyhow!(e).context("spectral radius")))
}

fn summary_with_kappa(net: &CollaborationNetwork) -> Result<NetworkSummary, Failure> {
    let mut summary = NetworkSummary::of(net);
    summary.kappa1 = Some(kappa1_of(net)?);
    Ok(summary)
}

fn write_network(net: &CollaborationNetwork, prefix: &Path) -> Result<NetworkSummary, Failure> {
    let summary = summary_with_kappa(net)?;
    let edges = with_extension(prefix, "tsv");
    let mut out = create(&edges)?;
    write_edge_list(net, &mut out).with_context(|| format!("writing {}", edges.display()))?;
    out.flush()?;
    write_json(&with_extension(prefix, "json"), &summary)?;
    Ok(summary)
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn ingest(args: &IngestArgs) -> Outcome {
    let events = read_events(open(&args.events)?).with_context(|| format!("reading {}", args.events.display()))?;
    let net = args.mode.build(&events)?;
    log::info!(
        "{} events -> {} users, {} edges",
        events.len(),
        net.node_count(),
        net.edge_count()
    );
    let summary = write_network(&net, &args.out_prefix)?;
    print_json(&summary)?;
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Outcome {
    let (net, _) = load_network(&args.net)?;
    let r = collab_activity::spectral::largest_eigenvalue::<f64>(
        &net,
        args.tol,
        collab_activity::spectral::DEFAULT_MAX_ITER,
    )
    .map_err(|e| Failure::Numerical(e.into()))?;
    let mut summary = NetworkSummary::of(&net);
    summary.kappa1 = Some(r.kappa1);
    log::info!(
        "power iteration: {} iterations, residual {:e}",
        r.iterations,
        r.residual
    );
    if let Some(out) = &args.out {
        write_json(out, &summary)?;
    }
    print_json(&summary)?;
    Ok(())
}

pub fn preprocess(args: &PreprocessArgs) -> Outcome {
    let cfg = PreprocessConfig {
        rolling_window_days: args.rolling_days,
        min_total_activity: args.min_total,
        window_weeks: args.window_weeks,
        lead_weeks: args.lead_weeks,
    };
    let events = read_events(open(&args.events)?).with_context(|| format!("reading {}", args.events.display()))?;
    let trimmed = preprocess::preprocess::<f64>(&events, &cfg)?;
    for w in &trimmed.warnings {
        eprintln!("warning: {w}");
    }
    let mut out = create(&args.out)?;
    trimmed.series.write_csv(&mut out)?;
    out.flush()?;
    if let Some(raw_path) = &args.raw_out {
        // raw totals over exactly the kept users and weeks
        let raw = preprocess::raw_weekly::<f64>(&events)?;
        let first = trimmed.series.weeks()[0];
        let offset = raw.weeks().iter().position(|&w| w == first).unwrap_or(0);
        let raw = raw.slice_weeks(offset..offset + trimmed.series.n_weeks());
        let keep: Vec<bool> = raw.users().iter().map(|u| trimmed.series.users().contains(u)).collect();
        let raw = raw.retain_users(|i| keep[i]);
        let mut out = create(raw_path)?;
        raw.write_csv(&mut out)?;
        out.flush()?;
    }
    log::info!(
        "{} users x {} weeks written to {}",
        trimmed.series.n_users(),
        trimmed.series.n_weeks(),
        args.out.display()
    );
    Ok(())
}

fn flag_overrides(f: &FitFlags) -> Overrides {
    Overrides {
        window_weeks: f.window_weeks,
        learning_rate: f.eta,
        convergence_eps: f.eps,
        max_iterations: f.max_iter,
        use_newton: f.no_newton.then_some(false),
        ratio_init: f.ratio_init,
        dtau: f.dtau,
        tau_per_step: f.tau_per_step,
        objective: f.objective,
        gamma: f.gamma,
    }
}

pub fn estimate(args: &EstimateArgs) -> Outcome {
    let started = Instant::now();
    let file = match &args.config {
        Some(p) => Overrides::load(p)?,
        None => Overrides::default(),
    };
    let settings = file.merged_with(&flag_overrides(&args.fit));
    let cfg = settings.estimation();
    let spec = settings.objective();
    cfg.validate()?;

    let (net, mut inputs) = load_network(&args.net)?;
    let series = ActivitySeries::read_csv(open(&args.activity)?)
        .with_context(|| format!("reading {}", args.activity.display()))?;
    inputs.push(args.activity.clone());
    if let Some(c) = &args.config {
        inputs.push(c.clone());
    }
    let kappa1 = kappa1_of(&net)?;
    log::info!(
        "fitting {} windows of {} weeks (kappa1 = {kappa1:.6})",
        (series.n_weeks() + 1).saturating_sub(cfg.window_weeks),
        cfg.window_weeks
    );

    let ratios = sliding_window_fit(&series, &net, kappa1, &cfg, spec).map_err(|e| match e {
        EstimateError::NoWindowConverged { .. } => Failure::Numerical(e.into()),
        other => Failure::Input(other.into()),
    })?;
    for entry in ratios.entries.iter().filter(|e| !e.converged) {
        log::warn!(
            "window for {}: {}",
            entry.target_week,
            entry.error.as_deref().unwrap_or("did not converge")
        );
    }
    let mut out = create(&args.out)?;
    write_ratio_csv(&ratios, &mut out)?;
    out.flush()?;
    drop(out);

    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| with_extension(&args.out, "manifest.json"));
    let d = cfg.dynamics;
    let manifest = RunManifest {
        command: "estimate".into(),
        arguments: std::env::args().skip(1).collect(),
        tool_version: env!("CARGO_PKG_VERSION"),
        config: json!({
            "estimation": {
                "window_weeks": cfg.window_weeks,
                "learning_rate": cfg.learning_rate,
                "convergence_eps": cfg.convergence_eps,
                "max_iterations": cfg.max_iterations,
                "use_newton": cfg.use_newton,
                "ratio_init": cfg.ratio_init,
            },
            "dynamics": { "dtau": d.dtau, "tau_per_step": d.tau_per_step },
            "objective": { "kind": format!("{:?}", spec.kind), "gamma": spec.gamma },
            "kappa1": kappa1,
        }),
        inputs: inputs
            .iter()
            .map(|p| FileDigest::of(p))
            .collect::<anyhow::Result<_>>()?,
        outputs: vec![FileDigest::of(&args.out)?],
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&manifest_path)?;
    eprintln!(
        "{} ratios ({} converged) written to {}",
        ratios.len(),
        ratios.converged_count(),
        args.out.display()
    );
    Ok(())
}

/// `user,value` lines; a leading header row is skipped. Users not listed
/// start at zero.
fn read_initial_state(path: &Path, net: &CollaborationNetwork) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut x = vec![0.0; net.node_count()];
    for (row, raw) in text.lines().enumerate() {
        let line = row + 1;
        let raw = raw.trim();
        if raw.is_empty() || (row == 0 && raw.to_ascii_lowercase().starts_with("user")) {
            continue;
        }
        let Some((user, value)) = raw.split_once(',') else {
            bail!("{}:{line}: expected user,value", path.display());
        };
        let i = net
            .index_of(user.trim())
            .ok_or_else(|| anyhow!("{}:{line}: user {user:?} is not in the network", path.display()))?;
        x[i] = value
            .trim()
            .parse()
            .map_err(|_| anyhow!("{}:{line}: invalid value {value:?}", path.display()))?;
    }
    Ok(x)
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    let (net, _) = load_network(&args.net)?;
    let kappa1 = kappa1_of(&net)?;
    let ratios: Vec<f64> = match (&args.ratio, &args.ratios) {
        (Some(r), _) => vec![*r; args.weeks.unwrap_or(52)],
        (None, Some(path)) => {
            let series =
                read_ratio_csv::<f64, _>(open(path)?).with_context(|| format!("reading {}", path.display()))?;
            let r = series.ratios();
            match args.weeks {
                Some(w) if w > r.len() => {
                    return Err(anyhow!("--weeks {w} exceeds the {} ratios in {}", r.len(), path.display()).into())
                }
                Some(w) => r[..w].to_vec(),
                None => r,
            }
        }
        (None, None) => return Err(anyhow!("--ratio or --ratios is required").into()),
    };
    if ratios.is_empty() || args.weeks == Some(0) {
        return Err(anyhow!("at least one week must be simulated").into());
    }
    let defaults = DynamicsParams::new(ratios[0]);
    let params = DynamicsParams {
        dtau: args.dtau.unwrap_or(defaults.dtau),
        tau_per_step: args.tau_per_step.unwrap_or(defaults.tau_per_step),
        ..defaults
    };
    params.validate()?;

    let x0 = if args.init == "random" {
        random_initial_activity(&net, args.init_low, args.init_high, args.seed)?
    } else {
        read_initial_state(Path::new(&args.init), &net)?
    };

    let constant = ratios.iter().all(|&r| r == ratios[0]);
    let trace = if constant {
        euler_integrate(&net, &x0, params, ratios.len())?
    } else {
        let mut trace = SimulationTrace::start(ActivityState {
            x: x0.clone(),
            tau: 0.0,
        });
        let mut x = x0;
        for (k, &r) in ratios.iter().enumerate() {
            let step = euler_integrate(&net, &x, params.with_ratio(r), 1)?;
            if step.diverged {
                trace.diverged = true;
                break;
            }
            x = step.last().x.clone();
            trace.push(ActivityState {
                x: x.clone(),
                tau: params.tau_per_step * (k + 1) as f64,
            });
        }
        trace
    };

    let mut out = create(&args.out)?;
    trace.write_aggregate_csv(&mut out)?;
    if let Some(wide) = &args.wide {
        let mut w = create(wide)?;
        trace.write_wide_csv(&net, &mut w)?;
    }
    // stability of the mean ratio when the ratio varies by week
    let ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let stability = classify_stability(kappa1, ratio);
    let summary = SimulationSummary {
        ratio,
        kappa1,
        stable: stability.is_stable(),
        marginal: stability == Stability::Unstable { marginal: true },
        diverged: trace.diverged,
        negativity_events: trace.negativity_events,
        steps: trace.states.len() - 1,
        final_aggregate: *trace.aggregate.last().expect("trace holds the initial state"),
    };
    if let Some(p) = &args.summary {
        write_json(p, &summary)?;
    }
    print_json(&summary)?;
    if trace.diverged {
        return Err(Failure::Numerical(anyhow!(
            "integration diverged after {} steps; try a smaller --dtau",
            summary.steps
        )));
    }
    Ok(())
}

pub fn metrics(args: &MetricsArgs) -> Outcome {
    let rho = match (args.rho, &args.ratios) {
        (Some(rho), _) => rho,
        (None, Some(path)) => {
            let series =
                read_ratio_csv::<f64, _>(open(path)?).with_context(|| format!("reading {}", path.display()))?;
            let kappa1 = args
                .kappa1
                .ok_or_else(|| anyhow!("--kappa1 is required with --ratios"))?;
            normalized_ratio_sd(&series.ratios(), kappa1)?
        }
        (None, None) => return Err(anyhow!("--ratios or --rho is required").into()),
    };
    let report = match (args.mean_activity, args.last_month_activity, &args.activity) {
        (Some(mean), Some(last), _) => MomentumReport::new(rho, mean, last)?,
        (_, _, Some(path)) => {
            let series =
                ActivitySeries::read_csv(open(path)?).with_context(|| format!("reading {}", path.display()))?;
            momentum(rho, &series.weekly_totals())?
        }
        _ => return Err(anyhow!("--activity or --mean-activity with --last-month-activity is required").into()),
    };
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    println!("{}", args.label);
    println!("{report}");
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Outcome {
    let spec = ScenarioSpec {
        n_weeks: args.weeks,
        ..ScenarioSpec::new(args.scenario, args.base, args.step, args.seed)
    };
    let net = karate_club();
    let series = scenario_series::<f64>(&spec, &net)?;
    let activity = args.out_dir.join("activity.csv");
    let mut out = create(&activity)?;
    series.write_csv(&mut out)?;
    out.flush()?;
    let summary = write_network(&net, &args.out_dir.join("network"))?;
    log::info!(
        "{:?} scenario: {} weeks, kappa1 = {:.6}",
        spec.kind,
        spec.n_weeks,
        summary.kappa1.unwrap_or(f64::NAN)
    );
    Ok(())
}
