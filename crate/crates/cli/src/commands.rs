use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use scldpc::evolution::{
    build_scaling_params, de_threshold, uncoupled_decoded_fraction, uncoupled_threshold, EstimateConfig,
    ScalingParams,
};
use scldpc::montecarlo::{self, read_sim_rows, run_experiment, ExperimentSpec, StopRule};
use scldpc::scaling::predict::{read_predictions, write_predictions, write_reconciliation};
use scldpc::scaling::{OlmosBaseline, Predictor, RatePrediction};
use scldpc::window::Accounting;
use scldpc::{fmt_f64, Decoder, EnsembleParams, Termination, WindowConfig};

use crate::config::{merge, CompareArgs, EstimateArgs, PredictArgs, SimulateArgs, ThresholdArgs};
use crate::{Common, ConfigError, ResourceAbort};

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| config_err(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(f))
}

#[derive(Serialize)]
struct Resolved<'a, T: Serialize> {
    seed: u64,
    threads: Option<usize>,
    out: &'a Path,
    #[serde(flatten)]
    section: std::collections::BTreeMap<&'a str, &'a T>,
}

/// Writes `resolved.toml`: the settings the run actually used.
fn write_resolved<T: Serialize>(c: &Common, name: &str, args: &T) -> anyhow::Result<()> {
    let r = Resolved {
        seed: c.seed,
        threads: c.threads,
        out: &c.out,
        section: [(name, args)].into_iter().collect(),
    };
    let text = toml::to_string(&r).context("serializing resolved config")?;
    let mut w = create(&c.out, "resolved.toml")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn say(c: &Common, level: u8, msg: impl AsRef<str>) {
    if c.verbose >= level {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn threshold(c: &Common, flags: &ThresholdArgs) -> anyhow::Result<()> {
    let mut a = merge(c.file.threshold.as_ref(), flags)?;
    let dv = *a.dv.get_or_insert(5);
    let dc = *a.dc.get_or_insert(10);
    let l = *a.l.get_or_insert(50);
    let tol = *a.tol.get_or_insert(1e-5);
    write_resolved(c, "threshold", &a)?;
    let eps = de_threshold(dv, dc, l, tol)?;
    let bp = uncoupled_threshold(dv, dc, tol)?;
    let alpha_lb = eps * uncoupled_decoded_fraction(eps, dv, dc);
    let text = format!(
        "eps_star {}\nuncoupled_threshold {}\nalpha_lb_per_l {}\n",
        fmt_f64(eps),
        fmt_f64(bp),
        fmt_f64(alpha_lb)
    );
    print!("{text}");
    let mut w = create(&c.out, "threshold.txt")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn default_grid(eps_star: f64) -> Vec<f64> {
    (0..6).map(|k| ((eps_star - 0.06 + 0.01 * k as f64) * 1e4).round() / 1e4).collect()
}

pub fn estimate(c: &Common, flags: &EstimateArgs) -> anyhow::Result<()> {
    let mut a = merge(c.file.estimate.as_ref(), flags)?;
    let dv = *a.dv.get_or_insert(5);
    let dc = *a.dc.get_or_insert(10);
    let l = *a.l.get_or_insert(50);
    let n = *a.n.get_or_insert(10_000);
    let trials = *a.trials.get_or_insert(200);
    let tol = *a.plateau_tol.get_or_insert(0.02);
    let de_tol = *a.de_tol.get_or_insert(1e-5);
    let stride = *a.stride.get_or_insert(0);
    let base = EnsembleParams::new(dv, dc, l, n, Termination::Terminated)?;
    if a.grid.is_none() {
        a.grid = Some(default_grid(de_threshold(dv, dc, l, de_tol)?));
    }
    let grid = a.grid.clone().unwrap_or_default();
    write_resolved(c, "estimate", &a)?;

    let mut cfg = EstimateConfig::default();
    cfg.trajectory.n_trials = trials;
    cfg.trajectory.stride = stride;
    cfg.plateau.tol = tol;
    cfg.nu_theta.trajectory.n_trials = trials;
    cfg.nu_theta.trajectory.stride = stride;
    cfg.nu_theta.plateau.tol = tol;
    cfg.nu_theta_epsilon = a.nu_theta_epsilon;
    cfg.de_tol = de_tol;
    say(c, 1, format!("estimating {} grid points at N = {n}, {trials} trials", grid.len()));
    let est = build_scaling_params(base, &grid, &cfg, c.seed)?;
    est.params.save(&c.out.join("scaling.txt"))?;

    let mut w = create(&c.out, "estimate_report.txt")?;
    writeln!(w, "eps_star {}", fmt_f64(est.params.eps_star))?;
    writeln!(
        w,
        "nu_theta epsilon={} nu={} theta={} window=[{:.3},{:.3}] trials_used={}",
        fmt_f64(est.nu_theta_epsilon),
        fmt_f64(est.nu_theta.nu),
        fmt_f64(est.nu_theta.theta),
        est.nu_theta.window.0,
        est.nu_theta.window.1,
        est.nu_theta.trials_used
    )?;
    for p in &est.points {
        let (t, u) = (&p.terminated, &p.truncated);
        writeln!(
            w,
            "point epsilon={} term=[{:.3},{:.3}] gamma_term={:.4} trunc_alpha={:.3} gamma_trunc={:.4} ratio={:.4} speed={:.4} failures_term={} failures_trunc={}",
            fmt_f64(p.epsilon),
            t.alpha,
            t.beta,
            t.gamma,
            u.alpha,
            u.gamma,
            t.gamma / u.gamma,
            p.speed,
            p.failures_term,
            p.failures_trunc
        )?;
        for s in &p.sensitivity {
            let show = |x: Option<scldpc::evolution::SteadyState>| match x {
                Some(x) => format!("[{:.3},{:.3}] gamma={:.4}", x.alpha, x.beta, x.gamma),
                None => "unusable".into(),
            };
            writeln!(w, "  tol={} term {} trunc {}", s.tol, show(s.terminated), show(s.truncated))?;
        }
    }
    for (e, r) in est.params.gamma_ratios() {
        let flag = if (1.8..=2.2).contains(&r) { "ok" } else { "outside [1.8, 2.2]" };
        writeln!(w, "gamma_ratio epsilon={} ratio={:.4} {flag}", fmt_f64(e), r)?;
    }
    w.flush()?;
    println!("{}", c.out.join("scaling.txt").display());
    Ok(())
}

struct GridRow {
    epsilon: f64,
    n: usize,
    l: usize,
    w: Option<usize>,
}

fn parse_window(s: &str) -> anyhow::Result<Option<usize>> {
    if s == "full" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| config_err(format!("window `{s}` is neither `full` nor a size")))
}

fn read_grid(path: &Path) -> anyhow::Result<Vec<GridRow>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if i == 0 {
            if line != "epsilon,N,L,W" {
                return Err(config_err(format!("{}: header must be `epsilon,N,L,W`", path.display())));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || config_err(format!("{} line {}: bad row `{line}`", path.display(), i + 1));
        if f.len() != 4 {
            return Err(bad());
        }
        out.push(GridRow {
            epsilon: f[0].parse().map_err(|_| bad())?,
            n: f[1].parse().map_err(|_| bad())?,
            l: f[2].parse().map_err(|_| bad())?,
            w: parse_window(f[3])?,
        });
    }
    Ok(out)
}

fn baseline(a: &PredictArgs, t: &ScalingParams) -> anyhow::Result<OlmosBaseline> {
    let mut b = OlmosBaseline::five_ten(t.eps_star);
    let given = [a.baseline_alpha_per_l, a.baseline_gamma, a.baseline_nu, a.baseline_theta];
    if (t.dv, t.dc) != (5, 10) && given.iter().any(Option::is_none) {
        return Err(config_err("baseline constants are only built in for (5,10); set all four baseline_* keys"));
    }
    b.alpha_lb_per_l = a.baseline_alpha_per_l.unwrap_or(b.alpha_lb_per_l);
    b.gamma = a.baseline_gamma.unwrap_or(b.gamma);
    b.nu = a.baseline_nu.unwrap_or(b.nu);
    b.theta = a.baseline_theta.unwrap_or(b.theta);
    Ok(b)
}

pub fn predict(c: &Common, flags: &PredictArgs) -> anyhow::Result<()> {
    let mut a = merge(c.file.predict.as_ref(), flags)?;
    let table_path: PathBuf = a.table.clone().ok_or_else(|| config_err("predict needs --table"))?;
    let table = ScalingParams::load(&table_path)?;
    let model = a.model.get_or_insert_with(|| "refined".into()).clone();
    let (refined, olmos) = match model.as_str() {
        "refined" => (true, false),
        "olmos" => (false, true),
        "both" => (true, true),
        m => return Err(config_err(format!("unknown model `{m}`"))),
    };
    let reconcile = *a.reconcile.get_or_insert(false);

    let rows: Vec<GridRow> = if let Some(g) = &a.grid {
        read_grid(g)?
    } else {
        let eps = a.eps.clone().ok_or_else(|| config_err("predict needs --grid or --eps"))?;
        let ls = a.l.get_or_insert_with(|| vec![table.l]).clone();
        let ws: Vec<Option<usize>> = a
            .w
            .get_or_insert_with(|| vec!["full".into()])
            .iter()
            .map(|s| parse_window(s))
            .collect::<anyhow::Result<_>>()?;
        let ns: Vec<Option<usize>> = match a.latency {
            Some(_) => vec![None],
            None => a.n.get_or_insert_with(|| vec![1000]).iter().copied().map(Some).collect(),
        };
        let mut rows = Vec::new();
        for &e in &eps {
            for &l in &ls {
                for &w in &ws {
                    for &n in &ns {
                        let n = match (n, a.latency) {
                            (Some(n), _) => n,
                            (None, Some(lat)) => {
                                let span = w.unwrap_or(l) + table.dv - 1;
                                ((lat as f64 / span as f64).round() as usize).max(1)
                            }
                            (None, None) => unreachable!(),
                        };
                        rows.push(GridRow { epsilon: e, n, l, w });
                    }
                }
            }
        }
        rows
    };
    write_resolved(c, "predict", &a)?;

    let p = Predictor::new(&table);
    let base = if olmos { Some(baseline(&a, &table)?) } else { None };
    let mut out: Vec<RatePrediction> = Vec::new();
    let mut rec = Vec::new();
    for r in &rows {
        if refined {
            let pred = match r.w {
                Some(w) => p.window(r.epsilon, r.n, r.l, w)?,
                None => p.terminated(r.epsilon, r.n, r.l)?,
            };
            for note in &pred.notes {
                say(c, 1, format!("epsilon={} N={} L={} W={:?}: {note}", r.epsilon, r.n, r.l, r.w));
            }
            out.push(pred);
            if reconcile && r.w.is_none() {
                rec.push(p.reconcile(r.epsilon, r.n, r.l)?);
            }
        }
        if let (Some(b), None) = (&base, r.w) {
            out.push(b.predict(r.epsilon, r.n, r.l)?);
        }
    }
    let mut w = create(&c.out, "predictions.csv")?;
    write_predictions(&out, &mut w)?;
    w.flush()?;
    if reconcile {
        let mut w = create(&c.out, "reconciliation.csv")?;
        write_reconciliation(&rec, &mut w)?;
        w.flush()?;
    }
    println!("{}", c.out.join("predictions.csv").display());
    Ok(())
}

pub fn simulate(c: &Common, flags: &SimulateArgs) -> anyhow::Result<()> {
    let mut a = merge(c.file.simulate.as_ref(), flags)?;
    let dv = *a.dv.get_or_insert(5);
    let dc = *a.dc.get_or_insert(10);
    let l = *a.l.get_or_insert(50);
    let n = *a.n.get_or_insert(1000);
    let eps = a.eps.clone().ok_or_else(|| config_err("simulate needs --eps"))?;
    let decoder = a.decoder.get_or_insert_with(|| "full".into()).clone();
    let accounting = match a.accounting.get_or_insert_with(|| "final".into()).as_str() {
        "final" => Accounting::FinalState,
        "decision" => Accounting::AtDecision,
        x => return Err(config_err(format!("accounting must be `final` or `decision`, not `{x}`"))),
    };
    let decoder = match parse_window(&decoder)? {
        None => Decoder::FullBp,
        Some(w) => Decoder::Window(WindowConfig { size: w, accounting }),
    };
    let target = *a.target.get_or_insert(200);
    let max_frames = *a.max_frames.get_or_insert(100_000);
    let stop = match a.frames {
        Some(f) => StopRule::Frames(f),
        None => StopRule::Events { target, max_frames },
    };
    let params = EnsembleParams::new(dv, dc, l, n, Termination::Terminated)?;
    let spec = ExperimentSpec {
        stop,
        master_seed: c.seed,
        expurgate: *a.expurgate.get_or_insert(true),
        fixed_graph: *a.fixed_graph.get_or_insert(false),
        batch: *a.batch.get_or_insert(64),
        max_seconds: a.max_seconds,
        ..ExperimentSpec::new(params, eps, decoder)
    };
    write_resolved(c, "simulate", &a)?;
    let stats = run_experiment(&spec)?;
    let mut w = create(&c.out, "simulation.csv")?;
    stats.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&c.out, "manifest.txt")?;
    stats.write_manifest(&mut w)?;
    w.flush()?;
    for p in &stats.points {
        let f = p.fer();
        say(c, 1, format!("epsilon={} frames={} fer={:.4e} [{:.3e}, {:.3e}] stop={}", p.epsilon, p.tally.frames, f.value, f.lo, f.hi, p.stop));
    }
    if stats.partial {
        return Err(ResourceAbort(format!(
            "time budget exhausted after {} of {} points",
            stats.points.len(),
            spec.epsilons.len()
        ))
        .into());
    }
    println!("{}", c.out.join("simulation.csv").display());
    Ok(())
}

pub fn compare(c: &Common, flags: &CompareArgs) -> anyhow::Result<()> {
    let a = merge(c.file.compare.as_ref(), flags)?;
    let sim_path = a.sim.clone().ok_or_else(|| config_err("compare needs --sim"))?;
    let pred_path = a.pred.clone().ok_or_else(|| config_err("compare needs --pred"))?;
    write_resolved(c, "compare", &a)?;
    let sim = read_sim_rows(open(&sim_path)?)?;
    let pred = read_predictions(open(&pred_path)?)?;
    let report = montecarlo::compare(&sim, &pred);
    let mut w = create(&c.out, "report.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let flagged = report.flagged().count();
    println!("{} comparisons, {} outside a factor of 2", report.lines.len(), flagged);
    for l in report.flagged() {
        say(c, 1, format!("{} {} epsilon={} sim={:.4e} pred={:.4e} ratio={:.3}", l.model, l.metric, l.epsilon, l.simulated, l.predicted, l.ratio));
    }
    Ok(())
}
