//! Error-rate experiments and simulated-vs-predicted reports.
//!
//! Every frame draws a fresh graph and erasure pattern from a seed derived
//! from `(master_seed, point, frame)`. Frames run in fixed-size batches and
//! the stopping rule is only checked between batches, so the result does not
//! depend on the number of worker threads.

use std::fmt;
use std::io::{BufRead, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::ensemble::{sample_erasures, sample_graph, EnsembleParams, TannerGraph};
use crate::peeling::{peel_with, Outcome, TraceOptions};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::scaling::RatePrediction;
use crate::seed::{derive_seed, rng_from};
use crate::window::{decode, run_frame, Decoder, WindowOutcome};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Exactly this many frames per point.
    Frames(u64),
    /// Until `target` frame errors or `max_frames` frames, whichever is first.
    Events { target: u64, max_frames: u64 },
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule::Events { target: 200, max_frames: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: EnsembleParams,
    pub epsilons: Vec<f64>,
    pub decoder: Decoder,
    pub stop: StopRule,
    pub master_seed: u64,
    /// Count failures made only of size-2 stopping sets as successes.
    pub expurgate: bool,
    /// One graph for every frame. Debugging only: the laws describe the
    /// ensemble average.
    pub fixed_graph: bool,
    /// Frames per batch; the stopping rule is evaluated between batches.
    pub batch: usize,
    /// Wall-clock budget for the whole experiment. When exceeded, the points
    /// run so far are returned with [`StopReason::Budget`].
    pub max_seconds: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(params: EnsembleParams, epsilons: Vec<f64>, decoder: Decoder) -> Self {
        ExperimentSpec {
            params,
            epsilons,
            decoder,
            stop: StopRule::default(),
            master_seed: 0,
            expurgate: true,
            fixed_graph: false,
            batch: 64,
            max_seconds: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.epsilons.is_empty() {
            return Err(Error::InvalidParams("empty epsilon grid".into()));
        }
        if let Some(&e) = self.epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::InvalidEpsilon(e));
        }
        let ok = match self.stop {
            StopRule::Frames(n) => n >= 1,
            StopRule::Events { target, max_frames } => target >= 1 && max_frames >= 1,
        };
        if !ok || self.batch == 0 {
            return Err(Error::InvalidParams("stopping rule needs at least one frame and one event".into()));
        }
        if let Decoder::Window(w) = self.decoder {
            w.validate(&self.params)?;
        }
        Ok(())
    }
}

/// Why a point stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Frames,
    Events,
    /// Frame cap reached before the event target.
    Cap,
    /// Wall-clock budget exhausted; the point is partial.
    Budget,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Frames => "frames",
            StopReason::Events => "events",
            StopReason::Cap => "cap",
            StopReason::Budget => "budget",
        })
    }
}

/// Counts over a set of frames. Adding tallies is commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub expurgated: u64,
}

impl Tally {
    fn frame(o: &WindowOutcome, expurgate: bool) -> Tally {
        if expurgate && o.expurgated() {
            return Tally { frames: 1, expurgated: 1, ..Tally::default() };
        }
        Tally {
            frames: 1,
            frame_errors: o.frame_error as u64,
            bit_errors: o.bit_errors as u64,
            block_errors: o.block_errors as u64,
            expurgated: 0,
        }
    }

    fn add(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
            block_errors: self.block_errors + o.block_errors,
            expurgated: self.expurgated + o.expurgated,
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0.0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub events: u64,
}

impl Estimate {
    fn binomial(k: u64, n: u64) -> Estimate {
        let (lo, hi) = wilson(k, n);
        Estimate { value: if n == 0 { 0.0 } else { k as f64 / n as f64 }, lo, hi, events: k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats {
    pub epsilon: f64,
    pub tally: Tally,
    pub stop: StopReason,
    /// VNs per frame (`L N`).
    pub bits_per_frame: u64,
    /// Positions per frame (`L`).
    pub blocks_per_frame: u64,
}

impl PointStats {
    pub fn fer(&self) -> Estimate {
        Estimate::binomial(self.tally.frame_errors, self.tally.frames)
    }

    /// Bits are not independent within a frame; the interval treats them
    /// as if they were and is therefore too narrow.
    pub fn ber(&self) -> Estimate {
        Estimate::binomial(self.tally.bit_errors, self.tally.frames * self.bits_per_frame)
    }

    pub fn bler(&self) -> Estimate {
        Estimate::binomial(self.tally.block_errors, self.tally.frames * self.blocks_per_frame)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    pub spec: ExperimentSpec,
    pub points: Vec<PointStats>,
    /// True when the wall-clock budget cut the run short.
    pub partial: bool,
}

fn run_point(spec: &ExperimentSpec, index: usize, fixed: Option<&TannerGraph>, deadline: Option<Instant>) -> Result<PointStats> {
    let eps = spec.epsilons[index];
    let p = spec.params;
    let frame = |t: u64| -> Result<Tally> {
        let seed = derive_seed(spec.master_seed, &[index as u64, t]);
        let o = match fixed {
            Some(g) => {
                let e = sample_erasures(g.n_vns(), eps, derive_seed(seed, &[1]))?;
                decode(g, &e, spec.decoder, derive_seed(seed, &[2]))?
            }
            None => run_frame(p, eps, spec.decoder, seed)?,
        };
        Ok(Tally::frame(&o, spec.expurgate))
    };
    let (cap, target) = match spec.stop {
        StopRule::Frames(n) => (n, None),
        StopRule::Events { target, max_frames } => (max_frames, Some(target)),
    };
    let mut tally = Tally::default();
    let stop = loop {
        if let Some(t) = target {
            if tally.frame_errors >= t {
                break StopReason::Events;
            }
        }
        if tally.frames >= cap {
            break if target.is_some() { StopReason::Cap } else { StopReason::Frames };
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break StopReason::Budget;
        }
        let lo = tally.frames;
        let hi = (lo + spec.batch as u64).min(cap);
        let batch = (lo..hi)
            .into_par_iter()
            .map(frame)
            .try_reduce(Tally::default, |a, b| Ok(a.add(b)))?;
        tally = tally.add(batch);
    };
    Ok(PointStats {
        epsilon: eps,
        tally,
        stop,
        bits_per_frame: (p.l * p.n) as u64,
        blocks_per_frame: p.l as u64,
    })
}

/// Runs every grid point of `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ErrorStats> {
    spec.validate()?;
    let fixed = if spec.fixed_graph {
        Some(sample_graph(spec.params, derive_seed(spec.master_seed, &[u64::MAX]))?)
    } else {
        None
    };
    let deadline = spec.max_seconds.map(|s| Instant::now() + std::time::Duration::from_secs_f64(s));
    let mut points = Vec::with_capacity(spec.epsilons.len());
    let mut partial = false;
    for i in 0..spec.epsilons.len() {
        let pt = run_point(spec, i, fixed.as_ref(), deadline)?;
        partial |= pt.stop == StopReason::Budget;
        points.push(pt);
        if partial {
            break;
        }
    }
    Ok(ErrorStats { spec: spec.clone(), points, partial })
}

pub const STATS_HEADER: &str = "epsilon,frames,fer,fer_lo,fer_hi,ber,ber_lo,ber_hi,bler,bler_lo,bler_hi,expurgated";

/// One line of the simulation CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub epsilon: f64,
    pub frames: u64,
    pub fer: (f64, f64, f64),
    pub ber: (f64, f64, f64),
    pub bler: (f64, f64, f64),
    pub expurgated: u64,
}

impl From<&PointStats> for SimRow {
    fn from(p: &PointStats) -> Self {
        let t = |e: Estimate| (e.value, e.lo, e.hi);
        SimRow {
            epsilon: p.epsilon,
            frames: p.tally.frames,
            fer: t(p.fer()),
            ber: t(p.ber()),
            bler: t(p.bler()),
            expurgated: p.tally.expurgated,
        }
    }
}

impl ErrorStats {
    pub fn rows(&self) -> Vec<SimRow> {
        self.points.iter().map(SimRow::from).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_sim_rows(&self.rows(), w)
    }

    /// Spec, seeds, stopping outcomes and crate version.
    pub fn write_manifest<W: Write>(&self, mut w: W) -> Result<()> {
        let s = &self.spec;
        let p = s.params;
        writeln!(w, "scldpc {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "ensemble dv={} dc={} L={} N={} kind={:?}", p.dv, p.dc, p.l, p.n, p.kind)?;
        writeln!(w, "decoder {:?}", s.decoder)?;
        writeln!(w, "stop {:?}", s.stop)?;
        writeln!(w, "master_seed {}", s.master_seed)?;
        writeln!(w, "expurgate {}", s.expurgate)?;
        writeln!(w, "fixed_graph {}", s.fixed_graph)?;
        writeln!(w, "batch {}", s.batch)?;
        writeln!(w, "partial {}", self.partial)?;
        for (i, pt) in self.points.iter().enumerate() {
            writeln!(
                w,
                "point {i} epsilon={} frames={} frame_errors={} bit_errors={} block_errors={} expurgated={} stop={}",
                fmt_f64(pt.epsilon),
                pt.tally.frames,
                pt.tally.frame_errors,
                pt.tally.bit_errors,
                pt.tally.block_errors,
                pt.tally.expurgated,
                pt.stop
            )?;
        }
        Ok(())
    }
}

pub fn write_sim_rows<W: Write>(rows: &[SimRow], mut w: W) -> Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for r in rows {
        let t = |x: (f64, f64, f64)| format!("{},{},{}", fmt_f64(x.0), fmt_f64(x.1), fmt_f64(x.2));
        writeln!(w, "{},{},{},{},{},{}", fmt_f64(r.epsilon), r.frames, t(r.fer), t(r.ber), t(r.bler), r.expurgated)?;
    }
    Ok(())
}

fn split_checked<'a>(line: &'a str, i: usize, n: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != n {
        return Err(Error::Parse { line: i + 1, msg: format!("expected {n} fields, found {}", f.len()) });
    }
    Ok(f)
}

fn parse_field<T: std::str::FromStr>(s: &str, i: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad value `{s}`") })
}

pub fn read_sim_rows<R: BufRead>(r: R) -> Result<Vec<SimRow>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != STATS_HEADER {
                return Err(Error::Parse { line: 1, msg: "unexpected simulation header".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f = split_checked(&line, i, 12)?;
        let x = |k: usize| parse_field::<f64>(f[k], i);
        out.push(SimRow {
            epsilon: x(0)?,
            frames: parse_field(f[1], i)?,
            fer: (x(2)?, x(3)?, x(4)?),
            ber: (x(5)?, x(6)?, x(7)?),
            bler: (x(8)?, x(9)?, x(10)?),
            expurgated: parse_field(f[11], i)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Fer,
    Ber,
    Bler,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Fer => "fer",
            Metric::Ber => "ber",
            Metric::Bler => "bler",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub epsilon: f64,
    pub metric: Metric,
    pub simulated: f64,
    pub lo: f64,
    pub hi: f64,
    pub predicted: f64,
    /// `predicted / simulated`; infinite when nothing was observed.
    pub ratio: f64,
    /// Prediction outside `[sim / 2, 2 sim]`.
    pub flagged: bool,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

pub const REPORT_HEADER: &str = "epsilon,metric,simulated,sim_lo,sim_hi,predicted,ratio,flag,model";

impl Report {
    pub fn flagged(&self) -> impl Iterator<Item = &ReportLine> {
        self.lines.iter().filter(|l| l.flagged)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{REPORT_HEADER}")?;
        for l in &self.lines {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(l.epsilon),
                l.metric,
                fmt_f64(l.simulated),
                fmt_f64(l.lo),
                fmt_f64(l.hi),
                fmt_f64(l.predicted),
                fmt_f64(l.ratio),
                if l.flagged { "outside-2x" } else { "ok" },
                l.model
            )?;
        }
        Ok(())
    }
}

fn same_eps(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// Matches predictions to simulated points by epsilon. Predictions with no
/// simulated counterpart, and NaN predicted values, are skipped.
pub fn compare(sim: &[SimRow], predictions: &[RatePrediction]) -> Report {
    let mut lines = Vec::new();
    for p in predictions {
        let Some(s) = sim.iter().find(|s| same_eps(s.epsilon, p.epsilon)) else {
            continue;
        };
        for (metric, (v, lo, hi), pred) in [
            (Metric::Fer, s.fer, p.fer),
            (Metric::Ber, s.ber, p.ber),
            (Metric::Bler, s.bler, p.bler),
        ] {
            if pred.is_nan() {
                continue;
            }
            let ratio = if v == pred { 1.0 } else { pred / v };
            let flagged = !(pred >= 0.5 * v && pred <= 2.0 * v);
            lines.push(ReportLine {
                epsilon: s.epsilon,
                metric,
                simulated: v,
                lo,
                hi,
                predicted: pred,
                ratio,
                flagged,
                model: p.model.to_string(),
            });
        }
    }
    Report { lines }
}

/// First hit times of the failed, non-expurgated frames among `frames`
/// fresh frames, in frame order.
pub fn collect_hit_times(params: EnsembleParams, epsilon: f64, frames: u64, seed: u64) -> Result<Vec<f64>> {
    let opts = TraceOptions { record_positions: false, stride: usize::MAX };
    let per_frame = (0..frames)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>> {
            let s = derive_seed(seed, &[t]);
            let g = sample_graph(params, derive_seed(s, &[0]))?;
            let e = sample_erasures(g.n_vns(), epsilon, derive_seed(s, &[1]))?;
            let mut rng = rng_from(derive_seed(s, &[2]));
            let (trace, _) = peel_with(&g, &e, &mut rng, opts)?;
            Ok(match trace.outcome {
                Outcome::Failure => trace.tau0,
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_frame.into_iter().flatten().collect())
}

/// Goodness of fit of a shifted exponential with unknown location and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    /// Samples after dropping the minimum.
    pub n: usize,
    pub location: f64,
    pub scale: f64,
    /// Kolmogorov-Smirnov distance to the fitted exponential.
    pub d: f64,
    /// Stephens' modification `(D - 0.2 / n)(sqrt n + 0.26 + 0.5 / sqrt n)`.
    pub d_star: f64,
}

impl ExponentialFit {
    /// Stephens' upper-tail critical values of `d_star` for the exponential
    /// with estimated scale.
    pub const CRITICAL: [(f64, f64); 5] = [(0.15, 0.926), (0.10, 0.990), (0.05, 1.094), (0.025, 1.190), (0.01, 1.308)];

    /// True when the exponential is rejected at `level`, which must be one
    /// of the tabulated levels.
    pub fn rejects(&self, level: f64) -> Result<bool> {
        let (_, c) = Self::CRITICAL
            .iter()
            .find(|(a, _)| (a - level).abs() < 1e-12)
            .ok_or_else(|| Error::Domain(format!("no critical value tabulated at level {level}")))?;
        Ok(self.d_star > *c)
    }
}

/// Fits `min + Exp(scale)`. Spacings above the sample minimum of a shifted
/// exponential are themselves exponential, so the minimum is dropped and the
/// rest tested with estimated scale.
pub fn exponential_fit(samples: &[f64]) -> Result<ExponentialFit> {
    if samples.len() < 3 {
        return Err(Error::Domain("need at least 3 samples".into()));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let location = x[0];
    let y: Vec<f64> = x[1..].iter().map(|v| v - location).collect();
    let n = y.len();
    let scale = y.iter().sum::<f64>() / n as f64;
    if !(scale > 0.0) {
        return Err(Error::Domain("degenerate samples".into()));
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, v) in y.iter().enumerate() {
        let f = 1.0 - (-v / scale).exp();
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let d_star = (d - 0.2 / nf) * (nf.sqrt() + 0.26 + 0.5 / nf.sqrt());
    Ok(ExponentialFit { n, location, scale, d, d_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Termination;
    use crate::scaling::Model;
    use crate::window::WindowConfig;

    fn spec(eps: Vec<f64>) -> ExperimentSpec {
        let p = EnsembleParams::new(3, 6, 8, 40, Termination::Terminated).unwrap();
        ExperimentSpec { stop: StopRule::Frames(100), ..ExperimentSpec::new(p, eps, Decoder::FullBp) }
    }

    #[test]
    fn wilson_matches_reference_values() {
        // reference values from statsmodels proportion_confint(method="wilson")
        let (lo, hi) = wilson(10, 100);
        assert!((lo - 0.055_229_2).abs() < 1e-6 && (hi - 0.174_365_7).abs() < 1e-6, "{lo} {hi}");
        let (lo, hi) = wilson(0, 50);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.071_347_6).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn zero_erasures_give_no_errors() {
        let s = run_experiment(&spec(vec![0.0])).unwrap();
        assert_eq!(s.points[0].tally, Tally { frames: 100, ..Tally::default() });
    }

    #[test]
    fn repeatable_and_thread_independent() {
        let sp = spec(vec![0.45, 0.5]);
        let a = run_experiment(&sp).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_experiment(&sp).unwrap());
        assert_eq!(a, b);
        assert!(a.points[1].tally.frame_errors > 0);
    }

    #[test]
    fn event_target_or_cap_is_reached() {
        let mut sp = spec(vec![0.5, 0.05]);
        sp.stop = StopRule::Events { target: 20, max_frames: 300 };
        sp.batch = 16;
        let s = run_experiment(&sp).unwrap();
        assert_eq!(s.points[0].stop, StopReason::Events);
        assert!(s.points[0].tally.frame_errors >= 20);
        assert_eq!(s.points[1].stop, StopReason::Cap);
        assert_eq!(s.points[1].tally.frames, 300);
    }

    #[test]
    fn window_experiments_run() {
        let mut sp = spec(vec![0.4]);
        sp.decoder = Decoder::Window(WindowConfig::new(4));
        let s = run_experiment(&sp).unwrap();
        assert_eq!(s.points[0].tally.frames, 100);
        sp.decoder = Decoder::Window(WindowConfig::new(40));
        assert!(run_experiment(&sp).is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(run_experiment(&spec(vec![])).is_err());
        assert!(run_experiment(&spec(vec![1.5])).is_err());
        let mut sp = spec(vec![0.3]);
        sp.stop = StopRule::Frames(0);
        assert!(run_experiment(&sp).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = run_experiment(&spec(vec![0.3, 0.5])).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let rows = read_sim_rows(buf.as_slice()).unwrap();
        assert_eq!(rows, s.rows());
        let mut m = Vec::new();
        s.write_manifest(&mut m).unwrap();
        assert!(String::from_utf8(m).unwrap().contains("master_seed 0"));
    }

    fn prediction(eps: f64, fer: f64) -> RatePrediction {
        RatePrediction {
            model: Model::Refined,
            epsilon: eps,
            n: 40,
            l: 8,
            w: None,
            fer,
            ber: f64::NAN,
            bler: f64::NAN,
            mu0: 1.0,
            alpha: 0.0,
            beta: 1.0,
            gamma: 1.0,
            s: 1.0,
            notes: Vec::new(),
        }
    }

    #[test]
    fn equal_prediction_has_unit_ratio() {
        let row = SimRow {
            epsilon: 0.4,
            frames: 10,
            fer: (0.1, 0.02, 0.4),
            ber: (0.0, 0.0, 0.0),
            bler: (0.0, 0.0, 0.0),
            expurgated: 0,
        };
        let r = compare(&[row], &[prediction(0.4, 0.1), prediction(0.41, 0.3)]);
        assert_eq!(r.lines.len(), 1);
        assert_eq!(r.lines[0].ratio, 1.0);
        assert!(!r.lines[0].flagged);
        let r = compare(&[row], &[prediction(0.4, 0.25)]);
        assert!(r.lines[0].flagged);
        assert!(compare(&[], &[]).lines.is_empty());
    }
}
