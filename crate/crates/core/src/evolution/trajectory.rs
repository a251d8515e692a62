//! Monte-Carlo mean trajectories of the peeling process.
//!
//! Each trial peels a fresh graph and erasure pattern. Counts are summed as
//! integers, so the result does not depend on how trials are scheduled.

use rayon::prelude::*;

use crate::ensemble::{sample_erasures, EnsembleParams, TannerGraph};
use crate::error::{Error, Result};
use crate::peeling::{peel_with, Outcome, TraceOptions};
use crate::seed::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub n_trials: usize,
    /// Iterations between grid points; 0 picks `N / 100`.
    pub stride: usize,
    /// Minimum fraction of trials that must survive to `tau = eps L / 2`.
    pub min_survival: f64,
    /// Accumulate per-position residual VN counts (needed for the speed).
    pub record_positions: bool,
    /// Keep every trial's degree-one series (needed for `nu` and `theta`).
    pub keep_series: bool,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            n_trials: 200,
            stride: 0,
            min_survival: 0.9,
            record_positions: true,
            keep_series: false,
        }
    }
}

impl TrajectoryConfig {
    pub fn stride_for(&self, n: usize) -> usize {
        if self.stride > 0 {
            self.stride
        } else {
            (n / 100).max(1)
        }
    }
}

/// Degree-one counts of one trial on the common grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSeries {
    /// Count at grid points strictly before the halt (failures) or up to
    /// and including the halt (successes).
    pub degree_one: Vec<u32>,
    pub halt: usize,
    pub success: bool,
}

impl TrialSeries {
    /// True if the trial is alive (or finished successfully) at grid index `g`.
    pub fn covers(&self, g: usize) -> bool {
        self.success || g < self.degree_one.len()
    }

    /// Count at grid index `g`; zero after a successful finish.
    pub fn at(&self, g: usize) -> u32 {
        self.degree_one.get(g).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub params: EnsembleParams,
    pub epsilon: f64,
    pub stride: usize,
    pub tau_grid: Vec<f64>,
    /// Survivor-conditioned mean of `r1`.
    pub r1_bar: Vec<f64>,
    /// Standard error of `r1_bar` across the contributing trials.
    pub r1_se: Vec<f64>,
    /// Survivor-conditioned mean residual VN count per position over `N`,
    /// flattened `[grid][vn_position]`; empty unless positions were recorded.
    pub v_bar: Vec<f64>,
    /// Trials contributing at each grid point.
    pub survivors: Vec<u32>,
    pub n_trials: usize,
    pub n_used: usize,
    pub failures: usize,
    pub series: Vec<TrialSeries>,
}

#[derive(Default)]
struct Sums {
    degree_one: Vec<u64>,
    degree_one_sq: Vec<u64>,
    residual: Vec<u64>,
    survivors: Vec<u32>,
    failures: usize,
}

impl Sums {
    fn grow(&mut self, len: usize, positions: usize) {
        if self.survivors.len() < len {
            self.degree_one.resize(len, 0);
            self.degree_one_sq.resize(len, 0);
            self.survivors.resize(len, 0);
            if positions > 0 {
                self.residual.resize(len * positions, 0);
            }
        }
    }
}

struct Trial {
    degree_one: Vec<u32>,
    residual: Vec<u32>,
    halt: usize,
    success: bool,
}

fn run_trial(params: EnsembleParams, epsilon: f64, stride: usize, positions: bool, seed: u64) -> Result<Trial> {
    let graph = TannerGraph::sample(params, derive_seed(seed, &[0]))?;
    let erasures = sample_erasures(graph.n_vns(), epsilon, derive_seed(seed, &[1]))?;
    let mut rng = rng_from(derive_seed(seed, &[2]));
    let opts = TraceOptions { record_positions: positions, stride };
    let (trace, _) = peel_with(&graph, &erasures, &mut rng, opts)?;
    let halt = trace.iterations_at_halt;
    // successes keep the halting record (r1 = 0 there); failures stop before it
    let success = trace.outcome == Outcome::Success;
    let keep = if success { halt / stride + 1 } else { (halt + stride - 1) / stride };
    let degree_one = trace.degree_one[..keep.min(trace.degree_one.len())].to_vec();
    let residual = match &trace.positions {
        Some(p) => p.residual_vns[..degree_one.len() * p.vn_positions].to_vec(),
        None => Vec::new(),
    };
    Ok(Trial { degree_one, residual, halt, success })
}

/// Survivor-conditioned mean of `r1` (and optionally the per-position VN
/// counts) over `cfg.n_trials` independent trials.
///
/// Successful trials contribute zeros after they finish; failed trials drop
/// out at their halting iteration.
pub fn estimate_mean_trajectory(
    params: EnsembleParams,
    epsilon: f64,
    cfg: &TrajectoryConfig,
    seed: u64,
) -> Result<MeanTrajectory> {
    params.validate()?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    if cfg.n_trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    let stride = cfg.stride_for(params.n);
    let positions = if cfg.record_positions { params.l } else { 0 };

    let mut sums = Sums::default();
    let mut series = Vec::new();
    let mut successes = Vec::new();
    // bounded batches keep per-position records of in-flight trials small
    const BATCH: usize = 32;
    for start in (0..cfg.n_trials).step_by(BATCH) {
        let end = (start + BATCH).min(cfg.n_trials);
        let trials: Vec<Result<Trial>> = (start..end)
            .into_par_iter()
            .map(|t| run_trial(params, epsilon, stride, cfg.record_positions, derive_seed(seed, &[t as u64])))
            .collect();
        for trial in trials {
            let trial = trial?;
            let len = trial.degree_one.len();
            sums.grow(len, positions);
            for (g, &d) in trial.degree_one.iter().enumerate() {
                sums.degree_one[g] += d as u64;
                sums.degree_one_sq[g] += d as u64 * d as u64;
                sums.survivors[g] += 1;
            }
            for (i, &r) in trial.residual.iter().enumerate() {
                sums.residual[i] += r as u64;
            }
            if trial.success {
                successes.push(len);
            } else {
                sums.failures += 1;
            }
            if cfg.keep_series {
                series.push(TrialSeries { degree_one: trial.degree_one, halt: trial.halt, success: trial.success });
            }
        }
    }
    // one extra point so the mean ends on zero whenever any trial succeeded
    let len = sums.survivors.len() + 1;
    sums.grow(len, positions);
    // finished successes count as survivors with zero residual
    let mut finished = vec![0u32; len + 1];
    for s in successes {
        finished[s] += 1;
    }
    let mut carried = 0;
    for g in 0..len {
        carried += finished[g];
        sums.survivors[g] += carried;
    }

    let n = params.n as f64;
    let tau_grid: Vec<f64> = (0..len).map(|g| (g * stride) as f64 / n).collect();
    let r1_bar = sums
        .degree_one
        .iter()
        .zip(&sums.survivors)
        .map(|(&d, &s)| if s == 0 { 0.0 } else { d as f64 / (s as f64 * n) })
        .collect();
    let r1_se = (0..len)
        .map(|g| {
            let s = sums.survivors[g] as f64;
            if s < 2.0 {
                return 0.0;
            }
            let mean = sums.degree_one[g] as f64 / s;
            let var = (sums.degree_one_sq[g] as f64 / s - mean * mean).max(0.0) * s / (s - 1.0);
            (var / s).sqrt() / n
        })
        .collect();
    let v_bar = sums
        .residual
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let s = sums.survivors[i / positions.max(1)];
            if s == 0 {
                0.0
            } else {
                r as f64 / (s as f64 * n)
            }
        })
        .collect();
    Ok(MeanTrajectory {
        params,
        epsilon,
        stride,
        tau_grid,
        r1_bar,
        r1_se,
        v_bar,
        survivors: sums.survivors,
        n_trials: cfg.n_trials,
        n_used: params.n,
        failures: sums.failures,
        series,
    })
}

impl MeanTrajectory {
    /// Grid index nearest to `tau` (clamped to the grid).
    pub fn index_of(&self, tau: f64) -> usize {
        let dt = self.stride as f64 / self.n_used as f64;
        ((tau / dt).round().max(0.0) as usize).min(self.tau_grid.len() - 1)
    }

    /// Fraction of trials still alive (or finished successfully) at `tau`.
    pub fn survival_at(&self, tau: f64) -> f64 {
        self.survivors[self.index_of(tau)] as f64 / self.n_trials as f64
    }

    /// Errors unless enough trials reach the middle of the decoding.
    pub fn check_usable(&self, min_survival: f64) -> Result<()> {
        let tau = self.epsilon * self.params.l as f64 / 2.0;
        let alive = self.survival_at(tau);
        if alive < min_survival {
            return Err(Error::Unusable(format!(
                "only {:.1}% of trials survive to tau = {tau:.3} at epsilon = {} (need {:.1}%)",
                100.0 * alive,
                self.epsilon,
                100.0 * min_survival
            )));
        }
        Ok(())
    }

    /// Mean residual VN count over `N` at `position`, linearly interpolated in `tau`.
    pub fn v_bar_at(&self, position: usize, tau: f64) -> Option<f64> {
        let l = self.params.l;
        if self.v_bar.is_empty() || position >= l {
            return None;
        }
        let dt = self.stride as f64 / self.n_used as f64;
        let x = (tau / dt).max(0.0);
        let g = (x.floor() as usize).min(self.tau_grid.len() - 1);
        let h = (g + 1).min(self.tau_grid.len() - 1);
        let w = (x - g as f64).clamp(0.0, 1.0);
        Some((1.0 - w) * self.v_bar[g * l + position] + w * self.v_bar[h * l + position])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Termination;

    fn params() -> EnsembleParams {
        EnsembleParams::new(3, 6, 8, 200, Termination::Terminated).unwrap()
    }

    #[test]
    fn trajectory_ends_at_zero_and_is_deterministic() {
        let cfg = TrajectoryConfig { n_trials: 20, stride: 10, ..Default::default() };
        let a = estimate_mean_trajectory(params(), 0.4, &cfg, 5).unwrap();
        let b = estimate_mean_trajectory(params(), 0.4, &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(*a.r1_bar.last().unwrap(), 0.0);
        assert!(a.r1_bar.iter().all(|&r| r >= 0.0));
        assert!(a.v_bar.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // at tau = 0 every position holds about eps N erased VNs
        let v0: f64 = (0..8).map(|u| a.v_bar_at(u, 0.0).unwrap()).sum::<f64>() / 8.0;
        assert!((v0 - 0.4).abs() < 0.02, "{v0}");
        a.check_usable(0.9).unwrap();
    }

    #[test]
    fn zero_erasures_give_flat_zero() {
        let cfg = TrajectoryConfig { n_trials: 3, stride: 1, ..Default::default() };
        let t = estimate_mean_trajectory(params(), 0.0, &cfg, 1).unwrap();
        assert!(t.r1_bar.iter().all(|&r| r == 0.0));
        assert_eq!(t.failures, 0);
    }

    #[test]
    fn hopeless_channel_is_unusable() {
        let cfg = TrajectoryConfig { n_trials: 5, stride: 10, ..Default::default() };
        let t = estimate_mean_trajectory(params(), 0.8, &cfg, 1).unwrap();
        assert_eq!(t.failures, 5);
        assert!(matches!(t.check_usable(0.9), Err(Error::Unusable(_))));
    }

    #[test]
    fn series_cover_survivors() {
        let cfg = TrajectoryConfig { n_trials: 10, stride: 7, keep_series: true, ..Default::default() };
        let t = estimate_mean_trajectory(params(), 0.45, &cfg, 9).unwrap();
        for g in 0..t.tau_grid.len() {
            let alive = t.series.iter().filter(|s| s.covers(g)).count() as u32;
            assert_eq!(alive, t.survivors[g]);
            let sum: u64 = t.series.iter().map(|s| s.at(g) as u64).sum();
            let expect = t.r1_bar[g] * t.survivors[g] as f64 * 200.0;
            assert!((sum as f64 - expect).abs() < 1e-6);
        }
    }
}
