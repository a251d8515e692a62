//! Variance and decay rate of the steady-state fluctuations of `r1`.
//!
//! Inside the steady state `r1` is modelled as stationary with
//! `Cov(r1(t), r1(t + d)) = (nu / N) exp(-theta d)`. Both constants are read
//! off the per-trial series of a truncated chain.

use super::extract::{PlateauConfig, SteadyState};
use super::trajectory::{estimate_mean_trajectory, MeanTrajectory, TrajectoryConfig};
use crate::ensemble::{EnsembleParams, Termination};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuThetaConfig {
    pub trajectory: TrajectoryConfig,
    pub plateau: PlateauConfig,
    /// Lags are fitted until the autocovariance falls below this fraction
    /// of its lag-0 value. The measured log-autocovariance steepens with the
    /// lag, so the default keeps to the first e-fold.
    pub decay_fraction: f64,
}

impl Default for NuThetaConfig {
    fn default() -> Self {
        NuThetaConfig {
            trajectory: TrajectoryConfig {
                n_trials: 200,
                record_positions: false,
                keep_series: true,
                ..TrajectoryConfig::default()
            },
            plateau: PlateauConfig::default(),
            decay_fraction: std::f64::consts::E.recip(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuTheta {
    pub nu: f64,
    pub theta: f64,
    pub steady: SteadyState,
    /// `tau` range the statistics were pooled over.
    pub window: (f64, f64),
    /// `(lag, autocovariance)` pairs used by the fit, autocovariance scaled by `N`.
    pub autocov: Vec<(f64, f64)>,
    pub trials_used: usize,
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `nu` and `theta` from a trajectory that kept its per-trial series.
///
/// Statistics are pooled over the middle half of the steady state and over
/// every trial alive across that whole window.
pub fn nu_theta_from_series(traj: &MeanTrajectory, steady: SteadyState, decay_fraction: f64) -> Result<NuTheta> {
    if traj.series.is_empty() {
        return Err(Error::InvalidParams("trajectory kept no per-trial series".into()));
    }
    let quarter = 0.25 * (steady.beta - steady.alpha);
    let (lo, hi) = (steady.alpha + quarter, steady.beta - quarter);
    let (ga, gb) = (traj.index_of(lo), traj.index_of(hi));
    if gb <= ga + 2 {
        return Err(Error::Unusable("steady state too short for covariance estimation".into()));
    }
    let used: Vec<_> = traj.series.iter().filter(|s| s.covers(gb)).collect();
    if used.len() < 2 {
        return Err(Error::Unusable("fewer than two trials span the steady state".into()));
    }
    let n = traj.n_used as f64;
    let width = gb - ga + 1;
    let trials = used.len() as f64;
    let mean: Vec<f64> = (ga..=gb)
        .map(|g| used.iter().map(|s| s.at(g) as f64).sum::<f64>() / trials)
        .collect();
    // deviations of r1 from the ensemble mean
    let dev: Vec<Vec<f64>> = used
        .iter()
        .map(|s| (ga..=gb).map(|g| (s.at(g) as f64 - mean[g - ga]) / n).collect())
        .collect();
    // the ensemble mean absorbs one degree of freedom per grid point
    let bessel = trials / (trials - 1.0);
    let autocov = |h: usize| -> f64 {
        let mut sum = 0.0;
        for d in &dev {
            for g in 0..width - h {
                sum += d[g] * d[g + h];
            }
        }
        bessel * sum / (trials * (width - h) as f64)
    };

    let c0 = autocov(0);
    if !(c0 > 0.0) {
        return Err(Error::Unusable("zero variance in the steady state".into()));
    }
    let dt = traj.stride as f64 / n;
    let mut lags = vec![(0.0, c0 * n)];
    for h in 1..width / 2 {
        let c = autocov(h);
        if c < decay_fraction * c0 {
            break;
        }
        lags.push((h as f64 * dt, c * n));
    }
    if lags.len() < 3 {
        return Err(Error::Unusable(format!(
            "autocovariance decays within {} lags; use a finer stride",
            lags.len()
        )));
    }
    if lags.iter().any(|&(_, c)| c <= 0.0) {
        return Err(Error::Unusable("non-positive autocovariance at small lags".into()));
    }
    let x: Vec<f64> = lags.iter().map(|l| l.0).collect();
    let y: Vec<f64> = lags.iter().map(|l| l.1.ln()).collect();
    let (slope, _) = linear_fit(&x, &y);
    Ok(NuTheta {
        nu: c0 * n,
        theta: -slope,
        steady,
        window: (lo, hi),
        autocov: lags,
        trials_used: used.len(),
    })
}

/// Runs truncated-chain trials at `epsilon` and estimates `nu` and `theta`.
pub fn estimate_nu_theta(
    params: EnsembleParams,
    epsilon: f64,
    eps_star: f64,
    cfg: &NuThetaConfig,
    seed: u64,
) -> Result<NuTheta> {
    if params.kind != Termination::Truncated {
        return Err(Error::InvalidParams("nu and theta are estimated on the truncated ensemble".into()));
    }
    estimate_fluctuations(params, epsilon, eps_star, cfg, seed)
}

/// Same statistics on any chain. On a terminated chain they describe the
/// sum of both waves, which is what a single-process law needs.
pub fn estimate_fluctuations(
    params: EnsembleParams,
    epsilon: f64,
    eps_star: f64,
    cfg: &NuThetaConfig,
    seed: u64,
) -> Result<NuTheta> {
    let tcfg = TrajectoryConfig { keep_series: true, ..cfg.trajectory };
    let traj = estimate_mean_trajectory(params, epsilon, &tcfg, seed)?;
    traj.check_usable(tcfg.min_survival)?;
    let steady = traj.steady_state(eps_star, &cfg.plateau)?;
    nu_theta_from_series(&traj, steady, cfg.decay_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::trajectory::TrialSeries;
    use crate::seed::rng_from;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn fit_recovers_a_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (s, c) = linear_fit(&x, &y);
        assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
    }

    /// Discretely sampled Ornstein-Uhlenbeck paths with known constants.
    #[test]
    fn recovers_ou_constants() {
        let (n, nu, theta, dt): (f64, f64, f64, f64) = (1000.0, 0.4, 1.5, 0.02);
        let len = 2000;
        let rho = (-theta * dt).exp();
        let sd = (nu / n).sqrt();
        let mut rng = rng_from(3);
        let mut normal = || -> f64 { rng.sample(StandardNormal) };
        let series: Vec<TrialSeries> = (0..300)
            .map(|_| {
                let mut x: f64 = sd * normal();
                let degree_one = (0..len)
                    .map(|_| {
                        x = rho * x + sd * (1.0 - rho * rho).sqrt() * normal();
                        // large offset keeps counts positive
                        ((0.05 + x) * n).round() as u32
                    })
                    .collect();
                TrialSeries { degree_one, halt: len * 20, success: false }
            })
            .collect();
        let traj = MeanTrajectory {
            params: EnsembleParams::new(3, 6, 50, 1000, Termination::Truncated).unwrap(),
            epsilon: 0.45,
            stride: 20,
            tau_grid: (0..len).map(|g| g as f64 * dt).collect(),
            r1_bar: vec![0.05; len],
            r1_se: vec![0.0; len],
            v_bar: Vec::new(),
            survivors: vec![300; len],
            n_trials: 300,
            n_used: 1000,
            failures: 300,
            series,
        };
        let steady = SteadyState { alpha: 0.0, beta: 39.0, plateau: 0.05, gamma: 1.0, band: 0.0 };
        let est = nu_theta_from_series(&traj, steady, 0.1).unwrap();
        // rounding to integer counts adds 1/(12 N) to the variance
        let nu_expect = nu + 1.0 / (12.0 * n);
        assert!((est.nu - nu_expect).abs() / nu_expect < 0.05, "{}", est.nu);
        assert!((est.theta - theta).abs() / theta < 0.1, "{}", est.theta);
    }

    #[test]
    fn requires_truncated() {
        let p = EnsembleParams::new(3, 6, 10, 60, Termination::Terminated).unwrap();
        assert!(estimate_nu_theta(p, 0.4, 0.488, &NuThetaConfig::default(), 0).is_err());
    }
}
