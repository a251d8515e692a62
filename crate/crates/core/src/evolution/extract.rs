//! Steady-state detection on a mean trajectory.

use super::trajectory::MeanTrajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauConfig {
    /// Relative half-width of the band around the plateau value.
    pub tol: f64,
    /// Width (in `tau`) of the centered moving average applied before the
    /// band test; 0 disables smoothing.
    pub smooth_tau: f64,
    /// In-band runs separated by excursions no longer than this are merged;
    /// 0 keeps runs strictly contiguous.
    pub max_gap_tau: f64,
    /// Shortest acceptable steady state.
    pub min_length_tau: f64,
    /// The band is widened to `noise_z` standard errors of the mean when
    /// that exceeds `tol * plateau`; 0 disables the widening.
    pub noise_z: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig { tol: 0.02, smooth_tau: 0.5, max_gap_tau: 1.0, min_length_tau: 1.0, noise_z: 3.0 }
    }
}

impl PlateauConfig {
    /// Exactly the band rule, no smoothing or gap merging.
    pub fn strict(tol: f64) -> Self {
        PlateauConfig { tol, smooth_tau: 0.0, max_gap_tau: 0.0, min_length_tau: 0.0, noise_z: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub alpha: f64,
    pub beta: f64,
    /// Plateau value of `r1_bar`.
    pub plateau: f64,
    /// `plateau / (eps* - eps)`.
    pub gamma: f64,
    /// Half-width of the band actually used.
    pub band: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn moving_average(x: &[f64], half: usize) -> Vec<f64> {
    if half == 0 {
        return x.to_vec();
    }
    let mut prefix = vec![0.0; x.len() + 1];
    for (i, &v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Locates the steady state of `r1` sampled on a uniform grid `tau`.
///
/// The plateau value is the median of `r1` over the central third of
/// `[0, eps L]`; the steady state is the longest run of grid points whose
/// (smoothed) value lies within `tol * plateau` of it. `beta` is capped at
/// `eps L`.
///
/// `se`, when given, is the standard error of `r1` per grid point; the band
/// is then at least `noise_z` times its median over the central third.
pub fn extract_alpha_beta_gamma(
    tau: &[f64],
    r1: &[f64],
    se: Option<&[f64]>,
    epsilon: f64,
    l: usize,
    eps_star: f64,
    cfg: &PlateauConfig,
) -> Result<SteadyState> {
    if tau.len() != r1.len() || tau.len() < 2 {
        return Err(Error::InvalidParams("trajectory needs matching tau and r1 of length >= 2".into()));
    }
    if !(epsilon < eps_star) {
        return Err(Error::Domain(format!("epsilon {epsilon} is not below eps* = {eps_star}")));
    }
    let dt = tau[1] - tau[0];
    let end = epsilon * l as f64;
    let in_center = |t: f64| t >= end / 3.0 && t <= 2.0 * end / 3.0;
    let central: Vec<f64> = tau.iter().zip(r1).filter(|(&t, _)| in_center(t)).map(|(_, &r)| r).collect();
    if central.is_empty() {
        return Err(Error::Unusable("trajectory does not cover the middle of the decoding".into()));
    }
    let plateau = median(central);
    if !(plateau > 0.0) {
        return Err(Error::Unusable(format!("no degree-one CNs in the middle of the decoding at epsilon {epsilon}")));
    }

    let half = (0.5 * cfg.smooth_tau / dt).round() as usize;
    let smooth = moving_average(r1, half);
    let noise = match se {
        Some(se) if cfg.noise_z > 0.0 => {
            median(tau.iter().zip(se).filter(|(&t, _)| in_center(t)).map(|(_, &e)| e).collect())
        }
        _ => 0.0,
    };
    let band = (cfg.tol * plateau).max(cfg.noise_z * noise);
    let inside: Vec<bool> = smooth.iter().map(|&r| (r - plateau).abs() <= band).collect();

    let max_gap = (cfg.max_gap_tau / dt).round() as usize;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut g = 0;
    while g < inside.len() {
        if !inside[g] {
            g += 1;
            continue;
        }
        let start = g;
        while g < inside.len() && inside[g] {
            g += 1;
        }
        let stop = g - 1;
        match runs.last_mut() {
            Some(last) if start - last.1 - 1 <= max_gap => last.1 = stop,
            _ => runs.push((start, stop)),
        }
    }
    let best = runs
        .iter()
        .copied()
        .reduce(|a, b| if b.1 - b.0 > a.1 - a.0 { b } else { a })
        .ok_or_else(|| Error::Unusable(format!("no steady state within {:.1}% of the plateau", 100.0 * cfg.tol)))?;
    let alpha = tau[best.0];
    let beta = tau[best.1].min(end);
    if beta - alpha < cfg.min_length_tau || beta <= alpha {
        return Err(Error::Unusable(format!(
            "steady state [{alpha:.3}, {beta:.3}] shorter than {}",
            cfg.min_length_tau
        )));
    }
    Ok(SteadyState { alpha, beta, plateau, gamma: plateau / (eps_star - epsilon), band })
}

/// Middle VN position probed for the wave speed.
pub fn speed_probe_position(l: usize) -> usize {
    (l - 1) / 2
}

/// `s = 1 / v_bar(middle position, (alpha + beta) / 2)`.
pub fn estimate_speed(traj: &MeanTrajectory, alpha: f64, beta: f64) -> Result<f64> {
    let u = speed_probe_position(traj.params.l);
    let v = traj
        .v_bar_at(u, 0.5 * (alpha + beta))
        .ok_or_else(|| Error::Unusable("trajectory has no per-position VN counts".into()))?;
    if v < 1e-9 {
        return Err(Error::Unusable(format!(
            "position {u} is already decoded at tau = {}",
            0.5 * (alpha + beta)
        )));
    }
    Ok(1.0 / v)
}

impl MeanTrajectory {
    pub fn steady_state(&self, eps_star: f64, cfg: &PlateauConfig) -> Result<SteadyState> {
        let se = Some(self.r1_se.as_slice());
        extract_alpha_beta_gamma(&self.tau_grid, &self.r1_bar, se, self.epsilon, self.params.l, eps_star, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: f64) -> (Vec<f64>, Vec<f64>) {
        let tau: Vec<f64> = (0..=2500).map(|g| g as f64 * 0.01).collect();
        let r1 = tau
            .iter()
            .map(|&t| {
                if t < 2.0 {
                    p + (2.0 - t) * 0.3
                } else if t <= 20.0 {
                    p
                } else if t < 24.0 {
                    p + (t - 20.0) * 0.2
                } else {
                    0.0
                }
            })
            .collect();
        (tau, r1)
    }

    #[test]
    fn constructed_plateau() {
        let (tau, r1) = synthetic(0.05);
        let s = extract_alpha_beta_gamma(&tau, &r1, None, 0.49, 50, 0.5, &PlateauConfig::strict(0.02)).unwrap();
        assert!((s.alpha - 2.0).abs() <= 0.01, "{}", s.alpha);
        assert!((s.beta - 20.0).abs() <= 0.01, "{}", s.beta);
        assert!((s.gamma - 5.0).abs() < 1e-9);
    }

    #[test]
    fn gaps_merge_only_when_allowed() {
        let (tau, mut r1) = synthetic(0.05);
        for g in 1000..1020 {
            r1[g] = 0.06;
        }
        let strict = extract_alpha_beta_gamma(&tau, &r1, None, 0.49, 50, 0.5, &PlateauConfig::strict(0.02)).unwrap();
        assert!((strict.beta - 20.0).abs() <= 0.01 && (strict.alpha - 10.2).abs() <= 0.01);
        let cfg = PlateauConfig { smooth_tau: 0.0, ..PlateauConfig::default() };
        let merged = extract_alpha_beta_gamma(&tau, &r1, None, 0.49, 50, 0.5, &cfg).unwrap();
        assert!((merged.alpha - 2.0).abs() <= 0.01);
    }

    #[test]
    fn noise_widens_the_band() {
        let (tau, mut r1) = synthetic(0.05);
        for g in 1000..1020 {
            r1[g] = 0.0515;
        }
        let se = vec![0.0006; tau.len()];
        let cfg = PlateauConfig { noise_z: 3.0, ..PlateauConfig::strict(0.02) };
        let s = extract_alpha_beta_gamma(&tau, &r1, Some(&se), 0.49, 50, 0.5, &cfg).unwrap();
        assert!((s.band - 0.0018).abs() < 1e-12);
        assert!((s.alpha - 2.0).abs() <= 0.01);
        let s = extract_alpha_beta_gamma(&tau, &r1, Some(&se), 0.49, 50, 0.5, &PlateauConfig::strict(0.02)).unwrap();
        assert!((s.alpha - 10.2).abs() <= 0.01);
    }

    #[test]
    fn beta_is_capped() {
        let tau: Vec<f64> = (0..=300).map(|g| g as f64 * 0.1).collect();
        let r1 = vec![0.05; tau.len()];
        let s = extract_alpha_beta_gamma(&tau, &r1, None, 0.4, 50, 0.5, &PlateauConfig::strict(0.02)).unwrap();
        assert_eq!(s.beta, 20.0);
    }

    #[test]
    fn flat_zero_is_unusable() {
        let tau: Vec<f64> = (0..100).map(|g| g as f64 * 0.3).collect();
        let r1 = vec![0.0; 100];
        assert!(matches!(
            extract_alpha_beta_gamma(&tau, &r1, None, 0.4, 50, 0.5, &PlateauConfig::default()),
            Err(Error::Unusable(_))
        ));
    }

    #[test]
    fn above_threshold_rejected() {
        let (tau, r1) = synthetic(0.05);
        assert!(extract_alpha_beta_gamma(&tau, &r1, None, 0.5, 50, 0.5, &PlateauConfig::default()).is_err());
    }
}
