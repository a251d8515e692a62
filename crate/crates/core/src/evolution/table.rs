//! Scaling-parameter tables: estimation driver, file format, interpolation.
//!
//! File layout (whitespace separated, one header line, one row per grid
//! epsilon, then a key=value footer):
//!
//! ```text
//! scldpc-scaling v1 dv=5 dc=10 L=50 N=10000 trials=200 columns=epsilon,alpha_term,beta_term,gamma_term,alpha_trunc,gamma_trunc,speed
//! 0.47 3.1 20.1 3.9 1.8 1.95 2.08
//! eps_star=0.4994
//! nu=0.424
//! theta=1.64
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use super::de::de_threshold;
use super::extract::{estimate_speed, PlateauConfig, SteadyState};
use super::nu_theta::{estimate_nu_theta, NuTheta, NuThetaConfig};
use super::trajectory::{estimate_mean_trajectory, TrajectoryConfig};
use crate::ensemble::{EnsembleParams, Termination};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::seed::derive_seed;

pub const COLUMNS: [&str; 7] =
    ["epsilon", "alpha_term", "beta_term", "gamma_term", "alpha_trunc", "gamma_trunc", "speed"];

/// Parameters estimated at one channel erasure probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub alpha_term: f64,
    pub beta_term: f64,
    pub gamma_term: f64,
    pub alpha_trunc: f64,
    pub gamma_trunc: f64,
    pub speed: f64,
}

impl ScalingRow {
    fn values(&self) -> [f64; 7] {
        [
            self.epsilon,
            self.alpha_term,
            self.beta_term,
            self.gamma_term,
            self.alpha_trunc,
            self.gamma_trunc,
            self.speed,
        ]
    }

    fn from_values(v: [f64; 7]) -> Self {
        ScalingRow {
            epsilon: v[0],
            alpha_term: v[1],
            beta_term: v[2],
            gamma_term: v[3],
            alpha_trunc: v[4],
            gamma_trunc: v[5],
            speed: v[6],
        }
    }

    fn lerp(&self, other: &ScalingRow, w: f64) -> ScalingRow {
        let (a, b) = (self.values(), other.values());
        let mut v = [0.0; 7];
        for i in 0..7 {
            v[i] = a[i] + w * (b[i] - a[i]);
        }
        ScalingRow::from_values(v)
    }
}

/// Scaling parameters of one `(dv, dc)` family estimated at chain length `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub dv: usize,
    pub dc: usize,
    pub l: usize,
    /// Component code length used for the estimation runs.
    pub n: usize,
    pub trials: usize,
    pub eps_star: f64,
    pub nu: f64,
    pub theta: f64,
    pub rows: Vec<ScalingRow>,
}

impl ScalingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_star > 0.0 && self.eps_star < 1.0) {
            return Err(Error::InvalidParams(format!("eps* = {} outside (0, 1)", self.eps_star)));
        }
        if !(self.nu > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidParams("nu and theta must be positive".into()));
        }
        if self.rows.is_empty() {
            return Err(Error::InvalidParams("table has no rows".into()));
        }
        for w in self.rows.windows(2) {
            if !(w[1].epsilon > w[0].epsilon) {
                return Err(Error::InvalidParams("table epsilons must be strictly increasing".into()));
            }
        }
        for r in &self.rows {
            if !(r.alpha_term < r.beta_term) {
                return Err(Error::InvalidParams(format!("alpha >= beta at epsilon {}", r.epsilon)));
            }
            if !(r.gamma_term > 0.0 && r.gamma_trunc > 0.0 && r.speed > 0.0) {
                return Err(Error::InvalidParams(format!("non-positive gamma or speed at epsilon {}", r.epsilon)));
            }
        }
        Ok(())
    }

    /// Row at `epsilon`, linearly interpolated between grid rows.
    pub fn at(&self, epsilon: f64) -> Result<ScalingRow> {
        let first = self.rows.first().ok_or_else(|| Error::InvalidParams("empty table".into()))?;
        let last = self.rows.last().unwrap();
        if !(epsilon >= first.epsilon && epsilon <= last.epsilon) {
            return Err(Error::Extrapolation { eps: epsilon, lo: first.epsilon, hi: last.epsilon });
        }
        let i = self.rows.partition_point(|r| r.epsilon <= epsilon);
        if i == 0 {
            return Ok(*first);
        }
        let a = &self.rows[i - 1];
        if a.epsilon == epsilon || i == self.rows.len() {
            return Ok(*a);
        }
        let b = &self.rows[i];
        Ok(a.lerp(b, (epsilon - a.epsilon) / (b.epsilon - a.epsilon)))
    }

    /// `gamma_term / gamma_trunc` per grid row.
    pub fn gamma_ratios(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.epsilon, r.gamma_term / r.gamma_trunc)).collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "scldpc-scaling v1 dv={} dc={} L={} N={} trials={} columns={}",
            self.dv,
            self.dc,
            self.l,
            self.n,
            self.trials,
            COLUMNS.join(",")
        )?;
        for r in &self.rows {
            let cells: Vec<String> = r.values().iter().map(|&v| fmt_f64(v)).collect();
            writeln!(w, "{}", cells.join(" "))?;
        }
        writeln!(w, "eps_star={}", fmt_f64(self.eps_star))?;
        writeln!(w, "nu={}", fmt_f64(self.nu))?;
        writeln!(w, "theta={}", fmt_f64(self.theta))?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty file".into()))?;
        let header = header?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("scldpc-scaling") || tokens.next() != Some("v1") {
            return Err(parse_err(0, "not a v1 scaling table".into()));
        }
        let mut meta = std::collections::HashMap::new();
        for t in tokens {
            let (k, v) = t.split_once('=').ok_or_else(|| parse_err(0, format!("bad header token `{t}`")))?;
            meta.insert(k.to_string(), v.to_string());
        }
        if meta.get("columns").map(String::as_str) != Some(COLUMNS.join(",").as_str()) {
            return Err(parse_err(0, "unexpected column list".into()));
        }
        let meta_usize = |k: &str| -> Result<usize> {
            meta.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| parse_err(0, format!("missing or bad `{k}`")))
        };
        let mut out = ScalingParams {
            dv: meta_usize("dv")?,
            dc: meta_usize("dc")?,
            l: meta_usize("L")?,
            n: meta_usize("N")?,
            trials: meta_usize("trials")?,
            eps_star: f64::NAN,
            nu: f64::NAN,
            theta: f64::NAN,
            rows: Vec::new(),
        };
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                let v: f64 = v.trim().parse().map_err(|_| parse_err(i, format!("bad number `{v}`")))?;
                match k.trim() {
                    "eps_star" => out.eps_star = v,
                    "nu" => out.nu = v,
                    "theta" => out.theta = v,
                    other => return Err(parse_err(i, format!("unknown footer key `{other}`"))),
                }
                continue;
            }
            let cells: Vec<f64> = line
                .split_whitespace()
                .map(|c| c.parse().map_err(|_| parse_err(i, format!("bad number `{c}`"))))
                .collect::<Result<_>>()?;
            let cells: [f64; 7] = cells
                .try_into()
                .map_err(|_| parse_err(i, format!("expected {} columns", COLUMNS.len())))?;
            out.rows.push(ScalingRow::from_values(cells));
        }
        out.validate()?;
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(f))
    }
}

/// Estimation settings shared by every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub trajectory: TrajectoryConfig,
    pub plateau: PlateauConfig,
    pub nu_theta: NuThetaConfig,
    /// Erasure probability of the `nu`/`theta` run; `None` uses `eps* - 0.015`.
    pub nu_theta_epsilon: Option<f64>,
    pub de_tol: f64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            trajectory: TrajectoryConfig::default(),
            plateau: PlateauConfig::default(),
            nu_theta: NuThetaConfig::default(),
            nu_theta_epsilon: None,
            de_tol: 1e-5,
        }
    }
}

/// Everything measured at one grid epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub epsilon: f64,
    pub terminated: SteadyState,
    pub truncated: SteadyState,
    pub speed: f64,
    pub failures_term: usize,
    pub failures_trunc: usize,
    /// Steady states re-extracted with the band tolerance halved and
    /// doubled; `None` where extraction failed.
    pub sensitivity: Vec<Sensitivity>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub tol: f64,
    pub terminated: Option<SteadyState>,
    pub truncated: Option<SteadyState>,
}

/// Band tolerances relative to the configured one.
pub const SENSITIVITY_FACTORS: [f64; 2] = [0.5, 2.0];

impl PointEstimate {
    pub fn row(&self) -> ScalingRow {
        ScalingRow {
            epsilon: self.epsilon,
            alpha_term: self.terminated.alpha,
            beta_term: self.terminated.beta,
            gamma_term: self.terminated.gamma,
            alpha_trunc: self.truncated.alpha,
            gamma_trunc: self.truncated.gamma,
            speed: self.speed,
        }
    }
}

/// Terminated and truncated trajectories at one `epsilon`.
pub fn estimate_point(
    base: EnsembleParams,
    epsilon: f64,
    eps_star: f64,
    cfg: &EstimateConfig,
    seed: u64,
) -> Result<PointEstimate> {
    let term = base.with_kind(Termination::Terminated);
    let tcfg = TrajectoryConfig { record_positions: true, keep_series: false, ..cfg.trajectory };
    let traj = estimate_mean_trajectory(term, epsilon, &tcfg, derive_seed(seed, &[0]))?;
    traj.check_usable(tcfg.min_survival)?;
    let terminated = traj.steady_state(eps_star, &cfg.plateau)?;
    let speed = estimate_speed(&traj, terminated.alpha, terminated.beta)?;
    let failures_term = traj.failures;
    let tols = SENSITIVITY_FACTORS.map(|f| f * cfg.plateau.tol);
    let with_tol = |tol: f64| PlateauConfig { tol, ..cfg.plateau };
    let term_alt = tols.map(|t| traj.steady_state(eps_star, &with_tol(t)).ok());
    drop(traj);

    let trunc = base.with_kind(Termination::Truncated);
    let tcfg = TrajectoryConfig { record_positions: false, ..tcfg };
    let traj = estimate_mean_trajectory(trunc, epsilon, &tcfg, derive_seed(seed, &[1]))?;
    traj.check_usable(tcfg.min_survival)?;
    let truncated = traj.steady_state(eps_star, &cfg.plateau)?;
    let sensitivity = (0..tols.len())
        .map(|i| Sensitivity {
            tol: tols[i],
            terminated: term_alt[i],
            truncated: traj.steady_state(eps_star, &with_tol(tols[i])).ok(),
        })
        .collect();
    Ok(PointEstimate {
        epsilon,
        terminated,
        truncated,
        speed,
        failures_term,
        failures_trunc: traj.failures,
        sensitivity,
    })
}

/// Output of [`build_scaling_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub params: ScalingParams,
    pub points: Vec<PointEstimate>,
    pub nu_theta: NuTheta,
    pub nu_theta_epsilon: f64,
}

/// Threshold by density evolution, `(alpha, beta, gamma, s)` on every grid
/// epsilon and `(nu, theta)` from one truncated run.
pub fn build_scaling_params(
    base: EnsembleParams,
    grid: &[f64],
    cfg: &EstimateConfig,
    seed: u64,
) -> Result<Estimate> {
    base.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidParams("empty epsilon grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("epsilon grid must be strictly increasing".into()));
    }
    let eps_star = de_threshold(base.dv, base.dc, base.l, cfg.de_tol)?;
    if let Some(&bad) = grid.iter().find(|&&e| !(e > 0.0 && e < eps_star)) {
        return Err(Error::InvalidEpsilon(bad));
    }
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &e)| estimate_point(base, e, eps_star, cfg, derive_seed(seed, &[i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let nt_eps = cfg.nu_theta_epsilon.unwrap_or(eps_star - 0.015);
    let nu_theta = estimate_nu_theta(
        base.with_kind(Termination::Truncated),
        nt_eps,
        eps_star,
        &cfg.nu_theta,
        derive_seed(seed, &[0x6e75]),
    )?;
    let params = ScalingParams {
        dv: base.dv,
        dc: base.dc,
        l: base.l,
        n: base.n,
        trials: cfg.trajectory.n_trials,
        eps_star,
        nu: nu_theta.nu,
        theta: nu_theta.theta,
        rows: points.iter().map(PointEstimate::row).collect(),
    };
    params.validate()?;
    Ok(Estimate { params, points, nu_theta, nu_theta_epsilon: nt_eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_table() -> ScalingParams {
        ScalingParams {
            dv: 5,
            dc: 10,
            l: 50,
            n: 10000,
            trials: 200,
            eps_star: 0.4994,
            nu: 0.424,
            theta: 1.64,
            rows: vec![
                ScalingRow {
                    epsilon: 0.46,
                    alpha_term: 3.0,
                    beta_term: 19.0,
                    gamma_term: 4.0,
                    alpha_trunc: 1.5,
                    gamma_trunc: 2.0,
                    speed: 2.2,
                },
                ScalingRow {
                    epsilon: 0.48,
                    alpha_term: 3.4,
                    beta_term: 21.0,
                    gamma_term: 4.2,
                    alpha_trunc: 1.9,
                    gamma_trunc: 2.1,
                    speed: 2.0,
                },
            ],
        }
    }

    #[test]
    fn interpolation() {
        let t = sample_table();
        assert_eq!(t.at(0.46).unwrap(), t.rows[0]);
        assert_eq!(t.at(0.48).unwrap(), t.rows[1]);
        let mid = t.at(0.47).unwrap();
        assert!((mid.beta_term - 20.0).abs() < 1e-12);
        assert!((mid.speed - 2.1).abs() < 1e-12);
        assert!(matches!(t.at(0.45), Err(Error::Extrapolation { .. })));
        assert!(matches!(t.at(0.481), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn file_round_trip() {
        let t = sample_table();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = ScalingParams::read(&buf[..]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_files_rejected() {
        let mut t = sample_table();
        t.rows.reverse();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert!(ScalingParams::read(&buf[..]).is_err());

        let mut buf = Vec::new();
        sample_table().write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let cut = lines[1].rfind(' ').unwrap();
        lines[1].truncate(cut);
        assert!(matches!(ScalingParams::read(lines.join("\n").as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(ScalingParams::read("hello\n".as_bytes()).is_err());
    }

    #[test]
    fn descending_grid_rejected() {
        let base = EnsembleParams::new(3, 6, 10, 60, Termination::Terminated).unwrap();
        let r = build_scaling_params(base, &[0.45, 0.44], &EstimateConfig::default(), 0);
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }
}
