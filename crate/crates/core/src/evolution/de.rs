//! Density evolution on the BEC for the coupled and uncoupled ensembles.

use crate::error::{Error, Result};

/// Fate of the erasure-probability recursion at one `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeOutcome {
    /// Every message erasure probability fell below `1e-12`.
    Converged,
    /// The recursion reached a nonzero fixed point.
    Stuck,
    /// Neither happened within the iteration cap.
    Indeterminate,
}

/// Iteration limits and bisection tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub tol: f64,
    pub max_iterations: usize,
    pub zero: f64,
    pub stall: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig { tol: 1e-5, max_iterations: 1_000_000, zero: 1e-12, stall: 1e-14 }
    }
}

fn check_degrees(dv: usize, dc: usize) -> Result<()> {
    if dv < 2 || dc <= dv {
        return Err(Error::InvalidParams(format!("need dv >= 2 and dc > dv, got ({dv}, {dc})")));
    }
    Ok(())
}

/// Runs the coupled recursion for a terminated chain of `l` positions.
///
/// `x[i * dv + k]` is the erasure probability on the edge from VN position
/// `i` to CN position `i + k`. A CN at position `j` sees the mixture of the
/// `dv` edge types feeding it, with positions outside the chain known.
pub fn coupled_outcome(epsilon: f64, dv: usize, dc: usize, l: usize, cfg: &DeConfig) -> DeOutcome {
    let positions = l + dv - 1;
    let mut x = vec![epsilon; l * dv];
    let mut y = vec![0.0; positions];
    let mut prefix = vec![0.0; dv + 1];
    for _ in 0..cfg.max_iterations {
        for (j, yj) in y.iter_mut().enumerate() {
            let mut mix = 0.0;
            for k in 0..dv {
                if j >= k && j - k < l {
                    mix += x[(j - k) * dv + k];
                }
            }
            *yj = 1.0 - (1.0 - mix / dv as f64).powi(dc as i32 - 1);
        }
        let mut max_x: f64 = 0.0;
        let mut max_delta: f64 = 0.0;
        for i in 0..l {
            prefix[0] = 1.0;
            for k in 0..dv {
                prefix[k + 1] = prefix[k] * y[i + k];
            }
            let mut suffix = 1.0;
            for k in (0..dv).rev() {
                let new = epsilon * prefix[k] * suffix;
                suffix *= y[i + k];
                let old = &mut x[i * dv + k];
                max_delta = max_delta.max((new - *old).abs());
                max_x = max_x.max(new);
                *old = new;
            }
        }
        if max_x < cfg.zero {
            return DeOutcome::Converged;
        }
        if max_delta < cfg.stall {
            return DeOutcome::Stuck;
        }
    }
    DeOutcome::Indeterminate
}

/// Runs the uncoupled recursion `x <- eps (1 - (1 - x)^{dc-1})^{dv-1}`.
pub fn uncoupled_outcome(epsilon: f64, dv: usize, dc: usize, cfg: &DeConfig) -> DeOutcome {
    let mut x = epsilon;
    for _ in 0..cfg.max_iterations {
        let new = epsilon * (1.0 - (1.0 - x).powi(dc as i32 - 1)).powi(dv as i32 - 1);
        if new < cfg.zero {
            return DeOutcome::Converged;
        }
        if (new - x).abs() < cfg.stall {
            return DeOutcome::Stuck;
        }
        x = new;
    }
    DeOutcome::Indeterminate
}

fn bisect(mut converges: impl FnMut(f64) -> DeOutcome, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match converges(mid) {
            DeOutcome::Converged => lo = mid,
            DeOutcome::Stuck => hi = mid,
            DeOutcome::Indeterminate => return Err(Error::Indeterminate(mid)),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// BP threshold of the terminated `(dv, dc, L)` coupled ensemble.
pub fn de_threshold(dv: usize, dc: usize, l: usize, tol: f64) -> Result<f64> {
    check_degrees(dv, dc)?;
    if l == 0 {
        return Err(Error::InvalidParams("L must be positive".into()));
    }
    let cfg = DeConfig { tol, ..DeConfig::default() };
    bisect(|e| coupled_outcome(e, dv, dc, l, &cfg), tol)
}

/// BP threshold of the uncoupled `(dv, dc)`-regular ensemble.
pub fn uncoupled_threshold(dv: usize, dc: usize, tol: f64) -> Result<f64> {
    check_degrees(dv, dc)?;
    let cfg = DeConfig { tol, ..DeConfig::default() };
    bisect(|e| uncoupled_outcome(e, dv, dc, &cfg), tol)
}

/// Largest fixed point of the uncoupled recursion at `epsilon` (VN-to-CN
/// erasure probability), reached by iterating from `x = epsilon`.
pub fn uncoupled_fixed_point(epsilon: f64, dv: usize, dc: usize) -> f64 {
    let mut x = epsilon;
    for _ in 0..10_000_000 {
        let new = epsilon * (1.0 - (1.0 - x).powi(dc as i32 - 1)).powi(dv as i32 - 1);
        if (new - x).abs() < 1e-15 {
            return new;
        }
        x = new;
    }
    x
}

/// Fraction of bits per position the uncoupled ensemble recovers at
/// `epsilon`: `epsilon (1 - y^dv)` with `y` the CN-to-VN erasure probability
/// at the fixed point. Evaluated at the coupled threshold this lower-bounds
/// `alpha / L` of the terminated ensemble.
pub fn uncoupled_decoded_fraction(epsilon: f64, dv: usize, dc: usize) -> f64 {
    let x = uncoupled_fixed_point(epsilon, dv, dc);
    let y = 1.0 - (1.0 - x).powi(dc as i32 - 1);
    epsilon * (1.0 - y.powi(dv as i32))
}
