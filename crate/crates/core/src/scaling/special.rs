//! Special functions for the first-hit-time laws.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

use super::quad::{integrate, integrate_pieces};
use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn phi(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Regularized lower incomplete gamma `P(k, x)` for integer `k >= 1`.
///
/// Below `x = 1` the series `e^{-x} sum_{j>=k} x^j / j!` is used (all terms
/// positive); above it `1 - e^{-x} sum_{j<k} x^j / j!`.
pub fn gamma_p_int(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < 1.0 {
        let mut term = (1..=k).fold(1.0, |t, j| t * x / j as f64);
        let mut sum = 0.0;
        let mut j = k;
        while term > sum * 1e-17 {
            sum += term;
            j += 1;
            term *= x / j as f64;
        }
        sum * (-x).exp()
    } else {
        1.0 - gamma_q_int(k, x)
    }
}

/// Upper tail `Q(k, x) = 1 - P(k, x)` for integer `k >= 1`.
pub fn gamma_q_int(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        return 1.0 - gamma_p_int(k, x);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= x / j as f64;
        sum += term;
    }
    sum * (-x).exp()
}

/// `P(k, x) - k P(k+1, x) / x`, the normalized first moment deficit that
/// appears in the bit and block error laws. Non-negative; evaluated by a
/// positive series for small `x`.
pub fn gamma_moment_gap(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < 1.0 {
        // e^{-x} sum_{j>=k} x^j (j+1-k) / (j+1)!
        let mut pow_over_fact = (1..=k + 1).fold(1.0, |t, j| t * x / j as f64) / x;
        let mut sum = 0.0;
        let mut j = k;
        loop {
            let term = pow_over_fact * (j + 1 - k) as f64;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            j += 1;
            pow_over_fact *= x / (j + 1) as f64;
        }
        sum * (-x).exp()
    } else {
        gamma_p_int(k, x) - k as f64 * gamma_p_int(k + 1, x) / x
    }
}

/// Mean of the exponential first-hit-time approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mu0 {
    /// `mu0`, `+inf` when saturated.
    pub value: f64,
    /// `ln mu0` (always finite unless `mu0 == 0`).
    pub ln_value: f64,
    /// True when `mu0` exceeds the floating range; the error laws then
    /// evaluate to zero.
    pub saturated: bool,
}

impl Mu0 {
    pub fn from_value(value: f64) -> Self {
        Mu0 { value, ln_value: value.ln(), saturated: value.is_infinite() }
    }

    /// `len / mu0` evaluated through logarithms.
    pub fn ratio(&self, len: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        if self.value == 0.0 {
            return f64::INFINITY;
        }
        (len.ln() - self.ln_value).exp()
    }
}

/// Upper integration limit `gamma sqrt(N / nu) (eps* - eps)`.
pub fn mu0_upper_limit(gamma: f64, nu: f64, n: f64, eps_star: f64, epsilon: f64) -> f64 {
    gamma * (n / nu).sqrt() * (eps_star - epsilon)
}

/// `ln int_0^u Phi(z) e^{z^2/2} dz` for `u > 0`.
pub fn ln_phi_exp_integral(u: f64) -> f64 {
    const ABS: f64 = 0.0;
    const REL: f64 = 1e-13;
    if u <= 20.0 {
        let q = integrate(|z| phi(z) * (0.5 * z * z).exp(), 0.0, u, ABS, REL);
        q.value.ln()
    } else {
        // scale by e^{u^2/2}: the integrand is then <= 1 and peaks at u
        let split = (u - 60.0 / u).max(0.0);
        let q = integrate_pieces(
            |z| phi(z) * (0.5 * (z - u) * (z + u)).exp(),
            &[0.0, split, u],
            ABS,
            REL,
        );
        0.5 * u * u + q.value.ln()
    }
}

/// `mu0 = sqrt(2 pi) / theta * int_0^{gamma sqrt(N/nu)(eps*-eps)} Phi(z) e^{z^2/2} dz`.
pub fn mu0(gamma: f64, nu: f64, theta: f64, n: f64, eps_star: f64, epsilon: f64) -> Result<Mu0> {
    if !(gamma > 0.0 && nu > 0.0 && theta > 0.0 && n > 0.0) {
        return Err(Error::Domain(format!(
            "mu0 needs positive gamma, nu, theta, N (got {gamma}, {nu}, {theta}, {n})"
        )));
    }
    if epsilon > eps_star {
        return Err(Error::Domain(format!(
            "epsilon {epsilon} above the threshold {eps_star}"
        )));
    }
    let u = mu0_upper_limit(gamma, nu, n, eps_star, epsilon);
    Ok(mu0_from_limit(u, theta))
}

/// `mu0` for a given upper limit `u >= 0`.
pub fn mu0_from_limit(u: f64, theta: f64) -> Mu0 {
    if u <= 0.0 {
        return Mu0 { value: 0.0, ln_value: f64::NEG_INFINITY, saturated: false };
    }
    let ln_value = (2.0 * PI).sqrt().ln() - theta.ln() + ln_phi_exp_integral(u);
    let value = ln_value.exp();
    Mu0 { value, ln_value, saturated: value.is_infinite() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_reference_values() {
        assert_eq!(phi(0.0), 0.5);
        assert!((phi(1.0) - 0.841_344_746_068_542_9).abs() < 1e-14, "{:e}", phi(1.0) - 0.841_344_746_068_542_9);
        assert!((phi(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-15);
    }

    #[test]
    fn incomplete_gamma_branches_agree() {
        for k in 1..=3 {
            for &x in &[0.999_999_9, 1.000_000_1] {
                let p = gamma_p_int(k, x);
                let direct = 1.0
                    - (-x as f64).exp()
                        * (0..k).map(|j| x.powi(j as i32) / (1..=j).product::<u32>() as f64).sum::<f64>();
                assert!((p - direct).abs() < 1e-14, "k={k} x={x}");
            }
        }
        // x^2/2 - x^3/3 + O(x^4)
        let tiny = 0.5e-16 - 1e-24 / 3.0;
        assert!(((gamma_p_int(2, 1e-8) - tiny) / tiny).abs() < 1e-14);
        assert_eq!(gamma_p_int(3, 0.0), 0.0);
        assert_eq!(gamma_p_int(3, f64::INFINITY), 1.0);
    }

    #[test]
    fn moment_gap_branches_agree() {
        for k in 1..=2 {
            let below = gamma_moment_gap(k, 1.0 - 1e-12);
            let above = gamma_moment_gap(k, 1.0 + 1e-12);
            assert!((below - above).abs() < 1e-12);
            assert!(gamma_moment_gap(k, 1e-6) > 0.0);
        }
    }

    #[test]
    fn mu0_zero_at_threshold() {
        let m = mu0(2.0, 0.4, 1.6, 1000.0, 0.5, 0.5).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(mu0(2.0, 0.4, 1.6, 1000.0, 0.5, 0.51).is_err());
    }

    #[test]
    fn log_domain_matches_direct_near_switch() {
        let direct = {
            let q = integrate(|z| phi(z) * (0.5 * z * z).exp(), 0.0, 20.5, 0.0, 1e-14);
            q.value.ln()
        };
        assert!((ln_phi_exp_integral(20.5) - direct).abs() < 1e-10);
    }

    #[test]
    fn huge_limit_saturates() {
        let m = mu0_from_limit(60.0, 1.0);
        assert!(m.saturated);
        assert!(m.ln_value.is_finite());
        assert_eq!(m.ratio(25.0), 0.0);
    }
}
