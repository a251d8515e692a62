//! Closed-form error laws for resolved parameters.
//!
//! The first hit time `tau0` is modelled on the steady state `[alpha, beta]`
//! either as a shifted exponential with mean `mu0` (one decoding wave) or as
//! a shifted Erlang-2 with scale `mu0` (two independent waves). Every law
//! below is an integral of that density:
//!
//! * FER: `int_alpha^beta f(x) dx`
//! * BER: `int_alpha^beta (eps - x / L) f(x) dx`
//! * BLER: `FER - (1 / L) int_alpha^beta (blocks cleared at x) f(x) dx`
//!
//! With `xi = (beta - alpha) / mu0` the Erlang integrals reduce to
//! regularized incomplete gammas:
//! `int_0^xi u e^{-u} du = P(2, xi)` and `int_0^xi u^2 e^{-u} du = 2 P(3, xi)`.

use super::special::{gamma_moment_gap, gamma_p_int, Mu0};
use crate::error::{Error, Result};

fn check_interval(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) || beta < alpha {
        return Err(Error::Domain(format!(
            "steady state needs alpha <= beta (alpha = {alpha}, beta = {beta})"
        )));
    }
    Ok(())
}

/// Shifted exponential density.
pub fn exp_density(x: f64, alpha: f64, mu0: f64) -> f64 {
    if x < alpha {
        0.0
    } else {
        (-(x - alpha) / mu0).exp() / mu0
    }
}

/// Shifted Erlang-2 density.
pub fn erlang2_density(x: f64, alpha: f64, mu0: f64) -> f64 {
    if x < alpha {
        0.0
    } else {
        (x - alpha) / (mu0 * mu0) * (-(x - alpha) / mu0).exp()
    }
}

/// Two-wave FER: `1 - (1 + xi) e^{-xi}`.
pub fn fer_two_wave(alpha: f64, beta: f64, mu0: &Mu0) -> Result<f64> {
    check_interval(alpha, beta)?;
    Ok(gamma_p_int(2, mu0.ratio(beta - alpha)))
}

/// One-wave FER: `1 - e^{-(beta - alpha) / mu0}`.
pub fn fer_one_wave(alpha: f64, beta: f64, mu0: &Mu0) -> Result<f64> {
    check_interval(alpha, beta)?;
    Ok(gamma_p_int(1, mu0.ratio(beta - alpha)))
}

/// Two-wave BER over a chain of `l` positions.
///
/// `[(eps L - alpha) P(2, xi) - 2 mu0 P(3, xi)] / L`, rearranged as
/// `[(eps L - beta) P(2, xi) + (beta - alpha) (P(2, xi) - 2 P(3, xi) / xi)] / L`
/// so that no two large terms cancel.
pub fn ber_two_wave(epsilon: f64, l: f64, alpha: f64, beta: f64, mu0: &Mu0) -> Result<f64> {
    check_interval(alpha, beta)?;
    let d = beta - alpha;
    let xi = mu0.ratio(d);
    Ok(((epsilon * l - beta) * gamma_p_int(2, xi) + d * gamma_moment_gap(2, xi)) / l)
}

/// Two-wave BER exactly as usually printed:
/// `(eps L - alpha - 2 mu0) / L + e^{(alpha - beta)/mu0}
///  (beta^2 + alpha eps L - (eps L + alpha - 2 mu0)(beta + mu0)) / (mu0 L)`.
///
/// Algebraically identical to [`ber_two_wave`] but cancels badly when
/// `mu0 >> beta - alpha`.
pub fn ber_two_wave_printed(epsilon: f64, l: f64, alpha: f64, beta: f64, mu0: f64) -> f64 {
    let el = epsilon * l;
    (el - alpha - 2.0 * mu0) / l
        + ((alpha - beta) / mu0).exp()
            * (beta * beta + alpha * el - (el + alpha - 2.0 * mu0) * (beta + mu0))
            / (mu0 * l)
}

/// `int_alpha^beta (x - alpha) f2(x) dx = 2 mu0 P(3, xi)`.
pub fn erlang2_first_moment(alpha: f64, beta: f64, mu0: &Mu0) -> Result<f64> {
    check_interval(alpha, beta)?;
    let d = beta - alpha;
    let xi = mu0.ratio(d);
    if xi == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * d * gamma_p_int(3, xi) / xi)
}

fn check_speed(speed: f64, alpha: f64, beta: f64, l: f64) -> Result<()> {
    if !(speed >= 0.0) {
        return Err(Error::Domain(format!("wave speed {speed} must be non-negative")));
    }
    if speed * (beta - alpha) > l * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "speed {speed} clears {} > L = {l} blocks over the steady state",
            speed * (beta - alpha)
        )));
    }
    Ok(())
}

/// Two-wave BLER from the derived first moment:
/// `FER - (s / L) 2 mu0 P(3, xi)`.
pub fn bler_two_wave(l: f64, alpha: f64, beta: f64, speed: f64, mu0: &Mu0) -> Result<f64> {
    check_speed(speed, alpha, beta, l)?;
    let fer = fer_two_wave(alpha, beta, mu0)?;
    Ok(fer - speed / l * erlang2_first_moment(alpha, beta, mu0)?)
}

/// Two-wave BLER with the sign pattern commonly printed for this law:
/// `FER - (s mu0 / L) (e^{-xi} (xi^2 + 2 xi + 2) + 2)`.
///
/// Kept for reconciliation only: the integral it stands for is
/// `2 - e^{-xi}(xi^2 + 2 xi + 2)`, so this form is wrong (it does not even
/// vanish at `xi = 0`).
pub fn bler_two_wave_printed(l: f64, alpha: f64, beta: f64, speed: f64, mu0: f64) -> f64 {
    let xi = (beta - alpha) / mu0;
    let fer = 1.0 - (1.0 + xi) * (-xi).exp();
    fer - speed * mu0 / l * ((-xi).exp() * (xi * xi + 2.0 * xi + 2.0) + 2.0)
}

/// `omega = eps L' - alpha`, the steady-state length of a one-wave chain
/// evaluated over `L'` positions.
pub fn one_wave_span(epsilon: f64, l_prime: f64, alpha: f64) -> f64 {
    epsilon * l_prime - alpha
}

/// One-wave FER over `L'` positions with `beta = eps L'`. Zero when
/// `L' = 0` or when the span is empty.
pub fn fer_unterminated(epsilon: f64, l_prime: f64, alpha: f64, mu0: &Mu0) -> f64 {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    if l_prime <= 0.0 || omega <= 0.0 {
        return 0.0;
    }
    gamma_p_int(1, mu0.ratio(omega))
}

/// One-wave BER: `(mu0 / L') e^{-xi} + (omega - mu0) / L'`, evaluated as
/// `omega (P(1, xi) - P(2, xi) / xi) / L'`.
pub fn ber_unterminated(epsilon: f64, l_prime: f64, alpha: f64, mu0: &Mu0) -> f64 {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    if l_prime <= 0.0 || omega <= 0.0 {
        return 0.0;
    }
    omega * gamma_moment_gap(1, mu0.ratio(omega)) / l_prime
}

/// One-wave BER in its printed form (cancels for `mu0 >> omega`).
pub fn ber_unterminated_printed(epsilon: f64, l_prime: f64, alpha: f64, mu0: f64) -> f64 {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    mu0 / l_prime * (-omega / mu0).exp() + (omega - mu0) / l_prime
}

/// One-wave BLER counting only whole cleared blocks, `floor((x - alpha) s)`.
///
/// With `K = floor(omega s)` and `q = 1 / (s mu0)` the subtracted mass
/// telescopes to `(1 / L') sum_{i=1}^{K} (e^{-i q} - e^{-omega / mu0})`,
/// a sum of non-negative terms.
pub fn bler_unterminated(epsilon: f64, l_prime: f64, alpha: f64, speed: f64, mu0: &Mu0) -> Result<f64> {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    if l_prime <= 0.0 || omega <= 0.0 {
        return Ok(0.0);
    }
    check_speed(speed, 0.0, omega, l_prime)?;
    let fer = fer_unterminated(epsilon, l_prime, alpha, mu0);
    let xi = mu0.ratio(omega);
    let k = (omega * speed).floor() as u64;
    if k == 0 || xi == 0.0 {
        return Ok(fer);
    }
    let q = xi / (omega * speed);
    let mut cleared = 0.0;
    for i in 1..=k {
        let a = i as f64 * q;
        // e^{-a} - e^{-xi} = e^{-a} (1 - e^{-(xi - a)})
        cleared += (-a).exp() * -(-(xi - a).max(0.0)).exp_m1();
    }
    Ok(fer - cleared / l_prime)
}

/// The same law written as the explicit bin sum usually printed.
pub fn bler_unterminated_printed(epsilon: f64, l_prime: f64, alpha: f64, speed: f64, mu0: f64) -> f64 {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    let fer = 1.0 - (-omega / mu0).exp();
    let k = (omega * speed).floor();
    let sm = speed * mu0;
    let mut sum = 0.0;
    let mut i = 0.0;
    while i < k {
        sum += i * ((-i / sm).exp() - (-(i + 1.0) / sm).exp());
        i += 1.0;
    }
    fer - sum / l_prime - k / l_prime * ((-k / sm).exp() - (-omega / mu0).exp())
}

/// One-wave BLER without the floor (continuous block count).
pub fn bler_unterminated_continuous(
    epsilon: f64,
    l_prime: f64,
    alpha: f64,
    speed: f64,
    mu0: &Mu0,
) -> Result<f64> {
    let omega = one_wave_span(epsilon, l_prime, alpha);
    if l_prime <= 0.0 || omega <= 0.0 {
        return Ok(0.0);
    }
    check_speed(speed, 0.0, omega, l_prime)?;
    let xi = mu0.ratio(omega);
    let fer = gamma_p_int(1, xi);
    if xi == 0.0 {
        return Ok(fer);
    }
    // int (x - alpha) f1 = mu0 P(2, xi)
    Ok(fer - speed / l_prime * omega * gamma_p_int(2, xi) / xi)
}

/// Error rates of one phase or one chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub fer: f64,
    pub ber: f64,
    pub bler: f64,
}

impl Rates {
    pub const ZERO: Rates = Rates { fer: 0.0, ber: 0.0, bler: 0.0 };
}

/// Two-phase window composition.
///
/// `first` is the one-wave chain over `L - W` positions, `last_two_wave`
/// the terminated chain of length `W` and `last_one_wave` the one-wave chain
/// over `W` positions (used when the first phase failed).
pub fn compose_window(first: Rates, last_two_wave: Rates, last_one_wave: Rates, l: f64, w: f64) -> Rates {
    let pf1 = first.fer;
    let tail = w / l;
    let head = 1.0 - tail;
    Rates {
        fer: pf1 + last_two_wave.fer - pf1 * last_two_wave.fer,
        ber: first.ber * head + (last_two_wave.ber * (1.0 - pf1) + last_one_wave.ber * pf1) * tail,
        bler: first.bler * head
            + (last_two_wave.bler * (1.0 - pf1) + last_one_wave.bler * pf1) * tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(v: f64) -> Mu0 {
        Mu0::from_value(v)
    }

    #[test]
    fn empty_steady_state_has_no_errors() {
        assert_eq!(fer_two_wave(3.0, 3.0, &mu(2.0)).unwrap(), 0.0);
        assert_eq!(ber_two_wave(0.45, 50.0, 3.0, 3.0, &mu(2.0)).unwrap(), 0.0);
        assert_eq!(bler_two_wave(50.0, 3.0, 3.0, 2.0, &mu(2.0)).unwrap(), 0.0);
        assert_eq!(fer_unterminated(0.5, 4.0, 2.0, &mu(1.0)), 0.0);
        assert_eq!(fer_unterminated(0.5, 0.0, 0.0, &mu(1.0)), 0.0);
    }

    #[test]
    fn beta_below_alpha_is_an_error() {
        assert!(fer_two_wave(3.0, 2.0, &mu(1.0)).is_err());
    }

    #[test]
    fn long_steady_state_always_fails() {
        assert!((fer_two_wave(0.0, 1e6, &mu(1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_speed_bler_equals_fer() {
        let m = mu(7.0);
        let f = fer_two_wave(0.2, 20.0, &m).unwrap();
        assert_eq!(bler_two_wave(50.0, 0.2, 20.0, 0.0, &m).unwrap(), f);
        let fu = fer_unterminated(0.48, 30.0, 0.5, &m);
        assert_eq!(bler_unterminated(0.48, 30.0, 0.5, 0.0, &m).unwrap(), fu);
    }

    #[test]
    fn slow_wave_bler_equals_fer() {
        // omega * s < 1: no block can be completed
        let m = mu(3.0);
        let omega = one_wave_span(0.4, 10.0, 1.0);
        let s = 0.9 / omega;
        let fu = fer_unterminated(0.4, 10.0, 1.0, &m);
        assert_eq!(bler_unterminated(0.4, 10.0, 1.0, s, &m).unwrap(), fu);
    }

    #[test]
    fn too_fast_wave_is_rejected() {
        assert!(bler_two_wave(50.0, 0.0, 25.0, 2.5, &mu(10.0)).is_err());
    }

    #[test]
    fn printed_forms_agree_where_well_conditioned() {
        for &(a, b, m) in &[(0.3, 24.0, 5.0), (0.1, 10.0, 40.0), (1.0, 2.0, 0.5)] {
            let shipped = ber_two_wave(0.49, 50.0, a, b, &mu(m)).unwrap();
            let printed = ber_two_wave_printed(0.49, 50.0, a, b, m);
            assert!(((shipped - printed) / shipped).abs() < 1e-11);
            let su = ber_unterminated(0.49, 40.0, a, &mu(m));
            let pu = ber_unterminated_printed(0.49, 40.0, a, m);
            assert!(((su - pu) / su).abs() < 1e-11);
            let bu = bler_unterminated(0.49, 40.0, a, 1.5, &mu(m)).unwrap();
            let pbu = bler_unterminated_printed(0.49, 40.0, a, 1.5, m);
            assert!(((bu - pbu) / bu).abs() < 1e-11);
        }
    }

    #[test]
    fn printed_two_wave_bler_is_off_by_4_s_mu0_over_l() {
        // the two forms differ by (s mu0 / L)(2 e^{-xi}(xi^2+2xi+2)) ... at xi = 0 by 4 s mu0 / L
        let printed = bler_two_wave_printed(50.0, 1.0, 1.0, 2.0, 3.0);
        assert!((printed - (-4.0 * 2.0 * 3.0 / 50.0)).abs() < 1e-15);
    }

    #[test]
    fn window_weights() {
        let a = Rates { fer: 0.1, ber: 0.01, bler: 0.05 };
        let b = Rates { fer: 0.2, ber: 0.02, bler: 0.07 };
        let c = Rates { fer: 0.3, ber: 0.03, bler: 0.09 };
        let r = compose_window(Rates::ZERO, b, c, 50.0, 50.0);
        assert_eq!(r, b);
        let r = compose_window(a, b, c, 50.0, 20.0);
        assert!((r.fer - (1.0 - 0.9 * 0.8)).abs() < 1e-15);
        assert!((r.ber - (0.01 * 0.6 + (0.02 * 0.9 + 0.03 * 0.1) * 0.4)).abs() < 1e-15);
    }
}
