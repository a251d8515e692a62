//! Brute-force composite Gauss-Legendre quadrature of the hit-time
//! densities, written independently of the library.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

use scldpc::scaling::laws::{
    ber_two_wave, ber_unterminated, bler_two_wave, bler_unterminated, erlang2_first_moment,
    fer_two_wave, fer_unterminated,
};
use scldpc::scaling::{mu0, Mu0};

pub const REL: f64 = 1e-9;
const ORDER: usize = 20;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let k = k as f64;
                        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for j in 0..panels {
        let mid = a + (j as f64 + 0.5) * h;
        for &(x, w) in rule() {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

fn exp_pdf(x: f64, alpha: f64, mu: f64) -> f64 {
    (-(x - alpha) / mu).exp() / mu
}

fn erlang_pdf(x: f64, alpha: f64, mu: f64) -> f64 {
    (x - alpha) / (mu * mu) * (-(x - alpha) / mu).exp()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / 2f64.sqrt())
}

/// One closed form against its quadrature. `scale` sets the tolerance.
#[derive(Debug, Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub got: f64,
    pub want: f64,
    pub scale: f64,
}

impl Check {
    pub fn rel(&self) -> f64 {
        if self.got == self.want {
            0.0
        } else {
            (self.got - self.want).abs() / self.scale.abs()
        }
    }

    pub fn ok(&self) -> bool {
        self.rel() <= REL
    }
}

/// `mu0` with `gamma = nu = N = 1` and `eps* - eps = u`.
pub fn mean_hit_time(u: f64, theta: f64) -> Vec<Check> {
    let got = mu0(1.0, 1.0, theta, 1.0, 0.5 + u, 0.5).unwrap().value;
    let want = (2.0 * PI).sqrt() / theta * integrate(|z| std_normal_cdf(z) * (0.5 * z * z).exp(), 0.0, u, 200);
    vec![Check { name: "mu0", got, want, scale: want }]
}

/// Needs `alpha + d <= eps L` and `speed d <= L` with `L = 50`.
pub fn two_wave(alpha: f64, d: f64, mu: f64, eps: f64, speed: f64) -> Vec<Check> {
    let l = 50.0;
    let beta = alpha + d;
    let m = Mu0::from_value(mu);
    let f2 = |x: f64| erlang_pdf(x, alpha, mu);
    let fer = integrate(f2, alpha, beta, 64);
    let ber = integrate(|x| (eps - x / l) * f2(x), alpha, beta, 64);
    let moment = integrate(|x| (x - alpha) * f2(x), alpha, beta, 64);
    let bler = fer - speed / l * moment;
    vec![
        Check { name: "fer two-wave", got: fer_two_wave(alpha, beta, &m).unwrap(), want: fer, scale: fer },
        Check { name: "ber two-wave", got: ber_two_wave(eps, l, alpha, beta, &m).unwrap(), want: ber, scale: ber },
        Check {
            name: "erlang first moment",
            got: erlang2_first_moment(alpha, beta, &m).unwrap(),
            want: moment,
            scale: moment,
        },
        Check { name: "bler two-wave", got: bler_two_wave(l, alpha, beta, speed, &m).unwrap(), want: bler, scale: fer },
    ]
}

/// Needs `eps L' - alpha > 0` and `speed (eps L' - alpha) <= L'`.
pub fn one_wave(alpha: f64, lp: f64, mu: f64, eps: f64, speed: f64) -> Vec<Check> {
    let top = eps * lp;
    let m = Mu0::from_value(mu);
    let f1 = |x: f64| exp_pdf(x, alpha, mu);
    let fer = integrate(f1, alpha, top, 64);
    let ber = integrate(|x| (eps - x / lp) * f1(x), alpha, top, 64);
    // whole blocks cleared: integrate between the jumps of the floor
    let mut edges = vec![alpha];
    let mut i = 1.0;
    while alpha + i / speed < top {
        edges.push(alpha + i / speed);
        i += 1.0;
    }
    edges.push(top);
    let cleared: f64 =
        edges.windows(2).enumerate().map(|(k, w)| k as f64 * integrate(f1, w[0], w[1], 8)).sum();
    let bler = fer - cleared / lp;
    vec![
        Check { name: "fer one-wave", got: fer_unterminated(eps, lp, alpha, &m), want: fer, scale: fer },
        Check { name: "ber one-wave", got: ber_unterminated(eps, lp, alpha, &m), want: ber, scale: ber },
        Check {
            name: "bler one-wave",
            got: bler_unterminated(eps, lp, alpha, speed, &m).unwrap(),
            want: bler,
            scale: fer,
        },
    ]
}
