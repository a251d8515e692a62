//! Error-rate predictions from a scaling-parameter table.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use super::laws::{self, Rates};
use super::quad::integrate_pieces;
use super::special::{mu0, Mu0};
use crate::error::{Error, Result};
use crate::evolution::table::{ScalingParams, ScalingRow};
use crate::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Refined,
    Olmos,
    Window,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Refined => "refined",
            Model::Olmos => "olmos",
            Model::Window => "window",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePrediction {
    pub model: Model,
    pub epsilon: f64,
    pub n: usize,
    pub l: usize,
    /// Window size, `None` for full BP.
    pub w: Option<usize>,
    pub fer: f64,
    pub ber: f64,
    pub bler: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub s: f64,
    pub notes: Vec<String>,
}

impl RatePrediction {
    pub fn rates(&self) -> Rates {
        Rates { fer: self.fer, ber: self.ber, bler: self.bler }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refined" => Ok(Model::Refined),
            "olmos" => Ok(Model::Olmos),
            "window" => Ok(Model::Window),
            _ => Err(Error::Domain(format!("unknown model `{s}`"))),
        }
    }
}

pub const PREDICTION_HEADER: &str = "epsilon,N,L,W,fer,ber,bler,mu0,alpha,beta,gamma,s,model";

/// Writes predictions as CSV with [`PREDICTION_HEADER`].
pub fn write_predictions<W: Write>(rows: &[RatePrediction], mut w: W) -> Result<()> {
    writeln!(w, "{PREDICTION_HEADER}")?;
    for p in rows {
        let win = p.w.map(|w| w.to_string()).unwrap_or_else(|| "full".into());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(p.epsilon),
            p.n,
            p.l,
            win,
            fmt_f64(p.fer),
            fmt_f64(p.ber),
            fmt_f64(p.bler),
            fmt_f64(p.mu0),
            fmt_f64(p.alpha),
            fmt_f64(p.beta),
            fmt_f64(p.gamma),
            fmt_f64(p.s),
            p.model
        )?;
    }
    Ok(())
}

/// Reads a file written by [`write_predictions`]. Notes are not stored and
/// come back empty.
pub fn read_predictions<R: BufRead>(r: R) -> Result<Vec<RatePrediction>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if i == 0 {
            if line.trim() != PREDICTION_HEADER {
                return Err(err("unexpected prediction header".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 13 {
            return Err(err(format!("expected 13 fields, found {}", f.len())));
        }
        let x = |k: usize| f[k].parse::<f64>().map_err(|_| err(format!("bad number `{}`", f[k])));
        let u = |k: usize| f[k].parse::<usize>().map_err(|_| err(format!("bad integer `{}`", f[k])));
        let w = if f[3] == "full" { None } else { Some(u(3)?) };
        out.push(RatePrediction {
            model: f[12].parse().map_err(|e: Error| err(e.to_string()))?,
            epsilon: x(0)?,
            n: u(1)?,
            l: u(2)?,
            w,
            fer: x(4)?,
            ber: x(5)?,
            bler: x(6)?,
            mu0: x(7)?,
            alpha: x(8)?,
            beta: x(9)?,
            gamma: x(10)?,
            s: x(11)?,
            notes: Vec::new(),
        });
    }
    Ok(out)
}

/// `int_alpha^beta (x - alpha) f2(x) dx` by adaptive quadrature.
pub fn erlang2_first_moment_quadrature(alpha: f64, beta: f64, mu0: &Mu0) -> f64 {
    if beta <= alpha || mu0.value == 0.0 || mu0.saturated {
        return 0.0;
    }
    // in u = (x - alpha) / mu0 the integrand is mu0 u^2 e^{-u}
    let xi = mu0.ratio(beta - alpha);
    let mut breaks = vec![0.0];
    for b in [2.0, 10.0, 60.0] {
        if b < xi {
            breaks.push(b);
        }
    }
    breaks.push(xi.min(800.0));
    let q = integrate_pieces(|u| u * u * (-u).exp(), &breaks, 0.0, 1e-13);
    mu0.value * q.value
}

/// The three evaluations of the two-wave block-error correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerReconciliation {
    pub xi: f64,
    pub fer: f64,
    /// `FER - (s / L) 2 mu0 P(3, xi)` from the derived antiderivative.
    pub derived: f64,
    /// `FER - (s / L)` times the quadrature of the first moment.
    pub quadrature: f64,
    /// The form with `e^{-xi}(xi^2 + 2 xi + 2) + 2`.
    pub printed: f64,
}

impl BlerReconciliation {
    pub fn derived_vs_quadrature(&self) -> f64 {
        rel_diff(self.derived, self.quadrature)
    }

    pub fn printed_vs_quadrature(&self) -> f64 {
        rel_diff(self.printed, self.quadrature)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn reconcile_bler(l: f64, alpha: f64, beta: f64, speed: f64, mu0: &Mu0) -> Result<BlerReconciliation> {
    let fer = laws::fer_two_wave(alpha, beta, mu0)?;
    let derived = laws::bler_two_wave(l, alpha, beta, speed, mu0)?;
    let quadrature = fer - speed / l * erlang2_first_moment_quadrature(alpha, beta, mu0);
    let printed = laws::bler_two_wave_printed(l, alpha, beta, speed, mu0.value);
    Ok(BlerReconciliation { xi: mu0.ratio(beta - alpha), fer, derived, quadrature, printed })
}

/// CSV header of the reconciliation report.
pub const RECONCILIATION_HEADER: &str =
    "epsilon,N,L,xi,fer,bler_derived,bler_quadrature,bler_printed,derived_vs_quadrature,printed_vs_quadrature";

pub fn write_reconciliation<W: Write>(rows: &[(RatePrediction, BlerReconciliation)], mut w: W) -> Result<()> {
    writeln!(w, "{RECONCILIATION_HEADER}")?;
    for (p, r) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(p.epsilon),
            p.n,
            p.l,
            fmt_f64(r.xi),
            fmt_f64(r.fer),
            fmt_f64(r.derived),
            fmt_f64(r.quadrature),
            fmt_f64(r.printed),
            fmt_f64(r.derived_vs_quadrature()),
            fmt_f64(r.printed_vs_quadrature())
        )?;
    }
    Ok(())
}

/// Refined predictions backed by a [`ScalingParams`] table.
#[derive(Debug, Clone, Copy)]
pub struct Predictor<'a> {
    pub table: &'a ScalingParams,
}

struct TwoWave {
    row: ScalingRow,
    mu0: Mu0,
    alpha: f64,
    beta: f64,
    speed: f64,
    notes: Vec<String>,
}

impl<'a> Predictor<'a> {
    pub fn new(table: &'a ScalingParams) -> Self {
        Predictor { table }
    }

    fn check(&self, epsilon: f64, n: usize) -> Result<ScalingRow> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < self.table.eps_star) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        self.table.at(epsilon)
    }

    /// `mu0` with the truncated-ensemble constants.
    pub fn mu0(&self, epsilon: f64, n: usize) -> Result<Mu0> {
        let row = self.check(epsilon, n)?;
        mu0(row.gamma_trunc, self.table.nu, self.table.theta, n as f64, self.table.eps_star, epsilon)
    }

    fn two_wave(&self, epsilon: f64, n: usize, l: usize) -> Result<TwoWave> {
        let row = self.check(epsilon, n)?;
        let mu0 = mu0(row.gamma_trunc, self.table.nu, self.table.theta, n as f64, self.table.eps_star, epsilon)?;
        let mut notes = Vec::new();
        // the waves meet a fixed number of iterations before eps L
        let end = epsilon * l as f64;
        let mut beta = row.beta_term - epsilon * (self.table.l as f64 - l as f64);
        if beta > end {
            beta = end;
            notes.push("beta capped at eps L".into());
        }
        let alpha = row.alpha_term;
        if l != self.table.l {
            notes.push(format!("beta shifted from the L = {} estimate", self.table.l));
        }
        let mut speed = row.speed;
        if beta > alpha && speed * (beta - alpha) > l as f64 {
            speed = l as f64 / (beta - alpha);
            notes.push(format!("speed capped at L / (beta - alpha) = {speed}"));
        }
        Ok(TwoWave { row, mu0, alpha, beta, speed, notes })
    }

    fn two_wave_rates(&self, epsilon: f64, l: usize, t: &TwoWave) -> Result<Rates> {
        if t.beta <= t.alpha {
            return Ok(Rates::ZERO);
        }
        let lf = l as f64;
        let fer = laws::fer_two_wave(t.alpha, t.beta, &t.mu0)?;
        let ber = laws::ber_two_wave(epsilon, lf, t.alpha, t.beta, &t.mu0)?;
        let bler = fer - t.speed / lf * erlang2_first_moment_quadrature(t.alpha, t.beta, &t.mu0);
        Ok(Rates { fer, ber, bler })
    }

    /// Terminated chain of `l` positions under full BP.
    pub fn terminated(&self, epsilon: f64, n: usize, l: usize) -> Result<RatePrediction> {
        let mut t = self.two_wave(epsilon, n, l)?;
        if t.beta <= t.alpha {
            t.notes.push("empty steady state".into());
        }
        let r = self.two_wave_rates(epsilon, l, &t)?;
        Ok(RatePrediction {
            model: Model::Refined,
            epsilon,
            n,
            l,
            w: None,
            fer: r.fer,
            ber: r.ber,
            bler: r.bler,
            mu0: t.mu0.value,
            alpha: t.alpha,
            beta: t.beta,
            gamma: t.row.gamma_trunc,
            s: t.speed,
            notes: t.notes,
        })
    }

    /// BLER of the terminated chain evaluated three ways.
    pub fn reconcile(&self, epsilon: f64, n: usize, l: usize) -> Result<(RatePrediction, BlerReconciliation)> {
        let p = self.terminated(epsilon, n, l)?;
        let m = self.mu0(epsilon, n)?;
        let r = reconcile_bler(l as f64, p.alpha, p.beta.max(p.alpha), p.s, &m)?;
        Ok((p, r))
    }

    fn one_wave_rates(&self, epsilon: f64, l_prime: usize, row: &ScalingRow, mu0: &Mu0, notes: &mut Vec<String>) -> Result<(Rates, f64)> {
        if l_prime == 0 {
            return Ok((Rates::ZERO, row.speed));
        }
        let lp = l_prime as f64;
        let alpha = row.alpha_trunc;
        let omega = laws::one_wave_span(epsilon, lp, alpha);
        let mut speed = row.speed;
        if omega > 0.0 && speed * omega > lp {
            speed = lp / omega;
            notes.push(format!("speed capped at L' / omega = {speed}"));
        }
        Ok((
            Rates {
                fer: laws::fer_unterminated(epsilon, lp, alpha, mu0),
                ber: laws::ber_unterminated(epsilon, lp, alpha, mu0),
                bler: laws::bler_unterminated(epsilon, lp, alpha, speed, mu0)?,
            },
            speed,
        ))
    }

    /// Unterminated chain evaluated over its first `l_prime` positions.
    pub fn unterminated(&self, epsilon: f64, n: usize, l_prime: usize) -> Result<RatePrediction> {
        let row = self.check(epsilon, n)?;
        let m = mu0(row.gamma_trunc, self.table.nu, self.table.theta, n as f64, self.table.eps_star, epsilon)?;
        let mut notes = Vec::new();
        if l_prime != self.table.l {
            notes.push(format!("alpha taken from the truncated chain of length {}", self.table.l));
        }
        let (r, speed) = self.one_wave_rates(epsilon, l_prime, &row, &m, &mut notes)?;
        Ok(RatePrediction {
            model: Model::Refined,
            epsilon,
            n,
            l: l_prime,
            w: None,
            fer: r.fer,
            ber: r.ber,
            bler: r.bler,
            mu0: m.value,
            alpha: row.alpha_trunc,
            beta: epsilon * l_prime as f64,
            gamma: row.gamma_trunc,
            s: speed,
            notes,
        })
    }

    /// Terminated chain of `l` positions under window decoding with window `w`.
    pub fn window(&self, epsilon: f64, n: usize, l: usize, w: usize) -> Result<RatePrediction> {
        if w == 0 || w > l {
            return Err(Error::WindowOutOfRange { size: w, max: l });
        }
        let row = self.check(epsilon, n)?;
        let mut t = self.two_wave(epsilon, n, w)?;
        if w < 10 {
            t.notes.push("window below 10 positions: decoding waves may not form".into());
        }
        let last_two = self.two_wave_rates(epsilon, w, &t)?;
        let (first, _) = self.one_wave_rates(epsilon, l - w, &row, &t.mu0, &mut t.notes)?;
        let (last_one, _) = self.one_wave_rates(epsilon, w, &row, &t.mu0, &mut t.notes)?;
        let r = laws::compose_window(first, last_two, last_one, l as f64, w as f64);
        Ok(RatePrediction {
            model: Model::Window,
            epsilon,
            n,
            l,
            w: Some(w),
            fer: r.fer,
            ber: r.ber,
            bler: r.bler,
            mu0: t.mu0.value,
            alpha: t.alpha,
            beta: t.beta,
            gamma: row.gamma_trunc,
            s: t.speed,
            notes: t.notes,
        })
    }
}

/// The single-exponential baseline with `epsilon`-independent constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlmosBaseline {
    pub eps_star: f64,
    pub alpha_lb_per_l: f64,
    pub gamma: f64,
    pub nu: f64,
    pub theta: f64,
}

impl OlmosBaseline {
    /// Constants quoted for the `(5, 10)` ensemble.
    pub fn five_ten(eps_star: f64) -> Self {
        OlmosBaseline { eps_star, alpha_lb_per_l: 0.0053, gamma: 4.19, nu: 2.0 * 0.424, theta: 0.63 }
    }

    pub fn predict(&self, epsilon: f64, n: usize, l: usize) -> Result<RatePrediction> {
        let m = mu0(self.gamma, self.nu, self.theta, n as f64, self.eps_star, epsilon)?;
        let alpha = self.alpha_lb_per_l * l as f64;
        let beta = epsilon * l as f64;
        let fer = if beta > alpha { laws::fer_one_wave(alpha, beta, &m)? } else { 0.0 };
        Ok(RatePrediction {
            model: Model::Olmos,
            epsilon,
            n,
            l,
            w: None,
            fer,
            ber: f64::NAN,
            bler: f64::NAN,
            mu0: m.value,
            alpha,
            beta,
            gamma: self.gamma,
            s: f64::NAN,
            notes: vec!["frame error rate only".into()],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::table::ScalingRow;

    fn table() -> ScalingParams {
        let row = |epsilon: f64| ScalingRow {
            epsilon,
            alpha_term: 3.3,
            beta_term: 21.0 + (epsilon - 0.47) * 50.0,
            gamma_term: 4.0,
            alpha_trunc: 1.8,
            gamma_trunc: 2.0,
            speed: 2.08,
        };
        ScalingParams {
            dv: 5,
            dc: 10,
            l: 50,
            n: 10000,
            trials: 200,
            eps_star: 0.4994,
            nu: 0.424,
            theta: 1.64,
            rows: vec![row(0.46), row(0.47), row(0.48)],
        }
    }

    #[test]
    fn window_equal_to_chain_is_the_terminated_law() {
        let t = table();
        let p = Predictor::new(&t);
        for &eps in &[0.46, 0.465, 0.475] {
            let full = p.terminated(eps, 1000, 50).unwrap();
            let win = p.window(eps, 1000, 50, 50).unwrap();
            assert_eq!(full.rates(), win.rates());
        }
    }

    #[test]
    fn beta_shift_for_shorter_chains() {
        let t = table();
        let p = Predictor::new(&t);
        let full = p.terminated(0.47, 1000, 50).unwrap();
        let short = p.terminated(0.47, 1000, 20).unwrap();
        assert!((full.beta - short.beta - 0.47 * 30.0).abs() < 1e-12);
        assert!(short.fer < full.fer);
    }

    #[test]
    fn outside_the_table_is_refused() {
        let t = table();
        let p = Predictor::new(&t);
        assert!(matches!(p.terminated(0.45, 1000, 50), Err(Error::Extrapolation { .. })));
        assert!(p.terminated(0.5, 1000, 50).is_err());
    }

    #[test]
    fn larger_n_predicts_fewer_errors() {
        let t = table();
        let p = Predictor::new(&t);
        let mut last = 1.0;
        for n in [250, 500, 1000, 2000, 4000] {
            let f = p.terminated(0.47, n, 50).unwrap().fer;
            assert!(f <= last);
            last = f;
        }
    }

    #[test]
    fn baseline_sits_below_the_two_wave_law() {
        // one process with a larger gamma / sqrt(nu) fails less often than two
        let t = table();
        let p = Predictor::new(&t);
        let b = OlmosBaseline::five_ten(t.eps_star);
        for &n in &[500, 1000, 2000] {
            for &eps in &[0.47, 0.48] {
                let (bf, rf) = (b.predict(eps, n, 50).unwrap(), p.terminated(eps, n, 50).unwrap());
                assert!(bf.fer < rf.fer, "{eps} {bf:?} {rf:?}");
            }
        }
    }

    #[test]
    fn reconciliation_shows_the_printed_sign_error() {
        let t = table();
        let p = Predictor::new(&t);
        let (_, r) = p.reconcile(0.47, 1000, 50).unwrap();
        assert!(r.derived_vs_quadrature() < 1e-9);
        assert!(r.printed_vs_quadrature() > 1e-3);
    }

    #[test]
    fn prediction_csv_round_trip() {
        let t = table();
        let p = Predictor::new(&t);
        let b = OlmosBaseline::five_ten(t.eps_star);
        let rows = vec![
            p.terminated(0.47, 1000, 50).unwrap(),
            p.window(0.47, 1000, 50, 20).unwrap(),
            b.predict(0.47, 1000, 50).unwrap(),
        ];
        let mut buf = Vec::new();
        write_predictions(&rows, &mut buf).unwrap();
        let back = read_predictions(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!((a.model, a.w, a.n, a.l), (b.model, b.w, b.n, b.l));
            assert!(a.fer == b.fer && (a.ber == b.ber || a.ber.is_nan() && b.ber.is_nan()));
        }
    }

    #[test]
    fn csv_has_one_line_per_prediction() {
        let t = table();
        let p = Predictor::new(&t);
        let rows = vec![p.terminated(0.47, 1000, 50).unwrap(), p.window(0.47, 1000, 50, 20).unwrap()];
        let mut buf = Vec::new();
        write_predictions(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",refined") && lines[1].contains(",full,"));
        assert!(lines[2].ends_with(",window") && lines[2].contains(",20,"));
    }
}
