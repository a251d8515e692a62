use proptest::prelude::*;

use scldpc::ensemble::{sample_erasures, EnsembleParams, ErasurePattern, TannerGraph, Termination};
use scldpc::peeling::{peel_with, TraceOptions};
use scldpc::scaling::laws::{
    ber_two_wave, bler_two_wave, bler_unterminated, compose_window, fer_two_wave, fer_unterminated,
    ber_unterminated, Rates,
};
use scldpc::scaling::Mu0;
use scldpc::seed::rng_from;
use scldpc::window::{decode, Decoder, WindowConfig};

fn residual_set(g: &TannerGraph, e: &ErasurePattern, seed: u64) -> Vec<usize> {
    let mut rng = rng_from(seed);
    let (_, state) = peel_with(g, e, &mut rng, TraceOptions::default()).unwrap();
    state.residual_vns().collect()
}

fn small_params() -> impl Strategy<Value = EnsembleParams> {
    (prop_oneof![Just((3, 6)), Just((4, 8)), Just((3, 9))], 1usize..7, 1usize..6, any::<bool>()).prop_map(
        |((dv, dc), l, k, terminated)| {
            let kind = if terminated { Termination::Terminated } else { Termination::Truncated };
            // dv N divisible by dc
            EnsembleParams::new(dv, dc, l, 2 * k * dc / dv, kind).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn residual_does_not_depend_on_the_peeling_order(
        p in small_params(), eps in 0.2f64..0.8, gs in any::<u64>(), es in any::<u64>(), a in any::<u64>(), b in any::<u64>()
    ) {
        let g = TannerGraph::sample(p, gs).unwrap();
        let e = sample_erasures(g.n_vns(), eps, es).unwrap();
        prop_assert_eq!(residual_set(&g, &e, a), residual_set(&g, &e, b));
    }

    #[test]
    fn widest_window_is_full_bp(
        p in small_params(), eps in 0.2f64..0.8, gs in any::<u64>(), es in any::<u64>(), ds in any::<u64>()
    ) {
        let p = p.with_kind(Termination::Terminated);
        let g = TannerGraph::sample(p, gs).unwrap();
        let e = sample_erasures(g.n_vns(), eps, es).unwrap();
        let full = decode(&g, &e, Decoder::FullBp, ds).unwrap();
        let win = decode(&g, &e, Decoder::Window(WindowConfig::new(p.l + p.dv - 1)), ds).unwrap();
        prop_assert_eq!(&full.per_position_unresolved, &win.per_position_unresolved);
        prop_assert_eq!(full.frame_error, win.frame_error);
    }

    #[test]
    fn more_erasures_never_shrink_the_residual(
        p in small_params(), eps in 0.1f64..0.6, extra in 0.0f64..0.3, gs in any::<u64>(), es in any::<u64>(), xs in any::<u64>()
    ) {
        let g = TannerGraph::sample(p, gs).unwrap();
        let e = sample_erasures(g.n_vns(), eps, es).unwrap();
        let more = sample_erasures(g.n_vns(), extra, xs).unwrap();
        let sup = ErasurePattern::from_flags(
            e.erased.iter().zip(&more.erased).map(|(&x, &y)| x || y).collect(),
            eps,
        );
        let small = residual_set(&g, &e, 1);
        let big = residual_set(&g, &sup, 2);
        prop_assert!(small.iter().all(|v| big.binary_search(v).is_ok()));
    }

    #[test]
    fn two_wave_laws_are_bounded(
        alpha in 0.0f64..10.0, d in 0.0f64..20.0, mu in 1e-3f64..1e4, eps in 0.35f64..0.5, speed in 0.0f64..2.0
    ) {
        let l = 50.0;
        let beta = alpha + d;
        prop_assume!(beta <= eps * l);
        let m = Mu0::from_value(mu);
        let fer = fer_two_wave(alpha, beta, &m).unwrap();
        let ber = ber_two_wave(eps, l, alpha, beta, &m).unwrap();
        let bler = bler_two_wave(l, alpha, beta, speed, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&fer));
        prop_assert!(ber >= 0.0 && ber <= eps * fer * (1.0 + 1e-12));
        prop_assert!(bler >= -1e-15 && bler <= fer * (1.0 + 1e-12));
        // a longer mean first hit time can only help
        let fer2 = fer_two_wave(alpha, beta, &Mu0::from_value(mu * 1.5)).unwrap();
        prop_assert!(fer2 <= fer);
    }

    #[test]
    fn one_wave_laws_are_bounded(
        alpha in 0.0f64..10.0, lp in 0.0f64..60.0, mu in 1e-3f64..1e4, eps in 0.35f64..0.5, speed in 0.0f64..0.5
    ) {
        let m = Mu0::from_value(mu);
        let fer = fer_unterminated(eps, lp, alpha, &m);
        let ber = ber_unterminated(eps, lp, alpha, &m);
        let bler = bler_unterminated(eps, lp, alpha, speed, &m).unwrap();
        prop_assert!((0.0..=1.0).contains(&fer));
        prop_assert!(ber >= 0.0 && ber <= eps * fer * (1.0 + 1e-12));
        prop_assert!(bler >= -1e-15 && bler <= fer * (1.0 + 1e-12));
        prop_assert!(fer_unterminated(eps, lp + 1.0, alpha, &m) >= fer);
    }

    #[test]
    fn window_composition_degenerates(
        f in 0.0f64..1.0, b in 0.0f64..0.5, k in 0.0f64..1.0, g in 0.0f64..1.0
    ) {
        let two = Rates { fer: f, ber: b * f, bler: k * f };
        let one = Rates { fer: g, ber: 0.3 * g, bler: 0.5 * g };
        // no first phase: the window sees the whole terminated chain
        let r = compose_window(Rates::ZERO, two, one, 50.0, 50.0);
        prop_assert_eq!(r, two);
        // first phase never fails: only the tail contributes
        let r = compose_window(Rates::ZERO, two, one, 50.0, 10.0);
        prop_assert!((r.fer - f).abs() <= 1e-15);
        prop_assert!((r.ber - b * f * 0.2).abs() <= 1e-15);
    }
}
