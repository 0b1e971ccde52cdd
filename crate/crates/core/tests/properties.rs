use proptest::prelude::*;
use qtsallis::{
    asymptotic_threshold, asymptotic_threshold_block, compose_pseudoadditive, conditional_entropy_closed,
    conditional_entropy_def, conditional_entropy_ratio, entropy_sign, escort, joint_spectrum,
    marginal_spectrum, partial_trace, q_trace, quantum_conditional, quantum_tsallis,
    separable_conditional_direct, separable_state, spectrum_of, tensor_product, threshold_for_q,
    tripartite_chain, tsallis_entropy, DensityMatrix, EntropicIndex, JointDist, ProbDist,
    SeparableDecomposition, Sign, Spectrum, WernerParams,
};

fn q(v: f64) -> EntropicIndex {
    EntropicIndex::new(v).unwrap()
}

/// Normalized vector of `len` weights, some of which may be exactly zero.
fn dist(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 1e-6..1.0f64], len).prop_filter_map(
        "all-zero draw",
        |raw| {
            let s: f64 = raw.iter().sum();
            (s > 0.0).then(|| raw.iter().map(|v| v / s).collect())
        },
    )
}

fn index() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.05..0.95f64, 1.05..20.0f64]
}

fn joint(rows: usize, cols: usize) -> impl Strategy<Value = JointDist> {
    dist(rows * cols).prop_map(move |p| JointDist::new(vec![rows, cols], p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entropy_is_nonnegative_and_bounded_by_uniform(p in (2usize..12).prop_flat_map(dist), qq in index()) {
        let p = ProbDist::new(p).unwrap();
        let s = tsallis_entropy(&p, q(qq));
        prop_assert!(s >= 0.0);
        let max = tsallis_entropy(&ProbDist::uniform(p.len()).unwrap(), q(qq));
        prop_assert!(s <= max + 1e-12, "{s} > {max}");
    }

    #[test]
    fn zero_outcomes_do_not_change_entropy(p in (2usize..8).prop_flat_map(dist), qq in index()) {
        let base = tsallis_entropy(&ProbDist::new(p.clone()).unwrap(), q(qq));
        let mut longer = p;
        longer.push(0.0);
        let expanded = tsallis_entropy(&ProbDist::new(longer).unwrap(), q(qq));
        prop_assert!((base - expanded).abs() <= 1e-15);
    }

    #[test]
    fn escort_is_normalized(p in (2usize..10).prop_flat_map(dist), qq in 0.05..200.0f64) {
        let e = escort(&ProbDist::new(p).unwrap(), q(qq)).unwrap();
        prop_assert!((e.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn escort_average_matches_ratio_form(j in (2usize..5, 2usize..5).prop_flat_map(|(r, c)| joint(r, c)),
                                         qq in prop::sample::select(vec![0.3, 0.7, 1.0, 1.5, 3.0, 10.0])) {
        let d = conditional_entropy_def(&j, q(qq)).unwrap();
        let r = conditional_entropy_ratio(&j, q(qq)).unwrap();
        prop_assert!((d - r).abs() <= 1e-10, "{d} vs {r}");
        prop_assert!(d >= -1e-12);
    }

    #[test]
    fn chain_rule_holds_in_both_orders(j in (2usize..5, 2usize..5).prop_flat_map(|(r, c)| joint(r, c)), qq in index()) {
        let qq = q(qq);
        let s_ab = tsallis_entropy(&j.flatten(), qq);
        let s_a = tsallis_entropy(&j.marginal(&[0]).unwrap().flatten(), qq);
        let s_b = tsallis_entropy(&j.marginal(&[1]).unwrap().flatten(), qq);
        let b_given_a = conditional_entropy_def(&j, qq).unwrap();
        let a_given_b = conditional_entropy_def(&j.regroup(&[&[1], &[0]]).unwrap(), qq).unwrap();
        prop_assert!((compose_pseudoadditive(s_a, b_given_a, qq) - s_ab).abs() <= 1e-10);
        prop_assert!((compose_pseudoadditive(s_b, a_given_b, qq) - s_ab).abs() <= 1e-10);
    }

    #[test]
    fn tripartite_chain_residuals_vanish(p in dist(12), qq in index()) {
        let j = JointDist::new(vec![2, 3, 2], p).unwrap();
        let c = tripartite_chain(&j, q(qq)).unwrap();
        prop_assert!(c.residual <= 1e-10 && c.two_step_residual <= 1e-10);
        // the back-solved term is only well conditioned while Σ p^q is not tiny
        if qq <= 3.0 {
            prop_assert!(c.recovered_b_given_c_deviation <= 1e-10);
        }
    }

    #[test]
    fn product_states_are_pseudoadditive(a in (2usize..5).prop_flat_map(dist), b in (2usize..5).prop_flat_map(dist),
                                         qq in prop::sample::select(vec![0.5, 1.0, 2.0, 5.0])) {
        let (a, b) = (ProbDist::new(a).unwrap(), ProbDist::new(b).unwrap());
        let (ra, rb) = (DensityMatrix::diagonal(vec![a.len()], &a).unwrap(), DensityMatrix::diagonal(vec![b.len()], &b).unwrap());
        let prod = tensor_product(&ra, &rb).unwrap();
        let s = quantum_tsallis(&spectrum_of(&prod).unwrap(), q(qq));
        let composed = compose_pseudoadditive(tsallis_entropy(&a, q(qq)), tsallis_entropy(&b, q(qq)), q(qq));
        prop_assert!((s - composed).abs() <= 1e-10);
        // tracing the second factor back out recovers the first
        let back = partial_trace(&prod, &[0]).unwrap();
        prop_assert!(back.max_abs_diff(&ra) <= 1e-12);
    }

    #[test]
    fn separable_states_have_nonnegative_conditional_entropy(
        terms in 1usize..5,
        da in 2usize..4,
        db in 2usize..4,
        seed in prop::collection::vec(1e-3..1.0f64, 40),
        qq in prop::sample::select(vec![0.5, 2.0, 10.0, 100.0]),
    ) {
        let mut it = seed.into_iter().cycle();
        let mut draw = |n: usize| {
            let raw: Vec<f64> = (0..n).map(|_| it.next().unwrap()).collect();
            let s: f64 = raw.iter().sum();
            ProbDist::new(raw.iter().map(|v| v / s).collect()).unwrap()
        };
        let weights = draw(terms);
        let local_a = (0..terms).map(|_| draw(da)).collect();
        let local_b = (0..terms).map(|_| draw(db)).collect();
        let d = SeparableDecomposition::new(weights, local_a, local_b).unwrap();
        let direct = separable_conditional_direct(&d, q(qq)).unwrap();
        prop_assert!(direct >= -1e-12);
        let rho = separable_state(&d).unwrap();
        let spectral = quantum_conditional(
            &spectrum_of(&rho).unwrap(),
            &spectrum_of(&partial_trace(&rho, &[0]).unwrap()).unwrap(),
            q(qq),
        );
        prop_assert!((direct - spectral).abs() <= 1e-10, "{direct} vs {spectral}");
    }

    #[test]
    fn werner_spectra_are_normalized(n_lev in 2u32..7, n_par in 2u32..9, x in 0.0..=1.0f64) {
        let p = WernerParams::new(n_lev, n_par, x).unwrap();
        let total = |s: &Spectrum| s.levels().iter().map(|l| l.multiplicity as f64 * l.value).sum::<f64>();
        prop_assert!((total(&joint_spectrum(&p).unwrap()) - 1.0).abs() <= 1e-12);
        for m in 1..n_par {
            let s = marginal_spectrum(&p, m).unwrap();
            prop_assert!((total(&s) - 1.0).abs() <= 1e-12);
            prop_assert_eq!(s.dimension(), (n_lev as u64).pow(m));
            prop_assert!(q_trace(&s, q(1.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn sign_matches_direct_evaluation(n_lev in 2u32..4, n_par in 2u32..5, x in 0.0..=1.0f64,
                                      qq in prop::sample::select(vec![0.5, 2.0, 10.0, 100.0])) {
        let p = WernerParams::new(n_lev, n_par, x).unwrap();
        let s = conditional_entropy_closed(&p, q(qq)).unwrap();
        let sign = entropy_sign(&p, q(qq)).unwrap();
        // skip values too close to zero to carry a reliable sign
        if s.abs() > 1e-9 {
            prop_assert_eq!(sign, if s > 0.0 { Sign::Positive } else { Sign::Negative });
        }
    }
}

#[test]
fn pure_ghz_states_have_negative_conditional_entropy() {
    for (n_lev, n_par) in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 6), (4, 3)] {
        let p = WernerParams::new(n_lev, n_par, 1.0).unwrap();
        for qq in [0.1, 0.5, 1.0, 2.0, 10.0, 1e4] {
            let s = conditional_entropy_closed(&p, q(qq)).unwrap();
            assert!(s < 0.0, "N={n_lev} n={n_par} q={qq}: {s}");
        }
    }
}

#[test]
fn maximally_mixed_slice_is_uniform_entropy() {
    for (n_lev, n_par) in [(2, 2), (2, 3), (3, 3), (5, 4)] {
        let p = WernerParams::new(n_lev, n_par, 0.0).unwrap();
        for qq in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let expected = tsallis_entropy(&ProbDist::uniform(n_lev as usize).unwrap(), q(qq));
            let s = conditional_entropy_closed(&p, q(qq)).unwrap();
            assert!((s - expected).abs() <= 1e-12, "N={n_lev} n={n_par} q={qq}");
        }
    }
}

#[test]
fn marginals_are_not_smaller_werner_states() {
    for (n_lev, n_par) in [(2, 3), (2, 4), (3, 3), (3, 4)] {
        for m in 2..n_par {
            let mixed = WernerParams::new(n_lev, n_par, 0.0).unwrap();
            let smaller = WernerParams::new(n_lev, m, 0.0).unwrap();
            assert_eq!(marginal_spectrum(&mixed, m).unwrap(), joint_spectrum(&smaller).unwrap());

            let pure = WernerParams::new(n_lev, n_par, 1.0).unwrap();
            let smaller = WernerParams::new(n_lev, m, 1.0).unwrap();
            assert_ne!(marginal_spectrum(&pure, m).unwrap(), joint_spectrum(&smaller).unwrap());
        }
    }
}

#[test]
fn threshold_approaches_the_limit_from_above() {
    for (n_lev, n_par) in [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (5, 2)] {
        let limit = asymptotic_threshold(n_lev, n_par).unwrap();
        let gaps: Vec<f64> = [10.0, 100.0, 1e3, 1e4]
            .iter()
            .map(|&qq| threshold_for_q(n_lev, n_par, q(qq)).unwrap().x_star.unwrap() - limit)
            .collect();
        assert!(gaps.iter().all(|&g| g > 0.0), "({n_lev},{n_par}): {gaps:?}");
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "({n_lev},{n_par}): {gaps:?}");
    }
}

#[test]
fn returned_roots_are_bracketed() {
    for (n_lev, n_par) in [(2, 2), (2, 3), (3, 2)] {
        for qq in [0.5, 2.0, 10.0, 100.0] {
            let point = threshold_for_q(n_lev, n_par, q(qq)).unwrap();
            let Some(x) = point.x_star else { continue };
            let at = |x: f64| entropy_sign(&WernerParams::new(n_lev, n_par, x.clamp(0.0, 1.0)).unwrap(), q(qq)).unwrap();
            let (lo, hi) = (at(x - 1e-9), at(x + 1e-9));
            assert!(lo != hi || lo == Sign::Zero, "({n_lev},{n_par}) q={qq}: {lo:?} {hi:?}");
        }
    }
}

#[test]
fn block_conditioning_is_never_weaker() {
    for (n_lev, n_par) in [(2, 2), (2, 3), (3, 3), (2, 5), (4, 4)] {
        let single = asymptotic_threshold(n_lev, n_par).unwrap();
        for k in 1..n_par {
            let block = asymptotic_threshold_block(n_lev, n_par, k).unwrap();
            assert!(block >= single);
            if k == n_par - 1 {
                assert_eq!(block, single);
            }
        }
    }
}
