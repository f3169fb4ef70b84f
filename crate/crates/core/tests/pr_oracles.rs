use spectrum_sharing::capacity::{
    delay_limited_capacity, ergodic_capacity, outage_capacity, outage_of, wf_dual_value,
};
use spectrum_sharing::fading::sample_joint;
use spectrum_sharing::pr_policy::{
    calibrate_tci, calibrate_tci_for_snr, calibrate_wf, ci_snr, effective_states,
};
use spectrum_sharing::{EffectiveState, GainDistribution, OutageFamily, PrPolicy};

const SEED: u64 = 23;
const Q: f64 = 10.0;

/// PR states under the peak rule with threshold 1: `I = 1` everywhere.
fn pip_states(n: usize) -> Vec<EffectiveState> {
    let e = |m| GainDistribution::exponential(m).unwrap();
    let b = sample_joint(&e(1.0), &e(10.0), &e(1.0), n, SEED).unwrap();
    effective_states(&b.f, &vec![1.0; n]).unwrap()
}

/// Exponential integral `E1(x)` from its convergent series.
fn e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -x / k as f64;
        sum += term / k as f64;
    }
    -EULER - x.ln() - sum
}

#[test]
fn e1_series_reference_values() {
    assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-13);
    assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-13);
}

#[test]
fn tci_threshold_and_snr_under_peak_rule() {
    // gain f/2: theta = -ln(0.8)/2, gamma = Q / (2 E1(2 theta))
    let states = pip_states(1_000_000);
    let PrPolicy::Tci { theta, gamma } = calibrate_tci(&states, Q, 0.2).unwrap() else {
        panic!()
    };
    let theta_oracle = -(0.8f64).ln() / 2.0;
    let gamma_oracle = Q / (2.0 * e1(2.0 * theta_oracle));
    assert!((theta_oracle - 0.111_572).abs() < 1e-6);
    assert!((gamma_oracle - 4.409_12).abs() < 1e-4, "{gamma_oracle}");
    assert!((theta - theta_oracle).abs() < 1e-3, "{theta}");
    assert!(
        (gamma - gamma_oracle).abs() / gamma_oracle < 5e-3,
        "{gamma}"
    );
}

#[test]
fn tci_serves_the_right_fraction() {
    let states = pip_states(100_000);
    let tci = calibrate_tci(&states, Q, 0.2).unwrap();
    let out = outage_of(
        &states,
        &tci,
        match tci {
            PrPolicy::Tci { gamma, .. } => gamma,
            _ => unreachable!(),
        },
    )
    .unwrap();
    assert!(
        out.epsilon <= 0.2 && 0.2 - out.epsilon <= 1.0 / states.len() as f64 + 1e-12,
        "{}",
        out.epsilon
    );
}

#[test]
fn constant_power_outage_probability() {
    // Pr{f Q/2 < 1} = 1 - exp(-0.2)
    let states = pip_states(1_000_000);
    let out = outage_of(&states, &PrPolicy::Cp { q: Q }, 1.0).unwrap();
    let oracle = 1.0 - (-0.2f64).exp();
    assert!((oracle - 0.181_269).abs() < 1e-6);
    assert!((out.epsilon - oracle).abs() < 3e-3, "{}", out.epsilon);
    assert!((out.epsilon - oracle).abs() <= 4.0 * out.stderr + 1e-4);
}

#[test]
fn outage_is_nondecreasing_in_target_snr() {
    let states = pip_states(50_000);
    let mut last = 0.0;
    for k in 0..40 {
        let g0 = 0.1 * k as f64;
        let e = outage_of(&states, &PrPolicy::Cp { q: Q }, g0)
            .unwrap()
            .epsilon;
        assert!(e >= last);
        last = e;
    }
}

#[test]
fn water_filling_budget_and_slackness() {
    let states = pip_states(200_000);
    let wf = calibrate_wf(&states, Q).unwrap();
    let PrPolicy::Wf { mu } = wf else { panic!() };
    assert!((wf.mean_power(&states) - Q).abs() <= 1e-3 * Q);
    for s in &states {
        let p = wf.power(s);
        assert!(p >= 0.0);
        // positive power exactly when the gain clears the water level
        assert_eq!(p > 0.0, s.gain() > mu);
    }
}

#[test]
fn water_filling_dual_matches_primal() {
    let states = pip_states(200_000);
    let wf = calibrate_wf(&states, Q).unwrap();
    let PrPolicy::Wf { mu } = wf else { panic!() };
    let primal = ergodic_capacity(&states, &wf).unwrap();
    let dual = wf_dual_value(&states, Q, mu);
    assert!(
        (dual - primal.bits).abs() <= 3.0 * primal.stderr,
        "{dual} vs {}",
        primal.bits
    );
}

#[test]
fn water_filling_beats_constant_power() {
    let states = pip_states(200_000);
    let wf = calibrate_wf(&states, Q).unwrap();
    let cp = ergodic_capacity(&states, &PrPolicy::Cp { q: Q }).unwrap();
    assert!(ergodic_capacity(&states, &wf).unwrap().bits >= cp.bits);
}

#[test]
fn inversion_rules_deliver_constant_snr() {
    let e = |m| GainDistribution::exponential(m).unwrap();
    let shifted = GainDistribution::shifted_exponential(0.5, 0.5).unwrap();
    let b = sample_joint(&e(1.0), &e(10.0), &shifted, 100_000, SEED).unwrap();
    let states = effective_states(&b.f, &vec![1.0; b.len()]).unwrap();
    let ci = ci_snr(&states, Q).unwrap();
    let PrPolicy::Ci { gamma, divergent } = ci else {
        panic!()
    };
    assert!(!divergent);
    assert!((ci.mean_power(&states) - Q).abs() <= 1e-9 * Q);
    for s in &states {
        let snr = s.f * ci.power(s) / (1.0 + s.interference);
        assert!((snr - gamma).abs() <= 1e-12 * gamma);
    }
    let tci = calibrate_tci(&states, Q, 0.1).unwrap();
    let PrPolicy::Tci { theta, gamma } = tci else {
        panic!()
    };
    for s in &states {
        let snr = tci.snr(s);
        assert!(snr == 0.0 && s.gain() < theta || snr == gamma);
    }
}

#[test]
fn fixed_snr_rule_is_budget_feasible() {
    let states = pip_states(100_000);
    for g0 in [0.5, 1.0, 2.0, 8.0] {
        let p = calibrate_tci_for_snr(&states, Q, g0).unwrap();
        assert!(p.mean_power(&states) <= Q * (1.0 + 1e-12));
        // every served state is at least as strong as every unserved one
        let PrPolicy::Tci { theta, .. } = p else {
            panic!()
        };
        for s in &states {
            assert_eq!(p.power(s) > 0.0, s.gain() >= theta);
        }
    }
}

#[test]
fn tci_outage_capacity_matches_threshold_snr() {
    let states = pip_states(100_000);
    let c = outage_capacity(&states, OutageFamily::Tci, Q, 0.2).unwrap();
    let PrPolicy::Tci { gamma, .. } = calibrate_tci(&states, Q, 0.2).unwrap() else {
        panic!()
    };
    assert!((c.bits - (1.0 + gamma).log2()).abs() < 1e-12);
}

#[test]
fn exponential_inverse_moment_is_flagged_divergent() {
    let states = pip_states(100_000);
    let dl = delay_limited_capacity(&states, Q).unwrap();
    assert!(dl.divergent);
    assert_eq!(dl.limit_bits(), 0.0);
    assert!(dl.estimate.bits > 0.0);
}

#[test]
fn mismatched_lengths_rejected() {
    assert!(effective_states(&[1.0, 2.0], &[1.0]).is_err());
    let states = pip_states(1000);
    assert!(calibrate_wf(&states, 0.0).is_err());
    assert!(outage_capacity(&states, OutageFamily::Cp, Q, 0.0).is_err());
    assert!(outage_capacity(&states, OutageFamily::Cp, Q, 1.0).is_err());
}
