//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The heavy full-scale 16x16 BER experiment is `#[ignore]`d; run it
//! explicitly with
//! `cargo test --release --test acceptance -- --ignored --nocapture`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;

use scmudd::de::{
    find_threshold, mse_section, psi, run_de, solve_sigma2, DeConfig, ME_TARGET,
};
use scmudd::demod::{lmmse_sir, prior_stats, ComplexLlr, PriorStats};
use scmudd::harness::{find_ber_crossing, CsiMode, SimConfig};
use scmudd::interleaver::ScInterleaver;
use scmudd::ldpc::LdpcCode;
use scmudd::phy::draw_channel;
use scmudd::rng::substream;

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

// ---------------------------------------------------------------------
// Criterion: decoding thresholds (all eight table entries, +-0.05 dB)
// ---------------------------------------------------------------------

fn threshold_cache() -> &'static Mutex<HashMap<(&'static str, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn threshold(scheduling: &'static str, w: usize) -> f64 {
    if let Some(&t) = threshold_cache().lock().unwrap().get(&(scheduling, w)) {
        return t;
    }
    let cfg = DeConfig {
        alpha: 1.0,
        chain_length: 64,
        coupling_width: w,
        dv: 3,
        dc: 6,
        inner_iters: 100,
        outer_iters: 2000,
        scheduling: scheduling.into(),
        ..DeConfig::default()
    };
    let report = find_threshold(&cfg, (2.0, 3.4), 0.01).unwrap();
    threshold_cache()
        .lock()
        .unwrap()
        .insert((scheduling, w), report.threshold_db);
    report.threshold_db
}

#[test]
fn de_thresholds_parallel_row() {
    let expected = [(1usize, 2.94f64), (2, 2.47), (3, 2.36), (4, 2.31)];
    for (w, want) in expected {
        let got = threshold("parallel", w);
        report(
            &format!("de-threshold parallel W={w}"),
            (got - want).abs() <= 0.05,
            &format!("{got:.4} dB, expected {want} +- 0.05"),
        );
    }
}

#[test]
fn de_thresholds_sliding_window_row() {
    let expected = [(1usize, 2.94f64), (2, 2.60), (3, 2.55), (4, 2.53)];
    for (w, want) in expected {
        let got = threshold("sliding-window", w);
        report(
            &format!("de-threshold sliding-window W={w}"),
            (got - want).abs() <= 0.05,
            &format!("{got:.4} dB, expected {want} +- 0.05"),
        );
    }
}

#[test]
fn de_threshold_monotonicity() {
    // improving W never raises the threshold; SW never beats parallel
    let mut prev_par = f64::INFINITY;
    let mut prev_sw = f64::INFINITY;
    for w in 1..=4usize {
        let par = threshold("parallel", w);
        let sw = threshold("sliding-window", w);
        report(
            &format!("threshold-ordering W={w}"),
            par <= prev_par + 1e-9 && sw <= prev_sw + 1e-9 && sw >= par - 0.011,
            &format!("parallel {par:.4} (prev {prev_par:.4}), sw {sw:.4} (prev {prev_sw:.4})"),
        );
        prev_par = par;
        prev_sw = sw;
    }
}

// ---------------------------------------------------------------------
// Criterion: multiuser-efficiency trajectories
// ---------------------------------------------------------------------

#[test]
fn me_trajectories() {
    let base = DeConfig {
        chain_length: 64,
        outer_iters: 2000,
        ..DeConfig::default()
    };

    let cfg = DeConfig {
        coupling_width: 2,
        ..base.clone()
    }
    .with_snr_db(2.47);
    let traj = run_de(&cfg).unwrap();
    let me = traj.final_state().min_me();
    report(
        "me-trajectory W=2 @ 2.47 dB",
        traj.converged && me > 0.99,
        &format!("min ME {me:.5} after {} iterations", traj.outer_iterations),
    );

    let cfg = DeConfig {
        coupling_width: 2,
        ..base.clone()
    }
    .with_snr_db(2.46);
    let traj = run_de(&cfg).unwrap();
    let me = traj.final_state().min_me();
    report(
        "me-trajectory W=2 @ 2.46 dB",
        !traj.converged && me < 0.95,
        &format!("min ME {me:.5} after {} iterations", traj.outer_iterations),
    );

    let cfg = DeConfig {
        coupling_width: 1,
        ..base
    }
    .with_snr_db(2.93);
    let traj = run_de(&cfg).unwrap();
    let me = traj.final_state().min_me();
    report(
        "me-trajectory W=1 @ 2.93 dB",
        !traj.converged && me < 0.9,
        &format!("min ME {me:.5} after {} iterations", traj.outer_iterations),
    );
}

#[test]
fn me_trajectory_is_monotone_when_converging() {
    let cfg = DeConfig {
        chain_length: 16,
        coupling_width: 2,
        outer_iters: 2000,
        ..DeConfig::default()
    }
    .with_snr_db(2.6);
    let traj = run_de(&cfg).unwrap();
    assert!(traj.converged);
    let mut prev = 0.0;
    let mut ok = true;
    for st in &traj.states {
        let me = st.min_me();
        if me < prev - 1e-9 {
            ok = false;
        }
        prev = me;
    }
    report(
        "me-trajectory monotone",
        ok,
        "min-section ME nondecreasing in a converging run",
    );
}

// ---------------------------------------------------------------------
// Criterion: BER waterfall gain, smoke scale (8x8, M=1024, 50 frames)
// ---------------------------------------------------------------------

fn smoke_cfg(w: usize) -> SimConfig {
    SimConfig {
        num_tx: 8,
        num_rx: 8,
        code_length: 1024,
        chain_length: 8,
        coupling_width: w,
        outer_iters: 300,
        inner_iters: 100,
        scheduling: "parallel".into(),
        csi: CsiMode::Perfect,
        trials: 50,
        seed: 17,
        ..SimConfig::default()
    }
}

#[test]
fn ber_smoke_coupling_gain() {
    let target = 1e-3;
    let sc = find_ber_crossing(&smoke_cfg(2), 2.6, 4.2, 0.25, 0.125, target)
        .unwrap()
        .expect("SC scheme never reached target in bracket");
    let conv = find_ber_crossing(&smoke_cfg(1), 3.2, 5.2, 0.25, 0.125, target)
        .unwrap()
        .expect("conventional scheme never reached target in bracket");
    let gain = conv - sc;
    report(
        "ber-smoke coupling gain",
        gain > 0.3,
        &format!("SC crosses 1e-3 at {sc:.3} dB, conventional at {conv:.3} dB, gain {gain:.3} dB"),
    );
}

// ---------------------------------------------------------------------
// Criterion: full-scale 16x16 experiment (hours; run with --ignored)
// ---------------------------------------------------------------------

#[test]
#[ignore = "multi-hour full-scale run; invoke with --ignored"]
fn ber_full_scale_gains() {
    let base = SimConfig {
        num_tx: 16,
        num_rx: 16,
        code_length: 2048,
        chain_length: 8,
        outer_iters: 300,
        inner_iters: 100,
        csi: CsiMode::Perfect,
        trials: 200,
        seed: 23,
        ..SimConfig::default()
    };
    let target = 1e-3;
    let conv = find_ber_crossing(
        &SimConfig {
            coupling_width: 1,
            ..base.clone()
        },
        3.2,
        5.4,
        0.25,
        0.125,
        target,
    )
    .unwrap()
    .expect("conventional crossing");
    let sc_par = find_ber_crossing(
        &SimConfig {
            coupling_width: 2,
            ..base.clone()
        },
        2.4,
        4.4,
        0.25,
        0.125,
        target,
    )
    .unwrap()
    .expect("SC parallel crossing");
    let sc_sw = find_ber_crossing(
        &SimConfig {
            coupling_width: 2,
            scheduling: "sliding-window".into(),
            ..base
        },
        2.4,
        4.6,
        0.25,
        0.125,
        target,
    )
    .unwrap()
    .expect("SC sliding-window crossing");

    let par_gain = conv - sc_par;
    let sw_gain = conv - sc_sw;
    report(
        "ber-full parallel gain",
        (par_gain - 0.8).abs() <= 0.3,
        &format!("conv {conv:.3}, SC-parallel {sc_par:.3}, gain {par_gain:.3} (expect 0.8 +- 0.3)"),
    );
    report(
        "ber-full sliding-window gain",
        (sw_gain - 0.5).abs() <= 0.3,
        &format!("conv {conv:.3}, SC-SW {sc_sw:.3}, gain {sw_gain:.3} (expect 0.5 +- 0.3)"),
    );
}

// ---------------------------------------------------------------------
// Criterion: no-CSI variant with the 16384-bit training budget
// ---------------------------------------------------------------------

#[test]
fn no_csi_training_split() {
    // M = 2048, W = 2: the known coupling sections consume (W-1)M = 2048
    // bits, 12.5% of the 16384-bit budget; the conventional scheme spends
    // the whole budget on channel training.
    let target = 1e-3;
    let base = SimConfig {
        num_tx: 8,
        num_rx: 8,
        code_length: 2048,
        chain_length: 8,
        outer_iters: 300,
        inner_iters: 100,
        scheduling: "parallel".into(),
        trials: 32,
        seed: 29,
        ..SimConfig::default()
    };
    let sc = |csi: CsiMode| SimConfig {
        coupling_width: 2,
        csi,
        ..base.clone()
    };
    let conv = |csi: CsiMode| SimConfig {
        coupling_width: 1,
        csi,
        ..base.clone()
    };

    let sc_perfect = find_ber_crossing(&sc(CsiMode::Perfect), 2.5, 4.0, 0.25, 0.25, target)
        .unwrap()
        .expect("SC perfect crossing");
    let sc_nocsi = find_ber_crossing(
        &sc(CsiMode::Estimated {
            training_bits: 16384 - 2048,
        }),
        2.5,
        4.0,
        0.25,
        0.25,
        target,
    )
    .unwrap()
    .expect("SC no-CSI crossing");
    let conv_perfect = find_ber_crossing(&conv(CsiMode::Perfect), 3.4, 5.2, 0.25, 0.25, target)
        .unwrap()
        .expect("conventional perfect crossing");
    let conv_nocsi = find_ber_crossing(
        &conv(CsiMode::Estimated {
            training_bits: 16384,
        }),
        3.4,
        5.2,
        0.25,
        0.25,
        target,
    )
    .unwrap()
    .expect("conventional no-CSI crossing");

    // estimation can only degrade a paired frame set (grid resolution
    // 0.25 dB; at this K and training length the theoretical SNR loss is
    // of order 0.05 dB, so "degrades" is asserted as "never improves")
    report(
        "no-csi degradation",
        sc_nocsi >= sc_perfect - 1e-9 && conv_nocsi >= conv_perfect - 1e-9,
        &format!(
            "SC {sc_perfect:.3} -> {sc_nocsi:.3} dB, conventional {conv_perfect:.3} -> {conv_nocsi:.3} dB"
        ),
    );
    report(
        "no-csi ordering preserved",
        sc_nocsi <= conv_nocsi - 0.25,
        &format!("SC no-CSI {sc_nocsi:.3} dB vs conventional no-CSI {conv_nocsi:.3} dB"),
    );
}

// ---------------------------------------------------------------------
// Criterion: large-system SIR oracle
// ---------------------------------------------------------------------

#[test]
fn large_system_sir_matches_fixed_point() {
    let (k, n0, h_dec) = (64usize, 0.5f64, 0.5f64);
    let sigma2 = solve_sigma2(1.0, n0, &[h_dec]).unwrap();
    let predicted = 1.0 / sigma2;

    let (m, _) = scmudd::de::psi_inv(h_dec);
    let std = (2.0 * m).sqrt();
    let mut rng = substream(41, "acceptance-sir", 0);
    let gaussian = move |rng: &mut rand_chacha::ChaCha12Rng| {
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        m + std * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };

    let mut acc = 0.0;
    let mut count = 0usize;
    for _ in 0..100 {
        let ch = draw_channel(k, k, n0, &mut rng);
        let priors: Vec<PriorStats> = (0..k)
            .map(|_| {
                prior_stats(ComplexLlr::new(gaussian(&mut rng), gaussian(&mut rng)).clipped())
            })
            .collect();
        let known = vec![false; k];
        let sirs = lmmse_sir(&ch, &priors, &known).unwrap();
        acc += sirs.iter().sum::<f64>();
        count += k;
    }
    let mean_sir = acc / count as f64;
    let rel = (mean_sir - predicted).abs() / predicted;
    report(
        "large-system sir",
        rel < 0.05,
        &format!("empirical mean SIR {mean_sir:.4} vs fixed point {predicted:.4} (rel {rel:.4})"),
    );
}

// ---------------------------------------------------------------------
// Criterion: property suites (seconds)
// ---------------------------------------------------------------------

#[test]
fn property_interleaver_invariants() {
    let mut rng = substream(43, "acceptance-itl", 0);
    for case in 0..100 {
        let m = 2 * rng.gen_range(1..50usize);
        let l = rng.gen_range(1..9usize);
        let w = rng.gen_range(1..=l);
        let itl = ScInterleaver::build(m, l, w, 1000 + case).unwrap();
        let mut seen = vec![false; m * l];
        for (i, &f) in itl.forward_table().iter().enumerate() {
            assert!(!seen[f], "not a bijection");
            seen[f] = true;
            let shift = (i / m + l - f / m) % l;
            assert!(shift < w, "section shift {shift} >= W {w}");
        }
        for s in 0..m * l / 2 {
            assert_eq!(
                itl.inverse_table()[2 * s] / m,
                itl.inverse_table()[2 * s + 1] / m,
                "output pair mixes sections"
            );
        }
    }
    report("property interleaver", true, "bijective, pair-preserving, shift-bounded on 100 random (M,L,W)");
}

#[test]
fn property_encoder_parity() {
    let code = LdpcCode::build_regular_code(3, 6, 256, 47).unwrap();
    let mut rng = substream(47, "acceptance-enc", 0);
    for _ in 0..1000 {
        let info: Vec<u8> = (0..code.info_len()).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = code.encode(&info).unwrap();
        assert!(code.syndrome_ok(&cw));
    }
    report("property encoder parity", true, "H c = 0 on 1000 random words");
}

#[test]
fn property_decoder_map_agreement() {
    // exact bitwise MAP by codebook enumeration on a toy code; the
    // smallest (3,6) length admitting girth 6 is around 30 (a length-12
    // graph cannot avoid 4-cycles), so the toy uses M = 30
    let code = LdpcCode::build_regular_code(3, 6, 30, 11).unwrap();
    let k = code.info_len();
    let mut rng = substream(49, "acceptance-map", 0);
    let mut checked = 0usize;
    for _ in 0..5 {
        let info: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
        let cw = code.encode(&info).unwrap();
        let llrs: Vec<f64> = cw
            .iter()
            .map(|&b| (if b == 0 { 2.5 } else { -2.5 }) + rng.gen_range(-2.0..2.0))
            .collect();
        // exact marginals by enumeration
        let mut log_w = vec![[f64::NEG_INFINITY; 2]; code.m()];
        for word in 0u32..(1 << k) {
            let w_info: Vec<u8> = (0..k).map(|i| ((word >> i) & 1) as u8).collect();
            let c = code.encode(&w_info).unwrap();
            let score: f64 = c
                .iter()
                .zip(&llrs)
                .map(|(&b, &l)| if b == 1 { -l } else { 0.0 })
                .sum();
            for (i, &b) in c.iter().enumerate() {
                let slot = &mut log_w[i][b as usize];
                let (hi, lo) = if *slot >= score { (*slot, score) } else { (score, *slot) };
                *slot = if hi == f64::NEG_INFINITY { lo } else { hi + (lo - hi).exp().ln_1p() };
            }
        }
        let out = code.decode_sum_product(&llrs, 50, None).unwrap();
        for i in 0..code.m() {
            let exact = log_w[i][0] - log_w[i][1];
            if exact.abs() > 0.5 {
                assert_eq!(out.posterior_llrs[i] >= 0.0, exact >= 0.0, "bit {i}");
                checked += 1;
            }
        }
    }
    report(
        "property decoder map agreement",
        checked > 80,
        &format!("{checked} confident bits agree in sign with exact MAP"),
    );
}

#[test]
fn property_de_scalar_functions() {
    assert_eq!(psi(0.0), 1.0);
    let mut prev = 1.0;
    for i in 1..=60 {
        let h = psi(i as f64 * 0.5);
        assert!(h < prev, "psi not monotone at {i}");
        prev = h;
    }
    for s in [0.2, 1.0, 3.0] {
        assert!((mse_section(s, 1.0) - s / (1.0 + s)).abs() < 1e-12);
        assert_eq!(mse_section(s, 0.0), 0.0);
    }
    let s = solve_sigma2(1.0, 0.7, &[0.0, 0.0]).unwrap();
    assert_eq!(s, 0.7);
    report(
        "property de scalars",
        true,
        "psi monotone from psi(0)=1; MSE endpoints; perfect-feedback identity",
    );
}

#[test]
fn property_smoke_high_snr_chain() {
    // end-to-end sanity: 4x4 at 15 dB decodes error-free in 20 frames
    let cfg = SimConfig {
        num_tx: 4,
        num_rx: 4,
        code_length: 512,
        chain_length: 4,
        coupling_width: 1,
        outer_iters: 10,
        inner_iters: 50,
        snr_db: vec![15.0],
        trials: 20,
        seed: 53,
        ..SimConfig::default()
    };
    let records = scmudd::harness::run_ber_sweep(&cfg).unwrap();
    report(
        "property high-snr chain",
        records[0].bit_errors == 0,
        &format!("{} bits, {} errors", records[0].bits_counted, records[0].bit_errors),
    );
}

#[test]
fn de_me_stays_in_unit_interval() {
    let cfg = DeConfig {
        chain_length: 12,
        coupling_width: 3,
        outer_iters: 300,
        ..DeConfig::default()
    }
    .with_snr_db(2.5);
    let traj = run_de(&cfg).unwrap();
    let mut ok = true;
    for st in &traj.states {
        for (&me, &s) in st.me.iter().zip(&st.sigma2) {
            if !(me > 0.0 && me <= 1.0 + 1e-12 && s >= cfg.alpha * cfg.n0 - 1e-12) {
                ok = false;
            }
        }
    }
    report(
        "property me range",
        ok,
        "ME in (0,1] and sigma2 >= alpha N0 along the trajectory",
    );
    let _ = ME_TARGET;
}
