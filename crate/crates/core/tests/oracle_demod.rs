//! Demodulator oracles: an independent dense-matrix evaluation of the
//! LMMSE expressions, the SIR algebraic identity, and the conditional-mean
//! statistical contract.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use scmudd::demod::{
    batch_demodulate, lmmse_demodulate, lmmse_sir, prior_stats, ComplexLlr, PriorStats,
};
use scmudd::phy::{draw_channel, qpsk_map, ChannelRealization};
use scmudd::rng::substream;

type C = Complex64;

/// Straightforward textbook evaluation, sharing no code with the
/// production path: builds Sigma_k explicitly per stream and inverts it by
/// Gauss-Jordan elimination on a plain Vec-of-Vec matrix.
fn reference_llrs(h: &[Vec<C>], n0: f64, y: &[C], means: &[C], vars: &[f64]) -> Vec<(f64, f64)> {
    let n = h.len();
    let k = h[0].len();
    let mut out = Vec::with_capacity(k);
    for target in 0..k {
        // Sigma = N0 I + sum_{k' != target} var_k' h_k' h_k'^H
        let mut sigma = vec![vec![C::new(0.0, 0.0); n]; n];
        for (r, row) in sigma.iter_mut().enumerate() {
            row[r] = C::new(n0, 0.0);
        }
        for kk in 0..k {
            if kk == target {
                continue;
            }
            for r in 0..n {
                for c in 0..n {
                    sigma[r][c] += h[r][kk] * h[c][kk].conj() * vars[kk];
                }
            }
        }
        let inv = gauss_jordan_inverse(&sigma);
        // residual y - sum_{k' != target} h_k' mean_k'
        let mut resid = y.to_vec();
        for kk in 0..k {
            if kk == target {
                continue;
            }
            for r in 0..n {
                resid[r] -= h[r][kk] * means[kk];
            }
        }
        // L = 2 sqrt(2) h_target^H Sigma^-1 resid
        let mut acc = C::new(0.0, 0.0);
        for r in 0..n {
            let mut row = C::new(0.0, 0.0);
            for c in 0..n {
                row += inv[r][c] * resid[c];
            }
            acc += h[r][target].conj() * row;
        }
        let l = acc * 2.0 * std::f64::consts::SQRT_2;
        out.push((l.re, l.im));
    }
    out
}

fn gauss_jordan_inverse(a: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let mut m: Vec<Vec<C>> = a.iter().cloned().collect();
    let mut inv = vec![vec![C::new(0.0, 0.0); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for c in 0..n {
            m[col][c] /= p;
            inv[col][c] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            for c in 0..n {
                let mc = m[col][c];
                let ic = inv[col][c];
                m[r][c] -= f * mc;
                inv[r][c] -= f * ic;
            }
        }
    }
    inv
}

fn random_setup(k: usize, n: usize, n0: f64, seed: u64) -> (ChannelRealization, DVector<C>, Vec<PriorStats>) {
    let mut rng = substream(seed, "oracle-demod", 0);
    let ch = draw_channel(k, n, n0, &mut rng);
    let y = DVector::from_fn(n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let priors: Vec<PriorStats> = (0..k)
        .map(|_| {
            prior_stats(ComplexLlr::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ))
        })
        .collect();
    (ch, y, priors)
}

#[test]
fn matches_independent_reference_2x2() {
    for seed in 0..10u64 {
        let (ch, y, priors) = random_setup(2, 2, 0.4, seed);
        check_against_reference(&ch, &y, &priors);
    }
}

#[test]
fn matches_independent_reference_4x4() {
    for seed in 20..24u64 {
        let (ch, y, priors) = random_setup(4, 4, 0.7, seed);
        check_against_reference(&ch, &y, &priors);
    }
}

fn check_against_reference(ch: &ChannelRealization, y: &DVector<C>, priors: &[PriorStats]) {
    let k = ch.num_tx();
    let n = ch.num_rx();
    let known = vec![false; k];
    let got = lmmse_demodulate(ch, y, priors, &known).unwrap();

    let h: Vec<Vec<C>> = (0..n).map(|r| (0..k).map(|c| ch.h[(r, c)]).collect()).collect();
    let means: Vec<C> = priors.iter().map(|p| p.mean).collect();
    let vars: Vec<f64> = priors.iter().map(|p| p.variance).collect();
    let y_plain: Vec<C> = y.iter().copied().collect();
    let reference = reference_llrs(&h, ch.n0, &y_plain, &means, &vars);

    for kk in 0..k {
        assert!(
            (got[kk].re - reference[kk].0).abs() < 1e-10,
            "stream {kk} re: {} vs {}",
            got[kk].re,
            reference[kk].0
        );
        assert!(
            (got[kk].im - reference[kk].1).abs() < 1e-10,
            "stream {kk} im: {} vs {}",
            got[kk].im,
            reference[kk].1
        );
    }
}

#[test]
fn sir_identity_holds_to_1e10() {
    // 8 |c_k^H h_k|^2 / Var equals h_k^H Sigma_k^-1 h_k, with both sides
    // evaluated through the explicit reference inverse
    let (ch, _, priors) = random_setup(4, 4, 0.5, 77);
    let k = ch.num_tx();
    let n = ch.num_rx();
    let h: Vec<Vec<C>> = (0..n).map(|r| (0..k).map(|c| ch.h[(r, c)]).collect()).collect();
    let vars: Vec<f64> = priors.iter().map(|p| p.variance).collect();
    let known = vec![false; k];
    let sir_fast = lmmse_sir(&ch, &priors, &known).unwrap();

    for target in 0..k {
        let mut sigma = vec![vec![C::new(0.0, 0.0); n]; n];
        for (r, row) in sigma.iter_mut().enumerate() {
            row[r] = C::new(ch.n0, 0.0);
        }
        for kk in 0..k {
            if kk == target {
                continue;
            }
            for r in 0..n {
                for c in 0..n {
                    sigma[r][c] += h[r][kk] * h[c][kk].conj() * vars[kk];
                }
            }
        }
        let inv = gauss_jordan_inverse(&sigma);
        // c_k = Sigma^-1 h_k
        let mut c_k = vec![C::new(0.0, 0.0); n];
        for r in 0..n {
            for c in 0..n {
                c_k[r] += inv[r][c] * h[c][target];
            }
        }
        // h^H Sigma^-1 h
        let quad: C = (0..n).map(|r| h[r][target].conj() * c_k[r]).sum();
        // variance of L given x: 8 c^H Sigma c; numerator 8 |c^H h|^2
        let mut sigma_c = vec![C::new(0.0, 0.0); n];
        for r in 0..n {
            for c in 0..n {
                sigma_c[r] += sigma[r][c] * c_k[c];
            }
        }
        let var: C = (0..n).map(|r| c_k[r].conj() * sigma_c[r]).sum();
        let num: C = (0..n).map(|r| c_k[r].conj() * h[r][target]).sum();
        let sir_ratio = 8.0 * num.norm_sqr() / (8.0 * var.re);
        assert!((sir_ratio - quad.re).abs() < 1e-10);
        assert!((sir_fast[target] - quad.re).abs() < 1e-10);
    }
}

#[test]
fn conditional_mean_is_linear_in_the_symbol() {
    // E[L_k | x_k = x] = sir_k * 2 sqrt(2) x, empirically over noise and
    // interferer draws from their priors
    let (k, n, n0) = (6, 6, 0.5);
    let mut rng = substream(99, "oracle-condmean", 0);
    let ch = draw_channel(k, n, n0, &mut rng);
    let llrs: Vec<ComplexLlr> = (0..k)
        .map(|_| ComplexLlr::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    let priors: Vec<PriorStats> = llrs.iter().map(|&l| prior_stats(l)).collect();
    let known = vec![false; k];
    let target = 0usize;
    let x_target = qpsk_map(0, 1);

    let sir = lmmse_sir(&ch, &priors, &known).unwrap()[target];
    let trials = 200_000usize;
    let mut acc = C::new(0.0, 0.0);
    let bit_prob = |l: f64| 1.0 / (1.0 + (-l).exp()); // P(bit = 0)
    let noise_std = (n0 * 0.5).sqrt();
    for _ in 0..trials {
        let mut y = DVector::from_element(n, C::new(0.0, 0.0));
        for kk in 0..k {
            let x = if kk == target {
                x_target
            } else {
                let br = u8::from(rng.gen_range(0.0..1.0) >= bit_prob(llrs[kk].re));
                let bi = u8::from(rng.gen_range(0.0..1.0) >= bit_prob(llrs[kk].im));
                qpsk_map(br, bi)
            };
            for r in 0..n {
                y[r] += ch.h[(r, kk)] * x;
            }
        }
        for r in 0..n {
            y[r] += C::new(
                noise_std * normal_like(&mut rng),
                noise_std * normal_like(&mut rng),
            );
        }
        let out = lmmse_demodulate(&ch, &y, &priors, &known).unwrap();
        acc += C::new(out[target].re, out[target].im);
    }
    let mean = acc / C::new(trials as f64, 0.0);
    let expect = x_target * (sir * 2.0 * std::f64::consts::SQRT_2);
    // Var[L] = 8 sir per real coordinate pair; allow 5 sigma of the MC mean
    let mc_sigma = (8.0 * sir / trials as f64).sqrt();
    assert!(
        (mean.re - expect.re).abs() < 5.0 * mc_sigma,
        "re: {} vs {expect} (sigma {mc_sigma})",
        mean.re
    );
    assert!(
        (mean.im - expect.im).abs() < 5.0 * mc_sigma,
        "im: {} vs {expect} (sigma {mc_sigma})",
        mean.im
    );
}

fn normal_like<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller, kept local so the oracle does not lean on the library's
    // sampling helpers
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[test]
fn batch_16x16_matches_per_slot_exactly() {
    let (k, n, t, n0) = (16, 16, 128, 0.6);
    let mut rng = substream(123, "oracle-batch", 0);
    let ch = draw_channel(k, n, n0, &mut rng);
    let y = DMatrix::from_fn(n, t, |_, _| {
        C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let priors: Vec<Vec<PriorStats>> = (0..t)
        .map(|_| {
            (0..k)
                .map(|_| {
                    prior_stats(ComplexLlr::new(
                        rng.gen_range(-4.0..4.0),
                        rng.gen_range(-4.0..4.0),
                    ))
                })
                .collect()
        })
        .collect();
    let known = vec![vec![false; k]; t];
    let batch = batch_demodulate(&ch, &y, &priors, &known).unwrap();
    for slot in 0..t {
        let yt = DVector::from_column_slice(y.column(slot).as_slice());
        let single = lmmse_demodulate(&ch, &yt, &priors[slot], &known[slot]).unwrap();
        for kk in 0..k {
            assert_eq!(batch[slot][kk], single[kk], "slot {slot} stream {kk}");
        }
    }
}
