//! Entropy-domain density evolution of the sum-product decoder.
//!
//! A codeword spread over `W` output sections sees `W` channel qualities.
//! Variable and check updates run in the entropy parameterization: each
//! recursion maps entropies through `psi`/`psi_inv`, with the check side
//! using the variable/check duality `h <-> 1 - h`.

use super::psi::PsiTable;

/// Decoder-output entropy after `inner_iters` sum-product iterations, for a
/// codeword whose bits see effective noise levels `sigma2_levels` (the
/// levels of output sections `l-W+1..=l`, entering with equal weight).
///
/// The output is extrinsic: the sum of all `dv` check messages, with no
/// channel term.
pub fn decoder_de(sigma2_levels: &[f64], dv: usize, dc: usize, inner_iters: usize) -> f64 {
    decoder_de_with(sigma2_levels, dv, dc, inner_iters, PsiTable::get())
}

pub(crate) fn decoder_de_with(
    sigma2_levels: &[f64],
    dv: usize,
    dc: usize,
    inner_iters: usize,
    table: &PsiTable,
) -> f64 {
    assert!(!sigma2_levels.is_empty() && sigma2_levels.iter().all(|&s| s > 0.0));
    assert!(dv >= 2 && dc > dv && inner_iters >= 1);
    let w = sigma2_levels.len() as f64;
    let channel_means: Vec<f64> = sigma2_levels.iter().map(|&s| 2.0 / s).collect();

    let mut h_c = 1.0f64;
    for _ in 0..inner_iters {
        let m_c = table.inv(h_c);
        let h_v = channel_means
            .iter()
            .map(|&ch| table.eval(ch + (dv - 1) as f64 * m_c))
            .sum::<f64>()
            / w;
        let h_c_next = 1.0 - table.eval((dc - 1) as f64 * table.inv(1.0 - h_v));
        if h_c_next == h_c {
            // exact fixed point; further iterations cannot change anything
            break;
        }
        h_c = h_c_next;
    }
    table.eval(dv as f64 * table.inv(h_c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_noise_decodes_immediately() {
        let h = decoder_de(&[1e-9, 1e-9], 3, 6, 1);
        assert!(h < 1e-12, "h_dec = {h}");
    }

    #[test]
    fn infinite_noise_makes_no_progress() {
        let h = decoder_de(&[1e12], 3, 6, 50);
        assert!((h - 1.0).abs() < 1e-9, "h_dec = {h}");
    }

    #[test]
    fn more_iterations_never_hurt() {
        let s = 0.95;
        let mut prev = 1.0;
        for j in [1, 2, 5, 10, 50, 100] {
            let h = decoder_de(&[s], 3, 6, j);
            assert!(h <= prev + 1e-12);
            prev = h;
        }
    }

    #[test]
    fn sharp_transition_in_channel_quality() {
        // (3,6) with J=100 flips from stuck to decoded over a narrow band
        let bad = decoder_de(&[1.3], 3, 6, 100);
        let good = decoder_de(&[0.7], 3, 6, 100);
        assert!(bad > 0.4, "expected stall, got {bad}");
        assert!(good < 1e-6, "expected decode, got {good}");
    }
}
