//! Sum-product decoding with the exact tanh check rule.

use super::LdpcCode;
use crate::{clip_llr, Error, Result};

/// Check-to-variable messages, indexed by edge id. Saving this across calls
/// lets an outer loop resume the decoder with refreshed channel LLRs.
#[derive(Debug, Clone)]
pub struct MessageState {
    pub(super) c2v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    /// Channel LLR plus all incoming check messages, per bit.
    pub posterior_llrs: Vec<f64>,
    /// Decoder-added information: `posterior - channel`, bit-exact.
    pub extrinsic_llrs: Vec<f64>,
    pub hard_bits: Vec<u8>,
    /// True iff the hard decision satisfied every check (early stop).
    pub converged: bool,
    pub iterations: usize,
    pub state: MessageState,
}

// tanh(25) already rounds to 1.0 in f64; cap the product magnitude so
// atanh stays finite.
const TANH_CAP: f64 = 1.0 - 1e-15;

pub(super) fn sum_product(
    code: &LdpcCode,
    channel_llrs: &[f64],
    max_iters: usize,
    state: Option<&MessageState>,
) -> Result<DecodeOutput> {
    if channel_llrs.len() != code.m {
        return Err(Error::dimension(format!(
            "channel LLR length {} != code length {}",
            channel_llrs.len(),
            code.m
        )));
    }
    if max_iters == 0 {
        return Err(Error::config("max_iters must be >= 1"));
    }

    let (m, dv, dc) = (code.m, code.dv, code.dc);
    let num_edges = m * dv;
    let mut c2v: Vec<f64> = match state {
        Some(s) => {
            if s.c2v.len() != num_edges {
                return Err(Error::dimension("message state size mismatch"));
            }
            s.c2v.clone()
        }
        None => vec![0.0; num_edges],
    };
    let mut v2c = vec![0.0; num_edges];
    variable_update(channel_llrs, dv, &c2v, &mut v2c);

    let mut extrinsic = vec![0.0; m];
    let mut posterior = vec![0.0; m];
    let mut hard = vec![0u8; m];
    let mut converged = false;
    let mut iterations = 0;

    let mut fwd = vec![0.0; dc];
    let mut bwd = vec![0.0; dc];

    for iter in 1..=max_iters {
        iterations = iter;
        // check update: leave-one-out tanh products via partial products
        for c in 0..code.num_checks {
            let edges = &code.check_edges[c * dc..(c + 1) * dc];
            for (i, &e) in edges.iter().enumerate() {
                let t = (v2c[e as usize] * 0.5).tanh();
                fwd[i] = if i == 0 { t } else { fwd[i - 1] * t };
            }
            for (i, &e) in edges.iter().enumerate().rev() {
                let t = (v2c[e as usize] * 0.5).tanh();
                bwd[i] = if i == dc - 1 { t } else { bwd[i + 1] * t };
            }
            for (i, &e) in edges.iter().enumerate() {
                let prod = match i {
                    0 => bwd[1],
                    _ if i == dc - 1 => fwd[dc - 2],
                    _ => fwd[i - 1] * bwd[i + 1],
                };
                c2v[e as usize] = 2.0 * prod.clamp(-TANH_CAP, TANH_CAP).atanh();
            }
        }

        variable_update(channel_llrs, dv, &c2v, &mut v2c);

        for v in 0..m {
            let ext: f64 = c2v[v * dv..(v + 1) * dv].iter().sum();
            extrinsic[v] = ext;
            posterior[v] = channel_llrs[v] + ext;
            hard[v] = if posterior[v] >= 0.0 { 0 } else { 1 };
        }
        if code.syndrome_ok(&hard) {
            converged = true;
            break;
        }
    }

    Ok(DecodeOutput {
        posterior_llrs: posterior,
        extrinsic_llrs: extrinsic,
        hard_bits: hard,
        converged,
        iterations,
        state: MessageState { c2v },
    })
}

fn variable_update(channel: &[f64], dv: usize, c2v: &[f64], v2c: &mut [f64]) {
    for (v, &ch) in channel.iter().enumerate() {
        let base = v * dv;
        let sum: f64 = ch + c2v[base..base + dv].iter().sum::<f64>();
        for s in 0..dv {
            v2c[base + s] = clip_llr(sum - c2v[base + s]);
        }
    }
}
