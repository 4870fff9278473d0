//! LMMSE soft-interference-cancellation demodulation.
//!
//! Per time slot, interferers are cancelled by their a-priori means and the
//! residual is filtered with the per-stream LMMSE filter. The output for
//! stream k is a complex LLR that is extrinsic in k: it depends only on the
//! priors of the other streams.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::phy::ChannelRealization;
use crate::{clip_llr, Error, Result};

const SQRT_8: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Paired LLRs for the real and imaginary bit of one QPSK symbol.
/// Positive favors bit 0, i.e. a +1/sqrt(2) quadrature amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexLlr {
    pub re: f64,
    pub im: f64,
}

impl ComplexLlr {
    pub const ZERO: ComplexLlr = ComplexLlr { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        ComplexLlr { re, im }
    }

    pub fn clipped(self) -> Self {
        ComplexLlr {
            re: clip_llr(self.re),
            im: clip_llr(self.im),
        }
    }
}

/// Soft-symbol statistics derived from decoder feedback.
#[derive(Debug, Clone, Copy)]
pub struct PriorStats {
    pub mean: Complex64,
    pub variance: f64,
}

impl PriorStats {
    /// Uninformative prior: zero mean, unit variance.
    pub const UNINFORMATIVE: PriorStats = PriorStats {
        mean: Complex64::new(0.0, 0.0),
        variance: 1.0,
    };

    /// Perfectly known symbol: exact mean, zero variance.
    pub fn known(symbol: Complex64) -> Self {
        PriorStats {
            mean: symbol,
            variance: 0.0,
        }
    }
}

/// Soft mean and variance of a QPSK symbol given its complex LLR:
/// mean `(tanh(Lr/2) + j tanh(Li/2))/sqrt(2)`, variance `1 - |mean|^2`.
pub fn prior_stats(llr: ComplexLlr) -> PriorStats {
    let tr = (llr.re * 0.5).tanh();
    let ti = (llr.im * 0.5).tanh();
    PriorStats {
        mean: Complex64::new(tr * std::f64::consts::FRAC_1_SQRT_2, ti * std::f64::consts::FRAC_1_SQRT_2),
        variance: 1.0 - 0.5 * (tr * tr + ti * ti),
    }
}

/// Demodulate one received vector into per-stream extrinsic complex LLRs.
///
/// Streams flagged in `known` must carry variance-0 priors with the exact
/// symbol mean; they are cancelled perfectly and receive no output (their
/// slot in the returned vector is `ComplexLlr::ZERO`).
///
/// One N x N factorization of the all-streams covariance is shared across
/// streams; each stream's leave-one-out inverse follows from a rank-one
/// downdate, which is algebraically identical to inverting Sigma_k directly.
pub fn lmmse_demodulate(
    ch: &ChannelRealization,
    y: &DVector<Complex64>,
    priors: &[PriorStats],
    known: &[bool],
) -> Result<Vec<ComplexLlr>> {
    let (n, k) = (ch.num_rx(), ch.num_tx());
    if y.len() != n {
        return Err(Error::dimension(format!("y has {} entries, expected {n}", y.len())));
    }
    if priors.len() != k || known.len() != k {
        return Err(Error::dimension(format!(
            "priors/known have {}/{} entries, expected {k}",
            priors.len(),
            known.len()
        )));
    }
    if ch.n0 <= 0.0 {
        return Err(Error::config(
            "LMMSE demodulation requires N0 > 0; the zero-forcing limit diverges",
        ));
    }

    // A = N0 I + sum_k v_k h_k h_k^H over all streams
    let mut a = DMatrix::<Complex64>::identity(n, n).scale(ch.n0);
    for kk in 0..k {
        let v = priors[kk].variance;
        if v > 0.0 {
            let hk = ch.h.column(kk);
            for r in 0..n {
                for c in 0..n {
                    a[(r, c)] += hk[r] * hk[c].conj() * v;
                }
            }
        }
    }
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Numeric("covariance factorization failed".into()))?;

    // residual after cancelling every stream's mean
    let mut r = y.clone();
    for kk in 0..k {
        let m = priors[kk].mean;
        if m != Complex64::new(0.0, 0.0) {
            let hk = ch.h.column(kk);
            for row in 0..n {
                r[row] -= hk[row] * m;
            }
        }
    }

    let g = chol.solve(&ch.h); // columns g_k = A^-1 h_k
    let mut out = vec![ComplexLlr::ZERO; k];
    for kk in 0..k {
        if known[kk] {
            continue;
        }
        let hk = ch.h.column(kk);
        let gk = g.column(kk);
        let gamma: f64 = hk
            .iter()
            .zip(gk.iter())
            .map(|(h, g)| (h.conj() * g).re)
            .sum();
        let denom = 1.0 - priors[kk].variance * gamma;
        // add this stream's own mean back into the residual
        let mk = priors[kk].mean;
        let mut acc = Complex64::new(0.0, 0.0);
        for row in 0..n {
            acc += gk[row].conj() * (r[row] + hk[row] * mk);
        }
        let l = acc * (SQRT_8 / denom);
        out[kk] = ComplexLlr::new(l.re, l.im).clipped();
    }
    Ok(out)
}

/// Per-stream SIR `h_k^H Sigma_k^-1 h_k` for every non-known stream, using
/// the same downdate identity as the LLR path.
pub fn lmmse_sir(
    ch: &ChannelRealization,
    priors: &[PriorStats],
    known: &[bool],
) -> Result<Vec<f64>> {
    let (n, k) = (ch.num_rx(), ch.num_tx());
    if priors.len() != k || known.len() != k {
        return Err(Error::dimension("priors/known length mismatch"));
    }
    if ch.n0 <= 0.0 {
        return Err(Error::config("SIR requires N0 > 0"));
    }
    let mut a = DMatrix::<Complex64>::identity(n, n).scale(ch.n0);
    for kk in 0..k {
        let v = priors[kk].variance;
        if v > 0.0 {
            let hk = ch.h.column(kk);
            for row in 0..n {
                for col in 0..n {
                    a[(row, col)] += hk[row] * hk[col].conj() * v;
                }
            }
        }
    }
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::Numeric("covariance factorization failed".into()))?;
    let g = chol.solve(&ch.h);
    let mut out = vec![0.0; k];
    for kk in 0..k {
        if known[kk] {
            continue;
        }
        let gamma: f64 = ch
            .h
            .column(kk)
            .iter()
            .zip(g.column(kk).iter())
            .map(|(h, g)| (h.conj() * g).re)
            .sum();
        out[kk] = gamma / (1.0 - priors[kk].variance * gamma);
    }
    Ok(out)
}

/// Apply [`lmmse_demodulate`] slot by slot over a whole frame.
pub fn batch_demodulate(
    ch: &ChannelRealization,
    y: &DMatrix<Complex64>,
    priors: &[Vec<PriorStats>],
    known: &[Vec<bool>],
) -> Result<Vec<Vec<ComplexLlr>>> {
    let t = y.ncols();
    if priors.len() != t || known.len() != t {
        return Err(Error::dimension("per-slot prior/known count != slot count"));
    }
    let mut out = Vec::with_capacity(t);
    for slot in 0..t {
        let yt = DVector::from_column_slice(y.column(slot).as_slice());
        out.push(lmmse_demodulate(ch, &yt, &priors[slot], &known[slot])?);
    }
    Ok(out)
}
