//! QPSK mapping, the quasi-static MIMO channel, and training-based LMMSE
//! channel estimation.
//!
//! Conventions: bit 0 maps to +1/sqrt(2) on its quadrature, so a positive
//! LLR always favors bit 0; `N0` is the noise variance per complex receive
//! dimension; SNR in dB is `-10 log10(N0)`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One quasi-static channel draw: `y_t = H x_t + n_t`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: DMatrix<Complex64>,
    pub n0: f64,
}

impl ChannelRealization {
    pub fn num_rx(&self) -> usize {
        self.h.nrows()
    }

    pub fn num_tx(&self) -> usize {
        self.h.ncols()
    }
}

/// A K x T block of unit-power QPSK symbols.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    pub x: DMatrix<Complex64>,
}

impl SymbolFrame {
    pub fn num_streams(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_slots(&self) -> usize {
        self.x.ncols()
    }
}

/// Gray-mapped QPSK: bit 0 -> +1/sqrt(2) per quadrature.
#[inline]
pub fn qpsk_map(bit_re: u8, bit_im: u8) -> Complex64 {
    Complex64::new(
        (1.0 - 2.0 * f64::from(bit_re & 1)) * FRAC_1_SQRT_2,
        (1.0 - 2.0 * f64::from(bit_im & 1)) * FRAC_1_SQRT_2,
    )
}

/// Map an even-length bit sequence to symbols, bits `(2s, 2s+1)` forming
/// symbol `s`.
pub fn qpsk_map_bits(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::dimension("bit sequence length must be even"));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| qpsk_map(p[0], p[1]))
        .collect())
}

/// Draw an i.i.d. CSCG channel matrix with per-entry variance `1/K`.
pub fn draw_channel<R: Rng>(k: usize, n: usize, n0: f64, rng: &mut R) -> ChannelRealization {
    let std = (0.5 / k as f64).sqrt();
    let normal = Normal::new(0.0, std).unwrap();
    let h = DMatrix::from_fn(n, k, |_, _| {
        Complex64::new(normal.sample(rng), normal.sample(rng))
    });
    ChannelRealization { h, n0 }
}

/// `y = H x + n` with CSCG noise of covariance `N0 I`.
pub fn transmit<R: Rng>(
    ch: &ChannelRealization,
    x: &DVector<Complex64>,
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    if x.len() != ch.num_tx() {
        return Err(Error::dimension(format!(
            "x has {} entries, channel has {} inputs",
            x.len(),
            ch.num_tx()
        )));
    }
    let mut y = &ch.h * x;
    if ch.n0 > 0.0 {
        let normal = Normal::new(0.0, (ch.n0 * 0.5).sqrt()).unwrap();
        for yi in y.iter_mut() {
            *yi += Complex64::new(normal.sample(rng), normal.sample(rng));
        }
    }
    Ok(y)
}

/// Transmit a whole frame of slots with fresh noise per slot.
pub fn transmit_frame<R: Rng>(
    ch: &ChannelRealization,
    frame: &SymbolFrame,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    if frame.num_streams() != ch.num_tx() {
        return Err(Error::dimension("frame stream count != channel inputs"));
    }
    let n = ch.num_rx();
    let t = frame.num_slots();
    let mut y = DMatrix::zeros(n, t);
    for slot in 0..t {
        let x = DVector::from_column_slice(frame.x.column(slot).as_slice());
        let yt = transmit(ch, &x, rng)?;
        y.set_column(slot, &yt);
    }
    Ok(y)
}

/// Output of the training-based estimator.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub h_hat: DMatrix<Complex64>,
    /// Set when the training Gram matrix was (numerically) rank deficient;
    /// the regularized estimate is still returned.
    pub rank_deficient: bool,
}

/// LMMSE channel estimate under the variance-1/K prior:
/// `H_hat = Y X^H (X X^H + K N0 I)^-1`.
pub fn estimate_channel_lmmse(
    y_train: &DMatrix<Complex64>,
    x_train: &DMatrix<Complex64>,
    n0: f64,
) -> Result<ChannelEstimate> {
    let k = x_train.nrows();
    let p = x_train.ncols();
    if y_train.ncols() != p {
        return Err(Error::dimension("training Y and X slot counts differ"));
    }
    if p < k {
        return Err(Error::dimension(format!("training length {p} shorter than K={k}")));
    }
    let gram = x_train * x_train.adjoint();
    let reg = &gram + DMatrix::identity(k, k).scale(k as f64 * n0);
    // rank flag from the unregularized Gram matrix
    let rank_deficient = {
        let eig = gram.symmetric_eigenvalues();
        let max = eig.iter().fold(0.0f64, |a, &b| a.max(b));
        eig.iter().any(|&e| e < 1e-10 * max.max(1.0))
    };
    let chol = Cholesky::new(reg).ok_or_else(|| {
        Error::Numeric("training Gram matrix singular; need N0 > 0 or full-rank training".into())
    })?;
    // H_hat^H = (X X^H + K N0 I)^-1 X Y^H
    let h_hat = chol.solve(&(x_train * y_train.adjoint())).adjoint();
    Ok(ChannelEstimate {
        h_hat,
        rank_deficient,
    })
}

/// Generate a K x P training frame from pseudorandom bits.
pub fn training_frame<R: Rng>(k: usize, p: usize, rng: &mut R) -> SymbolFrame {
    let x = DMatrix::from_fn(k, p, |_, _| {
        qpsk_map(rng.gen_range(0..2u8), rng.gen_range(0..2u8))
    });
    SymbolFrame { x }
}
