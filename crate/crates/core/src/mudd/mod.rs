//! Iterative multiuser detection and decoding: outer iterations between the
//! LMMSE demodulator and the per-section sum-product decoders, under
//! parallel or sliding-window scheduling.

mod parallel;
pub mod scheduling;
mod sliding;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::demod::{lmmse_demodulate, prior_stats, ComplexLlr, PriorStats};
use crate::interleaver::ScInterleaver;
use crate::ldpc::{LdpcCode, MessageState};
use crate::phy::{qpsk_map, ChannelRealization};
use crate::{Error, Result};

/// Outer/inner iteration budget and the scheduling strategy name.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub kind: String,
    /// Max outer iterations (per stage for sliding-window).
    pub outer_iters: usize,
    /// Sum-product iterations per outer round.
    pub inner_iters: usize,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.outer_iters == 0 || self.inner_iters == 0 {
            return Err(Error::config("iteration counts must be >= 1"));
        }
        Ok(())
    }
}

/// Everything one frame's receiver needs. The channel matrix handed in here
/// is whatever the receiver believes (true CSI or an estimate); `ch.n0` is
/// the true noise level.
pub struct FrameContext<'a> {
    pub code: &'a LdpcCode,
    pub itl: &'a ScInterleaver,
    pub ch: &'a ChannelRealization,
    /// Received N x T block.
    pub y: &'a DMatrix<Complex64>,
    /// Streams K; symbol `s` rides antenna `s % K` in slot `s / K`.
    pub num_streams: usize,
    /// Input-ordering known-bit values; `Some` exactly on the known
    /// sections, `None` elsewhere.
    pub known_bits: &'a [Option<u8>],
    /// Transmitted input-ordering bits, for per-iteration trace BER only.
    pub tx_bits: Option<&'a [u8]>,
}

/// Per-outer-iteration trace record.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub outer_iter: usize,
    /// Stage section for sliding-window scheduling, L for parallel rounds.
    pub section: usize,
    /// Info-bit error rate per section vs. the transmitted bits, when
    /// ground truth was provided (known sections report 0).
    pub section_ber: Vec<f64>,
    pub section_converged: Vec<bool>,
}

/// Final result of one frame's MUDD run.
#[derive(Debug, Clone)]
pub struct MuddOutcome {
    /// Hard codeword decisions per section (empty for known sections).
    pub hard_bits: Vec<Vec<u8>>,
    /// Syndrome-pass flags per section (true for known sections).
    pub converged: Vec<bool>,
    pub outer_iterations: usize,
    pub trace: Vec<IterationRecord>,
}

impl MuddOutcome {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Run MUDD with the scheduling named in `schedule.kind`.
pub fn run(ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
    scheduling::by_name(&schedule.kind)?.run(ctx, schedule)
}

/// Convenience wrappers for the two built-in schedulings.
pub fn run_parallel(ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
    parallel::run(ctx, schedule)
}

pub fn run_sliding_window(ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
    sliding::run(ctx, schedule)
}

/// LLR-change stall exit for the Monte Carlo loop: once no message moves
/// more than this for [`STALL_PATIENCE`] consecutive rounds, further
/// iterations cannot change any hard decision.
const STALL_TOL: f64 = 1e-3;
const STALL_PATIENCE: usize = 3;

/// Shared mutable receiver state; routing between demodulator (output) and
/// decoder (input) orderings goes through the interleaver tables only.
struct MuddState<'a> {
    ctx: &'a FrameContext<'a>,
    sections: usize,
    section_known: Vec<bool>,
    /// Per-symbol priors in demodulator ordering, pinned for known symbols.
    priors: Vec<PriorStats>,
    known_symbol: Vec<bool>,
    /// Demodulator-to-decoder LLRs in decoder (input) ordering.
    dem_to_dec: Vec<f64>,
    /// Decoder extrinsic LLRs in decoder ordering.
    dec_extrinsic: Vec<f64>,
    message_states: Vec<Option<MessageState>>,
    converged: Vec<bool>,
    hard_bits: Vec<Vec<u8>>,
}

impl<'a> MuddState<'a> {
    fn new(ctx: &'a FrameContext) -> Result<Self> {
        let m = ctx.code.m();
        let l = ctx.itl.chain_length();
        let total = ctx.itl.len();
        if m != ctx.itl.section_size() {
            return Err(Error::dimension("code length != interleaver section size"));
        }
        if ctx.known_bits.len() != total {
            return Err(Error::dimension("known-bit map length != M*L"));
        }
        if total % (2 * ctx.num_streams) != 0 {
            return Err(Error::config(format!(
                "2K = {} must divide M*L = {total}",
                2 * ctx.num_streams
            )));
        }
        let slots = total / (2 * ctx.num_streams);
        if ctx.y.ncols() != slots || ctx.y.nrows() != ctx.ch.num_rx() {
            return Err(Error::dimension(format!(
                "received block is {}x{}, expected {}x{slots}",
                ctx.y.nrows(),
                ctx.y.ncols(),
                ctx.ch.num_rx()
            )));
        }
        if ctx.ch.num_tx() != ctx.num_streams {
            return Err(Error::dimension("channel width != stream count"));
        }
        if let Some(tx) = ctx.tx_bits {
            if tx.len() != total {
                return Err(Error::dimension("tx bit length != M*L"));
            }
        }

        // a section must be fully known or fully unknown
        let mut section_known = Vec::with_capacity(l);
        for sec in 0..l {
            let slice = &ctx.known_bits[sec * m..(sec + 1) * m];
            let known = slice.iter().filter(|b| b.is_some()).count();
            if known != 0 && known != m {
                return Err(Error::config(format!("section {sec} is partially known")));
            }
            section_known.push(known == m);
        }

        // route the known bits to the output side and pin their symbols
        let mut out_known: Vec<Option<u8>> = vec![None; total];
        for (i, &kb) in ctx.known_bits.iter().enumerate() {
            if let Some(b) = kb {
                out_known[ctx.itl.forward_table()[i]] = Some(b);
            }
        }
        let num_symbols = total / 2;
        let mut priors = vec![PriorStats::UNINFORMATIVE; num_symbols];
        let mut known_symbol = vec![false; num_symbols];
        for s in 0..num_symbols {
            match (out_known[2 * s], out_known[2 * s + 1]) {
                (Some(br), Some(bi)) => {
                    priors[s] = PriorStats::known(qpsk_map(br, bi));
                    known_symbol[s] = true;
                }
                (None, None) => {}
                _ => {
                    // pair preservation makes this unreachable for whole
                    // known sections
                    return Err(Error::config(format!("symbol {s} is half known")));
                }
            }
        }

        let converged = section_known.clone();
        Ok(MuddState {
            ctx,
            sections: l,
            section_known,
            priors,
            known_symbol,
            dem_to_dec: vec![0.0; total],
            dec_extrinsic: vec![0.0; total],
            message_states: vec![None; l],
            converged,
            hard_bits: vec![Vec::new(); l],
        })
    }

    fn num_slots(&self) -> usize {
        self.ctx.itl.len() / (2 * self.ctx.num_streams)
    }

    /// Demodulate the given slots and route the fresh LLRs of non-known
    /// symbols into decoder ordering. Returns the largest LLR change.
    fn demodulate_slots(&mut self, slots: &[usize]) -> Result<f64> {
        let k = self.ctx.num_streams;
        let inverse = self.ctx.itl.inverse_table();
        let mut max_delta = 0.0f64;
        for &t in slots {
            let y_t = DVector::from_column_slice(self.ctx.y.column(t).as_slice());
            let base = t * k;
            let priors_t = &self.priors[base..base + k];
            let known_t = &self.known_symbol[base..base + k];
            let out = lmmse_demodulate(self.ctx.ch, &y_t, priors_t, known_t)?;
            for (kk, llr) in out.iter().enumerate() {
                let s = base + kk;
                if self.known_symbol[s] {
                    continue;
                }
                for (pos, val) in [(2 * s, llr.re), (2 * s + 1, llr.im)] {
                    let dest = inverse[pos];
                    max_delta = max_delta.max((self.dem_to_dec[dest] - val).abs());
                    self.dem_to_dec[dest] = val;
                }
            }
        }
        Ok(max_delta)
    }

    /// Decode one section with the current channel LLRs; `warm` resumes the
    /// saved message state. Updates extrinsic store, hard bits and flags.
    fn decode_section(&mut self, sec: usize, inner_iters: usize, warm: bool) -> Result<()> {
        let m = self.ctx.code.m();
        let channel = &self.dem_to_dec[sec * m..(sec + 1) * m];
        let state = if warm { self.message_states[sec].as_ref() } else { None };
        let out = self.ctx.code.decode_sum_product(channel, inner_iters, state)?;
        self.dec_extrinsic[sec * m..(sec + 1) * m].copy_from_slice(&out.extrinsic_llrs);
        self.converged[sec] = out.converged;
        self.hard_bits[sec] = out.hard_bits;
        self.message_states[sec] = Some(out.state);
        Ok(())
    }

    /// Push one section's extrinsic LLRs through the interleaver and refresh
    /// the priors of the symbols it occupies. Pair preservation puts both
    /// halves of each touched symbol inside this same section, so every
    /// touched symbol is fully refreshed.
    fn feedback_section(&mut self, sec: usize) {
        let m = self.ctx.code.m();
        let fwd = self.ctx.itl.forward_table();
        let inv = self.ctx.itl.inverse_table();
        for i in sec * m..(sec + 1) * m {
            let out_pos = fwd[i];
            if out_pos % 2 == 1 {
                continue;
            }
            let s = out_pos / 2;
            debug_assert!(!self.known_symbol[s]);
            let re = self.dec_extrinsic[inv[out_pos]];
            let im = self.dec_extrinsic[inv[out_pos + 1]];
            self.priors[s] = prior_stats(ComplexLlr::new(re, im).clipped());
        }
    }

    /// Info-bit error rate per section against the transmitted bits.
    fn section_ber(&self) -> Vec<f64> {
        let m = self.ctx.code.m();
        let Some(tx) = self.ctx.tx_bits else {
            return vec![0.0; self.sections];
        };
        (0..self.sections)
            .map(|sec| {
                if self.section_known[sec] || self.hard_bits[sec].is_empty() {
                    return 0.0;
                }
                let tx_info = self.ctx.code.extract_info(&tx[sec * m..(sec + 1) * m]);
                let rx_info = self.ctx.code.extract_info(&self.hard_bits[sec]);
                let errors = tx_info.iter().zip(&rx_info).filter(|(a, b)| a != b).count();
                errors as f64 / tx_info.len() as f64
            })
            .collect()
    }

    fn into_outcome(self, outer_iterations: usize, trace: Vec<IterationRecord>) -> MuddOutcome {
        MuddOutcome {
            hard_bits: self.hard_bits,
            converged: self.converged,
            outer_iterations,
            trace,
        }
    }
}

/// Slots whose symbols include at least one bit of input section `sec`:
/// the union of the slot ranges of output sections `sec-W+1..=sec`.
/// Section boundaries need not align with slot boundaries.
fn slots_touching_section(itl: &ScInterleaver, num_streams: usize, sec: usize) -> Vec<usize> {
    let m = itl.section_size();
    let l = itl.chain_length();
    let w = itl.coupling_width();
    let mut slots = Vec::new();
    for ww in 0..w {
        let out_sec = (sec + l - ww) % l;
        let sym_start = out_sec * m / 2;
        let sym_end = (out_sec + 1) * m / 2;
        slots.extend(sym_start / num_streams..sym_end.div_ceil(num_streams));
    }
    slots.sort_unstable();
    slots.dedup();
    slots
}
