//! (dv,dc)-regular LDPC codes: construction, encoding, sum-product decoding.
//!
//! The Tanner graph is stored edge-indexed: edge `v*dv + s` is the `s`th
//! socket of variable `v`, and `check_of[edge]` names its check node.
//! Codes are immutable after construction and safe to share across workers;
//! decoder state is per call.

mod alist;
mod construction;
mod decode;
mod encode;

pub use decode::{DecodeOutput, MessageState};

use crate::{Error, Result};

/// A bit sequence; entries are 0 or 1.
pub type BitWord = Vec<u8>;

/// A (dv,dc)-regular LDPC code of length `m`.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    m: usize,
    dv: usize,
    dc: usize,
    num_checks: usize,
    /// Check node of edge `v*dv + s`.
    check_of: Vec<u32>,
    /// Edge ids grouped per check: check `c` owns `check_edges[c*dc..(c+1)*dc]`.
    check_edges: Vec<u32>,
    encoder: encode::Encoder,
}

impl LdpcCode {
    /// Build a regular code by random socket matching, repairing parallel
    /// edges and length-4 cycles by edge swaps. Deterministic for a fixed
    /// seed. Errors when the degree arithmetic is inconsistent or when
    /// 4-cycle removal cannot succeed within the retry bound (which is the
    /// case for very short codes, where a 4-cycle-free regular graph may
    /// not exist at all).
    pub fn build_regular_code(dv: usize, dc: usize, m: usize, seed: u64) -> Result<Self> {
        construction::build(dv, dc, m, seed)
    }

    /// Code length in bits.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    /// Rank of the parity-check matrix over GF(2).
    pub fn rank(&self) -> usize {
        self.encoder.rank
    }

    /// Number of information bits per codeword (rank-adjusted).
    pub fn info_len(&self) -> usize {
        self.m - self.encoder.rank
    }

    /// Actual code rate `(m - rank)/m`.
    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.m as f64
    }

    /// True when the parity-check matrix is rank deficient. The rank is
    /// always reported through [`LdpcCode::rank`]; a deficiency changes the
    /// code dimension away from `m*(1 - dv/dc)`.
    pub fn rank_deficient(&self) -> bool {
        self.encoder.rank != self.num_checks
    }

    /// Positions of the information bits inside a codeword.
    pub fn info_positions(&self) -> &[usize] {
        &self.encoder.free_cols
    }

    /// Encode an information word into a codeword satisfying `H c = 0`.
    pub fn encode(&self, info: &[u8]) -> Result<BitWord> {
        if info.len() != self.info_len() {
            return Err(Error::dimension(format!(
                "info length {} != {}",
                info.len(),
                self.info_len()
            )));
        }
        Ok(self.encoder.encode(self.m, info))
    }

    /// Extract the information bits back out of a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> BitWord {
        self.encoder.free_cols.iter().map(|&p| codeword[p] & 1).collect()
    }

    /// Check whether `bits` satisfies every parity check.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.m);
        'checks: for c in 0..self.num_checks {
            let mut acc = 0u8;
            for &e in &self.check_edges[c * self.dc..(c + 1) * self.dc] {
                let v = e as usize / self.dv;
                acc ^= bits[v] & 1;
            }
            if acc != 0 {
                return false;
            }
            continue 'checks;
        }
        true
    }

    /// Checks adjacent to variable `v`.
    pub fn checks_of_var(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.check_of[v * self.dv..(v + 1) * self.dv]
            .iter()
            .map(|&c| c as usize)
    }

    /// Variables adjacent to check `c`.
    pub fn vars_of_check(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.check_edges[c * self.dc..(c + 1) * self.dc]
            .iter()
            .map(move |&e| e as usize / self.dv)
    }

    /// Serialize the parity structure in alist format.
    pub fn to_alist(&self) -> String {
        alist::to_alist(self)
    }

    /// Rebuild a code from alist text (re-deriving the encoder tables).
    pub fn from_alist(text: &str) -> Result<Self> {
        alist::from_alist(text)
    }

    /// Run sum-product decoding for at most `max_iters` iterations with the
    /// exact tanh check-node rule, stopping early once the hard decision
    /// satisfies every check.
    ///
    /// `state` warm-starts the check-to-variable messages saved from a
    /// previous call, as needed by sliding-window MUDD where the decoder
    /// resumes with refreshed channel LLRs.
    pub fn decode_sum_product(
        &self,
        channel_llrs: &[f64],
        max_iters: usize,
        state: Option<&MessageState>,
    ) -> Result<DecodeOutput> {
        decode::sum_product(self, channel_llrs, max_iters, state)
    }

    /// Internal constructor used by the builders; validates degree counts.
    fn from_parts(dv: usize, dc: usize, m: usize, check_of: Vec<u32>) -> Result<Self> {
        let num_checks = m * dv / dc;
        debug_assert_eq!(check_of.len(), m * dv);
        let mut check_edges = vec![0u32; num_checks * dc];
        let mut fill = vec![0usize; num_checks];
        for (e, &c) in check_of.iter().enumerate() {
            let c = c as usize;
            if fill[c] == dc {
                return Err(Error::Construction(format!("check {c} exceeds degree {dc}")));
            }
            check_edges[c * dc + fill[c]] = e as u32;
            fill[c] += 1;
        }
        if fill.iter().any(|&f| f != dc) {
            return Err(Error::Construction("check degree mismatch".into()));
        }
        let encoder = encode::Encoder::derive(m, num_checks, dv, &check_of);
        Ok(LdpcCode {
            m,
            dv,
            dc,
            num_checks,
            check_of,
            check_edges,
            encoder,
        })
    }
}
