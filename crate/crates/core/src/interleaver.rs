//! The spatially coupled interleaver and its inverse.
//!
//! A chain of `L` sections of `M` bits each is coupled circularly: bit `m`
//! of input section `l` first passes through an unconstrained random
//! permutation of its section, then the shift rule sends it `w` sections
//! back (`w` determined by its intermediate pair index modulo `W`), and a
//! pair-constrained output permutation places it inside the destination
//! section. The pair constraint keeps both bits of every output QPSK symbol
//! inside one codeword.

use rand::seq::SliceRandom;
use rand::Rng;
use std::fmt::Write as _;

use crate::rng::substream;
use crate::{Error, Result};

/// Forward/inverse permutation tables over `M*L` bit positions.
///
/// Immutable after construction; `forward[i]` is the transmit-side position
/// of input bit `i`, with bit `M*l + m` being position `m` of section `l`.
#[derive(Debug, Clone)]
pub struct ScInterleaver {
    m: usize,
    l: usize,
    w: usize,
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

/// Permutation of `{0..M-1}` mapping every pair `{2i,2i+1}` onto some pair
/// `{2j,2j+1}`, uniform over pair arrangements with randomized within-pair
/// order.
pub fn build_constrained_permutation<R: Rng>(m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::config(format!("constrained permutation needs even M, got {m}")));
    }
    let half = m / 2;
    let mut pair_map: Vec<usize> = (0..half).collect();
    pair_map.shuffle(rng);
    let mut perm = vec![0usize; m];
    for (i, &j) in pair_map.iter().enumerate() {
        let flip = rng.gen_bool(0.5);
        perm[2 * i] = 2 * j + usize::from(flip);
        perm[2 * i + 1] = 2 * j + usize::from(!flip);
    }
    Ok(perm)
}

impl ScInterleaver {
    /// Build the coupled interleaver from `L` inner (unconstrained) and `L`
    /// outer (pair-constrained) section permutations. Deterministic for a
    /// fixed `(M, L, W, seed)`.
    pub fn build(m: usize, l: usize, w: usize, seed: u64) -> Result<Self> {
        if m == 0 || m % 2 != 0 {
            return Err(Error::config(format!("section size M={m} must be even and positive")));
        }
        if l == 0 {
            return Err(Error::config("chain length L must be positive"));
        }
        if w == 0 || w > l {
            return Err(Error::config(format!("coupling width W={w} must satisfy 1 <= W <= L={l}")));
        }
        let mut rng = substream(seed, "sc-interleaver", 0);
        let mut inner: Vec<Vec<usize>> = Vec::with_capacity(l);
        for _ in 0..l {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(&mut rng);
            inner.push(p);
        }
        let mut outer: Vec<Vec<usize>> = Vec::with_capacity(l);
        for _ in 0..l {
            outer.push(build_constrained_permutation(m, &mut rng)?);
        }

        let total = m * l;
        let mut forward = vec![usize::MAX; total];
        for sec in 0..l {
            for pos in 0..m {
                let n = inner[sec][pos];
                let shift = (n / 2) % w;
                let dest = (sec + l - shift) % l;
                forward[sec * m + pos] = dest * m + outer[dest][n];
            }
        }
        let mut inverse = vec![usize::MAX; total];
        for (i, &f) in forward.iter().enumerate() {
            debug_assert_eq!(inverse[f], usize::MAX);
            inverse[f] = i;
        }
        Ok(ScInterleaver {
            m,
            l,
            w,
            forward,
            inverse,
        })
    }

    pub fn section_size(&self) -> usize {
        self.m
    }

    pub fn chain_length(&self) -> usize {
        self.l
    }

    pub fn coupling_width(&self) -> usize {
        self.w
    }

    /// Total interleaver length `M*L`.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward_table(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse
    }

    /// Permute values into transmit order: output position `forward[i]`
    /// receives input value `i`.
    pub fn apply<T: Copy>(&self, values: &[T]) -> Result<Vec<T>> {
        self.permute(values, &self.forward)
    }

    /// Route values back from transmit order to codeword order; also used
    /// to carry per-bit LLRs from the demodulator to the decoders.
    pub fn invert<T: Copy>(&self, values: &[T]) -> Result<Vec<T>> {
        self.permute(values, &self.inverse)
    }

    fn permute<T: Copy>(&self, values: &[T], table: &[usize]) -> Result<Vec<T>> {
        if values.len() != table.len() {
            return Err(Error::dimension(format!(
                "expected {} values, got {}",
                table.len(),
                values.len()
            )));
        }
        let mut out = vec![values[0]; values.len()];
        for (i, &v) in values.iter().enumerate() {
            out[table[i]] = v;
        }
        Ok(out)
    }

    /// Input section of the bit occupying transmit position `j`.
    pub fn origin_section(&self, output_index: usize) -> usize {
        self.inverse[output_index] / self.m
    }

    /// Permutation tables as CSV for audit: `index,forward,input_section`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,forward,input_section\n");
        for (i, &f) in self.forward.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i, f, i / self.m);
        }
        out
    }
}
