//! Systematic encoding via one-time Gaussian elimination of H over GF(2).
//!
//! Construction-time cost only: H is reduced to row echelon form, the pivot
//! columns become parity positions and the free columns carry information
//! bits. Each pivot row is stored as a bitmask over the free columns so a
//! parity bit is one masked popcount at encode time.

/// Precomputed encoder tables.
#[derive(Debug, Clone)]
pub(super) struct Encoder {
    pub rank: usize,
    /// Information-bit positions (free columns of the reduced H), ascending.
    pub free_cols: Vec<usize>,
    /// Parity-bit positions, one per pivot row, ascending by pivot column.
    pivot_cols: Vec<usize>,
    /// Row i: mask over free columns such that
    /// `codeword[pivot_cols[i]] = parity(mask & info)`.
    rows: Vec<Vec<u64>>,
    words_per_info: usize,
}

impl Encoder {
    pub fn derive(m: usize, num_checks: usize, dv: usize, check_of: &[u32]) -> Encoder {
        let words = m.div_ceil(64);
        // dense bit rows of H
        let mut h = vec![0u64; num_checks * words];
        for (e, &c) in check_of.iter().enumerate() {
            let v = e / dv;
            h[c as usize * words + v / 64] ^= 1u64 << (v % 64);
        }

        // reduced row echelon form
        let mut pivot_cols = Vec::new();
        let mut row = 0usize;
        for col in 0..m {
            let (w, b) = (col / 64, col % 64);
            let mut pivot = None;
            for r in row..num_checks {
                if (h[r * words + w] >> b) & 1 == 1 {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != row {
                for k in 0..words {
                    h.swap(row * words + k, p * words + k);
                }
            }
            for r in 0..num_checks {
                if r != row && (h[r * words + w] >> b) & 1 == 1 {
                    for k in 0..words {
                        h[r * words + k] ^= h[row * words + k];
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == num_checks {
                break;
            }
        }
        let rank = row;

        let mut is_pivot = vec![false; m];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let free_cols: Vec<usize> = (0..m).filter(|&c| !is_pivot[c]).collect();
        let mut free_index = vec![usize::MAX; m];
        for (i, &c) in free_cols.iter().enumerate() {
            free_index[c] = i;
        }

        let words_per_info = free_cols.len().div_ceil(64).max(1);
        let mut rows = Vec::with_capacity(rank);
        for r in 0..rank {
            let mut mask = vec![0u64; words_per_info];
            for &f in &free_cols {
                if (h[r * words + f / 64] >> (f % 64)) & 1 == 1 {
                    let i = free_index[f];
                    mask[i / 64] |= 1u64 << (i % 64);
                }
            }
            rows.push(mask);
        }

        Encoder {
            rank,
            free_cols,
            pivot_cols,
            rows,
            words_per_info,
        }
    }

    pub fn encode(&self, m: usize, info: &[u8]) -> Vec<u8> {
        let mut info_words = vec![0u64; self.words_per_info];
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                info_words[i / 64] |= 1u64 << (i % 64);
            }
        }
        let mut cw = vec![0u8; m];
        for (i, &f) in self.free_cols.iter().enumerate() {
            cw[f] = info[i] & 1;
        }
        for (r, mask) in self.rows.iter().enumerate() {
            let mut acc = 0u64;
            for (a, b) in mask.iter().zip(&info_words) {
                acc ^= a & b;
            }
            cw[self.pivot_cols[r]] = (acc.count_ones() & 1) as u8;
        }
        cw
    }
}
