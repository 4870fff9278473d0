//! Random socket matching with 4-cycle removal by edge swaps.
//!
//! Swaps exchange the check endpoints of two edges, preserving both degree
//! sequences. A proposed swap is committed only when it does not increase
//! the number of violations (parallel edges or repeated check pairs), which
//! lets the repair descend even for short codes where nearly every check
//! pair must be used.

use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;

use super::LdpcCode;
use crate::rng::substream;
use crate::{Error, Result};

const MAX_PASSES: usize = 4000;
const PARTNERS_PER_EDGE: usize = 40;

pub(super) fn build(dv: usize, dc: usize, m: usize, seed: u64) -> Result<LdpcCode> {
    if dv < 2 || dc <= dv {
        return Err(Error::config(format!("need 2 <= dv < dc, got ({dv},{dc})")));
    }
    if m % 2 != 0 {
        return Err(Error::config(format!("code length {m} must be even")));
    }
    if (m * dv) % dc != 0 {
        return Err(Error::config(format!("dc={dc} does not divide m*dv={}", m * dv)));
    }
    if m < 2 * dc {
        return Err(Error::config(format!("code length {m} < 2*dc = {}", 2 * dc)));
    }

    let mut rng = substream(seed, "ldpc-construction", 0);
    let num_edges = m * dv;

    let mut check_of: Vec<u32> = (0..num_edges).map(|e| (e / dc) as u32).collect();
    check_of.shuffle(&mut rng);

    let mut repair = Repair::new(dv, &check_of);
    for _ in 0..MAX_PASSES {
        let bad = repair.violating_edges(&check_of);
        if bad.is_empty() {
            return LdpcCode::from_parts(dv, dc, m, check_of);
        }
        for &e in &bad {
            for _ in 0..PARTNERS_PER_EDGE {
                let other = rng.gen_range(0..num_edges);
                if other / dv == e / dv {
                    continue;
                }
                if repair.try_swap(&mut check_of, e, other) {
                    break;
                }
            }
        }
    }
    Err(Error::Construction(format!(
        "could not remove all 4-cycles of a ({dv},{dc}) code of length {m} within \
         {MAX_PASSES} passes; the graph is too dense for girth 6 or the seed is unlucky"
    )))
}

/// Tracks how many variables contain each unordered check pair.
struct Repair {
    dv: usize,
    pair_count: HashMap<(u32, u32), u32>,
}

impl Repair {
    fn new(dv: usize, check_of: &[u32]) -> Repair {
        let mut r = Repair {
            dv,
            pair_count: HashMap::new(),
        };
        for v in 0..check_of.len() / dv {
            r.add_var(check_of, v);
        }
        r
    }

    fn var_pairs(&self, check_of: &[u32], v: usize) -> Vec<(u32, u32)> {
        let cs = &check_of[v * self.dv..(v + 1) * self.dv];
        let mut out = Vec::with_capacity(self.dv * (self.dv - 1) / 2);
        for i in 0..self.dv {
            for j in i + 1..self.dv {
                out.push((cs[i].min(cs[j]), cs[i].max(cs[j])));
            }
        }
        out
    }

    fn add_var(&mut self, check_of: &[u32], v: usize) {
        for p in self.var_pairs(check_of, v) {
            *self.pair_count.entry(p).or_insert(0) += 1;
        }
    }

    fn remove_var(&mut self, check_of: &[u32], v: usize) {
        for p in self.var_pairs(check_of, v) {
            let c = self.pair_count.get_mut(&p).unwrap();
            *c -= 1;
            if *c == 0 {
                self.pair_count.remove(&p);
            }
        }
    }

    /// Violation weight of variable `v` against the rest of the graph
    /// (assumes `v`'s own pairs are currently removed from the count).
    fn var_cost(&self, check_of: &[u32], v: usize) -> u32 {
        let cs = &check_of[v * self.dv..(v + 1) * self.dv];
        let mut cost = 0;
        for i in 0..self.dv {
            for j in i + 1..self.dv {
                if cs[i] == cs[j] {
                    // parallel edges are worse than shared pairs
                    cost += 10;
                } else {
                    let key = (cs[i].min(cs[j]), cs[i].max(cs[j]));
                    cost += self.pair_count.get(&key).copied().unwrap_or(0);
                }
            }
        }
        cost
    }

    /// Swap the check endpoints of edges `e1`, `e2` iff the local violation
    /// weight does not increase. Returns whether the swap was committed.
    fn try_swap(&mut self, check_of: &mut [u32], e1: usize, e2: usize) -> bool {
        let (v1, v2) = (e1 / self.dv, e2 / self.dv);
        debug_assert_ne!(v1, v2);
        self.remove_var(check_of, v1);
        self.remove_var(check_of, v2);
        // v1 and v2 are both out of the count, so cross-violations between
        // them are scored via their pair overlap
        let overlap_before = self.cross_overlap(check_of, v1, v2);
        let before = self.var_cost(check_of, v1) + self.var_cost(check_of, v2) + overlap_before;

        check_of.swap(e1, e2);
        let overlap_after = self.cross_overlap(check_of, v1, v2);
        let after = self.var_cost(check_of, v1) + self.var_cost(check_of, v2) + overlap_after;

        if after > before {
            check_of.swap(e1, e2);
            self.add_var(check_of, v1);
            self.add_var(check_of, v2);
            false
        } else {
            self.add_var(check_of, v1);
            self.add_var(check_of, v2);
            true
        }
    }

    fn cross_overlap(&self, check_of: &[u32], v1: usize, v2: usize) -> u32 {
        let p1 = self.var_pairs(check_of, v1);
        let p2 = self.var_pairs(check_of, v2);
        p1.iter().filter(|p| p2.contains(p)).count() as u32
    }

    /// One edge per violating pair instance / duplicate, for targeting.
    fn violating_edges(&self, check_of: &[u32]) -> Vec<usize> {
        let dv = self.dv;
        let mut seen: HashMap<(u32, u32), usize> = HashMap::new();
        let mut bad = Vec::new();
        for v in 0..check_of.len() / dv {
            let base = v * dv;
            let cs = &check_of[base..base + dv];
            for i in 0..dv {
                for j in i + 1..dv {
                    if cs[i] == cs[j] {
                        bad.push(base + j);
                        continue;
                    }
                    let key = (cs[i].min(cs[j]), cs[i].max(cs[j]));
                    match seen.get(&key) {
                        Some(&owner) if owner != v => bad.push(base + j),
                        _ => {
                            seen.insert(key, v);
                        }
                    }
                }
            }
        }
        bad
    }
}
