//! Density-evolution engine: per-section state, scheduling strategies, and
//! threshold search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decoder::decoder_de_with;
use super::mse::{solve_sigma2_tables, VarianceTable, DEFAULT_QUAD_ORDER};
use super::psi::PsiTable;
use super::quad::GaussHermite;
use crate::{Error, Result};

/// Convergence predicate: every section's multiuser efficiency must exceed
/// this to declare the interference removed.
pub const ME_TARGET: f64 = 1.0 - 1e-4;

/// Early exit once nothing moves between outer iterations.
pub const STAGNATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeConfig {
    /// Load K/N in the large-system limit.
    pub alpha: f64,
    pub n0: f64,
    /// Chain length L.
    pub chain_length: usize,
    /// Coupling width W.
    pub coupling_width: usize,
    pub dv: usize,
    pub dc: usize,
    /// Inner (decoder) iterations per outer round.
    pub inner_iters: usize,
    /// Outer iteration cap.
    pub outer_iters: usize,
    /// Scheduling strategy name; see [`super::scheduling`].
    pub scheduling: String,
    pub quad_order: usize,
    pub fp_tol: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        DeConfig {
            alpha: 1.0,
            n0: 10f64.powf(-0.25),
            chain_length: 64,
            coupling_width: 2,
            dv: 3,
            dc: 6,
            inner_iters: 100,
            outer_iters: 2000,
            scheduling: "parallel".into(),
            quad_order: DEFAULT_QUAD_ORDER,
            fp_tol: 1e-12,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 {
            return Err(Error::config("alpha must be positive"));
        }
        if self.n0 <= 0.0 {
            return Err(Error::config("N0 must be positive"));
        }
        if self.coupling_width == 0 || self.coupling_width > self.chain_length {
            return Err(Error::config(format!(
                "need 1 <= W <= L, got W={} L={}",
                self.coupling_width, self.chain_length
            )));
        }
        if self.dv < 2 || self.dc <= self.dv {
            return Err(Error::config("need 2 <= dv < dc"));
        }
        if self.inner_iters == 0 || self.outer_iters == 0 {
            return Err(Error::config("iteration counts must be >= 1"));
        }
        if self.quad_order < 8 {
            return Err(Error::config("quadrature order must be >= 8"));
        }
        if self.fp_tol <= 0.0 {
            return Err(Error::config("fixed-point tolerance must be positive"));
        }
        Ok(())
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.n0.log10()
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.n0 = 10f64.powf(-snr_db / 10.0);
        self
    }

    /// Sections carrying the known sequence: the first `W-1`.
    pub fn num_known(&self) -> usize {
        self.coupling_width - 1
    }
}

/// Per-section state after one outer iteration.
#[derive(Debug, Clone, Serialize)]
pub struct DensityState {
    pub outer_iter: usize,
    pub sigma2: Vec<f64>,
    pub h_dec: Vec<f64>,
    pub me: Vec<f64>,
}

impl DensityState {
    pub fn min_me(&self) -> f64 {
        self.me.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeTrajectory {
    pub converged: bool,
    pub outer_iterations: usize,
    pub states: Vec<DensityState>,
}

impl DeTrajectory {
    pub fn final_state(&self) -> &DensityState {
        self.states.last().expect("trajectory has at least one state")
    }

    /// CSV rows `(outer_iter, section, sigma2, me, h_dec)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outer_iter,section,sigma2,me,h_dec\n");
        for st in &self.states {
            for l in 0..st.sigma2.len() {
                out.push_str(&format!(
                    "{},{},{:.12e},{:.12e},{:.12e}\n",
                    st.outer_iter, l, st.sigma2[l], st.me[l], st.h_dec[l]
                ));
            }
        }
        out
    }
}

/// Shared evaluation context: the psi table and the per-run quadrature.
struct EngineCtx<'a> {
    cfg: &'a DeConfig,
    table: &'static PsiTable,
    quad: GaussHermite,
}

impl<'a> EngineCtx<'a> {
    fn new(cfg: &'a DeConfig) -> Self {
        EngineCtx {
            cfg,
            table: PsiTable::get(),
            quad: GaussHermite::new(cfg.quad_order),
        }
    }

    fn variance_tables(&self, h_dec: &[f64]) -> Vec<VarianceTable> {
        h_dec
            .iter()
            .map(|&h| VarianceTable::from_mean(self.table.inv(h), &self.quad))
            .collect()
    }

    /// Effective noise of output section `l` given all decoder entropies'
    /// variance tables: neighbors are decoders `l..l+W-1` (mod L).
    fn sigma2_for_output(&self, l: usize, tables: &[VarianceTable]) -> Result<f64> {
        let (big_l, w) = (self.cfg.chain_length, self.cfg.coupling_width);
        let neigh: Vec<&VarianceTable> = (0..w).map(|ww| &tables[(l + ww) % big_l]).collect();
        solve_sigma2_tables(self.cfg.alpha, self.cfg.n0, &neigh, self.cfg.fp_tol)
    }

    /// Channel levels seen by decoder `l`: output sections `l-W+1..=l`.
    fn levels_for_decoder(&self, l: usize, sigma2: &[f64]) -> Vec<f64> {
        let (big_l, w) = (self.cfg.chain_length, self.cfg.coupling_width);
        (0..w).map(|ww| sigma2[(l + big_l - ww) % big_l]).collect()
    }

    fn me(&self, sigma2: &[f64]) -> Vec<f64> {
        sigma2.iter().map(|&s| self.cfg.alpha * self.cfg.n0 / s).collect()
    }
}

/// Parallel scheduling: every outer iteration refreshes all sections'
/// effective noise from the previous entropies, then re-runs every decoder.
pub(super) fn run_parallel(cfg: &DeConfig) -> Result<DeTrajectory> {
    cfg.validate()?;
    let ctx = EngineCtx::new(cfg);
    let (big_l, w) = (cfg.chain_length, cfg.coupling_width);
    let known = |l: usize| l < w - 1;

    let mut h_dec: Vec<f64> = (0..big_l).map(|l| if known(l) { 0.0 } else { 1.0 }).collect();
    let mut states = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.outer_iters {
        iterations = it;
        let tables = ctx.variance_tables(&h_dec);
        // long uniform stretches of the chain share identical entropy
        // neighborhoods; solve each distinct neighborhood once
        let keys: Vec<Vec<u64>> = (0..big_l)
            .map(|l| (0..w).map(|ww| h_dec[(l + ww) % big_l].to_bits()).collect())
            .collect();
        let mut unique: Vec<(Vec<u64>, usize)> = Vec::new();
        let mut key_index = vec![0usize; big_l];
        for l in 0..big_l {
            match unique.iter().position(|(k, _)| *k == keys[l]) {
                Some(i) => key_index[l] = i,
                None => {
                    unique.push((keys[l].clone(), l));
                    key_index[l] = unique.len() - 1;
                }
            }
        }
        let solved: Vec<f64> = unique
            .par_iter()
            .map(|&(_, l)| ctx.sigma2_for_output(l, &tables))
            .collect::<Result<_>>()?;
        let sigma2: Vec<f64> = (0..big_l).map(|l| solved[key_index[l]]).collect();
        let h_new: Vec<f64> = (0..big_l)
            .into_par_iter()
            .map(|l| {
                if known(l) {
                    0.0
                } else {
                    let levels = ctx.levels_for_decoder(l, &sigma2);
                    decoder_de_with(&levels, cfg.dv, cfg.dc, cfg.inner_iters, ctx.table)
                }
            })
            .collect();
        let delta = h_new
            .iter()
            .zip(&h_dec)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        h_dec = h_new;
        let me = ctx.me(&sigma2);
        let min_me = me.iter().copied().fold(f64::INFINITY, f64::min);
        states.push(DensityState {
            outer_iter: it,
            sigma2,
            h_dec: h_dec.clone(),
            me,
        });
        if min_me > ME_TARGET {
            converged = true;
            break;
        }
        if delta < STAGNATION_TOL {
            break;
        }
    }

    Ok(DeTrajectory {
        converged,
        outer_iterations: iterations,
        states,
    })
}

/// Sliding-window scheduling: sections are decoded once each, in the order
/// `W-1, L-1, W, L-2, ...`; within a stage only the active decoder's
/// entropy moves, iterating against the effective noise of the sections its
/// codeword touches until it stops changing.
pub(super) fn run_sliding_window(cfg: &DeConfig) -> Result<DeTrajectory> {
    cfg.validate()?;
    let ctx = EngineCtx::new(cfg);
    let (big_l, w) = (cfg.chain_length, cfg.coupling_width);

    let mut h_dec: Vec<f64> = (0..big_l)
        .map(|l| if l < w - 1 { 0.0 } else { 1.0 })
        .collect();
    let mut states = Vec::new();
    let mut counter = 0usize;

    for l in sw_stage_order(big_l, w) {
        let mut prev = h_dec[l];
        for _ in 0..cfg.outer_iters {
            counter += 1;
            // effective noise of the output sections carrying this codeword
            let tables = ctx.variance_tables(&h_dec);
            let levels: Vec<f64> = (0..w)
                .map(|ww| ctx.sigma2_for_output((l + big_l - ww) % big_l, &tables))
                .collect::<Result<_>>()?;
            let h_new = decoder_de_with(&levels, cfg.dv, cfg.dc, cfg.inner_iters, ctx.table);
            h_dec[l] = h_new;
            if (h_new - prev).abs() < STAGNATION_TOL {
                break;
            }
            prev = h_new;
        }
        // stage snapshot with all sections' noise recomputed
        let tables = ctx.variance_tables(&h_dec);
        let sigma2: Vec<f64> = (0..big_l)
            .into_par_iter()
            .map(|sec| ctx.sigma2_for_output(sec, &tables))
            .collect::<Result<_>>()?;
        let me = ctx.me(&sigma2);
        states.push(DensityState {
            outer_iter: counter,
            sigma2,
            h_dec: h_dec.clone(),
            me,
        });
    }

    let converged = states
        .last()
        .map(|s| s.min_me() > ME_TARGET)
        .unwrap_or(false);
    Ok(DeTrajectory {
        converged,
        outer_iterations: counter,
        states,
    })
}

/// The sliding-window visit order over the unknown sections: alternate from
/// both ends of the unknown range toward the middle.
pub fn sw_stage_order(chain_length: usize, coupling_width: usize) -> Vec<usize> {
    let mut lo = coupling_width - 1;
    let mut hi = chain_length - 1;
    let mut order = Vec::with_capacity(chain_length - coupling_width + 1);
    while lo <= hi {
        order.push(lo);
        if hi != lo {
            order.push(hi);
        }
        lo += 1;
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    order
}

/// One probe of the threshold bisection.
#[derive(Debug, Clone, Serialize)]
pub struct BracketProbe {
    pub snr_db: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub threshold_db: f64,
    pub bracket_db: (f64, f64),
    pub tol_db: f64,
    pub probes: Vec<BracketProbe>,
    pub config: DeConfig,
}

/// Bisect on SNR for the minimum value at which the multiuser efficiency of
/// every section converges to one. `cfg.n0` is ignored; the bracket must
/// straddle the transition.
pub fn find_threshold(cfg: &DeConfig, bracket_db: (f64, f64), tol_db: f64) -> Result<ThresholdReport> {
    cfg.validate()?;
    if !(bracket_db.0 < bracket_db.1) || tol_db <= 0.0 {
        return Err(Error::config("need bracket lo < hi and tol > 0"));
    }
    let mut probes = Vec::new();
    let probe = |snr: f64, probes: &mut Vec<BracketProbe>| -> Result<bool> {
        let traj = super::run_de(&cfg.clone().with_snr_db(snr))?;
        probes.push(BracketProbe {
            snr_db: snr,
            converged: traj.converged,
        });
        Ok(traj.converged)
    };

    let (mut lo, mut hi) = bracket_db;
    if probe(lo, &mut probes)? {
        return Err(Error::Numeric(format!(
            "bracket does not straddle the transition: {lo} dB already converges"
        )));
    }
    if !probe(hi, &mut probes)? {
        return Err(Error::Numeric(format!(
            "bracket does not straddle the transition: {hi} dB still stalls"
        )));
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport {
        threshold_db: 0.5 * (lo + hi),
        bracket_db,
        tol_db,
        probes,
        config: cfg.clone(),
    })
}

impl ThresholdReport {
    /// Human-readable report with config echo and bracket history.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("threshold_db = {:.4}\n", self.threshold_db));
        out.push_str(&format!(
            "bracket_db = [{:.4}, {:.4}], tol_db = {}\n",
            self.bracket_db.0, self.bracket_db.1, self.tol_db
        ));
        out.push_str(&format!(
            "config: alpha={} L={} W={} ({},{}) J={} I={} scheduling={} quad={} fp_tol={}\n",
            self.config.alpha,
            self.config.chain_length,
            self.config.coupling_width,
            self.config.dv,
            self.config.dc,
            self.config.inner_iters,
            self.config.outer_iters,
            self.config.scheduling,
            self.config.quad_order,
            self.config.fp_tol,
        ));
        out.push_str("probes:\n");
        for p in &self.probes {
            out.push_str(&format!(
                "  {:.5} dB -> {}\n",
                p.snr_db,
                if p.converged { "converged" } else { "stalled" }
            ));
        }
        out
    }
}
