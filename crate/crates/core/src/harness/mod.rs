//! Experiment driver: seeded Monte Carlo BER sweeps, density-evolution
//! commands, statistics and file output.

mod output;
mod stats;

pub use output::{write_ber_outputs, write_threshold_outputs, write_trajectory_outputs};
pub use stats::wilson_half_width;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::de::{self, DeConfig, DeTrajectory, ThresholdReport};
use crate::interleaver::ScInterleaver;
use crate::ldpc::LdpcCode;
use crate::mudd::{self, FrameContext, Schedule};
use crate::phy::{
    draw_channel, estimate_channel_lmmse, qpsk_map_bits, training_frame, transmit_frame,
    ChannelRealization, SymbolFrame,
};
use crate::rng::{label, substream};
use crate::{Error, Result};
use rand::Rng;

/// Stop a BER point once this many frame errors have accumulated (or the
/// trial cap is reached, whichever comes first).
pub const FRAME_ERROR_STOP: u64 = 100;

/// Trials are dispatched in fixed-size batches so early stopping is
/// independent of worker scheduling.
const TRIAL_BATCH: usize = 16;

/// Receiver channel knowledge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CsiMode {
    Perfect,
    /// Training-based LMMSE estimation from a known binary sequence of
    /// `training_bits` bits (sent once per quasi-static realization).
    Estimated { training_bits: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Transmit antennas K.
    pub num_tx: usize,
    /// Receive antennas N.
    pub num_rx: usize,
    /// Code length / section size M.
    pub code_length: usize,
    /// Chain length L.
    pub chain_length: usize,
    /// Coupling width W.
    pub coupling_width: usize,
    pub dv: usize,
    pub dc: usize,
    /// Outer iteration cap I.
    pub outer_iters: usize,
    /// Inner (sum-product) iterations J per outer round.
    pub inner_iters: usize,
    pub snr_db: Vec<f64>,
    pub scheduling: String,
    pub csi: CsiMode,
    pub trials: usize,
    pub seed: u64,
    /// Output directory for CSV/JSON payloads (optional).
    pub output: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_tx: 16,
            num_rx: 16,
            code_length: 2048,
            chain_length: 8,
            coupling_width: 2,
            dv: 3,
            dc: 6,
            outer_iters: 300,
            inner_iters: 100,
            snr_db: vec![3.0],
            scheduling: "parallel".into(),
            csi: CsiMode::Perfect,
            trials: 200,
            seed: 1,
            output: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_tx == 0 || self.num_rx == 0 {
            return Err(Error::config("need K, N >= 1"));
        }
        let total = self.code_length * self.chain_length;
        if total % (2 * self.num_tx) != 0 {
            return Err(Error::config(format!(
                "2K = {} must divide M*L = {total}",
                2 * self.num_tx
            )));
        }
        if self.coupling_width == 0 || self.coupling_width > self.chain_length {
            return Err(Error::config("need 1 <= W <= L"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("need at least one SNR point"));
        }
        if self.trials == 0 {
            return Err(Error::config("need at least one trial"));
        }
        if let CsiMode::Estimated { training_bits } = self.csi {
            if training_bits % (2 * self.num_tx) != 0 {
                return Err(Error::config("training bits must fill whole slots (2K | bits)"));
            }
            if training_bits / (2 * self.num_tx) < self.num_tx {
                return Err(Error::config("training shorter than K slots"));
            }
        }
        Ok(())
    }

    /// Parse from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scheme_label(&self) -> String {
        format!("{}-W{}", self.scheduling, self.coupling_width)
    }
}

/// Aggregated result for one SNR point.
#[derive(Debug, Clone, Serialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub scheme: String,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits_counted: u64,
    pub ber: f64,
    /// 95% Wilson half-width on the BER.
    pub wilson_half_width: f64,
    pub frame_errors: u64,
    /// Wall time never enters payload files (reproducibility).
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Immutable per-run assets shared across trials.
pub struct RunAssets {
    pub code: LdpcCode,
    pub itl: ScInterleaver,
    /// Input-ordering known-bit map (`Some` on the known sections).
    pub known_bits: Vec<Option<u8>>,
}

pub fn build_assets(cfg: &SimConfig) -> Result<RunAssets> {
    cfg.validate()?;
    let code = LdpcCode::build_regular_code(cfg.dv, cfg.dc, cfg.code_length, cfg.seed)?;
    let itl = ScInterleaver::build(
        cfg.code_length,
        cfg.chain_length,
        cfg.coupling_width,
        cfg.seed,
    )?;
    let mut known_rng = substream(cfg.seed, label::KNOWN, 0);
    let m = cfg.code_length;
    let mut known_bits = vec![None; m * cfg.chain_length];
    for sec in 0..cfg.coupling_width - 1 {
        for pos in 0..m {
            known_bits[sec * m + pos] = Some(known_rng.gen_range(0..2u8));
        }
    }
    Ok(RunAssets {
        code,
        itl,
        known_bits,
    })
}

/// Outcome of one Monte Carlo frame.
#[derive(Debug, Clone, Copy)]
pub struct TrialResult {
    pub bit_errors: u64,
    pub bits_counted: u64,
    pub frame_error: bool,
    pub converged: bool,
    pub outer_iterations: usize,
}

/// Run one seeded frame end to end: encode, interleave, transmit, estimate
/// (optionally), run MUDD, and count information-bit errors over the
/// unknown sections.
pub fn run_trial(cfg: &SimConfig, assets: &RunAssets, snr_db: f64, trial: u64) -> Result<TrialResult> {
    let n0 = 10f64.powf(-snr_db / 10.0);
    let mut channel_rng = substream(cfg.seed, label::CHANNEL, trial);
    let mut noise_rng = substream(cfg.seed, label::NOISE, trial);
    let mut data_rng = substream(cfg.seed, label::DATA, trial);

    let ch = draw_channel(cfg.num_tx, cfg.num_rx, n0, &mut channel_rng);

    // receiver-side channel: exact, or estimated from a training block
    // transmitted ahead of the data frame. Training noise comes from its
    // own substream so the data-frame noise is identical across CSI modes
    // (paired comparisons).
    let rx_ch = match cfg.csi {
        CsiMode::Perfect => ch.clone(),
        CsiMode::Estimated { training_bits } => {
            let mut training_rng = substream(cfg.seed, label::TRAINING, trial);
            let mut training_noise_rng = substream(cfg.seed, label::TRAINING_NOISE, trial);
            let p = training_bits / (2 * cfg.num_tx);
            let train = training_frame(cfg.num_tx, p, &mut training_rng);
            let y_train = transmit_frame(&ch, &train, &mut training_noise_rng)?;
            let est = estimate_channel_lmmse(&y_train, &train.x, n0)?;
            ChannelRealization { h: est.h_hat, n0 }
        }
    };

    // assemble input bits: known sections carry the fixed sequence,
    // the rest carry fresh codewords
    let m = cfg.code_length;
    let total = m * cfg.chain_length;
    let mut input_bits = vec![0u8; total];
    let mut tx_info: Vec<Option<Vec<u8>>> = vec![None; cfg.chain_length];
    for sec in 0..cfg.chain_length {
        if assets.known_bits[sec * m].is_some() {
            for pos in 0..m {
                input_bits[sec * m + pos] = assets.known_bits[sec * m + pos].unwrap();
            }
        } else {
            let info: Vec<u8> = (0..assets.code.info_len())
                .map(|_| data_rng.gen_range(0..2u8))
                .collect();
            let cw = assets.code.encode(&info)?;
            input_bits[sec * m..(sec + 1) * m].copy_from_slice(&cw);
            tx_info[sec] = Some(info);
        }
    }

    let out_bits = assets.itl.apply(&input_bits)?;
    let symbols = qpsk_map_bits(&out_bits)?;
    let slots = symbols.len() / cfg.num_tx;
    let x = DMatrix::<Complex64>::from_fn(cfg.num_tx, slots, |k, t| symbols[t * cfg.num_tx + k]);
    let y = transmit_frame(&ch, &SymbolFrame { x }, &mut noise_rng)?;

    let schedule = Schedule {
        kind: cfg.scheduling.clone(),
        outer_iters: cfg.outer_iters,
        inner_iters: cfg.inner_iters,
    };
    let ctx = FrameContext {
        code: &assets.code,
        itl: &assets.itl,
        ch: &rx_ch,
        y: &y,
        num_streams: cfg.num_tx,
        known_bits: &assets.known_bits,
        tx_bits: None,
    };
    let outcome = mudd::run(&ctx, &schedule)?;

    let mut bit_errors = 0u64;
    let mut bits_counted = 0u64;
    for sec in 0..cfg.chain_length {
        let Some(info) = &tx_info[sec] else { continue };
        let rx_info = assets.code.extract_info(&outcome.hard_bits[sec]);
        bit_errors += info.iter().zip(&rx_info).filter(|(a, b)| a != b).count() as u64;
        bits_counted += info.len() as u64;
    }
    Ok(TrialResult {
        bit_errors,
        bits_counted,
        frame_error: bit_errors > 0,
        converged: outcome.all_converged(),
        outer_iterations: outcome.outer_iterations,
    })
}

/// Monte Carlo sweep over the configured SNR points. Trials run across the
/// worker pool in deterministic batches with per-trial substreams, so the
/// aggregate is independent of scheduling; a point stops early after
/// [`FRAME_ERROR_STOP`] frame errors.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let assets = build_assets(cfg)?;
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for &snr in &cfg.snr_db {
        records.push(run_ber_point(cfg, &assets, snr)?);
    }
    Ok(records)
}

/// One SNR point of the sweep.
pub fn run_ber_point(cfg: &SimConfig, assets: &RunAssets, snr_db: f64) -> Result<BerRecord> {
    run_ber_point_budgeted(cfg, assets, snr_db, None)
}

/// One SNR point with an optional error budget: once `abort_bit_errors` is
/// exceeded, the final BER over the full trial count is already guaranteed
/// above the corresponding target, so the point stops early. The partial
/// record still reports the exact errors and bits it counted.
pub fn run_ber_point_budgeted(
    cfg: &SimConfig,
    assets: &RunAssets,
    snr_db: f64,
    abort_bit_errors: Option<u64>,
) -> Result<BerRecord> {
    let start = std::time::Instant::now();
    let mut bit_errors = 0u64;
    let mut bits_counted = 0u64;
    let mut frame_errors = 0u64;
    let mut trials_done = 0u64;

    let mut next = 0usize;
    while next < cfg.trials {
        let batch_end = (next + TRIAL_BATCH).min(cfg.trials);
        let results: Vec<TrialResult> = (next..batch_end)
            .into_par_iter()
            .map(|t| run_trial(cfg, assets, snr_db, t as u64))
            .collect::<Result<_>>()?;
        for r in &results {
            bit_errors += r.bit_errors;
            bits_counted += r.bits_counted;
            frame_errors += u64::from(r.frame_error);
            trials_done += 1;
        }
        next = batch_end;
        if frame_errors >= FRAME_ERROR_STOP {
            break;
        }
        if abort_bit_errors.is_some_and(|cap| bit_errors > cap) {
            break;
        }
    }

    let ber = if bits_counted > 0 {
        bit_errors as f64 / bits_counted as f64
    } else {
        0.0
    };
    Ok(BerRecord {
        snr_db,
        scheme: cfg.scheme_label(),
        trials: trials_done,
        bit_errors,
        bits_counted,
        ber,
        wilson_half_width: wilson_half_width(bit_errors, bits_counted),
        frame_errors,
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

/// Lowest SNR (on a fine grid) at which the configured scheme reaches
/// `target_ber`, scanning downward from `hi_db` so the cheap convergent
/// points come first. Returns `None` when even `hi_db` misses the target.
pub fn find_ber_crossing(
    cfg: &SimConfig,
    lo_db: f64,
    hi_db: f64,
    coarse_step: f64,
    fine_step: f64,
    target_ber: f64,
) -> Result<Option<f64>> {
    let assets = build_assets(cfg)?;
    // once a point has collected more errors than the target allows over
    // the full trial budget, its verdict is settled
    let bits_per_frame = (cfg.chain_length - cfg.coupling_width + 1) as u64
        * assets.code.info_len() as u64;
    let abort = Some((target_ber * (cfg.trials as u64 * bits_per_frame) as f64).floor() as u64);
    let passes = |rec: &BerRecord| rec.ber <= target_ber;

    let mut last_pass: Option<f64> = None;
    let mut first_fail: Option<f64> = None;
    let mut snr = hi_db;
    while snr >= lo_db - 1e-9 {
        let rec = run_ber_point_budgeted(cfg, &assets, snr, abort)?;
        if passes(&rec) {
            last_pass = Some(snr);
        } else {
            first_fail = Some(snr);
            break;
        }
        snr -= coarse_step;
    }
    let Some(mut best) = last_pass else {
        return Ok(None);
    };
    if first_fail.is_some() && fine_step < coarse_step {
        let floor = best - coarse_step;
        let mut probe = best - fine_step;
        while probe > floor + 1e-9 {
            let rec = run_ber_point_budgeted(cfg, &assets, probe, abort)?;
            if passes(&rec) {
                best = probe;
                probe -= fine_step;
            } else {
                break;
            }
        }
    }
    Ok(Some(best))
}

/// Dispatch the density-evolution trajectory command.
pub fn de_trajectory(cfg: &DeConfig) -> Result<DeTrajectory> {
    de::run_de(cfg)
}

/// Dispatch the density-evolution threshold command.
pub fn de_threshold(cfg: &DeConfig, bracket_db: (f64, f64), tol_db: f64) -> Result<ThresholdReport> {
    de::find_threshold(cfg, bracket_db, tol_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> SimConfig {
        SimConfig {
            num_tx: 4,
            num_rx: 4,
            code_length: 512,
            chain_length: 4,
            coupling_width: 1,
            outer_iters: 10,
            inner_iters: 30,
            snr_db: vec![15.0],
            trials: 4,
            seed: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn high_snr_point_is_error_free() {
        let cfg = tiny_cfg();
        let records = run_ber_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].bit_errors, 0);
        assert!(records[0].bits_counted > 0);
        assert_eq!(records[0].ber, 0.0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SimConfig {
            snr_db: vec![4.0],
            trials: 2,
            ..tiny_cfg()
        };
        let a = run_ber_sweep(&cfg).unwrap();
        let b = run_ber_sweep(&cfg).unwrap();
        assert_eq!(a[0].bit_errors, b[0].bit_errors);
        assert_eq!(a[0].frame_errors, b[0].frame_errors);
        assert_eq!(a[0].trials, b[0].trials);
    }

    #[test]
    fn config_validation_catches_bad_divisibility() {
        let cfg = SimConfig {
            num_tx: 5,
            num_rx: 5,
            code_length: 512,
            chain_length: 3,
            ..SimConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            num_tx = 8
            num_rx = 8
            code_length = 1024
            chain_length = 8
            coupling_width = 2
            dv = 3
            dc = 6
            outer_iters = 300
            inner_iters = 100
            snr_db = [3.0, 3.5]
            scheduling = "parallel"
            trials = 50
            seed = 7

            [csi]
            mode = "estimated"
            training_bits = 16384
        "#;
        let cfg = SimConfig::from_toml(text).unwrap();
        assert_eq!(cfg.num_tx, 8);
        assert_eq!(
            cfg.csi,
            CsiMode::Estimated {
                training_bits: 16384
            }
        );
        let back = toml::to_string(&cfg).unwrap();
        let again = SimConfig::from_toml(&back).unwrap();
        assert_eq!(again.snr_db, cfg.snr_db);
    }
}
