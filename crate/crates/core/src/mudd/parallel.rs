//! Parallel scheduling: per outer round, every slot is demodulated with
//! current priors, every section decoded fresh, and all extrinsic LLRs fed
//! back collectively.

use super::{FrameContext, IterationRecord, MuddOutcome, MuddState, Schedule};
use super::{STALL_PATIENCE, STALL_TOL};
use crate::Result;

pub(super) fn run(ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
    schedule.validate()?;
    let mut st = MuddState::new(ctx)?;
    let all_slots: Vec<usize> = (0..st.num_slots()).collect();
    let sections = st.sections;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut stalled_rounds = 0usize;

    for it in 1..=schedule.outer_iters {
        iterations = it;
        let delta = st.demodulate_slots(&all_slots)?;
        for sec in 0..sections {
            if st.section_known[sec] {
                continue;
            }
            st.decode_section(sec, schedule.inner_iters, false)?;
        }
        trace.push(IterationRecord {
            outer_iter: it,
            section: sections,
            section_ber: st.section_ber(),
            section_converged: st.converged.clone(),
        });
        if st.converged.iter().all(|&c| c) {
            break;
        }
        if delta < STALL_TOL {
            stalled_rounds += 1;
            if stalled_rounds >= STALL_PATIENCE {
                break;
            }
        } else {
            stalled_rounds = 0;
        }
        for sec in 0..sections {
            if !st.section_known[sec] {
                st.feedback_section(sec);
            }
        }
    }

    Ok(st.into_outcome(iterations, trace))
}
