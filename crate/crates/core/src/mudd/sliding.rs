//! Sliding-window scheduling: sections are decoded once each in the order
//! `W-1, L-1, W, L-2, ...`. Within a stage, only LLRs on edges touching the
//! active section's coded bits move: the demodulator revisits just the
//! slots carrying those bits, and the active decoder resumes from its saved
//! message state. All other LLRs stay at their current values.

use super::{slots_touching_section, FrameContext, IterationRecord, MuddOutcome, MuddState, Schedule};
use super::{STALL_PATIENCE, STALL_TOL};
use crate::de::sw_stage_order;
use crate::Result;

pub(super) fn run(ctx: &FrameContext, schedule: &Schedule) -> Result<MuddOutcome> {
    schedule.validate()?;
    let mut st = MuddState::new(ctx)?;
    let l = st.sections;
    let w = ctx.itl.coupling_width();
    let mut trace = Vec::new();
    let mut counter = 0usize;

    let stage_order: Vec<usize> = sw_stage_order(l, w)
        .into_iter()
        .filter(|&sec| !st.section_known[sec])
        .collect();

    for &sec in &stage_order {
        let slots = slots_touching_section(ctx.itl, ctx.num_streams, sec);
        let mut stalled_rounds = 0usize;
        for _ in 1..=schedule.outer_iters {
            counter += 1;
            let delta = st.demodulate_slots(&slots)?;
            st.decode_section(sec, schedule.inner_iters, true)?;
            if st.converged[sec] {
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
            st.feedback_section(sec);
        }
        // stage output: freeze decisions, feed final extrinsic forward
        st.feedback_section(sec);
        trace.push(IterationRecord {
            outer_iter: counter,
            section: sec,
            section_ber: st.section_ber(),
            section_converged: st.converged.clone(),
        });
    }

    Ok(st.into_outcome(counter, trace))
}
