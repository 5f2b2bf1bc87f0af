//! Input buffer sizing from the backlog recurrence.
//!
//! `backlog(e_1) = 0`, `backlog(e_{i+1}) = backlog(e_i) -
//! min(backlog(e_i), delta_min - 1) + dld(e_{i+1})`, where `dld(e)` counts
//! the periodic deadlines becoming due with event `e` and `delta_min` is the
//! minimum inter-event spacing in hclk cycles. The buffer size is the maximum
//! backlog over the worst-case event sequence (every event releasing
//! `dld_bound` deadlines); sizing diverges when `delta_min - 1 < dld_bound`.

use crate::error::AnalysisError;

/// Backlog sequence for an explicit per-event deadline count sequence.
pub fn backlog_sequence(delta_min: u64, dlds: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(dlds.len() + 1);
    let mut backlog = 0u64;
    out.push(backlog);
    let drain = delta_min.saturating_sub(1);
    for dld in dlds {
        backlog = backlog - backlog.min(drain) + dld;
        out.push(backlog);
    }
    out
}

/// Maximum backlog for the worst-case sequence, floored at one slot for the
/// in-flight event. Iterates the recurrence with `dld = dld_bound` per event
/// until the running maximum reaches a fixed point.
pub fn compute_buffer_size(delta_min: u64, dld_bound: u64) -> Result<u64, AnalysisError> {
    assert!(delta_min >= 1, "delta_min must be at least one cycle");
    if delta_min - 1 < dld_bound {
        return Err(AnalysisError::Unbounded {
            delta_min,
            dld_bound,
        });
    }
    let drain = delta_min - 1;
    let mut backlog = 0u64;
    let mut max = 0u64;
    loop {
        let next = backlog - backlog.min(drain) + dld_bound;
        let next_max = max.max(next);
        if next == backlog && next_max == max {
            break;
        }
        backlog = next;
        max = next_max;
    }
    Ok(max.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backlog_of_explicit_sequence() {
        // delta_min 3, per-event deadline counts (0, 2, 1):
        // backlogs (0, 2, 1) after the initial zero, maximum 2.
        let seq = backlog_sequence(3, &[0, 2, 1]);
        assert_eq!(seq, vec![0, 0, 2, 1]);
        assert_eq!(*seq.iter().max().unwrap(), 2);
    }

    #[test]
    fn no_deadlines_needs_one_slot() {
        assert_eq!(compute_buffer_size(5, 0).unwrap(), 1);
    }

    #[test]
    fn worst_case_bound_equals_dld_bound() {
        assert_eq!(compute_buffer_size(3, 2).unwrap(), 2);
        assert_eq!(compute_buffer_size(10, 4).unwrap(), 4);
        assert_eq!(compute_buffer_size(2, 1).unwrap(), 1);
    }

    #[test]
    fn divergence_detected() {
        assert_eq!(
            compute_buffer_size(2, 2),
            Err(AnalysisError::Unbounded {
                delta_min: 2,
                dld_bound: 2
            })
        );
        assert!(compute_buffer_size(3, 5).is_err());
    }

    #[test]
    fn recurrence_maximum_is_reached_by_simulation() {
        // The closed form (max = dld_bound) agrees with explicitly running
        // the recurrence on long worst-case sequences.
        for delta_min in 2..=10u64 {
            for dld_bound in 0..=delta_min - 1 {
                let worst: Vec<u64> = vec![dld_bound; 64];
                let max = *backlog_sequence(delta_min, &worst).iter().max().unwrap();
                assert_eq!(
                    compute_buffer_size(delta_min, dld_bound).unwrap(),
                    max.max(1)
                );
            }
        }
    }
}
