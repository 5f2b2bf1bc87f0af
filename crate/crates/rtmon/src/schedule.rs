//! Static deadline schedule for periodic streams.
//!
//! The hyper-period is the least common multiple of all periodic stream
//! periods. Within one hyper-period, every instant at which at least one
//! periodic stream is due becomes a deadline; coincident due-times merge
//! into a single deadline whose stream set covers all streams due there.

use crate::desugar::Program;
use crate::time::{is_integer_multiple, period_of, rat_lcm, Rat};
use crate::typing::Pacing;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deadline {
    /// Offset of this deadline within the hyper-period, `0 < offset <= pi`.
    pub offset: Rat,
    /// Output streams due at this offset.
    pub streams: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub deadlines: Vec<Deadline>,
    /// Hyper-period in seconds; `None` when no stream is periodic.
    pub hyper_period: Option<Rat>,
}

impl Schedule {
    pub fn is_empty(&self) -> bool {
        self.deadlines.is_empty()
    }
}

pub fn compute_schedule(program: &Program, pacing: &[Pacing]) -> Schedule {
    let periodic: Vec<(usize, Rat)> = pacing
        .iter()
        .enumerate()
        .filter_map(|(idx, p)| match p {
            Pacing::Periodic(f) => Some((idx, period_of(*f))),
            Pacing::Event(_) => None,
        })
        .collect();
    let _ = program;
    if periodic.is_empty() {
        return Schedule::default();
    }

    let pi = periodic
        .iter()
        .map(|(_, p)| *p)
        .reduce(rat_lcm)
        .expect("nonempty");

    // All due instants within (0, pi], merged and sorted.
    let mut offsets: Vec<Rat> = Vec::new();
    for (_, period) in &periodic {
        let count = (pi / period).to_integer();
        for k in 1..=count {
            let o = *period * Rat::from_integer(k);
            if !offsets.contains(&o) {
                offsets.push(o);
            }
        }
    }
    offsets.sort();

    let deadlines = offsets
        .into_iter()
        .map(|offset| Deadline {
            streams: periodic
                .iter()
                .filter(|(_, period)| is_integer_multiple(offset, *period))
                .map(|(idx, _)| *idx)
                .collect(),
            offset,
        })
        .collect();

    Schedule {
        deadlines,
        hyper_period: Some(pi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desugar::desugar;
    use crate::parser::parse;
    use crate::typing::check_types_and_pacing;

    fn schedule_of(src: &str) -> (crate::desugar::Program, Schedule) {
        let p = desugar(&parse(src).unwrap()).unwrap();
        let checked = check_types_and_pacing(&p).unwrap();
        let s = compute_schedule(&p, &checked.pacing);
        (p, s)
    }

    #[test]
    fn two_and_five_hertz_yield_six_deadlines_in_one_second() {
        let (_, s) = schedule_of(
            "input a: Int32\n\
             output x @2Hz := a.hold().defaults(to:0)\n\
             output y @5Hz := a.hold().defaults(to:0)",
        );
        assert_eq!(s.hyper_period, Some(Rat::from_integer(1)));
        let offsets: Vec<Rat> = s.deadlines.iter().map(|d| d.offset).collect();
        let expect: Vec<Rat> = [(1, 5), (2, 5), (1, 2), (3, 5), (4, 5), (1, 1)]
            .iter()
            .map(|(n, d)| Rat::new(*n, *d))
            .collect();
        assert_eq!(offsets, expect);
        // 1.0 s is due for both streams; 0.5 s only for the 2 Hz stream.
        assert_eq!(s.deadlines[5].streams, vec![0, 1]);
        assert_eq!(s.deadlines[2].streams, vec![0]);
    }

    #[test]
    fn single_stream_single_deadline() {
        let (_, s) = schedule_of(
            "input a: Int32\noutput x @1Hz := a.hold().defaults(to:0)",
        );
        assert_eq!(s.hyper_period, Some(Rat::from_integer(1)));
        assert_eq!(s.deadlines.len(), 1);
        assert_eq!(s.deadlines[0].offset, Rat::from_integer(1));
    }

    #[test]
    fn no_periodic_streams_no_schedule() {
        let (_, s) = schedule_of("input a: Int32\noutput x := a + 1");
        assert!(s.is_empty());
        assert_eq!(s.hyper_period, None);
    }

    #[test]
    fn offsets_are_multiples_of_some_period_and_bounded_by_pi() {
        // Enumeration-style check across a few frequency mixes.
        for freqs in [vec![1i64, 4], vec![2, 5, 10], vec![1, 2, 4, 8]] {
            let mut src = String::from("input a: Int32\n");
            for (i, f) in freqs.iter().enumerate() {
                src.push_str(&format!("output s{i} @{f}Hz := a.hold().defaults(to:0)\n"));
            }
            let (_, s) = schedule_of(&src);
            let pi = s.hyper_period.unwrap();
            let periods: Vec<Rat> = freqs.iter().map(|f| period_of(Rat::from_integer(*f))).collect();
            for d in &s.deadlines {
                assert!(d.offset > Rat::from_integer(0) && d.offset <= pi);
                assert!(periods.iter().any(|p| is_integer_multiple(d.offset, *p)));
                assert!(!d.streams.is_empty());
            }
            // Every periodic stream is due in the last deadline (offset pi).
            assert_eq!(
                s.deadlines.last().unwrap().streams.len(),
                freqs.len(),
                "pi must be due for all streams"
            );
        }
    }
}
