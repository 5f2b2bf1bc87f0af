//! Bounded-memory sliding-window aggregation.
//!
//! An aggregation usable in constant memory decomposes into four parts:
//! `map` lifting one sample into an intermediate, an associative `combine`,
//! a `neutral` element, and `finalize` producing the stream value. Windows
//! pre-aggregate into `beta` buckets of one owner-period each; evicting
//! shifts the ring and re-initializes the newest bucket with the neutral
//! element, so state size never depends on how many samples arrived.
//!
//! All intermediates are exact: sums wrap in the value type (associative
//! modulo 2^w), averages carry an i128 sum plus count, and integrals carry
//! endpoint samples plus twice the trapezoid area in value*nanoseconds so
//! combination never divides.

use crate::ast::Aggregation;
use crate::time::NS_PER_SEC;
use crate::value::{Value, ValueType};
use std::collections::VecDeque;

/// Partial aggregate of one bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Intermediate {
    Count(u64),
    Sum(Value),
    Min(Option<Value>),
    Max(Option<Value>),
    Avg { sum: i128, count: u64 },
    Integral(Option<Segment>),
}

/// Piecewise-linear segment summary: endpoints plus twice the enclosed
/// trapezoid area in value*nanoseconds (doubled so combination stays
/// integral).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub first_ts: u64,
    pub first_v: i128,
    pub last_ts: u64,
    pub last_v: i128,
    pub area2: i128,
}

/// A concrete list homomorphism instantiated for a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Homomorphism {
    pub agg: Aggregation,
    /// Type of incoming samples.
    pub value_ty: ValueType,
    /// Type of the finalized result.
    pub result_ty: ValueType,
}

impl Homomorphism {
    pub fn neutral(&self) -> Intermediate {
        match self.agg {
            Aggregation::Count => Intermediate::Count(0),
            Aggregation::Sum => Intermediate::Sum(Value::zero(self.value_ty)),
            Aggregation::Min => Intermediate::Min(None),
            Aggregation::Max => Intermediate::Max(None),
            Aggregation::Avg => Intermediate::Avg { sum: 0, count: 0 },
            Aggregation::Integral => Intermediate::Integral(None),
        }
    }

    pub fn map(&self, ts: u64, v: Value) -> Intermediate {
        match self.agg {
            Aggregation::Count => Intermediate::Count(1),
            Aggregation::Sum => Intermediate::Sum(v),
            Aggregation::Min => Intermediate::Min(Some(v)),
            Aggregation::Max => Intermediate::Max(Some(v)),
            Aggregation::Avg => Intermediate::Avg {
                sum: v.as_i128(),
                count: 1,
            },
            Aggregation::Integral => Intermediate::Integral(Some(Segment {
                first_ts: ts,
                first_v: v.as_i128(),
                last_ts: ts,
                last_v: v.as_i128(),
                area2: 0,
            })),
        }
    }

    pub fn combine(&self, a: &Intermediate, b: &Intermediate) -> Intermediate {
        match (a, b) {
            (Intermediate::Count(x), Intermediate::Count(y)) => {
                Intermediate::Count(x.wrapping_add(*y))
            }
            (Intermediate::Sum(x), Intermediate::Sum(y)) => Intermediate::Sum(x.wrapping_add(y)),
            (Intermediate::Min(x), Intermediate::Min(y)) => Intermediate::Min(opt_fold(
                *x,
                *y,
                |a, b| if b.cmp_lt(&a) { b } else { a },
            )),
            (Intermediate::Max(x), Intermediate::Max(y)) => Intermediate::Max(opt_fold(
                *x,
                *y,
                |a, b| if a.cmp_lt(&b) { b } else { a },
            )),
            (
                Intermediate::Avg { sum: s1, count: c1 },
                Intermediate::Avg { sum: s2, count: c2 },
            ) => Intermediate::Avg {
                sum: s1 + s2,
                count: c1 + c2,
            },
            (Intermediate::Integral(x), Intermediate::Integral(y)) => {
                Intermediate::Integral(match (x, y) {
                    (None, s) | (s, None) => *s,
                    (Some(a), Some(b)) => Some(Segment {
                        first_ts: a.first_ts,
                        first_v: a.first_v,
                        last_ts: b.last_ts,
                        last_v: b.last_v,
                        // Bridge the gap between the sub-lists with one
                        // trapezoid; sub-lists arrive in timestamp order.
                        area2: a.area2
                            + b.area2
                            + (a.last_v + b.first_v) * (b.first_ts - a.last_ts) as i128,
                    }),
                })
            }
            _ => unreachable!("mixed intermediates"),
        }
    }

    /// `None` means "no value": empty min/max/avg windows. Sums and counts
    /// of nothing are zero; the integral of nothing is zero.
    pub fn finalize(&self, x: &Intermediate) -> Option<Value> {
        match x {
            Intermediate::Count(c) => Some(Value::int(self.result_ty, *c as i128)),
            Intermediate::Sum(v) => Some(Value::int(self.result_ty, v.as_i128())),
            Intermediate::Min(v) | Intermediate::Max(v) => {
                v.map(|v| Value::int(self.result_ty, v.as_i128()))
            }
            Intermediate::Avg { count: 0, .. } => None,
            Intermediate::Avg { sum, count } => {
                Some(Value::int(self.result_ty, sum / *count as i128))
            }
            Intermediate::Integral(None) => Some(Value::zero(self.result_ty)),
            Intermediate::Integral(Some(seg)) => Some(Value::int(
                self.result_ty,
                seg.area2 / 2 / NS_PER_SEC as i128,
            )),
        }
    }
}

fn opt_fold(
    a: Option<Value>,
    b: Option<Value>,
    f: impl Fn(Value, Value) -> Value,
) -> Option<Value> {
    match (a, b) {
        (None, v) | (v, None) => v,
        (Some(a), Some(b)) => Some(f(a, b)),
    }
}

/// Ring of `beta` pre-aggregation buckets plus the next-eviction register.
#[derive(Debug, Clone)]
pub struct WindowState {
    hom: Homomorphism,
    /// Oldest bucket at the front, newest at the back.
    buckets: VecDeque<Intermediate>,
    /// Timestamp at which the oldest bucket becomes outdated (register T).
    next_evict: u64,
    start: u64,
    bucket_period: u64,
    duration: u64,
}

impl WindowState {
    pub fn new(hom: Homomorphism, beta: u32, bucket_period_ns: u64, start_ts: u64) -> Self {
        assert!(beta > 0 && bucket_period_ns > 0);
        WindowState {
            hom,
            buckets: (0..beta).map(|_| hom.neutral()).collect(),
            next_evict: start_ts + bucket_period_ns,
            start: start_ts,
            bucket_period: bucket_period_ns,
            duration: beta as u64 * bucket_period_ns,
        }
    }

    pub fn hom(&self) -> &Homomorphism {
        &self.hom
    }

    /// Shifts out every bucket that became outdated by `now`; the hardware
    /// performs one shift per cycle, this model loops so long gaps between
    /// entries evict correctly in a single call. Returns the shift count.
    pub fn evict(&mut self, now: u64) -> u32 {
        let mut shifts = 0;
        while now > self.next_evict {
            self.buckets.pop_front();
            self.buckets.push_back(self.hom.neutral());
            self.next_evict += self.bucket_period;
            shifts += 1;
        }
        shifts
    }

    /// Reduces the new sample onto the newest bucket.
    pub fn add(&mut self, ts: u64, v: Value) {
        let mapped = self.hom.map(ts, v);
        let back = self.buckets.back_mut().expect("beta > 0");
        *back = self.hom.combine(back, &mapped);
    }

    /// Balanced-tree reduction of all buckets, finalized. `None` during the
    /// warm-up phase (`now - start < duration`) and for empty min/max/avg.
    pub fn aggregate(&self, now: u64) -> Option<Value> {
        if now.saturating_sub(self.start) < self.duration {
            return None;
        }
        let slices: Vec<&Intermediate> = self.buckets.iter().collect();
        let combined = reduce_tree(&self.hom, &slices);
        self.hom.finalize(&combined)
    }

    /// Raw reduction of the buckets regardless of warm-up, for exact
    /// (rational-level) comparisons in tests.
    pub fn reduce_raw(&self) -> Intermediate {
        let slices: Vec<&Intermediate> = self.buckets.iter().collect();
        reduce_tree(&self.hom, &slices)
    }

    pub fn bucket_states(&self) -> Vec<Intermediate> {
        self.buckets.iter().cloned().collect()
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn duration_ns(&self) -> u64 {
        self.duration
    }

    pub fn bucket_period_ns(&self) -> u64 {
        self.bucket_period
    }

    pub fn beta(&self) -> u32 {
        self.buckets.len() as u32
    }

    pub fn next_evict_ts(&self) -> u64 {
        self.next_evict
    }
}

fn reduce_tree(hom: &Homomorphism, items: &[&Intermediate]) -> Intermediate {
    match items.len() {
        0 => hom.neutral(),
        1 => items[0].clone(),
        n => {
            let (l, r) = items.split_at(n / 2);
            hom.combine(&reduce_tree(hom, l), &reduce_tree(hom, r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::NS_PER_SEC;

    const I32: ValueType = ValueType::Signed(32);
    const SEC: u64 = NS_PER_SEC as u64;

    fn avg_window() -> WindowState {
        let hom = Homomorphism {
            agg: Aggregation::Avg,
            value_ty: I32,
            result_ty: I32,
        };
        // 3 s average at 1 Hz: three one-second buckets anchored at 0.
        WindowState::new(hom, 3, SEC, 0)
    }

    fn v(x: i128) -> Value {
        Value::int(I32, x)
    }

    fn avg(sum: i128, count: u64) -> Intermediate {
        Intermediate::Avg { sum, count }
    }

    #[test]
    fn sliding_average_walkthrough() {
        // Velocity samples scaled by ten to stay integral: 100 at 0.5 s,
        // 101 at 0.6 s, 99 at 2.2 s; evaluations at each full second.
        let e = avg(0, 0);
        let mut w = avg_window();
        assert_eq!(w.bucket_states(), vec![e.clone(), e.clone(), e.clone()]);

        w.evict(SEC / 2);
        w.add(SEC / 2, v(100));
        assert_eq!(w.bucket_states(), vec![e.clone(), e.clone(), avg(100, 1)]);

        w.evict(6 * SEC / 10);
        w.add(6 * SEC / 10, v(101));
        assert_eq!(w.bucket_states(), vec![e.clone(), e.clone(), avg(201, 2)]);

        // 1.0 s: no eviction yet (now == T), still warming up.
        assert_eq!(w.evict(SEC), 0);
        assert_eq!(w.aggregate(SEC), None);
        assert_eq!(w.bucket_states(), vec![e.clone(), e.clone(), avg(201, 2)]);

        // 2.0 s: one shift moves the filled bucket left.
        assert_eq!(w.evict(2 * SEC), 1);
        assert_eq!(w.aggregate(2 * SEC), None);
        assert_eq!(w.bucket_states(), vec![e.clone(), avg(201, 2), e.clone()]);

        // 2.2 s: second shift, then the new sample lands in the last bucket.
        assert_eq!(w.evict(22 * SEC / 10), 1);
        w.add(22 * SEC / 10, v(99));
        assert_eq!(w.bucket_states(), vec![avg(201, 2), e.clone(), avg(99, 1)]);

        // 3.0 s: warm-up over; (201,2) + (0,0) + (99,1) = 300/3 = 100.
        assert_eq!(w.evict(3 * SEC), 0);
        assert_eq!(w.aggregate(3 * SEC), Some(v(100)));
    }

    #[test]
    fn evict_before_deadline_is_a_no_op() {
        let mut w = avg_window();
        w.add(SEC / 2, v(7));
        let before = w.bucket_states();
        assert_eq!(w.evict(SEC / 2 + 1000), 0);
        assert_eq!(w.bucket_states(), before);
    }

    #[test]
    fn long_gap_evicts_multiple_buckets_matching_rebuild_oracle() {
        // Rebuild oracle: place each sample on the bucket grid from scratch.
        let hom = Homomorphism {
            agg: Aggregation::Sum,
            value_ty: I32,
            result_ty: I32,
        };
        let samples: &[(u64, i128)] = &[
            (SEC / 2, 3),
            (SEC + 1, 4),
            (4 * SEC + 1, 5), // gap skips two full buckets
            (4 * SEC + 2, 6),
        ];
        let beta = 3u32;
        let mut w = WindowState::new(hom, beta, SEC, 0);
        for (ts, x) in samples {
            w.evict(*ts);
            w.add(*ts, v(*x));
        }
        let now = 5 * SEC;
        w.evict(now);

        // Oracle: bucket index of ts is ceil(ts / period) clamped to >= 1;
        // the live window covers indices (K - beta, K] for K = now / period.
        let k_of = |ts: u64| -> u64 { ts.div_ceil(SEC).max(1) };
        let k_now = now / SEC;
        let mut expect = 0i128;
        for (ts, x) in samples {
            let k = k_of(*ts);
            if k + beta as u64 > k_now && k <= k_now {
                expect += x;
            }
        }
        assert_eq!(w.aggregate(now), Some(v(expect)));
        assert_eq!(expect, 11); // samples 5 and 6 survive
    }

    #[test]
    fn add_reduces_onto_last_bucket_only() {
        let mut w = avg_window();
        let before = w.bucket_states();
        w.add(100, v(42));
        let after = w.bucket_states();
        assert_eq!(before[0], after[0]);
        assert_eq!(before[1], after[1]);
        assert_eq!(after[2], avg(42, 1));
    }

    #[test]
    fn count_of_empty_window_is_zero_not_none() {
        let hom = Homomorphism {
            agg: Aggregation::Count,
            value_ty: I32,
            result_ty: ValueType::Unsigned(32),
        };
        let w = WindowState::new(hom, 2, SEC, 0);
        assert_eq!(w.aggregate(2 * SEC), Some(Value::int(ValueType::Unsigned(32), 0)));
        // min of an empty window stays undefined
        let hom = Homomorphism {
            agg: Aggregation::Min,
            value_ty: I32,
            result_ty: I32,
        };
        let w = WindowState::new(hom, 2, SEC, 0);
        assert_eq!(w.aggregate(2 * SEC), None);
    }

    #[test]
    fn integral_is_trapezoidal_and_associative_across_splits() {
        let hom = Homomorphism {
            agg: Aggregation::Integral,
            value_ty: I32,
            result_ty: I32,
        };
        // Samples: (0 s, 10), (1 s, 20), (2 s, 10): area = 15 + 15 = 30.
        let samples = [(0u64, 10i128), (SEC, 20), (2 * SEC, 10)];
        let parts: Vec<Intermediate> = samples.iter().map(|(t, x)| hom.map(*t, v(*x))).collect();
        let left = hom.combine(&hom.combine(&parts[0], &parts[1]), &parts[2]);
        let right = hom.combine(&parts[0], &hom.combine(&parts[1], &parts[2]));
        assert_eq!(left, right);
        assert_eq!(hom.finalize(&left), Some(v(30)));
        // A single sample encloses no area.
        assert_eq!(hom.finalize(&parts[0]), Some(v(0)));
    }

    #[test]
    fn random_adds_equal_map_reduce_of_the_list() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for agg in [
            Aggregation::Count,
            Aggregation::Sum,
            Aggregation::Min,
            Aggregation::Max,
            Aggregation::Avg,
            Aggregation::Integral,
        ] {
            let hom = Homomorphism {
                agg,
                value_ty: I32,
                result_ty: if agg == Aggregation::Count {
                    ValueType::Unsigned(32)
                } else {
                    I32
                },
            };
            // All samples inside one bucket: folding adds must equal the
            // map-reduce of the full list.
            let mut w = WindowState::new(hom, 1, 100 * SEC, 0);
            let mut ts = 1u64;
            let mut acc = hom.neutral();
            for _ in 0..50 {
                ts += rng.gen_range(1..1_000_000u64);
                let x = rng.gen_range(-1000..1000i128);
                w.evict(ts);
                w.add(ts, v(x));
                acc = hom.combine(&acc, &hom.map(ts, v(x)));
            }
            assert_eq!(w.reduce_raw(), acc, "{agg:?}");
        }
    }
}
