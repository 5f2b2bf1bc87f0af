//! Bounded FIFO between the high-level and low-level controllers, and the
//! bit-exact wire format of its entries.
//!
//! An entry is `s_ev` bits, MSB-first:
//! `[input_1 value | input_1 present | ... | input_n value | input_n present
//!  | timestamp | affected mask]`.
//! Deadline entries carry an all-zero payload (no data available) and the
//! affected mask of the deadline's stream set.

use crate::analysis::AnalyzedSpec;
use crate::bits::{BitSink, BitSource, Mask};
use crate::error::EngineError;
use crate::time::TS_BITS;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Event,
    Deadline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueEntry {
    pub kind: EntryKind,
    /// Raw value bits per input stream; `None` when not present.
    pub payload: Vec<Option<u64>>,
    pub ts: u64,
    /// Outputs to evaluate for this entry.
    pub affected: Mask,
}

impl QueueEntry {
    pub fn deadline(n_inputs: usize, ts: u64, affected: Mask) -> Self {
        QueueEntry {
            kind: EntryKind::Deadline,
            payload: vec![None; n_inputs],
            ts,
            affected,
        }
    }

    pub fn present_count(&self) -> usize {
        self.payload.iter().filter(|p| p.is_some()).count()
    }
}

/// Bit layout derived from the analyzed specification.
#[derive(Debug, Clone)]
pub struct EntryLayout {
    pub input_bits: Vec<u32>,
    pub n_outputs: usize,
    /// Outputs that are periodic, used to reconstruct the entry kind:
    /// deadline entries have an empty payload and a mask of periodic
    /// streams only.
    pub periodic_outputs: Mask,
}

impl EntryLayout {
    pub fn of(spec: &AnalyzedSpec) -> Self {
        let mut periodic = Mask::zeros(spec.num_outputs());
        for (j, p) in spec.pacing.iter().enumerate() {
            if p.is_periodic() {
                periodic.set(j);
            }
        }
        EntryLayout {
            input_bits: (0..spec.num_inputs()).map(|i| spec.input_bits(i)).collect(),
            n_outputs: spec.num_outputs(),
            periodic_outputs: periodic,
        }
    }

    pub fn s_ev(&self) -> usize {
        self.input_bits.iter().map(|b| *b as usize + 1).sum::<usize>()
            + TS_BITS as usize
            + self.n_outputs
    }

    pub fn serialize(&self, e: &QueueEntry) -> Vec<bool> {
        let mut sink = BitSink::new();
        for (i, p) in e.payload.iter().enumerate() {
            match p {
                Some(raw) => {
                    sink.push_uint(*raw, self.input_bits[i] as usize);
                    sink.push_bit(true);
                }
                None => {
                    sink.push_uint(0, self.input_bits[i] as usize);
                    sink.push_bit(false);
                }
            }
        }
        sink.push_uint(e.ts, TS_BITS as usize);
        sink.push_mask(&e.affected);
        debug_assert_eq!(sink.len(), self.s_ev());
        sink.into_bits()
    }

    pub fn deserialize(&self, bits: &[bool]) -> Result<QueueEntry, EngineError> {
        if bits.len() != self.s_ev() {
            return Err(EngineError::MalformedEntry {
                expected: self.s_ev(),
                got: bits.len(),
            });
        }
        let mut src = BitSource::new(bits);
        let mut payload = Vec::with_capacity(self.input_bits.len());
        for width in &self.input_bits {
            let raw = src.read_uint(*width as usize);
            let present = src.read_bit();
            payload.push(present.then_some(raw));
        }
        let ts = src.read_uint(TS_BITS as usize);
        let affected = src.read_mask(self.n_outputs);
        // The wire format carries no kind bit. An entry with a payload is an
        // event; a payload-free entry whose mask selects periodic streams is
        // a deadline; a fully empty entry is a (heartbeat) event.
        let kind = if payload.iter().any(|p| p.is_some()) {
            EntryKind::Event
        } else if !affected.is_zero() && affected.subset_of(&self.periodic_outputs) {
            EntryKind::Deadline
        } else {
            EntryKind::Event
        };
        Ok(QueueEntry {
            kind,
            payload,
            ts,
            affected,
        })
    }
}

/// Consumer side of the queue, so the low-level controller can run against
/// the plain queue or a shared handle in the two-context setup.
pub trait EntrySource {
    fn pop_entry(&mut self) -> Option<QueueEntry>;
    fn has_entries(&self) -> bool;
}

impl EntrySource for BoundedQueue {
    fn pop_entry(&mut self) -> Option<QueueEntry> {
        self.pop()
    }

    fn has_entries(&self) -> bool {
        !self.is_empty()
    }
}

/// FIFO of fixed depth; pushes beyond the depth are dropped and counted,
/// matching a hardware queue that loses data under sustained overpressure.
#[derive(Debug)]
pub struct BoundedQueue {
    entries: VecDeque<QueueEntry>,
    depth: usize,
    pub pushed: u64,
    pub overflows: u64,
    pub high_water: usize,
}

impl BoundedQueue {
    pub fn new(depth: usize) -> Self {
        assert!(depth > 0);
        BoundedQueue {
            entries: VecDeque::with_capacity(depth),
            depth,
            pushed: 0,
            overflows: 0,
            high_water: 0,
        }
    }

    pub fn push(&mut self, e: QueueEntry) -> bool {
        if self.entries.len() >= self.depth {
            self.overflows += 1;
            return false;
        }
        self.entries.push_back(e);
        self.pushed += 1;
        self.high_water = self.high_water.max(self.entries.len());
        true
    }

    pub fn pop(&mut self) -> Option<QueueEntry> {
        self.entries.pop_front()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}
