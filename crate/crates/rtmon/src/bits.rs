//! Bit-level plumbing: dynamically sized bit masks and an MSB-first bit
//! stream used for queue-entry serialization.

/// A fixed-width bit mask (e.g. the affected-output vector of a queue entry).
///
/// Bit 0 is the first stream; widths beyond 64 are supported since a
/// specification may declare hundreds of outputs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    words: Vec<u64>,
}

impl Mask {
    pub fn zeros(width: usize) -> Self {
        Mask {
            width,
            words: vec![0; width.div_ceil(64).max(1)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        debug_assert!(bit < self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        debug_assert!(bit < self.width);
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn or_assign(&mut self, other: &Mask) {
        debug_assert_eq!(self.width, other.width);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn subset_of(&self, other: &Mask) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words.iter().zip(&other.words).all(|(s, o)| s & !o == 0)
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words.iter().zip(&other.words).any(|(s, o)| s & o != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(move |b| self.get(*b))
    }
}

impl std::fmt::Debug for Mask {
    // Render MSB-first so bit strings read like the hardware diagrams.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for bit in (0..self.width).rev() {
            write!(f, "{}", if self.get(bit) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// MSB-first bit writer. `push_uint(v, n)` appends the low `n` bits of `v`,
/// most significant of those first.
#[derive(Default)]
pub struct BitSink {
    bits: Vec<bool>,
}

impl BitSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_bit(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn push_uint(&mut self, v: u64, n: usize) {
        for i in (0..n).rev() {
            self.bits.push(v >> i & 1 == 1);
        }
    }

    /// Appends mask bits from the highest index down, matching `push_uint`.
    pub fn push_mask(&mut self, m: &Mask) {
        for bit in (0..m.width()).rev() {
            self.bits.push(m.get(bit));
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}

/// MSB-first bit reader over a serialized entry.
pub struct BitSource<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitSource<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        BitSource { bits, pos: 0 }
    }

    pub fn read_bit(&mut self) -> bool {
        let b = self.bits[self.pos];
        self.pos += 1;
        b
    }

    pub fn read_uint(&mut self, n: usize) -> u64 {
        let mut v = 0;
        for _ in 0..n {
            v = v << 1 | self.read_bit() as u64;
        }
        v
    }

    pub fn read_mask(&mut self, width: usize) -> Mask {
        let mut m = Mask::zeros(width);
        for bit in (0..width).rev() {
            if self.read_bit() {
                m.set(bit);
            }
        }
        m
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_subset_and_or() {
        let mut a = Mask::zeros(70);
        let mut b = Mask::zeros(70);
        a.set(3);
        a.set(69);
        b.set(3);
        b.set(69);
        b.set(40);
        assert!(a.subset_of(&b));
        assert!(!b.subset_of(&a));
        a.or_assign(&b);
        assert_eq!(a.count_ones(), 3);
        assert!(a.get(40));
    }

    #[test]
    fn uint_round_trip_is_msb_first() {
        let mut s = BitSink::new();
        s.push_uint(0b1011, 4);
        let bits = s.into_bits();
        assert_eq!(bits, vec![true, false, true, true]);
        let mut r = BitSource::new(&bits);
        assert_eq!(r.read_uint(4), 0b1011);
    }

    #[test]
    fn mask_round_trip() {
        let mut m = Mask::zeros(130);
        m.set(0);
        m.set(64);
        m.set(129);
        let mut s = BitSink::new();
        s.push_mask(&m);
        let bits = s.into_bits();
        assert_eq!(bits.len(), 130);
        let mut r = BitSource::new(&bits);
        assert_eq!(r.read_mask(130), m);
    }
}
