//! Runtime values: booleans and fixed-width two's-complement integers.
//!
//! All arithmetic wraps at the declared width, mirroring synthesized-circuit
//! behavior. Division by zero yields the all-zero value of the result type so
//! expression evaluation is total.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Bool,
    Signed(u8),
    Unsigned(u8),
}

impl ValueType {
    /// Bit width of a single value of this type (`s_i` for input streams).
    pub fn bits(&self) -> u32 {
        match self {
            ValueType::Bool => 1,
            ValueType::Signed(w) | ValueType::Unsigned(w) => *w as u32,
        }
    }

    pub fn is_integer(&self) -> bool {
        !matches!(self, ValueType::Bool)
    }

    pub fn name(&self) -> String {
        match self {
            ValueType::Bool => "Bool".into(),
            ValueType::Signed(w) => format!("Int{w}"),
            ValueType::Unsigned(w) => format!("UInt{w}"),
        }
    }

    pub fn from_name(s: &str) -> Option<ValueType> {
        match s {
            "Bool" => Some(ValueType::Bool),
            "Int8" => Some(ValueType::Signed(8)),
            "Int16" => Some(ValueType::Signed(16)),
            "Int32" => Some(ValueType::Signed(32)),
            "Int64" => Some(ValueType::Signed(64)),
            "UInt8" => Some(ValueType::Unsigned(8)),
            "UInt16" => Some(ValueType::Unsigned(16)),
            "UInt32" => Some(ValueType::Unsigned(32)),
            "UInt64" => Some(ValueType::Unsigned(64)),
            _ => None,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A typed value. Integer payloads are kept as raw low bits in `bits`;
/// signed types interpret them by sign extension from the declared width.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Value {
    ty: ValueType,
    bits: u64,
}

fn mask(width: u8) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Value {
    pub fn bool(b: bool) -> Value {
        Value {
            ty: ValueType::Bool,
            bits: b as u64,
        }
    }

    /// Builds an integer value, wrapping the literal into the type's width.
    pub fn int(ty: ValueType, v: i128) -> Value {
        debug_assert!(ty.is_integer());
        let w = ty.bits() as u8;
        Value {
            ty,
            bits: (v as u64) & mask(w),
        }
    }

    pub fn from_raw(ty: ValueType, raw: u64) -> Value {
        let keep = match ty {
            ValueType::Bool => 1,
            _ => mask(ty.bits() as u8),
        };
        Value {
            ty,
            bits: raw & keep,
        }
    }

    pub fn zero(ty: ValueType) -> Value {
        Value { ty, bits: 0 }
    }

    /// Raw wire bits for a literal of any type (booleans from 0/1).
    pub fn int_or_bool(ty: ValueType, v: i128) -> u64 {
        match ty {
            ValueType::Bool => (v != 0) as u64,
            _ => Value::int(ty, v).raw(),
        }
    }

    pub fn ty(&self) -> ValueType {
        self.ty
    }

    /// Raw low bits, the wire representation.
    pub fn raw(&self) -> u64 {
        self.bits
    }

    pub fn as_bool(&self) -> bool {
        debug_assert_eq!(self.ty, ValueType::Bool);
        self.bits != 0
    }

    /// Signed interpretation (sign-extended for signed types).
    pub fn as_i128(&self) -> i128 {
        match self.ty {
            ValueType::Bool => self.bits as i128,
            ValueType::Unsigned(_) => self.bits as i128,
            ValueType::Signed(w) => {
                let shift = 64 - w as u32;
                (((self.bits << shift) as i64) >> shift) as i128
            }
        }
    }

    fn rebuild(&self, v: i128) -> Value {
        Value::int(self.ty, v)
    }

    pub fn wrapping_add(&self, rhs: &Value) -> Value {
        self.rebuild(self.as_i128().wrapping_add(rhs.as_i128()))
    }

    pub fn wrapping_sub(&self, rhs: &Value) -> Value {
        self.rebuild(self.as_i128().wrapping_sub(rhs.as_i128()))
    }

    pub fn wrapping_mul(&self, rhs: &Value) -> Value {
        self.rebuild(self.as_i128().wrapping_mul(rhs.as_i128()))
    }

    /// Hardware-style division: x / 0 = 0, otherwise truncating.
    pub fn wrapping_div(&self, rhs: &Value) -> Value {
        let d = rhs.as_i128();
        if d == 0 {
            Value::zero(self.ty)
        } else {
            self.rebuild(self.as_i128().wrapping_div(d))
        }
    }

    pub fn wrapping_neg(&self) -> Value {
        self.rebuild(self.as_i128().wrapping_neg())
    }

    pub fn wrapping_abs(&self) -> Value {
        let v = self.as_i128();
        self.rebuild(if v < 0 { v.wrapping_neg() } else { v })
    }

    /// Integer square root: floor(sqrt(v)) for v >= 0, 0 for negative inputs.
    pub fn isqrt(&self) -> Value {
        let v = self.as_i128();
        if v <= 0 {
            return Value::zero(self.ty);
        }
        self.rebuild(isqrt_u128(v as u128) as i128)
    }

    pub fn cmp_lt(&self, rhs: &Value) -> bool {
        self.as_i128() < rhs.as_i128()
    }

    pub fn cmp_le(&self, rhs: &Value) -> bool {
        self.as_i128() <= rhs.as_i128()
    }
}

/// floor(sqrt(n)) by Newton iteration on u128.
pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = 1u128 << (n.ilog2() / 2 + 1);
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ty {
            ValueType::Bool => write!(f, "{}", self.as_bool()),
            _ => write!(f, "{}", self.as_i128()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I8: ValueType = ValueType::Signed(8);
    const U8: ValueType = ValueType::Unsigned(8);

    #[test]
    fn wrapping_at_width() {
        let a = Value::int(I8, 127);
        let b = Value::int(I8, 1);
        assert_eq!(a.wrapping_add(&b).as_i128(), -128);
        let c = Value::int(U8, 255);
        assert_eq!(c.wrapping_add(&b.rebuild(1)).as_i128(), -255_i128 + 255); // 0
        assert_eq!(Value::int(U8, 256).as_i128(), 0);
    }

    #[test]
    fn division_by_zero_is_zero() {
        let a = Value::int(I8, 42);
        assert_eq!(a.wrapping_div(&Value::zero(I8)).as_i128(), 0);
        assert_eq!(a.wrapping_div(&Value::int(I8, -7)).as_i128(), -6);
    }

    #[test]
    fn signed_unsigned_comparisons() {
        let a = Value::int(I8, -1);
        let b = Value::int(I8, 1);
        assert!(a.cmp_lt(&b));
        // Same raw bits, unsigned type: 255 > 1.
        let a = Value::from_raw(U8, 0xff);
        let b = Value::from_raw(U8, 1);
        assert!(b.cmp_lt(&a));
    }

    #[test]
    fn isqrt_matches_scan_oracle() {
        // Oracle: largest r with r*r <= n, by scanning.
        for n in 0u128..2000 {
            let mut r = 0u128;
            while (r + 1) * (r + 1) <= n {
                r += 1;
            }
            assert_eq!(isqrt_u128(n), r, "n={n}");
        }
        assert_eq!(isqrt_u128(u64::MAX as u128), (1u128 << 32) - 1);
    }

    #[test]
    fn isqrt_of_negative_is_zero() {
        assert_eq!(Value::int(I8, -4).isqrt().as_i128(), 0);
        assert_eq!(Value::int(ValueType::Signed(32), 1_000_000).isqrt().as_i128(), 1000);
    }
}
