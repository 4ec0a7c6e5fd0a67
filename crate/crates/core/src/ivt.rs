//! Base-p digit codec and Integral Value Transformations.
//!
//! An IVT replaces every base-p digit of its argument by the image of that
//! digit under a fixed local rule, then reads the resulting digit string back
//! as a number. Rules are identified by a canonical index `j`: the image of
//! slot `t` is the `t`-th least significant base-p digit of `j`.
//!
//! ```
//! use ivt::ivt::{Base, Ivt};
//!
//! let base = Base::new(3).unwrap();
//! let f7 = Ivt::new(base, 7).unwrap();
//! // 55 = (2001)_3 -> (0112)_3 = 14
//! assert_eq!(f7.apply(55).unwrap(), 14);
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values handled by every transformation in the crate.
pub type Value = u64;

/// A numeral base `p` in `2..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Base(u32);

impl Base {
    pub const MAX: u32 = 255;

    pub fn new(p: u32) -> Result<Self> {
        if (2..=Self::MAX).contains(&p) {
            Ok(Base(p))
        } else {
            Err(Error::InvalidBase(p))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_value(self) -> Value {
        Value::from(self.0)
    }

    /// `p^e`, or `Overflow`.
    pub fn pow(self, e: u32) -> Result<Value> {
        self.as_value().checked_pow(e).ok_or(Error::Overflow)
    }

    /// Number of base-p digits of `x`; zero has one digit.
    pub fn digit_len(self, mut x: Value) -> u32 {
        let p = self.as_value();
        let mut n = 1;
        while x >= p {
            x /= p;
            n += 1;
        }
        n
    }
}

impl TryFrom<u32> for Base {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Base::new(p)
    }
}

impl From<Base> for u32 {
    fn from(b: Base) -> u32 {
        b.0
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A canonical base-p expansion, most significant digit first.
///
/// Zero is the single digit `[0]`; no other string carries a leading zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DigitString {
    base: Base,
    digits: Vec<u8>,
}

impl DigitString {
    /// Validates `digits` against `base` and strips leading zeros.
    pub fn from_digits(base: Base, digits: &[u8]) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::EmptyDigits);
        }
        for &d in digits {
            if u32::from(d) >= base.get() {
                return Err(Error::DigitOutOfRange {
                    digit: u32::from(d),
                    base: base.get(),
                });
            }
        }
        let first = digits
            .iter()
            .position(|&d| d != 0)
            .unwrap_or(digits.len() - 1);
        Ok(DigitString {
            base,
            digits: digits[first..].to_vec(),
        })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> Result<Value> {
        value_of(self.base, &self.digits)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        if self.base.get() <= 10 {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
        } else {
            let parts: Vec<String> = self.digits.iter().map(u8::to_string).collect();
            write!(f, "{}", parts.join(":"))?;
        }
        write!(f, ")_{}", self.base)
    }
}

/// Most-significant-first base-p expansion of `x`.
pub fn digits_of(x: Value, base: Base) -> DigitString {
    let p = base.as_value();
    let mut rest = x;
    let mut digits = Vec::new();
    loop {
        digits.push((rest % p) as u8);
        rest /= p;
        if rest == 0 {
            break;
        }
    }
    digits.reverse();
    DigitString { base, digits }
}

/// Reads most-significant-first digits as a base-p number. Leading zeros are
/// accepted and ignored.
pub fn value_of(base: Base, digits: &[u8]) -> Result<Value> {
    if digits.is_empty() {
        return Err(Error::EmptyDigits);
    }
    let p = base.as_value();
    digits.iter().try_fold(0 as Value, |acc, &d| {
        if u32::from(d) >= base.get() {
            return Err(Error::DigitOutOfRange {
                digit: u32::from(d),
                base: base.get(),
            });
        }
        acc.checked_mul(p)
            .and_then(|v| v.checked_add(Value::from(d)))
            .ok_or(Error::Overflow)
    })
}

/// Number of local rules `p^(p^k)` for base `p` and arity `k`.
pub fn rule_count(base: Base, arity: u32) -> Result<u64> {
    let too_large = || Error::RuleSpaceTooLarge {
        base: base.get(),
        arity,
    };
    if arity == 0 {
        return Err(Error::InvalidArity(arity));
    }
    let slots = base.pow(arity).map_err(|_| too_large())?;
    let slots = u32::try_from(slots).map_err(|_| too_large())?;
    base.pow(slots).map_err(|_| too_large())
}

/// A rule index `j` together with the rule space it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IvtIndex {
    base: Base,
    arity: u32,
    j: u64,
}

impl IvtIndex {
    pub fn new(base: Base, arity: u32, j: u64) -> Result<Self> {
        let limit = rule_count(base, arity)?;
        if j >= limit {
            return Err(Error::IndexOutOfRange {
                j,
                base: base.get(),
                arity,
                limit,
            });
        }
        Ok(IvtIndex { base, arity, j })
    }

    /// Unary index, the common case.
    pub fn unary(base: Base, j: u64) -> Result<Self> {
        Self::new(base, 1, j)
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn j(&self) -> u64 {
        self.j
    }
}

impl fmt::Display for IvtIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IVT_{}^({},{})", self.j, self.base, self.arity)
    }
}

/// A digit substitution table `{0..p}^k -> {0..p}`.
///
/// For `k > 1` the operands `d_1..d_k` select slot `sum(d_i * p^(i-1))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LocalRule {
    base: Base,
    arity: u32,
    table: Vec<u8>,
}

impl LocalRule {
    pub fn from_index(index: IvtIndex) -> Self {
        let base = index.base;
        let p = base.as_value();
        let slots = base
            .pow(index.arity)
            .expect("slot count fits, checked by IvtIndex::new") as usize;
        let mut rest = index.j;
        let mut table = Vec::with_capacity(slots);
        for _ in 0..slots {
            table.push((rest % p) as u8);
            rest /= p;
        }
        LocalRule {
            base,
            arity: index.arity,
            table,
        }
    }

    pub fn from_table(base: Base, arity: u32, table: Vec<u8>) -> Result<Self> {
        rule_count(base, arity)?;
        let expected = base.pow(arity)? as usize;
        if table.len() != expected {
            return Err(Error::TableLength {
                got: table.len(),
                expected,
            });
        }
        if let Some(&d) = table.iter().find(|&&d| u32::from(d) >= base.get()) {
            return Err(Error::DigitOutOfRange {
                digit: u32::from(d),
                base: base.get(),
            });
        }
        Ok(LocalRule { base, arity, table })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// Canonical index of this table; inverse of [`LocalRule::from_index`].
    pub fn index(&self) -> IvtIndex {
        let p = self.base.as_value();
        let j = self
            .table
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * p + u64::from(d));
        IvtIndex {
            base: self.base,
            arity: self.arity,
            j,
        }
    }

    /// k-ary application. Operands are zero-padded on the left to a common
    /// digit length, then combined position by position.
    pub fn apply_k(&self, xs: &[Value]) -> Result<Value> {
        if xs.len() != self.arity as usize {
            return Err(Error::ArityMismatch {
                expected: self.arity as usize,
                got: xs.len(),
            });
        }
        let p = self.base.as_value();
        let width = xs
            .iter()
            .map(|&x| self.base.digit_len(x))
            .max()
            .unwrap_or(1);
        let mut rest: Vec<Value> = xs.to_vec();
        let mut out: Value = 0;
        let mut place: Option<Value> = Some(1);
        for _ in 0..width {
            let mut slot = 0usize;
            let mut weight = 1usize;
            for r in rest.iter_mut() {
                slot += (*r % p) as usize * weight;
                weight *= p as usize;
                *r /= p;
            }
            let d = Value::from(self.table[slot]);
            if d != 0 {
                let term = place
                    .and_then(|pl| pl.checked_mul(d))
                    .ok_or(Error::Overflow)?;
                out = out.checked_add(term).ok_or(Error::Overflow)?;
            }
            place = place.and_then(|pl| pl.checked_mul(p));
        }
        Ok(out)
    }
}

/// A unary IVT `IVT_j^{p,1}`, the map iterated by every dynamical system in
/// this crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ivt {
    index: IvtIndex,
    table: Vec<u8>,
}

impl Ivt {
    pub fn new(base: Base, j: u64) -> Result<Self> {
        Ok(Self::from_index(IvtIndex::unary(base, j)?))
    }

    pub fn from_index(index: IvtIndex) -> Self {
        debug_assert_eq!(index.arity, 1);
        let rule = LocalRule::from_index(index);
        Ivt {
            index,
            table: rule.table,
        }
    }

    pub fn from_rule(rule: &LocalRule) -> Result<Self> {
        if rule.arity != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: rule.arity as usize,
            });
        }
        Ok(Ivt {
            index: rule.index(),
            table: rule.table.clone(),
        })
    }

    pub fn index(&self) -> IvtIndex {
        self.index
    }

    pub fn j(&self) -> u64 {
        self.index.j
    }

    pub fn base(&self) -> Base {
        self.index.base
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn rule(&self) -> LocalRule {
        LocalRule {
            base: self.index.base,
            arity: 1,
            table: self.table.clone(),
        }
    }

    /// Image of a single digit.
    #[inline]
    pub fn image(&self, digit: u8) -> u8 {
        self.table[digit as usize]
    }

    /// Digits `d` with `f(d) = 0`.
    pub fn zero_preimages(&self) -> Vec<u8> {
        (0..self.table.len() as u8)
            .filter(|&d| self.table[d as usize] == 0)
            .collect()
    }

    /// Position-preserving digit substitution. The result is always below
    /// `p^len(x)`; overflow is only possible for `x` near `Value::MAX`.
    pub fn apply(&self, x: Value) -> Result<Value> {
        let p = self.base().as_value();
        let mut rest = x;
        let mut out: Value = 0;
        let mut place: Option<Value> = Some(1);
        loop {
            let d = Value::from(self.table[(rest % p) as usize]);
            if d != 0 {
                let term = place
                    .and_then(|pl| pl.checked_mul(d))
                    .ok_or(Error::Overflow)?;
                out = out.checked_add(term).ok_or(Error::Overflow)?;
            }
            rest /= p;
            if rest == 0 {
                return Ok(out);
            }
            place = place.and_then(|pl| pl.checked_mul(p));
        }
    }
}

impl fmt::Display for Ivt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.index.fmt(f)
    }
}
