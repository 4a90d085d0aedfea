//! Eventually periodic one-way infinite binary tapes.
//!
//! A value of [`EPTape`] denotes the infinite word `prefix · period^ω` over
//! `{0,1}`, indexed from cell 0. Every value is kept in canonical form: the
//! period is primitive (not a power of a shorter word) and the prefix is the
//! shortest possible. Canonical forms are unique, so two tapes denote the
//! same infinite word if and only if they compare equal, and `Hash` agrees.
//!
//! The blank tape is `ε · 0^ω`.

use std::fmt;
use std::str::FromStr;

/// Length of the primitive root of `w`: the smallest `d` dividing `w.len()`
/// such that `w` is `w[..d]` repeated.
pub(crate) fn primitive_root_len<T: Eq>(w: &[T]) -> usize {
    for d in 1..w.len() {
        if w.len() % d == 0 && w.chunks(d).all(|chunk| chunk == &w[..d]) {
            return d;
        }
    }
    w.len()
}

/// Reduce `(prefix, period)` to canonical form in place: primitive period,
/// then shortest prefix. Dropping a prefix cell that equals the last period
/// cell rotates the period right by one, which preserves primitivity.
pub(crate) fn canonicalize<T: Eq + Clone>(prefix: &mut Vec<T>, period: &mut Vec<T>) {
    let root = primitive_root_len(period);
    period.truncate(root);
    while prefix.last().is_some() && prefix.last() == period.last() {
        prefix.pop();
        let wrapped = period.pop().expect("period is never empty");
        period.insert(0, wrapped);
    }
}

/// An eventually periodic infinite binary word, always in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EPTape {
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl EPTape {
    /// Tape denoting `prefix · period^ω`. Canonicalizes.
    ///
    /// Panics if `period` is empty or any symbol is not a bit.
    pub fn new(prefix: Vec<u8>, period: Vec<u8>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        assert!(
            prefix.iter().chain(period.iter()).all(|&b| b <= 1),
            "tape symbols must be bits"
        );
        let mut tape = EPTape { prefix, period };
        canonicalize(&mut tape.prefix, &mut tape.period);
        tape
    }

    /// The all-zero tape `ε · 0^ω`.
    pub fn blank() -> Self {
        EPTape { prefix: Vec::new(), period: vec![0] }
    }

    /// Tape holding `bits` followed by zeros.
    pub fn from_finite(bits: Vec<u8>) -> Self {
        EPTape::new(bits, vec![0])
    }

    /// The unary code of `n`: `1^n 0^ω`.
    pub fn encode_unary(n: u64) -> Self {
        EPTape::new(vec![1; n as usize], vec![0])
    }

    /// Reads the unary code back: `Some(k)` iff the tape is exactly
    /// `1^k 0^ω`. Every other tape, including ones with infinitely many
    /// ones, decodes to `None`.
    pub fn decode_unary(&self) -> Option<u64> {
        if self.period != [0] {
            return None;
        }
        if self.prefix.iter().any(|&b| b != 1) {
            return None;
        }
        Some(self.prefix.len() as u64)
    }

    pub fn is_blank(&self) -> bool {
        self.prefix.is_empty() && self.period == [0]
    }

    /// Cell `i` of the infinite word.
    pub fn get(&self, i: usize) -> u8 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// Writes bit `b` into cell `i`, re-canonicalizing.
    pub fn set(&mut self, i: usize, b: u8) {
        assert!(b <= 1, "tape symbols must be bits");
        if self.get(i) == b {
            return;
        }
        if i >= self.prefix.len() {
            // Materialize cells prefix.len()..=i from the period, then keep
            // the continuation aligned by rotating the period.
            let skipped = i - self.prefix.len();
            let plen = self.period.len();
            for j in 0..=skipped {
                self.prefix.push(self.period[j % plen]);
            }
            self.period.rotate_left((skipped + 1) % plen);
        }
        self.prefix[i] = b;
        canonicalize(&mut self.prefix, &mut self.period);
    }

    /// The tape with the first `k` cells dropped: cell `i` of the result is
    /// cell `i + k` of `self`.
    pub fn suffix(&self, k: usize) -> EPTape {
        if k <= self.prefix.len() {
            EPTape::new(self.prefix[k..].to_vec(), self.period.clone())
        } else {
            let mut period = self.period.clone();
            period.rotate_left((k - self.prefix.len()) % self.period.len());
            EPTape::new(Vec::new(), period)
        }
    }

    /// Cellwise combination of two tapes.
    pub fn zip_with(&self, other: &EPTape, f: impl Fn(u8, u8) -> u8) -> EPTape {
        let np = self.prefix.len().max(other.prefix.len());
        let nq = lcm(self.period.len(), other.period.len());
        let prefix = (0..np).map(|i| f(self.get(i), other.get(i))).collect();
        let period = (np..np + nq).map(|i| f(self.get(i), other.get(i))).collect();
        EPTape::new(prefix, period)
    }

    /// Cellwise maximum (union of ones).
    pub fn cellwise_or(&self, other: &EPTape) -> EPTape {
        self.zip_with(other, |a, b| a | b)
    }

    /// Cellwise minimum (intersection of ones).
    pub fn cellwise_and(&self, other: &EPTape) -> EPTape {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// Number of cells before the purely periodic part begins.
    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for EPTape {
    /// Canonical text form `prefix(period)^w`, e.g. `111(0)^w` for the unary
    /// code of 3 and `(0)^w` for the blank tape.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^w", bits_to_string(&self.prefix), bits_to_string(&self.period))
    }
}

impl fmt::Debug for EPTape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EPTape[{self}]")
    }
}

/// Error from parsing an [`EPTape`] text form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad tape text at byte {at}: {reason}")]
pub struct TapeParseError {
    pub at: usize,
    pub reason: String,
}

impl FromStr for EPTape {
    type Err = TapeParseError;

    /// Accepts `prefix(period)^w` or a bare bit string (zero continuation
    /// implied). Either part may be empty; a bare empty string is the blank
    /// tape. The result is canonicalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |at: usize, reason: &str| TapeParseError { at, reason: reason.to_string() };
        let parse_bits = |part: &str, base: usize| -> Result<Vec<u8>, TapeParseError> {
            part.bytes()
                .enumerate()
                .map(|(i, c)| match c {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(err(base + i, "expected '0' or '1'")),
                })
                .collect()
        };
        match s.find('(') {
            None => Ok(EPTape::new(parse_bits(s, 0)?, vec![0])),
            Some(open) => {
                let rest = &s[open + 1..];
                let close = rest
                    .find(')')
                    .ok_or_else(|| err(s.len(), "missing ')' in periodic part"))?;
                let tail = &rest[close + 1..];
                if tail != "^w" {
                    return Err(err(open + 1 + close + 1, "expected '^w' after ')'"));
                }
                let period = parse_bits(&rest[..close], open + 1)?;
                if period.is_empty() {
                    return Err(err(open + 1, "period must be nonempty"));
                }
                Ok(EPTape::new(parse_bits(&s[..open], 0)?, period))
            }
        }
    }
}
