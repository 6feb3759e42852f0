//! Symbol sequences over `{−, +}`.
//!
//! Text form: one character per symbol, `-` or `+` (the Unicode minus `−` is
//! accepted on input). Input may use run-length sugar: a count after a symbol
//! or after a parenthesized group repeats it, optionally written with a caret,
//! so `-3+`, `-^3+` and `(-)3+` all read as `---+`. Whitespace is rejected.
//! Output is always fully expanded.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Minus,
    Plus,
}

impl Symbol {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Symbol::Minus => -1.0,
            Symbol::Plus => 1.0,
        }
    }

    pub fn from_sign(x: f64) -> Option<Symbol> {
        if x > 0.0 {
            Some(Symbol::Plus)
        } else if x < 0.0 {
            Some(Symbol::Minus)
        } else {
            None
        }
    }

    pub fn flipped(self) -> Symbol {
        match self {
            Symbol::Minus => Symbol::Plus,
            Symbol::Plus => Symbol::Minus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Minus => '-',
            Symbol::Plus => '+',
        }
    }
}

/// A finite word interpreted periodically. The period is the word length; it
/// is never reduced to a primitive root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSequence(Vec<Symbol>);

impl SymbolSequence {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn period(&self) -> usize {
        self.0.len()
    }

    /// Symbol at time `t`, indices taken modulo the period.
    #[inline]
    pub fn at(&self, t: isize) -> Symbol {
        let n = self.0.len() as isize;
        self.0[t.rem_euclid(n) as usize]
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.0
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|s| s.as_char()).collect()
    }

    /// Rotate left by `k`, so the result starts at the old index `k`.
    pub fn rotated(&self, k: usize) -> SymbolSequence {
        let n = self.0.len();
        Self((0..n).map(|i| self.0[(i + k) % n]).collect())
    }

    /// Lexicographically least rotation with `− < +`.
    pub fn canonical_rotation(&self) -> SymbolSequence {
        (0..self.period())
            .map(|k| self.rotated(k))
            .min_by(|a, b| a.0.cmp(&b.0))
            .unwrap_or_else(|| self.clone())
    }

    /// True when the word is not a repetition of a shorter word.
    pub fn is_primitive(&self) -> bool {
        let n = self.period();
        (1..n).filter(|d| n.is_multiple_of(*d)).all(|d| (0..n).any(|i| self.0[i] != self.0[i % d]))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser { bytes: text.as_bytes(), pos: 0 };
        let symbols = parser.sequence(0)?;
        if parser.pos != parser.bytes.len() {
            return Err(Error::Parse { pos: parser.pos, reason: "unmatched ')'" });
        }
        Self::new(symbols).map_err(|_| Error::Parse { pos: 0, reason: "empty sequence" })
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SymbolSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

const MAX_EXPANDED_LEN: usize = 1 << 24;

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn sequence(&mut self, depth: usize) -> Result<Vec<Symbol>> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let item = match self.bytes[self.pos] {
                b'-' => {
                    self.pos += 1;
                    alloc::vec![Symbol::Minus]
                }
                b'+' => {
                    self.pos += 1;
                    alloc::vec![Symbol::Plus]
                }
                // U+2212 MINUS SIGN
                0xE2 if self.bytes[self.pos..].starts_with("\u{2212}".as_bytes()) => {
                    self.pos += 3;
                    alloc::vec![Symbol::Minus]
                }
                b'(' => {
                    let open = self.pos;
                    self.pos += 1;
                    let inner = self.sequence(depth + 1)?;
                    if self.bytes.get(self.pos) != Some(&b')') {
                        return Err(Error::Parse { pos: open, reason: "unclosed '('" });
                    }
                    self.pos += 1;
                    if inner.is_empty() {
                        return Err(Error::Parse { pos: open, reason: "empty group" });
                    }
                    inner
                }
                b')' if depth > 0 => return Ok(out),
                b')' => return Err(Error::Parse { pos: self.pos, reason: "unmatched ')'" }),
                b' ' | b'\t' | b'\n' | b'\r' => {
                    return Err(Error::Parse { pos: self.pos, reason: "whitespace not allowed" })
                }
                _ => return Err(Error::Parse { pos: self.pos, reason: "unexpected character" }),
            };
            let count = self.count()?;
            if out.len() + item.len().saturating_mul(count) > MAX_EXPANDED_LEN {
                return Err(Error::Parse { pos: self.pos, reason: "sequence too long" });
            }
            for _ in 0..count {
                out.extend_from_slice(&item);
            }
        }
        Ok(out)
    }

    fn count(&mut self) -> Result<usize> {
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'^') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        let mut value: usize = 0;
        while let Some(d) = self.bytes.get(self.pos).filter(|b| b.is_ascii_digit()) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((d - b'0') as usize))
                .ok_or(Error::Parse { pos: self.pos, reason: "count overflow" })?;
            self.pos += 1;
        }
        if self.pos == digits_start {
            if self.pos != start {
                return Err(Error::Parse { pos: start, reason: "'^' without a count" });
            }
            return Ok(1);
        }
        if value == 0 {
            return Err(Error::Parse { pos: digits_start, reason: "zero repeat count" });
        }
        Ok(value)
    }
}

/// All primitive periodic words of period `1..=max_period`, one per rotation
/// class, each in its least rotation (Lyndon words). Shorter periods first.
pub fn primitive_sequences(max_period: usize) -> Vec<SymbolSequence> {
    let mut out = Vec::new();
    for n in 1..=max_period {
        for bits in 0u64..(1u64 << n) {
            let word: Vec<Symbol> = (0..n)
                .map(|i| if bits >> (n - 1 - i) & 1 == 1 { Symbol::Plus } else { Symbol::Minus })
                .collect();
            let seq = SymbolSequence(word);
            if seq.is_primitive() && seq.canonical_rotation() == seq {
                out.push(seq);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn run_length_sugar() {
        assert_eq!(SymbolSequence::parse("-3+").unwrap().to_string(), "---+");
        assert_eq!(SymbolSequence::parse("-^3+").unwrap().to_string(), "---+");
        assert_eq!(SymbolSequence::parse("(+-)2-").unwrap().to_string(), "+-+--");
        assert_eq!(SymbolSequence::parse("((+-)2-)2").unwrap().to_string(), "+-+--+-+--");
        assert_eq!(SymbolSequence::parse("\u{2212}+").unwrap().to_string(), "-+");
    }

    #[test]
    fn malformed_input() {
        for bad in ["", "--- +", "-0", "(+-", "+-)", "x", "()", "-^", "^3"] {
            assert!(SymbolSequence::parse(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn display_is_expanded() {
        let s: SymbolSequence = "(-+)3".parse().unwrap();
        assert_eq!(s.to_string(), "-+-+-+");
        assert_eq!(s.period(), 6);
        assert!(!s.is_primitive());
        assert_eq!(s.at(-1), Symbol::Plus);
        assert_eq!(s.at(7), Symbol::Plus);
    }

    #[test]
    fn twenty_three_words_up_to_period_six() {
        let all = primitive_sequences(6);
        assert_eq!(all.len(), 23);
        let per: Vec<usize> = (1..=6).map(|n| all.iter().filter(|s| s.period() == n).count()).collect();
        assert_eq!(per, [2, 1, 2, 3, 6, 9]);
        assert!(all.iter().any(|s| s.to_string() == "--++-+"));
    }
}
