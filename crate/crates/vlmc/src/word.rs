//! Finite binary words.
//!
//! A [`Word`] is a finite string over the alphabet `{0, 1}`, stored in
//! reading order (leftmost letter first). Tree node labels, contexts and
//! cylinder arguments are all words in this sense. Left-infinite histories
//! are never materialized; whenever a history is consumed, the caller passes
//! a finite suffix and mirrors it at the boundary (most recent letter first).

use std::fmt;
use std::str::FromStr;

use crate::error::WordParseError;

/// A letter of the alphabet, `0` or `1`.
pub type Letter = u8;

/// Flips a letter.
#[inline]
pub fn flip(a: Letter) -> Letter {
    1 - a
}

/// A finite word over `{0, 1}`.
///
/// Ordering is by length first, then lexicographic, which is the index
/// order used everywhere a set of words must be totally ordered.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// The empty word.
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    /// Builds a word from a slice of letters (each must be 0 or 1).
    pub fn from_letters(letters: &[Letter]) -> Self {
        assert!(letters.iter().all(|&a| a <= 1), "letters must be 0 or 1");
        Word { letters: letters.to_vec() }
    }

    /// A single-letter word.
    pub fn single(a: Letter) -> Self {
        assert!(a <= 1);
        Word { letters: vec![a] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Letter at position `i` (0-based, reading order).
    pub fn get(&self, i: usize) -> Letter {
        self.letters[i]
    }

    /// The mirror word (letters reversed).
    pub fn mirror(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters }
    }

    /// The shift `σ`: drops the first letter. `σ(∅) = ∅`.
    pub fn shift(&self) -> Word {
        if self.letters.is_empty() {
            Word::empty()
        } else {
            Word { letters: self.letters[1..].to_vec() }
        }
    }

    /// `σ^k`: drops the first `k` letters (all of them if `k ≥ len`).
    pub fn shift_n(&self, k: usize) -> Word {
        let k = k.min(self.letters.len());
        Word { letters: self.letters[k..].to_vec() }
    }

    /// The suffix consisting of the last `k` letters.
    pub fn suffix(&self, k: usize) -> Word {
        let k = k.min(self.letters.len());
        Word { letters: self.letters[self.letters.len() - k..].to_vec() }
    }

    /// The prefix consisting of the first `k` letters.
    pub fn prefix(&self, k: usize) -> Word {
        let k = k.min(self.letters.len());
        Word { letters: self.letters[..k].to_vec() }
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// The word `a · self`.
    pub fn prepend(&self, a: Letter) -> Word {
        assert!(a <= 1);
        let mut letters = Vec::with_capacity(self.letters.len() + 1);
        letters.push(a);
        letters.extend_from_slice(&self.letters);
        Word { letters }
    }

    /// The word `self · a`.
    pub fn append(&self, a: Letter) -> Word {
        assert!(a <= 1);
        let mut letters = self.letters.clone();
        letters.push(a);
        Word { letters }
    }

    /// True when `self` is a prefix of `other` (not necessarily strict).
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.letters.len() <= other.letters.len()
            && other.letters[..self.letters.len()] == self.letters[..]
    }

    /// True when `self` is a strict prefix of `other`.
    pub fn is_strict_prefix_of(&self, other: &Word) -> bool {
        self.letters.len() < other.letters.len() && self.is_prefix_of(other)
    }

    /// Number of ones in the word.
    pub fn count_ones(&self) -> usize {
        self.letters.iter().filter(|&&a| a == 1).count()
    }

    /// `letter` repeated `n` times.
    pub fn repeat(letter: Letter, n: usize) -> Word {
        assert!(letter <= 1);
        Word { letters: vec![letter; n] }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "ε");
        }
        for &a in &self.letters {
            write!(f, "{}", a)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w\"{}\"", self)
    }
}

impl FromStr for Word {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => letters.push(0),
                '1' => letters.push(1),
                _ => return Err(WordParseError { offending: c }),
            }
        }
        Ok(Word { letters })
    }
}

/// Shorthand used pervasively in tests.
pub fn w(s: &str) -> Word {
    s.parse().expect("literal word")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(0u8..=1, 0..=max_len).prop_map(|v| Word::from_letters(&v))
    }

    #[test]
    fn shift_of_empty_is_empty() {
        assert_eq!(Word::empty().shift(), Word::empty());
    }

    #[test]
    fn display_round_trip() {
        for s in ["ε", "0", "1", "0101", "000111"] {
            assert_eq!(w(s).to_string(), s);
        }
    }

    #[test]
    fn order_is_length_then_lex() {
        assert!(w("1") < w("00"));
        assert!(w("001") < w("101"));
        assert!(w("00") < w("01"));
    }

    proptest! {
        #[test]
        fn mirror_involution(word in arb_word(24)) {
            prop_assert_eq!(word.mirror().mirror(), word);
        }

        #[test]
        fn concat_associative(a in arb_word(8), b in arb_word(8), c in arb_word(8)) {
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        }

        #[test]
        fn empty_is_identity(a in arb_word(16)) {
            prop_assert_eq!(Word::empty().concat(&a), a.clone());
            prop_assert_eq!(a.concat(&Word::empty()), a);
        }

        #[test]
        fn shift_drops_first(a in arb_word(16)) {
            if !a.is_empty() {
                let shifted = a.shift();
                prop_assert_eq!(shifted.letters(), &a.letters()[1..]);
            }
        }
    }
}
