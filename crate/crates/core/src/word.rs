//! Finite words over the positive integers.
//!
//! A word `[w1, ..., wk]` indexes the composition `S_w1 ∘ ... ∘ S_wk` of the
//! similitudes defining the measure. The canonical text form joins letters with
//! `.`, so `[2, 1, 1]` renders as `2.1.1` and the empty word renders as `""`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite word; every letter is at least 1. The empty word is allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u64>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0) {
            return Err(Error::LetterOutOfRange(bad));
        }
        Ok(Word(letters))
    }

    /// Single-letter word `[j]`.
    pub fn letter(j: u64) -> Result<Self> {
        Self::new(vec![j])
    }

    pub fn letters(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `self` followed by the single letter `j`.
    pub fn child(&self, j: u64) -> Result<Word> {
        if j == 0 {
            return Err(Error::LetterOutOfRange(j));
        }
        let mut letters = self.0.clone();
        letters.push(j);
        Ok(Word(letters))
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Result<Word> {
        match self.0.split_last() {
            Some((_, init)) => Ok(Word(init.to_vec())),
            None => Err(Error::EmptyWordParent),
        }
    }

    /// Same word with the last letter incremented by one.
    pub fn successor(&self) -> Result<Word> {
        let mut letters = self.0.clone();
        match letters.last_mut() {
            Some(last) => {
                *last += 1;
                Ok(Word(letters))
            }
            None => Err(Error::EmptyWord),
        }
    }

    /// Drops the first letter.
    pub fn suffix(&self) -> Word {
        Word(self.0.iter().skip(1).copied().collect())
    }

    pub fn count_non_ones(&self) -> usize {
        self.0.iter().filter(|&&l| l != 1).count()
    }

    /// Sum of letters plus length: the base-2 exponent shared by the probability
    /// and the contraction ratio of the word.
    pub fn weight(&self) -> u64 {
        self.0.iter().sum::<u64>() + self.0.len() as u64
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let fail = |reason: &str| Error::ParseWord {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut letters = Vec::new();
        for seg in s.split('.') {
            if seg.is_empty() {
                return Err(fail("empty segment"));
            }
            if !seg.bytes().all(|b| b.is_ascii_digit()) {
                return Err(fail("non-numeric segment"));
            }
            let l: u64 = seg.parse().map_err(|_| fail("letter too large"))?;
            if l == 0 {
                return Err(fail("letter < 1"));
            }
            letters.push(l);
        }
        Ok(Word(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for building words in tests and fixtures.
#[macro_export]
macro_rules! word {
    () => { $crate::word::Word::empty() };
    ($($l:expr),+ $(,)?) => { $crate::word::Word::new(vec![$($l),+]).unwrap() };
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn concat_examples() {
        assert_eq!(word![2].concat(&word![1, 1]), word![2, 1, 1]);
        assert_eq!(Word::empty().concat(&word![3]), word![3]);
        assert_eq!(word![1, 2].concat(&Word::empty()), word![1, 2]);
    }

    #[test]
    fn parent_examples() {
        assert_eq!(word![2, 1, 1].parent().unwrap(), word![2, 1]);
        assert_eq!(word![5].parent().unwrap(), Word::empty());
        let err = Word::empty().parent().unwrap_err();
        assert_eq!(err.to_string(), "no parent of empty word");
    }

    #[test]
    fn successor_examples() {
        assert_eq!(word![1].successor().unwrap(), word![2]);
        assert_eq!(word![2, 1].successor().unwrap(), word![2, 2]);
        assert_eq!(word![3, 7].successor().unwrap(), word![3, 8]);
        assert!(Word::empty().successor().is_err());
    }

    #[test]
    fn non_ones() {
        assert_eq!(word![2, 1, 1].count_non_ones(), 1);
        assert_eq!(Word::empty().count_non_ones(), 0);
        assert_eq!(word![2, 3, 2].count_non_ones(), 3);
    }

    #[test]
    fn render_and_parse() {
        assert_eq!(word![2, 1, 1].to_string(), "2.1.1");
        assert_eq!(word![12, 1].to_string(), "12.1");
        assert_eq!(Word::empty().to_string(), "");
        assert_eq!("".parse::<Word>().unwrap(), Word::empty());
        assert_eq!("12.1".parse::<Word>().unwrap(), word![12, 1]);
        for bad in ["0.1", "1..2", ".1", "1.", "a", "1.-2", "1.+2", " 1"] {
            assert!(bad.parse::<Word>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn zero_letter_rejected() {
        assert_eq!(Word::new(vec![1, 0]), Err(Error::LetterOutOfRange(0)));
        assert!(word![1].child(0).is_err());
    }

    fn any_word() -> impl Strategy<Value = Word> {
        prop::collection::vec(1u64..=40, 0..=12).prop_map(|v| Word::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn parse_inverts_render(w in any_word()) {
            prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        }

        #[test]
        fn parent_then_last_restores(w in any_word()) {
            prop_assume!(!w.is_empty());
            let p = w.parent().unwrap();
            prop_assert_eq!(p.len() + 1, w.len());
            prop_assert_eq!(p.concat(&Word::letter(w.last().unwrap()).unwrap()), w);
        }

        #[test]
        fn successor_touches_only_last(w in any_word()) {
            prop_assume!(!w.is_empty());
            let s = w.successor().unwrap();
            let k = w.len() - 1;
            prop_assert_eq!(&s.letters()[..k], &w.letters()[..k]);
            prop_assert_eq!(s.letters()[k], w.letters()[k] + 1);
        }
    }
}
