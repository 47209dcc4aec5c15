//! Letters and words over a symmetric generating set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator or its inverse.
///
/// The derived ordering is the shortlex letter order used everywhere in the
/// crate: all generators in list order, then all inverses in list order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    inverse: bool,
    generator: u8,
}

impl Letter {
    pub const fn new(generator: u8, inverse: bool) -> Self {
        Letter { inverse, generator }
    }

    pub const fn gen(generator: u8) -> Self {
        Letter::new(generator, false)
    }

    pub const fn inv(generator: u8) -> Self {
        Letter::new(generator, true)
    }

    #[inline]
    pub fn generator(self) -> usize {
        self.generator as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    /// +1 for a generator, -1 for an inverse.
    #[inline]
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Letter {
            inverse: !self.inverse,
            generator: self.generator,
        }
    }

    /// Dense index in `0..2k`, following the shortlex letter order.
    #[inline]
    pub fn rank(self, rank_count: usize) -> usize {
        if self.inverse {
            rank_count + self.generator as usize
        } else {
            self.generator as usize
        }
    }

    /// All `2k` letters of a `k`-generator alphabet in shortlex order.
    pub fn alphabet(generators: usize) -> Vec<Letter> {
        let mut out: Vec<Letter> = (0..generators as u8).map(Letter::gen).collect();
        out.extend((0..generators as u8).map(Letter::inv));
        out
    }

    /// Text symbol: lowercase for a generator, uppercase for its inverse.
    pub fn symbol(self, symbols: &[char]) -> char {
        let c = symbols[self.generator as usize];
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

/// A finite sequence of letters. Not automatically reduced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word(letters.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// Formal inverse: reverse and invert every letter.
    pub fn invert(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Juxtaposition without cancellation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The unique freely reduced word equal to `self` in the free group.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            push_reduced(&mut out, l);
        }
        Word(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }

    /// Removes letters cancelling cyclically at the two ends. The word must
    /// already be freely reduced.
    pub fn cyclic_reduce(&self) -> Word {
        let s = &self.0;
        let (mut i, mut j) = (0, s.len());
        while j > i + 1 && s[i] == s[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        Word(s[i..j].to_vec())
    }

    pub fn subword(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    /// Exponent sum of every generator.
    pub fn exponent_sums(&self, generators: usize) -> Vec<i64> {
        let mut e = vec![0i64; generators];
        for l in &self.0 {
            e[l.generator()] += l.sign();
        }
        e
    }

    pub fn to_text(&self, symbols: &[char]) -> String {
        self.0.iter().map(|l| l.symbol(symbols)).collect()
    }

    /// Shortlex comparison: length first, then lexicographic in letter order.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl Ord for Word {
    /// Shortlex.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.shortlex_cmp(other)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Uses `a, b, c, ...` as generator symbols.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            let c = (b'a' + l.generator) as char;
            let c = if l.inverse { c.to_ascii_uppercase() } else { c };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

#[inline]
pub(crate) fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inverse()) {
        out.pop();
    } else {
        out.push(l);
    }
}

/// Parses the external word format over a generator alphabet: a lowercase
/// symbol is a generator, the matching uppercase symbol its inverse.
/// The result is not reduced.
pub fn parse_word(text: &str, symbols: &[char]) -> Result<Word> {
    let mut out = Vec::with_capacity(text.len());
    for c in text.chars() {
        if c.is_whitespace() {
            continue;
        }
        let lower = c.to_ascii_lowercase();
        let idx = symbols
            .iter()
            .position(|&s| s == lower)
            .filter(|_| c.is_ascii_alphabetic())
            .ok_or_else(|| Error::UnknownLetter(c.to_string()))?;
        out.push(Letter::new(idx as u8, c.is_ascii_uppercase()));
    }
    Ok(Word(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    const AB: [char; 2] = ['a', 'b'];
    const ABC: [char; 3] = ['a', 'b', 'c'];

    fn w(s: &str) -> Word {
        parse_word(s, &['a', 'b', 'c', 'd']).unwrap()
    }

    #[test]
    fn parse_transliterates() {
        let word = parse_word("abAB", &AB).unwrap();
        assert_eq!(
            word.0,
            vec![Letter::gen(0), Letter::gen(1), Letter::inv(0), Letter::inv(1)]
        );
        assert!(parse_word("", &AB).unwrap().is_empty());
    }

    #[test]
    fn parse_rejects_unknown_symbol() {
        match parse_word("axc", &ABC) {
            Err(Error::UnknownLetter(s)) => assert_eq!(s, "x"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_word("a1", &ABC).is_err());
    }

    #[test]
    fn parse_does_not_reduce() {
        assert_eq!(parse_word("aA", &AB).unwrap().len(), 2);
    }

    #[test]
    fn free_reduction_examples() {
        assert_eq!(w("aA").free_reduce(), Word::empty());
        assert_eq!(w("abBa").free_reduce(), w("aa"));
        assert_eq!(Word::empty().free_reduce(), Word::empty());
        assert_eq!(w("abcCBAb").free_reduce(), w("b"));
    }

    #[test]
    fn invert_and_concat() {
        assert_eq!(w("ab").invert(), w("BA"));
        assert_eq!(w("a").concat(&w("A")), w("aA"));
        assert_eq!(Word::empty().invert(), Word::empty());
    }

    #[test]
    fn letter_order_is_generators_then_inverses() {
        let alpha = Letter::alphabet(2);
        assert_eq!(Word(alpha).to_text(&AB), "abAB");
        assert!(Letter::gen(1) < Letter::inv(0));
    }

    #[test]
    fn cyclic_reduction() {
        assert_eq!(w("abaBA").cyclic_reduce(), w("a"));
        assert_eq!(w("aB").cyclic_reduce(), w("aB"));
    }

    #[test]
    fn shortlex_order() {
        use std::cmp::Ordering::*;
        assert_eq!(w("aaB").shortlex_cmp(&w("aBa")), Less);
        assert_eq!(w("b").shortlex_cmp(&w("aa")), Less);
        assert_eq!(w("bA").shortlex_cmp(&w("Ab")), Less);
    }
}
