//! Words in the free monoid on `d` letters and the graded-lex basis built on them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A word over the alphabet `1..=d`. The empty word is the monoid unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from raw letters. Letters must be `>= 1`; the upper bound is
    /// checked against a basis when the word is used.
    pub fn new(letters: Vec<u32>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::invalid("word", "letters are 1-based"));
        }
        Ok(Word(letters))
    }

    pub fn letter(k: u32) -> Self {
        assert!(k >= 1, "letters are 1-based");
        Word(vec![k])
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn transpose(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }
}

/// Free-function form of [`Word::concat`].
pub fn concat(a: &Word, b: &Word) -> Word {
    a.concat(b)
}

/// Free-function form of [`Word::transpose`].
pub fn transpose(a: &Word) -> Word {
    a.transpose()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(Error::parse("empty word must be written as \"e\""));
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c.to_digit(10) {
                Some(l) if l >= 1 => letters.push(l),
                _ => return Err(Error::parse(format!("bad letter {c:?} in word {s:?}"))),
            }
        }
        Ok(Word(letters))
    }
}

/// Canonical ordering of all words of length `<= n` over `d` letters.
///
/// Words are sorted by length, then lexicographically. A word of length `k` with
/// letters `l_1..l_k` has rank `sum (l_i - 1) d^(k-i)` inside its grade, and its
/// index is the grade offset plus the rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordBasis {
    d: usize,
    n: usize,
    offsets: Vec<usize>,
    pows: Vec<usize>,
}

impl WordBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::invalid("d", "alphabet size must be at least 1"));
        }
        let mut pows = Vec::with_capacity(n + 2);
        let mut p: usize = 1;
        for _ in 0..=n + 1 {
            pows.push(p);
            p = p
                .checked_mul(d)
                .ok_or_else(|| Error::invalid("N", "basis size overflows usize"))?;
        }
        let mut offsets = Vec::with_capacity(n + 2);
        let mut acc = 0usize;
        for &p in &pows[..=n + 1] {
            offsets.push(acc);
            acc = acc
                .checked_add(p)
                .ok_or_else(|| Error::invalid("N", "basis size overflows usize"))?;
        }
        Ok(WordBasis { d, n, offsets, pows })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Truncation grade.
    pub fn grade(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.offsets[self.n + 1]
    }

    /// Number of words of length `<= m`.
    pub fn count_upto(&self, m: usize) -> usize {
        assert!(m <= self.n);
        self.offsets[m + 1]
    }

    /// First index of grade `k`.
    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// `d^k`.
    pub fn pow(&self, k: usize) -> usize {
        self.pows[k]
    }

    pub fn len_of(&self, idx: usize) -> usize {
        debug_assert!(idx < self.count());
        // offsets is sorted; grade is the last offset <= idx
        match self.offsets.binary_search(&idx) {
            Ok(k) => k,
            Err(k) => k - 1,
        }
    }

    pub fn rank_of(&self, idx: usize) -> usize {
        idx - self.offsets[self.len_of(idx)]
    }

    pub fn index_from(&self, len: usize, rank: usize) -> usize {
        debug_assert!(len <= self.n && rank < self.pows[len]);
        self.offsets[len] + rank
    }

    pub fn index(&self, w: &Word) -> Option<usize> {
        if w.len() > self.n {
            return None;
        }
        let mut rank = 0usize;
        for &l in w.letters() {
            let l = l as usize;
            if l == 0 || l > self.d {
                return None;
            }
            rank = rank * self.d + (l - 1);
        }
        Some(self.offsets[w.len()] + rank)
    }

    pub fn word(&self, idx: usize) -> Word {
        let len = self.len_of(idx);
        let mut rank = idx - self.offsets[len];
        let mut letters = vec![0u32; len];
        for slot in letters.iter_mut().rev() {
            *slot = (rank % self.d) as u32 + 1;
            rank /= self.d;
        }
        Word(letters)
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.count()).map(move |i| self.word(i))
    }

    /// Index of `a·b` given the (len, rank) coordinates of both factors, if it fits.
    #[inline]
    pub fn concat_index(&self, la: usize, ra: usize, lb: usize, rb: usize) -> Option<usize> {
        let l = la + lb;
        if l > self.n {
            return None;
        }
        Some(self.offsets[l] + ra * self.pows[lb] + rb)
    }

    /// Index of the transpose of the word at `idx`.
    pub fn transpose_index(&self, idx: usize) -> usize {
        let len = self.len_of(idx);
        let mut rank = idx - self.offsets[len];
        let mut out = 0usize;
        for _ in 0..len {
            out = out * self.d + rank % self.d;
            rank /= self.d;
        }
        self.offsets[len] + out
    }

    pub fn contains(&self, other: &WordBasis) -> bool {
        self.d == other.d && self.n >= other.n
    }
}

/// Graded-lex basis of all words of length `<= n` over `d` letters.
pub fn enumerate(d: usize, n: usize) -> Result<WordBasis> {
    WordBasis::new(d, n)
}
