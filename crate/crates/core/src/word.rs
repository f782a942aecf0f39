//! Letters, words, Parikh vectors, cyclic shift and shift-equivalence.
//!
//! Words are immutable once built; every scanning and parsing routine in the
//! crate works on shared `&Word` views.

use crate::error::{Error, Result};
use std::fmt;

/// A letter is a small unsigned integer `0..n`.
pub type Letter = u8;

/// Largest supported alphabet (letters are stored as `u8`).
pub const MAX_ALPHABET: usize = 256;

/// An alphabet `{0, 1, ..., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidConfig("alphabet size must be >= 1".into()));
        }
        if size > MAX_ALPHABET {
            return Err(Error::InvalidConfig(format!(
                "alphabet size {size} exceeds the supported maximum {MAX_ALPHABET}"
            )));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Iterates over all letters of the alphabet.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.size).map(|a| a as Letter)
    }
}

/// An immutable finite sequence of letters over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

impl Word {
    /// Builds a word, checking every letter against the alphabet.
    pub fn new(letters: Vec<Letter>, alphabet: Alphabet) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&a| (a as usize) >= alphabet.size()) {
            return Err(Error::LetterOutOfRange {
                letter: bad as usize,
                size: alphabet.size(),
            });
        }
        Ok(Word { alphabet, letters })
    }

    /// The empty word.
    pub fn empty(alphabet: Alphabet) -> Self {
        Word {
            alphabet,
            letters: Vec::new(),
        }
    }

    /// Parses the single-line text format: contiguous ASCII digits when the
    /// alphabet has at most 10 letters, whitespace-separated decimal integers
    /// otherwise. Surrounding whitespace (including a final newline) is
    /// ignored; an empty line is the empty word.
    pub fn from_text(text: &str, alphabet: Alphabet) -> Result<Self> {
        let text = text.trim();
        let mut letters = Vec::new();
        if alphabet.size() <= 10 {
            for c in text.chars() {
                let d = c
                    .to_digit(10)
                    .ok_or_else(|| Error::WordParse(format!("non-digit character {c:?}")))?;
                letters.push(d as Letter);
            }
        } else {
            for tok in text.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| Error::WordParse(format!("bad letter token {tok:?}")))?;
                if v >= MAX_ALPHABET {
                    return Err(Error::LetterOutOfRange {
                        letter: v,
                        size: alphabet.size(),
                    });
                }
                letters.push(v as Letter);
            }
        }
        Word::new(letters, alphabet)
    }

    /// Renders the word in the single-line text format (no trailing newline).
    pub fn to_text(&self) -> String {
        if self.alphabet.size() <= 10 {
            self.letters.iter().map(|a| (b'0' + a) as char).collect()
        } else {
            self.letters
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }

    /// Reads a word file (see `from_text`).
    pub fn read_file(path: &std::path::Path, alphabet: Alphabet) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Word::from_text(&text, alphabet)
    }

    /// Writes the word file with a final newline.
    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        let mut text = self.to_text();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
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

    /// The factor at `[index, index+length)` as a new word.
    pub fn factor(&self, index: usize, length: usize) -> Result<Word> {
        if index + length > self.len() {
            return Err(Error::OutOfRange {
                index,
                length,
                len: self.len(),
            });
        }
        Ok(Word {
            alphabet: self.alphabet,
            letters: self.letters[index..index + length].to_vec(),
        })
    }

    /// Concatenation.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        check_same_alphabet(self, other)?;
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Ok(Word {
            alphabet: self.alphabet,
            letters,
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Per-letter occurrence counts of a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParikhVector {
    counts: Vec<u64>,
}

impl ParikhVector {
    pub fn zero(alphabet: Alphabet) -> Self {
        ParikhVector {
            counts: vec![0; alphabet.size()],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, letter: Letter) -> u64 {
        self.counts[letter as usize]
    }

    /// Total number of letters, i.e. the length of the originating word.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Componentwise sum.
    pub fn add(&self, other: &ParikhVector) -> Result<ParikhVector> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::AlphabetMismatch(
                self.counts.len(),
                other.counts.len(),
            ));
        }
        Ok(ParikhVector {
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

fn check_same_alphabet(u: &Word, v: &Word) -> Result<()> {
    if u.alphabet() != v.alphabet() {
        return Err(Error::AlphabetMismatch(
            u.alphabet().size(),
            v.alphabet().size(),
        ));
    }
    Ok(())
}

/// Counts letter occurrences: `counts[a] = |w|_a`.
pub fn parikh(w: &Word) -> ParikhVector {
    let mut counts = vec![0u64; w.alphabet().size()];
    for &a in w.letters() {
        counts[a as usize] += 1;
    }
    ParikhVector { counts }
}

/// True iff `u` and `v` have equal Parikh vectors (written `u ~ v`).
pub fn is_anagram(u: &Word, v: &Word) -> Result<bool> {
    check_same_alphabet(u, v)?;
    if u.len() != v.len() {
        return Ok(false);
    }
    Ok(parikh(u) == parikh(v))
}

/// Applies the cyclic letter shift `a -> (a + i) mod n` to every letter.
pub fn shift(w: &Word, i: i64) -> Word {
    let n = w.alphabet().size() as i64;
    let off = i.rem_euclid(n) as u16;
    let n = n as u16;
    let letters = w
        .letters()
        .iter()
        .map(|&a| ((a as u16 + off) % n) as Letter)
        .collect();
    Word {
        alphabet: w.alphabet(),
        letters,
    }
}

/// True iff `u = shift(v, i)` for some `i`; such words have identical
/// Abelian power structure.
pub fn equivalent(u: &Word, v: &Word) -> Result<bool> {
    check_same_alphabet(u, v)?;
    if u.len() != v.len() {
        return Ok(false);
    }
    let n = u.alphabet().size() as u16;
    'shifts: for i in 0..n {
        for (&a, &b) in u.letters().iter().zip(v.letters()) {
            if a as u16 != (b as u16 + i) % n {
                continue 'shifts;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(text: &str, n: usize) -> Word {
        Word::from_text(text, Alphabet::new(n).unwrap()).unwrap()
    }

    #[test]
    fn parikh_counts_letters() {
        assert_eq!(parikh(&w("102020", 3)).counts(), &[3, 1, 2]);
        assert_eq!(parikh(&w("", 3)).counts(), &[0, 0, 0]);
        assert_eq!(
            parikh(&w("0740103050260", 8)).counts(),
            &[6, 1, 1, 1, 1, 1, 1, 1]
        );
    }

    #[test]
    fn anagram_examples() {
        assert!(is_anagram(&w("01", 8), &w("10", 8)).unwrap());
        assert!(!is_anagram(&w("01", 8), &w("00", 8)).unwrap());
        assert!(is_anagram(&w("0740103050260", 8), &w("0026050301047", 8)).unwrap());
        assert!(matches!(
            is_anagram(&w("01", 8), &w("01", 3)),
            Err(Error::AlphabetMismatch(8, 3))
        ));
    }

    #[test]
    fn shift_examples() {
        let f0 = w("0740103050260", 8);
        assert_eq!(shift(&f0, 0), f0);
        assert_eq!(shift(&f0, 8), f0);
        assert_eq!(shift(&f0, 7), w("7637072747157", 8));
        assert_eq!(shift(&f0, -1), w("7637072747157", 8));
    }

    #[test]
    fn equivalent_examples() {
        assert!(equivalent(&w("0740103050260", 8), &w("7637072747157", 8)).unwrap());
        assert!(!equivalent(&w("01", 8), &w("10", 8)).unwrap());
        let e = Word::empty(Alphabet::new(8).unwrap());
        assert!(equivalent(&e, &e).unwrap());
    }

    #[test]
    fn text_round_trip_large_alphabet() {
        let alphabet = Alphabet::new(16).unwrap();
        let word = Word::new(vec![0, 15, 3, 11], alphabet).unwrap();
        assert_eq!(word.to_text(), "0 15 3 11");
        assert_eq!(Word::from_text(&word.to_text(), alphabet).unwrap(), word);
    }

    #[test]
    fn bad_letters_rejected() {
        assert!(Word::from_text("089", Alphabet::new(8).unwrap()).is_err());
        assert!(Word::new(vec![8], Alphabet::new(8).unwrap()).is_err());
    }

    fn arb_word(max_n: usize, max_len: usize) -> impl Strategy<Value = Word> {
        (1..=max_n).prop_flat_map(move |n| {
            proptest::collection::vec(0..n as u8, 0..=max_len).prop_map(move |letters| {
                Word::new(letters, Alphabet::new(n).unwrap()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn parikh_is_additive((u, v) in (1usize..=8).prop_flat_map(|n| {
            let alph = Alphabet::new(n).unwrap();
            (proptest::collection::vec(0..n as u8, 0..32),
             proptest::collection::vec(0..n as u8, 0..32))
                .prop_map(move |(a, b)| (Word::new(a, alph).unwrap(), Word::new(b, alph).unwrap()))
        })) {
            let uv = u.concat(&v).unwrap();
            prop_assert_eq!(parikh(&uv), parikh(&u).add(&parikh(&v)).unwrap());
            prop_assert_eq!(parikh(&uv).total(), uv.len() as u64);
        }

        #[test]
        fn shift_composes(word in arb_word(8, 32), i in -20i64..20, j in -20i64..20) {
            prop_assert_eq!(shift(&shift(&word, i), j), shift(&word, i + j));
        }

        #[test]
        fn equivalence_shifts_parikh(word in arb_word(8, 32), i in 0i64..8) {
            let shifted = shift(&word, i);
            prop_assert!(equivalent(&shifted, &word).unwrap());
            let n = word.alphabet().size();
            let pw = parikh(&word);
            let ps = parikh(&shifted);
            for a in 0..n {
                prop_assert_eq!(ps.count(((a + i as usize) % n) as u8), pw.count(a as u8));
            }
        }
    }
}
