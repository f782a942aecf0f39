//! Uniform cyclic morphisms: application, fixed-point prefixes, and the
//! grid parse of fixed-point factors into `s . f(x) . p`.

use crate::error::{Error, Result};
use crate::word::{parikh, shift, Alphabet, Letter, Word};

/// Default guard on generated word length (letters).
pub const DEFAULT_MEMORY_CAP: usize = 1 << 30;

/// A named violation of the morphism invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismViolation {
    /// Letter 0 must be the first letter of `image0`, otherwise the fixed
    /// point starting at 0 does not exist.
    NotProlongable,
    /// Images of length 0 or 1 generate nothing.
    ImageTooShort,
}

impl std::fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MorphismViolation::NotProlongable => {
                write!(f, "not prolongable: image of 0 must start with 0")
            }
            MorphismViolation::ImageTooShort => write!(f, "image length >= 2 required"),
        }
    }
}

/// Checks the invariants for a candidate `image0` without constructing the
/// morphism. An empty list means the morphism is valid.
pub fn validate_morphism(image0: &Word) -> Vec<MorphismViolation> {
    let mut violations = Vec::new();
    if image0.len() < 2 {
        violations.push(MorphismViolation::ImageTooShort);
    }
    if image0.letters().first() != Some(&0) {
        violations.push(MorphismViolation::NotProlongable);
    }
    violations
}

/// A morphism where every image has the same length and the image of letter
/// `a` is the letter-wise shift by `a` of the image of 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformCyclicMorphism {
    alphabet: Alphabet,
    images: Vec<Word>,
}

impl UniformCyclicMorphism {
    /// Builds the morphism from the image of letter 0; all other images are
    /// induced by the cyclic-shift law.
    pub fn new(image0: Word) -> std::result::Result<Self, Vec<MorphismViolation>> {
        let violations = validate_morphism(&image0);
        if !violations.is_empty() {
            return Err(violations);
        }
        let alphabet = image0.alphabet();
        let images = (0..alphabet.size() as i64)
            .map(|a| shift(&image0, a))
            .collect();
        Ok(UniformCyclicMorphism { alphabet, images })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Uniform image length.
    pub fn image_len(&self) -> usize {
        self.images[0].len()
    }

    pub fn image0(&self) -> &Word {
        &self.images[0]
    }

    /// Image of a single letter.
    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a as usize]
    }

    /// Applies the morphism: the concatenation of letter images.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch(
                w.alphabet().size(),
                self.alphabet.size(),
            ));
        }
        let mut letters = Vec::with_capacity(w.len() * self.image_len());
        for &a in w.letters() {
            letters.extend_from_slice(self.images[a as usize].letters());
        }
        Word::new(letters, self.alphabet)
    }

    /// `f^t(0)`, of length `l^t`. Uses the default memory cap.
    pub fn fixed_point_prefix(&self, t: u32) -> Result<Word> {
        self.fixed_point_prefix_with_cap(t, DEFAULT_MEMORY_CAP)
    }

    pub fn fixed_point_prefix_with_cap(&self, t: u32, cap: usize) -> Result<Word> {
        let seed = Word::new(vec![0], self.alphabet)?;
        self.fixed_point_prefix_of_seed_with_cap(&seed, t, cap)
    }

    /// `f^t(seed)`, of length `l^t * |seed|`. The seed must be a factor of
    /// the fixed point for the result to be one (caller-asserted).
    pub fn fixed_point_prefix_of_seed(&self, seed: &Word, t: u32) -> Result<Word> {
        self.fixed_point_prefix_of_seed_with_cap(seed, t, DEFAULT_MEMORY_CAP)
    }

    pub fn fixed_point_prefix_of_seed_with_cap(
        &self,
        seed: &Word,
        t: u32,
        cap: usize,
    ) -> Result<Word> {
        // Refuse up front rather than fail partway through an allocation.
        let final_len = (self.image_len() as u128)
            .checked_pow(t)
            .and_then(|l| l.checked_mul(seed.len() as u128))
            .ok_or(Error::MemoryCapExceeded {
                requested: u128::MAX,
                cap,
            })?;
        if final_len > cap as u128 {
            return Err(Error::MemoryCapExceeded {
                requested: final_len,
                cap,
            });
        }
        let mut word = seed.clone();
        for _ in 0..t {
            word = self.apply(&word)?;
        }
        Ok(word)
    }

    /// Parses the factor `host[index, index+length)` on the image-length
    /// grid: `s` runs from `index` to the next grid line, `x` is the
    /// preimage of the full blocks covered, `p` is the remainder. `b` and
    /// `a` are the preimage letters of the straddled blocks.
    ///
    /// `host` must be a prefix of the fixed point (so its own prefix spells
    /// the preimage letters). Factors that start inside a block and end
    /// before that block's boundary do not fit the grid shape and are
    /// rejected.
    pub fn parse_factor<'h>(
        &self,
        host: &'h Word,
        index: usize,
        length: usize,
    ) -> Result<ParsedFactor<'h>> {
        if host.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch(
                host.alphabet().size(),
                self.alphabet.size(),
            ));
        }
        let ell = self.image_len();
        if index + length > host.len() {
            return Err(Error::OutOfRange {
                index,
                length,
                len: host.len(),
            });
        }
        let end = index + length;
        let first_grid = index.div_ceil(ell);
        if length == 0 {
            let parsed = ParsedFactor {
                host,
                index,
                length,
                ell,
                x_block_start: first_grid,
                b: None,
                s: Word::empty(self.alphabet),
                x: Word::empty(self.alphabet),
                a: None,
                p: Word::empty(self.alphabet),
            };
            return Ok(parsed);
        }
        let s_end = first_grid * ell;
        if end < s_end {
            return Err(Error::Precondition(format!(
                "factor [{index}, {end}) ends inside its first block; \
                 no grid parse of the form s.f(x).p exists"
            )));
        }
        let last_grid = end / ell;
        let s = host.factor(index, s_end - index)?;
        let x = Word::new(host.letters()[first_grid..last_grid].to_vec(), self.alphabet)?;
        let p = host.factor(last_grid * ell, end - last_grid * ell)?;
        // Preimage letters are read off the host's own prefix.
        let b = if s.is_empty() {
            None
        } else {
            Some(host.letters()[first_grid - 1])
        };
        let a = if p.is_empty() {
            None
        } else {
            Some(host.letters()[last_grid])
        };

        let parsed = ParsedFactor {
            host,
            index,
            length,
            ell,
            x_block_start: first_grid,
            b,
            s,
            x,
            a,
            p,
        };
        parsed.verify(self)?;
        Ok(parsed)
    }
}

/// A factor of a fixed-point prefix, decomposed on the block grid as
/// `s . f(x) . p` with `|s|, |p| < l`.
///
/// In the preimage, `b` sits immediately before `x` (its image contributes
/// `s`) and `a` immediately after (its image contributes `p`); either marker
/// is absent when the corresponding piece is empty.
#[derive(Debug, Clone)]
pub struct ParsedFactor<'h> {
    host: &'h Word,
    index: usize,
    length: usize,
    ell: usize,
    x_block_start: usize,
    pub b: Option<Letter>,
    pub s: Word,
    pub x: Word,
    pub a: Option<Letter>,
    pub p: Word,
}

impl<'h> ParsedFactor<'h> {
    pub fn host(&self) -> &'h Word {
        self.host
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Image length of the morphism this factor was parsed under.
    pub fn image_len(&self) -> usize {
        self.ell
    }

    /// The factor itself, materialized.
    pub fn factor(&self) -> Word {
        self.host
            .factor(self.index, self.length)
            .expect("parsed range is in bounds")
    }

    /// Preimage position of the first letter of `x`. The marker `b` (when
    /// present) sits at this position minus one, and `a` at this position
    /// plus `|x|`.
    pub fn x_block_start(&self) -> usize {
        self.x_block_start
    }

    /// True when both factors were parsed against the same host word.
    pub fn same_host(&self, other: &ParsedFactor<'_>) -> bool {
        std::ptr::eq(self.host, other.host) || self.host == other.host
    }

    /// Complement `q` of `p` inside `f(a)`: `f(a) = p . q`.
    pub fn q(&self, m: &UniformCyclicMorphism) -> Option<Word> {
        self.a.map(|a| {
            let image = m.image(a);
            image
                .factor(self.p.len(), image.len() - self.p.len())
                .expect("p is a proper prefix of f(a)")
        })
    }

    /// Complement `r` of `s` inside `f(b)`: `f(b) = r . s`.
    pub fn r(&self, m: &UniformCyclicMorphism) -> Option<Word> {
        self.b.map(|b| {
            let image = m.image(b);
            image
                .factor(0, image.len() - self.s.len())
                .expect("s is a proper suffix of f(b)")
        })
    }

    /// Checks the reconstruction `s . f(x) . p == factor` plus the marker
    /// letter laws. Fails only if the host is not grid-aligned with the
    /// fixed point.
    fn verify(&self, m: &UniformCyclicMorphism) -> Result<()> {
        let ell = m.image_len();
        if self.s.len() >= ell || self.p.len() >= ell {
            return Err(Error::Inconsistency(format!(
                "straddle pieces must be shorter than the image: |s|={}, |p|={}",
                self.s.len(),
                self.p.len()
            )));
        }
        let rebuilt = self.s.concat(&m.apply(&self.x)?)?.concat(&self.p)?;
        if rebuilt != self.factor() {
            return Err(Error::Inconsistency(
                "s.f(x).p does not reconstruct the factor; host is not a fixed-point prefix"
                    .into(),
            ));
        }
        if let Some(b) = self.b {
            let image = m.image(b);
            if image.letters()[ell - self.s.len()..] != *self.s.letters() {
                return Err(Error::Inconsistency(format!(
                    "s is not a suffix of f({b})"
                )));
            }
        }
        if let Some(a) = self.a {
            let image = m.image(a);
            if image.letters()[..self.p.len()] != *self.p.letters() {
                return Err(Error::Inconsistency(format!(
                    "p is not a prefix of f({a})"
                )));
            }
        }
        Ok(())
    }
}

/// Parikh image under a cyclic morphism, used by tests and the counting-law
/// checks: `|f(w)|_k = sum_a |w|_a * |f(a)|_k`.
pub fn image_parikh(m: &UniformCyclicMorphism, w: &Word) -> Vec<u64> {
    let n = m.alphabet().size();
    let pw = parikh(w);
    let mut counts = vec![0u64; n];
    for a in 0..n {
        let pa = parikh(m.image(a as Letter));
        for (k, c) in counts.iter_mut().enumerate() {
            *c += pw.count(a as Letter) * pa.count(k as Letter);
        }
    }
    counts
}
