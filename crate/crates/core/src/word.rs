//! Words over a generator alphabet.
//!
//! A word `[a1, a2, ..., ak]` denotes the composition `f_a1 ∘ f_a2 ∘ ... ∘ f_ak`,
//! applied rightmost-first. In abelian mode words are identified up to
//! commutation and stored in sorted (canonical) order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator identifier; the index of the generator in its [`Alphabet`].
pub type Letter = u8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    abelian: bool,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, abelian: bool) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::invalid("alphabet must contain at least one generator"));
        }
        if names.len() > Letter::MAX as usize {
            return Err(Error::invalid("too many generators"));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name == "id" || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::invalid(format!("invalid generator name {name:?}")));
            }
            if names[..i].contains(name) {
                return Err(Error::invalid(format!("duplicate generator name {name:?}")));
            }
        }
        Ok(Alphabet { names, abelian })
    }

    /// Alphabet with default names `f, g, h, ...` for `n` generators.
    pub fn with_size(n: usize, abelian: bool) -> Result<Self> {
        const DEFAULT: &[&str] = &["f", "g", "h", "k", "p", "q", "r", "s"];
        let names: Vec<String> = (0..n)
            .map(|i| match DEFAULT.get(i) {
                Some(s) => s.to_string(),
                None => format!("f{i}"),
            })
            .collect();
        Alphabet::new(names, abelian)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| i as Letter)
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter as usize]
    }

    /// Builds a canonical word, checking that every letter belongs to the alphabet.
    pub fn word(&self, letters: impl Into<Vec<Letter>>) -> Result<Word> {
        let letters = letters.into();
        if letters.is_empty() {
            return Err(Error::invalid("words must have at least one letter"));
        }
        if let Some(&bad) = letters.iter().find(|&&l| l as usize >= self.len()) {
            return Err(Error::UnknownLetter(bad));
        }
        Ok(self.canonical(Word { letters }))
    }

    pub fn canonical(&self, mut word: Word) -> Word {
        if self.abelian {
            word.letters.sort_unstable();
        }
        word
    }

    /// `outer ∘ inner`, canonicalized.
    pub fn compose(&self, outer: &Word, inner: &Word) -> Word {
        let mut letters = Vec::with_capacity(outer.len() + inner.len());
        letters.extend_from_slice(&outer.letters);
        letters.extend_from_slice(&inner.letters);
        self.canonical(Word { letters })
    }

    pub fn compose_ext(&self, outer: &ExtendedWord, inner: &ExtendedWord) -> ExtendedWord {
        match (outer, inner) {
            (ExtendedWord::Identity, x) | (x, ExtendedWord::Identity) => x.clone(),
            (ExtendedWord::Word(a), ExtendedWord::Word(b)) => ExtendedWord::Word(self.compose(a, b)),
        }
    }

    /// Parses a word such as `f.g.g`, `f∘g^2` or (single-letter names only) `fgg`.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        match self.parse_extended(text)? {
            ExtendedWord::Word(w) => Ok(w),
            ExtendedWord::Identity => Err(Error::invalid("identity is not a word of S")),
        }
    }

    pub fn parse_extended(&self, text: &str) -> Result<ExtendedWord> {
        let text = text.trim();
        if text == "id" || text == "Identity" {
            return Ok(ExtendedWord::Identity);
        }
        let single_char = self.names.iter().all(|n| n.chars().count() == 1);
        let mut letters = Vec::new();
        for token in text.split(|c: char| c == '.' || c == '∘' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let (base, power) = match token.split_once('^') {
                Some((b, p)) => {
                    let p: usize = p
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad power in word token {token:?}")))?;
                    if p == 0 {
                        return Err(Error::invalid(format!("zero power in word token {token:?}")));
                    }
                    (b, p)
                }
                None => (token, 1),
            };
            let run: Vec<Letter> = if let Some(l) = self.letter(base) {
                vec![l]
            } else if single_char {
                base.chars()
                    .map(|c| {
                        self.letter(&c.to_string())
                            .ok_or_else(|| Error::invalid(format!("unknown generator {c:?} in word {text:?}")))
                    })
                    .collect::<Result<_>>()?
            } else {
                return Err(Error::invalid(format!("unknown generator {base:?} in word {text:?}")));
            };
            for _ in 0..power {
                letters.extend_from_slice(&run);
            }
        }
        if letters.is_empty() {
            return Err(Error::invalid(format!("empty word {text:?}")));
        }
        self.word(letters).map(ExtendedWord::Word)
    }

    pub fn display<'a>(&'a self, word: &'a Word) -> WordDisplay<'a> {
        WordDisplay { alphabet: self, word }
    }

    pub fn display_ext(&self, word: &ExtendedWord) -> String {
        match word {
            ExtendedWord::Identity => "id".to_string(),
            ExtendedWord::Word(w) => self.display(w).to_string(),
        }
    }
}

pub struct WordDisplay<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(self.alphabet.name(l))?;
        }
        Ok(())
    }
}

/// A non-empty composition of generators. Ordered by length, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Outermost (leftmost) generator.
    pub fn head(&self) -> Letter {
        self.letters[0]
    }

    pub(crate) fn from_letters_unchecked(letters: Vec<Letter>) -> Word {
        debug_assert!(!letters.is_empty());
        Word { letters }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of `S¹ = S ∪ {Identity}`. `Identity` sorts before every word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExtendedWord {
    Identity,
    Word(Word),
}

impl ExtendedWord {
    pub fn len(&self) -> usize {
        match self {
            ExtendedWord::Identity => 0,
            ExtendedWord::Word(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ExtendedWord::Identity)
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            ExtendedWord::Identity => None,
            ExtendedWord::Word(w) => Some(w),
        }
    }
}

impl From<Word> for ExtendedWord {
    fn from(w: Word) -> Self {
        ExtendedWord::Word(w)
    }
}

/// Side on which the fixed element sits in a translate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `f ∘ T`
    #[default]
    Left,
    /// `T ∘ f`
    Right,
}

/// All canonical words of length `1..=max_len`, sorted by (length, lexicographic).
pub fn enumerate_words(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
    let n = alphabet.len() as Letter;
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &layer {
            // abelian: only non-decreasing sequences
            let start = if alphabet.is_abelian() {
                prefix.last().copied().unwrap_or(0)
            } else {
                0
            };
            for l in start..n {
                let mut w = prefix.clone();
                w.push(l);
                next.push(w);
            }
        }
        out.extend(next.iter().cloned().map(Word::from_letters_unchecked));
        layer = next;
    }
    out
}

/// Every way of writing `word` as `w ∘ t` (left) or `t ∘ w` (right) with
/// `w, t ∈ S¹`. Returns `(w, t)` pairs, `t = None` meaning Identity.
pub(crate) fn splits(alphabet: &Alphabet, word: &Word, direction: Direction) -> Vec<(ExtendedWord, Option<Word>)> {
    let letters = word.letters();
    let to_ext = |ls: &[Letter]| {
        if ls.is_empty() {
            ExtendedWord::Identity
        } else {
            ExtendedWord::Word(Word::from_letters_unchecked(ls.to_vec()))
        }
    };
    let to_opt = |ls: &[Letter]| {
        if ls.is_empty() {
            None
        } else {
            Some(Word::from_letters_unchecked(ls.to_vec()))
        }
    };
    if alphabet.is_abelian() {
        // sub-multisets of a sorted word; direction is irrelevant
        let mut counts = vec![0usize; alphabet.len()];
        for &l in letters {
            counts[l as usize] += 1;
        }
        let mut out = Vec::new();
        let mut chosen = vec![0usize; alphabet.len()];
        sub_multisets(&counts, &mut chosen, 0, &mut |part| {
            let mut w = Vec::new();
            let mut t = Vec::new();
            for (l, (&c, &p)) in counts.iter().zip(part).enumerate() {
                w.extend(std::iter::repeat_n(l as Letter, p));
                t.extend(std::iter::repeat_n(l as Letter, c - p));
            }
            out.push((to_ext(&w), to_opt(&t)));
        });
        out.sort();
        out
    } else {
        (0..=letters.len())
            .map(|i| match direction {
                Direction::Left => (to_ext(&letters[..i]), to_opt(&letters[i..])),
                Direction::Right => (to_ext(&letters[letters.len() - i..]), to_opt(&letters[..letters.len() - i])),
            })
            .collect()
    }
}

fn sub_multisets(counts: &[usize], chosen: &mut Vec<usize>, idx: usize, visit: &mut dyn FnMut(&[usize])) {
    if idx == counts.len() {
        visit(chosen);
        return;
    }
    for c in 0..=counts[idx] {
        chosen[idx] = c;
        sub_multisets(counts, chosen, idx + 1, visit);
    }
    chosen[idx] = 0;
}
