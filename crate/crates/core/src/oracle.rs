//! Decidable membership predicates for subsemigroups `T ⊆ S`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{enumerate_words, Alphabet, Letter, Word};

/// Default length up to which closure under composition is checked exhaustively.
pub const CLOSURE_CHECK_LEN: usize = 6;

/// Anything that can answer "is this word in T?".
pub trait Membership {
    fn contains(&self, word: &Word) -> bool;
}

impl<F: Fn(&Word) -> bool> Membership for F {
    fn contains(&self, word: &Word) -> bool {
        self(word)
    }
}

/// Serializable description of a subsemigroup. Words are written in the
/// syntax accepted by [`Alphabet::parse_word`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleDef {
    /// Words expressible as a concatenation of one or more listed words.
    GeneratedBy { words: Vec<String> },
    /// Words whose length is a positive multiple of `n`.
    LengthMultiple { n: usize },
    /// Words whose outermost letter is `generator`.
    PrefixIs { generator: String },
    /// `base` minus a finite set of words.
    ComplementOfFinite { base: Box<OracleDef>, exclude: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    GeneratedBy(Vec<Word>),
    LengthMultiple(usize),
    PrefixIs(Letter),
    ComplementOfFinite(Box<Kind>, BTreeSet<Word>),
}

/// A subsemigroup oracle bound to an alphabet and checked for closure.
#[derive(Debug, Clone)]
pub struct SubsemigroupOracle {
    alphabet: Alphabet,
    kind: Kind,
}

impl SubsemigroupOracle {
    /// Resolves `def` against `alphabet` and rejects it unless
    /// `u, v ∈ T ⇒ u∘v ∈ T` for all `|u∘v| <= closure_len`.
    pub fn new(def: &OracleDef, alphabet: &Alphabet, closure_len: usize) -> Result<Self> {
        let kind = resolve(def, alphabet)?;
        let oracle = SubsemigroupOracle {
            alphabet: alphabet.clone(),
            kind,
        };
        oracle.check_closure(closure_len)?;
        Ok(oracle)
    }

    /// `T = S`.
    pub fn whole(alphabet: &Alphabet) -> Self {
        let gens = (0..alphabet.len() as Letter)
            .map(|l| Word::from_letters_unchecked(vec![l]))
            .collect();
        SubsemigroupOracle {
            alphabet: alphabet.clone(),
            kind: Kind::GeneratedBy(gens),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn check_closure(&self, max_len: usize) -> Result<()> {
        let accepted: Vec<Word> = enumerate_words(&self.alphabet, max_len.saturating_sub(1))
            .into_iter()
            .filter(|w| self.contains(w))
            .collect();
        for u in &accepted {
            for v in accepted.iter().take_while(|v| u.len() + v.len() <= max_len) {
                if !self.contains(&self.alphabet.compose(u, v)) {
                    return Err(Error::NotClosed {
                        left: self.alphabet.display(u).to_string(),
                        right: self.alphabet.display(v).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Accepted words of length `<= max_len`, in enumeration order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        enumerate_words(&self.alphabet, max_len)
            .into_iter()
            .filter(|w| self.contains(w))
            .collect()
    }
}

impl Membership for SubsemigroupOracle {
    fn contains(&self, word: &Word) -> bool {
        kind_contains(&self.kind, &self.alphabet, word)
    }
}

fn resolve(def: &OracleDef, alphabet: &Alphabet) -> Result<Kind> {
    Ok(match def {
        OracleDef::GeneratedBy { words } => {
            if words.is_empty() {
                return Err(Error::invalid("generated_by needs at least one word"));
            }
            let mut ws = words
                .iter()
                .map(|w| alphabet.parse_word(w))
                .collect::<Result<Vec<_>>>()?;
            ws.sort();
            ws.dedup();
            Kind::GeneratedBy(ws)
        }
        OracleDef::LengthMultiple { n } => {
            if *n == 0 {
                return Err(Error::invalid("length_multiple needs n >= 1"));
            }
            Kind::LengthMultiple(*n)
        }
        OracleDef::PrefixIs { generator } => Kind::PrefixIs(
            alphabet
                .letter(generator)
                .ok_or_else(|| Error::invalid(format!("unknown generator {generator:?}")))?,
        ),
        OracleDef::ComplementOfFinite { base, exclude } => {
            let excluded = exclude
                .iter()
                .map(|w| alphabet.parse_word(w))
                .collect::<Result<BTreeSet<_>>>()?;
            Kind::ComplementOfFinite(Box::new(resolve(base, alphabet)?), excluded)
        }
    })
}

fn kind_contains(kind: &Kind, alphabet: &Alphabet, word: &Word) -> bool {
    match kind {
        Kind::GeneratedBy(gens) => {
            if alphabet.is_abelian() {
                generated_abelian(gens, alphabet, word)
            } else {
                generated_free(gens, word)
            }
        }
        Kind::LengthMultiple(n) => word.len().is_multiple_of(*n),
        Kind::PrefixIs(l) => word.head() == *l,
        Kind::ComplementOfFinite(base, excluded) => {
            !excluded.contains(word) && kind_contains(base, alphabet, word)
        }
    }
}

// word-break DP over positions
fn generated_free(gens: &[Word], word: &Word) -> bool {
    let letters = word.letters();
    let n = letters.len();
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for i in 0..n {
        if !reach[i] {
            continue;
        }
        for g in gens {
            let gl = g.letters();
            if i + gl.len() <= n && &letters[i..i + gl.len()] == gl {
                reach[i + gl.len()] = true;
            }
        }
    }
    reach[n]
}

// multiset decomposition into a sum of generator multisets
fn generated_abelian(gens: &[Word], alphabet: &Alphabet, word: &Word) -> bool {
    let count = |w: &Word| {
        let mut c = vec![0usize; alphabet.len()];
        for &l in w.letters() {
            c[l as usize] += 1;
        }
        c
    };
    let gen_counts: Vec<Vec<usize>> = gens.iter().map(count).collect();
    let mut memo = HashMap::new();
    decomposes(&count(word), &gen_counts, &mut memo)
}

fn decomposes(target: &[usize], gens: &[Vec<usize>], memo: &mut HashMap<Vec<usize>, bool>) -> bool {
    if target.iter().all(|&c| c == 0) {
        return true;
    }
    if let Some(&r) = memo.get(target) {
        return r;
    }
    let mut found = false;
    for g in gens {
        if g.iter().zip(target).all(|(a, b)| a <= b) {
            let rest: Vec<usize> = target.iter().zip(g).map(|(t, a)| t - a).collect();
            if decomposes(&rest, gens, memo) {
                found = true;
                break;
            }
        }
    }
    memo.insert(target.to_vec(), found);
    found
}
