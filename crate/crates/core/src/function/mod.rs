//! Entire-function expressions, word realization and escape iteration.

mod expr;
mod orbit;
mod parse;

pub use expr::{EntireMap, MAX_DEPTH};
pub use orbit::{iterate, IterParams, OrbitVerdict, Outcome, DEFAULT_ESCAPE_RADIUS, DEFAULT_MAX_STEPS};
pub use parse::parse_formula;

use crate::error::{Error, Result};
use crate::word::Word;

/// The composition tree `f_a1 ∘ ... ∘ f_ak` for `word = [a1, ..., ak]`.
pub fn word_map(word: &Word, generators: &[EntireMap]) -> Result<EntireMap> {
    let mut letters = word.letters().iter().rev();
    let get = |l: u8| generators.get(l as usize).cloned().ok_or(Error::UnknownLetter(l));
    let mut map = get(*letters.next().expect("words are non-empty"))?;
    for &l in letters {
        map = EntireMap::compose(get(l)?, map);
    }
    Ok(map)
}
