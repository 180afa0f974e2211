//! Translates and the finite, cofinite and Rees indices of a subsemigroup.
//!
//! `S` is infinite, so every index here is a semidecision up to a word-length
//! bound `B` and every verdict carries `B`.
//!
//! Coverage conventions:
//! * finite index: `u` is covered by `w` when `u = w∘t` with `t ∈ T ∪ {Identity}`.
//! * cofinite index: witnesses have length `<= B/2`; every `u` with
//!   `|u| <= B - B/2` needs some witness `w` with `w∘u ∈ T`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Membership;
use crate::word::{enumerate_words, splits, Alphabet, Direction, ExtendedWord, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictKind {
    Exact { value: usize, witnesses: Vec<ExtendedWord> },
    AtLeast(usize),
    UnboundedUpTo(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexVerdict {
    pub kind: VerdictKind,
    pub bound: usize,
}

/// Wire form: `{kind, value, bound, witnesses}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub kind: String,
    pub value: Option<usize>,
    pub bound: usize,
    pub witnesses: Vec<String>,
}

impl IndexVerdict {
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, VerdictKind::Exact { .. })
    }

    pub fn exact_value(&self) -> Option<usize> {
        match self.kind {
            VerdictKind::Exact { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn witnesses(&self) -> &[ExtendedWord] {
        match &self.kind {
            VerdictKind::Exact { witnesses, .. } => witnesses,
            _ => &[],
        }
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> VerdictJson {
        let (kind, value) = match &self.kind {
            VerdictKind::Exact { value, .. } => ("Exact", Some(*value)),
            VerdictKind::AtLeast(v) => ("AtLeast", Some(*v)),
            VerdictKind::UnboundedUpTo(_) => ("UnboundedUpTo", None),
        };
        VerdictJson {
            kind: kind.to_string(),
            value,
            bound: self.bound,
            witnesses: self.witnesses().iter().map(|w| alphabet.display_ext(w)).collect(),
        }
    }
}

/// `{ prefix ∘ t : t ∈ T, |prefix ∘ t| <= bound }` (or `t ∘ prefix` for [`Direction::Right`]).
pub fn translate<M: Membership + ?Sized>(
    alphabet: &Alphabet,
    prefix: &ExtendedWord,
    oracle: &M,
    bound: usize,
    direction: Direction,
) -> Result<BTreeSet<Word>> {
    if bound < prefix.len() + 1 {
        return Err(Error::invalid(format!(
            "bound {bound} too small for a prefix of length {}",
            prefix.len()
        )));
    }
    Ok(enumerate_words(alphabet, bound - prefix.len())
        .into_iter()
        .filter(|t| oracle.contains(t))
        .map(|t| {
            let t = ExtendedWord::Word(t);
            let out = match direction {
                Direction::Left => alphabet.compose_ext(prefix, &t),
                Direction::Right => alphabet.compose_ext(&t, prefix),
            };
            match out {
                ExtendedWord::Word(w) => w,
                ExtendedWord::Identity => unreachable!("t is non-empty"),
            }
        })
        .collect())
}

/// Smallest `W ⊆ S¹` with every word of length `<= bound` in `⋃_{w∈W} w∘T¹`.
pub fn finite_index<M: Membership + ?Sized>(
    alphabet: &Alphabet,
    oracle: &M,
    bound: usize,
    max_index: usize,
    direction: Direction,
) -> Result<IndexVerdict> {
    if bound < 2 {
        return Err(Error::invalid("finite index needs bound >= 2"));
    }
    let words = enumerate_words(alphabet, bound);
    if !words.iter().any(|w| oracle.contains(w)) {
        return Err(Error::EmptySubsemigroup { bound });
    }
    let mut pool = WitnessPool::default();
    let candidates: Vec<Vec<usize>> = words
        .iter()
        .map(|u| {
            splits(alphabet, u, direction)
                .into_iter()
                .filter(|(_, t)| t.as_ref().is_none_or(|t| oracle.contains(t)))
                .map(|(w, _)| w)
                .collect::<Vec<_>>()
        })
        .map(|ws| ws.into_iter().map(|w| pool.intern(w)).collect())
        .collect();
    Ok(solve(pool, candidates, bound, max_index))
}

/// Smallest `{w_1..w_k} ⊆ S¹` (each `|w_i| <= bound/2`) such that every `u`
/// with `|u| <= bound - bound/2` has some `w_i ∘ u ∈ T`.
pub fn cofinite_index<M: Membership + ?Sized>(
    alphabet: &Alphabet,
    oracle: &M,
    bound: usize,
    max_index: usize,
    direction: Direction,
) -> Result<IndexVerdict> {
    if bound < 2 {
        return Err(Error::invalid("cofinite index needs bound >= 2"));
    }
    if !enumerate_words(alphabet, bound).iter().any(|w| oracle.contains(w)) {
        return Err(Error::EmptySubsemigroup { bound });
    }
    let witness_len = bound / 2;
    let words = enumerate_words(alphabet, bound - witness_len);
    let mut all_witnesses = vec![ExtendedWord::Identity];
    all_witnesses.extend(enumerate_words(alphabet, witness_len).into_iter().map(ExtendedWord::Word));

    let mut pool = WitnessPool::default();
    let mut candidates = Vec::with_capacity(words.len());
    for u in &words {
        let u_ext = ExtendedWord::Word(u.clone());
        let mut cands = Vec::new();
        for w in &all_witnesses {
            let product = match direction {
                Direction::Left => alphabet.compose_ext(w, &u_ext),
                Direction::Right => alphabet.compose_ext(&u_ext, w),
            };
            if product.as_word().is_some_and(|p| oracle.contains(p)) {
                cands.push(pool.intern(w.clone()));
            }
        }
        if cands.is_empty() {
            // no single witness can ever rescue u
            return Ok(IndexVerdict {
                kind: VerdictKind::UnboundedUpTo(bound),
                bound,
            });
        }
        candidates.push(cands);
    }
    Ok(solve(pool, candidates, bound, max_index))
}

/// Rees index `|S − T| + 1`, exact when the complement stops growing over
/// the last three lengths.
pub fn rees_index<M: Membership + ?Sized>(alphabet: &Alphabet, oracle: &M, bound: usize) -> Result<IndexVerdict> {
    if bound < 3 {
        return Err(Error::invalid("Rees index needs bound >= 3"));
    }
    let complement: Vec<Word> = enumerate_words(alphabet, bound)
        .into_iter()
        .filter(|w| !oracle.contains(w))
        .collect();
    let upto = |len: usize| complement.iter().filter(|w| w.len() <= len).count();
    let kind = if upto(bound - 2) == complement.len() {
        VerdictKind::Exact {
            value: complement.len() + 1,
            witnesses: complement.into_iter().map(ExtendedWord::Word).collect(),
        }
    } else {
        VerdictKind::UnboundedUpTo(bound)
    };
    Ok(IndexVerdict { kind, bound })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionReport {
    pub bound: usize,
    /// `S − T` up to the bound.
    pub complement: Vec<Word>,
    /// T-words that are not a product of two T-words.
    pub generating_set: Vec<Word>,
    /// No new generators appeared at the last two lengths.
    pub stable: bool,
}

/// Bounded check that `T` is finitely generated when `S − T` is finite.
pub fn check_finitely_generated_extension<M: Membership + ?Sized>(
    alphabet: &Alphabet,
    oracle: &M,
    bound: usize,
) -> Result<ExtensionReport> {
    let rees = rees_index(alphabet, oracle, bound)?;
    if !rees.is_exact() {
        return Err(Error::ReesNotExact { bound });
    }
    let complement = rees
        .witnesses()
        .iter()
        .filter_map(|w| w.as_word().cloned())
        .collect();
    let generating_set: Vec<Word> = enumerate_words(alphabet, bound)
        .into_iter()
        .filter(|u| oracle.contains(u))
        .filter(|u| {
            !splits(alphabet, u, Direction::Left).into_iter().any(|(a, b)| match (a, b) {
                (ExtendedWord::Word(a), Some(b)) => oracle.contains(&a) && oracle.contains(&b),
                _ => false,
            })
        })
        .collect();
    let stable = !generating_set.iter().any(|w| w.len() + 1 >= bound);
    Ok(ExtensionReport {
        bound,
        complement,
        generating_set,
        stable,
    })
}

#[derive(Default)]
struct WitnessPool {
    items: Vec<ExtendedWord>,
}

impl WitnessPool {
    fn intern(&mut self, w: ExtendedWord) -> usize {
        match self.items.iter().position(|x| *x == w) {
            Some(i) => i,
            None => {
                self.items.push(w);
                self.items.len() - 1
            }
        }
    }
}

fn solve(pool: WitnessPool, candidates: Vec<Vec<usize>>, bound: usize, max_index: usize) -> IndexVerdict {
    // renumber so that index order equals witness order
    let mut order: Vec<usize> = (0..pool.items.len()).collect();
    order.sort_by(|&a, &b| pool.items[a].cmp(&pool.items[b]));
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let sorted: Vec<ExtendedWord> = order.iter().map(|&i| pool.items[i].clone()).collect();
    let candidates: Vec<Vec<usize>> = candidates
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|i| rank[i]).collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();

    let cover = HittingSet::new(sorted.len(), candidates);
    for k in 1..=max_index {
        if let Some(best) = cover.least_of_size(k) {
            return IndexVerdict {
                kind: VerdictKind::Exact {
                    value: k,
                    witnesses: best.into_iter().map(|i| sorted[i].clone()).collect(),
                },
                bound,
            };
        }
    }
    IndexVerdict {
        kind: VerdictKind::AtLeast(max_index + 1),
        bound,
    }
}

/// Exact minimum hitting set: every element must contain a chosen witness.
struct HittingSet {
    candidates: Vec<Vec<usize>>,
    hits: Vec<Vec<usize>>,
}

impl HittingSet {
    fn new(n_witnesses: usize, candidates: Vec<Vec<usize>>) -> Self {
        let mut hits = vec![Vec::new(); n_witnesses];
        for (e, cs) in candidates.iter().enumerate() {
            for &c in cs {
                hits[c].push(e);
            }
        }
        HittingSet { candidates, hits }
    }

    /// Lexicographically least hitting set with exactly `k` witnesses.
    fn least_of_size(&self, k: usize) -> Option<Vec<usize>> {
        let mut hit_count = vec![0u32; self.candidates.len()];
        let mut chosen = Vec::with_capacity(k);
        let mut best: Option<Vec<usize>> = None;
        self.branch(k, &mut hit_count, &mut chosen, &mut best);
        best
    }

    fn branch(&self, k: usize, hit_count: &mut [u32], chosen: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
        // most constrained unhit element, earliest on ties
        let open = (0..self.candidates.len())
            .filter(|&e| hit_count[e] == 0)
            .min_by_key(|&e| self.candidates[e].len());
        let Some(e) = open else {
            let mut set = chosen.clone();
            set.sort_unstable();
            if best.as_ref().is_none_or(|b| set < *b) {
                *best = Some(set);
            }
            return;
        };
        if chosen.len() == k {
            return;
        }
        for &c in &self.candidates[e] {
            chosen.push(c);
            for &h in &self.hits[c] {
                hit_count[h] += 1;
            }
            self.branch(k, hit_count, chosen, best);
            for &h in &self.hits[c] {
                hit_count[h] -= 1;
            }
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{OracleDef, SubsemigroupOracle};

    fn oracle(a: &Alphabet, def: OracleDef) -> SubsemigroupOracle {
        SubsemigroupOracle::new(&def, a, 6).unwrap()
    }

    fn even_words(a: &Alphabet) -> SubsemigroupOracle {
        oracle(
            a,
            OracleDef::GeneratedBy {
                words: ["f.f", "g.g", "f.g", "g.f"].map(String::from).to_vec(),
            },
        )
    }

    fn names(a: &Alphabet, ws: impl IntoIterator<Item = Word>) -> Vec<String> {
        ws.into_iter().map(|w| a.display(&w).to_string()).collect()
    }

    #[test]
    fn translate_identity_even_powers() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = oracle(&a, OracleDef::LengthMultiple { n: 2 });
        let out = translate(&a, &ExtendedWord::Identity, &t, 6, Direction::Left).unwrap();
        assert_eq!(names(&a, out), ["f.f", "f.f.f.f", "f.f.f.f.f.f"]);
    }

    #[test]
    fn translate_by_f_odd_powers() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = oracle(&a, OracleDef::LengthMultiple { n: 2 });
        let f = a.parse_extended("f").unwrap();
        let out = translate(&a, &f, &t, 6, Direction::Left).unwrap();
        assert_eq!(names(&a, out), ["f.f.f", "f.f.f.f.f"]);
    }

    #[test]
    fn translate_even_words_by_g() {
        let a = Alphabet::with_size(2, false).unwrap();
        let t = even_words(&a);
        let g = a.parse_extended("g").unwrap();
        let out = translate(&a, &g, &t, 3, Direction::Left).unwrap();
        assert_eq!(names(&a, out), ["g.f.f", "g.f.g", "g.g.f", "g.g.g"]);
    }

    #[test]
    fn translate_right_direction() {
        let a = Alphabet::with_size(2, false).unwrap();
        let t = oracle(&a, OracleDef::PrefixIs { generator: "f".into() });
        let g = a.parse_extended("g").unwrap();
        let out = translate(&a, &g, &t, 3, Direction::Right).unwrap();
        assert_eq!(names(&a, out), ["f.g", "f.f.g", "f.g.g"]);
    }

    #[test]
    fn translate_bound_too_small() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = SubsemigroupOracle::whole(&a);
        let f2 = a.parse_extended("f.f").unwrap();
        assert!(translate(&a, &f2, &t, 2, Direction::Left).is_err());
    }

    #[test]
    fn finite_index_even_words() {
        let a = Alphabet::with_size(2, false).unwrap();
        let v = finite_index(&a, &even_words(&a), 6, 6, Direction::Left).unwrap();
        let expected: Vec<ExtendedWord> = ["id", "f", "g"].iter().map(|s| a.parse_extended(s).unwrap()).collect();
        assert_eq!(
            v.kind,
            VerdictKind::Exact {
                value: 3,
                witnesses: expected
            }
        );
    }

    #[test]
    fn cofinite_index_even_words() {
        let a = Alphabet::with_size(2, false).unwrap();
        let v = cofinite_index(&a, &even_words(&a), 6, 6, Direction::Left).unwrap();
        assert_eq!(v.exact_value(), Some(2));
        assert_eq!(v.to_json(&a).witnesses, ["id", "f"]);
    }

    #[test]
    fn prefix_f_has_no_finite_index() {
        let a = Alphabet::with_size(2, false).unwrap();
        let t = oracle(&a, OracleDef::PrefixIs { generator: "f".into() });
        let fin = finite_index(&a, &t, 6, 6, Direction::Left).unwrap();
        assert_eq!(fin.kind, VerdictKind::AtLeast(7));
        let cof = cofinite_index(&a, &t, 6, 6, Direction::Left).unwrap();
        assert_eq!(cof.to_json(&a).witnesses, ["f"]);
        assert_eq!(cof.exact_value(), Some(1));
    }

    #[test]
    fn cyclic_powers_have_index_n() {
        let a = Alphabet::with_size(1, false).unwrap();
        for n in 2..=5 {
            let t = oracle(&a, OracleDef::LengthMultiple { n });
            let v = finite_index(&a, &t, 12, 6, Direction::Left).unwrap();
            let json = v.to_json(&a);
            assert_eq!(json.value, Some(n));
            assert_eq!(json.witnesses[0], "id");
            for (j, w) in v.witnesses().iter().enumerate() {
                assert_eq!(w.len(), j);
            }
        }
    }

    #[test]
    fn whole_semigroup_has_finite_index_one() {
        let a = Alphabet::with_size(2, false).unwrap();
        let v = finite_index(&a, &SubsemigroupOracle::whole(&a), 5, 3, Direction::Left).unwrap();
        assert_eq!(v.to_json(&a).witnesses, ["id"]);
    }

    #[test]
    fn cofinite_unbounded_when_no_witness_fits() {
        // T = PrefixIs(f) with right translates: u∘w never changes the head
        let a = Alphabet::with_size(2, false).unwrap();
        let t = oracle(&a, OracleDef::PrefixIs { generator: "f".into() });
        let v = cofinite_index(&a, &t, 6, 6, Direction::Right).unwrap();
        assert_eq!(v.kind, VerdictKind::UnboundedUpTo(6));
    }

    #[test]
    fn empty_subsemigroup_rejected() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = oracle(&a, OracleDef::LengthMultiple { n: 9 });
        assert!(matches!(
            finite_index(&a, &t, 6, 3, Direction::Left),
            Err(Error::EmptySubsemigroup { bound: 6 })
        ));
        assert!(cofinite_index(&a, &t, 6, 3, Direction::Left).is_err());
    }

    fn length_at_least_two(a: &Alphabet) -> SubsemigroupOracle {
        oracle(
            a,
            OracleDef::ComplementOfFinite {
                base: Box::new(OracleDef::GeneratedBy {
                    words: vec!["f".into(), "g".into()],
                }),
                exclude: vec!["f".into(), "g".into()],
            },
        )
    }

    #[test]
    fn rees_index_of_length_two_ideal() {
        let a = Alphabet::with_size(2, false).unwrap();
        let v = rees_index(&a, &length_at_least_two(&a), 8).unwrap();
        assert_eq!(v.exact_value(), Some(3));
        assert_eq!(v.to_json(&a).witnesses, ["f", "g"]);
    }

    #[test]
    fn rees_index_even_powers_unbounded() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = oracle(&a, OracleDef::LengthMultiple { n: 2 });
        assert_eq!(rees_index(&a, &t, 12).unwrap().kind, VerdictKind::UnboundedUpTo(12));
    }

    #[test]
    fn rees_index_of_whole_is_one() {
        let a = Alphabet::with_size(3, false).unwrap();
        let v = rees_index(&a, &SubsemigroupOracle::whole(&a), 6).unwrap();
        assert_eq!(
            v.kind,
            VerdictKind::Exact {
                value: 1,
                witnesses: vec![]
            }
        );
        assert!(rees_index(&a, &SubsemigroupOracle::whole(&a), 2).is_err());
    }

    #[test]
    fn extension_of_length_two_ideal() {
        let a = Alphabet::with_size(2, false).unwrap();
        let r = check_finitely_generated_extension(&a, &length_at_least_two(&a), 8).unwrap();
        assert_eq!(r.generating_set.len(), 4 + 8);
        assert!(r.generating_set.iter().all(|w| w.len() == 2 || w.len() == 3));
        assert!(r.stable);
        assert_eq!(r.complement.len(), 2);
    }

    #[test]
    fn extension_of_cyclic_whole() {
        let a = Alphabet::with_size(1, false).unwrap();
        let r = check_finitely_generated_extension(&a, &SubsemigroupOracle::whole(&a), 6).unwrap();
        assert_eq!(names(&a, r.generating_set), ["f"]);
        assert!(r.stable);
    }

    #[test]
    fn extension_refused_for_prefix_oracle() {
        let a = Alphabet::with_size(2, false).unwrap();
        let t = oracle(&a, OracleDef::PrefixIs { generator: "f".into() });
        assert!(matches!(
            check_finitely_generated_extension(&a, &t, 7),
            Err(Error::ReesNotExact { bound: 7 })
        ));
    }

    #[test]
    fn verdict_json_shape() {
        let a = Alphabet::with_size(2, false).unwrap();
        let v = finite_index(&a, &even_words(&a), 6, 6, Direction::Left).unwrap();
        let s = serde_json::to_string(&v.to_json(&a)).unwrap();
        assert_eq!(s, r#"{"kind":"Exact","value":3,"bound":6,"witnesses":["id","f","g"]}"#);
    }
}
