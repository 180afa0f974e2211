//! The hitting-set index solvers against exhaustive subset search, with
//! membership given by plain closures and products built letter by letter.

use std::collections::BTreeSet;

use semilab_core::index::{cofinite_index, finite_index, VerdictKind};
use semilab_core::word::{enumerate_words, Alphabet, Direction, Word};

type Letters = Vec<u8>;

/// Every letter string of length `1..=max_len`, sorted when abelian.
fn strings(n: u8, max_len: usize, abelian: bool) -> Vec<Letters> {
    let mut out: Vec<Letters> = Vec::new();
    let mut layer: Vec<Letters> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|p| (0..n).map(move |l| [p.as_slice(), &[l]].concat()))
            .map(|mut w| {
                if abelian {
                    w.sort_unstable();
                }
                w
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// `outer ∘ inner` in the notation where the rightmost letter acts first.
fn product(outer: &[u8], inner: &[u8], abelian: bool) -> Letters {
    let mut w = [outer, inner].concat();
    if abelian {
        w.sort_unstable();
    }
    w
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Least k such that some k witnesses cover every target, or None past `max`.
fn least_cover(covers: &[BTreeSet<Letters>], targets: &[Letters], max: usize) -> Option<usize> {
    (1..=max).find(|&k| {
        subsets(covers.len(), k).iter().any(|s| {
            targets
                .iter()
                .all(|u| s.iter().any(|&i| covers[i].contains(u)))
        })
    })
}

fn brute_finite(n: u8, abelian: bool, t: &dyn Fn(&[u8]) -> bool, bound: usize, dir: Direction, max: usize) -> Option<usize> {
    let all = strings(n, bound, abelian);
    // identity first, then every word
    let mut witnesses: Vec<Letters> = vec![Vec::new()];
    witnesses.extend(all.iter().cloned());
    let covers: Vec<BTreeSet<Letters>> = witnesses
        .iter()
        .map(|w| {
            let mut c = BTreeSet::new();
            if !w.is_empty() {
                c.insert(w.clone());
            }
            for s in all.iter().filter(|s| t(s)) {
                let p = match dir {
                    Direction::Left => product(w, s, abelian),
                    Direction::Right => product(s, w, abelian),
                };
                if p.len() <= bound {
                    c.insert(p);
                }
            }
            c
        })
        .collect();
    least_cover(&covers, &all, max)
}

fn brute_cofinite(n: u8, abelian: bool, t: &dyn Fn(&[u8]) -> bool, bound: usize, dir: Direction, max: usize) -> Option<usize> {
    let wlen = bound / 2;
    let targets = strings(n, bound - wlen, abelian);
    let mut witnesses: Vec<Letters> = vec![Vec::new()];
    witnesses.extend(strings(n, wlen, abelian));
    // covers[w] = the targets u with w ∘ u in T
    let covers: Vec<BTreeSet<Letters>> = witnesses
        .iter()
        .map(|w| {
            targets
                .iter()
                .filter(|u| {
                    t(&match dir {
                        Direction::Left => product(w, u, abelian),
                        Direction::Right => product(u, w, abelian),
                    })
                })
                .cloned()
                .collect()
        })
        .collect();
    least_cover(&covers, &targets, max)
}

fn value(kind: &VerdictKind) -> Option<usize> {
    match kind {
        VerdictKind::Exact { value, .. } => Some(*value),
        _ => None,
    }
}

struct Case {
    name: &'static str,
    letters: u8,
    abelian: bool,
    member: fn(&[u8]) -> bool,
}

fn cases() -> Vec<Case> {
    vec![
        Case { name: "even length", letters: 2, abelian: false, member: |w| w.len() % 2 == 0 },
        Case { name: "length 3k", letters: 1, abelian: false, member: |w| w.len() % 3 == 0 },
        Case { name: "starts with f", letters: 2, abelian: false, member: |w| w[0] == 0 },
        Case { name: "ends with g", letters: 2, abelian: false, member: |w| w[w.len() - 1] == 1 },
        Case { name: "length >= 2", letters: 2, abelian: false, member: |w| w.len() >= 2 },
        Case { name: "contains g", letters: 2, abelian: false, member: |w| w.contains(&1) },
        Case { name: "abelian even", letters: 2, abelian: true, member: |w| w.len() % 2 == 0 },
        Case { name: "abelian uses both", letters: 2, abelian: true, member: |w| w.contains(&0) && w.contains(&1) },
    ]
}

fn oracle_of(case: &Case) -> impl Fn(&Word) -> bool + '_ {
    move |w: &Word| (case.member)(w.letters())
}

#[test]
fn finite_index_matches_exhaustive_search() {
    for case in cases() {
        let a = Alphabet::with_size(case.letters as usize, case.abelian).unwrap();
        for bound in [3, 4] {
            for dir in [Direction::Left, Direction::Right] {
                let got = finite_index(&a, &oracle_of(&case), bound, 4, dir).unwrap();
                let want = brute_finite(case.letters, case.abelian, &case.member, bound, dir, 4);
                assert_eq!(value(&got.kind), want, "{} bound {bound} {dir:?}", case.name);
                if want.is_none() {
                    assert_eq!(got.kind, VerdictKind::AtLeast(5));
                }
            }
        }
    }
}

#[test]
fn cofinite_index_matches_exhaustive_search() {
    for case in cases() {
        let a = Alphabet::with_size(case.letters as usize, case.abelian).unwrap();
        for bound in [4, 5, 6] {
            for dir in [Direction::Left, Direction::Right] {
                let got = cofinite_index(&a, &oracle_of(&case), bound, 4, dir).unwrap();
                let want = brute_cofinite(case.letters, case.abelian, &case.member, bound, dir, 4);
                assert_eq!(value(&got.kind), want, "{} bound {bound} {dir:?}", case.name);
            }
        }
    }
}

#[test]
fn witnesses_returned_actually_cover() {
    let a = Alphabet::with_size(2, false).unwrap();
    let even = |w: &Word| w.len().is_multiple_of(2);
    let v = finite_index(&a, &even, 5, 4, Direction::Left).unwrap();
    let ws = v.witnesses();
    for u in enumerate_words(&a, 5) {
        let covered = ws.iter().any(|w| match w.as_word() {
            None => even(&u),
            Some(w) => {
                u == *w || (u.len() > w.len() && u.letters()[..w.len()] == *w.letters() && (u.len() - w.len()) % 2 == 0)
            }
        });
        assert!(covered, "{} not covered", a.display(&u));
    }
}

#[test]
fn enumeration_agrees_with_letter_strings() {
    for (n, abelian) in [(1u8, false), (2, false), (3, false), (2, true), (3, true)] {
        let a = Alphabet::with_size(n as usize, abelian).unwrap();
        let ours: BTreeSet<Letters> = enumerate_words(&a, 4).iter().map(|w| w.letters().to_vec()).collect();
        let theirs: BTreeSet<Letters> = strings(n, 4, abelian).into_iter().collect();
        assert_eq!(ours, theirs);
    }
}
