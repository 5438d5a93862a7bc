//! Exhaustive generation of small molecules, used by tests and by the
//! `atlas` command.

use std::collections::HashMap;
use std::sync::Arc;

use crate::construct::{cube, simplex};
use crate::iso::{are_isomorphic, invariant_hash};
use crate::molecule::{self, arrow, globe, Molecule};
use crate::ogposet::{OgPoset, Sign};

/// Bounds on the generated molecules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusBounds {
    pub max_elements: usize,
    pub max_dim: usize,
}

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds { max_elements: 20, max_dim: 3 }
    }
}

struct Entry {
    molecule: Molecule,
    round: bool,
    /// `(invariant hash, size)` of `∂ᵏ^α` for `k < dim`, indexed `[k][α]`.
    boundary_keys: Vec<[(u64, usize); 2]>,
}

/// Molecules up to isomorphism within the bounds, in generation order.
pub struct Corpus {
    pub bounds: CorpusBounds,
    entries: Vec<Entry>,
}

fn entry(m: Molecule) -> Entry {
    let p = m.carrier();
    let d = m.dim().max(0) as usize;
    let boundary_keys = (0..d)
        .map(|k| {
            Sign::BOTH.map(|s| {
                let (b, _) = p.sub_poset(&m.boundary_set(k, s));
                (invariant_hash(&b), b.len())
            })
        })
        .collect();
    Entry { round: m.is_round(), molecule: m, boundary_keys }
}

type Key = (u64, usize);

#[derive(Default)]
struct Index {
    /// `(k, key of ∂ᵏ⁻)` to molecules of dimension above `k`.
    by_input: HashMap<(usize, Key), Vec<usize>>,
    /// `(k, key of ∂ᵏ⁺)` likewise.
    by_output: HashMap<(usize, Key), Vec<usize>>,
    /// `(n, keys of ∂ⁿ⁻¹)` to round molecules of dimension `n`.
    by_boundary: HashMap<(usize, Vec<[Key; 2]>), Vec<usize>>,
}

impl Corpus {
    /// Every molecule within the bounds, built from the point by pasting
    /// and by forming atoms between parallel round molecules.
    pub fn generate(bounds: CorpusBounds) -> Corpus {
        let mut corpus = Corpus { bounds, entries: Vec::new() };
        let mut seen: HashMap<Key, Vec<usize>> = HashMap::new();
        let mut index = Index::default();
        let mut frontier: Vec<usize> = corpus.insert(&mut seen, molecule::point()).into_iter().collect();
        while !frontier.is_empty() {
            for &i in &frontier {
                corpus.index(&mut index, i);
            }
            let mut next = Vec::new();
            for &i in &frontier {
                for m in corpus.combine(&index, i) {
                    next.extend(corpus.insert(&mut seen, m));
                }
            }
            frontier = next;
        }
        corpus
    }

    fn insert(&mut self, seen: &mut HashMap<Key, Vec<usize>>, m: Molecule) -> Option<usize> {
        let p = m.carrier();
        let key = (invariant_hash(p), p.len());
        let slot = seen.entry(key).or_default();
        if slot.iter().any(|&i| are_isomorphic(self.entries[i].molecule.carrier(), p)) {
            return None;
        }
        slot.push(self.entries.len());
        self.entries.push(entry(m));
        Some(self.entries.len() - 1)
    }

    fn index(&self, index: &mut Index, i: usize) {
        let e = &self.entries[i];
        for (k, keys) in e.boundary_keys.iter().enumerate() {
            index.by_input.entry((k, keys[0])).or_default().push(i);
            index.by_output.entry((k, keys[1])).or_default().push(i);
        }
        if e.round {
            let d = e.molecule.dim().max(0) as usize;
            index.by_boundary.entry((d, e.boundary_keys.last().into_iter().copied().collect())).or_default().push(i);
        }
    }

    /// Pastings and atoms between `i` and every indexed molecule.
    fn combine(&self, index: &Index, i: usize) -> Vec<Molecule> {
        let max = self.bounds.max_elements;
        let e = &self.entries[i];
        let m = &e.molecule;
        let mut out = Vec::new();
        for (k, keys) in e.boundary_keys.iter().enumerate() {
            for &j in index.by_input.get(&(k, keys[1])).into_iter().flatten() {
                let n = &self.entries[j].molecule;
                if m.len() + n.len() - keys[1].1 <= max {
                    out.extend(molecule::paste(m, n, k).ok());
                }
            }
            for &j in index.by_output.get(&(k, keys[0])).into_iter().flatten() {
                let n = &self.entries[j].molecule;
                if j != i && m.len() + n.len() - keys[0].1 <= max {
                    out.extend(molecule::paste(n, m, k).ok());
                }
            }
        }
        let d = m.dim().max(0) as usize;
        if e.round && d < self.bounds.max_dim {
            let key = (d, e.boundary_keys.last().into_iter().copied().collect::<Vec<_>>());
            let shared = if d == 0 { 0 } else { e.boundary_keys[d - 1][0].1 + e.boundary_keys[d - 1][1].1 - boundary_meet(e) };
            for &j in index.by_boundary.get(&key).into_iter().flatten() {
                let n = &self.entries[j].molecule;
                if m.len() + n.len() - shared + 1 > max {
                    continue;
                }
                out.extend(molecule::atom(m, n).ok());
                if j != i {
                    out.extend(molecule::atom(n, m).ok());
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn molecules(&self) -> impl Iterator<Item = &Molecule> {
        self.entries.iter().map(|e| &e.molecule)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Molecule> {
        self.molecules().filter(|m| m.is_atom())
    }

    pub fn round(&self) -> impl Iterator<Item = &Molecule> {
        self.entries.iter().filter(|e| e.round).map(|e| &e.molecule)
    }

    pub fn carriers(&self) -> Vec<Arc<OgPoset>> {
        self.molecules().map(|m| m.carrier().clone()).collect()
    }
}

/// `|∂ⁿ⁻¹⁻ ∩ ∂ⁿ⁻¹⁺|` of a round molecule, which is `|∂ⁿ⁻²|`.
fn boundary_meet(e: &Entry) -> usize {
    let d = e.molecule.dim() as usize;
    let mut m = e.molecule.boundary_set(d - 1, Sign::Minus);
    m.intersect_with(&e.molecule.boundary_set(d - 1, Sign::Plus));
    m.count_ones(..)
}

/// The two-dimensional molecule whose boundaries meet away from its
/// 0-boundary: a triangle cell followed by a parallel 2-globe.
pub fn not_round_example() -> Molecule {
    let a = arrow();
    let path = molecule::paste(&a, &a, 0).expect("arrows paste");
    let tri = molecule::atom(&a, &path).expect("parallel");
    molecule::paste(&tri, &globe(2), 0).expect("0-boundaries match")
}

/// Named shapes up to dimension 4, as `(name, carrier)`.
pub fn named_shapes() -> Vec<(String, Arc<OgPoset>)> {
    let mut out = vec![("point".to_string(), Arc::new(OgPoset::point())), ("arrow".to_string(), arrow().carrier().clone())];
    for n in 0..=4 {
        out.push((format!("globe:{n}"), globe(n).carrier().clone()));
        out.push((format!("simplex:{n}"), simplex(n)));
        out.push((format!("cube:{n}"), cube(n)));
    }
    out
}
