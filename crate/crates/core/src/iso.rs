//! Backtracking isomorphism search with colour-refinement pruning.

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use crate::ogposet::{ElemRef, OgPoset, Sign};

const ROUNDS: usize = 3;

fn hash_of<T: Hash>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

/// Per-element colours after a few rounds of refinement over signed
/// face and coface relations. Indexed by flat position.
pub fn colours(p: &OgPoset) -> Vec<u64> {
    let mut col: Vec<u64> = p
        .elements()
        .map(|x| {
            let f = p.face_record(x);
            let c = p.coface_record(x);
            hash_of(&(x.dim, f.input.len(), f.output.len(), c.input.len(), c.output.len()))
        })
        .collect();
    for _ in 0..ROUNDS {
        let next: Vec<u64> = p
            .elements()
            .map(|x| {
                let mut nb: Vec<(u8, u64)> = Vec::new();
                for (tag, sign) in [(0u8, Sign::Minus), (1, Sign::Plus)] {
                    nb.extend(p.faces(x, sign).map(|y| (tag, col[p.flat(y)])));
                    if x.dim + 1 < p.num_strata() {
                        nb.extend(p.cofaces(x, sign).map(|y| (tag + 2, col[p.flat(y)])));
                    }
                }
                nb.sort_unstable();
                hash_of(&(col[p.flat(x)], nb))
            })
            .collect();
        col = next;
    }
    col
}

/// An isomorphism invariant of the whole poset.
pub fn invariant_hash(p: &OgPoset) -> u64 {
    let mut c = colours(p);
    c.sort_unstable();
    hash_of(&(p.stratum_sizes(), c))
}

/// Relation of a neighbour `w` to `x`: either `w` is a face of `x` with the
/// given sign, or `x` is a face of `w` with the given sign.
#[derive(Clone, Copy)]
enum Rel {
    Face(Sign),
    Coface(Sign),
}

fn neighbours(p: &OgPoset, x: ElemRef) -> impl Iterator<Item = (ElemRef, Rel)> + '_ {
    let down = Sign::BOTH.into_iter().flat_map(move |s| p.faces(x, s).map(move |w| (w, Rel::Face(s))));
    let up = Sign::BOTH.into_iter().flat_map(move |s| {
        let it: Box<dyn Iterator<Item = ElemRef>> =
            if x.dim + 1 < p.num_strata() { Box::new(p.cofaces(x, s)) } else { Box::new(std::iter::empty()) };
        it.map(move |w| (w, Rel::Coface(s)))
    });
    down.chain(up)
}

fn rel_holds(q: &OgPoset, y: ElemRef, w: ElemRef, rel: Rel) -> bool {
    match rel {
        Rel::Face(s) => q.face_sign(y, w) == Some(s),
        Rel::Coface(s) => q.face_sign(w, y) == Some(s),
    }
}

struct Search<'a> {
    p: &'a OgPoset,
    q: &'a OgPoset,
    pc: Vec<u64>,
    qc: Vec<u64>,
    order: Vec<ElemRef>,
    anchor: Vec<Option<(ElemRef, Rel)>>,
    map: Vec<Option<ElemRef>>,
    used: Vec<bool>,
    allow: &'a dyn Fn(ElemRef, ElemRef) -> bool,
    limit: usize,
    found: Vec<Vec<ElemRef>>,
}

impl Search<'_> {
    fn candidates(&self, i: usize) -> Vec<ElemRef> {
        let x = self.order[i];
        match self.anchor[i] {
            Some((w, rel)) => {
                let mw = self.map[self.p.flat(w)].expect("anchor assigned first");
                // w relates to x as `rel`, so x relates to w inversely
                match rel {
                    Rel::Face(s) => self.q.cofaces(mw, s).collect(),
                    Rel::Coface(s) => self.q.faces(mw, s).collect(),
                }
            }
            None => self.q.elements_of_dim(x.dim).collect(),
        }
    }

    fn run(&mut self, i: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if i == self.order.len() {
            self.found.push(self.map.iter().map(|m| m.unwrap()).collect());
            return;
        }
        let x = self.order[i];
        let xc = self.pc[self.p.flat(x)];
        for y in self.candidates(i) {
            let fy = self.q.flat(y);
            if self.used[fy] || self.qc[fy] != xc || !(self.allow)(x, y) {
                continue;
            }
            let ok = neighbours(self.p, x).all(|(w, rel)| match self.map[self.p.flat(w)] {
                Some(mw) => rel_holds(self.q, y, mw, rel),
                None => true,
            });
            if !ok {
                continue;
            }
            self.map[self.p.flat(x)] = Some(y);
            self.used[fy] = true;
            self.run(i + 1);
            self.map[self.p.flat(x)] = None;
            self.used[fy] = false;
            if self.found.len() >= self.limit {
                return;
            }
        }
    }
}

fn search_order(p: &OgPoset, pc: &[u64]) -> (Vec<ElemRef>, Vec<Option<(ElemRef, Rel)>>) {
    let mut freq = std::collections::HashMap::new();
    for &c in pc {
        *freq.entry(c).or_insert(0usize) += 1;
    }
    let mut seeds: Vec<ElemRef> = p.elements().collect();
    seeds.sort_by_key(|&x| (freq[&pc[p.flat(x)]], std::cmp::Reverse(x.dim), x.index));
    let mut seen = vec![false; p.len()];
    let mut order = Vec::with_capacity(p.len());
    let mut anchor = Vec::with_capacity(p.len());
    for s in seeds {
        if seen[p.flat(s)] {
            continue;
        }
        seen[p.flat(s)] = true;
        let mut queue = VecDeque::from([(s, None)]);
        while let Some((x, a)) = queue.pop_front() {
            order.push(x);
            anchor.push(a);
            for (w, rel) in neighbours(p, x) {
                if !seen[p.flat(w)] {
                    seen[p.flat(w)] = true;
                    // x relates to w as the inverse of rel
                    let inv = match rel {
                        Rel::Face(s) => Rel::Coface(s),
                        Rel::Coface(s) => Rel::Face(s),
                    };
                    queue.push_back((w, Some((x, inv))));
                }
            }
        }
    }
    (order, anchor)
}

/// All isomorphisms `p → q` satisfying `allow`, up to `limit` of them.
/// Each result is indexed by flat position in `p`.
pub fn isomorphisms_where(
    p: &OgPoset,
    q: &OgPoset,
    allow: &dyn Fn(ElemRef, ElemRef) -> bool,
    limit: usize,
) -> Vec<Vec<ElemRef>> {
    if p.stratum_sizes() != q.stratum_sizes() {
        return Vec::new();
    }
    let pc = colours(p);
    let qc = colours(q);
    let mut a = pc.clone();
    let mut b = qc.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Vec::new();
    }
    let (order, anchor) = search_order(p, &pc);
    let mut s = Search {
        p,
        q,
        pc,
        qc,
        order,
        anchor,
        map: vec![None; p.len()],
        used: vec![false; q.len()],
        allow,
        limit,
        found: Vec::new(),
    };
    s.run(0);
    s.found
}

pub fn find_isomorphism(p: &OgPoset, q: &OgPoset) -> Option<Vec<ElemRef>> {
    isomorphisms_where(p, q, &|_, _| true, 1).pop()
}

pub fn find_isomorphism_where(p: &OgPoset, q: &OgPoset, allow: &dyn Fn(ElemRef, ElemRef) -> bool) -> Option<Vec<ElemRef>> {
    isomorphisms_where(p, q, allow, 1).pop()
}

pub fn all_isomorphisms(p: &OgPoset, q: &OgPoset, limit: usize) -> Vec<Vec<ElemRef>> {
    isomorphisms_where(p, q, &|_, _| true, limit)
}

pub fn are_isomorphic(p: &OgPoset, q: &OgPoset) -> bool {
    find_isomorphism(p, q).is_some()
}
