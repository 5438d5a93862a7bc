//! Cells of the free merge complex, their pasting and globular
//! composition, and the bounded closure of a marking.

use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::{json, Value};

use super::directed::{atom_iso, Diagram, DirectedComplex, Extensions};
use super::inflate::InflateView;
use super::marked::MarkedComplex;
use super::ComplexError;
use crate::construct::partial_cylinder;
use crate::iso;
use crate::molecule::{self, Clause, Molecule};
use crate::morphism::{co_merger, factor_cl, globe_subdivision, is_comap, pullback_collapse_subdivision, GradedFunction, SclMorphism};
use crate::ogposet::{glue, ElemRef, ElemSet, OgPoset, Sign};

/// `[u, s]`: a round diagram `u` of shape `P′` together with the comap
/// `s : P′ → U` of a subdivision. A cell when `U` is an atom.
#[derive(Clone, Debug)]
pub struct MergeCell {
    diagram: Diagram,
    sub: GradedFunction,
}

fn recognize(p: &OgPoset) -> Result<Molecule, ComplexError> {
    molecule::recognize_molecule(p).ok_or(ComplexError::NotRound)
}

impl MergeCell {
    pub fn new(diagram: Diagram, sub: GradedFunction) -> Result<Self, ComplexError> {
        if sub.source().as_ref() != diagram.shape().as_ref() {
            return Err(ComplexError::ShapeMismatch("subdivision does not start at the diagram's shape".into()));
        }
        if !is_comap(&sub) {
            return Err(ComplexError::ShapeMismatch("not the comap of a subdivision".into()));
        }
        Ok(MergeCell::new_unchecked(diagram, sub))
    }

    pub(crate) fn new_unchecked(diagram: Diagram, sub: GradedFunction) -> Self {
        let sub = GradedFunction::new_unchecked(diagram.shape().clone(), sub.target().clone(), sub.map().to_vec());
        MergeCell { diagram, sub }
    }

    /// `[u, id]` for a round diagram `u`.
    pub fn from_diagram(diagram: Diagram) -> Self {
        let sub = GradedFunction::identity(diagram.shape().clone());
        MergeCell { diagram, sub }
    }

    pub fn diagram(&self) -> &Diagram {
        &self.diagram
    }

    pub fn sigma(&self) -> &GradedFunction {
        &self.sub
    }

    pub fn shape(&self) -> &Arc<OgPoset> {
        self.sub.target()
    }

    pub fn dim(&self) -> isize {
        self.shape().dim()
    }

    pub fn is_cell(&self) -> bool {
        self.shape().greatest().is_some()
    }

    /// `∂ⁿ^α [u, s] = [u|, s|]`.
    pub fn boundary(&self, n: usize, sign: Sign) -> MergeCell {
        let u = self.shape();
        let bu = u.boundary(&u.full_set(), n, sign);
        let pre = self.sub.preimage(&bu);
        let (d, _) = self.diagram.restrict(&pre);
        let (r, _, _) = self.sub.restrict(&pre, &bu).expect("comaps preserve boundaries");
        MergeCell::new_unchecked(d, r)
    }

    /// `[u, s] · t = [u, t ∘ s]` for a further subdivision with comap `t`.
    pub fn act_subdivision(&self, t: &GradedFunction) -> Result<MergeCell, ComplexError> {
        if t.source().as_ref() != self.shape().as_ref() {
            return Err(ComplexError::ShapeMismatch("subdivision does not start at the cell's shape".into()));
        }
        Ok(MergeCell::new_unchecked(self.diagram.clone(), self.sub.then(t)))
    }

    /// The action of a subdivision-collapse span ending at the shape.
    /// Degenerate cells are taken from `view`, which is needed whenever
    /// the pulled-back collapse is not an isomorphism.
    pub fn act(&self, m: &SclMorphism, view: Option<&mut InflateView>) -> Result<MergeCell, ComplexError> {
        if m.codomain().as_ref() != self.shape().as_ref() {
            return Err(ComplexError::ShapeMismatch("span does not end at the cell's shape".into()));
        }
        let post = GradedFunction::new_unchecked(m.middle().clone(), self.shape().clone(), m.post.map().to_vec());
        let pb = pullback_collapse_subdivision(&post, &self.sub)?;
        let new_sub = pb.comap.then(&m.sub);
        let diagram = if pb.collapse.is_isomorphism() {
            self.diagram.along(&pb.collapse)
        } else {
            let view = view.ok_or_else(|| ComplexError::ShapeMismatch("degenerate cells need an inflate view".into()))?;
            let cl = factor_cl(&pb.collapse)?;
            let restricted = self.diagram.along(&cl.embedding);
            view.act(&restricted, &cl.collapse)?
        };
        Ok(MergeCell::new_unchecked(diagram, new_sub))
    }

    /// `[u, s] ∘ₖ [v, t]`, defined when the matching boundaries agree.
    pub fn paste(&self, other: &MergeCell, k: usize) -> Result<MergeCell, ComplexError> {
        let (u1, u2) = (self.shape(), other.shape());
        let m1 = recognize(u1)?;
        let m2 = recognize(u2)?;
        let mm = molecule::paste(&m1, &m2, k).map_err(|_| ComplexError::PasteUndefined)?;
        let Clause::Paste { right_emb, .. } = mm.clause() else {
            return Err(ComplexError::PasteUndefined);
        };
        let (p1, p2) = (self.diagram.shape(), other.diagram.shape());
        let b1 = p1.boundary(&p1.full_set(), k, Sign::Plus);
        let b2 = p2.boundary(&p2.full_set(), k, Sign::Minus);
        let (s1, o1) = p1.sub_poset(&b1);
        let (s2, o2) = p2.sub_poset(&b2);
        let allow = |y: ElemRef, x: ElemRef| {
            let (y, x) = (o2[s2.flat(y)], o1[s1.flat(x)]);
            right_emb[u2.flat(other.sub.apply(y))] == self.sub.apply(x) && other.diagram.at(y) == self.diagram.at(x)
        };
        let phi = iso::find_isomorphism_where(&s2, &s1, &allow).ok_or(ComplexError::GlueMismatch)?;
        let mut shared = vec![None; p2.len()];
        for (i, &x) in phi.iter().enumerate() {
            shared[p2.flat(o2[i])] = Some(o1[s1.flat(x)]);
        }
        let (glued, emb) = glue(p1, p2, &shared);
        let glued = Arc::new(glued);
        let mut assign = vec![self.diagram.at(ElemRef::new(0, 0)); glued.len()];
        let mut map = vec![ElemRef::new(0, 0); glued.len()];
        for x in p1.elements() {
            assign[glued.flat(x)] = self.diagram.at(x);
            map[glued.flat(x)] = self.sub.apply(x);
        }
        for y in p2.elements() {
            let z = glued.flat(emb[p2.flat(y)]);
            assign[z] = other.diagram.at(y);
            map[z] = right_emb[u2.flat(other.sub.apply(y))];
        }
        let sub = GradedFunction::new_unchecked(glued.clone(), mm.carrier().clone(), map);
        Ok(MergeCell { diagram: Diagram::new_unchecked(glued, assign), sub })
    }

    /// The merged cell, of shape `mrg U`.
    pub fn merger(&self) -> Result<MergeCell, ComplexError> {
        let cm = co_merger(&recognize(self.shape())?)?;
        Ok(MergeCell::new_unchecked(self.diagram.clone(), self.sub.then(&cm)))
    }

    /// The globular composite, of shape `Oⁿ`.
    pub fn globular_composite(&self) -> Result<MergeCell, ComplexError> {
        let g = globe_subdivision(&recognize(self.shape())?)?;
        Ok(MergeCell::new_unchecked(self.diagram.clone(), self.sub.then(&g)))
    }

    /// Hash of an isomorphism invariant of the cell.
    pub fn key(&self) -> u64 {
        let p = self.diagram.shape();
        let mut profile: Vec<_> = p.elements().map(|x| (self.diagram.at(x), x.dim, self.sub.apply(x).dim)).collect();
        profile.sort();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        iso::invariant_hash(self.shape()).hash(&mut h);
        profile.hash(&mut h);
        h.finish()
    }

    pub fn to_json(&self) -> Value {
        json!({"diagram": self.diagram.to_json(), "sub": self.sub.to_json()})
    }
}

impl PartialEq for MergeCell {
    fn eq(&self, other: &Self) -> bool {
        let (u1, u2) = (self.shape(), other.shape());
        let (p1, p2) = (self.diagram.shape(), other.diagram.shape());
        if u1.len() != u2.len() || p1.len() != p2.len() {
            return false;
        }
        let psi: Arc<Vec<ElemRef>> = if u1 == u2 {
            Arc::new(u1.elements().collect())
        } else {
            match atom_iso(u1, u2) {
                Some(psi) => psi,
                None => return false,
            }
        };
        let allow = |x: ElemRef, y: ElemRef| {
            psi[u1.flat(self.sub.apply(x))] == other.sub.apply(y) && self.diagram.at(x) == other.diagram.at(y)
        };
        iso::find_isomorphism_where(p1, p2, &allow).is_some()
    }
}

/// `ε[u, s]`, the unit on a merge diagram.
pub fn unit(c: &MergeCell, view: Option<&mut InflateView>) -> Result<MergeCell, ComplexError> {
    let u = c.shape();
    let cyl = partial_cylinder(u, &u.full_boundary(&u.full_set())).map_err(|_| ComplexError::NotRound)?;
    let proj = cyl.projection();
    let proj = GradedFunction::new_unchecked(proj.source().clone(), u.clone(), proj.map().to_vec());
    c.act(&SclMorphism::from_collapse(proj), view)
}

/// `R_m c = c ∘ₘ ε(∂ᵐ⁺ c)`.
pub fn rounding(c: &MergeCell, m: usize, mut view: Option<&mut InflateView>) -> Result<MergeCell, ComplexError> {
    let e = unit(&c.boundary(m, Sign::Plus), view.as_deref_mut())?;
    c.paste(&e, m)
}

/// `u *ₖ v = glcom(R_{n−1} ⋯ R_{k+1}(u ∘ₖ v))`.
pub fn globular_star(u: &MergeCell, v: &MergeCell, k: usize, mut view: Option<&mut InflateView>) -> Result<MergeCell, ComplexError> {
    let n = u.dim().max(v.dim()).max(0) as usize;
    let mut w = u.paste(v, k)?;
    for m in k + 1..n {
        w = rounding(&w, m, view.as_deref_mut())?;
    }
    w.globular_composite()
}

const COMAP_CAP: usize = 4096;

/// Comaps `P → Q` of subdivisions, found by search over order-preserving
/// functions that do not lower dimension.
pub fn comaps_between(p: &Arc<OgPoset>, q: &Arc<OgPoset>) -> Vec<GradedFunction> {
    if p.dim() != q.dim() || p.len() < q.len() || p.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<ElemRef> = p.elements().collect();
    order.sort_by(|a, b| b.dim.cmp(&a.dim).then(a.index.cmp(&b.index)));
    let closures: Vec<ElemSet> = q.elements().map(|z| q.cl(z)).collect();
    let mut assign: Vec<Option<ElemRef>> = vec![None; p.len()];
    let mut out = Vec::new();
    comap_search(p, q, &order, 0, &closures, &mut assign, &mut out);
    out
}

fn comap_search(
    p: &Arc<OgPoset>,
    q: &Arc<OgPoset>,
    order: &[ElemRef],
    i: usize,
    closures: &[ElemSet],
    assign: &mut Vec<Option<ElemRef>>,
    out: &mut Vec<GradedFunction>,
) {
    if out.len() >= COMAP_CAP {
        return;
    }
    let Some(&x) = order.get(i) else {
        let map = assign.iter().map(|a| a.expect("complete")).collect();
        let f = GradedFunction::new_unchecked(p.clone(), q.clone(), map);
        if f.is_surjective() && is_comap(&f) {
            out.push(f);
        }
        return;
    };
    let mut allowed = q.full_set();
    for c in p.all_cofaces(x) {
        let fc = assign[p.flat(c)].expect("cofaces come first");
        allowed.intersect_with(&closures[q.flat(fc)]);
    }
    let top_dim = p.dim() as usize;
    for z in q.members(&allowed).collect::<Vec<_>>() {
        if z.dim < x.dim || (x.dim == top_dim && z.dim != top_dim) {
            continue;
        }
        assign[p.flat(x)] = Some(z);
        comap_search(p, q, order, i + 1, closures, assign, out);
    }
    assign[p.flat(x)] = None;
}

const DIAGRAM_CAP: usize = 10_000;

/// Merge cells of shape `u` whose subdivided shape is one of `candidates`
/// with at most `bound` elements, without repetition.
pub fn cells_of_shape(x: &DirectedComplex, u: &Arc<OgPoset>, candidates: &[Arc<OgPoset>], bound: usize) -> Vec<MergeCell> {
    let mut out: Vec<MergeCell> = Vec::new();
    let mut by_key: HashMap<u64, Vec<usize>> = HashMap::new();
    for p in candidates.iter().filter(|p| p.len() <= bound) {
        let comaps = comaps_between(p, u);
        if comaps.is_empty() {
            continue;
        }
        let diagrams = Extensions::new(x, p).run(&vec![None; p.len()], DIAGRAM_CAP);
        for assign in diagrams {
            let d = Diagram::new_unchecked(p.clone(), assign);
            for s in &comaps {
                let c = MergeCell::new_unchecked(d.clone(), s.clone());
                let slot = by_key.entry(c.key()).or_default();
                if slot.iter().any(|&j| out[j] == c) {
                    continue;
                }
                slot.push(out.len());
                out.push(c);
            }
        }
    }
    out
}

/// A finite universe of merge cells with the instances of the two
/// closure rules among them.
#[derive(Clone, Debug)]
pub struct ClosureUniverse {
    pub cells: Vec<MergeCell>,
    /// For each cell, the lists of constituent cells of its composite
    /// factorisations.
    pub factorisations: Vec<Vec<Vec<usize>>>,
    /// `(i, j)`: cell `i` is cell `j` under a further subdivision.
    pub refinements: Vec<(usize, usize)>,
    by_key: HashMap<u64, Vec<usize>>,
}

impl ClosureUniverse {
    /// All merge cells over the given atom shapes whose subdivided shape
    /// is one of `rounds` with at most `bound` elements.
    pub fn build(x: &DirectedComplex, atoms: &[Arc<OgPoset>], rounds: &[Arc<OgPoset>], bound: usize) -> Self {
        let mut cells = Vec::new();
        for u in atoms {
            cells.extend(cells_of_shape(x, u, rounds, bound));
        }
        let mut by_key: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            by_key.entry(c.key()).or_default().push(i);
        }
        let mut universe = ClosureUniverse { cells, factorisations: Vec::new(), refinements: Vec::new(), by_key };

        let mut comap_cache: HashMap<(u64, u64), Vec<GradedFunction>> = HashMap::new();
        let mut comaps = |p: &Arc<OgPoset>, q: &Arc<OgPoset>| {
            comap_cache.entry((p.fingerprint(), q.fingerprint())).or_insert_with(|| comaps_between(p, q)).clone()
        };

        let mut factorisations = Vec::with_capacity(universe.cells.len());
        for (i, c) in universe.cells.iter().enumerate() {
            let p = c.diagram.shape();
            let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
            for v in rounds.iter().filter(|v| v.len() <= p.len() && v.dim() == p.dim()) {
                let outer = comaps(v, c.shape());
                if outer.is_empty() {
                    continue;
                }
                for sv in comaps(p, v) {
                    for s in &outer {
                        if sv.then(s).map() != c.sub.map() {
                            continue;
                        }
                        if let Some(parts) = universe.constituents(c, &sv) {
                            if !parts.contains(&i) {
                                found.insert(parts);
                            }
                        }
                    }
                }
            }
            factorisations.push(found.into_iter().collect());
        }
        universe.factorisations = factorisations;

        let mut refinements = BTreeSet::new();
        for (j, c) in universe.cells.iter().enumerate() {
            for u in atoms.iter().filter(|u| u.len() <= c.shape().len()) {
                for t in comaps(c.shape(), u) {
                    let coarse = c.act_subdivision(&t).expect("comap starts at the shape");
                    if let Some(i) = universe.index_of(&coarse) {
                        if i != j {
                            refinements.insert((i, j));
                        }
                    }
                }
            }
        }
        universe.refinements = refinements.into_iter().collect();
        universe
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, c: &MergeCell) -> Option<usize> {
        self.by_key.get(&c.key())?.iter().copied().find(|&i| self.cells[i] == *c)
    }

    /// The cells `[w|, S_v|]` over the top elements of `V`, for a comap
    /// `S_v : P′ → V`.
    fn constituents(&self, c: &MergeCell, sv: &GradedFunction) -> Option<Vec<usize>> {
        let v = sv.target();
        let mut parts = Vec::new();
        for y in v.maximal(&v.full_set()) {
            let cly = v.cl(y);
            let pre = sv.preimage(&cly);
            let (d, _) = c.diagram.restrict(&pre);
            let (r, _, _) = sv.restrict(&pre, &cly)?;
            parts.push(self.index_of(&MergeCell::new_unchecked(d, r))?);
        }
        parts.sort_unstable();
        parts.dedup();
        Some(parts)
    }

    /// `[c, id]` for every marked cell of `x`, where present.
    pub fn seed_from_marking(&self, x: &MarkedComplex) -> Vec<usize> {
        x.marked()
            .iter()
            .filter_map(|&c| self.index_of(&MergeCell::from_diagram(x.base.cell_diagram(c))))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    pub seed: BTreeSet<usize>,
    pub members: BTreeSet<usize>,
    pub rounds: usize,
}

impl ClosureResult {
    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    /// Whether the members contain the seed and are closed under both
    /// rules.
    pub fn verify(&self, universe: &ClosureUniverse) -> bool {
        if !self.seed.is_subset(&self.members) {
            return false;
        }
        let rule1 = universe.factorisations.iter().enumerate().all(|(i, fs)| {
            self.members.contains(&i) || !fs.iter().any(|f| f.iter().all(|j| self.members.contains(j)))
        });
        let rule2 = universe.refinements.iter().all(|&(i, j)| !self.members.contains(&i) || self.members.contains(&j));
        rule1 && rule2
    }
}

/// The least subset of the universe containing `seed` and closed under
/// composites of members and under removing subdivisions.
pub fn marked_closure(universe: &ClosureUniverse, seed: &[usize]) -> ClosureResult {
    let seed: BTreeSet<usize> = seed.iter().copied().collect();
    let mut members = seed.clone();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut added = Vec::new();
        for (i, fs) in universe.factorisations.iter().enumerate() {
            if !members.contains(&i) && fs.iter().any(|f| f.iter().all(|j| members.contains(j))) {
                added.push(i);
            }
        }
        for &(i, j) in &universe.refinements {
            if members.contains(&i) && !members.contains(&j) {
                added.push(j);
            }
        }
        if added.is_empty() {
            break;
        }
        members.extend(added);
    }
    ClosureResult { seed, members, rounds }
}
