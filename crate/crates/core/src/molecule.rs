//! Molecules: construction, recognition, submolecules, substitution,
//! mergers and layerings.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::iso;
use crate::morphism::GradedFunction;
use crate::ogposet::{add_element, glue, ElemRef, ElemSet, OgError, OgPoset, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoleculeError {
    #[error("no isomorphism between the boundaries to be glued")]
    NoBoundaryIso,
    #[error("not a submolecule inclusion")]
    NotSubmolecule,
    #[error("molecule is not round")]
    NotRound,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(isize, isize),
    #[error("submolecule is not rewritable")]
    NotRewritable,
    #[error("boundaries of the replacement do not match")]
    BoundaryMismatch,
    #[error("not a molecule")]
    NotAMolecule,
    #[error(transparent)]
    Og(#[from] OgError),
    #[error("malformed certificate: {0}")]
    Parse(String),
}

/// A molecule together with the clause tree that builds it.
#[derive(Clone, Debug)]
pub struct Molecule {
    carrier: Arc<OgPoset>,
    clause: Clause,
}

#[derive(Clone, Debug)]
pub enum Clause {
    Point,
    /// `left ∘ₖ right`. The embeddings are indexed by the flat position of
    /// elements in the children.
    Paste { k: usize, left: Arc<Molecule>, right: Arc<Molecule>, left_emb: Vec<ElemRef>, right_emb: Vec<ElemRef> },
    /// `input ⇒ output`.
    Atom { input: Arc<Molecule>, output: Arc<Molecule>, input_emb: Vec<ElemRef>, output_emb: Vec<ElemRef> },
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.carrier == other.carrier
    }
}

impl Molecule {
    pub fn carrier(&self) -> &Arc<OgPoset> {
        &self.carrier
    }

    pub fn clause(&self) -> &Clause {
        &self.clause
    }

    pub fn dim(&self) -> isize {
        self.carrier.dim()
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn is_round(&self) -> bool {
        self.carrier.is_round(&self.carrier.full_set())
    }

    pub fn is_atom(&self) -> bool {
        self.carrier.greatest().is_some()
    }

    pub fn top(&self) -> Option<ElemRef> {
        self.carrier.greatest()
    }

    /// `∂ⁿ^α` of the whole molecule, as a subset.
    pub fn boundary_set(&self, n: usize, sign: Sign) -> ElemSet {
        self.carrier.boundary(&self.carrier.full_set(), n, sign)
    }

    /// `∂ⁿ^α` as a molecule, with the inclusion into this carrier.
    pub fn boundary(&self, n: usize, sign: Sign) -> (Molecule, Vec<ElemRef>) {
        let set = self.boundary_set(n, sign);
        let (sub, origin) = self.carrier.sub_poset(&set);
        let m = recognize_molecule(&sub).expect("boundaries of molecules are molecules");
        (m, origin)
    }

    /// Inclusion of a closed subset that is a molecule.
    pub fn submolecule(&self, set: &ElemSet) -> Option<(Molecule, Vec<ElemRef>)> {
        let (sub, origin) = self.carrier.sub_poset(set);
        recognize_molecule(&sub).map(|m| (m, origin))
    }

    /// Rebuilds the carrier from the clause tree alone.
    pub fn replay(&self) -> Result<Molecule, MoleculeError> {
        match &self.clause {
            Clause::Point => Ok(point()),
            Clause::Paste { k, left, right, .. } => paste(&left.replay()?, &right.replay()?, *k),
            Clause::Atom { input, output, .. } => atom(&input.replay()?, &output.replay()?),
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.clause {
            Clause::Point => json!({"clause": "point"}),
            Clause::Paste { k, left, right, .. } => {
                json!({"clause": "paste", "k": k, "left": left.to_json(), "right": right.to_json()})
            }
            Clause::Atom { input, output, .. } => {
                json!({"clause": "atom", "input": input.to_json(), "output": output.to_json()})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Molecule, MoleculeError> {
        let clause = v.get("clause").and_then(Value::as_str).ok_or_else(|| MoleculeError::Parse("missing clause".into()))?;
        let child = |key: &str| -> Result<Molecule, MoleculeError> {
            Molecule::from_json(v.get(key).ok_or_else(|| MoleculeError::Parse(format!("missing {key}")))?)
        };
        match clause {
            "point" => Ok(point()),
            "paste" => {
                let k = v.get("k").and_then(Value::as_u64).ok_or_else(|| MoleculeError::Parse("missing k".into()))?;
                paste(&child("left")?, &child("right")?, k as usize)
            }
            "atom" => atom(&child("input")?, &child("output")?),
            other => Err(MoleculeError::Parse(format!("unknown clause {other}"))),
        }
    }
}

pub fn point() -> Molecule {
    Molecule { carrier: Arc::new(OgPoset::point()), clause: Clause::Point }
}

pub fn arrow() -> Molecule {
    globe(1)
}

/// The n-globe. Element `(k, 0)` is `k⁻`, `(k, 1)` is `k⁺` and `(n, 0)` is
/// the top.
pub fn globe(n: usize) -> Molecule {
    let mut g = point();
    for _ in 0..n {
        g = atom(&g, &g).expect("globes are well formed");
    }
    g
}

fn lookup_table(origin: &[ElemRef], p: &OgPoset) -> Vec<Option<usize>> {
    let mut t = vec![None; p.len()];
    for (i, &x) in origin.iter().enumerate() {
        t[p.flat(x)] = Some(i);
    }
    t
}

/// Glues `v` onto `u` along an isomorphism from a closed subset of `v`
/// (given as `v_part`) to a closed subset of `u` (`u_part`).
fn glue_along(u: &OgPoset, u_part: &ElemSet, v: &OgPoset, v_part: &ElemSet) -> Option<(OgPoset, Vec<ElemRef>)> {
    let (bu, ou) = u.sub_poset(u_part);
    let (bv, ov) = v.sub_poset(v_part);
    let phi = iso::find_isomorphism(&bv, &bu)?;
    let mut shared = vec![None; v.len()];
    for (i, &y) in phi.iter().enumerate() {
        shared[v.flat(ov[i])] = Some(ou[bu.flat(y)]);
    }
    Some(glue(u, v, &shared))
}

/// `U ∘ₖ V`.
pub fn paste(u: &Molecule, v: &Molecule, k: usize) -> Result<Molecule, MoleculeError> {
    let bu = u.boundary_set(k, Sign::Plus);
    let bv = v.boundary_set(k, Sign::Minus);
    let (carrier, right_emb) = glue_along(&u.carrier, &bu, &v.carrier, &bv).ok_or(MoleculeError::NoBoundaryIso)?;
    let left_emb: Vec<ElemRef> = u.carrier.elements().collect();
    Ok(Molecule {
        carrier: Arc::new(carrier),
        clause: Clause::Paste { k, left: Arc::new(u.clone()), right: Arc::new(v.clone()), left_emb, right_emb },
    })
}

/// `U ∘ V` with `k = min(dim U, dim V) − 1`.
pub fn paste_default(u: &Molecule, v: &Molecule) -> Result<Molecule, MoleculeError> {
    let k = u.dim().min(v.dim()) - 1;
    if k < 0 {
        return Err(MoleculeError::NoBoundaryIso);
    }
    paste(u, v, k as usize)
}

/// `U ⇒ V`.
pub fn atom(u: &Molecule, v: &Molecule) -> Result<Molecule, MoleculeError> {
    if u.dim() != v.dim() {
        return Err(MoleculeError::DimMismatch(u.dim(), v.dim()));
    }
    if !u.is_round() || !v.is_round() {
        return Err(MoleculeError::NotRound);
    }
    let n = u.dim() as usize;
    let up = &u.carrier;
    let vp = &v.carrier;
    let mut shared = vec![None; vp.len()];
    if n > 0 {
        // φ⁻ and φ⁺ must exist and agree on the common lower boundary
        for sign in Sign::BOTH {
            let bu = u.boundary_set(n - 1, sign);
            let bv = v.boundary_set(n - 1, sign);
            let (su, ou) = up.sub_poset(&bu);
            let (sv, ov) = vp.sub_poset(&bv);
            let phi = iso::find_isomorphism(&sv, &su).ok_or(MoleculeError::NoBoundaryIso)?;
            for (i, &y) in phi.iter().enumerate() {
                let target = ou[su.flat(y)];
                let slot = &mut shared[vp.flat(ov[i])];
                match slot {
                    Some(prev) if *prev != target => return Err(MoleculeError::NoBoundaryIso),
                    _ => *slot = Some(target),
                }
            }
        }
    }
    let (glued, output_emb) = glue(up, vp, &shared);
    let input_emb: Vec<ElemRef> = up.elements().collect();
    let ins: Vec<usize> = up.elements_of_dim(n).map(|x| x.index).collect();
    let outs: Vec<usize> = vp.elements_of_dim(n).map(|x| output_emb[vp.flat(x)].index).collect();
    let (carrier, _) = add_element(&glued, n + 1, ins, outs);
    Ok(Molecule {
        carrier: Arc::new(carrier),
        clause: Clause::Atom { input: Arc::new(u.clone()), output: Arc::new(v.clone()), input_emb, output_emb },
    })
}

/// The merger `∂⁻U ⇒ ∂⁺U` of a round molecule; the point is its own merger.
pub fn merger(u: &Molecule) -> Result<Molecule, MoleculeError> {
    if !u.is_round() {
        return Err(MoleculeError::NotRound);
    }
    if u.dim() <= 0 {
        return Ok(u.clone());
    }
    let n = u.dim() as usize - 1;
    let (i, _) = u.boundary(n, Sign::Minus);
    let (o, _) = u.boundary(n, Sign::Plus);
    atom(&i, &o)
}

// ----- recognition -----

#[derive(Debug)]
enum Node {
    Point,
    Paste { k: usize, left: (ElemSet, Arc<Node>), right: (ElemSet, Arc<Node>) },
    Atom { input: (ElemSet, Arc<Node>), output: (ElemSet, Arc<Node>) },
}

/// Decides whether a split `S = A ∪ B` is a pasting `A ∘ₖ B`.
pub fn is_paste_split(p: &OgPoset, s: &ElemSet, a: &ElemSet, b: &ElemSet, k: usize) -> bool {
    let mut un = a.clone();
    un.union_with(b);
    if &un != s {
        return false;
    }
    let mut meet = a.clone();
    meet.intersect_with(b);
    meet == p.boundary(a, k, Sign::Plus) && meet == p.boundary(b, k, Sign::Minus)
}

/// The `k`-flow on the maximal elements of dimension `> k` of `s`:
/// `edges[i]` lists `j` such that `i → j`.
pub fn flow_graph(p: &OgPoset, s: &ElemSet, k: usize) -> (Vec<ElemRef>, Vec<Vec<usize>>) {
    let _ = s;
    let m: Vec<ElemRef> = p.maximal(s).into_iter().filter(|x| x.dim > k).collect();
    let outs: Vec<ElemSet> = m.iter().map(|&x| p.boundary(&p.cl(x), k, Sign::Plus)).collect();
    let ins: Vec<ElemSet> = m.iter().map(|&x| p.boundary(&p.cl(x), k, Sign::Minus)).collect();
    let mut edges = vec![Vec::new(); m.len()];
    for i in 0..m.len() {
        for j in 0..m.len() {
            if i == j {
                continue;
            }
            let mut meet = outs[i].clone();
            meet.intersect_with(&ins[j]);
            if p.members(&meet).any(|z| z.dim == k) {
                edges[i].push(j);
            }
        }
    }
    (m, edges)
}

/// All nonempty proper down-sets of a flow graph, as index bitmasks, in
/// order of increasing size. Capped to keep the search finite.
fn down_sets(n: usize, edges: &[Vec<usize>], cap: usize) -> Vec<u64> {
    if n == 0 || n > 63 {
        return Vec::new();
    }
    let mut pred = vec![0u64; n];
    for (i, es) in edges.iter().enumerate() {
        for &j in es {
            pred[j] |= 1 << i;
        }
    }
    // transitive closure of predecessors
    let mut closed = pred.clone();
    loop {
        let mut changed = false;
        for j in 0..n {
            let mut acc = closed[j];
            for i in 0..n {
                if closed[j] & (1 << i) != 0 {
                    acc |= closed[i];
                }
            }
            if acc != closed[j] {
                closed[j] = acc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut seen: HashSet<u64> = HashSet::new();
    let mut frontier: Vec<u64> = Vec::new();
    for j in 0..n {
        let d = closed[j] | (1 << j);
        if seen.insert(d) {
            frontier.push(d);
        }
    }
    let mut out = Vec::new();
    let mut idx = 0;
    while idx < frontier.len() && out.len() < cap {
        let d = frontier[idx];
        idx += 1;
        if d != full {
            out.push(d);
        }
        for j in 0..n {
            if d & (1 << j) == 0 {
                let e = d | closed[j] | (1 << j);
                if seen.insert(e) {
                    frontier.push(e);
                }
            }
        }
    }
    out.sort_by_key(|d| (d.count_ones(), *d));
    out
}

const DOWN_SET_CAP: usize = 4096;

/// All pasting splits `S = A ∘ₖ B` obtained from down-sets of the `k`-flow.
pub fn paste_splits(p: &OgPoset, s: &ElemSet, k: usize) -> Vec<(ElemSet, ElemSet)> {
    let (m, edges) = flow_graph(p, s, k);
    if m.len() < 2 {
        return Vec::new();
    }
    let lower = p.boundary(s, k, Sign::Minus);
    let upper = p.boundary(s, k, Sign::Plus);
    let mut out = Vec::new();
    for d in down_sets(m.len(), &edges, DOWN_SET_CAP) {
        let mut a = lower.clone();
        let mut b = upper.clone();
        for (i, &x) in m.iter().enumerate() {
            if d & (1 << i) != 0 {
                a.union_with(&p.cl(x));
            } else {
                b.union_with(&p.cl(x));
            }
        }
        if is_paste_split(p, s, &a, &b, k) {
            out.push((a, b));
        }
    }
    out
}

/// Molecule recognition over subsets of one ambient poset, memoised per
/// instance.
pub struct Recognizer<'a> {
    p: &'a OgPoset,
    memo: HashMap<ElemSet, Option<Arc<Node>>>,
}

impl<'a> Recognizer<'a> {
    pub fn new(p: &'a OgPoset) -> Self {
        Recognizer { p, memo: HashMap::new() }
    }

    /// Whether the closed subset `s` is a molecule.
    pub fn is_molecule(&mut self, s: &ElemSet) -> bool {
        self.node(s).is_some()
    }

    fn node(&mut self, s: &ElemSet) -> Option<Arc<Node>> {
        if let Some(r) = self.memo.get(s) {
            return r.clone();
        }
        let r = self.compute(s);
        self.memo.insert(s.clone(), r.clone());
        r
    }

    fn compute(&mut self, s: &ElemSet) -> Option<Arc<Node>> {
        let p = self.p;
        let d = p.set_dim(s);
        if d < 0 {
            return None;
        }
        let maximal = p.maximal(s);
        if maximal.len() == 1 {
            let t = maximal[0];
            if t.dim == 0 {
                return Some(Arc::new(Node::Point));
            }
            let n = t.dim;
            let i = p.boundary(s, n - 1, Sign::Minus);
            let o = p.boundary(s, n - 1, Sign::Plus);
            if p.set_dim(&i) != n as isize - 1 || p.set_dim(&o) != n as isize - 1 {
                return None;
            }
            let mut all = i.clone();
            all.union_with(&o);
            all.insert(p.flat(t));
            if &all != s {
                return None;
            }
            let mut meet = i.clone();
            meet.intersect_with(&o);
            if meet != p.full_boundary(&i) {
                return None;
            }
            if n >= 2 {
                for sign in Sign::BOTH {
                    if p.boundary(&i, n - 2, sign) != p.boundary(&o, n - 2, sign) {
                        return None;
                    }
                }
            }
            if !p.is_round(&i) || !p.is_round(&o) {
                return None;
            }
            let ni = self.node(&i)?;
            let no = self.node(&o)?;
            return Some(Arc::new(Node::Atom { input: (i, ni), output: (o, no) }));
        }
        for k in (0..d as usize).rev() {
            for (a, b) in paste_splits(p, s, k) {
                let Some(na) = self.node(&a) else { continue };
                let Some(nb) = self.node(&b) else { continue };
                return Some(Arc::new(Node::Paste { k, left: (a, na), right: (b, nb) }));
            }
        }
        None
    }

    /// Recognises `s` and builds a certificate whose carrier is the
    /// extracted sub-poset of `s`.
    pub fn certify(&mut self, s: &ElemSet) -> Option<Molecule> {
        let node = self.node(s)?;
        Some(self.build(s, &node))
    }

    fn build(&self, s: &ElemSet, node: &Node) -> Molecule {
        let (carrier, origin) = self.p.sub_poset(s);
        let carrier = Arc::new(carrier);
        let table = lookup_table(&origin, self.p);
        let embed = |child: &ElemSet| -> Vec<ElemRef> {
            self.p.members(child).map(|x| carrier.elem(table[self.p.flat(x)].expect("child inside parent"))).collect()
        };
        let clause = match node {
            Node::Point => Clause::Point,
            Node::Paste { k, left, right } => Clause::Paste {
                k: *k,
                left: Arc::new(self.build(&left.0, &left.1)),
                right: Arc::new(self.build(&right.0, &right.1)),
                left_emb: embed(&left.0),
                right_emb: embed(&right.0),
            },
            Node::Atom { input, output } => Clause::Atom {
                input: Arc::new(self.build(&input.0, &input.1)),
                output: Arc::new(self.build(&output.0, &output.1)),
                input_emb: embed(&input.0),
                output_emb: embed(&output.0),
            },
        };
        Molecule { carrier, clause }
    }
}

/// A certificate for `p` if it is a molecule.
pub fn recognize_molecule(p: &OgPoset) -> Option<Molecule> {
    if p.is_empty() {
        return None;
    }
    let full = p.full_set();
    let mut r = Recognizer::new(p);
    let node = r.node(&full)?;
    let built = r.build(&full, &node);
    // keep the caller's carrier so element references stay meaningful
    Some(Molecule { carrier: Arc::new(p.clone()), clause: built.clause })
}

pub fn is_molecule(p: &OgPoset) -> bool {
    !p.is_empty() && Recognizer::new(p).is_molecule(&p.full_set())
}

// ----- submolecules -----

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubmolStep {
    /// The next subset is `∂ᵏ^α` of the current one.
    BoundaryFactor { k: usize, sign: Sign },
    /// The current subset is `left ∘ₖ right` and the next one is the
    /// named side.
    PastingFactor { k: usize, left: Vec<ElemRef>, right: Vec<ElemRef>, take_left: bool },
    /// The current subset is the image.
    Isomorphism,
}

/// A chain of subsets of the target, each a pasting factor of the one
/// before, ending at the image of the inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubmolWitness {
    pub steps: Vec<(Vec<ElemRef>, SubmolStep)>,
}

impl SubmolWitness {
    /// Checks every step of the chain against `u` and the image of `iota`.
    pub fn replay(&self, iota: &GradedFunction) -> bool {
        let u = iota.target();
        let mut rec = Recognizer::new(u);
        let image = iota.image_set();
        let mut current = u.full_set();
        for (i, (elems, step)) in self.steps.iter().enumerate() {
            let here = u.set_of(elems.iter().copied());
            if here != current || !rec.is_molecule(&here) {
                return false;
            }
            let next = match step {
                SubmolStep::Isomorphism => return i + 1 == self.steps.len() && here == image && iota.is_injective(),
                SubmolStep::BoundaryFactor { k, sign } => u.boundary(&here, *k, *sign),
                SubmolStep::PastingFactor { k, left, right, take_left } => {
                    let a = u.set_of(left.iter().copied());
                    let b = u.set_of(right.iter().copied());
                    if !is_paste_split(u, &here, &a, &b, *k) {
                        return false;
                    }
                    if *take_left {
                        a
                    } else {
                        b
                    }
                }
            };
            current = next;
        }
        false
    }
}

/// A witness that `iota` is a submolecule inclusion, if it is one.
pub fn is_submolecule(iota: &GradedFunction) -> Option<SubmolWitness> {
    let u = iota.target();
    if !iota.is_embedding() || !is_molecule(iota.source()) {
        return None;
    }
    let image = iota.image_set();
    let mut rec = Recognizer::new(u);
    let full = u.full_set();
    if !rec.is_molecule(&full) {
        return None;
    }
    let mut visited = HashSet::new();
    let steps = submol_search(u, &mut rec, &full, &image, &mut visited)?;
    Some(SubmolWitness { steps })
}

fn submol_search(
    u: &OgPoset,
    rec: &mut Recognizer,
    t: &ElemSet,
    image: &ElemSet,
    visited: &mut HashSet<ElemSet>,
) -> Option<Vec<(Vec<ElemRef>, SubmolStep)>> {
    if !visited.insert(t.clone()) {
        return None;
    }
    let here: Vec<ElemRef> = u.members(t).collect();
    if t == image {
        return Some(vec![(here, SubmolStep::Isomorphism)]);
    }
    let d = u.set_dim(t);
    for k in (0..d.max(0) as usize).rev() {
        for sign in Sign::BOTH {
            let b = u.boundary(t, k, sign);
            if &b != t && image.is_subset(&b) {
                if let Some(mut rest) = submol_search(u, rec, &b, image, visited) {
                    rest.insert(0, (here, SubmolStep::BoundaryFactor { k, sign }));
                    return Some(rest);
                }
            }
        }
        for (a, b) in paste_splits(u, t, k) {
            for take_left in [true, false] {
                let side = if take_left { &a } else { &b };
                if image.is_subset(side) && rec.is_molecule(side) {
                    if let Some(mut rest) = submol_search(u, rec, side, image, visited) {
                        let step = SubmolStep::PastingFactor {
                            k,
                            left: u.members(&a).collect(),
                            right: u.members(&b).collect(),
                            take_left,
                        };
                        rest.insert(0, (here, step));
                        return Some(rest);
                    }
                }
            }
        }
    }
    None
}

/// Pasting at a submolecule. `iota` is either an inclusion of the
/// extracted `∂ᵏ⁺U` into `V` landing in `∂ᵏ⁻V`, or an inclusion of the
/// extracted `∂ᵏ⁻V` into `U` landing in `∂ᵏ⁺U`. Returns the result and the
/// embeddings of `U` and `V`.
pub fn paste_at(
    u: &Molecule,
    v: &Molecule,
    k: usize,
    iota: &GradedFunction,
) -> Result<(Molecule, Vec<ElemRef>, Vec<ElemRef>), MoleculeError> {
    let up = u.carrier();
    let vp = v.carrier();
    let (carrier, u_emb, v_emb) = if iota.target().fingerprint() == vp.fingerprint() {
        let bu = u.boundary_set(k, Sign::Plus);
        let (sub, origin) = up.sub_poset(&bu);
        if sub != **iota.source() || !iota.image_set().is_subset(&v.boundary_set(k, Sign::Minus)) {
            return Err(MoleculeError::NotSubmolecule);
        }
        is_submolecule(iota).ok_or(MoleculeError::NotSubmolecule)?;
        // glue U onto V
        let mut shared = vec![None; up.len()];
        for (i, &o) in origin.iter().enumerate() {
            shared[up.flat(o)] = Some(iota.apply(sub.elem(i)));
        }
        let (c, u_emb) = glue(vp, up, &shared);
        (c, u_emb, vp.elements().collect::<Vec<_>>())
    } else if iota.target().fingerprint() == up.fingerprint() {
        let bv = v.boundary_set(k, Sign::Minus);
        let (sub, origin) = vp.sub_poset(&bv);
        if sub != **iota.source() || !iota.image_set().is_subset(&u.boundary_set(k, Sign::Plus)) {
            return Err(MoleculeError::NotSubmolecule);
        }
        is_submolecule(iota).ok_or(MoleculeError::NotSubmolecule)?;
        let mut shared = vec![None; vp.len()];
        for (i, &o) in origin.iter().enumerate() {
            shared[vp.flat(o)] = Some(iota.apply(sub.elem(i)));
        }
        let (c, v_emb) = glue(up, vp, &shared);
        (c, up.elements().collect::<Vec<_>>(), v_emb)
    } else {
        return Err(MoleculeError::NotSubmolecule);
    };
    let m = recognize_molecule(&carrier).ok_or(MoleculeError::NotAMolecule)?;
    Ok((m, u_emb, v_emb))
}

/// Where an element of a substitution comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstOrigin {
    Outer(ElemRef),
    Inserted(ElemRef),
}

#[derive(Clone, Debug)]
pub struct Substitution {
    pub molecule: Molecule,
    pub origin: Vec<SubstOrigin>,
    /// Embedding of the inserted molecule.
    pub inserted: Vec<ElemRef>,
}

/// `U[W/ι(V)] = ∂⁺(U ∘_{n,ι} (V ⇒ W))`.
pub fn substitute(u: &Molecule, iota: &GradedFunction, w: &Molecule) -> Result<Substitution, MoleculeError> {
    let vp = iota.source();
    if vp.dim() != u.dim() || !vp.is_round(&vp.full_set()) {
        return Err(MoleculeError::NotRewritable);
    }
    if iota.target().fingerprint() != u.carrier().fingerprint() {
        return Err(MoleculeError::NotSubmolecule);
    }
    let v = recognize_molecule(vp).ok_or(MoleculeError::NotRewritable)?;
    is_submolecule(iota).ok_or(MoleculeError::NotSubmolecule)?;
    let a = atom(&v, w).map_err(|e| match e {
        MoleculeError::NotRound => MoleculeError::NotRound,
        _ => MoleculeError::BoundaryMismatch,
    })?;
    let Clause::Atom { input_emb, output_emb, .. } = a.clause() else { unreachable!() };
    let ap = a.carrier();
    let up = u.carrier();
    let mut shared = vec![None; ap.len()];
    for x in vp.elements() {
        shared[ap.flat(input_emb[vp.flat(x)])] = Some(iota.apply(x));
    }
    let (glued, a_emb) = glue(up, ap, &shared);
    let n = u.dim() as usize;
    let out = glued.boundary(&glued.full_set(), n, Sign::Plus);
    let (carrier, sources) = glued.sub_poset(&out);
    let mut from_a = vec![None; glued.len()];
    for x in ap.elements() {
        from_a[glued.flat(a_emb[ap.flat(x)])] = Some(x);
    }
    let wp = w.carrier();
    let mut a_to_w = vec![None; ap.len()];
    for y in wp.elements() {
        a_to_w[ap.flat(output_emb[wp.flat(y)])] = Some(y);
    }
    let origin: Vec<SubstOrigin> = sources
        .iter()
        .map(|&g| {
            if g.index < up.stratum_len(g.dim) {
                SubstOrigin::Outer(g)
            } else {
                let x = from_a[glued.flat(g)].expect("element from the atom");
                SubstOrigin::Inserted(a_to_w[ap.flat(x)].expect("output side of the atom"))
            }
        })
        .collect();
    let table = lookup_table(&sources, &glued);
    let inserted: Vec<ElemRef> = wp
        .elements()
        .map(|y| {
            let g = a_emb[ap.flat(output_emb[wp.flat(y)])];
            carrier.elem(table[glued.flat(g)].expect("inserted molecule lies in the output boundary"))
        })
        .collect();
    let molecule = recognize_molecule(&carrier).ok_or(MoleculeError::NotAMolecule)?;
    Ok(Substitution { molecule, origin, inserted })
}

// ----- layerings -----

/// A decomposition `U = U₁ ∘ₖ … ∘ₖ U_m`, parts given as subsets of the
/// carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layering {
    pub k: usize,
    pub parts: Vec<ElemSet>,
}

impl Layering {
    /// Re-checks the pasting equations of the layering inside `p`.
    pub fn check(&self, p: &OgPoset, whole: &ElemSet) -> bool {
        let mut acc = match self.parts.first() {
            Some(a) => a.clone(),
            None => return false,
        };
        for part in &self.parts[1..] {
            let mut un = acc.clone();
            un.union_with(part);
            if !is_paste_split(p, &un, &acc, part, self.k) {
                return false;
            }
            acc = un;
        }
        &acc == whole
    }
}

/// All layerings of the closed subset `s` of `p` at level `k`.
pub fn layerings_of(p: &OgPoset, s: &ElemSet, k: usize) -> Vec<Layering> {
    if p.set_dim(s) <= k as isize {
        return vec![Layering { k, parts: vec![s.clone()] }];
    }
    let mut memo: HashMap<ElemSet, Vec<Vec<ElemSet>>> = HashMap::new();
    let mut out: Vec<Layering> = layer_rec(p, s, k, &mut memo).into_iter().map(|parts| Layering { k, parts }).collect();
    let mut seen = HashSet::new();
    out.retain(|l| seen.insert(l.parts.clone()));
    out
}

fn layer_rec(p: &OgPoset, s: &ElemSet, k: usize, memo: &mut HashMap<ElemSet, Vec<Vec<ElemSet>>>) -> Vec<Vec<ElemSet>> {
    if let Some(r) = memo.get(s) {
        return r.clone();
    }
    let (m, edges) = flow_graph(p, s, k);
    let result = if m.len() <= 1 {
        vec![vec![s.clone()]]
    } else {
        let lower = p.boundary(s, k, Sign::Minus);
        let upper = p.boundary(s, k, Sign::Plus);
        let split_with = |d: u64| -> Option<(ElemSet, ElemSet)> {
            let mut a = lower.clone();
            let mut b = upper.clone();
            for (i, &x) in m.iter().enumerate() {
                if d & (1 << i) != 0 {
                    a.union_with(&p.cl(x));
                } else {
                    b.union_with(&p.cl(x));
                }
            }
            is_paste_split(p, s, &a, &b, k).then_some((a, b))
        };
        let mut res = Vec::new();
        let has_pred = |j: usize| edges.iter().any(|es| es.contains(&j));
        for j in 0..m.len() {
            if has_pred(j) {
                continue;
            }
            if let Some((a, b)) = split_with(1 << j) {
                for rest in layer_rec(p, &b, k, memo) {
                    let mut l = vec![a.clone()];
                    l.extend(rest);
                    res.push(l);
                }
            }
        }
        if res.is_empty() {
            // no single element can be split off; take the smallest valid
            // down-sets instead
            let mut best: Option<u32> = None;
            for d in down_sets(m.len(), &edges, DOWN_SET_CAP) {
                if best.is_some_and(|b| d.count_ones() > b) {
                    break;
                }
                if let Some((a, b)) = split_with(d) {
                    best = Some(d.count_ones());
                    for rest in layer_rec(p, &b, k, memo) {
                        let mut l = vec![a.clone()];
                        l.extend(rest);
                        res.push(l);
                    }
                }
            }
            if res.is_empty() {
                res.push(vec![s.clone()]);
            }
        }
        res
    };
    memo.insert(s.clone(), result.clone());
    result
}

/// All layerings of a molecule at level `k`.
pub fn layerings(u: &Molecule, k: usize) -> Vec<Layering> {
    layerings_of(u.carrier(), &u.carrier().full_set(), k)
}
