//! Morphisms of regular directed complexes: classification, the
//! factorisation of collapses, the (collapse, local embedding)
//! factorisation, and spans of subdivisions and local collapses.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::construct::{generating_collapse, CylLabel, Cylinder};
use crate::iso;
use crate::molecule::{self, Molecule, MoleculeError};
use crate::ogposet::{hasse_components, ElemRef, ElemSet, Faces, OgError, OgPoset, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("function is not order-preserving at {0}")]
    NotOrderPreserving(ElemRef),
    #[error("assignment has {got} entries, source has {expected} elements")]
    SizeMismatch { expected: usize, got: usize },
    #[error("{0} is not an element of the target")]
    OutOfRange(ElemRef),
    #[error("not a collapse: {0}")]
    NotACollapse(String),
    #[error("not a local collapse")]
    NotLocalCollapse,
    #[error("classification failed: {0}")]
    ClassificationFailure(String),
    #[error("codomain of the first span is not the domain of the second")]
    DomainMismatch,
    #[error("molecule is not round")]
    NotRound,
    #[error(transparent)]
    Og(#[from] OgError),
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
    #[error("malformed morphism: {0}")]
    Parse(String),
}

fn not_collapse(msg: &str) -> MorphismError {
    MorphismError::NotACollapse(msg.to_string())
}

/// A function between oriented graded posets, stored as the image of each
/// source element in flat order.
#[derive(Clone, Debug)]
pub struct GradedFunction {
    source: Arc<OgPoset>,
    target: Arc<OgPoset>,
    map: Vec<ElemRef>,
}

impl PartialEq for GradedFunction {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.map == other.map
    }
}

impl Eq for GradedFunction {}

impl GradedFunction {
    /// Checks the assignment and that it is order-preserving.
    pub fn new(source: Arc<OgPoset>, target: Arc<OgPoset>, map: Vec<ElemRef>) -> Result<Self, MorphismError> {
        if map.len() != source.len() {
            return Err(MorphismError::SizeMismatch { expected: source.len(), got: map.len() });
        }
        if let Some(&y) = map.iter().find(|&&y| !target.contains(y)) {
            return Err(MorphismError::OutOfRange(y));
        }
        let f = GradedFunction { source, target, map };
        let mut closures: HashMap<ElemRef, ElemSet> = HashMap::new();
        for x in f.source.elements() {
            let fx = f.apply(x);
            let cl = closures.entry(fx).or_insert_with(|| f.target.cl(fx));
            if f.source.all_faces(x).any(|y| !cl.contains(f.target.flat(f.apply(y)))) {
                return Err(MorphismError::NotOrderPreserving(x));
            }
        }
        Ok(f)
    }

    pub fn new_unchecked(source: Arc<OgPoset>, target: Arc<OgPoset>, map: Vec<ElemRef>) -> Self {
        debug_assert_eq!(map.len(), source.len());
        GradedFunction { source, target, map }
    }

    pub fn identity(p: Arc<OgPoset>) -> Self {
        let map = p.elements().collect();
        GradedFunction { source: p.clone(), target: p, map }
    }

    pub fn source(&self) -> &Arc<OgPoset> {
        &self.source
    }

    pub fn target(&self) -> &Arc<OgPoset> {
        &self.target
    }

    pub fn map(&self) -> &[ElemRef] {
        &self.map
    }

    pub fn apply(&self, x: ElemRef) -> ElemRef {
        self.map[self.source.flat(x)]
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &GradedFunction) -> GradedFunction {
        debug_assert!(self.target.fingerprint() == g.source.fingerprint());
        let map = self.map.iter().map(|&y| g.apply(y)).collect();
        GradedFunction { source: self.source.clone(), target: g.target.clone(), map }
    }

    pub fn image_set(&self) -> ElemSet {
        self.target.set_of(self.map.iter().copied())
    }

    pub fn image_of(&self, set: &ElemSet) -> ElemSet {
        self.target.set_of(self.source.members(set).map(|x| self.apply(x)))
    }

    pub fn preimage(&self, set: &ElemSet) -> ElemSet {
        let mut out = self.source.empty_set();
        for (i, &y) in self.map.iter().enumerate() {
            if set.contains(self.target.flat(y)) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = self.target.empty_set();
        self.map.iter().all(|&y| !seen.put(self.target.flat(y)))
    }

    pub fn is_surjective(&self) -> bool {
        self.image_set().count_ones(..) == self.target.len()
    }

    fn preserves_faces_at(&self, x: ElemRef) -> bool {
        let fx = self.apply(x);
        if fx.dim != x.dim {
            return false;
        }
        Sign::BOTH.into_iter().all(|s| {
            let mut a: Vec<ElemRef> = self.source.faces(x, s).map(|y| self.apply(y)).collect();
            a.sort_unstable();
            a.dedup();
            let b: Vec<ElemRef> = self.target.faces(fx, s).collect();
            a.len() == self.source.faces(x, s).count() && a == b
        })
    }

    /// Restricts to an embedding on the closure of every element.
    pub fn is_local_embedding(&self) -> bool {
        self.source.elements().all(|x| self.preserves_faces_at(x))
            && self.source.maximal(&self.source.full_set()).into_iter().all(|x| {
                let cl = self.source.cl(x);
                let mut seen = self.target.empty_set();
                let ok = self.source.members(&cl).all(|y| !seen.put(self.target.flat(self.apply(y))));
                ok
            })
    }

    pub fn is_embedding(&self) -> bool {
        self.is_injective() && self.is_local_embedding()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.source.len() == self.target.len() && self.is_embedding()
    }

    /// Restriction to `src → tgt`, both closed subsets, as a function
    /// between the extracted posets. `None` if the image escapes `tgt`.
    pub fn restrict(&self, src: &ElemSet, tgt: &ElemSet) -> Option<(GradedFunction, Vec<ElemRef>, Vec<ElemRef>)> {
        let (sp, so) = self.source.sub_poset(src);
        let (tp, to) = self.target.sub_poset(tgt);
        let mut back = vec![None; self.target.len()];
        for (i, &y) in to.iter().enumerate() {
            back[self.target.flat(y)] = Some(tp.elem(i));
        }
        let map = so.iter().map(|&x| back[self.target.flat(self.apply(x))]).collect::<Option<Vec<_>>>()?;
        Some((GradedFunction::new_unchecked(Arc::new(sp), Arc::new(tp), map), so, to))
    }

    /// `f|cl{x} : cl{x} → cl{f(x)}`.
    pub fn restrict_to_cell(&self, x: ElemRef) -> (GradedFunction, Vec<ElemRef>, Vec<ElemRef>) {
        self.restrict(&self.source.cl(x), &self.target.cl(self.apply(x))).expect("order-preserving")
    }

    pub fn to_json(&self) -> Value {
        json!({"source": self.source.to_json(), "target": self.target.to_json(), "map": self.map})
    }

    pub fn from_json(v: &Value) -> Result<Self, MorphismError> {
        let get = |k: &str| v.get(k).ok_or_else(|| MorphismError::Parse(format!("missing {k}")));
        let source = Arc::new(OgPoset::from_json(get("source")?)?);
        let target = Arc::new(OgPoset::from_json(get("target")?)?);
        let map: Vec<ElemRef> = serde_json::from_value(get("map")?.clone()).map_err(|e| MorphismError::Parse(e.to_string()))?;
        GradedFunction::new(source, target, map)
    }
}

// ----- classification -----

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MorphismClass {
    pub local_embedding: bool,
    pub map: bool,
    #[serde(rename = "final")]
    pub final_map: bool,
    pub comap: bool,
    pub local_collapse: bool,
    pub collapse: bool,
    pub cylindrical_collapse: bool,
}

/// Whether every fibre of `f` restricted to `within` over an element `q`
/// lies in one component of `{z ∈ within : f(z) ≥ q}`.
fn zigzag_condition(f: &GradedFunction, within: &ElemSet, closures: &mut HashMap<ElemRef, ElemSet>) -> bool {
    let p = f.source();
    let q = f.target();
    let mut fibres: HashMap<ElemRef, Vec<usize>> = HashMap::new();
    for i in within.ones() {
        fibres.entry(f.map[i]).or_default().push(i);
    }
    for (&y, fib) in &fibres {
        if fib.len() < 2 {
            continue;
        }
        let fy = q.flat(y);
        let mut up = p.empty_set();
        for i in within.ones() {
            let t = f.map[i];
            let cl = closures.entry(t).or_insert_with(|| q.cl(t));
            if cl.contains(fy) {
                up.insert(i);
            }
        }
        let comp = hasse_components(p, &up);
        if fib.iter().any(|&i| comp[i] != comp[fib[0]]) {
            return false;
        }
    }
    true
}

pub fn is_map(f: &GradedFunction) -> bool {
    let p = f.source();
    let q = f.target();
    let mut closures = HashMap::new();
    for x in p.elements() {
        let clx = p.cl(x);
        let fx = f.apply(x);
        let clfx = q.cl(fx);
        for n in 0..=x.dim {
            for s in Sign::BOTH {
                let b = p.boundary(&clx, n, s);
                if f.image_of(&b) != q.boundary(&clfx, n, s) {
                    return false;
                }
                if !zigzag_condition(f, &b, &mut closures) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_final(f: &GradedFunction) -> bool {
    zigzag_condition(f, &f.source().full_set(), &mut HashMap::new())
}

pub fn is_comap(c: &GradedFunction) -> bool {
    let p = c.source();
    let q = c.target();
    for y in q.elements() {
        let cly = q.cl(y);
        let pre = c.preimage(&cly);
        let (sub, _) = p.sub_poset(&pre);
        if pre.count_ones(..) == 0 || !molecule::is_molecule(&sub) {
            return false;
        }
        let top = p.set_dim(&pre).max(0) as usize;
        for n in 0..=top.max(y.dim) {
            for s in Sign::BOTH {
                if p.boundary(&pre, n, s) != c.preimage(&q.boundary(&cly, n, s)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether `f` is a map restricting to a cylindrical collapse on each
/// `cl{x}`.
pub fn is_local_collapse(f: &GradedFunction) -> bool {
    if !is_map(f) {
        return false;
    }
    f.source().elements().all(|x| {
        let (r, _, _) = f.restrict_to_cell(x);
        r.is_isomorphism() || factor_collapse(&r).is_ok()
    })
}

pub fn classify(f: &GradedFunction) -> MorphismClass {
    let map = is_map(f);
    let local_embedding = f.is_local_embedding();
    let local_collapse = local_embedding || is_local_collapse(f);
    let final_map = map && is_final(f);
    let atoms = f.source().greatest().is_some() && f.target().greatest().is_some();
    MorphismClass {
        local_embedding,
        map,
        final_map,
        comap: is_comap(f),
        local_collapse,
        collapse: local_collapse && final_map,
        cylindrical_collapse: atoms && f.is_surjective() && factor_collapse(f).is_ok(),
    }
}

// ----- collapses of atoms -----

/// `p = τ_{K₁} ∘ … ∘ τ_{K_m} ∘ iso`. `cylinders[i]` is the stage
/// `V_{i+1} = arr ⊗_{K_{i+1}} V_i`, with `V_0` the target of `p`.
#[derive(Clone, Debug)]
pub struct CollapseFactorization {
    pub target: Arc<OgPoset>,
    pub cylinders: Vec<Cylinder>,
    pub iso: GradedFunction,
}

impl CollapseFactorization {
    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    /// `K_i`, as subsets of `V_{i−1}`.
    pub fn k_seq(&self) -> Vec<&ElemSet> {
        self.cylinders.iter().map(|c| &c.k).collect()
    }

    /// `V_i` for `i = 0..=m`.
    pub fn stage(&self, i: usize) -> &Arc<OgPoset> {
        if i == 0 {
            &self.target
        } else {
            &self.cylinders[i - 1].poset
        }
    }

    /// Composes the stored factors.
    pub fn replay(&self) -> GradedFunction {
        let mut f = self.iso.clone();
        for c in self.cylinders.iter().rev() {
            f = f.then(&c.projection());
        }
        f
    }
}

/// The face `x^α` singled out among `Δ^α⊤ ∩ p⁻¹⊤`.
fn distinguished_face(u: &OgPoset, top: ElemRef, fibre: &ElemSet, sign: Sign) -> Option<ElemRef> {
    let cands: Vec<ElemRef> = u.faces(top, sign).filter(|&x| fibre.contains(u.flat(x))).collect();
    let all = |x: ElemRef| -> Vec<ElemRef> {
        let mut v: Vec<ElemRef> = u.all_faces(x).collect();
        v.sort_unstable();
        v
    };
    let found: Vec<ElemRef> = cands
        .iter()
        .copied()
        .filter(|&c| {
            let dc = all(c);
            cands.iter().all(|&x| {
                if x == c {
                    return true;
                }
                let dx = all(x);
                let meet: Vec<ElemRef> = dc.iter().copied().filter(|y| dx.contains(y)).collect();
                let mut side: Vec<ElemRef> = u.faces(c, sign.neg()).filter(|y| u.faces(x, sign).any(|z| z == *y)).collect();
                side.sort_unstable();
                meet == side
            })
        })
        .collect();
    (found.len() == 1).then(|| found[0])
}

fn factor_rec(p: &GradedFunction) -> Result<(Vec<Cylinder>, GradedFunction), MorphismError> {
    let u = p.source();
    let v = p.target();
    let top_u = u.greatest().ok_or_else(|| not_collapse("source is not an atom"))?;
    let top_v = v.greatest().ok_or_else(|| not_collapse("target is not an atom"))?;
    if !p.is_surjective() || p.apply(top_u) != top_v {
        return Err(not_collapse("not surjective"));
    }
    if top_u.dim < top_v.dim {
        return Err(not_collapse("source has lower dimension"));
    }
    if top_u.dim == top_v.dim {
        return if p.is_isomorphism() { Ok((Vec::new(), p.clone())) } else { Err(not_collapse("equidimensional but not an isomorphism")) };
    }
    let fibre = p.preimage(&v.set_of([top_v]));
    let xm = distinguished_face(u, top_u, &fibre, Sign::Minus).ok_or_else(|| not_collapse("no distinguished input face"))?;
    let xp = distinguished_face(u, top_u, &fibre, Sign::Plus).ok_or_else(|| not_collapse("no distinguished output face"))?;
    let a = u.cl(xm);
    let b = u.cl(xp);
    let mut k = a.clone();
    k.intersect_with(&b);

    let (sa, oa) = u.sub_poset(&a);
    let sa = Arc::new(sa);
    let mut a_index = vec![usize::MAX; u.len()];
    for (i, &z) in oa.iter().enumerate() {
        a_index[u.flat(z)] = i;
    }
    let inner = GradedFunction::new_unchecked(sa.clone(), v.clone(), oa.iter().map(|&z| p.apply(z)).collect());
    let (mut cyls, phi1) = factor_rec(&inner)?;
    let below = cyls.last().map(|c| c.poset.clone()).unwrap_or_else(|| v.clone());
    let phi_a = |z: ElemRef| phi1.apply(sa.elem(a_index[u.flat(z)]));

    let km = below.set_of(u.members(&k).map(phi_a));
    let cyl = generating_collapse(&below, &km).map_err(|e| MorphismError::NotACollapse(e.to_string()))?;

    // ψ : cl{x⁻} ≅ cl{x⁺} fixing K
    let (sb, ob) = u.sub_poset(&b);
    let psi = iso::find_isomorphism_where(&sa, &sb, &|s, t| {
        let (s0, t0) = (oa[sa.flat(s)], ob[sb.flat(t)]);
        let (sk, tk) = (k.contains(u.flat(s0)), k.contains(u.flat(t0)));
        sk == tk && (!sk || s0 == t0)
    })
    .ok_or_else(|| not_collapse("input and output faces are not isomorphic rel K"))?;
    let mut psi_inv = vec![ElemRef::new(0, 0); u.len()];
    for (i, &t) in psi.iter().enumerate() {
        psi_inv[u.flat(ob[sb.flat(t)])] = oa[i];
    }

    let mut map = Vec::with_capacity(u.len());
    for z in u.elements() {
        let fz = u.flat(z);
        let label = if k.contains(fz) {
            CylLabel::Collapsed(phi_a(z))
        } else if a.contains(fz) {
            CylLabel::End(Sign::Minus, phi_a(z))
        } else if b.contains(fz) {
            CylLabel::End(Sign::Plus, phi_a(psi_inv[fz]))
        } else {
            let r: Vec<ElemRef> = u.faces(z, Sign::Minus).filter(|&y| a.contains(u.flat(y)) && !k.contains(u.flat(y))).collect();
            if r.len() != 1 {
                return Err(not_collapse("middle element without a unique input end"));
            }
            CylLabel::Middle(phi_a(r[0]))
        };
        map.push(cyl.elem(label).ok_or_else(|| not_collapse("label outside the cylinder"))?);
    }
    let phi = GradedFunction::new_unchecked(u.clone(), cyl.poset.clone(), map);
    if !phi.is_isomorphism() {
        return Err(not_collapse("parametrisation is not an isomorphism"));
    }
    cyls.push(cyl);
    Ok((cyls, phi))
}

/// Writes a collapse of atoms as a sequence of generating collapses after
/// an isomorphism.
pub fn factor_collapse(p: &GradedFunction) -> Result<CollapseFactorization, MorphismError> {
    let (cylinders, iso) = factor_rec(p)?;
    let fac = CollapseFactorization { target: p.target().clone(), cylinders, iso };
    if fac.replay().map != p.map {
        return Err(not_collapse("factors do not recompose to the input"));
    }
    Ok(fac)
}

/// All sections of a collapse of atoms.
pub fn sections_of_collapse(p: &GradedFunction) -> Result<Vec<GradedFunction>, MorphismError> {
    factor_collapse(p)?;
    let u = p.source();
    let v = p.target();
    let top_v = v.greatest().expect("checked by factor_collapse");
    let mut out = Vec::new();
    for y in u.elements_of_dim(top_v.dim) {
        if p.apply(y) != top_v {
            continue;
        }
        let (r, so, _) = p.restrict_to_cell(y);
        if !r.is_isomorphism() {
            continue;
        }
        let mut map = vec![ElemRef::new(0, 0); v.len()];
        for (i, &t) in r.map.iter().enumerate() {
            // restrict_to_cell's target is cl{top} = V in the same order
            map[v.flat(t)] = so[i];
        }
        out.push(GradedFunction::new_unchecked(v.clone(), u.clone(), map));
    }
    Ok(out)
}

/// `f = j ∘ q` with `q` a collapse and `j` a local embedding.
#[derive(Clone, Debug)]
pub struct ClFactorization {
    pub collapse: GradedFunction,
    pub embedding: GradedFunction,
}

/// The (collapse, local embedding) factorisation of a local collapse.
pub fn factor_cl(f: &GradedFunction) -> Result<ClFactorization, MorphismError> {
    if !is_local_collapse(f) {
        return Err(MorphismError::NotLocalCollapse);
    }
    let p = f.source();
    let q = f.target();
    let mut closures: HashMap<ElemRef, ElemSet> = HashMap::new();
    for x in p.elements() {
        let t = f.apply(x);
        closures.entry(t).or_insert_with(|| q.cl(t));
    }
    // class of each source element: (target element, component)
    let mut class_of: Vec<Option<usize>> = vec![None; p.len()];
    let mut classes: Vec<(ElemRef, usize)> = Vec::new();
    let mut counts = vec![0usize; q.num_strata()];
    for y in q.elements() {
        let fib = f.preimage(&q.set_of([y]));
        if fib.count_ones(..) == 0 {
            continue;
        }
        let mut up = p.empty_set();
        for x in p.elements() {
            if closures[&f.apply(x)].contains(q.flat(y)) {
                up.insert(p.flat(x));
            }
        }
        let comp = hasse_components(p, &up);
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for i in fib.ones() {
            let c = *seen.entry(comp[i]).or_insert_with(|| {
                classes.push((y, counts[y.dim]));
                counts[y.dim] += 1;
                classes.len() - 1
            });
            class_of[i] = Some(c);
        }
    }
    let class_of: Vec<usize> = class_of.into_iter().map(|c| c.expect("every element has a class")).collect();
    let mut rep = vec![usize::MAX; classes.len()];
    for (i, &c) in class_of.iter().enumerate() {
        if rep[c] == usize::MAX {
            rep[c] = i;
        }
    }
    let mut strata: Vec<Vec<Faces>> = counts.iter().map(|&n| vec![Faces::default(); n]).collect();
    for (c, &(y, idx)) in classes.iter().enumerate() {
        let x = p.elem(rep[c]);
        let clx = p.cl(x);
        let mut fs = [Vec::new(), Vec::new()];
        for (j, s) in Sign::BOTH.into_iter().enumerate() {
            for y2 in q.faces(y, s) {
                let z = p.members(&clx).find(|&z| f.apply(z) == y2).ok_or(MorphismError::NotLocalCollapse)?;
                fs[j].push(classes[class_of[p.flat(z)]].1);
            }
        }
        let [i, o] = fs;
        strata[y.dim][idx] = Faces::new(i, o);
    }
    let mid = Arc::new(OgPoset::from_faces(strata)?);
    let collapse = GradedFunction::new(
        p.clone(),
        mid.clone(),
        class_of.iter().map(|&c| ElemRef::new(classes[c].0.dim, classes[c].1)).collect(),
    )?;
    let mut emap = vec![ElemRef::new(0, 0); mid.len()];
    for &(y, idx) in &classes {
        emap[mid.flat(ElemRef::new(y.dim, idx))] = y;
    }
    let embedding = GradedFunction::new(mid, q.clone(), emap)?;
    Ok(ClFactorization { collapse, embedding })
}

// ----- spans -----

/// Result of pulling a local collapse back along a subdivision.
#[derive(Clone, Debug)]
pub struct PullbackSquare {
    pub poset: Arc<OgPoset>,
    /// Pairs `(x, y)` behind each element.
    pub pairs: Vec<(ElemRef, ElemRef)>,
    /// `s*f`, a local collapse onto the subdivided side.
    pub collapse: GradedFunction,
    /// `f*s`, the comap back to the source of `f`.
    pub comap: GradedFunction,
}

/// Pullback of a local collapse `f : P → Q` along the comap `c : Q′ → Q`
/// of a subdivision.
pub fn pullback_collapse_subdivision(f: &GradedFunction, c: &GradedFunction) -> Result<PullbackSquare, MorphismError> {
    if f.target().fingerprint() != c.target().fingerprint() {
        return Err(MorphismError::DomainMismatch);
    }
    let p = f.source();
    let q2 = c.source();
    let defect = |x: ElemRef| x.dim - f.apply(x).dim;
    let mut by_dim: Vec<Vec<(ElemRef, ElemRef)>> = Vec::new();
    for x in p.elements() {
        for y in q2.elements() {
            if f.apply(x) == c.apply(y) {
                let d = y.dim + defect(x);
                if by_dim.len() <= d {
                    by_dim.resize(d + 1, Vec::new());
                }
                by_dim[d].push((x, y));
            }
        }
    }
    let mut index: HashMap<(ElemRef, ElemRef), ElemRef> = HashMap::new();
    for (d, s) in by_dim.iter().enumerate() {
        for (i, &pr) in s.iter().enumerate() {
            index.insert(pr, ElemRef::new(d, i));
        }
    }
    let failure = |m: &str| MorphismError::ClassificationFailure(m.to_string());
    let mut strata: Vec<Vec<Faces>> = Vec::with_capacity(by_dim.len());
    for (d, s) in by_dim.iter().enumerate() {
        let mut st = Vec::with_capacity(s.len());
        for &(x, y) in s {
            let mut fs = [Vec::new(), Vec::new()];
            if d > 0 {
                let clx = p.cl(x);
                let cly = q2.cl(y);
                for x2 in p.members(&clx) {
                    for y2 in q2.members(&cly) {
                        let Some(&e) = index.get(&(x2, y2)) else { continue };
                        if e.dim + 1 != d {
                            continue;
                        }
                        let sign = if y2 == y {
                            p.face_sign(x, x2).ok_or_else(|| failure("vertical face is not a face"))?
                        } else {
                            q2.face_sign(y, y2).ok_or_else(|| failure("horizontal face is not a face"))?.flip_by(defect(x))
                        };
                        fs[usize::from(sign == Sign::Plus)].push(e.index);
                    }
                }
            }
            let [i, o] = fs;
            st.push(Faces::new(i, o));
        }
        strata.push(st);
    }
    let poset = Arc::new(OgPoset::from_faces(strata)?);
    let pairs: Vec<(ElemRef, ElemRef)> = by_dim.into_iter().flatten().collect();
    let collapse = GradedFunction::new_unchecked(poset.clone(), q2.clone(), pairs.iter().map(|&(_, y)| y).collect());
    let comap = GradedFunction::new_unchecked(poset.clone(), p.clone(), pairs.iter().map(|&(x, _)| x).collect());
    Ok(PullbackSquare { poset, pairs, collapse, comap })
}

/// A local subdivision-collapse `P → Q`, as the span of a comap
/// `sub : P′ → P` and a local collapse `post : P′ → Q`.
#[derive(Clone, Debug)]
pub struct SclMorphism {
    pub sub: GradedFunction,
    pub post: GradedFunction,
}

impl SclMorphism {
    pub fn new(sub: GradedFunction, post: GradedFunction) -> Result<Self, MorphismError> {
        if sub.source().fingerprint() != post.source().fingerprint() {
            return Err(MorphismError::DomainMismatch);
        }
        Ok(SclMorphism { sub, post })
    }

    pub fn identity(p: Arc<OgPoset>) -> Self {
        let id = GradedFunction::identity(p);
        SclMorphism { sub: id.clone(), post: id }
    }

    pub fn from_subdivision(comap: GradedFunction) -> Self {
        let post = GradedFunction::identity(comap.source().clone());
        SclMorphism { sub: comap, post }
    }

    pub fn from_collapse(f: GradedFunction) -> Self {
        let sub = GradedFunction::identity(f.source().clone());
        SclMorphism { sub, post: f }
    }

    pub fn domain(&self) -> &Arc<OgPoset> {
        self.sub.target()
    }

    pub fn codomain(&self) -> &Arc<OgPoset> {
        self.post.target()
    }

    pub fn middle(&self) -> &Arc<OgPoset> {
        self.sub.source()
    }

    /// Equality of spans up to an isomorphism of middle objects commuting
    /// with both legs.
    pub fn equivalent(&self, other: &SclMorphism) -> bool {
        if self.domain() != other.domain() || self.codomain() != other.codomain() {
            return false;
        }
        let allow = |x: ElemRef, y: ElemRef| self.sub.apply(x) == other.sub.apply(y) && self.post.apply(x) == other.post.apply(y);
        iso::find_isomorphism_where(self.middle(), other.middle(), &allow).is_some()
    }

    pub fn to_json(&self) -> Value {
        json!({"sub": self.sub.to_json(), "post": self.post.to_json()})
    }
}

/// `g ∘ f` for spans.
pub fn compose_scl(g: &SclMorphism, f: &SclMorphism) -> Result<SclMorphism, MorphismError> {
    if f.codomain() != g.domain() {
        return Err(MorphismError::DomainMismatch);
    }
    let pb = pullback_collapse_subdivision(&f.post, &g.sub)?;
    Ok(SclMorphism { sub: pb.comap.then(&f.sub), post: pb.collapse.then(&g.post) })
}

/// `m = embedding ∘ collapse ∘ subdivision`.
#[derive(Clone, Debug)]
pub struct TernaryFactorization {
    /// Comap of the subdivision part.
    pub subdivision: GradedFunction,
    pub collapse: GradedFunction,
    pub embedding: GradedFunction,
}

impl TernaryFactorization {
    pub fn recompose(&self) -> SclMorphism {
        SclMorphism { sub: self.subdivision.clone(), post: self.collapse.then(&self.embedding) }
    }
}

pub fn factor_ternary(m: &SclMorphism) -> Result<TernaryFactorization, MorphismError> {
    let cl = factor_cl(&m.post)?;
    Ok(TernaryFactorization { subdivision: m.sub.clone(), collapse: cl.collapse, embedding: cl.embedding })
}

/// Comap `U → mrg U` of the co-merger: interior to the top, boundary to
/// itself.
pub fn co_merger(u: &Molecule) -> Result<GradedFunction, MorphismError> {
    if !u.is_round() {
        return Err(MorphismError::NotRound);
    }
    let m = molecule::merger(u)?;
    let up = u.carrier();
    let mp = m.carrier();
    if u.dim() <= 0 {
        return Ok(GradedFunction::new_unchecked(up.clone(), mp.clone(), up.elements().collect()));
    }
    let n = u.dim() as usize - 1;
    let bu = up.full_boundary(&up.full_set());
    let bm = mp.full_boundary(&mp.full_set());
    let (su, ou) = up.sub_poset(&bu);
    let (sm, om) = mp.sub_poset(&bm);
    let side = |p: &OgPoset, x: ElemRef| Sign::BOTH.map(|s| p.boundary(&p.full_set(), n, s).contains(p.flat(x)));
    let phi = iso::find_isomorphism_where(&su, &sm, &|x, y| side(up, ou[su.flat(x)]) == side(mp, om[sm.flat(y)]))
        .ok_or(MorphismError::NotRound)?;
    let top = mp.greatest().expect("mergers are atoms");
    let mut map = vec![top; up.len()];
    for (i, &y) in phi.iter().enumerate() {
        map[up.flat(ou[i])] = om[sm.flat(y)];
    }
    Ok(GradedFunction::new_unchecked(up.clone(), mp.clone(), map))
}

/// The comap `U → Oⁿ` of the subdivision of the n-globe into a round
/// molecule of dimension n.
pub fn globe_subdivision(u: &Molecule) -> Result<GradedFunction, MorphismError> {
    if !u.is_round() {
        return Err(MorphismError::NotRound);
    }
    let p = u.carrier();
    let n = u.dim().max(0) as usize;
    let g = molecule::globe(n);
    let full = p.full_set();
    let bounds: Vec<[ElemSet; 2]> = (0..n).map(|k| Sign::BOTH.map(|s| p.boundary(&full, k, s))).collect();
    let map = p
        .elements()
        .map(|z| {
            let fz = p.flat(z);
            for (k, b) in bounds.iter().enumerate() {
                match (b[0].contains(fz), b[1].contains(fz)) {
                    (true, false) => return ElemRef::new(k, 0),
                    (false, true) => return ElemRef::new(k, 1),
                    _ => {}
                }
            }
            ElemRef::new(n, 0)
        })
        .collect();
    Ok(GradedFunction::new_unchecked(p.clone(), g.carrier().clone(), map))
}
