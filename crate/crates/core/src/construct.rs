//! Gray products, joins, partial Gray cylinders and the two kinds of
//! pushout used to generate regular directed complexes.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::iso;
use crate::morphism::{classify, GradedFunction, MorphismError};
use crate::ogposet::{glue, ElemRef, ElemSet, Faces, OgError, OgPoset, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("Gray product of collapses is not supported; factor first")]
    GrayOfCollapse,
    #[error("Gray product of morphisms needs two local embeddings or two comaps")]
    GrayMixed,
    #[error("subset is not closed")]
    KNotClosed,
    #[error("subset is not contained in the boundary of the base")]
    KNotInBoundary,
    #[error("base of a generating collapse must be an atom")]
    NotAtom,
    #[error("leg is not an embedding")]
    NotEmbedding,
    #[error("legs of the span have different sources")]
    SpanMismatch,
    #[error("subdivision source is not an atom isomorphic to the closure of the element")]
    NotAtomSource,
    #[error("subdivision leg is not a comap")]
    NotComap,
    #[error(transparent)]
    Og(#[from] OgError),
    #[error(transparent)]
    Morphism(#[from] Box<MorphismError>),
}

impl From<MorphismError> for ConstructError {
    fn from(e: MorphismError) -> Self {
        ConstructError::Morphism(Box::new(e))
    }
}

/// Result of [`gray`]: the product and the pair behind each element.
#[derive(Clone, Debug)]
pub struct Product {
    pub poset: Arc<OgPoset>,
    pub pairs: Vec<(ElemRef, ElemRef)>,
    index: HashMap<(ElemRef, ElemRef), ElemRef>,
}

impl Product {
    pub fn elem(&self, x: ElemRef, y: ElemRef) -> ElemRef {
        self.index[&(x, y)]
    }

    pub fn get(&self, x: ElemRef, y: ElemRef) -> Option<ElemRef> {
        self.index.get(&(x, y)).copied()
    }
}

/// `P ⊗ Q`.
pub fn gray(p: &OgPoset, q: &OgPoset) -> Product {
    let dims = if p.is_empty() || q.is_empty() { 0 } else { p.num_strata() + q.num_strata() - 1 };
    let mut layout: Vec<Vec<(ElemRef, ElemRef)>> = vec![Vec::new(); dims];
    for d in 0..dims {
        for dx in 0..p.num_strata().min(d + 1) {
            let dy = d - dx;
            if dy >= q.num_strata() {
                continue;
            }
            for x in p.elements_of_dim(dx) {
                for y in q.elements_of_dim(dy) {
                    layout[d].push((x, y));
                }
            }
        }
    }
    let mut index = HashMap::new();
    for (d, s) in layout.iter().enumerate() {
        for (i, &pair) in s.iter().enumerate() {
            index.insert(pair, ElemRef::new(d, i));
        }
    }
    let strata: Vec<Vec<Faces>> = layout
        .iter()
        .map(|s| {
            s.iter()
                .map(|&(x, y)| {
                    let mut f = [Vec::new(), Vec::new()];
                    for (k, a) in Sign::BOTH.into_iter().enumerate() {
                        for x2 in p.faces(x, a) {
                            f[k].push(index[&(x2, y)].index);
                        }
                        for y2 in q.faces(y, a.flip_by(x.dim)) {
                            f[k].push(index[&(x, y2)].index);
                        }
                    }
                    let [i, o] = f;
                    Faces::new(i, o)
                })
                .collect()
        })
        .collect();
    let pairs = layout.into_iter().flatten().collect();
    Product { poset: Arc::new(OgPoset::build(strata)), pairs, index }
}

/// Gray product of two local embeddings, or of two comaps (read as
/// subdivisions).
pub fn gray_map(f: &GradedFunction, g: &GradedFunction) -> Result<(GradedFunction, Product, Product), ConstructError> {
    let cf = classify(f);
    let cg = classify(g);
    let embeddings = cf.local_embedding && cg.local_embedding;
    let comaps = cf.comap && cg.comap;
    if !embeddings && !comaps {
        if (cf.local_collapse && !cf.local_embedding) || (cg.local_collapse && !cg.local_embedding) {
            return Err(ConstructError::GrayOfCollapse);
        }
        return Err(ConstructError::GrayMixed);
    }
    let src = gray(f.source(), g.source());
    let tgt = gray(f.target(), g.target());
    let map = src.pairs.iter().map(|&(x, y)| tgt.elem(f.apply(x), g.apply(y))).collect();
    let h = GradedFunction::new_unchecked(src.poset.clone(), tgt.poset.clone(), map);
    Ok((h, src, tgt))
}

/// Adds a positive least element: dimensions shift up by one and the new
/// element is an output face of every former 0-dimensional element.
fn augment(p: &OgPoset) -> OgPoset {
    let mut strata: Vec<Vec<Faces>> = vec![vec![Faces::default()]];
    for (d, s) in p.face_table().iter().enumerate() {
        strata.push(
            s.iter()
                .map(|f| if d == 0 { Faces::new(vec![], vec![0]) } else { f.clone() })
                .collect(),
        );
    }
    OgPoset::build(strata)
}

/// Result of [`join`]. Each element is `inl x`, `inr y` or `x ⋆ y`.
#[derive(Clone, Debug)]
pub struct Join {
    pub poset: Arc<OgPoset>,
    pub labels: Vec<JoinLabel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JoinLabel {
    Left(ElemRef),
    Right(ElemRef),
    Both(ElemRef, ElemRef),
}

/// `P ⋆ Q`, computed by augmenting, taking the Gray product and removing
/// the least element.
pub fn join(p: &OgPoset, q: &OgPoset) -> Join {
    let ap = augment(p);
    let aq = augment(q);
    let prod = gray(&ap, &aq);
    let bottom = ElemRef::new(0, 0);
    let unshift = |x: ElemRef| ElemRef::new(x.dim - 1, x.index);
    // every element except (⊥, ⊥) survives with dimension lowered by one
    let pp = &prod.poset;
    let mut new_index = vec![usize::MAX; pp.len()];
    let mut strata: Vec<Vec<Faces>> = Vec::new();
    let mut labels = Vec::new();
    for d in 1..pp.num_strata() {
        let mut s = Vec::new();
        for e in pp.elements_of_dim(d) {
            new_index[pp.flat(e)] = s.len();
            let f = pp.face_record(e);
            let tr = |v: &Vec<usize>| -> Vec<usize> {
                v.iter()
                    .filter(|&&j| d > 1 || j != 0 || prod.pairs[pp.flat(ElemRef::new(0, j))] != (bottom, bottom))
                    .map(|&j| new_index[pp.flat(ElemRef::new(d - 1, j))])
                    .collect()
            };
            s.push(if d == 1 { Faces::default() } else { Faces::new(tr(&f.input), tr(&f.output)) });
            let (x, y) = prod.pairs[pp.flat(e)];
            labels.push(match (x == bottom, y == bottom) {
                (false, true) => JoinLabel::Left(unshift(x)),
                (true, false) => JoinLabel::Right(unshift(y)),
                _ => JoinLabel::Both(unshift(x), unshift(y)),
            });
        }
        strata.push(s);
    }
    Join { poset: Arc::new(OgPoset::build(strata)), labels }
}

/// The oriented simplex `Δᵏ = 1 ⋆ … ⋆ 1`.
pub fn simplex(k: usize) -> Arc<OgPoset> {
    let mut s = Arc::new(OgPoset::point());
    for _ in 0..k {
        s = join(&s, &OgPoset::point()).poset;
    }
    s
}

/// Gray power of the arrow.
pub fn cube(n: usize) -> Arc<OgPoset> {
    let arrow = crate::molecule::arrow();
    let mut c = Arc::new(OgPoset::point());
    for _ in 0..n {
        c = gray(&c, arrow.carrier()).poset;
    }
    c
}

/// Element of a partial Gray cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CylLabel {
    /// `(x)` for `x ∈ K`.
    Collapsed(ElemRef),
    /// `(0^α, x)` for `x ∉ K`.
    End(Sign, ElemRef),
    /// `(1, x)` for `x ∉ K`.
    Middle(ElemRef),
}

/// `arr ⊗_K P` with its projection onto `P`.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub base: Arc<OgPoset>,
    pub k: ElemSet,
    pub poset: Arc<OgPoset>,
    pub labels: Vec<CylLabel>,
    index: HashMap<CylLabel, ElemRef>,
}

impl Cylinder {
    pub fn elem(&self, l: CylLabel) -> Option<ElemRef> {
        self.index.get(&l).copied()
    }

    pub fn label(&self, x: ElemRef) -> CylLabel {
        self.labels[self.poset.flat(x)]
    }

    /// The canonical projection `τ_K`.
    pub fn projection(&self) -> GradedFunction {
        let map = self
            .labels
            .iter()
            .map(|l| match *l {
                CylLabel::Collapsed(x) | CylLabel::End(_, x) | CylLabel::Middle(x) => x,
            })
            .collect();
        GradedFunction::new_unchecked(self.poset.clone(), self.base.clone(), map)
    }

    /// The embedding of the base at the `α` end.
    pub fn end_inclusion(&self, sign: Sign) -> GradedFunction {
        let map = self
            .base
            .elements()
            .map(|x| {
                if self.k.contains(self.base.flat(x)) {
                    self.index[&CylLabel::Collapsed(x)]
                } else {
                    self.index[&CylLabel::End(sign, x)]
                }
            })
            .collect();
        GradedFunction::new_unchecked(self.base.clone(), self.poset.clone(), map)
    }
}

/// The partial Gray cylinder on `base` relative to the closed subset `k`.
pub fn partial_cylinder(base: &Arc<OgPoset>, k: &ElemSet) -> Result<Cylinder, ConstructError> {
    let p = base.as_ref();
    if !p.is_closed(k) {
        return Err(ConstructError::KNotClosed);
    }
    let in_k = |x: ElemRef| k.contains(p.flat(x));
    let dims = if p.is_empty() { 0 } else { p.num_strata() + usize::from(p.members(&p.full_set()).any(|x| !in_k(x) && x.dim + 1 == p.num_strata())) };
    let mut layout: Vec<Vec<CylLabel>> = vec![Vec::new(); dims];
    for (d, slot) in layout.iter_mut().enumerate() {
        for x in p.elements_of_dim(d).filter(|&x| in_k(x)) {
            slot.push(CylLabel::Collapsed(x));
        }
        for s in Sign::BOTH {
            for x in p.elements_of_dim(d).filter(|&x| !in_k(x)) {
                slot.push(CylLabel::End(s, x));
            }
        }
        if d > 0 {
            for x in p.elements_of_dim(d - 1).filter(|&x| !in_k(x)) {
                slot.push(CylLabel::Middle(x));
            }
        }
    }
    let mut index = HashMap::new();
    for (d, s) in layout.iter().enumerate() {
        for (i, &l) in s.iter().enumerate() {
            index.insert(l, ElemRef::new(d, i));
        }
    }
    let idx = |l: CylLabel| index[&l].index;
    let strata: Vec<Vec<Faces>> = layout
        .iter()
        .map(|s| {
            s.iter()
                .map(|&l| {
                    let mut f = [Vec::new(), Vec::new()];
                    for (j, a) in Sign::BOTH.into_iter().enumerate() {
                        match l {
                            CylLabel::Collapsed(x) => f[j].extend(p.faces(x, a).map(|y| idx(CylLabel::Collapsed(y)))),
                            CylLabel::End(b, x) => {
                                for y in p.faces(x, a) {
                                    f[j].push(if in_k(y) { idx(CylLabel::Collapsed(y)) } else { idx(CylLabel::End(b, y)) });
                                }
                            }
                            CylLabel::Middle(x) => {
                                f[j].push(idx(CylLabel::End(a, x)));
                                for y in p.faces(x, a.neg()).filter(|&y| !in_k(y)) {
                                    f[j].push(idx(CylLabel::Middle(y)));
                                }
                            }
                        }
                    }
                    let [i, o] = f;
                    Faces::new(i, o)
                })
                .collect()
        })
        .collect();
    let labels = layout.into_iter().flatten().collect();
    Ok(Cylinder { base: base.clone(), k: k.clone(), poset: Arc::new(OgPoset::build(strata)), labels, index })
}

/// The generating collapse `τ_K : arr ⊗_K V ↠ V` for an atom `V` and a
/// closed `K ⊆ ∂V`.
pub fn generating_collapse(base: &Arc<OgPoset>, k: &ElemSet) -> Result<Cylinder, ConstructError> {
    if base.greatest().is_none() {
        return Err(ConstructError::NotAtom);
    }
    let cyl = partial_cylinder(base, k)?;
    let bd = base.full_boundary(&base.full_set());
    if !k.is_subset(&bd) {
        return Err(ConstructError::KNotInBoundary);
    }
    Ok(cyl)
}

/// Result of a pushout: the carrier and the two legs into it.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub poset: Arc<OgPoset>,
    pub left: GradedFunction,
    pub right: GradedFunction,
}

/// Pushout of two embeddings with a common source. Elements of the left
/// target come first, then the new elements of the right target.
pub fn pushout_embedding(i: &GradedFunction, j: &GradedFunction) -> Result<Pushout, ConstructError> {
    if i.source().fingerprint() != j.source().fingerprint() {
        return Err(ConstructError::SpanMismatch);
    }
    if !i.is_embedding() || !j.is_embedding() {
        return Err(ConstructError::NotEmbedding);
    }
    let p = i.target();
    let q = j.target();
    let mut shared = vec![None; q.len()];
    for u in i.source().elements() {
        shared[q.flat(j.apply(u))] = Some(i.apply(u));
    }
    let (r, q_emb) = glue(p, q, &shared);
    let r = Arc::new(r);
    let left = GradedFunction::new_unchecked(p.clone(), r.clone(), p.elements().collect());
    let right = GradedFunction::new_unchecked(q.clone(), r.clone(), q_emb);
    Ok(Pushout { poset: r, left, right })
}

/// Result of substituting a subdivided atom into a complex.
#[derive(Clone, Debug)]
pub struct Substituted {
    pub poset: Arc<OgPoset>,
    /// The comap `P[V/x]_s → P` of the induced subdivision.
    pub subdivision: GradedFunction,
    /// The embedding `V → P[V/x]_s`.
    pub inclusion: GradedFunction,
}

/// `P[V/x]_s`. `s` is the comap `V → A` of a subdivision from an atom `A`
/// isomorphic to `cl{x}`.
pub fn pushout_comerger(p: &Arc<OgPoset>, x: ElemRef, s: &GradedFunction) -> Result<Substituted, ConstructError> {
    if !p.contains(x) {
        return Err(ConstructError::Og(OgError::NoSuchElement(x)));
    }
    let a = s.target();
    if a.greatest().is_none() {
        return Err(ConstructError::NotAtomSource);
    }
    let clx = p.cl(x);
    let (sub, origin) = p.sub_poset(&clx);
    let phi = iso::find_isomorphism(a, &sub).ok_or(ConstructError::NotAtomSource)?;
    if !classify(s).comap {
        return Err(ConstructError::NotComap);
    }
    let v = s.source();
    // c(z) ∈ P for z ∈ V
    let c = |z: ElemRef| origin[sub.flat(phi[a.flat(s.apply(z))])];
    let keep: Vec<ElemRef> = p.elements().filter(|&w| !clx.contains(p.flat(w))).collect();
    let dims = p.num_strata().max(v.num_strata());
    // layout: kept elements of P first, then V
    let mut pos: HashMap<ElemRef, usize> = HashMap::new();
    let mut counts = vec![0usize; dims];
    let mut kept_ref = Vec::new();
    for &w in &keep {
        pos.insert(w, counts[w.dim]);
        kept_ref.push(ElemRef::new(w.dim, counts[w.dim]));
        counts[w.dim] += 1;
    }
    let mut v_ref = Vec::new();
    for z in v.elements() {
        v_ref.push(ElemRef::new(z.dim, counts[z.dim]));
        counts[z.dim] += 1;
    }
    let mut strata: Vec<Vec<Faces>> = counts.iter().map(|&n| vec![Faces::default(); n]).collect();
    for (i, &w) in keep.iter().enumerate() {
        let mut f = [Vec::new(), Vec::new()];
        for (j, a_) in Sign::BOTH.into_iter().enumerate() {
            for y in p.faces(w, a_) {
                if let Some(&k) = pos.get(&y) {
                    f[j].push(k);
                }
            }
            if w.dim > 0 {
                for z in v.elements_of_dim(w.dim - 1) {
                    let cz = c(z);
                    if cz.dim == z.dim && p.face_sign(w, cz) == Some(a_) {
                        f[j].push(v_ref[v.flat(z)].index);
                    }
                }
            }
        }
        let [fi, fo] = f;
        let r = kept_ref[i];
        strata[r.dim][r.index] = Faces::new(fi, fo);
    }
    for z in v.elements() {
        let fr = v.face_record(z);
        let tr = |l: &Vec<usize>| -> Vec<usize> { l.iter().map(|&j| v_ref[v.flat(ElemRef::new(z.dim - 1, j))].index).collect() };
        let r = v_ref[v.flat(z)];
        strata[r.dim][r.index] = if z.dim == 0 { Faces::default() } else { Faces::new(tr(&fr.input), tr(&fr.output)) };
    }
    let poset = Arc::new(OgPoset::from_faces(strata)?);
    let mut tmap = vec![ElemRef::new(0, 0); poset.len()];
    for (i, &w) in keep.iter().enumerate() {
        tmap[poset.flat(kept_ref[i])] = w;
    }
    for z in v.elements() {
        tmap[poset.flat(v_ref[v.flat(z)])] = c(z);
    }
    let subdivision = GradedFunction::new_unchecked(poset.clone(), p.clone(), tmap);
    let inclusion = GradedFunction::new_unchecked(v.clone(), poset.clone(), v_ref);
    Ok(Substituted { poset, subdivision, inclusion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::{self, arrow, globe};

    #[test]
    fn gray_of_arrows_is_a_square() {
        let a = arrow();
        let sq = gray(a.carrier(), a.carrier());
        assert_eq!(sq.poset.stratum_sizes(), vec![4, 4, 1]);
        let top = sq.elem(ElemRef::new(1, 0), ElemRef::new(1, 0));
        let p = &sq.poset;
        let m = |x, y| sq.elem(x, y);
        let (e, z0, z1) = (ElemRef::new(1, 0), ElemRef::new(0, 0), ElemRef::new(0, 1));
        let mut ins: Vec<_> = p.faces(top, Sign::Minus).collect();
        let mut outs: Vec<_> = p.faces(top, Sign::Plus).collect();
        ins.sort();
        outs.sort();
        let mut ei = vec![m(z0, e), m(e, z1)];
        let mut eo = vec![m(z1, e), m(e, z0)];
        ei.sort();
        eo.sort();
        assert_eq!(ins, ei);
        assert_eq!(outs, eo);
    }

    #[test]
    fn gray_unit_and_sizes() {
        let g = globe(2);
        let pg = gray(&OgPoset::point(), g.carrier());
        assert!(iso::are_isomorphic(&pg.poset, g.carrier()));
        let ag = gray(arrow().carrier(), g.carrier());
        assert_eq!(ag.poset.len(), 15);
        assert_eq!(ag.poset.dim(), 3);
    }

    #[test]
    fn joins_of_points_are_simplices() {
        let j = join(&OgPoset::point(), &OgPoset::point());
        assert!(iso::are_isomorphic(&j.poset, arrow().carrier()));
        let t = join(&OgPoset::point(), arrow().carrier());
        assert_eq!(t.poset.stratum_sizes(), vec![3, 3, 1]);
        let e = join(&OgPoset::empty(), globe(2).carrier());
        assert!(iso::are_isomorphic(&e.poset, globe(2).carrier()));
        assert!(molecule::is_molecule(&simplex(3)));
    }

    #[test]
    fn cylinders_over_arrow() {
        let a = arrow();
        let base = a.carrier().clone();
        let full = base.full_boundary(&base.full_set());
        let c = generating_collapse(&base, &full).unwrap();
        assert!(iso::are_isomorphic(&c.poset, globe(2).carrier()));
        let mut plus = base.empty_set();
        plus.insert(1);
        let c = generating_collapse(&base, &plus).unwrap();
        assert_eq!(c.poset.stratum_sizes(), vec![3, 3, 1]);
        let c = partial_cylinder(&Arc::new(OgPoset::point()), &OgPoset::point().empty_set()).unwrap();
        assert!(iso::are_isomorphic(&c.poset, a.carrier()));
        let mut top = base.empty_set();
        top.insert(2);
        assert_eq!(partial_cylinder(&base, &top).unwrap_err(), ConstructError::KNotClosed);
    }

    #[test]
    fn pushout_of_two_arrows_at_a_point() {
        let a = arrow();
        let pt = Arc::new(OgPoset::point());
        let i = GradedFunction::new_unchecked(pt.clone(), a.carrier().clone(), vec![ElemRef::new(0, 1)]);
        let j = GradedFunction::new_unchecked(pt, a.carrier().clone(), vec![ElemRef::new(0, 0)]);
        let po = pushout_embedding(&i, &j).unwrap();
        assert_eq!(po.poset.stratum_sizes(), vec![3, 2]);
        assert!(molecule::is_molecule(&po.poset));
    }
}
