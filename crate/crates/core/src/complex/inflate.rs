//! The free inflate view of a directed complex: cells are pairs of a cell
//! of the base and a collapse of atoms onto its shape. Collapses are kept
//! in the normal form given by their factorisation into generating
//! collapses, so two pairs are equal exactly when their K-sequences are.

use std::collections::HashMap;
use std::sync::Arc;

use super::directed::{closure_iso, CellRef, Diagram, DirectedComplex};
use super::ComplexError;
use crate::construct::{generating_collapse, partial_cylinder, Cylinder};
use crate::molecule;
use crate::morphism::{factor_collapse, GradedFunction};
use crate::ogposet::{ElemRef, ElemSet, OgPoset, Sign};

/// A pair `(base, p)`: a cell of the view and a collapse of atoms from
/// some atom onto its shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InflateCell {
    pub base: CellRef,
    pub collapse: GradedFunction,
}

impl InflateCell {
    pub fn shape(&self) -> &Arc<OgPoset> {
        self.collapse.source()
    }
}

#[derive(Clone, Debug)]
pub enum DegeneracyKind {
    /// `ε u = u ∘ τ_{∂U}`.
    Unit,
    /// At a rewritable submolecule of the input boundary.
    LeftUnitor(GradedFunction),
    /// At a rewritable submolecule of the output boundary.
    RightUnitor(GradedFunction),
}

#[derive(Clone, Debug)]
struct Entry {
    base: CellRef,
    cylinders: Vec<Cylinder>,
    projection: GradedFunction,
}

type Key = (CellRef, Vec<Vec<usize>>);

fn key_of(base: CellRef, cylinders: &[Cylinder]) -> Key {
    (base, cylinders.iter().map(|c| c.k.ones().collect()).collect())
}

/// The free inflate complex on a base, materialised on demand. Cells of
/// the base keep their references.
#[derive(Clone, Debug)]
pub struct InflateView {
    base: DirectedComplex,
    complex: DirectedComplex,
    entries: HashMap<CellRef, Entry>,
    index: HashMap<Key, CellRef>,
}

impl InflateView {
    pub fn new(base: DirectedComplex) -> Self {
        let mut entries = HashMap::new();
        let mut index = HashMap::new();
        for c in base.cell_refs() {
            let shape = base.cell(c).shape().clone();
            entries.insert(c, Entry { base: c, cylinders: Vec::new(), projection: GradedFunction::identity(shape) });
            index.insert((c, Vec::new()), c);
        }
        InflateView { complex: base.clone(), base, entries, index }
    }

    pub fn base(&self) -> &DirectedComplex {
        &self.base
    }

    /// The cells materialised so far.
    pub fn complex(&self) -> &DirectedComplex {
        &self.complex
    }

    pub fn is_degenerate(&self, c: CellRef) -> bool {
        !self.entries[&c].cylinders.is_empty()
    }

    /// The normal pair of a cell of the view: a base cell and the
    /// canonical collapse onto its shape.
    pub fn normal_form(&self, c: CellRef) -> InflateCell {
        let e = &self.entries[&c];
        InflateCell { base: e.base, collapse: e.projection.clone() }
    }

    /// The stages `V₁, …, V_m` of the collapse behind a cell.
    pub fn cylinders(&self, c: CellRef) -> &[Cylinder] {
        &self.entries[&c].cylinders
    }

    /// The cell `(base, τ_{K₁} ∘ … ∘ τ_{K_m})`.
    pub fn intern(&mut self, base: CellRef, cylinders: Vec<Cylinder>) -> Result<CellRef, ComplexError> {
        let key = key_of(base, &cylinders);
        if let Some(&c) = self.index.get(&key) {
            return Ok(c);
        }
        let base_cell = self.base.get(base).ok_or_else(|| ComplexError::ShapeMismatch(format!("no base cell {base}")))?;
        let base_shape = base_cell.shape().clone();
        let base_attach = base_cell.attach().to_vec();
        let Some(last) = cylinders.last() else {
            return Err(ComplexError::ShapeMismatch(format!("no base cell {base}")));
        };
        let shape = last.poset.clone();
        let mut projection = last.projection();
        for c in cylinders[..cylinders.len() - 1].iter().rev() {
            projection = projection.then(&c.projection());
        }
        let top = shape.greatest().expect("cylinders over atoms are atoms");
        let mut given = Vec::new();
        for s in Sign::BOTH {
            for e in shape.faces(top, s) {
                let y = projection.apply(e);
                let at = base_attach[base_shape.flat(y)];
                let c = self.pull(&base_shape, y, at, &projection, e)?;
                given.push((e, c));
            }
        }
        let c = self.complex.add_cell(shape, &given)?;
        self.entries.insert(c, Entry { base, cylinders, projection });
        self.index.insert(key, c);
        Ok(c)
    }

    /// The cell `(base, q)` for a collapse `q` onto the shape of a base
    /// cell, with the isomorphism from the source of `q` to its shape.
    pub fn intern_collapse(&mut self, base: CellRef, q: &GradedFunction) -> Result<(CellRef, GradedFunction), ComplexError> {
        let fac = factor_collapse(q)?;
        let c = self.intern(base, fac.cylinders)?;
        Ok((c, fac.iso))
    }

    /// The cell at `e` of `u ∘ f`, where `u` assigns `at` to `y = f(e)` in
    /// `target`.
    fn pull(&mut self, target: &OgPoset, y: ElemRef, at: CellRef, f: &GradedFunction, e: ElemRef) -> Result<CellRef, ComplexError> {
        let (r, _, to) = f.restrict_to_cell(e);
        let entry = self.entries[&at].clone();
        let cshape = self.complex.cell(at).shape().clone();
        let psi: HashMap<ElemRef, ElemRef> = closure_iso(target, y, &cshape)
            .ok_or_else(|| ComplexError::ShapeMismatch(format!("closure of {y} does not match cell {at}")))?
            .into_iter()
            .collect();
        let g = GradedFunction::new_unchecked(r.target().clone(), cshape, to.iter().map(|t| psi[t]).collect());
        let q = r.then(&g).then(&entry.projection);
        Ok(self.intern_collapse(entry.base, &q)?.0)
    }

    /// `u ∘ f` for a diagram `u` in the view and a local collapse `f` onto
    /// its shape.
    pub fn act(&mut self, u: &Diagram, f: &GradedFunction) -> Result<Diagram, ComplexError> {
        if f.target().as_ref() != u.shape().as_ref() {
            return Err(ComplexError::ShapeMismatch("collapse does not land on the shape of the diagram".into()));
        }
        let p = f.source().clone();
        let mut assign = Vec::with_capacity(p.len());
        for e in p.elements() {
            let y = f.apply(e);
            assign.push(self.pull(u.shape(), y, u.at(y), f, e)?);
        }
        Ok(Diagram::new_unchecked(p, assign))
    }

    /// Units and unitors, realised by precomposition with `τ_K`.
    pub fn degeneracy(&mut self, u: &Diagram, kind: &DegeneracyKind) -> Result<Diagram, ComplexError> {
        let shape = u.shape().clone();
        let full = shape.full_set();
        let bd = shape.full_boundary(&full);
        let k = match kind {
            DegeneracyKind::Unit => bd,
            DegeneracyKind::LeftUnitor(iota) => unitor_k(&shape, iota, Sign::Minus)?,
            DegeneracyKind::RightUnitor(iota) => unitor_k(&shape, iota, Sign::Plus)?,
        };
        let cyl = partial_cylinder(&shape, &k).map_err(|_| ComplexError::NotRewritable)?;
        self.act(u, &cyl.projection())
    }

    /// `(c, q)` rewritten as its unique pair with a non-degenerate base.
    pub fn ez_normalize(&self, c: &InflateCell) -> Result<InflateCell, ComplexError> {
        let entry = &self.entries[&c.base];
        let q = c.collapse.then(&entry.projection);
        factor_collapse(&q)?;
        Ok(InflateCell { base: entry.base, collapse: q })
    }

    /// Materialises every cell of dimension at most `max_dim`.
    pub fn materialize(&mut self, max_dim: usize) -> Result<(), ComplexError> {
        let bases: Vec<CellRef> = self.base.cell_refs().filter(|c| c.dim <= max_dim).collect();
        for v in bases {
            let shape = self.base.cell(v).shape().clone();
            self.extend_from(v, shape, Vec::new(), max_dim, None)?;
        }
        Ok(())
    }

    /// All degenerate cells of dimension `dim` over the base cell `v`.
    pub fn degenerate_over(&mut self, v: CellRef, dim: usize) -> Result<Vec<CellRef>, ComplexError> {
        if dim <= v.dim {
            return Ok(Vec::new());
        }
        let shape = self.base.cell(v).shape().clone();
        let mut out = Vec::new();
        self.extend_from(v, shape, Vec::new(), dim, Some(&mut out))?;
        Ok(out)
    }

    fn extend_from(
        &mut self,
        v: CellRef,
        stage: Arc<OgPoset>,
        cylinders: Vec<Cylinder>,
        max_dim: usize,
        mut exact: Option<&mut Vec<CellRef>>,
    ) -> Result<(), ComplexError> {
        let d = stage.dim().max(0) as usize;
        if !cylinders.is_empty() {
            let c = self.intern(v, cylinders.clone())?;
            if d == max_dim {
                if let Some(out) = exact.as_deref_mut() {
                    out.push(c);
                }
            }
        }
        if d >= max_dim {
            return Ok(());
        }
        let bd = stage.full_boundary(&stage.full_set());
        for k in closed_subsets(&stage, &bd) {
            let cyl = generating_collapse(&stage, &k).map_err(|e| ComplexError::ShapeMismatch(e.to_string()))?;
            let next = cyl.poset.clone();
            let mut cs = cylinders.clone();
            cs.push(cyl);
            self.extend_from(v, next, cs, max_dim, exact.as_deref_mut())?;
        }
        Ok(())
    }
}

fn unitor_k(shape: &OgPoset, iota: &GradedFunction, sign: Sign) -> Result<ElemSet, ComplexError> {
    let full = shape.full_set();
    let n = shape.dim();
    if n < 1 || iota.target().as_ref() != shape || !iota.is_embedding() {
        return Err(ComplexError::NotRewritable);
    }
    let side = shape.boundary(&full, n as usize - 1, sign);
    let image = iota.image_set();
    let v = iota.source();
    if !image.is_subset(&side) || v.dim() != n - 1 || !v.is_round(&v.full_set()) {
        return Err(ComplexError::NotRewritable);
    }
    let (side_poset, side_origin) = shape.sub_poset(&side);
    let mut back = vec![usize::MAX; shape.len()];
    for (i, &o) in side_origin.iter().enumerate() {
        back[shape.flat(o)] = i;
    }
    let into_side = GradedFunction::new_unchecked(
        v.clone(),
        Arc::new(side_poset.clone()),
        iota.map().iter().map(|&y| side_poset.elem(back[shape.flat(y)])).collect(),
    );
    if molecule::is_submolecule(&into_side).is_none() {
        return Err(ComplexError::NotRewritable);
    }
    let mut k = shape.full_boundary(&full);
    k.difference_with(&shape.interior(&image));
    if !shape.is_closed(&k) {
        return Err(ComplexError::NotRewritable);
    }
    Ok(k)
}

/// Closed subsets of `p` contained in `within`.
pub(crate) fn closed_subsets(p: &OgPoset, within: &ElemSet) -> Vec<ElemSet> {
    let elems: Vec<ElemRef> = p.members(within).collect();
    let mut out = Vec::new();
    let mut cur = p.empty_set();
    fn go(p: &OgPoset, elems: &[ElemRef], i: usize, cur: &mut ElemSet, out: &mut Vec<ElemSet>) {
        if i == elems.len() {
            out.push(cur.clone());
            return;
        }
        let x = elems[i];
        go(p, elems, i + 1, cur, out);
        if p.all_faces(x).all(|y| cur.contains(p.flat(y))) {
            cur.insert(p.flat(x));
            go(p, elems, i + 1, cur, out);
            cur.set(p.flat(x), false);
        }
    }
    // elements come in order of increasing dimension, so faces are decided first
    go(p, &elems, 0, &mut cur, &mut out);
    out
}
