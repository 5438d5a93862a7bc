//! Cells with attachments, and diagrams.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ComplexError;
use crate::construct::{cube, simplex};
use crate::iso;
use crate::molecule::{self, MoleculeError, SubstOrigin};
use crate::morphism::GradedFunction;
use crate::ogposet::{glue, ElemRef, ElemSet, OgPoset};

/// Reference to a cell by dimension and position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef {
    pub dim: usize,
    pub index: usize,
}

impl CellRef {
    pub const fn new(dim: usize, index: usize) -> Self {
        CellRef { dim, index }
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.dim, self.index)
    }
}

impl Serialize for CellRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.dim, self.index].serialize(s)
    }
}

impl<'de> Deserialize<'de> for CellRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [dim, index] = <[usize; 2]>::deserialize(d)?;
        Ok(CellRef { dim, index })
    }
}

type IsoMemo = HashMap<(u64, u64), Option<Arc<Vec<ElemRef>>>>;

thread_local! {
    static ISO_MEMO: RefCell<IsoMemo> = RefCell::new(HashMap::new());
}

/// The isomorphism between two atoms, unique when it exists.
pub(crate) fn atom_iso(p: &OgPoset, q: &OgPoset) -> Option<Arc<Vec<ElemRef>>> {
    let key = (p.fingerprint(), q.fingerprint());
    if let Some(r) = ISO_MEMO.with(|m| m.borrow().get(&key).cloned()) {
        return r;
    }
    let r = iso::find_isomorphism(p, q).map(Arc::new);
    ISO_MEMO.with(|m| m.borrow_mut().insert(key, r.clone()));
    r
}

/// Pairs `(y, z)` identifying `cl{x}` in `p` with the atom `shape`.
pub(crate) fn closure_iso(p: &OgPoset, x: ElemRef, shape: &OgPoset) -> Option<Vec<(ElemRef, ElemRef)>> {
    let (sub, origin) = p.sub_poset(&p.cl(x));
    let phi = atom_iso(&sub, shape)?;
    Some(origin.into_iter().zip(phi.iter().copied()).collect())
}

/// Built-in shapes by name: `point`, `arrow`, `globe:n`, `simplex:k`,
/// `cube:n`.
pub fn named_shape(name: &str) -> Option<Arc<OgPoset>> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a.trim().parse::<usize>().ok()?)),
        None => (name, None),
    };
    match (head.trim(), arg) {
        ("point", None) => Some(molecule::point().carrier().clone()),
        ("arrow", None) => Some(molecule::arrow().carrier().clone()),
        ("globe", Some(n)) if n <= 16 => Some(molecule::globe(n).carrier().clone()),
        ("simplex", Some(k)) if k <= 6 => Some(simplex(k)),
        ("cube", Some(n)) if n <= 5 => Some(cube(n)),
        _ => None,
    }
}

/// A cell: an atom and, for each of its elements, the cell it is attached
/// to. The greatest element is attached to the cell itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    shape: Arc<OgPoset>,
    attach: Vec<CellRef>,
}

impl Cell {
    pub fn shape(&self) -> &Arc<OgPoset> {
        &self.shape
    }

    pub fn attach(&self) -> &[CellRef] {
        &self.attach
    }

    pub fn dim(&self) -> usize {
        self.shape.dim().max(0) as usize
    }

    /// The cell attached at an element of the shape.
    pub fn face(&self, e: ElemRef) -> CellRef {
        self.attach[self.shape.flat(e)]
    }
}

fn incompatible(msg: impl Into<String>) -> ComplexError {
    ComplexError::AttachmentIncompatible(msg.into())
}

/// A finite directed complex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DirectedComplex {
    cells: Vec<Vec<Cell>>,
}

impl DirectedComplex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> isize {
        self.cells.iter().rposition(|c| !c.is_empty()).map_or(-1, |d| d as isize)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stratum_sizes(&self) -> Vec<usize> {
        let n = (self.dim() + 1) as usize;
        self.cells.iter().take(n).map(Vec::len).collect()
    }

    pub fn get(&self, c: CellRef) -> Option<&Cell> {
        self.cells.get(c.dim).and_then(|s| s.get(c.index))
    }

    pub fn cell(&self, c: CellRef) -> &Cell {
        &self.cells[c.dim][c.index]
    }

    pub fn cells_of_dim(&self, d: usize) -> impl Iterator<Item = CellRef> {
        let n = self.cells.get(d).map_or(0, Vec::len);
        (0..n).map(move |i| CellRef::new(d, i))
    }

    pub fn cell_refs(&self) -> impl Iterator<Item = CellRef> + '_ {
        self.cells.iter().enumerate().flat_map(|(d, s)| (0..s.len()).map(move |i| CellRef::new(d, i)))
    }

    /// Adds a cell of the given atom shape. `given` attaches some elements
    /// of the shape to existing cells; attachments of the remaining
    /// elements below them are derived, and every element other than the
    /// top must end up attached.
    pub fn add_cell(&mut self, shape: Arc<OgPoset>, given: &[(ElemRef, CellRef)]) -> Result<CellRef, ComplexError> {
        let top = shape.greatest().ok_or_else(|| incompatible("shape is not an atom"))?;
        let me = CellRef::new(top.dim, self.cells.get(top.dim).map_or(0, Vec::len));
        let mut attach: Vec<Option<CellRef>> = vec![None; shape.len()];
        attach[shape.flat(top)] = Some(me);
        let mut given = given.to_vec();
        given.sort_by_key(|&(e, _)| Reverse(e.dim));
        for (e, c) in given {
            if !shape.contains(e) || e == top {
                return Err(incompatible(format!("{e} is not a proper element of the shape")));
            }
            self.propagate(&shape, &mut attach, e, c)?;
        }
        let attach = attach
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| incompatible(format!("element {} is not attached", shape.elem(i)))))
            .collect::<Result<Vec<_>, _>>()?;
        while self.cells.len() <= top.dim {
            self.cells.push(Vec::new());
        }
        self.cells[top.dim].push(Cell { shape, attach });
        Ok(me)
    }

    fn propagate(&self, shape: &OgPoset, attach: &mut [Option<CellRef>], e: ElemRef, c: CellRef) -> Result<(), ComplexError> {
        let cell = self.get(c).ok_or_else(|| incompatible(format!("no cell {c}")))?;
        if cell.dim() != e.dim {
            return Err(incompatible(format!("{e} attached to cell {c} of dimension {}", cell.dim())));
        }
        let pairs = closure_iso(shape, e, &cell.shape)
            .ok_or_else(|| incompatible(format!("the closure of {e} does not have the shape of {c}")))?;
        for (y, z) in pairs {
            let t = cell.attach[cell.shape.flat(z)];
            let slot = &mut attach[shape.flat(y)];
            match *slot {
                Some(s) if s != t => return Err(incompatible(format!("{y} attached to both {s} and {t}"))),
                _ => *slot = Some(t),
            }
        }
        Ok(())
    }

    /// One cell per element of `p`, with the same references.
    pub fn representable(p: &OgPoset) -> Self {
        let mut cells: Vec<Vec<Cell>> = (0..p.num_strata()).map(|_| Vec::new()).collect();
        for x in p.elements() {
            let (sub, origin) = p.sub_poset(&p.cl(x));
            let attach = origin.iter().map(|o| CellRef::new(o.dim, o.index)).collect();
            cells[x.dim].push(Cell { shape: Arc::new(sub), attach });
        }
        DirectedComplex { cells }
    }

    /// One vertex and one edge from the vertex to itself.
    pub fn loop_complex() -> Self {
        let mut x = DirectedComplex::new();
        let v = x.add_cell(molecule::point().carrier().clone(), &[]).expect("point");
        let arrow = molecule::arrow().carrier().clone();
        x.add_cell(arrow, &[(ElemRef::new(0, 0), v), (ElemRef::new(0, 1), v)]).expect("loop");
        x
    }

    /// Re-checks every attachment.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for c in self.cell_refs() {
            let cell = self.cell(c);
            let top = cell.shape.greatest().ok_or_else(|| incompatible(format!("cell {c} is not an atom")))?;
            if top.dim != c.dim || cell.attach.len() != cell.shape.len() || cell.face(top) != c {
                return Err(incompatible(format!("cell {c} has a malformed attachment")));
            }
            if !molecule::is_molecule(&cell.shape) {
                return Err(incompatible(format!("shape of cell {c} is not an atom")));
            }
            for e in cell.shape.elements().filter(|&e| e != top) {
                let d = cell.face(e);
                let mut scratch: Vec<Option<CellRef>> = cell.attach.iter().copied().map(Some).collect();
                self.propagate(&cell.shape, &mut scratch, e, d)?;
            }
        }
        Ok(())
    }

    pub fn cell_diagram(&self, c: CellRef) -> Diagram {
        let cell = self.cell(c);
        Diagram { shape: cell.shape.clone(), assign: cell.attach.clone() }
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .take((self.dim() + 1) as usize)
            .map(|s| {
                s.iter()
                    .map(|cell| {
                        let top = cell.shape.greatest();
                        let attach: Vec<Value> = cell
                            .shape
                            .elements()
                            .filter(|&e| Some(e) != top)
                            .map(|e| {
                                let t = cell.face(e);
                                json!([t.dim, t.index, cell.shape.flat(e)])
                            })
                            .collect();
                        json!({"shape": cell.shape.to_json(), "attach": attach})
                    })
                    .collect()
            })
            .collect();
        json!({ "cells": cells })
    }

    pub fn from_json(v: &Value) -> Result<Self, ComplexError> {
        let parse = |m: &str| ComplexError::Parse(m.to_string());
        let layers = v.get("cells").and_then(Value::as_array).ok_or_else(|| parse("missing \"cells\" array"))?;
        let mut x = DirectedComplex::new();
        for (d, layer) in layers.iter().enumerate() {
            let layer = layer.as_array().ok_or_else(|| parse("each stratum of \"cells\" must be an array"))?;
            for entry in layer {
                let shape = parse_shape(entry.get("shape").ok_or_else(|| parse("cell without \"shape\""))?)?;
                if shape.dim() != d as isize {
                    return Err(ComplexError::ShapeMismatch(format!("cell listed in dimension {d} has a shape of dimension {}", shape.dim())));
                }
                if !molecule::is_molecule(&shape) || shape.greatest().is_none() {
                    return Err(incompatible("cell shape is not an atom"));
                }
                let mut given = Vec::new();
                if let Some(att) = entry.get("attach") {
                    let att = att.as_array().ok_or_else(|| parse("\"attach\" must be an array"))?;
                    for a in att {
                        given.push(parse_attachment(&shape, a)?);
                    }
                }
                x.add_cell(shape, &given)?;
            }
        }
        Ok(x)
    }
}

fn parse_attachment(shape: &OgPoset, a: &Value) -> Result<(ElemRef, CellRef), ComplexError> {
    let bad = || ComplexError::Parse("attachments are [cell_dim, cell_idx, elem]".to_string());
    let a = a.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
    let cd = a[0].as_u64().ok_or_else(bad)? as usize;
    let ci = a[1].as_u64().ok_or_else(bad)? as usize;
    let e = if let Some(flat) = a[2].as_u64() {
        let flat = flat as usize;
        if flat >= shape.len() {
            return Err(incompatible(format!("element {flat} outside the shape")));
        }
        shape.elem(flat)
    } else {
        let e: ElemRef = serde_json::from_value(a[2].clone()).map_err(|_| bad())?;
        if !shape.contains(e) {
            return Err(incompatible(format!("element {e} outside the shape")));
        }
        e
    };
    Ok((e, CellRef::new(cd, ci)))
}

/// A shape given either by name or as an oriented graded poset.
pub(crate) fn parse_shape(v: &Value) -> Result<Arc<OgPoset>, ComplexError> {
    match v {
        Value::String(s) => named_shape(s).ok_or_else(|| ComplexError::Parse(format!("unknown shape name {s:?}"))),
        _ => Ok(Arc::new(OgPoset::from_json(v)?)),
    }
}

/// A diagram: an assignment of cells to the elements of a shape,
/// compatible with attachments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    shape: Arc<OgPoset>,
    assign: Vec<CellRef>,
}

impl Diagram {
    pub fn new(x: &DirectedComplex, shape: Arc<OgPoset>, assign: Vec<CellRef>) -> Result<Self, ComplexError> {
        let d = Diagram { shape, assign };
        d.check(x)?;
        Ok(d)
    }

    pub(crate) fn new_unchecked(shape: Arc<OgPoset>, assign: Vec<CellRef>) -> Self {
        Diagram { shape, assign }
    }

    pub fn shape(&self) -> &Arc<OgPoset> {
        &self.shape
    }

    pub fn assign(&self) -> &[CellRef] {
        &self.assign
    }

    pub fn at(&self, e: ElemRef) -> CellRef {
        self.assign[self.shape.flat(e)]
    }

    pub fn dim(&self) -> isize {
        self.shape.dim()
    }

    pub fn check(&self, x: &DirectedComplex) -> Result<(), ComplexError> {
        if self.assign.len() != self.shape.len() {
            return Err(incompatible("assignment length differs from the shape"));
        }
        for e in self.shape.elements() {
            let mut scratch: Vec<Option<CellRef>> = self.assign.iter().copied().map(Some).collect();
            x.propagate(&self.shape, &mut scratch, e, self.at(e))?;
        }
        Ok(())
    }

    pub fn is_round(&self) -> bool {
        !self.shape.is_empty() && self.shape.is_round(&self.shape.full_set())
    }

    /// Cells at the maximal elements of the shape.
    pub fn top_cells(&self) -> Vec<CellRef> {
        self.shape.maximal(&self.shape.full_set()).into_iter().map(|e| self.at(e)).collect()
    }

    /// Restriction to a closed subset, with the origin of each element.
    pub fn restrict(&self, set: &ElemSet) -> (Diagram, Vec<ElemRef>) {
        let (sub, origin) = self.shape.sub_poset(set);
        let assign = origin.iter().map(|&o| self.at(o)).collect();
        (Diagram { shape: Arc::new(sub), assign }, origin)
    }

    /// `∂ⁿ^α u`.
    pub fn boundary(&self, n: usize, sign: crate::ogposet::Sign) -> Diagram {
        self.restrict(&self.shape.boundary(&self.shape.full_set(), n, sign)).0
    }

    /// Equality up to an isomorphism of shapes.
    pub fn equivalent(&self, other: &Diagram) -> bool {
        let allow = |a: ElemRef, b: ElemRef| self.at(a) == other.at(b);
        iso::find_isomorphism_where(&self.shape, &other.shape, &allow).is_some()
    }

    /// `u ∘ f` for a local embedding `f` into the shape.
    pub fn along(&self, f: &GradedFunction) -> Diagram {
        let assign = f.map().iter().map(|&y| self.at(y)).collect();
        Diagram { shape: f.source().clone(), assign }
    }

    /// `u ∘ₖ v`. Elements of `u` keep their references in the result; the
    /// second component embeds the shape of `v`.
    pub fn paste(&self, other: &Diagram, k: usize) -> Result<(Diagram, Vec<ElemRef>), ComplexError> {
        use crate::ogposet::Sign;
        let p = &self.shape;
        let q = &other.shape;
        let bu = p.boundary(&p.full_set(), k, Sign::Plus);
        let bv = q.boundary(&q.full_set(), k, Sign::Minus);
        let (su, ou) = p.sub_poset(&bu);
        let (sv, ov) = q.sub_poset(&bv);
        if !iso::are_isomorphic(&sv, &su) {
            return Err(ComplexError::PasteUndefined);
        }
        let allow = |a: ElemRef, b: ElemRef| other.at(ov[sv.flat(a)]) == self.at(ou[su.flat(b)]);
        let phi = iso::find_isomorphism_where(&sv, &su, &allow).ok_or(ComplexError::GlueMismatch)?;
        let mut shared = vec![None; q.len()];
        for (i, &b) in phi.iter().enumerate() {
            shared[q.flat(ov[i])] = Some(ou[su.flat(b)]);
        }
        let (glued, emb) = glue(p, q, &shared);
        let mut assign = vec![CellRef::new(0, 0); glued.len()];
        for x in p.elements() {
            assign[glued.flat(x)] = self.at(x);
        }
        for y in q.elements() {
            assign[glued.flat(emb[q.flat(y)])] = other.at(y);
        }
        Ok((Diagram { shape: Arc::new(glued), assign }, emb))
    }

    /// `u[w/ι]`: replaces the rewritable subdiagram at `iota` by `w`.
    pub fn substitute(&self, x: &DirectedComplex, iota: &GradedFunction, w: &Diagram) -> Result<Diagram, ComplexError> {
        let um = molecule::recognize_molecule(&self.shape).ok_or(ComplexError::NotRewritable)?;
        let wm = molecule::recognize_molecule(&w.shape).ok_or(ComplexError::NotRewritable)?;
        let sub = molecule::substitute(&um, iota, &wm).map_err(|e| match e {
            MoleculeError::NotRewritable | MoleculeError::NotSubmolecule => ComplexError::NotRewritable,
            MoleculeError::BoundaryMismatch | MoleculeError::NotRound => ComplexError::BoundaryMismatch,
            other => other.into(),
        })?;
        let assign = sub
            .origin
            .iter()
            .map(|o| match *o {
                SubstOrigin::Outer(g) => self.at(g),
                SubstOrigin::Inserted(y) => w.at(y),
            })
            .collect();
        let d = Diagram { shape: sub.molecule.carrier().clone(), assign };
        d.check(x).map_err(|_| ComplexError::BoundaryMismatch)?;
        Ok(d)
    }

    pub fn to_json(&self) -> Value {
        json!({"shape": self.shape.to_json(), "assign": self.assign})
    }

    pub fn from_json(x: &DirectedComplex, v: &Value) -> Result<Self, ComplexError> {
        let shape = parse_shape(v.get("shape").ok_or_else(|| ComplexError::Parse("diagram without \"shape\"".into()))?)?;
        let assign: Vec<CellRef> = serde_json::from_value(v.get("assign").cloned().unwrap_or(Value::Null))
            .map_err(|e| ComplexError::Parse(e.to_string()))?;
        Diagram::new(x, shape, assign)
    }
}

type Candidate = (CellRef, Vec<(usize, CellRef)>);

/// Exhaustive search for diagrams from a shape into a complex extending a
/// partial assignment, subject to a per-element filter.
pub struct Extensions<'a> {
    x: &'a DirectedComplex,
    shape: &'a OgPoset,
    order: Vec<ElemRef>,
    options: Vec<Option<Arc<Vec<Candidate>>>>,
    allow: Box<dyn Fn(ElemRef, CellRef) -> bool + 'a>,
}

impl<'a> Extensions<'a> {
    pub fn new(x: &'a DirectedComplex, shape: &'a OgPoset) -> Self {
        let mut order: Vec<ElemRef> = shape.elements().collect();
        order.sort_by_key(|e| (Reverse(e.dim), e.index));
        Extensions { x, shape, order, options: vec![None; shape.len()], allow: Box::new(|_, _| true) }
    }

    pub fn with_filter(mut self, f: impl Fn(ElemRef, CellRef) -> bool + 'a) -> Self {
        self.allow = Box::new(f);
        self
    }

    fn options_for(&mut self, e: ElemRef) -> Arc<Vec<Candidate>> {
        let fe = self.shape.flat(e);
        if let Some(o) = &self.options[fe] {
            return o.clone();
        }
        let (sub, origin) = self.shape.sub_poset(&self.shape.cl(e));
        let mut out = Vec::new();
        for c in self.x.cells_of_dim(e.dim) {
            let cell = self.x.cell(c);
            if let Some(phi) = atom_iso(&sub, &cell.shape) {
                let implied = origin.iter().zip(phi.iter()).map(|(&y, &z)| (self.shape.flat(y), cell.face(z))).collect();
                out.push((c, implied));
            }
        }
        let out = Arc::new(out);
        self.options[fe] = Some(out.clone());
        out
    }

    /// Up to `limit` complete assignments extending `partial`.
    pub fn run(&mut self, partial: &[Option<CellRef>], limit: usize) -> Vec<Vec<CellRef>> {
        let mut assign = partial.to_vec();
        let mut out = Vec::new();
        if limit > 0 {
            self.go(0, &mut assign, &mut out, limit);
        }
        out
    }

    fn go(&mut self, i: usize, assign: &mut Vec<Option<CellRef>>, out: &mut Vec<Vec<CellRef>>, limit: usize) {
        if i == self.order.len() {
            out.push(assign.iter().map(|a| a.expect("complete")).collect());
            return;
        }
        let e = self.order[i];
        let current = assign[self.shape.flat(e)];
        let opts = self.options_for(e);
        for (c, implied) in opts.iter() {
            if current.is_some_and(|a| a != *c) || !(self.allow)(e, *c) {
                continue;
            }
            let mut changed = Vec::new();
            let mut ok = true;
            for &(fy, t) in implied {
                match assign[fy] {
                    Some(s) if s != t => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        assign[fy] = Some(t);
                        changed.push(fy);
                    }
                }
            }
            if ok {
                self.go(i + 1, assign, out, limit);
            }
            for fy in changed {
                assign[fy] = None;
            }
            if out.len() >= limit {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molecule::{arrow, atom, paste, point};
    use crate::ogposet::Sign;

    fn compositor() -> Arc<OgPoset> {
        let a = arrow();
        let p2 = paste(&a, &a, 0).unwrap();
        atom(&p2, &a).unwrap().carrier().clone()
    }

    #[test]
    fn representables_have_one_cell_per_element() {
        assert_eq!(DirectedComplex::representable(&OgPoset::point()).len(), 1);
        let k = DirectedComplex::representable(&compositor());
        assert_eq!(k.len(), 7);
        k.validate().unwrap();
    }

    #[test]
    fn loop_complex_is_valid() {
        let l = DirectedComplex::loop_complex();
        assert_eq!(l.stratum_sizes(), vec![1, 1]);
        l.validate().unwrap();
    }

    #[test]
    fn bad_attachment_is_rejected() {
        let mut x = DirectedComplex::new();
        x.add_cell(point().carrier().clone(), &[]).unwrap();
        let e = x.add_cell(arrow().carrier().clone(), &[(ElemRef::new(0, 0), CellRef::new(0, 0)), (ElemRef::new(0, 1), CellRef::new(0, 0))]).unwrap();
        // an edge position of the globe attached to a vertex
        let g = crate::molecule::globe(2).carrier().clone();
        let err = x.add_cell(g, &[(ElemRef::new(1, 0), e), (ElemRef::new(1, 1), CellRef::new(0, 0))]).unwrap_err();
        assert!(matches!(err, ComplexError::AttachmentIncompatible(_)));
    }

    #[test]
    fn json_round_trip() {
        let k = DirectedComplex::representable(&compositor());
        let back = DirectedComplex::from_json(&k.to_json()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn boundary_of_an_edge_is_its_source() {
        let l = DirectedComplex::loop_complex();
        let e = l.cell_diagram(CellRef::new(1, 0));
        let src = e.boundary(0, Sign::Minus);
        assert_eq!(src.assign(), &[CellRef::new(0, 0)]);
    }

    #[test]
    fn pasting_the_loop_with_itself() {
        let l = DirectedComplex::loop_complex();
        let e = l.cell_diagram(CellRef::new(1, 0));
        let (p, _) = e.paste(&e, 0).unwrap();
        p.check(&l).unwrap();
        assert_eq!(p.shape().stratum_sizes(), vec![3, 2]);
        assert!(p.assign().iter().all(|c| c.dim == 0 || *c == CellRef::new(1, 0)));
    }

    #[test]
    fn extensions_of_a_path_into_the_loop() {
        let l = DirectedComplex::loop_complex();
        let a = arrow();
        let p3 = paste(&paste(&a, &a, 0).unwrap(), &a, 0).unwrap();
        let found = Extensions::new(&l, p3.carrier()).run(&vec![None; p3.len()], 10);
        assert_eq!(found.len(), 1);
    }
}
