//! Marked complexes, marked horns, saturations, and bounded fibrancy
//! checks against a finite inventory.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::directed::{parse_shape, CellRef, Diagram, DirectedComplex, Extensions};
use super::inflate::InflateView;
use super::ComplexError;
use crate::molecule::{self, is_paste_split, paste_splits, Clause, Molecule, Recognizer};
use crate::ogposet::{ElemRef, ElemSet, OgPoset, Sign};

/// Which closure condition the marking satisfies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Plain,
    Inflate,
    Merge,
}

/// A directed complex with a set of marked cells of positive dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedComplex {
    pub base: DirectedComplex,
    marked: BTreeSet<CellRef>,
    pub variant: Variant,
}

impl MarkedComplex {
    pub fn new(base: DirectedComplex, marked: impl IntoIterator<Item = CellRef>, variant: Variant) -> Result<Self, ComplexError> {
        let marked: BTreeSet<CellRef> = marked.into_iter().collect();
        for &c in &marked {
            if c.dim == 0 {
                return Err(ComplexError::InvalidMarking(format!("cell {c} has dimension 0")));
            }
            if base.get(c).is_none() {
                return Err(ComplexError::InvalidMarking(format!("no cell {c}")));
            }
        }
        Ok(MarkedComplex { base, marked, variant })
    }

    /// No marked cells.
    pub fn flat(base: DirectedComplex) -> Self {
        MarkedComplex { base, marked: BTreeSet::new(), variant: Variant::Plain }
    }

    /// The materialised part of an inflate view, with the given base cells
    /// and every degenerate cell marked.
    pub fn from_inflate(view: &InflateView, base_marked: &[CellRef]) -> Result<Self, ComplexError> {
        let x = view.complex().clone();
        let mut marked: BTreeSet<CellRef> = base_marked.iter().copied().collect();
        marked.extend(x.cell_refs().filter(|&c| view.is_degenerate(c)));
        MarkedComplex::new(x, marked, Variant::Inflate)
    }

    pub fn is_marked(&self, c: CellRef) -> bool {
        self.marked.contains(&c)
    }

    pub fn marked(&self) -> &BTreeSet<CellRef> {
        &self.marked
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.base.to_json();
        v["marked"] = json!(self.marked.iter().collect::<Vec<_>>());
        v["variant"] = json!(self.variant);
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, ComplexError> {
        let base = DirectedComplex::from_json(v)?;
        let marked: Vec<CellRef> = match v.get("marked") {
            None => Vec::new(),
            Some(m) => serde_json::from_value(m.clone()).map_err(|e| ComplexError::Parse(format!("marked: {e}")))?,
        };
        let variant: Variant = match v.get("variant") {
            None => Variant::Plain,
            Some(s) => serde_json::from_value(s.clone()).map_err(|e| ComplexError::Parse(format!("variant: {e}")))?,
        };
        MarkedComplex::new(base, marked, variant)
    }
}

/// `(Lᵢ, Rᵢ)` for `i = 1..=k`, as subsets of the atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LayeringWitness {
    pub left: Vec<ElemSet>,
    pub right: Vec<ElemSet>,
}

/// A marked horn of `(U, B)` at the pivot `x ∈ Δ^α U`, together with every
/// layering witness found for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornInstance {
    pub atom: Arc<OgPoset>,
    pub marking: ElemSet,
    pub sign: Sign,
    pub pivot: ElemRef,
    pub witnesses: Vec<LayeringWitness>,
}

const WITNESS_CAP: usize = 64;

impl HornInstance {
    /// The horn, if `(U, B, α, x)` satisfies the defining conditions.
    pub fn new(atom: Arc<OgPoset>, marking: ElemSet, sign: Sign, pivot: ElemRef) -> Option<Self> {
        let u = atom.as_ref();
        let top = u.greatest()?;
        if !basic_conditions(u, top, &marking, sign, pivot) {
            return None;
        }
        let mut rec = Recognizer::new(u);
        let target = u.boundary(&u.full_set(), top.dim - 1, sign);
        let mut found = Vec::new();
        search(u, &mut rec, &target, pivot.dim, pivot, &marking, &mut found);
        let mut seen = HashSet::new();
        let witnesses: Vec<LayeringWitness> = found
            .into_iter()
            .map(|(left, right)| LayeringWitness { left, right })
            .filter(|w| seen.insert(w.clone()))
            .take(WITNESS_CAP)
            .collect();
        if witnesses.is_empty() {
            return None;
        }
        Some(HornInstance { atom, marking, sign, pivot, witnesses })
    }

    pub fn top(&self) -> ElemRef {
        self.atom.greatest().expect("horns live on atoms")
    }

    /// `Λ = U \ {⊤, x}`.
    pub fn domain(&self) -> ElemSet {
        let u = &self.atom;
        let mut s = u.full_set();
        s.set(u.flat(self.top()), false);
        s.set(u.flat(self.pivot), false);
        s
    }

    /// Re-checks the four defining conditions for every stored witness.
    pub fn validate(&self) -> bool {
        let u = self.atom.as_ref();
        let Some(top) = u.greatest() else { return false };
        if !basic_conditions(u, top, &self.marking, self.sign, self.pivot) || self.witnesses.is_empty() {
            return false;
        }
        self.witnesses.iter().all(|w| check_witness(u, top, self.pivot, self.sign, &self.marking, w))
    }

    pub fn to_json(&self) -> Value {
        let u = &self.atom;
        let set = |s: &ElemSet| u.members(s).collect::<Vec<_>>();
        let witnesses: Vec<Value> = self
            .witnesses
            .iter()
            .map(|w| json!({"left": w.left.iter().map(set).collect::<Vec<_>>(), "right": w.right.iter().map(set).collect::<Vec<_>>()}))
            .collect();
        json!({
            "atom": u.to_json(),
            "marking": set(&self.marking),
            "pivot": self.pivot,
            "sign": self.sign,
            "witnesses": witnesses,
        })
    }

    /// Reads `(atom, marking, pivot, sign)`; witnesses are recomputed.
    pub fn from_json(v: &Value) -> Result<Self, ComplexError> {
        let parse = |m: &str| ComplexError::Parse(m.to_string());
        let atom = parse_shape(v.get("atom").ok_or_else(|| parse("horn without \"atom\""))?)?;
        let marking: Vec<ElemRef> = serde_json::from_value(v.get("marking").cloned().unwrap_or(json!([])))
            .map_err(|e| parse(&format!("marking: {e}")))?;
        let pivot: ElemRef = serde_json::from_value(v.get("pivot").cloned().unwrap_or(Value::Null))
            .map_err(|e| parse(&format!("pivot: {e}")))?;
        let sign: Sign = serde_json::from_value(v.get("sign").cloned().unwrap_or(Value::Null))
            .map_err(|e| parse(&format!("sign: {e}")))?;
        for &m in marking.iter().chain([&pivot]) {
            if !atom.contains(m) {
                return Err(parse(&format!("{m} is not an element of the atom")));
            }
        }
        if marking.iter().any(|m| m.dim == 0) {
            return Err(ComplexError::InvalidMarking("0-dimensional elements cannot be marked".into()));
        }
        let set = atom.set_of(marking);
        HornInstance::new(atom, set, sign, pivot).ok_or_else(|| parse("not a marked horn"))
    }
}

fn basic_conditions(u: &OgPoset, top: ElemRef, marking: &ElemSet, sign: Sign, x: ElemRef) -> bool {
    if top.dim == 0 || !marking.contains(u.flat(top)) || u.members(marking).any(|e| e.dim == 0) {
        return false;
    }
    if u.face_sign(top, x) != Some(sign) {
        return false;
    }
    let opposite_marked = u.faces(top, sign.neg()).all(|y| marking.contains(u.flat(y)));
    marking.contains(u.flat(x)) == opposite_marked
}

fn top_cells_marked(u: &OgPoset, s: &ElemSet, level: usize, marking: &ElemSet) -> bool {
    u.set_dim(s) <= level as isize && u.members(s).filter(|z| z.dim == level).all(|z| marking.contains(u.flat(z)))
}

type Sides = (Vec<ElemSet>, Vec<ElemSet>);

fn search(u: &OgPoset, rec: &mut Recognizer, m: &ElemSet, level: usize, x: ElemRef, marking: &ElemSet, out: &mut Vec<Sides>) {
    let clx = u.cl(x);
    if level == 0 {
        if *m == clx {
            out.push((Vec::new(), Vec::new()));
        }
        return;
    }
    if out.len() >= WITNESS_CAP || !clx.is_subset(m) {
        return;
    }
    let k = level - 1;
    let mut lefts = vec![(u.boundary(m, k, Sign::Minus), m.clone())];
    for (a, b) in paste_splits(u, m, k) {
        if clx.is_subset(&b) && top_cells_marked(u, &a, level, marking) && rec.is_molecule(&a) && rec.is_molecule(&b) {
            lefts.push((a, b));
        }
    }
    for (l, rest) in lefts {
        let mut rights = vec![(rest.clone(), u.boundary(&rest, k, Sign::Plus))];
        for (c, d) in paste_splits(u, &rest, k) {
            if clx.is_subset(&c) && top_cells_marked(u, &d, level, marking) && rec.is_molecule(&c) && rec.is_molecule(&d) {
                rights.push((c, d));
            }
        }
        for (inner, r) in rights {
            let mut sub = Vec::new();
            search(u, rec, &inner, level - 1, x, marking, &mut sub);
            for (mut ls, mut rs) in sub {
                ls.push(l.clone());
                rs.push(r.clone());
                out.push((ls, rs));
            }
        }
    }
}

fn check_witness(u: &OgPoset, top: ElemRef, x: ElemRef, sign: Sign, marking: &ElemSet, w: &LayeringWitness) -> bool {
    let k = x.dim;
    if w.left.len() != k || w.right.len() != k {
        return false;
    }
    let mut rec = Recognizer::new(u);
    let mut cur = u.cl(x);
    for i in 1..=k {
        let (l, r) = (&w.left[i - 1], &w.right[i - 1]);
        for side in [l, r] {
            if !u.is_closed(side) || !top_cells_marked(u, side, i, marking) || !rec.is_molecule(side) {
                return false;
            }
        }
        let mut rest = cur.clone();
        rest.union_with(r);
        if !is_paste_split(u, &rest, &cur, r, i - 1) {
            return false;
        }
        let mut whole = rest.clone();
        whole.union_with(l);
        if !is_paste_split(u, &whole, l, &rest, i - 1) || !rec.is_molecule(&whole) {
            return false;
        }
        cur = whole;
    }
    cur == u.boundary(&u.full_set(), top.dim - 1, sign)
}

/// Every subset of the positive-dimensional elements of `u` containing
/// its top element.
pub fn all_markings(u: &OgPoset) -> Vec<ElemSet> {
    let Some(top) = u.greatest() else { return Vec::new() };
    let free: Vec<usize> = u.elements().filter(|e| e.dim > 0 && *e != top).map(|e| u.flat(e)).collect();
    if free.len() > 16 {
        return Vec::new();
    }
    (0u32..1 << free.len())
        .map(|bits| {
            let mut s = u.set_of([top]);
            for (j, &f) in free.iter().enumerate() {
                if bits & (1 << j) != 0 {
                    s.insert(f);
                }
            }
            s
        })
        .collect()
}

/// All marked horns over the given marked atoms.
pub fn enumerate_marked_horns(universe: &[(Arc<OgPoset>, ElemSet)]) -> Vec<HornInstance> {
    let mut out = Vec::new();
    for (u, b) in universe {
        let Some(top) = u.greatest() else { continue };
        for sign in Sign::BOTH {
            for x in u.faces(top, sign).collect::<Vec<_>>() {
                if let Some(h) = HornInstance::new(u.clone(), b.clone(), sign, x) {
                    out.push(h);
                }
            }
        }
    }
    out
}

/// `Σ` with its source and target markings.
#[derive(Clone, Debug)]
pub struct Saturation {
    pub sigma: Molecule,
    pub source_marking: ElemSet,
    pub target_marking: ElemSet,
}

fn clause_embeddings(m: &Molecule) -> (&[ElemRef], &[ElemRef]) {
    match m.clause() {
        Clause::Paste { left_emb, right_emb, .. } => (left_emb, right_emb),
        Clause::Atom { input_emb, output_emb, .. } => (input_emb, output_emb),
        Clause::Point => (&[], &[]),
    }
}

/// `Σ = (R ∘ W) ∘ (U ∘ L)` with `R : mrg(U∘V) ⇒ U∘V` and
/// `L : V∘W ⇒ mrg(V∘W)`.
pub fn saturation_instance(u: &Molecule, v: &Molecule, w: &Molecule) -> Result<Saturation, ComplexError> {
    let n = u.dim();
    if n < 1 || v.dim() != n || w.dim() != n || !u.is_round() || !v.is_round() || !w.is_round() {
        return Err(ComplexError::PasteUndefined);
    }
    let n = n as usize;
    let pu = |a: &Molecule, b: &Molecule, k: usize| molecule::paste(a, b, k).map_err(|_| ComplexError::PasteUndefined);
    let uv = pu(u, v, n - 1)?;
    let vw = pu(v, w, n - 1)?;
    let m_uv = molecule::merger(&uv)?;
    let m_vw = molecule::merger(&vw)?;
    let r = molecule::atom(&m_uv, &uv)?;
    let l = molecule::atom(&vw, &m_vw)?;
    let rw = pu(&r, w, n - 1)?;
    let ul = pu(u, &l, n - 1)?;
    let sigma = pu(&rw, &ul, n)?;

    let (r_in, _) = clause_embeddings(&r);
    let (_, l_out) = clause_embeddings(&l);
    let (_, ul_right) = clause_embeddings(&ul);
    let (_, sigma_right) = clause_embeddings(&sigma);
    let lp = l.carrier();
    let ulp = ul.carrier();
    let sp = sigma.carrier();
    let from_ul = |y: ElemRef| sigma_right[ulp.flat(y)];
    let from_l = |y: ElemRef| from_ul(ul_right[lp.flat(y)]);

    let r_top = r.top().expect("atom");
    let uv_top = r_in[m_uv.carrier().flat(m_uv.top().expect("atom"))];
    let l_top = from_l(l.top().expect("atom"));
    let vw_top = from_l(l_out[m_vw.carrier().flat(m_vw.top().expect("atom"))]);
    let source = sp.set_of([r_top, uv_top, l_top, vw_top]);

    // the n-dimensional elements shared by both halves are those of U∘V∘W
    let rw_len = rw.carrier().stratum_len(n);
    let right_image: HashSet<ElemRef> = ulp.elements().map(from_ul).collect();
    let mut target = source.clone();
    for e in sp.elements_of_dim(n) {
        if e.index < rw_len && right_image.contains(&e) {
            target.insert(sp.flat(e));
        }
    }
    Ok(Saturation { sigma, source_marking: source, target_marking: target })
}

/// An inventory entry for fibrancy checks.
#[derive(Clone, Debug)]
pub enum InventoryItem {
    Horn(HornInstance),
    Saturation(Saturation),
}

impl InventoryItem {
    pub fn from_json(v: &Value) -> Result<Self, ComplexError> {
        if let Some(parts) = v.get("saturation") {
            let parts = parts.as_array().filter(|p| p.len() == 3).ok_or_else(|| ComplexError::Parse("saturation takes three molecules".into()))?;
            let mut ms = Vec::new();
            for p in parts {
                let m = match p {
                    Value::String(_) => {
                        let s = parse_shape(p)?;
                        molecule::recognize_molecule(&s).ok_or_else(|| ComplexError::Parse("not a molecule".into()))?
                    }
                    _ => match Molecule::from_json(p) {
                        Ok(m) => m,
                        Err(_) => {
                            let s = OgPoset::from_json(p)?;
                            molecule::recognize_molecule(&s).ok_or_else(|| ComplexError::Parse("not a molecule".into()))?
                        }
                    },
                };
                ms.push(m);
            }
            return Ok(InventoryItem::Saturation(saturation_instance(&ms[0], &ms[1], &ms[2])?));
        }
        Ok(InventoryItem::Horn(HornInstance::from_json(v)?))
    }
}

/// Horn morphisms `Λ → X`, as assignments on the whole atom with the top
/// and pivot left open.
pub fn horn_morphisms(x: &MarkedComplex, h: &HornInstance, limit: usize) -> Vec<Vec<Option<CellRef>>> {
    let u = h.atom.as_ref();
    let (lam, origin) = u.sub_poset(&h.domain());
    let found = Extensions::new(&x.base, &lam)
        .with_filter(|e, c| !h.marking.contains(u.flat(origin[lam.flat(e)])) || x.is_marked(c))
        .run(&vec![None; lam.len()], limit);
    found
        .into_iter()
        .map(|a| {
            let mut full = vec![None; u.len()];
            for (i, c) in a.into_iter().enumerate() {
                full[u.flat(origin[i])] = Some(c);
            }
            full
        })
        .collect()
}

/// A marked extension of the horn morphism `e` to the whole atom.
pub fn horn_filler_search(x: &MarkedComplex, h: &HornInstance, e: &[Option<CellRef>]) -> Option<Vec<CellRef>> {
    let u = h.atom.as_ref();
    Extensions::new(&x.base, u)
        .with_filter(|el, c| !h.marking.contains(u.flat(el)) || x.is_marked(c))
        .run(e, 1)
        .pop()
}

fn marked_maps(x: &MarkedComplex, shape: &OgPoset, marking: &ElemSet, limit: usize) -> Vec<Vec<CellRef>> {
    Extensions::new(&x.base, shape)
        .with_filter(|el, c| !marking.contains(shape.flat(el)) || x.is_marked(c))
        .run(&vec![None; shape.len()], limit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ItemStatus {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub index: usize,
    pub status: ItemStatus,
    /// Number of morphisms from the domain that were checked.
    pub morphisms: usize,
    /// For horns that pass, one filler per horn morphism.
    pub fillers: Vec<Vec<CellRef>>,
    /// For items that fail, a morphism with no filler.
    pub witness: Option<Vec<Option<CellRef>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrancyReport {
    pub items: Vec<ItemReport>,
    /// Cells of dimension above the bound that are not marked.
    pub unmarked_above: Vec<CellRef>,
    pub dim_bound: Option<usize>,
    pub pass: bool,
}

const MORPHISM_CAP: usize = 100_000;

/// Checks every inventory item against `x`; for a finite `n`, also checks
/// that every cell of dimension above `n` is marked.
pub fn fibrancy_report(x: &MarkedComplex, inventory: &[InventoryItem], n: Option<usize>) -> FibrancyReport {
    let mut items = Vec::new();
    for (index, item) in inventory.iter().enumerate() {
        let report = match item {
            InventoryItem::Horn(h) => {
                let ms = horn_morphisms(x, h, MORPHISM_CAP);
                let mut fillers = Vec::new();
                let mut witness = None;
                for e in &ms {
                    match horn_filler_search(x, h, e) {
                        Some(f) => fillers.push(f),
                        None => {
                            witness = Some(e.clone());
                            break;
                        }
                    }
                }
                let status = if witness.is_some() { ItemStatus::Fail } else { ItemStatus::Pass };
                if status == ItemStatus::Fail {
                    fillers.clear();
                }
                ItemReport { index, status, morphisms: ms.len(), fillers, witness }
            }
            InventoryItem::Saturation(s) => {
                let sp = s.sigma.carrier();
                let ms = marked_maps(x, sp, &s.source_marking, MORPHISM_CAP);
                let bad = ms.iter().find(|m| sp.members(&s.target_marking).any(|e| !x.is_marked(m[sp.flat(e)])));
                let witness = bad.map(|m| m.iter().copied().map(Some).collect());
                let status = if witness.is_some() { ItemStatus::Fail } else { ItemStatus::Pass };
                ItemReport { index, status, morphisms: ms.len(), fillers: Vec::new(), witness }
            }
        };
        items.push(report);
    }
    let unmarked_above: Vec<CellRef> = match n {
        Some(n) => x.base.cell_refs().filter(|c| c.dim > n && !x.is_marked(*c)).collect(),
        None => Vec::new(),
    };
    let pass = items.iter().all(|i| i.status == ItemStatus::Pass) && unmarked_above.is_empty();
    FibrancyReport { items, unmarked_above, dim_bound: n, pass }
}

impl FibrancyReport {
    /// Re-checks every recorded filler and witness against `x`.
    pub fn replay(&self, x: &MarkedComplex, inventory: &[InventoryItem]) -> bool {
        for r in &self.items {
            let Some(item) = inventory.get(r.index) else { return false };
            match (item, r.status) {
                (InventoryItem::Horn(h), ItemStatus::Pass) => {
                    let u = h.atom.as_ref();
                    if r.fillers.len() != r.morphisms {
                        return false;
                    }
                    for f in &r.fillers {
                        let d = Diagram::new_unchecked(h.atom.clone(), f.clone());
                        if d.check(&x.base).is_err() || u.members(&h.marking).any(|e| !x.is_marked(f[u.flat(e)])) {
                            return false;
                        }
                    }
                }
                (InventoryItem::Horn(h), ItemStatus::Fail) => {
                    let Some(e) = &r.witness else { return false };
                    let u = h.atom.as_ref();
                    let dom = h.domain();
                    let (lam, origin) = u.sub_poset(&dom);
                    let Some(assign) = origin.iter().map(|&o| e[u.flat(o)]).collect::<Option<Vec<_>>>() else { return false };
                    let d = Diagram::new_unchecked(Arc::new(lam), assign);
                    let marks_ok = origin.iter().all(|&o| !h.marking.contains(u.flat(o)) || x.is_marked(e[u.flat(o)].unwrap()));
                    if d.check(&x.base).is_err() || !marks_ok || horn_filler_search(x, h, e).is_some() {
                        return false;
                    }
                }
                (InventoryItem::Saturation(s), status) => {
                    let sp = s.sigma.carrier();
                    match (&r.witness, status) {
                        (Some(w), ItemStatus::Fail) => {
                            let Some(assign) = w.iter().copied().collect::<Option<Vec<_>>>() else { return false };
                            let d = Diagram::new_unchecked(sp.clone(), assign.clone());
                            let src_ok = sp.members(&s.source_marking).all(|e| x.is_marked(assign[sp.flat(e)]));
                            let tgt_bad = sp.members(&s.target_marking).any(|e| !x.is_marked(assign[sp.flat(e)]));
                            if d.check(&x.base).is_err() || !src_ok || !tgt_bad {
                                return false;
                            }
                        }
                        (None, ItemStatus::Pass) => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

/// Marked cells witnessing `u ⇒ v` and `v ⇒ u`.
#[derive(Clone, Debug, Serialize)]
pub struct EquivSearch {
    pub forward: Vec<CellRef>,
    pub backward: Vec<CellRef>,
}

impl EquivSearch {
    pub fn is_equivalence(&self) -> bool {
        !self.forward.is_empty() && !self.backward.is_empty()
    }
}

/// Scans the marked cells one dimension up for `u ⇒ v` and `v ⇒ u`.
pub fn marked_equiv_search(x: &MarkedComplex, u: &Diagram, v: &Diagram) -> Result<EquivSearch, ComplexError> {
    let n = u.dim();
    if n < 0 || v.dim() != n || !u.is_round() || !v.is_round() {
        return Err(ComplexError::NotParallel);
    }
    let n = n as usize;
    if n > 0 {
        for s in Sign::BOTH {
            if !u.boundary(n - 1, s).equivalent(&v.boundary(n - 1, s)) {
                return Err(ComplexError::NotParallel);
            }
        }
    }
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for c in x.base.cells_of_dim(n + 1).filter(|&c| x.is_marked(c)) {
        let d = x.base.cell_diagram(c);
        let (i, o) = (d.boundary(n, Sign::Minus), d.boundary(n, Sign::Plus));
        if i.equivalent(u) && o.equivalent(v) {
            forward.push(c);
        }
        if i.equivalent(v) && o.equivalent(u) {
            backward.push(c);
        }
    }
    Ok(EquivSearch { forward, backward })
}
