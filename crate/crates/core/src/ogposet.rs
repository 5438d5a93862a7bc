//! Oriented graded posets.
//!
//! An [`OgPoset`] is stored as a face table: one stratum per dimension, and
//! for every element the indices of its input and output faces in the
//! stratum below. Subsets of elements are bitsets over a flat indexing
//! (stratum by stratum).

use std::collections::hash_map::DefaultHasher;
use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::morphism::GradedFunction;

/// A set of elements of an [`OgPoset`], indexed by flat position.
pub type ElemSet = FixedBitSet;

/// Reference to an element by dimension and position within its stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemRef {
    pub dim: usize,
    pub index: usize,
}

impl ElemRef {
    pub const fn new(dim: usize, index: usize) -> Self {
        ElemRef { dim, index }
    }
}

impl fmt::Display for ElemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dim, self.index)
    }
}

impl Serialize for ElemRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.dim, self.index].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElemRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [dim, index] = <[usize; 2]>::deserialize(d)?;
        Ok(ElemRef { dim, index })
    }
}

/// Orientation of a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn neg(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn mul(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `(-)^n α`.
    pub fn flip_by(self, n: usize) -> Sign {
        if n % 2 == 0 {
            self
        } else {
            self.neg()
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
        }
    }
}

/// Input and output faces of one element, as sorted indices into the
/// stratum below.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Faces {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
}

impl Faces {
    pub fn new(mut input: Vec<usize>, mut output: Vec<usize>) -> Self {
        input.sort_unstable();
        output.sort_unstable();
        Faces { input, output }
    }

    pub fn get(&self, sign: Sign) -> &[usize] {
        match sign {
            Sign::Minus => &self.input,
            Sign::Plus => &self.output,
        }
    }

    fn get_mut(&mut self, sign: Sign) -> &mut Vec<usize> {
        match sign {
            Sign::Minus => &mut self.input,
            Sign::Plus => &mut self.output,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty() && self.output.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OgError {
    #[error("element {elem} has face {face} of the wrong dimension")]
    FaceDimMismatch { elem: ElemRef, face: ElemRef },
    #[error("element {elem} lists face {face} as both input and output")]
    OverlappingOrientation { elem: ElemRef, face: ElemRef },
    #[error("element {elem} lists face {face} twice")]
    DuplicateFace { elem: ElemRef, face: ElemRef },
    #[error("element {elem} has no faces, so the poset is not graded")]
    NotGraded { elem: ElemRef },
    #[error("element {elem} refers to missing face {face}")]
    DanglingRef { elem: ElemRef, face: ElemRef },
    #[error("element {0} does not exist")]
    NoSuchElement(ElemRef),
    #[error("element {elem} of positive dimension lacks an input or output face")]
    NotRegular { elem: ElemRef },
    #[error("subset is not downward closed")]
    NotClosed,
    #[error("closed subsets belong to different posets")]
    OwnerMismatch,
    #[error("malformed face table: {0}")]
    Parse(String),
}

/// An oriented graded poset.
#[derive(Clone)]
pub struct OgPoset {
    faces: Vec<Vec<Faces>>,
    cofaces: Vec<Vec<Faces>>,
    offsets: Vec<usize>,
    fingerprint: u64,
}

impl PartialEq for OgPoset {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.faces == other.faces
    }
}

impl Eq for OgPoset {}

impl Hash for OgPoset {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

impl fmt::Debug for OgPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OgPoset{:?}", self.stratum_sizes())
    }
}

impl OgPoset {
    /// Validates a face table and builds the poset.
    pub fn from_faces(faces: Vec<Vec<Faces>>) -> Result<Self, OgError> {
        let mut faces = faces;
        while faces.last().is_some_and(|s| s.is_empty()) {
            faces.pop();
        }
        for (d, stratum) in faces.iter_mut().enumerate() {
            for (i, el) in stratum.iter_mut().enumerate() {
                let elem = ElemRef::new(d, i);
                el.input.sort_unstable();
                el.output.sort_unstable();
                if d == 0 {
                    if let Some(&j) = el.input.first().or(el.output.first()) {
                        return Err(OgError::FaceDimMismatch { elem, face: ElemRef::new(0, j) });
                    }
                    continue;
                }
                for sign in Sign::BOTH {
                    let list = el.get(sign);
                    for w in list.windows(2) {
                        if w[0] == w[1] {
                            return Err(OgError::DuplicateFace { elem, face: ElemRef::new(d - 1, w[0]) });
                        }
                    }
                }
                if el.is_empty() {
                    return Err(OgError::NotGraded { elem });
                }
                for &j in el.input.iter() {
                    if el.output.binary_search(&j).is_ok() {
                        return Err(OgError::OverlappingOrientation { elem, face: ElemRef::new(d - 1, j) });
                    }
                }
            }
        }
        for d in 1..faces.len() {
            let below = faces[d - 1].len();
            for (i, el) in faces[d].iter().enumerate() {
                for &j in el.input.iter().chain(el.output.iter()) {
                    if j >= below {
                        return Err(OgError::DanglingRef { elem: ElemRef::new(d, i), face: ElemRef::new(d - 1, j) });
                    }
                }
            }
        }
        Ok(Self::build(faces))
    }

    pub(crate) fn build(faces: Vec<Vec<Faces>>) -> Self {
        let mut cofaces: Vec<Vec<Faces>> = faces.iter().map(|s| vec![Faces::default(); s.len()]).collect();
        for d in 1..faces.len() {
            for (i, el) in faces[d].iter().enumerate() {
                for sign in Sign::BOTH {
                    for &j in el.get(sign) {
                        cofaces[d - 1][j].get_mut(sign).push(i);
                    }
                }
            }
        }
        let mut offsets = Vec::with_capacity(faces.len() + 1);
        let mut acc = 0;
        for s in &faces {
            offsets.push(acc);
            acc += s.len();
        }
        offsets.push(acc);
        let mut h = DefaultHasher::new();
        faces.hash(&mut h);
        let fingerprint = h.finish();
        OgPoset { faces, cofaces, offsets, fingerprint }
    }

    /// The empty poset.
    pub fn empty() -> Self {
        Self::build(Vec::new())
    }

    /// The point.
    pub fn point() -> Self {
        Self::build(vec![vec![Faces::default()]])
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Dimension; `-1` for the empty poset.
    pub fn dim(&self) -> isize {
        self.faces.len() as isize - 1
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_strata(&self) -> usize {
        self.faces.len()
    }

    pub fn stratum_len(&self, d: usize) -> usize {
        self.faces.get(d).map_or(0, |s| s.len())
    }

    pub fn stratum_sizes(&self) -> Vec<usize> {
        self.faces.iter().map(|s| s.len()).collect()
    }

    pub fn face_table(&self) -> &[Vec<Faces>] {
        &self.faces
    }

    pub fn contains(&self, x: ElemRef) -> bool {
        x.index < self.stratum_len(x.dim)
    }

    pub fn flat(&self, x: ElemRef) -> usize {
        self.offsets[x.dim] + x.index
    }

    pub fn elem(&self, flat: usize) -> ElemRef {
        let d = self.offsets.partition_point(|&o| o <= flat) - 1;
        ElemRef::new(d, flat - self.offsets[d])
    }

    /// All elements in stratum order.
    pub fn elements(&self) -> impl Iterator<Item = ElemRef> + '_ {
        self.faces
            .iter()
            .enumerate()
            .flat_map(|(d, s)| (0..s.len()).map(move |i| ElemRef::new(d, i)))
    }

    pub fn elements_of_dim(&self, d: usize) -> impl Iterator<Item = ElemRef> {
        (0..self.stratum_len(d)).map(move |i| ElemRef::new(d, i))
    }

    pub fn faces(&self, x: ElemRef, sign: Sign) -> impl Iterator<Item = ElemRef> + '_ {
        let d = x.dim.wrapping_sub(1);
        self.faces[x.dim][x.index].get(sign).iter().map(move |&j| ElemRef::new(d, j))
    }

    pub fn all_faces(&self, x: ElemRef) -> impl Iterator<Item = ElemRef> + '_ {
        self.faces(x, Sign::Minus).chain(self.faces(x, Sign::Plus))
    }

    pub fn face_record(&self, x: ElemRef) -> &Faces {
        &self.faces[x.dim][x.index]
    }

    pub fn cofaces(&self, x: ElemRef, sign: Sign) -> impl Iterator<Item = ElemRef> + '_ {
        let d = x.dim + 1;
        self.cofaces[x.dim][x.index].get(sign).iter().map(move |&j| ElemRef::new(d, j))
    }

    pub fn all_cofaces(&self, x: ElemRef) -> impl Iterator<Item = ElemRef> + '_ {
        self.cofaces(x, Sign::Minus).chain(self.cofaces(x, Sign::Plus))
    }

    pub fn coface_record(&self, x: ElemRef) -> &Faces {
        &self.cofaces[x.dim][x.index]
    }

    /// Orientation of `y` as a face of `x`, if it is one.
    pub fn face_sign(&self, x: ElemRef, y: ElemRef) -> Option<Sign> {
        if x.dim != y.dim + 1 {
            return None;
        }
        let f = &self.faces[x.dim][x.index];
        if f.input.binary_search(&y.index).is_ok() {
            Some(Sign::Minus)
        } else if f.output.binary_search(&y.index).is_ok() {
            Some(Sign::Plus)
        } else {
            None
        }
    }

    /// Checks that every element of positive dimension has at least one
    /// input and one output face.
    pub fn check_regular_faces(&self) -> Result<(), OgError> {
        for x in self.elements() {
            if x.dim > 0 {
                let f = self.face_record(x);
                if f.input.is_empty() || f.output.is_empty() {
                    return Err(OgError::NotRegular { elem: x });
                }
            }
        }
        Ok(())
    }

    // ----- subsets -----

    pub fn empty_set(&self) -> ElemSet {
        FixedBitSet::with_capacity(self.len())
    }

    pub fn full_set(&self) -> ElemSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn set_of<I: IntoIterator<Item = ElemRef>>(&self, elems: I) -> ElemSet {
        let mut s = self.empty_set();
        for x in elems {
            s.insert(self.flat(x));
        }
        s
    }

    pub fn members<'a>(&'a self, set: &'a ElemSet) -> impl Iterator<Item = ElemRef> + 'a {
        set.ones().map(move |i| self.elem(i))
    }

    pub fn in_set(&self, set: &ElemSet, x: ElemRef) -> bool {
        set.contains(self.flat(x))
    }

    /// Smallest closed superset.
    pub fn closure(&self, set: &ElemSet) -> ElemSet {
        let mut out = set.clone();
        for d in (1..self.num_strata()).rev() {
            for i in 0..self.stratum_len(d) {
                let x = ElemRef::new(d, i);
                if out.contains(self.flat(x)) {
                    for y in self.all_faces(x) {
                        out.insert(self.flat(y));
                    }
                }
            }
        }
        out
    }

    pub fn cl(&self, x: ElemRef) -> ElemSet {
        self.closure(&self.set_of([x]))
    }

    pub fn is_closed(&self, set: &ElemSet) -> bool {
        set.ones().all(|i| self.all_faces(self.elem(i)).all(|y| set.contains(self.flat(y))))
    }

    /// Dimension of a subset; `-1` when empty.
    pub fn set_dim(&self, set: &ElemSet) -> isize {
        set.ones().last().map_or(-1, |i| self.elem(i).dim as isize)
    }

    /// Maximal elements of a closed subset.
    pub fn maximal(&self, set: &ElemSet) -> Vec<ElemRef> {
        self.members(set)
            .filter(|&x| !self.all_cofaces(x).any(|w| set.contains(self.flat(w))))
            .collect()
    }

    /// Δⁿ^α U: the n-dimensional elements of U with no (−α)-coface in U.
    pub fn delta(&self, set: &ElemSet, n: usize, sign: Sign) -> Vec<ElemRef> {
        self.elements_of_dim(n)
            .filter(|&x| set.contains(self.flat(x)))
            .filter(|&x| !self.cofaces(x, sign.neg()).any(|w| set.contains(self.flat(w))))
            .collect()
    }

    /// ∂ⁿ^α U.
    pub fn boundary(&self, set: &ElemSet, n: usize, sign: Sign) -> ElemSet {
        let mut gen = self.empty_set();
        for x in self.delta(set, n, sign) {
            gen.insert(self.flat(x));
        }
        for x in self.maximal(set) {
            if x.dim < n {
                gen.insert(self.flat(x));
            }
        }
        self.closure(&gen)
    }

    /// ∂ⁿU = ∂ⁿ⁻U ∪ ∂ⁿ⁺U.
    pub fn boundary_both(&self, set: &ElemSet, n: usize) -> ElemSet {
        let mut b = self.boundary(set, n, Sign::Minus);
        b.union_with(&self.boundary(set, n, Sign::Plus));
        b
    }

    /// ∂^α U with n = dim U − 1; empty for sets of dimension ≤ 0.
    pub fn boundary_default(&self, set: &ElemSet, sign: Sign) -> ElemSet {
        match self.set_dim(set) {
            d if d <= 0 => self.empty_set(),
            d => self.boundary(set, d as usize - 1, sign),
        }
    }

    /// ∂U = ∂^{dim U − 1} U, both signs.
    pub fn full_boundary(&self, set: &ElemSet) -> ElemSet {
        match self.set_dim(set) {
            d if d <= 0 => self.empty_set(),
            d => self.boundary_both(set, d as usize - 1),
        }
    }

    pub fn interior(&self, set: &ElemSet) -> ElemSet {
        let mut out = set.clone();
        out.difference_with(&self.full_boundary(set));
        out
    }

    /// Globularity: ∂ᵏ^α ∂ⁿ^β U = ∂ᵏ^α U for all k < n < dim U.
    pub fn is_globular(&self, set: &ElemSet) -> bool {
        let d = self.set_dim(set);
        if d < 1 {
            return true;
        }
        let d = d as usize;
        for n in 0..d {
            for beta in Sign::BOTH {
                let bn = self.boundary(set, n, beta);
                for k in 0..n {
                    for alpha in Sign::BOTH {
                        if self.boundary(&bn, k, alpha) != self.boundary(set, k, alpha) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn roundness(&self, set: &ElemSet) -> Roundness {
        let globular = self.is_globular(set);
        let mut round = globular;
        let d = self.set_dim(set);
        if round && d >= 1 {
            for n in 0..d as usize {
                let mut meet = self.boundary(set, n, Sign::Minus);
                meet.intersect_with(&self.boundary(set, n, Sign::Plus));
                let lower = if n == 0 { self.empty_set() } else { self.boundary_both(set, n - 1) };
                if meet != lower {
                    round = false;
                    break;
                }
            }
        }
        Roundness { globular, round }
    }

    pub fn is_round(&self, set: &ElemSet) -> bool {
        self.roundness(set).round
    }

    /// The greatest element, if there is one.
    pub fn greatest(&self) -> Option<ElemRef> {
        let top = self.maximal(&self.full_set());
        if top.len() == 1 {
            Some(top[0])
        } else {
            None
        }
    }

    /// Extracts a subset as a standalone poset. Returns the poset and, for
    /// each of its flat indices, the element it came from.
    pub fn sub_poset(&self, set: &ElemSet) -> (OgPoset, Vec<ElemRef>) {
        let mut new_index = vec![usize::MAX; self.len()];
        let mut strata: Vec<Vec<Faces>> = Vec::new();
        let mut origin = Vec::with_capacity(set.count_ones(..));
        for d in 0..self.num_strata() {
            let mut stratum = Vec::new();
            for i in 0..self.stratum_len(d) {
                let x = ElemRef::new(d, i);
                if !set.contains(self.flat(x)) {
                    continue;
                }
                new_index[self.flat(x)] = stratum.len();
                let f = self.face_record(x);
                let tr = |v: &Vec<usize>| -> Vec<usize> {
                    v.iter()
                        .filter_map(|&j| {
                            let k = new_index[self.flat(ElemRef::new(d - 1, j))];
                            (k != usize::MAX).then_some(k)
                        })
                        .collect()
                };
                let nf = if d == 0 { Faces::default() } else { Faces::new(tr(&f.input), tr(&f.output)) };
                stratum.push(nf);
                origin.push(x);
            }
            strata.push(stratum);
        }
        while strata.last().is_some_and(|s| s.is_empty()) {
            strata.pop();
        }
        (OgPoset::build(strata), origin)
    }

    /// Oriented thinness check.
    pub fn check_oriented_thinness(&self) -> ThinnessReport {
        let mut violations = Vec::new();
        for x in self.elements_of_dim(1) {
            let f = self.face_record(x);
            if f.input.len() != 1 || f.output.len() != 1 {
                violations.push(ThinnessViolation {
                    bottom: None,
                    top: x,
                    reason: format!("1-dimensional element has {} input and {} output faces", f.input.len(), f.output.len()),
                });
            }
        }
        for d in 2..self.num_strata() {
            for z in self.elements_of_dim(d) {
                let mut seen: Vec<ElemRef> = Vec::new();
                for y in self.all_faces(z) {
                    for x in self.all_faces(y) {
                        if !seen.contains(&x) {
                            seen.push(x);
                        }
                    }
                }
                for x in seen {
                    let mids: Vec<(Sign, Sign)> = self
                        .all_faces(z)
                        .filter_map(|y| {
                            let a = self.face_sign(y, x)?;
                            let b = self.face_sign(z, y)?;
                            Some((a, b))
                        })
                        .collect();
                    if mids.len() != 2 {
                        violations.push(ThinnessViolation {
                            bottom: Some(x),
                            top: z,
                            reason: format!("interval has {} intermediate elements", mids.len()),
                        });
                    } else {
                        let p1 = mids[0].0.mul(mids[0].1);
                        let p2 = mids[1].0.mul(mids[1].1);
                        if p1 != p2.neg() {
                            violations.push(ThinnessViolation {
                                bottom: Some(x),
                                top: z,
                                reason: "orientation products do not cancel".to_string(),
                            });
                        }
                    }
                }
            }
        }
        ThinnessReport { ok: violations.is_empty(), violations }
    }

    /// Builds the closed subset wrapper for a set of elements.
    pub fn closed_subset(&self, set: ElemSet) -> Result<ClosedSubset, OgError> {
        if !self.is_closed(&set) {
            return Err(OgError::NotClosed);
        }
        Ok(ClosedSubset { owner: self.fingerprint, members: set })
    }

    /// Closure of a list of elements, as a [`ClosedSubset`].
    pub fn closure_of(&self, elems: &[ElemRef]) -> Result<ClosedSubset, OgError> {
        for &x in elems {
            if !self.contains(x) {
                return Err(OgError::NoSuchElement(x));
            }
        }
        let set = self.closure(&self.set_of(elems.iter().copied()));
        Ok(ClosedSubset { owner: self.fingerprint, members: set })
    }

    pub fn to_raw(&self) -> RawOgPoset {
        RawOgPoset {
            strata: self
                .faces
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|f| RawElement {
                            input: f.input.iter().map(|&i| RawFace::Index(i)).collect(),
                            output: f.output.iter().map(|&i| RawFace::Index(i)).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_raw(raw: &RawOgPoset) -> Result<Self, OgError> {
        let mut strata = Vec::with_capacity(raw.strata.len());
        for (d, s) in raw.strata.iter().enumerate() {
            let mut stratum = Vec::with_capacity(s.len());
            for (i, el) in s.iter().enumerate() {
                let elem = ElemRef::new(d, i);
                let conv = |faces: &Vec<RawFace>| -> Result<Vec<usize>, OgError> {
                    faces
                        .iter()
                        .map(|f| match *f {
                            RawFace::Index(j) if d == 0 => Err(OgError::FaceDimMismatch { elem, face: ElemRef::new(0, j) }),
                            RawFace::Index(j) => Ok(j),
                            RawFace::Ref([fd, j]) if fd + 1 != d => {
                                Err(OgError::FaceDimMismatch { elem, face: ElemRef::new(fd, j) })
                            }
                            RawFace::Ref([_, j]) => Ok(j),
                        })
                        .collect()
                };
                stratum.push(Faces { input: conv(&el.input)?, output: conv(&el.output)? });
            }
            strata.push(stratum);
        }
        Self::from_faces(strata)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("face table serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, OgError> {
        let raw: RawOgPoset = serde_json::from_value(v.clone()).map_err(|e| OgError::Parse(e.to_string()))?;
        Self::from_raw(&raw)
    }

    /// Finds an isomorphism, unique when `self` is a molecule.
    pub fn find_isomorphism(self: &std::sync::Arc<Self>, other: &std::sync::Arc<Self>) -> Option<GradedFunction> {
        let m = crate::iso::find_isomorphism(self, other)?;
        Some(GradedFunction::new_unchecked(self.clone(), other.clone(), m))
    }
}

/// Result of [`OgPoset::roundness`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Roundness {
    pub globular: bool,
    pub round: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThinnessViolation {
    pub bottom: Option<ElemRef>,
    pub top: ElemRef,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThinnessReport {
    pub ok: bool,
    pub violations: Vec<ThinnessViolation>,
}

/// A downward-closed subset tagged with the fingerprint of its poset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedSubset {
    owner: u64,
    members: ElemSet,
}

impl ClosedSubset {
    pub fn owner(&self) -> u64 {
        self.owner
    }

    pub fn members(&self) -> &ElemSet {
        &self.members
    }

    pub fn into_members(self) -> ElemSet {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn elements(&self, p: &OgPoset) -> Result<Vec<ElemRef>, OgError> {
        self.check_owner(p)?;
        Ok(p.members(&self.members).collect())
    }

    pub fn check_owner(&self, p: &OgPoset) -> Result<(), OgError> {
        if p.fingerprint() == self.owner {
            Ok(())
        } else {
            Err(OgError::OwnerMismatch)
        }
    }

    pub fn union(&self, other: &ClosedSubset) -> Result<ClosedSubset, OgError> {
        if self.owner != other.owner {
            return Err(OgError::OwnerMismatch);
        }
        let mut m = self.members.clone();
        m.union_with(&other.members);
        Ok(ClosedSubset { owner: self.owner, members: m })
    }

    pub fn intersection(&self, other: &ClosedSubset) -> Result<ClosedSubset, OgError> {
        if self.owner != other.owner {
            return Err(OgError::OwnerMismatch);
        }
        let mut m = self.members.clone();
        m.intersect_with(&other.members);
        Ok(ClosedSubset { owner: self.owner, members: m })
    }

    /// Boundary of the subset inside its owner.
    pub fn boundary(&self, p: &OgPoset, n: usize, sign: Option<Sign>) -> Result<ClosedSubset, OgError> {
        self.check_owner(p)?;
        let m = match sign {
            Some(s) => p.boundary(&self.members, n, s),
            None => p.boundary_both(&self.members, n),
        };
        Ok(ClosedSubset { owner: self.owner, members: m })
    }

    /// Per-dimension index lists.
    pub fn to_index_lists(&self, p: &OgPoset) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); p.num_strata()];
        for x in p.members(&self.members) {
            out[x.dim].push(x.index);
        }
        while out.last().is_some_and(|v| v.is_empty()) {
            out.pop();
        }
        out
    }

    pub fn from_index_lists(p: &OgPoset, lists: &[Vec<usize>]) -> Result<ClosedSubset, OgError> {
        let mut elems = Vec::new();
        for (d, l) in lists.iter().enumerate() {
            for &i in l {
                let x = ElemRef::new(d, i);
                if !p.contains(x) {
                    return Err(OgError::NoSuchElement(x));
                }
                elems.push(x);
            }
        }
        p.closed_subset(p.set_of(elems))
    }
}

/// JSON face-table format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawOgPoset {
    pub strata: Vec<Vec<RawElement>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawElement {
    #[serde(rename = "in", default)]
    pub input: Vec<RawFace>,
    #[serde(rename = "out", default)]
    pub output: Vec<RawFace>,
}

/// A face given either as an index into the stratum below or as an
/// explicit `[dim, index]` pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawFace {
    Index(usize),
    Ref([usize; 2]),
}

/// Glues `q` onto `p`. `shared[i]` names the element of `p` that the
/// `i`-th element of `q` (flat order) is identified with, if any; the
/// identified part must be a closed subset of `q` mapped isomorphically.
/// Elements of `p` keep their references; the remaining elements of `q`
/// are appended stratum by stratum. Returns the result and the embedding
/// of `q`.
pub fn glue(p: &OgPoset, q: &OgPoset, shared: &[Option<ElemRef>]) -> (OgPoset, Vec<ElemRef>) {
    let dims = p.num_strata().max(q.num_strata());
    let mut strata: Vec<Vec<Faces>> = (0..dims).map(|d| p.face_table().get(d).cloned().unwrap_or_default()).collect();
    let mut emb: Vec<ElemRef> = Vec::with_capacity(q.len());
    for x in q.elements() {
        let fx = q.flat(x);
        let target = match shared[fx] {
            Some(y) => y,
            None => {
                let f = q.face_record(x);
                let tr = |v: &Vec<usize>| -> Vec<usize> { v.iter().map(|&j| emb[q.flat(ElemRef::new(x.dim - 1, j))].index).collect() };
                let faces = if x.dim == 0 { Faces::default() } else { Faces::new(tr(&f.input), tr(&f.output)) };
                strata[x.dim].push(faces);
                ElemRef::new(x.dim, strata[x.dim].len() - 1)
            }
        };
        emb.push(target);
    }
    (OgPoset::build(strata), emb)
}

/// Adds one new element with the given faces.
pub fn add_element(p: &OgPoset, dim: usize, input: Vec<usize>, output: Vec<usize>) -> (OgPoset, ElemRef) {
    let mut strata: Vec<Vec<Faces>> = p.face_table().to_vec();
    while strata.len() <= dim {
        strata.push(Vec::new());
    }
    strata[dim].push(Faces::new(input, output));
    let r = ElemRef::new(dim, strata[dim].len() - 1);
    (OgPoset::build(strata), r)
}

/// Connected components of the Hasse diagram restricted to `set`.
pub fn hasse_components(p: &OgPoset, set: &ElemSet) -> Vec<usize> {
    let mut comp = vec![usize::MAX; p.len()];
    let mut next = 0;
    for start in set.ones() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let x = p.elem(i);
            for y in p.all_faces(x).chain(p.all_cofaces(x)) {
                let j = p.flat(y);
                if set.contains(j) && comp[j] == usize::MAX {
                    comp[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    comp
}
