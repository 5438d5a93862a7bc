//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use dircx::construct::partial_cylinder;
use dircx::corpus::{Corpus, CorpusBounds};
use dircx::iso::all_isomorphisms;
use dircx::morphism::{is_comap, is_map, GradedFunction};
use dircx::ogposet::{ElemRef, ElemSet, OgPoset};

/// Bounds of the exhaustive corpus used by the suites.
pub const CORPUS: CorpusBounds = CorpusBounds { max_elements: 16, max_dim: 3 };

pub fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| Corpus::generate(CORPUS))
}

/// A smaller corpus for searches that are exponential in the shape size.
pub fn small_corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| Corpus::generate(CorpusBounds { max_elements: 9, max_dim: 3 }))
}

/// Every function `P → Q` with `f(y) ≤ f(x)` whenever `y ≤ x` and
/// `dim f(x) ≤ dim x`.
pub fn order_preserving(p: &Arc<OgPoset>, q: &Arc<OgPoset>, limit: usize) -> Vec<GradedFunction> {
    monotone(p, q, true, limit)
}

/// Every order-preserving function `P → Q`, optionally restricted to
/// those that do not raise dimension.
pub fn monotone(p: &Arc<OgPoset>, q: &Arc<OgPoset>, graded: bool, limit: usize) -> Vec<GradedFunction> {
    let mut order: Vec<ElemRef> = p.elements().collect();
    order.sort_by(|a, b| b.dim.cmp(&a.dim).then(a.index.cmp(&b.index)));
    let closures: Vec<ElemSet> = q.elements().map(|z| q.cl(z)).collect();
    let mut assign = vec![None; p.len()];
    let mut out = Vec::new();
    go(p, q, graded, &order, 0, &closures, &mut assign, &mut out, limit);
    out
}

#[allow(clippy::too_many_arguments)]
fn go(
    p: &Arc<OgPoset>,
    q: &Arc<OgPoset>,
    graded: bool,
    order: &[ElemRef],
    i: usize,
    closures: &[ElemSet],
    assign: &mut Vec<Option<ElemRef>>,
    out: &mut Vec<GradedFunction>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    let Some(&x) = order.get(i) else {
        let map = assign.iter().map(|a| a.unwrap()).collect();
        out.push(GradedFunction::new_unchecked(p.clone(), q.clone(), map));
        return;
    };
    let mut allowed = q.full_set();
    for c in p.all_cofaces(x) {
        allowed.intersect_with(&closures[q.flat(assign[p.flat(c)].unwrap())]);
    }
    for z in q.members(&allowed).collect::<Vec<_>>() {
        if !graded || z.dim <= x.dim {
            assign[p.flat(x)] = Some(z);
            go(p, q, graded, order, i + 1, closures, assign, out, limit);
        }
    }
    assign[p.flat(x)] = None;
}

/// Comaps `P → Q`, by filtering all order-preserving functions.
pub fn comaps(p: &Arc<OgPoset>, q: &Arc<OgPoset>) -> Vec<GradedFunction> {
    monotone(p, q, false, usize::MAX).into_iter().filter(|c| c.is_surjective() && is_comap(c)).collect()
}

pub fn maps(p: &Arc<OgPoset>, q: &Arc<OgPoset>) -> Vec<GradedFunction> {
    order_preserving(p, q, usize::MAX).into_iter().filter(is_map).collect()
}

/// Closed subsets of `p` contained in `within`.
pub fn closed_subsets(p: &OgPoset, within: &ElemSet) -> Vec<ElemSet> {
    let elems: Vec<ElemRef> = p.members(within).collect();
    assert!(elems.len() < 24, "too many elements to enumerate subsets");
    let mut out = Vec::new();
    for bits in 0u32..(1 << elems.len()) {
        let s = p.set_of(elems.iter().enumerate().filter(|(j, _)| bits & (1 << j) != 0).map(|(_, &e)| e));
        if p.is_closed(&s) {
            out.push(s);
        }
    }
    out
}

/// Number of pairs `((K₁, …, K_m), φ)` with `p = τ_{K₁} ⋯ τ_{K_m} φ`,
/// searched over all closed `Kᵢ` in the boundary of each stage.
pub fn count_collapse_factorisations(p: &GradedFunction) -> usize {
    let u = p.source();
    let v = p.target();
    let m = (u.dim() - v.dim()) as usize;
    let mut count = 0;
    stages(p, v.clone(), GradedFunction::identity(v.clone()), m, &mut count);
    count
}

fn stages(p: &GradedFunction, stage: Arc<OgPoset>, proj: GradedFunction, left: usize, count: &mut usize) {
    let u = p.source();
    if left == 0 {
        if stage.len() == u.len() {
            for phi in all_isomorphisms(u, &stage, usize::MAX) {
                let f = GradedFunction::new_unchecked(u.clone(), stage.clone(), phi);
                if f.then(&proj).map() == p.map() {
                    *count += 1;
                }
            }
        }
        return;
    }
    let bd = stage.full_boundary(&stage.full_set());
    for k in closed_subsets(&stage, &bd) {
        let Ok(cyl) = partial_cylinder(&stage, &k) else { continue };
        if cyl.poset.len() > u.len() {
            continue;
        }
        let next = cyl.projection().then(&proj);
        stages(p, cyl.poset.clone(), next, left - 1, count);
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
