//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails
//! the target if any criterion fails.

mod support;

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use dircx::complex::{
    cells_of_shape, enumerate_marked_horns, fibrancy_report, globular_star, marked_closure, CellRef, ClosureUniverse,
    DirectedComplex, HornInstance, InflateView, InventoryItem, MarkedComplex, MergeCell, Variant,
};
use dircx::construct::{gray, partial_cylinder, pushout_comerger, pushout_embedding, simplex, Pushout};
use dircx::corpus::{named_shapes, not_round_example};
use dircx::iso::{all_isomorphisms, are_isomorphic, find_isomorphism, invariant_hash};
use dircx::molecule::{self, arrow, globe, recognize_molecule, Molecule};
use dircx::morphism::{
    classify, co_merger, compose_scl, factor_collapse, factor_ternary, globe_subdivision, sections_of_collapse,
    GradedFunction, SclMorphism,
};
use dircx::ogposet::{ElemRef, OgPoset, Sign};
use support::{binomial, closed_subsets, comaps, corpus, count_collapse_factorisations, maps, order_preserving, small_corpus};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e(dim: usize, index: usize) -> ElemRef {
    ElemRef::new(dim, index)
}

fn err<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn compositor() -> Molecule {
    let a = arrow();
    molecule::atom(&molecule::paste(&a, &a, 0).unwrap(), &a).unwrap()
}

/// One vertex, one loop `e`, and a 2-globe `e ⇒ e`.
fn loop_with_globe() -> DirectedComplex {
    let mut x = DirectedComplex::loop_complex();
    let edge = CellRef::new(1, 0);
    x.add_cell(globe(2).carrier().clone(), &[(e(1, 0), edge), (e(1, 1), edge)]).expect("parallel loops");
    x
}

fn inflated(base: DirectedComplex, dim: usize) -> InflateView {
    let mut v = InflateView::new(base);
    v.materialize(dim).expect("materialise");
    v
}

// ----- 1 -----

fn thinness_violations(p: &OgPoset) -> usize {
    let mut bad = 0;
    for y in p.elements() {
        if y.dim == 1 && (p.faces(y, Sign::Minus).count() != 1 || p.faces(y, Sign::Plus).count() != 1) {
            bad += 1;
        }
        if y.dim < 2 {
            continue;
        }
        let below: BTreeSet<ElemRef> = p.all_faces(y).flat_map(|z| p.all_faces(z).collect::<Vec<_>>()).collect();
        for x in below {
            let paths: Vec<Sign> =
                p.all_faces(y).filter_map(|z| Some(p.face_sign(y, z)?.mul(p.face_sign(z, x)?))).collect();
            if paths.len() != 2 || paths[0] == paths[1] {
                bad += 1;
            }
        }
    }
    bad
}

fn structural_soundness() -> Outcome {
    let mut shapes = corpus().carriers();
    shapes.extend(named_shapes().into_iter().map(|(_, p)| p));
    for p in &shapes {
        let back = OgPoset::from_json(&p.to_json()).map_err(err)?;
        ensure!(back == **p, "carrier changed on re-parse");
        ensure!(p.check_regular_faces().is_ok(), "element without faces");
        for x in p.elements() {
            let inputs: BTreeSet<ElemRef> = p.faces(x, Sign::Minus).collect();
            ensure!(p.faces(x, Sign::Plus).all(|y| !inputs.contains(&y)), "{x} has a face of both signs");
            ensure!(p.all_faces(x).all(|y| y.dim + 1 == x.dim), "{x} has a face of the wrong dimension");
        }
        ensure!(thinness_violations(p) == 0, "thinness fails on a carrier of size {}", p.len());
        ensure!(p.check_oriented_thinness().ok, "library thinness check disagrees");
    }
    Ok(format!("{} carriers, 0 violations", shapes.len()))
}

// ----- 2 -----

fn globularity() -> Outcome {
    let mut identities = 0;
    let mut atoms = 0;
    for m in corpus().molecules() {
        let p = m.carrier();
        let full = p.full_set();
        let n = p.dim().max(0) as usize;
        for j in 0..=n {
            for b in Sign::BOTH {
                let outer = p.boundary(&full, j, b);
                for k in 0..j {
                    for a in Sign::BOTH {
                        ensure!(p.boundary(&outer, k, a) == p.boundary(&full, k, a), "boundary identity fails");
                        identities += 1;
                    }
                }
            }
        }
        let round = (0..n).all(|k| {
            let mut meet = p.boundary(&full, k, Sign::Minus);
            meet.intersect_with(&p.boundary(&full, k, Sign::Plus));
            let below = if k == 0 { p.empty_set() } else { p.boundary_both(&full, k - 1) };
            meet == below
        });
        ensure!(round == m.is_round(), "roundness disagrees with the intersection oracle");
        if m.is_atom() {
            atoms += 1;
            ensure!(m.is_round(), "an atom is not round");
        }
    }
    let nr = not_round_example();
    let p = nr.carrier();
    ensure!(p.is_globular(&p.full_set()) && !nr.is_round(), "the pasted triangle and globe is misreported");
    Ok(format!("{identities} boundary identities, {atoms} atoms round, globular-not-round example ok"))
}

// ----- 3 -----

fn maximal_chains(p: &OgPoset, x: ElemRef) -> usize {
    if x.dim == 0 {
        1
    } else {
        p.all_faces(x).map(|y| maximal_chains(p, y)).sum()
    }
}

fn cardinalities() -> Outcome {
    for n in 0..=6 {
        let g = globe(n);
        ensure!(g.len() == 2 * n + 1, "globe({n}) has {} elements", g.len());
    }
    for k in 0..=4 {
        let s = simplex(k);
        let vertices: Vec<BTreeSet<ElemRef>> =
            s.elements().map(|x| s.members(&s.cl(x)).filter(|v| v.dim == 0).collect()).collect();
        let distinct: BTreeSet<&BTreeSet<ElemRef>> = vertices.iter().collect();
        ensure!(distinct.len() == s.len(), "simplex({k}) repeats a vertex set");
        for j in 0..=k {
            let spans = vertices.iter().filter(|v| v.len() == j + 1).count();
            ensure!(s.stratum_len(j) == binomial(k + 1, j + 1), "simplex({k}) stratum {j}");
            ensure!(spans == s.stratum_len(j), "simplex({k}) stratum {j} vertex sets");
        }
        let top = s.greatest().ok_or("simplex has no top")?;
        ensure!(maximal_chains(&s, top) == (1..=k + 1).product::<usize>(), "simplex({k}) chain count");
    }
    Ok("globes n ≤ 6, simplices k ≤ 4".into())
}

// ----- 4 -----

fn gray_faces_match(p: &OgPoset, q: &OgPoset) -> bool {
    let g = gray(p, q);
    p.elements().all(|x| {
        q.elements().all(|y| {
            Sign::BOTH.into_iter().all(|a| {
                let b = if x.dim % 2 == 0 { a } else { a.neg() };
                let want: BTreeSet<ElemRef> = p
                    .faces(x, a)
                    .map(|x2| g.elem(x2, y))
                    .chain(q.faces(y, b).map(|y2| g.elem(x, y2)))
                    .collect();
                let got: BTreeSet<ElemRef> = g.poset.faces(g.elem(x, y), a).collect();
                want == got
            })
        })
    })
}

fn gray_correctness() -> Outcome {
    let a = arrow().carrier().clone();
    let g = gray(&a, &a);
    ensure!(g.poset.stratum_sizes() == vec![4, 4, 1], "gray(arrow, arrow) strata {:?}", g.poset.stratum_sizes());
    let top = g.elem(e(1, 0), e(1, 0));
    let input: BTreeSet<ElemRef> = g.poset.faces(top, Sign::Minus).collect();
    let output: BTreeSet<ElemRef> = g.poset.faces(top, Sign::Plus).collect();
    ensure!(input == BTreeSet::from([g.elem(e(0, 0), e(1, 0)), g.elem(e(1, 0), e(0, 1))]), "input faces of the square");
    ensure!(output == BTreeSet::from([g.elem(e(0, 1), e(1, 0)), g.elem(e(1, 0), e(0, 0))]), "output faces of the square");

    let small: Vec<&Molecule> = small_corpus().molecules().filter(|m| m.len() <= 7).collect();
    let mut products = 0;
    for p in &small {
        for q in &small {
            if p.len() * q.len() > 35 {
                continue;
            }
            ensure!(gray_faces_match(p.carrier(), q.carrier()), "face table of a product");
            let g = gray(p.carrier(), q.carrier());
            ensure!(recognize_molecule(&g.poset).is_some(), "product of molecules is not a molecule");
            products += 1;
        }
    }

    let tiny: Vec<&Molecule> = small_corpus().molecules().filter(|m| m.len() <= 5).collect();
    let pt = OgPoset::point();
    for p in &tiny {
        for prod in [gray(&pt, p.carrier()), gray(p.carrier(), &pt)] {
            ensure!(all_isomorphisms(&prod.poset, p.carrier(), 2).len() == 1, "unit isomorphism not unique");
        }
    }
    let mut triples = 0;
    for p in &tiny {
        for q in &tiny {
            for r in &tiny {
                let left = gray(&gray(p.carrier(), q.carrier()).poset, r.carrier());
                let right = gray(p.carrier(), &gray(q.carrier(), r.carrier()).poset);
                ensure!(all_isomorphisms(&left.poset, &right.poset, 2).len() == 1, "associator not unique");
                triples += 1;
            }
        }
    }
    ensure!(triples >= 50, "only {triples} triples");
    Ok(format!("{products} products certified, {triples} associativity triples"))
}

// ----- 5, 6 -----

/// Collapses `τ_{K₁} ⋯ τ_{K_m}` out of small atoms, with their length.
fn collapse_instances(max_len: usize) -> Vec<(GradedFunction, usize)> {
    fn extend(stage: &Arc<OgPoset>, proj: &GradedFunction, m: usize, max_len: usize, out: &mut Vec<(GradedFunction, usize)>) {
        if stage.dim() >= 3 {
            return;
        }
        let bd = stage.full_boundary(&stage.full_set());
        for k in closed_subsets(stage, &bd) {
            let Ok(cyl) = partial_cylinder(stage, &k) else { continue };
            if cyl.poset.len() > max_len {
                continue;
            }
            let next = cyl.projection().then(proj);
            out.push((next.clone(), m + 1));
            extend(&cyl.poset, &next, m + 1, max_len, out);
        }
    }
    let mut out = Vec::new();
    for v in small_corpus().atoms().filter(|a| a.dim() <= 2 && a.len() <= 7) {
        let p = v.carrier();
        extend(p, &GradedFunction::identity(p.clone()), 0, max_len, &mut out);
    }
    out
}

fn collapse_freeness() -> Outcome {
    let instances = collapse_instances(16);
    for (p, m) in &instances {
        let fac = factor_collapse(p).map_err(err)?;
        ensure!(fac.len() == *m, "factorisation of length {} instead of {m}", fac.len());
        ensure!(fac.replay().map() == p.map(), "factorisation does not replay");
        let n = count_collapse_factorisations(p);
        ensure!(n == 1, "brute force finds {n} factorisations");
    }
    ensure!(instances.len() >= 100, "only {} instances", instances.len());
    Ok(format!("{} collapses, each with exactly one factorisation", instances.len()))
}

fn sections_oracle() -> Outcome {
    let atoms: Vec<Arc<OgPoset>> = small_corpus().atoms().filter(|a| a.len() <= 9).map(|a| a.carrier().clone()).collect();
    let mut collapses = 0;
    let mut pairs = 0;
    let mut several = 0;
    for u in &atoms {
        for v in atoms.iter().filter(|v| v.dim() <= u.dim() && v.len() <= u.len()) {
            let all: Vec<GradedFunction> =
                order_preserving(u, v, usize::MAX).into_iter().filter(|f| f.is_surjective() && classify(f).collapse).collect();
            if all.is_empty() {
                continue;
            }
            let embeddings: Vec<GradedFunction> =
                order_preserving(v, u, usize::MAX).into_iter().filter(|j| j.is_embedding()).collect();
            let identity: Vec<ElemRef> = v.elements().collect();
            let mut by_sections: HashMap<BTreeSet<Vec<ElemRef>>, Vec<ElemRef>> = HashMap::new();
            for p in &all {
                let brute: BTreeSet<Vec<ElemRef>> =
                    embeddings.iter().filter(|j| j.then(p).map() == identity).map(|j| j.map().to_vec()).collect();
                let lib: BTreeSet<Vec<ElemRef>> =
                    sections_of_collapse(p).map_err(err)?.iter().map(|j| j.map().to_vec()).collect();
                ensure!(!brute.is_empty() && brute == lib, "section sets disagree");
                if let Some(other) = by_sections.insert(brute, p.map().to_vec()) {
                    ensure!(other == p.map(), "distinct parallel collapses share their sections");
                }
                collapses += 1;
            }
            pairs += 1;
            if all.len() > 1 {
                several += 1;
            }
        }
    }
    // parallel collapses from distinct K-sequences out of the same atom
    let mut groups: HashMap<(usize, u64, usize), Vec<GradedFunction>> = HashMap::new();
    for (p, _) in collapse_instances(16) {
        let key = (Arc::as_ptr(p.target()) as usize, invariant_hash(p.source()), p.source().len());
        groups.entry(key).or_default().push(p);
    }
    for fs in groups.values() {
        for (i, p) in fs.iter().enumerate() {
            let u = p.source();
            let mut parallel = vec![p.clone()];
            for q in &fs[i + 1..] {
                for phi in all_isomorphisms(u, q.source(), 2) {
                    parallel.push(GradedFunction::new_unchecked(u.clone(), q.source().clone(), phi).then(q));
                }
            }
            if parallel.len() < 2 {
                continue;
            }
            let v = p.target();
            let identity: Vec<ElemRef> = v.elements().collect();
            let embeddings: Vec<GradedFunction> =
                order_preserving(v, u, usize::MAX).into_iter().filter(|j| j.is_embedding()).collect();
            let first: BTreeSet<Vec<ElemRef>> =
                embeddings.iter().filter(|j| j.then(p).map() == identity).map(|j| j.map().to_vec()).collect();
            for q in &parallel[1..] {
                let other: BTreeSet<Vec<ElemRef>> =
                    embeddings.iter().filter(|j| j.then(q).map() == identity).map(|j| j.map().to_vec()).collect();
                let lib: BTreeSet<Vec<ElemRef>> =
                    sections_of_collapse(q).map_err(err)?.iter().map(|j| j.map().to_vec()).collect();
                ensure!(other == lib, "section sets disagree");
                ensure!((other == first) == (q.map() == p.map()), "distinct parallel collapses share their sections");
                several += 1;
            }
        }
    }
    Ok(format!("{collapses} collapses over {pairs} pairs of atoms, {several} parallel pairs compared, 0 counterexamples"))
}

// ----- 7 -----

fn small_shapes(max_len: usize) -> Vec<&'static Molecule> {
    small_corpus().molecules().filter(|m| m.len() <= max_len && m.dim() <= 2).collect()
}

fn embedding_spans() -> Vec<(GradedFunction, GradedFunction)> {
    let mut out = Vec::new();
    let shapes = small_shapes(6);
    for p in &shapes {
        for q in &shapes {
            let (pp, qq) = (p.carrier(), q.carrier());
            let top = p.dim().min(q.dim()).max(0) as usize;
            for k in 0..top {
                let (sp, op) = pp.sub_poset(&pp.boundary(&pp.full_set(), k, Sign::Plus));
                let (sq, oq) = qq.sub_poset(&qq.boundary(&qq.full_set(), k, Sign::Minus));
                let Some(phi) = find_isomorphism(&sp, &sq) else { continue };
                let u = Arc::new(sp);
                let i = GradedFunction::new_unchecked(u.clone(), pp.clone(), op);
                let j = GradedFunction::new_unchecked(u.clone(), qq.clone(), u.elements().map(|z| oq[sq.flat(phi[u.flat(z)])]).collect());
                out.push((i, j));
            }
            // glued at a single vertex
            for w in pp.elements_of_dim(0) {
                let u = Arc::new(OgPoset::point());
                let i = GradedFunction::new_unchecked(u.clone(), pp.clone(), vec![w]);
                let j = GradedFunction::new_unchecked(u, qq.clone(), vec![e(0, 0)]);
                out.push((i, j));
            }
        }
    }
    out
}

fn cocone_targets(r: &Arc<OgPoset>) -> Vec<Arc<OgPoset>> {
    vec![r.clone(), Arc::new(OgPoset::point()), arrow().carrier().clone(), globe(2).carrier().clone()]
}

/// Cocones of maps under the span, and how many maps out of the pushout
/// induce each of them.
fn embedding_universality(i: &GradedFunction, j: &GradedFunction, po: &Pushout) -> Result<usize, String> {
    let mut cocones = 0;
    for t in cocone_targets(&po.poset) {
        let fs = maps(i.target(), &t);
        let gs = maps(j.target(), &t);
        let mut induced: HashMap<(Vec<ElemRef>, Vec<ElemRef>), usize> = HashMap::new();
        for h in maps(&po.poset, &t) {
            *induced.entry((po.left.then(&h).map().to_vec(), po.right.then(&h).map().to_vec())).or_default() += 1;
        }
        for f in &fs {
            for g in &gs {
                if i.then(f).map() != j.then(g).map() {
                    continue;
                }
                let n = induced.get(&(f.map().to_vec(), g.map().to_vec())).copied().unwrap_or(0);
                ensure!(n == 1, "a cocone into a {}-element target factors {n} times", t.len());
                cocones += 1;
            }
        }
    }
    Ok(cocones)
}

/// Morphisms `A → T` of subdivisions followed by embeddings, written as
/// the comap on a closed subset of `T` (None outside it).
fn span_morphisms(a: &Arc<OgPoset>, t: &Arc<OgPoset>) -> Vec<Vec<Option<ElemRef>>> {
    let mut out = Vec::new();
    for s in closed_subsets(t, &t.full_set()) {
        if s.count_ones(..) == 0 {
            continue;
        }
        let (sub, origin) = t.sub_poset(&s);
        let sub = Arc::new(sub);
        for c in comaps(&sub, a) {
            let mut v = vec![None; t.len()];
            for z in sub.elements() {
                v[t.flat(origin[sub.flat(z)])] = Some(c.apply(z));
            }
            out.push(v);
        }
    }
    out
}

fn comerger_spans() -> Vec<(Arc<OgPoset>, ElemRef, Molecule)> {
    let mut out = Vec::new();
    let rounds: Vec<&Molecule> = small_corpus().round().filter(|v| v.len() <= 7 && !v.is_atom() && v.dim() >= 1).collect();
    for p in small_shapes(7) {
        let pp = p.carrier();
        for x in pp.elements().filter(|x| x.dim >= 1) {
            let (clx, _) = pp.sub_poset(&pp.cl(x));
            for v in rounds.iter().filter(|v| v.dim() as usize == x.dim) {
                let Ok(m) = molecule::merger(v) else { continue };
                if pp.len() - clx.len() + v.len() <= 10 && are_isomorphic(m.carrier(), &clx) {
                    out.push((pp.clone(), x, (*v).clone()));
                }
            }
        }
    }
    out
}

fn comerger_universality(p: &Arc<OgPoset>, x: ElemRef, v: &Molecule) -> Result<usize, String> {
    let s = co_merger(v).map_err(err)?;
    let res = pushout_comerger(p, x, &s).map_err(err)?;
    let r = &res.poset;
    let t = &res.subdivision;
    let j = &res.inclusion;
    ensure!(classify(t).comap && j.is_embedding(), "legs of the pushout are misclassified");
    let clx = p.cl(x);
    let sigma: Vec<ElemRef> = v.carrier().elements().map(|z| t.apply(j.apply(z))).collect();
    let j_inv: HashMap<ElemRef, ElemRef> = v.carrier().elements().map(|z| (j.apply(z), z)).collect();
    let mut targets = vec![r.clone()];
    targets.extend(small_corpus().molecules().filter(|m| m.dim() == r.dim() && m.len() <= r.len()).take(3).map(|m| m.carrier().clone()));
    let mut cocones = 0;
    for tt in &targets {
        let along_a = span_morphisms(p, tt);
        let along_b = span_morphisms(v.carrier(), tt);
        let mut by_restriction: HashMap<Vec<Option<ElemRef>>, Vec<&Vec<Option<ElemRef>>>> = HashMap::new();
        for b in &along_b {
            let bs: Vec<Option<ElemRef>> = b.iter().map(|z| z.map(|z| sigma[v.carrier().flat(z)])).collect();
            by_restriction.entry(bs).or_default().push(b);
        }
        let mut induced: HashMap<(Vec<Option<ElemRef>>, Vec<Option<ElemRef>>), usize> = HashMap::new();
        for h in span_morphisms(r, tt) {
            let ht: Vec<Option<ElemRef>> = h.iter().map(|z| z.map(|z| t.apply(z))).collect();
            let hj: Vec<Option<ElemRef>> = h.iter().map(|z| z.and_then(|z| j_inv.get(&z).copied())).collect();
            *induced.entry((ht, hj)).or_default() += 1;
        }
        for a in &along_a {
            let ai: Vec<Option<ElemRef>> = a.iter().map(|z| z.filter(|z| clx.contains(p.flat(*z)))).collect();
            for b in by_restriction.get(&ai).into_iter().flatten() {
                let n = induced.get(&(a.clone(), (*b).clone())).copied().unwrap_or(0);
                ensure!(n == 1, "a cocone factors {n} times");
                cocones += 1;
            }
        }
    }
    ensure!(cocones >= 1, "no cocone found");
    Ok(cocones)
}

fn pushout_universality() -> Outcome {
    let mut emb = 0;
    let mut emb_cocones = 0;
    for (i, j) in embedding_spans() {
        let po = pushout_embedding(&i, &j).map_err(err)?;
        if po.poset.len() > 11 {
            continue;
        }
        emb_cocones += embedding_universality(&i, &j, &po)?;
        emb += 1;
    }
    let mut com = 0;
    let mut com_cocones = 0;
    for (p, x, v) in comerger_spans() {
        com_cocones += comerger_universality(&p, x, &v)?;
        com += 1;
    }
    ensure!(emb >= 30 && com >= 30, "only {emb} embedding and {com} co-merger spans");
    Ok(format!("{emb} embedding spans ({emb_cocones} cocones), {com} co-merger spans ({com_cocones} cocones)"))
}

// ----- 8 -----

fn ternary_check(m: &SclMorphism) -> Result<(), String> {
    let tf = factor_ternary(m).map_err(err)?;
    ensure!(tf.recompose().equivalent(m), "factors do not recompose");
    ensure!(classify(&tf.subdivision).comap, "first factor is not a subdivision");
    ensure!(classify(&tf.collapse).collapse, "middle factor is not a collapse");
    ensure!(tf.embedding.is_local_embedding(), "last factor is not a local embedding");
    Ok(())
}

fn ternary_factorisation() -> Outcome {
    let mut composites = 0;
    let mut assoc = 0;
    let rounds: Vec<&Molecule> = small_corpus().round().filter(|u| u.dim() >= 1 && u.dim() <= 2 && u.len() <= 7).collect();
    for u in rounds {
        let b = molecule::merger(u).map_err(err)?.carrier().clone();
        let h = SclMorphism::from_subdivision(co_merger(u).map_err(err)?);
        for k in closed_subsets(&b, &b.full_boundary(&b.full_set())) {
            let cyl = partial_cylinder(&b, &k).map_err(err)?;
            let vm = recognize_molecule(&cyl.poset).ok_or("cylinder is not a molecule")?;
            let v = cyl.poset.clone();
            let g = SclMorphism::from_collapse(cyl.projection());
            let mut fs = vec![SclMorphism::from_subdivision(globe_subdivision(&vm).map_err(err)?)];
            for k2 in closed_subsets(&v, &v.full_boundary(&v.full_set())).into_iter().take(3) {
                let c2 = partial_cylinder(&v, &k2).map_err(err)?;
                if c2.poset.len() <= 16 {
                    fs.push(SclMorphism::from_collapse(c2.projection()));
                }
            }
            let hg = compose_scl(&h, &g).map_err(err)?;
            ternary_check(&hg)?;
            composites += 1;
            for f in &fs {
                let gf = compose_scl(&g, f).map_err(err)?;
                let left = compose_scl(&h, &gf).map_err(err)?;
                let right = compose_scl(&hg, f).map_err(err)?;
                ternary_check(&gf)?;
                ternary_check(&left)?;
                composites += 2;
                ensure!(left.equivalent(&right), "composition is not associative");
                assoc += 1;
            }
        }
    }
    ensure!(composites >= 50, "only {composites} composites");
    Ok(format!("{composites} composites factorised, {assoc} associativity checks"))
}

// ----- 9, 10 -----

fn ez_bases() -> Vec<DirectedComplex> {
    let a = arrow();
    let path = molecule::paste(&a, &a, 0).unwrap();
    let g = globe(2);
    vec![
        DirectedComplex::representable(&OgPoset::point()),
        DirectedComplex::representable(a.carrier()),
        DirectedComplex::representable(path.carrier()),
        DirectedComplex::representable(g.carrier()),
        DirectedComplex::representable(compositor().carrier()),
        DirectedComplex::representable(molecule::paste(&g, &g, 1).unwrap().carrier()),
        DirectedComplex::representable(molecule::paste(&g, &a, 0).unwrap().carrier()),
        DirectedComplex::representable(&simplex(2)),
        DirectedComplex::loop_complex(),
        loop_with_globe(),
    ]
}

fn ez_uniqueness() -> Outcome {
    let mut cells = 0;
    for base in ez_bases() {
        let mut view = inflated(base.clone(), 2);
        let all: Vec<CellRef> = view.complex().cell_refs().filter(|c| c.dim <= 2).collect();
        for c in all {
            let shape = view.complex().cell(c).shape().clone();
            let top = shape.greatest().ok_or("cell shape is not an atom")?;
            let mut pairs = Vec::new();
            for v in base.cell_refs().filter(|v| v.dim <= c.dim) {
                let target = base.cell(v).shape().clone();
                let dv = view.complex().cell_diagram(v);
                for q in order_preserving(&shape, &target, usize::MAX) {
                    if !q.is_surjective() || !classify(&q).collapse {
                        continue;
                    }
                    if view.act(&dv, &q).map_err(err)?.at(top) == c {
                        pairs.push(v);
                    }
                }
            }
            ensure!(pairs.len() == 1, "cell {c} has {} normal pairs", pairs.len());
            ensure!(view.normal_form(c).base == pairs[0], "normal form of {c} names another base cell");
            cells += 1;
        }
    }
    Ok(format!("{cells} cells over 10 bases, each with one normal pair"))
}

fn degeneracy_catalogue() -> Outcome {
    let a = arrow().carrier().clone();
    let mut view = InflateView::new(DirectedComplex::representable(&a));
    let cells = view.degenerate_over(CellRef::new(1, 0), 2).map_err(err)?;
    ensure!(cells.len() == 4, "{} degenerate 2-cells", cells.len());
    let ks: BTreeSet<Vec<ElemRef>> =
        cells.iter().map(|&c| view.cylinders(c)[0].base.members(&view.cylinders(c)[0].k).collect()).collect();
    let want = BTreeSet::from([vec![], vec![e(0, 0)], vec![e(0, 1)], vec![e(0, 0), e(0, 1)]]);
    ensure!(ks == want, "subsets {ks:?}");
    Ok("4 cells indexed by ∅, {0⁻}, {0⁺}, {0⁻,0⁺}".into())
}

// ----- 11 -----

fn horn_semantics() -> Outcome {
    let k = compositor().carrier().clone();
    let top = k.greatest().ok_or("no top")?;
    let out_edge = k.faces(top, Sign::Plus).next().ok_or("no output edge")?;
    let inputs: Vec<ElemRef> = k.faces(top, Sign::Minus).collect();

    let horns = enumerate_marked_horns(&[(k.clone(), k.set_of([top]))]);
    ensure!(horns.len() == 1, "{} horns on the top-marked compositor", horns.len());
    let h = horns[0].clone();
    ensure!(h.sign == Sign::Plus && h.pivot == out_edge && h.validate(), "wrong horn {:?}", h.pivot);

    // condition (4): the pivot is marked exactly when the opposite faces are
    let with_inputs = k.set_of(inputs.iter().copied().chain([top]));
    ensure!(HornInstance::new(k.clone(), with_inputs.clone(), Sign::Plus, out_edge).is_none(), "unmarked pivot accepted");
    let mut all = with_inputs;
    all.insert(k.flat(out_edge));
    ensure!(HornInstance::new(k.clone(), all, Sign::Plus, out_edge).is_some(), "marked pivot rejected");

    let flat = MarkedComplex::flat(DirectedComplex::representable(&k));
    let inv = vec![InventoryItem::Horn(h)];
    let r = fibrancy_report(&flat, &inv, None);
    ensure!(!r.pass && r.items[0].witness.is_some() && r.replay(&flat, &inv), "flat compositor should fail with a witness");

    let view = inflated(DirectedComplex::representable(&OgPoset::point()), 1);
    let ones: Vec<CellRef> = view.complex().cells_of_dim(1).collect();
    let x = MarkedComplex::new(view.complex().clone(), ones, Variant::Inflate).map_err(err)?;
    let a = arrow().carrier().clone();
    let arrow_horn = HornInstance::new(a.clone(), a.set_of([e(1, 0)]), Sign::Minus, e(0, 0)).ok_or("arrow horn")?;
    let inv = vec![InventoryItem::Horn(arrow_horn)];
    let r = fibrancy_report(&x, &inv, Some(0));
    ensure!(r.pass && r.replay(&x, &inv), "marked inflate point should pass");
    Ok("output-edge horn found; flat compositor FAIL, inflate point PASS, both replay".into())
}

// ----- 12 -----

fn star_associativity() -> Outcome {
    let g2 = globe(2).carrier().clone();
    let a = arrow();
    let candidates: Vec<Arc<OgPoset>> = small_corpus().round().filter(|m| m.dim() == 2 && m.len() <= 7).map(|m| m.carrier().clone()).collect();
    let bases = vec![
        loop_with_globe(),
        DirectedComplex::representable(molecule::paste(&globe(2), &globe(2), 1).unwrap().carrier()),
        inflated(DirectedComplex::representable(a.carrier()), 2).complex().clone(),
        inflated(DirectedComplex::loop_complex(), 2).complex().clone(),
        inflated(loop_with_globe(), 2).complex().clone(),
    ];
    let mut triples = 0;
    for x in &bases {
        let cells = cells_of_shape(x, &g2, &candidates, 7);
        let n = cells.len();
        let composable = |i: usize, j: usize| cells[i].boundary(1, Sign::Plus) == cells[j].boundary(1, Sign::Minus);
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if composable(i, j) {
                    next[i].push(j);
                }
            }
        }
        let mut star: HashMap<(usize, usize), MergeCell> = HashMap::new();
        for i in 0..n {
            for &j in &next[i] {
                star.insert((i, j), globular_star(&cells[i], &cells[j], 1, None).map_err(err)?);
            }
        }
        for i in 0..n {
            for &j in &next[i] {
                for &k in &next[j] {
                    let left = globular_star(&star[&(i, j)], &cells[k], 1, None).map_err(err)?;
                    let right = globular_star(&cells[i], &star[&(j, k)], 1, None).map_err(err)?;
                    ensure!(left == right, "(u *₁ v) *₁ w differs from u *₁ (v *₁ w)");
                    triples += 1;
                }
            }
        }
    }
    ensure!(triples > 0, "no composable triples");
    Ok(format!("{triples} composable triples over 5 bases"))
}

// ----- 13 -----

fn loop_enumeration() -> Outcome {
    let x = DirectedComplex::loop_complex();
    let a = arrow().carrier().clone();
    let paths: Vec<Arc<OgPoset>> = small_corpus().molecules().filter(|m| m.dim() == 1).map(|m| m.carrier().clone()).collect();
    let mut counts = Vec::new();
    for bound in [5, 7] {
        let got = cells_of_shape(&x, &a, &paths, bound).len();
        // every path has one diagram in the loop; count its comaps onto the arrow
        let oracle: usize = paths.iter().filter(|p| p.len() <= bound).map(|p| comaps(p, &a).len()).sum();
        ensure!(got == oracle, "bound {bound}: {got} cells, oracle {oracle}");
        counts.push(got);
    }
    ensure!(counts == vec![2, 3], "counts {counts:?}");
    Ok("bound 5: 2 cells, bound 7: 3 cells".into())
}

// ----- 14 -----

fn closure_instances() -> Vec<(DirectedComplex, Vec<CellRef>)> {
    let a = arrow();
    vec![
        (DirectedComplex::representable(compositor().carrier()), vec![CellRef::new(2, 0)]),
        (DirectedComplex::representable(globe(2).carrier()), vec![CellRef::new(2, 0)]),
        (loop_with_globe(), vec![CellRef::new(2, 0)]),
        (DirectedComplex::representable(a.carrier()), vec![CellRef::new(1, 0)]),
        (DirectedComplex::representable(molecule::paste(&a, &a, 0).unwrap().carrier()), vec![CellRef::new(1, 0), CellRef::new(1, 1)]),
    ]
}

fn independently_closed(universe: &ClosureUniverse, members: &BTreeSet<usize>) -> bool {
    for (i, fs) in universe.factorisations.iter().enumerate() {
        for f in fs {
            if f.iter().all(|j| members.contains(j)) && !members.contains(&i) {
                return false;
            }
        }
    }
    universe.refinements.iter().all(|&(i, j)| !members.contains(&i) || members.contains(&j))
}

fn marked_closure_check() -> Outcome {
    let mut runs = 0;
    for (base, marked) in closure_instances() {
        let x = MarkedComplex::new(base.clone(), marked.clone(), Variant::Merge).map_err(err)?;
        let top = base.dim().max(0) as usize;
        let mut atoms: Vec<Arc<OgPoset>> = Vec::new();
        for c in base.cell_refs() {
            let s = base.cell(c).shape();
            if !atoms.contains(s) {
                atoms.push(s.clone());
            }
        }
        for n in 1..=top {
            let g = globe(n).carrier().clone();
            if !atoms.contains(&g) {
                atoms.push(g);
            }
        }
        let seed_size = marked.iter().map(|&c| base.cell(c).shape().len()).max().unwrap_or(0);
        for bound in seed_size..=seed_size + 2 {
            let rounds: Vec<Arc<OgPoset>> = small_corpus()
                .round()
                .filter(|m| m.dim() as usize <= top && m.len() <= bound)
                .map(|m| m.carrier().clone())
                .collect();
            let universe = ClosureUniverse::build(&base, &atoms, &rounds, bound);
            let seed = universe.seed_from_marking(&x);
            ensure!(seed.len() == marked.len(), "seed cells missing from the universe");
            let r = marked_closure(&universe, &seed);
            ensure!(r.verify(&universe), "closure fails its own verification");
            ensure!(independently_closed(&universe, &r.members), "closure is not closed");
            for &c in &marked {
                let g = MergeCell::from_diagram(base.cell_diagram(c)).globular_composite().map_err(err)?;
                let i = universe.index_of(&g).ok_or("globular composite missing from the universe")?;
                ensure!(r.contains(i), "globular composite of a marked cell not captured at bound {bound}");
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} bounded closures verified"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("structural soundness", structural_soundness),
        ("globularity and roundness", globularity),
        ("globe and simplex cardinalities", cardinalities),
        ("Gray products", gray_correctness),
        ("freeness of collapses", collapse_freeness),
        ("sections of collapses", sections_oracle),
        ("pushout universality", pushout_universality),
        ("ternary factorisation", ternary_factorisation),
        ("Eilenberg-Zilber uniqueness", ez_uniqueness),
        ("degeneracy catalogue", degeneracy_catalogue),
        ("horn semantics", horn_semantics),
        ("top-star associativity", star_associativity),
        ("bounded merge enumeration", loop_enumeration),
        ("marked closure", marked_closure_check),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                std::thread::Builder::new()
                    .stack_size(64 << 20)
                    .spawn_scoped(s, move || {
                        let t = Instant::now();
                        (f(), t.elapsed().as_secs_f64())
                    })
                    .expect("spawn")
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| (Err("panicked".into()), 0.0))).collect()
    });
    let mut failed = 0;
    for (n, ((name, _), (outcome, secs))) in criteria.iter().zip(results).enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
