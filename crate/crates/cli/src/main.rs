use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dircx::complex::{
    all_markings, enumerate_marked_horns, fibrancy_report, horn_filler_search, horn_morphisms, marked_closure, named_shape,
    ClosureUniverse, HornInstance, InventoryItem, MarkedComplex,
};
use dircx::construct::{gray, join, partial_cylinder, pushout_comerger};
use dircx::corpus::{Corpus, CorpusBounds};
use dircx::molecule::{self, recognize_molecule, Molecule};
use dircx::morphism::{classify, co_merger, factor_collapse, factor_ternary, globe_subdivision, GradedFunction, SclMorphism};
use dircx::ogposet::{ElemRef, OgPoset, Sign};

#[derive(Parser, Debug)]
#[command(name = "dircx", version, about = "Shapes, morphisms and directed complexes")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Input file, or the name of a built-in shape; repeat for verbs with
    /// several inputs.
    #[arg(long = "in", global = true)]
    inputs: Vec<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Size bound for enumerations.
    #[arg(long, global = true, env = "DIRCX_BOUND", default_value_t = 9)]
    bound: usize,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Seed for randomised drivers; every current verb is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Verb {
    /// Parse and check an oriented graded poset, molecule or complex.
    Validate,
    /// Strata, roundness and thinness of a shape, or a complex summary.
    Info,
    /// Paste two molecules along their k-boundaries (k from --dim).
    Paste,
    /// Gray product of two shapes.
    Gray,
    /// Join of two shapes.
    Join,
    /// Partial Gray cylinder over a shape.
    Cylinder,
    /// Factor a cylindrical collapse into generating collapses.
    CollapseFactor,
    /// Factor a subdivision-collapse span.
    TernaryFactor,
    /// Substitute a subdivided atom for an element.
    Subdivide,
    /// Merger and globular subdivision of a round molecule.
    Merge,
    /// Enumerate marked horns.
    Horns,
    /// Search fillers for every morphism from a horn.
    Fill,
    /// Check a marked complex against a horn inventory.
    Fibrant,
    /// Bounded closure of the marking in the free merge complex.
    Closure,
    /// Enumerate atoms up to a size bound.
    Atlas,
    /// Hasse diagram of a shape in DOT.
    ExportDot,
}

/// A failed run: exit code, error kind and message.
#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 3, kind: "usage", message: message.into() }
}

fn invalid(message: impl ToString) -> Failure {
    Failure { code: 1, kind: "invalid", message: message.to_string() }
}

/// Successful output; `search_failed` selects exit code 2.
enum Output {
    Json(Value),
    Dot(String),
    Search { report: Value, failed: bool },
}

const SHAPE_KEYS: [&str; 7] = ["shape", "atom", "poset", "source", "target", "base", "input"];

/// Replaces built-in shape names under shape-valued keys by face tables.
fn resolve_names(v: Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| {
                    let v = match (&v, SHAPE_KEYS.contains(&k.as_str())) {
                        (Value::String(s), true) => named_shape(s).map(|p| p.to_json()).unwrap_or(v),
                        _ => resolve_names(v),
                    };
                    (k, v)
                })
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.into_iter().map(resolve_names).collect()),
        other => other,
    }
}

fn load(arg: &str) -> Result<Value, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {arg}: {e}")))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{arg}: {e}")))?;
        return Ok(match v {
            Value::String(s) => named_shape(&s).map(|p| p.to_json()).ok_or_else(|| invalid(format!("unknown shape {s}")))?,
            v => resolve_names(v),
        });
    }
    named_shape(arg).map(|p| p.to_json()).ok_or_else(|| usage(format!("no such file or built-in shape: {arg}")))
}

fn inputs(cli: &Cli, n: usize) -> Result<Vec<Value>, Failure> {
    if cli.inputs.len() != n {
        return Err(usage(format!("expected {n} --in argument(s), got {}", cli.inputs.len())));
    }
    cli.inputs.iter().map(|s| load(s)).collect()
}

fn poset(v: &Value) -> Result<Arc<OgPoset>, Failure> {
    if v.get("clause").is_some() {
        return Molecule::from_json(v).map(|m| m.carrier().clone()).map_err(invalid);
    }
    OgPoset::from_json(v).map(Arc::new).map_err(invalid)
}

fn molecule_of(v: &Value) -> Result<Molecule, Failure> {
    if v.get("clause").is_some() {
        return Molecule::from_json(v).map_err(invalid);
    }
    recognize_molecule(&*poset(v)?).ok_or_else(|| invalid("not a molecule"))
}

fn function(v: &Value) -> Result<GradedFunction, Failure> {
    GradedFunction::from_json(v).map_err(invalid)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key).ok_or_else(|| invalid(format!("missing \"{key}\"")))
}

fn elems(v: &Value) -> Result<Vec<ElemRef>, Failure> {
    serde_json::from_value(v.clone()).map_err(invalid)
}

fn is_complex(v: &Value) -> bool {
    v.get("cells").is_some()
}

fn to_dot(p: &OgPoset) -> String {
    let mut s = String::from("digraph ogposet {\n  rankdir=BT;\n");
    for x in p.elements() {
        s.push_str(&format!("  \"{}.{}\" [label=\"{}.{}\"];\n", x.dim, x.index, x.dim, x.index));
    }
    for x in p.elements() {
        for sign in Sign::BOTH {
            for y in p.faces(x, sign) {
                s.push_str(&format!("  \"{}.{}\" -> \"{}.{}\" [label=\"{}\"];\n", y.dim, y.index, x.dim, x.index, sign.symbol()));
            }
        }
    }
    s.push_str("}\n");
    s
}

fn shape_output(cli: &Cli, p: &OgPoset) -> Output {
    match cli.format {
        Format::Json => Output::Json(p.to_json()),
        Format::Dot => Output::Dot(to_dot(p)),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    if cli.format == Format::Dot
        && !matches!(cli.verb, Verb::Paste | Verb::Gray | Verb::Join | Verb::Cylinder | Verb::ExportDot)
    {
        return Err(usage("--format dot applies to verbs that produce a shape"));
    }
    match cli.verb {
        Verb::Validate => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            if is_complex(&v) {
                let x = MarkedComplex::from_json(&v).map_err(invalid)?;
                x.base.validate().map_err(invalid)?;
                return Ok(Output::Json(json!({"dims": x.base.stratum_sizes(), "marked": x.marked().len()})));
            }
            Ok(Output::Json(json!({"dims": poset(&v)?.stratum_sizes()})))
        }
        Verb::Info => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            if is_complex(&v) {
                let x = MarkedComplex::from_json(&v).map_err(invalid)?;
                return Ok(Output::Json(json!({
                    "cells": x.base.stratum_sizes(),
                    "dim": x.base.dim(),
                    "marked": x.marked(),
                    "variant": x.variant,
                })));
            }
            let p = poset(&v)?;
            let full = p.full_set();
            let r = p.roundness(&full);
            let thin = p.check_oriented_thinness();
            let m = recognize_molecule(&p);
            Ok(Output::Json(json!({
                "atom": m.as_ref().is_some_and(|m| m.is_atom()),
                "dim": p.dim(),
                "dims": p.stratum_sizes(),
                "globular": r.globular,
                "molecule": m.is_some(),
                "round": m.is_some() && r.round,
                "thin": thin.ok,
                "thinness_violations": thin.violations,
            })))
        }
        Verb::Paste => {
            let ins = inputs(cli, 2)?;
            let (u, v) = (molecule_of(&ins[0])?, molecule_of(&ins[1])?);
            let k = match cli.dim {
                Some(k) => k,
                None => (u.dim().min(v.dim()) - 1).try_into().map_err(|_| usage("pasting needs positive dimensions or --dim"))?,
            };
            let m = molecule::paste(&u, &v, k).map_err(invalid)?;
            Ok(shape_output(cli, m.carrier()))
        }
        Verb::Gray => {
            let ins = inputs(cli, 2)?;
            Ok(shape_output(cli, &gray(&*poset(&ins[0])?, &*poset(&ins[1])?).poset))
        }
        Verb::Join => {
            let ins = inputs(cli, 2)?;
            Ok(shape_output(cli, &join(&*poset(&ins[0])?, &*poset(&ins[1])?).poset))
        }
        Verb::Cylinder => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let (base, k) = match v.get("base") {
                Some(b) => (poset(b)?, v.get("k").map(elems).transpose()?.unwrap_or_default()),
                None => (poset(&v)?, Vec::new()),
            };
            if let Some(&e) = k.iter().find(|e| !base.contains(**e)) {
                return Err(invalid(format!("{e} is not an element of the base")));
            }
            let k = base.set_of(k);
            let cyl = partial_cylinder(&base, &k).map_err(invalid)?;
            Ok(shape_output(cli, &cyl.poset))
        }
        Verb::CollapseFactor => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let f = function(&v)?;
            let fact = factor_collapse(&f).map_err(invalid)?;
            let k_seq: Vec<Vec<ElemRef>> =
                fact.cylinders.iter().map(|c| c.base.members(&c.k).collect()).collect();
            Ok(Output::Json(json!({
                "iso": fact.iso.to_json(),
                "k_seq": k_seq,
                "length": fact.len(),
                "stages": (0..=fact.len()).map(|i| fact.stage(i).to_json()).collect::<Vec<_>>(),
            })))
        }
        Verb::TernaryFactor => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let m = SclMorphism::new(function(field(&v, "sub")?)?, function(field(&v, "post")?)?).map_err(invalid)?;
            let t = factor_ternary(&m).map_err(invalid)?;
            Ok(Output::Json(json!({
                "collapse": t.collapse.to_json(),
                "collapse_class": classify(&t.collapse),
                "embedding": t.embedding.to_json(),
                "embedding_class": classify(&t.embedding),
                "subdivision": t.subdivision.to_json(),
            })))
        }
        Verb::Subdivide => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let p = poset(field(&v, "poset")?)?;
            let x: ElemRef = serde_json::from_value(field(&v, "elem")?.clone()).map_err(invalid)?;
            let s = function(field(&v, "comap")?)?;
            let r = pushout_comerger(&p, x, &s).map_err(invalid)?;
            Ok(Output::Json(json!({
                "inclusion": r.inclusion.to_json(),
                "poset": r.poset.to_json(),
                "subdivision": r.subdivision.to_json(),
            })))
        }
        Verb::Merge => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let m = molecule_of(&v)?;
            let cm = co_merger(&m).map_err(invalid)?;
            let gs = globe_subdivision(&m).map_err(invalid)?;
            Ok(Output::Json(json!({
                "co_merger": cm.to_json(),
                "globe_subdivision": gs.to_json(),
                "merger": cm.target().to_json(),
            })))
        }
        Verb::Horns => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let universe = horn_universe(&v)?;
            let horns = enumerate_marked_horns(&universe);
            Ok(Output::Json(Value::Array(horns.iter().map(HornInstance::to_json).collect())))
        }
        Verb::Fill => {
            let ins = inputs(cli, 2)?;
            let x = MarkedComplex::from_json(&ins[0]).map_err(invalid)?;
            let h = HornInstance::from_json(&ins[1]).map_err(invalid)?;
            let ms = horn_morphisms(&x, &h, 100_000);
            let mut fillers = Vec::new();
            let mut unfilled = Vec::new();
            for e in &ms {
                match horn_filler_search(&x, &h, e) {
                    Some(f) => fillers.push(json!({"filler": f, "morphism": e})),
                    None => unfilled.push(json!(e)),
                }
            }
            let failed = !unfilled.is_empty();
            let report = json!({"fillers": fillers, "morphisms": ms.len(), "unfilled": unfilled, "pass": !failed});
            Ok(Output::Search { report, failed })
        }
        Verb::Fibrant => {
            let ins = inputs(cli, 2)?;
            let x = MarkedComplex::from_json(&ins[0]).map_err(invalid)?;
            let items = ins[1].as_array().ok_or_else(|| invalid("inventory must be a list"))?;
            let inventory = items.iter().map(InventoryItem::from_json).collect::<Result<Vec<_>, _>>().map_err(invalid)?;
            let report = fibrancy_report(&x, &inventory, cli.dim);
            Ok(Output::Search { failed: !report.pass, report: report.to_json() })
        }
        Verb::Closure => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            let x = MarkedComplex::from_json(&v).map_err(invalid)?;
            let top = x.base.dim().max(0) as usize;
            let mut atoms: Vec<Arc<OgPoset>> = Vec::new();
            for c in x.base.cell_refs() {
                let s = x.base.cell(c).shape();
                if !atoms.iter().any(|a| a == s) {
                    atoms.push(s.clone());
                }
            }
            for n in 1..=top {
                let g = molecule::globe(n).carrier().clone();
                if !atoms.iter().any(|a| *a == g) {
                    atoms.push(g);
                }
            }
            let corpus = Corpus::generate(CorpusBounds { max_elements: cli.bound, max_dim: top });
            let rounds: Vec<Arc<OgPoset>> = corpus.round().map(|m| m.carrier().clone()).collect();
            let universe = ClosureUniverse::build(&x.base, &atoms, &rounds, cli.bound);
            let seed = universe.seed_from_marking(&x);
            let r = marked_closure(&universe, &seed);
            Ok(Output::Json(json!({
                "bound": cli.bound,
                "members": r.members.iter().map(|&i| universe.cells[i].to_json()).collect::<Vec<_>>(),
                "rounds": r.rounds,
                "universe": universe.len(),
                "verified": r.verify(&universe),
            })))
        }
        Verb::Atlas => {
            if !cli.inputs.is_empty() {
                return Err(usage("atlas takes no input"));
            }
            let dim = cli.dim.unwrap_or(3);
            let corpus = Corpus::generate(CorpusBounds { max_elements: cli.bound, max_dim: dim });
            let atoms: Vec<Value> = corpus
                .atoms()
                .map(|m| json!({"dims": m.carrier().stratum_sizes(), "poset": m.carrier().to_json()}))
                .collect();
            Ok(Output::Json(json!({"atoms": atoms, "bound": cli.bound, "count": atoms.len(), "dim": dim})))
        }
        Verb::ExportDot => {
            let [v] = <[Value; 1]>::try_from(inputs(cli, 1)?).expect("one input");
            Ok(Output::Dot(to_dot(&*poset(&v)?)))
        }
    }
}

/// Marked atoms to enumerate horns over: every marking of a bare atom, the
/// listed `{atom, marking}` pairs, or the marked cells of a complex with
/// their induced markings.
fn horn_universe(v: &Value) -> Result<Vec<(Arc<OgPoset>, dircx::ogposet::ElemSet)>, Failure> {
    if is_complex(v) {
        let x = MarkedComplex::from_json(v).map_err(invalid)?;
        let mut out = Vec::new();
        for c in x.marked().iter().copied() {
            let cell = x.base.cell(c);
            let shape = cell.shape().clone();
            let marked = shape.elements().filter(|&e| e.dim > 0 && x.is_marked(cell.face(e)));
            let b = shape.set_of(marked);
            out.push((shape, b));
        }
        return Ok(out);
    }
    if let Some(list) = v.as_array() {
        let mut out = Vec::new();
        for item in list {
            let shape = poset(field(item, "atom")?)?;
            let marking = elems(field(item, "marking")?)?;
            if let Some(e) = marking.iter().find(|e| !shape.contains(**e) || e.dim == 0) {
                return Err(invalid(format!("cannot mark {e}")));
            }
            let b = shape.set_of(marking);
            out.push((shape, b));
        }
        return Ok(out);
    }
    let shape = poset(v)?;
    if shape.greatest().is_none() {
        return Err(invalid("horns live on atoms"));
    }
    Ok(all_markings(&shape).into_iter().map(|b| (shape.clone(), b)).collect())
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{}", json!({"error": f.kind, "message": f.message}));
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return fail(&usage(first));
        }
    };
    let result = run(&cli).and_then(|out| match out {
        Output::Json(v) => emit(&cli, &format!("{v}\n")).map(|_| 0),
        Output::Dot(s) => emit(&cli, &s).map(|_| 0),
        Output::Search { report, failed } => emit(&cli, &format!("{report}\n")).map(|_| if failed { 2 } else { 0 }),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => fail(&f),
    }
}
