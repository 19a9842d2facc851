use crate::output::{parse_perm, parse_set, Ctx, Outcome};
use crate::witness::WitnessFile;
use anyhow::Context as _;
use clap::Subcommand;
use frlab_core::catalog;
use frlab_core::closure::{
    enumerate_invariant_closures, is_disjointifying, is_invariant, minimize_form_witness,
    validate_closure, Bounds, ClosureOperator, Verdict, Witness,
};
use frlab_core::fraisse::{
    age, amalgamate, build_limit, check_limit_properties, AmalgamVerdict, BuiltinClass, Flavor,
    FraisseClassSpec,
};
use frlab_core::groups::automorphism_group;
use frlab_core::instance::ActionInstance;
use frlab_core::involve::{run_involvement, transversal_quotient, SigmaTarget, DEFAULT_PALETTE};
use frlab_core::rank::{certify_infinite_rank, rank_table, rank_value, RankTable};
use frlab_core::structures::{ultrahomogenize, FinStructure, StructureJson};
use frlab_core::support::{
    check_support_axioms, check_support_rank_compat, decompose_permutation, reduce_eplus_to_eqy,
    reduce_eqy_to_eplus, QPoint, SupportFunction, TokenSeq,
};
use frlab_core::{ElemSet, DEFAULT_ARITY_CAP};
use serde::Serialize;
use std::path::PathBuf;

fn load_structure(input: Option<&PathBuf>, builtin: Option<&str>) -> anyhow::Result<FinStructure> {
    match (input, builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok(FinStructure::from_json_str(&text)?)
        }
        (None, Some(name)) => Ok(catalog::load_instance(name)?.structure().clone()),
        _ => Err(frlab_core::Error::MalformedInput(
            "give exactly one of --input or --builtin".into(),
        )
        .into()),
    }
}

/// Builtin name, or a path to a JSON document holding either a group
/// (`{"domain_size":..,"generators":..}`, acting on its orbit structure)
/// or a structure (acting through its automorphisms).
fn load_instance(name: &str) -> anyhow::Result<ActionInstance> {
    match catalog::load_instance(name) {
        Ok(inst) => Ok(inst),
        Err(frlab_core::Error::UnknownBuiltin(_)) if std::path::Path::new(name).exists() => {
            let text = std::fs::read_to_string(name)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
            if value.get("generators").is_some() {
                let doc: frlab_core::groups::GroupJson = serde_json::from_value(value)
                    .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                let group = frlab_core::groups::PermGroup::from_json(&doc)?;
                let stem = std::path::Path::new(name)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| name.to_string());
                Ok(ActionInstance::Fixed(catalog::fixed_from_group(
                    stem, group,
                )?))
            } else {
                let doc: StructureJson = serde_json::from_value(value)
                    .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                let structure = FinStructure::from_json(&doc)?;
                let stem = std::path::Path::new(name)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| name.to_string());
                Ok(ActionInstance::Fixed(catalog::fixed_from_structure(
                    stem, structure,
                )))
            }
        }
        Err(e) => Err(e.into()),
    }
}

fn operator(name: &str, depth: usize) -> anyhow::Result<ClosureOperator> {
    Ok(ClosureOperator::by_name(name, depth)?)
}

fn class(name: &str) -> anyhow::Result<BuiltinClass> {
    Ok(BuiltinClass::from_name(name)?)
}

fn verdict_outcome(verdicts: &[&Verdict]) -> Outcome {
    if verdicts.iter().any(|v| matches!(v, Verdict::Fails { .. })) {
        Outcome::PropertyFailed
    } else if verdicts
        .iter()
        .any(|v| matches!(v, Verdict::Unresolved { .. }))
    {
        Outcome::Unresolved
    } else {
        Outcome::Ok
    }
}

fn render_verdict(v: &Verdict) -> String {
    match v {
        Verdict::Holds => "holds (exact)".into(),
        Verdict::HoldsWithin { bounds } => format!(
            "holds up to bounds (set size {}, witness search {})",
            bounds.set_size, bounds.witness_search
        ),
        Verdict::Fails { witness } => format!("fails: {witness:?}"),
        Verdict::Unresolved { detail, .. } => format!("unresolved: {detail}"),
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum StructureCmd {
    /// Parse and validate a structure document.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Automorphism group: order plus generators in cycle notation.
    Auts {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
    },
    /// Expand with one relation per automorphism orbit of small tuples.
    Ultrahom {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 2)]
        cap: usize,
        #[arg(long, default_value_t = DEFAULT_ARITY_CAP)]
        max_arity: usize,
    },
}

#[derive(Serialize)]
struct AutsReport {
    order: String,
    generators: Vec<String>,
}

pub fn structure(cmd: &StructureCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        StructureCmd::Validate { input } => {
            let s = load_structure(Some(input), None)?;
            ctx.emit(&s.json(), || {
                format!(
                    "valid structure: {} elements, {} relations, {} tuples",
                    s.size(),
                    s.signature().len(),
                    s.tuple_count()
                )
            })?;
            Ok(Outcome::Ok)
        }
        StructureCmd::Auts { input, builtin } => {
            let s = load_structure(input.as_ref(), builtin.as_deref())?;
            let group = automorphism_group(&s);
            let report = AutsReport {
                order: group.order().to_string(),
                generators: group
                    .generators()
                    .iter()
                    .map(|g| g.cycle_string())
                    .collect(),
            };
            ctx.emit(&report, || {
                format!(
                    "automorphism group of order {}\ngenerators: {}",
                    report.order,
                    report.generators.join(" , ")
                )
            })?;
            Ok(Outcome::Ok)
        }
        StructureCmd::Ultrahom {
            input,
            builtin,
            cap,
            max_arity,
        } => {
            let s = load_structure(input.as_ref(), builtin.as_deref())?;
            let expanded = ultrahomogenize(&s, *cap, *max_arity)?;
            ctx.emit(&expanded.json(), || {
                format!(
                    "expanded signature: {} orbit relations up to arity {cap}",
                    expanded.signature().len()
                )
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum GroupCmd {
    /// Congruence class of an element over a base set.
    Orbit {
        #[arg(long)]
        instance: String,
        #[arg(short, long)]
        element: usize,
        #[arg(long, default_value = "")]
        base: String,
    },
    /// Pointwise or setwise stabilizer generators.
    Stab {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "pointwise")]
        mode: String,
    },
}

#[derive(Serialize)]
struct OrbitReport {
    instance: String,
    element: usize,
    base: Vec<usize>,
    orbit: Vec<usize>,
}

pub fn group(cmd: &GroupCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        GroupCmd::Orbit {
            instance,
            element,
            base,
        } => {
            let mut inst = load_instance(instance)?;
            let base = parse_set(base)?;
            let orbit = inst.orbit_over(*element, base)?;
            let report = OrbitReport {
                instance: instance.clone(),
                element: *element,
                base: base.to_vec(),
                orbit: orbit.to_vec(),
            };
            ctx.emit(&report, || format!("orbit: {orbit}"))?;
            Ok(Outcome::Ok)
        }
        GroupCmd::Stab {
            instance,
            set,
            mode,
        } => {
            let inst = load_instance(instance)?;
            let fixed = inst.as_fixed().ok_or_else(|| {
                frlab_core::Error::Precondition("stabilizers need a fixed instance".into())
            })?;
            let set = parse_set(set)?;
            let stab = match mode.as_str() {
                "pointwise" => fixed.group.pointwise_stabilizer(set),
                "setwise" => fixed.group.setwise_stabilizer(set),
                other => {
                    return Err(
                        frlab_core::Error::MalformedInput(format!("unknown mode {other}")).into(),
                    )
                }
            };
            let report = AutsReport {
                order: stab.order().to_string(),
                generators: stab.generators().iter().map(|g| g.cycle_string()).collect(),
            };
            ctx.emit(&report, || {
                format!(
                    "{mode} stabilizer of {set}: order {}\ngenerators: {}",
                    report.order,
                    report.generators.join(" , ")
                )
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum ClosureCmd {
    /// Closure axioms plus invariance on the subset lattice.
    Check {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        cl: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        set_size: usize,
    },
    /// The disjointifying property in one or all four forms.
    Forms {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        cl: String,
        #[arg(long, default_value = "all")]
        form: String,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = 24)]
        witness_search: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Enumerate every invariant closure operator on a small action.
    Enumerate {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 4)]
        max_domain: usize,
    },
}

#[derive(Serialize)]
struct CheckReport {
    operator: String,
    axioms: Verdict,
    invariance: Verdict,
}

#[derive(Serialize)]
struct FormsReport {
    operator: String,
    instance: String,
    bounds: Bounds,
    forms: Vec<(u8, Verdict)>,
}

pub fn closure(cmd: &ClosureCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        ClosureCmd::Check {
            instance,
            cl,
            depth,
            set_size,
        } => {
            let mut inst = load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size(2 * set_size)?;
            }
            let op = operator(cl, *depth)?;
            let sample: Vec<ElemSet> = inst.universe().subsets_up_to(*set_size);
            let axioms = validate_closure(&op, &mut inst, &sample)?;
            let invariance = is_invariant(&op, &mut inst, &sample)?;
            let report = CheckReport {
                operator: op.name.clone(),
                axioms: axioms.clone(),
                invariance: invariance.clone(),
            };
            ctx.emit(&report, || {
                format!(
                    "axioms: {}\ninvariance: {}",
                    render_verdict(&report.axioms),
                    render_verdict(&report.invariance)
                )
            })?;
            Ok(verdict_outcome(&[&axioms, &invariance]))
        }
        ClosureCmd::Forms {
            instance,
            cl,
            form,
            set_size,
            witness_search,
            depth,
        } => {
            let mut inst = load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size(2 * set_size)?;
            }
            let op = operator(cl, *depth)?;
            let bounds = Bounds {
                set_size: *set_size,
                witness_search: *witness_search,
            };
            let forms: Vec<u8> = match form.as_str() {
                "all" => vec![1, 2, 3, 4],
                f => vec![f
                    .parse::<u8>()
                    .map_err(|_| frlab_core::Error::MalformedInput(format!("bad form {f}")))?],
            };
            let mut report = FormsReport {
                operator: op.name.clone(),
                instance: instance.clone(),
                bounds,
                forms: vec![],
            };
            for f in forms {
                let mut verdict = is_disjointifying(&op, &mut inst, f, bounds)?;
                // Counterexamples ship minimized, with a witness file.
                if let Verdict::Fails {
                    witness: Witness::Form(w),
                } = &verdict
                {
                    let small = minimize_form_witness(&op, &mut inst, w, bounds)?;
                    verdict = Verdict::Fails {
                        witness: Witness::Form(small),
                    };
                }
                report.forms.push((f, verdict));
            }
            if report
                .forms
                .iter()
                .any(|(_, v)| matches!(v, Verdict::Fails { .. }))
            {
                let file = WitnessFile::closure(
                    instance.clone(),
                    op.name.clone(),
                    *depth,
                    bounds,
                    report
                        .forms
                        .iter()
                        .filter_map(|(_, v)| match v {
                            Verdict::Fails { witness } => Some(witness.clone()),
                            _ => None,
                        })
                        .collect(),
                );
                file.write_default()?;
            }
            let verdicts: Vec<&Verdict> = report.forms.iter().map(|(_, v)| v).collect();
            let outcome = verdict_outcome(&verdicts);
            ctx.emit(&report, || {
                report
                    .forms
                    .iter()
                    .map(|(f, v)| format!("form {f}: {}", render_verdict(v)))
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(outcome)
        }
        ClosureCmd::Enumerate {
            instance,
            max_domain,
        } => {
            let inst = load_instance(instance)?;
            let fixed = inst.as_fixed().ok_or_else(|| {
                frlab_core::Error::Precondition("enumeration needs a fixed instance".into())
            })?;
            let ops = enumerate_invariant_closures(&fixed.group, *max_domain)?;
            #[derive(Serialize)]
            struct EnumReport {
                instance: String,
                count: usize,
                names: Vec<String>,
            }
            let report = EnumReport {
                instance: instance.clone(),
                count: ops.len(),
                names: ops.iter().map(|o| o.name.clone()).collect(),
            };
            ctx.emit(&report, || {
                format!("{} invariant closure operators", report.count)
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum RankCmd {
    /// Rank without the disjunctive clause.
    Drk(RankArgs),
    /// Rank with the disjunctive clause.
    Krk(RankArgs),
    /// Full table of both ranks (TSV: a, B, Drk, Krk).
    Table {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 64)]
        base_cap: usize,
    },
    /// Infinite-rank certificate from a disjointifying operator.
    Certify {
        #[arg(long)]
        instance: String,
        #[arg(short, long)]
        element: usize,
        #[arg(long, default_value = "")]
        base: String,
        #[arg(long)]
        cl: String,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = 24)]
        witness_search: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

#[derive(clap::Args)]
pub struct RankArgs {
    #[arg(long)]
    instance: String,
    #[arg(short, long)]
    element: Option<usize>,
    #[arg(long, default_value = "")]
    base: String,
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = 4)]
    depth: usize,
}

fn table_tsv(table: &RankTable) -> String {
    let mut out = String::from("a\tB\tDrk\tKrk\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{}\t{{{}}}\t{}\t{}\n",
            row.a,
            row.base
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            row.drk.display(),
            row.krk.display()
        ));
    }
    out.pop();
    out
}

pub fn rank(cmd: &RankCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        RankCmd::Drk(args) | RankCmd::Krk(args) => {
            let clause2 = matches!(cmd, RankCmd::Krk(_));
            let mut inst = load_instance(&args.instance)?;
            if args.all || args.element.is_none() {
                if let Some(e) = inst.as_extendable_mut() {
                    e.ensure_size(6)?;
                }
                let table = rank_table(&mut inst, 64, args.depth)?;
                ctx.emit_tsv(&table, || table_tsv(&table), || table_tsv(&table))?;
                return Ok(Outcome::Ok);
            }
            let a = args.element.unwrap();
            let base = parse_set(&args.base)?;
            let value = rank_value(&mut inst, a, base, args.depth, clause2)?;
            #[derive(Serialize)]
            struct One {
                instance: String,
                element: usize,
                base: Vec<usize>,
                clause2: bool,
                value: frlab_core::rank::RankValue,
            }
            let report = One {
                instance: args.instance.clone(),
                element: a,
                base: base.to_vec(),
                clause2,
                value,
            };
            ctx.emit(&report, || value.display())?;
            Ok(
                if matches!(value, frlab_core::rank::RankValue::Unresolved { .. }) {
                    Outcome::Unresolved
                } else {
                    Outcome::Ok
                },
            )
        }
        RankCmd::Table {
            instance,
            depth,
            base_cap,
        } => {
            let mut inst = load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size(6)?;
            }
            let fingerprint_parts = [
                "rank-table",
                instance.as_str(),
                &depth.to_string(),
                &base_cap.to_string(),
                &inst.structure().to_json_string(),
            ];
            let table: RankTable = ctx.cache.memo(&fingerprint_parts, || {
                Ok(rank_table(&mut inst, *base_cap, *depth)?)
            })?;
            ctx.emit_tsv(&table, || table_tsv(&table), || table_tsv(&table))?;
            Ok(Outcome::Ok)
        }
        RankCmd::Certify {
            instance,
            element,
            base,
            cl,
            set_size,
            witness_search,
            depth,
        } => {
            let mut inst = load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size((*element + 1).max(2 * set_size))?;
            }
            let op = operator(cl, *depth)?;
            let bounds = Bounds {
                set_size: *set_size,
                witness_search: *witness_search,
            };
            let cert = certify_infinite_rank(&mut inst, *element, parse_set(base)?, &op, bounds)?;
            let bound_limited = cert.bound_limited;
            ctx.emit(&cert, || {
                format!(
                    "certificate: rank({}, {:?}) is infinite given {}{}",
                    cert.element,
                    cert.base,
                    cert.operator,
                    if bound_limited {
                        " (bound-limited)"
                    } else {
                        ""
                    }
                )
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum FraisseCmd {
    /// Exhaust amalgamation instances up to a size bound.
    Check {
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 3)]
        bound: usize,
        #[arg(long, default_value = "plain")]
        flavor: String,
        #[arg(long, default_value_t = 0)]
        slack: usize,
    },
    /// Amalgamate one triple given in a JSON document.
    Amalgamate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Deterministic limit approximation.
    Limit {
        #[arg(long)]
        class: String,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Exhaustively confirm amalgamation up to the depth first.
        #[arg(long)]
        check_amalgamation: bool,
    },
    /// Score a structure against the limit properties.
    Verify {
        #[arg(long)]
        class: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        core: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// One representative per isomorphism class of small substructures.
    Age {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
}

fn parse_flavor(text: &str) -> anyhow::Result<Flavor> {
    match text {
        "plain" => Ok(Flavor::Plain),
        "disjoint" => Ok(Flavor::Disjoint),
        other => Err(frlab_core::Error::MalformedInput(format!("unknown flavor {other}")).into()),
    }
}

#[derive(serde::Deserialize)]
struct AmalgamInput {
    spec: frlab_core::fraisse::ClassKindJson,
    a: StructureJson,
    b: StructureJson,
    c: StructureJson,
    a_to_b: Vec<(usize, usize)>,
    a_to_c: Vec<(usize, usize)>,
    #[serde(default)]
    flavor: Option<String>,
    #[serde(default)]
    slack: usize,
}

#[derive(Serialize)]
struct AmalgamReport {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    amalgam: Option<StructureJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b_embedding: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_embedding: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<CounterexampleDoc>,
    triples_checked: Option<usize>,
}

#[derive(Serialize)]
struct CounterexampleDoc {
    a: StructureJson,
    b: StructureJson,
    c: StructureJson,
    a_to_b: Vec<(usize, usize)>,
    a_to_c: Vec<(usize, usize)>,
}

fn amalgam_report(verdict: &AmalgamVerdict) -> AmalgamReport {
    match verdict {
        AmalgamVerdict::Amalgam {
            d,
            b_embedding,
            c_embedding,
            disjoint,
        } => AmalgamReport {
            status: if *disjoint {
                "amalgam (disjoint)".into()
            } else {
                "amalgam".into()
            },
            amalgam: Some(d.json()),
            b_embedding: Some(b_embedding.pairs().collect()),
            c_embedding: Some(c_embedding.pairs().collect()),
            counterexample: None,
            triples_checked: None,
        },
        AmalgamVerdict::HoldsUpTo {
            bound,
            flavor,
            slack,
            triples_checked,
        } => AmalgamReport {
            status: format!("holds up to size {bound} ({flavor:?}, slack {slack})"),
            amalgam: None,
            b_embedding: None,
            c_embedding: None,
            counterexample: None,
            triples_checked: Some(*triples_checked),
        },
        AmalgamVerdict::Counterexample {
            a,
            b,
            c,
            a_to_b,
            a_to_c,
            ..
        } => AmalgamReport {
            status: "counterexample".into(),
            amalgam: None,
            b_embedding: None,
            c_embedding: None,
            counterexample: Some(CounterexampleDoc {
                a: a.json(),
                b: b.json(),
                c: c.json(),
                a_to_b: a_to_b.pairs().collect(),
                a_to_c: a_to_c.pairs().collect(),
            }),
            triples_checked: None,
        },
    }
}

pub fn fraisse(cmd: &FraisseCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        FraisseCmd::Check {
            class: name,
            bound,
            flavor,
            slack,
        } => {
            let spec = FraisseClassSpec::builtin(class(name)?);
            let flavor = parse_flavor(flavor)?;
            let verdict = frlab_core::fraisse::has_amalgamation(&spec, *bound, flavor, *slack)?;
            let report = amalgam_report(&verdict);
            let failed = matches!(verdict, AmalgamVerdict::Counterexample { .. });
            if let AmalgamVerdict::Counterexample { .. } = &verdict {
                WitnessFile::amalgam(spec.json(), &verdict, *slack)?.write_default()?;
            }
            ctx.emit(&report, || report.status.clone())?;
            Ok(if failed {
                Outcome::PropertyFailed
            } else {
                Outcome::Ok
            })
        }
        FraisseCmd::Amalgamate { input } => {
            let text = std::fs::read_to_string(input)?;
            let doc: AmalgamInput = serde_json::from_str(&text)
                .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
            let spec = FraisseClassSpec::from_json(&doc.spec)?;
            let a = FinStructure::from_json(&doc.a)?;
            let b = FinStructure::from_json(&doc.b)?;
            let c = FinStructure::from_json(&doc.c)?;
            let a_to_b = frlab_core::structures::PartialMap::from_pairs(doc.a_to_b)?;
            let a_to_c = frlab_core::structures::PartialMap::from_pairs(doc.a_to_c)?;
            let flavor = parse_flavor(doc.flavor.as_deref().unwrap_or("plain"))?;
            let verdict = amalgamate(&spec, &a, &b, &c, &a_to_b, &a_to_c, flavor, doc.slack)?;
            let report = amalgam_report(&verdict);
            let failed = matches!(verdict, AmalgamVerdict::Counterexample { .. });
            if failed {
                WitnessFile::amalgam(spec.json(), &verdict, doc.slack)?.write_default()?;
            }
            ctx.emit(&report, || report.status.clone())?;
            Ok(if failed {
                Outcome::PropertyFailed
            } else {
                Outcome::Ok
            })
        }
        FraisseCmd::Limit {
            class: name,
            n,
            depth,
            check_amalgamation,
        } => {
            let spec = FraisseClassSpec::builtin(class(name)?);
            if *check_amalgamation {
                let verdict =
                    frlab_core::fraisse::has_amalgamation(&spec, depth + 1, Flavor::Plain, 0)?;
                if !matches!(verdict, AmalgamVerdict::HoldsUpTo { .. }) {
                    WitnessFile::amalgam(spec.json(), &verdict, 0)?.write_default()?;
                    let report = amalgam_report(&verdict);
                    ctx.emit(&report, || report.status.clone())?;
                    return Ok(Outcome::PropertyFailed);
                }
            }
            #[derive(Serialize, serde::Deserialize)]
            struct LimitDoc {
                structure: StructureJson,
                core: Vec<usize>,
                rounds_completed: usize,
                requirements_satisfied: usize,
            }
            let seed = ctx.seed;
            let doc: LimitDoc = ctx.cache.memo(
                &[
                    "limit",
                    name,
                    &n.to_string(),
                    &depth.to_string(),
                    &seed.to_string(),
                ],
                || {
                    let built = build_limit(&spec, *n, *depth, seed)?;
                    Ok(LimitDoc {
                        structure: built.structure.json(),
                        core: built.core.to_vec(),
                        rounds_completed: built.rounds_completed,
                        requirements_satisfied: built.requirements_satisfied,
                    })
                },
            )?;
            ctx.emit(&doc, || {
                format!(
                    "built {} elements; core of {} with all depth-{depth} extensions realized; {} requirements satisfied",
                    doc.structure.size,
                    doc.core.len(),
                    doc.requirements_satisfied
                )
            })?;
            Ok(Outcome::Ok)
        }
        FraisseCmd::Verify {
            class: name,
            input,
            depth,
            core,
            samples,
        } => {
            let spec = FraisseClassSpec::builtin(class(name)?);
            // Accept either a bare structure or a wrapped build document
            // (whose own core is used unless one is given).
            let text = std::fs::read_to_string(input)?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
            let (m, doc_core) = if value.get("structure").is_some() {
                let structure: StructureJson =
                    serde_json::from_value(value["structure"].clone())
                        .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                let core: Option<Vec<usize>> = value
                    .get("core")
                    .and_then(|c| serde_json::from_value(c.clone()).ok());
                (
                    FinStructure::from_json(&structure)?,
                    core.map(|c| c.into_iter().collect::<ElemSet>()),
                )
            } else {
                let structure: StructureJson = serde_json::from_value(value)
                    .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                (FinStructure::from_json(&structure)?, None)
            };
            let core = core.as_deref().map(parse_set).transpose()?.or(doc_core);
            let report = check_limit_properties(&m, &spec, *depth, core, ctx.seed, *samples)?;
            ctx.emit(&report, || {
                format!(
                    "clause1 {:.3}, clause2 {:.3} ({}/{}), clause2-core {:?}, clause3 {:.3} over {} samples",
                    report.clause1_rate,
                    report.clause2_rate,
                    report.clause2_satisfied,
                    report.clause2_total,
                    report.clause2_core_rate,
                    report.clause3_rate,
                    report.clause3_total
                )
            })?;
            Ok(Outcome::Ok)
        }
        FraisseCmd::Age {
            input,
            builtin,
            bound,
        } => {
            let m = load_structure(input.as_ref(), builtin.as_deref())?;
            let reps = age(&m, *bound);
            let docs: Vec<StructureJson> = reps.iter().map(|r| r.json()).collect();
            ctx.emit(&docs, || {
                format!("{} isomorphism classes up to size {bound}", reps.len())
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum InvolveCmd {
    /// Back-and-forth run realizing a target color permutation.
    Run {
        #[arg(long)]
        class: String,
        #[arg(long)]
        cl: String,
        #[arg(long, default_value = "(0 1)")]
        sigma: String,
        #[arg(long, default_value_t = 12)]
        stages: usize,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_PALETTE)]
        palette: u8,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Check the operator is disjointifying (form 4, small bounds)
        /// on the class's growing instance before running.
        #[arg(long)]
        verify_operator: bool,
    },
    /// Transversal quotient of an equivariant permutation.
    Quotient {
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        orbits: usize,
        #[arg(long)]
        pi: String,
    },
}

pub fn involve(cmd: &InvolveCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        InvolveCmd::Run {
            class: name,
            cl,
            sigma,
            stages,
            budget,
            palette,
            depth,
            verify_operator,
        } => {
            let class = class(name)?;
            let op = operator(cl, *depth)?;
            let sigma = SigmaTarget::parse(sigma, *palette)?;
            if *verify_operator {
                let limit_name = match class {
                    BuiltinClass::Graphs => "graphs-limit",
                    BuiltinClass::LinearOrders => "dlo-limit",
                    BuiltinClass::EquivalencePairs => "pairs-limit",
                    BuiltinClass::PureSets => "pure-sets-limit",
                };
                let mut inst = load_instance(limit_name)?;
                if let Some(e) = inst.as_extendable_mut() {
                    e.ensure_size(4)?;
                }
                let bounds = Bounds {
                    set_size: 2,
                    witness_search: (*budget).min(24),
                };
                let verdict = is_disjointifying(&op, &mut inst, 4, bounds)?;
                if matches!(verdict, Verdict::Fails { .. }) {
                    ctx.emit(&verdict, || render_verdict(&verdict))?;
                    return Ok(Outcome::PropertyFailed);
                }
            }
            let report = run_involvement(class, &op, sigma, *stages, *budget)?;
            let ok = report.success && report.color_condition_rate == 1.0;
            ctx.emit(&report, || {
                format!(
                    "{} stages, map of {} elements, color condition {:.0}%",
                    report.stages.len(),
                    report.domain_size,
                    report.color_condition_rate * 100.0
                )
            })?;
            Ok(if ok {
                Outcome::Ok
            } else {
                Outcome::PropertyFailed
            })
        }
        InvolveCmd::Quotient { delta, orbits, pi } => {
            let pi = parse_perm(pi, delta * orbits)?;
            let sigma = transversal_quotient(*delta, *orbits, &pi)?;
            #[derive(Serialize)]
            struct QuotientReport {
                pi: String,
                sigma: String,
                images: Vec<usize>,
            }
            let report = QuotientReport {
                pi: pi.cycle_string(),
                sigma: sigma.cycle_string(),
                images: sigma.images().to_vec(),
            };
            ctx.emit(&report, || format!("induced permutation: {}", report.sigma))?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum SupportCmd {
    /// The three support-function axioms.
    Axioms {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        supp: String,
        #[arg(long, default_value = "1,2,3")]
        which: String,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = 24)]
        witness_search: usize,
    },
    /// Support/rank compatibility sweep.
    Compat {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        supp: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = 24)]
        witness_search: usize,
    },
    /// The three-factor permutation decomposition.
    Decompose {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        pi: String,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[arg(long)]
        w: String,
    },
}

pub fn support(cmd: &SupportCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        SupportCmd::Axioms {
            instance,
            supp,
            which,
            set_size,
            witness_search,
        } => {
            let mut inst = load_instance(instance)?;
            let supp = SupportFunction::by_name(supp)?;
            let which: Vec<u8> = which
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| frlab_core::Error::MalformedInput("bad axiom list".into()))?;
            let bounds = Bounds {
                set_size: *set_size,
                witness_search: *witness_search,
            };
            let verdict = check_support_axioms(&supp, &mut inst, &which, bounds)?;
            if let Verdict::Fails { witness } = &verdict {
                WitnessFile::support(instance.clone(), supp.name.clone(), bounds, witness.clone())
                    .write_default()?;
            }
            ctx.emit(&verdict, || render_verdict(&verdict))?;
            Ok(verdict_outcome(&[&verdict]))
        }
        SupportCmd::Compat {
            instance,
            supp,
            depth,
            set_size,
            witness_search,
        } => {
            let mut inst = load_instance(instance)?;
            let supp = SupportFunction::by_name(supp)?;
            let report = check_support_rank_compat(
                &supp,
                &mut inst,
                *depth,
                Bounds {
                    set_size: *set_size,
                    witness_search: *witness_search,
                },
            )?;
            let ok = report.violations.is_empty();
            if let Some(v) = report.violations.first() {
                WitnessFile::compat(
                    instance.clone(),
                    supp.name.clone(),
                    *depth,
                    v.element,
                    v.base.clone(),
                )
                .write_default()?;
            }
            ctx.emit(&report, || {
                format!(
                    "{} queries, {} finite-rank cases, {} violations",
                    report.checked,
                    report.finite_rank_cases,
                    report.violations.len()
                )
            })?;
            Ok(if ok {
                Outcome::Ok
            } else {
                Outcome::PropertyFailed
            })
        }
        SupportCmd::Decompose {
            degree,
            pi,
            u,
            v,
            w,
        } => {
            let pi = parse_perm(pi, *degree)?;
            let (p0, p1, p2) =
                decompose_permutation(&pi, parse_set(u)?, parse_set(v)?, parse_set(w)?)?;
            #[derive(Serialize)]
            struct DecompositionReport {
                pi0: String,
                pi1: String,
                pi2: String,
            }
            let report = DecompositionReport {
                pi0: p0.cycle_string(),
                pi1: p1.cycle_string(),
                pi2: p2.cycle_string(),
            };
            ctx.emit(&report, || {
                format!("pi = {} ∘ {} ∘ {}", report.pi2, report.pi1, report.pi0)
            })?;
            Ok(Outcome::Ok)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum EplusCmd {
    /// Reduce a token sequence to a windowed injection, or back.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "to-injection")]
        direction: String,
        #[arg(long, default_value_t = 4)]
        delta: usize,
        #[arg(long, default_value_t = 6)]
        width: usize,
    },
    /// Seeded bi-reducibility sweep.
    Verify {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

pub fn eplus(cmd: &EplusCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        EplusCmd::Reduce {
            input,
            direction,
            delta,
            width,
        } => {
            let text = std::fs::read_to_string(input)?;
            match direction.as_str() {
                "to-injection" => {
                    let p: TokenSeq = serde_json::from_str(&text)
                        .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                    let y = reduce_eplus_to_eqy(&p, *delta, *width)?;
                    ctx.emit(&y.json(), || format!("injection window {delta}x{width}"))?;
                }
                "to-sequence" => {
                    // The keyed "d,t" document form, as emitted by the
                    // forward direction.
                    let doc: std::collections::BTreeMap<String, String> =
                        serde_json::from_str(&text)
                            .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
                    let y = QPoint::from_json(&doc)?;
                    let p = reduce_eqy_to_eplus(&y);
                    ctx.emit(&p, || {
                        format!("sequence over {} positions", p.support.len())
                    })?;
                }
                other => {
                    return Err(frlab_core::Error::MalformedInput(format!(
                        "unknown direction {other}"
                    ))
                    .into())
                }
            }
            Ok(Outcome::Ok)
        }
        EplusCmd::Verify { samples } => {
            let _ = samples;
            let report = frlab_core::props::run_suite("bireducibility", ctx.seed)?;
            emit_prop_report(&report, ctx)
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Subcommand)]
pub enum PropsCmd {
    /// Run a named invariant suite.
    Run {
        #[arg(long)]
        suite: String,
    },
    /// List the known suites.
    List,
}

pub fn props(cmd: &PropsCmd, ctx: &Ctx) -> anyhow::Result<Outcome> {
    match cmd {
        PropsCmd::Run { suite } => {
            let report = frlab_core::props::run_suite(suite, ctx.seed)?;
            if report.failed > 0 {
                WitnessFile::suite(suite.clone(), ctx.seed).write_default()?;
            }
            emit_prop_report(&report, ctx)
        }
        PropsCmd::List => {
            let suites = frlab_core::props::known_suites();
            ctx.emit(&suites, || suites.join("\n"))?;
            Ok(Outcome::Ok)
        }
    }
}

fn emit_prop_report(report: &frlab_core::props::PropReport, ctx: &Ctx) -> anyhow::Result<Outcome> {
    ctx.emit(report, || {
        let mut lines = vec![format!(
            "{}: {} passed, {} failed, {} unresolved",
            report.suite, report.passed, report.failed, report.unresolved
        )];
        for case in report.cases.iter().take(10) {
            lines.push(format!(
                "  {:?}: {} {}",
                case.status, case.label, case.detail
            ));
        }
        lines.join("\n")
    })?;
    Ok(if report.failed > 0 {
        Outcome::PropertyFailed
    } else if report.unresolved > 0 {
        Outcome::Unresolved
    } else {
        Outcome::Ok
    })
}
