//! Witness files: every failing run writes one, and `verify-witness`
//! re-checks it independently of the run that produced it.

use crate::output::{Ctx, Outcome};
use frlab_core::catalog;
use frlab_core::closure::{recheck_form_witness, Bounds, ClosureOperator, Witness};
use frlab_core::fraisse::{amalgamate, AmalgamVerdict, ClassKindJson, Flavor, FraisseClassSpec};
use frlab_core::structures::{FinStructure, PartialMap, StructureJson};
use frlab_core::support::SupportFunction;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_WITNESS_PATH: &str = "frlab-witness.json";

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessFile {
    Closure {
        schema: String,
        instance: String,
        operator: String,
        depth: usize,
        bounds: Bounds,
        witnesses: Vec<Witness>,
    },
    Amalgam {
        schema: String,
        spec: ClassKindJson,
        flavor: String,
        slack: usize,
        a: StructureJson,
        b: StructureJson,
        c: StructureJson,
        a_to_b: Vec<(usize, usize)>,
        a_to_c: Vec<(usize, usize)>,
    },
    Support {
        schema: String,
        instance: String,
        supp: String,
        bounds: Bounds,
        witness: Witness,
    },
    /// A rank/support compatibility violation: re-checked by recomputing
    /// the rank and both supports.
    Compat {
        schema: String,
        instance: String,
        supp: String,
        depth: usize,
        element: usize,
        base: Vec<usize>,
    },
    /// A failing property suite: re-checked by re-running it with the
    /// same seed.
    Suite {
        schema: String,
        suite: String,
        seed: u64,
    },
}

impl WitnessFile {
    pub fn closure(
        instance: String,
        operator: String,
        depth: usize,
        bounds: Bounds,
        witnesses: Vec<Witness>,
    ) -> Self {
        WitnessFile::Closure {
            schema: "frlab.witness.v1".into(),
            instance,
            operator,
            depth,
            bounds,
            witnesses,
        }
    }

    pub fn amalgam(
        spec: ClassKindJson,
        verdict: &AmalgamVerdict,
        slack: usize,
    ) -> anyhow::Result<Self> {
        let AmalgamVerdict::Counterexample {
            a,
            b,
            c,
            a_to_b,
            a_to_c,
            flavor,
            ..
        } = verdict
        else {
            return Err(frlab_core::Error::Precondition(
                "only counterexamples become witness files".into(),
            )
            .into());
        };
        Ok(WitnessFile::Amalgam {
            schema: "frlab.witness.v1".into(),
            spec,
            flavor: match flavor {
                Flavor::Plain => "plain".into(),
                Flavor::Disjoint => "disjoint".into(),
            },
            slack,
            a: a.json(),
            b: b.json(),
            c: c.json(),
            a_to_b: a_to_b.pairs().collect(),
            a_to_c: a_to_c.pairs().collect(),
        })
    }

    pub fn support(instance: String, supp: String, bounds: Bounds, witness: Witness) -> Self {
        WitnessFile::Support {
            schema: "frlab.witness.v1".into(),
            instance,
            supp,
            bounds,
            witness,
        }
    }

    pub fn compat(
        instance: String,
        supp: String,
        depth: usize,
        element: usize,
        base: Vec<usize>,
    ) -> Self {
        WitnessFile::Compat {
            schema: "frlab.witness.v1".into(),
            instance,
            supp,
            depth,
            element,
            base,
        }
    }

    pub fn suite(suite: String, seed: u64) -> Self {
        WitnessFile::Suite {
            schema: "frlab.witness.v1".into(),
            suite,
            seed,
        }
    }

    pub fn write_default(&self) -> anyhow::Result<PathBuf> {
        let path = PathBuf::from(DEFAULT_WITNESS_PATH);
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        eprintln!("witness written to {}", path.display());
        Ok(path)
    }
}

/// Re-checks a witness file; exit 0 means the witness reproduces.
pub fn verify_witness(input: &Path, ctx: &Ctx) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(input)?;
    let file: WitnessFile = serde_json::from_str(&text)
        .map_err(|e| frlab_core::Error::MalformedInput(e.to_string()))?;
    #[derive(Serialize)]
    struct Recheck {
        reproduced: bool,
        detail: String,
    }
    let result = match &file {
        WitnessFile::Closure {
            instance,
            operator,
            depth,
            bounds,
            witnesses,
            ..
        } => {
            let mut inst = catalog::load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size(2 * bounds.set_size)?;
            }
            let op = ClosureOperator::by_name(operator, *depth)?;
            let mut all = true;
            let mut detail = String::new();
            for w in witnesses {
                let ok = match w {
                    Witness::Form(fw) => recheck_form_witness(&op, &mut inst, fw, *bounds)?,
                    Witness::Axiom { subset, .. } => {
                        let s: frlab_core::ElemSet = subset.iter().copied().collect();
                        let c = op.eval(&mut inst, s)?;
                        !s.is_subset(c) || op.eval(&mut inst, c)? != c
                    }
                    Witness::Invariance { subset, .. } => {
                        let s: frlab_core::ElemSet = subset.iter().copied().collect();
                        let sample = [s];
                        matches!(
                            frlab_core::closure::is_invariant(&op, &mut inst, &sample)?,
                            frlab_core::closure::Verdict::Fails { .. }
                        )
                    }
                    Witness::Support { .. } => false,
                };
                if !ok {
                    all = false;
                    detail = format!("witness did not reproduce: {w:?}");
                }
            }
            Recheck {
                reproduced: all,
                detail,
            }
        }
        WitnessFile::Amalgam {
            spec,
            flavor,
            slack,
            a,
            b,
            c,
            a_to_b,
            a_to_c,
            ..
        } => {
            let spec = FraisseClassSpec::from_json(spec)?;
            let a = FinStructure::from_json(a)?;
            let b = FinStructure::from_json(b)?;
            let c = FinStructure::from_json(c)?;
            let flavor = if flavor == "disjoint" {
                Flavor::Disjoint
            } else {
                Flavor::Plain
            };
            let verdict = amalgamate(
                &spec,
                &a,
                &b,
                &c,
                &PartialMap::from_pairs(a_to_b.clone())?,
                &PartialMap::from_pairs(a_to_c.clone())?,
                flavor,
                *slack,
            )?;
            Recheck {
                reproduced: matches!(verdict, AmalgamVerdict::Counterexample { .. }),
                detail: format!("exhaustive re-search at slack {slack}"),
            }
        }
        WitnessFile::Support {
            instance,
            supp,
            bounds,
            witness,
            ..
        } => {
            let mut inst = catalog::load_instance(instance)?;
            let supp = SupportFunction::by_name(supp)?;
            let reproduced = match witness {
                Witness::Support { axiom, .. } => {
                    let v = frlab_core::support::check_support_axioms(
                        &supp,
                        &mut inst,
                        &[*axiom],
                        *bounds,
                    )?;
                    matches!(v, frlab_core::closure::Verdict::Fails { .. })
                }
                _ => false,
            };
            Recheck {
                reproduced,
                detail: String::new(),
            }
        }
        WitnessFile::Compat {
            instance,
            supp,
            depth,
            element,
            base,
            ..
        } => {
            let mut inst = catalog::load_instance(instance)?;
            if let Some(e) = inst.as_extendable_mut() {
                e.ensure_size(base.iter().copied().max().unwrap_or(0).max(*element) + 1)?;
            }
            let supp = SupportFunction::by_name(supp)?;
            let b: frlab_core::ElemSet = base.iter().copied().collect();
            let finite =
                frlab_core::rank::rank_value(&mut inst, *element, b, *depth, true)?.is_finite();
            let differs = supp.eval(&inst, b)? != supp.eval(&inst, b.with(*element))?;
            Recheck {
                reproduced: finite && differs,
                detail: format!("rank finite: {finite}, supports differ: {differs}"),
            }
        }
        WitnessFile::Suite { suite, seed, .. } => {
            let report = frlab_core::props::run_suite(suite, *seed)?;
            Recheck {
                reproduced: report.failed > 0,
                detail: format!(
                    "suite re-run: {} passed, {} failed",
                    report.passed, report.failed
                ),
            }
        }
    };
    let reproduced = result.reproduced;
    ctx.emit(&result, || {
        if reproduced {
            "witness reproduced".into()
        } else {
            format!("witness did NOT reproduce: {}", result.detail)
        }
    })?;
    Ok(if reproduced {
        Outcome::Ok
    } else {
        Outcome::PropertyFailed
    })
}
