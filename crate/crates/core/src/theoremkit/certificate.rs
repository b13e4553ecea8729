//! Proof certificates: a DAG of computed leaves, cited axioms and rule
//! applications, plus a verifier that replays every rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bundlecat::BundleExpr;
use crate::cohomeng::{CohTable, Entry};
use crate::error::{QdError, Result};

use super::complex::{hyper_vanish, hyper_vanish_above, sum_tables, truncation_triangle, ComplexSpec, ComplexTerm, Sheaf, TriangleVerdict, Verdict};
use super::interval::{kunneth_interval, les_bounds_with, serre_interval, Feasibility, RankHint};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Statement {
    /// Cohomology table of a sheaf, entries possibly intervals.
    Table { object: Sheaf, table: CohTable },
    /// `ℍ^i(object) = 0` for every `i > above`.
    Vanishing { object: String, above: i32 },
    /// `0 -> terms[0] -> terms[1] -> terms[2] -> 0` is exact.
    Exact { terms: [Sheaf; 3] },
    /// A rank in the long exact sequence of `sequence`.
    Rank { sequence: [Sheaf; 3], hint: RankHint },
    /// `complex.name` is represented by the complex.
    Complex { complex: ComplexSpec },
    /// `H^i(lhs) = ℍ^i(rhs)` for every `i`.
    Identity { lhs: String, rhs: String },
    Claim { text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Rule {
    /// Long exact sequence; the conclusion is the table of `terms[target]`.
    Les { target: usize },
    /// Vanishing of the complex, or of its truncation `σ≥cut`.
    Hypercohomology {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cut: Option<i32>,
        #[serde(default)]
        as_table: bool,
    },
    Triangle { cut: i32 },
    Kunneth,
    Serre,
    /// Frobenius pullback, then a twist of the last factor.
    FrobeniusScaling { twist: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leaf,
    Axiom,
    Rule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<Rule>,
    #[serde(default)]
    pub inputs: Vec<String>,
    pub statement: Statement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomRef {
    pub id: String,
    pub paper_ref: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proved,
    Inconclusive,
    Contradicted,
}

/// `H^i(object) = 0` for `i > above`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub object: String,
    pub above: i32,
    pub n: usize,
    pub p: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub node: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: Target,
    pub status: Status,
    pub axioms: Vec<AxiomRef>,
    pub nodes: Vec<Node>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

/// Why a rule could not produce its conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleFailure {
    Contradicted(String),
    Inconclusive(String),
}

fn bad<T>(msg: impl Into<String>) -> std::result::Result<T, RuleFailure> {
    Err(RuleFailure::Contradicted(msg.into()))
}

/// Sheaf after Frobenius pullback, with the last factor twisted.
pub fn frobenius_sheaf(s: &Sheaf, twist: i32, n: usize, p: u32) -> Sheaf {
    let frob = |e: &BundleExpr| BundleExpr::Frob(Box::new(e.clone()));
    let tw = |e: BundleExpr| BundleExpr::Twist(Box::new(e), twist);
    let out = match &s.right {
        None => Sheaf::on(tw(frob(&s.left))),
        Some(r) => Sheaf::boxed(frob(&s.left), tw(frob(r))),
    };
    out.times(s.mult).normalize(n, p)
}

pub fn frobenius_complex_name(name: &str, twist: i32, boxed: bool) -> String {
    match (boxed, twist) {
        (true, 0) => format!("(F×F)^*({name})"),
        (true, t) => format!("(F×F)^*({name}) ⊗ (O ⊠ O({t}))"),
        (false, 0) => format!("Frob({name})"),
        (false, t) => format!("Frob({name})({t})"),
    }
}

fn table_for<'a>(inputs: &[&'a Statement], s: &Sheaf, n: usize, p: u32) -> Option<&'a CohTable> {
    let want = s.normalize(n, p);
    inputs.iter().find_map(|st| match st {
        Statement::Table { object, table } if object.normalize(n, p) == want => Some(table),
        _ => None,
    })
}

fn exact_terms<'a>(inputs: &[&'a Statement]) -> std::result::Result<&'a [Sheaf; 3], RuleFailure> {
    let mut it = inputs.iter().filter_map(|s| match s {
        Statement::Exact { terms } => Some(terms),
        _ => None,
    });
    match (it.next(), it.next()) {
        (Some(t), None) => Ok(t),
        _ => bad("expected exactly one exact sequence among the inputs"),
    }
}

fn complex_input<'a>(inputs: &[&'a Statement]) -> std::result::Result<&'a ComplexSpec, RuleFailure> {
    match inputs.first() {
        Some(Statement::Complex { complex }) => Ok(complex),
        _ => bad("first input must be a complex"),
    }
}

fn term_tables(
    c: &ComplexSpec,
    terms: &[&ComplexTerm],
    inputs: &[&Statement],
    n: usize,
    p: u32,
) -> std::result::Result<Vec<CohTable>, RuleFailure> {
    terms
        .iter()
        .map(|term| {
            let parts = term
                .summands
                .iter()
                .map(|s| {
                    table_for(inputs, s, n, p)
                        .cloned()
                        .ok_or_else(|| RuleFailure::Contradicted(format!("no table for {s} in {}", c.name)))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            sum_tables(&parts).map_err(|e| RuleFailure::Contradicted(e.to_string()))
        })
        .collect()
}

fn axiom_cited(inputs: &[&Statement], ids: &[&str], want: &str) -> bool {
    ids.iter().zip(inputs).any(|(id, s)| *id == want && matches!(s, Statement::Claim { .. }))
}

/// The conclusion of `rule` from the statements of its inputs. The same
/// function builds certificates and replays them.
pub fn apply(
    rule: &Rule,
    inputs: &[&Statement],
    input_ids: &[&str],
    n: usize,
    p: u32,
) -> std::result::Result<Statement, RuleFailure> {
    match rule {
        Rule::Les { target } => {
            let terms = exact_terms(inputs)?;
            if *target > 2 {
                return bad("sequence position out of range");
            }
            let dim = if terms[0].is_boxed() { 2 * n } else { n };
            let get = |k: usize| table_for(inputs, &terms[k], n, p).cloned().unwrap_or_else(|| CohTable::unknown(dim));
            let (a, b, c) = (get(0), get(1), get(2));
            let norm: Vec<Sheaf> = terms.iter().map(|t| t.normalize(n, p)).collect();
            let hints: Vec<RankHint> = inputs
                .iter()
                .filter_map(|s| match s {
                    Statement::Rank { sequence, hint } => Some((sequence, *hint)),
                    _ => None,
                })
                .map(|(seq, h)| {
                    let same = seq.iter().zip(&norm).all(|(x, y)| &x.normalize(n, p) == y);
                    if same {
                        Ok(h)
                    } else {
                        bad("rank of a map in another sequence")
                    }
                })
                .collect::<std::result::Result<_, _>>()?;
            let out = les_bounds_with(&a, &b, &c, &hints).map_err(|e| RuleFailure::Contradicted(e.to_string()))?;
            if let Feasibility::Contradicted(msg) = out.status {
                return bad(msg);
            }
            let table = [out.a, out.b, out.c].into_iter().nth(*target).expect("position checked");
            Ok(Statement::Table {
                object: norm[*target].clone(),
                table,
            })
        }
        Rule::Hypercohomology { cut, as_table } => {
            let full = complex_input(inputs)?;
            let c = match cut {
                Some(k) => full.truncate(*k).map_err(|e| RuleFailure::Contradicted(e.to_string()))?,
                None => full.clone(),
            };
            let terms: Vec<&ComplexTerm> = c.terms.iter().collect();
            let tables = term_tables(&c, &terms, inputs, n, p)?;
            if *as_table {
                let object = Sheaf::parse(&c.name)
                    .map_err(|e| RuleFailure::Contradicted(format!("{} is not a sheaf: {e}", c.name)))?
                    .normalize(n, p);
                let dim = tables[0].n;
                let mut table = CohTable::unknown(dim);
                for i in 0..=dim {
                    let v = hyper_vanish(&c, &tables, i as i32).map_err(|e| RuleFailure::Contradicted(e.to_string()))?;
                    if v == Verdict::Vanishes {
                        table.h[i] = Entry::Exact(0);
                    }
                }
                Ok(Statement::Table { object, table })
            } else {
                match hyper_vanish_above(&c, &tables, 0).map_err(|e| RuleFailure::Contradicted(e.to_string()))? {
                    Verdict::Vanishes => Ok(Statement::Vanishing {
                        object: c.name.clone(),
                        above: 0,
                    }),
                    Verdict::Unknown => Err(RuleFailure::Inconclusive(format!(
                        "some term of {} may contribute above degree 0",
                        c.name
                    ))),
                }
            }
        }
        Rule::Triangle { cut } => {
            let full = complex_input(inputs)?;
            let below = full.below(*cut);
            let left = if below.is_empty() {
                CohTable::zero(2 * n)
            } else {
                term_tables(full, &below, inputs, n, p)?.remove(0)
            };
            let name = full.truncated_name(*cut);
            let truncated = inputs
                .iter()
                .any(|s| matches!(s, Statement::Vanishing { object, above } if *object == name && *above <= 0));
            let verdict = if truncated { Verdict::Vanishes } else { Verdict::Unknown };
            match truncation_triangle(full, *cut, &left, &verdict) {
                TriangleVerdict::Vanishes => Ok(Statement::Vanishing {
                    object: full.name.clone(),
                    above: 0,
                }),
                TriangleVerdict::Inconclusive(m) => Err(RuleFailure::Inconclusive(m)),
                TriangleVerdict::Contradicted(m) => bad(m),
            }
        }
        Rule::Kunneth => {
            if !axiom_cited(inputs, input_ids, "kunneth") {
                return bad("Künneth axiom not cited");
            }
            let tabs: Vec<(&Sheaf, &CohTable)> = inputs
                .iter()
                .filter_map(|s| match s {
                    Statement::Table { object, table } => Some((object, table)),
                    _ => None,
                })
                .collect();
            let [(x, tx), (y, ty)] = tabs[..] else {
                return bad("Künneth takes two tables");
            };
            if x.is_boxed() || y.is_boxed() || tx.n != n || ty.n != n {
                return bad("Künneth factors must live on Q");
            }
            Ok(Statement::Table {
                object: Sheaf::boxed(x.left.clone(), y.left.clone())
                    .times(x.mult * y.mult)
                    .normalize(n, p),
                table: kunneth_interval(tx, ty),
            })
        }
        Rule::Serre => {
            if !axiom_cited(inputs, input_ids, "serre") {
                return bad("Serre duality axiom not cited");
            }
            let Some((x, t)) = inputs.iter().find_map(|s| match s {
                Statement::Table { object, table } => Some((object, table)),
                _ => None,
            }) else {
                return bad("Serre duality takes a table");
            };
            if x.is_boxed() || t.n != n {
                return bad("Serre duality is applied on Q");
            }
            let Some(dual) = x.left.dual(n, p) else {
                return bad(format!("no dual known for {}", x.left));
            };
            let object = Sheaf::on(BundleExpr::Twist(Box::new(dual), -(n as i32)))
                .times(x.mult)
                .normalize(n, p);
            Ok(Statement::Table {
                object,
                table: serre_interval(t),
            })
        }
        Rule::FrobeniusScaling { twist } => match inputs {
            [Statement::Exact { terms }] => Ok(Statement::Exact {
                terms: terms.clone().map(|s| frobenius_sheaf(&s, *twist, n, p)),
            }),
            [Statement::Complex { complex }] => {
                let boxed = complex.terms[0].summands[0].is_boxed();
                let terms = complex
                    .terms
                    .iter()
                    .map(|t| ComplexTerm {
                        degree: t.degree,
                        summands: t.summands.iter().map(|s| frobenius_sheaf(s, *twist, n, p)).collect(),
                    })
                    .collect();
                let c = ComplexSpec::new(
                    frobenius_complex_name(&complex.name, *twist, boxed),
                    terms,
                    complex.note.clone(),
                )
                .map_err(|e| RuleFailure::Contradicted(e.to_string()))?;
                Ok(Statement::Complex { complex: c })
            }
            _ => bad("Frobenius scaling takes one exact sequence or complex"),
        },
    }
}

/// Whether the nodes entail the target: a vanishing for the target object,
/// directly or through an identity axiom.
pub fn concludes(cert: &Certificate) -> bool {
    let t = &cert.target;
    let vanish = |obj: &str| {
        cert.nodes
            .iter()
            .any(|nd| matches!(&nd.statement, Statement::Vanishing { object, above } if object == obj && *above <= t.above))
    };
    vanish(&t.object)
        || cert.nodes.iter().any(|nd| match &nd.statement {
            Statement::Identity { lhs, rhs } => nd.kind == NodeKind::Axiom && *lhs == t.object && vanish(rhs),
            _ => false,
        })
}

/// Re-checks structure and every rule node; returns the number of rule
/// nodes replayed.
pub fn replay(cert: &Certificate) -> Result<usize> {
    let fail = |id: &str, msg: String| QdError::Unsupported(format!("replay failed at {id}: {msg}"));
    let (n, p) = (cert.target.n, cert.target.p);
    let mut seen: HashMap<&str, &Statement> = HashMap::new();
    let mut rules = 0;
    for node in &cert.nodes {
        if seen.contains_key(node.id.as_str()) {
            return Err(fail(&node.id, "duplicate id".into()));
        }
        match node.kind {
            NodeKind::Leaf | NodeKind::Axiom => {
                if node.rule.is_some() || !node.inputs.is_empty() {
                    return Err(fail(&node.id, "leaves and axioms take no inputs".into()));
                }
                if node.kind == NodeKind::Axiom && !cert.axioms.iter().any(|a| a.id == node.id) {
                    return Err(fail(&node.id, "axiom missing from the axiom list".into()));
                }
            }
            NodeKind::Rule => {
                let rule = node.rule.as_ref().ok_or_else(|| fail(&node.id, "rule node without rule".into()))?;
                // inputs must come earlier, which also rules out cycles
                let inputs = node
                    .inputs
                    .iter()
                    .map(|i| seen.get(i.as_str()).copied().ok_or_else(|| fail(&node.id, format!("unknown input {i}"))))
                    .collect::<Result<Vec<_>>>()?;
                let ids: Vec<&str> = node.inputs.iter().map(String::as_str).collect();
                match apply(rule, &inputs, &ids, n, p) {
                    Ok(s) if s == node.statement => rules += 1,
                    Ok(s) => {
                        return Err(fail(
                            &node.id,
                            format!("statement differs from the rule's conclusion {}", serde_json::to_string(&s)?),
                        ))
                    }
                    Err(RuleFailure::Contradicted(m)) | Err(RuleFailure::Inconclusive(m)) => return Err(fail(&node.id, m)),
                }
            }
        }
        seen.insert(&node.id, &node.statement);
    }
    for a in &cert.axioms {
        let cited = cert.nodes.iter().any(|nd| nd.id == a.id && nd.kind == NodeKind::Axiom);
        if !cited {
            return Err(fail(&a.id, "listed axiom has no node".into()));
        }
    }
    let concluded = concludes(cert);
    let consistent = match cert.status {
        Status::Proved => concluded && cert.failure.is_none(),
        Status::Inconclusive | Status::Contradicted => !concluded || cert.failure.is_some(),
    };
    if !consistent {
        return Err(fail("status", format!("{:?} does not match the nodes", cert.status)));
    }
    Ok(rules)
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }
}
