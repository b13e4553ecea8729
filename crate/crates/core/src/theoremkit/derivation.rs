//! The vanishing argument for `H^i(Q_n, D_1)`, assembled as a certificate.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::bundlecat::{carter_lusztig_ses_for, psi_module, tautological_ses_for, BundleExpr, ModuleMap};
use crate::cohomeng::{line_bundle_table, low_local_cohomology, sheaf_cohomology_with, CohTable, EngineConfig};
use crate::error::{QdError, Result};
use crate::grmod::GradedMap;
use crate::polyring::{binomial, Polynomial};

use super::certificate::{
    apply, frobenius_complex_name, AxiomRef, Certificate, Failure, Node, NodeKind, Rule, RuleFailure, Statement,
    Status, Target,
};
use super::complex::{scale_table, ComplexSpec, ComplexTerm, Sheaf};
use super::interval::{LesMap, RankHint};

pub const TARGET: &str = "D_1";

fn anchors() -> &'static BTreeMap<String, String> {
    static A: OnceLock<BTreeMap<String, String>> = OnceLock::new();
    A.get_or_init(|| serde_json::from_str(include_str!("../../data/anchors.json")).expect("anchor table"))
}

/// Stops assembly; the reason is already recorded.
struct Halt;

type Step<T = String> = std::result::Result<T, Halt>;

struct Builder {
    target: Target,
    nodes: Vec<Node>,
    axioms: Vec<AxiomRef>,
    failure: Option<(Failure, Status)>,
}

impl Builder {
    fn new(n: usize, p: u32) -> Self {
        Builder {
            target: Target {
                object: TARGET.into(),
                above: 0,
                n,
                p,
            },
            nodes: Vec::new(),
            axioms: Vec::new(),
            failure: None,
        }
    }

    fn has(&self, id: &str) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    fn push(&mut self, id: &str, kind: NodeKind, rule: Option<Rule>, inputs: &[&str], st: Statement, note: Option<String>) -> String {
        self.nodes.push(Node {
            id: id.into(),
            kind,
            rule,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            statement: st,
            note,
        });
        id.into()
    }

    fn stop<T>(&mut self, node: &str, reason: String, status: Status) -> Step<T> {
        self.failure = Some((
            Failure {
                node: node.into(),
                reason,
            },
            status,
        ));
        Err(Halt)
    }

    fn axiom(&mut self, id: &str, st: Statement) -> String {
        if !self.has(id) {
            let paper_ref = anchors().get(id).cloned().unwrap_or_default();
            self.axioms.push(AxiomRef {
                id: id.into(),
                paper_ref,
            });
            self.push(id, NodeKind::Axiom, None, &[], st, None);
        }
        id.into()
    }

    /// A computed fact; a failed computation leaves the target open.
    fn leaf(&mut self, id: &str, computed: Result<Statement>, note: String) -> Step {
        if self.has(id) {
            return Ok(id.into());
        }
        match computed {
            Ok(st) => Ok(self.push(id, NodeKind::Leaf, None, &[], st, Some(note))),
            Err(e) => self.stop(id, e.to_string(), Status::Inconclusive),
        }
    }

    fn rule(&mut self, id: &str, rule: Rule, inputs: &[&str]) -> Step {
        if self.has(id) {
            return Ok(id.into());
        }
        let sts: Vec<&Statement> = inputs
            .iter()
            .map(|i| &self.nodes.iter().find(|n| n.id == *i).expect("input built").statement)
            .collect();
        match apply(&rule, &sts, inputs, self.target.n, self.target.p) {
            Ok(st) => Ok(self.push(id, NodeKind::Rule, Some(rule), inputs, st, None)),
            Err(RuleFailure::Contradicted(m)) => self.stop(id, m, Status::Contradicted),
            Err(RuleFailure::Inconclusive(m)) => self.stop(id, m, Status::Inconclusive),
        }
    }

    fn statement(&self, id: &str) -> &Statement {
        &self.nodes.iter().find(|n| n.id == id).expect("node").statement
    }

    fn finish(self) -> Certificate {
        let mut cert = Certificate {
            target: self.target,
            status: Status::Inconclusive,
            axioms: self.axioms,
            nodes: self.nodes,
            failure: None,
        };
        match self.failure {
            Some((f, s)) => {
                cert.status = s;
                cert.failure = Some(f);
            }
            None if super::certificate::concludes(&cert) => cert.status = Status::Proved,
            None => {}
        }
        cert
    }
}

fn line(d: i32) -> BundleExpr {
    BundleExpr::Line(d)
}

fn tw(e: BundleExpr, d: i32) -> BundleExpr {
    BundleExpr::Twist(Box::new(e), d)
}

fn frob(e: BundleExpr) -> BundleExpr {
    BundleExpr::Frob(Box::new(e))
}

fn table_id(s: &Sheaf) -> String {
    format!("h[{s}]")
}

/// Engine table of a sheaf on `Q_n`; closed form for line bundles.
fn sheaf_table(s: &Sheaf, n: usize, p: u32, cfg: &EngineConfig) -> Result<CohTable> {
    let base = match s.left.normalize(n, p) {
        BundleExpr::Line(d) => line_bundle_table(n, d),
        e => sheaf_cohomology_with(&e.realize(n, p)?, 0, cfg)?,
    };
    Ok(scale_table(&base, s.mult))
}

/// One spinor bundle `Q` with kernel `K`: `0 -> K -> O^s -> Q -> 0`.
struct Family {
    minus: bool,
    k: BundleExpr,
    q: BundleExpr,
    rank: u64,
}

fn families(n: usize, p: u32) -> Result<Vec<Family>> {
    let fam = |minus: bool| -> Result<Family> {
        let ses = tautological_ses_for(n, p, minus)?;
        let (k, q) = if minus {
            (tw(BundleExpr::SpinorPlus, -1), BundleExpr::SpinorMinus)
        } else {
            (tw(BundleExpr::SpinorMinus, -1), BundleExpr::SpinorPlus)
        };
        Ok(Family {
            minus,
            k: k.normalize(n, p),
            q: q.normalize(n, p),
            rank: ses.middle().generators().len() as u64,
        })
    };
    match n {
        3 => Ok(vec![fam(false)?]),
        4 => Ok(vec![fam(false)?, fam(true)?]),
        _ => Err(QdError::DimensionOutOfRange(n)),
    }
}

/// Rank of `H^0(O^s) -> H^0(F^*Q)`. The map factors through the degree-0
/// piece of `F^*Q`, which injects into `H^0` once `H^0_m(F^*Q)_0 = 0`.
fn frobenius_h0_rank(n: usize, p: u32, minus: bool, cfg: &EngineConfig) -> Result<u64> {
    let ses = tautological_ses_for(n, p, minus)?;
    let target = ses.right().frobenius_pullback();
    let defect = low_local_cohomology(&target, 0, cfg)?;
    if defect[0] != 0 {
        return Err(QdError::Unsupported(format!(
            "degree-0 piece has {} torsion sections",
            defect[0]
        )));
    }
    let source = ses.middle().frobenius_pullback();
    let mut map = GradedMap::new(target.generators().to_vec());
    for (i, g) in source.generators().iter().enumerate() {
        map.push_column(*g, vec![(i, Polynomial::constant(1, p))]);
    }
    Ok(ModuleMap::new(source, target, map)?.piece(0)?.rank as u64)
}

fn diagonal_resolution(n: usize) -> Result<ComplexSpec> {
    let mut terms = vec![];
    let spinors: Vec<BundleExpr> = if n == 4 {
        vec![tw(BundleExpr::SpinorMinus, -1), BundleExpr::U]
    } else {
        vec![BundleExpr::U]
    };
    terms.push(ComplexTerm {
        degree: -(n as i32),
        summands: spinors
            .into_iter()
            .map(|k| Sheaf::boxed(k.clone(), tw(k, 1 - n as i32)))
            .collect(),
    });
    for i in (1..n).rev() {
        terms.push(ComplexTerm {
            degree: -(i as i32),
            summands: vec![Sheaf::boxed(BundleExpr::Psi(i), line(-(i as i32)))],
        });
    }
    terms.push(ComplexTerm {
        degree: 0,
        summands: vec![Sheaf::boxed(line(0), line(0))],
    });
    ComplexSpec::new("i_*O_Δ", terms, "resolution of the diagonal of Q × Q")
}

/// `Ψ_i` as the complex `B_i ⊗ O -> ... -> B_0 ⊗ O(i)` in degrees `0..=i`.
fn psi_complex(n: usize, i: usize) -> Result<ComplexSpec> {
    let nvars = (n + 2) as i64;
    let terms = (0..=i)
        .map(|j| ComplexTerm {
            degree: j as i32,
            summands: vec![Sheaf::on(line(j as i32)).times(binomial(nvars, (i - j) as i64) as u64)],
        })
        .collect();
    ComplexSpec::new(format!("{}", BundleExpr::Psi(i)), terms, "Koszul resolution")
}

/// The certificate for `H^i(Q_n, D_1) = 0`, `i > 0`. For `n <= 2` it cites
/// the low-dimensional case and records the oracle table as a leaf.
pub fn paper_certificate(n: usize, p: u32) -> Result<Certificate> {
    paper_certificate_with(n, p, &EngineConfig::from_env())
}

pub fn paper_certificate_with(n: usize, p: u32, cfg: &EngineConfig) -> Result<Certificate> {
    crate::polyring::RingSpec::quadric(n, p)?;
    let mut b = Builder::new(n, p);
    let _ = match n {
        1 | 2 => delegated(&mut b, cfg),
        _ => derive(&mut b, cfg),
    };
    Ok(b.finish())
}

fn delegated(b: &mut Builder, cfg: &EngineConfig) -> Step<()> {
    let (n, p) = (b.target.n, b.target.p);
    b.axiom(
        "low-dimension",
        Statement::Claim {
            text: format!("D_1 has no higher cohomology on Q_{n}"),
        },
    );
    let oracle = super::oracle_ext_table_with(n, p, cfg);
    let table = match oracle {
        Ok(t) => t,
        Err(e) => return b.stop("oracle", e.to_string(), Status::Inconclusive),
    };
    if !table.higher_vanish() {
        return b.stop("oracle", format!("oracle table {} has higher cohomology", table.to_json()), Status::Contradicted);
    }
    b.leaf(
        "oracle",
        Ok(Statement::Vanishing {
            object: TARGET.into(),
            above: 0,
        }),
        format!("oracle table {}", table.to_json()),
    )?;
    Ok(())
}

fn derive(b: &mut Builder, cfg: &EngineConfig) -> Step<()> {
    let (n, p) = (b.target.n, b.target.p);
    let ni = n as i32;
    let pi = p as i32;
    let fams = match families(n, p) {
        Ok(f) => f,
        Err(e) => return b.stop("families", e.to_string(), Status::Inconclusive),
    };

    // tables needed as leaves, computed in parallel up front
    let mut wanted: Vec<Sheaf> = Vec::new();
    for f in &fams {
        let sym = |k: usize| BundleExpr::Sym(k, Box::new(f.q.clone()));
        wanted.push(Sheaf::on(sym(p as usize)).normalize(n, p));
        wanted.push(Sheaf::on(tw(sym(p as usize - 2), 1)).normalize(n, p));
        wanted.push(Sheaf::on(frob(f.q.clone())).normalize(n, p));
        wanted.push(Sheaf::on(frob(f.k.clone())).normalize(n, p));
        wanted.push(Sheaf::on(line(0)).times(f.rank));
    }
    let mut seen = HashSet::new();
    wanted.retain(|s| seen.insert(s.clone()));
    let computed: Vec<Result<CohTable>> = wanted.par_iter().map(|s| sheaf_table(s, n, p, cfg)).collect();
    for (s, t) in wanted.iter().zip(computed) {
        let note = match &t {
            Ok(t) => match t.bound_used {
                Some(bd) => format!("engine, internal bound {bd}"),
                None => "closed form".into(),
            },
            Err(_) => String::new(),
        };
        b.leaf(
            &table_id(s),
            t.map(|table| Statement::Table {
                object: s.clone(),
                table,
            }),
            note,
        )?;
    }

    let kunneth = b.axiom(
        "kunneth",
        Statement::Claim {
            text: "H^k(A ⊠ B) = ⊕_{i+j=k} H^i(A) ⊗ H^j(B)".into(),
        },
    );
    let serre = b.axiom(
        "serre",
        Statement::Claim {
            text: format!("h^i(E) = h^{{{n}-i}}(E^∨(-{n}))"),
        },
    );

    // the spinor part: F^*K is concentrated in degree 2
    let mut left_tables = vec![];
    for f in &fams {
        let tag = if f.minus { "-" } else { "+" };
        let sym_p = Sheaf::on(BundleExpr::Sym(p as usize, Box::new(f.q.clone()))).normalize(n, p);
        let sym_p2 = Sheaf::on(tw(BundleExpr::Sym(p as usize - 2, Box::new(f.q.clone())), 1)).normalize(n, p);
        let fq = Sheaf::on(frob(f.q.clone())).normalize(n, p);
        let fk = Sheaf::on(frob(f.k.clone())).normalize(n, p);
        let free = Sheaf::on(line(0)).times(f.rank);

        let cl = b.leaf(
            &format!("ses:frobenius{tag}"),
            carter_lusztig_ses_for(n, p, f.minus)
                .and_then(|s| {
                    s.verify()?;
                    // the quotient is presented as Sym^p Q mod pure powers
                    let got = sheaf_cohomology_with(s.right(), 0, cfg)?;
                    let want = sheaf_table(&sym_p2, n, p, cfg)?;
                    if got.h == want.h {
                        Ok(())
                    } else {
                        Err(QdError::NotExact(format!("quotient table {} differs from {sym_p2}", got.to_json())))
                    }
                })
                .map(|_| Statement::Exact {
                    terms: [fq.clone(), sym_p.clone(), sym_p2.clone()],
                }),
            "exact on every graded piece up to the validity bound; quotient has the table of the last term".into(),
        )?;
        let les_q = b.rule(
            &format!("les:{fq}"),
            Rule::Les { target: 0 },
            &[&cl, &table_id(&fq), &table_id(&sym_p), &table_id(&sym_p2)],
        )?;
        let taut = b.leaf(
            &format!("ses:tautological{tag}"),
            tautological_ses_for(n, p, f.minus)
                .and_then(|s| s.verify())
                .map(|_| Statement::Exact {
                    terms: [Sheaf::on(f.k.clone()), free.clone(), Sheaf::on(f.q.clone())],
                }),
            "exact on every graded piece up to the validity bound".into(),
        )?;
        let ftaut = b.rule(&format!("frob:tautological{tag}"), Rule::FrobeniusScaling { twist: 0 }, &[&taut])?;
        let Statement::Exact { terms } = b.statement(&ftaut).clone() else {
            unreachable!("Frobenius of an exact sequence")
        };
        let rank = b.leaf(
            &format!("rank:H0{tag}"),
            frobenius_h0_rank(n, p, f.minus, cfg).map(|rank| Statement::Rank {
                sequence: terms,
                hint: RankHint {
                    map: LesMap::BC,
                    degree: 0,
                    rank,
                },
            }),
            "rank of the induced map on global sections".into(),
        )?;
        let les_k = b.rule(
            &format!("les:{fk}"),
            Rule::Les { target: 0 },
            &[&ftaut, &table_id(&fk), &table_id(&free), &les_q, &rank],
        )?;
        let dual = b.rule(&format!("serre:{fk}"), Rule::Serre, &[&serre, &les_k])?;
        let left = b.rule(&format!("kunneth:{fk}"), Rule::Kunneth, &[&kunneth, &les_k, &dual])?;
        left_tables.push(left);
    }

    // Ψ_i part: H^k(F^*Ψ_i) = 0 for k > i
    let mut trunc_tables = vec![];
    for i in 1..n {
        let res = b.leaf(
            &format!("resolution:Psi({i})"),
            psi_module(n, i, p)
                .and_then(|d| d.verify())
                .and_then(|_| psi_complex(n, i))
                .map(|complex| Statement::Complex { complex }),
            "exact on every graded piece up to the validity bound".into(),
        )?;
        let fres = b.rule(&format!("frob:Psi({i})"), Rule::FrobeniusScaling { twist: 0 }, &[&res])?;
        let Statement::Complex { complex } = b.statement(&fres).clone() else {
            unreachable!("Frobenius of a complex")
        };
        let mut inputs = vec![fres.clone()];
        for s in complex.summands() {
            let id = table_id(s);
            b.leaf(&id, Ok(Statement::Table { object: s.clone(), table: scale_table(&line_bundle_table(n, line_degree(s)), s.mult) }), "closed form".into())?;
            inputs.push(id);
        }
        let refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
        let fpsi = b.rule(
            &format!("hyper:Frob(Psi({i}))"),
            Rule::Hypercohomology {
                cut: None,
                as_table: true,
            },
            &refs,
        )?;
        let m = (ni - i as i32) * pi - ni;
        let lb = line_leaf(b, n, m)?;
        trunc_tables.push(b.rule(&format!("kunneth:Frob(Psi({i}))"), Rule::Kunneth, &[&kunneth, &fpsi, &lb])?);
    }
    let o0 = line_leaf(b, n, 0)?;
    let otop = line_leaf(b, n, ni * (pi - 1))?;
    trunc_tables.push(b.rule("kunneth:O", Rule::Kunneth, &[&kunneth, &o0, &otop])?);

    // the diagonal, pulled back and twisted
    let diag_id = if n == 4 { "diagonal-resolution-q4" } else { "diagonal-resolution" };
    let diag = match diagonal_resolution(n) {
        Ok(c) => b.axiom(diag_id, Statement::Complex { complex: c }),
        Err(e) => return b.stop(diag_id, e.to_string(), Status::Contradicted),
    };
    let twist = ni * (pi - 1);
    b.axiom(
        "reduction",
        Statement::Identity {
            lhs: TARGET.into(),
            rhs: frobenius_complex_name("i_*O_Δ", twist, true),
        },
    );
    let full = b.rule("frob:diagonal", Rule::FrobeniusScaling { twist }, &[&diag])?;
    let cut = 1 - ni;
    let mut inputs = vec![full.clone()];
    inputs.extend(trunc_tables);
    let refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
    let trunc = b.rule(
        "hyper:truncated",
        Rule::Hypercohomology {
            cut: Some(cut),
            as_table: false,
        },
        &refs,
    )?;
    let mut inputs = vec![full.clone()];
    inputs.extend(left_tables);
    inputs.push(trunc);
    let refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
    b.rule("triangle", Rule::Triangle { cut }, &refs)?;
    Ok(())
}

fn line_degree(s: &Sheaf) -> i32 {
    match s.left {
        BundleExpr::Line(d) => d,
        _ => unreachable!("line bundle term"),
    }
}

fn line_leaf(b: &mut Builder, n: usize, d: i32) -> Step {
    let s = Sheaf::on(line(d));
    b.leaf(
        &table_id(&s),
        Ok(Statement::Table {
            object: s.clone(),
            table: line_bundle_table(n, d),
        }),
        "closed form".into(),
    )
}
