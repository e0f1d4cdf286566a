//! Metrized curve complexes with boundary, tropical reduction data, and the
//! validator for their compatibility conditions.
//!
//! A complex is a metric graph whose finite vertices carry reduction curves;
//! every bounded edge appears with both orientations, legs are oriented
//! towards their infinite vertex. A tropical reduction datum decorates the
//! type-2 vertices with leveled reduction forms and every oriented edge with
//! a residue scalar. [`validate`] checks, per location:
//!
//! * `cond1` — log-order at each branch point equals minus the level slope;
//! * `cond2` — the graded reduction of each edge residue matches the
//!   reduction form's residue at the branch point;
//! * `cond3` — residues around a non-boundary vertex sum to zero;
//! * `cond4` — residues vanish on negative-slope legs;
//! * `alternating` — opposite orientations carry opposite residues;
//! * `degree` — log-orders around a non-boundary vertex sum to
//!   `2g - 2 + |Star|`;
//! plus structural sanity and exact residue-theorem checks for explicit
//! forms.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{P1Point, Poly, RatDifferential};
use crate::puiseux::{GradedScalar, PuiseuxScalar, Valuation};
use crate::rational::{Rational, Val};
use crate::report::{Status, ValidationReport};

pub type VertexId = String;
pub type EdgeId = String;

/// A point of the reduction projective line over the rationals.
pub type QPoint = P1Point<Rational>;

impl Serialize for QPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            P1Point::Finite(q) => q.serialize(s),
            P1Point::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for QPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim() == "inf" {
            Ok(P1Point::Infinity)
        } else {
            Ok(P1Point::Finite(
                s.parse().map_err(serde::de::Error::custom)?,
            ))
        }
    }
}

fn qpoint_key(p: &QPoint) -> String {
    match p {
        P1Point::Finite(q) => q.to_string(),
        P1Point::Infinity => "inf".to_string(),
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum VertexKind {
    /// A point at infinity; exactly one leg ends here.
    Type1,
    /// A finite vertex carrying a reduction curve.
    Type2 { genus: i64, boundary: bool },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn is_type2(&self) -> bool {
        matches!(self.kind, VertexKind::Type2 { .. })
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.kind, VertexKind::Type2 { boundary: true, .. })
    }

    pub fn genus(&self) -> i64 {
        match self.kind {
            VertexKind::Type2 { genus, .. } => genus,
            VertexKind::Type1 => 0,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OrientedEdge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    /// Finite for bounded edges, infinite for legs.
    pub length: Val,
    /// The same edge with the opposite orientation; `None` for legs.
    pub opposite: Option<EdgeId>,
}

impl OrientedEdge {
    pub fn is_leg(&self) -> bool {
        self.opposite.is_none()
    }
}

/// The metric graph part of a metrized curve complex: vertices, oriented
/// edges and legs.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct CurveComplex {
    pub vertices: BTreeMap<VertexId, Vertex>,
    pub edges: BTreeMap<EdgeId, OrientedEdge>,
}

impl CurveComplex {
    /// Oriented edges with the given tail, in id order.
    pub fn star(&self, x: &str) -> Vec<&OrientedEdge> {
        self.edges.values().filter(|e| e.tail == x).collect()
    }

    pub fn type2_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values().filter(|v| v.is_type2())
    }

    pub fn legs(&self) -> impl Iterator<Item = &OrientedEdge> {
        self.edges.values().filter(|e| e.is_leg())
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = &OrientedEdge> {
        self.edges.values().filter(|e| !e.is_leg())
    }

    /// Bounded edges with one canonical orientation per underlying edge
    /// (the lexicographically smaller id).
    pub fn bounded_edges_canonical(&self) -> Vec<&OrientedEdge> {
        self.bounded_edges()
            .filter(|e| match &e.opposite {
                Some(op) => e.id < *op || e.id == *op,
                None => true,
            })
            .collect()
    }

    pub fn opposite(&self, e: &OrientedEdge) -> Option<&OrientedEdge> {
        e.opposite.as_ref().and_then(|id| self.edges.get(id))
    }

    /// Structural sanity of the graph itself.
    pub fn structural_report(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        for e in self.edges.values() {
            let loc = &e.id;
            if !self.vertices.contains_key(&e.tail) || !self.vertices.contains_key(&e.head) {
                rep.fail(
                    "structure/references",
                    loc,
                    vec![("tail".into(), e.tail.clone()), ("head".into(), e.head.clone())],
                );
                continue;
            }
            let head = &self.vertices[&e.head];
            let tail = &self.vertices[&e.tail];
            match &e.opposite {
                None => {
                    // legs point at a type-1 vertex and have infinite length
                    let ok = !head.is_type2() && tail.is_type2() && e.length.is_infinite();
                    rep.push(
                        "structure/leg",
                        loc,
                        if ok { Status::Pass } else { Status::Fail },
                        vec![
                            ("head_type1".into(), (!head.is_type2()).to_string()),
                            ("length".into(), e.length.to_string()),
                        ],
                    );
                }
                Some(op_id) => {
                    let ok = match self.edges.get(op_id) {
                        Some(op) => {
                            op.opposite.as_deref() == Some(e.id.as_str())
                                && op.tail == e.head
                                && op.head == e.tail
                                && op.length == e.length
                                && !e.length.is_infinite()
                                && tail.is_type2()
                                && head.is_type2()
                        }
                        None => false,
                    };
                    rep.push(
                        "structure/opposite",
                        loc,
                        if ok { Status::Pass } else { Status::Fail },
                        vec![("opposite".into(), op_id.clone())],
                    );
                }
            }
        }
        for v in self.vertices.values() {
            if v.is_type2() {
                continue;
            }
            let in_deg = self.edges.values().filter(|e| e.head == v.id).count();
            let out_deg = self.edges.values().filter(|e| e.tail == v.id).count();
            rep.push(
                "structure/type1-valence",
                &v.id,
                if in_deg == 1 && out_deg == 0 {
                    Status::Pass
                } else {
                    Status::Fail
                },
                vec![
                    ("incoming".into(), in_deg.to_string()),
                    ("outgoing".into(), out_deg.to_string()),
                ],
            );
        }
        // connectivity
        if !self.vertices.is_empty() {
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            let start = self.vertices.keys().next().unwrap();
            let mut queue: VecDeque<&str> = VecDeque::new();
            queue.push_back(start);
            seen.insert(start);
            while let Some(v) = queue.pop_front() {
                for e in self.edges.values() {
                    for (a, b) in [(&e.tail, &e.head), (&e.head, &e.tail)] {
                        if a == v && seen.insert(b) {
                            queue.push_back(b);
                        }
                    }
                }
            }
            rep.push(
                "structure/connected",
                "graph",
                if seen.len() == self.vertices.len() {
                    Status::Pass
                } else {
                    Status::Fail
                },
                vec![
                    ("reached".into(), seen.len().to_string()),
                    ("vertices".into(), self.vertices.len().to_string()),
                ],
            );
        }
        rep
    }
}

/// Reduction data given abstractly: log-orders and residues at the branch
/// points (the only mode available for positive genus).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct AbstractForm {
    pub log_order: BTreeMap<EdgeId, i64>,
    pub residue: BTreeMap<EdgeId, Rational>,
}

/// An explicit rational differential `(num/den) dz` over the rationals with
/// its branch points. `aux` lists the extra points supporting the divisor at
/// a boundary vertex (the compactification points of a non-proper curve).
#[derive(Clone, PartialEq, Debug)]
pub struct ExplicitP1Form {
    pub num: Poly<Rational>,
    pub den: Poly<Rational>,
    pub marked: BTreeMap<EdgeId, QPoint>,
    pub aux: Vec<QPoint>,
}

fn q_inv(c: &Rational) -> Result<Rational> {
    c.recip()
}

impl ExplicitP1Form {
    pub fn differential(&self) -> Result<RatDifferential<Rational>> {
        RatDifferential::new(self.num.clone(), self.den.clone())
    }

    pub fn log_order_at(&self, p: &QPoint) -> Result<i64> {
        self.differential()?.log_order_at(p)
    }

    pub fn residue_at(&self, p: &QPoint) -> Result<Rational> {
        self.differential()?.residue_at(p, &q_inv)
    }

    pub fn log_order_at_edge(&self, e: &str) -> Result<i64> {
        let p = self
            .marked
            .get(e)
            .ok_or_else(|| Error::Structural(format!("no marked point for edge {e}")))?;
        self.log_order_at(p)
    }

    pub fn residue_at_edge(&self, e: &str) -> Result<Rational> {
        let p = self
            .marked
            .get(e)
            .ok_or_else(|| Error::Structural(format!("no marked point for edge {e}")))?;
        self.residue_at(p)
    }

    pub fn all_points(&self) -> Vec<QPoint> {
        let mut pts: Vec<QPoint> = self.marked.values().cloned().collect();
        pts.extend(self.aux.iter().cloned());
        pts
    }

    /// Zeros and poles must be supported on the marked and auxiliary
    /// points: after dividing out their linear factors, both numerator and
    /// denominator must be constants (infinity is accounted by degrees).
    pub fn support_ok(&self) -> Result<bool> {
        if self.num.is_zero() {
            return Err(Error::ZeroForm);
        }
        let finite: Vec<Rational> = self
            .all_points()
            .into_iter()
            .filter_map(|p| match p {
                P1Point::Finite(q) => Some(q),
                P1Point::Infinity => None,
            })
            .collect();
        let (_, num_cof) = crate::poly::factor_over_points(&self.num, &finite);
        let (_, den_cof) = crate::poly::factor_over_points(&self.den, &finite);
        Ok(num_cof.degree() == Some(0) && den_cof.degree() == Some(0))
    }

    /// Equality as rational differentials (cross multiplication), with the
    /// same branch data.
    pub fn same_differential(&self, other: &Self) -> bool {
        let cross = self.num.mul(&other.den).sub(&other.num.mul(&self.den));
        let mut aux_a: Vec<String> = self.aux.iter().map(qpoint_key).collect();
        let mut aux_b: Vec<String> = other.aux.iter().map(qpoint_key).collect();
        aux_a.sort();
        aux_b.sort();
        cross.is_zero() && self.marked == other.marked && aux_a == aux_b
    }

    /// Sum of the residues over all poles (including infinity), which must
    /// vanish. Fails with `NonSplitDenominator` when poles sit outside the
    /// declared points.
    pub fn residue_theorem(&self) -> Result<bool> {
        let finite: Vec<Rational> = self
            .all_points()
            .into_iter()
            .filter_map(|p| match p {
                P1Point::Finite(q) => Some(q),
                P1Point::Infinity => None,
            })
            .collect();
        let (_, den_cof) = crate::poly::factor_over_points(&self.den, &finite);
        if den_cof.degree() != Some(0) {
            return Err(Error::NonSplitDenominator(format!(
                "cofactor of degree {:?}",
                den_cof.degree()
            )));
        }
        let mut total = Rational::zero();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for q in &finite {
            if seen.insert(q.to_string()) {
                total += self.residue_at(&P1Point::Finite(q.clone()))?;
            }
        }
        total += self.residue_at(&P1Point::Infinity)?;
        Ok(total.is_zero())
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum ReductionForm {
    Abstract(AbstractForm),
    P1(ExplicitP1Form),
}

impl ReductionForm {
    pub fn log_order_at_edge(&self, e: &str) -> Result<i64> {
        match self {
            ReductionForm::Abstract(a) => a.log_order.get(e).copied().ok_or_else(|| {
                Error::Structural(format!("abstract form has no log-order for edge {e}"))
            }),
            ReductionForm::P1(f) => f.log_order_at_edge(e),
        }
    }

    pub fn residue_at_edge(&self, e: &str) -> Result<Rational> {
        match self {
            ReductionForm::Abstract(a) => a.residue.get(e).cloned().ok_or_else(|| {
                Error::Structural(format!("abstract form has no residue for edge {e}"))
            }),
            ReductionForm::P1(f) => f.residue_at_edge(e),
        }
    }

    pub fn as_p1(&self) -> Option<&ExplicitP1Form> {
        match self {
            ReductionForm::P1(f) => Some(f),
            ReductionForm::Abstract(_) => None,
        }
    }
}

/// The graded reduction form at a type-2 vertex: its level (the valuation
/// of the normalizing scalar, i.e. the log of the form's norm there) and a
/// direction over the residue field.
#[derive(Clone, PartialEq, Debug)]
pub struct VertexReduction {
    pub level: Rational,
    pub form: ReductionForm,
}

/// Residue scalars indexed by oriented edge and leg ids.
pub type ResidueFunction = BTreeMap<EdgeId, PuiseuxScalar>;

/// A metrized curve complex with graded vertex reductions and a residue
/// function: the object the validator certifies.
#[derive(Clone, PartialEq, Debug)]
pub struct TropicalReductionDatum {
    pub complex: CurveComplex,
    pub reductions: BTreeMap<VertexId, VertexReduction>,
    pub re: ResidueFunction,
}

/// The piecewise-affine level function: levels at type-2 vertices, integer
/// slopes per oriented edge (outgoing orientation).
#[derive(Clone, PartialEq, Debug)]
pub struct LevelFunction {
    pub levels: BTreeMap<VertexId, Rational>,
    pub slopes: BTreeMap<EdgeId, i64>,
}

impl TropicalReductionDatum {
    pub fn level(&self, x: &str) -> Result<&Rational> {
        self.reductions
            .get(x)
            .map(|r| &r.level)
            .ok_or_else(|| Error::Structural(format!("no reduction at vertex {x}")))
    }

    /// Levels from the reductions; slope of a bounded edge from the level
    /// difference over the length, slope of a leg as minus the log-order at
    /// its branch point.
    pub fn level_function(&self) -> Result<LevelFunction> {
        let mut levels = BTreeMap::new();
        for v in self.complex.type2_vertices() {
            levels.insert(v.id.clone(), self.level(&v.id)?.clone());
        }
        let mut slopes = BTreeMap::new();
        for e in self.complex.edges.values() {
            if e.is_leg() {
                let red = self
                    .reductions
                    .get(&e.tail)
                    .ok_or_else(|| Error::Structural(format!("no reduction at {}", e.tail)))?;
                slopes.insert(e.id.clone(), -red.form.log_order_at_edge(&e.id)?);
            } else {
                let lt = self.level(&e.tail)?;
                let lh = self.level(&e.head)?;
                let len = match &e.length {
                    Val::Finite(l) => l,
                    Val::Infinite => {
                        return Err(Error::Structural(format!(
                            "bounded edge {} with infinite length",
                            e.id
                        )))
                    }
                };
                let slope = &(lh - lt) / len;
                match slope.to_integer() {
                    Some(s) => {
                        slopes.insert(e.id.clone(), s);
                    }
                    None => {
                        return Err(Error::InfiniteSlopeMismatch {
                            edge: e.id.clone(),
                            delta: (lh - lt).to_string(),
                            length: len.to_string(),
                        })
                    }
                }
            }
        }
        Ok(LevelFunction { levels, slopes })
    }
}

fn scalar_vs_zero(s: &PuiseuxScalar) -> Status {
    if s.is_exact_zero() {
        Status::Pass
    } else if s.is_zero_to_prec() {
        Status::Indeterminate
    } else {
        Status::Fail
    }
}

/// Checks every compatibility condition of a reduction datum and reports
/// the outcome per condition and location with exact witnesses.
pub fn validate(datum: &TropicalReductionDatum) -> ValidationReport {
    let mut rep = datum.complex.structural_report();

    // reduction coverage and residue coverage
    for v in datum.complex.type2_vertices() {
        if !datum.reductions.contains_key(&v.id) {
            rep.fail("structure/reduction-cover", &v.id, vec![]);
        }
    }
    for e in datum.complex.edges.values() {
        if !datum.re.contains_key(&e.id) {
            rep.fail("structure/residue-cover", &e.id, vec![]);
        }
    }

    // per-vertex structural checks of explicit forms
    for v in datum.complex.type2_vertices() {
        let Some(red) = datum.reductions.get(&v.id) else {
            continue;
        };
        if let ReductionForm::P1(form) = &red.form {
            if v.genus() != 0 {
                rep.fail(
                    "structure/p1-genus",
                    &v.id,
                    vec![("genus".into(), v.genus().to_string())],
                );
            }
            if !v.is_boundary() && !form.aux.is_empty() {
                rep.fail(
                    "structure/aux-on-interior",
                    &v.id,
                    vec![("aux".into(), form.aux.len().to_string())],
                );
            }
            let star_ids: BTreeSet<&str> =
                datum.complex.star(&v.id).iter().map(|e| e.id.as_str()).collect();
            let marked_ids: BTreeSet<&str> = form.marked.keys().map(|s| s.as_str()).collect();
            rep.push(
                "structure/marked-bijection",
                &v.id,
                if star_ids == marked_ids {
                    Status::Pass
                } else {
                    Status::Fail
                },
                vec![
                    ("star".into(), format!("{star_ids:?}")),
                    ("marked".into(), format!("{marked_ids:?}")),
                ],
            );
            let mut keys: Vec<String> = form.all_points().iter().map(qpoint_key).collect();
            keys.sort();
            let distinct = keys.windows(2).all(|w| w[0] != w[1]);
            rep.push(
                "structure/marked-distinct",
                &v.id,
                if distinct { Status::Pass } else { Status::Fail },
                vec![("points".into(), keys.join(","))],
            );
            match form.support_ok() {
                Ok(ok) => rep.push(
                    "p1/support",
                    &v.id,
                    if ok { Status::Pass } else { Status::Fail },
                    vec![],
                ),
                Err(e) => rep.fail("p1/support", &v.id, vec![("error".into(), e.to_string())]),
            }
            match form.residue_theorem() {
                Ok(ok) => rep.push(
                    "p1/residue-theorem",
                    &v.id,
                    if ok { Status::Pass } else { Status::Fail },
                    vec![],
                ),
                Err(e) => rep.fail(
                    "p1/residue-theorem",
                    &v.id,
                    vec![("error".into(), e.to_string())],
                ),
            }
        }
    }

    if !rep.passed() {
        return rep;
    }

    let lf = match datum.level_function() {
        Ok(lf) => lf,
        Err(e) => {
            rep.fail("structure/slope-integrality", "graph", vec![(
                "error".into(),
                e.to_string(),
            )]);
            return rep;
        }
    };

    // condition 1: log-order at each branch equals minus the slope
    for e in datum.complex.edges.values() {
        let tail = &datum.complex.vertices[&e.tail];
        if !tail.is_type2() {
            continue;
        }
        let red = &datum.reductions[&e.tail];
        let slope = lf.slopes[&e.id];
        match red.form.log_order_at_edge(&e.id) {
            Ok(lo) => rep.push(
                "cond1/log-order",
                &e.id,
                if lo == -slope { Status::Pass } else { Status::Fail },
                vec![
                    ("log_order".into(), lo.to_string()),
                    ("slope".into(), slope.to_string()),
                ],
            ),
            Err(err) => rep.fail(
                "cond1/log-order",
                &e.id,
                vec![("error".into(), err.to_string())],
            ),
        }
    }

    // condition 2: graded reduction of the residue matches the reduced
    // form's residue at the branch point
    for e in datum.complex.edges.values() {
        let tail = &datum.complex.vertices[&e.tail];
        if !tail.is_type2() {
            continue;
        }
        let red = &datum.reductions[&e.tail];
        let level = &red.level;
        let re = &datum.re[&e.id];
        let res = match red.form.residue_at_edge(&e.id) {
            Ok(r) => r,
            Err(err) => {
                rep.fail("cond2/graded-residue", &e.id, vec![(
                    "error".into(),
                    err.to_string(),
                )]);
                continue;
            }
        };
        let wits = |re: &PuiseuxScalar, res: &Rational| {
            vec![
                ("re".into(), re.to_string()),
                ("reduced_residue".into(), res.to_string()),
                ("level".into(), level.to_string()),
            ]
        };
        let needed_grade = -level;
        if res.is_zero() {
            // the residue must then be invisible at this level:
            // val(re) > -level, certified or not at the stored precision
            let status = match re.valuation() {
                Valuation::Infinite => Status::Pass,
                Valuation::Finite(v) => {
                    if v > needed_grade {
                        Status::Pass
                    } else {
                        Status::Fail
                    }
                }
                Valuation::Unknown => match re.prec() {
                    Val::Finite(p) if *p > needed_grade => Status::Pass,
                    _ => Status::Indeterminate,
                },
            };
            rep.push("cond2/graded-residue", &e.id, status, wits(re, &res));
        } else {
            let expected = GradedScalar::term(needed_grade.clone(), res.clone());
            let status = match re.graded_reduction() {
                Ok(g) => {
                    if g == expected {
                        Status::Pass
                    } else {
                        Status::Fail
                    }
                }
                Err(_) => {
                    // zero to precision: cannot carry the required grade
                    // unless the precision still allows it
                    match re.prec() {
                        Val::Finite(p) if *p <= needed_grade => Status::Indeterminate,
                        _ => Status::Fail,
                    }
                }
            };
            rep.push("cond2/graded-residue", &e.id, status, wits(re, &res));
        }
    }

    // condition 3: harmonicity at non-boundary type-2 vertices
    for v in datum.complex.type2_vertices() {
        if v.is_boundary() {
            continue;
        }
        let mut sum = PuiseuxScalar::zero();
        for e in datum.complex.star(&v.id) {
            sum = sum.add(&datum.re[&e.id]);
        }
        rep.push(
            "cond3/harmonicity",
            &v.id,
            scalar_vs_zero(&sum),
            vec![("sum".into(), sum.to_string())],
        );
    }

    // condition 4: zero residue on negative-slope legs
    for e in datum.complex.legs() {
        let slope = lf.slopes[&e.id];
        if slope >= 0 {
            continue;
        }
        let re = &datum.re[&e.id];
        rep.push(
            "cond4/negative-slope-leg",
            &e.id,
            scalar_vs_zero(re),
            vec![
                ("slope".into(), slope.to_string()),
                ("re".into(), re.to_string()),
            ],
        );
    }

    // alternating residues on bounded edges
    for e in datum.complex.bounded_edges_canonical() {
        let op = datum.complex.opposite(e).unwrap();
        let sum = datum.re[&e.id].add(&datum.re[&op.id]);
        rep.push(
            "alternating/residue",
            &e.id,
            scalar_vs_zero(&sum),
            vec![
                ("re".into(), datum.re[&e.id].to_string()),
                ("re_op".into(), datum.re[&op.id].to_string()),
            ],
        );
    }

    // degree of the reduced divisor at non-boundary type-2 vertices
    for v in datum.complex.type2_vertices() {
        if v.is_boundary() {
            continue;
        }
        let red = &datum.reductions[&v.id];
        let star = datum.complex.star(&v.id);
        let mut sum = 0i64;
        let mut ok = true;
        for e in &star {
            match red.form.log_order_at_edge(&e.id) {
                Ok(lo) => sum += lo,
                Err(_) => ok = false,
            }
        }
        let expected = 2 * v.genus() - 2 + star.len() as i64;
        rep.push(
            "degree/log-orders",
            &v.id,
            if ok && sum == expected {
                Status::Pass
            } else {
                Status::Fail
            },
            vec![
                ("sum".into(), sum.to_string()),
                ("expected".into(), expected.to_string()),
            ],
        );
    }

    // consequence of conditions 1 and 2: on a slope-0 branch the level is
    // read off the residue's valuation
    for e in datum.complex.edges.values() {
        let tail = &datum.complex.vertices[&e.tail];
        if !tail.is_type2() || lf.slopes[&e.id] != 0 {
            continue;
        }
        let level = &datum.reductions[&e.tail].level;
        let re = &datum.re[&e.id];
        let status = match re.valuation() {
            Valuation::Finite(v) => {
                if v == -level {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            Valuation::Infinite => Status::Fail,
            Valuation::Unknown => Status::Indeterminate,
        };
        rep.push(
            "slope0/level-from-residue",
            &e.id,
            status,
            vec![
                ("level".into(), level.to_string()),
                ("re".into(), re.to_string()),
            ],
        );
    }

    rep
}

/// Residue sums over the boundary of a full subgraph `G` of type-2
/// vertices: the left side sums residues of legs leaving `G`, the right
/// side sums residues of the reversed orientations of bounded edges
/// leaving `G`. Harmonicity and alternation force the two sides equal.
pub fn grc_sides(
    datum: &TropicalReductionDatum,
    subgraph: &BTreeSet<VertexId>,
) -> Result<(PuiseuxScalar, PuiseuxScalar)> {
    let mut lhs = PuiseuxScalar::zero();
    let mut rhs = PuiseuxScalar::zero();
    for x in subgraph {
        for e in datum.complex.star(x) {
            let re = datum
                .re
                .get(&e.id)
                .ok_or_else(|| Error::Structural(format!("no residue for edge {}", e.id)))?;
            if e.is_leg() {
                lhs = lhs.add(re);
            } else if !subgraph.contains(&e.head) {
                let op = datum
                    .complex
                    .opposite(e)
                    .ok_or_else(|| Error::Structural(format!("no opposite for {}", e.id)))?;
                let re_op = datum
                    .re
                    .get(&op.id)
                    .ok_or_else(|| Error::Structural(format!("no residue for edge {}", op.id)))?;
                rhs = rhs.add(re_op);
            }
        }
    }
    Ok((lhs, rhs))
}

/// The global residue condition relative to a level threshold: for every
/// connected component `G` of the non-boundary type-2 vertices of level
/// strictly above the threshold, both boundary sums agree exactly; when all
/// legs out of `G` have negative slope the sums vanish, and in particular
/// the graded component at valuation `-threshold` of the right side is
/// zero.
pub fn global_residue_check(
    datum: &TropicalReductionDatum,
    threshold: &Rational,
) -> Result<ValidationReport> {
    let mut rep = ValidationReport::new();
    let lf = datum.level_function()?;
    let eligible: BTreeSet<VertexId> = datum
        .complex
        .type2_vertices()
        .filter(|v| !v.is_boundary() && &lf.levels[&v.id] > threshold)
        .map(|v| v.id.clone())
        .collect();

    // connected components of the induced subgraph
    let mut remaining = eligible.clone();
    let mut components: Vec<BTreeSet<VertexId>> = vec![];
    while let Some(seed) = remaining.iter().next().cloned() {
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(seed.clone());
        remaining.remove(&seed);
        comp.insert(seed);
        while let Some(v) = queue.pop_front() {
            for e in datum.complex.star(&v) {
                if e.is_leg() {
                    continue;
                }
                if eligible.contains(&e.head) && remaining.remove(&e.head) {
                    comp.insert(e.head.clone());
                    queue.push_back(e.head.clone());
                }
            }
        }
        components.push(comp);
    }

    if components.is_empty() {
        rep.pass("grc/vacuous", "graph", vec![(
            "threshold".into(),
            threshold.to_string(),
        )]);
        return Ok(rep);
    }

    for comp in components {
        let loc = comp.iter().cloned().collect::<Vec<_>>().join("+");
        let (lhs, rhs) = grc_sides(datum, &comp)?;
        let diff = lhs.sub(&rhs);
        rep.push(
            "grc/equality",
            &loc,
            scalar_vs_zero(&diff),
            vec![
                ("lhs".into(), lhs.to_string()),
                ("rhs".into(), rhs.to_string()),
            ],
        );

        let all_legs_negative = comp.iter().all(|x| {
            datum
                .complex
                .star(x)
                .iter()
                .filter(|e| e.is_leg())
                .all(|e| lf.slopes[&e.id] < 0)
        });
        if all_legs_negative {
            rep.push(
                "grc/legs-vanish",
                &loc,
                scalar_vs_zero(&lhs),
                vec![("lhs".into(), lhs.to_string())],
            );
            // the top possible graded piece of the right side
            let grade = -threshold;
            let component = rhs.coeff(&grade);
            let status = match &component {
                Some(c) if c.is_zero() => Status::Pass,
                Some(_) => Status::Fail,
                None => Status::Indeterminate,
            };
            rep.push(
                "grc/top-grade-vanishing",
                &loc,
                status,
                vec![
                    ("grade".into(), grade.to_string()),
                    (
                        "component".into(),
                        component.map(|c| c.to_string()).unwrap_or("?".into()),
                    ),
                ],
            );
        }
    }
    Ok(rep)
}

impl fmt::Display for TropicalReductionDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "datum: {} vertices, {} oriented edges",
            self.complex.vertices.len(),
            self.complex.edges.len()
        )
    }
}
