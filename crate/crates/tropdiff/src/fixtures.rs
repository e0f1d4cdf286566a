//! The built-in fixture corpus: small reduction data exercising every
//! validator condition, every lifting code path (slopes -1, 0, 1, 2, a
//! loop, a boundary vertex, a two-level configuration), and deliberate
//! failures for each condition. The `fixtures/` directory of this crate
//! holds the same data as JSON.

use std::collections::BTreeMap;

use crate::complex::{
    AbstractForm, CurveComplex, ExplicitP1Form, OrientedEdge, QPoint, ReductionForm,
    TropicalReductionDatum, Vertex, VertexKind, VertexReduction,
};
use crate::poly::{P1Point, Poly};
use crate::puiseux::PuiseuxScalar;
use crate::rational::{Rational, Val};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn qi(n: i64) -> Rational {
    Rational::from_int(n)
}

fn s_int(n: i64) -> PuiseuxScalar {
    PuiseuxScalar::from_int(n)
}

fn s_t(k: i64) -> PuiseuxScalar {
    PuiseuxScalar::t_pow(qi(k))
}

fn poly(coeffs: &[i64]) -> Poly<Rational> {
    Poly::from_coeffs(coeffs.iter().map(|&n| qi(n)).collect())
}

fn pt(n: i64) -> QPoint {
    P1Point::Finite(qi(n))
}

fn pt_q(n: i64, d: i64) -> QPoint {
    P1Point::Finite(q(n, d))
}

fn inf() -> QPoint {
    P1Point::Infinity
}

struct Builder {
    complex: CurveComplex,
    reductions: BTreeMap<String, VertexReduction>,
    re: BTreeMap<String, PuiseuxScalar>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            complex: CurveComplex::default(),
            reductions: BTreeMap::new(),
            re: BTreeMap::new(),
        }
    }

    fn vertex2(&mut self, id: &str) -> &mut Self {
        self.vertex2_full(id, 0, false)
    }

    fn vertex2_full(&mut self, id: &str, genus: i64, boundary: bool) -> &mut Self {
        self.complex.vertices.insert(
            id.into(),
            Vertex {
                id: id.into(),
                kind: VertexKind::Type2 { genus, boundary },
            },
        );
        self
    }

    /// A leg from `tail` to a fresh type-1 vertex, with its residue.
    fn leg(&mut self, id: &str, tail: &str, re: PuiseuxScalar) -> &mut Self {
        let v1 = format!("{id}_pt");
        self.complex.vertices.insert(
            v1.clone(),
            Vertex {
                id: v1.clone(),
                kind: VertexKind::Type1,
            },
        );
        self.complex.edges.insert(
            id.into(),
            OrientedEdge {
                id: id.into(),
                tail: tail.into(),
                head: v1,
                length: Val::Infinite,
                opposite: None,
            },
        );
        self.re.insert(id.into(), re);
        self
    }

    /// A bounded edge pair `id`/`id_op` with the residue of the forward
    /// orientation (the reverse gets its negative).
    fn edge(&mut self, id: &str, tail: &str, head: &str, len: Rational, re: PuiseuxScalar) -> &mut Self {
        let op = format!("{id}_op");
        self.complex.edges.insert(
            id.into(),
            OrientedEdge {
                id: id.into(),
                tail: tail.into(),
                head: head.into(),
                length: Val::Finite(len.clone()),
                opposite: Some(op.clone()),
            },
        );
        self.complex.edges.insert(
            op.clone(),
            OrientedEdge {
                id: op.clone(),
                tail: head.into(),
                head: tail.into(),
                length: Val::Finite(len),
                opposite: Some(id.into()),
            },
        );
        self.re.insert(op, re.neg());
        self.re.insert(id.into(), re);
        self
    }

    fn p1(
        &mut self,
        vertex: &str,
        level: Rational,
        num: Poly<Rational>,
        den: Poly<Rational>,
        marked: Vec<(&str, QPoint)>,
        aux: Vec<QPoint>,
    ) -> &mut Self {
        self.reductions.insert(
            vertex.into(),
            VertexReduction {
                level,
                form: ReductionForm::P1(ExplicitP1Form {
                    num,
                    den,
                    marked: marked
                        .into_iter()
                        .map(|(e, p)| (e.to_string(), p))
                        .collect(),
                    aux,
                }),
            },
        );
        self
    }

    fn abstract_form(
        &mut self,
        vertex: &str,
        level: Rational,
        data: Vec<(&str, i64, Rational)>,
    ) -> &mut Self {
        let mut log_order = BTreeMap::new();
        let mut residue = BTreeMap::new();
        for (e, lo, res) in data {
            log_order.insert(e.to_string(), lo);
            residue.insert(e.to_string(), res);
        }
        self.reductions.insert(
            vertex.into(),
            VertexReduction {
                level,
                form: ReductionForm::Abstract(AbstractForm { log_order, residue }),
            },
        );
        self
    }

    fn build(&mut self) -> TropicalReductionDatum {
        TropicalReductionDatum {
            complex: std::mem::take(&mut self.complex),
            reductions: std::mem::take(&mut self.reductions),
            re: std::mem::take(&mut self.re),
        }
    }
}

/// One vertex, three legs to 0, 1 and infinity, with the form
/// `dz/(z(z-1))`: residues (-1, 1, 0), log-orders (0, 0, 1), level 0.
pub fn p1_three_legs() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x")
        .leg("l0", "x", s_int(-1))
        .leg("l1", "x", s_int(1))
        .leg("linf", "x", PuiseuxScalar::zero())
        .p1(
            "x",
            qi(0),
            poly(&[1]),
            poly(&[0, -1, 1]),
            vec![("l0", pt(0)), ("l1", pt(1)), ("linf", inf())],
            vec![],
        );
    b.build()
}

/// The three-leg datum scaled by `t`: level drops to -1 and the residues
/// pick up a factor `t`; the reduction direction is unchanged.
pub fn p1_three_legs_scaled() -> TropicalReductionDatum {
    let mut datum = p1_three_legs();
    datum.reductions.get_mut("x").unwrap().level = qi(-1);
    for re in datum.re.values_mut() {
        *re = re.mul(&s_t(1));
    }
    datum
}

/// One vertex with the form `dz`: a zero-residue calibration datum with
/// slopes -1 and +1 on the legs towards 0 and infinity.
pub fn p1_dz() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x")
        .leg("l0", "x", PuiseuxScalar::zero())
        .leg("linf", "x", PuiseuxScalar::zero())
        .p1(
            "x",
            qi(0),
            poly(&[1]),
            poly(&[1]),
            vec![("l0", pt(0)), ("linf", inf())],
            vec![],
        );
    b.build()
}

/// Four legs with the form `(2z-1) dz/(z(z-1))`: residues (1, 1, 0, -2)
/// and a marked zero at 1/2.
pub fn p1_four_legs() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x")
        .leg("l0", "x", s_int(1))
        .leg("l1", "x", s_int(1))
        .leg("lhalf", "x", PuiseuxScalar::zero())
        .leg("linf", "x", s_int(-2))
        .p1(
            "x",
            qi(0),
            poly(&[-1, 2]),
            poly(&[0, -1, 1]),
            vec![
                ("l0", pt(0)),
                ("l1", pt(1)),
                ("lhalf", pt_q(1, 2)),
                ("linf", inf()),
            ],
            vec![],
        );
    b.build()
}

/// Two vertices joined by one length-1 edge of the given slope (from `x`
/// towards `y`), with enough legs to balance the divisor degrees.
pub fn two_vertex_chain(slope: i64) -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x").vertex2("y");
    match slope {
        0 => {
            b.edge("e", "x", "y", qi(1), s_int(-1))
                .leg("lx1", "x", s_int(1))
                .leg("lxinf", "x", PuiseuxScalar::zero())
                .leg("ly0", "y", s_int(-1))
                .leg("lyinf", "y", PuiseuxScalar::zero())
                .p1(
                    "x",
                    qi(0),
                    poly(&[1]),
                    poly(&[0, -1, 1]),
                    vec![("e", pt(0)), ("lx1", pt(1)), ("lxinf", inf())],
                    vec![],
                )
                .p1(
                    "y",
                    qi(0),
                    poly(&[1]),
                    poly(&[0, -1, 1]),
                    vec![("e_op", pt(1)), ("ly0", pt(0)), ("lyinf", inf())],
                    vec![],
                );
        }
        1 => {
            // x sees a double pole towards the edge, y a regular point
            b.edge("e", "x", "y", qi(1), PuiseuxScalar::zero())
                .leg("lx", "x", PuiseuxScalar::zero())
                .leg("ly", "y", PuiseuxScalar::zero())
                .p1(
                    "x",
                    qi(0),
                    poly(&[1]),
                    poly(&[0, 0, 1]),
                    vec![("e", pt(0)), ("lx", inf())],
                    vec![],
                )
                .p1(
                    "y",
                    qi(1),
                    poly(&[1]),
                    poly(&[1]),
                    vec![("e_op", pt(0)), ("ly", inf())],
                    vec![],
                );
        }
        -1 => {
            b.edge("e", "x", "y", qi(1), PuiseuxScalar::zero())
                .leg("lx", "x", PuiseuxScalar::zero())
                .leg("ly", "y", PuiseuxScalar::zero())
                .p1(
                    "x",
                    qi(0),
                    poly(&[1]),
                    poly(&[1]),
                    vec![("e", pt(0)), ("lx", inf())],
                    vec![],
                )
                .p1(
                    "y",
                    qi(-1),
                    poly(&[1]),
                    poly(&[0, 0, 1]),
                    vec![("e_op", pt(0)), ("ly", inf())],
                    vec![],
                );
        }
        2 => {
            // a triple pole against a simple zero; the sign on the x side
            // keeps the gluing constant a rational square
            b.edge("e", "x", "y", qi(1), PuiseuxScalar::zero())
                .leg("lx", "x", PuiseuxScalar::zero())
                .leg("ly", "y", PuiseuxScalar::zero())
                .p1(
                    "x",
                    qi(0),
                    poly(&[-1]),
                    poly(&[0, 0, 0, 1]),
                    vec![("e", pt(0)), ("lx", inf())],
                    vec![],
                )
                .p1(
                    "y",
                    qi(2),
                    poly(&[0, 1]),
                    poly(&[1]),
                    vec![("e_op", pt(0)), ("ly", inf())],
                    vec![],
                );
        }
        other => panic!("no chain fixture for slope {other}"),
    }
    b.build()
}

/// A loop edge on a single vertex with the form `dz/(z(z-1))`, both loop
/// branches carrying simple poles.
pub fn loop_edge() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x")
        .edge("e", "x", "x", qi(1), s_int(-1))
        .leg("linf", "x", PuiseuxScalar::zero())
        .p1(
            "x",
            qi(0),
            poly(&[1]),
            poly(&[0, -1, 1]),
            vec![("e", pt(0)), ("e_op", pt(1)), ("linf", inf())],
            vec![],
        );
    b.build()
}

/// A boundary vertex (its curve compactified by an auxiliary point at
/// infinity) attached to an interior vertex; the residues carry a `t`-tail
/// so that lifting has to correct them.
pub fn boundary_vertex() -> TropicalReductionDatum {
    let mut b = Builder::new();
    let re_e = s_int(-1).add(&s_t(1)); // -1 + t
    b.vertex2_full("x", 0, true).vertex2("y");
    b.edge("e", "x", "y", qi(1), re_e.clone())
        .leg("ly0", "y", s_int(-1).add(&s_t(1)))
        .leg("lyinf", "y", PuiseuxScalar::zero())
        .p1(
            "x",
            qi(0),
            poly(&[-1]),
            poly(&[0, 1]),
            vec![("e", pt(0))],
            vec![inf()],
        )
        .p1(
            "y",
            qi(0),
            poly(&[1]),
            poly(&[0, -1, 1]),
            vec![("e_op", pt(1)), ("ly0", pt(0)), ("lyinf", inf())],
            vec![],
        );
    b.build()
}

/// A chain x -> y -> z rising one level and falling back, with two
/// simple-pole legs in the middle.
pub fn three_vertex_chain() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2("x").vertex2("y").vertex2("z");
    // at level 1 the visible residues live at valuation -1
    b.edge("e1", "x", "y", qi(1), PuiseuxScalar::zero())
        .edge("e2", "y", "z", qi(1), PuiseuxScalar::zero())
        .leg("lx", "x", PuiseuxScalar::zero())
        .leg("la", "y", s_t(-1).neg())
        .leg("lb", "y", s_t(-1))
        .leg("lz", "z", PuiseuxScalar::zero())
        .p1(
            "x",
            qi(0),
            poly(&[1]),
            poly(&[0, 0, 1]),
            vec![("e1", pt(0)), ("lx", inf())],
            vec![],
        )
        .p1(
            "y",
            qi(1),
            poly(&[1]),
            poly(&[6, -5, 1]), // (z-2)(z-3)
            vec![("e1_op", pt(0)), ("e2", pt(1)), ("la", pt(2)), ("lb", pt(3))],
            vec![],
        )
        .p1(
            "z",
            qi(0),
            poly(&[1]),
            poly(&[0, 0, 1]),
            vec![("e2_op", pt(0)), ("lz", inf())],
            vec![],
        );
    b.build()
}

/// A two-level datum: a genus-1 vertex of level 1 whose star consists of a
/// negative-slope leg and a down edge, over a genus-0 vertex. All residues
/// vanish, as the global residue condition forces.
pub fn grc_two_level() -> TropicalReductionDatum {
    let mut b = Builder::new();
    b.vertex2_full("x", 1, false).vertex2("y");
    b.edge("e", "x", "y", qi(1), PuiseuxScalar::zero())
        .leg("lx", "x", PuiseuxScalar::zero())
        .leg("ly", "y", PuiseuxScalar::zero())
        .abstract_form("x", qi(1), vec![("e", 1, qi(0)), ("lx", 1, qi(0))])
        .p1(
            "y",
            qi(0),
            poly(&[1]),
            poly(&[0, 0, 1]),
            vec![("e_op", pt(0)), ("ly", inf())],
            vec![],
        );
    b.build()
}

/// Every valid fixture, in a deterministic order.
pub fn all_valid() -> Vec<TropicalReductionDatum> {
    vec![
        p1_three_legs(),
        p1_three_legs_scaled(),
        p1_dz(),
        p1_four_legs(),
        two_vertex_chain(-1),
        two_vertex_chain(0),
        two_vertex_chain(1),
        two_vertex_chain(2),
        loop_edge(),
        boundary_vertex(),
        three_vertex_chain(),
        grc_two_level(),
    ]
}

/// Names matching [`all_valid`], used for fixture files.
pub fn all_valid_names() -> Vec<&'static str> {
    vec![
        "p1_three_legs",
        "p1_three_legs_scaled",
        "p1_dz",
        "p1_four_legs",
        "two_vertex_slope_minus1",
        "two_vertex_slope0",
        "two_vertex_slope1",
        "two_vertex_slope2",
        "loop_edge",
        "boundary_vertex",
        "three_vertex_chain",
        "grc_two_level",
    ]
}

/// The genus-0 explicit fixtures that the lifting pipeline accepts.
pub fn all_liftable() -> Vec<(String, TropicalReductionDatum)> {
    all_valid_names()
        .into_iter()
        .zip(all_valid())
        .filter(|(name, _)| *name != "grc_two_level")
        .map(|(n, d)| (n.to_string(), d))
        .collect()
}

/// Deliberately broken data, one per validator condition, with the check
/// id each is expected to trip.
pub fn all_invalid() -> Vec<(&'static str, &'static str, TropicalReductionDatum)> {
    let mut out = Vec::new();

    // wrong log-order on a bounded edge
    let mut d = grc_two_level();
    if let VertexReduction {
        form: ReductionForm::Abstract(a),
        ..
    } = d.reductions.get_mut("x").unwrap()
    {
        a.log_order.insert("e".into(), 2);
    }
    out.push(("bad_condition1", "cond1", d));

    // wrong leading coefficients in two residues (their sum still vanishes)
    let mut d = p1_three_legs();
    d.re.insert("l0".into(), s_int(-2));
    d.re.insert("l1".into(), s_int(2));
    out.push(("bad_condition2", "cond2", d));

    // harmonicity broken by a higher-order tail on one leg
    let mut d = p1_three_legs();
    d.re.insert("l0".into(), s_int(-1).add(&s_t(1)));
    out.push(("bad_condition3", "cond3", d));

    // nonzero residue on a negative-slope leg
    let mut d = p1_three_legs();
    d.re.insert("linf".into(), s_t(1));
    out.push(("bad_condition4", "cond4", d));

    // equal instead of opposite residues on an edge pair
    let mut d = two_vertex_chain(0);
    let re_e = d.re["e"].clone();
    d.re.insert("e_op".into(), re_e);
    out.push(("bad_alternating", "alternating", d));

    // divisor degree off (abstract log-orders sum to 2 instead of 0)
    let mut b = Builder::new();
    b.vertex2("x")
        .leg("l0", "x", PuiseuxScalar::zero())
        .leg("linf", "x", PuiseuxScalar::zero())
        .abstract_form("x", qi(0), vec![("l0", 1, qi(0)), ("linf", 1, qi(0))]);
    out.push(("bad_degree", "degree", b.build()));

    // endpoint levels incompatible with an integer slope
    let mut d = two_vertex_chain(0);
    d.reductions.get_mut("y").unwrap().level = q(1, 2);
    out.push(("bad_slope_integrality", "structure/slope-integrality", d));

    out
}
