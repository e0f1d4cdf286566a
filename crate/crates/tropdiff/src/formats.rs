//! File formats: JSON wire representations of reduction data, annulus
//! forms, and glued models, with conversions to the in-memory types.
//!
//! Rationals serialize as `"p/q"` strings, scalar series as
//! `{"terms": [[exp, coeff], ...], "prec": "q"|"inf"}` (a bare `"p/q"`
//! string is accepted as an exact constant), points of the projective line
//! as a scalar or `"inf"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annulus::{AnnulusForm, AnnulusSeries, Skeleton};
use crate::complex::{
    AbstractForm, CurveComplex, ExplicitP1Form, OrientedEdge, QPoint, ReductionForm,
    TropicalReductionDatum, Vertex, VertexKind, VertexReduction,
};
use crate::error::{Error, Result};
use crate::model::{DiscExtension, GluedModel, Gluing, GluingSide, KPoint, StarPiece};
use crate::poly::{P1Point, Poly};
use crate::puiseux::PuiseuxScalar;
use crate::rational::{Rational, Val};

// ---------------------------------------------------------------- datum --

#[derive(Serialize, Deserialize)]
struct VertexWire {
    id: String,
    vtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    genus: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct EdgeWire {
    id: String,
    tail: String,
    head: String,
    #[serde(default = "val_inf")]
    length: Val,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    opposite: Option<String>,
}

fn val_inf() -> Val {
    Val::Infinite
}

#[derive(Serialize, Deserialize)]
struct P1FormWire {
    num: Vec<Rational>,
    den: Vec<Rational>,
    marked: BTreeMap<String, QPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aux: Vec<QPoint>,
}

#[derive(Serialize, Deserialize)]
enum FormWire {
    #[serde(rename = "abstract")]
    Abstract(AbstractForm),
    #[serde(rename = "p1")]
    P1(P1FormWire),
}

#[derive(Serialize, Deserialize)]
struct ReductionWire {
    level: Rational,
    form: FormWire,
}

#[derive(Serialize, Deserialize)]
struct DatumWire {
    vertices: Vec<VertexWire>,
    edges: Vec<EdgeWire>,
    #[serde(default)]
    legs: Vec<EdgeWire>,
    reductions: BTreeMap<String, ReductionWire>,
    re: BTreeMap<String, PuiseuxScalar>,
}

pub fn datum_to_json(datum: &TropicalReductionDatum) -> serde_json::Value {
    let vertices = datum
        .complex
        .vertices
        .values()
        .map(|v| match &v.kind {
            VertexKind::Type1 => VertexWire {
                id: v.id.clone(),
                vtype: "type1".into(),
                genus: None,
                boundary: None,
            },
            VertexKind::Type2 { genus, boundary } => VertexWire {
                id: v.id.clone(),
                vtype: "type2".into(),
                genus: Some(*genus),
                boundary: Some(*boundary),
            },
        })
        .collect::<Vec<_>>();
    let (legs, edges): (Vec<_>, Vec<_>) = datum
        .complex
        .edges
        .values()
        .map(|e| EdgeWire {
            id: e.id.clone(),
            tail: e.tail.clone(),
            head: e.head.clone(),
            length: e.length.clone(),
            opposite: e.opposite.clone(),
        })
        .partition(|e| e.opposite.is_none());
    let reductions = datum
        .reductions
        .iter()
        .map(|(k, r)| {
            let form = match &r.form {
                ReductionForm::Abstract(a) => FormWire::Abstract(a.clone()),
                ReductionForm::P1(f) => FormWire::P1(P1FormWire {
                    num: f.num.coeffs().to_vec(),
                    den: f.den.coeffs().to_vec(),
                    marked: f.marked.clone(),
                    aux: f.aux.clone(),
                }),
            };
            (
                k.clone(),
                ReductionWire {
                    level: r.level.clone(),
                    form,
                },
            )
        })
        .collect();
    serde_json::to_value(DatumWire {
        vertices,
        edges,
        legs,
        reductions,
        re: datum.re.clone(),
    })
    .expect("datum serialization cannot fail")
}

pub fn datum_from_json(value: serde_json::Value) -> Result<TropicalReductionDatum> {
    let wire: DatumWire = serde_json::from_value(value)
        .map_err(|e| Error::Structural(format!("bad datum file: {e}")))?;
    let mut vertices = BTreeMap::new();
    for v in wire.vertices {
        let kind = match v.vtype.as_str() {
            "type1" => VertexKind::Type1,
            "type2" => VertexKind::Type2 {
                genus: v.genus.unwrap_or(0),
                boundary: v.boundary.unwrap_or(false),
            },
            other => {
                return Err(Error::Structural(format!(
                    "unknown vertex type {other:?} for {}",
                    v.id
                )))
            }
        };
        vertices.insert(v.id.clone(), Vertex { id: v.id, kind });
    }
    let mut edges = BTreeMap::new();
    for e in wire.edges.into_iter().chain(wire.legs.into_iter()) {
        edges.insert(
            e.id.clone(),
            OrientedEdge {
                id: e.id,
                tail: e.tail,
                head: e.head,
                length: e.length,
                opposite: e.opposite,
            },
        );
    }
    let mut reductions = BTreeMap::new();
    for (k, r) in wire.reductions {
        let form = match r.form {
            FormWire::Abstract(a) => ReductionForm::Abstract(a),
            FormWire::P1(f) => ReductionForm::P1(ExplicitP1Form {
                num: Poly::from_coeffs(f.num),
                den: Poly::from_coeffs(f.den),
                marked: f.marked,
                aux: f.aux,
            }),
        };
        reductions.insert(
            k,
            VertexReduction {
                level: r.level,
                form,
            },
        );
    }
    Ok(TropicalReductionDatum {
        complex: CurveComplex { vertices, edges },
        reductions,
        re: wire.re,
    })
}

pub fn datum_to_string(datum: &TropicalReductionDatum) -> String {
    serde_json::to_string_pretty(&datum_to_json(datum)).expect("serialization cannot fail")
}

pub fn datum_from_str(s: &str) -> Result<TropicalReductionDatum> {
    let value: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::Structural(format!("bad JSON: {e}")))?;
    datum_from_json(value)
}

// --------------------------------------------------------- annulus form --

#[derive(Serialize, Deserialize)]
struct AnnulusFormWire {
    #[serde(rename = "L")]
    length: Rational,
    #[serde(default = "both_closed")]
    closed: [bool; 2],
    coeffs: Vec<(i64, PuiseuxScalar)>,
    window: (i64, i64),
}

fn both_closed() -> [bool; 2] {
    [true, true]
}

pub fn annulus_form_to_json(form: &AnnulusForm) -> serde_json::Value {
    let sk = form.skeleton();
    serde_json::to_value(AnnulusFormWire {
        length: sk.length.clone(),
        closed: sk.closed,
        coeffs: form
            .series
            .stored()
            .map(|(i, c)| (*i, c.clone()))
            .collect(),
        window: form.series.window(),
    })
    .expect("serialization cannot fail")
}

pub fn annulus_form_from_str(s: &str) -> Result<AnnulusForm> {
    let wire: AnnulusFormWire =
        serde_json::from_str(s).map_err(|e| Error::Structural(format!("bad form file: {e}")))?;
    if !wire.length.is_positive() {
        return Err(Error::Structural("skeleton length must be positive".into()));
    }
    let skeleton = Skeleton {
        length: wire.length,
        closed: wire.closed,
    };
    Ok(AnnulusForm::new(AnnulusSeries::new(
        skeleton,
        wire.window,
        wire.coeffs,
    )?))
}

// ---------------------------------------------------------------- model --

fn kpoint_to_json(p: &KPoint) -> serde_json::Value {
    match p {
        P1Point::Finite(q) => serde_json::to_value(q).unwrap(),
        P1Point::Infinity => serde_json::Value::String("inf".into()),
    }
}

fn kpoint_from_json(v: serde_json::Value) -> Result<KPoint> {
    if v == serde_json::Value::String("inf".into()) {
        return Ok(P1Point::Infinity);
    }
    let s: PuiseuxScalar = serde_json::from_value(v)
        .map_err(|e| Error::Structural(format!("bad point: {e}")))?;
    Ok(P1Point::Finite(s))
}

#[derive(Serialize, Deserialize)]
struct SeriesWire {
    coeffs: Vec<(i64, PuiseuxScalar)>,
    window: (i64, i64),
}

fn series_to_wire(s: &AnnulusSeries) -> SeriesWire {
    SeriesWire {
        coeffs: s.stored().map(|(i, c)| (*i, c.clone())).collect(),
        window: s.window(),
    }
}

fn series_from_wire(w: SeriesWire, skeleton: Skeleton) -> Result<AnnulusSeries> {
    AnnulusSeries::new(skeleton, w.window, w.coeffs)
}

#[derive(Serialize, Deserialize)]
struct PieceWire {
    num: Vec<PuiseuxScalar>,
    den: Vec<PuiseuxScalar>,
    marked: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aux: Vec<serde_json::Value>,
    annuli: BTreeMap<String, (Rational, Rational)>,
}

#[derive(Serialize, Deserialize)]
struct GluingSideWire {
    unit: SeriesWire,
    c_n: PuiseuxScalar,
    residue: PuiseuxScalar,
}

#[derive(Serialize, Deserialize)]
struct GluingWire {
    n: i64,
    tail: GluingSideWire,
    head: GluingSideWire,
    constant: PuiseuxScalar,
}

#[derive(Serialize, Deserialize)]
struct DiscWire {
    n: i64,
    unit: SeriesWire,
    c_n: PuiseuxScalar,
    residue: PuiseuxScalar,
}

#[derive(Serialize, Deserialize)]
struct ModelWire {
    complex: serde_json::Value,
    pieces: BTreeMap<String, PieceWire>,
    gluings: BTreeMap<String, GluingWire>,
    #[serde(default)]
    discs: BTreeMap<String, DiscWire>,
}

pub fn model_to_json(model: &GluedModel) -> serde_json::Value {
    // reuse the datum complex encoding with empty decorations
    let complex_json = {
        let datum = TropicalReductionDatum {
            complex: model.complex.clone(),
            reductions: BTreeMap::new(),
            re: BTreeMap::new(),
        };
        let mut v = datum_to_json(&datum);
        let obj = v.as_object_mut().unwrap();
        obj.remove("reductions");
        obj.remove("re");
        v
    };
    let pieces = model
        .pieces
        .iter()
        .map(|(k, p)| {
            (
                k.clone(),
                PieceWire {
                    num: p.num.coeffs().to_vec(),
                    den: p.den.coeffs().to_vec(),
                    marked: p
                        .marked
                        .iter()
                        .map(|(e, q)| (e.clone(), kpoint_to_json(q)))
                        .collect(),
                    aux: p.aux.iter().map(kpoint_to_json).collect(),
                    annuli: p.annuli.clone(),
                },
            )
        })
        .collect();
    let gluings = model
        .gluings
        .iter()
        .map(|(k, g)| {
            (
                k.clone(),
                GluingWire {
                    n: g.n,
                    tail: GluingSideWire {
                        unit: series_to_wire(&g.tail.unit),
                        c_n: g.tail.c_n.clone(),
                        residue: g.tail.residue.clone(),
                    },
                    head: GluingSideWire {
                        unit: series_to_wire(&g.head.unit),
                        c_n: g.head.c_n.clone(),
                        residue: g.head.residue.clone(),
                    },
                    constant: g.constant.clone(),
                },
            )
        })
        .collect();
    let discs = model
        .discs
        .iter()
        .map(|(k, d)| {
            (
                k.clone(),
                DiscWire {
                    n: d.n,
                    unit: series_to_wire(&d.unit),
                    c_n: d.c_n.clone(),
                    residue: d.residue.clone(),
                },
            )
        })
        .collect();
    serde_json::to_value(ModelWire {
        complex: complex_json,
        pieces,
        gluings,
        discs,
    })
    .expect("serialization cannot fail")
}

pub fn model_to_string(model: &GluedModel) -> String {
    serde_json::to_string_pretty(&model_to_json(model)).expect("serialization cannot fail")
}

pub fn model_from_json(value: serde_json::Value) -> Result<GluedModel> {
    let wire: ModelWire = serde_json::from_value(value)
        .map_err(|e| Error::Structural(format!("bad model file: {e}")))?;
    let mut complex_json = wire.complex;
    {
        let obj = complex_json
            .as_object_mut()
            .ok_or_else(|| Error::Structural("model complex must be an object".into()))?;
        obj.entry("reductions").or_insert(serde_json::json!({}));
        obj.entry("re").or_insert(serde_json::json!({}));
    }
    let complex = datum_from_json(complex_json)?.complex;

    let mut pieces = BTreeMap::new();
    for (vertex, p) in wire.pieces {
        let mut marked = BTreeMap::new();
        for (e, q) in p.marked {
            marked.insert(e, kpoint_from_json(q)?);
        }
        let mut aux = Vec::new();
        for q in p.aux {
            aux.push(kpoint_from_json(q)?);
        }
        pieces.insert(
            vertex.clone(),
            StarPiece {
                vertex,
                num: Poly::from_coeffs(p.num),
                den: Poly::from_coeffs(p.den),
                marked,
                aux,
                annuli: p.annuli,
            },
        );
    }

    let edge_skeleton = |edge: &str, annuli_of: &dyn Fn(&str) -> Option<(Rational, Rational)>| {
        annuli_of(edge)
            .map(|(a, b)| Skeleton::closed_interval(b - a))
            .ok_or_else(|| Error::Structural(format!("no chart annulus for edge {edge}")))
    };

    let mut gluings = BTreeMap::new();
    for (edge, g) in wire.gluings {
        let e = complex
            .edges
            .get(&edge)
            .ok_or_else(|| Error::Structural(format!("gluing for unknown edge {edge}")))?;
        let op = e
            .opposite
            .clone()
            .ok_or_else(|| Error::Structural(format!("gluing on a leg {edge}")))?;
        let tail_piece = pieces
            .get(&e.tail)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", e.tail)))?;
        let head_piece = pieces
            .get(&e.head)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", e.head)))?;
        let sk_tail = edge_skeleton(&edge, &|id| tail_piece.annuli.get(id).cloned())?;
        let sk_head = edge_skeleton(&op, &|id| head_piece.annuli.get(id).cloned())?;
        gluings.insert(
            edge.clone(),
            Gluing {
                edge: edge.clone(),
                n: g.n,
                tail: GluingSide {
                    unit: series_from_wire(g.tail.unit, sk_tail)?,
                    c_n: g.tail.c_n,
                    residue: g.tail.residue,
                },
                head: GluingSide {
                    unit: series_from_wire(g.head.unit, sk_head)?,
                    c_n: g.head.c_n,
                    residue: g.head.residue,
                },
                constant: g.constant,
            },
        );
    }

    let mut discs = BTreeMap::new();
    for (leg, d) in wire.discs {
        let e = complex
            .edges
            .get(&leg)
            .ok_or_else(|| Error::Structural(format!("disc for unknown leg {leg}")))?;
        let piece = pieces
            .get(&e.tail)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", e.tail)))?;
        let sk = edge_skeleton(&leg, &|id| piece.annuli.get(id).cloned())?;
        discs.insert(
            leg,
            DiscExtension {
                n: d.n,
                unit: series_from_wire(d.unit, sk)?,
                c_n: d.c_n,
                residue: d.residue,
            },
        );
    }

    Ok(GluedModel {
        complex,
        pieces,
        gluings,
        discs,
    })
}

pub fn model_from_str(s: &str) -> Result<GluedModel> {
    let value: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::Structural(format!("bad JSON: {e}")))?;
    model_from_json(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn datum_round_trip_through_json() {
        for datum in fixtures::all_valid() {
            let s = datum_to_string(&datum);
            let back = datum_from_str(&s).unwrap();
            assert_eq!(back, datum);
        }
    }

    #[test]
    fn annulus_form_parses() {
        let text = r#"{
            "L": "1/2",
            "closed": [true, true],
            "coeffs": [[1, "1"], [0, {"terms": [["1", "1"]], "prec": "24"}]],
            "window": [0, 1]
        }"#;
        let form = annulus_form_from_str(text).unwrap();
        assert_eq!(form.dominant_index().unwrap(), 1);
    }
}
