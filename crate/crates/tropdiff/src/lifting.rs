//! Constructive lifting of genus-0 reduction data to glued models: local
//! lifts by coefficient-wise inclusion, exact residue correction with
//! simple-pole forms, and annulus gluing via good coordinates. The
//! tropicalization of the lifted model reproduces the input datum exactly.

use std::collections::BTreeMap;

use crate::annulus::good_coordinate;
use crate::complex::{
    EdgeId, ReductionForm, TropicalReductionDatum, VertexId, VertexReduction,
};
use crate::error::{Error, Result};
use crate::model::{
    expand_on_annulus, gauss_level, DiscExtension, GluedModel, Gluing, GluingSide, KPoint,
    StarPiece,
};
use crate::poly::{P1Point, Poly};
use crate::puiseux::{PuiseuxScalar, Valuation};
use crate::rational::{Rational, Val};

/// Default expansion window for chart computations.
pub const DEFAULT_WINDOW: i64 = 12;

fn include_rational(c: &Rational) -> PuiseuxScalar {
    PuiseuxScalar::constant(c.clone())
}

fn include_point(p: &crate::complex::QPoint) -> KPoint {
    p.map(include_rational)
}

/// Lifts a genus-0 explicit reduction to a star piece over the ground
/// field: coefficients are included as constants and the form is rescaled
/// to put its norm at the prescribed level. Chart annuli are left empty.
pub fn local_lift(vertex: &str, genus: i64, red: &VertexReduction) -> Result<StarPiece> {
    if genus != 0 {
        return Err(Error::UnsupportedGenus(genus));
    }
    let form = match &red.form {
        ReductionForm::P1(f) => f,
        ReductionForm::Abstract(_) => {
            return Err(Error::Structural(format!(
                "vertex {vertex}: abstract reduction data cannot be lifted explicitly"
            )))
        }
    };
    // normalize the reduced form so both polynomials have Gauss valuation 0,
    // then scale the numerator by t^{-level}
    let num = form
        .num
        .map(include_rational)
        .map(|c| c.mul_monomial(&-&red.level, &Rational::one()));
    let den = form.den.map(include_rational);
    let piece = StarPiece {
        vertex: vertex.to_string(),
        num,
        den,
        marked: form
            .marked
            .iter()
            .map(|(e, p)| (e.clone(), include_point(p)))
            .collect(),
        aux: form.aux.iter().map(include_point).collect(),
        annuli: BTreeMap::new(),
    };
    debug_assert_eq!(gauss_level(&piece)?, red.level);
    Ok(piece)
}

fn val_of(c: &PuiseuxScalar) -> Result<Rational> {
    match c.valuation() {
        Valuation::Finite(v) => Ok(v),
        _ => Err(Error::PrecisionExhausted(format!(
            "valuation of {c} not known"
        ))),
    }
}

/// Outcome of a residue correction: the corrected piece and the valuation
/// margin of the corrections above the form's level (infinite when nothing
/// was corrected).
pub struct Corrected {
    pub piece: StarPiece,
    pub margin: Val,
}

/// Adjusts the residues of a star piece to the exact targets by adding a
/// sum of simple-pole forms `Σ a'_i dz/(z - q_i)`. Targets are keyed by
/// the star's edges; at a boundary vertex the first auxiliary point
/// absorbs the balance. The correction must sit strictly below the form's
/// norm, which pins its Gauss norm at `max |a'_i|`; both facts are checked.
pub fn residue_correct(
    piece: &StarPiece,
    targets: &BTreeMap<EdgeId, PuiseuxScalar>,
    boundary: bool,
) -> Result<Corrected> {
    let level = gauss_level(piece)?;

    // corrections at the marked points of the star
    let mut corrections: Vec<(KPoint, PuiseuxScalar)> = Vec::new();
    let mut total = PuiseuxScalar::zero();
    for (edge, target) in targets {
        let point = piece
            .marked
            .get(edge)
            .ok_or_else(|| Error::Structural(format!("no marked point for edge {edge}")))?;
        let current = piece.residue_at(point)?;
        let delta = target.sub(&current);
        if delta.is_exact_zero() {
            continue;
        }
        total = total.add(&delta);
        corrections.push((point.clone(), delta));
    }

    if !total.is_exact_zero() {
        if boundary {
            let absorber = piece.aux.first().ok_or_else(|| {
                Error::Structural(format!(
                    "boundary piece {} has no auxiliary point to absorb the residue balance",
                    piece.vertex
                ))
            })?;
            corrections.push((absorber.clone(), total.neg()));
        } else {
            return Err(Error::ResidueMismatch(format!(
                "corrections at the interior vertex {} sum to {} instead of zero",
                piece.vertex, total
            )));
        }
    }

    if corrections.is_empty() {
        return Ok(Corrected {
            piece: piece.clone(),
            margin: Val::Infinite,
        });
    }

    // every correction must sit strictly below the form's norm
    let mut min_corr: Option<Rational> = None;
    for (point, delta) in &corrections {
        let v = val_of(delta)?;
        if v <= -&level {
            return Err(Error::ResidueMismatch(format!(
                "target at {:?} disagrees with the current residue already at the graded level \
                 (correction {delta} against level {level})",
                point
            )));
        }
        min_corr = Some(match min_corr {
            None => v,
            Some(m) => m.min(v),
        });
    }
    let min_corr = min_corr.unwrap();

    // η' = Σ a'_i dz/(z - q_i) over the finite corrected points; a
    // correction at infinity is implied by the residue theorem
    let finite: Vec<(&PuiseuxScalar, &PuiseuxScalar)> = corrections
        .iter()
        .filter_map(|(p, d)| match p {
            P1Point::Finite(q) => Some((q, d)),
            P1Point::Infinity => None,
        })
        .collect();
    let mut den_corr = Poly::one();
    for (q, _) in &finite {
        den_corr = den_corr.mul(&Poly::linear_root(*q));
    }
    let mut num_corr: Poly<PuiseuxScalar> = Poly::zero();
    for (i, (_, d)) in finite.iter().enumerate() {
        let mut cof = Poly::constant((*d).clone());
        for (j, (q, _)) in finite.iter().enumerate() {
            if i != j {
                cof = cof.mul(&Poly::linear_root(*q));
            }
        }
        num_corr = num_corr.add(&cof);
    }

    if !num_corr.is_zero() {
        // Gauss norm of the correction form equals the largest correction
        let corr_level = {
            let corr_piece = StarPiece {
                vertex: piece.vertex.clone(),
                num: num_corr.clone(),
                den: den_corr.clone(),
                marked: BTreeMap::new(),
                aux: vec![],
                annuli: BTreeMap::new(),
            };
            gauss_level(&corr_piece)?
        };
        if corr_level != -&min_corr {
            return Err(Error::NormViolation(format!(
                "correction norm level {corr_level} differs from the largest correction \
                 valuation {min_corr} (marked reductions collide?)"
            )));
        }
        if corr_level >= level {
            return Err(Error::NormViolation(format!(
                "correction level {corr_level} is not strictly below the form level {level}"
            )));
        }
    }

    // combined fraction
    let num = piece.num.mul(&den_corr).add(&num_corr.mul(&piece.den));
    let den = piece.den.mul(&den_corr);
    let corrected = StarPiece {
        vertex: piece.vertex.clone(),
        num,
        den,
        marked: piece.marked.clone(),
        aux: piece.aux.clone(),
        annuli: piece.annuli.clone(),
    };

    if gauss_level(&corrected)? != level {
        return Err(Error::NormViolation(format!(
            "correction changed the level of {}",
            piece.vertex
        )));
    }
    // achieved residues equal the targets exactly
    for (edge, target) in targets {
        let achieved = corrected.residue_at_edge(edge)?;
        if !achieved.sub(target).is_exact_zero() {
            return Err(Error::ResidueMismatch(format!(
                "correction at {edge} achieved {achieved} instead of {target}"
            )));
        }
    }

    Ok(Corrected {
        piece: corrected,
        margin: Val::Finite(min_corr + level),
    })
}

fn edge_length(datum: &TropicalReductionDatum, edge: &str) -> Result<Rational> {
    match &datum.complex.edges[edge].length {
        Val::Finite(l) => Ok(l.clone()),
        Val::Infinite => Err(Error::Structural(format!("edge {edge} has infinite length"))),
    }
}

/// The exact `1/n`-th power of a scalar, rational on the leading
/// coefficient.
fn scalar_root(x: &PuiseuxScalar, n: i64) -> Result<PuiseuxScalar> {
    if n > 0 {
        x.nth_root(n)
    } else {
        x.inv()?.nth_root(-n)
    }
}

/// Glues corrected star pieces along the edges of the datum: good
/// coordinates on each side chart, the matching constant `(-β/α)^{1/n}`
/// (or `t^{overlap}` for slope 0), and disc extensions at the legs.
pub fn glue(
    pieces: BTreeMap<VertexId, StarPiece>,
    datum: &TropicalReductionDatum,
    window: i64,
) -> Result<GluedModel> {
    let lf = datum.level_function()?;
    let mut gluings = BTreeMap::new();
    let mut discs = BTreeMap::new();

    for e in datum.complex.bounded_edges_canonical() {
        let op = datum
            .complex
            .opposite(e)
            .ok_or_else(|| Error::Structural(format!("no opposite of {}", e.id)))?;
        let l = edge_length(datum, &e.id)?;
        let tail_piece = pieces
            .get(&e.tail)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", e.tail)))?;
        let head_piece = pieces
            .get(&e.head)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", e.head)))?;

        let form_t = expand_on_annulus(tail_piece, &e.id, window)?;
        let form_h = expand_on_annulus(head_piece, &op.id, window)?;
        let gc_t = good_coordinate(&form_t)?;
        let gc_h = good_coordinate(&form_h)?;

        let n = -lf.slopes[&e.id];
        if gc_t.n != n || gc_h.n != -n {
            return Err(Error::IncompatibleBinomials(format!(
                "edge {}: dominant exponents ({}, {}) do not match the slope data (n = {n})",
                e.id, gc_t.n, gc_h.n
            )));
        }
        for (gc, re_id) in [(&gc_t, &e.id), (&gc_h, &op.id)] {
            let want = &datum.re[re_id];
            let diff = gc.c_0.sub(want);
            if !diff.is_zero_to_prec() {
                return Err(Error::IncompatibleBinomials(format!(
                    "edge {re_id}: residue {} of the normalized form differs from the datum's {}",
                    gc.c_0, want
                )));
            }
        }

        let (a_t, _) = tail_piece.annuli[&e.id].clone();
        let (a_h, _) = head_piece.annuli[&op.id].clone();
        let overlap = &l - &a_t - &a_h;
        let constant = if n == 0 {
            PuiseuxScalar::t_pow(overlap.clone())
        } else {
            let ratio = gc_h.c_n.neg().div(&gc_t.c_n)?;
            scalar_root(&ratio, n)?
        };
        match constant.valuation() {
            Valuation::Finite(v) if v == overlap => {}
            v => {
                return Err(Error::IncompatibleBinomials(format!(
                    "edge {}: matching constant has valuation {v:?}, expected {overlap}",
                    e.id
                )))
            }
        }

        gluings.insert(
            e.id.clone(),
            Gluing {
                edge: e.id.clone(),
                n,
                tail: GluingSide {
                    unit: gc_t.change.unit.clone(),
                    c_n: gc_t.c_n.clone(),
                    residue: gc_t.c_0.clone(),
                },
                head: GluingSide {
                    unit: gc_h.change.unit.clone(),
                    c_n: gc_h.c_n.clone(),
                    residue: gc_h.c_0.clone(),
                },
                constant,
            },
        );
    }

    for leg in datum.complex.legs() {
        let piece = pieces
            .get(&leg.tail)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", leg.tail)))?;
        let form = expand_on_annulus(piece, &leg.id, window)?;
        let gc = good_coordinate(&form)?;
        let n = -lf.slopes[&leg.id];
        if gc.n != n {
            return Err(Error::IncompatibleBinomials(format!(
                "leg {}: dominant exponent {} does not match the slope data (n = {n})",
                leg.id, gc.n
            )));
        }
        let diff = gc.c_0.sub(&datum.re[&leg.id]);
        if !diff.is_zero_to_prec() {
            return Err(Error::IncompatibleBinomials(format!(
                "leg {}: residue {} differs from the datum's {}",
                leg.id, gc.c_0, datum.re[&leg.id]
            )));
        }
        discs.insert(
            leg.id.clone(),
            DiscExtension {
                n,
                unit: gc.change.unit.clone(),
                c_n: gc.c_n.clone(),
                residue: gc.c_0.clone(),
            },
        );
    }

    let model = GluedModel {
        complex: datum.complex.clone(),
        pieces,
        gluings,
        discs,
    };
    model.chart_invariants()?;
    Ok(model)
}

/// Lifts a validated genus-0 reduction datum to a glued model whose
/// tropicalization is the input: local lifts, residue correction, chart
/// selection and gluing.
pub fn lift(datum: &TropicalReductionDatum, window: i64) -> Result<GluedModel> {
    let report = crate::complex::validate(datum);
    if !report.passed() {
        let failed: Vec<String> = report
            .failures()
            .map(|e| format!("{} @ {}", e.check, e.location))
            .collect();
        return Err(Error::DatumInvalid(failed.join("; ")));
    }
    let lf = datum.level_function()?;

    let mut pieces = BTreeMap::new();
    for v in datum.complex.type2_vertices() {
        let red = &datum.reductions[&v.id];
        let piece = local_lift(&v.id, v.genus(), red)?;

        let targets: BTreeMap<EdgeId, PuiseuxScalar> = datum
            .complex
            .star(&v.id)
            .iter()
            .map(|e| (e.id.clone(), datum.re[&e.id].clone()))
            .collect();
        let Corrected { piece, margin } = residue_correct(&piece, &targets, v.is_boundary())?;

        // chart annuli: edges take the margined half-split of the edge
        // length; legs are kept shallow enough that correction tails cannot
        // disturb dominance
        let mut piece = piece;
        for e in datum.complex.star(&v.id) {
            let chart = if e.is_leg() {
                let n_leg = -lf.slopes[&e.id];
                let depth = match (&margin, n_leg) {
                    (Val::Finite(m), n) if n >= 2 => {
                        let cap = m / &Rational::from_int(2 * (n - 1));
                        cap.min(Rational::one())
                    }
                    _ => Rational::one(),
                };
                (
                    Rational::new(3, 8) * depth.clone(),
                    Rational::new(5, 8) * depth,
                )
            } else {
                let l = edge_length(datum, &e.id)?;
                (Rational::new(3, 8) * l.clone(), Rational::new(5, 8) * l)
            };
            piece.annuli.insert(e.id.clone(), chart);
        }
        pieces.insert(v.id.clone(), piece);
    }

    glue(pieces, datum, window)
}

/// Exact field-by-field comparison of two data: equal complexes, equal
/// levels, the same reduced differentials and branch points, and exactly
/// equal residue functions.
pub fn datum_matches(a: &TropicalReductionDatum, b: &TropicalReductionDatum) -> bool {
    if a.complex != b.complex {
        return false;
    }
    if a.reductions.len() != b.reductions.len() || a.re.len() != b.re.len() {
        return false;
    }
    for (v, ra) in &a.reductions {
        let Some(rb) = b.reductions.get(v) else {
            return false;
        };
        if ra.level != rb.level {
            return false;
        }
        match (&ra.form, &rb.form) {
            (ReductionForm::P1(fa), ReductionForm::P1(fb)) => {
                if !fa.same_differential(fb) {
                    return false;
                }
            }
            (fa, fb) => {
                if fa != fb {
                    return false;
                }
            }
        }
    }
    for (e, va) in &a.re {
        let Some(vb) = b.re.get(e) else {
            return false;
        };
        if !va.sub(vb).is_exact_zero() {
            return false;
        }
    }
    true
}

/// Lift, tropicalize back, and compare with the input exactly.
pub fn roundtrip(datum: &TropicalReductionDatum, window: i64) -> Result<bool> {
    let model = lift(datum, window)?;
    let back = crate::model::tropicalize(&model, window)?;
    Ok(datum_matches(&back, datum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::tropicalize;

    #[test]
    fn single_vertex_roundtrip() {
        let datum = fixtures::p1_three_legs();
        assert!(roundtrip(&datum, DEFAULT_WINDOW).unwrap());
    }

    #[test]
    fn rejects_invalid_datum() {
        let (_, _, bad) = fixtures::all_invalid().remove(3);
        assert!(matches!(
            lift(&bad, DEFAULT_WINDOW),
            Err(Error::DatumInvalid(_))
        ));
    }

    #[test]
    fn rejects_positive_genus() {
        let datum = fixtures::grc_two_level();
        assert!(lift(&datum, DEFAULT_WINDOW).is_err());
    }

    #[test]
    fn residue_correction_is_exact() {
        let datum = fixtures::p1_three_legs();
        let piece = local_lift("x", 0, &datum.reductions["x"]).unwrap();
        // shift the residues by (t, -t, 0)
        let t = PuiseuxScalar::t_pow(Rational::one());
        let mut targets = BTreeMap::new();
        targets.insert("l0".to_string(), datum.re["l0"].add(&t));
        targets.insert("l1".to_string(), datum.re["l1"].sub(&t));
        targets.insert("linf".to_string(), datum.re["linf"].clone());
        let corrected = residue_correct(&piece, &targets, false).unwrap();
        for (e, want) in &targets {
            let got = corrected.piece.residue_at_edge(e).unwrap();
            assert!(got.sub(want).is_exact_zero(), "{e}: {got}");
        }
        assert_eq!(corrected.margin, Val::Finite(Rational::one()));
        // the reduction is untouched
        let red0 = crate::model::scaled_reduction(&piece).unwrap();
        let red1 = crate::model::scaled_reduction(&corrected.piece).unwrap();
        assert!(red0.same_differential(&red1));
    }

    #[test]
    fn residue_correction_rejects_graded_mismatch() {
        let datum = fixtures::p1_three_legs();
        let piece = local_lift("x", 0, &datum.reductions["x"]).unwrap();
        let mut targets = BTreeMap::new();
        // wrong leading coefficient at l0
        targets.insert("l0".to_string(), PuiseuxScalar::from_int(-2));
        targets.insert("l1".to_string(), PuiseuxScalar::from_int(2));
        targets.insert("linf".to_string(), PuiseuxScalar::zero());
        assert!(matches!(
            residue_correct(&piece, &targets, false),
            Err(Error::ResidueMismatch(_))
        ));
    }

    #[test]
    fn two_vertex_chain_roundtrips() {
        for slope in [-1, 0, 1, 2] {
            let datum = fixtures::two_vertex_chain(slope);
            assert!(
                roundtrip(&datum, DEFAULT_WINDOW).unwrap(),
                "slope {slope} chain failed to round trip"
            );
        }
    }

    #[test]
    fn lifted_models_tropicalize_to_valid_data() {
        for (name, datum) in fixtures::all_liftable() {
            let model = lift(&datum, DEFAULT_WINDOW).unwrap();
            let back = tropicalize(&model, DEFAULT_WINDOW).unwrap();
            let rep = crate::complex::validate(&back);
            assert!(rep.passed(), "{name}: {rep}");
        }
    }
}
