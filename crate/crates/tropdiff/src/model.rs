//! Explicit glued analytic models: genus-0 star pieces carrying rational
//! differentials over the ground field, chart annuli around their marked
//! points, and gluing data along edges. Tropicalization reads a reduction
//! datum off such a model.

use std::collections::BTreeMap;

use crate::annulus::{AnnulusForm, AnnulusSeries, Skeleton};
use crate::complex::{
    CurveComplex, EdgeId, ExplicitP1Form, QPoint, ReductionForm, ResidueFunction,
    TropicalReductionDatum, VertexId, VertexReduction,
};
use crate::error::{Error, Result};
use crate::poly::{series_div, P1Point, Poly, RatDifferential};
use crate::puiseux::{PuiseuxScalar, Valuation};
use crate::rational::{Rational, Val};

/// A point of the projective line over the ground field.
pub type KPoint = P1Point<PuiseuxScalar>;

fn k_inv(c: &PuiseuxScalar) -> Result<PuiseuxScalar> {
    c.inv()
}

/// Known valuation of a scalar, or an error when it is not certified.
fn val_known(c: &PuiseuxScalar) -> Result<Rational> {
    match c.valuation() {
        Valuation::Finite(v) => Ok(v),
        Valuation::Infinite => Err(Error::PrecisionExhausted("valuation of zero".into())),
        Valuation::Unknown => Err(Error::PrecisionExhausted(format!(
            "valuation of {c} not known"
        ))),
    }
}

/// Smallest coefficient valuation of a nonzero polynomial (its Gauss
/// valuation at the unit disc).
fn min_coeff_val(p: &Poly<PuiseuxScalar>) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for c in p.coeffs() {
        if c.is_exact_zero() {
            continue;
        }
        let v = val_known(c)?;
        best = Some(match best {
            None => v,
            Some(b) => b.min(v),
        });
    }
    best.ok_or(Error::ZeroForm)
}

/// One star-shaped chart of a glued model: the vertex it sits over, a
/// rational differential `(num/den) dz`, lifted marked points for the
/// star's branches (plus auxiliary points at a boundary vertex), and the
/// chart annulus `val(z - q) ∈ [outer, inner]` around each marked point.
#[derive(Clone, PartialEq, Debug)]
pub struct StarPiece {
    pub vertex: VertexId,
    pub num: Poly<PuiseuxScalar>,
    pub den: Poly<PuiseuxScalar>,
    pub marked: BTreeMap<EdgeId, KPoint>,
    pub aux: Vec<KPoint>,
    pub annuli: BTreeMap<EdgeId, (Rational, Rational)>,
}

impl StarPiece {
    pub fn differential(&self) -> Result<RatDifferential<PuiseuxScalar>> {
        RatDifferential::new(self.num.clone(), self.den.clone())
    }

    pub fn all_points(&self) -> Vec<KPoint> {
        let mut pts: Vec<KPoint> = self.marked.values().cloned().collect();
        pts.extend(self.aux.iter().cloned());
        pts
    }

    pub fn residue_at(&self, p: &KPoint) -> Result<PuiseuxScalar> {
        self.differential()?.residue_at(p, &k_inv)
    }

    pub fn residue_at_edge(&self, e: &str) -> Result<PuiseuxScalar> {
        let p = self
            .marked
            .get(e)
            .ok_or_else(|| Error::Structural(format!("no marked point for edge {e}")))?;
        self.residue_at(p)
    }
}

/// The level of the piece's form at its vertex: the log of the form's norm
/// at the Gauss point, read off a unit-denominator normal form.
pub fn gauss_level(piece: &StarPiece) -> Result<Rational> {
    if piece.num.is_zero() {
        return Err(Error::ZeroForm);
    }
    let num_min = min_coeff_val(&piece.num)?;
    let den_min = min_coeff_val(&piece.den)?;
    Ok(-(num_min - den_min))
}

fn reduce_coeff(c: &PuiseuxScalar, shift: &Rational) -> Result<Rational> {
    c.coeff(shift).ok_or_else(|| {
        Error::PrecisionExhausted(format!("coefficient of t^{shift} in {c} not known"))
    })
}

fn reduce_point(p: &KPoint) -> Result<QPoint> {
    match p {
        P1Point::Infinity => Ok(P1Point::Infinity),
        P1Point::Finite(s) => match s.valuation() {
            Valuation::Finite(v) if v.is_negative() => Ok(P1Point::Infinity),
            Valuation::Infinite => Ok(P1Point::Finite(Rational::zero())),
            Valuation::Finite(_) => Ok(P1Point::Finite(reduce_coeff(s, &Rational::zero())?)),
            Valuation::Unknown => Err(Error::PrecisionExhausted(format!(
                "marked point {s} has unknown reduction"
            ))),
        },
    }
}

/// The scaled reduction of the piece's form: normalize the denominator to
/// Gauss valuation zero, scale the numerator to Gauss valuation zero, and
/// reduce all coefficients and marked points to the residue field.
pub fn scaled_reduction(piece: &StarPiece) -> Result<ExplicitP1Form> {
    if piece.num.is_zero() {
        return Err(Error::ZeroForm);
    }
    let num_min = min_coeff_val(&piece.num)?;
    let den_min = min_coeff_val(&piece.den)?;
    let num = piece
        .num
        .map(|c| c.mul_monomial(&-&num_min, &Rational::one()))
        .map(|c| reduce_coeff(&c, &Rational::zero()).unwrap_or_else(|_| Rational::zero()));
    let den = piece
        .den
        .map(|c| c.mul_monomial(&-&den_min, &Rational::one()))
        .map(|c| reduce_coeff(&c, &Rational::zero()).unwrap_or_else(|_| Rational::zero()));
    let mut marked = BTreeMap::new();
    for (e, p) in &piece.marked {
        marked.insert(e.clone(), reduce_point(p)?);
    }
    let mut aux = Vec::new();
    for p in &piece.aux {
        aux.push(reduce_point(p)?);
    }
    Ok(ExplicitP1Form {
        num,
        den,
        marked,
        aux,
    })
}

/// Valuation of the Gauss norm of `p` on the disc `val(w) >= x` after the
/// shift `z = q + w`: `min_k (val(p_k) + k·x)` over the shifted
/// coefficients.
fn gauss_val_at(shifted: &Poly<PuiseuxScalar>, x: &Rational) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for (k, c) in shifted.coeffs().iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        let v = val_known(c)? + Rational::from_int(k as i64) * x.clone();
        best = Some(match best {
            None => v,
            Some(b) => b.min(v),
        });
    }
    best.ok_or(Error::ZeroForm)
}

/// Laurent expansion of the piece's form on the chart annulus around the
/// marked point of `edge`, in the normalized coordinate: the result lives
/// on the skeleton `[0, inner - outer]` and its window is `[.., window]`.
///
/// The expansion is exact on the computed coefficients; everything outside
/// carries the certified bound given by the form's Gauss norm at the two
/// chart radii.
pub fn expand_on_annulus(piece: &StarPiece, edge: &str, window: i64) -> Result<AnnulusForm> {
    let q = piece
        .marked
        .get(edge)
        .ok_or_else(|| Error::Structural(format!("no marked point for edge {edge}")))?;
    let (outer, inner) = piece
        .annuli
        .get(edge)
        .cloned()
        .ok_or_else(|| Error::Structural(format!("no chart annulus for edge {edge}")))?;
    if !(outer.is_positive() && inner > outer) {
        return Err(Error::Structural(format!(
            "chart radii for {edge} must satisfy 0 < outer < inner, got ({outer}, {inner})"
        )));
    }

    // series data in the w chart: the form is w^{base}·(num_s/den_s)·dw/w
    // with den_s(0) invertible
    let (base, num_s, den_s) = match q {
        P1Point::Finite(q) => {
            let (m_den, den_cof) = piece.den.multiplicity(q);
            let (m_num, num_cof) = piece.num.multiplicity(q);
            let base = 1 + m_num as i64 - m_den as i64;
            (base, num_cof.shift(q), den_cof.shift(q))
        }
        P1Point::Infinity => {
            let dn = piece.num.degree().ok_or(Error::ZeroForm)? as i64;
            let dd = piece.den.degree().map(|d| d as i64).unwrap_or(0);
            // f(z) dz = -w^{dd-dn-1}·(num_rev/den_rev)·dw/w in w = 1/z
            (
                dd - dn - 1,
                piece.num.reversed().neg(),
                piece.den.reversed(),
            )
        }
    };
    if den_s.coeff(0).is_zero_to_prec() {
        return Err(Error::PoleInAnnulus(format!(
            "denominator vanishes at the marked point of {edge} beyond its multiplicity"
        )));
    }

    let len = (window - base + 1).max(1) as usize;
    let series = series_div(&num_s, &den_s, len, &k_inv)?;

    // normalized chart coordinate: index i carries an extra t^{outer·i}
    let length = &inner - &outer;
    let skeleton = Skeleton {
        length: length.clone(),
        closed: [false, false],
    };
    let mut coeffs = Vec::new();
    for (k, c) in series.coeffs().iter().enumerate() {
        let i = base + k as i64;
        if i > window {
            break;
        }
        let scaled = c.mul_monomial(&(Rational::from_int(i) * outer.clone()), &Rational::one());
        coeffs.push((i, scaled));
    }
    // indices below the leading exponent are exactly zero, so the window
    // extends down to them
    let ann = AnnulusSeries::new(skeleton, (base.min(0), window), coeffs)?;

    // certified bound for the tail: the form's Gauss valuation at the two
    // chart radii bounds every coefficient there
    let bound = {
        let v_at = |x: &Rational| -> Result<Rational> {
            // val of the form at val(w) = x: parts from w^{base-1}, num, den
            // and dw (the chart twist is already inside num_s for infinity)
            let num_v = gauss_val_at(&num_s, x)?;
            let den_v = gauss_val_at(&den_s, x)?;
            Ok(num_v - den_v + Rational::from_int(base) * x.clone())
        };
        // normalized coordinate: positions 0 and length correspond to
        // val(w) = outer and inner
        (
            Val::Finite(v_at(&outer)?),
            Val::Finite(v_at(&inner)?),
        )
    };
    let form = AnnulusForm::new(ann.with_bound(bound));

    // no zeros or poles may interfere on the chart
    form.dominant_index()
        .map_err(|e| Error::PoleInAnnulus(format!("edge {edge}: {e}")))?;
    Ok(form)
}

/// One side of an edge gluing: the good-coordinate unit on the side's
/// chart (in the normalized chart coordinate) and the binomial data the
/// normalization reached.
#[derive(Clone, PartialEq, Debug)]
pub struct GluingSide {
    pub unit: AnnulusSeries,
    pub c_n: PuiseuxScalar,
    pub residue: PuiseuxScalar,
}

/// Gluing data along a bounded edge: good coordinates on both side charts
/// and the matching constant `c` with `t_mid = c·s_head^{-1}` relating the
/// tail-side mid coordinate to the head side.
#[derive(Clone, PartialEq, Debug)]
pub struct Gluing {
    pub edge: EdgeId,
    /// Dominant exponent on the tail side (minus the level slope).
    pub n: i64,
    pub tail: GluingSide,
    pub head: GluingSide,
    pub constant: PuiseuxScalar,
}

/// Disc extension at a leg: the binomial form continues into the glued
/// disc.
#[derive(Clone, PartialEq, Debug)]
pub struct DiscExtension {
    pub n: i64,
    pub unit: AnnulusSeries,
    pub c_n: PuiseuxScalar,
    pub residue: PuiseuxScalar,
}

/// A glued analytic model: pieces over the type-2 vertices plus gluing
/// data along bounded edges (keyed by the canonical orientation) and disc
/// extensions at legs.
#[derive(Clone, PartialEq, Debug)]
pub struct GluedModel {
    pub complex: CurveComplex,
    pub pieces: BTreeMap<VertexId, StarPiece>,
    pub gluings: BTreeMap<EdgeId, Gluing>,
    pub discs: BTreeMap<EdgeId, DiscExtension>,
}

impl GluedModel {
    /// Chart consistency along every bounded edge: per side the radii sum
    /// to the edge length, the chart is narrower than half the edge (its
    /// multiplicative modulus exceeds the square root of the edge's), and
    /// the two charts overlap.
    pub fn chart_invariants(&self) -> Result<()> {
        for e in self.complex.bounded_edges_canonical() {
            let op = self
                .complex
                .opposite(e)
                .ok_or_else(|| Error::Structural(format!("no opposite of {}", e.id)))?;
            let l = match &e.length {
                Val::Finite(l) => l.clone(),
                Val::Infinite => {
                    return Err(Error::Structural(format!("bounded edge {} infinite", e.id)))
                }
            };
            let tail_piece = self
                .pieces
                .get(&e.tail)
                .ok_or_else(|| Error::Structural(format!("no piece at {}", e.tail)))?;
            let head_piece = self
                .pieces
                .get(&e.head)
                .ok_or_else(|| Error::Structural(format!("no piece at {}", e.head)))?;
            let (a, b) = tail_piece
                .annuli
                .get(&e.id)
                .ok_or_else(|| Error::Structural(format!("no chart for {}", e.id)))?;
            let (a2, b2) = head_piece
                .annuli
                .get(&op.id)
                .ok_or_else(|| Error::Structural(format!("no chart for {}", op.id)))?;
            for (x, y) in [(a, b), (a2, b2)] {
                if &(x + y) != &l {
                    return Err(Error::Structural(format!(
                        "chart radii of {} must sum to the edge length {l}, got {x}+{y}",
                        e.id
                    )));
                }
                let width = y - x;
                if width.clone() + width >= l {
                    return Err(Error::Structural(format!(
                        "chart of {} must be narrower than half the edge length",
                        e.id
                    )));
                }
            }
            // overlap in edge coordinates: tail chart [a, b], head chart
            // [L-b2, L-a2] = [a2, b2] after the radii-sum identity
            if a.clone().max(a2.clone()) >= b.clone().min(b2.clone()) {
                return Err(Error::Structural(format!(
                    "charts of {} do not overlap",
                    e.id
                )));
            }
        }
        Ok(())
    }

    /// Residue of the form along every oriented edge and leg: the index-0
    /// coefficient of the expansion on the tail side's chart.
    pub fn residue_function(&self, window: i64) -> Result<ResidueFunction> {
        let mut re = BTreeMap::new();
        for e in self.complex.edges.values() {
            let piece = self
                .pieces
                .get(&e.tail)
                .ok_or_else(|| Error::Structural(format!("no piece at {}", e.tail)))?;
            let form = expand_on_annulus(piece, &e.id, window)?;
            re.insert(e.id.clone(), form.residue()?);
        }
        Ok(re)
    }

    /// Exact vanishing of the residue sum around a vertex (branches into
    /// glued discs are regular and contribute nothing).
    pub fn harmonicity_check(&self, vertex: &str, window: i64) -> Result<bool> {
        let piece = self
            .pieces
            .get(vertex)
            .ok_or_else(|| Error::Structural(format!("no piece at {vertex}")))?;
        let mut sum = PuiseuxScalar::zero();
        for e in self.complex.star(vertex) {
            let form = expand_on_annulus(piece, &e.id, window)?;
            sum = sum.add(&form.residue()?);
        }
        Ok(sum.is_exact_zero())
    }
}

/// Reads the tropical reduction datum off a model: levels and scaled
/// reductions from the pieces, the residue function from the chart
/// expansions. The output of a structurally valid model passes validation.
pub fn tropicalize(model: &GluedModel, window: i64) -> Result<TropicalReductionDatum> {
    let mut reductions = BTreeMap::new();
    for v in model.complex.type2_vertices() {
        let piece = model
            .pieces
            .get(&v.id)
            .ok_or_else(|| Error::Structural(format!("no piece at {}", v.id)))?;
        let level = gauss_level(piece)?;
        let form = scaled_reduction(piece)?;
        reductions.insert(
            v.id.clone(),
            VertexReduction {
                level,
                form: ReductionForm::P1(form),
            },
        );
    }
    let re = model.residue_function(window)?;
    Ok(TropicalReductionDatum {
        complex: model.complex.clone(),
        reductions,
        re,
    })
}

/// Pulls the mid-annulus binomial through the recorded matching constant
/// and compares with the head side's binomial: the gluing is consistent
/// when they agree coefficient-exactly.
pub fn gluing_consistent(model: &GluedModel, edge: &str) -> Result<bool> {
    let g = model
        .gluings
        .get(edge)
        .ok_or_else(|| Error::Structural(format!("no gluing for {edge}")))?;
    let head_skel = g.head.unit.skeleton().clone();
    // mid form in the tail-side good coordinate, over the head chart
    let mid = AnnulusForm::binomial(
        head_skel.reversed(),
        g.n,
        g.tail.c_n.clone(),
        g.tail.residue.clone(),
    );
    let change = crate::annulus::CoordinateChange::reversing(
        AnnulusSeries::one(head_skel.clone()),
        g.constant.clone(),
    )?;
    let pulled = crate::annulus::pullback(&mid, &change)?;
    let expected = AnnulusForm::binomial(head_skel, -g.n, g.head.c_n.clone(), g.head.residue.clone());
    Ok(pulled.series.agrees_on_known(&expected.series)
        && pulled
            .residue()?
            .agrees_with(&expected.residue()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn kpoly(coeffs: &[i64]) -> Poly<PuiseuxScalar> {
        Poly::from_coeffs(coeffs.iter().map(|&n| PuiseuxScalar::from_int(n)).collect())
    }

    fn simple_piece() -> StarPiece {
        // dz/(z(z-1)) with marked points 0, 1, infinity
        StarPiece {
            vertex: "x".into(),
            num: kpoly(&[1]),
            den: kpoly(&[0, -1, 1]),
            marked: BTreeMap::from([
                ("l0".into(), P1Point::Finite(PuiseuxScalar::zero())),
                ("l1".into(), P1Point::Finite(PuiseuxScalar::one())),
                ("linf".into(), P1Point::Infinity),
            ]),
            aux: vec![],
            annuli: BTreeMap::from([
                ("l0".into(), (Rational::new(3, 8), Rational::new(5, 8))),
                ("l1".into(), (Rational::new(3, 8), Rational::new(5, 8))),
                ("linf".into(), (Rational::new(3, 8), Rational::new(5, 8))),
            ]),
        }
    }

    #[test]
    fn gauss_level_examples() {
        let p = simple_piece();
        assert_eq!(gauss_level(&p).unwrap(), qi(0));

        let mut scaled = p.clone();
        scaled.num = Poly::from_coeffs(vec![PuiseuxScalar::t_pow(qi(1))]);
        assert_eq!(gauss_level(&scaled).unwrap(), qi(-1));

        let mut shifted = p.clone();
        shifted.num = Poly::from_coeffs(vec![PuiseuxScalar::t_pow(qi(1)), PuiseuxScalar::one()]);
        shifted.den = kpoly(&[1]);
        assert_eq!(gauss_level(&shifted).unwrap(), qi(0));
    }

    #[test]
    fn scaled_reduction_drops_tails() {
        let mut p = simple_piece();
        // (1 + t)/(z(z-1)) reduces to 1/(z(z-1))
        p.num = Poly::from_coeffs(vec![PuiseuxScalar::one().add(&PuiseuxScalar::t_pow(qi(1)))]);
        let red = scaled_reduction(&p).unwrap();
        assert_eq!(red.num, Poly::from_coeffs(vec![qi(1)]));
        assert_eq!(
            red.den,
            Poly::from_coeffs(vec![qi(0), qi(-1), qi(1)])
        );
    }

    #[test]
    fn expansion_at_simple_pole() {
        // around 0: (-1 - w - w^2 - ...) dw/w, residue -1
        let p = simple_piece();
        let form = expand_on_annulus(&p, "l0", 6).unwrap();
        let idx0 = form.residue().unwrap();
        assert!(idx0.agrees_with(&PuiseuxScalar::from_int(-1)));
        // normalized coefficient at index 1 carries t^{3/8}
        let c1 = form.series.known_at(1).unwrap();
        assert!(c1.agrees_with(&PuiseuxScalar::monomial(
            Rational::new(3, 8),
            qi(-1)
        )));
        assert_eq!(form.dominant_index().unwrap(), 0);
    }

    #[test]
    fn expansion_at_infinity() {
        // f = 1: dz = (-w^{-1}) dw/w at infinity
        let mut p = simple_piece();
        p.num = kpoly(&[1]);
        p.den = kpoly(&[1]);
        p.marked = BTreeMap::from([("linf".into(), P1Point::Infinity)]);
        p.annuli = BTreeMap::from([(
            "linf".into(),
            (Rational::new(3, 8), Rational::new(5, 8)),
        )]);
        let form = expand_on_annulus(&p, "linf", 6).unwrap();
        assert_eq!(form.dominant_index().unwrap(), -1);
        let c = form.series.known_at(-1).unwrap();
        assert!(c.agrees_with(&PuiseuxScalar::monomial(Rational::new(-3, 8), qi(-1))));
        assert!(form.residue().unwrap().agrees_with(&PuiseuxScalar::zero()));
    }

    #[test]
    fn residues_sum_to_zero_on_p1() {
        let p = simple_piece();
        let mut sum = PuiseuxScalar::zero();
        for leg in ["l0", "l1", "linf"] {
            sum = sum.add(&expand_on_annulus(&p, leg, 8).unwrap().residue().unwrap());
        }
        assert!(sum.is_exact_zero());
    }
}
