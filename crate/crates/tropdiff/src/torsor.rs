//! Good formal coordinates at a point and the group acting on them.
//!
//! For a form `(c_n t^n + r) dt/t` over the residue field, the good formal
//! coordinates form a torsor under `G_n = 𝔾_m ⋉ₙ 𝔾_a` with the product
//! `(λ, μ)·(λ', μ') = (λλ', μ + λ^l μ')`, `l = -n`; the action is free for
//! `n < 0` and factors through `𝔾_m` otherwise. The coefficients of the
//! coordinate attached to a group element are solved from the form
//! identity, order by order, and are determined by the 1- and `(l+1)`-jets.
//!
//! On the two sides of a glued edge the reductions of good annulus
//! coordinates are matched by inverting the coordinate through the gluing
//! constant; this is the map [`phi_e`].

use serde::{Deserialize, Serialize};

use crate::annulus::AnnulusSeries;
use crate::error::{Error, Result};
use crate::model::GluedModel;
use crate::poly::{series_mul, Poly};
use crate::puiseux::{GradedScalar, PuiseuxScalar, Valuation};
use crate::rational::{Rational, Val};

/// The binomial form `(c_n t^n + r) dt/t` over the residue field.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FormalForm {
    pub n: i64,
    pub c_n: Rational,
    pub r: Rational,
}

impl FormalForm {
    pub fn new(n: i64, c_n: Rational, r: Rational) -> Self {
        assert!(!c_n.is_zero(), "leading coefficient must be nonzero");
        FormalForm { n, c_n, r }
    }

    pub fn l(&self) -> i64 {
        -self.n
    }
}

/// A good formal coordinate as a truncated series `Σ_{i>=1} a_i s^i`;
/// `coeffs[k]` is `a_{k+1}`.
#[derive(Clone, PartialEq, Debug)]
pub struct FormalGoodCoordinate {
    pub coeffs: Vec<Rational>,
}

impl FormalGoodCoordinate {
    pub fn a(&self, i: usize) -> Rational {
        assert!(i >= 1);
        self.coeffs.get(i - 1).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// The series with a zero constant term, for polynomial arithmetic.
    fn as_poly(&self) -> Poly<Rational> {
        let mut v = vec![Rational::zero()];
        v.extend(self.coeffs.iter().cloned());
        Poly::from_coeffs(v)
    }
}

/// An element `(λ, μ)` of `𝔾_m ⋉ₙ 𝔾_a`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GnElement {
    pub lambda: Rational,
    pub mu: Rational,
}

impl GnElement {
    pub fn new(lambda: Rational, mu: Rational) -> Self {
        assert!(!lambda.is_zero());
        GnElement { lambda, mu }
    }

    pub fn identity() -> Self {
        GnElement {
            lambda: Rational::one(),
            mu: Rational::zero(),
        }
    }
}

/// The product `σσ' = (λλ', μ + λ^l μ')`.
pub fn gn_compose(a: &GnElement, b: &GnElement, l: i64) -> GnElement {
    GnElement {
        lambda: &a.lambda * &b.lambda,
        mu: &a.mu + &(a.lambda.pow(l).expect("nonzero lambda") * b.mu.clone()),
    }
}

/// The inverse `(λ^{-1}, -λ^{-l} μ)`, solved from the product law.
pub fn gn_inverse(a: &GnElement, l: i64) -> GnElement {
    let lambda_inv = a.lambda.recip().expect("nonzero lambda");
    GnElement {
        mu: -(lambda_inv.pow(l).expect("nonzero") * a.mu.clone()),
        lambda: lambda_inv,
    }
}

/// The good formal coordinate attached to a group element: `a_1 = λ`,
/// `a_2 = … = a_l = 0`, `a_{l+1} = λμ`, and every further coefficient
/// solved from the coefficient comparison of the form identity. For
/// `n >= 0` the action factors through `𝔾_m` and the coordinate is `λ·s`.
pub fn act(sigma: &GnElement, form: &FormalForm, order: i64) -> Result<FormalGoodCoordinate> {
    if form.n >= 0 {
        if order < 1 {
            return Err(Error::TruncationTooSmall(order));
        }
        let mut coeffs = vec![Rational::zero(); order as usize];
        coeffs[0] = sigma.lambda.clone();
        return Ok(FormalGoodCoordinate { coeffs });
    }
    let l = form.l();
    if order <= l + 1 {
        return Err(Error::TruncationTooSmall(order));
    }
    let e = &form.c_n;
    let r = &form.r;
    let c = e * &sigma.lambda.pow(l)?;

    let n_usize = order as usize;
    let mut coeffs = vec![Rational::zero(); n_usize];
    coeffs[0] = sigma.lambda.clone();
    coeffs[(l + 1 - 1) as usize] = &sigma.lambda * &sigma.mu;

    for k in 2..=order {
        if k == l + 1 {
            continue;
        }
        // powers of the partial sum t_{<k}; a_k first contributes to the
        // coefficient of s^{k+l} through (l+1)·a_1^l·a_k
        let partial = {
            let mut v = vec![Rational::zero()];
            v.extend(coeffs.iter().take((k - 1) as usize).cloned());
            Poly::from_coeffs(v)
        };
        let len = (k + l + 1) as usize;
        let mut q = Poly::one();
        for _ in 0..=l {
            q = series_mul(&q, &partial, len);
        }
        let q_kl = q.coeff((k + l) as usize);
        let q_k = q.coeff(k as usize);
        let weight = Rational::new(l + 1 - k, l + 1);
        let numer = e * &q_kl + r * &q_k * weight;
        let denom = &c * &Rational::from_int(k - l - 1);
        coeffs[(k - 1) as usize] = numer / denom;
    }
    Ok(FormalGoodCoordinate { coeffs })
}

/// Residual of the defining identity `(c + r·t^l)·t' = u^{l+1}·(e + r·s^l)`
/// with `u = t/s`, as a polynomial truncated at `s^{order-1}`. Vanishes for
/// the output of [`act`]; used as an independent check.
pub fn form_identity_residual(
    form: &FormalForm,
    t: &FormalGoodCoordinate,
    lambda: &Rational,
) -> Poly<Rational> {
    let l = form.l();
    assert!(l > 0);
    let len = t.order();
    let c = &form.c_n * &lambda.pow(l).expect("nonzero lambda");
    let tp = t.as_poly();
    let u = Poly::from_coeffs(t.coeffs.clone());
    let mut t_l = Poly::one();
    for _ in 0..l {
        t_l = series_mul(&t_l, &tp, len);
    }
    let mut u_l1 = Poly::one();
    for _ in 0..=l {
        u_l1 = series_mul(&u_l1, &u, len);
    }
    let lhs = series_mul(
        &Poly::constant(c).add(&t_l.scale(&form.r)),
        &tp.derivative(),
        len,
    );
    let rs_l = {
        let mut v = vec![Rational::zero(); l as usize];
        v.push(form.r.clone());
        Poly::from_coeffs(v)
    };
    let rhs = series_mul(&u_l1, &Poly::constant(form.c_n.clone()).add(&rs_l), len);
    lhs.sub(&rhs)
}

/// Checks `σ'(σ(s)) = (σσ')(s)` by formal substitution up to the given
/// order.
pub fn verify_group_law(
    form: &FormalForm,
    sigma: &GnElement,
    sigma_prime: &GnElement,
    order: i64,
) -> Result<bool> {
    let t1 = act(sigma, form, order)?;
    let form1 = FormalForm {
        n: form.n,
        c_n: &form.c_n * &sigma.lambda.pow(form.l())?,
        r: form.r.clone(),
    };
    let t2 = act(sigma_prime, &form1, order)?;
    let composed = t2
        .as_poly()
        .compose_mod(&t1.as_poly(), (order + 1) as usize);
    let direct = act(&gn_compose(sigma, sigma_prime, form.l()), form, order)?;
    Ok(composed == direct.as_poly())
}

/// Series reversion over the rationals: `q` with `q(p(s)) = s` up to the
/// truncation, for `p` with `p(0) = 0` and invertible linear coefficient.
fn reversion(p: &Poly<Rational>, len: usize) -> Result<Poly<Rational>> {
    if !p.coeff(0).is_zero() || p.coeff(1).is_zero() {
        return Err(Error::NotDominant(
            "reversion needs a series with a unit linear term".into(),
        ));
    }
    let a1_inv = p.coeff(1).recip()?;
    let mut q = Poly::from_coeffs(vec![Rational::zero(), a1_inv.clone()]);
    for _ in 2..len {
        // one coefficient per pass: correct the lowest failing order
        let comp = q.compose_mod(p, len);
        let residual = comp.sub(&Poly::from_coeffs(vec![Rational::zero(), Rational::one()]));
        let Some(k) = residual
            .coeffs()
            .iter()
            .position(|c| !c.is_zero())
        else {
            break;
        };
        // residual starts at s^k: cancel it through q_k
        let fix = &residual.coeff(k) * &a1_inv.pow(k as i64)?;
        let mut corr = vec![Rational::zero(); k + 1];
        corr[k] = -fix;
        q = q.add(&Poly::from_coeffs(corr));
    }
    Ok(q)
}

/// The unique group element carrying one good formal coordinate to
/// another (for `n < 0`): solved from the 1- and `(l+1)`-jets of
/// `t2 ∘ t1^{-1}` and verified on all higher coefficients.
pub fn connecting_element(
    form: &FormalForm,
    t1: &FormalGoodCoordinate,
    t2: &FormalGoodCoordinate,
) -> Result<GnElement> {
    let l = form.l();
    if l <= 0 {
        return Err(Error::Structural(
            "connecting elements are unique only for negative log-order".into(),
        ));
    }
    let order = t1.order().min(t2.order()) as i64;
    let len = (order + 1) as usize;
    let inv1 = reversion(&t1.as_poly(), len)?;
    let x = t2.as_poly().compose_mod(&inv1, len);
    let lambda = x.coeff(1);
    if lambda.is_zero() {
        return Err(Error::NotDominant("degenerate coordinate ratio".into()));
    }
    let mu = &x.coeff((l + 1) as usize) / &lambda;
    let sigma = GnElement { lambda, mu };
    // the jets determine the coordinate: verify the rest matches
    let direct = act(
        &sigma,
        &FormalForm {
            n: form.n,
            c_n: &form.c_n
                * &t1.a(1).pow(l).expect("good coordinate has nonzero linear term"),
            r: form.r.clone(),
        },
        order,
    )?;
    if direct.as_poly() != x {
        return Err(Error::NonConvergent(
            "coordinates are not related by a group element".into(),
        ));
    }
    Ok(sigma)
}

/// The graded reduction of a coordinate on an annulus side: its leading
/// graded scalar (the grade and leading rational of the dominant linear
/// coefficient) together with the reduced jet over the rationals, truncated
/// to kill the unipotent part.
#[derive(Clone, PartialEq, Debug)]
pub struct GradedCoordinate {
    pub leading: GradedScalar,
    /// `b_1 = 1, b_2, …` of the reduced series.
    pub jet: Vec<Rational>,
}

impl GradedCoordinate {
    pub fn grade(&self) -> &Rational {
        match &self.leading {
            GradedScalar::Term { grade, .. } => grade,
            GradedScalar::Zero => unreachable!("leading part of a coordinate is nonzero"),
        }
    }

    pub fn scaled(&self, by: &GradedScalar) -> Self {
        GradedCoordinate {
            leading: self.leading.mul(by),
            jet: self.jet.clone(),
        }
    }
}

/// Reduces a coordinate given as a series `Σ a_i f^i` in a unit-normalized
/// local parameter: requires the linear coefficient to dominate (strictly
/// below index 1), and reduces `a_i/a_1` coefficient-wise.
pub fn coordinate_reduction(
    coeffs: &[(i64, PuiseuxScalar)],
    jet_len: usize,
) -> Result<GradedCoordinate> {
    let a1 = coeffs
        .iter()
        .find(|(i, _)| *i == 1)
        .map(|(_, c)| c.clone())
        .ok_or_else(|| Error::NotDominant("no linear coefficient".into()))?;
    let (grade, lead) = match a1.graded_reduction()? {
        GradedScalar::Term { grade, coeff } => (grade, coeff),
        GradedScalar::Zero => return Err(Error::NotDominant("zero linear coefficient".into())),
    };
    for (i, c) in coeffs {
        if *i == 1 || c.is_zero_to_prec() {
            continue;
        }
        let v = match c.valuation() {
            Valuation::Finite(v) => v,
            _ => continue,
        };
        let strict = *i < 1;
        if v < grade || (strict && v == grade) {
            return Err(Error::NotDominant(format!(
                "coefficient at index {i} of size {v} against the linear term {grade}"
            )));
        }
    }
    let a1_inv = a1.inv()?;
    let mut jet = vec![Rational::one()];
    for k in 2..=jet_len as i64 {
        let b = coeffs
            .iter()
            .find(|(i, _)| *i == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(PuiseuxScalar::zero)
            .mul(&a1_inv);
        jet.push(b.coeff(&Rational::zero()).unwrap_or_else(Rational::zero));
    }
    Ok(GradedCoordinate {
        leading: GradedScalar::term(grade, lead),
        jet,
    })
}

/// Converts a chart-normalized good-coordinate unit `t = ŵ·u(ŵ)` into the
/// series of `t` in the vertex-side local parameter `f = t^{outer}·ŵ`.
fn side_f_series(unit: &AnnulusSeries, outer: &Rational) -> Vec<(i64, PuiseuxScalar)> {
    unit.stored()
        .map(|(j, c)| {
            let i = j + 1;
            (
                i,
                c.mul_monomial(&(-Rational::from_int(i) * outer.clone()), &Rational::one()),
            )
        })
        .collect()
}

struct SideData<'a> {
    unit: &'a AnnulusSeries,
    outer: Rational,
    n: i64,
}

fn gluing_sides<'a>(
    model: &'a GluedModel,
    edge: &str,
) -> Result<(SideData<'a>, SideData<'a>, PuiseuxScalar, Rational)> {
    // the gluing may be stored under either orientation
    let (g, from_tail) = match model.gluings.get(edge) {
        Some(g) => (g, true),
        None => {
            let e = model
                .complex
                .edges
                .get(edge)
                .ok_or_else(|| Error::Structural(format!("unknown edge {edge}")))?;
            let op = e
                .opposite
                .clone()
                .ok_or_else(|| Error::Structural(format!("{edge} is a leg")))?;
            let g = model
                .gluings
                .get(&op)
                .ok_or_else(|| Error::Structural(format!("no gluing for {edge}")))?;
            (g, false)
        }
    };
    let e = &model.complex.edges[if from_tail { edge } else { &g.edge }];
    let tail_outer = model.pieces[&e.tail].annuli[&e.id].0.clone();
    let op_id = e.opposite.as_ref().unwrap();
    let head_outer = model.pieces[&e.head].annuli[op_id].0.clone();
    let length = match &e.length {
        Val::Finite(l) => l.clone(),
        Val::Infinite => return Err(Error::Structural(format!("infinite edge {edge}"))),
    };
    let tail = SideData {
        unit: &g.tail.unit,
        outer: tail_outer,
        n: g.n,
    };
    let head = SideData {
        unit: &g.head.unit,
        outer: head_outer,
        n: -g.n,
    };
    if from_tail {
        Ok((tail, head, g.constant.clone(), length))
    } else {
        Ok((head, tail, g.constant.clone(), length))
    }
}

fn jet_len_for(n: i64) -> usize {
    if n < 0 {
        (-n) as usize
    } else {
        1
    }
}

/// The matching of coordinate torsors across an edge: lift the graded
/// coordinate to a good coordinate on the edge annulus, invert it through
/// the gluing, and reduce at the far vertex. Anti-equivariant, involutive,
/// and grade(φ(τ)) + grade(τ) = -length(e).
pub fn phi_e(model: &GluedModel, edge: &str, tau: &GradedCoordinate) -> Result<GradedCoordinate> {
    let (near, far, constant, _) = gluing_sides(model, edge)?;
    let near_base = coordinate_reduction(
        &side_f_series(near.unit, &near.outer),
        jet_len_for(near.n),
    )?;
    if tau.jet != near_base.jet {
        return Err(Error::Structural(format!(
            "jet {:?} is not the reduction of a good coordinate on {edge}",
            tau.jet
        )));
    }
    // lift: t = λ̂·t0 with red(λ̂·t0) = tau, so λ̂ reduces to tau/near_base
    let lambda_grade = {
        let (g, c) = match (&tau.leading, &near_base.leading) {
            (
                GradedScalar::Term { grade: g1, coeff: c1 },
                GradedScalar::Term { grade: g0, coeff: c0 },
            ) => (g1 - g0, c1 / c0),
            _ => unreachable!("coordinate leadings are nonzero"),
        };
        GradedScalar::term(g, c)
    };
    // t^{-1} = λ̂^{-1}·c^{-1}·s0: reduce the far-side base and rescale
    let far_base = coordinate_reduction(
        &side_f_series(far.unit, &far.outer),
        jet_len_for(far.n),
    )?;
    let c_graded = constant.graded_reduction()?;
    let c_inv = match c_graded {
        GradedScalar::Term { grade, coeff } => GradedScalar::term(-grade, coeff.recip()?),
        GradedScalar::Zero => return Err(Error::Structural("zero gluing constant".into())),
    };
    let lambda_inv = match &lambda_grade {
        GradedScalar::Term { grade, coeff } => GradedScalar::term(-grade, coeff.recip()?),
        GradedScalar::Zero => unreachable!(),
    };
    Ok(far_base.scaled(&c_inv.mul(&lambda_inv)))
}
