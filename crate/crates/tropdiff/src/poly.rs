//! Dense univariate polynomials over an exact coefficient ring, plus the
//! series expansions needed for residues of rational differentials.
//!
//! The same code runs over [`Rational`] (reduced forms over the residue
//! field) and over [`PuiseuxScalar`] (forms over the ground field), so the
//! ring operations are abstracted into [`Coeff`]. Division only ever happens
//! through an explicit inversion callback; deflation by known linear factors
//! uses synthetic division and demands an exactly-zero remainder.

use crate::error::{Error, Result};
use crate::puiseux::PuiseuxScalar;
use crate::rational::Rational;

/// Exact ring operations used by the polynomial layer.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
}

impl Coeff for PuiseuxScalar {
    fn zero() -> Self {
        PuiseuxScalar::zero()
    }
    fn one() -> Self {
        PuiseuxScalar::one()
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn add(&self, other: &Self) -> Self {
        PuiseuxScalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PuiseuxScalar::sub(self, other)
    }
    fn neg(&self) -> Self {
        PuiseuxScalar::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        PuiseuxScalar::mul(self, other)
    }
}

/// Dense polynomial, coefficients low to high, no trailing zeros.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<C: Coeff> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Poly<C> {
    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: C) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(C::one())
    }

    /// The monic linear polynomial `z - q`.
    pub fn linear_root(q: &C) -> Self {
        Poly::from_coeffs(vec![q.neg(), C::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        let mut k = C::zero();
        for c in self.coeffs.iter().skip(1) {
            k = k.add(&C::one());
            out.push(c.mul(&k));
        }
        Poly::from_coeffs(out)
    }

    /// Taylor shift: the polynomial `p(z + q)`.
    pub fn shift(&self, q: &C) -> Self {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            // acc = acc * (z + q) + c
            let z_times = Poly::from_coeffs(
                std::iter::once(C::zero())
                    .chain(acc.coeffs.iter().cloned())
                    .collect(),
            );
            acc = z_times.add(&acc.scale(q)).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Synthetic division by `z - q`; `Some(quotient)` only when the
    /// remainder is exactly zero.
    pub fn deflate(&self, q: &C) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.coeffs.len();
        if n == 1 {
            return None;
        }
        let mut quot = vec![C::zero(); n - 1];
        let mut carry = C::zero();
        for i in (0..n).rev() {
            let v = self.coeffs[i].add(&carry.mul(q));
            if i == 0 {
                if !v.is_zero() {
                    return None;
                }
            } else {
                quot[i - 1] = v.clone();
                carry = v;
            }
        }
        Some(Poly::from_coeffs(quot))
    }

    /// Multiplicity of `q` as a root, and the maximally deflated cofactor.
    pub fn multiplicity(&self, q: &C) -> (usize, Self) {
        let mut m = 0;
        let mut p = self.clone();
        while let Some(next) = p.deflate(q) {
            m += 1;
            p = next;
        }
        (m, p)
    }

    /// Coefficients reversed: `z^deg · p(1/z)`.
    pub fn reversed(&self) -> Self {
        let mut coeffs: Vec<C> = self.coeffs.iter().rev().cloned().collect();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::from_coeffs(self.coeffs.iter().map(f).collect())
    }

    /// Truncated composition `self(other) mod z^len`.
    pub fn compose_mod(&self, other: &Self, len: usize) -> Self {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = series_mul(&acc, other, len).add(&Poly::constant(c.clone()));
        }
        acc
    }
}

/// Product truncated to the first `len` coefficients.
pub fn series_mul<C: Coeff>(a: &Poly<C>, b: &Poly<C>, len: usize) -> Poly<C> {
    let mut out = vec![C::zero(); len];
    for (i, x) in a.coeffs().iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.coeffs().iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    Poly::from_coeffs(out)
}

/// Multiplicative inverse of a power series with invertible constant term,
/// truncated to `len` coefficients. `inv` inverts coefficients.
pub fn series_inv<C: Coeff>(
    p: &Poly<C>,
    len: usize,
    inv: &dyn Fn(&C) -> Result<C>,
) -> Result<Poly<C>> {
    let c0 = p.coeff(0);
    if c0.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let c0_inv = inv(&c0)?;
    let mut out = vec![C::zero(); len];
    out[0] = c0_inv.clone();
    for m in 1..len {
        let mut s = C::zero();
        for j in 1..=m {
            let pj = p.coeff(j);
            if pj.is_zero() {
                continue;
            }
            s = s.add(&pj.mul(&out[m - j]));
        }
        out[m] = c0_inv.mul(&s).neg();
    }
    Ok(Poly::from_coeffs(out))
}

/// `num / den` as a power series, truncated to `len` coefficients.
pub fn series_div<C: Coeff>(
    num: &Poly<C>,
    den: &Poly<C>,
    len: usize,
    inv: &dyn Fn(&C) -> Result<C>,
) -> Result<Poly<C>> {
    Ok(series_mul(num, &series_inv(den, len, inv)?, len))
}

/// A point of the projective line over the coefficient ring.
#[derive(Clone, PartialEq, Debug)]
pub enum P1Point<C: Coeff> {
    Finite(C),
    Infinity,
}

impl<C: Coeff> P1Point<C> {
    pub fn is_infinity(&self) -> bool {
        matches!(self, P1Point::Infinity)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> P1Point<D> {
        match self {
            P1Point::Finite(c) => P1Point::Finite(f(c)),
            P1Point::Infinity => P1Point::Infinity,
        }
    }
}

/// A rational differential `(num/den) dz` on the projective line.
#[derive(Clone, PartialEq, Debug)]
pub struct RatDifferential<C: Coeff> {
    pub num: Poly<C>,
    pub den: Poly<C>,
}

impl<C: Coeff> RatDifferential<C> {
    pub fn new(num: Poly<C>, den: Poly<C>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatDifferential { num, den })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Vanishing order of the differential at a point (poles negative);
    /// at infinity the chart twist contributes `-2`.
    pub fn order_at(&self, p: &P1Point<C>) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        match p {
            P1Point::Finite(q) => {
                let (mn, _) = self.num.multiplicity(q);
                let (md, _) = self.den.multiplicity(q);
                Ok(mn as i64 - md as i64)
            }
            P1Point::Infinity => {
                let dn = self.num.degree().unwrap() as i64;
                let dd = self.den.degree().map(|d| d as i64).unwrap_or(0);
                Ok(dd - dn - 2)
            }
        }
    }

    /// Order measured against `dz/z`: vanishing order plus one.
    pub fn log_order_at(&self, p: &P1Point<C>) -> Result<i64> {
        Ok(self.order_at(p)? + 1)
    }

    /// Residue at a point, computed from the exact local series expansion.
    pub fn residue_at(&self, p: &P1Point<C>, inv: &dyn Fn(&C) -> Result<C>) -> Result<C> {
        match p {
            P1Point::Finite(q) => {
                let (md, den_cof) = self.den.multiplicity(q);
                let (mn, num_cof) = self.num.multiplicity(q);
                let pole = md as i64 - mn as i64;
                if pole <= 0 {
                    return Ok(C::zero());
                }
                // order of the needed series coefficient in w = z - q
                let idx = (pole - 1) as usize;
                let num_s = num_cof.shift(q);
                let den_s = den_cof.shift(q);
                let series = series_div(&num_s, &den_s, idx + 1, inv)?;
                Ok(series.coeff(idx))
            }
            P1Point::Infinity => {
                // w = 1/z chart: f(z) dz = -w^{dd-dn-2} (num_rev/den_rev) dw
                let dn = match self.num.degree() {
                    Some(d) => d as i64,
                    None => return Ok(C::zero()),
                };
                let dd = self.den.degree().map(|d| d as i64).unwrap_or(0);
                let e = dd - dn - 2;
                if e >= 0 {
                    return Ok(C::zero());
                }
                let idx = (-1 - e) as usize;
                let series = series_div(&self.num.reversed(), &self.den.reversed(), idx + 1, inv)?;
                Ok(series.coeff(idx).neg())
            }
        }
    }
}

/// Divides out the marked linear factors (and exhausts them); returns the
/// multiplicities in input order and the remaining cofactor.
pub fn factor_over_points<C: Coeff>(p: &Poly<C>, points: &[C]) -> (Vec<usize>, Poly<C>) {
    let mut cof = p.clone();
    let mut mults = Vec::with_capacity(points.len());
    for q in points {
        let (m, rest) = cof.multiplicity(q);
        mults.push(m);
        cof = rest;
    }
    (mults, cof)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn poly(v: &[i64]) -> Poly<Rational> {
        Poly::from_coeffs(v.iter().map(|&n| Rational::from_int(n)).collect())
    }

    #[test]
    fn shift_and_deflate() {
        // p = z^2 - 1 = (z-1)(z+1)
        let p = poly(&[-1, 0, 1]);
        let s = p.shift(&Rational::one()); // (z+1)^2 - 1 = z^2 + 2z
        assert_eq!(s, poly(&[0, 2, 1]));
        let d = p.deflate(&Rational::one()).unwrap();
        assert_eq!(d, poly(&[1, 1]));
        assert!(p.deflate(&Rational::from_int(2)).is_none());
        let (m, cof) = poly(&[0, 0, 0, 1]).multiplicity(&Rational::zero());
        assert_eq!(m, 3);
        assert_eq!(cof, poly(&[1]));
    }

    #[test]
    fn series_inverse() {
        let p = poly(&[1, 1]); // 1 + z
        let inv = series_inv(&p, 5, &|c: &Rational| c.recip()).unwrap();
        assert_eq!(inv, poly(&[1, -1, 1, -1, 1]));
        assert_eq!(series_mul(&p, &inv, 5), poly(&[1]));
    }

    #[test]
    fn residues_of_simple_rational_form() {
        // dz / (z(z-1)): residues -1 at 0, +1 at 1, 0 at infinity
        let f = RatDifferential::new(poly(&[1]), poly(&[0, -1, 1])).unwrap();
        let inv = |c: &Rational| c.recip();
        assert_eq!(
            f.residue_at(&P1Point::Finite(Rational::zero()), &inv).unwrap(),
            q(-1, 1)
        );
        assert_eq!(
            f.residue_at(&P1Point::Finite(Rational::one()), &inv).unwrap(),
            q(1, 1)
        );
        assert_eq!(f.residue_at(&P1Point::Infinity, &inv).unwrap(), q(0, 1));
        // log orders: simple poles have log-order 0, and at infinity dz/(z(z-1)) vanishes to order 0
        assert_eq!(f.log_order_at(&P1Point::Finite(Rational::zero())).unwrap(), 0);
        assert_eq!(f.log_order_at(&P1Point::Infinity).unwrap(), 1);
    }

    #[test]
    fn residue_at_infinity_of_pole() {
        // (2/z) dz: residue 2 at 0, -2 at infinity
        let f = RatDifferential::new(poly(&[2]), poly(&[0, 1])).unwrap();
        let inv = |c: &Rational| c.recip();
        assert_eq!(
            f.residue_at(&P1Point::Finite(Rational::zero()), &inv).unwrap(),
            q(2, 1)
        );
        assert_eq!(f.residue_at(&P1Point::Infinity, &inv).unwrap(), q(-2, 1));
        // z dz is regular away from infinity and has zero residue there
        let g = RatDifferential::new(poly(&[0, 1]), poly(&[1])).unwrap();
        assert_eq!(g.residue_at(&P1Point::Infinity, &inv).unwrap(), q(0, 1));
    }

    #[test]
    fn double_pole_residue() {
        // dz/(z^2 (z-1)): expand 1/(z-1) = -(1 + z + ...), residue at 0 is -1
        let f = RatDifferential::new(poly(&[1]), poly(&[0, 0, -1, 1])).unwrap();
        let inv = |c: &Rational| c.recip();
        assert_eq!(
            f.residue_at(&P1Point::Finite(Rational::zero()), &inv).unwrap(),
            q(-1, 1)
        );
        assert_eq!(
            f.residue_at(&P1Point::Finite(Rational::one()), &inv).unwrap(),
            q(1, 1)
        );
        assert_eq!(f.residue_at(&P1Point::Infinity, &inv).unwrap(), q(0, 1));
    }
}
