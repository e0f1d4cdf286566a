//! Truncated Puiseux series over the rationals.
//!
//! A [`PuiseuxScalar`] is a finite sum `Σ c_q t^q` with rational exponents
//! and nonzero rational coefficients, together with a precision bound: terms
//! with exponent `≥ prec` are unknown. `prec = ∞` means the value is exact.
//! The valuation of a scalar is its smallest exponent, so `val(ab) =
//! val(a) + val(b)` and `val(a+b) ≥ min(val a, val b)`.
//!
//! Zero is the scalar with no terms and `prec = ∞`. A scalar with no terms
//! and finite precision is *zero to precision*: nothing is known about it
//! below its precision bound, and the two states are kept distinct.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{Rational, Val};

/// Default relative precision, in exponent units, used when an operation
/// with an infinite series result is applied to an exact input.
pub const DEFAULT_PREC: i64 = 24;

/// Valuation of a scalar: smallest known exponent, `Infinite` for exact
/// zero, `Unknown` when no term is known but the precision is finite.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
    Unknown,
}

impl Valuation {
    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(r) => Some(r),
            _ => None,
        }
    }
}

/// An element of the graded residue ring: zero, or a grade (valuation)
/// together with a nonzero rational leading coefficient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GradedScalar {
    Zero,
    Term { grade: Rational, coeff: Rational },
}

impl GradedScalar {
    pub fn term(grade: Rational, coeff: Rational) -> Self {
        assert!(!coeff.is_zero());
        GradedScalar::Term { grade, coeff }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GradedScalar::Zero)
    }

    /// Grades add, coefficients multiply; zero is absorbing.
    pub fn mul(&self, other: &GradedScalar) -> GradedScalar {
        match (self, other) {
            (GradedScalar::Zero, _) | (_, GradedScalar::Zero) => GradedScalar::Zero,
            (
                GradedScalar::Term { grade: g1, coeff: c1 },
                GradedScalar::Term { grade: g2, coeff: c2 },
            ) => GradedScalar::Term {
                grade: g1 + g2,
                coeff: c1 * c2,
            },
        }
    }
}

impl fmt::Display for GradedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradedScalar::Zero => write!(f, "0"),
            GradedScalar::Term { grade, coeff } => write!(f, "{}@{}", coeff, grade),
        }
    }
}

/// A truncated Puiseux series; see the module docs.
#[derive(Clone, PartialEq, Eq)]
pub struct PuiseuxScalar {
    terms: BTreeMap<Rational, Rational>,
    prec: Val,
}

impl PuiseuxScalar {
    /// Exact zero.
    pub fn zero() -> Self {
        PuiseuxScalar {
            terms: BTreeMap::new(),
            prec: Val::Infinite,
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(Rational::zero(), c)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(Rational::from_int(n))
    }

    /// `c · t^q`, exact.
    pub fn monomial(q: Rational, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(q, c);
        }
        PuiseuxScalar {
            terms,
            prec: Val::Infinite,
        }
    }

    /// `t^q`, exact.
    pub fn t_pow(q: Rational) -> Self {
        Self::monomial(q, Rational::one())
    }

    /// Unknown value `O(t^prec)`.
    pub fn unknown(prec: Rational) -> Self {
        PuiseuxScalar {
            terms: BTreeMap::new(),
            prec: Val::Finite(prec),
        }
    }

    /// Builds a scalar from (exponent, coefficient) pairs, dropping zero
    /// coefficients and terms at or above the precision.
    pub fn from_terms<I>(terms: I, prec: Val) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut map = BTreeMap::new();
        for (q, c) in terms {
            if c.is_zero() {
                continue;
            }
            if let Val::Finite(p) = &prec {
                if &q >= p {
                    continue;
                }
            }
            let entry = map.entry(q).or_insert_with(Rational::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        PuiseuxScalar { terms: map, prec }
    }

    pub fn prec(&self) -> &Val {
        &self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True iff the value is exactly zero.
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_infinite()
    }

    /// True iff no nonzero term is known (covers both exact zero and zero
    /// to precision).
    pub fn is_zero_to_prec(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_infinite()
    }

    /// Smallest known exponent.
    pub fn valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(q) => Valuation::Finite(q.clone()),
            None => {
                if self.prec.is_infinite() {
                    Valuation::Infinite
                } else {
                    Valuation::Unknown
                }
            }
        }
    }

    /// Certified lower bound for the valuation: the valuation itself when a
    /// term is known, otherwise the precision bound.
    pub fn val_lower_bound(&self) -> Val {
        match self.terms.keys().next() {
            Some(q) => Val::Finite(q.clone()),
            None => self.prec.clone(),
        }
    }

    /// Leading (smallest-exponent) term.
    pub fn leading(&self) -> Option<(&Rational, &Rational)> {
        self.terms.iter().next()
    }

    /// The known coefficient of `t^q`; `None` when `q` is at or above the
    /// precision bound.
    pub fn coeff(&self, q: &Rational) -> Option<Rational> {
        if let Val::Finite(p) = &self.prec {
            if q >= p {
                return None;
            }
        }
        Some(self.terms.get(q).cloned().unwrap_or_else(Rational::zero))
    }

    /// Restricts the precision to `min(self.prec, prec)` and drops the
    /// now-unknown terms.
    pub fn truncated(&self, prec: &Val) -> Self {
        if &self.prec <= prec {
            return self.clone();
        }
        PuiseuxScalar::from_terms(
            self.terms.iter().map(|(q, c)| (q.clone(), c.clone())),
            prec.clone(),
        )
    }

    pub fn neg(&self) -> Self {
        PuiseuxScalar {
            terms: self.terms.iter().map(|(q, c)| (q.clone(), -c)).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.clone().min(other.prec.clone());
        PuiseuxScalar::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(q, c)| (q.clone(), c.clone())),
            prec,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            // exact rational multiplier: the unknown part is scaled away too
            return PuiseuxScalar {
                terms: BTreeMap::new(),
                prec: self.prec.clone().max(Val::Infinite),
            };
        }
        PuiseuxScalar {
            terms: self.terms.iter().map(|(q, v)| (q.clone(), c * v)).collect(),
            prec: self.prec.clone(),
        }
    }

    /// Multiplication by `c·t^q` (exact monomial): exponents shift, the
    /// precision shifts along.
    pub fn mul_monomial(&self, q: &Rational, c: &Rational) -> Self {
        if c.is_zero() {
            return PuiseuxScalar::zero();
        }
        PuiseuxScalar {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e + q, c * v))
                .collect(),
            prec: self.prec.clone() + q,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return PuiseuxScalar::zero();
        }
        // prec = min over both factors of (valuation bound of one) + (prec of other)
        let prec = (self.val_lower_bound() + other.prec.clone())
            .min(other.val_lower_bound() + self.prec.clone());
        let mut acc: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                let q = qa + qb;
                if let Val::Finite(p) = &prec {
                    if &q >= p {
                        continue;
                    }
                }
                let entry = acc.entry(q).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        PuiseuxScalar { terms: acc, prec }
    }

    /// Integer power; negative exponents go through [`Self::inv`].
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow_int(-k);
        }
        let mut result = PuiseuxScalar::one();
        for _ in 0..k {
            result = result.mul(self);
        }
        Ok(result)
    }

    fn leading_or_err(&self, what: &str) -> Result<(Rational, Rational)> {
        match self.leading() {
            Some((q, c)) => Ok((q.clone(), c.clone())),
            None => {
                if self.prec.is_infinite() {
                    Err(Error::DivisionByZero)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "{what} needs a known leading term, got O(t^{})",
                        self.prec
                    )))
                }
            }
        }
    }

    /// Relative precision (in exponent units above the leading term), with
    /// exact inputs capped at [`DEFAULT_PREC`].
    fn relative_cap(&self, lead: &Rational) -> Rational {
        match &self.prec {
            Val::Finite(p) => p - lead,
            Val::Infinite => Rational::from_int(DEFAULT_PREC),
        }
    }

    /// Multiplicative inverse, to the propagated precision. Exact
    /// non-monomial inputs are truncated at the default relative precision.
    pub fn inv(&self) -> Result<Self> {
        let (q, c) = self.leading_or_err("inv")?;
        // x = a / (c t^q) - 1 has positive valuation
        let x = self
            .mul_monomial(&-&q, &c.recip()?)
            .sub(&PuiseuxScalar::one());
        let lead_inv = PuiseuxScalar::monomial(-&q, c.recip()?);
        if x.is_exact_zero() {
            return Ok(lead_inv);
        }
        let rel = self.relative_cap(&q);
        let cap = Val::Finite(rel.clone());
        // geometric series for (1 + x)^{-1}
        let mut sum = PuiseuxScalar::one();
        let mut term = PuiseuxScalar::one();
        let minus_x = x.neg().truncated(&cap);
        loop {
            term = term.mul(&minus_x).truncated(&cap);
            if term.val_lower_bound() >= cap {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.truncated(&cap).mul(&lead_inv))
    }

    /// Exact division helper: `self / other` to the propagated precision.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// n-th root with the leading coefficient's root taken in the
    /// rationals. Fails with `NonSplitRoot` when no rational root exists.
    pub fn nth_root(&self, n: i64) -> Result<Self> {
        assert!(n >= 1, "root order must be >= 1");
        let (q, c) = self.leading_or_err("nth_root")?;
        let root_c = c.nth_root(n as u32).ok_or_else(|| Error::NonSplitRoot {
            value: c.to_string(),
            n,
        })?;
        let n_rat = Rational::from_int(n);
        let root_q = &q / &n_rat;
        let lead_root = PuiseuxScalar::monomial(root_q.clone(), root_c);
        let x = self
            .mul_monomial(&-&q, &c.recip()?)
            .sub(&PuiseuxScalar::one());
        if x.is_exact_zero() {
            return Ok(lead_root);
        }
        let rel = self.relative_cap(&q);
        let cap = Val::Finite(rel.clone());
        let x = x.truncated(&cap);
        // binomial series (1 + x)^{1/n}
        let alpha = n_rat.recip()?;
        let mut sum = PuiseuxScalar::one();
        let mut term = PuiseuxScalar::one();
        let mut coef = Rational::one();
        let mut k = Rational::zero();
        loop {
            coef = coef * (&alpha - &k) / (&k + &Rational::one());
            k += Rational::one();
            term = term.mul(&x).truncated(&cap);
            if term.val_lower_bound() >= cap {
                break;
            }
            sum = sum.add(&term.scale(&coef));
        }
        Ok(sum.truncated(&cap).mul(&lead_root))
    }

    /// Exponential series, defined for arguments of strictly positive
    /// valuation.
    pub fn exp_small(&self) -> Result<Self> {
        match self.valuation() {
            Valuation::Infinite => return Ok(PuiseuxScalar::one()),
            Valuation::Finite(v) if v.is_positive() => {}
            Valuation::Unknown => {
                // O(t^p) with p > 0: exp = 1 + O(t^p)
                if let Val::Finite(p) = &self.prec {
                    if p.is_positive() {
                        return Ok(PuiseuxScalar::one().truncated(&self.prec).add(self));
                    }
                }
                return Err(Error::NotSmall(format!("{}", self)));
            }
            _ => return Err(Error::NotSmall(format!("{}", self))),
        }
        let cap = match &self.prec {
            Val::Finite(p) => Val::Finite(p.clone()),
            Val::Infinite => Val::Finite(Rational::from_int(DEFAULT_PREC)),
        };
        let x = self.truncated(&cap);
        let mut sum = PuiseuxScalar::one();
        let mut term = PuiseuxScalar::one();
        let mut k = Rational::zero();
        loop {
            k += Rational::one();
            term = term.mul(&x).truncated(&cap).scale(&k.recip().unwrap());
            if term.val_lower_bound() >= cap {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.truncated(&cap))
    }

    /// Logarithm of a 1-unit `u = 1 + b`, `val(b) > 0`.
    pub fn log_unit(&self) -> Result<Self> {
        let b = self.sub(&PuiseuxScalar::one());
        match b.valuation() {
            Valuation::Infinite => return Ok(PuiseuxScalar::zero()),
            Valuation::Finite(v) if v.is_positive() => {}
            Valuation::Unknown => {
                if let Val::Finite(p) = &b.prec {
                    if p.is_positive() {
                        return Ok(PuiseuxScalar::unknown(p.clone()));
                    }
                }
                return Err(Error::NotSmall(format!("{}", self)));
            }
            _ => return Err(Error::NotSmall(format!("{}", self))),
        }
        let cap = match &b.prec {
            Val::Finite(p) => Val::Finite(p.clone()),
            Val::Infinite => Val::Finite(Rational::from_int(DEFAULT_PREC)),
        };
        let b = b.truncated(&cap);
        let mut sum = PuiseuxScalar::zero();
        let mut power = PuiseuxScalar::one();
        let mut k = Rational::zero();
        let mut sign = -Rational::one();
        loop {
            k += Rational::one();
            sign = -sign;
            power = power.mul(&b).truncated(&cap);
            if power.val_lower_bound() >= cap {
                break;
            }
            sum = sum.add(&power.scale(&(&sign / &k)));
        }
        Ok(sum.truncated(&cap))
    }

    /// Leading-term image in the graded ring.
    pub fn graded_reduction(&self) -> Result<GradedScalar> {
        match self.leading() {
            Some((q, c)) => Ok(GradedScalar::term(q.clone(), c.clone())),
            None => {
                if self.prec.is_infinite() {
                    Ok(GradedScalar::Zero)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "no known leading term in O(t^{})",
                        self.prec
                    )))
                }
            }
        }
    }

    /// Agreement on all jointly known terms: the two values are equal below
    /// the smaller of the two precision bounds.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let prec = self.prec.clone().min(other.prec.clone());
        let below = |map: &BTreeMap<Rational, Rational>, q: &Rational| -> Rational {
            map.get(q).cloned().unwrap_or_else(Rational::zero)
        };
        for q in self.terms.keys().chain(other.terms.keys()) {
            if let Val::Finite(p) = &prec {
                if q >= p {
                    continue;
                }
            }
            if below(&self.terms, q) != below(&other.terms, q) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for PuiseuxScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if q.is_zero() {
                write!(f, "{}", c)?;
            } else if c == &Rational::one() {
                write!(f, "t^{}", q)?;
            } else {
                write!(f, "{}*t^{}", c, q)?;
            }
        }
        match &self.prec {
            Val::Finite(p) => {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "O(t^{})", p)
            }
            Val::Infinite => {
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for PuiseuxScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Serialize for PuiseuxScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            terms: Vec<(&'a Rational, &'a Rational)>,
            prec: &'a Val,
        }
        Repr {
            terms: self.terms.iter().collect(),
            prec: &self.prec,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PuiseuxScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Full {
                terms: Vec<(Rational, Rational)>,
                #[serde(default = "inf")]
                prec: Val,
            },
            /// Shorthand: a bare "p/q" string means an exact rational constant.
            Const(String),
        }
        fn inf() -> Val {
            Val::Infinite
        }
        match Repr::deserialize(deserializer)? {
            Repr::Full { terms, prec } => {
                for (q, _) in &terms {
                    if let Val::Finite(p) = &prec {
                        if q >= p {
                            return Err(D::Error::custom(format!(
                                "term exponent {q} not below precision {p}"
                            )));
                        }
                    }
                }
                Ok(PuiseuxScalar::from_terms(terms, prec))
            }
            Repr::Const(s) => {
                let c = Rational::from_str(&s).map_err(D::Error::custom)?;
                Ok(PuiseuxScalar::constant(c))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t() -> PuiseuxScalar {
        PuiseuxScalar::t_pow(Rational::one())
    }

    fn t_q(n: i64, d: i64) -> PuiseuxScalar {
        PuiseuxScalar::t_pow(Rational::new(n, d))
    }

    #[test]
    fn valuation_cases() {
        let a = t_q(1, 2).add(&t().scale(&Rational::from_int(3)));
        assert_eq!(a.valuation(), Valuation::Finite(Rational::new(1, 2)));
        assert_eq!(PuiseuxScalar::zero().valuation(), Valuation::Infinite);
        let unknown = PuiseuxScalar::unknown(Rational::from_int(5));
        assert_eq!(unknown.valuation(), Valuation::Unknown);
    }

    #[test]
    fn add_and_mul_basics() {
        let a = t_q(1, 2);
        let b = t_q(1, 2).scale(&Rational::from_int(2));
        assert_eq!(a.add(&b), t_q(1, 2).scale(&Rational::from_int(3)));

        let one = PuiseuxScalar::one();
        let p = one.add(&t());
        let m = one.sub(&t());
        let prod = p.mul(&m);
        let expected = one.sub(&t().mul(&t()));
        assert_eq!(prod, expected);
    }

    #[test]
    fn mul_precision_rule() {
        let a = t().truncated(&Val::finite(3, 1));
        let prod = a.mul(&a);
        assert_eq!(prod.prec(), &Val::finite(4, 1));
        assert_eq!(prod.coeff(&Rational::from_int(2)), Some(Rational::one()));
    }

    #[test]
    fn inv_geometric_series() {
        let u = PuiseuxScalar::one().add(&t());
        let inv = u.inv().unwrap();
        assert_eq!(inv.coeff(&Rational::zero()), Some(Rational::one()));
        assert_eq!(inv.coeff(&Rational::one()), Some(Rational::from_int(-1)));
        assert_eq!(inv.coeff(&Rational::from_int(2)), Some(Rational::one()));
        assert!(u.mul(&inv).agrees_with(&PuiseuxScalar::one()));

        let m = PuiseuxScalar::monomial(Rational::from_int(-1), Rational::from_int(2));
        let mi = m.inv().unwrap();
        assert_eq!(
            mi,
            PuiseuxScalar::monomial(Rational::one(), Rational::new(1, 2))
        );

        let unknown = PuiseuxScalar::unknown(Rational::from_int(4));
        assert!(matches!(unknown.inv(), Err(Error::PrecisionExhausted(_))));
        assert!(matches!(
            PuiseuxScalar::zero().inv(),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn nth_root_squares_back() {
        let a = PuiseuxScalar::one().add(&t().scale(&Rational::from_int(4)));
        let r = a.nth_root(2).unwrap();
        assert_eq!(r.coeff(&Rational::one()), Some(Rational::from_int(2)));
        assert_eq!(
            r.coeff(&Rational::from_int(2)),
            Some(Rational::from_int(-2))
        );
        assert!(r.mul(&r).agrees_with(&a));

        assert_eq!(t().nth_root(2).unwrap(), t_q(1, 2));

        let two_plus_t = PuiseuxScalar::from_int(2).add(&t());
        assert!(matches!(
            two_plus_t.nth_root(2),
            Err(Error::NonSplitRoot { .. })
        ));
    }

    #[test]
    fn exp_and_log() {
        let e = t().exp_small().unwrap();
        assert_eq!(e.coeff(&Rational::zero()), Some(Rational::one()));
        assert_eq!(e.coeff(&Rational::one()), Some(Rational::one()));
        assert_eq!(e.coeff(&Rational::from_int(2)), Some(Rational::new(1, 2)));
        assert_eq!(e.coeff(&Rational::from_int(3)), Some(Rational::new(1, 6)));

        let l = PuiseuxScalar::one().add(&t()).log_unit().unwrap();
        assert_eq!(l.coeff(&Rational::one()), Some(Rational::one()));
        assert_eq!(l.coeff(&Rational::from_int(2)), Some(Rational::new(-1, 2)));
        assert_eq!(l.coeff(&Rational::from_int(3)), Some(Rational::new(1, 3)));

        assert!(matches!(
            PuiseuxScalar::one().add(&t()).exp_small(),
            Err(Error::NotSmall(_))
        ));
        // round trip
        let u = PuiseuxScalar::one().add(&t());
        assert!(u.log_unit().unwrap().exp_small().unwrap().agrees_with(&u));
    }

    #[test]
    fn graded_reduction_cases() {
        let a = PuiseuxScalar::monomial(Rational::from_int(-1), Rational::from_int(5))
            .add(&PuiseuxScalar::from_int(7))
            .add(&t());
        assert_eq!(
            a.graded_reduction().unwrap(),
            GradedScalar::term(Rational::from_int(-1), Rational::from_int(5))
        );
        assert_eq!(
            PuiseuxScalar::zero().graded_reduction().unwrap(),
            GradedScalar::Zero
        );
        let b = PuiseuxScalar::from_int(3).add(&t_q(1, 3));
        assert_eq!(
            b.graded_reduction().unwrap(),
            GradedScalar::term(Rational::zero(), Rational::from_int(3))
        );
        assert!(matches!(
            PuiseuxScalar::unknown(Rational::from_int(5)).graded_reduction(),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn serde_round_trip() {
        let a = t_q(1, 2)
            .scale(&Rational::new(-3, 4))
            .add(&PuiseuxScalar::from_int(7))
            .truncated(&Val::finite(24, 1));
        let s = serde_json::to_string(&a).unwrap();
        let b: PuiseuxScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);

        let c: PuiseuxScalar = serde_json::from_str("\"5/3\"").unwrap();
        assert_eq!(c, PuiseuxScalar::constant(Rational::new(5, 3)));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-20i64..20, 1i64..6).prop_map(|(n, d)| Rational::new(n, d))
    }

    fn arb_scalar() -> impl Strategy<Value = PuiseuxScalar> {
        (
            proptest::collection::vec(((-6i64..8, 1i64..4), arb_rational()), 0..5),
            proptest::option::of(8i64..20),
        )
            .prop_map(|(terms, prec)| {
                let prec = match prec {
                    Some(p) => Val::finite(p, 1),
                    None => Val::Infinite,
                };
                PuiseuxScalar::from_terms(
                    terms
                        .into_iter()
                        .map(|((n, d), c)| (Rational::new(n, d), c)),
                    prec,
                )
            })
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(a in arb_scalar(), b in arb_scalar()) {
            let sum = a.add(&b);
            if let (Valuation::Finite(va), Valuation::Finite(vb)) = (a.valuation(), b.valuation()) {
                if let Valuation::Finite(vs) = sum.valuation() {
                    prop_assert!(vs >= va.clone().min(vb.clone()));
                    if va != vb {
                        prop_assert_eq!(vs, va.min(vb));
                    }
                }
            }
        }

        #[test]
        fn valuation_multiplicative(a in arb_scalar(), b in arb_scalar()) {
            let prod = a.mul(&b);
            if let (Valuation::Finite(va), Valuation::Finite(vb)) = (a.valuation(), b.valuation()) {
                if let Valuation::Finite(vp) = prod.valuation() {
                    prop_assert_eq!(vp, va + vb);
                }
            }
        }

        #[test]
        fn mul_then_div_recovers(a in arb_scalar(), b in arb_scalar()) {
            if b.leading().is_some() {
                let q = a.mul(&b).div(&b).unwrap();
                prop_assert!(q.agrees_with(&a));
            }
        }

        #[test]
        fn exp_is_a_homomorphism(a in arb_scalar(), b in arb_scalar()) {
            let pos = |s: &PuiseuxScalar| matches!(s.valuation(), Valuation::Finite(v) if v.is_positive())
                || s.is_exact_zero();
            if pos(&a) && pos(&b) {
                let lhs = a.add(&b).exp_small().unwrap();
                let rhs = a.exp_small().unwrap().mul(&b.exp_small().unwrap());
                prop_assert!(lhs.agrees_with(&rhs));
            }
        }

        #[test]
        fn nth_root_power_agrees(a in arb_scalar(), n in 1i64..4) {
            if a.leading().is_some() {
                if let Ok(r) = a.nth_root(n) {
                    let mut p = PuiseuxScalar::one();
                    for _ in 0..n {
                        p = p.mul(&r);
                    }
                    prop_assert!(p.agrees_with(&a));
                }
            }
        }

        #[test]
        fn graded_reduction_multiplicative(a in arb_scalar(), b in arb_scalar()) {
            if let (Ok(ga), Ok(gb), Ok(gp)) = (
                a.graded_reduction(),
                b.graded_reduction(),
                a.mul(&b).graded_reduction(),
            ) {
                prop_assert_eq!(gp, ga.mul(&gb));
            }
        }
    }
}
