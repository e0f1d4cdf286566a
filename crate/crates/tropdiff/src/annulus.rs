//! Laurent-series differential forms on oriented annuli.
//!
//! An annulus is modelled additively: its skeleton is the interval `[0, L]`
//! in valuation units, a point `x` of the skeleton sees the coordinate `s`
//! with `val(s) = x`, the tail of the induced orientation sits at `x = 0`
//! and the head at `x = L`. A differential form is `(Σ a_i s^i) ds/s` with
//! [`PuiseuxScalar`] coefficients known inside an index window.
//!
//! Outside the window, and below each coefficient's precision, nothing is
//! known; every series carries a certified lower bound for the valuation of
//! the unknown content at the two skeleton endpoints, and all operations
//! propagate these bounds conservatively. An index whose value could receive
//! an unknown contribution is never reported as known.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::puiseux::{PuiseuxScalar, DEFAULT_PREC};
use crate::rational::{Rational, Val};

/// Skeleton interval `[0, L]` of an oriented annulus, with each endpoint
/// marked closed (contained) or open.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Skeleton {
    #[serde(rename = "L")]
    pub length: Rational,
    /// `[tail, head]` endpoint inclusion.
    pub closed: [bool; 2],
}

impl Skeleton {
    pub fn closed_interval(length: Rational) -> Self {
        assert!(length.is_positive(), "skeleton length must be positive");
        Skeleton {
            length,
            closed: [true, true],
        }
    }

    /// The same interval traversed backwards (endpoint inclusions swap).
    pub fn reversed(&self) -> Self {
        Skeleton {
            length: self.length.clone(),
            closed: [self.closed[1], self.closed[0]],
        }
    }
}

/// `val at x` of the monomial `a·s^i`, as a function of the skeleton point.
pub fn val_at(a: &PuiseuxScalar, i: i64, x: &Rational) -> Result<Rational> {
    match a.valuation() {
        crate::puiseux::Valuation::Finite(v) => Ok(v + Rational::from_int(i) * x.clone()),
        crate::puiseux::Valuation::Infinite => {
            Err(Error::PrecisionExhausted("val_at of exact zero".into()))
        }
        crate::puiseux::Valuation::Unknown => Err(Error::PrecisionExhausted(format!(
            "val_at of value known only as {}",
            a
        ))),
    }
}

/// Pair of certified valuation lower bounds, evaluated at the two skeleton
/// endpoints `x = 0` and `x = L`.
pub type BoundPair = (Val, Val);

fn pair_min(a: BoundPair, b: BoundPair) -> BoundPair {
    (a.0.min(b.0), a.1.min(b.1))
}

fn pair_add(a: &BoundPair, b: &BoundPair) -> BoundPair {
    (a.0.clone() + b.0.clone(), a.1.clone() + b.1.clone())
}

fn pair_ge(a: &BoundPair, b: &BoundPair) -> bool {
    a.0 >= b.0 && a.1 >= b.1
}

const INF_PAIR: BoundPair = (Val::Infinite, Val::Infinite);

/// A Laurent series with coefficients known inside `window`, on a fixed
/// skeleton. See the module docs for the knowledge model.
#[derive(Clone, PartialEq, Debug)]
pub struct AnnulusSeries {
    skeleton: Skeleton,
    window: (i64, i64),
    coeffs: BTreeMap<i64, PuiseuxScalar>,
    /// Valuation bound (at the two endpoints) for all content outside the
    /// window. `Infinite` means the series is exactly zero there.
    bound: BoundPair,
}

impl AnnulusSeries {
    pub fn new<I>(skeleton: Skeleton, window: (i64, i64), coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, PuiseuxScalar)>,
    {
        let mut map = BTreeMap::new();
        for (i, c) in coeffs {
            if i < window.0 || i > window.1 {
                return Err(Error::Structural(format!(
                    "coefficient index {i} outside window [{}, {}]",
                    window.0, window.1
                )));
            }
            if !c.is_exact_zero() {
                map.insert(i, c);
            }
        }
        Ok(AnnulusSeries {
            skeleton,
            window,
            coeffs: map,
            bound: INF_PAIR,
        })
    }

    pub fn zero(skeleton: Skeleton) -> Self {
        AnnulusSeries {
            skeleton,
            window: (0, 0),
            coeffs: BTreeMap::new(),
            bound: INF_PAIR,
        }
    }

    pub fn one(skeleton: Skeleton) -> Self {
        Self::monomial(skeleton, 0, PuiseuxScalar::one())
    }

    pub fn monomial(skeleton: Skeleton, i: i64, c: PuiseuxScalar) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_exact_zero() {
            coeffs.insert(i, c);
        }
        AnnulusSeries {
            skeleton,
            window: (i, i),
            coeffs,
            bound: INF_PAIR,
        }
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn bound(&self) -> &BoundPair {
        &self.bound
    }

    pub fn stored(&self) -> impl Iterator<Item = (&i64, &PuiseuxScalar)> {
        self.coeffs.iter()
    }

    /// True when everything outside the window is certified zero.
    pub fn exact_outside(&self) -> bool {
        self.bound == INF_PAIR
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact_outside() && self.coeffs.is_empty()
    }

    /// No known nonzero coefficient anywhere.
    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero_to_prec())
    }

    /// The coefficient of `s^i` if it is known: stored, or zero inside the
    /// window, or zero outside the window of an exact series.
    pub fn known_at(&self, i: i64) -> Option<PuiseuxScalar> {
        if let Some(c) = self.coeffs.get(&i) {
            return Some(c.clone());
        }
        if (i >= self.window.0 && i <= self.window.1) || self.exact_outside() {
            Some(PuiseuxScalar::zero())
        } else {
            None
        }
    }

    /// Valuation floor the out-of-window bound imposes on an unknown
    /// coefficient at index `i`: the content must clear the bound at both
    /// endpoints.
    fn bound_floor_at(&self, i: i64) -> Val {
        let from_head = match &self.bound.1 {
            Val::Infinite => Val::Infinite,
            Val::Finite(v) => {
                Val::Finite(v - &(Rational::from_int(i) * self.skeleton.length.clone()))
            }
        };
        self.bound.0.clone().max(from_head)
    }

    /// Everything known about the coefficient at `i`, with out-of-window
    /// indices reported up to the bound-derived precision floor.
    fn knowledge_at(&self, i: i64) -> PuiseuxScalar {
        if let Some(c) = self.known_at(i) {
            return c;
        }
        match self.bound_floor_at(i) {
            Val::Infinite => PuiseuxScalar::zero(),
            Val::Finite(p) => PuiseuxScalar::unknown(p),
        }
    }

    /// Endpoint valuations of the monomial at index `i` from the
    /// coefficient's certified valuation lower bound.
    fn pair_of_index(&self, i: i64, c: &PuiseuxScalar) -> BoundPair {
        let lb = c.val_lower_bound();
        let at_l = lb.clone() + &(Rational::from_int(i) * self.skeleton.length.clone());
        (lb, at_l)
    }

    /// Min endpoint valuations over the known (stored) content.
    pub fn known_min_pair(&self) -> BoundPair {
        let mut acc = INF_PAIR;
        for (i, c) in &self.coeffs {
            acc = pair_min(acc, self.pair_of_index(*i, c));
        }
        acc
    }

    /// Min endpoint valuations over coefficients with a visible nonzero term.
    pub fn known_nonzero_min_pair(&self) -> BoundPair {
        let mut acc = INF_PAIR;
        for (i, c) in &self.coeffs {
            if c.is_zero_to_prec() {
                continue;
            }
            acc = pair_min(acc, self.pair_of_index(*i, c));
        }
        acc
    }

    /// Min endpoint valuations over everything, known or not.
    pub fn total_min_pair(&self) -> BoundPair {
        pair_min(self.known_min_pair(), self.bound.clone())
    }

    /// True when all content sits at or above `tol` at both endpoints.
    pub fn negligible(&self, tol: &BoundPair) -> bool {
        pair_ge(&self.total_min_pair(), tol)
    }

    pub fn with_bound(mut self, bound: BoundPair) -> Self {
        self.bound = pair_min(self.bound, bound);
        self
    }

    /// Shrinks the window to `[lo, hi]`, demoting dropped coefficients into
    /// the unknown-content bound.
    pub fn restricted(&self, lo: i64, hi: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        let mut bound = self.bound.clone();
        for (i, c) in &self.coeffs {
            if *i >= lo && *i <= hi {
                coeffs.insert(*i, c.clone());
            } else {
                bound = pair_min(bound, self.pair_of_index(*i, c));
            }
        }
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: (lo, hi),
            coeffs,
            bound,
        }
    }

    pub fn neg(&self) -> Self {
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: self.window,
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c.neg())).collect(),
            bound: self.bound.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.skeleton, other.skeleton, "skeleton mismatch");
        // per-index knowledge over the window hull: a coefficient known on
        // one side and covered only by the other side's bound stays known,
        // floored at the bound's index-converted valuation
        let lo = self.window.0.min(other.window.0);
        let hi = self.window.1.max(other.window.1);
        let mut coeffs: BTreeMap<i64, PuiseuxScalar> = BTreeMap::new();
        for i in lo..=hi {
            let c = self.knowledge_at(i).add(&other.knowledge_at(i));
            if !c.is_exact_zero() {
                coeffs.insert(i, c);
            }
        }
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: (lo, hi),
            coeffs,
            bound: pair_min(self.bound.clone(), other.bound.clone()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by a scalar.
    pub fn scale_scalar(&self, c: &PuiseuxScalar) -> Self {
        if c.is_exact_zero() {
            return AnnulusSeries::zero(self.skeleton.clone());
        }
        let lb = c.val_lower_bound();
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: self.window,
            coeffs: self.coeffs.iter().map(|(i, a)| (*i, a.mul(c))).collect(),
            bound: (self.bound.0.clone() + lb.clone(), self.bound.1.clone() + lb),
        }
    }

    /// Multiplication by `s^k`: indices shift; at the head endpoint the
    /// unknown-content bound shifts by `k·L`.
    pub fn shift_index(&self, k: i64) -> Self {
        let shift_l = Rational::from_int(k) * self.skeleton.length.clone();
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: (self.window.0 + k, self.window.1 + k),
            coeffs: self
                .coeffs
                .iter()
                .map(|(i, c)| (i + k, c.clone()))
                .collect(),
            bound: (self.bound.0.clone(), self.bound.1.clone() + &shift_l),
        }
    }

    /// `s · d/ds`: coefficient at `i` becomes `i · a_i`.
    pub fn log_derivative(&self) -> Self {
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: self.window,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(i, _)| **i != 0)
                .map(|(i, c)| (*i, c.scale(&Rational::from_int(*i))))
                .collect(),
            bound: self.bound.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.skeleton, other.skeleton, "skeleton mismatch");
        if self.is_exact_zero() || other.is_exact_zero() {
            return AnnulusSeries::zero(self.skeleton.clone());
        }
        let lo = self.window.0 + other.window.0;
        let hi = self.window.1 + other.window.1;
        let l = &self.skeleton.length;

        let mut acc: BTreeMap<i64, PuiseuxScalar> = BTreeMap::new();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let m = i + j;
                let entry = acc.entry(m).or_insert_with(PuiseuxScalar::zero);
                *entry = entry.add(&a.mul(b));
            }
        }

        let ka = self.known_min_pair();
        let kb = other.known_min_pair();
        let (ua, ub) = (&self.bound, &other.bound);
        let bound = pair_min(
            pair_min(pair_add(&ka, ub), pair_add(&kb, ua)),
            pair_add(ua, ub),
        );

        let mut result = AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: (lo, hi),
            coeffs: acc,
            bound,
        };

        if self.exact_outside() && other.exact_outside() {
            result.coeffs.retain(|_, c| !c.is_exact_zero());
            return result;
        }

        // In-window coefficients can receive contributions from the unknown
        // content of either factor; convert the endpoint bounds to an
        // index-aware precision floor and truncate.
        let floor_from = |known: &AnnulusSeries, unk: &AnnulusSeries, m: i64| -> Val {
            if unk.exact_outside() {
                return Val::Infinite;
            }
            let (u0, ul) = (&unk.bound.0, &unk.bound.1);
            let mut floor = Val::Infinite;
            for (i, c) in &known.coeffs {
                let j = m - i;
                if j >= unk.window.0 && j <= unk.window.1 {
                    continue; // known territory of `unk`
                }
                // valuation bound for the unknown coefficient at index j
                let from_head = match ul {
                    Val::Infinite => Val::Infinite,
                    Val::Finite(v) => Val::Finite(v - &(Rational::from_int(j) * l.clone())),
                };
                let vj = u0.clone().max(from_head);
                floor = floor.min(vj + c.val_lower_bound());
            }
            floor
        };
        let unk_sq = |m: i64| -> Val {
            if self.exact_outside() || other.exact_outside() {
                return Val::Infinite;
            }
            let p = pair_add(ua, ub);
            let from_head = match p.1 {
                Val::Infinite => Val::Infinite,
                Val::Finite(v) => Val::Finite(v - &(Rational::from_int(m) * l.clone())),
            };
            p.0.max(from_head)
        };

        let mut new_coeffs = BTreeMap::new();
        for m in lo..=hi {
            let floor = floor_from(self, other, m)
                .min(floor_from(other, self, m))
                .min(unk_sq(m));
            let cur = result
                .coeffs
                .get(&m)
                .cloned()
                .unwrap_or_else(PuiseuxScalar::zero);
            let truncated = cur.truncated(&floor);
            if !truncated.is_exact_zero() {
                new_coeffs.insert(m, truncated);
            }
        }
        result.coeffs = new_coeffs;
        result
    }

    /// Index hull of the stored coefficients.
    fn stored_hull(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.keys().next()?;
        let hi = self.coeffs.keys().next_back()?;
        Some((*lo, *hi))
    }

    /// Floors every stored coefficient against an unknown additive
    /// contribution with the given endpoint bound (support unknown), and
    /// folds the bound.
    fn contaminated(&self, pair: &BoundPair) -> Self {
        if pair == &INF_PAIR {
            return self.clone();
        }
        let l = &self.skeleton.length;
        let coeffs: BTreeMap<i64, PuiseuxScalar> = self
            .coeffs
            .iter()
            .map(|(m, c)| {
                let from_head = match &pair.1 {
                    Val::Infinite => Val::Infinite,
                    Val::Finite(v) => Val::Finite(v - &(Rational::from_int(*m) * l.clone())),
                };
                let floor = pair.0.clone().max(from_head);
                (*m, c.truncated(&floor))
            })
            .filter(|(_, c)| !c.is_exact_zero())
            .collect();
        AnnulusSeries {
            skeleton: self.skeleton.clone(),
            window: self.window,
            coeffs,
            bound: pair_min(self.bound.clone(), pair.clone()),
        }
    }

    /// Power series inverse of a unit with strictly dominant index 0, by
    /// Newton iteration. The iteration stops when the residual error is
    /// below `tol` at both endpoints, or when its support has provably left
    /// the window; the leftover error is folded into the bounds.
    pub fn inv_unit(&self, window: (i64, i64), tol: &BoundPair) -> Result<Self> {
        let u0 = self.known_at(0).ok_or_else(|| {
            Error::NoDominantTerm("inverse needs a known index-0 coefficient".into())
        })?;
        let u0_inv = PuiseuxScalar::inv(&u0)?;
        // w = u/u0 - 1
        let w = self
            .scale_scalar(&u0_inv)
            .sub(&AnnulusSeries::one(self.skeleton.clone()));
        if w.is_exact_zero() {
            return Ok(AnnulusSeries::monomial(self.skeleton.clone(), 0, u0_inv));
        }
        let u_side = self.stored_hull().unwrap_or((0, 0));
        // error support is only meaningful while everything stays exact
        let mut err_support = if w.exact_outside() {
            w.stored_hull()
        } else {
            None
        };
        let mut err = w.neg().restricted(window.0, window.1);
        let mut v = AnnulusSeries::one(self.skeleton.clone());
        let mut escaped = false;
        for _ in 0..64 {
            if err.negligible(tol) {
                break;
            }
            if let Some((lo, hi)) = err_support {
                let right = lo > window.1 && u_side.0 >= 0;
                let left = hi < window.0 && u_side.1 <= 0;
                if right || left {
                    escaped = true;
                    break;
                }
            }
            // v(1+e) halves the log of the error: 1 - u/u0·v(1+e) = e^2
            v = v.add(&v.mul(&err).restricted(window.0, window.1));
            err = err.mul(&err).restricted(window.0, window.1);
            err_support = err_support.map(|(a, b)| (2 * a, 2 * b));
        }
        if !err.negligible(tol) && !escaped {
            return Err(Error::NonConvergent(
                "unit inversion did not reach the tolerance".into(),
            ));
        }
        // leftover error in (1+w)^{-1} relative to v is (1+w)^{-1}·e, and
        // (1+w)^{-1} has unit size at both endpoints
        let err_pair = err.total_min_pair();
        let folded = if escaped {
            // the error provably never touches the window: bound only
            v.with_bound(err_pair)
        } else {
            v.contaminated(&err_pair)
        };
        Ok(folded
            .scale_scalar(&u0_inv)
            .restricted(window.0, window.1))
    }

    /// Integer power of a unit (index 0 dominant for negative exponents).
    pub fn pow_int(&self, n: i64, window: (i64, i64), tol: &BoundPair) -> Result<Self> {
        if n == 0 {
            return Ok(AnnulusSeries::one(self.skeleton.clone()));
        }
        let base = if n > 0 {
            self.clone()
        } else {
            self.inv_unit(window, tol)?
        };
        let mut acc = base.clone();
        for _ in 1..n.abs() {
            acc = acc.mul(&base).restricted(window.0, window.1);
        }
        Ok(acc)
    }

    /// Exponential of a series whose content is strictly positive on the
    /// skeleton, or has one-sided support so that the sum is finite
    /// coefficient-wise inside the window.
    pub fn exp(&self, window: (i64, i64), tol: &BoundPair) -> Result<Self> {
        let mut sum = AnnulusSeries::one(self.skeleton.clone());
        if self.is_exact_zero() {
            return Ok(sum);
        }
        let arg_support = if self.exact_outside() {
            self.stored_hull()
        } else {
            None
        };
        let x = self.restricted(window.0, window.1);
        let mut term = AnnulusSeries::one(self.skeleton.clone());
        let mut term_support = Some((0i64, 0i64));
        let mut k = Rational::zero();
        let mut steps = 0usize;
        let (negligible, escaped) = loop {
            k += Rational::one();
            term = term
                .mul(&x)
                .restricted(window.0, window.1)
                .scale_scalar(&PuiseuxScalar::constant(k.recip().unwrap()));
            term_support = match (term_support, arg_support) {
                (Some((a, b)), Some((c, d))) => Some((a + c, b + d)),
                _ => None,
            };
            if term.negligible(tol) {
                break (true, false);
            }
            if let (Some((lo, hi)), Some((alo, ahi))) = (term_support, arg_support) {
                // one-sided argument: all later terms stay out of the window
                if (alo >= 1 && lo > window.1) || (ahi <= -1 && hi < window.0) {
                    break (false, true);
                }
            }
            sum = sum.add(&term);
            steps += 1;
            if steps > 512 {
                return Err(Error::NonConvergent(
                    "exponential did not reach the tolerance".into(),
                ));
            }
        };
        let tail_pair = term.total_min_pair();
        let folded = if negligible {
            sum.contaminated(&tail_pair)
        } else {
            debug_assert!(escaped);
            sum.with_bound(tail_pair)
        };
        Ok(folded.restricted(window.0, window.1))
    }

    /// Agreement on all jointly known coefficients.
    pub fn agrees_on_known(&self, other: &Self) -> bool {
        self.first_disagreement(other).is_none()
    }

    /// The first jointly known coefficient where the two series disagree.
    pub fn first_disagreement(&self, other: &Self) -> Option<i64> {
        let lo = self.window.0.min(other.window.0);
        let hi = self.window.1.max(other.window.1);
        (lo..=hi).find(|&i| {
            matches!(
                (self.known_at(i), other.known_at(i)),
                (Some(a), Some(b)) if !a.agrees_with(&b)
            )
        })
    }

    /// The unique index whose monomial strictly dominates the series at
    /// every skeleton point (checked at the endpoints; dominance is affine
    /// in the skeleton coordinate). Strict at closed endpoints, limit-strict
    /// at open ones.
    pub fn dominant_index(&self) -> Result<i64> {
        let l = &self.skeleton.length;
        let zero = Rational::zero();
        let closed = self.skeleton.closed;
        'candidates: for (n, cn) in &self.coeffs {
            let val_n = match cn.valuation() {
                crate::puiseux::Valuation::Finite(v) => v,
                _ => continue,
            };
            for (i, ci) in &self.coeffs {
                if i == n {
                    continue;
                }
                let lb = ci.val_lower_bound();
                if !dominates_at(&val_n, *n, &lb, Some(*i), &zero, closed[0], 1)
                    || !dominates_at(&val_n, *n, &lb, Some(*i), l, closed[1], -1)
                {
                    continue 'candidates;
                }
            }
            // Unknown out-of-window content is constrained by the endpoint
            // bound pair: any competitor line lies above the chord through
            // the bounds, and a tie at an open endpoint forces the
            // competitor's index past the window on the winning side.
            if !self.exact_outside() {
                let an0 = val_n.clone();
                let anl = &val_n + &(Rational::from_int(*n) * l.clone());
                let cmp = |a: &Rational, b: &Val| match b {
                    Val::Infinite => std::cmp::Ordering::Less,
                    Val::Finite(v) => a.cmp(v),
                };
                use std::cmp::Ordering::*;
                // a tie at one open endpoint forces the competitor's index
                // past the window on the side where the candidate wins the
                // slope comparison; a tie at both open endpoints would force
                // the competitor to the candidate's own in-window index
                let ok = match (cmp(&an0, &self.bound.0), cmp(&anl, &self.bound.1)) {
                    (Less, Less) => true,
                    (Equal, Less) => !closed[0],
                    (Less, Equal) => !closed[1],
                    (Equal, Equal) => !closed[0] && !closed[1],
                    _ => false,
                };
                if !ok {
                    continue 'candidates;
                }
            }
            return Ok(*n);
        }
        Err(Error::NoDominantTerm(format!("series {}", self)))
    }
}

impl fmt::Display for AnnulusSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})s^{}", c, i)?;
        }
        if first {
            write!(f, "0")?;
        }
        if !self.exact_outside() {
            write!(f, " [+unknown >= ({}, {})]", self.bound.0, self.bound.1)?;
        }
        Ok(())
    }
}

/// Dominance comparison between the candidate `n` (exact valuation `val_n`)
/// and a competitor with valuation lower bound `bound_i` at one endpoint.
fn dominates_at(
    val_n: &Rational,
    n: i64,
    bound_i: &Val,
    i: Option<i64>,
    x: &Rational,
    closed: bool,
    toward_interior: i64,
) -> bool {
    let an = val_n + &(Rational::from_int(n) * x.clone());
    let ai = match bound_i {
        Val::Infinite => return true,
        Val::Finite(v) => v + &(Rational::from_int(i.unwrap_or(0)) * x.clone()),
    };
    if an < ai {
        return true;
    }
    if closed || an > ai {
        return false;
    }
    // open endpoint, exact tie: compare slopes in the interior direction
    match i {
        Some(i) => (n - i) * toward_interior < 0,
        None => false, // no index information for windowless content
    }
}

/// The differential form `series · ds/s` on an oriented annulus.
#[derive(Clone, PartialEq, Debug)]
pub struct AnnulusForm {
    pub series: AnnulusSeries,
}

impl AnnulusForm {
    pub fn new(series: AnnulusSeries) -> Self {
        AnnulusForm { series }
    }

    pub fn skeleton(&self) -> &Skeleton {
        self.series.skeleton()
    }

    /// The binomial form `(c_n s^n + c_0) ds/s`.
    pub fn binomial(skeleton: Skeleton, n: i64, c_n: PuiseuxScalar, c_0: PuiseuxScalar) -> Self {
        let mut series = AnnulusSeries::monomial(skeleton.clone(), n, c_n);
        series = series.add(&AnnulusSeries::monomial(skeleton, 0, c_0));
        AnnulusForm { series }
    }

    /// Residue along the annulus: the index-0 coefficient.
    pub fn residue(&self) -> Result<PuiseuxScalar> {
        self.series.known_at(0).ok_or_else(|| {
            Error::WindowTooSmall(format!(
                "index 0 outside window [{}, {}]",
                self.series.window().0,
                self.series.window().1
            ))
        })
    }

    pub fn dominant_index(&self) -> Result<i64> {
        self.series.dominant_index()
    }

    /// The dominant index, which is the slope of the level function along
    /// the skeleton.
    pub fn level_slope(&self) -> Result<i64> {
        self.dominant_index()
    }

    /// True iff the known coefficients already form `(c_n s^n + c_0) ds/s`
    /// with the required dominance.
    pub fn is_good(&self) -> bool {
        let n = match self.dominant_index() {
            Ok(n) => n,
            Err(_) => return false,
        };
        self.series
            .stored()
            .all(|(i, c)| *i == n || *i == 0 || c.is_zero_to_prec())
    }

    /// Valuation gap between the non-binomial content and the dominant
    /// monomial: smallest valuation a known non-binomial term takes on the
    /// skeleton, minus the largest valuation the dominant monomial takes on
    /// the skeleton. `Infinite` iff the form is good to precision.
    pub fn epsilon_gap(&self) -> Result<Val> {
        let n = self.dominant_index()?;
        let cn = self.series.known_at(n).unwrap();
        let val_n = match cn.valuation() {
            crate::puiseux::Valuation::Finite(v) => v,
            _ => return Err(Error::PrecisionExhausted("dominant coefficient".into())),
        };
        let l = &self.series.skeleton().length;
        let dom_max = {
            let a0 = val_n.clone();
            let al = val_n + Rational::from_int(n) * l.clone();
            a0.max(al)
        };
        let mut min_rest = Val::Infinite;
        for (i, c) in self.series.stored() {
            if *i == n || *i == 0 || c.is_zero_to_prec() {
                continue;
            }
            let v = match c.valuation() {
                crate::puiseux::Valuation::Finite(v) => v,
                _ => continue,
            };
            let a0 = v.clone();
            let al = v + Rational::from_int(*i) * l.clone();
            min_rest = min_rest.min(Val::Finite(a0.min(al)));
        }
        Ok(match min_rest {
            Val::Infinite => Val::Infinite,
            Val::Finite(v) => Val::Finite(v - dom_max),
        })
    }
}

impl fmt::Display for AnnulusForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) ds/s", self.series)
    }
}

/// A coordinate change on an oriented annulus: `t = s·u(s)` (orientation
/// preserving) or `t = c·s^{-1}·u(s)` (orientation reversing, `val(c) = L`).
/// The unit `u` has strictly dominant index 0 with a valuation-0 leading
/// coefficient, as a series in the `s`-side coordinate.
#[derive(Clone, PartialEq, Debug)]
pub struct CoordinateChange {
    pub unit: AnnulusSeries,
    /// `None` for orientation preserving; the constant `c` otherwise.
    pub reversal: Option<PuiseuxScalar>,
}

impl CoordinateChange {
    pub fn identity(skeleton: Skeleton) -> Self {
        CoordinateChange {
            unit: AnnulusSeries::one(skeleton),
            reversal: None,
        }
    }

    pub fn preserving(unit: AnnulusSeries) -> Result<Self> {
        Self::check_unit(&unit)?;
        Ok(CoordinateChange {
            unit,
            reversal: None,
        })
    }

    pub fn reversing(unit: AnnulusSeries, constant: PuiseuxScalar) -> Result<Self> {
        Self::check_unit(&unit)?;
        match constant.valuation() {
            crate::puiseux::Valuation::Finite(v) if v == unit.skeleton().length => {}
            v => {
                return Err(Error::Structural(format!(
                    "reversal constant must have valuation {} (the skeleton length), got {:?}",
                    unit.skeleton().length,
                    v
                )))
            }
        }
        Ok(CoordinateChange {
            unit,
            reversal: Some(constant),
        })
    }

    fn check_unit(unit: &AnnulusSeries) -> Result<()> {
        let n = unit.dominant_index()?;
        if n != 0 {
            return Err(Error::Structural(format!(
                "coordinate-change unit must be dominated by index 0, got {n}"
            )));
        }
        let c0 = unit.known_at(0).unwrap();
        match c0.valuation() {
            crate::puiseux::Valuation::Finite(v) if v.is_zero() => Ok(()),
            v => Err(Error::Structural(format!(
                "coordinate-change unit must have a valuation-0 leading coefficient, got {:?}",
                v
            ))),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.reversal.is_none()
            && self
                .unit
                .stored()
                .all(|(i, c)| *i == 0 && c == &PuiseuxScalar::one())
            && self.unit.exact_outside()
    }

    /// Skeleton of the source (`s`-side) coordinate.
    pub fn source_skeleton(&self) -> &Skeleton {
        self.unit.skeleton()
    }
}

/// Expresses a form, given as a series in the coordinate `t`, in the old
/// coordinate `s` of the change (`t = s·u` or `t = c·s^{-1}·u`): substitute
/// and use `dt/t = ±ds/s + du/u`.
pub fn pullback(form: &AnnulusForm, change: &CoordinateChange) -> Result<AnnulusForm> {
    let window_hint = {
        let (lo, hi) = form.series.window();
        let (ulo, uhi) = change.unit.window();
        let span = (uhi - ulo) + 2;
        match change.reversal {
            None => (lo - span, hi + span),
            Some(_) => (-hi - span, -lo + span),
        }
    };
    pullback_in_window(form, change, window_hint)
}

/// [`pullback`] with an explicit result window.
pub fn pullback_in_window(
    form: &AnnulusForm,
    change: &CoordinateChange,
    window: (i64, i64),
) -> Result<AnnulusForm> {
    let s_skel = change.source_skeleton().clone();
    let t_skel = match change.reversal {
        None => s_skel.clone(),
        Some(_) => s_skel.reversed(),
    };
    if form.skeleton() != &t_skel {
        return Err(Error::Structural(format!(
            "pullback skeleton mismatch: form on L={} vs change on L={}",
            form.skeleton().length,
            s_skel.length
        )));
    }

    let u = &change.unit;
    // truncation tolerance: comfortably below everything the form knows
    let tol = {
        let (k0, kl) = form.series.total_min_pair();
        let slack = Rational::from_int(2 * DEFAULT_PREC);
        (k0 + &slack, kl + &slack)
    };

    // du/u = (s u'/u) ds/s
    let dlog = u
        .log_derivative()
        .mul(&u.inv_unit(window, &tol)?)
        .restricted(window.0, window.1);

    // Σ a_i t^i rewritten in s; powers of u computed incrementally
    let mut substituted = AnnulusSeries::zero(s_skel.clone());
    let mut pow_cache: BTreeMap<i64, AnnulusSeries> = BTreeMap::new();
    pow_cache.insert(0, AnnulusSeries::one(s_skel.clone()));
    let reversing = change.reversal.is_some();
    for (i, a) in form.series.stored() {
        if !pow_cache.contains_key(i) {
            let step = if *i > 0 {
                u.clone()
            } else {
                u.inv_unit(window, &tol)?
            };
            let dir = if *i > 0 { 1 } else { -1 };
            let mut k = *i - dir;
            while !pow_cache.contains_key(&k) {
                k -= dir;
            }
            while k != *i {
                let next = pow_cache[&k].mul(&step).restricted(window.0, window.1);
                k += dir;
                pow_cache.insert(k, next);
            }
        }
        let coeff = match &change.reversal {
            None => a.clone(),
            Some(c) => a.mul(&c.pow_int(*i)?),
        };
        let shift = if reversing { -*i } else { *i };
        let term = pow_cache[i].shift_index(shift).scale_scalar(&coeff);
        substituted = substituted.add(&term).restricted(window.0, window.1);
    }
    // unknown content of the original form contaminates everything in the
    // new coordinate: fold its endpoint bound (endpoints swap on reversal)
    let fb = form.series.bound();
    let form_bound = if reversing {
        (fb.1.clone(), fb.0.clone())
    } else {
        fb.clone()
    };
    if form_bound != INF_PAIR {
        let floored: BTreeMap<i64, PuiseuxScalar> = substituted
            .coeffs
            .iter()
            .map(|(m, c)| {
                let from_head = match &form_bound.1 {
                    Val::Infinite => Val::Infinite,
                    Val::Finite(v) => {
                        Val::Finite(v - &(Rational::from_int(*m) * s_skel.length.clone()))
                    }
                };
                let floor = form_bound.0.clone().max(from_head);
                (*m, c.truncated(&floor))
            })
            .filter(|(_, c)| !c.is_exact_zero())
            .collect();
        substituted = AnnulusSeries {
            skeleton: substituted.skeleton.clone(),
            window: substituted.window,
            coeffs: floored,
            bound: pair_min(substituted.bound.clone(), form_bound),
        };
    }

    let base = if reversing {
        AnnulusSeries::one(s_skel.clone()).neg()
    } else {
        AnnulusSeries::one(s_skel.clone())
    };
    let jacobian = base.add(&dlog);
    let result = substituted.mul(&jacobian).restricted(window.0, window.1);
    Ok(AnnulusForm::new(result))
}

/// Result of the good-coordinate normalization: the coordinate change, the
/// binomial data, and the per-iteration valuation gaps.
#[derive(Clone, Debug)]
pub struct GoodCoordinate {
    pub change: CoordinateChange,
    pub n: i64,
    pub c_n: PuiseuxScalar,
    pub c_0: PuiseuxScalar,
    pub iterations: usize,
    pub gaps: Vec<Val>,
}

impl GoodCoordinate {
    /// The binomial form `(c_n t^n + c_0) dt/t` this normalization reached.
    pub fn binomial_form(&self, skeleton: Skeleton) -> AnnulusForm {
        AnnulusForm::binomial(skeleton, self.n, self.c_n.clone(), self.c_0.clone())
    }
}

/// Iteration cap for the successive-approximation loop.
const MAX_ITERATIONS: usize = 64;

/// Finds a coordinate `t = s·u(s)` in which the form becomes binomial
/// `(c_n t^n + c_0) dt/t` with the `t^n` term strictly dominant, matching
/// the input on every known coefficient.
///
/// For slope 0 the unit is an explicit exponential. Otherwise corrections
/// are solved from the linearized form identity and applied until every
/// non-binomial coefficient of the residual is zero to precision.
pub fn good_coordinate(form: &AnnulusForm) -> Result<GoodCoordinate> {
    let skel = form.skeleton().clone();
    let n = form.dominant_index()?;
    let c_0 = form.residue()?;

    if form.is_good() {
        let c_n = if n == 0 {
            PuiseuxScalar::zero()
        } else {
            form.series.known_at(n).unwrap()
        };
        return Ok(GoodCoordinate {
            change: CoordinateChange::identity(skel),
            n,
            c_n,
            c_0,
            iterations: 0,
            gaps: vec![],
        });
    }

    let (wlo, whi) = form.series.window();

    if n == 0 {
        // u = exp(Σ_{i≠0} a_i/(i·a_0) s^i)
        let a0_inv = c_0
            .inv()
            .map_err(|_| Error::NoDominantTerm("slope-0 form with unknown residue".into()))?;
        let mut arg = AnnulusSeries::zero(skel.clone());
        for (i, a) in form.series.stored() {
            if *i == 0 {
                continue;
            }
            let c = a.mul(&a0_inv).scale(&Rational::new(1, *i));
            arg = arg.add(&AnnulusSeries::monomial(skel.clone(), *i, c));
        }
        let tol = {
            let (k0, kl) = form.series.total_min_pair();
            let slack = Rational::from_int(DEFAULT_PREC);
            (k0 + &slack, kl + &slack)
        };
        let uwin = (wlo.min(0) * 4 - 4, whi.max(0) * 4 + 4);
        let unit = arg.exp(uwin, &tol)?;
        let change = CoordinateChange::preserving(unit)?;
        // defensive check of c_0·dt/t = ω via the inversion-free identity
        // c_0·(u + s·u') = F·u
        let u = &change.unit;
        let lhs = u.add(&u.log_derivative()).scale_scalar(&c_0);
        let rhs = form.series.mul(u);
        let residual = lhs.sub(&rhs);
        if !residual.is_zero_to_prec() {
            return Err(Error::NonConvergent(format!(
                "exponential normalization left a visible residual {}",
                residual
            )));
        }
        return Ok(GoodCoordinate {
            change,
            n: 0,
            c_n: PuiseuxScalar::zero(),
            c_0,
            iterations: 1,
            gaps: vec![Val::Infinite],
        });
    }

    let mut c_n = form.series.known_at(n).unwrap();
    let mut unit = AnnulusSeries::one(skel.clone());
    // room for a couple of correction products before anything is demoted
    let uwin = ((2 * (wlo - n)).min(0) - 2, (2 * (whi - n)).max(0) + 2);
    let mut gaps: Vec<Val> = vec![form.epsilon_gap()?];
    let mut last_progress: Option<Val> = None;
    let mut iterations = 0usize;

    loop {
        let change = CoordinateChange::preserving(unit.clone())?;
        let back = pullback_in_window(
            &AnnulusForm::binomial(skel.clone(), n, c_n.clone(), c_0.clone()),
            &change,
            (wlo, whi),
        )?;
        let residual = back.series.sub(&form.series);

        if iterations > 0 {
            // the residual plus the dominant monomial has the gap of the
            // transformed form in the stated convention
            let gap = AnnulusForm::new(
                residual
                    .clone()
                    .add(&AnnulusSeries::monomial(skel.clone(), n, c_n.clone())),
            )
            .epsilon_gap()?;
            gaps.push(gap);
        }

        if residual.is_zero_to_prec() {
            if iterations > 0 {
                *gaps.last_mut().unwrap() = Val::Infinite;
            }
            return Ok(GoodCoordinate {
                change,
                n,
                c_n,
                c_0,
                iterations,
                gaps,
            });
        }

        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergent(format!(
                "no convergence after {MAX_ITERATIONS} steps; residual {}",
                residual
            )));
        }

        // defensive progress check on the visible residual valuation
        let progress = {
            let p = residual.known_nonzero_min_pair();
            p.0.min(p.1)
        };
        if let Some(last) = &last_progress {
            if &progress <= last {
                return Err(Error::NonConvergent(format!(
                    "residual stopped shrinking at valuation {}",
                    progress
                )));
            }
        }
        last_progress = Some(progress);

        // corrections from the linearized identity: the residual at index m
        // is cancelled by e_{m-n} = -Δ_m / (c_n · m)
        let mut eps = AnnulusSeries::zero(skel.clone());
        for (m, d) in residual.stored() {
            if d.is_zero_to_prec() {
                continue;
            }
            if *m == n {
                c_n = c_n.sub(d);
                continue;
            }
            if *m == 0 {
                // residues of the two sides agree identically; a visible
                // index-0 residual signals an internal inconsistency
                return Err(Error::NonConvergent(format!(
                    "residual has a visible residue component {}",
                    d
                )));
            }
            let e = d.neg().div(&c_n.scale(&Rational::from_int(*m)))?;
            eps = eps.add(&AnnulusSeries::monomial(skel.clone(), m - n, e));
        }
        let one = AnnulusSeries::one(skel.clone());
        unit = unit.mul(&one.add(&eps)).restricted(uwin.0, uwin.1);
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::PuiseuxScalar as P;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn t_scalar() -> P {
        P::t_pow(Rational::one())
    }

    fn skel(n: i64, d: i64) -> Skeleton {
        Skeleton::closed_interval(r(n, d))
    }

    fn series(sk: Skeleton, window: (i64, i64), coeffs: Vec<(i64, P)>) -> AnnulusSeries {
        AnnulusSeries::new(sk, window, coeffs).unwrap()
    }

    #[test]
    fn val_at_examples() {
        assert_eq!(val_at(&t_scalar(), 2, &r(1, 2)).unwrap(), r(2, 1));
        assert_eq!(val_at(&P::one(), 0, &r(7, 3)).unwrap(), r(0, 1));
        assert_eq!(val_at(&P::t_pow(r(-1, 1)), 3, &r(1, 3)).unwrap(), r(0, 1));
        assert!(val_at(&P::unknown(r(5, 1)), 1, &r(1, 2)).is_err());
    }

    #[test]
    fn dominant_index_examples() {
        // {1: 1, 0: t} on L = 1/2: index 1 dominates (x < 1 everywhere)
        let s = series(skel(1, 2), (0, 1), vec![(1, P::one()), (0, t_scalar())]);
        assert_eq!(s.dominant_index().unwrap(), 1);

        let s = series(skel(1, 1), (0, 0), vec![(0, P::from_int(5))]);
        assert_eq!(s.dominant_index().unwrap(), 0);

        // {1: 1, -1: 1} on L = 2: tie at the tail endpoint
        let s = series(skel(2, 1), (-1, 1), vec![(1, P::one()), (-1, P::one())]);
        assert!(matches!(s.dominant_index(), Err(Error::NoDominantTerm(_))));
    }

    #[test]
    fn dominance_tie_at_open_endpoint() {
        // (1 + s): tie at x = 0; open tail lets the lower index win
        let mut sk = skel(1, 1);
        sk.closed = [false, true];
        let s = series(sk.clone(), (0, 1), vec![(0, P::one()), (1, P::one())]);
        assert_eq!(s.dominant_index().unwrap(), 0);
        // closed tail: no dominant term
        let s = series(skel(1, 1), (0, 1), vec![(0, P::one()), (1, P::one())]);
        assert!(s.dominant_index().is_err());
    }

    #[test]
    fn residue_examples() {
        let s = series(
            skel(1, 1),
            (-2, 2),
            vec![
                (-2, P::t_pow(r(1, 2)).scale(&r(3, 1))),
                (0, P::from_int(5)),
                (2, P::one()),
            ],
        );
        assert_eq!(AnnulusForm::new(s).residue().unwrap(), P::from_int(5));

        let s = series(skel(1, 1), (0, 2), vec![(1, P::from_int(7))]);
        assert_eq!(AnnulusForm::new(s).residue().unwrap(), P::zero());

        let s = series(skel(1, 1), (1, 4), vec![(1, P::from_int(7))])
            .with_bound((Val::finite(0, 1), Val::finite(0, 1)));
        assert!(matches!(
            AnnulusForm::new(s).residue(),
            Err(Error::WindowTooSmall(_))
        ));
    }

    #[test]
    fn level_slope_examples() {
        let s = series(skel(1, 1), (0, 0), vec![(0, P::from_int(3))]);
        assert_eq!(AnnulusForm::new(s).level_slope().unwrap(), 0);

        // (s + t·1) ds/s on L = 1/2
        let s = series(skel(1, 2), (0, 1), vec![(1, P::one()), (0, t_scalar())]);
        assert_eq!(AnnulusForm::new(s).level_slope().unwrap(), 1);

        // (t·s^{-2} + t^2) ds/s on L = 1/4
        let s = series(
            skel(1, 4),
            (-2, 0),
            vec![(-2, t_scalar()), (0, P::t_pow(r(2, 1)))],
        );
        assert_eq!(AnnulusForm::new(s).level_slope().unwrap(), -2);
    }

    #[test]
    fn is_good_examples() {
        let s = series(skel(1, 1), (0, 0), vec![(0, P::from_int(5))]);
        assert!(AnnulusForm::new(s).is_good());

        // (s + t) ds/s on L = 1/2
        let s = series(skel(1, 2), (0, 1), vec![(1, P::one()), (0, t_scalar())]);
        assert!(AnnulusForm::new(s).is_good());

        // (1 + s) ds/s on a closed interval: tie at x = 0
        let s = series(skel(1, 1), (0, 1), vec![(0, P::one()), (1, P::one())]);
        assert!(!AnnulusForm::new(s).is_good());
    }

    #[test]
    fn epsilon_gap_worked_example() {
        // (s + t·s^2) ds/s on [0, 1/4]: gap 3/4
        let s = series(skel(1, 4), (0, 2), vec![(1, P::one()), (2, t_scalar())]);
        assert_eq!(AnnulusForm::new(s).epsilon_gap().unwrap(), Val::finite(3, 4));
        // good form: infinite gap
        let s = series(skel(1, 2), (0, 1), vec![(1, P::one()), (0, t_scalar())]);
        assert_eq!(AnnulusForm::new(s).epsilon_gap().unwrap(), Val::Infinite);
    }

    #[test]
    fn pullback_identity_and_reversal() {
        let sk = skel(1, 1);
        let w = series(sk.clone(), (0, 1), vec![(0, P::one()), (1, P::one())]);
        let form = AnnulusForm::new(w);
        let id = CoordinateChange::identity(sk.clone());
        let back = pullback(&form, &id).unwrap();
        assert!(back.series.agrees_on_known(&form.series));

        // dt/t under t = c·s^{-1}: -ds/s, residue flips sign
        let dtt = AnnulusForm::new(series(sk.clone(), (0, 0), vec![(0, P::one())]));
        let c = P::t_pow(r(1, 1));
        let rev = CoordinateChange::reversing(AnnulusSeries::one(sk.clone()), c).unwrap();
        let back = pullback(&dtt, &rev).unwrap();
        assert_eq!(back.residue().unwrap(), P::from_int(-1));
        assert_eq!(back.series.known_at(1).unwrap(), P::zero());
    }

    #[test]
    fn pullback_log_derivative_shape() {
        // dt/t with t = s·(1+s) on (0, 1]: result (1 + s/(1+s)) ds/s
        // = (1 + s - s^2 + s^3 - ...) ds/s
        let mut sk = skel(1, 1);
        sk.closed = [false, true];
        let unit = series(sk.clone(), (0, 1), vec![(0, P::one()), (1, P::one())]);
        let chg = CoordinateChange::preserving(unit).unwrap();
        let dtt = AnnulusForm::new(series(sk.clone(), (0, 0), vec![(0, P::one())]));
        let back = pullback_in_window(&dtt, &chg, (0, 4)).unwrap();
        for (i, expect) in [(0, 1i64), (1, 1), (2, -1), (3, 1)] {
            let got = back.series.known_at(i).unwrap();
            assert!(
                got.agrees_with(&P::from_int(expect)) && !got.is_zero_to_prec(),
                "coefficient {i}: got {got}"
            );
        }
    }

    #[test]
    fn good_coordinate_constant_form() {
        let s = series(skel(1, 1), (0, 0), vec![(0, P::from_int(3))]);
        let gc = good_coordinate(&AnnulusForm::new(s)).unwrap();
        assert!(gc.change.is_identity());
        assert_eq!(gc.iterations, 0);
        assert_eq!(gc.n, 0);
        assert!(gc.c_n.is_exact_zero());
    }

    #[test]
    fn good_coordinate_exponential_branch() {
        // (1 + s) ds/s on (0, 1], open at the tail: t = s·exp(s)
        let mut sk = skel(1, 1);
        sk.closed = [false, true];
        let form = AnnulusForm::new(series(
            sk.clone(),
            (0, 1),
            vec![(0, P::one()), (1, P::one())],
        ));
        let gc = good_coordinate(&form).unwrap();
        assert_eq!(gc.n, 0);
        assert_eq!(gc.c_0, P::one());
        assert_eq!(gc.iterations, 1);
        assert_eq!(gc.gaps, vec![Val::Infinite]);
        // the unit is the exponential series
        assert_eq!(gc.change.unit.known_at(1).unwrap(), P::one());
        assert_eq!(gc.change.unit.known_at(2).unwrap(), P::constant(r(1, 2)));
        assert_eq!(gc.change.unit.known_at(3).unwrap(), P::constant(r(1, 6)));
    }

    #[test]
    fn good_coordinate_slope_one() {
        // (s + c0 + t·s^2) ds/s with val(c0) = 2 > L = 1, coefficients known
        // to precision 24
        let sk = skel(1, 1);
        let c0 = P::t_pow(r(2, 1));
        let prec = Val::finite(crate::puiseux::DEFAULT_PREC, 1);
        let form = AnnulusForm::new(series(
            sk.clone(),
            (0, 2),
            vec![
                (1, P::one().truncated(&prec)),
                (0, c0.clone().truncated(&prec)),
                (2, t_scalar().truncated(&prec)),
            ],
        ));
        let gc = good_coordinate(&form).unwrap();
        assert_eq!(gc.n, 1);
        assert!(gc.c_0.agrees_with(&c0));
        assert!(gc.iterations >= 1);
        let back = pullback_in_window(&gc.binomial_form(sk), &gc.change, (0, 2)).unwrap();
        assert!(back.series.agrees_on_known(&form.series));
        // recorded gaps grow at least linearly
        if let Val::Finite(g0) = &gc.gaps[0] {
            for (j, g) in gc.gaps.iter().enumerate().skip(1) {
                if let Val::Finite(g) = g {
                    assert!(g >= &(g0.clone() * Rational::from_int(j as i64 + 1)));
                }
            }
        }
    }

    #[test]
    fn residue_invariant_under_unit_change() {
        // unit coefficients chosen so that 1 strictly dominates on [0, 1/2]
        let sk = skel(1, 2);
        let unit = series(
            sk.clone(),
            (-1, 2),
            vec![
                (0, P::one()),
                (1, t_scalar().scale(&r(1, 3))),
                (-1, t_scalar()),
                (2, t_scalar().scale(&r(-2, 5))),
            ],
        );
        let chg = CoordinateChange::preserving(unit).unwrap();
        let form = AnnulusForm::new(series(
            sk.clone(),
            (-2, 2),
            vec![
                (-2, t_scalar().scale(&r(3, 1))),
                (0, P::from_int(5)),
                (2, P::one()),
            ],
        ));
        let back = pullback(&form, &chg).unwrap();
        assert!(back.residue().unwrap().agrees_with(&P::from_int(5)));
    }
}
