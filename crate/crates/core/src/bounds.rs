//! Upper and lower bounds on `C(N, q, W)`, the largest `n` admitting an
//! `SHF(N; n, q, W)`.
//!
//! Integer-valued bounds use arbitrary precision. The perfect-hash and p*
//! bounds are real-valued and carry the [`BoundFlag::RealValued`] flag; the
//! ones that drop a `(1 + o(1))` factor also carry
//! [`BoundFlag::AsymptoticApproximate`].

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::pstar::{pstar_closed_form, pstar_optimize, PStarError};
use crate::separation::SeparationType;

/// Stopping tolerance handed to the p* optimizer by the composed bound.
pub const PSTAR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{0} needs at least two weights")]
    TooFewParts(&'static str),
    #[error("{0} needs u = sum of weights >= 2")]
    SmallSum(&'static str),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("alphabet size {q} must equal the number of parts {t}")]
    AlphabetMismatch { q: u32, t: usize },
    #[error("every weight must be at least 2, found {0}")]
    WeightOne(usize),
    #[error("upper bound {upper} fell below lower bound {lower}")]
    Inconsistent { upper: f64, lower: f64 },
    #[error(transparent)]
    PStar(#[from] PStarError),
}

/// A bound value: exact integer, double, or `+infinity` for vacuous types.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundValue {
    Integer(BigUint),
    Real(f64),
    Infinite,
}

impl BoundValue {
    pub fn int(v: u64) -> Self {
        BoundValue::Integer(BigUint::from(v))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            BoundValue::Integer(v) => v.to_f64().unwrap_or(f64::INFINITY),
            BoundValue::Real(v) => *v,
            BoundValue::Infinite => f64::INFINITY,
        }
    }

    pub fn as_integer(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Integer(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, BoundValue::Infinite)
    }

    /// Total order; exact between integers, via `f64` otherwise.
    pub fn compare(&self, other: &BoundValue) -> Ordering {
        match (self, other) {
            (BoundValue::Integer(a), BoundValue::Integer(b)) => a.cmp(b),
            (BoundValue::Infinite, BoundValue::Infinite) => Ordering::Equal,
            (BoundValue::Infinite, _) => Ordering::Greater,
            (_, BoundValue::Infinite) => Ordering::Less,
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Integer(v) => write!(f, "{v}"),
            BoundValue::Real(v) => write!(f, "{v}"),
            BoundValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Integers that fit in `u64` and reals serialize as JSON numbers; larger
/// integers and infinity as strings.
impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            BoundValue::Integer(v) => match v.to_u64() {
                Some(small) => serializer.serialize_u64(small),
                None => serializer.serialize_str(&v.to_string()),
            },
            BoundValue::Real(v) => serializer.serialize_f64(*v),
            BoundValue::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// The formula that produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Provenance {
    /// Johnson-type recursion `q^l + max(u-1, C(N-l, W - e_i))`, minimized by dynamic programming.
    Johnson,
    /// `r q^ceil(N/(u-1)) + (u-1-r) q^floor(N/(u-1))` with `N = r mod (u-1)`, `1 <= r <= u-1`.
    JohnsonClosedForm,
    /// `(w1 w2 + u - w1 - w2) q` at `N = u - 1`.
    Blackburn,
    /// `(u - 1) q` at `N = u - 1`.
    Trung,
    /// `(q-1)^2 + 1` for `C(2w, q, {w,w})`.
    NiuCao,
    /// `(u-1) q^ceil(N/(u-1))` from stacking rows into a larger alphabet.
    GroupingComposition,
    /// `2^-u (1 - g(q,u))^(-N/(u-1))`, a lower bound.
    ProbLower,
    /// Perfect-hash bound, minimum over `0 <= j <= t-2`.
    PhfMinOverJ,
    /// Reduction to a perfect-hash family on the `p* N` rows separating a fixed tuple.
    PStarComposition,
    /// Equal-weight closed form of the p* composition.
    PStarEqualWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFlag {
    /// Formula hypothesis `C(floor(N/(u-1)), q, W) >= u` is assumed, not verified.
    AssumesHypothesis,
    /// A bound stated at `N = u - 1` applied at smaller `N` through row monotonicity.
    MonotonicityExtended,
    /// A `(1 + o(1))` factor was replaced by 1.
    AsymptoticApproximate,
    RealValued,
    /// `q < u`, so `g(q, u) = 0` and the lower bound collapses to `2^-u`.
    Degenerate,
    /// Reaches below the vacuous floor `u - 1`; never chosen as the best bound.
    BelowVacuousFloor,
    /// Exceeded by an explicit family found by exhaustive search (e.g. nine
    /// columns at `N = 4, q = 3, {2,2}`); listed, never chosen as the best bound.
    Contradicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    #[serde(rename = "N")]
    pub rows: usize,
    pub q: u32,
    pub weights: SeparationType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: BoundValue,
    pub kind: BoundKind,
    pub provenance: Provenance,
    pub params: BoundParams,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<BoundFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundResult {
    fn upper(value: BoundValue, provenance: Provenance, rows: usize, q: u32, sep: &SeparationType) -> Self {
        BoundResult {
            value,
            kind: BoundKind::Upper,
            provenance,
            params: BoundParams {
                rows,
                q,
                weights: sep.clone(),
            },
            flags: Vec::new(),
            note: None,
        }
    }

    fn flagged(mut self, flag: BoundFlag) -> Self {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
        self
    }

    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

fn big_pow(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn require_parts(sep: &SeparationType, what: &'static str) -> Result<(), BoundsError> {
    if sep.t() < 2 {
        return Err(BoundsError::TooFewParts(what));
    }
    Ok(())
}

/// `g(q, j) = q (q-1) .. (q-j+1) / q^j`, exactly. Zero when `j > q`.
pub fn g(q: u32, j: usize) -> Result<BigRational, BoundsError> {
    if j < 1 || q < 1 {
        return Err(BoundsError::Range(format!(
            "g(q, j) needs q >= 1 and j >= 1, got q = {q}, j = {j}"
        )));
    }
    if j > q as usize {
        return Ok(BigRational::zero());
    }
    let falling = (0..j).fold(BigInt::one(), |acc, i| acc * BigInt::from(q as usize - i));
    Ok(BigRational::new(falling, BigInt::from(big_pow(q, j))))
}

fn g_f64(q: u32, j: usize) -> f64 {
    (0..j)
        .map(|i| (q as f64 - i as f64) / q as f64)
        .product::<f64>()
        .max(0.0)
}

pub fn blackburn_bound(q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    require_parts(sep, "the Blackburn bound")?;
    let (w1, w2, u) = (sep.weights()[0] as u64, sep.weights()[1] as u64, sep.u() as u64);
    let factor = w1 * w2 + u - w1 - w2;
    Ok(BoundResult::upper(
        BoundValue::Integer(BigUint::from(factor) * q),
        Provenance::Blackburn,
        sep.u() - 1,
        q,
        sep,
    ))
}

pub fn trung_bound(q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    require_parts(sep, "the Trung bound")?;
    let u = sep.u();
    Ok(BoundResult::upper(
        BoundValue::Integer(BigUint::from(u - 1) * q),
        Provenance::Trung,
        u - 1,
        q,
        sep,
    ))
}

/// `(q-1)^2 + 1`, stated as a bound on `C(2w, q, {w,w})`.
///
/// Exhaustive search gives `C(4, 2, {2,2}) = 4` and `C(4, 3, {2,2}) = 9`, both
/// above this value, so the result is flagged [`BoundFlag::Contradicted`].
pub fn niu_cao_bound(q: u32, w: usize) -> Result<BoundResult, BoundsError> {
    if w < 2 {
        return Err(BoundsError::Range(format!("the Niu-Cao bound needs w >= 2, got {w}")));
    }
    let sep = SeparationType::new(vec![w, w]).expect("valid type");
    let side = BigUint::from(q - 1);
    Ok(BoundResult::upper(
        BoundValue::Integer(&side * &side + 1u32),
        Provenance::NiuCao,
        2 * w,
        q,
        &sep,
    )
    .flagged(BoundFlag::Contradicted))
}

/// `r q^ceil(N/(u-1)) + (u-1-r) q^floor(N/(u-1))` with `1 <= r <= u-1`, `N = r (mod u-1)`.
///
/// The formula's hypothesis `C(floor(N/(u-1)), q, W) >= u` is not checked; the
/// result carries [`BoundFlag::AssumesHypothesis`].
pub fn johnson_closed_form_bound(rows: usize, q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    let u = sep.u();
    if u < 2 {
        return Err(BoundsError::SmallSum("the closed-form recursion bound"));
    }
    if rows < 1 {
        return Err(BoundsError::Range("N must be at least 1".into()));
    }
    let m = u - 1;
    let r = (rows - 1) % m + 1;
    let value = BigUint::from(r) * big_pow(q, rows.div_ceil(m)) + BigUint::from(m - r) * big_pow(q, rows / m);
    Ok(
        BoundResult::upper(BoundValue::Integer(value), Provenance::JohnsonClosedForm, rows, q, sep)
            .flagged(BoundFlag::AssumesHypothesis)
            .noted(format!("r = {r}")),
    )
}

/// `(u-1) q^ceil(N/(u-1))`.
pub fn grouping_composition_bound(rows: usize, q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    let u = sep.u();
    if u < 2 {
        return Err(BoundsError::SmallSum("the grouping bound"));
    }
    let value = BigUint::from(u - 1) * big_pow(q, rows.div_ceil(u - 1));
    Ok(BoundResult::upper(
        BoundValue::Integer(value),
        Provenance::GroupingComposition,
        rows,
        q,
        sep,
    ))
}

/// `Some(v)` is a finite bound, `None` is `+infinity`.
type Capacity = Option<BigUint>;

/// Memoized Johnson-type recursion for a fixed alphabet size.
///
/// Base cases:
/// - one part left: `+infinity` (a single part is always separated);
/// - `W = {1,1}`: `q^N` (separation means distinct columns);
/// - `N = 0`: `u - 1` (no row separates anything, so only vacuous families exist);
/// - `N = u - 1`: `(u - 1) q`;
/// - `N = 1`: `max(q, u - 1)` (one row separates iff the columns are distinct).
///
/// The memo is shared behind a lock; every key always maps to the same value,
/// so concurrent writers are idempotent.
pub struct JohnsonEngine {
    q: u32,
    memo: RwLock<HashMap<(usize, SeparationType), Capacity>>,
}

impl JohnsonEngine {
    pub fn new(q: u32) -> Self {
        JohnsonEngine {
            q,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    fn base_case(&self, rows: usize, sep: &SeparationType) -> Option<Capacity> {
        let u = sep.u();
        if sep.t() == 1 {
            Some(None)
        } else if sep.weights() == [1, 1] {
            Some(Some(big_pow(self.q, rows)))
        } else if rows == 0 {
            Some(Some(BigUint::from(u - 1)))
        } else if rows == u - 1 {
            Some(Some(BigUint::from(u - 1) * self.q))
        } else if rows == 1 {
            Some(Some(BigUint::from((self.q as usize).max(u - 1))))
        } else {
            None
        }
    }

    /// `q^l + max(u - 1, B(N - l, W with weight `index` decremented))`.
    pub fn step(&self, rows: usize, sep: &SeparationType, l: usize, index: usize) -> Capacity {
        let reduced = sep.decremented(index).expect("t >= 2 leaves a nonempty type");
        let floor = BigUint::from(sep.u() - 1);
        let rest = self.bound(rows - l, &reduced)?;
        Some(big_pow(self.q, l) + rest.max(floor))
    }

    pub fn bound(&self, rows: usize, sep: &SeparationType) -> Capacity {
        if let Some(v) = self.base_case(rows, sep) {
            return v;
        }
        let key = (rows, sep.clone());
        if let Some(v) = self.memo.read().expect("memo lock").get(&key) {
            return v.clone();
        }
        let mut best: Capacity = None;
        for l in 1..=rows {
            let mut previous = None;
            for (index, &w) in sep.weights().iter().enumerate() {
                if previous == Some(w) {
                    continue;
                }
                previous = Some(w);
                if let Some(v) = self.step(rows, sep, l, index) {
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
            }
        }
        self.memo.write().expect("memo lock").insert(key, best.clone());
        best
    }
}

fn capacity_value(c: Capacity) -> BoundValue {
    c.map_or(BoundValue::Infinite, BoundValue::Integer)
}

/// One application of the Johnson-type inequality with the reduced instance
/// bounded by the full recursion. `index` is 0-based into the sorted weights.
pub fn johnson_step(
    rows: usize,
    q: u32,
    sep: &SeparationType,
    l: usize,
    index: usize,
) -> Result<BoundResult, BoundsError> {
    require_parts(sep, "the Johnson step")?;
    if l < 1 || l > rows {
        return Err(BoundsError::Range(format!("l = {l} must lie in [1, {rows}]")));
    }
    if index >= sep.t() {
        return Err(BoundsError::Range(format!(
            "weight index {index} must be below t = {}",
            sep.t()
        )));
    }
    let engine = JohnsonEngine::new(q);
    Ok(BoundResult::upper(
        capacity_value(engine.step(rows, sep, l, index)),
        Provenance::Johnson,
        rows,
        q,
        sep,
    )
    .noted(format!("l = {l}, decremented weight index {index}")))
}

pub fn johnson_recursive_bound(rows: usize, q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    johnson_recursive_bound_with(&JohnsonEngine::new(q), rows, sep)
}

pub fn johnson_recursive_bound_with(
    engine: &JohnsonEngine,
    rows: usize,
    sep: &SeparationType,
) -> Result<BoundResult, BoundsError> {
    require_parts(sep, "the Johnson recursion")?;
    Ok(BoundResult::upper(
        capacity_value(engine.bound(rows, sep)),
        Provenance::Johnson,
        rows,
        engine.q,
        sep,
    ))
}

/// `2^-u (1 - g(q, u))^(-N/(u-1))`, a lower bound on `C(N, q, W)` from random constructions.
pub fn prob_lower_bound(rows: usize, q: u32, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    let u = sep.u();
    if u < 2 {
        return Err(BoundsError::SmallSum("the probabilistic lower bound"));
    }
    let g = g_f64(q, u);
    let value = 2f64.powi(-(u as i32)) * (1.0 - g).powf(-(rows as f64) / (u - 1) as f64);
    let mut result =
        BoundResult::upper(BoundValue::Real(value), Provenance::ProbLower, rows, q, sep).flagged(BoundFlag::RealValued);
    result.kind = BoundKind::Lower;
    if (q as usize) < u {
        result = result.flagged(BoundFlag::Degenerate);
    }
    Ok(result)
}

/// Value and minimizing `j` of the perfect-hash bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhfEvaluation {
    pub value: f64,
    pub j: usize,
}

/// `min over 0 <= j <= t-2 of (t-j-1) ((q-j)/(t-j-1))^(g(q, j+1) N)` with a real row count.
pub fn phf_evaluate(rows: f64, q: u32, t: usize) -> Result<PhfEvaluation, BoundsError> {
    if t < 2 || (q as usize) < t {
        return Err(BoundsError::Range(format!(
            "the perfect-hash bound needs q >= t >= 2, got q = {q}, t = {t}"
        )));
    }
    let mut best = PhfEvaluation {
        value: f64::INFINITY,
        j: 0,
    };
    for j in 0..=t - 2 {
        let coefficient = (t - j - 1) as f64;
        let base = (q as f64 - j as f64) / coefficient;
        let value = coefficient * base.powf(g_f64(q, j + 1) * rows);
        if value < best.value {
            best = PhfEvaluation { value, j };
        }
    }
    Ok(best)
}

/// Upper bound on `C(N, q, {1,..,1})` with `t` ones; exact `q^N` when `t = 2`.
pub fn phf_upper_bound(rows: usize, q: u32, t: usize) -> Result<BoundResult, BoundsError> {
    let eval = phf_evaluate(rows as f64, q, t)?;
    let sep = SeparationType::perfect(t).expect("t >= 2");
    if t == 2 {
        return Ok(BoundResult::upper(
            BoundValue::Integer(big_pow(q, rows)),
            Provenance::PhfMinOverJ,
            rows,
            q,
            &sep,
        )
        .noted("j = 0"));
    }
    Ok(
        BoundResult::upper(BoundValue::Real(eval.value), Provenance::PhfMinOverJ, rows, q, &sep)
            .flagged(BoundFlag::RealValued)
            .flagged(BoundFlag::AsymptoticApproximate)
            .noted(format!("j = {}", eval.j)),
    )
}

/// `min(2^(t! N / t^(t-1)), (t-1) (t/(t-1))^N)`, the `q = t` specialization.
pub fn phf_equal_alphabet_bound(rows: f64, t: usize) -> Result<f64, BoundsError> {
    if t < 2 {
        return Err(BoundsError::Range(format!("need t >= 2, got {t}")));
    }
    let tf = t as f64;
    let factorial: f64 = (1..=t).map(|k| k as f64).product();
    let first = 2f64.powf(factorial * rows / tf.powi(t as i32 - 1));
    let second = (tf - 1.0) * (tf / (tf - 1.0)).powf(rows);
    Ok(first.min(second))
}

/// `C(N, t, W) <= C(p* N, t, {1,..,1}) + u - t` for `q = t` and all weights at least 2.
///
/// Equal weights use the closed-form p* and also evaluate the equal-weight
/// closed form; the smaller value is returned.
pub fn pstar_composition_bound(rows: usize, t: usize, sep: &SeparationType) -> Result<BoundResult, BoundsError> {
    if sep.t() != t {
        return Err(BoundsError::AlphabetMismatch {
            q: t as u32,
            t: sep.t(),
        });
    }
    require_parts(sep, "the p* composition")?;
    if sep.min_weight() < 2 {
        return Err(BoundsError::WeightOne(sep.min_weight()));
    }
    let u = sep.u();
    let extra = (u - t) as f64;
    let (pstar, how) = if sep.is_equal_weight() {
        (pstar_closed_form(t, sep.min_weight())?, "closed form")
    } else {
        (pstar_optimize(sep, PSTAR_TOLERANCE)?.value, "optimizer")
    };
    let reduced_rows = pstar * rows as f64;
    let general = phf_evaluate(reduced_rows, t as u32, t)?;
    let mut best = (
        general.value + extra,
        Provenance::PStarComposition,
        format!("p* = {pstar} ({how}), j = {}", general.j),
    );
    if sep.is_equal_weight() {
        let w = sep.min_weight() as i32;
        let tf = t as f64;
        let factorial: f64 = (1..=t).map(|k| k as f64).product();
        let first = 2f64.powf(factorial * factorial * rows as f64 / tf.powi(t as i32 * w - 1));
        let second = (tf - 1.0) * (tf / (tf - 1.0)).powf(factorial * rows as f64 / tf.powi(t as i32 * w - t as i32));
        let closed = first.min(second) + extra;
        if closed < best.0 {
            best = (
                closed,
                Provenance::PStarEqualWeight,
                format!("p* = {pstar} (closed form)"),
            );
        }
    }
    let mut result = BoundResult::upper(BoundValue::Real(best.0), best.1, rows, t as u32, sep)
        .flagged(BoundFlag::RealValued)
        .flagged(BoundFlag::AsymptoticApproximate)
        .noted(best.2);
    if best.0 < (u - 1) as f64 {
        result = result.flagged(BoundFlag::BelowVacuousFloor);
    }
    Ok(result)
}

/// Every applicable upper bound plus the probabilistic lower bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub best: BoundResult,
    /// Upper bounds, ascending by value.
    pub upper: Vec<BoundResult>,
    pub lower: BoundResult,
}

impl BoundReport {
    /// Upper bounds followed by the lower bound when requested, ascending by value.
    pub fn sorted(&self, include_lower: bool) -> Vec<BoundResult> {
        let mut all = self.upper.clone();
        if include_lower {
            all.push(self.lower.clone());
        }
        all.sort_by(|a, b| a.value.compare(&b.value));
        all
    }
}

/// Minimum over every bound applicable to `(N, q, W)`.
///
/// Applicability: Trung and Blackburn at `N <= u - 1` (flagged when extended
/// below `u - 1`); Niu-Cao at `N = 2w`, `W = {w,w}`; the p* composition at
/// `q = t` with all weights at least 2; the closed-form recursion, the Johnson
/// recursion and grouping always. Ties go to the earlier bound in that order.
pub fn best_upper_bound(rows: usize, q: u32, sep: &SeparationType) -> Result<BoundReport, BoundsError> {
    best_upper_bound_with(&JohnsonEngine::new(q), rows, sep)
}

pub fn best_upper_bound_with(
    engine: &JohnsonEngine,
    rows: usize,
    sep: &SeparationType,
) -> Result<BoundReport, BoundsError> {
    require_parts(sep, "best_upper_bound")?;
    let q = engine.q();
    let u = sep.u();
    let mut upper = Vec::new();
    if rows < u {
        let extend = |b: BoundResult| {
            let mut b = b;
            b.params.rows = rows;
            if rows < u - 1 {
                b = b.flagged(BoundFlag::MonotonicityExtended);
            }
            b
        };
        upper.push(extend(trung_bound(q, sep)?));
        upper.push(extend(blackburn_bound(q, sep)?));
    }
    if sep.t() == 2 && sep.is_equal_weight() && sep.min_weight() >= 2 && rows == sep.u() {
        upper.push(niu_cao_bound(q, sep.min_weight())?);
    }
    if rows >= 1 {
        upper.push(johnson_closed_form_bound(rows, q, sep)?);
    }
    upper.push(johnson_recursive_bound_with(engine, rows, sep)?);
    upper.push(grouping_composition_bound(rows, q, sep)?);
    if q as usize == sep.t() && sep.min_weight() >= 2 {
        upper.push(pstar_composition_bound(rows, sep.t(), sep)?);
    }

    let floor = BoundValue::int(u as u64 - 1);
    for b in &mut upper {
        if b.value.compare(&floor) == Ordering::Less && !b.flags.contains(&BoundFlag::BelowVacuousFloor) {
            b.flags.push(BoundFlag::BelowVacuousFloor);
        }
    }
    let best = upper
        .iter()
        .filter(|b| {
            !b.flags
                .iter()
                .any(|f| matches!(f, BoundFlag::BelowVacuousFloor | BoundFlag::Contradicted))
        })
        .min_by(|a, b| a.value.compare(&b.value))
        .expect("the recursion bounds always apply")
        .clone();
    let lower = prob_lower_bound(rows, q, sep)?;
    if best.value.compare(&lower.value) == Ordering::Less {
        return Err(BoundsError::Inconsistent {
            upper: best.value.to_f64(),
            lower: lower.value.to_f64(),
        });
    }
    upper.sort_by(|a, b| a.value.compare(&b.value));
    Ok(BoundReport { best, upper, lower })
}
