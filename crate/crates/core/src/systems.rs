//! Axiom checks for n-systems (S1)–(S3) and generalized n-systems (G1)–(G3),
//! plus the two elementary constructions: the canonical ramp between two
//! diagonal points and the gluing of systems at a diagonal point.
//!
//! Ordering and the sum condition are affine, so they are checked at
//! breakpoints only; slope conditions are checked once per segment.
//! Violations are reported axiom by axiom, in domain order within an axiom.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plmap::{PLMap, PLMapJson};
use crate::rat::{int, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    S1,
    S2,
    S3,
    G1,
    G2,
    G3,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Location {
    Breakpoint {
        index: usize,
        #[serde(with = "crate::rat::serde_rat")]
        q: Rat,
    },
    Segment {
        index: usize,
        #[serde(with = "crate::rat::serde_rat")]
        from: Rat,
        #[serde(with = "crate::rat::serde_rat")]
        to: Rat,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub axiom: Axiom,
    pub location: Location,
    pub detail: String,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Breakpoint { index, q } => write!(f, "{:?} at breakpoint {index} (q = {q}): {}", self.axiom, self.detail),
            Location::Segment { index, from, to } => {
                write!(f, "{:?} on segment {index} [{from}, {to}]: {}", self.axiom, self.detail)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    NSystem,
    Generalized,
}

impl SystemKind {
    pub fn tag(self) -> &'static str {
        match self {
            SystemKind::NSystem => "n-system",
            SystemKind::Generalized => "generalized",
        }
    }
}

fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn at_breakpoint(p: &PLMap, axiom: Axiom, k: usize, detail: String) -> ViolationReport {
    ViolationReport { axiom, location: Location::Breakpoint { index: k, q: p.breakpoints()[k].clone() }, detail }
}

fn on_segment(p: &PLMap, axiom: Axiom, k: usize, detail: String) -> ViolationReport {
    let bps = p.breakpoints();
    ViolationReport {
        axiom,
        location: Location::Segment { index: k, from: bps[k].clone(), to: bps[k + 1].clone() },
        detail,
    }
}

/// (S1)/(G1) at breakpoint `k`: `0 ≤ P_1 ≤ … ≤ P_n` and `ΣP_j = q`.
pub fn check_order_and_sum(p: &PLMap, k: usize, axiom: Axiom) -> Option<ViolationReport> {
    let q = &p.breakpoints()[k];
    let v = p.value_at(k);
    if v[0] < Rat::zero() {
        return Some(at_breakpoint(p, axiom, k, format!("P_1 = {} is negative", v[0])));
    }
    if let Some(j) = (1..v.len()).find(|&j| v[j - 1] > v[j]) {
        return Some(at_breakpoint(p, axiom, k, format!("P_{} = {} exceeds P_{} = {}", j, v[j - 1], j + 1, v[j])));
    }
    let sum: Rat = v.iter().sum();
    if &sum != q {
        return Some(at_breakpoint(p, axiom, k, format!("components {} sum to {sum}, not q = {q}", fmt_vec(v))));
    }
    None
}

/// The contiguous rising band `(lo, hi)` (0-based, inclusive) of a slope
/// vector, if the vector has the shape required by (G2): slope `1/m` on an
/// index range of length `m`, zero elsewhere.
pub fn rising_band(slopes: &[Rat]) -> std::result::Result<(usize, usize), String> {
    let rising: Vec<usize> = (0..slopes.len()).filter(|&j| !slopes[j].is_zero()).collect();
    let (lo, hi) = match (rising.first(), rising.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err("no component rises".into()),
    };
    if rising.len() != hi - lo + 1 {
        let idx: Vec<String> = rising.iter().map(|j| (j + 1).to_string()).collect();
        return Err(format!("rising components {{{}}} are not contiguous", idx.join(", ")));
    }
    let expected = Rat::new(1.into(), ((hi - lo + 1) as i64).into());
    if let Some(j) = (lo..=hi).find(|&j| slopes[j] != expected) {
        return Err(format!("P_{} has slope {} but a band of width {} needs {expected}", j + 1, slopes[j], hi - lo + 1));
    }
    Ok((lo, hi))
}

/// (S2) on segment `k`: exactly one component of slope 1, the rest constant.
pub fn check_single_riser(p: &PLMap, k: usize) -> Option<ViolationReport> {
    single_riser(p, k, &p.slopes_unchecked(k))
}

fn single_riser(p: &PLMap, k: usize, s: &[Rat]) -> Option<ViolationReport> {
    let rising: Vec<usize> = (0..s.len()).filter(|&j| !s[j].is_zero()).collect();
    if rising.len() != 1 || !s[rising[0]].is_one() {
        return Some(on_segment(p, Axiom::S2, k, format!("slope vector {} is not a unit vector", fmt_vec(s))));
    }
    None
}

/// (G2) on segment `k`.
pub fn check_band(p: &PLMap, k: usize) -> Option<ViolationReport> {
    band(p, k, &p.slopes_unchecked(k))
}

fn band(p: &PLMap, k: usize, s: &[Rat]) -> Option<ViolationReport> {
    match rising_band(s) {
        Err(why) => Some(on_segment(p, Axiom::G2, k, format!("slope vector {}: {why}", fmt_vec(s)))),
        Ok((lo, hi)) => {
            let v = p.value_at(k);
            if (lo..hi).any(|j| v[j] != v[j + 1]) {
                Some(on_segment(
                    p,
                    Axiom::G2,
                    k,
                    format!("band P_{}..P_{} rises together but starts at unequal values {}", lo + 1, hi + 1, fmt_vec(&v[lo..=hi])),
                ))
            } else {
                None
            }
        }
    }
}

fn unit_index(s: &[Rat]) -> usize {
    s.iter().position(|x| !x.is_zero()).unwrap_or(0)
}

/// (S3) at interior breakpoint `k`. Assumes (S2) holds on both sides.
pub fn check_switch(p: &PLMap, k: usize) -> Option<ViolationReport> {
    if k == 0 || k + 1 >= p.breakpoints().len() {
        return None;
    }
    switch(p, k, &p.slopes_unchecked(k - 1), &p.slopes_unchecked(k))
}

fn switch(p: &PLMap, k: usize, left: &[Rat], right: &[Rat]) -> Option<ViolationReport> {
    let r = unit_index(left);
    let s = unit_index(right);
    let v = p.value_at(k);
    if r < s && (r..s).any(|j| v[j] != v[j + 1]) {
        return Some(at_breakpoint(
            p,
            Axiom::S3,
            k,
            format!("slope moves from P_{} to P_{} but P_{}..P_{} = {} are not all equal", r + 1, s + 1, r + 1, s + 1, fmt_vec(&v[r..=s])),
        ));
    }
    None
}

/// (G3) at interior breakpoint `k`, including the companion condition that
/// `r̲ ≥ s̄` forces `r̲ > s̄` and `P_{r̲}(q) > P_{s̄}(q)`. Assumes (G2) holds
/// on both sides.
pub fn check_band_switch(p: &PLMap, k: usize) -> Option<ViolationReport> {
    if k == 0 || k + 1 >= p.breakpoints().len() {
        return None;
    }
    band_switch(p, k, &p.slopes_unchecked(k - 1), &p.slopes_unchecked(k))
}

fn band_switch(p: &PLMap, k: usize, left: &[Rat], right: &[Rat]) -> Option<ViolationReport> {
    let left = rising_band(left).ok()?;
    let right = rising_band(right).ok()?;
    if left == right {
        return None;
    }
    let (rl, _) = left;
    let (_, sh) = right;
    let v = p.value_at(k);
    if rl < sh {
        if (rl..sh).any(|j| v[j] != v[j + 1]) {
            return Some(at_breakpoint(
                p,
                Axiom::G3,
                k,
                format!("P_{}..P_{} = {} are not all equal", rl + 1, sh + 1, fmt_vec(&v[rl..=sh])),
            ));
        }
    } else if rl == sh || v[rl] <= v[sh] {
        return Some(at_breakpoint(
            p,
            Axiom::G3,
            k,
            format!("left band starts at P_{} but right band ends at P_{} with P_{} = {} not above P_{} = {}", rl + 1, sh + 1, rl + 1, v[rl], sh + 1, v[sh]),
        ));
    }
    None
}

/// Every violation of the chosen axiom set, grouped by axiom and in domain
/// order within each group. Switch conditions are only evaluated when the
/// slope conditions hold everywhere.
pub fn violations(p: &PLMap, kind: SystemKind) -> Vec<ViolationReport> {
    let order_tag = match kind {
        SystemKind::NSystem => Axiom::S1,
        SystemKind::Generalized => Axiom::G1,
    };
    let mut out: Vec<ViolationReport> =
        (0..p.breakpoints().len()).filter_map(|k| check_order_and_sum(p, k, order_tag)).collect();
    let slopes: Vec<Vec<Rat>> = (0..p.segment_count()).map(|k| p.slopes_unchecked(k)).collect();
    let slope_violations: Vec<ViolationReport> = (0..p.segment_count())
        .filter_map(|k| match kind {
            SystemKind::NSystem => single_riser(p, k, &slopes[k]),
            SystemKind::Generalized => band(p, k, &slopes[k]),
        })
        .collect();
    let slopes_ok = slope_violations.is_empty();
    out.extend(slope_violations);
    if slopes_ok {
        out.extend((1..p.segment_count()).filter_map(|k| match kind {
            SystemKind::NSystem => switch(p, k, &slopes[k - 1], &slopes[k]),
            SystemKind::Generalized => band_switch(p, k, &slopes[k - 1], &slopes[k]),
        }));
    }
    out
}

/// Re-runs the single check named by a report at its location.
pub fn recheck(p: &PLMap, report: &ViolationReport) -> bool {
    let index = match report.location {
        Location::Breakpoint { index, .. } | Location::Segment { index, .. } => index,
    };
    let again = match report.axiom {
        Axiom::S1 | Axiom::G1 => check_order_and_sum(p, index, report.axiom),
        Axiom::S2 => check_single_riser(p, index),
        Axiom::G2 => check_band(p, index),
        Axiom::S3 => check_switch(p, index),
        Axiom::G3 => check_band_switch(p, index),
    };
    again.is_some()
}

/// An n-system: a [`PLMap`] that passed (S1)–(S3).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NSystem(PLMap);

/// A generalized n-system: a [`PLMap`] that passed (G1)–(G3).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenNSystem(PLMap);

pub fn validate_nsystem(p: PLMap) -> std::result::Result<NSystem, ViolationReport> {
    match violations(&p, SystemKind::NSystem).into_iter().next() {
        Some(v) => Err(v),
        None => Ok(NSystem(p)),
    }
}

pub fn validate_generalized(p: PLMap) -> std::result::Result<GenNSystem, ViolationReport> {
    match violations(&p, SystemKind::Generalized).into_iter().next() {
        Some(v) => Err(v),
        None => Ok(GenNSystem(p)),
    }
}

impl NSystem {
    pub fn map(&self) -> &PLMap {
        &self.0
    }

    pub fn into_map(self) -> PLMap {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    /// Every n-system is a generalized n-system (bands of width one).
    pub fn generalize(self) -> GenNSystem {
        GenNSystem(self.0)
    }

    pub fn to_json(&self) -> String {
        tagged_json(&self.0, SystemKind::NSystem)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        validate_nsystem(PLMap::from_json(s)?).map_err(Error::Violation)
    }
}

impl GenNSystem {
    pub fn map(&self) -> &PLMap {
        &self.0
    }

    pub fn into_map(self) -> PLMap {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn to_json(&self) -> String {
        tagged_json(&self.0, SystemKind::Generalized)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        validate_generalized(PLMap::from_json(s)?).map_err(Error::Violation)
    }
}

pub(crate) fn tagged_json(p: &PLMap, kind: SystemKind) -> String {
    let mut raw = PLMapJson::from(p.clone());
    raw.kind = Some(kind.tag().to_string());
    serde_json::to_string(&raw).expect("PLMap serialization is infallible")
}

impl Serialize for NSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut raw = PLMapJson::from(self.0.clone());
        raw.kind = Some(SystemKind::NSystem.tag().into());
        raw.serialize(s)
    }
}

impl Serialize for GenNSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut raw = PLMapJson::from(self.0.clone());
        raw.kind = Some(SystemKind::Generalized.tag().into());
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = PLMap::deserialize(d)?;
        validate_nsystem(map).map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for GenNSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = PLMap::deserialize(d)?;
        validate_generalized(map).map_err(serde::de::Error::custom)
    }
}

fn diagonal(n: usize, q: &Rat) -> Vec<Rat> {
    vec![q / int(n as i64); n]
}

/// The n-system on `[a, b]` going from `(a/n, …, a/n)` to `(b/n, …, b/n)`
/// with breakpoints `q_i = ((n−i)a + ib)/n`: component `P_j` is constant
/// `a/n` up to `q_{n−j}`, rises with slope 1 to `q_{n−j+1}`, then stays at
/// `b/n`.
pub fn canonical_ramp(n: usize, a: &Rat, b: &Rat) -> Result<NSystem> {
    if n == 0 {
        return Err(Error::Precondition("ramp needs n ≥ 1".into()));
    }
    if *a < Rat::zero() || a >= b {
        return Err(Error::Precondition(format!("ramp needs 0 ≤ a < b, got a = {a}, b = {b}")));
    }
    let nn = int(n as i64);
    let lo = a / &nn;
    let hi = b / &nn;
    let bps: Vec<Rat> = (0..=n).map(|i| (int((n - i) as i64) * a + int(i as i64) * b) / &nn).collect();
    // At q_i the components P_j with n − j < i (the top i of them) have
    // already risen.
    let vals: Vec<Vec<Rat>> = (0..=n)
        .map(|i| (1..=n).map(|j| if n - j < i { hi.clone() } else { lo.clone() }).collect())
        .collect();
    let ramp = NSystem(PLMap::new(bps, vals)?);
    debug_assert!(violations(ramp.map(), SystemKind::NSystem).is_empty());
    Ok(ramp)
}

fn check_junction(first: &PLMap, second: &PLMap) -> Result<()> {
    if first.n() != second.n() {
        return Err(Error::DimensionMismatch { left: first.n(), right: second.n() });
    }
    let b = first.end();
    if b != second.start() {
        return Err(Error::EndpointMismatch { left: b.clone(), right: second.start().clone() });
    }
    let diag = diagonal(first.n(), b);
    for (label, v) in [("first", first.value_at(first.breakpoints().len() - 1)), ("second", second.value_at(0))] {
        if v != diag.as_slice() {
            return Err(Error::Precondition(format!(
                "{label} system takes value {} at the junction {b}, not the diagonal point {}",
                fmt_vec(v),
                fmt_vec(&diag)
            )));
        }
    }
    Ok(())
}

/// Glues two generalized systems meeting at a diagonal point `(b/n, …, b/n)`.
pub fn join(first: &GenNSystem, second: &GenNSystem) -> Result<GenNSystem> {
    check_junction(first.map(), second.map())?;
    validate_generalized(first.map().concat(second.map())?).map_err(Error::Violation)
}

/// Same as [`join`] for ordinary n-systems.
pub fn join_nsystems(first: &NSystem, second: &NSystem) -> Result<NSystem> {
    check_junction(first.map(), second.map())?;
    validate_nsystem(first.map().concat(second.map())?).map_err(Error::Violation)
}
