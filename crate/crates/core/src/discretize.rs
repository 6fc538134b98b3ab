//! Ordinary n-systems that agree with a generalized one on a discrete set,
//! and uniform approximations built from them.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plmap::PLMap;
use crate::rat::{int, serde_rat, serde_rat_vec, Rat};
use crate::systems::{canonical_ramp, rising_band, validate_nsystem, GenNSystem, NSystem};

/// Strictly increasing finite list of points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteSet(#[serde(with = "serde_rat_vec")] Vec<Rat>);

impl DiscreteSet {
    /// Sorts and removes duplicates.
    pub fn from_points(mut points: Vec<Rat>) -> Self {
        points.sort();
        points.dedup();
        DiscreteSet(points)
    }

    pub fn points(&self) -> &[Rat] {
        &self.0
    }

    /// `D ∪ D_0 ∪ {a, b}`, where `D_0` is the breakpoint set of the map.
    fn augmented(&self, p: &PLMap) -> Result<Vec<Rat>> {
        if let Some(t) = self.0.iter().find(|t| !p.contains(t)) {
            return Err(Error::OutOfDomain { q: t.clone(), lo: p.start().clone(), hi: p.end().clone() });
        }
        let mut all: Vec<Rat> = self.0.iter().chain(p.breakpoints()).cloned().collect();
        all.sort();
        all.dedup();
        Ok(all)
    }
}

/// An n-system agreeing with `p` at every point of `d`.
///
/// On each gap `[t_1, t_2]` of the augmented set the map is linear with a
/// rising band of width `m` and constants summing to `c`; the band is
/// replaced by the canonical m-ramp shifted down by `c/m`.
pub fn discretize(p: &GenNSystem, d: &DiscreteSet) -> Result<NSystem> {
    let map = p.map();
    let points = d.augmented(map)?;
    let values = map.eval_sorted(&points)?;
    let bands = (0..map.segment_count())
        .map(|k| rising_band(&map.slopes(k)?).map_err(Error::Malformed))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Spliced { bps: vec![points[0].clone()], vals: vec![values[0].clone()], riser: None };
    let mut seg = 0;
    for i in 0..points.len() - 1 {
        let (t1, t2) = (&points[i], &points[i + 1]);
        while map.breakpoints()[seg + 1] <= *t1 {
            seg += 1;
        }
        let (lo, hi) = bands[seg];
        let m = hi - lo + 1;
        if m == 1 {
            out.push(lo, t2.clone(), values[i + 1].clone());
            continue;
        }
        let c: Rat = values[i][..lo].iter().chain(&values[i][hi + 1..]).sum();
        let shift = c / int(m as i64);
        let ramp = canonical_ramp(m, t1, t2)?;
        let ramp = ramp.map();
        for r in 1..=m {
            let mut row = values[i].clone();
            for (j, x) in ramp.value_at(r).iter().enumerate() {
                row[lo + j] = x - &shift;
            }
            out.push(lo + m - r, ramp.breakpoints()[r].clone(), row);
        }
    }
    let joined = PLMap::new(out.bps, out.vals)?;
    let system = validate_nsystem(joined).map_err(Error::Violation)?;
    let check = system.map().eval_sorted(&points)?;
    if let Some(i) = (0..points.len()).find(|&i| check[i] != values[i]) {
        return Err(Error::Precondition(format!("discretized system differs from the input at {}", points[i])));
    }
    Ok(system)
}

/// Single-riser segments glued end to end; a junction between two
/// segments with the same riser is dropped.
struct Spliced {
    bps: Vec<Rat>,
    vals: Vec<Vec<Rat>>,
    riser: Option<usize>,
}

impl Spliced {
    fn push(&mut self, riser: usize, t: Rat, v: Vec<Rat>) {
        if self.riser == Some(riser) {
            self.bps.pop();
            self.vals.pop();
        }
        self.bps.push(t);
        self.vals.push(v);
        self.riser = Some(riser);
    }
}

/// Exact uniform distance between two maps on the same interval, attained
/// at a point of the union of their breakpoints.
pub fn sup_distance(a: &PLMap, b: &PLMap) -> Result<(Rat, Rat)> {
    if a.start() != b.start() || a.end() != b.end() {
        return Err(Error::EndpointMismatch { left: a.start().clone(), right: b.start().clone() });
    }
    let mut qs: Vec<Rat> = a.breakpoints().iter().chain(b.breakpoints()).cloned().collect();
    qs.sort();
    qs.dedup();
    let mut best = (Rat::zero(), a.start().clone());
    let (ea, eb) = (a.eval_sorted(&qs)?, b.eval_sorted(&qs)?);
    for ((q, va), vb) in qs.into_iter().zip(ea).zip(eb) {
        let d = va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Rat::zero);
        if d > best.0 {
            best = (d, q);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Approximation {
    pub system: NSystem,
    #[serde(with = "serde_rat")]
    pub eps: Rat,
    pub grid: DiscreteSet,
    #[serde(with = "serde_rat")]
    pub sup_distance: Rat,
    #[serde(with = "serde_rat")]
    pub attained_at: Rat,
    pub ok: bool,
}

/// Discretizes on the multiples of `ε/2` in the domain and certifies the
/// uniform distance exactly.
pub fn approximate(p: &GenNSystem, eps: &Rat) -> Result<Approximation> {
    if *eps <= Rat::zero() {
        return Err(Error::Precondition(format!("ε = {eps} must be positive")));
    }
    let map = p.map();
    let h = eps / int(2);
    let first = (map.start() / &h).ceil().to_integer();
    let last = (map.end() / &h).floor().to_integer();
    let mut points = Vec::new();
    let mut k = first;
    while k <= last {
        points.push(Rat::from_integer(k.clone()) * &h);
        k += 1;
    }
    let grid = DiscreteSet::from_points(points);
    let system = discretize(p, &grid)?;
    let (sup, at) = sup_distance(map, system.map())?;
    let ok = sup <= *eps;
    Ok(Approximation { system, eps: eps.clone(), grid, sup_distance: sup, attained_at: at, ok })
}
