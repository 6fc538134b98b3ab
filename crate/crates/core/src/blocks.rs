//! Basic generalized n-systems attached to simplex points, their rescaling,
//! and the pasting of rescaled copies into a system on `[1, ∞)` described by
//! a finite cyclic schedule.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plmap::PLMap;
use crate::rat::{int, serde_rat, serde_rat_vec, Rat};
use crate::systems::{validate_generalized, GenNSystem};

/// A point of the closed simplex `0 ≤ a_1 ≤ … ≤ a_n`, `Σ a_i = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SimplexPointJson", into = "SimplexPointJson")]
pub struct SimplexPoint {
    coords: Vec<Rat>,
    strict: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct SimplexPointJson(#[serde(with = "serde_rat_vec")] Vec<Rat>);

impl TryFrom<SimplexPointJson> for SimplexPoint {
    type Error = Error;
    fn try_from(raw: SimplexPointJson) -> Result<Self> {
        SimplexPoint::new(raw.0)
    }
}

impl From<SimplexPoint> for SimplexPointJson {
    fn from(p: SimplexPoint) -> Self {
        SimplexPointJson(p.coords)
    }
}

impl SimplexPoint {
    pub fn new(coords: Vec<Rat>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Precondition("simplex point needs at least one coordinate".into()));
        }
        if coords[0] < Rat::zero() {
            return Err(Error::Precondition(format!("first coordinate {} is negative", coords[0])));
        }
        if let Some(i) = (1..coords.len()).find(|&i| coords[i - 1] > coords[i]) {
            return Err(Error::Precondition(format!(
                "coordinates not non-decreasing: a_{} = {} > a_{} = {}",
                i,
                coords[i - 1],
                i + 1,
                coords[i]
            )));
        }
        let sum: Rat = coords.iter().sum();
        if !sum.is_one() {
            return Err(Error::Precondition(format!("coordinates sum to {sum}, not 1")));
        }
        let strict = coords[0] > Rat::zero() && coords.windows(2).all(|w| w[0] < w[1]);
        Ok(SimplexPoint { coords, strict })
    }

    pub fn barycenter(n: usize) -> Self {
        SimplexPoint::new(vec![Rat::new(1.into(), (n as i64).into()); n]).expect("barycenter lies in the simplex")
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Membership in the open simplex `0 < a_1 < … < a_n`.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn is_barycenter(&self) -> bool {
        self.coords.windows(2).all(|w| w[0] == w[1])
    }
}

/// The basic generalized n-system of a strict simplex point, on
/// `[n·a_1, n·a_n]`.
///
/// Breakpoints are `q_i = a_1+…+a_i + (n−i)a_i` for `i = 1..n` followed by
/// `q_{n−1+i} = (i−1)a_i + a_i+…+a_n` for `i = 2..n`. On the first half the
/// top `n−i` components rise together with slope `1/(n−i)` from level `a_i`
/// to `a_{i+1}`; on the second half the bottom `i` components rise together
/// with slope `1/i` from `a_i` to `a_{i+1}`.
pub fn basic_block(a: &SimplexPoint) -> Result<GenNSystem> {
    let n = a.n();
    if n < 2 {
        return Err(Error::Precondition("basic blocks need n ≥ 2".into()));
    }
    if !a.is_strict() {
        return Err(Error::Precondition("basic blocks need a point of the open simplex".into()));
    }
    let c = a.coords();
    let mut bps = Vec::with_capacity(2 * n - 1);
    let mut vals = Vec::with_capacity(2 * n - 1);

    // First half, k = 1..n: value (a_1, …, a_k, a_k, …, a_k).
    let mut prefix = Rat::zero();
    for k in 1..=n {
        prefix += &c[k - 1];
        bps.push(&prefix + int((n - k) as i64) * &c[k - 1]);
        vals.push((0..n).map(|j| c[j.min(k - 1)].clone()).collect::<Vec<_>>());
    }
    // Second half, i = 1..n−1 ending at q_{n+i}: value
    // (a_{i+1} repeated i+1 times, a_{i+2}, …, a_n).
    let mut suffix: Rat = c.iter().sum();
    for i in 1..n {
        suffix -= &c[i - 1];
        bps.push(int(i as i64) * &c[i] + &suffix);
        vals.push((0..n).map(|j| c[j.max(i)].clone()).collect::<Vec<_>>());
    }
    validate_generalized(PLMap::new(bps, vals)?).map_err(Error::Violation)
}

/// `q ↦ (c/a)·P((a/c)·q)`, moving a system on `[a, b]` to `[c, c·b/a]`.
pub fn rescale(p: &GenNSystem, c: &Rat) -> Result<GenNSystem> {
    let a = p.map().start();
    if a.is_zero() {
        return Err(Error::Precondition("cannot rescale a system whose domain starts at 0".into()));
    }
    if *c <= Rat::zero() {
        return Err(Error::Precondition(format!("rescale target {c} must be positive")));
    }
    let scaled = p.map().scaled(&(c / a))?;
    validate_generalized(scaled).map_err(Error::Violation)
}

/// `a_i(ε) = (a_i + i·ε) / (1 + ε·n(n+1)/2)`: a strict point converging to
/// `a` as `ε → 0`.
pub fn perturb(a: &SimplexPoint, eps: &Rat) -> Result<SimplexPoint> {
    if *eps <= Rat::zero() {
        return Err(Error::Precondition(format!("perturbation ε = {eps} must be positive")));
    }
    let n = a.n() as i64;
    let denom = Rat::one() + eps * int(n * (n + 1) / 2);
    let coords = a.coords().iter().enumerate().map(|(i, x)| (x + eps * int(i as i64 + 1)) / &denom).collect();
    SimplexPoint::new(coords)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Perturbation {
    None,
    /// `ε_i = ε_0 / i`.
    Harmonic {
        #[serde(with = "serde_rat")]
        eps0: Rat,
    },
    /// `ε_i = ε_0 · ρ^(i−1)`.
    Geometric {
        #[serde(with = "serde_rat")]
        eps0: Rat,
        #[serde(with = "serde_rat")]
        rho: Rat,
    },
}

impl Perturbation {
    /// ε for the `i`-th block, `i ≥ 1`.
    pub fn eps(&self, i: usize) -> Option<Rat> {
        match self {
            Perturbation::None => None,
            Perturbation::Harmonic { eps0 } => Some(eps0 / int(i as i64)),
            Perturbation::Geometric { eps0, rho } => Some(eps0 * num_traits::pow(rho.clone(), i - 1)),
        }
    }
}

/// Finite description of a generalized n-system on `[1, ∞)`: the cycle
/// entries are used in turn, non-strict entries being perturbed with the
/// block's `ε_i`. The barycenter is emitted as a straight segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BlockScheduleJson", into = "BlockScheduleJson")]
pub struct BlockSchedule {
    n: usize,
    cycle: Vec<SimplexPoint>,
    perturbation: Perturbation,
}

#[derive(Serialize, Deserialize)]
struct BlockScheduleJson {
    n: usize,
    cycle: Vec<SimplexPoint>,
    perturbation: Perturbation,
}

impl TryFrom<BlockScheduleJson> for BlockSchedule {
    type Error = Error;
    fn try_from(raw: BlockScheduleJson) -> Result<Self> {
        BlockSchedule::new(raw.n, raw.cycle, raw.perturbation)
    }
}

impl From<BlockSchedule> for BlockScheduleJson {
    fn from(s: BlockSchedule) -> Self {
        BlockScheduleJson { n: s.n, cycle: s.cycle, perturbation: s.perturbation }
    }
}

impl BlockSchedule {
    pub fn new(n: usize, cycle: Vec<SimplexPoint>, perturbation: Perturbation) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("schedules need n ≥ 2".into()));
        }
        if cycle.is_empty() {
            return Err(Error::Precondition("schedule cycle is empty".into()));
        }
        if let Some(p) = cycle.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch { left: n, right: p.n() });
        }
        match &perturbation {
            Perturbation::None => {
                if let Some(i) = cycle.iter().position(|p| !p.is_strict() && !p.is_barycenter()) {
                    return Err(Error::Precondition(format!(
                        "cycle entry {i} lies on the simplex boundary and needs a perturbation"
                    )));
                }
            }
            Perturbation::Harmonic { eps0 } => {
                if *eps0 <= Rat::zero() {
                    return Err(Error::Precondition("ε_0 must be positive".into()));
                }
            }
            Perturbation::Geometric { eps0, rho } => {
                if *eps0 <= Rat::zero() || *rho <= Rat::zero() || *rho >= Rat::one() {
                    return Err(Error::Precondition("geometric perturbation needs ε_0 > 0 and 0 < ρ < 1".into()));
                }
            }
        }
        Ok(BlockSchedule { n, cycle, perturbation })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cycle(&self) -> &[SimplexPoint] {
        &self.cycle
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    pub fn is_all_barycenter(&self) -> bool {
        self.cycle.iter().all(SimplexPoint::is_barycenter)
    }

    /// Simplex point actually used by block `i ≥ 1`, or `None` for a
    /// barycenter block.
    pub fn block_point(&self, i: usize) -> Result<Option<SimplexPoint>> {
        let entry = &self.cycle[(i - 1) % self.cycle.len()];
        if entry.is_barycenter() {
            return Ok(None);
        }
        if entry.is_strict() {
            return Ok(Some(entry.clone()));
        }
        let eps = self.perturbation.eps(i).ok_or_else(|| {
            Error::Precondition("boundary cycle entry without perturbation".into())
        })?;
        perturb(entry, &eps).map(Some)
    }
}

/// Block `i` of a realization: its domain and the simplex point used
/// (`None` for a straight barycenter segment).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedBlock {
    #[serde(with = "serde_rat")]
    pub start: Rat,
    #[serde(with = "serde_rat")]
    pub end: Rat,
    pub point: Option<SimplexPoint>,
}

/// A realized schedule truncated to `[1, Q]`. The last block may extend past
/// `Q`; it is then only partially present in `system`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedPrefix {
    pub system: GenNSystem,
    #[serde(with = "serde_rat")]
    pub horizon: Rat,
    pub blocks: Vec<RealizedBlock>,
}

impl RealizedPrefix {
    /// Block boundaries `q_1 = 1 < q_2 < …` that lie inside the prefix.
    pub fn boundaries(&self) -> Vec<Rat> {
        let mut out: Vec<Rat> = self.blocks.iter().map(|b| b.start.clone()).collect();
        if let Some(last) = self.blocks.last() {
            if last.end <= self.horizon {
                out.push(last.end.clone());
            }
        }
        out
    }

    /// Blocks lying entirely inside `[1, Q]`.
    pub fn complete_blocks(&self) -> impl Iterator<Item = &RealizedBlock> {
        self.blocks.iter().filter(move |b| b.end <= self.horizon)
    }
}

/// Pastes rescaled blocks from `q_1 = 1` until the first boundary `≥ Q`,
/// then truncates to `[1, Q]`.
pub fn realize(schedule: &BlockSchedule, horizon: &Rat) -> Result<RealizedPrefix> {
    if *horizon <= Rat::one() {
        return Err(Error::Precondition(format!("horizon Q = {horizon} must exceed 1")));
    }
    let n = schedule.n();
    let nn = int(n as i64);
    let mut bps: Vec<Rat> = Vec::new();
    let mut vals: Vec<Vec<Rat>> = Vec::new();
    let mut blocks = Vec::new();
    let mut q = Rat::one();
    let mut i = 1;
    while q < *horizon {
        let point = schedule.block_point(i)?;
        let piece = match &point {
            None => {
                let end = &q * int(2);
                PLMap::segment(q.clone(), vec![&q / &nn; n], end.clone(), vec![&end / &nn; n])?
            }
            Some(a) => rescale(&basic_block(a)?, &q)?.into_map(),
        };
        let end = piece.end().clone();
        let skip = usize::from(!bps.is_empty());
        bps.extend(piece.breakpoints()[skip..].iter().cloned());
        vals.extend(piece.values()[skip..].iter().cloned());
        blocks.push(RealizedBlock { start: q, end: end.clone(), point });
        q = end;
        i += 1;
    }
    let full = PLMap::new(bps, vals)?;
    let trimmed = if full.end() > horizon { full.restrict(&Rat::one(), horizon)? } else { full };
    // Merge collinear runs (consecutive barycenter segments).
    let merged = merge_collinear(&trimmed)?;
    let system = validate_generalized(merged).map_err(Error::Violation)?;
    Ok(RealizedPrefix { system, horizon: horizon.clone(), blocks })
}

fn merge_collinear(p: &PLMap) -> Result<PLMap> {
    let pieces: Vec<PLMap> = (0..p.segment_count())
        .map(|k| {
            PLMap::segment(
                p.breakpoints()[k].clone(),
                p.value_at(k).to_vec(),
                p.breakpoints()[k + 1].clone(),
                p.value_at(k + 1).to_vec(),
            )
        })
        .collect::<Result<_>>()?;
    PLMap::concat_all(&pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn point(xs: &[(i64, i64)]) -> SimplexPoint {
        SimplexPoint::new(xs.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn simplex_membership() {
        assert!(point(&[(1, 6), (1, 3), (1, 2)]).is_strict());
        assert!(!point(&[(1, 4), (1, 4), (1, 2)]).is_strict());
        assert!(!point(&[(0, 1), (1, 1)]).is_strict());
        assert!(point(&[(1, 3), (1, 3), (1, 3)]).is_barycenter());
        assert!(SimplexPoint::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).is_err());
        assert!(SimplexPoint::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(SimplexPoint::new(vec![rat(-1, 2), rat(3, 2)]).is_err());
    }

    #[test]
    fn block_n3_breakpoints_and_values() {
        let b = basic_block(&point(&[(1, 6), (1, 3), (1, 2)])).unwrap();
        let m = b.map();
        assert_eq!(m.breakpoints(), &[rat(1, 2), rat(5, 6), rat(1, 1), rat(7, 6), rat(3, 2)]);
        assert_eq!(m.eval(&rat(1, 1)).unwrap(), vec![rat(1, 6), rat(1, 3), rat(1, 2)]);
        assert_eq!(m.eval(&rat(7, 6)).unwrap(), vec![rat(1, 3), rat(1, 3), rat(1, 2)]);
        assert_eq!(m.slopes(0).unwrap(), vec![rat(0, 1), rat(1, 2), rat(1, 2)]);
        assert_eq!(m.slopes(2).unwrap(), vec![rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert_eq!(m.value_at(0), &vec![rat(1, 6); 3][..]);
        assert_eq!(m.value_at(4), &vec![rat(1, 2); 3][..]);
    }

    #[test]
    fn block_n2() {
        let b = basic_block(&point(&[(1, 3), (2, 3)])).unwrap();
        assert_eq!(b.map().breakpoints(), &[rat(2, 3), rat(1, 1), rat(4, 3)]);
        assert_eq!(b.map().eval(&rat(1, 1)).unwrap(), vec![rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn block_rejects_boundary_points() {
        assert!(basic_block(&point(&[(1, 2), (1, 2)])).is_err());
        assert!(basic_block(&point(&[(1, 1)])).is_err());
    }

    #[test]
    fn restricting_a_block() {
        let b = basic_block(&point(&[(1, 6), (1, 3), (1, 2)])).unwrap();
        let r = b.map().restrict(&rat(1, 1), &rat(3, 2)).unwrap();
        assert_eq!(r.breakpoints(), &[rat(1, 1), rat(7, 6), rat(3, 2)]);
    }

    #[test]
    fn rescale_block() {
        let b = basic_block(&point(&[(1, 6), (1, 3), (1, 2)])).unwrap();
        let r = rescale(&b, &rat(1, 1)).unwrap();
        assert_eq!(r.map().start(), &rat(1, 1));
        assert_eq!(r.map().end(), &rat(3, 1));
        assert_eq!(r.map().eval(&rat(2, 1)).unwrap(), vec![rat(1, 3), rat(2, 3), rat(1, 1)]);
        assert_eq!(rescale(&b, &rat(1, 2)).unwrap(), b);
    }

    #[test]
    fn rescale_from_zero_fails() {
        let ramp = crate::systems::canonical_ramp(2, &rat(0, 1), &rat(1, 1)).unwrap().generalize();
        assert!(rescale(&ramp, &rat(1, 1)).is_err());
    }

    #[test]
    fn perturb_formula() {
        let p = perturb(&point(&[(1, 4), (1, 4), (1, 2)]), &rat(1, 10)).unwrap();
        assert_eq!(p.coords(), &[rat(7, 32), rat(9, 32), rat(16, 32)]);
        assert!(p.is_strict());
        let near = perturb(&SimplexPoint::barycenter(3), &rat(1, 1000)).unwrap();
        assert!(near.is_strict());
        assert!(perturb(&point(&[(1, 6), (1, 3), (1, 2)]), &rat(0, 1)).is_err());
    }

    #[test]
    fn schedule_rejects_unperturbed_boundary_entry() {
        let e = BlockSchedule::new(3, vec![point(&[(1, 4), (1, 4), (1, 2)])], Perturbation::None);
        assert!(e.is_err());
        assert!(BlockSchedule::new(3, vec![SimplexPoint::barycenter(3)], Perturbation::None).is_ok());
        assert!(BlockSchedule::new(3, vec![SimplexPoint::barycenter(2)], Perturbation::None).is_err());
    }

    #[test]
    fn realize_barycenter_is_a_straight_ray() {
        let s = BlockSchedule::new(3, vec![SimplexPoint::barycenter(3)], Perturbation::None).unwrap();
        let r = realize(&s, &rat(10, 1)).unwrap();
        assert_eq!(r.system.map().breakpoints(), &[rat(1, 1), rat(10, 1)]);
        assert_eq!(r.system.map().value_at(1), &vec![rat(10, 3); 3][..]);
    }

    #[test]
    fn realize_single_strict_point() {
        let s = BlockSchedule::new(3, vec![point(&[(1, 6), (1, 3), (1, 2)])], Perturbation::None).unwrap();
        let r = realize(&s, &rat(9, 1)).unwrap();
        assert_eq!(r.boundaries(), vec![rat(1, 1), rat(3, 1), rat(9, 1)]);
        assert_eq!(r.complete_blocks().count(), 2);
        for q in r.boundaries() {
            assert_eq!(r.system.map().eval(&q).unwrap(), vec![&q / rat(3, 1); 3]);
        }
    }

    #[test]
    fn realize_truncates_mid_block() {
        let s = BlockSchedule::new(3, vec![point(&[(1, 6), (1, 3), (1, 2)])], Perturbation::None).unwrap();
        let r = realize(&s, &rat(5, 1)).unwrap();
        assert_eq!(r.system.map().end(), &rat(5, 1));
        assert_eq!(r.blocks.len(), 2);
        assert_eq!(r.complete_blocks().count(), 1);
        assert!(realize(&s, &rat(1, 1)).is_err());
    }

    #[test]
    fn schedule_json() {
        let text = r#"{"n":3,"cycle":[["1/6","1/3","1/2"]],"perturbation":{"kind":"harmonic","eps0":"1/10"}}"#;
        let s: BlockSchedule = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), text);
        let none = r#"{"n":2,"cycle":[["1/2","1/2"]],"perturbation":{"kind":"none"}}"#;
        assert!(serde_json::from_str::<BlockSchedule>(none).is_ok());
        let bad = r#"{"n":2,"cycle":[["0","1"]],"perturbation":{"kind":"none"}}"#;
        assert!(serde_json::from_str::<BlockSchedule>(bad).is_err());
    }
}
