//! ψ-exponents of systems and schedules, the ψ ↔ ω dictionary, and the
//! inequality checkers for exponent profiles and simplex points.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::{realize, BlockSchedule};
use crate::error::{Error, Result};
use crate::plmap::PLMap;
use crate::rat::{int, serde_rat, serde_rat_vec, to_decimal, ExtRat, Rat};

/// `ψ_j(v) = v_1 + … + v_j`.
pub fn psi(v: &[Rat], j: usize) -> Result<Rat> {
    if j == 0 || j > v.len() {
        return Err(Error::Precondition(format!("ψ index {j} outside 1..={}", v.len())));
    }
    Ok(v[..j].iter().sum())
}

/// Exact extrema of `ψ_j(q⁻¹P(q)) = M_j(q)/q` over the domain of a map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioExtrema {
    pub j: usize,
    #[serde(with = "serde_rat")]
    pub min: Rat,
    #[serde(with = "serde_rat")]
    pub max: Rat,
    #[serde(with = "serde_rat_vec")]
    pub argmin: Vec<Rat>,
    #[serde(with = "serde_rat_vec")]
    pub argmax: Vec<Rat>,
}

fn check_positive_domain(p: &PLMap, j: usize) -> Result<()> {
    if *p.start() <= Rat::zero() {
        return Err(Error::Precondition(format!("ratio M_j(q)/q needs a domain inside (0, ∞), got start {}", p.start())));
    }
    if j == 0 || j > p.n() {
        return Err(Error::Precondition(format!("ψ index {j} outside 1..={}", p.n())));
    }
    Ok(())
}

/// On every linear piece `M_j(q)/q` is monotone, so breakpoints suffice.
pub fn ratio_extrema(p: &PLMap, j: usize) -> Result<RatioExtrema> {
    check_positive_domain(p, j)?;
    let mut out: Option<RatioExtrema> = None;
    for (q, v) in p.breakpoints().iter().zip(p.values()) {
        let r: Rat = v[..j].iter().sum::<Rat>() / q;
        match &mut out {
            None => {
                out = Some(RatioExtrema { j, min: r.clone(), max: r, argmin: vec![q.clone()], argmax: vec![q.clone()] })
            }
            Some(e) => {
                if r < e.min {
                    e.min = r.clone();
                    e.argmin = vec![q.clone()];
                } else if r == e.min {
                    e.argmin.push(q.clone());
                }
                if r > e.max {
                    e.max = r;
                    e.argmax = vec![q.clone()];
                } else if r == e.max {
                    e.argmax.push(q.clone());
                }
            }
        }
    }
    Ok(out.expect("a map has at least two breakpoints"))
}

/// One row of the breakpoint ratio table. The `approx` fields are decimal
/// renderings to 12 places and are not exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(with = "serde_rat")]
    pub q: Rat,
    #[serde(with = "serde_rat")]
    pub m: Rat,
    #[serde(with = "serde_rat")]
    pub ratio: Rat,
    pub q_approx: String,
    pub m_approx: String,
    pub ratio_approx: String,
}

pub fn ratio_table(p: &PLMap, j: usize) -> Result<Vec<RatioRow>> {
    check_positive_domain(p, j)?;
    Ok(p.breakpoints()
        .iter()
        .zip(p.values())
        .map(|(q, v)| {
            let m: Rat = v[..j].iter().sum();
            let ratio = &m / q;
            RatioRow {
                q_approx: to_decimal(q, 12),
                m_approx: to_decimal(&m, 12),
                ratio_approx: to_decimal(&ratio, 12),
                q: q.clone(),
                m,
                ratio,
            }
        })
        .collect())
}

/// Liminf targets `ψ̲_1, …, ψ̲_n`, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PsiProfileJson", into = "PsiProfileJson")]
pub struct PsiProfile {
    values: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct PsiProfileJson {
    n: usize,
    #[serde(with = "serde_rat_vec")]
    psi: Vec<Rat>,
}

impl TryFrom<PsiProfileJson> for PsiProfile {
    type Error = Error;
    fn try_from(raw: PsiProfileJson) -> Result<Self> {
        if raw.psi.len() != raw.n {
            return Err(Error::DimensionMismatch { left: raw.n, right: raw.psi.len() });
        }
        PsiProfile::new(raw.psi)
    }
}

impl From<PsiProfile> for PsiProfileJson {
    fn from(p: PsiProfile) -> Self {
        PsiProfileJson { n: p.values.len(), psi: p.values }
    }
}

impl PsiProfile {
    pub fn new(values: Vec<Rat>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("empty ψ profile".into()));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| **v < Rat::zero() || **v > Rat::one()) {
            return Err(Error::Precondition(format!("ψ_{} = {v} outside [0, 1]", j + 1)));
        }
        Ok(PsiProfile { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// `ψ_j`, `1 ≤ j ≤ n`.
    pub fn get(&self, j: usize) -> &Rat {
        &self.values[j - 1]
    }
}

/// Exponents `ω_0, …, ω_{n−1}`, each in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ExponentProfileJson", into = "ExponentProfileJson")]
pub struct ExponentProfile {
    values: Vec<ExtRat>,
}

#[derive(Serialize, Deserialize)]
struct ExponentProfileJson {
    n: usize,
    omega: Vec<ExtRat>,
}

impl TryFrom<ExponentProfileJson> for ExponentProfile {
    type Error = Error;
    fn try_from(raw: ExponentProfileJson) -> Result<Self> {
        if raw.omega.len() != raw.n {
            return Err(Error::DimensionMismatch { left: raw.n, right: raw.omega.len() });
        }
        ExponentProfile::new(raw.omega)
    }
}

impl From<ExponentProfile> for ExponentProfileJson {
    fn from(p: ExponentProfile) -> Self {
        ExponentProfileJson { n: p.values.len(), omega: p.values }
    }
}

impl ExponentProfile {
    pub fn new(values: Vec<ExtRat>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("empty exponent profile".into()));
        }
        if let Some(j) = values.iter().position(|w| matches!(w, ExtRat::Finite(r) if *r < Rat::zero())) {
            return Err(Error::Precondition(format!("ω_{j} = {} is negative", values[j])));
        }
        Ok(ExponentProfile { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[ExtRat] {
        &self.values
    }

    /// `ω_j`, `0 ≤ j ≤ n−1`.
    pub fn get(&self, j: usize) -> &ExtRat {
        &self.values[j]
    }

    /// The Dirichlet profile `ω_j = (j+1)/(n−j)`.
    pub fn dirichlet(n: usize) -> Self {
        ExponentProfile { values: (0..n).map(|j| ExtRat::Finite(dirichlet_value(n, j))).collect() }
    }
}

fn dirichlet_value(n: usize, j: usize) -> Rat {
    Rat::new(((j + 1) as i64).into(), ((n - j) as i64).into())
}

/// `ω_j = 1/ψ_{n−j} − 1`, with `ψ = 0 ↦ ∞`.
pub fn psi_to_omega(psi: &PsiProfile) -> ExponentProfile {
    let n = psi.n();
    ExponentProfile { values: (0..n).map(|j| ExtRat::reciprocal_minus_one(psi.get(n - j))).collect() }
}

/// `ψ_j = 1/(ω_{n−j} + 1)`, with `∞ ↦ 0`.
pub fn omega_to_psi(omega: &ExponentProfile) -> PsiProfile {
    let n = omega.n();
    PsiProfile { values: (1..=n).map(|j| omega.get(n - j).reciprocal_of_successor()).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `ω_0 ≥ 1/n`.
    OmegaZeroLower,
    /// `jω_j/(ω_j+j+1) ≤ ω_{j−1}`.
    GoingUp,
    /// `ω_{j−1} ≤ ((n−j)ω_j − 1)/(n−j+1)`.
    GoingDown,
    /// `ω_j ≥ (j+1)/(n−j)`.
    Dirichlet,
}

/// A failed inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationViolation {
    pub relation: Relation,
    pub j: usize,
    pub lhs: ExtRat,
    pub rhs: ExtRat,
}

impl fmt::Display for RelationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at j = {}: {} ≤ {} fails", self.relation, self.j, self.lhs, self.rhs)
    }
}

/// All violated inequalities among `ω_0 ≥ 1/n`, the going-up and going-down
/// relations for `j = 1..n−1`, and the Dirichlet lower bounds.
pub fn check_schmidt_laurent(omega: &ExponentProfile) -> Vec<RelationViolation> {
    let n = omega.n();
    let mut out = Vec::new();
    let mut require = |relation, j, lhs: ExtRat, rhs: ExtRat| {
        if lhs > rhs {
            out.push(RelationViolation { relation, j, lhs, rhs });
        }
    };
    let nn = Rat::new(1.into(), (n as i64).into());
    require(Relation::OmegaZeroLower, 0, ExtRat::Finite(nn), omega.get(0).clone());
    for j in 1..n {
        let w = omega.get(j);
        let jj = int(j as i64);
        let up = match w {
            ExtRat::Infinity => ExtRat::Finite(jj.clone()),
            ExtRat::Finite(x) => ExtRat::Finite(&jj * x / (x + &jj + Rat::one())),
        };
        require(Relation::GoingUp, j, up, omega.get(j - 1).clone());
        let down = match w {
            ExtRat::Infinity => ExtRat::Infinity,
            ExtRat::Finite(x) => {
                let k = int((n - j) as i64);
                ExtRat::Finite((&k * x - Rat::one()) / (k + Rat::one()))
            }
        };
        require(Relation::GoingDown, j, omega.get(j - 1).clone(), down);
    }
    for j in 0..n {
        require(Relation::Dirichlet, j, ExtRat::Finite(dirichlet_value(n, j)), omega.get(j).clone());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimplexRelation {
    /// `0 ≤ ψ_j/j`.
    LowerNonNegative,
    /// `ψ_j/j ≤ ψ_{j+1}/(j+1)`.
    LowerMonotone,
    /// `0 ≤ (1−ψ_j)/(m−j)`.
    UpperNonNegative,
    /// `(1−ψ_j)/(m−j) ≤ (1−ψ_{j+1})/(m−j−1)`.
    UpperMonotone,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexViolation {
    pub relation: SimplexRelation,
    pub j: usize,
    #[serde(with = "serde_rat")]
    pub lhs: Rat,
    #[serde(with = "serde_rat")]
    pub rhs: Rat,
}

/// Checks, for a point with `m` coordinates and `j = 1..m−2`,
/// `0 ≤ ψ_j/j ≤ ψ_{j+1}/(j+1)` and `0 ≤ (1−ψ_j)/(m−j) ≤ (1−ψ_{j+1})/(m−j−1)`.
pub fn check_simplex_relations(a: &[Rat]) -> Vec<SimplexViolation> {
    let m = a.len();
    let mut partial = Vec::with_capacity(m + 1);
    partial.push(Rat::zero());
    for x in a {
        let next = partial.last().unwrap() + x;
        partial.push(next);
    }
    let lower = |j: usize| &partial[j] / int(j as i64);
    let upper = |j: usize| (Rat::one() - &partial[j]) / int((m - j) as i64);
    let mut out = Vec::new();
    let mut require = |relation, j, lhs: Rat, rhs: Rat| {
        if lhs > rhs {
            out.push(SimplexViolation { relation, j, lhs, rhs });
        }
    };
    for j in 1..m.saturating_sub(1) {
        require(SimplexRelation::LowerNonNegative, j, Rat::zero(), lower(j));
        require(SimplexRelation::LowerMonotone, j, lower(j), lower(j + 1));
        require(SimplexRelation::UpperNonNegative, j, Rat::zero(), upper(j));
        require(SimplexRelation::UpperMonotone, j, upper(j), upper(j + 1));
    }
    out
}

/// Symbolic liminf and limsup of `ψ_j(q⁻¹P(q))`, `j = 1..n`, for the system
/// realized by a schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleExponents {
    #[serde(with = "serde_rat_vec")]
    pub liminf: Vec<Rat>,
    #[serde(with = "serde_rat_vec")]
    pub limsup: Vec<Rat>,
}

/// Perturbed entries contribute the ψ-values of their limit point.
pub fn schedule_exponents(schedule: &BlockSchedule) -> ScheduleExponents {
    let n = schedule.n();
    let nn = int(n as i64);
    let liminf = (1..=n)
        .map(|j| {
            schedule
                .cycle()
                .iter()
                .map(|a| psi(a.coords(), j).expect("1 ≤ j ≤ n"))
                .min()
                .expect("non-empty cycle")
        })
        .collect();
    let limsup = (1..=n).map(|j| int(j as i64) / &nn).collect();
    ScheduleExponents { liminf, limsup }
}

/// Finite-horizon view of one `j` on a realized prefix `[1, Q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLine {
    pub j: usize,
    #[serde(with = "serde_rat")]
    pub liminf: Rat,
    #[serde(with = "serde_rat")]
    pub limsup: Rat,
    #[serde(with = "serde_rat")]
    pub prefix_min: Rat,
    #[serde(with = "serde_rat")]
    pub prefix_max: Rat,
    /// Smallest value over the blocks of the last complete cycle (or over
    /// the whole prefix when no block is complete).
    #[serde(with = "serde_rat")]
    pub tail_min: Rat,
    #[serde(with = "serde_rat")]
    pub gap: Rat,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    #[serde(with = "serde_rat")]
    pub horizon: Rat,
    #[serde(with = "serde_rat")]
    pub tolerance: Rat,
    pub blocks: usize,
    pub complete_blocks: usize,
    pub lines: Vec<AuditLine>,
    pub ok: bool,
}

/// Realizes the schedule on `[1, Q]` and compares exact ratio extrema with
/// the symbolic limits. A line passes when the prefix maximum equals the
/// limsup and the tail minimum lies within `tolerance` of the liminf.
pub fn audit_schedule(schedule: &BlockSchedule, horizon: &Rat, tolerance: &Rat) -> Result<Audit> {
    let limits = schedule_exponents(schedule);
    let prefix = realize(schedule, horizon)?;
    let map = prefix.system.map();
    let complete: Vec<_> = prefix.complete_blocks().collect();
    let cycle = schedule.cycle().len();
    let tail = &complete[complete.len().saturating_sub(cycle)..];
    let mut lines = Vec::new();
    for j in 1..=schedule.n() {
        let whole = ratio_extrema(map, j)?;
        let tail_min = if tail.is_empty() {
            whole.min.clone()
        } else {
            let mut best: Option<Rat> = None;
            for b in tail {
                let m = ratio_extrema(&map.restrict(&b.start, &b.end)?, j)?.min;
                best = Some(match best {
                    Some(x) if x <= m => x,
                    _ => m,
                });
            }
            best.unwrap()
        };
        let liminf = limits.liminf[j - 1].clone();
        let limsup = limits.limsup[j - 1].clone();
        let gap = if tail_min >= liminf { &tail_min - &liminf } else { &liminf - &tail_min };
        let ok = whole.max == limsup && gap <= *tolerance;
        lines.push(AuditLine { j, liminf, limsup, prefix_min: whole.min, prefix_max: whole.max, tail_min, gap, ok });
    }
    let ok = lines.iter().all(|l| l.ok);
    Ok(Audit {
        horizon: horizon.clone(),
        tolerance: tolerance.clone(),
        blocks: prefix.blocks.len(),
        complete_blocks: complete.len(),
        lines,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{basic_block, Perturbation, SimplexPoint};
    use crate::rat::rat;

    fn point(xs: &[(i64, i64)]) -> SimplexPoint {
        SimplexPoint::new(xs.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    fn omega(xs: &[&str]) -> ExponentProfile {
        ExponentProfile::new(xs.iter().map(|s| ExtRat::parse(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn psi_partial_sums() {
        let a = [rat(1, 6), rat(1, 3), rat(1, 2)];
        assert_eq!(psi(&a, 2).unwrap(), rat(1, 2));
        assert_eq!(psi(&a, 3).unwrap(), rat(1, 1));
        assert_eq!(psi(SimplexPoint::barycenter(3).coords(), 1).unwrap(), rat(1, 3));
        assert!(psi(&a, 0).is_err());
        assert!(psi(&a, 4).is_err());
    }

    #[test]
    fn block_ratio_extrema() {
        let b = basic_block(&point(&[(1, 6), (1, 3), (1, 2)])).unwrap();
        let e1 = ratio_extrema(b.map(), 1).unwrap();
        assert_eq!((e1.min.clone(), e1.max.clone()), (rat(1, 6), rat(1, 3)));
        assert_eq!(e1.argmin, vec![rat(1, 1)]);
        assert_eq!(e1.argmax, vec![rat(1, 2), rat(3, 2)]);
        let e2 = ratio_extrema(b.map(), 2).unwrap();
        assert_eq!((e2.min, e2.max), (rat(1, 2), rat(2, 3)));
        let ratios: Vec<Rat> = ratio_table(b.map(), 1).unwrap().into_iter().map(|r| r.ratio).collect();
        assert_eq!(ratios, vec![rat(1, 3), rat(1, 5), rat(1, 6), rat(2, 7), rat(1, 3)]);
    }

    #[test]
    fn constant_ratio_on_ray() {
        let p = PLMap::segment(rat(1, 1), vec![rat(1, 3); 3], rat(2, 1), vec![rat(2, 3); 3]).unwrap();
        let e = ratio_extrema(&p, 2).unwrap();
        assert_eq!((e.min, e.max), (rat(2, 3), rat(2, 3)));
        let from_zero = PLMap::segment(rat(0, 1), vec![rat(0, 1); 2], rat(2, 1), vec![rat(1, 1); 2]).unwrap();
        assert!(ratio_extrema(&from_zero, 1).is_err());
    }

    #[test]
    fn dictionary() {
        let p = PsiProfile::new(vec![rat(1, 4), rat(1, 2)]).unwrap();
        let w = psi_to_omega(&p);
        assert_eq!(w, omega(&["1", "3"]));
        assert_eq!(omega_to_psi(&w), p);
        let z = PsiProfile::new(vec![rat(0, 1)]).unwrap();
        assert_eq!(psi_to_omega(&z), omega(&["inf"]));
        assert_eq!(omega_to_psi(&omega(&["inf"])), z);
    }

    #[test]
    fn schmidt_laurent_examples() {
        assert!(check_schmidt_laurent(&omega(&["1", "3"])).is_empty());
        let bad = check_schmidt_laurent(&omega(&["2/5", "10"]));
        assert!(bad.iter().any(|v| v.relation == Relation::GoingUp
            && v.j == 1
            && v.lhs == ExtRat::Finite(rat(10, 12))
            && v.rhs == ExtRat::Finite(rat(2, 5))));
        for n in 1..6 {
            assert!(check_schmidt_laurent(&ExponentProfile::dirichlet(n)).is_empty());
        }
        assert!(check_schmidt_laurent(&omega(&["inf", "inf"])).is_empty());
        assert!(!check_schmidt_laurent(&omega(&["inf", "3"])).is_empty());
        assert!(!check_schmidt_laurent(&omega(&["1/3"])).is_empty());
    }

    #[test]
    fn simplex_relation_examples() {
        assert!(check_simplex_relations(&[rat(1, 4), rat(1, 4), rat(1, 2)]).is_empty());
        assert!(check_simplex_relations(SimplexPoint::barycenter(5).coords()).is_empty());
        assert!(!check_simplex_relations(&[rat(1, 2), rat(1, 4), rat(1, 4)]).is_empty());
    }

    #[test]
    fn schedule_limits() {
        let s = BlockSchedule::new(3, vec![point(&[(1, 6), (1, 3), (1, 2)])], Perturbation::None).unwrap();
        let e = schedule_exponents(&s);
        assert_eq!(e.liminf, vec![rat(1, 6), rat(1, 2), rat(1, 1)]);
        assert_eq!(e.limsup, vec![rat(1, 3), rat(2, 3), rat(1, 1)]);
        let bary = BlockSchedule::new(3, vec![SimplexPoint::barycenter(3)], Perturbation::None).unwrap();
        let e = schedule_exponents(&bary);
        assert_eq!(e.liminf, e.limsup);
    }

    #[test]
    fn audit_of_perturbed_boundary_point() {
        let s = BlockSchedule::new(
            3,
            vec![point(&[(1, 4), (1, 4), (1, 2)])],
            Perturbation::Harmonic { eps0: rat(1, 8) },
        )
        .unwrap();
        assert_eq!(schedule_exponents(&s).liminf, vec![rat(1, 4), rat(1, 2), rat(1, 1)]);
        let a = audit_schedule(&s, &rat(1000, 1), &rat(1, 50)).unwrap();
        assert!(a.ok, "{a:?}");
    }
}
