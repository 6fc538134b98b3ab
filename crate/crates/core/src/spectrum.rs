//! From an admissible exponent profile to a schedule whose realized system
//! has exactly those exponents, with a certificate of every step.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::{BlockSchedule, Perturbation, SimplexPoint};
use crate::error::{Error, Result};
use crate::exponents::{
    audit_schedule, check_schmidt_laurent, check_simplex_relations, omega_to_psi, psi, psi_to_omega, schedule_exponents,
    Audit, ExponentProfile, PsiProfile, ScheduleExponents,
};
use crate::rat::{int, rat, serde_rat, ExtRat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// `ψ̲_n ≤ n/(n+1)`.
    LastBound,
    /// `ψ̲_j/j ≤ ψ̲_{j+1}/(j+1)`.
    LowerRatio,
    /// `(1−ψ̲_j)/(n+1−j) ≤ (1−ψ̲_{j+1})/(n−j)`.
    UpperRatio,
}

/// A failed hypothesis `lhs ≤ rhs` of the finite-set construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisViolation {
    pub hypothesis: Hypothesis,
    pub j: usize,
    #[serde(with = "serde_rat")]
    pub lhs: Rat,
    #[serde(with = "serde_rat")]
    pub rhs: Rat,
}

impl fmt::Display for HypothesisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at j = {}: {} ≤ {} fails", self.hypothesis, self.j, self.lhs, self.rhs)
    }
}

/// Hypotheses on `ψ̲_1..ψ̲_n` (targets in dimension `n+1`).
pub fn check_hypotheses(psi: &PsiProfile) -> Vec<HypothesisViolation> {
    let n = psi.n();
    let mut out = Vec::new();
    let last_bound = rat(n as i64, n as i64 + 1);
    if *psi.get(n) > last_bound {
        out.push(HypothesisViolation { hypothesis: Hypothesis::LastBound, j: n, lhs: psi.get(n).clone(), rhs: last_bound });
    }
    for j in 1..n {
        let l = psi.get(j) / int(j as i64);
        let r = psi.get(j + 1) / int(j as i64 + 1);
        if l > r {
            out.push(HypothesisViolation { hypothesis: Hypothesis::LowerRatio, j, lhs: l, rhs: r });
        }
        let l = (Rat::one() - psi.get(j)) / int((n + 1 - j) as i64);
        let r = (Rat::one() - psi.get(j + 1)) / int((n - j) as i64);
        if l > r {
            out.push(HypothesisViolation { hypothesis: Hypothesis::UpperRatio, j, lhs: l, rhs: r });
        }
    }
    out
}

/// Finite subset `E` of the closed simplex in dimension `n+1` with
/// `min ψ_j(E) = ψ̲_j` for `j = 1..n`. Duplicates are removed, first
/// occurrence kept.
#[allow(non_snake_case)]
pub fn build_E(psi_lower: &PsiProfile) -> Result<Vec<SimplexPoint>> {
    let violations = check_hypotheses(psi_lower);
    if !violations.is_empty() {
        return Err(Error::Hypotheses(violations));
    }
    let n = psi_lower.n();
    let g = |j: usize| psi_lower.get(j).clone();
    let mut e: Vec<SimplexPoint> = Vec::new();
    if n == 1 {
        e.push(SimplexPoint::new(vec![g(1), Rat::one() - g(1)])?);
    } else {
        for k in 1..n {
            let c = g(k) / int(k as i64);
            let d = (Rat::one() - g(k + 1)) / int((n - k) as i64);
            let mut coords = vec![c; k];
            coords.push(g(k + 1) - g(k));
            coords.extend(std::iter::repeat_n(d, n - k));
            let a = SimplexPoint::new(coords)?;
            for j in 1..=n {
                let v = psi(a.coords(), j)?;
                let tight = j == k || j == k + 1;
                if v < g(j) || (tight && v != g(j)) {
                    return Err(Error::Precondition(format!(
                        "constructed point for k = {k} has ψ_{j} = {v}, target {}",
                        g(j)
                    )));
                }
            }
            if !e.contains(&a) {
                e.push(a);
            }
        }
    }
    for j in 1..=n {
        let m = e.iter().map(|a| psi(a.coords(), j)).collect::<Result<Vec<_>>>()?.into_iter().min().unwrap();
        if m != g(j) {
            return Err(Error::Precondition(format!("min ψ_{j}(E) = {m} differs from target {}", g(j))));
        }
    }
    Ok(e)
}

pub fn default_perturbation() -> Perturbation {
    Perturbation::Harmonic { eps0: rat(1, 8) }
}

pub fn default_audit_horizon() -> Rat {
    int(59049)
}

pub fn default_audit_tolerance() -> Rat {
    rat(1, 50)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub perturbation: Perturbation,
    #[serde(with = "serde_rat")]
    pub audit_horizon: Rat,
    #[serde(with = "serde_rat")]
    pub audit_tolerance: Rat,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            perturbation: default_perturbation(),
            audit_horizon: default_audit_horizon(),
            audit_tolerance: default_audit_tolerance(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationCertificate {
    pub omega: ExponentProfile,
    pub psi_lower: PsiProfile,
    #[serde(rename = "E")]
    pub e: Vec<SimplexPoint>,
    pub schedule: BlockSchedule,
    pub limits: ScheduleExponents,
    pub realized_omega: ExponentProfile,
    pub realized_omega_hat: ExponentProfile,
    pub round_trip_ok: bool,
    pub audit: Audit,
}

/// Runs the whole pipeline with default options.
pub fn realize_spectrum(omega: &ExponentProfile) -> Result<RealizationCertificate> {
    realize_spectrum_with(omega, &SpectrumOptions::default())
}

pub fn realize_spectrum_with(omega: &ExponentProfile, opts: &SpectrumOptions) -> Result<RealizationCertificate> {
    let violations = check_schmidt_laurent(omega);
    if !violations.is_empty() {
        return Err(Error::Relations(violations));
    }
    let n = omega.n();
    let psi_lower = omega_to_psi(omega);
    let e = build_E(&psi_lower)?;
    for a in &e {
        if let Some(v) = check_simplex_relations(a.coords()).first() {
            return Err(Error::Precondition(format!("point of E fails simplex relation {:?} at j = {}", v.relation, v.j)));
        }
    }
    let needs_perturbation = e.iter().any(|a| !a.is_strict() && !a.is_barycenter());
    let perturbation = if needs_perturbation { opts.perturbation.clone() } else { Perturbation::None };
    let schedule = BlockSchedule::new(n + 1, e.clone(), perturbation)?;
    let limits = schedule_exponents(&schedule);

    // The limits cover j = 1..n+1; the last one is identically 1.
    let liminf = PsiProfile::new(limits.liminf[..n].to_vec())?;
    let limsup = PsiProfile::new(limits.limsup[..n].to_vec())?;
    let realized_omega = psi_to_omega(&liminf);
    let realized_omega_hat = psi_to_omega(&limsup);
    let round_trip_ok = realized_omega == *omega
        && liminf == psi_lower
        && realized_omega_hat == ExponentProfile::dirichlet(n)
        && limits.limsup[n].is_one();
    let audit = audit_schedule(&schedule, &opts.audit_horizon, &opts.audit_tolerance)?;
    Ok(RealizationCertificate {
        omega: omega.clone(),
        psi_lower,
        e,
        schedule,
        limits,
        realized_omega,
        realized_omega_hat,
        round_trip_ok,
        audit,
    })
}

/// Both sides of the bridge from the exponent inequalities to the
/// hypotheses of the finite-set construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub relations_hold: bool,
    pub hypotheses_hold: bool,
}

impl BridgeReport {
    /// Admissible profiles must satisfy the hypotheses.
    pub fn consistent(&self) -> bool {
        !self.relations_hold || self.hypotheses_hold
    }
}

pub fn verify_hypothesis_bridge(omega: &ExponentProfile) -> BridgeReport {
    let psi_lower = omega_to_psi(omega);
    let in_range = psi_lower.values().iter().all(|x| *x >= Rat::zero() && *x <= Rat::one());
    BridgeReport {
        relations_hold: check_schmidt_laurent(omega).is_empty(),
        hypotheses_hold: in_range && check_hypotheses(&psi_lower).is_empty(),
    }
}

/// `ExtRat` shorthand for callers building profiles from strings.
pub fn parse_profile(items: &[&str]) -> Result<ExponentProfile> {
    ExponentProfile::new(items.iter().map(|s| ExtRat::parse(s)).collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psi_profile(xs: &[(i64, i64)]) -> PsiProfile {
        PsiProfile::new(xs.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn e_for_n2() {
        let e = build_E(&psi_profile(&[(1, 4), (1, 2)])).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].coords(), &[rat(1, 4), rat(1, 4), rat(1, 2)]);
    }

    #[test]
    fn e_for_n1() {
        let e = build_E(&psi_profile(&[(1, 2)])).unwrap();
        assert_eq!(e[0].coords(), &[rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn e_needs_two_points() {
        let e = build_E(&psi_profile(&[(0, 1), (1, 3), (1, 2)])).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].coords(), &[rat(0, 1), rat(1, 3), rat(1, 3), rat(1, 3)]);
        assert_eq!(e[1].coords(), &[rat(1, 6), rat(1, 6), rat(1, 6), rat(1, 2)]);
    }

    #[test]
    fn hypothesis_failures_are_named() {
        match build_E(&psi_profile(&[(3, 4)])) {
            Err(Error::Hypotheses(v)) => assert_eq!(v[0].hypothesis, Hypothesis::LastBound),
            other => panic!("unexpected {other:?}"),
        }
        match build_E(&psi_profile(&[(1, 2), (1, 2)])) {
            Err(Error::Hypotheses(v)) => assert!(v.iter().any(|h| h.hypothesis == Hypothesis::LowerRatio)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectrum_n2() {
        let c = realize_spectrum(&parse_profile(&["1", "3"]).unwrap()).unwrap();
        assert_eq!(c.psi_lower, psi_profile(&[(1, 4), (1, 2)]));
        assert_eq!(c.e.len(), 1);
        assert!(c.round_trip_ok);
        assert_eq!(c.realized_omega_hat, parse_profile(&["1/2", "2"]).unwrap());
        assert!(c.audit.ok, "{:?}", c.audit);
    }

    #[test]
    fn spectrum_dirichlet_is_a_ray() {
        let c = realize_spectrum(&ExponentProfile::dirichlet(3)).unwrap();
        assert_eq!(c.e, vec![SimplexPoint::barycenter(4)]);
        assert_eq!(c.schedule.perturbation(), &Perturbation::None);
        assert!(c.round_trip_ok);
    }

    #[test]
    fn spectrum_rejects_inadmissible() {
        match realize_spectrum(&parse_profile(&["2/5", "10"]).unwrap()) {
            Err(Error::Relations(v)) => assert!(!v.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bridge_with_infinite_exponent() {
        let r = verify_hypothesis_bridge(&parse_profile(&["1", "inf"]).unwrap());
        assert!(r.relations_hold && r.hypotheses_hold);
        let bad = verify_hypothesis_bridge(&parse_profile(&["2/5", "10"]).unwrap());
        assert!(!bad.relations_hold && bad.consistent());
    }
}
