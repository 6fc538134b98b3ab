//! Successive minima of the bodies `C_u(Q) = {x : ‖x‖ ≤ 1, |x·u| ≤ 1/Q}`
//! with respect to `Z^d`, their logarithms `L_j(q) = log λ_j(C_u(e^q))` on a
//! grid, and finite-horizon exponent estimates.
//!
//! The minima are found exhaustively: the lattice is reduced for the form
//! `G(x) = ‖x‖² + Q²(x·u)²`, which satisfies `F² ≤ G ≤ 2F²` for the gauge
//! `F(x) = max(‖x‖, Q|x·u|)`, and every point with `G ≤ 2R²` is listed,
//! where `R` is the largest gauge of a reduced basis vector and hence an
//! upper bound for `λ_d`.

mod float;
mod lattice;
mod target;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

pub use float::{LabFloat, Precision};
pub use target::{parse_component, rat_to_two, ExactComponent, TargetDescription, TargetVector};

use crate::error::{Error, Result};
use lattice::{combine, enumerate, lll, Form, SpanTracker};

/// Relative width of a gauge tie.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Absolute slack for the trajectory invariants.
pub const INVARIANT_TOLERANCE: f64 = 1e-9;
const NODE_BUDGET: usize = 50_000_000;
const BOUND_SLACK: f64 = 1e-9;

/// `max(‖x‖, Q·|x·u|)`, evaluated in double-double arithmetic.
pub fn gauge(u: &TargetVector, big_q: f64, x: &[i64]) -> Result<f64> {
    if x.len() != u.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: x.len() });
    }
    if x.iter().all(|&v| v == 0) {
        return Err(Error::Precondition("the gauge is taken at a nonzero vector".into()));
    }
    let lab = Lab::<TwoFloat>::new(u);
    Ok(lab.gauge(TwoFloat::from(big_q), x).to_f64())
}

/// Minima at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minima {
    pub q: f64,
    pub lambda: Vec<f64>,
    /// `log λ_j`.
    pub l: Vec<f64>,
    pub witnesses: Vec<Vec<i64>>,
    /// Every integer point of gauge at most `radius` was examined.
    pub radius: f64,
    pub candidates: usize,
}

pub fn successive_minima(u: &TargetVector, q: f64, precision: Precision) -> Result<Minima> {
    match precision {
        Precision::Double => Lab::<f64>::new(u).minima_at(q, &mut identity(u.dim())),
        Precision::DoubleDouble => Lab::<TwoFloat>::new(u).minima_at(q, &mut identity(u.dim())),
    }
}

fn identity(d: usize) -> Vec<Vec<i64>> {
    (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect()
}

struct Candidate<T> {
    f: T,
    norm2: i128,
    x: Vec<i64>,
}

struct Lab<T> {
    u: Vec<T>,
}

impl<T: LabFloat> Lab<T> {
    fn new(u: &TargetVector) -> Self {
        Lab { u: u.unit().iter().map(|&v| T::from_two(v)).collect() }
    }

    fn gauge(&self, big_q: T, x: &[i64]) -> T {
        let form = Form { u: &self.u, q2: big_q * big_q };
        let norm2: i128 = x.iter().map(|&v| v as i128 * v as i128).sum();
        let norm = T::from_i128(norm2).sqrt();
        norm.max(big_q * form.dot_u(x).abs())
    }

    /// `basis` is a starting basis of `Z^d`; it is left reduced for `q`.
    fn minima_at(&self, q: f64, basis: &mut [Vec<i64>]) -> Result<Minima> {
        let d = self.u.len();
        let big_q = T::from_f64(q).exp();
        let form = Form { u: &self.u, q2: big_q * big_q };
        let with_q = |e: Error| match e {
            Error::SearchExhausted { reason, .. } => Error::SearchExhausted { q, reason },
            other => other,
        };
        let gs = lll(&form, basis).map_err(with_q)?;
        let radius = basis.iter().map(|b| self.gauge(big_q, b)).fold(T::zero(), T::max);
        let r = radius.to_f64();
        let bound = 2.0 * r * r * (1.0 + BOUND_SLACK);
        let mu: Vec<Vec<f64>> = gs.mu.iter().map(|row| row.iter().map(|v| v.to_f64()).collect()).collect();
        let bstar: Vec<f64> = gs.b.iter().map(|v| v.to_f64()).collect();
        if bstar.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::SearchExhausted { q, reason: "degenerate Gram–Schmidt data (precision too low?)".into() });
        }
        let coeffs = enumerate(&mu, &bstar, bound, NODE_BUDGET).map_err(with_q)?;
        let limit = radius * T::from_f64(1.0 + BOUND_SLACK);
        let mut cands = Vec::new();
        for c in coeffs {
            let x = combine(&c, basis).map_err(with_q)?;
            if x.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
                continue;
            }
            let f = self.gauge(big_q, &x);
            if f <= limit {
                let norm2 = x.iter().map(|&v| v as i128 * v as i128).sum();
                cands.push(Candidate { f, norm2, x });
            }
        }
        let candidates = cands.len();
        order_candidates(&mut cands);
        let mut span = SpanTracker::new(d);
        let mut chosen: Vec<Candidate<T>> = Vec::with_capacity(d);
        for c in cands {
            if span.is_independent(&c.x) {
                span.push(&c.x);
                chosen.push(c);
                if chosen.len() == d {
                    break;
                }
            }
        }
        if chosen.len() < d {
            return Err(Error::SearchExhausted {
                q,
                reason: format!("only {} independent points within the search radius", chosen.len()),
            });
        }
        Ok(Minima {
            q,
            lambda: chosen.iter().map(|c| c.f.to_f64()).collect(),
            l: chosen.iter().map(|c| c.f.ln_f64()).collect(),
            witnesses: chosen.into_iter().map(|c| c.x).collect(),
            radius: r,
            candidates,
        })
    }
}

/// By gauge; gauges within a relative [`TIE_TOLERANCE`] of the first member
/// of their run form a tie, ordered by squared norm and then
/// lexicographically.
fn order_candidates<T: LabFloat>(cands: &mut [Candidate<T>]) {
    cands.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < cands.len() {
        let top = cands[start].f * T::from_f64(1.0 + TIE_TOLERANCE);
        let mut end = start + 1;
        while end < cands.len() && cands[end].f <= top {
            end += 1;
        }
        cands[start..end].sort_by(|a, b| a.norm2.cmp(&b.norm2).then_with(|| a.x.cmp(&b.x)));
        start = end;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaTrajectory {
    pub dim: usize,
    pub step: f64,
    pub q_max: f64,
    pub precision: Precision,
    pub target: TargetDescription,
    pub points: Vec<Minima>,
}

/// Grid `q_k = k·δ`, `k = 0, 1, …` while `q_k ≤ q_max`. Checks at every
/// point that `L_1 ≤ … ≤ L_d` and, between consecutive points, that each
/// `L_j` increases by at least 0 and at most `δ` (up to
/// [`INVARIANT_TOLERANCE`]).
pub fn trajectory(u: &TargetVector, q_max: f64, step: f64, precision: Precision) -> Result<MinimaTrajectory> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Precondition(format!("grid step {step} must be positive")));
    }
    if !(q_max.is_finite() && q_max >= step) {
        return Err(Error::Precondition(format!("q_max = {q_max} must be at least the step {step}")));
    }
    let points = match precision {
        Precision::Double => run_grid(&Lab::<f64>::new(u), q_max, step)?,
        Precision::DoubleDouble => run_grid(&Lab::<TwoFloat>::new(u), q_max, step)?,
    };
    Ok(MinimaTrajectory { dim: u.dim(), step, q_max, precision, target: u.description(), points })
}

fn run_grid<T: LabFloat>(lab: &Lab<T>, q_max: f64, step: f64) -> Result<Vec<Minima>> {
    let count = (q_max / step + 1e-9).floor() as usize;
    let mut basis = identity(lab.u.len());
    let mut out: Vec<Minima> = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let q = k as f64 * step;
        let m = lab.minima_at(q, &mut basis)?;
        check_point(&m)?;
        if let Some(prev) = out.last() {
            check_step(prev, &m, step)?;
        }
        out.push(m);
    }
    Ok(out)
}

fn check_point(m: &Minima) -> Result<()> {
    for j in 1..m.l.len() {
        if m.l[j] < m.l[j - 1] - INVARIANT_TOLERANCE {
            return Err(Error::Trajectory { q: m.q, detail: format!("L_{} > L_{}", j, j + 1) });
        }
    }
    Ok(())
}

fn check_step(prev: &Minima, next: &Minima, step: f64) -> Result<()> {
    for (j, (a, b)) in prev.l.iter().zip(&next.l).enumerate() {
        let delta = b - a;
        if delta < -INVARIANT_TOLERANCE || delta > step + INVARIANT_TOLERANCE {
            return Err(Error::Trajectory {
                q: next.q,
                detail: format!("L_{} changed by {delta} over a step of {step}", j + 1),
            });
        }
    }
    Ok(())
}

/// Finite-horizon estimates over the tail `q ≥ τ·q_max` of a trajectory.
/// None of these numbers carries a convergence guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub tail: f64,
    pub q_from: f64,
    pub tail_points: usize,
    /// `min` of `(L_1+…+L_j)(q)/q` over the tail, `j = 1..n` with `n = d−1`.
    pub psi_lower: Vec<f64>,
    pub psi_upper: Vec<f64>,
    /// `ω_j = 1/ψ̲_{n−j} − 1`, `j = 0..n−1`.
    #[serde(with = "ext_f64_vec")]
    pub omega: Vec<f64>,
    #[serde(with = "ext_f64_vec")]
    pub omega_hat: Vec<f64>,
    /// `max |Σ_j L_j(q) − q|` over the whole grid.
    pub minkowski_defect: f64,
    pub approximate: bool,
}

pub fn estimate_exponents(traj: &MinimaTrajectory, tail: f64) -> Result<ExponentEstimate> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::Precondition(format!("tail fraction {tail} must lie in (0, 1)")));
    }
    let q_from = tail * traj.q_max;
    let pts: Vec<&Minima> = traj.points.iter().filter(|m| m.q > 0.0 && m.q >= q_from - 1e-12).collect();
    if pts.is_empty() {
        return Err(Error::Precondition("the tail of the trajectory is empty".into()));
    }
    let n = traj.dim - 1;
    let mut psi_lower = vec![f64::INFINITY; n];
    let mut psi_upper = vec![f64::NEG_INFINITY; n];
    for m in &pts {
        let mut s = 0.0;
        for j in 0..n {
            s += m.l[j];
            let r = s / m.q;
            psi_lower[j] = psi_lower[j].min(r);
            psi_upper[j] = psi_upper[j].max(r);
        }
    }
    let convert = |p: f64| if p <= 0.0 { f64::INFINITY } else { 1.0 / p - 1.0 };
    let omega = (0..n).map(|j| convert(psi_lower[n - j - 1])).collect();
    let omega_hat = (0..n).map(|j| convert(psi_upper[n - j - 1])).collect();
    Ok(ExponentEstimate {
        tail,
        q_from,
        tail_points: pts.len(),
        psi_lower,
        psi_upper,
        omega,
        omega_hat,
        minkowski_defect: minkowski_defect(traj),
        approximate: true,
    })
}

/// `max_q |Σ_j L_j(q) − q|` over the grid.
pub fn minkowski_defect(traj: &MinimaTrajectory) -> f64 {
    traj.points.iter().map(|m| (m.l.iter().sum::<f64>() - m.q).abs()).fold(0.0, f64::max)
}

/// Interval that `Σ_j L_j(q) − q` must lie in for a unit `u` in dimension
/// `d` and `q ≥ 0`, from Minkowski's second theorem and the volume of the
/// body, which grows from `V_d/Q` to `2V_{d−1}/Q`.
pub fn minkowski_window(d: usize) -> (f64, f64) {
    let ball = |k: usize| {
        let k = k as f64;
        std::f64::consts::PI.powf(k / 2.0) / gamma_half_integer(k / 2.0 + 1.0)
    };
    let factorial: f64 = (1..=d).map(|i| i as f64).product();
    let two_d = 2f64.powi(d as i32);
    ((two_d / (factorial * 2.0 * ball(d - 1))).ln(), (two_d / ball(d)).ln())
}

/// `Γ(x)` for `x` a positive integer or half-integer.
fn gamma_half_integer(x: f64) -> f64 {
    let mut v = if (x - x.floor()).abs() < 1e-12 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut t = if (x - x.floor()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while t < x - 1e-12 {
        v *= t;
        t += 1.0;
    }
    v
}

mod ext_f64_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&x| if x.is_infinite() { Ext::Text("inf".into()) } else { Ext::Num(x) }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Ext>::deserialize(d)?
            .into_iter()
            .map(|e| match e {
                Ext::Num(x) => Ok(x),
                Ext::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Ext::Text(t) => Err(serde::de::Error::custom(format!("bad exponent {t:?}"))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_examples() {
        let e1 = TargetVector::from_f64(&[1.0, 0.0]).unwrap();
        let q = 5f64.exp();
        assert_eq!(gauge(&e1, q, &[0, 1]).unwrap(), 1.0);
        assert!((gauge(&e1, q, &[1, 0]).unwrap() - q).abs() < 1e-9);
        assert!(gauge(&e1, q, &[0, 0]).is_err());
        let g = TargetVector::parse("1,phi").unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let norm = (1.0 + phi * phi).sqrt();
        let expected = 2f64.sqrt().max(1f64.exp() * (phi - 1.0).abs() / norm);
        assert!((gauge(&g, 1f64.exp(), &[-1, 1]).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_direction() {
        let u = TargetVector::from_f64(&[1.0, 0.0]).unwrap();
        let m = successive_minima(&u, 3.0, Precision::DoubleDouble).unwrap();
        assert_eq!(m.l[0], 0.0);
        assert!((m.l[1] - 3.0).abs() < 1e-12);
        assert_eq!(m.witnesses, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn minima_at_zero_are_one() {
        let u = TargetVector::parse("1,phi,3/7").unwrap();
        let m = successive_minima(&u, 0.0, Precision::DoubleDouble).unwrap();
        assert!(m.l.iter().all(|&l| l.abs() < 1e-15));
    }

    #[test]
    fn both_precisions_agree_at_small_q() {
        let u = TargetVector::parse("1,phi").unwrap();
        let a = successive_minima(&u, 4.0, Precision::Double).unwrap();
        let b = successive_minima(&u, 4.0, Precision::DoubleDouble).unwrap();
        assert_eq!(a.witnesses, b.witnesses);
        assert!((a.l[0] - b.l[0]).abs() < 1e-9);
    }

    #[test]
    fn short_trajectory_and_estimate() {
        let u = TargetVector::parse("1,phi").unwrap();
        let t = trajectory(&u, 4.0, 0.5, Precision::DoubleDouble).unwrap();
        assert_eq!(t.points.len(), 9);
        let e = estimate_exponents(&t, 0.5).unwrap();
        assert_eq!(e.psi_lower.len(), 1);
        assert!(e.psi_lower[0] <= e.psi_upper[0]);
        assert!(estimate_exponents(&t, 1.0).is_err());
        assert!(trajectory(&u, 0.1, 0.5, Precision::DoubleDouble).is_err());
    }

    #[test]
    fn infinite_exponent_serialises_as_text() {
        let u = TargetVector::from_f64(&[1.0, 0.0]).unwrap();
        let t = trajectory(&u, 2.0, 0.5, Precision::DoubleDouble).unwrap();
        let e = estimate_exponents(&t, 0.5).unwrap();
        assert_eq!(e.psi_lower, vec![0.0]);
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"omega\":[\"inf\"]"));
        let back: ExponentEstimate = serde_json::from_str(&json).unwrap();
        assert_eq!(back.omega, vec![f64::INFINITY]);
    }

    #[test]
    fn minkowski_window_brackets_zero_q() {
        for d in 2..=4 {
            let (lo, hi) = minkowski_window(d);
            assert!(lo < 0.0 && 0.0 < hi, "{d}: {lo} {hi}");
        }
    }
}
