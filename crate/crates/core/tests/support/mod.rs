//! Generators and independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nsys_core::blocks::SimplexPoint;
use nsys_core::systems::{validate_generalized, validate_nsystem, Axiom, SystemKind};
use nsys_core::{rat, GenNSystem, NSystem, PLMap, Rat};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn normalize(weights: Vec<i64>) -> Vec<Rat> {
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| rat(w, total)).collect()
}

/// `0 < a_1 < … < a_n`, `Σa = 1`.
pub fn random_strict_point(rng: &mut StdRng, n: usize) -> SimplexPoint {
    let mut w = Vec::with_capacity(n);
    let mut acc = 0i64;
    for _ in 0..n {
        acc += rng.gen_range(1..=9);
        w.push(acc);
    }
    SimplexPoint::new(normalize(w)).unwrap()
}

/// Any point of the closed simplex, with repeated coordinates and zeros
/// showing up often.
pub fn random_closed_point(rng: &mut StdRng, n: usize) -> SimplexPoint {
    let mut w = Vec::with_capacity(n);
    let mut acc = rng.gen_range(0..=2i64);
    for _ in 0..n {
        w.push(acc);
        acc += rng.gen_range(0..=3);
    }
    if w.iter().all(|&x| x == 0) {
        w = vec![1; n];
    }
    SimplexPoint::new(normalize(w)).unwrap()
}

/// Partial sum `a_1 + … + a_j`.
pub fn psi_oracle(a: &[Rat], j: usize) -> Rat {
    let mut s = Rat::zero();
    for x in &a[..j] {
        s += x;
    }
    s
}

fn run_end(v: &[Rat], i: usize) -> usize {
    let mut e = i;
    while e + 1 < v.len() && v[e + 1] == v[i] {
        e += 1;
    }
    e
}

fn random_start(rng: &mut StdRng, n: usize) -> (Rat, Vec<Rat>) {
    let mut w = Vec::with_capacity(n);
    let mut acc = rng.gen_range(1..=3i64);
    for _ in 0..n {
        w.push(acc);
        if rng.gen_bool(0.6) {
            acc += rng.gen_range(1..=4);
        }
    }
    let scale = rat(rng.gen_range(1..=4), rng.gen_range(1..=4));
    let v: Vec<Rat> = w.iter().map(|&x| rat(x, 1) * &scale).collect();
    let q = v.iter().sum();
    (q, v)
}

/// A band `(lo, hi)` may rise from `v` when its entries are equal and `hi`
/// ends a run of equal values; `prev` is the band of the previous segment.
fn admissible(v: &[Rat], lo: usize, hi: usize, prev: Option<(usize, usize)>) -> bool {
    if (lo..hi).any(|j| v[j] != v[j + 1]) || run_end(v, hi) != hi {
        return false;
    }
    match prev {
        None => true,
        Some(p) if p == (lo, hi) => true,
        Some((rl, _)) => {
            if rl < hi {
                (rl..hi).all(|j| v[j] == v[j + 1])
            } else {
                rl > hi && v[rl] > v[hi]
            }
        }
    }
}

/// Random walk through admissible bands. With `width_one` every band is a
/// single component, giving an n-system.
fn random_walk(rng: &mut StdRng, n: usize, segments: usize, width_one: bool) -> PLMap {
    let (mut q, mut v) = random_start(rng, n);
    let mut bps = vec![q.clone()];
    let mut vals = vec![v.clone()];
    let mut prev: Option<(usize, usize)> = None;
    for _ in 0..segments {
        let mut cands = Vec::new();
        for hi in 0..n {
            for lo in 0..=hi {
                if width_one && lo != hi {
                    continue;
                }
                if admissible(&v, lo, hi, prev) {
                    cands.push((lo, hi));
                }
            }
        }
        let (lo, hi) = cands[rng.gen_range(0..cands.len())];
        let m = (hi - lo + 1) as i64;
        let rise = if hi + 1 < n {
            let room = &v[hi + 1] - &v[hi];
            if rng.gen_bool(0.5) {
                room
            } else {
                room * rat(rng.gen_range(1..=3), 4)
            }
        } else {
            rat(rng.gen_range(1..=6), rng.gen_range(2..=6))
        };
        for x in &mut v[lo..=hi] {
            *x += &rise;
        }
        q += &rise * rat(m, 1);
        bps.push(q.clone());
        vals.push(v.clone());
        prev = Some((lo, hi));
    }
    PLMap::new(bps, vals).unwrap()
}

pub fn random_generalized(rng: &mut StdRng, n: usize, segments: usize) -> GenNSystem {
    let p = random_walk(rng, n, segments, false);
    validate_generalized(p).unwrap_or_else(|v| panic!("generator produced an invalid generalized system: {v}"))
}

pub fn random_nsystem(rng: &mut StdRng, n: usize, segments: usize) -> NSystem {
    let p = random_walk(rng, n, segments, true);
    validate_nsystem(p).unwrap_or_else(|v| panic!("generator produced an invalid n-system: {v}"))
}

fn nonzero_slopes(p: &PLMap, k: usize) -> Vec<Rat> {
    let bps = p.breakpoints();
    let len = &bps[k + 1] - &bps[k];
    (0..p.n()).map(|j| (&p.value_at(k + 1)[j] - &p.value_at(k)[j]) / &len).collect()
}

fn riser(s: &[Rat]) -> Option<usize> {
    let ones: Vec<usize> = (0..s.len()).filter(|&j| s[j].is_one()).collect();
    let rest_zero = (0..s.len()).all(|j| s[j].is_one() || s[j].is_zero());
    (ones.len() == 1 && rest_zero).then(|| ones[0])
}

fn band(s: &[Rat]) -> Option<(usize, usize)> {
    let moving: Vec<usize> = (0..s.len()).filter(|&j| !s[j].is_zero()).collect();
    let (&lo, &hi) = (moving.first()?, moving.last()?);
    let m = rat((hi - lo + 1) as i64, 1);
    let contiguous = moving.len() == hi - lo + 1;
    (contiguous && moving.iter().all(|&j| &s[j] * &m == Rat::one())).then_some((lo, hi))
}

/// Axioms violated by `p`, straight from the definitions. Switch axioms
/// are only examined when the slope axiom holds on every segment.
pub fn oracle_violations(p: &PLMap, kind: SystemKind) -> BTreeSet<Axiom> {
    let (order, slope, switch) = match kind {
        SystemKind::NSystem => (Axiom::S1, Axiom::S2, Axiom::S3),
        SystemKind::Generalized => (Axiom::G1, Axiom::G2, Axiom::G3),
    };
    let mut out = BTreeSet::new();
    for (q, v) in p.breakpoints().iter().zip(p.values()) {
        let sorted = v.windows(2).all(|w| w[0] <= w[1]);
        let sum: Rat = v.iter().sum();
        if !sorted || v[0] < Rat::zero() || sum != *q {
            out.insert(order);
        }
    }
    let segs = p.breakpoints().len() - 1;
    let slopes: Vec<Vec<Rat>> = (0..segs).map(|k| nonzero_slopes(p, k)).collect();
    let mut bands = Vec::new();
    for (k, s) in slopes.iter().enumerate() {
        let b = match kind {
            SystemKind::NSystem => riser(s).map(|r| (r, r)),
            SystemKind::Generalized => band(s),
        };
        match b {
            Some((lo, hi)) if p.value_at(k)[lo..=hi].iter().all(|x| *x == p.value_at(k)[lo]) => bands.push((lo, hi)),
            _ => {
                out.insert(slope);
            }
        }
    }
    if out.contains(&slope) {
        return out;
    }
    for k in 1..segs {
        let ((rl, _), (sl, sh)) = (bands[k - 1], bands[k]);
        if bands[k - 1] == (sl, sh) {
            continue;
        }
        let v = p.value_at(k);
        let ok = if rl < sh {
            v[rl..=sh].iter().all(|x| *x == v[rl])
        } else {
            kind == SystemKind::NSystem || (rl > sh && v[rl] > v[sh])
        };
        if !ok {
            out.insert(switch);
        }
    }
    out
}
