mod support;

use proptest::prelude::*;

use nsys_core::minima::{
    estimate_exponents, gauge, minkowski_window, successive_minima, trajectory, MinimaTrajectory, Precision,
    TargetVector,
};

/// Rank of integer vectors by fraction-free elimination in i128.
fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in r + 1..m.len() {
            let (a, b) = (m[r][c], m[i][c]);
            let pivot = m[r].clone();
            for (x, p) in m[i].iter_mut().zip(&pivot) {
                *x = *x * a - p * b;
            }
        }
        r += 1;
    }
    r
}

/// Successive minima by scanning the box `|x_i| ≤ Q`, which contains every
/// point of gauge at most `max_i gauge(e_i) ≤ Q`.
fn brute_force(u: &[f64], q: f64) -> Vec<f64> {
    let d = u.len();
    let big_q = q.exp();
    let b = big_q.ceil() as i64;
    let mut pts: Vec<(f64, Vec<i64>)> = Vec::new();
    let mut x = vec![-b; d];
    loop {
        if x.iter().any(|&v| v != 0) {
            let norm = x.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
            let form: f64 = x.iter().zip(u).map(|(&v, &w)| v as f64 * w).sum::<f64>().abs();
            pts.push((norm.max(big_q * form), x.clone()));
        }
        let mut i = 0;
        while i < d && x[i] == b {
            x[i] = -b;
            i += 1;
        }
        if i == d {
            break;
        }
        x[i] += 1;
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut out = Vec::new();
    for (g, x) in pts {
        chosen.push(x);
        if rank(&chosen) == chosen.len() {
            out.push(g);
            if out.len() == d {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    out
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minima_match_brute_force(raw in proptest::collection::vec(-1.0f64..1.0, 2..=3), q in 0.0f64..2.3) {
        prop_assume!(raw.iter().map(|x| x * x).sum::<f64>() > 0.05);
        let u = unit(&raw);
        let target = TargetVector::from_f64(&u).unwrap();
        let m = successive_minima(&target, q, Precision::DoubleDouble).unwrap();
        let expected = brute_force(&u, q);
        for (a, b) in m.lambda.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{:?} vs {:?}", m.lambda, expected);
        }
        for (x, l) in m.witnesses.iter().zip(&m.lambda) {
            let g = gauge(&target, q.exp(), x).unwrap();
            prop_assert!((g - l).abs() <= 1e-12 * l.max(1.0));
        }
        prop_assert_eq!(rank(&m.witnesses), u.len());
    }

    #[test]
    fn precisions_agree_at_moderate_q(raw in proptest::collection::vec(-1.0f64..1.0, 3..=4), q in 0.0f64..8.0) {
        prop_assume!(raw.iter().map(|x| x * x).sum::<f64>() > 0.05);
        let target = TargetVector::from_f64(&unit(&raw)).unwrap();
        let a = successive_minima(&target, q, Precision::Double).unwrap();
        let b = successive_minima(&target, q, Precision::DoubleDouble).unwrap();
        for (x, y) in a.l.iter().zip(&b.l) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn precision_from_bits() {
    assert_eq!(Precision::from_bits(53).unwrap(), Precision::Double);
    assert_eq!(Precision::from_bits(24).unwrap(), Precision::Double);
    assert_eq!(Precision::from_bits(54).unwrap(), Precision::DoubleDouble);
    assert_eq!(Precision::from_bits(80).unwrap(), Precision::DoubleDouble);
    assert_eq!(Precision::from_bits(106).unwrap(), Precision::DoubleDouble);
    assert!(Precision::from_bits(107).is_err());
}

fn small_trajectory() -> MinimaTrajectory {
    let u = TargetVector::parse("1,sqrt(2),sqrt(3)").unwrap();
    trajectory(&u, 6.0, 0.25, Precision::DoubleDouble).unwrap()
}

#[test]
fn trajectory_json_round_trip() {
    let t = small_trajectory();
    let text = serde_json::to_string(&t).unwrap();
    let back: MinimaTrajectory = serde_json::from_str(&text).unwrap();
    assert_eq!(back, t);
    let est = estimate_exponents(&t, 0.5).unwrap();
    let text = serde_json::to_string(&est).unwrap();
    let back: nsys_core::minima::ExponentEstimate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, est);
}

#[test]
fn trajectory_invariants() {
    let t = small_trajectory();
    assert_eq!(t.points.len(), 25);
    let (lo, hi) = minkowski_window(3);
    for m in &t.points {
        assert!(m.l.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let s = m.l.iter().sum::<f64>() - m.q;
        assert!(s >= lo - 1e-9 && s <= hi + 1e-9, "{s} at {}", m.q);
    }
    for w in t.points.windows(2) {
        for (a, b) in w[0].l.iter().zip(&w[1].l) {
            assert!(b - a >= -1e-9 && b - a <= 0.25 + 1e-9);
        }
    }
}

#[test]
fn estimates_for_an_axis_vector() {
    let t = trajectory(&TargetVector::from_f64(&[0.0, 0.0, 1.0]).unwrap(), 4.0, 0.5, Precision::Double).unwrap();
    let est = estimate_exponents(&t, 0.5).unwrap();
    assert_eq!(est.psi_lower, vec![0.0, 0.0]);
    assert!(est.omega.iter().all(|w| w.is_infinite()));
    assert!(est.approximate);
    let text = serde_json::to_string(&est).unwrap();
    assert!(text.contains("\"inf\""));
}

#[test]
fn bad_inputs_are_rejected() {
    let u = TargetVector::from_f64(&[1.0, 2.0]).unwrap();
    assert!(trajectory(&u, 1.0, 0.0, Precision::Double).is_err());
    assert!(trajectory(&u, 0.05, 0.1, Precision::Double).is_err());
    assert!(gauge(&u, 2.0, &[0, 0]).is_err());
    assert!(gauge(&u, 2.0, &[1, 0, 0]).is_err());
    assert!(TargetVector::from_f64(&[f64::NAN, 1.0]).is_err());
}
