//! Reduction and enumeration of `Z^d` under the quadratic form
//! `G(x) = ‖x‖² + Q²(x·u)²`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::float::LabFloat;
use crate::error::{Error, Result};
use crate::rat::Rat;

pub(crate) struct Form<'a, T> {
    pub u: &'a [T],
    pub q2: T,
}

impl<T: LabFloat> Form<'_, T> {
    pub fn dot_u(&self, x: &[i64]) -> T {
        x.iter().zip(self.u).fold(T::zero(), |acc, (&xi, &ui)| acc + T::from_i128(xi as i128) * ui)
    }

    fn gram(&self, basis: &[Vec<i64>]) -> Vec<Vec<T>> {
        let proj: Vec<T> = basis.iter().map(|b| self.dot_u(b)).collect();
        let d = basis.len();
        let mut g = vec![vec![T::zero(); d]; d];
        for i in 0..d {
            for j in 0..=i {
                let int: i128 = basis[i].iter().zip(&basis[j]).map(|(&a, &b)| a as i128 * b as i128).sum();
                let v = T::from_i128(int) + self.q2 * proj[i] * proj[j];
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }
}

/// Gram–Schmidt data: `mu[i][j]` for `j < i` and squared lengths `b[i]`.
pub(crate) struct GramSchmidt<T> {
    pub mu: Vec<Vec<T>>,
    pub b: Vec<T>,
}

fn gram_schmidt<T: LabFloat>(g: &[Vec<T>]) -> GramSchmidt<T> {
    let d = g.len();
    let mut mu = vec![vec![T::zero(); d]; d];
    let mut b = vec![T::zero(); d];
    for i in 0..d {
        for j in 0..i {
            let mut s = g[i][j];
            for k in 0..j {
                s = s - mu[j][k] * mu[i][k] * b[k];
            }
            mu[i][j] = s / b[j];
        }
        let mut s = g[i][i];
        for k in 0..i {
            s = s - mu[i][k] * mu[i][k] * b[k];
        }
        b[i] = s;
    }
    GramSchmidt { mu, b }
}

const LLL_DELTA: f64 = 0.99;
const LLL_MAX_STEPS: usize = 100_000;

fn axpy(target: &mut [i64], r: i64, source: &[i64]) -> Result<()> {
    for (t, s) in target.iter_mut().zip(source) {
        *t = s.checked_mul(r).and_then(|v| t.checked_sub(v)).ok_or_else(|| overflow("basis update"))?;
    }
    Ok(())
}

fn overflow(what: &str) -> Error {
    Error::SearchExhausted { q: f64::NAN, reason: format!("integer overflow during {what}") }
}

/// LLL-reduces `basis` in place with respect to the form and returns the
/// final Gram–Schmidt data.
pub(crate) fn lll<T: LabFloat>(form: &Form<T>, basis: &mut [Vec<i64>]) -> Result<GramSchmidt<T>> {
    let d = basis.len();
    let mut gs = gram_schmidt(&form.gram(basis));
    let mut k = 1;
    let mut steps = 0;
    while k < d {
        steps += 1;
        if steps > LLL_MAX_STEPS {
            return Err(Error::SearchExhausted { q: f64::NAN, reason: "basis reduction did not converge".into() });
        }
        for j in (0..k).rev() {
            let m = gs.mu[k][j].to_f64();
            if !m.is_finite() || m.abs() > 1e15 {
                return Err(overflow("size reduction"));
            }
            let r = m.round() as i64;
            if r != 0 {
                let src = basis[j].clone();
                axpy(&mut basis[k], r, &src)?;
                gs = gram_schmidt(&form.gram(basis));
            }
        }
        let m = gs.mu[k][k - 1];
        if gs.b[k] >= (T::from_f64(LLL_DELTA) - m * m) * gs.b[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            gs = gram_schmidt(&form.gram(basis));
            k = if k > 1 { k - 1 } else { 1 };
        }
    }
    Ok(gs)
}

/// All nonzero coefficient vectors `c` with `G(Σ c_i b_i) ≤ bound`, using the
/// Gram–Schmidt data of the basis. Fails once `budget` nodes are visited.
pub(crate) fn enumerate(mu: &[Vec<f64>], b: &[f64], bound: f64, budget: usize) -> Result<Vec<Vec<i64>>> {
    let d = b.len();
    let mut out = Vec::new();
    let mut c = vec![0i64; d];
    let mut nodes = 0usize;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        partial: f64,
        c: &mut [i64],
        mu: &[Vec<f64>],
        b: &[f64],
        bound: f64,
        nodes: &mut usize,
        budget: usize,
        out: &mut Vec<Vec<i64>>,
    ) -> bool {
        let d = b.len();
        let center: f64 = -(k + 1..d).map(|i| mu[i][k] * c[i] as f64).sum::<f64>();
        let room = bound - partial;
        if room < 0.0 {
            return true;
        }
        let radius = (room / b[k]).sqrt();
        let lo = (center - radius).ceil() as i64;
        let hi = (center + radius).floor() as i64;
        for v in lo..=hi {
            *nodes += 1;
            if *nodes > budget {
                return false;
            }
            let t = partial + (v as f64 - center).powi(2) * b[k];
            if t > bound {
                continue;
            }
            c[k] = v;
            if k == 0 {
                if c.iter().any(|&x| x != 0) {
                    out.push(c.to_vec());
                }
            } else if !rec(k - 1, t, c, mu, b, bound, nodes, budget, out) {
                return false;
            }
        }
        c[k] = 0;
        true
    }
    if !rec(d - 1, 0.0, &mut c, mu, b, bound, &mut nodes, budget, &mut out) {
        return Err(Error::SearchExhausted { q: f64::NAN, reason: format!("enumeration exceeded {budget} nodes") });
    }
    Ok(out)
}

/// `Σ c_i b_i`.
pub(crate) fn combine(c: &[i64], basis: &[Vec<i64>]) -> Result<Vec<i64>> {
    let d = basis[0].len();
    let mut x = vec![0i128; d];
    for (ci, bi) in c.iter().zip(basis) {
        for (xj, bij) in x.iter_mut().zip(bi) {
            *xj += *ci as i128 * *bij as i128;
        }
    }
    x.into_iter().map(|v| i64::try_from(v).map_err(|_| overflow("coordinate assembly"))).collect()
}

/// Exact test for membership in the span of previously accepted vectors,
/// via an integer basis of the orthogonal complement.
pub(crate) struct SpanTracker {
    dim: usize,
    rows: Vec<Vec<i64>>,
    normals: Vec<Vec<BigInt>>,
}

impl SpanTracker {
    pub fn new(dim: usize) -> Self {
        let normals = (0..dim)
            .map(|i| (0..dim).map(|j| BigInt::from(u8::from(i == j))).collect())
            .collect();
        SpanTracker { dim, rows: Vec::new(), normals }
    }

    #[cfg(test)]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_independent(&self, x: &[i64]) -> bool {
        self.normals.iter().any(|n| {
            let mut acc: Option<i128> = Some(0);
            for (ni, &xi) in n.iter().zip(x) {
                acc = acc.and_then(|a| ni.to_i128().and_then(|v| v.checked_mul(xi as i128)).and_then(|p| a.checked_add(p)));
            }
            match acc {
                Some(v) => v != 0,
                None => n.iter().zip(x).map(|(ni, &xi)| ni * BigInt::from(xi)).sum::<BigInt>() != BigInt::zero(),
            }
        })
    }

    pub fn push(&mut self, x: &[i64]) {
        self.rows.push(x.to_vec());
        self.normals = nullspace(&self.rows, self.dim);
    }
}

/// Integer basis of `{y : r·y = 0 for every row r}`.
fn nullspace(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<Rat>> =
        rows.iter().map(|r| r.iter().map(|&v| Rat::from_integer(BigInt::from(v))).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..dim {
        let Some(p) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot_row = m[row].clone();
                for (v, pv) in m[i].iter_mut().zip(&pivot_row) {
                    *v = &*v - &f * pv;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut y = vec![Rat::zero(); dim];
            y[f] = Rat::from_integer(BigInt::from(1));
            for (r, &pc) in pivots.iter().enumerate() {
                y[pc] = -m[r][f].clone();
            }
            let lcm = y.iter().fold(BigInt::from(1), |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
            y.iter().map(|v| (v * Rat::from_integer(lcm.clone())).to_integer()).collect()
        })
        .collect()
}
