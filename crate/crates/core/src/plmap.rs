//! Continuous piecewise-linear vector maps on a closed rational interval.
//!
//! A [`PLMap`] stores its breakpoints `t_0 < … < t_m` and the value vector at
//! each breakpoint; between breakpoints the map is the linear interpolation.
//! Continuity is therefore structural and every axiom check downstream reads
//! exact values directly.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::{serde_rat_mat, serde_rat_vec, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PLMapJson", into = "PLMapJson")]
pub struct PLMap {
    n: usize,
    breakpoints: Vec<Rat>,
    values: Vec<Vec<Rat>>,
}

/// Wire form of a [`PLMap`]; `kind` is set by the system wrappers once a map
/// has been validated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PLMapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub n: usize,
    #[serde(with = "serde_rat_vec")]
    pub breakpoints: Vec<Rat>,
    #[serde(with = "serde_rat_mat")]
    pub values: Vec<Vec<Rat>>,
}

impl TryFrom<PLMapJson> for PLMap {
    type Error = Error;

    fn try_from(raw: PLMapJson) -> Result<Self> {
        let map = PLMap::new(raw.breakpoints, raw.values)?;
        if map.n != raw.n {
            return Err(Error::Malformed(format!("declared n = {} but value vectors have {} entries", raw.n, map.n)));
        }
        Ok(map)
    }
}

impl From<PLMap> for PLMapJson {
    fn from(map: PLMap) -> Self {
        PLMapJson { kind: None, n: map.n, breakpoints: map.breakpoints, values: map.values }
    }
}

impl PLMap {
    /// Builds a map from breakpoints and breakpoint values. Repeated
    /// consecutive breakpoints (zero-length segments) are dropped when their
    /// values agree.
    pub fn new(breakpoints: Vec<Rat>, values: Vec<Vec<Rat>>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::Malformed(format!(
                "{} breakpoints but {} value vectors",
                breakpoints.len(),
                values.len()
            )));
        }
        let n = values.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::Malformed("a map needs at least one component".into()));
        }
        if let Some(bad) = values.iter().position(|v| v.len() != n) {
            return Err(Error::Malformed(format!("value vector {bad} has {} entries, expected {n}", values[bad].len())));
        }

        let mut bps: Vec<Rat> = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<Vec<Rat>> = Vec::with_capacity(values.len());
        for (t, v) in breakpoints.into_iter().zip(values) {
            if let Some(last) = bps.last() {
                if *last == t {
                    if *vals.last().unwrap() != v {
                        return Err(Error::Malformed(format!("two different values at breakpoint {t}")));
                    }
                    continue;
                }
                if *last > t {
                    return Err(Error::Malformed(format!("breakpoints not increasing at {t}")));
                }
            }
            bps.push(t);
            vals.push(v);
        }
        if bps.len() < 2 {
            return Err(Error::Malformed("domain has empty interior".into()));
        }
        Ok(PLMap { n, breakpoints: bps, values: vals })
    }

    /// The single-segment map from `(a, va)` to `(b, vb)`.
    pub fn segment(a: Rat, va: Vec<Rat>, b: Rat, vb: Vec<Rat>) -> Result<Self> {
        PLMap::new(vec![a, b], vec![va, vb])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<Rat>] {
        &self.values
    }

    pub fn value_at(&self, k: usize) -> &[Rat] {
        &self.values[k]
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn start(&self) -> &Rat {
        &self.breakpoints[0]
    }

    pub fn end(&self) -> &Rat {
        self.breakpoints.last().unwrap()
    }

    pub fn contains(&self, q: &Rat) -> bool {
        self.start() <= q && q <= self.end()
    }

    pub fn eval(&self, q: &Rat) -> Result<Vec<Rat>> {
        match self.breakpoints.binary_search(q) {
            Ok(k) => Ok(self.values[k].clone()),
            Err(i) if i == 0 || i == self.breakpoints.len() => Err(Error::OutOfDomain {
                q: q.clone(),
                lo: self.start().clone(),
                hi: self.end().clone(),
            }),
            Err(i) => Ok(self.interpolate(i - 1, q)),
        }
    }

    /// Values at a non-decreasing list of points, in one sweep.
    pub fn eval_sorted(&self, qs: &[Rat]) -> Result<Vec<Vec<Rat>>> {
        let mut out = Vec::with_capacity(qs.len());
        let mut k = 0;
        for q in qs {
            if !self.contains(q) {
                return Err(Error::OutOfDomain { q: q.clone(), lo: self.start().clone(), hi: self.end().clone() });
            }
            while k + 1 < self.breakpoints.len() && self.breakpoints[k + 1] <= *q {
                k += 1;
            }
            if self.breakpoints[k] == *q {
                out.push(self.values[k].clone());
            } else {
                out.push(self.interpolate(k, q));
            }
        }
        Ok(out)
    }

    fn interpolate(&self, k: usize, q: &Rat) -> Vec<Rat> {
        let (t0, t1) = (&self.breakpoints[k], &self.breakpoints[k + 1]);
        let w = (q - t0) / (t1 - t0);
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(v0, v1)| v0 + (v1 - v0) * &w)
            .collect()
    }

    /// Componentwise slope on the open segment `(t_k, t_{k+1})`.
    pub fn slopes(&self, k: usize) -> Result<Vec<Rat>> {
        if k >= self.segment_count() {
            return Err(Error::SegmentIndex { index: k, count: self.segment_count() });
        }
        Ok(self.slopes_unchecked(k))
    }

    pub(crate) fn slopes_unchecked(&self, k: usize) -> Vec<Rat> {
        let len = &self.breakpoints[k + 1] - &self.breakpoints[k];
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(v0, v1)| (v1 - v0) / &len)
            .collect()
    }

    /// Restriction to `[a, b]`, inserting `a` and `b` as breakpoints.
    pub fn restrict(&self, a: &Rat, b: &Rat) -> Result<Self> {
        if a >= b || !self.contains(a) || !self.contains(b) {
            return Err(Error::EmptyInterval { a: a.clone(), b: b.clone() });
        }
        let mut bps = vec![a.clone()];
        let mut vals = vec![self.eval(a)?];
        for (t, v) in self.breakpoints.iter().zip(&self.values) {
            if t > a && t < b {
                bps.push(t.clone());
                vals.push(v.clone());
            }
        }
        bps.push(b.clone());
        vals.push(self.eval(b)?);
        PLMap::new(bps, vals)
    }

    /// Glues `self` on `[a, b]` to `other` on `[b, c]`. The junction `b`
    /// survives as a breakpoint only if the slopes differ across it.
    pub fn concat(&self, other: &PLMap) -> Result<Self> {
        PLMap::concat_all(&[self.clone(), other.clone()])
    }

    /// Left-to-right gluing of any number of abutting pieces.
    pub fn concat_all(pieces: &[PLMap]) -> Result<Self> {
        let first = pieces.first().ok_or_else(|| Error::Malformed("nothing to concatenate".into()))?;
        let n = first.n;
        let mut bps = first.breakpoints.clone();
        let mut vals = first.values.clone();
        for piece in &pieces[1..] {
            if piece.n != n {
                return Err(Error::DimensionMismatch { left: n, right: piece.n });
            }
            let b = bps.last().unwrap();
            if b != piece.start() {
                return Err(Error::EndpointMismatch { left: b.clone(), right: piece.start().clone() });
            }
            if vals.last().unwrap() != &piece.values[0] {
                return Err(Error::JunctionMismatch { at: b.clone() });
            }
            // Drop the junction if the last segment so far and the first
            // segment of the new piece are collinear.
            let k = bps.len() - 1;
            let left_len = &bps[k] - &bps[k - 1];
            let right_len = &piece.breakpoints[1] - &piece.breakpoints[0];
            let collinear = (0..n).all(|j| {
                (&vals[k][j] - &vals[k - 1][j]) * &right_len == (&piece.values[1][j] - &piece.values[0][j]) * &left_len
            });
            if collinear {
                bps.pop();
                vals.pop();
            }
            bps.extend(piece.breakpoints[1..].iter().cloned());
            vals.extend(piece.values[1..].iter().cloned());
        }
        PLMap::new(bps, vals)
    }

    /// The map `q ↦ s·P(q/s)` on `[s·t_0, s·t_m]`.
    pub fn scaled(&self, s: &Rat) -> Result<Self> {
        if *s <= Rat::zero() {
            return Err(Error::Precondition(format!("scale factor {s} must be positive")));
        }
        Ok(PLMap {
            n: self.n,
            breakpoints: self.breakpoints.iter().map(|t| t * s).collect(),
            values: self.values.iter().map(|v| v.iter().map(|x| x * s).collect()).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PLMap serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn v(xs: &[(i64, i64)]) -> Vec<Rat> {
        xs.iter().map(|&(p, q)| rat(p, q)).collect()
    }

    fn sample() -> PLMap {
        PLMap::new(vec![int(0), int(1), int(2)], vec![v(&[(0, 1), (0, 1)]), v(&[(0, 1), (1, 1)]), v(&[(1, 1), (1, 1)])])
            .unwrap()
    }

    #[test]
    fn eval_interpolates_and_hits_breakpoints() {
        let p = sample();
        assert_eq!(p.eval(&rat(1, 2)).unwrap(), v(&[(0, 1), (1, 2)]));
        assert_eq!(p.eval(&int(1)).unwrap(), v(&[(0, 1), (1, 1)]));
        assert_eq!(p.eval(&rat(3, 2)).unwrap(), v(&[(1, 2), (1, 1)]));
        assert!(matches!(p.eval(&int(3)), Err(Error::OutOfDomain { .. })));
        assert!(matches!(p.eval(&rat(-1, 2)), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn slopes_per_segment() {
        let p = sample();
        assert_eq!(p.slopes(0).unwrap(), v(&[(0, 1), (1, 1)]));
        assert_eq!(p.slopes(1).unwrap(), v(&[(1, 1), (0, 1)]));
        assert!(matches!(p.slopes(2), Err(Error::SegmentIndex { index: 2, count: 2 })));
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(PLMap::new(vec![int(0)], vec![v(&[(0, 1)])]).is_err());
        assert!(PLMap::new(vec![int(1), int(0)], vec![v(&[(0, 1)]), v(&[(0, 1)])]).is_err());
        assert!(PLMap::new(vec![int(0), int(1)], vec![v(&[(0, 1)]), v(&[(0, 1), (1, 1)])]).is_err());
        assert!(PLMap::new(vec![int(0), int(0), int(1)], vec![v(&[(0, 1)]), v(&[(1, 1)]), v(&[(1, 1)])]).is_err());
    }

    #[test]
    fn zero_length_segments_are_dropped() {
        let p = PLMap::new(
            vec![int(0), int(1), int(1), int(2)],
            vec![v(&[(0, 1)]), v(&[(1, 1)]), v(&[(1, 1)]), v(&[(2, 1)])],
        )
        .unwrap();
        assert_eq!(p.breakpoints(), &[int(0), int(1), int(2)]);
    }

    #[test]
    fn restrict_inserts_endpoints() {
        let p = sample();
        let r = p.restrict(&int(0), &int(1)).unwrap();
        assert_eq!(r.breakpoints(), &[int(0), int(1)]);
        let r = p.restrict(&rat(1, 2), &rat(3, 2)).unwrap();
        assert_eq!(r.breakpoints(), &[rat(1, 2), int(1), rat(3, 2)]);
        assert_eq!(r.eval(&rat(3, 2)).unwrap(), v(&[(1, 2), (1, 1)]));
        assert!(p.restrict(&int(1), &int(1)).is_err());
        assert!(p.restrict(&int(1), &int(3)).is_err());
    }

    #[test]
    fn concat_merges_collinear_junction() {
        let half = |a: i64, b: i64| {
            PLMap::segment(int(a), vec![rat(a, 2), rat(a, 2)], int(b), vec![rat(b, 2), rat(b, 2)]).unwrap()
        };
        let glued = half(0, 1).concat(&half(1, 2)).unwrap();
        assert_eq!(glued.breakpoints(), &[int(0), int(2)]);
    }

    #[test]
    fn concat_checks_endpoints_and_values() {
        let a = PLMap::segment(int(0), v(&[(0, 1)]), int(1), v(&[(1, 1)])).unwrap();
        let b = PLMap::segment(int(1), v(&[(2, 1)]), int(2), v(&[(2, 1)])).unwrap();
        assert!(matches!(a.concat(&b), Err(Error::JunctionMismatch { .. })));
        let c = PLMap::segment(int(2), v(&[(1, 1)]), int(3), v(&[(1, 1)])).unwrap();
        assert!(matches!(a.concat(&c), Err(Error::EndpointMismatch { .. })));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let text = r#"{"n":2,"breakpoints":["0","1/2","3"],"values":[["0","0"],["1/4","1/4"],["1","2"]]}"#;
        let p = PLMap::from_json(text).unwrap();
        assert_eq!(p.to_json(), text);
        assert!(PLMap::from_json(r#"{"n":3,"breakpoints":["0","1"],"values":[["0"],["1"]]}"#).is_err());
    }
}
