use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::rat::{parse_rat, rat, to_f64, Rat};

/// Exact form of a component, kept for labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactComponent {
    Rational(Rat),
    /// `a + b·√d`, `d > 0`.
    Quadratic { a: Rat, b: Rat, d: Rat },
}

impl ExactComponent {
    pub fn value(&self) -> TwoFloat {
        match self {
            ExactComponent::Rational(r) => rat_to_two(r),
            ExactComponent::Quadratic { a, b, d } => rat_to_two(a) + rat_to_two(b) * rat_to_two(d).sqrt(),
        }
    }
}

impl std::fmt::Display for ExactComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExactComponent::Rational(r) => write!(f, "{r}"),
            ExactComponent::Quadratic { a, b, d } => {
                if !a.is_zero() {
                    write!(f, "{a}")?;
                }
                let sign = if b.is_negative() { "-" } else if a.is_zero() { "" } else { "+" };
                if b.abs().is_one() {
                    write!(f, "{sign}sqrt({d})")
                } else {
                    write!(f, "{sign}{}*sqrt({d})", b.abs())
                }
            }
        }
    }
}

/// Double-double approximation of a rational, correct to about 106 bits.
pub fn rat_to_two(r: &Rat) -> TwoFloat {
    let hi = to_f64(r);
    match Rat::from_float(hi) {
        Some(h) => TwoFloat::new_add(hi, to_f64(&(r - h))),
        None => TwoFloat::from(hi),
    }
}

fn parse_quadratic(s: &str) -> Result<ExactComponent> {
    let bad = || Error::ParseRat(s.to_string());
    let mut body = s;
    let mut den = Rat::one();
    if let Some(rest) = body.strip_prefix('(') {
        let close = rest.rfind(')').ok_or_else(bad)?;
        let (inner, tail) = (&rest[..close], &rest[close + 1..]);
        body = inner;
        if !tail.is_empty() {
            den = parse_rat(tail.strip_prefix('/').ok_or_else(bad)?)?;
        }
    }
    let start = body.find("sqrt(").ok_or_else(bad)?;
    let close = body[start..].find(')').ok_or_else(bad)? + start;
    let d = parse_rat(&body[start + 5..close])?;
    let after = &body[close + 1..];
    if !after.is_empty() {
        den *= parse_rat(after.strip_prefix('/').ok_or_else(bad)?)?;
    }
    let prefix = body[..start].strip_suffix('*').unwrap_or(&body[..start]);
    let split = prefix.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').last().map(|(i, _)| i);
    let (a_str, b_str) = match split {
        Some(i) => (&prefix[..i], &prefix[i..]),
        None => ("", prefix),
    };
    let a = if a_str.is_empty() { Rat::zero() } else { parse_rat(a_str)? };
    let b = match b_str {
        "" | "+" => Rat::one(),
        "-" => -Rat::one(),
        other => parse_rat(other)?,
    };
    if d <= Rat::zero() || den.is_zero() {
        return Err(bad());
    }
    Ok(ExactComponent::Quadratic { a: a / &den, b: b / &den, d })
}

/// Parses `"p/q"`, a decimal, `"phi"`, or `a+b*sqrt(d)` with an optional
/// parenthesised numerator and `/c` divisor, e.g. `"(1+sqrt(5))/2"`.
pub fn parse_component(s: &str) -> Result<ExactComponent> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t == "phi" {
        return Ok(ExactComponent::Quadratic { a: rat(1, 2), b: rat(1, 2), d: rat(5, 1) });
    }
    if t.contains("sqrt(") {
        return parse_quadratic(&t);
    }
    parse_rat(&t).map(ExactComponent::Rational)
}

/// A nonzero direction `u`, normalised to unit Euclidean length.
#[derive(Clone, Debug)]
pub struct TargetVector {
    unit: Vec<TwoFloat>,
    exact: Option<Vec<ExactComponent>>,
}

impl TargetVector {
    pub fn from_values(values: Vec<TwoFloat>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::build(values.iter().map(|&x| TwoFloat::from(x)).collect(), None)
    }

    pub fn from_exact(components: Vec<ExactComponent>) -> Result<Self> {
        let values = components.iter().map(ExactComponent::value).collect();
        Self::build(values, Some(components))
    }

    /// Comma-separated components in the syntax of [`parse_component`].
    pub fn parse(s: &str) -> Result<Self> {
        let parts = split_components(s);
        let comps = parts.iter().map(|p| parse_component(p)).collect::<Result<Vec<_>>>()?;
        Self::from_exact(comps)
    }

    fn build(values: Vec<TwoFloat>, exact: Option<Vec<ExactComponent>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Precondition("target vector needs at least two components".into()));
        }
        if values.iter().any(|v| !v.hi().is_finite()) {
            return Err(Error::Precondition("target vector has a non-finite component".into()));
        }
        let norm2 = values.iter().fold(TwoFloat::from(0.0), |acc, v| acc + *v * *v);
        if norm2.hi() == 0.0 {
            return Err(Error::Precondition("target vector is zero".into()));
        }
        let norm = norm2.sqrt();
        Ok(TargetVector { unit: values.iter().map(|v| *v / norm).collect(), exact })
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    pub fn unit(&self) -> &[TwoFloat] {
        &self.unit
    }

    pub fn exact(&self) -> Option<&[ExactComponent]> {
        self.exact.as_deref()
    }

    pub fn approx(&self) -> Vec<f64> {
        self.unit.iter().map(|v| v.hi() + v.lo()).collect()
    }

    pub fn description(&self) -> TargetDescription {
        TargetDescription {
            unit_approx: self.approx(),
            exact: self.exact.as_ref().map(|v| v.iter().map(ToString::to_string).collect()),
        }
    }
}

/// Splits on commas that are not inside parentheses.
fn split_components(s: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(String::new());
                continue;
            }
            _ => {}
        }
        out.last_mut().unwrap().push(c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetDescription {
    pub unit_approx: Vec<f64>,
    pub exact: Option<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_forms() {
        assert_eq!(parse_component("3/4").unwrap(), ExactComponent::Rational(rat(3, 4)));
        let phi = ExactComponent::Quadratic { a: rat(1, 2), b: rat(1, 2), d: rat(5, 1) };
        assert_eq!(parse_component("phi").unwrap(), phi);
        assert_eq!(parse_component("(1+sqrt(5))/2").unwrap(), phi);
        assert_eq!(parse_component("1/2+1/2*sqrt(5)").unwrap(), phi);
        assert_eq!(
            parse_component("-sqrt(2)").unwrap(),
            ExactComponent::Quadratic { a: rat(0, 1), b: rat(-1, 1), d: rat(2, 1) }
        );
        assert_eq!(
            parse_component("3-2*sqrt(2)").unwrap(),
            ExactComponent::Quadratic { a: rat(3, 1), b: rat(-2, 1), d: rat(2, 1) }
        );
        assert!(parse_component("sqrt(-1)").is_err());
        assert!(parse_component("x").is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["sqrt(2)", "-sqrt(3)", "1/2+1/2*sqrt(5)", "3-2*sqrt(2)", "7/3"] {
            let c = parse_component(text).unwrap();
            assert_eq!(c.to_string(), text);
            assert_eq!(parse_component(&c.to_string()).unwrap(), c);
        }
    }

    #[test]
    fn golden_ratio_is_accurate_beyond_f64() {
        let phi = parse_component("phi").unwrap().value();
        // φ² − φ − 1 = 0.
        let r = phi * phi - phi - TwoFloat::from(1.0);
        assert!(r.hi().abs() < 1e-30, "{r:?}");
    }

    #[test]
    fn vectors_are_normalised() {
        let u = TargetVector::parse("3,4").unwrap();
        let a = u.approx();
        assert!((a[0] - 0.6).abs() < 1e-15 && (a[1] - 0.8).abs() < 1e-15);
        let v = TargetVector::parse("1,(1+sqrt(5))/2").unwrap();
        assert_eq!(v.dim(), 2);
        assert!(TargetVector::parse("0,0").is_err());
        assert!(TargetVector::parse("1").is_err());
    }

    #[test]
    fn decimal_input_is_exact() {
        let r = rat_to_two(&parse_rat("0.1").unwrap());
        let residual = r * TwoFloat::from(10.0) - TwoFloat::from(1.0);
        assert!(residual.hi().abs() < 1e-31, "{residual:?}");
    }
}
