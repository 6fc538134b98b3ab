//! Combined-graph SVG output. Coordinates are data units: the viewBox is
//! the data box rounded outward to six decimals plus a margin, and the y
//! axis is flipped by negating every ordinate.

use std::fmt::Write;

use num_traits::Zero;

use nsys_core::rat::{fmt_rat, to_f64};
use nsys_core::{PLMap, Rat};

use crate::table::MinimaSeries;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const SCALE: i64 = 1_000_000;

pub struct RenderSpec<'a> {
    pub system: Option<&'a PLMap>,
    pub minima: Option<&'a MinimaSeries>,
    pub width: u32,
    pub height: u32,
    pub guides: bool,
    pub slope_labels: bool,
}

/// Six decimals with trailing zeros removed; never prints `-0`.
pub fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn floor6(r: &Rat) -> f64 {
    let s = Rat::from_integer(SCALE.into());
    to_f64(&((r * &s).floor() / s))
}

fn ceil6(r: &Rat) -> f64 {
    let s = Rat::from_integer(SCALE.into());
    to_f64(&((r * &s).ceil() / s))
}

fn floor6_f(x: f64) -> f64 {
    (x * SCALE as f64).floor() / SCALE as f64
}

fn ceil6_f(x: f64) -> f64 {
    (x * SCALE as f64).ceil() / SCALE as f64
}

#[derive(Clone, Copy)]
struct Bounds {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bounds {
    fn merge(self, o: Bounds) -> Bounds {
        Bounds { x0: self.x0.min(o.x0), x1: self.x1.max(o.x1), y0: self.y0.min(o.y0), y1: self.y1.max(o.y1) }
    }
}

fn system_bounds(p: &PLMap) -> Bounds {
    let zero = Rat::zero();
    let lo = p.values().iter().flatten().min().unwrap_or(&zero).min(&zero);
    let hi = p.values().iter().flatten().max().unwrap_or(&zero);
    Bounds { x0: floor6(p.start()), x1: ceil6(p.end()), y0: floor6(lo), y1: ceil6(hi) }
}

fn series_bounds(s: &MinimaSeries) -> Option<Bounds> {
    let (qa, qb) = (s.q.first()?, s.q.last()?);
    let ys = s.l.iter().flatten().copied();
    let y0 = ys.clone().fold(f64::INFINITY, f64::min).min(0.0);
    let y1 = ys.fold(f64::NEG_INFINITY, f64::max).max(0.0);
    Some(Bounds { x0: floor6_f(*qa), x1: ceil6_f(*qb), y0: floor6_f(y0), y1: ceil6_f(y1) })
}

/// Who draws segment `k` of component `j`: the lowest index with the same
/// endpoint values, and how many components share it.
fn ownership(p: &PLMap, k: usize, j: usize) -> (usize, usize) {
    let (a, b) = (p.value_at(k), p.value_at(k + 1));
    let same: Vec<usize> = (0..p.n()).filter(|&i| a[i] == a[j] && b[i] == b[j]).collect();
    (same[0], same.len())
}

struct Canvas {
    out: String,
    sx: f64,
    sy: f64,
}

impl Canvas {
    fn point(x: f64, y: f64) -> String {
        format!("{},{}", num(x), num(-y))
    }

    fn text(&mut self, class: &str, x: f64, y: f64, anchor: &str, body: &str) {
        let _ = writeln!(
            self.out,
            r#"<text class="{class}" text-anchor="{anchor}" transform="translate({} {}) scale({} {})">{body}</text>"#,
            num(x),
            num(-y),
            num(self.sx),
            num(self.sy),
        );
    }

    fn polyline(&mut self, class: &str, pts: &[(f64, f64)]) {
        let joined: Vec<String> = pts.iter().map(|&(x, y)| Self::point(x, y)).collect();
        let _ = writeln!(self.out, r#"<polyline class="{class}" points="{}"/>"#, joined.join(" "));
    }

    fn line(&mut self, class: &str, a: (f64, f64), b: (f64, f64)) {
        let _ = writeln!(
            self.out,
            r#"<line class="{class}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(a.0),
            num(-a.1),
            num(b.0),
            num(-b.1)
        );
    }
}

fn style(components: usize) -> String {
    let mut s = String::from(
        "<style>\n\
         .trace,.minima,.guide,.axis{fill:none;vector-effect:non-scaling-stroke}\n\
         .trace{stroke-width:1.6}\n\
         .minima{stroke-width:1.2;stroke-dasharray:5 3}\n\
         .guide{stroke:#999;stroke-width:0.8;stroke-dasharray:4 4}\n\
         .axis{stroke:#333;stroke-width:1}\n\
         text{font-family:sans-serif;font-size:11px;fill:#222}\n",
    );
    for j in 0..components {
        let c = PALETTE[j % PALETTE.len()];
        let _ = writeln!(s, ".P{0},.L{0}{{stroke:{c}}}", j + 1);
    }
    s.push_str("</style>\n");
    s
}

fn draw_system(c: &mut Canvas, p: &PLMap, spec: &RenderSpec, b: Bounds, label_drop: f64) {
    let bps = p.breakpoints();
    let xs: Vec<f64> = bps.iter().map(to_f64).collect();
    let traces: Vec<Vec<f64>> = (0..p.n()).map(|j| p.values().iter().map(|v| to_f64(&v[j])).collect()).collect();
    if spec.guides {
        for (i, &x) in xs.iter().enumerate() {
            c.line("guide", (x, b.y0), (x, b.y1));
            c.text("guide-label", x, b.y0 - label_drop, "middle", &format!("q<tspan baseline-shift=\"sub\" font-size=\"8px\">{}</tspan>", i + 1));
        }
    }
    let segs = bps.len() - 1;
    for (j, ys) in traces.iter().enumerate() {
        let mut run: Vec<(f64, f64)> = Vec::new();
        for k in 0..segs {
            if ownership(p, k, j).0 == j {
                if run.is_empty() {
                    run.push((xs[k], ys[k]));
                }
                run.push((xs[k + 1], ys[k + 1]));
            } else if !run.is_empty() {
                c.polyline(&format!("trace P{}", j + 1), &run);
                run.clear();
            }
        }
        if !run.is_empty() {
            c.polyline(&format!("trace P{}", j + 1), &run);
        }
    }
    for k in 0..segs {
        let (mx, gap) = ((xs[k] + xs[k + 1]) / 2.0, label_drop / 2.0);
        for (j, ys) in traces.iter().enumerate() {
            let (owner, mult) = ownership(p, k, j);
            if owner != j {
                continue;
            }
            let my = (ys[k] + ys[k + 1]) / 2.0;
            if mult > 1 {
                c.text("band", mx, my + gap, "end", &format!("×{mult}"));
            }
            let rise = &p.value_at(k + 1)[j] - &p.value_at(k)[j];
            if spec.slope_labels && !rise.is_zero() {
                let slope = rise / (&bps[k + 1] - &bps[k]);
                c.text("slope", mx, my - gap, "start", &fmt_rat(&slope));
            }
        }
    }
}

fn draw_minima(c: &mut Canvas, s: &MinimaSeries) {
    for (j, col) in s.l.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s.q.iter().copied().zip(col.iter().copied()).collect();
        if !pts.is_empty() {
            c.polyline(&format!("minima L{}", j + 1), &pts);
        }
    }
}

/// Byte-deterministic in its inputs.
pub fn render_svg(spec: &RenderSpec) -> String {
    let mut bounds = spec.system.map(system_bounds);
    if let Some(sb) = spec.minima.and_then(series_bounds) {
        bounds = Some(bounds.map_or(sb, |b| b.merge(sb)));
    }
    let mut b = bounds.unwrap_or(Bounds { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 });
    if b.x1 <= b.x0 {
        b.x1 = b.x0 + 1.0;
    }
    if b.y1 <= b.y0 {
        b.y1 = b.y0 + 1.0;
    }
    let (w, h) = (b.x1 - b.x0, b.y1 - b.y0);
    let (mx, top, bottom) = (w * 0.06, h * 0.06, h * 0.12);
    let vb = [b.x0 - mx, -(b.y1 + top), w + 2.0 * mx, h + top + bottom];
    let (width, height) = (spec.width.max(1), spec.height.max(1));
    let mut c = Canvas { out: String::new(), sx: vb[2] / width as f64, sy: vb[3] / height as f64 };
    let components = spec.system.map_or(0, PLMap::n).max(spec.minima.map_or(0, |s| s.l.len()));
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="{} {} {} {}" preserveAspectRatio="none">"#,
        num(vb[0]),
        num(vb[1]),
        num(vb[2]),
        num(vb[3])
    );
    c.out.push_str(&style(components));
    c.line("axis", (b.x0, b.y0), (b.x1, b.y0));
    if let Some(p) = spec.system {
        draw_system(&mut c, p, spec, b, bottom * 0.6);
    }
    if let Some(s) = spec.minima {
        draw_minima(&mut c, s);
    }
    c.out.push_str("</svg>\n");
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nsys_core::rat;

    fn ray(n: usize) -> PLMap {
        let v = |q: i64| vec![rat(q, n as i64); n];
        PLMap::new(vec![rat(1, 1), rat(4, 1)], vec![v(1), v(4)]).unwrap()
    }

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.0000001), "0");
        assert_eq!(num(1.0 / 3.0), "0.333333");
    }

    #[test]
    fn straight_ray_is_one_line() {
        let p = ray(3);
        let spec = RenderSpec { system: Some(&p), minima: None, width: 400, height: 300, guides: false, slope_labels: true };
        let svg = render_svg(&spec);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">×3</text>"));
        assert!(svg.contains(">1/3</text>"));
        assert!(!svg.contains("class=\"guide\""));
    }

    #[test]
    fn view_box_rounds_outward() {
        let p = PLMap::new(vec![rat(1, 3), rat(2, 3)], vec![vec![rat(1, 3)], vec![rat(2, 3)]]).unwrap();
        let b = system_bounds(&p);
        assert_eq!((b.x0, b.x1), (0.333333, 0.666667));
        assert_eq!((b.y0, b.y1), (0.0, 0.666667));
    }
}
