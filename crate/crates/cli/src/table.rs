//! CSV export of minima trajectories and the reader used by the plot
//! overlay.

use std::io::{Read, Write};

use nsys_core::minima::MinimaTrajectory;

/// Grid values and `L_j` columns, `l[j][k]` being `L_{j+1}(q_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaSeries {
    pub q: Vec<f64>,
    pub l: Vec<Vec<f64>>,
}

fn header(d: usize) -> Vec<String> {
    let mut h = vec!["q_approx".to_string()];
    h.extend((1..=d).map(|j| format!("L_{j}_approx")));
    h.push("witnesses".into());
    h
}

fn witness_cell(ws: &[Vec<i64>]) -> String {
    ws.iter()
        .map(|x| x.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(";")
}

/// Floats use the shortest representation that parses back to the same
/// value.
pub fn write_csv<W: Write>(traj: &MinimaTrajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(traj.dim))?;
    for m in &traj.points {
        let mut row = vec![m.q.to_string()];
        row.extend(m.l.iter().map(f64::to_string));
        row.push(witness_cell(&m.witnesses));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series<R: Read>(input: R) -> Result<MinimaSeries, String> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.get(0) != Some("q_approx") {
        return Err("first column must be q_approx".into());
    }
    let l_cols: Vec<usize> = (1..headers.len()).filter(|&i| headers[i].starts_with("L_")).collect();
    if l_cols.is_empty() {
        return Err("no L_j columns".into());
    }
    let mut series = MinimaSeries { q: Vec::new(), l: vec![Vec::new(); l_cols.len()] };
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| -> Result<f64, String> {
            let s = rec.get(i).ok_or_else(|| format!("row {} is short", series.q.len() + 1))?;
            s.parse::<f64>().map_err(|_| format!("bad number {s:?}"))
        };
        let q = num(0)?;
        for (col, &i) in l_cols.iter().enumerate() {
            let v = num(i)?;
            series.l[col].push(v);
        }
        series.q.push(q);
    }
    Ok(series)
}

pub fn parse_witnesses(cell: &str) -> Result<Vec<Vec<i64>>, String> {
    cell.split(';')
        .map(|v| v.split_whitespace().map(|x| x.parse::<i64>().map_err(|_| format!("bad coordinate {x:?}"))).collect())
        .collect()
}
