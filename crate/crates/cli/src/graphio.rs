//! Graph serialization and the CSV/JSON output writers.
//!
//! Graph files are plain text: a node section of `# node <id> <role>`
//! lines (roles `white`, `grey`, `black`, `model`) followed by one `u v`
//! line per edge. A JSON sidecar next to a generated graph records how it
//! was produced.

use std::io::{BufRead, Write};

use sispread_core::graph::{GraphError, NodeId, NodeRole, RoleGraph};
use sispread_core::si::SweepRow;

#[derive(Debug, thiserror::Error)]
pub enum GraphIoError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn role_from_str(s: &str) -> Option<NodeRole> {
    match s {
        "white" => Some(NodeRole::White),
        "grey" => Some(NodeRole::Grey),
        "black" => Some(NodeRole::Black),
        "model" => Some(NodeRole::Model),
        _ => None,
    }
}

pub fn write_graph(mut w: impl Write, g: &RoleGraph) -> Result<(), GraphIoError> {
    for (id, role) in g.nodes() {
        writeln!(w, "# node {id} {role}")?;
    }
    for (u, v) in g.edge_ids() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn read_graph(reader: impl BufRead) -> Result<RoleGraph, GraphIoError> {
    let mut nodes: Vec<(NodeId, NodeRole)> = Vec::new();
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let malformed = |msg: String| GraphIoError::Malformed { line: lineno, msg };
        if let Some(rest) = text.strip_prefix('#') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match fields.as_slice() {
                ["node", id, role] => {
                    let id: NodeId =
                        id.parse().map_err(|_| malformed(format!("bad node id `{id}`")))?;
                    let role = role_from_str(role)
                        .ok_or_else(|| malformed(format!("unknown role `{role}`")))?;
                    nodes.push((id, role));
                }
                _ => return Err(malformed("expected `# node <id> <role>`".into())),
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(malformed(format!("edge line needs 2 fields, got {}", fields.len())));
        }
        let u: NodeId =
            fields[0].parse().map_err(|_| malformed(format!("bad node id `{}`", fields[0])))?;
        let v: NodeId =
            fields[1].parse().map_err(|_| malformed(format!("bad node id `{}`", fields[1])))?;
        edges.push((u, v));
    }
    let mut g = RoleGraph::with_nodes(&nodes)?;
    for (u, v) in edges {
        g.add_edge(u, v)?;
    }
    Ok(g)
}

/// Provenance sidecar written next to every generated graph.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Sidecar {
    pub command: String,
    pub model: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
}

pub fn write_sidecar(w: impl Write, sidecar: &Sidecar) -> Result<(), GraphIoError> {
    serde_json::to_writer_pretty(w, sidecar).map_err(std::io::Error::from)?;
    Ok(())
}

/// Formats a float with 9 significant digits; non-finite values and `None`
/// come out as an empty field.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    format!("{x:.8e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub const SWEEP_HEADER: &str = "model,p,avg_k_w,p_inf,dist,tau_w,tau,flag";

pub fn write_sweep_csv(mut w: impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.model,
            fmt_float(r.p),
            fmt_float(r.avg_k_w),
            fmt_float(r.p_inf),
            r.dist,
            fmt_opt(r.tau_w),
            fmt_opt(r.tau),
            r.flag
        )?;
    }
    Ok(())
}

pub const CURVE_HEADER: &str = "t,N_avg,N_p10,N_p90";

/// One spreading-curve point: grid time with mean and 10/90 percentile
/// infected fractions across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub n_avg: f64,
    pub n_p10: f64,
    pub n_p90: f64,
}

pub fn write_curve_csv(mut w: impl Write, points: &[CurvePoint]) -> std::io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_float(p.t),
            fmt_float(p.n_avg),
            fmt_float(p.n_p10),
            fmt_float(p.n_p90)
        )?;
    }
    Ok(())
}

pub fn write_tail_csv(mut w: impl Write, tail: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "x,ccdf")?;
    for &(x, p) in tail {
        writeln!(w, "{},{}", fmt_float(x), fmt_float(p))?;
    }
    Ok(())
}
