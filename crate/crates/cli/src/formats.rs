//! On-disk formats for graphs, networks, fields, and walk estimates.
//!
//! All vertex labels in files are 1-based; the in-memory types are 0-based.
//! Floating point values are written with 17 significant digits so reading
//! a file back reproduces the exact bits. Writes go through a temp file and
//! rename, so a crashed run never leaves a half-written artifact.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use volta_core::walk::HittingEstimate;
use volta_core::{Graph, Network, PotentialField};

/// Writes `bytes` to `path` atomically (same-directory temp plus rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .with_context(|| format!("bad output path {}", path.display()))?;
    let tmp = match dir {
        Some(d) => d.join(format!(".{file_name}.tmp")),
        None => Path::new(&format!(".{file_name}.tmp")).to_path_buf(),
    };
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("moving {} into place", tmp.display()))?;
    Ok(())
}

/// `graph.txt`: a header line `n m`, then one `u v` line per edge in
/// canonical order.
pub fn render_graph(graph: &Graph) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", graph.vertex_count(), graph.edge_count()));
    for &(u, v) in graph.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

pub fn write_graph(path: &Path, graph: &Graph) -> Result<()> {
    atomic_write(path, render_graph(graph).as_bytes())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_header(line: Option<&str>) -> Result<(usize, usize)> {
    let line = line.context("empty file")?;
    let mut parts = line.split_whitespace();
    let n = parts.next().context("missing vertex count")?.parse()?;
    let m = parts.next().context("missing edge count")?.parse()?;
    if parts.next().is_some() {
        bail!("trailing tokens in header line");
    }
    Ok((n, m))
}

fn parse_endpoint(token: Option<&str>, n: usize, line_no: usize) -> Result<usize> {
    let raw: usize = token
        .with_context(|| format!("line {line_no}: missing endpoint"))?
        .parse()
        .with_context(|| format!("line {line_no}: bad endpoint"))?;
    if raw == 0 || raw > n {
        bail!("line {line_no}: vertex {raw} outside 1..={n}");
    }
    Ok(raw - 1)
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text.lines();
    let (n, m) = parse_header(lines.next())?;
    let mut edges = Vec::with_capacity(m);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let mut parts = line.split_whitespace();
        let u = parse_endpoint(parts.next(), n, line_no)?;
        let v = parse_endpoint(parts.next(), n, line_no)?;
        if parts.next().is_some() {
            bail!("line {line_no}: trailing tokens");
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        bail!("header promises {m} edges, file has {}", edges.len());
    }
    Ok(Graph::new(n, edges)?)
}

/// `net.txt`: like the graph format with a conductance as a third column.
pub fn render_network(net: &Network) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", net.vertex_count(), net.graph().edge_count()));
    for (&(u, v), &c) in net.graph().edges().iter().zip(net.conductances()) {
        out.push_str(&format!("{} {} {:.16e}\n", u + 1, v + 1, c));
    }
    out
}

pub fn write_network(path: &Path, net: &Network) -> Result<()> {
    atomic_write(path, render_network(net).as_bytes())
}

pub fn read_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_network(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut lines = text.lines();
    let (n, m) = parse_header(lines.next())?;
    let mut edges = Vec::with_capacity(m);
    let mut conductance = Vec::with_capacity(m);
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let mut parts = line.split_whitespace();
        let u = parse_endpoint(parts.next(), n, line_no)?;
        let v = parse_endpoint(parts.next(), n, line_no)?;
        let c: f64 = parts
            .next()
            .with_context(|| format!("line {line_no}: missing conductance"))?
            .parse()
            .with_context(|| format!("line {line_no}: bad conductance"))?;
        if parts.next().is_some() {
            bail!("line {line_no}: trailing tokens");
        }
        edges.push((u, v));
        conductance.push(c);
    }
    if edges.len() != m {
        bail!("header promises {m} edges, file has {}", edges.len());
    }
    // Network::from_parts expects conductances in canonical edge order, so
    // carry the values through the same sort.
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let canonical: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
        .collect();
    order.sort_by_key(|&i| canonical[i]);
    let sorted_edges: Vec<(usize, usize)> = order.iter().map(|&i| edges[i]).collect();
    let sorted_conductance: Vec<f64> = order.iter().map(|&i| conductance[i]).collect();
    Ok(Network::from_parts(Graph::new(n, sorted_edges)?, sorted_conductance)?)
}

/// `field.csv`: `vertex,potential,defined`, one row per vertex. Undefined
/// vertices get an empty potential cell.
pub fn render_field(field: &PotentialField) -> String {
    let mut out = String::from("vertex,potential,defined\n");
    for v in 0..field.values.len() {
        if field.defined[v] {
            out.push_str(&format!("{},{:.16e},true\n", v + 1, field.values[v]));
        } else {
            out.push_str(&format!("{},,false\n", v + 1));
        }
    }
    out
}

pub fn write_field(path: &Path, field: &PotentialField) -> Result<()> {
    atomic_write(path, render_field(field).as_bytes())
}

pub fn read_field(path: &Path) -> Result<PotentialField> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_field(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_field(text: &str) -> Result<PotentialField> {
    let mut lines = text.lines();
    match lines.next() {
        Some("vertex,potential,defined") => {}
        other => bail!("unexpected field header {other:?}"),
    }
    let mut values = Vec::new();
    let mut defined = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            bail!("line {line_no}: expected 3 cells, got {}", cells.len());
        }
        let vertex: usize = cells[0]
            .parse()
            .with_context(|| format!("line {line_no}: bad vertex"))?;
        if vertex != values.len() + 1 {
            bail!("line {line_no}: vertex {vertex} out of order");
        }
        match cells[2] {
            "true" => {
                let p: f64 = cells[1]
                    .parse()
                    .with_context(|| format!("line {line_no}: bad potential"))?;
                values.push(p);
                defined.push(true);
            }
            "false" => {
                if !cells[1].is_empty() {
                    bail!("line {line_no}: undefined vertex carries a potential");
                }
                values.push(f64::NAN);
                defined.push(false);
            }
            other => bail!("line {line_no}: bad defined flag {other:?}"),
        }
    }
    Ok(PotentialField { values, defined, residual_norm: 0.0, iterations: 0 })
}

/// `estimates.csv`: per-vertex walk estimates,
/// `vertex,estimate,std_error,walks`.
pub fn render_estimates(est: &HittingEstimate) -> String {
    let mut out = String::from("vertex,estimate,std_error,walks\n");
    for v in 0..est.defined.len() {
        if est.defined[v] {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                v + 1,
                est.potential_estimate(v),
                est.potential_std_error(v),
                est.walks_per_vertex
            ));
        } else {
            out.push_str(&format!("{},,,{}\n", v + 1, est.walks_per_vertex));
        }
    }
    out
}

pub fn write_estimates(path: &Path, est: &HittingEstimate) -> Result<()> {
    atomic_write(path, render_estimates(est).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use volta_core::generate::{generate, GenSpec};
    use volta_core::network::ConductanceScheme;
    use volta_core::solver::solve;
    use volta_core::BoundaryCondition;

    fn sample_network() -> Network {
        let g = generate(&GenSpec::gnp(25, 0.25, 3)).unwrap();
        Network::assign(g, &ConductanceScheme::power_law(5)).unwrap()
    }

    #[test]
    fn graph_round_trip() {
        let g = generate(&GenSpec::small_world(30, 0.1, 1)).unwrap();
        let parsed = parse_graph(&render_graph(&g)).unwrap();
        assert_eq!(parsed.edges(), g.edges());
        assert_eq!(parsed.vertex_count(), 30);
    }

    #[test]
    fn network_round_trip_is_bit_exact() {
        let net = sample_network();
        let parsed = parse_network(&render_network(&net)).unwrap();
        assert_eq!(parsed.graph().edges(), net.graph().edges());
        assert_eq!(parsed.conductances(), net.conductances());
    }

    #[test]
    fn field_round_trip_preserves_undefined() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (3, 4)]).unwrap();
        let net = Network::from_parts(g, vec![1.0, 0.5, 2.0]).unwrap();
        let bc = BoundaryCondition::new(vec![(0, 1.0), (2, 0.0)]).unwrap();
        let field = solve(&net, &bc, 1e-12, 10_000).unwrap();
        let parsed = parse_field(&render_field(&field)).unwrap();
        assert_eq!(parsed.defined, field.defined);
        for v in 0..5 {
            if field.defined[v] {
                assert_eq!(parsed.values[v].to_bits(), field.values[v].to_bits());
            } else {
                assert!(parsed.values[v].is_nan());
            }
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("3 1\n1 4\n").is_err()); // endpoint out of range
        assert!(parse_graph("3 2\n1 2\n").is_err()); // edge count mismatch
        assert!(parse_graph("3 1\n1 0\n").is_err()); // labels are 1-based
        assert!(parse_network("2 1\n1 2 -1.0\n").is_err()); // negative conductance
        assert!(parse_field("vertex,potential\n").is_err()); // wrong header
        assert!(parse_field("vertex,potential,defined\n2,0.5,true\n").is_err()); // gap
    }

    #[test]
    fn network_parser_restores_canonical_order() {
        // rows deliberately shuffled and reversed; parser must re-sort and
        // keep conductances attached to their edges
        let text = "4 3\n3 2 2.0e0\n1 2 1.0e0\n4 1 3.0e0\n";
        let net = parse_network(text).unwrap();
        assert_eq!(net.graph().edges(), &[(0, 1), (0, 3), (1, 2)]);
        assert_eq!(net.conductances(), &[1.0, 3.0, 2.0]);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
