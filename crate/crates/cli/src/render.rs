//! Text and SVG pictures of a landscape under a plan.

use std::fmt::Write;

use wildfire_lbbd::firedyn::{FireDynamics, InterdictionPlan};
use wildfire_lbbd::netgraph::{NodeId, UNREACHABLE};
use wildfire_lbbd::Instance;

const CELL: f64 = 36.0;

/// What each node looks like in a picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Ignition,
    /// Hosts a resource.
    Interdicted,
    Unprotected,
    Safe,
}

pub fn mark(
    instance: &Instance,
    plan: &InterdictionPlan,
    dynamics: &FireDynamics,
    n: NodeId,
) -> Mark {
    if instance.is_ignition(n) {
        Mark::Ignition
    } else if plan.hosts(n) {
        Mark::Interdicted
    } else if dynamics.is_unprotected(n) {
        Mark::Unprotected
    } else {
        Mark::Safe
    }
}

fn arrival_label(d: i64) -> String {
    if d == UNREACHABLE {
        "-".to_string()
    } else {
        d.to_string()
    }
}

/// Rows, columns and the `(row, col)` of every node.
type Cells<'a> = (u32, u32, &'a [(u32, u32)]);

/// Places each node in a grid cell, or `None` for non-grid instances.
fn cells(instance: &Instance) -> Option<Cells<'_>> {
    let (rows, cols) = instance.grid_shape()?;
    Some((rows, cols, instance.labels()?))
}

/// Terminal picture: one cell per grid node showing its arrival time.
/// `[..]` marks a resource, `*` an unprotected node, `F` an ignition.
/// Non-grid instances get an adjacency listing instead.
pub fn text(instance: &Instance, plan: &InterdictionPlan, dynamics: &FireDynamics) -> String {
    let Some((rows, cols, labels)) = cells(instance) else {
        return adjacency(instance, plan, dynamics);
    };
    let mut grid = vec![vec![None; cols as usize]; rows as usize];
    for (n, &(r, c)) in labels.iter().enumerate() {
        grid[r as usize][c as usize] = Some(n);
    }
    let width = (0..instance.node_count())
        .map(|n| arrival_label(dynamics.arrival(n)).len())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for row in &grid {
        for cell in row {
            let s = match *cell {
                None => format!(" {:>width$} ", ""),
                Some(n) => {
                    let d = arrival_label(dynamics.arrival(n));
                    match mark(instance, plan, dynamics, n) {
                        Mark::Ignition => format!(" {:>width$} ", "F"),
                        Mark::Interdicted => format!("[{d:>width$}]"),
                        Mark::Unprotected => format!(" {d:>width$}*"),
                        Mark::Safe => format!(" {d:>width$} "),
                    }
                }
            };
            out.push_str(&s);
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{} unprotected, {} resources; [t] resource, * unprotected, F ignition",
        dynamics.unprotected().len(),
        plan.len()
    );
    out
}

fn adjacency(instance: &Instance, plan: &InterdictionPlan, dynamics: &FireDynamics) -> String {
    let mut out = String::new();
    for n in 0..instance.node_count() {
        let status = match mark(instance, plan, dynamics, n) {
            Mark::Ignition => "ignition".to_string(),
            Mark::Interdicted => {
                let t: Vec<String> = plan
                    .placements()
                    .filter(|p| p.node == n)
                    .map(|p| p.time.to_string())
                    .collect();
                format!("resource@{}", t.join(","))
            }
            Mark::Unprotected => "unprotected".to_string(),
            Mark::Safe => "safe".to_string(),
        };
        let _ = write!(
            out,
            "{n} d={} {status} ->",
            arrival_label(dynamics.arrival(n))
        );
        for (_, a) in instance.network().out_arcs(n) {
            let _ = write!(out, " {}({})", a.head, a.weight);
        }
        out.push('\n');
    }
    out
}

/// SVG picture of a grid instance: cells coloured by status, arrival
/// labels, and the tree arcs along which fire reaches unprotected nodes.
pub fn svg(
    instance: &Instance,
    plan: &InterdictionPlan,
    dynamics: &FireDynamics,
) -> Option<String> {
    let (rows, cols, labels) = cells(instance)?;
    let (w, h) = (f64::from(cols) * CELL, f64::from(rows) * CELL);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="monospace" font-size="11">"#
    );
    out.push_str(
        r##"<defs><marker id="tip" viewBox="0 0 6 6" refX="5" refY="3" markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#7a1f00"/></marker></defs>
"##,
    );
    let centre = |n: NodeId| {
        let (r, c) = labels[n];
        ((f64::from(c) + 0.5) * CELL, (f64::from(r) + 0.5) * CELL)
    };
    for n in 0..instance.node_count() {
        let (r, c) = labels[n];
        let (fill, stroke, sw) = match mark(instance, plan, dynamics, n) {
            Mark::Ignition => ("#d62728", "#888", 1.0),
            Mark::Interdicted => ("#9ecae1", "#08519c", 3.0),
            Mark::Unprotected => ("#fdae6b", "#888", 1.0),
            Mark::Safe => ("#ffffff", "#888", 1.0),
        };
        let _ = writeln!(
            out,
            r#"<rect class="node" data-node="{n}" x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="{stroke}" stroke-width="{sw}"/>"#,
            f64::from(c) * CELL,
            f64::from(r) * CELL
        );
    }
    let tree = dynamics.tree();
    for &n in dynamics.unprotected() {
        let Some(p) = tree.pred_node(n) else { continue };
        if p >= instance.node_count() {
            continue;
        }
        let ((x1, y1), (x2, y2)) = (centre(p), centre(n));
        let (dx, dy) = ((x2 - x1) * 0.3, (y2 - y1) * 0.3);
        let _ = writeln!(
            out,
            r##"<line class="binding" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#7a1f00" stroke-width="1.5" marker-end="url(#tip)"/>"##,
            x1 + dx,
            y1 + dy,
            x2 - dx,
            y2 - dy
        );
    }
    for n in 0..instance.node_count() {
        let (x, y) = centre(n);
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            y + 4.0,
            arrival_label(dynamics.arrival(n))
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}
