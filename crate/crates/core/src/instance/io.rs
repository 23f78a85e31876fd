//! Canonical instance files.
//!
//! An instance file is a JSON object whose keys always appear in this
//! order:
//!
//! | key              | value                                              |
//! |------------------|----------------------------------------------------|
//! | `schema_version` | integer, currently `1`                             |
//! | `id`             | string                                             |
//! | `nodes`          | number of nodes                                    |
//! | `arcs`           | `[tail, head, weight]` triples, sorted, one per line |
//! | `ignitions`      | sorted node ids                                    |
//! | `psi`            | arrival-time target in minutes                     |
//! | `delta`          | delay per resource in minutes                      |
//! | `periods`        | strictly increasing times in `[0, psi)`            |
//! | `capacity`       | resources per period                               |
//! | `labels`         | optional `[row, col]` per node                     |
//! | `generator`      | optional grid parameters the file was built from   |
//!
//! The document ends with a single newline. Writing the same instance
//! twice yields identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{invalid, GridSpec, Instance, InstanceError};
use crate::netgraph::{Arc, Network, NodeId, Time};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema_version: u32,
    id: String,
    nodes: usize,
    arcs: Vec<(NodeId, NodeId, Time)>,
    ignitions: Vec<NodeId>,
    psi: Time,
    delta: Time,
    periods: Vec<Time>,
    capacity: Vec<u32>,
    #[serde(default)]
    labels: Option<Vec<(u32, u32)>>,
    #[serde(default)]
    generator: Option<GridSpec>,
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("instance fields always serialize")
}

/// Serializes `instance` in canonical form.
pub fn to_canonical_string(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"schema_version\": {SCHEMA_VERSION},");
    let _ = writeln!(out, "  \"id\": {},", json(instance.id()));
    let _ = writeln!(out, "  \"nodes\": {},", instance.node_count());
    let arcs = instance.network().arcs();
    if arcs.is_empty() {
        let _ = writeln!(out, "  \"arcs\": [],");
    } else {
        let _ = writeln!(out, "  \"arcs\": [");
        for (i, a) in arcs.iter().enumerate() {
            let sep = if i + 1 == arcs.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}, {}, {}]{sep}", a.tail, a.head, a.weight);
        }
        let _ = writeln!(out, "  ],");
    }
    let _ = write!(out, "  \"ignitions\": {},\n  \"psi\": {},\n  \"delta\": {},\n  \"periods\": {},\n  \"capacity\": {}",
        json(instance.ignitions()),
        instance.psi(),
        instance.delta(),
        json(instance.periods()),
        json(instance.capacity()),
    );
    if let Some(labels) = instance.labels() {
        let _ = write!(out, ",\n  \"labels\": {}", json(labels));
    }
    if let Some(spec) = instance.generator() {
        let _ = write!(out, ",\n  \"generator\": {}", json(spec));
    }
    out.push_str("\n}\n");
    out
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    std::fs::write(path, to_canonical_string(instance))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    load_str(&std::fs::read_to_string(path)?)
}

/// Parses and validates an instance document. Errors name the offending
/// field, e.g. `arcs[3]` or `periods[1]`.
pub fn load_str(text: &str) -> Result<Instance, InstanceError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile =
        serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(invalid(
            "schema_version",
            format!("unsupported version {}", file.schema_version),
        ));
    }
    for (i, &(tail, head, weight)) in file.arcs.iter().enumerate() {
        if tail >= file.nodes || head >= file.nodes {
            return Err(invalid(format!("arcs[{i}]"), "node id out of range"));
        }
        if tail == head {
            return Err(invalid(format!("arcs[{i}]"), "self-loop"));
        }
        if weight <= 0 {
            return Err(invalid(
                format!("arcs[{i}]"),
                format!("weight must be positive, got {weight}"),
            ));
        }
    }
    if file.periods.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("periods", "must be strictly increasing"));
    }
    if file.capacity.len() != file.periods.len() {
        return Err(invalid("capacity", "one entry per period is required"));
    }
    let arcs = file
        .arcs
        .iter()
        .map(|&(t, h, w)| Arc::new(t, h, w))
        .collect();
    let network = Network::new(file.nodes, arcs)?;
    let schedule = file
        .periods
        .iter()
        .copied()
        .zip(file.capacity.iter().copied())
        .collect();
    let mut instance = Instance::new(
        file.id,
        network,
        file.ignitions,
        file.psi,
        file.delta,
        schedule,
    )?;
    if let Some(labels) = file.labels {
        instance = instance.with_labels(labels)?;
    }
    if let Some(spec) = file.generator {
        spec.validate().map_err(|e| match e {
            InstanceError::Invalid { field, message } => InstanceError::Invalid {
                field: format!("generator.{field}"),
                message,
            },
            other => other,
        })?;
        instance = instance.with_generator(spec);
    }
    Ok(instance)
}
