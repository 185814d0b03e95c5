//! Writes the catalog examples as JSON fixture files.
//!
//! Usage: `cargo run -p symq --example write_fixtures -- <dir>`

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use symq::catalog::{self, Example};
use symq::groups::orbits;
use symq::io::{group_to_value, matrix_to_value, quantum_graph_to_value, representation_to_value, subgroup_to_value};
use symq::linalg::{cr, real_matrix};
use symq::quantum_graph::conditions_from_named;

fn write(dir: &Path, name: &str, v: &Value) {
    fs::create_dir_all(dir).unwrap();
    let text = serde_json::to_string_pretty(v).unwrap();
    fs::write(dir.join(name), text + "\n").unwrap();
}

fn write_example(dir: &Path, ex: &Example) {
    write(dir, "group.json", &group_to_value(&ex.group));
    write(dir, "operator.json", &matrix_to_value(&ex.operator));
    let irreps: Vec<Value> = ex.irreps.iter().map(representation_to_value).collect();
    write(dir, "irreps.json", &json!({ "irreps": irreps }));
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));

    let line = catalog::line_graph();
    write_example(&root.join("line"), &line);

    let hex = catalog::hexagon();
    write_example(&root.join("hexagon"), &hex);
    write(&root.join("hexagon"), "rho.json", &representation_to_value(&hex.irreps[2]));

    let s4 = catalog::s4_graph();
    let dir = root.join("s4");
    write_example(&dir, &s4);
    write(&dir, "standard.json", &representation_to_value(&s4.irreps[1]));
    write(&dir, "adjacency.json", &matrix_to_value(&catalog::s4_adjacency()));
    write(&dir, "partition.json", &json!({ "blocks": orbits(&s4.group).orbits }));
    let mut corrupted = s4.operator.clone();
    corrupted[(0, 4)] += cr(0.5);
    write(&dir, "corrupted.json", &matrix_to_value(&corrupted));

    write_example(&root.join("disappearing"), &catalog::disappearing_edges());
    write_example(&root.join("directed"), &catalog::directed());
    write_example(&root.join("q8"), &catalog::quaternion_graph(1.0, 2.0, 3.0, 5.0));

    let dir = root.join("star");
    let (graph, vertices) = catalog::star_graph([1.0, 1.0, 1.0]);
    let cond = conditions_from_named(&graph, &vertices).unwrap();
    let mut star = quantum_graph_to_value(&graph, &cond);
    let named: Vec<Value> = vertices
        .iter()
        .map(|v| {
            let slots: Vec<Value> = v.slots.iter().map(|&(e, end)| json!([graph.edges()[e].id, end])).collect();
            json!({"type": "neumann", "slots": slots})
        })
        .collect();
    star["conditions"] = json!({ "named": named });
    write(&dir, "graph.json", &star);
    write(&dir, "symmetry.json", &json!({"generators": {"r": ["e1", "e3", "e2"]}}));
    write(&dir, "irreps.json", &json!({"irreps": ["trivial", "sign:r"]}));

    let single = json!({
        "edges": [{"id": "e", "len": 1.0, "potential": 0.0}],
        "conditions": {"named": [
            {"type": "neumann", "slots": [["e", 0]]},
            {"type": "neumann", "slots": [["e", 1]]}
        ]}
    });
    write(&root.join("single_edge"), "graph.json", &single);

    let dir = root.join("affine");
    let aff = catalog::affine_z8();
    write(&dir, "group.json", &group_to_value(&aff.group));
    write(&dir, "operator.json", &matrix_to_value(&aff.operator));
    write(
        &dir,
        "pair.json",
        &json!({
            "H1": subgroup_to_value(&aff.h1),
            "H2": subgroup_to_value(&aff.h2),
            "sigma1": "trivial",
            "sigma2": "trivial"
        }),
    );
    write(&dir, "trivial_pair.json", &json!({"H1": subgroup_to_value(&aff.h1), "H2": subgroup_to_value(&aff.h1)}));

    let diag = real_matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.5, 0.0, 0.0, 0.0, -1.0]);
    write(&root.join("misc"), "diag.json", &matrix_to_value(&diag));
}
