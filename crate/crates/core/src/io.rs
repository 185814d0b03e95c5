//! JSON file formats for groups, representations, operators, quantum graphs, pairs and partitions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::Serializer;
use serde_json::{json, Map, Value};

use crate::divisors::Partition;
use crate::error::{Error, Result};
use crate::groups::{
    build_representation, close_group, permutation_representation, regular_representation, sign_representation,
    trivial_representation, PermGroup, Representation, Subgroup,
};
use crate::isospectral::SubgroupPair;
use crate::linalg::{c, CMatrix};
use crate::quantum_graph::{conditions_from_named, Edge, MetricGraph, NamedVertex, VertexConditions, VertexKind};

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub fn load_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| input(format!("missing field \"{key}\"")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| input(format!("{what} must be a non-negative integer")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| input(format!("{what} must be a number")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| input(format!("{what} must be an array")))
}

fn as_object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| input(format!("{what} must be an object")))
}

// ---------------------------------------------------------------- matrices

/// Serializes as `{"rows", "cols", "entries"}`; entries are plain numbers when every
/// imaginary part is zero and `[re, im]` pairs otherwise.
pub fn ser_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut st = s.serialize_struct("Matrix", 3)?;
    st.serialize_field("rows", &m.nrows())?;
    st.serialize_field("cols", &m.ncols())?;
    st.serialize_field("entries", &entries_value(m))?;
    st.end()
}

fn entries_value(m: &CMatrix) -> Value {
    let real = m.iter().all(|z| z.im == 0.0);
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| {
                        let z = m[(i, j)];
                        // -0.0 and 0.0 print differently; normalize for stable output.
                        let (re, im) = (z.re + 0.0, z.im + 0.0);
                        if real {
                            json!(re)
                        } else {
                            json!([re, im])
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_to_value(m: &CMatrix) -> Value {
    json!({"rows": m.nrows(), "cols": m.ncols(), "entries": entries_value(m)})
}

fn parse_entry(v: &Value) -> Result<crate::linalg::C64> {
    match v {
        Value::Number(_) => Ok(c(as_f64(v, "entry")?, 0.0)),
        Value::Array(p) if p.len() == 2 => Ok(c(as_f64(&p[0], "real part")?, as_f64(&p[1], "imaginary part")?)),
        _ => Err(input("matrix entries must be numbers or [re, im] pairs")),
    }
}

/// Accepts `{"rows", "cols", "entries"}` or a bare array of rows.
pub fn parse_matrix(v: &Value) -> Result<CMatrix> {
    let (rows, cols, entries) = match v {
        Value::Array(e) => {
            let cols = e.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
            (e.len(), cols, e)
        }
        _ => (
            as_usize(field(v, "rows")?, "rows")?,
            as_usize(field(v, "cols")?, "cols")?,
            as_array(field(v, "entries")?, "entries")?,
        ),
    };
    if entries.len() != rows {
        return Err(input(format!("expected {rows} rows, found {}", entries.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, r) in entries.iter().enumerate() {
        let r = as_array(r, "matrix row")?;
        if r.len() != cols {
            return Err(input(format!("row {i} has {} entries, expected {cols}", r.len())));
        }
        for (j, z) in r.iter().enumerate() {
            m[(i, j)] = parse_entry(z)?;
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------- groups

/// `{"degree": p, "generators": {"name": [images]}}`; generator order follows the file.
pub fn parse_group(v: &Value) -> Result<Arc<PermGroup>> {
    let degree = as_usize(field(v, "degree")?, "degree")?;
    let gens = as_object(field(v, "generators")?, "generators")?;
    let mut list = Vec::with_capacity(gens.len());
    for (name, p) in gens {
        let p: Vec<usize> = as_array(p, "permutation")?
            .iter()
            .map(|x| as_usize(x, "permutation image"))
            .collect::<Result<_>>()?;
        list.push((name.clone(), p));
    }
    close_group(degree, list)
}

pub fn group_to_value(g: &PermGroup) -> Value {
    let mut gens = Map::new();
    for (n, p) in g.generator_names().iter().zip(g.generators()) {
        gens.insert(n.clone(), json!(p));
    }
    json!({"degree": g.degree(), "generators": gens})
}

pub fn representation_to_value(rep: &Representation) -> Value {
    let g = rep.group();
    let mut images = Map::new();
    for (s, name) in g.generator_names().iter().enumerate() {
        images.insert(name.clone(), matrix_to_value(rep.matrix(g.generator_element(s))));
    }
    json!({"label": rep.label(), "degree": rep.degree(), "images": images})
}

/// Generator words of `h` over the parent's generator names.
pub fn subgroup_to_value(h: &Subgroup) -> Value {
    let parent = h.parent();
    let names = parent.generator_names();
    let words: Vec<Vec<&str>> = h
        .group()
        .generators()
        .iter()
        .map(|p| {
            let g = parent.index_of(p).expect("subgroup generator lies in the parent");
            parent.word(g).iter().map(|&s| names[s].as_str()).collect()
        })
        .collect();
    json!({"generator_words": words})
}

/// Built-in selectors `trivial`, `sign:<g1,g2>`, `regular`, `permutation`, or an
/// object `{"degree": r, "images": {"gen": matrix}}`.
pub fn parse_representation(v: &Value, group: &Arc<PermGroup>) -> Result<Representation> {
    if let Some(s) = v.as_str() {
        return builtin_representation(s, group)?.ok_or_else(|| input(format!("unknown representation selector \"{s}\"")));
    }
    let degree = as_usize(field(v, "degree")?, "degree")?;
    let images = as_object(field(v, "images")?, "images")?;
    let mut list = Vec::with_capacity(images.len());
    for (name, m) in images {
        list.push((name.clone(), parse_matrix(m)?));
    }
    let rep = build_representation(group, degree, &list)?;
    Ok(match v.get("label").and_then(|l| l.as_str()) {
        Some(l) => rep.with_label(l),
        None => rep,
    })
}

fn builtin_representation(s: &str, group: &Arc<PermGroup>) -> Result<Option<Representation>> {
    Ok(Some(match s {
        "trivial" => trivial_representation(group),
        "regular" => regular_representation(group),
        "permutation" => permutation_representation(group),
        _ => match s.strip_prefix("sign:") {
            Some(list) => {
                let names: Vec<&str> = list.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
                sign_representation(group, &names)?
            }
            None => return Ok(None),
        },
    }))
}

/// A list of representations: either an array of entries or `{"irreps": [...]}`.
pub fn parse_representation_list(v: &Value, group: &Arc<PermGroup>) -> Result<Vec<Representation>> {
    let items = match v.get("irreps") {
        Some(list) => as_array(list, "irreps")?,
        None => as_array(v, "representation list")?,
    };
    items.iter().map(|r| parse_representation(r, group)).collect()
}

/// `{"generator_words": [["a", "b"], ...]}`; a word may also be a space-separated string.
pub fn parse_subgroup(v: &Value, parent: &Arc<PermGroup>) -> Result<Subgroup> {
    let words = as_array(field(v, "generator_words")?, "generator_words")?;
    let words: Vec<Vec<String>> = words
        .iter()
        .map(|w| match w {
            Value::String(s) => Ok(s.split_whitespace().map(String::from).collect()),
            _ => as_array(w, "word")?
                .iter()
                .map(|x| x.as_str().map(String::from).ok_or_else(|| input("word letters must be strings")))
                .collect(),
        })
        .collect::<Result<_>>()?;
    Subgroup::from_words(parent, &words)
}

fn resolve<'a>(v: &'a Value, base: Option<&Path>, holder: &'a mut Option<Value>) -> Result<&'a Value> {
    match (v.as_str(), base) {
        (Some(s), Some(dir)) => {
            let p: PathBuf = dir.join(s);
            *holder = Some(load_json(&p)?);
            Ok(holder.as_ref().unwrap())
        }
        _ => Ok(v),
    }
}

/// `{"H1", "H2", "sigma1", "sigma2"}`. Entries are inline objects or paths relative to `base`;
/// σ entries may also be built-in selectors, which are evaluated on the subgroup.
pub fn parse_pair(v: &Value, parent: &Arc<PermGroup>, base: Option<&Path>) -> Result<SubgroupPair> {
    let mut h = Vec::new();
    for key in ["H1", "H2"] {
        let mut holder = None;
        h.push(parse_subgroup(resolve(field(v, key)?, base, &mut holder)?, parent)?);
    }
    let mut sigma = Vec::new();
    for (key, sub) in ["sigma1", "sigma2"].iter().zip(&h) {
        let raw = v.get(*key).cloned().unwrap_or(Value::String("trivial".into()));
        let rep = match raw.as_str().map(|s| builtin_representation(s, sub.group())) {
            Some(Ok(Some(rep))) => rep,
            Some(Err(e)) => return Err(e),
            _ => {
                let mut holder = None;
                parse_representation(resolve(&raw, base, &mut holder)?, sub.group())?
            }
        };
        sigma.push(rep);
    }
    let s2 = sigma.pop().unwrap();
    let s1 = sigma.pop().unwrap();
    let h2 = h.pop().unwrap();
    let h1 = h.pop().unwrap();
    SubgroupPair::new(h1, h2, s1, s2)
}

pub fn parse_partition(v: &Value, n: usize) -> Result<Partition> {
    let blocks = as_array(field(v, "blocks")?, "blocks")?
        .iter()
        .map(|b| as_array(b, "block")?.iter().map(|x| as_usize(x, "block index")).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Partition::new(n, blocks)
}

// ---------------------------------------------------------------- quantum graphs

/// `{"edges": [{"id", "len", "potential"}], "conditions": {"named": [...]} | {"A", "B"}}`.
pub fn parse_quantum_graph(v: &Value) -> Result<(MetricGraph, VertexConditions)> {
    let edges = as_array(field(v, "edges")?, "edges")?
        .iter()
        .map(|e| {
            Ok(Edge {
                id: field(e, "id")?.as_str().ok_or_else(|| input("edge id must be a string"))?.to_string(),
                length: as_f64(field(e, "len")?, "len")?,
                potential: e.get("potential").map_or(Ok(0.0), |p| as_f64(p, "potential"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = MetricGraph::new(edges)?;
    let cond = field(v, "conditions")?;
    let conditions = if let Some(named) = cond.get("named") {
        let vertices = parse_named_vertices(named, &graph)?;
        conditions_from_named(&graph, &vertices)?
    } else {
        VertexConditions::new(parse_matrix(field(cond, "A")?)?, parse_matrix(field(cond, "B")?)?)?
    };
    Ok((graph, conditions))
}

fn parse_named_vertices(v: &Value, graph: &MetricGraph) -> Result<Vec<NamedVertex>> {
    as_array(v, "named")?
        .iter()
        .map(|vx| {
            let kind = match field(vx, "type")?.as_str() {
                Some("neumann") => VertexKind::Neumann,
                Some("dirichlet") => VertexKind::Dirichlet,
                _ => return Err(input("vertex type must be \"neumann\" or \"dirichlet\"")),
            };
            let slots = as_array(field(vx, "slots")?, "slots")?
                .iter()
                .map(|s| {
                    let s = as_array(s, "slot")?;
                    if s.len() != 2 {
                        return Err(input("slot must be [edgeId, end]"));
                    }
                    let id = s[0].as_str().ok_or_else(|| input("slot edge id must be a string"))?;
                    let e = graph.edge_index(id).ok_or_else(|| input(format!("unknown edge {id}")))?;
                    Ok((e, as_usize(&s[1], "slot end")?))
                })
                .collect::<Result<_>>()?;
            Ok(NamedVertex { kind, slots })
        })
        .collect()
}

pub fn quantum_graph_to_value(graph: &MetricGraph, cond: &VertexConditions) -> Value {
    let edges: Vec<Value> =
        graph.edges().iter().map(|e| json!({"id": e.id, "len": e.length, "potential": e.potential})).collect();
    json!({"edges": edges, "conditions": conditions_to_value(cond)})
}

pub fn conditions_to_value(cond: &VertexConditions) -> Value {
    json!({"A": matrix_to_value(&cond.a), "B": matrix_to_value(&cond.b)})
}

/// Edge action `{"generators": {"r": [image ids in edge order] | {"id": "image"}}}`.
/// An image `"~id"` marks a direction-reversing map, which the edge-permutation model rejects.
pub fn parse_edge_symmetry(v: &Value, graph: &MetricGraph) -> Result<Arc<PermGroup>> {
    let gens = as_object(field(v, "generators")?, "generators")?;
    let ids: Vec<&str> = graph.edges().iter().map(|e| e.id.as_str()).collect();
    let mut list = Vec::with_capacity(gens.len());
    for (name, images) in gens {
        let pairs: Vec<(&str, &str)> = match images {
            Value::Array(a) => {
                if a.len() != ids.len() {
                    return Err(input(format!("generator {name} lists {} images for {} edges", a.len(), ids.len())));
                }
                ids.iter()
                    .zip(a)
                    .map(|(&e, t)| Ok((e, t.as_str().ok_or_else(|| input("edge image must be a string"))?)))
                    .collect::<Result<_>>()?
            }
            Value::Object(m) => m
                .iter()
                .map(|(e, t)| Ok((e.as_str(), t.as_str().ok_or_else(|| input("edge image must be a string"))?)))
                .collect::<Result<_>>()?,
            _ => return Err(input(format!("generator {name} must be an array or object"))),
        };
        let mut perm = vec![usize::MAX; ids.len()];
        for (e, t) in pairs {
            if let Some(target) = t.strip_prefix('~') {
                return Err(if target == e {
                    Error::ReversalEdge { edge: e.to_string() }
                } else {
                    Error::ReversedImage { edge: e.to_string(), target: target.to_string() }
                });
            }
            let ei = graph.edge_index(e).ok_or_else(|| input(format!("unknown edge {e}")))?;
            let ti = graph.edge_index(t).ok_or_else(|| input(format!("unknown edge {t}")))?;
            perm[ei] = ti;
        }
        if let Some(e) = perm.iter().position(|&x| x == usize::MAX) {
            return Err(input(format!("generator {name} has no image for edge {}", ids[e])));
        }
        list.push((name.clone(), perm));
    }
    close_group(ids.len(), list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real_matrix};

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| c(i as f64 - 0.5, j as f64 * 0.25));
        let back = parse_matrix(&matrix_to_value(&m)).unwrap();
        assert_eq!(back, m);
        let r = real_matrix(2, 2, &[1., -0.0, 2.5, 3.]);
        let v = matrix_to_value(&r);
        assert_eq!(v["entries"], json!([[1.0, 0.0], [2.5, 3.0]]));
        assert_eq!(parse_matrix(&json!([[1, 2], [3, 4]])).unwrap(), real_matrix(2, 2, &[1., 2., 3., 4.]));
        assert!(parse_matrix(&json!({"rows": 2, "cols": 1, "entries": [[1]]})).is_err());
    }

    #[test]
    fn group_and_reps() {
        let g = parse_group(&json!({"degree": 3, "generators": {"c": [1, 2, 0], "f": [0, 2, 1]}})).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.generator_names(), &["c".to_string(), "f".to_string()]);
        assert_eq!(parse_group(&group_to_value(&g)).unwrap().order(), 6);
        let sgn = parse_representation(&json!("sign:f"), &g).unwrap();
        assert_eq!(sgn.degree(), 1);
        assert_eq!(parse_representation(&json!("regular"), &g).unwrap().degree(), 6);
        assert!(parse_representation(&json!("nonsense"), &g).is_err());
        let w = (2.0 * std::f64::consts::PI / 3.0).sin_cos();
        let rep = parse_representation(
            &json!({"degree": 2, "images": {
                "c": [[w.1, -w.0], [w.0, w.1]],
                "f": {"rows": 2, "cols": 2, "entries": [[1, 0], [0, -1]]}
            }}),
            &g,
        )
        .unwrap();
        assert_eq!(rep.degree(), 2);
        let bad = parse_representation(&json!({"degree": 1, "images": {"c": [[-1]], "f": [[1]]}}), &g);
        assert!(bad.is_err());
    }

    #[test]
    fn subgroups_and_partitions() {
        let g = parse_group(&json!({"degree": 3, "generators": {"c": [1, 2, 0], "f": [0, 2, 1]}})).unwrap();
        let h = parse_subgroup(&json!({"generator_words": [["c"]]}), &g).unwrap();
        assert_eq!(h.order(), 3);
        let h = parse_subgroup(&json!({"generator_words": ["c f"]}), &g).unwrap();
        assert_eq!(h.order(), 2);
        let pair = parse_pair(&json!({"H1": {"generator_words": [["f"]]}, "H2": {"generator_words": [["c", "f"]]}}), &g, None).unwrap();
        assert_eq!(pair.sigma1.degree(), 1);
        assert_eq!(parse_partition(&json!({"blocks": [[0, 2], [1]]}), 3).unwrap().blocks().len(), 2);
        assert!(matches!(parse_partition(&json!({"blocks": [[0]]}), 3), Err(Error::BadPartition(_))));
    }

    #[test]
    fn quantum_graph_files() {
        let v = json!({
            "edges": [{"id": "a", "len": 1.0}, {"id": "b", "len": 1.0, "potential": 0.0}],
            "conditions": {"named": [
                {"type": "neumann", "slots": [["a", 0], ["b", 0]]},
                {"type": "dirichlet", "slots": [["a", 1]]},
                {"type": "dirichlet", "slots": [["b", 1]]}
            ]}
        });
        let (g, cond) = parse_quantum_graph(&v).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(cond.is_self_adjoint());
        let v2 = json!({"edges": v["edges"].clone(), "conditions": conditions_to_value(&cond)});
        let (_, cond2) = parse_quantum_graph(&v2).unwrap();
        assert!(max_abs_diff(&cond.a, &cond2.a) == 0.0 && max_abs_diff(&cond.b, &cond2.b) == 0.0);
        let sym = parse_edge_symmetry(&json!({"generators": {"r": ["b", "a"]}}), &g).unwrap();
        assert_eq!(sym.order(), 2);
        let sym = parse_edge_symmetry(&json!({"generators": {"r": {"a": "b", "b": "a"}}}), &g).unwrap();
        assert_eq!(sym.order(), 2);
        assert!(matches!(
            parse_edge_symmetry(&json!({"generators": {"r": ["~a", "b"]}}), &g),
            Err(Error::ReversalEdge { .. })
        ));
        assert!(matches!(
            parse_edge_symmetry(&json!({"generators": {"r": ["~b", "~a"]}}), &g),
            Err(Error::ReversedImage { .. })
        ));
    }
}
