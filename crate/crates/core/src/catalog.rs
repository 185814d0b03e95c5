//! Constructors for the standard worked examples: small graphs with their
//! symmetry groups and complete irrep lists.

use std::sync::Arc;

use crate::groups::{
    build_representation, close_group, sign_representation, trivial_representation, Perm, PermGroup,
    Representation, Subgroup,
};
use crate::linalg::{c, cr, real_matrix, CMatrix};
use crate::quantum_graph::{Edge, MetricGraph, NamedVertex, VertexKind};

/// An operator together with its symmetry group and a complete list of irreps.
#[derive(Clone, Debug)]
pub struct Example {
    pub group: Arc<PermGroup>,
    pub operator: CMatrix,
    pub irreps: Vec<Representation>,
}

fn weighted_graph(n: usize, diagonal: &[f64], edges: &[(usize, usize, f64)]) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for (i, &d) in diagonal.iter().enumerate() {
        m[(i, i)] = cr(d);
    }
    for &(i, j, w) in edges {
        m[(i, j)] += cr(w);
        m[(j, i)] += cr(w);
    }
    m
}

fn named(name: &str, p: Perm) -> (String, Perm) {
    (name.to_string(), p)
}

fn mat(n: usize, entries: &[f64]) -> CMatrix {
    real_matrix(n, n, entries)
}

/// Path on five vertices (indices 0..4) with its reflection `r`; irreps `[trivial, sign]`.
pub fn line_graph() -> Example {
    let group = close_group(5, vec![named("r", vec![4, 3, 2, 1, 0])]).unwrap();
    let operator = weighted_graph(
        5,
        &[1.0, 2.0, 2.0, 2.0, 1.0],
        &[(0, 1, -1.0), (1, 2, -1.0), (2, 3, -1.0), (3, 4, -1.0)],
    );
    let irreps = vec![trivial_representation(&group), sign_representation(&group, &["r"]).unwrap()];
    Example { group, operator, irreps }
}

/// Hexagon with alternating bond weights `a`, `b`, potential `v`, and the D3 action
/// generated by `s` (rotation by two sites) and `r1`; irreps `[trivial, sign, two-dimensional]`.
pub fn hexagon_with(v: f64, a: f64, b: f64) -> Example {
    let group = close_group(
        6,
        vec![named("s", vec![2, 3, 4, 5, 0, 1]), named("r1", vec![1, 0, 5, 4, 3, 2])],
    )
    .unwrap();
    let operator = weighted_graph(
        6,
        &[v; 6],
        &[(0, 1, a), (1, 2, b), (2, 3, a), (3, 4, b), (4, 5, a), (5, 0, b)],
    );
    let w = 2.0 * std::f64::consts::PI / 3.0;
    let rot = mat(2, &[w.cos(), -w.sin(), w.sin(), w.cos()]);
    let refl = mat(2, &[0.0, 1.0, 1.0, 0.0]);
    let two = build_representation(&group, 2, &[("s".into(), rot), ("r1".into(), refl)])
        .unwrap()
        .with_label("two-dimensional");
    let irreps = vec![
        trivial_representation(&group),
        sign_representation(&group, &["r1"]).unwrap(),
        two,
    ];
    Example { group, operator, irreps }
}

pub fn hexagon() -> Example {
    hexagon_with(3.0, -1.0, -2.0)
}

/// Ordered pairs `(i, j)`, `i != j`, of `0..4` in lexicographic order.
fn ordered_pairs() -> Vec<(usize, usize)> {
    (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))).collect()
}

/// S4 acting on 16 vertices: points 0..3 and ordered pairs 4..15.
/// Edges join point `i` to pair `(i, j)` (weight `a`) and `(i, j)` to `(j, i)` (weight `b`).
/// Irreps `[trivial, standard, standard x sign, sign, two-dimensional]`.
pub fn s4_graph_with(v_point: f64, v_pair: f64, a: f64, b: f64) -> Example {
    let pairs = ordered_pairs();
    let pair_index = |i: usize, j: usize| 4 + pairs.iter().position(|&p| p == (i, j)).unwrap();
    let swap = |x: usize, y: usize| -> Perm {
        let t = |k: usize| if k == x { y } else if k == y { x } else { k };
        let mut p: Perm = (0..4).map(t).collect();
        p.extend(pairs.iter().map(|&(i, j)| pair_index(t(i), t(j))));
        p
    };
    let group = close_group(
        16,
        vec![named("t12", swap(0, 1)), named("t23", swap(1, 2)), named("t34", swap(2, 3))],
    )
    .unwrap();
    let mut diagonal = vec![v_point; 4];
    diagonal.extend([v_pair; 12]);
    let mut edges = Vec::new();
    for &(i, j) in &pairs {
        edges.push((i, pair_index(i, j), a));
        if i < j {
            edges.push((pair_index(i, j), pair_index(j, i), b));
        }
    }
    let operator = weighted_graph(16, &diagonal, &edges);
    let standard = [
        mat(3, &[0., -1., 0., -1., 0., 0., 0., 0., 1.]),
        mat(3, &[0., 0., 1., 0., 1., 0., 1., 0., 0.]),
        mat(3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]),
    ];
    let names = ["t12", "t23", "t34"];
    let images = |ms: &[CMatrix]| -> Vec<(String, CMatrix)> {
        names.iter().zip(ms).map(|(n, m)| (n.to_string(), m.clone())).collect()
    };
    let std_rep = build_representation(&group, 3, &images(&standard)).unwrap().with_label("standard");
    let negated: Vec<CMatrix> = standard.iter().map(|m| -m).collect();
    let tilde = build_representation(&group, 3, &images(&negated)).unwrap().with_label("standard x sign");
    let s3 = 3f64.sqrt() / 2.0;
    let diag = mat(2, &[1.0, 0.0, 0.0, -1.0]);
    let two = [diag.clone(), mat(2, &[-0.5, s3, s3, 0.5]), diag];
    let two = build_representation(&group, 2, &images(&two)).unwrap().with_label("two-dimensional");
    let irreps = vec![
        trivial_representation(&group),
        std_rep,
        tilde,
        sign_representation(&group, &names).unwrap().with_label("sign"),
        two,
    ];
    Example { group, operator, irreps }
}

/// Graph Laplacian instance: `V = 3` on points, `V = 2` on pairs, `a = b = -1`.
pub fn s4_graph() -> Example {
    s4_graph_with(3.0, 2.0, -1.0, -1.0)
}

/// Adjacency matrix of the S4 graph (unit weights, zero diagonal).
pub fn s4_adjacency() -> CMatrix {
    s4_graph_with(0.0, 0.0, 1.0, 1.0).operator
}

/// Six-vertex Laplacian with the reflection `r`: 0<->3, 1<->4, 2<->5; irreps `[trivial, sign]`.
pub fn disappearing_edges() -> Example {
    let group = close_group(6, vec![named("r", vec![3, 4, 5, 0, 1, 2])]).unwrap();
    let edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 4), (1, 3), (1, 4)];
    let mut degree = [0.0; 6];
    for &(i, j) in &edges {
        degree[i] += 1.0;
        degree[j] += 1.0;
    }
    let weighted: Vec<_> = edges.iter().map(|&(i, j)| (i, j, -1.0)).collect();
    let operator = weighted_graph(6, &degree, &weighted);
    let irreps = vec![trivial_representation(&group), sign_representation(&group, &["r"]).unwrap()];
    Example { group, operator, irreps }
}

/// Non-symmetric 4x4 operator with a Jordan block, symmetric under swapping 2 and 3.
pub fn directed() -> Example {
    let group = close_group(4, vec![named("r", vec![0, 1, 3, 2])]).unwrap();
    let operator = mat(4, &[2., 1., 0., 0., 1., 2., 0., 0., 0., 1., 1., 0., 0., 1., 0., 1.]);
    let irreps = vec![trivial_representation(&group), sign_representation(&group, &["r"]).unwrap()];
    Example { group, operator, irreps }
}

/// Unit quaternions indexed 0..8 as 1, i, j, k, -1, -i, -j, -k.
fn quaternion_mul(x: usize, y: usize) -> usize {
    // Products of the basis units 1, i, j, k as (sign, unit).
    const TABLE: [[(bool, usize); 4]; 4] = [
        [(false, 0), (false, 1), (false, 2), (false, 3)],
        [(false, 1), (true, 0), (false, 3), (true, 2)],
        [(false, 2), (true, 3), (true, 0), (false, 1)],
        [(false, 3), (false, 2), (true, 1), (true, 0)],
    ];
    let (neg, u) = TABLE[x % 4][y % 4];
    let sign = neg ^ (x >= 4) ^ (y >= 4);
    u + if sign { 4 } else { 0 }
}

fn quaternion_inverse(x: usize) -> usize {
    (0..8).find(|&y| quaternion_mul(x, y) == 0).unwrap()
}

/// Twenty-four vertex graph carrying a free Q8 action: group elements 0..7,
/// blue midpoints 8..15 and red midpoints 16..23. The blue edge through
/// midpoint `8 + g` joins `g` (weight `a`) and `g i⁻¹` (weight `b`); the red edge
/// through `16 + g` joins `g` (weight `c`) and `g j⁻¹` (weight `d`).
/// Irreps `[trivial, i -> -1, j -> -1, both -> -1, two-dimensional]`.
pub fn quaternion_graph(a: f64, b: f64, cw: f64, d: f64) -> Example {
    let left = |h: usize| -> Perm {
        (0..24).map(|v| (v / 8) * 8 + quaternion_mul(h, v % 8)).collect()
    };
    let group = close_group(24, vec![named("i", left(1)), named("j", left(2))]).unwrap();
    let i_inv = quaternion_inverse(1);
    let j_inv = quaternion_inverse(2);
    let mut edges = Vec::new();
    for g in 0..8 {
        edges.push((g, 8 + g, a));
        edges.push((8 + g, quaternion_mul(g, i_inv), b));
        edges.push((g, 16 + g, cw));
        edges.push((16 + g, quaternion_mul(g, j_inv), d));
    }
    let operator = weighted_graph(24, &[0.0; 24], &edges);
    let zero = cr(0.0);
    let rho_i = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), zero, zero, c(0.0, -1.0)]);
    let rho_j = mat(2, &[0.0, 1.0, -1.0, 0.0]);
    let two = build_representation(&group, 2, &[("i".into(), rho_i), ("j".into(), rho_j)])
        .unwrap()
        .with_label("two-dimensional");
    let irreps = vec![
        trivial_representation(&group),
        sign_representation(&group, &["i"]).unwrap(),
        sign_representation(&group, &["j"]).unwrap(),
        sign_representation(&group, &["i", "j"]).unwrap(),
        two,
    ];
    Example { group, operator, irreps }
}

/// The affine group of Z8 acting on itself by left multiplication (32 points),
/// with a Hermitian operator built from right multiplication by `t`, `m3`, `m5`.
pub struct AffineExample {
    pub group: Arc<PermGroup>,
    pub operator: CMatrix,
    /// Multiplicative units {x -> ux}.
    pub h1: Subgroup,
    /// {x, 3x + 4, 5x + 4, 7x}.
    pub h2: Subgroup,
}

/// Element `x -> u x + a` of the affine group, as (a, u).
fn affine_index(a: usize, u: usize) -> usize {
    a * 4 + [1, 3, 5, 7].iter().position(|&v| v == u).unwrap()
}

fn affine_parts(k: usize) -> (usize, usize) {
    (k / 4, [1, 3, 5, 7][k % 4])
}

fn affine_mul(x: usize, y: usize) -> usize {
    // (a, u)(b, v): z -> u (v z + b) + a
    let ((a, u), (b, v)) = (affine_parts(x), affine_parts(y));
    affine_index((u * b + a) % 8, (u * v) % 8)
}

pub fn affine_z8() -> AffineExample {
    let left = |h: usize| -> Perm { (0..32).map(|x| affine_mul(h, x)).collect() };
    let t = affine_index(1, 1);
    let m3 = affine_index(0, 3);
    let m5 = affine_index(0, 5);
    let group = close_group(32, vec![named("t", left(t)), named("m3", left(m3)), named("m5", left(m5))]).unwrap();
    let t_inv = affine_index(7, 1);
    let mut operator = CMatrix::zeros(32, 32);
    for x in 0..32 {
        for (s, w) in [(t, 1.0), (t_inv, 1.0), (m3, 0.7), (m5, 0.3)] {
            operator[(x, affine_mul(x, s))] += cr(-w);
            operator[(x, x)] += cr(w);
        }
    }
    let word = |a: usize, u: usize| group.index_of(&left(affine_index(a, u))).unwrap();
    let h1 = Subgroup::from_elements(&group, &[word(0, 3), word(0, 5)]).unwrap();
    let h2 = Subgroup::from_elements(&group, &[word(4, 3), word(4, 5)]).unwrap();
    AffineExample { group, operator, h1, h2 }
}

/// Three-edge star with Neumann conditions everywhere; the central vertex
/// joins the starting ends of all edges.
pub fn star_graph(lengths: [f64; 3]) -> (MetricGraph, Vec<NamedVertex>) {
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(k, &len)| Edge { id: format!("e{}", k + 1), length: len, potential: 0.0 })
        .collect();
    let graph = MetricGraph::new(edges).unwrap();
    let vertex = |slots: Vec<(usize, usize)>| NamedVertex { kind: VertexKind::Neumann, slots };
    let vertices = vec![
        vertex(vec![(0, 0), (1, 0), (2, 0)]),
        vertex(vec![(0, 1)]),
        vertex(vec![(1, 1)]),
        vertex(vec![(2, 1)]),
    ];
    (graph, vertices)
}

/// C2 acting on the star's edges by exchanging e2 and e3.
pub fn star_symmetry() -> Arc<PermGroup> {
    close_group(3, vec![named("r", vec![0, 2, 1])]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_hermitian;

    #[test]
    fn quaternion_table_is_a_group() {
        for x in 0..8 {
            for y in 0..8 {
                for z in 0..8 {
                    assert_eq!(quaternion_mul(quaternion_mul(x, y), z), quaternion_mul(x, quaternion_mul(y, z)));
                }
            }
        }
        // i j = k, i^2 = -1
        assert_eq!(quaternion_mul(1, 2), 3);
        assert_eq!(quaternion_mul(1, 1), 4);
    }

    #[test]
    fn operators_commute_with_their_groups() {
        let examples = [line_graph(), hexagon(), s4_graph(), disappearing_edges(), directed(), quaternion_graph(1., 2., 3., 4.)];
        for ex in &examples {
            let pi = crate::groups::permutation_representation(&ex.group);
            for m in pi.matrices() {
                assert_eq!(m * &ex.operator, &ex.operator * m);
            }
        }
        let aff = affine_z8();
        assert_eq!(aff.group.order(), 32);
        assert!(is_hermitian(&aff.operator));
        let pi = crate::groups::permutation_representation(&aff.group);
        for m in pi.matrices() {
            assert!(crate::linalg::max_abs_diff(&(m * &aff.operator), &(&aff.operator * m)) < 1e-12);
        }
        assert_eq!(aff.h1.order(), 4);
        assert_eq!(aff.h2.order(), 4);
    }

    #[test]
    fn s4_graph_is_a_laplacian() {
        let h = s4_graph().operator;
        for i in 0..16 {
            assert!(h.row(i).iter().sum::<crate::linalg::C64>().norm() < 1e-12);
        }
    }
}
