//! Metric graphs with (A|B) vertex conditions: symmetry checks, quotient
//! graphs, bond scattering matrices and secular spectra.
//!
//! Trace slot `2e` is the start of edge `e` (x = 0) and slot `2e + 1` its end
//! (x = l_e). Neumann traces carry the sign −1 at the end slot.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{same_group, PermGroup, Representation};
use crate::linalg::{
    c, cr, eig, identity, kron, max_abs, max_abs_diff, multiset_distance, orthonormal_nullspace,
    rank, solve, CMatrix, C64,
};
use crate::quotient::{orbit_adapted_basis, KernelBasis};

const SYMMETRY_TOL: f64 = 1e-9;
const ROOT_WIDTH: f64 = 1e-12;
const ROOT_CLUSTER: f64 = 1e-7;
const MAX_SUBDIVISION: u32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub id: String,
    pub length: f64,
    pub potential: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricGraph {
    edges: Vec<Edge>,
}

impl MetricGraph {
    pub fn new(edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &edges {
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::Input(format!("edge {} has non-positive length {}", e.id, e.length)));
            }
            if !seen.insert(e.id.clone()) {
                return Err(Error::Input(format!("duplicate edge id {}", e.id)));
            }
        }
        Ok(MetricGraph { edges })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().fold(0.0, |m, e| m.max(e.length))
    }

    /// L̂ = diag(l_e) ⊗ I₂.
    pub fn length_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2 * self.edges.len(),
            self.edges.iter().flat_map(|e| [cr(e.length), cr(e.length)]),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Neumann,
    Dirichlet,
}

/// A vertex given by its kind and the (edge index, end) slots meeting there.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedVertex {
    pub kind: VertexKind,
    pub slots: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexConditions {
    pub a: CMatrix,
    pub b: CMatrix,
}

impl VertexConditions {
    pub fn new(a: CMatrix, b: CMatrix) -> Result<Self> {
        if a.shape() != b.shape() || !a.is_square() {
            return Err(Error::BadShape(format!("A is {:?} and B is {:?}", a.shape(), b.shape())));
        }
        Ok(VertexConditions { a, b })
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    /// (A | B).
    pub fn stacked(&self) -> CMatrix {
        let n = self.size();
        let mut m = CMatrix::zeros(n, 2 * n);
        m.columns_mut(0, n).copy_from(&self.a);
        m.columns_mut(n, n).copy_from(&self.b);
        m
    }

    pub fn rank(&self) -> usize {
        rank(&self.stacked())
    }

    /// max |AB* − (AB*)*|.
    pub fn hermitian_defect(&self) -> f64 {
        let ab = &self.a * self.b.adjoint();
        max_abs_diff(&ab, &ab.adjoint())
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.rank() == self.size() && self.hermitian_defect() <= 1e-10
    }

    /// True when AB* = 0, so that S(k) does not depend on k.
    pub fn is_k_independent(&self) -> bool {
        max_abs(&(&self.a * self.b.adjoint())) <= 1e-12 * (1.0 + max_abs(&self.a) * max_abs(&self.b))
    }
}

fn slot(edge: usize, end: usize) -> usize {
    2 * edge + end
}

/// Builds block-diagonal A, B: per Neumann vertex, continuity rows in A followed by
/// the derivative-sum row in B; per Dirichlet vertex, one identity row in A per slot.
pub fn conditions_from_named(graph: &MetricGraph, vertices: &[NamedVertex]) -> Result<VertexConditions> {
    let n = 2 * graph.edge_count();
    let mut used = vec![false; n];
    for v in vertices {
        if v.slots.is_empty() {
            return Err(Error::BadVertexPartition("vertex without slots".into()));
        }
        for &(e, end) in &v.slots {
            if e >= graph.edge_count() || end > 1 {
                return Err(Error::BadVertexPartition(format!("slot ({e}, {end}) does not exist")));
            }
            let s = slot(e, end);
            if used[s] {
                return Err(Error::BadVertexPartition(format!("slot ({}, {end}) used twice", graph.edges()[e].id)));
            }
            used[s] = true;
        }
    }
    if let Some(s) = used.iter().position(|u| !u) {
        return Err(Error::BadVertexPartition(format!("slot ({}, {}) not covered", graph.edges()[s / 2].id, s % 2)));
    }
    let mut a = CMatrix::zeros(n, n);
    let mut b = CMatrix::zeros(n, n);
    let mut row = 0;
    for v in vertices {
        let slots: Vec<usize> = v.slots.iter().map(|&(e, end)| slot(e, end)).collect();
        match v.kind {
            VertexKind::Neumann => {
                for w in slots.windows(2) {
                    a[(row, w[0])] = cr(1.0);
                    a[(row, w[1])] = cr(-1.0);
                    row += 1;
                }
                for &s in &slots {
                    b[(row, s)] = cr(1.0);
                }
                row += 1;
            }
            VertexKind::Dirichlet => {
                for &s in &slots {
                    a[(row, s)] = cr(1.0);
                    row += 1;
                }
            }
        }
    }
    Ok(VertexConditions { a, b })
}

/// π̂(g) = π(g) ⊗ I₂ on trace slots.
pub fn slot_permutation_matrix(perm: &[usize]) -> CMatrix {
    let n = 2 * perm.len();
    let mut m = CMatrix::zeros(n, n);
    for (e, &ge) in perm.iter().enumerate() {
        for t in 0..2 {
            m[(2 * ge + t, 2 * e + t)] = cr(1.0);
        }
    }
    m
}

/// Orthogonal projector onto the solution set {(F, F') : AF + BF' = 0}.
pub fn solution_projector(cond: &VertexConditions) -> CMatrix {
    let k = orthonormal_nullspace(&cond.stacked());
    &k * k.adjoint()
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSymmetryReport {
    pub length_violations: Vec<(String, String)>,
    pub potential_violations: Vec<(String, String)>,
    /// Per generator, max |(π̂ ⊕ π̂) P (π̂ ⊕ π̂)* − P| for the solution projector P.
    pub condition_violation: Vec<(String, f64)>,
    pub pass: bool,
}

fn check_edge_action(graph: &MetricGraph, edge_group: &PermGroup) -> Result<()> {
    if edge_group.degree() != graph.edge_count() {
        return Err(Error::BadShape(format!(
            "edge action has degree {} but the graph has {} edges",
            edge_group.degree(),
            graph.edge_count()
        )));
    }
    Ok(())
}

/// Checks l_{ge} = l_e, V_{ge} = V_e and invariance of the solution set of the vertex conditions.
pub fn check_pi_symmetric(graph: &MetricGraph, edge_group: &PermGroup, cond: &VertexConditions) -> Result<GraphSymmetryReport> {
    check_edge_action(graph, edge_group)?;
    let edges = graph.edges();
    let proj = solution_projector(cond);
    let mut report = GraphSymmetryReport {
        length_violations: vec![],
        potential_violations: vec![],
        condition_violation: vec![],
        pass: true,
    };
    for (name, g) in edge_group.generator_names().iter().zip(edge_group.generators()) {
        for (e, &ge) in g.iter().enumerate() {
            if edges[ge].length != edges[e].length {
                report.length_violations.push((name.clone(), edges[e].id.clone()));
            }
            if edges[ge].potential != edges[e].potential {
                report.potential_violations.push((name.clone(), edges[e].id.clone()));
            }
        }
        let pi = slot_permutation_matrix(g);
        let big = kron(&identity(2), &pi);
        let moved = &big * &proj * big.transpose();
        let v = max_abs_diff(&moved, &proj);
        report.condition_violation.push((name.clone(), v));
    }
    report.pass = report.length_violations.is_empty()
        && report.potential_violations.is_empty()
        && report.condition_violation.iter().all(|(_, v)| *v <= SYMMETRY_TOL);
    Ok(report)
}

/// Ã = (A + iB)⁻¹A, B̃ = (A + iB)⁻¹B.
pub fn symmetrize_conditions(cond: &VertexConditions) -> Result<VertexConditions> {
    let m = &cond.a + &cond.b * c(0.0, 1.0);
    let a = solve(&m, &cond.a).ok_or(Error::SingularAiB)?;
    let b = solve(&m, &cond.b).ok_or(Error::SingularAiB)?;
    Ok(VertexConditions { a, b })
}

fn check_slot_symmetric(m: &CMatrix, edge_group: &PermGroup) -> Result<()> {
    for (name, g) in edge_group.generator_names().iter().zip(edge_group.generators()) {
        let pi = slot_permutation_matrix(g);
        let v = max_abs_diff(&(&pi * m), &(m * &pi));
        if v > SYMMETRY_TOL {
            return Err(Error::NotPiSymmetric { generator: name.clone(), violation: v });
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct QGQuotient {
    pub graph: MetricGraph,
    pub conditions: VertexConditions,
    /// Orbit-adapted basis over edges.
    pub theta: KernelBasis,
    /// Θ̂ = Θ ⊗ I₂.
    pub theta_hat: CMatrix,
}

/// Quotient graph: one edge e_{i,j} per orbit representative i and j < d_i,
/// with A_ρ = Θ̂*(I_r ⊗ Ã)Θ̂ and B_ρ = Θ̂*(I_r ⊗ B̃)Θ̂.
pub fn quotient_graph(
    graph: &MetricGraph,
    edge_group: &Arc<PermGroup>,
    rho: &Representation,
    symmetrized: &VertexConditions,
) -> Result<QGQuotient> {
    check_edge_action(graph, edge_group)?;
    if !same_group(rho.group(), edge_group) {
        return Err(Error::GroupMismatch);
    }
    let report = check_pi_symmetric(graph, edge_group, symmetrized)?;
    if let Some((generator, _)) = report.length_violations.first().or(report.potential_violations.first()) {
        return Err(Error::NotPiSymmetric { generator: generator.clone(), violation: f64::INFINITY });
    }
    if let Some((generator, violation)) = report.condition_violation.iter().find(|(_, v)| *v > SYMMETRY_TOL) {
        return Err(Error::NotPiSymmetric { generator: generator.clone(), violation: *violation });
    }
    check_slot_symmetric(&symmetrized.a, edge_group)?;
    check_slot_symmetric(&symmetrized.b, edge_group)?;
    let theta = orbit_adapted_basis(rho, edge_group)?;
    let theta_hat = kron(&theta.theta, &identity(2));
    let r = rho.degree();
    let a = theta_hat.adjoint() * kron(&identity(r), &symmetrized.a) * &theta_hat;
    let b = theta_hat.adjoint() * kron(&identity(r), &symmetrized.b) * &theta_hat;
    let mut edges = Vec::new();
    for blk in &theta.blocks {
        let e = &graph.edges()[blk.representative];
        for j in 0..blk.dim {
            edges.push(Edge { id: format!("{}.{}", e.id, j + 1), length: e.length, potential: e.potential });
        }
    }
    Ok(QGQuotient { graph: MetricGraph::new(edges)?, conditions: VertexConditions { a, b }, theta, theta_hat })
}

/// S(k) = −J (A + ikB)⁻¹ (A − ikB) with J = I_|E| ⊗ [[0,1],[1,0]].
///
/// For k-independent conditions any k, including 0, is accepted.
pub fn scattering_matrix(cond: &VertexConditions, k: f64) -> Result<CMatrix> {
    let k_eval = if k == 0.0 && cond.is_k_independent() { 1.0 } else { k };
    let ik = c(0.0, k_eval);
    let plus = &cond.a + &cond.b * ik;
    let minus = &cond.a - &cond.b * ik;
    let x = solve(&plus, &minus).ok_or(Error::SingularAikB { k })?;
    let n = cond.size();
    let j = kron(&identity(n / 2), &crate::linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    Ok(-(j * x))
}

/// U(k) = e^{ikL̂} S(k).
pub fn unitary_evolution(graph: &MetricGraph, cond: &VertexConditions, k: f64) -> Result<CMatrix> {
    let s = scattering_matrix(cond, k)?;
    let phases = nalgebra::DVector::from_iterator(
        2 * graph.edge_count(),
        graph.edges().iter().flat_map(|e| {
            let z = C64::from_polar(1.0, k * e.length);
            [z, z]
        }),
    );
    Ok(CMatrix::from_diagonal(&phases) * s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SecularRoot {
    pub k: f64,
    pub multiplicity: usize,
    /// Branch touching 1 without crossing; never raised for k-independent S,
    /// whose eigenphases increase strictly with k.
    pub tangential: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SecularReport {
    pub k_range: (f64, f64),
    pub grid_step: f64,
    pub roots: Vec<SecularRoot>,
}

impl SecularReport {
    /// Roots repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.k, r.multiplicity)).collect()
    }
}

struct PhaseScan<'a> {
    graph: &'a MetricGraph,
    cond: &'a VertexConditions,
    /// Largest forward phase advance per unit k.
    speed: f64,
}

impl PhaseScan<'_> {
    fn phases(&self, k: f64) -> Result<Vec<f64>> {
        let u = unitary_evolution(self.graph, self.cond, k)?;
        let mut ph: Vec<f64> = eig(&u, false)?
            .values
            .iter()
            .map(|z| {
                let t = z.arg();
                if t >= std::f64::consts::PI { t - 2.0 * std::f64::consts::PI } else { t }
            })
            .collect();
        ph.sort_by(f64::total_cmp);
        Ok(ph)
    }

    /// Number of eigenphases passing through 0 between two samples, or `None`
    /// when the forward matching is ambiguous or impossible.
    fn crossings(&self, a: &[f64], b: &[f64], dk: f64) -> Option<usize> {
        use std::f64::consts::PI;
        let n = a.len();
        let reach = self.speed * dk * 1.05 + 1e-9;
        let mut found = None;
        for w in 0..=n {
            // The w smallest phases of b wrapped around past π.
            let lifted: Vec<f64> = b[w..].iter().copied().chain(b[..w].iter().map(|x| x + 2.0 * PI)).collect();
            let ok = a.iter().zip(&lifted).all(|(x, y)| *y >= x - 1e-9 && *y <= x + reach);
            if ok {
                if found.is_some() {
                    return None;
                }
                let before = a.iter().filter(|x| **x < 0.0).count();
                let after = lifted.iter().filter(|x| **x < 0.0).count();
                found = Some(before.checked_sub(after)?);
            }
        }
        found
    }

    /// Crossings on [ka, kb], subdividing until the matching is unambiguous.
    fn interval(&self, ka: f64, pa: &[f64], kb: f64, pb: &[f64], depth: u32) -> Result<Vec<(f64, f64, Vec<f64>, Vec<f64>, usize)>> {
        if let Some(n) = self.crossings(pa, pb, kb - ka) {
            return Ok(vec![(ka, kb, pa.to_vec(), pb.to_vec(), n)]);
        }
        if depth >= MAX_SUBDIVISION {
            return Err(Error::GridTooCoarse { k: ka });
        }
        let mid = 0.5 * (ka + kb);
        let pm = self.phases(mid)?;
        let mut left = self.interval(ka, pa, mid, &pm, depth + 1)?;
        left.extend(self.interval(mid, &pm, kb, pb, depth + 1)?);
        Ok(left)
    }

    /// Bisects until each crossing is isolated to width `ROOT_WIDTH`.
    fn bisect(&self, ka: f64, pa: Vec<f64>, kb: f64, pb: Vec<f64>, count: usize, out: &mut Vec<(f64, usize)>) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        if kb - ka <= ROOT_WIDTH {
            out.push((0.5 * (ka + kb), count));
            return Ok(());
        }
        let mid = 0.5 * (ka + kb);
        if mid <= ka || mid >= kb {
            out.push((mid, count));
            return Ok(());
        }
        let pm = self.phases(mid)?;
        for (a, b, qa, qb, n) in self.interval(ka, &pa, mid, &pm, 0)?.into_iter().chain(self.interval(mid, &pm, kb, &pb, 0)?) {
            self.bisect(a, qa, b, qb, n, out)?;
        }
        Ok(())
    }
}

/// Roots k of det(I − U(k)) = 0 in (k_lo, k_hi], by tracking eigenphases of U(k)
/// on a uniform grid and bisecting every crossing of phase 0.
///
/// `k = 0` is never reported. The default step is 0.01 / max l_e.
pub fn secular_spectrum(
    graph: &MetricGraph,
    cond: &VertexConditions,
    k_lo: f64,
    k_hi: f64,
    step: Option<f64>,
) -> Result<SecularReport> {
    if let Some(e) = graph.edges().iter().find(|e| e.potential != 0.0) {
        return Err(Error::PotentialUnsupported { edge: e.id.clone() });
    }
    if cond.size() != 2 * graph.edge_count() {
        return Err(Error::BadShape("conditions do not match the edge count".into()));
    }
    if !(k_hi > k_lo && k_lo >= 0.0) {
        return Err(Error::Input(format!("invalid k range ({k_lo}, {k_hi}]")));
    }
    let max_l = graph.max_length();
    let dk = step.unwrap_or(0.01 / max_l);
    let n = ((k_hi - k_lo) / dk).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|m| if m == n { k_hi } else { k_lo + m as f64 * dk }).collect();
    let scan = PhaseScan { graph, cond, speed: max_l };
    let phases: Vec<Vec<f64>> = grid.par_iter().map(|&k| scan.phases(k)).collect::<Result<_>>()?;
    let pieces: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut out = Vec::new();
            for (a, b, pa, pb, cnt) in scan.interval(grid[m], &phases[m], grid[m + 1], &phases[m + 1], 0)? {
                scan.bisect(a, pa, b, pb, cnt, &mut out)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut raw: Vec<(f64, usize)> = pieces.into_iter().flatten().filter(|(k, _)| *k > k_lo + 1e-9).collect();
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut roots: Vec<SecularRoot> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for (k, m) in raw {
        match roots.last_mut() {
            Some(last) if k - last.k <= ROOT_CLUSTER => {
                let s = sums.last_mut().unwrap();
                *s += k * m as f64;
                last.multiplicity += m;
                last.k = *s / last.multiplicity as f64;
            }
            _ => {
                sums.push(k * m as f64);
                roots.push(SecularRoot { k, multiplicity: m, tangential: false });
            }
        }
    }
    Ok(SecularReport { k_range: (k_lo, k_hi), grid_step: dk, roots })
}

/// S_ρ(k) = Θ̂*(I_r ⊗ S(k))Θ̂ for a π̂-symmetric S.
pub fn quotient_scattering(s: &CMatrix, rho: &Representation, edge_group: &PermGroup, theta_hat: &CMatrix) -> Result<CMatrix> {
    if !same_group(rho.group(), edge_group) {
        return Err(Error::GroupMismatch);
    }
    check_slot_symmetric(s, edge_group)?;
    Ok(theta_hat.adjoint() * kron(&identity(rho.degree()), s) * theta_hat)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionReport {
    pub graph_roots: Vec<f64>,
    /// Per irrep label: roots of the quotient graph (without the degree repetition).
    pub quotient_roots: Vec<(String, usize, Vec<f64>)>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Secular roots of Γ in (0, k_hi] against ⊎_ρ deg ρ copies of the roots of Γ_ρ.
pub fn verify_secular_union(
    graph: &MetricGraph,
    edge_group: &Arc<PermGroup>,
    cond: &VertexConditions,
    irreps: &[Representation],
    k_hi: f64,
) -> Result<UnionReport> {
    let sym = symmetrize_conditions(cond)?;
    let graph_roots = secular_spectrum(graph, &sym, 0.0, k_hi, None)?.expanded();
    let mut combined = Vec::new();
    let mut quotient_roots = Vec::new();
    for rho in irreps {
        let q = quotient_graph(graph, edge_group, rho, &sym)?;
        let roots = if q.graph.edge_count() == 0 {
            vec![]
        } else {
            secular_spectrum(&q.graph, &q.conditions, 0.0, k_hi, None)?.expanded()
        };
        for &k in &roots {
            for _ in 0..rho.degree() {
                combined.push(cr(k));
            }
        }
        quotient_roots.push((rho.label().to_string(), rho.degree(), roots));
    }
    let full: Vec<C64> = graph_roots.iter().map(|&k| cr(k)).collect();
    let max_deviation = multiset_distance(&full, &combined).unwrap_or(f64::INFINITY);
    Ok(UnionReport { graph_roots, quotient_roots, max_deviation, pass: max_deviation <= ROOT_CLUSTER })
}

/// The invariants that make a quotient graph self-adjoint.
pub fn quotient_invariants(q: &QGQuotient) -> (usize, f64) {
    (q.conditions.rank(), q.conditions.hermitian_defect())
}

pub fn is_unitary_within(m: &CMatrix, tol: f64) -> bool {
    crate::linalg::unitary_defect(m) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groups::{sign_representation, trivial_representation};
    use crate::linalg::real_matrix;

    fn single_edge() -> (MetricGraph, VertexConditions) {
        let g = MetricGraph::new(vec![Edge { id: "e".into(), length: 1.0, potential: 0.0 }]).unwrap();
        let v = |end| NamedVertex { kind: VertexKind::Neumann, slots: vec![(0, end)] };
        let cond = conditions_from_named(&g, &[v(0), v(1)]).unwrap();
        (g, cond)
    }

    #[test]
    fn single_neumann_edge() {
        let (g, cond) = single_edge();
        assert_eq!(cond.a, CMatrix::zeros(2, 2));
        assert_eq!(cond.b, identity(2));
        let sym = symmetrize_conditions(&cond).unwrap();
        assert!(max_abs(&sym.a) < 1e-15);
        assert!(max_abs_diff(&sym.b, &(identity(2) * c(0.0, -1.0))) < 1e-15);
        let s = scattering_matrix(&cond, 2.0).unwrap();
        assert!(max_abs_diff(&s, &real_matrix(2, 2, &[0., 1., 1., 0.])) < 1e-14);
        let roots = secular_spectrum(&g, &cond, 0.0, 10.0, None).unwrap();
        let ks: Vec<f64> = roots.roots.iter().map(|r| r.k).collect();
        assert_eq!(ks.len(), 3);
        for (n, k) in ks.iter().enumerate() {
            assert!((k - (n + 1) as f64 * std::f64::consts::PI).abs() < 1e-9);
        }
        assert!(roots.roots.iter().all(|r| r.multiplicity == 1 && !r.tangential));
    }

    #[test]
    fn degree_two_vertex_is_c1() {
        let g = MetricGraph::new(vec![
            Edge { id: "a".into(), length: 1.0, potential: 0.0 },
            Edge { id: "b".into(), length: 2.0, potential: 0.0 },
        ])
        .unwrap();
        let cond = conditions_from_named(
            &g,
            &[
                NamedVertex { kind: VertexKind::Dirichlet, slots: vec![(0, 0)] },
                NamedVertex { kind: VertexKind::Neumann, slots: vec![(0, 1), (1, 0)] },
                NamedVertex { kind: VertexKind::Dirichlet, slots: vec![(1, 1)] },
            ],
        )
        .unwrap();
        assert!(cond.is_self_adjoint());
        // Rows 1 and 2 constrain slots 1 and 2: two of the four traces are free.
        let local = {
            let mut m = CMatrix::zeros(2, 4);
            for (r, row) in [1usize, 2].iter().enumerate() {
                m[(r, 0)] = cond.a[(*row, 1)];
                m[(r, 1)] = cond.a[(*row, 2)];
                m[(r, 2)] = cond.b[(*row, 1)];
                m[(r, 3)] = cond.b[(*row, 2)];
            }
            m
        };
        assert_eq!(orthonormal_nullspace(&local).ncols(), 2);
    }

    #[test]
    fn bad_partitions_rejected() {
        let (g, _) = single_edge();
        let v = |slots| NamedVertex { kind: VertexKind::Neumann, slots };
        assert!(matches!(conditions_from_named(&g, &[v(vec![(0, 0)])]), Err(Error::BadVertexPartition(_))));
        assert!(matches!(
            conditions_from_named(&g, &[v(vec![(0, 0), (0, 1)]), v(vec![(0, 1)])]),
            Err(Error::BadVertexPartition(_))
        ));
    }

    #[test]
    fn star_symmetry_checks() {
        let (g, vertices) = catalog::star_graph([1.0, 1.0, 1.0]);
        let cond = conditions_from_named(&g, &vertices).unwrap();
        let group = catalog::star_symmetry();
        assert!(check_pi_symmetric(&g, &group, &cond).unwrap().pass);
        let sym = symmetrize_conditions(&cond).unwrap();
        assert!(check_pi_symmetric(&g, &group, &sym).unwrap().pass);
        assert!(max_abs_diff(&(&sym.a + &sym.b * c(0.0, 1.0)), &identity(6)) < 1e-12);
        assert!(max_abs_diff(&solution_projector(&sym), &solution_projector(&cond)) < 1e-10);
        let (g2, _) = catalog::star_graph([1.0, 1.0, 2.0]);
        let rep = check_pi_symmetric(&g2, &group, &cond).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.length_violations.len(), 2);
    }

    #[test]
    fn trivial_group_quotient_graph_is_original() {
        let (g, vertices) = catalog::star_graph([1.0, 2.0, 3.0]);
        let cond = symmetrize_conditions(&conditions_from_named(&g, &vertices).unwrap()).unwrap();
        let group = PermGroup::trivial(3);
        let q = quotient_graph(&g, &group, &trivial_representation(&group), &cond).unwrap();
        assert!(max_abs_diff(&q.conditions.a, &cond.a) < 1e-14);
        assert!(max_abs_diff(&q.conditions.b, &cond.b) < 1e-14);
        let s = scattering_matrix(&cond, 1.0).unwrap();
        let sq = quotient_scattering(&s, &trivial_representation(&group), &group, &q.theta_hat).unwrap();
        assert!(max_abs_diff(&sq, &s) < 1e-14);
    }

    #[test]
    fn evolution_at_special_points() {
        let (g, vertices) = catalog::star_graph([1.0, 1.0, 1.0]);
        let cond = symmetrize_conditions(&conditions_from_named(&g, &vertices).unwrap()).unwrap();
        let s = scattering_matrix(&cond, 0.0).unwrap();
        assert!(max_abs_diff(&unitary_evolution(&g, &cond, 0.0).unwrap(), &s) < 1e-14);
        let u = unitary_evolution(&g, &cond, std::f64::consts::PI).unwrap();
        assert!(max_abs_diff(&u, &(-&s)) < 1e-12);
        assert!(is_unitary_within(&u, 1e-9));
    }

    #[test]
    fn nonzero_potential_is_rejected_for_secular_scan() {
        let g = MetricGraph::new(vec![Edge { id: "e".into(), length: 1.0, potential: 0.5 }]).unwrap();
        let (_, cond) = single_edge();
        assert!(matches!(secular_spectrum(&g, &cond, 0.0, 1.0, None), Err(Error::PotentialUnsupported { .. })));
    }

    #[test]
    fn equilateral_star_has_half_integer_modes() {
        let (g, vertices) = catalog::star_graph([1.0, 1.0, 1.0]);
        let cond = conditions_from_named(&g, &vertices).unwrap();
        let roots = secular_spectrum(&g, &cond, 0.0, 7.0, None).unwrap().roots;
        let pi = std::f64::consts::PI;
        let half = roots.iter().find(|r| (r.k - pi / 2.0).abs() < 1e-9).unwrap();
        assert_eq!(half.multiplicity, 2);
        let full = roots.iter().find(|r| (r.k - pi).abs() < 1e-9).unwrap();
        assert_eq!(full.multiplicity, 1);
        // Brute force: smallest singular value of I − U(k) vanishes at the roots only.
        let smin = |k: f64| {
            let u = unitary_evolution(&g, &cond, k).unwrap();
            *crate::linalg::singular_values(&(identity(6) - u)).last().unwrap()
        };
        assert!(smin(pi / 2.0) < 1e-12 && smin(1.0) > 1e-3);
    }

    #[test]
    fn sign_quotient_of_star() {
        let (g, vertices) = catalog::star_graph([1.0, 1.0, 1.0]);
        let group = catalog::star_symmetry();
        let cond = symmetrize_conditions(&conditions_from_named(&g, &vertices).unwrap()).unwrap();
        let sgn = sign_representation(&group, &["r"]).unwrap();
        let q = quotient_graph(&g, &group, &sgn, &cond).unwrap();
        assert_eq!(q.graph.edge_count(), 1);
        let (rank, defect) = quotient_invariants(&q);
        assert_eq!(rank, 2);
        assert!(defect < 1e-10);
    }
}
