//! Kernel spaces, orbit-adapted bases and quotient operators, with verifiers
//! for their algebraic, spectral and structural properties.
//!
//! The acting permutation representation π is always the natural action of
//! the representation's group on `0..degree`. Vectors of the kernel space live
//! in `C^r ⊗ C^p` with index `a * p + x`.

use std::sync::Arc;

use rand::{rngs::StdRng, Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{
    character_inner_product, induce, orbits, permutation_representation, same_group, stabilizer, OrbitData,
    PermGroup, Representation, Subgroup,
};
use crate::linalg::{
    canonical_basis, cluster_tolerance, conj, cr, eig, identity, is_hermitian, kron, matrix_power, max_abs,
    max_abs_diff, multiset_distance, nullspace_with_tol, rank_with_scale, singular_values, CMatrix, C64, EPS_SPEC, RANK_TOL,
};

/// Tolerances shared by the verifiers.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    pub rank: f64,
    pub spec: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank: RANK_TOL, spec: EPS_SPEC, residual: 1e-9 }
    }
}

const SYMMETRY_TOL: f64 = 1e-9;
const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    Plain,
    OrbitAdapted,
}

/// Per-orbit data of an orbit-adapted basis.
#[derive(Clone, Debug)]
pub struct OrbitBlock {
    pub representative: usize,
    pub orbit: Vec<usize>,
    pub stabilizer_order: usize,
    /// Column offset of Θ_i inside Θ.
    pub offset: usize,
    pub dim: usize,
    /// Orthonormal basis of the stabilizer's fixed points of ρ(g)ᵀ.
    pub phi: CMatrix,
}

#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub theta: CMatrix,
    pub mode: BasisMode,
    pub rep_degree: usize,
    /// Empty in plain mode.
    pub blocks: Vec<OrbitBlock>,
    group: Arc<PermGroup>,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.theta.ncols()
    }

    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    /// Columns belonging to orbit block `k`.
    pub fn theta_block(&self, k: usize) -> CMatrix {
        let b = &self.blocks[k];
        self.theta.columns(b.offset, b.dim).into_owned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockPath {
    General,
    FreeAction,
    FixedPoint,
    TrivialRep,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockIndex {
    pub representative: usize,
    pub offset: usize,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct QuotientResult {
    pub matrix: CMatrix,
    pub block_index: Vec<BlockIndex>,
    pub basis: KernelBasis,
    pub hermitian: bool,
    /// Formula used for every block (i, j), row-major over orbit pairs; empty for the matrix path.
    pub paths: Vec<BlockPath>,
}

impl QuotientResult {
    pub fn dims(&self) -> Vec<usize> {
        self.block_index.iter().map(|b| b.dim).collect()
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let (a, b) = (&self.block_index[i], &self.block_index[j]);
        self.matrix.view((a.offset, b.offset), (a.dim, b.dim)).into_owned()
    }
}

fn ensure_same(rho: &Representation, action: &PermGroup) -> Result<()> {
    if same_group(rho.group(), action) {
        Ok(())
    } else {
        Err(Error::GroupMismatch)
    }
}

/// Fails with `NotPiSymmetric` unless Op_{s a, s b} = Op_{a b} for every generator s.
pub fn check_pi_symmetric(op: &CMatrix, action: &PermGroup) -> Result<()> {
    let p = action.degree();
    if op.shape() != (p, p) {
        return Err(Error::BadShape(format!("operator is {}x{}, action has degree {p}", op.nrows(), op.ncols())));
    }
    for (s, g) in action.generators().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for a in 0..p {
            for b in 0..p {
                worst = worst.max((op[(g[a], g[b])] - op[(a, b)]).norm());
            }
        }
        if worst > SYMMETRY_TOL {
            return Err(Error::NotPiSymmetric { generator: action.generator_names()[s].clone(), violation: worst });
        }
    }
    Ok(())
}

/// Stacked constraints [I_r ⊗ π(g) − ρ(g)ᵀ ⊗ I_p] over the given elements.
fn kernel_constraints(rho: &Representation, elements: &[usize]) -> CMatrix {
    let group = rho.group();
    let (r, p) = (rho.degree(), group.degree());
    let n = r * p;
    let mut m = CMatrix::zeros(n * elements.len(), n);
    for (k, &g) in elements.iter().enumerate() {
        let perm = group.element(g);
        let rt = rho.matrix(g).transpose();
        let base = k * n;
        for a in 0..r {
            for x in 0..p {
                m[(base + a * p + perm[x], a * p + x)] += cr(1.0);
            }
        }
        for a in 0..r {
            for b in 0..r {
                let v = rt[(a, b)];
                if v != cr(0.0) {
                    for x in 0..p {
                        m[(base + a * p + x, b * p + x)] -= v;
                    }
                }
            }
        }
    }
    m
}

fn generator_elements(group: &PermGroup) -> Vec<usize> {
    (0..group.generators().len()).map(|s| group.generator_element(s)).collect()
}

/// Plain orthonormal basis of K_G(ρ, π), canonicalized.
pub fn kernel_space(rho: &Representation, action: &Arc<PermGroup>) -> Result<KernelBasis> {
    kernel_space_with_tol(rho, action, RANK_TOL)
}

pub fn kernel_space_with_tol(rho: &Representation, action: &Arc<PermGroup>, rank_tol: f64) -> Result<KernelBasis> {
    ensure_same(rho, action)?;
    let m = kernel_constraints(rho, &generator_elements(action));
    let theta = nullspace_with_tol(&m, rank_tol);
    Ok(KernelBasis { theta, mode: BasisMode::Plain, rep_degree: rho.degree(), blocks: vec![], group: action.clone() })
}

/// Largest kernel-constraint residual of `theta` over all group elements.
pub fn kernel_residual(rho: &Representation, theta: &CMatrix) -> f64 {
    let all: Vec<usize> = (0..rho.group().order()).collect();
    max_abs(&(kernel_constraints(rho, &all) * theta))
}

/// P = (1/|G|) Σ_g conj(ρ(g)) ⊗ π(g).
pub fn projector(rho: &Representation, action: &Arc<PermGroup>) -> Result<CMatrix> {
    ensure_same(rho, action)?;
    let pi = permutation_representation(action);
    let n = rho.degree() * action.degree();
    let mut p = CMatrix::zeros(n, n);
    for g in 0..action.order() {
        p += kron(&conj(rho.matrix(g)), pi.matrix(g));
    }
    Ok(p / cr(action.order() as f64))
}

/// Orthonormal basis of ∩_{g ∈ H} ker[I_r − ρ(g)ᵀ], assembled over H's generators.
pub fn fixed_point_basis(rho: &Representation, h: &Subgroup) -> Result<CMatrix> {
    fixed_point_basis_with_tol(rho, h, RANK_TOL)
}

fn fixed_point_basis_with_tol(rho: &Representation, h: &Subgroup, rank_tol: f64) -> Result<CMatrix> {
    if !same_group(rho.group(), h.parent()) {
        return Err(Error::NotASubgroup("stabilizer belongs to another group".into()));
    }
    let r = rho.degree();
    let gens: Vec<usize> = generator_elements(h.group()).iter().map(|&k| h.members()[k]).collect();
    if gens.is_empty() {
        return Ok(identity(r));
    }
    let mut m = CMatrix::zeros(r * gens.len(), r);
    for (k, &g) in gens.iter().enumerate() {
        let block = identity(r) - rho.matrix(g).transpose();
        m.view_mut((k * r, 0), (r, r)).copy_from(&block);
    }
    Ok(nullspace_with_tol(&m, rank_tol))
}

struct OrbitLayout {
    data: OrbitData,
    stabilizers: Vec<Subgroup>,
    phis: Vec<CMatrix>,
}

fn orbit_layout(rho: &Representation, action: &Arc<PermGroup>, rank_tol: f64) -> Result<OrbitLayout> {
    let data = orbits(action);
    let stabilizers: Vec<Subgroup> = data.domain.iter().map(|&i| stabilizer(action, i)).collect::<Result<_>>()?;
    let phis = if rho.is_trivial() {
        vec![identity(1); data.domain.len()]
    } else {
        stabilizers.iter().map(|h| fixed_point_basis_with_tol(rho, h, rank_tol)).collect::<Result<_>>()?
    };
    Ok(OrbitLayout { data, stabilizers, phis })
}

fn blocks_from_layout(layout: &OrbitLayout) -> Vec<OrbitBlock> {
    let mut offset = 0;
    layout
        .data
        .domain
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let dim = layout.phis[k].ncols();
            let b = OrbitBlock {
                representative: i,
                orbit: layout.data.orbits[k].clone(),
                stabilizer_order: layout.stabilizers[k].order(),
                offset,
                dim,
                phi: layout.phis[k].clone(),
            };
            offset += dim;
            b
        })
        .collect()
}

/// Θ_i = sqrt(|G|/|G_i|) · P(Φ_i ⊗ e_i), concatenated over the fundamental domain.
pub fn orbit_adapted_basis(rho: &Representation, action: &Arc<PermGroup>) -> Result<KernelBasis> {
    ensure_same(rho, action)?;
    let layout = orbit_layout(rho, action, RANK_TOL)?;
    let blocks = blocks_from_layout(&layout);
    let (r, p) = (rho.degree(), action.degree());
    let d: usize = blocks.iter().map(|b| b.dim).sum();
    let mut theta = CMatrix::zeros(r * p, d);
    let conj_rho: Vec<CMatrix> = rho.matrices().iter().map(conj).collect();
    for b in &blocks {
        let scale = (action.order() as f64 / b.stabilizer_order as f64).sqrt() / action.order() as f64;
        for g in 0..action.order() {
            let target = action.act(g, b.representative);
            let v = &conj_rho[g] * &b.phi;
            for col in 0..b.dim {
                for a in 0..r {
                    theta[(a * p + target, b.offset + col)] += v[(a, col)] * scale;
                }
            }
        }
    }
    Ok(KernelBasis { theta, mode: BasisMode::OrbitAdapted, rep_degree: r, blocks, group: action.clone() })
}

/// (I_r ⊗ Op) Θ without forming the Kronecker product.
fn apply_lifted(op: &CMatrix, theta: &CMatrix, r: usize) -> CMatrix {
    let p = op.nrows();
    let mut out = CMatrix::zeros(theta.nrows(), theta.ncols());
    for a in 0..r {
        let block = op * theta.rows(a * p, p);
        out.rows_mut(a * p, p).copy_from(&block);
    }
    out
}

fn block_index_of(basis: &KernelBasis) -> Vec<BlockIndex> {
    basis
        .blocks
        .iter()
        .map(|b| BlockIndex { representative: b.representative, offset: b.offset, dim: b.dim })
        .collect()
}

/// Op_ρ = Θ* (I_r ⊗ Op) Θ.
pub fn quotient(op: &CMatrix, basis: &KernelBasis) -> Result<QuotientResult> {
    check_pi_symmetric(op, &basis.group)?;
    let matrix = basis.theta.adjoint() * apply_lifted(op, &basis.theta, basis.rep_degree);
    Ok(QuotientResult {
        matrix,
        block_index: block_index_of(basis),
        basis: basis.clone(),
        hermitian: is_hermitian(op),
        paths: vec![],
    })
}

/// Op_ρ = (Θ*Θ)⁻¹ Θ* (I_r ⊗ Op) Θ for a kernel basis Θ whose columns need not be orthonormal.
pub fn quotient_general(op: &CMatrix, action: &PermGroup, rep_degree: usize, theta: &CMatrix) -> Result<CMatrix> {
    check_pi_symmetric(op, action)?;
    let gram = theta.adjoint() * theta;
    let rhs = theta.adjoint() * apply_lifted(op, theta, rep_degree);
    crate::linalg::solve(&gram, &rhs).ok_or_else(|| Error::BadShape("kernel basis columns are dependent".into()))
}

/// Everything needed to evaluate individual blocks of the explicit formula.
pub struct BlockFormula<'a> {
    rho: &'a Representation,
    action: &'a Arc<PermGroup>,
    blocks: Vec<OrbitBlock>,
    conj_rho: Vec<CMatrix>,
    free: bool,
    trivial: bool,
}

impl<'a> BlockFormula<'a> {
    pub fn new(rho: &'a Representation, action: &'a Arc<PermGroup>) -> Result<Self> {
        Self::with_tol(rho, action, RANK_TOL)
    }

    pub fn with_tol(rho: &'a Representation, action: &'a Arc<PermGroup>, rank_tol: f64) -> Result<Self> {
        ensure_same(rho, action)?;
        let layout = orbit_layout(rho, action, rank_tol)?;
        let blocks = blocks_from_layout(&layout);
        let free = blocks.iter().all(|b| b.stabilizer_order == 1);
        let trivial = rho.is_trivial();
        let conj_rho = rho.matrices().iter().map(conj).collect();
        Ok(BlockFormula { rho, action, blocks, conj_rho, free, trivial })
    }

    pub fn blocks(&self) -> &[OrbitBlock] {
        &self.blocks
    }

    /// Op_{g i, j} = 0 whenever g ∉ G_i.
    fn fixed_point_condition(&self, op: &CMatrix, i: usize, j: usize) -> bool {
        let (bi, bj) = (&self.blocks[i], &self.blocks[j]);
        let col = bj.representative;
        bi.orbit.iter().all(|&x| x == bi.representative || op[(x, col)] == cr(0.0))
    }

    pub fn path(&self, op: &CMatrix, i: usize, j: usize) -> BlockPath {
        if self.trivial {
            BlockPath::TrivialRep
        } else if self.free {
            BlockPath::FreeAction
        } else if self.fixed_point_condition(op, i, j) {
            BlockPath::FixedPoint
        } else {
            BlockPath::General
        }
    }

    /// Block (i, j) by the formula for `path`.
    pub fn block_with(&self, op: &CMatrix, i: usize, j: usize, path: BlockPath) -> CMatrix {
        let (bi, bj) = (&self.blocks[i], &self.blocks[j]);
        let (ri, rj) = (bi.representative, bj.representative);
        let norm = 1.0 / ((bi.stabilizer_order * bj.stabilizer_order) as f64).sqrt();
        let g_count = self.action.order();
        match path {
            BlockPath::TrivialRep => {
                let sum = (0..g_count).fold(cr(0.0), |acc, g| acc + op[(ri, self.action.act(g, rj))]);
                CMatrix::from_element(1, 1, sum * norm)
            }
            BlockPath::FreeAction => {
                let r = self.rho.degree();
                let mut out = CMatrix::zeros(r, r);
                for g in 0..g_count {
                    let w = op[(ri, self.action.act(g, rj))];
                    if w != cr(0.0) {
                        out += &self.conj_rho[g] * w;
                    }
                }
                out
            }
            BlockPath::FixedPoint => {
                let ratio = (bi.stabilizer_order as f64 / bj.stabilizer_order as f64).sqrt();
                bi.phi.adjoint() * &bj.phi * (op[(ri, rj)] * ratio)
            }
            BlockPath::General => {
                let r = self.rho.degree();
                let mut acc = CMatrix::zeros(r, r);
                for g in 0..g_count {
                    let w = op[(ri, self.action.act(g, rj))];
                    if w != cr(0.0) {
                        acc += &self.conj_rho[g] * w;
                    }
                }
                bi.phi.adjoint() * acc * &bj.phi * cr(norm)
            }
        }
    }

    pub fn block(&self, op: &CMatrix, i: usize, j: usize) -> CMatrix {
        self.block_with(op, i, j, self.path(op, i, j))
    }

    /// The orbit-adapted basis matching this formula's Φ choices.
    pub fn basis(&self) -> Result<KernelBasis> {
        orbit_adapted_basis(self.rho, self.action)
    }
}

/// Quotient assembled block by block from the explicit formula, using fast paths where they apply.
pub fn quotient_blocks(op: &CMatrix, rho: &Representation, action: &Arc<PermGroup>) -> Result<QuotientResult> {
    quotient_blocks_with_tol(op, rho, action, RANK_TOL)
}

pub fn quotient_blocks_with_tol(
    op: &CMatrix,
    rho: &Representation,
    action: &Arc<PermGroup>,
    rank_tol: f64,
) -> Result<QuotientResult> {
    check_pi_symmetric(op, action)?;
    let formula = BlockFormula::with_tol(rho, action, rank_tol)?;
    let n = formula.blocks.len();
    let d: usize = formula.blocks.iter().map(|b| b.dim).sum();
    let mut matrix = CMatrix::zeros(d, d);
    let mut paths = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (bi, bj) = (&formula.blocks[i], &formula.blocks[j]);
            if bi.dim == 0 || bj.dim == 0 {
                paths.push(formula.path(op, i, j));
                continue;
            }
            let path = formula.path(op, i, j);
            let block = formula.block_with(op, i, j, path);
            matrix.view_mut((bi.offset, bj.offset), (bi.dim, bj.dim)).copy_from(&block);
            paths.push(path);
        }
    }
    let basis = formula.basis()?;
    Ok(QuotientResult { matrix, block_index: block_index_of(&basis), basis, hermitian: is_hermitian(op), paths })
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalReport {
    pub commute_residual: f64,
    pub orthonormal_residual: f64,
    pub pass: bool,
}

/// Checks Θ Op_ρ = (I_r ⊗ Op) Θ and Θ*Θ = I.
pub fn verify_fundamental(op: &CMatrix, basis: &KernelBasis, result: &QuotientResult) -> FundamentalReport {
    verify_fundamental_with(op, basis, result, &Tolerances::default())
}

pub fn verify_fundamental_with(
    op: &CMatrix,
    basis: &KernelBasis,
    result: &QuotientResult,
    tol: &Tolerances,
) -> FundamentalReport {
    let lhs = &basis.theta * &result.matrix;
    let rhs = apply_lifted(op, &basis.theta, basis.rep_degree);
    let commute_residual = max_abs_diff(&lhs, &rhs);
    let orthonormal_residual = max_abs_diff(&(basis.theta.adjoint() * &basis.theta), &identity(basis.dim()));
    FundamentalReport {
        commute_residual,
        orthonormal_residual,
        pass: commute_residual <= tol.residual && orthonormal_residual <= tol.residual,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SourcedEigenvalue {
    pub value: [f64; 2],
    /// Index into the irrep list.
    pub source: usize,
    pub label: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub dims: Vec<usize>,
    pub accounting: Vec<SourcedEigenvalue>,
    pub full_spectrum: Vec<[f64; 2]>,
    pub max_deviation: f64,
    pub pass: bool,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Checks that the irreps are complete and pairwise inequivalent.
pub fn check_irrep_list(irreps: &[Representation], action: &PermGroup) -> Result<()> {
    if irreps.is_empty() {
        return Err(Error::IncompleteIrrepList("empty list".into()));
    }
    for rho in irreps {
        ensure_same(rho, action)?;
    }
    let total: usize = irreps.iter().map(|r| r.degree() * r.degree()).sum();
    if total != action.order() {
        return Err(Error::IncompleteIrrepList(format!("sum of squared degrees {total} differs from |G| = {}", action.order())));
    }
    for (a, ra) in irreps.iter().enumerate() {
        for (b, rb) in irreps.iter().enumerate() {
            let ip = character_inner_product(ra, rb)?;
            let expect = if a == b { 1.0 } else { 0.0 };
            if (ip - cr(expect)).norm() > 1e-8 {
                return Err(Error::IncompleteIrrepList(format!("characters {a} and {b} have inner product {ip}")));
            }
        }
    }
    Ok(())
}

/// spec(Op) = ⊎_ρ deg ρ copies of spec(Op_ρ).
pub fn verify_decomposition(op: &CMatrix, action: &Arc<PermGroup>, irreps: &[Representation]) -> Result<DecompositionReport> {
    verify_decomposition_with(op, action, irreps, &Tolerances::default())
}

pub fn verify_decomposition_with(
    op: &CMatrix,
    action: &Arc<PermGroup>,
    irreps: &[Representation],
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    check_irrep_list(irreps, action)?;
    check_pi_symmetric(op, action)?;
    let herm = is_hermitian(op);
    let full = eig(op, herm)?;
    let mut accounting = Vec::new();
    let mut dims = Vec::new();
    for (k, rho) in irreps.iter().enumerate() {
        let q = quotient_blocks(op, rho, action)?;
        dims.push(q.matrix.nrows());
        for z in eig(&q.matrix, herm)?.values {
            for _ in 0..rho.degree() {
                accounting.push(SourcedEigenvalue { value: pair(z), source: k, label: rho.label().to_string() });
            }
        }
    }
    accounting.sort_by(|a, b| a.value[0].total_cmp(&b.value[0]).then(a.value[1].total_cmp(&b.value[1])));
    let combined: Vec<C64> = accounting.iter().map(|e| C64::new(e.value[0], e.value[1])).collect();
    let tolerance = if herm { tol.spec } else { cluster_tolerance(op, false).max(tol.spec) };
    let max_deviation = multiset_distance(&full.values, &combined).unwrap_or(f64::INFINITY);
    Ok(DecompositionReport {
        dims,
        accounting,
        full_spectrum: full.values.iter().map(|&z| pair(z)).collect(),
        max_deviation,
        pass: max_deviation <= tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub lambda: [f64; 2],
    pub order: u32,
    pub quotient_dim: usize,
    pub kernel_dim: usize,
    pub pass: bool,
}

/// dim E^k_{Op_ρ}(λ) = dim(K_G(ρ,π) ∩ ker(I_r ⊗ (Op − λ)^k)).
pub fn verify_spectral(op: &CMatrix, rho: &Representation, action: &Arc<PermGroup>, lambda: C64, k: u32) -> Result<SpectralReport> {
    verify_spectral_with(op, rho, action, lambda, k, &Tolerances::default())
}

pub fn verify_spectral_with(
    op: &CMatrix,
    rho: &Representation,
    action: &Arc<PermGroup>,
    lambda: C64,
    k: u32,
    tol: &Tolerances,
) -> Result<SpectralReport> {
    let q = quotient_blocks(op, rho, action)?;
    let d = q.matrix.nrows();
    let shifted_q = &q.matrix - identity(d) * lambda;
    // Shifted powers can be nearly zero; measure rank against (‖Op‖ + |λ|)^k.
    let norm = singular_values(op).first().copied().unwrap_or(0.0);
    let scale = (norm + lambda.norm()).max(1.0).powi(k.max(1) as i32);
    let quotient_dim = d - rank_with_scale(&matrix_power(&shifted_q, k.max(1)), tol.rank, scale);
    let p = op.nrows();
    let r = rho.degree();
    let constraints = kernel_constraints(rho, &generator_elements(action));
    let power = matrix_power(&(op - identity(p) * lambda), k.max(1));
    let lifted = kron(&identity(r), &power);
    let mut stacked = CMatrix::zeros(constraints.nrows() + lifted.nrows(), r * p);
    stacked.rows_mut(0, constraints.nrows()).copy_from(&constraints);
    stacked.rows_mut(constraints.nrows(), lifted.nrows()).copy_from(&lifted);
    let kernel_dim = r * p - rank_with_scale(&stacked, tol.rank, scale);
    Ok(SpectralReport { lambda: pair(lambda), order: k, quotient_dim, kernel_dim, pass: quotient_dim == kernel_dim })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    /// Orbit pairs with no connecting entries whose block exceeded the zero tolerance.
    pub nonzero_unconnected: Vec<(usize, usize)>,
    /// Orbit pairs that are connected in Op but whose block vanishes anyway.
    pub zero_despite_connection: Vec<(usize, usize)>,
    /// Largest change of block (i, j) under perturbations outside O_i × O_j.
    pub locality_deviation: f64,
    pub pass: bool,
}

/// Block sparsity follows orbit connectivity, and block (i, j) depends only on Op restricted to O_i × O_j.
pub fn verify_structure(op: &CMatrix, rho: &Representation, action: &Arc<PermGroup>) -> Result<StructureReport> {
    verify_structure_seeded(op, rho, action, 0x51de)
}

pub fn verify_structure_seeded(
    op: &CMatrix,
    rho: &Representation,
    action: &Arc<PermGroup>,
    seed: u64,
) -> Result<StructureReport> {
    check_pi_symmetric(op, action)?;
    let formula = BlockFormula::new(rho, action)?;
    let blocks = formula.blocks();
    let n = blocks.len();
    let p = op.nrows();
    let mut nonzero_unconnected = Vec::new();
    let mut zero_despite_connection = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut locality_deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if blocks[i].dim == 0 || blocks[j].dim == 0 {
                continue;
            }
            let connected = blocks[i]
                .orbit
                .iter()
                .any(|&a| blocks[j].orbit.iter().any(|&b| op[(a, b)] != cr(0.0)));
            let block = formula.block(op, i, j);
            let size = max_abs(&block);
            if !connected && size > STRUCTURE_TOL {
                nonzero_unconnected.push((i, j));
            }
            if connected && size <= STRUCTURE_TOL {
                zero_despite_connection.push((i, j));
            }
            let mut e = CMatrix::from_fn(p, p, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            for &a in &blocks[i].orbit {
                for &b in &blocks[j].orbit {
                    e[(a, b)] = cr(0.0);
                }
            }
            let mut sym = CMatrix::zeros(p, p);
            for g in action.elements() {
                for a in 0..p {
                    for b in 0..p {
                        sym[(g[a], g[b])] += e[(a, b)];
                    }
                }
            }
            let perturbed = op + sym / cr(action.order() as f64);
            let moved = formula.block(&perturbed, i, j);
            locality_deviation = locality_deviation.max(max_abs_diff(&block, &moved));
        }
    }
    Ok(StructureReport {
        pass: nonzero_unconnected.is_empty() && locality_deviation <= STRUCTURE_TOL,
        nonzero_unconnected,
        zero_despite_connection,
        locality_deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionReport {
    pub subgroup_dim: usize,
    pub induced_dim: usize,
    pub subgroup_spectrum: Vec<[f64; 2]>,
    pub induced_spectrum: Vec<[f64; 2]>,
    pub max_deviation: f64,
    /// Both quotients Hermitian with equal spectra.
    pub unitarily_equivalent: bool,
    pub pass: bool,
}

/// Op_σ (under the subgroup's action) has the same spectrum as Op_{Ind σ}.
pub fn verify_induction(op: &CMatrix, action: &Arc<PermGroup>, h: &Subgroup, sigma: &Representation) -> Result<InductionReport> {
    if !same_group(h.parent(), action) {
        return Err(Error::NotASubgroup("subgroup parent differs from the acting group".into()));
    }
    let left = quotient_blocks(op, sigma, h.group())?;
    let ind = induce(sigma, h)?;
    let right = quotient_blocks(op, &ind, action)?;
    let herm = is_hermitian(op);
    let a = eig(&left.matrix, herm)?.values;
    let b = eig(&right.matrix, herm)?.values;
    let tolerance = if herm { EPS_SPEC } else { cluster_tolerance(op, false) };
    let max_deviation = multiset_distance(&a, &b).unwrap_or(f64::INFINITY);
    let pass = max_deviation <= tolerance;
    Ok(InductionReport {
        subgroup_dim: a.len(),
        induced_dim: b.len(),
        subgroup_spectrum: a.iter().map(|&z| pair(z)).collect(),
        induced_spectrum: b.iter().map(|&z| pair(z)).collect(),
        max_deviation,
        unitarily_equivalent: pass && herm,
        pass,
    })
}

/// (1/|G|) Σ_g π(g) M π(g)* for any square M of the action's degree.
pub fn symmetrize(m: &CMatrix, action: &PermGroup) -> CMatrix {
    let p = m.nrows();
    let mut out = CMatrix::zeros(p, p);
    for g in action.elements() {
        for a in 0..p {
            for b in 0..p {
                out[(g[a], g[b])] += m[(a, b)];
            }
        }
    }
    out / cr(action.order() as f64)
}

/// Re-expresses the plain canonical basis of the span of `theta` (used to compare bases).
pub fn canonical_span(theta: &CMatrix) -> CMatrix {
    canonical_basis(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groups::{regular_representation, sign_representation, trivial_representation};
    use crate::linalg::{c, real_matrix};

    fn projector_oracle(theta: &CMatrix) -> CMatrix {
        theta * theta.adjoint()
    }

    #[test]
    fn example_one_kernel_dimensions() {
        let ex = catalog::line_graph();
        assert_eq!(kernel_space(&ex.irreps[0], &ex.group).unwrap().dim(), 3);
        assert_eq!(kernel_space(&ex.irreps[1], &ex.group).unwrap().dim(), 2);
        let s4 = catalog::s4_graph();
        assert_eq!(kernel_space(&s4.irreps[3], &s4.group).unwrap().dim(), 0);
    }

    #[test]
    fn generator_constraints_cover_all_elements() {
        let s4 = catalog::s4_graph();
        for rho in &s4.irreps {
            let k = kernel_space(rho, &s4.group).unwrap();
            assert!(kernel_residual(rho, &k.theta) <= 1e-9);
        }
    }

    #[test]
    fn projector_properties() {
        let triv = PermGroup::trivial(4);
        assert_eq!(projector(&trivial_representation(&triv), &triv).unwrap(), identity(4));
        for ex in [catalog::line_graph(), catalog::hexagon(), catalog::s4_graph()] {
            for rho in &ex.irreps {
                let p = projector(rho, &ex.group).unwrap();
                let k = kernel_space(rho, &ex.group).unwrap();
                assert!(max_abs_diff(&(&p * &p), &p) <= 1e-12);
                assert!(max_abs_diff(&p.adjoint(), &p) <= 1e-12);
                assert!((p.trace().re - k.dim() as f64).abs() <= 1e-10);
                assert!(max_abs_diff(&(&p * &k.theta), &k.theta) <= 1e-10);
                assert!(max_abs_diff(&p, &projector_oracle(&k.theta)) <= 1e-10);
                let lifted = kron(&identity(rho.degree()), &ex.operator);
                assert!(max_abs_diff(&(&p * &lifted), &(&lifted * &p)) <= 1e-12);
            }
        }
    }

    #[test]
    fn s4_fixed_point_bases() {
        let s4 = catalog::s4_graph();
        let rho = &s4.irreps[1];
        let g_point = stabilizer(&s4.group, 0).unwrap();
        let phi = fixed_point_basis(rho, &g_point).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert!(max_abs_diff(&phi, &real_matrix(3, 1, &[t, t, t])) < 1e-12);
        let g_pair = stabilizer(&s4.group, 4).unwrap();
        let phi = fixed_point_basis(rho, &g_pair).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(max_abs_diff(&phi, &real_matrix(3, 2, &[h, 0.0, h, 0.0, 0.0, 1.0])) < 1e-12);
        let free = Subgroup::from_elements(&s4.group, &[]).unwrap();
        assert_eq!(fixed_point_basis(rho, &free).unwrap(), identity(3));
    }

    #[test]
    fn orbit_adapted_dims_and_orthogonality() {
        let s4 = catalog::s4_graph();
        let expected = [vec![1, 1], vec![1, 2], vec![0, 1], vec![0, 0], vec![0, 1]];
        for (rho, want) in s4.irreps.iter().zip(expected) {
            let basis = orbit_adapted_basis(rho, &s4.group).unwrap();
            let dims: Vec<usize> = basis.blocks.iter().map(|b| b.dim).collect();
            assert_eq!(dims, want);
            assert!(max_abs_diff(&(basis.theta.adjoint() * &basis.theta), &identity(basis.dim())) <= 1e-10);
            assert!(kernel_residual(rho, &basis.theta) <= 1e-9);
            let plain = kernel_space(rho, &s4.group).unwrap();
            assert_eq!(plain.dim(), basis.dim());
            // Θ_i supported on V_ρ ⊗ X_i only.
            for (k, b) in basis.blocks.iter().enumerate() {
                let block = basis.theta_block(k);
                for row in 0..block.nrows() {
                    if !b.orbit.contains(&(row % 16)) {
                        assert!(block.row(row).iter().all(|z| z.norm() <= 1e-12));
                    }
                }
                let res = restrict(rho, &stabilizer(&s4.group, b.representative).unwrap()).unwrap();
                let fixed = character_inner_product(&res, &trivial_representation(res.group())).unwrap();
                assert!((fixed.re - b.dim as f64).abs() < 1e-10);
            }
        }
        let hex = catalog::hexagon();
        let basis = orbit_adapted_basis(&hex.irreps[2], &hex.group).unwrap();
        assert_eq!(basis.blocks.len(), 1);
        assert_eq!(basis.blocks[0].dim, 2);
    }

    use crate::groups::restrict;

    #[test]
    fn trivial_group_quotient_is_identity_map() {
        let g = PermGroup::trivial(3);
        let op = real_matrix(3, 3, &[1., 2., 0., 2., 5., 1., 0., 1., 4.]);
        let rho = trivial_representation(&g);
        let q = quotient(&op, &kernel_space(&rho, &g).unwrap()).unwrap();
        assert!(max_abs_diff(&q.matrix, &op) < 1e-14);
        let q = quotient_blocks(&op, &rho, &g).unwrap();
        assert!(max_abs_diff(&q.matrix, &op) < 1e-14);
    }

    #[test]
    fn line_graph_quotients() {
        let ex = catalog::line_graph();
        let s2 = 2f64.sqrt();
        // Orbit representatives 0, 1, 2 are an end vertex, its neighbour and the middle vertex.
        let plus = quotient_blocks(&ex.operator, &ex.irreps[0], &ex.group).unwrap();
        assert!(max_abs_diff(&plus.matrix, &real_matrix(3, 3, &[1., -1., 0., -1., 2., -s2, 0., -s2, 2.])) < 1e-12);
        let minus = quotient_blocks(&ex.operator, &ex.irreps[1], &ex.group).unwrap();
        assert!(max_abs_diff(&minus.matrix, &real_matrix(2, 2, &[1., -1., -1., 2.])) < 1e-12);
    }

    #[test]
    fn not_pi_symmetric_is_reported() {
        let ex = catalog::line_graph();
        let mut op = ex.operator.clone();
        op[(0, 1)] = cr(-2.0);
        let basis = kernel_space(&ex.irreps[0], &ex.group).unwrap();
        match quotient(&op, &basis) {
            Err(Error::NotPiSymmetric { generator, violation }) => {
                assert_eq!(generator, "r");
                assert!((violation - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fast_paths_match_general_formula() {
        let cases = [catalog::hexagon_with(0.3, 1.7, -0.4), catalog::s4_graph_with(1.1, 0.2, 0.7, -1.3), catalog::quaternion_graph(0.1, 0.9, -0.4, 1.2)];
        for ex in &cases {
            for rho in &ex.irreps {
                let f = BlockFormula::new(rho, &ex.group).unwrap();
                let n = f.blocks().len();
                for i in 0..n {
                    for j in 0..n {
                        if f.blocks()[i].dim == 0 || f.blocks()[j].dim == 0 {
                            continue;
                        }
                        let fast = f.block(&ex.operator, i, j);
                        let general = f.block_with(&ex.operator, i, j, BlockPath::General);
                        assert!(max_abs_diff(&fast, &general) <= 1e-10, "{:?}", f.path(&ex.operator, i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_point_path_is_used_on_s4() {
        let s4 = catalog::s4_graph();
        let q = quotient_blocks(&s4.operator, &s4.irreps[1], &s4.group).unwrap();
        assert!(q.paths.contains(&BlockPath::FixedPoint));
        let hex = catalog::hexagon();
        let q = quotient_blocks(&hex.operator, &hex.irreps[2], &hex.group).unwrap();
        assert_eq!(q.paths, vec![BlockPath::FreeAction]);
    }

    #[test]
    fn two_paths_agree_and_match_plain_spectrum() {
        for ex in [catalog::line_graph(), catalog::hexagon(), catalog::s4_graph(), catalog::disappearing_edges(), catalog::quaternion_graph(1., 2., 3., 5.)] {
            for rho in &ex.irreps {
                let adapted = orbit_adapted_basis(rho, &ex.group).unwrap();
                let a = quotient(&ex.operator, &adapted).unwrap();
                let b = quotient_blocks(&ex.operator, rho, &ex.group).unwrap();
                assert!(max_abs_diff(&a.matrix, &b.matrix) <= 1e-9);
                let plain = quotient(&ex.operator, &kernel_space(rho, &ex.group).unwrap()).unwrap();
                let sa = eig(&a.matrix, true).unwrap().values;
                let sp = eig(&plain.matrix, true).unwrap().values;
                assert!(multiset_distance(&sa, &sp).unwrap() <= 1e-9);
                assert!(verify_fundamental(&ex.operator, &b.basis, &b).pass);
            }
        }
    }

    #[test]
    fn corrupted_basis_fails_fundamental_check() {
        let ex = catalog::line_graph();
        let basis = orbit_adapted_basis(&ex.irreps[0], &ex.group).unwrap();
        let q = quotient(&ex.operator, &basis).unwrap();
        let mut bad = basis.clone();
        let scaled = bad.theta.column(0) * cr(1.01);
        bad.theta.set_column(0, &scaled);
        let report = verify_fundamental(&ex.operator, &bad, &q);
        assert!(!report.pass);
        assert!(report.orthonormal_residual > 1e-2 && report.orthonormal_residual < 3e-2);
    }

    #[test]
    fn general_quotient_with_scaled_basis() {
        let ex = catalog::hexagon_with(1.0, 0.5, 2.0);
        let rho = &ex.irreps[2];
        let basis = orbit_adapted_basis(rho, &ex.group).unwrap();
        let mut theta = basis.theta.clone();
        let scaled = theta.column(1) * cr(3.0);
        theta.set_column(1, &scaled);
        let q = quotient_general(&ex.operator, &ex.group, 2, &theta).unwrap();
        let lifted = apply_lifted(&ex.operator, &theta, 2);
        assert!(max_abs_diff(&(&theta * &q), &lifted) < 1e-12);
    }

    #[test]
    fn decomposition_of_line_graph_and_hexagon() {
        let ex = catalog::line_graph();
        assert!(verify_decomposition(&ex.operator, &ex.group, &ex.irreps).unwrap().pass);
        let hex = catalog::hexagon();
        let rep = verify_decomposition(&hex.operator, &hex.group, &hex.irreps).unwrap();
        assert!(rep.pass);
        let from_two_dim = rep.accounting.iter().filter(|e| e.source == 2).count();
        assert_eq!(from_two_dim, 4);
        assert!(matches!(
            verify_decomposition(&hex.operator, &hex.group, &hex.irreps[..2]),
            Err(Error::IncompleteIrrepList(_))
        ));
    }

    #[test]
    fn spectral_property_examples() {
        let ex = catalog::directed();
        for (k, want) in [(1, 1), (2, 2)] {
            let r = verify_spectral(&ex.operator, &ex.irreps[0], &ex.group, cr(1.0), k).unwrap();
            assert_eq!((r.quotient_dim, r.kernel_dim), (want, want));
        }
        let r = verify_spectral(&ex.operator, &ex.irreps[0], &ex.group, cr(7.5), 1).unwrap();
        assert_eq!((r.quotient_dim, r.kernel_dim), (0, 0));
        let line = catalog::line_graph();
        let lam = (3.0 - 5f64.sqrt()) / 2.0;
        let r = verify_spectral(&line.operator, &line.irreps[1], &line.group, cr(lam), 1).unwrap();
        assert_eq!((r.quotient_dim, r.kernel_dim), (1, 1));
        // An eigenvalue carrying rounding error must still count for a 1x1 quotient.
        let s4 = catalog::s4_graph();
        let r = verify_spectral(&s4.operator, &s4.irreps[2], &s4.group, cr(3.0 + 4e-16), 1).unwrap();
        assert_eq!((r.quotient_dim, r.kernel_dim), (1, 1));
    }

    #[test]
    fn structure_examples() {
        let dis = catalog::disappearing_edges();
        let rep = verify_structure(&dis.operator, &dis.irreps[1], &dis.group).unwrap();
        assert!(rep.pass);
        assert!(rep.zero_despite_connection.contains(&(0, 1)));
        let line = catalog::line_graph();
        let rep = verify_structure(&line.operator, &line.irreps[0], &line.group).unwrap();
        assert!(rep.pass);
        let q = quotient_blocks(&line.operator, &line.irreps[0], &line.group).unwrap();
        assert_eq!(q.matrix[(0, 2)], cr(0.0));
        let hex = catalog::hexagon();
        assert!(verify_structure(&hex.operator, &hex.irreps[2], &hex.group).unwrap().pass);
    }

    #[test]
    fn induction_examples() {
        let hex = catalog::hexagon();
        let e = Subgroup::from_elements(&hex.group, &[]).unwrap();
        let r = verify_induction(&hex.operator, &hex.group, &e, &trivial_representation(e.group())).unwrap();
        assert!(r.pass && r.unitarily_equivalent);
        assert_eq!(r.induced_dim, 6);
        let s = hex.group.generator_element(0);
        let c3 = Subgroup::from_elements(&hex.group, &[s]).unwrap();
        assert_eq!(c3.order(), 3);
        let w = 2.0 * std::f64::consts::PI / 3.0;
        let chi = crate::groups::build_representation(
            c3.group(),
            1,
            &[("h0".into(), CMatrix::from_element(1, 1, c(w.cos(), w.sin())))],
        )
        .unwrap();
        let r = verify_induction(&hex.operator, &hex.group, &c3, &chi).unwrap();
        assert!(r.pass);
        assert_eq!(r.induced_dim, 2);
        let line = catalog::line_graph();
        let whole = Subgroup::from_elements(&line.group, &[1]).unwrap();
        let sgn = sign_representation(whole.group(), &["h0"]).unwrap();
        let r = verify_induction(&line.operator, &line.group, &whole, &sgn).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn regular_representation_quotient_is_unitarily_equivalent_to_op() {
        let hex = catalog::hexagon_with(0.5, 1.5, -0.7);
        let reg = regular_representation(&hex.group);
        let q = quotient_blocks(&hex.operator, &reg, &hex.group).unwrap();
        let a = eig(&q.matrix, true).unwrap().values;
        let b = eig(&hex.operator, true).unwrap().values;
        assert!(multiset_distance(&a, &b).unwrap() < 1e-9);
    }

    #[test]
    fn symmetrize_produces_pi_symmetric_operators() {
        let s4 = catalog::s4_graph();
        let mut rng = StdRng::seed_from_u64(3);
        let m = CMatrix::from_fn(16, 16, |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        assert!(check_pi_symmetric(&symmetrize(&m, &s4.group), &s4.group).is_ok());
    }
}
