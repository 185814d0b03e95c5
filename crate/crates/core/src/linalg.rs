//! Dense complex linear algebra: Kronecker products, vectorization,
//! canonical nullspaces, eigendecompositions and numerical rank.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, SVD};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Hermitian flag tolerance.
pub const EPS_HERM: f64 = 1e-10;
/// Unitary flag tolerance.
pub const EPS_UNIT: f64 = 1e-9;
/// Absolute eigenvalue clustering tolerance.
pub const EPS_SPEC: f64 = 1e-8;
/// Relative singular value threshold for rank and nullspaces.
pub const RANK_TOL: f64 = 1e-9;

const MAX_ITER: usize = 10_000;
// Entries below this are treated as zero when locating leading indices.
const PIVOT_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a complex matrix from real entries in row-major order.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count");
    CMatrix::from_fn(rows, cols, |i, j| cr(entries[i * cols + j]))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ma, na) = a.shape();
    let (mb, nb) = b.shape();
    let mut out = CMatrix::zeros(ma * mb, na * nb);
    for i in 0..ma {
        for j in 0..na {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..mb {
                for l in 0..nb {
                    out[(i * mb + k, j * nb + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Stacks the columns of `a` into one vector.
pub fn vectorize(a: &CMatrix) -> DVector<C64> {
    DVector::from_iterator(a.len(), a.iter().copied())
}

pub fn unvectorize(v: &DVector<C64>, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::BadShape(format!(
            "vector of length {} cannot be reshaped to {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &CMatrix) -> bool {
    hermitian_defect(m) <= EPS_HERM
}

pub fn unitary_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()))
}

pub fn is_unitary(m: &CMatrix) -> bool {
    unitary_defect(m) <= EPS_UNIT
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

/// Full SVD with a complete right-singular basis; wide inputs are padded with zero rows.
fn full_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), v_t.adjoint())
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with threshold `rel_tol` times the largest singular value.
pub fn rank_with_tol(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Rank with cutoff `rel_tol * max(σ_max, scale)`; use when a nearly zero matrix
/// should count as zero relative to a known magnitude.
pub fn rank_with_scale(m: &CMatrix, rel_tol: f64, scale: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    let cutoff = rel_tol * top.max(scale);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > cutoff).count()
}

pub fn rank(m: &CMatrix) -> usize {
    rank_with_tol(m, RANK_TOL)
}

pub fn orthonormal_nullspace(m: &CMatrix) -> CMatrix {
    nullspace_with_tol(m, RANK_TOL)
}

pub fn nullspace_with_tol(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return canonical_basis(&identity(n));
    }
    let (s, v) = full_svd(m);
    let top = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let null_cols: Vec<usize> = (0..n)
        .filter(|&j| j >= s.len() || top == 0.0 || s[j] <= rel_tol * top)
        .collect();
    let basis = v.select_columns(&null_cols);
    canonical_basis(&basis)
}

/// Canonical orthonormal basis of the column span of `basis` (assumed independent).
///
/// Columns are ordered by strictly increasing leading index and every leading
/// entry is real and positive. The result depends only on the span.
pub fn canonical_basis(basis: &CMatrix) -> CMatrix {
    let n = basis.nrows();
    let k = basis.ncols();
    // Rows of `r` are the basis vectors; reduce to row echelon form.
    let mut r: Vec<Vec<C64>> = (0..k).map(|j| basis.column(j).iter().copied().collect()).collect();
    let mut pivots = Vec::with_capacity(k);
    let mut row = 0;
    for col in 0..n {
        if row == k {
            break;
        }
        let (best, best_abs) = (row..k)
            .map(|i| (i, r[i][col].norm()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= PIVOT_TOL {
            for ri in r.iter_mut().skip(row) {
                ri[col] = C64::new(0.0, 0.0);
            }
            continue;
        }
        r.swap(row, best);
        let p = r[row][col];
        for x in r[row].iter_mut() {
            *x /= p;
        }
        r[row][col] = C64::new(1.0, 0.0);
        for i in 0..k {
            if i == row {
                continue;
            }
            let f = r[i][col];
            if f != C64::new(0.0, 0.0) {
                let (src, dst) = if i < row {
                    let (a, b) = r.split_at_mut(row);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = r.split_at_mut(i);
                    (&a[row], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= f * s;
                }
                dst[col] = C64::new(0.0, 0.0);
            }
        }
        pivots.push(col);
        row += 1;
    }
    let k = pivots.len();
    // Reverse Gram-Schmidt keeps each pivot entry untouched.
    let mut out: Vec<DVector<C64>> = vec![DVector::zeros(n); k];
    for i in (0..k).rev() {
        let mut v = DVector::from_vec(r[i].clone());
        for _ in 0..2 {
            for u in out.iter().skip(i + 1) {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
        }
        for (c, x) in v.iter_mut().enumerate() {
            if c < pivots[i] {
                *x = C64::new(0.0, 0.0);
            }
        }
        let lead = v[pivots[i]];
        let phase = lead / lead.norm();
        let norm = v.norm();
        out[i] = v / (phase * norm);
        out[i][pivots[i]] = C64::new(out[i][pivots[i]].re, 0.0);
    }
    let mut m = CMatrix::zeros(n, k);
    for (j, v) in out.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Clustered eigenvalues with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub multiplicities: Vec<usize>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&z, &m)| std::iter::repeat_n(z, m))
            .collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Eigen {
    pub spectrum: Spectrum,
    /// Raw eigenvalues sorted by (real, imaginary).
    pub values: Vec<C64>,
    /// Orthonormal eigenvectors matching `values` (Hermitian path only).
    pub vectors: Option<CMatrix>,
}

fn cmp_complex(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Single-linkage clustering of eigenvalues within `tol`; clusters report their mean.
pub fn cluster(values: &[C64], tol: f64) -> Spectrum {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(values[i]);
    }
    let mut clusters: Vec<(C64, usize)> = groups
        .into_values()
        .map(|g| {
            let sum = g.iter().fold(C64::new(0.0, 0.0), |a, b| a + b);
            (sum / g.len() as f64, g.len())
        })
        .collect();
    clusters.sort_by(|a, b| cmp_complex(&a.0, &b.0));
    Spectrum {
        eigenvalues: clusters.iter().map(|c| c.0).collect(),
        multiplicities: clusters.iter().map(|c| c.1).collect(),
    }
}

/// Clustering tolerance used for a matrix: `EPS_SPEC` for Hermitian input,
/// widened for non-normal input where Jordan blocks split at about sqrt(eps).
pub fn cluster_tolerance(m: &CMatrix, hermitian: bool) -> f64 {
    if hermitian {
        EPS_SPEC
    } else {
        EPS_SPEC.max(1e-6 * max_abs(m).max(1.0))
    }
}

pub fn eig(m: &CMatrix, hermitian: bool) -> Result<Eigen> {
    eig_with_tol(m, hermitian, cluster_tolerance(m, hermitian))
}

pub fn eig_with_tol(m: &CMatrix, hermitian: bool, tol: f64) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::BadShape(format!("eig of non-square {}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigen {
            spectrum: Spectrum { eigenvalues: vec![], multiplicities: vec![] },
            values: vec![],
            vectors: hermitian.then(|| CMatrix::zeros(0, 0)),
        });
    }
    if hermitian {
        let h = (m + m.adjoint()) * cr(0.5);
        let se = SymmetricEigen::try_new(h, f64::EPSILON, MAX_ITER)
            .ok_or(Error::EigFail { iterations: MAX_ITER })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values: Vec<C64> = order.iter().map(|&i| cr(se.eigenvalues[i])).collect();
        let vectors = se.eigenvectors.select_columns(&order);
        Ok(Eigen { spectrum: cluster(&values, tol), values, vectors: Some(vectors) })
    } else {
        let mut values = schur_eigenvalues(m)?;
        values.sort_by(cmp_complex);
        Ok(Eigen { spectrum: cluster(&values, tol), values, vectors: None })
    }
}

/// Complex Schur without exceptional shifts can stall on structured inputs (e.g. exact
/// permutation blocks); on failure retry on a few seeded unitary conjugates.
fn schur_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let attempt = |a: CMatrix| Schur::try_new(a, f64::EPSILON, MAX_ITER).and_then(|s| s.eigenvalues());
    if let Some(v) = attempt(m.clone()) {
        return Ok(v.iter().copied().collect());
    }
    let n = m.nrows();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..4 {
        let g = CMatrix::from_fn(n, n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let q = g.qr().q();
        if let Some(v) = attempt(q.adjoint() * m * &q) {
            return Ok(v.iter().copied().collect());
        }
    }
    Err(Error::EigFail { iterations: MAX_ITER })
}

pub fn matrix_power(m: &CMatrix, k: u32) -> CMatrix {
    let mut out = identity(m.nrows());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// dim ker((M - λI)^k).
pub fn generalized_eigenspace_dim(m: &CMatrix, lambda: C64, k: u32) -> usize {
    let n = m.nrows();
    let shifted = m - identity(n) * lambda;
    n - rank(&matrix_power(&shifted, k.max(1)))
}

/// Largest distance in an optimal-ish matching of two equal-size multisets.
///
/// Real-sorted elementwise pairing when all values are real (exact for that case),
/// greedy nearest matching otherwise. Returns `None` when sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let real = a.iter().chain(b).all(|z| z.im.abs() <= EPS_SPEC);
    if real {
        let mut x: Vec<f64> = a.iter().map(|z| z.re).collect();
        let mut y: Vec<f64> = b.iter().map(|z| z.re).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        return Some(x.iter().zip(&y).fold(0.0, |m, (p, q)| m.max((p - q).abs())));
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        used[j] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

/// Pseudo-determinant-free solve of `a x = b` via LU; errors on numerical singularity.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    let s = singular_values(a);
    let top = s.first().copied().unwrap_or(0.0);
    let low = s.last().copied().unwrap_or(0.0);
    if a.nrows() > 0 && (top == 0.0 || low <= 1e-12 * top) {
        return None;
    }
    a.clone().lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (mb, nb) = b.shape();
        CMatrix::from_fn(a.nrows() * mb, a.ncols() * nb, |i, j| a[(i / mb, j / nb)] * b[(i % mb, j % nb)])
    }

    #[test]
    fn rank_with_scale_ignores_tiny_matrices() {
        let tiny = real_matrix(1, 1, &[4e-16]);
        assert_eq!(rank_with_tol(&tiny, RANK_TOL), 1);
        assert_eq!(rank_with_scale(&tiny, RANK_TOL, 1.0), 0);
        assert_eq!(rank_with_scale(&identity(3), RANK_TOL, 10.0), 3);
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
        let x = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(kron(&x, &identity(1)), x);
    }

    #[test]
    fn kron_matches_index_oracle_on_hexagon_reflection() {
        let r1 = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let lhs = kron(&r1.transpose(), &identity(6));
        assert_eq!(lhs, kron_oracle(&r1.transpose(), &identity(6)));
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 3, 2);
        let b = random_matrix(&mut rng, 2, 4);
        assert!(max_abs_diff(&kron(&a, &b), &kron_oracle(&a, &b)) == 0.0);
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(2.0), cr(3.0), cr(4.0)]);
        let v = vectorize(&m);
        assert_eq!(v.as_slice(), &[cr(1.0), cr(3.0), cr(2.0), cr(4.0)]);
        assert_eq!(unvectorize(&v, 2, 2).unwrap(), m);
        assert!(matches!(unvectorize(&v, 3, 2), Err(Error::BadShape(_))));
        let col = CMatrix::from_column_slice(3, 1, &[cr(1.0), cr(2.0), cr(3.0)]);
        assert_eq!(vectorize(&col).as_slice(), col.as_slice());
    }

    #[test]
    fn vec_identity_against_direct_product() {
        let mut rng = StdRng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let ab = vectorize(&(&a * &b));
        let left = kron(&identity(2), &a) * vectorize(&b);
        let right = kron(&b.transpose(), &identity(3)) * vectorize(&a);
        let scale = ab.camax();
        assert!((&ab - &left).camax() <= 1e-12 * scale);
        assert!((&ab - &right).camax() <= 1e-12 * scale);
    }

    #[test]
    fn nullspace_trivial_cases() {
        assert_eq!(orthonormal_nullspace(&identity(3)).shape(), (3, 0));
        assert_eq!(orthonormal_nullspace(&CMatrix::zeros(2, 2)), identity(2));
        assert_eq!(orthonormal_nullspace(&CMatrix::zeros(0, 3)), identity(3));
    }

    #[test]
    fn nullspace_is_canonical_and_deterministic() {
        // Span of (0, 1, 1i) and (1, 0, 0) given through a messy basis.
        let m = CMatrix::from_row_slice(1, 3, &[cr(0.0), cr(1.0), c(0.0, 1.0)]);
        let n = orthonormal_nullspace(&m);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&m * &n)) <= 1e-9);
        assert!(max_abs_diff(&(n.adjoint() * &n), &identity(2)) <= 1e-12);
        assert!((n[(0, 0)] - cr(1.0)).norm() < 1e-14);
        assert_eq!(n[(0, 1)], cr(0.0));
        assert!(n[(1, 1)].im == 0.0 && n[(1, 1)].re > 0.0);
        assert_eq!(n, orthonormal_nullspace(&m));
    }

    #[test]
    fn nullspace_of_line_graph_reflection_constraints() {
        let mut p = CMatrix::zeros(5, 5);
        for i in 0..5 {
            p[(4 - i, i)] = cr(1.0);
        }
        assert_eq!(orthonormal_nullspace(&(&p - identity(5))).ncols(), 3);
        assert_eq!(orthonormal_nullspace(&(&p + identity(5))).ncols(), 2);
    }

    #[test]
    fn eig_examples() {
        let d = real_matrix(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let e = eig(&d, true).unwrap();
        assert_eq!(e.spectrum.real_parts(), vec![1.0, 2.0, 3.0]);
        let s5 = 5f64.sqrt();
        let l = real_matrix(
            5,
            5,
            &[
                1., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0., -1., 2., -1., 0., 0., 0.,
                -1., 1.,
            ],
        );
        let got = eig(&l, true).unwrap().spectrum.real_parts();
        let want = [0.0, (3.0 - s5) / 2.0, (5.0 - s5) / 2.0, (3.0 + s5) / 2.0, (5.0 + s5) / 2.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9);
        }
        let e = eig(&l, true).unwrap();
        let q = e.vectors.unwrap();
        let lam = CMatrix::from_diagonal(&DVector::from_vec(e.values.clone()));
        assert!(max_abs_diff(&l, &(&q * lam * q.adjoint())) <= 1e-9 * max_abs(&l));
    }

    #[test]
    fn clustering_merges_close_values() {
        let s = cluster(&[cr(1.0), cr(1.0 + 1e-10), cr(2.0)], EPS_SPEC);
        assert_eq!(s.multiplicities, vec![2, 1]);
        assert_eq!(s.dim(), 3);
    }

    #[test]
    fn generalized_eigenspaces_of_jordan_structure() {
        assert_eq!(generalized_eigenspace_dim(&identity(3), cr(1.0), 1), 3);
        let op = real_matrix(4, 4, &[2., 1., 0., 0., 1., 2., 0., 0., 0., 1., 1., 0., 0., 1., 0., 1.]);
        assert_eq!(generalized_eigenspace_dim(&op, cr(1.0), 1), 2);
        assert_eq!(generalized_eigenspace_dim(&op, cr(1.0), 2), 3);
        let s2 = 2f64.sqrt();
        let q = real_matrix(3, 3, &[2., 1., 0., 1., 2., 0., 0., s2, 1.]);
        assert_eq!(generalized_eigenspace_dim(&q, cr(1.0), 1), 1);
        assert_eq!(generalized_eigenspace_dim(&q, cr(1.0), 2), 2);
    }

    #[test]
    fn non_hermitian_jordan_block_clusters() {
        let op = real_matrix(4, 4, &[2., 1., 0., 0., 1., 2., 0., 0., 0., 1., 1., 0., 0., 1., 0., 1.]);
        let e = eig(&op, false).unwrap();
        let ones = e.spectrum.eigenvalues.iter().position(|z| (z - cr(1.0)).norm() < 1e-6).unwrap();
        assert_eq!(e.spectrum.multiplicities[ones], 3);
    }
}
