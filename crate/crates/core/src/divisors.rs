//! Graph divisors of multi-digraphs and their relation to trivial-representation quotients.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{orbits, trivial_representation, PermGroup};
use crate::linalg::{cr, max_abs_diff, CMatrix};
use crate::quotient::quotient_blocks;

const INTEGER_TOL: f64 = 1e-9;

/// Disjoint cover of `0..n` by non-empty blocks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::BadPartition("empty block".into()));
            }
            for &i in b {
                if i >= n {
                    return Err(Error::BadPartition(format!("index {i} out of range for {n} vertices")));
                }
                if seen[i] {
                    return Err(Error::BadPartition(format!("index {i} appears twice")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::BadPartition(format!("index {i} not covered")));
        }
        Ok(Partition { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorReport {
    pub front: bool,
    pub rear: bool,
    pub both: bool,
    /// d_{μν} = Σ_{j ∈ C_ν} A_ij for any i ∈ C_μ.
    pub front_matrix: Option<Vec<Vec<i64>>>,
    /// e_{μν} = Σ_{i ∈ C_μ} A_ij for any j ∈ C_ν.
    pub rear_matrix: Option<Vec<Vec<i64>>>,
}

fn integer_entries(a: &CMatrix) -> Result<Vec<Vec<i64>>> {
    if !a.is_square() {
        return Err(Error::BadShape("adjacency matrix must be square".into()));
    }
    (0..a.nrows())
        .map(|i| {
            (0..a.ncols())
                .map(|j| {
                    let z = a[(i, j)];
                    let r = z.re.round();
                    if z.im.abs() > INTEGER_TOL || (z.re - r).abs() > INTEGER_TOL || r < 0.0 {
                        Err(Error::Input(format!("entry ({i}, {j}) = {z} is not a non-negative integer")))
                    } else {
                        Ok(r as i64)
                    }
                })
                .collect()
        })
        .collect()
}

fn block_sums(a: &[Vec<i64>], p: &Partition, rows: bool) -> Option<Vec<Vec<i64>>> {
    let m = p.blocks().len();
    let mut d = vec![vec![0; m]; m];
    for (mu, cm) in p.blocks().iter().enumerate() {
        for (nu, cn) in p.blocks().iter().enumerate() {
            // rows: sums over j ∈ C_ν for each i ∈ C_μ; columns: sums over i ∈ C_μ for each j ∈ C_ν.
            let sums: Vec<i64> = if rows {
                cm.iter().map(|&i| cn.iter().map(|&j| a[i][j]).sum()).collect()
            } else {
                cn.iter().map(|&j| cm.iter().map(|&i| a[i][j]).sum()).collect()
            };
            if sums.iter().any(|&s| s != sums[0]) {
                return None;
            }
            d[mu][nu] = sums[0];
        }
    }
    Some(d)
}

/// Front divisor iff block row sums are constant; rear iff block column sums are.
pub fn check_divisor(a: &CMatrix, partition: &Partition) -> Result<DivisorReport> {
    if partition.size() != a.nrows() {
        return Err(Error::BadPartition(format!("partition covers {} indices, matrix has {}", partition.size(), a.nrows())));
    }
    let ints = integer_entries(a)?;
    let front_matrix = block_sums(&ints, partition, true);
    let rear_matrix = block_sums(&ints, partition, false);
    Ok(DivisorReport {
        front: front_matrix.is_some(),
        rear: rear_matrix.is_some(),
        both: front_matrix.is_some() && rear_matrix.is_some(),
        front_matrix,
        rear_matrix,
    })
}

/// Y = ⊕_μ (1/|C_μ|) 𝟙, in the original index order.
pub fn y_projector(partition: &Partition) -> CMatrix {
    let n = partition.size();
    let mut y = CMatrix::zeros(n, n);
    for b in partition.blocks() {
        let w = cr(1.0 / b.len() as f64);
        for &i in b {
            for &j in b {
                y[(i, j)] = w;
            }
        }
    }
    y
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorSimilarityReport {
    pub partition: Partition,
    pub divisor: Vec<Vec<i64>>,
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub similar: CMatrix,
    #[serde(serialize_with = "crate::io::ser_matrix")]
    pub quotient: CMatrix,
    pub residual: f64,
    pub pass: bool,
}

/// V D V⁻¹ = Θ*AΘ with V = diag(√|C_μ|), D the front divisor of the orbit partition
/// and Θ the trivial-representation orbit-adapted basis.
pub fn divisor_vs_trivial_quotient(a: &CMatrix, action: &Arc<PermGroup>) -> Result<DivisorSimilarityReport> {
    let orbit_data = orbits(action);
    let partition = Partition::new(action.degree(), orbit_data.orbits)?;
    let report = check_divisor(a, &partition)?;
    let divisor = report
        .front_matrix
        .ok_or_else(|| Error::BadPartition("orbit partition is not a front divisor".into()))?;
    let sizes: Vec<f64> = partition.blocks().iter().map(|b| (b.len() as f64).sqrt()).collect();
    let m = sizes.len();
    let similar = CMatrix::from_fn(m, m, |i, j| cr(sizes[i] * divisor[i][j] as f64 / sizes[j]));
    let quotient = quotient_blocks(a, &trivial_representation(action), action)?.matrix;
    let residual = max_abs_diff(&similar, &quotient);
    Ok(DivisorSimilarityReport { partition, divisor, similar, quotient, residual, pass: residual <= 1e-10 })
}
