//! Sunada-type isospectrality: conjugacy-class counts, induced characters and
//! certified isospectral quotient pairs.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{conjugacy_classes, same_group, PermGroup, Representation, Subgroup};
use crate::io::ser_matrix;
use crate::linalg::{cluster_tolerance, eig, generalized_eigenspace_dim, is_hermitian, max_abs_diff, multiset_distance, CMatrix, C64, EPS_SPEC};
use crate::quotient::quotient_blocks;

const ENUMERATION_LIMIT: usize = 48;
const CHARACTER_TOL: f64 = 1e-10;

/// Two subgroups of a common group with a representation of each.
#[derive(Clone, Debug)]
pub struct SubgroupPair {
    pub h1: Subgroup,
    pub h2: Subgroup,
    pub sigma1: Representation,
    pub sigma2: Representation,
}

impl SubgroupPair {
    pub fn new(h1: Subgroup, h2: Subgroup, sigma1: Representation, sigma2: Representation) -> Result<Self> {
        if !same_group(h1.parent(), h2.parent()) {
            return Err(Error::NotASubgroup("subgroups have different parents".into()));
        }
        if !same_group(sigma1.group(), h1.group()) || !same_group(sigma2.group(), h2.group()) {
            return Err(Error::NotASubgroup("representation is not defined on its subgroup".into()));
        }
        Ok(SubgroupPair { h1, h2, sigma1, sigma2 })
    }

    pub fn parent(&self) -> &Arc<PermGroup> {
        self.h1.parent()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassCount {
    pub class_size: usize,
    pub in_h1: usize,
    pub in_h2: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SunadaReport {
    pub holds: bool,
    pub classes: Vec<ClassCount>,
}

/// |[g] ∩ H1| = |[g] ∩ H2| for every conjugacy class [g].
pub fn sunada_condition(group: &PermGroup, h1: &Subgroup, h2: &Subgroup) -> Result<SunadaReport> {
    if !same_group(group, h1.parent()) || !same_group(group, h2.parent()) {
        return Err(Error::NotASubgroup("subgroups belong to another group".into()));
    }
    let classes: Vec<ClassCount> = conjugacy_classes(group)
        .iter()
        .map(|cls| ClassCount {
            class_size: cls.len(),
            in_h1: cls.iter().filter(|&&g| h1.contains(g)).count(),
            in_h2: cls.iter().filter(|&&g| h2.contains(g)).count(),
        })
        .collect();
    Ok(SunadaReport { holds: classes.iter().all(|c| c.in_h1 == c.in_h2), classes })
}

/// χ_{Ind σ}(g) = Σ_i [g_i⁻¹ g g_i ∈ H] χ_σ(g_i⁻¹ g g_i).
pub fn induced_character(sigma: &Representation, h: &Subgroup) -> Vec<C64> {
    let g = h.parent();
    let chi = sigma.character();
    (0..g.order())
        .map(|x| {
            h.coset_reps()
                .iter()
                .filter_map(|&gi| h.local_index(g.mul(g.mul(g.inverse(gi), x), gi)))
                .map(|k| chi[k])
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Ind σ1 and Ind σ2 have equal characters on the whole group.
pub fn induction_condition(pair: &SubgroupPair) -> InductionCheck {
    let a = induced_character(&pair.sigma1, &pair.h1);
    let b = induced_character(&pair.sigma2, &pair.h2);
    let max_deviation = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    InductionCheck { holds: max_deviation <= CHARACTER_TOL, max_deviation }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsospectralReport {
    pub induction: InductionCheck,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix1: CMatrix,
    #[serde(serialize_with = "ser_matrix")]
    pub matrix2: CMatrix,
    pub spectrum1: Vec<[f64; 2]>,
    pub spectrum2: Vec<[f64; 2]>,
    pub max_deviation: f64,
    /// Largest entrywise difference when the matrices have equal size.
    pub max_entry_difference: Option<f64>,
    pub hermitian: bool,
    /// For non-Hermitian input: generalized eigenspace dimensions agree at every common eigenvalue.
    pub jordan_dims_match: Option<bool>,
    /// "unitarily equivalent", "isospectral" or "not isospectral".
    pub verdict: String,
    pub pass: bool,
}

/// Computes Op_σ1 (under H1) and Op_σ2 (under H2) and compares their spectra.
///
/// Refuses to certify with `ConditionNotMet` when the induction condition fails;
/// the error still carries the computed report.
pub fn certify_isospectral(op: &CMatrix, action: &Arc<PermGroup>, pair: &SubgroupPair) -> Result<IsospectralReport> {
    if !same_group(action, pair.parent()) {
        return Err(Error::NotASubgroup("pair belongs to another group".into()));
    }
    let induction = induction_condition(pair);
    let q1 = quotient_blocks(op, &pair.sigma1, pair.h1.group())?.matrix;
    let q2 = quotient_blocks(op, &pair.sigma2, pair.h2.group())?.matrix;
    let hermitian = is_hermitian(op);
    let e1 = eig(&q1, hermitian)?;
    let e2 = eig(&q2, hermitian)?;
    let max_deviation = multiset_distance(&e1.values, &e2.values).unwrap_or(f64::INFINITY);
    let tol = if hermitian { EPS_SPEC } else { cluster_tolerance(op, false) };
    let spectra_equal = max_deviation <= tol;
    let jordan_dims_match = (!hermitian && spectra_equal).then(|| {
        let n = q1.nrows() as u32;
        e1.spectrum.eigenvalues.iter().all(|&lam| {
            (1..=n).all(|k| generalized_eigenspace_dim(&q1, lam, k) == generalized_eigenspace_dim(&q2, lam, k))
        })
    });
    let max_entry_difference = (q1.shape() == q2.shape()).then(|| max_abs_diff(&q1, &q2));
    let verdict = match (spectra_equal, hermitian) {
        (false, _) => "not isospectral",
        (true, true) => "unitarily equivalent",
        (true, false) => "isospectral",
    };
    let pass = induction.holds && spectra_equal && jordan_dims_match.unwrap_or(true);
    let report = IsospectralReport {
        induction,
        spectrum1: e1.values.iter().map(|z| [z.re, z.im]).collect(),
        spectrum2: e2.values.iter().map(|z| [z.re, z.im]).collect(),
        matrix1: q1,
        matrix2: q2,
        max_deviation,
        max_entry_difference,
        hermitian,
        jordan_dims_match,
        verdict: verdict.into(),
        pass,
    };
    if !report.induction.holds {
        return Err(Error::ConditionNotMet(Box::new(report)));
    }
    Ok(report)
}

/// All subgroups of a group of order at most 48, ordered by (order, members).
pub fn enumerate_subgroups(group: &Arc<PermGroup>) -> Result<Vec<Subgroup>> {
    if group.order() > ENUMERATION_LIMIT {
        return Err(Error::GroupTooLarge { cap: ENUMERATION_LIMIT });
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut found: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let trivial = Subgroup::from_elements(group, &[])?;
    let key = |s: &Subgroup| {
        let mut m = s.members().to_vec();
        m.sort_unstable();
        m
    };
    seen.insert(key(&trivial));
    found.push((key(&trivial), vec![]));
    let mut k = 0;
    while k < found.len() {
        let (members, gens) = found[k].clone();
        for g in 0..group.order() {
            if members.binary_search(&g).is_ok() {
                continue;
            }
            let mut next = gens.clone();
            next.push(g);
            let s = Subgroup::from_elements(group, &next)?;
            let km = key(&s);
            if seen.insert(km.clone()) {
                found.push((km, next));
            }
        }
        k += 1;
    }
    found.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    found.iter().map(|(_, gens)| Subgroup::from_elements(group, gens)).collect()
}

/// Whether two subgroups are conjugate in their parent.
pub fn are_conjugate(h1: &Subgroup, h2: &Subgroup) -> bool {
    let g = h1.parent();
    if h1.order() != h2.order() {
        return false;
    }
    (0..g.order()).any(|x| {
        let xi = g.inverse(x);
        h1.members().iter().all(|&h| h2.contains(g.mul(g.mul(x, h), xi)))
    })
}
