//! Finite permutation groups and their unitary representations.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::{rngs::StdRng, Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{cr, identity, kron, max_abs_diff, unitary_defect, CMatrix, C64};

pub const DEFAULT_CAP: usize = 10080;
const HOM_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-10;
const EXHAUSTIVE_LIMIT: usize = 200;
const SAMPLED_PAIRS: usize = 500;
const TABLE_LIMIT: usize = 1024;

/// One-line permutation: `p[x]` is the image of `x`.
pub type Perm = Vec<usize>;

/// `(g h)(x) = g(h(x))`.
pub fn compose(g: &[usize], h: &[usize]) -> Perm {
    h.iter().map(|&x| g[x]).collect()
}

pub fn invert(g: &[usize]) -> Perm {
    let mut inv = vec![0; g.len()];
    for (x, &y) in g.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

fn check_perm(name: &str, degree: usize, p: &[usize]) -> Result<()> {
    if p.len() != degree {
        return Err(Error::BadPermutation {
            name: name.into(),
            reason: format!("length {} but degree {degree}", p.len()),
        });
    }
    let mut seen = vec![false; degree];
    for &x in p {
        if x >= degree || seen[x] {
            return Err(Error::BadPermutation { name: name.into(), reason: format!("entry {x} invalid or repeated") });
        }
        seen[x] = true;
    }
    Ok(())
}

/// A finite group of permutations of `0..degree`, closed from named generators.
#[derive(Debug)]
pub struct PermGroup {
    degree: usize,
    generator_names: Vec<String>,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    words: Vec<Vec<usize>>,
    index: HashMap<Perm, usize>,
    inverses: Vec<usize>,
    table: Option<Vec<u32>>,
}

pub fn close_group(degree: usize, generators: Vec<(String, Perm)>) -> Result<Arc<PermGroup>> {
    close_group_with_cap(degree, generators, DEFAULT_CAP)
}

/// Breadth-first closure; element words have minimal length over the generators.
pub fn close_group_with_cap(degree: usize, generators: Vec<(String, Perm)>, cap: usize) -> Result<Arc<PermGroup>> {
    for (name, p) in &generators {
        check_perm(name, degree, p)?;
    }
    let (generator_names, gens): (Vec<String>, Vec<Perm>) = generators.into_iter().unzip();
    let id: Perm = (0..degree).collect();
    let mut elements = vec![id.clone()];
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut index = HashMap::from([(id, 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(g) = queue.pop_front() {
        for (s, gen) in gens.iter().enumerate() {
            let h = compose(&elements[g], gen);
            if index.contains_key(&h) {
                continue;
            }
            if elements.len() == cap {
                return Err(Error::GroupTooLarge { cap });
            }
            let mut w = words[g].clone();
            w.push(s);
            index.insert(h.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(h);
            words.push(w);
        }
    }
    let inverses = elements.iter().map(|g| index[&invert(g)]).collect();
    let n = elements.len();
    let table = (n <= TABLE_LIMIT).then(|| {
        let mut t = Vec::with_capacity(n * n);
        for a in &elements {
            for b in &elements {
                t.push(index[&compose(a, b)] as u32);
            }
        }
        t
    });
    Ok(Arc::new(PermGroup { degree, generator_names, generators: gens, elements, words, index, inverses, table }))
}

impl PermGroup {
    /// The group with no generators acting on `degree` points.
    pub fn trivial(degree: usize) -> Arc<PermGroup> {
        close_group(degree, vec![]).expect("trivial group")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, g: usize) -> &Perm {
        &self.elements[g]
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn generator_element(&self, s: usize) -> usize {
        self.index[&self.generators[s]]
    }

    pub fn word(&self, g: usize) -> &[usize] {
        &self.words[g]
    }

    pub fn word_string(&self, g: usize) -> String {
        if self.words[g].is_empty() {
            return "e".into();
        }
        self.words[g].iter().map(|&s| self.generator_names[s].as_str()).collect::<Vec<_>>().join("*")
    }

    pub fn index_of(&self, p: &[usize]) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.table {
            Some(t) => t[a * self.order() + b] as usize,
            None => self.index[&compose(&self.elements[a], &self.elements[b])],
        }
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// Image of point `x` under element `g`.
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.elements[g][x]
    }

    pub fn generator_by_name(&self, name: &str) -> Option<usize> {
        self.generator_names.iter().position(|n| n == name)
    }
}

pub fn same_group(a: &PermGroup, b: &PermGroup) -> bool {
    std::ptr::eq(a, b) || (a.degree == b.degree && a.elements == b.elements)
}

/// A homomorphism from a permutation group into unitary r x r matrices.
#[derive(Clone, Debug)]
pub struct Representation {
    group: Arc<PermGroup>,
    degree: usize,
    matrices: Vec<CMatrix>,
    label: String,
}

impl Representation {
    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.degree == 1 && self.matrices.iter().all(|m| (m[(0, 0)] - cr(1.0)).norm() <= IDENTITY_TOL)
    }

    /// Validates unitarity, ρ(e) = I and the homomorphism property, then wraps the matrices.
    pub fn from_element_matrices(group: Arc<PermGroup>, degree: usize, matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::BadShape(format!("{} matrices for a group of order {}", matrices.len(), group.order())));
        }
        for (g, m) in matrices.iter().enumerate() {
            if m.shape() != (degree, degree) {
                return Err(Error::BadShape(format!("image of {} is not {degree}x{degree}", group.word_string(g))));
            }
            let d = unitary_defect(m);
            if d > HOM_TOL {
                return Err(Error::NotUnitary { element: group.word_string(g), residual: d });
            }
        }
        let id_res = max_abs_diff(&matrices[0], &identity(degree));
        if id_res > IDENTITY_TOL {
            return Err(Error::NotAHomomorphism { g: "e".into(), h: "e".into(), residual: id_res });
        }
        let rep = Representation { group, degree, matrices, label: String::new() };
        rep.check_homomorphism()?;
        Ok(rep)
    }

    fn check_homomorphism(&self) -> Result<()> {
        let n = self.group.order();
        let check = |a: usize, b: usize| -> Result<()> {
            let prod = &self.matrices[a] * &self.matrices[b];
            let res = max_abs_diff(&prod, &self.matrices[self.group.mul(a, b)]);
            if res > HOM_TOL {
                return Err(Error::NotAHomomorphism {
                    g: self.group.word_string(a),
                    h: self.group.word_string(b),
                    residual: res,
                });
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    check(a, b)?;
                }
            }
        } else {
            let mut rng = StdRng::seed_from_u64(0x5eed);
            for _ in 0..SAMPLED_PAIRS {
                check(rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }
}

/// Extends generator images along element words and validates the result.
pub fn build_representation(
    group: &Arc<PermGroup>,
    degree: usize,
    images: &[(String, CMatrix)],
) -> Result<Representation> {
    let mut gens = vec![None; group.generator_names().len()];
    for (name, m) in images {
        let s = group
            .generator_by_name(name)
            .ok_or_else(|| Error::Input(format!("unknown generator {name}")))?;
        if m.shape() != (degree, degree) {
            return Err(Error::BadShape(format!("image of {name} is not {degree}x{degree}")));
        }
        let d = unitary_defect(m);
        if d > HOM_TOL {
            return Err(Error::NotUnitary { element: name.clone(), residual: d });
        }
        gens[s] = Some(m.clone());
    }
    let gens: Vec<CMatrix> = gens
        .into_iter()
        .enumerate()
        .map(|(s, m)| m.ok_or_else(|| Error::Input(format!("missing image for generator {}", group.generator_names()[s]))))
        .collect::<Result<_>>()?;
    let matrices = (0..group.order())
        .map(|g| group.word(g).iter().fold(identity(degree), |acc, &s| acc * &gens[s]))
        .collect();
    Representation::from_element_matrices(group.clone(), degree, matrices)
}

pub fn trivial_representation(group: &Arc<PermGroup>) -> Representation {
    Representation { group: group.clone(), degree: 1, matrices: vec![identity(1); group.order()], label: "trivial".into() }
}

/// One-dimensional representation sending the listed generators to -1 and the rest to +1.
pub fn sign_representation(group: &Arc<PermGroup>, negated: &[&str]) -> Result<Representation> {
    let images: Vec<(String, CMatrix)> = group
        .generator_names()
        .iter()
        .map(|n| {
            let v = if negated.contains(&n.as_str()) { -1.0 } else { 1.0 };
            (n.clone(), CMatrix::from_element(1, 1, cr(v)))
        })
        .collect();
    for n in negated {
        if group.generator_by_name(n).is_none() {
            return Err(Error::Input(format!("unknown generator {n}")));
        }
    }
    Ok(build_representation(group, 1, &images)?.with_label(format!("sign:{}", negated.join(","))))
}

fn perm_matrix(p: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(p.len(), p.len());
    for (i, &gi) in p.iter().enumerate() {
        m[(gi, i)] = cr(1.0);
    }
    m
}

/// π(g) e_i = e_{g i}, equivalently [π(g) f](i) = f(g⁻¹ i).
pub fn permutation_representation(group: &Arc<PermGroup>) -> Representation {
    Representation {
        group: group.clone(),
        degree: group.degree(),
        matrices: group.elements().iter().map(|p| perm_matrix(p)).collect(),
        label: "permutation".into(),
    }
}

/// Left regular representation: R(g) e_h = e_{gh}.
pub fn regular_representation(group: &Arc<PermGroup>) -> Representation {
    let n = group.order();
    let matrices = (0..n)
        .map(|g| {
            let p: Perm = (0..n).map(|h| group.mul(g, h)).collect();
            perm_matrix(&p)
        })
        .collect();
    Representation { group: group.clone(), degree: n, matrices, label: "regular".into() }
}

/// A subgroup of a parent group, itself realized as a permutation group.
#[derive(Clone, Debug)]
pub struct Subgroup {
    parent: Arc<PermGroup>,
    group: Arc<PermGroup>,
    members: Vec<usize>,
    member_of: HashMap<usize, usize>,
    coset_reps: Vec<usize>,
}

impl Subgroup {
    /// Subgroup generated by the given parent elements.
    pub fn from_elements(parent: &Arc<PermGroup>, gens: &[usize]) -> Result<Self> {
        let named: Vec<(String, Perm)> = gens
            .iter()
            .enumerate()
            .map(|(k, &g)| (format!("h{k}"), parent.element(g).clone()))
            .collect();
        let group = close_group_with_cap(parent.degree(), named, parent.order())?;
        let members: Vec<usize> = group
            .elements()
            .iter()
            .map(|p| parent.index_of(p).ok_or_else(|| Error::NotASubgroup("generator outside parent".into())))
            .collect::<Result<_>>()?;
        let member_of = members.iter().enumerate().map(|(k, &g)| (g, k)).collect();
        let mut assigned = vec![false; parent.order()];
        let mut coset_reps = Vec::new();
        for g in 0..parent.order() {
            if assigned[g] {
                continue;
            }
            coset_reps.push(g);
            for &h in &members {
                assigned[parent.mul(g, h)] = true;
            }
        }
        Ok(Subgroup { parent: parent.clone(), group, members, member_of, coset_reps })
    }

    /// Subgroup generated by words over the parent's generator names.
    pub fn from_words(parent: &Arc<PermGroup>, words: &[Vec<String>]) -> Result<Self> {
        let mut gens = Vec::with_capacity(words.len());
        for w in words {
            let mut g = 0;
            for name in w {
                let s = parent
                    .generator_by_name(name)
                    .ok_or_else(|| Error::Input(format!("unknown generator {name}")))?;
                g = parent.mul(g, parent.generator_element(s));
            }
            gens.push(g);
        }
        Self::from_elements(parent, &gens)
    }

    /// Subgroup with exactly the given member set, choosing generators greedily.
    pub fn from_member_set(parent: &Arc<PermGroup>, set: &[usize]) -> Result<Self> {
        let mut gens = Vec::new();
        let mut closure = vec![0usize];
        for &g in set {
            if !closure.contains(&g) {
                gens.push(g);
                closure = Self::from_elements(parent, &gens)?.members;
            }
        }
        let sub = Self::from_elements(parent, &gens)?;
        if sub.order() != set.len() {
            return Err(Error::NotASubgroup("element set is not closed".into()));
        }
        Ok(sub)
    }

    pub fn parent(&self) -> &Arc<PermGroup> {
        &self.parent
    }

    /// The subgroup as a permutation group in its own right.
    pub fn group(&self) -> &Arc<PermGroup> {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    /// Parent indices of the members, in the subgroup's element order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, g: usize) -> bool {
        self.member_of.contains_key(&g)
    }

    /// Index within the subgroup of a parent element.
    pub fn local_index(&self, g: usize) -> Option<usize> {
        self.member_of.get(&g).copied()
    }

    pub fn coset_reps(&self) -> &[usize] {
        &self.coset_reps
    }

    pub fn index(&self) -> usize {
        self.coset_reps.len()
    }
}

pub fn restrict(rho: &Representation, h: &Subgroup) -> Result<Representation> {
    if !same_group(rho.group(), h.parent()) {
        return Err(Error::NotASubgroup("subgroup parent differs from the representation's group".into()));
    }
    Ok(Representation {
        group: h.group().clone(),
        degree: rho.degree,
        matrices: h.members().iter().map(|&g| rho.matrices[g].clone()).collect(),
        label: format!("Res({})", rho.label),
    })
}

/// Block (i, j) of Ind σ(g) is σ(g_i⁻¹ g g_j) when that element lies in H.
pub fn induce(sigma: &Representation, h: &Subgroup) -> Result<Representation> {
    if !same_group(sigma.group(), h.group()) {
        return Err(Error::NotASubgroup("representation is not defined on the subgroup".into()));
    }
    let g = h.parent();
    let s = sigma.degree;
    let reps = h.coset_reps();
    let n = reps.len();
    let matrices = (0..g.order())
        .map(|x| {
            let mut m = CMatrix::zeros(n * s, n * s);
            for (i, &gi) in reps.iter().enumerate() {
                let left = g.mul(g.inverse(gi), x);
                for (j, &gj) in reps.iter().enumerate() {
                    if let Some(k) = h.local_index(g.mul(left, gj)) {
                        m.view_mut((i * s, j * s), (s, s)).copy_from(&sigma.matrices[k]);
                    }
                }
            }
            m
        })
        .collect();
    Ok(Representation { group: g.clone(), degree: n * s, matrices, label: format!("Ind({})", sigma.label) })
}

pub fn direct_sum(a: &Representation, b: &Representation) -> Result<Representation> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    let (ra, rb) = (a.degree, b.degree);
    let matrices = a
        .matrices
        .iter()
        .zip(&b.matrices)
        .map(|(x, y)| {
            let mut m = CMatrix::zeros(ra + rb, ra + rb);
            m.view_mut((0, 0), (ra, ra)).copy_from(x);
            m.view_mut((ra, ra), (rb, rb)).copy_from(y);
            m
        })
        .collect();
    Ok(Representation { group: a.group.clone(), degree: ra + rb, matrices, label: format!("{}+{}", a.label, b.label) })
}

/// Tensor product of two representations of the same group.
pub fn tensor(a: &Representation, b: &Representation) -> Result<Representation> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    let matrices = a.matrices.iter().zip(&b.matrices).map(|(x, y)| kron(x, y)).collect();
    Ok(Representation { group: a.group.clone(), degree: a.degree * b.degree, matrices, label: format!("{}x{}", a.label, b.label) })
}

/// (1/|G|) Σ_g χ₁(g) conj(χ₂(g)).
pub fn character_inner_product(a: &Representation, b: &Representation) -> Result<C64> {
    if !same_group(a.group(), b.group()) {
        return Err(Error::GroupMismatch);
    }
    let sum = a.character().iter().zip(b.character()).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y.conj());
    Ok(sum / a.group.order() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitData {
    /// Orbit index of every point.
    pub orbit_of: Vec<usize>,
    /// Orbits ordered by least element, points ascending.
    pub orbits: Vec<Vec<usize>>,
    /// Least index of each orbit.
    pub domain: Vec<usize>,
}

pub fn orbits(group: &PermGroup) -> OrbitData {
    let p = group.degree();
    let mut orbit_of = vec![usize::MAX; p];
    let mut orbits = Vec::new();
    for start in 0..p {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut orbit = vec![start];
        orbit_of[start] = id;
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            for g in group.generators() {
                let y = g[x];
                if orbit_of[y] == usize::MAX {
                    orbit_of[y] = id;
                    orbit.push(y);
                }
            }
            k += 1;
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    let domain = orbits.iter().map(|o| o[0]).collect();
    OrbitData { orbit_of, orbits, domain }
}

pub fn stabilizer(group: &Arc<PermGroup>, point: usize) -> Result<Subgroup> {
    if point >= group.degree() {
        return Err(Error::BadIndex { index: point, degree: group.degree() });
    }
    let set: Vec<usize> = (0..group.order()).filter(|&g| group.act(g, point) == point).collect();
    Subgroup::from_member_set(group, &set)
}

/// Conjugacy classes as sorted element lists, ordered by least member.
pub fn conjugacy_classes(group: &PermGroup) -> Vec<Vec<usize>> {
    let n = group.order();
    let gens: Vec<usize> = (0..group.generators().len()).map(|s| group.generator_element(s)).collect();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut class = vec![x];
        class_of[x] = id;
        let mut k = 0;
        while k < class.len() {
            let y = class[k];
            for &s in &gens {
                let z = group.mul(group.mul(s, y), group.inverse(s));
                if class_of[z] == usize::MAX {
                    class_of[z] = id;
                    class.push(z);
                }
            }
            k += 1;
        }
        class.sort_unstable();
        classes.push(class);
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::linalg::{c, real_matrix};

    #[test]
    fn closure_orders() {
        assert_eq!(catalog::line_graph().group.order(), 2);
        assert_eq!(catalog::hexagon().group.order(), 6);
        assert_eq!(catalog::s4_graph().group.order(), 24);
        let g = PermGroup::trivial(3);
        assert_eq!(g.order(), 1);
        assert!(g.word(0).is_empty());
    }

    #[test]
    fn closure_respects_cap() {
        let gens = vec![("a".to_string(), vec![1, 2, 3, 0]), ("b".to_string(), vec![1, 0, 2, 3])];
        assert!(matches!(close_group_with_cap(4, gens.clone(), 10), Err(Error::GroupTooLarge { cap: 10 })));
        assert_eq!(close_group_with_cap(4, gens, 24).unwrap().order(), 24);
    }

    #[test]
    fn closure_is_closed_with_inverses() {
        let g = catalog::s4_graph().group;
        for a in 0..g.order() {
            assert_eq!(g.mul(a, g.inverse(a)), 0);
            for b in 0..g.order() {
                assert_eq!(g.element(g.mul(a, b)), &compose(g.element(a), g.element(b)));
            }
        }
    }

    #[test]
    fn bad_permutation_rejected() {
        assert!(matches!(
            close_group(3, vec![("x".into(), vec![0, 0, 1])]),
            Err(Error::BadPermutation { .. })
        ));
    }

    #[test]
    fn permutation_matrices() {
        let ex = catalog::line_graph();
        let pi = permutation_representation(&ex.group);
        assert_eq!(pi.matrix(0), &identity(5));
        let mut anti = CMatrix::zeros(5, 5);
        for i in 0..5 {
            anti[(4 - i, i)] = cr(1.0);
        }
        assert_eq!(pi.matrix(1), &anti);
        let s4 = catalog::s4_graph();
        for m in permutation_representation(&s4.group).matrices() {
            for i in 0..16 {
                assert_eq!(m.row(i).iter().sum::<C64>(), cr(1.0));
                assert_eq!(m.column(i).iter().sum::<C64>(), cr(1.0));
            }
        }
    }

    #[test]
    fn pi_acts_by_inverse_on_functions() {
        let hex = catalog::hexagon();
        let pi = permutation_representation(&hex.group);
        let f: Vec<C64> = (0..6).map(|i| cr(i as f64 * 1.5 + 1.0)).collect();
        let fv = nalgebra::DVector::from_vec(f.clone());
        for g in 0..6 {
            let out = pi.matrix(g) * &fv;
            let ginv = hex.group.inverse(g);
            for i in 0..6 {
                assert_eq!(out[i], f[hex.group.act(ginv, i)]);
            }
        }
    }

    #[test]
    fn sign_and_hexagon_irrep() {
        let ex = catalog::line_graph();
        let sgn = sign_representation(&ex.group, &["r"]).unwrap();
        assert_eq!(sgn.matrix(1)[(0, 0)], cr(-1.0));
        let hex = catalog::hexagon();
        let rho = &hex.irreps[2];
        assert_eq!(rho.degree(), 2);
        let w = 2.0 * std::f64::consts::PI / 3.0;
        let r3 = real_matrix(2, 2, &[w.sin(), w.cos(), w.cos(), -w.sin()]);
        let s = hex.group.generator_element(hex.group.generator_by_name("s").unwrap());
        let r1 = hex.group.generator_element(hex.group.generator_by_name("r1").unwrap());
        let derived = rho.matrix(s) * rho.matrix(r1) * rho.matrix(s) * rho.matrix(s);
        assert!(max_abs_diff(&derived, &r3) < 1e-12);
        let r3_index = hex.group.mul(hex.group.mul(s, r1), hex.group.mul(s, s));
        assert!(max_abs_diff(rho.matrix(r3_index), &r3) < 1e-12);
    }

    #[test]
    fn quaternion_relations() {
        let q = catalog::quaternion_graph(1.0, 2.0, 3.0, 4.0);
        let rho = &q.irreps[4];
        let i = q.group.generator_element(0);
        let j = q.group.generator_element(1);
        let k = q.group.mul(i, j);
        let prod = rho.matrix(i) * rho.matrix(j) * rho.matrix(k);
        assert!(max_abs_diff(&prod, &(-identity(2))) < 1e-12);
        assert_eq!(q.group.order(), 8);
    }

    #[test]
    fn invalid_images_rejected() {
        let hex = catalog::hexagon();
        let bad = vec![
            ("s".to_string(), CMatrix::from_element(1, 1, cr(-1.0))),
            ("r1".to_string(), CMatrix::from_element(1, 1, cr(1.0))),
        ];
        assert!(matches!(build_representation(&hex.group, 1, &bad), Err(Error::NotAHomomorphism { .. })));
        let nonunitary = vec![
            ("s".to_string(), CMatrix::from_element(1, 1, cr(2.0))),
            ("r1".to_string(), CMatrix::from_element(1, 1, cr(1.0))),
        ];
        assert!(matches!(build_representation(&hex.group, 1, &nonunitary), Err(Error::NotUnitary { .. })));
        let phase = vec![
            ("s".to_string(), CMatrix::from_element(1, 1, c(0.0, 1.0))),
            ("r1".to_string(), CMatrix::from_element(1, 1, cr(1.0))),
        ];
        assert!(build_representation(&hex.group, 1, &phase).is_err());
    }

    #[test]
    fn restriction_to_stabilizers() {
        let s4 = catalog::s4_graph();
        let rho = &s4.irreps[1];
        let g_cross = stabilizer(&s4.group, 4).unwrap();
        assert_eq!(g_cross.order(), 2);
        let res = restrict(rho, &g_cross).unwrap();
        let swap34 = s4.group.generator_element(2);
        assert_eq!(res.matrices().len(), 2);
        assert_eq!(res.matrix(0), &identity(3));
        assert_eq!(res.matrix(1), rho.matrix(swap34));
        let triv = Subgroup::from_elements(&s4.group, &[]).unwrap();
        assert_eq!(restrict(rho, &triv).unwrap().matrices(), &[identity(3)]);
        let chi = res.character();
        for (k, &g) in g_cross.members().iter().enumerate() {
            assert_eq!(chi[k], rho.matrix(g).trace());
        }
        let other = catalog::hexagon();
        let h = stabilizer(&other.group, 0).unwrap();
        assert!(matches!(restrict(rho, &h), Err(Error::NotASubgroup(_))));
    }

    #[test]
    fn induction_from_identity_is_regular() {
        let hex = catalog::hexagon();
        let e = Subgroup::from_elements(&hex.group, &[]).unwrap();
        let ind = induce(&trivial_representation(e.group()), &e).unwrap();
        assert_eq!(ind.degree(), 6);
        let chi = ind.character();
        assert_eq!(chi[0], cr(6.0));
        assert!(chi[1..].iter().all(|z| z.norm() == 0.0));
        let whole = Subgroup::from_elements(&hex.group, &[1, 2]).unwrap();
        assert_eq!(whole.order(), 6);
        let ind = induce(&trivial_representation(whole.group()), &whole).unwrap();
        assert!(ind.is_trivial());
    }

    #[test]
    fn induced_character_matches_trace_oracle() {
        let s4 = catalog::s4_graph();
        let h = stabilizer(&s4.group, 0).unwrap();
        let sigma = restrict(&s4.irreps[1], &h).unwrap();
        let ind = induce(&sigma, &h).unwrap();
        let g = &s4.group;
        let chi_sigma = sigma.character();
        for x in 0..g.order() {
            let mut expected = C64::new(0.0, 0.0);
            for &gi in h.coset_reps() {
                let y = g.mul(g.mul(g.inverse(gi), x), gi);
                if let Some(k) = h.local_index(y) {
                    expected += chi_sigma[k];
                }
            }
            assert!((ind.matrix(x).trace() - expected).norm() < 1e-12);
        }
        assert_eq!(h.index() * h.order(), g.order());
    }

    #[test]
    fn character_products() {
        let s4 = catalog::s4_graph();
        let triv = trivial_representation(&s4.group);
        assert!((character_inner_product(&triv, &triv).unwrap() - cr(1.0)).norm() < 1e-12);
        let pi = permutation_representation(&s4.group);
        let sgn = &s4.irreps[3];
        assert!(character_inner_product(sgn, &pi).unwrap().norm() < 1e-12);
        for a in &s4.irreps {
            for b in &s4.irreps {
                let ip = character_inner_product(a, b).unwrap();
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((ip - cr(expect)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn direct_sum_characters_add() {
        let hex = catalog::hexagon();
        let s = direct_sum(&hex.irreps[1], &hex.irreps[2]).unwrap();
        let (a, b) = (hex.irreps[1].character(), hex.irreps[2].character());
        for (g, z) in s.character().iter().enumerate() {
            assert!((z - a[g] - b[g]).norm() < 1e-12);
        }
    }

    #[test]
    fn orbit_and_stabilizer_sizes() {
        let hex = catalog::hexagon();
        let o = orbits(&hex.group);
        assert_eq!(o.orbits, vec![(0..6).collect::<Vec<_>>()]);
        assert_eq!(o.domain, vec![0]);
        let s4 = catalog::s4_graph();
        let o = orbits(&s4.group);
        assert_eq!(o.orbits, vec![(0..4).collect::<Vec<_>>(), (4..16).collect::<Vec<_>>()]);
        assert_eq!(stabilizer(&s4.group, 0).unwrap().order(), 6);
        assert_eq!(stabilizer(&s4.group, 4).unwrap().order(), 2);
        for orbit in &o.orbits {
            assert_eq!(orbit.len() * stabilizer(&s4.group, orbit[0]).unwrap().order(), 24);
        }
        assert!(matches!(stabilizer(&s4.group, 16), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn conjugacy_classes_of_s4() {
        let s4 = catalog::s4_graph();
        let mut sizes: Vec<usize> = conjugacy_classes(&s4.group).iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 6, 6, 8]);
    }
}
