//! Graded p-polar algebras: graded modules with a graded-symmetric p-linear
//! multiplication μ on equal-degree p-tuples.
//!
//! Provides polarization of genuine algebras, the associativity checkers,
//! the hull adjunction (universal enveloping commutative algebra), the
//! p-polarity decision procedure, free p-polar algebras, and the p-typical
//! splitting.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::fp;
use crate::graded::{
    elem_add_scaled, elem_single, elem_zero, BasisElem, Elem, GradedAlgebra, GradedModule,
};
use crate::matrix::{FpMatrix, Span};

/// A graded p-polar algebra. μ is stored on sorted multisets (length p,
/// equal degree); evaluation on an unsorted tuple multiplies by the Koszul
/// sign of the sorting permutation restricted to odd-degree entries.
#[derive(Clone, Debug)]
pub struct PolarAlgebra {
    pub module: GradedModule,
    mu: BTreeMap<Vec<usize>, Elem>,
}

impl PolarAlgebra {
    /// Polar algebra with zero μ.
    pub fn new(module: GradedModule) -> Self {
        PolarAlgebra {
            module,
            mu: BTreeMap::new(),
        }
    }

    pub fn p(&self) -> u64 {
        self.module.p
    }

    pub fn max_degree(&self) -> usize {
        self.module.max_degree
    }

    /// Install μ on a sorted equal-degree multiset of basis indices.
    pub fn set_mu(&mut self, key: Vec<usize>, value: Elem) -> Result<()> {
        let p = self.p() as usize;
        if key.len() != p {
            return Err(Error::InvalidInput(format!(
                "μ takes {} arguments, got {}",
                p,
                key.len()
            )));
        }
        if key.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("μ multiset must be sorted".into()));
        }
        let j = self.module.degree(key[0]);
        if key.iter().any(|&i| self.module.degree(i) != j) {
            return Err(Error::InvalidInput(
                "μ arguments must have equal degree".into(),
            ));
        }
        if p * j > self.max_degree() {
            return Err(Error::InvalidInput(format!(
                "μ target degree {} exceeds max degree {}",
                p * j,
                self.max_degree()
            )));
        }
        for (&k, _) in &value {
            if self.module.degree(k) != p * j {
                return Err(Error::InvalidInput(
                    "μ value must be homogeneous of degree p·j".into(),
                ));
            }
        }
        if value.is_empty() {
            self.mu.remove(&key);
        } else {
            self.mu.insert(key, value);
        }
        Ok(())
    }

    pub fn mu_entries(&self) -> &BTreeMap<Vec<usize>, Elem> {
        &self.mu
    }

    /// μ on an already-sorted multiset.
    pub fn mu_basis(&self, key: &[usize]) -> Elem {
        self.mu.get(key).cloned().unwrap_or_default()
    }

    /// μ on an arbitrary tuple of basis indices, with Koszul sign.
    pub fn mu_tuple(&self, args: &[usize]) -> Elem {
        let p = self.p();
        let mut v = args.to_vec();
        let mut sign = 1u64;
        for i in 1..v.len() {
            let mut k = i;
            while k > 0 && v[k - 1] > v[k] {
                if self.module.degree(v[k - 1]) % 2 == 1 && self.module.degree(v[k]) % 2 == 1 {
                    sign = fp::neg(sign, p);
                }
                v.swap(k - 1, k);
                k -= 1;
            }
        }
        if p > 2 {
            // a repeated odd-degree entry forces zero (alternating sign)
            for w in v.windows(2) {
                if w[0] == w[1] && self.module.degree(w[0]) % 2 == 1 {
                    return elem_zero();
                }
            }
        }
        let mut out = elem_zero();
        if let Some(val) = self.mu.get(&v) {
            elem_add_scaled(&mut out, val, sign, p);
        }
        out
    }

    /// Multilinear extension of μ to p general elements.
    pub fn mu_elems(&self, args: &[Elem]) -> Elem {
        let p = self.p();
        assert_eq!(args.len(), p as usize);
        let mut out = elem_zero();
        let mut stack: Vec<(usize, Vec<usize>, u64)> = vec![(0, Vec::new(), 1)];
        while let Some((pos, idxs, coef)) = stack.pop() {
            if pos == args.len() {
                let v = self.mu_tuple(&idxs);
                elem_add_scaled(&mut out, &v, coef, p);
                continue;
            }
            for (&i, &c) in &args[pos] {
                let mut idxs2 = idxs.clone();
                idxs2.push(i);
                stack.push((pos + 1, idxs2, fp::mul(coef, c, p)));
            }
        }
        out
    }

    /// p-th μ-power of an element: μ(x, …, x). Additive in characteristic p
    /// (the cross terms carry multinomial coefficients divisible by p).
    pub fn pth_power(&self, x: &Elem) -> Elem {
        self.mu_elems(&vec![x.clone(); self.p() as usize])
    }

    /// Validate the stored μ (sortedness and degrees are enforced by
    /// `set_mu`; this re-checks a hand-built value).
    pub fn validate(&self) -> Result<()> {
        let mu = self.mu.clone();
        let mut copy = PolarAlgebra::new(self.module.clone());
        for (k, v) in mu {
            copy.set_mu(k, v)?;
        }
        Ok(())
    }
}

/// Sorted multisets of size `k` drawn from `items`.
fn multisets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..items.len() {
            cur.push(items[i]);
            rec(items, k, i, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Forgetful functor from algebras to p-polar algebras: μ is p-fold
/// multiplication.
pub fn polarize(a: &GradedAlgebra) -> PolarAlgebra {
    let p = a.p() as usize;
    let mut out = PolarAlgebra::new(a.module.clone());
    let degrees: Vec<usize> = a
        .module
        .dims_by_degree()
        .keys()
        .copied()
        .filter(|&j| p * j <= a.max_degree())
        .collect();
    for j in degrees {
        let idxs = a.module.indices_of_degree(j);
        for key in multisets(&idxs, p) {
            let mut prod = a.unit_elem();
            for &i in &key {
                prod = a.mul_elem(&prod, &elem_single(i, 1));
            }
            if !prod.is_empty() {
                out.set_mu(key, prod).expect("polarize produces valid μ");
            }
        }
    }
    out
}

/// Report of failures of the p-polar associativity laws.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct AssocReport {
    pub violations: Vec<String>,
}

impl AssocReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the associativity laws of a p-polar algebra.
///
/// Degree 0: the (2p-1)-fold expression μ(μ(x_1,…,x_p), y_2,…,y_p) must be
/// symmetric; since μ is stored on multisets, only the cross transposition
/// x_p ↔ y_2 needs checking. Positive degrees j: the 2p x-slots of
/// μ(μ(x_1,…,x_p), μ(x_{p+1},…,x_{2p}), y_3,…,y_p) must be symmetric up to
/// the sign of the permutation (for odd j); only x_p ↔ x_{p+1} is checked.
pub fn check_assoc(a: &PolarAlgebra) -> AssocReport {
    let mut rep = AssocReport::default();
    let p = a.p() as usize;
    let m = &a.module;
    let name = |i: usize| m.basis[i].name.clone();
    // degree 0
    let idx0 = m.indices_of_degree(0);
    if !idx0.is_empty() {
        for xs in multisets(&idx0, p) {
            for ys in multisets(&idx0, p - 1) {
                // left: μ(μ(x_1..x_p), y_2..y_p)
                let mut args: Vec<Elem> = vec![a.mu_basis(&xs)];
                args.extend(ys.iter().map(|&y| elem_single(y, 1)));
                let left = a.mu_elems(&args);
                // right: μ(μ(x_1..x_{p-1}, y_2), x_p, y_3..y_p)
                let mut inner: Vec<usize> = xs[..p - 1].to_vec();
                inner.push(ys[0]);
                let mut args2: Vec<Elem> = vec![a.mu_tuple(&inner)];
                args2.push(elem_single(xs[p - 1], 1));
                args2.extend(ys[1..].iter().map(|&y| elem_single(y, 1)));
                let right = a.mu_elems(&args2);
                if left != right {
                    rep.violations.push(format!(
                        "degree-0 invariance fails on x=({}) y=({})",
                        xs.iter().map(|&i| name(i)).collect::<Vec<_>>().join(","),
                        ys.iter().map(|&i| name(i)).collect::<Vec<_>>().join(","),
                    ));
                }
            }
        }
    }
    // positive degrees
    for (&j, _) in m.dims_by_degree().iter() {
        if j == 0 || p * p * j > m.max_degree {
            continue;
        }
        let idx = m.indices_of_degree(j);
        let idx_pj = m.indices_of_degree(p * j);
        let sign = if j % 2 == 1 {
            fp::neg(1, a.p())
        } else {
            1
        };
        for xs in multisets(&idx, p) {
            for xs2 in multisets(&idx, p) {
                for ys in multisets(&idx_pj, p - 2) {
                    // left: μ(μ(x), μ(x'), y…)
                    let mut args: Vec<Elem> = vec![a.mu_basis(&xs), a.mu_basis(&xs2)];
                    args.extend(ys.iter().map(|&y| elem_single(y, 1)));
                    let left = a.mu_elems(&args);
                    // right: swap x_p ↔ x'_1, with sign for odd j
                    let mut u = xs[..p - 1].to_vec();
                    u.push(xs2[0]);
                    let mut v = vec![xs[p - 1]];
                    v.extend_from_slice(&xs2[1..]);
                    let mut args2: Vec<Elem> = vec![a.mu_tuple(&u), a.mu_tuple(&v)];
                    args2.extend(ys.iter().map(|&y| elem_single(y, 1)));
                    let mut right = elem_zero();
                    elem_add_scaled(&mut right, &a.mu_elems(&args2), sign, a.p());
                    if left != right {
                        rep.violations.push(format!(
                            "degree-{j} invariance fails on x=({}) x'=({}) y=({})",
                            xs.iter().map(|&i| name(i)).collect::<Vec<_>>().join(","),
                            xs2.iter().map(|&i| name(i)).collect::<Vec<_>>().join(","),
                            ys.iter().map(|&i| name(i)).collect::<Vec<_>>().join(","),
                        ));
                    }
                }
            }
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// Monomials in a graded module's basis (used by free_polar and hull)
// ---------------------------------------------------------------------------

/// Exponent vector over a module basis.
pub type Mono = Vec<u32>;

pub fn mono_degree(m: &GradedModule, e: &Mono) -> usize {
    e.iter()
        .enumerate()
        .map(|(i, &x)| m.degree(i) * x as usize)
        .sum()
}

pub fn mono_len(e: &Mono) -> u32 {
    e.iter().sum()
}

fn mono_len0(m: &GradedModule, e: &Mono) -> u32 {
    e.iter()
        .enumerate()
        .filter(|(i, _)| m.degree(*i) == 0)
        .map(|(_, &x)| x)
        .sum()
}

pub fn mono_name(m: &GradedModule, e: &Mono) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(i, &x)| {
            if x == 1 {
                m.basis[i].name.clone()
            } else {
                format!("{}^{}", m.basis[i].name, x)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Product of two monomials in the free graded-commutative algebra on the
/// basis; `None` means zero (repeated odd letter at odd p). The sign is the
/// Koszul sign of interleaving.
pub fn mono_mul(m: &GradedModule, e1: &Mono, e2: &Mono) -> Option<(Mono, u64)> {
    let p = m.p;
    let sum: Mono = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
    if p > 2 {
        for (i, &x) in sum.iter().enumerate() {
            if m.degree(i) % 2 == 1 && x > 1 {
                return None;
            }
        }
    }
    let sign = if p == 2 {
        1
    } else {
        let odd_left: Vec<usize> = (0..e1.len())
            .filter(|&i| m.degree(i) % 2 == 1 && e1[i] > 0)
            .collect();
        let odd_right: Vec<usize> = (0..e2.len())
            .filter(|&i| m.degree(i) % 2 == 1 && e2[i] > 0)
            .collect();
        crate::graded::koszul_sign(&odd_left, &odd_right, p)
    };
    Some((sum, sign))
}

/// All monomials of total degree ≤ max_degree with at most `cap0` degree-0
/// letters (and odd letters at most once when p > 2).
fn enumerate_monos(m: &GradedModule, cap0: u32) -> BTreeMap<usize, Vec<Mono>> {
    let dim = m.dim();
    let mut by_degree: BTreeMap<usize, Vec<Mono>> = BTreeMap::new();
    let mut cur: Mono = vec![0; dim];
    fn rec(
        m: &GradedModule,
        cap0: u32,
        idx: usize,
        deg: usize,
        len0: u32,
        cur: &mut Mono,
        out: &mut BTreeMap<usize, Vec<Mono>>,
    ) {
        if idx == m.dim() {
            out.entry(deg).or_default().push(cur.clone());
            return;
        }
        let d = m.degree(idx);
        let max_by_parity = if m.p > 2 && d % 2 == 1 { 1 } else { u32::MAX };
        let mut e = 0u32;
        loop {
            let extra_deg = d * e as usize;
            let extra_len0 = if d == 0 { e } else { 0 };
            if deg + extra_deg > m.max_degree || len0 + extra_len0 > cap0 || e > max_by_parity {
                break;
            }
            cur[idx] = e;
            rec(m, cap0, idx + 1, deg + extra_deg, len0 + extra_len0, cur, out);
            e += 1;
            if d == 0 && e > cap0 {
                break;
            }
        }
        cur[idx] = 0;
    }
    rec(m, cap0, 0, 0, 0, &mut cur, &mut by_degree);
    by_degree
}

/// Collision-free rendering of a hull monomial: letters with exponent > 1
/// are bracketed ("[x]^2") so that the square of a letter `x` cannot clash
/// with a letter named `x^2`, and letters whose own names contain monomial
/// syntax ("x^2", "y*z", "1") are bracketed as well, so that e.g. the
/// product of letters `y` and `z` stays distinct from a letter named `y*z`.
fn hull_mono_name(m: &GradedModule, e: &Mono) -> String {
    let plain = |n: &str| {
        !n.is_empty() && n != "1" && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    };
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(i, &x)| {
            let n = &m.basis[i].name;
            if x == 1 {
                if plain(n) {
                    n.clone()
                } else {
                    format!("[{}]", n)
                }
            } else {
                format!("[{}]^{}", n, x)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// p-typical block of a positive degree: d = j·p^i with p ∤ j.
pub fn p_typical_block(p: u64, d: usize) -> (usize, u32) {
    assert!(d > 0);
    let mut j = d;
    let mut i = 0u32;
    while j % p as usize == 0 {
        j /= p as usize;
        i += 1;
    }
    (j, i)
}

/// Free p-polar algebra on a positively graded module, truncated at the
/// module's max degree: per p-typical block j, the basis consists of all
/// monomials in the block's generators whose total degree is j·p^N.
pub fn free_polar(m: &GradedModule) -> Result<PolarAlgebra> {
    if m.basis.iter().any(|b| b.degree == 0) {
        return Err(Error::InvalidInput(
            "free p-polar algebra needs generators in positive degrees".into(),
        ));
    }
    let p = m.p;
    // monomials whose degree is j·p^N for the block j of their letters; a
    // monomial mixing blocks can never have degree of that form relative to
    // its own letters, so enumerate all and filter per-block
    let monos = enumerate_monos(m, 0);
    let mut basis_monos: Vec<Mono> = Vec::new();
    for (&d, ms) in &monos {
        if d == 0 {
            continue;
        }
        for e in ms {
            // all letters must lie in the same block j, and the total degree
            // must be j·p^N
            let letters: Vec<usize> = (0..e.len()).filter(|&i| e[i] > 0).collect();
            let blocks: Vec<usize> = letters
                .iter()
                .map(|&i| p_typical_block(p, m.degree(i)).0)
                .collect();
            if blocks.windows(2).any(|w| w[0] != w[1]) {
                continue;
            }
            let j = blocks[0];
            if d % j != 0 {
                continue;
            }
            let mut q = d / j;
            while q % p as usize == 0 {
                q /= p as usize;
            }
            if q == 1 {
                basis_monos.push(e.clone());
            }
        }
    }
    basis_monos.sort_by_key(|e| (mono_degree(m, e), e.clone()));
    let index: HashMap<Mono, usize> = basis_monos
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();
    let basis: Vec<BasisElem> = basis_monos
        .iter()
        .map(|e| BasisElem {
            name: mono_name(m, e),
            degree: mono_degree(m, e),
        })
        .collect();
    let module = GradedModule::new(p, m.max_degree, basis)?;
    let mut out = PolarAlgebra::new(module);
    // μ on p equal-degree basis monomials = merged monomial (with sign)
    let degrees: Vec<usize> = out.module.dims_by_degree().keys().copied().collect();
    for j in degrees {
        if p as usize * j > m.max_degree {
            continue;
        }
        let idxs = out.module.indices_of_degree(j);
        for key in multisets(&idxs, p as usize) {
            let mut acc: Option<(Mono, u64)> = Some((vec![0; m.dim()], 1));
            for &bi in &key {
                acc = acc.and_then(|(e, s)| {
                    mono_mul(m, &e, &basis_monos[bi]).map(|(e2, s2)| (e2, fp::mul(s, s2, p)))
                });
            }
            if let Some((e, s)) = acc {
                if let Some(&target) = index.get(&e) {
                    out.set_mu(key, elem_single(target, s))?;
                }
            }
        }
    }
    Ok(out)
}

/// Split a p-polar algebra into its degree-0 part and p-typical components
/// A_(j) = ⊕_i A_{jp^i} for p ∤ j. Reassembling the factors reproduces A.
pub fn p_typical_split(a: &PolarAlgebra) -> (PolarAlgebra, BTreeMap<usize, PolarAlgebra>) {
    let p = a.p();
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..a.module.dim() {
        let d = a.module.degree(i);
        let key = if d == 0 { 0 } else { p_typical_block(p, d).0 };
        groups.entry(key).or_default().push(i);
    }
    let build = |idxs: &[usize]| -> PolarAlgebra {
        let old_to_new: HashMap<usize, usize> =
            idxs.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let basis: Vec<BasisElem> = idxs.iter().map(|&i| a.module.basis[i].clone()).collect();
        let module = GradedModule::new(p, a.max_degree(), basis).expect("sub-basis is valid");
        let mut sub = PolarAlgebra::new(module);
        for (key, val) in a.mu_entries() {
            if !key.iter().all(|i| old_to_new.contains_key(i)) {
                continue;
            }
            let new_key: Vec<usize> = key.iter().map(|i| old_to_new[i]).collect();
            let new_val: Elem = val
                .iter()
                .filter_map(|(k, &c)| old_to_new.get(k).map(|&n| (n, c)))
                .collect();
            sub.set_mu(new_key, new_val).expect("restricted μ is valid");
        }
        sub
    };
    let zero_part = build(groups.get(&0).map(Vec::as_slice).unwrap_or(&[]));
    let mut blocks = BTreeMap::new();
    for (&j, idxs) in &groups {
        if j == 0 {
            continue;
        }
        blocks.insert(j, build(idxs));
    }
    (zero_part, blocks)
}

// ---------------------------------------------------------------------------
// Hull
// ---------------------------------------------------------------------------

struct DegreeData {
    monos: Vec<Mono>,
    index: HashMap<Mono, usize>,
    span: Span,
    /// non-pivot columns = surviving monomials
    free_cols: Vec<usize>,
    basis_offset: usize,
}

/// The hull (enveloping commutative algebra) of a p-polar algebra:
/// Sym(A) / (x_1⋯x_p − μ(x_1,…,x_p)), computed degreewise below the degree
/// truncation, together with the unit map u: A → pol(hull(A)).
pub struct Hull {
    pub algebra: GradedAlgebra,
    /// image of each source basis element under u
    pub unit_map: Vec<Elem>,
    /// representative monomial per hull basis element (over the source basis)
    pub basis_monomials: Vec<Mono>,
    source: PolarAlgebra,
    degrees: BTreeMap<usize, DegreeData>,
    cap0: u32,
}

fn quotient_spans(a: &PolarAlgebra, cap0: u32) -> BTreeMap<usize, DegreeData> {
    let p = a.p();
    let pu = p as usize;
    let m = &a.module;
    let mut monos = enumerate_monos(m, cap0);
    // longer monomials first, so relation pivots consume them and the
    // surviving quotient basis prefers short monomials
    for ms in monos.values_mut() {
        ms.sort_by(|x, y| mono_len(y).cmp(&mono_len(x)).then(x.cmp(y)));
    }
    // relations: monomial(x_1..x_p) − μ(x_1..x_p) per sorted equal-degree
    // multiset
    struct Rel {
        degree: usize,
        mono: Option<Mono>, // None: zero in Sym (repeated odd letter)
        value: Elem,
    }
    let mut rels: Vec<Rel> = Vec::new();
    for (&j, _) in m.dims_by_degree().iter() {
        if pu * j > m.max_degree {
            continue;
        }
        let idxs = m.indices_of_degree(j);
        for key in multisets(&idxs, pu) {
            let mut e = vec![0u32; m.dim()];
            for &i in &key {
                e[i] += 1;
            }
            let valid = !(p > 2
                && e.iter()
                    .enumerate()
                    .any(|(i, &x)| m.degree(i) % 2 == 1 && x > 1));
            let value = a.mu_basis(&key);
            if !valid && value.is_empty() {
                continue;
            }
            rels.push(Rel {
                degree: pu * j,
                mono: valid.then_some(e),
                value,
            });
        }
    }
    let mut out = BTreeMap::new();
    let all_degrees: Vec<usize> = monos.keys().copied().collect();
    for d in all_degrees {
        let ms = &monos[&d];
        let index: HashMap<Mono, usize> = ms.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut span = Span::new(p, ms.len());
        for rel in &rels {
            if rel.degree > d {
                continue;
            }
            let Some(rest) = monos.get(&(d - rel.degree)) else {
                continue;
            };
            'mult: for mmul in rest {
                let mut vec = vec![0u64; ms.len()];
                if let Some(rm) = &rel.mono {
                    match mono_mul(m, rm, mmul) {
                        Some((prod, sign)) => {
                            if mono_len0(m, &prod) > cap0 {
                                continue 'mult; // outside the window
                            }
                            vec[index[&prod]] = fp::add(vec[index[&prod]], sign, p);
                        }
                        None => {} // zero in Sym
                    }
                }
                for (&k, &c) in &rel.value {
                    let mut ek = vec![0u32; m.dim()];
                    ek[k] = 1;
                    match mono_mul(m, &ek, mmul) {
                        Some((prod, sign)) => {
                            if mono_len0(m, &prod) > cap0 {
                                continue 'mult;
                            }
                            let coef = fp::neg(fp::mul(c, sign, p), p);
                            vec[index[&prod]] = fp::add(vec[index[&prod]], coef, p);
                        }
                        None => {}
                    }
                }
                span.insert(&vec);
            }
        }
        let free_cols = span.free_columns();
        out.insert(
            d,
            DegreeData {
                monos: ms.clone(),
                index,
                span,
                free_cols,
                basis_offset: 0,
            },
        );
    }
    out
}

fn quotient_dims(dd: &BTreeMap<usize, DegreeData>) -> BTreeMap<usize, usize> {
    dd.iter().map(|(&d, v)| (d, v.free_cols.len())).collect()
}

/// Build the hull of a p-polar algebra.
///
/// When A has a degree-0 part, Sym(A) is infinite-dimensional in each degree;
/// every monomial with ≥ p degree-0 letters reduces via the relations, so the
/// computation runs in a window of bounded degree-0 length, enlarged until
/// the quotient dimensions stabilize.
pub fn hull(a: &PolarAlgebra) -> Result<Hull> {
    a.validate()?;
    let p = a.p() as u32;
    let has_deg0 = !a.module.indices_of_degree(0).is_empty();
    let mut cap0 = if has_deg0 { 2 * p - 2 } else { 0 };
    let mut degrees = quotient_spans(a, cap0);
    if has_deg0 {
        let mut stable = 0;
        let mut dims = quotient_dims(&degrees);
        while stable < 2 && cap0 < 2 * p - 2 + 3 * p {
            let next = quotient_spans(a, cap0 + 1);
            let next_dims = quotient_dims(&next);
            // compare on the smaller window's degrees
            let agree = dims
                .iter()
                .all(|(d, &n)| next_dims.get(d).copied().unwrap_or(0) == n);
            if agree {
                stable += 1;
            } else {
                stable = 0;
            }
            cap0 += 1;
            degrees = next;
            dims = next_dims;
        }
    }
    build_hull(a, degrees, cap0)
}

fn build_hull(a: &PolarAlgebra, mut degrees: BTreeMap<usize, DegreeData>, cap0: u32) -> Result<Hull> {
    let p = a.p();
    let m = &a.module;
    let mut basis: Vec<BasisElem> = Vec::new();
    let mut basis_monomials: Vec<Mono> = Vec::new();
    for (&d, dd) in degrees.iter_mut() {
        dd.basis_offset = basis.len();
        for &c in &dd.free_cols {
            let e = &dd.monos[c];
            basis.push(BasisElem {
                name: hull_mono_name(m, e),
                degree: d,
            });
            basis_monomials.push(e.clone());
        }
    }
    let module = GradedModule::new(p, m.max_degree, basis)?;
    let unit = basis_monomials
        .iter()
        .position(|e| e.iter().all(|&x| x == 0))
        .expect("empty monomial survives in the hull");
    let mut hull = Hull {
        algebra: GradedAlgebra::new(module, unit, HashMap::new()),
        unit_map: Vec::new(),
        basis_monomials,
        source: a.clone(),
        degrees,
        cap0,
    };
    // products of quotient-basis representatives
    let mut products = HashMap::new();
    let n = hull.basis_monomials.len();
    for i in 0..n {
        let di = hull.algebra.module.degree(i);
        for j in 0..n {
            let dj = hull.algebra.module.degree(j);
            if di + dj > m.max_degree {
                continue;
            }
            let mut out = elem_zero();
            if let Some((prod, sign)) =
                mono_mul(m, &hull.basis_monomials[i], &hull.basis_monomials[j])
            {
                hull.reduce_mono(&prod, sign, &mut out);
            }
            if !out.is_empty() {
                products.insert((i, j), out);
            }
        }
    }
    hull.algebra = GradedAlgebra::new(hull.algebra.module.clone(), unit, products);
    // unit map
    for k in 0..m.dim() {
        let mut e = vec![0u32; m.dim()];
        e[k] = 1;
        let mut img = elem_zero();
        hull.reduce_mono(&e, 1, &mut img);
        hull.unit_map.push(img);
    }
    Ok(hull)
}

impl Hull {
    /// Add `coef`·(class of the monomial) into `out`, rewriting monomials
    /// with too many degree-0 letters through μ.
    fn reduce_mono(&self, e: &Mono, coef: u64, out: &mut Elem) {
        let p = self.source.p();
        let m = &self.source.module;
        let d = mono_degree(m, e);
        if d > m.max_degree || coef == 0 {
            return;
        }
        if mono_len0(m, e) > self.cap0 {
            // extract the first p degree-0 letters and fuse them via μ
            let mut rest = e.clone();
            let mut letters = Vec::new();
            'outer: for i in 0..rest.len() {
                if m.degree(i) != 0 {
                    continue;
                }
                while rest[i] > 0 {
                    letters.push(i);
                    rest[i] -= 1;
                    if letters.len() == p as usize {
                        break 'outer;
                    }
                }
            }
            let val = self.source.mu_basis(&letters);
            for (&k, &c) in &val {
                let mut e2 = rest.clone();
                e2[k] += 1;
                self.reduce_mono(&e2, fp::mul(coef, c, p), out);
            }
            return;
        }
        let dd = &self.degrees[&d];
        let mut v = vec![0u64; dd.monos.len()];
        v[dd.index[e]] = coef;
        let q = dd.span.quotient_coords(&v);
        for (local, &c) in q.iter().enumerate() {
            if c != 0 {
                let global = dd.basis_offset + local;
                elem_add_scaled(out, &elem_single(global, 1), c, p);
            }
        }
    }

    /// Image of a source element under u: A → pol(hull(A)).
    pub fn image(&self, e: &Elem) -> Elem {
        let p = self.source.p();
        let mut out = elem_zero();
        for (&i, &c) in e {
            elem_add_scaled(&mut out, &self.unit_map[i], c, p);
        }
        out
    }

    /// Preimage of a hull element under u, if it lies in the image of A.
    pub fn preimage(&self, h: &Elem) -> Option<Elem> {
        let p = self.source.p();
        // split by degree and solve degreewise
        let mut by_degree: BTreeMap<usize, Elem> = BTreeMap::new();
        for (&i, &c) in h {
            by_degree
                .entry(self.algebra.module.degree(i))
                .or_default()
                .insert(i, c);
        }
        let mut out = elem_zero();
        for (d, part) in by_degree {
            let src = self.source.module.indices_of_degree(d);
            let tgt = self.algebra.module.indices_of_degree(d);
            let tgt_pos: HashMap<usize, usize> =
                tgt.iter().enumerate().map(|(r, &i)| (i, r)).collect();
            let mut mat = FpMatrix::zero(p, tgt.len(), src.len());
            for (c, &k) in src.iter().enumerate() {
                for (&i, &v) in &self.unit_map[k] {
                    mat.set(tgt_pos[&i], c, v);
                }
            }
            let mut b = vec![0u64; tgt.len()];
            for (&i, &v) in &part {
                b[tgt_pos[&i]] = v;
            }
            let x = mat.solve(&b)?;
            for (c, &k) in src.iter().enumerate() {
                if x[c] != 0 {
                    out.insert(k, x[c]);
                }
            }
        }
        // verify (solve gives a solution of the linear system; confirm)
        if self.image(&out) == *h {
            Some(out)
        } else {
            None
        }
    }
}

/// A p-polar algebra is p-polar (a subobject of a polarization) iff the unit
/// map u: A → pol(hull(A)) is injective in all degrees ≤ D.
pub fn is_p_polar(a: &PolarAlgebra) -> Result<bool> {
    let h = hull(a)?;
    let p = a.p();
    for (&d, _) in a.module.dims_by_degree().iter() {
        let src = a.module.indices_of_degree(d);
        let tgt = h.algebra.module.indices_of_degree(d);
        let tgt_pos: HashMap<usize, usize> = tgt.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let mut mat = FpMatrix::zero(p, tgt.len(), src.len());
        for (c, &k) in src.iter().enumerate() {
            for (&i, &v) in &h.unit_map[k] {
                mat.set(tgt_pos[&i], c, v);
            }
        }
        if mat.rank() < src.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{make_preset, Generator, Preset};

    fn truncated_poly(p: u64, d: usize, deg: usize, nil: usize) -> GradedAlgebra {
        make_preset(Preset::TruncatedPolynomial {
            p,
            max_degree: d,
            gens: vec![Generator {
                name: "x".into(),
                degree: deg,
                nil_power: Some(nil),
            }],
        })
        .unwrap()
    }

    #[test]
    fn polarize_truncated_poly() {
        let b = truncated_poly(3, 8, 2, 4);
        let a = polarize(&b);
        let x = a.module.index_of("x").unwrap();
        let x3 = a.module.index_of("x^3").unwrap();
        assert_eq!(a.mu_basis(&[x, x, x]), elem_single(x3, 1));
        let x2 = a.module.index_of("x^2").unwrap();
        assert!(a.mu_basis(&[x2, x2, x2]).is_empty());
        assert!(check_assoc(&a).is_empty());
        assert!(is_p_polar(&a).unwrap());
    }

    #[test]
    fn odd_generator_mu_vanishes() {
        let b = make_preset(Preset::Exterior {
            p: 5,
            max_degree: 20,
            gens: vec![("x".into(), 3)],
        })
        .unwrap();
        let a = polarize(&b);
        assert!(a.mu_entries().iter().all(|(k, _)| {
            // only the unit's μ can be nonzero
            k.iter().all(|&i| a.module.degree(i) == 0)
        }));
    }

    #[test]
    fn free_polar_single_even_generator() {
        let m = GradedModule::new(
            3,
            54,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let a = free_polar(&m).unwrap();
        let names: Vec<&str> = a.module.basis.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, vec!["x", "x^3", "x^9", "x^27"]);
        let degs: Vec<usize> = a.module.basis.iter().map(|b| b.degree).collect();
        assert_eq!(degs, vec![2, 6, 18, 54]);
        for i in 0..3 {
            assert_eq!(a.mu_basis(&[i, i, i]), elem_single(i + 1, 1));
        }
        assert!(check_assoc(&a).is_empty());
        assert!(is_p_polar(&a).unwrap());
    }

    #[test]
    fn free_polar_single_odd_generator() {
        let m = GradedModule::new(
            5,
            50,
            vec![BasisElem {
                name: "x".into(),
                degree: 3,
            }],
        )
        .unwrap();
        let a = free_polar(&m).unwrap();
        assert_eq!(a.module.dim(), 1);
        assert!(a.mu_entries().is_empty());
    }

    #[test]
    fn free_polar_rejects_degree_zero() {
        let m = GradedModule::new(
            3,
            6,
            vec![BasisElem {
                name: "e".into(),
                degree: 0,
            }],
        )
        .unwrap();
        assert!(free_polar(&m).is_err());
    }

    #[test]
    fn free_polar_two_generators_p2() {
        let m = GradedModule::new(
            2,
            8,
            vec![
                BasisElem {
                    name: "x".into(),
                    degree: 2,
                },
                BasisElem {
                    name: "y".into(),
                    degree: 2,
                },
            ],
        )
        .unwrap();
        let a = free_polar(&m).unwrap();
        // degree 2: x, y; degree 4: x^2, x*y, y^2; degree 8: the four
        // Sym^2-monomials in the degree-4 ones that are products of two:
        // x^4, x^3y? — degree 8 = 2·2^2, monomials of degree 8: x^4, x^3*y,
        // x^2*y^2, x*y^3, y^4
        let dims = a.module.dims_by_degree();
        assert_eq!(dims[&2], 2);
        assert_eq!(dims[&4], 3);
        assert_eq!(dims[&8], 5);
        assert_eq!(dims.get(&6), None); // 6 = 2·3 is not 2·2^i
        assert!(check_assoc(&a).is_empty());
    }

    #[test]
    fn hull_of_free_polar_recovers_polynomial_ring() {
        let m = GradedModule::new(
            3,
            18,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let a = free_polar(&m).unwrap();
        let h = hull(&a).unwrap();
        let dims = h.algebra.module.dims_by_degree();
        for d in (0..=18).step_by(2) {
            assert_eq!(dims.get(&d).copied().unwrap_or(0), 1, "degree {d}");
        }
        assert!(is_p_polar(&a).unwrap());
    }

    #[test]
    fn hull_of_zero_mu() {
        let m = GradedModule::new(
            3,
            6,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let a = PolarAlgebra::new(m);
        let h = hull(&a).unwrap();
        let dims = h.algebra.module.dims_by_degree();
        assert_eq!(dims.get(&0).copied().unwrap_or(0), 1);
        assert_eq!(dims.get(&2).copied().unwrap_or(0), 1);
        assert_eq!(dims.get(&4).copied().unwrap_or(0), 1);
        assert_eq!(dims.get(&6).copied().unwrap_or(0), 0); // x^3 = μ = 0
    }

    #[test]
    fn hull_degree_zero_unit_algebra() {
        // carrier of W_n(F_p): one degree-0 element e with μ(e,…,e) = e;
        // hull_0 = F_p[e]/(e^p − e)
        for p in [2u64, 3] {
            let m = GradedModule::new(
                p,
                4,
                vec![BasisElem {
                    name: "e".into(),
                    degree: 0,
                }],
            )
            .unwrap();
            let mut a = PolarAlgebra::new(m);
            a.set_mu(vec![0; p as usize], elem_single(0, 1)).unwrap();
            let h = hull(&a).unwrap();
            assert_eq!(
                h.algebra.module.indices_of_degree(0).len(),
                p as usize,
                "p = {p}"
            );
            assert!(is_p_polar(&a).unwrap());
            assert!(crate::graded::check_algebra(&h.algebra).is_empty());
        }
    }

    #[test]
    fn hull_of_polarization_surjects_onto_source() {
        let b = truncated_poly(3, 8, 2, 4);
        let a = polarize(&b);
        let h = hull(&a).unwrap();
        assert!(is_p_polar(&a).unwrap());
        // evaluate each hull basis monomial in B; the classes must span B
        let p = b.p();
        let mut span = Span::new(p, b.module.dim());
        for e in &h.basis_monomials {
            let mut prod = b.unit_elem();
            for (i, &x) in e.iter().enumerate() {
                for _ in 0..x {
                    prod = b.mul_elem(&prod, &elem_single(i, 1));
                }
            }
            let mut v = vec![0u64; b.module.dim()];
            for (&i, &c) in &prod {
                v[i] = c;
            }
            span.insert(&v);
        }
        assert_eq!(span.rank(), b.module.dim());
    }

    #[test]
    fn hull_stable_under_enlarging_truncation() {
        let small = GradedModule::new(
            3,
            18,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let large = GradedModule::new(
            3,
            54,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let ds = hull(&free_polar(&small).unwrap()).unwrap();
        let dl = hull(&free_polar(&large).unwrap()).unwrap();
        let dims_s = ds.algebra.module.dims_by_degree();
        let dims_l = dl.algebra.module.dims_by_degree();
        for d in 0..=18 {
            assert_eq!(
                dims_s.get(&d).copied().unwrap_or(0),
                dims_l.get(&d).copied().unwrap_or(0),
                "degree {d}"
            );
        }
    }

    /// Basis a, b in degree 2, u in degree 6, w in degree 18 over F_3.
    fn two_generator_skeleton() -> PolarAlgebra {
        let m = GradedModule::new(
            3,
            18,
            vec![
                BasisElem {
                    name: "a".into(),
                    degree: 2,
                },
                BasisElem {
                    name: "b".into(),
                    degree: 2,
                },
                BasisElem {
                    name: "u".into(),
                    degree: 6,
                },
                BasisElem {
                    name: "w".into(),
                    degree: 18,
                },
            ],
        )
        .unwrap();
        PolarAlgebra::new(m)
    }

    #[test]
    fn check_assoc_catches_cross_swap_violation() {
        let mut a = two_generator_skeleton();
        a.set_mu(vec![0, 0, 0], elem_single(2, 1)).unwrap(); // μ(a,a,a) = u
        a.set_mu(vec![0, 0, 1], elem_single(2, 1)).unwrap(); // μ(a,a,b) = u
        a.set_mu(vec![2, 2, 2], elem_single(3, 1)).unwrap(); // μ(u,u,u) = w
        let rep = check_assoc(&a);
        assert!(!rep.is_empty());
        assert!(rep.violations.iter().any(|v| v.contains("degree-2")));
        // and the hull collapses: u is no longer injective
        assert!(!is_p_polar(&a).unwrap());
    }

    #[test]
    fn check_assoc_passes_on_consistent_mu() {
        let mut a = two_generator_skeleton();
        a.set_mu(vec![0, 0, 0], elem_single(2, 1)).unwrap(); // μ(a,a,a) = u
        a.set_mu(vec![2, 2, 2], elem_single(3, 1)).unwrap(); // μ(u,u,u) = w
        assert!(check_assoc(&a).is_empty());
        assert!(is_p_polar(&a).unwrap());
    }

    #[test]
    fn zero_mu_passes_check_assoc() {
        let a = two_generator_skeleton();
        assert!(check_assoc(&a).is_empty());
    }

    #[test]
    fn split_blocks_of_polynomial_ring() {
        let m = GradedModule::new(
            3,
            54,
            vec![Generator {
                name: "x".into(),
                degree: 2,
                nil_power: Some(28),
            }]
            .iter()
            .map(|g| BasisElem {
                name: g.name.clone(),
                degree: g.degree,
            })
            .collect::<Vec<_>>(),
        )
        .unwrap();
        let _ = m;
        let b = truncated_poly(3, 54, 2, 28);
        let a = polarize(&b);
        let (zero, blocks) = p_typical_split(&a);
        assert_eq!(zero.module.dim(), 1); // the unit
        // x^m has degree 2m; block j where 2m = j·3^i, 3 ∤ j
        let block2 = &blocks[&2];
        let names: Vec<&str> = block2.module.basis.iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, vec!["x", "x^3", "x^9", "x^27"]);
        // every basis element is in exactly one part
        let total: usize =
            zero.module.dim() + blocks.values().map(|b| b.module.dim()).sum::<usize>();
        assert_eq!(total, a.module.dim());
        // reassembly: every μ entry of A appears in one of the parts
        let mu_total: usize = std::iter::once(&zero)
            .chain(blocks.values())
            .map(|b| b.mu_entries().len())
            .sum();
        assert_eq!(mu_total, a.mu_entries().len());
        for b in blocks.values() {
            assert!(check_assoc(b).is_empty());
        }
    }

    #[test]
    fn preimage_round_trip() {
        let m = GradedModule::new(
            3,
            18,
            vec![BasisElem {
                name: "x".into(),
                degree: 2,
            }],
        )
        .unwrap();
        let a = free_polar(&m).unwrap();
        let h = hull(&a).unwrap();
        for i in 0..a.module.dim() {
            let img = h.image(&elem_single(i, 1));
            let back = h.preimage(&img).unwrap();
            assert_eq!(back, elem_single(i, 1));
        }
        // an element outside the image has no preimage: x^2 (degree 4) is in
        // the hull but A has nothing in degree 4
        let x2 = h.algebra.module.index_of("[x]^2").unwrap();
        assert!(h.preimage(&elem_single(x2, 1)).is_none());
    }
}
