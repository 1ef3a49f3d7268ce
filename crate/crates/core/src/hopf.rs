//! Truncated graded bicommutative Hopf algebras over F_p.
//!
//! A Hopf algebra is a [`GradedAlgebra`] together with coproduct structure
//! constants. All algebras here are connected (the degree-0 part is spanned
//! by the unit), hence conilpotent, and the counit is the dual basis vector
//! of the unit.
//!
//! Provided constructions: the symmetric tensor coalgebra on a graded
//! module, the cofree conilpotent Hopf algebra `cof_u(A)` on an augmented
//! algebra (quasi-shuffle product), primitively generated exterior algebras,
//! and the Witt-comultiplication polynomial Hopf algebras `lambda_p`.
//! `verify_cofree` decides cofreeness at the truncation by a dimension-count
//! criterion, and `counterexample_pair` produces a matched pair of Hopf
//! algebras with equal dimensions of which exactly one is cofree.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fmodule::{decompose, FModule};
use crate::fp;
use crate::graded::{
    check_algebra, elem_add_scaled, elem_single, elem_zero, BasisElem, Elem, GradedAlgebra,
    GradedModule, Generator,
};
use crate::intpoly::RingOps;
use crate::matrix::{FpMatrix, Span};
use crate::witt::witt_sum_polys;
use num_bigint::BigInt;

/// Sparse element of the tensor square H ⊗ H, indexed by basis pairs.
pub type TensorElem = BTreeMap<(usize, usize), u64>;

pub fn tensor_zero() -> TensorElem {
    BTreeMap::new()
}

pub fn tensor_single(i: usize, j: usize, c: u64) -> TensorElem {
    let mut t = BTreeMap::new();
    if c != 0 {
        t.insert((i, j), c);
    }
    t
}

pub fn tensor_add_scaled(target: &mut TensorElem, src: &TensorElem, scale: u64, p: u64) {
    for (&k, &c) in src {
        let v = fp::add(*target.get(&k).unwrap_or(&0), fp::mul(c, scale, p), p);
        if v == 0 {
            target.remove(&k);
        } else {
            target.insert(k, v);
        }
    }
}

/// Multiplication in H ⊗ H with the Koszul sign: (x1⊗x2)(y1⊗y2) =
/// (−1)^{|x2||y1|} x1y1 ⊗ x2y2.
pub fn tensor_mul(alg: &GradedAlgebra, a: &TensorElem, b: &TensorElem) -> TensorElem {
    let p = alg.p();
    let m = &alg.module;
    let mut out = tensor_zero();
    for (&(i1, i2), &c1) in a {
        for (&(j1, j2), &c2) in b {
            let sign = if m.degree(i2) % 2 == 1 && m.degree(j1) % 2 == 1 {
                fp::neg(1, p)
            } else {
                1
            };
            let left = alg.basis_product(i1, j1);
            let right = alg.basis_product(i2, j2);
            let c = fp::mul(fp::mul(c1, c2, p), sign, p);
            for (&k1, &cl) in &left {
                for (&k2, &cr) in &right {
                    let coeff = fp::mul(fp::mul(cl, cr, p), c, p);
                    tensor_add_scaled(&mut out, &tensor_single(k1, k2, 1), coeff, p);
                }
            }
        }
    }
    out
}

/// Ring adapter so integer polynomials (Witt addition laws) can be evaluated
/// in the tensor square of an algebra.
pub struct TensorRing<'a>(pub &'a GradedAlgebra);

impl RingOps<TensorElem> for TensorRing<'_> {
    fn zero(&self) -> TensorElem {
        tensor_zero()
    }
    fn one(&self) -> TensorElem {
        tensor_single(self.0.unit, self.0.unit, 1)
    }
    fn add(&self, a: &TensorElem, b: &TensorElem) -> TensorElem {
        let mut out = a.clone();
        tensor_add_scaled(&mut out, b, 1, self.0.p());
        out
    }
    fn mul(&self, a: &TensorElem, b: &TensorElem) -> TensorElem {
        tensor_mul(self.0, a, b)
    }
    fn int_scale(&self, c: &BigInt, a: &TensorElem) -> TensorElem {
        let c = fp::reduce_bigint(c, self.0.p());
        let mut out = tensor_zero();
        tensor_add_scaled(&mut out, a, c, self.0.p());
        out
    }
}

/// Structural flags of a Hopf algebra, computed from the structure constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HopfFlags {
    pub commutative: bool,
    pub cocommutative: bool,
    pub conilpotent: bool,
}

/// Graded bialgebra presented by product and coproduct structure constants,
/// truncated at the algebra's maximum degree.
#[derive(Clone, Debug)]
pub struct HopfAlgebra {
    pub algebra: GradedAlgebra,
    /// `coproducts[i]` is Δ of the i-th basis element.
    pub coproducts: Vec<TensorElem>,
}

impl HopfAlgebra {
    /// Light validation: shapes, homogeneity and the counit axiom. Full
    /// axioms (coassociativity, bialgebra compatibility) via [`check_hopf`].
    pub fn new(algebra: GradedAlgebra, coproducts: Vec<TensorElem>) -> Result<HopfAlgebra> {
        let m = &algebra.module;
        if coproducts.len() != m.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} coproducts, got {}",
                m.dim(),
                coproducts.len()
            )));
        }
        let h = HopfAlgebra {
            algebra,
            coproducts,
        };
        for i in 0..h.dim() {
            let d = h.algebra.module.degree(i);
            for (&(j, k), _) in &h.coproducts[i] {
                if h.algebra.module.degree(j) + h.algebra.module.degree(k) != d {
                    return Err(Error::InvalidInput(format!(
                        "coproduct of {} is not homogeneous",
                        h.algebra.module.basis[i].name
                    )));
                }
            }
        }
        if let Some(v) = h.counit_violation() {
            return Err(Error::InvalidInput(v));
        }
        Ok(h)
    }

    pub fn p(&self) -> u64 {
        self.algebra.p()
    }

    pub fn max_degree(&self) -> usize {
        self.algebra.max_degree()
    }

    pub fn dim(&self) -> usize {
        self.algebra.module.dim()
    }

    /// Connectedness: the degree-0 part is spanned by the unit alone.
    pub fn is_connected(&self) -> bool {
        self.algebra.module.indices_of_degree(0) == vec![self.algebra.unit]
            && self.algebra.module.degree(self.algebra.unit) == 0
    }

    fn counit_violation(&self) -> Option<String> {
        let m = &self.algebra.module;
        if !self.is_connected() {
            return Some("degree-0 part is not spanned by the unit".into());
        }
        let unit = self.algebra.unit;
        for i in 0..self.dim() {
            // (ε⊗id)Δ = id and (id⊗ε)Δ = id
            let mut left = elem_zero();
            let mut right = elem_zero();
            for (&(j, k), &c) in &self.coproducts[i] {
                if j == unit {
                    elem_add_scaled(&mut left, &elem_single(k, 1), c, self.p());
                }
                if k == unit {
                    elem_add_scaled(&mut right, &elem_single(j, 1), c, self.p());
                }
            }
            let id = elem_single(i, 1);
            if left != id || right != id {
                return Some(format!("counit axiom fails on {}", m.basis[i].name));
            }
        }
        None
    }

    pub fn coproduct_elem(&self, e: &Elem) -> TensorElem {
        let mut out = tensor_zero();
        for (&i, &c) in e {
            tensor_add_scaled(&mut out, &self.coproducts[i], c, self.p());
        }
        out
    }

    /// Reduced coproduct Δ(x) − x⊗1 − 1⊗x of a basis element.
    pub fn reduced_coproduct(&self, i: usize) -> TensorElem {
        let unit = self.algebra.unit;
        let p = self.p();
        let mut out = self.coproducts[i].clone();
        tensor_add_scaled(&mut out, &tensor_single(i, unit, 1), fp::neg(1, p), p);
        tensor_add_scaled(&mut out, &tensor_single(unit, i, 1), fp::neg(1, p), p);
        out
    }

    pub fn is_cocommutative(&self) -> bool {
        let m = &self.algebra.module;
        let p = self.p();
        for cop in &self.coproducts {
            let mut flipped = tensor_zero();
            for (&(j, k), &c) in cop {
                let sign = if m.degree(j) % 2 == 1 && m.degree(k) % 2 == 1 {
                    fp::neg(1, p)
                } else {
                    1
                };
                tensor_add_scaled(&mut flipped, &tensor_single(k, j, 1), fp::mul(c, sign, p), p);
            }
            if &flipped != cop {
                return false;
            }
        }
        true
    }

    /// For connected coalgebras satisfying the counit axiom the reduced
    /// coproduct strictly lowers both tensor degrees, so conilpotence is
    /// equivalent to every reduced coproduct having positive-degree
    /// components only (which we verify directly).
    pub fn is_conilpotent(&self) -> bool {
        if !self.is_connected() {
            return false;
        }
        let m = &self.algebra.module;
        for i in 0..self.dim() {
            if i == self.algebra.unit {
                continue;
            }
            for (&(j, k), _) in &self.reduced_coproduct(i) {
                if m.degree(j) == 0 || m.degree(k) == 0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_commutative(&self) -> bool {
        // graded commutativity is part of the algebra checker
        check_algebra(&self.algebra)
            .violations
            .iter()
            .all(|v| !v.contains("commutativity"))
    }

    pub fn flags(&self) -> HopfFlags {
        HopfFlags {
            commutative: self.is_commutative(),
            cocommutative: self.is_cocommutative(),
            conilpotent: self.is_conilpotent(),
        }
    }
}

/// Report of Hopf-axiom violations; empty iff the input is a valid connected
/// bicommutative bialgebra at the truncation.
#[derive(Clone, Debug, Default, Serialize)]
pub struct HopfReport {
    pub violations: Vec<String>,
}

impl HopfReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check algebra axioms, counit, coassociativity, cocommutativity and
/// bialgebra compatibility Δ(xy) = Δ(x)Δ(y), all within the truncation.
pub fn check_hopf(h: &HopfAlgebra) -> HopfReport {
    let mut rep = HopfReport::default();
    rep.violations
        .extend(check_algebra(&h.algebra).violations.into_iter());
    let m = &h.algebra.module;
    let p = h.p();
    if let Some(v) = h.counit_violation() {
        rep.violations.push(v);
    }
    // coassociativity as an identity of 3-tensors
    for i in 0..h.dim() {
        let mut lhs: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
        let mut rhs: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
        for (&(a, b), &c) in &h.coproducts[i] {
            for (&(a1, a2), &c2) in &h.coproducts[a] {
                let v = lhs.entry((a1, a2, b)).or_insert(0);
                *v = fp::add(*v, fp::mul(c, c2, p), p);
            }
            for (&(b1, b2), &c2) in &h.coproducts[b] {
                let v = rhs.entry((a, b1, b2)).or_insert(0);
                *v = fp::add(*v, fp::mul(c, c2, p), p);
            }
        }
        lhs.retain(|_, v| *v != 0);
        rhs.retain(|_, v| *v != 0);
        if lhs != rhs {
            rep.violations
                .push(format!("coassociativity fails on {}", m.basis[i].name));
        }
    }
    if !h.is_cocommutative() {
        rep.violations.push("coproduct is not cocommutative".into());
    }
    if !h.is_conilpotent() {
        rep.violations.push("coalgebra is not conilpotent".into());
    }
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            if m.degree(i) + m.degree(j) > h.max_degree() {
                continue;
            }
            let lhs = h.coproduct_elem(&h.algebra.basis_product(i, j));
            let rhs = tensor_mul(&h.algebra, &h.coproducts[i], &h.coproducts[j]);
            if lhs != rhs {
                rep.violations.push(format!(
                    "bialgebra compatibility fails on ({}, {})",
                    m.basis[i].name, m.basis[j].name
                ));
            }
        }
    }
    rep
}

/// The space of primitives P(H) = ker(reduced Δ), with its embedding.
#[derive(Clone, Debug)]
pub struct Primitives {
    /// Abstract module with one basis element per primitive, named `p{d}_{k}`.
    pub module: GradedModule,
    /// `vectors[i]` is the image of the i-th primitive basis element in H.
    pub vectors: Vec<Elem>,
}

/// Degreewise kernel of the reduced coproduct, in positive degrees.
pub fn primitives(h: &HopfAlgebra) -> Result<Primitives> {
    let m = &h.algebra.module;
    let p = h.p();
    let mut basis = Vec::new();
    let mut vectors = Vec::new();
    for d in 1..=h.max_degree() {
        let cols = m.indices_of_degree(d);
        if cols.is_empty() {
            continue;
        }
        // rows of the matrix of reduced Δ restricted to degree d
        let mut row_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut entries: Vec<((usize, usize), usize, u64)> = Vec::new();
        for (ci, &i) in cols.iter().enumerate() {
            for (&pair, &c) in &h.reduced_coproduct(i) {
                let next = row_index.len();
                let r = *row_index.entry(pair).or_insert(next);
                let _ = r;
                entries.push((pair, ci, c));
            }
        }
        let mut mat = FpMatrix::zero(p, row_index.len(), cols.len());
        for (pair, ci, c) in entries {
            let r = row_index[&pair];
            mat.set(r, ci, fp::add(mat.get(r, ci), c, p));
        }
        let (_, kernel) = mat.rank_kernel();
        for (k, vec) in kernel.iter().enumerate() {
            basis.push(BasisElem {
                name: format!("p{d}_{k}"),
                degree: d,
            });
            let mut e = elem_zero();
            for (ci, &c) in vec.iter().enumerate() {
                elem_add_scaled(&mut e, &elem_single(cols[ci], 1), c, p);
            }
            vectors.push(e);
        }
    }
    Ok(Primitives {
        module: GradedModule::new(p, h.max_degree(), basis)?,
        vectors,
    })
}

/// Dimensions of the indecomposables Q(H)_d = H_d / (H⁺·H⁺)_d per positive
/// degree (degrees with zero dimension omitted).
pub fn indecomposable_dims(h: &HopfAlgebra) -> BTreeMap<usize, usize> {
    let m = &h.algebra.module;
    let p = h.p();
    let mut out = BTreeMap::new();
    for d in 1..=h.max_degree() {
        let cols = m.indices_of_degree(d);
        if cols.is_empty() {
            continue;
        }
        let pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let mut span = Span::new(p, cols.len());
        for i in 0..m.dim() {
            let di = m.degree(i);
            if di == 0 || di >= d {
                continue;
            }
            for j in 0..m.dim() {
                if m.degree(j) != d - di {
                    continue;
                }
                let prod = h.algebra.basis_product(i, j);
                let mut v = vec![0u64; cols.len()];
                for (&k, &c) in &prod {
                    v[pos[&k]] = c;
                }
                span.insert(&v);
            }
        }
        let q = cols.len() - span.rank();
        if q > 0 {
            out.insert(d, q);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Symmetric tensor coalgebra and the quasi-shuffle product
// ---------------------------------------------------------------------------

/// One slot of a quasi-shuffle merge: a letter from the left word, a letter
/// from the right word, or a fused pair with its product component.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Comp {
    Left(usize),
    Right(usize),
    Fused(usize, usize, usize),
}

impl Comp {
    fn out(&self) -> usize {
        match *self {
            Comp::Left(a) => a,
            Comp::Right(b) => b,
            Comp::Fused(_, _, c) => c,
        }
    }
    fn left_val(&self) -> Option<usize> {
        match *self {
            Comp::Left(a) | Comp::Fused(a, _, _) => Some(a),
            _ => None,
        }
    }
    fn right_val(&self) -> Option<usize> {
        match *self {
            Comp::Right(b) | Comp::Fused(_, b, _) => Some(b),
            _ => None,
        }
    }
}

struct CofCtx<'a> {
    alg: &'a GradedAlgebra,
    p: u64,
    dmax: usize,
    /// basis indices of the positive-degree letters, in basis order
    letters: Vec<usize>,
    ldeg: Vec<usize>,
    lodd: Vec<bool>,
    /// fuse[a][b]: binary product of letters a, b expanded in letters
    fuse: Vec<Vec<Vec<(usize, u64)>>>,
}

impl<'a> CofCtx<'a> {
    fn new(alg: &'a GradedAlgebra) -> Result<Self> {
        let m = &alg.module;
        let mut letters = Vec::new();
        for i in 0..m.dim() {
            if m.degree(i) == 0 {
                if i != alg.unit {
                    return Err(Error::InvalidInput(
                        "cofree construction requires a positive-degree augmentation ideal"
                            .into(),
                    ));
                }
            } else {
                letters.push(i);
            }
        }
        let back: HashMap<usize, usize> =
            letters.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let ldeg: Vec<usize> = letters.iter().map(|&i| m.degree(i)).collect();
        let lodd: Vec<bool> = ldeg.iter().map(|&d| d % 2 == 1).collect();
        let mut fuse = vec![vec![Vec::new(); letters.len()]; letters.len()];
        for a in 0..letters.len() {
            for b in 0..letters.len() {
                let prod = alg.basis_product(letters[a], letters[b]);
                let mut v = Vec::new();
                for (&k, &c) in &prod {
                    // positive + positive degree, so every component is a letter
                    v.push((back[&k], c));
                }
                fuse[a][b] = v;
            }
        }
        Ok(CofCtx {
            alg,
            p: alg.p(),
            dmax: alg.max_degree(),
            letters,
            ldeg,
            lodd,
            fuse,
        })
    }

    fn multiset_degree(&self, m: &[usize]) -> usize {
        m.iter().map(|&l| self.ldeg[l]).sum()
    }

    /// Basis multisets of letters with total degree ≤ D; odd letters have
    /// multiplicity ≤ 1 when p > 2. Sorted by (degree, lexicographic).
    fn enumerate_multisets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = Vec::new();
        self.enum_rec(0, 0, &mut cur, &mut out);
        out.sort_by_key(|m| (self.multiset_degree(m), m.clone()));
        out
    }

    fn enum_rec(&self, start: usize, deg: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        for l in start..self.letters.len() {
            let nd = deg + self.ldeg[l];
            if nd > self.dmax {
                continue;
            }
            if self.p > 2 && self.lodd[l] && cur.last() == Some(&l) {
                continue;
            }
            cur.push(l);
            self.enum_rec(l, nd, cur, out);
            cur.pop();
        }
    }

    fn multiset_name(&self, m: &[usize]) -> String {
        let names: Vec<String> = m
            .iter()
            .map(|&l| self.alg.module.basis[self.letters[l]].name.clone())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// All splittings of a sorted multiset into an ordered pair, with the
    /// Koszul sign of unshuffling into (left, right).
    fn splittings(&self, m: &[usize]) -> Vec<(Vec<usize>, Vec<usize>, u64)> {
        // runs of equal letters
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &l in m {
            match runs.last_mut() {
                Some((v, c)) if *v == l => *c += 1,
                _ => runs.push((l, 1)),
            }
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; runs.len()];
        loop {
            // build the splitting: first `choice[r]` copies of each run go left
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut parity = false;
            let mut odd_right_seen = 0usize;
            for (r, &(v, c)) in runs.iter().enumerate() {
                let t = choice[r];
                for k in 0..c {
                    if k < t {
                        if self.lodd[v] && odd_right_seen % 2 == 1 {
                            parity = !parity;
                        }
                        left.push(v);
                    } else {
                        if self.lodd[v] {
                            odd_right_seen += 1;
                        }
                        right.push(v);
                    }
                }
            }
            let sign = if parity { fp::neg(1, self.p) } else { 1 };
            out.push((left, right, sign));
            // advance the mixed-radix counter
            let mut r = 0;
            loop {
                if r == runs.len() {
                    return out;
                }
                choice[r] += 1;
                if choice[r] <= runs[r].1 {
                    break;
                }
                choice[r] = 0;
                r += 1;
            }
        }
    }

    /// Quasi-shuffle product of two basis multisets, as a combination of
    /// basis multisets.
    fn product(&self, ml: &[usize], nr: &[usize]) -> BTreeMap<Vec<usize>, u64> {
        let mut result: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        if self.multiset_degree(ml) + self.multiset_degree(nr) > self.dmax {
            return result;
        }
        let mut avail: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in ml {
            *avail.entry(l).or_insert(0) += 1;
        }
        let mut fused: Vec<(usize, usize)> = Vec::new();
        let mut free_n: Vec<usize> = Vec::new();
        self.match_rec(nr, 0, None, &mut avail, &mut fused, &mut free_n, &mut result);
        result.retain(|_, v| *v != 0);
        result
    }

    /// Enumerate multiset matchings: each letter of the right word is either
    /// free or fused with a remaining left letter; identical right letters
    /// choose in canonical (non-decreasing, free-last) order so each
    /// matching multiset appears once.
    #[allow(clippy::too_many_arguments)]
    fn match_rec(
        &self,
        nr: &[usize],
        idx: usize,
        prev: Option<Option<usize>>,
        avail: &mut BTreeMap<usize, usize>,
        fused: &mut Vec<(usize, usize)>,
        free_n: &mut Vec<usize>,
        result: &mut BTreeMap<Vec<usize>, u64>,
    ) {
        if idx == nr.len() {
            self.finish_matching(avail, fused, free_n, result);
            return;
        }
        let b = nr[idx];
        let same = idx > 0 && nr[idx - 1] == b;
        // fused options, ascending in the matched letter
        let m_values: Vec<usize> = avail
            .iter()
            .filter(|&(_, &c)| c > 0)
            .map(|(&v, _)| v)
            .collect();
        for v in m_values {
            if same {
                match prev {
                    Some(Some(pv)) if v < pv => continue,
                    Some(None) => continue, // free sorts last
                    _ => {}
                }
            }
            *avail.get_mut(&v).unwrap() -= 1;
            fused.push((v, b));
            self.match_rec(nr, idx + 1, Some(Some(v)), avail, fused, free_n, result);
            fused.pop();
            *avail.get_mut(&v).unwrap() += 1;
        }
        // free option (canonically last)
        free_n.push(b);
        self.match_rec(nr, idx + 1, Some(None), avail, fused, free_n, result);
        free_n.pop();
    }

    fn finish_matching(
        &self,
        avail: &BTreeMap<usize, usize>,
        fused: &[(usize, usize)],
        free_n: &[usize],
        result: &mut BTreeMap<Vec<usize>, u64>,
    ) {
        // group identical fused pairs; expand outputs per group as
        // non-decreasing multisets so arrangements are not double-counted
        let mut groups: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &pr in fused {
            *groups.entry(pr).or_insert(0) += 1;
        }
        let mut base: Vec<Comp> = Vec::new();
        for (&l, &c) in avail {
            for _ in 0..c {
                base.push(Comp::Left(l));
            }
        }
        for &b in free_n {
            base.push(Comp::Right(b));
        }
        let group_list: Vec<((usize, usize), usize)> =
            groups.iter().map(|(&k, &v)| (k, v)).collect();
        self.expand_groups(&group_list, 0, 1, &mut base, result);
    }

    fn expand_groups(
        &self,
        groups: &[((usize, usize), usize)],
        gi: usize,
        coeff: u64,
        comps: &mut Vec<Comp>,
        result: &mut BTreeMap<Vec<usize>, u64>,
    ) {
        if coeff == 0 {
            return;
        }
        if gi == groups.len() {
            self.accumulate(comps, coeff, result);
            return;
        }
        let ((a, b), count) = groups[gi];
        let opts = &self.fuse[a][b];
        // choose a non-decreasing sequence of `count` options
        fn rec(
            ctx: &CofCtx,
            opts: &[(usize, u64)],
            start: usize,
            remaining: usize,
            a: usize,
            b: usize,
            coeff: u64,
            groups: &[((usize, usize), usize)],
            gi: usize,
            comps: &mut Vec<Comp>,
            result: &mut BTreeMap<Vec<usize>, u64>,
        ) {
            if remaining == 0 {
                ctx.expand_groups(groups, gi + 1, coeff, comps, result);
                return;
            }
            for oi in start..opts.len() {
                let (c, k) = opts[oi];
                comps.push(Comp::Fused(a, b, c));
                rec(
                    ctx,
                    opts,
                    oi,
                    remaining - 1,
                    a,
                    b,
                    fp::mul(coeff, k, ctx.p),
                    groups,
                    gi,
                    comps,
                    result,
                );
                comps.pop();
            }
        }
        rec(
            self, opts, 0, count, a, b, coeff, groups, gi, comps, result,
        );
    }

    /// Sum the Koszul signs over all distinct arrangements of the components
    /// along the sorted output multiset, and accumulate into the result.
    fn accumulate(&self, comps: &[Comp], coeff: u64, result: &mut BTreeMap<Vec<usize>, u64>) {
        let mut key: Vec<usize> = comps.iter().map(|c| c.out()).collect();
        key.sort_unstable();
        if self.multiset_degree(&key) > self.dmax {
            return;
        }
        if self.p > 2 {
            // excluded basis multisets (repeated odd letter) always cancel
            for w in key.windows(2) {
                if w[0] == w[1] && self.lodd[w[0]] {
                    return;
                }
            }
        }
        // group components by output value (positions of equal outputs are
        // contiguous in the sorted key)
        let mut by_out: BTreeMap<usize, Vec<Comp>> = BTreeMap::new();
        for &c in comps {
            by_out.entry(c.out()).or_default().push(c);
        }
        for v in by_out.values_mut() {
            v.sort_unstable();
        }
        let groups: Vec<Vec<Comp>> = by_out.into_values().collect();
        let mut sign_sum = 0u64;
        let mut arrangement: Vec<Comp> = Vec::new();
        self.arrange_rec(&groups, 0, &mut arrangement, &mut sign_sum);
        let total = fp::mul(coeff, sign_sum, self.p);
        if total != 0 {
            let e = result.entry(key).or_insert(0);
            *e = fp::add(*e, total, self.p);
        }
    }

    fn arrange_rec(
        &self,
        groups: &[Vec<Comp>],
        gi: usize,
        arrangement: &mut Vec<Comp>,
        sign_sum: &mut u64,
    ) {
        if gi == groups.len() {
            *sign_sum = fp::add(*sign_sum, self.arrangement_sign(arrangement), self.p);
            return;
        }
        // distinct permutations of this group's multiset of components
        let mut pool = groups[gi].clone();
        let len = pool.len();
        fn perm_rec(
            ctx: &CofCtx,
            pool: &mut Vec<Comp>,
            remaining: usize,
            groups: &[Vec<Comp>],
            gi: usize,
            arrangement: &mut Vec<Comp>,
            sign_sum: &mut u64,
        ) {
            if remaining == 0 {
                ctx.arrange_rec(groups, gi + 1, arrangement, sign_sum);
                return;
            }
            let mut i = 0;
            while i < pool.len() {
                if i > 0 && pool[i] == pool[i - 1] {
                    i += 1;
                    continue;
                }
                let c = pool.remove(i);
                arrangement.push(c);
                perm_rec(ctx, pool, remaining - 1, groups, gi, arrangement, sign_sum);
                arrangement.pop();
                pool.insert(i, c);
                i += 1;
            }
        }
        perm_rec(self, &mut pool, len, groups, gi, arrangement, sign_sum);
        for _ in 0..0 {
            // no-op: keep borrowck simple
        }
    }

    /// Koszul sign of one interleaving: inversions among the odd letters of
    /// the reconstructed left word, of the right word, and between right
    /// letters and later left letters.
    fn arrangement_sign(&self, arr: &[Comp]) -> u64 {
        if self.p == 2 {
            return 1;
        }
        let mut parity = false;
        let mut left_odds: Vec<usize> = Vec::new();
        let mut right_odds: Vec<usize> = Vec::new();
        for comp in arr {
            if let Some(a) = comp.left_val() {
                if self.lodd[a] {
                    // right letters seen strictly earlier pass over this one
                    if right_odds.len() % 2 == 1 {
                        parity = !parity;
                    }
                    let inv = left_odds.iter().filter(|&&w| w > a).count();
                    if inv % 2 == 1 {
                        parity = !parity;
                    }
                    left_odds.push(a);
                }
            }
            if let Some(b) = comp.right_val() {
                if self.lodd[b] {
                    let inv = right_odds.iter().filter(|&&w| w > b).count();
                    if inv % 2 == 1 {
                        parity = !parity;
                    }
                    right_odds.push(b);
                }
            }
        }
        if parity {
            fp::neg(1, self.p)
        } else {
            1
        }
    }
}

/// The cofree conilpotent cocommutative Hopf algebra on an augmented algebra:
/// underlying coalgebra the symmetric tensor coalgebra on the augmentation
/// ideal, product the quasi-shuffle (signed order-compatible merges, letter
/// pairs optionally fused through A's multiplication). The construction is
/// self-checking: the bialgebra axioms are verified before returning.
pub fn cof_u(a: &GradedAlgebra) -> Result<HopfAlgebra> {
    let ctx = CofCtx::new(a)?;
    let p = ctx.p;
    let multisets = ctx.enumerate_multisets();
    let index: HashMap<Vec<usize>, usize> = multisets
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let basis: Vec<BasisElem> = multisets
        .iter()
        .map(|m| BasisElem {
            name: ctx.multiset_name(m),
            degree: ctx.multiset_degree(m),
        })
        .collect();
    let module = GradedModule::new(p, a.max_degree(), basis)?;
    let unit = index[&Vec::new()];
    let mut products = HashMap::new();
    for (i, mi) in multisets.iter().enumerate() {
        for (j, mj) in multisets.iter().enumerate() {
            if ctx.multiset_degree(mi) + ctx.multiset_degree(mj) > ctx.dmax {
                continue;
            }
            let prod = ctx.product(mi, mj);
            let mut e = elem_zero();
            for (k, c) in prod {
                elem_add_scaled(&mut e, &elem_single(index[&k], 1), c, p);
            }
            if !e.is_empty() {
                products.insert((i, j), e);
            }
        }
    }
    let algebra = GradedAlgebra::new(module, unit, products);
    let mut coproducts = Vec::with_capacity(multisets.len());
    for m in &multisets {
        let mut cop = tensor_zero();
        for (left, right, sign) in ctx.splittings(m) {
            let (li, ri) = (index[&left], index[&right]);
            tensor_add_scaled(&mut cop, &tensor_single(li, ri, 1), sign, p);
        }
        coproducts.push(cop);
    }
    let h = HopfAlgebra::new(algebra, coproducts)?;
    let rep = check_hopf(&h);
    if !rep.is_empty() {
        return Err(Error::InvalidInput(format!(
            "cofree construction failed its own axiom checks: {}",
            rep.violations.join("; ")
        )));
    }
    Ok(h)
}

/// Symmetric tensor coalgebra S(V) on a positive-degree module, with the
/// plain (fusion-free) shuffle product: the cofree construction on V with
/// trivial multiplication.
pub fn symmetric_tensor_coalgebra(v: &GradedModule, max_degree: usize) -> Result<HopfAlgebra> {
    if v.basis.iter().any(|b| b.degree == 0) {
        return Err(Error::InvalidInput(
            "symmetric tensor coalgebra requires positive degrees".into(),
        ));
    }
    let mut basis = vec![BasisElem {
        name: "1".into(),
        degree: 0,
    }];
    basis.extend(v.basis.iter().cloned());
    let module = GradedModule::new(v.p, max_degree, basis)?;
    let mut products = HashMap::new();
    for i in 0..module.dim() {
        products.insert((0, i), elem_single(i, 1));
        products.insert((i, 0), elem_single(i, 1));
    }
    products.insert((0, 0), elem_single(0, 1));
    let alg = GradedAlgebra::new(module, 0, products);
    cof_u(&alg)
}

// ---------------------------------------------------------------------------
// Polynomial-type Hopf algebras: multiplicative coproduct extension
// ---------------------------------------------------------------------------

fn mono_name(gens: &[Generator], exps: &[usize]) -> String {
    let parts: Vec<String> = gens
        .iter()
        .zip(exps)
        .filter(|(_, &e)| e > 0)
        .map(|(g, &e)| {
            if e == 1 {
                g.name.clone()
            } else {
                format!("{}^{}", g.name, e)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Extend generator coproducts multiplicatively over a monomial-presented
/// algebra (free graded-commutative modulo degree truncation and forced odd
/// nilpotence).
fn extend_coproducts(
    alg: &GradedAlgebra,
    gens: &[Generator],
    gen_cop: &[TensorElem],
) -> Result<Vec<TensorElem>> {
    let p = alg.p();
    let dmax = alg.max_degree();
    let mut cops: Vec<Option<TensorElem>> = vec![None; alg.module.dim()];
    let unit_cop = tensor_single(alg.unit, alg.unit, 1);

    struct St<'a> {
        alg: &'a GradedAlgebra,
        gens: &'a [Generator],
        gen_cop: &'a [TensorElem],
        p: u64,
        dmax: usize,
    }
    fn rec(
        st: &St,
        gi: usize,
        exps: &mut Vec<usize>,
        deg: usize,
        acc: &TensorElem,
        cops: &mut Vec<Option<TensorElem>>,
    ) -> Result<()> {
        if gi == st.gens.len() {
            let name = mono_name(st.gens, exps);
            let idx = st.alg.module.index_of(&name)?;
            cops[idx] = Some(acc.clone());
            return Ok(());
        }
        let g = &st.gens[gi];
        let bound = if st.p > 2 && g.degree % 2 == 1 {
            Some(2)
        } else {
            g.nil_power
        };
        let mut e = 0usize;
        let mut cur = acc.clone();
        loop {
            if let Some(b) = bound {
                if e >= b {
                    break;
                }
            }
            let d = deg + e * g.degree;
            if d > st.dmax {
                break;
            }
            exps[gi] = e;
            rec(st, gi + 1, exps, d, &cur, cops)?;
            cur = tensor_mul(st.alg, &cur, &st.gen_cop[gi]);
            e += 1;
        }
        exps[gi] = 0;
        Ok(())
    }

    let st = St {
        alg,
        gens,
        gen_cop,
        p,
        dmax,
    };
    let mut exps = vec![0usize; gens.len()];
    rec(&st, 0, &mut exps, 0, &unit_cop, &mut cops)?;
    cops.into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no coproduct derived for basis element {}",
                    alg.module.basis[i].name
                ))
            })
        })
        .collect()
}

/// Exterior algebra on odd primitive generators (p > 2).
pub fn exterior_hopf(m: &GradedModule) -> Result<HopfAlgebra> {
    if m.p == 2 {
        return Err(Error::InvalidInput(
            "the exterior construction requires p > 2".into(),
        ));
    }
    for b in &m.basis {
        if b.degree % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "generator {} has even degree {}",
                b.name, b.degree
            )));
        }
    }
    let gens: Vec<Generator> = m
        .basis
        .iter()
        .map(|b| Generator {
            name: b.name.clone(),
            degree: b.degree,
            nil_power: Some(2),
        })
        .collect();
    let alg = crate::graded::monomial_algebra(m.p, m.max_degree, &gens, &[])?;
    let mut gen_cop = Vec::new();
    for g in &gens {
        let idx = alg.module.index_of(&g.name)?;
        let mut c = tensor_single(idx, alg.unit, 1);
        tensor_add_scaled(&mut c, &tensor_single(alg.unit, idx, 1), 1, m.p);
        gen_cop.push(c);
    }
    let cops = extend_coproducts(&alg, &gens, &gen_cop)?;
    HopfAlgebra::new(alg, cops)
}

/// The degree-j block of the Witt-comultiplication polynomial Hopf algebra:
/// polynomial generators t0, …, tn with |t_i| = j·p^i, comultiplication
/// Δt_m = S_m(t⊗1, 1⊗t) given by the Witt vector addition law. Represents
/// length-(n+1) Witt vectors of degree j on truncated algebras.
pub fn lambda_p(j: usize, p: u64, n: usize, max_degree: usize) -> Result<HopfAlgebra> {
    if !fp::is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if j == 0 {
        return Err(Error::InvalidInput("generator degree j must be >= 1".into()));
    }
    if p > 2 && j % 2 == 1 {
        return Err(Error::InvalidInput(
            "odd generator degrees do not carry a polynomial Witt block at odd p".into(),
        ));
    }
    let mut gens = Vec::new();
    for i in 0..=n {
        let d = j.checked_mul((p as usize).pow(i as u32)).unwrap_or(usize::MAX);
        if d > max_degree {
            break;
        }
        gens.push(Generator {
            name: format!("t{i}"),
            degree: d,
            nil_power: None,
        });
    }
    let alg = crate::graded::monomial_algebra(p, max_degree, &gens, &[])?;
    let n_eff = gens.len().saturating_sub(1);
    let gen_cop = if gens.is_empty() {
        Vec::new()
    } else {
        let polys = witt_sum_polys(p, n_eff)?;
        let ring = TensorRing(&alg);
        let theta: Vec<usize> = gens
            .iter()
            .map(|g| alg.module.index_of(&g.name))
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        for m in 0..gens.len() {
            let assign = |name: &str| -> Option<TensorElem> {
                let (side, idx) = name.split_at(1);
                let i: usize = idx.parse().ok()?;
                let t = *theta.get(i)?;
                match side {
                    "a" => Some(tensor_single(t, alg.unit, 1)),
                    "b" => Some(tensor_single(alg.unit, t, 1)),
                    _ => None,
                }
            };
            out.push(polys.sum[m].eval(&ring, &assign)?);
        }
        out
    };
    let cops = extend_coproducts(&alg, &gens, &gen_cop)?;
    HopfAlgebra::new(alg, cops)
}

/// Degreewise dual Hopf algebra: products and coproducts transpose into each
/// other, with the Koszul sign (−1)^{|i||j|} on each transposed pairing.
pub fn dual(h: &HopfAlgebra) -> Result<HopfAlgebra> {
    let m = &h.algebra.module;
    let p = h.p();
    if !h.is_connected() {
        return Err(Error::InvalidInput(
            "duals are implemented for connected Hopf algebras".into(),
        ));
    }
    let basis: Vec<BasisElem> = m
        .basis
        .iter()
        .map(|b| BasisElem {
            name: format!("{}'", b.name),
            degree: b.degree,
        })
        .collect();
    let module = GradedModule::new(p, m.max_degree, basis)?;
    let pair_sign = |i: usize, j: usize| -> u64 {
        if m.degree(i) % 2 == 1 && m.degree(j) % 2 == 1 {
            fp::neg(1, p)
        } else {
            1
        }
    };
    // (e_i* · e_j*) = Σ_k ±⟨Δ e_k, e_i ⊗ e_j⟩ e_k*
    let mut products: HashMap<(usize, usize), Elem> = HashMap::new();
    for k in 0..h.dim() {
        for (&(i, j), &c) in &h.coproducts[k] {
            let c = fp::mul(c, pair_sign(i, j), p);
            let e = products.entry((i, j)).or_default();
            elem_add_scaled(e, &elem_single(k, 1), c, p);
        }
    }
    // Δ(e_k*) = Σ_{i,j} ±⟨e_i e_j, e_k⟩ e_i* ⊗ e_j*
    let mut coproducts: Vec<TensorElem> = vec![tensor_zero(); h.dim()];
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            if m.degree(i) + m.degree(j) > m.max_degree {
                continue;
            }
            let prod = h.algebra.basis_product(i, j);
            for (&k, &c) in &prod {
                let c = fp::mul(c, pair_sign(i, j), p);
                tensor_add_scaled(&mut coproducts[k], &tensor_single(i, j, 1), c, p);
            }
        }
    }
    let algebra = GradedAlgebra::new(module, h.algebra.unit, products);
    HopfAlgebra::new(algebra, coproducts)
}

// ---------------------------------------------------------------------------
// Cofreeness verification
// ---------------------------------------------------------------------------

/// Result of the dimension-count cofreeness criterion.
///
/// `pass` holds iff (1) the primitives are closed under p-fold products, so
/// they carry an induced p-polar structure, (2) H has the dimensions of the
/// symmetric coalgebra on its primitives, and (3) the indecomposables of H
/// match the generator profile that the cofree construction produces on the
/// interval decomposition of the primitives. All three are decidable at the
/// truncation; the verdict is the dimension-count criterion, not a universal
///-property proof.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CofreeReport {
    pub primitive_dims: BTreeMap<usize, usize>,
    pub closure_failures: Vec<String>,
    pub dim_mismatches: Vec<String>,
    pub generator_mismatches: Vec<String>,
    pub pass: bool,
}

impl CofreeReport {
    pub fn summary(&self) -> String {
        if self.pass {
            "cofree (dimension-count criterion): pass".into()
        } else {
            let mut issues = Vec::new();
            issues.extend(self.closure_failures.iter().cloned());
            issues.extend(self.dim_mismatches.iter().cloned());
            issues.extend(self.generator_mismatches.iter().cloned());
            format!("cofree (dimension-count criterion): FAIL [{}]", issues.join("; "))
        }
    }
}

/// Decide, at the truncation, whether H is the cofree conilpotent Hopf
/// algebra on its primitives.
pub fn verify_cofree(h: &HopfAlgebra) -> Result<CofreeReport> {
    let p = h.p();
    let dmax = h.max_degree();
    let m = &h.algebra.module;
    let prim = primitives(h)?;
    let mut report = CofreeReport {
        primitive_dims: prim.module.dims_by_degree(),
        ..Default::default()
    };

    // (1) closure of the primitives under p-fold products, and the induced
    // Frobenius on the primitive basis
    let prim_at = |d: usize| -> Vec<usize> { prim.module.indices_of_degree(d) };
    let mut fmaps: BTreeMap<usize, FpMatrix> = BTreeMap::new();
    let prim_degrees: Vec<usize> = report.primitive_dims.keys().cloned().collect();
    for &d in &prim_degrees {
        let target = d * p as usize;
        if target > dmax {
            continue;
        }
        let sources = prim_at(d);
        let targets = prim_at(target);
        let hcols = m.indices_of_degree(target);
        let pos: HashMap<usize, usize> = hcols.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        // span of the target primitives inside H_target, and the coordinate
        // matrix for solving
        let mut span = Span::new(p, hcols.len());
        let mut coord = FpMatrix::zero(p, hcols.len(), targets.len());
        for (t, &ti) in targets.iter().enumerate() {
            let mut v = vec![0u64; hcols.len()];
            for (&bi, &c) in &prim.vectors[ti] {
                v[pos[&bi]] = c;
            }
            for (r, &c) in v.iter().enumerate() {
                coord.set(r, t, c);
            }
            span.insert(&v);
        }
        // all p-fold products of primitive basis vectors of degree d
        let tuples = multisets_of_size(sources.len(), p as usize);
        let mut fmat = FpMatrix::zero(p, targets.len(), sources.len());
        for tuple in tuples {
            let mut prod = h.algebra.unit_elem();
            for &s in &tuple {
                prod = h.algebra.mul_elem(&prod, &prim.vectors[sources[s]]);
            }
            let mut v = vec![0u64; hcols.len()];
            for (&bi, &c) in &prod {
                v[pos[&bi]] = c;
            }
            if !span.contains(&v) {
                report.closure_failures.push(format!(
                    "p-fold product of primitives of degree {d} escapes the primitives in degree {target}"
                ));
                continue;
            }
            // diagonal tuples give the induced Frobenius
            if tuple.iter().all(|&s| s == tuple[0]) {
                let coords = coord
                    .solve(&v)
                    .expect("span membership established above");
                for (t, &c) in coords.iter().enumerate() {
                    fmat.set(t, tuple[0], c);
                }
            }
        }
        fmaps.insert(d, fmat);
    }

    // (2) dimension count: dim H_d = dim S(P(H))_d
    let sym = symmetric_dims(&report.primitive_dims, p, dmax);
    let hdims = m.dims_by_degree();
    for d in 0..=dmax {
        let have = *hdims.get(&d).unwrap_or(&0);
        let want = *sym.get(&d).unwrap_or(&0);
        if have != want {
            report.dim_mismatches.push(format!(
                "degree {d}: dim H = {have}, dim S(P(H)) = {want}"
            ));
        }
    }

    // (3) generator profile: the indecomposables of a cofree Hopf algebra
    // form one p-power tower per interval of the primitive decomposition
    // (a single degree for odd intervals at odd p)
    if report.closure_failures.is_empty() {
        let fm = FModule::new(prim.module.clone(), fmaps)?;
        let barcode = decompose(&fm);
        let mut expected: BTreeMap<usize, usize> = BTreeMap::new();
        for bar in &barcode.bars {
            if p > 2 && bar.degree % 2 == 1 {
                *expected.entry(bar.degree).or_insert(0) += 1;
            } else {
                let mut d = bar.degree;
                while d <= dmax {
                    *expected.entry(d).or_insert(0) += 1;
                    match d.checked_mul(p as usize) {
                        Some(next) => d = next,
                        None => break,
                    }
                }
            }
        }
        let q = indecomposable_dims(h);
        for d in 1..=dmax {
            let have = *q.get(&d).unwrap_or(&0);
            let want = *expected.get(&d).unwrap_or(&0);
            if have != want {
                report.generator_mismatches.push(format!(
                    "degree {d}: {have} indecomposables, cofree profile predicts {want}"
                ));
            }
        }
    }

    report.pass = report.closure_failures.is_empty()
        && report.dim_mismatches.is_empty()
        && report.generator_mismatches.is_empty();
    Ok(report)
}

/// All multisets of size k from {0, …, n-1}, as non-decreasing index tuples.
fn multisets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Dimensions of the symmetric coalgebra on a graded space with the given
/// dimensions (odd generators square-free at odd p).
fn symmetric_dims(dims: &BTreeMap<usize, usize>, p: u64, dmax: usize) -> BTreeMap<usize, usize> {
    let mut ways = vec![0usize; dmax + 1];
    ways[0] = 1;
    for (&g, &mult) in dims {
        for _ in 0..mult {
            let mut next = ways.clone();
            if p > 2 && g % 2 == 1 {
                for d in (g..=dmax).rev() {
                    next[d] += ways[d - g];
                }
            } else {
                // unbounded multiplicity: standard partition recurrence
                for d in g..=dmax {
                    next[d] += next[d - g];
                }
            }
            ways = next;
        }
    }
    (0..=dmax).map(|d| (d, ways[d])).collect()
}

/// The matched pair (H, H′) of connected bicommutative Hopf algebras with
/// equal degreewise dimensions: H is the degreewise dual of k[x, y] with
/// |x| = j, |y| = p²j and the twisted comultiplication
/// ψ(y) = y⊗1 + 1⊗y + Σ_{i=1}^{p−1} (i!(p−i)!)^{-1} x^{pi} ⊗ x^{p(p−i)},
/// while H′ is the dual of k[x] ⊗ k[y] with both generators primitive.
/// H′ is cofree on its primitives; H is not.
pub fn counterexample_pair(p: u64, j: usize, max_degree: usize) -> Result<(HopfAlgebra, HopfAlgebra)> {
    if !fp::is_prime(p) || p == 2 {
        return Err(Error::InvalidInput("p must be an odd prime".into()));
    }
    if j == 0 || j % 2 == 1 {
        return Err(Error::InvalidInput("j must be even and positive".into()));
    }
    let pu = p as usize;
    if pu * pu * j > max_degree {
        return Err(Error::InvalidInput(format!(
            "need p²j = {} ≤ max degree {max_degree}",
            pu * pu * j
        )));
    }
    let gens = vec![
        Generator {
            name: "x".into(),
            degree: j,
            nil_power: None,
        },
        Generator {
            name: "y".into(),
            degree: pu * pu * j,
            nil_power: None,
        },
    ];
    let alg = crate::graded::monomial_algebra(p, max_degree, &gens, &[])?;
    let xi = alg.module.index_of("x")?;
    let yi = alg.module.index_of("y")?;
    let primitive = |i: usize| -> TensorElem {
        let mut c = tensor_single(i, alg.unit, 1);
        tensor_add_scaled(&mut c, &tensor_single(alg.unit, i, 1), 1, p);
        c
    };
    // twisted coproduct of y
    let mut psi_y = primitive(yi);
    let fact = |n: u64| -> u64 {
        let mut f = 1u64;
        for i in 2..=n {
            f = fp::mul(f, i, p);
        }
        f
    };
    for i in 1..p {
        let c = fp::inv(fp::mul(fact(i), fact(p - i), p), p);
        let left = mono_name(&gens, &[pu * i as usize, 0]);
        let right = mono_name(&gens, &[pu * (p - i) as usize, 0]);
        let (li, ri) = (alg.module.index_of(&left)?, alg.module.index_of(&right)?);
        tensor_add_scaled(&mut psi_y, &tensor_single(li, ri, 1), c, p);
    }
    let twisted = HopfAlgebra::new(
        alg.clone(),
        extend_coproducts(&alg, &gens, &[primitive(xi), psi_y])?,
    )?;
    let plain = HopfAlgebra::new(
        alg.clone(),
        extend_coproducts(&alg, &gens, &[primitive(xi), primitive(yi)])?,
    )?;
    Ok((dual(&twisted)?, dual(&plain)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{make_preset, tensor_product, Preset};
    use crate::witt::ElemRing;

    fn poly_alg(p: u64, d: usize, name: &str, deg: usize, nil: Option<usize>) -> GradedAlgebra {
        make_preset(Preset::TruncatedPolynomial {
            p,
            max_degree: d,
            gens: vec![Generator {
                name: name.into(),
                degree: deg,
                nil_power: nil,
            }],
        })
        .unwrap()
    }

    fn module(p: u64, d: usize, gens: &[(&str, usize)]) -> GradedModule {
        GradedModule::new(
            p,
            d,
            gens.iter()
                .map(|&(n, g)| BasisElem {
                    name: n.into(),
                    degree: g,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn symmetric_coalgebra_single_even_generator() {
        let v = module(3, 12, &[("v", 2)]);
        let s = symmetric_tensor_coalgebra(&v, 12).unwrap();
        let dims = s.algebra.module.dims_by_degree();
        for m in 0..=6 {
            assert_eq!(*dims.get(&(2 * m)).unwrap_or(&0), 1, "degree {}", 2 * m);
        }
        assert!(check_hopf(&s).is_empty());
        let prim = primitives(&s).unwrap();
        assert_eq!(prim.module.dims_by_degree(), v.dims_by_degree());
    }

    #[test]
    fn symmetric_coalgebra_single_odd_generator() {
        let v = module(3, 9, &[("v", 3)]);
        let s = symmetric_tensor_coalgebra(&v, 9).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(check_hopf(&s).is_empty());
        let prim = primitives(&s).unwrap();
        assert_eq!(prim.module.dims_by_degree(), v.dims_by_degree());
    }

    #[test]
    fn shuffle_product_divided_power_relation() {
        // one even letter v: {v}·{v} = 2{v,v} and {v}^{p} = p!{v,…} = 0
        let v = module(3, 12, &[("v", 2)]);
        let s = symmetric_tensor_coalgebra(&v, 12).unwrap();
        let one = s.algebra.module.index_of("{v}").unwrap();
        let two = s.algebra.module.index_of("{v,v}").unwrap();
        assert_eq!(s.algebra.basis_product(one, one), elem_single(two, 2));
        let cube = s.algebra.pow_elem(&elem_single(one, 1), 3);
        assert!(cube.is_empty());
    }

    #[test]
    fn shuffle_signs_on_odd_letters() {
        let v = module(3, 12, &[("a", 3), ("b", 5)]);
        let s = symmetric_tensor_coalgebra(&v, 12).unwrap();
        assert!(check_hopf(&s).is_empty());
        let a = s.algebra.module.index_of("{a}").unwrap();
        let b = s.algebra.module.index_of("{b}").unwrap();
        let ab = s.algebra.module.index_of("{a,b}").unwrap();
        assert_eq!(s.algebra.basis_product(a, b), elem_single(ab, 1));
        assert_eq!(s.algebra.basis_product(b, a), elem_single(ab, 2)); // = −{a,b}
        assert!(s.algebra.basis_product(a, a).is_empty());
    }

    #[test]
    fn cof_u_partition_dimensions() {
        // reduced part of F_3[x], |x| = 2: dim in degree d = number of
        // partitions of d into parts 2, 4, 6, …
        let a = poly_alg(3, 12, "x", 2, None);
        let h = cof_u(&a).unwrap();
        let parts: Vec<usize> = (1..=6).map(|k| 2 * k).collect();
        let mut ways = vec![0usize; 13];
        ways[0] = 1;
        for part in parts {
            for d in part..=12 {
                ways[d] += ways[d - part];
            }
        }
        let dims = h.algebra.module.dims_by_degree();
        for d in 0..=12 {
            assert_eq!(*dims.get(&d).unwrap_or(&0), ways[d], "degree {d}");
        }
    }

    #[test]
    fn cof_u_primitives_match_reduced_part() {
        let presets: Vec<GradedAlgebra> = vec![
            poly_alg(3, 12, "x", 2, Some(3)),
            poly_alg(2, 8, "x", 1, None),
            make_preset(Preset::Exterior {
                p: 3,
                max_degree: 10,
                gens: vec![("a".into(), 3), ("b".into(), 5)],
            })
            .unwrap(),
        ];
        for a in presets {
            let h = cof_u(&a).unwrap();
            let prim = primitives(&h).unwrap();
            let mut reduced = a.module.dims_by_degree();
            reduced.remove(&0);
            let mut got = prim.module.dims_by_degree();
            got.remove(&0);
            assert_eq!(got, reduced);
        }
    }

    #[test]
    fn verify_cofree_passes_on_cofree_constructions() {
        let cases: Vec<GradedAlgebra> = vec![
            poly_alg(3, 12, "x", 2, Some(3)),
            poly_alg(3, 12, "x", 2, None),
            poly_alg(2, 8, "x", 2, None),
            make_preset(Preset::Exterior {
                p: 3,
                max_degree: 10,
                gens: vec![("a".into(), 3)],
            })
            .unwrap(),
            tensor_product(
                &poly_alg(3, 10, "x", 2, Some(2)),
                &poly_alg(3, 10, "y", 4, Some(2)),
            )
            .unwrap(),
        ];
        for a in cases {
            let h = cof_u(&a).unwrap();
            let rep = verify_cofree(&h).unwrap();
            assert!(rep.pass, "{}", rep.summary());
        }
    }

    #[test]
    fn exterior_hopf_two_generators() {
        let m = module(3, 6, &[("a", 3), ("b", 3)]);
        let h = exterior_hopf(&m).unwrap();
        let dims = h.algebra.module.dims_by_degree();
        assert_eq!(dims[&0], 1);
        assert_eq!(dims[&3], 2);
        assert_eq!(dims[&6], 1);
        assert!(check_hopf(&h).is_empty());
        let prim = primitives(&h).unwrap();
        assert_eq!(prim.module.dims_by_degree(), m.dims_by_degree());
        let rep = verify_cofree(&h).unwrap();
        assert!(rep.pass, "{}", rep.summary());
    }

    #[test]
    fn exterior_hopf_rejects_even_generator() {
        let m = module(3, 6, &[("a", 2)]);
        assert!(exterior_hopf(&m).is_err());
        let m2 = module(2, 6, &[("a", 3)]);
        assert!(exterior_hopf(&m2).is_err());
    }

    #[test]
    fn lambda_coproduct_of_theta0_is_primitive() {
        let h = lambda_p(2, 3, 1, 12).unwrap();
        let t0 = h.algebra.module.index_of("t0").unwrap();
        let unit = h.algebra.unit;
        let mut expected = tensor_single(t0, unit, 1);
        tensor_add_scaled(&mut expected, &tensor_single(unit, t0, 1), 1, 3);
        assert_eq!(h.coproducts[t0], expected);
    }

    #[test]
    fn lambda_coproduct_of_theta1_at_p2() {
        // S_1 = a1 + b1 − a0 b0, so Δt1 = t1⊗1 + 1⊗t1 + t0⊗t0 over F_2
        let h = lambda_p(2, 2, 1, 8).unwrap();
        let t0 = h.algebra.module.index_of("t0").unwrap();
        let t1 = h.algebra.module.index_of("t1").unwrap();
        let unit = h.algebra.unit;
        let mut expected = tensor_single(t1, unit, 1);
        tensor_add_scaled(&mut expected, &tensor_single(unit, t1, 1), 1, 2);
        tensor_add_scaled(&mut expected, &tensor_single(t0, t0, 1), 1, 2);
        assert_eq!(h.coproducts[t1], expected);
    }

    #[test]
    fn lambda_is_a_valid_hopf_algebra() {
        for (p, d) in [(2u64, 8usize), (3, 18)] {
            let h = lambda_p(2, p, 2, d).unwrap();
            let rep = check_hopf(&h);
            assert!(rep.is_empty(), "{:?}", rep.violations);
            let f = h.flags();
            assert!(f.commutative && f.cocommutative && f.conilpotent);
        }
    }

    #[test]
    fn lambda_primitives_are_the_frobenius_tower() {
        let h = lambda_p(2, 3, 2, 18).unwrap();
        let prim = primitives(&h).unwrap();
        // tower t0, t0^3, t0^9 in degrees 2, 6, 18
        assert_eq!(
            prim.module.dims_by_degree(),
            [(2usize, 1usize), (6, 1), (18, 1)].into_iter().collect()
        );
        let t0 = h.algebra.module.index_of("t0").unwrap();
        for (k, &deg) in [2usize, 6, 18].iter().enumerate() {
            let idx = prim.module.indices_of_degree(deg)[0];
            let power = h
                .algebra
                .pow_elem(&elem_single(t0, 1), 3usize.pow(k as u32));
            let v = &prim.vectors[idx];
            // primitive spans the same line as the p^k-th power of t0
            let (ki, kc) = power.iter().next().map(|(&a, &b)| (a, b)).unwrap();
            let vc = *v.get(&ki).expect("same support");
            let mut scaled = elem_zero();
            elem_add_scaled(&mut scaled, v, fp::mul(kc, fp::inv(vc, 3), 3), 3);
            assert_eq!(scaled, power);
        }
    }

    #[test]
    fn lambda_represents_witt_addition_by_convolution() {
        // maps Λ → A correspond to pairs (u0, u1) ∈ A_j × A_{pj}; the
        // convolution product must be Witt vector addition
        let p = 3u64;
        let h = lambda_p(2, p, 1, 6).unwrap();
        let a = poly_alg(p, 6, "u", 2, None);
        let ring = ElemRing(&a);
        let u = a.module.index_of("u").unwrap();
        let u3 = a.module.index_of("u^3").unwrap();
        let polys = witt_sum_polys(p, 1).unwrap();
        let t0 = h.algebra.module.index_of("t0").unwrap();
        let t1 = h.algebra.module.index_of("t1").unwrap();
        // a monomial-wise algebra map image of a basis element of Λ
        let apply = |img0: &Elem, img1: &Elem, idx: usize| -> Elem {
            let name = &h.algebra.module.basis[idx].name;
            let mut out = a.unit_elem();
            if name == "1" {
                return out;
            }
            for part in name.split('*') {
                let (gen, e) = match part.split_once('^') {
                    Some((g, e)) => (g, e.parse::<usize>().unwrap()),
                    None => (part, 1),
                };
                let img = if gen == "t0" { img0 } else { img1 };
                for _ in 0..e {
                    out = a.mul_elem(&out, img);
                }
            }
            out
        };
        for c0 in 0..p {
            for c1 in 0..p {
                for d0 in 0..p {
                    for d1 in 0..p {
                        let f0 = elem_single(u, c0);
                        let f1 = elem_single(u3, c1);
                        let g0 = elem_single(u, d0);
                        let g1 = elem_single(u3, d1);
                        for (m, tm) in [(0usize, t0), (1, t1)] {
                            // convolution (f*g)(θ_m) through the coproduct
                            let mut conv = elem_zero();
                            for (&(i, j), &c) in &h.coproducts[tm] {
                                let prod =
                                    a.mul_elem(&apply(&f0, &f1, i), &apply(&g0, &g1, j));
                                elem_add_scaled(&mut conv, &prod, c, p);
                            }
                            // Witt addition evaluated in A
                            let assign = |name: &str| -> Option<Elem> {
                                let (side, idx) = name.split_at(1);
                                let i: usize = idx.parse().ok()?;
                                Some(match (side, i) {
                                    ("a", 0) => f0.clone(),
                                    ("a", 1) => f1.clone(),
                                    ("b", 0) => g0.clone(),
                                    ("b", 1) => g1.clone(),
                                    _ => return None,
                                })
                            };
                            let witt = polys.sum[m].eval(&ring, &assign).unwrap();
                            assert_eq!(conv, witt);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn verify_cofree_passes_on_lambda() {
        let h = lambda_p(2, 3, 3, 54).unwrap();
        let rep = verify_cofree(&h).unwrap();
        assert!(rep.pass, "{}", rep.summary());
    }

    #[test]
    fn dual_is_valid_and_involutive() {
        let h = lambda_p(2, 3, 1, 12).unwrap();
        let hd = dual(&h).unwrap();
        assert!(check_hopf(&hd).is_empty());
        let hdd = dual(&hd).unwrap();
        assert_eq!(h.coproducts, hdd.coproducts);
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                assert_eq!(
                    h.algebra.basis_product(i, j),
                    hdd.algebra.basis_product(i, j)
                );
            }
        }
    }

    #[test]
    fn counterexample_primitive_dimensions() {
        let (h, hp) = counterexample_pair(3, 2, 36).unwrap();
        assert!(check_hopf(&h).is_empty());
        assert!(check_hopf(&hp).is_empty());
        assert_eq!(
            h.algebra.module.dims_by_degree(),
            hp.algebra.module.dims_by_degree()
        );
        // the duals recover the polynomial side, where the primitive counts
        // in degree p²j = 18 differ: 1 (x^{p²} only) vs 2 (x^{p²} and y)
        let hstar = dual(&h).unwrap();
        let hpstar = dual(&hp).unwrap();
        let pd = primitives(&hstar).unwrap().module.dims_by_degree();
        let ppd = primitives(&hpstar).unwrap().module.dims_by_degree();
        assert_eq!(*pd.get(&18).unwrap_or(&0), 1);
        assert_eq!(*ppd.get(&18).unwrap_or(&0), 2);
    }

    #[test]
    fn counterexample_cofreeness_verdicts() {
        let (h, hp) = counterexample_pair(3, 2, 36).unwrap();
        let rep = verify_cofree(&h).unwrap();
        assert!(!rep.pass);
        // H survives the closure and dimension counts; only the generator
        // profile betrays it
        assert!(rep.closure_failures.is_empty());
        assert!(rep.dim_mismatches.is_empty());
        assert!(!rep.generator_mismatches.is_empty());
        let repp = verify_cofree(&hp).unwrap();
        assert!(repp.pass, "{}", repp.summary());
    }

    #[test]
    fn connectedness_is_required() {
        // a second degree-0 basis element breaks the counit axiom
        let a = make_preset(Preset::TruncatedPolynomial {
            p: 3,
            max_degree: 4,
            gens: vec![Generator {
                name: "e".into(),
                degree: 0,
                nil_power: Some(2),
            }],
        })
        .unwrap();
        assert!(cof_u(&a).is_err());
    }
}
