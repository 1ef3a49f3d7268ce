//! Finite graded Dieudonné modules: per-degree finite abelian p-groups with
//! operators F (degree n → pn) and V (degree pn → n) satisfying FV = VF = p,
//! plus the packaging of unipotent co-Witt vectors as such a module,
//! invariant fingerprints, and isomorphism testing.
//!
//! W(F_p) = ℤ_p and the Frobenius on F_p is trivial, so a W(F_p)-module of
//! finite length is just a finite abelian p-group; each degree is stored as
//! a list of cyclic orders p^{e_1}, …, p^{e_r} with integer matrices taken
//! modulo the target orders.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::Result;
use crate::graded::Elem;
use crate::polar::PolarAlgebra;
use crate::witt::{cowitt, CoWitt};

/// One degree of a Dieudonné module: the group ⊕_i ℤ/p^{orders[i]}, the
/// matrix of F out of this degree (into degree pn), and the matrix of V
/// into this degree (from degree pn). In degree 0 both are endomorphisms.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DegreePart {
    /// exponents e_i of the cyclic factors ℤ/p^{e_i}
    pub orders: Vec<u32>,
    /// rows = rank in degree pn, cols = rank here
    pub f: Vec<Vec<u64>>,
    /// rows = rank here, cols = rank in degree pn
    pub v: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DieudonneModule {
    pub p: u64,
    pub max_degree: usize,
    pub degrees: BTreeMap<usize, DegreePart>,
}

fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("cyclic order overflows u64")
}

impl DieudonneModule {
    pub fn rank(&self, n: usize) -> usize {
        self.degrees.get(&n).map_or(0, |d| d.orders.len())
    }

    pub fn orders(&self, n: usize) -> Vec<u32> {
        self.degrees.get(&n).map_or(Vec::new(), |d| d.orders.clone())
    }

    /// |M_n| = p^{Σ e_i}.
    pub fn group_order(&self, n: usize) -> u128 {
        let e: u32 = self.orders(n).iter().sum();
        (self.p as u128).pow(e)
    }

    /// Σ_n Σ_i e_i — log_p of the total order, saturating is unnecessary at
    /// desk scale.
    pub fn total_length(&self) -> u32 {
        self.degrees
            .values()
            .map(|d| d.orders.iter().sum::<u32>())
            .sum()
    }

    pub fn zero_elem(&self, n: usize) -> Vec<u64> {
        vec![0; self.rank(n)]
    }

    pub fn reduce(&self, n: usize, x: &mut [u64]) {
        let orders = self.orders(n);
        for (xi, &e) in x.iter_mut().zip(&orders) {
            *xi %= pow_u64(self.p, e);
        }
    }

    pub fn add(&self, n: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        let orders = self.orders(n);
        a.iter()
            .zip(b)
            .zip(&orders)
            .map(|((&x, &y), &e)| (x + y) % pow_u64(self.p, e))
            .collect()
    }

    pub fn scale(&self, n: usize, c: u64, a: &[u64]) -> Vec<u64> {
        let orders = self.orders(n);
        a.iter()
            .zip(&orders)
            .map(|(&x, &e)| {
                let m = pow_u64(self.p, e);
                ((c % m) * (x % m)) % m
            })
            .collect()
    }

    /// Additive order of an element of M_n (a power of p).
    pub fn elem_order(&self, n: usize, a: &[u64]) -> u64 {
        let orders = self.orders(n);
        let mut ord = 1u64;
        for (&x, &e) in a.iter().zip(&orders) {
            if x == 0 {
                continue;
            }
            // order of x in ℤ/p^e: p^e / gcd(x, p^e)
            let m = pow_u64(self.p, e);
            let mut g = x % m;
            let mut k = m;
            while g != 0 {
                let t = k % g;
                k = g;
                g = t;
            }
            ord = ord.max(m / k);
        }
        ord
    }

    /// All elements of M_n (lexicographic, deterministic).
    pub fn elements(&self, n: usize) -> Vec<Vec<u64>> {
        let orders = self.orders(n);
        let mut out = vec![Vec::new()];
        for &e in &orders {
            let m = pow_u64(self.p, e);
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for base in &out {
                for c in 0..m {
                    let mut v = base.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    fn apply_matrix(&self, target: usize, mat: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
        let orders = self.orders(target);
        (0..orders.len())
            .map(|i| {
                let m = pow_u64(self.p, orders[i]);
                let mut acc = 0u64;
                for (j, &xj) in x.iter().enumerate() {
                    acc = (acc + (mat[i][j] % m) * (xj % m)) % m;
                }
                acc
            })
            .collect()
    }

    /// F: M_n → M_{pn} (the zero group when absent or truncated).
    pub fn apply_f(&self, n: usize, x: &[u64]) -> (usize, Vec<u64>) {
        let target = if n == 0 { 0 } else { n * self.p as usize };
        let Some(part) = self.degrees.get(&n) else {
            return (target, self.zero_elem(target));
        };
        if self.rank(target) == 0 {
            return (target, Vec::new());
        }
        (target, self.apply_matrix(target, &part.f, x))
    }

    /// V: M_{pn} → M_n, stored in the part at degree n.
    pub fn apply_v(&self, n: usize, x: &[u64]) -> (usize, Vec<u64>) {
        let Some(part) = self.degrees.get(&n) else {
            return (n, self.zero_elem(n));
        };
        if part.orders.is_empty() {
            return (n, Vec::new());
        }
        (n, self.apply_matrix(n, &part.v, x))
    }
}

/// Check FV = p, VF = p in every degree, and V-nilpotence in degree 0.
/// An empty report means M is a valid unipotent Dieudonné module.
pub fn check_dieudonne(m: &DieudonneModule) -> Vec<String> {
    let mut report = Vec::new();
    let p = m.p;
    for (&n, part) in &m.degrees {
        let target = if n == 0 { 0 } else { n * p as usize };
        let tr = m.rank(target);
        let r = part.orders.len();
        // shape checks
        let f_ok = part.f.len() == tr && part.f.iter().all(|row| row.len() == r);
        let v_ok = part.v.len() == r && part.v.iter().all(|row| row.len() == tr);
        if !f_ok {
            report.push(format!("degree {n}: F matrix must be {tr}x{r}"));
            continue;
        }
        if !v_ok {
            report.push(format!("degree {n}: V matrix must be {r}x{tr}"));
            continue;
        }
        // when pn lies above the truncation the target group has been cut
        // off, so FV = VF = p is unverifiable there rather than violated
        if n > 0 && target > m.max_degree {
            continue;
        }
        // VF = p on generators of M_n
        for j in 0..r {
            let mut gen = m.zero_elem(n);
            gen[j] = 1;
            let (_, fx) = m.apply_f(n, &gen);
            let (_, vfx) = m.apply_v(n, &fx);
            let px = m.scale(n, p, &gen);
            if vfx != px {
                report.push(format!("degree {n}: VF ≠ p on generator {j}"));
            }
        }
        // FV = p on generators of M_{pn}
        for j in 0..tr {
            let mut gen = m.zero_elem(target);
            gen[j] = 1;
            let (_, vx) = m.apply_v(n, &gen);
            let (_, fvx) = m.apply_f(n, &vx);
            let px = m.scale(target, p, &gen);
            if fvx != px {
                report.push(format!("degree {n}: FV ≠ p on target generator {j}"));
            }
        }
    }
    // unipotence: V nilpotent on the degree-0 part (automatic in positive
    // degrees, where iterated V eventually leaves the grading)
    if let Some(part) = m.degrees.get(&0) {
        let len: u32 = part.orders.iter().sum();
        let r = part.orders.len();
        let mut all_zero = true;
        for j in 0..r {
            let mut x = m.zero_elem(0);
            x[j] = 1;
            for _ in 0..len {
                x = m.apply_v(0, &x).1;
            }
            if x.iter().any(|&c| c != 0) {
                all_zero = false;
            }
        }
        if !all_zero {
            report.push("degree 0: V is not nilpotent (module is not unipotent)".into());
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Packaging CW^u as a Dieudonné module
// ---------------------------------------------------------------------------

type Key = Vec<(usize, usize, u64)>;

fn elem_key(v: &[Elem]) -> Key {
    let mut out = Vec::new();
    for (i, e) in v.iter().enumerate() {
        for (&k, &c) in e {
            out.push((i, k, c));
        }
    }
    out
}

/// Greedy invariant-factor basis of one finite degree group of CW^u:
/// repeatedly take an element of maximal order in the quotient by the span
/// so far, corrected to a representative generating a direct summand.
struct GroupBasis {
    gens: Vec<Vec<Elem>>,
    orders: Vec<u64>, // p^{e_i}
    coords: BTreeMap<Key, Vec<u64>>,
}

fn span_elements(cw: &CoWitt, m: usize, gens: &[Vec<Elem>], orders: &[u64]) -> Result<Vec<(Vec<Elem>, Vec<u64>)>> {
    let mut out = vec![(cw.zero(m), Vec::new())];
    for (g, &ord) in gens.iter().zip(orders) {
        let mut next = Vec::with_capacity(out.len() * ord as usize);
        for (base, coord) in &out {
            let mut acc = base.clone();
            for c in 0..ord {
                let mut coords = coord.clone();
                coords.push(c);
                next.push((acc.clone(), coords));
                if c + 1 < ord {
                    acc = cw.add(m, &acc, g)?;
                }
            }
        }
        out = next;
    }
    Ok(out)
}

fn group_basis(cw: &CoWitt, m: usize) -> Result<GroupBasis> {
    let all = cw.elements(m);
    let mut gens: Vec<Vec<Elem>> = Vec::new();
    let mut orders: Vec<u64> = Vec::new();
    loop {
        let span = span_elements(cw, m, &gens, &orders)?;
        let span_keys: BTreeSet<Key> = span.iter().map(|(e, _)| elem_key(e)).collect();
        if span_keys.len() == all.len() {
            let coords = span.into_iter().map(|(e, c)| (elem_key(&e), c)).collect();
            return Ok(GroupBasis {
                gens,
                orders,
                coords,
            });
        }
        // element with maximal order in the quotient by the current span
        let quotient_order = |g: &Vec<Elem>| -> Result<u64> {
            let mut acc = g.clone();
            let mut k = 1u64;
            while !span_keys.contains(&elem_key(&acc)) {
                // multiply by p
                let mut next = acc.clone();
                for _ in 1..cw.p() {
                    next = cw.add(m, &next, &acc)?;
                }
                acc = next;
                k *= cw.p();
            }
            Ok(k)
        };
        let mut best: Option<(u64, Vec<Elem>)> = None;
        for g in &all {
            if span_keys.contains(&elem_key(g)) {
                continue;
            }
            let q = quotient_order(g)?;
            if best.as_ref().map_or(true, |(bq, _)| q > *bq) {
                best = Some((q, g.clone()));
            }
        }
        let (q, g) = best.expect("span is proper, a new element exists");
        // correct to a representative of exact order q: g' = g − h with
        // h in the span and ord(g − h) = q (exists by maximality)
        let mut chosen = None;
        'h: for (h, _) in &span {
            let neg_h = cw.neg(m, h)?;
            let cand = cw.add(m, &g, &neg_h)?;
            if cw.element_order(m, &cand)? == q {
                chosen = Some(cand);
                break 'h;
            }
        }
        gens.push(chosen.expect("summand representative must exist"));
        orders.push(q);
    }
}

/// Package CW^u(A) with its F and V as a Dieudonné module. Depends only on
/// the p-polar structure of A.
pub fn cowitt_dieudonne(a: &PolarAlgebra, n_max: Option<usize>) -> Result<DieudonneModule> {
    let cw = cowitt(a, n_max)?;
    let p = a.p();
    let pu = p as usize;
    let degs = cw.degrees();
    let mut bases: BTreeMap<usize, GroupBasis> = BTreeMap::new();
    for &m in &degs {
        let b = group_basis(&cw, m)?;
        if !b.gens.is_empty() {
            bases.insert(m, b);
        }
    }
    let mut degrees: BTreeMap<usize, DegreePart> = BTreeMap::new();
    for (&m, basis) in &bases {
        let orders: Vec<u32> = basis
            .orders
            .iter()
            .map(|&o| {
                let mut e = 0;
                let mut x = o;
                while x > 1 {
                    x /= p;
                    e += 1;
                }
                e
            })
            .collect();
        let target = if m == 0 { 0 } else { m * pu };
        let tbasis = if m == 0 { bases.get(&0) } else { bases.get(&target) };
        // F: column j = coordinates of F(g_j) in the target basis
        let trank = tbasis.map_or(0, |b| b.gens.len());
        let mut f = vec![vec![0u64; basis.gens.len()]; trank];
        if let Some(tb) = tbasis {
            for (j, g) in basis.gens.iter().enumerate() {
                if let Some((td, fg)) = cw.frobenius(m, g) {
                    debug_assert_eq!(td, target);
                    let coords = tb
                        .coords
                        .get(&elem_key(&fg))
                        .expect("F image must lie in the target group");
                    for (i, &c) in coords.iter().enumerate() {
                        f[i][j] = c;
                    }
                }
            }
        }
        // V: column j = coordinates of V(t_j) here, t_j a target generator
        let mut v = vec![vec![0u64; trank]; basis.gens.len()];
        if let Some(tb) = tbasis {
            for (j, g) in tb.gens.iter().enumerate() {
                if let Some((td, vg)) = cw.verschiebung(target, g) {
                    debug_assert_eq!(td, m);
                    let coords = basis
                        .coords
                        .get(&elem_key(&vg))
                        .expect("V image must lie in this group");
                    for (i, &c) in coords.iter().enumerate() {
                        v[i][j] = c;
                    }
                }
            }
        }
        degrees.insert(m, DegreePart { orders, f, v });
    }
    Ok(DieudonneModule {
        p,
        max_degree: a.max_degree(),
        degrees,
    })
}

// ---------------------------------------------------------------------------
// Fingerprints and isomorphism testing
// ---------------------------------------------------------------------------

/// One row of the invariant table: the word read left to right is applied
/// innermost first (e.g. "FV" is F ∘ V).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FingerprintRow {
    pub degree: usize,
    pub word: String,
    pub im_order: u128,
    pub ker_order: u128,
}

fn apply_word(m: &DieudonneModule, word: &str, n: usize, x: &[u64]) -> Option<(usize, Vec<u64>)> {
    let mut deg = n;
    let mut cur = x.to_vec();
    for op in word.chars().rev() {
        match op {
            'F' => {
                let (d, y) = m.apply_f(deg, &cur);
                deg = d;
                cur = y;
            }
            'V' => {
                // V maps degree d to d/p; defined when p | d or d = 0
                if deg != 0 && deg % m.p as usize != 0 {
                    return None;
                }
                let src = if deg == 0 { 0 } else { deg / m.p as usize };
                let (d, y) = m.apply_v(src, &cur);
                deg = d;
                cur = y;
            }
            _ => return None,
        }
    }
    Some((deg, cur))
}

/// Orders of image and kernel of every {F,V}-word of length ≤ L, per degree.
/// Equal for isomorphic modules.
pub fn fingerprint(m: &DieudonneModule, max_len: usize) -> Vec<FingerprintRow> {
    let mut words: Vec<String> = vec![String::new()];
    let mut rows = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &words {
            for op in ['F', 'V'] {
                next.push(format!("{op}{w}"));
            }
        }
        for w in &next {
            for (&n, _) in &m.degrees {
                let Some(_) = apply_word(m, w, n, &m.zero_elem(n)) else {
                    continue;
                };
                let mut images: BTreeSet<(usize, Vec<u64>)> = BTreeSet::new();
                for x in m.elements(n) {
                    images.insert(apply_word(m, w, n, &x).expect("word applies"));
                }
                let im = images.len() as u128;
                rows.push(FingerprintRow {
                    degree: n,
                    word: w.clone(),
                    im_order: im,
                    ker_order: m.group_order(n) / im,
                });
            }
        }
        words = next;
    }
    rows.sort();
    rows
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoVerdict {
    Yes,
    No(String),
    Inconclusive,
}

/// Log_p of the largest total order attempted by the isomorphism search.
pub const ISO_SEARCH_BOUND_LOG_P: u32 = 24;

const ISO_NODE_BUDGET: u64 = 4_000_000;

struct IsoSearch<'a> {
    m: &'a DieudonneModule,
    n: &'a DieudonneModule,
    /// flattened generator list: (degree, index within degree, order p^e)
    gens: Vec<(usize, usize, u64)>,
    /// assigned images, aligned with `gens`
    images: Vec<Vec<u64>>,
    nodes: u64,
}

impl IsoSearch<'_> {
    /// φ of an element of M_d, defined once all generators of degree d are
    /// assigned (generators are processed degree by degree).
    fn phi(&self, d: usize, x: &[u64]) -> Vec<u64> {
        let mut acc = self.n.zero_elem(d);
        for ((gd, gi, _), img) in self.gens.iter().zip(&self.images) {
            if *gd != d {
                continue;
            }
            let term = self.n.scale(d, x[*gi], img);
            acc = self.n.add(d, &acc, &term);
        }
        acc
    }

    fn degree_complete(&self, d: usize) -> bool {
        let total = self.m.rank(d);
        let assigned = self
            .gens
            .iter()
            .take(self.images.len())
            .filter(|(gd, _, _)| *gd == d)
            .count();
        assigned == total
    }

    /// Checks that become available after completing degree `d`.
    fn check_degree(&self, d: usize) -> bool {
        // bijectivity on this degree
        let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
        for x in self.m.elements(d) {
            if !seen.insert(self.phi(d, &x)) {
                return false;
            }
        }
        // F-equivariance out of the lower degree d/p (target now complete)
        let p = self.m.p as usize;
        let lows: Vec<usize> = if d == 0 {
            vec![0]
        } else if d % p == 0 {
            vec![d / p]
        } else {
            vec![]
        };
        for low in lows {
            if !self.degree_complete(low) {
                continue;
            }
            for x in self.m.elements(low) {
                let (_, fx) = self.m.apply_f(low, &x);
                let lhs = self.phi(d, &fx);
                let (_, rhs) = self.n.apply_f(low, &self.phi(low, &x));
                if lhs != rhs {
                    return false;
                }
            }
            // V-equivariance into the lower degree
            for x in self.m.elements(d) {
                let (_, vx) = self.m.apply_v(low, &x);
                let lhs = self.phi(low, &vx);
                let (_, rhs) = self.n.apply_v(low, &self.phi(d, &x));
                if lhs != rhs {
                    return false;
                }
            }
        }
        // F/V out of *this* degree into a higher completed degree
        let high = if d == 0 { 0 } else { d * p };
        if high != d && self.degree_complete(high) && self.m.rank(high) > 0 {
            for x in self.m.elements(d) {
                let (_, fx) = self.m.apply_f(d, &x);
                if self.phi(high, &fx) != self.n.apply_f(d, &self.phi(d, &x)).1 {
                    return false;
                }
            }
            for x in self.m.elements(high) {
                let (_, vx) = self.m.apply_v(d, &x);
                if self.phi(d, &vx) != self.n.apply_v(d, &self.phi(high, &x)).1 {
                    return false;
                }
            }
        }
        true
    }

    fn search(&mut self, k: usize) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > ISO_NODE_BUDGET {
            return None; // budget exhausted → inconclusive
        }
        if k == self.gens.len() {
            return Some(true);
        }
        let (d, _, ord) = self.gens[k];
        for cand in self.n.elements(d) {
            // a generator of order p^e must map to an element of order ≤ p^e
            if self.n.elem_order(d, &cand) > ord {
                continue;
            }
            self.images.push(cand);
            let ok = if self.degree_complete(d) {
                self.check_degree(d)
            } else {
                true
            };
            if ok {
                match self.search(k + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
            }
            self.images.pop();
        }
        Some(false)
    }
}

/// Fingerprint-first isomorphism test with an explicit inconclusive verdict.
pub fn is_isomorphic(m: &DieudonneModule, n: &DieudonneModule) -> IsoVerdict {
    if m.p != n.p {
        return IsoVerdict::No(format!("different primes: {} vs {}", m.p, n.p));
    }
    let degs: BTreeSet<usize> = m.degrees.keys().chain(n.degrees.keys()).copied().collect();
    for &d in &degs {
        let mut a = m.orders(d);
        let mut b = n.orders(d);
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return IsoVerdict::No(format!(
                "degree {d}: cyclic orders differ ({a:?} vs {b:?})"
            ));
        }
    }
    if m.total_length() > ISO_SEARCH_BOUND_LOG_P {
        // fingerprinting and searching both enumerate group elements;
        // beyond the bound neither is attempted
        return IsoVerdict::Inconclusive;
    }
    let fa = fingerprint(m, 4);
    let fb = fingerprint(n, 4);
    if fa != fb {
        let diff = fa
            .iter()
            .zip(&fb)
            .find(|(x, y)| x != y)
            .map(|(x, y)| format!("{x:?} vs {y:?}"))
            .unwrap_or_else(|| "fingerprint table sizes differ".into());
        return IsoVerdict::No(format!("fingerprints differ: {diff}"));
    }
    // search for an explicit equivariant bijection, generator by generator,
    // in order of increasing degree (so F/V checks fire as soon as possible)
    let mut gens = Vec::new();
    for (&d, part) in &m.degrees {
        for (i, &e) in part.orders.iter().enumerate() {
            gens.push((d, i, pow_u64(m.p, e)));
        }
    }
    let mut s = IsoSearch {
        m,
        n,
        gens,
        images: Vec::new(),
        nodes: 0,
    };
    match s.search(0) {
        Some(true) => IsoVerdict::Yes,
        Some(false) => IsoVerdict::No("exhaustive search found no equivariant bijection".into()),
        None => IsoVerdict::Inconclusive,
    }
}

/// Conjugate every degree group by a random automorphism; the result is
/// isomorphic to M. Used as a test witness generator.
pub fn random_conjugate(m: &DieudonneModule, rng: &mut impl Rng) -> DieudonneModule {
    let p = m.p;
    // random automorphism per degree, as (matrix, inverse matrix)
    let mut autos: BTreeMap<usize, (Vec<Vec<u64>>, Vec<Vec<u64>>)> = BTreeMap::new();
    for (&d, part) in &m.degrees {
        let r = part.orders.len();
        'outer: loop {
            // entry (i,j) must be divisible by p^{max(0, e_i − e_j)} for the
            // matrix to define an endomorphism
            let mut t = vec![vec![0u64; r]; r];
            for i in 0..r {
                for j in 0..r {
                    let m_i = pow_u64(p, part.orders[i]);
                    let step = pow_u64(p, part.orders[i].saturating_sub(part.orders[j]));
                    let choices = m_i / step;
                    t[i][j] = step * rng.gen_range(0..choices);
                }
            }
            // bijectivity by enumeration; retry otherwise
            let mut seen = BTreeSet::new();
            for x in m.elements(d) {
                if !seen.insert(m.apply_matrix(d, &t, &x)) {
                    continue 'outer;
                }
            }
            // inverse: columns are preimages of the generators
            let mut inv = vec![vec![0u64; r]; r];
            for j in 0..r {
                let mut gen = m.zero_elem(d);
                gen[j] = 1;
                let pre = m
                    .elements(d)
                    .into_iter()
                    .find(|x| m.apply_matrix(d, &t, x) == gen)
                    .expect("bijection has preimages");
                for (i, &c) in pre.iter().enumerate() {
                    inv[i][j] = c;
                }
            }
            autos.insert(d, (t, inv));
            break;
        }
    }
    let ident = |d: usize| -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
        let r = m.rank(d);
        let mut id = vec![vec![0u64; r]; r];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1;
        }
        (id.clone(), id)
    };
    let get = |d: usize| autos.get(&d).cloned().unwrap_or_else(|| ident(d));
    let mut degrees = BTreeMap::new();
    for (&d, part) in &m.degrees {
        let target = if d == 0 { 0 } else { d * p as usize };
        let (t_tgt, t_tgt_inv) = get(target);
        let (t_src, t_src_inv) = get(d);
        // F' = T_{pn} F T_n⁻¹, V' = T_n V T_{pn}⁻¹ — computed columnwise
        let tr = m.rank(target);
        let r = part.orders.len();
        let mut f = vec![vec![0u64; r]; tr];
        for j in 0..r {
            let mut gen = m.zero_elem(d);
            gen[j] = 1;
            let col = m.apply_matrix(
                target,
                &t_tgt,
                &m.apply_f(d, &m.apply_matrix(d, &t_src_inv, &gen)).1,
            );
            for (i, &c) in col.iter().enumerate() {
                f[i][j] = c;
            }
        }
        let mut v = vec![vec![0u64; tr]; r];
        for j in 0..tr {
            let mut gen = m.zero_elem(target);
            gen[j] = 1;
            let col = m.apply_matrix(
                d,
                &t_src,
                &m.apply_v(d, &m.apply_matrix(target, &t_tgt_inv, &gen)).1,
            );
            for (i, &c) in col.iter().enumerate() {
                v[i][j] = c;
            }
        }
        degrees.insert(
            d,
            DegreePart {
                orders: part.orders.clone(),
                f,
                v,
            },
        );
    }
    DieudonneModule {
        p,
        max_degree: m.max_degree,
        degrees,
    }
}
