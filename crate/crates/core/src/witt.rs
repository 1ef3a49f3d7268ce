//! p-typical Witt vectors of graded p-polar algebras.
//!
//! The universal addition/negation/Frobenius polynomials are computed once
//! over ℤ by the ghost-map recursion and cached per (p, length). Arithmetic
//! on a p-polar carrier A is evaluated inside hull(A) — every monomial of an
//! addition polynomial has total weight p^m and is therefore an iterated
//! equal-degree p-fold product — followed by a mandatory check that the
//! result lies in the image of u: A → hull(A).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::fp;
use crate::graded::{elem_add_scaled, elem_zero, Elem, GradedAlgebra};
use crate::intpoly::{IntPoly, RingOps};
use crate::polar::{hull, p_typical_block, Hull, PolarAlgebra};

/// Default guard on the vector length n (entries a_0 … a_n): coefficient
/// growth makes longer sets expensive.
pub const DEFAULT_LENGTH_BOUND: usize = 4;

/// The universal p-typical Witt polynomials of length n.
pub struct WittPolynomialSet {
    pub p: u64,
    pub n: usize,
    /// S_0 … S_n in a_0..a_n, b_0..b_n: coordinates of Witt-vector addition.
    pub sum: Vec<IntPoly>,
    /// N_0 … N_n in a_0..a_n: coordinates of negation.
    pub neg: Vec<IntPoly>,
    /// F_0 … F_{n-1} in a_0..a_n: coordinates of the Frobenius.
    pub frob: Vec<IntPoly>,
}

/// ghost_m(x) = Σ_{i≤m} p^i x_i^{p^{m−i}} of a list of "variables".
fn ghost_of(vars: &[IntPoly], p: u64, m: usize) -> IntPoly {
    let mut acc = IntPoly::zero();
    for i in 0..=m {
        let e = (p as u32).pow((m - i) as u32);
        let term = vars[i].pow(e).scale(BigInt::from(p).pow(i as u32));
        acc = acc.add(&term);
    }
    acc
}

/// Ghost polynomials w_0 … w_n in variables x_0 … x_n.
pub fn ghost_polys(p: u64, n: usize) -> Vec<IntPoly> {
    let vars: Vec<IntPoly> = (0..=n).map(|i| IntPoly::var(&format!("x{i}"))).collect();
    (0..=n).map(|m| ghost_of(&vars, p, m)).collect()
}

/// Ghost components of a vector of integer polynomials (diagnostic: the
/// ghost map is only injective over torsion-free rings, which `IntPoly` is).
pub fn ghost_eval(p: u64, entries: &[IntPoly]) -> Vec<IntPoly> {
    (0..entries.len())
        .map(|m| ghost_of(entries, p, m))
        .collect()
}

fn build_set(p: u64, n: usize) -> Result<WittPolynomialSet> {
    let a: Vec<IntPoly> = (0..=n).map(|i| IntPoly::var(&format!("a{i}"))).collect();
    let b: Vec<IntPoly> = (0..=n).map(|i| IntPoly::var(&format!("b{i}"))).collect();
    let ga: Vec<IntPoly> = (0..=n).map(|m| ghost_of(&a, p, m)).collect();
    let gb: Vec<IntPoly> = (0..=n).map(|m| ghost_of(&b, p, m)).collect();
    let pm = |m: usize| BigInt::from(p).pow(m as u32);
    let mut sum: Vec<IntPoly> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = ga[m].add(&gb[m]);
        for (i, s) in sum.iter().enumerate() {
            let e = (p as u32).pow((m - i) as u32);
            acc = acc.sub(&s.pow(e).scale(pm(i)));
        }
        sum.push(acc.div_exact(&pm(m))?);
    }
    let mut neg: Vec<IntPoly> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = ga[m].neg();
        for (i, s) in neg.iter().enumerate() {
            let e = (p as u32).pow((m - i) as u32);
            acc = acc.sub(&s.pow(e).scale(pm(i)));
        }
        neg.push(acc.div_exact(&pm(m))?);
    }
    let mut frob: Vec<IntPoly> = Vec::with_capacity(n);
    for m in 0..n {
        let mut acc = ga[m + 1].clone();
        for (i, s) in frob.iter().enumerate() {
            let e = (p as u32).pow((m - i) as u32);
            acc = acc.sub(&s.pow(e).scale(pm(i)));
        }
        frob.push(acc.div_exact(&pm(m))?);
    }
    Ok(WittPolynomialSet {
        p,
        n,
        sum,
        neg,
        frob,
    })
}

fn cache() -> &'static Mutex<HashMap<(u64, usize), Arc<WittPolynomialSet>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<WittPolynomialSet>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Witt polynomials for length n, computed once per (p, n) and shared.
pub fn witt_sum_polys(p: u64, n: usize) -> Result<Arc<WittPolynomialSet>> {
    witt_sum_polys_with_bound(p, n, DEFAULT_LENGTH_BOUND)
}

pub fn witt_sum_polys_with_bound(
    p: u64,
    n: usize,
    bound: usize,
) -> Result<Arc<WittPolynomialSet>> {
    if n > bound {
        return Err(Error::WittLengthBound(n, bound));
    }
    let mut guard = cache().lock().expect("witt polynomial cache poisoned");
    if let Some(set) = guard.get(&(p, n)) {
        return Ok(set.clone());
    }
    let set = Arc::new(build_set(p, n)?);
    guard.insert((p, n), set.clone());
    Ok(set)
}

/// Elements of a graded algebra as a ring for polynomial evaluation.
pub struct ElemRing<'a>(pub &'a GradedAlgebra);

impl RingOps<Elem> for ElemRing<'_> {
    fn zero(&self) -> Elem {
        elem_zero()
    }
    fn one(&self) -> Elem {
        self.0.unit_elem()
    }
    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = a.clone();
        elem_add_scaled(&mut out, b, 1, self.0.p());
        out
    }
    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.0.mul_elem(a, b)
    }
    fn int_scale(&self, c: &BigInt, a: &Elem) -> Elem {
        let c = fp::reduce_bigint(c, self.0.p());
        let mut out = elem_zero();
        elem_add_scaled(&mut out, a, c, self.0.p());
        out
    }
}

/// A p-typical Witt vector of degree j: entries a_i in carrier degree j·p^i,
/// entries in degrees above the truncation identically zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector {
    pub degree: usize,
    pub entries: Vec<Elem>,
}

impl WittVector {
    /// n, where the vector is (a_0, …, a_n).
    pub fn n(&self) -> usize {
        self.entries.len() - 1
    }
}

/// A p-polar carrier together with its hull, ready for Witt arithmetic.
pub struct WittContext {
    pub carrier: PolarAlgebra,
    pub hull: Hull,
}

impl WittContext {
    pub fn new(carrier: PolarAlgebra) -> Result<Self> {
        let hull = hull(&carrier)?;
        Ok(WittContext { carrier, hull })
    }

    pub fn p(&self) -> u64 {
        self.carrier.p()
    }

    pub fn zero(&self, degree: usize, n: usize) -> WittVector {
        WittVector {
            degree,
            entries: vec![elem_zero(); n + 1],
        }
    }

    fn entry_degree(&self, j: usize, i: usize) -> usize {
        j * (self.p() as usize).pow(i as u32)
    }

    fn validate(&self, v: &WittVector) -> Result<()> {
        for (i, e) in v.entries.iter().enumerate() {
            let d = self.entry_degree(v.degree, i);
            if d > self.carrier.max_degree() {
                if !e.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "entry {i} lies above the degree truncation and must be zero"
                    )));
                }
                continue;
            }
            for (&k, _) in e {
                if self.carrier.module.degree(k) != d {
                    return Err(Error::InvalidInput(format!(
                        "entry {i} of a degree-{} Witt vector must be homogeneous of degree {d}",
                        v.degree
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn teichmuller(&self, a: &Elem, degree: usize, n: usize) -> Result<WittVector> {
        let mut v = self.zero(degree, n);
        v.entries[0] = a.clone();
        self.validate(&v)?;
        Ok(v)
    }

    /// Evaluate length-matched universal polynomials on the hull images of
    /// the inputs and pull the entries back along u: A → hull(A).
    fn eval_polys(
        &self,
        polys: &[IntPoly],
        degree: usize,
        assign: &dyn Fn(&str) -> Option<Elem>,
    ) -> Result<WittVector> {
        let ring = ElemRing(&self.hull.algebra);
        let mut entries = Vec::with_capacity(polys.len());
        for (m, poly) in polys.iter().enumerate() {
            let value = poly.eval(&ring, assign)?;
            let entry_degree = self.entry_degree(degree, m);
            let entry = self
                .hull
                .preimage(&value)
                .ok_or(Error::NotInImage(entry_degree))?;
            entries.push(entry);
        }
        Ok(WittVector { degree, entries })
    }

    fn hull_images(&self, v: &WittVector) -> Vec<Elem> {
        v.entries.iter().map(|e| self.hull.image(e)).collect()
    }

    pub fn add(&self, u: &WittVector, v: &WittVector) -> Result<WittVector> {
        self.validate(u)?;
        self.validate(v)?;
        if u.degree != v.degree || u.entries.len() != v.entries.len() {
            return Err(Error::InvalidInput(
                "witt_add needs equal degree and length".into(),
            ));
        }
        let set = witt_sum_polys(self.p(), u.n())?;
        let iu = self.hull_images(u);
        let iv = self.hull_images(v);
        self.eval_polys(&set.sum, u.degree, &|name| {
            let (head, idx) = name.split_at(1);
            let i: usize = idx.parse().ok()?;
            match head {
                "a" => iu.get(i).cloned(),
                "b" => iv.get(i).cloned(),
                _ => None,
            }
        })
    }

    pub fn neg(&self, v: &WittVector) -> Result<WittVector> {
        self.validate(v)?;
        let set = witt_sum_polys(self.p(), v.n())?;
        let iv = self.hull_images(v);
        self.eval_polys(&set.neg, v.degree, &|name| {
            let (head, idx) = name.split_at(1);
            let i: usize = idx.parse().ok()?;
            (head == "a").then(|| iv.get(i).cloned()).flatten()
        })
    }

    /// Frobenius: length n+1 → n, degree j → pj.
    pub fn frobenius(&self, v: &WittVector) -> Result<WittVector> {
        self.validate(v)?;
        let set = witt_sum_polys(self.p(), v.n())?;
        let iv = self.hull_images(v);
        self.eval_polys(&set.frob, v.degree * self.p() as usize, &|name| {
            let (head, idx) = name.split_at(1);
            let i: usize = idx.parse().ok()?;
            (head == "a").then(|| iv.get(i).cloned()).flatten()
        })
    }

    /// Verschiebung: literal shift (0, a_0, …, a_{n}), degree pj → j.
    pub fn verschiebung(&self, v: &WittVector) -> Result<WittVector> {
        self.validate(v)?;
        if v.degree % self.p() as usize != 0 && v.degree != 0 {
            return Err(Error::InvalidInput(format!(
                "verschiebung of a degree-{} vector needs p | degree",
                v.degree
            )));
        }
        let mut entries = vec![elem_zero()];
        entries.extend(v.entries.iter().cloned());
        Ok(WittVector {
            degree: v.degree / self.p() as usize,
            entries,
        })
    }

    /// Multiplication by p = V ∘ F (length preserved).
    pub fn mul_p(&self, v: &WittVector) -> Result<WittVector> {
        self.verschiebung(&self.frobenius(v)?)
    }
}

/// Witt addition evaluated with the binary multiplication of an honest
/// algebra (no hull, no image check). Lemma-level fact: this agrees with the
/// p-polar route through polarize(B).
pub fn witt_add_in_algebra(b: &GradedAlgebra, u: &WittVector, v: &WittVector) -> Result<WittVector> {
    if u.degree != v.degree || u.entries.len() != v.entries.len() {
        return Err(Error::InvalidInput(
            "witt_add needs equal degree and length".into(),
        ));
    }
    let set = witt_sum_polys(b.p(), u.n())?;
    let ring = ElemRing(b);
    let mut entries = Vec::with_capacity(u.entries.len());
    for poly in &set.sum {
        let value = poly.eval(&ring, &|name| {
            let (head, idx) = name.split_at(1);
            let i: usize = idx.parse().ok()?;
            match head {
                "a" => u.entries.get(i).cloned(),
                "b" => v.entries.get(i).cloned(),
                _ => None,
            }
        })?;
        entries.push(value);
    }
    Ok(WittVector {
        degree: u.degree,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Unipotent co-Witt vectors
// ---------------------------------------------------------------------------

/// Truncated unipotent co-Witt vectors CW^u(A).
///
/// For m = a·p^l (p ∤ a), CW^u(A)_m is the stage-l group W_l(A)_a of the
/// V-colimit — finite and exact. In these coordinates, for positive m,
/// F: CW_m → CW_{pm} is b ↦ (0, b_0^p, …, b_l^p) and V: CW_m → CW_{m/p}
/// drops the top entry. In degree 0 the colimit is truncated at an explicit
/// stage; F is the entrywise p-th power and V is (0, b_0, …, b_{n−1}).
pub struct CoWitt {
    pub ctx: WittContext,
    /// length-1 of the degree-0 group (absent when A_0 = 0)
    pub deg0_stage: Option<usize>,
    /// positive degree m → colimit stage l (the group is W_l(A)_a)
    stages: BTreeMap<usize, usize>,
}

pub fn cowitt(a: &PolarAlgebra, n_max: Option<usize>) -> Result<CoWitt> {
    let p = a.p();
    let pu = p as usize;
    let ctx = WittContext::new(a.clone())?;
    let mut stages = BTreeMap::new();
    for m in 1..=a.max_degree() {
        let (j, l) = p_typical_block(p, m);
        let nonzero = (0..=l).any(|i| !a.module.indices_of_degree(j * pu.pow(i)).is_empty());
        if nonzero {
            stages.insert(m, l as usize);
        }
    }
    let deg0 = a.module.indices_of_degree(0);
    let deg0_stage = if deg0.is_empty() {
        None
    } else if let Some(n) = n_max {
        Some(n)
    } else {
        // without an explicit stage bound, a nilpotent degree-0 Frobenius
        // gives a canonical cap: its nilpotence index
        let dim = deg0.len();
        let pos: HashMap<usize, usize> = deg0.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let mut f = crate::matrix::FpMatrix::zero(p, dim, dim);
        for (c, &k) in deg0.iter().enumerate() {
            let img = a.pth_power(&crate::graded::elem_single(k, 1));
            for (&i, &v) in &img {
                f.set(pos[&i], c, v);
            }
        }
        let mut power = crate::matrix::FpMatrix::identity(p, dim);
        let mut index = None;
        for step in 0..=dim {
            if power == crate::matrix::FpMatrix::zero(p, dim, dim) {
                index = Some(step);
                break;
            }
            power = f.mul(&power);
        }
        match index {
            Some(nu) => Some(nu),
            None => return Err(Error::NonNilpotentDegreeZero),
        }
    };
    Ok(CoWitt {
        ctx,
        deg0_stage,
        stages,
    })
}

impl CoWitt {
    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// Degrees with a (possibly) nonzero group.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if self.deg0_stage.is_some() {
            out.push(0);
        }
        out.extend(self.stages.keys().copied());
        out
    }

    /// Stage l of CW_m (the group is a length-(l+1) Witt vector space).
    pub fn stage(&self, m: usize) -> Option<usize> {
        if m == 0 {
            self.deg0_stage
        } else {
            self.stages.get(&m).copied()
        }
    }

    /// Block degree j of the Witt coordinates at degree m.
    pub fn block(&self, m: usize) -> usize {
        if m == 0 {
            0
        } else {
            p_typical_block(self.p(), m).0
        }
    }

    /// Carrier dimensions of the entry spaces of CW_m.
    pub fn entry_dims(&self, m: usize) -> Vec<usize> {
        let Some(l) = self.stage(m) else {
            return Vec::new();
        };
        let j = self.block(m);
        (0..=l)
            .map(|i| {
                let d = j * (self.p() as usize).pow(i as u32);
                self.ctx.carrier.module.indices_of_degree(d).len()
            })
            .collect()
    }

    /// Total order of the finite group CW_m.
    pub fn order(&self, m: usize) -> u128 {
        let dims: usize = self.entry_dims(m).iter().sum();
        (self.p() as u128).pow(dims as u32)
    }

    pub fn zero(&self, m: usize) -> Vec<Elem> {
        vec![elem_zero(); self.stage(m).map_or(0, |l| l + 1)]
    }

    fn as_witt(&self, m: usize, b: &[Elem]) -> WittVector {
        WittVector {
            degree: self.block(m),
            entries: b.to_vec(),
        }
    }

    pub fn add(&self, m: usize, u: &[Elem], v: &[Elem]) -> Result<Vec<Elem>> {
        let w = self.ctx.add(&self.as_witt(m, u), &self.as_witt(m, v))?;
        Ok(w.entries)
    }

    pub fn neg(&self, m: usize, v: &[Elem]) -> Result<Vec<Elem>> {
        Ok(self.ctx.neg(&self.as_witt(m, v))?.entries)
    }

    /// F: CW_m → CW_{pm}; `None` when the target degree is truncated away.
    pub fn frobenius(&self, m: usize, b: &[Elem]) -> Option<(usize, Vec<Elem>)> {
        let a = &self.ctx.carrier;
        if m == 0 {
            let powered: Vec<Elem> = b.iter().map(|e| a.pth_power(e)).collect();
            return Some((0, powered));
        }
        let target = m * self.p() as usize;
        self.stage(target)?;
        let mut out = vec![elem_zero()];
        out.extend(b.iter().map(|e| a.pth_power(e)));
        Some((target, out))
    }

    /// V: CW_m → CW_{m/p}; `None` when the target group is trivial.
    pub fn verschiebung(&self, m: usize, b: &[Elem]) -> Option<(usize, Vec<Elem>)> {
        if m == 0 {
            let mut out = vec![elem_zero()];
            out.extend(b[..b.len().saturating_sub(1)].iter().cloned());
            return Some((0, out));
        }
        if m % self.p() as usize != 0 {
            return None; // stage-0 block: V lands in the zero group
        }
        Some((m / self.p() as usize, b[..b.len() - 1].to_vec()))
    }

    /// Enumerate all elements of CW_m.
    pub fn elements(&self, m: usize) -> Vec<Vec<Elem>> {
        let Some(l) = self.stage(m) else {
            return Vec::new();
        };
        let j = self.block(m);
        let p = self.p();
        let pu = p as usize;
        let mut out: Vec<Vec<Elem>> = vec![Vec::new()];
        for i in 0..=l {
            let d = j * pu.pow(i as u32);
            let idxs = self.ctx.carrier.module.indices_of_degree(d);
            let mut entry_values: Vec<Elem> = vec![elem_zero()];
            for &k in &idxs {
                let mut next = Vec::new();
                for base in &entry_values {
                    for c in 0..p {
                        let mut e = base.clone();
                        if c != 0 {
                            e.insert(k, c);
                        }
                        next.push(e);
                    }
                }
                entry_values = next;
            }
            let mut grown = Vec::with_capacity(out.len() * entry_values.len());
            for prefix in &out {
                for ev in &entry_values {
                    let mut v = prefix.clone();
                    v.push(ev.clone());
                    grown.push(v);
                }
            }
            out = grown;
        }
        out
    }

    /// Additive order of an element (by repeated addition).
    pub fn element_order(&self, m: usize, b: &[Elem]) -> Result<u64> {
        let zero = self.zero(m);
        let mut acc = b.to_vec();
        let mut ord = 1u64;
        while acc != zero {
            acc = self.add(m, &acc, b)?;
            ord += 1;
            if ord > 1 << 20 {
                return Err(Error::InvalidInput("element order exceeds bound".into()));
            }
        }
        Ok(ord)
    }
}
