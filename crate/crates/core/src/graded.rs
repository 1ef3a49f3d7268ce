//! Finite-type nonnegatively graded modules and graded-commutative algebras
//! over F_p, truncated at a maximum degree `D`.
//!
//! Algebras are presented by a homogeneous basis and structure constants;
//! every product landing above `D` is truncated to zero. Products only raise
//! degree, so degreewise computations below `D` are exact.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp;

/// Sparse linear combination of basis elements, indexed into a module basis.
pub type Elem = BTreeMap<usize, u64>;

pub fn elem_zero() -> Elem {
    BTreeMap::new()
}

pub fn elem_single(idx: usize, coef: u64) -> Elem {
    let mut e = BTreeMap::new();
    if coef != 0 {
        e.insert(idx, coef);
    }
    e
}

pub fn elem_add_scaled(target: &mut Elem, src: &Elem, scale: u64, p: u64) {
    for (&i, &c) in src {
        let v = fp::add(*target.get(&i).unwrap_or(&0), fp::mul(c, scale, p), p);
        if v == 0 {
            target.remove(&i);
        } else {
            target.insert(i, v);
        }
    }
}

pub fn elem_is_zero(e: &Elem) -> bool {
    e.is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElem {
    pub name: String,
    pub degree: usize,
}

/// Finite-type graded F_p-module with named homogeneous basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedModule {
    pub p: u64,
    pub max_degree: usize,
    pub basis: Vec<BasisElem>,
}

impl GradedModule {
    pub fn new(p: u64, max_degree: usize, basis: Vec<BasisElem>) -> Result<Self> {
        if !fp::is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &basis {
            if !seen.insert(b.name.clone()) {
                return Err(Error::DuplicateBasisName(b.name.clone()));
            }
            if b.degree > max_degree {
                return Err(Error::InvalidInput(format!(
                    "basis element {} has degree {} > max degree {}",
                    b.name, b.degree, max_degree
                )));
            }
        }
        Ok(GradedModule {
            p,
            max_degree,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.basis[idx].degree
    }

    pub fn indices_of_degree(&self, d: usize) -> Vec<usize> {
        (0..self.basis.len())
            .filter(|&i| self.basis[i].degree == d)
            .collect()
    }

    pub fn dims_by_degree(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for b in &self.basis {
            *m.entry(b.degree).or_insert(0) += 1;
        }
        m
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.basis
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::UnknownBasisElement(name.to_string()))
    }

    /// Degree-shift functor: `shift(M, i)_n = M_{p^i n}` for `i >= 0`, and
    /// `shift(M, -1)_n = M_{n/p}` when `p | n` (an element of degree `d`
    /// relocates to degree `p d`, truncated at `max_degree`).
    pub fn shift(&self, i: i64) -> Result<GradedModule> {
        if i < -1 {
            return Err(Error::BadShift(i));
        }
        let mut basis = Vec::new();
        if i >= 0 {
            let f = (self.p as usize).pow(i as u32);
            for b in &self.basis {
                if b.degree % f == 0 {
                    basis.push(BasisElem {
                        name: b.name.clone(),
                        degree: b.degree / f,
                    });
                }
            }
        } else {
            for b in &self.basis {
                let d = b.degree * self.p as usize;
                if d <= self.max_degree {
                    basis.push(BasisElem {
                        name: b.name.clone(),
                        degree: d,
                    });
                }
            }
        }
        GradedModule::new(self.p, self.max_degree, basis)
    }
}

/// Koszul sign for merging two monomial factor lists: counts pairs of
/// odd-degree items that swap order, returning +-1 as an element of F_p.
pub fn koszul_sign(odd_positions_left: &[usize], odd_positions_right: &[usize], p: u64) -> u64 {
    // `odd_positions_*` are variable indices (in a fixed global order) of the
    // odd-degree letters of each factor, each sorted ascending. Moving a
    // right letter with index v past all left letters with index > v flips
    // the sign once per such letter.
    let mut inversions = 0usize;
    for &v in odd_positions_right {
        inversions += odd_positions_left.iter().filter(|&&w| w > v).count();
    }
    if inversions % 2 == 0 {
        1
    } else {
        fp::neg(1, p)
    }
}

/// Graded-commutative algebra given by structure constants.
#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    pub module: GradedModule,
    pub unit: usize,
    /// Product of basis elements; missing entries are zero.
    products: HashMap<(usize, usize), Elem>,
}

impl GradedAlgebra {
    pub fn new(
        module: GradedModule,
        unit: usize,
        products: HashMap<(usize, usize), Elem>,
    ) -> Self {
        let mut products = products;
        products.retain(|_, v| !v.is_empty());
        GradedAlgebra {
            module,
            unit,
            products,
        }
    }

    pub fn p(&self) -> u64 {
        self.module.p
    }

    pub fn max_degree(&self) -> usize {
        self.module.max_degree
    }

    pub fn basis_product(&self, i: usize, j: usize) -> Elem {
        self.products.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn products(&self) -> &HashMap<(usize, usize), Elem> {
        &self.products
    }

    pub fn mul_elem(&self, a: &Elem, b: &Elem) -> Elem {
        let p = self.p();
        let mut out = elem_zero();
        for (&i, &ca) in a {
            for (&j, &cb) in b {
                if let Some(prod) = self.products.get(&(i, j)) {
                    elem_add_scaled(&mut out, prod, fp::mul(ca, cb, p), p);
                }
            }
        }
        out
    }

    pub fn unit_elem(&self) -> Elem {
        elem_single(self.unit, 1)
    }

    /// p-th power of an element. Additive in characteristic p for even
    /// degrees, so it is computed termwise is *not* valid in general; this
    /// multiplies out the full power.
    pub fn pow_elem(&self, a: &Elem, n: usize) -> Elem {
        let mut acc = self.unit_elem();
        for _ in 0..n {
            acc = self.mul_elem(&acc, a);
        }
        acc
    }

    pub fn describe(&self, e: &Elem) -> String {
        if e.is_empty() {
            return "0".into();
        }
        e.iter()
            .map(|(&i, &c)| format!("{}*{}", c, self.module.basis[i].name))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Report of algebra-axiom violations; empty iff the input is a valid
/// truncated graded-commutative algebra.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AlgebraReport {
    pub violations: Vec<String>,
}

impl AlgebraReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check unitality, graded commutativity and associativity within degree D.
pub fn check_algebra(a: &GradedAlgebra) -> AlgebraReport {
    let mut rep = AlgebraReport::default();
    let m = &a.module;
    let p = a.p();
    let d_max = a.max_degree();
    if m.degree(a.unit) != 0 {
        rep.violations
            .push(format!("unit {} has nonzero degree", m.basis[a.unit].name));
    }
    for i in 0..m.dim() {
        let e = elem_single(i, 1);
        if a.mul_elem(&a.unit_elem(), &e) != e || a.mul_elem(&e, &a.unit_elem()) != e {
            rep.violations
                .push(format!("unit is not neutral on {}", m.basis[i].name));
        }
    }
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if m.degree(i) + m.degree(j) > d_max {
                continue;
            }
            let ij = a.basis_product(i, j);
            let ji = a.basis_product(j, i);
            let sign = if m.degree(i) % 2 == 1 && m.degree(j) % 2 == 1 {
                fp::neg(1, p)
            } else {
                1
            };
            let mut signed_ji = elem_zero();
            elem_add_scaled(&mut signed_ji, &ji, sign, p);
            if ij != signed_ji {
                rep.violations.push(format!(
                    "commutativity fails on ({}, {})",
                    m.basis[i].name, m.basis[j].name
                ));
            }
            // degree truncation of stored products
            for (&k, _) in &ij {
                if m.degree(k) != m.degree(i) + m.degree(j) {
                    rep.violations.push(format!(
                        "product ({}, {}) is not homogeneous",
                        m.basis[i].name, m.basis[j].name
                    ));
                }
            }
        }
    }
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            if m.degree(i) + m.degree(j) > d_max {
                continue;
            }
            let ij = a.basis_product(i, j);
            for k in 0..m.dim() {
                if m.degree(i) + m.degree(j) + m.degree(k) > d_max {
                    continue;
                }
                let left = a.mul_elem(&ij, &elem_single(k, 1));
                let right = a.mul_elem(&elem_single(i, 1), &a.basis_product(j, k));
                if left != right {
                    rep.violations.push(format!(
                        "associativity fails on ({}, {}, {})",
                        m.basis[i].name, m.basis[j].name, m.basis[k].name
                    ));
                }
            }
        }
    }
    rep
}

/// One generator of a monomial-presented algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
    /// Smallest power that vanishes; `None` means only the degree truncation
    /// applies. Odd-degree generators at odd p are forced to square to zero.
    pub nil_power: Option<usize>,
}

/// Internal monomial of a monomial-presented algebra: exponents per generator.
fn monomial_name(gens: &[Generator], exps: &[usize]) -> String {
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

fn monomial_degree(gens: &[Generator], exps: &[usize]) -> usize {
    gens.iter().zip(exps).map(|(g, &e)| g.degree * e).sum()
}

fn effective_nil(g: &Generator, p: u64) -> Option<usize> {
    if p > 2 && g.degree % 2 == 1 {
        Some(g.nil_power.map_or(2, |n| n.min(2)))
    } else {
        g.nil_power
    }
}

/// Graded-commutative monomial algebra `k[gens] / (relations, truncation)`.
///
/// `relations` are monomial generators of the ideal (exponent vectors);
/// nilpotence bounds on the generators are additional relations.
pub fn monomial_algebra(
    p: u64,
    max_degree: usize,
    gens: &[Generator],
    relations: &[Vec<usize>],
) -> Result<GradedAlgebra> {
    for g in gens {
        if g.degree == 0 && effective_nil(g, p).is_none() {
            return Err(Error::InvalidInput(format!(
                "degree-0 generator {} needs a nilpotence bound to stay finite",
                g.name
            )));
        }
    }
    let dead = |exps: &[usize]| -> bool {
        if monomial_degree(gens, exps) > max_degree {
            return true;
        }
        for (i, g) in gens.iter().enumerate() {
            if let Some(n) = effective_nil(g, p) {
                if exps[i] >= n {
                    return true;
                }
            }
        }
        relations
            .iter()
            .any(|r| r.iter().zip(exps).all(|(ri, ei)| ei >= ri))
    };
    // enumerate live monomials
    let mut monomials: Vec<Vec<usize>> = vec![vec![0; gens.len()]];
    let mut frontier = monomials.clone();
    let mut seen: std::collections::HashSet<Vec<usize>> = monomials.iter().cloned().collect();
    while let Some(m) = frontier.pop() {
        for i in 0..gens.len() {
            let mut m2 = m.clone();
            m2[i] += 1;
            if !dead(&m2) && seen.insert(m2.clone()) {
                monomials.push(m2.clone());
                frontier.push(m2);
            }
        }
    }
    monomials.sort_by_key(|m| (monomial_degree(gens, m), m.clone()));
    let index: HashMap<Vec<usize>, usize> = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    let basis: Vec<BasisElem> = monomials
        .iter()
        .map(|m| BasisElem {
            name: monomial_name(gens, m),
            degree: monomial_degree(gens, m),
        })
        .collect();
    let module = GradedModule::new(p, max_degree, basis)?;
    let mut products = HashMap::new();
    for (i, mi) in monomials.iter().enumerate() {
        for (j, mj) in monomials.iter().enumerate() {
            let sum: Vec<usize> = mi.iter().zip(mj).map(|(a, b)| a + b).collect();
            if dead(&sum) {
                continue;
            }
            // Koszul sign from interleaving the odd letters of mj into mi
            let odd_left: Vec<usize> = gens
                .iter()
                .enumerate()
                .filter(|(k, g)| g.degree % 2 == 1 && mi[*k] > 0)
                .map(|(k, _)| k)
                .collect();
            let odd_right: Vec<usize> = gens
                .iter()
                .enumerate()
                .filter(|(k, g)| g.degree % 2 == 1 && mj[*k] > 0)
                .map(|(k, _)| k)
                .collect();
            // repeated odd letters at p=2 carry no sign; at odd p they were
            // already excluded by the forced nilpotence bound
            let sign = if p == 2 {
                1
            } else {
                koszul_sign(&odd_left, &odd_right, p)
            };
            products.insert((i, j), elem_single(index[&sum], sign));
        }
    }
    Ok(GradedAlgebra::new(module, index[&vec![0; gens.len()]], products))
}

/// Named algebra presets.
pub enum Preset {
    TruncatedPolynomial {
        p: u64,
        max_degree: usize,
        gens: Vec<Generator>,
    },
    Exterior {
        p: u64,
        max_degree: usize,
        gens: Vec<(String, usize)>,
    },
    TensorProduct(Box<GradedAlgebra>, Box<GradedAlgebra>),
    QuotientMonomialIdeal {
        p: u64,
        max_degree: usize,
        gens: Vec<Generator>,
        relations: Vec<Vec<usize>>,
    },
}

pub fn make_preset(preset: Preset) -> Result<GradedAlgebra> {
    match preset {
        Preset::TruncatedPolynomial {
            p,
            max_degree,
            gens,
        } => monomial_algebra(p, max_degree, &gens, &[]),
        Preset::Exterior {
            p,
            max_degree,
            gens,
        } => {
            let gens: Vec<Generator> = gens
                .into_iter()
                .map(|(name, degree)| Generator {
                    name,
                    degree,
                    nil_power: Some(2),
                })
                .collect();
            monomial_algebra(p, max_degree, &gens, &[])
        }
        Preset::TensorProduct(a, b) => tensor_product(&a, &b),
        Preset::QuotientMonomialIdeal {
            p,
            max_degree,
            gens,
            relations,
        } => monomial_algebra(p, max_degree, &gens, &relations),
    }
}

pub fn tensor_product(a: &GradedAlgebra, b: &GradedAlgebra) -> Result<GradedAlgebra> {
    if a.p() != b.p() {
        return Err(Error::PrimeMismatch(a.p(), b.p()));
    }
    let p = a.p();
    let max_degree = a.max_degree().max(b.max_degree());
    let mut basis = Vec::new();
    let mut pairs = Vec::new();
    for (i, ba) in a.module.basis.iter().enumerate() {
        for (j, bb) in b.module.basis.iter().enumerate() {
            if ba.degree + bb.degree > max_degree {
                continue;
            }
            basis.push(BasisElem {
                name: format!("{}⊗{}", ba.name, bb.name),
                degree: ba.degree + bb.degree,
            });
            pairs.push((i, j));
        }
    }
    let index: HashMap<(usize, usize), usize> = pairs
        .iter()
        .enumerate()
        .map(|(k, &pr)| (pr, k))
        .collect();
    let module = GradedModule::new(p, max_degree, basis)?;
    let mut products = HashMap::new();
    for (k1, &(i1, j1)) in pairs.iter().enumerate() {
        for (k2, &(i2, j2)) in pairs.iter().enumerate() {
            // (a1 (x) b1)(a2 (x) b2) = +- a1 a2 (x) b1 b2, sign from moving
            // b1 past a2
            let sign = if b.module.degree(j1) % 2 == 1 && a.module.degree(i2) % 2 == 1 {
                fp::neg(1, p)
            } else {
                1
            };
            let pa = a.basis_product(i1, i2);
            let pb = b.basis_product(j1, j2);
            let mut out = elem_zero();
            for (&ia, &ca) in &pa {
                for (&jb, &cb) in &pb {
                    if let Some(&k) = index.get(&(ia, jb)) {
                        let c = fp::mul(fp::mul(ca, cb, p), sign, p);
                        elem_add_scaled(&mut out, &elem_single(k, 1), c, p);
                    }
                }
            }
            if !out.is_empty() {
                products.insert((k1, k2), out);
            }
        }
    }
    let unit = index[&(a.unit, b.unit)];
    Ok(GradedAlgebra::new(module, unit, products))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_preset(p: u64, d: usize, name: &str, deg: usize, nil: Option<usize>) -> GradedAlgebra {
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

    #[test]
    fn truncated_polynomial_dimension() {
        let a = poly_preset(3, 18, "x", 2, Some(9));
        assert_eq!(a.module.dim(), 9);
        assert!(check_algebra(&a).is_empty());
    }

    #[test]
    fn exterior_generator() {
        let a = make_preset(Preset::Exterior {
            p: 5,
            max_degree: 10,
            gens: vec![("x".into(), 3)],
        })
        .unwrap();
        assert_eq!(a.module.dim(), 2);
        let x = a.module.index_of("x").unwrap();
        assert!(elem_is_zero(&a.basis_product(x, x)));
        assert!(check_algebra(&a).is_empty());
    }

    #[test]
    fn tensor_square_dims() {
        let f = poly_preset(2, 4, "x", 1, Some(2));
        let g = poly_preset(2, 4, "y", 1, Some(2));
        let t = tensor_product(&f, &g).unwrap();
        assert_eq!(t.module.dim(), 4);
        let dims = t.module.dims_by_degree();
        assert_eq!(dims[&0], 1);
        assert_eq!(dims[&1], 2);
        assert_eq!(dims[&2], 1);
        assert!(check_algebra(&t).is_empty());
    }

    #[test]
    fn perturbed_structure_constant_is_caught() {
        let mut a = poly_preset(3, 12, "x", 2, Some(6));
        let x = a.module.index_of("x").unwrap();
        let x2 = a.module.index_of("x^2").unwrap();
        // x * x := 2 x^2 while x^2 stays symmetric elsewhere
        a.products.insert((x, x), elem_single(x2, 2));
        let rep = check_algebra(&a);
        assert!(!rep.is_empty());
        assert!(rep.violations.iter().any(|v| v.contains("associativity")));
    }

    #[test]
    fn odd_square_violation_detected() {
        // odd x with x^2 = x2 nonzero at p > 2 violates graded commutativity
        let module = GradedModule::new(
            3,
            6,
            vec![
                BasisElem {
                    name: "1".into(),
                    degree: 0,
                },
                BasisElem {
                    name: "x".into(),
                    degree: 3,
                },
                BasisElem {
                    name: "x2".into(),
                    degree: 6,
                },
            ],
        )
        .unwrap();
        let mut products = HashMap::new();
        for i in 0..3 {
            products.insert((0, i), elem_single(i, 1));
            products.insert((i, 0), elem_single(i, 1));
        }
        products.insert((1, 1), elem_single(2, 1));
        let a = GradedAlgebra::new(module, 0, products);
        let rep = check_algebra(&a);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.contains("commutativity fails on (x, x)")));
    }

    #[test]
    fn shift_examples() {
        let m = GradedModule::new(
            3,
            54,
            vec![
                BasisElem {
                    name: "a".into(),
                    degree: 2,
                },
                BasisElem {
                    name: "b".into(),
                    degree: 6,
                },
                BasisElem {
                    name: "c".into(),
                    degree: 18,
                },
            ],
        )
        .unwrap();
        let s = m.shift(1).unwrap();
        // degree-6 element lands in degree 2; degree-2 element (3 does not
        // divide 2) is absent
        assert_eq!(s.basis.len(), 2);
        assert_eq!(s.basis[0].name, "b");
        assert_eq!(s.basis[0].degree, 2);
        // down-shift has nothing in indivisible degrees
        let d = m.shift(-1).unwrap();
        assert!(d.indices_of_degree(2).is_empty());
        // round trip
        let rt = m.shift(-1).unwrap().shift(1).unwrap();
        assert_eq!(rt.basis, m.basis);
        // composition law
        let s2 = m.shift(1).unwrap().shift(1).unwrap();
        assert_eq!(s2, m.shift(2).unwrap());
        assert!(m.shift(-2).is_err());
    }

    #[test]
    fn degree_zero_generator_needs_nilpotence() {
        let r = make_preset(Preset::TruncatedPolynomial {
            p: 3,
            max_degree: 6,
            gens: vec![Generator {
                name: "e".into(),
                degree: 0,
                nil_power: None,
            }],
        });
        assert!(r.is_err());
    }
}
