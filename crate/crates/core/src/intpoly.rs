//! Exact multivariate polynomials over the integers.
//!
//! These house the universal Witt polynomials, whose coefficients outgrow
//! machine integers quickly, so all coefficients are arbitrary precision.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A polynomial in named indeterminates with `BigInt` coefficients.
///
/// Variables are kept sorted; exponent vectors are aligned with `vars` and no
/// zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly {
            vars: Vec::new(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        IntPoly {
            vars: Vec::new(),
            terms,
        }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![1], BigInt::one());
        IntPoly {
            vars: vec![name.to_string()],
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Iterate over `(exponent-by-variable, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<(&str, u32)>, &BigInt)> {
        self.terms.iter().map(move |(exps, c)| {
            let m: Vec<(&str, u32)> = self
                .vars
                .iter()
                .zip(exps.iter())
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| (v.as_str(), *e))
                .collect();
            (m, c)
        })
    }

    fn normalized(vars: Vec<String>, terms: BTreeMap<Vec<u32>, BigInt>) -> Self {
        let mut used = vec![false; vars.len()];
        for exps in terms.keys() {
            for (i, e) in exps.iter().enumerate() {
                if *e > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|u| *u) {
            return IntPoly { vars, terms };
        }
        let keep: Vec<usize> = (0..vars.len()).filter(|i| used[*i]).collect();
        let new_vars: Vec<String> = keep.iter().map(|&i| vars[i].clone()).collect();
        let new_terms = terms
            .into_iter()
            .map(|(exps, c)| (keep.iter().map(|&i| exps[i]).collect(), c))
            .collect();
        IntPoly {
            vars: new_vars,
            terms: new_terms,
        }
    }

    /// Re-express both polynomials over a common sorted variable list.
    fn align(&self, other: &IntPoly) -> (Vec<String>, Vec<usize>, Vec<usize>) {
        let mut vars: Vec<String> = self.vars.iter().chain(other.vars.iter()).cloned().collect();
        vars.sort();
        vars.dedup();
        let pos = |vs: &[String], all: &[String]| -> Vec<usize> {
            vs.iter()
                .map(|v| all.binary_search(v).unwrap())
                .collect()
        };
        let a = pos(&self.vars, &vars);
        let b = pos(&other.vars, &vars);
        (vars, a, b)
    }

    fn remap(exps: &[u32], map: &[usize], width: usize) -> Vec<u32> {
        let mut out = vec![0u32; width];
        for (i, e) in exps.iter().enumerate() {
            out[map[i]] = *e;
        }
        out
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let (vars, ma, mb) = self.align(other);
        let w = vars.len();
        let mut terms: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (exps, c) in &self.terms {
            *terms.entry(Self::remap(exps, &ma, w)).or_default() += c;
        }
        for (exps, c) in &other.terms {
            *terms.entry(Self::remap(exps, &mb, w)).or_default() += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Self::normalized(vars, terms)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        let (vars, ma, mb) = self.align(other);
        let w = vars.len();
        let mut terms: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let ea = Self::remap(ea, &ma, w);
            for (eb, cb) in &other.terms {
                let eb = Self::remap(eb, &mb, w);
                let key: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                *terms.entry(key).or_default() += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self::normalized(vars, terms)
    }

    pub fn scale(&self, c: impl Into<BigInt>) -> IntPoly {
        let c = c.into();
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * &c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> IntPoly {
        let mut acc = IntPoly::constant(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact division by an integer; errors if any coefficient is not
    /// divisible.
    pub fn div_exact(&self, d: &BigInt) -> Result<IntPoly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (q, r) = (c / d, c % d);
            if !r.is_zero() {
                return Err(Error::InexactDivision(d.to_string()));
            }
            terms.insert(e.clone(), q);
        }
        Ok(IntPoly {
            vars: self.vars.clone(),
            terms,
        })
    }

    /// Evaluate in a commutative ring through the given operations.
    ///
    /// Every variable of `self` must be assigned; integer coefficients are
    /// pushed through `int_scale`, so the target ring's characteristic is
    /// respected.
    pub fn eval<T: Clone, R: RingOps<T>>(
        &self,
        ring: &R,
        assign: &dyn Fn(&str) -> Option<T>,
    ) -> Result<T> {
        let values: Vec<T> = self
            .vars
            .iter()
            .map(|v| assign(v).ok_or_else(|| Error::UnassignedVariable(v.clone())))
            .collect::<Result<_>>()?;
        let mut acc = ring.zero();
        for (exps, c) in &self.terms {
            let mut m = ring.one();
            for (i, e) in exps.iter().enumerate() {
                for _ in 0..*e {
                    m = ring.mul(&m, &values[i]);
                }
            }
            acc = ring.add(&acc, &ring.int_scale(c, &m));
        }
        Ok(acc)
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (v, e) in self.vars.iter().zip(exps) {
                if *e == 1 {
                    write!(f, "*{}", v)?;
                } else if *e > 1 {
                    write!(f, "*{}^{}", v, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Ring operations used by [`IntPoly::eval`].
pub trait RingOps<T> {
    fn zero(&self) -> T;
    fn one(&self) -> T;
    fn add(&self, a: &T, b: &T) -> T;
    fn mul(&self, a: &T, b: &T) -> T;
    fn int_scale(&self, c: &BigInt, a: &T) -> T;
}

/// The ring Z[vars] itself; lets `eval` compose polynomials.
pub struct PolyRing;

impl RingOps<IntPoly> for PolyRing {
    fn zero(&self) -> IntPoly {
        IntPoly::zero()
    }
    fn one(&self) -> IntPoly {
        IntPoly::constant(1)
    }
    fn add(&self, a: &IntPoly, b: &IntPoly) -> IntPoly {
        a.add(b)
    }
    fn mul(&self, a: &IntPoly, b: &IntPoly) -> IntPoly {
        a.mul(b)
    }
    fn int_scale(&self, c: &BigInt, a: &IntPoly) -> IntPoly {
        a.scale(c.clone())
    }
}

/// The field F_p for scalar evaluation.
pub struct FpRing {
    pub p: u64,
}

impl RingOps<u64> for FpRing {
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        crate::fp::add(*a, *b, self.p)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        crate::fp::mul(*a, *b, self.p)
    }
    fn int_scale(&self, c: &BigInt, a: &u64) -> u64 {
        crate::fp::mul(crate::fp::reduce_bigint(c, self.p), *a, self.p)
    }
}
