//! Rewriting engine for Dyer–Lashof words at odd primes.
//!
//! Words β^{ε_1}Q^{r_1} ⋯ β^{ε_k}Q^{r_k} act on a generator of degree q,
//! rightmost operation first; Q^r raises degree by 2r(p−1) and a Bockstein
//! prefix lowers it by one. The engine computes degrees and range validity,
//! normalizes words with the Adem relations, applies the instability axioms
//! against a bound algebra class, expands Cartan formulas in the stable
//! range, and enumerates admissible bases with their Poincaré series.
//!
//! Conventions: p = 2 is rejected. Adem coefficients use the classical
//! binomial convention (zero unless 0 ≤ k ≤ n); signs default to the
//! standard odd-primary convention with (−1)^{s+i} in the outer-index form
//! and are configurable.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fp;
use crate::graded::{elem_is_zero, Elem, GradedAlgebra};

/// One operation β^ε Q^r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DLOp {
    pub bockstein: bool,
    pub power: u32,
}

/// A composite word of operations, leftmost (outermost) first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default, Serialize)]
pub struct DLMonomial {
    pub ops: Vec<DLOp>,
}

impl DLMonomial {
    pub fn parse(s: &str) -> Result<DLMonomial> {
        let mut ops = Vec::new();
        for token in s.split_whitespace() {
            let (bockstein, rest) = match token.strip_prefix("bQ^") {
                Some(r) => (true, r),
                None => match token.strip_prefix("Q^") {
                    Some(r) => (false, r),
                    None => {
                        return Err(Error::InvalidInput(format!(
                            "cannot parse operation `{token}` (expected Q^r or bQ^r)"
                        )))
                    }
                },
            };
            let power: u32 = rest.parse().map_err(|_| {
                Error::InvalidInput(format!("cannot parse exponent in `{token}`"))
            })?;
            ops.push(DLOp { bockstein, power });
        }
        Ok(DLMonomial { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

impl fmt::Display for DLMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .ops
            .iter()
            .map(|op| {
                if op.bockstein {
                    format!("bQ^{}", op.power)
                } else {
                    format!("Q^{}", op.power)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Degree of a word applied to a class of degree `q` (computed right to
/// left; exact, may be used to detect invalid negative intermediate
/// degrees).
pub fn dl_degree(m: &DLMonomial, q: i64, p: u64) -> i64 {
    let mut d = q;
    for op in m.ops.iter().rev() {
        d += 2 * op.power as i64 * (p as i64 - 1) - op.bockstein as i64;
    }
    d
}

/// Range validity: every operation satisfies 0 ≤ 2r ≤ d + n at its point of
/// application (1 ≤ 2r for Bockstein operations); `n = None` means n = ∞.
pub fn in_range(m: &DLMonomial, q: i64, p: u64, n: Option<i64>) -> bool {
    let mut d = q;
    for op in m.ops.iter().rev() {
        let two_r = 2 * op.power as i64;
        if op.bockstein && two_r < 1 {
            return false;
        }
        if let Some(n) = n {
            if two_r > d + n {
                return false;
            }
        }
        d += two_r * (p as i64 - 1) - op.bockstein as i64;
    }
    true
}

/// Adjacent-pair admissibility: for β^{εa}Q^r β^{εb}Q^s the pair is
/// admissible iff r ≤ ps − εb; a word is admissible iff all pairs are.
pub fn is_admissible(m: &DLMonomial, p: u64) -> bool {
    m.ops.windows(2).all(|w| {
        let (r, s) = (w[0].power as i64, w[1].power as i64);
        r <= p as i64 * s - w[1].bockstein as i64
    })
}

/// An F_p-linear combination of equal-degree words, canonically sorted.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct DLExpression {
    pub p: u64,
    pub terms: BTreeMap<DLMonomial, u64>,
}

impl DLExpression {
    pub fn zero(p: u64) -> Self {
        DLExpression {
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(p: u64, m: DLMonomial) -> Self {
        let mut e = Self::zero(p);
        e.add_term(m, 1);
        e
    }

    pub fn add_term(&mut self, m: DLMonomial, c: u64) {
        let v = fp::add(*self.terms.get(&m).unwrap_or(&0), c, self.p);
        if v == 0 {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for DLExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}·({m})"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sign convention for the Adem relations. The relations determine the
/// coefficient magnitudes; published sources differ in sign bookkeeping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    /// (−1)^{s+i} in the outer-index normal form (the standard odd-primary
    /// convention).
    #[default]
    Standard,
    /// All signs +1 (coefficient magnitudes only).
    Positive,
}

/// Which inadmissible pair to contract first; normal forms agree (sampled
/// confluence), this only selects the reduction strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RewriteOrder {
    #[default]
    InnermostFirst,
    OutermostFirst,
}

/// Classical binomial: zero unless 0 ≤ k ≤ n.
fn adem_binom(n: i64, k: i64, p: u64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    fp::binom_mod_p(n, k as u64, p)
}

fn sign(conv: SignConvention, exp: i64, p: u64) -> u64 {
    match conv {
        SignConvention::Positive => 1,
        SignConvention::Standard => {
            if exp.rem_euclid(2) == 0 {
                1
            } else {
                fp::neg(1, p)
            }
        }
    }
}

/// Expand one inadmissible adjacent pair β^{εa}Q^r β^{εb}Q^s into its Adem
/// normal sum, as (εa', i, εb', r+s−i, coefficient) replacement pairs.
fn expand_pair(a: DLOp, b: DLOp, p: u64, conv: SignConvention) -> Vec<(DLOp, DLOp, u64)> {
    let (r, s) = (a.power as i64, b.power as i64);
    let ps = p as i64 * s;
    let mut out = Vec::new();
    if !b.bockstein {
        // β^ε Q^r Q^s = Σ_i (−1)^{s+i} C((p−1)(r−i)−1, i−ps−1) β^ε Q^i Q^{r+s−i}
        for i in 1..=(r + s) {
            let c = adem_binom((p as i64 - 1) * (r - i) - 1, i - ps - 1, p);
            if c == 0 {
                continue;
            }
            let c = fp::mul(c, sign(conv, s + i, p), p);
            out.push((
                DLOp {
                    bockstein: a.bockstein,
                    power: i as u32,
                },
                DLOp {
                    bockstein: false,
                    power: (r + s - i) as u32,
                },
                c,
            ));
        }
    } else if !a.bockstein {
        // Q^r βQ^s = Σ_i (−1)^{s+i} ( C((p−1)(r−i), i−ps) βQ^i Q^{r+s−i}
        //                            − C((p−1)(r−i)−1, i−ps) Q^i βQ^{r+s−i} )
        for i in 1..=(r + s) {
            let sg = sign(conv, s + i, p);
            let c1 = adem_binom((p as i64 - 1) * (r - i), i - ps, p);
            if c1 != 0 {
                out.push((
                    DLOp {
                        bockstein: true,
                        power: i as u32,
                    },
                    DLOp {
                        bockstein: false,
                        power: (r + s - i) as u32,
                    },
                    fp::mul(c1, sg, p),
                ));
            }
            let c2 = adem_binom((p as i64 - 1) * (r - i) - 1, i - ps, p);
            if c2 != 0 {
                let neg = match conv {
                    SignConvention::Positive => 1,
                    SignConvention::Standard => fp::neg(1, p),
                };
                out.push((
                    DLOp {
                        bockstein: false,
                        power: i as u32,
                    },
                    DLOp {
                        bockstein: true,
                        power: (r + s - i) as u32,
                    },
                    fp::mul(fp::mul(c2, sg, p), neg, p),
                ));
            }
        }
    } else {
        // βQ^r βQ^s = −Σ_i (−1)^{s+i} C((p−1)(r−i)−1, i−ps) βQ^i βQ^{r+s−i}
        for i in 1..=(r + s) {
            let c = adem_binom((p as i64 - 1) * (r - i) - 1, i - ps, p);
            if c == 0 {
                continue;
            }
            let neg = match conv {
                SignConvention::Positive => 1,
                SignConvention::Standard => fp::neg(1, p),
            };
            let c = fp::mul(fp::mul(c, sign(conv, s + i, p), p), neg, p);
            out.push((
                DLOp {
                    bockstein: true,
                    power: i as u32,
                },
                DLOp {
                    bockstein: true,
                    power: (r + s - i) as u32,
                },
                c,
            ));
        }
    }
    out
}

fn first_inadmissible(m: &DLMonomial, p: u64, order: RewriteOrder) -> Option<usize> {
    let bad = |k: usize| {
        let (a, b) = (m.ops[k], m.ops[k + 1]);
        a.power as i64 > p as i64 * b.power as i64 - b.bockstein as i64
    };
    match order {
        RewriteOrder::InnermostFirst => (0..m.ops.len().saturating_sub(1)).rev().find(|&k| bad(k)),
        RewriteOrder::OutermostFirst => (0..m.ops.len().saturating_sub(1)).find(|&k| bad(k)),
    }
}

const REWRITE_BUDGET: usize = 1_000_000;

/// Repeatedly contract inadmissible pairs until every word is admissible.
/// Degree-preserving, idempotent on its image; p = 2 is rejected.
pub fn adem_rewrite(e: &DLExpression) -> Result<DLExpression> {
    adem_rewrite_with(e, SignConvention::default(), RewriteOrder::default())
}

pub fn adem_rewrite_with(
    e: &DLExpression,
    conv: SignConvention,
    order: RewriteOrder,
) -> Result<DLExpression> {
    let p = e.p;
    if p == 2 {
        return Err(Error::PrimeTwoUnsupported);
    }
    for m in e.terms.keys() {
        if m.ops.iter().any(|op| op.bockstein && op.power == 0) {
            return Err(Error::InvalidInput(
                "bQ^0 is not a valid operation (Bockstein needs 2r >= 1)".into(),
            ));
        }
    }
    let mut terms = e.terms.clone();
    let mut budget = REWRITE_BUDGET;
    loop {
        let target = terms
            .keys()
            .find(|m| first_inadmissible(m, p, order).is_some())
            .cloned();
        let Some(word) = target else {
            return Ok(DLExpression { p, terms });
        };
        let coeff = terms.remove(&word).unwrap();
        let k = first_inadmissible(&word, p, order).unwrap();
        for (a, b, c) in expand_pair(word.ops[k], word.ops[k + 1], p, conv) {
            let mut new = word.clone();
            new.ops[k] = a;
            new.ops[k + 1] = b;
            let v = fp::add(*terms.get(&new).unwrap_or(&0), fp::mul(c, coeff, p), p);
            if v == 0 {
                terms.remove(&new);
            } else {
                terms.insert(new, v);
            }
        }
        budget -= 1;
        if budget == 0 {
            return Err(Error::InvalidInput(
                "Adem rewriting exceeded its contraction budget".into(),
            ));
        }
    }
}

/// A partially evaluated term: a residual word applied to an algebra class.
#[derive(Clone, Debug)]
pub struct BoundTerm {
    pub word: DLMonomial,
    pub value: Elem,
}

/// Apply the instability axioms against a class x of a graded algebra:
/// operations strictly below the line vanish, the threshold operation is
/// the literal p-th power, the unit is annihilated by positive operations,
/// and everything above the line stays symbolic.
pub fn apply_instability(
    e: &DLExpression,
    a: &GradedAlgebra,
    x: &Elem,
) -> Result<Vec<(BoundTerm, u64)>> {
    let p = e.p;
    if p == 2 {
        return Err(Error::PrimeTwoUnsupported);
    }
    if p != a.p() {
        return Err(Error::PrimeMismatch(p, a.p()));
    }
    let degree_of = |v: &Elem| -> Result<Option<usize>> {
        if elem_is_zero(v) {
            return Ok(None);
        }
        let degs: Vec<usize> = v.keys().map(|&i| a.module.degree(i)).collect();
        if degs.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidInput(
                "bound class must be homogeneous".into(),
            ));
        }
        Ok(Some(degs[0]))
    };
    let mut out: Vec<(BoundTerm, u64)> = Vec::new();
    'terms: for (word, &coeff) in &e.terms {
        let mut value = x.clone();
        let Some(mut d) = degree_of(&value)? else {
            continue; // the bound class is zero
        };
        // residual (still symbolic) operations, innermost first
        let mut residual: Vec<DLOp> = Vec::new();
        for &op in word.ops.iter().rev() {
            let two_r = 2 * op.power as usize;
            if residual.is_empty() {
                // the unit is killed by every positive operation
                let is_unit_multiple = value.len() == 1 && value.contains_key(&a.unit);
                if is_unit_multiple && op.power > 0 {
                    continue 'terms;
                }
                if two_r < d || (op.bockstein && two_r == d) {
                    continue 'terms;
                }
                if two_r == d && !op.bockstein {
                    value = a.pow_elem(&value, p as usize);
                    if elem_is_zero(&value) {
                        continue 'terms;
                    }
                    d *= p as usize;
                    continue;
                }
            } else if two_r < d || (op.bockstein && two_r == d) {
                // instability applies to the symbolic class as well
                continue 'terms;
            }
            // stays (or becomes) symbolic
            residual.push(op);
            d = d + two_r * (p as usize - 1) - op.bockstein as usize;
        }
        residual.reverse();
        out.push((
            BoundTerm {
                word: DLMonomial { ops: residual },
                value,
            },
            coeff,
        ));
    }
    Ok(out)
}

/// Cartan expansion Q^r(xy) = Σ_{i+j=r} Q^i(x) Q^j(y) in the stable range
/// 2r < q + n, where q is the degree of the product xy. The top case
/// 2r = q + n needs the nonlinear correction term and is rejected.
pub fn cartan_expand(r: u32, q: usize, p: u64, n: Option<usize>) -> Result<Vec<(u32, u32)>> {
    if p == 2 {
        return Err(Error::PrimeTwoUnsupported);
    }
    if let Some(n) = n {
        let bound = q + n;
        if 2 * r as usize == bound {
            return Err(Error::TopRangeCartan);
        }
        if 2 * r as usize > bound {
            return Err(Error::InvalidInput(format!(
                "Q^{r} is out of range on degree {q} with n = {n}"
            )));
        }
    }
    Ok((0..=r).map(|i| (i, r - i)).collect())
}

/// Admissible, range- and instability-respecting words on a degree-q
/// generator, with the degreewise counts.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleBasis {
    pub words: Vec<DLMonomial>,
    pub degrees: Vec<usize>,
    pub poincare: BTreeMap<usize, usize>,
}

/// Instability admission of one more (outermost) operation on a class of
/// degree d: Q^r needs 2r ≥ d, βQ^r needs 2r > d (lower operations vanish).
fn instability_ok(op: DLOp, d: usize) -> bool {
    let two_r = 2 * op.power as usize;
    if op.bockstein {
        two_r > d
    } else {
        two_r >= d
    }
}

fn range_ok(op: DLOp, d: usize, n: Option<usize>) -> bool {
    let two_r = 2 * op.power as usize;
    if op.bockstein && two_r < 1 {
        return false;
    }
    match n {
        Some(n) => two_r <= d + n,
        None => true,
    }
}

/// Enumerate the admissible basis by prepending operations outside-in.
pub fn admissible_basis(
    q: usize,
    n: Option<usize>,
    p: u64,
    max_degree: usize,
) -> Result<AdmissibleBasis> {
    if p == 2 {
        return Err(Error::PrimeTwoUnsupported);
    }
    if q == 0 {
        return Err(Error::InvalidInput(
            "admissible bases are enumerated on generators of positive degree".into(),
        ));
    }
    let mut words = Vec::new();
    let mut degrees = Vec::new();
    // state: word built so far (outermost at the front), its degree, and the
    // constraint for the next (outer) operation from the current leftmost
    struct St {
        p: u64,
        n: Option<usize>,
        dmax: usize,
    }
    fn rec(
        st: &St,
        word: &mut Vec<DLOp>,
        d: usize,
        words: &mut Vec<DLMonomial>,
        degrees: &mut Vec<usize>,
    ) {
        words.push(DLMonomial {
            ops: word.iter().rev().cloned().collect(),
        });
        degrees.push(d);
        let leftmost = word.last().copied();
        for bockstein in [false, true] {
            let mut r = 1u32;
            loop {
                let op = DLOp { bockstein, power: r };
                let gain = 2 * r as usize * (st.p as usize - 1);
                if d + gain > st.dmax + bockstein as usize {
                    break;
                }
                let nd = d + gain - bockstein as usize;
                let pair_ok = match leftmost {
                    // prepending op outside `inner`: admissibility of the
                    // new adjacent pair (op, inner)
                    Some(inner) => {
                        op.power as i64
                            <= st.p as i64 * inner.power as i64 - inner.bockstein as i64
                    }
                    None => true,
                };
                if pair_ok && range_ok(op, d, st.n) && instability_ok(op, d) && nd <= st.dmax {
                    word.push(op);
                    rec(st, word, nd, words, degrees);
                    word.pop();
                }
                r += 1;
            }
        }
    }
    if q <= max_degree {
        let st = St {
            p,
            n,
            dmax: max_degree,
        };
        let mut word = Vec::new();
        rec(&st, &mut word, q, &mut words, &mut degrees);
    }
    // canonical order: by degree, then word
    let mut idx: Vec<usize> = (0..words.len()).collect();
    idx.sort_by(|&a, &b| (degrees[a], &words[a]).cmp(&(degrees[b], &words[b])));
    let words: Vec<DLMonomial> = idx.iter().map(|&i| words[i].clone()).collect();
    let degrees: Vec<usize> = idx.iter().map(|&i| degrees[i]).collect();
    let mut poincare = BTreeMap::new();
    for &d in &degrees {
        *poincare.entry(d).or_insert(0) += 1;
    }
    Ok(AdmissibleBasis {
        words,
        degrees,
        poincare,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{make_preset, Generator, Preset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn word(s: &str) -> DLMonomial {
        DLMonomial::parse(s).unwrap()
    }

    #[test]
    fn degree_examples() {
        assert_eq!(dl_degree(&word("Q^3"), 4, 3), 16);
        assert_eq!(dl_degree(&word("bQ^3"), 4, 3), 15);
        assert_eq!(dl_degree(&word("Q^2 Q^1"), 2, 3), 2 + 4 + 8);
    }

    #[test]
    fn range_examples() {
        // 2·2 ≤ 4 + 0: in range even at n = 0
        assert!(in_range(&word("Q^2"), 4, 3, Some(0)));
        assert!(!in_range(&word("Q^3"), 4, 3, Some(0)));
        assert!(in_range(&word("Q^3"), 4, 3, Some(2)));
        assert!(in_range(&word("Q^3"), 4, 3, None));
        assert!(!in_range(&word("bQ^0"), 4, 3, None));
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["Q^3", "bQ^2 Q^1", "Q^5 bQ^2 Q^1"] {
            assert_eq!(word(s).to_string(), s);
        }
        assert!(DLMonomial::parse("P^3").is_err());
        assert!(DLMonomial::parse("Q^x").is_err());
    }

    #[test]
    fn admissible_words_are_unchanged() {
        let e = DLExpression::monomial(3, word("Q^2 Q^1"));
        assert!(is_admissible(&word("Q^2 Q^1"), 3));
        assert_eq!(adem_rewrite(&e).unwrap(), e);
        let f = DLExpression::monomial(5, word("Q^9 bQ^2"));
        assert!(is_admissible(&word("Q^9 bQ^2"), 5));
        assert_eq!(adem_rewrite(&f).unwrap(), f);
    }

    #[test]
    fn prime_two_is_rejected() {
        let e = DLExpression::monomial(2, word("Q^2 Q^1"));
        assert!(matches!(
            adem_rewrite(&e),
            Err(Error::PrimeTwoUnsupported)
        ));
        assert!(matches!(
            admissible_basis(2, None, 2, 10),
            Err(Error::PrimeTwoUnsupported)
        ));
    }

    /// Independent oracle in the other standard indexing: for r > ps,
    /// Q^r Q^s = Σ_i (−1)^{r+i} C((p−1)(i−s)−1, pi−r) Q^{r+s−i} Q^i.
    fn oracle_qq(r: i64, s: i64, p: u64) -> BTreeMap<DLMonomial, u64> {
        let mut out = BTreeMap::new();
        for i in 0..=(r + s) {
            let n = (p as i64 - 1) * (i - s) - 1;
            let k = p as i64 * i - r;
            if k < 0 || n < 0 || k > n {
                continue;
            }
            let mut c = fp::binom_mod_p(n, k as u64, p);
            if (r + i).rem_euclid(2) == 1 {
                c = fp::neg(c, p);
            }
            if c == 0 {
                continue;
            }
            let m = DLMonomial {
                ops: vec![
                    DLOp {
                        bockstein: false,
                        power: (r + s - i) as u32,
                    },
                    DLOp {
                        bockstein: false,
                        power: i as u32,
                    },
                ],
            };
            let v = fp::add(*out.get(&m).unwrap_or(&0), c, p);
            if v == 0 {
                out.remove(&m);
            } else {
                out.insert(m, v);
            }
        }
        out
    }

    #[test]
    fn single_pair_matches_binomial_oracle() {
        for p in [3u64, 5] {
            for s in 1..5i64 {
                for r in (p as i64 * s + 1)..(p as i64 * s + 8) {
                    let m = DLMonomial {
                        ops: vec![
                            DLOp {
                                bockstein: false,
                                power: r as u32,
                            },
                            DLOp {
                                bockstein: false,
                                power: s as u32,
                            },
                        ],
                    };
                    let rewritten = adem_rewrite(&DLExpression::monomial(p, m)).unwrap();
                    let oracle = oracle_qq(r, s, p);
                    // oracle terms are already admissible for single pairs
                    for w in oracle.keys() {
                        assert!(is_admissible(w, p), "{w}");
                    }
                    assert_eq!(rewritten.terms, oracle, "p={p} r={r} s={s}");
                }
            }
        }
    }

    #[test]
    fn q7_q2_vanishes_at_p3() {
        let e = DLExpression::monomial(3, word("Q^7 Q^2"));
        assert!(adem_rewrite(&e).unwrap().is_zero());
    }

    #[test]
    fn q5_q1_normal_form_at_p3() {
        let e = DLExpression::monomial(3, word("Q^5 Q^1"));
        let r = adem_rewrite(&e).unwrap();
        // Q^5 Q^1 = −Q^4 Q^2
        let mut expected = DLExpression::zero(3);
        expected.add_term(word("Q^4 Q^2"), 2);
        assert_eq!(r, expected);
    }

    fn random_word(rng: &mut impl Rng, p: u64, len: usize) -> DLMonomial {
        let ops = (0..len)
            .map(|_| {
                let bockstein = rng.gen_bool(0.3);
                let min = bockstein as u32;
                DLOp {
                    bockstein,
                    power: rng.gen_range(min..(3 * p as u32)),
                }
            })
            .collect();
        DLMonomial { ops }
    }

    #[test]
    fn rewriting_is_admissible_degree_preserving_idempotent_order_robust() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..500 {
            let p = if rng.gen_bool(0.5) { 3 } else { 5 };
            let len = rng.gen_range(1..=4);
            let w = random_word(&mut rng, p, len);
            let q = rng.gen_range(1..6) as i64;
            let d = dl_degree(&w, q, p);
            let e = DLExpression::monomial(p, w);
            let inner =
                adem_rewrite_with(&e, SignConvention::Standard, RewriteOrder::InnermostFirst)
                    .unwrap();
            let outer =
                adem_rewrite_with(&e, SignConvention::Standard, RewriteOrder::OutermostFirst)
                    .unwrap();
            assert_eq!(inner, outer, "confluence");
            for (m, _) in &inner.terms {
                assert!(is_admissible(m, p));
                assert_eq!(dl_degree(m, q, p), d, "degree preservation");
            }
            assert_eq!(adem_rewrite(&inner).unwrap(), inner, "idempotence");
        }
    }

    #[test]
    fn instability_examples() {
        let a = make_preset(Preset::TruncatedPolynomial {
            p: 3,
            max_degree: 20,
            gens: vec![Generator {
                name: "x".into(),
                degree: 4,
                nil_power: None,
            }],
        })
        .unwrap();
        let x = crate::graded::elem_single(a.module.index_of("x").unwrap(), 1);
        let cube = crate::graded::elem_single(a.module.index_of("x^3").unwrap(), 1);
        // Q^1 x = 0 (below the line), Q^2 x = x³ (threshold), βQ^2 x = 0
        let r = apply_instability(&DLExpression::monomial(3, word("Q^1")), &a, &x).unwrap();
        assert!(r.is_empty());
        let r = apply_instability(&DLExpression::monomial(3, word("Q^2")), &a, &x).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].0.word.is_empty());
        assert_eq!(r[0].0.value, cube);
        let r = apply_instability(&DLExpression::monomial(3, word("bQ^2")), &a, &x).unwrap();
        assert!(r.is_empty());
        // Q^r 1 = 0 for r > 0
        let one = a.unit_elem();
        let r = apply_instability(&DLExpression::monomial(3, word("Q^3")), &a, &one).unwrap();
        assert!(r.is_empty());
        // above the line: stays symbolic
        let r = apply_instability(&DLExpression::monomial(3, word("Q^4")), &a, &x).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0.word, word("Q^4"));
    }

    #[test]
    fn instability_commutes_with_rewriting_on_samples() {
        // apply_instability ∘ adem_rewrite = adem_rewrite ∘ apply_instability
        // whenever the instability step only zeroes terms or strips nothing
        let a = make_preset(Preset::TruncatedPolynomial {
            p: 3,
            max_degree: 60,
            gens: vec![Generator {
                name: "x".into(),
                degree: 4,
                nil_power: None,
            }],
        })
        .unwrap();
        let x = crate::graded::elem_single(a.module.index_of("x").unwrap(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = random_word(&mut rng, 3, 2);
            let e = DLExpression::monomial(3, w);
            let rewritten = adem_rewrite(&e).unwrap();
            let path1 = apply_instability(&rewritten, &a, &x).unwrap();
            let direct = apply_instability(&e, &a, &x).unwrap();
            // compare the purely symbolic parts after rewriting both ways
            let mut lhs = DLExpression::zero(3);
            for (t, c) in &path1 {
                if t.value == x {
                    lhs.add_term(t.word.clone(), *c);
                }
            }
            let mut rhs = DLExpression::zero(3);
            for (t, c) in &direct {
                if t.value == x {
                    rhs.add_term(t.word.clone(), *c);
                }
            }
            let rhs = adem_rewrite(&rhs).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn cartan_examples() {
        assert_eq!(cartan_expand(0, 4, 3, Some(2)).unwrap(), vec![(0, 0)]);
        assert_eq!(
            cartan_expand(2, 4, 3, Some(3)).unwrap(),
            vec![(0, 2), (1, 1), (2, 0)]
        );
        assert!(matches!(
            cartan_expand(3, 4, 3, Some(2)),
            Err(Error::TopRangeCartan)
        ));
        assert!(cartan_expand(4, 4, 3, Some(2)).is_err());
        assert!(cartan_expand(7, 4, 3, None).is_ok());
    }

    #[test]
    fn cartan_degrees_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = 3u64;
            let qx = rng.gen_range(1..6);
            let qy = rng.gen_range(1..6);
            let q = qx + qy;
            let r = rng.gen_range(0..(q as u32));
            let n = q + 2;
            if 2 * r as usize >= q + n {
                continue;
            }
            let pairs = cartan_expand(r, q, p, Some(n)).unwrap();
            for (i, j) in pairs {
                let di = dl_degree(
                    &DLMonomial {
                        ops: vec![DLOp {
                            bockstein: false,
                            power: i,
                        }],
                    },
                    qx as i64,
                    p,
                );
                let dj = dl_degree(
                    &DLMonomial {
                        ops: vec![DLOp {
                            bockstein: false,
                            power: j,
                        }],
                    },
                    qy as i64,
                    p,
                );
                let total = dl_degree(
                    &DLMonomial {
                        ops: vec![DLOp {
                            bockstein: false,
                            power: r,
                        }],
                    },
                    q as i64,
                    p,
                );
                assert_eq!(di + dj, total);
            }
        }
    }

    /// Exhaustive brute-force enumeration of bounded-length words, filtered
    /// by the admissibility, range and instability predicates.
    fn brute_force_basis(
        q: usize,
        n: Option<usize>,
        p: u64,
        dmax: usize,
    ) -> Vec<DLMonomial> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<DLOp>> = vec![vec![]];
        while let Some(w) = stack.pop() {
            let m = DLMonomial { ops: w.clone() };
            let d = dl_degree(&m, q as i64, p);
            if d < 0 || d as usize > dmax {
                continue;
            }
            let mut keep = in_range(&m, q as i64, p, n.map(|v| v as i64))
                && is_admissible(&m, p);
            // instability: recompute right-to-left
            let mut cur = q;
            for op in m.ops.iter().rev() {
                let two_r = 2 * op.power as usize;
                if (op.bockstein && two_r <= cur) || (!op.bockstein && two_r < cur) {
                    keep = false;
                    break;
                }
                cur = cur + two_r * (p as usize - 1) - op.bockstein as usize;
            }
            if keep {
                out.push(m);
            }
            if w.len() >= 6 {
                continue;
            }
            // prepend candidates whose degree gain keeps us below the bound
            for bockstein in [false, true] {
                for r in 0..=((dmax as u32) / (2 * (p as u32 - 1)) + 1) {
                    if bockstein && r == 0 {
                        continue;
                    }
                    let mut w2 = vec![DLOp {
                        bockstein,
                        power: r,
                    }];
                    w2.extend(w.iter().cloned());
                    let d2 = dl_degree(&DLMonomial { ops: w2.clone() }, q as i64, p);
                    if d2 >= 0 && d2 as usize <= dmax {
                        stack.push(w2);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn admissible_basis_matches_brute_force() {
        for (q, n, p, dmax) in [
            (2usize, Some(3usize), 3u64, 30usize),
            (2, Some(1), 3, 30),
            (2, None, 3, 26),
            (4, Some(4), 5, 40),
        ] {
            let basis = admissible_basis(q, n, p, dmax).unwrap();
            let mut engine: Vec<DLMonomial> = basis.words.clone();
            engine.sort();
            let brute = brute_force_basis(q, n, p, dmax);
            assert_eq!(engine, brute, "q={q} n={n:?} p={p} D={dmax}");
            // no duplicates, degrees consistent
            let mut dedup = engine.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), engine.len());
            for (w, &d) in basis.words.iter().zip(&basis.degrees) {
                assert_eq!(dl_degree(w, q as i64, p), d as i64);
            }
        }
    }

    #[test]
    fn admissible_basis_counts_monotone_in_n() {
        let small = admissible_basis(2, Some(1), 3, 30).unwrap();
        let mid = admissible_basis(2, Some(5), 3, 30).unwrap();
        let large = admissible_basis(2, None, 3, 30).unwrap();
        for d in 0..=30 {
            let a = *small.poincare.get(&d).unwrap_or(&0);
            let b = *mid.poincare.get(&d).unwrap_or(&0);
            let c = *large.poincare.get(&d).unwrap_or(&0);
            assert!(a <= b && b <= c, "degree {d}: {a} {b} {c}");
        }
    }

    #[test]
    fn basis_beyond_truncation_is_empty() {
        let b = admissible_basis(5, None, 3, 4).unwrap();
        assert!(b.words.is_empty());
        let only_gen = admissible_basis(5, None, 3, 5).unwrap();
        assert_eq!(only_gen.words.len(), 1);
        assert!(only_gen.words[0].is_empty());
    }
}
