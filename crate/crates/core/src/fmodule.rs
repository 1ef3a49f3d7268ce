//! Graded F-modules and V-modules, their interval (barcode) decomposition,
//! duality, and the non-functorial lift back to p-polar algebras.
//!
//! An F-module is a graded F_p-vector space M with a linear map F: M_q →
//! M_{pq} for every degree (Frobenius semilinearity is trivial over F_p).
//! Within each p-typical block j (p ∤ j) this is a representation of a
//! linear A_n quiver, so it splits into intervals; multiplicities come from
//! rank inclusion–exclusion on the composite maps, persistence-style.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graded::{elem_single, BasisElem, GradedModule};
use crate::matrix::FpMatrix;
use crate::polar::{p_typical_block, PolarAlgebra};

/// A graded F_p-module with a grading-doubling operator F: M_q → M_{pq}.
///
/// `maps[q]` has `dim M_{pq}` rows and `dim M_q` columns; a missing entry is
/// the zero map (forced when pq exceeds the truncation degree).
#[derive(Clone, Debug)]
pub struct FModule {
    pub module: GradedModule,
    pub maps: BTreeMap<usize, FpMatrix>,
}

/// The continuous dual: V: M_{pq} → M_q, keyed by the lower degree q.
#[derive(Clone, Debug)]
pub struct VModule {
    pub module: GradedModule,
    pub maps: BTreeMap<usize, FpMatrix>,
}

impl FModule {
    pub fn new(module: GradedModule, maps: BTreeMap<usize, FpMatrix>) -> Result<Self> {
        if !module.indices_of_degree(0).is_empty() {
            return Err(Error::InvalidInput(
                "F-modules are concentrated in positive degrees".into(),
            ));
        }
        let p = module.p as usize;
        for (&q, m) in &maps {
            let target = q * p;
            if target > module.max_degree {
                return Err(Error::InvalidInput(format!(
                    "map out of degree {q} lands above the truncation"
                )));
            }
            let rows = module.indices_of_degree(target).len();
            let cols = module.indices_of_degree(q).len();
            if m.rows != rows || m.cols != cols {
                return Err(Error::InvalidInput(format!(
                    "map out of degree {q} must be {rows}x{cols}, got {}x{}",
                    m.rows, m.cols
                )));
            }
            // at odd p the p-th power of an odd-degree class vanishes, so
            // F out of odd degrees must be zero for the module to be liftable
            if module.p % 2 == 1 && q % 2 == 1 {
                let nonzero = (0..m.rows).any(|i| (0..m.cols).any(|j| m.get(i, j) != 0));
                if nonzero {
                    return Err(Error::InvalidInput(format!(
                        "F out of odd degree {q} must vanish when p is odd"
                    )));
                }
            }
        }
        Ok(FModule { module, maps })
    }

    pub fn p(&self) -> u64 {
        self.module.p
    }

    /// The matrix of F: M_q → M_{pq} (zero map when absent or truncated).
    pub fn map_at(&self, q: usize) -> FpMatrix {
        if let Some(m) = self.maps.get(&q) {
            return m.clone();
        }
        let p = self.p() as usize;
        let rows = if q * p <= self.module.max_degree {
            self.module.indices_of_degree(q * p).len()
        } else {
            0
        };
        FpMatrix::zero(self.p(), rows, self.module.indices_of_degree(q).len())
    }
}

/// Forgetful functor from p-polar algebras: F(x) = μ(x, …, x).
///
/// The degree-0 part of A (if any) is dropped: the interval classification
/// lives in positive degrees, and degree 0 is handled by the Witt and
/// Dieudonné modules.
pub fn u_f(a: &PolarAlgebra) -> Result<FModule> {
    let src = &a.module;
    let keep: Vec<usize> = (0..src.dim()).filter(|&i| src.degree(i) > 0).collect();
    let basis: Vec<BasisElem> = keep
        .iter()
        .map(|&i| BasisElem {
            name: src.basis[i].name.clone(),
            degree: src.degree(i),
        })
        .collect();
    let module = GradedModule::new(a.p(), a.max_degree(), basis)?;
    let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let p = a.p() as usize;
    let mut maps = BTreeMap::new();
    for (&q, _) in module.dims_by_degree().iter() {
        if q * p > module.max_degree {
            continue;
        }
        let cols_idx = module.indices_of_degree(q);
        let rows_idx = module.indices_of_degree(q * p);
        let rowpos: BTreeMap<usize, usize> =
            rows_idx.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let mut m = FpMatrix::zero(a.p(), rows_idx.len(), cols_idx.len());
        for (c, &new_i) in cols_idx.iter().enumerate() {
            let old_i = keep[new_i];
            let img = a.pth_power(&elem_single(old_i, 1));
            for (&old_t, &v) in &img {
                let new_t = pos[&old_t];
                m.set(rowpos[&new_t], c, v);
            }
        }
        maps.insert(q, m);
    }
    FModule::new(module, maps)
}

/// Length of an interval summand. `Ambiguous(m)` means the bar is visible
/// for m+1 tower steps and reaches the truncation boundary, so "length m"
/// and "infinite" are indistinguishable below the truncation degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BarLength {
    Finite(usize),
    Ambiguous(usize),
}

impl BarLength {
    /// Number of tower steps actually visible (bar dimension − 1).
    pub fn observed(&self) -> usize {
        match self {
            BarLength::Finite(m) | BarLength::Ambiguous(m) => *m,
        }
    }
}

/// One interval summand: basis ⟨x, Fx, …, F^m x⟩ with |x| = `degree`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bar {
    pub degree: usize,
    pub length: BarLength,
}

/// Multiset of interval summands, sorted for canonical comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Barcode {
    pub p: u64,
    pub max_degree: usize,
    pub bars: Vec<Bar>,
}

impl Barcode {
    pub fn total_dim(&self) -> usize {
        self.bars.iter().map(|b| b.length.observed() + 1).sum()
    }

    pub fn has_ambiguous(&self) -> bool {
        self.bars
            .iter()
            .any(|b| matches!(b.length, BarLength::Ambiguous(_)))
    }
}

/// Interval decomposition of an F-module by rank inclusion–exclusion.
pub fn decompose(m: &FModule) -> Barcode {
    let p = m.p() as usize;
    let d_max = m.module.max_degree;
    let mut bars = Vec::new();
    let blocks: std::collections::BTreeSet<usize> = m
        .module
        .dims_by_degree()
        .keys()
        .map(|&d| p_typical_block(m.p(), d).0)
        .collect();
    for j in blocks {
        // tower positions j, jp, jp², … within the truncation
        let mut degs = Vec::new();
        let mut d = j;
        while d <= d_max {
            degs.push(d);
            d *= p;
        }
        let n = degs.len() - 1;
        let dim = |a: usize| m.module.indices_of_degree(degs[a]).len();
        // r[a][b] = rank of the composite map position a → position b
        let mut r = vec![vec![0usize; n + 1]; n + 1];
        for a in 0..=n {
            r[a][a] = dim(a);
            let mut cur = FpMatrix::identity(m.p(), dim(a));
            for b in a + 1..=n {
                cur = m.map_at(degs[b - 1]).mul(&cur);
                r[a][b] = cur.rank();
            }
        }
        let get = |a: i64, b: usize| -> usize {
            if a < 0 || b > n {
                0
            } else {
                r[a as usize][b]
            }
        };
        for a in 0..=n {
            for b in a..=n {
                let mult = get(a as i64, b) as i64 - get(a as i64 - 1, b) as i64
                    - get(a as i64, b + 1) as i64
                    + get(a as i64 - 1, b + 1) as i64;
                debug_assert!(mult >= 0, "negative interval multiplicity");
                // an odd-degree tower at odd p has forced-zero maps, so its
                // singletons are never ambiguous even at the boundary
                let forced_zero = m.p() % 2 == 1 && j % 2 == 1;
                let length = if b == n && degs[b] * p > d_max && !forced_zero {
                    BarLength::Ambiguous(b - a)
                } else {
                    BarLength::Finite(b - a)
                };
                for _ in 0..mult {
                    bars.push(Bar {
                        degree: degs[a],
                        length,
                    });
                }
            }
        }
    }
    bars.sort();
    Barcode {
        p: m.p(),
        max_degree: d_max,
        bars,
    }
}

/// Build the direct sum of interval modules described by a barcode.
/// Ambiguous bars are realized with their observed length.
pub fn reconstruct(bc: &Barcode) -> Result<FModule> {
    let p = bc.p as usize;
    let mut basis = Vec::new();
    let mut chains: Vec<Vec<(usize, usize)>> = Vec::new(); // per bar: (degree, index)
    for (bi, bar) in bc.bars.iter().enumerate() {
        let m = bar.length.observed();
        let mut chain = Vec::new();
        for k in 0..=m {
            let deg = bar.degree * p.pow(k as u32);
            chain.push((deg, basis.len()));
            basis.push(BasisElem {
                name: format!("b{bi}_{k}"),
                degree: deg,
            });
        }
        chains.push(chain);
    }
    let module = GradedModule::new(bc.p, bc.max_degree, basis)?;
    let mut maps: BTreeMap<usize, FpMatrix> = BTreeMap::new();
    for chain in &chains {
        for w in chain.windows(2) {
            let (q, src) = w[0];
            let (qt, tgt) = w[1];
            let e = maps.entry(q).or_insert_with(|| {
                FpMatrix::zero(
                    bc.p,
                    module.indices_of_degree(qt).len(),
                    module.indices_of_degree(q).len(),
                )
            });
            let row = module.indices_of_degree(qt).iter().position(|&i| i == tgt);
            let col = module.indices_of_degree(q).iter().position(|&i| i == src);
            e.set(row.unwrap(), col.unwrap(), 1);
        }
    }
    FModule::new(module, maps)
}

/// Continuous dual: transpose every matrix; F becomes V.
pub fn dualize(m: &FModule) -> VModule {
    VModule {
        module: m.module.clone(),
        maps: m.maps.iter().map(|(&q, m)| (q, m.transpose())).collect(),
    }
}

/// Inverse of [`dualize`].
pub fn dualize_v(v: &VModule) -> FModule {
    FModule {
        module: v.module.clone(),
        maps: v.maps.iter().map(|(&q, m)| (q, m.transpose())).collect(),
    }
}

/// Barcode of a V-module (equal to the barcode of its dual F-module:
/// transposition preserves all composite ranks).
pub fn decompose_v(v: &VModule) -> Barcode {
    decompose(&dualize_v(v))
}

/// Lift an F-module to a p-polar algebra with u_f(lift(M)) ≅ M.
///
/// Each interval ⟨x, Fx, …, F^m x⟩ carries exactly one p-polar structure
/// (μ on the tower generator steps up the chain); the lift is their product,
/// with μ vanishing across distinct summands. Not functorial. Ambiguous
/// bars are resolved to their observed finite length, with a warning.
pub fn lift_to_polar(m: &FModule) -> Result<(PolarAlgebra, Vec<String>)> {
    let bc = decompose(m);
    let mut warnings = Vec::new();
    for bar in &bc.bars {
        if let BarLength::Ambiguous(l) = bar.length {
            warnings.push(format!(
                "interval at degree {} reaches the truncation boundary; resolved to finite length {}",
                bar.degree, l
            ));
        }
    }
    let reconstructed = reconstruct(&bc)?;
    let module = reconstructed.module;
    let mut a = PolarAlgebra::new(module);
    let p = bc.p as usize;
    // chains are consecutive indices by construction of `reconstruct`
    let mut idx = 0usize;
    for bar in &bc.bars {
        let m_len = bar.length.observed();
        for k in 0..m_len {
            let deg = bar.degree * p.pow(k as u32 + 1);
            if deg > bc.max_degree {
                break;
            }
            a.set_mu(vec![idx + k; p], elem_single(idx + k + 1, 1))?;
        }
        idx += m_len + 1;
    }
    Ok((a, warnings))
}

/// Deterministic random F-module (positive degrees, ≤ `max_dim` basis
/// elements, degrees ≤ `max_degree`); used by round-trip property tests.
pub fn random_fmodule(
    p: u64,
    max_degree: usize,
    max_dim: usize,
    rng: &mut impl Rng,
) -> Result<FModule> {
    let dim = rng.gen_range(1..=max_dim);
    let mut basis = Vec::new();
    for i in 0..dim {
        let degree = rng.gen_range(1..=max_degree);
        basis.push(BasisElem {
            name: format!("e{i}"),
            degree,
        });
    }
    let module = GradedModule::new(p, max_degree, basis)?;
    let mut maps = BTreeMap::new();
    let pu = p as usize;
    for (&q, _) in module.dims_by_degree().iter() {
        if q * pu > max_degree {
            continue;
        }
        let rows = module.indices_of_degree(q * pu).len();
        let cols = module.indices_of_degree(q).len();
        let mut m = FpMatrix::zero(p, rows, cols);
        if p % 2 == 0 || q % 2 == 0 {
            for i in 0..rows {
                for j in 0..cols {
                    m.set(i, j, rng.gen_range(0..p));
                }
            }
        }
        maps.insert(q, m);
    }
    FModule::new(module, maps)
}

/// Conjugate M by random degreewise invertible changes of basis; the result
/// is isomorphic to M (same barcode).
pub fn random_conjugate(m: &FModule, rng: &mut impl Rng) -> FModule {
    let p = m.p();
    let pu = p as usize;
    // random invertible matrix per degree, with its inverse
    let mut gl: BTreeMap<usize, (FpMatrix, FpMatrix)> = BTreeMap::new();
    for (&d, &dim) in m.module.dims_by_degree().iter() {
        loop {
            let mut g = FpMatrix::zero(p, dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    g.set(i, j, rng.gen_range(0..p));
                }
            }
            if g.rank() < dim {
                continue;
            }
            // invert by solving g x = e_i columnwise
            let mut inv = FpMatrix::zero(p, dim, dim);
            for i in 0..dim {
                let mut e = vec![0u64; dim];
                e[i] = 1;
                let col = g.solve(&e).expect("full-rank matrix must be solvable");
                for (r, &v) in col.iter().enumerate() {
                    inv.set(r, i, v);
                }
            }
            gl.insert(d, (g, inv));
            break;
        }
    }
    // degrees with zero dimension have the empty change of basis
    let get = |d: usize, which: usize| -> FpMatrix {
        gl.get(&d)
            .map(|(g, i)| if which == 0 { g.clone() } else { i.clone() })
            .unwrap_or_else(|| FpMatrix::identity(p, 0))
    };
    let maps = m
        .maps
        .iter()
        .map(|(&q, f)| {
            let ginv = get(q, 1);
            let gt = get(q * pu, 0);
            (q, gt.mul(&f.mul(&ginv)))
        })
        .collect();
    FModule {
        module: m.module.clone(),
        maps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{make_preset, Generator, Preset};
    use crate::polar::{free_polar, polarize};
    use rand::SeedableRng;

    fn simple_module(p: u64, d: usize, degs: &[usize]) -> GradedModule {
        let basis = degs
            .iter()
            .enumerate()
            .map(|(i, &degree)| BasisElem {
                name: format!("e{i}"),
                degree,
            })
            .collect();
        GradedModule::new(p, d, basis).unwrap()
    }

    #[test]
    fn u_f_of_free_polar_steps_up_the_tower() {
        let m = simple_module(3, 54, &[2]);
        let a = free_polar(&m).unwrap();
        let f = u_f(&a).unwrap();
        // F(x^{3^i}) = x^{3^{i+1}}
        for (q, expect) in [(2usize, "e0^3"), (6, "e0^9"), (18, "e0^27")] {
            let mat = f.map_at(q);
            assert_eq!((mat.rows, mat.cols), (1, 1));
            assert_eq!(mat.get(0, 0), 1, "degree {q}");
            let t = f.module.indices_of_degree(q * 3)[0];
            assert_eq!(f.module.basis[t].name, expect);
        }
    }

    #[test]
    fn u_f_odd_generator_is_zero() {
        let m = simple_module(3, 27, &[3]);
        let a = free_polar(&m).unwrap();
        let f = u_f(&a).unwrap();
        let mat = f.map_at(3);
        assert!((0..mat.rows).all(|i| (0..mat.cols).all(|j| mat.get(i, j) == 0)));
    }

    #[test]
    fn u_f_of_truncated_polynomial_squares() {
        // F_2[x]/(x⁴), |x| = 1: F(x) = x², F(x²) = x⁴ = 0
        let b = make_preset(Preset::TruncatedPolynomial {
            p: 2,
            max_degree: 4,
            gens: vec![Generator {
                name: "x".into(),
                degree: 1,
                nil_power: Some(4),
            }],
        })
        .unwrap();
        let f = u_f(&polarize(&b)).unwrap();
        let m1 = f.map_at(1);
        assert_eq!((m1.rows, m1.cols), (1, 1));
        assert_eq!(m1.get(0, 0), 1);
        // x⁴ = 0 exactly (it is killed by the relation, not the truncation),
        // so the target space of F in degree 2 is zero
        let m2 = f.map_at(2);
        assert_eq!((m2.rows, m2.cols), (0, 1));
    }

    #[test]
    fn decompose_two_bars() {
        // N(2,1) ⊕ N(2,0) at p = 2, D = 8: a,b in degree 2, c in degree 4,
        // F(a) = c, F(b) = 0, F(c) = 0 (exactly, since degree 8 ≤ D)
        let module = simple_module(2, 8, &[2, 2, 4]);
        let mut maps = BTreeMap::new();
        maps.insert(2, FpMatrix::from_rows(2, &[vec![1, 0]]));
        maps.insert(4, FpMatrix::zero(2, 0, 1));
        let m = FModule::new(module, maps).unwrap();
        let bc = decompose(&m);
        assert_eq!(
            bc.bars,
            vec![
                Bar {
                    degree: 2,
                    length: BarLength::Finite(0)
                },
                Bar {
                    degree: 2,
                    length: BarLength::Finite(1)
                },
            ]
        );
        assert_eq!(bc.total_dim(), 3);
    }

    #[test]
    fn decompose_single_generator_zero_map() {
        let module = simple_module(3, 10, &[2]);
        let m = FModule::new(module, BTreeMap::new()).unwrap();
        let bc = decompose(&m);
        assert_eq!(
            bc.bars,
            vec![Bar {
                degree: 2,
                length: BarLength::Finite(0)
            }]
        );
    }

    #[test]
    fn decompose_flags_truncation_boundary() {
        // full tower 2 → 4 → 8 with isomorphisms, truncated at D = 8:
        // indistinguishable from M(2, ∞)
        let module = simple_module(2, 8, &[2, 4, 8]);
        let mut maps = BTreeMap::new();
        maps.insert(2, FpMatrix::from_rows(2, &[vec![1]]));
        maps.insert(4, FpMatrix::from_rows(2, &[vec![1]]));
        let m = FModule::new(module, maps).unwrap();
        let bc = decompose(&m);
        assert_eq!(
            bc.bars,
            vec![Bar {
                degree: 2,
                length: BarLength::Ambiguous(2)
            }]
        );
        assert!(bc.has_ambiguous());
    }

    #[test]
    fn dualize_round_trip_and_barcode_agreement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let p = [2u64, 3, 5][rng.gen_range(0..3)];
            let m = random_fmodule(p, 20, 8, &mut rng).unwrap();
            let v = dualize(&m);
            let back = dualize_v(&v);
            assert_eq!(m.maps.len(), back.maps.len());
            for (q, mat) in &m.maps {
                assert_eq!(mat, &back.maps[q]);
            }
            assert_eq!(decompose(&m), decompose_v(&v));
        }
    }

    #[test]
    fn barcode_round_trip_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = [2u64, 3][rng.gen_range(0..2)];
            let m = random_fmodule(p, 16, 10, &mut rng).unwrap();
            let bc = decompose(&m);
            assert_eq!(bc.total_dim(), m.module.dim());
            let rec = reconstruct(&bc).unwrap();
            assert_eq!(decompose(&rec), bc);
        }
    }

    #[test]
    fn barcode_invariant_under_conjugation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let p = [2u64, 3][rng.gen_range(0..2)];
            let m = random_fmodule(p, 16, 8, &mut rng).unwrap();
            let conj = random_conjugate(&m, &mut rng);
            assert_eq!(decompose(&m), decompose(&conj));
        }
    }

    #[test]
    fn lift_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let p = [2u64, 3][rng.gen_range(0..2)];
            let m = random_fmodule(p, 16, 8, &mut rng).unwrap();
            let (a, warnings) = lift_to_polar(&m).unwrap();
            let back = u_f(&a).unwrap();
            let bc = decompose(&m);
            assert_eq!(decompose(&back), bc);
            assert_eq!(bc.has_ambiguous(), !warnings.is_empty());
        }
    }

    #[test]
    fn lift_single_interval_is_truncated_free_polar() {
        // N(2, 2) at p = 3: tower x → x³ → x⁹, μ truncated above
        let module = simple_module(3, 18, &[2, 6, 18]);
        let mut maps = BTreeMap::new();
        maps.insert(2, FpMatrix::from_rows(3, &[vec![1]]));
        maps.insert(6, FpMatrix::from_rows(3, &[vec![1]]));
        let m = FModule::new(module, maps).unwrap();
        let (a, _) = lift_to_polar(&m).unwrap();
        assert_eq!(a.module.dim(), 3);
        assert_eq!(a.pth_power(&elem_single(0, 1)), elem_single(1, 1));
        assert_eq!(a.pth_power(&elem_single(1, 1)), elem_single(2, 1));
        assert!(a.pth_power(&elem_single(2, 1)).is_empty());
    }

    #[test]
    fn degree_zero_rejected() {
        let module = simple_module(3, 6, &[0, 2]);
        assert!(FModule::new(module, BTreeMap::new()).is_err());
    }
}
