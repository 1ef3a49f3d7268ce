//! Dense exact linear algebra over F_p: rank, kernel, solving, and
//! incremental row spans for quotient computations.

use crate::fp;

/// Dense matrix over F_p, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u64, rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r.iter().map(|x| x % p));
        }
        FpMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = 0u64;
                for j in 0..self.cols {
                    acc = fp::add(acc, fp::mul(self.get(i, j), v[j], self.p), self.p);
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zero(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = FpMatrix::zero(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = fp::add(out.get(i, j), fp::mul(a, other.get(k, j), self.p), self.p);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Rank and a basis of the kernel `{v : m v = 0}`.
    pub fn rank_kernel(&self) -> (usize, Vec<Vec<u64>>) {
        let p = self.p;
        let mut a = self.clone();
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut r = 0usize;
        for c in 0..a.cols {
            // find pivot
            let mut piv = None;
            for i in r..a.rows {
                if a.get(i, c) != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { continue };
            // swap rows
            for j in 0..a.cols {
                let (x, y) = (a.get(r, j), a.get(pi, j));
                a.set(r, j, y);
                a.set(pi, j, x);
            }
            let inv = fp::inv(a.get(r, c), p);
            for j in 0..a.cols {
                a.set(r, j, fp::mul(a.get(r, j), inv, p));
            }
            for i in 0..a.rows {
                if i != r && a.get(i, c) != 0 {
                    let f = a.get(i, c);
                    for j in 0..a.cols {
                        let v = fp::sub(a.get(i, j), fp::mul(f, a.get(r, j), p), p);
                        a.set(i, j, v);
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == a.rows {
                break;
            }
        }
        // handle remaining columns having no pivots (r == rows case): done.
        let mut kernel = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivot_cols.iter().copied().collect();
        for c in 0..a.cols {
            if pivot_set.contains(&c) {
                continue;
            }
            let mut v = vec![0u64; a.cols];
            v[c] = 1;
            for (ri, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = fp::neg(a.get(ri, c), p);
            }
            kernel.push(v);
        }
        (pivot_cols.len(), kernel)
    }

    pub fn rank(&self) -> usize {
        self.rank_kernel().0
    }

    /// Solve `self * x = b`; returns one solution if consistent.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let p = self.p;
        // augmented elimination
        let mut aug = FpMatrix::zero(p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            let mut piv = None;
            for i in r..aug.rows {
                if aug.get(i, c) != 0 {
                    piv = Some(i);
                    break;
                }
            }
            let Some(pi) = piv else { continue };
            for j in 0..aug.cols {
                let (x, y) = (aug.get(r, j), aug.get(pi, j));
                aug.set(r, j, y);
                aug.set(pi, j, x);
            }
            let inv = fp::inv(aug.get(r, c), p);
            for j in 0..aug.cols {
                aug.set(r, j, fp::mul(aug.get(r, j), inv, p));
            }
            for i in 0..aug.rows {
                if i != r && aug.get(i, c) != 0 {
                    let f = aug.get(i, c);
                    for j in 0..aug.cols {
                        let v = fp::sub(aug.get(i, j), fp::mul(f, aug.get(r, j), p), p);
                        aug.set(i, j, v);
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == aug.rows {
                break;
            }
        }
        // inconsistency check
        for i in r..aug.rows {
            if aug.get(i, self.cols) != 0 {
                return None;
            }
        }
        let mut x = vec![0u64; self.cols];
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            x[pc] = aug.get(ri, self.cols);
        }
        Some(x)
    }
}

/// Incrementally built row-reduced span of vectors in F_p^n.
///
/// Used both as a subspace membership oracle and, via the non-pivot
/// coordinates, as a model of the quotient space F_p^n / span.
#[derive(Clone, Debug)]
pub struct Span {
    pub p: u64,
    pub dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Span {
    pub fn new(p: u64, dim: usize) -> Self {
        Span {
            p,
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Residue of `v` after eliminating all pivot coordinates.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut v = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if v[pc] != 0 {
                let f = v[pc];
                for j in 0..self.dim {
                    v[j] = fp::sub(v[j], fp::mul(f, row[j], self.p), self.p);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|x| *x == 0)
    }

    /// Insert a vector; returns true if it enlarged the span.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut v = self.reduce(v);
        let Some(pc) = v.iter().position(|x| *x != 0) else {
            return false;
        };
        let inv = fp::inv(v[pc], self.p);
        for x in v.iter_mut() {
            *x = fp::mul(*x, inv, self.p);
        }
        // back-eliminate the new pivot from existing rows
        for row in self.rows.iter_mut() {
            if row[pc] != 0 {
                let f = row[pc];
                for j in 0..self.dim {
                    row[j] = fp::sub(row[j], fp::mul(f, v[j], self.p), self.p);
                }
            }
        }
        let at = self.pivots.iter().position(|&q| q > pc).unwrap_or(self.pivots.len());
        self.rows.insert(at, v);
        self.pivots.insert(at, pc);
        true
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns without a pivot: a basis of the quotient by this span.
    pub fn free_columns(&self) -> Vec<usize> {
        let ps: std::collections::HashSet<usize> = self.pivots.iter().copied().collect();
        (0..self.dim).filter(|c| !ps.contains(c)).collect()
    }

    /// Coordinates of `v` in the quotient basis given by `free_columns`.
    pub fn quotient_coords(&self, v: &[u64]) -> Vec<u64> {
        let r = self.reduce(v);
        self.free_columns().iter().map(|&c| r[c]).collect()
    }

    pub fn basis_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}
