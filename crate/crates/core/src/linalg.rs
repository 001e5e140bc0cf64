//! Exact row reduction over `F_p`.
//!
//! Rows are dense `u32` vectors. Elimination accumulates without reducing mod `p`
//! until the accumulator could overflow, then reduces the whole row once.

/// An incrementally built row-echelon basis of a subspace of `F_p^n`.
#[derive(Debug, Clone)]
pub struct Echelon {
    p: u32,
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
    /// Eliminations that fit in a `u32` between two full reductions.
    batch: usize,
}

impl Echelon {
    pub fn new(p: u64, n: usize) -> Echelon {
        assert!(p >= 2 && p < (1 << 15));
        let p = p as u32;
        let sq = ((p - 1) as u64) * ((p - 1) as u64);
        let batch = ((u32::MAX as u64 - p as u64) / sq.max(1)).max(1) as usize;
        Echelon {
            p,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
            pivot_row: vec![None; n],
            batch,
        }
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.n
    }

    /// Reduces `v` (entries below `p`) against the basis in place.
    pub fn reduce(&self, v: &mut [u32]) {
        let p = self.p;
        let mut pending = 0usize;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv] % p;
            if c == 0 {
                v[piv] = 0;
                continue;
            }
            let factor = p - c;
            for (x, &r) in v.iter_mut().zip(row) {
                *x += factor * r;
            }
            pending += 1;
            if pending >= self.batch {
                for x in v.iter_mut() {
                    *x %= p;
                }
                pending = 0;
            }
        }
        for x in v.iter_mut() {
            *x %= p;
        }
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, mut v: Vec<u32>) -> bool {
        debug_assert_eq!(v.len(), self.n);
        for x in v.iter_mut() {
            *x %= self.p;
        }
        self.reduce(&mut v);
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(v[piv], self.p);
        for x in v.iter_mut() {
            *x = *x * inv % self.p;
        }
        self.pivot_row[piv] = Some(self.rows.len());
        self.rows.push(v);
        self.pivots.push(piv);
        true
    }

    pub fn insert_sparse(&mut self, v: &[(usize, u64)]) -> bool {
        let mut dense = vec![0u32; self.n];
        for &(i, c) in v {
            dense[i] = ((dense[i] as u64 + c) % self.p as u64) as u32;
        }
        self.insert(dense)
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut w: Vec<u32> = v.iter().map(|&x| x % self.p).collect();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Whether `other` is a subspace of `self`.
    pub fn contains_space(&self, other: &Echelon) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn same_space(&self, other: &Echelon) -> bool {
        self.dim() == other.dim() && self.contains_space(other)
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Rank of a list of rows over `F_p`.
pub fn rank_mod_p(p: u64, n: usize, rows: impl IntoIterator<Item = Vec<u32>>) -> usize {
    let mut e = Echelon::new(p, n);
    for r in rows {
        e.insert(r);
        if e.is_full() {
            break;
        }
    }
    e.dim()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_rank() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]];
        assert_eq!(rank_mod_p(7, 3, rows.clone()), 2);
        let mut e = Echelon::new(7, 3);
        for r in rows {
            e.insert(r);
        }
        assert!(e.contains(&[1, 3, 4]));
        assert!(!e.contains(&[0, 0, 1]));
    }

    #[test]
    fn delayed_reduction_matches_naive() {
        let p = 5u64;
        let n = 40;
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % p) as u32
        };
        let rows: Vec<Vec<u32>> = (0..60).map(|_| (0..n).map(|_| next()).collect()).collect();
        let mut e = Echelon::new(p, n);
        e.batch = 1;
        let mut f = Echelon::new(p, n);
        for r in &rows {
            assert_eq!(e.insert(r.clone()), f.insert(r.clone()));
        }
        assert_eq!(e.dim(), n);
    }
}
