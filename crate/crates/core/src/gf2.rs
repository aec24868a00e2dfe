//! Small GF(2) linear algebra over packed `u64` rows.

/// Row-reduced basis kept in echelon form keyed by pivot bit.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    rows: Vec<(usize, Vec<u64>)>,
}

fn lowest_bit(v: &[u64]) -> Option<usize> {
    v.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn bit(v: &[u64], i: usize) -> bool {
    (v[i / 64] >> (i % 64)) & 1 == 1
}

fn xor_into(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

impl Basis {
    pub fn new() -> Self {
        Basis { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the basis.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut v = v.to_vec();
        for (p, r) in &self.rows {
            if bit(&v, *p) {
                xor_into(&mut v, r);
            }
        }
        v
    }

    /// Inserts `v`, returning `true` if it was independent.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let v = self.reduce(v);
        match lowest_bit(&v) {
            None => false,
            Some(p) => {
                for (_, r) in self.rows.iter_mut() {
                    if bit(r, p) {
                        xor_into(r, &v);
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|w| *w == 0)
    }
}

pub fn rank(rows: &[Vec<u64>]) -> usize {
    let mut b = Basis::new();
    rows.iter().filter(|r| b.insert(r)).count()
}

pub fn in_span(rows: &[Vec<u64>], v: &[u64]) -> bool {
    let mut b = Basis::new();
    for r in rows {
        b.insert(r);
    }
    b.contains(v)
}

/// Null space of the `m x n` matrix whose rows are given (bits `0..n`).
/// Returns a basis of vectors `y` with `rows[i] . y = 0` for all `i`.
pub fn kernel(rows: &[Vec<u64>], n: usize) -> Vec<Vec<u64>> {
    let w = n.div_ceil(64);
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..m.len()).find(|&k| bit(&m[k], c)) else { continue };
        m.swap(r, k);
        let pr = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && bit(row, c) {
                xor_into(row, &pr);
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut y = vec![0u64; w];
            y[f / 64] |= 1 << (f % 64);
            for (i, &p) in pivots.iter().enumerate() {
                if bit(&m[i], f) {
                    y[p / 64] |= 1 << (p % 64);
                }
            }
            y
        })
        .collect()
}

/// Solves `A y = b` where `A` has the given rows over bits `0..n`.
/// Returns one solution with free variables set to zero.
pub fn solve_system(rows: &[Vec<u64>], rhs: &[bool], n: usize) -> Option<Vec<u64>> {
    let w = (n + 1).div_ceil(64);
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut v = vec![0u64; w];
            for i in (0..n).filter(|&i| bit(r, i)) {
                v[i / 64] |= 1 << (i % 64);
            }
            if b {
                v[n / 64] |= 1 << (n % 64);
            }
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..m.len()).find(|&k| bit(&m[k], c)) else { continue };
        m.swap(r, k);
        let pr = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && bit(row, c) {
                xor_into(row, &pr);
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| bit(row, n)) {
        return None;
    }
    let mut y = vec![0u64; n.div_ceil(64).max(1)];
    for (i, &p) in pivots.iter().enumerate() {
        if bit(&m[i], n) {
            y[p / 64] |= 1 << (p % 64);
        }
    }
    Some(y)
}

/// Exchanges the x and z halves of a `[x | z]` vector over `n` qubits, so
/// that a plain dot product with the result is the symplectic product.
pub fn swap_halves(v: &[u64], n: usize) -> Vec<u64> {
    let mut out = vec![0u64; v.len()];
    for i in 0..2 * n {
        if bit(v, i) {
            let j = if i < n { i + n } else { i - n };
            out[j / 64] |= 1 << (j % 64);
        }
    }
    out
}

/// Parity of the bitwise AND.
pub fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() % 2 == 1
}

/// Solves `sum_i c_i rows[i] = v`; returns the coefficient indices used.
pub fn solve(rows: &[Vec<u64>], v: &[u64]) -> Option<Vec<usize>> {
    let k = rows.len();
    let w = v.len();
    // Augment every row with an identity tag recording its combination.
    let tw = k.div_ceil(64).max(1);
    let mut basis: Vec<(usize, Vec<u64>, Vec<u64>)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut val = r.clone();
        let mut tag = vec![0u64; tw];
        tag[i / 64] |= 1 << (i % 64);
        for (p, bv, bt) in &basis {
            if bit(&val, *p) {
                xor_into(&mut val, bv);
                xor_into(&mut tag, bt);
            }
        }
        if let Some(p) = lowest_bit(&val) {
            for (_, bv, bt) in basis.iter_mut() {
                if bit(bv, p) {
                    xor_into(bv, &val);
                    xor_into(bt, &tag);
                }
            }
            basis.push((p, val, tag));
        }
    }
    let mut val = v.to_vec();
    let mut tag = vec![0u64; tw];
    for (p, bv, bt) in &basis {
        if bit(&val, *p) {
            xor_into(&mut val, bv);
            xor_into(&mut tag, bt);
        }
    }
    debug_assert_eq!(val.len(), w);
    if val.iter().any(|x| *x != 0) {
        return None;
    }
    Some((0..k).filter(|&i| bit(&tag, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_span() {
        let rows = vec![vec![0b011], vec![0b110], vec![0b101]];
        assert_eq!(rank(&rows), 2);
        assert!(in_span(&rows, &[0b101]));
        assert!(!in_span(&rows, &[0b001]));
    }

    #[test]
    fn kernel_is_orthogonal() {
        let rows = vec![vec![0b0111], vec![0b1100]];
        let ker = kernel(&rows, 4);
        assert_eq!(ker.len(), 2);
        for y in &ker {
            for r in &rows {
                assert_eq!((r[0] & y[0]).count_ones() % 2, 0);
            }
        }
    }

    #[test]
    fn solve_recovers_combination() {
        let rows = vec![vec![0b0011], vec![0b0110], vec![0b1000]];
        let c = solve(&rows, &[0b1101]).unwrap();
        let mut acc = 0;
        for i in c {
            acc ^= rows[i][0];
        }
        assert_eq!(acc, 0b1101);
        assert!(solve(&rows[..2], &[0b1000]).is_none());
    }
}
