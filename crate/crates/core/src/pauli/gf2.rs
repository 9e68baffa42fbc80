//! Dense linear algebra over GF(2) on packed `u128` rows.

/// Reduced row echelon form of `rows` augmented with `rhs`. Returns the
/// reduced rows, their right-hand sides and the pivot column of each.
fn rref(rows: &[u128], rhs: &[bool], nbits: usize) -> (Vec<u128>, Vec<bool>, Vec<usize>) {
    let mut m: Vec<(u128, bool)> = rows.iter().copied().zip(rhs.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nbits {
        let bit = 1u128 << c;
        let Some(p) = (r..m.len()).find(|&i| m[i].0 & bit != 0) else {
            continue;
        };
        m.swap(r, p);
        let (pr, pb) = m[r];
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.0 & bit != 0 {
                row.0 ^= pr;
                row.1 ^= pb;
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let (rows, rhs) = m.into_iter().unzip();
    (rows, rhs, pivots)
}

pub fn rank(rows: &[u128], nbits: usize) -> usize {
    rref(rows, &vec![false; rows.len()], nbits).2.len()
}

/// Some `h` with `parity(rows[i] & h) == rhs[i]` for all `i`, or `None`.
pub fn solve(rows: &[u128], rhs: &[bool], nbits: usize) -> Option<u128> {
    let (red, b, pivots) = rref(rows, rhs, nbits);
    if red[pivots.len()..].iter().zip(&b[pivots.len()..]).any(|(_, &v)| v) {
        return None;
    }
    Some(
        pivots
            .iter()
            .zip(&b)
            .filter(|(_, &v)| v)
            .fold(0u128, |h, (&c, _)| h | (1u128 << c)),
    )
}

/// Basis of `{h : parity(rows[i] & h) = 0 ∀i}` over the low `nbits` bits.
pub fn nullspace(rows: &[u128], nbits: usize) -> Vec<u128> {
    let (red, _, pivots) = rref(rows, &vec![false; rows.len()], nbits);
    (0..nbits)
        .filter(|c| !pivots.contains(c))
        .map(|f| {
            let mut h = 1u128 << f;
            for (row, &pc) in red.iter().zip(&pivots) {
                if row & (1u128 << f) != 0 {
                    h |= 1u128 << pc;
                }
            }
            h
        })
        .collect()
}

/// Whether `v` lies in the span of `rows`.
pub fn in_span(rows: &[u128], v: u128, nbits: usize) -> bool {
    let mut with = rows.to_vec();
    with.push(v);
    rank(&with, nbits) == rank(rows, nbits)
}

pub fn parity(v: u128) -> bool {
    v.count_ones() % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_system() {
        // h0 ^ h1 = 1, h1 = 1 -> h = (0, 1)
        let h = solve(&[0b11, 0b10], &[true, true], 2).unwrap();
        assert_eq!(h, 0b10);
        assert!(solve(&[0b11, 0b11], &[true, false], 2).is_none());
    }

    proptest! {
        #[test]
        fn solutions_satisfy_system(
            rows in prop::collection::vec(0u128..(1 << 10), 1..8),
            seed in any::<u64>(),
        ) {
            let rhs: Vec<bool> = (0..rows.len()).map(|i| (seed >> i) & 1 == 1).collect();
            if let Some(h) = solve(&rows, &rhs, 10) {
                for (r, b) in rows.iter().zip(&rhs) {
                    prop_assert_eq!(parity(r & h), *b);
                }
            }
            let ns = nullspace(&rows, 10);
            prop_assert_eq!(ns.len() + rank(&rows, 10), 10);
            for h in ns {
                for r in &rows {
                    prop_assert!(!parity(r & h));
                }
            }
        }
    }
}
