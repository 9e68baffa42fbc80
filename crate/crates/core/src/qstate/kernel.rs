//! Index arithmetic and dense kernels shared by pure states and density
//! matrices. Qubit position 0 is the most significant bit of a basis index.

use super::C64;

#[inline]
pub(crate) fn bit_of(pos: usize, nq: usize) -> usize {
    nq - 1 - pos
}

/// Drops bit `bit` from `idx`, shifting higher bits down.
#[cfg(test)]
fn remove_bit(idx: usize, bit: usize) -> usize {
    ((idx >> (bit + 1)) << bit) | (idx & ((1 << bit) - 1))
}

/// Opens a slot at `bit` holding `val`.
#[inline]
pub(crate) fn insert_bit(idx: usize, bit: usize, val: usize) -> usize {
    ((idx >> bit) << (bit + 1)) | (val << bit) | (idx & ((1 << bit) - 1))
}

/// Offsets of the 2^k local basis states spanned by `positions`, with
/// `positions[0]` as the most significant local bit.
pub(crate) fn local_offsets(nq: usize, positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|l| {
            positions.iter().enumerate().fold(0, |acc, (j, &p)| {
                acc | (((l >> (k - 1 - j)) & 1) << bit_of(p, nq))
            })
        })
        .collect()
}

/// Multiplies the sub-register at `positions` by the row-major square
/// matrix `m` in place.
pub(crate) fn apply_local(data: &mut [C64], nq: usize, positions: &[usize], m: &[C64]) {
    let offs = local_offsets(nq, positions);
    let dim = offs.len();
    debug_assert_eq!(m.len(), dim * dim);
    let mask = offs[dim - 1];
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for base in 0..data.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &o) in offs.iter().enumerate() {
            v[l] = data[base + o];
        }
        for (r, &o) in offs.iter().enumerate() {
            let row = &m[r * dim..(r + 1) * dim];
            data[base + o] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    }
}

/// For a reordering where new position `j` holds old position `perm[j]`,
/// returns the old basis index for every new basis index.
pub(crate) fn permutation_table(nq: usize, perm: &[usize]) -> Vec<usize> {
    (0..1usize << nq)
        .map(|new| {
            perm.iter().enumerate().fold(0, |acc, (j, &old_pos)| {
                acc | (((new >> bit_of(j, nq)) & 1) << bit_of(old_pos, nq))
            })
        })
        .collect()
}

/// Row-major product of two square matrices of side `n`.
pub(crate) fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Conjugate transpose of a row-major `rows × cols` matrix.
pub(crate) fn adjoint(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = m[r * cols + c].conj();
        }
    }
    out
}

/// Kronecker product of row-major square matrices.
pub(crate) fn kron(a: &[C64], na: usize, b: &[C64], nb: usize) -> Vec<C64> {
    let n = na * nb;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            let aij = a[i * na + j];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = aij * b[k * nb + l];
                }
            }
        }
    }
    out
}
