use crate::error::{invalid, Result};

/// `x = u G_N` with `G_N = B_N F^{⊗n}` over GF(2), in place. Self-inverse.
pub fn polar_transform_in_place(bits: &mut [u8]) -> Result<()> {
    let n = bits.len();
    if n < 2 || !n.is_power_of_two() {
        return invalid(format!("polar transform length {n} is not a power of two >= 2"));
    }
    butterfly(bits);
    let stages = n.trailing_zeros();
    for i in 0..n {
        let r = reverse(i, stages);
        if r > i {
            bits.swap(i, r);
        }
    }
    Ok(())
}

pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

/// `u F^{⊗n}` without the bit-reversal permutation.
pub(crate) fn butterfly(bits: &mut [u8]) {
    let n = bits.len();
    let mut span = 1;
    while span < n {
        for block in bits.chunks_exact_mut(2 * span) {
            let (lo, hi) = block.split_at_mut(span);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        span *= 2;
    }
}

#[inline]
fn reverse(i: usize, stages: u32) -> usize {
    if stages == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - stages)
    }
}

pub(crate) fn bit_reversal_table(n: usize) -> Vec<usize> {
    let stages = n.trailing_zeros();
    (0..n).map(|i| reverse(i, stages)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense `B_N F^{⊗n}` built from the Kronecker definition.
    fn generator(n: usize) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        while g.len() < n {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    next[r][c] = g[r][c];
                    next[r + m][c] = g[r][c];
                    next[r + m][c + m] = g[r][c];
                }
            }
            g = next;
        }
        let rev = bit_reversal_table(n);
        (0..n).map(|r| g[rev[r]].clone()).collect()
    }

    fn matmul(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
        let n = u.len();
        (0..n)
            .map(|c| (0..n).fold(0u8, |acc, r| acc ^ (u[r] & g[r][c])))
            .collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(polar_transform(&[0; 8]).unwrap(), vec![0; 8]);
        assert_eq!(polar_transform(&[1, 1]).unwrap(), vec![0, 1]);
        assert_eq!(polar_transform(&[0, 1, 0, 0]).unwrap(), vec![1, 0, 1, 0]);
        assert_eq!(matmul(&[0, 1, 0, 0], &generator(4)), vec![1, 0, 1, 0]);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(polar_transform(&[1, 0, 1]).is_err());
        assert!(polar_transform(&[1]).is_err());
        assert!(polar_transform(&[]).is_err());
    }

    proptest! {
        #[test]
        fn matches_dense_generator(stages in 1u32..6, seed in any::<u64>()) {
            let n = 1usize << stages;
            let u: Vec<u8> = (0..n).map(|i| ((seed >> (i % 64)) & 1) as u8 ^ (i as u8 & 1 & (seed as u8))).collect();
            prop_assert_eq!(polar_transform(&u).unwrap(), matmul(&u, &generator(n)));
        }

        #[test]
        fn self_inverse(stages in 1u32..11, bits in proptest::collection::vec(0u8..2, 1024)) {
            let u = &bits[..1usize << stages];
            let x = polar_transform(u).unwrap();
            prop_assert_eq!(polar_transform(&x).unwrap(), u.to_vec());
        }
    }
}
