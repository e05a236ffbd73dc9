//! Polar generator-matrix algebra and encoding.
//!
//! The generator matrix is `G_N = B_N F^{⊗m}` with the Arikan kernel
//! `F = [[1, 0], [1, 1]]` and the bit-reversal permutation `B_N`. Bit `d` of an
//! index `i` (written `i_d`) is its `d`-th least-significant binary digit.
//! With that convention `G_4` has rows `1000, 1010, 1100, 1111`.

use crate::bits::BitWord;
use crate::cis::CodeConfig;
use crate::error::{invalid, Result};
use crate::perm::Permutation;

/// Returns `m` for `n = 2^m`, `m >= 1`.
pub fn log2_len(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(invalid!("length {n} is not a power of two >= 2"));
    }
    Ok(n.trailing_zeros())
}

/// Reverses the low `m` bits of `i`.
#[inline]
pub fn reverse_bits(i: usize, m: u32) -> usize {
    if m == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - m)
    }
}

/// Entry `(i, j)` of `G_N`, `N = 2^m`, from the closed form
/// `G_N(i, j) = NOT OR_d (NOT i_d AND j_{m-d-1})`.
pub fn generator_entry(i: usize, j: usize, m: u32) -> Result<u8> {
    if m == 0 || m >= usize::BITS {
        return Err(invalid!("log2 length {m} out of range"));
    }
    let n = 1usize << m;
    if i >= n || j >= n {
        return Err(invalid!("index ({i}, {j}) out of range for N = {n}"));
    }
    // OR over d of (!i_d & j_{m-d-1}) is a test on (!i) & reverse(j).
    let mask = n - 1;
    Ok(u8::from((!i & reverse_bits(j, m) & mask) == 0))
}

/// The bit-reversal permutation `B_N`.
pub fn bit_reversal(n: usize) -> Result<Permutation> {
    let m = log2_len(n)?;
    Permutation::new((0..n).map(|i| reverse_bits(i, m)).collect())
}

/// Encodes `x = u · G_N` over GF(2) in `O(N log N)`.
///
/// The butterfly computes `v = u · F^{⊗m}` on packed words and the result is
/// then read out in bit-reversed order, `x_j = v_{rev(j)}`.
pub fn encode(u: &BitWord) -> Result<BitWord> {
    let n = u.len();
    let m = log2_len(n)?;
    let mut v = u.clone();
    butterfly(v.words_mut(), n);
    let mut x = BitWord::zeros(n);
    for j in 0..n {
        let b = v.get(reverse_bits(j, m));
        if b == 1 {
            x.set(j, 1);
        }
    }
    Ok(x)
}

/// In-place `v ← v · F^{⊗m}` on LSB-first packed bits.
fn butterfly(words: &mut [u64], n: usize) {
    // Within a word: bit k takes bit k + h for every k whose bit h is clear.
    const MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0F0F_0F0F_0F0F_0F0F,
        0x00FF_00FF_00FF_00FF,
        0x0000_FFFF_0000_FFFF,
        0x0000_0000_FFFF_FFFF,
    ];
    for (s, &mask) in MASKS.iter().enumerate() {
        let h = 1usize << s;
        if h >= n {
            break;
        }
        for w in words.iter_mut() {
            *w ^= (*w >> h) & mask;
        }
    }
    let mut h = 1usize;
    while 64 * h < n {
        for block in words.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= b;
            }
        }
        h *= 2;
    }
}

/// Scatters `info_bits` onto the information indices of `config` (ascending),
/// zeros elsewhere.
pub fn assemble_source(info_bits: &BitWord, config: &CodeConfig) -> Result<BitWord> {
    let info = config.info_indices();
    if info_bits.len() != info.len() {
        return Err(invalid!(
            "expected {} information bits, got {}",
            info.len(),
            info_bits.len()
        ));
    }
    let mut u = BitWord::zeros(config.n());
    for (k, &i) in info.iter().enumerate() {
        if info_bits.get(k) == 1 {
            u.set(i, 1);
        }
    }
    Ok(u)
}

/// Row `i` of `G_N` via the closed-form entry formula.
pub fn generator_row(i: usize, m: u32) -> Result<BitWord> {
    let n = 1usize << m;
    let bits: Vec<u8> = (0..n)
        .map(|j| generator_entry(i, j, m))
        .collect::<Result<_>>()?;
    BitWord::from_bits(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cis::CisSpec;
    use proptest::prelude::*;

    /// Independent oracle: explicit Kronecker power then bit-reversed rows.
    fn kron_generator(m: u32) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        for _ in 0..m {
            let k = g.len();
            let mut next = vec![vec![0u8; 2 * k]; 2 * k];
            for (a, b, f) in [(0, 0, 1u8), (0, 1, 0), (1, 0, 1), (1, 1, 1)] {
                for i in 0..k {
                    for j in 0..k {
                        next[a * k + i][b * k + j] = f & g[i][j];
                    }
                }
            }
            g = next;
        }
        let rev = bit_reversal(1 << m).unwrap();
        rev.permute_rows(&g)
    }

    fn matrix_product(u: &[u8], m: u32) -> Vec<u8> {
        let n = 1usize << m;
        (0..n)
            .map(|j| {
                (0..n).fold(0u8, |acc, i| acc ^ (u[i] & generator_entry(i, j, m).unwrap()))
            })
            .collect()
    }

    #[test]
    fn generator_entry_examples() {
        assert_eq!(generator_entry(1, 2, 2).unwrap(), 1);
        assert_eq!(generator_entry(0, 0, 1).unwrap(), 1);
        assert_eq!(generator_entry(0, 1, 1).unwrap(), 0);
        for m in 1..=6 {
            let n = 1usize << m;
            for j in 0..n {
                assert_eq!(generator_entry(n - 1, j, m).unwrap(), 1);
            }
        }
        assert!(generator_entry(4, 0, 2).is_err());
        assert!(generator_entry(0, 4, 2).is_err());
    }

    #[test]
    fn g4_rows_pin_endianness() {
        let rows: Vec<String> = (0..4).map(|i| generator_row(i, 2).unwrap().to_string()).collect();
        assert_eq!(rows, ["1000", "1010", "1100", "1111"]);
    }

    #[test]
    fn entry_formula_matches_kronecker_oracle() {
        for m in 1..=6 {
            let g = kron_generator(m);
            let n = 1usize << m;
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(generator_entry(i, j, m).unwrap(), g[i][j], "m={m} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn both_factorizations_agree() {
        // B_N F^{⊗m} (rows permuted) equals F^{⊗m} B_N (columns permuted).
        for m in 1..=5 {
            let n = 1usize << m;
            let rev = bit_reversal(n).unwrap();
            let f_pow = rev.permute_rows(&kron_generator(m)); // B_N·B_N = I
            let col_perm = rev.permute_columns(&f_pow);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(col_perm[i][j], generator_entry(i, j, m).unwrap());
                }
            }
        }
    }

    #[test]
    fn bit_reversal_examples() {
        assert_eq!(bit_reversal(2).unwrap().map(), &[0, 1]);
        assert_eq!(bit_reversal(4).unwrap().map(), &[0, 2, 1, 3]);
        assert_eq!(bit_reversal(8).unwrap().map(), &[0, 4, 2, 6, 1, 5, 3, 7]);
        assert!(bit_reversal(6).is_err());
        let p = bit_reversal(64).unwrap();
        assert!(p.compose(&p).is_identity());
    }

    #[test]
    fn encode_examples() {
        let zero = BitWord::zeros(8);
        assert_eq!(encode(&zero).unwrap(), zero);
        let u = BitWord::parse("0101").unwrap();
        assert_eq!(encode(&u).unwrap().to_string(), "0101");
        for m in 1..=8u32 {
            let n = 1usize << m;
            for i in 0..n {
                let mut u = BitWord::zeros(n);
                u.set(i, 1);
                assert_eq!(encode(&u).unwrap(), generator_row(i, m).unwrap());
            }
        }
        assert!(encode(&BitWord::zeros(6)).is_err());
        assert!(encode(&BitWord::zeros(1)).is_err());
    }

    #[test]
    fn encode_is_involution_exhaustive_small() {
        for m in 1..=4u32 {
            let n = 1usize << m;
            for word in 0..(1u32 << n) {
                let bits: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
                let u = BitWord::from_bits(&bits).unwrap();
                assert_eq!(encode(&encode(&u).unwrap()).unwrap(), u);
            }
        }
    }

    #[test]
    fn assemble_source_examples() {
        let spec = CisSpec::new(4, 0).unwrap();
        let cfg = CodeConfig::comb_shaped(&spec, vec![1, 3]).unwrap();
        let u = assemble_source(&BitWord::parse("11").unwrap(), &cfg).unwrap();
        assert_eq!(u.to_string(), "0101");

        let spec = CisSpec::new(8, 0).unwrap();
        let cfg = CodeConfig::comb_shaped(&spec, crate::cis::cis(&spec)).unwrap();
        let u = assemble_source(&BitWord::parse("1010").unwrap(), &cfg).unwrap();
        assert_eq!(u.to_string(), "01000100");

        let cfg = CodeConfig::conventional(8, vec![]).unwrap();
        assert_eq!(assemble_source(&BitWord::zeros(0), &cfg).unwrap(), BitWord::zeros(8));
        assert!(assemble_source(&BitWord::zeros(1), &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn fast_encode_matches_matrix_product(m in 1u32..=10, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u = BitWord::random(1 << m, &mut rng);
            let fast = encode(&u).unwrap().to_vec();
            prop_assert_eq!(fast, matrix_product(&u.to_vec(), m));
        }

        #[test]
        fn encode_is_involution(m in 5u32..=11, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u = BitWord::random(1 << m, &mut rng);
            prop_assert_eq!(encode(&encode(&u).unwrap()).unwrap(), u);
        }
    }
}
