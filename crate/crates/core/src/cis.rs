//! Comb-shaping index sets and the order-preserving map `g_{N,r}`.
//!
//! The `r`-th comb-shaping index set of a length-`N` code is
//! `Λ_r = { i : bit r of i is 1 }`. Every generator row indexed in `Λ_r` is
//! locally periodic with local period `2^{m-r-1}` and two repetitions, so any
//! codeword built only from those rows is too.
//!
//! `g_{N,r}` maps the upper half `{N/2, …, N-1}` onto `Λ_r` preserving order.
//! Symmetric sub-channel `j` of the upper half has the same capacity as the
//! CIS-constrained sub-channel `g(j)`, which is what CCD exploits.

use crate::error::{invalid, Result};
use crate::perm::Permutation;
use crate::polar::{log2_len, reverse_bits};

/// Code length and CIS order `r ∈ {0, …, log2(N) - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CisSpec {
    n: usize,
    order: u32,
}

impl CisSpec {
    pub fn new(n: usize, order: u32) -> Result<Self> {
        let m = log2_len(n)?;
        if order >= m {
            return Err(invalid!("CIS order {order} out of range for N = {n} (need r < {m})"));
        }
        Ok(CisSpec { n, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn log2_n(&self) -> u32 {
        self.n.trailing_zeros()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.n && (i >> self.order) & 1 == 1
    }

    /// `g_{N,r}(i) = (2⌊R_{N/2}(i)/2^r⌋ + ⌊i/(N/2)⌋)·2^r + R_{2^r}(i)`.
    #[inline]
    pub fn g(&self, i: usize) -> usize {
        let half = self.n / 2;
        let p = 1usize << self.order;
        (2 * ((i % half) / p) + i / half) * p + i % p
    }

    /// `g^{-1}_{N,r}(i) = ⌊i/2^{r+1}⌋·2^r + R_2(⌊i/2^r⌋)·N/2 + R_{2^r}(i)`.
    #[inline]
    pub fn g_inv(&self, i: usize) -> usize {
        let p = 1usize << self.order;
        (i / (2 * p)) * p + ((i / p) % 2) * (self.n / 2) + i % p
    }

    /// Local period of every comb-shaping row, `2^{m-r-1}`.
    pub fn local_period(&self) -> usize {
        self.n >> (self.order + 1)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(invalid!("index {i} out of range for N = {}", self.n))
        } else {
            Ok(())
        }
    }
}

/// The comb-shaping index set `Λ_r`, ascending. Always `N/2` elements.
pub fn cis(spec: &CisSpec) -> Vec<usize> {
    (0..spec.n).filter(|&i| spec.contains(i)).collect()
}

/// `true` iff `seq` is a succession of blocks of length `period·count`, each
/// consisting of `count` copies of its first `period` elements.
pub fn is_locally_periodic<T: PartialEq>(seq: &[T], period: usize, count: usize) -> Result<bool> {
    if period == 0 || count == 0 {
        return Err(invalid!("local period and period number must be positive"));
    }
    let block = period * count;
    if seq.len() % block != 0 {
        return Err(invalid!(
            "sequence length {} not divisible by period·count = {block}",
            seq.len()
        ));
    }
    Ok(seq.chunks(block).all(|chunk| {
        let (head, rest) = chunk.split_at(period);
        rest.chunks(period).all(|rep| rep == head)
    }))
}

pub fn g_map(spec: &CisSpec, i: usize) -> Result<usize> {
    spec.check_index(i)?;
    Ok(spec.g(i))
}

pub fn g_inv(spec: &CisSpec, i: usize) -> Result<usize> {
    spec.check_index(i)?;
    Ok(spec.g_inv(i))
}

/// Which of the two permutation matrices induced by `g_{N,r}` to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `Π_g`, with `Π_g(i, j) = 1` iff `j = g(i)`.
    Forward,
    /// `Π_{g^{-1}}`, with `Π_{g^{-1}}(i, j) = 1` iff `j = g^{-1}(i)`.
    Inverse,
}

/// Permutation matrix for `g_{N,r}` in row form (see [`Permutation`]).
///
/// The receiver-side reordering `ỹ = y · Π_{g^{-1}}` is
/// `g_permutation(spec, Direction::Inverse).apply_row(y)`, which yields
/// `ỹ[j] = y[g(j)]`.
pub fn g_permutation(spec: &CisSpec, direction: Direction) -> Permutation {
    let map = (0..spec.n)
        .map(|i| match direction {
            Direction::Forward => spec.g(i),
            Direction::Inverse => spec.g_inv(i),
        })
        .collect();
    Permutation::new(map).expect("g is a bijection")
}

/// Coordinate permutation `σ = rev ∘ g ∘ rev` (bit reversal over `m` bits).
///
/// `G_N(g(i), σ(j)) = G_N(i, j)` for all `i, j`, so a comb-shaping codeword
/// `x = uG_N` read as `x̃_j = x_{σ(j)}` is the codeword of the upper-half code
/// with source `ũ_{g^{-1}(i)} = u_i`. The gather is `apply_column` of the
/// returned permutation. For `r = m-1` it is the identity.
pub fn codeword_permutation(spec: &CisSpec) -> Permutation {
    let m = spec.log2_n();
    let map = (0..spec.n)
        .map(|j| reverse_bits(spec.g(reverse_bits(j, m)), m))
        .collect();
    Permutation::new(map).expect("conjugate of a bijection")
}

/// Full identity of a code: length, information set and the index set the
/// decoder works on.
///
/// For a conventional code the two sets coincide. For a comb-shaped code the
/// decoder set is `g^{-1}(A)`, which always lies in the upper half.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeConfig {
    n: usize,
    cis: Option<CisSpec>,
    info: Vec<usize>,
    decoder_info: Vec<usize>,
}

impl CodeConfig {
    pub fn conventional(n: usize, mut info: Vec<usize>) -> Result<Self> {
        log2_len(n)?;
        info.sort_unstable();
        check_index_set(&info, n)?;
        Ok(CodeConfig {
            n,
            cis: None,
            decoder_info: info.clone(),
            info,
        })
    }

    /// A comb-shaping code with information set `info ⊆ Λ_r`.
    pub fn comb_shaped(spec: &CisSpec, mut info: Vec<usize>) -> Result<Self> {
        info.sort_unstable();
        check_index_set(&info, spec.n)?;
        if let Some(&bad) = info.iter().find(|&&i| !spec.contains(i)) {
            return Err(invalid!("information index {bad} is outside the CIS Λ_{}", spec.order));
        }
        let decoder_info: Vec<usize> = info.iter().map(|&i| spec.g_inv(i)).collect();
        Ok(CodeConfig {
            n: spec.n,
            cis: Some(*spec),
            info,
            decoder_info,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn cis(&self) -> Option<&CisSpec> {
        self.cis.as_ref()
    }

    /// Information indices `A`, ascending.
    pub fn info_indices(&self) -> &[usize] {
        &self.info
    }

    /// Decoder-side indices `g^{-1}(A)`, ascending and in the order of `A`.
    pub fn decoder_indices(&self) -> &[usize] {
        &self.decoder_info
    }

    /// Frozen mask over `0..N` with `true` for frozen positions of `set`.
    pub fn frozen_mask_of(n: usize, set: &[usize]) -> Vec<bool> {
        let mut frozen = vec![true; n];
        for &i in set {
            frozen[i] = false;
        }
        frozen
    }

    /// Re-checks every invariant; used before decoding a caller-built config.
    pub fn validate(&self) -> Result<()> {
        check_index_set(&self.info, self.n)?;
        if self.info.len() != self.decoder_info.len() {
            return Err(invalid!("information and decoder index sets differ in size"));
        }
        match &self.cis {
            None if self.info != self.decoder_info => {
                Err(invalid!("conventional code must decode on its own information set"))
            }
            None => Ok(()),
            Some(spec) => {
                if 2 * self.info.len() > self.n {
                    return Err(invalid!("rate exceeds 1/2 under CIS"));
                }
                for (&a, &d) in self.info.iter().zip(&self.decoder_info) {
                    if !spec.contains(a) || spec.g_inv(a) != d || d < self.n / 2 {
                        return Err(invalid!("inconsistent decoder index {d} for information index {a}"));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_index_set(set: &[usize], n: usize) -> Result<()> {
    if let Some(&bad) = set.iter().find(|&&i| i >= n) {
        return Err(invalid!("index {bad} out of range for N = {n}"));
    }
    if set.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid!("index set contains duplicates"));
    }
    Ok(())
}

/// Formats an index set as ascending comma-separated integers.
pub fn format_index_set(set: &[usize]) -> String {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses the output of [`format_index_set`].
pub fn parse_index_set(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| invalid!("bad index {t:?}: {e}")))
        .collect()
}
