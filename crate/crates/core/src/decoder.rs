//! Successive-cancellation (SC) and list (SCL) decoding in the LLR domain,
//! plus the CCD wrapper for comb-shaping codes.
//!
//! LLRs are `ln P(y|0) / P(y|1)`. Because `G_N = F^{⊗m} B_N`, the channel LLRs
//! are first bit-reversed and the tree is then walked in natural order. The
//! check-node update is the exact soft XOR and the path metric is the
//! accumulated `ln(1 + e^{-(1-2u)L})`, so with an unpruned list the metric of
//! a path is `-ln P(y | u)` up to a constant.

use num_complex::Complex64;

use crate::bits::BitWord;
use crate::cis::{codeword_permutation, CodeConfig};
use crate::error::{invalid, Result};
use crate::polar::{log2_len, reverse_bits};

/// Channel LLRs are clamped to `±LLR_MAX` before decoding.
pub const LLR_MAX: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    /// Estimated information bits in ascending index order.
    pub info_bits: BitWord,
    /// Estimated source word `û`, zero at frozen indices.
    pub source_estimate: BitWord,
    /// Accumulated path metric (smaller is more likely).
    pub path_metric: f64,
}

/// `2·Re(y_n)/σ²`, clamped to `±LLR_MAX`, for BPSK `0 → +1, 1 → -1`.
pub fn channel_llr(y: &[Complex64], noise_variance: f64) -> Result<Vec<f64>> {
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(invalid!("noise variance must be positive, got {noise_variance}"));
    }
    Ok(y.iter()
        .map(|s| clamp_llr(2.0 * s.re / noise_variance))
        .collect())
}

#[inline]
pub fn clamp_llr(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-LLR_MAX, LLR_MAX)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Check-node update `2 atanh(tanh(a/2) tanh(b/2))`.
#[inline]
pub fn f_llr(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    let s = if (a < 0.0) != (b < 0.0) { -m } else { m };
    s + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

/// Variable-node update given the left partial sum `beta`.
#[inline]
pub fn g_llr(a: f64, b: f64, beta: u8) -> f64 {
    if beta == 0 {
        b + a
    } else {
        b - a
    }
}

/// Per-path decoder state. Level `s` of each array lives at `[2^s, 2^{s+1})`.
#[derive(Clone)]
struct PathState {
    alpha: Vec<f64>,
    left: Vec<u8>,
    right: Vec<u8>,
    u: Vec<u8>,
    metric: f64,
}

impl PathState {
    fn new(n: usize) -> Self {
        PathState {
            alpha: vec![0.0; n],
            left: vec![0; n],
            right: vec![0; n],
            u: vec![0; n],
            metric: 0.0,
        }
    }

    fn copy_from(&mut self, other: &PathState, upto: usize) {
        self.alpha.copy_from_slice(&other.alpha);
        self.left.copy_from_slice(&other.left);
        self.right.copy_from_slice(&other.right);
        self.u[..upto].copy_from_slice(&other.u[..upto]);
        self.metric = other.metric;
    }

    /// Computes the LLR of leaf `i` given the committed prefix.
    fn leaf_llr(&mut self, chan: &[f64], i: usize, m: u32) -> f64 {
        let top = if i == 0 {
            m as usize
        } else {
            let t = i.trailing_zeros() as usize;
            let h = 1usize << t;
            let (lo, hi) = self.alpha.split_at_mut(2 * h);
            let src = if t + 1 == m as usize { chan } else { &hi[..2 * h] };
            let dst = &mut lo[h..];
            let beta = &self.left[h..2 * h];
            for k in 0..h {
                dst[k] = g_llr(src[k], src[k + h], beta[k]);
            }
            t
        };
        for s in (0..top).rev() {
            let h = 1usize << s;
            let (lo, hi) = self.alpha.split_at_mut(2 * h);
            let src = if s + 1 == m as usize { chan } else { &hi[..2 * h] };
            let dst = &mut lo[h..];
            for k in 0..h {
                dst[k] = f_llr(src[k], src[k + h]);
            }
        }
        self.alpha[1]
    }

    /// Records `u_i` and propagates partial sums up the tree.
    fn commit(&mut self, i: usize, bit: u8, m: u32) {
        self.u[i] = bit;
        if i & 1 == 0 {
            self.left[1] = bit;
            return;
        }
        self.right[1] = bit;
        let mut s = 0usize;
        while (i >> s) & 1 == 1 && s + 1 < m as usize {
            let h = 1usize << s;
            let into_left = (i >> (s + 1)) & 1 == 0;
            if into_left {
                let (lo, hi) = self.left.split_at_mut(2 * h);
                let l = &lo[h..];
                let r = &self.right[h..2 * h];
                for k in 0..h {
                    hi[k] = l[k] ^ r[k];
                    hi[k + h] = r[k];
                }
            } else {
                let (lo, hi) = self.right.split_at_mut(2 * h);
                let l = &self.left[h..2 * h];
                let r = &lo[h..];
                for k in 0..h {
                    hi[k] = l[k] ^ r[k];
                    hi[k + h] = r[k];
                }
            }
            s += 1;
        }
    }
}

fn check_inputs(llrs: &[f64], frozen: &[bool]) -> Result<u32> {
    let m = log2_len(llrs.len())?;
    if frozen.len() != llrs.len() {
        return Err(invalid!(
            "frozen mask has length {}, expected {}",
            frozen.len(),
            llrs.len()
        ));
    }
    Ok(m)
}

fn bit_reversed_channel(llrs: &[f64], m: u32) -> Vec<f64> {
    (0..llrs.len())
        .map(|k| clamp_llr(llrs[reverse_bits(k, m)]))
        .collect()
}

fn finish(u: &[u8], frozen: &[bool], metric: f64) -> DecodeResult {
    let source_estimate = BitWord::from_bits(u).expect("decoder bits are binary");
    let info: Vec<u8> = u
        .iter()
        .zip(frozen)
        .filter(|(_, &f)| !f)
        .map(|(&b, _)| b)
        .collect();
    DecodeResult {
        info_bits: BitWord::from_bits(&info).expect("decoder bits are binary"),
        source_estimate,
        path_metric: metric,
    }
}

/// SC decoding. Frozen positions (`frozen[i] == true`) are decoded as 0 and
/// information positions take `û_i = 0` iff their LLR is `>= 0`.
pub fn sc_decode(llrs: &[f64], frozen: &[bool]) -> Result<DecodeResult> {
    let m = check_inputs(llrs, frozen)?;
    let n = llrs.len();
    let chan = bit_reversed_channel(llrs, m);
    let mut path = PathState::new(n);
    for i in 0..n {
        let l = path.leaf_llr(&chan, i, m);
        let bit = if frozen[i] { 0 } else { u8::from(l < 0.0) };
        path.metric += softplus(if bit == 0 { -l } else { l });
        path.commit(i, bit, m);
    }
    Ok(finish(&path.u, frozen, path.metric))
}

/// Genie-aided SC: the LLR of every sub-channel `i` given the true prefix
/// `u_0^{i-1}`.
pub fn genie_llrs(llrs: &[f64], u: &BitWord) -> Result<Vec<f64>> {
    let m = log2_len(llrs.len())?;
    if u.len() != llrs.len() {
        return Err(invalid!("source word length {} does not match {}", u.len(), llrs.len()));
    }
    let chan = bit_reversed_channel(llrs, m);
    let mut path = PathState::new(llrs.len());
    let mut out = Vec::with_capacity(llrs.len());
    for i in 0..llrs.len() {
        out.push(path.leaf_llr(&chan, i, m));
        path.commit(i, u.get(i), m);
    }
    Ok(out)
}

/// SCL decoding with list size `list_size`. See [`ListDecoder`].
pub fn scl_decode(llrs: &[f64], frozen: &[bool], list_size: usize) -> Result<DecodeResult> {
    ListDecoder::new(llrs.len(), list_size)?.decode(llrs, frozen)
}

/// Reusable SCL decoder for a fixed length and list size.
///
/// Survivors are the `L` candidates with the smallest metric; equal metrics
/// are ordered by the lexicographically smaller bit sequence. No CRC is used
/// and the best-metric path is returned.
pub struct ListDecoder {
    n: usize,
    m: u32,
    list_size: usize,
    paths: Vec<PathState>,
    active: Vec<usize>,
    spare: Vec<usize>,
    cand: Vec<(f64, usize, u8)>,
}

impl ListDecoder {
    pub fn new(n: usize, list_size: usize) -> Result<Self> {
        let m = log2_len(n)?;
        if list_size == 0 {
            return Err(invalid!("list size must be at least 1"));
        }
        Ok(ListDecoder {
            n,
            m,
            list_size,
            paths: (0..list_size).map(|_| PathState::new(n)).collect(),
            active: Vec::with_capacity(list_size),
            spare: Vec::with_capacity(list_size),
            cand: Vec::with_capacity(2 * list_size),
        })
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn decode(&mut self, llrs: &[f64], frozen: &[bool]) -> Result<DecodeResult> {
        let m = check_inputs(llrs, frozen)?;
        if llrs.len() != self.n {
            return Err(invalid!("decoder built for N = {}, got {}", self.n, llrs.len()));
        }
        let chan = bit_reversed_channel(llrs, m);
        self.active.clear();
        self.spare.clear();
        self.active.push(0);
        self.spare.extend((1..self.list_size).rev());
        self.paths[0].metric = 0.0;

        for i in 0..self.n {
            if frozen[i] {
                for &p in &self.active {
                    let path = &mut self.paths[p];
                    let l = path.leaf_llr(&chan, i, self.m);
                    path.metric += softplus(-l);
                    path.commit(i, 0, self.m);
                }
            } else {
                self.branch(&chan, i);
            }
        }

        let best = *self
            .active
            .iter()
            .min_by(|&&a, &&b| self.order(a, b, self.n))
            .expect("at least one path survives");
        let path = &self.paths[best];
        Ok(finish(&path.u, frozen, path.metric))
    }

    /// Compares two paths by metric, then by their first `len` bits.
    fn order(&self, a: usize, b: usize, len: usize) -> std::cmp::Ordering {
        let (pa, pb) = (&self.paths[a], &self.paths[b]);
        pa.metric
            .total_cmp(&pb.metric)
            .then_with(|| pa.u[..len].cmp(&pb.u[..len]))
    }

    fn branch(&mut self, chan: &[f64], i: usize) {
        let m = self.m;
        self.cand.clear();
        for &p in &self.active {
            let path = &mut self.paths[p];
            let l = path.leaf_llr(chan, i, m);
            self.cand.push((path.metric + softplus(-l), p, 0));
            self.cand.push((path.metric + softplus(l), p, 1));
        }
        if self.cand.len() > self.list_size {
            let paths = &self.paths;
            self.cand.sort_by(|x, y| {
                x.0.total_cmp(&y.0)
                    .then_with(|| paths[x.1].u[..i].cmp(&paths[y.1].u[..i]))
                    .then_with(|| x.2.cmp(&y.2))
            });
            debug_assert!(self.cand[..self.list_size]
                .iter()
                .all(|c| c.0 <= self.cand[self.list_size].0));
            self.cand.truncate(self.list_size);
        }

        // Survivor count per parent: bit 0 → child 0 kept, bit 1 → child 1 kept.
        let mut keep = vec![0u8; self.list_size];
        for &(_, p, b) in &self.cand {
            keep[p] |= 1 << b;
        }
        let mut next_active = Vec::with_capacity(self.list_size);
        for &p in &self.active {
            if keep[p] == 0 {
                self.spare.push(p);
            }
        }
        for idx in 0..self.active.len() {
            let p = self.active[idx];
            let metric = self.paths[p].metric;
            let l_zero = self.cand.iter().find(|c| c.1 == p && c.2 == 0).map(|c| c.0);
            let l_one = self.cand.iter().find(|c| c.1 == p && c.2 == 1).map(|c| c.0);
            match (l_zero, l_one) {
                (None, None) => {}
                (Some(pm), None) | (None, Some(pm)) => {
                    let bit = u8::from(l_one.is_some());
                    debug_assert!(pm >= metric);
                    let path = &mut self.paths[p];
                    path.metric = pm;
                    path.commit(i, bit, m);
                    next_active.push(p);
                }
                (Some(pm0), Some(pm1)) => {
                    let q = self.spare.pop().expect("free slot for a forked path");
                    let (src, dst) = pair_mut(&mut self.paths, p, q);
                    dst.copy_from(src, i);
                    src.metric = pm0;
                    src.commit(i, 0, m);
                    dst.metric = pm1;
                    dst.commit(i, 1, m);
                    next_active.push(p);
                    next_active.push(q);
                }
            }
        }
        self.active = next_active;
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// CCD decoding of a comb-shaping code: gathers `ỹ_j = y_{σ(j)}` with the
/// permutation of [`codeword_permutation`], computes LLRs and runs SCL on the
/// decoder index set `g^{-1}(A)`.
///
/// The returned information bits follow the order of `A`. The source estimate
/// is mapped back to the transmitter indexing, so it is supported on `A`. A
/// conventional config decodes directly on its information set.
pub fn ccd_decode(
    y: &[Complex64],
    config: &CodeConfig,
    noise_variance: f64,
    list_size: usize,
) -> Result<DecodeResult> {
    let mut dec = ListDecoder::new(config.n(), list_size)?;
    ccd_decode_with(&mut dec, y, config, noise_variance)
}

/// [`ccd_decode`] reusing an existing list decoder.
pub fn ccd_decode_with(
    dec: &mut ListDecoder,
    y: &[Complex64],
    config: &CodeConfig,
    noise_variance: f64,
) -> Result<DecodeResult> {
    config.validate()?;
    if y.len() != config.n() {
        return Err(invalid!("expected {} symbols, got {}", config.n(), y.len()));
    }
    let frozen = CodeConfig::frozen_mask_of(config.n(), config.decoder_indices());
    let Some(spec) = config.cis() else {
        let llrs = channel_llr(y, noise_variance)?;
        return dec.decode(&llrs, &frozen);
    };
    let yt = codeword_permutation(spec).apply_column(y);
    let llrs = channel_llr(&yt, noise_variance)?;
    let res = dec.decode(&llrs, &frozen)?;
    let mut source = BitWord::zeros(config.n());
    for &a in config.info_indices() {
        if res.source_estimate.get(spec.g_inv(a)) == 1 {
            source.set(a, 1);
        }
    }
    Ok(DecodeResult {
        info_bits: res.info_bits,
        source_estimate: source,
        path_metric: res.path_metric,
    })
}

/// Exhaustive ML decoding over all `2^K` codewords of the information set
/// given by the non-frozen positions. Exponential; small instances only.
pub fn ml_decode(llrs: &[f64], frozen: &[bool]) -> Result<DecodeResult> {
    check_inputs(llrs, frozen)?;
    let info: Vec<usize> = (0..llrs.len()).filter(|&i| !frozen[i]).collect();
    if info.len() > 20 {
        return Err(invalid!("ML enumeration limited to K <= 20, got {}", info.len()));
    }
    let chan: Vec<f64> = llrs.iter().map(|&l| clamp_llr(l)).collect();
    let mut best: Option<(f64, BitWord)> = None;
    for word in 0..(1u64 << info.len()) {
        let mut u = BitWord::zeros(llrs.len());
        for (k, &i) in info.iter().enumerate() {
            if (word >> k) & 1 == 1 {
                u.set(i, 1);
            }
        }
        let x = crate::polar::encode(&u)?;
        // -ln P(y|x) up to a constant shared by all codewords.
        let cost: f64 = chan
            .iter()
            .enumerate()
            .map(|(j, &l)| softplus(if x.get(j) == 0 { -l } else { l }))
            .sum();
        let better = match &best {
            None => true,
            Some((c, bu)) => cost < *c || (cost == *c && u.to_vec() < bu.to_vec()),
        };
        if better {
            best = Some((cost, u));
        }
    }
    let (cost, u) = best.expect("at least one codeword");
    Ok(finish(&u.to_vec(), frozen, cost))
}
