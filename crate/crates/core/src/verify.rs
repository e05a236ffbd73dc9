//! Brute-force oracles for small instances.
//!
//! Everything here enumerates codewords or matrices explicitly and is meant
//! for `N <= 16`-ish checks in tests and the self-test.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bits::BitWord;
use crate::cis::{cis, codeword_permutation, g_permutation, is_locally_periodic, CisSpec, Direction};
use crate::construction::capacity_sample;
use crate::error::{invalid, Result};
use crate::perm::Permutation;
use crate::polar::{encode, generator_entry, generator_row, log2_len, reverse_bits};
use crate::seed;

/// The dense generator matrix `G_N`.
pub fn generator_matrix(n: usize) -> Result<Vec<Vec<u8>>> {
    let m = log2_len(n)?;
    (0..n)
        .map(|i| (0..n).map(|j| generator_entry(i, j, m)).collect())
        .collect()
}

/// `true` iff `Π G_N Π^{-1} = G_N` for the row permutation matrix `Π` of
/// `forward`.
pub fn conjugation_holds(forward: &Permutation) -> Result<bool> {
    let g = generator_matrix(forward.len())?;
    let conj = forward.inverse().permute_columns(&forward.permute_rows(&g));
    Ok(conj == g)
}

/// Checks `Π_g G_N Π_{g^{-1}} = G_N` for `g_{N,r}`.
pub fn lemma_conjugation(spec: &CisSpec) -> Result<bool> {
    let fwd = g_permutation(spec, Direction::Forward);
    let inv = g_permutation(spec, Direction::Inverse);
    let g = generator_matrix(spec.n())?;
    Ok(inv.permute_columns(&fwd.permute_rows(&g)) == g)
}

/// Checks `G_N(g(i), σ(j)) = G_N(i, j)` for all `i, j`, with `σ` from
/// [`codeword_permutation`]; equivalently `Π_g G_N = G_N Π_σ`.
pub fn generator_intertwined(spec: &CisSpec) -> Result<bool> {
    let map: Vec<usize> = (0..spec.n()).map(|i| spec.g(i)).collect();
    let ok = intertwined_by(&map)?;
    debug_assert_eq!(
        codeword_permutation(spec).map(),
        (0..spec.n())
            .map(|j| reverse_bits(map[reverse_bits(j, spec.log2_n())], spec.log2_n()))
            .collect::<Vec<_>>()
            .as_slice()
    );
    Ok(ok)
}

/// [`generator_intertwined`] for an arbitrary index map `g` (not necessarily
/// `g_{N,r}`), with `σ = rev ∘ g ∘ rev`.
pub fn intertwined_by(g_map: &[usize]) -> Result<bool> {
    let n = g_map.len();
    let m = log2_len(n)?;
    let perm = Permutation::new(g_map.to_vec())?;
    let sigma: Vec<usize> = (0..n).map(|j| reverse_bits(perm.map()[reverse_bits(j, m)], m)).collect();
    let g = generator_matrix(n)?;
    Ok((0..n).all(|i| (0..n).all(|j| g[g_map[i]][sigma[j]] == g[i][j])))
}

/// Every generator row indexed in `Λ_r` is locally periodic with period
/// `2^{m-r-1}` and two repetitions.
pub fn comb_rows_periodic(spec: &CisSpec) -> Result<bool> {
    let m = spec.log2_n();
    for i in cis(spec) {
        let row = generator_row(i, m)?.to_vec();
        if !is_locally_periodic(&row, spec.local_period(), 2)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `g` and `g^{-1}` are mutually inverse, `g` maps the upper half onto `Λ_r`
/// and preserves order there.
pub fn g_bijection_holds(spec: &CisSpec) -> bool {
    let n = spec.n();
    let mut seen = vec![false; n];
    for i in 0..n {
        let j = spec.g(i);
        if j >= n || seen[j] || spec.g_inv(j) != i {
            return false;
        }
        seen[j] = true;
    }
    let image: Vec<usize> = (n / 2..n).map(|i| spec.g(i)).collect();
    image == cis(spec)
}

/// A memoryless binary-input channel with an explicit transition density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinaryChannel {
    /// Outputs `0.0` or `1.0`; crossover probability `p`.
    Bsc(f64),
    /// BPSK `0 → +1, 1 → -1` in real Gaussian noise of variance `σ²`.
    Awgn(f64),
}

impl BinaryChannel {
    pub fn density(&self, y: f64, x: u8) -> f64 {
        match *self {
            BinaryChannel::Bsc(p) => {
                if (y >= 0.5) == (x == 1) {
                    1.0 - p
                } else {
                    p
                }
            }
            BinaryChannel::Awgn(s2) => {
                let d = y - (1.0 - 2.0 * x as f64);
                (-d * d / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: u8, rng: &mut R) -> f64 {
        match *self {
            BinaryChannel::Bsc(p) => {
                let flip = rng.random::<f64>() < p;
                f64::from(x ^ u8::from(flip))
            }
            BinaryChannel::Awgn(s2) => {
                let z: f64 = StandardNormal.sample(rng);
                1.0 - 2.0 * x as f64 + s2.sqrt() * z
            }
        }
    }

    /// `ln W(y|0) / W(y|1)`.
    pub fn llr(&self, y: f64) -> f64 {
        (self.density(y, 0) / self.density(y, 1)).ln()
    }

    fn word_density(&self, y: &[f64], u: &BitWord) -> f64 {
        let x = encode(u).expect("power-of-two length");
        y.iter()
            .enumerate()
            .map(|(j, &v)| self.density(v, x.get(j)))
            .product()
    }
}

/// `W_N^{(i)}(y, u_0^{i-1} | u_i) = 2^{-(N-1)} Σ_{u_{i+1}^{N-1}} W_N(y | uG)`.
pub fn w_sym(channel: &BinaryChannel, y: &[f64], prefix: &[u8], ui: u8) -> Result<f64> {
    let n = y.len();
    log2_len(n)?;
    let i = prefix.len();
    if i >= n {
        return Err(invalid!("prefix of length {i} leaves no bit to decide for N = {n}"));
    }
    let free = n - i - 1;
    let mut total = 0.0;
    for rest in 0..(1u64 << free) {
        let mut u = BitWord::zeros(n);
        for (k, &b) in prefix.iter().enumerate() {
            u.set(k, b);
        }
        u.set(i, ui);
        for k in 0..free {
            u.set(i + 1 + k, ((rest >> k) & 1) as u8);
        }
        total += channel.word_density(y, &u);
    }
    Ok(total / 2f64.powi(n as i32 - 1))
}

/// CIS-constrained transition probability of sub-channel `i ∈ Λ_r`: bits
/// outside `Λ_r` are zero, `prefix` holds the `Λ_r` bits below `i` in
/// ascending order, and the later `Λ_r` bits are marginalized with
/// normalization `2^{-(N/2-1)}`.
pub fn w_cis(channel: &BinaryChannel, spec: &CisSpec, y: &[f64], i: usize, prefix: &[u8], ui: u8) -> Result<f64> {
    let n = spec.n();
    if y.len() != n || !spec.contains(i) {
        return Err(invalid!("index {i} not in the CIS or observation length mismatch"));
    }
    let lam = cis(spec);
    let pos = lam.iter().position(|&v| v == i).expect("i in CIS");
    if prefix.len() != pos {
        return Err(invalid!("expected a prefix of {pos} CIS bits, got {}", prefix.len()));
    }
    let later = &lam[pos + 1..];
    let mut total = 0.0;
    for rest in 0..(1u64 << later.len()) {
        let mut u = BitWord::zeros(n);
        for (&idx, &b) in lam.iter().zip(prefix) {
            u.set(idx, b);
        }
        u.set(i, ui);
        for (k, &idx) in later.iter().enumerate() {
            u.set(idx, ((rest >> k) & 1) as u8);
        }
        total += channel.word_density(y, &u);
    }
    Ok(total / 2f64.powi((n / 2) as i32 - 1))
}

/// Receiver-side reordering of the observation before symmetric decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reordering {
    /// `ỹ = y Π_{g^{-1}}`, i.e. `ỹ_j = y_{g(j)}`.
    RowMap,
    /// `ỹ_j = y_{g^{-1}(j)}`.
    InverseMap,
    /// `ỹ_j = y_{σ(j)}` with `σ` from [`codeword_permutation`].
    Codeword,
}

impl Reordering {
    pub fn apply(&self, spec: &CisSpec, y: &[f64]) -> Vec<f64> {
        match self {
            Reordering::RowMap => g_permutation(spec, Direction::Inverse).apply_row(y),
            Reordering::InverseMap => g_permutation(spec, Direction::Inverse).apply_column(y),
            Reordering::Codeword => codeword_permutation(spec).apply_column(y),
        }
    }
}

/// Largest relative gap between `W_{r,N}^{(i)}` and
/// `2^{N/2} W_sym^{(g^{-1}(i))}` on the reordered observation, over all
/// `i ∈ Λ_r`, both values of `u_i`, and `points` random `(y, prefix)` draws.
pub fn equivalence_gap<R: Rng + ?Sized>(
    channel: &BinaryChannel,
    spec: &CisSpec,
    reordering: Reordering,
    points: usize,
    rng: &mut R,
) -> Result<f64> {
    let n = spec.n();
    let lam = cis(spec);
    let mut worst = 0.0f64;
    for _ in 0..points {
        // Observation from a random comb-shaping codeword.
        let mut u = BitWord::zeros(n);
        for &idx in &lam {
            u.set(idx, rng.random::<bool>() as u8);
        }
        let x = encode(&u)?;
        let y: Vec<f64> = (0..n).map(|j| channel.sample(x.get(j), rng)).collect();
        let yt = reordering.apply(spec, &y);
        for (pos, &i) in lam.iter().enumerate() {
            let prefix: Vec<u8> = (0..pos).map(|_| rng.random::<bool>() as u8).collect();
            let j = spec.g_inv(i);
            let mut sym_prefix = vec![0u8; n / 2];
            sym_prefix.extend_from_slice(&prefix);
            debug_assert_eq!(sym_prefix.len(), j);
            for ui in 0..2u8 {
                let a = w_cis(channel, spec, &y, i, &prefix, ui)?;
                let b = 2f64.powi((n / 2) as i32) * w_sym(channel, &yt, &sym_prefix, ui)?;
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(worst)
}

/// Monte-Carlo estimate with standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sq: f64, trials: u64) -> Self {
        let t = trials as f64;
        let mean = sum / t;
        let var = (sq / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
        Estimate {
            mean,
            std_err: (var / t).sqrt(),
        }
    }

    /// `|a - b| / sqrt(se_a² + se_b²)`.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let se = (self.std_err.powi(2) + other.std_err.powi(2)).sqrt();
        if se == 0.0 {
            if self.mean == other.mean { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - other.mean).abs() / se
        }
    }
}

/// CIS-constrained capacities `I_{r,N}^{(i)}` for every `i ∈ Λ_r` (ascending)
/// on BPSK-AWGN with noise variance `sigma2`, from the exact posterior over
/// all `2^{N/2}` comb-shaping codewords.
pub fn cis_capacities_mc(spec: &CisSpec, sigma2: f64, trials: u64, seed_value: u64) -> Result<Vec<Estimate>> {
    let n = spec.n();
    if n > 32 {
        return Err(invalid!("exhaustive CIS posterior limited to N <= 32"));
    }
    let lam = cis(spec);
    let k = lam.len();
    // All comb-shaping codewords as BPSK sign vectors, indexed by the CIS bits.
    let words: Vec<Vec<f64>> = (0..1u64 << k)
        .map(|w| {
            let mut u = BitWord::zeros(n);
            for (b, &idx) in lam.iter().enumerate() {
                u.set(idx, ((w >> b) & 1) as u8);
            }
            let x = encode(&u).expect("valid length");
            (0..n).map(|j| 1.0 - 2.0 * x.get(j) as f64).collect()
        })
        .collect();
    let channel = BinaryChannel::Awgn(sigma2);
    let mut rng = seed::rng(&[seed_value, seed::stream::CONSTRUCTION, spec.order() as u64]);
    let mut sum = vec![0.0; k];
    let mut sq = vec![0.0; k];
    let mut loglik = vec![0.0; words.len()];
    for _ in 0..trials {
        let w: u64 = rng.random::<u64>() & ((1u64 << k) - 1);
        let y: Vec<f64> = words[w as usize]
            .iter()
            .map(|&s| channel.sample(u8::from(s < 0.0), &mut rng))
            .collect();
        for (ll, x) in loglik.iter_mut().zip(&words) {
            *ll = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / sigma2;
        }
        let max = loglik.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for b in 0..k {
            // Words sharing the true bits below b, split on bit b.
            let mask_prefix = (1u64 << b) - 1;
            let mut p = [0.0f64; 2];
            for (c, &ll) in loglik.iter().enumerate() {
                if (c as u64 & mask_prefix) == (w & mask_prefix) {
                    p[((c as u64 >> b) & 1) as usize] += (ll - max).exp();
                }
            }
            let truth = ((w >> b) & 1) as usize;
            let l = (p[truth] / p[1 - truth]).ln();
            let c = capacity_sample(l);
            sum[b] += c;
            sq[b] += c * c;
        }
    }
    Ok((0..k).map(|b| Estimate::from_sums(sum[b], sq[b], trials)).collect())
}

/// Symmetric capacities `I_sym^{(i)}` for all `i` by genie-aided SC with
/// uniformly random source words.
pub fn sym_capacities_mc(n: usize, sigma2: f64, trials: u64, seed_value: u64) -> Result<Vec<Estimate>> {
    log2_len(n)?;
    let channel = BinaryChannel::Awgn(sigma2);
    let mut rng = seed::rng(&[seed_value, seed::stream::CONSTRUCTION, u64::MAX]);
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for _ in 0..trials {
        let u = BitWord::random(n, &mut rng);
        let x = encode(&u)?;
        let llrs: Vec<f64> = (0..n).map(|j| channel.llr(channel.sample(x.get(j), &mut rng))).collect();
        let genie = crate::decoder::genie_llrs(&llrs, &u)?;
        for i in 0..n {
            let l = if u.get(i) == 0 { genie[i] } else { -genie[i] };
            let c = capacity_sample(l);
            sum[i] += c;
            sq[i] += c * c;
        }
    }
    Ok((0..n).map(|i| Estimate::from_sums(sum[i], sq[i], trials)).collect())
}

/// Decision mismatches between list decoding and a reference decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderAgreement {
    pub frames: u64,
    /// SCL(`list_size`) versus exhaustive ML.
    pub ml_mismatches: u64,
    /// SCL(1) versus SC, compared bit-exactly including the path metric.
    pub sc_mismatches: u64,
}

/// Random noisy BPSK-AWGN frames of the code with information set `info`,
/// decoded by SCL(`list_size`), ML, SCL(1) and SC.
pub fn decoder_agreement(
    n: usize,
    info: &[usize],
    list_size: usize,
    sigma2: f64,
    frames: u64,
    seed_value: u64,
) -> Result<DecoderAgreement> {
    let config = crate::cis::CodeConfig::conventional(n, info.to_vec())?;
    let frozen = crate::cis::CodeConfig::frozen_mask_of(n, config.info_indices());
    let channel = BinaryChannel::Awgn(sigma2);
    let mut list = crate::decoder::ListDecoder::new(n, list_size)?;
    let mut single = crate::decoder::ListDecoder::new(n, 1)?;
    let mut rng = seed::rng(&[seed_value, seed::stream::NOISE]);
    let mut out = DecoderAgreement {
        frames,
        ml_mismatches: 0,
        sc_mismatches: 0,
    };
    for _ in 0..frames {
        let bits = BitWord::random(config.k(), &mut rng);
        let x = encode(&crate::polar::assemble_source(&bits, &config)?)?;
        let llrs: Vec<f64> = (0..n).map(|j| channel.llr(channel.sample(x.get(j), &mut rng))).collect();
        let scl = list.decode(&llrs, &frozen)?;
        let ml = crate::decoder::ml_decode(&llrs, &frozen)?;
        out.ml_mismatches += u64::from(scl.info_bits != ml.info_bits);
        let a = single.decode(&llrs, &frozen)?;
        let b = crate::decoder::sc_decode(&llrs, &frozen)?;
        out.sc_mismatches += u64::from(a.source_estimate != b.source_estimate || a.path_metric.to_bits() != b.path_metric.to_bits());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cis::CodeConfig;
    use crate::decoder::{ccd_decode_with, ListDecoder};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conjugation_small_and_negative_control() {
        for m in 2..=5 {
            for r in 0..m {
                let spec = CisSpec::new(1 << m, r).unwrap();
                assert!(generator_intertwined(&spec).unwrap());
                let fwd = g_permutation(&spec, Direction::Forward);
                assert_eq!(lemma_conjugation(&spec).unwrap(), conjugation_holds(&fwd).unwrap());
                // The plain conjugation only survives when σ coincides with g.
                if m == 2 || r == m - 1 {
                    assert!(lemma_conjugation(&spec).unwrap());
                }
            }
        }
        assert!(!lemma_conjugation(&CisSpec::new(8, 0).unwrap()).unwrap());
        // Swapping two images of g breaks both identities.
        let spec16 = CisSpec::new(16, 1).unwrap();
        let mut bad: Vec<usize> = (0..16).map(|i| spec16.g(i)).collect();
        assert!(intertwined_by(&bad).unwrap());
        bad.swap(8, 9);
        assert!(!intertwined_by(&bad).unwrap());
        let spec = CisSpec::new(16, 1).unwrap();
        let mut map = g_permutation(&spec, Direction::Forward).map().to_vec();
        map.swap(8, 9);
        assert!(!conjugation_holds(&Permutation::new(map).unwrap()).unwrap());
    }

    #[test]
    fn structural_checks_moderate_n() {
        for m in 1..=7 {
            for r in 0..m {
                let spec = CisSpec::new(1 << m, r).unwrap();
                assert!(comb_rows_periodic(&spec).unwrap());
                assert!(g_bijection_holds(&spec));
            }
        }
    }

    #[test]
    fn w_sym_sums_to_one_over_outputs_bsc() {
        // Σ_y Σ_prefix Σ_ui W(y, prefix | ui) / 2 = 1 for the BSC.
        let ch = BinaryChannel::Bsc(0.1);
        let n = 4;
        let mut total = 0.0;
        for yw in 0..16u32 {
            let y: Vec<f64> = (0..n).map(|j| ((yw >> j) & 1) as f64).collect();
            for pw in 0..4u32 {
                let prefix = vec![(pw & 1) as u8, ((pw >> 1) & 1) as u8];
                for ui in 0..2 {
                    total += 0.5 * w_sym(&ch, &y, &prefix, ui).unwrap();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theorem_equivalence_bsc_and_awgn() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for ch in [BinaryChannel::Bsc(0.1), BinaryChannel::Awgn(0.8)] {
            for r in 0..3 {
                let spec = CisSpec::new(8, r).unwrap();
                let gap = equivalence_gap(&ch, &spec, Reordering::Codeword, 5, &mut rng).unwrap();
                assert!(gap < 1e-9, "{ch:?} r={r}: {gap}");
            }
            let spec = CisSpec::new(8, 1).unwrap();
            let gap = equivalence_gap(&ch, &spec, Reordering::RowMap, 5, &mut rng).unwrap();
            assert!(gap > 1e-3, "{ch:?}: {gap}");
        }
    }

    #[test]
    fn ccd_sc_decisions_maximize_cis_transition_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = BinaryChannel::Bsc(0.1);
        let spec = CisSpec::new(8, 1).unwrap();
        let lam = cis(&spec);
        let cfg = CodeConfig::comb_shaped(&spec, lam.clone()).unwrap();
        let mut dec = ListDecoder::new(8, 1).unwrap();
        // BSC LLRs ±ln((1-p)/p) expressed as symbols for the AWGN LLR map.
        let mag = ch.llr(0.0);
        for _ in 0..200 {
            let y: Vec<f64> = (0..8).map(|_| rng.random::<bool>() as u8 as f64).collect();
            let sym: Vec<Complex64> = y.iter().map(|&v| Complex64::new(if v < 0.5 { mag } else { -mag } / 2.0, 0.0)).collect();
            let res = ccd_decode_with(&mut dec, &sym, &cfg, 1.0).unwrap();
            let mut prefix = Vec::new();
            for (pos, &i) in lam.iter().enumerate() {
                let w0 = w_cis(&ch, &spec, &y, i, &prefix, 0).unwrap();
                let w1 = w_cis(&ch, &spec, &y, i, &prefix, 1).unwrap();
                let got = res.info_bits.get(pos);
                if (w0 - w1).abs() > 1e-12 * w0.max(w1) {
                    assert_eq!(got, u8::from(w1 > w0));
                }
                prefix.push(got);
            }
        }
    }

    #[test]
    fn cis_capacity_matches_symmetric_small() {
        let sigma2 = 0.9;
        let spec = CisSpec::new(8, 0).unwrap();
        let cis_cap = cis_capacities_mc(&spec, sigma2, 20_000, 3).unwrap();
        let sym = sym_capacities_mc(8, sigma2, 20_000, 4).unwrap();
        for (b, &i) in cis(&spec).iter().enumerate() {
            let z = cis_cap[b].z_score(&sym[spec.g_inv(i)]);
            assert!(z < 4.0, "i={i}: {:?} vs {:?}", cis_cap[b], sym[spec.g_inv(i)]);
        }
    }
}
