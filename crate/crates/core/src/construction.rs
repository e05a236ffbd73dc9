//! Sub-channel reliability estimation and information-set selection.
//!
//! Reliabilities are symmetric capacities `I(Y, U_0^{i-1}; U_i)` of the
//! BPSK-AWGN sub-channels, estimated either by Gaussian approximation (GA) or
//! by genie-aided SC Monte Carlo. CIS-constrained capacities are read off the
//! same profile through `g^{-1}`, since sub-channel `i ∈ Λ_r` under the CIS
//! frozen pattern has the symmetric capacity of sub-channel `g^{-1}(i)`.

use std::f64::consts::{LN_2, PI};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bits::BitWord;
use crate::cis::{cis, CisSpec, CodeConfig};
use crate::decoder::{genie_llrs, softplus};
use crate::error::{invalid, Result};
use crate::polar::log2_len;
use crate::seed;

/// Monte-Carlo profiles built from fewer trials carry a warning flag.
pub const MIN_TRIALS: u64 = 10_000;

const TRIALS_PER_CHUNK: u64 = 1_000;

/// Result of the signal/interference separability check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkCheck {
    /// `N / (2 R_s / f_I)`.
    pub ratio: f64,
    pub feasible: bool,
    pub recommended_order: Option<u32>,
}

/// Checks that `N / (2 R_s / f_I)` is a positive integer and, when it is a
/// power of two not above `N/2`, recommends `r = log2` of it.
pub fn validate_params(symbol_rate: f64, fundamental: f64, n: usize) -> Result<LinkCheck> {
    if !(symbol_rate > 0.0) || !(fundamental > 0.0) || n == 0 {
        return Err(invalid!("symbol rate, interference fundamental and N must be positive"));
    }
    let ratio = n as f64 * fundamental / (2.0 * symbol_rate);
    let nearest = ratio.round();
    let feasible = nearest >= 1.0 && (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0);
    let recommended_order = if feasible {
        let q = nearest as usize;
        (q.is_power_of_two() && 2 * q <= n).then(|| q.trailing_zeros())
    } else {
        None
    };
    Ok(LinkCheck {
        ratio,
        feasible,
        recommended_order,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    GaussianApproximation,
    MonteCarloGenie { trials: u64, seed: u64 },
}

impl Method {
    /// Parses `"ga"` or `"mc"`; `trials` and `seed` apply to the latter.
    pub fn parse(name: &str, trials: u64, seed: u64) -> Result<Self> {
        match name {
            "ga" | "gaussian-approximation" => Ok(Method::GaussianApproximation),
            "mc" | "monte-carlo-genie" => Ok(Method::MonteCarloGenie { trials, seed }),
            other => Err(invalid!("unknown reliability method {other:?} (expected \"ga\" or \"mc\")")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::GaussianApproximation => "ga",
            Method::MonteCarloGenie { .. } => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityProfile {
    pub n: usize,
    pub snr_db: f64,
    /// Per-dimension noise variance of the symbol-level channel `y = ±1 + z`.
    pub noise_variance: f64,
    pub method: Method,
    /// Symmetric capacity of every sub-channel, in `[0, 1]`.
    pub capacity: Vec<f64>,
    /// Standard error of each capacity (Monte Carlo only).
    pub std_err: Option<Vec<f64>>,
    /// Set when a Monte-Carlo estimate used fewer than [`MIN_TRIALS`] trials.
    pub low_trials: bool,
}

/// Symbol-level per-dimension noise variance for an in-band SNR.
///
/// `band_factor` is `B / (φ R_s)` for a measurement band of width `B` that
/// holds a fraction `φ` of the signal power; `1` gives `σ² = 1 / (2·SNR)`.
pub fn symbol_noise_variance(snr_db: f64, band_factor: f64) -> f64 {
    1.0 / (2.0 * 10f64.powf(snr_db / 10.0) * band_factor)
}

pub fn estimate_symmetric_reliability(
    n: usize,
    snr_db: f64,
    noise_variance: f64,
    method: &Method,
) -> Result<ReliabilityProfile> {
    log2_len(n)?;
    if !(noise_variance > 0.0) {
        return Err(invalid!("noise variance must be positive"));
    }
    let (capacity, std_err, low_trials) = match *method {
        Method::GaussianApproximation => (ga_capacities(n, 2.0 / noise_variance), None, false),
        Method::MonteCarloGenie { trials, seed } => {
            if trials == 0 {
                return Err(invalid!("Monte-Carlo estimation needs at least one trial"));
            }
            let (c, se) = mc_capacities(n, noise_variance, trials, seed)?;
            (c, Some(se), trials < MIN_TRIALS)
        }
    };
    Ok(ReliabilityProfile {
        n,
        snr_db,
        noise_variance,
        method: method.clone(),
        capacity,
        std_err,
        low_trials,
    })
}

/// `1 - log2(1 + e^{-L})` for the LLR `L` of the transmitted bit.
#[inline]
pub fn capacity_sample(l: f64) -> f64 {
    1.0 - softplus(-l) / LN_2
}

fn mc_capacities(n: usize, sigma2: f64, trials: u64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let sigma = sigma2.sqrt();
    let chunks = trials.div_ceil(TRIALS_PER_CHUNK);
    let zero = BitWord::zeros(n);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng(&[seed, seed::stream::CONSTRUCTION, c]);
            let count = TRIALS_PER_CHUNK.min(trials - c * TRIALS_PER_CHUNK);
            let mut sum = vec![0.0; n];
            let mut sq = vec![0.0; n];
            let mut llrs = vec![0.0; n];
            for _ in 0..count {
                // All-zero codeword: the BPSK-AWGN sub-channels are symmetric.
                for l in llrs.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *l = 2.0 * (1.0 + sigma * z) / sigma2;
                }
                let genie = genie_llrs(&llrs, &zero).expect("valid length");
                for (i, &l) in genie.iter().enumerate() {
                    let c = capacity_sample(l);
                    sum[i] += c;
                    sq[i] += c * c;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for (s, q) in &partial {
        for i in 0..n {
            sum[i] += s[i];
            sq[i] += q[i];
        }
    }
    let t = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| (s / t).clamp(0.0, 1.0)).collect();
    let se = (0..n)
        .map(|i| {
            let var = ((sq[i] / t) - (sum[i] / t).powi(2)).max(0.0) * t / (t - 1.0).max(1.0);
            (var / t).sqrt()
        })
        .collect();
    Ok((mean, se))
}

/// `ln φ(μ)` for the Chung approximation of
/// `φ(μ) = 1 - E[tanh(L/2)]`, `L ~ N(μ, 2μ)`.
///
/// Near zero the fitted curve exceeds one, so it is capped by the expansion
/// `φ(μ) ≈ 1 - μ/2 + μ²/4`.
fn ln_phi(mu: f64) -> f64 {
    if mu <= 0.0 {
        0.0
    } else if mu < 1.0 {
        (-0.4527 * mu.powf(0.86) + 0.0218).min((1.0 - mu / 2.0 + mu * mu / 4.0).ln())
    } else if mu < 10.0 {
        -0.4527 * mu.powf(0.86) + 0.0218
    } else {
        0.5 * (PI / mu).ln() - mu / 4.0 + (1.0 - 10.0 / (7.0 * mu)).ln()
    }
}

/// Inverse of [`ln_phi`] by bisection on `μ`.
fn ln_phi_inv(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while ln_phi(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean of the check-node output for two inputs of mean `mu`.
fn ga_check(mu: f64) -> f64 {
    // φ_out = 1 - (1 - φ)^2 = φ (2 - φ)
    let lp = ln_phi(mu);
    ln_phi_inv(lp + (2.0 - lp.exp()).ln())
}

/// Capacity of a consistent Gaussian LLR `N(μ, 2μ)` by quadrature.
pub fn j_capacity(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let sd = (2.0 * mu).sqrt();
    let steps = 4000;
    let (a, b) = (mu - 12.0 * sd, mu + 12.0 * sd);
    let h = (b - a) / steps as f64;
    let mut acc = 0.0;
    for k in 0..=steps {
        let x = a + h * k as f64;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        let z = (x - mu) / sd;
        acc += w * (-0.5 * z * z).exp() * softplus(-x);
    }
    let loss = acc * h / (sd * (2.0 * PI).sqrt()) / LN_2;
    (1.0 - loss).clamp(0.0, 1.0)
}

/// GA capacities in natural index order for channel LLR mean `mu`.
fn ga_capacities(n: usize, mu: f64) -> Vec<f64> {
    let mut means = Vec::with_capacity(n);
    ga_means(n, mu, &mut means);
    means.into_iter().map(j_capacity).collect()
}

fn ga_means(n: usize, mu: f64, out: &mut Vec<f64>) {
    if n == 1 {
        out.push(mu);
        return;
    }
    ga_means(n / 2, ga_check(mu), out);
    ga_means(n / 2, 2.0 * mu, out);
}

/// The `k` indices of `restrict` with the largest capacity, ascending.
/// Equal capacities are resolved in favour of the smaller index.
pub fn select_symmetric(profile: &ReliabilityProfile, k: usize, restrict: &[usize]) -> Result<Vec<usize>> {
    if k > restrict.len() {
        return Err(invalid!("cannot select {k} indices from a set of {}", restrict.len()));
    }
    if let Some(&bad) = restrict.iter().find(|&&i| i >= profile.n) {
        return Err(invalid!("index {bad} out of range for N = {}", profile.n));
    }
    let mut order = restrict.to_vec();
    order.sort_by(|&a, &b| {
        profile.capacity[b]
            .total_cmp(&profile.capacity[a])
            .then(a.cmp(&b))
    });
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Conventional code: the `k` most reliable indices over all of `0..N`.
pub fn select_conventional(profile: &ReliabilityProfile, k: usize) -> Result<CodeConfig> {
    let all: Vec<usize> = (0..profile.n).collect();
    CodeConfig::conventional(profile.n, select_symmetric(profile, k, &all)?)
}

/// CCD construction: `A = g(ψ_K(upper half))`.
pub fn select_cis_constrained(profile: &ReliabilityProfile, k: usize, spec: &CisSpec) -> Result<CodeConfig> {
    check_profile(profile, spec)?;
    if 2 * k > spec.n() {
        return Err(invalid!("rate exceeds 1/2 under CIS (K = {k}, N = {})", spec.n()));
    }
    let upper: Vec<usize> = (spec.n() / 2..spec.n()).collect();
    let dec = select_symmetric(profile, k, &upper)?;
    CodeConfig::comb_shaped(spec, dec.iter().map(|&j| spec.g(j)).collect())
}

/// Naive comb-shaping construction: the `k` indices of `Λ_r` with the
/// largest raw symmetric capacity.
pub fn select_symmetric_in_cis(profile: &ReliabilityProfile, k: usize, spec: &CisSpec) -> Result<CodeConfig> {
    check_profile(profile, spec)?;
    if 2 * k > spec.n() {
        return Err(invalid!("rate exceeds 1/2 under CIS (K = {k}, N = {})", spec.n()));
    }
    CodeConfig::comb_shaped(spec, select_symmetric(profile, k, &cis(spec))?)
}

fn check_profile(profile: &ReliabilityProfile, spec: &CisSpec) -> Result<()> {
    if profile.n != spec.n() {
        return Err(invalid!("profile length {} does not match N = {}", profile.n, spec.n()));
    }
    Ok(())
}

/// Minimum CIS-constrained sub-channel capacity of `config`.
///
/// For a comb-shaping code this is `min_{i ∈ A} capacity[g^{-1}(i)]`; for a
/// conventional code it is the plain minimum over `A`.
pub fn mcsc(config: &CodeConfig, profile: &ReliabilityProfile) -> Result<f64> {
    if config.n() != profile.n {
        return Err(invalid!("config length {} does not match profile length {}", config.n(), profile.n));
    }
    let idx: Vec<usize> = match config.cis() {
        Some(spec) => config.info_indices().iter().map(|&i| spec.g_inv(i)).collect(),
        None => config.info_indices().to_vec(),
    };
    Ok(idx
        .iter()
        .map(|&i| profile.capacity[i])
        .fold(f64::INFINITY, f64::min))
}

/// Minimum CIS-constrained capacity of an information set `A ⊆ Λ_r`.
pub fn mcsc_of_set(info: &[usize], spec: &CisSpec, profile: &ReliabilityProfile) -> Result<f64> {
    mcsc(&CodeConfig::comb_shaped(spec, info.to_vec())?, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat(n: usize, cap: Vec<f64>) -> ReliabilityProfile {
        ReliabilityProfile {
            n,
            snr_db: 0.0,
            noise_variance: 1.0,
            method: Method::GaussianApproximation,
            capacity: cap,
            std_err: None,
            low_trials: false,
        }
    }

    #[test]
    fn validate_params_examples() {
        let c = validate_params(800.0, 50.0, 256).unwrap();
        assert!(c.feasible);
        assert_eq!(c.recommended_order, Some(3));
        assert_eq!(validate_params(800.0, 50.0, 1024).unwrap().recommended_order, Some(5));
        let c = validate_params(25600.0, 50.0, 1024).unwrap();
        assert!(c.feasible);
        assert_eq!(c.recommended_order, Some(0));
        let c = validate_params(800.0, 30.0, 256).unwrap();
        assert!(!c.feasible);
        let c = validate_params(800.0, 75.0, 256).unwrap();
        assert!(c.feasible);
        assert_eq!(c.recommended_order, None);
        assert!(validate_params(-1.0, 50.0, 256).is_err());
        assert!(validate_params(800.0, 0.0, 256).is_err());
    }

    #[test]
    fn method_parse() {
        assert_eq!(Method::parse("ga", 0, 0).unwrap(), Method::GaussianApproximation);
        assert!(matches!(Method::parse("mc", 5, 1).unwrap(), Method::MonteCarloGenie { trials: 5, seed: 1 }));
        assert!(Method::parse("density", 0, 0).is_err());
    }

    #[test]
    fn noiseless_and_useless_limits() {
        for method in [Method::GaussianApproximation, Method::MonteCarloGenie { trials: 20_000, seed: 1 }] {
            let hi = estimate_symmetric_reliability(2, 40.0, symbol_noise_variance(40.0, 1.0), &method).unwrap();
            assert!(hi.capacity.iter().all(|&c| (c - 1.0).abs() < 0.01), "{:?}", hi.capacity);
            let lo = estimate_symmetric_reliability(2, -40.0, symbol_noise_variance(-40.0, 1.0), &method).unwrap();
            assert!(lo.capacity.iter().all(|&c| c.abs() < 0.01), "{:?}", lo.capacity);
        }
    }

    #[test]
    fn low_trial_warning() {
        let p = estimate_symmetric_reliability(4, 0.0, 0.5, &Method::MonteCarloGenie { trials: 100, seed: 0 }).unwrap();
        assert!(p.low_trials);
        let p = estimate_symmetric_reliability(4, 0.0, 0.5, &Method::MonteCarloGenie { trials: 10_000, seed: 0 }).unwrap();
        assert!(!p.low_trials);
    }

    #[test]
    fn partial_order_and_chain_rule() {
        let sigma2 = 0.8;
        let p = estimate_symmetric_reliability(4, 0.0, sigma2, &Method::MonteCarloGenie { trials: 40_000, seed: 7 })
            .unwrap();
        let c = &p.capacity;
        assert!(c[0] <= c[1] && c[1] <= c[3] && c[0] <= c[2] && c[2] <= c[3], "{c:?}");
        // Chain rule: the sub-channel capacities sum to N·I(W).
        let total: f64 = c.iter().sum();
        let w = j_capacity(2.0 / sigma2);
        assert!((total - 4.0 * w).abs() < 0.02, "{total} vs {}", 4.0 * w);
    }

    #[test]
    fn ga_tracks_monte_carlo() {
        let sigma2 = symbol_noise_variance(-2.0, 1.0);
        let ga = estimate_symmetric_reliability(64, -2.0, sigma2, &Method::GaussianApproximation).unwrap();
        let mc = estimate_symmetric_reliability(64, -2.0, sigma2, &Method::MonteCarloGenie { trials: 20_000, seed: 3 })
            .unwrap();
        let max_gap = ga
            .capacity
            .iter()
            .zip(&mc.capacity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_gap < 0.06, "max GA/MC gap {max_gap}");
    }

    #[test]
    fn j_capacity_reference_points() {
        assert_eq!(j_capacity(0.0), 0.0);
        // BI-AWGN capacity at σ² = 1 (μ = 2) is about 0.486.
        assert!((j_capacity(2.0) - 0.4859).abs() < 2e-3, "{}", j_capacity(2.0));
        assert!(j_capacity(200.0) > 0.9999);
    }

    #[test]
    fn select_symmetric_rules() {
        let p = flat(8, vec![0.1, 0.5, 0.5, 0.9, 0.2, 0.7, 0.8, 1.0]);
        assert_eq!(select_symmetric(&p, 2, &[1, 2, 4]).unwrap(), vec![1, 2]);
        assert_eq!(select_symmetric(&p, 1, &[2, 1]).unwrap(), vec![1]);
        assert_eq!(select_symmetric(&p, 3, &[1, 2, 4]).unwrap(), vec![1, 2, 4]);
        assert_eq!(select_symmetric(&p, 1, &[4, 5, 6, 7]).unwrap(), vec![7]);
        assert!(select_symmetric(&p, 4, &[1, 2, 4]).is_err());
    }

    #[test]
    fn cis_constrained_selection() {
        let sigma2 = symbol_noise_variance(0.0, 1.0);
        let p = estimate_symmetric_reliability(16, 0.0, sigma2, &Method::GaussianApproximation).unwrap();
        let spec = CisSpec::new(16, 3).unwrap();
        let c = select_cis_constrained(&p, 4, &spec).unwrap();
        assert_eq!(c.info_indices(), c.decoder_indices());
        let spec = CisSpec::new(16, 1).unwrap();
        let c = select_cis_constrained(&p, 5, &spec).unwrap();
        assert!(c.info_indices().iter().all(|&i| spec.contains(i)));
        assert!(select_cis_constrained(&p, 9, &spec).is_err());
        let one = select_cis_constrained(&p, 1, &spec).unwrap();
        assert_eq!(one.info_indices(), &[15]);
        assert_eq!(mcsc(&one, &p).unwrap(), p.capacity[15]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cis_criterion_dominates_symmetric(m in 3u32..=8, r_frac in 0.0f64..1.0, k_frac in 0.0f64..=1.0, snr in -4.0f64..4.0) {
            let n = 1usize << m;
            let r = ((r_frac * m as f64) as u32).min(m - 1);
            let spec = CisSpec::new(n, r).unwrap();
            let k = 1 + ((k_frac * (n / 2 - 1) as f64) as usize);
            let p = estimate_symmetric_reliability(n, snr, symbol_noise_variance(snr, 1.0), &Method::GaussianApproximation).unwrap();
            let ccd = select_cis_constrained(&p, k, &spec).unwrap();
            let naive = select_symmetric_in_cis(&p, k, &spec).unwrap();
            prop_assert!(mcsc(&ccd, &p).unwrap() >= mcsc(&naive, &p).unwrap());
            prop_assert_eq!(ccd.clone(), select_cis_constrained(&p, k, &spec).unwrap());
            prop_assert!(p.capacity.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}
