//! AWGN with in-band SNR calibration, band-limited periodic interference with
//! in-band SIR calibration, and the frequency-domain comb filter.
//!
//! In-band powers are measured by integrating the periodogram of the whole
//! frame over the measurement band. Interference and the comb filter are both
//! defined on the frame's DFT grid.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::fft;
use crate::modem::BasebandSignal;
use crate::seed;

/// A frequency interval `[lo, hi]` in Hz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(invalid!("empty band [{lo}, {hi}]"));
        }
        Ok(Band { lo, hi })
    }

    /// `[-(1+β) R_s / 2, (1+β) R_s / 2]`.
    pub fn occupied(rolloff: f64, symbol_rate: f64) -> Self {
        let h = (1.0 + rolloff) * symbol_rate / 2.0;
        Band { lo: -h, hi: h }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn contains(&self, f: f64, eps: f64) -> bool {
        f >= self.lo - eps && f <= self.hi + eps
    }
}

/// How each interference tone band is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterferenceModel {
    /// Complex Gaussian noise shaped by a brick-wall mask per tone.
    Noise,
    /// One random-phase sinusoid at each tone center.
    Sinusoid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelProfile {
    pub snr_db: f64,
    /// `None` disables interference.
    pub sir_db: Option<f64>,
    /// Interference fundamental `f_I` (Hz).
    pub fundamental: f64,
    /// Tone bandwidth `B_I` (Hz).
    pub tone_bw: f64,
    /// Baseband position of the tone grid: tones sit at `offset + k·f_I`.
    pub offset: f64,
    pub model: InterferenceModel,
    pub seed: u64,
}

impl ChannelProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.fundamental > 0.0) || !(self.tone_bw > 0.0) {
            return Err(invalid!("interference fundamental and tone bandwidth must be positive"));
        }
        if self.tone_bw >= self.fundamental {
            return Err(invalid!(
                "tone bandwidth {} must be below the fundamental {} (tones would overlap)",
                self.tone_bw,
                self.fundamental
            ));
        }
        Ok(())
    }

    /// Tone centers `offset + k·f_I` inside `[-fs/2, fs/2]`, ascending.
    pub fn tone_centers(&self, fs: f64) -> Vec<f64> {
        periodic_grid(self.offset, self.fundamental, fs)
    }
}

/// Points `offset + k·step` inside `[-fs/2, fs/2]`, ascending.
pub fn periodic_grid(offset: f64, step: f64, fs: f64) -> Vec<f64> {
    let half = fs / 2.0;
    let eps = fft::grid_eps(fs);
    let k0 = ((-half - offset) / step).ceil() as i64 - 1;
    let k1 = ((half - offset) / step).floor() as i64 + 1;
    (k0..=k1)
        .map(|k| offset + k as f64 * step)
        .filter(|f| *f >= -half - eps && *f <= half + eps)
        .collect()
}

/// Periodogram power of `samples` inside `band`: `Σ_{f_k ∈ band} |X_k|² / L²`.
pub fn in_band_power(samples: &[Complex64], fs: f64, band: &Band) -> f64 {
    let len = samples.len();
    if len == 0 {
        return 0.0;
    }
    let mut buf = samples.to_vec();
    fft::forward(&mut buf);
    spectrum_power(&buf, fs, band)
}

fn spectrum_power(spec: &[Complex64], fs: f64, band: &Band) -> f64 {
    let len = spec.len();
    let eps = fft::grid_eps(fs);
    spec.iter()
        .enumerate()
        .filter(|(k, _)| band.contains(fft::bin_freq(*k, len, fs), eps))
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        / (len as f64 * len as f64)
}

/// Fraction of the DFT bins of a length-`len` frame that fall in `band`.
pub fn band_bin_fraction(len: usize, fs: f64, band: &Band) -> f64 {
    let eps = fft::grid_eps(fs);
    let count = (0..len)
        .filter(|&k| band.contains(fft::bin_freq(k, len, fs), eps))
        .count();
    count as f64 / len as f64
}

/// Circular complex Gaussian samples with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex64::new(a * s, b * s)
        })
        .collect()
}

/// Per-sample complex noise variance that gives `snr_db` in `band` for a
/// signal with in-band power `signal_power`.
pub fn noise_variance_for_snr(signal_power: f64, snr_db: f64, len: usize, fs: f64, band: &Band) -> Result<f64> {
    let frac = band_bin_fraction(len, fs, band);
    if frac == 0.0 {
        return Err(invalid!("band [{}, {}] contains no frequency bins", band.lo, band.hi));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(signal_power / 10f64.powf(snr_db / 10.0) / frac)
}

/// Adds circular white Gaussian noise so that the in-band SNR equals
/// `snr_db`. Returns the noisy signal and the per-sample complex noise
/// variance `σ_s²` used.
pub fn add_awgn<R: Rng + ?Sized>(
    signal: &BasebandSignal,
    snr_db: f64,
    band: &Band,
    rng: &mut R,
) -> Result<(BasebandSignal, f64)> {
    check_band(signal.sample_rate, band)?;
    let p = in_band_power(&signal.samples, signal.sample_rate, band);
    let var = noise_variance_for_snr(p, snr_db, signal.len(), signal.sample_rate, band)?;
    let mut out = signal.clone();
    if var > 0.0 {
        let s = var.sqrt();
        for (o, z) in out.samples.iter_mut().zip(complex_gaussian(signal.len(), rng)) {
            *o += z * s;
        }
    }
    Ok((out, var))
}

fn check_band(fs: f64, band: &Band) -> Result<()> {
    let eps = fft::grid_eps(fs);
    if band.lo < -fs / 2.0 - eps || band.hi > fs / 2.0 + eps || !(band.hi > band.lo) {
        return Err(invalid!("band [{}, {}] outside [-fs/2, fs/2] or empty", band.lo, band.hi));
    }
    Ok(())
}

/// `true` for DFT bins within `half_width` of any of `centers`.
pub fn tone_mask(len: usize, fs: f64, centers: &[f64], half_width: f64) -> Vec<bool> {
    let eps = fft::grid_eps(fs);
    (0..len)
        .map(|k| {
            let f = fft::bin_freq(k, len, fs);
            centers.iter().any(|c| (f - c).abs() <= half_width + eps)
        })
        .collect()
}

/// Unit-scale interference for a frame of `len` samples: the caller scales
/// it to the desired power. Noise-model realizations live on the frame grid.
pub fn interference_realization<R: Rng + ?Sized>(
    len: usize,
    fs: f64,
    profile: &ChannelProfile,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    profile.validate()?;
    let centers = profile.tone_centers(fs);
    match profile.model {
        InterferenceModel::Noise => {
            let mask = tone_mask(len, fs, &centers, profile.tone_bw / 2.0);
            let mut spec = complex_gaussian(len, rng);
            for (v, &m) in spec.iter_mut().zip(&mask) {
                if !m {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
            fft::inverse(&mut spec);
            Ok(spec)
        }
        InterferenceModel::Sinusoid => {
            let phases: Vec<f64> = centers
                .iter()
                .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                .collect();
            Ok((0..len)
                .map(|n| {
                    let t = n as f64 / fs;
                    centers
                        .iter()
                        .zip(&phases)
                        .map(|(c, p)| Complex64::from_polar(1.0, std::f64::consts::TAU * c * t + p))
                        .sum()
                })
                .collect())
        }
    }
}

/// Scale that brings `unit` to in-band power `signal_power / SIR`.
pub fn interference_scale(unit: &[Complex64], signal_power: f64, sir_db: f64, fs: f64, band: &Band) -> f64 {
    let pu = in_band_power(unit, fs, band);
    if pu <= 0.0 {
        return 0.0;
    }
    (signal_power / 10f64.powf(sir_db / 10.0) / pu).sqrt()
}

/// Adds periodic interference at in-band SIR `profile.sir_db`, seeded by
/// `profile.seed`. No-op when interference is off or `sir_db = +∞`.
pub fn add_periodic_interference(
    signal: &BasebandSignal,
    profile: &ChannelProfile,
    band: &Band,
) -> Result<BasebandSignal> {
    profile.validate()?;
    check_band(signal.sample_rate, band)?;
    let Some(sir) = profile.sir_db.filter(|s| s.is_finite()) else {
        return Ok(signal.clone());
    };
    let fs = signal.sample_rate;
    let mut rng = seed::rng(&[profile.seed, seed::stream::INTERFERENCE]);
    let unit = interference_realization(signal.len(), fs, profile, &mut rng)?;
    let p = in_band_power(&signal.samples, fs, band);
    let a = interference_scale(&unit, p, sir, fs, band);
    let mut out = signal.clone();
    for (o, i) in out.samples.iter_mut().zip(&unit) {
        *o += i * a;
    }
    Ok(out)
}

/// Unit-scale noise and interference for one frame, drawn once and applied
/// to any number of transmitted signals of the same length (common random
/// numbers). Both are calibrated against the clean signal's in-band power.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDraw {
    noise: Vec<Complex64>,
    /// Unit interference and its in-band power.
    interference: Option<(Vec<Complex64>, f64)>,
}

impl ChannelDraw {
    /// Draws the noise from stream `(profile.seed, NOISE)` and the
    /// interference from `(profile.seed, INTERFERENCE)`.
    pub fn new(len: usize, fs: f64, profile: &ChannelProfile, band: &Band) -> Result<Self> {
        profile.validate()?;
        check_band(fs, band)?;
        let noise = if profile.snr_db == f64::INFINITY {
            Vec::new()
        } else {
            complex_gaussian(len, &mut seed::rng(&[profile.seed, seed::stream::NOISE]))
        };
        let interference = match profile.sir_db.filter(|s| s.is_finite()) {
            Some(_) => {
                let mut rng = seed::rng(&[profile.seed, seed::stream::INTERFERENCE]);
                let unit = interference_realization(len, fs, profile, &mut rng)?;
                let p = in_band_power(&unit, fs, band);
                Some((unit, p))
            }
            None => None,
        };
        Ok(ChannelDraw { noise, interference })
    }

    /// Impairs `signal` at `profile.snr_db` / `profile.sir_db`; returns the
    /// received signal and the per-sample complex noise variance `σ_s²`.
    pub fn apply(&self, signal: &BasebandSignal, profile: &ChannelProfile, band: &Band) -> Result<(BasebandSignal, f64)> {
        let fs = signal.sample_rate;
        let p = in_band_power(&signal.samples, fs, band);
        let var = noise_variance_for_snr(p, profile.snr_db, signal.len(), fs, band)?;
        let mut out = signal.clone();
        if var > 0.0 {
            if self.noise.len() != signal.len() {
                return Err(invalid!("channel draw of {} samples applied to {}", self.noise.len(), signal.len()));
            }
            let s = var.sqrt();
            for (o, z) in out.samples.iter_mut().zip(&self.noise) {
                *o += z * s;
            }
        }
        if let (Some((unit, pu)), Some(sir)) = (&self.interference, profile.sir_db) {
            if unit.len() != signal.len() {
                return Err(invalid!("channel draw of {} samples applied to {}", unit.len(), signal.len()));
            }
            if *pu > 0.0 {
                let a = (p / 10f64.powf(sir / 10.0) / pu).sqrt();
                for (o, i) in out.samples.iter_mut().zip(unit) {
                    *o += i * a;
                }
            }
        }
        Ok((out, var))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombFilterSpec {
    pub notch_centers: Vec<f64>,
    pub notch_bw: f64,
}

impl CombFilterSpec {
    /// Notches at `offset + k·step` across `[-fs/2, fs/2]`.
    pub fn periodic(offset: f64, step: f64, notch_bw: f64, fs: f64) -> Self {
        CombFilterSpec {
            notch_centers: periodic_grid(offset, step, fs),
            notch_bw,
        }
    }

    /// Unit-gain mask on a length-`len` grid: `false` inside a notch.
    pub fn pass_mask(&self, len: usize, fs: f64) -> Vec<bool> {
        tone_mask(len, fs, &self.notch_centers, self.notch_bw / 2.0)
            .into_iter()
            .map(|stop| !stop)
            .collect()
    }
}

/// Zero-phase comb filter: zeroes every DFT bin within `notch_bw / 2` of a
/// notch center over the whole frame.
pub fn comb_filter(signal: &BasebandSignal, spec: &CombFilterSpec) -> Result<BasebandSignal> {
    if spec.notch_centers.is_empty() {
        return Err(invalid!("comb filter needs at least one notch"));
    }
    let mask = spec.pass_mask(signal.len(), signal.sample_rate);
    let mut out = signal.clone();
    apply_mask(&mut out.samples, &mask);
    Ok(out)
}

/// Multiplies the spectrum of `samples` by a 0/1 mask.
pub fn apply_mask(samples: &mut [Complex64], pass: &[bool]) {
    fft::forward(samples);
    for (v, &p) in samples.iter_mut().zip(pass) {
        if !p {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft::inverse(samples);
}

/// Fraction of white-noise power that reaches the matched-filter output
/// through a comb filter: `Σ_k pass_k |P_k|² / Σ_k |P_k|²`, with `P` the DFT
/// of the pulse zero-padded to the frame length.
pub fn masked_noise_fraction(taps: &[f64], pass: &[bool]) -> f64 {
    let mut p: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); pass.len()];
    for (d, &t) in p.iter_mut().zip(taps) {
        d.re = t;
    }
    fft::forward(&mut p);
    let total: f64 = p.iter().map(|v| v.norm_sqr()).sum();
    let kept: f64 = p.iter().zip(pass).filter(|(_, &k)| k).map(|(v, _)| v.norm_sqr()).sum();
    kept / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitWord;
    use crate::cis::{cis, CisSpec, CodeConfig};
    use crate::modem::{modulate, PulseSpec};
    use crate::polar::{assemble_source, encode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario_profile(sir: Option<f64>) -> ChannelProfile {
        ChannelProfile {
            snr_db: 0.0,
            sir_db: sir,
            fundamental: 50.0,
            tone_bw: 20.0,
            offset: 25.0,
            model: InterferenceModel::Noise,
            seed: 17,
        }
    }

    fn random_signal(n: usize, span: usize, rng: &mut ChaCha8Rng) -> BasebandSignal {
        let pulse = PulseSpec::new(0.25, span, 8).unwrap();
        modulate(&BitWord::random(n, rng), &pulse, 800.0).unwrap()
    }

    #[test]
    fn tone_centers_of_scenario() {
        let c = scenario_profile(Some(-20.0)).tone_centers(6400.0);
        assert_eq!(c.len(), 128);
        assert!(c.contains(&25.0) && c.contains(&-25.0) && c.contains(&75.0) && c.contains(&-125.0));
        assert!(c.iter().all(|f| ((f - 25.0) / 50.0).fract().abs() < 1e-12));
        let mut p = scenario_profile(None);
        p.tone_bw = 50.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn awgn_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let band = Band::occupied(0.25, 800.0);
        let sig = random_signal(1024, 8, &mut rng);
        let (same, var) = add_awgn(&sig, f64::INFINITY, &band, &mut rng).unwrap();
        assert_eq!(var, 0.0);
        assert_eq!(same, sig);
        for snr in [0.0, 3.0, -5.0] {
            let mut ratio = 0.0;
            for _ in 0..100 {
                let sig = random_signal(1024, 8, &mut rng);
                let (noisy, _) = add_awgn(&sig, snr, &band, &mut rng).unwrap();
                let noise: Vec<Complex64> = noisy.samples.iter().zip(&sig.samples).map(|(a, b)| a - b).collect();
                ratio += in_band_power(&sig.samples, 6400.0, &band) / in_band_power(&noise, 6400.0, &band);
            }
            let measured = 10.0 * (ratio / 100.0).log10();
            assert!((measured - snr).abs() < 0.1, "{measured} vs {snr}");
        }
        assert!(add_awgn(&sig, 0.0, &Band { lo: 1.0, hi: 1.0 }, &mut rng).is_err());
        assert!(add_awgn(&sig, 0.0, &Band { lo: -4000.0, hi: 0.0 }, &mut rng).is_err());
    }

    #[test]
    fn awgn_is_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let z = complex_gaussian(n, &mut rng);
        let r0 = z.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        assert!((r0 - 1.0).abs() < 0.05);
        for lag in 1..10 {
            let r: Complex64 = (0..n - lag).map(|i| z[i + lag] * z[i].conj()).sum::<Complex64>() / n as f64;
            // Estimator standard deviation is about 1/√n.
            assert!(r.norm() < 5.0 / (n as f64).sqrt(), "lag {lag}: {}", r.norm());
        }
    }

    #[test]
    fn interference_is_in_band_and_calibrated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let band = Band::occupied(0.25, 800.0);
        let sig = random_signal(256, 16, &mut rng);
        let prof = scenario_profile(Some(-20.0));
        let out = add_periodic_interference(&sig, &prof, &band).unwrap();
        assert_eq!(out, add_periodic_interference(&sig, &prof, &band).unwrap());
        let i: Vec<Complex64> = out.samples.iter().zip(&sig.samples).map(|(a, b)| a - b).collect();
        let sir = 10.0 * (in_band_power(&sig.samples, 6400.0, &band) / in_band_power(&i, 6400.0, &band)).log10();
        assert!((sir + 20.0).abs() < 1e-9);

        let centers = prof.tone_centers(6400.0);
        let total = in_band_power(&i, 6400.0, &Band { lo: -3200.0, hi: 3200.0 });
        let mut tones = 0.0;
        for c in &centers {
            tones += in_band_power(&i, 6400.0, &Band { lo: c - 10.0, hi: c + 10.0 });
        }
        assert!(tones / total >= 0.99);

        let off = add_periodic_interference(&sig, &scenario_profile(None), &band).unwrap();
        assert_eq!(off, sig);
        let inf = add_periodic_interference(&sig, &scenario_profile(Some(f64::INFINITY)), &band).unwrap();
        assert_eq!(inf, sig);
    }

    #[test]
    fn comb_filter_tone_responses() {
        let fs = 6400.0;
        let len = 6400;
        let spec = CombFilterSpec::periodic(25.0, 50.0, 20.0, fs);
        let tone = |f: f64| BasebandSignal {
            samples: (0..len)
                .map(|n| Complex64::from_polar(1.0, std::f64::consts::TAU * f * n as f64 / fs))
                .collect(),
            sample_rate: fs,
            symbol_rate: 800.0,
        };
        let at = comb_filter(&tone(75.0), &spec).unwrap();
        assert!(at.mean_power() < 1e-6);
        let mid = comb_filter(&tone(100.0), &spec).unwrap();
        assert!((mid.mean_power() - 1.0).abs() < 1e-3);
        let empty = CombFilterSpec {
            notch_centers: vec![],
            notch_bw: 20.0,
        };
        assert!(comb_filter(&tone(0.0), &empty).is_err());
    }

    #[test]
    fn comb_filter_removes_scenario_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let prof = scenario_profile(Some(-20.0));
        let spec = CombFilterSpec::periodic(25.0, 50.0, 20.0, 6400.0);
        for len in [2176, 4096, 6400] {
            let unit = interference_realization(len, 6400.0, &prof, &mut rng).unwrap();
            let sig = BasebandSignal {
                samples: unit.clone(),
                sample_rate: 6400.0,
                symbol_rate: 800.0,
            };
            let out = comb_filter(&sig, &spec).unwrap();
            let db = 10.0 * (sig.mean_power() / out.mean_power().max(1e-300)).log10();
            assert!(db >= 20.0, "len {len}: {db} dB");
        }
    }

    #[test]
    fn comb_filter_hurts_shaped_signals_less() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pulse = PulseSpec::new(0.25, 16, 8).unwrap();
        let spec = CisSpec::new(256, 3).unwrap();
        let shaped = CodeConfig::comb_shaped(&spec, cis(&spec)).unwrap();
        let plain = CodeConfig::conventional(256, (0..256).collect()).unwrap();
        let comb = CombFilterSpec::periodic(25.0, 50.0, 20.0, 6400.0);
        let removed = |cfg: &CodeConfig, rng: &mut ChaCha8Rng| {
            let bits = BitWord::random(cfg.k(), rng);
            let x = encode(&assemble_source(&bits, cfg).unwrap()).unwrap();
            let s = modulate(&x, &pulse, 800.0).unwrap();
            let f = comb_filter(&s, &comb).unwrap();
            1.0 - f.mean_power() / s.mean_power()
        };
        for _ in 0..100 {
            let a = removed(&shaped, &mut rng);
            let b = removed(&plain, &mut rng);
            assert!(a < b, "shaped {a} vs plain {b}");
        }
    }

    #[test]
    fn channel_draw_calibrates_against_clean_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let band = Band::occupied(0.25, 800.0);
        let sig = random_signal(256, 16, &mut rng);
        let mut prof = scenario_profile(Some(-20.0));
        prof.snr_db = 3.0;
        let draw = ChannelDraw::new(sig.len(), 6400.0, &prof, &band).unwrap();
        let (out, var) = draw.apply(&sig, &prof, &band).unwrap();
        let p = in_band_power(&sig.samples, 6400.0, &band);
        assert!((var - noise_variance_for_snr(p, 3.0, sig.len(), 6400.0, &band).unwrap()).abs() < 1e-15);
        // Same interference as the single-purpose helper.
        let mut no_noise = prof.clone();
        no_noise.snr_db = f64::INFINITY;
        let only_i = ChannelDraw::new(sig.len(), 6400.0, &no_noise, &band).unwrap();
        let (a, _) = only_i.apply(&sig, &no_noise, &band).unwrap();
        let b = add_periodic_interference(&sig, &prof, &band).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x - y).norm() < 1e-12);
        }
        assert_ne!(out, a);
    }

    #[test]
    fn masked_noise_fraction_bounds() {
        let pulse = PulseSpec::new(0.25, 16, 8).unwrap();
        let taps = crate::modem::srrc_taps(&pulse);
        let all = vec![true; 2176];
        assert!((masked_noise_fraction(&taps, &all) - 1.0).abs() < 1e-12);
        let comb = CombFilterSpec::periodic(25.0, 50.0, 20.0, 6400.0);
        let f = masked_noise_fraction(&taps, &comb.pass_mask(2176, 6400.0));
        assert!(f > 0.4 && f < 0.8, "{f}");
    }
}
