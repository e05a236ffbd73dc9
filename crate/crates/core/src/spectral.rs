//! Power spectral density estimation and spectral-null analysis.
//!
//! A regularly-repetitive signal `s(t) = Σ_{m<M} s0(t - mT)` has spectrum
//! `S0(f)·G_{M,T}(f)` with `G_{M,T}(f) = Σ_{n<M} e^{-j2πfnT}`, which vanishes
//! at `f = k/(MT)` for `k` not a multiple of `M`. A comb-shaping codeword with
//! CIS order `r` therefore has nulls at `Θ_r = {(1+2a)·2^r·R_s/N}`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::bits::BitWord;
use crate::error::{invalid, Result};
use crate::fft;
use crate::modem::bpsk_map;
use crate::polar::log2_len;

/// `G_{M,T}(f)` in closed form; the removable singularity at `f = k/T` is
/// evaluated as the direct sum.
pub fn g_window(m: usize, t: f64, f: f64) -> Result<Complex64> {
    if m < 2 || !(t > 0.0) {
        return Err(invalid!("window needs M >= 2 and T > 0"));
    }
    let x = PI * t * f;
    let den = x.sin();
    if den.abs() < 1e-9 {
        return Ok(g_window_direct(m, t, f));
    }
    let mag = (m as f64 * x).sin() / den;
    Ok(Complex64::from_polar(1.0, -(m as f64 - 1.0) * x) * mag)
}

fn g_window_direct(m: usize, t: f64, f: f64) -> Complex64 {
    (0..m)
        .map(|n| Complex64::from_polar(1.0, -2.0 * PI * f * n as f64 * t))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Window::Hann),
            "rect" | "rectangular" => Ok(Window::Rectangular),
            other => Err(invalid!("unknown window {other:?} (expected \"hann\" or \"rect\")")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rect",
        }
    }

    /// Periodic window of length `len`.
    pub fn coefficients(&self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchParams {
    pub segment: usize,
    /// Overlap between consecutive segments, in samples.
    pub overlap: usize,
    pub window: Window,
}

impl WelchParams {
    pub fn validate(&self) -> Result<()> {
        if self.segment < 2 {
            return Err(invalid!("Welch segment must have at least 2 samples"));
        }
        if self.overlap >= self.segment {
            return Err(invalid!("Welch overlap {} must be below the segment length {}", self.overlap, self.segment));
        }
        Ok(())
    }
}

impl Default for WelchParams {
    fn default() -> Self {
        WelchParams {
            segment: 4096,
            overlap: 2048,
            window: Window::Hann,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdEstimate {
    /// Ascending bin frequencies spanning `[-fs/2, fs/2)`.
    pub freqs: Vec<f64>,
    /// Power per Hz.
    pub psd: Vec<f64>,
    pub params: WelchParams,
    pub segments: usize,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        self.freqs[1] - self.freqs[0]
    }

    /// Linear interpolation of the PSD at `f`.
    pub fn at(&self, f: f64) -> Result<f64> {
        let df = self.resolution();
        let pos = (f - self.freqs[0]) / df;
        if pos < -1e-9 || pos > (self.freqs.len() - 1) as f64 + 1e-9 {
            return Err(invalid!("frequency {f} outside the PSD grid"));
        }
        let pos = pos.clamp(0.0, (self.freqs.len() - 1) as f64);
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 >= self.psd.len() || frac < 1e-9 {
            return Ok(self.psd[i]);
        }
        Ok(self.psd[i] * (1.0 - frac) + self.psd[i + 1] * frac)
    }

    /// Mean PSD over `[lo, hi]`.
    pub fn band_mean(&self, lo: f64, hi: f64) -> f64 {
        let vals: Vec<f64> = self
            .freqs
            .iter()
            .zip(&self.psd)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, p)| *p)
            .collect();
        vals.iter().sum::<f64>() / vals.len().max(1) as f64
    }

    /// Writes `freq_hz,psd_db` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_hz,psd_db")?;
        for (f, p) in self.freqs.iter().zip(&self.psd) {
            writeln!(w, "{f},{:.6}", 10.0 * p.max(1e-300).log10())?;
        }
        Ok(())
    }
}

/// Streaming Welch estimator: feed any number of sample blocks, each split
/// into overlapping segments, and read the averaged PSD.
pub struct WelchAccumulator {
    params: WelchParams,
    fs: f64,
    window: Vec<f64>,
    scale: f64,
    sum: Vec<f64>,
    segments: usize,
}

impl WelchAccumulator {
    pub fn new(params: WelchParams, fs: f64) -> Result<Self> {
        params.validate()?;
        if !(fs > 0.0) {
            return Err(invalid!("sample rate must be positive"));
        }
        let window = params.window.coefficients(params.segment);
        let scale = 1.0 / (fs * window.iter().map(|w| w * w).sum::<f64>());
        Ok(WelchAccumulator {
            params,
            fs,
            window,
            scale,
            sum: vec![0.0; params.segment],
            segments: 0,
        })
    }

    pub fn add(&mut self, samples: &[Complex64]) -> Result<()> {
        let seg = self.params.segment;
        if samples.len() < seg {
            return Err(invalid!("signal of {} samples shorter than the segment {seg}", samples.len()));
        }
        let step = seg - self.params.overlap;
        let mut buf = vec![Complex64::new(0.0, 0.0); seg];
        let mut start = 0;
        while start + seg <= samples.len() {
            for ((b, s), w) in buf.iter_mut().zip(&samples[start..start + seg]).zip(&self.window) {
                *b = s * w;
            }
            fft::forward(&mut buf);
            for (acc, v) in self.sum.iter_mut().zip(&buf) {
                *acc += v.norm_sqr();
            }
            self.segments += 1;
            start += step;
        }
        Ok(())
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn finish(&self) -> Result<PsdEstimate> {
        if self.segments == 0 {
            return Err(invalid!("no segments accumulated"));
        }
        let seg = self.params.segment;
        let half = seg / 2;
        let norm = self.scale / self.segments as f64;
        // fftshift: bins seg/2.. are the negative frequencies.
        let order: Vec<usize> = (half..seg).chain(0..half).collect();
        Ok(PsdEstimate {
            freqs: order.iter().map(|&k| fft::bin_freq(k, seg, self.fs)).collect(),
            psd: order.iter().map(|&k| self.sum[k] * norm).collect(),
            params: self.params,
            segments: self.segments,
        })
    }
}

pub fn welch_psd(samples: &[Complex64], fs: f64, params: &WelchParams) -> Result<PsdEstimate> {
    let mut acc = WelchAccumulator::new(*params, fs)?;
    acc.add(samples)?;
    acc.finish()
}

/// `Θ_r = {(1+2a)·2^r·R_s/N}` within `[-fs/2, fs/2]`, ascending.
pub fn null_set(n: usize, r: u32, symbol_rate: f64, fs: f64) -> Result<Vec<f64>> {
    let m = log2_len(n)?;
    if r >= m {
        return Err(invalid!("CIS order {r} out of range for N = {n}"));
    }
    let step = (1usize << r) as f64 * symbol_rate / n as f64;
    Ok(crate::channel::periodic_grid(step, 2.0 * step, fs))
}

/// `10·log10(mean PSD over ref_band / PSD at f)` for every `f`.
pub fn null_depth(psd: &PsdEstimate, freqs: &[f64], ref_band: (f64, f64)) -> Result<Vec<f64>> {
    let reference = psd.band_mean(ref_band.0, ref_band.1);
    freqs
        .iter()
        .map(|&f| Ok(10.0 * (reference / psd.at(f)?.max(1e-300)).log10()))
        .collect()
}

/// Exact-tier spectrum: the DFT of the rectangular-pulse BPSK waveform of `x`
/// (each symbol held for `sps` samples), frame length `N·sps`, so bin `k` sits
/// at `k·R_s/N`.
pub fn rectangular_spectrum(x: &BitWord, sps: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = bpsk_map(x)
        .iter()
        .flat_map(|&a| std::iter::repeat_n(Complex64::new(a, 0.0), sps))
        .collect();
    fft::forward(&mut buf);
    buf
}

/// Largest `|X_k| / max_j |X_j|` over the bins of `Θ_r` in the exact tier.
pub fn exact_null_residual(x: &BitWord, r: u32, sps: usize) -> Result<f64> {
    let n = x.len();
    let m = log2_len(n)?;
    if r >= m || sps == 0 {
        return Err(invalid!("invalid CIS order {r} or oversampling {sps}"));
    }
    let spec = rectangular_spectrum(x, sps);
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let step = 1usize << r;
    let len = spec.len();
    let worst = (0..len)
        .filter(|k| k % step == 0 && (k / step) % 2 == 1)
        .map(|k| spec[k].norm())
        .fold(0.0, f64::max);
    Ok(worst / peak)
}

/// Null-depth report row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthRow {
    pub freq_hz: f64,
    pub depth_db: f64,
    pub pass: bool,
}

pub fn write_depth_csv<W: Write>(rows: &[DepthRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "freq_hz,depth_db,pass")?;
    for r in rows {
        writeln!(w, "{},{:.3},{}", r.freq_hz, r.depth_db, if r.pass { "pass" } else { "fail" })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::cis::{cis, CisSpec, CodeConfig};
    use crate::polar::{assemble_source, encode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g_window_examples() {
        assert_eq!(g_window(5, 0.1, 0.0).unwrap(), Complex64::new(5.0, 0.0));
        assert!(g_window(2, 1.0, 0.5).unwrap().norm() < 1e-15);
        assert!((g_window(4, 0.5, 2.0).unwrap() - 4.0).norm() < 1e-12);
        assert!(g_window(1, 1.0, 0.1).is_err());
        assert!(g_window(2, 0.0, 0.1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let m = rng.random_range(2..20);
            let t = rng.random_range(0.01..2.0);
            let f = rng.random_range(-50.0..50.0);
            let a = g_window(m, t, f).unwrap();
            let b = g_window_direct(m, t, f);
            assert!((a - b).norm() < 1e-10, "{m} {t} {f}");
        }
    }

    #[test]
    fn regular_repetition_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (len, shift, reps) = (96, 10, 4);
        let s0: Vec<Complex64> = (0..len)
            .map(|k| if k < 12 { Complex64::new(rng.random(), rng.random()) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let mut s = vec![Complex64::new(0.0, 0.0); len];
        for mm in 0..reps {
            for k in 0..12 {
                s[k + mm * shift] += s0[k];
            }
        }
        let mut a = s0.clone();
        fft::forward(&mut a);
        let mut b = s;
        fft::forward(&mut b);
        let fs = 1.0;
        for k in 0..len {
            let f = k as f64 * fs / len as f64;
            let g = g_window(reps, shift as f64 / fs, f).unwrap();
            assert!((a[k] * g - b[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn welch_white_noise_is_flat_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = complex_gaussian(1 << 18, &mut rng);
        let params = WelchParams {
            segment: 256,
            overlap: 128,
            window: Window::Hann,
        };
        let p = welch_psd(&x, 1000.0, &params).unwrap();
        let mean = p.psd.iter().sum::<f64>() / p.psd.len() as f64;
        for v in &p.psd {
            assert!((10.0 * (v / mean).log10()).abs() < 1.0);
        }
        let power = x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
        let integral = p.psd.iter().sum::<f64>() * p.resolution();
        assert!((integral / power - 1.0).abs() < 0.01, "{}", integral / power);
        assert!(p.freqs.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(p.freqs[0], -500.0);
        assert!(p.psd.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn welch_tone_peak_and_errors() {
        let fs = 6400.0;
        let f0 = 130.0;
        let x: Vec<Complex64> = (0..20_000)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * f0 * n as f64 / fs))
            .collect();
        for window in [Window::Hann, Window::Rectangular] {
            let params = WelchParams {
                segment: 1024,
                overlap: 512,
                window,
            };
            let p = welch_psd(&x, fs, &params).unwrap();
            let peak = (0..p.psd.len()).max_by(|&a, &b| p.psd[a].total_cmp(&p.psd[b])).unwrap();
            let nearest = (0..p.freqs.len())
                .min_by(|&a, &b| (p.freqs[a] - f0).abs().total_cmp(&(p.freqs[b] - f0).abs()))
                .unwrap();
            assert_eq!(peak, nearest);
        }
        let bad = WelchParams {
            segment: 1024,
            overlap: 1024,
            window: Window::Hann,
        };
        assert!(welch_psd(&x, fs, &bad).is_err());
        let long = WelchParams {
            segment: 1 << 16,
            overlap: 0,
            window: Window::Hann,
        };
        assert!(welch_psd(&x, fs, &long).is_err());
        assert!(Window::parse("kaiser").is_err());
    }

    #[test]
    fn null_set_examples() {
        let s = null_set(256, 3, 800.0, 6400.0).unwrap();
        for f in [-125.0, -75.0, -25.0, 25.0, 75.0, 125.0] {
            assert!(s.iter().any(|&v| (v - f).abs() < 1e-9));
        }
        assert!(!s.iter().any(|&v| v.abs() < 1e-9 || (v - 50.0).abs() < 1e-9));
        assert_eq!(s.len(), 128);
        assert_eq!(800.0 / 256.0, 3.125);
        assert_eq!(null_set(1024, 5, 800.0, 6400.0).unwrap(), s);
        assert!(null_set(256, 8, 800.0, 6400.0).is_err());
    }

    #[test]
    fn flat_psd_depth_is_zero() {
        let p = PsdEstimate {
            freqs: (0..100).map(|k| k as f64 - 50.0).collect(),
            psd: vec![2.0; 100],
            params: WelchParams::default(),
            segments: 1,
        };
        let d = null_depth(&p, &[-10.5, 0.0, 30.25], (-40.0, 40.0)).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12));
        assert!(null_depth(&p, &[70.0], (-40.0, 40.0)).is_err());
    }

    #[test]
    fn exact_tier_nulls_and_negative_control() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for r in 0..6 {
            let spec = CisSpec::new(64, r).unwrap();
            let cfg = CodeConfig::comb_shaped(&spec, cis(&spec)).unwrap();
            for _ in 0..5 {
                let x = encode(&assemble_source(&BitWord::random(32, &mut rng), &cfg).unwrap()).unwrap();
                assert!(exact_null_residual(&x, r, 8).unwrap() < 1e-9);
            }
            // One index outside Λ_r destroys at least one null for some word.
            let outside = (0..64).find(|&i| !spec.contains(i) && i > 0).unwrap();
            let mut info = cis(&spec);
            info[0] = outside;
            let bad = CodeConfig::conventional(64, info).unwrap();
            let destroyed = (0..20).any(|_| {
                let x = encode(&assemble_source(&BitWord::random(32, &mut rng), &bad).unwrap()).unwrap();
                exact_null_residual(&x, r, 8).unwrap() > 1e-3
            });
            assert!(destroyed, "r = {r}");
        }
    }

    #[test]
    fn depth_csv() {
        let rows = [DepthRow {
            freq_hz: 25.0,
            depth_db: 31.5,
            pass: true,
        }];
        let mut buf = Vec::new();
        write_depth_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "freq_hz,depth_db,pass\n25,31.500,pass\n");
    }
}
