//! BPSK mapping, square-root raised-cosine (SRRC) pulse shaping and matched
//! filtering at an integer oversampling factor.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;

use crate::bits::BitWord;
use crate::error::{invalid, Result};

/// SRRC pulse: roll-off `β`, total span in symbols and samples per symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub rolloff: f64,
    pub span_symbols: usize,
    pub sps: usize,
}

impl PulseSpec {
    pub fn new(rolloff: f64, span_symbols: usize, sps: usize) -> Result<Self> {
        let p = PulseSpec {
            rolloff,
            span_symbols,
            sps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(invalid!("roll-off {} outside [0, 1]", self.rolloff));
        }
        if self.span_symbols == 0 || self.sps == 0 {
            return Err(invalid!("pulse span and samples per symbol must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.span_symbols * self.sps + 1
    }

    /// Delay of transmit plus matched filter, in samples.
    pub fn group_delay(&self) -> usize {
        self.span_symbols * self.sps
    }
}

/// Complex baseband samples with their sample and symbol rates.
#[derive(Clone, Debug, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub symbol_rate: f64,
}

impl BasebandSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Writes `sample_index,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sample_index,re,im")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{:e},{:e}", s.re, s.im)?;
        }
        Ok(())
    }
}

/// `q(0) = +1`, `q(1) = -1`.
pub fn bpsk_map(x: &BitWord) -> Vec<f64> {
    x.iter().map(|b| 1.0 - 2.0 * b as f64).collect()
}

/// Unnormalized SRRC impulse response at `t` symbol periods.
fn srrc(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (1.0 - (4.0 * beta * t).powi(2)).abs() < 1e-10 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    num / (PI * t * (1.0 - (4.0 * beta * t).powi(2)))
}

/// Symmetric, unit-energy SRRC taps of length `span·sps + 1`.
pub fn srrc_taps(spec: &PulseSpec) -> Vec<f64> {
    let len = spec.len();
    let half = (len - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..len)
        .map(|k| srrc((k as f64 - half) / spec.sps as f64, spec.rolloff))
        .collect();
    // Mirror to make the symmetry exact.
    for k in 0..len / 2 {
        taps[len - 1 - k] = taps[k];
    }
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    taps
}

/// Upsamples the BPSK symbols of `x` by `sps` and convolves with the pulse
/// (full convolution, length `N·sps + span·sps`).
pub fn modulate(x: &BitWord, spec: &PulseSpec, symbol_rate: f64) -> Result<BasebandSignal> {
    spec.validate()?;
    let symbols = bpsk_map(x);
    modulate_symbols(&symbols, spec, symbol_rate)
}

/// [`modulate`] for arbitrary real symbols.
pub fn modulate_symbols(symbols: &[f64], spec: &PulseSpec, symbol_rate: f64) -> Result<BasebandSignal> {
    spec.validate()?;
    if !(symbol_rate > 0.0) {
        return Err(invalid!("symbol rate must be positive"));
    }
    let taps = srrc_taps(spec);
    let len = symbols.len() * spec.sps + spec.group_delay();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (n, &a) in symbols.iter().enumerate() {
        let base = n * spec.sps;
        for (k, &t) in taps.iter().enumerate() {
            out[base + k].re += a * t;
        }
    }
    Ok(BasebandSignal {
        samples: out,
        sample_rate: symbol_rate * spec.sps as f64,
        symbol_rate,
    })
}

/// Matched filter and symbol-rate sampling with the full group delay:
/// `y_n = Σ_k r[n·sps + k]·p[k]`.
pub fn demodulate(signal: &BasebandSignal, spec: &PulseSpec, n: usize) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let taps = srrc_taps(spec);
    demodulate_with_taps(&signal.samples, &taps, spec.sps, n)
}

/// [`demodulate`] with precomputed taps.
pub fn demodulate_with_taps(samples: &[Complex64], taps: &[f64], sps: usize, n: usize) -> Result<Vec<Complex64>> {
    let need = if n == 0 { 0 } else { (n - 1) * sps + taps.len() };
    if samples.len() < need {
        return Err(invalid!(
            "signal of {} samples too short for {n} symbols (need {need})",
            samples.len()
        ));
    }
    Ok((0..n)
        .map(|i| {
            let seg = &samples[i * sps..i * sps + taps.len()];
            seg.iter().zip(taps).map(|(s, &t)| s * t).sum()
        })
        .collect())
}

/// Raised-cosine power spectrum `|P(f)|²` of a unit-energy SRRC pulse at
/// symbol rate `rs`, in units of `1/rs`.
pub fn raised_cosine_psd(f: f64, beta: f64, rs: f64) -> f64 {
    let t = 1.0 / rs;
    let af = f.abs();
    let f1 = (1.0 - beta) / (2.0 * t);
    let f2 = (1.0 + beta) / (2.0 * t);
    if af <= f1 {
        t
    } else if af <= f2 {
        0.5 * t * (1.0 + (PI * t / beta * (af - f1)).cos())
    } else {
        0.0
    }
}

/// Fraction of the pulse energy inside `[lo, hi]` (Hz), from the ideal
/// raised-cosine spectrum.
pub fn band_energy_fraction(lo: f64, hi: f64, beta: f64, rs: f64) -> f64 {
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let mut acc = 0.0;
    for k in 0..=steps {
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        acc += w * raised_cosine_psd(lo + h * k as f64, beta, rs);
    }
    acc * h
}

/// Noise factor `B / (φ R_s)` relating an in-band SNR over `[lo, hi]` to the
/// symbol-level SNR; see `construction::symbol_noise_variance`.
pub fn band_factor(lo: f64, hi: f64, beta: f64, rs: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(invalid!("empty band [{lo}, {hi}]"));
    }
    let phi = band_energy_fraction(lo, hi, beta, rs);
    if phi <= 0.0 {
        return Err(invalid!("band [{lo}, {hi}] holds no signal energy"));
    }
    Ok((hi - lo) / (phi * rs))
}
