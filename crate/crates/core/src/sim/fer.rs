//! Frame-error-rate simulation of the baseband link.
//!
//! Each frame runs: random information bits → encode → SRRC BPSK →
//! periodic interference + AWGN → optional comb filter → matched filter →
//! CCD or plain SCL → compare. All arms of a sweep see the same information
//! bits, noise and interference draws for a given frame index, so their FER
//! estimates are paired.

use rayon::prelude::*;

use crate::bits::BitWord;
use crate::channel::{masked_noise_fraction, Band, ChannelDraw, CombFilterSpec};
use crate::cis::{CisSpec, CodeConfig};
use crate::construction::{
    estimate_symmetric_reliability, select_cis_constrained, select_conventional, select_symmetric_in_cis,
    symbol_noise_variance, ReliabilityProfile,
};
use crate::decoder::{ccd_decode_with, channel_llr, ListDecoder};
use crate::error::{Error, Result};
use crate::modem::{band_factor, demodulate_with_taps, modulate, srrc_taps, PulseSpec};
use crate::polar::{assemble_source, encode};
use crate::seed;
use crate::sim::config::{Criterion, DecoderKind, ExperimentConfig};
use crate::sim::report::{wilson_interval, FerRecord, StopReason};

/// Frames simulated between two stop-rule checks.
const BATCH: u64 = 64;

/// Per-dimension noise variance assumed by the decoder on a noiseless link.
const NOISELESS_VARIANCE: f64 = 1e-3;

/// The simulation arms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArmKind {
    /// Conventional polar code, symmetric construction over all indices.
    Cp,
    /// Comb-shaping code, best `K` of `Λ_r` by raw symmetric capacity,
    /// plain SCL on the received vector.
    CspNonC,
    /// Comb-shaping code with CIS-constrained construction and decoding.
    CspC,
    /// The code, criterion and decoder given in the config.
    Configured,
}

impl ArmKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cp" => Ok(ArmKind::Cp),
            "csp-nonc" => Ok(ArmKind::CspNonC),
            "csp-c" => Ok(ArmKind::CspC),
            other => Err(Error::Config(format!(
                "unknown arm {other:?} (expected \"cp\", \"csp-nonc\" or \"csp-c\")"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArmKind::Cp => "cp",
            ArmKind::CspNonC => "csp-nonc",
            ArmKind::CspC => "csp-c",
            ArmKind::Configured => "configured",
        }
    }
}

/// A constructed arm: the code and how it is decoded.
#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub kind: ArmKind,
    pub code: CodeConfig,
    pub decoder: DecoderKind,
}

impl Arm {
    pub fn build(kind: ArmKind, cfg: &ExperimentConfig, profile: &ReliabilityProfile) -> Result<Arm> {
        let k = cfg.code.k;
        let (code, decoder) = match kind {
            ArmKind::Cp => (select_conventional(profile, k)?, DecoderKind::Plain),
            ArmKind::CspNonC => (select_symmetric_in_cis(profile, k, &cfg.cis_spec()?)?, DecoderKind::Plain),
            ArmKind::CspC => (select_cis_constrained(profile, k, &cfg.cis_spec()?)?, DecoderKind::Ccd),
            ArmKind::Configured => {
                let code = match cfg.comb_order()? {
                    None => select_conventional(profile, k)?,
                    Some(r) => {
                        let spec = CisSpec::new(cfg.code.n, r)?;
                        match cfg.construction.criterion {
                            Criterion::CisConstrained => select_cis_constrained(profile, k, &spec)?,
                            Criterion::Symmetric => select_symmetric_in_cis(profile, k, &spec)?,
                        }
                    }
                };
                let decoder = if code.cis().is_some() { cfg.decoder.kind } else { DecoderKind::Plain };
                (code, decoder)
            }
        };
        Ok(Arm { kind, code, decoder })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn frozen_mask(&self) -> Vec<bool> {
        CodeConfig::frozen_mask_of(self.code.n(), self.code.info_indices())
    }
}

/// Arms requested by the config: the named list, or the configured arm.
pub fn arm_kinds(cfg: &ExperimentConfig) -> Result<Vec<ArmKind>> {
    if cfg.sweep.arms.is_empty() {
        return Ok(vec![ArmKind::Configured]);
    }
    cfg.sweep.arms.iter().map(|a| ArmKind::parse(a)).collect()
}

/// Fixed link quantities shared by all frames.
#[derive(Clone, Debug)]
pub struct Link {
    pub pulse: PulseSpec,
    pub taps: Vec<f64>,
    pub symbol_rate: f64,
    pub fs: f64,
    pub band: Band,
    pub frame_len: usize,
    /// Comb-filter pass mask on the frame grid.
    pub pass: Option<Vec<bool>>,
    /// Share of white noise that reaches the matched-filter output.
    pub noise_fraction: f64,
    /// `B / (φ R_s)` of the SNR measurement band.
    pub band_factor: f64,
}

impl Link {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let pulse = cfg.pulse()?;
        let taps = srrc_taps(&pulse);
        let fs = cfg.sample_rate();
        let band = cfg.snr_band()?;
        let frame_len = cfg.code.n * pulse.sps + pulse.group_delay();
        let comb: Option<CombFilterSpec> = cfg.comb();
        let pass = comb.map(|c| c.pass_mask(frame_len, fs));
        let noise_fraction = pass.as_ref().map_or(1.0, |p| masked_noise_fraction(&taps, p));
        Ok(Link {
            band_factor: band_factor(band.lo, band.hi, pulse.rolloff, cfg.modem.symbol_rate)?,
            pulse,
            taps,
            symbol_rate: cfg.modem.symbol_rate,
            fs,
            band,
            frame_len,
            pass,
            noise_fraction,
        })
    }

    /// Per-dimension symbol noise variance after the receive chain, for an
    /// in-band SNR of `snr_db`.
    pub fn effective_noise_variance(&self, snr_db: f64) -> f64 {
        symbol_noise_variance(snr_db, self.band_factor) * self.noise_fraction
    }
}

/// Reliability profile used to construct the arms at one SNR point.
pub fn design_profile(cfg: &ExperimentConfig, link: &Link, snr_db: f64) -> Result<ReliabilityProfile> {
    let design = cfg.construction.design_snr_db.unwrap_or(snr_db);
    let design = if design.is_finite() { design } else { 20.0 };
    let method = cfg.method(&cfg.construction.method, cfg.construction.trials)?;
    estimate_symmetric_reliability(cfg.code.n, design, link.effective_noise_variance(design), &method)
}

struct Workspace {
    decoders: Vec<ListDecoder>,
}

/// Simulates frame `frame` of SNR point `snr_index` for every arm; returns
/// one error flag per arm.
pub fn simulate_frame(
    cfg: &ExperimentConfig,
    link: &Link,
    arms: &[Arm],
    snr_db: f64,
    snr_index: u64,
    frame: u64,
    decoders: &mut [ListDecoder],
) -> Result<Vec<bool>> {
    let frame_seed = seed::derive(&[cfg.seed, snr_index, frame]);
    let info = BitWord::random(cfg.code.k, &mut seed::rng(&[frame_seed, seed::stream::INFO]));
    let profile = cfg.profile(snr_db, frame_seed);
    let draw = ChannelDraw::new(link.frame_len, link.fs, &profile, &link.band)?;
    arms.iter()
        .zip(decoders.iter_mut())
        .map(|(arm, dec)| {
            let x = encode(&assemble_source(&info, &arm.code)?)?;
            let tx = modulate(&x, &link.pulse, link.symbol_rate)?;
            let (mut rx, var) = draw.apply(&tx, &profile, &link.band)?;
            if let Some(pass) = &link.pass {
                crate::channel::apply_mask(&mut rx.samples, pass);
            }
            let y = demodulate_with_taps(&rx.samples, &link.taps, link.pulse.sps, cfg.code.n)?;
            let sigma2 = if var > 0.0 { var * link.noise_fraction / 2.0 } else { NOISELESS_VARIANCE };
            let decoded = match arm.decoder {
                DecoderKind::Ccd => ccd_decode_with(dec, &y, &arm.code, sigma2)?,
                DecoderKind::Plain => dec.decode(&channel_llr(&y, sigma2)?, &arm.frozen_mask())?,
            };
            Ok(decoded.info_bits != info)
        })
        .collect()
}

/// Runs one SNR point for all `arms` until every arm has at least
/// `min_errors` frame errors or `max_frames` frames were simulated.
///
/// Frames are simulated in parallel batches but the stop rule is applied in
/// frame order, so the result does not depend on the thread count.
pub fn run_point(cfg: &ExperimentConfig, link: &Link, arms: &[Arm], snr_db: f64, snr_index: u64) -> Result<Vec<FerRecord>> {
    let min_errors = cfg.sweep.min_errors;
    let max_frames = cfg.sweep.max_frames;
    let mut errors = vec![0u64; arms.len()];
    let mut frames = 0u64;
    let mut stop = StopReason::MaxFrames;
    'outer: while frames < max_frames {
        let end = (frames + BATCH).min(max_frames);
        let batch: Vec<Vec<bool>> = (frames..end)
            .into_par_iter()
            .map_init(
                || Workspace {
                    decoders: arms
                        .iter()
                        .map(|a| ListDecoder::new(a.code.n(), cfg.decoder.list_size).expect("validated list size"))
                        .collect(),
                },
                |ws, f| simulate_frame(cfg, link, arms, snr_db, snr_index, f, &mut ws.decoders),
            )
            .collect::<Result<_>>()?;
        for flags in batch {
            for (e, &flag) in errors.iter_mut().zip(&flags) {
                *e += flag as u64;
            }
            frames += 1;
            if errors.iter().all(|&e| e >= min_errors) {
                stop = StopReason::Errors;
                break 'outer;
            }
        }
    }
    Ok(arms
        .iter()
        .zip(&errors)
        .map(|(arm, &e)| FerRecord {
            arm: arm.name().to_string(),
            snr_db,
            frames,
            frame_errors: e,
            fer: e as f64 / frames as f64,
            wilson_ci_95: wilson_interval(e, frames),
            seed_range: format!("{}:{}:0-{}", cfg.seed, snr_index, frames.saturating_sub(1)),
            stop,
        })
        .collect())
}

/// Full sweep. `sink` receives the rows of each SNR point as soon as the
/// point finishes.
pub fn run_sweep(cfg: &ExperimentConfig, mut sink: impl FnMut(&[FerRecord]) -> Result<()>) -> Result<Vec<FerRecord>> {
    cfg.validate()?;
    let link = Link::new(cfg)?;
    let kinds = arm_kinds(cfg)?;
    let mut all = Vec::new();
    for (idx, &snr) in cfg.sweep.snr_db.iter().enumerate() {
        let profile = design_profile(cfg, &link, snr)?;
        let arms: Vec<Arm> = kinds.iter().map(|&k| Arm::build(k, cfg, &profile)).collect::<Result<_>>()?;
        let rows = run_point(cfg, &link, &arms, snr, idx as u64)?;
        sink(&rows)?;
        all.extend(rows);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn noiseless_link_is_error_free() {
        let cfg = small(
            "[code]\nn = 64\nk = 24\n[modem]\nsymbol_rate = 200.0\n[channel]\ninterference = false\n\
             [comb_filter]\nenabled = false\n[sweep]\nsnr_db = [inf]\nmax_frames = 200\narms = [\"cp\", \"csp-nonc\", \"csp-c\"]",
        );
        let rows = run_sweep(&cfg, |_| Ok(())).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!((r.frames, r.frame_errors), (200, 0), "{r:?}");
        }
    }

    #[test]
    fn stop_rule_and_replay() {
        let text = "[code]\nn = 64\nk = 24\n[modem]\nsymbol_rate = 200.0\n\
                    [sweep]\nsnr_db = [-3.0]\nmin_errors = 5\nmax_frames = 500\narms = [\"cp\", \"csp-c\"]";
        let a = run_sweep(&small(text), |_| Ok(())).unwrap();
        let b = run_sweep(&small(text), |_| Ok(())).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.frame_errors >= 5 && r.stop == StopReason::Errors));
        assert_eq!(a[0].frames, a[1].frames);
        // Stopping exactly where the last arm reached the threshold.
        assert!(a.iter().any(|r| r.frame_errors == 5));
    }

    #[test]
    fn arms_are_paired() {
        let cfg = small("[code]\nn = 64\nk = 24\n[modem]\nsymbol_rate = 200.0\n[sweep]\narms = [\"csp-c\", \"csp-c\"]");
        let link = Link::new(&cfg).unwrap();
        let profile = design_profile(&cfg, &link, 0.0).unwrap();
        let arm = Arm::build(ArmKind::CspC, &cfg, &profile).unwrap();
        let arms = vec![arm.clone(), arm];
        let mut decs: Vec<ListDecoder> = (0..2).map(|_| ListDecoder::new(64, 8).unwrap()).collect();
        for f in 0..50 {
            let flags = simulate_frame(&cfg, &link, &arms, -2.0, 0, f, &mut decs).unwrap();
            assert_eq!(flags[0], flags[1]);
        }
    }
}
