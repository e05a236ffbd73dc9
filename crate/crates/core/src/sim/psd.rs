//! Averaged PSD of a continuous stream of frames and the null-depth report.

use std::io::Write;

use crate::bits::BitWord;
use crate::cis::CodeConfig;
use crate::construction::select_conventional;
use crate::error::Result;
use crate::modem::{bpsk_map, modulate_symbols};
use crate::polar::{assemble_source, encode};
use crate::seed;
use crate::sim::config::ExperimentConfig;
use crate::sim::fer::{Arm, ArmKind, Link};
use crate::sim::report::write_header;
use crate::sim::tables::{channel_profile, DEFAULT_DESIGN_SNR_DB};
use crate::spectral::{exact_null_residual, null_depth, null_set, PsdEstimate, WelchAccumulator};

/// Frames checked in the rectangular-pulse exact tier.
const EXACT_FRAMES: u64 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DepthEntry {
    pub freq_hz: f64,
    pub shaped_db: f64,
    pub control_db: f64,
    /// Inside the flat part of the pulse spectrum, `|f| <= (1-β) R_s / 2`.
    pub flat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdReport {
    pub shaped: PsdEstimate,
    pub control: PsdEstimate,
    pub depths: Vec<DepthEntry>,
    pub threshold_db: f64,
    pub control_db: f64,
    /// Largest relative FFT magnitude at `Θ_r` bins, rectangular pulse.
    pub exact_residual: f64,
}

impl PsdReport {
    /// Every target frequency of the shaped arm reaches the threshold.
    pub fn shaped_pass(&self) -> bool {
        !self.depths.is_empty() && self.depths.iter().all(|d| d.shaped_db >= self.threshold_db)
    }

    /// The control arm stays below `control_db` at every target frequency
    /// where the pulse spectrum is flat; at roll-off frequencies the depth
    /// is dominated by the pulse itself.
    pub fn control_pass(&self) -> bool {
        let flat: Vec<&DepthEntry> = self.depths.iter().filter(|d| d.flat).collect();
        !flat.is_empty() && flat.iter().all(|d| d.control_db < self.control_db)
    }

    pub fn write_psd_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_header(&mut w, "psd", "freq_hz,psd_db,control_psd_db")?;
        for ((f, a), b) in self.shaped.freqs.iter().zip(&self.shaped.psd).zip(&self.control.psd) {
            writeln!(w, "{f},{:.6},{:.6}", 10.0 * a.max(1e-300).log10(), 10.0 * b.max(1e-300).log10())?;
        }
        Ok(())
    }

    pub fn write_depth_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_header(&mut w, "null-depth", "freq_hz,depth_db,pass,control_depth_db,control_nulled,flat")?;
        for d in &self.depths {
            writeln!(
                w,
                "{},{:.3},{},{:.3},{},{}",
                d.freq_hz,
                d.shaped_db,
                if d.shaped_db >= self.threshold_db { "pass" } else { "fail" },
                d.control_db,
                if d.control_db >= self.control_db { "nulled" } else { "not-nulled" },
                u8::from(d.flat)
            )?;
        }
        Ok(())
    }
}

/// Welch PSD of `frames` consecutive random codewords of `code`, modulated
/// as one continuous stream.
pub fn stream_psd(cfg: &ExperimentConfig, code: &CodeConfig, stream_tag: u64) -> Result<PsdEstimate> {
    let link = Link::new(cfg)?;
    let mut symbols = Vec::with_capacity(cfg.psd.frames * code.n());
    for f in 0..cfg.psd.frames as u64 {
        let mut rng = seed::rng(&[cfg.seed, seed::stream::PSD, stream_tag, f]);
        let bits = BitWord::random(code.k(), &mut rng);
        symbols.extend(bpsk_map(&encode(&assemble_source(&bits, code)?)?));
    }
    let signal = modulate_symbols(&symbols, &link.pulse, link.symbol_rate)?;
    let mut acc = WelchAccumulator::new(cfg.welch()?, link.fs)?;
    acc.add(&signal.samples)?;
    acc.finish()
}

pub fn psd_report(cfg: &ExperimentConfig) -> Result<PsdReport> {
    cfg.validate()?;
    let link = Link::new(cfg)?;
    let spec = cfg.cis_spec()?;
    let snr = cfg.construction.design_snr_db.unwrap_or(DEFAULT_DESIGN_SNR_DB);
    let profile = channel_profile(cfg, snr, "ga", 0)?;
    let shaped_kind = if cfg.comb_order()?.is_some() { ArmKind::Configured } else { ArmKind::CspC };
    let shaped_code = Arm::build(shaped_kind, cfg, &profile)?.code;
    let control_code = select_conventional(&profile, cfg.code.k)?;

    let shaped = stream_psd(cfg, &shaped_code, 0)?;
    let control = stream_psd(cfg, &control_code, 1)?;

    let rs = cfg.modem.symbol_rate;
    let beta = cfg.modem.rolloff;
    let edge = (1.0 + beta) * rs / 2.0;
    let flat_edge = (1.0 - beta) * rs / 2.0;
    let targets: Vec<f64> = null_set(cfg.code.n, spec.order(), rs, link.fs)?
        .into_iter()
        .filter(|f| f.abs() < edge)
        .collect();
    let ref_band = (-edge, edge);
    let a = null_depth(&shaped, &targets, ref_band)?;
    let b = null_depth(&control, &targets, ref_band)?;
    let depths = targets
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&f, (&s, &c))| DepthEntry {
            freq_hz: f,
            shaped_db: s,
            control_db: c,
            flat: f.abs() <= flat_edge,
        })
        .collect();

    let mut exact_residual = 0.0f64;
    for f in 0..EXACT_FRAMES {
        let mut rng = seed::rng(&[cfg.seed, seed::stream::PSD, 2, f]);
        let bits = BitWord::random(shaped_code.k(), &mut rng);
        let x = encode(&assemble_source(&bits, &shaped_code)?)?;
        exact_residual = exact_residual.max(exact_null_residual(&x, spec.order(), cfg.modem.sps)?);
    }

    Ok(PsdReport {
        shaped,
        control,
        depths,
        threshold_db: cfg.psd.threshold_db,
        control_db: cfg.psd.control_db,
        exact_residual,
    })
}
