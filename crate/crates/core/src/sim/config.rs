//! Experiment configuration.
//!
//! Configurations are TOML documents. Every section and key is optional and
//! defaults to the reference link: N = 256, K = 96, r derived from the link
//! parameters, SRRC with β = 0.25 at 800 Bd and 8 samples per symbol,
//! periodic interference with f_I = 50 Hz, B_I = 20 Hz, SIR -20 dB, and a
//! 20 Hz comb filter. Unknown keys are rejected.
//!
//! ```toml
//! seed = 1
//!
//! [code]
//! n = 256
//! k = 96
//! order = "auto"          # integer r, "auto", or "conventional"
//!
//! [construction]
//! criterion = "cis-constrained"   # or "symmetric"
//! method = "ga"                   # or "mc"
//! trials = 200000                 # Monte-Carlo trials
//! # design_snr_db = 1.0           # default: the simulated SNR, after the comb filter
//!
//! [decoder]
//! kind = "ccd"            # or "plain"
//! list_size = 8
//!
//! [modem]
//! symbol_rate = 800.0
//! sps = 8
//! rolloff = 0.25
//! span = 16
//!
//! [channel]
//! # band = [-500.0, 500.0]   # SNR/SIR measurement band; default: occupied band
//! interference = true
//! sir_db = -20.0
//! fundamental = 50.0
//! tone_bw = 20.0
//! offset = 25.0
//! model = "noise"         # or "sinusoid"
//!
//! [comb_filter]
//! enabled = true
//! notch_bw = 20.0
//!
//! [sweep]
//! snr_db = [0.0, 1.0, 2.0]
//! min_errors = 100
//! max_frames = 100000
//! arms = ["cp", "csp-nonc", "csp-c"]   # empty: the single arm described above
//!
//! [psd]
//! frames = 1000
//! segment = 16384
//! overlap = 8192
//! window = "hann"
//! threshold_db = 25.0
//! control_db = 6.0
//!
//! [mcsc]
//! snr_db = -2.0
//! rates = [[1, 4], [5, 16], [3, 8]]
//! method = "mc"
//! trials = 200000
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::channel::{Band, ChannelProfile, CombFilterSpec, InterferenceModel};
use crate::cis::CisSpec;
use crate::construction::{validate_params, Method};
use crate::error::{Error, Result};
use crate::modem::PulseSpec;
use crate::polar::log2_len;
use crate::spectral::{WelchParams, Window};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub code: CodeSection,
    pub construction: ConstructionSection,
    pub decoder: DecoderSection,
    pub modem: ModemSection,
    pub channel: ChannelSection,
    pub comb_filter: CombFilterSection,
    pub sweep: SweepSection,
    pub psd: PsdSection,
    pub mcsc: McscSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            code: CodeSection::default(),
            construction: ConstructionSection::default(),
            decoder: DecoderSection::default(),
            modem: ModemSection::default(),
            channel: ChannelSection::default(),
            comb_filter: CombFilterSection::default(),
            sweep: SweepSection::default(),
            psd: PsdSection::default(),
            mcsc: McscSection::default(),
        }
    }
}

/// CIS order as written in the config.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OrderField {
    Order(u32),
    Keyword(String),
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CodeSection {
    pub n: usize,
    pub k: usize,
    pub order: OrderField,
}

impl Default for CodeSection {
    fn default() -> Self {
        CodeSection {
            n: 256,
            k: 96,
            order: OrderField::Keyword("auto".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    CisConstrained,
    Symmetric,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructionSection {
    pub criterion: Criterion,
    pub method: String,
    pub trials: u64,
    pub design_snr_db: Option<f64>,
}

impl Default for ConstructionSection {
    fn default() -> Self {
        ConstructionSection {
            criterion: Criterion::CisConstrained,
            method: "ga".into(),
            trials: 200_000,
            design_snr_db: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Ccd,
    Plain,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderSection {
    pub kind: DecoderKind,
    pub list_size: usize,
}

impl Default for DecoderSection {
    fn default() -> Self {
        DecoderSection {
            kind: DecoderKind::Ccd,
            list_size: 8,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModemSection {
    pub symbol_rate: f64,
    pub sps: usize,
    pub rolloff: f64,
    pub span: usize,
}

impl Default for ModemSection {
    fn default() -> Self {
        ModemSection {
            symbol_rate: 800.0,
            sps: 8,
            rolloff: 0.25,
            span: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelField {
    Noise,
    Sinusoid,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub band: Option<[f64; 2]>,
    pub interference: bool,
    pub sir_db: f64,
    pub fundamental: f64,
    pub tone_bw: f64,
    pub offset: f64,
    pub model: ModelField,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            band: None,
            interference: true,
            sir_db: -20.0,
            fundamental: 50.0,
            tone_bw: 20.0,
            offset: 25.0,
            model: ModelField::Noise,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CombFilterSection {
    pub enabled: bool,
    pub notch_bw: f64,
}

impl Default for CombFilterSection {
    fn default() -> Self {
        CombFilterSection {
            enabled: true,
            notch_bw: 20.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_frames: u64,
    pub arms: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            snr_db: vec![0.0, 1.0, 2.0, 3.0],
            min_errors: 100,
            max_frames: 100_000,
            arms: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PsdSection {
    pub frames: usize,
    pub segment: usize,
    pub overlap: usize,
    pub window: String,
    pub threshold_db: f64,
    pub control_db: f64,
}

impl Default for PsdSection {
    fn default() -> Self {
        PsdSection {
            frames: 1000,
            segment: 16384,
            overlap: 8192,
            window: "hann".into(),
            threshold_db: 25.0,
            control_db: 6.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct McscSection {
    pub snr_db: f64,
    pub rates: Vec<[usize; 2]>,
    pub method: String,
    pub trials: u64,
}

impl Default for McscSection {
    fn default() -> Self {
        McscSection {
            snr_db: -2.0,
            rates: vec![[1, 4], [5, 16], [3, 8]],
            method: "mc".into(),
            trials: 200_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Checks every cross-field constraint.
    pub fn validate(&self) -> Result<()> {
        log2_len(self.code.n).map_err(|e| config_err(e.to_string()))?;
        if self.code.k == 0 || self.code.k > self.code.n {
            return Err(config_err(format!("K = {} must lie in 1..={}", self.code.k, self.code.n)));
        }
        self.pulse()?;
        if !(self.modem.symbol_rate > 0.0) {
            return Err(config_err("symbol rate must be positive"));
        }
        self.profile(f64::INFINITY, 0).validate().map_err(|e| config_err(e.to_string()))?;
        self.snr_band()?;
        if self.comb_filter.enabled && !(self.comb_filter.notch_bw > 0.0 && self.comb_filter.notch_bw < self.channel.fundamental) {
            return Err(config_err("notch bandwidth must lie in (0, f_I)"));
        }
        if self.decoder.list_size == 0 || !self.decoder.list_size.is_power_of_two() {
            return Err(config_err("list size must be a power of two"));
        }
        self.method(&self.construction.method, self.construction.trials)?;
        self.method(&self.mcsc.method, self.mcsc.trials)?;
        self.welch()?;
        if self.psd.frames == 0 {
            return Err(config_err("PSD needs at least one frame"));
        }
        for arm in &self.sweep.arms {
            crate::sim::fer::ArmKind::parse(arm)?;
        }
        if self.sweep.max_frames == 0 {
            return Err(config_err("max_frames must be positive"));
        }
        if self.sweep.snr_db.iter().any(|s| s.is_nan()) {
            return Err(config_err("SNR points must be numbers"));
        }
        for &[num, den] in &self.mcsc.rates {
            if den == 0 || num == 0 || (self.code.n * num) % den != 0 {
                return Err(config_err(format!("rate {num}/{den} does not give an integer K at N = {}", self.code.n)));
            }
        }
        if self.comb_order()?.is_some() && 2 * self.code.k > self.code.n {
            return Err(config_err(format!(
                "rate exceeds 1/2 under CIS (K = {}, N = {})",
                self.code.k, self.code.n
            )));
        }
        Ok(())
    }

    /// The CIS order of the configured code, or `None` for a conventional code.
    ///
    /// An explicit order must agree with the link separability constraint
    /// `N / (2 R_s / f_I) = 2^r`.
    pub fn comb_order(&self) -> Result<Option<u32>> {
        let check = validate_params(self.modem.symbol_rate, self.channel.fundamental, self.code.n)
            .map_err(|e| config_err(e.to_string()))?;
        let m = log2_len(self.code.n).map_err(|e| config_err(e.to_string()))?;
        let infeasible = || {
            config_err(format!(
                "N / (2 R_s / f_I) = {} must be a power of two in 1..=N/2 (N = {}, R_s = {}, f_I = {})",
                check.ratio, self.code.n, self.modem.symbol_rate, self.channel.fundamental
            ))
        };
        match &self.code.order {
            OrderField::Keyword(w) if w == "conventional" => Ok(None),
            OrderField::Keyword(w) if w == "auto" => check.recommended_order.map(Some).ok_or_else(infeasible),
            OrderField::Keyword(w) => Err(config_err(format!(
                "unknown code order {w:?} (expected an integer, \"auto\" or \"conventional\")"
            ))),
            OrderField::Order(r) => {
                if *r >= m {
                    return Err(config_err(format!("CIS order {r} out of range for N = {}", self.code.n)));
                }
                match check.recommended_order {
                    Some(rec) if rec == *r => Ok(Some(*r)),
                    Some(rec) => Err(config_err(format!(
                        "CIS order {r} inconsistent with the link: N / (2 R_s / f_I) = {} gives r = {rec}",
                        check.ratio
                    ))),
                    None => Err(infeasible()),
                }
            }
        }
    }

    /// CIS spec used by comb-shaping arms: the configured order, or the one
    /// recommended by the link when the configured code is conventional.
    pub fn cis_spec(&self) -> Result<CisSpec> {
        let r = match self.comb_order()? {
            Some(r) => r,
            None => validate_params(self.modem.symbol_rate, self.channel.fundamental, self.code.n)?
                .recommended_order
                .ok_or_else(|| config_err("link parameters admit no CIS order"))?,
        };
        CisSpec::new(self.code.n, r)
    }

    pub fn pulse(&self) -> Result<PulseSpec> {
        PulseSpec::new(self.modem.rolloff, self.modem.span, self.modem.sps).map_err(|e| config_err(e.to_string()))
    }

    pub fn sample_rate(&self) -> f64 {
        self.modem.symbol_rate * self.modem.sps as f64
    }

    /// Measurement band for SNR and SIR.
    pub fn snr_band(&self) -> Result<Band> {
        match self.channel.band {
            Some([lo, hi]) => {
                let b = Band::new(lo, hi).map_err(|e| config_err(e.to_string()))?;
                let half = self.sample_rate() / 2.0;
                if lo < -half || hi > half {
                    return Err(config_err(format!("band [{lo}, {hi}] exceeds [-fs/2, fs/2]")));
                }
                Ok(b)
            }
            None => Ok(Band::occupied(self.modem.rolloff, self.modem.symbol_rate)),
        }
    }

    /// Channel profile for one frame.
    pub fn profile(&self, snr_db: f64, seed: u64) -> ChannelProfile {
        ChannelProfile {
            snr_db,
            sir_db: self.channel.interference.then_some(self.channel.sir_db),
            fundamental: self.channel.fundamental,
            tone_bw: self.channel.tone_bw,
            offset: self.channel.offset,
            model: match self.channel.model {
                ModelField::Noise => InterferenceModel::Noise,
                ModelField::Sinusoid => InterferenceModel::Sinusoid,
            },
            seed,
        }
    }

    pub fn comb(&self) -> Option<CombFilterSpec> {
        self.comb_filter.enabled.then(|| {
            CombFilterSpec::periodic(
                self.channel.offset,
                self.channel.fundamental,
                self.comb_filter.notch_bw,
                self.sample_rate(),
            )
        })
    }

    pub fn method(&self, name: &str, trials: u64) -> Result<Method> {
        Method::parse(name, trials, crate::seed::derive(&[self.seed, crate::seed::stream::CONSTRUCTION]))
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn welch(&self) -> Result<WelchParams> {
        let p = WelchParams {
            segment: self.psd.segment,
            overlap: self.psd.overlap,
            window: Window::parse(&self.psd.window).map_err(|e| config_err(e.to_string()))?,
        };
        p.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(p)
    }
}
