//! Code construction reports and the MCSC comparison table.

use std::io::Write;

use crate::cis::{format_index_set, CodeConfig};
use crate::construction::{
    estimate_symmetric_reliability, mcsc, select_cis_constrained, select_symmetric_in_cis, symbol_noise_variance,
    ReliabilityProfile,
};
use crate::error::Result;
use crate::sim::config::{Criterion, ExperimentConfig};
use crate::sim::fer::{Arm, ArmKind, Link};
use crate::sim::report::write_header;

/// Design SNR of `construct` and `psd` when the config leaves it unset.
pub const DEFAULT_DESIGN_SNR_DB: f64 = -2.0;

/// Reliability profile at a raw channel SNR (measured before any comb
/// filter) with the configured measurement band.
pub fn channel_profile(cfg: &ExperimentConfig, snr_db: f64, method_name: &str, trials: u64) -> Result<ReliabilityProfile> {
    let link = Link::new(cfg)?;
    let method = cfg.method(method_name, trials)?;
    estimate_symmetric_reliability(cfg.code.n, snr_db, symbol_noise_variance(snr_db, link.band_factor), &method)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructReport {
    pub profile: ReliabilityProfile,
    pub code: CodeConfig,
    pub criterion: Option<Criterion>,
    pub mcsc: f64,
}

impl ConstructReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_header(&mut w, "construct", "index,capacity,std_err,info,decoder")?;
        let info = self.code.info_indices();
        let dec = self.code.decoder_indices();
        for (i, c) in self.profile.capacity.iter().enumerate() {
            let se = self.profile.std_err.as_ref().map_or(String::new(), |s| format!("{:.3e}", s[i]));
            writeln!(
                w,
                "{i},{c:.6},{se},{},{}",
                u8::from(info.binary_search(&i).is_ok()),
                u8::from(dec.binary_search(&i).is_ok())
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let order = self.code.cis().map_or("conventional".to_string(), |s| s.order().to_string());
        let criterion = match self.criterion {
            Some(Criterion::CisConstrained) => "cis-constrained",
            Some(Criterion::Symmetric) => "symmetric",
            None => "symmetric (all indices)",
        };
        let mut s = format!(
            "N = {}, K = {}, order = {order}, criterion = {criterion}\n\
             design SNR = {} dB, method = {}, per-dimension noise variance = {:.5}\n\
             MCSC = {:.4}\nA = {{{}}}\nA_dec = {{{}}}\n",
            self.code.n(),
            self.code.k(),
            self.profile.snr_db,
            self.profile.method.name(),
            self.profile.noise_variance,
            self.mcsc,
            format_index_set(self.code.info_indices()),
            format_index_set(self.code.decoder_indices()),
        );
        if self.profile.low_trials {
            s.push_str("warning: fewer Monte-Carlo trials than recommended\n");
        }
        s
    }
}

/// Constructs the configured code at `construction.design_snr_db`.
pub fn construct(cfg: &ExperimentConfig) -> Result<ConstructReport> {
    cfg.validate()?;
    let snr = cfg.construction.design_snr_db.unwrap_or(DEFAULT_DESIGN_SNR_DB);
    let profile = channel_profile(cfg, snr, &cfg.construction.method, cfg.construction.trials)?;
    let arm = Arm::build(ArmKind::Configured, cfg, &profile)?;
    let criterion = arm.code.cis().map(|_| cfg.construction.criterion);
    Ok(ConstructReport {
        mcsc: mcsc(&arm.code, &profile)?,
        profile,
        code: arm.code,
        criterion,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct McscRow {
    pub rate: (usize, usize),
    pub k: usize,
    pub criterion: Criterion,
    pub mcsc: f64,
}

impl McscRow {
    pub fn criterion_name(&self) -> &'static str {
        match self.criterion {
            Criterion::CisConstrained => "cis-constrained",
            Criterion::Symmetric => "symmetric",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McscTable {
    pub profile: ReliabilityProfile,
    pub rows: Vec<McscRow>,
}

impl McscTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write_header(&mut w, "mcsc", "rate,k,criterion,mcsc")?;
        for r in &self.rows {
            writeln!(w, "{}/{},{},{},{:.4}", r.rate.0, r.rate.1, r.k, r.criterion_name(), r.mcsc)?;
        }
        Ok(())
    }

    pub fn get(&self, rate: (usize, usize), criterion: Criterion) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.rate == rate && r.criterion == criterion)
            .map(|r| r.mcsc)
    }
}

/// MCSC of the CIS-constrained and symmetric criteria for every configured
/// rate, on one profile at `mcsc.snr_db`.
pub fn mcsc_table(cfg: &ExperimentConfig) -> Result<McscTable> {
    cfg.validate()?;
    let spec = cfg.cis_spec()?;
    let profile = channel_profile(cfg, cfg.mcsc.snr_db, &cfg.mcsc.method, cfg.mcsc.trials)?;
    let mut rows = Vec::new();
    for &[num, den] in &cfg.mcsc.rates {
        let k = cfg.code.n * num / den;
        for criterion in [Criterion::CisConstrained, Criterion::Symmetric] {
            let code = match criterion {
                Criterion::CisConstrained => select_cis_constrained(&profile, k, &spec)?,
                Criterion::Symmetric => select_symmetric_in_cis(&profile, k, &spec)?,
            };
            rows.push(McscRow {
                rate: (num, den),
                k,
                criterion,
                mcsc: mcsc(&code, &profile)?,
            });
        }
    }
    Ok(McscTable { profile, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construct_conventional_and_comb() {
        let cfg = ExperimentConfig::from_toml("[code]\nn = 64\nk = 16\n[modem]\nsymbol_rate = 200.0").unwrap();
        let rep = construct(&cfg).unwrap();
        let spec = rep.code.cis().unwrap();
        assert!(rep.code.info_indices().iter().all(|&i| spec.contains(i)));
        assert!(rep.code.decoder_indices().iter().all(|&i| i >= 32));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# comb-polar construct v1\n"));
        assert_eq!(text.lines().count(), 66);

        let cfg = ExperimentConfig::from_toml("[code]\nn = 64\nk = 40\norder = \"conventional\"\n[modem]\nsymbol_rate = 200.0")
            .unwrap();
        let rep = construct(&cfg).unwrap();
        assert!(rep.code.cis().is_none());
        assert_eq!(rep.code.k(), 40);
    }

    #[test]
    fn mcsc_table_dominance_ga() {
        let cfg = ExperimentConfig::from_toml("[mcsc]\nmethod = \"ga\"").unwrap();
        let t = mcsc_table(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        for rate in [(1, 4), (5, 16), (3, 8)] {
            let c = t.get(rate, Criterion::CisConstrained).unwrap();
            let s = t.get(rate, Criterion::Symmetric).unwrap();
            assert!(c >= s, "{rate:?}: {c} < {s}");
        }
    }
}
