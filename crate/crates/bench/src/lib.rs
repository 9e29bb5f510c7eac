//! Fixtures shared by the solver benchmarks.

use hbfsim_core::{
    generate_channel, ChannelRealization, LinkBudget, PowerParams, SolverConfig, SolverInput, SystemConfig,
};

/// A single channel draw plus everything needed to call `run_solver`.
pub struct Fixture {
    pub cfg: SystemConfig,
    pub channel: ChannelRealization,
    pub link: LinkBudget,
    pub pp: PowerParams,
    pub scfg: SolverConfig,
}

impl Fixture {
    /// Default 64x16 system at the given SNR.
    pub fn full_scale(snr_db: f64, seed: u64) -> Self {
        Self::with_config(SystemConfig::default(), snr_db, seed)
    }

    /// 16x4 system with 8 phase shifters.
    pub fn small(snr_db: f64, seed: u64) -> Self {
        let cfg = SystemConfig {
            n_t: 16,
            n_r: 4,
            n_trf: 4,
            n_ps: 8,
            n_s: 2,
            ..SystemConfig::default()
        };
        Self::with_config(cfg, snr_db, seed)
    }

    pub fn with_config(cfg: SystemConfig, snr_db: f64, seed: u64) -> Self {
        let channel = generate_channel(&cfg, cfg.paths, seed).expect("valid benchmark configuration");
        Fixture {
            cfg,
            channel,
            link: LinkBudget::from_snr_db(snr_db),
            pp: PowerParams::default(),
            scfg: SolverConfig { seed, ..SolverConfig::default() },
        }
    }

    pub fn input(&self) -> SolverInput<'_> {
        SolverInput {
            design_channel: &self.channel.h,
            paths: Some(&self.channel.paths),
            cfg: &self.cfg,
            link: self.link,
            pp: &self.pp,
            scfg: &self.scfg,
        }
    }
}
