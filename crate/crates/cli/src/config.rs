//! Flag resolution: explicit flags override presets, presets override
//! defaults. All combinations are validated before any work starts.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};

use diagssm::init::{init_b_perturbed, init_c, init_log_dt, DEFAULT_DT_MAX, DEFAULT_DT_MIN};
use diagssm::{DiagonalSpec, InitKind, Pairing, RealPartMode, Rule, C64};

/// Scale of the random part of `B` when emulating a trained input map.
pub const TRAINED_B_SCALE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Bilinear, exp real part, trainable B, plain Vandermonde kernel.
    S4d,
    /// ZOH, softmax normalization, frozen B, unconstrained real part.
    Dss,
    /// S4D with ZOH.
    S4dZoh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiscArg {
    Bilinear,
    Zoh,
}

impl From<DiscArg> for Rule {
    fn from(d: DiscArg) -> Self {
        match d {
            DiscArg::Bilinear => Rule::Bilinear,
            DiscArg::Zoh => Rule::Zoh,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RealPartArg {
    Exp,
    Relu,
    Identity,
}

impl From<RealPartArg> for RealPartMode {
    fn from(r: RealPartArg) -> Self {
        match r {
            RealPartArg::Exp => RealPartMode::Exp,
            RealPartArg::Relu => RealPartMode::Relu,
            RealPartArg::Identity => RealPartMode::Identity,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SeedArgs {
    /// Random seed (falls back to SSM_SEED, then 0).
    #[arg(long, env = "SSM_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct OutputArgs {
    /// Output file (stdout when omitted). Written atomically.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    /// Initialization: legsd, inv, lin, inv2, quad, real, rand, inv-rimag, lin-rimag.
    #[arg(long, default_value = "legsd")]
    pub init: String,
    /// State size.
    #[arg(long = "N", short = 'n', default_value_t = 64)]
    pub n: usize,
    /// Fixed timescale; overrides the random draw from [dt-min, dt-max].
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DT_MIN)]
    pub dt_min: f64,
    #[arg(long, default_value_t = DEFAULT_DT_MAX)]
    pub dt_max: f64,
    #[arg(long, value_enum)]
    pub disc: Option<DiscArg>,
    /// Real-part parameterization, checked against the initialization.
    #[arg(long, value_enum)]
    pub real_part: Option<RealPartArg>,
    /// Normalize each mode by its Vandermonde row sum (requires ZOH).
    #[arg(long)]
    pub softmax: bool,
    /// Keep B at all ones instead of emulating a trained B.
    #[arg(long)]
    pub frozen_b: bool,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub seed: SeedArgs,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Fully resolved model configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub init: InitKind,
    pub n: usize,
    pub dt: Option<f64>,
    pub dt_min: f64,
    pub dt_max: f64,
    pub seed: u64,
    pub rule: Rule,
    pub real_part: RealPartMode,
    pub trainable_b: bool,
    pub softmax: bool,
    pub preset: Option<Preset>,
}

impl RunConfig {
    pub fn resolve(args: &ModelArgs) -> Result<Self, UsageError> {
        let init: InitKind = args
            .init
            .parse()
            .map_err(|e: diagssm::Error| UsageError(e.to_string()))?;
        let (rule, real_part, trainable_b, softmax) = match args.preset {
            None | Some(Preset::S4d) => (Rule::Bilinear, RealPartMode::Exp, true, false),
            Some(Preset::S4dZoh) => (Rule::Zoh, RealPartMode::Exp, true, false),
            Some(Preset::Dss) => (Rule::Zoh, RealPartMode::Identity, false, true),
        };
        let cfg = RunConfig {
            init,
            n: args.n,
            dt: args.dt,
            dt_min: args.dt_min,
            dt_max: args.dt_max,
            seed: args.seed.seed,
            rule: args.disc.map(Rule::from).unwrap_or(rule),
            real_part: args.real_part.map(RealPartMode::from).unwrap_or(real_part),
            trainable_b: trainable_b && !args.frozen_b,
            softmax: softmax || args.softmax,
            preset: args.preset,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.n == 0 {
            return Err(UsageError("--N must be positive".into()));
        }
        if self.init != InitKind::Real && self.n % 2 == 1 {
            return Err(UsageError(format!(
                "--init {} stores conjugate pairs and needs an even --N, got {}",
                self.init, self.n
            )));
        }
        if self.softmax && self.rule != Rule::Zoh {
            return Err(UsageError(
                "--softmax requires --disc zoh: softmax normalization belongs to the DSS \
                 parameterization, whose discretization is ZOH; bilinear is the S4/S4D choice"
                    .into(),
            ));
        }
        match self.dt {
            Some(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(UsageError(format!("--dt must be positive, got {dt}")));
            }
            None if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) => {
                return Err(UsageError(format!(
                    "need 0 < --dt-min <= --dt-max, got {} and {}",
                    self.dt_min, self.dt_max
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds the spec with `B`, `C` and `log dt` initialized and the real
    /// parts passed through the chosen parameterization.
    pub fn build_spec(&self) -> diagssm::Result<DiagonalSpec> {
        let spec = self.init.build(self.n, self.seed)?;
        let len = spec.len();
        let b = if self.trainable_b {
            let b = init_b_perturbed(len, TRAINED_B_SCALE, self.seed);
            match spec.pairing {
                Pairing::Conjugate => b,
                Pairing::Real => b.iter().map(|z| C64::new(z.re, 0.0)).collect(),
            }
        } else {
            spec.b.clone()
        };
        let log_dt = match self.dt {
            Some(dt) => dt.ln(),
            None => init_log_dt(self.dt_min, self.dt_max, self.seed)?,
        };
        let param = spec.check_real_parts(self.real_part)?;
        let mut spec = spec.with_b(b)?.with_c(init_c(len, self.seed))?.with_log_dt(log_dt);
        for (a, re) in spec.a.iter_mut().zip(param.effective()) {
            a.re = re;
        }
        Ok(spec)
    }

    pub fn meta(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("seed".to_string(), self.seed.to_string()),
            ("real_part".to_string(), self.real_part.to_string()),
            ("trainable_b".to_string(), self.trainable_b.to_string()),
            ("softmax".to_string(), self.softmax.to_string()),
        ];
        if let Some(p) = self.preset {
            let name = p.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            m.push(("preset".to_string(), name));
        }
        m
    }
}
