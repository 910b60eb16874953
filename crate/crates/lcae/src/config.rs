//! Run configuration file: one `key = value` per line, `#` starts a comment.
//! Unknown or repeated keys are errors. Command-line flags override keys.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use lcae_core::trainer::{BregmanRule, TrainConfig};
use lcae_core::LayerSizes;

use crate::error::{io_err, Error, Result};

macro_rules! run_config {
    ($($key:ident : $ty:ty => $doc:literal),* $(,)?) => {
        /// Every field is optional; unset fields fall back to defaults when
        /// the configuration is resolved.
        #[derive(Clone, Debug, Default, PartialEq)]
        pub struct RunConfig {
            $(#[doc = $doc] pub $key: Option<$ty>,)*
        }

        impl RunConfig {
            /// `(key, description)` for every accepted key.
            pub const KEYS: &'static [(&'static str, &'static str)] = &[$((stringify!($key), $doc)),*];

            fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
                match key {
                    $(stringify!($key) => {
                        if self.$key.is_some() {
                            return Err(Error::Config { line, msg: format!("key `{key}` given twice") });
                        }
                        self.$key = Some(parse_value(value).map_err(|msg| Error::Config {
                            line,
                            msg: format!("`{key}`: {msg}"),
                        })?);
                    })*
                    _ => return Err(Error::Config { line, msg: format!("unknown key `{key}`") }),
                }
                Ok(())
            }

            /// Fields set in `over` replace fields set here.
            pub fn overlay(self, over: RunConfig) -> RunConfig {
                RunConfig { $($key: over.$key.or(self.$key),)* }
            }
        }
    };
}

run_config! {
    lambda: f64 => "label-consistency weight (default 1.0)",
    mu1: f64 => "decoder-layer penalty weight (default 0.01)",
    mu2: f64 => "innermost-code penalty weight (default 0.01)",
    mu: f64 => "first-layer penalty weight (default 0.01)",
    ridge: f64 => "ridge added to every closed-form solve (default 1e-8)",
    logit_eps: f64 => "clamp before inverting the sigmoid (default 1e-6)",
    max_sweeps: usize => "maximum training sweeps (default 100)",
    tol: f64 => "relative objective change that stops training (default 1e-6)",
    bregman_rule: BregmanRule => "reflected | conventional (default reflected)",
    h1: usize => "outer hidden layer width",
    h2: usize => "inner hidden layer width",
    classes: usize => "number of classes (default: 1 + largest label)",
    seed: u64 => "seed for sensing generation and weight initialization",
    m: usize => "measurements per window",
    n: usize => "window length for sensing generation",
    d: usize => "ones per sensing column (default 2)",
    sample_rate: f64 => "sample rate of window files in Hz (default 250)",
    threads: usize => "worker threads for batch forward passes and baselines (default 1)",
    windows: PathBuf => "window CSV",
    phi: PathBuf => "sensing matrix file",
    model: PathBuf => "model file",
    out: PathBuf => "output file",
    log: PathBuf => "training log CSV",
}

trait ConfigValue: Sized {
    fn parse_config(s: &str) -> std::result::Result<Self, String>;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_config(s: &str) -> std::result::Result<Self, String> {
                <$t>::from_str(s).map_err(|e| format!("{s:?}: {e}"))
            }
        }
    )*};
}
from_str_value!(f64, usize, u64, PathBuf);

impl ConfigValue for BregmanRule {
    fn parse_config(s: &str) -> std::result::Result<Self, String> {
        parse_rule(s)
    }
}

pub fn parse_rule(s: &str) -> std::result::Result<BregmanRule, String> {
    match s {
        "reflected" => Ok(BregmanRule::Reflected),
        "conventional" => Ok(BregmanRule::Conventional),
        _ => Err(format!("{s:?} is not `reflected` or `conventional`")),
    }
}

fn parse_value<T: ConfigValue>(s: &str) -> std::result::Result<T, String> {
    T::parse_config(s)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim(), i + 1)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// Training parameters for windows of length `n`; `h1` and `h2` are
    /// required, `classes` falls back to `default_classes`.
    pub fn train_config(&self, n: usize, default_classes: usize) -> Result<TrainConfig> {
        let need = |v: Option<usize>, key: &str| {
            v.ok_or_else(|| Error::Invalid(format!("`{key}` is required for training")))
        };
        let sizes = LayerSizes::new(
            n,
            need(self.h1, "h1")?,
            need(self.h2, "h2")?,
            self.classes.unwrap_or(default_classes),
        )?;
        let mut c = TrainConfig::new(sizes);
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.mu1 {
            c.mu1 = v;
        }
        if let Some(v) = self.mu2 {
            c.mu2 = v;
        }
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.ridge {
            c.ridge = v;
        }
        if let Some(v) = self.logit_eps {
            c.logit_eps = v;
        }
        if let Some(v) = self.max_sweeps {
            c.max_sweeps = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.bregman_rule {
            c.bregman_rule = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}
