//! Zero testing: exact canonical form first, seeded numeric sampling second.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canon, eval_numeric, Context, Env, EvalError, Expr, ExprError, Node, SymbolRole};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Canonical form decides; sampling only supplies the witness.
    Symbolic,
    /// Canonical form is never consulted.
    Numeric,
    /// Canonical form first, sampling when it does not reduce to zero.
    #[default]
    Both,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "symbolic" => Ok(Mode::Symbolic),
            "numeric" => Ok(Mode::Numeric),
            "both" => Ok(Mode::Both),
            _ => Err(format!("unknown mode `{s}` (expected symbolic, numeric or both)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Symbolic => "symbolic",
            Mode::Numeric => "numeric",
            Mode::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub mode: Mode,
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
    pub time_range: (f64, f64),
    pub state_range: (f64, f64),
    pub param_range: (f64, f64),
    /// Per-symbol ranges; take precedence over everything else.
    pub ranges: BTreeMap<String, (f64, f64)>,
    /// Redraws allowed per point after a domain error.
    pub max_retries: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            mode: Mode::Both,
            points: 100,
            tol: 1e-9,
            seed: 42,
            time_range: (0.1, 2.0),
            state_range: (0.5, 2.0),
            param_range: (0.5, 2.0),
            ranges: BTreeMap::new(),
            max_retries: 50,
        }
    }
}

impl SamplingConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ZeroError> {
        if self.points == 0 {
            return Err(ZeroError::Config("point count must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ZeroError::Config("tolerance must be positive".into()));
        }
        let all = [self.time_range, self.state_range, self.param_range]
            .into_iter()
            .chain(self.ranges.values().copied());
        for (lo, hi) in all {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ZeroError::Config(format!("invalid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub(crate) fn range_for(&self, name: &str, ctx: &Context) -> (f64, f64) {
        if let Some(r) = self.ranges.get(name) {
            return *r;
        }
        match ctx.role(name) {
            Some(SymbolRole::Time) => self.time_range,
            Some(SymbolRole::Param) => ctx
                .param(name)
                .and_then(|p| p.range)
                .unwrap_or(self.param_range),
            _ => self.state_range,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    pub value: f64,
    /// `|value| / (1 + largest term magnitude)`, the quantity compared to the tolerance.
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroVerdict {
    ZeroSymbolic,
    ZeroNumeric,
    Nonzero { witness: Witness },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::Nonzero { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            ZeroVerdict::Nonzero { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ZeroSymbolic => "ZERO_SYMBOLIC",
            ZeroVerdict::ZeroNumeric => "ZERO_NUMERIC",
            ZeroVerdict::Nonzero { .. } => "NONZERO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroError {
    #[error("invalid sampling configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("no valid sample point after {retries} redraws: {last}")]
    Domain { retries: usize, last: EvalError },
}

/// Decides whether `e` vanishes identically.
pub fn is_zero(e: &Expr, ctx: &Context, cfg: &SamplingConfig) -> Result<ZeroVerdict, ZeroError> {
    cfg.validate()?;
    if cfg.mode != Mode::Numeric && canon::canonical(e)?.is_zero() {
        return Ok(ZeroVerdict::ZeroSymbolic);
    }
    let samples = sample(e, ctx, cfg)?;
    if let Some(w) = samples.iter().find(|w| w.relative > cfg.tol) {
        return Ok(ZeroVerdict::Nonzero { witness: w.clone() });
    }
    if cfg.mode == Mode::Symbolic {
        // Canonically nonzero but numerically tiny: report the largest deviation.
        let w = samples
            .into_iter()
            .max_by(|a, b| a.relative.total_cmp(&b.relative))
            .expect("at least one point");
        return Ok(ZeroVerdict::Nonzero { witness: w });
    }
    Ok(ZeroVerdict::ZeroNumeric)
}

fn evaluate_scaled(e: &Expr, env: &Env) -> Result<(f64, f64), EvalError> {
    match e.node() {
        Node::Add(ts) => {
            let mut sum = 0.0;
            let mut largest: f64 = 0.0;
            for t in ts {
                let v = eval_numeric(t, env)?;
                sum += v;
                largest = largest.max(v.abs());
            }
            Ok((sum, largest))
        }
        _ => {
            let v = eval_numeric(e, env)?;
            Ok((v, v.abs()))
        }
    }
}

/// Evaluates `e` at `cfg.points` seeded random points, redrawing on domain errors.
pub fn sample(e: &Expr, ctx: &Context, cfg: &SamplingConfig) -> Result<Vec<Witness>, ZeroError> {
    let symbols: Vec<String> = e.free_symbols().into_iter().collect();
    let ranges: Vec<(f64, f64)> = symbols.iter().map(|s| cfg.range_for(s, ctx)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut env = Env {
        atom_seed: cfg.seed,
        ..Env::default()
    };
    let mut out = Vec::with_capacity(cfg.points);
    for _ in 0..cfg.points {
        let mut tries = 0;
        loop {
            for (s, (lo, hi)) in symbols.iter().zip(&ranges) {
                let v = if lo == hi { *lo } else { rng.gen_range(*lo..=*hi) };
                env.set(s, v);
            }
            match evaluate_scaled(e, &env) {
                Ok((value, largest)) => {
                    let point = symbols.iter().map(|s| (s.clone(), env.vars[s])).collect();
                    out.push(Witness {
                        point,
                        value,
                        relative: value.abs() / (1.0 + largest),
                    });
                    break;
                }
                Err(err) => {
                    tries += 1;
                    if tries > cfg.max_retries {
                        return Err(ZeroError::Domain { retries: cfg.max_retries, last: err });
                    }
                }
            }
        }
    }
    Ok(out)
}
