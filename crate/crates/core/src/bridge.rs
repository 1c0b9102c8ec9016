//! Transfers of symmetries between an SDE and its backward and forward
//! Kolmogorov equations. Each map refuses a source that fails its own check
//! and re-verifies the target before returning it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checks::{check_kbe_symmetry, check_kfe_symmetry, check_sde_symmetry, transfer_offset, CheckError, CheckReport};
use crate::expr::{Expr, SamplingConfig};
use crate::fields::VectorField;
use crate::model::{ModelError, SdeSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransferRule {
    #[serde(rename = "sde->kbe")]
    SdeToKbe,
    #[serde(rename = "integral->kbe")]
    IntegralToKbe,
    #[serde(rename = "kbe->kfe")]
    KbeToKfe,
    #[serde(rename = "kfe->kbe")]
    KfeToKbe,
    #[serde(rename = "sde->kfe")]
    SdeToKfe,
}

impl TransferRule {
    pub const ALL: [TransferRule; 5] = [
        TransferRule::SdeToKbe,
        TransferRule::IntegralToKbe,
        TransferRule::KbeToKfe,
        TransferRule::KfeToKbe,
        TransferRule::SdeToKfe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransferRule::SdeToKbe => "sde->kbe",
            TransferRule::IntegralToKbe => "integral->kbe",
            TransferRule::KbeToKfe => "kbe->kfe",
            TransferRule::KfeToKbe => "kfe->kbe",
            TransferRule::SdeToKfe => "sde->kfe",
        }
    }
}

impl fmt::Display for TransferRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TransferRule {
    type Err = String;
    fn from_str(s: &str) -> Result<TransferRule, String> {
        let key = s.replace('→', "->");
        TransferRule::ALL
            .into_iter()
            .find(|r| r.name() == key)
            .ok_or_else(|| format!("unknown rule `{s}` (expected sde->kbe, sde->kfe, kbe->kfe, kfe->kbe or integral->kbe)"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BridgeError {
    #[error("{rule}: source `{candidate}` does not pass its own check")]
    Refused {
        rule: TransferRule,
        candidate: String,
        report: Box<CheckReport>,
    },
    #[error("{rule}: image of `{candidate}` failed verification")]
    TargetFailed {
        rule: TransferRule,
        candidate: String,
        report: Box<CheckReport>,
    },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl BridgeError {
    /// The report that caused the refusal or failure, if any.
    pub fn report(&self) -> Option<&CheckReport> {
        match self {
            BridgeError::Refused { report, .. } | BridgeError::TargetFailed { report, .. } => Some(report),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub rule: TransferRule,
    pub candidate: String,
    /// For `integral->kbe` the source is `I u∂_u`.
    pub source: VectorField,
    pub target: VectorField,
    /// The multiplier computed for the target.
    pub auxiliary: Expr,
    pub source_report: CheckReport,
    pub target_report: CheckReport,
}

fn accept(rule: TransferRule, name: &str, report: CheckReport) -> Result<CheckReport, BridgeError> {
    if report.passed() {
        Ok(report)
    } else {
        Err(BridgeError::Refused {
            rule,
            candidate: name.to_string(),
            report: Box::new(report),
        })
    }
}

fn finish(
    rule: TransferRule,
    name: &str,
    source: &VectorField,
    target: VectorField,
    source_report: CheckReport,
    target_report: CheckReport,
) -> Result<TransferRecord, BridgeError> {
    if !target_report.passed() {
        return Err(BridgeError::TargetFailed {
            rule,
            candidate: name.to_string(),
            report: Box::new(target_report),
        });
    }
    Ok(TransferRecord {
        rule,
        candidate: name.to_string(),
        source: source.clone(),
        auxiliary: target.multiplier_or_zero(),
        target,
        source_report,
        target_report,
    })
}

fn with_multiplier(x: &VectorField, m: Expr) -> VectorField {
    VectorField {
        tau: x.tau.clone(),
        xi: x.xi.clone(),
        multiplier: Some(m),
        shift: None,
    }
}

/// SDE symmetry as a backward-equation symmetry with φ = 0.
pub fn sde_to_kbe(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<TransferRecord, BridgeError> {
    let rule = TransferRule::SdeToKbe;
    let src = accept(rule, name, check_sde_symmetry(s, x, name, cfg)?)?;
    let target = with_multiplier(x, Expr::zero());
    let rep = check_kbe_symmetry(&s.kbe(), &target, name, cfg)?;
    finish(rule, name, x, target, src, rep)
}

/// First integral `I` as the backward-equation symmetry `I u∂_u`.
pub fn integral_to_kbe(s: &SdeSystem, integral: &Expr, name: &str, cfg: &SamplingConfig) -> Result<TransferRecord, BridgeError> {
    let rule = TransferRule::IntegralToKbe;
    let src = accept(rule, name, s.check_first_integral(integral, name, cfg)?)?;
    let target = VectorField::zero(s.n()).with_multiplier(integral.normalize().map_err(CheckError::from)?);
    let rep = check_kbe_symmetry(&s.kbe(), &target, name, cfg)?;
    finish(rule, name, &target.clone(), target, src, rep)
}

/// `χ = D₀τ - τ_t - ξ_{i,i} - φ`.
pub fn kbe_to_kfe(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<TransferRecord, BridgeError> {
    let rule = TransferRule::KbeToKfe;
    let src = accept(rule, name, check_kbe_symmetry(&s.kbe(), x, name, cfg)?)?;
    let chi = (transfer_offset(s, x)? - x.multiplier_or_zero())
        .normalize()
        .map_err(CheckError::from)?;
    let target = with_multiplier(x, chi);
    let rep = check_kfe_symmetry(&s.kfe()?, &target, name, cfg)?;
    finish(rule, name, x, target, src, rep)
}

/// `φ = D₀τ - τ_t - ξ_{i,i} - χ`.
pub fn kfe_to_kbe(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<TransferRecord, BridgeError> {
    let rule = TransferRule::KfeToKbe;
    let src = accept(rule, name, check_kfe_symmetry(&s.kfe()?, x, name, cfg)?)?;
    let phi = (transfer_offset(s, x)? - x.multiplier_or_zero())
        .normalize()
        .map_err(CheckError::from)?;
    let target = with_multiplier(x, phi);
    let rep = check_kbe_symmetry(&s.kbe(), &target, name, cfg)?;
    finish(rule, name, x, target, src, rep)
}

/// `X + (D₀τ - τ_t - ξ_{i,i}) u∂_u` as a forward-equation symmetry.
pub fn sde_to_kfe(s: &SdeSystem, x: &VectorField, name: &str, cfg: &SamplingConfig) -> Result<TransferRecord, BridgeError> {
    let rule = TransferRule::SdeToKfe;
    let src = accept(rule, name, check_sde_symmetry(s, x, name, cfg)?)?;
    let target = with_multiplier(x, transfer_offset(s, x)?);
    let rep = check_kfe_symmetry(&s.kfe()?, &target, name, cfg)?;
    finish(rule, name, x, target, src, rep)
}

/// Dispatches on `rule`; for `integral->kbe` the integral is the multiplier of `x`.
pub fn transfer(
    rule: TransferRule,
    s: &SdeSystem,
    x: &VectorField,
    name: &str,
    cfg: &SamplingConfig,
) -> Result<TransferRecord, BridgeError> {
    match rule {
        TransferRule::SdeToKbe => sde_to_kbe(s, x, name, cfg),
        TransferRule::IntegralToKbe => integral_to_kbe(s, &x.multiplier_or_zero(), name, cfg),
        TransferRule::KbeToKfe => kbe_to_kfe(s, x, name, cfg),
        TransferRule::KfeToKbe => kfe_to_kbe(s, x, name, cfg),
        TransferRule::SdeToKfe => sde_to_kfe(s, x, name, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Context};
    use crate::fields::{equals_mod_x0, ModX0};

    fn gbm() -> SdeSystem {
        let ctx = Context::builder()
            .state("x")
            .param("alpha")
            .nonzero_param("sigma")
            .build()
            .unwrap();
        let f = parse("alpha*x", &ctx).unwrap();
        let g = parse("sigma*x", &ctx).unwrap();
        SdeSystem::new(ctx, vec![f], vec![vec![g]]).unwrap()
    }

    fn field(s: &SdeSystem, tau: &str, xi: &str, m: Option<&str>) -> VectorField {
        let ctx = s.ctx();
        let x = VectorField::new(parse(tau, ctx).unwrap(), vec![parse(xi, ctx).unwrap()]);
        match m {
            Some(m) => x.with_multiplier(parse(m, ctx).unwrap()),
            None => x,
        }
    }

    fn same(s: &SdeSystem, a: &Expr, b: &str) -> bool {
        (a - &parse(b, s.ctx()).unwrap()).normalize().unwrap().is_literal_zero()
    }

    #[test]
    fn rule_names_roundtrip() {
        for r in TransferRule::ALL {
            assert_eq!(r.name().parse::<TransferRule>().unwrap(), r);
        }
        assert_eq!("sde→kfe".parse::<TransferRule>().unwrap(), TransferRule::SdeToKfe);
        assert!("kfe->sde".parse::<TransferRule>().is_err());
    }

    #[test]
    fn gbm_y1_to_forward() {
        let s = gbm();
        let cfg = SamplingConfig::default();
        let y1 = field(&s, "0", "t*x", Some("-(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x))"));
        let rec = kbe_to_kfe(&s, &y1, "Y1", &cfg).unwrap();
        assert!(same(&s, &rec.auxiliary, "(1/sigma^2)*((alpha - sigma^2/2)*t - ln(x)) - t"));
        let back = kfe_to_kbe(&s, &rec.target, "Y1", &cfg).unwrap();
        assert_eq!(back.target.normalize().unwrap(), y1.normalize().unwrap());
    }

    #[test]
    fn gbm_x2_forward_offset() {
        let s = gbm();
        let cfg = SamplingConfig::default();
        let x2 = field(&s, "2*t", "(alpha - sigma^2/2)*t*x + x*ln(x)", None);
        let rec = sde_to_kfe(&s, &x2, "X2", &cfg).unwrap();
        assert!(same(&s, &rec.auxiliary, "-((alpha - sigma^2/2)*t + ln(x) + 1)"));
        let listed = field(&s, "2*t", "(alpha - sigma^2/2)*t*x + x*ln(x)", Some("-((alpha - sigma^2/2)*t + ln(x))"));
        let m = equals_mod_x0(&rec.target, &listed, s.ctx(), &cfg).unwrap();
        assert_eq!(m, ModX0::Equal { c: crate::expr::Rational::from_integer((-1).into()) });
    }

    #[test]
    fn x0_maps_to_minus_x0() {
        let s = gbm();
        let rec = kbe_to_kfe(&s, &VectorField::x0(1), "X0", &SamplingConfig::default()).unwrap();
        assert_eq!(rec.auxiliary, Expr::int(-1));
    }

    #[test]
    fn refuses_failing_sources() {
        let s = gbm();
        let cfg = SamplingConfig::default();
        let bad = field(&s, "0", "1", None);
        let err = sde_to_kbe(&s, &bad, "d_x", &cfg).unwrap_err();
        assert!(matches!(err, BridgeError::Refused { rule: TransferRule::SdeToKbe, .. }));
        assert!(err.report().is_some());
        let t = parse("t", s.ctx()).unwrap();
        assert!(matches!(integral_to_kbe(&s, &t, "t", &cfg), Err(BridgeError::Refused { .. })));
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let s = gbm();
        let rec = sde_to_kbe(&s, &VectorField::zero(1), "0", &SamplingConfig::default()).unwrap();
        assert!(rec.target.components().iter().all(Expr::is_literal_zero));
    }

    #[test]
    fn unit_integral_gives_x0() {
        let s = gbm();
        let rec = integral_to_kbe(&s, &Expr::one(), "1", &SamplingConfig::default()).unwrap();
        assert_eq!(rec.target, VectorField::x0(1));
    }
}
