//! Inter-event-time laws used by the synthetic spreading modes: a power law
//! and a shifted exponential sharing the same support [t_min, inf).

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::rng::unit_open_closed;

#[derive(Debug, Clone, PartialEq)]
pub enum IetError {
    InvalidParams(String),
    /// Power law with alpha <= 1 has a divergent mean.
    UndefinedMean,
    Parse(String),
}

impl fmt::Display for IetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IetError::InvalidParams(s) => write!(f, "invalid distribution parameters: {s}"),
            IetError::UndefinedMean => write!(f, "power law with alpha <= 1 has no finite mean"),
            IetError::Parse(s) => write!(f, "cannot parse distribution spec: {s}"),
        }
    }
}

impl core::error::Error for IetError {}

/// Inter-event-time distribution with support [t_min, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IetDistribution {
    /// Density t_min^alpha * alpha / t^(alpha+1) for t >= t_min.
    PowerLaw { t_min: f64, alpha: f64 },
    /// Exponential shifted to start at t_min with mean lambda.
    ShiftedExp { t_min: f64, lambda: f64 },
}

impl IetDistribution {
    pub fn power_law(t_min: f64, alpha: f64) -> Result<Self, IetError> {
        if !(t_min > 0.0) || !(alpha > 0.0) {
            return Err(IetError::InvalidParams(format!(
                "power law needs t_min > 0 and alpha > 0, got t_min={t_min}, alpha={alpha}"
            )));
        }
        Ok(IetDistribution::PowerLaw { t_min, alpha })
    }

    pub fn shifted_exp(t_min: f64, lambda: f64) -> Result<Self, IetError> {
        if !(t_min > 0.0) || !(lambda > t_min) {
            return Err(IetError::InvalidParams(format!(
                "shifted exponential needs 0 < t_min < lambda, got t_min={t_min}, lambda={lambda}"
            )));
        }
        Ok(IetDistribution::ShiftedExp { t_min, lambda })
    }

    /// Draws one inter-event time by inverse-CDF sampling.
    ///
    /// U is drawn from (0, 1] so the power-law inversion never divides by
    /// zero; the result is always >= t_min.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> f64 {
        let u = unit_open_closed(rng);
        self.quantile_of_survival(u)
    }

    /// Inverse survival function: the t with P(X > t) = u, u in (0, 1].
    pub fn quantile_of_survival(&self, u: f64) -> f64 {
        match *self {
            IetDistribution::PowerLaw { t_min, alpha } => t_min * libm::pow(u, -1.0 / alpha),
            IetDistribution::ShiftedExp { t_min, lambda } => {
                t_min + (lambda - t_min) * -libm::log(u)
            }
        }
    }

    /// Analytic mean; `Err(UndefinedMean)` for a power law with alpha <= 1.
    pub fn analytic_mean(&self) -> Result<f64, IetError> {
        match *self {
            IetDistribution::PowerLaw { t_min, alpha } => {
                if alpha <= 1.0 {
                    Err(IetError::UndefinedMean)
                } else {
                    Ok(t_min * alpha / (alpha - 1.0))
                }
            }
            IetDistribution::ShiftedExp { lambda, .. } => Ok(lambda),
        }
    }

    /// The shifted exponential with the same t_min and the same mean.
    pub fn match_mean(&self) -> Result<IetDistribution, IetError> {
        match *self {
            IetDistribution::PowerLaw { t_min, .. } => {
                IetDistribution::shifted_exp(t_min, self.analytic_mean()?)
            }
            IetDistribution::ShiftedExp { .. } => Ok(*self),
        }
    }

    /// Parses the config grammar: `pow:t_min:alpha`, `exp:t_min:lambda` or
    /// `exp:match:pow:t_min:alpha`.
    pub fn parse(spec: &str) -> Result<IetDistribution, IetError> {
        let parts: alloc::vec::Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64, IetError> {
            s.parse::<f64>()
                .map_err(|_| IetError::Parse(format!("bad number `{s}` in `{spec}`")))
        };
        match parts.as_slice() {
            ["pow", t_min, alpha] => IetDistribution::power_law(num(t_min)?, num(alpha)?),
            ["exp", "match", "pow", t_min, alpha] => {
                IetDistribution::power_law(num(t_min)?, num(alpha)?)?.match_mean()
            }
            ["exp", t_min, lambda] => IetDistribution::shifted_exp(num(t_min)?, num(lambda)?),
            _ => Err(IetError::Parse(format!(
                "expected pow:t_min:alpha, exp:t_min:lambda or exp:match:pow:t_min:alpha, got `{spec}`"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            IetDistribution::PowerLaw { t_min, alpha } => format!("pow:{t_min}:{alpha}"),
            IetDistribution::ShiftedExp { t_min, lambda } => format!("exp:{t_min}:{lambda}"),
        }
    }
}
