//! Regression targets, all scaled to `[-1, 1]` over `x` in `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetFunction {
    Step,
    Identity,
    Relu,
    Exp,
    Log,
    Poly4,
    SinSum4,
    CallOption,
}

/// Strike of the call option; the underlying ranges over `[50, 150]`.
pub const STRIKE: f64 = 100.0;
const SPOT_MIN: f64 = 50.0;
const SPOT_MAX: f64 = 150.0;
const SIN_WEIGHTS: [f64; 4] = [0.4, 0.3, 0.2, 0.1];

impl TargetFunction {
    /// The seven shapes used in the mutation study.
    pub const STUDY: [TargetFunction; 7] = [
        TargetFunction::Step,
        TargetFunction::Identity,
        TargetFunction::Relu,
        TargetFunction::Exp,
        TargetFunction::Log,
        TargetFunction::Poly4,
        TargetFunction::SinSum4,
    ];

    pub const ALL: [TargetFunction; 8] = [
        TargetFunction::Step,
        TargetFunction::Identity,
        TargetFunction::Relu,
        TargetFunction::Exp,
        TargetFunction::Log,
        TargetFunction::Poly4,
        TargetFunction::SinSum4,
        TargetFunction::CallOption,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetFunction::Step => "step",
            TargetFunction::Identity => "identity",
            TargetFunction::Relu => "relu",
            TargetFunction::Exp => "exp",
            TargetFunction::Log => "log",
            TargetFunction::Poly4 => "poly4",
            TargetFunction::SinSum4 => "sin_sum4",
            TargetFunction::CallOption => "call_option",
        }
    }

    /// The formula as recorded in run metadata.
    pub fn formula(self) -> &'static str {
        match self {
            TargetFunction::Step => "x < 0.5 ? -1 : 1",
            TargetFunction::Identity => "2x - 1",
            TargetFunction::Relu => "2 max(0, 2x - 1) - 1",
            TargetFunction::Exp => "exp(3x) mapped affinely from [1, e^3]",
            TargetFunction::Log => "ln(x + 0.05) mapped affinely from [ln 0.05, ln 1.05]",
            TargetFunction::Poly4 => "2 (2x - 1)^4 - 1",
            TargetFunction::SinSum4 => {
                "sum_k w_k sin(2 pi k x), w = (0.4, 0.3, 0.2, 0.1), mapped affinely from its range"
            }
            TargetFunction::CallOption => "max(0, s - 100) / 25 - 1 with s = 50 + 100x",
        }
    }

    /// The scaled target value at `x` in `[0, 1]`.
    pub fn eval(self, x: f64) -> f64 {
        let y = match self {
            TargetFunction::Step => {
                if x < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            TargetFunction::Identity => 2.0 * x - 1.0,
            TargetFunction::Relu => 2.0 * (2.0 * x - 1.0).max(0.0) - 1.0,
            TargetFunction::Exp => rescale((3.0 * x).exp(), 1.0, 3f64.exp()),
            TargetFunction::Log => rescale((x + 0.05).ln(), 0.05f64.ln(), 1.05f64.ln()),
            TargetFunction::Poly4 => 2.0 * (2.0 * x - 1.0).powi(4) - 1.0,
            TargetFunction::SinSum4 => {
                let (lo, hi) = sin_sum_range();
                rescale(sin_sum(x), lo, hi)
            }
            TargetFunction::CallOption => {
                let payoff = (spot(x) - STRIKE).max(0.0);
                rescale(payoff, 0.0, SPOT_MAX - STRIKE)
            }
        };
        y.clamp(-1.0, 1.0)
    }

    /// `n` equidistant support points on `[0, 1]`, endpoints included.
    pub fn dataset(self, n: usize) -> Result<Dataset> {
        Dataset::sample(|x| self.eval(x), n)
    }
}

/// Underlying price for a scaled abscissa.
pub fn spot(x: f64) -> f64 {
    SPOT_MIN + (SPOT_MAX - SPOT_MIN) * x
}

fn rescale(y: f64, lo: f64, hi: f64) -> f64 {
    2.0 * (y - lo) / (hi - lo) - 1.0
}

fn sin_sum(x: f64) -> f64 {
    SIN_WEIGHTS
        .iter()
        .enumerate()
        .map(|(k, w)| w * (2.0 * PI * (k + 1) as f64 * x).sin())
        .sum()
}

fn sin_sum_range() -> (f64, f64) {
    static RANGE: std::sync::OnceLock<(f64, f64)> = std::sync::OnceLock::new();
    *RANGE.get_or_init(|| {
        let n = 100_000;
        (0..=n).map(|i| sin_sum(i as f64 / n as f64)).fold((f64::MAX, f64::MIN), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        })
    })
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        TargetFunction::ALL
            .into_iter()
            .find(|t| t.name() == key || (key == "sinsum4" && *t == TargetFunction::SinSum4))
            .ok_or_else(|| Error::UnknownTarget(s.to_string()))
    }
}

/// Looks a target up by name, e.g. `"call_option"`.
pub fn target(name: &str) -> Result<TargetFunction> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_midpoint_is_zero() {
        assert_eq!(TargetFunction::Identity.eval(0.5), 0.0);
    }

    #[test]
    fn call_option_at_the_strike() {
        assert_eq!(spot(0.5), 100.0);
        assert_eq!(TargetFunction::CallOption.eval(0.5), -1.0);
        assert_eq!(TargetFunction::CallOption.eval(1.0), 1.0);
        assert!((TargetFunction::CallOption.eval(0.75) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn step_jumps_in_the_middle() {
        assert_eq!(TargetFunction::Step.eval(0.49), -1.0);
        assert_eq!(TargetFunction::Step.eval(0.51), 1.0);
    }

    #[test]
    fn all_targets_span_the_unit_interval() {
        for t in TargetFunction::ALL {
            let d = t.dataset(401).unwrap();
            let lo = d.points.iter().map(|p| p.1).fold(f64::MAX, f64::min);
            let hi = d.points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
            assert!(lo >= -1.0 && hi <= 1.0, "{t}");
            assert!(lo < -0.99 && hi > 0.99, "{t}: [{lo}, {hi}]");
        }
    }

    #[test]
    fn names_round_trip() {
        for t in TargetFunction::ALL {
            assert_eq!(target(t.name()).unwrap(), t);
        }
        assert_eq!(target("Call-Option").unwrap(), TargetFunction::CallOption);
        assert!(matches!(target("cosine"), Err(Error::UnknownTarget(_))));
    }
}
