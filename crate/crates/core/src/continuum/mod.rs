//! Continuum Sender-Receiver game on `Θ = [0, 1]`, `A = [-b, 1 + b]`.
//!
//! The Receiver's ex-post utility is `f(a - θ)` and the Sender's is
//! `f(a - θ - b)` for a strictly concave loss `f` with `f'(0) = 0`.

mod discretize;
mod punish;
mod step;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::PayoffProfile;
use crate::optim::{bisect, integrate_with_breaks};

pub use discretize::discretize;
pub use punish::{
    certify_cs, lambda_bar, receiver_punishment_value, receiver_punishment_y, sender_punishment_value,
    sender_punishment_x, CsCertificate, CsOutcome, ReceiverPunishmentY, SenderPunishmentX,
};
pub use step::{shift_check, Cell, Response, StepProfile};

/// Quadrature tolerance for all continuum integrals.
pub const QUAD_TOL: f64 = 1e-13;
/// Bisection tolerance for all continuum root finding.
pub const ROOT_TOL: f64 = 1e-13;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Loss function `f` together with its derivative.
#[derive(Clone)]
pub struct LossFunction {
    f: ScalarFn,
    df: ScalarFn,
    quadratic: bool,
}

impl LossFunction {
    /// `f(x) = -x²`.
    pub fn quadratic() -> Self {
        LossFunction { f: Arc::new(|x| -x * x), df: Arc::new(|x| -2.0 * x), quadratic: true }
    }

    /// A user-supplied strictly concave `f` with derivative `df`.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LossFunction { f: Arc::new(f), df: Arc::new(df), quadratic: false }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic
    }
}

impl fmt::Debug for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.quadratic { "LossFunction(-x^2)" } else { "LossFunction(custom)" })
    }
}

/// Prior density on `[0, 1]`.
#[derive(Clone)]
pub struct PriorDensity {
    g: ScalarFn,
    uniform: bool,
}

impl PriorDensity {
    pub fn uniform() -> Self {
        PriorDensity { g: Arc::new(|_| 1.0), uniform: true }
    }

    pub fn custom(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PriorDensity { g: Arc::new(g), uniform: false }
    }

    #[inline]
    pub fn density(&self, theta: f64) -> f64 {
        (self.g)(theta)
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

impl fmt::Debug for PriorDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.uniform { "PriorDensity(uniform)" } else { "PriorDensity(custom)" })
    }
}

#[derive(Debug, Clone)]
pub struct ContinuumSpec {
    bias: f64,
    loss: LossFunction,
    prior: PriorDensity,
}

impl ContinuumSpec {
    /// Quadratic loss and uniform prior.
    pub fn new(bias: f64) -> Result<Self> {
        Self::with(bias, LossFunction::quadratic(), PriorDensity::uniform())
    }

    pub fn with(bias: f64, loss: LossFunction, prior: PriorDensity) -> Result<Self> {
        if !(bias > 0.0 && bias < 1.0) {
            return Err(Error::invalid_at(format!("bias must lie in (0, 1), got {bias}"), "bias"));
        }
        if loss.value(0.0).abs() > 1e-12 || loss.slope(0.0).abs() > 1e-12 {
            return Err(Error::invalid_at("loss must satisfy f(0) = 0 and f'(0) = 0", "lossFunction"));
        }
        for k in 0..=64 {
            let theta = k as f64 / 64.0;
            let g = prior.density(theta);
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid_at(
                    format!("prior density must be positive and finite, got {g} at theta = {theta}"),
                    "priorDensity",
                ));
            }
        }
        let spec = ContinuumSpec { bias, loss, prior };
        let mass = spec.prior_mass(0.0, 1.0)?;
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::invalid_at(format!("prior density must integrate to 1, got {mass}"), "priorDensity"));
        }
        Ok(spec)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn loss(&self) -> &LossFunction {
        &self.loss
    }

    pub fn prior(&self) -> &PriorDensity {
        &self.prior
    }

    pub fn is_uniform_quadratic(&self) -> bool {
        self.loss.is_quadratic() && self.prior.is_uniform()
    }

    pub fn u_sender(&self, action: f64, theta: f64) -> f64 {
        self.loss.value(action - theta - self.bias)
    }

    pub fn u_receiver(&self, action: f64, theta: f64) -> f64 {
        self.loss.value(action - theta)
    }

    /// `∫_lo^hi h(θ) g(θ) dθ`, split at `breaks`.
    pub fn expect(&self, h: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
        integrate_with_breaks(|t| h(t) * self.prior.density(t), lo, hi, breaks, QUAD_TOL)
    }

    pub fn prior_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        self.expect(|_| 1.0, lo, hi, &[])
    }

    /// Action maximizing `∫_lo^hi f(a - θ - offset) g(θ) dθ`: the optimal
    /// pooled action of a player whose ideal point is `θ + offset`.
    pub fn pooled_action(&self, lo: f64, hi: f64, offset: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(lo + offset);
        }
        let foc = |a: f64| {
            integrate_with_breaks(
                |t| self.loss.slope(a - t - offset) * self.prior.density(t),
                lo,
                hi,
                &[a - offset],
                QUAD_TOL,
            )
            .unwrap_or(f64::NAN)
        };
        bisect(foc, lo + offset, hi + offset, ROOT_TOL)
    }
}

/// Analytic minmax values of the continuum game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsMinmax {
    pub sender: f64,
    pub receiver: f64,
    pub mean: f64,
    pub variance: f64,
    /// Receiver's uninformed best action (`E θ`).
    pub receiver_action: f64,
    /// Sender-worst constant action in `[0, 1]`.
    pub sender_action: f64,
}

/// `ū_R = -Var θ`; `ū_S = -Var θ - (E θ + b - a)²` at the Sender-worst
/// action `a ∈ {0, 1}`. Quadratic loss only.
pub fn cs_minmax(spec: &ContinuumSpec) -> Result<CsMinmax> {
    if !spec.loss.is_quadratic() {
        return Err(Error::Capability("closed-form minmax requires the quadratic loss".into()));
    }
    let mean = spec.expect(|t| t, 0.0, 1.0, &[])?;
    let second = spec.expect(|t| t * t, 0.0, 1.0, &[])?;
    let variance = second - mean * mean;
    let ideal = mean + spec.bias;
    let sender_action = if ideal >= 0.5 { 0.0 } else { 1.0 };
    Ok(CsMinmax {
        sender: -variance - (ideal - sender_action).powi(2),
        receiver: -variance,
        mean,
        variance,
        receiver_action: mean,
        sender_action,
    })
}

/// A frontier point for Sender weight `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub lambda: f64,
    /// Fraction of the bias conceded to the Sender: `a(θ) = θ + λ̃ b`.
    pub lambda_tilde: f64,
    pub payoff: PayoffProfile,
}

/// Solves `(1-λ) f'(λ̃ b) + λ f'(-(1-λ̃) b) = 0` for `λ̃ ∈ [0, 1]`.
pub fn pareto_point(spec: &ContinuumSpec, lambda: f64) -> Result<ParetoPoint> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid_at(format!("weight must lie in [0, 1], got {lambda}"), "lambda"));
    }
    let b = spec.bias;
    let f = &spec.loss;
    let foc = |t: f64| (1.0 - lambda) * f.slope(t * b) + lambda * f.slope(-(1.0 - t) * b);
    let t = bisect(foc, 0.0, 1.0, 1e-15)?;
    Ok(ParetoPoint {
        lambda,
        lambda_tilde: t,
        payoff: PayoffProfile::new(f.value(-(1.0 - t) * b), f.value(t * b)),
    })
}

/// Frontier sampled at `λ_i = i/(n-1)`. Quadratic loss only.
pub fn frontier_curve(spec: &ContinuumSpec, grid_size: usize) -> Result<Vec<ParetoPoint>> {
    if !spec.loss.is_quadratic() {
        return Err(Error::Capability("the closed-form frontier curve requires the quadratic loss".into()));
    }
    if grid_size < 2 {
        return Err(Error::invalid_at("grid size must be at least 2", "grid"));
    }
    (0..grid_size).map(|i| pareto_point(spec, i as f64 / (grid_size - 1) as f64)).collect()
}

/// `-b² + vS + 2b √(-vS)`: the Receiver payoff on the quadratic frontier.
pub fn frontier_receiver(bias: f64, v_s: f64) -> f64 {
    -bias * bias + v_s + 2.0 * bias * (-v_s).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minmax_b_0_2() {
        let m = cs_minmax(&ContinuumSpec::new(0.2).unwrap()).unwrap();
        assert!((m.receiver + 1.0 / 12.0).abs() < 1e-12);
        assert!((m.sender + 1.0 / 12.0 + 0.49).abs() < 1e-12);
        let m = cs_minmax(&ContinuumSpec::new(0.5).unwrap()).unwrap();
        assert!((m.receiver + 1.0 / 12.0).abs() < 1e-12);
        let m = cs_minmax(&ContinuumSpec::new(1e-6).unwrap()).unwrap();
        assert!((m.sender + 1.0 / 12.0 + 0.25).abs() < 1e-5);
    }

    #[test]
    fn quadratic_foc_gives_identity_weight() {
        let spec = ContinuumSpec::new(0.2).unwrap();
        for k in 0..=10 {
            let lambda = k as f64 / 10.0;
            let p = pareto_point(&spec, lambda).unwrap();
            assert!((p.lambda_tilde - lambda).abs() < 1e-12, "{lambda}: {}", p.lambda_tilde);
        }
        let p = pareto_point(&spec, 0.3).unwrap();
        assert!(p.payoff.max_abs_diff(PayoffProfile::new(-0.0196, -0.0036)) < 1e-12);
        let p = pareto_point(&spec, 0.0).unwrap();
        assert!(p.payoff.max_abs_diff(PayoffProfile::new(-0.04, 0.0)) < 1e-15);
        let p = pareto_point(&spec, 1.0).unwrap();
        assert!(p.payoff.max_abs_diff(PayoffProfile::new(0.0, -0.04)) < 1e-15);
    }

    #[test]
    fn curve_identity() {
        let spec = ContinuumSpec::new(0.2).unwrap();
        for p in frontier_curve(&spec, 101).unwrap() {
            assert!((frontier_receiver(0.2, p.payoff.sender) - p.payoff.receiver).abs() < 1e-12);
        }
        assert!(frontier_receiver(0.2, -0.04).abs() < 1e-15);
        assert!((frontier_receiver(0.2, -0.01) + 0.01).abs() < 1e-15);
        assert!((frontier_receiver(0.2, -0.0196) + 0.0036).abs() < 1e-15);
    }

    #[test]
    fn quartic_loss_foc() {
        // f(x) = -x^4: the FOC gives (1-λ) t³ = λ (1-t)³.
        let loss = LossFunction::custom(|x: f64| -x.powi(4), |x: f64| -4.0 * x.powi(3));
        let spec = ContinuumSpec::with(0.2, loss, PriorDensity::uniform()).unwrap();
        let p = pareto_point(&spec, 0.3).unwrap();
        let r = (0.3f64 / 0.7).cbrt();
        assert!((p.lambda_tilde - r / (1.0 + r)).abs() < 1e-12);
        assert!(frontier_curve(&spec, 5).unwrap_err().is_capability());
        assert!(cs_minmax(&spec).unwrap_err().is_capability());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ContinuumSpec::new(0.0).unwrap_err().is_validation());
        assert!(ContinuumSpec::new(1.0).unwrap_err().is_validation());
        let half = PriorDensity::custom(|_| 0.5);
        assert!(ContinuumSpec::with(0.2, LossFunction::quadratic(), half).unwrap_err().is_validation());
    }

    #[test]
    fn pooled_actions() {
        let spec = ContinuumSpec::new(0.2).unwrap();
        assert!((spec.pooled_action(0.0, 0.4, 0.2).unwrap() - 0.4).abs() < 1e-12);
        assert!((spec.pooled_action(0.0, 0.4, 0.0).unwrap() - 0.2).abs() < 1e-12);
        let tilted = PriorDensity::custom(|t| 0.5 + t);
        let spec = ContinuumSpec::with(0.2, LossFunction::quadratic(), tilted).unwrap();
        // Mean of density 1/2 + θ on [0, 1] is 1/4 + 1/3.
        assert!((spec.pooled_action(0.0, 1.0, 0.0).unwrap() - 7.0 / 12.0).abs() < 1e-12);
    }
}
