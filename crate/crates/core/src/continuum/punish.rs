use crate::error::{Error, Result};
use crate::model::PayoffProfile;
use crate::optim::bisect;

use super::{cs_minmax, pareto_point, ContinuumSpec, ROOT_TOL};

/// Pooling punishment of the Receiver: states in `[0, y]` pool, the rest
/// reveal, and the Receiver answers with the Sender-optimal action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverPunishmentY {
    pub y: f64,
    /// Action on the pooled message.
    pub pooled_action: f64,
    /// `u_S(σ^{R,y}, ρ^{R,y})`
    pub sender_value: f64,
    /// `max_ρ' u_R(σ^{R,y}, ρ')`, computed from the Receiver's own pooled
    /// optimum.
    pub receiver_deviation: f64,
}

/// Truncation punishment of the Sender: reports below `x` are believed and
/// everything else is answered with `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenderPunishmentX {
    pub x: f64,
    /// `u_R(τ, ρ^{S,x})`
    pub receiver_value: f64,
    /// `max_σ' u_S(σ', ρ^{S,x})`
    pub deviation_cap: f64,
}

pub fn receiver_punishment_value(spec: &ContinuumSpec, y: f64) -> Result<ReceiverPunishmentY> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid_at(format!("pooling threshold must lie in [0, 1], got {y}"), "y"));
    }
    let f0 = spec.loss().value(0.0);
    let b = spec.bias();
    if y == 0.0 {
        return Ok(ReceiverPunishmentY { y, pooled_action: b, sender_value: f0, receiver_deviation: f0 });
    }
    let revealed = f0 * spec.prior_mass(y, 1.0)?;
    let a_s = spec.pooled_action(0.0, y, b)?;
    let sender_value = spec.expect(|t| spec.u_sender(a_s, t), 0.0, y, &[a_s - b])? + revealed;
    let a_r = spec.pooled_action(0.0, y, 0.0)?;
    let receiver_deviation = spec.expect(|t| spec.u_receiver(a_r, t), 0.0, y, &[a_r])? + revealed;
    Ok(ReceiverPunishmentY { y, pooled_action: a_s, sender_value, receiver_deviation })
}

/// Pooling threshold `y` with `u_S(σ^{R,y}, ρ^{R,y}) = w`.
pub fn receiver_punishment_y(spec: &ContinuumSpec, w: f64) -> Result<ReceiverPunishmentY> {
    let top = spec.loss().value(0.0);
    let bottom = receiver_punishment_value(spec, 1.0)?.sender_value;
    if !(w >= bottom - 1e-12 && w <= top + 1e-12) {
        return Err(Error::OutOfRange { target: w, min: bottom, max: top });
    }
    let y = bisect(
        |y| receiver_punishment_value(spec, y).map_or(f64::NAN, |p| p.sender_value) - w,
        0.0,
        1.0,
        ROOT_TOL,
    )?;
    receiver_punishment_value(spec, y)
}

pub fn sender_punishment_value(spec: &ContinuumSpec, x: f64) -> Result<SenderPunishmentX> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid_at(format!("truncation point must lie in [0, 1], got {x}"), "x"));
    }
    let f0 = spec.loss().value(0.0);
    let receiver_value = spec.expect(|t| spec.u_receiver(x, t), x, 1.0, &[])? + f0 * spec.prior_mass(0.0, x)?;
    let b = spec.bias();
    let deviation_cap = if spec.is_uniform_quadratic() && x >= b {
        -(1.0 - x + b).powi(3) / 3.0
    } else {
        deviation_cap_quadrature(spec, x)?
    };
    Ok(SenderPunishmentX { x, receiver_value, deviation_cap })
}

/// Sender's best deviation against truncation at `x`: report `θ + b` while
/// that stays below `x`, otherwise anything that triggers `x`.
pub(crate) fn deviation_cap_quadrature(spec: &ContinuumSpec, x: f64) -> Result<f64> {
    let b = spec.bias();
    spec.expect(|t| spec.u_sender((t + b).min(x), t), 0.0, 1.0, &[x - b])
}

/// Truncation point `x` with `u_R(τ, ρ^{S,x}) = target`.
pub fn sender_punishment_x(spec: &ContinuumSpec, target: f64) -> Result<SenderPunishmentX> {
    let bottom = sender_punishment_value(spec, 0.0)?.receiver_value;
    let top = spec.loss().value(0.0);
    if !(target >= bottom - 1e-12 && target <= top + 1e-12) {
        return Err(Error::OutOfRange { target, min: bottom, max: top });
    }
    let x = bisect(
        |x| sender_punishment_value(spec, x).map_or(f64::NAN, |p| p.receiver_value) - target,
        0.0,
        1.0,
        ROOT_TOL,
    )?;
    sender_punishment_value(spec, x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsCertificate {
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub target: PayoffProfile,
    /// Sender value of the Receiver punishment, strictly between vS and vR.
    pub w: f64,
    pub receiver_punishment: ReceiverPunishmentY,
    pub sender_punishment: SenderPunishmentX,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsOutcome {
    Certified(CsCertificate),
    Refused { lambda: f64, target: PayoffProfile, violated: String },
}

impl CsOutcome {
    pub fn certificate(&self) -> Option<&CsCertificate> {
        match self {
            CsOutcome::Certified(c) => Some(c),
            CsOutcome::Refused { .. } => None,
        }
    }
}

/// Analytic certification of the frontier point with Sender weight
/// `λ ∈ (0, 1/2)`.
pub fn certify_cs(spec: &ContinuumSpec, lambda: f64) -> Result<CsOutcome> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::invalid_at(
            format!("weight must lie in (0, 1/2) so that a value strictly between vS and vR exists, got {lambda}"),
            "lambda",
        ));
    }
    let point = pareto_point(spec, lambda)?;
    let v = point.payoff;
    let refused = |violated: String| Ok(CsOutcome::Refused { lambda, target: v, violated });
    if spec.loss().is_quadratic() {
        let mm = cs_minmax(spec)?;
        if v.sender <= mm.sender || v.receiver <= mm.receiver {
            return refused(format!(
                "strict individual rationality: vS = {} vs uBarS = {}, vR = {} vs uBarR = {}",
                v.sender, mm.sender, v.receiver, mm.receiver
            ));
        }
    }
    let babbling = receiver_punishment_value(spec, 1.0)?.sender_value;
    let low = v.sender.max(babbling);
    if low >= v.receiver {
        return refused(format!("no pooling value lies strictly between max(vS, {babbling}) and vR = {}", v.receiver));
    }
    let w = 0.5 * (low + v.receiver);
    let rp = receiver_punishment_y(spec, w)?;
    if rp.receiver_deviation >= v.receiver {
        return refused(format!(
            "Receiver deviation value {} is not below vR = {}",
            rp.receiver_deviation, v.receiver
        ));
    }
    let sp = sender_punishment_x(spec, v.receiver)?;
    if sp.deviation_cap >= v.sender {
        return refused(format!(
            "Sender deviation cap {} is not below vS = {} (truncation x = {})",
            sp.deviation_cap, v.sender, sp.x
        ));
    }
    Ok(CsOutcome::Certified(CsCertificate {
        lambda,
        lambda_tilde: point.lambda_tilde,
        target: v,
        w,
        receiver_punishment: rp,
        sender_punishment: sp,
    }))
}

/// Smallest weight above which every scanned `λ ∈ (0, 1/2)` certifies,
/// refined by bisection. `None` if no scanned weight certifies.
pub fn lambda_bar(spec: &ContinuumSpec, grid_size: usize) -> Result<Option<f64>> {
    if grid_size < 2 {
        return Err(Error::invalid_at("grid size must be at least 2", "grid"));
    }
    let ok = |l: f64| -> Result<bool> { Ok(certify_cs(spec, l)?.certificate().is_some()) };
    let lambdas: Vec<f64> = (1..grid_size).map(|k| 0.5 * k as f64 / grid_size as f64).collect();
    let mut first_ok = None;
    for (k, &l) in lambdas.iter().enumerate().rev() {
        if ok(l)? {
            first_ok = Some(k);
        } else {
            break;
        }
    }
    let Some(k) = first_ok else { return Ok(None) };
    if k == 0 {
        return Ok(Some(lambdas[0]));
    }
    let (mut lo, mut hi) = (lambdas[k - 1], lambdas[k]);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
