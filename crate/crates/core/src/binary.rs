//! The two-state persuasion game: the Sender always wants action 1, the
//! Receiver wants to match the state, and state 0 has prior `α > 1/2`.

use crate::error::{Error, Result};
use crate::model::{FiniteCheapTalkGame, ReceiverStrategy, SenderStrategy};
use crate::wrp::{assemble, verify_certificate, Mode, Profile, WrpCertificate};

// Endpoints computed in floating point are treated as outside the window.
const WINDOW_TOL: f64 = 1e-12;

/// Parameters of the closed-form construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryParams {
    pub alpha: f64,
    /// Weight on believing in the normal phase.
    pub nu: f64,
    /// Weight on believing in the Sender punishment.
    pub gamma: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::invalid_at(format!("alpha must lie in (1/2, 1), got {alpha}"), "alpha"));
    }
    Ok(())
}

pub fn make_binary(alpha: f64) -> Result<FiniteCheapTalkGame> {
    check_alpha(alpha)?;
    let u_s = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
    let u_r = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    FiniteCheapTalkGame::from_tables(vec![alpha, 1.0 - alpha], u_s, u_r)
}

/// Open interval of Receiver payoffs on the frontier that are WRP.
pub fn wrp_interval(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok((alpha, 1.0 - alpha * (1.0 - alpha) / (2.0 - alpha)))
}

/// Open window of admissible on-path believing weights.
pub fn nu_window(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok(((2.0 * alpha - 1.0) / alpha, 1.0 / (2.0 - alpha)))
}

/// Sender-punishment believing weight that leaves the Receiver exactly at
/// the normal-phase payoff.
pub fn gamma_for(alpha: f64, nu: f64) -> f64 {
    (1.0 - 2.0 * alpha + alpha * nu) / (1.0 - alpha)
}

pub fn params(alpha: f64, nu: f64) -> Result<BinaryParams> {
    let (lo, hi) = nu_window(alpha)?;
    if !nu.is_finite() || nu <= lo + WINDOW_TOL {
        return Err(Error::invalid_at(
            format!("nu must exceed (2 alpha - 1)/alpha = {lo} (otherwise vR <= alpha, not strictly individually rational), got {nu}"),
            "nu",
        ));
    }
    if nu >= hi - WINDOW_TOL {
        return Err(Error::invalid_at(
            format!("nu must be below 1/(2 - alpha) = {hi} (otherwise the Sender cap is not below vS), got {nu}"),
            "nu",
        ));
    }
    Ok(BinaryParams { alpha, nu, gamma: gamma_for(alpha, nu) })
}

/// The three profiles of the closed-form construction: normal
/// `(τ, ν β + (1-ν) always-1)`, Sender punishment `(τ, γ β + (1-γ) always-0)`
/// and Receiver punishment `(always-send-1, β)`, verified strictly.
pub fn construct_profile(alpha: f64, nu: f64) -> Result<WrpCertificate> {
    let p = params(alpha, nu)?;
    let game = make_binary(alpha)?;
    let tau = SenderStrategy::truthful(&game);
    let beta = ReceiverStrategy::believing(&game);
    let normal = Profile::new(tau.clone(), beta.mix(&ReceiverStrategy::constant(&game, 1), p.nu));
    let target = normal.payoffs(&game);
    let cert = assemble(
        &game,
        target,
        normal,
        Profile::new(tau, beta.mix(&ReceiverStrategy::constant(&game, 0), p.gamma)),
        Profile::new(SenderStrategy::constant(&game, 1), beta),
    );
    let check = verify_certificate(&game, &cert, Mode::Strict)?;
    if !check.valid {
        return Err(Error::Numerical(format!("constructed profile failed verification: {:?}", check.failed())));
    }
    Ok(cert)
}

/// Truthful weight in the Receiver punishment `(q τ + (1-q) always-send-1, β)`
/// that equalizes the Receiver's incentive constraints in the normal and
/// Receiver-punishment phases of the one-period automaton.
pub fn incentive_mix(alpha: f64, nu: f64) -> Result<f64> {
    let p = params(alpha, nu)?;
    Ok((p.nu - (1.0 - alpha) / alpha).max(0.0))
}

/// [`construct_profile`] with the Receiver punishment replaced by the mixed
/// variant `(q τ + (1-q) always-send-1, β)`, `q` from [`incentive_mix`].
pub fn construct_profile_with_mix(alpha: f64, nu: f64) -> Result<WrpCertificate> {
    let base = construct_profile(alpha, nu)?;
    let game = make_binary(alpha)?;
    let q = incentive_mix(alpha, nu)?;
    let sender = SenderStrategy::truthful(&game).mix(&SenderStrategy::constant(&game, 1), q);
    let cert = assemble(
        &game,
        base.target,
        base.normal,
        base.sender_punishment,
        Profile::new(sender, ReceiverStrategy::believing(&game)),
    );
    let check = verify_certificate(&game, &cert, Mode::Strict)?;
    if !check.valid {
        return Err(Error::Numerical(format!("mixed profile failed verification: {:?}", check.failed())));
    }
    Ok(cert)
}
