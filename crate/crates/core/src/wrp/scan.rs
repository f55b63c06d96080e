use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::geometry::{contains, efficient_chain, feasible_hull, point_along, GEOM_TOL};
use crate::model::{is_stage_nash, minmax, FiniteCheapTalkGame, PayoffProfile, SenderStrategy};
use crate::wrp::certificate::{assemble, verify_certificate, Mode, Profile, WrpCertificate, STRICT_MARGIN};
use crate::wrp::punish::{find_receiver_punishment, find_sender_punishment, normal_profile_for, SearchOptions};

/// Why a target was not certified.
#[derive(Debug, Clone, PartialEq)]
pub enum Refusal {
    NotIndividuallyRational { sender_margin: f64, receiver_margin: f64 },
    Infeasible,
    NoNormalProfile,
    SenderCap { cap: f64 },
    NoSenderPunishment,
    NoReceiverPunishment,
    VerificationFailed(Vec<&'static str>),
}

impl std::fmt::Display for Refusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Refusal::NotIndividuallyRational { sender_margin, receiver_margin } => write!(
                f,
                "not strictly individually rational (vS - uBarS = {sender_margin}, vR - uBarR = {receiver_margin})"
            ),
            Refusal::Infeasible => write!(f, "target lies outside the feasible set"),
            Refusal::NoNormalProfile => write!(f, "no normal profile attains the target"),
            Refusal::SenderCap { cap } => write!(f, "Sender deviation cap {cap} is not below vS"),
            Refusal::NoSenderPunishment => write!(f, "no Receiver kernel keeps the Receiver at vR"),
            Refusal::NoReceiverPunishment => write!(f, "no pooling Receiver punishment found"),
            Refusal::VerificationFailed(checks) => write!(f, "verification failed: {}", checks.join(", ")),
        }
    }
}

/// Outcome of certifying one target, with the Sender cap when it was
/// computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub outcome: std::result::Result<WrpCertificate, Refusal>,
    pub sender_cap: Option<f64>,
}

fn refuse(refusal: Refusal, sender_cap: Option<f64>) -> Result<Assessment> {
    Ok(Assessment { outcome: Err(refusal), sender_cap })
}

/// Runs the whole certification pipeline and explains any refusal.
pub fn assess_point(game: &FiniteCheapTalkGame, target: PayoffProfile, options: SearchOptions) -> Result<Assessment> {
    let mm = minmax(game);
    let (ms, mr) = (target.sender - mm.sender, target.receiver - mm.receiver);
    if ms < STRICT_MARGIN || mr < STRICT_MARGIN {
        return refuse(Refusal::NotIndividuallyRational { sender_margin: ms, receiver_margin: mr }, None);
    }
    if !contains(&feasible_hull(game), target, GEOM_TOL) {
        return refuse(Refusal::Infeasible, None);
    }
    let Some(normal_receiver) = normal_profile_for(game, target, GEOM_TOL) else {
        return refuse(Refusal::NoNormalProfile, None);
    };
    let punish_s = match find_sender_punishment(game, target.receiver) {
        Ok(p) => p,
        Err(Error::NoPunishment(_)) => return refuse(Refusal::NoSenderPunishment, None),
        Err(e) => return Err(e),
    };
    let cap = Some(punish_s.cap);
    if punish_s.cap > target.sender - STRICT_MARGIN {
        return refuse(Refusal::SenderCap { cap: punish_s.cap }, cap);
    }
    let Some(punish_r) = find_receiver_punishment(game, target, options)? else {
        return refuse(Refusal::NoReceiverPunishment, cap);
    };
    let cert = assemble(
        game,
        target,
        Profile::new(SenderStrategy::truthful(game), normal_receiver),
        Profile::new(SenderStrategy::truthful(game), punish_s.receiver),
        punish_r.profile,
    );
    let check = verify_certificate(game, &cert, Mode::Strict)?;
    if !check.valid {
        return refuse(Refusal::VerificationFailed(check.failed()), cap);
    }
    Ok(Assessment { outcome: Ok(cert), sender_cap: cap })
}

/// A strictly verified certificate for `target`, or `None`.
pub fn certify_point(
    game: &FiniteCheapTalkGame,
    target: PayoffProfile,
    options: SearchOptions,
) -> Result<Option<WrpCertificate>> {
    Ok(assess_point(game, target, options)?.outcome.ok())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    /// Normalized arc-length position on the efficient frontier, 0 at the
    /// Receiver optimum and 1 at the Sender optimum.
    pub position: f64,
    pub payoff: PayoffProfile,
    pub wrp: bool,
    /// Sender-punishment cap at this vR; NaN when it was not computed.
    pub cap_s: f64,
    /// Largest feasible vS with Receiver payoff at least vR.
    pub frontier_vs_max: f64,
    /// Smallest certificate margin if certified, else the most negative of
    /// the necessary slacks that were computed.
    pub margin: f64,
}

/// Largest feasible Sender payoff among profiles giving the Receiver at
/// least `v_r`; `None` above the Receiver optimum.
pub fn max_sender_given_receiver(hull: &[PayoffProfile], v_r: f64) -> Option<f64> {
    let chain = efficient_chain(hull);
    let top = chain.first()?;
    if v_r > top.receiver + GEOM_TOL {
        return None;
    }
    let last = chain.last().expect("non-empty chain");
    if v_r <= last.receiver {
        return Some(last.sender);
    }
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        if v_r <= a.receiver && v_r >= b.receiver {
            let t = if a.receiver == b.receiver { 1.0 } else { (a.receiver - v_r) / (a.receiver - b.receiver) };
            return Some(a.sender + t * (b.sender - a.sender));
        }
    }
    Some(top.sender)
}

/// Certifies evenly spaced points along the efficient frontier.
pub fn scan_frontier(
    game: &FiniteCheapTalkGame,
    grid_size: usize,
    options: SearchOptions,
    exec: Exec,
) -> Result<Vec<ScanRow>> {
    if grid_size < 2 {
        return Err(Error::invalid_at("grid size must be at least 2", "gridSize"));
    }
    let hull = feasible_hull(game);
    let chain = efficient_chain(&hull);
    let mm = minmax(game);
    let rows = exec.map(grid_size, |i| -> Result<ScanRow> {
        let position = i as f64 / (grid_size - 1) as f64;
        let payoff = point_along(&chain, position);
        let assessment = assess_point(game, payoff, options)?;
        let frontier_vs_max = max_sender_given_receiver(&hull, payoff.receiver).unwrap_or(f64::NAN);
        let cap_s = assessment.sender_cap.unwrap_or(f64::NAN);
        let (wrp, margin) = match &assessment.outcome {
            Ok(cert) => (true, cert.margins.min()),
            Err(_) => {
                let mut m = (payoff.sender - mm.sender).min(payoff.receiver - mm.receiver);
                if cap_s.is_finite() {
                    m = m.min(payoff.sender - cap_s);
                }
                // With no conflict the normal profile is itself a stage
                // equilibrium and needs no punishment.
                let nash = normal_profile_for(game, payoff, GEOM_TOL)
                    .is_some_and(|rho| is_stage_nash(game, &SenderStrategy::truthful(game), &rho, 1e-12));
                (nash, if nash { 0.0 } else { m })
            }
        };
        Ok(ScanRow { position, payoff, wrp, cap_s, frontier_vs_max, margin })
    });
    rows.into_iter().collect()
}
