use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::geometry::{contains, feasible_hull, GEOM_TOL};
use crate::model::{
    expected_payoffs, minmax, receiver_best_response, sender_best_response, FiniteCheapTalkGame, Kernel,
    PayoffProfile, ReceiverStrategy, SenderStrategy,
};

/// Strict inequalities must clear this margin.
pub const STRICT_MARGIN: f64 = 1e-9;
/// Weak inequalities and punisher slacks may undershoot by this much.
pub const WEAK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub sender: SenderStrategy,
    pub receiver: ReceiverStrategy,
}

impl Profile {
    pub fn new(sender: SenderStrategy, receiver: ReceiverStrategy) -> Self {
        Profile { sender, receiver }
    }

    pub fn payoffs(&self, game: &FiniteCheapTalkGame) -> PayoffProfile {
        expected_payoffs(game, &self.sender, &self.receiver)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `vS - ū_S`
    #[serde(rename = "mIRS")]
    pub ir_sender: f64,
    /// `vR - ū_R`
    #[serde(rename = "mIRR")]
    pub ir_receiver: f64,
    /// `vS` minus the Sender's best deviation value against `ρ^S`.
    #[serde(rename = "mS")]
    pub sender: f64,
    /// `vR` minus the Receiver's best deviation value against `σ^R`.
    #[serde(rename = "mR")]
    pub receiver: f64,
}

impl Margins {
    pub fn min(&self) -> f64 {
        self.ir_sender.min(self.ir_receiver).min(self.sender).min(self.receiver)
    }
}

/// A target payoff with the two punishment profiles that support it.
#[derive(Debug, Clone, PartialEq)]
pub struct WrpCertificate {
    pub target: PayoffProfile,
    pub normal: Profile,
    pub sender_punishment: Profile,
    pub receiver_punishment: Profile,
    pub margins: Margins,
    /// `u_R(σ^S, ρ^S) - vR` and `u_S(σ^R, ρ^R) - vS`.
    pub punisher_slacks: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Weak,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "weak" => Ok(Mode::Weak),
            other => Err(Error::invalid_at(format!("unknown mode {other:?}, expected strict or weak"), "mode")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub mode: Mode,
    pub margins: Margins,
    pub punisher_slacks: [f64; 2],
    pub checks: Vec<Check>,
    pub valid: bool,
}

impl Verification {
    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Computes margins and slacks for the given target and profiles.
pub fn assemble(
    game: &FiniteCheapTalkGame,
    target: PayoffProfile,
    normal: Profile,
    sender_punishment: Profile,
    receiver_punishment: Profile,
) -> WrpCertificate {
    let mm = minmax(game);
    let cap_s = sender_best_response(game, &sender_punishment.receiver).1;
    let cap_r = receiver_best_response(game, &receiver_punishment.sender).1;
    let margins = Margins {
        ir_sender: target.sender - mm.sender,
        ir_receiver: target.receiver - mm.receiver,
        sender: target.sender - cap_s,
        receiver: target.receiver - cap_r,
    };
    let punisher_slacks = [
        sender_punishment.payoffs(game).receiver - target.receiver,
        receiver_punishment.payoffs(game).sender - target.sender,
    ];
    WrpCertificate { target, normal, sender_punishment, receiver_punishment, margins, punisher_slacks }
}

fn check_shapes(game: &FiniteCheapTalkGame, cert: &WrpCertificate) -> Result<()> {
    let profiles = [
        ("normal", &cert.normal),
        ("senderPunishment", &cert.sender_punishment),
        ("receiverPunishment", &cert.receiver_punishment),
    ];
    for (name, p) in profiles {
        SenderStrategy::new(game, p.sender.kernel().clone())
            .map_err(|e| Error::invalid_at(e.to_string(), format!("{name}.sender")))?;
        ReceiverStrategy::new(game, p.receiver.kernel().clone())
            .map_err(|e| Error::invalid_at(e.to_string(), format!("{name}.receiver")))?;
    }
    Ok(())
}

/// Recomputes every margin of `cert` from scratch and checks the inequality
/// system. An infeasible target is a failed check, not an error.
pub fn verify_certificate(game: &FiniteCheapTalkGame, cert: &WrpCertificate, mode: Mode) -> Result<Verification> {
    check_shapes(game, cert)?;
    let fresh = assemble(
        game,
        cert.target,
        cert.normal.clone(),
        cert.sender_punishment.clone(),
        cert.receiver_punishment.clone(),
    );
    let m = fresh.margins;
    let inequality = |v: f64| match mode {
        Mode::Strict => v >= STRICT_MARGIN,
        Mode::Weak => v >= -WEAK_TOL,
    };
    let hull = feasible_hull(game);
    let attained = cert.normal.payoffs(game).max_abs_diff(cert.target);
    let checks = vec![
        Check { name: "feasible", value: 0.0, pass: contains(&hull, cert.target, GEOM_TOL) },
        Check { name: "normalAttainsTarget", value: attained, pass: attained <= GEOM_TOL },
        Check { name: "mIRS", value: m.ir_sender, pass: m.ir_sender >= STRICT_MARGIN },
        Check { name: "mIRR", value: m.ir_receiver, pass: m.ir_receiver >= STRICT_MARGIN },
        Check { name: "mS", value: m.sender, pass: inequality(m.sender) },
        Check { name: "mR", value: m.receiver, pass: inequality(m.receiver) },
        Check { name: "senderPunisherSlack", value: fresh.punisher_slacks[0], pass: fresh.punisher_slacks[0] >= -WEAK_TOL },
        Check {
            name: "receiverPunisherSlack",
            value: fresh.punisher_slacks[1],
            pass: fresh.punisher_slacks[1] >= -WEAK_TOL,
        },
    ];
    let valid = checks.iter().all(|c| c.pass);
    Ok(Verification { mode, margins: m, punisher_slacks: fresh.punisher_slacks, checks, valid })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub sender: Vec<Vec<f64>>,
    pub receiver: Vec<Vec<f64>>,
}

/// JSON layout of a certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CertificateFile {
    pub target: PayoffProfile,
    pub normal: ProfileFile,
    pub sender_punishment: ProfileFile,
    pub receiver_punishment: ProfileFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<Margins>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punisher_slacks: Option<[f64; 2]>,
}

impl ProfileFile {
    fn from_profile(p: &Profile) -> Self {
        ProfileFile { sender: p.sender.kernel().to_rows(), receiver: p.receiver.kernel().to_rows() }
    }

    fn to_profile(&self, game: &FiniteCheapTalkGame, name: &str) -> Result<Profile> {
        let wrap = |e: Error, side: &str| match e {
            Error::Invalid { invariant, location } => Error::Invalid {
                invariant,
                location: Some(format!("{name}.{side}{}", location.map(|l| format!(".{l}")).unwrap_or_default())),
            },
            other => other,
        };
        let sender = Kernel::from_rows(self.sender.clone())
            .and_then(|k| SenderStrategy::new(game, k))
            .map_err(|e| wrap(e, "sender"))?;
        let receiver = Kernel::from_rows(self.receiver.clone())
            .and_then(|k| ReceiverStrategy::new(game, k))
            .map_err(|e| wrap(e, "receiver"))?;
        Ok(Profile { sender, receiver })
    }
}

impl WrpCertificate {
    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            target: self.target,
            normal: ProfileFile::from_profile(&self.normal),
            sender_punishment: ProfileFile::from_profile(&self.sender_punishment),
            receiver_punishment: ProfileFile::from_profile(&self.receiver_punishment),
            margins: Some(self.margins),
            punisher_slacks: Some(self.punisher_slacks),
        }
    }

    /// Rebuilds a certificate from its file form; stored margins are ignored
    /// and recomputed.
    pub fn from_file(game: &FiniteCheapTalkGame, file: &CertificateFile) -> Result<Self> {
        if !file.target.sender.is_finite() || !file.target.receiver.is_finite() {
            return Err(Error::invalid_at("target payoffs must be finite", "target"));
        }
        Ok(assemble(
            game,
            file.target,
            file.normal.to_profile(game, "normal")?,
            file.sender_punishment.to_profile(game, "senderPunishment")?,
            file.receiver_punishment.to_profile(game, "receiverPunishment")?,
        ))
    }

    pub fn from_json(game: &FiniteCheapTalkGame, text: &str) -> Result<Self> {
        let file: CertificateFile = serde_json::from_str(text)
            .map_err(|e| Error::invalid_at(format!("malformed certificate JSON: {e}"), format!("line {}", e.line())))?;
        Self::from_file(game, &file)
    }
}
