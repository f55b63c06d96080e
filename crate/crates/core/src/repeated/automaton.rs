use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    receiver_best_response, sender_best_response, FiniteCheapTalkGame, GameFile, Kernel, PayoffProfile,
    ReceiverStrategy, SenderStrategy,
};
use crate::optim::solve_linear;
use crate::wrp::{Profile, WrpCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Normal,
    #[serde(rename = "PunishS")]
    PunishSender,
    #[serde(rename = "PunishR")]
    PunishReceiver,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Normal, Phase::PunishSender, Phase::PunishReceiver];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Normal => "Normal",
            Phase::PunishSender => "PunishS",
            Phase::PunishReceiver => "PunishR",
        }
    }

    pub fn punishing(player: Player) -> Phase {
        match player {
            Player::Sender => Phase::PunishSender,
            Player::Receiver => Phase::PunishReceiver,
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Sender,
    Receiver,
}

/// How phases evolve when nobody deviates. A deviation by player `i` always
/// moves play to Punish-`i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionRule {
    /// One period of punishment, then back to Normal.
    #[default]
    OnePeriod,
    /// Punishment phases are absorbing.
    Grim,
}

impl TransitionRule {
    pub fn next(self, phase: Phase, deviation: Option<Player>) -> Phase {
        match (deviation, self) {
            (Some(p), _) => Phase::punishing(p),
            (None, TransitionRule::OnePeriod) => Phase::Normal,
            (None, TransitionRule::Grim) => phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreePhaseAutomaton {
    game: FiniteCheapTalkGame,
    profiles: [Profile; 3],
    rule: TransitionRule,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_at(format!("discount factor must lie in (0, 1), got {delta}"), "delta"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeMargin {
    pub phase: Phase,
    pub player: Player,
    pub conform: f64,
    pub deviate: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeReport {
    pub delta: f64,
    pub margins: Vec<SpeMargin>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseRanking {
    pub delta: f64,
    pub values: Vec<(Phase, PayoffProfile)>,
    /// Ordered pairs `(better, worse)` with `better` strictly higher for both
    /// players.
    pub dominated_pairs: Vec<(Phase, Phase)>,
    pub compatible: bool,
}

impl ThreePhaseAutomaton {
    pub fn new(
        game: FiniteCheapTalkGame,
        normal: Profile,
        punish_sender: Profile,
        punish_receiver: Profile,
        rule: TransitionRule,
    ) -> Result<Self> {
        for (name, p) in [("normal", &normal), ("punishSender", &punish_sender), ("punishReceiver", &punish_receiver)] {
            SenderStrategy::new(&game, p.sender.kernel().clone())
                .map_err(|e| Error::invalid_at(e.to_string(), format!("{name}.sender")))?;
            ReceiverStrategy::new(&game, p.receiver.kernel().clone())
                .map_err(|e| Error::invalid_at(e.to_string(), format!("{name}.receiver")))?;
        }
        Ok(ThreePhaseAutomaton { game, profiles: [normal, punish_sender, punish_receiver], rule })
    }

    pub fn from_certificate(game: FiniteCheapTalkGame, cert: &WrpCertificate, rule: TransitionRule) -> Result<Self> {
        Self::new(
            game,
            cert.normal.clone(),
            cert.sender_punishment.clone(),
            cert.receiver_punishment.clone(),
            rule,
        )
    }

    /// Every phase plays the same profile.
    pub fn constant(game: FiniteCheapTalkGame, profile: Profile) -> Result<Self> {
        Self::new(game, profile.clone(), profile.clone(), profile, TransitionRule::OnePeriod)
    }

    pub fn game(&self) -> &FiniteCheapTalkGame {
        &self.game
    }

    pub fn profile(&self, phase: Phase) -> &Profile {
        &self.profiles[phase.index()]
    }

    pub fn rule(&self) -> TransitionRule {
        self.rule
    }

    pub fn stage_payoffs(&self, phase: Phase) -> PayoffProfile {
        self.profile(phase).payoffs(&self.game)
    }

    /// Solves `V(p) = (1-δ) u(p) + δ V(next(p))` along conforming play.
    pub fn continuation_values(&self, delta: f64) -> Result<[PayoffProfile; 3]> {
        check_delta(delta)?;
        let mut a = vec![vec![0.0; 3]; 3];
        for p in Phase::ALL {
            a[p.index()][p.index()] += 1.0;
            a[p.index()][self.rule.next(p, None).index()] -= delta;
        }
        let u: Vec<PayoffProfile> = Phase::ALL.iter().map(|&p| self.stage_payoffs(p)).collect();
        let vs = solve_linear(&a, &u.iter().map(|x| (1.0 - delta) * x.sender).collect::<Vec<_>>())?;
        let vr = solve_linear(&a, &u.iter().map(|x| (1.0 - delta) * x.receiver).collect::<Vec<_>>())?;
        Ok([0, 1, 2].map(|i| PayoffProfile::new(vs[i], vr[i])))
    }

    /// One-shot deviation check in every phase for both players.
    pub fn check_spe(&self, delta: f64, tol: f64) -> Result<SpeReport> {
        let v = self.continuation_values(delta)?;
        let pick = |x: PayoffProfile, player: Player| match player {
            Player::Sender => x.sender,
            Player::Receiver => x.receiver,
        };
        let mut margins = Vec::with_capacity(6);
        for phase in Phase::ALL {
            let profile = self.profile(phase);
            let stage = self.stage_payoffs(phase);
            let next = self.rule.next(phase, None);
            for player in [Player::Sender, Player::Receiver] {
                let best = match player {
                    Player::Sender => sender_best_response(&self.game, &profile.receiver).1,
                    Player::Receiver => receiver_best_response(&self.game, &profile.sender).1,
                };
                let conform = (1.0 - delta) * pick(stage, player) + delta * pick(v[next.index()], player);
                let deviate = (1.0 - delta) * best + delta * pick(v[Phase::punishing(player).index()], player);
                margins.push(SpeMargin { phase, player, conform, deviate, margin: conform - deviate });
            }
        }
        let holds = margins.iter().all(|m| m.margin >= -tol);
        Ok(SpeReport { delta, margins, holds })
    }

    /// Flags continuation values that are Pareto-ranked, reading strict
    /// dominance as strictly better for both players.
    pub fn check_wrp_phases(&self, delta: f64) -> Result<PhaseRanking> {
        let v = self.continuation_values(delta)?;
        let mut dominated_pairs = Vec::new();
        for a in Phase::ALL {
            for b in Phase::ALL {
                if a != b && v[a.index()].strictly_dominates(v[b.index()], 1e-12) {
                    dominated_pairs.push((a, b));
                }
            }
        }
        Ok(PhaseRanking {
            delta,
            values: Phase::ALL.iter().map(|&p| (p, v[p.index()])).collect(),
            compatible: dominated_pairs.is_empty(),
            dominated_pairs,
        })
    }

    /// Smallest discount factor on the grid `k / grid_size` at which every
    /// one-shot deviation check passes, refined by bisection to `1e-6`.
    pub fn min_delta(&self, grid_size: usize) -> Result<f64> {
        if grid_size < 2 {
            return Err(Error::invalid_at("grid size must be at least 2", "gridSize"));
        }
        const TOL: f64 = 1e-12;
        let passes = |d: f64| -> Result<bool> { Ok(self.check_spe(d, TOL)?.holds) };
        if !passes(1.0 - 1e-6)? {
            return Err(Error::Unsupportable(
                "one-shot deviation checks fail even at delta = 1 - 1e-6".into(),
            ));
        }
        let grid: Vec<f64> = (1..grid_size).map(|k| k as f64 / grid_size as f64).collect();
        let mut first = None;
        for (k, &d) in grid.iter().enumerate() {
            if passes(d)? {
                first = Some(k);
                break;
            }
        }
        let (mut lo, mut hi) = match first {
            Some(0) => return Ok(grid[0]),
            Some(k) => (grid[k - 1], grid[k]),
            None => (*grid.last().expect("non-empty grid"), 1.0 - 1e-6),
        };
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if passes(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Game reference inside an automaton file: a path or an inline game.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Path(String),
    Inline(GameFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPair {
    pub sender: Vec<Vec<f64>>,
    pub receiver: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AutomatonFile {
    pub game: GameRef,
    pub normal: KernelPair,
    pub punish_sender: KernelPair,
    pub punish_receiver: KernelPair,
    #[serde(default)]
    pub transition: TransitionRule,
}

impl KernelPair {
    fn from_profile(p: &Profile) -> Self {
        KernelPair { sender: p.sender.kernel().to_rows(), receiver: p.receiver.kernel().to_rows() }
    }

    fn to_profile(&self, game: &FiniteCheapTalkGame, name: &str) -> Result<Profile> {
        let loc = |e: Error, side: &str| match e {
            Error::Invalid { invariant, location } => Error::Invalid {
                invariant,
                location: Some(format!("{name}.{side}{}", location.map(|l| format!(".{l}")).unwrap_or_default())),
            },
            other => other,
        };
        Ok(Profile::new(
            Kernel::from_rows(self.sender.clone())
                .and_then(|k| SenderStrategy::new(game, k))
                .map_err(|e| loc(e, "sender"))?,
            Kernel::from_rows(self.receiver.clone())
                .and_then(|k| ReceiverStrategy::new(game, k))
                .map_err(|e| loc(e, "receiver"))?,
        ))
    }
}

impl ThreePhaseAutomaton {
    /// File form with the game inlined unless `game_path` is given.
    pub fn to_file(&self, game_path: Option<String>) -> AutomatonFile {
        AutomatonFile {
            game: game_path.map_or_else(|| GameRef::Inline(self.game.to_file()), GameRef::Path),
            normal: KernelPair::from_profile(self.profile(Phase::Normal)),
            punish_sender: KernelPair::from_profile(self.profile(Phase::PunishSender)),
            punish_receiver: KernelPair::from_profile(self.profile(Phase::PunishReceiver)),
            transition: self.rule,
        }
    }

    /// Builds from a file whose game reference has already been resolved.
    pub fn from_file(file: &AutomatonFile, game: FiniteCheapTalkGame) -> Result<Self> {
        let normal = file.normal.to_profile(&game, "normal")?;
        let ps = file.punish_sender.to_profile(&game, "punishSender")?;
        let pr = file.punish_receiver.to_profile(&game, "punishReceiver")?;
        Self::new(game, normal, ps, pr, file.transition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{construct_profile, construct_profile_with_mix, make_binary};

    fn babbling(game: &FiniteCheapTalkGame) -> Profile {
        Profile::new(SenderStrategy::constant(game, 1), ReceiverStrategy::constant(game, 0))
    }

    fn certified(mixed: bool) -> ThreePhaseAutomaton {
        let cert = if mixed { construct_profile_with_mix(2.0 / 3.0, 0.6) } else { construct_profile(2.0 / 3.0, 0.6) };
        ThreePhaseAutomaton::from_certificate(make_binary(2.0 / 3.0).unwrap(), &cert.unwrap(), TransitionRule::OnePeriod)
            .unwrap()
    }

    #[test]
    fn values_follow_the_recursion() {
        let auto = certified(false);
        let v = auto.continuation_values(0.95).unwrap();
        assert!(v[0].max_abs_diff(PayoffProfile::new(0.6, 11.0 / 15.0)) < 1e-12);
        let ps = PayoffProfile::new(0.05 / 15.0 + 0.57, 11.0 / 15.0);
        assert!(v[1].max_abs_diff(ps) < 1e-12, "{:?}", v[1]);
        let pr = PayoffProfile::new(0.05 + 0.57, 0.05 / 3.0 + 0.95 * 11.0 / 15.0);
        assert!(v[2].max_abs_diff(pr) < 1e-12, "{:?}", v[2]);
        for p in Phase::ALL {
            let next = auto.rule().next(p, None);
            let u = auto.stage_payoffs(p);
            let lhs = v[p.index()];
            assert!((lhs.sender - (0.05 * u.sender + 0.95 * v[next.index()].sender)).abs() < 1e-12);
            assert!((lhs.receiver - (0.05 * u.receiver + 0.95 * v[next.index()].receiver)).abs() < 1e-12);
        }
    }

    #[test]
    fn sender_normal_margin() {
        let auto = certified(false);
        let r = auto.check_spe(0.95, 1e-12).unwrap();
        assert!(r.holds);
        let m = r.margins.iter().find(|m| m.phase == Phase::Normal && m.player == Player::Sender).unwrap();
        assert!((m.margin - (0.6 - 0.05 - 0.95 * (0.05 / 15.0 + 0.57))).abs() < 1e-12);
        assert!((m.margin - 0.0053333).abs() < 1e-6);
        let r = auto.check_spe(0.5, 1e-12).unwrap();
        let m = r.margins.iter().find(|m| m.phase == Phase::Normal && m.player == Player::Sender).unwrap();
        assert!(m.margin < 0.0);
    }

    #[test]
    fn constant_automata() {
        let g = make_binary(2.0 / 3.0).unwrap();
        let auto = ThreePhaseAutomaton::constant(g.clone(), babbling(&g)).unwrap();
        let v = auto.continuation_values(0.7).unwrap();
        assert!(v.iter().all(|x| x.max_abs_diff(PayoffProfile::new(0.0, 2.0 / 3.0)) < 1e-12));
        assert!(auto.check_spe(0.01, 1e-12).unwrap().holds);
        assert!(auto.check_wrp_phases(0.9).unwrap().compatible);
        assert_eq!(auto.min_delta(100).unwrap(), 0.01);
    }

    #[test]
    fn mixed_punishment_min_delta() {
        let auto = certified(true);
        let d = auto.min_delta(100).unwrap();
        assert!(d <= 0.8 && d > 0.8 - 2e-6, "{d}");
        let pure = certified(false).min_delta(100).unwrap();
        assert!((pure - 5.0 / 6.0).abs() < 2e-6, "{pure}");
    }

    #[test]
    fn generous_punishment_is_unsupportable() {
        let g = make_binary(2.0 / 3.0).unwrap();
        let normal = Profile::new(SenderStrategy::truthful(&g), ReceiverStrategy::believing(&g));
        let generous = Profile::new(SenderStrategy::truthful(&g), ReceiverStrategy::constant(&g, 1));
        let auto =
            ThreePhaseAutomaton::new(g, normal.clone(), generous, normal, TransitionRule::OnePeriod).unwrap();
        assert!(matches!(auto.min_delta(50), Err(Error::Unsupportable(_))));
    }

    #[test]
    fn file_round_trip() {
        let auto = certified(true);
        let text = serde_json::to_string(&auto.to_file(None)).unwrap();
        let file: AutomatonFile = serde_json::from_str(&text).unwrap();
        let GameRef::Inline(g) = &file.game else { panic!("expected inline game") };
        let back = ThreePhaseAutomaton::from_file(&file, FiniteCheapTalkGame::from_file(g.clone()).unwrap()).unwrap();
        assert_eq!(back.game(), auto.game());
        for p in Phase::ALL {
            let (x, y) = (back.profile(p), auto.profile(p));
            assert!(x.sender.kernel().approx_eq(y.sender.kernel(), 1e-15));
            assert!(x.receiver.kernel().approx_eq(y.receiver.kernel(), 1e-15));
        }
        assert!(text.contains("\"transition\":\"one-period\""));
    }
}
