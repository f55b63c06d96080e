use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{Kernel, PayoffProfile};

use super::automaton::{Phase, Player, ThreePhaseAutomaton};

/// Kernels closer than this to the prescribed ones are not deviations.
pub const DEVIATION_TOL: f64 = 1e-9;

/// Replace one player's kernel in period `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedDeviation {
    pub t: usize,
    pub player: Player,
    pub kernel: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub phase: Phase,
    pub state: usize,
    pub message: usize,
    pub action: usize,
    pub u_sender: f64,
    pub u_receiver: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeviationEvent {
    pub t: usize,
    pub player: Player,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimSummary {
    pub seed: u64,
    pub periods: usize,
    /// `(1-δ) Σ δ^t u_t`.
    pub discounted: PayoffProfile,
    pub average: PayoffProfile,
    /// Sample variances of the per-period payoffs.
    pub variance: PayoffProfile,
    /// Periods spent in Normal, PunishS and PunishR.
    pub occupancy: [usize; 3],
    pub deviations: Vec<DeviationEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub records: Vec<PeriodRecord>,
    pub summary: SimSummary,
}

struct Samplers {
    rows: Vec<WeightedIndex<f64>>,
}

impl Samplers {
    fn new(kernel: &Kernel) -> Result<Self> {
        let rows = (0..kernel.rows())
            .map(|r| WeightedIndex::new(kernel.row(r)).map_err(|e| Error::Numerical(format!("row {r}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Samplers { rows })
    }

    fn draw(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        self.rows[row].sample(rng)
    }
}

struct Prepared {
    kernel: Kernel,
    player: Player,
    samplers: Samplers,
}

fn prepare(auto: &ThreePhaseAutomaton, periods: usize, script: &[ScriptedDeviation]) -> Result<Vec<Option<[Option<Prepared>; 2]>>> {
    let game = auto.game();
    let mut by_period: Vec<Option<[Option<Prepared>; 2]>> = Vec::new();
    for (i, d) in script.iter().enumerate() {
        let loc = format!("deviations[{i}]");
        if d.t >= periods {
            return Err(Error::invalid_at(format!("period {} is outside 0..{periods}", d.t), format!("{loc}.t")));
        }
        let kernel = Kernel::from_rows(d.kernel.clone()).map_err(|e| Error::invalid_at(e.to_string(), format!("{loc}.kernel")))?;
        let (rows, cols) = match d.player {
            Player::Sender => (game.num_states(), game.num_messages()),
            Player::Receiver => (game.num_messages(), game.num_actions()),
        };
        if kernel.rows() != rows || kernel.cols() != cols {
            return Err(Error::invalid_at(
                format!("kernel must be {rows}x{cols}, got {}x{}", kernel.rows(), kernel.cols()),
                format!("{loc}.kernel"),
            ));
        }
        if by_period.len() <= d.t {
            by_period.resize_with(d.t + 1, || None);
        }
        let slot = by_period[d.t].get_or_insert_with(|| [None, None]);
        let idx = d.player as usize;
        if slot[idx].is_some() {
            return Err(Error::invalid_at("two deviations for the same player and period", loc));
        }
        slot[idx] = Some(Prepared { samplers: Samplers::new(&kernel)?, kernel, player: d.player });
    }
    Ok(by_period)
}

/// Plays the automaton for `periods` periods. Each period draws the state,
/// then the message, then the action from one seeded stream. A scripted
/// kernel that differs from the prescribed one is observed as a deviation;
/// when both players deviate in the same period the Sender is punished.
pub fn run_path(
    auto: &ThreePhaseAutomaton,
    delta: f64,
    periods: usize,
    seed: u64,
    script: &[ScriptedDeviation],
) -> Result<SimTrace> {
    simulate(auto, delta, periods, seed, script, true)
}

/// Same as [`run_path`] without keeping the per-period records.
pub fn run_summary(
    auto: &ThreePhaseAutomaton,
    delta: f64,
    periods: usize,
    seed: u64,
    script: &[ScriptedDeviation],
) -> Result<SimSummary> {
    Ok(simulate(auto, delta, periods, seed, script, false)?.summary)
}

/// Runs one conforming path per seed.
pub fn run_seeds(auto: &ThreePhaseAutomaton, delta: f64, periods: usize, seeds: &[u64], exec: Exec) -> Result<Vec<SimSummary>> {
    exec.map(seeds.len(), |i| run_summary(auto, delta, periods, seeds[i], &[])).into_iter().collect()
}

fn simulate(
    auto: &ThreePhaseAutomaton,
    delta: f64,
    periods: usize,
    seed: u64,
    script: &[ScriptedDeviation],
    keep: bool,
) -> Result<SimTrace> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_at(format!("discount factor must lie in (0, 1), got {delta}"), "delta"));
    }
    if periods == 0 {
        return Err(Error::invalid_at("at least one period is required", "periods"));
    }
    let game = auto.game();
    let scripted = prepare(auto, periods, script)?;
    let prior = WeightedIndex::new(game.prior()).map_err(|e| Error::Numerical(format!("prior: {e}")))?;
    let phase_samplers = Phase::ALL
        .iter()
        .map(|&p| {
            let prof = auto.profile(p);
            Ok([Samplers::new(prof.sender.kernel())?, Samplers::new(prof.receiver.kernel())?])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phase = Phase::Normal;
    let mut records = Vec::with_capacity(if keep { periods } else { 0 });
    let mut occupancy = [0usize; 3];
    let mut deviations = Vec::new();
    let mut discounted = PayoffProfile::new(0.0, 0.0);
    let (mut sum, mut sum_sq) = ([0.0f64; 2], [0.0f64; 2]);
    let mut weight = 1.0 - delta;

    for t in 0..periods {
        occupancy[phase.index()] += 1;
        let prescribed = auto.profile(phase);
        let here = scripted.get(t).and_then(|s| s.as_ref());
        let pick = |player: Player| here.and_then(|s| s[player as usize].as_ref());
        let send = pick(Player::Sender);
        let recv = pick(Player::Receiver);

        let state = prior.sample(&mut rng);
        let message = match send {
            Some(p) => p.samplers.draw(state, &mut rng),
            None => phase_samplers[phase.index()][0].draw(state, &mut rng),
        };
        let action = match recv {
            Some(p) => p.samplers.draw(message, &mut rng),
            None => phase_samplers[phase.index()][1].draw(message, &mut rng),
        };

        let us = game.u_sender(state, action);
        let ur = game.u_receiver(state, action);
        discounted.sender += weight * us;
        discounted.receiver += weight * ur;
        weight *= delta;
        for (k, u) in [us, ur].into_iter().enumerate() {
            sum[k] += u;
            sum_sq[k] += u * u;
        }
        if keep {
            records.push(PeriodRecord { t, phase, state, message, action, u_sender: us, u_receiver: ur });
        }

        let differs = |p: Option<&Prepared>| {
            p.is_some_and(|p| {
                let own = match p.player {
                    Player::Sender => prescribed.sender.kernel(),
                    Player::Receiver => prescribed.receiver.kernel(),
                };
                !p.kernel.approx_eq(own, DEVIATION_TOL)
            })
        };
        let deviator = if differs(send) {
            if differs(recv) {
                deviations.push(DeviationEvent { t, player: Player::Receiver, phase });
            }
            Some(Player::Sender)
        } else if differs(recv) {
            Some(Player::Receiver)
        } else {
            None
        };
        if let Some(player) = deviator {
            deviations.push(DeviationEvent { t, player, phase });
        }
        phase = auto.rule().next(phase, deviator);
    }

    let n = periods as f64;
    let mean = [sum[0] / n, sum[1] / n];
    let var = |k: usize| if periods > 1 { ((sum_sq[k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0) } else { 0.0 };
    deviations.sort_by_key(|d| (d.t, d.player != Player::Sender));
    Ok(SimTrace {
        records,
        summary: SimSummary {
            seed,
            periods,
            discounted,
            average: PayoffProfile::new(mean[0], mean[1]),
            variance: PayoffProfile::new(var(0), var(1)),
            occupancy,
            deviations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{construct_profile_with_mix, make_binary};
    use crate::repeated::TransitionRule;

    fn auto() -> ThreePhaseAutomaton {
        let g = make_binary(2.0 / 3.0).unwrap();
        let cert = construct_profile_with_mix(2.0 / 3.0, 0.6).unwrap();
        ThreePhaseAutomaton::from_certificate(g, &cert, TransitionRule::OnePeriod).unwrap()
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = auto();
        let x = run_path(&a, 0.9, 500, 11, &[]).unwrap();
        let y = run_path(&a, 0.9, 500, 11, &[]).unwrap();
        assert_eq!(x, y);
        let z = run_path(&a, 0.9, 500, 12, &[]).unwrap();
        assert_ne!(x.records, z.records);
        assert_eq!(x.summary.occupancy, [500, 0, 0]);
        assert_eq!(run_summary(&a, 0.9, 500, 11, &[]).unwrap(), x.summary);
    }

    #[test]
    fn conforming_play_follows_the_kernels() {
        let a = auto();
        let trace = run_path(&a, 0.9, 20_000, 3, &[]).unwrap();
        // Truthful Sender: message equals state every period.
        assert!(trace.records.iter().all(|r| r.message == r.state));
        let s = trace.summary;
        let se = |v: f64| (v / s.periods as f64).sqrt();
        assert!((s.average.sender - 0.6).abs() < 4.0 * se(s.variance.sender));
        assert!((s.average.receiver - 11.0 / 15.0).abs() < 4.0 * se(s.variance.receiver));
    }

    #[test]
    fn scripted_deviations_move_phases() {
        let a = auto();
        let g = a.game().clone();
        let script = vec![
            ScriptedDeviation { t: 2, player: Player::Sender, kernel: vec![vec![0.0, 1.0], vec![0.0, 1.0]] },
            ScriptedDeviation { t: 5, player: Player::Receiver, kernel: vec![vec![0.0, 1.0], vec![0.0, 1.0]] },
            // Matches the prescribed Normal kernel, so it is not a deviation.
            ScriptedDeviation { t: 8, player: Player::Sender, kernel: vec![vec![1.0, 0.0], vec![0.0, 1.0]] },
        ];
        let trace = run_path(&a, 0.9, 10, 1, &script).unwrap();
        let phases: Vec<Phase> = trace.records.iter().map(|r| r.phase).collect();
        assert_eq!(phases[3], Phase::PunishSender);
        assert_eq!(phases[6], Phase::PunishReceiver);
        assert_eq!(phases[9], Phase::Normal);
        assert_eq!(trace.summary.deviations.len(), 2);
        assert_eq!(trace.summary.occupancy, [8, 1, 1]);
        assert_eq!(g.num_states(), 2);
    }

    #[test]
    fn simultaneous_deviations_punish_the_sender() {
        let a = auto();
        let k = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let script = vec![
            ScriptedDeviation { t: 0, player: Player::Receiver, kernel: k.clone() },
            ScriptedDeviation { t: 0, player: Player::Sender, kernel: k },
        ];
        let trace = run_path(&a, 0.9, 3, 1, &script).unwrap();
        assert_eq!(trace.records[1].phase, Phase::PunishSender);
        assert_eq!(trace.summary.deviations.len(), 2);
        assert_eq!(trace.summary.deviations[0].player, Player::Sender);
    }

    #[test]
    fn invalid_scripts() {
        let a = auto();
        let k = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let late = [ScriptedDeviation { t: 10, player: Player::Sender, kernel: k }];
        assert!(run_path(&a, 0.9, 10, 1, &late).unwrap_err().is_validation());
        let shape = [ScriptedDeviation { t: 1, player: Player::Sender, kernel: vec![vec![1.0]] }];
        assert!(run_path(&a, 0.9, 10, 1, &shape).unwrap_err().is_validation());
        assert!(run_path(&a, 1.0, 10, 1, &[]).unwrap_err().is_validation());
    }

    #[test]
    fn discounted_sum_matches_records() {
        let a = auto();
        let trace = run_path(&a, 0.8, 200, 5, &[]).unwrap();
        let oracle: f64 = trace.records.iter().map(|r| 0.2 * 0.8f64.powi(r.t as i32) * r.u_sender).sum();
        assert!((trace.summary.discounted.sender - oracle).abs() < 1e-12);
    }

    #[test]
    fn seeds_in_parallel_match_sequential() {
        let a = auto();
        let seeds: Vec<u64> = (0..6).collect();
        let s = run_seeds(&a, 0.9, 1000, &seeds, Exec::Sequential).unwrap();
        let p = run_seeds(&a, 0.9, 1000, &seeds, Exec::default()).unwrap();
        assert_eq!(s, p);
    }
}
