use crate::error::{Error, Result};
use crate::model::game::argmax;
use crate::model::{
    expected_payoffs, receiver_best_response, sender_best_response, FiniteCheapTalkGame, Kernel, PayoffProfile,
    ReceiverStrategy, SenderStrategy,
};
use crate::optim::{solve_lp, LinearProgram, LpStatus};
use crate::wrp::certificate::{Profile, STRICT_MARGIN, WEAK_TOL};

/// Default bound on the state count for exhaustive partition enumeration.
pub const DEFAULT_PARTITION_LIMIT: usize = 8;

/// What the Receiver-punishment search does when the state count exceeds
/// the enumeration limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeyondLimit {
    /// Refuse with a capability error.
    Fail,
    /// Search only partitions with one contiguous pooled block (plus full
    /// revelation).
    Intervals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub partition_limit: usize,
    pub beyond_limit: BeyondLimit,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { partition_limit: DEFAULT_PARTITION_LIMIT, beyond_limit: BeyondLimit::Fail }
    }
}

impl SearchOptions {
    pub fn intervals() -> Self {
        SearchOptions { beyond_limit: BeyondLimit::Intervals, ..Self::default() }
    }
}

/// Result of the Sender-punishment LP.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderPunishment {
    pub receiver: ReceiverStrategy,
    /// `max_σ' u_S(σ', ρ^S)` for the returned kernel.
    pub cap: f64,
    /// Optimal LP objective.
    pub lp_value: f64,
}

/// Rounds an LP solution block into a row-stochastic kernel.
fn kernel_from_lp(x: &[f64], rows: usize, cols: usize) -> Kernel {
    let rows = (0..rows)
        .map(|r| {
            let row: Vec<f64> = x[r * cols..(r + 1) * cols].iter().map(|v| v.max(0.0)).collect();
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|v| (v / sum).min(1.0)).collect()
        })
        .collect();
    Kernel::from_rows(rows).expect("normalized LP rows")
}

/// Cheapest Receiver kernel (with the Sender at τ) that keeps the Receiver
/// at `vR` or above while minimizing the Sender's best deviation value.
///
/// Variables are `ρ(a|m)` followed by one free epigraph variable `z_θ` per
/// state.
pub fn find_sender_punishment(game: &FiniteCheapTalkGame, v_r: f64) -> Result<SenderPunishment> {
    let (ns, na) = (game.num_states(), game.num_actions());
    let n_rho = ns * na;
    let mut objective = vec![0.0; n_rho + ns];
    objective[n_rho..].copy_from_slice(game.prior());
    let mut lp = LinearProgram::new(objective);
    for s in 0..ns {
        lp.free(n_rho + s);
    }
    for s in 0..ns {
        for m in 0..ns {
            let mut row = vec![0.0; n_rho + ns];
            for a in 0..na {
                row[m * na + a] = game.u_sender(s, a);
            }
            row[n_rho + s] = -1.0;
            lp.add_le(row, 0.0);
        }
    }
    let mut receiver_row = vec![0.0; n_rho + ns];
    for s in 0..ns {
        for a in 0..na {
            receiver_row[s * na + a] = game.prior()[s] * game.u_receiver(s, a);
        }
    }
    lp.add_ge(receiver_row, v_r);
    for m in 0..ns {
        let mut row = vec![0.0; n_rho + ns];
        row[m * na..(m + 1) * na].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, 1.0);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::NoPunishment(format!(
                "no Receiver kernel attains vR = {v_r} (above the Receiver optimum)"
            )))
        }
        LpStatus::Unbounded => return Err(Error::Numerical("Sender-punishment LP reported unbounded".into())),
    }
    let receiver = ReceiverStrategy::new(game, kernel_from_lp(&sol.x, ns, na)).expect("LP kernel has game shape");
    let cap = sender_best_response(game, &receiver).1;
    Ok(SenderPunishment { receiver, cap, lp_value: sol.objective_value })
}

/// A Receiver kernel that, against τ, attains `target` within `tol`.
pub fn normal_profile_for(game: &FiniteCheapTalkGame, target: PayoffProfile, tol: f64) -> Option<ReceiverStrategy> {
    let (ns, na) = (game.num_states(), game.num_actions());
    let n_rho = ns * na;
    // Four deviation slacks e+/e- on each payoff equation, minimized.
    let mut objective = vec![0.0; n_rho + 4];
    objective[n_rho..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new(objective);
    for (k, target_value) in [target.sender, target.receiver].into_iter().enumerate() {
        let mut row = vec![0.0; n_rho + 4];
        for s in 0..ns {
            for a in 0..na {
                let u = if k == 0 { game.u_sender(s, a) } else { game.u_receiver(s, a) };
                row[s * na + a] = game.prior()[s] * u;
            }
        }
        row[n_rho + 2 * k] = 1.0;
        row[n_rho + 2 * k + 1] = -1.0;
        lp.add_eq(row, target_value);
    }
    for s in 0..ns {
        let mut row = vec![0.0; n_rho + 4];
        row[s * na..(s + 1) * na].iter_mut().for_each(|v| *v = 1.0);
        lp.add_eq(row, 1.0);
    }
    let sol = solve_lp(&lp).ok()?;
    if !sol.is_optimal() || sol.objective_value > tol {
        return None;
    }
    let rho = ReceiverStrategy::new(game, kernel_from_lp(&sol.x, ns, na)).ok()?;
    let attained = expected_payoffs(game, &SenderStrategy::truthful(game), &rho);
    (attained.max_abs_diff(target) <= tol).then_some(rho)
}

/// Pooling punishment built from a partition of the states.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverPunishment {
    pub profile: Profile,
    /// Cells as sorted state lists.
    pub partition: Vec<Vec<usize>>,
    /// `u_S(σ^R, ρ^R)`
    pub sender_value: f64,
    /// `max_ρ' u_R(σ^R, ρ')`
    pub receiver_deviation: f64,
}

/// Profile for a partition: each cell pools on its largest state's message
/// and is answered with the cell's Sender-optimal action; unused messages
/// are answered as if believed.
pub fn partition_profile(game: &FiniteCheapTalkGame, partition: &[Vec<usize>]) -> Profile {
    let ns = game.num_states();
    let believing = ReceiverStrategy::believing(game);
    let mut messages = vec![0; ns];
    let mut actions: Vec<usize> =
        (0..ns).map(|m| argmax(believing.kernel().row(m).iter().copied())).collect();
    for cell in partition {
        let message = *cell.iter().max().expect("non-empty cell");
        for &s in cell {
            messages[s] = message;
        }
        actions[message] = argmax(
            (0..game.num_actions()).map(|a| cell.iter().map(|&s| game.prior()[s] * game.u_sender(s, a)).sum::<f64>()),
        );
    }
    Profile::new(
        SenderStrategy::pure(game, &messages).expect("messages in range"),
        ReceiverStrategy::pure(game, &actions).expect("actions in range"),
    )
}

/// Calls `visit` with every set partition of `0..n` (restricted growth
/// strings, canonical order).
fn for_each_partition(n: usize, mut visit: impl FnMut(&[Vec<usize>])) {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, blocks: usize, visit: &mut dyn FnMut(&[Vec<usize>])) {
        if i == n {
            let mut cells = vec![Vec::new(); blocks];
            for (s, &b) in labels.iter().enumerate() {
                cells[b].push(s);
            }
            visit(&cells);
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            rec(i + 1, n, labels, blocks.max(b + 1), visit);
            labels.pop();
        }
    }
    rec(0, n, &mut Vec::with_capacity(n), 0, &mut visit);
}

fn interval_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![(0..n).map(|s| vec![s]).collect::<Vec<_>>()];
    for lo in 0..n {
        for hi in lo + 1..n {
            let mut cells: Vec<Vec<usize>> = (0..lo).map(|s| vec![s]).collect();
            cells.push((lo..=hi).collect());
            cells.extend((hi + 1..n).map(|s| vec![s]));
            out.push(cells);
        }
    }
    out
}

/// Searches pooling partitions for a Receiver punishment against `target`.
/// Among qualifying partitions the one with the largest smaller margin wins;
/// `None` means none was found, not that none exists.
pub fn find_receiver_punishment(
    game: &FiniteCheapTalkGame,
    target: PayoffProfile,
    options: SearchOptions,
) -> Result<Option<ReceiverPunishment>> {
    let ns = game.num_states();
    let mut best: Option<(f64, ReceiverPunishment)> = None;
    let mut consider = |cells: &[Vec<usize>]| {
        let profile = partition_profile(game, cells);
        let sender_value = profile.payoffs(game).sender;
        let receiver_deviation = receiver_best_response(game, &profile.sender).1;
        let slack = sender_value - target.sender;
        let margin = target.receiver - receiver_deviation;
        if slack < -WEAK_TOL || margin < STRICT_MARGIN {
            return;
        }
        let score = slack.min(margin);
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((
                score,
                ReceiverPunishment { profile, partition: cells.to_vec(), sender_value, receiver_deviation },
            ));
        }
    };
    if ns <= options.partition_limit {
        for_each_partition(ns, &mut consider);
    } else {
        match options.beyond_limit {
            BeyondLimit::Fail => {
                return Err(Error::Capability(format!(
                    "{ns} states exceed the partition-enumeration limit of {}",
                    options.partition_limit
                )))
            }
            BeyondLimit::Intervals => interval_partitions(ns).iter().for_each(|c| consider(c)),
        }
    }
    Ok(best.map(|(_, p)| p))
}
