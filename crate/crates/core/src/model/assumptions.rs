use serde::Serialize;

use crate::model::game::FiniteCheapTalkGame;

/// Tie tolerance when deciding whether a best response is unique.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssumptionReport {
    /// Unique per-state Receiver best response and an injective map.
    pub a1_holds: bool,
    /// All Receiver-optimal actions per state (more than one means a tie).
    pub best_responses: Vec<Vec<usize>>,
    /// Lowest-index Receiver-optimal action per state.
    pub a_star_map: Vec<usize>,
    /// Union of the per-state optimal actions.
    pub a_star: Vec<usize>,
    pub injective: bool,
    pub a2_holds: bool,
    /// States where the Sender strictly prefers some other optimal action.
    pub z: Vec<usize>,
    pub z_mass: f64,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.a1_holds && self.a2_holds
    }
}

pub fn check_assumptions(game: &FiniteCheapTalkGame) -> AssumptionReport {
    let ns = game.num_states();
    let best_responses: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            let row = &game.receiver_table()[s];
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..row.len()).filter(|&a| row[a] >= top - TIE_TOL).collect()
        })
        .collect();
    let a_star_map: Vec<usize> = best_responses.iter().map(|v| v[0]).collect();
    let mut a_star: Vec<usize> = best_responses.iter().flatten().copied().collect();
    a_star.sort_unstable();
    a_star.dedup();
    let unique = best_responses.iter().all(|v| v.len() == 1);
    let injective = {
        let mut seen = a_star_map.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == ns
    };
    let z: Vec<usize> = (0..ns)
        .filter(|&s| {
            let own = game.u_sender(s, a_star_map[s]);
            a_star.iter().any(|&a| game.u_sender(s, a) > own + TIE_TOL)
        })
        .collect();
    let z_mass = z.iter().map(|&s| game.prior()[s]).sum();
    AssumptionReport {
        a1_holds: unique && injective,
        best_responses,
        a_star_map,
        a_star,
        injective,
        a2_holds: !z.is_empty(),
        z,
        z_mass,
    }
}
