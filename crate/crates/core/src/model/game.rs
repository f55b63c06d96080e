use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on probability-vector sums.
pub const PROB_TOL: f64 = 1e-12;

/// A finite Sender-Receiver stage game with messages identified with states.
///
/// Utilities are indexed `[state][action]`. Construction goes through
/// [`FiniteCheapTalkGame::new`], which checks every invariant, so any value
/// of this type is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCheapTalkGame {
    states: Vec<String>,
    prior: Vec<f64>,
    actions: Vec<String>,
    u_sender: Vec<Vec<f64>>,
    u_receiver: Vec<Vec<f64>>,
}

/// Serialized game layout. `messages` is optional and must equal `states`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub states: Vec<String>,
    pub prior: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<Vec<String>>,
    pub actions: Vec<String>,
    #[serde(rename = "uS")]
    pub u_sender: Vec<Vec<f64>>,
    #[serde(rename = "uR")]
    pub u_receiver: Vec<Vec<f64>>,
}

impl FiniteCheapTalkGame {
    pub fn new(
        states: Vec<String>,
        prior: Vec<f64>,
        actions: Vec<String>,
        u_sender: Vec<Vec<f64>>,
        u_receiver: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::invalid_at("at least two states are required", "states"));
        }
        if actions.len() < 2 {
            return Err(Error::invalid_at("at least two actions are required", "actions"));
        }
        check_unique(&states, "states")?;
        check_unique(&actions, "actions")?;
        if prior.len() != states.len() {
            return Err(Error::invalid_at(
                format!("prior has {} entries but there are {} states", prior.len(), states.len()),
                "prior",
            ));
        }
        for (i, &p) in prior.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::invalid_at(
                    format!("prior must have full support (every entry > 0), got {p}"),
                    format!("prior[{i}]"),
                ));
            }
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::invalid_at(
                format!("prior must sum to 1 within {PROB_TOL:e}, sums to {total}"),
                "prior",
            ));
        }
        for (name, table) in [("uS", &u_sender), ("uR", &u_receiver)] {
            if table.len() != states.len() {
                return Err(Error::invalid_at(
                    format!("{name} has {} rows, expected one per state ({})", table.len(), states.len()),
                    name,
                ));
            }
            for (i, row) in table.iter().enumerate() {
                if row.len() != actions.len() {
                    return Err(Error::invalid_at(
                        format!("{name} row has {} entries, expected one per action ({})", row.len(), actions.len()),
                        format!("{name}[{i}]"),
                    ));
                }
                if let Some(j) = row.iter().position(|u| !u.is_finite()) {
                    return Err(Error::invalid_at("utilities must be finite", format!("{name}[{i}][{j}]")));
                }
            }
        }
        Ok(FiniteCheapTalkGame { states, prior, actions, u_sender, u_receiver })
    }

    /// Convenience constructor with generated labels `"0".."n-1"`.
    pub fn from_tables(prior: Vec<f64>, u_sender: Vec<Vec<f64>>, u_receiver: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = prior.len();
        let n_actions = u_sender.first().map_or(0, Vec::len);
        Self::new(
            (0..n_states).map(|i| i.to_string()).collect(),
            prior,
            (0..n_actions).map(|i| i.to_string()).collect(),
            u_sender,
            u_receiver,
        )
    }

    pub fn from_file(file: GameFile) -> Result<Self> {
        if let Some(messages) = &file.messages {
            if messages.len() > file.states.len() {
                return Err(Error::invalid_at(
                    "messages must equal states; extra messages are not supported",
                    "messages",
                ));
            }
            if let Some(i) = (0..messages.len().max(file.states.len()))
                .find(|&i| messages.get(i) != file.states.get(i))
            {
                return Err(Error::invalid_at("messages must equal states element-wise", format!("messages[{i}]")));
            }
        }
        Self::new(file.states, file.prior, file.actions, file.u_sender, file.u_receiver)
    }

    pub fn to_file(&self) -> GameFile {
        GameFile {
            states: self.states.clone(),
            prior: self.prior.clone(),
            messages: None,
            actions: self.actions.clone(),
            u_sender: self.u_sender.clone(),
            u_receiver: self.u_receiver.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)
            .map_err(|e| Error::invalid_at(format!("malformed game JSON: {e}"), format!("line {}", e.line())))?;
        Self::from_file(file)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Messages are identified with states.
    pub fn num_messages(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    #[inline]
    pub fn u_sender(&self, state: usize, action: usize) -> f64 {
        self.u_sender[state][action]
    }

    #[inline]
    pub fn u_receiver(&self, state: usize, action: usize) -> f64 {
        self.u_receiver[state][action]
    }

    pub fn sender_table(&self) -> &[Vec<f64>] {
        &self.u_sender
    }

    pub fn receiver_table(&self) -> &[Vec<f64>] {
        &self.u_receiver
    }

    /// Ex-ante expected Sender utility of a message-independent action.
    pub fn ex_ante_sender(&self, action: usize) -> f64 {
        self.prior.iter().enumerate().map(|(s, p)| p * self.u_sender[s][action]).sum()
    }

    pub fn ex_ante_receiver(&self, action: usize) -> f64 {
        self.prior.iter().enumerate().map(|(s, p)| p * self.u_receiver[s][action]).sum()
    }

    /// The ex-ante Receiver-optimal (babbling) action, lowest index on ties.
    pub fn babbling_action(&self) -> usize {
        argmax((0..self.num_actions()).map(|a| self.ex_ante_receiver(a)))
    }
}

fn check_unique(labels: &[String], name: &str) -> Result<()> {
    for (i, label) in labels.iter().enumerate() {
        if labels[..i].contains(label) {
            return Err(Error::invalid_at(format!("duplicate label {label:?}"), format!("{name}[{i}]")));
        }
    }
    Ok(())
}

/// Index of the maximum, lowest index wins ties.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    argmax(values.into_iter().map(|v| -v))
}
