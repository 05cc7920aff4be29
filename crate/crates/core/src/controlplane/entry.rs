//! Doorbell entry sessions.
//!
//! A ring opens a pending session. The first operator decision settles it:
//! a permit unlocks the door for `unlock_ttl_ms`, after which it relocks on
//! its own. A session nobody answers within `decision_timeout_ms` expires and
//! counts as a denial. Time is an explicit millisecond clock supplied by the
//! caller.

use std::collections::BTreeMap;

use super::ControlError;
use crate::imaging::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryState {
    Pending,
    Permitted,
    Denied,
    Expired,
}

impl EntryState {
    pub fn is_terminal(self) -> bool {
        self != EntryState::Pending
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryConfig {
    pub unlock_ttl_ms: u64,
    pub decision_timeout_ms: u64,
}

impl Default for EntryConfig {
    fn default() -> Self {
        Self {
            unlock_ttl_ms: 10_000,
            decision_timeout_ms: 60_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntrySession {
    pub id: u64,
    pub snapshot: Frame,
    pub state: EntryState,
    pub requested_at: u64,
    pub decided_at: Option<u64>,
    pub decided_by: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DoorLock {
    Locked,
    Unlocked { until: u64 },
}

/// A state change caused by the passage of time or a decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryTransition {
    Settled { id: u64, state: EntryState },
    DoorUnlocked { until: u64 },
    DoorRelocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub id: u64,
    pub state: EntryState,
    /// The same operator repeated a decision already recorded.
    pub replay: bool,
    pub transitions: Vec<EntryTransition>,
}

#[derive(Debug, Clone)]
pub struct EntryBook {
    cfg: EntryConfig,
    sessions: BTreeMap<u64, EntrySession>,
    door: DoorLock,
    next_id: u64,
    now: u64,
}

impl EntryBook {
    pub fn new(cfg: EntryConfig) -> Self {
        Self {
            cfg,
            sessions: BTreeMap::new(),
            door: DoorLock::Locked,
            next_id: 1,
            now: 0,
        }
    }

    pub fn config(&self) -> &EntryConfig {
        &self.cfg
    }

    pub fn door(&self) -> DoorLock {
        self.door
    }

    pub fn session(&self, id: u64) -> Option<&EntrySession> {
        self.sessions.get(&id)
    }

    pub fn sessions(&self) -> impl Iterator<Item = &EntrySession> {
        self.sessions.values()
    }

    pub fn has_pending(&self) -> bool {
        self.sessions.values().any(|s| s.state == EntryState::Pending)
    }

    /// Apply expiries and relocking due at `now`. The clock never runs
    /// backwards; an earlier `now` is treated as the current time.
    pub fn advance(&mut self, now: u64) -> Vec<EntryTransition> {
        self.now = self.now.max(now);
        let now = self.now;
        let mut out = Vec::new();
        for s in self.sessions.values_mut() {
            if s.state == EntryState::Pending && now >= s.requested_at + self.cfg.decision_timeout_ms {
                s.state = EntryState::Expired;
                s.decided_at = Some(s.requested_at + self.cfg.decision_timeout_ms);
                out.push(EntryTransition::Settled {
                    id: s.id,
                    state: EntryState::Expired,
                });
            }
        }
        if let DoorLock::Unlocked { until } = self.door {
            if now >= until {
                self.door = DoorLock::Locked;
                out.push(EntryTransition::DoorRelocked);
            }
        }
        out
    }

    /// Open a pending session. The door must be locked.
    pub fn request(&mut self, snapshot: Frame, now: u64) -> Result<(u64, Vec<EntryTransition>), ControlError> {
        let transitions = self.advance(now);
        if self.door != DoorLock::Locked {
            return Err(ControlError::DoorNotLocked);
        }
        let id = self.next_id;
        self.next_id += 1;
        self.sessions.insert(
            id,
            EntrySession {
                id,
                snapshot,
                state: EntryState::Pending,
                requested_at: self.now,
                decided_at: None,
                decided_by: None,
            },
        );
        Ok((id, transitions))
    }

    /// Settle a pending session. A repeat of the same operator's recorded
    /// decision is acknowledged as a replay; anything else on a settled
    /// session is stale.
    pub fn decide(&mut self, id: u64, allow: bool, operator: &str, now: u64) -> Result<Decision, ControlError> {
        let mut transitions = self.advance(now);
        let now = self.now;
        let session = self.sessions.get_mut(&id).ok_or(ControlError::UnknownSession(id))?;
        let wanted = if allow {
            EntryState::Permitted
        } else {
            EntryState::Denied
        };
        match session.state {
            EntryState::Pending => {}
            state if state == wanted && session.decided_by.as_deref() == Some(operator) => {
                return Ok(Decision {
                    id,
                    state,
                    replay: true,
                    transitions,
                });
            }
            state => return Err(ControlError::StaleDecision { id, state }),
        }
        session.state = wanted;
        session.decided_at = Some(now);
        session.decided_by = Some(operator.to_owned());
        transitions.push(EntryTransition::Settled { id, state: wanted });
        if allow {
            let until = now + self.cfg.unlock_ttl_ms;
            self.door = DoorLock::Unlocked { until };
            transitions.push(EntryTransition::DoorUnlocked { until });
        }
        Ok(Decision {
            id,
            state: wanted,
            replay: false,
            transitions,
        })
    }
}
