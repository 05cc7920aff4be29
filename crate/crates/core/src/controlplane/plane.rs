use serde::{Deserialize, Serialize};

use super::protocol::{decode_image, encode_image, ClientMessage, DeviceSnapshot, ServerMessage};
use super::{
    CommandGrammar, ControlError, DeviceCommand, DeviceRegistry, DeviceState, DoorLock, EntryBook, EntryConfig,
    EntryState, EntryTransition, MotionConfig, MotionDetector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeerRole {
    /// The lab-in-charge console.
    Operator,
    /// A fan or light controller.
    Device,
    /// A camera feeding motion frames.
    Sensor,
    /// The doorbell camera and lock actuator.
    Door,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPlaneConfig {
    pub entry: EntryConfig,
    pub motion: MotionConfig,
    /// Registry id of the entry door.
    pub door_id: String,
}

impl Default for ControlPlaneConfig {
    fn default() -> Self {
        Self {
            entry: EntryConfig::default(),
            motion: MotionConfig::default(),
            door_id: "door".into(),
        }
    }
}

/// What one client message produced: exactly one direct reply to the
/// sender, then messages for every connected peer (sender included).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub reply: ServerMessage,
    pub broadcast: Vec<ServerMessage>,
    /// A device command that took effect and belongs in the replay log.
    pub logged: Option<DeviceCommand>,
}

impl Outcome {
    fn reply(reply: ServerMessage) -> Self {
        Self {
            reply,
            broadcast: Vec::new(),
            logged: None,
        }
    }

    fn error(e: &ControlError) -> Self {
        Self::reply(ServerMessage::error(e))
    }
}

/// The single owner of registry, entry sessions and motion state. Every
/// mutation goes through [`ControlPlane::handle`] or [`ControlPlane::tick`].
#[derive(Debug, Clone)]
pub struct ControlPlane {
    grammar: CommandGrammar,
    registry: DeviceRegistry,
    entries: EntryBook,
    motion: MotionDetector,
    door_id: String,
}

impl ControlPlane {
    pub fn new(cfg: ControlPlaneConfig, grammar: CommandGrammar, registry: DeviceRegistry) -> Self {
        let mut plane = Self {
            grammar,
            registry,
            entries: EntryBook::new(cfg.entry),
            motion: MotionDetector::new(cfg.motion),
            door_id: cfg.door_id,
        };
        plane.sync_door();
        plane
    }

    pub fn lab_default() -> Self {
        Self::new(
            ControlPlaneConfig::default(),
            CommandGrammar::lab_default(),
            DeviceRegistry::lab_default(),
        )
    }

    pub fn registry(&self) -> &DeviceRegistry {
        &self.registry
    }

    pub fn entries(&self) -> &EntryBook {
        &self.entries
    }

    pub fn door_id(&self) -> &str {
        &self.door_id
    }

    pub fn welcome(&self, role: PeerRole) -> ServerMessage {
        ServerMessage::Welcome {
            role,
            devices: self
                .registry
                .iter()
                .map(|(id, d)| DeviceSnapshot {
                    device: id.to_owned(),
                    kind: d.kind,
                    state: d.state,
                })
                .collect(),
            pending: self
                .entries
                .sessions()
                .filter(|s| s.state == EntryState::Pending)
                .map(|s| ServerMessage::EntryRequest {
                    id: s.id,
                    image_b64: encode_image(&s.snapshot),
                    ts: s.requested_at,
                })
                .collect(),
        }
    }

    /// Mirror the entry book's lock into the door's registry entry. Returns
    /// the broadcast for a change.
    fn sync_door(&mut self) -> Option<ServerMessage> {
        let state = match self.entries.door() {
            DoorLock::Unlocked { .. } => DeviceState::Unlocked,
            DoorLock::Locked if self.entries.has_pending() => DeviceState::Pending,
            DoorLock::Locked => DeviceState::Locked,
        };
        self.registry
            .set_state(&self.door_id, state)
            .then(|| ServerMessage::DeviceState {
                device: self.door_id.clone(),
                state,
            })
    }

    fn transition_messages(&mut self, transitions: &[EntryTransition]) -> Vec<ServerMessage> {
        let mut out: Vec<ServerMessage> = transitions
            .iter()
            .filter_map(|t| match *t {
                EntryTransition::Settled { id, state } => Some(ServerMessage::EntryResult { id, state }),
                _ => None,
            })
            .collect();
        out.extend(self.sync_door());
        out
    }

    /// Expire sessions and relock the door as of `now`.
    pub fn tick(&mut self, now: u64) -> Vec<ServerMessage> {
        let transitions = self.entries.advance(now);
        self.transition_messages(&transitions)
    }

    fn require(role: Option<PeerRole>, needed: PeerRole, message: &'static str) -> Result<(), ControlError> {
        if role == Some(needed) {
            Ok(())
        } else {
            Err(ControlError::Forbidden { role, message })
        }
    }

    fn apply(&mut self, cmd: &DeviceCommand) -> Result<Outcome, ControlError> {
        let ack = self.registry.apply_command(cmd)?;
        Ok(Outcome {
            reply: ServerMessage::Ack,
            broadcast: vec![ServerMessage::DeviceState {
                device: ack.device,
                state: ack.state,
            }],
            logged: Some(cmd.clone()),
        })
    }

    /// Process one message from a peer with the given role (`None` before
    /// it has said hello). `peer` names the sender in decisions.
    pub fn handle(&mut self, role: Option<PeerRole>, peer: &str, msg: ClientMessage, now: u64) -> Outcome {
        let mut pre = self.tick(now);
        let mut outcome = match self.dispatch(role, peer, msg, now) {
            Ok(o) => o,
            Err(e) => Outcome::error(&e),
        };
        pre.append(&mut outcome.broadcast);
        outcome.broadcast = pre;
        outcome
    }

    fn dispatch(
        &mut self,
        role: Option<PeerRole>,
        peer: &str,
        msg: ClientMessage,
        now: u64,
    ) -> Result<Outcome, ControlError> {
        match msg {
            ClientMessage::Hello { role } => Ok(Outcome::reply(self.welcome(role))),
            ClientMessage::DeviceCommand { device, action } => self.apply(&DeviceCommand { device, action }),
            ClientMessage::VoiceCommand { text } => match self.grammar.parse(&text).cloned() {
                Some(cmd) => self.apply(&cmd),
                None => Ok(Outcome::reply(ServerMessage::NoMatch { text })),
            },
            ClientMessage::EntryDecision { id, allow } => {
                Self::require(role, PeerRole::Operator, "entry_decision")?;
                let decision = self.entries.decide(id, allow, peer, now)?;
                let broadcast = self.transition_messages(&decision.transitions);
                Ok(Outcome {
                    reply: ServerMessage::EntryResult {
                        id,
                        state: decision.state,
                    },
                    broadcast,
                    logged: None,
                })
            }
            ClientMessage::Ring { image_b64 } => {
                Self::require(role, PeerRole::Door, "ring")?;
                let snapshot = decode_image(&image_b64)?;
                let (id, transitions) = self.entries.request(snapshot, now)?;
                let mut broadcast = self.transition_messages(&transitions);
                broadcast.insert(0, ServerMessage::EntryRequest { id, image_b64, ts: now });
                Ok(Outcome {
                    reply: ServerMessage::EntryResult {
                        id,
                        state: EntryState::Pending,
                    },
                    broadcast,
                    logged: None,
                })
            }
            ClientMessage::MotionFrame { frame, image_b64 } => {
                Self::require(role, PeerRole::Sensor, "motion_frame")?;
                let image = decode_image(&image_b64)?;
                let report = self.motion.process(frame, &image)?;
                let broadcast = if report.alert {
                    vec![ServerMessage::MotionAlert {
                        changed: report.changed,
                        frame,
                    }]
                } else {
                    Vec::new()
                };
                Ok(Outcome {
                    reply: ServerMessage::MotionReport {
                        frame,
                        changed: report.changed,
                        alert: report.alert,
                    },
                    broadcast,
                    logged: None,
                })
            }
            ClientMessage::GestureEvent { g, frame } => Ok(Outcome {
                reply: ServerMessage::Ack,
                broadcast: vec![ServerMessage::GestureEvent { g, frame }],
                logged: None,
            }),
        }
    }
}
