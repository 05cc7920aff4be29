use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ControlError, DeviceAction, DeviceCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Fan,
    Light,
    Door,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceState {
    On,
    Off,
    Locked,
    Unlocked,
    /// Door still locked, an entry request awaits a decision.
    Pending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Device {
    pub kind: DeviceKind,
    pub state: DeviceState,
}

/// Result of an applied command. `changed` is false for a repeated command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ack {
    pub device: String,
    pub state: DeviceState,
    pub changed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DeviceRegistry {
    devices: BTreeMap<String, Device>,
}

impl DeviceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `fan1` and `light1` off, `door` locked.
    pub fn lab_default() -> Self {
        let mut r = Self::new();
        r.add("fan1", DeviceKind::Fan);
        r.add("light1", DeviceKind::Light);
        r.add("door", DeviceKind::Door);
        r
    }

    /// Registers a device in its resting state (off / locked).
    pub fn add(&mut self, id: impl Into<String>, kind: DeviceKind) {
        let state = match kind {
            DeviceKind::Door => DeviceState::Locked,
            _ => DeviceState::Off,
        };
        self.devices.insert(id.into(), Device { kind, state });
    }

    pub fn get(&self, id: &str) -> Option<&Device> {
        self.devices.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Device)> {
        self.devices.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Switch a fan or light. Door commands are refused; the door moves only
    /// through entry sessions.
    pub fn apply_command(&mut self, cmd: &DeviceCommand) -> Result<Ack, ControlError> {
        let device = self
            .devices
            .get_mut(&cmd.device)
            .ok_or_else(|| ControlError::UnknownDevice(cmd.device.clone()))?;
        let target = match (device.kind, cmd.action) {
            (DeviceKind::Door, _) => return Err(ControlError::DoorBypass(cmd.device.clone())),
            (_, DeviceAction::On) => DeviceState::On,
            (_, DeviceAction::Off) => DeviceState::Off,
            (kind, action) => {
                return Err(ControlError::IllegalAction {
                    device: cmd.device.clone(),
                    kind,
                    action,
                })
            }
        };
        let changed = device.state != target;
        device.state = target;
        Ok(Ack {
            device: cmd.device.clone(),
            state: target,
            changed,
        })
    }

    pub(crate) fn set_state(&mut self, id: &str, state: DeviceState) -> bool {
        match self.devices.get_mut(id) {
            Some(d) if d.state != state => {
                d.state = state;
                true
            }
            _ => false,
        }
    }

    /// Rebuild state by applying a command log in order. Commands that fail
    /// are skipped, exactly as they were when first submitted.
    pub fn replay<'a>(mut self, commands: impl IntoIterator<Item = &'a DeviceCommand>) -> Self {
        for cmd in commands {
            let _ = self.apply_command(cmd);
        }
        self
    }
}

/// A command log holds one JSON `DeviceCommand` per line; blank lines are skipped.
pub fn parse_command_log(text: &str) -> Result<Vec<DeviceCommand>, ControlError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| ControlError::Malformed(e.to_string())))
        .collect()
}
