use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceAction {
    On,
    Off,
    Lock,
    Unlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeviceCommand {
    pub device: String,
    pub action: DeviceAction,
}

impl DeviceCommand {
    pub fn new(device: impl Into<String>, action: DeviceAction) -> Self {
        Self {
            device: device.into(),
            action,
        }
    }
}

/// One line of a grammar file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarEntry {
    pub phrase: String,
    pub device: String,
    pub action: DeviceAction,
}

/// Lowercase and collapse runs of whitespace to single spaces.
pub fn normalize_phrase(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Recognized phrases mapped to device commands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandGrammar {
    phrases: BTreeMap<String, DeviceCommand>,
}

impl CommandGrammar {
    pub fn from_entries(entries: impl IntoIterator<Item = GrammarEntry>) -> Result<Self, ControlError> {
        let mut phrases = BTreeMap::new();
        for e in entries {
            let key = normalize_phrase(&e.phrase);
            if phrases
                .insert(key.clone(), DeviceCommand::new(e.device, e.action))
                .is_some()
            {
                return Err(ControlError::DuplicatePhrase(key));
            }
        }
        Ok(Self { phrases })
    }

    /// Grammar file: a JSON array of `{"phrase", "device", "action"}` objects.
    pub fn from_json(bytes: &[u8]) -> Result<Self, ControlError> {
        let entries: Vec<GrammarEntry> =
            serde_json::from_slice(bytes).map_err(|e| ControlError::Malformed(e.to_string()))?;
        Self::from_entries(entries)
    }

    /// Phrases for the stock `fan1` and `light1` devices.
    pub fn lab_default() -> Self {
        let entry = |phrase: &str, device: &str, action| GrammarEntry {
            phrase: phrase.into(),
            device: device.into(),
            action,
        };
        Self::from_entries([
            entry("fan on", "fan1", DeviceAction::On),
            entry("fan off", "fan1", DeviceAction::Off),
            entry("turn on the fan", "fan1", DeviceAction::On),
            entry("turn off the fan", "fan1", DeviceAction::Off),
            entry("light on", "light1", DeviceAction::On),
            entry("light off", "light1", DeviceAction::Off),
            entry("lights on", "light1", DeviceAction::On),
            entry("lights off", "light1", DeviceAction::Off),
        ])
        .expect("default phrases are unique")
    }

    /// Exact match after normalization; `None` is an ordinary no-match.
    pub fn parse(&self, text: &str) -> Option<&DeviceCommand> {
        self.phrases.get(&normalize_phrase(text))
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}
