//! Wire messages. Each message is one UTF-8 JSON object on its own line,
//! tagged by `"type"`. Images travel as base64 of a binary NetPBM file.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{ControlError, DeviceAction, DeviceKind, DeviceState, EntryState, PeerRole};
use crate::imaging::{decode_netpbm, encode_netpbm, Frame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Hello {
        role: PeerRole,
    },
    DeviceCommand {
        device: String,
        action: DeviceAction,
    },
    /// Recognized speech, already transcribed to text.
    VoiceCommand {
        text: String,
    },
    EntryDecision {
        id: u64,
        allow: bool,
    },
    /// Doorbell pressed; `image_b64` is the door camera snapshot.
    Ring {
        image_b64: String,
    },
    /// A camera frame for the motion detector.
    MotionFrame {
        frame: u64,
        image_b64: String,
    },
    GestureEvent {
        g: u8,
        frame: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSnapshot {
    pub device: String,
    pub kind: DeviceKind,
    pub state: DeviceState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// Reply to `hello`: full current state, for first connect and resync.
    Welcome {
        role: PeerRole,
        devices: Vec<DeviceSnapshot>,
        pending: Vec<ServerMessage>,
    },
    DeviceState {
        device: String,
        state: DeviceState,
    },
    EntryRequest {
        id: u64,
        image_b64: String,
        ts: u64,
    },
    EntryResult {
        id: u64,
        state: EntryState,
    },
    MotionAlert {
        changed: usize,
        frame: u64,
    },
    MotionReport {
        frame: u64,
        changed: usize,
        alert: bool,
    },
    GestureEvent {
        g: u8,
        frame: u64,
    },
    /// Reply to a voice command that matched no phrase.
    NoMatch {
        text: String,
    },
    Ack,
    Error {
        code: String,
        detail: String,
    },
}

impl ServerMessage {
    pub fn error(e: &ControlError) -> Self {
        ServerMessage::Error {
            code: e.code().to_owned(),
            detail: e.to_string(),
        }
    }
}

pub fn encode_image(frame: &Frame) -> String {
    STANDARD.encode(encode_netpbm(frame))
}

pub fn decode_image(b64: &str) -> Result<Frame, ControlError> {
    let bytes = STANDARD
        .decode(b64)
        .map_err(|e| ControlError::BadImage(e.to_string()))?;
    Ok(decode_netpbm(&bytes)?)
}

pub fn parse_client_line(line: &str) -> Result<ClientMessage, ControlError> {
    serde_json::from_str(line).map_err(|e| ControlError::Malformed(e.to_string()))
}

pub fn to_line<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("protocol messages serialize")
}
