//! The lab control plane: text-command dispatch to fans and lights, motion
//! alerts from a background model, and doorbell entry authorization decided
//! by an operator.
//!
//! [`ControlPlane`] is the synchronous state machine. [`server`] puts it
//! behind a newline-delimited JSON protocol over TCP and a WebSocket bridge.

mod entry;
mod grammar;
mod motion;
mod plane;
mod registry;

pub mod client;
pub mod protocol;
pub mod server;

use thiserror::Error;

pub use entry::{Decision, DoorLock, EntryBook, EntryConfig, EntrySession, EntryState, EntryTransition};
pub use grammar::{normalize_phrase, CommandGrammar, DeviceAction, DeviceCommand, GrammarEntry};
pub use motion::{BackgroundModel, MotionConfig, MotionDetector, MotionReport};
pub use plane::{ControlPlane, ControlPlaneConfig, Outcome, PeerRole};
pub use registry::{parse_command_log, Ack, Device, DeviceKind, DeviceRegistry, DeviceState};

use crate::imaging::ImageError;

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("phrase {0:?} appears twice after normalization")]
    DuplicatePhrase(String),
    #[error("unknown device {0:?}")]
    UnknownDevice(String),
    #[error("device {device:?} is a {kind:?} and cannot {action:?}")]
    IllegalAction {
        device: String,
        kind: DeviceKind,
        action: DeviceAction,
    },
    #[error("door {0:?} can only be opened through an entry session")]
    DoorBypass(String),
    #[error("unknown entry session {0}")]
    UnknownSession(u64),
    #[error("entry session {id} is already {state:?}")]
    StaleDecision { id: u64, state: EntryState },
    #[error("door is not locked")]
    DoorNotLocked,
    #[error("frame is {actual:?}, background model is {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("a {role:?} peer may not send {message}")]
    Forbidden {
        role: Option<PeerRole>,
        message: &'static str,
    },
    #[error("bad image: {0}")]
    BadImage(String),
    #[error("malformed message: {0}")]
    Malformed(String),
}

impl From<ImageError> for ControlError {
    fn from(e: ImageError) -> Self {
        ControlError::BadImage(e.to_string())
    }
}

impl ControlError {
    /// Stable code carried in protocol `error` messages.
    pub fn code(&self) -> &'static str {
        match self {
            ControlError::DuplicatePhrase(_) => "duplicate_phrase",
            ControlError::UnknownDevice(_) => "unknown_device",
            ControlError::IllegalAction { .. } => "illegal_action",
            ControlError::DoorBypass(_) => "door_bypass",
            ControlError::UnknownSession(_) => "unknown_session",
            ControlError::StaleDecision { .. } => "stale_decision",
            ControlError::DoorNotLocked => "door_not_locked",
            ControlError::DimensionMismatch { .. } => "dimension_mismatch",
            ControlError::Forbidden { .. } => "forbidden",
            ControlError::BadImage(_) => "bad_image",
            ControlError::Malformed(_) => "malformed",
        }
    }
}
