//! A line-protocol client and a simulated door peer.

use std::time::Duration;

use thiserror::Error;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::{TcpStream, ToSocketAddrs};
use tokio::time::{timeout_at, Instant};

use super::protocol::{encode_image, to_line, ClientMessage, ServerMessage};
use super::{DeviceState, EntryState, PeerRole};
use crate::imaging::Frame;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("no matching message before the deadline")]
    Timeout,
    #[error("server closed the connection")]
    Closed,
    #[error("undecodable server message: {0}")]
    Decode(#[from] serde_json::Error),
    #[error("unexpected reply {0:?}")]
    Unexpected(Box<ServerMessage>),
}

pub struct LineClient {
    lines: Lines<BufReader<OwnedReadHalf>>,
    writer: OwnedWriteHalf,
}

impl LineClient {
    pub async fn connect(addr: impl ToSocketAddrs) -> Result<Self, ClientError> {
        let stream = TcpStream::connect(addr).await?;
        stream.set_nodelay(true)?;
        let (r, w) = stream.into_split();
        Ok(Self {
            lines: BufReader::new(r).lines(),
            writer: w,
        })
    }

    /// Send one raw line; a newline is appended.
    pub async fn send_raw(&mut self, line: &str) -> Result<(), ClientError> {
        self.writer.write_all(line.as_bytes()).await?;
        self.writer.write_all(b"\n").await?;
        Ok(())
    }

    pub async fn send(&mut self, msg: &ClientMessage) -> Result<(), ClientError> {
        self.send_raw(&to_line(msg)).await
    }

    pub async fn recv(&mut self, wait: Duration) -> Result<ServerMessage, ClientError> {
        self.recv_until(wait, |_| true).await
    }

    /// Read until a message satisfies `pred`, discarding the rest.
    pub async fn recv_until(
        &mut self,
        wait: Duration,
        mut pred: impl FnMut(&ServerMessage) -> bool,
    ) -> Result<ServerMessage, ClientError> {
        let deadline = Instant::now() + wait;
        loop {
            let line = timeout_at(deadline, self.lines.next_line())
                .await
                .map_err(|_| ClientError::Timeout)??
                .ok_or(ClientError::Closed)?;
            let msg: ServerMessage = serde_json::from_str(&line)?;
            if pred(&msg) {
                return Ok(msg);
            }
        }
    }

    /// Announce a role and wait for the welcome snapshot.
    pub async fn hello(&mut self, role: PeerRole, wait: Duration) -> Result<ServerMessage, ClientError> {
        self.send(&ClientMessage::Hello { role }).await?;
        self.recv_until(wait, |m| matches!(m, ServerMessage::Welcome { .. }))
            .await
    }
}

/// Stands in for the doorbell camera and lock actuator. It rings with a
/// snapshot and tracks the lock state the server broadcasts.
pub struct DoorPeer {
    client: LineClient,
    door_id: String,
    state: DeviceState,
}

impl DoorPeer {
    pub async fn connect(addr: impl ToSocketAddrs, door_id: &str, wait: Duration) -> Result<Self, ClientError> {
        let mut client = LineClient::connect(addr).await?;
        let state = match client.hello(PeerRole::Door, wait).await? {
            ServerMessage::Welcome { devices, .. } => devices
                .iter()
                .find(|d| d.device == door_id)
                .map_or(DeviceState::Locked, |d| d.state),
            other => return Err(ClientError::Unexpected(Box::new(other))),
        };
        Ok(Self {
            client,
            door_id: door_id.to_owned(),
            state,
        })
    }

    pub fn state(&self) -> DeviceState {
        self.state
    }

    pub fn is_unlocked(&self) -> bool {
        self.state == DeviceState::Unlocked
    }

    fn observe(&mut self, msg: &ServerMessage) {
        if let ServerMessage::DeviceState { device, state } = msg {
            if *device == self.door_id {
                self.state = *state;
            }
        }
    }

    /// Ring the bell; returns the entry session id.
    pub async fn ring(&mut self, snapshot: &Frame, wait: Duration) -> Result<u64, ClientError> {
        self.client
            .send(&ClientMessage::Ring {
                image_b64: encode_image(snapshot),
            })
            .await?;
        // Broadcasts queued before the ring may come first; a pending result
        // only ever goes to the ringer.
        let deadline = Instant::now() + wait;
        loop {
            let msg = self
                .client
                .recv(deadline.saturating_duration_since(Instant::now()))
                .await?;
            self.observe(&msg);
            match msg {
                ServerMessage::EntryResult {
                    id,
                    state: EntryState::Pending,
                } => return Ok(id),
                ServerMessage::Error { .. } => return Err(ClientError::Unexpected(Box::new(msg))),
                _ => {}
            }
        }
    }

    /// Follow broadcasts until the door reaches `state`.
    pub async fn wait_for(&mut self, state: DeviceState, wait: Duration) -> Result<(), ClientError> {
        if self.state == state {
            return Ok(());
        }
        let deadline = Instant::now() + wait;
        while self.state != state {
            let msg = self
                .client
                .recv(deadline.saturating_duration_since(Instant::now()))
                .await?;
            self.observe(&msg);
        }
        Ok(())
    }
}
