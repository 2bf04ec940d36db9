//! Interactive simulation of elaborated processes, on a terminal or over
//! WebSocket.

pub mod cli;
pub mod console;
pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{Command, RejectReason, SimMsg, PROTOCOL_VERSION};
pub use session::{Session, SimConfig, Status};
