use std::io::Write;

use super::event::EventKind;
use crate::error::Result;
use crate::fmt::format_g6;

/// Column order of the exported event log.
pub const EVENT_LOG_HEADER: &str = "time,kind,worker,piece_row,payload_size";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedEvent {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
    /// Tag of the piece the event concerns (the encoding row for coded pieces).
    pub piece_row: Option<usize>,
    /// Numbers carried or produced: inbound operands on arrival, result length afterwards.
    pub payload_size: usize,
}

/// Writes one CSV record per event. Missing worker or row fields are left empty.
pub fn write_event_log_csv<W: Write>(events: &[LoggedEvent], mut out: W) -> Result<()> {
    writeln!(out, "{EVENT_LOG_HEADER}")?;
    for e in events {
        let worker = e.kind.worker().map(|w| w.to_string()).unwrap_or_default();
        let row = e.piece_row.map(|r| r.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", format_g6(e.time), e.kind.name(), worker, row, e.payload_size)?;
    }
    Ok(())
}
