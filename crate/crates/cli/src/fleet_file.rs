//! Fleet calibration files: a `cutsched-fleet` header, then one device per
//! line.

use std::path::Path;

use cutsched_core::fleet::{default_fleet, Device, Fleet};

use crate::error::{bare_message, CliError, Result};
use crate::files::{parse_jsonl, read_text, to_jsonl, write_atomic, Header};

pub const FLEET_FORMAT: &str = "cutsched-fleet";

/// Environment variable naming the fleet file used when `--fleet` is absent.
pub const FLEET_ENV: &str = "CUTSCHED_FLEET";

pub fn fleet_to_string(fleet: &Fleet) -> String {
    to_jsonl(&Header::new(FLEET_FORMAT), &fleet.devices)
}

pub fn parse_fleet(path: &Path, text: &str) -> Result<Fleet> {
    let (_, records) = parse_jsonl::<Device>(path, text, FLEET_FORMAT)?;
    let mut devices = Vec::with_capacity(records.len());
    for (line, device) in records {
        let parse_err = |msg: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        device.validate().map_err(|e| parse_err(bare_message(&e)))?;
        if devices.iter().any(|d: &Device| d.name == device.name) {
            return Err(parse_err(format!("duplicate device name {}", device.name)));
        }
        devices.push(device);
    }
    Ok(Fleet::new(devices)?)
}

pub fn load_fleet(path: &Path) -> Result<Fleet> {
    parse_fleet(path, &read_text(path)?)
}

/// The fleet at `path`, or the built-in default fleet.
pub fn load_fleet_or_default(path: Option<&Path>) -> Result<Fleet> {
    match path {
        Some(p) => load_fleet(p),
        None => Ok(default_fleet()),
    }
}

pub fn save_fleet(path: &Path, fleet: &Fleet) -> Result<()> {
    write_atomic(path, fleet_to_string(fleet).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: &str = "f.jsonl";

    #[test]
    fn default_fleet_round_trips() {
        let fleet = default_fleet();
        let text = fleet_to_string(&fleet);
        assert_eq!(parse_fleet(Path::new(P), &text).unwrap(), fleet);
        assert_eq!(text.lines().count(), 12);
    }

    #[test]
    fn empty_fleet_is_rejected() {
        let text = fleet_to_string(&Fleet { devices: vec![] });
        let msg = parse_fleet(Path::new(P), &text).unwrap_err().to_string();
        assert!(msg.contains("fleet must contain at least one device"), "{msg}");
    }

    #[test]
    fn bad_devices_are_rejected_with_line() {
        let mut fleet = default_fleet();
        fleet.devices[2].name = fleet.devices[0].name.clone();
        let msg = parse_fleet(Path::new(P), &fleet_to_string(&fleet))
            .unwrap_err()
            .to_string();
        assert!(msg.contains(":4:") && msg.contains("duplicate device name"), "{msg}");

        let mut fleet = default_fleet();
        fleet.devices[0].num_qubits = 0;
        let msg = parse_fleet(Path::new(P), &fleet_to_string(&fleet))
            .unwrap_err()
            .to_string();
        assert!(msg.contains(":2:"), "{msg}");

        let text = fleet_to_string(&default_fleet()).replacen("\"num_qubits\"", "\"qubits\"", 1);
        assert!(parse_fleet(Path::new(P), &text).is_err());
    }
}
