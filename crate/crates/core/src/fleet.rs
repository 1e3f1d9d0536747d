//! Modular QPU fleet: device parameters, the built-in default fleet, and the
//! runtime and LPST estimators used by grouping and scheduling.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::workload::Job;
use crate::{Error, Result, Seconds};

/// One QPU module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    pub name: String,
    pub num_qubits: u32,
    pub err_1q: f64,
    pub err_2q: f64,
    pub err_readout: f64,
    pub t_1q: Seconds,
    pub t_2q: Seconds,
    pub t_readout: Seconds,
    /// Load/unload overhead paid once per job or group.
    pub t_load: Seconds,
    /// Classical interconnect latency to peer modules.
    pub tau_link: Seconds,
    /// Classical post-processing per sub-job.
    pub gamma_proc: Seconds,
}

impl Device {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(format!("device {}: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::Validation("device name must be non-empty".into()));
        }
        if self.num_qubits == 0 {
            return bad("num_qubits must be positive");
        }
        for (label, rate) in [
            ("err_1q", self.err_1q),
            ("err_2q", self.err_2q),
            ("err_readout", self.err_readout),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(&format!("{label} must lie in [0, 1]"));
            }
        }
        for (label, t) in [
            ("t_1q", self.t_1q),
            ("t_2q", self.t_2q),
            ("t_readout", self.t_readout),
            ("tau_link", self.tau_link),
        ] {
            if !(t > 0.0) || !t.is_finite() {
                return bad(&format!("{label} must be a positive duration"));
            }
        }
        for (label, t) in [("t_load", self.t_load), ("gamma_proc", self.gamma_proc)] {
            if !(t >= 0.0) || !t.is_finite() {
                return bad(&format!("{label} must be a non-negative duration"));
            }
        }
        Ok(())
    }

    pub fn fits(&self, job: &Job) -> bool {
        job.width() <= self.num_qubits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fleet {
    pub devices: Vec<Device>,
}

impl Fleet {
    pub fn new(devices: Vec<Device>) -> Result<Fleet> {
        let fleet = Fleet { devices };
        fleet.validate()?;
        Ok(fleet)
    }

    pub fn validate(&self) -> Result<()> {
        if self.devices.is_empty() {
            return Err(Error::Validation("fleet must contain at least one device".into()));
        }
        let mut names = BTreeSet::new();
        for d in &self.devices {
            d.validate()?;
            if !names.insert(d.name.as_str()) {
                return Err(Error::Validation(format!("duplicate device name {}", d.name)));
            }
        }
        Ok(())
    }

    /// Largest module capacity `max_m Q_m`.
    pub fn max_capacity(&self) -> u32 {
        self.devices.iter().map(|d| d.num_qubits).max().unwrap_or(0)
    }

    /// The largest device, lexicographically first by name among equals.
    /// Grouping uses it as the reference for device-independent runtimes.
    pub fn reference_device(&self) -> &Device {
        let max = self.max_capacity();
        self.devices
            .iter()
            .filter(|d| d.num_qubits == max)
            .min_by(|a, b| a.name.cmp(&b.name))
            .expect("validated fleet is non-empty")
    }

    pub fn device(&self, name: &str) -> Option<&Device> {
        self.devices.iter().find(|d| d.name == name)
    }

    /// Devices ordered by name.
    pub fn sorted_devices(&self) -> Vec<&Device> {
        let mut v: Vec<&Device> = self.devices.iter().collect();
        v.sort_by(|a, b| a.name.cmp(&b.name));
        v
    }
}

/// Built-in synthetic fleet: eleven modules, two peer-linked 127-qubit
/// modules and nine smaller ones of 27 to 65 qubits with varied error rates.
/// The numbers are representative, not a calibration snapshot.
pub fn default_fleet() -> Fleet {
    #[allow(clippy::too_many_arguments)]
    fn dev(name: &str, q: u32, e1: f64, e2: f64, ero: f64, t2q: f64, tro: f64, load: f64) -> Device {
        Device {
            name: name.into(),
            num_qubits: q,
            err_1q: e1,
            err_2q: e2,
            err_readout: ero,
            t_1q: 60e-9,
            t_2q: t2q,
            t_readout: tro,
            t_load: load,
            tau_link: 1e-6,
            gamma_proc: 10e-3,
        }
    }
    let devices = alloc::vec![
        dev("qpu127a", 127, 2.4e-4, 7.4e-3, 1.3e-2, 660e-9, 4.0e-6, 1.0),
        dev("qpu127b", 127, 2.8e-4, 8.1e-3, 1.5e-2, 660e-9, 4.0e-6, 1.0),
        dev("qpu65a", 65, 3.0e-4, 9.0e-3, 1.8e-2, 560e-9, 3.5e-6, 0.8),
        dev("qpu65b", 65, 3.5e-4, 1.05e-2, 2.0e-2, 560e-9, 3.5e-6, 0.8),
        dev("qpu65c", 65, 4.0e-4, 1.2e-2, 2.4e-2, 600e-9, 3.5e-6, 0.8),
        dev("qpu33a", 33, 3.2e-4, 9.5e-3, 1.9e-2, 500e-9, 3.0e-6, 0.6),
        dev("qpu33b", 33, 4.5e-4, 1.3e-2, 2.6e-2, 500e-9, 3.0e-6, 0.6),
        dev("qpu27a", 27, 2.6e-4, 8.0e-3, 1.6e-2, 450e-9, 2.5e-6, 0.5),
        dev("qpu27b", 27, 3.6e-4, 1.0e-2, 2.1e-2, 450e-9, 2.5e-6, 0.5),
        dev("qpu27c", 27, 5.0e-4, 1.4e-2, 2.8e-2, 480e-9, 2.5e-6, 0.5),
        dev("qpu27d", 27, 6.0e-4, 1.6e-2, 3.2e-2, 480e-9, 2.5e-6, 0.5),
    ];
    Fleet { devices }
}

/// Execution time of `job` alone on `device`:
/// `shots * (depth * t_2q + t_readout) + t_load`.
pub fn runtime_estimate(job: &Job, device: &Device) -> Result<Seconds> {
    if !device.fits(job) {
        return Err(Error::Capacity {
            job: job.id.clone(),
            device: device.name.clone(),
        });
    }
    Ok(runtime_unchecked(job, device))
}

pub(crate) fn runtime_unchecked(job: &Job, device: &Device) -> Seconds {
    let per_shot = f64::from(job.circuit.depth) * device.t_2q + device.t_readout;
    job.shots as f64 * per_shot + device.t_load
}

/// Log probability of a successful trial:
/// `G2 ln(1 - e2) + G1 ln(1 - e1) + q ln(1 - e_ro)`.
///
/// Always `<= 0`; a device with an error rate of exactly 1 yields
/// `f64::NEG_INFINITY`.
pub fn lpst(job: &Job, device: &Device) -> Result<f64> {
    if !device.fits(job) {
        return Err(Error::Capacity {
            job: job.id.clone(),
            device: device.name.clone(),
        });
    }
    Ok(lpst_unchecked(job, device))
}

pub(crate) fn lpst_unchecked(job: &Job, device: &Device) -> f64 {
    if device.err_1q >= 1.0 || device.err_2q >= 1.0 || device.err_readout >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let c = &job.circuit;
    c.two_q_gates() as f64 * libm::log1p(-device.err_2q)
        + c.one_q_gates as f64 * libm::log1p(-device.err_1q)
        + f64::from(c.num_qubits) * libm::log1p(-device.err_readout)
}
