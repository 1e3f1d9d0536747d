//! Circuit and job model, the volume-based shot rule, and seeded workload
//! generators for the three experiment classes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Seconds};

/// Default shot count at volume 1.
pub const DEFAULT_SHOT_BASE: u64 = 1000;
/// Default multiplicative shot increase per volume decade.
pub const DEFAULT_SHOT_FACTOR: f64 = 1.5;

/// Abstract description of a quantum program: width, depth, and a coupling
/// multigraph whose edge weights count two-qubit gates between qubit pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub id: String,
    pub num_qubits: u32,
    pub depth: u32,
    /// `(a, b, weight)` with `a < b`, sorted, no duplicate pairs.
    pub coupling: Vec<(u32, u32, u32)>,
    pub one_q_gates: u64,
}

impl Circuit {
    /// Builds a circuit, canonicalising the coupling list (pairs ordered,
    /// duplicates merged, zero weights dropped) and checking invariants.
    pub fn new(
        id: impl Into<String>,
        num_qubits: u32,
        depth: u32,
        coupling: impl IntoIterator<Item = (u32, u32, u32)>,
        one_q_gates: u64,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for (a, b, w) in coupling {
            if a == b {
                return Err(Error::Validation(format!("coupling edge ({a}, {b}) is a self-loop")));
            }
            if w == 0 {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            let slot = merged.entry(key).or_insert(0);
            *slot = slot
                .checked_add(w)
                .ok_or_else(|| Error::Overflow("coupling weight".into()))?;
        }
        let circuit = Circuit {
            id: id.into(),
            num_qubits,
            depth,
            coupling: merged.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
            one_q_gates,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::Validation("num_qubits must be positive".into()));
        }
        if self.depth == 0 {
            return Err(Error::Validation("depth must be positive".into()));
        }
        let mut seen = BTreeSet::new();
        for &(a, b, w) in &self.coupling {
            if a >= self.num_qubits || b >= self.num_qubits {
                return Err(Error::Validation(format!(
                    "coupling edge ({a}, {b}) references a qubit >= num_qubits ({})",
                    self.num_qubits
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("coupling edge ({a}, {b}) is a self-loop")));
            }
            if w == 0 {
                return Err(Error::Validation(format!(
                    "coupling edge ({a}, {b}) must have positive weight"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Validation(format!("coupling edge ({a}, {b}) listed twice")));
            }
        }
        Ok(())
    }

    /// Width times depth.
    pub fn volume(&self) -> u64 {
        u64::from(self.num_qubits) * u64::from(self.depth)
    }

    /// Total two-qubit gate count (sum of coupling weights).
    pub fn two_q_gates(&self) -> u64 {
        self.coupling.iter().map(|&(_, _, w)| u64::from(w)).sum()
    }
}

/// Causal role of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    Flat,
    Upstream,
    Downstream,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Flat => "Flat",
            Stage::Upstream => "Upstream",
            Stage::Downstream => "Downstream",
        }
    }
}

/// A schedulable unit: an original job, or a fragment variant of a cut job.
///
/// LO fragment variants keep `stage = Flat` but carry `parent_id`,
/// `cut_index` and `n_cut`, so the lineage is recoverable without implying a
/// causal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    pub circuit: Circuit,
    pub shots: u64,
    pub arrival_time: Seconds,
    pub parent_id: Option<String>,
    pub stage: Stage,
    pub cut_index: Option<u32>,
    pub n_cut: u32,
}

impl Job {
    /// An uncut job.
    pub fn flat(id: impl Into<String>, mut circuit: Circuit, shots: u64, arrival_time: Seconds) -> Job {
        let id = id.into();
        circuit.id = id.clone();
        Job {
            id,
            circuit,
            shots,
            arrival_time,
            parent_id: None,
            stage: Stage::Flat,
            cut_index: None,
            n_cut: 0,
        }
    }

    /// Qubit demand `q_j`.
    pub fn width(&self) -> u32 {
        self.circuit.num_qubits
    }

    pub fn is_sub_job(&self) -> bool {
        self.parent_id.is_some()
    }

    /// Id of the original job this unit belongs to.
    pub fn root_id(&self) -> &str {
        self.parent_id.as_deref().unwrap_or(&self.id)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Validation(format!("job {}: {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::Validation("job id must be non-empty".into()));
        }
        if let Err(Error::Validation(msg)) = self.circuit.validate() {
            return bad(msg);
        }
        if self.shots == 0 {
            return bad("shots must be positive".into());
        }
        if !(self.arrival_time >= 0.0) || !self.arrival_time.is_finite() {
            return bad("arrival_time must be a finite non-negative number".into());
        }
        if self.stage != Stage::Flat && self.parent_id.is_none() {
            return bad(format!("stage {} requires parent_id", self.stage.as_str()));
        }
        if self.parent_id.is_some() != self.cut_index.is_some() {
            return bad("parent_id and cut_index must be set together".into());
        }
        if self.stage != Stage::Flat && self.n_cut == 0 {
            return bad(format!("stage {} requires n_cut >= 1", self.stage.as_str()));
        }
        if self.parent_id.is_none() && self.n_cut != 0 {
            return bad("uncut job must have n_cut = 0".into());
        }
        Ok(())
    }
}

/// Validates every job and rejects duplicate ids.
pub fn validate_jobs(jobs: &[Job]) -> Result<()> {
    let mut ids = BTreeSet::new();
    for job in jobs {
        job.validate()?;
        if !ids.insert(job.id.as_str()) {
            return Err(Error::Validation(format!("duplicate job id {}", job.id)));
        }
    }
    Ok(())
}

/// `round(base * factor^b)` with `b = floor(log10(max(width * depth, 1)))`.
pub fn shots_for_volume(width: u32, depth: u32, base: u64, factor: f64) -> u64 {
    let volume = (u64::from(width) * u64::from(depth)).max(1);
    let mut decade = 0i32;
    let mut v = volume;
    while v >= 10 {
        v /= 10;
        decade += 1;
    }
    let shots = libm::round(base as f64 * libm::pow(factor, f64::from(decade)));
    (shots as u64).max(1)
}

/// Knobs of the synthetic circuit generator.
///
/// Qubits sit on a line split into blocks of `block_width`. Each layer places
/// a brickwork of nearest-neighbour gates inside every block; a fraction of
/// those are replaced by random long-range pairs within the same block.
/// Adjacent blocks are joined by `bridge_gates` gates in total, so large
/// circuits have cheap cut points at block boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitGenParams {
    pub block_width: u32,
    pub long_range_fraction: f64,
    pub bridge_gates: u32,
    /// Probability that a qubit receives a single-qubit gate in a layer.
    pub one_q_prob: f64,
}

impl Default for CircuitGenParams {
    fn default() -> Self {
        CircuitGenParams {
            block_width: 24,
            long_range_fraction: 0.1,
            bridge_gates: 1,
            one_q_prob: 0.5,
        }
    }
}

/// Random circuit with default generator parameters.
pub fn gen_random_circuit<R: Rng + ?Sized>(width: u32, depth: u32, rng: &mut R) -> Circuit {
    gen_random_circuit_with(width, depth, &CircuitGenParams::default(), rng)
}

pub fn gen_random_circuit_with<R: Rng + ?Sized>(
    width: u32,
    depth: u32,
    params: &CircuitGenParams,
    rng: &mut R,
) -> Circuit {
    let width = width.max(1);
    let depth = depth.max(1);
    let block = params.block_width.max(2);
    let blocks: Vec<(u32, u32)> = (0..width)
        .step_by(block as usize)
        .map(|start| (start, (start + block).min(width)))
        .collect();

    let mut weights: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut one_q = 0u64;
    for layer in 0..depth {
        for &(lo, hi) in &blocks {
            let mut i = lo + layer % 2;
            while i + 1 < hi {
                let pair = if hi - lo > 2 && rng.gen_bool(params.long_range_fraction) {
                    let a = rng.gen_range(lo..hi);
                    let mut b = rng.gen_range(lo..hi - 1);
                    if b >= a {
                        b += 1;
                    }
                    (a.min(b), a.max(b))
                } else {
                    (i, i + 1)
                };
                *weights.entry(pair).or_insert(0) += 1;
                i += 2;
            }
        }
        for _ in 0..width {
            if rng.gen_bool(params.one_q_prob) {
                one_q += 1;
            }
        }
    }
    // Keep every block internally connected along the line.
    for &(lo, hi) in &blocks {
        for i in lo..hi.saturating_sub(1) {
            weights.entry((i, i + 1)).or_insert(1);
        }
    }
    for pair in blocks.windows(2) {
        let boundary = pair[1].0;
        *weights.entry((boundary - 1, boundary)).or_insert(0) += params.bridge_gates.max(1);
    }

    Circuit {
        id: "circuit".to_string(),
        num_qubits: width,
        depth,
        coupling: weights.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
        one_q_gates: one_q,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WorkloadClass {
    Small,
    LargeMandatory,
    RandomHeterogeneous,
}

impl WorkloadClass {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadClass::Small => "small",
            WorkloadClass::LargeMandatory => "large",
            WorkloadClass::RandomHeterogeneous => "random",
        }
    }
}

/// Parameters of a synthetic workload.
///
/// Regular jobs draw their width from `width_range`; with probability
/// `large_fraction` a job instead draws from `large_width_range`, which is
/// meant to lie above the largest device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub class: WorkloadClass,
    pub count: usize,
    pub arrival_rate: f64,
    pub width_range: (u32, u32),
    pub depth_range: (u32, u32),
    pub large_fraction: f64,
    pub large_width_range: (u32, u32),
    pub seed: u64,
    pub shot_base: u64,
    pub shot_factor: f64,
    pub circuit: CircuitGenParams,
}

impl WorkloadSpec {
    /// Class defaults. The random class spreads widths uniformly over
    /// 5..=160 (156 values, 33 of them above 127).
    pub fn for_class(class: WorkloadClass, count: usize, seed: u64) -> WorkloadSpec {
        let base = WorkloadSpec {
            class,
            count,
            arrival_rate: 1.0,
            width_range: (5, 40),
            depth_range: (10, 100),
            large_fraction: 0.0,
            large_width_range: (128, 160),
            seed,
            shot_base: DEFAULT_SHOT_BASE,
            shot_factor: DEFAULT_SHOT_FACTOR,
            circuit: CircuitGenParams::default(),
        };
        match class {
            WorkloadClass::Small => base,
            WorkloadClass::LargeMandatory => WorkloadSpec {
                large_fraction: 0.1,
                large_width_range: (128, 150),
                arrival_rate: 0.5,
                ..base
            },
            WorkloadClass::RandomHeterogeneous => WorkloadSpec {
                width_range: (5, 127),
                depth_range: (10, 200),
                large_fraction: 33.0 / 156.0,
                large_width_range: (128, 160),
                arrival_rate: 0.5,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (u32, u32)| lo >= 1 && lo <= hi;
        if !range_ok(self.width_range) {
            return Err(Error::Validation(
                "width_range must be a non-empty range of positive widths".into(),
            ));
        }
        if !range_ok(self.depth_range) {
            return Err(Error::Validation(
                "depth_range must be a non-empty range of positive depths".into(),
            ));
        }
        if !(self.arrival_rate > 0.0) || !self.arrival_rate.is_finite() {
            return Err(Error::Validation("arrival_rate must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.large_fraction) {
            return Err(Error::Validation("large_fraction must lie in [0, 1]".into()));
        }
        if self.class == WorkloadClass::Small && self.large_fraction != 0.0 {
            return Err(Error::Validation("small workloads must have large_fraction = 0".into()));
        }
        if self.large_fraction > 0.0 && !range_ok(self.large_width_range) {
            return Err(Error::Validation("large_width_range must be non-empty".into()));
        }
        if self.shot_base == 0 || !(self.shot_factor > 1.0) {
            return Err(Error::Validation(
                "shot base must be positive and shot factor > 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.circuit.long_range_fraction) || !(0.0..=1.0).contains(&self.circuit.one_q_prob) {
            return Err(Error::Validation(
                "circuit generator probabilities must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Draws a Poisson-arrival workload. Jobs come back sorted by arrival time
/// with ids `j0000`, `j0001`, ... in arrival order.
pub fn gen_workload(spec: &WorkloadSpec) -> Result<Vec<Job>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let digits = {
        let mut d = 4;
        let mut n = spec.count / 10_000;
        while n > 0 {
            d += 1;
            n /= 10;
        }
        d
    };
    let mut jobs = Vec::with_capacity(spec.count);
    let mut clock = 0.0f64;
    for i in 0..spec.count {
        let u: f64 = rng.gen();
        clock += -libm::log1p(-u) / spec.arrival_rate;
        let large = spec.large_fraction > 0.0 && rng.gen_bool(spec.large_fraction);
        let (lo, hi) = if large {
            spec.large_width_range
        } else {
            spec.width_range
        };
        let width = rng.gen_range(lo..=hi);
        let depth = rng.gen_range(spec.depth_range.0..=spec.depth_range.1);
        let circuit = gen_random_circuit_with(width, depth, &spec.circuit, &mut rng);
        let shots = shots_for_volume(width, depth, spec.shot_base, spec.shot_factor);
        jobs.push(Job::flat(format!("j{i:0digits$}"), circuit, shots, clock));
    }
    Ok(jobs)
}
