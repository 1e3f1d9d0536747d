//! Cut planning: low-crossing bipartitions of a circuit's coupling graph,
//! LO/LOCC sampling overheads, fragment-variant expansion into sub-jobs, and
//! the classical delay between upstream and downstream LOCC fragments.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::workload::{Circuit, Job, Stage};
use crate::{Error, Result, Seconds};

/// Largest circuit searched exhaustively by [`find_bipartition`].
pub const EXHAUSTIVE_MAX_QUBITS: u32 = 12;

/// Upper bound on the number of sub-jobs a single cut may expand into.
pub const MAX_SUB_JOBS: u64 = 1 << 20;

/// Classical bits sent per cut per shot (the two teleportation outcomes).
pub const DEFAULT_BETA_COMM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CutMode {
    #[serde(rename = "LO")]
    Lo,
    #[serde(rename = "LOCC")]
    Locc,
}

impl CutMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CutMode::Lo => "LO",
            CutMode::Locc => "LOCC",
        }
    }

    pub fn overhead_kind(self) -> OverheadKind {
        match self {
            CutMode::Lo => OverheadKind::Lo,
            CutMode::Locc => OverheadKind::Locc,
        }
    }
}

/// Which sampling-overhead model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverheadKind {
    /// Gate cut with local operations: 9 per cut.
    Lo,
    /// Cut with classical communication: 4 per cut.
    Locc,
    /// Wire cut with local operations: 16 per cut.
    LoWire,
}

impl OverheadKind {
    fn base(self) -> u64 {
        match self {
            OverheadKind::Lo => 9,
            OverheadKind::Locc => 4,
            OverheadKind::LoWire => 16,
        }
    }
}

/// Sampling overhead `base^n_cut`, exact.
pub fn overhead(kind: OverheadKind, n_cut: u32) -> Result<u64> {
    kind.base()
        .checked_pow(n_cut)
        .ok_or_else(|| Error::Overflow(format!("{}^{n_cut} exceeds u64", kind.base())))
}

/// Global limits on cutting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutBudget {
    /// Largest admissible sampling overhead for an optional cut.
    pub max_overhead: u64,
    /// A flat job is eligible for an adaptive cut when its width is at
    /// least this fraction of the largest device.
    pub adaptive_threshold: f64,
}

impl Default for CutBudget {
    fn default() -> Self {
        CutBudget {
            max_overhead: 729,
            adaptive_threshold: 0.5,
        }
    }
}

impl CutBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_overhead == 0 {
            return Err(Error::Validation("budget must be positive".into()));
        }
        if !(self.adaptive_threshold > 0.0 && self.adaptive_threshold <= 1.0) {
            return Err(Error::Validation("theta must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Whether `job` may be considered for an adaptive (optional) cut.
    pub fn eligible(&self, job: &Job, fleet_max_q: u32) -> bool {
        job.stage == Stage::Flat
            && job.parent_id.is_none()
            && job.width() >= 2
            && f64::from(job.width()) >= self.adaptive_threshold * f64::from(fleet_max_q)
    }
}

/// Two-sided split of a circuit's qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub part_a: Vec<u32>,
    pub part_b: Vec<u32>,
    /// Total coupling weight crossing the split.
    pub n_cut: u32,
}

/// A chosen cut of one job.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub parent_id: String,
    pub part_a: Vec<u32>,
    pub part_b: Vec<u32>,
    pub n_cut: u32,
    pub mode: CutMode,
    pub overhead: u64,
    pub ancilla_per_side: u32,
}

impl CutPlan {
    /// Variants emitted per fragment.
    pub fn variants_per_fragment(&self) -> u64 {
        self.overhead
    }

    pub fn sub_job_count(&self) -> u64 {
        self.overhead.saturating_mul(2)
    }
}

struct Graph {
    n: usize,
    adj: Vec<Vec<(usize, u64)>>,
}

impl Graph {
    fn new(circuit: &Circuit) -> Graph {
        let n = circuit.num_qubits as usize;
        let mut adj = vec![Vec::new(); n];
        for &(a, b, w) in &circuit.coupling {
            adj[a as usize].push((b as usize, u64::from(w)));
            adj[b as usize].push((a as usize, u64::from(w)));
        }
        Graph { n, adj }
    }

    fn cut_weight(&self, side: &[bool]) -> u64 {
        let mut total = 0;
        for v in 0..self.n {
            for &(u, w) in &self.adj[v] {
                if v < u && side[v] != side[u] {
                    total += w;
                }
            }
        }
        total
    }
}

fn imbalance(size_a: usize, n: usize) -> usize {
    size_a.abs_diff(n - size_a)
}

/// Minimum-crossing split of `circuit` with both sides at most `q_target`
/// qubits. Exact up to [`EXHAUSTIVE_MAX_QUBITS`] qubits; above that a
/// deterministic line-sweep seed refined by Fiduccia–Mattheyses style
/// vertex moves. Among equal crossings the more balanced split wins.
/// `part_a` always contains qubit 0.
pub fn find_bipartition(circuit: &Circuit, q_target: u32) -> Result<Bipartition> {
    let n = circuit.num_qubits;
    if n < 2 || n.div_ceil(2) > q_target {
        return Err(Error::InfeasibleCut {
            job: circuit.id.clone(),
            q_target,
        });
    }
    let graph = Graph::new(circuit);
    let side = if n <= EXHAUSTIVE_MAX_QUBITS {
        exhaustive(&graph, q_target as usize)
    } else {
        let seed = sweep_seed(&graph, q_target as usize);
        refine(&graph, seed, q_target as usize)
    };
    let n_cut = graph.cut_weight(&side);
    let n_cut = u32::try_from(n_cut).map_err(|_| Error::Overflow("crossing weight".into()))?;
    let (part_a, part_b) = split_sides(&side);
    Ok(Bipartition { part_a, part_b, n_cut })
}

fn split_sides(side: &[bool]) -> (Vec<u32>, Vec<u32>) {
    let a_flag = side[0];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (v, &s) in side.iter().enumerate() {
        if s == a_flag {
            a.push(v as u32);
        } else {
            b.push(v as u32);
        }
    }
    (a, b)
}

fn exhaustive(graph: &Graph, q: usize) -> Vec<bool> {
    let n = graph.n;
    let edges: Vec<(usize, usize, u64)> = (0..n)
        .flat_map(|v| {
            graph.adj[v]
                .iter()
                .filter(move |&&(u, _)| v < u)
                .map(move |&(u, w)| (v, u, w))
        })
        .collect();
    let mut best: Option<(u64, usize, u32)> = None;
    // qubit 0 always on side A; that halves the search without losing splits
    for mask in (1u32..(1u32 << n)).step_by(2) {
        let size_a = mask.count_ones() as usize;
        let size_b = n - size_a;
        if size_b == 0 || size_a > q || size_b > q {
            continue;
        }
        let cut: u64 = edges
            .iter()
            .filter(|&&(a, b, _)| (mask >> a) & 1 != (mask >> b) & 1)
            .map(|&(_, _, w)| w)
            .sum();
        let key = (cut, imbalance(size_a, n), mask);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let mask = best.expect("feasible size bound checked by caller").2;
    (0..n).map(|v| (mask >> v) & 1 == 1).collect()
}

fn bfs_order(graph: &Graph, start: usize) -> Vec<usize> {
    let mut seen = vec![false; graph.n];
    let mut order = Vec::with_capacity(graph.n);
    let mut starts = core::iter::once(start).chain(0..graph.n);
    while order.len() < graph.n {
        let s = starts.find(|&s| !seen[s]).expect("unvisited vertex remains");
        seen[s] = true;
        let mut head = order.len();
        order.push(s);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = graph.adj[v].iter().map(|&(u, _)| u).filter(|&u| !seen[u]).collect();
            next.sort_unstable();
            next.dedup();
            for u in next {
                seen[u] = true;
                order.push(u);
            }
        }
    }
    order
}

/// Best prefix split over a few vertex orderings (index order and two BFS
/// orders), respecting the size bound.
fn sweep_seed(graph: &Graph, q: usize) -> Vec<bool> {
    let n = graph.n;
    let first_bfs = bfs_order(graph, 0);
    let far = *first_bfs.last().expect("non-empty graph");
    let orders = [(0..n).collect::<Vec<_>>(), first_bfs, bfs_order(graph, far)];

    let mut best: Option<((u64, usize), Vec<bool>)> = None;
    for order in &orders {
        let mut in_a = vec![false; n];
        let mut cut: i64 = 0;
        for (len, &v) in order.iter().enumerate().take(n - 1) {
            for &(u, w) in &graph.adj[v] {
                if in_a[u] {
                    cut -= w as i64;
                } else if u != v {
                    cut += w as i64;
                }
            }
            in_a[v] = true;
            let size_a = len + 1;
            if size_a > q {
                break;
            }
            if n - size_a > q {
                continue;
            }
            let key = (cut as u64, imbalance(size_a, n));
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, in_a.clone()));
            }
        }
    }
    best.expect("feasible size bound checked by caller").1
}

/// Pass-based single-vertex move refinement with rollback to the best
/// prefix of each pass.
fn refine(graph: &Graph, mut side: Vec<bool>, q: usize) -> Vec<bool> {
    let n = graph.n;
    let gain_of = |side: &[bool], v: usize| -> i64 {
        graph.adj[v]
            .iter()
            .map(|&(u, w)| if side[u] != side[v] { w as i64 } else { -(w as i64) })
            .sum()
    };
    for _pass in 0..16 {
        let start_cut = graph.cut_weight(&side) as i64;
        let mut size_a = side.iter().filter(|&&s| s).count();
        let mut locked = vec![false; n];
        let mut gains: Vec<i64> = (0..n).map(|v| gain_of(&side, v)).collect();
        let mut cut = start_cut;
        let mut moves = Vec::new();
        let mut best = (start_cut, imbalance(size_a, n), 0usize);

        loop {
            let mut pick: Option<(i64, usize, usize)> = None;
            for v in 0..n {
                if locked[v] {
                    continue;
                }
                let new_a = if side[v] { size_a - 1 } else { size_a + 1 };
                if new_a == 0 || new_a == n || new_a > q || n - new_a > q {
                    continue;
                }
                let cand = (gains[v], imbalance(new_a, n), v);
                let better = match pick {
                    None => true,
                    Some((g, imb, u)) => cand.0 > g || (cand.0 == g && (cand.1, cand.2) < (imb, u)),
                };
                if better {
                    pick = Some(cand);
                }
            }
            let Some((g, _, v)) = pick else { break };
            side[v] = !side[v];
            size_a = if side[v] { size_a + 1 } else { size_a - 1 };
            locked[v] = true;
            cut -= g;
            gains[v] = -g;
            for &(u, w) in &graph.adj[v] {
                if u == v {
                    continue;
                }
                // v moved: an edge to u flipped between internal and external
                if side[u] == side[v] {
                    gains[u] -= 2 * w as i64;
                } else {
                    gains[u] += 2 * w as i64;
                }
            }
            moves.push(v);
            let key = (cut, imbalance(size_a, n), moves.len());
            if (key.0, key.1) < (best.0, best.1) {
                best = key;
            }
        }
        for &v in &moves[best.2..] {
            side[v] = !side[v];
        }
        if best.2 == 0 {
            break;
        }
    }
    side
}

/// Plans a cut of `job` for devices of at most `fleet_max_q` qubits. In LOCC
/// mode each fragment also needs `n_cut` ancilla qubits, so the size target
/// shrinks until fragments plus ancillas fit.
pub fn plan_cut(job: &Job, mode: CutMode, fleet_max_q: u32) -> Result<CutPlan> {
    let infeasible = || Error::InfeasibleCut {
        job: job.id.clone(),
        q_target: fleet_max_q,
    };
    let mut circuit = job.circuit.clone();
    circuit.id = job.id.clone();
    let mut q_target = fleet_max_q;
    let split = loop {
        let split = find_bipartition(&circuit, q_target)?;
        if mode == CutMode::Lo {
            break split;
        }
        let largest = split.part_a.len().max(split.part_b.len()) as u64;
        if largest + u64::from(split.n_cut) <= u64::from(fleet_max_q) {
            break split;
        }
        let shrunk = fleet_max_q.checked_sub(split.n_cut).ok_or_else(infeasible)?;
        if shrunk >= q_target {
            return Err(infeasible());
        }
        q_target = shrunk;
    };
    let overhead = overhead(mode.overhead_kind(), split.n_cut)?;
    Ok(CutPlan {
        parent_id: job.id.clone(),
        part_a: split.part_a,
        part_b: split.part_b,
        n_cut: split.n_cut,
        mode,
        overhead,
        ancilla_per_side: if mode == CutMode::Locc { split.n_cut } else { 0 },
    })
}

/// Expands a plan into its sub-jobs: `overhead` variants per fragment, each
/// at the parent's shots and depth. LOCC fragments become Upstream (side A)
/// and Downstream (side B) with ancillas attached to the cut endpoints.
pub fn expand_cut(job: &Job, plan: &CutPlan) -> Result<Vec<Job>> {
    if plan.sub_job_count() > MAX_SUB_JOBS {
        return Err(Error::Overflow(format!(
            "cut of {} would emit {} sub-jobs",
            job.id,
            plan.sub_job_count()
        )));
    }
    let n = job.circuit.num_qubits as usize;
    let mut index = vec![(false, 0u32); n];
    for (i, &q) in plan.part_a.iter().enumerate() {
        index[q as usize] = (true, i as u32);
    }
    for (i, &q) in plan.part_b.iter().enumerate() {
        index[q as usize] = (false, i as u32);
    }
    let (size_a, size_b) = (plan.part_a.len() as u32, plan.part_b.len() as u32);
    let ancillas = plan.ancilla_per_side;

    let mut edges_a = Vec::new();
    let mut edges_b = Vec::new();
    let mut next_ancilla = 0u32;
    for &(x, y, w) in &job.circuit.coupling {
        let (sx, ix) = index[x as usize];
        let (sy, iy) = index[y as usize];
        match (sx, sy) {
            (true, true) => edges_a.push((ix, iy, w)),
            (false, false) => edges_b.push((ix, iy, w)),
            _ if ancillas > 0 => {
                let (ia, ib) = if sx { (ix, iy) } else { (iy, ix) };
                for _ in 0..w {
                    edges_a.push((ia, size_a + next_ancilla, 1));
                    edges_b.push((ib, size_b + next_ancilla, 1));
                    next_ancilla += 1;
                }
            }
            _ => {}
        }
    }

    let one_q_a = job.circuit.one_q_gates * u64::from(size_a) / n as u64;
    let one_q_b = job.circuit.one_q_gates - one_q_a;
    let (stage_a, stage_b, tag_a, tag_b) = if plan.mode == CutMode::Locc && plan.n_cut > 0 {
        (Stage::Upstream, Stage::Downstream, 'U', 'D')
    } else {
        (Stage::Flat, Stage::Flat, 'A', 'B')
    };
    let digits = {
        let mut d = 1;
        let mut v = plan.overhead.saturating_sub(1) / 10;
        while v > 0 {
            d += 1;
            v /= 10;
        }
        d
    };

    let fragments = [
        (tag_a, stage_a, size_a, edges_a, one_q_a),
        (tag_b, stage_b, size_b, edges_b, one_q_b),
    ];
    let mut subs = Vec::with_capacity(plan.sub_job_count() as usize);
    for (tag, stage, size, edges, one_q) in fragments {
        let template = Circuit::new(String::new(), size + ancillas, job.circuit.depth, edges, one_q)?;
        for variant in 0..plan.overhead {
            let id = format!("{}/{tag}{variant:0digits$}", job.id);
            let mut circuit = template.clone();
            circuit.id = id.clone();
            subs.push(Job {
                id,
                circuit,
                shots: job.shots,
                arrival_time: job.arrival_time,
                parent_id: Some(job.id.clone()),
                stage,
                cut_index: Some(0),
                n_cut: plan.n_cut,
            });
        }
    }
    Ok(subs)
}

/// Cuts `job` if the plan is feasible and (unless `mandatory`) within the
/// sampling budget. An empty list means the cut was rejected; a mandatory
/// cut that cannot be planned is an error.
pub fn try_cut(job: &Job, mode: CutMode, fleet_max_q: u32, budget: &CutBudget, mandatory: bool) -> Result<Vec<Job>> {
    Ok(match try_cut_plan(job, mode, fleet_max_q, budget, mandatory)? {
        Some((_, subs)) => subs,
        None => Vec::new(),
    })
}

/// [`try_cut`] that also returns the accepted plan.
pub fn try_cut_plan(
    job: &Job,
    mode: CutMode,
    fleet_max_q: u32,
    budget: &CutBudget,
    mandatory: bool,
) -> Result<Option<(CutPlan, Vec<Job>)>> {
    if job.stage != Stage::Flat || job.parent_id.is_some() {
        return Err(Error::Validation(format!("job {}: sub-jobs are never re-cut", job.id)));
    }
    let plan = match plan_cut(job, mode, fleet_max_q) {
        Ok(plan) => plan,
        Err(e) if mandatory => return Err(e),
        Err(Error::InfeasibleCut { .. } | Error::Overflow(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !mandatory && plan.overhead > budget.max_overhead {
        return Ok(None);
    }
    let subs = expand_cut(job, &plan)?;
    Ok(Some((plan, subs)))
}

/// Classical delay between an LOCC upstream fragment and its downstream:
/// `n_cut * beta_comm * tau_link * shots + gamma_proc * n_sub`.
pub fn classical_delay(
    n_cut: u32,
    shots: u64,
    beta_comm: f64,
    tau_link: Seconds,
    gamma_proc: Seconds,
    n_sub: u64,
) -> Seconds {
    f64::from(n_cut) * beta_comm * tau_link * shots as f64 + gamma_proc * n_sub as f64
}
