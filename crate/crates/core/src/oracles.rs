//! Exhaustive reference implementations for checking the heuristics on
//! small instances. Nothing here calls into `cutplan`, `grouping` or
//! `scheduler`; only the plain data types are shared.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::workload::{Circuit, Job, Stage};
use crate::{Error, Result, Seconds};

/// Size limits that keep each exhaustive search well under a second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimit {
    pub max_qubits: u32,
    pub max_jobs: usize,
    pub max_groups_x_devices: usize,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit {
            max_qubits: 12,
            max_jobs: 8,
            max_groups_x_devices: 12,
        }
    }
}

/// Minimum crossing weight over all `2^n` side assignments whose sides are
/// non-empty and at most `q_target` qubits each.
pub fn brute_min_cut(circuit: &Circuit, q_target: u32, limit: &OracleLimit) -> Result<u64> {
    let n = circuit.num_qubits;
    if n > limit.max_qubits {
        return Err(Error::OracleLimit(format!("{n} qubits > {}", limit.max_qubits)));
    }
    let mut best: Option<u64> = None;
    for assignment in 0u64..(1u64 << n) {
        let ones = assignment.count_ones();
        let zeros = n - ones;
        if ones == 0 || zeros == 0 || ones > q_target || zeros > q_target {
            continue;
        }
        let mut crossing = 0u64;
        for &(a, b, w) in &circuit.coupling {
            let side_a = (assignment >> a) & 1;
            let side_b = (assignment >> b) & 1;
            if side_a != side_b {
                crossing += u64::from(w);
            }
        }
        best = Some(match best {
            Some(b) => b.min(crossing),
            None => crossing,
        });
    }
    best.ok_or(Error::InfeasibleCut {
        job: circuit.id.clone(),
        q_target,
    })
}

/// Best feasible set partitions of a job list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOptimum {
    /// Smallest summed group cost.
    pub min_cost: f64,
    /// Fewest groups of any feasible partition.
    pub min_groups: usize,
}

fn block_cost(block: &[usize], jobs: &[Job], runtimes: &[Seconds], q_dev: u32, c_max: usize, lambda: f64) -> f64 {
    if block.len() > c_max {
        return f64::INFINITY;
    }
    let qubits: u64 = block.iter().map(|&i| u64::from(jobs[i].circuit.num_qubits)).sum();
    if qubits > u64::from(q_dev) {
        return f64::INFINITY;
    }
    for &x in block {
        for &y in block {
            let (jx, jy) = (&jobs[x], &jobs[y]);
            let same_parent = jx.parent_id.is_some() && jx.parent_id == jy.parent_id;
            if same_parent && jx.stage != jy.stage {
                return f64::INFINITY;
            }
        }
    }
    let mut t_hi = f64::NEG_INFINITY;
    let mut t_lo = f64::INFINITY;
    let mut down = 0usize;
    for &i in block {
        t_hi = t_hi.max(runtimes[i]);
        t_lo = t_lo.min(runtimes[i]);
        if jobs[i].stage == Stage::Downstream {
            down += 1;
        }
    }
    let span = if down > 0 && down < block.len() { 1.0 } else { 0.0 };
    (t_hi / t_lo - 1.0) + lambda * span
}

/// Enumerates every set partition of `jobs` (restricted growth strings),
/// discarding those with an infeasible block.
pub fn brute_partition(
    jobs: &[Job],
    runtimes: &[Seconds],
    q_dev: u32,
    c_max: usize,
    lambda: f64,
    limit: &OracleLimit,
) -> Result<PartitionOptimum> {
    let n = jobs.len();
    if n > limit.max_jobs {
        return Err(Error::OracleLimit(format!("{n} jobs > {}", limit.max_jobs)));
    }
    if n == 0 {
        return Ok(PartitionOptimum {
            min_cost: 0.0,
            min_groups: 0,
        });
    }
    let mut labels = vec![0usize; n];
    let mut best_cost = f64::INFINITY;
    let mut best_groups = usize::MAX;
    loop {
        let blocks = labels.iter().copied().max().unwrap_or(0) + 1;
        let mut total = 0.0;
        for b in 0..blocks {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == b).collect();
            total += block_cost(&members, jobs, runtimes, q_dev, c_max, lambda);
            if total == f64::INFINITY {
                break;
            }
        }
        if total.is_finite() {
            best_cost = best_cost.min(total);
            best_groups = best_groups.min(blocks);
        }
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return if best_groups == usize::MAX {
                    Err(Error::Validation("no feasible partition".into()))
                } else {
                    Ok(PartitionOptimum {
                        min_cost: best_cost,
                        min_groups: best_groups,
                    })
                };
            }
            let prefix_max = labels[..i].iter().copied().max().unwrap_or(0);
            if labels[i] <= prefix_max {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// A group for [`brute_assign`]: its runtime on each device (`None` when it
/// does not fit), release time, and predecessors with delays.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGroup {
    pub runtime_on: Vec<Option<Seconds>>,
    pub release: Seconds,
    pub preds: Vec<(usize, Seconds)>,
}

/// Minimum makespan over every device assignment and every
/// precedence-respecting execution order, each group starting as early as
/// its device, release and predecessors allow.
pub fn brute_assign(groups: &[OracleGroup], devices: usize, limit: &OracleLimit) -> Result<Seconds> {
    if groups.len() * devices > limit.max_groups_x_devices {
        return Err(Error::OracleLimit(format!(
            "{} groups x {devices} devices > {}",
            groups.len(),
            limit.max_groups_x_devices
        )));
    }
    if groups.iter().any(|g| g.runtime_on.len() != devices) {
        return Err(Error::Validation("one runtime slot per device is required".into()));
    }
    let mut free = vec![0.0; devices];
    let mut finish: Vec<Option<Seconds>> = vec![None; groups.len()];
    let mut best = f64::INFINITY;
    search(groups, &mut free, &mut finish, 0.0, &mut best);
    if best.is_finite() || groups.is_empty() {
        Ok(if groups.is_empty() { 0.0 } else { best })
    } else {
        Err(Error::Validation("no feasible assignment".into()))
    }
}

fn search(
    groups: &[OracleGroup],
    free: &mut [Seconds],
    finish: &mut [Option<Seconds>],
    span: Seconds,
    best: &mut Seconds,
) {
    if span >= *best {
        return;
    }
    if finish.iter().all(Option::is_some) {
        *best = span;
        return;
    }
    for g in 0..groups.len() {
        if finish[g].is_some() {
            continue;
        }
        let mut ready = groups[g].release;
        let mut blocked = false;
        for &(p, delay) in &groups[g].preds {
            match finish[p] {
                Some(f) => ready = ready.max(f + delay),
                None => blocked = true,
            }
        }
        if blocked {
            continue;
        }
        for d in 0..free.len() {
            let Some(rt) = groups[g].runtime_on[d] else { continue };
            let start = ready.max(free[d]);
            let saved = free[d];
            free[d] = start + rt;
            finish[g] = Some(start + rt);
            search(groups, free, finish, span.max(start + rt), best);
            finish[g] = None;
            free[d] = saved;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn circuit(n: u32, edges: &[(u32, u32, u32)]) -> Circuit {
        Circuit::new("c", n, 1, edges.iter().copied(), 0).unwrap()
    }

    fn job(id: &str, q: u32, parent: Option<&str>, stage: Stage) -> Job {
        let mut j = Job::flat(id, circuit(q, &[]), 1, 0.0);
        j.parent_id = parent.map(|p| p.to_string());
        j.stage = stage;
        j
    }

    #[test]
    fn min_cut_examples() {
        let lim = OracleLimit::default();
        let k4: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b, 1))).collect();
        assert_eq!(brute_min_cut(&circuit(4, &k4), 2, &lim).unwrap(), 4);
        let line: Vec<_> = (0..5).map(|i| (i, i + 1, 1)).collect();
        assert_eq!(brute_min_cut(&circuit(6, &line), 3, &lim).unwrap(), 1);
        let cliques = [(0, 1, 1), (0, 2, 1), (1, 2, 1), (3, 4, 1), (3, 5, 1), (4, 5, 1)];
        assert_eq!(brute_min_cut(&circuit(6, &cliques), 3, &lim).unwrap(), 0);
        assert!(matches!(
            brute_min_cut(&circuit(13, &[]), 7, &lim),
            Err(Error::OracleLimit(_))
        ));
    }

    #[test]
    fn partition_examples() {
        let lim = OracleLimit::default();
        let one = [job("a", 2, None, Stage::Flat)];
        let opt = brute_partition(&one, &[1.0], 10, 8, 1.0, &lim).unwrap();
        assert_eq!((opt.min_cost, opt.min_groups), (0.0, 1));

        let pair = [
            job("u", 2, Some("A"), Stage::Upstream),
            job("d", 2, Some("A"), Stage::Downstream),
        ];
        assert_eq!(
            brute_partition(&pair, &[1.0, 1.0], 10, 8, 1.0, &lim)
                .unwrap()
                .min_groups,
            2
        );

        let four: Vec<Job> = (0..4)
            .map(|i| job(&alloc::format!("f{i}"), 4, None, Stage::Flat))
            .collect();
        let opt = brute_partition(&four, &[1.0; 4], 8, 8, 1.0, &lim).unwrap();
        assert_eq!((opt.min_cost, opt.min_groups), (0.0, 2));
    }

    #[test]
    fn assign_examples() {
        let lim = OracleLimit::default();
        let g = |rt: [f64; 2]| OracleGroup {
            runtime_on: rt.iter().map(|&r| Some(r)).collect(),
            release: 0.0,
            preds: Vec::new(),
        };
        assert_eq!(brute_assign(&[g([3.0, 2.0])], 2, &lim).unwrap(), 2.0);
        assert_eq!(brute_assign(&[g([3.0, 3.0]), g([3.0, 3.0])], 2, &lim).unwrap(), 3.0);
        let up = g([2.0, 2.0]);
        let down = OracleGroup {
            preds: alloc::vec![(0, 0.5)],
            ..g([1.0, 1.0])
        };
        assert_eq!(brute_assign(&[up, down], 2, &lim).unwrap(), 3.5);
    }
}
