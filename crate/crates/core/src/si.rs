//! Susceptible-infected spreading: temporal replay of event logs, synthetic
//! spreading with random inter-event times, spreading curves, ensemble
//! averages, characteristic times and the dilution/bridge parameter sweep.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::events::EventLog;
use crate::gen::{add_bridges, dilute, GenError, ModelSpec};
use crate::graph::{
    avg_degree, components, percolation_fraction, GraphError, NodeId, NodeRole, RoleGraph,
};
use crate::iet::IetDistribution;
use crate::rng::{mix_seed, stream_rng};

#[derive(Debug, Clone, PartialEq)]
pub enum SiError {
    InitiatorAbsent(NodeId),
    NoEligibleInitiator,
    /// Replay log contains an event on a pair that is not an edge of the
    /// graph being spread on.
    EventOutsideGraph(NodeId, NodeId),
    /// Average spreading curve never reaches 1/2 on the grid.
    HorizonTooShort,
    EmptyEnsemble,
    Graph(GraphError),
    Gen(GenError),
}

impl fmt::Display for SiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiError::InitiatorAbsent(id) => write!(f, "initiator {id} is not in the graph"),
            SiError::NoEligibleInitiator => {
                write!(f, "no white node of degree >= 2 in the largest component")
            }
            SiError::EventOutsideGraph(u, v) => {
                write!(f, "event on pair {u}-{v} which is not a graph edge")
            }
            SiError::HorizonTooShort => {
                write!(f, "average spreading curve never reaches 1/2 within the horizon")
            }
            SiError::EmptyEnsemble => write!(f, "ensemble needs at least one run"),
            SiError::Graph(e) => write!(f, "{e}"),
            SiError::Gen(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SiError {}

impl From<GraphError> for SiError {
    fn from(e: GraphError) -> Self {
        SiError::Graph(e)
    }
}

impl From<GenError> for SiError {
    fn from(e: GenError) -> Self {
        SiError::Gen(e)
    }
}

/// Where a replay run starts inside the data span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplayStart {
    /// Uniformly random within the span, per run.
    Random,
    Fixed(f64),
}

/// How infection times are produced for a run.
#[derive(Debug, Clone, PartialEq)]
pub enum SpreadMode<'a> {
    /// Replay an empirical event log, optionally with periodic time
    /// boundaries.
    ReplayLog { log: &'a EventLog, periodic: bool, start: ReplayStart },
    /// One i.i.d. delay per link; infection times are first-passage
    /// percolation distances.
    LinkDelay { dist: IetDistribution },
    /// A renewal event sequence per link, generated lazily from time 0 up
    /// to the horizon.
    Renewal { dist: IetDistribution, horizon: f64 },
}

/// Per-node infection times of one SI realization.
#[derive(Debug, Clone)]
pub struct SpreadRun {
    pub initiator: NodeId,
    /// elapsed infection time per node index of the graph; infinity if the
    /// node is never infected
    pub times: Vec<f64>,
    /// counted (white) nodes in the initiator's component; the spreading
    /// curve divides by this
    pub denominator: usize,
    /// finite infection times of counted nodes, sorted ascending
    counted_sorted: Vec<f64>,
}

impl SpreadRun {
    /// Wraps raw infection times, computing the curve denominator.
    ///
    /// Counted nodes are the white ones; on graphs without any white node
    /// (raw model graphs) every node counts.
    pub fn new(g: &RoleGraph, initiator_idx: usize, times: Vec<f64>) -> SpreadRun {
        let any_white = (0..g.node_count()).any(|i| g.role(i) == NodeRole::White);
        let counted = |i: usize| !any_white || g.role(i) == NodeRole::White;
        let labeling = components(g);
        let comp = labeling.component[initiator_idx];
        let mut denominator = 0usize;
        let mut counted_sorted = Vec::new();
        for i in 0..g.node_count() {
            if labeling.component[i] == comp && counted(i) {
                denominator += 1;
                if times[i].is_finite() {
                    counted_sorted.push(times[i]);
                }
            }
        }
        counted_sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        SpreadRun { initiator: g.id(initiator_idx), times, denominator, counted_sorted }
    }

    /// Number of counted nodes infected by elapsed time t.
    pub fn infected_by(&self, t: f64) -> usize {
        self.counted_sorted.partition_point(|&x| x <= t)
    }

    pub fn first_positive_time(&self) -> Option<f64> {
        self.counted_sorted.iter().copied().find(|&x| x > 0.0)
    }

    pub fn last_time(&self) -> Option<f64> {
        self.counted_sorted.last().copied()
    }
}

/// M spreading curves on a shared grid, their pointwise average and the
/// derived characteristic time.
#[derive(Debug, Clone)]
pub struct CurveEnsemble {
    pub grid: Vec<f64>,
    pub curves: Vec<Vec<f64>>,
    pub average: Vec<f64>,
    /// first time the average curve reaches 1/2; None when it never does
    pub tau: Option<f64>,
}

/// White nodes of the largest component of `g_w` with degree >= 2.
pub fn eligible_initiators(g_w: &RoleGraph) -> Vec<NodeId> {
    if g_w.is_empty() {
        return Vec::new();
    }
    let labeling = components(g_w);
    let any_white = (0..g_w.node_count()).any(|i| g_w.role(i) == NodeRole::White);
    (0..g_w.node_count())
        .filter(|&i| {
            labeling.component[i] == labeling.largest
                && (!any_white || g_w.role(i) == NodeRole::White)
                && g_w.degree(i) >= 2
        })
        .map(|i| g_w.id(i))
        .collect()
}

/// Uniform draw from [`eligible_initiators`].
pub fn select_initiator(g_w: &RoleGraph, rng: &mut impl Rng) -> Result<NodeId, SiError> {
    let eligible = eligible_initiators(g_w);
    if eligible.is_empty() {
        return Err(SiError::NoEligibleInitiator);
    }
    Ok(eligible[rng.gen_range(0..eligible.len())])
}

/// Replays an event log from calendar time `t0`, wrapping periodically
/// through the span until a full lap adds no infection.
///
/// An event occurrence infects the susceptible endpoint iff the other
/// endpoint's infection time is <= the occurrence's elapsed time; ties at
/// one timestamp cascade (the least fixed point is computed). Reported
/// infection times are elapsed times since `t0`.
pub fn run_si_replay(
    g: &RoleGraph,
    log: &EventLog,
    initiator: NodeId,
    t0: f64,
    periodic: bool,
) -> Result<SpreadRun, SiError> {
    let init_idx = g.index_of(initiator).ok_or(SiError::InitiatorAbsent(initiator))?;
    let span = log.span();
    let period = span.1 - span.0;
    let t0 = crate::events::wrap_time(t0, span).expect("span validated by EventLog");

    // occurrence base offsets in [0, period), in replay order from t0
    let mut occ: Vec<(usize, usize, f64)> = Vec::with_capacity(log.len());
    let mut head: Vec<(usize, usize, f64)> = Vec::new();
    for e in log.events() {
        let ui = g.index_of(e.u).ok_or(SiError::EventOutsideGraph(e.u, e.v))?;
        let vi = g.index_of(e.v).ok_or(SiError::EventOutsideGraph(e.u, e.v))?;
        if !g.has_edge(ui, vi) {
            return Err(SiError::EventOutsideGraph(e.u, e.v));
        }
        if e.start >= t0 {
            occ.push((ui, vi, e.start - t0));
        } else {
            head.push((ui, vi, e.start - t0 + period));
        }
    }
    let non_periodic_len = occ.len();
    occ.extend(head);

    let n = g.node_count();
    let mut times = vec![f64::INFINITY; n];
    times[init_idx] = 0.0;
    let comp_size = {
        let labeling = components(g);
        let c = labeling.component[init_idx];
        labeling.sizes[c]
    };
    let mut infected = 1usize;

    let mut lap = 0u64;
    loop {
        let slice = if periodic { &occ[..] } else { &occ[..non_periodic_len] };
        let mut new_infections = 0usize;
        let mut i = 0;
        while i < slice.len() {
            // tie group: occurrences sharing one elapsed time cascade together
            let t = slice[i].2 + lap as f64 * period;
            let mut j = i;
            while j < slice.len() && slice[j].2 == slice[i].2 {
                j += 1;
            }
            loop {
                let mut changed = false;
                for &(u, v, _) in &slice[i..j] {
                    if times[u] <= t && times[v] > t {
                        times[v] = t;
                        changed = true;
                        new_infections += 1;
                    } else if times[v] <= t && times[u] > t {
                        times[u] = t;
                        changed = true;
                        new_infections += 1;
                    }
                }
                if !changed {
                    break;
                }
            }
            i = j;
        }
        infected += new_infections;
        if !periodic || new_infections == 0 || infected >= comp_size {
            break;
        }
        lap += 1;
    }

    Ok(SpreadRun::new(g, init_idx, times))
}

#[derive(PartialEq)]
struct HeapEntry {
    time: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on time
        other
            .time
            .partial_cmp(&self.time)
            .expect("finite heap times")
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-passage percolation from the initiator: each edge gets one delay
/// on first relaxation and infection times are shortest-path distances
/// under those delays (label-setting with a priority queue).
pub fn first_passage_times(
    g: &RoleGraph,
    initiator: NodeId,
    mut edge_delay: impl FnMut(usize) -> f64,
) -> Result<SpreadRun, SiError> {
    let init_idx = g.index_of(initiator).ok_or(SiError::InitiatorAbsent(initiator))?;
    let n = g.node_count();
    let mut delays: Vec<f64> = vec![f64::NAN; g.edge_count()];
    let mut times = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    times[init_idx] = 0.0;
    let mut heap = alloc::collections::BinaryHeap::new();
    heap.push(HeapEntry { time: 0.0, node: init_idx });
    while let Some(HeapEntry { time, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &(nbr, edge) in g.neighbors(node) {
            if done[nbr] {
                continue;
            }
            if delays[edge].is_nan() {
                delays[edge] = edge_delay(edge);
            }
            let cand = time + delays[edge];
            if cand < times[nbr] {
                times[nbr] = cand;
                heap.push(HeapEntry { time: cand, node: nbr });
            }
        }
    }
    Ok(SpreadRun::new(g, init_idx, times))
}

/// Renewal spreading: each edge carries the event sequence t_1 = xi_1,
/// t_k = t_{k-1} + xi_k generated lazily from time 0; a susceptible
/// endpoint is infected at the first edge event at or after the infected
/// endpoint's time. Generation stops at the horizon.
pub fn renewal_times(
    g: &RoleGraph,
    initiator: NodeId,
    horizon: f64,
    mut next_iet: impl FnMut() -> f64,
) -> Result<SpreadRun, SiError> {
    let init_idx = g.index_of(initiator).ok_or(SiError::InitiatorAbsent(initiator))?;
    let n = g.node_count();
    let mut seqs: Vec<Vec<f64>> = vec![Vec::new(); g.edge_count()];
    let mut exhausted = vec![false; g.edge_count()];
    let mut times = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    times[init_idx] = 0.0;

    let mut first_event_at_or_after = |seqs: &mut Vec<Vec<f64>>,
                                       exhausted: &mut Vec<bool>,
                                       edge: usize,
                                       t: f64|
     -> Option<f64> {
        while !exhausted[edge] && seqs[edge].last().map_or(true, |&last| last < t) {
            let last = seqs[edge].last().copied().unwrap_or(0.0);
            let next = last + next_iet();
            if next > horizon {
                exhausted[edge] = true;
            } else {
                seqs[edge].push(next);
            }
        }
        let idx = seqs[edge].partition_point(|&x| x < t);
        seqs[edge].get(idx).copied()
    };

    let mut heap = alloc::collections::BinaryHeap::new();
    heap.push(HeapEntry { time: 0.0, node: init_idx });
    while let Some(HeapEntry { time, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &(nbr, edge) in g.neighbors(node) {
            if done[nbr] {
                continue;
            }
            if let Some(ev) = first_event_at_or_after(&mut seqs, &mut exhausted, edge, time) {
                if ev < times[nbr] {
                    times[nbr] = ev;
                    heap.push(HeapEntry { time: ev, node: nbr });
                }
            }
        }
    }
    Ok(SpreadRun::new(g, init_idx, times))
}

/// Runs one SI realization under the given mode.
pub fn run_one(
    g: &RoleGraph,
    mode: &SpreadMode<'_>,
    initiator: NodeId,
    rng: &mut ChaCha12Rng,
) -> Result<SpreadRun, SiError> {
    match mode {
        SpreadMode::ReplayLog { log, periodic, start } => {
            let span = log.span();
            let t0 = match start {
                ReplayStart::Random => span.0 + rng.gen::<f64>() * (span.1 - span.0),
                ReplayStart::Fixed(t) => *t,
            };
            run_si_replay(g, log, initiator, t0, *periodic)
        }
        SpreadMode::LinkDelay { dist } => first_passage_times(g, initiator, |_| dist.sample(rng)),
        SpreadMode::Renewal { dist, horizon } => {
            renewal_times(g, initiator, *horizon, || dist.sample(rng))
        }
    }
}

/// Fraction of counted nodes infected by each grid time.
pub fn spreading_curve(run: &SpreadRun, grid: &[f64]) -> Vec<f64> {
    let denom = run.denominator.max(1) as f64;
    grid.iter().map(|&t| run.infected_by(t) as f64 / denom).collect()
}

/// `points` logarithmically spaced times from t_lo to t_hi inclusive.
pub fn log_grid(t_lo: f64, t_hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    if !(t_lo > 0.0) || !(t_hi > t_lo) {
        // degenerate inputs fall back to a linear grid
        let lo = if t_lo.is_finite() { t_lo.min(0.0) } else { 0.0 };
        let hi = if t_hi.is_finite() && t_hi > lo { t_hi } else { lo + 1.0 };
        return (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect();
    }
    let (llo, lhi) = (libm::log(t_lo), libm::log(t_hi));
    let mut grid: Vec<f64> = (0..points)
        .map(|i| libm::exp(llo + (lhi - llo) * i as f64 / (points - 1) as f64))
        .collect();
    grid[0] = t_lo;
    grid[points - 1] = t_hi;
    grid
}

/// Default number of grid points for ensemble curves.
pub const CURVE_GRID_POINTS: usize = 2000;

/// M independent runs with initiators drawn from `g_w` and spreading on
/// `g`; run i uses random stream i of the master seed, so parallel and
/// serial execution agree bit for bit.
pub fn ensemble(
    g: &RoleGraph,
    g_w: &RoleGraph,
    mode: &SpreadMode<'_>,
    runs: usize,
    grid: Option<&[f64]>,
    master_seed: u64,
) -> Result<CurveEnsemble, SiError> {
    ensemble_with(runs, grid, master_seed, g_w, |rng, initiator| {
        run_one(g, mode, initiator, rng)
    })
}

/// Ensemble driver with a custom runner; the runner receives the per-run
/// random stream and the drawn initiator.
pub fn ensemble_with(
    runs: usize,
    grid: Option<&[f64]>,
    master_seed: u64,
    g_w: &RoleGraph,
    mut runner: impl FnMut(&mut ChaCha12Rng, NodeId) -> Result<SpreadRun, SiError>,
) -> Result<CurveEnsemble, SiError> {
    if runs == 0 {
        return Err(SiError::EmptyEnsemble);
    }
    let eligible = eligible_initiators(g_w);
    if eligible.is_empty() {
        return Err(SiError::NoEligibleInitiator);
    }
    let mut results = Vec::with_capacity(runs);
    for i in 0..runs {
        let mut rng = stream_rng(master_seed, i as u64 + 1);
        let initiator = eligible[rng.gen_range(0..eligible.len())];
        results.push(runner(&mut rng, initiator)?);
    }
    Ok(assemble_curves(&results, grid))
}

/// Builds the shared grid, per-run curves, the pointwise average and tau.
pub fn assemble_curves(runs: &[SpreadRun], grid: Option<&[f64]>) -> CurveEnsemble {
    let grid: Vec<f64> = match grid {
        Some(gr) => gr.to_vec(),
        None => {
            let lo = runs
                .iter()
                .filter_map(SpreadRun::first_positive_time)
                .fold(f64::INFINITY, f64::min);
            let hi = runs
                .iter()
                .filter_map(SpreadRun::last_time)
                .fold(0.0f64, f64::max);
            log_grid(
                if lo.is_finite() { lo } else { 0.0 },
                hi,
                CURVE_GRID_POINTS,
            )
        }
    };
    let curves: Vec<Vec<f64>> = runs.iter().map(|r| spreading_curve(r, &grid)).collect();
    let mut average = vec![0.0; grid.len()];
    for curve in &curves {
        for (a, &x) in average.iter_mut().zip(curve) {
            *a += x;
        }
    }
    for a in &mut average {
        *a /= curves.len() as f64;
    }
    let mut ensemble = CurveEnsemble { grid, curves, average, tau: None };
    ensemble.tau = characteristic_time(&ensemble).ok();
    ensemble
}

/// Smallest grid time where the average curve reaches 1/2, refined by
/// linear interpolation between the bracketing grid points.
pub fn characteristic_time(e: &CurveEnsemble) -> Result<f64, SiError> {
    let avg = &e.average;
    let idx = avg.iter().position(|&a| a >= 0.5).ok_or(SiError::HorizonTooShort)?;
    if idx == 0 {
        return Ok(e.grid[0]);
    }
    let (t0, t1) = (e.grid[idx - 1], e.grid[idx]);
    let (a0, a1) = (avg[idx - 1], avg[idx]);
    if a1 == a0 {
        return Ok(t1);
    }
    Ok(t0 + (0.5 - a0) * (t1 - t0) / (a1 - a0))
}

/// Which synthetic spreading mode a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    LinkDelay,
    Renewal { horizon: f64 },
}

/// Sweep configuration; defaults encode the simulation protocol (p from 0
/// to 1 in steps of 0.05, M = 100 runs, 5 bridges per white node, the 20%
/// percolation cutoff).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub p_grid: Vec<f64>,
    pub dists: Vec<IetDistribution>,
    pub runs: usize,
    /// bridges per white node; None disables bridge rows entirely
    pub bridges_ratio: Option<f64>,
    pub p_inf_cutoff: f64,
    pub mode: SyntheticKind,
    pub master_seed: u64,
}

impl SweepConfig {
    /// The simulation protocol: power law t_min = 0.008, alpha = 1.2 plus
    /// its mean-matched shifted exponential, p in 0..1 step 0.05, M = 100,
    /// 5 bridges per white node, 20% percolation cutoff.
    pub fn protocol_defaults(master_seed: u64) -> Self {
        let pow = IetDistribution::power_law(0.008, 1.2).expect("valid constants");
        let exp = pow.match_mean().expect("alpha > 1");
        SweepConfig {
            p_grid: (0..=20).map(|i| i as f64 * 0.05).collect(),
            dists: vec![pow, exp],
            runs: 100,
            bridges_ratio: Some(5.0),
            p_inf_cutoff: 0.2,
            mode: SyntheticKind::LinkDelay,
            master_seed,
        }
    }
}

/// One output row of a sweep: one (p, distribution) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: String,
    pub p: f64,
    pub avg_k_w: f64,
    pub p_inf: f64,
    pub dist: String,
    pub tau_w: Option<f64>,
    pub tau: Option<f64>,
    pub flag: String,
}

/// Computes the rows for one dilution probability; exposed so drivers can
/// parallelize across rows while keeping output deterministic.
pub fn sweep_row(
    base: &RoleGraph,
    model_name: &str,
    p: f64,
    row_index: usize,
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>, SiError> {
    let seed_dilute = mix_seed(cfg.master_seed, row_index as u64 * 4);
    let seed_bridge = mix_seed(cfg.master_seed, row_index as u64 * 4 + 1);
    let diluted = dilute(base, p, seed_dilute)?;
    let avg_k_w = avg_degree(&diluted, None)?;
    let p_inf = percolation_fraction(&diluted)?;

    let bridged = match cfg.bridges_ratio {
        Some(ratio) => {
            let n_bridges = libm::round(ratio * diluted.node_count() as f64) as usize;
            Some(add_bridges(&diluted, n_bridges, seed_bridge)?)
        }
        None => None,
    };

    let mut rows = Vec::with_capacity(cfg.dists.len());
    for (di, dist) in cfg.dists.iter().enumerate() {
        let mode = match cfg.mode {
            SyntheticKind::LinkDelay => SpreadMode::LinkDelay { dist: *dist },
            SyntheticKind::Renewal { horizon } => SpreadMode::Renewal { dist: *dist, horizon },
        };
        let mut flags: Vec<&str> = Vec::new();
        if p_inf < cfg.p_inf_cutoff {
            flags.push("low_p_inf");
        }
        let seed_w = mix_seed(cfg.master_seed, (row_index as u64 * 4 + 2) << 16 | di as u64);
        let seed_g = mix_seed(cfg.master_seed, (row_index as u64 * 4 + 3) << 16 | di as u64);
        let tau_w = match ensemble(&diluted, &diluted, &mode, cfg.runs, None, seed_w) {
            Ok(e) => {
                if e.tau.is_none() {
                    flags.push("no_tau_w");
                }
                e.tau
            }
            Err(SiError::NoEligibleInitiator) => {
                flags.push("no_initiator");
                None
            }
            Err(err) => return Err(err),
        };
        let tau = match &bridged {
            Some(g) => match ensemble(g, &diluted, &mode, cfg.runs, None, seed_g) {
                Ok(e) => {
                    if e.tau.is_none() {
                        flags.push("no_tau");
                    }
                    e.tau
                }
                Err(SiError::NoEligibleInitiator) => None,
                Err(err) => return Err(err),
            },
            None => None,
        };
        rows.push(SweepRow {
            model: String::from(model_name),
            p,
            avg_k_w,
            p_inf,
            dist: dist.label(),
            tau_w,
            tau,
            flag: flags.join("+"),
        });
    }
    Ok(rows)
}

/// Full sweep over the dilution grid for one topology model.
pub fn sweep(model: &ModelSpec, cfg: &SweepConfig) -> Result<Vec<SweepRow>, SiError> {
    let base = model.generate()?;
    let mut rows = Vec::new();
    for (i, &p) in cfg.p_grid.iter().enumerate() {
        rows.extend(sweep_row(&base, model.name(), p, i, cfg)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, EventLog};
    use crate::graph::NodeRole;

    fn white_graph(ids: &[NodeId], edges: &[(NodeId, NodeId)]) -> RoleGraph {
        let nodes: Vec<(NodeId, NodeRole)> =
            ids.iter().map(|&i| (i, NodeRole::White)).collect();
        RoleGraph::build(&nodes, edges).unwrap()
    }

    fn ev(u: NodeId, v: NodeId, start: f64) -> Event {
        Event { u, v, start, duration: 0.0 }
    }

    #[test]
    fn initiator_unique_eligible_on_path() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3)]);
        let mut rng = stream_rng(0, 0);
        for _ in 0..20 {
            assert_eq!(select_initiator(&g, &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn initiator_uniform_on_triangle() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        let mut rng = stream_rng(5, 0);
        let mut counts = [0u32; 3];
        for _ in 0..3000 {
            let id = select_initiator(&g, &mut rng).unwrap();
            counts[(id - 1) as usize] += 1;
        }
        // chi-squared, 2 dof; 13.8 ~ p = 0.001
        let chi2: f64 =
            counts.iter().map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0).sum();
        assert!(chi2 < 13.8, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn initiator_respects_lcc_membership() {
        // star leaves have degree 1; center lives in a smaller component
        // than the 4-path, so nothing in the LCC is eligible... the path
        // interior nodes are. Eligibility comes from the LCC only.
        let g = white_graph(
            &[1, 2, 3, 4, 10, 11, 12],
            &[(1, 2), (2, 3), (3, 4), (10, 11), (10, 12)],
        );
        let mut rng = stream_rng(9, 0);
        for _ in 0..50 {
            let id = select_initiator(&g, &mut rng).unwrap();
            assert!(id == 2 || id == 3);
        }
    }

    #[test]
    fn initiator_error_without_eligible_nodes() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let mut rng = stream_rng(0, 0);
        assert_eq!(select_initiator(&g, &mut rng).unwrap_err(), SiError::NoEligibleInitiator);
    }

    #[test]
    fn replay_hand_temporal_bfs() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]);
        let log =
            EventLog::new(vec![ev(1, 2, 1.0), ev(2, 3, 2.0), ev(1, 3, 4.0)], (0.0, 10.0)).unwrap();
        let run = run_si_replay(&g, &log, 1, 0.0, false).unwrap();
        assert_eq!(run.times[g.index_of(1).unwrap()], 0.0);
        assert_eq!(run.times[g.index_of(2).unwrap()], 1.0);
        assert_eq!(run.times[g.index_of(3).unwrap()], 2.0);

        let run = run_si_replay(&g, &log, 3, 0.0, false).unwrap();
        assert_eq!(run.times[g.index_of(3).unwrap()], 0.0);
        assert_eq!(run.times[g.index_of(2).unwrap()], 2.0);
        assert_eq!(run.times[g.index_of(1).unwrap()], 4.0);
    }

    #[test]
    fn replay_periodic_wraps_until_infection() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let log = EventLog::new(vec![ev(1, 2, 8.0)], (0.0, 10.0)).unwrap();
        let run = run_si_replay(&g, &log, 1, 9.0, true).unwrap();
        // event recurs at unwrapped 18, elapsed 9
        assert_eq!(run.times[g.index_of(2).unwrap()], 9.0);
    }

    #[test]
    fn replay_ties_cascade() {
        // both events at t=5; infection must pass through the chain even
        // though the enabling event sorts first
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3)]);
        let log = EventLog::new(vec![ev(2, 3, 5.0), ev(1, 2, 5.0)], (0.0, 10.0)).unwrap();
        let run = run_si_replay(&g, &log, 1, 0.0, false).unwrap();
        assert_eq!(run.times[g.index_of(2).unwrap()], 5.0);
        assert_eq!(run.times[g.index_of(3).unwrap()], 5.0);
    }

    #[test]
    fn replay_rejects_foreign_events() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let log = EventLog::new(vec![ev(1, 9, 1.0)], (0.0, 10.0)).unwrap();
        assert!(matches!(
            run_si_replay(&g, &log, 1, 0.0, false),
            Err(SiError::EventOutsideGraph(1, 9))
        ));
    }

    #[test]
    fn link_delay_unit_weights_are_hop_counts() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3)]);
        let run = first_passage_times(&g, 1, |_| 1.0).unwrap();
        assert_eq!(run.times[g.index_of(1).unwrap()], 0.0);
        assert_eq!(run.times[g.index_of(2).unwrap()], 1.0);
        assert_eq!(run.times[g.index_of(3).unwrap()], 2.0);
    }

    #[test]
    fn link_delay_triangle_dijkstra_by_hand() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]);
        // weights ab=1, bc=5, ac=3 keyed by normalized endpoints
        let weight_of = |e: usize| -> f64 {
            let (u, v) = g.edge_endpoints(e);
            match (g.id(u), g.id(v)) {
                (1, 2) => 1.0,
                (2, 3) => 5.0,
                (1, 3) => 3.0,
                other => panic!("unexpected edge {other:?}"),
            }
        };
        let run = first_passage_times(&g, 1, weight_of).unwrap();
        assert_eq!(run.times[g.index_of(2).unwrap()], 1.0);
        assert_eq!(run.times[g.index_of(3).unwrap()], 3.0);
    }

    #[test]
    fn renewal_unit_iets() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let run = renewal_times(&g, 1, 100.0, || 1.0).unwrap();
        assert_eq!(run.times[g.index_of(2).unwrap()], 1.0);
    }

    #[test]
    fn renewal_edge_event_at_infection_instant_relays() {
        // both edges fire at t=1; the second hop passes at the same instant
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3)]);
        let run = renewal_times(&g, 1, 1.5, || 1.0).unwrap();
        assert_eq!(run.times[g.index_of(2).unwrap()], 1.0);
        assert_eq!(run.times[g.index_of(3).unwrap()], 1.0);
    }

    #[test]
    fn renewal_horizon_limits_spread() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let run = renewal_times(&g, 1, 0.5, || 1.0).unwrap();
        assert!(run.times[g.index_of(2).unwrap()].is_infinite());
    }

    #[test]
    fn curve_single_edge_step() {
        let g = white_graph(&[1, 2], &[(1, 2)]);
        let log = EventLog::new(vec![ev(1, 2, 5.0)], (0.0, 10.0)).unwrap();
        let run = run_si_replay(&g, &log, 1, 0.0, false).unwrap();
        let curve = spreading_curve(&run, &[0.0, 4.9, 5.0, 9.0]);
        assert_eq!(curve, vec![0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn curve_ignores_grey_in_denominator() {
        let nodes = [
            (1, NodeRole::White),
            (2, NodeRole::White),
            (3, NodeRole::Grey),
        ];
        let g = RoleGraph::build(&nodes, &[(1, 3), (3, 2)]).unwrap();
        let run = first_passage_times(&g, 1, |_| 1.0).unwrap();
        assert_eq!(run.denominator, 2);
        let curve = spreading_curve(&run, &[2.0]);
        assert_eq!(curve, vec![1.0]);
    }

    #[test]
    fn curve_reaches_one_when_component_infected() {
        let g = white_graph(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let run = first_passage_times(&g, 1, |_| 0.5).unwrap();
        assert_eq!(spreading_curve(&run, &[2.0]), vec![1.0]);
    }

    #[test]
    fn characteristic_time_step_and_interpolation() {
        // step average 0 before t=3, 1 after; a grid fine enough to resolve
        // the step makes the interpolated crossing land on 3
        let e = CurveEnsemble {
            grid: vec![0.0, 3.0 - 1e-9, 3.0, 4.0],
            curves: vec![],
            average: vec![0.0, 0.0, 1.0, 1.0],
            tau: None,
        };
        assert!((characteristic_time(&e).unwrap() - 3.0).abs() < 1e-6);
        let e = CurveEnsemble {
            grid: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            curves: vec![],
            average: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            tau: None,
        };
        assert_eq!(characteristic_time(&e).unwrap(), 2.0);
        // the linear average t/4 crosses 1/2 at 2 even off-grid
        let e = CurveEnsemble {
            grid: vec![0.0, 1.6, 2.4, 4.0],
            curves: vec![],
            average: vec![0.0, 0.4, 0.6, 1.0],
            tau: None,
        };
        assert!((characteristic_time(&e).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn characteristic_time_capped_average_errors() {
        let e = CurveEnsemble {
            grid: vec![0.0, 1.0],
            curves: vec![],
            average: vec![0.3, 0.4],
            tau: None,
        };
        assert_eq!(characteristic_time(&e).unwrap_err(), SiError::HorizonTooShort);
    }

    #[test]
    fn ensemble_of_one_averages_to_itself() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        let mode = SpreadMode::LinkDelay {
            dist: IetDistribution::power_law(0.01, 1.2).unwrap(),
        };
        let e = ensemble(&g, &g, &mode, 1, None, 7).unwrap();
        assert_eq!(e.curves.len(), 1);
        assert_eq!(e.curves[0], e.average);
        assert!(e.tau.is_some());
    }

    #[test]
    fn ensemble_deterministic_and_seed_sensitive() {
        let g = white_graph(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 4), (4, 1)]);
        let mode = SpreadMode::LinkDelay {
            dist: IetDistribution::power_law(0.01, 1.2).unwrap(),
        };
        let a = ensemble(&g, &g, &mode, 10, None, 1).unwrap();
        let b = ensemble(&g, &g, &mode, 10, None, 1).unwrap();
        let c = ensemble(&g, &g, &mode, 10, None, 2).unwrap();
        assert_eq!(a.average, b.average);
        assert_ne!(a.average, c.average);
        assert_eq!(a.curves.len(), c.curves.len());
    }

    #[test]
    fn constant_delay_on_vertex_transitive_graph_gives_identical_curves() {
        let g = white_graph(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]);
        let e = ensemble_with(5, None, 3, &g, |_rng, initiator| {
            first_passage_times(&g, initiator, |_| 1.0)
        })
        .unwrap();
        for c in &e.curves {
            assert_eq!(c, &e.curves[0]);
        }
    }

    #[test]
    fn curves_are_monotone_and_start_at_initiator_fraction() {
        let g = white_graph(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]);
        let mode = SpreadMode::LinkDelay {
            dist: IetDistribution::power_law(0.01, 1.5).unwrap(),
        };
        let e = ensemble(&g, &g, &mode, 20, None, 11).unwrap();
        for c in &e.curves {
            assert!(c[0] >= 0.2 - 1e-12);
            for w in c.windows(2) {
                assert!(w[1] >= w[0]);
            }
            assert_eq!(*c.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn small_sweep_endpoints() {
        let model = ModelSpec::Er { n: 400, avg_degree: 12.0, seed: 5 };
        let cfg = SweepConfig {
            p_grid: vec![0.0, 1.0],
            dists: vec![IetDistribution::power_law(0.008, 1.2).unwrap()],
            runs: 5,
            bridges_ratio: Some(5.0),
            p_inf_cutoff: 0.2,
            mode: SyntheticKind::LinkDelay,
            master_seed: 77,
        };
        let rows = sweep(&model, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        let r0 = &rows[0];
        assert!((r0.avg_k_w - 12.0).abs() < 1.0);
        assert!(r0.p_inf > 0.95);
        assert!(r0.tau_w.is_some() && r0.tau.is_some());
        assert!(r0.flag.is_empty());
        let r1 = &rows[1];
        assert_eq!(r1.p, 1.0);
        assert!(r1.tau_w.is_none());
        assert!(r1.flag.contains("no_initiator"));
        assert!(r1.flag.contains("low_p_inf"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let model = ModelSpec::Er { n: 200, avg_degree: 8.0, seed: 3 };
        let cfg = SweepConfig {
            p_grid: vec![0.3],
            dists: vec![IetDistribution::power_law(0.008, 1.2).unwrap()],
            runs: 5,
            bridges_ratio: Some(2.0),
            p_inf_cutoff: 0.2,
            mode: SyntheticKind::LinkDelay,
            master_seed: 9,
        };
        assert_eq!(sweep(&model, &cfg).unwrap(), sweep(&model, &cfg).unwrap());
    }
}
