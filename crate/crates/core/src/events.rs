//! Temporal event logs, static projection, periodic time wrapping and
//! inter-event-time statistics (mean, standard deviation, burstiness,
//! complementary CDF of the inter-event times).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{GraphError, NodeId, NodeRole, RoleGraph};

/// One timestamped interaction between two users.
///
/// Times are abstract units (days after ingestion normalization). Duration
/// is carried through but ignored by the spreading dynamics, which treat
/// infection as instantaneous at the event's start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub u: NodeId,
    pub v: NodeId,
    pub start: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventError {
    SelfEvent { u: NodeId, start: f64 },
    NegativeDuration { u: NodeId, v: NodeId, start: f64 },
    OutOfSpan { start: f64 },
    DegenerateSpan,
    MissingRole(NodeId),
    TooFewSamples { got: usize, need: usize },
}

impl fmt::Display for EventError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventError::SelfEvent { u, start } => {
                write!(f, "event at t={start} has identical endpoints ({u})")
            }
            EventError::NegativeDuration { u, v, start } => {
                write!(f, "event {u}-{v} at t={start} has negative duration")
            }
            EventError::OutOfSpan { start } => {
                write!(f, "event start {start} outside the log span")
            }
            EventError::DegenerateSpan => write!(f, "span end must exceed span begin"),
            EventError::MissingRole(id) => write!(f, "no role known for node {id}"),
            EventError::TooFewSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
        }
    }
}

impl core::error::Error for EventError {}

/// Sequence of events sorted by start time, with the half-open data span
/// used for periodic time boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
    span: (f64, f64),
}

impl EventLog {
    /// Sorts the events by start time and validates them against the span.
    pub fn new(mut events: Vec<Event>, span: (f64, f64)) -> Result<EventLog, EventError> {
        if !(span.1 > span.0) {
            return Err(EventError::DegenerateSpan);
        }
        for e in &events {
            if e.u == e.v {
                return Err(EventError::SelfEvent { u: e.u, start: e.start });
            }
            if e.duration < 0.0 {
                return Err(EventError::NegativeDuration { u: e.u, v: e.v, start: e.start });
            }
            if e.start < span.0 || e.start >= span.1 {
                return Err(EventError::OutOfSpan { start: e.start });
            }
        }
        events.sort_by(|a, b| a.start.partial_cmp(&b.start).expect("finite starts"));
        Ok(EventLog { events, span })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events whose normalized node pair passes the filter.
    pub fn filtered(&self, mut keep: impl FnMut(NodeId, NodeId) -> bool) -> EventLog {
        let events = self
            .events
            .iter()
            .filter(|e| keep(e.u.min(e.v), e.u.max(e.v)))
            .copied()
            .collect();
        EventLog { events, span: self.span }
    }
}

/// How inter-event times are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// Differences of consecutive events per node pair, pooled together.
    PerLink,
    /// Differences of consecutive event starts regardless of pair.
    Global,
}

/// Inter-event-time statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IetStats {
    pub mu: f64,
    pub sigma: f64,
    /// Burstiness coefficient (sigma - mu) / (sigma + mu); -1 for periodic
    /// signals, 0 for Poissonian, approaching 1 for extreme burstiness.
    pub b: f64,
    pub n_samples: usize,
}

/// Projects a temporal log onto its static underlying graph: one node per
/// endpoint, one undirected edge per pair with at least one event.
pub fn project(
    log: &EventLog,
    roles: &BTreeMap<NodeId, NodeRole>,
) -> Result<RoleGraph, EventError> {
    let mut node_ids: Vec<NodeId> = Vec::new();
    let mut seen = BTreeMap::new();
    for e in log.events() {
        for id in [e.u, e.v] {
            if seen.insert(id, ()).is_none() {
                node_ids.push(id);
            }
        }
    }
    let mut nodes = Vec::with_capacity(node_ids.len());
    for id in node_ids {
        let role = roles.get(&id).copied().ok_or(EventError::MissingRole(id))?;
        nodes.push((id, role));
    }
    let mut g = RoleGraph::with_nodes(&nodes).expect("endpoint ids deduplicated");
    for e in log.events() {
        g.add_edge(e.u, e.v).map_err(|err| match err {
            GraphError::SelfLoop(u) => EventError::SelfEvent { u, start: e.start },
            _ => EventError::MissingRole(e.u),
        })?;
    }
    Ok(g)
}

/// Inter-event times of a log under the chosen pooling.
pub fn link_inter_event_times(log: &EventLog, pooling: Pooling) -> Vec<f64> {
    match pooling {
        Pooling::PerLink => {
            let mut per_pair: BTreeMap<(NodeId, NodeId), Vec<f64>> = BTreeMap::new();
            for e in log.events() {
                per_pair
                    .entry((e.u.min(e.v), e.u.max(e.v)))
                    .or_default()
                    .push(e.start);
            }
            let mut out = Vec::new();
            for starts in per_pair.values() {
                // log order is already time order
                for w in starts.windows(2) {
                    out.push(w[1] - w[0]);
                }
            }
            out
        }
        Pooling::Global => log
            .events()
            .windows(2)
            .map(|w| w[1].start - w[0].start)
            .collect(),
    }
}

/// Sample mean, population standard deviation and burstiness of IETs.
pub fn iet_stats(samples: &[f64]) -> Result<IetStats, EventError> {
    if samples.len() < 2 {
        return Err(EventError::TooFewSamples { got: samples.len(), need: 2 });
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / n;
    let sigma = libm::sqrt(var);
    let b = (sigma - mu) / (sigma + mu);
    Ok(IetStats { mu, sigma, b, n_samples: samples.len() })
}

/// Empirical complementary CDF at each distinct sample value.
///
/// P>(x) is the fraction of samples strictly greater than x. With
/// `rescale_by_mean` the abscissae are divided by the sample mean first.
pub fn tail_distribution(
    samples: &[f64],
    rescale_by_mean: bool,
) -> Result<Vec<(f64, f64)>, EventError> {
    if samples.is_empty() {
        return Err(EventError::TooFewSamples { got: 0, need: 1 });
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let scale = if rescale_by_mean { mean } else { 1.0 };
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == x {
            j += 1;
        }
        out.push((x / scale, (n - j) as f64 / n as f64));
        i = j;
    }
    Ok(out)
}

/// Wraps a time into the half-open span by mathematical modulo.
pub fn wrap_time(t: f64, span: (f64, f64)) -> Result<f64, EventError> {
    if !(span.1 > span.0) {
        return Err(EventError::DegenerateSpan);
    }
    let len = span.1 - span.0;
    let mut r = (t - span.0) % len;
    if r < 0.0 {
        r += len;
    }
    Ok(span.0 + r)
}
