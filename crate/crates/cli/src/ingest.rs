//! Call-detail-record parsing, role classification, city-network
//! construction and synthetic call-log generation.
//!
//! CDR files are two-section CSVs with `;` separators. Section `#users`
//! lists `user_id;is_company(0|1);zip(optional)`; section `#calls` lists
//! `caller;callee;start_seconds;duration_seconds`. All ids are unsigned
//! integers. Timestamps are normalized on load by a configurable scale
//! factor (seconds to days by default).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::Rng;
use sispread_core::events::{Event, EventError, EventLog};
use sispread_core::graph::{
    prune_degree_one_externals, prune_externals_fixpoint, GraphError, NodeId, NodeRole, RoleGraph,
};
use sispread_core::iet::IetDistribution;
use sispread_core::rng::stream_rng;

/// Seconds-to-days normalization used by default.
pub const SECONDS_TO_DAYS: f64 = 1.0 / 86_400.0;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: caller and callee are the same user ({id})")]
    SelfCall { line: usize, id: NodeId },
    #[error("line {line}: negative duration")]
    NegativeDuration { line: usize },
    #[error("line {line}: call references undeclared user {id}")]
    UnknownUser { line: usize, id: NodeId },
    #[error("no white nodes for the city (no company user with a city ZIP appears in the log)")]
    EmptyCity,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{0}")]
    Event(#[from] EventError),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What is known about one user: contract status and, for company users
/// only, an optional ZIP code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserInfo {
    pub is_company: bool,
    pub zip: Option<u32>,
}

/// user id -> contract info; non-company users never carry a ZIP.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserDirectory(pub BTreeMap<NodeId, UserInfo>);

impl UserDirectory {
    pub fn get(&self, id: NodeId) -> Option<UserInfo> {
        self.0.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The two city networks and their event logs.
///
/// `g_w` is the white-only network; `g` extends it with grey/black bridges
/// (externals of degree >= 2 after pruning). `log_w` and `log` are the
/// events restricted to the edges of each.
#[derive(Debug, Clone)]
pub struct CityNetworks {
    pub g_w: RoleGraph,
    pub g: RoleGraph,
    pub log_w: EventLog,
    pub log: EventLog,
}

/// Parses a CDR stream; events come out sorted with the span set to
/// (min start, max start + 1 second).
pub fn parse_cdr(
    reader: impl BufRead,
    time_scale: f64,
) -> Result<(EventLog, UserDirectory), IngestError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Users,
        Calls,
    }
    let mut section = Section::Preamble;
    let mut dir = UserDirectory::default();
    let mut events: Vec<Event> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        match text {
            "#users" => {
                section = Section::Users;
                continue;
            }
            "#calls" => {
                section = Section::Calls;
                continue;
            }
            _ => {}
        }
        let malformed = |msg: String| IngestError::Malformed { line: lineno, msg };
        let fields: Vec<&str> = text.split(';').collect();
        match section {
            Section::Preamble => {
                return Err(malformed("expected #users or #calls section header".into()))
            }
            Section::Users => {
                if fields.len() != 2 && fields.len() != 3 {
                    return Err(malformed(format!(
                        "user line needs 2 or 3 fields, got {}",
                        fields.len()
                    )));
                }
                let id: NodeId =
                    fields[0].parse().map_err(|_| malformed(format!("bad user id `{}`", fields[0])))?;
                let is_company = match fields[1] {
                    "0" => false,
                    "1" => true,
                    other => return Err(malformed(format!("is_company must be 0 or 1, got `{other}`"))),
                };
                let zip = match fields.get(2).filter(|s| !s.is_empty()) {
                    Some(z) => {
                        let zip: u32 =
                            z.parse().map_err(|_| malformed(format!("bad zip `{z}`")))?;
                        if !is_company {
                            return Err(malformed(
                                "non-company users cannot carry a ZIP code".into(),
                            ));
                        }
                        Some(zip)
                    }
                    None => None,
                };
                dir.0.insert(id, UserInfo { is_company, zip });
            }
            Section::Calls => {
                if fields.len() != 4 {
                    return Err(malformed(format!(
                        "call line needs 4 fields, got {}",
                        fields.len()
                    )));
                }
                let caller: NodeId = fields[0]
                    .parse()
                    .map_err(|_| malformed(format!("bad caller id `{}`", fields[0])))?;
                let callee: NodeId = fields[1]
                    .parse()
                    .map_err(|_| malformed(format!("bad callee id `{}`", fields[1])))?;
                let start_s: u64 = fields[2]
                    .parse()
                    .map_err(|_| malformed(format!("bad start time `{}`", fields[2])))?;
                let duration_s: i64 = fields[3]
                    .parse()
                    .map_err(|_| malformed(format!("bad duration `{}`", fields[3])))?;
                if caller == callee {
                    return Err(IngestError::SelfCall { line: lineno, id: caller });
                }
                if duration_s < 0 {
                    return Err(IngestError::NegativeDuration { line: lineno });
                }
                for id in [caller, callee] {
                    if dir.get(id).is_none() {
                        return Err(IngestError::UnknownUser { line: lineno, id });
                    }
                }
                events.push(Event {
                    u: caller,
                    v: callee,
                    start: start_s as f64 * time_scale,
                    duration: duration_s as f64 * time_scale,
                });
            }
        }
    }
    let span = span_of(&events, time_scale);
    Ok((EventLog::new(events, span)?, dir))
}

/// Span (min start, max start + one input tick).
fn span_of(events: &[Event], time_scale: f64) -> (f64, f64) {
    let lo = events.iter().map(|e| e.start).fold(f64::INFINITY, f64::min);
    let hi = events.iter().map(|e| e.start).fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() {
        (lo, hi + time_scale)
    } else {
        (0.0, time_scale)
    }
}

/// Writes a CDR file; the inverse of [`parse_cdr`] for logs whose start
/// times are whole input ticks.
pub fn write_cdr(
    mut w: impl Write,
    log: &EventLog,
    dir: &UserDirectory,
    time_scale: f64,
) -> Result<(), IngestError> {
    writeln!(w, "#users")?;
    for (&id, info) in &dir.0 {
        match info.zip {
            Some(z) => writeln!(w, "{id};{};{z}", info.is_company as u8)?,
            None => writeln!(w, "{id};{}", info.is_company as u8)?,
        }
    }
    writeln!(w, "#calls")?;
    for e in log.events() {
        writeln!(
            w,
            "{};{};{};{}",
            e.u,
            e.v,
            (e.start / time_scale).round() as u64,
            (e.duration / time_scale).round() as u64
        )?;
    }
    Ok(())
}

/// Assigns city roles: company users with a city ZIP are white, company
/// users without a ZIP are grey, non-company users are black. Company
/// users with a ZIP of another city are excluded entirely.
pub fn classify(dir: &UserDirectory, city_zips: &BTreeSet<u32>) -> BTreeMap<NodeId, NodeRole> {
    let mut roles = BTreeMap::new();
    for (&id, info) in &dir.0 {
        let role = match (info.is_company, info.zip) {
            (true, Some(z)) if city_zips.contains(&z) => NodeRole::White,
            (true, Some(_)) => continue,
            (true, None) => NodeRole::Grey,
            (false, _) => NodeRole::Black,
        };
        roles.insert(id, role);
    }
    roles
}

/// Builds G_w and G for one city.
///
/// G_w is the white-induced subgraph of the log's projection. G adds grey
/// and black neighbors of white nodes with their links to whites only,
/// then removes degree-1 externals (single pass, or to a fixed point when
/// `prune_fixpoint` is set). Event logs are filtered to surviving edges.
pub fn build_city_networks(
    log: &EventLog,
    dir: &UserDirectory,
    city_zips: &BTreeSet<u32>,
    prune_fixpoint: bool,
) -> Result<CityNetworks, IngestError> {
    let roles = classify(dir, city_zips);
    let role_of = |id: NodeId| roles.get(&id).copied();

    // collect nodes and edges; external-external and excluded-endpoint
    // links are dropped
    let mut node_order: Vec<(NodeId, NodeRole)> = Vec::new();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for e in log.events() {
        let (ru, rv) = match (role_of(e.u), role_of(e.v)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        if ru != NodeRole::White && rv != NodeRole::White {
            continue;
        }
        for (id, role) in [(e.u, ru), (e.v, rv)] {
            if seen.insert(id) {
                node_order.push((id, role));
            }
        }
        edges.insert((e.u.min(e.v), e.u.max(e.v)));
    }
    if !node_order.iter().any(|&(_, r)| r == NodeRole::White) {
        return Err(IngestError::EmptyCity);
    }

    let mut g_full = RoleGraph::with_nodes(&node_order)?;
    for &(u, v) in &edges {
        g_full.add_edge(u, v)?;
    }
    let g = if prune_fixpoint {
        prune_externals_fixpoint(&g_full)
    } else {
        prune_degree_one_externals(&g_full)
    };

    let keep_white: Vec<bool> =
        (0..g_full.node_count()).map(|i| g_full.role(i) == NodeRole::White).collect();
    let g_w = sispread_core::graph::subgraph(&g_full, &keep_white);

    let log_w = log.filtered(|u, v| {
        matches!((g_w.index_of(u), g_w.index_of(v)), (Some(a), Some(b)) if g_w.has_edge(a, b))
    });
    let log_g = log.filtered(|u, v| {
        matches!((g.index_of(u), g.index_of(v)), (Some(a), Some(b)) if g.has_edge(a, b))
    });

    Ok(CityNetworks { g_w, g, log_w, log: log_g })
}

/// Parameters of the synthetic CDR fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_white: usize,
    pub n_external: usize,
    pub iet: IetDistribution,
    /// time horizon of the generated log, in normalized units (days)
    pub horizon: f64,
    pub seed: u64,
    /// target average degree of the white-white Erdős–Rényi layer
    pub white_avg_degree: f64,
    /// fraction of externals that are grey (company, no ZIP); the rest are
    /// black (non-company)
    pub grey_fraction: f64,
}

impl SynthParams {
    pub fn new(
        n_white: usize,
        n_external: usize,
        iet: IetDistribution,
        horizon: f64,
        seed: u64,
    ) -> SynthParams {
        SynthParams {
            n_white,
            n_external,
            iet,
            horizon,
            seed,
            white_avg_degree: 6.0,
            grey_fraction: 0.5,
        }
    }
}

/// ZIP code given to every synthetic white user.
pub const SYNTH_CITY_ZIP: u32 = 1000;

/// Generates a synthetic call log standing in for the proprietary dataset:
/// an Erdős–Rényi layer over white users plus externals attached to
/// exactly two whites each, with renewal call sequences per link.
///
/// Start times are quantized to whole seconds so a written file parses
/// back to the identical log. Deterministic for a fixed seed.
pub fn synth_cdr(params: &SynthParams) -> Result<(EventLog, UserDirectory), IngestError> {
    if params.n_white < 2 || !(params.horizon >= 0.0) {
        return Err(IngestError::InvalidParams(
            "synthetic log needs n_white >= 2 and horizon >= 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.grey_fraction) {
        return Err(IngestError::InvalidParams("grey_fraction must be in [0,1]".into()));
    }
    let n_w = params.n_white;
    let n_x = params.n_external;
    let mut dir = UserDirectory::default();
    for id in 0..n_w {
        dir.0.insert(id as NodeId, UserInfo { is_company: true, zip: Some(SYNTH_CITY_ZIP) });
    }
    let n_grey = (n_x as f64 * params.grey_fraction).round() as usize;
    for i in 0..n_x {
        let id = (n_w + i) as NodeId;
        let is_company = i < n_grey;
        dir.0.insert(id, UserInfo { is_company, zip: None });
    }

    let mut rng = stream_rng(params.seed, 0);
    let mut links: Vec<(NodeId, NodeId)> = Vec::new();
    let p = params.white_avg_degree / (n_w - 1) as f64;
    for u in 0..n_w {
        for v in (u + 1)..n_w {
            if rng.gen::<f64>() < p {
                links.push((u as NodeId, v as NodeId));
            }
        }
    }
    for i in 0..n_x {
        let x = (n_w + i) as NodeId;
        let a = rng.gen_range(0..n_w);
        let mut b = rng.gen_range(0..n_w - 1);
        if b >= a {
            b += 1;
        }
        links.push((x, a as NodeId));
        links.push((x, b as NodeId));
    }

    // renewal call sequence per link, quantized to whole seconds
    let mut events: Vec<Event> = Vec::new();
    for &(u, v) in &links {
        let mut t = 0.0f64;
        loop {
            t += params.iet.sample(&mut rng);
            if t >= params.horizon {
                break;
            }
            let start = (t / SECONDS_TO_DAYS).round() * SECONDS_TO_DAYS;
            events.push(Event { u, v, start, duration: 60.0 * SECONDS_TO_DAYS });
        }
    }
    let span = span_of(&events, SECONDS_TO_DAYS);
    Ok((EventLog::new(events, span)?, dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const FIXTURE: &str = "\
#users
17;1;1000
42;1;1000
99;1
7;0
#calls
17;42;3600;60
42;99;7200;30
17;7;1800;10
";

    #[test]
    fn parse_cdr_basic() {
        let (log, dir) = parse_cdr(Cursor::new(FIXTURE), SECONDS_TO_DAYS).unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(dir.len(), 4);
        // sorted ascending even though input is out of order
        let starts: Vec<f64> = log.events().iter().map(|e| e.start).collect();
        assert!(starts.windows(2).all(|w| w[0] <= w[1]));
        let first = log.events()[0];
        assert_eq!((first.u, first.v), (17, 7));
        assert!((first.start - 1800.0 / 86400.0).abs() < 1e-12);
        assert_eq!(dir.get(17).unwrap(), UserInfo { is_company: true, zip: Some(1000) });
        assert_eq!(dir.get(7).unwrap(), UserInfo { is_company: false, zip: None });
    }

    #[test]
    fn parse_cdr_reports_line_numbers() {
        let bad = "#users\n1;1\n2;1\n#calls\n1;2;100\n";
        match parse_cdr(Cursor::new(bad), 1.0).unwrap_err() {
            IngestError::Malformed { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_cdr_rejects_self_call_and_negative_duration() {
        let bad = "#users\n1;1\n#calls\n1;1;100;5\n";
        assert!(matches!(
            parse_cdr(Cursor::new(bad), 1.0).unwrap_err(),
            IngestError::SelfCall { line: 4, id: 1 }
        ));
        let bad = "#users\n1;1\n2;1\n#calls\n1;2;100;-5\n";
        assert!(matches!(
            parse_cdr(Cursor::new(bad), 1.0).unwrap_err(),
            IngestError::NegativeDuration { line: 5 }
        ));
    }

    #[test]
    fn parse_cdr_rejects_undeclared_users() {
        let bad = "#users\n1;1\n#calls\n1;9;100;5\n";
        assert!(matches!(
            parse_cdr(Cursor::new(bad), 1.0).unwrap_err(),
            IngestError::UnknownUser { line: 4, id: 9 }
        ));
    }

    #[test]
    fn classify_roles() {
        let mut dir = UserDirectory::default();
        dir.0.insert(1, UserInfo { is_company: true, zip: Some(1000) });
        dir.0.insert(2, UserInfo { is_company: true, zip: None });
        dir.0.insert(3, UserInfo { is_company: false, zip: None });
        dir.0.insert(4, UserInfo { is_company: true, zip: Some(2000) });
        let zips: BTreeSet<u32> = [1000].into();
        let roles = classify(&dir, &zips);
        assert_eq!(roles.get(&1), Some(&NodeRole::White));
        assert_eq!(roles.get(&2), Some(&NodeRole::Grey));
        assert_eq!(roles.get(&3), Some(&NodeRole::Black));
        assert_eq!(roles.get(&4), None);
    }

    fn log_of(pairs: &[(NodeId, NodeId)]) -> EventLog {
        let events: Vec<Event> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| Event { u, v, start: i as f64, duration: 0.0 })
            .collect();
        EventLog::new(events, (0.0, pairs.len() as f64)).unwrap()
    }

    fn city_dir() -> (UserDirectory, BTreeSet<u32>) {
        let mut dir = UserDirectory::default();
        // 1, 2 white; 8 black; 9 grey
        dir.0.insert(1, UserInfo { is_company: true, zip: Some(1) });
        dir.0.insert(2, UserInfo { is_company: true, zip: Some(1) });
        dir.0.insert(8, UserInfo { is_company: false, zip: None });
        dir.0.insert(9, UserInfo { is_company: true, zip: None });
        (dir, [1u32].into())
    }

    #[test]
    fn city_prunes_degree_one_external() {
        let (dir, zips) = city_dir();
        let log = log_of(&[(1, 2), (1, 8)]);
        let city = build_city_networks(&log, &dir, &zips, false).unwrap();
        assert_eq!(city.g_w.node_count(), 2);
        assert_eq!(city.g.node_count(), 2);
        assert_eq!(city.g.edge_count(), 1);
        assert_eq!(city.log.len(), 1);
    }

    #[test]
    fn city_keeps_degree_two_bridge_out_of_g_w() {
        let (dir, zips) = city_dir();
        let log = log_of(&[(1, 8), (2, 8)]);
        let city = build_city_networks(&log, &dir, &zips, false).unwrap();
        assert_eq!(city.g_w.node_count(), 2);
        assert_eq!(city.g_w.edge_count(), 0);
        assert_eq!(city.g.node_count(), 3);
        assert_eq!(city.g.edge_count(), 2);
        assert!(city.g.index_of(8).is_some());
        assert!(city.g_w.index_of(8).is_none());
    }

    #[test]
    fn city_drops_external_external_links() {
        let (dir, zips) = city_dir();
        let log = log_of(&[(1, 2), (8, 9)]);
        let city = build_city_networks(&log, &dir, &zips, false).unwrap();
        assert_eq!(city.g.node_count(), 2);
        assert_eq!(city.g.edge_count(), 1);
        assert_eq!(city.log.len(), 1);
    }

    #[test]
    fn city_requires_whites() {
        let (dir, _) = city_dir();
        let log = log_of(&[(1, 2)]);
        let err = build_city_networks(&log, &dir, &[99u32].into(), false).unwrap_err();
        assert!(matches!(err, IngestError::EmptyCity));
    }

    fn synth_params() -> SynthParams {
        SynthParams::new(
            100,
            500,
            IetDistribution::power_law(0.008, 1.2).unwrap(),
            2.0,
            42,
        )
    }

    #[test]
    fn synth_holds_external_ratio_by_construction() {
        let (_, dir) = synth_cdr(&synth_params()).unwrap();
        let whites = dir.0.values().filter(|u| u.zip.is_some()).count();
        let externals = dir.len() - whites;
        assert_eq!(externals, 5 * whites);
    }

    #[test]
    fn synth_is_deterministic() {
        let (log_a, dir_a) = synth_cdr(&synth_params()).unwrap();
        let (log_b, dir_b) = synth_cdr(&synth_params()).unwrap();
        assert_eq!(dir_a, dir_b);
        assert_eq!(log_a, log_b);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_cdr(&mut buf_a, &log_a, &dir_a, SECONDS_TO_DAYS).unwrap();
        write_cdr(&mut buf_b, &log_b, &dir_b, SECONDS_TO_DAYS).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn synth_zero_horizon_keeps_directory() {
        let params = SynthParams { horizon: 0.0, ..synth_params() };
        let (log, dir) = synth_cdr(&params).unwrap();
        assert!(log.is_empty());
        assert_eq!(dir.len(), 600);
    }

    #[test]
    fn cdr_round_trips() {
        let (log, dir) = synth_cdr(&synth_params()).unwrap();
        let mut buf = Vec::new();
        write_cdr(&mut buf, &log, &dir, SECONDS_TO_DAYS).unwrap();
        let (log2, dir2) = parse_cdr(Cursor::new(&buf), SECONDS_TO_DAYS).unwrap();
        assert_eq!(dir, dir2);
        assert_eq!(log.len(), log2.len());
        for (a, b) in log.events().iter().zip(log2.events()) {
            assert_eq!((a.u, a.v), (b.u, b.v));
            assert_eq!(a.start, b.start);
        }
    }
}
