//! The five subcommands: graph generation, dilution/bridge sweeps, city
//! ingestion, event-log statistics and synthetic log generation.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use sispread_core::events::{
    iet_stats, link_inter_event_times, tail_distribution, EventLog, Pooling,
};
use sispread_core::gen::{KumpulaParams, ModelSpec};
use sispread_core::graph::{avg_degree, percolation_fraction, NodeRole, RoleGraph};
use sispread_core::si::{
    ensemble, sweep_row, CurveEnsemble, ReplayStart, SpreadMode, SweepConfig, SweepRow,
    SyntheticKind,
};

use crate::config::{parse_dist_list, parse_p_grid, RunConfig};
use crate::error::AppError;
use crate::graphio::{
    fmt_float, write_curve_csv, write_graph, write_sidecar, write_sweep_csv, write_tail_csv,
    CurvePoint, Sidecar,
};
use crate::ingest::{
    build_city_networks, parse_cdr, synth_cdr, write_cdr, SynthParams, SECONDS_TO_DAYS,
};

/// Protocol constants: node budget, target degree, run count, bridge
/// ratio and percolation cutoff.
pub const DEFAULT_N: usize = 5000;
pub const DEFAULT_AVG_K: f64 = 12.0;
pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_BRIDGES_RATIO: f64 = 5.0;
pub const DEFAULT_P_INF_CUTOFF: f64 = 0.2;
pub const DEFAULT_DIST: &str = "pow:0.008:1.2,match-exp";
pub const DEFAULT_P_GRID: &str = "0:1:0.05";

fn out_file(path: &Path) -> Result<BufWriter<File>, AppError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        AppError::Runtime(format!("cannot create {}: {e}", path.display()))
    })?))
}

fn open_file(path: &Path) -> Result<BufReader<File>, AppError> {
    Ok(BufReader::new(File::open(path).map_err(|e| {
        AppError::Runtime(format!("cannot open {}: {e}", path.display()))
    })?))
}

fn require_path(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf, AppError> {
    p.clone().ok_or_else(|| AppError::Usage(format!("--{flag} is required")))
}

/// Resolves the topology model named in the config; `require_seed` decides
/// whether stochastic models may omit the seed (they may not).
fn model_spec(cfg: &RunConfig, name: &str) -> Result<ModelSpec, AppError> {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let avg_k = cfg.avg_k.unwrap_or(DEFAULT_AVG_K);
    let seed = || cfg.require_seed();
    match name {
        "lattice" => {
            let side = cfg.side.unwrap_or_else(|| (n as f64).sqrt().round() as usize);
            Ok(ModelSpec::LatticeNnn { side })
        }
        "er" => Ok(ModelSpec::Er { n, avg_degree: avg_k, seed: seed()? }),
        "ba" => {
            let m = cfg.m.unwrap_or_else(|| (avg_k / 2.0).round() as usize);
            Ok(ModelSpec::Ba { n, m, seed: seed()? })
        }
        "kumpula" => {
            let params = KumpulaParams {
                sweeps: cfg.sweeps.unwrap_or(KumpulaParams::default().sweeps),
                ..KumpulaParams::default()
            };
            Ok(ModelSpec::Kumpula { n, params, seed: seed()? })
        }
        other => Err(AppError::Usage(format!(
            "unknown model `{other}` (expected lattice, er, ba or kumpula)"
        ))),
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<(), AppError> {
    let name = cfg
        .model
        .as_deref()
        .ok_or_else(|| AppError::Usage("--model is required".into()))?;
    let spec = model_spec(cfg, name)?;
    let out = require_path(&cfg.out, "out")?;
    let g = spec.generate()?;
    write_graph(&mut out_file(&out)?, &g)?;
    let sidecar = Sidecar {
        command: "generate".into(),
        model: name.into(),
        params: serde_json::to_value(cfg).map_err(|e| AppError::Runtime(e.to_string()))?,
        seed: cfg.seed.unwrap_or(0),
        nodes: g.node_count(),
        edges: g.edge_count(),
    };
    let sidecar_path = out.with_extension(match out.extension() {
        Some(ext) => format!("{}.json", ext.to_string_lossy()),
        None => "json".into(),
    });
    write_sidecar(&mut out_file(&sidecar_path)?, &sidecar)?;
    Ok(())
}

fn sweep_config(cfg: &RunConfig) -> Result<SweepConfig, AppError> {
    let master_seed = cfg.require_seed()?;
    if cfg.protocol_defaults.unwrap_or(false) {
        return Ok(SweepConfig::protocol_defaults(master_seed));
    }
    let dists = parse_dist_list(cfg.dist.as_deref().unwrap_or(DEFAULT_DIST))?;
    let p_grid = parse_p_grid(cfg.p_grid.as_deref().unwrap_or(DEFAULT_P_GRID))?;
    let bridges_ratio = if cfg.no_bridges.unwrap_or(false) {
        None
    } else {
        Some(cfg.bridges_ratio.unwrap_or(DEFAULT_BRIDGES_RATIO))
    };
    let mode = match cfg.mode.as_deref().unwrap_or("link-delay") {
        "link-delay" => SyntheticKind::LinkDelay,
        "renewal" => {
            let horizon = cfg.horizon.ok_or_else(|| {
                AppError::Usage("--horizon is required in renewal mode".into())
            })?;
            SyntheticKind::Renewal { horizon }
        }
        other => {
            return Err(AppError::Usage(format!(
                "unknown mode `{other}` (expected link-delay or renewal)"
            )))
        }
    };
    Ok(SweepConfig {
        p_grid,
        dists,
        runs: cfg.runs.unwrap_or(DEFAULT_RUNS),
        bridges_ratio,
        p_inf_cutoff: cfg.p_inf_cutoff.unwrap_or(DEFAULT_P_INF_CUTOFF),
        mode,
        master_seed,
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), AppError> {
    let out = require_path(&cfg.out, "out")?;
    let sweep_cfg = sweep_config(cfg)?;
    let model_names: Vec<String> = cfg
        .models
        .as_deref()
        .or(cfg.model.as_deref())
        .unwrap_or("er")
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let bases: Vec<(String, RoleGraph)> = model_names
        .iter()
        .map(|name| Ok((name.clone(), model_spec(cfg, name)?.generate()?)))
        .collect::<Result<_, AppError>>()?;

    // rows are independent; parallelize but keep deterministic order
    let jobs: Vec<(usize, usize, f64)> = bases
        .iter()
        .enumerate()
        .flat_map(|(mi, _)| {
            sweep_cfg.p_grid.iter().enumerate().map(move |(ri, &p)| (mi, ri, p))
        })
        .collect();
    let row_sets: Vec<Result<Vec<SweepRow>, AppError>> = jobs
        .par_iter()
        .map(|&(mi, ri, p)| {
            let (name, base) = &bases[mi];
            Ok(sweep_row(base, name, p, ri, &sweep_cfg)?)
        })
        .collect();
    let mut rows = Vec::new();
    for set in row_sets {
        rows.extend(set?);
    }
    write_sweep_csv(&mut out_file(&out)?, &rows)?;
    Ok(())
}

/// 10th/90th percentile band around the average curve, nearest-rank.
fn curve_points(e: &CurveEnsemble) -> Vec<CurvePoint> {
    let runs = e.curves.len();
    let rank = |q: f64| (((runs - 1) as f64) * q).round() as usize;
    let (lo, hi) = (rank(0.10), rank(0.90));
    let mut column = vec![0.0f64; runs];
    e.grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            for (slot, curve) in column.iter_mut().zip(&e.curves) {
                *slot = curve[i];
            }
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite fractions"));
            CurvePoint { t, n_avg: e.average[i], n_p10: column[lo], n_p90: column[hi] }
        })
        .collect()
}

fn read_zips(path: &Path) -> Result<BTreeSet<u32>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read ZIP file {}: {e}", path.display())))?;
    let mut zips = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let zip: u32 = line.parse().map_err(|_| {
            AppError::Data(format!("{}:{}: bad ZIP `{line}`", path.display(), lineno + 1))
        })?;
        zips.insert(zip);
    }
    if zips.is_empty() {
        return Err(AppError::Data(format!("{}: no ZIP codes", path.display())));
    }
    Ok(zips)
}

pub fn cmd_city(cfg: &RunConfig) -> Result<(), AppError> {
    let cdr_path = require_path(&cfg.cdr, "cdr")?;
    let zips_path = require_path(&cfg.zips, "zips")?;
    let out_dir = require_path(&cfg.out_dir, "out-dir")?;
    std::fs::create_dir_all(&out_dir)?;
    let zips = read_zips(&zips_path)?;
    let (log, dir) = parse_cdr(open_file(&cdr_path)?, SECONDS_TO_DAYS)?;
    let city = build_city_networks(&log, &dir, &zips, cfg.prune_fixpoint.unwrap_or(false))?;

    let n_white = city.g_w.node_count();
    let n_external = city.g.node_count() - city
        .g
        .nodes()
        .filter(|&(_, r)| r == NodeRole::White)
        .count();
    let avg_k_w = avg_degree(&city.g_w, Some(NodeRole::White)).map_err(|e| {
        AppError::Data(e.to_string())
    })?;
    let p_inf = percolation_fraction(&city.g_w).map_err(|e| AppError::Data(e.to_string()))?;

    let iets = link_inter_event_times(&city.log_w, Pooling::PerLink);
    let stats = iet_stats(&iets).map_err(|e| AppError::Data(e.to_string()))?;
    let tail = tail_distribution(&iets, !matches!(cfg.rescale, Some(false)))
        .map_err(|e| AppError::Data(e.to_string()))?;
    write_tail_csv(&mut out_file(&out_dir.join("tail.csv"))?, &tail)?;

    let mut report = json!({
        "n_white": n_white,
        "n_external": n_external,
        "external_to_white_ratio": n_external as f64 / n_white as f64,
        "edges_w": city.g_w.edge_count(),
        "edges": city.g.edge_count(),
        "events_w": city.log_w.len(),
        "events": city.log.len(),
        "avg_k_w": avg_k_w,
        "p_inf_w": p_inf,
        "iet": { "mu": stats.mu, "sigma": stats.sigma, "B": stats.b,
                 "n_samples": stats.n_samples },
    });

    if cfg.spread.unwrap_or(false) {
        let seed = cfg.require_seed()?;
        let runs = cfg.runs.unwrap_or(DEFAULT_RUNS);
        let spread = |g: &RoleGraph, log: &EventLog| -> Result<CurveEnsemble, AppError> {
            let mode =
                SpreadMode::ReplayLog { log, periodic: true, start: ReplayStart::Random };
            Ok(ensemble(g, &city.g_w, &mode, runs, None, seed)?)
        };
        let e_w = spread(&city.g_w, &city.log_w)?;
        let e_g = spread(&city.g, &city.log)?;
        write_curve_csv(&mut out_file(&out_dir.join("curve_w.csv"))?, &curve_points(&e_w))?;
        write_curve_csv(&mut out_file(&out_dir.join("curve.csv"))?, &curve_points(&e_g))?;
        report["tau_w"] = json!(e_w.tau);
        report["tau"] = json!(e_g.tau);
    }

    let mut w = out_file(&out_dir.join("city.json"))?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

pub fn cmd_stats(cfg: &RunConfig) -> Result<(), AppError> {
    let cdr_path = require_path(&cfg.cdr, "cdr")?;
    let out_dir = require_path(&cfg.out_dir, "out-dir")?;
    std::fs::create_dir_all(&out_dir)?;
    let (log, _) = parse_cdr(open_file(&cdr_path)?, SECONDS_TO_DAYS)?;
    let pooling = match cfg.pooling.as_deref().unwrap_or("per-link") {
        "per-link" => Pooling::PerLink,
        "global" => Pooling::Global,
        other => {
            return Err(AppError::Usage(format!(
                "unknown pooling `{other}` (expected per-link or global)"
            )))
        }
    };
    let iets = link_inter_event_times(&log, pooling);
    let stats = iet_stats(&iets).map_err(|e| AppError::Data(e.to_string()))?;
    let tail = tail_distribution(&iets, !matches!(cfg.rescale, Some(false)))
        .map_err(|e| AppError::Data(e.to_string()))?;

    let mut w = out_file(&out_dir.join("stats.csv"))?;
    writeln!(w, "mu,sigma,B,n_samples")?;
    writeln!(
        w,
        "{},{},{},{}",
        fmt_float(stats.mu),
        fmt_float(stats.sigma),
        fmt_float(stats.b),
        stats.n_samples
    )?;
    write_tail_csv(&mut out_file(&out_dir.join("tail.csv"))?, &tail)?;
    Ok(())
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<(), AppError> {
    let out = require_path(&cfg.out, "out")?;
    let seed = cfg.require_seed()?;
    let dists = parse_dist_list(cfg.dist.as_deref().unwrap_or("pow:0.008:1.2"))?;
    if dists.len() != 1 {
        return Err(AppError::Usage("synth takes exactly one distribution".into()));
    }
    let params = SynthParams::new(
        cfg.n_white.unwrap_or(100),
        cfg.n_external.unwrap_or(500),
        dists[0],
        cfg.horizon.unwrap_or(30.0),
        seed,
    );
    let (log, dir) = synth_cdr(&params)?;
    write_cdr(&mut out_file(&out)?, &log, &dir, SECONDS_TO_DAYS)?;
    Ok(())
}
