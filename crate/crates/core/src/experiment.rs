//! Batch experiment runner: flat key-value configs, p-grids, seeded
//! trial fan-out, CSV/summary emission, and plot-ready aggregation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};

use rayon::prelude::*;
use thiserror::Error;

use crate::ldpc::{decode_with_budget, gallager_parity_check, DecodeMethod};
use crate::relax::RelaxationKind;
use crate::restore::{
    apply_bit_flip_noise, generate_synthetic_image, learn_phi_from_frequencies,
    restore_with_budget, BitImage, PatternPotentials, RestoreMethod, SyntheticKind,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("bad p grid `{0}`: expected `[start:step:stop]` or a single probability")]
    BadPGrid(String),
    #[error("p grid value {0} outside [0, 0.5]")]
    POutOfRange(f64),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown key `{0}` in config")]
    UnknownKey(String),
    #[error("bad value for `{key}`: `{value}`")]
    BadValue { key: String, value: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("config line {0} is not `key = value`")]
    BadLine(usize),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("code construction failed: {0}")]
    Code(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("CSV has no data rows")]
    EmptyCsv,
    #[error("CSV is missing column `{0}`")]
    MissingColumn(String),
}

/// Parses the bracket grid notation `[start:step:stop]` (inclusive
/// endpoints, tolerance half a step) or a single probability.
pub fn parse_p_grid(text: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::BadPGrid(text.to_string());
    let t = text.trim();
    let values = if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let parts: Vec<&str> = inner.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let step: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        if step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        (0..count).map(|i| start + step * i as f64).collect()
    } else {
        vec![t.parse().map_err(|_| bad())?]
    };
    for &p in &values {
        if !(0.0..=0.5).contains(&p) {
            return Err(ConfigError::POutOfRange(p));
        }
    }
    Ok(values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Application {
    Restore,
    Decode,
}

/// Everything needed to reproduce one experiment run. Built from a
/// flat `key = value` config document and/or CLI flags.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub application: Application,
    pub image_kind: SyntheticKind,
    pub image_width: usize,
    pub image_height: usize,
    /// Ground-truth image loaded from a PBM file instead of a
    /// synthetic one.
    pub image: Option<BitImage>,
    pub alpha: f64,
    pub phi: PatternPotentials,
    /// When set, φ is learned from these images and `phi` is ignored.
    pub phi_learn: Option<Vec<BitImage>>,
    pub n: usize,
    pub beta: usize,
    pub gamma: usize,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub seed_base: u64,
    /// Branch-and-bound node budget for the IP method.
    pub ip_max_nodes: usize,
    pub restore_methods: Vec<RestoreMethod>,
    pub decode_methods: Vec<DecodeMethod>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            application: Application::Restore,
            image_kind: SyntheticKind::TopLeft,
            image_width: 15,
            image_height: 15,
            image: None,
            alpha: 25.0,
            phi: PatternPotentials::new([-10.0, -20.0, -30.0, -40.0]),
            phi_learn: None,
            n: 9,
            beta: 3,
            gamma: 2,
            p_grid: vec![0.1],
            trials: 1,
            seed_base: 0,
            ip_max_nodes: crate::lp::IpOptions::default().max_nodes,
            restore_methods: vec![RestoreMethod::Lp(RelaxationKind::Clique), RestoreMethod::Ip],
            decode_methods: vec![DecodeMethod::ParityLp, DecodeMethod::CliqueLp],
        }
    }
}

pub fn parse_restore_method(s: &str) -> Result<RestoreMethod, ConfigError> {
    match s {
        "stdLP" => Ok(RestoreMethod::Lp(RelaxationKind::Standard)),
        "flLP" => Ok(RestoreMethod::Lp(RelaxationKind::Flower)),
        "runLP" => Ok(RestoreMethod::Lp(RelaxationKind::RunningIntersection)),
        "cliqueLP" => Ok(RestoreMethod::Lp(RelaxationKind::Clique)),
        "McliqueLP" => Ok(RestoreMethod::Lp(RelaxationKind::MultiClique(4))),
        "IP" => Ok(RestoreMethod::Ip),
        _ => Err(ConfigError::UnknownMethod(s.to_string())),
    }
}

impl ExperimentConfig {
    /// Parses a flat `key = value` document; `#` starts a comment.
    /// Unknown keys are rejected so typos fail loudly.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut methods_seen = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::BadLine(ln + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            };
            match key {
                "application" => {
                    cfg.application = match value {
                        "restore" => Application::Restore,
                        "decode" => Application::Decode,
                        _ => return Err(bad()),
                    }
                }
                "kind" => cfg.image_kind = SyntheticKind::parse(value).ok_or_else(bad)?,
                "width" => cfg.image_width = value.parse().map_err(|_| bad())?,
                "height" => cfg.image_height = value.parse().map_err(|_| bad())?,
                "alpha" => cfg.alpha = value.parse().map_err(|_| bad())?,
                "phi" => {
                    let parts: Result<Vec<f64>, _> =
                        value.split(',').map(|t| t.trim().parse()).collect();
                    let parts = parts.map_err(|_| bad())?;
                    let arr: [f64; 4] = parts.try_into().map_err(|_| bad())?;
                    cfg.phi = PatternPotentials::new(arr);
                }
                "n" => cfg.n = value.parse().map_err(|_| bad())?,
                "beta" => cfg.beta = value.parse().map_err(|_| bad())?,
                "gamma" => cfg.gamma = value.parse().map_err(|_| bad())?,
                "p" => cfg.p_grid = parse_p_grid(value)?,
                "trials" => cfg.trials = value.parse().map_err(|_| bad())?,
                "seed" => cfg.seed_base = value.parse().map_err(|_| bad())?,
                "max_nodes" => cfg.ip_max_nodes = value.parse().map_err(|_| bad())?,
                "image" => {
                    let text = std::fs::read_to_string(value).map_err(|_| bad())?;
                    cfg.image = Some(BitImage::from_pbm(&text).map_err(|_| bad())?);
                }
                "phi_learn" => {
                    let mut images = Vec::new();
                    for path in value.split(',').map(|t| t.trim()) {
                        let text = std::fs::read_to_string(path).map_err(|_| bad())?;
                        images.push(BitImage::from_pbm(&text).map_err(|_| bad())?);
                    }
                    cfg.phi_learn = Some(images);
                }
                "methods" => {
                    methods_seen = true;
                    let names: Vec<&str> = value.split(',').map(|t| t.trim()).collect();
                    cfg.restore_methods = Vec::new();
                    cfg.decode_methods = Vec::new();
                    for name in names {
                        match cfg.application {
                            Application::Restore => {
                                cfg.restore_methods.push(parse_restore_method(name)?)
                            }
                            Application::Decode => cfg
                                .decode_methods
                                .push(DecodeMethod::parse(name).ok_or_else(|| {
                                    ConfigError::UnknownMethod(name.to_string())
                                })?),
                        }
                    }
                }
                _ => return Err(ConfigError::UnknownKey(key.to_string())),
            }
        }
        if !methods_seen && cfg.application == Application::Decode {
            cfg.decode_methods = ExperimentConfig::default().decode_methods;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        for &p in &self.p_grid {
            if !(0.0..=0.5).contains(&p) {
                return Err(ConfigError::POutOfRange(p));
            }
        }
        Ok(())
    }

    /// Seed for one trial: base XOR the global trial index. Indices
    /// are unique within a run, so seeds never collide.
    pub fn trial_seed(&self, p_index: usize, trial: usize) -> u64 {
        self.seed_base ^ (p_index * self.trials + trial) as u64
    }

    pub fn ground_truth(&self) -> BitImage {
        self.image.clone().unwrap_or_else(|| {
            generate_synthetic_image(self.image_kind, self.image_width, self.image_height)
        })
    }

    pub fn effective_phi(&self) -> PatternPotentials {
        match &self.phi_learn {
            Some(images) => learn_phi_from_frequencies(images),
            None => self.phi,
        }
    }
}

pub const RESTORE_CSV_HEADER: &str =
    "kind,p,seed,lp_value,ip_value,r_g,is_binary,partial_recovery,wall_time_s";
pub const DECODE_CSV_HEADER: &str =
    "n,beta,gamma,method,p,seed,lp_value,is_binary,partial_recovery,wall_time_s";

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub csv: String,
    pub summary: String,
}

fn fmt_f64(v: f64) -> String {
    // full round-trip precision; negative zero prints as plain zero
    if v == 0.0 {
        String::from("0")
    } else {
        format!("{v}")
    }
}

/// Runs all (method, p, trial) cells in parallel and emits rows in
/// (method, p, trial) order regardless of completion order. Fully
/// deterministic apart from the wall-time column.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    cfg.validate()?;
    match cfg.application {
        Application::Restore => run_restore(cfg),
        Application::Decode => run_decode(cfg),
    }
}

struct RestoreCell {
    rows: Vec<(usize, String)>,
    stats: Vec<(String, f64, f64, bool, f64, f64)>, // method, p, r_g, binary, recovery, time
}

fn run_restore(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    let truth = cfg.ground_truth();
    let phi = cfg.effective_phi();
    let jobs: Vec<(usize, usize)> = (0..cfg.p_grid.len())
        .flat_map(|pi| (0..cfg.trials).map(move |t| (pi, t)))
        .collect();

    let cells: Vec<Result<RestoreCell, ConfigError>> = jobs
        .par_iter()
        .map(|&(pi, trial)| {
            let p = cfg.p_grid[pi];
            let seed = cfg.trial_seed(pi, trial);
            let noisy = apply_bit_flip_noise(&truth, p, seed);
            let opts = crate::lp::IpOptions {
                max_nodes: cfg.ip_max_nodes,
            };
            // one exact optimum per instance, shared by all methods
            let ip = restore_with_budget(
                &noisy,
                cfg.alpha,
                &phi,
                RestoreMethod::Ip,
                Some(&truth),
                None,
                opts,
            );
            let ip_value = ip.outcome.objective_value();
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            for (mi, &method) in cfg.restore_methods.iter().enumerate() {
                let res = restore_with_budget(
                    &noisy,
                    cfg.alpha,
                    &phi,
                    method,
                    Some(&truth),
                    Some(ip_value),
                    opts,
                );
                if res.outcome.status() != crate::lp::SolveStatus::Optimal {
                    return Err(ConfigError::Solver(format!(
                        "{method} at p={p} seed={seed}: {:?}",
                        res.outcome.status()
                    )));
                }
                let r_g = res.gap.map(|g| g.r_g).unwrap_or(0.0);
                let recovery = res.partial_recovery.unwrap_or(0.0);
                let order = (mi * cfg.p_grid.len() + pi) * cfg.trials + trial;
                rows.push((
                    order,
                    format!(
                        "{},{},{},{},{},{},{},{},{:.6}",
                        method,
                        fmt_f64(p),
                        seed,
                        fmt_f64(res.outcome.objective_value()),
                        fmt_f64(ip_value),
                        fmt_f64(r_g),
                        res.is_binary,
                        fmt_f64(recovery),
                        res.outcome.wall_time()
                    ),
                ));
                stats.push((
                    method.to_string(),
                    p,
                    r_g,
                    res.is_binary,
                    recovery,
                    res.outcome.wall_time(),
                ));
            }
            Ok(RestoreCell { rows, stats })
        })
        .collect();
    let cells: Vec<RestoreCell> = cells.into_iter().collect::<Result<_, _>>()?;

    let mut rows: Vec<(usize, String)> = cells.iter().flat_map(|c| c.rows.clone()).collect();
    rows.sort_by_key(|&(o, _)| o);
    let mut csv = String::from(RESTORE_CSV_HEADER);
    csv.push('\n');
    for (_, row) in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let stats: Vec<_> = cells.into_iter().flat_map(|c| c.stats).collect();
    Ok(ExperimentOutput {
        summary: summarize(&stats),
        csv,
    })
}

fn run_decode(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    let code = gallager_parity_check(cfg.n, cfg.beta, cfg.gamma, cfg.seed_base)
        .map_err(|e| ConfigError::Code(e.to_string()))?;
    let jobs: Vec<(usize, usize)> = (0..cfg.p_grid.len())
        .flat_map(|pi| (0..cfg.trials).map(move |t| (pi, t)))
        .collect();

    type DecodeRow = (usize, String, (String, f64, f64, bool, f64, f64));
    let results: Vec<Result<Vec<DecodeRow>, ConfigError>> = jobs
        .par_iter()
        .map(|&(pi, trial)| {
            let p = cfg.p_grid[pi];
            let seed = cfg.trial_seed(pi, trial);
            // all-zero transmitted word through the bit-flip channel
            let zero = BitImage::new(cfg.n, 1);
            let y: Vec<bool> = apply_bit_flip_noise(&zero, p, seed).pixels().to_vec();
            cfg.decode_methods
                .iter()
                .enumerate()
                .map(|(mi, &method)| {
                    let opts = crate::lp::IpOptions {
                        max_nodes: cfg.ip_max_nodes,
                    };
                    let r = decode_with_budget(&code, &y, method, opts)
                        .map_err(|e| ConfigError::Solver(e.to_string()))?;
                    if r.status != crate::lp::SolveStatus::Optimal {
                        return Err(ConfigError::Solver(format!(
                            "{method} at p={p} seed={seed}: {:?}",
                            r.status
                        )));
                    }
                    let order = (mi * cfg.p_grid.len() + pi) * cfg.trials + trial;
                    let row = format!(
                        "{},{},{},{},{},{},{},{},{},{:.6}",
                        cfg.n,
                        cfg.beta,
                        cfg.gamma,
                        method,
                        fmt_f64(p),
                        seed,
                        fmt_f64(r.lp_value),
                        r.is_binary,
                        fmt_f64(r.partial_recovery),
                        r.wall_time
                    );
                    let stat = (
                        method.to_string(),
                        p,
                        0.0,
                        r.is_binary,
                        r.partial_recovery,
                        r.wall_time,
                    );
                    Ok((order, row, stat))
                })
                .collect()
        })
        .collect();

    let mut flat: Vec<DecodeRow> = Vec::new();
    for cell in results {
        flat.extend(cell?);
    }
    flat.sort_by_key(|&(o, _, _)| o);
    let mut csv = String::from(DECODE_CSV_HEADER);
    csv.push('\n');
    let mut stats = Vec::new();
    for (_, row, stat) in flat {
        csv.push_str(&row);
        csv.push('\n');
        stats.push(stat);
    }
    Ok(ExperimentOutput {
        summary: summarize(&stats),
        csv,
    })
}

/// Per-(method, p) aggregate block: mean gap, tightness rate, mean
/// recovery, mean wall time.
fn summarize(stats: &[(String, f64, f64, bool, f64, f64)]) -> String {
    let mut groups: BTreeMap<(String, String), Vec<&(String, f64, f64, bool, f64, f64)>> =
        BTreeMap::new();
    for s in stats {
        groups.entry((s.0.clone(), fmt_f64(s.1))).or_default().push(s);
    }
    let mut out = String::from("method,p,mean_r_g,tightness,mean_recovery,mean_wall_time_s\n");
    for ((method, p), group) in groups {
        let n = group.len() as f64;
        let mean_rg: f64 = group.iter().map(|s| s.2).sum::<f64>() / n;
        let tight: f64 = group.iter().filter(|s| s.3).count() as f64 / n;
        let rec: f64 = group.iter().map(|s| s.4).sum::<f64>() / n;
        let time: f64 = group.iter().map(|s| s.5).sum::<f64>() / n;
        writeln!(out, "{method},{p},{mean_rg},{tight},{rec},{time:.6}").unwrap();
    }
    out
}

/// Hash of a CSV with the trailing wall-time column removed from each
/// row; equal hashes mean identical experiment results.
pub fn determinism_hash(csv: &str) -> u64 {
    let mut hasher = DefaultHasher::new();
    for line in csv.lines() {
        match line.rsplit_once(',') {
            Some((head, _time)) => head.hash(&mut hasher),
            None => line.hash(&mut hasher),
        }
    }
    hasher.finish()
}

/// Long-format aggregation `method,p,mean,stderr` of one metric from
/// an experiment CSV (either application).
pub fn plot_data(csv: &str, metric: &str) -> Result<String, ConfigError> {
    let mut lines = csv.lines();
    let header = lines.next().ok_or(ConfigError::EmptyCsv)?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |names: &[&str]| -> Result<usize, ConfigError> {
        names
            .iter()
            .find_map(|n| cols.iter().position(|c| c == n))
            .ok_or_else(|| ConfigError::MissingColumn(names[0].to_string()))
    };
    let method_col = find(&["method", "kind"])?;
    let p_col = find(&["p"])?;
    let metric_col = match metric {
        "r_g" => find(&["r_g"])?,
        "tightness" => find(&["is_binary"])?,
        "recovery" => find(&["partial_recovery"])?,
        "time" => find(&["wall_time_s"])?,
        _ => return Err(ConfigError::UnknownMetric(metric.to_string())),
    };

    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut any = false;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        any = true;
        let fields: Vec<&str> = line.split(',').collect();
        let raw = fields
            .get(metric_col)
            .ok_or_else(|| ConfigError::MissingColumn(metric.to_string()))?;
        let value: f64 = match *raw {
            "true" => 1.0,
            "false" => 0.0,
            other => other.parse().map_err(|_| ConfigError::BadValue {
                key: metric.to_string(),
                value: other.to_string(),
            })?,
        };
        groups
            .entry((fields[method_col].to_string(), fields[p_col].to_string()))
            .or_default()
            .push(value);
    }
    if !any {
        return Err(ConfigError::EmptyCsv);
    }

    let mut out = String::from("method,p,mean,stderr\n");
    for ((method, p), values) in groups {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            (var / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        writeln!(out, "{method},{p},{mean},{stderr}").unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_grid_notation() {
        let g = parse_p_grid("[0.1:0.1:0.5]").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 0.1).abs() < 1e-12 && (g[4] - 0.5).abs() < 1e-12);
        let g = parse_p_grid("[0:0.02:0.1]").unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(parse_p_grid("0.3").unwrap(), vec![0.3]);
        assert!(parse_p_grid("[0.1:0:0.5]").is_err());
        assert!(parse_p_grid("[0.1:0.1:0.9]").is_err());
        assert!(parse_p_grid("nope").is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = "\
application = restore
kind = CEN
width = 6
height = 6
alpha = 25
phi = -10, -20, -30, -40
p = [0.1:0.1:0.2]
trials = 2
seed = 7
methods = cliqueLP, IP
";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(cfg.image_kind, SyntheticKind::Centered);
        assert_eq!(cfg.p_grid.len(), 2);
        assert_eq!(cfg.restore_methods.len(), 2);
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("trials = 0").is_err());
    }

    #[test]
    fn restore_run_row_count_and_determinism() {
        let text = "\
application = restore
kind = TL
width = 5
height = 5
p = [0.1:0.1:0.2]
trials = 2
seed = 3
methods = stdLP, cliqueLP, IP
";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        let out1 = run_experiment(&cfg).unwrap();
        let out2 = run_experiment(&cfg).unwrap();
        assert_eq!(out1.csv.lines().count(), 1 + 3 * 2 * 2);
        assert_eq!(determinism_hash(&out1.csv), determinism_hash(&out2.csv));
        assert!(out1.csv.starts_with(RESTORE_CSV_HEADER));
    }

    #[test]
    fn decode_run_no_noise_recovers() {
        let text = "\
application = decode
n = 9
beta = 3
gamma = 2
p = 0
trials = 3
seed = 5
methods = parLP, cliqueLP
";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        let out = run_experiment(&cfg).unwrap();
        for line in out.csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[8], "1");
        }
    }

    #[test]
    fn plot_data_aggregates() {
        let csv = "\
method,p,mean_x,r_g,is_binary,partial_recovery,wall_time_s
a,0.1,0,10,true,0.9,0.5
a,0.1,0,20,false,0.8,0.5
b,0.1,0,0,true,1,0.1
";
        let table = plot_data(csv, "r_g").unwrap();
        assert!(table.contains("a,0.1,15,"));
        assert!(table.contains("b,0.1,0,0"));
        let tight = plot_data(csv, "tightness").unwrap();
        assert!(tight.contains("a,0.1,0.5,"));
        assert!(plot_data(csv, "nope").is_err());
        assert!(plot_data("method,p\n", "r_g").is_err());
    }

    #[test]
    fn trial_seeds_unique() {
        let cfg = ExperimentConfig {
            p_grid: vec![0.0, 0.1, 0.2],
            trials: 7,
            seed_base: 99,
            ..Default::default()
        };
        let mut seen = std::collections::HashSet::new();
        for pi in 0..3 {
            for t in 0..7 {
                assert!(seen.insert(cfg.trial_seed(pi, t)));
            }
        }
    }
}
