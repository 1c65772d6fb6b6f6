//! Monte Carlo sweep harness: one solver call per (parameter value, seed,
//! solver) cell, records sorted deterministically, CSV output byte-stable
//! across runs.

use std::io::Write as _;
use std::time::Instant;

use crate::benchmarks;
use crate::error::Error;
use crate::fairness::FairnessParam;
use crate::kkt::{self, SolverResult};
use crate::kv::{self, KvDoc};
use crate::scenario::{draw_channels, Scenario};

/// Which scenario knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Alpha,
    PsPowerMax,
    NumWs,
    NumAntennas,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::PsPowerMax => "ps_power_max",
            SweepParameter::NumWs => "num_ws",
            SweepParameter::NumAntennas => "num_antennas",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "alpha" => Ok(SweepParameter::Alpha),
            "ps_power_max" => Ok(SweepParameter::PsPowerMax),
            "num_ws" => Ok(SweepParameter::NumWs),
            "num_antennas" => Ok(SweepParameter::NumAntennas),
            other => Err(Error::domain("sweep", format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// Solver selection for a sweep cell. `Cfba` dispatches on the cell's
/// fairness parameter: throughput at alpha 0, the common-fairness engine for
/// finite alpha, max-min for the sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Zfba,
    Cfba,
    Mfba,
    Flca,
    Fcoa,
    Nera,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Zfba => "zfba",
            SolverKind::Cfba => "cfba",
            SolverKind::Mfba => "mfba",
            SolverKind::Flca => "flca",
            SolverKind::Fcoa => "fcoa",
            SolverKind::Nera => "nera",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "zfba" => Ok(SolverKind::Zfba),
            "cfba" => Ok(SolverKind::Cfba),
            "mfba" => Ok(SolverKind::Mfba),
            "flca" => Ok(SolverKind::Flca),
            "fcoa" => Ok(SolverKind::Fcoa),
            "nera" => Ok(SolverKind::Nera),
            other => Err(Error::domain("sweep", format!("unknown solver `{other}`"))),
        }
    }
}

/// Full description of one sweep; identical specs produce identical records.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub template: Scenario,
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    /// Fill the wall-time column from a monotonic clock. Off by default so
    /// that emitted CSV bytes stay reproducible.
    pub measure_time: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.grid.is_empty() {
            return Err(Error::domain("sweep", "empty value grid"));
        }
        if self.seeds.is_empty() {
            return Err(Error::domain("sweep", "empty seed list"));
        }
        if self.solvers.is_empty() {
            return Err(Error::domain("sweep", "empty solver list"));
        }
        match self.parameter {
            SweepParameter::NumWs | SweepParameter::NumAntennas => {
                if self.grid.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                    return Err(Error::domain("sweep", "count grid must hold positive integers"));
                }
            }
            SweepParameter::Alpha => {
                if self.grid.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::domain("sweep", "alpha grid must be finite and nonnegative"));
                }
            }
            SweepParameter::PsPowerMax => {
                if self.grid.iter().any(|v| *v <= 0.0) {
                    return Err(Error::domain("sweep", "power grid must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Parse from the same key-value document format as scenarios; scenario
    /// template keys live in the same document.
    pub fn from_kv(doc: &KvDoc) -> Result<SweepSpec, Error> {
        let parameter = SweepParameter::from_name(doc.require("sweep_parameter")?)?;
        let grid = doc.get_vec("sweep_grid")?;
        let solvers = doc
            .require("sweep_solvers")?
            .split(',')
            .map(|s| SolverKind::from_name(s.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        let seeds: Vec<u64> = if doc.contains("sweep_seeds") {
            doc.get_vec("sweep_seeds")?
                .into_iter()
                .map(|v| v as u64)
                .collect()
        } else {
            let count = doc.get_usize("sweep_seed_count")?;
            (0..count as u64).collect()
        };
        let measure_time = match doc.get("sweep_measure_time") {
            Some(v) => v.trim() != "0" && v.trim() != "false",
            None => false,
        };
        let template = Scenario::from_kv(doc)?;
        let spec = SweepSpec {
            parameter,
            grid,
            template,
            solvers,
            seeds,
            measure_time,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub parameter: &'static str,
    pub value: f64,
    pub solver: &'static str,
    pub seed: u64,
    pub bits: Vec<f64>,
    pub total_bits: f64,
    pub jain: f64,
    /// Largest minus smallest per-sensor bits.
    pub gap_bits: f64,
    pub iterations: usize,
    pub wall_s: f64,
    pub converged: bool,
    /// Failure description for cells whose solve errored out.
    pub error: Option<String>,
}

fn scenario_for(template: &Scenario, parameter: SweepParameter, value: f64) -> Scenario {
    let mut s = template.clone();
    match parameter {
        SweepParameter::Alpha => s.alpha = FairnessParam::Alpha(value),
        SweepParameter::PsPowerMax => s.ps_power_max = value,
        SweepParameter::NumWs => s = s.resized(value as usize, s.num_antennas),
        SweepParameter::NumAntennas => s = s.resized(s.num_ws, value as usize),
    }
    s
}

fn solve_cell(
    s: &Scenario,
    kind: SolverKind,
    parameter: SweepParameter,
    value: f64,
    seed: u64,
) -> Result<SolverResult, Error> {
    let ch = draw_channels(s, seed);
    match kind {
        SolverKind::Zfba => kkt::solve_zfba(s, &ch),
        SolverKind::Cfba => {
            let alpha = if parameter == SweepParameter::Alpha {
                Some(value)
            } else {
                s.alpha.as_finite()
            };
            match alpha {
                Some(a) if a == 0.0 => kkt::solve_zfba(s, &ch),
                Some(a) => kkt::solve_cfba(s, &ch, a),
                None => kkt::solve_mfba(s, &ch),
            }
        }
        SolverKind::Mfba => kkt::solve_mfba(s, &ch),
        SolverKind::Flca => benchmarks::solve_flca(s, &ch),
        SolverKind::Fcoa => benchmarks::solve_fcoa(s, &ch),
        SolverKind::Nera => benchmarks::solve_nera(s, &ch),
    }
}

/// Run every cell; failures are recorded, never fatal. Records come back
/// sorted by (value, solver, seed).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, Error> {
    spec.validate()?;
    let mut records = Vec::new();
    for &value in &spec.grid {
        let s = scenario_for(&spec.template, spec.parameter, value);
        for &kind in &spec.solvers {
            for &seed in &spec.seeds {
                let started = Instant::now();
                let outcome = solve_cell(&s, kind, spec.parameter, value, seed);
                let wall_s = if spec.measure_time {
                    started.elapsed().as_secs_f64()
                } else {
                    0.0
                };
                let record = match outcome {
                    Ok(res) => SweepRecord {
                        parameter: spec.parameter.name(),
                        value,
                        solver: kind.name(),
                        seed,
                        total_bits: res.bits.iter().sum(),
                        gap_bits: res.bits.iter().fold(0.0f64, |a, b| a.max(*b))
                            - res.bits.iter().fold(f64::INFINITY, |a, b| a.min(*b)),
                        jain: res.jain,
                        iterations: res.iterations,
                        converged: res.converged,
                        bits: res.bits,
                        wall_s,
                        error: None,
                    },
                    Err(err) => SweepRecord {
                        parameter: spec.parameter.name(),
                        value,
                        solver: kind.name(),
                        seed,
                        bits: Vec::new(),
                        total_bits: 0.0,
                        jain: 0.0,
                        gap_bits: 0.0,
                        iterations: 0,
                        wall_s,
                        converged: false,
                        error: Some(err.to_string()),
                    },
                };
                records.push(record);
            }
        }
    }
    records.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.solver.cmp(b.solver))
            .then_with(|| a.seed.cmp(&b.seed))
    });
    Ok(records)
}

fn sig12(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    format!("{value:.11e}")
}

/// Render records as CSV text with a fixed column order and 12 significant
/// digits; byte-identical for identical record collections.
pub fn csv_text(records: &[SweepRecord]) -> Result<String, Error> {
    if records.is_empty() {
        return Err(Error::domain("sweep", "no records to emit"));
    }
    let width = records.iter().map(|r| r.bits.len()).max().unwrap_or(0);
    let mut out = String::from("parameter,value,solver,seed,total_bits,jfi,gap_bits,iterations,wall_s");
    for i in 1..=width {
        out.push_str(&format!(",R_{i}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}",
            r.parameter,
            sig12(r.value),
            r.solver,
            r.seed,
            sig12(r.total_bits),
            sig12(r.jain),
            sig12(r.gap_bits),
            r.iterations,
            sig12(r.wall_s),
        ));
        for i in 0..width {
            out.push(',');
            if let Some(b) = r.bits.get(i) {
                out.push_str(&sig12(*b));
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write the CSV rendering of `records` to `path`.
pub fn emit_csv(records: &[SweepRecord], path: &std::path::Path) -> Result<(), Error> {
    let text = csv_text(records)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Result<f64, Error> {
    if values.is_empty() {
        return Err(Error::domain("sweep", "median of an empty sample"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Convenience round trip for spec files.
pub fn parse_spec(text: &str) -> Result<SweepSpec, Error> {
    SweepSpec::from_kv(&kv::KvDoc::parse(text)?)
}
