//! Grid sweeps written as CSV.

use std::io::Write;

use rayon::prelude::*;

use repeater_core::dynamics::{stage_a_coefficients, stage_b_coefficients, PairBranch};
use repeater_core::protocol::{
    check_invariants, final_pair, heralded_pair, run_full_protocol, IDENTITY_TOLERANCE,
};
use repeater_core::ModelParams;

use crate::config::{GridSpec, Quantity};
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 7] = [
    "quantity",
    "case_id",
    "lambda1_t",
    "lambda1_tau",
    "omega_m_over_lambda1",
    "g_over_lambda1",
    "value",
];

/// One quantity over a product grid. Axes are already resolved to point lists.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub quantity: Quantity,
    /// `None` for per-case quantities means all four cases.
    pub case_id: Option<u8>,
    pub lambda1_t: GridSpec,
    pub lambda1_tau: Option<GridSpec>,
    pub omega_m: GridSpec,
    pub g: GridSpec,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub quantity: Quantity,
    pub case_id: Option<u8>,
    pub t: f64,
    pub tau: Option<f64>,
    pub omega_m: f64,
    pub g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub point: GridPoint,
    pub value: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let q = self.quantity;
        if self.case_id.is_some() && !q.per_case() {
            return Err(CliError::usage(format!("--case does not apply to {q}")));
        }
        if let Some(c) = self.case_id {
            if !(1..=4).contains(&c) {
                return Err(CliError::usage(format!("case must be 1..=4, got {c}")));
            }
        }
        match (&self.lambda1_tau, q.needs_tau()) {
            (None, true) => {
                return Err(CliError::usage(format!("{q} needs a lambda1_tau grid")));
            }
            (Some(_), false) => {
                return Err(CliError::usage(format!(
                    "lambda1_tau does not apply to {q}"
                )));
            }
            _ => {}
        }
        let axes = [
            ("lambda1_t", &self.lambda1_t),
            ("omega_m", &self.omega_m),
            ("g", &self.g),
        ];
        for (name, grid) in axes
            .into_iter()
            .chain(self.lambda1_tau.iter().map(|g| ("lambda1_tau", g)))
        {
            let values = grid.values(self.points);
            if values.is_empty() {
                return Err(CliError::usage(format!("{name} grid is empty")));
            }
            if values.iter().any(|x| !x.is_finite()) {
                return Err(CliError::usage(format!("{name} grid is not finite")));
            }
        }
        if let Some(tau) = &self.lambda1_tau {
            let ts = self.lambda1_t.values(self.points);
            if ts.len() != 1 {
                return Err(CliError::usage(
                    "a lambda1_tau grid needs a single lambda1_t value",
                ));
            }
            if let Some(bad) = tau.values(self.points).into_iter().find(|&x| x < ts[0]) {
                return Err(CliError::usage(format!(
                    "lambda1_tau = {bad} precedes lambda1_t = {}",
                    ts[0]
                )));
            }
        }
        Ok(())
    }

    /// Grid points in canonical order: case, then ω_M, G, λ₁t and λ₁τ, last varying fastest.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let cases: Vec<Option<u8>> = match (self.quantity.per_case(), self.case_id) {
            (true, None) => (1..=4).map(Some).collect(),
            (_, c) => vec![c],
        };
        let taus: Vec<Option<f64>> = match &self.lambda1_tau {
            Some(g) => g.values(self.points).into_iter().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::new();
        for &case_id in &cases {
            for omega_m in self.omega_m.values(self.points) {
                for g in self.g.values(self.points) {
                    for t in self.lambda1_t.values(self.points) {
                        for &tau in &taus {
                            out.push(GridPoint {
                                quantity: self.quantity,
                                case_id,
                                t,
                                tau,
                                omega_m,
                                g,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// The effective configuration, as echoed into the CSV comment line.
    pub fn describe(&self) -> String {
        let resolved = |g: &GridSpec| g.resolved(self.points).to_string();
        format!(
            "quantity={} case={} lambda1_t={} lambda1_tau={} omega_m={} g={}",
            self.quantity,
            self.case_id.map_or_else(
                || if self.quantity.per_case() {
                    "all".into()
                } else {
                    "-".into()
                },
                |c| c.to_string()
            ),
            resolved(&self.lambda1_t),
            self.lambda1_tau.as_ref().map_or("-".into(), resolved),
            resolved(&self.omega_m),
            resolved(&self.g),
        )
    }
}

pub fn evaluate(point: &GridPoint) -> Result<f64> {
    let params = ModelParams::dimensionless(point.omega_m, point.g)?;
    let sa = stage_a_coefficients(&params, point.t)?;
    let tau = || {
        point
            .tau
            .ok_or_else(|| CliError::usage(format!("{} needs lambda1_tau", point.quantity)))
    };
    let case = || {
        point
            .case_id
            .ok_or_else(|| CliError::usage(format!("{} needs a case", point.quantity)))
    };
    Ok(match point.quantity {
        Quantity::E14 => heralded_pair(&sa, PairBranch::Psi1).e,
        Quantity::P14_1 => heralded_pair(&sa, PairBranch::Psi1).p,
        Quantity::P14_2 => 2.0 * sa.coefficient(4).norm_sqr(),
        Quantity::E18 => final_pair(&stage_b_coefficients(&sa, &params, case()?, tau()?)?, false).e,
        Quantity::P18 => final_pair(&stage_b_coefficients(&sa, &params, case()?, tau()?)?, false).p,
        Quantity::Tree => {
            check_invariants(&run_full_protocol(&params, point.t, tau()?)?).max_deviation()
        }
    })
}

/// Largest deviation of the stage-level identities at a grid point: unit norms,
/// A₁ = ½ and A₂ − A₃ = ½.
pub fn point_deviation(point: &GridPoint) -> Result<f64> {
    let params = ModelParams::dimensionless(point.omega_m, point.g)?;
    let sa = stage_a_coefficients(&params, point.t)?;
    let half = repeater_core::C64::new(0.5, 0.0);
    let mut dev = (sa.norm_sqr() - 1.0)
        .abs()
        .max((sa.coefficient(1) - half).norm())
        .max((sa.coefficient(2) - sa.coefficient(3) - half).norm());
    if let Some(tau) = point.tau {
        for case in 1..=4 {
            let sb = stage_b_coefficients(&sa, &params, case, tau)?;
            dev = dev.max((sb.norm_sqr() - 1.0).abs());
        }
    }
    Ok(dev)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Evaluates every point of every config, concurrently, in canonical order.
pub fn compute_rows(configs: &[SweepConfig], threads: Option<usize>) -> Result<Vec<Row>> {
    for c in configs {
        c.validate()?;
    }
    let points: Vec<GridPoint> = configs.iter().flat_map(SweepConfig::grid_points).collect();
    pool(threads)?.install(|| {
        points
            .par_iter()
            .map(|p| evaluate(p).map(|value| Row { point: *p, value }))
            .collect()
    })
}

/// Maximum of [`point_deviation`] over every grid point.
pub fn check_rows(rows: &[Row], threads: Option<usize>) -> Result<f64> {
    let devs: Vec<f64> = pool(threads)?.install(|| {
        rows.par_iter()
            .map(|r| point_deviation(&r.point))
            .collect::<Result<_>>()
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

pub const CHECK_TOLERANCE: f64 = IDENTITY_TOLERANCE;

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes comment lines, the header and one record per row.
pub fn write_csv<W: Write>(mut out: W, configs: &[SweepConfig], rows: &[Row]) -> Result<()> {
    for c in configs {
        writeln!(out, "# {}", c.describe())?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let p = &r.point;
        w.write_record([
            p.quantity.to_string(),
            p.case_id.map(|c| c.to_string()).unwrap_or_default(),
            float(p.t),
            p.tau.map(float).unwrap_or_default(),
            float(p.omega_m),
            float(p.g),
            float(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Computes a sweep and writes it to `path`, replacing any existing file.
pub fn run_sweep(
    config: &SweepConfig,
    path: &std::path::Path,
    threads: Option<usize>,
) -> Result<usize> {
    let configs = std::slice::from_ref(config);
    let rows = compute_rows(configs, threads)?;
    let file = std::fs::File::create(path).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })?;
    write_csv(std::io::BufWriter::new(file), configs, &rows)?;
    Ok(rows.len())
}
