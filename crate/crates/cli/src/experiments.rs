//! The named experiments. Each one computes its tables in memory and then
//! writes them one after another.

use std::path::Path;

use collapse_core::bath::{
    build_ohmic_bath, sigma_xi_sq_asymptotic, sigma_xi_sq_asymptotic_truncated, sigma_xi_sq_sum, BathDiscretization,
};
use collapse_core::bell::{bell_check, classical_bound_monte_carlo, BellReport, Setting};
use collapse_core::wavepacket::{density_grid, width_curves, BrownianSource, DensityGrid, GridSpec};
use collapse_core::ModelParams;
use serde::Serialize;

use crate::config::Scenario;
use crate::error::CliError;
use crate::output::{grid_csv, grid_rows, width_csv, write_atomic, Artifact, Csv, GRID_HEADER};

pub const PROBABILITY_HEADER: &str = "t,p_plus,p_minus,p_total";
pub const CONVERGENCE_HEADER: &str = "n,sigma_xi_sq,rel_error_truncated,rel_error_asymptotic";

/// Bath built once per run, borrowed by the Brownian source.
struct Brownian {
    bath: Option<BathDiscretization>,
    temperature: f64,
}

impl Brownian {
    fn new(s: &Scenario, params: &ModelParams) -> Result<Self, CliError> {
        if s.bath.analytic {
            // fail early on regimes without a closed form
            sigma_xi_sq_asymptotic(params)?;
            return Ok(Self { bath: None, temperature: 0.0 });
        }
        let bath = build_ohmic_bath(params, s.bath.n, s.bath.cutoff_ratio * params.omega0)?;
        Ok(Self { bath: Some(bath), temperature: s.bath.temperature })
    }

    fn source(&self) -> BrownianSource<'_> {
        match &self.bath {
            Some(bath) => BrownianSource::Bath { bath, temperature: self.temperature },
            None => BrownianSource::Asymptotic,
        }
    }
}

fn file(s: &Scenario, suffix: &str, ext: &str) -> String {
    if suffix.is_empty() {
        format!("{}.{ext}", s.name)
    } else {
        format!("{}_{suffix}.{ext}", s.name)
    }
}

fn write_csv(out: &Path, name: String, csv: Csv) -> Result<Artifact, CliError> {
    let rows = csv.rows();
    write_atomic(out, &name, &csv.into_bytes(), rows)
}

/// Runs the scenario's experiment and writes its artifacts under `out`.
pub fn run(s: &Scenario, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let params = s.params()?;
    match s.experiment() {
        "fig1" => fig1(s, &params, out),
        "fig2a" => widths(s, &params, out, "widths"),
        "widths" => widths(s, &params, out, ""),
        "fig2b" => fig2b(s, &params, out),
        "fig3" => fig3(s, &params, out),
        "bath-convergence" => bath_convergence(s, &params, out),
        "bell" => bell(s, out),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

fn fig1(s: &Scenario, params: &ModelParams, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let spin = s.spin()?;
    let brownian = Brownian::new(s, params)?;
    let source = brownian.source();
    let bare = density_grid(params, &spin, &source, &s.grid.q, &s.grid.t, false)?;
    let with = density_grid(params, &spin, &source, &s.grid.q, &s.grid.t, true)?;
    Ok(vec![
        write_csv(out, file(s, "without_brownian", "csv"), grid_csv(&bare))?,
        write_csv(out, file(s, "with_brownian", "csv"), grid_csv(&with))?,
    ])
}

fn widths(s: &Scenario, params: &ModelParams, out: &Path, suffix: &str) -> Result<Vec<Artifact>, CliError> {
    let brownian = Brownian::new(s, params)?;
    let rows = width_curves(params, &brownian.source(), &s.grid.t)?;
    Ok(vec![write_csv(out, file(s, suffix, "csv"), width_csv(&rows))?])
}

fn fig2b(s: &Scenario, params: &ModelParams, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let spin = s.spin()?;
    let brownian = Brownian::new(s, params)?;
    let grid = density_grid(params, &spin, &brownian.source(), &s.grid.q, &s.grid.t, s.include_brownian)?;
    let mut csv = Csv::new(PROBABILITY_HEADER);
    for ti in 0..grid.t_axis.len() {
        let m = grid.column_mass(ti);
        csv.row(&[m.t, m.plus, m.minus, m.total]);
    }
    Ok(vec![write_csv(out, file(s, "probabilities", "csv"), csv)?])
}

fn profiles(
    s: &Scenario,
    params: &ModelParams,
    source: &BrownianSource<'_>,
    times: &[f64],
    include_brownian: bool,
) -> Result<Csv, CliError> {
    let spin = s.spin()?;
    let mut csv = Csv::new(GRID_HEADER);
    for &t in times {
        let one: DensityGrid =
            density_grid(params, &spin, source, &s.grid.q, &GridSpec::new(t, t, 1)?, include_brownian)?;
        grid_rows(&mut csv, &one);
    }
    Ok(csv)
}

fn fig3(s: &Scenario, params: &ModelParams, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let brownian = Brownian::new(s, params)?;
    let source = brownian.source();
    let early = profiles(s, params, &source, &s.early, false)?;
    let late_bare = profiles(s, params, &source, &s.late, false)?;
    let late_with = profiles(s, params, &source, &s.late, true)?;
    Ok(vec![
        write_csv(out, file(s, "early", "csv"), early)?,
        write_csv(out, file(s, "late_without_brownian", "csv"), late_bare)?,
        write_csv(out, file(s, "late_with_brownian", "csv"), late_with)?,
    ])
}

fn bath_convergence(s: &Scenario, params: &ModelParams, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let t = match s.t {
        Some(t) => t,
        None if params.eta > 0.0 => 20.0 / params.eta,
        None => return Err(CliError::InvalidConfig("bath-convergence with eta = 0 needs an explicit t".into())),
    };
    let cutoff = s.bath.cutoff_ratio * params.omega0;
    let truncated = sigma_xi_sq_asymptotic_truncated(params, cutoff)?.sigma_xi_sq;
    let full = sigma_xi_sq_asymptotic(params)?.sigma_xi_sq;
    let mut csv = Csv::new(CONVERGENCE_HEADER);
    for &n in &s.sizes {
        let bath = build_ohmic_bath(params, n, cutoff)?;
        let v = sigma_xi_sq_sum(params, &bath, t, s.bath.temperature)?.sigma_xi_sq;
        csv.row(&[n as f64, v, (v - truncated).abs() / truncated, (v - full).abs() / full]);
    }
    Ok(vec![write_csv(out, file(s, "", "csv"), csv)?])
}

#[derive(Serialize)]
struct BellArtifact {
    settings: [[f64; 3]; 3],
    quantum: BellReport,
    classical: BellReport,
}

fn bell(s: &Scenario, out: &Path) -> Result<Vec<Artifact>, CliError> {
    let [a, b, c] = s.angles.map(Setting::planar);
    let quantum = bell_check(&a, &b, &c);
    let classical = classical_bound_monte_carlo(&a, &b, &c, s.samples, s.seed)?;
    let doc = BellArtifact { settings: [a.vector(), b.vector(), c.vector()], quantum, classical };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(vec![write_atomic(out, &file(s, "", "json"), text.as_bytes(), 2)?])
}
