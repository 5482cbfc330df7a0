//! Refinement studies: run one stage of the pipeline over a ladder of
//! sample counts against an analytic phantom and report the error decay.
//!
//! Each pipeline reduces a run at sample count N (spacing h = 1/N) to a
//! single sup-norm error; the table then carries per-step slopes
//! log2(e_i/e_{i+1}) and a least-squares slope of log error against
//! log h, which is the number the order claims are checked against.

use std::fmt::Write as _;

use crate::distance::{mls_project_indexed, MLSConfig};
use crate::error::{Error, Result};
use crate::geom::cloud::{fill_distance, HashGrid};
use crate::geom::sampled::PctKind;
use crate::phantoms::{self, Phantom};
use crate::quasi::TensorSpline;
use crate::reconstruct::{
    build_graph_approximant, build_two_stage, ReconstructConfig,
};
use crate::svf1d::build_approximant;

/// Off-lattice abscissas used by the slice-error pipelines; chosen away
/// from every h = 1/N lattice in the usual ladders so the interpolation
/// property cannot mask the between-sample error.
pub const PROBE_TS: [f64; 5] = [0.2619, 0.3847, 0.5155, 0.6403, 0.7351];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    /// Scalar quasi-interpolation of sin(2*pi*x); the phantom is unused.
    Qi,
    /// Moving-least-squares distance estimation from a boundary cloud.
    Mls,
    /// Location error of transversal-crossing topology changes.
    PctA,
    /// Location error of fold-type topology changes.
    PctB,
    /// Two-stage planar reconstruction, slice Hausdorff error.
    Stage2,
    /// Implicit graph build, graph-boundary Hausdorff error.
    Implicit,
}

impl Pipeline {
    pub fn parse(s: &str) -> Result<Pipeline> {
        match s {
            "qi" => Ok(Pipeline::Qi),
            "mls" => Ok(Pipeline::Mls),
            "pct-a" => Ok(Pipeline::PctA),
            "pct-b" => Ok(Pipeline::PctB),
            "stage2" => Ok(Pipeline::Stage2),
            "implicit" => Ok(Pipeline::Implicit),
            other => Err(Error::InvalidArgument(format!(
                "unknown pipeline `{other}` (expected qi, mls, pct-a, pct-b, stage2 or implicit)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Qi => "qi",
            Pipeline::Mls => "mls",
            Pipeline::PctA => "pct-a",
            Pipeline::PctB => "pct-b",
            Pipeline::Stage2 => "stage2",
            Pipeline::Implicit => "implicit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub label: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Per-refinement slopes; entry i compares rows i-1 and i.
    pub fn step_slopes(&self) -> Vec<Option<f64>> {
        let mut out = vec![None; self.rows.len()];
        for i in 1..self.rows.len() {
            let (a, b) = (&self.rows[i - 1], &self.rows[i]);
            if a.error > 0.0 && b.error > 0.0 && a.h != b.h {
                out[i] = Some((a.error / b.error).ln() / (a.h / b.h).ln());
            }
        }
        out
    }

    /// Least-squares slope of log error against log h over all rows.
    pub fn fitted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0)
            .map(|r| (r.h.ln(), r.error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.label);
        let _ = writeln!(out, "{:>6} {:>12} {:>13} {:>7}", "N", "h", "error", "slope");
        let slopes = self.step_slopes();
        for (row, slope) in self.rows.iter().zip(&slopes) {
            let s = match slope {
                Some(v) => format!("{v:7.2}"),
                None => format!("{:>7}", "-"),
            };
            let _ = writeln!(
                out,
                "{:>6} {:>12.6e} {:>13.6e} {s}",
                row.n, row.h, row.error
            );
        }
        if let Some(s) = self.fitted_slope() {
            let _ = writeln!(out, "fitted slope {s:.2}");
        }
        out
    }
}

/// Runs `pipeline` on `ph` for each sample count in `ns`.
pub fn study(
    ph: &Phantom,
    pipeline: Pipeline,
    ns: &[usize],
    config: &ReconstructConfig,
) -> Result<ConvergenceTable> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("need at least one sample count".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("sample count {n} is too small")));
        }
        let h = 1.0 / n as f64;
        let error = match pipeline {
            Pipeline::Qi => qi_error(n, config.p_spline)?,
            Pipeline::Mls => mls_error(ph, h, config.m)?,
            Pipeline::PctA => pct_error(ph, n, config, PctKind::Crossing)?,
            Pipeline::PctB => pct_error(ph, n, config, PctKind::Fold)?,
            Pipeline::Stage2 => stage2_error(ph, n, config)?,
            Pipeline::Implicit => implicit_error(ph, n, config)?,
        };
        rows.push(ConvergenceRow { n, h, error });
    }
    let label = match pipeline {
        Pipeline::Qi => format!("pipeline qi, f(x) = sin(2 pi x), degree {}", config.p_spline),
        _ => format!("pipeline {}, phantom {}", pipeline.name(), ph.name),
    };
    Ok(ConvergenceTable { label, rows })
}

fn qi_error(n: usize, degree: usize) -> Result<f64> {
    let f = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
    let values: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
    let spline = TensorSpline::build(degree, 1, &values)?;
    let mut sup: f64 = 0.0;
    for i in 0..=4096 {
        let x = i as f64 / 4096.0;
        sup = sup.max((spline.value(&[x]) - f(x)).abs());
    }
    Ok(sup)
}

/// Builds a boundary cloud dense enough that its fill distance is at most
/// h/2 (point spacing about h), estimates distances on a near-boundary
/// probe grid and compares with the analytic field.
fn mls_error(ph: &Phantom, h: f64, m: usize) -> Result<f64> {
    if ph.dim != 1 {
        return Err(Error::InvalidArgument(
            "mls pipeline needs a planar-graph phantom (d = 1)".into(),
        ));
    }
    let probe = vec![0.5; ph.ambient_dim()];
    if ph.signed_distance(&probe).is_none() {
        return Err(Error::InvalidArgument(format!(
            "phantom `{}` has no ambient signed distance to compare against",
            ph.name
        )));
    }
    let reference = ph.boundary_samples(4096);
    let mut res = 16;
    let mut cloud = ph.boundary_samples(res);
    while fill_distance(&cloud, &reference)? > h / 2.0 && res < 1 << 16 {
        res *= 2;
        cloud = ph.boundary_samples(res);
    }
    let cfg = MLSConfig::for_spacing(h, m);
    let index = HashGrid::build(&cloud, cfg.rho);
    let grid_res = 96;
    let mut sup: f64 = 0.0;
    for i in 0..=grid_res {
        for j in 0..=grid_res {
            let p = [i as f64 / grid_res as f64, j as f64 / grid_res as f64];
            let sd = ph.signed_distance(&p).unwrap();
            if sd.abs() > 1.5 * h || sd.abs() < 1e-12 {
                continue;
            }
            let (_, d) = mls_project_indexed(&p, &cloud, &index, &cfg)?;
            sup = sup.max((d.abs() - sd.abs()).abs());
        }
    }
    Ok(sup)
}

fn pct_error(ph: &Phantom, n: usize, config: &ReconstructConfig, kind: PctKind) -> Result<f64> {
    if ph.dim != 1 {
        return Err(Error::InvalidArgument(
            "pct pipelines need an interval-valued phantom (d = 1)".into(),
        ));
    }
    let refs: Vec<_> = ph.pcts().into_iter().filter(|p| p.kind == kind).collect();
    if refs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "phantom `{}` has no {} topology changes to locate",
            ph.name,
            match kind {
                PctKind::Crossing => "crossing",
                PctKind::Fold => "fold",
            }
        )));
    }
    let svf = ph.sample(n, 0)?;
    let approx = build_approximant(&svf, config.k, config.p_spline)?;
    let errs = phantoms::pct_location_errors(&refs, &approx.pcts());
    Ok(errs.into_iter().fold(0.0, f64::max))
}

fn stage2_error(ph: &Phantom, n: usize, config: &ReconstructConfig) -> Result<f64> {
    if !ph.has_exact_slice_distance() || ph.dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "stage2 pipeline needs a planar-image phantom with an exact slice distance \
             (ball or torus), got `{}`",
            ph.name
        )));
    }
    let svf = ph.sample(n, 2 * n + 1)?;
    let two = build_two_stage(&svf, config)?;
    let mut sup: f64 = 0.0;
    for &t in &PROBE_TS {
        sup = sup.max(phantoms::slice_hausdorff(ph, t, &two.evaluate(t)?));
    }
    Ok(sup)
}

fn implicit_error(ph: &Phantom, n: usize, config: &ReconstructConfig) -> Result<f64> {
    if ph.dim > 2 {
        return Err(Error::InvalidArgument(
            "implicit pipeline measures graph boundaries up to d = 2".into(),
        ));
    }
    let grid = if ph.dim >= 2 { 2 * n + 1 } else { 0 };
    let svf = ph.sample(n, grid)?;
    let ga = build_graph_approximant(&svf, config)?;
    phantoms::graph_hausdorff(ph, &ga, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qi_ladder_recovers_fourth_order() {
        let ph = phantoms::by_name("disk").unwrap();
        let table = study(&ph, Pipeline::Qi, &[16, 32, 64], &ReconstructConfig::default())
            .unwrap();
        let slope = table.fitted_slope().unwrap();
        assert!(slope >= 3.5, "qi slope {slope:.2}");
        assert!(table.render().contains("fitted slope"));
    }

    #[test]
    fn slope_of_exact_powers_is_exact() {
        let table = ConvergenceTable {
            label: "synthetic".into(),
            rows: vec![
                ConvergenceRow { n: 8, h: 0.125, error: 1.0 / 4096.0 },
                ConvergenceRow { n: 16, h: 0.0625, error: 1.0 / 65536.0 },
                ConvergenceRow { n: 32, h: 0.03125, error: 1.0 / 1048576.0 },
            ],
        };
        let slopes = table.step_slopes();
        assert!(slopes[0].is_none());
        assert!((slopes[1].unwrap() - 4.0).abs() < 1e-12);
        assert!((table.fitted_slope().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn pipelines_reject_mismatched_phantoms() {
        let ball = phantoms::by_name("ball").unwrap();
        let cfg = ReconstructConfig::default();
        assert!(study(&ball, Pipeline::PctA, &[16], &cfg).is_err());
        assert!(study(&ball, Pipeline::Mls, &[16], &cfg).is_err());
        let bands = phantoms::by_name("bands").unwrap();
        assert!(study(&bands, Pipeline::Stage2, &[16], &cfg).is_err());
    }
}
