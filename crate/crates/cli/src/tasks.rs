use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use radcomp::warping::default_horizon;
use radcomp::{
    bishop_monotonicity_check, comparison_triangle, corollary_check, delta_threshold, gminus,
    growth_ratio, kstar, main_theorem_check, slope_limit, solve_warping, threshold,
    total_curvature_direct, total_curvature_isoperimetric, triangle_curvature_integral,
    CheckOptions, CriterionReport, GrowthSource, ModelSurface, RadialCurvature, RotSymManifold,
    Verdict,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{Command, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Overrides shared by every task.
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub rel_tol: f64,
    pub horizon: Option<f64>,
}

pub struct TaskContext<'a> {
    pub scenario: &'a Scenario,
    pub out_dir: &'a Path,
    pub settings: Settings,
}

#[derive(Debug, Serialize)]
pub struct TaskOutput {
    pub index: usize,
    pub task: &'static str,
    pub result: Value,
    pub files: Vec<String>,
    #[serde(skip)]
    pub verdict: Option<Verdict>,
}

impl TaskContext<'_> {
    /// Creates `NN-task[-suffix].csv` with the provenance line already written.
    fn csv(
        &self,
        index: usize,
        task: &str,
        suffix: &str,
        files: &mut Vec<String>,
    ) -> Result<BufWriter<File>> {
        let name = if suffix.is_empty() {
            format!("{index:02}-{task}.csv")
        } else {
            format!("{index:02}-{task}-{suffix}.csv")
        };
        let path: PathBuf = self.out_dir.join(&name);
        let file =
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# scenario={} radcomp {VERSION}", self.scenario.name)?;
        files.push(name);
        Ok(w)
    }

    fn horizon_for(&self, k: &RadialCurvature, at_least: f64) -> f64 {
        self.settings
            .horizon
            .unwrap_or_else(|| default_horizon(k))
            .max(at_least)
    }

    fn options(&self, horizons: &[f64]) -> CheckOptions {
        CheckOptions {
            rel_tol: self.settings.rel_tol,
            horizons: horizons.to_vec(),
        }
    }

    pub fn run(&self, index: usize, command: &Command) -> Result<TaskOutput> {
        let sc = self.scenario;
        let tol = self.settings.rel_tol;
        let mut files = Vec::new();
        let mut verdict = None;
        let result = match command {
            Command::Threshold { g, k } => {
                let g_curv = sc.curvature(g);
                let reduced = match k {
                    Some(k) => kstar(g_curv, sc.curvature(k)),
                    None => gminus(g_curv),
                };
                let delta = delta_threshold(&reduced)?;
                let thr = threshold(sc.n, delta)?;
                let w = solve_warping(&reduced, self.horizon_for(&reduced, 0.0), tol)?;
                let mut f = self.csv(index, "threshold", "warping", &mut files)?;
                w.write_csv(&mut f)?;
                f.flush()?;
                // Asymptotic quantities exist only for a finite moment.
                let (slope, direct, iso) = match slope_limit(&w) {
                    Ok(s) => (
                        Some(s),
                        Some(total_curvature_direct(&w)?),
                        Some(total_curvature_isoperimetric(&w)?),
                    ),
                    Err(radcomp::Error::Unbounded) => (None, None, None),
                    Err(e) => return Err(e.into()),
                };
                json!({
                    "moment": reduced.moment_integral()?,
                    "delta": delta,
                    "threshold": thr,
                    "slope_limit": slope,
                    "total_curvature_direct": direct,
                    "total_curvature_isoperimetric": iso,
                })
            }
            Command::Growth {
                numerator,
                denominator,
                horizons,
            } => {
                let last = horizons.last().copied().unwrap_or(0.0);
                let num_k = sc.curvature(numerator);
                let den_k = sc.curvature(denominator);
                let num = solve_warping(num_k, self.horizon_for(num_k, last), tol)?;
                let den = solve_warping(den_k, self.horizon_for(den_k, last), tol)?;
                let r = growth_ratio(sc.n, &num, &den, horizons)?;
                let mut f = self.csv(index, "growth", "", &mut files)?;
                r.write_csv(&mut f)?;
                f.flush()?;
                let check = bishop_monotonicity_check(&r);
                json!({ "growth": r, "monotonicity": check })
            }
            Command::Triangle { curvature, sides } => {
                let k = sc.curvature(curvature);
                let reach = sides.iter().copied().fold(0.0, f64::max) * 2.0 + 1.0;
                let surface = ModelSurface::new(k, self.horizon_for(k, reach), tol)?;
                let tri = comparison_triangle(&surface, sides[0], sides[1], sides[2])?;
                let residual = radcomp::gauss_bonnet_residual(&surface, &tri)?;
                let mut f = self.csv(index, "triangle", "side", &mut files)?;
                tri.side_xy.write_csv(&mut f, 200)?;
                f.flush()?;
                serde_json::to_value(tri.record(Some(residual)))?
            }
            Command::GaussBonnet {
                curvature,
                triangles,
            } => {
                let k = sc.curvature(curvature);
                let reach = triangles.iter().flatten().copied().fold(0.0, f64::max) * 2.0 + 1.0;
                let surface = ModelSurface::new(k, self.horizon_for(k, reach), tol)?;
                let mut w = self.csv(index, "gauss-bonnet", "", &mut files)?;
                writeln!(w, "d_ox,d_oy,d_xy,angle_sum,curvature_integral,residual")?;
                let mut worst: f64 = 0.0;
                let mut records = Vec::with_capacity(triangles.len());
                for s in triangles {
                    let tri = comparison_triangle(&surface, s[0], s[1], s[2])?;
                    let integral = triangle_curvature_integral(&surface, &tri)?;
                    let residual = tri.angle_sum() - std::f64::consts::PI - integral;
                    writeln!(
                        w,
                        "{},{},{},{},{integral},{residual}",
                        s[0],
                        s[1],
                        s[2],
                        tri.angle_sum()
                    )?;
                    worst = worst.max(residual.abs());
                    records.push(tri.record(Some(residual)));
                }
                w.flush()?;
                json!({ "max_abs_residual": worst, "triangles": records })
            }
            Command::CheckMain {
                g,
                k,
                bracket,
                horizons,
            } => {
                let mfd = self.manifold(bracket)?;
                let source = growth_source(bracket, mfd.as_ref());
                let report = main_theorem_check(
                    sc.n,
                    sc.curvature(g),
                    sc.curvature(k),
                    source,
                    &self.options(horizons),
                )?;
                verdict = Some(report.verdict);
                self.report_files(index, "check-main", &report, &mut files)?;
                serde_json::to_value(report)?
            }
            Command::CheckCorollary {
                g,
                bracket,
                horizons,
            } => {
                let mfd = self.manifold(bracket)?;
                let source = growth_source(bracket, mfd.as_ref());
                let report =
                    corollary_check(sc.n, sc.curvature(g), source, &self.options(horizons))?;
                verdict = Some(report.verdict);
                self.report_files(index, "check-corollary", &report, &mut files)?;
                serde_json::to_value(report)?
            }
        };
        Ok(TaskOutput {
            index,
            task: command.name(),
            result,
            files,
            verdict,
        })
    }

    /// The scenario's manifold, solved only up to its tail; the checks
    /// extend it to the horizons they need.
    fn manifold(&self, bracket: &Option<[f64; 2]>) -> Result<Option<RotSymManifold>> {
        if bracket.is_some() {
            return Ok(None);
        }
        let spec = self
            .scenario
            .manifold
            .as_ref()
            .context("scenario has no manifold")?;
        let k = spec.curvature()?;
        let horizon = k.t_tail().max(1e-3);
        Ok(Some(RotSymManifold::new(
            spec.n,
            &k,
            horizon,
            self.settings.rel_tol,
        )?))
    }

    fn report_files(
        &self,
        index: usize,
        task: &str,
        report: &CriterionReport,
        files: &mut Vec<String>,
    ) -> Result<()> {
        if let Some(g) = &report.growth {
            let mut w = self.csv(index, task, "growth", files)?;
            g.write_csv(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn growth_source<'a>(
    bracket: &Option<[f64; 2]>,
    mfd: Option<&'a RotSymManifold>,
) -> GrowthSource<'a> {
    match (bracket, mfd) {
        (Some([lo, hi]), _) => GrowthSource::Bracket { lo: *lo, hi: *hi },
        (None, Some(m)) => GrowthSource::Manifold(m),
        (None, None) => unreachable!("validated when the scenario was loaded"),
    }
}
