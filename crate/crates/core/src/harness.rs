//! Experiment orchestration: build kernels from a configuration, run the
//! median-filter stepper over a refinement ladder, compare against reference
//! shapes (equilibrium construction, marker-point integrator, or the finest
//! ladder member), and manage run-directory outputs.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::anisotropy::{winterbottom_shape, SurfaceTensionTriple};
use crate::error::{Error, Result};
use crate::fields::{
    area_nonneg, extract_contour, Grid2D, LevelSetState, ScalarField, ShapeSpec, Substrate,
};
use crate::fronttrack::{ft_run, MarkerCurve};
use crate::geom::{point_in_polygon, point_segment_distance, Polyline, Vec2};
use crate::kernels::{
    build_single_circle_kernel, build_two_circle_kernel, discretize_calibrated, CircleKernel,
    InterfaceLabel, StencilSet,
};
use crate::metrics::{convergence_table, l1_error, linf_error, write_error_csv, ErrorRow};
use crate::threshold_dynamics::{nonlocal_energy, BinaryPartition};
use crate::vls_stepper::{step, Comparison, StepParams, StepReport};

/// How the convolution kernels of the three interfaces are constructed.
#[derive(Debug, Clone, Copy)]
pub enum KernelMode {
    /// One circle of radius `r`; each interface's mobility is the one the
    /// kernel induces, m = 4 r^2 / (sigma + sigma'').
    SingleCircle { r: f64 },
    /// Two concentric circles realizing the configured (sigma, m) pairs.
    TwoCircle { r1: f64, r2: f64 },
}

/// What a convergence ladder is measured against.
#[derive(Debug, Clone, Copy)]
pub enum ReferenceMode {
    /// Equilibrium droplet (truncated Wulff shape) on a flat substrate,
    /// aligned by horizontal centroid before comparison.
    Winterbottom,
    /// Marker-point integrator on a flat substrate at the given resolution;
    /// requires `ft_init`.
    Fronttrack { resolution: usize },
    /// The finest member of the ladder itself.
    FinestSelf,
}

/// Full description of one experiment (or of the coarsest ladder level).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    /// grid resolution of the coarsest level
    pub n: usize,
    /// time step of the coarsest level; refinement halves it as n doubles
    pub dt: f64,
    pub final_time: f64,
    /// number of ladder levels (1 = single run)
    pub levels: usize,
    pub tensions: SurfaceTensionTriple,
    pub kernel: KernelMode,
    /// angular quadrature points per kernel circle
    pub q: usize,
    pub droplet: ShapeSpec,
    pub substrate: Substrate,
    /// conserved liquid area; defaults to the initial droplet area
    pub target_area: Option<f64>,
    pub comparison: Comparison,
    pub band_enabled: bool,
    /// override of the default dx^2/10 area tolerance
    pub mu_tol: Option<f64>,
    pub reference: ReferenceMode,
    /// initial marker polyline (left contact .. right contact) for the
    /// Fronttrack reference
    pub ft_init: Option<Vec<Vec2>>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// intermediate times at which contours and fields are dumped
    pub snapshots: Vec<f64>,
    /// energy-log period in steps; 0 disables the energy log
    pub energy_interval: usize,
    /// internal median steps per configured step; each runs at dt/substeps,
    /// shrinking the kernel width (and its O(width^2) stationary-shape bias)
    /// without changing the physical time a logged step covers
    pub substeps: usize,
    /// max concurrent ladder levels
    pub jobs: usize,
    /// verbatim configuration text recorded as config.snapshot (the caller's
    /// view, e.g. the parsed file plus overrides); a debug dump otherwise
    pub snapshot_text: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::Config("grid resolution must be at least 8".into()));
        }
        if !self.dt.is_finite()
            || self.dt <= 0.0
            || !self.final_time.is_finite()
            || self.final_time <= 0.0
        {
            return Err(Error::Config("dt and final time must be positive".into()));
        }
        let steps = self.final_time / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
            return Err(Error::Config(format!(
                "final time {} is not an integral number of steps of {}",
                self.final_time, self.dt
            )));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        if self.q < 4 {
            return Err(Error::Config("kernel quadrature needs q >= 4".into()));
        }
        match self.kernel {
            KernelMode::SingleCircle { r } if r <= 0.0 => {
                return Err(Error::Config("kernel radius must be positive".into()))
            }
            KernelMode::TwoCircle { r1, r2 } if r1 <= 0.0 || r2 <= 0.0 || r1 == r2 => {
                return Err(Error::Config(
                    "two-circle kernel needs distinct positive radii".into(),
                ))
            }
            _ => {}
        }
        if let Some(a) = self.target_area {
            if a.is_nan() || a < 0.0 {
                return Err(Error::Config("target area must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.final_time / self.dt).round() as usize
    }

    /// The k-th refinement of this config: n and step count double, dt
    /// halves, outputs go to a level subdirectory.
    pub fn refined(&self, k: usize) -> ExperimentConfig {
        let mut c = self.clone();
        c.n = self.n << k;
        c.dt = self.dt / (1 << k) as f64;
        c.out_dir = self.out_dir.join(format!("level{k}"));
        c.name = format!("{}-level{k}", self.name);
        c
    }
}

fn kernel_for(
    cfg: &ExperimentConfig,
    sigma: &crate::anisotropy::AnisotropyFn,
    m: &crate::anisotropy::MobilityFn,
) -> Result<CircleKernel> {
    match cfg.kernel {
        KernelMode::SingleCircle { r } => Ok(build_single_circle_kernel(sigma, r, cfg.q)?.0),
        KernelMode::TwoCircle { r1, r2 } => build_two_circle_kernel(sigma, m, r1, r2, cfg.q),
    }
}

/// Build the calibrated stencil triple of a config at time step `dt`.
pub fn build_stencils(cfg: &ExperimentConfig, dt: f64) -> Result<StencilSet> {
    let t = &cfg.tensions;
    let vl = kernel_for(cfg, &t.sigma_vl, &t.m_vl)?;
    let ls = kernel_for(cfg, &t.sigma_ls, &t.m_ls)?;
    let vs = kernel_for(cfg, &t.sigma_vs, &t.m_vs)?;
    StencilSet::new(
        discretize_calibrated(&vl, dt, InterfaceLabel::VL),
        discretize_calibrated(&ls, dt, InterfaceLabel::LS),
        discretize_calibrated(&vs, dt, InterfaceLabel::VS),
    )
}

/// Write a scalar field: one ASCII header line, then n*n little-endian
/// 64-bit floats in row-major order.
pub fn write_fld(path: &Path, field: &ScalarField, name: &str) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "wettix-fld n={} dx={:.17e} name={}", field.grid.n, field.grid.dx(), name)?;
    for v in &field.values {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Read a field written by `write_fld`.
pub fn read_fld(path: &Path) -> Result<(ScalarField, String)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Config("field file has no header line".into()))?;
    let header = String::from_utf8_lossy(&bytes[..nl]).to_string();
    let mut n = 0usize;
    let mut name = String::new();
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = v
                .parse()
                .map_err(|_| Error::Config(format!("bad n in field header: {v}")))?;
        } else if let Some(v) = tok.strip_prefix("name=") {
            name = v.to_string();
        }
    }
    let grid = Grid2D::new(n)?;
    let data = &bytes[nl + 1..];
    if data.len() != n * n * 8 {
        return Err(Error::Config(format!(
            "field payload has {} bytes, expected {}",
            data.len(),
            n * n * 8
        )));
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField { grid, values }, name))
}

/// Write polylines as `x y` rows with a blank line between polylines.
pub fn write_xy(path: &Path, polylines: &[Polyline]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    for (k, p) in polylines.iter().enumerate() {
        if k > 0 {
            writeln!(f)?;
        }
        for pt in &p.points {
            writeln!(f, "{:.12e} {:.12e}", pt.x, pt.y)?;
        }
    }
    f.flush()?;
    Ok(())
}

fn format_time(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".to_string() } else { s.to_string() }
}

/// Outputs of one completed run.
#[derive(Debug)]
pub struct RunResult {
    pub dir: PathBuf,
    pub final_state: LevelSetState,
    pub reports: Vec<StepReport>,
    pub target_area: f64,
    pub mu_tol: f64,
}

/// Execute a single run: evolve to the final time, logging per-step
/// diagnostics, periodic energies, and configured snapshots.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let snapshot = cfg
        .snapshot_text
        .clone()
        .unwrap_or_else(|| format!("{cfg:#?}\n"));
    std::fs::write(cfg.out_dir.join("config.snapshot"), snapshot)?;

    let grid = Grid2D::new(cfg.n)?;
    let dt_sub = cfg.dt / cfg.substeps as f64;
    let stencils = build_stencils(cfg, dt_sub)?;
    let mut params = StepParams::new(grid, stencils)?;
    params.comparison = cfg.comparison;
    if !cfg.band_enabled {
        params.band = None;
    }
    if let Some(tol) = cfg.mu_tol {
        params.mu_tol = tol;
    }
    let initial_bracket = params.mu_bracket;

    let mut state = LevelSetState::new(grid, &cfg.droplet, cfg.substrate);
    let target_area = cfg.target_area.unwrap_or_else(|| area_nonneg(&state.phi_l));
    let steps = cfg.steps();

    let mut steps_csv = BufWriter::new(File::create(cfg.out_dir.join("steps.csv"))?);
    writeln!(steps_csv, "step,mu,area,target_area,bisect_iters,max_dphi")?;
    let mut energy_csv = BufWriter::new(File::create(cfg.out_dir.join("energy.csv"))?);
    writeln!(energy_csv, "step,mu,energy")?;

    if cfg.energy_interval > 0 {
        log_energy(&state, &params, dt_sub, 0, 0.0, &mut energy_csv)?;
    }

    let snapshot_steps: Vec<(usize, f64)> = cfg
        .snapshots
        .iter()
        .map(|&t| ((t / cfg.dt).round() as usize, t))
        .filter(|&(s, _)| s > 0 && s < steps)
        .collect();

    let mut reports = Vec::with_capacity(steps);
    let outcome = evolve(
        cfg,
        &mut params,
        &mut state,
        target_area,
        initial_bracket,
        &snapshot_steps,
        &mut steps_csv,
        &mut energy_csv,
        &mut reports,
    );
    // retain partial logs even on failure
    steps_csv.flush()?;
    energy_csv.flush()?;
    outcome?;

    Ok(RunResult {
        dir: cfg.out_dir.clone(),
        final_state: state,
        reports,
        target_area,
        mu_tol: params.mu_tol,
    })
}

fn log_energy(
    state: &LevelSetState,
    params: &StepParams,
    dt: f64,
    s: usize,
    mu: f64,
    f: &mut BufWriter<File>,
) -> Result<()> {
    let part = BinaryPartition::from_state(state);
    let e = nonlocal_energy(&part, &params.stencils, dt);
    writeln!(f, "{s},{mu:.12e},{e:.12e}")?;
    Ok(())
}

fn dump_snapshot(dir: &Path, state: &LevelSetState, t: f64) -> Result<()> {
    let tag = format_time(t);
    write_fld(&dir.join(format!("phiL_T{tag}.fld")), &state.phi_l, "phiL")?;
    let contours = extract_contour(&state.phi_l).unwrap_or_default();
    write_xy(&dir.join(format!("contour_T{tag}.xy")), &contours)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn evolve(
    cfg: &ExperimentConfig,
    params: &mut StepParams,
    state: &mut LevelSetState,
    target_area: f64,
    initial_bracket: (f64, f64),
    snapshot_steps: &[(usize, f64)],
    steps_csv: &mut BufWriter<File>,
    energy_csv: &mut BufWriter<File>,
    reports: &mut Vec<StepReport>,
) -> Result<()> {
    let steps = cfg.steps();
    let dt_sub = cfg.dt / cfg.substeps as f64;
    for s in 1..=steps {
        let mut report = None;
        let mut iters = 0;
        let mut max_dphi = 0.0_f64;
        for _ in 0..cfg.substeps {
            let (next, r) = step(state, params, target_area)?;
            *state = next;
            iters += r.bisection_iterations;
            max_dphi = max_dphi.max(r.max_dphi);
            // warm-start the multiplier bracket around the last solution
            let w = 0.25 * (initial_bracket.1 - initial_bracket.0);
            params.mu_bracket = (r.mu - w, r.mu + w);
            report = Some(r);
        }
        let mut report = report.expect("substeps >= 1");
        report.bisection_iterations = iters;
        report.max_dphi = max_dphi;
        writeln!(
            steps_csv,
            "{s},{:.12e},{:.12e},{:.12e},{},{:.12e}",
            report.mu,
            report.area_achieved,
            target_area,
            report.bisection_iterations,
            report.max_dphi
        )?;
        if cfg.energy_interval > 0 && (s % cfg.energy_interval == 0 || s == steps) {
            log_energy(state, params, dt_sub, s, report.mu, energy_csv)?;
        }
        reports.push(report);
        if let Some(&(_, t)) = snapshot_steps.iter().find(|&&(ss, _)| ss == s) {
            dump_snapshot(&cfg.out_dir, state, t)?;
        }
    }
    dump_snapshot(&cfg.out_dir, state, cfg.final_time)
}

/// Signed field on `grid` that is positive inside the closed polyline, with
/// exact distances near the boundary (where subgrid area extraction reads
/// values) and unit magnitudes far away.
pub fn rasterize_region(poly: &Polyline, grid: Grid2D) -> ScalarField {
    // resample long polylines so the inside test stays affordable
    let pts: Vec<Vec2> = if poly.points.len() > 1200 {
        let stride = poly.points.len() / 1024 + 1;
        poly.points.iter().copied().step_by(stride).collect()
    } else {
        poly.points.clone()
    };
    let n = grid.n;
    let mut inside = vec![false; n * n];
    for iy in 0..n {
        for ix in 0..n {
            inside[iy * n + ix] = point_in_polygon(grid.node_pos(ix, iy), &pts);
        }
    }
    let mut values = vec![0.0_f64; n * n];
    for iy in 0..n {
        for ix in 0..n {
            let i = iy * n + ix;
            let mut boundary = false;
            'scan: for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let jx = (ix as i64 + dx).rem_euclid(n as i64) as usize;
                    let jy = (iy as i64 + dy).rem_euclid(n as i64) as usize;
                    if inside[jy * n + jx] != inside[i] {
                        boundary = true;
                        break 'scan;
                    }
                }
            }
            let sign = if inside[i] { 1.0 } else { -1.0 };
            values[i] = if boundary {
                let p = grid.node_pos(ix, iy);
                let m = pts.len();
                let mut d = f64::INFINITY;
                for k in 0..m {
                    d = d.min(point_segment_distance(p, pts[k], pts[(k + 1) % m]));
                }
                sign * d
            } else {
                sign
            };
        }
    }
    ScalarField { grid, values }
}

fn region_centroid_x(f: &ScalarField) -> f64 {
    let n = f.grid.n;
    let mut sum = 0.0;
    let mut count = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            if f.values[iy * n + ix] >= 0.0 {
                sum += f.grid.node_pos(ix, iy).x;
                count += 1.0;
            }
        }
    }
    if count > 0.0 { sum / count } else { 0.5 }
}

fn polygon_centroid_x(p: &Polyline) -> f64 {
    let pts = &p.points;
    let m = pts.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    for i in 0..m {
        let (u, v) = (pts[i], pts[(i + 1) % m]);
        let w = u.cross(v);
        a += w;
        cx += (u.x + v.x) * w;
    }
    if a.abs() < 1e-300 { 0.5 } else { cx / (3.0 * a) }
}

fn shifted_polyline(p: &Polyline, dx: f64) -> Polyline {
    let mut q = p.clone();
    for pt in &mut q.points {
        pt.x += dx;
    }
    q
}

fn largest_contour(f: &ScalarField) -> Result<Polyline> {
    let contours = extract_contour(f)?;
    contours
        .into_iter()
        .max_by(|a, b| a.points.len().cmp(&b.points.len()))
        .ok_or(Error::NoInterface)
}

fn substrate_flat_height(s: &Substrate) -> Result<f64> {
    match s {
        Substrate::Flat { height } => Ok(*height),
        _ => Err(Error::Config(
            "the requested reference needs a flat substrate".into(),
        )),
    }
}

/// The reference polyline against which ladder levels are measured, for the
/// polyline-valued reference modes.
fn reference_polyline(cfg: &ExperimentConfig, target_area: f64) -> Result<Polyline> {
    match cfg.reference {
        ReferenceMode::Winterbottom => {
            let h = substrate_flat_height(&cfg.substrate)?;
            let sls = cfg.tensions.sigma_ls.eval(0.0, 0);
            let svs = cfg.tensions.sigma_vs.eval(0.0, 0);
            let (poly, _) =
                winterbottom_shape(&cfg.tensions.sigma_vl, sls, svs, target_area, h)?;
            Ok(poly)
        }
        ReferenceMode::Fronttrack { resolution } => {
            let h = substrate_flat_height(&cfg.substrate)?;
            let init = cfg.ft_init.as_ref().ok_or_else(|| {
                Error::Config("fronttrack reference requires an initial marker polyline".into())
            })?;
            let curve = MarkerCurve::resampled(init, h, resolution)?;
            let sls = cfg.tensions.sigma_ls.eval(0.0, 0);
            let svs = cfg.tensions.sigma_vs.eval(0.0, 0);
            let out = ft_run(
                curve,
                &cfg.tensions.sigma_vl,
                &cfg.tensions.m_vl,
                sls,
                svs,
                cfg.final_time,
                None,
            )?;
            Ok(Polyline::closed(out.points))
        }
        ReferenceMode::FinestSelf => Err(Error::Config(
            "finest-self reference has no standalone polyline".into(),
        )),
    }
}

fn run_ladder(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    let configs: Vec<ExperimentConfig> = (0..cfg.levels).map(|k| cfg.refined(k)).collect();
    let jobs = cfg.jobs.max(1).min(configs.len());
    if jobs == 1 {
        return configs.iter().map(run).collect();
    }
    let next = Mutex::new(0usize);
    let results: Vec<Mutex<Option<Result<RunResult>>>> =
        (0..configs.len()).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = {
                    let mut g = next.lock().unwrap();
                    let k = *g;
                    *g += 1;
                    k
                };
                if k >= configs.len() {
                    break;
                }
                *results[k].lock().unwrap() = Some(run(&configs[k]));
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("level not executed"))
        .collect()
}

/// Run the refinement ladder, compare each level against the configured
/// reference, and write `errors.csv` in the experiment directory. Returns
/// the rows and the fitted log-log slope.
pub fn converge(cfg: &ExperimentConfig) -> Result<(Vec<ErrorRow>, Option<f64>)> {
    if cfg.levels < 3 {
        return Err(Error::Config(
            "a convergence study needs at least 3 refinement levels".into(),
        ));
    }
    let results = run_ladder(cfg)?;
    let target_area = results[0].target_area;
    let mut runs: Vec<(usize, usize, f64, Option<f64>)> = Vec::new();
    match cfg.reference {
        ReferenceMode::FinestSelf => {
            let finest = &results[cfg.levels - 1];
            let fine_grid = finest.final_state.grid();
            let ref_contour = largest_contour(&finest.final_state.phi_l)?;
            for (k, r) in results.iter().enumerate().take(cfg.levels - 1) {
                let coarse = &r.final_state.phi_l;
                let upsampled = ScalarField::from_fn(fine_grid, |p| coarse.sample(p));
                let l1 = l1_error(&upsampled, &finest.final_state.phi_l);
                let contour = largest_contour(coarse)?;
                let linf = linf_error(&contour, &ref_contour)?;
                runs.push((cfg.steps() << k, cfg.n << k, l1, Some(linf)));
            }
        }
        _ => {
            let reference = reference_polyline(cfg, target_area)?;
            let align = matches!(cfg.reference, ReferenceMode::Winterbottom);
            let ref_cx = polygon_centroid_x(&reference);
            for (k, r) in results.iter().enumerate() {
                let field = &r.final_state.phi_l;
                let reference = if align {
                    shifted_polyline(&reference, region_centroid_x(field) - ref_cx)
                } else {
                    reference.clone()
                };
                let ref_field = rasterize_region(&reference, field.grid);
                let l1 = l1_error(field, &ref_field);
                let contour = largest_contour(field)?;
                let linf = linf_error(&contour, &reference)?;
                runs.push((cfg.steps() << k, cfg.n << k, l1, Some(linf)));
            }
        }
    }
    let (rows, slope) = convergence_table(&runs);
    std::fs::create_dir_all(&cfg.out_dir)?;
    write_error_csv(&cfg.out_dir.join("errors.csv"), &rows, slope)?;
    Ok((rows, slope))
}

/// Compare a finished run against the equilibrium droplet of its tensions
/// (horizontal-centroid aligned): returns (symmetric-difference area,
/// boundary Hausdorff distance).
pub fn equilibrium_errors(cfg: &ExperimentConfig, result: &RunResult) -> Result<(f64, f64)> {
    let mut eq_cfg = cfg.clone();
    eq_cfg.reference = ReferenceMode::Winterbottom;
    let reference = reference_polyline(&eq_cfg, result.target_area)?;
    let field = &result.final_state.phi_l;
    let shift = region_centroid_x(field) - polygon_centroid_x(&reference);
    let reference = shifted_polyline(&reference, shift);
    let ref_field = rasterize_region(&reference, field.grid);
    let l1 = l1_error(field, &ref_field);
    let contour = largest_contour(field)?;
    let linf = linf_error(&contour, &reference)?;
    Ok((l1, linf))
}

/// Run two ladders that differ only in the vapor-solid mobility and emit
/// their row-wise relative differences alongside the two tables.
pub fn mobility_insensitivity_study(
    cfg_a: &ExperimentConfig,
    cfg_b: &ExperimentConfig,
) -> Result<(Vec<ErrorRow>, Vec<ErrorRow>, Vec<f64>)> {
    if cfg_a.n != cfg_b.n
        || cfg_a.dt != cfg_b.dt
        || cfg_a.final_time != cfg_b.final_time
        || cfg_a.levels != cfg_b.levels
        || cfg_a.q != cfg_b.q
    {
        return Err(Error::Config(
            "mobility study configs must differ only in the vapor-solid mobility".into(),
        ));
    }
    let (rows_a, _) = converge(cfg_a)?;
    let (rows_b, _) = converge(cfg_b)?;
    let diffs: Vec<f64> = rows_a
        .iter()
        .zip(&rows_b)
        .map(|(a, b)| (a.l1 - b.l1).abs() / a.l1.max(b.l1).max(1e-300))
        .collect();
    let mut f = BufWriter::new(File::create(cfg_a.out_dir.join("mobility_diffs.csv"))?);
    writeln!(f, "steps,inv_dx,l1_a,l1_b,rel_diff")?;
    for ((a, b), d) in rows_a.iter().zip(&rows_b).zip(&diffs) {
        writeln!(
            f,
            "{},{},{:.6e},{:.6e},{:.6e}",
            a.steps, a.inv_dx, a.l1, b.l1, d
        )?;
    }
    f.flush()?;
    Ok((rows_a, rows_b, diffs))
}
