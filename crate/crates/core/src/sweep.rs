//! Parameter grids, BIC search and g2 extremum location.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::lindblad::{self, OracleConfig};
use crate::observables::{Observable, ObservableSet, SolverKind};
use crate::params::{DerivedQuantities, SystemParams};
use crate::wavefunction;

/// Coarse grid size before golden-section refinement.
pub const COARSE_POINTS: usize = 201;
/// Absolute tolerance of the BIC refinement, in units of gamma0.
pub const BIC_TOL: f64 = 1e-6;
/// Dips within this many half-linewidths gamma/2 of the predicted laser
/// position are conventional.
pub const CONVENTIONAL_WIDTHS: f64 = 5.0;
/// Drive amplitude used for cross-solver spot checks.
pub const CHECK_DRIVE: f64 = 1e-3;

const UNIFORM_SAMPLES: usize = 2001;
const WINDOW_SAMPLES: usize = 401;
const WINDOW_HALF_WIDTHS: f64 = 50.0;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evaluates one point with the chosen solver.
pub fn evaluate(p: &SystemParams, solver: SolverKind, oracle: &OracleConfig) -> Result<ObservableSet> {
    match solver {
        SolverKind::Analytic => analytic::observables(p),
        SolverKind::Wavefunction => wavefunction::observables(p),
        SolverKind::Oracle => lindblad::observables(p, oracle),
    }
}

/// As [`evaluate`], with `eta` filled in from a second solve with the
/// interference removed.
pub fn evaluate_with_eta(p: &SystemParams, solver: SolverKind, oracle: &OracleConfig) -> Result<ObservableSet> {
    let mut on = evaluate(p, solver, oracle)?;
    let off = if p.fano_enabled { evaluate(&p.with_fano(false), solver, oracle)?.g2 } else { on.g2 };
    on.eta = Some(off / on.g2);
    Ok(on)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub key: String,
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(key: impl Into<String>, start: f64, end: f64, points: usize) -> Self {
        Self { key: key.into(), start, end, points }
    }

    /// Parses `key=start:end:points`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("axis `{text}` is not key=start:end:points"));
        let (key, range) = text.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].trim().parse().map_err(|_| bad())?;
        let end = parts[1].trim().parse().map_err(|_| bad())?;
        let points = parts[2].trim().parse().map_err(|_| bad())?;
        let axis = Self::new(key.trim(), start, end, points);
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!("axis {} needs at least 2 points", self.key)));
        }
        if !self.start.is_finite() || !self.end.is_finite() {
            return Err(Error::InvalidParameter(format!("axis {} has a non-finite range", self.key)));
        }
        SystemParams::default().get(&self.key).map(|_| ())
    }

    /// Ascending sample values.
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = if self.start <= self.end { (self.start, self.end) } else { (self.end, self.start) };
        linspace(lo, hi, self.points)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub solver: SolverKind,
    pub observables: Vec<Observable>,
    pub oracle: OracleConfig,
}

impl SweepSpec {
    pub fn new(axis1: Axis, axis2: Option<Axis>, solver: SolverKind) -> Self {
        Self {
            axis1,
            axis2,
            solver,
            observables: vec![Observable::Intensity, Observable::G2, Observable::I0, Observable::I2],
            oracle: OracleConfig::default(),
        }
    }

    pub fn with_observables(mut self, obs: Vec<Observable>) -> Self {
        self.observables = obs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.key == self.axis1.key {
                return Err(Error::InvalidParameter(format!("axis {} given twice", a2.key)));
            }
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidParameter("no observables requested".into()));
        }
        if self.solver == SolverKind::Oracle {
            self.oracle.validate()?;
        }
        Ok(())
    }

    fn wants_eta(&self) -> bool {
        self.observables.contains(&Observable::Eta)
    }
}

/// One grid cell: a value, or the reason the point could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Value(ObservableSet),
    Flagged { reason: String, singular: bool },
}

impl Cell {
    pub fn value(&self) -> Option<&ObservableSet> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Flagged { .. } => None,
        }
    }

    pub fn get(&self, obs: Observable) -> Option<f64> {
        self.value().and_then(|v| v.get(obs))
    }

    pub fn is_flagged(&self) -> bool {
        matches!(self, Cell::Flagged { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub base: SystemParams,
    pub axis1_values: Vec<f64>,
    pub axis2_values: Vec<f64>,
    /// Row-major: axis1 outer, axis2 inner.
    pub cells: Vec<Cell>,
}

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1_values.len(), self.axis2_values.len().max(1))
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.shape().1 + j]
    }

    pub fn params_at(&self, i: usize, j: usize) -> Result<SystemParams> {
        cell_params(&self.spec, &self.base, self.axis1_values[i], self.axis2_values.get(j).copied())
    }

    pub fn flagged_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_flagged()).count()
    }

    fn axis_keys(&self) -> Vec<&str> {
        let mut keys = vec![self.spec.axis1.key.as_str()];
        if let Some(a2) = &self.spec.axis2 {
            keys.push(a2.key.as_str());
        }
        keys
    }

    fn coordinates(&self, index: usize) -> Vec<f64> {
        let (_, m) = self.shape();
        let mut coords = vec![self.axis1_values[index / m]];
        if !self.axis2_values.is_empty() {
            coords.push(self.axis2_values[index % m]);
        }
        coords
    }

    /// CSV with a header of axis names then observable names, one row per cell.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.axis_keys().into_iter().map(String::from).collect();
        header.extend(self.spec.observables.iter().map(|o| o.name().to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for (k, cell) in self.cells.iter().enumerate() {
            let mut row: Vec<String> = self.coordinates(k).iter().map(|v| fmt_num(*v)).collect();
            row.extend(self.spec.observables.iter().map(|&o| fmt_num(cell.get(o).unwrap_or(f64::NAN))));
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }

    /// JSON with nested value arrays (`values[i][j][k]` for 2-D, `values[i][k]`
    /// for 1-D; flagged cells are `null`) and run metadata.
    pub fn to_json(&self, timestamp: Option<&str>) -> Result<String> {
        let nested = |k: usize| -> serde_json::Value {
            match &self.cells[k] {
                Cell::Value(_) => serde_json::Value::Array(
                    self.spec
                        .observables
                        .iter()
                        .map(|&o| json_num(self.cells[k].get(o).unwrap_or(f64::NAN)))
                        .collect(),
                ),
                Cell::Flagged { .. } => serde_json::Value::Null,
            }
        };
        let (n, m) = self.shape();
        let values: Vec<serde_json::Value> = if self.axis2_values.is_empty() {
            (0..n).map(nested).collect()
        } else {
            (0..n).map(|i| serde_json::Value::Array((0..m).map(|j| nested(i * m + j)).collect())).collect()
        };
        let mut axes = vec![serde_json::json!({ "key": self.spec.axis1.key, "values": self.axis1_values })];
        if let Some(a2) = &self.spec.axis2 {
            axes.push(serde_json::json!({ "key": a2.key, "values": self.axis2_values }));
        }
        let flags: Vec<serde_json::Value> = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| match c {
                Cell::Flagged { reason, singular } => {
                    Some(serde_json::json!({ "index": [k / m, k % m], "reason": reason, "singular": singular }))
                }
                Cell::Value(_) => None,
            })
            .collect();
        let mut doc = serde_json::json!({
            "solver": self.spec.solver,
            "params": self.base,
            "axes": axes,
            "observables": self.spec.observables,
            "values": values,
            "flags": flags,
        });
        if let Some(ts) = timestamp {
            doc["generated_at"] = serde_json::Value::String(ts.to_string());
        }
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Config(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(e.to_string())
}

/// Shortest round-trip decimal form, `NaN` for missing values.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

fn json_num(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

fn cell_params(spec: &SweepSpec, base: &SystemParams, v1: f64, v2: Option<f64>) -> Result<SystemParams> {
    let mut p = *base;
    p.set(&spec.axis1.key, v1)?;
    if let (Some(a2), Some(v2)) = (&spec.axis2, v2) {
        p.set(&a2.key, v2)?;
    }
    Ok(p)
}

fn eval_cell(spec: &SweepSpec, base: &SystemParams, v1: f64, v2: Option<f64>) -> Cell {
    let result = cell_params(spec, base, v1, v2).and_then(|p| {
        if spec.wants_eta() {
            evaluate_with_eta(&p, spec.solver, &spec.oracle)
        } else {
            evaluate(&p, spec.solver, &spec.oracle)
        }
    });
    match result {
        Ok(v) => Cell::Value(v),
        Err(e) => Cell::Flagged { singular: e.is_singularity(), reason: e.to_string() },
    }
}

fn grid_points(spec: &SweepSpec) -> (Vec<f64>, Vec<f64>, Vec<(f64, Option<f64>)>) {
    let a1 = spec.axis1.values();
    let a2 = spec.axis2.as_ref().map(Axis::values).unwrap_or_default();
    let points = a1
        .iter()
        .flat_map(|&x| {
            if a2.is_empty() {
                vec![(x, None)]
            } else {
                a2.iter().map(|&y| (x, Some(y))).collect()
            }
        })
        .collect();
    (a1, a2, points)
}

fn check_base(spec: &SweepSpec, base: &SystemParams) -> Result<()> {
    spec.validate()?;
    base.validate()?;
    // every cell must be assignable, even if its physics later fails
    let (a1, a2, _) = grid_points(spec);
    for &x in [a1.first(), a1.last()].iter().flatten() {
        cell_params(spec, base, *x, a2.first().copied())?.validate()?;
        cell_params(spec, base, *x, a2.last().copied())?.validate()?;
    }
    Ok(())
}

/// Evaluates the grid in parallel. Point failures become flagged cells.
pub fn sweep(spec: &SweepSpec, base: &SystemParams) -> Result<SweepGrid> {
    check_base(spec, base)?;
    let (a1, a2, points) = grid_points(spec);
    let cells = points.par_iter().map(|&(x, y)| eval_cell(spec, base, x, y)).collect();
    Ok(SweepGrid { spec: spec.clone(), base: *base, axis1_values: a1, axis2_values: a2, cells })
}

/// Single-threaded reference for [`sweep`].
pub fn sweep_serial(spec: &SweepSpec, base: &SystemParams) -> Result<SweepGrid> {
    check_base(spec, base)?;
    let (a1, a2, points) = grid_points(spec);
    let cells = points.iter().map(|&(x, y)| eval_cell(spec, base, x, y)).collect();
    Ok(SweepGrid { spec: spec.clone(), base: *base, axis1_values: a1, axis2_values: a2, cells })
}

/// Drives rescaled so the larger one equals `amplitude`.
pub fn at_drive(p: &SystemParams, amplitude: f64) -> SystemParams {
    let top = p.omega_0.max(p.omega_c);
    if top == 0.0 {
        return *p;
    }
    SystemParams { omega_0: p.omega_0 * amplitude / top, omega_c: p.omega_c * amplitude / top, ..*p }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotCheck {
    pub checked: usize,
    pub skipped: usize,
    pub max_rel_dev: f64,
    pub worst_index: Option<usize>,
}

/// Compares wavefunction and oracle g2 at [`CHECK_DRIVE`] on a random
/// `fraction` of the grid cells (at least one).
pub fn spot_check(grid: &SweepGrid, fraction: f64, seed: u64) -> Result<SpotCheck> {
    let total = grid.cells.len();
    let count = ((total as f64 * fraction).ceil() as usize).clamp(1, total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample(&mut rng, total, count).into_vec();
    picks.sort_unstable();
    let (_, m) = grid.shape();
    let devs: Vec<(usize, Option<f64>)> = picks
        .par_iter()
        .map(|&k| {
            let dev = grid.params_at(k / m, k % m).ok().and_then(|p| {
                let p = at_drive(&p, CHECK_DRIVE);
                let wf = wavefunction::observables(&p).ok()?;
                let or = lindblad::observables(&p, &grid.spec.oracle).ok()?;
                Some((wf.g2 - or.g2).abs() / or.g2)
            });
            (k, dev)
        })
        .collect();
    let mut report = SpotCheck { checked: 0, skipped: 0, max_rel_dev: 0.0, worst_index: None };
    for (k, dev) in devs {
        match dev {
            Some(d) => {
                report.checked += 1;
                if d > report.max_rel_dev || report.worst_index.is_none() {
                    report.max_rel_dev = report.max_rel_dev.max(d);
                    report.worst_index = Some(k);
                }
            }
            None => report.skipped += 1,
        }
    }
    Ok(report)
}

/// Eigenvalues (lambda+, lambda-) of the single-excitation block
/// [[delta_c, g_F], [g_F, delta_0]].
pub fn single_excitation_eigenvalues(d: &DerivedQuantities) -> [Complex64; 2] {
    let mean = (d.delta_0 + d.delta_c) * 0.5;
    let half = (d.delta_0 - d.delta_c) * 0.5;
    let root = (half * half + d.g_f * d.g_f).sqrt();
    [mean + root, mean - root]
}

fn min_decay(p: &SystemParams, delta_0c: f64) -> f64 {
    let q = SystemParams { delta_0c, ..*p };
    match q.derive() {
        Ok(d) => {
            let [a, b] = single_excitation_eigenvalues(&d);
            a.im.abs().min(b.im.abs())
        }
        Err(_) => f64::NAN,
    }
}

/// Golden-section minimum of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= f64::EPSILON * (a.abs() + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)].into_iter().fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Coarse grid then golden refinement; returns (x, f(x), hit_boundary).
pub fn grid_golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize, tol: f64) -> (f64, f64, bool) {
    let xs = linspace(lo, hi, points);
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let k = argmin(&ys);
    let boundary = k == 0 || k == xs.len() - 1;
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    let (x, fx) = golden_min(&mut f, a, b, tol);
    if ys[k] < fx {
        (xs[k], ys[k], boundary)
    } else {
        (x, fx, boundary)
    }
}

fn argmin(ys: &[f64]) -> usize {
    let mut k = 0;
    for (i, &y) in ys.iter().enumerate() {
        if y < ys[k] || ys[k].is_nan() {
            k = i;
        }
    }
    k
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisValue {
    pub key: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalExtremum {
    pub location: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremumReport {
    pub location: Vec<AxisValue>,
    pub value: f64,
    pub kind: ExtremumKind,
    pub all_local_minima: Vec<LocalExtremum>,
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BicReport {
    pub extremum: ExtremumReport,
    /// Numeric optimum of the atom-cavity detuning.
    pub delta_0c: f64,
    /// Smallest |Im lambda| there.
    pub min_decay: f64,
    pub predicted: analytic::BicPrediction,
}

/// Default search window for [`locate_bic`], centred on the prediction.
pub fn default_bic_range(p: &SystemParams) -> Result<(f64, f64)> {
    let d = p.derive()?;
    let pred = analytic::bic_conditions(p, &d)?;
    let half = pred.delta_0c.abs() + p.g + d.kappa + d.gamma;
    Ok((pred.delta_0c - half, pred.delta_0c + half))
}

/// Atom-cavity detuning that minimizes the smaller single-excitation decay
/// rate, next to its closed-form prediction.
pub fn locate_bic(p: &SystemParams, range: Option<(f64, f64)>) -> Result<BicReport> {
    let d = p.derive()?;
    let predicted = analytic::bic_conditions(p, &d)?;
    let (lo, hi) = match range {
        Some(r) => r,
        None => default_bic_range(p)?,
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad search range [{lo}, {hi}]")));
    }
    let (x, fx, boundary) = grid_golden_min(|x| min_decay(p, x), lo, hi, COARSE_POINTS, BIC_TOL * p.gamma0);
    Ok(BicReport {
        extremum: ExtremumReport {
            location: vec![AxisValue { key: "delta_0c".into(), value: x }],
            value: fx,
            kind: ExtremumKind::Minimum,
            all_local_minima: vec![LocalExtremum { location: x, value: fx }],
            boundary,
        },
        delta_0c: x,
        min_decay: fx,
        predicted,
    })
}

/// Laser detunings (delta_0L) of the one- and two-photon resonances of the
/// effective Hamiltonian, with their half-widths.
pub fn laser_resonances(p: &SystemParams) -> Result<Vec<(f64, f64)>> {
    let d = SystemParams { delta_0l: 0.0, ..*p }.derive()?;
    let one = single_excitation_eigenvalues(&d);
    let mut out: Vec<(f64, f64)> = one.iter().map(|l| (-l.re, l.im.abs())).collect();
    let sq2 = std::f64::consts::SQRT_2;
    let a = d.delta_c * 2.0;
    let b = d.delta_c + d.delta_0;
    let off = d.g_f * sq2;
    let mean = (a + b) * 0.5;
    let half = (a - b) * 0.5;
    let root = (half * half + off * off).sqrt();
    for nu in [mean + root, mean - root] {
        out.push((-nu.re / 2.0, nu.im.abs() / 2.0));
    }
    Ok(out)
}

/// Detuning axes along which g2 extrema can be located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DetuningAxis {
    /// Laser measured from the atom.
    Delta0L,
    /// Laser measured from the cavity at fixed atom-cavity detuning.
    DeltaCL,
    /// Atom-cavity detuning at fixed atom-laser detuning.
    Delta0C,
}

impl DetuningAxis {
    pub fn key(self) -> &'static str {
        match self {
            DetuningAxis::Delta0L => "delta_0L",
            DetuningAxis::DeltaCL => "delta_cL",
            DetuningAxis::Delta0C => "delta_0c",
        }
    }

    pub fn apply(self, p: &SystemParams, x: f64) -> SystemParams {
        match self {
            DetuningAxis::Delta0L => SystemParams { delta_0l: x, ..*p },
            DetuningAxis::DeltaCL => p.with_delta_cl(x),
            DetuningAxis::Delta0C => SystemParams { delta_0c: x, ..*p },
        }
    }

    /// Position on this axis of the conventional (Fano-maximum) dip.
    pub fn conventional_position(self, p: &SystemParams) -> Option<f64> {
        let d = p.derive().ok()?;
        let pred = analytic::bic_conditions(p, &d).ok()?;
        Some(match self {
            DetuningAxis::Delta0L => p.delta_0c + pred.delta_cl,
            DetuningAxis::DeltaCL => pred.delta_cl,
            DetuningAxis::Delta0C => pred.delta_0c,
        })
    }

    /// Laser-axis resonance positions translated onto this axis.
    fn resonances(self, p: &SystemParams) -> Vec<(f64, f64)> {
        let shift = match self {
            DetuningAxis::Delta0L => 0.0,
            DetuningAxis::DeltaCL => -p.delta_0c,
            DetuningAxis::Delta0C => return Vec::new(),
        };
        laser_resonances(p).map(|v| v.into_iter().map(|(x, w)| (x + shift, w)).collect()).unwrap_or_default()
    }
}

impl std::str::FromStr for DetuningAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta_0L" | "delta_0l" => Ok(DetuningAxis::Delta0L),
            "delta_cL" | "delta_cl" => Ok(DetuningAxis::DeltaCL),
            "delta_0c" => Ok(DetuningAxis::Delta0C),
            other => Err(Error::InvalidParameter(format!("`{other}` is not a detuning axis"))),
        }
    }
}

/// Default window on `axis`: wide enough to hold every resonance.
pub fn default_axis_range(p: &SystemParams, axis: DetuningAxis) -> Result<(f64, f64)> {
    let d = p.derive()?;
    let centre = axis.conventional_position(p).unwrap_or(match axis {
        DetuningAxis::Delta0L => p.delta_0c / 2.0,
        DetuningAxis::DeltaCL => -p.delta_0c / 2.0,
        DetuningAxis::Delta0C => 0.0,
    });
    let half = p.delta_0c.abs() + 2.0 * p.g + 2.0 * (d.kappa + d.gamma);
    Ok((centre - half, centre + half))
}

/// Uniform samples plus dense windows around every resonance in range.
pub fn sample_axis(p: &SystemParams, axis: DetuningAxis, lo: f64, hi: f64) -> Vec<f64> {
    let mut xs = linspace(lo, hi, UNIFORM_SAMPLES);
    let mut centres = axis.resonances(p);
    if let Some(c) = axis.conventional_position(p) {
        centres.push((c, p.gamma0 * 1e-3));
    }
    for (x0, w) in centres {
        let w = w.max(1e-9 * (1.0 + x0.abs()));
        let half = WINDOW_HALF_WIDTHS * w;
        if x0 + half < lo || x0 - half > hi {
            continue;
        }
        xs.extend(linspace(x0 - half, x0 + half, WINDOW_SAMPLES).into_iter().filter(|x| (lo..=hi).contains(x)));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Weak-drive g2 from the amplitude route, NaN at singular points.
pub fn weak_g2(p: &SystemParams) -> f64 {
    wavefunction::observables(p).map(|o| o.g2).unwrap_or(f64::NAN)
}

/// Weak-drive enhancement, NaN at singular points.
pub fn weak_eta(p: &SystemParams) -> f64 {
    weak_g2(&p.with_fano(false)) / weak_g2(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dip {
    pub location: f64,
    pub g2: f64,
    pub g2_fano_off: f64,
    pub eta: f64,
    pub conventional: bool,
    /// Oracle g2 at the dip, when requested.
    pub oracle_g2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct G2Extrema {
    pub axis: DetuningAxis,
    pub range: (f64, f64),
    pub minimum: Option<ExtremumReport>,
    pub dips: Vec<Dip>,
    pub maxima: Vec<LocalExtremum>,
    /// Predicted position of the conventional dip on this axis.
    pub conventional_prediction: Option<f64>,
    pub classification_width: f64,
}

impl G2Extrema {
    pub fn conventional(&self) -> Option<&Dip> {
        let c = self.conventional_prediction?;
        self.dips
            .iter()
            .filter(|d| d.conventional)
            .min_by(|a, b| (a.location - c).abs().total_cmp(&(b.location - c).abs()))
    }

    pub fn unconventional(&self) -> impl Iterator<Item = &Dip> {
        self.dips.iter().filter(|d| !d.conventional)
    }

    pub fn global_minimum(&self) -> Option<&Dip> {
        self.dips.iter().min_by(|a, b| a.g2.total_cmp(&b.g2))
    }
}

fn refine<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> (f64, f64) {
    let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
    golden_min(&mut f, a, b, tol)
}

/// Interior local extrema of `f` on the sorted sample `xs`, each refined by
/// golden section inside its bracketing samples.
fn local_extrema<F: Fn(f64) -> f64>(f: F, xs: &[f64]) -> (Vec<LocalExtremum>, Vec<LocalExtremum>) {
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for k in 1..xs.len().saturating_sub(1) {
        let (l, c, r) = (ys[k - 1], ys[k], ys[k + 1]);
        if !(l.is_finite() && c.is_finite() && r.is_finite()) {
            continue;
        }
        // relative flatness guard so rounding noise on flat curves is ignored
        let scale = 1e-12 * c.abs().max(f64::MIN_POSITIVE);
        if c < l - scale && c <= r - scale || c <= l - scale && c < r - scale {
            let (x, y) = refine(&f, xs[k - 1], xs[k + 1]);
            let (x, y) = if y <= c { (x, y) } else { (xs[k], c) };
            minima.push(LocalExtremum { location: x, value: y });
        } else if c > l + scale && c >= r + scale || c >= l + scale && c > r + scale {
            let (x, y) = refine(|x| -f(x), xs[k - 1], xs[k + 1]);
            let (x, y) = if -y >= c { (x, -y) } else { (xs[k], c) };
            maxima.push(LocalExtremum { location: x, value: y });
        }
    }
    (minima, maxima)
}

/// All interior g2 dips and peaks along a detuning axis, dips classified as
/// conventional or unconventional by distance to the predicted Fano maximum.
pub fn locate_g2_extrema(
    p: &SystemParams,
    axis: DetuningAxis,
    range: Option<(f64, f64)>,
    oracle: Option<&OracleConfig>,
) -> Result<G2Extrema> {
    p.validate()?;
    p.require_drive()?;
    let (lo, hi) = match range {
        Some(r) => r,
        None => default_axis_range(p, axis)?,
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad scan range [{lo}, {hi}]")));
    }
    let xs = sample_axis(p, axis, lo, hi);
    let (minima, maxima) = local_extrema(|x| weak_g2(&axis.apply(p, x)), &xs);
    let prediction = axis.conventional_position(p);
    let width = CONVENTIONAL_WIDTHS * (p.gamma0 + p.gamma_n) / 2.0;
    let dips: Vec<Dip> = minima
        .iter()
        .map(|m| {
            let at = axis.apply(p, m.location);
            let off = weak_g2(&at.with_fano(false));
            Dip {
                location: m.location,
                g2: m.value,
                g2_fano_off: off,
                eta: off / m.value,
                conventional: prediction.is_some_and(|c| (m.location - c).abs() <= width),
                oracle_g2: oracle.and_then(|cfg| lindblad::observables(&at, cfg).ok().map(|o| o.g2)),
            }
        })
        .collect();
    let minimum = dips.iter().min_by(|a, b| a.g2.total_cmp(&b.g2)).map(|best| ExtremumReport {
        location: vec![AxisValue { key: axis.key().into(), value: best.location }],
        value: best.g2,
        kind: ExtremumKind::Minimum,
        all_local_minima: minima.clone(),
        boundary: false,
    });
    Ok(G2Extrema {
        axis,
        range: (lo, hi),
        minimum,
        dips,
        maxima,
        conventional_prediction: prediction,
        classification_width: width,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaOptimum {
    pub eta: f64,
    pub delta_0c: f64,
    pub delta_cl: f64,
    pub boundary: bool,
}

/// Minimum of `f(delta_cL)` along the laser axis at fixed atom-cavity
/// detuning, as (delta_cL, value).
pub fn minimize_along_laser<F: Fn(&SystemParams) -> f64>(p: &SystemParams, f: F) -> Result<(f64, f64)> {
    let (lo, hi) = default_axis_range(p, DetuningAxis::DeltaCL)?;
    let xs = sample_axis(p, DetuningAxis::DeltaCL, lo, hi);
    let g = |x: f64| f(&p.with_delta_cl(x));
    let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let k = argmin(&ys);
    if !ys[k].is_finite() {
        return Err(Error::Singular { what: "laser scan", modulus: 0.0 });
    }
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    let (x, y) = refine(g, a, b);
    Ok(if y < ys[k] { (x, y) } else { (xs[k], ys[k]) })
}

/// Largest weak-drive enhancement along the laser axis at fixed atom-cavity
/// detuning, as (delta_cL, eta).
pub fn max_eta_along_laser(p: &SystemParams) -> Result<(f64, f64)> {
    minimize_along_laser(p, |q| -weak_eta(q)).map(|(x, y)| (x, -y))
}

/// Smallest weak-drive g2 along the laser axis, as (delta_cL, g2).
pub fn min_g2_along_laser(p: &SystemParams) -> Result<(f64, f64)> {
    minimize_along_laser(p, weak_g2)
}

fn outer_window(p: &SystemParams) -> Result<(f64, f64)> {
    let d = p.derive()?;
    let centre = if d.q_defined() { locate_bic(p, None)?.delta_0c } else { 0.0 };
    let half = (0.5 * centre.abs()).max(2.0 * (d.kappa + d.gamma)).max(p.g);
    Ok((centre - half, centre + half))
}

fn maximize_outer<F: Fn(f64) -> f64 + Sync>(p: &SystemParams, range: Option<(f64, f64)>, profile: F) -> Result<(f64, f64, bool)> {
    let (lo, hi) = match range {
        Some(r) => r,
        None => outer_window(p)?,
    };
    let xs = linspace(lo, hi, 61);
    let ys: Vec<f64> = xs.par_iter().map(|&x| -profile(x)).collect();
    let k = argmin(&ys);
    if !ys[k].is_finite() {
        return Err(Error::Singular { what: "enhancement profile", modulus: 0.0 });
    }
    let boundary = k == 0 || k == xs.len() - 1;
    let (x, y) = golden_min(|x| -profile(x), xs[k.saturating_sub(1)], xs[(k + 1).min(xs.len() - 1)], 1e-6 * (1.0 + xs[k].abs()));
    Ok(if y < ys[k] { (x, -y, boundary) } else { (xs[k], -ys[k], boundary) })
}

/// Numerical maximum of the weak-drive enhancement over both detunings.
pub fn maximize_eta(p: &SystemParams, delta_0c_range: Option<(f64, f64)>) -> Result<EtaOptimum> {
    p.validate()?;
    p.require_drive()?;
    let profile = |x: f64| max_eta_along_laser(&SystemParams { delta_0c: x, ..*p }).map(|r| r.1).unwrap_or(f64::NAN);
    let (x, eta, boundary) = maximize_outer(p, delta_0c_range, profile)?;
    let (dcl, _) = max_eta_along_laser(&SystemParams { delta_0c: x, ..*p })?;
    Ok(EtaOptimum { eta, delta_0c: x, delta_cl: dcl, boundary })
}

/// Enhancement at the conventional g2 dip, maximized over the atom-cavity
/// detuning.
pub fn maximize_conventional_eta(p: &SystemParams, delta_0c_range: Option<(f64, f64)>) -> Result<EtaOptimum> {
    p.validate()?;
    p.require_drive()?;
    let at = |x: f64| -> Option<Dip> {
        let q = SystemParams { delta_0c: x, ..*p };
        locate_g2_extrema(&q, DetuningAxis::DeltaCL, None, None).ok()?.conventional().copied()
    };
    let (x, eta, boundary) = maximize_outer(p, delta_0c_range, |x| at(x).map(|d| d.eta).unwrap_or(f64::NAN))?;
    let dip = at(x).ok_or(Error::Singular { what: "conventional dip", modulus: 0.0 })?;
    Ok(EtaOptimum { eta, delta_0c: x, delta_cl: dip.location, boundary })
}
