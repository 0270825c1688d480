//! Full master-equation steady state on atom (x) truncated Fock space.
//!
//! Interference through the common continuum is carried by the collective
//! jump operator `J = sqrt(kappa0) c + sqrt(gamma0) sigma_-`. Its dissipator
//! is assembled in expanded form,
//!
//! ```text
//! D[J] = kappa0 D[c] + gamma0 D[s] + sqrt(kappa0 gamma0) X[c, s]
//! X[a, b] rho = a rho b+ + b rho a+ - 1/2 {a+ b + b+ a, rho}
//! ```
//!
//! so that removing the interference only drops the `X` term.
//!
//! Density matrices are vectorized row-major: `v[i * d + j] = rho[i][j]`,
//! for which `vec(A rho B) = (A (x) B^T) vec(rho)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{ObservableSet, SolverKind};
use crate::params::SystemParams;

/// Default cap on the superoperator dimension 4 (n_max + 1)^2.
pub const DEFAULT_MAX_DIM: usize = 2500;
/// Starting cutoff for strongly populated (near-BIC) points.
pub const NEAR_BIC_START: usize = 10;
/// Weak-drive intensity above which a point counts as strongly populated.
pub const NEAR_BIC_INTENSITY: f64 = 1e-2;
/// Solves with a residual above this are rejected.
pub const RESIDUAL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    pub n_max: usize,
    pub auto_converge: bool,
    pub rel_tol: f64,
    pub max_dim: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n_max: 6, auto_converge: false, rel_tol: 1e-6, max_dim: DEFAULT_MAX_DIM }
    }
}

impl OracleConfig {
    pub fn auto() -> Self {
        Self { auto_converge: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidParameter(format!("n_max = {} must be >= 2", self.n_max)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be > 0".into()));
        }
        Ok(())
    }

    /// Forces auto-convergence from [`NEAR_BIC_START`] photons when the weak-drive
    /// intensity estimate says the cavity is strongly populated.
    pub fn adapted_to(&self, p: &SystemParams) -> Self {
        let strong = match p.derive().and_then(|d| crate::analytic::intensity_analytic(&d, p)) {
            Ok(n) => n >= NEAR_BIC_INTENSITY,
            Err(_) => true,
        };
        if strong {
            Self { auto_converge: true, n_max: self.n_max.max(NEAR_BIC_START), ..*self }
        } else {
            *self
        }
    }
}

/// Sparse operator on the Hilbert space as (row, col, value) triples.
#[derive(Clone, Debug, Default)]
struct SparseOp {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn push(&mut self, r: usize, c: usize, v: Complex64) {
        if v != ZERO {
            self.entries.push((r, c, v));
        }
    }

    fn adjoint(&self) -> SparseOp {
        SparseOp { entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect() }
    }

    fn to_dense(&self, d: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(d, d);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    fn from_dense(m: &DMatrix<Complex64>) -> SparseOp {
        let mut s = SparseOp::default();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                s.push(r, c, m[(r, c)]);
            }
        }
        s
    }
}

/// Operators of the atom (x) Fock space, basis index `atom * (n_max + 1) + n`
/// with atom 0 the ground state.
#[derive(Clone, Debug)]
pub struct Space {
    pub n_max: usize,
}

impl Space {
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn index(&self, excited: bool, n: usize) -> usize {
        usize::from(excited) * (self.n_max + 1) + n
    }

    fn annihilation(&self) -> SparseOp {
        let mut op = SparseOp::default();
        for atom in [false, true] {
            for n in 1..=self.n_max {
                op.push(self.index(atom, n - 1), self.index(atom, n), Complex64::from((n as f64).sqrt()));
            }
        }
        op
    }

    fn lowering(&self) -> SparseOp {
        let mut op = SparseOp::default();
        for n in 0..=self.n_max {
            op.push(self.index(false, n), self.index(true, n), ONE);
        }
        op
    }

    pub fn cavity(&self) -> DMatrix<Complex64> {
        self.annihilation().to_dense(self.dim())
    }

    pub fn sigma_minus(&self) -> DMatrix<Complex64> {
        self.lowering().to_dense(self.dim())
    }

    /// H = D_cL c+c + D_0L s+s + g (c+ s + s+ c) + W0 (s + s+) + Wc (c + c+).
    pub fn hamiltonian(&self, p: &SystemParams) -> DMatrix<Complex64> {
        let c = self.cavity();
        let s = self.sigma_minus();
        let cd = c.adjoint();
        let sd = s.adjoint();
        let r = |x: f64| Complex64::from(x);
        &cd * &c * r(p.delta_cl())
            + &sd * &s * r(p.delta_0l)
            + (&cd * &s + &sd * &c) * r(p.g)
            + (&s + &sd) * r(p.omega_0)
            + (&c + &cd) * r(p.omega_c)
    }
}

/// Superoperator in the row-major vectorization.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub matrix: DMatrix<Complex64>,
    pub space: Space,
    /// Coefficient of the c / sigma_- cross dissipator, sqrt(kappa0 gamma0) or 0.
    pub cross_coefficient: f64,
    /// Expected amplitude ratio between neighbouring excitation manifolds,
    /// used to balance the linear solve.
    pub excitation_scale: f64,
}

/// Scaling of manifolds stops at this excitation number.
const SCALE_DEPTH: usize = 4;

/// Linear-response amplitude of the one-excitation manifold, clamped to
/// [1e-6, 1]; 1 when the response is singular.
fn excitation_scale(p: &SystemParams, cross: f64) -> f64 {
    let dc = Complex64::new(p.delta_cl(), -(p.kappa0 + p.kappa_n) / 2.0);
    let d0 = Complex64::new(p.delta_0l, -(p.gamma0 + p.gamma_n) / 2.0);
    let gf = Complex64::new(p.g, -cross / 2.0);
    let det = dc * d0 - gf * gf;
    if det.norm() == 0.0 {
        return 1.0;
    }
    let x = (d0 * p.omega_c - gf * p.omega_0) / det;
    let y = (dc * p.omega_0 - gf * p.omega_c) / det;
    let a = x.norm().max(y.norm());
    if a.is_finite() {
        a.clamp(1e-6, 1.0)
    } else {
        1.0
    }
}

struct Builder {
    d: usize,
    m: DMatrix<Complex64>,
}

impl Builder {
    /// += coef * A rho B
    fn sandwich(&mut self, a: &SparseOp, b: &SparseOp, coef: Complex64) {
        let d = self.d;
        for &(i, k, av) in &a.entries {
            for &(l, j, bv) in &b.entries {
                self.m[(i * d + j, k * d + l)] += coef * av * bv;
            }
        }
    }

    /// += coef * A rho
    fn left(&mut self, a: &SparseOp, coef: Complex64) {
        let d = self.d;
        for &(i, k, av) in &a.entries {
            for j in 0..d {
                self.m[(i * d + j, k * d + j)] += coef * av;
            }
        }
    }

    /// += coef * rho B
    fn right(&mut self, b: &SparseOp, coef: Complex64) {
        let d = self.d;
        for &(l, j, bv) in &b.entries {
            for i in 0..d {
                self.m[(i * d + j, i * d + l)] += coef * bv;
            }
        }
    }

    /// rate * (X rho X+ - 1/2 {X+X, rho})
    fn dissipator(&mut self, x: &SparseOp, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let xd = x.adjoint();
        let xdx = SparseOp::from_dense(&(xd.to_dense(self.d) * x.to_dense(self.d)));
        let r = Complex64::from(rate);
        self.sandwich(x, &xd, r);
        self.left(&xdx, -0.5 * r);
        self.right(&xdx, -0.5 * r);
    }

    /// rate * (A rho B+ + B rho A+ - 1/2 {A+B + B+A, rho})
    fn cross(&mut self, a: &SparseOp, b: &SparseOp, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let (ad, bd) = (a.adjoint(), b.adjoint());
        let sym = ad.to_dense(self.d) * b.to_dense(self.d) + bd.to_dense(self.d) * a.to_dense(self.d);
        let sym = SparseOp::from_dense(&sym);
        let r = Complex64::from(rate);
        self.sandwich(a, &bd, r);
        self.sandwich(b, &ad, r);
        self.left(&sym, -0.5 * r);
        self.right(&sym, -0.5 * r);
    }
}

pub fn build_liouvillian(p: &SystemParams, cfg: &OracleConfig) -> Result<Liouvillian> {
    p.validate()?;
    cfg.validate()?;
    let space = Space { n_max: cfg.n_max };
    let d = space.dim();
    let dim = d * d;
    if dim > cfg.max_dim {
        return Err(Error::DimensionOverflow { dim, cap: cfg.max_dim });
    }
    let h = SparseOp::from_dense(&space.hamiltonian(p));
    let identity = {
        let mut op = SparseOp::default();
        (0..d).for_each(|k| op.push(k, k, ONE));
        op
    };
    let c = space.annihilation();
    let s = space.lowering();
    let cross_coefficient = if p.fano_enabled { (p.kappa0 * p.gamma0).sqrt() } else { 0.0 };

    let mut b = Builder { d, m: DMatrix::zeros(dim, dim) };
    // -i [H, rho]
    b.sandwich(&h, &identity, -I);
    b.sandwich(&identity, &h, I);
    b.dissipator(&c, p.kappa0);
    b.dissipator(&s, p.gamma0);
    b.cross(&c, &s, cross_coefficient);
    b.dissipator(&c, p.kappa_n);
    b.dissipator(&s, p.gamma_n);

    let excitation_scale = excitation_scale(p, cross_coefficient);
    Ok(Liouvillian { matrix: b.m, space, cross_coefficient, excitation_scale })
}

impl Liouvillian {
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.space.dim();
        let v = DVector::from_iterator(d * d, (0..d * d).map(|k| rho[(k / d, k % d)]));
        let out = &self.matrix * v;
        DMatrix::from_fn(d, d, |i, j| out[i * d + j])
    }

    /// Column sums of the trace functional; zero iff the map is trace preserving.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        (0..d * d)
            .map(|col| (0..d).map(|i| self.matrix[(i * d + i, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DMatrix<Complex64>,
    pub residual: f64,
    pub n_max: usize,
}

/// Solves L rho = 0 with the rho_00 equation replaced by tr rho = 1.
///
/// The system is solved for `rho~ = T^-1 rho` with `T` diagonal, scaling the
/// element (i, j) by `s^(k_i + k_j)` where `k` is the excitation number, so
/// that the O(Omega^4) two-photon populations are resolved to full relative
/// precision instead of being swamped by rounding of the O(1) ground state.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let d = l.space.dim();
    let nb = l.space.n_max + 1;
    let s: Vec<f64> = (0..d).map(|i| l.excitation_scale.powi(((i / nb) + (i % nb)).min(SCALE_DEPTH) as i32)).collect();
    let t = |k: usize| s[k / d] * s[k % d];
    let mut a = DMatrix::from_fn(d * d, d * d, |r, c| l.matrix[(r, c)] * (t(c) / t(r)));
    for col in 0..d * d {
        a[(0, col)] = ZERO;
    }
    for i in 0..d {
        a[(0, i * d + i)] = Complex64::from(t(i * d + i));
    }
    let mut rhs = DVector::zeros(d * d);
    rhs[0] = ONE;
    let scaled = a.lu().solve(&rhs).ok_or(Error::RankDeficient { residual: f64::INFINITY })?;
    let sol = DVector::from_fn(d * d, |k, _| scaled[k] * t(k));
    let rho = DMatrix::from_fn(d, d, |i, j| sol[i * d + j]);
    let residual = (&l.matrix * &sol).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(residual < RESIDUAL_TOL) || sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::RankDeficient { residual });
    }
    Ok(SteadyState { rho, residual, n_max: l.space.n_max })
}

impl SteadyState {
    fn space(&self) -> Space {
        Space { n_max: self.n_max }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Population of the highest retained Fock level (both atom states).
    pub fn top_fock_population(&self) -> f64 {
        let sp = self.space();
        [false, true]
            .iter()
            .map(|&a| self.rho[(sp.index(a, sp.n_max), sp.index(a, sp.n_max))].re)
            .sum()
    }

    pub fn observables(&self) -> Result<ObservableSet> {
        let sp = self.space();
        let mut n = 0.0;
        let mut corr = 0.0;
        let mut a = ZERO;
        let mut a2 = ZERO;
        for atom in [false, true] {
            for m in 0..=sp.n_max {
                let mf = m as f64;
                let diag = self.rho[(sp.index(atom, m), sp.index(atom, m))].re;
                n += mf * diag;
                corr += mf * (mf - 1.0) * diag;
                if m >= 1 {
                    a += self.rho[(sp.index(atom, m), sp.index(atom, m - 1))] * mf.sqrt();
                }
                if m >= 2 {
                    a2 += self.rho[(sp.index(atom, m), sp.index(atom, m - 2))] * (mf * (mf - 1.0)).sqrt();
                }
            }
        }
        ObservableSet::from_moments(n, a, a2, corr, SolverKind::Oracle)
    }

    /// Debug text dump: a header line, then one line per row of `rho` with
    /// space-separated `re,im` pairs.
    pub fn to_text(&self) -> String {
        let d = self.rho.nrows();
        let mut out = format!("# n_max {} dim {}\n", self.n_max, d);
        for i in 0..d {
            let row: Vec<String> = (0..d)
                .map(|j| {
                    let z = self.rho[(i, j)];
                    format!("{:e},{:e}", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn matrix_from_text(text: &str) -> Result<DMatrix<Complex64>> {
        let bad = |what: &str| Error::Config(format!("malformed matrix text: {what}"));
        let rows: Vec<Vec<Complex64>> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|pair| {
                        let (re, im) = pair.split_once(',').ok_or_else(|| bad("missing comma"))?;
                        Ok(Complex64::new(
                            re.parse().map_err(|_| bad(re))?,
                            im.parse().map_err(|_| bad(im))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(bad("not square"));
        }
        Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffStep {
    pub n_max: usize,
    pub n_c: f64,
    pub g2: f64,
}

#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub state: SteadyState,
    pub observables: ObservableSet,
    pub history: Vec<CutoffStep>,
}

fn solve_at(p: &SystemParams, cfg: &OracleConfig) -> Result<(SteadyState, ObservableSet)> {
    let l = build_liouvillian(p, cfg)?;
    let state = steady_state(&l)?;
    let obs = state.observables()?;
    Ok((state, obs))
}

fn rel_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Steady state at `cfg.n_max`, or, with auto-convergence, the first cutoff
/// N + 2 whose g2 and n_c differ from those at N by less than `rel_tol`.
pub fn solve(p: &SystemParams, cfg: &OracleConfig) -> Result<OracleSolution> {
    p.require_drive()?;
    let (state, obs) = solve_at(p, cfg)?;
    let mut history = vec![CutoffStep { n_max: cfg.n_max, n_c: obs.n_c, g2: obs.g2 }];
    if !cfg.auto_converge {
        return Ok(OracleSolution { state, observables: obs, history });
    }
    let mut prev = obs;
    let mut n_max = cfg.n_max;
    loop {
        let next_cfg = OracleConfig { n_max: n_max + 2, ..*cfg };
        let (state, obs) = match solve_at(p, &next_cfg) {
            Err(Error::DimensionOverflow { .. }) => {
                let last = history.last().expect("at least one step");
                let change = history
                    .iter()
                    .rev()
                    .nth(1)
                    .map(|s| rel_change(s.g2, last.g2).max(rel_change(s.n_c, last.n_c)))
                    .unwrap_or(f64::INFINITY);
                return Err(Error::NotConverged { n_max, last_change: change });
            }
            other => other?,
        };
        history.push(CutoffStep { n_max: n_max + 2, n_c: obs.n_c, g2: obs.g2 });
        let change = rel_change(prev.g2, obs.g2).max(rel_change(prev.n_c, obs.n_c));
        if change < cfg.rel_tol {
            return Ok(OracleSolution { state, observables: obs, history });
        }
        prev = obs;
        n_max += 2;
    }
}

/// Oracle observables at `p`, adapting the cutoff to strongly populated points.
pub fn observables(p: &SystemParams, cfg: &OracleConfig) -> Result<ObservableSet> {
    Ok(solve(p, &cfg.adapted_to(p))?.observables)
}
