//! Weak-drive steady state of the non-Hermitian effective Hamiltonian,
//! truncated at two excitations.
//!
//! With the ground amplitude pinned to one, the stationary Schrodinger
//! equation splits into a one-excitation block sourced by the drives and a
//! two-excitation block sourced by the one-excitation amplitudes. Each block is
//! a 2x2 complex-symmetric linear system; every amplitude is then exactly
//! homogeneous in the drive strength (first order for one excitation, second
//! order for two).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{ObservableSet, SolverKind};
use crate::params::{DerivedQuantities, SystemParams};

/// Tolerance on the one-excitation determinant |g_F^2 - Delta_0 Delta_c|.
pub const SINGULAR_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-12;

/// Drives above these amplitudes leave the regime where two excitations suffice.
pub const WEAK_DRIVE_WARN: f64 = 1e-2;
pub const WEAK_DRIVE_LIMIT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DriveRegime {
    Weak,
    /// Above [`WEAK_DRIVE_WARN`]: results are still the leading-order ones
    /// but higher manifolds may matter.
    Moderate,
    /// Above [`WEAK_DRIVE_LIMIT`].
    Invalid,
}

impl DriveRegime {
    fn of(omega_max: f64) -> Self {
        if omega_max > WEAK_DRIVE_LIMIT {
            DriveRegime::Invalid
        } else if omega_max > WEAK_DRIVE_WARN {
            DriveRegime::Moderate
        } else {
            DriveRegime::Weak
        }
    }
}

/// Matrix elements of the effective Hamiltonian in the truncated basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    pub g_f: Complex64,
    pub delta_c: Complex64,
    pub delta_0: Complex64,
    pub omega_0: Complex64,
    pub omega_c: Complex64,
}

impl EffectiveHamiltonian {
    pub fn new(p: &SystemParams, d: &DerivedQuantities) -> Self {
        Self {
            g_f: d.g_f,
            delta_c: d.delta_c,
            delta_0: d.delta_0,
            omega_0: Complex64::from(p.omega_0),
            omega_c: Complex64::from(p.omega_c),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            g_f: self.g_f.conj(),
            delta_c: self.delta_c.conj(),
            delta_0: self.delta_0.conj(),
            omega_0: self.omega_0.conj(),
            omega_c: self.omega_c.conj(),
        }
    }

    /// [[Delta_c, g_F], [g_F, Delta_0]] acting on (c_10, c_01).
    pub fn one_excitation_block(&self) -> [[Complex64; 2]; 2] {
        [[self.delta_c, self.g_f], [self.g_f, self.delta_0]]
    }

    /// Block acting on (c_20, c_11); the photon ladder carries sqrt(2).
    pub fn two_excitation_block(&self) -> [[Complex64; 2]; 2] {
        let s = std::f64::consts::SQRT_2;
        [
            [2.0 * self.delta_c, s * self.g_f],
            [s * self.g_f, self.delta_c + self.delta_0],
        ]
    }
}

/// Amplitudes of |n photons, atom> with the ground amplitude normalized to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Amplitudes {
    pub c_g: Complex64,
    pub c_10: Complex64,
    pub c_01: Complex64,
    pub c_20: Complex64,
    pub c_11: Complex64,
    pub regime: DriveRegime,
}

fn det2(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Solves m x = rhs by Cramer's rule and checks the relative residual.
fn solve2(m: &[[Complex64; 2]; 2], rhs: [Complex64; 2], what: &'static str) -> Result<[Complex64; 2]> {
    let det = det2(m);
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() < SINGULAR_TOL {
        return Err(Error::Singular { what, modulus: det.norm() });
    }
    let x = [
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ];
    let r0 = m[0][0] * x[0] + m[0][1] * x[1] - rhs[0];
    let r1 = m[1][0] * x[0] + m[1][1] * x[1] - rhs[1];
    let xnorm = x[0].norm().max(x[1].norm());
    let bnorm = rhs[0].norm().max(rhs[1].norm());
    let denom = scale * xnorm + bnorm;
    if denom > 0.0 && r0.norm().max(r1.norm()) > RESIDUAL_TOL * denom {
        return Err(Error::Singular { what, modulus: det.norm() });
    }
    Ok(x)
}

/// Order-by-order steady state of `h` with the ground amplitude set to one.
pub fn solve_effective(h: &EffectiveHamiltonian, regime: DriveRegime) -> Result<Amplitudes> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let s = std::f64::consts::SQRT_2;

    let [c_10, c_01] = solve2(
        &h.one_excitation_block(),
        [-h.omega_c, -h.omega_0],
        "g_F^2 - Delta_0 Delta_c",
    )?;
    // Sources of |2,g> and |1,e> from the one-excitation amplitudes.
    let src = [-s * h.omega_c * c_10, -(h.omega_c * c_01 + h.omega_0 * c_10)];
    let [c_20, c_11] = if src[0] == zero && src[1] == zero {
        [zero, zero]
    } else {
        solve2(&h.two_excitation_block(), src, "two-excitation determinant")?
    };
    Ok(Amplitudes { c_g: one, c_10, c_01, c_20, c_11, regime })
}

pub fn solve_amplitudes(p: &SystemParams, d: &DerivedQuantities) -> Result<Amplitudes> {
    let regime = DriveRegime::of(p.omega_0.max(p.omega_c));
    solve_effective(&EffectiveHamiltonian::new(p, d), regime)
}

impl Amplitudes {
    /// Leading-order moments: n_c = |c_10|^2, <c> = c_10, <c^2> = sqrt2 c_20 and
    /// <c+c+cc> = 2|c_20|^2. Keeping one order per quantity makes g2, I0 and
    /// I2 exactly drive-independent.
    pub fn observables(&self) -> Result<ObservableSet> {
        let s = std::f64::consts::SQRT_2;
        ObservableSet::from_moments(
            self.c_10.norm_sqr(),
            self.c_10,
            s * self.c_20,
            2.0 * self.c_20.norm_sqr(),
            SolverKind::Wavefunction,
        )
    }

    /// Moments of the truncated (unnormalized) state including every
    /// retained term: n_c = |c_10|^2 + |c_11|^2 + 2|c_20|^2 and
    /// <c> = c_g* c_10 + c_01* c_11 + sqrt2 c_10* c_20. Differs from
    /// [`Amplitudes::observables`] at relative order Omega^2.
    pub fn observables_with_corrections(&self) -> Result<ObservableSet> {
        let s = std::f64::consts::SQRT_2;
        let n = self.c_10.norm_sqr() + self.c_11.norm_sqr() + 2.0 * self.c_20.norm_sqr();
        let a = self.c_g.conj() * self.c_10 + self.c_01.conj() * self.c_11 + s * self.c_10.conj() * self.c_20;
        ObservableSet::from_moments(
            n,
            a,
            s * self.c_g.conj() * self.c_20,
            2.0 * self.c_20.norm_sqr(),
            SolverKind::Wavefunction,
        )
    }

    /// Relative change of I2 when the O(Omega^3) terms are kept in the moments.
    pub fn correction_shift_i2(&self) -> Result<f64> {
        let lead = self.observables()?;
        let full = self.observables_with_corrections()?;
        Ok((full.i2_direct - lead.i2).abs() / lead.i2.abs().max(f64::MIN_POSITIVE))
    }

    pub fn conj(&self) -> Self {
        Self {
            c_g: self.c_g.conj(),
            c_10: self.c_10.conj(),
            c_01: self.c_01.conj(),
            c_20: self.c_20.conj(),
            c_11: self.c_11.conj(),
            regime: self.regime,
        }
    }
}

/// Solve and evaluate at one parameter point.
pub fn observables(p: &SystemParams) -> Result<ObservableSet> {
    p.require_drive()?;
    let d = p.derive()?;
    solve_amplitudes(p, &d)?.observables()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DriveKind;
    use approx::assert_relative_eq;

    fn empty_cavity() -> SystemParams {
        SystemParams {
            g: 0.0,
            kappa0: 1.0,
            delta_0c: 0.4,
            delta_0l: 1.3,
            omega_c: 1e-3,
            fano_enabled: false,
            ..Default::default()
        }
    }

    #[test]
    fn undriven_system_stays_in_ground_state() {
        let p = SystemParams { g: 2.0, kappa0: 1.0, ..Default::default() };
        let a = solve_amplitudes(&p, &p.derive().unwrap()).unwrap();
        for z in [a.c_10, a.c_01, a.c_20, a.c_11] {
            assert_eq!(z.norm(), 0.0);
        }
        assert!(observables(&p).is_err());
    }

    #[test]
    fn driven_empty_cavity_is_coherent() {
        let p = empty_cavity();
        let a = solve_amplitudes(&p, &p.derive().unwrap()).unwrap();
        assert_eq!(a.c_01.norm(), 0.0);
        assert_eq!(a.c_11.norm(), 0.0);
        assert_relative_eq!((a.c_20 / (a.c_10 * a.c_10)).re, 1.0 / 2f64.sqrt(), max_relative = 1e-12);
        assert!((a.c_20 / (a.c_10 * a.c_10)).im.abs() < 1e-12);
        let obs = a.observables().unwrap();
        assert_relative_eq!(obs.g2, 1.0, epsilon = 1e-12);
        assert!(obs.i0.abs() < 1e-12);
        assert!(obs.i2.abs() < 1e-12);
    }

    #[test]
    fn one_excitation_amplitude_matches_intensity_formula() {
        let p = SystemParams {
            g: 1.0,
            kappa0: 0.5,
            gamma_n: 0.1,
            delta_0c: 2.0,
            delta_0l: 0.5,
            omega_0: 1e-3,
            omega_c: 4e-4,
            ..Default::default()
        };
        let d = p.derive().unwrap();
        let a = solve_amplitudes(&p, &d).unwrap();
        let expect = (p.omega_c * d.delta_0 - p.omega_0 * d.g_f) / (d.g_f * d.g_f - d.delta_0 * d.delta_c);
        assert_relative_eq!(a.c_10.re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(a.c_10.im, expect.im, max_relative = 1e-12);
    }

    #[test]
    fn exact_bic_with_zero_linewidth_is_singular() {
        // kappa0 = gamma0 and no extra loss: the antisymmetric mode is dark;
        // drive the laser onto its (real) energy g.
        let p = SystemParams {
            g: 2.0,
            kappa0: 1.0,
            delta_0c: 0.0,
            delta_0l: 0.0,
            omega_0: 1e-3,
            ..Default::default()
        };
        // Eigenvalues of [[Dc, gF], [gF, D0]] are delta_0L + g - i and delta_0L - g.
        let p = SystemParams { delta_0l: 2.0, ..p };
        let d = p.derive().unwrap();
        assert!(matches!(solve_amplitudes(&p, &d), Err(Error::Singular { .. })));
        let off = SystemParams { delta_0l: 2.1, ..p };
        assert!(solve_amplitudes(&off, &off.derive().unwrap()).is_ok());
    }

    #[test]
    fn drive_regime_flags() {
        let p = empty_cavity();
        let d = p.derive().unwrap();
        assert_eq!(solve_amplitudes(&p, &d).unwrap().regime, DriveRegime::Weak);
        let p = p.with_drive(DriveKind::Cavity, 0.05);
        assert_eq!(solve_amplitudes(&p, &d).unwrap().regime, DriveRegime::Moderate);
        let p = p.with_drive(DriveKind::Cavity, 1.0);
        assert_eq!(solve_amplitudes(&p, &d).unwrap().regime, DriveRegime::Invalid);
    }

    #[test]
    fn higher_order_moments_close_to_leading_order_at_weak_drive() {
        let p = SystemParams {
            g: 1.0,
            kappa0: 0.5,
            gamma_n: 0.1,
            delta_0c: 2.0,
            delta_0l: 0.5,
            omega_0: 1e-3,
            ..Default::default()
        };
        let a = solve_amplitudes(&p, &p.derive().unwrap()).unwrap();
        let shift = a.correction_shift_i2().unwrap();
        assert!(shift < 1e-4, "shift {shift}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = SystemParams> {
            (
                0.1..20.0f64,
                0.1..20.0f64,
                0.0..2.0f64,
                0.0..1.0f64,
                -40.0..40.0f64,
                -40.0..40.0f64,
                0.0..1e-3f64,
                1e-5..1e-3f64,
                any::<bool>(),
            )
                .prop_map(|(g, kappa0, kappa_n, gamma_n, delta_0c, delta_0l, w0, wc, fano)| SystemParams {
                    g,
                    kappa0,
                    kappa_n,
                    gamma_n,
                    delta_0c,
                    delta_0l,
                    omega_0: w0,
                    omega_c: wc,
                    fano_enabled: fano,
                    ..Default::default()
                })
        }

        proptest! {
            #[test]
            fn drive_scaling_is_exact(p in point(), s in 0.01..10.0f64) {
                let a = observables(&p).unwrap();
                let scaled = SystemParams { omega_0: s * p.omega_0, omega_c: s * p.omega_c, ..p };
                let b = observables(&scaled).unwrap();
                prop_assert!((b.n_c / (s * s * a.n_c) - 1.0).abs() < 1e-10);
                prop_assert!((b.g2 / a.g2 - 1.0).abs() < 1e-10);
            }

            #[test]
            fn decomposition_closes(p in point()) {
                let o = observables(&p).unwrap();
                prop_assert!(o.decomposition_residual() < 1e-10);
                // leading order has n_c = |<c>|^2, so the direct squeezing term agrees too
                prop_assert!((o.i2 - o.i2_direct).abs() <= 1e-9 * (1.0 + o.g2));
            }

            #[test]
            fn conjugated_hamiltonian_conjugates_amplitudes(p in point()) {
                let h = EffectiveHamiltonian::new(&p, &p.derive().unwrap());
                let a = solve_effective(&h, DriveRegime::Weak).unwrap();
                let b = solve_effective(&h.conj(), DriveRegime::Weak).unwrap();
                let ac = a.conj();
                for (x, y) in [(ac.c_10, b.c_10), (ac.c_01, b.c_01), (ac.c_20, b.c_20), (ac.c_11, b.c_11)] {
                    prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-300));
                }
            }

            #[test]
            fn amplitude_orders_in_drive(p in point()) {
                let d = p.derive().unwrap();
                let a = solve_amplitudes(&p, &d).unwrap();
                let tenth = SystemParams { omega_0: p.omega_0 / 10.0, omega_c: p.omega_c / 10.0, ..p };
                let b = solve_amplitudes(&tenth, &d).unwrap();
                prop_assert!((a.c_10.norm() / b.c_10.norm() - 10.0).abs() < 1e-9);
                if a.c_20.norm() > 0.0 {
                    prop_assert!((a.c_20.norm() / b.c_20.norm() - 100.0).abs() < 1e-7);
                }
                if a.c_11.norm() > 0.0 {
                    prop_assert!((a.c_11.norm() / b.c_11.norm() - 100.0).abs() < 1e-7);
                }
            }
        }
    }
}
