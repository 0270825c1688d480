//! Closed-form weak-drive results: intensity, g2, the I0/I2 split, the
//! quasi-BIC detunings and the limiting enhancement factors.
//!
//! The two-photon amplitude ratio
//!
//! ```text
//! R = sqrt2 c_20 / c_10^2
//!   = (g_F^2 - D0 Dc) [g_F^2 W0^2 - 2 g_F (D0 + Dc) W0 Wc + Wc^2 (g_F^2 + D0 (D0 + Dc))]
//!     / ((Wc D0 - W0 g_F)^2 (g_F^2 - (D0 + Dc) Dc))
//! ```
//!
//! gives g2 = |R|^2 and I0 = |R - 1|^2. For a pure cavity drive I0 reduces
//! to |g_F^4 / (D0^2 (g_F^2 - (D0 + Dc) Dc))|^2.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{ObservableSet, SolverKind};
use crate::params::{DerivedQuantities, DriveKind, SystemParams};
use crate::wavefunction::{self, SINGULAR_TOL};

/// Below this q the small-q limit applies.
pub const Q_SMALL: f64 = 0.1;
/// Above this q the large-q limit applies.
pub const Q_LARGE: f64 = 30.0;

/// Relative deviation above which the printed closed form is flagged.
pub const PRINTED_FORM_TOL: f64 = 1e-6;

fn one_excitation_det(d: &DerivedQuantities) -> Result<Complex64> {
    let den = d.g_f * d.g_f - d.delta_0 * d.delta_c;
    if den.norm() < SINGULAR_TOL {
        return Err(Error::Singular { what: "g_F^2 - Delta_0 Delta_c", modulus: den.norm() });
    }
    Ok(den)
}

/// Cavity field amplitude <c> at leading order.
pub fn field_amplitude(d: &DerivedQuantities, p: &SystemParams) -> Result<Complex64> {
    let den = one_excitation_det(d)?;
    Ok((p.omega_c * d.delta_0 - p.omega_0 * d.g_f) / den)
}

/// n_c = |(Wc D0 - W0 g_F) / (g_F^2 - D0 Dc)|^2.
pub fn intensity_analytic(d: &DerivedQuantities, p: &SystemParams) -> Result<f64> {
    Ok(field_amplitude(d, p)?.norm_sqr())
}

/// R = sqrt2 c_20 / c_10^2 from the closed form.
pub fn pair_ratio(d: &DerivedQuantities, p: &SystemParams) -> Result<Complex64> {
    let (gf, d0, dc) = (d.g_f, d.delta_0, d.delta_c);
    let (w0, wc) = (p.omega_0, p.omega_c);
    let d1 = one_excitation_det(d)?;
    let d2 = gf * gf - (d0 + dc) * dc;
    let src = wc * d0 - w0 * gf;
    if src.norm() == 0.0 {
        return Err(Error::ZeroIntensity(0.0));
    }
    if d2.norm() < SINGULAR_TOL {
        return Err(Error::Singular { what: "g_F^2 - (Delta_0 + Delta_c) Delta_c", modulus: d2.norm() });
    }
    let num = gf * gf * w0 * w0 - 2.0 * gf * (d0 + dc) * w0 * wc + wc * wc * (gf * gf + d0 * (d0 + dc));
    Ok(d1 * num / (src * src * d2))
}

/// g2 from the closed-form pair ratio.
pub fn g2_closed_form(d: &DerivedQuantities, p: &SystemParams) -> Result<f64> {
    Ok(pair_ratio(d, p)?.norm_sqr())
}

/// The g2 expression in the form it is usually quoted, with mixed drive
/// orders in the numerator and without the intensity normalization. Kept
/// only to report how far it is from the amplitude result.
pub fn g2_printed_form(d: &DerivedQuantities, p: &SystemParams) -> f64 {
    let (gf, d0, dc) = (d.g_f, d.delta_0, d.delta_c);
    let (w0, wc) = (p.omega_0, p.omega_c);
    let num = gf * gf * w0 * w0 - 2.0 * gf * (d0 + dc) * w0 + wc * wc * (gf * gf + d0 * (d0 + dc));
    let den = (gf * gf - d0 * dc) * (gf * gf - (d0 + dc) * dc);
    (num / den).norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct G2Evaluation {
    /// Authoritative value, from the two-excitation amplitudes.
    pub g2: f64,
    /// Same quantity from the closed-form pair ratio.
    pub closed_form: f64,
    pub printed_form: f64,
    pub printed_rel_deviation: f64,
    pub printed_flagged: bool,
}

pub fn g2_analytic(d: &DerivedQuantities, p: &SystemParams) -> Result<G2Evaluation> {
    let amps = wavefunction::solve_amplitudes(p, d)?;
    let g2 = amps.observables()?.g2;
    let closed_form = g2_closed_form(d, p)?;
    let printed_form = g2_printed_form(d, p);
    let printed_rel_deviation = (printed_form - g2).abs() / g2.abs().max(f64::MIN_POSITIVE);
    Ok(G2Evaluation {
        g2,
        closed_form,
        printed_form,
        printed_rel_deviation,
        printed_flagged: !(printed_rel_deviation <= PRINTED_FORM_TOL),
    })
}

/// eta = g2(no interference) / g2, evaluated with `g2_of` on both branches.
pub fn enhancement_with<F>(p: &SystemParams, mut g2_of: F) -> Result<f64>
where
    F: FnMut(&SystemParams) -> Result<f64>,
{
    if !p.fano_enabled {
        return Ok(1.0);
    }
    let with = g2_of(p)?;
    let without = g2_of(&p.with_fano(false))?;
    Ok(without / with)
}

pub fn enhancement(p: &SystemParams, _d: &DerivedQuantities) -> Result<f64> {
    enhancement_with(p, |q| Ok(wavefunction::observables(q)?.g2))
}

/// Observables from the closed forms alone.
pub fn observables(p: &SystemParams) -> Result<ObservableSet> {
    p.require_drive()?;
    let d = p.derive()?;
    let a = field_amplitude(&d, p)?;
    let r = pair_ratio(&d, p)?;
    let n = a.norm_sqr();
    ObservableSet::from_moments(n, a, r * a * a, r.norm_sqr() * n * n, SolverKind::Analytic)
}

/// Returns (I0, I2) with I2 = g2 - 1 - I0.
pub fn decomposition_analytic(d: &DerivedQuantities, p: &SystemParams) -> Result<(f64, f64)> {
    let r = pair_ratio(d, p)?;
    let i0 = (r - 1.0).norm_sqr();
    Ok((i0, r.norm_sqr() - 1.0 - i0))
}

/// The cavity-drive non-coherent term |g_F^4 / (D0^2 (g_F^2 - (D0 + Dc) Dc))|^2.
pub fn noncoherent_cavity_drive(d: &DerivedQuantities) -> f64 {
    let (gf, d0, dc) = (d.g_f, d.delta_0, d.delta_c);
    let g4 = gf * gf * gf * gf;
    (g4 / (d0 * d0 * (gf * gf - (d0 + dc) * dc))).norm_sqr()
}

/// First-order quasi-BIC detunings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BicPrediction {
    /// Atom-cavity detuning of the quasi-BIC.
    pub delta_0c: f64,
    /// Cavity-laser detuning of the enhancement maximum.
    pub delta_cl: f64,
    /// The same laser position measured from the atom: `delta_0c + delta_cl`.
    pub delta_0l: f64,
}

pub fn bic_conditions(p: &SystemParams, d: &DerivedQuantities) -> Result<BicPrediction> {
    if !d.q_defined() {
        return Err(Error::UndefinedFanoParameter);
    }
    let delta_0c = d.q * ((1.0 - d.beta_kappa) * p.gamma0 - (1.0 - d.beta_gamma) * p.kappa0) / 2.0;
    let delta_cl = d.q * (1.0 - d.beta_gamma) * p.kappa0 / 2.0;
    Ok(BicPrediction { delta_0c, delta_cl, delta_0l: delta_0c + delta_cl })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QRegime {
    Small,
    Intermediate,
    Large,
}

/// Small-q maximal enhancement, with loss ratios taken relative to the
/// common-channel rates (r_gamma = gamma_n / gamma0, r_kappa = kappa_n / kappa0).
pub fn eta_m_small_q(r_gamma: f64, r_kappa: f64, kappa0: f64, gamma0: f64, drive: DriveKind) -> f64 {
    let excess = (1.0 + r_gamma) * (1.0 + r_kappa) - 1.0;
    let first = 1.0 + 1.0 / excess;
    let second = kappa0 / (drive.c_coefficient() * kappa0 + gamma0);
    first * first * second * second
}

/// Drive-dependent correction factor of the large-q limit.
pub fn d_coefficient(q: f64, kappa0: f64, gamma0: f64, drive: DriveKind) -> f64 {
    let qk2 = (q * kappa0).powi(2);
    match drive {
        DriveKind::Atom => 1.0 - 4.0 * (kappa0 + gamma0) * gamma0 / qk2,
        DriveKind::Cavity => 1.0 - 4.0 * (kappa0 + gamma0).powi(2) / qk2,
    }
}

/// Large-q maximal enhancement; infinite when both loss ratios vanish.
pub fn eta_m_large_q(q: f64, r_gamma: f64, r_kappa: f64, kappa0: f64, gamma0: f64, drive: DriveKind) -> f64 {
    let q2 = q * q;
    let num = (2.0 + r_gamma + r_kappa).powi(2) * q2 + ((1.0 + r_gamma) * (1.0 + r_kappa)).powi(2);
    let den = (r_gamma + r_kappa).powi(2) * q2 + ((1.0 + r_gamma) * (1.0 + r_kappa) - 1.0).powi(2);
    num / den * d_coefficient(q, kappa0, gamma0, drive)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaLimits {
    pub small_q: f64,
    pub large_q: f64,
    pub regime: QRegime,
    /// Both loss ratios are zero: the two-excitation truncation diverges.
    pub diverges: bool,
}

impl EtaLimits {
    /// The limit that applies, if q is in one of the two limiting regimes.
    pub fn applicable(&self) -> Option<f64> {
        match self.regime {
            QRegime::Small => Some(self.small_q),
            QRegime::Large => Some(self.large_q),
            QRegime::Intermediate => None,
        }
    }
}

pub fn eta_max(p: &SystemParams, d: &DerivedQuantities, drive: DriveKind) -> Result<EtaLimits> {
    if !d.q_defined() {
        return Err(Error::UndefinedFanoParameter);
    }
    let (rg, rk) = (d.excess_gamma, d.excess_kappa);
    let regime = if d.q < Q_SMALL {
        QRegime::Small
    } else if d.q > Q_LARGE {
        QRegime::Large
    } else {
        QRegime::Intermediate
    };
    let diverges = rg == 0.0 && rk == 0.0;
    let guard = |v: f64| if v.is_nan() { f64::INFINITY } else { v.max(0.0) };
    Ok(EtaLimits {
        small_q: guard(eta_m_small_q(rg, rk, p.kappa0, p.gamma0, drive)),
        large_q: guard(eta_m_large_q(d.q, rg, rk, p.kappa0, p.gamma0, drive)),
        regime,
        diverges,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnhancementReport {
    pub delta_0c_bic: f64,
    pub delta_0l_bic: f64,
    pub delta_cl_bic: f64,
    pub eta_m_small_q: f64,
    pub eta_m_large_q: f64,
    pub regime: QRegime,
    pub diverges: bool,
    pub drive_kind: DriveKind,
}

pub fn enhancement_report(p: &SystemParams, drive: DriveKind) -> Result<EnhancementReport> {
    let d = p.derive()?;
    let bic = bic_conditions(p, &d)?;
    let eta = eta_max(p, &d, drive)?;
    Ok(EnhancementReport {
        delta_0c_bic: bic.delta_0c,
        delta_0l_bic: bic.delta_0l,
        delta_cl_bic: bic.delta_cl,
        eta_m_small_q: eta.small_q,
        eta_m_large_q: eta.large_q,
        regime: eta.regime,
        diverges: eta.diverges,
        drive_kind: drive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> SystemParams {
        SystemParams { g: 15.0, kappa0: 0.3, gamma_n: 0.01, ..Default::default() }
    }

    #[test]
    fn undriven_intensity_is_zero() {
        let p = SystemParams { delta_0c: 1.0, ..fig1() };
        assert_eq!(intensity_analytic(&p.derive().unwrap(), &p).unwrap(), 0.0);
    }

    #[test]
    fn decoupled_atom_gives_empty_cavity_lorentzian() {
        let p = SystemParams {
            g: 0.0,
            kappa0: 0.8,
            kappa_n: 0.2,
            delta_0c: -0.7,
            delta_0l: 0.3,
            omega_c: 1e-3,
            fano_enabled: false,
            ..Default::default()
        };
        let d = p.derive().unwrap();
        let expect = p.omega_c.powi(2) / (d.delta_c.norm_sqr());
        assert_relative_eq!(intensity_analytic(&d, &p).unwrap(), expect, max_relative = 1e-14);
        let g2 = g2_analytic(&d, &p).unwrap();
        assert_relative_eq!(g2.g2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_agrees_with_amplitudes() {
        for (w0, wc) in [(1e-3, 0.0), (0.0, 1e-3), (7e-4, 3e-4)] {
            let p = SystemParams {
                g: 1.0,
                kappa0: 0.5,
                gamma_n: 0.1,
                delta_0c: 2.0,
                delta_0l: 0.5,
                omega_0: w0,
                omega_c: wc,
                ..Default::default()
            };
            let e = g2_analytic(&p.derive().unwrap(), &p).unwrap();
            assert_relative_eq!(e.g2, e.closed_form, max_relative = 1e-10);
            assert!(e.printed_flagged);
        }
    }

    #[test]
    fn enhancement_trivial_cases() {
        let p = SystemParams { delta_0c: 3.0, delta_0l: 1.0, omega_0: 1e-3, ..fig1() };
        let off = p.with_fano(false);
        assert_eq!(enhancement(&off, &off.derive().unwrap()).unwrap(), 1.0);
        let no_common = SystemParams { kappa0: 0.0, kappa_n: 0.3, ..p };
        assert_eq!(enhancement(&no_common, &no_common.derive().unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn fig1_bic_detunings() {
        let p = fig1();
        let b = bic_conditions(&p, &p.derive().unwrap()).unwrap();
        assert!((b.delta_0c - 19.25).abs() < 0.005, "{}", b.delta_0c);
        assert!((b.delta_cl - 8.13).abs() < 0.005, "{}", b.delta_cl);
        assert_relative_eq!(b.delta_0l, b.delta_0c + b.delta_cl);
    }

    #[test]
    fn friedrich_wintgen_limit() {
        let p = SystemParams { g: 15.0, kappa0: 0.3, ..Default::default() };
        let d = p.derive().unwrap();
        let b = bic_conditions(&p, &d).unwrap();
        assert_relative_eq!(b.delta_0c, d.q * (1.0 - 0.3) / 2.0, max_relative = 1e-14);
        assert!((b.delta_0c - 19.17).abs() < 0.005);
    }

    #[test]
    fn bic_needs_common_cavity_channel() {
        let p = SystemParams { kappa0: 0.0, kappa_n: 1.0, ..fig1() };
        assert!(matches!(
            bic_conditions(&p, &p.derive().unwrap()),
            Err(Error::UndefinedFanoParameter)
        ));
    }

    #[test]
    fn small_q_limit_arithmetic() {
        // unit loss ratios, kappa0 = gamma0: (4/3)^2 (1/2)^2
        let v = eta_m_small_q(1.0, 1.0, 1.0, 1.0, DriveKind::Atom);
        assert_relative_eq!(v, 4.0 / 9.0, max_relative = 1e-14);
        let p = SystemParams { g: 0.01, kappa0: 1.0, kappa_n: 1.0, gamma_n: 1.0, ..Default::default() };
        let lim = eta_max(&p, &p.derive().unwrap(), DriveKind::Atom).unwrap();
        assert_eq!(lim.regime, QRegime::Small);
        assert_relative_eq!(lim.small_q, 4.0 / 9.0, max_relative = 1e-14);
        let cav = eta_max(&p, &p.derive().unwrap(), DriveKind::Cavity).unwrap();
        assert_relative_eq!(cav.small_q, (4.0f64 / 3.0).powi(2) / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn large_q_limit_for_fig1() {
        let p = fig1();
        let d = p.derive().unwrap();
        let lim = eta_max(&p, &d, DriveKind::Atom).unwrap();
        assert_eq!(lim.regime, QRegime::Large);
        assert!(!lim.diverges);
        // q^2 = 3000, r_gamma = 0.01, r_kappa = 0, D = 1 - 5.2/270
        let expect = (2.01f64.powi(2) * 3000.0 + 1.01f64.powi(2)) / (0.01f64.powi(2) * 3000.0 + 0.01f64.powi(2))
            * (1.0 - 5.2 / 270.0);
        assert_relative_eq!(lim.large_q, expect, max_relative = 1e-10);
        assert!((lim.large_q - 4.0e4).abs() < 0.05 * 4.0e4, "{}", lim.large_q);
    }

    #[test]
    fn lossless_large_q_diverges() {
        let p = SystemParams { g: 15.0, kappa0: 0.3, ..Default::default() };
        let lim = eta_max(&p, &p.derive().unwrap(), DriveKind::Atom).unwrap();
        assert!(lim.diverges);
        assert!(lim.large_q.is_infinite());
    }

    #[test]
    fn large_q_limit_decreases_with_loss() {
        let q = 60.0;
        let mut last = f64::INFINITY;
        for i in 0..=60 {
            let b = 0.001 * (500.0f64).powf(i as f64 / 60.0);
            let v = eta_m_large_q(q, b, b, 0.5, 1.0, DriveKind::Atom);
            assert!(v < last, "b = {b}");
            last = v;
        }
    }

    #[test]
    fn atom_drive_beats_cavity_drive_at_large_q() {
        for (q, k0, rg, rk) in [(40.0, 0.3, 0.01, 0.0), (55.0, 1.0, 0.1, 0.05), (100.0, 5.0, 0.3, 0.3)] {
            let a = eta_m_large_q(q, rg, rk, k0, 1.0, DriveKind::Atom);
            let c = eta_m_large_q(q, rg, rk, k0, 1.0, DriveKind::Cavity);
            assert!(a >= c);
        }
    }

    #[test]
    fn decomposition_identity_and_cavity_form() {
        let p = SystemParams {
            g: 16.0,
            kappa0: 17.0,
            gamma_n: 1.0,
            delta_0c: -29.0,
            delta_0l: 3.0,
            omega_c: 1.0,
            ..Default::default()
        };
        let d = p.derive().unwrap();
        let (i0, i2) = decomposition_analytic(&d, &p).unwrap();
        let g2 = g2_closed_form(&d, &p).unwrap();
        assert!((1.0 + i0 + i2 - g2).abs() < 1e-10 * g2.max(1.0));
        assert_relative_eq!(i0, noncoherent_cavity_drive(&d), max_relative = 1e-10);
    }

    #[test]
    fn noncoherent_part_vanishes_with_coupling() {
        let base = SystemParams { kappa0: 0.5, gamma_n: 0.2, delta_0l: 0.3, omega_c: 1e-3, ..Default::default() };
        let mut last = f64::INFINITY;
        for g in [1e-1, 1e-2, 1e-3] {
            let p = SystemParams { g, kappa0: g * g, ..base };
            let (i0, _) = decomposition_analytic(&p.derive().unwrap(), &p).unwrap();
            assert!(i0 < last);
            last = i0;
        }
        assert!(last < 1e-20);
    }
}
