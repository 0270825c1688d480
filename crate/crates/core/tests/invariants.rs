use fano_cqed::analytic::{self, bic_conditions, eta_m_large_q};
use fano_cqed::figures;
use fano_cqed::lindblad::{self, OracleConfig};
use fano_cqed::sweep::{self, Axis, SweepSpec};
use fano_cqed::{DriveKind, Observable, SolverKind, SystemParams};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = SystemParams> {
    (0.1..20.0f64, 0.1..20.0f64, 0.0..0.5f64, 0.0..0.5f64, -1.0..1.0f64, -1.0..1.0f64, any::<bool>()).prop_map(
        |(g, kappa0, bk, bg, x, y, atom)| {
            let q = 2.0 * g / kappa0.sqrt();
            let kind = if atom { DriveKind::Atom } else { DriveKind::Cavity };
            SystemParams {
                g,
                kappa0,
                kappa_n: kappa0 * bk / (1.0 - bk),
                gamma_n: bg / (1.0 - bg),
                delta_0c: 2.0 * q * x,
                delta_0l: 2.0 * q * y,
                ..Default::default()
            }
            .with_drive(kind, 1e-3)
        },
    )
}

fn eta_grid(p: &SystemParams, centre: (f64, f64), n: usize) -> Vec<Vec<f64>> {
    let at = |c: f64, k: usize| c * (0.8 + 0.4 * k as f64 / (n - 1) as f64);
    (0..n)
        .map(|i| (0..n).map(|j| sweep::weak_eta(&SystemParams { delta_0c: at(centre.0, i), delta_0l: at(centre.1, j), ..*p })).collect())
        .collect()
}

/// Largest grid value outside the cells adjacent to the centre, and the largest within them.
fn split_max(grid: &[Vec<f64>]) -> (f64, f64) {
    let c = grid.len() / 2;
    let (mut near, mut far) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let slot = if i.abs_diff(c) <= 1 && j.abs_diff(c) <= 1 { &mut near } else { &mut far };
            if v.is_finite() {
                *slot = slot.max(v);
            }
        }
    }
    (near, far)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_common_cavity_channel_makes_toggle_exact(mut p in point()) {
        p.kappa_n += p.kappa0;
        p.kappa0 = 0.0;
        let on = analytic::observables(&p);
        let off = analytic::observables(&p.with_fano(false));
        if let (Ok(on), Ok(off)) = (on, off) {
            prop_assert_eq!(on.g2, off.g2);
            prop_assert_eq!(on.n_c, off.n_c);
        }
    }

    #[test]
    fn analytic_and_wavefunction_agree(p in point()) {
        if let (Ok(a), Ok(w)) = (analytic::observables(&p), fano_cqed::wavefunction::observables(&p)) {
            prop_assert!((a.g2 - w.g2).abs() <= 1e-8 * w.g2.abs().max(1.0), "{} vs {}", a.g2, w.g2);
            prop_assert!((a.n_c - w.n_c).abs() <= 1e-8 * w.n_c);
        }
    }

    #[test]
    fn large_q_limit_falls_with_loss(b1 in 0.001..0.5f64, b2 in 0.001..0.5f64) {
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        prop_assume!(hi - lo > 1e-9);
        let eta = |beta: f64| {
            let r = beta / (1.0 - beta);
            eta_m_large_q(50.0, r, r, 0.3, 1.0, DriveKind::Atom)
        };
        prop_assert!(eta(lo) > eta(hi));
    }

    #[test]
    fn atom_drive_limit_beats_cavity_drive(q in 10.0..200.0f64, rg in 0.001..1.0f64, rk in 0.001..1.0f64, kappa0 in 0.1..20.0f64) {
        let atom = eta_m_large_q(q, rg, rk, kappa0, 1.0, DriveKind::Atom);
        let cavity = eta_m_large_q(q, rg, rk, kappa0, 1.0, DriveKind::Cavity);
        prop_assert!(atom >= cavity, "{atom} < {cavity}");
    }
}

#[test]
fn numeric_enhancement_maximum_is_local() {
    let p = figures::fig1_params();
    let best = sweep::maximize_eta(&p, None).unwrap();
    let grid = eta_grid(&p, (best.delta_0c, best.delta_0c + best.delta_cl), 101);
    let (near, far) = split_max(&grid);
    assert!(best.eta >= far, "eta {} at the optimum, {far} elsewhere", best.eta);
    assert!(near <= best.eta * (1.0 + 1e-9));
}

/// The closed-form detunings miss the numeric peak, which is narrower than
/// one grid cell, so the centre of this grid is not its maximum.
#[test]
#[ignore = "enhancement peak is narrower than the grid step; see project notes"]
fn enhancement_maximum_is_local_at_predicted_detunings() {
    for p in [figures::fig1_params(), SystemParams { g: 20.0, kappa0: 1.0, kappa_n: 0.05, gamma_n: 0.05, ..figures::fig1_params() }] {
        let d = p.derive().unwrap();
        let b = bic_conditions(&p, &d).unwrap();
        let grid = eta_grid(&p, (b.delta_0c, b.delta_0l), 101);
        let (near, far) = split_max(&grid);
        assert!(near >= far, "best near centre {near:.4e}, elsewhere {far:.4e}");
    }
}

#[test]
fn bic_search_approaches_closed_form_as_loss_vanishes() {
    let mut gaps = Vec::new();
    for beta in [0.1, 0.01, 0.001] {
        let r = beta / (1.0 - beta);
        let p = SystemParams { g: 15.0, kappa0: 0.3, kappa_n: 0.3 * r, gamma_n: r, ..Default::default() }.with_drive(DriveKind::Atom, 1e-3);
        let d = p.derive().unwrap();
        let found = sweep::locate_bic(&p, None).unwrap();
        let pred = bic_conditions(&p, &d).unwrap();
        gaps.push((found.delta_0c - pred.delta_0c).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn parallel_sweep_matches_serial_for_every_solver() {
    let base = figures::fig2a_params();
    for solver in [SolverKind::Analytic, SolverKind::Wavefunction, SolverKind::Oracle] {
        let spec = SweepSpec::new(Axis::new("delta_cL", -2.0, 2.0, 9), Some(Axis::new("delta_0c", 0.0, 3.0, 4)), solver)
            .with_observables(vec![Observable::Intensity, Observable::G2, Observable::Eta]);
        let a = sweep::sweep(&spec, &base).unwrap();
        let b = sweep::sweep_serial(&spec, &base).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }
}

#[test]
fn sweep_spot_check_agrees_with_oracle() {
    let base = figures::fig1_params();
    let spec = SweepSpec::new(Axis::new("delta_cL", -30.0, 30.0, 41), Some(Axis::new("delta_0c", 0.0, 30.0, 10)), SolverKind::Wavefunction);
    let grid = sweep::sweep(&spec, &base).unwrap();
    let check = sweep::spot_check(&grid, 0.05, 7).unwrap();
    assert!(check.max_rel_dev < 0.02, "{check:?}");
}

fn rel_dev(p: &SystemParams, cfg: &OracleConfig) -> f64 {
    let wf = fano_cqed::wavefunction::observables(p).unwrap().g2;
    let or = lindblad::solve(p, cfg).unwrap().observables.g2;
    (wf - or).abs() / or
}

#[test]
fn oracle_agreement_degrades_gracefully_with_drive() {
    let cfg = OracleConfig::auto();
    for base in [
        SystemParams { delta_0c: 1.0, ..figures::fig3_params(1.0) }.with_delta_cl(-0.3),
        SystemParams { delta_0c: 0.0, ..figures::fig3_params(1.0) }.with_delta_cl(1.0),
        SystemParams { delta_0c: 19.25, ..figures::fig1_params() }.with_delta_cl(15.0),
    ] {
        let kind = base.drive_kind().unwrap();
        let weak = rel_dev(&base.with_drive(kind, 1e-3), &cfg);
        let strong = rel_dev(&base.with_drive(kind, 1e-2), &cfg);
        assert!(weak < strong && strong < 0.05, "{weak:e} {strong:e}");
    }
}

#[test]
fn jaynes_cummings_without_interference_matches_oracle() {
    let cfg = OracleConfig::auto();
    for (g, kappa0, delta_0c, delta_cl, kind) in [
        (1.0, 0.3, 0.0, 1.0, DriveKind::Cavity),
        (5.0, 2.0, 1.5, -4.0, DriveKind::Atom),
        (0.3, 1.0, -0.5, 0.2, DriveKind::Cavity),
        (12.0, 0.5, 3.0, 10.0, DriveKind::Atom),
    ] {
        let p = SystemParams { g, kappa0, delta_0c, fano_enabled: false, ..Default::default() }.with_delta_cl(delta_cl).with_drive(kind, 1e-3);
        let dev = rel_dev(&p, &cfg);
        assert!(dev < 0.01, "g={g} kappa0={kappa0}: {dev:e}");
    }
}

#[test]
fn oracle_steady_state_is_a_density_matrix() {
    let p = SystemParams { delta_0c: 19.25, ..figures::fig1_params() }.with_delta_cl(8.2);
    let sol = lindblad::solve(&p, &OracleConfig::auto()).unwrap();
    let s = &sol.state;
    assert!((s.trace() - 1.0).norm() < 1e-12);
    assert!(s.hermiticity_error() < 1e-12);
    assert!(s.min_eigenvalue() > -1e-12);
    let last = sol.history.last().unwrap();
    assert!(last.n_max == s.n_max);
}

#[test]
fn intensity_closed_form_matches_oracle_at_resonance() {
    let p = SystemParams { delta_0c: 1.0, ..figures::fig3_params(0.3) }.with_delta_cl(0.2);
    let d = p.derive().unwrap();
    let n = analytic::intensity_analytic(&d, &p).unwrap();
    let or = lindblad::observables(&p, &OracleConfig::auto()).unwrap().n_c;
    assert!((n - or).abs() / or < 1e-3, "{n:e} {or:e}");
}

#[test]
fn higher_order_mean_field_terms_barely_move_squeezing_part() {
    let cloud = fano_cqed::verify::random_cloud(500, 5, &fano_cqed::verify::CloudRanges::default());
    for p in &cloud {
        let d = p.derive().unwrap();
        let Ok(a) = fano_cqed::wavefunction::solve_amplitudes(p, &d) else { continue };
        if let Ok(shift) = a.correction_shift_i2() {
            assert!(shift < 0.01, "{p:?}: {shift:e}");
        }
    }
}
