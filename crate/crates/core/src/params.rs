//! Physical parameters of the driven atom-cavity system and the quantities
//! derived from them.
//!
//! All rates, detunings and drive amplitudes are expressed in units of the
//! atomic radiative rate into the common continuum, so `gamma0` is 1 unless a
//! caller deliberately rescales.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which subsystem the coherent drive addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Atom,
    Cavity,
}

impl DriveKind {
    /// Coefficient of the small-q enhancement limit.
    pub fn c_coefficient(self) -> f64 {
        match self {
            DriveKind::Atom => 1.0,
            DriveKind::Cavity => 2.0,
        }
    }
}

impl fmt::Display for DriveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriveKind::Atom => "atom",
            DriveKind::Cavity => "cavity",
        })
    }
}

impl FromStr for DriveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atom" => Ok(DriveKind::Atom),
            "cavity" => Ok(DriveKind::Cavity),
            other => Err(Error::InvalidParameter(format!("unknown drive kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Atom-cavity coupling constant.
    pub g: f64,
    /// Cavity decay into the common continuum.
    pub kappa0: f64,
    /// Cavity decay into independent baths.
    pub kappa_n: f64,
    /// Atomic decay into the common continuum (the unit of everything else).
    pub gamma0: f64,
    /// Atomic decay into independent baths.
    pub gamma_n: f64,
    /// Atom-cavity detuning, omega_atom - omega_cavity.
    pub delta_0c: f64,
    /// Atom-laser detuning, omega_atom - omega_laser.
    #[serde(rename = "delta_0L")]
    pub delta_0l: f64,
    /// Atom drive amplitude.
    pub omega_0: f64,
    /// Cavity drive amplitude.
    pub omega_c: f64,
    /// When false the cross term through the common continuum is removed.
    pub fano_enabled: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 0.0,
            kappa0: 0.0,
            kappa_n: 0.0,
            gamma0: 1.0,
            gamma_n: 0.0,
            delta_0c: 0.0,
            delta_0l: 0.0,
            omega_0: 0.0,
            omega_c: 0.0,
            fano_enabled: true,
        }
    }
}

/// Every numeric key accepted by [`SystemParams::set`], in declaration order.
pub const NUMERIC_KEYS: [&str; 9] = [
    "g", "kappa0", "kappa_n", "gamma0", "gamma_n", "delta_0c", "delta_0L", "omega_0", "omega_c",
];

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in NUMERIC_KEYS.iter().zip(self.numeric_values()) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        for (name, v) in [
            ("kappa0", self.kappa0),
            ("kappa_n", self.kappa_n),
            ("gamma_n", self.gamma_n),
            ("g", self.g),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")));
            }
        }
        if self.gamma0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma0 = {} must be > 0",
                self.gamma0
            )));
        }
        if self.omega_0 < 0.0 || self.omega_c < 0.0 {
            return Err(Error::InvalidParameter(
                "drive amplitudes must be >= 0 (phases are absorbed into the drives)".into(),
            ));
        }
        Ok(())
    }

    /// Observable queries need at least one nonzero drive.
    pub fn require_drive(&self) -> Result<()> {
        if self.omega_0 > 0.0 || self.omega_c > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("both drive amplitudes are zero".into()))
        }
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        self.validate()?;
        Ok(DerivedQuantities::from_params(self))
    }

    pub fn with_fano(mut self, enabled: bool) -> Self {
        self.fano_enabled = enabled;
        self
    }

    /// Cavity-laser detuning, always derived from the two stored detunings.
    pub fn delta_cl(&self) -> f64 {
        self.delta_0l - self.delta_0c
    }

    /// Moves the laser so that the cavity-laser detuning takes the given value.
    pub fn with_delta_cl(mut self, delta_cl: f64) -> Self {
        self.delta_0l = self.delta_0c + delta_cl;
        self
    }

    /// Single-drive configuration of the given kind and amplitude.
    pub fn with_drive(mut self, kind: DriveKind, amplitude: f64) -> Self {
        match kind {
            DriveKind::Atom => {
                self.omega_0 = amplitude;
                self.omega_c = 0.0;
            }
            DriveKind::Cavity => {
                self.omega_0 = 0.0;
                self.omega_c = amplitude;
            }
        }
        self
    }

    /// The drive kind when exactly one drive is on.
    pub fn drive_kind(&self) -> Option<DriveKind> {
        match (self.omega_0 > 0.0, self.omega_c > 0.0) {
            (true, false) => Some(DriveKind::Atom),
            (false, true) => Some(DriveKind::Cavity),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        Ok(match key {
            "g" => self.g,
            "kappa0" => self.kappa0,
            "kappa_n" => self.kappa_n,
            "gamma0" => self.gamma0,
            "gamma_n" => self.gamma_n,
            "delta_0c" => self.delta_0c,
            "delta_0L" => self.delta_0l,
            "delta_cL" => self.delta_cl(),
            "omega_0" => self.omega_0,
            "omega_c" => self.omega_c,
            other => return Err(Error::UnknownKey(other.to_string())),
        })
    }

    /// Sets a numeric field by its config key. `delta_cL` is accepted as a
    /// convenience and moves `delta_0L` with `delta_0c` held fixed.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "g" => self.g = value,
            "kappa0" => self.kappa0 = value,
            "kappa_n" => self.kappa_n = value,
            "gamma0" => self.gamma0 = value,
            "gamma_n" => self.gamma_n = value,
            "delta_0c" => self.delta_0c = value,
            "delta_0L" => self.delta_0l = value,
            "delta_cL" => self.delta_0l = self.delta_0c + value,
            "omega_0" => self.omega_0 = value,
            "omega_c" => self.omega_c = value,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses `key=value`, where `fano_enabled` takes a boolean.
    pub fn set_str(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{assignment}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "fano_enabled" {
            self.fano_enabled = value
                .parse()
                .map_err(|_| Error::Config(format!("fano_enabled expects true/false, got `{value}`")))?;
            return Ok(());
        }
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("{key}: `{value}` is not a number")))?;
        self.set(key, v)
    }

    /// Reads a flat `key = value` config. Unknown keys are rejected and
    /// absent keys keep their defaults.
    pub fn from_config_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_config_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }

    /// Overlays the keys present in `text` onto `self`.
    pub fn merge_config_str(&mut self, text: &str) -> Result<()> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (key, value) in table {
            match (key.as_str(), value) {
                ("fano_enabled", toml::Value::Boolean(b)) => self.fano_enabled = b,
                (k, toml::Value::Float(v)) => self.set(k, v)?,
                (k, toml::Value::Integer(v)) => self.set(k, v as f64)?,
                (k, other) => {
                    return Err(Error::Config(format!("{k}: unsupported value `{other}`")))
                }
            }
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("flat struct always serializes")
    }

    fn numeric_values(&self) -> [f64; 9] {
        [
            self.g,
            self.kappa0,
            self.kappa_n,
            self.gamma0,
            self.gamma_n,
            self.delta_0c,
            self.delta_0l,
            self.omega_0,
            self.omega_c,
        ]
    }
}

/// Complex detunings, couplings and loss ratios entering the effective
/// Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub kappa: f64,
    pub gamma: f64,
    /// kappa_n / kappa (fraction of cavity loss outside the common continuum).
    pub beta_kappa: f64,
    /// gamma_n / gamma.
    pub beta_gamma: f64,
    /// kappa_n / kappa0 (excess cavity loss relative to the common channel).
    pub excess_kappa: f64,
    /// gamma_n / gamma0.
    pub excess_gamma: f64,
    /// Fano parameter 2g / sqrt(kappa0 gamma0); infinite when the product vanishes.
    pub q: f64,
    /// sqrt(kappa0 gamma0) when interference is on, else 0.
    pub cross_rate: f64,
    pub g_f: Complex64,
    pub delta_cl: f64,
    pub delta_c: Complex64,
    pub delta_0: Complex64,
    pub g_crit: f64,
}

impl DerivedQuantities {
    fn from_params(p: &SystemParams) -> Self {
        let kappa = p.kappa0 + p.kappa_n;
        let gamma = p.gamma0 + p.gamma_n;
        let common = (p.kappa0 * p.gamma0).sqrt();
        let cross_rate = if p.fano_enabled { common } else { 0.0 };
        // Exact zero imaginary part when there is no cross term.
        let g_f = if cross_rate == 0.0 {
            Complex64::new(p.g, 0.0)
        } else {
            Complex64::new(p.g, -cross_rate / 2.0)
        };
        let delta_cl = p.delta_cl();
        Self {
            kappa,
            gamma,
            beta_kappa: if kappa > 0.0 { p.kappa_n / kappa } else { 0.0 },
            beta_gamma: p.gamma_n / gamma,
            excess_kappa: if p.kappa0 > 0.0 { p.kappa_n / p.kappa0 } else { f64::INFINITY },
            excess_gamma: p.gamma_n / p.gamma0,
            q: 2.0 * p.g / common,
            cross_rate,
            g_f,
            delta_cl,
            delta_c: Complex64::new(delta_cl, -kappa / 2.0),
            delta_0: Complex64::new(p.delta_0l, -gamma / 2.0),
            g_crit: (kappa + gamma) / 2.0,
        }
    }

    pub fn q_defined(&self) -> bool {
        self.q.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1() -> SystemParams {
        SystemParams {
            g: 15.0,
            kappa0: 0.3,
            gamma_n: 0.01,
            ..Default::default()
        }
    }

    #[test]
    fn fano_parameter_of_fig1_system() {
        let d = fig1().derive().unwrap();
        assert_relative_eq!(d.q, 54.7723, max_relative = 1e-5);
    }

    #[test]
    fn equal_split_gives_half_beta() {
        let p = SystemParams { kappa0: 0.7, kappa_n: 0.7, ..Default::default() };
        assert_eq!(p.derive().unwrap().beta_kappa, 0.5);
    }

    #[test]
    fn critical_coupling_of_fig3_system() {
        let p = SystemParams { g: 0.1, ..fig1() };
        let d = p.derive().unwrap();
        assert_relative_eq!(d.g_crit, 0.655, epsilon = 1e-12);
        // quoted as 0.65 after rounding
        assert!((d.g_crit - 0.65).abs() < 0.01);
    }

    #[test]
    fn negative_rates_and_bad_gamma0_rejected() {
        for key in ["kappa0", "kappa_n", "gamma_n", "g"] {
            let mut p = fig1();
            p.set(key, -0.1).unwrap();
            assert!(matches!(p.derive(), Err(Error::InvalidParameter(_))), "{key}");
        }
        let p = SystemParams { gamma0: 0.0, ..fig1() };
        assert!(p.derive().is_err());
    }

    #[test]
    fn fano_toggle_only_touches_imaginary_coupling() {
        let p = SystemParams { delta_0c: 3.0, delta_0l: -1.0, kappa_n: 0.2, ..fig1() };
        let on = p.derive().unwrap();
        let off = p.with_fano(false).derive().unwrap();
        assert_eq!(off.g_f.im, 0.0);
        assert_eq!(on.g_f.re, off.g_f.re);
        assert_relative_eq!(on.g_f.im, -(0.3f64).sqrt() / 2.0);
        assert_eq!(on.q, off.q);
        assert_eq!(on.delta_c, off.delta_c);
        assert_eq!(on.delta_0, off.delta_0);
        assert_eq!(on.kappa, off.kappa);
        assert_eq!(on.beta_gamma, off.beta_gamma);
    }

    #[test]
    fn no_common_cavity_channel_means_real_coupling() {
        let p = SystemParams { g: 2.0, kappa0: 0.0, kappa_n: 1.0, ..Default::default() };
        let d = p.derive().unwrap();
        assert_eq!(d.g_f, Complex64::new(2.0, 0.0));
        assert!(!d.q_defined());
    }

    #[test]
    fn cavity_laser_detuning_identity() {
        let p = SystemParams { delta_0c: 19.25, delta_0l: 27.45, ..fig1() };
        assert_eq!(p.delta_cl(), 27.45 - 19.25);
        assert_eq!(p.derive().unwrap().delta_c.re, p.delta_0l - p.delta_0c);
        let moved = p.with_delta_cl(8.2);
        assert_eq!(moved.delta_0c, 19.25);
        assert_eq!(moved.delta_0l, 19.25 + 8.2);
    }

    #[test]
    fn config_round_trip_and_unknown_keys() {
        let text = "g = 15\nkappa0 = 0.3\ngamma_n = 0.01\ndelta_0L = 8.2\nfano_enabled = false\n";
        let mut p = SystemParams::default();
        p.merge_config_str(text).unwrap();
        assert_eq!(p.g, 15.0);
        assert_eq!(p.delta_0l, 8.2);
        assert!(!p.fano_enabled);
        let parsed = SystemParams::from_config_str(&p.to_config_string()).unwrap();
        assert_eq!(parsed, p);

        assert!(matches!(
            SystemParams::from_config_str("g = 1\nbogus = 2\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(p.merge_config_str("bogus = 2"), Err(Error::UnknownKey(_))));
        assert!(matches!(p.set_str("nope=1"), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn set_str_parses_values() {
        let mut p = SystemParams::default();
        p.set_str("kappa0 = 17").unwrap();
        p.set_str("fano_enabled=false").unwrap();
        assert_eq!(p.kappa0, 17.0);
        assert!(!p.fano_enabled);
        assert!(p.set_str("kappa0").is_err());
        assert!(p.set_str("kappa0=abc").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = SystemParams> {
            (0.0..30.0f64, 0.01..20.0f64, 0.0..5.0f64, 0.1..3.0f64, 0.0..5.0f64, -50.0..50.0f64, -50.0..50.0f64)
                .prop_map(|(g, kappa0, kappa_n, gamma0, gamma_n, delta_0c, delta_0l)| SystemParams {
                    g,
                    kappa0,
                    kappa_n,
                    gamma0,
                    gamma_n,
                    delta_0c,
                    delta_0l,
                    omega_0: 1e-3,
                    ..Default::default()
                })
        }

        proptest! {
            #[test]
            fn derive_is_deterministic(p in params()) {
                let a = p.derive().unwrap();
                let b = p.derive().unwrap();
                prop_assert_eq!(a.q.to_bits(), b.q.to_bits());
                prop_assert_eq!(a.g_f.im.to_bits(), b.g_f.im.to_bits());
                prop_assert_eq!(a.delta_c.re.to_bits(), b.delta_c.re.to_bits());
            }

            #[test]
            fn betas_in_unit_interval(p in params()) {
                let d = p.derive().unwrap();
                prop_assert!((0.0..1.0).contains(&d.beta_kappa));
                prop_assert!((0.0..1.0).contains(&d.beta_gamma));
            }

            #[test]
            fn q_scale_invariant(p in params(), s in 0.01..100.0f64) {
                let scaled = SystemParams { g: s * p.g, kappa0: s * p.kappa0, gamma0: s * p.gamma0, ..p };
                let (a, b) = (p.derive().unwrap().q, scaled.derive().unwrap().q);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
