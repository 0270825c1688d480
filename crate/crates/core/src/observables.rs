use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intensities below this are treated as an undriven cavity.
pub const MIN_INTENSITY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Analytic,
    Wavefunction,
    Oracle,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Analytic => "analytic",
            SolverKind::Wavefunction => "wavefunction",
            SolverKind::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(SolverKind::Analytic),
            "wavefunction" | "wf" => Ok(SolverKind::Wavefunction),
            "oracle" | "lindblad" => Ok(SolverKind::Oracle),
            other => Err(Error::InvalidParameter(format!("unknown solver `{other}`"))),
        }
    }
}

/// Photon statistics of the cavity field at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSet {
    pub n_c: f64,
    pub g2: f64,
    /// Non-coherent (sub-Poissonian) part of g2 - 1.
    pub i0: f64,
    /// Squeezing part of g2 - 1, closing the identity 1 + I0 + I2 = g2.
    pub i2: f64,
    /// The squeezing term evaluated from its own moment expression. Equals
    /// `i2` whenever `n_c = |<c>|^2`.
    pub i2_direct: f64,
    /// g2 without interference over g2 with it, when requested.
    pub eta: Option<f64>,
    pub mean_field: Complex64,
    pub pair_amplitude: Complex64,
    pub correlation: f64,
    pub solver: SolverKind,
}

/// Which scalar to read out of an [`ObservableSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "n_c")]
    Intensity,
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "I0")]
    I0,
    #[serde(rename = "I2")]
    I2,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::Intensity, Observable::G2, Observable::Eta, Observable::I0, Observable::I2];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Intensity => "n_c",
            Observable::G2 => "g2",
            Observable::Eta => "eta",
            Observable::I0 => "I0",
            Observable::I2 => "I2",
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown observable `{s}`")))
    }
}

impl ObservableSet {
    /// Builds the set from the normally ordered moments
    /// `n = <c+c>`, `a = <c>`, `a2 = <cc>` and `corr = <c+c+cc>`.
    pub fn from_moments(
        n: f64,
        a: Complex64,
        a2: Complex64,
        corr: f64,
        solver: SolverKind,
    ) -> Result<Self> {
        if !(n >= MIN_INTENSITY) {
            return Err(Error::ZeroIntensity(n));
        }
        let n2 = n * n;
        let g2 = corr / n2;
        let a_abs4 = a.norm_sqr().powi(2);
        let cross = (a.conj() * a.conj() * a2).re;
        let i0 = (corr + a_abs4 - 2.0 * cross) / n2;
        let i2_direct = 2.0 * (cross - a_abs4) / n2;
        Ok(Self {
            n_c: n,
            g2,
            i0,
            i2: g2 - 1.0 - i0,
            i2_direct,
            eta: None,
            mean_field: a,
            pair_amplitude: a2,
            correlation: corr,
            solver,
        })
    }

    pub fn get(&self, obs: Observable) -> Option<f64> {
        match obs {
            Observable::Intensity => Some(self.n_c),
            Observable::G2 => Some(self.g2),
            Observable::Eta => self.eta,
            Observable::I0 => Some(self.i0),
            Observable::I2 => Some(self.i2),
        }
    }

    /// Relative misfit of 1 + I0 + I2 against g2.
    pub fn decomposition_residual(&self) -> f64 {
        ((1.0 + self.i0 + self.i2) - self.g2).abs() / self.g2.abs().max(1.0)
    }

    /// 1 - |<c>|^4 / n_c^2: how far the field is from having all of its
    /// intensity in the coherent part.
    pub fn coherent_defect(&self) -> f64 {
        1.0 - self.mean_field.norm_sqr().powi(2) / (self.n_c * self.n_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_moments_give_poissonian_statistics() {
        let a = Complex64::new(0.3, -0.1);
        let n = a.norm_sqr();
        let s = ObservableSet::from_moments(n, a, a * a, n * n, SolverKind::Oracle).unwrap();
        assert!((s.g2 - 1.0).abs() < 1e-14);
        assert!(s.i0.abs() < 1e-14);
        assert!(s.i2.abs() < 1e-14);
        assert!(s.i2_direct.abs() < 1e-14);
    }

    #[test]
    fn zero_intensity_rejected() {
        let z = Complex64::new(0.0, 0.0);
        assert!(matches!(
            ObservableSet::from_moments(0.0, z, z, 0.0, SolverKind::Wavefunction),
            Err(Error::ZeroIntensity(_))
        ));
        assert!(ObservableSet::from_moments(f64::NAN, z, z, 0.0, SolverKind::Wavefunction).is_err());
    }

    #[test]
    fn observable_names_parse() {
        for o in Observable::ALL {
            assert_eq!(o.name().parse::<Observable>().unwrap(), o);
        }
        assert!("bogus".parse::<Observable>().is_err());
    }
}
