use serde::{Deserialize, Serialize};

use super::C64;
use crate::model::ModeSystem;
use crate::{Error, Result};

pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Site {
    A,
    B,
    C,
}

impl Site {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Site::A),
            "B" => Ok(Site::B),
            "C" => Ok(Site::C),
            _ => Err(Error::InvalidInput(format!("unknown site '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// Uncoupled oscillators A, B, C.
    Site,
    /// Eigenmodes 1, 2, 3 of the given mode system.
    Eigen(ModeSystem),
}

/// One phonon shared among three oscillators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhononState {
    pub amplitudes: [C64; 3],
    pub basis: Basis,
}

impl SinglePhononState {
    pub fn new(amplitudes: [C64; 3], basis: Basis) -> Result<Self> {
        let s = Self { amplitudes, basis };
        s.check_normalized()?;
        Ok(s)
    }

    /// Phonon localized at `site`.
    pub fn at_site(site: Site) -> Self {
        let mut amplitudes = [C64::new(0.0, 0.0); 3];
        amplitudes[site.index()] = C64::new(1.0, 0.0);
        Self { amplitudes, basis: Basis::Site }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// Amplitudes in the site basis.
    pub fn site_amplitudes(&self) -> [C64; 3] {
        match &self.basis {
            Basis::Site => self.amplitudes,
            Basis::Eigen(ms) => eigen_to_site(ms, &self.amplitudes),
        }
    }

    pub fn to_site(&self) -> Self {
        Self { amplitudes: self.site_amplitudes(), basis: Basis::Site }
    }

    pub fn to_eigen(&self, modes: &ModeSystem) -> Self {
        Self {
            amplitudes: site_to_eigen(modes, &self.site_amplitudes()),
            basis: Basis::Eigen(*modes),
        }
    }

    /// ⟨self|other⟩, basis-independent.
    pub fn inner(&self, other: &Self) -> C64 {
        let a = self.site_amplitudes();
        let b = other.site_amplitudes();
        (0..3).map(|i| a[i].conj() * b[i]).sum()
    }

    /// |amplitude|² on each band of `modes`.
    pub fn band_populations(&self, modes: &ModeSystem) -> [f64; 3] {
        self.to_eigen(modes).amplitudes.map(|a| a.norm_sqr())
    }
}

pub(crate) fn site_to_eigen(ms: &ModeSystem, site: &[C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|j| (0..3).map(|i| site[i] * ms.eigenvectors[j][i]).sum())
}

pub(crate) fn eigen_to_site(ms: &ModeSystem, eigen: &[C64; 3]) -> [C64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|j| eigen[j] * ms.eigenvectors[j][i]).sum())
}

/// Site → eigenbasis of `modes`; eigen → site (using the state's own mode system).
pub fn change_basis(state: &SinglePhononState, modes: &ModeSystem) -> Result<SinglePhononState> {
    state.check_normalized()?;
    Ok(match state.basis {
        Basis::Site => state.to_eigen(modes),
        Basis::Eigen(_) => state.to_site(),
    })
}
