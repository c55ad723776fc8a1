//! Physical parameters, derived geometric couplings and the spontaneous
//! emission angular pattern.
//!
//! Every frequency and rate is expressed in units of the trap frequency
//! `nu`, with hbar = 1. Mass, wavenumber and hbar only enter through
//! [`lamb_dicke_from_physical`].

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

/// Trap frequency. It anchors the unit system and is exactly one.
pub const NU: f64 = 1.0;

/// Cosines smaller than this are treated as exact zeros, so that angles
/// such as `pi/2` produce vanishing projections instead of `6e-17`.
const COS_ZERO: f64 = 1e-14;

/// Laser configuration along the trap axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// `Omega (exp(i k x cos theta_L) sigma^dag + h.c.)`.
    TravelingWave,
    /// `Omega cos(k x cos theta_L + phase) (sigma^dag + sigma)`; the trap
    /// centre sits at a node when `phase = pi/2`.
    StandingWave { phase: f64 },
}

impl Drive {
    /// True for a standing wave whose node is at the trap centre.
    pub fn is_node(&self) -> bool {
        match *self {
            Drive::TravelingWave => false,
            Drive::StandingWave { phase } => phase.cos().abs() < COS_ZERO,
        }
    }
}

/// All physical inputs of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Dipole linewidth.
    pub gamma: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Vacuum Rabi coupling at the antinode.
    pub g: f64,
    /// Phase of the cavity standing wave at the trap centre.
    pub phi: f64,
    /// Laser Rabi frequency.
    pub omega: f64,
    /// Laser-atom detuning `omega_L - omega_0`.
    pub delta: f64,
    /// Laser-cavity detuning `omega_L - omega_c`.
    pub delta_c: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Angle between laser wavevector and trap axis.
    pub theta_l: f64,
    /// Angle between cavity axis and trap axis.
    pub theta_c: f64,
    pub drive: Drive,
}

impl Default for SystemParams {
    /// Good-cavity working point: `g~ = 7`, `gamma = 10`, `kappa = 0.01`,
    /// `Omega = 1`, `eta = 0.1`, all angles `pi/4`.
    fn default() -> Self {
        SystemParams {
            gamma: 10.0,
            kappa: 0.01,
            g: 7.0 * std::f64::consts::SQRT_2,
            phi: FRAC_PI_4,
            omega: 1.0,
            delta: 0.0,
            delta_c: 0.0,
            eta: 0.1,
            theta_l: FRAC_PI_4,
            theta_c: FRAC_PI_4,
            drive: Drive::TravelingWave,
        }
    }
}

impl SystemParams {
    /// Trap frequency (always [`NU`]).
    pub fn nu(&self) -> f64 {
        NU
    }

    /// Atom-cavity detuning `Delta_c = Delta - delta_c`.
    pub fn delta_cav(&self) -> f64 {
        self.delta - self.delta_c
    }

    /// Sets `g` so that the zeroth-order coupling `g cos(phi)` equals
    /// `g_tilde` at the current `phi`.
    pub fn with_g_tilde(mut self, g_tilde: f64) -> Self {
        self.g = g_tilde / clean_cos(self.phi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("g", self.g),
            ("phi", self.phi),
            ("omega", self.omega),
            ("delta", self.delta),
            ("delta_c", self.delta_c),
            ("eta", self.eta),
            ("theta_l", self.theta_l),
            ("theta_c", self.theta_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is not finite"),
                });
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("g", self.g),
            ("omega", self.omega),
            ("eta", self.eta),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is negative"),
                });
            }
        }
        for (name, v) in [("theta_l", self.theta_l), ("theta_c", self.theta_c)] {
            if !(0.0..=std::f64::consts::PI).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is outside [0, pi]"),
                });
            }
        }
        if let Drive::StandingWave { phase } = self.drive {
            if !phase.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "phi_l",
                    reason: "not finite".into(),
                });
            }
        }
        Ok(())
    }
}

pub fn clean_cos(x: f64) -> f64 {
    let c = x.cos();
    if c.abs() < COS_ZERO {
        0.0
    } else {
        c
    }
}

/// Couplings that follow from the setup geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Zeroth-order atom-cavity coupling `g cos(phi)`.
    pub g_tilde: f64,
    /// Laser force projection `cos(theta_L)`.
    pub phi_l_coef: f64,
    /// Cavity force projection `cos(theta_c) tan(phi)`.
    pub phi_c_coef: f64,
    /// One-atom cooperativity `g~^2 / (gamma kappa)`.
    pub c1: f64,
}

pub fn derive_geometry(p: &SystemParams) -> Result<Geometry> {
    let cos_phi = clean_cos(p.phi);
    let cos_c = clean_cos(p.theta_c);
    let phi_c_coef = if cos_c == 0.0 {
        0.0
    } else if cos_phi == 0.0 {
        return Err(Error::DegenerateCoupling);
    } else {
        cos_c * p.phi.sin() / cos_phi
    };
    let g_tilde = p.g * cos_phi;
    Ok(Geometry {
        g_tilde,
        phi_l_coef: clean_cos(p.theta_l),
        phi_c_coef,
        c1: g_tilde * g_tilde / (p.gamma * p.kappa),
    })
}

/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// `eta = k sqrt(hbar / (2 M nu))` from SI inputs (kg, rad/s, 1/m).
pub fn lamb_dicke_from_physical(mass: f64, trap_freq: f64, wavenumber: f64) -> Result<f64> {
    for (name, v) in [
        ("mass", mass),
        ("trap_freq", trap_freq),
        ("wavenumber", wavenumber),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveInput(name));
        }
    }
    Ok(wavenumber * (HBAR / (2.0 * mass * trap_freq)).sqrt())
}

/// Angular distribution `N(cos theta_0)` of spontaneously emitted photons,
/// projected on the trap axis.
#[derive(Debug, Clone, PartialEq)]
pub enum EmissionKind {
    /// `N(u) = 3/8 (1 + u^2)`.
    Dipole1D,
    /// `N(u) = 1/2`.
    Isotropic,
    /// Piecewise-linear CDF sampled on a uniform grid over `u in [-1, 1]`.
    Tabulated { cdf: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionPattern {
    kind: EmissionKind,
    alpha: f64,
}

impl Default for EmissionPattern {
    fn default() -> Self {
        Self::dipole()
    }
}

impl EmissionPattern {
    pub fn dipole() -> Self {
        EmissionPattern {
            kind: EmissionKind::Dipole1D,
            alpha: 0.4,
        }
    }

    pub fn isotropic() -> Self {
        EmissionPattern {
            kind: EmissionKind::Isotropic,
            alpha: 1.0 / 3.0,
        }
    }

    /// Builds a tabulated pattern from CDF values on a uniform grid from
    /// `u = -1` to `u = 1`. The first value must be 0, the last 1.
    pub fn tabulated(cdf: Vec<f64>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidParameter {
            name: "emission",
            reason: reason.to_string(),
        };
        if cdf.len() < 2 {
            return Err(bad("need at least two CDF samples"));
        }
        if cdf.iter().any(|c| !c.is_finite()) {
            return Err(bad("non-finite CDF sample"));
        }
        if cdf[0].abs() > 1e-12 || (cdf[cdf.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(bad("CDF must run from 0 to 1"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(bad("CDF must be nondecreasing"));
        }
        let du = 2.0 / (cdf.len() - 1) as f64;
        let alpha = cdf
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let a = -1.0 + i as f64 * du;
                let b = a + du;
                (w[1] - w[0]) * (b.powi(3) - a.powi(3)) / (3.0 * du)
            })
            .sum::<f64>();
        if alpha <= 0.0 {
            return Err(bad("second moment vanishes"));
        }
        Ok(EmissionPattern {
            kind: EmissionKind::Tabulated { cdf },
            alpha,
        })
    }

    pub fn kind(&self) -> &EmissionKind {
        &self.kind
    }

    /// Second moment `alpha = <cos^2 theta_0>`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            EmissionKind::Dipole1D => "dipole",
            EmissionKind::Isotropic => "isotropic",
            EmissionKind::Tabulated { .. } => "tabulated",
        }
    }

    /// Probability density on `u = cos theta_0`.
    pub fn density(&self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        match &self.kind {
            EmissionKind::Dipole1D => 0.375 * (1.0 + u * u),
            EmissionKind::Isotropic => 0.5,
            EmissionKind::Tabulated { cdf } => {
                let du = 2.0 / (cdf.len() - 1) as f64;
                let i = (((u + 1.0) / du) as usize).min(cdf.len() - 2);
                (cdf[i + 1] - cdf[i]) / du
            }
        }
    }

    /// Cumulative distribution on `u = cos theta_0`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match &self.kind {
            EmissionKind::Dipole1D => 0.5 + 0.375 * (u + u * u * u / 3.0),
            EmissionKind::Isotropic => 0.5 * (u + 1.0),
            EmissionKind::Tabulated { cdf } => {
                let du = 2.0 / (cdf.len() - 1) as f64;
                let x = (u + 1.0) / du;
                let i = (x as usize).min(cdf.len() - 2);
                let t = x - i as f64;
                cdf[i] + t * (cdf[i + 1] - cdf[i])
            }
        }
    }

    /// Inverse CDF tabulated at `n` equally spaced probabilities `k/(n-1)`.
    pub fn inverse_cdf_table(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        (0..n)
            .map(|k| {
                let target = k as f64 / (n - 1) as f64;
                let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }
}

/// Inverse-CDF sampler for `cos theta_0` built on a uniform tabulation.
#[derive(Debug, Clone)]
pub struct AngleSampler {
    table: Vec<f64>,
}

impl AngleSampler {
    pub const DEFAULT_POINTS: usize = 1024;

    pub fn new(pattern: &EmissionPattern) -> Self {
        AngleSampler {
            table: pattern.inverse_cdf_table(Self::DEFAULT_POINTS),
        }
    }

    /// Maps a uniform variate in `[0, 1)` to `cos theta_0`.
    pub fn sample(&self, r: f64) -> f64 {
        let x = r.clamp(0.0, 1.0) * (self.table.len() - 1) as f64;
        let i = (x as usize).min(self.table.len() - 2);
        let t = x - i as f64;
        self.table[i] + t * (self.table[i + 1] - self.table[i])
    }
}
