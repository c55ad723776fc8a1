//! Closed-form rates in the Lamb-Dicke regime.
//!
//! The weak-drive rates are assembled from nine transition amplitudes, all
//! built on the characteristic polynomial
//! `f(x) = (x + delta_c + i kappa/2)(x + Delta + i gamma/2) - g~^2`.
//! Heating (`+`) amplitudes evaluate `f(-nu)`, cooling (`-`) amplitudes
//! evaluate `f(+nu)`.

mod dressed;
mod limits;

pub use dressed::{dressed_states, excitation_spectrum, DressedStates};
pub use limits::{
    limit_bad_cavity, limit_heating_suppression, limit_interference_delta0, limit_sideband,
    rates_smallk_saturating, standing_wave_rates, HeatingSuppressionLimit, InterferenceLimit,
    SidebandLimit,
};

use crate::error::{Error, PoleSite, Result};
use crate::model::{derive_geometry, EmissionPattern, SystemParams, NU};
use crate::C64;

/// Default lower bound on `|f|` (units of `nu^2`) below which amplitudes
/// are reported as an exact pole.
pub const POLE_FLOOR: f64 = 1e-12;

/// Mean phonon number at steady state, or a heating flag when `A- <= A+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyState {
    Cooling(f64),
    Heating,
}

impl SteadyState {
    pub fn value(&self) -> Option<f64> {
        match *self {
            SteadyState::Cooling(n) => Some(n),
            SteadyState::Heating => None,
        }
    }

    pub fn is_heating(&self) -> bool {
        matches!(self, SteadyState::Heating)
    }
}

/// Heating/cooling rates and the quantities derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub a_plus: f64,
    pub a_minus: f64,
    /// Diffusion coefficient from recoil of spontaneous emission.
    pub d: f64,
    /// Cooling rate `eta^2 (A- - A+)`; negative in a heating region.
    pub w: f64,
    pub n_st: SteadyState,
}

impl RateResult {
    pub fn from_rates(a_plus: f64, a_minus: f64, d: f64, eta: f64) -> Self {
        let n_st = if a_minus > a_plus {
            SteadyState::Cooling(a_plus / (a_minus - a_plus))
        } else {
            SteadyState::Heating
        };
        RateResult {
            a_plus,
            a_minus,
            d,
            w: eta * eta * (a_minus - a_plus),
            n_st,
        }
    }
}

/// Transition amplitudes entering the weak-drive rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeSet {
    /// Carrier excitation; sets the diffusion.
    pub t_s: C64,
    pub t_l_gamma_plus: C64,
    pub t_l_gamma_minus: C64,
    pub t_l_kappa_plus: C64,
    pub t_l_kappa_minus: C64,
    pub t_c_gamma_plus: C64,
    pub t_c_gamma_minus: C64,
    pub t_c_kappa_plus: C64,
    pub t_c_kappa_minus: C64,
}

impl SystemParams {
    /// Zeroth-order atom-cavity coupling `g cos(phi)`.
    pub fn g_tilde(&self) -> f64 {
        self.g * crate::model::clean_cos(self.phi)
    }
}

fn poly_f(x: f64, p: &SystemParams, g_tilde: f64) -> C64 {
    C64::new(x + p.delta_c, 0.5 * p.kappa) * C64::new(x + p.delta, 0.5 * p.gamma)
        - g_tilde * g_tilde
}

pub fn char_poly_f(x: f64, p: &SystemParams) -> C64 {
    poly_f(x, p, p.g_tilde())
}

fn guarded(value: C64, site: PoleSite, floor: f64) -> Result<C64> {
    let magnitude = value.norm();
    if magnitude < floor {
        Err(Error::PoleAtResonance {
            site,
            magnitude,
            floor,
        })
    } else {
        Ok(value)
    }
}

pub fn amplitudes(p: &SystemParams) -> Result<AmplitudeSet> {
    amplitudes_with(p, POLE_FLOOR)
}

pub fn amplitudes_with(p: &SystemParams, pole_floor: f64) -> Result<AmplitudeSet> {
    amplitudes_at(p, NU, pole_floor)
}

/// Amplitudes with the trap frequency passed explicitly; `nu -> -nu`
/// exchanges the heating and cooling branches.
pub(crate) fn amplitudes_at(p: &SystemParams, nu: f64, pole_floor: f64) -> Result<AmplitudeSet> {
    let g = p.g_tilde();
    let i = C64::i();
    let omega = p.omega;
    let f0 = guarded(poly_f(0.0, p, g), PoleSite::Carrier, pole_floor)?;
    let f_heat = guarded(poly_f(-nu, p, g), PoleSite::Heating, pole_floor)?;
    let f_cool = guarded(poly_f(nu, p, g), PoleSite::Cooling, pole_floor)?;
    let cav = C64::new(p.delta_c, 0.5 * p.kappa);

    let t_l_gamma = |s: f64, f: C64| i * omega * C64::new(p.delta_c - s * nu, 0.5 * p.kappa) / f;
    let t_l_kappa = |f: C64| i * omega * g / f;
    let t_c_gamma =
        |s: f64, f: C64| -omega * g * g * C64::new(2.0 * p.delta_c - s * nu, p.kappa) / (f0 * f);
    let t_c_kappa = |s: f64, f: C64| {
        -omega * g * (C64::new(p.delta - s * nu, 0.5 * p.gamma) * cav + g * g) / (f0 * f)
    };

    Ok(AmplitudeSet {
        t_s: omega * cav / f0,
        t_l_gamma_plus: t_l_gamma(1.0, f_heat),
        t_l_gamma_minus: t_l_gamma(-1.0, f_cool),
        t_l_kappa_plus: t_l_kappa(f_heat),
        t_l_kappa_minus: t_l_kappa(f_cool),
        t_c_gamma_plus: t_c_gamma(1.0, f_heat),
        t_c_gamma_minus: t_c_gamma(-1.0, f_cool),
        t_c_kappa_plus: t_c_kappa(1.0, f_heat),
        t_c_kappa_minus: t_c_kappa(-1.0, f_cool),
    })
}

/// `(A+, A-, D)` from a set of amplitudes and the force projections.
pub(crate) fn assemble_rates(
    amp: &AmplitudeSet,
    p: &SystemParams,
    phi_l: f64,
    phi_c: f64,
    alpha: f64,
) -> (f64, f64, f64) {
    let diffusive = p.gamma * alpha * amp.t_s.norm_sqr();
    let channel = |tl_g: C64, tc_g: C64, tl_k: C64, tc_k: C64| {
        p.gamma * (phi_l * tl_g + phi_c * tc_g).norm_sqr()
            + p.kappa * (phi_l * tl_k + phi_c * tc_k).norm_sqr()
    };
    let a_plus = diffusive
        + channel(
            amp.t_l_gamma_plus,
            amp.t_c_gamma_plus,
            amp.t_l_kappa_plus,
            amp.t_c_kappa_plus,
        );
    let a_minus = diffusive
        + channel(
            amp.t_l_gamma_minus,
            amp.t_c_gamma_minus,
            amp.t_l_kappa_minus,
            amp.t_c_kappa_minus,
        );
    (a_plus, a_minus, 0.5 * diffusive)
}

/// Weak-drive heating and cooling rates: spontaneous-emission recoil,
/// scattering into free space and scattering through the cavity mirrors.
pub fn rates_weak_drive(p: &SystemParams, e: &EmissionPattern) -> Result<RateResult> {
    let geo = derive_geometry(p)?;
    let amp = amplitudes(p)?;
    let (a_plus, a_minus, d) = assemble_rates(&amp, p, geo.phi_l_coef, geo.phi_c_coef, e.alpha());
    Ok(RateResult::from_rates(a_plus, a_minus, d, p.eta))
}

/// Atom detuning that puts the red sideband on an atom-cavity resonance,
/// i.e. the root of `Re f(nu) = 0` in `Delta`.
pub fn delta_opt(delta_c: f64, p: &SystemParams) -> Result<f64> {
    let denom = delta_c + NU;
    if denom.abs() < 1e-15 {
        return Err(Error::DivergentOptimum);
    }
    let g = p.g_tilde();
    Ok((g * g + 0.25 * p.gamma * p.kappa) / denom - NU)
}
