//! Asymptotic rate formulas for the bad-cavity, sideband, interference and
//! standing-wave regimes.
//!
//! These evaluate the printed asymptotic expressions, never the exact
//! weak-drive rates, so the gap between the two can be measured.

use super::{poly_f, RateResult, POLE_FLOOR};
use crate::error::{Error, PoleSite, Result};
use crate::model::{derive_geometry, EmissionPattern, SystemParams, NU};
use crate::C64;

const ZERO_TOL: f64 = 1e-12;

/// Bad-cavity rates, spontaneous emission neglected.
///
/// The cavity enters through its light shift `delta~` and broadening
/// `gamma~`; laser and cavity forces interfere through `a+-`. Both are set
/// by the laser-cavity detuning, `delta~ = g~^2 delta_c / (kappa^2/4 + delta_c^2)`.
pub fn limit_bad_cavity(p: &SystemParams, _e: &EmissionPattern) -> Result<RateResult> {
    let geo = derive_geometry(p)?;
    let dc = p.delta_c;
    let lorentz = 0.25 * p.kappa * p.kappa + dc * dc;
    if lorentz == 0.0 {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "kappa = delta_c = 0 has no bad-cavity limit".into(),
        });
    }
    let g2 = geo.g_tilde * geo.g_tilde;
    let shift = g2 * dc / lorentz;
    let width = g2 * p.kappa / lorentz;
    let detuning = p.delta - shift;
    let prefactor = p.omega * p.omega * width / (detuning * detuning + 0.25 * width * width);
    let i = C64::i();
    let amp = |s: f64| {
        let side = C64::new(detuning - s * NU, 0.5 * width);
        geo.phi_c_coef * (1.0 + 2.0 * C64::new(shift, -0.5 * width) / side)
            - i * geo.phi_l_coef * C64::new(detuning, 0.5 * width) / side
    };
    Ok(RateResult::from_rates(
        prefactor * amp(1.0).norm_sqr(),
        prefactor * amp(-1.0).norm_sqr(),
        0.0,
        p.eta,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SidebandLimit {
    /// Leading order in `1/Delta`.
    pub rates: RateResult,
    /// Steady-state occupation of the leading-order rates, `(1 + B)` form.
    pub n_sideband: f64,
    /// Occupation at the optimum `delta_c = -nu`.
    pub n_min: f64,
    /// Cooling rate at `delta_c = -nu`.
    pub w_min: f64,
    pub b_factor: f64,
    /// Set when `|Delta|` is less than ten times `gamma`, `g~` or `kappa`.
    pub warning: Option<String>,
}

/// Far-detuned atom: sideband cooling on the narrow cavity-like resonance.
pub fn limit_sideband(p: &SystemParams, e: &EmissionPattern) -> Result<SidebandLimit> {
    let geo = derive_geometry(p)?;
    let alpha = e.alpha();
    let (pl2, pc2) = (geo.phi_l_coef.powi(2), geo.phi_c_coef.powi(2));
    let g2 = geo.g_tilde * geo.g_tilde;
    let k2 = 0.25 * p.kappa * p.kappa;
    let scale = p.omega * p.omega / (p.delta * p.delta);
    let free_space = (alpha + pl2) * p.gamma;
    let cavity = g2 * p.kappa * (pl2 + pc2);
    let rate = |s: f64| scale * (free_space + cavity / (k2 + (p.delta_c - s * NU).powi(2)));
    let rates = RateResult::from_rates(rate(1.0), rate(-1.0), 0.5 * scale * alpha * p.gamma, p.eta);

    let ratio = (alpha + pl2) / (pl2 + pc2);
    let b_factor = p.gamma / (g2 * p.kappa) * ratio * (k2 + (p.delta_c - NU).powi(2));
    let n_sideband = (k2 + (p.delta_c + NU).powi(2)) / (4.0 * -p.delta_c * NU) * (1.0 + b_factor);
    let k_over = p.kappa * p.kappa / (16.0 * NU * NU);
    let n_min = k_over + ratio / (4.0 * geo.c1) * (1.0 + k_over);
    let w_min = p.eta.powi(2)
        * 4.0
        * geo.c1
        * (pl2 + pc2)
        * scale
        * p.gamma
        * (1.0 - 1.0 / (1.0 + (4.0 * NU / p.kappa).powi(2)));

    let largest = p.gamma.max(geo.g_tilde.abs()).max(p.kappa);
    let warning = (p.delta.abs() < 10.0 * largest).then(|| {
        format!(
            "|Delta| = {} is not >> max(gamma, g~, kappa) = {}",
            p.delta.abs(),
            largest
        )
    });
    Ok(SidebandLimit {
        rates,
        n_sideband,
        n_min,
        w_min,
        b_factor,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceLimit {
    /// Lossless occupation at the given `Delta`.
    pub n0: f64,
    /// Lossless occupation at `Delta_opt(0)`.
    pub n0_min: f64,
    /// Cooling rate at `Delta_opt(0)`.
    pub w: f64,
    /// Occupation at the given `Delta` with first-order cavity-loss correction.
    pub n_first_order_kappa: f64,
    pub delta_opt: f64,
    /// Set when `kappa` is not well below the narrow dressed linewidth.
    pub warning: Option<String>,
}

/// Narrow dressed linewidth at `delta_c = kappa = 0`.
pub fn narrow_linewidth(p: &SystemParams) -> f64 {
    let g = p.g_tilde();
    0.25 * p.gamma * (1.0 - p.delta.abs() / (p.delta * p.delta + 4.0 * g * g).sqrt())
}

/// Lossless-cavity rate weights `A+-/(Omega^2 (phi_L^2 + phi_c^2))` at
/// `delta_c = 0`.
fn lossless_weights(p: &SystemParams) -> (f64, f64) {
    let g2 = p.g_tilde().powi(2);
    let w = |s: f64| {
        NU * NU * p.gamma / ((NU * (NU - s * p.delta) - g2).powi(2) + 0.25 * (NU * p.gamma).powi(2))
    };
    (w(1.0), w(-1.0))
}

/// Cooling with the carrier suppressed by laser-cavity interference at
/// `delta_c = 0`.
pub fn limit_interference_delta0(
    p: &SystemParams,
    _e: &EmissionPattern,
) -> Result<InterferenceLimit> {
    if p.delta_c.abs() > ZERO_TOL {
        return Err(Error::InvalidParameter {
            name: "delta_c",
            reason: "diffusion suppression requires delta_c = 0".into(),
        });
    }
    let geo = derive_geometry(p)?;
    let g2 = geo.g_tilde * geo.g_tilde;
    let gt = geo.g_tilde.abs();
    let cooling = (p.delta > 0.0 && gt > NU) || (p.delta < 0.0 && gt < NU);
    if !cooling {
        return Err(Error::HeatingRegion(format!(
            "Delta = {}, g~ = {}",
            p.delta, gt
        )));
    }
    let n0 = ((NU * (NU + p.delta) - g2).powi(2) + 0.25 * (p.gamma * NU).powi(2))
        / (4.0 * NU * p.delta * (g2 - NU * NU));
    let n0_min = (p.gamma * NU).powi(2) / (16.0 * (g2 - NU * NU).powi(2));
    let delta_opt = super::delta_opt(0.0, p)?;
    let (pl2, pc2) = (geo.phi_l_coef.powi(2), geo.phi_c_coef.powi(2));
    let w = 4.0 * p.eta.powi(2) * (pl2 + pc2) * p.omega.powi(2) / p.gamma
        * (1.0 - 1.0 / (1.0 + (4.0 * delta_opt / p.gamma).powi(2)));

    let (a_plus, a_minus) = lossless_weights(p);
    let f = (p.kappa / NU).powi(2) * geo.c1 * 0.5 * p.gamma * a_minus
        - 2.0 * p.kappa / NU * a_minus / (a_minus - a_plus) * geo.phi_l_coef * geo.phi_c_coef
            / (pl2 + pc2);
    let gm = narrow_linewidth(p);
    let warning =
        (p.kappa >= 0.1 * gm).then(|| format!("kappa = {} is not << gamma_- = {gm}", p.kappa));
    Ok(InterferenceLimit {
        n0,
        n0_min,
        w,
        n_first_order_kappa: n0 * (1.0 + f),
        delta_opt,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatingSuppressionLimit {
    /// Lossless occupation at the given `Delta`.
    pub n0: f64,
    /// Lossless occupation at `Delta_opt(nu/2)`.
    pub n0_min: f64,
    /// Cooling rate at `Delta_opt(nu/2)`.
    pub w0: f64,
    /// First-order-in-kappa occupation at the given `Delta`.
    pub n_kappa: f64,
    /// First-order-in-kappa occupation at `Delta_opt(nu/2)`, in the
    /// `1/C1` form.
    pub n_kappa_opt: f64,
}

/// Cooling with the blue cavity sideband cancelled at `delta_c = nu/2`,
/// laser orthogonal to the trap axis.
pub fn limit_heating_suppression(
    p: &SystemParams,
    e: &EmissionPattern,
) -> Result<HeatingSuppressionLimit> {
    let geo = derive_geometry(p)?;
    if geo.phi_l_coef.abs() > ZERO_TOL {
        return Err(Error::GeometryViolation(format!(
            "requires phi_L = 0, got {}",
            geo.phi_l_coef
        )));
    }
    if (p.delta_c - 0.5 * NU).abs() > ZERO_TOL {
        return Err(Error::InvalidParameter {
            name: "delta_c",
            reason: "heating suppression requires delta_c = nu/2".into(),
        });
    }
    let alpha = e.alpha();
    let g2 = geo.g_tilde * geo.g_tilde;
    let pc2 = geo.phi_c_coef.powi(2);
    let gamma = p.gamma;
    let shifted = p.delta + NU;
    let core = 9.0 * (gamma * NU).powi(2) / 16.0 + (g2 - 1.5 * NU * shifted).powi(2);
    let n0 = alpha * core / (16.0 * g2 * g2 * pc2);
    let n0_min = 9.0 * alpha / (16.0 * pc2) * (gamma * NU).powi(2) / (16.0 * g2 * g2);
    let w0 = 16.0 * p.eta.powi(2) * p.omega.powi(2) / gamma * pc2
        / ((1.0 + 0.75 * NU * NU / g2).powi(2) + (3.0 * gamma * NU / (8.0 * g2)).powi(2));
    let f = 0.5
        * (g2 * gamma / core + (0.25 * gamma * gamma + shifted * shifted) / (g2 * gamma)
            - 2.0 * shifted / (gamma * NU));
    let g = core / (4.0 * g2 * gamma * NU * NU);
    let n_kappa = n0 * (1.0 + p.kappa * f) + p.kappa * g;
    let n_kappa_opt = (1.0 + 1.0 / (8.0 * geo.c1)) * n0_min + (alpha / pc2 + 9.0) / (64.0 * geo.c1);
    Ok(HeatingSuppressionLimit {
        n0,
        n0_min,
        w0,
        n_kappa,
        n_kappa_opt,
    })
}

/// Rates for a standing-wave drive with the trap centre at a node: no
/// carrier scattering, hence no diffusion.
///
/// The laser force is proportional to `cos(theta_L)`, so the rates carry
/// a factor `phi_L^2` (unity for a laser along the trap axis).
pub fn standing_wave_rates(p: &SystemParams, _e: &EmissionPattern) -> Result<RateResult> {
    if !p.drive.is_node() {
        return Err(Error::GeometryViolation(
            "standing-wave rates require a drive node at the trap centre".into(),
        ));
    }
    let geo = derive_geometry(p)?;
    let g = geo.g_tilde;
    let rate = |s: f64, site: PoleSite| -> Result<f64> {
        let f = poly_f(-s * NU, p, g);
        if f.norm() < POLE_FLOOR {
            return Err(Error::PoleAtResonance {
                site,
                magnitude: f.norm(),
                floor: POLE_FLOOR,
            });
        }
        let t_gamma = p.omega * C64::new(p.delta_c - s * NU, 0.5 * p.kappa) / f;
        let t_kappa = p.omega * g / f;
        Ok(geo.phi_l_coef.powi(2) * (p.gamma * t_gamma.norm_sqr() + p.kappa * t_kappa.norm_sqr()))
    };
    Ok(RateResult::from_rates(
        rate(1.0, PoleSite::Heating)?,
        rate(-1.0, PoleSite::Cooling)?,
        0.0,
        p.eta,
    ))
}

/// Rates at `delta_c = 0` for arbitrary drive strength, to first order in
/// the cavity loss.
pub fn rates_smallk_saturating(p: &SystemParams, _e: &EmissionPattern) -> Result<RateResult> {
    if p.delta_c.abs() > ZERO_TOL {
        return Err(Error::InvalidParameter {
            name: "delta_c",
            reason: "small-kappa rates require delta_c = 0".into(),
        });
    }
    let geo = derive_geometry(p)?;
    if geo.g_tilde == 0.0 {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "small-kappa rates require g~ != 0".into(),
        });
    }
    let gamma_minus = narrow_linewidth(p);
    if p.kappa >= gamma_minus {
        return Err(Error::ExpansionInvalid {
            kappa: p.kappa,
            gamma_minus,
        });
    }
    let (pl, pc) = (geo.phi_l_coef, geo.phi_c_coef);
    let proj = pl * pl + pc * pc;
    let g2 = geo.g_tilde * geo.g_tilde;
    let (w_plus, w_minus) = lossless_weights(p);
    let xi = |s: f64, weight: f64| {
        let loss = if p.kappa == 0.0 {
            0.0
        } else {
            (p.kappa / NU).powi(2) * geo.c1 * (1.0 - 0.5 * p.gamma * weight) * proj
                - pc * pc / (2.0 * geo.c1)
        };
        loss + p.kappa / NU * (p.delta * NU / g2 - s) * pl * pc
    };
    let o2 = p.omega * p.omega;
    Ok(RateResult::from_rates(
        o2 * w_plus * (proj + xi(1.0, w_plus)),
        o2 * w_minus * (proj + xi(-1.0, w_minus)),
        0.0,
        p.eta,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::{amplitudes, delta_opt, rates_weak_drive};
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn e() -> EmissionPattern {
        EmissionPattern::dipole()
    }

    fn base() -> SystemParams {
        SystemParams::default().with_g_tilde(7.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bad_cavity_laser_only_factor() {
        let p = SystemParams {
            theta_c: FRAC_PI_2,
            gamma: 0.0,
            kappa: 20.0,
            delta: 3.0,
            delta_c: -4.0,
            ..base()
        };
        let r = limit_bad_cavity(&p, &e()).unwrap();
        let g2 = 49.0;
        let dc = p.delta_c;
        let lor = p.kappa * p.kappa / 4.0 + dc * dc;
        let (shift, width) = (g2 * dc / lor, g2 * p.kappa / lor);
        let pre = p.omega.powi(2) * width / ((p.delta - shift).powi(2) + width * width / 4.0);
        let ratio = |s: f64| {
            (C64::new(p.delta - shift, width / 2.0) / C64::new(p.delta - shift - s, width / 2.0))
                .norm_sqr()
        };
        let pl2 = 0.5;
        assert!(rel(r.a_plus, pre * pl2 * ratio(1.0)) < 1e-12);
        assert!(rel(r.a_minus, pre * pl2 * ratio(-1.0)) < 1e-12);
    }

    #[test]
    fn bad_cavity_red_resonance_cools_to_ground() {
        let p = SystemParams {
            gamma: 0.0,
            kappa: 1e-3,
            delta_c: -40.0,
            ..base()
        };
        let shift = 49.0 * p.delta_c / (p.kappa * p.kappa / 4.0 + p.delta_c * p.delta_c);
        let r = limit_bad_cavity(
            &SystemParams {
                delta: shift - 1.0,
                ..p
            },
            &e(),
        )
        .unwrap();
        assert!(r.a_minus > 1e3 * r.a_plus);
        assert!(r.n_st.value().unwrap() < 1e-3);
    }

    #[test]
    fn bad_cavity_matches_exact_rates() {
        let err = |scale: f64, offset: f64| {
            let (kappa, delta_c) = (8.0 * scale, -50.0 * scale);
            let shift = 49.0 * delta_c / (kappa * kappa / 4.0 + delta_c * delta_c);
            let p = SystemParams {
                gamma: 1e-4,
                kappa,
                delta_c,
                delta: shift + offset,
                ..base()
            };
            let exact = rates_weak_drive(&p, &e()).unwrap();
            let approx = limit_bad_cavity(&p, &e()).unwrap();
            rel(approx.a_plus, exact.a_plus).max(rel(approx.a_minus, exact.a_minus))
        };
        assert!(err(1.0, 2.0) < 0.05);
        // on the cooling sideband the error falls as nu/kappa and nu/delta_c shrink
        let errs = [err(1.0, -1.0), err(2.0, -1.0), err(4.0, -1.0)];
        assert!(
            errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 0.02,
            "{errs:?}"
        );
    }

    #[test]
    fn sideband_minimum_limits() {
        let lossless_big = SystemParams {
            kappa: 1e-6,
            delta: -1e4,
            delta_c: -1.0,
            ..base()
        }
        .with_g_tilde(1e4);
        let s = limit_sideband(&lossless_big, &e()).unwrap();
        assert!(s.n_min < 1e-6);
        let p = SystemParams {
            kappa: 1e-9,
            delta: -1e4,
            delta_c: -1.0,
            ..base()
        };
        let s = limit_sideband(&p, &e()).unwrap();
        let geo = derive_geometry(&p).unwrap();
        let expected = (0.4 + 0.5) / (4.0 * geo.c1);
        assert!(rel(s.n_min, expected) < 1e-6);
    }

    #[test]
    fn sideband_matches_exact_rates() {
        // the leading order drops (2 g~^2 / kappa Delta)^2, so |Delta| >> 2000
        let p = SystemParams {
            delta: -1e5,
            delta_c: -1.0,
            kappa: 0.05,
            ..base()
        };
        let exact = rates_weak_drive(&p, &e()).unwrap();
        let s = limit_sideband(&p, &e()).unwrap();
        assert!(s.warning.is_none());
        assert!(rel(s.rates.a_plus, exact.a_plus) < 0.01);
        assert!(rel(s.rates.a_minus, exact.a_minus) < 0.01);
        let n_exact = exact.n_st.value().unwrap();
        assert!(rel(s.rates.n_st.value().unwrap(), n_exact) < 0.02);
        assert!(rel(s.n_sideband, s.rates.n_st.value().unwrap()) < 1e-9);
    }

    #[test]
    fn sideband_error_shrinks_with_detuning() {
        let err = |delta: f64| {
            let p = SystemParams {
                delta,
                delta_c: -1.0,
                kappa: 0.05,
                ..base()
            };
            let exact = rates_weak_drive(&p, &e()).unwrap().a_minus;
            rel(limit_sideband(&p, &e()).unwrap().rates.a_minus, exact)
        };
        let errs = [err(-1e3), err(-1e4), err(-1e5)];
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn sideband_warns_near_resonance() {
        let p = SystemParams {
            delta: -30.0,
            delta_c: -1.0,
            ..base()
        };
        assert!(limit_sideband(&p, &e()).unwrap().warning.is_some());
    }

    #[test]
    fn interference_lossless_minimum() {
        let p = SystemParams {
            kappa: 0.0,
            ..base()
        };
        let d = delta_opt(0.0, &p).unwrap();
        let l = limit_interference_delta0(&SystemParams { delta: d, ..p }, &e()).unwrap();
        assert!(rel(l.n0, p.gamma.powi(2) / (16.0 * d * d)) < 1e-12);
        assert!(rel(l.n0, l.n0_min) < 1e-12);
        // exact lossless rates agree at every Delta
        for delta in [5.0, 30.0, d, 80.0] {
            let q = SystemParams { delta, ..p };
            let n = rates_weak_drive(&q, &e()).unwrap().n_st.value().unwrap();
            let l = limit_interference_delta0(&q, &e()).unwrap();
            assert!(rel(l.n0, n) < 1e-9, "{delta}: {} vs {n}", l.n0);
        }
    }

    #[test]
    fn interference_large_coupling_correction() {
        let p = base().with_g_tilde(60.0);
        let d = delta_opt(0.0, &p).unwrap();
        let l = limit_interference_delta0(&SystemParams { delta: d, ..p }, &e()).unwrap();
        let geo = derive_geometry(&p).unwrap();
        let approx = (p.gamma).powi(2) / (16.0 * 60f64.powi(4)) + 1.0 / (8.0 * geo.c1);
        assert!(
            rel(l.n_first_order_kappa, approx) < 0.02,
            "{} vs {approx}",
            l.n_first_order_kappa
        );
    }

    #[test]
    fn interference_heating_region() {
        let p = SystemParams {
            delta: -5.0,
            ..base()
        };
        assert!(matches!(
            limit_interference_delta0(&p, &e()),
            Err(Error::HeatingRegion(_))
        ));
        let weak = SystemParams {
            delta: -5.0,
            ..base()
        }
        .with_g_tilde(0.5);
        assert!(limit_interference_delta0(&weak, &e()).is_ok());
        let off = SystemParams {
            delta_c: 0.3,
            delta: 5.0,
            ..base()
        };
        assert!(limit_interference_delta0(&off, &e()).is_err());
    }

    #[test]
    fn interference_first_order_matches_exact() {
        let err = |kappa: f64| {
            let p = SystemParams { kappa, ..base() };
            let q = SystemParams {
                delta: delta_opt(0.0, &p).unwrap(),
                ..p
            };
            let l = limit_interference_delta0(&q, &e()).unwrap();
            let exact = rates_weak_drive(&q, &e()).unwrap().n_st.value().unwrap();
            rel(l.n_first_order_kappa, exact)
        };
        let errs = [err(0.02), err(0.01), err(0.005)];
        assert!(errs[1] < 0.01, "{errs:?}");
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    fn heating_point(kappa: f64) -> SystemParams {
        let p = SystemParams {
            theta_l: FRAC_PI_2,
            delta_c: 0.5,
            kappa,
            ..base()
        };
        SystemParams {
            delta: delta_opt(0.5, &p).unwrap(),
            ..p
        }
    }

    #[test]
    fn heating_suppression_lossless() {
        let p = heating_point(0.0);
        let h = limit_heating_suppression(&p, &e()).unwrap();
        let expected = 9.0 * 0.4 / (16.0 * 0.5) * 100.0 / (16.0 * 49f64.powi(2));
        assert!(rel(h.n0_min, expected) < 1e-12);
        assert!(rel(h.n0, h.n0_min) < 1e-12);
        let exact = rates_weak_drive(&p, &e()).unwrap();
        assert!(rel(exact.n_st.value().unwrap(), h.n0) < 1e-9);
        assert!(rel(exact.w, h.w0) < 1e-9, "{} vs {}", exact.w, h.w0);
        assert!(amplitudes(&p).unwrap().t_c_gamma_plus.norm() < 1e-15);
    }

    #[test]
    fn heating_suppression_small_kappa() {
        let p = heating_point(0.01);
        let h = limit_heating_suppression(&p, &e()).unwrap();
        let exact = rates_weak_drive(&p, &e()).unwrap().n_st.value().unwrap();
        assert!(rel(h.n_kappa, exact) < 0.10, "{} vs {exact}", h.n_kappa);
        assert!(
            rel(h.n_kappa_opt, exact) < 0.10,
            "{} vs {exact}",
            h.n_kappa_opt
        );
        let tilted = SystemParams { theta_l: 1.0, ..p };
        assert!(matches!(
            limit_heating_suppression(&tilted, &e()),
            Err(Error::GeometryViolation(_))
        ));
    }

    fn standing(kappa: f64) -> SystemParams {
        let p = SystemParams {
            theta_l: 0.0,
            delta_c: 1.0,
            kappa,
            drive: crate::model::Drive::StandingWave { phase: FRAC_PI_2 },
            ..base()
        };
        SystemParams {
            delta: delta_opt(1.0, &p).unwrap(),
            ..p
        }
    }

    #[test]
    fn standing_wave_lossless_is_exact() {
        let p = standing(0.0);
        let r = standing_wave_rates(&p, &e()).unwrap();
        assert_eq!(r.a_plus, 0.0);
        assert_eq!(r.n_st, super::super::SteadyState::Cooling(0.0));
        let w = 4.0 * p.eta.powi(2) * p.omega.powi(2) / p.gamma;
        assert!(rel(r.w, w) < 1e-10);
        assert_eq!(r.d, 0.0);
    }

    #[test]
    fn standing_wave_small_kappa() {
        let p = standing(0.01);
        let r = standing_wave_rates(&p, &e()).unwrap();
        let geo = derive_geometry(&p).unwrap();
        assert!(rel(r.n_st.value().unwrap(), 1.0 / (4.0 * geo.c1)) < 0.1);
        assert!(rel(r.a_plus, p.kappa * p.omega.powi(2) / 49.0) < 0.01);
        let traveling = SystemParams {
            drive: crate::model::Drive::TravelingWave,
            ..p
        };
        assert!(standing_wave_rates(&traveling, &e()).is_err());
    }

    #[test]
    fn smallk_reduces_to_lossless_weights() {
        let p = SystemParams {
            kappa: 0.0,
            ..base()
        };
        let q = SystemParams {
            delta: delta_opt(0.0, &p).unwrap(),
            ..p
        };
        let r = rates_smallk_saturating(&q, &e()).unwrap();
        let exact = rates_weak_drive(&q, &e()).unwrap();
        assert!(rel(r.a_plus, exact.a_plus) < 1e-10);
        assert!(rel(r.a_minus, exact.a_minus) < 1e-10);
    }

    #[test]
    fn smallk_equals_linearised_weak_drive() {
        let p = SystemParams {
            omega: 0.1,
            delta: 30.0,
            ..base()
        };
        let at = |kappa: f64| rates_weak_drive(&SystemParams { kappa, ..p }, &e()).unwrap();
        let h = 1e-4;
        let (a0, a1, a2) = (at(0.0), at(0.5 * h), at(h));
        let slope = |f: fn(&RateResult) -> f64| (4.0 * f(&a1) - f(&a2) - 3.0 * f(&a0)) / h;
        let kappa = 0.01;
        let r = rates_smallk_saturating(&SystemParams { kappa, ..p }, &e()).unwrap();
        let lin_plus = a0.a_plus + kappa * slope(|r| r.a_plus);
        let lin_minus = a0.a_minus + kappa * slope(|r| r.a_minus);
        assert!(
            rel(r.a_plus, lin_plus) < 1e-8,
            "{}",
            rel(r.a_plus, lin_plus)
        );
        assert!(
            rel(r.a_minus, lin_minus) < 1e-8,
            "{}",
            rel(r.a_minus, lin_minus)
        );
    }

    #[test]
    fn smallk_matches_first_order_of_weak_drive() {
        // first-order agreement: the gap shrinks as kappa^2
        let gaps: Vec<f64> = [0.004, 0.002, 0.001]
            .iter()
            .map(|&kappa| {
                let p = SystemParams {
                    kappa,
                    omega: 0.1,
                    ..base()
                };
                let q = SystemParams { delta: 30.0, ..p };
                let a = rates_smallk_saturating(&q, &e()).unwrap();
                let b = rates_weak_drive(&q, &e()).unwrap();
                rel(a.a_minus, b.a_minus)
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        let order = (gaps[0] / gaps[2]).log2() / 2.0;
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn smallk_expansion_guard() {
        let p = SystemParams {
            kappa: 1.0,
            delta: 48.0,
            ..base()
        };
        assert!(matches!(
            rates_smallk_saturating(&p, &e()),
            Err(Error::ExpansionInvalid { .. })
        ));
    }

    #[test]
    fn geometry_constants() {
        let geo = derive_geometry(&base()).unwrap();
        assert!((geo.phi_c_coef - FRAC_1_SQRT_2).abs() < 1e-12);
    }
}
