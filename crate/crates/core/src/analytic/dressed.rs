use crate::model::SystemParams;
use crate::C64;

/// Single-excitation atom-cavity eigenstates
/// `|+> = sin(theta)|g,1> + cos(theta)|e,0>` and
/// `|-> = cos(theta)|g,1> - sin(theta)|e,0>`.
///
/// The frequencies are measured in the frame rotating at the cavity
/// frequency, so the laser is resonant with `|+-> ` when
/// `delta_c = lambda_+-`, i.e. at `Delta = Delta_c + lambda_+-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedStates {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub theta_mix: f64,
}

impl DressedStates {
    /// Laser-atom detunings `Delta` at which the dressed states are driven
    /// resonantly, `(Delta_c + lambda_+, Delta_c + lambda_-)`.
    pub fn laser_resonances(&self, delta_cav: f64) -> (f64, f64) {
        (delta_cav + self.lambda_plus, delta_cav + self.lambda_minus)
    }
}

pub fn dressed_states(p: &SystemParams) -> DressedStates {
    let g = p.g_tilde().abs();
    let dc = p.delta_cav();
    let root = (g * g + 0.25 * dc * dc).sqrt();
    let theta = g.atan2(-0.5 * dc + root);
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    DressedStates {
        lambda_plus: -0.5 * dc + root,
        lambda_minus: -0.5 * dc - root,
        gamma_plus: p.kappa * s2 + p.gamma * c2,
        gamma_minus: p.kappa * c2 + p.gamma * s2,
        theta_mix: theta,
    }
}

/// Weak-probe scattering rate versus laser detuning at fixed atom-cavity
/// detuning `Delta_c = p.delta - p.delta_c`.
///
/// Each entry is `gamma |T_S|^2 + kappa |Omega g~ / f(0)|^2`: photons
/// scattered by spontaneous emission plus photons leaking through the
/// mirrors, in units of `nu`.
pub fn excitation_spectrum(p: &SystemParams, delta_grid: &[f64]) -> Vec<f64> {
    let dc = p.delta_cav();
    let g = p.g_tilde();
    delta_grid
        .iter()
        .map(|&delta| {
            let delta_c = delta - dc;
            let f0 = C64::new(delta_c, 0.5 * p.kappa) * C64::new(delta, 0.5 * p.gamma) - g * g;
            let excited = (p.omega * C64::new(delta_c, 0.5 * p.kappa) / f0).norm_sqr();
            let photons = (p.omega * g / f0).norm_sqr();
            p.gamma * excited + p.kappa * photons
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn working_point(delta_cav_over_gamma: f64) -> SystemParams {
        // nu = 0.2 gamma  =>  gamma = 5 nu
        let gamma = 5.0;
        SystemParams {
            gamma,
            kappa: 0.01 * gamma,
            phi: 0.0,
            g: 0.5 * gamma,
            omega: 0.01,
            delta: 0.0,
            delta_c: -delta_cav_over_gamma * gamma,
            ..Default::default()
        }
    }

    #[test]
    fn symmetric_mixing_on_resonance() {
        let p = SystemParams {
            delta: 2.0,
            delta_c: 2.0,
            phi: 0.0,
            g: 3.0,
            gamma: 1.0,
            kappa: 0.2,
            ..Default::default()
        };
        let d = dressed_states(&p);
        assert!((d.theta_mix - FRAC_PI_4).abs() < 1e-14);
        assert!((d.lambda_plus - 3.0).abs() < 1e-14);
        assert!((d.lambda_minus + 3.0).abs() < 1e-14);
        assert!((d.gamma_plus - 0.6).abs() < 1e-14);
        assert!((d.gamma_minus - 0.6).abs() < 1e-14);
    }

    #[test]
    fn linewidths_sum() {
        for dc in [-30.0, -1.0, 0.3, 12.0] {
            let p = SystemParams {
                delta: dc,
                delta_c: 0.0,
                ..Default::default()
            };
            let d = dressed_states(&p);
            assert!((d.gamma_plus + d.gamma_minus - p.gamma - p.kappa).abs() < 1e-12);
            let tan = p.g_tilde() / (-0.5 * dc + (p.g_tilde().powi(2) + 0.25 * dc * dc).sqrt());
            assert!((d.theta_mix.tan() - tan).abs() < 1e-10 * tan.abs().max(1.0));
        }
    }

    #[test]
    fn interference_dip_at_cavity_resonance() {
        // minimum approaches Delta_c and zero as kappa -> 0
        let offset = |kappa: f64| {
            let p = SystemParams {
                kappa,
                ..working_point(1.2)
            };
            let dc = p.delta_cav();
            let step = 1e-4;
            let grid: Vec<f64> = (-5000..=5000).map(|i| dc + i as f64 * step).collect();
            let s = excitation_spectrum(&p, &grid);
            let lowest = (0..s.len()).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
            let far = excitation_spectrum(&p, &[dc - 0.5, dc + 0.5]);
            (grid[lowest] - dc, s[lowest] / far[0].min(far[1]))
        };
        let (o1, d1) = offset(0.05);
        let (o2, d2) = offset(0.005);
        assert!(o2.abs() < 0.2 * o1.abs(), "{o1} {o2}");
        assert!(d2 < 0.2 * d1, "{d1} {d2}");
        let p = working_point(1.2);
        let lossless = excitation_spectrum(&SystemParams { kappa: 0.0, ..p }, &[p.delta_cav()])[0];
        assert_eq!(lossless, 0.0);
    }

    #[test]
    fn peaks_sit_on_dressed_resonances() {
        let p = working_point(-10.0);
        let dc = p.delta_cav();
        let step = 0.01;
        let grid: Vec<f64> = (0..12001).map(|i| -100.0 + i as f64 * step).collect();
        let s = excitation_spectrum(&p, &grid);
        let peaks: Vec<f64> = (1..s.len() - 1)
            .filter(|&i| s[i] > s[i - 1] && s[i] > s[i + 1])
            .map(|i| grid[i])
            .collect();
        assert_eq!(peaks.len(), 2, "peaks {peaks:?}");
        let (plus, minus) = dressed_states(&p).laser_resonances(dc);
        let mut expected = [plus, minus];
        expected.sort_by(f64::total_cmp);
        for (found, want) in peaks.iter().zip(expected) {
            assert!((found - want).abs() <= step, "{found} vs {want}");
        }
    }
}
