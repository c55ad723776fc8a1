//! Internal (atom + cavity) master equation at zeroth order in `eta`.
//!
//! Operators act on `|s, n>` with `s = g, e` and `n < n_cavity`, stored at
//! index `s * n_cavity + n`. Superoperators use column stacking,
//! `vec(A X B) = (B^T (x) A) vec(X)`.

use serde::Serialize;

use crate::analytic::RateResult;
use crate::error::{Error, Result};
use crate::linalg::{
    self, dagger, gmres, kron, lu_solve, trace, unvec, vec_of, CMatrix, CVector, GmresOptions,
};
use crate::model::{derive_geometry, Drive, EmissionPattern, SystemParams, NU};
use crate::C64;

/// Largest superoperator dimension handled by dense LU.
pub const DENSE_LIMIT: usize = 4096;
/// Bound on the steady-state population of the highest photon level.
pub const TOP_LEVEL_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InternalSpace {
    n_cavity: usize,
}

impl InternalSpace {
    pub fn new(n_cavity: usize) -> Result<Self> {
        if n_cavity < 2 {
            return Err(Error::InvalidParameter {
                name: "n_cavity",
                reason: "need at least 2 Fock states".into(),
            });
        }
        Ok(InternalSpace { n_cavity })
    }

    pub fn n_cavity(&self) -> usize {
        self.n_cavity
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cavity
    }

    pub fn index(&self, excited: bool, photons: usize) -> usize {
        usize::from(excited) * self.n_cavity + photons
    }

    /// Atomic lowering operator `|g><e|`.
    pub fn sigma(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for n in 0..self.n_cavity {
            m[(self.index(false, n), self.index(true, n))] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Cavity annihilation operator.
    pub fn a(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for s in [false, true] {
            for n in 1..self.n_cavity {
                m[(self.index(s, n - 1), self.index(s, n))] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        m
    }

    /// `|g,0><g,0|`.
    pub fn ground(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        m[(0, 0)] = C64::new(1.0, 0.0);
        m
    }

    /// Population of the highest photon level.
    pub fn top_population(&self, rho: &CMatrix) -> f64 {
        let n = self.n_cavity - 1;
        rho[(self.index(false, n), self.index(false, n))].re
            + rho[(self.index(true, n), self.index(true, n))].re
    }

    /// Photon-number distribution `P(n)` traced over the atom.
    pub fn photon_distribution(&self, rho: &CMatrix) -> Vec<f64> {
        (0..self.n_cavity)
            .map(|n| {
                rho[(self.index(false, n), self.index(false, n))].re
                    + rho[(self.index(true, n), self.index(true, n))].re
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Dense LU when `dim^2 <= DENSE_LIMIT`, GMRES otherwise.
    #[default]
    Auto,
    Dense,
    Iterative,
}

/// Lindblad generator `L X = -i (H_eff X - X H_eff^dag) + sum_k J_k X J_k^dag`.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    h_eff: CMatrix,
    jumps: Vec<CMatrix>,
    solver: SolverKind,
}

impl Superoperator {
    pub fn new(hamiltonian: &CMatrix, jumps: Vec<CMatrix>) -> Self {
        let dim = hamiltonian.nrows();
        let mut h_eff = hamiltonian.clone();
        for j in &jumps {
            h_eff -= (dagger(j) * j) * C64::new(0.0, 0.5);
        }
        Superoperator {
            dim,
            h_eff,
            jumps,
            solver: SolverKind::Auto,
        }
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    /// Hilbert-space dimension; the superoperator is `dim^2 x dim^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn uses_dense(&self) -> bool {
        match self.solver {
            SolverKind::Dense => true,
            SolverKind::Iterative => false,
            SolverKind::Auto => self.dim * self.dim <= DENSE_LIMIT,
        }
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let i = C64::i();
        let mut out = (&self.h_eff * x - x * dagger(&self.h_eff)) * (-i);
        for j in &self.jumps {
            out += j * x * dagger(j);
        }
        out
    }

    fn apply_vec(&self, v: &CVector) -> CVector {
        vec_of(&self.apply(&unvec(v, self.dim)))
    }

    /// Dense `dim^2 x dim^2` matrix.
    pub fn matrix(&self) -> CMatrix {
        let id = CMatrix::identity(self.dim, self.dim);
        let i = C64::i();
        let mut m = kron(&id, &self.h_eff) * (-i) + kron(&self.h_eff.conjugate(), &id) * i;
        for j in &self.jumps {
            m += kron(&j.conjugate(), j);
        }
        m
    }

    /// Solves `(L + z) X = B`.
    pub fn solve_shifted(&self, z: C64, b: &CMatrix) -> Result<CMatrix> {
        let rhs = vec_of(b);
        let x = if self.uses_dense() {
            let mut m = self.matrix();
            for k in 0..m.nrows() {
                m[(k, k)] += z;
            }
            lu_solve(m, &rhs)?
        } else {
            gmres(
                |v| self.apply_vec(v) + v * z,
                &rhs,
                None,
                GmresOptions::default(),
            )?
            .0
        };
        Ok(unvec(&x, self.dim))
    }
}

/// Zeroth-order internal Hamiltonian in the laser frame.
///
/// `H = -Delta s^dag s - delta_c a^dag a + g~ (a^dag s + a s^dag) + Omega_0 (s^dag + s)`
/// with `Omega_0 = Omega` for a travelling wave and `Omega cos(phase)` for a
/// standing wave. `include_laser = false` drops the last term.
pub fn internal_hamiltonian(
    p: &SystemParams,
    s: &InternalSpace,
    include_laser: bool,
) -> Result<CMatrix> {
    let geo = derive_geometry(p)?;
    let sm = s.sigma();
    let a = s.a();
    let (sd, ad) = (dagger(&sm), dagger(&a));
    let c = |x: f64| C64::new(x, 0.0);
    let mut h = (&sd * &sm) * c(-p.delta)
        + (&ad * &a) * c(-p.delta_c)
        + (&ad * &sm + &a * &sd) * c(geo.g_tilde);
    if include_laser {
        let amp = match p.drive {
            Drive::TravelingWave => p.omega,
            Drive::StandingWave { phase } => p.omega * crate::model::clean_cos(phase),
        };
        h += (&sd + &sm) * c(amp);
    }
    Ok(h)
}

/// `L0I` for the internal degrees of freedom.
pub fn build_l0i(p: &SystemParams, s: &InternalSpace) -> Result<Superoperator> {
    build_l0i_with(p, s, true)
}

pub fn build_l0i_with(
    p: &SystemParams,
    s: &InternalSpace,
    include_laser: bool,
) -> Result<Superoperator> {
    p.validate()?;
    let h = internal_hamiltonian(p, s, include_laser)?;
    let jumps = vec![
        s.a() * C64::new(p.kappa.sqrt(), 0.0),
        s.sigma() * C64::new(p.gamma.sqrt(), 0.0),
    ];
    Ok(Superoperator::new(&h, jumps))
}

/// First-order mechanical coupling `V1` (coefficient of `eta (b + b^dag)`).
pub fn first_order_coupling(p: &SystemParams, s: &InternalSpace) -> Result<CMatrix> {
    let geo = derive_geometry(p)?;
    let sm = s.sigma();
    let a = s.a();
    let (sd, ad) = (dagger(&sm), dagger(&a));
    let laser = match p.drive {
        Drive::TravelingWave => (&sd - &sm) * C64::new(0.0, p.omega),
        Drive::StandingWave { phase } => (&sd + &sm) * C64::new(-p.omega * phase.sin(), 0.0),
    };
    let cavity = (&a * &sd + &ad * &sm) * C64::new(-geo.g_tilde, 0.0);
    Ok(laser * C64::new(geo.phi_l_coef, 0.0) + cavity * C64::new(geo.phi_c_coef, 0.0))
}

fn normalise(x: &mut CMatrix) {
    let t = trace(x);
    *x /= t;
}

fn inverse_iteration(l: &Superoperator, seed: &CMatrix) -> Result<CMatrix> {
    let dim = l.dim();
    let scale = l
        .h_eff
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut x = seed.clone();
    if l.uses_dense() {
        let mut m = l.matrix();
        let shift = 1e-11 * scale;
        for k in 0..m.nrows() {
            m[(k, k)] += shift;
        }
        let lu = m.lu();
        for _ in 0..60 {
            let y = lu.solve(&vec_of(&x)).ok_or(Error::SingularResolvent)?;
            let mut next = unvec(&y, dim);
            normalise(&mut next);
            let change = (&next - &x).norm();
            x = next;
            if change < 1e-14 {
                break;
            }
        }
    } else {
        // bordered system L X + seed Tr X = seed: its unique solution is the
        // unit-trace null vector whenever the kernel is one-dimensional
        let rhs = vec_of(seed);
        let opts = GmresOptions {
            tol: 1e-13,
            ..Default::default()
        };
        let apply = |v: &CVector| {
            let t: C64 = (0..dim).map(|k| v[k * dim + k]).sum();
            l.apply_vec(v) + &rhs * t
        };
        let (y, _) = gmres(apply, &rhs, Some(&rhs), opts)?;
        x = unvec(&y, dim);
        normalise(&mut x);
    }
    if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::SingularResolvent);
    }
    Ok((&x + dagger(&x)) * C64::new(0.5, 0.0))
}

/// Trace norm of a Hermitian matrix divided by two.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let herm = (&d + dagger(&d)) * C64::new(0.5, 0.0);
    0.5 * herm
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
}

/// Null vector of `L`, normalised to unit trace.
///
/// Runs shifted inverse iteration from `|g,0><g,0|` and from the maximally
/// mixed state; if the two disagree the kernel is not one-dimensional.
pub fn steady_state(l: &Superoperator) -> Result<CMatrix> {
    let dim = l.dim();
    let mut seed = CMatrix::zeros(dim, dim);
    seed[(0, 0)] = C64::new(1.0, 0.0);
    let rho = inverse_iteration(l, &seed)?;
    let mixed = CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
    let other = inverse_iteration(l, &mixed)?;
    if trace_distance(&rho, &other) > 1e-6 {
        return Err(Error::DegenerateKernel);
    }
    Ok(rho)
}

/// Solution of the internal problem at one truncation.
#[derive(Debug, Clone)]
pub struct InternalSolution {
    pub space: InternalSpace,
    pub generator: Superoperator,
    pub rho: CMatrix,
    v1: CMatrix,
}

impl InternalSolution {
    pub fn new(p: &SystemParams, space: InternalSpace, solver: SolverKind) -> Result<Self> {
        let include_laser = !p.drive.is_node();
        let generator = build_l0i_with(p, &space, include_laser)?.with_solver(solver);
        let rho = steady_state(&generator)?;
        let v1 = first_order_coupling(p, &space)?;
        Ok(InternalSolution {
            space,
            generator,
            rho,
            v1,
        })
    }

    /// `S(x) = -Tr{V1 (L0I + i x)^-1 V1 rho}`.
    pub fn spectrum(&self, x: f64) -> Result<C64> {
        let b = &self.v1 * &self.rho;
        let sol = self.generator.solve_shifted(C64::new(0.0, x), &b)?;
        Ok(-trace(&(&self.v1 * sol)))
    }

    /// Same quantity through the eigendecomposition of the dense generator.
    pub fn spectrum_eigen(&self, x: f64) -> Result<C64> {
        let eig = linalg::eigen(&self.generator.matrix())?;
        let b = vec_of(&(&self.v1 * &self.rho));
        let mut c = &eig.inverse * b;
        for (ck, lambda) in c.iter_mut().zip(eig.values.iter()) {
            *ck /= lambda + C64::new(0.0, x);
        }
        let sol = unvec(&(&eig.vectors * c), self.space.dim());
        Ok(-trace(&(&self.v1 * sol)))
    }

    pub fn excited_population(&self) -> C64 {
        let sm = self.space.sigma();
        trace(&(dagger(&sm) * &sm * &self.rho))
    }

    pub fn photon_number(&self) -> f64 {
        let a = self.space.a();
        trace(&(dagger(&a) * &a * &self.rho)).re
    }

    /// `D = alpha gamma / 2 Tr{s^dag s rho}`.
    pub fn diffusion(&self, p: &SystemParams, e: &EmissionPattern) -> f64 {
        0.5 * e.alpha() * p.gamma * self.excited_population().re
    }

    pub fn top_population(&self) -> f64 {
        self.space.top_population(&self.rho)
    }
}

/// `S(nu)` at a fixed truncation, using the drive variant in `p.drive`.
pub fn spectrum_s(nu: f64, p: &SystemParams, s: &InternalSpace) -> Result<C64> {
    InternalSolution::new(p, *s, SolverKind::Auto)?.spectrum(nu)
}

pub fn diffusion_d(p: &SystemParams, s: &InternalSpace, e: &EmissionPattern) -> Result<f64> {
    Ok(InternalSolution::new(p, *s, SolverKind::Auto)?.diffusion(p, e))
}

#[derive(Debug, Clone, Copy)]
pub struct TruncationOptions {
    pub n_start: usize,
    pub n_limit: usize,
    /// Relative change of `S(+-nu)` between `n` and `n + 2` photon levels.
    pub tol: f64,
    pub solver: SolverKind,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            n_start: 3,
            n_limit: 40,
            tol: 1e-8,
            solver: SolverKind::Auto,
        }
    }
}

/// Rates from the numerical spectrum with the diagnostics of the run.
#[derive(Debug, Clone, Serialize)]
pub struct LiouvillianRates {
    #[serde(skip)]
    pub rates: RateResult,
    pub a_plus: f64,
    pub a_minus: f64,
    pub d: f64,
    /// `S(-nu)`, heating side, as `[re, im]`.
    pub s_heat: [f64; 2],
    /// `S(+nu)`, cooling side.
    pub s_cool: [f64; 2],
    pub n_cavity: usize,
    pub excited_population: f64,
    pub photon_distribution: Vec<f64>,
    pub top_population: f64,
    pub imag_residue: f64,
    /// `max |S(n) - S(n+2)| / |S|` at each refinement step.
    pub truncation_deltas: Vec<f64>,
}

impl LiouvillianRates {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }
}

/// `A+- = 2 Re S(-+nu) + 2 D` at a fixed truncation.
pub fn rates_at(
    p: &SystemParams,
    e: &EmissionPattern,
    space: InternalSpace,
    solver: SolverKind,
) -> Result<LiouvillianRates> {
    let sol = InternalSolution::new(p, space, solver)?;
    let s_heat = sol.spectrum(-NU)?;
    let s_cool = sol.spectrum(NU)?;
    let pe = sol.excited_population();
    let d = sol.diffusion(p, e);
    let hermiticity = (&sol.rho - dagger(&sol.rho)).norm();
    let a_plus = 2.0 * s_heat.re + 2.0 * d;
    let a_minus = 2.0 * s_cool.re + 2.0 * d;
    Ok(LiouvillianRates {
        rates: RateResult::from_rates(a_plus, a_minus, d, p.eta),
        a_plus,
        a_minus,
        d,
        s_heat: [s_heat.re, s_heat.im],
        s_cool: [s_cool.re, s_cool.im],
        n_cavity: space.n_cavity(),
        excited_population: pe.re,
        photon_distribution: space.photon_distribution(&sol.rho),
        top_population: sol.top_population(),
        imag_residue: pe.im.abs().max(hermiticity),
        truncation_deltas: Vec::new(),
    })
}

/// Rates with the photon truncation grown in steps of two until `S(+-nu)`
/// settles and the top level is empty.
pub fn liouvillian_rates(
    p: &SystemParams,
    e: &EmissionPattern,
    opts: TruncationOptions,
) -> Result<LiouvillianRates> {
    let mut n = opts.n_start.max(2);
    let mut prev = rates_at(p, e, InternalSpace::new(n)?, opts.solver)?;
    let mut deltas = Vec::new();
    while n + 2 <= opts.n_limit {
        n += 2;
        let next = rates_at(p, e, InternalSpace::new(n)?, opts.solver)?;
        let size = next.s_heat[0]
            .hypot(next.s_heat[1])
            .max(next.s_cool[0].hypot(next.s_cool[1]));
        let diff = (next.s_heat[0] - prev.s_heat[0])
            .hypot(next.s_heat[1] - prev.s_heat[1])
            .max((next.s_cool[0] - prev.s_cool[0]).hypot(next.s_cool[1] - prev.s_cool[1]));
        let rel = if size > 0.0 { diff / size } else { diff };
        deltas.push(rel);
        let done = rel <= opts.tol && next.top_population < TOP_LEVEL_BOUND;
        prev = next;
        if done {
            prev.truncation_deltas = deltas;
            return Ok(prev);
        }
    }
    Err(Error::TruncationLeak {
        population: prev.top_population,
        bound: TOP_LEVEL_BOUND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{amplitudes, delta_opt, rates_smallk_saturating, rates_weak_drive};
    use std::f64::consts::FRAC_PI_2;

    fn space(n: usize) -> InternalSpace {
        InternalSpace::new(n).unwrap()
    }

    fn weak(p: SystemParams) -> SystemParams {
        SystemParams {
            omega: 0.01 * p.gamma,
            ..p
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dense_matrix_matches_action() {
        let p = SystemParams {
            delta: 3.0,
            delta_c: -1.0,
            kappa: 0.7,
            ..Default::default()
        };
        let l = build_l0i(&p, &space(3)).unwrap();
        let x = CMatrix::from_fn(6, 6, |i, j| {
            C64::new(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.1)
        });
        let lhs = vec_of(&l.apply(&x));
        let rhs = l.matrix() * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn trace_preserving() {
        let p = SystemParams {
            delta: 3.0,
            delta_c: -1.0,
            kappa: 0.7,
            ..Default::default()
        };
        let l = build_l0i(&p, &space(3)).unwrap();
        let m = l.matrix();
        let dim = 6;
        for col in 0..dim * dim {
            let t: C64 = (0..dim).map(|k| m[(k * dim + k, col)]).sum();
            assert!(t.norm() < 1e-12);
        }
    }

    #[test]
    fn undriven_uncoupled_relaxes_to_ground() {
        let p = SystemParams {
            omega: 0.0,
            g: 0.0,
            ..Default::default()
        };
        let l = build_l0i(&p, &space(3)).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho - space(3).ground()).norm() < 1e-12);
    }

    #[test]
    fn closed_system_has_degenerate_kernel() {
        let p = SystemParams {
            omega: 0.0,
            g: 0.0,
            kappa: 0.0,
            gamma: 0.0,
            ..Default::default()
        };
        let l = build_l0i(&p, &space(2)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateKernel)));
    }

    #[test]
    fn steady_state_is_density_operator() {
        let p = SystemParams {
            omega: 2.0,
            delta: 1.0,
            delta_c: 0.5,
            kappa: 1.0,
            ..Default::default()
        };
        let s = space(8);
        let rho = steady_state(&build_l0i(&p, &s).unwrap()).unwrap();
        assert!((trace(&rho) - C64::new(1.0, 0.0)).norm() < 1e-12);
        let eig = rho.symmetric_eigenvalues();
        assert!(eig.min() > -1e-10);
        let purity = trace(&(&rho * &rho)).re;
        assert!(purity <= 1.0 + 1e-12 && purity >= 1.0 / s.dim() as f64 - 1e-12);
    }

    #[test]
    fn coherent_cavity_at_small_kappa() {
        let p = SystemParams {
            kappa: 1e-6,
            delta_c: 0.0,
            delta: 30.0,
            omega: 1.0,
            ..Default::default()
        };
        let s = space(8);
        let rho = steady_state(&build_l0i(&p, &s).unwrap()).unwrap();
        let beta = -p.omega / p.g_tilde();
        let mut psi = CVector::zeros(s.dim());
        let mut coef = (-0.5 * beta * beta).exp();
        for n in 0..s.n_cavity() {
            if n > 0 {
                coef *= beta / (n as f64).sqrt();
            }
            psi[s.index(false, n)] = C64::new(coef, 0.0);
        }
        let target = &psi * psi.adjoint();
        assert!(trace_distance(&rho, &target) < 1e-4);
    }

    #[test]
    fn weak_drive_excited_population() {
        let p = weak(SystemParams {
            delta: 48.0,
            kappa: 0.1,
            ..Default::default()
        });
        let sol = InternalSolution::new(&p, space(4), SolverKind::Auto).unwrap();
        let ts = amplitudes(&p).unwrap().t_s.norm_sqr();
        assert!(rel(sol.excited_population().re, ts) < 1e-3);
    }

    #[test]
    fn weak_drive_rates_match_analytic() {
        let e = EmissionPattern::dipole();
        for (delta, delta_c, kappa) in [(48.0, 0.0, 0.1), (-3.0, -1.0, 2.0), (10.0, 0.5, 0.05)] {
            let p = weak(SystemParams {
                delta,
                delta_c,
                kappa,
                ..Default::default()
            });
            let num = rates_at(&p, &e, space(4), SolverKind::Auto).unwrap();
            let exact = rates_weak_drive(&p, &e).unwrap();
            assert!(
                rel(num.a_plus, exact.a_plus) < 1e-3,
                "{} {}",
                num.a_plus,
                exact.a_plus
            );
            assert!(
                rel(num.a_minus, exact.a_minus) < 1e-3,
                "{} {}",
                num.a_minus,
                exact.a_minus
            );
            assert!(rel(num.d, exact.d) < 1e-3);
        }
    }

    #[test]
    fn resolvent_identity() {
        let p = SystemParams {
            delta: 5.0,
            delta_c: -0.7,
            kappa: 1.5,
            omega: 1.0,
            ..Default::default()
        };
        for n in [2, 3, 4] {
            let sol = InternalSolution::new(&p, space(n), SolverKind::Dense).unwrap();
            for x in [-1.0, 1.0] {
                let direct = sol.spectrum(x).unwrap();
                let eig = sol.spectrum_eigen(x).unwrap();
                assert!(
                    (direct - eig).norm() < 1e-8 * direct.norm().max(1e-12),
                    "{direct} {eig}"
                );
            }
        }
    }

    #[test]
    fn iterative_solver_agrees_with_dense() {
        let p = SystemParams {
            delta: 5.0,
            delta_c: -0.7,
            kappa: 1.5,
            omega: 1.0,
            ..Default::default()
        };
        let e = EmissionPattern::dipole();
        let dense = rates_at(&p, &e, space(5), SolverKind::Dense).unwrap();
        let iter = rates_at(&p, &e, space(5), SolverKind::Iterative).unwrap();
        assert!(rel(iter.a_plus, dense.a_plus) < 1e-7);
        assert!(rel(iter.a_minus, dense.a_minus) < 1e-7);
    }

    #[test]
    fn undriven_spectrum_vanishes() {
        let p = SystemParams {
            omega: 0.0,
            ..Default::default()
        };
        assert_eq!(spectrum_s(NU, &p, &space(3)).unwrap().norm(), 0.0);
    }

    #[test]
    fn node_drive_leaves_ground_state() {
        let p = SystemParams {
            drive: Drive::StandingWave { phase: FRAC_PI_2 },
            theta_l: 0.0,
            delta_c: 1.0,
            ..Default::default()
        };
        let sol = InternalSolution::new(&p, space(3), SolverKind::Auto).unwrap();
        assert!((&sol.rho - space(3).ground()).norm() < 1e-14);
    }

    #[test]
    fn truncation_converges() {
        let mut p = SystemParams {
            kappa: 0.05,
            ..Default::default()
        };
        p.delta = delta_opt(0.0, &p).unwrap();
        let r = liouvillian_rates(&p, &EmissionPattern::dipole(), TruncationOptions::default())
            .unwrap();
        assert!(r.top_population < TOP_LEVEL_BOUND);
        assert!(r.truncation_deltas.last().unwrap() <= &1e-8);
        assert!(r.imag_residue < 1e-9);
        assert!(r.a_plus >= 0.0 && r.a_minus >= 0.0);
    }

    #[test]
    fn optimum_point_matches_weak_drive() {
        let e = EmissionPattern::dipole();
        let mut p = weak(SystemParams::default());
        // Delta_opt diverges at delta_c = -nu; stay just inside the branch
        p.delta_c = -0.9;
        p.delta = delta_opt(-0.9, &p).unwrap();
        let num = liouvillian_rates(&p, &e, TruncationOptions::default()).unwrap();
        let exact = rates_weak_drive(&p, &e).unwrap();
        assert!(rel(num.rates.n_st.value().unwrap(), exact.n_st.value().unwrap()) < 0.01);
    }

    fn saturating(kappa: f64) -> SystemParams {
        let p = SystemParams {
            kappa,
            omega: 1.0,
            ..Default::default()
        };
        SystemParams {
            delta: delta_opt(0.0, &p).unwrap(),
            ..p
        }
    }

    #[test]
    fn diffusion_vanishes_as_kappa_squared() {
        let e = EmissionPattern::dipole();
        let lossless = diffusion_d(&saturating(0.0), &space(9), &e).unwrap();
        let d: Vec<f64> = [0.01, 0.1]
            .iter()
            .map(|&k| diffusion_d(&saturating(k), &space(9), &e).unwrap())
            .collect();
        assert!(lossless.abs() < 1e-6 * d[0], "{lossless}");
        let slope = (d[1] / d[0]).log10();
        assert!((slope - 2.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn saturating_drive_matches_small_kappa_rates() {
        let e = EmissionPattern::dipole();
        let p = saturating(0.01);
        let num = liouvillian_rates(&p, &e, TruncationOptions::default()).unwrap();
        let sk = rates_smallk_saturating(&p, &e).unwrap();
        assert!(rel(sk.a_plus, num.a_plus) < 0.03);
        assert!(rel(sk.a_minus, num.a_minus) < 0.03);
    }

    #[test]
    fn diagnostics_serialise() {
        let p = weak(SystemParams {
            delta: 48.0,
            ..Default::default()
        });
        let r = rates_at(&p, &EmissionPattern::dipole(), space(3), SolverKind::Auto).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["n_cavity"], 3);
        assert_eq!(v["photon_distribution"].as_array().unwrap().len(), 3);
    }
}
