//! Monte Carlo wavefunction simulation of atom, cavity mode and trap motion.
//!
//! States live on `internal (x) motion` with index
//! `(s * n_cavity + n_photon) * n_motion + n_phonon`. Position is measured
//! in units of the ground-state width, `k x = eta (b + b^dag)`, and every
//! mode function is built exactly from the spectral decomposition of
//! `b + b^dag`, without a Lamb-Dicke expansion.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::SteadyState;
use crate::dynamics::CoolingTrajectory;
use crate::error::{Error, Result};
use crate::linalg::{dagger, kron, unvec, vec_of, CMatrix, CVector};
use crate::liouvillian::{internal_hamiltonian, InternalSpace, Superoperator};
use crate::model::{clean_cos, AngleSampler, Drive, EmissionPattern, SystemParams, NU};
use crate::C64;

/// Bound on the population of the highest motional level.
pub const MOTION_LEAK_BOUND: f64 = 1e-4;
/// Largest jump probability allowed within one fixed step.
pub const STEP_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullSpace {
    pub n_cavity: usize,
    pub n_motion: usize,
}

impl FullSpace {
    pub fn new(n_cavity: usize, n_motion: usize) -> Result<Self> {
        InternalSpace::new(n_cavity)?;
        if n_motion < 2 {
            return Err(Error::InvalidParameter {
                name: "n_motion",
                reason: "need at least 2 Fock states".into(),
            });
        }
        Ok(FullSpace { n_cavity, n_motion })
    }

    pub fn internal(&self) -> InternalSpace {
        InternalSpace::new(self.n_cavity).expect("checked in new")
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cavity * self.n_motion
    }

    pub fn index(&self, excited: bool, photons: usize, phonons: usize) -> usize {
        self.internal().index(excited, photons) * self.n_motion + phonons
    }

    /// `b` on the motional factor alone.
    pub fn b(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n_motion, self.n_motion);
        for n in 1..self.n_motion {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        m
    }

    /// `b + b^dag` on the motional factor alone.
    pub fn position(&self) -> CMatrix {
        let b = self.b();
        &b + dagger(&b)
    }

    /// `f(b + b^dag)` through the eigendecomposition of the position.
    pub fn motion_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let x = nalgebra::DMatrix::<f64>::from_fn(self.n_motion, self.n_motion, |i, j| {
            self.position()[(i, j)].re
        });
        let eig = x.symmetric_eigen();
        let v = eig.eigenvectors.map(|z| C64::new(z, 0.0));
        let d = CMatrix::from_diagonal(&eig.eigenvalues.map(&f));
        &v * d * v.transpose()
    }

    pub fn lift_internal(&self, op: &CMatrix) -> CMatrix {
        kron(op, &CMatrix::identity(self.n_motion, self.n_motion))
    }

    pub fn lift_motion(&self, op: &CMatrix) -> CMatrix {
        kron(&CMatrix::identity(2 * self.n_cavity, 2 * self.n_cavity), op)
    }

    pub fn basis_state(&self, excited: bool, photons: usize, phonons: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[self.index(excited, photons, phonons)] = C64::new(1.0, 0.0);
        v
    }

    /// `|g, 0_c> (x) sum_n sqrt(p_n) |n>` for a motional distribution `p`.
    pub fn ground_internal_with(&self, amplitudes: &[f64]) -> CVector {
        let mut v = CVector::zeros(self.dim());
        for (n, a) in amplitudes.iter().enumerate().take(self.n_motion) {
            v[self.index(false, 0, n)] = C64::new(*a, 0.0);
        }
        v
    }
}

/// Full Hamiltonian in the laser frame, exact in `eta`.
pub fn build_hamiltonian(p: &SystemParams, s: &FullSpace) -> Result<CMatrix> {
    p.validate()?;
    let int = s.internal();
    let sm = int.sigma();
    let a = int.a();
    let (sd, ad) = (dagger(&sm), dagger(&a));
    let eta_c = p.eta * clean_cos(p.theta_c);
    let eta_l = p.eta * clean_cos(p.theta_l);
    let number = dagger(&s.b()) * s.b();

    let mut h = s.lift_motion(&number) * C64::new(NU, 0.0);
    h += s.lift_internal(
        &((&sd * &sm) * C64::new(-p.delta, 0.0) + (&ad * &a) * C64::new(-p.delta_c, 0.0)),
    );
    let mode = s.motion_function(|x| C64::new(p.g * (eta_c * x + p.phi).cos(), 0.0));
    h += kron(&(&ad * &sm + &a * &sd), &mode);
    match p.drive {
        Drive::TravelingWave => {
            let phase = s.motion_function(|x| C64::from_polar(p.omega, eta_l * x));
            let raise = kron(&sd, &phase);
            h += &raise + dagger(&raise);
        }
        Drive::StandingWave { phase } => {
            let profile = s.motion_function(|x| C64::new(p.omega * (eta_l * x + phase).cos(), 0.0));
            h += kron(&(&sd + &sm), &profile);
        }
    }
    Ok(h)
}

/// Same internal Hamiltonian that the liouvillian module uses, lifted to
/// the full space together with the trap.
pub fn zeroth_order_hamiltonian(p: &SystemParams, s: &FullSpace) -> Result<CMatrix> {
    let number = dagger(&s.b()) * s.b();
    let int = internal_hamiltonian(p, &s.internal(), true)?;
    Ok(s.lift_motion(&number) * C64::new(NU, 0.0) + s.lift_internal(&int))
}

#[derive(Debug, Clone, Copy)]
pub struct McwfOptions {
    /// Largest fixed step; the actual step divides the output spacing.
    pub max_dt: f64,
    /// Number of halvings used to locate a jump inside a step.
    pub refine: u32,
    pub leak_bound: f64,
    pub step_limit: f64,
}

impl Default for McwfOptions {
    fn default() -> Self {
        McwfOptions {
            max_dt: 0.1,
            refine: 20,
            leak_bound: MOTION_LEAK_BOUND,
            step_limit: STEP_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpChannel {
    Cavity,
    /// Spontaneous emission with the sampled `cos(theta_0)`.
    Spontaneous {
        cos_theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub channel: JumpChannel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub index: u64,
    pub times: Vec<f64>,
    /// `<b^dag b>` on the output grid.
    pub phonons: Vec<f64>,
    /// `<s^dag s>`.
    pub excited: Vec<f64>,
    /// `<a^dag a>`.
    pub photons: Vec<f64>,
    pub jumps: Vec<Jump>,
    /// Normalised state at the last grid point.
    pub final_state: CVector,
}

/// Precomputed propagators and jump operators for one parameter set and
/// output spacing.
pub struct Mcwf {
    space: FullSpace,
    eta: f64,
    kappa: f64,
    gamma: f64,
    /// `props[k] = exp(-i H_eff 2^k tick)`.
    props: Vec<CMatrix>,
    tick: f64,
    steps_per_output: usize,
    output_dt: f64,
    a: CMatrix,
    sigma: CMatrix,
    x_values: Vec<f64>,
    x_vectors: CMatrix,
    sampler: AngleSampler,
    phonon_diag: Vec<f64>,
    excited_diag: Vec<f64>,
    photon_diag: Vec<f64>,
    opts: McwfOptions,
}

struct State {
    psi: CVector,
    ticks: u64,
    threshold: f64,
    jumps: Vec<Jump>,
}

impl Mcwf {
    pub fn new(
        p: &SystemParams,
        e: &EmissionPattern,
        s: FullSpace,
        output_dt: f64,
        opts: McwfOptions,
    ) -> Result<Self> {
        if !(output_dt > 0.0 && output_dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_grid",
                reason: "spacing must be positive".into(),
            });
        }
        let h = build_hamiltonian(p, &s)?;
        let int = s.internal();
        let a = s.lift_internal(&int.a());
        let sigma = s.lift_internal(&int.sigma());
        let decay = (dagger(&a) * &a) * C64::new(p.kappa, 0.0)
            + (dagger(&sigma) * &sigma) * C64::new(p.gamma, 0.0);
        let h_eff = h - decay * C64::new(0.0, 0.5);

        let steps_per_output = (output_dt / opts.max_dt).ceil().max(1.0) as usize;
        let dt = output_dt / steps_per_output as f64;
        let tick = dt / (1u64 << opts.refine) as f64;
        let props = (0..=opts.refine)
            .map(|k| (&h_eff * C64::new(0.0, -tick * (1u64 << k) as f64)).exp())
            .collect();

        let x = DMatrix::<f64>::from_fn(s.n_motion, s.n_motion, |i, j| s.position()[(i, j)].re);
        let eig = x.symmetric_eigen();

        let mut phonon_diag = Vec::with_capacity(s.dim());
        let mut excited_diag = Vec::with_capacity(s.dim());
        let mut photon_diag = Vec::with_capacity(s.dim());
        for e_ in [false, true] {
            for n in 0..s.n_cavity {
                for m in 0..s.n_motion {
                    phonon_diag.push(m as f64);
                    excited_diag.push(if e_ { 1.0 } else { 0.0 });
                    photon_diag.push(n as f64);
                }
            }
        }
        Ok(Mcwf {
            space: s,
            eta: p.eta,
            kappa: p.kappa,
            gamma: p.gamma,
            props,
            tick,
            steps_per_output,
            output_dt,
            a,
            sigma,
            x_values: eig.eigenvalues.iter().copied().collect(),
            x_vectors: eig.eigenvectors.map(|z| C64::new(z, 0.0)),
            sampler: AngleSampler::new(e),
            phonon_diag,
            excited_diag,
            photon_diag,
            opts,
        })
    }

    pub fn space(&self) -> FullSpace {
        self.space
    }

    /// Fixed step actually used.
    pub fn dt(&self) -> f64 {
        self.output_dt / self.steps_per_output as f64
    }

    /// Non-Hermitian propagator over `2^level` ticks (`level = refine` is one step).
    pub fn propagator(&self, level: usize) -> &CMatrix {
        &self.props[level]
    }

    /// `exp(-i eta u (b + b^dag))` on the motional factor.
    pub fn recoil(&self, cos_theta: f64) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.x_values.len(),
            self.x_values
                .iter()
                .map(|&x| C64::from_polar(1.0, -self.eta * cos_theta * x)),
        ));
        &self.x_vectors * d * self.x_vectors.transpose()
    }

    fn apply_motion(&self, op: &CMatrix, psi: &CVector) -> CVector {
        let n_m = self.space.n_motion;
        let block = DMatrix::from_column_slice(n_m, psi.len() / n_m, psi.as_slice());
        CVector::from_column_slice((op * block).as_slice())
    }

    fn expect(diag: &[f64], psi: &CVector) -> f64 {
        let norm = psi.norm_squared();
        psi.iter()
            .zip(diag)
            .map(|(z, d)| z.norm_sqr() * d)
            .sum::<f64>()
            / norm
    }

    fn top_motion(&self, psi: &CVector) -> f64 {
        let n_m = self.space.n_motion;
        let top: f64 = psi
            .iter()
            .skip(n_m - 1)
            .step_by(n_m)
            .map(|z| z.norm_sqr())
            .sum();
        top / psi.norm_squared()
    }

    fn jump(&self, st: &mut State, rng: &mut ChaCha8Rng) {
        let time = st.ticks as f64 * self.tick;
        let cav = &self.a * &st.psi;
        let spont = &self.sigma * &st.psi;
        let wc = self.kappa * cav.norm_squared();
        let ws = self.gamma * spont.norm_squared();
        let pick = rng.random::<f64>() * (wc + ws);
        let (next, channel) = if wc + ws == 0.0 {
            (st.psi.clone(), JumpChannel::Cavity)
        } else if pick < wc {
            (cav, JumpChannel::Cavity)
        } else {
            let cos_theta = self.sampler.sample(rng.random::<f64>());
            (
                self.apply_motion(&self.recoil(cos_theta), &spont),
                JumpChannel::Spontaneous { cos_theta },
            )
        };
        let norm = next.norm();
        st.psi = next / C64::new(norm, 0.0);
        st.threshold = rng.random::<f64>();
        st.jumps.push(Jump { time, channel });
    }

    fn step(&self, st: &mut State, rng: &mut ChaCha8Rng) -> Result<()> {
        let top = self.opts.refine as usize;
        let before = st.psi.norm_squared();
        let full = &self.props[top] * &st.psi;
        let after = full.norm_squared();
        let probability = 1.0 - after / before;
        if probability > self.opts.step_limit {
            return Err(Error::StepTooLarge {
                probability,
                limit: self.opts.step_limit,
            });
        }
        if after > st.threshold {
            st.psi = full;
            st.ticks += 1 << top;
            return Ok(());
        }
        // the norm crosses the threshold inside this step: bisect
        let mut remaining: u64 = 1 << top;
        while remaining > 0 {
            let mut k = (63 - remaining.leading_zeros()) as usize;
            loop {
                let trial = &self.props[k] * &st.psi;
                if trial.norm_squared() > st.threshold {
                    st.psi = trial;
                    st.ticks += 1 << k;
                    remaining -= 1 << k;
                    break;
                }
                if k == 0 {
                    st.psi = trial;
                    st.ticks += 1;
                    remaining -= 1;
                    self.jump(st, rng);
                    break;
                }
                k -= 1;
            }
        }
        Ok(())
    }

    /// One trajectory on the grid `0, dt_out, ..., (n_points - 1) dt_out`.
    ///
    /// The random stream is `ChaCha8(seed)` on stream `index`, so each
    /// trajectory is reproducible independently of the others.
    pub fn run(
        &self,
        psi0: &CVector,
        n_points: usize,
        seed: u64,
        index: u64,
    ) -> Result<Trajectory> {
        if psi0.len() != self.space.dim() {
            return Err(Error::InvalidParameter {
                name: "psi0",
                reason: "dimension does not match the space".into(),
            });
        }
        let norm = psi0.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter {
                name: "psi0",
                reason: "zero vector".into(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut st = State {
            psi: psi0 / C64::new(norm, 0.0),
            ticks: 0,
            threshold: rng.random::<f64>(),
            jumps: Vec::new(),
        };
        let mut traj = Trajectory {
            seed,
            index,
            times: Vec::with_capacity(n_points),
            phonons: Vec::with_capacity(n_points),
            excited: Vec::with_capacity(n_points),
            photons: Vec::with_capacity(n_points),
            jumps: Vec::new(),
            final_state: CVector::zeros(0),
        };
        for i in 0..n_points {
            if i > 0 {
                for _ in 0..self.steps_per_output {
                    self.step(&mut st, &mut rng)?;
                }
            }
            let leak = self.top_motion(&st.psi);
            if leak > self.opts.leak_bound {
                return Err(Error::TruncationLeak {
                    population: leak,
                    bound: self.opts.leak_bound,
                });
            }
            traj.times.push(i as f64 * self.output_dt);
            traj.phonons.push(Self::expect(&self.phonon_diag, &st.psi));
            traj.excited.push(Self::expect(&self.excited_diag, &st.psi));
            traj.photons.push(Self::expect(&self.photon_diag, &st.psi));
        }
        let norm = st.psi.norm();
        traj.final_state = &st.psi / C64::new(norm, 0.0);
        traj.jumps = st.jumps;
        Ok(traj)
    }

    /// `count` trajectories with indices `0..count`, in parallel.
    pub fn run_ensemble(
        &self,
        psi0: &CVector,
        n_points: usize,
        seed: u64,
        count: usize,
    ) -> Result<Vec<Trajectory>> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.run(psi0, n_points, seed, i))
            .collect()
    }
}

/// Checks that `t_grid` is `0, h, 2h, ...` and returns `h`.
pub fn grid_spacing(t_grid: &[f64]) -> Result<f64> {
    let bad = || Error::InvalidParameter {
        name: "t_grid",
        reason: "expected a uniform grid starting at 0".into(),
    };
    if t_grid.len() < 2 || t_grid[0] != 0.0 {
        return Err(bad());
    }
    let h = t_grid[1];
    for (i, &t) in t_grid.iter().enumerate() {
        if (t - i as f64 * h).abs() > 1e-9 * h.max(t) {
            return Err(bad());
        }
    }
    Ok(h)
}

pub fn run_trajectory(
    p: &SystemParams,
    s: FullSpace,
    e: &EmissionPattern,
    psi0: &CVector,
    t_grid: &[f64],
    seed: u64,
) -> Result<Trajectory> {
    let h = grid_spacing(t_grid)?;
    Mcwf::new(p, e, s, h, McwfOptions::default())?.run(psi0, t_grid.len(), seed, 0)
}

/// Least-squares fit of `c + (y0 - c) exp(-w t)` with `c` and the
/// amplitude solved linearly for each trial `w`.
pub fn fit_relaxation(times: &[f64], values: &[f64]) -> (f64, f64) {
    let span = times.last().copied().unwrap_or(1.0).max(1e-12);
    let cost = |w: f64| {
        let e: Vec<f64> = times.iter().map(|t| (-w * t).exp()).collect();
        let n = times.len() as f64;
        let (se, sy) = (e.iter().sum::<f64>(), values.iter().sum::<f64>());
        let see: f64 = e.iter().map(|x| x * x).sum();
        let sey: f64 = e.iter().zip(values).map(|(x, y)| x * y).sum();
        let det = n * see - se * se;
        let (c, amp) = if det.abs() < 1e-300 {
            (sy / n, 0.0)
        } else {
            ((see * sy - se * sey) / det, (n * sey - se * sy) / det)
        };
        let r: f64 = e
            .iter()
            .zip(values)
            .map(|(x, y)| (c + amp * x - y).powi(2))
            .sum();
        (r, c)
    };
    // coarse scan in log w, then golden-section refinement
    let (lo, hi) = ((1e-3 / span).ln(), (1e3 / span).ln());
    let mut best = lo;
    let mut best_cost = f64::INFINITY;
    for i in 0..=200 {
        let lw = lo + (hi - lo) * i as f64 / 200.0;
        let c = cost(lw.exp()).0;
        if c < best_cost {
            best_cost = c;
            best = lw;
        }
    }
    let step = (hi - lo) / 200.0;
    let (mut a, mut b) = (best - step, best + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if cost(x1.exp()).0 < cost(x2.exp()).0 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let w = (0.5 * (a + b)).exp();
    (w, cost(w).1)
}

/// Pointwise mean and standard error of `<b^dag b>`, with a fitted
/// relaxation rate and asymptote.
pub fn ensemble_mean(trajectories: &[Trajectory]) -> Result<CoolingTrajectory> {
    if trajectories.len() < 2 {
        return Err(Error::GridMismatch);
    }
    let times = trajectories[0].times.clone();
    if trajectories.iter().any(|t| t.times != times) {
        return Err(Error::GridMismatch);
    }
    let n = trajectories.len() as f64;
    let mut mean = vec![0.0; times.len()];
    let mut err = vec![0.0; times.len()];
    for (i, (m, e)) in mean.iter_mut().zip(err.iter_mut()).enumerate() {
        let avg = trajectories.iter().map(|t| t.phonons[i]).sum::<f64>() / n;
        let var = trajectories
            .iter()
            .map(|t| (t.phonons[i] - avg).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        *m = avg;
        *e = (var / n).sqrt();
    }
    let (w, n_st) = fit_relaxation(&times, &mean);
    Ok(CoolingTrajectory {
        times,
        mean_n: mean,
        std_err: Some(err),
        w,
        n_st: SteadyState::Cooling(n_st),
    })
}

/// Ensemble density matrix built from the final states.
pub fn ensemble_density(trajectories: &[Trajectory]) -> CMatrix {
    let dim = trajectories.first().map_or(0, |t| t.final_state.len());
    let mut rho = CMatrix::zeros(dim, dim);
    for t in trajectories {
        rho += &t.final_state * t.final_state.adjoint();
    }
    rho / C64::new(trajectories.len() as f64, 0.0)
}

/// Full master equation on a small space, with the recoil kernel
/// integrated over the emission pattern by Simpson's rule.
pub fn master_equation(
    p: &SystemParams,
    e: &EmissionPattern,
    s: &FullSpace,
    nodes: usize,
) -> Result<Superoperator> {
    let h = build_hamiltonian(p, s)?;
    let int = s.internal();
    let nodes = nodes.max(3) | 1;
    let step = 2.0 / (nodes - 1) as f64;
    let x = DMatrix::<f64>::from_fn(s.n_motion, s.n_motion, |i, j| s.position()[(i, j)].re);
    let eig = x.symmetric_eigen();
    let v = eig.eigenvectors.map(|z| C64::new(z, 0.0));
    let raw: Vec<(f64, f64)> = (0..nodes)
        .map(|k| {
            let u = -1.0 + k as f64 * step;
            let simpson = if k == 0 || k == nodes - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (u, simpson * e.density(u))
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    let sigma = int.sigma();
    let mut jumps = vec![s.lift_internal(&int.a()) * C64::new(p.kappa.sqrt(), 0.0)];
    for (u, w) in raw {
        if w == 0.0 {
            continue;
        }
        let d = CMatrix::from_diagonal(
            &eig.eigenvalues
                .map(|xv| C64::from_polar(1.0, -p.eta * u * xv)),
        );
        let recoil = &v * d * v.transpose();
        jumps.push(kron(&sigma, &recoil) * C64::new((p.gamma * w / total).sqrt(), 0.0));
    }
    Ok(Superoperator::new(&h, jumps))
}

/// `exp(L t) rho0` by dense exponentiation.
pub fn integrate_master_equation(l: &Superoperator, rho0: &CMatrix, t: f64) -> CMatrix {
    let m = l.matrix() * C64::new(t, 0.0);
    unvec(&(m.exp() * vec_of(rho0)), l.dim())
}

const MAGIC: &[u8; 8] = b"CAVMCWF1";

/// Writes trajectories in the little-endian record layout:
///
/// ```text
/// header:  magic "CAVMCWF1" | u32 version = 1 | [u8; 32] params hash
///          | u32 n_trajectories | u32 n_times | f64 times[n_times]
/// record:  u64 seed | u64 index | f64 phonons[n] | f64 excited[n]
///          | f64 photons[n] | u32 n_jumps
///          | n_jumps x (f64 time | u8 channel (0 cavity, 1 spontaneous) | f64 cos_theta)
/// ```
pub fn write_records(
    out: &mut impl Write,
    params_hash: &[u8; 32],
    trajectories: &[Trajectory],
) -> Result<()> {
    let times: &[f64] = trajectories.first().map_or(&[], |t| &t.times);
    out.write_all(MAGIC)?;
    out.write_all(&1u32.to_le_bytes())?;
    out.write_all(params_hash)?;
    out.write_all(&(trajectories.len() as u32).to_le_bytes())?;
    out.write_all(&(times.len() as u32).to_le_bytes())?;
    for t in times {
        out.write_all(&t.to_le_bytes())?;
    }
    for t in trajectories {
        if t.times.len() != times.len() {
            return Err(Error::GridMismatch);
        }
        out.write_all(&t.seed.to_le_bytes())?;
        out.write_all(&t.index.to_le_bytes())?;
        for series in [&t.phonons, &t.excited, &t.photons] {
            for v in series.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.write_all(&(t.jumps.len() as u32).to_le_bytes())?;
        for j in &t.jumps {
            out.write_all(&j.time.to_le_bytes())?;
            let (tag, c) = match j.channel {
                JumpChannel::Cavity => (0u8, 0.0),
                JumpChannel::Spontaneous { cos_theta } => (1u8, cos_theta),
            };
            out.write_all(&[tag])?;
            out.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const N: usize>(input: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

/// Reads what [`write_records`] wrote; final states are not stored.
pub fn read_records(input: &mut impl Read) -> Result<([u8; 32], Vec<Trajectory>)> {
    if &take::<8>(input)? != MAGIC {
        return Err(Error::Io("not a trajectory record file".into()));
    }
    let _version = u32::from_le_bytes(take(input)?);
    let hash = take::<32>(input)?;
    let count = u32::from_le_bytes(take(input)?) as usize;
    let n = u32::from_le_bytes(take(input)?) as usize;
    let f = |input: &mut dyn Read| -> Result<f64> {
        let mut b = [0u8; 8];
        input.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    };
    let times = (0..n).map(|_| f(input)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let seed = u64::from_le_bytes(take(input)?);
        let index = u64::from_le_bytes(take(input)?);
        let phonons = (0..n).map(|_| f(input)).collect::<Result<Vec<_>>>()?;
        let excited = (0..n).map(|_| f(input)).collect::<Result<Vec<_>>>()?;
        let photons = (0..n).map(|_| f(input)).collect::<Result<Vec<_>>>()?;
        let n_jumps = u32::from_le_bytes(take(input)?) as usize;
        let mut jumps = Vec::with_capacity(n_jumps);
        for _ in 0..n_jumps {
            let time = f(input)?;
            let tag = take::<1>(input)?[0];
            let c = f(input)?;
            let channel = if tag == 0 {
                JumpChannel::Cavity
            } else {
                JumpChannel::Spontaneous { cos_theta: c }
            };
            jumps.push(Jump { time, channel });
        }
        out.push(Trajectory {
            seed,
            index,
            times: times.clone(),
            phonons,
            excited,
            photons,
            jumps,
            final_state: CVector::zeros(0),
        });
    }
    Ok((hash, out))
}
