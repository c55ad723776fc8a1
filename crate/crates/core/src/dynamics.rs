//! Phonon-number rate equation
//!
//! ```text
//! dp_n/dt = eta^2 [ (n+1) A- p_{n+1} - ((n+1) A+ + n A-) p_n + n A+ p_{n-1} ]
//! ```
//!
//! solved exactly on a truncated ladder `0..=n_max` with a reflecting top
//! level. Time stepping uses uniformization, which keeps every occupation
//! nonnegative and accurate to relative precision even deep in the tail;
//! very long intervals fall back to a dense matrix exponential.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::analytic::{RateResult, SteadyState};
use crate::error::{Error, Result};

/// Default bound on the population of the top Fock level.
pub const LEAK_BOUND: f64 = 1e-6;

/// Above this many expected uniformization events per interval the dense
/// exponential is cheaper.
const UNIFORMIZATION_LIMIT: f64 = 2e6;

/// Occupation probabilities `p_0 ..= p_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDistribution {
    p: Vec<f64>,
}

impl PhononDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "need at least two levels".into(),
            });
        }
        if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "occupations must be finite and >= 0".into(),
            });
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("occupations sum to {total}"),
            });
        }
        Ok(PhononDistribution { p })
    }

    pub fn fock(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max && n_max >= 1);
        let mut p = vec![0.0; n_max + 1];
        p[n] = 1.0;
        PhononDistribution { p }
    }

    /// Geometric distribution with the given mean, truncated and
    /// renormalised.
    pub fn thermal(mean: f64, n_max: usize) -> Self {
        assert!(mean >= 0.0 && n_max >= 1);
        let ratio = mean / (1.0 + mean);
        let mut p: Vec<f64> = (0..=n_max).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        PhononDistribution { p }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, x)| n as f64 * x).sum()
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn tail(&self) -> f64 {
        self.p[self.p.len() - 1]
    }

    /// `sum_n p_n^2`.
    pub fn purity(&self) -> f64 {
        self.p.iter().map(|x| x * x).sum()
    }

    pub fn total_variation(&self, other: &PhononDistribution) -> f64 {
        0.5 * self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Default truncation `10 max(<n>_0, <n>_St) + 20`.
pub fn default_n_max(n0: f64, n_st: SteadyState) -> usize {
    let n_st = n_st.value().unwrap_or(n0);
    (10.0 * n0.max(n_st)).ceil() as usize + 20
}

/// Tridiagonal generator of the truncated rate equation.
#[derive(Debug, Clone, Copy)]
struct Generator {
    up: f64,
    down: f64,
    n_max: usize,
}

impl Generator {
    fn new(rates: &RateResult, eta: f64, n_max: usize) -> Result<Self> {
        if !(rates.a_plus.is_finite() && rates.a_minus.is_finite())
            || rates.a_plus < 0.0
            || rates.a_minus < 0.0
        {
            return Err(Error::InvalidParameter {
                name: "rates",
                reason: "rates must be finite and nonnegative".into(),
            });
        }
        let e2 = eta * eta;
        Ok(Generator {
            up: e2 * rates.a_plus,
            down: e2 * rates.a_minus,
            n_max,
        })
    }

    fn up_rate(&self, n: usize) -> f64 {
        if n < self.n_max {
            (n + 1) as f64 * self.up
        } else {
            0.0
        }
    }

    fn down_rate(&self, n: usize) -> f64 {
        n as f64 * self.down
    }

    fn exit_rate(&self, n: usize) -> f64 {
        self.up_rate(n) + self.down_rate(n)
    }

    fn max_exit(&self) -> f64 {
        (0..=self.n_max)
            .map(|n| self.exit_rate(n))
            .fold(0.0, f64::max)
    }

    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let last = self.n_max;
        for n in 0..=last {
            let mut v = -self.exit_rate(n) * p[n];
            if n < last {
                v += self.down_rate(n + 1) * p[n + 1];
            }
            if n > 0 {
                v += self.up_rate(n - 1) * p[n - 1];
            }
            out[n] = v;
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let dim = self.n_max + 1;
        let mut m = DMatrix::zeros(dim, dim);
        for n in 0..dim {
            m[(n, n)] = -self.exit_rate(n);
            if n + 1 < dim {
                m[(n, n + 1)] = self.down_rate(n + 1);
                m[(n + 1, n)] = self.up_rate(n);
            }
        }
        m
    }

    /// Advances `p` by `dt`.
    fn propagate(&self, p: &[f64], dt: f64) -> Vec<f64> {
        let lambda = self.max_exit();
        let events = lambda * dt;
        if events == 0.0 {
            return p.to_vec();
        }
        if events > UNIFORMIZATION_LIMIT {
            return self.propagate_dense(p, dt);
        }
        let (first, weights) = poisson_weights(events);
        let mut v = p.to_vec();
        let mut gv = vec![0.0; v.len()];
        let mut acc = vec![0.0; v.len()];
        for k in 0..first + weights.len() {
            if k >= first {
                let w = weights[k - first];
                acc.iter_mut().zip(&v).for_each(|(a, x)| *a += w * x);
            }
            self.apply(&v, &mut gv);
            v.iter_mut()
                .zip(&gv)
                .for_each(|(x, g)| *x = (*x + g / lambda).max(0.0));
        }
        acc
    }

    fn propagate_dense(&self, p: &[f64], dt: f64) -> Vec<f64> {
        let prop = (self.dense() * dt).exp();
        let v = prop * nalgebra::DVector::from_column_slice(p);
        let mut out: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= total);
        out
    }
}

/// Normalised Poisson weights covering all but ~1e-18 of the mass,
/// returned as `(first index, weights)`.
fn poisson_weights(mean: f64) -> (usize, Vec<f64>) {
    const CUT: f64 = 1e-18;
    let mode = mean.floor() as usize;
    let mut right = vec![1.0];
    let mut k = mode;
    loop {
        let next = right[right.len() - 1] * mean / (k + 1) as f64;
        if next < CUT && k + 1 > mode {
            break;
        }
        right.push(next);
        k += 1;
    }
    let mut left = Vec::new();
    let mut w = 1.0;
    let mut k = mode;
    while k > 0 {
        w *= k as f64 / mean;
        if w < CUT {
            break;
        }
        left.push(w);
        k -= 1;
    }
    let first = mode - left.len();
    let mut weights: Vec<f64> = left.into_iter().rev().chain(right).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|x| *x /= total);
    (first, weights)
}

/// Solves the rate equation from `p0` and returns the distribution at
/// every time in `t_grid` (nondecreasing, starting at or after 0).
pub fn evolve_pn(
    p0: &PhononDistribution,
    rates: &RateResult,
    eta: f64,
    t_grid: &[f64],
) -> Result<Vec<PhononDistribution>> {
    evolve_pn_with(p0, rates, eta, t_grid, LEAK_BOUND)
}

pub fn evolve_pn_with(
    p0: &PhononDistribution,
    rates: &RateResult,
    eta: f64,
    t_grid: &[f64],
    leak_bound: f64,
) -> Result<Vec<PhononDistribution>> {
    let gen = Generator::new(rates, eta, p0.n_max())?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    let mut p = p0.p.clone();
    for &next in t_grid {
        if next < t || !next.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_grid",
                reason: "times must be finite and nondecreasing from 0".into(),
            });
        }
        p = gen.propagate(&p, next - t);
        t = next;
        let top = p[p.len() - 1];
        if top > leak_bound {
            return Err(Error::TruncationLeak {
                population: top,
                bound: leak_bound,
            });
        }
        out.push(PhononDistribution { p: p.clone() });
    }
    Ok(out)
}

/// `d<n>/dt` of a distribution under the truncated rate equation.
pub fn mean_rate(p: &PhononDistribution, rates: &RateResult, eta: f64) -> Result<f64> {
    let gen = Generator::new(rates, eta, p.n_max())?;
    let mut gp = vec![0.0; p.p.len()];
    gen.apply(&p.p, &mut gp);
    Ok(gp.iter().enumerate().map(|(n, x)| n as f64 * x).sum())
}

/// Mean phonon number from the first-moment equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanPhonon {
    /// `A- > A+`: relaxation towards `<n>_St`.
    Relaxing(f64),
    /// `A- <= A+`: unbounded growth.
    Growing(f64),
}

impl MeanPhonon {
    pub fn value(&self) -> f64 {
        match *self {
            MeanPhonon::Relaxing(v) | MeanPhonon::Growing(v) => v,
        }
    }
}

/// `<n>_t = <n>_0 e^{-W t} + <n>_St (1 - e^{-W t})` with
/// `W = eta^2 (A- - A+)`.
pub fn mean_n_closed_form(n0: f64, rates: &RateResult, eta: f64, t: f64) -> MeanPhonon {
    let e2 = eta * eta;
    let w = e2 * (rates.a_minus - rates.a_plus);
    let heating = e2 * rates.a_plus;
    let value = if w == 0.0 {
        n0 + heating * t
    } else {
        let decay = (-w * t).exp();
        n0 * decay + heating / w * (1.0 - decay)
    };
    if rates.a_minus > rates.a_plus {
        MeanPhonon::Relaxing(value)
    } else {
        MeanPhonon::Growing(value)
    }
}

/// Time series of the mean phonon number.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingTrajectory {
    pub times: Vec<f64>,
    pub mean_n: Vec<f64>,
    /// Pointwise standard error, when the curve is an ensemble average.
    pub std_err: Option<Vec<f64>>,
    /// Cooling rate.
    pub w: f64,
    /// Asymptotic mean phonon number.
    pub n_st: SteadyState,
}

impl CoolingTrajectory {
    pub fn closed_form(n0: f64, rates: &RateResult, eta: f64, times: &[f64]) -> Self {
        CoolingTrajectory {
            times: times.to_vec(),
            mean_n: times
                .iter()
                .map(|&t| mean_n_closed_form(n0, rates, eta, t).value())
                .collect(),
            std_err: None,
            w: eta * eta * (rates.a_minus - rates.a_plus),
            n_st: rates.n_st,
        }
    }
}

/// CSV table `time,mean_n,p0,purity` for a rate-equation solution.
pub fn trajectory_csv(times: &[f64], dists: &[PhononDistribution]) -> String {
    let mut s = String::from("time,mean_n,p0,purity\n");
    for (t, d) in times.iter().zip(dists) {
        let _ = writeln!(s, "{t},{},{},{}", d.mean(), d.p[0], d.purity());
    }
    s
}
