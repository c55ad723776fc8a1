//! Small dense/iterative linear algebra helpers on complex matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Identity-padded Kronecker products used to vectorise `A X B`.
///
/// With column stacking, `vec(A X B) = (B^T (x) A) vec(X)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// Reshape a column-stacked vector back into a square matrix.
pub fn unvec(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Dense LU solve; `SingularResolvent` if the factorisation is singular or
/// the solution is not finite.
pub fn lu_solve(m: CMatrix, b: &CVector) -> Result<CVector> {
    let lu = m.lu();
    let x = lu.solve(b).ok_or(Error::SingularResolvent)?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularResolvent)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    /// Target `||b - A x|| / ||b||`.
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            restart: 80,
            max_iter: 20_000,
            tol: 1e-10,
        }
    }
}

/// Restarted GMRES for `A x = b` with `A` given as an action.
///
/// Returns the solution and the achieved relative residual; fails with
/// `SingularResolvent` if the tolerance is not reached.
pub fn gmres<F>(
    apply: F,
    b: &CVector,
    x0: Option<&CVector>,
    opts: GmresOptions,
) -> Result<(CVector, f64)>
where
    F: Fn(&CVector) -> CVector,
{
    let n = b.len();
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok((CVector::zeros(n), 0.0));
    }
    let mut x = x0.cloned().unwrap_or_else(|| CVector::zeros(n));
    let m = opts.restart.max(1).min(n.max(1));
    let mut iters = 0;
    loop {
        let r = b - apply(&x);
        let beta = r.norm();
        if beta / bnorm <= opts.tol {
            return Ok((x, beta / bnorm));
        }
        if iters >= opts.max_iter {
            return Err(Error::SingularResolvent);
        }
        let mut basis: Vec<CVector> = Vec::with_capacity(m + 1);
        basis.push(r / C64::from(beta));
        let mut h = DMatrix::<C64>::zeros(m + 1, m);
        let mut cs = vec![C64::new(0.0, 0.0); m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::from(beta);
        let mut k_used = 0;
        for k in 0..m {
            iters += 1;
            let mut w = apply(&basis[k]);
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for (j, v) in basis.iter().enumerate() {
                    let hij = v.dotc(&w);
                    h[(j, k)] += hij;
                    w.axpy(-hij, v, C64::new(1.0, 0.0));
                }
            }
            let wn = w.norm();
            h[(k + 1, k)] = C64::from(wn);
            for j in 0..k {
                let t = cs[j].conj() * h[(j, k)] + sn[j].conj() * h[(j + 1, k)];
                h[(j + 1, k)] = -sn[j] * h[(j, k)] + cs[j] * h[(j + 1, k)];
                h[(j, k)] = t;
            }
            let (a, bb) = (h[(k, k)], h[(k + 1, k)]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[k] = C64::new(1.0, 0.0);
                sn[k] = C64::new(0.0, 0.0);
            } else {
                cs[k] = a / denom;
                sn[k] = bb / denom;
            }
            h[(k, k)] = cs[k].conj() * a + sn[k].conj() * bb;
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            let converged = g[k + 1].norm() / bnorm <= opts.tol;
            if converged || wn == 0.0 || iters >= opts.max_iter {
                break;
            }
            basis.push(w / C64::from(wn));
        }
        let mut y = vec![C64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.axpy(*yi, v, C64::new(1.0, 0.0));
        }
        if !x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::SingularResolvent);
        }
    }
}

/// Full eigendecomposition `M = V diag(lambda) V^-1` through the complex
/// Schur form. Intended for small matrices only.
pub struct Eigen {
    pub values: CVector,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
}

pub fn eigen(m: &CMatrix) -> Result<Eigen> {
    let n = m.nrows();
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or(Error::SingularResolvent)?;
    let (q, t) = schur.unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < 1e-14 * scale {
                d = C64::new(1e-14 * scale, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        col /= C64::from(nrm);
    }
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or(Error::SingularResolvent)?;
    Ok(Eigen {
        values: t.diagonal(),
        vectors,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn kron_vectorises_column_stacked() {
        let (a, x, b) = (
            random_matrix(3, 1),
            random_matrix(3, 2),
            random_matrix(3, 3),
        );
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn gmres_matches_lu() {
        let n = 40;
        let m = random_matrix(n, 7) + CMatrix::identity(n, n) * C64::new(3.0, 1.0);
        let b = CVector::from_fn(n, |i, _| C64::new(i as f64, 1.0));
        let direct = lu_solve(m.clone(), &b).unwrap();
        let opts = GmresOptions {
            restart: 10,
            ..Default::default()
        };
        let (iter, res) = gmres(|v| &m * v, &b, None, opts).unwrap();
        assert!(res <= 1e-10);
        assert!((&iter - &direct).norm() / direct.norm() < 1e-8);
    }

    #[test]
    fn eigen_reconstructs() {
        let m = random_matrix(12, 11);
        let e = eigen(&m).unwrap();
        let rebuilt = &e.vectors * CMatrix::from_diagonal(&e.values) * &e.inverse;
        assert!((rebuilt - m).norm() < 1e-10);
    }

    #[test]
    fn singular_lu_is_reported() {
        let m = CMatrix::zeros(3, 3);
        let b = CVector::from_element(3, C64::new(1.0, 0.0));
        assert!(matches!(lu_solve(m, &b), Err(Error::SingularResolvent)));
    }
}
