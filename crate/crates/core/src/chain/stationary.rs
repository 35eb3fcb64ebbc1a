use super::{DensityFamily, TransitionMatrix};
use crate::error::{Error, Result};
use crate::linalg::{strongly_connected, Matrix};
use crate::tolerance::Tolerances;

pub fn is_irreducible(m: &Matrix) -> bool {
    strongly_connected(&m.support())
}

/// `P_start P_{start+1} ... P_{start+M-1}` with indices mod `M`.
pub fn period_product(matrices: &[TransitionMatrix], start: usize) -> Matrix {
    let m = matrices.len();
    let mut acc = matrices[start % m].matrix().clone();
    for k in 1..m {
        acc = acc.matmul(matrices[(start + k) % m].matrix());
    }
    acc
}

/// Max-norm of `pi^T P - pi^T`.
pub fn stationary_residual(pi: &[f64], p: &Matrix) -> f64 {
    let next = p.left_mul(pi);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Unique invariant distribution of an irreducible stochastic matrix.
///
/// Chains up to `dense_max_states` are solved directly by the
/// Grassmann-Taksar-Heyman elimination, which involves no subtractions and
/// is accurate even for nearly decoupled chains. Larger chains use power
/// iteration from the uniform vector.
pub fn stationary_distribution(p: &Matrix, tol: &Tolerances) -> Result<Vec<f64>> {
    if !is_irreducible(p) {
        return Err(Error::precondition("stationary distribution requires an irreducible chain"));
    }
    let target = tol.stationary_residual;
    if p.n() <= tol.dense_max_states {
        let pi = gth(p);
        let r = stationary_residual(&pi, p);
        if r <= target {
            return Ok(pi);
        }
        return power_iteration(p, pi, target, tol.power_iteration_cap);
    }
    let n = p.n();
    power_iteration(p, vec![1.0 / n as f64; n], target, tol.power_iteration_cap)
}

fn gth(p: &Matrix) -> Vec<f64> {
    let n = p.n();
    let mut a = p.to_dense();
    for k in (1..n).rev() {
        let row_k = k * n;
        let s: f64 = a[row_k..row_k + k].iter().sum();
        for i in 0..k {
            a[i * n + k] /= s;
        }
        for i in 0..k {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[i * n + j] += aik * a[row_k + j];
            }
        }
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    for j in 1..n {
        x[j] = (0..j).map(|i| x[i] * a[i * n + j]).sum();
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

fn power_iteration(p: &Matrix, start: Vec<f64>, target: f64, cap: usize) -> Result<Vec<f64>> {
    let mut pi = start;
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let mut next = p.left_mul(&pi);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if residual <= target {
            let r = stationary_residual(&pi, p);
            if r <= target {
                return Ok(pi);
            }
            residual = r;
        }
    }
    Err(Error::solver(format!("power iteration did not converge in {cap} iterations"), residual))
}

/// The unique M-stationary family: `pi_0` is invariant for the period product
/// and the remaining slices are its push-forwards.
pub fn periodic_stationary_family(matrices: &[TransitionMatrix], tol: &Tolerances) -> Result<DensityFamily> {
    if matrices.is_empty() {
        return Err(Error::invalid("periodic family needs at least one matrix"));
    }
    let product = period_product(matrices, 0);
    if !is_irreducible(&product) {
        return Err(Error::precondition("period product P_0...P_{M-1} is not irreducible"));
    }
    let mut densities = vec![stationary_distribution(&product, tol)?];
    for m in 0..matrices.len() - 1 {
        let next = matrices[m].left_mul(&densities[m]);
        densities.push(next);
    }
    let wrap = matrices[matrices.len() - 1].left_mul(&densities[matrices.len() - 1]);
    let gap = wrap.iter().zip(&densities[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > tol.density_sum {
        return Err(Error::solver("periodic family does not close over one period", gap));
    }
    Ok(DensityFamily { densities })
}
