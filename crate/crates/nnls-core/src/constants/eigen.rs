use std::sync::Arc;

use super::{Constant, ConstantsError, Provenance, Tolerances};
use crate::linalg::Tridiagonal;
use crate::radial::{RadialFunction, RadialGrid};
use crate::real::Real;

const COARSE: usize = 512;
const MAX_ITER: usize = 500;

/// θ₁ with its eigenfunction v₁ (‖v₁‖₂² = 1, positive) on the unit ball.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub theta: Constant<T>,
    pub function: RadialFunction<T>,
}

fn stiffness_matrix<T: Real>(grid: &RadialGrid<T>) -> Tridiagonal<T> {
    let m = grid.cells();
    let w = grid.flux();
    let diag = (0..m).map(|i| if i > 0 { w[i - 1] + w[i] } else { w[i] }).collect();
    let off: Vec<T> = (0..m - 1).map(|i| -w[i]).collect();
    Tridiagonal { lower: off.clone(), diag, upper: off }
}

/// Smallest eigenpair of A v = θ M v on the grid (Dirichlet at R), by inverse iteration.
pub fn discrete_principal_pair<T: Real>(grid: Arc<RadialGrid<T>>) -> Result<(T, RadialFunction<T>), ConstantsError> {
    principal_pair(grid, T::lit(8.0) * T::epsilon())
}

/// Stops once the Rayleigh quotient changes by at most `stop` (relative).
fn principal_pair<T: Real>(grid: Arc<RadialGrid<T>>, stop: T) -> Result<(T, RadialFunction<T>), ConstantsError> {
    let m = grid.cells();
    let a = stiffness_matrix(&grid);
    let mw = &grid.weights()[..m];
    let quad = |x: &[T], y: &[T]| x.iter().zip(y).zip(mw).fold(T::zero(), |s, ((a, b), w)| s + *a * *b * *w);
    let mut v: Vec<T> = grid.nodes()[..m].iter().map(|s| grid.radius() - *s).collect();
    let mut theta = T::infinity();
    for _ in 0..MAX_ITER {
        let rhs: Vec<T> = v.iter().zip(mw).map(|(x, w)| *x * *w).collect();
        let mut next = a.solve(&rhs).ok_or(ConstantsError::EigenIterationStalled(0))?;
        let norm = quad(&next, &next).sqrt();
        for x in &mut next {
            *x = *x / norm;
        }
        let av = a.apply(&next);
        let rq = next.iter().zip(&av).fold(T::zero(), |s, (x, y)| s + *x * *y);
        v = next;
        if (rq - theta).abs() <= stop * rq {
            theta = rq;
            if v[0] < T::zero() {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v.push(T::zero());
            return Ok((theta, RadialFunction::new(grid, v)));
        }
        theta = rq;
    }
    Err(ConstantsError::EigenIterationStalled(MAX_ITER))
}

fn richardson<T: Real>(coarse: T, fine: T) -> T {
    (T::lit(4.0) * fine - coarse) / T::lit(3.0)
}

/// θ₁ of -Δ on the unit ball in R^N: discrete eigenvalues on M = 1024 and 2048 cells,
/// Richardson-extrapolated; the error estimate is the change from the (512, 1024) extrapolation.
pub fn ball_principal_eigenvalue<T: Real>(n: usize, tol: &Tolerances<T>) -> Result<EigenPair<T>, ConstantsError> {
    if n < 2 {
        return Err(ConstantsError::InvalidInput(format!("N = {n} < 2")));
    }
    let grid = |m: usize| {
        RadialGrid::new(T::one(), m, n).map(Arc::new).map_err(|e| ConstantsError::InvalidInput(e.to_string()))
    };
    let stop = tol.eigen.min(T::lit(1e-3)).max(T::lit(8.0) * T::epsilon());
    let (t0, _) = principal_pair(grid(COARSE)?, stop)?;
    let (t1, _) = principal_pair(grid(2 * COARSE)?, stop)?;
    let (t2, v) = principal_pair(grid(4 * COARSE)?, stop)?;
    let value = richardson(t1, t2);
    let err = (value - richardson(t0, t1)).abs();
    Ok(EigenPair {
        theta: Constant {
            value,
            provenance: Provenance {
                method: "inverse iteration, Richardson over two grids".into(),
                resolution: format!("M = {} and {}", 2 * COARSE, 4 * COARSE),
                error_estimate: err,
            },
        },
        function: v,
    })
}
