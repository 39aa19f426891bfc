//! Projected gradient ascent of F over the 4×4 elliptope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::battery::{random_interior, random_rank3};
use crate::closedform::{equicorrelated_value, f_max, gradient};
use crate::corrdomain::{full_matrix, CorrelationMatrix4, DomainTag, PAIRS};
use crate::linalg::{sym_eigen, Mat};
use crate::scalar::{lit, Scalar};
use crate::verify::ScanReport;
use crate::{Corr4, Error, Result};

/// Fixed-point residual accepted by [`project_elliptope`].
pub const PROJECTION_TOL: f64 = 1e-10;
/// Iteration cap of the alternating projections.
pub const PROJECTION_MAX_ITER: usize = 100_000;

fn frob<T: Scalar>(a: &Mat<T, 4>, b: &Mat<T, 4>) -> T {
    let mut s = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            let d = a[i][j] - b[i][j];
            s = s + d * d;
        }
    }
    s.sqrt()
}

fn psd_part<T: Scalar>(a: &Mat<T, 4>) -> Mat<T, 4> {
    sym_eigen(a).reconstruct_with(|x| x.max(T::zero()))
}

fn offdiag_of<T: Scalar>(a: &Mat<T, 4>) -> [T; 6] {
    std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        (a[i][j] + a[j][i]) / T::int(2)
    })
}

/// Nearest correlation matrix in Frobenius norm, by alternating projections
/// onto the PSD cone and the unit-diagonal set with Dykstra's correction.
///
/// The returned matrix is the PSD part of the last iterate rescaled to unit
/// diagonal, so it is PSD to roundoff and has an exact unit diagonal.
pub fn project_elliptope<T: Scalar>(sym: &Mat<T, 4>) -> Result<CorrelationMatrix4<T>> {
    if sym.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMatrix("matrix has non-finite entries".into()));
    }
    let tol: T = lit(PROJECTION_TOL);
    let mut y: Mat<T, 4> = std::array::from_fn(|i| std::array::from_fn(|j| (sym[i][j] + sym[j][i]) / T::int(2)));
    let mut ds = [[T::zero(); 4]; 4];
    for _ in 0..PROJECTION_MAX_ITER {
        let mut r = y;
        for i in 0..4 {
            for j in 0..4 {
                r[i][j] = r[i][j] - ds[i][j];
            }
        }
        let x = psd_part(&r);
        for i in 0..4 {
            for j in 0..4 {
                ds[i][j] = x[i][j] - r[i][j];
            }
        }
        let prev = y;
        y = x;
        for (i, row) in y.iter_mut().enumerate() {
            row[i] = T::one();
        }
        if frob(&y, &x) <= tol && frob(&y, &prev) <= tol {
            let p = psd_part(&y);
            let d: [T; 4] = std::array::from_fn(|i| p[i][i].sqrt());
            let scaled: Mat<T, 4> = std::array::from_fn(|i| std::array::from_fn(|j| p[i][j] / (d[i] * d[j])));
            return Ok(CorrelationMatrix4::unchecked(offdiag_of(&scaled).map(|x| x.max(-T::one()).min(T::one()))));
        }
    }
    Err(Error::NoConvergence(format!("alternating projections did not reach {PROJECTION_TOL:e}")))
}

/// Step and stopping parameters of [`maximize`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OptConfig {
    pub eta: f64,
    pub backtrack: f64,
    pub armijo: f64,
    /// Accepted steps multiply η by this (capped at `eta_max`).
    pub growth: f64,
    pub eta_max: f64,
    /// Stop when ‖Λ_new − Λ‖/η ≤ tol.
    pub tol: f64,
    /// Stop when the accepted value change is ≤ tol_f.
    pub tol_f: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            eta: 0.1,
            backtrack: 0.5,
            armijo: 1e-4,
            growth: 2.0,
            eta_max: 10.0,
            tol: 1e-8,
            tol_f: 1e-15,
            max_iter: 10_000,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step {
    pub value: f64,
    pub step: f64,
    pub projection_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptResult {
    pub argmax: Corr4,
    pub value: f64,
    pub iterations: usize,
    pub trajectory: Vec<Step>,
    pub converged: bool,
    /// Why the iteration stopped.
    pub stop: String,
}

fn require_s1(m: &Corr4) -> Result<()> {
    let c = m.classify();
    match c.tag {
        DomainTag::Invalid => Err(Error::InvalidMatrix(c.reason.unwrap_or_default())),
        DomainTag::DegenerateUnitPair => {
            let (i, j) = c.witness.unwrap_or((0, 0));
            Err(Error::NotInS1(format!("{i}{j}")))
        }
        _ => Ok(()),
    }
}

/// Projected gradient ascent Λ ← P(Λ + η∇F) with Armijo backtracking.
///
/// Line-search failure and iteration exhaustion return a result with
/// `converged = false` rather than an error.
pub fn maximize(start: &Corr4, cfg: &OptConfig) -> Result<OptResult> {
    require_s1(start)?;
    let mut cur = *start;
    let mut value = f_max(&cur)?;
    let mut eta = cfg.eta;
    let mut trajectory = Vec::new();
    let finish = |m: Corr4, it, trajectory, converged, stop: &str| -> Result<OptResult> {
        Ok(OptResult { argmax: m, value: f_max(&m)?, iterations: it, trajectory, converged, stop: stop.into() })
    };
    for it in 0..cfg.max_iter {
        let g = match gradient(&cur) {
            Ok(g) => g.components,
            Err(_) => return finish(cur, it, trajectory, false, "gradient undefined at iterate"),
        };
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial = full_matrix(&std::array::from_fn(|p| cur.offdiag[p] + eta * g[p]));
            let next = project_elliptope(&trial)?;
            if require_s1(&next).is_err() {
                eta *= cfg.backtrack;
                continue;
            }
            let delta: [f64; 6] = std::array::from_fn(|p| next.offdiag[p] - cur.offdiag[p]);
            let pg = delta.iter().map(|d| d * d).sum::<f64>().sqrt() / eta;
            if pg <= cfg.tol {
                return finish(cur, it, trajectory, true, "projected gradient below tol");
            }
            let v = f_max(&next)?;
            let gain: f64 = (0..6).map(|p| g[p] * delta[p]).sum();
            if v >= value + cfg.armijo * gain {
                let residual = frob(&trial, &next.full());
                accepted = Some((next, v, residual));
                break;
            }
            eta *= cfg.backtrack;
        }
        let Some((next, v, residual)) = accepted else {
            return finish(cur, it, trajectory, false, "line search failed");
        };
        trajectory.push(Step { value: v, step: eta, projection_residual: residual });
        let change = v - value;
        cur = next;
        value = v;
        if change <= cfg.tol_f {
            return finish(cur, it + 1, trajectory, true, "value change below tol_f");
        }
        eta = (eta * cfg.growth).min(cfg.eta_max);
    }
    finish(cur, cfg.max_iter, trajectory, false, "iteration limit")
}

/// Runs [`maximize`] from every start in parallel; results keep the input order.
pub fn maximize_many(starts: &[Corr4], cfg: &OptConfig) -> Vec<Result<OptResult>> {
    starts.par_iter().map(|s| maximize(s, cfg)).collect()
}

/// Seed of the random PSD comparison set in [`certify`].
pub const CERTIFY_SEED: u64 = 1_101;

/// (i) value ≤ F(−1/3 equicorrelated) + 1e−9, (ii) every off-diagonal of the
/// argmax within `dist_tol` of −1/3, (iii) F at 100 random PSD matrices
/// (half rank 3, half rank 4) never exceeds value + 1e−9.
pub fn certify(res: &OptResult, dist_tol: f64) -> ScanReport {
    let best = equicorrelated_value(-1.0 / 3.0);
    let m1 = best + 1e-9 - res.value;
    let dev = res.argmax.offdiag.iter().fold(0.0f64, |s, &x| s.max((x + 1.0 / 3.0).abs()));
    let m2 = dist_tol - dev;
    let mut rng = ChaCha8Rng::seed_from_u64(CERTIFY_SEED);
    let mut worst_random = f64::NEG_INFINITY;
    for k in 0..100 {
        let m = if k % 2 == 0 { random_rank3(&mut rng).1 } else { {
            let min_eig = rng.gen_range(0.0..0.2);
            random_interior(&mut rng, min_eig)
        } };
        if let Ok(f) = f_max(&m) {
            worst_random = worst_random.max(f);
        }
    }
    let m3 = res.value + 1e-9 - worst_random;
    let mut r = ScanReport::new("certify", "optimizer result and 100 random PSD matrices", 101, m1.min(m2).min(m3), res.argmax.offdiag.to_vec(), 0.0)
        .with("value", res.value)
        .with("equicorrelated_value", best)
        .with("max_deviation", dev)
        .with("dist_tol", dist_tol)
        .with("max_random_value", worst_random)
        .with("value_bound_ok", m1 >= 0.0)
        .with("argmax_ok", m2 >= 0.0)
        .with("random_ok", m3 >= 0.0);
    r.pass = m1 >= 0.0 && m2 >= 0.0 && m3 >= 0.0 && res.converged;
    r
}
