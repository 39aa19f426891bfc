//! Checks of the Euler relations, the Hessian structure on nonobtuse
//! configurations, the sum-of-roots bounds and the non-concavity example.

use rand::Rng;

use super::ScanReport;
use crate::battery::{nonconcavity_matrix, random_interior, MIN_EIG};
use crate::closedform::{arccos_terms, bounds, f_max, gradient_from, hessian_from};
use crate::corrdomain::{CorrelationMatrix4, DomainTag, PAIR_LABELS};
use crate::geometry::dihedrals;
use crate::linalg::sym_eigen;
use crate::scalar::{pi_3_2, to_f64, Scalar};
use crate::{Corr4, Error, Result};

/// F(Λ) − F(Λ̄) for the non-concavity matrix and its averaged counterpart.
pub const NONCONCAVITY_DIFFERENCE: f64 = 0.000_399_478_2;

/// Tolerance of the Hessian row relation on well-conditioned matrices.
pub const EULER_TOL: f64 = 1e-8;
/// Tolerance of F = −2 Σ Λ' ∂F.
pub const EULER_VALUE_TOL: f64 = 1e-10;
/// Interior dihedral cosines must be at least this for a matrix to count as nonobtuse.
pub const NONOBTUSE_TOL: f64 = 1e-6;

fn require_interior<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<()> {
    let c = m.classify();
    match c.tag {
        DomainTag::InteriorS => Ok(()),
        DomainTag::Invalid => Err(Error::InvalidMatrix(c.reason.unwrap_or_default())),
        DomainTag::DegenerateUnitPair => {
            let (i, j) = c.witness.unwrap_or((0, 0));
            Err(Error::NotInS1(format!("{i}{j}")))
        }
        DomainTag::BoundaryS1 => Err(Error::Singular),
    }
}

/// Euler relations at relative [`EULER_TOL`]; see [`euler_relation_check_with`].
pub fn euler_relation_check<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<ScanReport> {
    euler_relation_check_with(m, EULER_TOL)
}

/// Residuals of Σ_kl Λ'_kl ∂²F/∂Λ_pq∂Λ_kl − ½ ∂F/∂Λ_pq for all six rows,
/// relative to max_q |½ ∂F/∂Λ_q|, and of F + 2 Σ Λ' ∂F relative to F.
///
/// The margin is `tol` minus the largest row residual; the value relation is
/// reported separately and must stay below [`EULER_VALUE_TOL`].
pub fn euler_relation_check_with<T: Scalar>(m: &CorrelationMatrix4<T>, tol: f64) -> Result<ScanReport> {
    require_interior(m)?;
    let d = m.derive();
    let g = gradient_from(&d)?.components;
    let h = hessian_from(&d)?.entries;
    let lp = d.lambda_prime;
    let half = T::one() / T::int(2);
    let scale = g.iter().fold(T::zero(), |s, &x| s.max((x * half).abs()));
    let rows: Vec<f64> = (0..6)
        .map(|p| {
            let lhs = (0..6).fold(T::zero(), |s, q| s + lp[q] * h[p][q]);
            to_f64((lhs - half * g[p]).abs() / scale)
        })
        .collect();
    let f = crate::closedform::f_max_s1(&d)?;
    let value = (0..6).fold(T::zero(), |s, p| s + lp[p] * g[p]) * -T::int(2);
    let value_rel = to_f64((value - f).abs() / f.abs());
    let (worst_row, worst) = rows.iter().copied().enumerate().fold((0, 0.0f64), |b, (p, r)| if r > b.1 { (p, r) } else { b });
    let worst = if rows.iter().any(|r| r.is_nan()) { f64::INFINITY } else { worst };
    let per_row: serde_json::Map<String, serde_json::Value> =
        (0..6).map(|p| (PAIR_LABELS[p].to_string(), serde_json::json!(rows[p]))).collect();
    let mut r = ScanReport::new("euler_relation", "six Hessian rows and the value relation", 7, tol - worst, vec![worst_row as f64], 0.0)
        .with("tolerance", tol)
        .with("max_row_residual", worst)
        .with("row_residuals", per_row)
        .with("value_residual", value_rel);
    r.pass = r.pass && value_rel <= EULER_VALUE_TOL;
    Ok(r)
}

/// F(Λ) − F(Λ̄) where Λ̄ has every off-diagonal equal to the mean of Λ's.
pub fn averaged_difference<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<T> {
    let mean = m.offdiag.iter().fold(T::zero(), |s, &x| s + x) / T::int(6);
    Ok(f_max(m)? - f_max(&CorrelationMatrix4::equicorrelated(mean))?)
}

/// Checks that F at (0.93, 0.91, 0.90, 0.75, 0.77, 0.75) exceeds F at the
/// averaged matrix by [`NONCONCAVITY_DIFFERENCE`] to within 1e−9.
pub fn nonconcavity_example() -> ScanReport {
    let m = nonconcavity_matrix();
    let diff = averaged_difference(&m).unwrap_or(f64::NAN);
    let err = (diff - NONCONCAVITY_DIFFERENCE).abs();
    let mut r = ScanReport::new("nonconcavity", "one matrix and its average", 2, 1e-9 - err, m.offdiag.to_vec(), 0.0)
        .with("difference", diff)
        .with("expected", NONCONCAVITY_DIFFERENCE)
        .with("abs_error", err);
    r.pass = r.pass && diff > 0.0;
    r
}

/// Φ_pp = arccos(Λ̃_p/√R_p) / (8√π³ Λ'_p^{3/2}), the own-pair part of −Hess.
pub fn phi_diagonal<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<[T; 6]> {
    let d = m.derive();
    let ac = arccos_terms(&d)?;
    let c = T::int(8) * pi_3_2::<T>();
    Ok(std::array::from_fn(|p| ac[p] / (c * d.lambda_prime[p] * d.lambda_prime[p].sqrt())))
}

/// Structure of ℋ = −Hess F at a nonobtuse interior matrix: positive diagonal,
/// positive determinant, and Ψ = ℋ − Φ annihilating the Λ' vector.
///
/// A matrix is nonobtuse when every interior dihedral cosine −Λ̃/√R is at
/// least −1e−12; otherwise the result is [`Error::ObtuseInput`].
pub fn nonobtuse_hessian_check<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<ScanReport> {
    require_interior(m)?;
    let dh = dihedrals(m)?;
    let worst_cos = dh.cos.iter().fold(f64::INFINITY, |s, &c| s.min(-to_f64(c)));
    if worst_cos < -1e-12 {
        return Err(Error::ObtuseInput(format!("smallest interior dihedral cosine is {worst_cos:.6e}")));
    }
    let d = m.derive();
    let h = hessian_from(&d)?.entries;
    let calh: [[f64; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|j| -to_f64(h[i][j])));
    let phi = phi_diagonal(m)?.map(to_f64);
    let psi: [[f64; 6]; 6] =
        std::array::from_fn(|i| std::array::from_fn(|j| calh[i][j] - if i == j { phi[i] } else { 0.0 }));
    let v = d.lambda_prime.map(to_f64);
    let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let psi_v = (0..6).map(|i| (0..6).map(|j| psi[i][j] * v[j]).sum::<f64>()).map(|x| x * x).sum::<f64>().sqrt();
    let psi_v_rel = psi_v / vnorm;

    let eig = sym_eigen(&calh).values;
    let det: f64 = eig.iter().product();
    let psi_eig = sym_eigen(&psi).values;
    let psi_scale = psi_eig.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let psi_rank = psi_eig.iter().filter(|x| x.abs() > 1e-10 * psi_scale).count();
    let min_diag = (0..6).fold(f64::INFINITY, |s, i| s.min(calh[i][i]));

    let diag_scale = (0..6).fold(0.0f64, |s, i| s.max(calh[i][i].abs()));
    let margins = [min_diag / diag_scale, det / diag_scale.powi(6), 1.0 - psi_v_rel / 1e-8];
    let margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ScanReport::new("nonobtuse_hessian", "one matrix", 1, margin, m.offdiag.map(to_f64).to_vec(), 0.0)
        .with("min_interior_dihedral_cos", worst_cos)
        .with("min_diagonal", min_diag)
        .with("det", det)
        .with("min_eigenvalue", eig[0])
        .with("psi_v_relative", psi_v_rel)
        .with("psi_rank", psi_rank)
        .with("psi_eigenvalues", psi_eig))
}

/// Whether every interior dihedral cosine of `m` is at least [`NONOBTUSE_TOL`].
pub fn is_nonobtuse(m: &Corr4) -> bool {
    dihedrals(m).is_ok_and(|d| d.nonobtuse(NONOBTUSE_TOL))
}

/// Draws interior matrices (smallest eigenvalue ≥ [`MIN_EIG`]) until `count`
/// are nonobtuse.
pub fn sample_nonobtuse(rng: &mut impl Rng, count: usize) -> Vec<Corr4> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = random_interior(rng, MIN_EIG);
        if is_nonobtuse(&m) {
            out.push(m);
        }
    }
    out
}

/// Σ√Λ'/(4√π) ≤ F ≤ Σ√Λ'/(3√π); the margin is the smaller gap.
pub fn bounds_check<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<ScanReport> {
    let f = to_f64(f_max(m)?);
    let (lo, hi) = bounds(m);
    let (lo, hi) = (to_f64(lo), to_f64(hi));
    let margin = (f - lo).min(hi - f);
    Ok(ScanReport::new("bounds", "one matrix", 1, margin, m.offdiag.map(to_f64).to_vec(), -1e-12)
        .with("lower", lo)
        .with("value", f)
        .with("upper", hi))
}
