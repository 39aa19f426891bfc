//! Closed-form expected maximum F(Λ), its gradient and Hessian, the
//! degenerate reductions, the quadrant integral and the Gaussian density.

use serde::Serialize;

use crate::corrdomain::{
    pair_index, triangle_form, CorrDerived, CorrelationMatrix4, DomainTag, PAIRS, PAIR_LABELS, QUADS,
};
use crate::linalg::{inverse, sym_eigen};
use crate::scalar::{lit, pi_3_2, to_f64, Scalar};
use crate::{Error, Result};

/// Arguments this far outside [−1, 1] are clamped; larger ones are errors.
pub const EPS_CLAMP: f64 = 1e-9;
/// Numerator and radical below this are treated as 0/0 = 1.
pub const EPS_ZERO: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gradient6<T> {
    /// ∂F/∂Λ_kl in storage order.
    pub components: [T; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hessian6<T> {
    /// ∂²F/∂Λ_p∂Λ_q, rows and columns in storage order.
    pub entries: [[T; 6]; 6],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadrantIntegralParams<T> {
    pub a1: T,
    pub b1: T,
    pub c1: T,
    pub a: T,
}

fn clamp_unit<T: Scalar>(x: T, pair: usize) -> Result<T> {
    let eps: T = lit(EPS_CLAMP);
    if x.is_nan() || x.abs() > T::one() + eps {
        return Err(Error::ArccosDomain { pair: PAIR_LABELS[pair].into(), value: to_f64(x) });
    }
    Ok(x.max(-T::one()).min(T::one()))
}

/// Λ̃_p / √(radical_p) for every pair, with the 0/0 = 1 convention.
pub fn arccos_args<T: Scalar>(d: &CorrDerived<T>) -> Result<[T; 6]> {
    let tiny: T = lit(EPS_ZERO);
    let mut out = [T::zero(); 6];
    for p in 0..6 {
        let num = d.lambda_tilde[p];
        let rad = d.radical[p];
        out[p] = if num.abs() < tiny && rad.abs() < tiny {
            T::one()
        } else if rad <= T::zero() {
            return Err(Error::ArccosDomain { pair: PAIR_LABELS[p].into(), value: f64::NAN });
        } else {
            clamp_unit(num / rad.sqrt(), p)?
        };
    }
    Ok(out)
}

/// arccos of [`arccos_args`].
pub fn arccos_terms<T: Scalar>(d: &CorrDerived<T>) -> Result<[T; 6]> {
    Ok(arccos_args(d)?.map(|x| x.acos()))
}

/// F on S₁ from precomputed derived quantities.
pub fn f_max_s1<T: Scalar>(d: &CorrDerived<T>) -> Result<T> {
    let ac = arccos_terms(d)?;
    let s = (0..6).fold(T::zero(), |s, p| s + d.lambda_prime[p].max(T::zero()).sqrt() * ac[p]);
    Ok(s / (T::int(2) * pi_3_2::<T>()))
}

/// E[max] of three unit-variance Gaussians with the given correlations.
pub fn f_max3<T: Scalar>(r12: T, r13: T, r23: T) -> Result<T> {
    let eps: T = lit(crate::corrdomain::EPS_PSD);
    for (name, r) in [("r12", r12), ("r13", r13), ("r23", r23)] {
        if !r.is_finite() || r.abs() > T::one() + eps {
            return Err(Error::InvalidMatrix(format!("{name} = {r:?} lies outside [-1, 1]")));
        }
    }
    let one = T::one();
    let m = [[one, r12, r13], [r12, one, r23], [r13, r23, one]];
    let ev = sym_eigen(&m).values;
    if ev[0] < -eps {
        return Err(Error::InvalidMatrix(format!("3x3 matrix has eigenvalue {:?}", ev[0])));
    }
    let s = (one - r12).max(T::zero()).sqrt() + (one - r13).max(T::zero()).sqrt() + (one - r23).max(T::zero()).sqrt();
    Ok(s / (T::int(2) * T::PI().sqrt()))
}

/// E[max(X1, X2)] = √((1 − r)/π).
pub fn e_max2<T: Scalar>(r: T) -> T {
    ((T::one() - r).max(T::zero()) / T::PI()).sqrt()
}

/// F for the equicorrelated matrix with Λ_kl = r ∈ [−1/3, 1].
pub fn equicorrelated_value<T: Scalar>(r: T) -> T {
    let third = T::one() / T::int(3);
    T::int(3) * (T::one() - r).sqrt() * (-third).acos() / pi_3_2::<T>()
}

/// Lower and upper bounds Σ√Λ'/(4√π) and Σ√Λ'/(3√π).
pub fn bounds<T: Scalar>(m: &CorrelationMatrix4<T>) -> (T, T) {
    let s = m.offdiag.iter().fold(T::zero(), |s, &x| s + (T::one() - x).max(T::zero()).sqrt());
    let sp = T::PI().sqrt();
    (s / (T::int(4) * sp), s / (T::int(3) * sp))
}

/// Groups variables joined by Λ_kl = 1; returns the smallest index of each group.
fn distinct_representatives<T: Scalar>(m: &CorrelationMatrix4<T>) -> Vec<usize> {
    let mut parent = [0usize, 1, 2, 3];
    fn find(parent: &mut [usize; 4], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    let cut = T::one() - lit::<T>(crate::corrdomain::EPS_ONE);
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        if m.offdiag[p] >= cut {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
        }
    }
    let mut reps: Vec<usize> = (0..4).map(|v| find(&mut parent, v)).collect();
    reps.sort();
    reps.dedup();
    reps
}

/// E[max(X1..X4)] for any valid correlation matrix.
///
/// On S₁ this is the arccos sum; when some Λ_kl = 1 the duplicated variables
/// are merged and the 3-, 2- or 1-variable value is returned.
pub fn f_max<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<T> {
    let c = m.classify();
    match c.tag {
        DomainTag::Invalid => Err(Error::InvalidMatrix(c.reason.unwrap_or_default())),
        DomainTag::InteriorS | DomainTag::BoundaryS1 => f_max_s1(&m.derive()),
        DomainTag::DegenerateUnitPair => {
            let reps = distinct_representatives(m);
            match reps.as_slice() {
                [a, b, c] => f_max3(m.get(*a, *b), m.get(*a, *c), m.get(*b, *c)),
                [a, b] => Ok(e_max2(m.get(*a, *b))),
                [_] => Ok(T::zero()),
                _ => f_max_s1(&m.derive()),
            }
        }
    }
}

fn require_s1<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<()> {
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

fn require_interior<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<()> {
    require_s1(m)?;
    if m.classify().tag != DomainTag::InteriorS {
        return Err(Error::Singular);
    }
    Ok(())
}

/// Gradient from derived quantities; valid on S₁.
pub fn gradient_from<T: Scalar>(d: &CorrDerived<T>) -> Result<Gradient6<T>> {
    let ac = arccos_terms(d)?;
    let c = T::int(4) * pi_3_2::<T>();
    Ok(Gradient6 { components: std::array::from_fn(|p| -ac[p] / (c * d.lambda_prime[p].sqrt())) })
}

/// ∂F/∂Λ_kl on S₁ (including singular matrices without unit pairs).
pub fn gradient<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<Gradient6<T>> {
    require_s1(m)?;
    gradient_from(&m.derive())
}

/// Hessian from derived quantities; needs Ã > 0.
pub fn hessian_from<T: Scalar>(d: &CorrDerived<T>) -> Result<Hessian6<T>> {
    if !(d.a_tilde > T::zero()) {
        return Err(Error::Singular);
    }
    let ac = arccos_terms(d)?;
    let lp = &d.lambda_prime;
    let lt = &d.lambda_tilde;
    let pp = pi_3_2::<T>();
    let at = d.a_tilde;
    let g = |i: usize, j: usize| lp[pair_index(i, j)];
    let tl = |i: usize, j: usize| lt[pair_index(i, j)];
    let mut h = [[T::zero(); 6]; 6];
    for p in 0..6 {
        let [k, l, m, n] = QUADS[p];
        let own = -ac[p] / (T::int(8) * pp * lp[p] * lp[p].sqrt());
        let tm = tl(k, m) * (g(k, l) + g(l, m) - g(k, m)) / triangle_form(lp, k, l, m);
        let tn = tl(k, n) * (g(k, l) + g(l, n) - g(k, n)) / triangle_form(lp, k, l, n);
        h[p][p] = own + (tm + tn) / (T::int(4) * pp * lp[p] * at);
        for q in (p + 1)..6 {
            let (a, b) = PAIRS[p];
            let (c, e) = PAIRS[q];
            let shared = [a, b].into_iter().find(|v| *v == c || *v == e);
            let v = match shared {
                None => -T::one() / (T::int(2) * pp * at),
                Some(s) => {
                    let x = if a == s { b } else { a };
                    let y = if c == s { e } else { c };
                    -tl(x, y) / (T::int(2) * pp * at * triangle_form(lp, s, x, y))
                }
            };
            h[p][q] = v;
            h[q][p] = v;
        }
    }
    Ok(Hessian6 { entries: h })
}

/// ∂²F/∂Λ_p∂Λ_q on the interior S.
pub fn hessian<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<Hessian6<T>> {
    require_interior(m)?;
    hessian_from(&m.derive())
}

/// ∫∫_{y,z ≥ 0} exp(−(a1 y² + b1 z² + 2 c1 y z)/(2A²)) dy dz.
pub fn quadrant_integral<T: Scalar>(p: &QuadrantIntegralParams<T>) -> Result<T> {
    let det = p.a1 * p.b1 - p.c1 * p.c1;
    if !(p.a1 > T::zero() && p.b1 > T::zero() && det > T::zero()) {
        return Err(Error::Domain(format!("[[a1, c1], [c1, b1]] is not positive definite (det = {:?})", det)));
    }
    if !(p.a > T::zero()) {
        return Err(Error::Domain("A must be positive".into()));
    }
    let cosv = (p.c1 / (p.a1 * p.b1).sqrt()).max(-T::one()).min(T::one());
    Ok(p.a * p.a / det.sqrt() * cosv.acos())
}

/// N(0, Λ) density at `x`.
pub fn density<T: Scalar>(m: &CorrelationMatrix4<T>, x: &[T; 4]) -> Result<T> {
    require_interior(m)?;
    let full = m.full();
    let inv = inverse(&full).ok_or(Error::Singular)?;
    let mut q = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            q = q + x[i] * inv[i][j] * x[j];
        }
    }
    let two_pi = T::int(2) * T::PI();
    Ok((-q / T::int(2)).exp() / (two_pi * two_pi * m.det().sqrt()))
}

/// Σ_{k,l} (Λ⁻¹)_kl via a direct inverse, independent of Ã².
pub fn inverse_sum<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<T> {
    let inv = inverse(&m.full()).ok_or(Error::Singular)?;
    Ok(inv.iter().flatten().fold(T::zero(), |s, &x| s + x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Corr4;

    #[test]
    fn regular_simplex_value() {
        let v = f_max(&Corr4::equicorrelated(-1.0 / 3.0)).unwrap();
        let want = 3.0 * (4.0f64 / 3.0).sqrt() * (-1.0f64 / 3.0).acos() / std::f64::consts::PI.powf(1.5);
        assert!((v - want).abs() < 1e-14);
        assert_eq!(format!("{v:.5}"), "1.18862");
    }

    #[test]
    fn identity_value() {
        let v = f_max(&Corr4::identity()).unwrap();
        let want = 3.0 * (-1.0f64 / 3.0).acos() / std::f64::consts::PI.powf(1.5);
        assert!((v - want).abs() < 1e-14);
        assert!((v - 1.029375373003964).abs() < 1e-14);
    }

    #[test]
    fn degenerate_values() {
        assert_eq!(f_max(&Corr4::equicorrelated(1.0)).unwrap(), 0.0);
        let v = f_max(&Corr4::unchecked([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((v - 3.0 / (2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-15);
        // X1 = X2 and X3 = X4: two distinct variables with correlation 0.2.
        let v = f_max(&Corr4::unchecked([1.0, 0.2, 0.2, 0.2, 0.2, 1.0])).unwrap();
        assert!((v - (0.8f64 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!(f_max(&Corr4::unchecked([2.0, 0.0, 0.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn three_variable_values() {
        let v = f_max3(-0.5, -0.5, -0.5).unwrap();
        assert_eq!(format!("{v:.6}"), "1.036482");
        assert_eq!(f_max3(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(f_max3(-0.9, -0.9, -0.9).is_err());
    }

    #[test]
    fn equal_correlation_formula() {
        for r in [-1.0 / 3.0, -0.2, 0.0, 0.4, 0.9] {
            let a = f_max(&Corr4::equicorrelated(r)).unwrap();
            assert!((a - equicorrelated_value(r)).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn disjoint_hessian_entry() {
        let m = Corr4::identity();
        let h = hessian(&m).unwrap();
        let want = -1.0 / (2.0 * std::f64::consts::PI.powf(1.5) * 8f64.sqrt());
        for p in 0..3 {
            assert!((h.entries[p][5 - p] - want).abs() < 1e-15);
        }
        assert!(hessian(&Corr4::equicorrelated(-1.0 / 3.0)).is_err());
    }

    #[test]
    fn gradient_errors_off_s1() {
        assert!(matches!(gradient(&Corr4::unchecked([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])), Err(Error::NotInS1(_))));
        assert!(gradient(&Corr4::equicorrelated(-1.0 / 3.0)).is_ok());
    }

    #[test]
    fn quadrant_examples() {
        let p = QuadrantIntegralParams { a1: 1.0, b1: 1.0, c1: 0.0, a: 1.0 };
        assert!((quadrant_integral(&p).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let p = QuadrantIntegralParams { a1: 1.0, b1: 1.0, c1: 0.5f64.sqrt(), a: 1.0 };
        let want = std::f64::consts::PI * 2f64.sqrt() / 4.0;
        assert!((quadrant_integral(&p).unwrap() - want).abs() < 1e-14);
        assert!(quadrant_integral(&QuadrantIntegralParams { a1: 1.0, b1: 1.0, c1: 1.0, a: 1.0 }).is_err());
    }

    #[test]
    fn density_examples() {
        let m = Corr4::identity();
        let tp2 = (2.0 * std::f64::consts::PI).powi(2);
        assert!((density(&m, &[0.0; 4]).unwrap() - 1.0 / tp2).abs() < 1e-16);
        assert!((density(&m, &[1.0, 0.0, 0.0, 0.0]).unwrap() - (-0.5f64).exp() / tp2).abs() < 1e-16);
    }

    #[test]
    fn generic_over_f32_and_double_double() {
        let v32 = f_max(&CorrelationMatrix4::<f32>::equicorrelated(-1.0 / 3.0)).unwrap();
        assert!((v32 as f64 - 1.1886202974020201).abs() < 1e-5);
        let third = twofloat::TwoFloat::from(1.0) / twofloat::TwoFloat::from(3.0);
        let vdd = f_max(&CorrelationMatrix4::equicorrelated(-third)).unwrap();
        // twofloat's inverse trigonometry is only f64-accurate.
        assert!((f64::from(vdd) - 1.1886202974020201).abs() < 1e-14);
    }
}
