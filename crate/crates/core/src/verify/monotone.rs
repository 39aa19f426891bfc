//! Monotonicity of H in its last argument and the one-variable functions K
//! and P used to establish it, plus the interval structure of U_xy.
//!
//! Under the substitution θ = arccos f⁻¹(xy), ν = arccos f⁻¹(xz),
//! μ = arccos f⁻¹(yz), H(x, y, z) = J(θ, ν, μ) = 2(K(a, θ) − K(b, θ))/(a² − b²)
//! with a = μ + ν and b = |μ − ν|.

use rayon::prelude::*;
use twofloat::TwoFloat;

use super::{worst, ScanReport};
use crate::geometry::{f_width, f_width_inv, h_func};
use crate::scalar::{to_f64, Scalar};
use crate::{Error, Result};

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta < T::PI()) {
        return Err(Error::Domain(format!("θ must lie in (0, π), got {theta:?}")));
    }
    Ok(())
}

fn check_u<T: Scalar>(u: T, theta: T) -> Result<()> {
    check_theta(theta)?;
    if !(u >= T::zero() && u < T::PI() * T::int(2) - theta) {
        return Err(Error::Domain(format!("u must lie in [0, 2π − θ), got {u:?}")));
    }
    Ok(())
}

/// K(u, θ) = [(u − θ)² sin θ + 2uθ(sin θ − sin u)] / [θ(cos θ − cos u)].
pub fn k_func<T: Scalar>(u: T, theta: T) -> Result<T> {
    check_u(u, theta)?;
    if u == theta {
        return Err(Error::Domain("K is undefined at u = θ".into()));
    }
    let d = u - theta;
    let num = d * d * theta.sin() + T::int(2) * u * theta * (theta.sin() - u.sin());
    Ok(num / (theta * (theta.cos() - u.cos())))
}

/// P(θ) = (θ² − sin²θ) / (θ sin²θ), the value of P(u, θ) at u = θ.
pub fn p_limit<T: Scalar>(theta: T) -> Result<T> {
    check_theta(theta)?;
    let s2 = theta.sin() * theta.sin();
    Ok((theta * theta - s2) / (theta * s2))
}

/// P(u, θ) = ∂K/∂θ exactly as displayed:
/// [(u²+θ²)θ(1 − cθcu) − (u²−θ²)sθ(cθ − cu) − 2uθ²·su·sθ] / [θ²(cθ − cu)²].
pub fn p_func_literal<T: Scalar>(u: T, theta: T) -> Result<T> {
    check_u(u, theta)?;
    if u == theta {
        return p_limit(theta);
    }
    let (st, ct, su, cu) = (theta.sin(), theta.cos(), u.sin(), u.cos());
    let (u2, t2) = (u * u, theta * theta);
    let num = (u2 + t2) * theta * (T::one() - ct * cu) - (u2 - t2) * st * (ct - cu) - T::int(2) * u * t2 * su * st;
    let d = ct - cu;
    Ok(num / (t2 * d * d))
}

/// P(u, θ) with 1 − cθcu = 2 sin²((u−θ)/2) + sθ su and
/// cθ − cu = 2 sin((u+θ)/2) sin((u−θ)/2), so that no term cancels
/// catastrophically as u → θ. Returns [`p_limit`] at u = θ.
pub fn p_func<T: Scalar>(u: T, theta: T) -> Result<T> {
    check_u(u, theta)?;
    if u == theta {
        return p_limit(theta);
    }
    let two = T::int(2);
    let h = (u - theta) / two;
    let sh = h.sin();
    let d = two * ((u + theta) / two).sin() * sh;
    let st = theta.sin();
    let w = u - theta;
    let num = (u * u + theta * theta) * theta * two * sh * sh - w * (u + theta) * st * d + w * w * theta * u.sin() * st;
    Ok(num / (theta * theta * d * d))
}

/// Left side of the conjectured inequality, equal to θ²(cθ − cu)⁴ ∂P/∂u:
/// d²[2uθ(1 − cθcu) − 2u·sθ·d + su·sθ(u² − 3θ²)]
/// + d[2uθ²sθ(su² + 1 − cθcu) − (u² + θ²)θ·su(sθ² + 1 − cθcu)], d = cθ − cu.
pub fn p_inequality_lhs<T: Scalar>(u: T, theta: T) -> T {
    let (st, ct, su, cu) = (theta.sin(), theta.cos(), u.sin(), u.cos());
    let two = T::int(2);
    let three = T::int(3);
    let d = ct - cu;
    let one_m = T::one() - ct * cu;
    d * d * (two * u * theta * one_m - two * u * st * d + su * st * (u * u - three * theta * theta))
        + d * (two * u * theta * theta * st * (su * su + one_m) - (u * u + theta * theta) * theta * su * (st * st + one_m))
}

/// J(θ, ν, μ) through K.
pub fn j_from_k<T: Scalar>(theta: T, nu: T, mu: T) -> Result<T> {
    let a = mu + nu;
    let b = (mu - nu).abs();
    Ok(T::int(2) / (a * a - b * b) * (k_func(a, theta)? - k_func(b, theta)?))
}

/// J(θ, ν, μ) = H(x, y, z) with x = √(f(cθ)f(cν)/f(cμ)) and cyclic analogues.
pub fn j_direct<T: Scalar>(theta: T, nu: T, mu: T) -> Result<T> {
    let (ft, fn_, fm) = (f_width(theta.cos())?, f_width(nu.cos())?, f_width(mu.cos())?);
    let x = (ft * fn_ / fm).sqrt();
    let y = (ft * fm / fn_).sqrt();
    let z = (fm * fn_ / ft).sqrt();
    h_func(x, y, z)
}

/// det Γ(x, y, z), or `None` outside xy, xz, yz < 1.
fn det_gamma(x: f64, y: f64, z: f64) -> Option<f64> {
    let (s, e, k) = (f_width_inv(x * y).ok()?, f_width_inv(x * z).ok()?, f_width_inv(y * z).ok()?);
    Some(1.0 - s * s - e * e - k * k + 2.0 * s * e * k)
}

/// Maximal runs of z on the midpoint grid of (0, 1/max(x, y)) with det Γ > 0,
/// as (first positive node, last positive node).
fn positive_runs(x: f64, y: f64, n: usize) -> Vec<(f64, f64)> {
    let zmax = 1.0 / x.max(y);
    let mut runs = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for j in 0..n {
        let z = zmax * (j as f64 + 0.5) / n as f64;
        let pos = det_gamma(x, y, z).is_some_and(|d| d > 0.0);
        match (&mut open, pos) {
            (Some(r), true) => r.1 = z,
            (None, true) => open = Some((z, z)),
            (Some(_), false) => runs.push(open.take().unwrap()),
            (None, false) => {}
        }
    }
    runs.extend(open);
    runs
}

fn bisect_sign(x: f64, y: f64, mut neg: f64, mut pos: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (neg + pos);
        if mid == neg || mid == pos {
            break;
        }
        if det_gamma(x, y, mid).is_some_and(|d| d > 0.0) {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    0.5 * (neg + pos)
}

/// U_xy = {z ∈ (0, 1/max(x, y)) : det Γ(x, y, z) > 0} located by a sign scan
/// on `n` nodes and refined by bisection. `None` when no node is positive.
pub fn u_interval(x: f64, y: f64, n: usize) -> Option<(f64, f64)> {
    let runs = positive_runs(x, y, n);
    let (lo, hi) = (*runs.first()?, *runs.last()?);
    let zmax = 1.0 / x.max(y);
    let h = zmax / n as f64;
    let z1 = bisect_sign(x, y, (lo.0 - h).max(0.0), lo.0);
    let z2 = bisect_sign(x, y, (hi.1 + h).min(zmax), hi.1);
    Some((z1, z2))
}

/// Sign scan of det Γ(x, y, ·); passes when the positive set is empty or one run.
pub fn u_interval_scan(x: f64, y: f64, n: usize) -> ScanReport {
    let runs = positive_runs(x, y, n);
    let interval = if runs.len() == 1 { u_interval(x, y, n) } else { None };
    ScanReport::new(
        "u_interval",
        format!("{n} midpoints of (0, 1/max(x, y)) at x = {x}, y = {y}"),
        n as u64,
        1.5 - runs.len() as f64,
        vec![x, y],
        0.0,
    )
    .with("runs", runs.len())
    .with("interval", interval)
}

/// Grid for [`h_monotonicity_scan`].
#[derive(Clone, Copy, Debug)]
pub struct HScanGrid {
    /// Nodes per axis for (w1, w2).
    pub n_w: usize,
    pub w_min: f64,
    pub w_max: f64,
    /// z values per pair inside U.
    pub z_steps: usize,
    /// Sign-scan resolution for locating U.
    pub locate: usize,
}

impl Default for HScanGrid {
    fn default() -> Self {
        Self { n_w: 50, w_min: 0.05, w_max: 1.5, z_steps: 200, locate: 400 }
    }
}

/// Checks H(w1, w2, z_k) > H(w1, w2, z_{k+1}) along z steps inside U_{w1 w2}.
/// The margin is the smallest relative drop (H_k − H_{k+1})/|H_k|. Each end of
/// U is excluded by min(1e−3, 1% of its length).
pub fn h_monotonicity_scan(grid: &HScanGrid) -> ScanReport {
    let w = |i: usize| grid.w_min + (grid.w_max - grid.w_min) * i as f64 / (grid.n_w - 1).max(1) as f64;
    let pairs: Vec<(f64, f64)> =
        (0..grid.n_w).flat_map(|i| (0..grid.n_w).map(move |j| (w(i), w(j)))).filter(|(a, b)| a * b < 1.0).collect();
    let results: Vec<(Option<(f64, Vec<f64>)>, usize)> = pairs
        .par_iter()
        .map(|&(w1, w2)| {
            let Some((z1, z2)) = u_interval(w1, w2, grid.locate) else {
                return (None, 0);
            };
            let band = (1e-3f64).min(0.01 * (z2 - z1));
            let (a, b) = (z1 + band, z2 - band);
            let mut prev: Option<(f64, f64)> = None;
            let mut best = (f64::INFINITY, vec![w1, w2, a]);
            let mut errors = 0;
            for k in 0..grid.z_steps {
                let z = a + (b - a) * k as f64 / (grid.z_steps - 1) as f64;
                let h = match h_func(w1, w2, z) {
                    Ok(h) if h.is_finite() => h,
                    _ => {
                        errors += 1;
                        continue;
                    }
                };
                if let Some((zp, hp)) = prev {
                    let m = (hp - h) / hp.abs();
                    if m < best.0 || m.is_nan() {
                        best = (m, vec![w1, w2, zp, z]);
                    }
                }
                prev = Some((z, h));
            }
            (Some(best), errors)
        })
        .collect();
    let empty = results.iter().filter(|r| r.0.is_none()).count();
    let errors: usize = results.iter().map(|r| r.1).sum();
    let (m, at, n) = worst(results.into_iter().filter_map(|r| r.0));
    let m = if errors > 0 { f64::NEG_INFINITY } else { m };
    ScanReport::new(
        "h_monotonicity",
        format!(
            "{}x{} (w1, w2) in [{}, {}]^2 with w1 w2 < 1, {} z steps inside U",
            grid.n_w, grid.n_w, grid.w_min, grid.w_max, grid.z_steps
        ),
        n * grid.z_steps as u64,
        m,
        at,
        0.0,
    )
    .with("pairs", pairs.len())
    .with("pairs_with_empty_u", empty)
    .with("evaluation_errors", errors)
}

/// Checks P(u, θ) − P(θ) has the sign of u − θ for `n_theta` midpoint values
/// of θ in (0, π) and `n_u` midpoints of u in (0, 2π − θ), skipping |u − θ| < band.
pub fn p_ordering_scan(n_theta: usize, n_u: usize, band: f64) -> ScanReport {
    let rows: Vec<(f64, Vec<f64>)> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_theta as f64;
            let top = 2.0 * std::f64::consts::PI - theta;
            let pl = p_limit(theta).unwrap();
            let mut best = (f64::INFINITY, vec![]);
            for j in 0..n_u {
                let u = top * (j as f64 + 0.5) / n_u as f64;
                if (u - theta).abs() < band {
                    continue;
                }
                let diff = p_func(u, theta).map(|p| (p - pl) * (u - theta).signum()).unwrap_or(f64::NAN);
                let m = diff / pl.abs().max(1.0);
                if m < best.0 || m.is_nan() {
                    best = (m, vec![theta, u]);
                }
            }
            best
        })
        .collect();
    let (m, at, _) = worst(rows);
    ScanReport::new(
        "p_ordering",
        format!("{n_theta} θ midpoints x {n_u} u midpoints, |u − θ| ≥ {band}"),
        (n_theta * n_u) as u64,
        m,
        at,
        0.0,
    )
}

/// Grid for [`p_inequality_scan`].
#[derive(Clone, Copy, Debug)]
pub struct PScanGrid {
    pub n_theta: usize,
    pub n_u: usize,
    pub band: f64,
}

impl Default for PScanGrid {
    fn default() -> Self {
        Self { n_theta: 500, n_u: 500, band: 1e-3 }
    }
}

/// Evaluates [`p_inequality_lhs`] in double-double arithmetic on midpoints
/// θ_i = π(i + ½)/n_θ and u_j = (2π − θ_i)(j + ½)/n_u, skipping |u − θ| < band.
/// The margin is the smallest value found; the plain `f64` minimum is
/// reported alongside.
pub fn p_inequality_scan(grid: &PScanGrid) -> ScanReport {
    let rows: Vec<((f64, Vec<f64>), f64, usize)> = (0..grid.n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / grid.n_theta as f64;
            let top = 2.0 * std::f64::consts::PI - theta;
            let mut best = (f64::INFINITY, vec![]);
            let mut best_f64 = f64::INFINITY;
            let mut count = 0;
            for j in 0..grid.n_u {
                let u = top * (j as f64 + 0.5) / grid.n_u as f64;
                if (u - theta).abs() < grid.band {
                    continue;
                }
                count += 1;
                let v = to_f64(p_inequality_lhs(TwoFloat::from(u), TwoFloat::from(theta)));
                if v < best.0 || v.is_nan() {
                    best = (v, vec![theta, u]);
                }
                best_f64 = best_f64.min(p_inequality_lhs(u, theta));
            }
            (best, best_f64, count)
        })
        .collect();
    let min_f64 = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let points: usize = rows.iter().map(|r| r.2).sum();
    let (m, at, _) = worst(rows.into_iter().map(|r| r.0));
    ScanReport::new(
        "p_inequality",
        format!("{} θ midpoints x {} u midpoints, |u − θ| ≥ {}", grid.n_theta, grid.n_u, grid.band),
        points as u64,
        m,
        at,
        0.0,
    )
    .with("min_f64_route", min_f64)
}

/// A point strictly inside U_xy with H finite, for endpoint tests.
pub fn inside_u(x: f64, y: f64, offset: f64) -> Option<(f64, f64)> {
    let (z1, z2) = u_interval(x, y, 400)?;
    Some((z1 + offset, z2 - offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn p_limit_at_half_pi() {
        let want = (PI * PI - 4.0) / (2.0 * PI);
        assert!((p_limit(PI / 2.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn k_at_zero_is_negative() {
        for theta in [0.3, 1.0, 2.0, 3.0f64] {
            let k = k_func(0.0, theta).unwrap();
            assert!((k - theta * theta.sin() / (theta.cos() - 1.0)).abs() < 1e-14);
            assert!(k < 0.0);
        }
        assert!(k_func(1.0, 1.0).is_err());
        assert!(k_func(6.0, 1.0).is_err());
    }

    #[test]
    fn p_ordering_examples() {
        let pl = p_limit(1.0).unwrap();
        assert!(p_func(2.0, 1.0).unwrap() > pl);
        assert!(p_func(0.3, 1.0).unwrap() < pl);
        assert_eq!(p_func(1.0, 1.0).unwrap(), pl);
    }

    #[test]
    fn stable_and_literal_p_agree() {
        for (u, t) in [(0.0, 1.0), (0.5, 2.0), (2.5, 1.2), (4.0, 1.5), (0.2, 0.3f64)] {
            let a = p_func(u, t).unwrap();
            let b = p_func_literal(u, t).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{u} {t}: {a} {b}");
        }
    }

    #[test]
    fn p_is_the_theta_derivative_of_k() {
        let h = 1e-6;
        for (u, t) in [(0.0, 1.0), (0.5, 2.0), (2.5, 1.2), (4.0, 1.5f64)] {
            let fd = (k_func(u, t + h).unwrap() - k_func(u, t - h).unwrap()) / (2.0 * h);
            let p = p_func(u, t).unwrap();
            assert!((fd - p).abs() < 1e-6 * p.abs().max(1.0), "{u} {t}: {fd} {p}");
        }
    }

    #[test]
    fn p_continuous_at_u_equals_theta() {
        // P(θ ∓ 1e-6, θ) at 50 digits.
        let oracle = [
            (0.1f64, 0.0334001048543724f64, 0.03340010708253199f64),
            (0.5, 0.17534261994732164, 0.1753426793927857),
            (1.0, 0.4122827798783888, 0.4122830749965969),
            (1.5, 0.8408762050935337, 0.8408772070011937),
            (2.0, 1.9188990364776124, 1.9189027117774489),
            (2.5, 6.579935588332511, 6.579958468757682),
            (3.0, 150.30686720279894, 150.3090763048781),
        ];
        for (theta, below, above) in oracle {
            let lo = p_func(theta - 1e-6, theta).unwrap();
            let hi = p_func(theta + 1e-6, theta).unwrap();
            assert!((lo - below).abs() <= 1e-8 * below, "θ = {theta}: {lo} vs {below}");
            assert!((hi - above).abs() <= 1e-8 * above, "θ = {theta}: {hi} vs {above}");
        }
        // The 1e-4 band holds up to θ ≈ 2.83; beyond it the slope ∂P/∂u alone
        // moves P by more than 1e-4 over a 1e-6 step.
        for k in 0..30 {
            let theta = 0.1 + 2.7 * k as f64 / 29.0;
            let pl = p_limit(theta).unwrap();
            for s in [-1e-6, 1e-6] {
                assert!((p_func(theta + s, theta).unwrap() - pl).abs() <= 1e-4, "θ = {theta}");
            }
        }
    }

    #[test]
    fn lhs_matches_u_derivative_of_p() {
        let h = 1e-5;
        for (u, t) in [(0.5f64, 2.0f64), (2.5, 1.2), (4.0, 1.5)] {
            let d = t.cos() - u.cos();
            let fd = (p_func(u + h, t).unwrap() - p_func(u - h, t).unwrap()) / (2.0 * h);
            let want = t * t * d.powi(4) * fd;
            let got = p_inequality_lhs(u, t);
            assert!((got - want).abs() < 1e-6 * got.abs().max(1e-3), "{u} {t}: {got} {want}");
        }
        assert!(p_inequality_lhs(2.0, 1.0) > 0.0);
        assert_eq!(p_inequality_lhs(0.0, 1.0), 0.0);
    }

    #[test]
    fn j_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut n = 0;
        while n < 200 {
            let (theta, nu, mu): (f64, f64, f64) = (rng.gen_range(0.05..3.1), rng.gen_range(0.05..3.1), rng.gen_range(0.05..3.1));
            let (a, b) = (mu + nu, (mu - nu).abs());
            let admissible = theta > b && theta < a.min(2.0 * PI - a) && (theta - b).abs() > 1e-3;
            if !admissible {
                continue;
            }
            n += 1;
            let jk = j_from_k(theta, nu, mu).unwrap();
            let jd = j_direct(theta, nu, mu).unwrap();
            assert!((jk - jd).abs() <= 1e-8 * jd.abs(), "{theta} {nu} {mu}: {jk} vs {jd}");
        }
    }

    #[test]
    fn g_derivative_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let theta: f64 = rng.gen_range(0.05..3.09);
            let a = rng.gen_range(theta..2.0 * PI - theta);
            let b = rng.gen_range(0.0..theta);
            if (a - theta).abs() < 1e-6 || (theta - b).abs() < 1e-6 {
                continue;
            }
            assert!(p_func(a, theta).unwrap() - p_func(b, theta).unwrap() > 0.0, "{a} {b} {theta}");
        }
    }

    #[test]
    fn u_interval_examples() {
        let r = u_interval_scan(0.5, 0.5, 10_000);
        assert!(r.pass);
        assert_eq!(r.details["runs"], 1);
        for (x, y) in [(0.99, 0.99), (1e-3, 0.5)] {
            let r = u_interval_scan(x, y, 10_000);
            assert!(r.pass, "{x} {y}: {r:?}");
        }
    }

    #[test]
    fn h_decreases_for_a_single_pair() {
        let (z1, z2) = inside_u(0.5, 0.5, 1e-6).unwrap();
        let hs: Vec<f64> = (0..50).map(|k| h_func(0.5, 0.5, z1 + (z2 - z1) * k as f64 / 49.0).unwrap()).collect();
        assert!(hs.iter().all(|h| h.is_finite()));
        assert!(hs.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn small_h_scan_passes() {
        let r = h_monotonicity_scan(&HScanGrid { n_w: 8, z_steps: 40, ..HScanGrid::default() });
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn small_p_scans_pass() {
        assert!(p_ordering_scan(20, 100, 1e-3).pass);
        let r = p_inequality_scan(&PScanGrid { n_theta: 40, n_u: 40, band: 1e-3 });
        assert!(r.pass, "{r:?}");
    }
}
