use gaussmax_core::closedform::{equicorrelated_value, f_max, gradient, hessian, inverse_sum};
use gaussmax_core::corrdomain::{pair_index, vertex_gramian, PAIRS};
use gaussmax_core::geometry::{
    dihedrals, embed, f_width, face_normal_dihedrals, h_func, law_of_sines_ratios, mean_width, c3,
};
use gaussmax_core::montecarlo::{estimate_max, estimate_order_stats};
use gaussmax_core::optimize::{maximize, project_elliptope, OptConfig};
use gaussmax_core::verify::{j_direct, j_from_k, p_func, p_ordering_scan, u_interval_scan};
use gaussmax_core::{Corr4, DomainTag};
use proptest::prelude::*;

fn unit<const D: usize>(v: [f64; D]) -> Option<[f64; D]> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.1).then(|| v.map(|x| x / n))
}

fn gram<const D: usize>(v: &[[f64; D]; 4]) -> Corr4 {
    Corr4::unchecked(std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
    }))
}

/// Interior matrices with smallest eigenvalue ≥ 0.02.
fn interior() -> impl Strategy<Value = Corr4> {
    prop::array::uniform4(prop::array::uniform4(-1.0f64..1.0))
        .prop_filter_map("degenerate", |v| {
            let u: Vec<[f64; 4]> = v.iter().filter_map(|r| unit(*r)).collect();
            let m = gram(&<[[f64; 4]; 4]>::try_from(u).ok()?);
            (m.eigenvalues()[0] >= 0.02).then_some(m)
        })
}

/// Rank-3 matrices whose tetrahedron is not flat and has no repeated vertex.
fn rank3() -> impl Strategy<Value = Corr4> {
    prop::array::uniform4(prop::array::uniform3(-1.0f64..1.0))
        .prop_filter_map("degenerate", |v| {
            let u: Vec<[f64; 3]> = v.iter().filter_map(|r| unit(*r)).collect();
            let m = gram(&<[[f64; 3]; 4]>::try_from(u).ok()?);
            let ok = m.offdiag.iter().all(|&x| x < 0.98) && embed(&m).is_ok_and(|t| t.volume() > 1e-3);
            ok.then_some(m)
        })
}

fn permutation() -> impl Strategy<Value = [usize; 4]> {
    Just([0usize, 1, 2, 3]).prop_shuffle().prop_map(|v| [v[0], v[1], v[2], v[3]])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn four_anchor_agreement(m in interior()) {
        let d = m.derive();
        for k in 0..4 {
            prop_assert!(rel(d.a_tilde_sq_at(k), d.a_tilde_sq) <= 1e-10);
        }
    }

    #[test]
    fn radical_factorization(m in interior()) {
        let d = m.derive();
        let g = vertex_gramian(&d.lambda_prime, 1);
        prop_assert!(rel(16.0 * g.c * g.b, d.radical[0]) <= 1e-10);
    }

    #[test]
    fn inverse_sum_two_routes(m in interior()) {
        let a_sq = m.derive().a_sq.unwrap();
        prop_assert!(rel(inverse_sum(&m).unwrap(), a_sq) <= 1e-9);
    }

    #[test]
    fn relabeling_permutes_derived(m in interior(), perm in permutation()) {
        let d = m.derive();
        let dp = m.permuted(perm).derive();
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let q = pair_index(perm[i], perm[j]);
            prop_assert!((dp.lambda_prime[p] - d.lambda_prime[q]).abs() <= 1e-14);
            prop_assert!((dp.lambda_tilde[p] - d.lambda_tilde[q]).abs() <= 1e-12);
        }
        prop_assert!(rel(dp.a_tilde, d.a_tilde) <= 1e-10);
    }

    #[test]
    fn permutation_equivariance(m in interior(), perm in permutation()) {
        let mp = m.permuted(perm);
        prop_assert!(rel(f_max(&mp).unwrap(), f_max(&m).unwrap()) <= 1e-12);
        let g = gradient(&m).unwrap().components;
        let gp = gradient(&mp).unwrap().components;
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            prop_assert!(rel(gp[p], g[pair_index(perm[i], perm[j])]) <= 1e-10);
        }
    }

    #[test]
    fn decreasing_a_correlation_increases_f(m in interior(), p in 0usize..6) {
        let g = gradient(&m).unwrap().components;
        prop_assert!(g[p] < 0.0);
        let mut off = m.offdiag;
        off[p] -= 1e-3;
        let lower = Corr4::unchecked(off);
        prop_assume!(lower.classify().tag == DomainTag::InteriorS);
        prop_assert!(f_max(&lower).unwrap() > f_max(&m).unwrap());
    }

    #[test]
    fn euler_relations(m in interior()) {
        let d = m.derive();
        let f = f_max(&m).unwrap();
        let g = gradient(&m).unwrap().components;
        let h = hessian(&m).unwrap().entries;
        let s: f64 = (0..6).map(|p| d.lambda_prime[p] * g[p]).sum();
        prop_assert!(rel(-2.0 * s, f) <= 1e-10);
        let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs() / 2.0));
        for p in 0..6 {
            let lhs: f64 = (0..6).map(|q| d.lambda_prime[q] * h[p][q]).sum();
            prop_assert!((lhs - g[p] / 2.0).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn hessian_symmetric(m in interior()) {
        let h = hessian(&m).unwrap().entries;
        for p in 0..6 {
            for q in 0..6 {
                prop_assert_eq!(h[p][q], h[q][p]);
            }
        }
    }

    #[test]
    fn equal_correlation_closed_form(r in -1.0f64 / 3.0..0.999) {
        let m = Corr4::equicorrelated(r);
        prop_assert!((f_max(&m).unwrap() - equicorrelated_value(r)).abs() <= 1e-12);
    }

    #[test]
    fn dihedral_routes_agree(m in rank3()) {
        let a = dihedrals(&m).unwrap();
        let b = face_normal_dihedrals(&embed(&m).unwrap()).unwrap();
        for k in 0..6 {
            prop_assert!((a.alpha[k] - b.alpha[k]).abs() <= 1e-8);
        }
    }

    #[test]
    fn law_of_sines(m in rank3()) {
        let r = law_of_sines_ratios(&embed(&m).unwrap()).unwrap();
        prop_assert!(rel(r[1], r[0]) <= 1e-9);
        prop_assert!(rel(r[2], r[0]) <= 1e-9);
    }

    #[test]
    fn h_symmetric(x in 0.2f64..0.9, y in 0.2f64..0.9, z in 0.2f64..0.9) {
        let h = h_func(x, y, z);
        prop_assume!(h.is_ok());
        let h = h.unwrap();
        for (a, b, c) in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
            prop_assert!(rel(h_func(a, b, c).unwrap(), h) <= 1e-10);
        }
    }

    #[test]
    fn f_width_decreasing(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(f_width(lo).unwrap() < f_width(hi).unwrap());
    }

    #[test]
    fn g_derivative_positive(theta in 0.05f64..3.09, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let b = s * theta;
        let a = theta + t * (2.0 * std::f64::consts::PI - 2.0 * theta);
        prop_assume!((a - theta).abs() > 1e-6 && (theta - b).abs() > 1e-6 && a < 2.0 * std::f64::consts::PI - theta);
        prop_assert!(p_func(a, theta).unwrap() - p_func(b, theta).unwrap() > 0.0);
    }

    #[test]
    fn j_through_k_matches_direct(theta in 0.05f64..3.1, nu in 0.05f64..3.1, mu in 0.05f64..3.1) {
        let (a, b) = (mu + nu, (mu - nu).abs());
        prop_assume!(theta > b + 1e-3 && theta < a.min(2.0 * std::f64::consts::PI - a) - 1e-3);
        let jk = j_from_k(theta, nu, mu).unwrap();
        let jd = j_direct(theta, nu, mu).unwrap();
        prop_assert!(rel(jk, jd) <= 1e-8);
    }

    #[test]
    fn projection_idempotent(off in prop::array::uniform6(-1.0f64..1.0)) {
        let p = project_elliptope(&Corr4::unchecked(off).full()).unwrap();
        prop_assert!(p.eigenvalues()[0] >= -1e-10);
        let q = project_elliptope(&p.full()).unwrap();
        for k in 0..6 {
            prop_assert!((p.offdiag[k] - q.offdiag[k]).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn mean_width_matches_f(m in rank3()) {
        let w = mean_width(&embed(&m).unwrap(), 50);
        prop_assert!(rel(c3::<f64>() * w / 2.0, f_max(&m).unwrap()) <= 1e-4);
    }

    #[test]
    fn optimizer_ascends_and_stays_feasible(m in interior()) {
        let r = maximize(&m, &OptConfig::default()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.trajectory.windows(2).all(|w| w[1].value >= w[0].value));
        prop_assert!(r.argmax.eigenvalues()[0] >= -1e-10);
        prop_assert!(r.argmax.classify().tag != DomainTag::DegenerateUnitPair);
    }

    #[test]
    fn mc_is_seed_deterministic(m in interior(), seed in any::<u64>()) {
        let a = estimate_max(&m, 10_000, seed).unwrap();
        let b = estimate_max(&m, 10_000, seed).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let o = estimate_order_stats(&m, 10_000, seed).unwrap();
        prop_assert_eq!(o.e4, -o.e1);
        prop_assert_eq!(o.e3, -o.e2);
    }

    #[test]
    fn u_interval_is_one_run(x in 0.01f64..1.5, y in 0.01f64..1.5) {
        prop_assume!(x * y < 1.0);
        prop_assert!(u_interval_scan(x, y, 2_000).pass);
    }
}

#[test]
fn scans_are_deterministic() {
    let a = p_ordering_scan(10, 50, 1e-3);
    let b = p_ordering_scan(10, 50, 1e-3);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn continuity_towards_a_unit_pair() {
    use gaussmax_core::closedform::f_max3;
    let x1 = [1.0, 0.0, 0.0, 0.0];
    let x2 = [0.3, 0.9, 0.0, 0.0];
    let x3 = [-0.2, 0.4, 0.7, 0.0];
    let w = [0.0, 0.2, -0.3, 0.8];
    let limit = {
        let m = gram(&[unit(x1).unwrap(), unit(x2).unwrap(), unit(x3).unwrap(), unit(x1).unwrap()]);
        f_max3(m.offdiag[0], m.offdiag[1], m.offdiag[3]).unwrap()
    };
    let at = |eps: f64| {
        // Choose t with 1 − Λ14 = eps.
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let t = 0.5 * (lo + hi);
            let x4: [f64; 4] = std::array::from_fn(|i| x1[i] + t * w[i]);
            let m = gram(&[unit(x1).unwrap(), unit(x2).unwrap(), unit(x3).unwrap(), unit(x4).unwrap()]);
            if 1.0 - m.offdiag[2] < eps { lo = t } else { hi = t }
        }
        let x4: [f64; 4] = std::array::from_fn(|i| x1[i] + lo * w[i]);
        f_max(&gram(&[unit(x1).unwrap(), unit(x2).unwrap(), unit(x3).unwrap(), unit(x4).unwrap()])).unwrap()
    };
    let (e1, e2) = (1e-3, 1e-5);
    let (f1, f2) = (at(e1), at(e2));
    assert!((f2 - limit).abs() < (f1 - limit).abs());
    let extrapolated = (f2 * e1.sqrt() - f1 * e2.sqrt()) / (e1.sqrt() - e2.sqrt());
    assert!((extrapolated - limit).abs() < 1e-5, "{f1} {f2} {extrapolated} {limit}");
}
