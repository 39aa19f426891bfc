//! Seeded random correlation matrices and the fixed special cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corrdomain::{CorrelationMatrix4, PAIRS};
use crate::Corr4;

/// Seed of the standard 20-matrix battery.
pub const BATTERY_SEED: u64 = 20_240_601;
/// Smallest eigenvalue accepted by [`random_interior`].
pub const MIN_EIG: f64 = 0.05;

fn unit_vector<const D: usize>(rng: &mut impl Rng) -> [f64; D] {
    loop {
        let v: [f64; D] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.map(|x| x / n);
        }
    }
}

fn gram<const D: usize>(v: &[[f64; D]; 4]) -> Corr4 {
    CorrelationMatrix4::unchecked(std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
    }))
}

/// Gram matrix of four random unit vectors in R⁴ with smallest eigenvalue ≥ `min_eig`.
pub fn random_interior(rng: &mut impl Rng, min_eig: f64) -> Corr4 {
    loop {
        let v: [[f64; 4]; 4] = std::array::from_fn(|_| unit_vector(rng));
        let m = gram(&v);
        if m.eigenvalues()[0] >= min_eig {
            return m;
        }
    }
}

/// Four random unit vectors in R³ and their Gram matrix (rank ≤ 3).
pub fn random_rank3(rng: &mut impl Rng) -> ([[f64; 3]; 4], Corr4) {
    let v: [[f64; 3]; 4] = std::array::from_fn(|_| unit_vector(rng));
    (v, gram(&v))
}

/// The standard battery: 20 seeded interior matrices.
pub fn standard_battery() -> Vec<Corr4> {
    let mut rng = ChaCha8Rng::seed_from_u64(BATTERY_SEED);
    (0..20).map(|_| random_interior(&mut rng, MIN_EIG)).collect()
}

/// The matrix with off-diagonals (0.93, 0.91, 0.90, 0.75, 0.77, 0.75).
pub fn nonconcavity_matrix() -> Corr4 {
    CorrelationMatrix4::unchecked([0.93, 0.91, 0.90, 0.75, 0.77, 0.75])
}

/// Identity, the regular simplex, all ones, one unit pair, and the non-concavity matrix.
pub fn special_cases() -> Vec<(&'static str, Corr4)> {
    vec![
        ("identity", Corr4::identity()),
        ("regular", Corr4::equicorrelated(-1.0 / 3.0)),
        ("all_ones", Corr4::equicorrelated(1.0)),
        ("unit_pair_14", Corr4::unchecked([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])),
        ("nonconcavity", nonconcavity_matrix()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DomainTag;

    #[test]
    fn battery_is_deterministic_and_interior() {
        let a = standard_battery();
        let b = standard_battery();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for m in &a {
            assert_eq!(m.classify().tag, DomainTag::InteriorS);
        }
    }

    #[test]
    fn special_cases_are_valid() {
        for (name, m) in special_cases() {
            assert_ne!(m.classify().tag, DomainTag::Invalid, "{name}");
        }
    }
}
