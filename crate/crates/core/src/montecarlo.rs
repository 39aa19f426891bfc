//! Monte-Carlo estimates of E[max] and of the four order-statistic means.
//!
//! Each shard draws from its own ChaCha8 stream derived from (seed, shard),
//! and shard results are combined in shard order, so estimates do not depend
//! on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::corrdomain::{CorrelationMatrix4, DomainTag, PAIRS};
use crate::linalg::{cholesky, sym_eigen, Mat};
use crate::{Error, Result};

/// Default number of RNG streams.
pub const DEFAULT_SHARDS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderStats {
    /// Means of the largest, second, third and smallest coordinate.
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    pub se1: f64,
    pub se2: f64,
    /// Standard error of e2 + 3·e1.
    pub se_e2_plus_3e1: f64,
    pub n_samples: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub shards: usize,
    /// Pair every draw Z with −Z.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { shards: DEFAULT_SHARDS, antithetic: true }
    }
}

/// Compensated running sum with a running sum of squares.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: u64,
    sum: f64,
    comp: f64,
    sq: f64,
    sq_comp: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        neumaier(&mut self.sum, &mut self.comp, x);
        neumaier(&mut self.sq, &mut self.sq_comp, x * x);
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        neumaier(&mut self.sum, &mut self.comp, o.sum);
        neumaier(&mut self.sum, &mut self.comp, o.comp);
        neumaier(&mut self.sq, &mut self.sq_comp, o.sq);
        neumaier(&mut self.sq, &mut self.sq_comp, o.sq_comp);
    }

    fn mean(&self) -> f64 {
        (self.sum + self.comp) / self.n as f64
    }

    /// Standard error of the mean.
    fn se(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let var = ((self.sq + self.sq_comp) / n - m * m).max(0.0) * n / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

/// A 4×4 factor L with L·Lᵀ = Λ.
///
/// Variables tied by Λ_kl = 1 share one row exactly. Otherwise the Cholesky
/// factor is used, falling back to V·diag(√max(λ, 0)) for singular Λ.
pub fn sample_factor(m: &CorrelationMatrix4<f64>) -> Result<Mat<f64, 4>> {
    let c = m.classify();
    if c.tag == DomainTag::Invalid {
        return Err(Error::InvalidMatrix(c.reason.unwrap_or_default()));
    }
    let mut rep = [0usize, 1, 2, 3];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        if m.offdiag[p] >= 1.0 - crate::corrdomain::EPS_ONE && rep[j] == j {
            rep[j] = rep[i];
        }
    }
    let mut full = m.full();
    for v in 0..4 {
        if rep[v] != v {
            for w in 0..4 {
                full[v][w] = full[rep[v]][w];
                full[w][v] = full[w][rep[v]];
            }
            full[v][v] = 1.0;
        }
    }
    let mut l = match cholesky(&full) {
        Some(l) => l,
        None => {
            let e = sym_eigen(&full);
            std::array::from_fn(|i| std::array::from_fn(|k| e.vectors[i][k] * e.values[k].max(0.0).sqrt()))
        }
    };
    for v in 0..4 {
        if rep[v] != v {
            l[v] = l[rep[v]];
        }
    }
    Ok(l)
}

fn split(n_units: u64, shards: usize) -> Vec<u64> {
    let s = shards as u64;
    (0..s).map(|k| n_units / s + u64::from(k < n_units % s)).collect()
}

fn draw(rng: &mut ChaCha8Rng, l: &Mat<f64, 4>) -> [f64; 4] {
    let z: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    std::array::from_fn(|i| l[i][0] * z[0] + l[i][1] * z[1] + l[i][2] * z[2] + l[i][3] * z[3])
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

fn check_n(n: u64) -> Result<()> {
    if n < 10_000 {
        return Err(Error::Domain(format!("sample count {n} is below the minimum of 10000")));
    }
    Ok(())
}

pub fn estimate_max(m: &CorrelationMatrix4<f64>, n: u64, seed: u64) -> Result<MCEstimate> {
    estimate_max_with(m, n, seed, McConfig::default())
}

/// Sample mean of max(X). With antithetic pairs the standard error is taken
/// over pair averages and `n` is rounded down to an even count.
pub fn estimate_max_with(m: &CorrelationMatrix4<f64>, n: u64, seed: u64, cfg: McConfig) -> Result<MCEstimate> {
    check_n(n)?;
    let l = sample_factor(m)?;
    let shards = cfg.shards.max(1);
    let units = if cfg.antithetic { n / 2 } else { n };
    let parts: Vec<Moments> = split(units, shards)
        .into_par_iter()
        .enumerate()
        .map(|(s, count)| {
            let mut rng = shard_rng(seed, s);
            let mut acc = Moments::default();
            for _ in 0..count {
                let x = draw(&mut rng, &l);
                let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if cfg.antithetic {
                    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
                    acc.push(0.5 * (hi - lo));
                } else {
                    acc.push(hi);
                }
            }
            acc
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(MCEstimate {
        mean: total.mean(),
        std_error: total.se(),
        n_samples: if cfg.antithetic { 2 * units } else { units },
        seed,
    })
}

/// Means of the four order statistics using antithetic pairs, which makes
/// e4 = −e1 and e3 = −e2 hold exactly in-sample.
pub fn estimate_order_stats(m: &CorrelationMatrix4<f64>, n: u64, seed: u64) -> Result<OrderStats> {
    check_n(n)?;
    let l = sample_factor(m)?;
    let units = n / 2;
    let parts: Vec<[Moments; 3]> = split(units, DEFAULT_SHARDS)
        .into_par_iter()
        .enumerate()
        .map(|(s, count)| {
            let mut rng = shard_rng(seed, s);
            let mut acc = [Moments::default(); 3];
            for _ in 0..count {
                let mut x = draw(&mut rng, &l);
                x.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let a1 = 0.5 * (x[3] - x[0]);
                let a2 = 0.5 * (x[2] - x[1]);
                acc[0].push(a1);
                acc[1].push(a2);
                acc[2].push(a2 + 3.0 * a1);
            }
            acc
        })
        .collect();
    let mut t = [Moments::default(); 3];
    for p in &parts {
        for k in 0..3 {
            t[k].merge(&p[k]);
        }
    }
    let (e1, e2) = (t[0].mean(), t[1].mean());
    Ok(OrderStats {
        e1,
        e2,
        e3: -e2,
        e4: -e1,
        se1: t[0].se(),
        se2: t[1].se(),
        se_e2_plus_3e1: t[2].se(),
        n_samples: 2 * units,
        seed,
    })
}
