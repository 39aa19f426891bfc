//! 4×4 correlation matrices and the derived quantities the closed form uses.
//!
//! Off-diagonals are always stored in the order (12, 13, 14, 23, 24, 34).
//! Vertices are 0-based internally; labels such as `"12"` are 1-based.

use std::fmt;
use std::ops::Div;

use serde::{Deserialize, Serialize};

use crate::linalg::{det3, det4, sym_eigen, Mat};
use crate::scalar::{lit, Ring, Scalar};
use crate::Error;

/// Absolute tolerance on the smallest eigenvalue.
pub const EPS_PSD: f64 = 1e-10;
/// Tolerance for detecting Λ_kl = 1.
pub const EPS_ONE: f64 = 1e-12;

/// Vertex pairs in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// `(k, l, m, n)` per pair: `(m, n)` is the complementary pair with `m < n`.
pub const QUADS: [[usize; 4]; 6] = [
    [0, 1, 2, 3],
    [0, 2, 1, 3],
    [0, 3, 1, 2],
    [1, 2, 0, 3],
    [1, 3, 0, 2],
    [2, 3, 0, 1],
];

/// Storage index of the unordered pair `{i, j}`.
pub const fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not a vertex pair"),
    }
}

/// Storage index of the pair complementary to pair `p`.
pub const fn complement(p: usize) -> usize {
    5 - p
}

/// 1-based label such as `"14"`.
pub fn pair_label(p: usize) -> String {
    let (i, j) = PAIRS[p];
    format!("{}{}", i + 1, j + 1)
}

pub const PAIR_LABELS: [&str; 6] = ["12", "13", "14", "23", "24", "34"];

/// Field operations on top of [`Ring`].
pub trait Field: Ring + Div<Output = Self> {}
impl<T: Ring + Div<Output = T>> Field for T {}

/// Λ' = 1 − Λ, element-wise.
pub fn lambda_prime<R: Ring>(offdiag: &[R; 6]) -> [R; 6] {
    std::array::from_fn(|p| R::int(1) - offdiag[p].clone())
}

/// Λ̃ for all six pairs, from Λ'.
///
/// Λ̃_kl = Λ'kl² − Λ'kl(Λ'km + Λ'kn + Λ'lm + Λ'ln − 2Λ'mn) + (Λ'km − Λ'lm)(Λ'kn − Λ'ln).
pub fn lambda_tilde<R: Ring>(lp: &[R; 6]) -> [R; 6] {
    std::array::from_fn(|p| {
        let [k, l, m, n] = QUADS[p];
        let g = |i: usize, j: usize| lp[pair_index(i, j)].clone();
        let kl = g(k, l);
        let inner = g(k, m) + g(k, n) + g(l, m) + g(l, n) - R::int(2) * g(m, n);
        kl.square() - kl * inner + (g(k, m) - g(l, m)) * (g(k, n) - g(l, n))
    })
}

/// Triangle form 2ab + 2bc + 2ca − a² − b² − c² on the three Λ' edges of
/// the triangle (i, j, k). Equals 16·(area of the embedded triangle)².
pub fn triangle_form<R: Ring>(lp: &[R; 6], i: usize, j: usize, k: usize) -> R {
    let a = lp[pair_index(i, j)].clone();
    let b = lp[pair_index(j, k)].clone();
    let c = lp[pair_index(i, k)].clone();
    let two = R::int(2);
    two.clone() * a.clone() * b.clone() + two.clone() * b.clone() * c.clone() + two * c.clone() * a.clone()
        - a.square()
        - b.square()
        - c.square()
}

/// The three vertices other than `anchor`, ascending.
pub fn others(anchor: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut n = 0;
    for v in 0..4 {
        if v != anchor {
            out[n] = v;
            n += 1;
        }
    }
    out
}

/// Covariance of (X_a − X_anchor) for the three other vertices a, ascending.
pub fn sigma_anchor<R: Ring>(lp: &[R; 6], anchor: usize) -> Mat<R, 3> {
    let o = others(anchor);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (a, b) = (o[i], o[j]);
            if a == b {
                R::int(2) * lp[pair_index(a, anchor)].clone()
            } else {
                lp[pair_index(a, anchor)].clone() + lp[pair_index(b, anchor)].clone() - lp[pair_index(a, b)].clone()
            }
        })
    })
}

/// Ã² = 2·det Σ_anchor, using vertex 2 (index 1) as the anchor.
pub fn a_tilde_sq<R: Ring>(lp: &[R; 6]) -> R {
    R::int(2) * det3(&sigma_anchor(lp, 1))
}

/// Radical Λ'_p·Ã² + Λ̃_p² for every pair.
pub fn radicals<R: Ring>(lp: &[R; 6], lt: &[R; 6], a2: &R) -> [R; 6] {
    std::array::from_fn(|p| lp[p].clone() * a2.clone() + lt[p].square())
}

/// The full symmetric matrix with unit diagonal.
pub fn full_matrix<R: Ring>(offdiag: &[R; 6]) -> Mat<R, 4> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { R::int(1) } else { offdiag[pair_index(i, j)].clone() })
    })
}

/// Symmetric 4×4 matrix with unit diagonal, stored by its six off-diagonals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix4<T> {
    pub offdiag: [T; 6],
}

/// Membership tag of a candidate matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainTag {
    /// Positive definite.
    InteriorS,
    /// Singular, but no off-diagonal equals 1.
    BoundaryS1,
    /// Some off-diagonal equals 1.
    DegenerateUnitPair,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainClass {
    pub tag: DomainTag,
    /// 1-based pair with Λ_kl = 1, for `DegenerateUnitPair`.
    pub witness: Option<(usize, usize)>,
    /// Why the matrix is invalid, for `Invalid`.
    pub reason: Option<String>,
}

impl DomainClass {
    pub fn in_s1(&self) -> bool {
        matches!(self.tag, DomainTag::InteriorS | DomainTag::BoundaryS1)
    }
}

impl<T: Scalar> CorrelationMatrix4<T> {
    /// Validated constructor.
    pub fn new(offdiag: [T; 6]) -> Result<Self, Error> {
        let m = Self { offdiag };
        let c = m.classify();
        match c.tag {
            DomainTag::Invalid => Err(Error::InvalidMatrix(c.reason.unwrap_or_default())),
            _ => Ok(m),
        }
    }

    /// Stores the values without any check.
    pub fn unchecked(offdiag: [T; 6]) -> Self {
        Self { offdiag }
    }

    pub fn identity() -> Self {
        Self::unchecked([T::zero(); 6])
    }

    /// All off-diagonals equal to `r`.
    pub fn equicorrelated(r: T) -> Self {
        Self::unchecked([r; 6])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            T::one()
        } else {
            self.offdiag[pair_index(i, j)]
        }
    }

    pub fn full(&self) -> Mat<T, 4> {
        full_matrix(&self.offdiag)
    }

    pub fn eigenvalues(&self) -> [T; 4] {
        sym_eigen(&self.full()).values
    }

    pub fn det(&self) -> T {
        det4(&self.full())
    }

    /// Number of eigenvalues above `EPS_PSD` times the largest one.
    pub fn rank(&self) -> usize {
        let ev = self.eigenvalues();
        let cut = ev[3] * lit(EPS_PSD);
        ev.iter().filter(|&&x| x > cut).count()
    }

    /// Relabels vertices: entry (i, j) of the result is entry (perm[i], perm[j]).
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        Self::unchecked(std::array::from_fn(|p| {
            let (i, j) = PAIRS[p];
            self.get(perm[i], perm[j])
        }))
    }

    pub fn classify(&self) -> DomainClass {
        let invalid = |reason: String| DomainClass { tag: DomainTag::Invalid, witness: None, reason: Some(reason) };
        let eps_psd: T = lit(EPS_PSD);
        for (p, &x) in self.offdiag.iter().enumerate() {
            if !x.is_finite() {
                return invalid(format!("entry {} is not finite", PAIR_LABELS[p]));
            }
            if x.abs() > T::one() + eps_psd {
                return invalid(format!("entry {} = {:?} lies outside [-1, 1]", PAIR_LABELS[p], x));
            }
        }
        let ev = self.eigenvalues();
        if ev[0] < -eps_psd {
            return invalid(format!("smallest eigenvalue {:?} is negative", ev[0]));
        }
        let eps_one: T = lit(EPS_ONE);
        if let Some(p) = self.offdiag.iter().position(|&x| x >= T::one() - eps_one) {
            let (i, j) = PAIRS[p];
            return DomainClass { tag: DomainTag::DegenerateUnitPair, witness: Some((i + 1, j + 1)), reason: None };
        }
        let tag = if ev[0] > eps_psd { DomainTag::InteriorS } else { DomainTag::BoundaryS1 };
        DomainClass { tag, witness: None, reason: None }
    }

    pub fn derive(&self) -> CorrDerived<T> {
        CorrDerived::new(self)
    }

    pub fn vertex_gramian(&self, anchor: usize) -> VertexGramian<T> {
        vertex_gramian(&lambda_prime(&self.offdiag), anchor)
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> CorrelationMatrix4<U> {
        CorrelationMatrix4 { offdiag: std::array::from_fn(|p| f(self.offdiag[p])) }
    }
}

impl<T: fmt::Display> fmt::Display for CorrelationMatrix4<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, x) in self.offdiag.iter().enumerate() {
            if p > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Parses the single-line text form `l12,l13,l14,l23,l24,l34`.
pub fn parse_text(s: &str) -> Result<[f64; 6], Error> {
    let fields: Vec<&str> = s.trim().split(',').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(Error::Parse {
            field: "offdiag".into(),
            msg: format!("expected 6 comma-separated values, found {}", fields.len()),
        });
    }
    let mut out = [0.0; 6];
    for (p, f) in fields.iter().enumerate() {
        out[p] = f.parse::<f64>().map_err(|e| Error::Parse {
            field: format!("offdiag[{p}] (pair {})", PAIR_LABELS[p]),
            msg: format!("{e}: {f:?}"),
        })?;
        if !out[p].is_finite() {
            return Err(Error::Parse {
                field: format!("offdiag[{p}] (pair {})", PAIR_LABELS[p]),
                msg: "value is not finite".into(),
            });
        }
    }
    Ok(out)
}

/// Parses either the text form or `{"offdiag": [..6 numbers..]}`.
pub fn parse_matrix(s: &str) -> Result<CorrelationMatrix4<f64>, Error> {
    let t = s.trim();
    let offdiag = if t.starts_with('{') {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            offdiag: Vec<f64>,
        }
        let doc: Doc = serde_json::from_str(t).map_err(|e| Error::Parse { field: "offdiag".into(), msg: e.to_string() })?;
        let n = doc.offdiag.len();
        <[f64; 6]>::try_from(doc.offdiag).map_err(|_| Error::Parse {
            field: "offdiag".into(),
            msg: format!("expected 6 values, found {n}"),
        })?
    } else {
        parse_text(t)?
    };
    CorrelationMatrix4::new(offdiag)
}

/// Quantities derived from Λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrDerived<T> {
    pub lambda_prime: [T; 6],
    pub lambda_tilde: [T; 6],
    /// Covariance of (X1 − X2, X3 − X2, X4 − X2).
    pub sigma2: Mat<T, 3>,
    /// Ã², clamped at 0 against roundoff.
    pub a_tilde_sq: T,
    pub a_tilde: T,
    /// Λ'_kl·Ã² + Λ̃_kl² per pair.
    pub radical: [T; 6],
    pub det_lambda: T,
    /// Σ(Λ⁻¹) = Ã²/(2 det Λ); `None` when det Λ ≤ 0.
    pub a_sq: Option<T>,
}

impl<T: Scalar> CorrDerived<T> {
    pub fn new(m: &CorrelationMatrix4<T>) -> Self {
        let lp = lambda_prime(&m.offdiag);
        let lt = lambda_tilde(&lp);
        let sigma2 = sigma_anchor(&lp, 1);
        let a2 = (T::int(2) * det3(&sigma2)).max(T::zero());
        let radical = radicals(&lp, &lt, &a2);
        let det_lambda = m.det();
        let a_sq = if det_lambda > T::zero() { Some(a2 / (T::int(2) * det_lambda)) } else { None };
        Self {
            lambda_prime: lp,
            lambda_tilde: lt,
            sigma2,
            a_tilde_sq: a2,
            a_tilde: a2.sqrt(),
            radical,
            det_lambda,
            a_sq,
        }
    }

    /// 2·det Σ_k for anchor vertex `k`.
    pub fn a_tilde_sq_at(&self, anchor: usize) -> T {
        T::int(2) * det3(&sigma_anchor(&self.lambda_prime, anchor))
    }
}

/// Vertex Gramian Υ_k = Σ_k / 2 and its cofactors.
///
/// Rows follow the other three vertices in ascending order, so anchor 2
/// uses (1, 3, 4). With that order, for positions (i, j) holding vertices
/// (p, q), the off-diagonal cofactor equals Λ̃ of the pair complementary to
/// {p, q} over 4, and each diagonal cofactor plus its two off-diagonal
/// cofactors equals −Λ̃ of the pair complementary to {anchor, p} over 4.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexGramian<T> {
    pub anchor: usize,
    pub vertices: [usize; 3],
    pub a0: T,
    pub b0: T,
    pub c0: T,
    pub r1: T,
    pub r2: T,
    pub r3: T,
    /// Cofactors b0·c0 − r3², a0·c0 − r2², a0·b0 − r1².
    pub a: T,
    pub b: T,
    pub c: T,
    /// Off-diagonal cofactors r2·r3 − c0·r1, r1·r3 − b0·r2, r1·r2 − a0·r3.
    pub rho1: T,
    pub rho2: T,
    pub rho3: T,
}

pub fn vertex_gramian<F: Field>(lp: &[F; 6], anchor: usize) -> VertexGramian<F> {
    let s = sigma_anchor(lp, anchor);
    let half = |x: &F| x.clone() / F::int(2);
    let (a0, b0, c0) = (half(&s[0][0]), half(&s[1][1]), half(&s[2][2]));
    let (r1, r2, r3) = (half(&s[0][1]), half(&s[0][2]), half(&s[1][2]));
    let a = b0.clone() * c0.clone() - r3.square();
    let b = a0.clone() * c0.clone() - r2.square();
    let c = a0.clone() * b0.clone() - r1.square();
    let rho1 = r2.clone() * r3.clone() - c0.clone() * r1.clone();
    let rho2 = r1.clone() * r3.clone() - b0.clone() * r2.clone();
    let rho3 = r1.clone() * r2.clone() - a0.clone() * r3.clone();
    VertexGramian { anchor, vertices: others(anchor), a0, b0, c0, r1, r2, r3, a, b, c, rho1, rho2, rho3 }
}

impl<F: Field> VertexGramian<F> {
    /// Expected values of (ρ1, ρ2, ρ3) and of (a+ρ1+ρ2, b+ρ1+ρ3, c+ρ2+ρ3)
    /// from Λ̃, as described on the type.
    pub fn tilde_predictions(&self, lt: &[F; 6]) -> ([F; 6], [F; 6]) {
        let v = self.vertices;
        let four = F::int(4);
        let q = |i: usize, j: usize| lt[complement(pair_index(v[i], v[j]))].clone() / four.clone();
        let d = |i: usize| -(lt[complement(pair_index(self.anchor, v[i]))].clone() / four.clone());
        let got = [
            self.rho1.clone(),
            self.rho2.clone(),
            self.rho3.clone(),
            self.a.clone() + self.rho1.clone() + self.rho2.clone(),
            self.b.clone() + self.rho1.clone() + self.rho3.clone(),
            self.c.clone() + self.rho2.clone() + self.rho3.clone(),
        ];
        let want = [q(0, 1), q(0, 2), q(1, 2), d(0), d(1), d(2)];
        (got, want)
    }
}
