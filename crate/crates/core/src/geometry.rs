//! Tetrahedra inscribed in the unit sphere of R³ and the quantities attached
//! to them: outer dihedral angles, perpendicular feet, the functions f, Γ, H,
//! the stationarity relation and the mean width.
//!
//! Facets are F1 = {1,2,3}, F2 = {1,3,4}, F3 = {1,2,4}, F4 = {2,3,4}, and
//! α_ij is the outer dihedral angle of F_i and F_j, stored in the same
//! (12, 13, 14, 23, 24, 34) order as correlation pairs.

use serde::{Deserialize, Serialize};

use crate::closedform::arccos_args;
use crate::corrdomain::{pair_index, CorrelationMatrix4, DomainTag, PAIRS, PAIR_LABELS};
use crate::linalg::{det3, inverse, sym_eigen, Mat};
use crate::quadrature::gauss_legendre;
use crate::scalar::{lit, Scalar};
use crate::{Error, Result};

pub type Vec3<T> = [T; 3];

/// Vertex indices of F1..F4.
pub const FACETS: [[usize; 3]; 4] = [[0, 1, 2], [0, 2, 3], [0, 1, 3], [1, 2, 3]];

/// Volume below which a tetrahedron is treated as flat.
pub const FLAT_VOLUME: f64 = 1e-12;
/// Barycentric margin for the origin-inside test.
pub const INSIDE_TOL: f64 = 1e-10;

fn sub<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm<T: Scalar>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

fn scale<T: Scalar>(a: &Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn triple<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>, c: &Vec3<T>) -> T {
    det3(&[*a, *b, *c])
}

/// The facet pair (as a pair index) whose shared edge is the vertex pair `p`.
pub fn facet_pair_of_edge(p: usize) -> usize {
    let (k, l) = PAIRS[p];
    let mut hit = (0..4).filter(|&f| FACETS[f].contains(&k) && FACETS[f].contains(&l));
    let (a, b) = (hit.next().unwrap(), hit.next().unwrap());
    pair_index(a, b)
}

/// The vertex not on facet `f`.
fn opposite(f: usize) -> usize {
    (0..4).find(|v| !FACETS[f].contains(v)).unwrap()
}

/// Four unit vectors in R³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tetrahedron<T> {
    pub vertices: [Vec3<T>; 4],
}

impl<T: Scalar> Tetrahedron<T> {
    /// Accepts vertices within 1e−9 of the unit sphere and renormalizes them.
    pub fn new(vertices: [Vec3<T>; 4]) -> Result<Self> {
        let tol: T = lit(1e-9);
        let mut v = vertices;
        for (i, x) in v.iter_mut().enumerate() {
            let n = norm(x);
            if !n.is_finite() || (n - T::one()).abs() > tol {
                return Err(Error::Domain(format!("vertex {} has norm {:?}, expected 1", i + 1, n)));
            }
            *x = scale(x, n.recip());
        }
        Ok(Self { vertices: v })
    }

    /// Vertices at correlation −1/3, with v1 = (0, 0, 1) and v2 in the xz-plane.
    pub fn regular() -> Self {
        let third: T = lit(1.0 / 3.0);
        let s2 = T::SQRT_2();
        let r = s2 * lit(2.0 / 3.0);
        let h = (lit::<T>(2.0) / lit(3.0)).sqrt();
        Self {
            vertices: [
                [T::zero(), T::zero(), T::one()],
                [r, T::zero(), -third],
                [-r / T::int(2), h, -third],
                [-r / T::int(2), -h, -third],
            ],
        }
    }

    /// The five-angle parametrization: v1 on the z-axis, v2 in the xz-plane
    /// at polar angle θ1, v3 and v4 at polar angles θ2, θ3 and azimuths θ4, θ5.
    pub fn from_angles(theta: [T; 5]) -> Self {
        let [t1, t2, t3, t4, t5] = theta;
        Self {
            vertices: [
                [T::zero(), T::zero(), T::one()],
                [t1.sin(), T::zero(), t1.cos()],
                [t2.sin() * t4.cos(), t2.sin() * t4.sin(), t2.cos()],
                [t3.sin() * t5.cos(), t3.sin() * t5.sin(), t3.cos()],
            ],
        }
    }

    pub fn edge_length(&self, p: usize) -> T {
        let (i, j) = PAIRS[p];
        norm(&sub(&self.vertices[i], &self.vertices[j]))
    }

    /// det(v2 − v1, v3 − v1, v4 − v1) / 6.
    pub fn signed_volume(&self) -> T {
        let v = &self.vertices;
        triple(&sub(&v[1], &v[0]), &sub(&v[2], &v[0]), &sub(&v[3], &v[0])) / T::int(6)
    }

    pub fn volume(&self) -> T {
        self.signed_volume().abs()
    }

    pub fn is_flat(&self) -> bool {
        self.volume() < lit(FLAT_VOLUME)
    }

    /// Unnormalized normal of facet `f` pointing away from the opposite vertex.
    fn outward_normal(&self, f: usize) -> Vec3<T> {
        let [a, b, c] = FACETS[f].map(|i| self.vertices[i]);
        let n = cross(&sub(&b, &a), &sub(&c, &a));
        let d = self.vertices[opposite(f)];
        if dot(&n, &sub(&d, &a)) > T::zero() {
            scale(&n, -T::one())
        } else {
            n
        }
    }

    pub fn facet_area(&self, f: usize) -> T {
        norm(&self.outward_normal(f)) / T::int(2)
    }

    /// Barycentric coordinates of the origin.
    pub fn origin_barycentric(&self) -> Result<[T; 4]> {
        let total = self.signed_volume();
        if total.abs() < lit(FLAT_VOLUME) {
            return Err(Error::Degenerate("the four vertices are coplanar".into()));
        }
        let zero = [T::zero(); 3];
        Ok(std::array::from_fn(|i| {
            let mut w = self.vertices;
            w[i] = zero;
            Tetrahedron { vertices: w }.signed_volume() / total
        }))
    }

    pub fn origin_inside(&self) -> bool {
        self.origin_barycentric().map(|b| b.iter().all(|&x| x > lit(INSIDE_TOL))).unwrap_or(false)
    }
}

/// Outer dihedral angles α_ij of facet pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DihedralSet<T> {
    pub alpha: [T; 6],
    pub cos: [T; 6],
}

impl<T: Scalar> DihedralSet<T> {
    fn from_cos(cos: [T; 6]) -> Self {
        Self { alpha: cos.map(|c| c.max(-T::one()).min(T::one()).acos()), cos }
    }

    /// Angle at the edge joining vertex pair `p`.
    pub fn at_edge(&self, p: usize) -> T {
        self.alpha[facet_pair_of_edge(p)]
    }

    pub fn nonobtuse(&self, tol: T) -> bool {
        self.cos.iter().all(|&c| -c >= tol)
    }
}

/// Rows r_i with Gram(r) = Λ, rotated so that r1 = (0, 0, 1) and r2 lies in
/// the xz-plane with x ≥ 0.
pub fn embed<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<Tetrahedron<T>> {
    let c = m.classify();
    if c.tag == DomainTag::Invalid {
        return Err(Error::InvalidMatrix(c.reason.unwrap_or_default()));
    }
    if m.rank() == 4 {
        return Err(Error::Rank4);
    }
    let e = sym_eigen(&m.full());
    let mut r: [Vec3<T>; 4] = std::array::from_fn(|i| {
        let row: Vec3<T> = std::array::from_fn(|k| e.vectors[i][k + 1] * e.values[k + 1].max(T::zero()).sqrt());
        scale(&row, norm(&row).recip())
    });
    let e3 = r[0];
    let tiny: T = lit(1e-12);
    let mut e1 = None;
    for v in &r[1..] {
        let w = sub(v, &scale(&e3, dot(v, &e3)));
        let n = norm(&w);
        if n > tiny {
            e1 = Some(scale(&w, n.recip()));
            break;
        }
    }
    let e1 = e1.unwrap_or_else(|| {
        let axis = if e3[0].abs() < lit(0.9) { [T::one(), T::zero(), T::zero()] } else { [T::zero(), T::one(), T::zero()] };
        let w = cross(&e3, &axis);
        scale(&w, norm(&w).recip())
    });
    let e2 = cross(&e3, &e1);
    for v in r.iter_mut() {
        *v = [dot(v, &e1), dot(v, &e2), dot(v, &e3)];
    }
    r[0] = [T::zero(), T::zero(), T::one()];
    r[1][1] = T::zero();
    if let Some(y) = r[2..].iter().map(|v| v[1]).find(|y| y.abs() > tiny) {
        if y < T::zero() {
            for v in r.iter_mut() {
                v[1] = -v[1];
            }
        }
    }
    Ok(Tetrahedron { vertices: r })
}

/// Gram matrix of the vertices.
pub fn corr_of<T: Scalar>(t: &Tetrahedron<T>) -> CorrelationMatrix4<T> {
    CorrelationMatrix4::unchecked(std::array::from_fn(|p| {
        let (i, j) = PAIRS[p];
        dot(&t.vertices[i], &t.vertices[j]).max(-T::one()).min(T::one())
    }))
}

/// Dihedral angles from Λ alone: cos α at the edge (k,l) is Λ̃_kl / √R_kl.
pub fn dihedrals<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<DihedralSet<T>> {
    let c = m.classify();
    match c.tag {
        DomainTag::Invalid => return Err(Error::InvalidMatrix(c.reason.unwrap_or_default())),
        DomainTag::DegenerateUnitPair => {
            let (i, j) = c.witness.unwrap();
            return Err(Error::NotInS1(format!("{i}{j}")));
        }
        _ => {}
    }
    let args = arccos_args(&m.derive())?;
    let mut cos = [T::zero(); 6];
    for p in 0..6 {
        cos[facet_pair_of_edge(p)] = args[p];
    }
    Ok(DihedralSet::from_cos(cos))
}

/// Dihedral angles from outward facet normals of `t`.
pub fn face_normal_dihedrals<T: Scalar>(t: &Tetrahedron<T>) -> Result<DihedralSet<T>> {
    if t.is_flat() {
        return Err(Error::Degenerate("the four vertices are coplanar".into()));
    }
    let n: [Vec3<T>; 4] = std::array::from_fn(|f| {
        let v = t.outward_normal(f);
        scale(&v, norm(&v).recip())
    });
    Ok(DihedralSet::from_cos(std::array::from_fn(|q| {
        let (i, j) = PAIRS[q];
        dot(&n[i], &n[j])
    })))
}

/// Perpendicular feet from the origin to the facet planes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FootData<T> {
    /// L_i, distance from the origin to the plane of F_i.
    pub lengths: [T; 4],
    /// V_i, volume of the tetrahedron {0} ∪ F_i.
    pub volumes: [T; 4],
    /// L_i L_j α_ij / sin α_ij for each facet pair.
    pub products: [T; 6],
    /// Mean of `products`; the common value when the relation holds.
    pub gamma: T,
    /// max |product − γ| / γ.
    pub residual: T,
    /// u_i = L_i / √γ.
    pub u: [T; 4],
}

/// α / sin α, continuous at α = 0.
fn alpha_over_sin<T: Scalar>(a: T) -> T {
    if a.abs() < lit(1e-4) {
        T::one() + a * a / T::int(6)
    } else {
        a / a.sin()
    }
}

pub fn foot_data<T: Scalar>(t: &Tetrahedron<T>) -> Result<FootData<T>> {
    if t.is_flat() {
        return Err(Error::Degenerate("the four vertices are coplanar".into()));
    }
    let mut lengths = [T::zero(); 4];
    let mut volumes = [T::zero(); 4];
    for f in 0..4 {
        let n = t.outward_normal(f);
        let nn = norm(&n);
        let l = dot(&n, &t.vertices[FACETS[f][0]]).abs() / nn;
        if l < lit(1e-12) {
            return Err(Error::Degenerate(format!("the origin lies on the plane of facet F{}", f + 1)));
        }
        lengths[f] = l;
        volumes[f] = nn / T::int(2) * l / T::int(3);
    }
    let dh = dihedrals(&corr_of(t))?;
    let products: [T; 6] = std::array::from_fn(|q| {
        let (i, j) = PAIRS[q];
        lengths[i] * lengths[j] * alpha_over_sin(dh.alpha[q])
    });
    let gamma = products.iter().fold(T::zero(), |s, &x| s + x) / T::int(6);
    let residual = products.iter().fold(T::zero(), |s, &x| s.max((x - gamma).abs() / gamma));
    let u = lengths.map(|l| l / gamma.sqrt());
    Ok(FootData { lengths, volumes, products, gamma, residual, u })
}

/// Relative spread of the six products L_i L_j α_ij / sin α_ij.
pub fn stationarity_residual<T: Scalar>(m: &CorrelationMatrix4<T>) -> Result<T> {
    let t = embed(m)?;
    if t.is_flat() {
        return Err(Error::Degenerate("the four vertices are coplanar".into()));
    }
    if !t.origin_inside() {
        return Err(Error::Degenerate("the origin is not strictly inside the tetrahedron".into()));
    }
    Ok(foot_data(&t)?.residual)
}

/// The three expressions |X1X2|·Area(F2)/sin α13, |X1X3|·Area(F3)/sin α12
/// and |X1X4|·Area(F1)/sin α23, which coincide for every tetrahedron.
pub fn law_of_sines_ratios<T: Scalar>(t: &Tetrahedron<T>) -> Result<[T; 3]> {
    let dh = face_normal_dihedrals(t)?;
    let term = |edge: (usize, usize), facet: usize, fp: (usize, usize)| {
        t.edge_length(pair_index(edge.0, edge.1)) * t.facet_area(facet) / dh.alpha[pair_index(fp.0, fp.1)].sin()
    };
    Ok([term((0, 1), 1, (0, 2)), term((0, 2), 2, (0, 1)), term((0, 3), 0, (1, 2))])
}

fn sinc<T: Scalar>(t: T) -> T {
    if t.abs() < lit(1e-4) {
        let t2 = t * t;
        T::one() - t2 / T::int(6) + t2 * t2 / T::int(120)
    } else {
        t.sin() / t
    }
}

/// f(x) = √(1 − x²) / arccos x on [−1, 1], with f(1) = 1.
///
/// Evaluated as sin t / t with t = 2 asin(√((1 − x)/2)), which stays accurate near x = 1.
pub fn f_width<T: Scalar>(x: T) -> Result<T> {
    if !(x >= -T::one() && x <= T::one()) {
        return Err(Error::Domain(format!("f is defined on [-1, 1], got {x:?}")));
    }
    if x == -T::one() {
        return Ok(T::zero());
    }
    let t = T::int(2) * ((T::one() - x) / T::int(2)).sqrt().asin();
    Ok(sinc(t))
}

/// Inverse of [`f_width`] on [0, 1]: Newton on sin t / t = y with a bisection safeguard.
pub fn f_width_inv<T: Scalar>(y: T) -> Result<T> {
    if !(y >= T::zero() && y <= T::one()) {
        return Err(Error::Domain(format!("f⁻¹ is defined on [0, 1], got {y:?}")));
    }
    if y == T::one() {
        return Ok(T::one());
    }
    if y == T::zero() {
        return Ok(-T::one());
    }
    let (mut lo, mut hi) = (T::zero(), T::PI());
    let mut t = if y > lit(0.9) { (lit::<T>(6.0) * (T::one() - y)).sqrt() } else { T::PI() * (T::one() - y) };
    let eps = T::epsilon() * lit(4.0);
    for _ in 0..200 {
        let g = sinc(t) - y;
        if g > T::zero() {
            lo = t;
        } else {
            hi = t;
        }
        let dg = if t < lit(1e-4) { -t / T::int(3) } else { (t * t.cos() - t.sin()) / (t * t) };
        let mut next = t - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) / T::int(2);
        }
        let step = (next - t).abs();
        t = next;
        if step <= eps * (T::one() + t) || hi - lo <= eps {
            break;
        }
    }
    Ok(t.cos())
}

fn gamma_entries<T: Scalar>(x: T, y: T, z: T) -> Result<(T, T, T)> {
    for (name, v) in [("x", x), ("y", y), ("z", z)] {
        if !(v > T::zero()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v:?}")));
        }
    }
    for (name, v) in [("xy", x * y), ("xz", x * z), ("yz", y * z)] {
        if !(v < T::one()) {
            return Err(Error::Domain(format!("{name} must be below 1, got {v:?}")));
        }
    }
    let (s, e, k) = (f_width_inv(x * y)?, f_width_inv(x * z)?, f_width_inv(y * z)?);
    let det = T::one() - s * s - e * e - k * k + T::int(2) * s * e * k;
    if !(det > T::zero()) {
        return Err(Error::Domain(format!("det Γ(x, y, z) = {det:?} is not positive")));
    }
    Ok((s, e, k))
}

/// Γ(x, y, z): unit diagonal, off-diagonals f⁻¹(xy), f⁻¹(xz), f⁻¹(yz).
pub fn gamma_matrix<T: Scalar>(x: T, y: T, z: T) -> Result<Mat<T, 3>> {
    let (s, e, k) = gamma_entries(x, y, z)?;
    let o = T::one();
    Ok([[o, s, e], [s, o, k], [e, k, o]])
}

/// H(x, y, z) = (x, y, z) Γ⁻¹ (x, y, z)ᵀ.
pub fn h_func<T: Scalar>(x: T, y: T, z: T) -> Result<T> {
    let g = gamma_matrix(x, y, z)?;
    let inv = inverse(&g).ok_or(Error::Singular)?;
    let v = [x, y, z];
    let mut h = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            h = h + v[i] * inv[i][j] * v[j];
        }
    }
    Ok(h)
}

/// H written out through the adjugate of Γ.
pub fn h_func_expanded<T: Scalar>(x: T, y: T, z: T) -> Result<T> {
    let (s, e, k) = gamma_entries(x, y, z)?;
    let o = T::one();
    let two = T::int(2);
    let num = x * x * (o - k * k) + y * y * (o - e * e) + z * z * (o - s * s)
        + two * x * y * (e * k - s)
        + two * x * z * (s * k - e)
        + two * y * z * (s * e - k);
    let den = o - s * s - e * e - k * k + two * s * e * k;
    Ok(num / den)
}

/// E‖G‖ for a standard Gaussian G in R³, 2√(2/π).
pub fn c3<T: Scalar>() -> T {
    T::int(2) * (T::int(2) / T::PI()).sqrt()
}

/// (1/2π)∫ max_i (a_i + b_i cos ψ + c_i sin ψ) dψ, integrated exactly between
/// the crossing points of the four sinusoids.
fn azimuthal_mean<T: Scalar>(a: &[T; 4], b: &[T; 4], c: &[T; 4]) -> T {
    let two_pi = T::PI() * T::int(2);
    let mut cuts = vec![T::zero(), two_pi];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (da, db, dc) = (a[i] - a[j], b[i] - b[j], c[i] - c[j]);
            let r = db.hypot(dc);
            if r > da.abs() {
                let phi = dc.atan2(db);
                let d = (-da / r).acos();
                for s in [phi + d, phi - d] {
                    let w = s - two_pi * (s / two_pi).floor();
                    if w > T::zero() && w < two_pi {
                        cuts.push(w);
                    }
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= p {
            continue;
        }
        let m = (p + q) / T::int(2);
        let (cm, sm) = (m.cos(), m.sin());
        let k = (0..4)
            .max_by(|&i, &j| {
                let fi = a[i] + b[i] * cm + c[i] * sm;
                let fj = a[j] + b[j] * cm + c[j] * sm;
                fi.partial_cmp(&fj).unwrap()
            })
            .unwrap();
        total = total + a[k] * (q - p) + b[k] * (q.sin() - p.sin()) - c[k] * (q.cos() - p.cos());
    }
    total / two_pi
}

/// Mean width 2∫_{S²} max_i ⟨u, v_i⟩ dm(u), with Gauss–Legendre nodes of
/// order `quad_order` in cos(polar angle) and exact azimuthal integration.
pub fn mean_width<T: Scalar>(t: &Tetrahedron<T>, quad_order: usize) -> T {
    let (nodes, weights) = gauss_legendre::<T>(quad_order.max(1));
    let v = &t.vertices;
    let mut total = T::zero();
    for (&z, &w) in nodes.iter().zip(&weights) {
        let r = (T::one() - z * z).max(T::zero()).sqrt();
        let a = std::array::from_fn(|i| z * v[i][2]);
        let b = std::array::from_fn(|i| r * v[i][0]);
        let c = std::array::from_fn(|i| r * v[i][1]);
        total = total + w * azimuthal_mean(&a, &b, &c);
    }
    total
}

/// Mean width of a nondegenerate tetrahedron from its edges:
/// (1/4π) Σ_edges length · outer dihedral angle.
pub fn mean_width_edges<T: Scalar>(t: &Tetrahedron<T>) -> Result<T> {
    let dh = face_normal_dihedrals(t)?;
    let s = (0..6).fold(T::zero(), |s, p| s + t.edge_length(p) * dh.at_edge(p));
    Ok(s / (T::PI() * T::int(4)))
}

/// Labels "α12".."α34" for facet pairs.
pub fn alpha_label(q: usize) -> String {
    format!("α{}", PAIR_LABELS[q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::f_max;
    use crate::{Corr4, Tetra};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn regular_m() -> Corr4 {
        Corr4::equicorrelated(-1.0 / 3.0)
    }

    #[test]
    fn edge_to_facet_pair_table() {
        // edge 12 → α13, 13 → α12, 14 → α23, 23 → α14, 24 → α34, 34 → α24
        let want = [1, 0, 3, 2, 5, 4];
        for p in 0..6 {
            assert_eq!(facet_pair_of_edge(p), want[p], "edge {}", PAIR_LABELS[p]);
        }
    }

    #[test]
    fn embed_regular_and_rank4() {
        let t = embed(&regular_m()).unwrap();
        assert_eq!(t.vertices[0], [0.0, 0.0, 1.0]);
        assert_eq!(t.vertices[1][1], 0.0);
        assert!(t.vertices[1][0] > 0.0);
        let g = corr_of(&t);
        for p in 0..6 {
            assert!((g.offdiag[p] + 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(embed(&Corr4::identity()), Err(Error::Rank4));
        assert!((Tetra::regular().volume() - t.volume()).abs() < 1e-12);
    }

    #[test]
    fn corr_of_edge_cases() {
        let mut t = Tetra::regular();
        t.vertices[3] = t.vertices[2];
        assert_eq!(corr_of(&t).offdiag[5], 1.0);
        let th = [0.7, 1.9, 4.0, 0.4, 2.2];
        let m = corr_of(&Tetra::from_angles(th));
        let [t1, t2, t3, t4, t5] = th;
        let want = [
            t1.cos(),
            t2.cos(),
            t3.cos(),
            t1.sin() * t2.sin() * t4.cos() + t1.cos() * t2.cos(),
            t1.sin() * t3.sin() * t5.cos() + t1.cos() * t3.cos(),
            t2.sin() * t3.sin() * (t4 - t5).cos() + t2.cos() * t3.cos(),
        ];
        for p in 0..6 {
            assert!((m.offdiag[p] - want[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn dihedral_routes_agree() {
        let d = dihedrals(&regular_m()).unwrap();
        let n = face_normal_dihedrals(&Tetra::regular()).unwrap();
        for q in 0..6 {
            assert!((d.cos[q] + 1.0 / 3.0).abs() < 1e-12);
            assert!((d.alpha[q] - n.alpha[q]).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (_, m) = crate::battery::random_rank3(&mut rng);
            let t = embed(&m).unwrap();
            let a = dihedrals(&m).unwrap();
            let b = face_normal_dihedrals(&t).unwrap();
            for q in 0..6 {
                assert!((a.alpha[q] - b.alpha[q]).abs() < 1e-9, "{}: {} vs {}", alpha_label(q), a.alpha[q], b.alpha[q]);
            }
        }
    }

    #[test]
    fn coplanar_has_two_zero_angles() {
        // four points on the equator: rank 2
        let ang = [0.0f64, 1.0, 2.5, 4.0];
        let v = ang.map(|a| [a.cos(), a.sin(), 0.0]);
        let m = corr_of(&Tetrahedron { vertices: v });
        let d = dihedrals(&m).unwrap();
        assert_eq!(d.alpha.iter().filter(|a| a.abs() < 1e-7).count(), 2, "{:?}", d.alpha);
    }

    #[test]
    fn foot_data_regular() {
        let f = foot_data(&Tetra::regular()).unwrap();
        for i in 0..4 {
            assert!((f.lengths[i] - 1.0 / 3.0).abs() < 1e-14);
            assert!((f.volumes[i] - f.volumes[0]).abs() < 1e-14);
        }
        let alpha = (-1.0f64 / 3.0).acos();
        assert!((f.gamma - alpha / (6.0 * 2f64.sqrt())).abs() < 1e-14);
        assert!(f.residual < 1e-12);
        let mut flat = Tetra::regular();
        flat.vertices[3] = flat.vertices[2];
        assert!(matches!(foot_data(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn foot_volumes_match_angles_and_sum() {
        let th = [1.1, 2.0, 4.2, 0.9, 2.4];
        let [t1, t2, t3, t4, t5] = th;
        let t = Tetra::from_angles(th);
        let f = foot_data(&t).unwrap();
        assert!((f.volumes[0] - t1.sin() * t2.sin().abs() * t4.sin() / 6.0).abs() < 1e-12);
        assert!((f.volumes[1] - (t2.sin() * t3.sin() * (t4 - t5).sin()).abs() / 6.0).abs() < 1e-12);
        assert!((f.volumes[2] - t1.sin() * t3.sin().abs() * t5.sin() / 6.0).abs() < 1e-12);
        if t.origin_inside() {
            let s: f64 = f.volumes.iter().sum();
            assert!((s - t.volume()).abs() < 1e-12);
        }
    }

    #[test]
    fn f_width_values_and_inverse() {
        assert_eq!(f_width(-1.0).unwrap(), 0.0);
        assert_eq!(f_width(1.0).unwrap(), 1.0);
        assert!((f_width(0.0).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(f_width_inv(2.0 / std::f64::consts::PI).unwrap().abs() < 1e-13);
        assert!(f_width(1.5).is_err() && f_width_inv(-0.1).is_err());
        for k in 0..=1000 {
            let x = -1.0 + 2.0 * k as f64 / 1000.0;
            let y = f_width(x).unwrap();
            assert!((f_width_inv(y).unwrap() - x).abs() < 1e-10, "x = {x}");
        }
        // leading-order behaviour near 1
        let d = 1e-8f64;
        assert!((f_width(1.0 - d).unwrap() - (1.0 - d / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn h_regular_and_expanded() {
        let f = foot_data(&Tetra::regular()).unwrap();
        let u = f.u[0];
        assert!((h_func(u, u, u).unwrap() * f.gamma - 1.0).abs() < 1e-10);
        let triples = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let hs = triples.map(|[i, j, k]| h_func(f.u[i], f.u[j], f.u[k]).unwrap());
        assert!(hs.iter().all(|h| (h - hs[0]).abs() < 1e-10));
        for (x, y, z) in [(0.7f64, 0.75, 0.65), (0.6, 0.8, 0.7), (0.9, 0.6, 0.75)] {
            let a = h_func(x, y, z).unwrap();
            let b = h_func_expanded(x, y, z).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        }
        assert!(h_func(-0.1, 0.5, 0.5).is_err());
        assert!(h_func(2.0, 0.6, 0.5).is_err());
    }

    #[test]
    fn stationarity_discriminates() {
        assert!(stationarity_residual(&regular_m()).unwrap() < 1e-10);
        let mut t = Tetra::regular();
        let (c, s) = (0.1f64.cos(), 0.1f64.sin());
        let v = t.vertices[3];
        t.vertices[3] = [c * v[0] - s * v[2], v[1], s * v[0] + c * v[2]];
        assert!(stationarity_residual(&corr_of(&t)).unwrap() > 1e-3);
        let ang = [0.0f64, 1.0, 2.5, 4.0];
        let flat = Tetrahedron { vertices: ang.map(|a| [a.cos(), a.sin(), 0.0]) };
        assert!(stationarity_residual(&corr_of(&flat)).is_err());
    }

    #[test]
    fn law_of_sines() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (v, _) = crate::battery::random_rank3(&mut rng);
            let t = Tetrahedron { vertices: v };
            let r = law_of_sines_ratios(&t).unwrap();
            assert!((r[0] - r[1]).abs() < 1e-9 * r[0] && (r[0] - r[2]).abs() < 1e-9 * r[0]);
        }
    }

    #[test]
    fn mean_width_regular_matches_closed_form() {
        let t = Tetra::regular();
        let exact = mean_width_edges(&t).unwrap();
        let via_f = 2.0 * f_max(&regular_m()).unwrap() / c3::<f64>();
        assert!((exact - via_f).abs() < 1e-12, "{exact} vs {via_f}");
        let w50 = mean_width(&t, 50);
        let w200 = mean_width(&t, 200);
        assert!((w50 - exact).abs() < 1e-4 * exact, "{w50}");
        assert!((w200 - exact).abs() < 1e-6 * exact, "{w200}");
    }

    #[test]
    fn mean_width_of_a_point_is_zero() {
        let v = [0.6f64, 0.0, 0.8];
        let t = Tetrahedron { vertices: [v; 4] };
        assert!(mean_width(&t, 20).abs() < 1e-14);
    }

    #[test]
    fn c3_from_radial_integral() {
        // E‖G‖ = √(2/π) ∫ r³ e^{−r²/2} dr
        let q = crate::quadrature::Adaptive::default();
        let v = q.integrate_half_line(|r| r.powi(3) * (-r * r / 2.0).exp()).unwrap();
        assert!((v * (2.0 / std::f64::consts::PI).sqrt() - c3::<f64>()).abs() < 1e-12);
    }
}
