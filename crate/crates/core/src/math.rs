//! Small numerical building blocks: 3-vectors, complete elliptic integrals,
//! and Gauss-Legendre quadrature nodes.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Cartesian 3-vector of `f64` components.
///
/// Units are contextual: positions in m, vector potential in T·m, and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ZERO3: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    /// Unit vector along `self`, or `None` for a (near-)zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Deterministic right-handed in-plane basis `(e1, e2)` with `e1 × e2 = n̂`.
///
/// The seed axis is the global coordinate axis least aligned with `n̂`, so the
/// result is stable under small perturbations of `n̂` away from axis
/// diagonals. `n` must be nonzero.
pub fn plane_basis(n: Vec3) -> (Vec3, Vec3) {
    let nhat = n.normalized().expect("plane_basis: zero normal");
    let ax = nhat.x.abs();
    let ay = nhat.y.abs();
    let az = nhat.z.abs();
    let seed = if ax <= ay && ax <= az {
        Vec3::new(1.0, 0.0, 0.0)
    } else if ay <= az {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let e1 = seed.cross(nhat).normalized().expect("degenerate seed");
    let e2 = nhat.cross(e1);
    (e1, e2)
}

/// Complete elliptic integrals K(m) and E(m) by the arithmetic-geometric-mean
/// iteration, parameter convention m = k² ∈ [0, 1).
///
/// The AGM converges quadratically; iteration stops when the c-term drops
/// below 1e-14, well past f64 precision for m bounded away from 1.
pub fn ellip_ke(m: f64) -> (f64, f64) {
    assert!((0.0..1.0).contains(&m), "ellip_ke: m = {m} outside [0, 1)");
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut csum = 0.5 * c * c; // 2^(n-1) c_n² accumulator, n = 0 term
    let mut pow2 = 1.0_f64;
    let mut iter = 0;
    while c.abs() > 1e-14 && iter < 64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        csum += pow2 * c * c;
        pow2 *= 2.0;
        iter += 1;
    }
    let k = std::f64::consts::PI / (2.0 * a);
    let e = k * (1.0 - csum);
    (k, e)
}

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    assert!(n >= 1, "gauss_legendre: order must be >= 1");
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss_legendre cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_gauss_legendre(n)))
        .clone()
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_pd(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pd(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("GL nodes finite"));
    out
}

/// Legendre polynomial P_n(x) and its derivative by the three-term recurrence.
fn legendre_pd(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫ f(u) du over [lo, hi] with an n-node Gauss-Legendre rule.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    let nodes = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for &(x, w) in nodes.iter() {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn elliptic_reference_values() {
        // Literature values (Abramowitz & Stegun tables).
        let (k0, e0) = ellip_ke(0.0);
        assert_relative_eq!(k0, std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(e0, std::f64::consts::FRAC_PI_2, max_relative = 1e-15);

        let (k5, e5) = ellip_ke(0.5);
        assert_relative_eq!(k5, 1.854_074_677_301_372, max_relative = 1e-13);
        assert_relative_eq!(e5, 1.350_643_881_047_676, max_relative = 1e-13);

        let (k9, e9) = ellip_ke(0.9);
        assert_relative_eq!(k9, 2.578_092_113_348_173, max_relative = 1e-13);
        assert_relative_eq!(e9, 1.104_774_732_704_073, max_relative = 1e-13);
    }

    #[test]
    fn elliptic_matches_quadrature() {
        // Independent check: direct quadrature of the defining integrals.
        for &m in &[0.1, 0.3, 0.6, 0.85] {
            let kq = gl_integrate(
                |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(),
                0.0,
                std::f64::consts::FRAC_PI_2,
                64,
            );
            let eq = gl_integrate(
                |t: f64| (1.0 - m * t.sin().powi(2)).sqrt(),
                0.0,
                std::f64::consts::FRAC_PI_2,
                64,
            );
            let (k, e) = ellip_ke(m);
            assert_relative_eq!(k, kq, max_relative = 1e-12);
            assert_relative_eq!(e, eq, max_relative = 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        // An n-point rule integrates degree 2n-1 exactly.
        let val = gl_integrate(|x| x.powi(7) - 3.0 * x.powi(4) + x, -1.0, 1.0, 4);
        assert_relative_eq!(val, -6.0 / 5.0, max_relative = 1e-14);
        let val = gl_integrate(|x| x.powi(2), 0.0, 3.0, 2);
        assert_relative_eq!(val, 9.0, max_relative = 1e-14);
    }

    #[test]
    fn plane_basis_right_handed() {
        for n in [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 2.0, -0.4),
            Vec3::new(-3.0, 0.1, 0.1),
        ] {
            let (e1, e2) = plane_basis(n);
            let nhat = n.normalized().unwrap();
            assert_relative_eq!(e1.norm(), 1.0, max_relative = 1e-14);
            assert_relative_eq!(e2.norm(), 1.0, max_relative = 1e-14);
            assert!(e1.dot(nhat).abs() < 1e-14);
            assert!(e2.dot(nhat).abs() < 1e-14);
            assert!((e1.cross(e2) - nhat).norm() < 1e-14);
        }
    }

    #[test]
    fn vector_ops() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-2.0, 0.5, 1.0);
        assert_relative_eq!(a.dot(b), 2.0, max_relative = 1e-15);
        assert_eq!(a.cross(b), Vec3::new(0.5, -7.0, 4.5));
        assert!(Vec3::new(f64::NAN, 0.0, 0.0).normalized().is_none());
        assert!(ZERO3.normalized().is_none());
    }
}
