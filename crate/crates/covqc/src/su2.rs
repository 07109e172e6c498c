//! SU(2) irreducible representations and their coupling data.
//!
//! The spin-`k/2` irrep acts on `H_k = C^{k+1}`; basis vector `|i>` carries
//! magnetic number `m_z = k/2 - i`, so `|0>` is the highest-weight vector.
//! Clebsch-Gordan coefficients come from Racah's single-sum formula evaluated
//! in exact rational arithmetic (Condon-Shortley convention) and are only
//! rounded once, when converted to `f64`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Complex64, DenseMatrix, ONE, ZERO};
use crate::{Error, Result};

/// Does `H_k` occur in `H_l (x) H_m`?
pub fn admissible(l: usize, m: usize, k: usize) -> bool {
    let lo = l.abs_diff(m);
    let hi = l + m;
    lo <= k && k <= hi && (l + m + k) % 2 == 0
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>` with all spins and
/// magnetic numbers doubled so the arguments stay integral.
fn cg_doubled(dj1: i64, dm1: i64, dj2: i64, dm2: i64, dj: i64, dm: i64) -> f64 {
    if dm1 + dm2 != dm
        || dm1.abs() > dj1
        || dm2.abs() > dj2
        || dm.abs() > dj
        || (dj1 + dm1) % 2 != 0
        || (dj2 + dm2) % 2 != 0
        || (dj + dm) % 2 != 0
    {
        return 0.0;
    }
    if dj < (dj1 - dj2).abs() || dj > dj1 + dj2 || (dj1 + dj2 + dj) % 2 != 0 {
        return 0.0;
    }

    // Everything below is in undoubled, integral quantities.
    let a1 = (dj1 + dj2 - dj) / 2;
    let a2 = (dj1 - dj2 + dj) / 2;
    let a3 = (-dj1 + dj2 + dj) / 2;
    let a4 = (dj1 + dj2 + dj) / 2 + 1;

    let prefactor = BigRational::new(
        BigInt::from(dj + 1) * factorial(a1) * factorial(a2) * factorial(a3),
        factorial(a4),
    ) * BigRational::from_integer(
        factorial((dj + dm) / 2)
            * factorial((dj - dm) / 2)
            * factorial((dj1 - dm1) / 2)
            * factorial((dj1 + dm1) / 2)
            * factorial((dj2 - dm2) / 2)
            * factorial((dj2 + dm2) / 2),
    );

    let b1 = (dj1 + dj2 - dj) / 2;
    let b2 = (dj1 - dm1) / 2;
    let b3 = (dj2 + dm2) / 2;
    let b4 = (dj - dj2 + dm1) / 2;
    let b5 = (dj - dj1 - dm2) / 2;

    let k_min = 0.max(-b4).max(-b5);
    let k_max = b1.min(b2).min(b3);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(b1 - k)
            * factorial(b2 - k)
            * factorial(b3 - k)
            * factorial(b4 + k)
            * factorial(b5 + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let magnitude = (sum.clone() * sum.clone() * prefactor)
        .to_f64()
        .expect("CG magnitude out of f64 range");
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    sign * magnitude.sqrt()
}

/// Table of coefficients `C^{l,m,k}_{i1,i2,i}` expanding `|i>` of `H_k` inside
/// `H_l (x) H_m`.
#[derive(Debug, Clone)]
pub struct CgTable {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    coeffs: Vec<f64>,
}

impl CgTable {
    pub fn new(l: usize, m: usize, k: usize) -> Result<Self> {
        if !admissible(l, m, k) {
            return Err(Error::InadmissibleTriple { l, m, k });
        }
        let mut coeffs = vec![0.0; (l + 1) * (m + 1) * (k + 1)];
        for i1 in 0..=l {
            for i2 in 0..=m {
                for i in 0..=k {
                    let c = cg_doubled(
                        l as i64,
                        l as i64 - 2 * i1 as i64,
                        m as i64,
                        m as i64 - 2 * i2 as i64,
                        k as i64,
                        k as i64 - 2 * i as i64,
                    );
                    coeffs[(i1 * (m + 1) + i2) * (k + 1) + i] = c;
                }
            }
        }
        let mut table = CgTable { l, m, k, coeffs };
        // Fix the global phase: first nonzero coefficient of column 0 in
        // lexicographic (i1, i2) order must be positive. Condon-Shortley
        // already guarantees this; keep it as a hard normalization so a sign
        // slip in the formula cannot leak into the channel constructions.
        'outer: for i1 in 0..=l {
            for i2 in 0..=m {
                let c = table.coeff(i1, i2, 0);
                if c != 0.0 {
                    if c < 0.0 {
                        for v in &mut table.coeffs {
                            *v = -*v;
                        }
                    }
                    break 'outer;
                }
            }
        }
        Ok(table)
    }

    #[inline]
    pub fn coeff(&self, i1: usize, i2: usize, i: usize) -> f64 {
        self.coeffs[(i1 * (self.m + 1) + i2) * (self.k + 1) + self.i_stride_check(i)]
    }

    #[inline]
    fn i_stride_check(&self, i: usize) -> usize {
        debug_assert!(i <= self.k);
        i
    }

    /// The isometry `H_k -> H_l (x) H_m` whose column `i` lists the
    /// coefficients of `|i>` in the lexicographic product basis.
    pub fn isometry(&self) -> DenseMatrix {
        let (l, m, k) = (self.l, self.m, self.k);
        DenseMatrix::from_fn((l + 1) * (m + 1), k + 1, |row, i| {
            Complex64::new(self.coeff(row / (m + 1), row % (m + 1), i), 0.0)
        })
    }
}

/// An SU(2) element `[[a, b], [-conj(b), conj(a)]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Element {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su2Element {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let n = a.norm_sqr() + b.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "SU(2) parameters have squared norm {n:.17}, expected 1"
            )));
        }
        Ok(Su2Element { a, b })
    }

    pub fn identity() -> Self {
        Su2Element { a: ONE, b: ZERO }
    }

    /// Diagonal torus element `diag(e^{i theta}, e^{-i theta})`.
    pub fn torus(theta: f64) -> Self {
        Su2Element { a: Complex64::from_polar(1.0, theta), b: ZERO }
    }

    pub fn matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 0, self.a);
        m.set(0, 1, self.b);
        m.set(1, 0, -self.b.conj());
        m.set(1, 1, self.a.conj());
        m
    }

    pub fn inverse(&self) -> Self {
        Su2Element { a: self.a.conj(), b: -self.b }
    }

    pub fn mul(&self, other: &Su2Element) -> Self {
        Su2Element {
            a: self.a * other.a - self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }
}

/// Haar-distributed SU(2) element from four standard normals projected to the
/// unit quaternion sphere.
pub fn haar_su2(rng: &mut impl Rng) -> Su2Element {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > 1e-6 {
            return Su2Element {
                a: Complex64::new(w / n, x / n),
                b: Complex64::new(y / n, z / n),
            };
        }
    }
}

/// Haar-distributed pure state in `C^dim`.
pub fn haar_state(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = crate::linalg::norm(&v);
        if n > 1e-6 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

const MAX_FACTORIAL_F64: usize = 170;

fn factorial_f64(n: usize) -> f64 {
    debug_assert!(n <= MAX_FACTORIAL_F64);
    let mut acc = 1.0;
    for i in 2..=n {
        acc *= i as f64;
    }
    acc
}

/// The irrep matrix `pi_l(U)`: the restriction of `U^{(x) l}` to the symmetric
/// subspace in the orthonormal occupation basis.
///
/// With `U = [[a, b], [-conj(b), conj(a)]]` the entries are
///
/// ```text
/// pi_l(U)[i', i] = sqrt(i!(l-i)!i'!(l-i')!) *
///     sum_r a^(l-i-i'+r) b^(i-r) (-conj(b))^(i'-r) conj(a)^r
///           / (r! (i-r)! (i'-r)! (l-i-i'+r)!)
/// ```
///
/// which reduces to `U` itself at `l = 1` and to diagonal phases
/// `e^{i(l-2j) theta}` on the torus.
pub fn wigner_pi(l: usize, u: &Su2Element) -> DenseMatrix {
    assert!(2 * l <= MAX_FACTORIAL_F64, "irrep label too large for f64 factorials");
    if l == 0 {
        return DenseMatrix::identity(1);
    }
    let (a, b) = (u.a, u.b);
    let nb = -b.conj();
    let ca = a.conj();
    DenseMatrix::from_fn(l + 1, l + 1, |ip, i| {
        let norm = (factorial_f64(i)
            * factorial_f64(l - i)
            * factorial_f64(ip)
            * factorial_f64(l - ip))
        .sqrt();
        let r_min = (i + ip).saturating_sub(l);
        let r_max = i.min(ip);
        let mut sum = ZERO;
        for r in r_min..=r_max {
            let term = cpow(a, l + r - i - ip) * cpow(b, i - r) * cpow(nb, ip - r) * cpow(ca, r);
            let denom = factorial_f64(r)
                * factorial_f64(i - r)
                * factorial_f64(ip - r)
                * factorial_f64(l + r - i - ip);
            sum += term / denom;
        }
        norm * sum
    })
}

fn cpow(z: Complex64, n: usize) -> Complex64 {
    let mut acc = ONE;
    for _ in 0..n {
        acc *= z;
    }
    acc
}

/// The intertwiner `R_m = sum_j (-1)^j |m-j><j|` conjugating `pi_m` to its
/// complex conjugate: `R_m pi_m(U) R_m^dagger = conj(pi_m(U))`.
pub fn r_matrix(m: usize) -> DenseMatrix {
    let mut r = DenseMatrix::zeros(m + 1, m + 1);
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        r.set(m - j, j, Complex64::new(sign, 0.0));
    }
    r
}
