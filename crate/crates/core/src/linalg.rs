//! Dense linear-algebra helpers: complex Pfaffians and small matrix utilities.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Complex scalar.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense real matrix.
pub type RMatrix = DMatrix<f64>;

/// `0 + 1i`.
pub const I: C64 = C64::new(0.0, 1.0);
/// `1 + 0i`.
pub const ONE: C64 = C64::new(1.0, 0.0);
/// `0 + 0i`.
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Pfaffian of an antisymmetric complex matrix by pivoted Parlett-Reid
/// elimination, `O(m^3)`. Only the strict upper triangle's antisymmetric
/// completion is meaningful; the input is not checked.
pub fn pfaffian(a: &CMatrix) -> C64 {
    let m = a.nrows();
    if m % 2 == 1 {
        return ZERO;
    }
    if m == 0 {
        return ONE;
    }
    let mut a = a.clone();
    let mut res = ONE;
    let mut k = 0;
    while k + 1 < m {
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].norm();
        for r in (k + 2)..m {
            let v = a[(r, k)].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            res = -res;
        }
        if best == 0.0 {
            return ZERO;
        }
        let piv = a[(k, k + 1)];
        res *= piv;
        if k + 2 < m {
            let tau: Vec<C64> = ((k + 2)..m).map(|c| a[(k, c)] / piv).collect();
            let col: Vec<C64> = ((k + 2)..m).map(|r| a[(r, k + 1)]).collect();
            for (i, r) in ((k + 2)..m).enumerate() {
                for (j, c) in ((k + 2)..m).enumerate() {
                    a[(r, c)] += tau[i] * col[j] - col[i] * tau[j];
                }
            }
        }
        k += 2;
    }
    res
}

/// Principal submatrix on the given ordered index list.
pub fn principal(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
}

/// Maximum absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Identity of size `m`.
pub fn eye(m: usize) -> CMatrix {
    CMatrix::identity(m, m)
}

/// Real matrix promoted to complex.
pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| C64::new(x, 0.0))
}

/// Largest singular-value-free distance check: `||a a^T - I||_max`.
pub fn orthogonality_defect(a: &RMatrix) -> f64 {
    let p = a * a.transpose();
    let m = a.nrows();
    let mut d: f64 = 0.0;
    for r in 0..m {
        for c in 0..m {
            let t = if r == c { 1.0 } else { 0.0 };
            d = d.max((p[(r, c)] - t).abs());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisym(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut a = CMatrix::zeros(m, m);
        for r in 0..m {
            for c in (r + 1)..m {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(r, c)] = v;
                a[(c, r)] = -v;
            }
        }
        a
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [2, 4, 6, 8, 10] {
            let a = random_antisym(m, &mut rng);
            let pf = pfaffian(&a);
            let det = a.clone().determinant();
            assert!((pf * pf - det).norm() < 1e-10 * (1.0 + det.norm()), "m={m}");
        }
    }

    #[test]
    fn pfaffian_small_cases() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = C64::new(2.0, 1.0);
        a[(1, 0)] = -a[(0, 1)];
        assert_eq!(pfaffian(&a), C64::new(2.0, 1.0));
        let mut b = CMatrix::zeros(4, 4);
        let v = [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 3.0), (1, 2, 4.0), (1, 3, 5.0), (2, 3, 6.0)];
        for (r, c, x) in v {
            b[(r, c)] = C64::new(x, 0.0);
            b[(c, r)] = C64::new(-x, 0.0);
        }
        // a01 a23 - a02 a13 + a03 a12
        assert!((pfaffian(&b) - C64::new(6.0 - 10.0 + 12.0, 0.0)).norm() < 1e-12);
        assert_eq!(pfaffian(&CMatrix::zeros(3, 3)), ZERO);
        assert_eq!(pfaffian(&CMatrix::zeros(0, 0)), ONE);
    }

    #[test]
    fn pfaffian_sum_identity() {
        // sum_S Pf(A_S) Pf(B_S) = (-1)^{m(m-1)/2} Pf([[A, I], [-I, -B]])
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=5usize {
            let a = random_antisym(m, &mut rng);
            let b = random_antisym(m, &mut rng);
            let mut sum = ZERO;
            for mask in 0u32..(1 << m) {
                let s: Vec<usize> = (0..m).filter(|q| mask >> q & 1 == 1).collect();
                sum += pfaffian(&principal(&a, &s)) * pfaffian(&principal(&b, &s));
            }
            let mut blk = CMatrix::zeros(2 * m, 2 * m);
            for r in 0..m {
                for c in 0..m {
                    blk[(r, c)] = a[(r, c)];
                    blk[(m + r, m + c)] = -b[(r, c)];
                }
                blk[(r, m + r)] = ONE;
                blk[(m + r, r)] = -ONE;
            }
            let sign = if (m * (m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((sum - pfaffian(&blk) * sign).norm() < 1e-10, "m={m}");
        }
    }
}
