//! Small dense helpers: weighted inner products, a Jacobi eigensolver for
//! small Hermitian matrices, symmetric tridiagonal diagonalization used by the
//! Lanczos routines, and a scaled-Taylor exponential for small matrices.

use crate::C64;

/// Weighted inner product `w * Σ conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64], w: f64) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    w * s
}

/// Weighted L² norm squared.
pub fn norm_sq(a: &[C64], w: f64) -> f64 {
    w * a.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

/// Weighted L² norm.
pub fn norm(a: &[C64], w: f64) -> f64 {
    norm_sq(a, w).sqrt()
}

pub fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(y: &mut [C64], alpha: f64) {
    for yi in y.iter_mut() {
        *yi *= alpha;
    }
}

/// Minimum distance between two vectors modulo a global phase on the second:
/// `min_θ ‖a − e^{iθ} b‖_w`.
pub fn phase_distance(a: &[C64], b: &[C64], w: f64) -> f64 {
    let na = norm_sq(a, w);
    let nb = norm_sq(b, w);
    let ov = inner(a, b, w).norm();
    (na + nb - 2.0 * ov).max(0.0).sqrt()
}

/// Eigenvalues of a small Hermitian matrix (row-major, n×n) by cyclic Jacobi.
/// Returns eigenvalues in ascending order. Intended for n ≲ 32.
pub fn eigh_small(mat: &[C64], n: usize) -> Vec<f64> {
    assert_eq!(mat.len(), n * n);
    let mut a: Vec<C64> = mat.to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[idx(i, j)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                // unitary 2x2 rotation annihilating the (p,q) entry
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let s_c = phase * s;
                // apply G^H A G with G acting on columns p,q
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s_c.conj() * akq;
                    a[idx(k, q)] = s_c * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s_c * aqk;
                    a[idx(q, k)] = s_c.conj() * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[idx(i, i)].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

fn frobenius(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL
/// with Wilkinson shifts. `d` holds the diagonal, `e` the subdiagonal
/// (`e[i]` couples rows i and i+1; `e[n-1]` is ignored). On return `d` holds
/// eigenvalues in ascending order and `z` (row-major n×n, initialized to the
/// identity by the caller or to a basis to rotate) holds eigenvectors in its
/// columns.
pub fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<(), &'static str> {
    if n == 0 {
        return Ok(());
    }
    // shift subdiagonal for the classic indexing
    for i in 1..n {
        e[i - 1] = e[i - 1];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // find small subdiagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err("tridiagonal QL failed to converge");
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate eigenvector matrix
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if r == 0.0 && m > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, permuting eigenvector columns
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let d_old = d.to_vec();
    let z_old = z.to_vec();
    for (new, &old) in order.iter().enumerate() {
        d[new] = d_old[old];
        for k in 0..n {
            z[k * n + new] = z_old[k * n + old];
        }
    }
    Ok(())
}

/// `exp(A) v` for a small dense matrix (row-major n×n): the series of
/// exp(A/s) is applied s times with s chosen so ‖A‖₁/s ≤ 1/2. Adequate for
/// the few-mode coupling phases where n ≤ 8 and ‖A‖ is modest.
pub fn expm_small_apply(a: &[C64], n: usize, v: &[C64]) -> Vec<C64> {
    let norm1: f64 = (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = ((norm1 / 0.5).ceil() as usize).max(1);
    let s = steps as f64;
    let mut result = v.to_vec();
    for _ in 0..steps {
        let mut term = result.clone();
        let mut acc = result.clone();
        for k in 1..=24 {
            let mut next = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut acc_i = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc_i += a[i * n + j] * term[j];
                }
                next[i] = acc_i / (s * k as f64);
            }
            for i in 0..n {
                acc[i] += next[i];
            }
            let sz: f64 = next.iter().map(|x| x.norm_sqr()).sum();
            term = next;
            if sz.sqrt() < 1e-18 {
                break;
            }
        }
        result = acc;
    }
    result
}
