//! Small dense complex linear algebra helpers shared by the propagator and
//! Floquet modules: Hermitian eigendecomposition, Hermitian-generator
//! exponentials, Kronecker products, and eigenphases of unitary matrices.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// 2x2 identity.
pub fn id2() -> CMat2 {
    CMat2::identity()
}

/// Pauli x.
pub fn sigma_x() -> CMat2 {
    CMat2::new(ZERO, ONE, ONE, ZERO)
}

/// Pauli y.
pub fn sigma_y() -> CMat2 {
    CMat2::new(ZERO, -I, I, ZERO)
}

/// Pauli z.
pub fn sigma_z() -> CMat2 {
    CMat2::new(ONE, ZERO, ZERO, -ONE)
}

/// Pauli matrix along an equatorial axis at angle `phi` from x.
pub fn sigma_phi(phi: f64) -> CMat2 {
    let (s, c) = phi.sin_cos();
    sigma_x() * C64::new(c, 0.0) + sigma_y() * C64::new(s, 0.0)
}

/// Kronecker product of two 2x2 matrices as a 4x4 matrix.
pub fn kron2(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut out = CMat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(values, vectors)` with eigenvectors in the columns of `vectors`,
/// ordered to match `values`.
pub fn eigh(h: &CMat) -> (DVector<f64>, CMat) {
    let se = h.clone().symmetric_eigen();
    sort_eigen(se.eigenvalues.as_slice(), &se.eigenvectors)
}

/// Eigenvalues of a Hermitian matrix, ascending. Cheaper than [`eigh`] when
/// eigenvectors are not needed.
pub fn eigh_values(h: &CMat) -> Vec<f64> {
    let mut vals: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

fn sort_eigen(vals: &[f64], vecs: &CMat) -> (DVector<f64>, CMat) {
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let sorted_vals = DVector::from_iterator(n, idx.iter().map(|&i| vals[i]));
    let mut sorted_vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        sorted_vecs.set_column(col, &vecs.column(i));
    }
    (sorted_vals, sorted_vecs)
}

/// Eigendecomposition of a Hermitian 4x4 matrix, eigenvalues ascending.
pub fn eigh4(h: &CMat4) -> (DVector<f64>, CMat) {
    let dyn_h = CMat::from_fn(4, 4, |i, j| h[(i, j)]);
    eigh(&dyn_h)
}

/// exp(-i h dt) for Hermitian `h` via exact eigendecomposition.
pub fn expmh4(h: &CMat4, dt: f64) -> CMat4 {
    let (vals, vecs) = eigh4(h);
    let mut out = CMat4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = ZERO;
            for n in 0..4 {
                let phase = C64::from_polar(1.0, -vals[n] * dt);
                acc += vecs[(a, n)] * phase * vecs[(b, n)].conj();
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// `u^n` by binary exponentiation. Drift-free to available precision for the
/// pulse counts used here (log2(n) products of 4x4 unitaries).
pub fn matrix_power4(u: &CMat4, n: u64) -> CMat4 {
    let mut result = CMat4::identity();
    let mut base = *u;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = base * result;
        }
        base = base * base;
        e >>= 1;
    }
    result
}

/// Eigenphases of a unitary matrix, each in (-pi, pi].
///
/// Writes `u = sum_n exp(i theta_n) v_n v_n^dag` using the commuting Hermitian
/// pair `A = (u + u^dag)/2 = cos(Theta)` and `B = (u - u^dag)/(2i) = sin(Theta)`:
/// a generic linear combination `cos(mu) A + sin(mu) B` is diagonalized and the
/// phase of each eigenvector is read back from both quadratures. The residual
/// `|u v - e^{i theta} v|` is checked and the mixing angle re-drawn on the rare
/// collision `cos(theta_i - mu) = cos(theta_j - mu)` for distinct phases.
pub fn unitary_eigenphases(u: &CMat) -> Vec<f64> {
    let n = u.nrows();
    let udag = u.adjoint();
    let a = (u + &udag).map(|z| z * C64::new(0.5, 0.0));
    let b = (u - &udag).map(|z| z * C64::new(0.0, -0.5));
    for &mu in &[0.0f64, std::f64::consts::FRAC_PI_4, 0.4636476090008061] {
        let m = &a * C64::new(mu.cos(), 0.0) + &b * C64::new(mu.sin(), 0.0);
        let (_, vecs) = eigh(&m);
        let mut phases = Vec::with_capacity(n);
        let mut ok = true;
        for col in 0..n {
            let v = vecs.column(col);
            let ca = (v.adjoint() * &a * v)[(0, 0)].re;
            let cb = (v.adjoint() * &b * v)[(0, 0)].re;
            let theta = cb.atan2(ca);
            let residual = (u * v - v * C64::from_polar(1.0, theta)).norm();
            if residual > 1e-9 {
                ok = false;
                break;
            }
            phases.push(theta);
        }
        if ok {
            phases.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return phases;
        }
    }
    panic!("unitary eigenphase extraction failed for all mixing angles");
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(phi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = phi % two_pi;
    if x <= -std::f64::consts::PI {
        x += two_pi;
    } else if x > std::f64::consts::PI {
        x -= two_pi;
    }
    x
}
