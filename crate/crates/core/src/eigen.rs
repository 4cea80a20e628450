//! Eigenstructure of 4×4 real maps with one complex-conjugate eigenvalue pair.
//!
//! Eigenvalues come from a Householder reduction to upper Hessenberg form
//! followed by Francis double-shift QR iterations. Eigenvectors are the null
//! vectors of `A − λI`, found by complete-pivoting elimination.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ptm::Mat4;

pub type CMat4 = [[Complex64; 4]; 4];

/// Imaginary parts at or below this are treated as real.
pub const IMAG_THRESHOLD: f64 = 1e-10;
/// Two real eigenvalues closer than this share one null space.
const CLUSTER_TOL: f64 = 1e-9;
const MAX_QR_ITERATIONS: usize = 60;

/// Diagonalising frame of a map: `S⁻¹ A S = diag(λ₁, r e^{iφ}, r e^{−iφ}, d)`.
///
/// `λ₁` is the real eigenvalue closest to 1, which is exactly 1 for
/// trace-preserving maps. `φ` is the phase of the eigenvalue with positive
/// imaginary part.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    pub r: f64,
    pub phi: f64,
    pub d: f64,
    pub unity: f64,
    pub basis_change: CMat4,
    basis_change_inv: CMat4,
}

impl EigenFrame {
    /// Eigenvalues in frame order.
    pub fn eigenvalues(&self) -> [Complex64; 4] {
        let lam = Complex64::from_polar(self.r, self.phi);
        [
            Complex64::new(self.unity, 0.0),
            lam,
            lam.conj(),
            Complex64::new(self.d, 0.0),
        ]
    }

    pub fn basis_change_inverse(&self) -> &CMat4 {
        &self.basis_change_inv
    }

    /// `S⁻¹ · m · S` for an arbitrary real matrix `m`.
    pub fn transform(&self, m: &Mat4) -> CMat4 {
        let mc = to_complex(m);
        cmatmul(&cmatmul(&self.basis_change_inv, &mc), &self.basis_change)
    }
}

pub fn eigenframe(m: &Mat4) -> Result<EigenFrame> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    let eig = eigenvalues(m)?;
    let (complex, real): (Vec<Complex64>, Vec<Complex64>) =
        eig.iter().partition(|z| z.im.abs() > IMAG_THRESHOLD);
    if complex.len() != 2 {
        return Err(Error::DegenerateRealSpectrum(format!(
            "expected one complex-conjugate pair, eigenvalues are {eig:?}"
        )));
    }
    let lam = if complex[0].im > 0.0 {
        complex[0]
    } else {
        complex[1]
    };
    let (mut unity, mut d) = (real[0].re, real[1].re);
    if (d - 1.0).abs() < (unity - 1.0).abs() {
        std::mem::swap(&mut unity, &mut d);
    }

    let rotating = null_space(&shifted(m, lam), 1)
        .ok_or_else(|| not_diagonalizable("complex eigenvector"))?[0];
    let (v_unity, v_d) = if (unity - d).abs() <= CLUSTER_TOL {
        let pair = null_space(&shifted(m, Complex64::new(unity, 0.0)), 2)
            .ok_or_else(|| not_diagonalizable("repeated real eigenvalue"))?;
        (pair[0], pair[1])
    } else {
        let a = null_space(&shifted(m, Complex64::new(unity, 0.0)), 1)
            .ok_or_else(|| not_diagonalizable("unit eigenvector"))?[0];
        let b = null_space(&shifted(m, Complex64::new(d, 0.0)), 1)
            .ok_or_else(|| not_diagonalizable("real eigenvector"))?[0];
        (a, b)
    };

    let columns = [v_unity, rotating, rotating.map(|z| z.conj()), v_d];
    let mut s = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (j, col) in columns.iter().enumerate() {
        for i in 0..4 {
            s[i][j] = col[i];
        }
    }
    let s_inv = cinverse(&s).ok_or_else(|| not_diagonalizable("singular eigenvector basis"))?;

    Ok(EigenFrame {
        r: lam.norm(),
        phi: lam.arg(),
        d,
        unity,
        basis_change: s,
        basis_change_inv: s_inv,
    })
}

fn not_diagonalizable(what: &str) -> Error {
    Error::invalid(format!("map is not diagonalizable: {what}"))
}

/// All four eigenvalues of a real 4×4 matrix.
pub fn eigenvalues(m: &Mat4) -> Result<[Complex64; 4]> {
    let mut h = *m;
    hessenberg(&mut h);
    hqr(h)
}

fn hessenberg(a: &mut Mat4) {
    const N: usize = 4;
    for k in 0..N - 2 {
        let mut v = [0.0; N];
        let len = N - k - 1;
        for i in 0..len {
            v[i] = a[k + 1 + i][k];
        }
        let alpha = v[..len].iter().map(|x| x * x).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        v[0] += if v[0] >= 0.0 { alpha } else { -alpha };
        let vv: f64 = v[..len].iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in 0..N {
            let s: f64 = (0..len).map(|i| v[i] * a[k + 1 + i][j]).sum();
            let f = 2.0 * s / vv;
            for i in 0..len {
                a[k + 1 + i][j] -= f * v[i];
            }
        }
        for row in a.iter_mut() {
            let s: f64 = (0..len).map(|j| row[k + 1 + j] * v[j]).sum();
            let f = 2.0 * s / vv;
            for j in 0..len {
                row[k + 1 + j] -= f * v[j];
            }
        }
        for row in a.iter_mut().skip(k + 2) {
            row[k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hqr(mut a: Mat4) -> Result<[Complex64; 4]> {
    const N: usize = 4;
    let mut wr = [0.0; N];
    let mut wi = [0.0; N];
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in &row[i.saturating_sub(1)..] {
            anorm += v.abs();
        }
    }
    let mut nn = N as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = z;
                    wi[nu] = -z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(Error::invalid("eigenvalue iteration did not converge"));
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[i][i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // form the shift and look for two consecutive small subdiagonals
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // double QR step on rows l..=nu and columns m..=nu
            for k in m..nu {
                let mut scale = 0.0;
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    scale = p.abs() + q.abs() + r.abs();
                    if scale != 0.0 {
                        p /= scale;
                        q /= scale;
                        r /= scale;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * scale;
                }
                p += s;
                let xx = p / s;
                let yy = q / s;
                let zz = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nu - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * zz;
                    }
                    a[k + 1][j] -= pp * yy;
                    a[k][j] -= pp * xx;
                }
                let mmin = nu.min(k + 3);
                for row in a.iter_mut().take(mmin + 1).skip(l) {
                    let mut pp = xx * row[k] + yy * row[k + 1];
                    if k != nu - 1 {
                        pp += zz * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k + 1] -= pp * q;
                    row[k] -= pp;
                }
            }
        }
    }
    let mut out = [Complex64::new(0.0, 0.0); N];
    for i in 0..N {
        out[i] = Complex64::new(wr[i], wi[i]);
    }
    Ok(out)
}

fn shifted(m: &Mat4, lam: Complex64) -> CMat4 {
    let mut a = to_complex(m);
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lam;
    }
    a
}

fn to_complex(m: &Mat4) -> CMat4 {
    m.map(|row| row.map(|v| Complex64::new(v, 0.0)))
}

fn cmatmul(a: &CMat4, b: &CMat4) -> CMat4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `dim` unit-norm vectors spanning the (numerical) null space of `a`.
///
/// Eliminates `4 − dim` pivots with complete pivoting; the remaining columns
/// are free variables. Returns `None` if a required pivot vanishes.
fn null_space(a: &CMat4, dim: usize) -> Option<Vec<[Complex64; 4]>> {
    const N: usize = 4;
    let rank = N - dim;
    let mut u = *a;
    let mut cols: [usize; N] = [0, 1, 2, 3];
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);

    for k in 0..rank {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in u.iter().enumerate().skip(k) {
            for (j, z) in row.iter().enumerate().skip(k) {
                if z.norm() > best {
                    best = z.norm();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= scale * 1e-14 || best == 0.0 {
            return None;
        }
        u.swap(k, pi);
        for row in u.iter_mut() {
            row.swap(k, pj);
        }
        cols.swap(k, pj);
        for i in k + 1..N {
            let f = u[i][k] / u[k][k];
            for j in k..N {
                let t = u[k][j];
                u[i][j] -= f * t;
            }
        }
    }

    let mut out = Vec::with_capacity(dim);
    for free in rank..N {
        let mut y = [Complex64::new(0.0, 0.0); N];
        y[free] = Complex64::new(1.0, 0.0);
        for k in (0..rank).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in k + 1..N {
                acc += u[k][j] * y[j];
            }
            y[k] = -acc / u[k][k];
        }
        let mut v = [Complex64::new(0.0, 0.0); N];
        for (k, &c) in cols.iter().enumerate() {
            v[c] = y[k];
        }
        out.push(normalize(v));
    }
    Some(out)
}

/// Unit 2-norm with the largest component made real and positive.
fn normalize(v: [Complex64; 4]) -> [Complex64; 4] {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    v.map(|z| z * phase / norm)
}

/// Gauss-Jordan inverse with partial pivoting.
fn cinverse(a: &CMat4) -> Option<CMat4> {
    const N: usize = 4;
    let mut m = *a;
    let mut inv = [[Complex64::new(0.0, 0.0); N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for k in 0..N {
        let p = (k..N).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))?;
        if m[p][k].norm() <= scale * 1e-14 {
            return None;
        }
        m.swap(k, p);
        inv.swap(k, p);
        let piv = m[k][k];
        for j in 0..N {
            m[k][j] /= piv;
            inv[k][j] /= piv;
        }
        for i in 0..N {
            if i == k {
                continue;
            }
            let f = m[i][k];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..N {
                let (mk, ik) = (m[k][j], inv[k][j]);
                m[i][j] -= f * mk;
                inv[i][j] -= f * ik;
            }
        }
    }
    Some(inv)
}
