use nalgebra::{DMatrix, DVector};

use super::MixingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the contracting coordinates on the zero-sum subspace are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NormConstruction {
    /// Square root of the solution of the Stein equation `P = I + BᵀPB` with
    /// `B = A / (sigma + epsilon)`. Well conditioned for any graph size.
    #[default]
    Lyapunov,
    /// Real Schur form with standardized 2x2 blocks and geometric diagonal
    /// rescaling of the strictly upper part. Condition number grows like
    /// `t^-(n-2)`, so only practical for small graphs.
    SchurRescaling,
}

/// Invertible `Ctilde` defining `‖x‖_C = ‖Ctilde x‖`, under which the mixing
/// deviation `C - p1ᵀ/n` has induced norm at most `1 - delta`.
///
/// `Ctilde` is normalized to unit spectral norm, so `‖Ctilde x‖ ≤ ‖x‖ ≤ theta ‖Ctilde x‖`.
/// The Perron direction and the zero-sum subspace are mapped to orthogonal
/// coordinate blocks, which makes `Π = I - p1ᵀ/n` an orthogonal projector in
/// the new norm; its measured induced norm is kept in `projector_norm`.
#[derive(Clone, Debug)]
pub struct NormTransform<T: Scalar> {
    ctilde: DMatrix<T>,
    ctilde_inv: DMatrix<T>,
    delta: T,
    theta: T,
    epsilon: T,
    projector_norm: T,
    construction: NormConstruction,
}

impl<T: Scalar> NormTransform<T> {
    /// Default margin `epsilon = (1 - sigma) / 2`.
    pub fn build(mix: &MixingMatrix<T>) -> Result<Self> {
        let eps = (T::one() - mix.sigma()) / T::lit(2.0);
        Self::build_with(mix, eps, NormConstruction::default())
    }

    pub fn build_with(mix: &MixingMatrix<T>, epsilon: T, construction: NormConstruction) -> Result<Self> {
        let sigma = mix.sigma();
        if !(epsilon > T::zero() && epsilon < T::one() - sigma) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, {}), got {epsilon}",
                T::one() - sigma
            )));
        }
        let n = mix.n();
        let nf = T::of_usize(n);
        let p = mix.perron();
        let delta = T::one() - sigma - epsilon;

        let (raw, raw_inv) = if n == 1 {
            (DMatrix::identity(1, 1), DMatrix::identity(1, 1))
        } else {
            let basis = zero_sum_basis::<T>(n);
            let restricted = basis.transpose() * mix.deviation() * &basis;
            let (w, w_inv) = match construction {
                NormConstruction::Lyapunov => stein_coordinates(&restricted, sigma + epsilon)?,
                NormConstruction::SchurRescaling => schur_coordinates(&restricted, sigma + epsilon / T::lit(2.0))?,
            };
            let sv = w.clone().svd(false, false).singular_values;
            let gain = (sv.max() * sv.min()).sqrt() * p.norm();

            // x = a p + basis s  ↦  (gain a, w s), with a = 1ᵀx / n and s = basisᵀ Π x.
            let mut raw = DMatrix::zeros(n, n);
            raw.row_mut(0).fill(gain / nf);
            let lower = &w * basis.transpose() * mix.projector();
            raw.rows_mut(1, n - 1).copy_from(&lower);

            let mut raw_inv = DMatrix::zeros(n, n);
            raw_inv.column_mut(0).copy_from(&(p / gain));
            raw_inv.columns_mut(1, n - 1).copy_from(&(&basis * &w_inv));
            (raw, raw_inv)
        };

        let sv = raw.clone().svd(false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > T::zero()) {
            return Err(Error::InvalidMixing("norm transform is singular".into()));
        }
        let ctilde = raw / smax;
        let ctilde_inv = raw_inv * smax;
        let mut nt = NormTransform {
            ctilde,
            ctilde_inv,
            delta,
            theta: smax / smin,
            epsilon,
            projector_norm: T::one(),
            construction,
        };
        nt.projector_norm = nt.induced_norm(&mix.projector());
        Ok(nt)
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.ctilde
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.ctilde_inv
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Measured induced norm of `I - p1ᵀ/n`.
    pub fn projector_norm(&self) -> T {
        self.projector_norm
    }

    pub fn construction(&self) -> NormConstruction {
        self.construction
    }

    pub fn vec_norm(&self, x: &DVector<T>) -> T {
        (&self.ctilde * x).norm()
    }

    /// Column-wise norm of an `n x p` matrix: Euclidean norm of the vector of
    /// column norms, i.e. the Frobenius norm of `Ctilde A`.
    pub fn mat_norm(&self, a: &DMatrix<T>) -> T {
        (&self.ctilde * a).norm()
    }

    /// Induced norm of an `n x n` matrix: spectral norm of `Ctilde W Ctilde⁻¹`.
    pub fn induced_norm(&self, w: &DMatrix<T>) -> T {
        spectral_norm(&(&self.ctilde * w * &self.ctilde_inv))
    }
}

pub(crate) fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Orthonormal basis (n x n-1) of `{x : 1ᵀx = 0}` from the Householder
/// reflector sending `e₁` to `1/√n`.
fn zero_sum_basis<T: Scalar>(n: usize) -> DMatrix<T> {
    let inv_sqrt = T::one() / T::of_usize(n).sqrt();
    let mut u = DVector::repeat(n, -inv_sqrt);
    u[0] += T::one();
    let h = DMatrix::identity(n, n) - &u * u.transpose() * (T::lit(2.0) / u.norm_squared());
    h.columns(1, n - 1).into_owned()
}

fn stein_coordinates<T: Scalar>(a: &DMatrix<T>, radius: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let m = a.nrows();
    let mut b = a / radius;
    let mut p = DMatrix::<T>::identity(m, m);
    let tiny = T::unit_roundoff() * T::lit(1e-3);
    let mut converged = false;
    // Smith doubling: after j rounds p = Σ_{k < 2^j} (Bᵀ)^k B^k.
    for _ in 0..64 {
        p = &p + b.transpose() * &p * &b;
        b = &b * &b;
        let bn = b.norm();
        if !bn.is_finite_value() || !p.iter().all(|x| x.is_finite_value()) {
            break;
        }
        if bn <= tiny {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "Stein equation doubling",
            iterations: 64,
            residual: b.norm().as_f64(),
        });
    }
    let p = (&p + p.transpose()) / T::lit(2.0);
    let chol = p.cholesky().ok_or_else(|| Error::InvalidMixing("Stein solution is not positive definite".into()))?;
    let w = chol.l().transpose();
    let w_inv = w.clone().try_inverse().ok_or_else(|| Error::InvalidMixing("Stein factor is singular".into()))?;
    Ok((w, w_inv))
}

fn schur_coordinates<T: Scalar>(a: &DMatrix<T>, target: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let m = a.nrows();
    if m == 1 {
        return Ok((DMatrix::identity(1, 1), DMatrix::identity(1, 1)));
    }
    let (u, t) = a.clone().schur().unpack();

    // Block-diagonal similarity standardizing each 2x2 block, plus the
    // scaling-block index of every row.
    let mut s = DMatrix::<T>::identity(m, m);
    let mut block_of = vec![0usize; m];
    let mut block = 0;
    let mut i = 0;
    while i < m {
        let coupled = i + 1 < m && {
            let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs() + T::one();
            t[(i + 1, i)].abs() > T::unit_roundoff() * scale
        };
        if !coupled {
            block_of[i] = block;
            block += 1;
            i += 1;
            continue;
        }
        let (pa, pb, pc, pd) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let half = (pa - pd) / T::lit(2.0);
        let disc = half * half + pb * pc;
        if disc < T::zero() {
            // Complex pair re ± i·im with eigenvector (b, λ - a): S = [Re | Im].
            let re = (pa + pd) / T::lit(2.0);
            let im = (-disc).sqrt();
            s[(i, i)] = pb;
            s[(i, i + 1)] = T::zero();
            s[(i + 1, i)] = re - pa;
            s[(i + 1, i + 1)] = im;
            block_of[i] = block;
            block_of[i + 1] = block;
            block += 1;
        } else {
            // Real pair left unsplit: rotate onto an eigenvector to triangularize.
            let lambda = (pa + pd) / T::lit(2.0) + disc.sqrt();
            let (w0, w1) = if pb.abs() >= pc.abs() { (pb, lambda - pa) } else { (lambda - pd, pc) };
            let r = (w0 * w0 + w1 * w1).sqrt();
            let (cs, sn) = if r > T::zero() { (w0 / r, w1 / r) } else { (T::one(), T::zero()) };
            s[(i, i)] = cs;
            s[(i, i + 1)] = -sn;
            s[(i + 1, i)] = sn;
            s[(i + 1, i + 1)] = cs;
            block_of[i] = block;
            block_of[i + 1] = block + 1;
            block += 2;
        }
        i += 2;
    }
    let s_inv = s.clone().try_inverse().ok_or_else(|| Error::InvalidMixing("degenerate 2x2 Schur block".into()))?;
    let standardized = &s_inv * &t * &s;

    let half = T::lit(0.5);
    let mut scale = T::one();
    for _ in 0..1000 {
        let scaled =
            DMatrix::from_fn(m, m, |r, c| standardized[(r, c)] * scale.powi(block_of[c] as i32 - block_of[r] as i32));
        if spectral_norm(&scaled) <= target {
            let e = DVector::from_fn(m, |r, _| scale.powi(block_of[r] as i32));
            let e_inv = e.map(|x| T::one() / x);
            let w = DMatrix::from_diagonal(&e_inv) * &s_inv * u.transpose();
            let w_inv = &u * &s * DMatrix::from_diagonal(&e);
            return Ok((w, w_inv));
        }
        scale *= half;
    }
    Err(Error::NotConverged { what: "Schur rescaling search", iterations: 1000, residual: target.as_f64() })
}
