//! Seeded sampling of Haar-random unitaries.
//!
//! A `d × d` matrix of i.i.d. standard complex Gaussians is QR-factorized with
//! Householder reflections, and column `j` of `Q` is multiplied by the phase
//! `r_jj / |r_jj|`. The rescaled `Q` is the unique QR factor with a positive
//! real diagonal in `R`, which makes its law exactly Haar.
//!
//! Randomness comes from ChaCha20 keyed by the seed with an explicit stream
//! number, so `(seed, stream, dim)` fixes the output bit-for-bit and parallel
//! ensembles can hand each sample its own stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tensor::{contract, ComplexTensor, C64, ONE, ZERO};
use crate::tolerance::EXACT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HaarSampler {
    pub seed: u64,
    pub stream: u64,
}

impl HaarSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// A `d × d` unitary, stored as a rank-2 tensor (row = output, column = input).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    tensor: ComplexTensor,
}

impl UnitaryMatrix {
    /// Wraps a square matrix after checking `max |U^dagger U - I| < 1e-12`.
    pub fn new(tensor: ComplexTensor) -> Result<Self> {
        let dim = tensor.square_dim()?;
        let u = Self { tensor };
        let dev = u.unitarity_error();
        if dev >= EXACT {
            return Err(invalid(format!(
                "matrix of dim {dim} is not unitary (max deviation {dev:e})"
            )));
        }
        Ok(u)
    }

    pub(crate) fn from_trusted(tensor: ComplexTensor) -> Self {
        debug_assert!(tensor.square_dim().is_ok());
        Self { tensor }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_trusted(ComplexTensor::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.tensor.shape()[0]
    }

    pub fn tensor(&self) -> &ComplexTensor {
        &self.tensor
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.tensor.data()[row * self.dim() + col]
    }

    /// `max_ij |(U^dagger U - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let gram = contract(&self.tensor.conj(), &[0], &self.tensor, &[0])
            .expect("square matrix contracts with itself");
        gram.max_abs_diff(&ComplexTensor::identity(self.dim()))
            .expect("shapes agree")
    }

    /// Complex conjugate, the operator applied on the mirrored side by the decoder.
    pub fn conj(&self) -> Self {
        Self::from_trusted(self.tensor.conj())
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::AxisMismatch {
                a_axis: 1,
                b_axis: 0,
                a_dim: self.dim(),
                b_dim: other.dim(),
            });
        }
        Ok(Self::from_trusted(contract(
            &self.tensor,
            &[1],
            &other.tensor,
            &[0],
        )?))
    }
}

pub fn sample_haar_unitary(sampler: &HaarSampler, dim: usize) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(invalid("Haar unitary of dimension 0"));
    }
    let cols = gaussian_columns(sampler, dim);
    Ok(UnitaryMatrix::from_trusted(orthonormalize_columns(dim, cols)))
}

/// The unitary factor of `U + epsilon G` for a standard complex Gaussian `G`:
/// a random unitary near `U` whose distance grows with `epsilon`.
pub fn sample_perturbed_unitary(
    u: &UnitaryMatrix,
    sampler: &HaarSampler,
    epsilon: f64,
) -> Result<UnitaryMatrix> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid(format!("perturbation strength {epsilon} must be finite and >= 0")));
    }
    let dim = u.dim();
    let mut cols = gaussian_columns(sampler, dim);
    for (k, z) in cols.iter_mut().enumerate() {
        let (j, i) = (k / dim, k % dim);
        *z = u.get(i, j) + *z * epsilon;
    }
    Ok(UnitaryMatrix::from_trusted(orthonormalize_columns(dim, cols)))
}

/// `dim × dim` standard complex Gaussians, drawn in row-major order and
/// returned column-major.
fn gaussian_columns(sampler: &HaarSampler, dim: usize) -> Vec<C64> {
    let mut rng = sampler.rng();
    let mut cols = vec![ZERO; dim * dim];
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cols[j * dim + i] = C64::new(re * scale, im * scale);
        }
    }
    cols
}

/// Returns `Q` from `Z = Q R`, normalized so that `diag(R)` is real positive.
///
/// `cols` holds `Z` in column-major order; the result is row-major.
pub(crate) fn orthonormalize_columns(dim: usize, mut cols: Vec<C64>) -> ComplexTensor {
    let mut diag = vec![ZERO; dim];
    // Householder vectors overwrite the lower part of each column.
    for k in 0..dim {
        let (head, tail) = cols.split_at_mut((k + 1) * dim);
        let v = &mut head[k * dim + k..];
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            v.fill(ZERO);
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        diag[k] = alpha;
        for j in 0..dim - k - 1 {
            let col = &mut tail[j * dim + k..(j + 1) * dim];
            reflect(v, col);
        }
    }

    // Accumulate Q = H_0 H_1 ... H_{d-1} applied to the identity, back to front.
    let mut q = vec![ZERO; dim * dim];
    for j in 0..dim {
        q[j * dim + j] = ONE;
    }
    for k in (0..dim).rev() {
        let v = &cols[k * dim + k..(k + 1) * dim];
        for j in k..dim {
            reflect(v, &mut q[j * dim + k..(j + 1) * dim]);
        }
    }

    let mut out = vec![ZERO; dim * dim];
    for j in 0..dim {
        let r = diag[j];
        let lambda = if r.norm() > 0.0 { r / r.norm() } else { ONE };
        for i in 0..dim {
            out[i * dim + j] = q[j * dim + i] * lambda;
        }
    }
    ComplexTensor::new(vec![dim, dim], out).expect("square buffer")
}

/// `x <- (I - 2 v v^dagger) x` for a unit (or zero) vector `v`.
#[inline]
fn reflect(v: &[C64], x: &mut [C64]) {
    let w: C64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let w2 = w * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * w2;
    }
}
