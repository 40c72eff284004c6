//! Dense complex tensors.
//!
//! A [`ComplexTensor`] is a flat buffer of `Complex64` values plus a shape.
//! Linearization is row-major (big-endian): the first axis varies slowest, so
//! the element at multi-index `(i_0, ..., i_{r-1})` lives at
//! `sum_k i_k * stride_k` with `stride_{r-1} = 1`. Every diagram-to-index map
//! in the crate relies on this order.
//!
//! Pairwise contraction ([`contract`]) is lowered to permute, reshape and a
//! single matrix multiply, so contracting two `d × d`-sized operands costs
//! `O(d^3)` rather than a loop over every index.

mod gemm;
mod ops;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use ops::{contract, epr_projector, epr_state, kron, partial_trace};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(invalid(format!("zero-sized axis in shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} needs {len} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![ZERO; len],
        }
    }

    pub fn scalar(value: C64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(vec![dim, dim]);
        for i in 0..dim {
            t.data[i * dim + i] = ONE;
        }
        t
    }

    /// Builds a tensor by evaluating `f` at every multi-index in storage order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, &shape);
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "index rank mismatch");
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| {
            assert!(i < s, "index {i} out of bounds for axis of size {s}");
            acc * s + i
        })
    }

    /// The value of a rank-0 (or single-element) tensor.
    pub fn to_scalar(&self) -> Result<C64> {
        if self.data.len() != 1 {
            return Err(Error::Shape(format!(
                "expected a scalar, found shape {:?}",
                self.shape
            )));
        }
        Ok(self.data[0])
    }

    /// Reinterprets the buffer under a new shape; the data order is untouched.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        self.clone().into_reshape(shape)
    }

    pub fn into_reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Reorders axes: axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let rank = self.rank();
        if perm.len() != rank {
            return Err(invalid(format!(
                "permutation {perm:?} has wrong length for rank {rank}"
            )));
        }
        let mut seen = vec![false; rank];
        for &p in perm {
            if p >= rank || seen[p] {
                return Err(invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }

        let strides = strides(&self.shape);
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| strides[p]).collect();

        // Innermost output axis is walked in a tight loop; the rest by odometer.
        let inner_dim = *new_shape.last().unwrap();
        let inner_stride = *src_strides.last().unwrap();
        let outer_shape = &new_shape[..rank - 1];
        let outer_strides = &src_strides[..rank - 1];
        let outer_len: usize = outer_shape.iter().product();

        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; rank - 1];
        let mut base = 0usize;
        for _ in 0..outer_len {
            data.extend((0..inner_dim).map(|i| self.data[base + i * inner_stride]));
            // odometer step with incremental base offset
            for k in (0..rank - 1).rev() {
                idx[k] += 1;
                base += outer_strides[k];
                if idx[k] < outer_shape[k] {
                    break;
                }
                base -= outer_strides[k] * outer_shape[k];
                idx[k] = 0;
            }
        }
        Ok(Self {
            shape: new_shape,
            data,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose of a rank-2 tensor.
    pub fn dagger(&self) -> Result<Self> {
        if self.rank() != 2 {
            return Err(Error::Shape(format!(
                "dagger needs a matrix, found shape {:?}",
                self.shape
            )));
        }
        Ok(self.permute(&[1, 0])?.conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "shapes {:?} and {:?} differ",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!(
                "inner product of {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Squared 2-norm (Frobenius norm for matrices).
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of the diagonal of a square matrix.
    pub fn trace(&self) -> Result<C64> {
        let n = self.square_dim()?;
        Ok((0..n).map(|i| self.data[i * n + i]).sum())
    }

    pub(crate) fn square_dim(&self) -> Result<usize> {
        match self.shape[..] {
            [r, c] if r == c => Ok(r),
            _ => Err(Error::Shape(format!(
                "expected a square matrix, found shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Reduced density operator of a pure state.
    ///
    /// `self` is a state vector whose axes are the subsystems; the result is
    /// the `K × K` matrix `Tr_rest |psi><psi|` over the axes in `keep`
    /// (in the order listed), computed as `M M^dagger` with `M` the state
    /// reshaped to `keep × rest`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<Self> {
        let rank = self.rank();
        check_subset(keep, rank)?;
        let rest: Vec<usize> = (0..rank).filter(|a| !keep.contains(a)).collect();
        let perm: Vec<usize> = keep.iter().chain(&rest).copied().collect();
        let kdim: usize = keep.iter().map(|&a| self.shape[a]).product();
        let rdim: usize = rest.iter().map(|&a| self.shape[a]).product();
        let m = self.permute(&perm)?.into_reshape(vec![kdim, rdim])?;
        contract(&m, &[1], &m.conj(), &[1])
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return;
        }
        idx[k] = 0;
    }
}

pub(crate) fn check_subset(axes: &[usize], rank: usize) -> Result<()> {
    let mut seen = vec![false; rank];
    for &a in axes {
        if a >= rank {
            return Err(invalid(format!(
                "subsystem {a} does not exist (only {rank} subsystems)"
            )));
        }
        if seen[a] {
            return Err(invalid(format!("subsystem {a} listed twice")));
        }
        seen[a] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(shape: Vec<usize>) -> ComplexTensor {
        let mut k = 0.0;
        ComplexTensor::from_fn(shape, |_| {
            k += 1.0;
            C64::new(k, -0.5 * k)
        })
    }

    #[test]
    fn linearization_is_big_endian() {
        let t = ramp(vec![2, 3, 4]);
        assert_eq!(t.get(&[0, 0, 1]), t.data()[1]);
        assert_eq!(t.get(&[0, 1, 0]), t.data()[4]);
        assert_eq!(t.get(&[1, 0, 0]), t.data()[12]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ComplexTensor::new(vec![2, 2], vec![ZERO; 3]).is_err());
        assert!(ComplexTensor::new(vec![2, 0], vec![]).is_err());
        assert!(ramp(vec![2, 3]).reshape(vec![5]).is_err());
        assert!(ramp(vec![2, 3]).permute(&[0, 0]).is_err());
    }

    #[test]
    fn permute_moves_elements() {
        let t = ramp(vec![2, 3, 4]);
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(p.get(&[k, i, j]), t.get(&[i, j, k]));
                }
            }
        }
    }

    #[test]
    fn reduced_density_of_product_state() {
        let a = ComplexTensor::new(vec![2], vec![ONE, ZERO]).unwrap();
        let b = ComplexTensor::new(vec![2], vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let psi = kron(&a.reshape(vec![2, 1]).unwrap(), &b.reshape(vec![2, 1]).unwrap())
            .unwrap()
            .into_reshape(vec![2, 2])
            .unwrap();
        let rho_b = psi.reduced_density(&[1]).unwrap();
        assert!((rho_b.get(&[0, 0]).re - 0.36).abs() < 1e-15);
        assert!((rho_b.get(&[0, 1]) - C64::new(0.0, -0.48)).norm() < 1e-15);
        assert!(psi.reduced_density(&[2]).is_err());
    }

    proptest! {
        #[test]
        fn permute_preserves_values(
            dims in prop::collection::vec(1usize..4, 1..5),
            seed in any::<u64>(),
        ) {
            let t = ramp(dims.clone());
            let mut perm: Vec<usize> = (0..dims.len()).collect();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let p = t.permute(&perm).unwrap();
            let mut a: Vec<_> = t.data().iter().map(|z| (z.re as i64, z.im.to_bits())).collect();
            let mut b: Vec<_> = p.data().iter().map(|z| (z.re as i64, z.im.to_bits())).collect();
            a.sort();
            b.sort();
            prop_assert_eq!(a, b);

            let mut inv = vec![0; perm.len()];
            for (k, &q) in perm.iter().enumerate() {
                inv[q] = k;
            }
            prop_assert_eq!(p.permute(&inv).unwrap(), t);
        }
    }
}
