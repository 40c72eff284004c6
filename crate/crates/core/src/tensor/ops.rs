use super::gemm::matmul;
use super::{check_subset, ComplexTensor, ONE, ZERO};
use crate::error::{invalid, Error, Result};

/// Sums over the paired axes `a_axes[k] <-> b_axes[k]`.
///
/// The result carries the free axes of `a` (in their original order) followed
/// by the free axes of `b`. Internally both operands are permuted so the
/// paired axes are contiguous, viewed as matrices and multiplied once.
pub fn contract(
    a: &ComplexTensor,
    a_axes: &[usize],
    b: &ComplexTensor,
    b_axes: &[usize],
) -> Result<ComplexTensor> {
    if a_axes.len() != b_axes.len() {
        return Err(invalid(format!(
            "contracting {} axes of a with {} axes of b",
            a_axes.len(),
            b_axes.len()
        )));
    }
    check_subset(a_axes, a.rank())?;
    check_subset(b_axes, b.rank())?;
    for (&i, &j) in a_axes.iter().zip(b_axes) {
        if a.shape()[i] != b.shape()[j] {
            return Err(Error::AxisMismatch {
                a_axis: i,
                b_axis: j,
                a_dim: a.shape()[i],
                b_dim: b.shape()[j],
            });
        }
    }

    let a_free: Vec<usize> = (0..a.rank()).filter(|x| !a_axes.contains(x)).collect();
    let b_free: Vec<usize> = (0..b.rank()).filter(|x| !b_axes.contains(x)).collect();
    let m: usize = a_free.iter().map(|&x| a.shape()[x]).product();
    let k: usize = a_axes.iter().map(|&x| a.shape()[x]).product();
    let n: usize = b_free.iter().map(|&x| b.shape()[x]).product();

    let a_perm: Vec<usize> = a_free.iter().chain(a_axes).copied().collect();
    let b_perm: Vec<usize> = b_axes.iter().chain(&b_free).copied().collect();
    let a_mat = a.permute(&a_perm)?;
    let b_mat = b.permute(&b_perm)?;

    let data = matmul(a_mat.data(), b_mat.data(), m, k, n);
    let shape: Vec<usize> = a_free
        .iter()
        .map(|&x| a.shape()[x])
        .chain(b_free.iter().map(|&x| b.shape()[x]))
        .collect();
    ComplexTensor::new(shape, data)
}

/// Kronecker product of two matrices; `a` indexes the slower factor.
pub fn kron(a: &ComplexTensor, b: &ComplexTensor) -> Result<ComplexTensor> {
    let (&[ar, ac], &[br, bc]) = (a.shape(), b.shape()) else {
        return Err(Error::Shape(format!(
            "kron needs two matrices, found {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    };
    let mut data = Vec::with_capacity(a.len() * b.len());
    for i in 0..ar {
        for k in 0..br {
            for j in 0..ac {
                let x = a.data()[i * ac + j];
                data.extend(b.data()[k * bc..(k + 1) * bc].iter().map(|y| x * y));
            }
        }
    }
    ComplexTensor::new(vec![ar * br, ac * bc], data)
}

/// Partial trace of a density operator on a multipartite space.
///
/// `rho` is a square matrix over `prod(dims)`, with subsystems linearized in
/// the order of `dims`. Subsystems listed in `keep` survive, in that order;
/// all others are traced out. Keeping nothing yields the `1 × 1` matrix `Tr rho`.
pub fn partial_trace(rho: &ComplexTensor, dims: &[usize], keep: &[usize]) -> Result<ComplexTensor> {
    let total: usize = dims.iter().product();
    if rho.shape() != [total, total] {
        return Err(Error::Shape(format!(
            "rho has shape {:?}, subsystems {dims:?} need {total} x {total}",
            rho.shape()
        )));
    }
    check_subset(keep, dims.len())?;
    let n = dims.len();
    let traced: Vec<usize> = (0..n).filter(|x| !keep.contains(x)).collect();
    let kd: usize = keep.iter().map(|&x| dims[x]).product();
    let td: usize = traced.iter().map(|&x| dims[x]).product();

    let full_shape: Vec<usize> = dims.iter().chain(dims).copied().collect();
    let perm: Vec<usize> = keep
        .iter()
        .chain(&traced)
        .copied()
        .chain(keep.iter().chain(&traced).map(|&x| x + n))
        .collect();
    let x = rho.reshape(full_shape)?.permute(&perm)?;
    let xd = x.data();

    let mut out = vec![ZERO; kd * kd];
    for i in 0..kd {
        for j in 0..kd {
            out[i * kd + j] = (0..td)
                .map(|t| xd[((i * td + t) * kd + j) * td + t])
                .sum();
        }
    }
    ComplexTensor::new(vec![kd, kd], out)
}

/// `(1/sqrt(dim)) sum_i |i>|i>` as a `dim × dim` tensor.
pub fn epr_state(dim: usize) -> Result<ComplexTensor> {
    if dim == 0 {
        return Err(invalid("EPR state of dimension 0"));
    }
    let amp = ONE / (dim as f64).sqrt();
    let mut t = ComplexTensor::zeros(vec![dim, dim]);
    for i in 0..dim {
        t.data[i * dim + i] = amp;
    }
    Ok(t)
}

/// `|EPR><EPR|` as a `dim^2 × dim^2` matrix.
pub fn epr_projector(dim: usize) -> Result<ComplexTensor> {
    let v = epr_state(dim)?.into_reshape(vec![dim * dim, 1])?;
    contract(&v, &[1], &v.conj(), &[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;
    use crate::haar::{sample_haar_unitary, HaarSampler};
    use crate::tolerance::EXACT;
    use proptest::prelude::*;

    fn arbitrary(shape: Vec<usize>, seed: u64) -> ComplexTensor {
        let mut s = seed;
        ComplexTensor::from_fn(shape, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            C64::new(re, im)
        })
    }

    #[test]
    fn identity_acts_trivially_on_vector() {
        let v = arbitrary(vec![5], 3);
        let out = contract(&ComplexTensor::identity(5), &[1], &v, &[0]).unwrap();
        assert!(out.max_abs_diff(&v).unwrap() < EXACT);
    }

    #[test]
    fn unitary_times_dagger_is_identity() {
        let u = sample_haar_unitary(&HaarSampler::new(7, 0), 16).unwrap();
        let prod = contract(u.tensor(), &[1], &u.tensor().conj(), &[1]).unwrap();
        assert!(prod.max_abs_diff(&ComplexTensor::identity(16)).unwrap() < EXACT);
    }

    #[test]
    fn epr_full_self_contraction_is_one() {
        for d in [1, 2, 4, 32] {
            let e = epr_state(d).unwrap();
            let s = contract(&e.conj(), &[0, 1], &e, &[0, 1]).unwrap().to_scalar().unwrap();
            assert!((s - ONE).norm() < EXACT);
        }
    }

    #[test]
    fn epr_amplitudes() {
        assert_eq!(epr_state(1).unwrap().data(), &[ONE]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e2 = epr_state(2).unwrap();
        let want = [h, 0.0, 0.0, h];
        for (z, w) in e2.data().iter().zip(want) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-15);
        }
        let e4 = epr_state(4).unwrap();
        assert!((e4.inner(&e4).unwrap() - ONE).norm() < EXACT);
        assert!(matches!(epr_state(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn axis_mismatch_names_the_pair() {
        let a = arbitrary(vec![2, 3], 1);
        let b = arbitrary(vec![4, 2], 2);
        match contract(&a, &[1], &b, &[0]) {
            Err(Error::AxisMismatch { a_axis, b_axis, a_dim, b_dim }) => {
                assert_eq!((a_axis, b_axis, a_dim, b_dim), (1, 0, 3, 4));
            }
            other => panic!("expected axis mismatch, got {other:?}"),
        }
    }

    #[test]
    fn contract_against_explicit_sum() {
        let a = arbitrary(vec![2, 3, 4], 11);
        let b = arbitrary(vec![4, 5, 2], 12);
        let c = contract(&a, &[2, 0], &b, &[0, 2]).unwrap();
        assert_eq!(c.shape(), &[3, 5]);
        for j in 0..3 {
            for l in 0..5 {
                let mut want = ZERO;
                for i in 0..2 {
                    for k in 0..4 {
                        want += a.get(&[i, j, k]) * b.get(&[k, l, i]);
                    }
                }
                assert!((c.get(&[j, l]) - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn kron_block_structure() {
        let a = arbitrary(vec![2, 3], 5);
        let b = arbitrary(vec![4, 2], 6);
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.shape(), &[8, 6]);
        assert_eq!(k.get(&[1 * 4 + 3, 2 * 2 + 1]), a.get(&[1, 2]) * b.get(&[3, 1]));
    }

    #[test]
    fn partial_trace_of_epr_is_maximally_mixed() {
        for d in [2, 4, 8] {
            let p = epr_projector(d).unwrap();
            let r = partial_trace(&p, &[d, d], &[0]).unwrap();
            let want = ComplexTensor::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
            assert!(r.max_abs_diff(&want).unwrap() < EXACT);
        }
    }

    #[test]
    fn partial_trace_edge_cases() {
        let rho = {
            let v = arbitrary(vec![24, 1], 9);
            contract(&v, &[1], &v.conj(), &[1]).unwrap()
        };
        let dims = [2, 3, 4];
        let all = partial_trace(&rho, &dims, &[0, 1, 2]).unwrap();
        assert!(all.max_abs_diff(&rho).unwrap() < 1e-15);
        let none = partial_trace(&rho, &dims, &[]).unwrap();
        assert!((none.to_scalar().unwrap() - rho.trace().unwrap()).norm() < EXACT);
        assert!(matches!(
            partial_trace(&rho, &dims, &[3]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn partial_trace_matches_reduced_density() {
        let psi = arbitrary(vec![2, 3, 4], 21);
        let v = psi.reshape(vec![24, 1]).unwrap();
        let rho = contract(&v, &[1], &v.conj(), &[1]).unwrap();
        let a = partial_trace(&rho, &[2, 3, 4], &[2, 0]).unwrap();
        let b = psi.reduced_density(&[2, 0]).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-14);
    }

    proptest! {
        #[test]
        fn contract_is_bilinear(seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let a1 = arbitrary(vec![3, 4], seed);
            let a2 = arbitrary(vec![3, 4], seed ^ 0xabc);
            let b = arbitrary(vec![4, 2], seed ^ 0x123);
            let (x, y) = (C64::new(alpha, 0.3), C64::new(beta, -1.1));
            let lhs = contract(&a1.scale(x).add(&a2.scale(y)).unwrap(), &[1], &b, &[0]).unwrap();
            let rhs = contract(&a1, &[1], &b, &[0]).unwrap().scale(x)
                .add(&contract(&a2, &[1], &b, &[0]).unwrap().scale(y)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }

        #[test]
        fn contraction_order_is_associative(seed in any::<u64>()) {
            let a = arbitrary(vec![2, 3, 4], seed);
            let b = arbitrary(vec![4, 5], seed.wrapping_add(1));
            let c = arbitrary(vec![5, 3, 2], seed.wrapping_add(2));
            // (a b) c versus a (b c), closing every bond
            let ab = contract(&a, &[2], &b, &[0]).unwrap(); // [2,3,5]
            let left = contract(&ab, &[0, 1, 2], &c, &[2, 1, 0]).unwrap();
            let bc = contract(&b, &[1], &c, &[0]).unwrap(); // [4,3,2]
            let right = contract(&a, &[0, 1, 2], &bc, &[2, 1, 0]).unwrap();
            prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        }

        #[test]
        fn partial_traces_compose(seed in any::<u64>()) {
            let v = arbitrary(vec![24, 1], seed);
            let rho = contract(&v, &[1], &v.conj(), &[1]).unwrap();
            let dims = [2, 3, 4];
            let direct = partial_trace(&rho, &dims, &[0]).unwrap();
            let step = partial_trace(&rho, &dims, &[0, 1]).unwrap();
            let stepped = partial_trace(&step, &[2, 3], &[0]).unwrap();
            prop_assert!(direct.max_abs_diff(&stepped).unwrap() < 1e-12);
            prop_assert!((direct.trace().unwrap() - rho.trace().unwrap()).norm() < 1e-12);
            let h = direct.dagger().unwrap();
            prop_assert!(direct.max_abs_diff(&h).unwrap() < 1e-12);
        }
    }
}
