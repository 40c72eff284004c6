//! Four-copy diagrams of the decoding protocol.
//!
//! Every projection probability and error factor of the protocol is a sum of
//! the form `sum |(W1 W2^dagger)_{xy}|^2 = ||W1 W2^dagger||_F^2`, where `W1` and
//! `W2` are the same unitary (or `U` and `U~`) with its five legs
//! `(C, D, A, B1, B2)` regrouped into a row group and a column group. The row
//! group holds the legs that stay open between a ket copy and its bra partner;
//! the column group holds the legs summed inside each copy pair.
//!
//! Contraction schedule: with `W` of size `r × k`, the norm is evaluated as
//! `||W1 W2^dagger||^2` (an `r × r` intermediate) when `r <= k`, and as
//! `Tr[(W1^dagger W1)(W2^dagger W2)]` (two `k × k` intermediates) otherwise.
//! Since `r k = d^2`, no intermediate exceeds `d × d` and the cost is at most
//! `O(d^3)`.

use crate::error::{invalid, Result};
use crate::haar::UnitaryMatrix;
use crate::partition::Partition;
use crate::tensor::{contract, ComplexTensor};

/// A leg of the scrambling unitary viewed as `U[(c, d), (a, b1, b2)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Leg {
    C = 0,
    D = 1,
    A = 2,
    B1 = 3,
    B2 = 4,
}

/// `U` reshaped to the rank-5 tensor `[C, D, A, B1, B2]`.
pub(crate) fn legs(u: &UnitaryMatrix, part: &Partition) -> Result<ComplexTensor> {
    if u.dim() != part.d() {
        return Err(invalid(format!(
            "unitary of dim {} does not act on N = {} qubits",
            u.dim(),
            part.n_total()
        )));
    }
    u.tensor().reshape(vec![
        part.d_c(),
        part.d_d(),
        part.d_a(),
        part.d_b1(),
        part.d_b2(),
    ])
}

fn as_matrix(legs: &ComplexTensor, rows: &[Leg], cols: &[Leg]) -> Result<ComplexTensor> {
    let perm: Vec<usize> = rows.iter().chain(cols).map(|&l| l as usize).collect();
    let r: usize = rows.iter().map(|&l| legs.shape()[l as usize]).product();
    let k: usize = cols.iter().map(|&l| legs.shape()[l as usize]).product();
    legs.permute(&perm)?.into_reshape(vec![r, k])
}

/// `||W1 W2^dagger||_F^2` for the grouping `rows | cols` of two leg tensors.
pub(crate) fn overlap_norm(
    first: &ComplexTensor,
    second: &ComplexTensor,
    rows: &[Leg],
    cols: &[Leg],
) -> Result<f64> {
    debug_assert_eq!(rows.len() + cols.len(), 5);
    let w1 = as_matrix(first, rows, cols)?;
    let same = std::ptr::eq(first, second);
    let w2 = if same {
        w1.clone()
    } else {
        as_matrix(second, rows, cols)?
    };
    let (r, k) = (w1.shape()[0], w1.shape()[1]);
    if r <= k {
        let x = contract(&w1, &[1], &w2.conj(), &[1])?;
        Ok(x.norm_sqr())
    } else {
        let g1 = contract(&w1.conj(), &[0], &w1, &[0])?;
        if same {
            return Ok(g1.norm_sqr());
        }
        let g2 = contract(&w2.conj(), &[0], &w2, &[0])?;
        Ok(contract(&g1, &[0, 1], &g2, &[1, 0])?.to_scalar()?.re)
    }
}

use Leg::*;

/// `P_EPR` with `B2` erased (ideal when `d_B2 = 1`):
/// `U_{a1(b1 b2)c1 d1} U*_{a2(b1 b2')c2 d1} U_{a2(b1' b2')c2 d2} U*_{a1(b1' b2)c1 d2}`
/// normalized by `d_A^2 d_B1 d_B2^2 d_D`.
pub(crate) const P_EPR_ROWS: [Leg; 3] = [C, A, B2];
pub(crate) const P_EPR_COLS: [Leg; 2] = [D, B1];

/// Error factor with `B2` erased:
/// `U_{a1(b1 b2)c1 d1} U*_{a1(b1 b2')c2 d1} U_{a2(b1' b2')c2 d2} U*_{a2(b1' b2)c1 d2}`
/// normalized by `d_A d_B1 d_B2^2 d_D`.
pub(crate) const DELTA_ROWS: [Leg; 2] = [C, B2];
pub(crate) const DELTA_COLS: [Leg; 3] = [D, A, B1];

pub(crate) fn p_epr_erased(legs: &ComplexTensor, part: &Partition) -> Result<f64> {
    let norm = (part.d_a().pow(2) * part.d_b1() * part.d_b2().pow(2) * part.d_d()) as f64;
    Ok(overlap_norm(legs, legs, &P_EPR_ROWS, &P_EPR_COLS)? / norm)
}

pub(crate) fn delta_erased(legs: &ComplexTensor, part: &Partition) -> Result<f64> {
    let norm = (part.d_a() * part.d_b1() * part.d_b2().pow(2) * part.d_d()) as f64;
    Ok(overlap_norm(legs, legs, &DELTA_ROWS, &DELTA_COLS)? / norm)
}

/// Depolarized branch of the storage-noise diagrams: the early radiation is
/// replaced by the maximally mixed state, so all of `B` sits in the row group.
/// `legs` must come from a partition with `n_b2 = 0` (so `B1 = B`).
///
/// Returns `(P_EPR, delta)` of that branch:
/// `P = ||.||^2 / (d_A^2 d_B^2 d_D)` over `[C, A, B | D]`, and
/// `delta = U_{a1 b1 c1 d1} U*_{a1 b2 c2 d1} U_{a2 b2 c2 d2} U*_{a2 b1 c1 d2} / (d_A d_B^2 d_D)`
/// over `[C, B | D, A]`.
pub(crate) fn depolarized_branch(legs: &ComplexTensor, part: &Partition) -> Result<(f64, f64)> {
    debug_assert_eq!(part.n_b2(), 0);
    let (da, db, dd) = (part.d_a(), part.d_b(), part.d_d());
    let p = overlap_norm(legs, legs, &[C, A, B1], &[D, B2])? / (da * da * db * db * dd) as f64;
    let delta = overlap_norm(legs, legs, &[C, B1], &[D, A, B2])? / (da * db * db * dd) as f64;
    Ok((p, delta))
}

/// `P_EPR` of the coherent branch when the decoder applies `U~*` instead of `U*`:
/// `sum |sum_{b,d} U_{(c d),(r b)} conj(U~_{(c' d),(r' b)})|^2 / (d_A^2 d_B d_D)`.
pub(crate) fn p_epr_mismatched(
    legs: &ComplexTensor,
    legs_tilde: &ComplexTensor,
    part: &Partition,
) -> Result<f64> {
    let norm = (part.d_a().pow(2) * part.d_b() * part.d_d()) as f64;
    Ok(overlap_norm(legs, legs_tilde, &P_EPR_ROWS, &P_EPR_COLS)? / norm)
}
