//! Exact decoding quantities for a concrete scrambling unitary.
//!
//! For each storage-noise model the decoder attaches a mirrored EPR pair
//! `R'A'`, applies `U*` (or the imperfect `U~*`), projects `DD'` onto an EPR
//! pair with probability `P_EPR` and then measures the overlap `F_EPR` of the
//! post-selected state with the EPR pair on `RR'`. The error factor is
//! `d_A^2 F_EPR P_EPR`; it equals one in the noiseless protocol.
//!
//! All values come from the four-copy diagrams in [`diagram`], never from the
//! full density operator of the doubled system.

mod diagram;
mod entropy;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::haar::UnitaryMatrix;
use crate::partition::Partition;
use crate::tensor::{contract, C64};

pub use entropy::{entropy_report, entropy_report_with, purity, EntropyConfig, EntropyReport};

pub(crate) use diagram::legs;

/// Noise acting on the stored early radiation (or on the backward evolution).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    Ideal,
    /// The last `n_b2` qubits of `B'` are lost and refilled with the maximally
    /// mixed state before decoding.
    Erasure { n_b2: usize },
    /// Depolarizing channel with probability `p` on all of `B'`.
    StorageDepolarizing { p: f64 },
    /// The decoder applies `u_tilde*` instead of `U*`, depolarized with probability `p`.
    ImperfectBackward { p: f64, u_tilde: UnitaryMatrix },
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Ideal => "ideal",
            NoiseModel::Erasure { .. } => "erasure",
            NoiseModel::StorageDepolarizing { .. } => "decoherence",
            NoiseModel::ImperfectBackward { .. } => "imperfect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingQuantities {
    pub p_epr: f64,
    pub f_epr: f64,
    /// `delta` for storage noise, `Delta` for imperfect backward evolution.
    pub error_factor: f64,
    pub eta: Option<f64>,
}

impl DecodingQuantities {
    fn from_parts(p_epr: f64, error_factor: f64, d_a: usize, eta: Option<f64>) -> Self {
        Self {
            p_epr,
            f_epr: error_factor / ((d_a * d_a) as f64 * p_epr),
            error_factor,
            eta,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn require_no_erasure(part: &Partition) -> Result<()> {
    if part.n_b2() != 0 {
        return Err(invalid(format!(
            "partition erases {} qubits; this model acts on the whole of B'",
            part.n_b2()
        )));
    }
    Ok(())
}

pub fn ideal_quantities(u: &UnitaryMatrix, part: &Partition) -> Result<DecodingQuantities> {
    require_no_erasure(part)?;
    let legs = legs(u, part)?;
    let p = diagram::p_epr_erased(&legs, part)?;
    Ok(DecodingQuantities::from_parts(p, 1.0, part.d_a(), None))
}

/// Erasure of the last `part.n_b2()` qubits of the stored radiation.
pub fn erasure_quantities(u: &UnitaryMatrix, part: &Partition) -> Result<DecodingQuantities> {
    if part.n_b2() == 0 {
        return ideal_quantities(u, part);
    }
    let legs = legs(u, part)?;
    let p = diagram::p_epr_erased(&legs, part)?;
    let delta = diagram::delta_erased(&legs, part)?;
    Ok(DecodingQuantities::from_parts(p, delta, part.d_a(), None))
}

/// Depolarizing noise of strength `p` on the stored radiation.
///
/// Both probabilities are the `(1 - p, p)` mixture of the noiseless diagram
/// and the diagram where `B'` is replaced by the maximally mixed state.
pub fn decoherence_quantities(
    u: &UnitaryMatrix,
    part: &Partition,
    p: f64,
) -> Result<DecodingQuantities> {
    check_probability(p)?;
    require_no_erasure(part)?;
    let legs = legs(u, part)?;
    let p_clean = diagram::p_epr_erased(&legs, part)?;
    if p == 0.0 {
        return Ok(DecodingQuantities::from_parts(p_clean, 1.0, part.d_a(), None));
    }
    let (p_mixed, delta_mixed) = diagram::depolarized_branch(&legs, part)?;
    let p_epr = (1.0 - p) * p_clean + p * p_mixed;
    let delta = (1.0 - p) + p * delta_mixed;
    Ok(DecodingQuantities::from_parts(p_epr, delta, part.d_a(), None))
}

/// `eta = Tr[(I ⊗ Pi_DD') M ((I/d_C) ⊗ Pi_DD') M^dagger]` with `M = U U~^dagger`,
/// which reduces to `||Tr_D M||_F^2 / (d_C d_D^2)`.
pub fn eta(u: &UnitaryMatrix, u_tilde: &UnitaryMatrix, part: &Partition) -> Result<f64> {
    check_same_dim(u, u_tilde)?;
    if u.dim() != part.d() {
        return Err(invalid(format!(
            "unitary of dim {} does not act on N = {} qubits",
            u.dim(),
            part.n_total()
        )));
    }
    let (dc, dd) = (part.d_c(), part.d_d());
    let m = contract(u.tensor(), &[1], &u_tilde.tensor().conj(), &[1])?
        .into_reshape(vec![dc, dd, dc, dd])?;
    let md = m.data();
    let mut norm = 0.0;
    for c in 0..dc {
        for c2 in 0..dc {
            let s: C64 = (0..dd).map(|x| md[((c * dd + x) * dc + c2) * dd + x]).sum();
            norm += s.norm_sqr();
        }
    }
    Ok(norm / (dc * dd * dd) as f64)
}

fn check_same_dim(u: &UnitaryMatrix, u_tilde: &UnitaryMatrix) -> Result<()> {
    if u.dim() != u_tilde.dim() {
        return Err(invalid(format!(
            "U has dim {} but U~ has dim {}",
            u.dim(),
            u_tilde.dim()
        )));
    }
    Ok(())
}

/// Backward evolution by `u_tilde*` followed by depolarizing noise `p` on `A'B'`.
///
/// `Delta = (1 - p) eta + p / d_D^2`; the fully depolarized branch projects
/// onto `EPR_DD'` with probability exactly `1 / d_D^2`.
pub fn imperfect_quantities(
    u: &UnitaryMatrix,
    u_tilde: &UnitaryMatrix,
    part: &Partition,
    p: f64,
) -> Result<DecodingQuantities> {
    check_probability(p)?;
    check_same_dim(u, u_tilde)?;
    require_no_erasure(part)?;
    let eta = eta(u, u_tilde, part)?;
    let legs_u = legs(u, part)?;
    let legs_t = legs(u_tilde, part)?;
    let p_coherent = diagram::p_epr_mismatched(&legs_u, &legs_t, part)?;
    let inv_dd2 = 1.0 / (part.d_d() * part.d_d()) as f64;
    let p_epr = (1.0 - p) * p_coherent + p * inv_dd2;
    let delta = (1.0 - p) * eta + p * inv_dd2;
    Ok(DecodingQuantities::from_parts(p_epr, delta, part.d_a(), Some(eta)))
}

/// Dispatches on the noise model. `part` must not carry an erasure count;
/// [`NoiseModel::Erasure`] supplies its own.
pub fn quantities(
    u: &UnitaryMatrix,
    part: &Partition,
    model: &NoiseModel,
) -> Result<DecodingQuantities> {
    match model {
        NoiseModel::Ideal => ideal_quantities(u, part),
        NoiseModel::Erasure { n_b2 } => erasure_quantities(u, &part.erasing(*n_b2)?),
        NoiseModel::StorageDepolarizing { p } => decoherence_quantities(u, part, *p),
        NoiseModel::ImperfectBackward { p, u_tilde } => imperfect_quantities(u, u_tilde, part, *p),
    }
}
