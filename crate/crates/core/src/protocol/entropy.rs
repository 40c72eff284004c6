//! Rényi-2 entropies of the post-scrambling state `|Psi_HP>`.
//!
//! `|Psi_HP> = (I_R ⊗ U ⊗ I_B') |EPR>_RA |EPR>_BB'` has amplitudes
//! `U[(c, d), (r, b')] / sqrt(d)`, so the state tensor is `U` itself with legs
//! `[C, D, R, B1', B2']`. Reduced density operators come from
//! [`ComplexTensor::reduced_density`] and [`partial_trace`]; entropies are in bits.

use serde::{Deserialize, Serialize};

use super::{legs, NoiseModel};
use crate::analytic::tilde_p;
use crate::error::{invalid, Error, Result};
use crate::haar::UnitaryMatrix;
use crate::partition::Partition;
use crate::tensor::{kron, partial_trace, ComplexTensor, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub s2_r: f64,
    /// `S2(B'D)`, or `S2(B1'D)` under erasure.
    pub s2_bd: f64,
    /// `S2(RB'D)`, or `S2(RB1'D)` under erasure.
    pub s2_rbd: f64,
    pub i2: f64,
    /// Set when the stored radiation was depolarized with `p~ = 1 - sqrt(1 - p)`.
    pub tilde: bool,
}

impl EntropyReport {
    pub(crate) fn from_purities(pur_r: f64, pur_bd: f64, pur_rbd: f64, tilde: bool) -> Self {
        let s2_r = -pur_r.log2();
        let s2_bd = -pur_bd.log2();
        let s2_rbd = -pur_rbd.log2();
        Self {
            s2_r,
            s2_bd,
            s2_rbd,
            i2: s2_r + s2_bd - s2_rbd,
            tilde,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntropyConfig {
    /// Largest reduced density operator, in qubits, that may be formed.
    pub max_qubits: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self { max_qubits: 12 }
    }
}

/// `Tr[rho^2]` of a Hermitian matrix.
pub fn purity(rho: &ComplexTensor) -> f64 {
    rho.norm_sqr()
}

pub fn entropy_report(
    u: &UnitaryMatrix,
    part: &Partition,
    model: &NoiseModel,
) -> Result<EntropyReport> {
    entropy_report_with(u, part, model, &EntropyConfig::default())
}

pub fn entropy_report_with(
    u: &UnitaryMatrix,
    part: &Partition,
    model: &NoiseModel,
    config: &EntropyConfig,
) -> Result<EntropyReport> {
    let part = match model {
        NoiseModel::Ideal | NoiseModel::StorageDepolarizing { .. } => {
            if part.n_b2() != 0 {
                return Err(invalid("entropy report expects a partition without erasure"));
            }
            *part
        }
        NoiseModel::Erasure { n_b2 } => part.erasing(*n_b2)?,
        NoiseModel::ImperfectBackward { .. } => {
            return Err(invalid(
                "entropy identities are defined for storage noise only",
            ))
        }
    };
    let widest = part.n_a() + part.n_b1() + part.n_d();
    if widest > config.max_qubits {
        return Err(Error::ResourceLimit {
            what: "reduced density operator",
            needed: widest,
            cap: config.max_qubits,
        });
    }

    const D: usize = 1;
    const R: usize = 2;
    const B1: usize = 3;
    let psi = legs(u, &part)?.scale(C64::new(1.0 / (part.d() as f64).sqrt(), 0.0));
    let pur_r = purity(&psi.reduced_density(&[R])?);

    match model {
        NoiseModel::StorageDepolarizing { p } => {
            let pt = tilde_p(*p)?;
            let db = part.d_b();
            // rho~_{R D B'} = (1 - p~) rho_{R D B'} + p~ rho_{RD} ⊗ I/d_B
            let rho_rdb = psi.reduced_density(&[R, D, B1])?;
            let rho_rd = psi.reduced_density(&[R, D])?;
            let mixed = kron(
                &rho_rd,
                &ComplexTensor::identity(db).scale(C64::new(1.0 / db as f64, 0.0)),
            )?;
            let noisy = rho_rdb
                .scale(C64::new(1.0 - pt, 0.0))
                .add(&mixed.scale(C64::new(pt, 0.0)))?;
            let noisy_db = partial_trace(&noisy, &[part.d_a(), part.d_d(), db], &[1, 2])?;
            Ok(EntropyReport::from_purities(
                pur_r,
                purity(&noisy_db),
                purity(&noisy),
                true,
            ))
        }
        _ => {
            // B2' (dimension 1 when nothing is erased) is traced out.
            let pur_bd = purity(&psi.reduced_density(&[D, B1])?);
            let pur_rbd = purity(&psi.reduced_density(&[R, D, B1])?);
            Ok(EntropyReport::from_purities(pur_r, pur_bd, pur_rbd, false))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{sample_haar_unitary, HaarSampler};
    use crate::protocol::{decoherence_quantities, erasure_quantities, ideal_quantities};
    use crate::tolerance::CROSS_METHOD;

    fn haar(seed: u64, part: &Partition) -> UnitaryMatrix {
        sample_haar_unitary(&HaarSampler::new(seed, 3), part.d()).unwrap()
    }

    #[test]
    fn ideal_entropies() {
        let part = Partition::new(5, 2, 3).unwrap();
        let u = haar(1, &part);
        let rep = entropy_report(&u, &part, &NoiseModel::Ideal).unwrap();
        assert!((rep.s2_r - part.n_a() as f64).abs() < 1e-12);
        assert!((rep.s2_rbd - part.n_c() as f64).abs() < 1e-10);
        let q = ideal_quantities(&u, &part).unwrap();
        assert!(((-rep.i2).exp2() - q.p_epr).abs() < CROSS_METHOD);
        assert!(!rep.tilde);
    }

    #[test]
    fn erasure_purity_identities() {
        let part = Partition::new(5, 1, 2).unwrap();
        let u = haar(2, &part);
        let erased = part.erasing(2).unwrap();
        let q = erasure_quantities(&u, &erased).unwrap();
        let rep = entropy_report(&u, &part, &NoiseModel::Erasure { n_b2: 2 }).unwrap();
        let (db1, db2, dc, dd) = (
            erased.d_b1() as f64,
            erased.d_b2() as f64,
            erased.d_c() as f64,
            erased.d_d() as f64,
        );
        assert!(((-rep.s2_rbd).exp2() - db2 / dc * q.error_factor).abs() < CROSS_METHOD);
        assert!(((-rep.s2_bd).exp2() - dd / db1 * q.p_epr).abs() < CROSS_METHOD);
        let da2 = (part.d_a() * part.d_a()) as f64;
        assert!((rep.i2.exp2() / da2 - q.f_epr).abs() < CROSS_METHOD);
    }

    #[test]
    fn decoherence_uses_tilde_channel() {
        let part = Partition::new(4, 1, 2).unwrap();
        let u = haar(3, &part);
        let p = 0.37;
        let q = decoherence_quantities(&u, &part, p).unwrap();
        let rep = entropy_report(&u, &part, &NoiseModel::StorageDepolarizing { p }).unwrap();
        assert!(rep.tilde);
        let (db, dc, dd) = (part.d_b() as f64, part.d_c() as f64, part.d_d() as f64);
        assert!(((-rep.s2_rbd).exp2() - q.error_factor / dc).abs() < CROSS_METHOD);
        assert!(((-rep.s2_bd).exp2() - dd / db * q.p_epr).abs() < CROSS_METHOD);
    }

    #[test]
    fn resource_guard_and_unsupported_model() {
        let part = Partition::new(8, 2, 6).unwrap();
        let u = UnitaryMatrix::identity(part.d());
        assert!(matches!(
            entropy_report(&u, &part, &NoiseModel::Ideal),
            Err(Error::ResourceLimit { .. })
        ));
        let small = Partition::new(2, 1, 1).unwrap();
        let model = NoiseModel::ImperfectBackward {
            p: 0.0,
            u_tilde: UnitaryMatrix::identity(4),
        };
        assert!(entropy_report(&UnitaryMatrix::identity(4), &small, &model).is_err());
    }
}
