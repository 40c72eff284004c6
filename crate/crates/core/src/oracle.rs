//! Brute-force reference for the decoding quantities.
//!
//! Everything is done on explicit state vectors over named wires: EPR pairs are
//! prepared, `U` and the decoder unitary are applied, and the projections onto
//! `EPR_DD'` and `EPR_RR'` are carried out one after the other. Noise enters
//! through purification only. A maximally mixed input is half of a fresh EPR
//! pair whose partner is never touched again, and a traced-out wire is simply
//! left alone. The depolarizing channel used for the entropies is a Stinespring
//! isometry built from the Weyl operators.
//!
//! The memory cost is the full state vector, so a qubit cap guards every entry
//! point.

use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::haar::UnitaryMatrix;
use crate::partition::Partition;
use crate::protocol::{DecodingQuantities, EntropyReport, NoiseModel};
use crate::tensor::{contract, epr_state, ComplexTensor, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest state vector, in qubits, the oracle may allocate.
    pub max_qubits: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { max_qubits: 24 }
    }
}

impl OracleConfig {
    fn guard(&self, what: &'static str, qubits: usize) -> Result<()> {
        if qubits > self.max_qubits {
            return Err(Error::ResourceLimit {
                what,
                needed: qubits,
                cap: self.max_qubits,
            });
        }
        Ok(())
    }
}

/// A state vector whose axes are named wires.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedState {
    tensor: ComplexTensor,
    wires: Vec<String>,
}

impl PurifiedState {
    /// `|EPR>` on the wires `a`, `b`.
    pub fn epr(a: &str, b: &str, dim: usize) -> Result<Self> {
        if a == b {
            return Err(invalid(format!("EPR pair needs two wires, got {a} twice")));
        }
        Ok(Self {
            tensor: epr_state(dim)?,
            wires: vec![a.to_string(), b.to_string()],
        })
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn tensor(&self) -> &ComplexTensor {
        &self.tensor
    }

    pub fn dim(&self, wire: &str) -> Result<usize> {
        Ok(self.tensor.shape()[self.axis(wire)?])
    }

    pub fn axis(&self, wire: &str) -> Result<usize> {
        self.wires
            .iter()
            .position(|w| w == wire)
            .ok_or_else(|| invalid(format!("no wire named {wire}")))
    }

    fn axes(&self, wires: &[&str]) -> Result<Vec<usize>> {
        wires.iter().map(|w| self.axis(w)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.tensor.norm_sqr()
    }

    /// Tensor product; wire names must stay distinct.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if let Some(w) = other.wires.iter().find(|w| self.wires.contains(w)) {
            return Err(invalid(format!("wire {w} appears on both factors")));
        }
        let a = self.tensor.reshape(vec![self.tensor.len(), 1])?;
        let b = other.tensor.reshape(vec![1, other.tensor.len()])?;
        let shape: Vec<usize> = self
            .tensor
            .shape()
            .iter()
            .chain(other.tensor.shape())
            .copied()
            .collect();
        let tensor = contract(&a, &[1], &b, &[0])?.into_reshape(shape)?;
        let wires = self.wires.iter().chain(&other.wires).cloned().collect();
        Ok(Self { tensor, wires })
    }

    /// Applies the `out × in` matrix `op`, consuming the `inputs` wires (slowest
    /// first) and appending the `outputs` wires.
    pub fn apply(
        &self,
        op: &ComplexTensor,
        inputs: &[&str],
        outputs: &[(&str, usize)],
    ) -> Result<Self> {
        let axes = self.axes(inputs)?;
        let in_dims: Vec<usize> = axes.iter().map(|&a| self.tensor.shape()[a]).collect();
        let shape: Vec<usize> = outputs.iter().map(|o| o.1).chain(in_dims).collect();
        let op = op.reshape(shape)?;
        let op_in: Vec<usize> = (outputs.len()..outputs.len() + inputs.len()).collect();
        let tensor = contract(&self.tensor, &axes, &op, &op_in)?;
        let mut wires: Vec<String> = self
            .wires
            .iter()
            .enumerate()
            .filter(|(i, _)| !axes.contains(i))
            .map(|(_, w)| w.clone())
            .collect();
        for (name, _) in outputs {
            if wires.iter().any(|w| w == name) {
                return Err(invalid(format!("output wire {name} already exists")));
            }
            wires.push(name.to_string());
        }
        Ok(Self { tensor, wires })
    }

    /// `(<EPR|_{ab} ⊗ I) |psi>`, unnormalized; its squared norm is the
    /// projection probability when `self` has unit norm.
    pub fn project_epr(&self, a: &str, b: &str) -> Result<Self> {
        let axes = self.axes(&[a, b])?;
        let dim = self.tensor.shape()[axes[0]];
        let tensor = contract(&self.tensor, &axes, &epr_state(dim)?.conj(), &[0, 1])?;
        let wires = self
            .wires
            .iter()
            .enumerate()
            .filter(|(i, _)| !axes.contains(i))
            .map(|(_, w)| w.clone())
            .collect();
        Ok(Self { tensor, wires })
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        Ok(Self {
            tensor: self.tensor.scale(C64::new(1.0 / n.sqrt(), 0.0)),
            wires: self.wires.clone(),
        })
    }

    /// `Tr_rest |psi><psi|` over the listed wires, in that order.
    pub fn reduced_density(&self, keep: &[&str]) -> Result<ComplexTensor> {
        self.tensor.reduced_density(&self.axes(keep)?)
    }
}

/// `U` applied to `EPR_RA ⊗ EPR_{B1 B1'} ⊗ EPR_{B2 B2'}`: wires `R, B1', B2', C, D`.
fn scrambled(u: &UnitaryMatrix, part: &Partition) -> Result<PurifiedState> {
    if u.dim() != part.d() {
        return Err(invalid(format!(
            "unitary of dim {} does not act on N = {} qubits",
            u.dim(),
            part.n_total()
        )));
    }
    let s = PurifiedState::epr("R", "A", part.d_a())?
        .product(&PurifiedState::epr("B1", "B1'", part.d_b1())?)?
        .product(&PurifiedState::epr("B2", "B2'", part.d_b2())?)?;
    s.apply(
        u.tensor(),
        &["A", "B1", "B2"],
        &[("C", part.d_c()), ("D", part.d_d())],
    )
}

/// Which operator the decoder applies to `A'B'`.
enum Decoder<'a> {
    /// `V*` on `A'B'`, with the last `erased` qubits of `B'` swapped for a
    /// maximally mixed input.
    Conjugate { v: &'a UnitaryMatrix, erased: bool },
    /// Full depolarization: `C'D'` maximally mixed, `A'B'` discarded.
    Depolarized,
}

/// Probability of `EPR_DD'` and joint probability of `EPR_DD'` then `EPR_RR'`.
fn decode(
    u: &UnitaryMatrix,
    part: &Partition,
    decoder: Decoder,
    config: &OracleConfig,
) -> Result<(f64, f64)> {
    let extra = match decoder {
        Decoder::Conjugate { erased: true, .. } => 2 * part.n_b2(),
        Decoder::Conjugate { erased: false, .. } => 0,
        Decoder::Depolarized => 2 * part.n_d(),
    };
    config.guard("oracle state vector", 2 * part.n_total() + 2 * part.n_a() + extra)?;

    let mut s = scrambled(u, part)?.product(&PurifiedState::epr("R'", "A'", part.d_a())?)?;
    let out = [("C'", part.d_c()), ("D'", part.d_d())];
    match decoder {
        Decoder::Conjugate { v, erased } => {
            let b2 = if erased {
                s = s.product(&PurifiedState::epr("F", "G", part.d_b2())?)?;
                "F"
            } else {
                "B2'"
            };
            s = s.apply(&v.tensor().conj(), &["A'", "B1'", b2], &out)?;
        }
        Decoder::Depolarized => {
            // C' is never measured, so only D' and its purifier are needed.
            s = s.product(&PurifiedState::epr("D'", "KD", part.d_d())?)?;
        }
    }
    let after_d = s.project_epr("D", "D'")?;
    let after_r = after_d.project_epr("R", "R'")?;
    Ok((after_d.norm_sqr(), after_r.norm_sqr()))
}

fn quantities(p_epr: f64, joint: f64, part: &Partition, eta: Option<f64>) -> DecodingQuantities {
    let da2 = (part.d_a() * part.d_a()) as f64;
    DecodingQuantities {
        p_epr,
        f_epr: joint / p_epr,
        error_factor: da2 * joint,
        eta,
    }
}

fn require_no_erasure(part: &Partition) -> Result<()> {
    if part.n_b2() != 0 {
        return Err(invalid("this model acts on the whole of B'"));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

pub fn oracle_ideal(u: &UnitaryMatrix, part: &Partition) -> Result<DecodingQuantities> {
    oracle_ideal_with(u, part, &OracleConfig::default())
}

pub fn oracle_ideal_with(
    u: &UnitaryMatrix,
    part: &Partition,
    config: &OracleConfig,
) -> Result<DecodingQuantities> {
    require_no_erasure(part)?;
    let (p, j) = decode(u, part, Decoder::Conjugate { v: u, erased: false }, config)?;
    Ok(quantities(p, j, part, None))
}

/// `P_EPR` twice: as the squared norm of the projected state, and as
/// `<EPR| rho_DD' |EPR>` from the reduced density operator.
pub fn oracle_p_epr_two_ways(u: &UnitaryMatrix, part: &Partition) -> Result<(f64, f64)> {
    require_no_erasure(part)?;
    OracleConfig::default().guard("oracle state vector", 2 * part.n_total() + 2 * part.n_a())?;
    let s = scrambled(u, part)?.product(&PurifiedState::epr("R'", "A'", part.d_a())?)?;
    let s = s.apply(
        &u.tensor().conj(),
        &["A'", "B1'", "B2'"],
        &[("C'", part.d_c()), ("D'", part.d_d())],
    )?;
    let by_projection = s.project_epr("D", "D'")?.norm_sqr();
    let dd = part.d_d();
    let rho = s.reduced_density(&["D", "D'"])?;
    let v = epr_state(dd)?.into_reshape(vec![dd * dd, 1])?;
    let rv = contract(&rho, &[1], &v, &[0])?;
    let by_density = contract(&v.conj(), &[0, 1], &rv, &[0, 1])?.to_scalar()?.re;
    Ok((by_projection, by_density))
}

pub fn oracle_erasure(u: &UnitaryMatrix, part: &Partition) -> Result<DecodingQuantities> {
    oracle_erasure_with(u, part, &OracleConfig::default())
}

pub fn oracle_erasure_with(
    u: &UnitaryMatrix,
    part: &Partition,
    config: &OracleConfig,
) -> Result<DecodingQuantities> {
    let (p, j) = decode(u, part, Decoder::Conjugate { v: u, erased: true }, config)?;
    Ok(quantities(p, j, part, None))
}

/// Exact `(1 - p, p)` mixture of the noiseless branch and the branch with
/// all of `B'` replaced by the maximally mixed state.
pub fn oracle_decoherence(
    u: &UnitaryMatrix,
    part: &Partition,
    p: f64,
) -> Result<DecodingQuantities> {
    oracle_decoherence_with(u, part, p, &OracleConfig::default())
}

pub fn oracle_decoherence_with(
    u: &UnitaryMatrix,
    part: &Partition,
    p: f64,
    config: &OracleConfig,
) -> Result<DecodingQuantities> {
    check_probability(p)?;
    require_no_erasure(part)?;
    let (p1, j1) = decode(u, part, Decoder::Conjugate { v: u, erased: false }, config)?;
    let all = part.erasing(part.n_b())?;
    let (p2, j2) = decode(u, &all, Decoder::Conjugate { v: u, erased: true }, config)?;
    Ok(quantities(
        (1.0 - p) * p1 + p * p2,
        (1.0 - p) * j1 + p * j2,
        part,
        None,
    ))
}

/// Decoder `U~*` with depolarizing probability `p` on `A'B'`. The coherent
/// branch's error factor is reported as `eta`.
pub fn oracle_imperfect(
    u: &UnitaryMatrix,
    u_tilde: &UnitaryMatrix,
    part: &Partition,
    p: f64,
) -> Result<DecodingQuantities> {
    oracle_imperfect_with(u, u_tilde, part, p, &OracleConfig::default())
}

pub fn oracle_imperfect_with(
    u: &UnitaryMatrix,
    u_tilde: &UnitaryMatrix,
    part: &Partition,
    p: f64,
    config: &OracleConfig,
) -> Result<DecodingQuantities> {
    check_probability(p)?;
    require_no_erasure(part)?;
    if u_tilde.dim() != u.dim() {
        return Err(invalid("U and U~ differ in dimension"));
    }
    let (p1, j1) = decode(u, part, Decoder::Conjugate { v: u_tilde, erased: false }, config)?;
    let (p2, j2) = if p > 0.0 {
        decode(u, part, Decoder::Depolarized, config)?
    } else {
        (0.0, 0.0)
    };
    let eta = (part.d_a() * part.d_a()) as f64 * j1;
    Ok(quantities(
        (1.0 - p) * p1 + p * p2,
        (1.0 - p) * j1 + p * j2,
        part,
        Some(eta),
    ))
}

pub fn oracle(u: &UnitaryMatrix, part: &Partition, model: &NoiseModel) -> Result<DecodingQuantities> {
    match model {
        NoiseModel::Ideal => oracle_ideal(u, part),
        NoiseModel::Erasure { n_b2 } => oracle_erasure(u, &part.erasing(*n_b2)?),
        NoiseModel::StorageDepolarizing { p } => oracle_decoherence(u, part, *p),
        NoiseModel::ImperfectBackward { p, u_tilde } => oracle_imperfect(u, u_tilde, part, *p),
    }
}

/// Stinespring isometry `sum_k K_k ⊗ |k>` of the depolarizing channel on
/// dimension `dim`, with Kraus operators `sqrt(1 - p + p/dim^2) I` and
/// `sqrt(p/dim^2) X^a Z^b` for the non-identity Weyl operators. Shape
/// `(dim · dim^2) × dim`, output wires ordered (system, environment).
pub fn depolarizing_isometry(dim: usize, p: f64) -> Result<ComplexTensor> {
    check_probability(p)?;
    let env = dim * dim;
    let w_id = (1.0 - p + p / env as f64).sqrt();
    let w = (p / env as f64).sqrt();
    let omega = |k: usize| C64::from_polar(1.0, TAU * k as f64 / dim as f64);
    // X^a Z^b |j> = omega^{b j} |j + a>
    Ok(ComplexTensor::from_fn(vec![dim * env, dim], |ix| {
        let (out, j) = (ix[0] / env, ix[1]);
        let k = ix[0] % env;
        let (a, b) = (k / dim, k % dim);
        if out != (j + a) % dim {
            return C64::new(0.0, 0.0);
        }
        let weight = if k == 0 { w_id } else { w };
        omega((b * j) % dim) * weight
    }))
}

/// Rényi-2 entropies read off the explicit `|Psi_HP>`.
pub fn oracle_entropies(
    u: &UnitaryMatrix,
    part: &Partition,
    model: &NoiseModel,
) -> Result<EntropyReport> {
    oracle_entropies_with(u, part, model, &OracleConfig::default())
}

pub fn oracle_entropies_with(
    u: &UnitaryMatrix,
    part: &Partition,
    model: &NoiseModel,
    config: &OracleConfig,
) -> Result<EntropyReport> {
    require_no_erasure(part)?;
    let pur = |rho: ComplexTensor| rho.norm_sqr();
    match model {
        NoiseModel::Ideal => {
            config.guard("oracle state vector", part.n_total() + part.n_a() + part.n_b())?;
            let s = scrambled(u, part)?;
            Ok(EntropyReport::from_purities(
                pur(s.reduced_density(&["R"])?),
                pur(s.reduced_density(&["B1'", "B2'", "D"])?),
                pur(s.reduced_density(&["R", "B1'", "B2'", "D"])?),
                false,
            ))
        }
        NoiseModel::Erasure { n_b2 } => {
            let erased = part.erasing(*n_b2)?;
            config.guard("oracle state vector", 2 * part.n_total())?;
            let s = scrambled(u, &erased)?;
            Ok(EntropyReport::from_purities(
                pur(s.reduced_density(&["R"])?),
                pur(s.reduced_density(&["B1'", "D"])?),
                pur(s.reduced_density(&["R", "B1'", "D"])?),
                false,
            ))
        }
        NoiseModel::StorageDepolarizing { p } => {
            check_probability(*p)?;
            let db = part.d_b();
            config.guard("oracle state vector", 2 * part.n_total() + 2 * part.n_b())?;
            let p_tilde = 1.0 - (1.0 - p).sqrt();
            let s = scrambled(u, part)?.apply(
                &depolarizing_isometry(db, p_tilde)?,
                &["B1'"],
                &[("B'", db), ("E", db * db)],
            )?;
            Ok(EntropyReport::from_purities(
                pur(s.reduced_density(&["R"])?),
                pur(s.reduced_density(&["B'", "D"])?),
                pur(s.reduced_density(&["R", "B'", "D"])?),
                true,
            ))
        }
        NoiseModel::ImperfectBackward { .. } => Err(invalid(
            "entropy identities are defined for storage noise only",
        )),
    }
}
