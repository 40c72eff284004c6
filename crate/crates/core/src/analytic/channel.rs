//! Depolarizing channels and the two-step decomposition along an EPR chain.
//!
//! Depolarizing a pair `(B1, B2)` with `p~`, doing the same on `(B3, B4)`, and
//! projecting `B2 B3` onto an EPR pair leaves `(1/d_B) Q(|EPR><EPR|_{B1 B4})`
//! with `p = 2 p~ - p~^2`.

use crate::error::{invalid, Result};
use crate::tensor::{contract, epr_projector, epr_state, ComplexTensor, C64};

/// `(1 - p) rho + p Tr[rho] I / dim` on a square matrix.
pub fn depolarize(rho: &ComplexTensor, p: f64) -> Result<ComplexTensor> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    let dim = rho.square_dim()?;
    let tr = rho.trace()?;
    rho.scale(C64::new(1.0 - p, 0.0))
        .add(&ComplexTensor::identity(dim).scale(tr * (p / dim as f64)))
}

/// `d_B <EPR|_{B2 B3} Q~(EPR_{B1 B2}) ⊗ Q~(EPR_{B3 B4}) |EPR>_{B2 B3}`
/// as a `d_B^2 × d_B^2` matrix on `B1 B4`.
pub fn depolarizing_chain(d_b: usize, p_tilde: f64) -> Result<ComplexTensor> {
    let pair = depolarize(&epr_projector(d_b)?, p_tilde)?
        .into_reshape(vec![d_b, d_b, d_b, d_b])?;
    // legs of each pair: [ket 1, ket 2, bra 1, bra 2]
    let epr = epr_state(d_b)?;
    // <EPR|_{B2 B3} on the kets: pair12 ket 2 with pair34 ket 1
    let left = contract(&pair, &[1], &epr.conj(), &[0])?; // [k1, b1', b2', k3]
    let left = contract(&left, &[3], &pair, &[0])?; // [k1, b1', b2', k4, b3', b4']
    // |EPR>_{B2 B3} on the bras
    let both = contract(&left, &[2, 4], &epr, &[0, 1])?; // [k1, b1', k4, b4']
    both.permute(&[0, 2, 1, 3])?
        .into_reshape(vec![d_b * d_b, d_b * d_b])
        .map(|m| m.scale(C64::new(d_b as f64, 0.0)))
}

/// The map whose Choi state (normalized, input leg first) is `choi`:
/// `X -> d Tr_in[(X^T ⊗ I) J]`.
fn apply_choi(choi: &ComplexTensor, x: &ComplexTensor) -> Result<ComplexTensor> {
    let dim = x.square_dim()?;
    let j = choi.reshape(vec![dim, dim, dim, dim])?; // [in, out, in', out']
    // sum_{ab} X_{ab} J[a, o, b, o']
    let out = contract(x, &[0, 1], &j, &[0, 2])?;
    Ok(out.scale(C64::new(dim as f64, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeChannelCheck {
    /// Max-entry deviation of the EPR-chain operator from `Q(EPR) / d_B`.
    pub chain: f64,
    /// Max-entry deviation of the composed map from the single map over the
    /// matrix units `E_ij`.
    pub composition: f64,
}

impl TildeChannelCheck {
    pub fn max(&self) -> f64 {
        self.chain.max(self.composition)
    }
}

/// Compares the composed `p~` channel with the single `p` channel.
pub fn tilde_channel_deviation(d_b: usize, p: f64) -> Result<TildeChannelCheck> {
    let pt = super::tilde_p(p)?;
    let epr = epr_projector(d_b)?;
    let want = depolarize(&epr, p)?.scale(C64::new(1.0 / d_b as f64, 0.0));
    let chain = depolarizing_chain(d_b, pt)?.max_abs_diff(&want)?;

    let single = depolarize(&epr, p)?;
    let half = depolarize(&epr, pt)?;
    let mut composition = 0.0f64;
    for i in 0..d_b {
        for k in 0..d_b {
            let e = ComplexTensor::from_fn(vec![d_b, d_b], |ix| {
                if ix[0] == i && ix[1] == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let twice = apply_choi(&half, &apply_choi(&half, &e)?)?;
            let once = apply_choi(&single, &e)?;
            composition = composition.max(twice.max_abs_diff(&once)?);
        }
    }
    Ok(TildeChannelCheck { chain, composition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depolarize_endpoints() {
        let rho = epr_projector(2).unwrap();
        assert!(depolarize(&rho, 0.0).unwrap().max_abs_diff(&rho).unwrap() < 1e-15);
        let mixed = depolarize(&rho, 1.0).unwrap();
        let want = ComplexTensor::identity(4).scale(C64::new(0.25, 0.0));
        assert!(mixed.max_abs_diff(&want).unwrap() < 1e-15);
        assert!(depolarize(&rho, 1.2).is_err());
    }

    #[test]
    fn choi_of_identity_channel_is_identity_map() {
        let j = epr_projector(3).unwrap();
        let x = ComplexTensor::from_fn(vec![3, 3], |ix| C64::new(ix[0] as f64, ix[1] as f64));
        assert!(apply_choi(&j, &x).unwrap().max_abs_diff(&x).unwrap() < 1e-14);
    }

    #[test]
    fn chain_without_noise_is_teleported_epr() {
        let chain = depolarizing_chain(2, 0.0).unwrap();
        let want = epr_projector(2).unwrap().scale(C64::new(0.5, 0.0));
        assert!(chain.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn composition_identity() {
        for d_b in [2, 4] {
            for p in [0.0, 0.19, 0.5, 1.0] {
                let dev = tilde_channel_deviation(d_b, p).unwrap();
                assert!(dev.max() < 1e-12, "d_B = {d_b}, p = {p}: {dev:?}");
            }
        }
    }

    #[test]
    fn wrong_tilde_probability_fails() {
        let epr = epr_projector(2).unwrap();
        let want = depolarize(&epr, 0.19).unwrap().scale(C64::new(0.5, 0.0));
        let chain = depolarizing_chain(2, 0.19).unwrap();
        assert!(chain.max_abs_diff(&want).unwrap() > 1e-3);
    }
}
