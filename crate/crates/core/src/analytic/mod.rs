//! Closed-form Haar averages of the decoding quantities.
//!
//! Every dimension is a power of two, so the averages are rational functions
//! of exact integers and are evaluated with [`BigRational`]. The erasure
//! formulas take a real erasure probability `p`; they stay exact whenever
//! `p * n_b` is an integer (then `d_B^{2p}` is a power of four) and fall back
//! to floating point otherwise.

mod channel;
mod weingarten;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::partition::Partition;

pub use channel::{
    depolarize, depolarizing_chain, tilde_channel_deviation, TildeChannelCheck,
};
pub use weingarten::{
    appendix_closure, brute_force_integral, haar_moment2, haar_moment4, weingarten_integral,
    ClosedForms, ClosureMismatch, FourCopyDiagram, DECOHERENCE_DELTA, ERASURE_DELTA, ERASURE_P_EPR,
    IDEAL_P_EPR,
};

/// A closed-form value, exact when the exponents allow it.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn int(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn prob_ratio(p: f64) -> Result<BigRational> {
    check_probability(p)?;
    BigRational::from_float(p).ok_or_else(|| invalid(format!("probability {p} is not finite")))
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

struct Dims {
    d2m1: BigRational,
    da2: BigRational,
    db2: BigRational,
    dc2: BigRational,
    dd2: BigRational,
}

impl Dims {
    fn of(part: &Partition) -> Self {
        let sq = |x: usize| int(x) * int(x);
        Self {
            d2m1: sq(part.d()) - BigRational::one(),
            da2: sq(part.d_a()),
            db2: sq(part.d_b()),
            dc2: sq(part.d_c()),
            dd2: sq(part.d_d()),
        }
    }
}

/// Haar average of `P_EPR` without noise:
/// `(d_B^2 + d_C^2 - d_C^2/d_A^2 - 1) / (d^2 - 1)`.
pub fn ideal_p_epr_bar(part: &Partition) -> BigRational {
    let x = Dims::of(part);
    (&x.db2 + &x.dc2 - &x.dc2 / &x.da2 - BigRational::one()) / &x.d2m1
}

/// Leading terms of [`ideal_p_epr_bar`]: `1/d_A^2 + 1/d_D^2 - 1/(d_A^2 d_D^2)`.
pub fn ideal_p_epr_bar_truncated(part: &Partition) -> BigRational {
    let x = Dims::of(part);
    x.da2.recip() + x.dd2.recip() - (&x.da2 * &x.dd2).recip()
}

/// `d_B^{2p}`: exact (a power of four) when `p n_b` is an integer.
fn erased_dim_sq(part: &Partition, p: f64) -> Result<Value> {
    check_probability(p)?;
    let qubits = p * part.n_b() as f64;
    let k = qubits.round();
    if (qubits - k).abs() < 1e-9 {
        Ok(Value::Exact(int(1usize << (2 * k as usize))))
    } else {
        Ok(Value::Approx((part.d_b() as f64).powf(2.0 * p)))
    }
}

/// Erasure error factor average with `x = d_B^{2p}`:
/// `(d^2/x + d_C^2 - d_C^2/x - 1) / (d^2 - 1)`.
pub fn erasure_delta_bar(part: &Partition, p: f64) -> Result<Value> {
    Ok(match erased_dim_sq(part, p)? {
        Value::Exact(x) => Value::Exact(erasure_delta_rational(part, &x)),
        Value::Approx(x) => {
            let (d2, dc2) = ((part.d() * part.d()) as f64, (part.d_c() * part.d_c()) as f64);
            Value::Approx((d2 / x + dc2 - dc2 / x - 1.0) / (d2 - 1.0))
        }
    })
}

/// Erasure `P_EPR` average with `x = d_B^{2p}`:
/// `(d_B^2/x + d_C^2 - d_C^2/(d_A^2 x) - 1) / (d^2 - 1)`.
pub fn erasure_p_epr_bar(part: &Partition, p: f64) -> Result<Value> {
    Ok(match erased_dim_sq(part, p)? {
        Value::Exact(x) => Value::Exact(erasure_p_epr_rational(part, &x)),
        Value::Approx(x) => {
            let sq = |v: usize| (v * v) as f64;
            let (d2, da2, db2, dc2) = (sq(part.d()), sq(part.d_a()), sq(part.d_b()), sq(part.d_c()));
            Value::Approx((db2 / x + dc2 - dc2 / (da2 * x) - 1.0) / (d2 - 1.0))
        }
    })
}

fn erasure_delta_rational(part: &Partition, x: &BigRational) -> BigRational {
    let k = Dims::of(part);
    let d2 = &k.d2m1 + BigRational::one();
    (d2 / x + &k.dc2 - &k.dc2 / x - BigRational::one()) / &k.d2m1
}

fn erasure_p_epr_rational(part: &Partition, x: &BigRational) -> BigRational {
    let k = Dims::of(part);
    (&k.db2 / x + &k.dc2 - &k.dc2 / (&k.da2 * x) - BigRational::one()) / &k.d2m1
}

/// Erasure averages for the integer erasure count `part.n_b2()` (`d_B^{2p} = d_B2^2`).
pub fn erasure_bars_for_qubits(part: &Partition) -> (BigRational, BigRational) {
    let x = int(part.d_b2()) * int(part.d_b2());
    (
        erasure_delta_rational(part, &x),
        erasure_p_epr_rational(part, &x),
    )
}

/// Small-`p` expansion `1 - p (2 ln 2 log2 d_B)(1 - 1/d_D^2)` of the erasure error factor.
pub fn erasure_delta_bar_linearized(part: &Partition, p: f64) -> f64 {
    let dd2 = (part.d_d() * part.d_d()) as f64;
    1.0 - p * (2.0 * std::f64::consts::LN_2 * part.n_b() as f64) * (1.0 - 1.0 / dd2)
}

/// Storage-depolarizing error factor average:
/// `1 - p + p (d_A^2 + d_C^2 - d_A^2/d_D^2 - 1) / (d^2 - 1)`.
pub fn decoherence_delta_bar(part: &Partition, p: f64) -> Result<BigRational> {
    let p = prob_ratio(p)?;
    Ok(decoherence_delta_rational(part, &p))
}

pub(crate) fn decoherence_delta_rational(part: &Partition, p: &BigRational) -> BigRational {
    let k = Dims::of(part);
    let second = (&k.da2 + &k.dc2 - &k.da2 / &k.dd2 - BigRational::one()) / &k.d2m1;
    BigRational::one() - p + p * second
}

/// Storage-depolarizing `P_EPR` average: `(1 - p) P_ideal + p / d_D^2`.
pub fn decoherence_p_epr_bar(part: &Partition, p: f64) -> Result<BigRational> {
    let p = prob_ratio(p)?;
    let dd2 = Dims::of(part).dd2;
    Ok((BigRational::one() - &p) * ideal_p_epr_bar(part) + p / dd2)
}

/// `Delta = (1 - p) eta + p / d_D^2` for a given overlap `eta`.
pub fn imperfect_delta_bar(eta: f64, part: &Partition, p: f64) -> Result<f64> {
    check_probability(p)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid(format!("eta {eta} outside [0, 1]")));
    }
    Ok((1.0 - p) * eta + p / (part.d_d() * part.d_d()) as f64)
}

/// The root in `[0, 1]` of `2 p~ - p~^2 = p`, i.e. `p~ = 1 - sqrt(1 - p)`.
pub fn tilde_p(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(1.0 - (1.0 - p).sqrt())
}

/// Noise model for the closed forms; erasure takes a real probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum AnalyticModel {
    Ideal,
    Erasure { p: f64 },
    Decoherence { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarAverages {
    pub p_epr_bar: f64,
    pub delta_bar: f64,
    /// Ratio of averages `delta_bar / (d_A^2 p_epr_bar)`.
    pub f_epr_bar: f64,
    pub model: AnalyticModel,
    pub exact: bool,
}

pub fn haar_averages(part: &Partition, model: AnalyticModel) -> Result<HaarAverages> {
    let (p_epr, delta) = match model {
        AnalyticModel::Ideal => (
            Value::Exact(ideal_p_epr_bar(part)),
            Value::Exact(BigRational::one()),
        ),
        AnalyticModel::Erasure { p } => (erasure_p_epr_bar(part, p)?, erasure_delta_bar(part, p)?),
        AnalyticModel::Decoherence { p } => (
            Value::Exact(decoherence_p_epr_bar(part, p)?),
            Value::Exact(decoherence_delta_bar(part, p)?),
        ),
    };
    let da2 = (part.d_a() * part.d_a()) as f64;
    let (f_epr_bar, exact) = match (&p_epr, &delta) {
        (Value::Exact(pe), Value::Exact(de)) => {
            (ratio_to_f64(&(de / (pe * int(part.d_a() * part.d_a())))), true)
        }
        _ => (delta.to_f64() / (da2 * p_epr.to_f64()), false),
    };
    Ok(HaarAverages {
        p_epr_bar: p_epr.to_f64(),
        delta_bar: delta.to_f64(),
        f_epr_bar,
        model,
        exact,
    })
}

/// Exact ratio-of-averages fidelity `delta_bar / (d_A^2 P_bar)` for exact inputs.
pub fn f_epr_bar_exact(part: &Partition, delta: &BigRational, p_epr: &BigRational) -> BigRational {
    if p_epr.is_zero() {
        return BigRational::zero();
    }
    delta / (p_epr * int(part.d_a() * part.d_a()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, m: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(m))
    }

    fn part(n: usize, a: usize, d: usize) -> Partition {
        Partition::new(n, a, d).unwrap()
    }

    #[test]
    fn ideal_average_at_n10() {
        let p = ideal_p_epr_bar(&part(10, 2, 2));
        assert_eq!(p, rat(126975, 1048575));
        assert_eq!(p, rat(1693, 13981));
    }

    #[test]
    fn ideal_average_without_message_is_one() {
        assert_eq!(ideal_p_epr_bar(&Partition::without_message(6, 3)), BigRational::one());
    }

    #[test]
    fn truncation_is_close_at_large_d() {
        let q = part(10, 2, 3);
        let diff = ratio_to_f64(&(ideal_p_epr_bar(&q) - ideal_p_epr_bar_truncated(&q))).abs();
        assert!(diff < 16.0 / (q.d() * q.d()) as f64);
    }

    #[test]
    fn no_noise_reduces_to_one() {
        for q in [part(10, 2, 4), part(6, 1, 2), part(3, 3, 1)] {
            assert_eq!(erasure_delta_bar(&q, 0.0).unwrap(), Value::Exact(BigRational::one()));
            assert_eq!(decoherence_delta_bar(&q, 0.0).unwrap(), BigRational::one());
            assert_eq!(
                erasure_p_epr_bar(&q, 0.0).unwrap(),
                Value::Exact(ideal_p_epr_bar(&q))
            );
            assert_eq!(decoherence_p_epr_bar(&q, 0.0).unwrap(), ideal_p_epr_bar(&q));
        }
    }

    #[test]
    fn full_erasure_at_n10() {
        let q = part(10, 2, 4);
        let x = Dims::of(&q);
        let want = (&x.da2 + &x.dc2 - &x.dc2 / &x.db2 - BigRational::one()) / &x.d2m1;
        assert_eq!(erasure_delta_bar(&q, 1.0).unwrap(), Value::Exact(want));
    }

    #[test]
    fn full_decoherence_projects_at_one_over_dd2() {
        let q = part(10, 2, 4);
        assert_eq!(decoherence_p_epr_bar(&q, 1.0).unwrap(), rat(1, 256));
    }

    #[test]
    fn decoherence_full_message() {
        // n_b = 0: d_A = d
        let q = part(4, 4, 2);
        let x = Dims::of(&q);
        let d2 = &x.d2m1 + BigRational::one();
        let want = (&d2 + &x.dc2 - &d2 / &x.dd2 - BigRational::one()) / &x.d2m1;
        assert_eq!(decoherence_delta_bar(&q, 1.0).unwrap(), want);
    }

    #[test]
    fn fractional_erasure_falls_back_to_float() {
        let q = part(10, 2, 4);
        let v = erasure_delta_bar(&q, 0.1).unwrap();
        assert!(!v.is_exact());
        assert!(v.to_f64() < 1.0 && v.to_f64() > 0.0);
        assert!(erasure_delta_bar(&q, 0.5).unwrap().is_exact());
        assert!(erasure_delta_bar(&q, 1.5).is_err());
    }

    #[test]
    fn erasure_fidelity_matches_leading_form() {
        let q = part(10, 2, 4);
        let avg = haar_averages(&q, AnalyticModel::Erasure { p: 0.5 }).unwrap();
        assert!(avg.exact);
        let (dd2, x, da2) = (256.0f64, 256.0f64, 16.0f64);
        let leading = (dd2 + x - 1.0) / (dd2 + da2 * x - 1.0);
        assert!((leading - 511.0 / 4351.0).abs() < 1e-15);
        // agreement up to O(1/d^2) corrections
        assert!((avg.f_epr_bar - leading).abs() < 1e-4);
    }

    #[test]
    fn tilde_p_relation() {
        assert_eq!(tilde_p(0.0).unwrap(), 0.0);
        assert_eq!(tilde_p(1.0).unwrap(), 1.0);
        let p = 2.0 * 0.1 - 0.1 * 0.1;
        assert!((p - 0.19f64).abs() < 1e-15);
        assert!((tilde_p(0.19).unwrap() - 0.1).abs() < 1e-15);
        assert!(tilde_p(-0.01).is_err() && tilde_p(1.01).is_err());
    }

    #[test]
    fn imperfect_endpoints() {
        let q = part(6, 1, 2);
        assert_eq!(imperfect_delta_bar(1.0, &q, 0.0).unwrap(), 1.0);
        assert_eq!(imperfect_delta_bar(0.0, &q, 1.0).unwrap(), 1.0 / 16.0);
        assert!(imperfect_delta_bar(1.5, &q, 0.0).is_err());
    }

    #[test]
    fn linearization_tracks_small_p() {
        let q = part(10, 2, 4);
        let slope = 2.0 * std::f64::consts::LN_2 * q.n_b() as f64;
        for p in [0.001, 0.01, 0.02, 0.05] {
            let exact = erasure_delta_bar(&q, p).unwrap().to_f64();
            let lin = erasure_delta_bar_linearized(&q, p);
            assert!(exact >= lin - 1e-15, "convexity at p = {p}");
            // the gap is the second-order term of the expansion
            let x = p * slope;
            assert!(exact - lin <= 0.6 * x * x, "p = {p}: {exact} vs {lin}");
        }
    }
}
