//! Cross-module verification: oracle corpus, Haar-moment closure, the
//! depolarizing-chain identity, entropy identities and sampler moments.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    appendix_closure, brute_force_integral, haar_moment4, ratio_to_f64, tilde_channel_deviation,
    weingarten_integral, ClosedForms, DECOHERENCE_DELTA, ERASURE_DELTA, ERASURE_P_EPR,
    IDEAL_P_EPR,
};
use crate::error::{Error, Result};
use crate::haar::{sample_haar_unitary, HaarSampler, UnitaryMatrix};
use crate::oracle::{oracle, oracle_entropies};
use crate::partition::Partition;
use crate::protocol::{entropy_report, quantities, DecodingQuantities, NoiseModel};
use crate::tensor::C64;
use crate::tolerance::{CROSS_METHOD, EXACT, STAT_Z};

/// Seed of the fixed corpus of unitaries used by the equivalence checks.
const CORPUS_SEED: u64 = 0x4850_6465;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Fast,
    Slow,
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Tier::Fast),
            "slow" => Ok(Tier::Slow),
            other => Err(Error::Config(format!("unknown tier {other:?}"))),
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Fast => "fast",
            Tier::Slow => "slow",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tier: Tier,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Outcome of comparing two routes to the same numbers over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub comparisons: usize,
    /// Cases skipped because the oracle would exceed its memory cap.
    pub skipped: usize,
    pub max_deviation: f64,
    pub failures: Vec<String>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.comparisons > 0
    }

    fn merge(mut self, other: Self) -> Self {
        self.comparisons += other.comparisons;
        self.skipped += other.skipped;
        self.max_deviation = self.max_deviation.max(other.max_deviation);
        self.failures.extend(other.failures);
        self
    }

    fn compare(&mut self, label: impl Fn() -> String, got: f64, want: f64, tol: f64) {
        let dev = (got - want).abs();
        self.comparisons += 1;
        if dev.is_nan() || dev > tol {
            self.failures.push(format!("{}: {got} vs {want}", label()));
        }
        if !dev.is_nan() {
            self.max_deviation = self.max_deviation.max(dev);
        }
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "{} comparisons, {} skipped, max deviation {:.3e}",
            self.comparisons, self.skipped, self.max_deviation
        );
        if let Some(first) = self.failures.first() {
            s.push_str(&format!("; {} failures, first: {first}", self.failures.len()));
        }
        s
    }
}

fn corpus_unitary(n: usize, sample: u64, tilde: bool) -> Result<UnitaryMatrix> {
    let stream = ((n as u64) << 40) | ((tilde as u64) << 32) | sample;
    sample_haar_unitary(&HaarSampler::new(CORPUS_SEED, stream), 1 << n)
}

fn corpus_models(part: &Partition, u_tilde: &UnitaryMatrix) -> Vec<NoiseModel> {
    let mut models = vec![NoiseModel::Ideal];
    models.extend((1..=part.n_b()).map(|n_b2| NoiseModel::Erasure { n_b2 }));
    models.extend([0.3, 1.0].map(|p| NoiseModel::StorageDepolarizing { p }));
    models.extend([0.0, 0.4].map(|p| NoiseModel::ImperfectBackward {
        p,
        u_tilde: u_tilde.clone(),
    }));
    models
}

fn model_label(model: &NoiseModel) -> String {
    match model {
        NoiseModel::Ideal => "ideal".into(),
        NoiseModel::Erasure { n_b2 } => format!("erasure n_b2={n_b2}"),
        NoiseModel::StorageDepolarizing { p } => format!("decoherence p={p}"),
        NoiseModel::ImperfectBackward { p, .. } => format!("imperfect p={p}"),
    }
}

fn compare_quantities(
    report: &mut CorpusReport,
    ctx: &str,
    got: &DecodingQuantities,
    want: &DecodingQuantities,
) {
    let pairs = [
        ("P_EPR", got.p_epr, want.p_epr),
        ("F_EPR", got.f_epr, want.f_epr),
        ("error factor", got.error_factor, want.error_factor),
    ];
    for (name, g, w) in pairs {
        report.compare(|| format!("{ctx} {name}"), g, w, CROSS_METHOD);
    }
    match (got.eta, want.eta) {
        (Some(g), Some(w)) => report.compare(|| format!("{ctx} eta"), g, w, CROSS_METHOD),
        (None, None) => {}
        _ => report.failures.push(format!("{ctx}: eta present on one side only")),
    }
}

/// Contraction engine against the state-vector oracle: every partition of
/// each `N`, `samples` seeded unitaries, every noise model.
pub fn oracle_corpus(ns: &[usize], samples: u64) -> Result<CorpusReport> {
    let mut jobs = Vec::new();
    for &n in ns {
        for n_a in 1..=n {
            for n_d in 1..=n {
                for s in 0..samples {
                    jobs.push((Partition::new(n, n_a, n_d)?, s));
                }
            }
        }
    }
    let reports: Vec<CorpusReport> = jobs
        .par_iter()
        .map(|(part, s)| -> Result<CorpusReport> {
            let u = corpus_unitary(part.n_total(), *s, false)?;
            let u_tilde = corpus_unitary(part.n_total(), *s, true)?;
            let mut report = CorpusReport::default();
            for model in corpus_models(part, &u_tilde) {
                let ctx = format!(
                    "N={} n_a={} n_d={} sample {s} {}",
                    part.n_total(),
                    part.n_a(),
                    part.n_d(),
                    model_label(&model)
                );
                let want = match oracle(&u, part, &model) {
                    Ok(q) => q,
                    Err(Error::ResourceLimit { .. }) => {
                        report.skipped += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let got = quantities(&u, part, &model)?;
                compare_quantities(&mut report, &ctx, &got, &want);
            }
            Ok(report)
        })
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().fold(CorpusReport::default(), CorpusReport::merge))
}

/// Per-unitary entropy identities for every partition with `2 <= N <= max_n`.
/// With `cross_oracle`, the entropies are also recomputed from the explicit
/// state (for `N <= 4`).
pub fn entropy_corpus(max_n: usize, samples: u64, cross_oracle: bool) -> Result<CorpusReport> {
    let mut jobs = Vec::new();
    for n in 2..=max_n {
        for n_a in 1..=n {
            for n_d in 1..=n {
                for s in 0..samples {
                    jobs.push((Partition::new(n, n_a, n_d)?, s));
                }
            }
        }
    }
    let reports: Vec<CorpusReport> = jobs
        .par_iter()
        .map(|(part, s)| entropy_case(part, *s, cross_oracle && part.n_total() <= 4))
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().fold(CorpusReport::default(), CorpusReport::merge))
}

fn entropy_case(part: &Partition, s: u64, cross_oracle: bool) -> Result<CorpusReport> {
    let mut r = CorpusReport::default();
    let u = corpus_unitary(part.n_total(), s, false)?;
    let ctx = format!("N={} n_a={} n_d={} sample {s}", part.n_total(), part.n_a(), part.n_d());
    let tol = CROSS_METHOD;
    let da2 = (part.d_a() * part.d_a()) as f64;

    let mut models = vec![NoiseModel::Ideal];
    models.extend((1..=part.n_b()).map(|n_b2| NoiseModel::Erasure { n_b2 }));
    models.push(NoiseModel::StorageDepolarizing { p: 0.37 });

    for model in &models {
        let label = format!("{ctx} {}", model_label(model));
        let rep = entropy_report(&u, part, model)?;
        let q = quantities(&u, part, model)?;
        let pur = |s2: f64| (-s2).exp2();
        match model {
            NoiseModel::Ideal => {
                r.compare(|| format!("{label} 2^-I2 vs P_EPR"), (-rep.i2).exp2(), q.p_epr, tol);
                r.compare(|| format!("{label} S2(R)"), rep.s2_r, part.n_a() as f64, tol);
                r.compare(|| format!("{label} S2(RB'D)"), rep.s2_rbd, part.n_c() as f64, tol);
            }
            NoiseModel::Erasure { n_b2 } => {
                let e = part.erasing(*n_b2)?;
                let (db1, db2) = (e.d_b1() as f64, e.d_b2() as f64);
                let (dc, dd) = (e.d_c() as f64, e.d_d() as f64);
                r.compare(|| format!("{label} F_EPR"), rep.i2.exp2() / da2, q.f_epr, tol);
                r.compare(
                    || format!("{label} Tr rho_RB1'D^2"),
                    pur(rep.s2_rbd),
                    db2 / dc * q.error_factor,
                    tol,
                );
                r.compare(|| format!("{label} Tr rho_B1'D^2"), pur(rep.s2_bd), dd / db1 * q.p_epr, tol);
            }
            NoiseModel::StorageDepolarizing { .. } => {
                let (db, dc, dd) = (part.d_b() as f64, part.d_c() as f64, part.d_d() as f64);
                r.compare(|| format!("{label} Tr rho_RB'D^2"), pur(rep.s2_rbd), q.error_factor / dc, tol);
                r.compare(|| format!("{label} Tr rho_B'D^2"), pur(rep.s2_bd), dd / db * q.p_epr, tol);
                if !rep.tilde {
                    r.failures.push(format!("{label}: tilde flag not set"));
                }
            }
            NoiseModel::ImperfectBackward { .. } => unreachable!(),
        }
        if cross_oracle {
            let o = oracle_entropies(&u, part, model)?;
            for (name, g, w) in [
                ("S2(R)", rep.s2_r, o.s2_r),
                ("S2(B'D)", rep.s2_bd, o.s2_bd),
                ("S2(RB'D)", rep.s2_rbd, o.s2_rbd),
            ] {
                r.compare(|| format!("{label} oracle {name}"), g, w, tol);
            }
        }
    }
    Ok(r)
}

/// One moment of the sampler against its Haar value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub expected: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarCheck {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub passed: bool,
    /// Worst `|z|` in each family of moments.
    pub checks: Vec<MomentCheck>,
}

/// Monte-Carlo moments of the sampler: `E[U_ij] = 0`, `E|U_ij|^2 = 1/d`,
/// `E[U_00 U*_11] = 0`, `E|U_00|^4 = 2/(d(d+1))`.
pub fn haar_check(dim: usize, samples: usize, seed: u64) -> Result<HaarCheck> {
    if dim == 0 || samples < 2 {
        return Err(Error::Config("haar-check needs dim >= 1 and samples >= 2".into()));
    }
    let d2 = dim * dim;
    // features: re U_ij, im U_ij, |U_ij|^2 (all ij), re/im U_00 U*_11, |U_00|^4
    let nf = 3 * d2 + 3;
    let features = |u: &UnitaryMatrix| -> Vec<f64> {
        let mut f = Vec::with_capacity(nf);
        let data = u.tensor().data();
        f.extend(data.iter().map(|z| z.re));
        f.extend(data.iter().map(|z| z.im));
        f.extend(data.iter().map(|z| z.norm_sqr()));
        let cross: C64 = if dim > 1 { data[0] * data[dim + 1].conj() } else { C64::new(0.0, 0.0) };
        f.push(cross.re);
        f.push(cross.im);
        f.push(data[0].norm_sqr().powi(2));
        f
    };
    const CHUNK: usize = 1024;
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut sum = vec![0.0; nf];
            let mut sq = vec![0.0; nf];
            for s in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let u = sample_haar_unitary(&HaarSampler::new(seed, s as u64), dim)?;
                for (k, x) in features(&u).into_iter().enumerate() {
                    sum[k] += x;
                    sq[k] += x * x;
                }
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![0.0; nf];
    let mut sq = vec![0.0; nf];
    for (s, q) in &chunks {
        for k in 0..nf {
            sum[k] += s[k];
            sq[k] += q[k];
        }
    }
    let k = samples as f64;
    let stat = |i: usize, expected: f64| -> (f64, f64, f64) {
        let mean = sum[i] / k;
        let var = ((sq[i] - k * mean * mean) / (k - 1.0)).max(0.0);
        let se = (var / k).sqrt();
        let z = if se > 0.0 {
            (mean - expected) / se
        } else if (mean - expected).abs() <= EXACT {
            0.0
        } else {
            f64::INFINITY
        };
        (mean, se, z)
    };
    let worst = |name: &str, range: std::ops::Range<usize>, expected: f64| -> MomentCheck {
        let (mean, stderr, z) = range
            .map(|i| stat(i, expected))
            .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
            .expect("non-empty family");
        MomentCheck {
            name: name.to_string(),
            mean,
            stderr,
            expected,
            z,
        }
    };
    let inv_d = 1.0 / dim as f64;
    let fourth = ratio_to_f64(&haar_moment4(dim, [0; 8])?);
    let mut checks = vec![
        worst("E[Re U_ij]", 0..d2, 0.0),
        worst("E[Im U_ij]", d2..2 * d2, 0.0),
        worst("E[|U_ij|^2]", 2 * d2..3 * d2, inv_d),
    ];
    if dim > 1 {
        checks.push(worst("E[Re U_00 U*_11]", 3 * d2..3 * d2 + 1, 0.0));
        checks.push(worst("E[Im U_00 U*_11]", 3 * d2 + 1..3 * d2 + 2, 0.0));
        checks.push(worst("E[|U_00|^4]", 3 * d2 + 2..3 * d2 + 3, fourth));
    }
    let passed = checks.iter().all(|c| c.z.abs() <= STAT_Z);
    Ok(HaarCheck {
        dim,
        samples,
        seed,
        passed,
        checks,
    })
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn verify(tier: Tier) -> VerifyReport {
    let slow = tier == Tier::Slow;
    let mut checks = Vec::new();

    checks.push(timed("oracle-equivalence", || {
        let mut r = oracle_corpus(&[2, 3, 4], 20)?;
        if slow {
            r = r.merge(oracle_corpus(&[5, 6], 2)?);
        }
        Ok((r.passed(), r.summary()))
    }));

    checks.push(timed("haar-closure", || {
        let n = appendix_closure(8, &ClosedForms::default())
            .map_err(|m| Error::InvalidArgument(format!("{} differs at {:?}", m.diagram, m.partition)))?;
        let brute_n = if slow { 4 } else { 3 };
        let mut brute = 0;
        for n_a in 1..=brute_n {
            for n_d in 1..=brute_n {
                for n_b2 in 0..=brute_n - n_a {
                    let part = Partition::with_erasure(brute_n, n_a, n_d, n_b2)?;
                    let mut diagrams = vec![ERASURE_DELTA, ERASURE_P_EPR];
                    if n_b2 == 0 {
                        diagrams.extend([IDEAL_P_EPR, DECOHERENCE_DELTA]);
                    }
                    for g in diagrams {
                        if brute_force_integral(&g, &part)? != weingarten_integral(&g, &part) {
                            return Ok((false, format!("{} brute force differs at {part:?}", g.name)));
                        }
                        brute += 1;
                    }
                }
            }
        }
        Ok((true, format!("{n} closed-form comparisons, {brute} brute-force sums")))
    }));

    checks.push(timed("depolarizing-chain", || {
        let mut worst = 0.0f64;
        for d_b in [2, 4, 8] {
            for p in [0.0, 0.19, 0.5, 1.0] {
                worst = worst.max(tilde_channel_deviation(d_b, p)?.max());
            }
        }
        Ok((worst < EXACT, format!("max deviation {worst:.3e}")))
    }));

    checks.push(timed("entropy-identities", || {
        let r = if slow { entropy_corpus(6, 5, true)? } else { entropy_corpus(4, 3, true)? };
        Ok((r.passed(), r.summary()))
    }));

    checks.push(timed("haar-moments", || {
        let samples = if slow { 100_000 } else { 20_000 };
        let h = haar_check(4, samples, CORPUS_SEED)?;
        let worst = h.checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
        Ok((h.passed, format!("{samples} samples at d=4, max |z| {worst:.2}")))
    }));

    VerifyReport {
        tier,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
