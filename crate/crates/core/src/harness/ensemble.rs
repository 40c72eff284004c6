use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{haar_averages, AnalyticModel};
use crate::error::{Error, Result};
use crate::haar::{sample_haar_unitary, sample_perturbed_unitary, HaarSampler};
use crate::partition::Partition;
use crate::protocol::{
    decoherence_quantities, erasure_quantities, ideal_quantities, imperfect_quantities,
    DecodingQuantities,
};
use crate::tolerance::EXACT;

pub const DEFAULT_SEED: u64 = 2021;
pub const DEFAULT_SAMPLES: usize = 200;

/// Streams at or above this offset belong to `U~`, below it to `U`.
const TILDE_STREAM: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ideal,
    Erasure,
    Decoherence,
    Imperfect,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ideal => "ideal",
            ModelKind::Erasure => "erasure",
            ModelKind::Decoherence => "decoherence",
            ModelKind::Imperfect => "imperfect",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(ModelKind::Ideal),
            "erasure" => Ok(ModelKind::Erasure),
            "decoherence" => Ok(ModelKind::Decoherence),
            "imperfect" => Ok(ModelKind::Imperfect),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}

/// How the imperfect decoder's `U~` is drawn for each sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UTildeChoice {
    /// Haar sample independent of `U`.
    Independent,
    /// Unitary factor of `U + epsilon G`, `G` complex Gaussian.
    Perturbed { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    /// Inclusive range of `n_a`.
    pub na_range: (usize, usize),
    /// Inclusive range of `n_d`.
    pub nd_range: (usize, usize),
    pub model: ModelKind,
    /// Error probabilities; ignored by the ideal model.
    pub p_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub u_tilde: UTildeChoice,
}

impl SweepConfig {
    pub fn new(n: usize, n_a: usize, n_d: usize, model: ModelKind) -> Self {
        Self {
            n,
            na_range: (n_a, n_a),
            nd_range: (n_d, n_d),
            model,
            p_grid: vec![0.0],
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            u_tilde: UTildeChoice::Independent,
        }
    }

    /// `(n_a, n_d)` pairs in sweep order; the position is the grid index.
    pub fn grid(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for n_a in self.na_range.0..=self.na_range.1 {
            for n_d in self.nd_range.0..=self.nd_range.1 {
                out.push((n_a, n_d));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.samples < 2 {
            return cfg(format!("need at least 2 samples, got {}", self.samples));
        }
        if self.na_range.0 > self.na_range.1 || self.nd_range.0 > self.nd_range.1 {
            return cfg("empty n_a or n_d range".into());
        }
        if self.p_grid.is_empty() {
            return cfg("empty p grid".into());
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return cfg(format!("p = {p} outside [0, 1]"));
        }
        if let UTildeChoice::Perturbed { epsilon } = self.u_tilde {
            if !(epsilon.is_finite() && epsilon >= 0.0) {
                return cfg(format!("perturbation strength {epsilon} must be >= 0"));
            }
        }
        for (n_a, n_d) in self.grid() {
            Partition::new(self.n, n_a, n_d)
                .map_err(|e| Error::Config(format!("grid point (n_a={n_a}, n_d={n_d}): {e}")))?;
        }
        if self.grid().len() as u64 >= 1 << 31 || self.samples as u64 >= 1 << 32 {
            return cfg("grid or sample count too large for the stream layout".into());
        }
        Ok(())
    }

    fn p_values(&self) -> Vec<f64> {
        match self.model {
            ModelKind::Ideal => vec![0.0],
            _ => self.p_grid.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub quantity: String,
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    pub analytic: Option<f64>,
    /// `(mean - analytic) / stderr`; zero when both the spread and the
    /// deviation vanish.
    pub z: Option<f64>,
}

impl EnsembleStats {
    fn new(quantity: &str, samples: usize, mean: f64, stderr: f64, analytic: Option<f64>) -> Self {
        let z = analytic.map(|a| {
            let diff = mean - a;
            if stderr > 0.0 {
                diff / stderr
            } else if diff.abs() <= EXACT {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            }
        });
        Self {
            quantity: quantity.to_string(),
            samples,
            mean,
            stderr,
            analytic,
            z,
        }
    }

    fn from_samples(quantity: &str, xs: &[f64], analytic: Option<f64>) -> Self {
        let (mean, var) = moments(xs);
        Self::new(quantity, xs.len(), mean, (var / xs.len() as f64).sqrt(), analytic)
    }
}

/// Mean and unbiased variance, summed in the given order.
fn moments(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var)
}

fn covariance(xs: &[f64], ys: &[f64], mx: f64, my: f64) -> f64 {
    let k = xs.len() as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (k - 1.0)
}

/// One `(n_a, n_d, p)` point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub n_a: usize,
    pub n_d: usize,
    pub model: ModelKind,
    /// For erasure, the realized fraction `n_b2 / n_b`.
    pub p: f64,
    pub stats: Vec<EnsembleStats>,
}

/// Erased qubit count closest to `p n_b`, and the fraction it realizes.
fn erased_qubits(part: &Partition, p: f64) -> (usize, f64) {
    let n_b = part.n_b();
    if n_b == 0 {
        return (0, p);
    }
    let k = (p * n_b as f64).round() as usize;
    (k, k as f64 / n_b as f64)
}

fn sample_one(
    cfg: &SweepConfig,
    part: &Partition,
    grid: u64,
    sample: u64,
    ps: &[f64],
) -> Result<Vec<DecodingQuantities>> {
    let stream = (grid << 32) | sample;
    let u = sample_haar_unitary(&HaarSampler::new(cfg.seed, stream), part.d())?;
    let tilde = if cfg.model == ModelKind::Imperfect {
        let sampler = HaarSampler::new(cfg.seed, TILDE_STREAM | stream);
        Some(match cfg.u_tilde {
            UTildeChoice::Independent => sample_haar_unitary(&sampler, part.d())?,
            UTildeChoice::Perturbed { epsilon } => sample_perturbed_unitary(&u, &sampler, epsilon)?,
        })
    } else {
        None
    };
    ps.iter()
        .map(|&p| match cfg.model {
            ModelKind::Ideal => ideal_quantities(&u, part),
            ModelKind::Erasure => erasure_quantities(&u, &part.erasing(erased_qubits(part, p).0)?),
            ModelKind::Decoherence => decoherence_quantities(&u, part, p),
            ModelKind::Imperfect => imperfect_quantities(&u, tilde.as_ref().unwrap(), part, p),
        })
        .collect()
}

/// Runs the sweep. Samples of one `(n_a, n_d)` point share their unitaries
/// across the p grid; sample `s` of grid point `g` uses stream `(g << 32) | s`.
/// Results are gathered in index order, so the output does not depend on the
/// number of threads.
pub fn run_ensemble(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let ps = cfg.p_values();
    let mut points = Vec::new();
    for (g, (n_a, n_d)) in cfg.grid().into_iter().enumerate() {
        let part = Partition::new(cfg.n, n_a, n_d)?;
        let per_sample: Vec<Vec<DecodingQuantities>> = (0..cfg.samples as u64)
            .into_par_iter()
            .map(|s| sample_one(cfg, &part, g as u64, s, &ps))
            .collect::<Result<_>>()?;
        for (i, &p) in ps.iter().enumerate() {
            let qs: Vec<DecodingQuantities> = per_sample.iter().map(|v| v[i]).collect();
            points.push(summarize(cfg, &part, p, &qs)?);
        }
    }
    Ok(points)
}

fn summarize(
    cfg: &SweepConfig,
    part: &Partition,
    p: f64,
    qs: &[DecodingQuantities],
) -> Result<SweepPoint> {
    let (p, analytic) = match cfg.model {
        ModelKind::Ideal => (0.0, Some(haar_averages(part, AnalyticModel::Ideal)?)),
        ModelKind::Erasure => {
            let p_eff = erased_qubits(part, p).1;
            (p_eff, Some(haar_averages(part, AnalyticModel::Erasure { p: p_eff })?))
        }
        ModelKind::Decoherence => (p, Some(haar_averages(part, AnalyticModel::Decoherence { p })?)),
        ModelKind::Imperfect => (p, None),
    };
    let pe: Vec<f64> = qs.iter().map(|q| q.p_epr).collect();
    let de: Vec<f64> = qs.iter().map(|q| q.error_factor).collect();
    let fe: Vec<f64> = qs.iter().map(|q| q.f_epr).collect();
    let k = qs.len();
    let delta_name = if cfg.model == ModelKind::Imperfect { "Delta" } else { "delta" };

    let p_stats = EnsembleStats::from_samples("P_EPR", &pe, analytic.as_ref().map(|a| a.p_epr_bar));
    let d_stats = EnsembleStats::from_samples(delta_name, &de, analytic.as_ref().map(|a| a.delta_bar));

    // Ratio of means, with its delta-method standard error.
    let da2 = (part.d_a() * part.d_a()) as f64;
    let (mp, vp) = moments(&pe);
    let (md, vd) = moments(&de);
    let cov = covariance(&pe, &de, mp, md);
    let ratio = md / (da2 * mp);
    let var = (vd - 2.0 * ratio * da2 * cov + (ratio * da2).powi(2) * vp) / (da2 * mp).powi(2);
    let f_ratio = EnsembleStats::new(
        "F_EPR",
        k,
        ratio,
        (var.max(0.0) / k as f64).sqrt(),
        analytic.as_ref().map(|a| a.f_epr_bar),
    );
    let f_mean = EnsembleStats::from_samples("F_EPR_sample_mean", &fe, None);

    let mut stats = vec![p_stats, d_stats, f_ratio, f_mean];
    if cfg.model == ModelKind::Imperfect {
        let eta: Vec<f64> = qs.iter().map(|q| q.eta.unwrap_or(f64::NAN)).collect();
        stats.push(EnsembleStats::from_samples("eta", &eta, None));
    }
    Ok(SweepPoint {
        n: cfg.n,
        n_a: part.n_a(),
        n_d: part.n_d(),
        model: cfg.model,
        p,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::STAT_Z;

    fn stat<'a>(pt: &'a SweepPoint, name: &str) -> &'a EnsembleStats {
        pt.stats.iter().find(|s| s.quantity == name).unwrap()
    }

    #[test]
    fn model_names_round_trip() {
        for m in [ModelKind::Ideal, ModelKind::Erasure, ModelKind::Decoherence, ModelKind::Imperfect] {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!(matches!("noisy".parse::<ModelKind>(), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_configs() {
        let mut c = SweepConfig::new(4, 1, 1, ModelKind::Ideal);
        c.nd_range = (1, 5);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = SweepConfig::new(4, 1, 1, ModelKind::Decoherence);
        c.p_grid = vec![0.5, 1.2];
        assert!(c.validate().is_err());
        c.p_grid = vec![];
        assert!(c.validate().is_err());
        let mut c = SweepConfig::new(4, 1, 1, ModelKind::Ideal);
        c.samples = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn erasure_without_loss_has_no_spread() {
        let mut c = SweepConfig::new(4, 1, 2, ModelKind::Erasure);
        c.samples = 20;
        let pts = run_ensemble(&c).unwrap();
        let d = stat(&pts[0], "delta");
        assert_eq!((d.mean, d.stderr, d.z), (1.0, 0.0, Some(0.0)));
    }

    #[test]
    fn ideal_ensemble_matches_average() {
        let mut c = SweepConfig::new(5, 1, 2, ModelKind::Ideal);
        c.samples = 100;
        let pts = run_ensemble(&c).unwrap();
        let p = stat(&pts[0], "P_EPR");
        assert!(p.z.unwrap().abs() <= STAT_Z, "{p:?}");
        assert!(stat(&pts[0], "F_EPR_sample_mean").analytic.is_none());
    }

    #[test]
    fn erasure_rounds_to_whole_qubits() {
        let part = Partition::new(6, 1, 2).unwrap();
        assert_eq!(erased_qubits(&part, 0.4), (2, 0.4));
        assert_eq!(erased_qubits(&part, 0.3), (2, 0.4));
        let full = Partition::new(3, 3, 1).unwrap();
        assert_eq!(erased_qubits(&full, 0.7), (0, 0.7));
    }

    #[test]
    fn imperfect_reports_eta() {
        let mut c = SweepConfig::new(3, 1, 1, ModelKind::Imperfect);
        c.samples = 4;
        c.p_grid = vec![0.0, 0.5];
        c.u_tilde = UTildeChoice::Perturbed { epsilon: 0.0 };
        let pts = run_ensemble(&c).unwrap();
        assert_eq!(pts.len(), 2);
        let eta = stat(&pts[0], "eta");
        assert!((eta.mean - 1.0).abs() < 1e-10);
        assert!((stat(&pts[0], "Delta").mean - 1.0).abs() < 1e-10);
    }
}
