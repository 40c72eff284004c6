//! Analytic data behind the four figures.
//!
//! 1. Ideal `P_bar` and `F_bar` over all `(n_a, n_d)`.
//! 2. `F_bar` against `p` for each `n_d`, erasure and decoherence, with the
//!    `1/d_A^2` floor.
//! 3. `delta_bar` over all `(n_a, n_d)` for erasure and decoherence.
//! 4. `F_bar` against `n_d` for a few values of `p`, both models.

use super::table::Row;
use crate::analytic::{haar_averages, AnalyticModel};
use crate::error::{invalid, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FigureOverrides {
    pub n: Option<usize>,
    /// Message size for figures 2 and 4.
    pub n_a: Option<usize>,
    /// Error probabilities for figures 2, 3 and 4.
    pub p_grid: Option<Vec<f64>>,
}

const DEFAULT_N: usize = 10;
const DEFAULT_NA: usize = 2;

fn p_steps(count: usize) -> Vec<f64> {
    (0..=count).map(|i| i as f64 / count as f64).collect()
}

fn row(id: u8, part: &Partition, model: &str, p: f64, quantity: &str, value: f64) -> Row {
    Row {
        figure_id: Some(id),
        n: part.n_total(),
        n_a: part.n_a(),
        n_d: part.n_d(),
        model: model.to_string(),
        p,
        quantity: quantity.to_string(),
        analytic: Some(value),
        mean: None,
        stderr: None,
        k: 0,
        seed: None,
    }
}

fn noisy(model: &str, p: f64) -> AnalyticModel {
    match model {
        "erasure" => AnalyticModel::Erasure { p },
        _ => AnalyticModel::Decoherence { p },
    }
}

pub fn figure_data(id: u8, overrides: &FigureOverrides) -> Result<Vec<Row>> {
    let n = overrides.n.unwrap_or(DEFAULT_N);
    let n_a = overrides.n_a.unwrap_or(DEFAULT_NA);
    let grid = |default: Vec<f64>| overrides.p_grid.clone().unwrap_or(default);
    let mut rows = Vec::new();
    match id {
        1 => {
            for a in 1..=n {
                for d in 1..=n {
                    let part = Partition::new(n, a, d)?;
                    let avg = haar_averages(&part, AnalyticModel::Ideal)?;
                    rows.push(row(1, &part, "ideal", 0.0, "P_EPR", avg.p_epr_bar));
                    rows.push(row(1, &part, "ideal", 0.0, "F_EPR", avg.f_epr_bar));
                }
            }
        }
        2 | 4 => {
            let ps = if id == 2 {
                grid(p_steps(20))
            } else {
                grid(vec![0.1, 0.3, 0.5, 0.7, 0.9])
            };
            for model in ["erasure", "decoherence"] {
                for d in 1..=n {
                    let part = Partition::new(n, n_a, d)?;
                    let floor = 1.0 / (part.d_a() * part.d_a()) as f64;
                    for &p in &ps {
                        let avg = haar_averages(&part, noisy(model, p))?;
                        rows.push(row(id, &part, model, p, "F_EPR", avg.f_epr_bar));
                        if id == 2 {
                            rows.push(row(id, &part, model, p, "F_EPR_floor", floor));
                        }
                    }
                }
            }
        }
        3 => {
            for &p in &grid(vec![0.1, 0.2]) {
                for model in ["erasure", "decoherence"] {
                    for a in 1..=n {
                        for d in 1..=n {
                            let part = Partition::new(n, a, d)?;
                            let avg = haar_averages(&part, noisy(model, p))?;
                            rows.push(row(3, &part, model, p, "delta", avg.delta_bar));
                        }
                    }
                }
            }
        }
        other => return Err(invalid(format!("unknown figure id {other}; expected 1 to 4"))),
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find<'a>(rows: &'a [Row], n_a: usize, n_d: usize, model: &str, p: f64, q: &str) -> &'a Row {
        rows.iter()
            .find(|r| r.n_a == n_a && r.n_d == n_d && r.model == model && r.p == p && r.quantity == q)
            .unwrap()
    }

    #[test]
    fn figure_one_shape() {
        let rows = figure_data(1, &FigureOverrides::default()).unwrap();
        assert_eq!(rows.len(), 200);
        let p = find(&rows, 2, 2, "ideal", 0.0, "P_EPR").analytic.unwrap();
        assert!((p - 1693.0 / 13981.0).abs() < 1e-15);
        assert!(find(&rows, 2, 8, "ideal", 0.0, "F_EPR").analytic.unwrap() >= 0.99);
        assert!(rows.iter().all(|r| r.figure_id == Some(1) && r.mean.is_none()));
    }

    #[test]
    fn figure_two_has_floor() {
        let rows = figure_data(2, &FigureOverrides::default()).unwrap();
        assert_eq!(find(&rows, 2, 5, "erasure", 1.0, "F_EPR_floor").analytic, Some(1.0 / 16.0));
        let f0 = find(&rows, 2, 5, "erasure", 0.0, "F_EPR").analytic.unwrap();
        let f1 = find(&rows, 2, 5, "erasure", 1.0, "F_EPR").analytic.unwrap();
        assert!(f1 < f0);
    }

    #[test]
    fn overrides_and_unknown_id() {
        let o = FigureOverrides {
            n: Some(4),
            n_a: Some(1),
            p_grid: Some(vec![0.5]),
        };
        let rows = figure_data(3, &o).unwrap();
        assert_eq!(rows.len(), 2 * 16);
        assert_eq!(figure_data(4, &o).unwrap().len(), 2 * 4);
        assert!(figure_data(5, &o).is_err());
        assert!(figure_data(2, &FigureOverrides { n_a: Some(11), ..Default::default() }).is_err());
    }
}
