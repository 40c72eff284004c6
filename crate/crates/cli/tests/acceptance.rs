//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any line fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hpdecode::analytic::{
    appendix_closure, decoherence_delta_bar, erasure_delta_bar, erasure_delta_bar_linearized,
    f_epr_bar_exact, haar_averages, ideal_p_epr_bar, ratio_to_f64, tilde_channel_deviation,
    tilde_p, AnalyticModel, ClosedForms,
};
use hpdecode::harness::{entropy_corpus, oracle_corpus, run_ensemble, ModelKind, SweepConfig};
use hpdecode::Partition;
use num_bigint::BigInt;
use num_rational::BigRational;

const PLATEAU: f64 = 0.9;
const PLATEAU_BUDGET: Duration = Duration::from_secs(1);
const CLOSURE_MAX_N: usize = 8;
const CLOSURE_BUDGET: Duration = Duration::from_secs(30);
const CHANNEL_TOL: f64 = 1e-12;
const CHANNEL_PS: [f64; 4] = [0.0, 0.19, 0.5, 1.0];
const ORACLE_SAMPLES: u64 = 20;
const ORACLE_BUDGET: Duration = Duration::from_secs(300);
const ENTROPY_MAX_N: usize = 6;
const Z_GATE: f64 = 5.0;
const FLOOR_GAP: f64 = 0.01;
const FLOOR_MIN_ND: usize = 4;
const DECOHERENCE_FIDELITY: f64 = 0.5;
const LINEAR_REL: f64 = 0.01;
const LINEAR_MAX_P: f64 = 0.05;

struct Line {
    label: &'static str,
    passed: bool,
    detail: String,
}

fn grid(n: usize) -> impl Iterator<Item = Partition> {
    (1..=n).flat_map(move |a| (1..=n).map(move |d| Partition::new(n, a, d).unwrap()))
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn ideal_plateau() -> Line {
    let start = Instant::now();
    let one = rational(1, 1);
    let mut worst: Option<(f64, Partition)> = None;
    let mut below = 0;
    for part in grid(10).filter(|p| p.n_a() < p.n_d()) {
        let f = ratio_to_f64(&f_epr_bar_exact(&part, &one, &ideal_p_epr_bar(&part)));
        if f < PLATEAU {
            below += 1;
        }
        if worst.as_ref().is_none_or(|(w, _)| f < *w) {
            worst = Some((f, part));
        }
    }
    let p22 = Partition::new(10, 2, 2).unwrap();
    let f22 = f_epr_bar_exact(&p22, &one, &ideal_p_epr_bar(&p22));
    let pinned = f22 == rational(13981, 16 * 1693);
    let elapsed = start.elapsed();
    let (wf, wp) = worst.unwrap();
    Line {
        label: "1 ideal fidelity plateau",
        passed: below == 0 && pinned && elapsed < PLATEAU_BUDGET,
        detail: format!(
            "{below} points with n_a < n_d below {PLATEAU}, min {wf:.4} at (n_a={}, n_d={}); \
             F(2,2) = {f22} exact match {pinned}; {:.3}s",
            wp.n_a(),
            wp.n_d(),
            elapsed.as_secs_f64()
        ),
    }
}

fn noiseless_error_factor() -> Line {
    let one = rational(1, 1);
    let mut bad = Vec::new();
    for n in 1..=10 {
        for part in grid(n) {
            let e = erasure_delta_bar(&part, 0.0).unwrap();
            if e.exact() != Some(&one) {
                bad.push(format!("erasure {part:?}"));
            }
            if decoherence_delta_bar(&part, 0.0).unwrap() != one {
                bad.push(format!("decoherence {part:?}"));
            }
        }
    }
    Line {
        label: "2 error factor at p = 0",
        passed: bad.is_empty(),
        detail: format!("all partitions N <= 10, rational equality; {} mismatches {:?}", bad.len(), bad.first()),
    }
}

fn closure() -> Line {
    let start = Instant::now();
    let res = appendix_closure(CLOSURE_MAX_N, &ClosedForms::default());
    let elapsed = start.elapsed();
    let (passed, detail) = match res {
        Ok(n) => (elapsed < CLOSURE_BUDGET, format!("{n} exact comparisons")),
        Err(m) => (false, format!("{} differs at {:?}", m.diagram, m.partition)),
    };
    Line {
        label: "3 Haar-integral closure",
        passed,
        detail: format!("{detail}, N <= {CLOSURE_MAX_N}; {:.2}s", elapsed.as_secs_f64()),
    }
}

fn channel_identity() -> Line {
    let mut worst = 0.0f64;
    let mut tilde_ok = true;
    for p in CHANNEL_PS {
        tilde_ok &= (tilde_p(p).unwrap() - (1.0 - (1.0 - p).sqrt())).abs() == 0.0;
        for d_b in [2, 4, 8] {
            worst = worst.max(tilde_channel_deviation(d_b, p).unwrap().max());
        }
    }
    Line {
        label: "4 depolarizing-chain identity",
        passed: worst <= CHANNEL_TOL && tilde_ok,
        detail: format!("max deviation {worst:.2e} over p in {CHANNEL_PS:?}, d_B in {{2,4,8}}"),
    }
}

fn oracle_equivalence() -> Line {
    let start = Instant::now();
    let r = oracle_corpus(&[2, 3, 4], ORACLE_SAMPLES).unwrap();
    let elapsed = start.elapsed();
    Line {
        label: "5 oracle equivalence",
        passed: r.passed() && r.skipped == 0 && elapsed < ORACLE_BUDGET,
        detail: format!(
            "{} comparisons, max deviation {:.2e}, {} failures; {:.1}s",
            r.comparisons,
            r.max_deviation,
            r.failures.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn entropy_identities() -> Line {
    let r = entropy_corpus(ENTROPY_MAX_N, 3, true).unwrap();
    Line {
        label: "6 entropy identities",
        passed: r.passed(),
        detail: format!(
            "N <= {ENTROPY_MAX_N}: {} comparisons, max deviation {:.2e}, {} failures",
            r.comparisons,
            r.max_deviation,
            r.failures.len()
        ),
    }
}

fn monte_carlo() -> Line {
    let mut worst = (0.0f64, String::new());
    let mut gates = 0;
    let mut record = |cfg: &SweepConfig| {
        for pt in run_ensemble(cfg).unwrap() {
            for s in pt.stats.iter().filter(|s| s.quantity == "P_EPR" || s.quantity == "delta") {
                let z = s.z.expect("analytic value present");
                gates += 1;
                if z.is_nan() || z.abs() > worst.0 {
                    worst = (
                        z.abs(),
                        format!("N={} {} n_a={} n_d={} p={:.3} {}", pt.n, pt.model, pt.n_a, pt.n_d, pt.p, s.quantity),
                    );
                }
            }
        }
    };
    for model in [ModelKind::Ideal, ModelKind::Erasure, ModelKind::Decoherence] {
        let mut cfg = SweepConfig::new(6, 1, 1, model);
        cfg.na_range = (1, 3);
        cfg.nd_range = (1, 5);
        cfg.p_grid = vec![0.2, 0.5, 1.0];
        cfg.samples = 200;
        record(&cfg);
        let mut spot = SweepConfig::new(10, 2, 4, model);
        spot.p_grid = vec![0.5];
        spot.samples = 50;
        record(&spot);
    }
    Line {
        label: "7 Monte-Carlo consistency",
        passed: worst.0 <= Z_GATE,
        detail: format!("{gates} gates, max |z| {:.2} at {}", worst.0, worst.1),
    }
}

fn erasure_vs_decoherence() -> Line {
    let mut order_violations = 0;
    for part in grid(10) {
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let e = erasure_delta_bar(&part, p).unwrap().to_f64();
            let d = ratio_to_f64(&decoherence_delta_bar(&part, p).unwrap());
            if e > d {
                order_violations += 1;
            }
        }
    }
    let mut floor_misses = Vec::new();
    for n_d in FLOOR_MIN_ND..=10 {
        let part = Partition::new(10, 2, n_d).unwrap();
        let f = haar_averages(&part, AnalyticModel::Erasure { p: 1.0 }).unwrap().f_epr_bar;
        let floor = 1.0 / (part.d_a() * part.d_a()) as f64;
        if f - floor > FLOOR_GAP {
            floor_misses.push(format!("n_d={n_d}: {:.4}", f - floor));
        }
    }
    let dec = haar_averages(&Partition::new(10, 2, 8).unwrap(), AnalyticModel::Decoherence { p: 1.0 })
        .unwrap()
        .f_epr_bar;
    Line {
        label: "8 erasure vs decoherence",
        passed: order_violations == 0 && floor_misses.is_empty() && dec > DECOHERENCE_FIDELITY,
        detail: format!(
            "{order_violations} order violations on the N=10 grid; erasure floor gap > {FLOOR_GAP} at {floor_misses:?}; \
             decoherence F(2,8,p=1) = {dec:.4} (need > {DECOHERENCE_FIDELITY})"
        ),
    }
}

fn sweep_csv(dir: &Path, threads: usize) -> Vec<u8> {
    let out = dir.join(format!("sweep-{threads}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_hpdecode"))
        .env("HPDECODE_THREADS", threads.to_string())
        .args(["sweep", "--n", "6", "--na-range", "1-2", "--nd-range", "1-3"])
        .args(["--model", "decoherence", "--p-grid", "0,0.5,1", "--samples", "40", "--seed", "7"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read(out).unwrap()
}

fn determinism() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let one = sweep_csv(dir.path(), 1);
    let four = sweep_csv(dir.path(), 4);
    Line {
        label: "9 determinism across thread counts",
        passed: one == four && !one.is_empty(),
        detail: format!("{} bytes with 1 thread, {} with 4, identical {}", one.len(), four.len(), one == four),
    }
}

/// Small-p linearization of the erasure error factor, stated as a property
/// rather than a numbered criterion.
fn linearization() -> Line {
    let mut worst = (0.0f64, String::new());
    for part in grid(10) {
        for i in 1..=10 {
            let p = LINEAR_MAX_P * i as f64 / 10.0;
            let exact = erasure_delta_bar(&part, p).unwrap().to_f64();
            let lin = erasure_delta_bar_linearized(&part, p);
            let bound = LINEAR_REL * p * 2.0 * std::f64::consts::LN_2 * part.n_b() as f64;
            let excess = (exact - lin).abs() - bound;
            if excess > worst.0 {
                worst = (excess, format!("n_a={} n_d={} p={p:.3}", part.n_a(), part.n_d()));
            }
        }
    }
    Line {
        label: "invariant erasure small-p linearization",
        passed: worst.0 <= 0.0,
        detail: if worst.0 > 0.0 {
            format!("largest excess over the 1% band {:.4} at {}", worst.0, worst.1)
        } else {
            "within band for p <= 0.05 on the N=10 grid".into()
        },
    }
}

fn main() {
    let checks: [fn() -> Line; 10] = [
        ideal_plateau,
        noiseless_error_factor,
        closure,
        channel_identity,
        oracle_equivalence,
        entropy_identities,
        monte_carlo,
        erasure_vs_decoherence,
        determinism,
        linearization,
    ];
    let mut failed = 0;
    for check in checks {
        let line = check();
        let tag = if line.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!line.passed);
        println!("{tag} {}: {}", line.label, line.detail);
    }
    println!("acceptance: {} of {} passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
