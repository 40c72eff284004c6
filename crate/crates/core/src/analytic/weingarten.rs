//! Second and fourth Haar moments, and the four-copy integrals built from them.
//!
//! A four-copy integral `∫ U U* U U*` is written as leg labels on the copies
//! (order: `U`, `U*`, `U`, `U*`; legs `[C, D, A, B1, B2]`). Repeated labels are
//! summed. The fourth-moment formula pairs each `U` with a `U*` independently on
//! the row side `(C, D)` and the column side `(A, B)`; for each of the four
//! pairings the delta functions glue labels into closed loops, and every loop on
//! subsystem `X` contributes a factor `d_X`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{
    decoherence_delta_rational, erasure_bars_for_qubits, ideal_p_epr_bar, int,
};
use crate::error::{invalid, Result};
use crate::partition::Partition;

/// `∫ U_{i1 j1} U*_{i2 j2} dU = δ_{i1 i2} δ_{j1 j2} / d`.
pub fn haar_moment2(d: usize, i1: usize, j1: usize, i2: usize, j2: usize) -> Result<BigRational> {
    check_indices(d, &[i1, j1, i2, j2])?;
    if i1 == i2 && j1 == j2 {
        Ok(int(d).recip())
    } else {
        Ok(BigRational::zero())
    }
}

/// `∫ U_{i1 j1} U_{i2 j2} U*_{i3 j3} U*_{i4 j4} dU` with
/// `idx = [i1, j1, i2, j2, i3, j3, i4, j4]`.
pub fn haar_moment4(d: usize, idx: [usize; 8]) -> Result<BigRational> {
    check_indices(d, &idx)?;
    let [same, cross, mixed_a, mixed_b] = moment4_terms(idx);
    let d = int(d);
    let d2m1 = &d * &d - BigRational::one();
    let plus = int(same as usize + cross as usize);
    let minus = int(mixed_a as usize + mixed_b as usize);
    if d2m1.is_zero() {
        // d = 1: the only entry is a phase, so the moment is 1.
        return Ok(if same { BigRational::one() } else { BigRational::zero() });
    }
    Ok(plus / &d2m1 - minus / (d * d2m1))
}

fn check_indices(d: usize, idx: &[usize]) -> Result<()> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if let Some(i) = idx.iter().find(|&&i| i >= d) {
        return Err(invalid(format!("index {i} out of range for dimension {d}")));
    }
    Ok(())
}

/// Which of the four delta products of the fourth-moment formula are nonzero:
/// `[(13)(24)|(13)(24), (14)(23)|(14)(23), (13)(24)|(14)(23), (14)(23)|(13)(24)]`.
fn moment4_terms(idx: [usize; 8]) -> [bool; 4] {
    let [i1, j1, i2, j2, i3, j3, i4, j4] = idx;
    let rows_id = i1 == i3 && i2 == i4;
    let rows_sw = i1 == i4 && i2 == i3;
    let cols_id = j1 == j3 && j2 == j4;
    let cols_sw = j1 == j4 && j2 == j3;
    [
        rows_id && cols_id,
        rows_sw && cols_sw,
        rows_id && cols_sw,
        rows_sw && cols_id,
    ]
}

const C: usize = 0;
const D: usize = 1;
const A: usize = 2;
const B1: usize = 3;
const B2: usize = 4;
const ROW_LEGS: [usize; 2] = [C, D];
const COL_LEGS: [usize; 3] = [A, B1, B2];

/// Leg labels of a four-copy integral, copies ordered `U, U*, U, U*`, legs
/// `[C, D, A, B1, B2]`, with the normalization that turns it into a protocol
/// quantity.
#[derive(Debug, Clone, Copy)]
pub struct FourCopyDiagram {
    pub name: &'static str,
    pub labels: [[&'static str; 5]; 4],
    norm: fn(&Partition) -> BigRational,
}

impl FourCopyDiagram {
    pub fn normalization(&self, part: &Partition) -> BigRational {
        (self.norm)(part)
    }
}

/// `U_{a1 b1 c1 d1} U*_{a2 b1 c2 d1} U_{a2 b2 c2 d2} U*_{a1 b2 c1 d2}`.
pub const IDEAL_P_EPR: FourCopyDiagram = FourCopyDiagram {
    name: "ideal P_EPR",
    labels: [
        ["c1", "d1", "a1", "b1", "e1"],
        ["c2", "d1", "a2", "b1", "e1"],
        ["c2", "d2", "a2", "b2", "e2"],
        ["c1", "d2", "a1", "b2", "e2"],
    ],
    norm: |p| int(p.d_a() * p.d_a() * p.d_b() * p.d_d()),
};

/// `U_{a1 (b1 b2) c1 d1} U*_{a1 (b1 b2') c2 d1} U_{a2 (b1' b2') c2 d2} U*_{a2 (b1' b2) c1 d2}`.
pub const ERASURE_DELTA: FourCopyDiagram = FourCopyDiagram {
    name: "erasure delta",
    labels: [
        ["c1", "d1", "a1", "b1", "b2"],
        ["c2", "d1", "a1", "b1", "b2'"],
        ["c2", "d2", "a2", "b1'", "b2'"],
        ["c1", "d2", "a2", "b1'", "b2"],
    ],
    norm: |p| int(p.d_a() * p.d_b1() * p.d_b2() * p.d_b2() * p.d_d()),
};

/// `U_{a1 (b1 b2) c1 d1} U*_{a2 (b1 b2') c2 d1} U_{a2 (b1' b2') c2 d2} U*_{a1 (b1' b2) c1 d2}`.
pub const ERASURE_P_EPR: FourCopyDiagram = FourCopyDiagram {
    name: "erasure P_EPR",
    labels: [
        ["c1", "d1", "a1", "b1", "b2"],
        ["c2", "d1", "a2", "b1", "b2'"],
        ["c2", "d2", "a2", "b1'", "b2'"],
        ["c1", "d2", "a1", "b1'", "b2"],
    ],
    norm: |p| int(p.d_a() * p.d_a() * p.d_b1() * p.d_b2() * p.d_b2() * p.d_d()),
};

/// Depolarized term of the storage-noise error factor,
/// `U_{a1 b1 c1 d1} U*_{a1 b2 c2 d1} U_{a2 b2 c2 d2} U*_{a2 b1 c1 d2}`.
pub const DECOHERENCE_DELTA: FourCopyDiagram = FourCopyDiagram {
    name: "decoherence delta",
    labels: [
        ["c1", "d1", "a1", "b1", "e"],
        ["c2", "d1", "a1", "b2", "e"],
        ["c2", "d2", "a2", "b2", "e"],
        ["c1", "d2", "a2", "b1", "e"],
    ],
    norm: |p| int(p.d_a() * p.d_b() * p.d_b() * p.d_d()),
};

fn leg_dims(part: &Partition) -> [usize; 5] {
    [part.d_c(), part.d_d(), part.d_a(), part.d_b1(), part.d_b2()]
}

/// `U` copies 0 and 2 pair with `U*` copies 1 and 3 (identity) or 3 and 1 (swap).
const PAIRINGS: [[(usize, usize); 2]; 2] = [[(0, 1), (2, 3)], [(0, 3), (2, 1)]];

fn loops(diagram: &FourCopyDiagram, leg: usize, pairing: &[(usize, usize); 2]) -> u32 {
    let mut names: Vec<&str> = diagram.labels.iter().map(|c| c[leg]).collect();
    names.sort_unstable();
    names.dedup();
    let mut parent: Vec<usize> = (0..names.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let pos = |s: &str| names.binary_search(&s).unwrap();
    for &(u, v) in pairing {
        let (x, y) = (pos(diagram.labels[u][leg]), pos(diagram.labels[v][leg]));
        let (rx, ry) = (root(&mut parent, x), root(&mut parent, y));
        parent[rx] = ry;
    }
    (0..names.len()).filter(|&i| root(&mut parent, i) == i).count() as u32
}

/// The integral by the fourth-moment formula, each delta pattern evaluated by
/// counting loops.
pub fn weingarten_integral(diagram: &FourCopyDiagram, part: &Partition) -> BigRational {
    let dims = leg_dims(part);
    let d = int(part.d());
    let d2m1 = &d * &d - BigRational::one();
    let mut total = BigRational::zero();
    for (s, rows) in PAIRINGS.iter().enumerate() {
        for (t, cols) in PAIRINGS.iter().enumerate() {
            let mut term = BigInt::one();
            for (legs, pairing) in [(&ROW_LEGS[..], rows), (&COL_LEGS[..], cols)] {
                for &leg in legs {
                    term *= BigInt::from(dims[leg]).pow(loops(diagram, leg, pairing));
                }
            }
            let term = BigRational::from_integer(term);
            if s == t {
                total += term / &d2m1;
            } else {
                total -= term / (&d * &d2m1);
            }
        }
    }
    total
}

/// The integral by summing [`haar_moment4`] over every assignment of the labels.
/// Feasible only for small `d` (the sum has `d^4` terms).
pub fn brute_force_integral(diagram: &FourCopyDiagram, part: &Partition) -> Result<BigRational> {
    const MAX_TERMS: usize = 1 << 20;
    let dims = leg_dims(part);
    let mut vars: Vec<(usize, &str)> = Vec::new();
    for copy in &diagram.labels {
        for (leg, &name) in copy.iter().enumerate() {
            if !vars.contains(&(leg, name)) {
                vars.push((leg, name));
            }
        }
    }
    let sizes: Vec<usize> = vars.iter().map(|&(leg, _)| dims[leg]).collect();
    let terms = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    if terms.is_none_or(|t| t > MAX_TERMS) {
        return Err(invalid(format!(
            "brute-force sum over {} labels is too large",
            vars.len()
        )));
    }
    let slot: Vec<[usize; 5]> = diagram
        .labels
        .iter()
        .map(|copy| {
            let mut s = [0; 5];
            for (leg, &name) in copy.iter().enumerate() {
                s[leg] = vars.iter().position(|&v| v == (leg, name)).unwrap();
            }
            s
        })
        .collect();

    let (dd, db1, db2, db) = (dims[D], dims[B1], dims[B2], part.d_b());
    let mut counts = [0u64; 4];
    let mut value = vec![0usize; vars.len()];
    loop {
        let row = |k: usize| value[slot[k][C]] * dd + value[slot[k][D]];
        let col = |k: usize| value[slot[k][A]] * db + value[slot[k][B1]] * db2 + value[slot[k][B2]];
        debug_assert!(db1 * db2 == db);
        let hits = moment4_terms([row(0), col(0), row(2), col(2), row(1), col(1), row(3), col(3)]);
        for (c, h) in counts.iter_mut().zip(hits) {
            *c += h as u64;
        }
        let mut i = vars.len();
        loop {
            if i == 0 {
                let d = int(part.d());
                let d2m1 = &d * &d - BigRational::one();
                let plus = int((counts[0] + counts[1]) as usize);
                let minus = int((counts[2] + counts[3]) as usize);
                return Ok(plus / &d2m1 - minus / (d * d2m1));
            }
            i -= 1;
            value[i] += 1;
            if value[i] < sizes[i] {
                break;
            }
            value[i] = 0;
        }
    }
}

/// The closed forms checked by [`appendix_closure`]; replaceable so that the
/// check itself can be tested against a corrupted formula.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForms {
    pub ideal_p_epr: fn(&Partition) -> BigRational,
    /// Uses `part.n_b2()` erased qubits.
    pub erasure_delta: fn(&Partition) -> BigRational,
    pub erasure_p_epr: fn(&Partition) -> BigRational,
    pub decoherence_delta: fn(&Partition, &BigRational) -> BigRational,
}

impl Default for ClosedForms {
    fn default() -> Self {
        Self {
            ideal_p_epr: ideal_p_epr_bar,
            erasure_delta: |p| erasure_bars_for_qubits(p).0,
            erasure_p_epr: |p| erasure_bars_for_qubits(p).1,
            decoherence_delta: decoherence_delta_rational,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureMismatch {
    pub diagram: &'static str,
    pub partition: Partition,
    pub integral: BigRational,
    pub closed_form: BigRational,
}

/// Checks every diagram against its closed form for all partitions with
/// `N <= max_n`. Returns the number of comparisons made.
pub fn appendix_closure(
    max_n: usize,
    forms: &ClosedForms,
) -> std::result::Result<usize, Box<ClosureMismatch>> {
    let mut checked = 0;
    let probabilities = [
        BigRational::new(1.into(), 4.into()),
        BigRational::new(1.into(), 2.into()),
        BigRational::one(),
    ];
    let compare = |diagram: &FourCopyDiagram, part: Partition, integral, closed_form| {
        if integral == closed_form {
            Ok(())
        } else {
            Err(Box::new(ClosureMismatch {
                diagram: diagram.name,
                partition: part,
                integral,
                closed_form,
            }))
        }
    };
    for n in 1..=max_n {
        for n_a in 1..=n {
            for n_d in 1..=n {
                let part = Partition::new(n, n_a, n_d).expect("valid partition");
                let avg = |g: &FourCopyDiagram, p: &Partition| {
                    weingarten_integral(g, p) / g.normalization(p)
                };
                compare(&IDEAL_P_EPR, part, avg(&IDEAL_P_EPR, &part), (forms.ideal_p_epr)(&part))?;
                let second = avg(&DECOHERENCE_DELTA, &part);
                for p in &probabilities {
                    let mixed = BigRational::one() - p + p * &second;
                    compare(&DECOHERENCE_DELTA, part, mixed, (forms.decoherence_delta)(&part, p))?;
                }
                checked += 1 + probabilities.len();
                for n_b2 in 0..=part.n_b() {
                    let erased = part.erasing(n_b2).expect("n_b2 within n_b");
                    compare(
                        &ERASURE_DELTA,
                        erased,
                        avg(&ERASURE_DELTA, &erased),
                        (forms.erasure_delta)(&erased),
                    )?;
                    compare(
                        &ERASURE_P_EPR,
                        erased,
                        avg(&ERASURE_P_EPR, &erased),
                        (forms.erasure_p_epr)(&erased),
                    )?;
                    checked += 2;
                }
            }
        }
    }
    Ok(checked)
}
