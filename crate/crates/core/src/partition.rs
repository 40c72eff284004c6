use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest system the crate will index with machine-word dimensions.
const MAX_QUBITS: usize = 24;

/// Qubit counts of the subsystems in the decoding protocol.
///
/// The scrambler acts on `N` qubits, split as `A ⊗ B` on the input side and
/// `C ⊗ D` on the output side. `A` is the message (entangled with the
/// reference `R`), `D` the late radiation. The early radiation `B'` mirrors
/// `B` and is split as `B1 ⊗ B2`, where `B2` holds the `n_b2` erased qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n_total: usize,
    n_a: usize,
    n_d: usize,
    n_b2: usize,
}

impl Partition {
    pub fn new(n_total: usize, n_a: usize, n_d: usize) -> Result<Self> {
        Self::with_erasure(n_total, n_a, n_d, 0)
    }

    pub fn with_erasure(n_total: usize, n_a: usize, n_d: usize, n_b2: usize) -> Result<Self> {
        if n_total > MAX_QUBITS {
            return Err(invalid(format!(
                "N = {n_total} exceeds the supported maximum of {MAX_QUBITS}"
            )));
        }
        if n_a < 1 || n_a > n_total {
            return Err(invalid(format!("need 1 <= n_a <= N, got n_a = {n_a}, N = {n_total}")));
        }
        if n_d < 1 || n_d > n_total {
            return Err(invalid(format!("need 1 <= n_d <= N, got n_d = {n_d}, N = {n_total}")));
        }
        if n_b2 > n_total - n_a {
            return Err(invalid(format!(
                "cannot erase {n_b2} qubits of B' with only {} available",
                n_total - n_a
            )));
        }
        Ok(Self {
            n_total,
            n_a,
            n_d,
            n_b2,
        })
    }

    /// A partition with an empty message (`d_A = 1`), outside the public
    /// invariants; only the degenerate-case tests use it.
    #[cfg(test)]
    pub(crate) fn without_message(n_total: usize, n_d: usize) -> Self {
        Self {
            n_total,
            n_a: 0,
            n_d,
            n_b2: 0,
        }
    }

    /// Same subsystem sizes with a different number of erased qubits.
    pub fn erasing(&self, n_b2: usize) -> Result<Self> {
        Self::with_erasure(self.n_total, self.n_a, self.n_d, n_b2)
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }
    pub fn n_a(&self) -> usize {
        self.n_a
    }
    pub fn n_b(&self) -> usize {
        self.n_total - self.n_a
    }
    pub fn n_c(&self) -> usize {
        self.n_total - self.n_d
    }
    pub fn n_d(&self) -> usize {
        self.n_d
    }
    pub fn n_b1(&self) -> usize {
        self.n_b() - self.n_b2
    }
    pub fn n_b2(&self) -> usize {
        self.n_b2
    }

    pub fn d(&self) -> usize {
        1 << self.n_total
    }
    pub fn d_a(&self) -> usize {
        1 << self.n_a
    }
    pub fn d_b(&self) -> usize {
        1 << self.n_b()
    }
    pub fn d_c(&self) -> usize {
        1 << self.n_c()
    }
    pub fn d_d(&self) -> usize {
        1 << self.n_d
    }
    pub fn d_b1(&self) -> usize {
        1 << self.n_b1()
    }
    pub fn d_b2(&self) -> usize {
        1 << self.n_b2
    }
}
