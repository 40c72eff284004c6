use matrixmultiply::{zgemm, CGemmOption};

use super::{C64, ZERO};

/// Row-major `C = A B` with `A: m × k` and `B: k × n`.
pub(crate) fn matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![ZERO; m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: `Complex64` is `#[repr(C)] { re: f64, im: f64 }`, layout-identical
    // to `[f64; 2]`. Buffer lengths are checked above and the strides describe
    // dense row-major storage within them.
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}
