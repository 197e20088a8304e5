//! Inputs shared by the benchmarks in `benches/`.

use qfl_core::{BlockOperator, Complex64};

/// `1 - 2^-j`.
pub fn dyadic_q(j: i32) -> f64 {
    1.0 - 2f64.powi(-j)
}

/// A deterministic dense operator with blocks `<= n_max`.
pub fn dense_operator(q: f64, n_max: usize) -> BlockOperator {
    let mut x = BlockOperator::zeros(q, n_max);
    for n in 1..=n_max {
        let b = x.block_mut(n).expect("block in range");
        for i in 0..n {
            for j in 0..n {
                let phase = (7 * n + 3 * i + j) as f64;
                b[(i, j)] = Complex64::from_polar(1.0 / (1 + i + j) as f64, phase);
            }
        }
    }
    x
}
