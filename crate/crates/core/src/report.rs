use serde::Serialize;

/// One verification result, serialized as a JSON line by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub q: f64,
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: Option<u64>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, q: f64, inputs: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            q,
            inputs: inputs.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// FNV-1a over the bit patterns of the grid, used as the default seed.
pub fn seed_from_q_grid(qs: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for q in qs {
        for b in q.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
