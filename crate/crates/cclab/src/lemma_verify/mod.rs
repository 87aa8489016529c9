//! Numerical verification of the entropy-inequality lemmas on explicitly
//! constructed small instances: quantum Shearer, decoupling, one-way and
//! multi-round direct sums, the distributional cut-and-paste recursion, and
//! QIC/QCC evaluation for toy protocols in the Yao model.

pub mod cut_paste;
pub mod decoupling;
pub mod direct_sum;
pub mod shearer;
pub mod toy;

pub use cut_paste::{verify_cut_and_paste, verify_cut_and_paste_random, CutPasteTrace};
pub use decoupling::verify_decoupling;
pub use direct_sum::{verify_multiround_directsum_classical, verify_oneway_directsum};
pub use shearer::verify_shearer;
pub use toy::{qic_of, random_protocol, ToyQuantumProtocol, ToyStep};

/// Aggregate result of one lemma verification run.
#[derive(Clone, Debug)]
pub struct Verification {
    pub lemma: String,
    pub trials: usize,
    pub max_violation: f64,
    pub worst_seed: u64,
    pub pass: bool,
}

impl Verification {
    pub fn new(lemma: &str, trials: usize, max_violation: f64, worst_seed: u64, tol: f64) -> Self {
        Verification {
            lemma: lemma.to_string(),
            trials,
            max_violation,
            worst_seed,
            pass: max_violation <= tol,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lemma": self.lemma,
            "trials": self.trials,
            "max_violation": self.max_violation,
            "worst_seed": self.worst_seed,
            "pass": self.pass,
        })
    }
}

/// Fold per-trial violations into (max, argmax-seed).
pub(crate) fn worst(items: impl IntoIterator<Item = (u64, f64)>) -> (f64, u64) {
    let mut max_v = f64::NEG_INFINITY;
    let mut worst_seed = 0;
    for (seed, v) in items {
        if v > max_v {
            max_v = v;
            worst_seed = seed;
        }
    }
    if max_v == f64::NEG_INFINITY {
        max_v = 0.0;
    }
    (max_v, worst_seed)
}
