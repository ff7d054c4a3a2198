//! Numerical toolkit for weight functions, Gabor frames on lattices,
//! weighted mixed norms, Köthe sequence spaces and Komatsu sequences.
//!
//! Every infinite object (sums over lattices, suprema over indices, limits of
//! ratios) is rendered at finite truncation; verdicts are therefore three
//! valued and relative to the grid they were computed on.

pub mod cg;
pub mod coeffs;
pub mod error;
pub mod fft;
pub mod gabor;
pub mod grid;
pub mod io;
pub mod json;
pub mod koethe;
pub mod komatsu;
pub mod weights;

pub use coeffs::{CoefficientArray, IndexSet};
pub use error::{Error, Result};
pub use gabor::{GaborSystem, LatticeSpec};
pub use grid::{PhasePlaneFunction, SampledFunction};
pub use weights::WeightFunction;

pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Results are always returned in index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
