//! Coefficient arrays indexed by truncated lattices or multi-indices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt17;
use crate::weights::WeightFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexSet {
    /// `(k, n)` with `|k|_inf <= k_max`, `|n|_inf <= n_max`, each in `Z^d`,
    /// standing for the point `(alpha k, beta n)`.
    Lattice { alpha: f64, beta: f64, d: usize, k_max: usize, n_max: usize },
    /// `gamma` in `N_0^d` with `|gamma|_inf <= gamma_max`.
    MultiIndex { d: usize, gamma_max: usize },
}

impl IndexSet {
    pub fn len(&self) -> usize {
        match *self {
            IndexSet::Lattice { d, k_max, n_max, .. } => ((2 * k_max + 1) * (2 * n_max + 1)).pow(d as u32),
            IndexSet::MultiIndex { d, gamma_max } => (gamma_max + 1).pow(d as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer coordinates of a flat index: `(k, n)` concatenated, or `gamma`.
    pub fn index(&self, flat: usize) -> Vec<i64> {
        match *self {
            IndexSet::Lattice { d, k_max, n_max, .. } => {
                let (wk, wn) = ((2 * k_max + 1).pow(d as u32), (2 * n_max + 1).pow(d as u32));
                let (kf, nf) = (flat / wn, flat % wn);
                debug_assert!(kf < wk);
                let mut out = digits(kf, 2 * k_max + 1, d, k_max as i64);
                out.extend(digits(nf, 2 * n_max + 1, d, n_max as i64));
                out
            }
            IndexSet::MultiIndex { d, gamma_max } => digits(flat, gamma_max + 1, d, 0),
        }
    }

    pub fn flat(&self, idx: &[i64]) -> Option<usize> {
        match *self {
            IndexSet::Lattice { d, k_max, n_max, .. } => {
                let kf = undigits(&idx[..d], 2 * k_max + 1, k_max as i64)?;
                let nf = undigits(&idx[d..], 2 * n_max + 1, n_max as i64)?;
                Some(kf * (2 * n_max + 1).pow(d as u32) + nf)
            }
            IndexSet::MultiIndex { gamma_max, .. } => undigits(idx, gamma_max + 1, 0),
        }
    }

    /// Phase-space point `(alpha k, beta n)` or `gamma` as reals.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.index(flat);
        match *self {
            IndexSet::Lattice { alpha, beta, d, .. } => idx
                .iter()
                .enumerate()
                .map(|(i, &v)| v as f64 * if i < d { alpha } else { beta })
                .collect(),
            IndexSet::MultiIndex { .. } => idx.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Sup-norm radius of the integer index.
    pub fn radius(&self, flat: usize) -> usize {
        self.index(flat).iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Largest radius whose shell is complete inside the box.
    pub fn max_radius(&self) -> usize {
        match *self {
            IndexSet::Lattice { k_max, n_max, .. } => k_max.min(n_max),
            IndexSet::MultiIndex { gamma_max, .. } => gamma_max,
        }
    }

    /// The same index set cut down to radius `r` (used for truncation
    /// growth comparisons).
    pub fn shrink(&self, r: usize) -> IndexSet {
        match self.clone() {
            IndexSet::Lattice { alpha, beta, d, k_max, n_max } => {
                IndexSet::Lattice { alpha, beta, d, k_max: k_max.min(r), n_max: n_max.min(r) }
            }
            IndexSet::MultiIndex { d, gamma_max } => IndexSet::MultiIndex { d, gamma_max: gamma_max.min(r) },
        }
    }
}

fn digits(mut flat: usize, base: usize, d: usize, offset: i64) -> Vec<i64> {
    let mut out = vec![0; d];
    for slot in out.iter_mut().rev() {
        *slot = (flat % base) as i64 - offset;
        flat /= base;
    }
    out
}

fn undigits(idx: &[i64], base: usize, offset: i64) -> Option<usize> {
    idx.iter().try_fold(0usize, |acc, &v| {
        let u = v + offset;
        (u >= 0 && (u as usize) < base).then(|| acc * base + u as usize)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientArray {
    pub index: IndexSet,
    pub values: Vec<Complex64>,
}

impl CoefficientArray {
    pub fn new(index: IndexSet, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for an index set of size {}",
                values.len(),
                index.len()
            )));
        }
        Ok(Self { index, values })
    }

    pub fn zeros(index: IndexSet) -> Self {
        let n = index.len();
        Self { index, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn(index: IndexSet, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let values = (0..index.len()).map(|i| f(&index.index(i))).collect();
        Self { index, values }
    }

    /// Canonical unit vector `e_eta`.
    pub fn unit(index: IndexSet, eta: &[i64]) -> Result<Self> {
        let mut c = Self::zeros(index);
        let i = c.index.flat(eta).ok_or_else(|| Error::InvalidParameter(format!("{eta:?} outside the index box")))?;
        c.values[i] = Complex64::new(1.0, 0.0);
        Ok(c)
    }

    pub fn get(&self, idx: &[i64]) -> Option<Complex64> {
        self.index.flat(idx).map(|i| self.values[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude on the outermost complete shell.
    pub fn boundary_max(&self) -> f64 {
        let r = self.index.max_radius();
        (0..self.values.len())
            .filter(|&i| self.index.radius(i) >= r)
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
    }

    /// Boundary shell below `1e-8` of the overall maximum.
    pub fn is_adequate(&self) -> bool {
        self.boundary_max() <= 1e-8 * self.max_abs()
    }

    /// Restriction to the sub-box of radius `r`.
    pub fn truncate(&self, r: usize) -> Self {
        let index = self.index.shrink(r);
        let values = (0..index.len())
            .map(|i| self.get(&index.index(i)).expect("sub-box lies inside the box"))
            .collect();
        Self { index, values }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum()
    }

    /// CSV columns `k,n,re,im,abs,omega_sigma` for lattice arrays
    /// (`gamma,re,im,abs,omega_sigma` for multi-indices). Multi-dimensional
    /// indices are written with `;` between components.
    pub fn to_csv(&self, omega: Option<&WeightFunction>) -> String {
        let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let mut out = match self.index {
            IndexSet::Lattice { .. } => String::from("k,n,re,im,abs,omega_sigma\n"),
            IndexSet::MultiIndex { .. } => String::from("gamma,re,im,abs,omega_sigma\n"),
        };
        for (i, v) in self.values.iter().enumerate() {
            let idx = self.index.index(i);
            let norm = self.index.point(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            let om = omega.map(|w| fmt17(w.eval_unchecked(norm))).unwrap_or_default();
            let head = match self.index {
                IndexSet::Lattice { d, .. } => format!("{},{}", join(&idx[..d]), join(&idx[d..])),
                IndexSet::MultiIndex { .. } => join(&idx),
            };
            out.push_str(&format!("{head},{},{},{},{om}\n", fmt17(v.re), fmt17(v.im), fmt17(v.norm())));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(k: usize, n: usize) -> IndexSet {
        IndexSet::Lattice { alpha: 0.5, beta: 2.0, d: 1, k_max: k, n_max: n }
    }

    #[test]
    fn lattice_index_roundtrip() {
        let ix = lattice(2, 3);
        assert_eq!(ix.len(), 35);
        for i in 0..ix.len() {
            assert_eq!(ix.flat(&ix.index(i)), Some(i));
        }
        assert_eq!(ix.index(0), vec![-2, -3]);
        assert_eq!(ix.point(ix.flat(&[1, -1]).unwrap()), vec![0.5, -2.0]);
        assert_eq!(ix.flat(&[3, 0]), None);
    }

    #[test]
    fn multi_index_roundtrip() {
        let ix = IndexSet::MultiIndex { d: 2, gamma_max: 4 };
        assert_eq!(ix.len(), 25);
        for i in 0..ix.len() {
            assert_eq!(ix.flat(&ix.index(i)), Some(i));
        }
        assert_eq!(ix.radius(ix.flat(&[1, 3]).unwrap()), 3);
    }

    #[test]
    fn unit_vector_and_truncation() {
        let c = CoefficientArray::unit(lattice(3, 3), &[1, -2]).unwrap();
        assert_eq!(c.max_abs(), 1.0);
        assert_eq!(c.truncate(2).max_abs(), 1.0);
        assert_eq!(c.truncate(1).max_abs(), 0.0);
        assert!(c.is_adequate());
        let edge = CoefficientArray::unit(lattice(3, 3), &[3, 0]).unwrap();
        assert!(!edge.is_adequate());
    }

    #[test]
    fn csv_layout() {
        let c = CoefficientArray::unit(lattice(1, 1), &[0, 0]).unwrap();
        let w = WeightFunction::log_power(1.0).unwrap();
        let csv = c.to_csv(Some(&w));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,n,re,im,abs,omega_sigma");
        assert_eq!(lines.len(), 10);
        assert!(lines[5].starts_with("0,0,1.0000000000000000e0"));
    }
}
