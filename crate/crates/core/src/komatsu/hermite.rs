//! Orthonormal Hermite functions `H_gamma` on grids, Hermite coefficients
//! `xi_gamma(f) = ∫ f H_gamma` and the reconstruction map
//! `T: c -> Σ c_gamma H_gamma`.

use num_complex::Complex64;

use crate::coeffs::{CoefficientArray, IndexSet};
use crate::error::{Error, Result};
use crate::fft::unravel;
use crate::grid::SampledFunction;

/// Largest per-axis degree evaluated by the recurrence.
pub const MAX_DEGREE: usize = 60;

/// `table[n][j] = H_n(x_j)` for `n <= n_max`, from the normalized
/// three-term recurrence
/// `H_{n+1} = sqrt(2/(n+1)) x H_n - sqrt(n/(n+1)) H_{n-1}`.
pub fn table_1d(n_max: usize, xs: &[f64]) -> Vec<Vec<f64>> {
    let mut table = Vec::with_capacity(n_max + 1);
    let h0: Vec<f64> = xs.iter().map(|x| std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp()).collect();
    table.push(h0);
    if n_max >= 1 {
        let h1: Vec<f64> = xs.iter().zip(&table[0]).map(|(x, h)| 2f64.sqrt() * x * h).collect();
        table.push(h1);
    }
    for n in 1..n_max {
        let a = (2.0 / (n + 1) as f64).sqrt();
        let b = (n as f64 / (n + 1) as f64).sqrt();
        let next: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(j, x)| a * x * table[n][j] - b * table[n - 1][j])
            .collect();
        table.push(next);
    }
    table
}

fn axis_nodes(grid: &SampledFunction) -> Vec<f64> {
    (0..grid.n).map(|j| grid.coord(j)).collect()
}

fn check_budget(gamma_max: usize) -> Result<()> {
    if gamma_max > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "Hermite degree {gamma_max} beyond the recurrence budget {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// `H_gamma` sampled on the grid of `template`.
pub fn hermite_function(gamma: &[usize], template: &SampledFunction) -> Result<SampledFunction> {
    if gamma.len() != template.d {
        return Err(Error::InvalidParameter(format!("multi-index of length {} for d = {}", gamma.len(), template.d)));
    }
    let top = gamma.iter().copied().max().unwrap_or(0);
    check_budget(top)?;
    let table = table_1d(top, &axis_nodes(template));
    let shape = template.shape();
    let mut idx = vec![0; template.d];
    let values = (0..template.values.len())
        .map(|i| {
            unravel(i, &shape, &mut idx);
            let v: f64 = gamma.iter().zip(&idx).map(|(&g, &j)| table[g][j]).product();
            Complex64::new(v, 0.0)
        })
        .collect();
    Ok(template.with_values(values))
}

/// Quadrature coefficients `xi_gamma = h^d Σ f H_gamma` for `|gamma|_inf <= gamma_max`.
pub fn hermite_coefficients(f: &SampledFunction, gamma_max: usize) -> Result<CoefficientArray> {
    check_budget(gamma_max)?;
    let table = table_1d(gamma_max, &axis_nodes(f));
    let index = IndexSet::MultiIndex { d: f.d, gamma_max };
    // Contract one axis at a time: data[axis...] -> coefficient axis.
    let mut data = f.values.clone();
    let mut shape = f.shape();
    for axis in 0..f.d {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let len = shape[axis];
        let mut out = vec![Complex64::new(0.0, 0.0); outer * (gamma_max + 1) * inner];
        for o in 0..outer {
            for (g, row) in table.iter().enumerate() {
                for i in 0..inner {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (c, w) in row.iter().enumerate().take(len) {
                        acc += data[(o * len + c) * inner + i] * *w;
                    }
                    out[(o * (gamma_max + 1) + g) * inner + i] = acc * f.h;
                }
            }
        }
        data = out;
        shape[axis] = gamma_max + 1;
    }
    CoefficientArray::new(index, data)
}

/// The map `T`: `Σ c_gamma H_gamma` on the grid of `template`.
pub fn hermite_synthesis(c: &CoefficientArray, template: &SampledFunction) -> Result<SampledFunction> {
    let IndexSet::MultiIndex { d, gamma_max } = c.index else {
        return Err(Error::InvalidParameter("multi-index coefficients required".into()));
    };
    if d != template.d {
        return Err(Error::GridMismatch(format!("coefficients in d = {d}, grid in d = {}", template.d)));
    }
    check_budget(gamma_max)?;
    let table = table_1d(gamma_max, &axis_nodes(template));
    let mut data = c.values.clone();
    let mut shape = vec![gamma_max + 1; d];
    for axis in 0..d {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let n = template.n;
        let mut out = vec![Complex64::new(0.0, 0.0); outer * n * inner];
        for o in 0..outer {
            for j in 0..n {
                for i in 0..inner {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (g, row) in table.iter().enumerate() {
                        acc += data[(o * (gamma_max + 1) + g) * inner + i] * row[j];
                    }
                    out[(o * n + j) * inner + i] = acc;
                }
            }
        }
        data = out;
        shape[axis] = n;
    }
    Ok(template.with_values(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{DEFAULT_H, DEFAULT_R};

    fn template() -> SampledFunction {
        SampledFunction::zeros(1, DEFAULT_H, DEFAULT_R).unwrap()
    }

    #[test]
    fn ground_state_closed_form() {
        let t = template();
        let h0 = hermite_function(&[0], &t).unwrap();
        for j in 0..t.n {
            let x = t.coord(j);
            let exact = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
            if exact > 1e-300 {
                assert!((h0.values[j].re - exact).abs() <= 1e-12 * exact);
            }
        }
    }

    #[test]
    fn matches_explicit_polynomials() {
        // H_3 = (2^3 3! sqrt(pi))^{-1/2} (8x^3 - 12x) e^{-x^2/2}
        let t = template();
        let h3 = hermite_function(&[3], &t).unwrap();
        let norm = (48.0 * std::f64::consts::PI.sqrt()).powf(-0.5);
        for j in (0..t.n).step_by(53) {
            let x = t.coord(j);
            let exact = norm * (8.0 * x.powi(3) - 12.0 * x) * (-x * x / 2.0).exp();
            assert!((h3.values[j].re - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_on_the_grid() {
        let t = template();
        let hs: Vec<SampledFunction> = (0..=20).map(|n| hermite_function(&[n], &t).unwrap()).collect();
        for i in 0..=20 {
            for j in 0..=i.min(10) {
                let ip = hs[i].inner(&hs[j]).re;
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-8, "({i},{j}) -> {ip}");
            }
        }
    }

    #[test]
    fn coefficients_of_a_basis_function() {
        let t = template();
        let c = hermite_coefficients(&hermite_function(&[5], &t).unwrap(), 12).unwrap();
        for g in 0..=12 {
            let target = if g == 5 { 1.0 } else { 0.0 };
            assert!((c.values[g].re - target).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_coefficients_parity_and_reconstruction() {
        let t = template();
        let f = SampledFunction::from_real_fn(1, DEFAULT_H, DEFAULT_R, |x| (-x[0] * x[0]).exp()).unwrap();
        let c = hermite_coefficients(&f, 40).unwrap();
        for g in (1..=40).step_by(2) {
            assert!(c.values[g].norm() < 1e-14);
        }
        for m in 0..19 {
            assert!(c.values[2 * m + 2].norm() < c.values[2 * m].norm());
        }
        let back = hermite_synthesis(&c, &t).unwrap();
        assert!(back.rel_error(&f) <= 1e-6);
    }

    #[test]
    fn two_dimensional_tensor_product() {
        let t = SampledFunction::zeros(2, 0.125, 8.0).unwrap();
        let h = hermite_function(&[2, 1], &t).unwrap();
        assert!((h.l2_norm() - 1.0).abs() < 1e-10);
        let c = hermite_coefficients(&h, 3).unwrap();
        assert!((c.get(&[2, 1]).unwrap().re - 1.0).abs() < 1e-10);
        assert!(c.get(&[1, 2]).unwrap().norm() < 1e-10);
        let back = hermite_synthesis(&c, &t).unwrap();
        assert!(back.rel_error(&h) < 1e-10);
    }

    #[test]
    fn degree_budget() {
        assert!(hermite_function(&[61], &template()).is_err());
        assert!(hermite_coefficients(&template(), 61).is_err());
    }
}
