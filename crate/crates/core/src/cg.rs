//! Conjugate gradients for Hermitian positive definite operators.

use num_complex::Complex64;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Stop after this many iterations without a 10% gain on the best residual.
    pub stall_limit: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500, stall_limit: 3 }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    /// Iterate with the smallest residual seen.
    pub x: Vec<Complex64>,
    /// True relative residual `|b - A x| / |b|` of the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn conjugate_gradient<A: LinearOperator + ?Sized>(op: &A, b: &[Complex64], opts: &CgOptions) -> CgOutcome {
    let n = op.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    let zero = Complex64::new(0.0, 0.0);
    if b_norm == 0.0 {
        return CgOutcome { x: vec![zero; n], residual: 0.0, iterations: 0, converged: true, stagnated: false };
    }

    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let mut best_x = x.clone();
    let mut best = 1.0;
    let mut anchor = 1.0;
    let mut stall = 0;
    let mut iterations = 0;
    let mut stagnated = false;

    while iterations < opts.max_iter && best > opts.tol {
        let ap = op.apply(&p);
        let pap = dot(&ap, &p).re;
        if !(pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        iterations += 1;
        let rr_new = dot(&r, &r).re;
        let rel = rr_new.sqrt() / b_norm;
        if rel < best {
            best = rel;
            best_x.copy_from_slice(&x);
        }
        if rel < 0.9 * anchor {
            anchor = rel;
            stall = 0;
        } else {
            stall += 1;
            if stall >= opts.stall_limit {
                stagnated = true;
                break;
            }
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
    }

    let ax = op.apply(&best_x);
    let res: Vec<Complex64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
    let residual = norm(&res) / b_norm;
    CgOutcome { x: best_x, residual, iterations, converged: residual <= opts.tol, stagnated }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense(Vec<Vec<Complex64>>);

    impl LinearOperator for Dense {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
            self.0.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
        }
    }

    fn hpd(n: usize) -> Dense {
        // A = B^H B + I with a fixed complex B.
        let b: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0)).collect())
            .collect();
        let mut a = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| b[k][i].conj() * b[k][j]).sum();
            }
            a[i][i] += 1.0;
        }
        Dense(a)
    }

    #[test]
    fn solves_small_hpd_system() {
        let op = hpd(8);
        let truth: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let b = op.apply(&truth);
        let out = conjugate_gradient(&op, &b, &CgOptions { tol: 1e-12, max_iter: 200, stall_limit: 50 });
        assert!(out.converged);
        for (u, v) in out.x.iter().zip(&truth) {
            assert!((u - v).norm() < 1e-8);
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![Complex64::new(1.0, 2.0); 5];
        let out = conjugate_gradient(&Identity(5), &b, &CgOptions::default());
        assert_eq!(out.iterations, 1);
        assert!(out.residual < 1e-15);
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let out = conjugate_gradient(&Identity(3), &[Complex64::new(0.0, 0.0); 3], &CgOptions::default());
        assert!(out.converged && out.iterations == 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let op = hpd(12);
        let b: Vec<Complex64> = (0..12).map(|i| Complex64::new(1.0, i as f64)).collect();
        let out = conjugate_gradient(&op, &b, &CgOptions { tol: 1e-14, max_iter: 2, stall_limit: 10 });
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
        assert!(out.residual > 1e-14);
    }
}
