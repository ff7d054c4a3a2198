//! Multi-dimensional FFT over row-major buffers, built on `rustfft`.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized DFT along every axis of a row-major array.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len(), "shape does not match buffer length");
    let mut planner = FftPlanner::<f64>::new();
    let mut stride = 1usize;
    for axis in (0..shape.len()).rev() {
        let n = shape[axis];
        if n > 1 {
            let fft = planner.plan_fft(n, direction);
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (i, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + i * stride];
                    }
                    fft.process(&mut line);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride] = *v;
                    }
                }
            }
        }
        stride *= n;
    }
}

/// Inverse of [`fft_nd`] including the `1/total` normalization.
pub fn ifft_nd(data: &mut [Complex64], shape: &[usize]) {
    fft_nd(data, shape, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Splits a flat row-major index into per-axis indices.
pub fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        out[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
}

pub fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}
