//! Discrete Fourier transform: iterative radix-2 when the length is a power
//! of two, direct O(n^2) evaluation otherwise. Sign convention is
//! X[k] = sum_n x[n] exp(-2 pi i k n / N).

use num_complex::Complex64;
use std::f64::consts::PI;

pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n <= 1 {
        return x.to_vec();
    }
    if n.is_power_of_two() {
        let mut y = x.to_vec();
        fft_pow2(&mut y);
        y
    } else {
        dft_naive(x)
    }
}

fn dft_naive(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|t| {
                    let angle = -2.0 * PI * (k * t % n) as f64 / n as f64;
                    x[t] * Complex64::new(angle.cos(), angle.sin())
                })
                .sum()
        })
        .collect()
}

fn fft_pow2(x: &mut [Complex64]) {
    let n = x.len();

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            x.swap(i, j);
        }
    }

    // twiddle[t] = exp(-2 pi i t / n); stage `len` strides it by n/len.
    let twiddle: Vec<Complex64> = (0..n / 2)
        .map(|t| {
            let angle = -2.0 * PI * t as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let u = x[start + k];
                let v = x[start + k + len / 2] * twiddle[k * stride];
                x[start + k] = u + v;
                x[start + k + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}
