//! Gauss–Legendre rules.

use crate::real::Real;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nn = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton in f64.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nn + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = nn * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = T::lit(-z);
        x[n - 1 - i] = T::lit(z);
        w[i] = T::lit(wi);
        w[n - 1 - i] = T::lit(wi);
    }
    (x, w)
}

/// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
pub fn composite<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, panels: usize, rule: &(Vec<T>, Vec<T>)) -> T {
    let width = (b - a) / T::of(panels);
    let half = width / T::lit(2.0);
    let mut total = T::zero();
    for k in 0..panels {
        let mid = a + (T::of(k) + T::lit(0.5)) * width;
        let mut s = T::zero();
        for (xi, wi) in rule.0.iter().zip(&rule.1) {
            s = s + *wi * f(mid + half * *xi);
        }
        total = total + s * half;
    }
    total
}
