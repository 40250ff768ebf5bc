#![allow(dead_code)]

/// Romberg integration, refined until successive diagonal entries agree to `rtol`.
pub fn romberg<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64) -> f64 {
    let mut prev = vec![0.5 * (b - a) * (f(a) + f(b))];
    for level in 1..=22 {
        let n = 1usize << (level - 1);
        let h = (b - a) / (2 * n) as f64;
        let mid: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut row = vec![0.5 * prev[0] + h * mid];
        for j in 1..=level {
            let c = 4f64.powi(j as i32);
            row.push(row[j - 1] + (row[j - 1] - prev[j - 1]) / (c - 1.0));
        }
        let (last, before) = (row[level], prev[level - 1]);
        if level > 4 && (last - before).abs() <= rtol * last.abs() {
            return last;
        }
        prev = row;
    }
    prev[prev.len() - 1]
}

/// Power series of `I_nu(x)`.
pub fn series_i(nu: u32, x: f64) -> f64 {
    let mut t = (x / 2.0).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut s = 0.0;
    for k in 0..200 {
        s += t;
        if t.abs() < 1e-18 * s.abs() {
            break;
        }
        let k = k as f64;
        t *= (x / 2.0).powi(2) / ((k + 1.0) * (k + 1.0 + nu as f64));
    }
    s
}

/// Ascending series of `L_nu(x)` for `nu` in {0, 1}.
pub fn series_l(nu: u32, x: f64) -> f64 {
    let g32 = std::f64::consts::PI.sqrt() / 2.0;
    let gnu = if nu == 0 { g32 } else { g32 * 1.5 };
    let mut t = (x / 2.0).powi(nu as i32 + 1) / (g32 * gnu);
    let mut s = 0.0;
    for k in 0..200 {
        s += t;
        if t.abs() < 1e-18 * s.abs() {
            break;
        }
        let k = k as f64;
        t *= (x / 2.0).powi(2) / ((k + 1.5) * (k + nu as f64 + 1.5));
    }
    s
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
