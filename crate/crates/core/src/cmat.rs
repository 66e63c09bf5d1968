//! Dense complex matrices for the numeric gates.

use num_complex::Complex64;

pub type C = Complex64;
pub type CMat = Vec<Vec<C>>;

pub fn e(x: f64) -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI * x)
}

pub fn eye(n: usize) -> CMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![C::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for t in 0..k {
            let x = a[i][t];
            if x == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * b[t][j];
            }
        }
    }
    out
}

pub fn adjoint(a: &CMat) -> CMat {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn conj(a: &CMat) -> CMat {
    a.iter().map(|r| r.iter().map(|z| z.conj()).collect()).collect()
}

pub fn max_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

pub fn apply(a: &CMat, v: &[C]) -> Vec<C> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn pow(a: &CMat, k: usize) -> CMat {
    (0..k).fold(eye(a.len()), |acc, _| mul(&acc, a))
}
