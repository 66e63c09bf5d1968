//! Small dense integer and rational matrix routines.

use num_traits::{Signed, Zero};

use crate::rat::{int, Rat};

pub type IMat = Vec<Vec<i128>>;
pub type QMat = Vec<Vec<Rat>>;

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

/// Result of a Smith normal form computation: `u * a * v = diag(d)`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IMat,
    pub v: IMat,
    pub v_inv: IMat,
    pub diag: Vec<i128>,
}

fn swap_cols(m: &mut IMat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

// col_j += k * col_i
fn add_col(m: &mut IMat, i: usize, j: usize, k: i128) {
    for row in m.iter_mut() {
        row[j] += k * row[i];
    }
}

// row_j += k * row_i
fn add_row(m: &mut IMat, i: usize, j: usize, k: i128) {
    let src = m[i].clone();
    for (t, s) in m[j].iter_mut().zip(src) {
        *t += k * s;
    }
}

pub fn smith(a: &IMat) -> Smith {
    let n = a.len();
    let mut m = a.clone();
    let mut u = identity(n);
    let mut v = identity(n);
    let mut v_inv = identity(n);
    for t in 0..n {
        loop {
            // pivot: smallest nonzero entry in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if m[i][j] != 0 {
                        match best {
                            Some((bi, bj)) if m[bi][bj].abs() <= m[i][j].abs() => {}
                            _ => best = Some((i, j)),
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            m.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);
            v_inv.swap(t, pj);
            let p = m[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = m[i][t] / p;
                if q != 0 {
                    add_row(&mut m, t, i, -q);
                    add_row(&mut u, t, i, -q);
                }
                if m[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = m[t][j] / p;
                if q != 0 {
                    add_col(&mut m, t, j, -q);
                    add_col(&mut v, t, j, -q);
                    // inverse op on rows of v_inv: row_t += q * row_j
                    add_row(&mut v_inv, j, t, q);
                }
                if m[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the rest of the block
            let mut fix = None;
            'outer: for i in t + 1..n {
                for j in t + 1..n {
                    if m[i][j] % p != 0 {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    add_row(&mut m, i, t, 1);
                    add_row(&mut u, i, t, 1);
                }
                None => break,
            }
        }
    }
    for t in 0..n {
        if m[t][t] < 0 {
            for row in m.iter_mut() {
                row[t] = -row[t];
            }
            for row in v.iter_mut() {
                row[t] = -row[t];
            }
            for x in v_inv[t].iter_mut() {
                *x = -*x;
            }
        }
    }
    let diag = (0..n).map(|i| m[i][i]).collect();
    Smith { u, v, v_inv, diag }
}

pub fn det(a: &IMat) -> i128 {
    let s = smith(a);
    let d: i128 = s.diag.iter().product();
    let su = det_unimodular(&s.u);
    let sv = det_unimodular(&s.v);
    d * su * sv
}

// +-1 determinant via rational elimination
fn det_unimodular(a: &IMat) -> i128 {
    let q = to_q(a);
    let d = det_q(&q);
    if d.is_positive() {
        1
    } else {
        -1
    }
}

pub fn to_q(a: &IMat) -> QMat {
    a.iter()
        .map(|r| r.iter().map(|&x| int(x as i64)).collect())
        .collect()
}

pub fn det_q(a: &QMat) -> Rat {
    let n = a.len();
    let mut m = a.clone();
    let mut det = int(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return int(0);
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

pub fn inverse_q(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut m: QMat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| int(i64::from(i == j))));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(p, c);
        let piv = m[c][c].clone();
        for x in m[c].iter_mut() {
            *x /= &piv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..2 * n {
                    let t = &f * &m[c][k];
                    m[r][k] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec_q(a: &QMat, x: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn mat_mul_q(a: &QMat, b: &QMat) -> QMat {
    let n = b[0].len();
    a.iter()
        .map(|r| {
            (0..n)
                .map(|j| r.iter().zip(b).map(|(x, row)| x * &row[j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// `x^T g y` for a rational bilinear form.
pub fn bilinear_q(g: &QMat, x: &[Rat], y: &[Rat]) -> Rat {
    let gy = mat_vec_q(g, y);
    x.iter().zip(&gy).map(|(a, b)| a * b).sum()
}

/// Integer basis (as columns) of the saturated kernel `{x in Z^n : row . x = 0}`.
pub fn kernel_basis(row: &[i128]) -> Vec<Vec<i128>> {
    kernel(&[row.to_vec()])
}

/// Saturated integer kernel of a matrix with at most as many rows as columns.
pub fn kernel(rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = rows[0].len();
    assert!(rows.len() <= n);
    let mut m = vec![vec![0i128; n]; n];
    for (i, r) in rows.iter().enumerate() {
        m[i] = r.clone();
    }
    let s = smith(&m);
    let rank = s.diag.iter().filter(|&&d| d != 0).count();
    (rank..n)
        .map(|j| (0..n).map(|i| s.v[i][j]).collect())
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref_q(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        let piv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= &piv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..cols {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Basis of `{x : m x = 0}` over the rationals.
pub fn nullspace_q(m: &QMat, cols: usize) -> Vec<Vec<Rat>> {
    let mut a = m.clone();
    let pivots = rref_q(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = int(1);
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &IMat, b: &IMat) -> IMat {
        let n = a.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn smith_reconstructs() {
        let g: IMat = vec![
            vec![0, -1, 0, 0],
            vec![-1, 0, 0, 0],
            vec![0, 0, 2, 5],
            vec![0, 0, 5, 10],
        ];
        let s = smith(&g);
        let d = mul(&mul(&s.u, &g), &s.v);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d[i][j], if i == j { s.diag[i] } else { 0 });
            }
        }
        assert_eq!(mul(&s.v, &s.v_inv), identity(4));
        assert_eq!(s.diag.iter().product::<i128>(), 5);
        assert_eq!(det(&g), 5);
    }

    #[test]
    fn kernel_is_saturated() {
        let k = kernel_basis(&[2, 4, 6]);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(2 * v[0] + 4 * v[1] + 6 * v[2], 0);
        }
        // (−2,1,0) and (−3,0,1) must both be integral combinations: index 1 check via 2x2 minors
        let m = [[k[0][1], k[1][1]], [k[0][2], k[1][2]]];
        assert_eq!((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs(), 1);
    }

    #[test]
    fn nullspace_solves() {
        let m = to_q(&vec![vec![1, 2, 3], vec![2, 4, 7]]);
        let n = nullspace_q(&m, 3);
        assert_eq!(n.len(), 1);
        assert_eq!(mat_vec_q(&m, &n[0]), vec![int(0), int(0)]);
        assert_eq!(n[0], vec![int(-2), int(1), int(0)]);
    }
}
