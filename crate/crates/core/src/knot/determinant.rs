//! Exact integer determinants by fraction-free (Bareiss) elimination.
//!
//! Elimination runs in `i128` with checked arithmetic and restarts in
//! arbitrary precision if any intermediate overflows.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

fn bareiss_i128(mut m: Vec<Vec<i128>>) -> Option<i128> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        let pivot = m[k][k];
        for i in k + 1..n {
            let lead = m[i][k];
            for j in k + 1..n {
                let a = m[i][j].checked_mul(pivot)?;
                let b = lead.checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
            m[i][k] = 0;
        }
        prev = pivot;
    }
    Some(sign * m[n - 1][n - 1])
}

fn bareiss_big(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let lead = m[i][k].clone();
            for j in k + 1..n {
                let v = (&m[i][j] * &pivot - &lead * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = pivot;
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Determinant of a square integer matrix. The empty matrix has determinant 1.
pub fn integer_determinant(m: &[Vec<i64>]) -> BigInt {
    assert!(m.iter().all(|row| row.len() == m.len()), "matrix must be square");
    let small: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    match bareiss_i128(small) {
        Some(d) => BigInt::from(d),
        None => bareiss_big(m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()),
    }
}

/// `|det m|`.
pub fn abs_determinant(m: &[Vec<i64>]) -> BigInt {
    integer_determinant(m).abs()
}
