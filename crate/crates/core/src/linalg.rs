//! Small exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Row-reduces `rows` in place and returns the pivot columns.
fn row_reduce(rows: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRational::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..rows[i].len() {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect();
    row_reduce(&mut m, ncols).len()
}

/// Unique solution of `a x = b` (a given by rows), or `None` when the
/// system is inconsistent or underdetermined.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut m, ncols + 1);
    if pivots.contains(&ncols) || pivots.len() != ncols {
        return None;
    }
    Some((0..ncols).map(|i| m[i][ncols].clone()).collect())
}

/// Integer left inverse of the m×r matrix whose columns are `cols`:
/// returns `(p, d)` with `p · col_j = d · e_j`.
pub fn integer_left_inverse(cols: &[Vec<i64>], m: usize) -> Option<(Vec<Vec<i64>>, i64)> {
    let r = cols.len();
    if r == 0 {
        return Some((Vec::new(), 1));
    }
    // choose r independent coordinates
    let rows: Vec<Vec<i64>> = (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let mut chosen = Vec::new();
    for i in 0..m {
        let mut trial: Vec<Vec<i64>> = chosen.iter().map(|&k: &usize| rows[k].clone()).collect();
        trial.push(rows[i].clone());
        if rank(&trial) == trial.len() {
            chosen.push(i);
        }
        if chosen.len() == r {
            break;
        }
    }
    if chosen.len() < r {
        return None;
    }
    // invert the r×r submatrix
    let mut aug: Vec<Vec<BigRational>> = chosen
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut row: Vec<BigRational> = rows[i].iter().map(|&x| rat(x)).collect();
            row.extend((0..r).map(|j| if j == k { rat(1) } else { rat(0) }));
            row
        })
        .collect();
    row_reduce(&mut aug, r);
    let inv: Vec<Vec<BigRational>> = aug.iter().map(|row| row[r..].to_vec()).collect();
    let mut d = BigInt::one();
    for row in &inv {
        for x in row {
            d = num_integer::Integer::lcm(&d, x.denom());
        }
    }
    let dr = BigRational::from_integer(d.clone());
    let mut p = vec![vec![0i64; m]; r];
    for (a, row) in inv.iter().enumerate() {
        for (b, x) in row.iter().enumerate() {
            let v = (x * &dr).to_integer();
            p[a][chosen[b]] = i64::try_from(v).ok()?;
        }
    }
    Some((p, i64::try_from(d).ok()?))
}
