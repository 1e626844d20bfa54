//! Integer and rational linear algebra on small dense matrices.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type IMat = Vec<Vec<BigInt>>;

pub fn to_big(m: &[Vec<i64>]) -> IMat {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

pub fn to_i64(m: &IMat) -> Vec<Vec<i64>> {
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i64().expect("entry fits in i64"))
                .collect()
        })
        .collect()
}

fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Smith normal form `U * A * V = D` with `U`, `V` unimodular.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IMat,
    pub v: IMat,
    pub d: IMat,
    /// Nonzero diagonal entries, each dividing the next.
    pub diagonal: Vec<BigInt>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

/// Smith normal form of an `r x c` integer matrix.
pub fn smith(a: &IMat, cols: usize) -> Smith {
    let rows = a.len();
    let mut d = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let swap_rows = |d: &mut IMat, u: &mut IMat, i: usize, j: usize| {
        d.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |d: &mut IMat, v: &mut IMat, i: usize, j: usize| {
        for r in d.iter_mut() {
            r.swap(i, j);
        }
        for r in v.iter_mut() {
            r.swap(i, j);
        }
    };
    // row_i -= q * row_j
    let row_op = |d: &mut IMat, u: &mut IMat, i: usize, j: usize, q: &BigInt| {
        for k in 0..cols {
            let t = &d[j][k] * q;
            d[i][k] -= t;
        }
        for k in 0..rows {
            let t = &u[j][k] * q;
            u[i][k] -= t;
        }
    };
    // col_i -= q * col_j
    let col_op = |d: &mut IMat, v: &mut IMat, i: usize, j: usize, q: &BigInt| {
        for r in d.iter_mut() {
            let t = &r[j] * q;
            r[i] -= t;
        }
        for r in v.iter_mut() {
            let t = &r[j] * q;
            r[i] -= t;
        }
    };

    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows(&mut d, &mut u, t, pi);
        swap_cols(&mut d, &mut v, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !d[i][t].is_zero() {
                    let q = d[i][t].div_floor(&d[t][t]);
                    row_op(&mut d, &mut u, i, t, &q);
                    if !d[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !d[t][j].is_zero() {
                    let q = d[t][j].div_floor(&d[t][t]);
                    col_op(&mut d, &mut v, j, t, &q);
                    if !d[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // move the smallest remaining entry of row/column t to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !d[i][t].is_zero() && d[i][t].abs() < d[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !d[t][j].is_zero() && d[t][j].abs() < d[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    swap_rows(&mut d, &mut u, t, best.0);
                }
                if best.1 != t {
                    swap_cols(&mut d, &mut v, t, best.1);
                }
                continue;
            }
            // divisibility of the trailing block
            let mut bad = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&d[i][j] % &d[t][t]).is_zero() {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    let m1 = -BigInt::one();
                    row_op(&mut d, &mut u, t, i, &m1);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for k in 0..cols {
                d[t][k] = -&d[t][k];
            }
            for k in 0..rows {
                u[t][k] = -&u[t][k];
            }
        }
        t += 1;
    }
    let diagonal = (0..rows.min(cols))
        .map(|i| d[i][i].clone())
        .take_while(|x| !x.is_zero())
        .collect();
    Smith { u, v, d, diagonal }
}

/// Matrix with the given vectors as columns.
pub fn columns(vectors: &[Vec<i64>], n: usize) -> IMat {
    (0..n)
        .map(|i| vectors.iter().map(|c| BigInt::from(c[i])).collect())
        .collect()
}

/// Invariant factors `> 1` and free rank of `Z^n / span(gens)`.
pub fn quotient_structure(gens: &[Vec<i64>], n: usize) -> (Vec<BigInt>, usize) {
    if gens.is_empty() {
        return (Vec::new(), n);
    }
    let s = smith(&columns(gens, n), gens.len());
    let torsion = s.diagonal.iter().filter(|d| !d.is_one()).cloned().collect();
    (torsion, n - s.rank())
}

/// A Z-basis of `{x in Z^c : A x = 0}` for `A` given by rows.
pub fn integer_kernel(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    if rows.is_empty() {
        return (0..cols)
            .map(|i| (0..cols).map(|j| i64::from(i == j)).collect())
            .collect();
    }
    let s = smith(&to_big(rows), cols);
    let r = s.rank();
    (r..cols)
        .map(|j| {
            (0..cols)
                .map(|i| s.v[i][j].to_i64().expect("kernel entry fits in i64"))
                .collect()
        })
        .collect()
}

/// Integer coefficients `x` with `sum x_i gens_i = target`, if any.
pub fn solve_integer(gens: &[Vec<i64>], target: &[i64]) -> Option<Vec<i64>> {
    let n = target.len();
    if gens.is_empty() {
        return target.iter().all(|&x| x == 0).then(Vec::new);
    }
    let k = gens.len();
    let s = smith(&columns(gens, n), k);
    let b: Vec<BigInt> = (0..n)
        .map(|i| (0..n).map(|j| &s.u[i][j] * BigInt::from(target[j])).sum())
        .collect();
    let r = s.rank();
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut y = vec![BigInt::zero(); k];
    for i in 0..r {
        let (q, rem) = b[i].div_rem(&s.diagonal[i]);
        if !rem.is_zero() {
            return None;
        }
        y[i] = q;
    }
    Some(
        (0..k)
            .map(|i| {
                let x: BigInt = (0..k).map(|j| &s.v[i][j] * &y[j]).sum();
                x.to_i64().expect("solution fits in i64")
            })
            .collect(),
    )
}

fn to_rat(rows: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form; returns pivot columns.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m = to_rat(rows);
    rref(&mut m).len()
}

/// Whether `v` lies in the rational span of `rows`.
pub fn in_rational_span(rows: &[Vec<i64>], v: &[i64]) -> bool {
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(rows) == rank(&ext)
}

/// Coordinates of `v` in a linearly independent family, if it lies in its span.
pub fn rational_coordinates(basis: &[Vec<i64>], v: &[i64]) -> Option<Vec<BigRational>> {
    let n = v.len();
    let k = basis.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            basis
                .iter()
                .map(|b| b[i])
                .chain(std::iter::once(v[i]))
                .map(|x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&k) || pivots.len() < k {
        return None;
    }
    Some((0..k).map(|r| m[r][k].clone()).collect())
}

/// A rational basis of `{x : A x = 0}`, scaled to primitive integer vectors.
pub fn rational_nullspace(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    let mut m = to_rat(rows);
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -m[r][f].clone();
            }
            let den = x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let ints: Vec<BigInt> = x.iter().map(|q| q.numer() * (&den / q.denom())).collect();
            let g = ints.iter().fold(BigInt::zero(), |acc, z| acc.gcd(z));
            ints.iter()
                .map(|z| (z / &g).to_i64().expect("nullspace entry fits in i64"))
                .collect()
        })
        .collect()
}

/// Integer matrix inverse, when the matrix is unimodular.
pub fn unimodular_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = to_rat(m);
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..n).map(|j| {
            if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }));
    }
    let pivots = rref(&mut a);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let x = &a[i][n + j];
            if !x.is_integer() {
                return None;
            }
            out[i][j] = x.to_integer().to_i64()?;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mul(a: &IMat, b: &IMat) -> IMat {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|r| {
                (0..cols)
                    .map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn gl2_lambda_quotient() {
        let (t, free) = quotient_structure(&[vec![1, -1], vec![1, 1]], 2);
        assert_eq!(t, vec![BigInt::from(2)]);
        assert_eq!(free, 0);
    }

    #[test]
    fn kernel_of_gl3_roots() {
        let k = integer_kernel(&[vec![1, -1, 0], vec![0, 1, -1]], 3);
        assert_eq!(k.len(), 1);
        assert!(k[0] == vec![1, 1, 1] || k[0] == vec![-1, -1, -1]);
    }

    #[test]
    fn nullspace_and_span() {
        let ns = rational_nullspace(&[vec![1, -1, 0]], 3);
        assert_eq!(ns.len(), 2);
        assert!(in_rational_span(&[vec![1, -1, 0]], &[-2, 2, 0]));
        assert!(!in_rational_span(&[vec![1, -1, 0]], &[1, 0, -1]));
    }

    #[test]
    fn integer_solutions() {
        assert_eq!(solve_integer(&[vec![2]], &[3]), None);
        assert_eq!(solve_integer(&[vec![2]], &[4]), Some(vec![2]));
        assert_eq!(
            unimodular_inverse(&[vec![2, 1], vec![1, 1]]),
            Some(vec![vec![1, -1], vec![-1, 2]])
        );
        assert_eq!(unimodular_inverse(&[vec![2, 0], vec![0, 1]]), None);
    }

    proptest! {
        #[test]
        fn smith_is_a_valid_factorization(
            entries in prop::collection::vec(-6i64..=6, 12),
            shape in 0usize..3,
        ) {
            let (r, c) = [(3, 4), (4, 3), (2, 6)][shape];
            let a: Vec<Vec<i64>> = (0..r).map(|i| entries[i * c..(i + 1) * c].to_vec()).collect();
            let s = smith(&to_big(&a), c);
            prop_assert_eq!(mul(&mul(&s.u, &to_big(&a)), &s.v), s.d.clone());
            for i in 0..r {
                for j in 0..c {
                    if i != j {
                        prop_assert!(s.d[i][j].is_zero());
                    }
                }
            }
            for w in s.diagonal.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
            prop_assert_eq!(s.rank(), rank(&a));
            for k in integer_kernel(&a, c) {
                for row in &a {
                    prop_assert_eq!(row.iter().zip(&k).map(|(x, y)| x * y).sum::<i64>(), 0);
                }
            }
        }
    }
}
