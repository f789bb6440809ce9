//! Small-integer linear algebra: gcds, exact determinants, column echelon
//! forms. Sizes here are at most 2n x 2n with n tiny, so everything is done
//! with `i128` and naive loops.

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a as i64
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn is_primitive(coords: &[i64]) -> bool {
    coords.iter().fold(0, |g, &c| gcd(g, c)) == 1
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Integer rank (over Q) by fraction-free elimination.
pub fn rank(m: &[Vec<i64>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(p, r);
        for i in r + 1..rows {
            if a[i][c] != 0 {
                let (x, y) = (a[r][c], a[i][c]);
                for j in 0..cols {
                    a[i][j] = a[i][j] * x - a[r][j] * y;
                }
                let g = a[i].iter().fold(0i128, |g, &v| {
                    let (g, _, _) = ext_gcd(g, v);
                    g
                });
                if g > 1 {
                    a[i].iter_mut().for_each(|v| *v /= g);
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Lower-triangular column echelon form `T = M U` with `U` unimodular and a
/// positive diagonal (for full-rank square `M`). Returns `(T, U)`.
pub fn column_echelon(m: &[Vec<i64>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut t: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();

    // Apply [[x, -b/g], [y, a/g]] to columns (p, q): new p gets gcd, new q gets 0.
    let combine = |mat: &mut Vec<Vec<i128>>, p: usize, q: usize, c: [i128; 4]| {
        for row in mat.iter_mut() {
            let (vp, vq) = (row[p], row[q]);
            row[p] = vp * c[0] + vq * c[1];
            row[q] = vp * c[2] + vq * c[3];
        }
    };

    let mut pivot_col = 0;
    for r in 0..rows {
        if pivot_col >= cols {
            break;
        }
        for q in pivot_col + 1..cols {
            let (a, b) = (t[r][pivot_col], t[r][q]);
            if b == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a, b);
            let c = [x, y, -b / g, a / g];
            combine(&mut t, pivot_col, q, c);
            combine(&mut u, pivot_col, q, c);
        }
        if t[r][pivot_col] == 0 {
            continue;
        }
        if t[r][pivot_col] < 0 {
            for row in t.iter_mut() {
                row[pivot_col] = -row[pivot_col];
            }
            for row in u.iter_mut() {
                row[pivot_col] = -row[pivot_col];
            }
        }
        pivot_col += 1;
    }
    (t, u)
}
