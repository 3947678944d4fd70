//! Exact integer matrix routines: Hermite normal form, Smith invariants,
//! integer kernels. Entries are `i64` at the interface and `i128` inside.

pub type IntMatrix = Vec<Vec<i64>>;

fn widen(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn narrow(m: Vec<Vec<i128>>) -> IntMatrix {
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| i64::try_from(x).expect("integer entry overflows i64"))
                .collect()
        })
        .collect()
}

fn ncols(m: &[Vec<i128>]) -> usize {
    m.first().map_or(0, |r| r.len())
}

/// `det [a b]` for column vectors `a`, `b` in `Z²`.
pub fn det2(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn row_sub(m: &mut [Vec<i128>], dst: usize, src: usize, q: i128) {
    if q == 0 {
        return;
    }
    let src_row = m[src].clone();
    for (d, s) in m[dst].iter_mut().zip(src_row) {
        *d -= q * s;
    }
}

/// Row-style Hermite normal form with the unimodular transform: returns
/// `(h, u)` with `u · m = h`. Pivots are positive and entries above a pivot lie
/// in `[0, pivot)`. Zero rows of `h` are kept at the bottom.
fn hnf_with_transform(m: &[Vec<i64>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let mut a = widen(m);
    let rows = a.len();
    let cols = ncols(&a);
    let mut u: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..rows).map(|j| i128::from(i == j)).collect())
        .collect();

    let mut pivot = 0;
    for col in 0..cols {
        if pivot == rows {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below the pivot row
            let best = (pivot..rows)
                .filter(|&r| a[r][col] != 0)
                .min_by_key(|&r| a[r][col].abs());
            let Some(best) = best else { break };
            a.swap(pivot, best);
            u.swap(pivot, best);
            let p = a[pivot][col];
            let mut done = true;
            for r in pivot + 1..rows {
                let q = a[r][col].div_euclid(p);
                row_sub(&mut a, r, pivot, q);
                row_sub(&mut u, r, pivot, q);
                if a[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[pivot][col] == 0 {
            continue;
        }
        if a[pivot][col] < 0 {
            for x in a[pivot].iter_mut() {
                *x = -*x;
            }
            for x in u[pivot].iter_mut() {
                *x = -*x;
            }
        }
        let p = a[pivot][col];
        for r in 0..pivot {
            let q = a[r][col].div_euclid(p);
            row_sub(&mut a, r, pivot, q);
            row_sub(&mut u, r, pivot, q);
        }
        pivot += 1;
    }
    (a, u)
}

/// Hermite normal form of the row lattice, zero rows dropped.
pub fn hnf(m: &[Vec<i64>]) -> IntMatrix {
    let (h, _) = hnf_with_transform(m);
    narrow(h.into_iter().filter(|r| r.iter().any(|&x| x != 0)).collect())
}

pub fn rank(m: &[Vec<i64>]) -> usize {
    hnf(m).len()
}

/// Basis of `{d ∈ Z^n : m · d = 0}` as rows, canonicalized by HNF. The basis
/// is saturated: it comes from a unimodular transform.
pub fn integer_kernel(m: &[Vec<i64>]) -> IntMatrix {
    let n = m.first().map_or(0, |r| r.len());
    // transpose: rows indexed by the n coordinates
    let t: IntMatrix = (0..n).map(|j| m.iter().map(|r| r[j]).collect()).collect();
    let (h, u) = hnf_with_transform(&t);
    let kernel: IntMatrix = narrow(
        h.iter()
            .zip(u)
            .filter(|(hr, _)| hr.iter().all(|&x| x == 0))
            .map(|(_, ur)| ur)
            .collect(),
    );
    if kernel.is_empty() {
        return kernel;
    }
    hnf(&kernel)
}

/// Nonzero Smith invariant factors `d_1 | d_2 | …`, all positive.
pub fn smith_invariants(m: &[Vec<i64>]) -> Vec<i64> {
    let mut a = widen(m);
    let rows = a.len();
    let cols = ncols(&a);
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let mut pos = None;
        let mut best = i128::MAX;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 && x.abs() < best {
                    best = x.abs();
                    pos = Some((i, j));
                }
            }
        }
        let Some((i, j)) = pos else { break };
        a.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        loop {
            let p = a[t][t];
            let mut clean = true;
            for r in t + 1..rows {
                let q = a[r][t].div_euclid(p);
                row_sub(&mut a, r, t, q);
                if a[r][t] != 0 {
                    clean = false;
                }
            }
            for c in t + 1..cols {
                let q = a[t][c].div_euclid(p);
                if q != 0 {
                    for row in a.iter_mut() {
                        row[c] -= q * row[t];
                    }
                }
                if a[t][c] != 0 {
                    clean = false;
                }
            }
            if clean {
                // divisibility of the remaining block
                let bad = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| a[r][c] % p != 0));
                match bad {
                    Some(r) => {
                        let src = a[r].clone();
                        for (d, s) in a[t].iter_mut().zip(src) {
                            *d += s;
                        }
                    }
                    None => break,
                }
            }
            // move the smallest nonzero entry of row t / column t to the pivot
            let mut best = (a[t][t].abs(), t, t);
            for r in t + 1..rows {
                if a[r][t] != 0 && a[r][t].abs() < best.0 {
                    best = (a[r][t].abs(), r, t);
                }
            }
            for c in t + 1..cols {
                if a[t][c] != 0 && (best.0 == 0 || a[t][c].abs() < best.0) {
                    best = (a[t][c].abs(), t, c);
                }
            }
            let (_, r, c) = best;
            a.swap(t, r);
            for row in a.iter_mut() {
                row.swap(t, c);
            }
        }
        out.push(i64::try_from(a[t][t].abs()).expect("invariant factor overflows i64"));
    }
    out
}

/// Index of the lattice spanned by the rows of `m` inside `Z^n`, or `None`
/// when the rows do not span a full-rank sublattice.
pub fn lattice_index(m: &[Vec<i64>]) -> Option<i64> {
    let n = m.first().map_or(0, |r| r.len());
    let inv = smith_invariants(m);
    (inv.len() == n).then(|| inv.iter().product())
}

/// Matrix product `a · bᵀ` (rows of `a` against rows of `b`).
pub fn mul_transpose(a: &[Vec<i64>], b: &[Vec<i64>]) -> IntMatrix {
    a.iter()
        .map(|ra| {
            b.iter()
                .map(|rb| ra.iter().zip(rb).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}
