//! Shared helpers for the integration suites: independent reference
//! implementations (all-pairs distances, symmetric eigenvalues, Gram-solve
//! projection energies) and seeded random generators. Everything here is
//! deliberately written with a different algorithm than the library uses, so
//! agreement is evidence rather than tautology.
#![allow(dead_code)]

use gsr::graph::Graph;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// All-pairs hop distances by Floyd-Warshall (the library uses per-source
/// BFS). `u32::MAX` marks unreachable pairs.
pub fn floyd_warshall_hops(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    const INF: u32 = u32::MAX;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(u, v, _) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                let via = d[i][k].saturating_add(d[k][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= 1e-13 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[[p, q]].abs() <= 1e-15 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[[k, p]];
                    let akq = m[[k, q]];
                    m[[k, p]] = c * akp - s * akq;
                    m[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[[p, k]];
                    let aqk = m[[q, k]];
                    m[[p, k]] = c * apk - s * aqk;
                    m[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// `||P_Omega y||^2` through the normal equations: solve the Gram system
/// `(H_O^T H_O) c = H_O^T y` by Gaussian elimination with partial pivoting
/// and return `c . (H_O^T y)`. `None` when the Gram matrix is singular
/// (relative pivot below 1e-10). The library never forms the Gram matrix,
/// so this is an independent oracle.
pub fn gram_projected_energy(h: &Array2<f64>, omega: &[usize], y: &Array1<f64>) -> Option<f64> {
    let k = omega.len();
    if k == 0 {
        return Some(0.0);
    }
    let mut gram = vec![vec![0.0f64; k]; k];
    let mut rhs = vec![0.0f64; k];
    for (i, &a) in omega.iter().enumerate() {
        rhs[i] = h.column(a).dot(y);
        for (j, &b) in omega.iter().enumerate() {
            gram[i][j] = h.column(a).dot(&h.column(b));
        }
    }
    let rhs0 = rhs.clone();
    let scale = gram
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    let mut c = rhs;
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| {
            gram[a][col].abs().partial_cmp(&gram[b][col].abs()).unwrap()
        })?;
        if gram[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        gram.swap(col, piv);
        c.swap(col, piv);
        for row in col + 1..k {
            let f = gram[row][col] / gram[col][col];
            for j in col..k {
                gram[row][j] -= f * gram[col][j];
            }
            c[row] -= f * c[col];
        }
    }
    for col in (0..k).rev() {
        for j in col + 1..k {
            c[col] -= gram[col][j] * c[j];
        }
        c[col] /= gram[col][col];
    }
    Some(c.iter().zip(rhs0.iter()).map(|(a, b)| a * b).sum())
}

/// Connected random graph: a uniform random spanning tree attachment plus
/// `extra` random non-duplicate edges. Weights drawn from (0.5, 1.5).
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    assert!(n >= 2);
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1 + extra);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.5..1.5)));
    }
    let mut present: std::collections::HashSet<(usize, usize)> =
        edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut tries = 0;
    while present.len() < n - 1 + extra && tries < 50 * (extra + 1) {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if present.insert(key) {
            edges.push((key.0, key.1, rng.gen_range(0.5..1.5)));
        }
    }
    Graph::new(n, edges).expect("construction from generated edges cannot fail")
}

/// Possibly-disconnected random graph: Bernoulli(p) on every pair.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, rng.gen_range(0.5..1.5)));
            }
        }
    }
    Graph::new(n, edges).expect("construction from generated edges cannot fail")
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}
