//! Dense numerical kernels: Householder QR for orthogonal projections and
//! least squares, and shifted power iteration for the largest eigenvalue of
//! a symmetric matrix. Projections are always computed through Q factors,
//! never through an explicit pseudo-inverse.

use ndarray::{Array1, ArrayView2};

/// A submitted column set is numerically rank-deficient: pivot `column`
/// (0-based within the set) fell below the relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankDeficient {
    pub column: usize,
}

impl std::fmt::Display for RankDeficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "column set is rank-deficient at column {}", self.column)
    }
}

impl std::error::Error for RankDeficient {}

/// Incremental Householder factorization of a tall column block.
///
/// Columns are pushed and popped stack-wise so that a depth-first sweep over
/// nested column sets pays one reflector per step instead of refactoring the
/// whole block. `qty` holds the observation with all current reflectors
/// applied; the squared projection of the observation onto the column span
/// is the sum of its first `len()` squared entries.
pub struct QrStack {
    m: usize,
    cap: usize,
    /// Column-major reflector storage; column j keeps v_j in rows j..m.
    refl: Vec<f64>,
    /// Upper-triangular factor, column-major; column j keeps R[0..=j][j].
    rcol: Vec<f64>,
    vtv: Vec<f64>,
    qty: Vec<f64>,
    /// Snapshot of `qty` taken just before reflector j was applied.
    qty_save: Vec<f64>,
    /// Running sum of squared norms of the pushed columns.
    fro_sq: Vec<f64>,
    k: usize,
}

impl QrStack {
    pub fn new(y: &[f64], cap: usize) -> Self {
        let m = y.len();
        QrStack {
            m,
            cap,
            refl: vec![0.0; m * cap],
            rcol: vec![0.0; cap * cap],
            vtv: vec![0.0; cap],
            qty: y.to_vec(),
            qty_save: vec![0.0; m * cap],
            fro_sq: vec![0.0; cap + 1],
            k: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// Appends one column. `rtol` scales the rank test: the new diagonal of R
    /// must exceed `rtol * frobenius(all pushed columns)`. On rank failure the
    /// stack is left unchanged.
    pub fn push(&mut self, col: &[f64], rtol: f64) -> Result<(), RankDeficient> {
        assert_eq!(col.len(), self.m, "column length mismatch");
        assert!(self.k < self.cap, "QrStack capacity exceeded");
        let (m, k) = (self.m, self.k);

        let col_sq: f64 = col.iter().map(|v| v * v).sum();
        let mut work = col.to_vec();
        for j in 0..k {
            apply_reflector(&self.refl[j * m..(j + 1) * m], self.vtv[j], j, &mut work);
        }

        // Build the reflector for rows k..m of the transformed column.
        let head = work[k];
        let sigma: f64 = work[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if head >= 0.0 { -sigma } else { sigma };

        let fro = (self.fro_sq[k] + col_sq).sqrt();
        if alpha.abs() <= rtol * fro.max(f64::MIN_POSITIVE) {
            return Err(RankDeficient { column: k });
        }

        let rbase = k * self.cap;
        self.rcol[rbase..rbase + k].copy_from_slice(&work[..k]);
        self.rcol[rbase + k] = alpha;

        let vbase = k * m;
        self.refl[vbase..vbase + k].fill(0.0);
        self.refl[vbase + k..vbase + m].copy_from_slice(&work[k..]);
        self.refl[vbase + k] = head - alpha;
        let vtv: f64 = self.refl[vbase + k..vbase + m].iter().map(|v| v * v).sum();
        self.vtv[k] = vtv;

        self.qty_save[vbase..vbase + m].copy_from_slice(&self.qty);
        apply_reflector(&self.refl[vbase..vbase + m], vtv, k, &mut self.qty);

        self.fro_sq[k + 1] = self.fro_sq[k] + col_sq;
        self.k += 1;
        Ok(())
    }

    /// Removes the most recently pushed column, restoring `qty` exactly.
    pub fn pop(&mut self) {
        assert!(self.k > 0, "pop on empty QrStack");
        self.k -= 1;
        let vbase = self.k * self.m;
        self.qty.copy_from_slice(&self.qty_save[vbase..vbase + self.m]);
    }

    /// Squared norm of the projection of y onto the span of the pushed columns.
    pub fn energy(&self) -> f64 {
        self.qty[..self.k].iter().map(|v| v * v).sum()
    }

    /// Least-squares coefficients for the pushed columns via back substitution.
    pub fn solve(&self) -> Vec<f64> {
        let k = self.k;
        let mut x = self.qty[..k].to_vec();
        for j in (0..k).rev() {
            let rbase = j * self.cap;
            x[j] /= self.rcol[rbase + j];
            let xj = x[j];
            for i in 0..j {
                x[i] -= self.rcol[rbase + i] * xj;
            }
        }
        x
    }

    /// The projection of y onto the span of the pushed columns, i.e. Q1 Q1^T y.
    pub fn projection(&self) -> Array1<f64> {
        let mut z = vec![0.0; self.m];
        z[..self.k].copy_from_slice(&self.qty[..self.k]);
        for j in (0..self.k).rev() {
            apply_reflector(&self.refl[j * self.m..(j + 1) * self.m], self.vtv[j], j, &mut z);
        }
        Array1::from_vec(z)
    }
}

/// u <- (I - 2 v v^T / v^T v) u, where v lives in rows j..m of `v`.
fn apply_reflector(v: &[f64], vtv: f64, j: usize, u: &mut [f64]) {
    if vtv == 0.0 {
        return;
    }
    let dot: f64 = v[j..].iter().zip(&u[j..]).map(|(a, b)| a * b).sum();
    let scale = 2.0 * dot / vtv;
    for (vi, ui) in v[j..].iter().zip(&mut u[j..]) {
        *ui -= scale * vi;
    }
}

/// Largest eigenvalue of a symmetric matrix by power iteration on the
/// diagonally shifted matrix S + cI (Gershgorin shift keeps it positive
/// semidefinite, so the iteration converges to the top of the spectrum).
pub fn max_eigenvalue_symmetric(s: ArrayView2<f64>, rel_tol: f64, max_iter: usize) -> f64 {
    let n = s.nrows();
    assert_eq!(n, s.ncols(), "matrix must be square");
    if n == 0 {
        return 0.0;
    }
    let shift = (0..n)
        .map(|i| s.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    if shift == 0.0 {
        return 0.0;
    }

    // Deterministic start with no structure shared with graph eigenvectors.
    let mut x: Vec<f64> = (0..n)
        .map(|i| 0.5 + ((i.wrapping_mul(2654435761)) % 1000) as f64 / 1000.0)
        .collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut lambda = 0.0_f64;
    for _ in 0..max_iter {
        let mut bx = vec![0.0; n];
        for i in 0..n {
            let row = s.row(i);
            let mut acc = shift * x[i];
            for j in 0..n {
                acc += row[j] * x[j];
            }
            bx[i] = acc;
        }
        let rayleigh: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        let nb = norm(&bx);
        if nb == 0.0 {
            return -shift;
        }
        bx.iter_mut().for_each(|v| *v /= nb);
        x = bx;
        if (rayleigh - lambda).abs() <= rel_tol * rayleigh.abs().max(1.0) {
            return rayleigh - shift;
        }
        lambda = rayleigh;
    }
    lambda - shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn push_all(stack: &mut QrStack, cols: &[Vec<f64>]) -> Result<(), RankDeficient> {
        for c in cols {
            stack.push(c, 1e-10)?;
        }
        Ok(())
    }

    #[test]
    fn single_column_energy_is_squared_cosine() {
        let y = [3.0, -1.0, 0.0, 0.0, 0.0, -1.0];
        let h0 = y.to_vec();
        let mut st = QrStack::new(&y, 2);
        push_all(&mut st, &[h0]).unwrap();
        assert_relative_eq!(st.energy(), 11.0, max_relative = 1e-12);
    }

    #[test]
    fn energy_matches_gram_solve_on_correlated_pair() {
        // Columns of I+L on the path 0-1-2, observation = middle column.
        let h0 = vec![2.0, -1.0, 0.0];
        let h2 = vec![0.0, -1.0, 2.0];
        let y = [-1.0, 3.0, -1.0];
        let mut st = QrStack::new(&y, 2);
        push_all(&mut st, &[h0, h2]).unwrap();
        // Gram system: [[5,1],[1,5]] x = [-5,-5] => x = (-5/6,-5/6),
        // energy = b^T x = 50/6.
        assert_relative_eq!(st.energy(), 50.0 / 6.0, max_relative = 1e-12);
        let x = st.solve();
        assert_relative_eq!(x[0], -5.0 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(x[1], -5.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn pop_restores_prefix_exactly() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let a = vec![1.0, 1.0, 0.0, 0.0];
        let b = vec![0.0, 1.0, 1.0, 0.0];
        let c = vec![0.0, 0.0, 1.0, 1.0];
        let mut st = QrStack::new(&y, 3);
        push_all(&mut st, &[a.clone(), b]).unwrap();
        let e_ab = st.energy();
        st.push(&c, 1e-10).unwrap();
        st.pop();
        assert_eq!(st.energy(), e_ab);
        st.pop();
        st.pop();
        assert_eq!(st.energy(), 0.0);
        st.push(&a, 1e-10).unwrap();
        assert_relative_eq!(st.energy(), 4.5, max_relative = 1e-12);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let y = [1.0, 0.0, 0.0];
        let h = vec![1.0, -1.0, 0.0];
        let mut st = QrStack::new(&y, 2);
        st.push(&h, 1e-10).unwrap();
        let dup: Vec<f64> = h.iter().map(|v| -v).collect();
        let err = st.push(&dup, 1e-10).unwrap_err();
        assert_eq!(err.column, 1);
        assert_eq!(st.len(), 1);
    }

    #[test]
    fn projection_is_idempotent_and_residual_orthogonal() {
        let y = [1.0, -2.0, 0.5, 3.0];
        let cols = vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, -1.0, 2.0]];
        let mut st = QrStack::new(&y, 2);
        push_all(&mut st, &cols).unwrap();
        let p = st.projection();
        let mut st2 = QrStack::new(p.as_slice().unwrap(), 2);
        push_all(&mut st2, &cols).unwrap();
        assert_relative_eq!(st2.energy(), st.energy(), max_relative = 1e-10);
        for c in &cols {
            let resid: f64 = (0..4).map(|i| (y[i] - p[i]) * c[i]).sum();
            assert!(resid.abs() < 1e-8);
        }
    }

    #[test]
    fn power_iteration_on_cycle_laplacian() {
        let l = array![
            [2.0, -1.0, 0.0, 0.0, 0.0, -1.0],
            [-1.0, 2.0, -1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 2.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 2.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0, 2.0, -1.0],
            [-1.0, 0.0, 0.0, 0.0, -1.0, 2.0]
        ];
        let lam = max_eigenvalue_symmetric(l.view(), 1e-10, 10_000);
        assert_relative_eq!(lam, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn power_iteration_on_zero_and_diagonal() {
        let z = ndarray::Array2::<f64>::zeros((4, 4));
        assert_eq!(max_eigenvalue_symmetric(z.view(), 1e-10, 100), 0.0);
        let d = array![[3.0, 0.0], [0.0, -7.0]];
        let lam = max_eigenvalue_symmetric(d.view(), 1e-12, 10_000);
        assert_relative_eq!(lam, 3.0, epsilon = 1e-9);
    }
}
