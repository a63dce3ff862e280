//! Dense LU factorisation with partial pivoting, row-major storage.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub column: usize,
    pub pivot: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

/// Factors `PA = LU` in place. A pivot whose magnitude falls below
/// `rel_floor * max|a_ij|` is reported as singular.
pub fn lu_factor(mut a: Vec<f64>, n: usize, rel_floor: f64) -> Result<LuFactors, SingularPivot> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = rel_floor * scale;
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot) =
            (k..n).map(|i| (i, a[i * n + k])).max_by(|x, y| x.1.abs().total_cmp(&y.1.abs())).expect("nonempty column");
        if pivot.is_nan() || pivot.abs() < threshold || pivot == 0.0 {
            return Err(SingularPivot { column: k, pivot, threshold });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let (head, tail) = a.split_at_mut((k + 1) * n);
        let row_k = &head[k * n..];
        for row_i in tail.chunks_exact_mut(n) {
            let l = row_i[k] / pivot;
            if l == 0.0 {
                continue;
            }
            row_i[k] = l;
            for (x, y) in row_i[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                *x -= l * y;
            }
        }
    }
    Ok(LuFactors { n, lu: a, perm })
}

impl LuFactors {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }
}
