//! Dense coordinate tensors and small jet-valued linear algebra.

use super::jet::Jet;

/// A rank-`rank` tensor on a `dim`-dimensional chart, all indices ranging
/// over `0..dim`, stored row-major (first index slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Tensor<T> {
    pub fn filled(dim: usize, rank: usize, value: T) -> Tensor<T> {
        Tensor { dim, rank, data: vec![value; dim.pow(rank as u32)] }
    }

    pub fn from_vec(dim: usize, rank: usize, data: Vec<T>) -> Tensor<T> {
        assert_eq!(data.len(), dim.pow(rank as u32), "tensor data length mismatch");
        Tensor { dim, rank, data }
    }

    pub fn offset(&self, ix: &[usize]) -> usize {
        debug_assert_eq!(ix.len(), self.rank);
        ix.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, ix: &[usize]) -> &T {
        &self.data[self.offset(ix)]
    }

    pub fn set(&mut self, ix: &[usize], value: T) {
        let o = self.offset(ix);
        self.data[o] = value;
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().map(f).collect() }
    }
}

impl Tensor<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Tensor<f64>) -> Tensor<f64> {
        assert_eq!(self.data.len(), other.data.len());
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        assert_eq!(self.rank, 2, "matrix() needs a rank-2 tensor");
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Tensor<Jet> {
    pub fn values(&self) -> Tensor<f64> {
        self.map(Jet::value)
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }
}

/// Iterates over all multi-indices of length `rank` in `0..dim`, row-major.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut ix = vec![0; rank];
        for slot in (0..rank).rev() {
            ix[slot] = flat % dim;
            flat /= dim;
        }
        ix
    })
}

/// Sign of the permutation taking `ix` to sorted order; 0 on repeated entries.
pub fn permutation_sign(ix: &[usize]) -> i32 {
    let mut sign = 1;
    for a in 0..ix.len() {
        for b in (a + 1)..ix.len() {
            if ix[a] == ix[b] {
                return 0;
            }
            if ix[a] > ix[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Strictly increasing index tuples of length `k` from `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Inverse of an `m×m` jet matrix by Gauss–Jordan elimination with partial
/// pivoting on the base values. `None` if a pivot vanishes.
pub fn jet_inverse(a: &[Jet], m: usize) -> Option<Vec<Jet>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let mut work: Vec<Jet> = a.to_vec();
    let zero = a[0].lift(0.0).truncate(a.iter().map(Jet::order).min().unwrap_or(0));
    let one = &zero + 1.0;
    let mut inv: Vec<Jet> = (0..m * m).map(|k| if k / m == k % m { one.clone() } else { zero.clone() }).collect();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| work[i * m + col].value().abs().total_cmp(&work[j * m + col].value().abs()))?;
        if work[pivot * m + col].value().abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..m {
                work.swap(pivot * m + k, col * m + k);
                inv.swap(pivot * m + k, col * m + k);
            }
        }
        let r = work[col * m + col].recip();
        for k in 0..m {
            work[col * m + k] = &work[col * m + k] * &r;
            inv[col * m + k] = &inv[col * m + k] * &r;
        }
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = work[row * m + col].clone();
            if factor.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for k in 0..m {
                work[row * m + k] = &work[row * m + k] - &(&factor * &work[col * m + k]);
                inv[row * m + k] = &inv[row * m + k] - &(&factor * &inv[col * m + k]);
            }
        }
    }
    Some(inv)
}

/// Determinant of an `m×m` jet matrix by elimination.
pub fn jet_determinant(a: &[Jet], m: usize, like: &Jet) -> Jet {
    if m == 0 {
        return like.lift(1.0);
    }
    let mut work: Vec<Jet> = a.to_vec();
    let mut det = a[0].lift(1.0).truncate(a.iter().map(Jet::order).min().unwrap_or(0));
    for col in 0..m {
        let pivot =
            (col..m).max_by(|&i, &j| work[i * m + col].value().abs().total_cmp(&work[j * m + col].value().abs())).expect("nonempty range");
        if work[pivot * m + col].value() == 0.0 {
            return &det * 0.0;
        }
        if pivot != col {
            for k in 0..m {
                work.swap(pivot * m + k, col * m + k);
            }
            det = -det;
        }
        det = &det * &work[col * m + col];
        let r = work[col * m + col].recip();
        for row in (col + 1)..m {
            let factor = &work[row * m + col] * &r;
            for k in col..m {
                work[row * m + k] = &work[row * m + k] - &(&factor * &work[col * m + k]);
            }
        }
    }
    det
}

/// Largest eigenvalue magnitude of the symmetric tensor `e` measured against
/// the (possibly indefinite) metric `g`: with `g = Q D Qᵀ`, the spectral radius
/// of `|D|^{-1/2} Qᵀ e Q |D|^{-1/2}`. Equals the `g`-operator norm when `g > 0`.
pub fn operator_norm(g: &nalgebra::DMatrix<f64>, e: &nalgebra::DMatrix<f64>) -> f64 {
    let eig = g.clone().symmetric_eigen();
    let scale = eig.eigenvalues.map(|d| 1.0 / d.abs().sqrt());
    let q = &eig.eigenvectors;
    let mut s = q.transpose() * e * q;
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            s[(i, j)] *= scale[i] * scale[j];
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    s.symmetric_eigen().eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest component of a covariant tensor in a `g`-orthonormal frame
/// (`e_a = Q|D|^{-1/2}` from `g = Q D Qᵀ`). Invariant under constant rescaling
/// of the tensor's weight together with `g`, unlike raw components.
pub fn frame_max_abs(g: &nalgebra::DMatrix<f64>, t: &Tensor<f64>) -> f64 {
    let m = t.dim;
    let eig = g.clone().symmetric_eigen();
    let frame = nalgebra::DMatrix::from_fn(m, m, |i, a| eig.eigenvectors[(i, a)] / eig.eigenvalues[a].abs().sqrt());
    let mut data = t.data.clone();
    let total = data.len();
    for slot in 0..t.rank {
        let stride = m.pow((t.rank - 1 - slot) as u32);
        let mut next = vec![0.0; total];
        for (off, out) in next.iter_mut().enumerate() {
            let a = (off / stride) % m;
            let base = off - a * stride;
            *out = (0..m).map(|i| frame[(i, a)] * data[base + i * stride]).sum();
        }
        data = next;
    }
    data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
