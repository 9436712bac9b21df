//! Dense row-major storage and the few linear-algebra kernels the networks
//! need.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A rank-1 or rank-2 block of `f64` values; vectors have `rows == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn fill(&mut self, x: f64) {
        self.data.iter_mut().for_each(|v| *v = x);
    }
}

/// A trainable tensor with its gradient and Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor,
    pub grad: Tensor,
    pub m: Tensor,
    pub v: Tensor,
    pub step: u64,
}

impl Param {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            value: Tensor::zeros(rows, cols),
            grad: Tensor::zeros(rows, cols),
            m: Tensor::zeros(rows, cols),
            v: Tensor::zeros(rows, cols),
            step: 0,
        }
    }

    /// Weights drawn uniformly from `+-sqrt(6 / (rows + cols))`.
    pub fn glorot(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(rows, cols);
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        for w in &mut p.value.data {
            *w = rng.gen_range(-limit..limit);
        }
        p
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Dot product with four independent accumulators so the loop vectorises.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y = W x + b` for a row-major `W` with `y.len()` rows and `x.len()` columns.
pub fn affine(w: &[f64], b: &[f64], x: &[f64], y: &mut [f64]) {
    let cols = x.len();
    debug_assert_eq!(w.len(), y.len() * cols);
    for (r, out) in y.iter_mut().enumerate() {
        *out = b[r] + dot(&w[r * cols..(r + 1) * cols], x);
    }
}

/// `y += W^T x` for a row-major `W` with `x.len()` rows; only the first
/// `y.len()` columns of each row (row stride `stride`) are used.
pub fn add_transposed(w: &[f64], stride: usize, x: &[f64], y: &mut [f64]) {
    for (r, &xr) in x.iter().enumerate() {
        if xr == 0.0 {
            continue;
        }
        let row = &w[r * stride..r * stride + y.len()];
        for (out, &wv) in y.iter_mut().zip(row) {
            *out += xr * wv;
        }
    }
}

/// A strided matrix view for [`gemm`]: element `(i, j)` is at
/// `data[i * rs + j * cs]`.
#[derive(Clone, Copy)]
pub struct View<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub rs: usize,
    pub cs: usize,
}

impl<'a> View<'a> {
    pub fn row_major(data: &'a [f64], rows: usize, cols: usize) -> Self {
        Self {
            data,
            rows,
            cols,
            rs: cols,
            cs: 1,
        }
    }

    /// Columns `start..start + cols` of a row-major matrix with `stride` columns.
    pub fn columns(data: &'a [f64], rows: usize, stride: usize, start: usize, cols: usize) -> Self {
        Self {
            data: &data[start.min(data.len())..],
            rows,
            cols,
            rs: stride,
            cs: 1,
        }
    }

    pub fn t(self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            ..self
        }
    }

    fn fits(&self) -> bool {
        self.rows == 0 || self.cols == 0 || (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// `C = beta * C + A B`, where `C` is row-major `a.rows x b.cols` with row
/// stride `c_stride`.
pub fn gemm(a: View, b: View, beta: f64, c: &mut [f64], c_stride: usize) {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    assert!(a.fits() && b.fits(), "view exceeds its buffer");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return;
    }
    assert!((m - 1) * c_stride + n <= c.len(), "output exceeds its buffer");
    if k == 0 {
        for i in 0..m {
            c[i * c_stride..i * c_stride + n].iter_mut().for_each(|x| *x *= beta);
        }
        return;
    }
    // SAFETY: every index touched by dgemm is bounds-checked above: the
    // views cover (rows-1)*rs + (cols-1)*cs and C covers (m-1)*stride + n.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            c_stride as isize,
            1,
        );
    }
}
