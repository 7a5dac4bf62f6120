//! Row-major matrix products on top of `matrixmultiply`.

/// Operand layout for [`gemm`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Op {
    N,
    T,
}

/// `c = beta * c + a' b'` where `a'` is `m×k` and `b'` is `k×n`, each stored
/// row-major (transposed when the op is [`Op::T`]).
#[allow(clippy::too_many_arguments)]
pub fn gemm(m: usize, k: usize, n: usize, a: &[f32], op_a: Op, b: &[f32], op_b: Op, beta: f32, c: &mut [f32]) {
    debug_assert!(a.len() >= m * k);
    debug_assert!(b.len() >= k * n);
    debug_assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    let (rsa, csa) = match op_a {
        Op::N => (k as isize, 1),
        Op::T => (1, m as isize),
    };
    let (rsb, csb) = match op_b {
        Op::N => (n as isize, 1),
        Op::T => (1, k as isize),
    };
    // SAFETY: strides describe the `m×k`, `k×n` and `m×n` matrices inside
    // the asserted slice bounds.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Geometry of one SAME-padded 2D convolution from `in` to `out` spatial size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeom {
    pub channels: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad_top: usize,
    pub pad_left: usize,
}

fn same_pad(input: usize, output: usize, kernel: usize, stride: usize) -> usize {
    let total = ((output - 1) * stride + kernel).saturating_sub(input);
    total / 2
}

impl ConvGeom {
    pub fn same(channels: usize, in_h: usize, in_w: usize, kernel: usize, stride: usize) -> Self {
        let out_h = in_h.div_ceil(stride);
        let out_w = in_w.div_ceil(stride);
        ConvGeom {
            channels,
            in_h,
            in_w,
            out_h,
            out_w,
            kernel,
            stride,
            pad_top: same_pad(in_h, out_h, kernel, stride),
            pad_left: same_pad(in_w, out_w, kernel, stride),
        }
    }

    pub fn col_rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn col_cols(&self) -> usize {
        self.out_h * self.out_w
    }

    /// Visits `(col_row, col_col, input_index)` for every in-bounds tap.
    #[inline]
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize)) {
        let k = self.kernel;
        let cols = self.col_cols();
        for c in 0..self.channels {
            for ki in 0..k {
                for kj in 0..k {
                    let row = (c * k + ki) * k + kj;
                    let base = row * cols;
                    for oy in 0..self.out_h {
                        let iy = (oy * self.stride + ki) as isize - self.pad_top as isize;
                        if iy < 0 || iy as usize >= self.in_h {
                            continue;
                        }
                        let in_row = (c * self.in_h + iy as usize) * self.in_w;
                        for ox in 0..self.out_w {
                            let ix = (ox * self.stride + kj) as isize - self.pad_left as isize;
                            if ix < 0 || ix as usize >= self.in_w {
                                continue;
                            }
                            f(base + oy * self.out_w + ox, in_row + ix as usize);
                        }
                    }
                }
            }
        }
    }

    /// Unfolds one `channels×in_h×in_w` sample into a `col_rows×col_cols` matrix.
    pub fn im2col(&self, x: &[f32], col: &mut [f32]) {
        col[..self.col_rows() * self.col_cols()].fill(0.0);
        self.for_each_tap(|ci, xi| col[ci] = x[xi]);
    }

    /// Adjoint of [`im2col`](Self::im2col): accumulates columns back into `x`.
    pub fn col2im(&self, col: &[f32], x: &mut [f32]) {
        self.for_each_tap(|ci, xi| x[xi] += col[ci]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(m: usize, k: usize, n: usize, a: &[f32], b: &[f32]) -> Vec<f32> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for p in 0..k {
                    c[i * n + j] += a[i * k + p] * b[p * n + j];
                }
            }
        }
        c
    }

    fn transpose(rows: usize, cols: usize, a: &[f32]) -> Vec<f32> {
        let mut t = vec![0.0; a.len()];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = a[i * cols + j];
            }
        }
        t
    }

    #[test]
    fn gemm_matches_naive_for_all_ops() {
        let (m, k, n) = (3, 4, 5);
        let a: Vec<f32> = (0..m * k).map(|i| i as f32 * 0.5 - 2.0).collect();
        let b: Vec<f32> = (0..k * n).map(|i| (i % 7) as f32 - 3.0).collect();
        let want = naive(m, k, n, &a, &b);
        let at = transpose(m, k, &a);
        let bt = transpose(k, n, &b);
        for (aa, oa) in [(&a, Op::N), (&at, Op::T)] {
            for (bb, ob) in [(&b, Op::N), (&bt, Op::T)] {
                let mut c = vec![0.0; m * n];
                gemm(m, k, n, aa, oa, bb, ob, 0.0, &mut c);
                assert_eq!(c, want);
            }
        }
    }

    #[test]
    fn same_padding_matches_tf() {
        let g = ConvGeom::same(1, 128, 128, 5, 2);
        assert_eq!((g.out_h, g.pad_top), (64, 1));
        let g = ConvGeom::same(1, 128, 128, 5, 1);
        assert_eq!((g.out_h, g.pad_top), (128, 2));
        let g = ConvGeom::same(1, 7, 7, 5, 2);
        assert_eq!((g.out_h, g.pad_top), (4, 2));
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        let g = ConvGeom::same(2, 6, 5, 5, 2);
        let x: Vec<f32> = (0..2 * 6 * 5).map(|i| ((i * 37) % 11) as f32 - 5.0).collect();
        let y: Vec<f32> = (0..g.col_rows() * g.col_cols()).map(|i| ((i * 13) % 7) as f32 - 3.0).collect();
        let mut col = vec![0.0; y.len()];
        g.im2col(&x, &mut col);
        let lhs: f32 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; x.len()];
        g.col2im(&y, &mut back);
        let rhs: f32 = back.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert_eq!(lhs, rhs);
    }
}
