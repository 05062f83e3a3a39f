//! Thin safe wrappers over `matrixmultiply::dgemm` for row-major slices.

/// `out (m×n) = beta·out + a (m×k) · bᵀ` where `b` is stored `n×k`.
pub(crate) fn matmul_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64], beta: f64) {
    assert!(a.len() >= m * k && b.len() >= n * k && out.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: bounds checked above; strides describe row-major a, transposed b, row-major out.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), 1, k as isize,
            beta,
            out.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `out (m×n) = beta·out + a (m×k) · b (k×n)`.
pub(crate) fn matmul_nn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64], beta: f64) {
    assert!(a.len() >= m * k && b.len() >= k * n && out.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: bounds checked above.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), n as isize, 1,
            beta,
            out.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// `out (k×n) += aᵀ · b` where `a` is `m×k` and `b` is `m×n`.
pub(crate) fn matmul_tn_acc(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    assert!(a.len() >= m * k && b.len() >= m * n && out.len() >= k * n);
    if k == 0 || n == 0 {
        return;
    }
    // SAFETY: bounds checked above.
    unsafe {
        matrixmultiply::dgemm(
            k, m, n, 1.0,
            a.as_ptr(), 1, k as isize,
            b.as_ptr(), n as isize, 1,
            1.0,
            out.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// Adds each row of `m×n` matrix `a` into `out` (length `n`).
pub(crate) fn col_sum_acc(m: usize, n: usize, a: &[f64], out: &mut [f64]) {
    for row in a[..m * n].chunks_exact(n) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// Broadcasts `bias` (length `n`) into every row of `out` (`m×n`).
pub(crate) fn fill_rows(m: usize, n: usize, bias: &[f64], out: &mut [f64]) {
    for row in out[..m * n].chunks_exact_mut(n) {
        row.copy_from_slice(&bias[..n]);
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_naive() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2×3
        let b = [1.0, 0.0, -1.0, 2.0, 1.0, 0.5]; // 2×3 (as n×k) or 3×2 (as k×n)
        let mut out = [0.0; 4];
        matmul_nt(2, 3, 2, &a, &b, &mut out, 0.0);
        assert_eq!(out, [-2.0, 5.5, -2.0, 16.0]);

        let mut out = [0.0; 4];
        matmul_nn(2, 3, 2, &a, &b, &mut out, 0.0);
        // b as 3×2: [[1,0],[-1,2],[1,0.5]]
        assert_eq!(out, [2.0, 5.5, 5.0, 13.0]);

        let mut out = [1.0; 9];
        matmul_tn_acc(2, 3, 3, &a, &b, &mut out);
        // aᵀ (3×2) · b (2×3)
        let expect = [
            1.0 + 1.0 * 1.0 + 4.0 * 2.0,
            1.0 + 1.0 * 0.0 + 4.0 * 1.0,
            1.0 + 1.0 * -1.0 + 4.0 * 0.5,
            1.0 + 2.0 * 1.0 + 5.0 * 2.0,
            1.0 + 2.0 * 0.0 + 5.0 * 1.0,
            1.0 + 2.0 * -1.0 + 5.0 * 0.5,
            1.0 + 3.0 * 1.0 + 6.0 * 2.0,
            1.0 + 3.0 * 0.0 + 6.0 * 1.0,
            1.0 + 3.0 * -1.0 + 6.0 * 0.5,
        ];
        assert_eq!(out, expect);
    }
}
