//! Small dense-vector kernels used on embedding rows.
//!
//! The reductions use eight independent accumulators so the compiler can
//! keep them in SIMD registers. Summation order is fixed, which keeps
//! single-threaded training bit-reproducible.

const LANES: usize = 8;

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let xs = a.chunks_exact(LANES);
    let ys = b[..a.len()].chunks_exact(LANES);
    let (x_tail, y_tail) = (xs.remainder(), ys.remainder());
    let mut acc = [0f32; LANES];
    for (x, y) in xs.zip(ys) {
        for lane in 0..LANES {
            acc[lane] += x[lane] * y[lane];
        }
    }
    let mut sum = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in x_tail.iter().zip(y_tail) {
        sum += x * y;
    }
    sum
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    debug_assert_eq!(x.len(), y.len());
    for (y, x) in y.iter_mut().zip(x) {
        *y += alpha * x;
    }
}

/// `grad += g * out; out += g * input`, in one pass over `out`.
#[inline]
pub fn exchange(g: f32, out: &mut [f32], input: &[f32], grad: &mut [f32]) {
    debug_assert!(out.len() == input.len() && out.len() == grad.len());
    for ((o, x), acc) in out.iter_mut().zip(input).zip(grad.iter_mut()) {
        *acc += g * *o;
        *o += g * x;
    }
}

#[inline]
pub fn add_assign(y: &mut [f32], x: &[f32]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += x;
    }
}

pub fn l2_norm(a: &[f32]) -> f32 {
    dot(a, a).sqrt()
}

/// Scale to unit length; zero vectors are left untouched.
pub fn normalize(a: &mut [f32]) {
    let norm = l2_norm(a);
    if norm > 0.0 {
        a.iter_mut().for_each(|x| *x /= norm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        for len in [0, 1, 7, 8, 9, 31, 32, 33, 40, 200, 203] {
            let a: Vec<f32> = (0..len).map(|i| (i as f32 * 0.37).sin()).collect();
            let b: Vec<f32> = (0..len).map(|i| (i as f32 * 0.11).cos()).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| *x as f64 * *y as f64).sum();
            assert!((dot(&a, &b) as f64 - naive).abs() < 1e-4, "len {len}");
        }
    }

    #[test]
    fn normalize_zero_is_noop() {
        let mut z = [0f32; 3];
        normalize(&mut z);
        assert_eq!(z, [0.0; 3]);
        let mut v = [3f32, 4.0];
        normalize(&mut v);
        assert_eq!(v, [0.6, 0.8]);
    }
}
