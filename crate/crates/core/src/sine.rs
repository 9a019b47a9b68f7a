//! Type-I discrete sine transform on the interior of `V_N`, computed with a
//! complex FFT of length `2N`.
//!
//! The unnormalized 1D transform is `S(x) = Σ_{j=1}^{N-1} a_j sin(π j x / N)`
//! for `x = 1..N-1`. Two real sequences are transformed per FFT by packing
//! them into the real and imaginary parts of an odd extension.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct SineTransform {
    side: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform")
            .field("side", &self.side)
            .finish()
    }
}

/// Reusable buffers for [`SineTransform::synthesize_2d`].
#[derive(Default)]
pub struct SineScratch {
    buf: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
    transposed: Vec<f64>,
}

impl SineTransform {
    pub fn new(side: usize) -> Self {
        assert!(side >= 2, "sine transform needs N >= 2");
        let fft = FftPlanner::new().plan_fft_forward(2 * side);
        Self { side, fft }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Transform `a` and `b` (each of length `N - 1`) in place.
    pub fn pair_in_place(&self, a: &mut [f64], b: &mut [f64], scratch: &mut SineScratch) {
        let n = self.side;
        let m = n - 1;
        debug_assert_eq!(a.len(), m);
        debug_assert_eq!(b.len(), m);
        let buf = &mut scratch.buf;
        buf.clear();
        buf.resize(2 * n, Complex64::new(0.0, 0.0));
        for j in 1..n {
            let v = Complex64::new(a[j - 1], b[j - 1]);
            buf[j] = v;
            buf[2 * n - j] = -v;
        }
        scratch
            .fft_scratch
            .resize(self.fft.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        self.fft.process_with_scratch(buf, &mut scratch.fft_scratch);
        // V(x) = -2i S_a(x) + 2 S_b(x)
        for x in 1..n {
            a[x - 1] = -0.5 * buf[x].im;
            b[x - 1] = 0.5 * buf[x].re;
        }
    }

    /// Transform each row of a row-major `(N-1) × (N-1)` array in place.
    fn rows_in_place(&self, data: &mut [f64], scratch: &mut SineScratch) {
        let m = self.side - 1;
        let mut chunks = data.chunks_exact_mut(m);
        loop {
            match (chunks.next(), chunks.next()) {
                (Some(a), Some(b)) => self.pair_in_place(a, b, scratch),
                (Some(a), None) => {
                    let mut zero = vec![0.0; m];
                    self.pair_in_place(a, &mut zero, scratch);
                }
                _ => break,
            }
        }
    }

    /// Separable 2D synthesis on a row-major `(N-1) × (N-1)` array:
    /// `out[x][y] = Σ_{j,k} c[j][k] sin(π j x / N) sin(π k y / N)`.
    pub fn synthesize_2d(&self, data: &mut [f64], scratch: &mut SineScratch) {
        let m = self.side - 1;
        assert_eq!(data.len(), m * m);
        // Transform along k, giving R[j][y].
        self.rows_in_place(data, scratch);
        // Transpose to R[y][j], transform along j, transpose back.
        let mut t = std::mem::take(&mut scratch.transposed);
        t.resize(m * m, 0.0);
        transpose(data, &mut t, m);
        self.rows_in_place(&mut t, scratch);
        transpose(&t, data, m);
        scratch.transposed = t;
    }
}

fn transpose(src: &[f64], dst: &mut [f64], m: usize) {
    const BLOCK: usize = 32;
    for i0 in (0..m).step_by(BLOCK) {
        for j0 in (0..m).step_by(BLOCK) {
            for i in i0..(i0 + BLOCK).min(m) {
                for j in j0..(j0 + BLOCK).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}
