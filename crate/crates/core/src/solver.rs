//! Direct solvers for the discrete Dirichlet problem on a rectangle.
//!
//! On a `w × h` rectangle of unknowns ordered lexicographically, the matrix
//! `I - P` (simple random walk, weight 1/4 per neighbour, killed outside the
//! rectangle) is symmetric positive definite with bandwidth `h`. A banded
//! Cholesky factorization costs `O(w h³)` and each solve `O(w h²)`.

use crate::error::{Error, Result};
use crate::lattice::{Rect, Site};

/// Lower Cholesky factor `L` of a symmetric banded matrix, `A = L Lᵀ`.
///
/// Row `i` stores the entries `L[i][i-bw..=i]`, left-padded with zeros.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    dim: usize,
    bandwidth: usize,
    rows: Vec<f64>,
}

impl BandedCholesky {
    /// Factor the matrix whose lower band entries are given by `entry(i, j)`
    /// for `i - bandwidth <= j <= i`.
    pub fn factor(
        dim: usize,
        bandwidth: usize,
        entry: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let stride = bandwidth + 1;
        let mut rows = vec![0.0; dim * stride];
        for i in 0..dim {
            let j0 = i.saturating_sub(bandwidth);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bandwidth));
                let mut s = entry(i, j);
                let ri = i * stride + bandwidth - i;
                let rj = j * stride + bandwidth - j;
                for k in k0..j {
                    s -= rows[ri + k] * rows[rj + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Factorization { index: i, pivot: s });
                    }
                    rows[ri + i] = s.sqrt();
                } else {
                    rows[ri + j] = s / rows[rj + j];
                }
            }
        }
        Ok(Self {
            dim,
            bandwidth,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i * (self.bandwidth + 1) + self.bandwidth - i + j]
    }

    /// `L · v`.
    pub fn lower_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (i.saturating_sub(self.bandwidth)..=i)
                    .map(|k| self.at(i, k) * v[k])
                    .sum()
            })
            .collect()
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.dim);
        let bw = self.bandwidth;
        for i in 0..self.dim {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        for i in (0..self.dim).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(self.dim) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

/// Factorized `I - P` on a rectangle of unknowns.
#[derive(Clone, Debug)]
pub struct DirichletSolver {
    width: usize,
    height: usize,
    factor: BandedCholesky,
}

impl DirichletSolver {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(
                "Dirichlet region must contain at least one site".into(),
            ));
        }
        let factor = BandedCholesky::factor(width * height, height, |i, j| {
            if i == j {
                1.0
            } else if (i - j == 1 && i % height != 0) || i - j == height {
                -0.25
            } else {
                0.0
            }
        })?;
        Ok(Self {
            width,
            height,
            factor,
        })
    }

    /// Solver for the `(side - 1)²` interior sites of a square of side `side`.
    pub fn square(side: usize) -> Result<Self> {
        Self::new(side.saturating_sub(1), side.saturating_sub(1))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Solve `(I - P) u = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        self.factor.solve_in_place(rhs);
    }

    /// Harmonic extension of boundary data into the rectangle whose lower
    /// corner is `origin`. `boundary(site)` is only queried on the outer
    /// boundary of the rectangle. Values are returned in lexicographic order.
    pub fn extend(&self, origin: Site, boundary: impl Fn(Site) -> f64) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        let mut rhs = vec![0.0; w * h];
        for i in 0..w {
            rhs[i * h] += 0.25 * boundary(Site::new(origin.x + i, origin.y - 1));
            rhs[i * h + h - 1] += 0.25 * boundary(Site::new(origin.x + i, origin.y + h));
        }
        for j in 0..h {
            rhs[j] += 0.25 * boundary(Site::new(origin.x - 1, origin.y + j));
            rhs[(w - 1) * h + j] += 0.25 * boundary(Site::new(origin.x + w, origin.y + j));
        }
        self.solve_in_place(&mut rhs);
        rhs
    }

    pub fn rect_at(&self, origin: Site) -> Rect {
        Rect {
            x_min: origin.x,
            x_max: origin.x + self.width - 1,
            y_min: origin.y,
            y_max: origin.y + self.height - 1,
        }
    }
}
