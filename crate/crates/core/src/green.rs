//! The Green's function of simple random walk killed on `∂V_N`.
//!
//! `G_N = (I - P)^{-1}` on interior sites, where `P` is the walk kernel with
//! weight 1/4 per nearest neighbour. `G` vanishes when either argument is a
//! boundary site, so visits are counted strictly before the exit time.
//!
//! Two representations are available. The dense form is the exact inverse
//! obtained from a banded Cholesky factorization and is meant for `N <= 64`.
//! The spectral form stores the eigenvalues
//! `λ_{jk} = (cos(πj/N) + cos(πk/N)) / 2` of `P`, whose eigenvectors are the
//! orthonormal sine modes `ψ_{jk}(x, y) = (2/N) sin(πjx/N) sin(πky/N)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Rect, Site};
use crate::sine::{SineScratch, SineTransform};
use crate::solver::DirichletSolver;

/// Default dense cap in interior sites: dense forms up to `N = 64`.
pub const DEFAULT_DENSE_CAP: usize = 63 * 63;

#[derive(Clone, Debug)]
pub struct GreenOperator {
    box_spec: BoxSpec,
    form: Form,
}

#[derive(Clone, Debug)]
enum Form {
    Dense(DMatrix<f64>),
    Spectral(SpectralTable),
}

#[derive(Clone, Debug)]
struct SpectralTable {
    /// `sin(π j x / N)` at `[(j - 1) * m + (x - 1)]`.
    sines: Vec<f64>,
    /// `1 / (1 - λ_{jk})`, row-major in `(j, k)`.
    weights: Vec<f64>,
}

/// Eigenvalue of the interior walk kernel for mode `(j, k)`, `1 <= j, k < N`.
pub fn eigenvalue(box_spec: BoxSpec, j: usize, k: usize) -> f64 {
    let n = box_spec.side() as f64;
    ((PI * j as f64 / n).cos() + (PI * k as f64 / n).cos()) / 2.0
}

fn require_interior(box_spec: BoxSpec) -> Result<()> {
    if box_spec.side() < 2 {
        return Err(Error::InvalidBox("Green operator needs N >= 2".into()));
    }
    Ok(())
}

/// Exact dense Green matrix, one Dirichlet solve per column.
pub fn green_dense(box_spec: BoxSpec, dense_cap: usize) -> Result<GreenOperator> {
    require_interior(box_spec)?;
    let m = box_spec.interior_count();
    if m > dense_cap {
        return Err(Error::DenseCapExceeded {
            sites: m,
            cap: dense_cap,
        });
    }
    let solver = DirichletSolver::square(box_spec.side())?;
    let mut g = DMatrix::zeros(m, m);
    let mut col = vec![0.0; m];
    for c in 0..m {
        col.fill(0.0);
        col[c] = 1.0;
        solver.solve_in_place(&mut col);
        g.column_mut(c).copy_from_slice(&col);
    }
    Ok(GreenOperator {
        box_spec,
        form: Form::Dense(g),
    })
}

pub fn green_spectral(box_spec: BoxSpec) -> Result<GreenOperator> {
    require_interior(box_spec)?;
    let n = box_spec.side();
    let m = n - 1;
    let mut sines = vec![0.0; m * m];
    for j in 1..n {
        for x in 1..n {
            sines[(j - 1) * m + x - 1] = (PI * (j * x) as f64 / n as f64).sin();
        }
    }
    let mut weights = vec![0.0; m * m];
    for j in 1..n {
        for k in 1..n {
            weights[(j - 1) * m + k - 1] = 1.0 / (1.0 - eigenvalue(box_spec, j, k));
        }
    }
    Ok(GreenOperator {
        box_spec,
        form: Form::Spectral(SpectralTable { sines, weights }),
    })
}

impl GreenOperator {
    pub fn box_spec(&self) -> BoxSpec {
        self.box_spec
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.form, Form::Dense(_))
    }

    pub fn dense_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.form {
            Form::Dense(g) => Some(g),
            Form::Spectral(_) => None,
        }
    }

    /// All eigenvalues `λ_{jk}` of the interior walk kernel, row-major in `(j, k)`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.box_spec.side();
        (1..n)
            .flat_map(|j| (1..n).map(move |k| (j, k)))
            .map(|(j, k)| eigenvalue(self.box_spec, j, k))
            .collect()
    }

    /// `G(a, b)`, zero if either site is on the boundary.
    pub fn entry(&self, a: Site, b: Site) -> f64 {
        let (Some(ia), Some(ib)) = (
            self.box_spec.interior_index(a),
            self.box_spec.interior_index(b),
        ) else {
            return 0.0;
        };
        match &self.form {
            Form::Dense(g) => g[(ia, ib)],
            Form::Spectral(t) => {
                let m = self.box_spec.interior_side();
                let norm = (2.0 / self.box_spec.side() as f64).powi(2);
                let mut total = 0.0;
                for j in 0..m {
                    let sx = t.sines[j * m + a.x - 1] * t.sines[j * m + b.x - 1];
                    let mut row = 0.0;
                    for k in 0..m {
                        row += t.weights[j * m + k]
                            * t.sines[k * m + a.y - 1]
                            * t.sines[k * m + b.y - 1];
                    }
                    total += sx * row;
                }
                norm * total
            }
        }
    }

    /// Apply `G` to a vector indexed by interior sites.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m2 = self.box_spec.interior_count();
        assert_eq!(v.len(), m2, "vector must cover the interior sites");
        match &self.form {
            Form::Dense(g) => (g * nalgebra::DVector::from_column_slice(v))
                .as_slice()
                .to_vec(),
            Form::Spectral(t) => {
                let n = self.box_spec.side();
                let transform = SineTransform::new(n);
                let mut scratch = SineScratch::default();
                let mut c = v.to_vec();
                transform.synthesize_2d(&mut c, &mut scratch);
                let scale = (2.0 / n as f64).powi(2);
                for (ci, w) in c.iter_mut().zip(&t.weights) {
                    *ci *= w * scale;
                }
                transform.synthesize_2d(&mut c, &mut scratch);
                c
            }
        }
    }

    /// Full matrix over interior sites. For the spectral form this sums the
    /// modes separably in `O(N^5)`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.form {
            Form::Dense(g) => g.clone(),
            Form::Spectral(t) => {
                let m = self.box_spec.interior_side();
                let norm = (2.0 / self.box_spec.side() as f64).powi(2);
                // u[(ax, bx, k)] = Σ_j s_j(ax) s_j(bx) w_jk
                let mut u = vec![0.0; m * m * m];
                for ax in 0..m {
                    for bx in 0..m {
                        let dst = &mut u[(ax * m + bx) * m..(ax * m + bx + 1) * m];
                        for j in 0..m {
                            let s = t.sines[j * m + ax] * t.sines[j * m + bx];
                            for (d, w) in dst.iter_mut().zip(&t.weights[j * m..(j + 1) * m]) {
                                *d += s * w;
                            }
                        }
                    }
                }
                let mut g = DMatrix::zeros(m * m, m * m);
                for ax in 0..m {
                    for bx in 0..m {
                        let row = &u[(ax * m + bx) * m..(ax * m + bx + 1) * m];
                        for ay in 0..m {
                            for by in 0..m {
                                let mut s = 0.0;
                                for k in 0..m {
                                    s += row[k] * t.sines[k * m + ay] * t.sines[k * m + by];
                                }
                                g[(ax * m + ay, bx * m + by)] = norm * s;
                            }
                        }
                    }
                }
                g
            }
        }
    }

    /// Diagonal `G(x, x)` over interior sites.
    pub fn diagonal(&self) -> Vec<f64> {
        match &self.form {
            Form::Dense(g) => g.diagonal().as_slice().to_vec(),
            Form::Spectral(t) => {
                let m = self.box_spec.interior_side();
                let norm = (2.0 / self.box_spec.side() as f64).powi(2);
                // rows[x][k] = Σ_j s_j(x)² w_jk
                let mut rows = vec![0.0; m * m];
                for x in 0..m {
                    let dst = &mut rows[x * m..(x + 1) * m];
                    for j in 0..m {
                        let s2 = t.sines[j * m + x].powi(2);
                        for (d, w) in dst.iter_mut().zip(&t.weights[j * m..(j + 1) * m]) {
                            *d += s2 * w;
                        }
                    }
                }
                let mut out = vec![0.0; m * m];
                for x in 0..m {
                    for y in 0..m {
                        let mut s = 0.0;
                        for k in 0..m {
                            s += rows[x * m + k] * t.sines[k * m + y].powi(2);
                        }
                        out[x * m + y] = norm * s;
                    }
                }
                out
            }
        }
    }
}

/// The diagonal of `G` keyed by interior site.
#[derive(Clone, Debug)]
pub struct VarianceProfile {
    pub box_spec: BoxSpec,
    values: Vec<f64>,
}

impl VarianceProfile {
    pub fn get(&self, s: Site) -> Option<f64> {
        self.box_spec.interior_index(s).map(|i| self.values[i])
    }

    pub fn center(&self) -> f64 {
        self.get(self.box_spec.center()).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.box_spec.interior_sites().zip(self.values.iter().copied())
    }
}

pub fn variance_profile(g: &GreenOperator) -> VarianceProfile {
    VarianceProfile {
        box_spec: g.box_spec(),
        values: g.diagonal(),
    }
}

/// Values of a harmonic extension on a rectangle of sites.
#[derive(Clone, Debug)]
pub struct RegionField {
    pub rect: Rect,
    pub values: Vec<f64>,
}

impl RegionField {
    pub fn get(&self, s: Site) -> Option<f64> {
        self.rect.index(s).map(|i| self.values[i])
    }
}

/// Solve the discrete Dirichlet problem on `region` (a rectangle of interior
/// sites of `box_spec`) with `data` prescribed on its outer boundary.
pub fn harmonic_extension(
    box_spec: BoxSpec,
    region: &[Site],
    data: &[(Site, f64)],
) -> Result<RegionField> {
    let rect = Rect::from_sites(region)?;
    let n = box_spec.side();
    if rect.x_min < 1 || rect.y_min < 1 || rect.x_max >= n || rect.y_max >= n {
        return Err(Error::NonRectangularRegion(format!(
            "region [{},{}]x[{},{}] leaves the interior of V_{n}",
            rect.x_min, rect.x_max, rect.y_min, rect.y_max
        )));
    }
    let mut given: HashMap<Site, f64> = HashMap::with_capacity(data.len());
    for &(s, v) in data {
        if given.insert(s, v).is_some() {
            return Err(Error::IncompleteBoundary(format!(
                "site ({}, {}) given twice",
                s.x, s.y
            )));
        }
    }
    let boundary = rect.boundary_sites();
    for s in &boundary {
        if !given.contains_key(s) {
            return Err(Error::IncompleteBoundary(format!(
                "no value for boundary site ({}, {})",
                s.x, s.y
            )));
        }
    }
    if given.len() != boundary.len() {
        return Err(Error::IncompleteBoundary(format!(
            "{} values given for {} boundary sites",
            given.len(),
            boundary.len()
        )));
    }
    let solver = DirichletSolver::new(rect.width(), rect.height())?;
    let values = solver.extend(Site::new(rect.x_min, rect.y_min), |s| given[&s]);
    Ok(RegionField { rect, values })
}
