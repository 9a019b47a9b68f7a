//! Dyadic lines and the level decomposition of a field.
//!
//! For `k >= 1` the level-`k` lines are the rows and columns whose coordinate
//! is a multiple of `N / 2^k`; they cut `V_N` into `4^k` sub-boxes of side
//! `N / 2^k`. Conditioning on the field along these lines replaces the field
//! inside each sub-box by the harmonic extension of its values on the
//! sub-box boundary. What remains is, inside each sub-box, an independent
//! field with the law of the field on `V_{N/2^k}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::green::green_dense;
use crate::lattice::{BoxSpec, Site};
use crate::sampler::Field;
use crate::solver::DirichletSolver;

/// `A_k = {(2l + 1) N / 2^k}`, the coordinates first cut at level `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSet {
    pub box_spec: BoxSpec,
    pub k: u32,
    pub members: Vec<usize>,
}

fn check_level(box_spec: BoxSpec, k: u32) -> Result<()> {
    if k == 0 || k > box_spec.level() {
        return Err(Error::LevelOutOfRange {
            k,
            n: box_spec.level(),
        });
    }
    Ok(())
}

pub fn dyadic_set(box_spec: BoxSpec, k: u32) -> Result<DyadicSet> {
    check_level(box_spec, k)?;
    let unit = box_spec.side() >> k;
    let members = (0..1usize << (k - 1)).map(|l| (2 * l + 1) * unit).collect();
    Ok(DyadicSet {
        box_spec,
        k,
        members,
    })
}

/// Cached Dirichlet solvers for every level of one box.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    box_spec: BoxSpec,
    // solvers[k - 1] works on sub-boxes of side N / 2^k; None when that side is 1.
    solvers: Vec<Option<DirichletSolver>>,
}

impl Hierarchy {
    pub fn new(box_spec: BoxSpec) -> Result<Self> {
        let solvers = (1..=box_spec.level())
            .map(|k| {
                let side = box_spec.side() >> k;
                (side >= 2).then(|| DirichletSolver::square(side)).transpose()
            })
            .collect::<Result<_>>()?;
        Ok(Self { box_spec, solvers })
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.box_spec
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if field.box_spec() != self.box_spec {
            return Err(Error::InvalidArgument(format!(
                "field lives on V_{}, hierarchy on V_{}",
                field.box_spec().side(),
                self.box_spec.side()
            )));
        }
        Ok(())
    }

    /// `E[X | 𝒜_k]`: the field on the level-`k` lines, harmonically extended
    /// into every sub-box. `k = 0` gives the zero field.
    pub fn conditional_mean(&self, field: &Field, k: u32) -> Result<Field> {
        self.check_field(field)?;
        if k == 0 {
            return Ok(Field::zeros(self.box_spec));
        }
        check_level(self.box_spec, k)?;
        let mut out = field.clone();
        let Some(solver) = &self.solvers[k as usize - 1] else {
            // every site lies on a line
            return Ok(out);
        };
        let side = self.box_spec.side() >> k;
        let boxes = 1usize << k;
        for a in 0..boxes {
            for b in 0..boxes {
                let origin = Site::new(a * side + 1, b * side + 1);
                let values = solver.extend(origin, |s| field.get(s));
                for (s, v) in solver.rect_at(origin).sites().zip(values) {
                    out.set(s, v);
                }
            }
        }
        Ok(out)
    }

    /// `(E[X | 𝒜_k], X - E[X | 𝒜_k])`.
    pub fn condition(&self, field: &Field, k: u32) -> Result<(Field, Field)> {
        let mean = self.conditional_mean(field, k)?;
        let residual = field.sub(&mean);
        Ok((mean, residual))
    }

    pub fn decompose(&self, field: &Field) -> Result<Decomposition> {
        self.check_field(field)?;
        let n = self.box_spec.level();
        let mut levels = Vec::with_capacity(n as usize);
        let mut residuals = Vec::with_capacity(n as usize);
        let mut previous = Field::zeros(self.box_spec);
        for k in 1..=n {
            let (mean, residual) = self.condition(field, k)?;
            levels.push(mean.sub(&previous));
            residuals.push(residual);
            previous = mean;
        }
        Ok(Decomposition {
            box_spec: self.box_spec,
            levels,
            residuals,
        })
    }

    /// Matrix (over interior sites) of the linear map `X ↦ E[X | 𝒜_k]`.
    pub fn conditional_mean_operator(&self, k: u32) -> Result<DMatrix<f64>> {
        let m = self.box_spec.interior_count();
        let mut op = DMatrix::zeros(m, m);
        for c in 0..m {
            let mut unit = vec![0.0; m];
            unit[c] = 1.0;
            let image = self
                .conditional_mean(&Field::from_interior(self.box_spec, &unit), k)?
                .interior();
            op.column_mut(c).copy_from_slice(&image);
        }
        Ok(op)
    }

    /// Matrices of the maps `X ↦ ξ_k` (level increments), `k = 1..=n`.
    pub fn level_operators(&self) -> Result<Vec<DMatrix<f64>>> {
        let m = self.box_spec.interior_count();
        let mut previous = DMatrix::zeros(m, m);
        let mut out = Vec::new();
        for k in 1..=self.box_spec.level() {
            let current = self.conditional_mean_operator(k)?;
            out.push(&current - &previous);
            previous = current;
        }
        Ok(out)
    }
}

/// Is `s` on one of the level-`k` lines (boundary included)?
pub fn on_level_lines(box_spec: BoxSpec, k: u32, s: Site) -> bool {
    let side = box_spec.side() >> k;
    s.x % side == 0 || s.y % side == 0
}

pub fn condition_on_level(field: &Field, k: u32) -> Result<(Field, Field)> {
    Hierarchy::new(field.box_spec())?.condition(field, k)
}

/// Cut the level-1 residual into its four sub-boxes, each translated to
/// `V_{N/2}`. Sub-box `(a, b)` maps `(x, y)` to `(x - a N/2, y - b N/2)`;
/// outputs are ordered `(0,0), (0,1), (1,0), (1,1)`.
pub fn residual_subfields(field: &Field) -> Result<[Field; 4]> {
    let box_spec = field.box_spec();
    let half = box_spec.half()?;
    let (_, residual) = condition_on_level(field, 1)?;
    let m = half.side();
    Ok([(0, 0), (0, 1), (1, 0), (1, 1)]
        .map(|(a, b)| Field::from_fn(half, |s| residual.get(Site::new(s.x + a * m, s.y + b * m)))))
}

pub fn decompose(field: &Field) -> Result<Decomposition> {
    Hierarchy::new(field.box_spec())?.decompose(field)
}

/// Level increments `ξ_k = E[X | 𝒜_k] - E[X | 𝒜_{k-1}]` and residuals
/// `X - E[X | 𝒜_k]` for `k = 1..=n`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub box_spec: BoxSpec,
    pub levels: Vec<Field>,
    pub residuals: Vec<Field>,
}

impl Decomposition {
    pub fn level(&self, k: u32) -> &Field {
        &self.levels[k as usize - 1]
    }

    pub fn residual(&self, k: u32) -> &Field {
        &self.residuals[k as usize - 1]
    }

    pub fn sum_of_levels(&self) -> Field {
        let mut total = Field::zeros(self.box_spec);
        for l in &self.levels {
            total.add_assign(l);
        }
        total
    }

    /// `max_z |Σ_k ξ_k(z) - X_z|`.
    pub fn telescoping_error(&self, field: &Field) -> f64 {
        self.sum_of_levels().max_abs_diff(field)
    }
}

/// Covariance of `X - E[X | 𝒜_k]` over interior sites.
#[derive(Clone, Debug)]
pub struct ConditionalCovariance {
    pub box_spec: BoxSpec,
    pub k: u32,
    pub matrix: DMatrix<f64>,
}

/// Deviation of a conditional covariance from independent sub-box fields.
#[derive(Clone, Copy, Debug)]
pub struct MarkovCheck {
    /// `max |Cov(i, j) - G_sub(i', j')|` over pairs in the same sub-box.
    pub max_block_deviation: f64,
    /// `max |Cov(i, j)|` over pairs in different sub-boxes or on lines.
    pub max_off_block: f64,
}

impl MarkovCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_block_deviation <= tol && self.max_off_block <= tol
    }
}

/// `Cov(X - H X_L) = G - H G_LL Hᵀ`, where `L` are the interior sites on the
/// level-`k` lines and `H` is the harmonic extension from `L`, computed with
/// the Dirichlet solver independently of `G`.
pub fn exact_conditional_covariance(
    box_spec: BoxSpec,
    k: u32,
    dense_cap: usize,
) -> Result<ConditionalCovariance> {
    check_level(box_spec, k)?;
    let g = green_dense(box_spec, dense_cap)?;
    let g = g.dense_matrix().expect("dense form");
    let hierarchy = Hierarchy::new(box_spec)?;
    let m = box_spec.interior_count();
    let lines: Vec<usize> = box_spec
        .interior_sites()
        .enumerate()
        .filter(|(_, s)| on_level_lines(box_spec, k, *s))
        .map(|(i, _)| i)
        .collect();
    let mut h = DMatrix::zeros(m, lines.len());
    for (c, &l) in lines.iter().enumerate() {
        let mut unit = vec![0.0; m];
        unit[l] = 1.0;
        let image = hierarchy
            .conditional_mean(&Field::from_interior(box_spec, &unit), k)?
            .interior();
        h.column_mut(c).copy_from_slice(&image);
    }
    let g_lines = DMatrix::from_fn(lines.len(), lines.len(), |i, j| g[(lines[i], lines[j])]);
    let matrix = g - &h * g_lines * h.transpose();
    Ok(ConditionalCovariance {
        box_spec,
        k,
        matrix,
    })
}

impl ConditionalCovariance {
    pub fn markov_check(&self, dense_cap: usize) -> Result<MarkovCheck> {
        let side = self.box_spec.side() >> self.k;
        let sub = (side >= 2)
            .then(|| green_dense(BoxSpec::from_side(side)?, dense_cap))
            .transpose()?;
        let sites: Vec<Site> = self.box_spec.interior_sites().collect();
        let mut check = MarkovCheck {
            max_block_deviation: 0.0,
            max_off_block: 0.0,
        };
        for (i, a) in sites.iter().enumerate() {
            for (j, b) in sites.iter().enumerate() {
                let v = self.matrix[(i, j)];
                let same_box = !on_level_lines(self.box_spec, self.k, *a)
                    && !on_level_lines(self.box_spec, self.k, *b)
                    && a.x / side == b.x / side
                    && a.y / side == b.y / side;
                if same_box {
                    let g = sub.as_ref().expect("sub-box has interior");
                    let expected = g.entry(
                        Site::new(a.x % side, a.y % side),
                        Site::new(b.x % side, b.y % side),
                    );
                    check.max_block_deviation = check.max_block_deviation.max((v - expected).abs());
                } else {
                    check.max_off_block = check.max_off_block.max(v.abs());
                }
            }
        }
        Ok(check)
    }
}

/// `max_{j ≠ k} |M_j G M_kᵀ|` over the level-increment maps.
pub fn max_cross_level_covariance(box_spec: BoxSpec, dense_cap: usize) -> Result<f64> {
    let g = green_dense(box_spec, dense_cap)?;
    let g = g.dense_matrix().expect("dense form");
    let ops = Hierarchy::new(box_spec)?.level_operators()?;
    let mut worst: f64 = 0.0;
    for (j, a) in ops.iter().enumerate() {
        for b in ops.iter().skip(j + 1) {
            worst = worst.max((a * g * b.transpose()).abs().max());
        }
    }
    Ok(worst)
}
