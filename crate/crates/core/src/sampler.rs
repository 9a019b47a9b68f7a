//! Exact samplers for the field with covariance `G_N`.
//!
//! * [`DenseSampler`] multiplies standard normals by a Cholesky factor `L` of
//!   the dense Green matrix (`L Lᵀ = G`).
//! * [`SpectralSampler`] draws one normal `ξ_{jk}` per sine mode, in row-major
//!   `(j, k)` order, and evaluates `Σ ξ_{jk} ψ_{jk} / sqrt(1 - λ_{jk})` with
//!   the fast sine transform in `O(N² log N)`.
//!
//! Sample `i` of a batch always uses stream `seed.nth(i)`, so a batch is a
//! function of `(seed, count)` alone and the worker count only changes how
//! the work is scheduled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::{eigenvalue, GreenOperator};
use crate::lattice::{BoxSpec, Site};
use crate::rng::SeedSpec;
use crate::sine::{SineScratch, SineTransform};
use crate::solver::BandedCholesky;

/// One realization on `V_N`; values in lexicographic site order.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    box_spec: BoxSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(box_spec: BoxSpec) -> Self {
        Self {
            box_spec,
            values: vec![0.0; box_spec.site_count()],
        }
    }

    pub fn from_fn(box_spec: BoxSpec, f: impl Fn(Site) -> f64) -> Self {
        Self {
            box_spec,
            values: box_spec.sites().map(f).collect(),
        }
    }

    pub fn from_values(box_spec: BoxSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != box_spec.site_count() {
            return Err(Error::InvalidArgument(format!(
                "field on V_{} needs {} values, got {}",
                box_spec.side(),
                box_spec.site_count(),
                values.len()
            )));
        }
        Ok(Self { box_spec, values })
    }

    /// Field that is zero on the boundary and takes `interior` (interior
    /// order) inside.
    pub fn from_interior(box_spec: BoxSpec, interior: &[f64]) -> Self {
        let mut f = Self::zeros(box_spec);
        f.set_interior(interior);
        f
    }

    fn set_interior(&mut self, interior: &[f64]) {
        let m = self.box_spec.interior_side();
        assert_eq!(interior.len(), m * m);
        let w = self.box_spec.side() + 1;
        for x in 1..=m {
            let row = &mut self.values[x * w + 1..x * w + 1 + m];
            row.copy_from_slice(&interior[(x - 1) * m..x * m]);
        }
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.box_spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: Site) -> f64 {
        self.values[self.box_spec.site_index(s)]
    }

    pub fn set(&mut self, s: Site, v: f64) {
        let i = self.box_spec.site_index(s);
        self.values[i] = v;
    }

    pub fn interior(&self) -> Vec<f64> {
        self.box_spec.interior_sites().map(|s| self.get(s)).collect()
    }

    pub fn boundary_is_zero(&self) -> bool {
        self.box_spec
            .sites()
            .filter(|s| self.box_spec.is_boundary(*s))
            .all(|s| self.get(s) == 0.0)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        assert_eq!(self.box_spec, other.box_spec);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.box_spec, other.box_spec);
        Field {
            box_spec: self.box_spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Field) {
        assert_eq!(self.box_spec, other.box_spec);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}

/// Cholesky-factor sampler built from a dense Green operator.
#[derive(Clone, Debug)]
pub struct DenseSampler {
    box_spec: BoxSpec,
    factor: BandedCholesky,
}

impl DenseSampler {
    pub fn new(g: &GreenOperator) -> Result<Self> {
        let matrix = g.dense_matrix().ok_or_else(|| {
            Error::InvalidArgument("dense sampling needs the dense Green form".into())
        })?;
        let m = matrix.nrows();
        let factor = BandedCholesky::factor(m, m.saturating_sub(1), |i, j| matrix[(i, j)])?;
        Ok(Self {
            box_spec: g.box_spec(),
            factor,
        })
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.box_spec
    }

    pub fn normals_len(&self) -> usize {
        self.box_spec.interior_count()
    }

    /// `L ξ` placed on the interior.
    pub fn field_from_normals(&self, normals: &[f64]) -> Field {
        Field::from_interior(self.box_spec, &self.factor.lower_mul(normals))
    }

    pub fn sample(&self, seed: SeedSpec) -> Field {
        let mut xi = vec![0.0; self.normals_len()];
        seed.fill_normals(&mut xi);
        self.field_from_normals(&xi)
    }
}

pub fn sample_dense(g: &GreenOperator, seed: SeedSpec) -> Result<Field> {
    Ok(DenseSampler::new(g)?.sample(seed))
}

/// Sine-mode sampler.
#[derive(Debug)]
pub struct SpectralSampler {
    box_spec: BoxSpec,
    transform: SineTransform,
    /// `(2/N) / sqrt(1 - λ_{jk})`, row-major.
    scale: Vec<f64>,
}

/// Per-worker buffers for [`SpectralSampler`].
#[derive(Default)]
pub struct SamplerScratch {
    coeffs: Vec<f64>,
    sine: SineScratch,
}

impl SpectralSampler {
    pub fn new(box_spec: BoxSpec) -> Result<Self> {
        let n = box_spec.side();
        if n < 2 {
            return Err(Error::InvalidBox("sampling needs N >= 2".into()));
        }
        let norm = 2.0 / n as f64;
        let scale = (1..n)
            .flat_map(|j| (1..n).map(move |k| (j, k)))
            .map(|(j, k)| norm / (1.0 - eigenvalue(box_spec, j, k)).sqrt())
            .collect();
        Ok(Self {
            box_spec,
            transform: SineTransform::new(n),
            scale,
        })
    }

    pub fn box_spec(&self) -> BoxSpec {
        self.box_spec
    }

    pub fn normals_len(&self) -> usize {
        self.scale.len()
    }

    /// Turn mode coefficients into interior values, in place.
    fn synthesize(&self, coeffs: &mut [f64], sine: &mut SineScratch) {
        for (c, s) in coeffs.iter_mut().zip(&self.scale) {
            *c *= s;
        }
        self.transform.synthesize_2d(coeffs, sine);
    }

    pub fn field_from_normals(&self, normals: &[f64]) -> Field {
        assert_eq!(normals.len(), self.normals_len());
        let mut c = normals.to_vec();
        self.synthesize(&mut c, &mut SineScratch::default());
        Field::from_interior(self.box_spec, &c)
    }

    /// Interior values of the sample on stream `seed`, left in the scratch.
    fn sample_interior<'a>(&self, seed: SeedSpec, scratch: &'a mut SamplerScratch) -> &'a [f64] {
        scratch.coeffs.resize(self.normals_len(), 0.0);
        seed.fill_normals(&mut scratch.coeffs);
        self.synthesize(&mut scratch.coeffs, &mut scratch.sine);
        &scratch.coeffs
    }

    pub fn sample(&self, seed: SeedSpec) -> Field {
        let mut scratch = SamplerScratch::default();
        Field::from_interior(self.box_spec, self.sample_interior(seed, &mut scratch))
    }

    pub fn sample_into(&self, seed: SeedSpec, scratch: &mut SamplerScratch, out: &mut Field) {
        assert_eq!(out.box_spec, self.box_spec);
        let interior = self.sample_interior(seed, scratch);
        out.set_interior(interior);
    }

    /// `max_{z ∈ V_N} X_z` without materializing the field. The boundary
    /// contributes the value 0.
    pub fn sample_max(&self, seed: SeedSpec, scratch: &mut SamplerScratch) -> f64 {
        self.sample_interior(seed, scratch)
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }
}

pub fn sample_spectral(box_spec: BoxSpec, seed: SeedSpec) -> Result<Field> {
    Ok(SpectralSampler::new(box_spec)?.sample(seed))
}

/// Run `f(i, seed.nth(i))` for `i in 0..count` on `workers` threads and
/// return the results in index order.
pub fn run_indexed<T, S, F>(
    count: usize,
    seed: SeedSpec,
    workers: usize,
    init: impl Fn() -> S + Sync + Send,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut S, usize, SeedSpec) -> T + Sync + Send,
{
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    if workers == 1 {
        let mut state = init();
        return Ok((0..count)
            .map(|i| f(&mut state, i, seed.nth(i as u64)))
            .collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..count)
            .into_par_iter()
            .map_init(&init, |state, i| f(state, i, seed.nth(i as u64)))
            .collect()
    }))
}

/// Map every field of a spectral batch through `f`.
pub fn batch_map<T, F>(
    box_spec: BoxSpec,
    count: usize,
    seed: SeedSpec,
    workers: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Field) -> T + Sync + Send,
{
    let sampler = SpectralSampler::new(box_spec)?;
    run_indexed(
        count,
        seed,
        workers,
        || (SamplerScratch::default(), Field::zeros(box_spec)),
        |(scratch, field), i, s| {
            sampler.sample_into(s, scratch, field);
            f(i, field)
        },
    )
}

/// `count` independent fields on streams `seed.nth(0..count)`.
pub fn batch_sample(
    box_spec: BoxSpec,
    count: usize,
    seed: SeedSpec,
    workers: usize,
) -> Result<Vec<Field>> {
    batch_map(box_spec, count, seed, workers, |_, f| f.clone())
}

/// Maxima of `count` independent spectral samples.
pub fn batch_maxima(
    box_spec: BoxSpec,
    count: usize,
    seed: SeedSpec,
    workers: usize,
) -> Result<Vec<f64>> {
    let sampler = SpectralSampler::new(box_spec)?;
    run_indexed(count, seed, workers, SamplerScratch::default, |scratch, _, s| {
        sampler.sample_max(s, scratch)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::{green_dense, DEFAULT_DENSE_CAP};
    use nalgebra::{DMatrix, DVector};

    /// Column `i` of the synthesis map, from the `i`-th unit coefficient.
    fn synthesis_matrix(sampler: &SpectralSampler) -> DMatrix<f64> {
        let m = sampler.normals_len();
        let mut s = DMatrix::zeros(m, m);
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            let f = sampler.field_from_normals(&e);
            s.set_column(i, &DVector::from_vec(f.interior()));
        }
        s
    }

    #[test]
    fn spectral_covariance_is_green() {
        for n in [2, 3] {
            let b = BoxSpec::new(n).unwrap();
            let s = synthesis_matrix(&SpectralSampler::new(b).unwrap());
            let g = green_dense(b, DEFAULT_DENSE_CAP).unwrap();
            let diff = (&s * s.transpose() - g.to_dense()).abs().max();
            assert!(diff < 1e-12, "N = {}: {diff}", b.side());
        }
    }

    #[test]
    fn dense_covariance_is_green() {
        let b = BoxSpec::new(3).unwrap();
        let g = green_dense(b, DEFAULT_DENSE_CAP).unwrap();
        let sampler = DenseSampler::new(&g).unwrap();
        let m = sampler.normals_len();
        let l = DMatrix::from_fn(m, m, |i, j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            sampler.field_from_normals(&e).interior()[i]
        });
        assert!((&l * l.transpose() - g.to_dense()).abs().max() < 1e-12);
    }

    #[test]
    fn n2_has_one_standard_normal() {
        let b = BoxSpec::new(1).unwrap();
        let seed = SeedSpec::new(11, 4);
        let f = sample_spectral(b, seed).unwrap();
        let mut xi = [0.0];
        seed.fill_normals(&mut xi);
        assert!((f.get(Site::new(1, 1)) - xi[0]).abs() < 1e-15);
        assert_eq!(f.values().iter().filter(|v| **v != 0.0).count(), 1);
        let g = green_dense(b, DEFAULT_DENSE_CAP).unwrap();
        let d = sample_dense(&g, seed).unwrap();
        assert!((d.get(Site::new(1, 1)) - xi[0]).abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        let b = BoxSpec::new(3).unwrap();
        let seed = SeedSpec::new(7, 0);
        assert_eq!(sample_spectral(b, seed).unwrap(), sample_spectral(b, seed).unwrap());
        let g = green_dense(b, DEFAULT_DENSE_CAP).unwrap();
        assert_eq!(sample_dense(&g, seed).unwrap(), sample_dense(&g, seed).unwrap());
    }

    #[test]
    fn boundary_is_zero_at_large_n() {
        let f = sample_spectral(BoxSpec::new(7).unwrap(), SeedSpec::new(1, 2)).unwrap();
        assert!(f.boundary_is_zero());
        assert!(f.interior().iter().any(|v| *v != 0.0));
    }

    #[test]
    fn batch_is_worker_independent() {
        let b = BoxSpec::new(3).unwrap();
        let seed = SeedSpec::new(5, 0);
        let one = batch_sample(b, 4, seed, 1).unwrap();
        let four = batch_sample(b, 4, seed, 4).unwrap();
        assert_eq!(one, four);
        assert!(matches!(
            batch_sample(b, 0, seed, 1),
            Err(Error::InvalidArgument(_))
        ));
        let maxima = batch_maxima(b, 4, seed, 2).unwrap();
        for (m, f) in maxima.iter().zip(&one) {
            assert_eq!(*m, f.values().iter().copied().fold(0.0, f64::max));
        }
    }
}
