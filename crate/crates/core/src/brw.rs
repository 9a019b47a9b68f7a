//! Branching random walk on a `b`-ary tree with Gaussian increments.
//!
//! The law of the maximum `M_n` at depth `n` satisfies
//! `F_{t+1}(x) = [∫ F_t(x - s) dΦ_σ(s)]^b`, started from a point mass at 0.
//!
//! A [`CdfGrid`] stores a distribution function at equally spaced nodes and
//! stands for the law whose CDF is the linear interpolation of the nodes,
//! with atoms of mass `F(y_0)` at the first node and `1 - F(y_last)` at the
//! last. For such a law the Gaussian convolution at the nodes is a discrete
//! convolution with fixed weights, evaluated here by FFT. A direct
//! cell-by-cell quadrature handles grids of a different step (notably the
//! initial point mass) and serves as the reference for the FFT route.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::rng::SeedSpec;
use crate::sampler::run_indexed;
use crate::stats::{mean, variance, CompensatedSum};

/// Grid step as a multiple of the largest increment standard deviation.
pub const DEFAULT_STEP_FACTOR: f64 = 1e-3;
/// Gaussian kernel truncation, in standard deviations.
pub const KERNEL_SIGMAS: f64 = 8.0;
/// Width of the ramp that represents a point mass.
pub const POINT_MASS_WIDTH: f64 = 1e-9;
/// Tail probability below which grid ends are trimmed.
const TRIM: f64 = 1e-14;
/// Coverage requirement on the first and last grid values.
pub const COVERAGE_TOL: f64 = 1e-9;
/// Default cap on `b^n · samples` for simulation.
pub const DEFAULT_LEAF_BUDGET: f64 = 2e10;

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Mean of `f` over `[a, a + h]` by 5-point Gauss-Legendre, without forming
/// `(a + h) - a`.
fn gauss_legendre_mean(a: f64, h: f64, f: impl Fn(f64) -> f64) -> f64 {
    0.5 * GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| w * f(a + h * (1.0 + x) / 2.0))
        .sum::<f64>()
}

/// `∫_a^b f` by 5-point Gauss-Legendre.
fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrwSpec {
    pub branching: u32,
    /// Increment standard deviation of generation `g` at index `g - 1`.
    stds: Vec<f64>,
    /// Grid step used by the recursion.
    pub step: f64,
}

impl BrwSpec {
    /// Constant standard deviation at every generation.
    pub fn new(branching: u32, std: f64, depth: usize) -> Result<Self> {
        Self::with_stds(branching, vec![std; depth])
    }

    pub fn with_stds(branching: u32, stds: Vec<f64>) -> Result<Self> {
        if branching == 0 {
            return Err(Error::InvalidArgument("branching factor must be >= 1".into()));
        }
        if let Some(s) = stds.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "increment standard deviation {s} is not a nonnegative number"
            )));
        }
        let largest = stds.iter().copied().fold(0.0, f64::max);
        let step = DEFAULT_STEP_FACTOR * if largest > 0.0 { largest } else { 1.0 };
        Ok(Self {
            branching,
            stds,
            step,
        })
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("grid step {step} must be positive")));
        }
        self.step = step;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.stds.len()
    }

    /// Standard deviation of the increments into generation `generation >= 1`.
    pub fn std(&self, generation: usize) -> f64 {
        self.stds[generation - 1]
    }
}

/// Distribution function sampled at `origin + i · step`.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfGrid {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl CdfGrid {
    pub fn new(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let grid = Self {
            origin,
            step,
            values,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// A point mass at `at`, as a ramp of width [`POINT_MASS_WIDTH`].
    pub fn point_mass(at: f64) -> Self {
        Self {
            origin: at - POINT_MASS_WIDTH / 2.0,
            step: POINT_MASS_WIDTH,
            values: vec![0.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || self.values.len() < 2 {
            return Err(Error::GridCoverage(
                "grid needs a positive step and at least two nodes".into(),
            ));
        }
        if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::GridCoverage("values outside [0, 1]".into()));
        }
        if self.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::GridCoverage("values decrease".into()));
        }
        let first = self.values[0];
        let last = self.values[self.values.len() - 1];
        if first > COVERAGE_TOL || last < 1.0 - COVERAGE_TOL {
            return Err(Error::GridCoverage(format!(
                "ends at F = {first:e} and 1 - F = {:e}",
                1.0 - last
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.node(self.values.len() - 1)
    }

    /// The interpolated distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.origin {
            return 0.0;
        }
        if x >= self.end() {
            return 1.0;
        }
        let t = (x - self.origin) / self.step;
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Probability masses in order: the left atom, each cell, the right atom.
    fn masses(&self) -> impl Iterator<Item = Mass> + '_ {
        let v = &self.values;
        let last = v.len() - 1;
        std::iter::once(Mass::Atom(self.origin, v[0]))
            .chain((1..=last).map(move |k| Mass::Cell(self.node(k - 1), v[k] - v[k - 1])))
            .chain(std::iter::once(Mass::Atom(self.end(), 1.0 - v[last])))
    }

    pub fn mean(&self) -> f64 {
        let h = self.step;
        self.masses()
            .map(|m| match m {
                Mass::Atom(y, p) => p * y,
                Mass::Cell(y, p) => p * (y + h / 2.0),
            })
            .collect::<CompensatedSum>()
            .value()
    }

    /// `E|M - M'| = 2 ∫ F (1 - F)`, exact for the interpolated CDF.
    pub fn dh_gap(&self) -> f64 {
        let h = self.step;
        let s: CompensatedSum = self
            .values
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                h * ((a + b) / 2.0 - (a * a + a * b + b * b) / 3.0)
            })
            .collect();
        2.0 * s.value()
    }

    /// `E max(M, M')` by summing over ordered pairs of masses.
    pub fn pair_max_direct(&self) -> f64 {
        let h = self.step;
        let mut below = 0.0;
        let mut total = CompensatedSum::default();
        for m in self.masses() {
            let (p, centre, own) = match m {
                Mass::Atom(y, p) => (p, y, y),
                Mass::Cell(y, p) => (p, y + h / 2.0, y + h / 2.0 + h / 6.0),
            };
            total.add(2.0 * p * below * centre + p * p * own);
            below += p;
        }
        total.value()
    }

    /// `E max(M, M') = (2 E M + E|M - M'|) / 2`.
    pub fn pair_max_identity(&self) -> f64 {
        (2.0 * self.mean() + self.dh_gap()) / 2.0
    }

    /// Smallest `x` with `F(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let v = &self.values;
        let k = v.partition_point(|&f| f < p);
        if k == 0 {
            return self.origin;
        }
        if k == v.len() {
            return self.end();
        }
        let (a, b) = (v[k - 1], v[k]);
        self.node(k - 1) + self.step * (p - a) / (b - a)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }
}

enum Mass {
    /// Point mass `p` at `y`.
    Atom(f64, f64),
    /// Mass `p` spread uniformly over `[y, y + step]`.
    Cell(f64, f64),
}

/// Weights `w_m = ∫ hat(u) φ_σ(m h - u) du`, `|m| <= half_width`, where `hat`
/// is the unit hat function of half-width `h`.
fn kernel_weights(sigma: f64, h: f64, half_width: usize) -> Vec<f64> {
    let density = |x: f64| normal_pdf(x / sigma) / sigma;
    let mut w: Vec<f64> = (-(half_width as i64)..=half_width as i64)
        .map(|m| {
            let c = m as f64 * h;
            gauss_legendre(-h, 0.0, |u| (1.0 + u / h) * density(c - u))
                + gauss_legendre(0.0, h, |u| (1.0 - u / h) * density(c - u))
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// `G_i = Σ_k F_k w_{i-k}` for `i` from `-W` to `len - 1 + W`, with `F`
/// extended by 0 on the left and 1 on the right.
fn lattice_convolve(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let m = values.len();
    let w = (weights.len() - 1) / 2;
    let len = m + 4 * w;
    let size = (len + weights.len() - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for (k, slot) in a.iter_mut().take(len).enumerate() {
        let idx = k as i64 - 2 * w as i64;
        let v = if idx < 0 {
            0.0
        } else if idx as usize >= m {
            1.0
        } else {
            values[idx as usize]
        };
        *slot = Complex64::new(v, 0.0);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for (q, &x) in weights.iter().enumerate() {
        b[q] = Complex64::new(x, 0.0);
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    forward.process(&mut a);
    forward.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inverse.process(&mut a);
    let norm = 1.0 / size as f64;
    (0..m + 2 * w).map(|j| a[j + 2 * w].re * norm).collect()
}

/// Direct evaluation of `∫ F(x - s) dΦ_σ(s)` at `count` nodes starting at
/// `origin`, exact up to Gauss-Legendre error on each cell of `f`.
fn direct_convolve(f: &CdfGrid, sigma: f64, origin: f64, step: f64, count: usize) -> Vec<f64> {
    let h = f.step;
    let masses: Vec<Mass> = f
        .masses()
        .filter(|m| match m {
            Mass::Atom(_, p) | Mass::Cell(_, p) => *p > 0.0,
        })
        .collect();
    (0..count)
        .map(|i| {
            let x = origin + i as f64 * step;
            masses
                .iter()
                .map(|m| match *m {
                    Mass::Atom(y, p) => p * normal_cdf((x - y) / sigma),
                    Mass::Cell(y, p) => {
                        p * gauss_legendre_mean(y, h, |u| normal_cdf((x - u) / sigma))
                    }
                })
                .sum()
        })
        .collect()
}

/// Which evaluation route [`convolve_power`] should take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionRoute {
    /// FFT on the input lattice when the steps agree, direct otherwise.
    Auto,
    Direct,
}

/// One recursion step with an explicit route choice.
pub fn convolve_power(
    f: &CdfGrid,
    sigma: f64,
    branching: u32,
    step: f64,
    route: ConvolutionRoute,
) -> Result<CdfGrid> {
    f.validate()?;
    let (origin, step, conv) = if sigma == 0.0 {
        (f.origin, f.step, f.values.clone())
    } else {
        let half_width = (KERNEL_SIGMAS * sigma / step).ceil() as usize + 1;
        let same_lattice = (f.step - step).abs() <= 1e-9 * step;
        let origin = f.origin - half_width as f64 * step;
        if same_lattice && route == ConvolutionRoute::Auto {
            let weights = kernel_weights(sigma, step, half_width);
            (origin, step, lattice_convolve(&f.values, &weights))
        } else {
            let count = ((f.end() - f.origin) / step).ceil() as usize + 2 * half_width + 1;
            (origin, step, direct_convolve(f, sigma, origin, step, count))
        }
    };
    let b = branching as i32;
    let mut values: Vec<f64> = conv.into_iter().map(|v| v.clamp(0.0, 1.0).powi(b)).collect();
    // FFT rounding can leave decreases of order 1e-16.
    let mut running = 0.0;
    for v in values.iter_mut() {
        running = f64::max(running, *v);
        *v = running;
    }
    let first = values.iter().position(|&v| v > TRIM).unwrap_or(0).saturating_sub(1);
    let last = values
        .iter()
        .rposition(|&v| v < 1.0 - TRIM)
        .map_or(values.len() - 1, |i| (i + 1).min(values.len() - 1));
    let values = values[first..=last].to_vec();
    CdfGrid::new(origin + first as f64 * step, step, values)
}

/// `G(x) = [∫ F(x - s) dΦ_σ(s)]^b` with `σ = spec.std(generation)`.
pub fn brw_cdf_step(f: &CdfGrid, spec: &BrwSpec, generation: usize) -> Result<CdfGrid> {
    if generation == 0 || generation > spec.depth() {
        return Err(Error::InvalidArgument(format!(
            "generation {generation} outside 1..={}",
            spec.depth()
        )));
    }
    convolve_power(
        f,
        spec.std(generation),
        spec.branching,
        spec.step,
        ConvolutionRoute::Auto,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationSummary {
    pub generation: usize,
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub dh_gap: f64,
}

impl GenerationSummary {
    pub fn of(generation: usize, grid: &CdfGrid) -> Self {
        Self {
            generation,
            mean: grid.mean(),
            median: grid.median(),
            q10: grid.quantile(0.1),
            q90: grid.quantile(0.9),
            dh_gap: grid.dh_gap(),
        }
    }

    pub fn spread_90_10(&self) -> f64 {
        self.q90 - self.q10
    }
}

#[derive(Clone, Debug)]
pub struct BrwRun {
    pub grids: Vec<CdfGrid>,
    pub summaries: Vec<GenerationSummary>,
    /// `E M_{t+1} - E M_t - E|M_t - M'_t| / 2` for `t = 0..n`.
    pub dh_slack: Vec<f64>,
}

impl BrwRun {
    /// Does the gap inequality hold at every generation up to `tol`?
    pub fn dekking_host_holds(&self, tol: f64) -> bool {
        self.dh_slack.iter().all(|s| *s >= -tol)
    }
}

/// Iterate the recursion from a point mass at 0 to depth `spec.depth()`.
///
/// Step `t` adds the increments of generation `n - t + 1`, so grid `t` is the
/// law of the maximum over the bottom `t` generations of the tree. With a
/// constant standard deviation this is the law of `M_t`.
pub fn brw_run(spec: &BrwSpec) -> Result<BrwRun> {
    let n = spec.depth();
    let mut grids = vec![CdfGrid::point_mass(0.0)];
    for t in 1..=n {
        let next = brw_cdf_step(&grids[t - 1], spec, n - t + 1)?;
        grids.push(next);
    }
    let summaries: Vec<GenerationSummary> = grids
        .iter()
        .enumerate()
        .map(|(t, g)| GenerationSummary::of(t, g))
        .collect();
    let dh_slack = summaries
        .windows(2)
        .map(|w| w[1].mean - w[0].mean - w[0].dh_gap / 2.0)
        .collect();
    Ok(BrwRun {
        grids,
        summaries,
        dh_slack,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrwSimStats {
    pub depth: usize,
    pub samples: usize,
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub dh_gap: f64,
    pub dh_se: f64,
}

fn subtree_max<R: Rng>(spec: &BrwSpec, generation: usize, position: f64, rng: &mut R) -> f64 {
    if generation == spec.depth() {
        return position;
    }
    let sigma = spec.std(generation + 1);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..spec.branching {
        let z: f64 = StandardNormal.sample(rng);
        best = best.max(subtree_max(spec, generation + 1, position + sigma * z, rng));
    }
    best
}

/// One simulated maximum per stream, depth first.
pub fn brw_maxima(
    spec: &BrwSpec,
    samples: usize,
    seed: SeedSpec,
    workers: usize,
    leaf_budget: f64,
) -> Result<Vec<f64>> {
    let needed = (spec.branching as f64).powi(spec.depth() as i32) * samples as f64;
    if needed > leaf_budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: leaf_budget,
        });
    }
    run_indexed(samples, seed, workers, || (), |_, _, s| {
        subtree_max(spec, 0, 0.0, &mut s.rng())
    })
}

pub fn brw_simulate(
    spec: &BrwSpec,
    samples: usize,
    seed: SeedSpec,
    workers: usize,
    leaf_budget: f64,
) -> Result<BrwSimStats> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let maxima = brw_maxima(spec, samples, seed, workers, leaf_budget)?;
    let var = variance(&maxima);
    let gaps: Vec<f64> = maxima.chunks_exact(2).map(|p| (p[0] - p[1]).abs()).collect();
    Ok(BrwSimStats {
        depth: spec.depth(),
        samples,
        mean: mean(&maxima),
        var,
        se_mean: (var / samples as f64).sqrt(),
        dh_gap: mean(&gaps),
        dh_se: (variance(&gaps) / gaps.len() as f64).sqrt(),
    })
}
