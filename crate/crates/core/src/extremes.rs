//! Monte Carlo statistics of `Z_n = max_{z ∈ V_N} X_z`, `N = 2^n`, and the
//! reports built from them.
//!
//! The maximum runs over all of `V_N`, so the zero boundary makes `Z_n >= 0`.
//! Independent copies for the paired gap `E|Z - Z'|` are consecutive samples
//! `(2i, 2i + 1)`. Quantiles are nearest-rank quantiles of the centered
//! maximum `Z - mean`, with the run's own mean.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Site};
use crate::rng::SeedSpec;
use crate::sampler::{batch_maxima, Field};
use crate::stats::{mean, nearest_rank, variance, CompensatedSum};

/// `2 sqrt(2/π)`, the limit of `Z_n / ln N`.
pub const GROWTH_CONSTANT: f64 = 1.595_769_121_605_730_7;
/// `E max(ξ, 0) = 1/sqrt(2π)`: the exact value of `EZ_1`.
pub const LEVEL_ONE_MEAN: f64 = 0.398_942_280_401_432_7;
/// `E|ξ⁺ - ξ'⁺| = 1/sqrt(π)`: the exact paired gap at `n = 1`.
pub const LEVEL_ONE_GAP: f64 = 0.564_189_583_547_756_3;
/// Fewest samples accepted by [`mc_max_stats`].
pub const MIN_SAMPLES: usize = 100;

/// SE multipliers: `inequality` for theorem-backed inequalities, `point`
/// for comparisons against exact values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub inequality: f64,
    pub point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            inequality: 2.0,
            point: 3.0,
        }
    }
}

/// Maximum over all sites, ties broken by the lexicographically first site.
pub fn field_max(field: &Field) -> (f64, Site) {
    let box_spec = field.box_spec();
    let mut best = (field.values()[0], box_spec.site_at(0));
    for (i, &v) in field.values().iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, box_spec.site_at(i));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantiles {
    pub q10: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxStats {
    pub n: u32,
    pub side: usize,
    pub samples: usize,
    pub mean_max: f64,
    pub var_max: f64,
    pub se_mean: f64,
    pub dh_gap: f64,
    pub dh_se: f64,
    /// Quantiles of the centered maximum.
    pub quantiles: Quantiles,
}

impl MaxStats {
    /// Summarize the maxima of independent fields on `V_{2^n}`, in sample order.
    pub fn from_maxima(n: u32, maxima: &[f64]) -> Result<Self> {
        if maxima.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two samples for a paired gap".into(),
            ));
        }
        let samples = maxima.len();
        let mean_max = mean(maxima);
        let var_max = variance(maxima);
        let gaps: Vec<f64> = maxima.chunks_exact(2).map(|p| (p[0] - p[1]).abs()).collect();
        let dh_gap = mean(&gaps);
        let dh_se = (variance(&gaps) / gaps.len() as f64).sqrt();
        let mut centered: Vec<f64> = maxima.iter().map(|z| z - mean_max).collect();
        centered.sort_by(f64::total_cmp);
        let q = |p| nearest_rank(&centered, p);
        Ok(Self {
            n,
            side: 1 << n,
            samples,
            mean_max,
            var_max,
            se_mean: (var_max / samples as f64).sqrt(),
            dh_gap,
            dh_se,
            quantiles: Quantiles {
                q10: q(0.10),
                q25: q(0.25),
                q50: q(0.50),
                q75: q(0.75),
                q90: q(0.90),
            },
        })
    }

    pub fn spread_90_10(&self) -> f64 {
        self.quantiles.q90 - self.quantiles.q10
    }

    pub fn iqr(&self) -> f64 {
        self.quantiles.q75 - self.quantiles.q25
    }
}

/// `E max(Z, Z')` over consecutive pairs, computed directly and through
/// `max(a, b) = (a + b + |a - b|) / 2`.
pub fn paired_max_estimates(maxima: &[f64]) -> (f64, f64) {
    let mut direct = CompensatedSum::default();
    let mut identity = CompensatedSum::default();
    let mut pairs = 0usize;
    for p in maxima.chunks_exact(2) {
        direct.add(p[0].max(p[1]));
        identity.add((p[0] + p[1] + (p[0] - p[1]).abs()) / 2.0);
        pairs += 1;
    }
    let pairs = pairs.max(1) as f64;
    (direct.value() / pairs, identity.value() / pairs)
}

/// Maxima of `samples` spectral fields on `V_{2^n}`. The streams come from
/// `seed.derive(n)`, so different levels never share random numbers.
pub fn mc_maxima(n: u32, samples: usize, seed: SeedSpec, workers: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    batch_maxima(BoxSpec::new(n)?, samples, seed.derive(n as u64), workers)
}

pub fn mc_max_stats(n: u32, samples: usize, seed: SeedSpec, workers: usize) -> Result<MaxStats> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    MaxStats::from_maxima(n, &mc_maxima(n, samples, seed, workers)?)
}

fn check_consecutive(stats: &[MaxStats]) -> Result<()> {
    for w in stats.windows(2) {
        if w[1].n != w[0].n + 1 {
            return Err(Error::NonConsecutiveLevels {
                prev: w[0].n,
                next: w[1].n,
            });
        }
    }
    Ok(())
}

/// Verdicts for one step `n → n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepVerdict {
    pub n: u32,
    pub increment: f64,
    /// `sqrt(se_n² + se_{n+1}²)`.
    pub combined_se: f64,
    /// `increment >= -k · combined_se`.
    pub monotone: bool,
    /// `dh_gap(n) / 2`.
    pub half_gap: f64,
    /// `sqrt(se_n² + se_{n+1}² + (dh_se / 2)²)`.
    pub gap_se: f64,
    /// `increment >= half_gap - k · gap_se`.
    pub dekking_host: bool,
}

/// Check `EZ_{n+1} >= EZ_n` and `EZ_{n+1} - EZ_n >= E|Z_n - Z'_n| / 2`, each up
/// to `se_multiplier` standard errors.
pub fn monotonicity_report(stats: &[MaxStats], se_multiplier: f64) -> Result<Vec<StepVerdict>> {
    check_consecutive(stats)?;
    Ok(stats
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let increment = b.mean_max - a.mean_max;
            let combined_se = a.se_mean.hypot(b.se_mean);
            let half_gap = a.dh_gap / 2.0;
            let gap_se = combined_se.hypot(a.dh_se / 2.0);
            StepVerdict {
                n: a.n,
                increment,
                combined_se,
                monotone: increment >= -se_multiplier * combined_se,
                half_gap,
                gap_se,
                dekking_host: increment >= half_gap - se_multiplier * gap_se,
            }
        })
        .collect())
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorReport {
    pub threshold: f64,
    /// Levels `n` with `EZ_{n+1} <= EZ_n + K`.
    pub detected: Vec<u32>,
    /// Levels `n` for which both `n` and `n + 1` were measured.
    pub scanned: Vec<u32>,
    pub density: f64,
    /// Fitted slope of `EZ_n` against `n`.
    pub slope: Option<f64>,
    /// `slope / K`: asymptotic bound on the fraction of levels in `[n, 2n]`
    /// whose increment exceeds `K`.
    pub violation_bound: Option<f64>,
    /// Largest increment seen over the scanned steps.
    pub max_increment: Option<f64>,
}

pub fn subsequence_detector(stats: &[MaxStats], threshold: f64) -> Result<DetectorReport> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut detected = Vec::new();
    let mut scanned = Vec::new();
    let mut max_increment: Option<f64> = None;
    for w in stats.windows(2) {
        if w[1].n != w[0].n + 1 {
            continue;
        }
        let inc = w[1].mean_max - w[0].mean_max;
        scanned.push(w[0].n);
        max_increment = Some(max_increment.map_or(inc, |m| m.max(inc)));
        if inc <= threshold {
            detected.push(w[0].n);
        }
    }
    let xs: Vec<f64> = stats.iter().map(|s| s.n as f64).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.mean_max).collect();
    let slope = slope(&xs, &ys);
    Ok(DetectorReport {
        threshold,
        density: if scanned.is_empty() {
            0.0
        } else {
            detected.len() as f64 / scanned.len() as f64
        },
        detected,
        scanned,
        slope,
        violation_bound: slope.map(|c| c / threshold),
        max_increment,
    })
}

/// Fits of `EZ` against `ln N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    /// `EZ ≈ c ln N - c2 ln ln N + intercept`.
    pub c_hat: f64,
    pub c2_hat: f64,
    pub intercept: f64,
    /// `(n, observed - predicted)` for the three-term fit.
    pub residuals: Vec<(u32, f64)>,
    /// Two-term fit with `c` pinned to [`GROWTH_CONSTANT`].
    pub pinned_c2: f64,
    pub pinned_intercept: f64,
    /// Plain regression `EZ ≈ slope · ln N + intercept`.
    pub linear_c: f64,
    pub linear_intercept: f64,
}

fn least_squares(design: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let cols = design.ncols();
    if design.nrows() < cols {
        return Err(Error::DegenerateDesign(format!(
            "{} observations for {cols} parameters",
            design.nrows()
        )));
    }
    let qr = design.qr();
    let r = qr.r();
    let scale = r.diagonal().abs().max();
    if r.diagonal().abs().min() <= 1e-12 * scale.max(1.0) {
        return Err(Error::DegenerateDesign("columns are linearly dependent".into()));
    }
    let qtb = qr.q().transpose() * rhs;
    r.solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::DegenerateDesign("singular triangular factor".into()))
}

/// Three-term fit needs at least four distinct levels.
pub fn growth_fit(stats: &[MaxStats]) -> Result<GrowthFit> {
    let mut levels: Vec<u32> = stats.iter().map(|s| s.n).collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.len() < 4 || levels.len() != stats.len() {
        return Err(Error::DegenerateDesign(format!(
            "need at least 4 distinct levels, got {} distinct of {}",
            levels.len(),
            stats.len()
        )));
    }
    if levels[0] == 0 {
        return Err(Error::DegenerateDesign("ln ln N undefined for N = 1".into()));
    }
    let log_n: Vec<f64> = stats.iter().map(|s| (s.side as f64).ln()).collect();
    let y = DVector::from_iterator(stats.len(), stats.iter().map(|s| s.mean_max));
    let k = stats.len();

    let full = least_squares(
        DMatrix::from_fn(k, 3, |i, j| match j {
            0 => log_n[i],
            1 => -log_n[i].ln(),
            _ => 1.0,
        }),
        y.clone(),
    )?;
    let residuals = stats
        .iter()
        .zip(&log_n)
        .map(|(s, l)| (s.n, s.mean_max - (full[0] * l - full[1] * l.ln() + full[2])))
        .collect();

    let pinned = least_squares(
        DMatrix::from_fn(k, 2, |i, j| if j == 0 { -log_n[i].ln() } else { 1.0 }),
        DVector::from_iterator(k, (0..k).map(|i| y[i] - GROWTH_CONSTANT * log_n[i])),
    )?;
    let linear = least_squares(
        DMatrix::from_fn(k, 2, |i, j| if j == 0 { log_n[i] } else { 1.0 }),
        y,
    )?;
    Ok(GrowthFit {
        c_hat: full[0],
        c2_hat: full[1],
        intercept: full[2],
        residuals,
        pinned_c2: pinned[0],
        pinned_intercept: pinned[1],
        linear_c: linear[0],
        linear_intercept: linear[1],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpread {
    pub n: u32,
    pub spread_90_10: f64,
    pub iqr: f64,
    pub dh_gap: f64,
    pub var_over_n: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TightnessReport {
    pub levels: Vec<LevelSpread>,
    /// `max / min` of `q90 - q10` across levels.
    pub spread_ratio: f64,
    /// `max / min` of the interquartile range across levels.
    pub iqr_ratio: f64,
}

fn ratio(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = values.fold(f64::INFINITY, f64::min);
    max / min
}

pub fn tightness_diagnostic(stats: &[MaxStats]) -> Result<TightnessReport> {
    if stats.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "tightness diagnostic needs at least 3 levels, got {}",
            stats.len()
        )));
    }
    let levels: Vec<LevelSpread> = stats
        .iter()
        .map(|s| LevelSpread {
            n: s.n,
            spread_90_10: s.spread_90_10(),
            iqr: s.iqr(),
            dh_gap: s.dh_gap,
            var_over_n: s.var_max / s.n as f64,
        })
        .collect();
    Ok(TightnessReport {
        spread_ratio: ratio(levels.iter().map(|l| l.spread_90_10)),
        iqr_ratio: ratio(levels.iter().map(|l| l.iqr)),
        levels,
    })
}

/// Exact `n = 1` checks: `|mean - 1/sqrt(2π)|` and `|gap - 1/sqrt(π)|` in units
/// of their standard errors.
pub fn level_one_z_scores(stats: &MaxStats) -> (f64, f64) {
    (
        (stats.mean_max - LEVEL_ONE_MEAN).abs() / stats.se_mean,
        (stats.dh_gap - LEVEL_ONE_GAP).abs() / stats.dh_se,
    )
}

impl fmt::Display for StepVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>3} -> {:<3} {:>10.5} {:>9.5} {:>5} {:>10.5} {:>9.5} {:>5}",
            self.n,
            self.n + 1,
            self.increment,
            self.combined_se,
            verdict(self.monotone),
            self.half_gap,
            self.gap_se,
            verdict(self.dekking_host)
        )
    }
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Plain-text rendering of all reports for a sequence of levels.
pub fn render_reports(stats: &[MaxStats], tol: Tolerances, threshold: f64) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "levels");
    let _ = writeln!(
        out,
        "{:>3} {:>6} {:>8} {:>10} {:>9} {:>9} {:>9} {:>9}",
        "n", "N", "samples", "mean_max", "se_mean", "var_max", "dh_gap", "dh_se"
    );
    for s in stats {
        let _ = writeln!(
            out,
            "{:>3} {:>6} {:>8} {:>10.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            s.n, s.side, s.samples, s.mean_max, s.se_mean, s.var_max, s.dh_gap, s.dh_se
        );
    }
    if let Some(first) = stats.iter().find(|s| s.n == 1) {
        let (zm, zg) = level_one_z_scores(first);
        let _ = writeln!(out, "\nexact n=1 checks ({} SE)", tol.point);
        let _ = writeln!(
            out,
            "  EZ_1   {:.5} vs {:.5}: {:.2} SE {}",
            first.mean_max,
            LEVEL_ONE_MEAN,
            zm,
            verdict(zm <= tol.point)
        );
        let _ = writeln!(
            out,
            "  gap_1  {:.5} vs {:.5}: {:.2} SE {}",
            first.dh_gap,
            LEVEL_ONE_GAP,
            zg,
            verdict(zg <= tol.point)
        );
    }
    let _ = writeln!(out, "\nmonotonicity ({} SE)", tol.inequality);
    match monotonicity_report(stats, tol.inequality) {
        Ok(steps) => {
            let _ = writeln!(
                out,
                "{:>10} {:>10} {:>9} {:>5} {:>10} {:>9} {:>5}",
                "step", "increment", "se", "mono", "gap/2", "gap_se", "DH"
            );
            for s in steps {
                let _ = writeln!(out, "{s}");
            }
        }
        Err(e) => {
            let _ = writeln!(out, "  unavailable: {e}");
        }
    }
    let _ = writeln!(out, "\ntightness");
    match tightness_diagnostic(stats) {
        Ok(t) => {
            let _ = writeln!(
                out,
                "{:>3} {:>10} {:>10} {:>10} {:>10}",
                "n", "q90-q10", "iqr", "dh_gap", "var/n"
            );
            for l in &t.levels {
                let _ = writeln!(
                    out,
                    "{:>3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
                    l.n, l.spread_90_10, l.iqr, l.dh_gap, l.var_over_n
                );
            }
            let _ = writeln!(
                out,
                "spread ratio {:.4}, iqr ratio {:.4}",
                t.spread_ratio, t.iqr_ratio
            );
        }
        Err(e) => {
            let _ = writeln!(out, "  unavailable: {e}");
        }
    }
    let _ = writeln!(out, "\nsubsequence detector (K = {threshold})");
    match subsequence_detector(stats, threshold) {
        Ok(d) => {
            let _ = writeln!(
                out,
                "  detected {:?} of {:?}, density {:.3}",
                d.detected, d.scanned, d.density
            );
            if let (Some(c), Some(b)) = (d.slope, d.violation_bound) {
                let _ = writeln!(out, "  slope of EZ_n in n {c:.5}, violation bound {b:.5}");
            }
            if let Some(m) = d.max_increment {
                let _ = writeln!(out, "  observed C (max increment) {m:.5}");
            }
        }
        Err(e) => {
            let _ = writeln!(out, "  unavailable: {e}");
        }
    }
    let _ = writeln!(out, "\ngrowth fit");
    match growth_fit(stats) {
        Ok(g) => {
            let _ = writeln!(
                out,
                "  three-term: c {:.5}, c2 {:.5}, intercept {:.5}",
                g.c_hat, g.c2_hat, g.intercept
            );
            let _ = writeln!(
                out,
                "  c pinned at {GROWTH_CONSTANT:.5}: c2 {:.5}, intercept {:.5}",
                g.pinned_c2, g.pinned_intercept
            );
            let _ = writeln!(
                out,
                "  linear in ln N: slope {:.5}, intercept {:.5}",
                g.linear_c, g.linear_intercept
            );
        }
        Err(e) => {
            let _ = writeln!(out, "  unavailable: {e}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(n: u32, mean_max: f64) -> MaxStats {
        MaxStats {
            n,
            side: 1 << n,
            samples: 1000,
            mean_max,
            var_max: 0.25,
            se_mean: 0.01,
            dh_gap: 0.5,
            dh_se: 0.01,
            quantiles: Quantiles {
                q10: -0.6,
                q25: -0.3,
                q50: 0.0,
                q75: 0.3,
                q90: 0.6,
            },
        }
    }

    #[test]
    fn constants() {
        assert!((GROWTH_CONSTANT - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!((LEVEL_ONE_MEAN - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((LEVEL_ONE_GAP - 1.0 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn field_max_examples() {
        let b = BoxSpec::new(3).unwrap();
        assert_eq!(field_max(&Field::zeros(b)), (0.0, Site::new(0, 0)));
        let mut f = Field::from_fn(b, |s| if b.is_boundary(s) { 0.0 } else { -1.0 });
        assert_eq!(field_max(&f), (0.0, Site::new(0, 0)));
        f.set(Site::new(3, 3), 2.5);
        assert_eq!(field_max(&f), (2.5, Site::new(3, 3)));
        f.set(Site::new(5, 1), 2.5);
        assert_eq!(field_max(&f), (2.5, Site::new(3, 3)));
    }

    #[test]
    fn stats_invariants() {
        let maxima: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64 / 50.0).collect();
        let s = MaxStats::from_maxima(3, &maxima).unwrap();
        assert!((s.se_mean - (s.var_max / 200.0).sqrt()).abs() < 1e-12);
        let q = s.quantiles;
        assert!(q.q10 <= q.q25 && q.q25 <= q.q50 && q.q50 <= q.q75 && q.q75 <= q.q90);
        let (direct, identity) = paired_max_estimates(&maxima);
        assert!((direct - identity).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples() {
        assert!(mc_max_stats(1, 99, SeedSpec::new(1, 0), 1).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let a = synthetic(1, LEVEL_ONE_MEAN);
        let mut b = synthetic(2, 0.9);
        let steps = monotonicity_report(&[a.clone(), b.clone()], 2.0).unwrap();
        assert!(steps[0].monotone && steps[0].dekking_host);
        b.mean_max = 0.5;
        let steps = monotonicity_report(&[a.clone(), b], 2.0).unwrap();
        assert!(steps[0].monotone && !steps[0].dekking_host);
        let err = monotonicity_report(&[synthetic(3, 1.0), synthetic(5, 2.0)], 2.0).unwrap_err();
        assert!(matches!(err, Error::NonConsecutiveLevels { prev: 3, next: 5 }));
        // identical statistics: monotone, and DH only when the gap is ~0
        let mut c = synthetic(1, 1.0);
        let mut d = synthetic(2, 1.0);
        let steps = monotonicity_report(&[c.clone(), d.clone()], 2.0).unwrap();
        assert!(steps[0].monotone && !steps[0].dekking_host);
        c.dh_gap = 0.0;
        d.dh_gap = 0.0;
        assert!(monotonicity_report(&[c, d], 2.0).unwrap()[0].dekking_host);
    }

    #[test]
    fn detector_examples() {
        let flat: Vec<_> = (1..=6).map(|n| synthetic(n, 3.0)).collect();
        let r = subsequence_detector(&flat, 0.1).unwrap();
        assert_eq!(r.detected, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.density, 1.0);
        let linear: Vec<_> = (1..=6).map(|n| synthetic(n, 2.0 * n as f64)).collect();
        let r = subsequence_detector(&linear, 1.0).unwrap();
        assert!(r.detected.is_empty());
        assert!((r.slope.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.violation_bound.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.max_increment, Some(2.0));
        assert!(subsequence_detector(&linear, 0.0).is_err());
    }

    #[test]
    fn growth_fit_recovers_exact_model() {
        let stats: Vec<_> = (5..=10)
            .map(|n| {
                let l = ((1u64 << n) as f64).ln();
                synthetic(n, GROWTH_CONSTANT * l - 0.7 * l.ln() + 0.3)
            })
            .collect();
        let g = growth_fit(&stats).unwrap();
        assert!((g.c_hat - GROWTH_CONSTANT).abs() < 1e-9);
        assert!((g.c2_hat - 0.7).abs() < 1e-9);
        assert!((g.intercept - 0.3).abs() < 1e-9);
        assert!((g.pinned_c2 - 0.7).abs() < 1e-9);
        for ((n, r), s) in g.residuals.iter().zip(&stats) {
            assert_eq!(*n, s.n);
            assert!(r.abs() < 1e-9);
        }
        assert!(matches!(
            growth_fit(&stats[..3]),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn tightness_identical_levels() {
        let stats: Vec<_> = (3..=6).map(|n| synthetic(n, n as f64)).collect();
        let t = tightness_diagnostic(&stats).unwrap();
        assert_eq!(t.spread_ratio, 1.0);
        assert_eq!(t.iqr_ratio, 1.0);
        assert!(tightness_diagnostic(&stats[..2]).is_err());
    }
}
