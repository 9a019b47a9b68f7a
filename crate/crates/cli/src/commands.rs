//! One function per subcommand. Each returns the text for stdout.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gffmax_core::brw::{brw_run, brw_simulate, BrwSpec, GenerationSummary};
use gffmax_core::extremes::{field_max, mc_max_stats, render_reports, verdict, Tolerances};
use gffmax_core::hierarchy::{exact_conditional_covariance, max_cross_level_covariance, Hierarchy};
use gffmax_core::io;
use gffmax_core::sampler::{run_indexed, DenseSampler, SamplerScratch, SpectralSampler};
use gffmax_core::{green_dense, green_spectral, variance_profile, BoxSpec, Field, MaxStats, SeedSpec};

use crate::config::ExperimentConfig;
use crate::exit::Failure;
use crate::lock::OutputLock;
use crate::persist::{stats_path, StatsStore};

pub type Outcome = Result<String, Failure>;

fn box_from_side(side: usize) -> Result<BoxSpec, Failure> {
    BoxSpec::from_side(side).map_err(|e| Failure::usage(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path)?))
}

fn finish(mut w: BufWriter<File>) -> Result<(), Failure> {
    w.flush()?;
    Ok(())
}

pub struct GreenRequest {
    pub side: usize,
    pub spectral: bool,
    pub variance: bool,
}

pub fn green(cfg: &ExperimentConfig, req: &GreenRequest) -> Outcome {
    let b = box_from_side(req.side)?;
    let g = if req.spectral {
        green_spectral(b)?
    } else {
        green_dense(b, cfg.dense_cutoff)?
    };
    let _lock = OutputLock::acquire(&cfg.out)?;
    let form = if req.spectral { "spectral" } else { "dense" };
    let kind = if req.variance { "variance" } else { "green" };
    let path = cfg.out.join(format!("{kind}_N{}_{form}.csv", req.side));
    let mut w = create(&path)?;
    if req.variance {
        io::write_variance_csv(&mut w, &variance_profile(&g))?;
    } else {
        io::write_green_csv(&mut w, &g)?;
    }
    finish(w)?;
    Ok(format!("wrote {}\n", path.display()))
}

pub struct SampleRequest {
    pub side: usize,
    pub count: usize,
    pub dense: bool,
    pub dump_fields: bool,
}

/// Per-sample summary: the maximum, where it sits, and the center value.
struct SampleSummary {
    max: f64,
    at: (usize, usize),
    center: f64,
}

fn summarize(field: &Field) -> SampleSummary {
    let (max, site) = field_max(field);
    SampleSummary {
        max,
        at: (site.x, site.y),
        center: field.get(field.box_spec().center()),
    }
}

fn dump_field(out: &Path, stem: &str, field: &Field) -> gffmax_core::Result<()> {
    let mut bin = BufWriter::new(File::create(out.join(format!("{stem}.bin")))?);
    io::write_field_binary(&mut bin, field)?;
    bin.flush()?;
    let mut csv = BufWriter::new(File::create(out.join(format!("{stem}.csv")))?);
    io::write_field_csv(&mut csv, field)?;
    csv.flush()?;
    Ok(())
}

pub fn sample(cfg: &ExperimentConfig, req: &SampleRequest) -> Outcome {
    let b = box_from_side(req.side)?;
    if b.side() < 2 {
        return Err(Failure::usage("sampling needs N >= 2"));
    }
    let seed = SeedSpec::new(cfg.seed, 0);
    let form = if req.dense { "dense" } else { "spectral" };
    let dense = if req.dense {
        Some(DenseSampler::new(&green_dense(b, cfg.dense_cutoff)?)?)
    } else {
        None
    };
    let spectral = SpectralSampler::new(b)?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let out = cfg.out.as_path();
    let summaries = run_indexed(
        req.count,
        seed,
        cfg.workers,
        || (SamplerScratch::default(), Field::zeros(b)),
        |(scratch, field), i, s| -> gffmax_core::Result<SampleSummary> {
            match &dense {
                Some(d) => *field = d.sample(s),
                None => spectral.sample_into(s, scratch, field),
            }
            if req.dump_fields {
                dump_field(out, &format!("field_N{}_{form}_seed{}_{i}", req.side, cfg.seed), field)?;
            }
            Ok(summarize(field))
        },
    )?
    .into_iter()
    .collect::<gffmax_core::Result<Vec<_>>>()?;
    let path = out.join(format!("samples_N{}_{form}_seed{}.csv", req.side, cfg.seed));
    let mut w = create(&path)?;
    writeln!(w, "index,max,max_x,max_y,center")?;
    for (i, s) in summaries.iter().enumerate() {
        writeln!(w, "{i},{},{},{},{}", s.max, s.at.0, s.at.1, s.center)?;
    }
    finish(w)?;
    let mean = summaries.iter().map(|s| s.max).sum::<f64>() / summaries.len() as f64;
    Ok(format!(
        "{} {form} sample(s) on V_{}: mean maximum {mean:.6}\nwrote {}\n",
        summaries.len(),
        req.side,
        path.display()
    ))
}

pub struct HierarchyRequest {
    pub side: usize,
    pub k: u32,
    pub exact: bool,
}

/// Tolerance of the exact Markov and cross-level checks.
pub const EXACT_TOL: f64 = 1e-8;

pub fn hierarchy(cfg: &ExperimentConfig, req: &HierarchyRequest) -> Outcome {
    let b = box_from_side(req.side)?;
    if b.level() == 0 {
        return Err(Failure::usage("hierarchy needs N >= 2"));
    }
    if req.k == 0 || req.k > b.level() {
        return Err(Failure::usage(format!("k must lie in 1..={}", b.level())));
    }
    let mut text = String::new();
    if req.exact {
        let check = exact_conditional_covariance(b, req.k, cfg.dense_cutoff)?
            .markov_check(cfg.dense_cutoff)?;
        let cross = max_cross_level_covariance(b, cfg.dense_cutoff)?;
        let markov_ok = check.passes(EXACT_TOL);
        let cross_ok = cross <= EXACT_TOL;
        let _ = writeln!(
            text,
            "Markov check N={} k={}: {} (max block deviation {:.3e}, max off-block covariance {:.3e}, tolerance {EXACT_TOL:e})",
            req.side,
            req.k,
            verdict(markov_ok),
            check.max_block_deviation,
            check.max_off_block
        );
        let _ = writeln!(
            text,
            "cross-level covariance N={}: {} (max {:.3e})",
            req.side,
            verdict(cross_ok),
            cross
        );
        if !(markov_ok && cross_ok) {
            return Err(Failure::other(text));
        }
        return Ok(text);
    }
    let field = gffmax_core::sample_spectral(b, SeedSpec::new(cfg.seed, 0))?;
    let h = Hierarchy::new(b)?;
    let d = h.decompose(&field)?;
    let (_, residual) = h.condition(&field, req.k)?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let path = cfg.out.join(format!("decomposition_N{}_seed{}.csv", req.side, cfg.seed));
    let mut w = create(&path)?;
    io::write_decomposition_csv(&mut w, &d)?;
    finish(w)?;
    let c = b.center();
    let _ = writeln!(text, "decomposition of one field on V_{} (seed {})", req.side, cfg.seed);
    let _ = writeln!(text, "telescoping error {:.3e}", d.telescoping_error(&field));
    let _ = writeln!(text, "{:>5} {:>12} {:>12}", "level", "center", "max |level|");
    for k in 1..=b.level() {
        let l = d.level(k);
        let peak = l.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let _ = writeln!(text, "{k:>5} {:>12.6} {:>12.6}", l.get(c), peak);
    }
    let on_lines = b
        .sites()
        .filter(|s| gffmax_core::hierarchy::on_level_lines(b, req.k, *s))
        .fold(0.0f64, |m, s| m.max(residual.get(s).abs()));
    let _ = writeln!(text, "residual after level {} on its lines: {:.3e}", req.k, on_lines);
    let _ = writeln!(text, "wrote {}", path.display());
    Ok(text)
}

pub struct ExtremesRequest {
    /// Print the reports; otherwise only persist.
    pub quiet: bool,
}

pub fn extremes(cfg: &ExperimentConfig, req: &ExtremesRequest) -> Outcome {
    let _lock = OutputLock::acquire(&cfg.out)?;
    let mut store = StatsStore::open(stats_path(&cfg.out, cfg.seed))?;
    for n in cfg.n_min..=cfg.n_max {
        if store.lookup(n, cfg.samples)?.is_some() {
            eprintln!("level {n}: persisted, skipped");
            continue;
        }
        let stats = mc_max_stats(n, cfg.samples, SeedSpec::new(cfg.seed, 0), cfg.workers)?;
        eprintln!("level {n}: mean max {:.5} ± {:.5}", stats.mean_max, stats.se_mean);
        store.append(stats)?;
    }
    store.finish()?;
    let rows: Vec<MaxStats> = store
        .rows()
        .iter()
        .filter(|r| (cfg.n_min..=cfg.n_max).contains(&r.n))
        .cloned()
        .collect();
    let report = render_reports(&rows, cfg.tolerances, cfg.threshold);
    let path = cfg.out.join(format!("extremes_report_seed{}.txt", cfg.seed));
    fs::write(&path, &report)?;
    if req.quiet {
        Ok(format!("wrote {}\n", path.display()))
    } else {
        Ok(report)
    }
}

pub struct BrwRequest {
    pub depth: usize,
    pub branching: u32,
    pub sigma: f64,
    pub step: Option<f64>,
    pub simulate: Option<usize>,
    pub leaf_budget: f64,
    pub dump_cdf: bool,
}

/// Allowance for quadrature error in recursion/simulation comparisons.
pub const QUADRATURE_ALLOWANCE: f64 = 1e-3;
/// Tolerance of the recursion's gap inequality.
pub const BRW_DH_TOL: f64 = 1e-6;

fn brw_table(summaries: &[GenerationSummary], text: &mut String) {
    let _ = writeln!(
        text,
        "{:>4} {:>12} {:>12} {:>10} {:>10} {:>10}",
        "gen", "mean", "median", "q10", "q90", "dh_gap"
    );
    for s in summaries {
        let _ = writeln!(
            text,
            "{:>4} {:>12.6} {:>12.6} {:>10.5} {:>10.5} {:>10.6}",
            s.generation, s.mean, s.median, s.q10, s.q90, s.dh_gap
        );
    }
}

/// Gap-inequality and spread lines for a list of generation summaries.
fn brw_checks(summaries: &[GenerationSummary], text: &mut String) {
    let worst = summaries
        .windows(2)
        .map(|w| w[1].mean - w[0].mean - w[0].dh_gap / 2.0)
        .fold(f64::INFINITY, f64::min);
    if worst.is_finite() {
        let _ = writeln!(
            text,
            "Dekking-Host: {} (min slack {worst:.3e}, tolerance {BRW_DH_TOL:e})",
            verdict(worst >= -BRW_DH_TOL)
        );
    }
    if let (Some(ten), Some(last)) = (summaries.iter().find(|s| s.generation == 10), summaries.last()) {
        if last.generation > 10 {
            let ratio = last.spread_90_10() / ten.spread_90_10();
            let _ = writeln!(
                text,
                "q90-q10 at generation {} over generation 10: {ratio:.4}",
                last.generation
            );
        }
    }
}

pub fn brw(cfg: &ExperimentConfig, req: &BrwRequest) -> Outcome {
    let mut spec = BrwSpec::new(req.branching, req.sigma, req.depth)?;
    if let Some(step) = req.step {
        spec = spec.with_step(step)?;
    }
    let run = brw_run(&spec)?;
    let sim = req
        .simulate
        .map(|samples| {
            brw_simulate(&spec, samples, SeedSpec::new(cfg.seed, 0), cfg.workers, req.leaf_budget)
        })
        .transpose()?;
    let _lock = OutputLock::acquire(&cfg.out)?;
    let stem = format!("brw_b{}_depth{}", req.branching, req.depth);
    let path = cfg.out.join(format!("{stem}.csv"));
    let mut w = create(&path)?;
    io::write_brw_csv(&mut w, &run.summaries)?;
    finish(w)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "branching random walk, b = {}, sigma = {}, depth {}, grid step {:e}",
        req.branching, req.sigma, req.depth, spec.step
    );
    brw_table(&run.summaries, &mut text);
    brw_checks(&run.summaries, &mut text);
    if req.dump_cdf {
        let cdf = cfg.out.join(format!("brw_cdf_b{}_depth{}.csv", req.branching, req.depth));
        let mut w = create(&cdf)?;
        io::write_cdf_csv(&mut w, run.grids.last().expect("generation 0 exists"))?;
        finish(w)?;
        let _ = writeln!(text, "wrote {}", cdf.display());
    }
    if let Some(sim) = sim {
        let rec = run.summaries.last().expect("generation 0 exists");
        let allowed = cfg.tolerances.point * sim.se_mean + QUADRATURE_ALLOWANCE;
        let diff = (sim.mean - rec.mean).abs();
        let sim_path = cfg.out.join(format!("brw_sim_b{}_depth{}_seed{}.csv", req.branching, req.depth, cfg.seed));
        let mut w = create(&sim_path)?;
        writeln!(w, "depth,samples,mean,se_mean,var,dh_gap,dh_se")?;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            sim.depth, sim.samples, sim.mean, sim.se_mean, sim.var, sim.dh_gap, sim.dh_se
        )?;
        finish(w)?;
        let _ = writeln!(
            text,
            "simulation ({} samples): mean {:.6} ± {:.6} vs recursion {:.6}: {}",
            sim.samples,
            sim.mean,
            sim.se_mean,
            rec.mean,
            verdict(diff <= allowed)
        );
        let _ = writeln!(text, "wrote {}", sim_path.display());
    }
    let _ = writeln!(text, "wrote {}", path.display());
    Ok(text)
}

fn sorted_matches(dir: &Path, keep: impl Fn(&str) -> bool) -> Result<Vec<PathBuf>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(&keep))
        .collect();
    paths.sort();
    Ok(paths)
}

fn is_brw_summary(name: &str) -> bool {
    name.strip_prefix("brw_b")
        .and_then(|rest| rest.strip_suffix(".csv"))
        .and_then(|rest| rest.split_once("_depth"))
        .is_some_and(|(b, d)| b.parse::<u32>().is_ok() && d.parse::<usize>().is_ok())
}

/// Render every persisted table in `dir` without recomputation.
pub fn report(dir: &Path, tol: Tolerances, threshold: f64) -> Outcome {
    if !dir.is_dir() {
        return Err(Failure::missing(format!("{} is not a directory", dir.display())));
    }
    let extremes = sorted_matches(dir, |n| n.starts_with("extremes_seed") && n.ends_with(".csv"))?;
    let brw = sorted_matches(dir, is_brw_summary)?;
    if extremes.is_empty() && brw.is_empty() {
        return Err(Failure::missing(format!("no persisted results in {}", dir.display())));
    }
    let mut text = String::new();
    for path in &extremes {
        let rows = io::read_stats(BufReader::new(File::open(path)?))
            .map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let _ = writeln!(text, "== {name}");
        text.push_str(&render_reports(&rows, tol, threshold));
        text.push('\n');
    }
    for path in &brw {
        let rows = io::read_brw_csv(BufReader::new(File::open(path)?))
            .map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let _ = writeln!(text, "== {name}");
        brw_table(&rows, &mut text);
        brw_checks(&rows, &mut text);
        text.push('\n');
    }
    Ok(text)
}
