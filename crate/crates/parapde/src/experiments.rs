//! Experiment orchestration: named experiments dispatched from a config,
//! replica fan-out over worker threads, deterministic reductions, and
//! pass/fail gates whose tolerances are the acceptance criteria.
//!
//! Replicas are mapped in parallel but collected in index order and reduced
//! with fixed-order pairwise sums, so every report is byte-identical across
//! runs and thread counts.

use crate::besov::DyadicPartition;
use crate::burgers::{burgers_drift, drift_pairing, BurgersSim, DriftAccumulator};
use crate::config::ExperimentConfig;
use crate::gaussian::{
    mollify, sample_potential, sample_potential_gradient_x, sample_regularity_field,
    sample_space_white_noise, Mollifier, NoiseNormalization, OuState, RadialProfile,
};
use crate::pam::{
    build_pam_enhancement, default_initial_condition, solve_pam_direct,
    solve_pam_linear_transform, solve_pam_paracontrolled, PamNonlinearity,
};
use crate::renorm::{
    constants_table, heat_trace_gt, heat_trace_time_integral, pam_counterterm_fn,
    potential_block_variance, sigma_sq_limit, SigmaSqLimit, SumSpec,
};
use crate::report::ExperimentReport;
use crate::sbe::{
    build_sbe_enhancement, galerkin_path_with_increments, solve_sbe_paracontrolled,
    truncated_tree_expansion,
};
use crate::spectral::{SpectralField, TorusGrid};
use crate::stats::{fit_line, fit_loglog, mean_stderr, moment_ratio, MeanStderr};
use crate::wick::{
    enumerate_trees, isserlis_oracle, tree_term, wick_product_expand, wick_to_polynomial,
    GaussianPolynomial,
};
use crate::{Error, Result};
use rayon::prelude::*;

/// A finished experiment: the canonical report plus any gate failures.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub failures: Vec<String>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Fan a replica closure out over the worker pool; results come back in
/// replica order regardless of scheduling.
pub fn replica_map<T: Send>(
    replicas: usize,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<T>>>()
}

struct Gate<'a> {
    failures: &'a mut Vec<String>,
}

impl<'a> Gate<'a> {
    fn check(&mut self, ok: bool, message: String) {
        if !ok {
            self.failures.push(message);
        }
    }

    fn within(&mut self, stat: &MeanStderr, target: f64, label: &str) {
        self.check(
            stat.within(target, 3.0, 0.0),
            format!(
                "{label}: {} +- {} vs target {} (3 SE)",
                stat.mean, stat.stderr, target
            ),
        );
    }
}

/// Dispatch a named experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut report = ExperimentReport::new(config.seed);
    let mut failures = Vec::new();
    match config.experiment.as_str() {
        "ou-moments" => ou_moments(config, &mut report, &mut failures)?,
        "noise-moments" => noise_moments(config, &mut report, &mut failures)?,
        "noise-dump" => noise_dump(config, &mut report)?,
        "drift-antisymmetry" => drift_antisymmetry(config, &mut report, &mut failures)?,
        "burgers-invariance" => burgers_invariance(config, &mut report, &mut failures)?,
        "burgers-energy" => burgers_energy(config, &mut report, &mut failures)?,
        "burgers-drift-moments" => burgers_drift_moments(config, &mut report, &mut failures)?,
        "burgers-modes" => burgers_modes(config, &mut report)?,
        "partition-check" => partition_check(config, &mut report, &mut failures)?,
        "norm-battery" => norm_battery(config, &mut report, &mut failures)?,
        "renorm-constants" => renorm_constants(config, &mut report, &mut failures)?,
        "pam-counterterm-mc" => pam_counterterm_mc(config, &mut report, &mut failures)?,
        "pam-cross-method" => pam_cross_method(config, &mut report, &mut failures)?,
        "pam-renorm-necessity" => pam_renorm_necessity(config, &mut report, &mut failures)?,
        "pam-run" => pam_run(config, &mut report)?,
        "potential-blocks" => potential_blocks(config, &mut report, &mut failures)?,
        "sbe-cross-method" => sbe_cross_method(config, &mut report, &mut failures)?,
        "sbe-run" => sbe_run(config, &mut report)?,
        "wick-tables" => wick_tables(config, &mut report, &mut failures)?,
        other => {
            return Err(Error::Config(format!("unknown experiment '{other}'")));
        }
    }
    report.sort_canonically();
    Ok(ExperimentOutcome { report, failures })
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck and noise moments
// ---------------------------------------------------------------------------

fn ou_moments(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 64)?;
    let grid = TorusGrid::new(1, m)?;
    let ts = [0.1, 0.5];
    let ks = [1i64, 2, 3];
    let samples = replica_map(config.replicas, |r| {
        let mut ou = OuState::new_zero(grid, config.seed, r);
        let mut out = Vec::new();
        let mut prev = 0.0;
        for &t in &ts {
            ou.step(t - prev)?;
            prev = t;
            for &k in &ks {
                out.push(ou.field.coeff(&[k]).norm_sqr());
            }
        }
        Ok(out)
    })?;
    let mut gate = Gate { failures };
    for (ti, &t) in ts.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let vals: Vec<f64> = samples.iter().map(|s| s[ti * ks.len() + ki]).collect();
            let stat = mean_stderr(&vals);
            let target = (1.0 - (-2.0 * (k * k) as f64 * t).exp()) / 2.0;
            let params = format!("k={k};t={t}");
            report.push("ou-moments", &params, "second_moment", stat.mean, stat.stderr, stat.n as u64);
            report.push("ou-moments", &params, "target", target, 0.0, 0);
            gate.within(&stat, target, &format!("ou-moments {params}"));
        }
    }
    Ok(())
}

fn noise_moments(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 32)?;
    let norm = match config.get_str("normalization", "half").as_str() {
        "half" => NoiseNormalization::Half,
        "unit" => NoiseNormalization::Unit,
        other => return Err(Error::Config(format!("unknown normalization '{other}'"))),
    };
    let grid = TorusGrid::new(1, m)?;
    let samples = replica_map(config.replicas, |r| {
        let xi = sample_space_white_noise(grid, config.seed, r, norm);
        Ok([
            xi.coeff(&[1]).norm_sqr(),
            xi.coeff(&[3]).norm_sqr(),
            (xi.coeff(&[1]) * xi.coeff(&[2])).re,
            (xi.coeff(&[1]) * xi.coeff(&[2])).im,
        ])
    })?;
    let mut gate = Gate { failures };
    let target = norm.mode_variance();
    for (idx, k) in [(0usize, 1i64), (1, 3)] {
        let vals: Vec<f64> = samples.iter().map(|s| s[idx]).collect();
        let stat = mean_stderr(&vals);
        let params = format!("k={k}");
        report.push("noise-moments", &params, "second_moment", stat.mean, stat.stderr, stat.n as u64);
        gate.within(&stat, target, &format!("noise second moment k={k}"));
    }
    for (idx, part) in [(2usize, "re"), (3, "im")] {
        let vals: Vec<f64> = samples.iter().map(|s| s[idx]).collect();
        let stat = mean_stderr(&vals);
        let params = format!("k=1;m=2;part={part}");
        report.push("noise-moments", &params, "cross_covariance", stat.mean, stat.stderr, stat.n as u64);
        gate.within(&stat, 0.0, &format!("noise cross covariance ({part})"));
    }
    Ok(())
}

fn noise_dump(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let m = config.get_usize("m", 16)?;
    let grid = TorusGrid::new(1, m)?;
    for r in 0..config.replicas as u64 {
        let xi = sample_space_white_noise(grid, config.seed, r, NoiseNormalization::Half);
        for k in 0..=(grid.max_mode() as i64) {
            let c = xi.coeff(&[k]);
            let params = format!("k={k};replica={r}");
            report.push("noise-dump", &params, "re", c.re, 0.0, 0);
            report.push("noise-dump", &params, "im", c.im, 0.0, 0);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Galerkin Burgers
// ---------------------------------------------------------------------------

fn drift_antisymmetry(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let band = config.get_usize("n-modes", 32)?;
    let states = config.get_usize("states", 100)?;
    let rels = replica_map(states, |r| {
        let sim = BurgersSim::new_stationary(band, config.seed, r)?;
        let pairing = drift_pairing(&sim.state)?.norm();
        let norm = sim.state.field.l2_norm();
        Ok(pairing / norm.powi(3).max(1e-300))
    })?;
    let worst = rels.iter().cloned().fold(0.0, f64::max);
    report.push("drift-antisymmetry", &format!("n-modes={band};states={states}"), "max_relative_pairing", worst, 0.0, 0);
    Gate { failures }.check(
        worst <= 1e-10,
        format!("drift antisymmetry: max |sum v(-k) b_k| / |v|^3 = {worst} > 1e-10"),
    );
    Ok(())
}

fn burgers_invariance(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let band = config.get_usize("n-modes", 16)?;
    let dt = config.get_f64("dt", 1e-3)?;
    let t_final = config.get_f64("t-final", 1.0)?;
    let steps = (t_final / dt).round() as usize;
    let k_top = config.get_usize("k-top", 8)?.min(band);
    let samples = replica_map(config.replicas, |r| {
        let mut sim = BurgersSim::new_stationary(band, config.seed, r)?;
        for _ in 0..steps {
            sim.step(dt)?;
        }
        Ok((1..=k_top as i64)
            .map(|k| sim.state.field.coeff(&[k]).norm_sqr())
            .collect::<Vec<f64>>())
    })?;
    let mut gate = Gate { failures };
    for (ki, k) in (1..=k_top as i64).enumerate() {
        let vals: Vec<f64> = samples.iter().map(|s| s[ki]).collect();
        let stat = mean_stderr(&vals);
        let params = format!("dt={dt};k={k};n-modes={band};t-final={t_final}");
        report.push("burgers-invariance", &params, "second_moment", stat.mean, stat.stderr, stat.n as u64);
        gate.within(&stat, 0.5, &format!("white-noise invariance k={k}"));
    }
    Ok(())
}

fn burgers_energy(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let band = config.get_usize("n-modes", 16)?;
    let dt = config.get_f64("dt", 1e-3)?;
    let t_final = config.get_f64("t-final", 0.1)?;
    let steps = (t_final / dt).round() as usize;
    let mut sim = BurgersSim::new_stationary(band, config.seed, 0)?;
    let mut worst_pairing = 0.0f64;
    for i in 0..=steps {
        let energy = sim.state.field.l2_norm_sq();
        let rel = drift_pairing(&sim.state)?.norm() / sim.state.field.l2_norm().powi(3).max(1e-300);
        worst_pairing = worst_pairing.max(rel);
        if i % 10 == 0 {
            let params = format!("n-modes={band};t={:.6}", sim.state.time);
            report.push("burgers-energy", &params, "energy", energy, 0.0, 0);
        }
        if i < steps {
            sim.step_deterministic(dt)?;
        }
    }
    report.push("burgers-energy", &format!("n-modes={band}"), "max_relative_pairing", worst_pairing, 0.0, 0);
    Gate { failures }.check(
        worst_pairing <= 1e-10,
        format!("energy identity: drift pairing {worst_pairing} > 1e-10"),
    );
    Ok(())
}

fn burgers_drift_moments(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let band = config.get_usize("n-modes", 16)?;
    let dt = config.get_f64("dt", 1e-3)?;
    let t_final = config.get_f64("t-final", 0.5)?;
    let steps = (t_final / dt).round() as usize;
    let k_top = 12usize.min(band);
    let samples = replica_map(config.replicas, |r| {
        let mut sim = BurgersSim::new_stationary(band, config.seed, r)?;
        let mut acc = DriftAccumulator::new(sim.state.field.grid());
        acc.push(&burgers_drift(&sim.state)?, dt)?;
        for _ in 0..steps {
            sim.step(dt)?;
            acc.push(&burgers_drift(&sim.state)?, dt)?;
        }
        Ok((1..=k_top as i64)
            .map(|k| acc.integral.coeff(&[k]).norm_sqr())
            .collect::<Vec<f64>>())
    })?;
    let mut gate = Gate { failures };
    let mut seconds = Vec::new();
    let mut worst_kurtosis = 0.0f64;
    let mut worst_bound_ratio = 0.0f64;
    for (ki, k) in (1..=k_top as i64).enumerate() {
        let vals: Vec<f64> = samples.iter().map(|s| s[ki]).collect();
        let stat = mean_stderr(&vals);
        let kurt = moment_ratio(&vals);
        worst_kurtosis = worst_kurtosis.max(kurt);
        // The Ito-trick bound: E|N_delta(e_k)|^2 <= C |k| delta, with the
        // (2 pi)^{-1} convolution normalization of the drift.
        let two_pi = 2.0 * std::f64::consts::PI;
        worst_bound_ratio =
            worst_bound_ratio.max(stat.mean * two_pi / (k as f64 * t_final));
        seconds.push(stat.mean);
        let params = format!("dt={dt};k={k};n-modes={band};t-final={t_final}");
        report.push("burgers-drift-moments", &params, "second_moment", stat.mean, stat.stderr, stat.n as u64);
        report.push("burgers-drift-moments", &params, "kurtosis_ratio", kurt, 0.0, stat.n as u64);
    }
    // The small modes sit below the asymptotic window: the exact Gaussian
    // evaluation of the increment variance (the zero modes drop out of the
    // convolution, suppressing k <= 3) gives slope ~1.5 over k = 1..8 and
    // ~0.93 over k = 4..12 at delta = 0.5. The fitted-scaling gate runs on
    // the asymptotic window; the 1..8 slope is reported alongside.
    let ks_low: Vec<f64> = (1..=8.min(k_top)).map(|k| k as f64).collect();
    let slope_low = fit_loglog(&ks_low, &seconds[..ks_low.len()]);
    report.push("burgers-drift-moments", &format!("n-modes={band};window=1-8"), "k_slope", slope_low, 0.0, 0);
    let ks: Vec<f64> = (4..=k_top).map(|k| k as f64).collect();
    let slope = fit_loglog(&ks, &seconds[3..]);
    report.push("burgers-drift-moments", &format!("n-modes={band};window=4-12"), "k_slope", slope, 0.0, 0);
    gate.check(
        (slope - 1.0).abs() <= 0.3,
        format!("drift moment scaling: log-log slope in k is {slope}, expected 1.0 +- 0.3"),
    );
    gate.check(
        worst_kurtosis <= 5.0,
        format!("hypercontractivity: kurtosis ratio {worst_kurtosis} exceeds 5"),
    );
    // Fitted constant of the literal bound, pinned by the exact Gaussian
    // evaluation (max ~1.11 at delta = 0.5) with factor-2 headroom.
    gate.check(
        worst_bound_ratio <= 2.0,
        format!("drift moment bound: max E|N|^2 (2 pi) / (k delta) = {worst_bound_ratio} > 2"),
    );
    Ok(())
}

fn burgers_modes(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let band = config.get_usize("n-modes", 8)?;
    let dt = config.get_f64("dt", 1e-2)?;
    let t_final = config.get_f64("t-final", 0.1)?;
    let steps = (t_final / dt).round() as usize;
    let k_top = config.get_usize("k-top", 4)?.min(band) as i64;
    for r in 0..config.replicas as u64 {
        let mut sim = if config.get_str("stationary-init", "true") == "true" {
            BurgersSim::new_stationary(band, config.seed, r)?
        } else {
            BurgersSim::new_zero(band, config.seed, r)?
        };
        for _ in 0..=steps {
            for k in 1..=k_top {
                let c = sim.state.field.coeff(&[k]);
                let params = format!("k={k};replica={r};t={:.6}", sim.state.time);
                report.push("burgers-modes", &params, "re", c.re, 0.0, 0);
                report.push("burgers-modes", &params, "im", c.im, 0.0, 0);
            }
            sim.step(dt)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Partition / norm batteries
// ---------------------------------------------------------------------------

fn partition_check(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let mut gate = Gate { failures };
    for (dim, m) in [(1usize, 128usize), (2, 32)] {
        let grid = TorusGrid::new(dim, m)?;
        let part = DyadicPartition::new(grid)?;
        let mut defect = 0.0f64;
        for flat in 0..grid.len() {
            let mut total = part.multiplier(-1)[flat];
            for j in 0..=part.j_max() as i64 {
                total += part.multiplier(j)[flat];
            }
            defect = defect.max((total - 1.0).abs());
        }
        let params = format!("d={dim};m={m}");
        report.push("partition-check", &params, "partition_defect", defect, 0.0, 0);
        gate.check(
            defect < 1e-12,
            format!("partition of unity defect {defect} at d={dim}, M={m}"),
        );
    }
    // Bony decomposition sums to the exact product on random pairs.
    let grid = TorusGrid::new(1, 32)?;
    let part = DyadicPartition::new(grid)?;
    let pairs = config.get_usize("pairs", 100)?;
    let defects = replica_map(pairs, |r| {
        let f = sample_regularity_field(grid, 0.5, config.seed, 2 * r);
        let g = sample_regularity_field(grid, 0.3, config.seed, 2 * r + 1);
        let bony = part.bony(&f, &g)?;
        let sum = &(&bony.less + &bony.greater) + &bony.resonant;
        let prod = f.dealiased_product(&g)?;
        Ok((&sum - &prod).max_abs() / prod.max_abs().max(1e-300))
    })?;
    let worst = defects.iter().cloned().fold(0.0, f64::max);
    report.push("partition-check", &format!("m=32;pairs={pairs}"), "bony_sum_defect", worst, 0.0, 0);
    gate.check(
        worst < 1e-10,
        format!("Bony decomposition defect {worst} > 1e-10"),
    );
    Ok(())
}

fn battery_constants(grid: TorusGrid, seed: u64, samples: usize) -> Result<(f64, f64, f64)> {
    let part = DyadicPartition::new(grid)?;
    let (alpha, beta) = (0.4, 0.3);
    let maxima = replica_map(samples, |r| {
        // Bernstein: ||d Delta_j f||_inf <= C 2^j ||Delta_j f||_inf.
        let f = sample_space_white_noise(grid, seed, 3 * r, NoiseNormalization::Half);
        let mut bern: f64 = 0.0;
        for j in 0..=part.j_max() as i64 {
            let block = part.block(&f, j);
            let sup = block.sup_norm();
            if sup > 1e-12 {
                bern = bern.max(block.derivative(0)?.sup_norm() / (2f64.powi(j as i32) * sup));
            }
        }
        // para-1: ||f < g||_beta <= C ||f||_inf ||g||_beta.
        let f = sample_regularity_field(grid, 1.0, seed, 3 * r + 1);
        let g = sample_regularity_field(grid, beta, seed, 3 * r + 2);
        let less = part.less(&f, &g)?;
        let inf = f64::INFINITY;
        let p1 = part.besov_norm(&less, beta, inf, inf)
            / (f.sup_norm() * part.besov_norm(&g, beta, inf, inf)).max(1e-300);
        // para-3: ||f o g||_{alpha+beta} <= C ||f||_alpha ||g||_beta.
        let fa = sample_regularity_field(grid, alpha, seed, 3 * r + 1);
        let res = part.resonant(&fa, &g)?;
        let p3 = part.besov_norm(&res, alpha + beta, inf, inf)
            / (part.besov_norm(&fa, alpha, inf, inf) * part.besov_norm(&g, beta, inf, inf))
                .max(1e-300);
        Ok((bern, p1, p3))
    })?;
    let fold = |pick: fn(&(f64, f64, f64)) -> f64| maxima.iter().map(pick).fold(0.0, f64::max);
    Ok((fold(|x| x.0), fold(|x| x.1), fold(|x| x.2)))
}

fn norm_battery(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let samples = config.get_usize("samples", 200)?;
    let g128 = TorusGrid::new(1, 128)?;
    let g256 = TorusGrid::new(1, 256)?;
    let (b1, p1a, p3a) = battery_constants(g128, config.seed, samples)?;
    let (b2, p1b, p3b) = battery_constants(g256, config.seed + 1, samples)?;
    let mut gate = Gate { failures };
    for (name, lo, hi) in [
        ("bernstein", b1, b2),
        ("para_less", p1a, p1b),
        ("para_resonant", p3a, p3b),
    ] {
        report.push("norm-battery", "m=128", name, lo, 0.0, samples as u64);
        report.push("norm-battery", "m=256", name, hi, 0.0, samples as u64);
        let drift = (hi / lo - 1.0).abs();
        gate.check(
            drift <= 0.10,
            format!("fitted {name} constant drifts by {drift:.3} from M=128 to M=256 (> 10%)"),
        );
    }
    // Dirac comb block sups track 2^{jd} within a factor 2.
    for (dim, m) in [(1usize, 256usize), (2, 64)] {
        let grid = TorusGrid::new(dim, m)?;
        let part = DyadicPartition::new(grid)?;
        let amp = (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0);
        let mut delta = SpectralField::zeros(grid);
        for flat in 0..grid.len() {
            if !grid.is_nyquist(flat) {
                let ks = grid.wavenumbers_of(flat);
                delta.set_mode_pair(&ks, num_complex::Complex64::new(amp, 0.0));
            }
        }
        let j_top = ((3.0 * m as f64 / 16.0).log2().floor()) as i64;
        let mut ratios = Vec::new();
        for j in 0..=j_top {
            ratios.push(part.block(&delta, j).sup_norm() / 2f64.powf((j * dim as i64) as f64));
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        report.push("norm-battery", &format!("d={dim};m={m}"), "dirac_ratio_spread", spread, 0.0, 0);
        gate.check(
            spread < 2.0,
            format!("Dirac block sups: spread {spread} exceeds factor 2 at d={dim}"),
        );
    }
    // White-noise Besov norms: stable at alpha = -d/2 - 0.1, growing at
    // alpha = -d/2 + 0.1 (d = 1).
    let wn_reps = config.get_usize("wn-replicas", 400)?;
    let mut wn_means = Vec::new();
    for (mi, grid) in [g128, g256].into_iter().enumerate() {
        let part = DyadicPartition::new(grid)?;
        let vals = replica_map(wn_reps, |r| {
            let xi = sample_space_white_noise(grid, config.seed + 7, r, NoiseNormalization::Half);
            let inf = f64::INFINITY;
            Ok((
                part.besov_norm(&xi, -0.6, inf, inf),
                part.besov_norm(&xi, -0.4, inf, inf),
            ))
        })?;
        let low = mean_stderr(&vals.iter().map(|v| v.0).collect::<Vec<_>>());
        let high = mean_stderr(&vals.iter().map(|v| v.1).collect::<Vec<_>>());
        let m = grid.modes_per_axis();
        report.push("norm-battery", &format!("alpha=-0.6;m={m}"), "white_noise_norm", low.mean, low.stderr, low.n as u64);
        report.push("norm-battery", &format!("alpha=-0.4;m={m}"), "white_noise_norm", high.mean, high.stderr, high.n as u64);
        wn_means.push((low.mean, high.mean));
        let _ = mi;
    }
    let stable_ratio = wn_means[1].0 / wn_means[0].0;
    let growing_ratio = wn_means[1].1 / wn_means[0].1;
    report.push("norm-battery", "alpha=-0.6", "m_doubling_ratio", stable_ratio, 0.0, 0);
    report.push("norm-battery", "alpha=-0.4", "m_doubling_ratio", growing_ratio, 0.0, 0);
    gate.check(
        (stable_ratio - 1.0).abs() <= 0.08,
        format!("white-noise norm at alpha=-0.6 moved by {stable_ratio} under M doubling"),
    );
    gate.check(
        growing_ratio >= 1.05,
        format!("white-noise norm at alpha=-0.4 should grow; ratio {growing_ratio}"),
    );
    // Hoelder equivalence on fractional fields.
    let eq_reps = config.get_usize("holder-replicas", 20)?;
    for alpha in [0.3, 0.5, 0.7] {
        let mut band = Vec::new();
        for grid in [g128, g256] {
            let part = DyadicPartition::new(grid)?;
            let ratios = replica_map(eq_reps, |r| {
                let f = sample_regularity_field(grid, alpha, config.seed + 11, r);
                let besov = part.besov_norm(&f, alpha, f64::INFINITY, f64::INFINITY);
                let holder = crate::besov::grid_holder_norm(&f, alpha);
                Ok(besov / holder.max(1e-300))
            })?;
            band.extend(ratios);
        }
        let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = band.iter().cloned().fold(0.0f64, f64::max);
        report.push("norm-battery", &format!("alpha={alpha}"), "holder_ratio_min", lo, 0.0, 0);
        report.push("norm-battery", &format!("alpha={alpha}"), "holder_ratio_max", hi, 0.0, 0);
        // Equivalence constant pinned at C = 8 by the oracle run (the
        // measured band is [0.17, 0.30] uniformly over M in {128, 256}).
        gate.check(
            lo > 0.125 && hi < 8.0,
            format!("Hoelder equivalence ratios [{lo}, {hi}] leave [1/8, 8] at alpha={alpha}"),
        );
    }
    // Besov embedding B^alpha_{p1,q} -> B^{alpha - d(1/p1 - 1/p2)}_{p2,q}.
    let emb_reps = config.get_usize("embedding-replicas", 50)?;
    let grid = g128;
    let part = DyadicPartition::new(grid)?;
    let ratios = replica_map(emb_reps, |r| {
        let f = sample_regularity_field(grid, 0.5, config.seed + 13, r);
        let (p1, p2, q) = (2.0, f64::INFINITY, f64::INFINITY);
        let lhs = part.besov_norm(&f, 0.5 - (1.0 / p1), p2, q);
        let rhs = part.besov_norm(&f, 0.5, p1, q);
        Ok(lhs / rhs.max(1e-300))
    })?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    report.push("norm-battery", "p1=2;p2=inf", "embedding_ratio_max", worst, 0.0, 0);
    gate.check(
        worst < 1.0,
        format!("Besov embedding ratio {worst} exceeds the lattice bound 1"),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Renormalization constants
// ---------------------------------------------------------------------------

fn renorm_constants(
    _config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let mut gate = Gate { failures };
    for row in constants_table()? {
        report.push("renorm-constants", &row.params, &row.name, row.value, 0.0, 0);
        report.push("renorm-constants", &row.params, &format!("{}_tail", row.name), row.tail_bound, 0.0, 0);
    }
    // Cutoff doubling stays within the certified tail bound.
    for t in [0.25, 0.5, 1.0] {
        let small = heat_trace_gt(t, SumSpec::new(8, 2)?)?;
        let big = heat_trace_gt(t, SumSpec::new(16, 2)?)?;
        gate.check(
            (big.value - small.value).abs() <= small.tail_bound,
            format!(
                "g_t at t={t}: K-doubling moved the value by {} > tail bound {}",
                (big.value - small.value).abs(),
                small.tail_bound
            ),
        );
    }
    // Logarithmic divergence of int_delta^1 g_s ds.
    let deltas: Vec<f64> = (4..=10).map(|e| 2f64.powi(-e)).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let spec = SumSpec::new(128, 2)?;
    let ys: Vec<f64> = deltas
        .iter()
        .map(|&d| heat_trace_time_integral(d, spec))
        .collect::<Result<_>>()?;
    let (slope, _) = fit_line(&xs, &ys);
    let predicted = 1.0 / (4.0 * std::f64::consts::PI);
    report.push("renorm-constants", "", "gt_integral_log_slope", slope, 0.0, 0);
    gate.check(
        (slope - predicted).abs() <= 0.1 * predicted,
        format!("g_s time-integral log slope {slope} vs {predicted} (10%)"),
    );
    // The sigma^2 divergence flag at beta <= 2.
    let flag = sigma_sq_limit(RadialProfile::Gaussian, 2.0, 2)?;
    gate.check(
        flag == SigmaSqLimit::Divergent,
        "sigma^2 at beta = 2 must be flagged divergent".to_string(),
    );
    Ok(())
}

fn pam_counterterm_mc(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 64)?;
    let n = config.get_usize("n-level", 8)? as u32;
    let t = config.get_f64("t", 0.5)?;
    let grid = TorusGrid::new(2, m)?;
    let part = DyadicPartition::new(grid)?;
    let target = pam_counterterm_fn(t, n, Mollifier::Gaussian, SumSpec::new(grid.max_mode(), 2)?)?
        .value;
    let vals = replica_map(config.replicas, |r| {
        let xi = sample_space_white_noise(grid, config.seed, r, NoiseNormalization::Unit);
        let xi_n = mollify(&xi, n, Mollifier::Gaussian)?;
        let x = xi_n.apply_multiplier(|flat| {
            let ksq = grid.k_sq(flat);
            if ksq == 0.0 {
                t
            } else {
                (1.0 - (-t * ksq).exp()) / ksq
            }
        });
        // The resonant product evaluated at the grid point x = 0.
        Ok(part.resonant(&x, &xi_n)?.values_real()[0])
    })?;
    let stat = mean_stderr(&vals);
    let params = format!("m={m};n-level={n};t={t}");
    report.push("pam-counterterm-mc", &params, "resonant_at_point", stat.mean, stat.stderr, stat.n as u64);
    report.push("pam-counterterm-mc", &params, "target_fn", target, 0.0, 0);
    Gate { failures }.within(&stat, target, "E[(X_n o xi_n)(x0)] vs f_n(t)");
    Ok(())
}

// ---------------------------------------------------------------------------
// PAM solvers
// ---------------------------------------------------------------------------

fn parse_nonlinearity(s: &str) -> Result<PamNonlinearity> {
    if s == "linear" {
        Ok(PamNonlinearity::Linear)
    } else if s == "zero" {
        Ok(PamNonlinearity::Zero)
    } else if let Some(a) = s.strip_prefix("sine:") {
        let amplitude = a
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad sine amplitude '{a}'")))?;
        Ok(PamNonlinearity::Sine { amplitude })
    } else {
        Err(Error::Config(format!(
            "unknown nonlinearity '{s}' (expected linear, zero or sine:<a>)"
        )))
    }
}

fn pam_cross_method(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 64)?;
    let n = config.get_usize("n-level", 4)? as u32;
    let t_final = config.get_f64("t-final", 0.25)?;
    let dt = config.get_f64("dt", 2.5e-4)?;
    let dt_para = config.get_f64("dt-para", 1e-3)?;
    let gamma = config.get_f64("gamma", 0.75)?;
    let grid = TorusGrid::new(2, m)?;
    let part = DyadicPartition::new(grid)?;
    let u0 = default_initial_condition(grid)?;
    let enh = build_pam_enhancement(config.seed, 0, n, grid, dt, t_final, gamma, None)?;
    let direct = solve_pam_direct(&enh, PamNonlinearity::Linear, &u0, true, 1e9)?;
    let transform = solve_pam_linear_transform(&enh, &u0)?;
    let du = direct.path.last().unwrap();
    let tu = transform.path.last().unwrap();
    let rel_dt = (du - tu).sup_norm() / du.sup_norm();
    let enh_para = build_pam_enhancement(config.seed, 0, n, grid, dt_para, t_final, gamma, Some(&part))?;
    let para = solve_pam_paracontrolled(&enh_para, &part, PamNonlinearity::Linear, &u0, 1e9)?;
    // Compare against the direct solve resampled on the coarse time grid.
    let pu = &para.last().unwrap().u;
    let rel_dp = (du - pu).sup_norm() / du.sup_norm();
    let params = format!("dt={dt};m={m};n-level={n};t-final={t_final}");
    report.push("pam-cross-method", &params, "direct_vs_transform_rel_sup", rel_dt, 0.0, 0);
    report.push("pam-cross-method", &params, "direct_vs_paracontrolled_rel_sup", rel_dp, 0.0, 0);
    let mut gate = Gate { failures };
    gate.check(
        rel_dt <= 1e-3,
        format!("direct vs transform relative sup-norm {rel_dt} > 1e-3"),
    );
    gate.check(
        rel_dp <= 1e-2,
        format!("direct vs paracontrolled relative sup-norm {rel_dp} > 1e-2"),
    );
    // Self-convergence of the direct solver under dt halving.
    let mut errs = Vec::new();
    let dts = [4.0 * dt, 2.0 * dt];
    let reference = du;
    for &d in &dts {
        let e = build_pam_enhancement(config.seed, 0, n, grid, d, t_final, gamma, None)?;
        let s = solve_pam_direct(&e, PamNonlinearity::Linear, &u0, true, 1e9)?;
        errs.push((s.path.last().unwrap() - reference).sup_norm());
    }
    let order = (errs[0] / errs[1]).log2();
    report.push("pam-cross-method", &params, "direct_dt_order", order, 0.0, 0);
    gate.check(
        order >= 1.0,
        format!("direct solver dt self-convergence order {order} < 1"),
    );
    Ok(())
}

fn pam_renorm_necessity(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 64)?;
    let t_final = config.get_f64("t-final", 0.25)?;
    let dt = config.get_f64("dt", 5e-4)?;
    let gamma = config.get_f64("gamma", 0.75)?;
    let levels = [4u32, 8, 16, 32];
    let grid = TorusGrid::new(2, m)?;
    let u0 = default_initial_condition(grid)?;
    let per_level: Vec<(MeanStderr, MeanStderr)> = levels
        .iter()
        .map(|&n| -> Result<(MeanStderr, MeanStderr)> {
            let means = replica_map(config.replicas, |r| {
                let enh =
                    build_pam_enhancement(config.seed, r, n, grid, dt, t_final, gamma, None)?;
                let with =
                    solve_pam_direct(&enh, PamNonlinearity::Linear, &u0, true, 1e9)?;
                let without =
                    solve_pam_direct(&enh, PamNonlinearity::Linear, &u0, false, 1e9)?;
                Ok((
                    with.path.last().unwrap().spatial_mean(),
                    without.path.last().unwrap().spatial_mean(),
                ))
            })?;
            let w = mean_stderr(&means.iter().map(|x| x.0).collect::<Vec<_>>());
            let wo = mean_stderr(&means.iter().map(|x| x.1).collect::<Vec<_>>());
            Ok((w, wo))
        })
        .collect::<Result<_>>()?;
    let mut gate = Gate { failures };
    for (i, &n) in levels.iter().enumerate() {
        let params = format!("n-level={n};t-final={t_final}");
        let (w, wo) = &per_level[i];
        report.push("pam-renorm-necessity", &params, "mean_renormalized", w.mean, w.stderr, w.n as u64);
        report.push("pam-renorm-necessity", &params, "mean_unrenormalized", wo.mean, wo.stderr, wo.n as u64);
    }
    for i in 1..levels.len() {
        let prev = per_level[i - 1].1.mean;
        let next = per_level[i].1.mean;
        gate.check(
            next > prev,
            format!(
                "without counterterm the mean must drift monotonically: n={} gave {next} <= {prev}",
                levels[i]
            ),
        );
        // With the counterterm, the 3-SE bands of consecutive levels overlap.
        let (a, b) = (&per_level[i - 1].0, &per_level[i].0);
        let gap = (a.mean - b.mean).abs();
        let reach = 3.0 * (a.stderr + b.stderr);
        gate.check(
            gap <= reach,
            format!(
                "renormalized means at n={} and n={} separated: |{} - {}| > {reach}",
                levels[i - 1],
                levels[i],
                a.mean,
                b.mean
            ),
        );
    }
    Ok(())
}

fn pam_run(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let m = config.get_usize("m", 64)?;
    let n = config.get_usize("n-level", 8)? as u32;
    let t_final = config.get_f64("t-final", 0.25)?;
    let dt = config.get_f64("dt", 1e-3)?;
    let gamma = config.get_f64("gamma", 0.75)?;
    let nonlinearity = parse_nonlinearity(&config.get_str("f", "linear"))?;
    let renormalize = config.get_str("renormalize", "on") == "on";
    let method = config.get_str("method", "direct");
    let grid = TorusGrid::new(2, m)?;
    let part = DyadicPartition::new(grid)?;
    let u0 = default_initial_condition(grid)?;
    let need_resonant = method == "paracontrolled";
    let enh = build_pam_enhancement(
        config.seed,
        0,
        n,
        grid,
        dt,
        t_final,
        gamma,
        if need_resonant { Some(&part) } else { None },
    )?;
    let path = match method.as_str() {
        "direct" => solve_pam_direct(&enh, nonlinearity, &u0, renormalize, 1e9)?.path,
        "transform" => solve_pam_linear_transform(&enh, &u0)?.path,
        "paracontrolled" => solve_pam_paracontrolled(&enh, &part, nonlinearity, &u0, 1e9)?
            .into_iter()
            .map(|s| s.u)
            .collect(),
        other => return Err(Error::Config(format!("unknown pam method '{other}'"))),
    };
    let stride = (path.len() / 16).max(1);
    let alpha = 2.0 * gamma - 2.0;
    for (i, u) in path.iter().enumerate().step_by(stride) {
        let params = format!("method={method};t={:.6}", enh.times[i]);
        report.push("pam-run", &params, "sup_norm", u.sup_norm(), 0.0, 0);
        report.push("pam-run", &params, "spatial_mean", u.spatial_mean(), 0.0, 0);
        report.push(
            "pam-run",
            &params,
            "besov_2gm2",
            part.besov_norm(u, alpha, f64::INFINITY, f64::INFINITY),
            0.0,
            0,
        );
    }
    // Parabolic regularity monitor (estimator, not the norm).
    report.push(
        "pam-run",
        &format!("alpha={gamma};method={method}"),
        "time_holder_estimate",
        crate::besov::time_holder_estimate(&path, dt, gamma),
        0.0,
        0,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Homogenization potential
// ---------------------------------------------------------------------------

fn potential_blocks(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let mut gate = Gate { failures };
    // Part A: block variances against the deterministic lattice sum (d=2).
    let m = config.get_usize("m", 32)?;
    let grid = TorusGrid::new(2, m)?;
    let part = DyadicPartition::new(grid)?;
    let (eps, alpha, beta) = (0.5, 0.6, 2.0);
    let blocks: Vec<i64> = vec![0, 1, 2, 3];
    let samples = replica_map(config.replicas, |r| {
        let v = sample_potential(grid, eps, alpha, beta, RadialProfile::Gaussian, config.seed, r)?;
        let mut out = Vec::with_capacity(blocks.len() + 1);
        let mut vals = Vec::with_capacity(blocks.len());
        for &i in &blocks {
            let b = part.block(&v, i).values_real()[0];
            out.push(b * b);
            vals.push(b);
        }
        // Cross-block covariance |i - j| > 1.
        out.push(vals[0] * vals[3]);
        Ok(out)
    })?;
    for (bi, &i) in blocks.iter().enumerate() {
        let vals: Vec<f64> = samples.iter().map(|s| s[bi]).collect();
        let stat = mean_stderr(&vals);
        let target = potential_block_variance(i, eps, alpha, beta, RadialProfile::Gaussian, &part)?;
        let params = format!("alpha={alpha};beta={beta};block={i};eps={eps}");
        report.push("potential-blocks", &params, "block_variance", stat.mean, stat.stderr, stat.n as u64);
        report.push("potential-blocks", &params, "target", target, 0.0, 0);
        gate.within(&stat, target, &format!("block variance i={i}"));
    }
    let cross: Vec<f64> = samples.iter().map(|s| s[blocks.len()]).collect();
    let cstat = mean_stderr(&cross);
    report.push("potential-blocks", "blocks=0+3", "cross_covariance", cstat.mean, cstat.stderr, cstat.n as u64);
    gate.within(&cstat, 0.0, "cross-block covariance |i-j| > 1");

    // Part B: Var[Delta_q(|dX^eps|^2)] against the homogenization bound
    // eps^{4-4alpha} min(sigma^4, (eps 2^q)^{beta-2} |Rtilde|_inf sigma^2).
    let grid1 = TorusGrid::new(1, 64)?;
    let part1 = DyadicPartition::new(grid1)?;
    let (alpha_b, beta_b, t) = (0.8, 2.5, 1.0);
    let sigma_sq = match sigma_sq_limit(RadialProfile::Gaussian, beta_b, 1)? {
        SigmaSqLimit::Finite { value, .. } => value,
        SigmaSqLimit::Divergent => unreachable!("beta > 2"),
    };
    let var_reps = config.get_usize("var-replicas", 4000)?;
    let mut worst_ratio = 0.0f64;
    for &eps_b in &[0.25, 0.125] {
        for q in [1i64, 2, 3] {
            let samples = replica_map(var_reps, |r| {
                let dx = sample_potential_gradient_x(
                    grid1,
                    t,
                    0,
                    eps_b,
                    alpha_b,
                    beta_b,
                    RadialProfile::Gaussian,
                    config.seed + 17,
                    r,
                )?;
                let sq = dx.dealiased_product(&dx)?;
                Ok(part1.block(&sq, q).values_real()[0])
            })?;
            let stat = mean_stderr(&samples);
            let var = stat.stderr * stat.stderr * (stat.n as f64 - 1.0).max(1.0)
                * stat.n as f64
                / (stat.n as f64 - 1.0).max(1.0);
            let bound = eps_b.powf(4.0 - 4.0 * alpha_b)
                * (sigma_sq * sigma_sq)
                    .min((eps_b * 2f64.powi(q as i32)).powf(beta_b - 2.0) * sigma_sq);
            let ratio = var / bound;
            worst_ratio = worst_ratio.max(ratio);
            let params = format!("alpha={alpha_b};beta={beta_b};eps={eps_b};q={q}");
            report.push("potential-blocks", &params, "block_gradient_variance", var, 0.0, stat.n as u64);
            report.push("potential-blocks", &params, "bound", bound, 0.0, 0);
            report.push("potential-blocks", &params, "ratio", ratio, 0.0, 0);
        }
    }
    // Constant pinned by the oracle run: the lemma gives <= up to an
    // absolute constant; the table stays below 1.0 with headroom.
    gate.check(
        worst_ratio <= 2.0,
        format!("gradient-square block variance exceeds the homogenization bound: ratio {worst_ratio} > 2"),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Stochastic Burgers (paracontrolled)
// ---------------------------------------------------------------------------

fn sbe_cross_method(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let m = config.get_usize("m", 128)?;
    let n = config.get_usize("n-level", 8)? as u32;
    let t_final = config.get_f64("t-final", 0.25)?;
    let gamma = config.get_f64("gamma", 0.4)?;
    let grid = TorusGrid::new(1, m)?;
    let part = DyadicPartition::new(grid)?;
    let u0 = SpectralField::zeros(grid);
    let mut rels = Vec::new();
    let dts = [config.get_f64("dt", 1e-3)?, config.get_f64("dt-fine", 5e-4)?];
    for &dt in &dts {
        let enh = build_sbe_enhancement(config.seed, 0, n, grid, dt, t_final, gamma, &part)?;
        let states = solve_sbe_paracontrolled(&enh, &part, &u0, 1e9)?;
        let galerkin =
            galerkin_path_with_increments(&u0, &enh.noise_increments, dt, grid.max_mode())?;
        let pu = &states.last().unwrap().u;
        let gu = galerkin.last().unwrap();
        let rel = (pu - gu).l2_norm() / gu.l2_norm().max(1e-300);
        let params = format!("dt={dt};m={m};n-level={n}");
        report.push("sbe-cross-method", &params, "relative_l2", rel, 0.0, 0);
        rels.push(rel);
    }
    let mut gate = Gate { failures };
    gate.check(
        rels[0] <= 5e-2,
        format!("paracontrolled vs Galerkin relative L2 {} > 5e-2", rels[0]),
    );
    gate.check(
        rels[1] < rels[0],
        format!(
            "discrepancy must decrease under dt refinement: {} -> {}",
            rels[0], rels[1]
        ),
    );
    // Tree-expansion residual order at small forcing amplitude.
    let n_max = 2usize;
    let dt = dts[0];
    let enh = build_sbe_enhancement(config.seed, 1, n, grid, dt, 0.1, gamma, &part)?;
    let classes = enumerate_trees(n_max - 1)?;
    let lambdas = [0.5, 0.25, 0.125];
    let mut residuals = Vec::new();
    for &lambda in &lambdas {
        let scaled: Vec<SpectralField> = enh
            .noise_increments
            .iter()
            .map(|g| g.scale(lambda))
            .collect();
        let u = galerkin_path_with_increments(&u0, &scaled, dt, grid.max_mode())?;
        let mut partial = SpectralField::zeros(grid);
        for class in &classes {
            let path = tree_term(&class.tree, &enh.x, dt)?;
            partial = &partial
                + &path
                    .last()
                    .unwrap()
                    .scale(class.count as f64 * lambda.powi(class.degree as i32 + 1));
        }
        residuals.push((u.last().unwrap() - &partial).l2_norm());
    }
    let order = fit_loglog(&lambdas.to_vec(), &residuals);
    report.push("sbe-cross-method", &format!("n-max={n_max}"), "tree_residual_order", order, 0.0, 0);
    gate.check(
        (order - (n_max + 1) as f64).abs() <= 0.3,
        format!(
            "tree-expansion residual order {order}, expected {} +- 0.3",
            n_max + 1
        ),
    );
    Ok(())
}

fn sbe_run(config: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let m = config.get_usize("m", 128)?;
    let n = config.get_usize("n-level", 8)? as u32;
    let t_final = config.get_f64("t-final", 0.1)?;
    let dt = config.get_f64("dt", 1e-3)?;
    let gamma = config.get_f64("gamma", 0.4)?;
    let method = config.get_str("method", "paracontrolled");
    let grid = TorusGrid::new(1, m)?;
    let part = DyadicPartition::new(grid)?;
    let u0 = SpectralField::zeros(grid);
    let enh = build_sbe_enhancement(config.seed, 0, n, grid, dt, t_final, gamma, &part)?;
    let path: Vec<SpectralField> = if method == "galerkin" {
        galerkin_path_with_increments(&u0, &enh.noise_increments, dt, grid.max_mode())?
    } else if method == "paracontrolled" {
        solve_sbe_paracontrolled(&enh, &part, &u0, 1e9)?
            .into_iter()
            .map(|s| s.u)
            .collect()
    } else if let Some(k) = method.strip_prefix("tree:") {
        let n_max = k
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad tree order '{k}'")))?;
        truncated_tree_expansion(&enh, n_max)?
    } else {
        return Err(Error::Config(format!("unknown sbe method '{method}'")));
    };
    let stride = (path.len() / 16).max(1);
    let k_top = config.get_usize("k-top", 2)?.min(grid.max_mode()) as i64;
    for (i, u) in path.iter().enumerate().step_by(stride) {
        let params = format!("method={method};t={:.6}", enh.times[i]);
        report.push("sbe-run", &params, "l2_norm", u.l2_norm(), 0.0, 0);
        report.push(
            "sbe-run",
            &params,
            "besov_gm1",
            part.besov_norm(u, gamma - 1.0, f64::INFINITY, f64::INFINITY),
            0.0,
            0,
        );
        for k in 1..=k_top {
            let c = u.coeff(&[k]);
            let params = format!("k={k};method={method};t={:.6}", enh.times[i]);
            report.push("sbe-run", &params, "re", c.re, 0.0, 0);
            report.push("sbe-run", &params, "im", c.im, 0.0, 0);
        }
    }
    // Regularity-ladder diagnostic of the enhancement at the final time.
    let last = enh.times.len() - 1;
    let ladder = [
        ("x", &enh.x[last], gamma - 1.0),
        ("cherry", &enh.x_cherry[last], 2.0 * gamma - 1.0),
        ("chain", &enh.x_chain[last], gamma),
        ("balanced", &enh.x_balanced[last], 2.0 * gamma),
    ];
    for (name, field, alpha) in ladder {
        let v = part.besov_norm(field, alpha, f64::INFINITY, f64::INFINITY);
        report.push("sbe-run", &format!("component={name}"), "ladder_norm", v, 0.0, 0);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Wick tables
// ---------------------------------------------------------------------------

fn wick_tables(
    config: &ExperimentConfig,
    report: &mut ExperimentReport,
    failures: &mut Vec<String>,
) -> Result<()> {
    let mut gate = Gate { failures };
    // Product expansions against the Isserlis oracle, exactly, m + n <= 6.
    let mut worst = 0.0f64;
    for m in 0..=6usize {
        for n in 0..=(6 - m) {
            let (czz, cww, czw) = (1.25, 0.75, -0.375);
            let cov = move |i: usize, j: usize| match (i, j) {
                (0, 0) => czz,
                (1, 1) => cww,
                _ => czw,
            };
            let lhs = wick_to_polynomial(&vec![0; m], &cov)
                .multiply(&wick_to_polynomial(&vec![1; n], &cov));
            let mut rhs = GaussianPolynomial::default();
            for (p, q, l, c) in wick_product_expand(m, n) {
                let mut args = vec![0; p];
                args.extend(vec![1; q]);
                rhs = rhs.add(&wick_to_polynomial(&args, &cov).scale(c as f64 * czw.powi(l as i32)));
            }
            let diff = lhs.add(&rhs.scale(-1.0)).collect();
            for (c, _) in &diff.terms {
                worst = worst.max(c.abs());
            }
            if m + n <= 8 && (m + n) % 2 == 0 {
                // Also probe the scalar expectation through the oracle.
                let direct = isserlis_oracle(&lhs, cov)?;
                let fact: u128 = (1..=m as u128).product::<u128>().max(1);
                let expect = if m == n { fact as f64 * czw.powi(m as i32) } else { 0.0 };
                worst = worst.max((direct - expect).abs());
            }
        }
    }
    report.push("wick-tables", "degrees=6", "product_expansion_defect", worst, 0.0, 0);
    gate.check(
        worst < 1e-9,
        format!("Wick product expansion defect {worst} (should be exact)"),
    );
    // Tree counts and the Catalan cross-check at degree <= 12.
    let classes = enumerate_trees(12)?;
    let count_of = |shape: &str| -> u128 {
        classes
            .iter()
            .find(|c| c.tree.shape_string() == shape)
            .map(|c| c.count)
            .unwrap_or(0)
    };
    // Canonical shapes put the smaller child first, so chains print as
    // (.(..)) rather than ((..).) .
    let pattern = [
        (".", 1u128),
        ("(..)", 1),
        ("(.(..))", 2),
        ("(.(.(..)))", 4),
        ("((..)(..))", 1),
    ];
    let mut pattern_ok = true;
    for (shape, expect) in pattern {
        let got = count_of(shape);
        report.push("wick-tables", &format!("shape={shape}"), "planar_count", got as f64, 0.0, 0);
        pattern_ok &= got == expect;
    }
    gate.check(pattern_ok, "tree count pattern (1,1,2,4,1) violated".into());
    let catalan = |n: u128| -> u128 {
        let f = |k: u128| (1..=k).product::<u128>().max(1);
        f(2 * n) / (f(n) * f(n + 1))
    };
    let mut catalan_ok = true;
    for d in 0..=12usize {
        let total: u128 = classes.iter().filter(|c| c.degree == d).map(|c| c.count).sum();
        catalan_ok &= total == catalan(d as u128);
    }
    gate.check(catalan_ok, "Catalan cross-check failed at some degree <= 12".into());
    let _ = config;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn reports_are_byte_identical_across_runs() {
        let mut cfg = ExperimentConfig::new("ou-moments");
        cfg.seed = 5;
        cfg.replicas = 200;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.report.to_csv(), b.report.to_csv());
        assert_eq!(a.report.to_json(), b.report.to_json());
        assert!(a.passed(), "{:?}", a.failures);
    }

    #[test]
    fn unknown_experiment_is_a_usage_error() {
        let cfg = ExperimentConfig::new("no-such-experiment");
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn wick_tables_pass() {
        let cfg = ExperimentConfig::new("wick-tables");
        let out = run_experiment(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
    }

    #[test]
    fn drift_antisymmetry_passes_quickly() {
        let mut cfg = ExperimentConfig::new("drift-antisymmetry");
        cfg.set("states", 20);
        let out = run_experiment(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
    }

    #[test]
    fn renorm_constants_gates_hold() {
        let cfg = ExperimentConfig::new("renorm-constants");
        let out = run_experiment(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert!(!out.report.rows.is_empty());
    }
}
