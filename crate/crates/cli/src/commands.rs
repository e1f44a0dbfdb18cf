//! One function per CLI command; each writes its reports into the output
//! directory and returns the list of built-in checks that failed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qthermo::base::{mean_stderr, sample_base, BaseSample, BaseSystem};
use qthermo::fiber::{check_hypotheses, ModelSpec, PotentialSpec, Verdict};
use qthermo::hyperbolic::{cumulative_weights, expansion_sequence, ht_density, sample_from_weights};
use qthermo::thermo::{
    correlation_series, cylinder_series, fit_decay_rate, gibbs_report, hyperbolic_threshold, implied_entropy,
    pressure_cover, pressure_from_lambda, pressure_separated, pressure_separated_raw, threshold_inputs,
    CylinderFiber, GibbsReport, PressureMethod,
};
use qthermo::transfer::{lambda_bound_violation, solve_triple, EigenTriple, TripleParams};

use crate::config::Config;
use crate::output::{fmt_f64, OutputDir};
use crate::{CliError, Command};

/// Rate and horizon used for the Gibbs summary.
const GIBBS_RATE: f64 = 0.05;
const GIBBS_MIN_TIME: usize = 64;

struct Ctx<'a> {
    cfg: &'a Config,
    base: BaseSystem,
    model: ModelSpec,
    potential: PotentialSpec,
}

impl Ctx<'_> {
    fn triple(&self, index: u64, window: usize) -> Result<EigenTriple, CliError> {
        let nb = self.cfg.numerics.burn_in;
        let sample = self.base.sample(index, -(nb as i64), (window + nb) as i64)?;
        let params = TripleParams { window, burn_in: nb, grid_size: self.cfg.numerics.grid, tol: self.cfg.numerics.tol };
        Ok(solve_triple(&self.model, &self.potential, &sample, params)?)
    }

    fn sample(&self, index: u64, lo: i64, hi: i64) -> Result<BaseSample, CliError> {
        Ok(self.base.sample(index, lo, hi)?)
    }
}

pub fn run_command(command: Command, cfg: &Config, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let ctx = Ctx { cfg, base: cfg.base_system()?, model: cfg.model_spec(), potential: cfg.potential_spec() };
    match command {
        Command::CheckHypotheses => check(&ctx, out),
        Command::SolveTriple => solve(&ctx, out),
        Command::Gibbs => gibbs(&ctx, out),
        Command::Correlations => correlations(&ctx, out),
        Command::Pressure => pressure(&ctx, out),
        Command::HyperbolicTimes => hyperbolic(&ctx, out),
        Command::CylinderCount => cylinders(&ctx, out),
        Command::Threshold => threshold(&ctx, out),
    }
}

fn check(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let ensemble = sample_base(&ctx.base, ctx.cfg.hypotheses.samples, 0, 0)?;
    let report = check_hypotheses(&ctx.model, &ctx.potential, &ctx.base, &ensemble)?;
    out.json("hypotheses.json", &report)?;
    let mut failures = Vec::new();
    for c in [&report.h3, &report.h6, &report.p] {
        if c.verdict == Verdict::Fails {
            failures.push(format!("{} fails: margin {:.6} ± {:.2e}", c.name, c.margin.mean, c.margin.stderr));
        }
    }
    Ok(failures)
}

#[derive(Serialize)]
struct TripleSummary {
    window: usize,
    burn_in: usize,
    grid: usize,
    h_gap: f64,
    nu_gap: f64,
    contraction_rate: Option<f64>,
    lambda_bound_violation: f64,
    pressure_from_lambda: f64,
}

fn solve(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let t = ctx.triple(0, ctx.cfg.numerics.window)?;
    let violation = lambda_bound_violation(&t, &ctx.model, &ctx.potential)?;
    out.csv("lambda.csv", &["j", "lambda"], t.lambda.iter().enumerate().map(|(j, l)| vec![j.to_string(), fmt_f64(*l)]))?;
    out.field("h.qtf", &t.grid, &t.h[0].values)?;
    out.field("nu.qtf", &t.grid, &t.nu[0])?;
    out.field("mu.qtf", &t.grid, &t.mu[0])?;
    out.json(
        "triple.json",
        &TripleSummary {
            window: t.window,
            burn_in: t.burn_in,
            grid: t.grid.n,
            h_gap: t.h_gap,
            nu_gap: t.nu_gap,
            contraction_rate: t.contraction_rate,
            lambda_bound_violation: violation,
            pressure_from_lambda: pressure_from_lambda(&t),
        },
    )?;
    Ok(if violation > 0.0 { vec![format!("lambda bounds violated by {violation:e}")] } else { Vec::new() })
}

#[derive(Serialize)]
struct GibbsSummary {
    orbits: usize,
    with_three_times: usize,
    passing: usize,
    rate: f64,
    min_time: usize,
}

fn gibbs_points(t: &EigenTriple, count: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let cdf = cumulative_weights(&t.nu[0]);
    (0..count).map(|_| sample_from_weights(&t.grid, &cdf, rng.random(), rng.random())).collect()
}

fn gibbs(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let g = &ctx.cfg.gibbs;
    let mut reports: Vec<(u64, GibbsReport)> = Vec::new();
    for s in 0..ctx.cfg.numerics.samples as u64 {
        let t = ctx.triple(s, ctx.cfg.numerics.window)?;
        let xs = gibbs_points(&t, g.points, ctx.cfg.seed, s);
        let batch: Vec<GibbsReport> = xs
            .par_iter()
            .map(|&x| gibbs_report(&t, &ctx.model, &ctx.potential, x, g.gamma, g.eps))
            .collect::<qthermo::Result<_>>()?;
        reports.extend(batch.into_iter().map(|r| (s, r)));
    }
    let first = &reports[0].1;
    out.csv(
        "gibbs.csv",
        &["n_k", "log_nu_ball", "log_gibbs_sum", "d"],
        first.points.iter().map(|p| vec![p.n_k.to_string(), fmt_f64(p.log_nu_ball), fmt_f64(p.log_gibbs_sum), fmt_f64(p.d)]),
    )?;
    out.csv(
        "gibbs_orbits.csv",
        &["sample", "x", "times", "largest_n_k", "final_rate"],
        reports.iter().map(|(s, r)| {
            vec![
                s.to_string(),
                fmt_f64(r.x),
                r.times.len().to_string(),
                r.largest_time().map_or(String::new(), |t| t.to_string()),
                r.final_rate().map_or(String::new(), fmt_f64),
            ]
        }),
    )?;
    let eligible: Vec<&GibbsReport> = reports.iter().map(|(_, r)| r).filter(|r| r.times.len() >= 3).collect();
    let passing = eligible
        .iter()
        .filter(|r| r.largest_time().is_some_and(|t| t >= GIBBS_MIN_TIME) && r.final_rate().is_some_and(|v| v <= GIBBS_RATE))
        .count();
    out.json(
        "gibbs_summary.json",
        &GibbsSummary { orbits: reports.len(), with_three_times: eligible.len(), passing, rate: GIBBS_RATE, min_time: GIBBS_MIN_TIME },
    )?;
    Ok(Vec::new())
}

fn correlations(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let c = &ctx.cfg.correlations;
    let t = ctx.triple(0, c.n_max)?;
    let (left, right) = (c.left, c.right);
    let u = move |x: f64| left.eval(x);
    let v = move |x: f64| right.eval(x);
    let series = correlation_series(&t, &ctx.model, &ctx.potential, &u, &v, c.n_max)?;
    out.csv("correlations.csv", &["n", "C"], series.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt_f64(*v)]))?;
    let fit = fit_decay_rate(&series);
    let body = match &fit {
        Ok(f) => serde_json::json!({ "fit": f }),
        Err(e) => serde_json::json!({ "fit": null, "reason": e.to_string() }),
    };
    out.json("decay.json", &body)?;
    Ok(Vec::new())
}

fn pressure(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let p = &ctx.cfg.pressure;
    let nb = ctx.cfg.numerics.burn_in as i64;
    let samples = ctx.cfg.numerics.samples as u64;
    let mut rows: Vec<(PressureMethod, Option<f64>, Vec<f64>)> = vec![
        (PressureMethod::SeparatedSets, Some(p.eps), Vec::new()),
        (PressureMethod::SeparatedSetsRaw, Some(p.eps), Vec::new()),
    ];
    if p.cover {
        rows.push((PressureMethod::BallCover, Some(p.eps), Vec::new()));
    }
    rows.push((PressureMethod::LambdaAverage, None, Vec::new()));
    rows.push((PressureMethod::ImpliedEntropy, None, Vec::new()));
    for s in 0..samples {
        let sample = ctx.sample(s, -nb, p.n as i64 + nb)?;
        let (m, pot) = (&ctx.model, &ctx.potential);
        let t = ctx.triple(s, p.n)?;
        let mut values = vec![
            pressure_separated(m, pot, &sample, p.n, p.eps, p.candidates)?,
            pressure_separated_raw(m, pot, &sample, p.n, p.eps, p.candidates)?,
        ];
        if p.cover {
            values.push(pressure_cover(m, pot, &sample, p.n, p.eps)?);
        }
        values.push(pressure_from_lambda(&t));
        values.push(implied_entropy(&t, pot)?);
        for (row, v) in rows.iter_mut().zip(values) {
            row.2.push(v);
        }
    }
    out.csv(
        "pressure.csv",
        &["method", "n", "eps", "value", "stderr"],
        rows.iter().map(|(method, eps, values)| {
            let (mean, se) = mean_stderr(values);
            vec![method.label().to_string(), p.n.to_string(), eps.map_or(String::new(), fmt_f64), fmt_f64(mean), fmt_f64(se)]
        }),
    )?;
    Ok(Vec::new())
}

#[derive(Serialize)]
struct OrbitSummary {
    gamma: f64,
    n: usize,
    x0: f64,
    times: usize,
    density: f64,
    mean_expansion: f64,
}

fn hyperbolic(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let h = &ctx.cfg.hyperbolic;
    let sample = ctx.sample(0, 0, h.n as i64)?;
    let record = expansion_sequence(&ctx.model, &sample, h.x0, h.n)?.with_times(h.gamma);
    out.csv(
        "orbit.csv",
        &["j", "x_j", "a_j", "is_hyperbolic_time"],
        (0..=h.n).map(|j| {
            vec![
                j.to_string(),
                fmt_f64(record.x[j]),
                record.a.get(j).map_or(String::new(), |a| fmt_f64(*a)),
                record.times.binary_search(&j).is_ok().to_string(),
            ]
        }),
    )?;
    out.json(
        "hyperbolic.json",
        &OrbitSummary {
            gamma: h.gamma,
            n: h.n,
            x0: h.x0,
            times: record.times.len(),
            density: ht_density(&record.times, h.n)?,
            mean_expansion: record.mean_expansion(),
        },
    )?;
    Ok(Vec::new())
}

fn cylinders(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let c = &ctx.cfg.cylinders;
    let sample = ctx.sample(0, 0, c.n as i64 - 1)?;
    let fibers: Vec<CylinderFiber> = (0..c.n as i64)
        .map(|j| ctx.model.fiber_at(&sample, j).map(|f| CylinderFiber::from(f.branch_data())))
        .collect::<qthermo::Result<_>>()?;
    let series = cylinder_series(&fibers, c.alpha, c.eps);
    out.csv(
        "cylinders.csv",
        &["n", "alpha", "W", "rate", "bound", "bound_holds"],
        series.iter().map(|r| {
            vec![r.n.to_string(), fmt_f64(r.alpha), fmt_f64(r.w), fmt_f64(r.rate), fmt_f64(r.bound), r.bound_holds.to_string()]
        }),
    )?;
    Ok(Vec::new())
}

fn threshold(ctx: &Ctx, out: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let n = ctx.cfg.threshold.n;
    let sample = ctx.sample(0, 0, n as i64 - 1)?;
    let inputs = threshold_inputs(&ctx.model, &ctx.potential, &sample, n)?;
    let result = hyperbolic_threshold(&inputs);
    out.json("threshold.json", &serde_json::json!({ "inputs": inputs, "threshold": result }))?;
    Ok(Vec::new())
}
