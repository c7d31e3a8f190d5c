//! The four commands. Each writes its artifacts into an output directory and
//! returns a one-line summary.

use std::path::{Path, PathBuf};

use dispctl_core::dynamics::{FeedbackLaw, build_feedback, closed_loop, duhamel, observability_constant, uniform_grid};
use dispctl_core::eigen::{SpectrumAnalysis, cluster_spectrum, controllability_time};
use dispctl_core::moment::{ControlSignal, SolveKind, moment_residuals, synthesize};
use dispctl_core::scenario::{FeedbackChoice, Scenario};
use dispctl_core::spectral::{ControlShape, FourierField};
use dispctl_core::symbols::DispersionSymbol;
use dispctl_core::{Complex64, Exec};

use crate::config::Sweep;
use crate::report::{
    AnalyzeBody, Report, SCHEMA_VERSION, SimulateBody, SolveCounts, StabilizeBody, SweepIndex, SweepPoint,
    SynthesizeBody, trajectory_header, write_csv, write_json,
};
use crate::{CliError, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Synthesize,
    Simulate,
    Stabilize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Synthesize => "synthesize",
            Command::Simulate => "simulate",
            Command::Stabilize => "stabilize",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// `stabilize` with `K = 0`.
    pub zero_feedback: bool,
    pub exec: Exec,
}

/// Runs one scenario, writing artifacts under `opts.out`.
pub fn run(command: Command, scenario: &Scenario, opts: &RunOptions) -> Result<String, CliError> {
    let mut scenario = scenario.clone();
    if let Some(seed) = opts.seed {
        scenario.seed = Some(seed);
    }
    scenario.validate()?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let ctx = Context::new(&scenario)?;
    match command {
        Command::Analyze => analyze(&ctx, &opts.out),
        Command::Synthesize => synthesize_cmd(&ctx, &opts.out, opts.exec),
        Command::Simulate => simulate(&ctx, &opts.out, opts.exec),
        Command::Stabilize => stabilize(&ctx, &opts.out, opts.zero_feedback, opts.exec),
    }
}

/// Runs every point of `sweep` in its own `point-NNN` subdirectory and writes
/// `sweep.json`. Returns the per-point results and the worst exit code.
pub fn run_sweep(
    command: Command,
    scenario: &Scenario,
    sweep: &Sweep,
    opts: &RunOptions,
) -> Result<(SweepIndex, i32), CliError> {
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let indexed: Vec<(usize, f64)> = sweep.values.iter().copied().enumerate().collect();
    let points = opts.exec.map_slice(&indexed, |&(i, value)| {
        let dir = format!("point-{i:03}");
        let point_opts = RunOptions {
            out: opts.out.join(&dir),
            ..opts.clone()
        };
        let outcome = sweep
            .apply(scenario, value)
            .and_then(|sc| run(command, &sc, &point_opts));
        let (exit_code, summary) = match outcome {
            Ok(summary) => (EXIT_OK, summary),
            Err(e) => (e.exit_code(), format!("error: {e}")),
        };
        SweepPoint {
            value,
            dir,
            exit_code,
            summary,
        }
    });
    let worst = points.iter().map(|p| p.exit_code).max().unwrap_or(EXIT_OK);
    let index = SweepIndex {
        schema: SCHEMA_VERSION,
        command: command.name().to_string(),
        param: sweep.path.clone(),
        points,
    };
    write_json(&opts.out.join("sweep.json"), &index)?;
    Ok((index, worst))
}

/// Objects every command derives from the scenario.
struct Context<'a> {
    scenario: &'a Scenario,
    sym: DispersionSymbol,
    analysis: SpectrumAnalysis,
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self, CliError> {
        let sym = scenario.symbol.build()?;
        let analysis = cluster_spectrum(&sym, scenario.n, scenario.tolerance)?;
        Ok(Context {
            scenario,
            sym,
            analysis,
        })
    }

    fn shape(&self, exec: Exec) -> Result<ControlShape, CliError> {
        Ok(self.scenario.shape(exec)?)
    }

    fn fields(&self) -> Result<(FourierField, FourierField), CliError> {
        Ok(self.scenario.fields(None)?)
    }

    fn control(&self, shape: &ControlShape) -> Result<(FourierField, FourierField, ControlSignal), CliError> {
        let (u0, u1) = self.fields()?;
        let h = synthesize(&u0, &u1, &self.analysis, shape, self.scenario.horizon, self.scenario.s)?;
        Ok((u0, u1, h))
    }
}

fn analyze(ctx: &Context, out: &Path) -> Result<String, CliError> {
    let a = &ctx.analysis;
    let body = AnalyzeBody {
        symbol: ctx.sym.name().to_string(),
        criterion: a.criterion,
        n0: a.n0,
        k1_star: a.k1_star,
        gamma: a.gamma,
        profile: a.gamma_prime_profile.clone(),
        clusters: a.clusters.clone(),
        representatives: a.representatives.clone(),
        lambdas: a.lambdas.clone(),
        controllability_time: controllability_time(a).ok().filter(|t| t.is_finite()),
    };
    let summary = format!(
        "analyze {}: criterion {:?}, gamma = {:.6e}, {} clusters",
        body.symbol,
        body.criterion,
        body.gamma,
        body.clusters.len()
    );
    write_json(&out.join("analyze.json"), &Report::new("analyze", ctx.scenario, body))?;
    Ok(summary)
}

fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn synthesize_cmd(ctx: &Context, out: &Path, exec: Exec) -> Result<String, CliError> {
    let shape = ctx.shape(exec)?;
    let (_, _, h) = ctx.control(&shape)?;
    let residual_max = max_abs(&moment_residuals(&h, &shape, &ctx.analysis, exec));
    let body = SynthesizeBody {
        h_re: h.coeffs().iter().map(|c| c.re).collect(),
        h_im: h.coeffs().iter().map(|c| c.im).collect(),
        residual_max,
        control_norm: h.norm(),
        nu_empirical: h.nu_empirical(),
        gram_condition: h.family().condition(),
        solves: SolveCounts {
            simple: h.count_solves(SolveKind::Simple),
            pair: h.count_solves(SolveKind::Pair),
            block: h.count_solves(SolveKind::Block),
        },
        under_resolved_pairs: h.under_resolved_pairs().to_vec(),
    };
    write_q_samples(ctx, &h, &out.join("q_samples.csv"))?;
    let summary = format!(
        "synthesize: residual_max = {:.3e}, control_norm = {:.6e}, nu = {:.6e}",
        body.residual_max, body.control_norm, body.nu_empirical
    );
    write_json(
        &out.join("synthesize.json"),
        &Report::new("synthesize", ctx.scenario, body),
    )?;
    Ok(summary)
}

/// `q_j(t)` on the simulate grid, one column pair per cluster representative.
fn write_q_samples(ctx: &Context, h: &ControlSignal, path: &Path) -> Result<(), CliError> {
    let family = h.family();
    let mut header = vec!["time".to_string()];
    for k in &ctx.analysis.representatives {
        header.push(format!("q{k}_re"));
        header.push(format!("q{k}_im"));
    }
    let rows = uniform_grid(h.horizon(), ctx.scenario.simulate.samples)
        .into_iter()
        .map(|t| {
            let mut row = Vec::with_capacity(1 + 2 * family.len());
            row.push(t);
            for j in 0..family.len() {
                let q = family.eval(j, t);
                row.extend([q.re, q.im]);
            }
            row
        });
    write_csv(path, &header, rows)
}

fn trajectory_row(t: f64, u: &FourierField, s: f64) -> Vec<f64> {
    let mean = u.mean();
    vec![t, u.mean_free().sobolev_norm(s), mean.re, mean.im]
}

fn simulate(ctx: &Context, out: &Path, exec: Exec) -> Result<String, CliError> {
    let sc = ctx.scenario;
    let shape = ctx.shape(exec)?;
    let (u0, u1, h) = ctx.control(&shape)?;
    let times = uniform_grid(sc.horizon, sc.simulate.samples);
    let traj = duhamel(&u0, &ctx.sym, &shape, &h, &times, exec)?;
    let end = traj.last().expect("grid has at least two samples");
    let miss = (end - &u1).sobolev_norm(sc.s);
    let scale = u1.sobolev_norm(sc.s);
    let body = SimulateBody {
        steering_error: if scale > 0.0 { miss / scale } else { miss },
        residual_max: max_abs(&moment_residuals(&h, &shape, &ctx.analysis, exec)),
        control_norm: h.norm(),
        nu_empirical: h.nu_empirical(),
        mean_drift: traj.iter().map(|u| (u.mean() - u0.mean()).norm()).fold(0.0, f64::max),
    };
    write_csv(
        &out.join("trajectory.csv"),
        &trajectory_header(),
        times.iter().zip(&traj).map(|(&t, u)| trajectory_row(t, u, sc.s)),
    )?;
    let summary = format!("simulate: steering_error = {:.3e}", body.steering_error);
    write_json(&out.join("simulate.json"), &Report::new("simulate", sc, body))?;
    Ok(summary)
}

fn stabilize(ctx: &Context, out: &Path, zero_feedback: bool, exec: Exec) -> Result<String, CliError> {
    let sc = ctx.scenario;
    let shape = ctx.shape(exec)?;
    let (u0, _) = ctx.fields()?;
    let (law, feedback) = if zero_feedback {
        (FeedbackLaw::zero(sc.n, sc.s), "zero")
    } else {
        let name = match sc.stabilize.feedback {
            FeedbackChoice::GgStar => "gg_star",
            FeedbackChoice::GramianInverse => "gramian_inverse",
        };
        (build_feedback(sc.feedback_kind(), &ctx.sym, &shape, sc.s, exec)?, name)
    };
    let report = closed_loop(&u0, &ctx.sym, &law, sc.stabilize.t_max, sc.stabilize.dt_out)?;
    let observe_horizon = sc.stabilize.horizon.unwrap_or(sc.horizon);
    let body = StabilizeBody {
        feedback: feedback.to_string(),
        fitted_rate: report.fitted_rate,
        fit_residual: report.fit_residual,
        delta_sq: observability_constant(&ctx.sym, &shape, sc.s, observe_horizon, exec)?,
        lambda_target: law.lambda_target,
        gramian_min_eig: law.gramian_min_eig,
        mean_drift: report.mean_drift,
    };
    write_csv(
        &out.join("trajectory.csv"),
        &trajectory_header(),
        report
            .times
            .iter()
            .zip(&report.norms)
            .zip(&report.means)
            .map(|((&t, &norm), mean)| vec![t, norm, mean.re, mean.im]),
    )?;
    let summary = format!(
        "stabilize ({feedback}): fitted_rate = {:.6e}, delta_sq = {:.3e}",
        body.fitted_rate, body.delta_sq
    );
    write_json(&out.join("stabilize.json"), &Report::new("stabilize", sc, body))?;
    Ok(summary)
}
