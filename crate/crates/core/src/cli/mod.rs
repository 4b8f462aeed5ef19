//! Command-line front end: `analyze`, `simulate`, `rank` and `toeplitz`.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cutset::{
    noiseless_verdict, noisy_verdict, nonneg_criteria, siso_orderings, toeplitz_gain_profile, ComparisonVerdict,
    Conclusion, SisoScenario,
};
use crate::error::{Error, Result};
use crate::error_prob::{pe_ldmap, pe_mean_priors, snr_report};
use crate::graph::verify_cutset;
use crate::lti::{GridOptions, SensorSet};
use crate::monte_carlo::{estimate_error, TrialPlan};
use crate::placement::{enumerate_subsets, rank_placements, Criterion, PlacementModel};

use config::{format_node_set, Loaded, NamedScenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "netdetect", version, about = "Detection performance of sensor sets on linear networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SNRs, error probabilities and cutset verdicts per sensor set.
    Analyze(CommonArgs),
    /// Monte Carlo error rates next to the analytic values.
    Simulate(CommonArgs),
    /// Rank equal-size sensor subsets by asymptotic error probability.
    Rank(CommonArgs),
    /// Closed-form gains and single-input orderings on a Toeplitz line.
    Toeplitz(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Frequency grid points on the half circle.
    #[arg(long)]
    pub grid: Option<usize>,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of one command: text report, CSV payload, exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub csv: String,
    pub exit: i32,
}

/// Shortest round-trip-exact rendering with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

struct Run {
    cfg: Loaded,
    opts: GridOptions,
    trials: usize,
    seed: u64,
}

impl Run {
    fn new(args: &CommonArgs) -> Result<(Self, Option<PathBuf>)> {
        let cfg = Loaded::from_path(&args.config)?;
        let points = args.grid.or(cfg.grid);
        let opts = match points {
            Some(p) => GridOptions::with_points(p),
            None => GridOptions::default(),
        };
        opts.validate()?;
        let out = args.out.clone().or_else(|| cfg.out.clone());
        let run = Self {
            trials: args.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
            seed: args.seed.or(cfg.seed).unwrap_or(0),
            cfg,
            opts,
        };
        Ok((run, out))
    }

    /// Explicit sensor sets, else `C`, `P` and every node of `C u P`.
    fn sensor_sets(&self) -> Result<Vec<Vec<usize>>> {
        if !self.cfg.sensors.is_empty() {
            return Ok(self.cfg.sensors.clone());
        }
        let p = self
            .cfg
            .partition
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("config lists no `sensors` and no `partition`".into()))?;
        let mut sets = Vec::new();
        for s in [&p.cutset, &p.partitioned] {
            if !s.is_empty() {
                sets.push(s.clone());
            }
        }
        let mut nodes: Vec<usize> = p.cutset.iter().chain(&p.partitioned).copied().collect();
        nodes.sort_unstable();
        for v in nodes {
            if !sets.contains(&vec![v]) {
                sets.push(vec![v]);
            }
        }
        if sets.is_empty() {
            return Err(Error::EmptySet("sensor sets"));
        }
        Ok(sets)
    }

    fn role(&self, set: &[usize]) -> &'static str {
        match &self.cfg.partition {
            Some(p) if set == p.cutset.as_slice() => "cutset",
            Some(p) if set == p.partitioned.as_slice() => "partitioned",
            Some(p) if set.iter().all(|v| p.cutset.contains(v)) => "cutset_node",
            Some(p) if set.iter().all(|v| p.partitioned.contains(v)) => "partitioned_node",
            _ => "",
        }
    }
}

pub fn cmd_analyze(args: &CommonArgs) -> Result<(Outcome, Option<PathBuf>)> {
    let (run, out) = Run::new(args)?;
    let model = &run.cfg.model;
    let n = model.n();
    let mut report = String::new();
    let mut csv = String::from("subset,role,scenario,sigma_v2,horizon,eta_hat,eta_asym,r_hat,r_asym,pe_finite,pe_asym\n");
    let sets = if run.cfg.sensors.is_empty() && run.cfg.partition.is_none() && run.cfg.toeplitz.is_some() {
        Vec::new()
    } else {
        run.sensor_sets()?
    };

    for sc in &run.cfg.scenarios {
        writeln!(report, "scenario {} (sigma_v^2 = {}, N = {})", sc.name, sc.sigma_v2, sc.spec.horizon).ok();
        if sc.is_mean() && !sets.is_empty() && !model.is_nilpotent() {
            writeln!(report, "  note: G is not nilpotent, asymptotic mean-shift values are approximate").ok();
        }
        for set in &sets {
            let sensors = SensorSet::new(set, n, sc.sigma_v2)?;
            let rep = snr_report(model, &sensors, &sc.spec, run.opts)?;
            let pi1 = sc.spec.pi1;
            let eta_asym = rep.eta_asym.map(|a| a.value);
            let (pe_finite, pe_asym) = if sc.is_mean() {
                (
                    rep.eta_hat.map(|e| pe_mean_priors(e, pi1)).transpose()?,
                    eta_asym.map(|e| pe_mean_priors(e, pi1)).transpose()?,
                )
            } else {
                (
                    rep.r_hat.map(|r| pe_ldmap(r, 1.0, pi1)).transpose()?,
                    rep.r_asym.map(|r| pe_ldmap(r, 1.0, pi1)).transpose()?,
                )
            };
            let label = format_node_set(set);
            let role = run.role(set);
            writeln!(
                report,
                "  {{{}}}{} P_e = {} (asymptotic {})",
                label.replace(';', ","),
                if role.is_empty() { String::new() } else { format!(" [{role}]") },
                opt_num(pe_finite),
                opt_num(pe_asym)
            )
            .ok();
            writeln!(
                csv,
                "{label},{role},{},{},{},{},{},{},{},{},{}",
                sc.name,
                num(sc.sigma_v2),
                sc.spec.horizon,
                opt_num(rep.eta_hat),
                opt_num(eta_asym),
                opt_num(rep.r_hat),
                opt_num(rep.r_asym),
                opt_num(pe_finite),
                opt_num(pe_asym)
            )
            .ok();
        }
    }

    let mut verdicts: Vec<ComparisonVerdict<f64>> = Vec::new();
    let mut inapplicable = false;
    if let Some(p) = &run.cfg.partition {
        if !p.cutset.is_empty() && !p.partitioned.is_empty() {
            let source = if p.source.is_empty() {
                (0..n).filter(|v| !p.cutset.contains(v) && !p.partitioned.contains(v)).collect()
            } else {
                p.source.clone()
            };
            let part = verify_cutset(model, &source, &p.cutset, &p.partitioned, p.d)?;
            writeln!(
                report,
                "cutset {{{}}} separates {{{}}} from {{{}}} (d = {})",
                format_node_set(&part.cutset).replace(';', ","),
                format_node_set(&part.source).replace(';', ","),
                format_node_set(&part.partitioned).replace(';', ","),
                p.d
            )
            .ok();
            let mut noise_levels: Vec<f64> = run.cfg.scenarios.iter().map(|s| s.sigma_v2).collect();
            noise_levels.sort_by(f64::total_cmp);
            noise_levels.dedup();
            for sv2 in noise_levels {
                if sv2 == 0.0 {
                    verdicts.push(noiseless_verdict(sv2)?);
                    continue;
                }
                let scs: Vec<&NamedScenario> = run
                    .cfg
                    .scenarios
                    .iter()
                    .filter(|s| s.sigma_v2 == sv2 && (s.is_mean() || s.is_cov()))
                    .collect();
                let specs: Vec<_> = scs.iter().map(|s| &s.spec).collect();
                match noisy_verdict(&part, model, sv2, &specs, run.opts) {
                    Ok(v) => {
                        for (d, s) in v.direct.iter().zip(&scs) {
                            writeln!(
                                report,
                                "  {}: asymptotic P_e(C) = {}, P_e(P) = {}",
                                s.name,
                                num(d.pe_cutset),
                                num(d.pe_partitioned)
                            )
                            .ok();
                        }
                        verdicts.push(v.mean);
                        verdicts.push(v.cov);
                    }
                    Err(e @ (Error::UnitCircleEigenvalue(_) | Error::Inapplicable(_))) => {
                        writeln!(report, "  noisy comparison not applicable: {e}").ok();
                        inapplicable = true;
                    }
                    Err(e) => return Err(e),
                }
            }
            if model.is_nonnegative() {
                verdicts.push(nonneg_criteria(&part)?.verdict());
            }
        }
    }
    for v in &verdicts {
        let values: Vec<String> = v.values.iter().map(|(k, x)| format!("{k} = {}", num(*x))).collect();
        writeln!(
            report,
            "verdict [{}, {}]: {} ({}) => {}",
            v.regime,
            v.applies_to,
            v.condition,
            values.join(", "),
            v.conclusion
        )
        .ok();
    }

    if let Some(t) = run.cfg.toeplitz {
        if t.j.is_some() {
            let siso = siso_section(&run)?;
            report.push_str(&siso.report);
        }
    }

    let decided = verdicts.iter().any(|v| v.conclusion != Conclusion::Inconclusive);
    let exit = if (!verdicts.is_empty() || inapplicable) && !decided {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok((Outcome { report, csv, exit }, out))
}

pub fn cmd_simulate(args: &CommonArgs) -> Result<(Outcome, Option<PathBuf>)> {
    let (run, out) = Run::new(args)?;
    if run.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if run.cfg.scenarios.is_empty() {
        return Err(Error::InvalidParameter("simulate needs at least one scenario".into()));
    }
    let model = &run.cfg.model;
    let mut report = String::new();
    let mut csv = String::from("subset,model,trials,p_hat,std_err,analytic_pe,abs_gap\n");
    for sc in &run.cfg.scenarios {
        for set in run.sensor_sets()? {
            let plan = TrialPlan {
                trials: run.trials,
                seed: run.seed,
                scenario: sc.spec.clone(),
                sensors: SensorSet::new(&set, model.n(), sc.sigma_v2)?,
                detector: sc.detector,
            };
            let rep = estimate_error(&plan, model)?;
            let gap = rep.analytic_pe.map(|a| (rep.p_hat - a).abs());
            let label = format_node_set(&set);
            writeln!(
                report,
                "{} {{{}}} [{}]: p_hat = {} +- {} (analytic {})",
                sc.name,
                label.replace(';', ","),
                sc.detector,
                num(rep.p_hat),
                num(rep.std_err),
                opt_num(rep.analytic_pe)
            )
            .ok();
            writeln!(
                csv,
                "{label},{},{},{},{},{},{}",
                sc.name,
                rep.trials_used,
                num(rep.p_hat),
                num(rep.std_err),
                opt_num(rep.analytic_pe),
                opt_num(gap)
            )
            .ok();
        }
    }
    Ok((Outcome { report, csv, exit: EXIT_OK }, out))
}

pub fn cmd_rank(args: &CommonArgs) -> Result<(Outcome, Option<PathBuf>)> {
    let (run, out) = Run::new(args)?;
    let model = &run.cfg.model;
    let part = run.cfg.partition.as_ref();
    let pool = match (&run.cfg.rank.pool, part) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => {
            let mut v: Vec<usize> = p.cutset.iter().chain(&p.partitioned).copied().collect();
            v.sort_unstable();
            v
        }
        (None, None) => (0..model.n()).collect(),
    };
    let k = run
        .cfg
        .rank
        .k
        .or_else(|| part.map(|p| p.cutset.len()).filter(|&k| k > 0))
        .ok_or_else(|| Error::InvalidParameter("rank needs `rank.k` or a cutset".into()))?;
    let subsets = enumerate_subsets(model, &pool, k, run.cfg.rank.d.unwrap_or(0))?;
    let placement = |pick: fn(&NamedScenario) -> bool| {
        run.cfg.scenarios.iter().find(|s| pick(s)).map(|s| PlacementModel {
            scenario: s.spec.clone(),
            sigma_v2: s.sigma_v2,
        })
    };
    let mean = placement(NamedScenario::is_mean);
    let cov = placement(NamedScenario::is_cov);
    let criterion = run
        .cfg
        .rank
        .criterion
        .unwrap_or(if mean.is_some() { Criterion::Mean } else { Criterion::Covariance });
    let cut = part.map(|p| p.cutset.as_slice()).filter(|c| !c.is_empty());
    let ranking = rank_placements(model, mean.as_ref(), cov.as_ref(), &subsets, criterion, cut, run.opts)?;

    let mut report = format!(
        "{} subsets of size {k} ranked by {} error probability\n",
        ranking.ranked.len(),
        match criterion {
            Criterion::Mean => "mean-shift",
            Criterion::Covariance => "covariance-shift",
        }
    );
    let mut csv = String::from("rank,label,subset,is_cutset,eta,pe_mean,r,pe_cov\n");
    for p in &ranking.ranked {
        let label = format_node_set(&p.subset);
        if p.rank <= 5 || p.is_cutset {
            let mut line = format!(
                "  #{:<4} {{{}}}{}",
                p.rank,
                label.replace(';', ","),
                if p.is_cutset { " [cutset]" } else { "" }
            );
            for (name, v) in [("pe_mean", p.pe_mean), ("pe_cov", p.pe_cov)] {
                if let Some(v) = v {
                    write!(line, " {name} = {}", num(v)).ok();
                }
            }
            writeln!(report, "{line}").ok();
        }
        writeln!(
            csv,
            "{},{},{label},{},{},{},{},{}",
            p.rank,
            p.label,
            p.is_cutset,
            opt_num(p.eta),
            opt_num(p.pe_mean),
            opt_num(p.r),
            opt_num(p.pe_cov)
        )
        .ok();
    }
    for (s, why) in &ranking.excluded {
        writeln!(report, "  excluded {{{}}}: {why}", format_node_set(s).replace(';', ",")).ok();
    }
    Ok((Outcome { report, csv, exit: EXIT_OK }, out))
}

struct SisoSection {
    report: String,
    rows: Vec<(usize, [f64; 5])>,
}

fn siso_params(run: &Run) -> Result<SisoScenario<f64>> {
    let scalar = |s: &NamedScenario| -> Result<()> {
        if s.spec.r() != 1 {
            return Err(Error::Dimension("single-input comparison needs r = 1".into()));
        }
        Ok(())
    };
    let mean = run
        .cfg
        .scenarios
        .iter()
        .find(|s| s.is_mean())
        .ok_or_else(|| Error::InvalidParameter("single-input comparison needs a mean-shift scenario".into()))?;
    let cov = run
        .cfg
        .scenarios
        .iter()
        .find(|s| s.is_cov())
        .ok_or_else(|| Error::InvalidParameter("single-input comparison needs a covariance-shift scenario".into()))?;
    scalar(mean)?;
    scalar(cov)?;
    if mean.sigma_v2 != cov.sigma_v2 {
        return Err(Error::InvalidParameter(
            "single-input comparison needs one sigma_v^2 for both scenarios".into(),
        ));
    }
    Ok(SisoScenario {
        mu_delta: mean.spec.mu2[0] - mean.spec.mu1[0],
        sigma_c2: mean.spec.sigma1[(0, 0)],
        s1: cov.spec.sigma1[(0, 0)],
        s2: cov.spec.sigma2[(0, 0)],
        sigma_v2: mean.sigma_v2,
        horizon: mean.spec.horizon,
    })
}

fn siso_section(run: &Run) -> Result<SisoSection> {
    let t = run
        .cfg
        .toeplitz
        .ok_or_else(|| Error::InvalidParameter("network is not a toeplitz spec".into()))?;
    let j = t.j.ok_or_else(|| Error::InvalidParameter("toeplitz spec has no cutset node `j`".into()))?;
    if j == 0 {
        return Err(Error::InvalidParameter("node labels are 1-based".into()));
    }
    let sc = siso_params(run)?;
    let rep = siso_orderings(t.n, t.a, t.b, t.c, t.q - 1, j - 1, &sc)?;
    let mut report = format!(
        "single-input line: q = {}, cutset node {}, ||G~||_inf = {}, min row sum = {}, predicted {:?}\n",
        t.q,
        j,
        num(rep.gtilde_norm),
        num(rep.min_row_sum),
        rep.predicted
    );
    for r in &rep.rows {
        writeln!(
            report,
            "  node {:>3}: gain {} P_em {} P_ev {}",
            r.node + 1,
            num(r.gain),
            num(r.pe_mean),
            num(r.pe_cov)
        )
        .ok();
    }
    writeln!(
        report,
        "  observed: cutset node best = {}, worst = {}",
        rep.cutset_best, rep.cutset_worst
    )
    .ok();
    let rows = rep
        .rows
        .iter()
        .map(|r| (r.node, [r.gain, r.eta_s, r.r_s, r.pe_mean, r.pe_cov]))
        .collect();
    Ok(SisoSection { report, rows })
}

pub fn cmd_toeplitz(args: &CommonArgs) -> Result<(Outcome, Option<PathBuf>)> {
    let (run, out) = Run::new(args)?;
    let t = run
        .cfg
        .toeplitz
        .ok_or_else(|| Error::InvalidParameter("toeplitz command needs a `network.toeplitz` spec".into()))?;
    let profile = toeplitz_gain_profile(t.n, t.a, t.b, t.c, t.q - 1)?;
    let mut report = format!(
        "line n = {}, a = {}, b = {}, c = {}, input node {}: |(I - G)^-1| column is {} (a + b + c < 1: {})\n",
        t.n, t.a, t.b, t.c, t.q, profile.observed, profile.predicted_decreasing
    );
    let siso = match t.j {
        Some(_) => Some(siso_section(&run)?),
        None => None,
    };
    let mut csv = String::from("node,gain,eta_s,r_s,pe_mean,pe_cov\n");
    for (k, g) in profile.values.iter().enumerate() {
        let node = profile.q + k;
        let extra = siso
            .as_ref()
            .and_then(|s| s.rows.iter().find(|(l, _)| *l == node))
            .map(|(_, v)| v[1..].iter().map(|x| num(*x)).collect::<Vec<_>>().join(","))
            .unwrap_or_else(|| ",,,".into());
        writeln!(csv, "{},{},{extra}", node + 1, num(*g)).ok();
    }
    if let Some(s) = &siso {
        report.push_str(&s.report);
    }
    Ok((Outcome { report, csv, exit: EXIT_OK }, out))
}

/// Writes `csv` to `out` (warning on overwrite) or appends it to stdout.
fn emit(outcome: &Outcome, out: Option<PathBuf>) -> Result<()> {
    print!("{}", outcome.report);
    match out {
        Some(path) => {
            if path.exists() {
                eprintln!("warning: overwriting {}", path.display());
            }
            fs::write(&path, &outcome.csv)
                .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            println!();
            print!("{}", outcome.csv);
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Toeplitz(a) => cmd_toeplitz(a),
    };
    match result.and_then(|(outcome, out)| emit(&outcome, out).map(|()| outcome.exit)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}
