use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use trajdist_core::comp::d_comp_matrices;
use trajdist_core::comp::tradeoff::{
    auc_bounds, default_alpha_grid, default_threshold_grid, motp_curve_matrices, normalized_auc, tradeoff_curve_matrices,
};
use trajdist_core::exact::{d_nat_matrices, motp_matrices, ospa_matrices};
use trajdist_core::io::{align, read_tracks, write_tracks};
use trajdist_core::synth::{generate_pair, knob_sweep, pair_aucs_matrices, GenConfig, Knob, SweepSettings};
use trajdist_core::verify::{self, Suite, VerifyOptions};
use trajdist_core::{
    auc as curve_auc, CompParams, DistanceMatrixSequence, Error, ExtendedMetricParams, NormKind, SwitchCost, SwitchCostKind,
    TradeoffCurve, TradeoffPoint,
};

use crate::exit;
use crate::report::{emit, print_json, read_input, AssociationOut, Inputs, Params, RunReport};
use crate::{AucArgs, CurveKind, DistArgs, GenArgs, GenFlags, Metric, PairArgs, SolverArgs, SuiteArg, TradeoffArgs, VerifyArgs};

struct LoadedPair {
    d: DistanceMatrixSequence,
    inputs: Inputs,
}

fn parse_file(path: &Path, bytes: &[u8]) -> anyhow::Result<trajdist_core::io::RawTracks> {
    read_tracks(bytes).with_context(|| path.display().to_string())
}

fn load_pair(gt: &Path, hyp: &Path, miss_penalty: f64) -> anyhow::Result<LoadedPair> {
    let params = ExtendedMetricParams::euclidean(miss_penalty)?;
    let (gt_bytes, gt_in) = read_input(gt)?;
    let (hyp_bytes, hyp_in) = read_input(hyp)?;
    let raw_gt = parse_file(gt, &gt_bytes)?;
    let raw_hyp = parse_file(hyp, &hyp_bytes)?;
    let mut sets = align(&[&raw_gt, &raw_hyp])?.into_iter();
    let (a, b) = (sets.next().expect("two sets"), sets.next().expect("two sets"));
    let d = trajdist_core::pair_distances(&a, &b, &params)?;
    Ok(LoadedPair { d, inputs: Inputs { ground_truth: gt_in, hypothesis: hyp_in } })
}

fn load(pair: &PairArgs) -> anyhow::Result<LoadedPair> {
    load_pair(&pair.ground_truth, &pair.hypothesis, pair.miss_penalty)
}

fn comp_params(solver: &SolverArgs, alpha: f64) -> CompParams {
    CompParams {
        alpha,
        norm: solver.norm.into(),
        tol: solver.tol,
        max_iter: solver.max_iter,
        backend: solver.backend.into(),
        sparsify_threshold: solver.sparsify,
        ..Default::default()
    }
}

fn backend_name(cp: &CompParams) -> &'static str {
    match cp.backend {
        trajdist_core::Backend::Admm => "admm",
        trajdist_core::Backend::Simplex => "simplex",
    }
}

fn status(converged: bool) -> u8 {
    if converged {
        exit::OK
    } else {
        exit::NOT_CONVERGED
    }
}

pub fn dist(args: &DistArgs) -> anyhow::Result<u8> {
    let start = Instant::now();
    let pair = load(&args.pair)?;
    let d = &pair.d;
    let mut params = Params { miss_penalty: args.pair.miss_penalty, ..Default::default() };
    let (name, result) = match args.metric {
        Metric::Ospa => ("ospa", ospa_matrices(d)),
        Metric::Motp => {
            let thr = args.thr.ok_or_else(|| anyhow!("--metric motp needs --thr"))?;
            params.thr = Some(thr);
            ("motp", motp_matrices(d, thr)?)
        }
        Metric::Dnat => {
            let kind: SwitchCostKind = args.k.ok_or_else(|| anyhow!("--metric dnat needs --K"))?.into();
            let alpha = args.alpha.unwrap_or(1.0);
            let k = match kind {
                SwitchCostKind::Maxcount => {
                    params.beta = Some(args.beta);
                    SwitchCost::maxcount(alpha, args.beta)?
                }
                _ => SwitchCost::new(kind, alpha)?,
            };
            params.alpha = Some(alpha);
            params.switch_cost = Some(kind.name().to_string());
            let r = d_nat_matrices(d, &k, args.cap).map_err(|e| match e {
                Error::InstanceTooLarge { .. } => anyhow!("{e}; use --metric dcomp for instances this size or raise --cap"),
                other => other.into(),
            })?;
            ("dnat", r)
        }
        Metric::Dcomp => {
            let alpha = args.alpha.ok_or_else(|| anyhow!("--metric dcomp needs --alpha"))?;
            let cp = comp_params(&args.solver, alpha);
            params.alpha = Some(alpha);
            params.norm = Some(cp.norm.name());
            params.tol = Some(cp.tol);
            params.backend = Some(backend_name(&cp));
            params.sparsify = cp.sparsify_threshold;
            ("dcomp", d_comp_matrices(d, &cp)?)
        }
    };
    let mut report = RunReport::new(name, params, &result, (d.m(), d.t_horizon()), pair.inputs);
    if args.association {
        report.association = AssociationOut::from_result(&result.association);
    }
    if args.timing {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    print_json(&report)?;
    if !result.converged {
        eprintln!("warning: solver stopped at the iteration cap before reaching the tolerance");
    }
    Ok(status(result.converged))
}

fn curve_csv(curve: &TradeoffCurve, param: &str, auc: Option<f64>, eps: f64) -> String {
    let mut out = format!("{param},dist,swi,on_hull\n");
    for (i, p) in curve.points.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", p.param, p.dist, p.swi, curve.on_hull(i, eps)));
    }
    if let Some(a) = auc {
        out.push_str(&format!("# auc={a}\n"));
    }
    out
}

fn report_failures(curve: &TradeoffCurve, param: &str) -> bool {
    let mut ok = true;
    for p in &curve.points {
        if let Some(e) = &p.error {
            eprintln!("{param}={}: {e}", p.param);
            ok = false;
        } else if !p.converged {
            eprintln!("{param}={}: iteration cap reached before the tolerance", p.param);
            ok = false;
        }
    }
    ok
}

pub fn tradeoff(args: &TradeoffArgs) -> anyhow::Result<u8> {
    let pair = load(&args.pair)?;
    let d = &pair.d;
    let norm: NormKind = args.solver.norm.into();
    let (curve, param) = match args.kind {
        CurveKind::Dcomp => {
            let grid = args.alphas.clone().unwrap_or_else(|| default_alpha_grid(d));
            (tradeoff_curve_matrices(d, &grid, &comp_params(&args.solver, 0.0))?, "alpha")
        }
        CurveKind::Motp => {
            let grid = args.alphas.clone().unwrap_or_else(|| default_threshold_grid(args.pair.miss_penalty));
            (motp_curve_matrices(d, &grid, norm)?, "thr")
        }
    };
    let ok = report_failures(&curve, param);
    let auc = if curve.hull.is_empty() { None } else { Some(normalized_auc(&curve, d, norm)?) };
    let (max_dist, max_swi) = auc_bounds(d, norm);
    let eps = 1e-9 * max_dist.max(max_swi).max(1.0);
    let text = curve_csv(&curve, param, auc, eps);
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => emit(&text)?,
    }
    Ok(status(ok))
}

/// Settings from `--config`, then individual flags; the seed is drawn when neither sets it.
fn resolve_config(flags: &GenFlags) -> anyhow::Result<GenConfig> {
    let (mut cfg, config_seed) = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text).with_context(|| path.display().to_string())?;
            let has_seed = value.get("seed").is_some();
            let cfg: GenConfig = serde_json::from_value(value).with_context(|| path.display().to_string())?;
            (cfg, has_seed)
        }
        None => (GenConfig::default(), false),
    };
    macro_rules! apply {
        ($($field:ident),*) => {$(
            if let Some(v) = flags.$field {
                cfg.$field = v;
            }
        )*};
    }
    apply!(n_traj, t_horizon, state_dim, amp_noise, frag_prob, del_prob, swi_dist, frag_drop_prob, swap_prob, seed);
    if flags.seed.is_none() && !config_seed {
        cfg.seed = rand::random();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn gen(args: &GenArgs) -> anyhow::Result<u8> {
    let cfg = resolve_config(&args.gen)?;
    let (a, b) = generate_pair(&cfg)?;
    let write = |suffix: &str, body: &dyn Fn(&mut Vec<u8>) -> anyhow::Result<()>| -> anyhow::Result<()> {
        let path = with_suffix(&args.out_prefix, suffix);
        let mut buf = Vec::new();
        body(&mut buf)?;
        std::fs::write(&path, buf).with_context(|| format!("cannot write {}", path.display()))
    };
    write("_gt.csv", &|buf| Ok(write_tracks(buf, &a, cfg.state_dim)?))?;
    write("_hyp.csv", &|buf| Ok(write_tracks(buf, &b, cfg.state_dim)?))?;
    let config = serde_json::to_string_pretty(&cfg)?;
    write("_config.json", &|buf| Ok(writeln!(buf, "{config}")?))?;
    emit(&format!("{config}\n"))?;
    Ok(exit::OK)
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<u8> {
    let suite = match args.suite {
        SuiteArg::Axioms => Suite::Axioms,
        SuiteArg::Counterexamples => Suite::Counterexamples,
        SuiteArg::Norm => Suite::Norm,
        SuiteArg::All => Suite::All,
    };
    let opts = VerifyOptions { seed: args.seed, norm_samples: args.norm_samples, ..Default::default() };
    let report = verify::run(suite, &opts)?;
    if args.json {
        print_json(&report)?;
    } else {
        let mut text: String = report.checks.iter().map(|c| format!("{c}\n")).collect();
        let failed = report.checks.iter().filter(|c| !c.status.is_ok()).count();
        text += &format!("{} checks, {failed} failed\n", report.checks.len());
        emit(&text)?;
    }
    Ok(if report.passed() { exit::OK } else { exit::VERIFY_FAILED })
}

#[derive(Debug, Serialize)]
struct PairAuc {
    auc_comp: f64,
    auc_motp: f64,
    max_dist: f64,
    max_swi: f64,
    norm: &'static str,
    miss_penalty: f64,
    converged: bool,
    inputs: Inputs,
}

#[derive(Debug, Serialize)]
struct CurveAuc {
    auc: f64,
    max_dist: f64,
    max_swi: f64,
    points: usize,
}

/// Reads a curve CSV (`param,dist,swi[,on_hull]`, `#` comments).
fn read_curve(path: &Path) -> anyhow::Result<TradeoffCurve> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 0 && line.chars().next().is_some_and(char::is_alphabetic)) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |i: usize| -> anyhow::Result<f64> {
            let s = fields.get(i).ok_or_else(|| anyhow!("{}: line {}: expected param,dist,swi", path.display(), n + 1))?;
            s.parse().map_err(|_| anyhow!("{}: line {}: '{s}' is not a number", path.display(), n + 1))
        };
        let (param, dist, swi) = (num(0)?, num(1)?, num(2)?);
        let error = (!dist.is_finite() || !swi.is_finite()).then(|| "missing value".to_string());
        points.push(TradeoffPoint { param, dist, swi, converged: true, error });
    }
    Ok(TradeoffCurve::from_points(points))
}

pub fn auc(args: &AucArgs) -> anyhow::Result<u8> {
    if let Some(path) = &args.curve {
        let curve = read_curve(path)?;
        let (max_dist, max_swi) = (args.max_dist.expect("required by clap"), args.max_swi.expect("required by clap"));
        let value = curve_auc(&curve, max_dist, max_swi)?;
        print_json(&CurveAuc { auc: value, max_dist, max_swi, points: curve.points.len() })?;
        return Ok(exit::OK);
    }
    let miss_penalty = args.miss_penalty.ok_or_else(|| anyhow!("--M is required"))?;
    let settings = SweepSettings { params: ExtendedMetricParams::euclidean(miss_penalty)?, comp: comp_params(&args.solver, 0.0) };
    if let Some(knob) = args.sweep {
        let knob: Knob = knob.into();
        let values = args.values.clone().expect("required by clap");
        let base = resolve_config(&args.gen)?;
        let report = knob_sweep(&base, knob, &values, args.repeats, &settings)?;
        let mut text = format!("# seed={}\nknob,value,n,mean_auc_comp,se_auc_comp,mean_auc_motp,se_auc_motp\n", base.seed);
        for r in &report.rows {
            text += &format!(
                "{knob},{},{},{},{},{},{}\n",
                r.value, r.n, r.mean_auc_comp, r.se_auc_comp, r.mean_auc_motp, r.se_auc_motp
            );
        }
        emit(&text)?;
        let converged = report.samples.iter().all(|s| s.converged);
        return Ok(status(converged));
    }
    let (Some(gt), Some(hyp)) = (&args.ground_truth, &args.hypothesis) else {
        bail!("give GROUND_TRUTH and HYPOTHESIS files, --curve, or --sweep");
    };
    let pair = load_pair(gt, hyp, miss_penalty)?;
    let norm = settings.comp.norm;
    let (max_dist, max_swi) = auc_bounds(&pair.d, norm);
    let (auc_comp, auc_motp, converged) = pair_aucs_matrices(&pair.d, &settings)?;
    print_json(&PairAuc {
        auc_comp,
        auc_motp,
        max_dist,
        max_swi,
        norm: norm.name(),
        miss_penalty,
        converged,
        inputs: pair.inputs,
    })?;
    Ok(status(converged))
}
