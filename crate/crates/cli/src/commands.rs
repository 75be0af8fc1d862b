use std::path::Path;

use kpspin_core::chaos::{
    chaotic_area, fibonacci_sphere, lyapunov_analytic, lyapunov_max_over_seeds, lyapunov_qr, phase_space_similarity,
    rotated_fibonacci_seeds,
};
use kpspin_core::floquet::{eigensystem, spin_operators, FloquetBuilder, SpinRepresentation};
use kpspin_core::quantum::{
    coe_normalization, fit_quantum_lyapunov, floquet_delta, otoc_series, spectral_statistics_with, FitOptions,
    SymmetryReduction,
};
use kpspin_core::scan::{
    continue_scan, resume_matching, AxisRange, Metric, MetricSettings, RunOptions, ScanSpec, ScanTable,
};
use kpspin_core::stability::{classify_fixed_point, find_fixed_points, StabilityClass, StabilityKind};
use kpspin_core::{dump, ModelParams, PhasePoint, Trajectory};

use crate::args::*;
use crate::error::CliError;
use crate::output::{Cell, Table};

type Res<T> = Result<T, CliError>;

fn usage(flag: &str, message: impl ToString) -> CliError {
    CliError::Usage { flag: flag.to_string(), message: message.to_string() }
}

fn model(m: &Model) -> Res<ModelParams> {
    ModelParams::new(m.p, m.k, m.alpha).map_err(|e| usage("--p/--k/--alpha", e))
}

fn point(flag: &str, t: Triple) -> Res<PhasePoint> {
    let [x, y, z] = t.0;
    PhasePoint::new(x, y, z).map_err(|e| usage(flag, e))
}

fn spins(ns: u32) -> Res<SpinRepresentation> {
    SpinRepresentation::new(ns).map_err(|e| usage("--ns", e))
}

fn echo(params: &ModelParams) -> Vec<Cell> {
    vec![params.p().into(), params.k().into(), params.alpha().into()]
}

fn kind_name(kind: StabilityKind) -> &'static str {
    match kind {
        StabilityKind::Elliptic => "elliptic",
        StabilityKind::Hyperbolic => "hyperbolic",
        StabilityKind::InversionHyperbolic => "inversion-hyperbolic",
        StabilityKind::Parabolic => "parabolic",
    }
}

fn stability_cells(class: &StabilityClass) -> Vec<Cell> {
    vec![
        kind_name(class.kind).into(),
        class.trace.into(),
        class.eccentricity.into(),
        class.resonance.into(),
        class.eigenvalues[0].re.into(),
        class.eigenvalues[0].im.into(),
        class.eigenvalues[1].re.into(),
        class.eigenvalues[1].im.into(),
    ]
}

const STABILITY_COLUMNS: [&str; 8] =
    ["kind", "trace", "eccentricity", "resonance", "eig1_re", "eig1_im", "eig2_re", "eig2_im"];

fn with_columns(head: &[&'static str], tail: &[&'static str]) -> Table {
    let cols: Vec<&'static str> = head.iter().chain(tail).copied().collect();
    Table::new(&cols)
}

pub struct Context {
    pub seed: u64,
    pub threads: usize,
}

pub fn run(cmd: &Command, ctx: &Context) -> Res<Table> {
    match cmd {
        Command::Portrait(a) => portrait(a),
        Command::FixedPoints(a) => fixed_points(a),
        Command::Classify(a) => classify(a),
        Command::Lyapunov(a) => lyapunov(a, ctx),
        Command::Area(a) => area(a),
        Command::Similarity(a) => similarity(a),
        Command::Scan(a) => scan(a, ctx),
        Command::Spectrum(a) => spectrum(a),
        Command::IprDelta(a) => ipr_delta(a),
        Command::Otoc(a) => otoc(a, ctx),
    }
}

fn portrait(a: &PortraitArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let mut t = Table::new(&["p", "k", "alpha", "orbit", "kick", "x", "y", "z"]);
    for (orbit, start) in fibonacci_sphere(a.orbits as usize).into_iter().enumerate() {
        let traj = Trajectory::generate(start, params, a.kicks as usize);
        for (kick, x) in traj.points.iter().enumerate() {
            let mut row = echo(&params);
            row.extend([orbit.into(), kick.into(), x.x.into(), x.y.into(), x.z.into()]);
            t.push(row);
        }
    }
    Ok(t)
}

fn fixed_points(a: &FixedPointArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let found = find_fixed_points(&params, a.grid as usize)?;
    let mut t = with_columns(&["p", "k", "alpha", "x", "y", "z"], &STABILITY_COLUMNS);
    for rec in &found.records {
        let mut row = echo(&params);
        row.extend([rec.point.x.into(), rec.point.y.into(), rec.point.z.into()]);
        row.extend(stability_cells(&rec.class));
        t.push(row);
    }
    Ok(t)
}

fn classify(a: &ClassifyArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let x = point("--point", a.point)?;
    let class = classify_fixed_point(x, &params)?;
    let mut t = with_columns(&["p", "k", "alpha", "x", "y", "z"], &STABILITY_COLUMNS);
    let mut row = echo(&params);
    row.extend([x.x.into(), x.y.into(), x.z.into()]);
    row.extend(stability_cells(&class));
    t.push(row);
    Ok(t)
}

fn lyapunov(a: &LyapunovArgs, ctx: &Context) -> Res<Table> {
    let params = model(&a.model)?;
    let (steps, transient) = (a.steps as usize, a.transient as usize);
    let result = match a.start {
        Some(s) => lyapunov_qr(&params, point("--start", s)?, steps, transient)?,
        None => lyapunov_max_over_seeds(&params, &rotated_fibonacci_seeds(a.seeds as usize, ctx.seed), steps, transient)?,
    };
    let analytic = lyapunov_analytic(&params);
    let mut t = Table::new(&[
        "p",
        "k",
        "alpha",
        "steps",
        "transient",
        "seed_x",
        "seed_y",
        "seed_z",
        "value",
        "exponent_2",
        "exponent_3",
        "converged",
        "analytic",
        "analytic_valid",
    ]);
    let mut row = echo(&params);
    row.extend([
        a.steps.into(),
        a.transient.into(),
        result.seed.x.into(),
        result.seed.y.into(),
        result.seed.z.into(),
        result.value.into(),
        result.exponents[1].into(),
        result.exponents[2].into(),
        result.converged.into(),
        analytic.value.into(),
        analytic.valid.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn area(a: &AreaArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let res = chaotic_area(&params, a.ntot as usize, a.dmin, &a.tmax.0)?;
    let mut t = Table::new(&["p", "k", "alpha", "ntot", "dmin", "tmax_min", "tmax_max", "area", "fraction", "escaped"]);
    let mut row = echo(&params);
    let lo = a.tmax.0.iter().min().copied();
    let hi = a.tmax.0.iter().max().copied();
    row.extend([
        a.ntot.into(),
        a.dmin.into(),
        lo.into(),
        hi.into(),
        res.area.into(),
        res.fraction().into(),
        res.n_escaped.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn axis(flag: &str, span: Span, default_count: usize) -> Res<AxisRange> {
    AxisRange::new(span.min, span.max, span.count.unwrap_or(default_count)).map_err(|e| usage(flag, e))
}

fn similarity(a: &SimilarityArgs) -> Res<Table> {
    let alphas = axis("--alphas", a.alphas, 200)?;
    let mut t = Table::new(&["p", "k", "alpha", "dalpha", "dk", "ntot", "kicks", "similarity", "excluded"]);
    for alpha in alphas.values() {
        let params = ModelParams::new(a.p, a.k, alpha).map_err(|e| usage("--alphas", e))?;
        let res = phase_space_similarity(&params, a.dalpha, a.dk, a.ntot as usize, a.kicks as usize)?;
        let mut row = echo(&params);
        row.extend([
            a.dalpha.into(),
            a.dk.into(),
            a.ntot.into(),
            a.kicks.into(),
            res.mean.into(),
            res.n_excluded.into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

fn scan(a: &ScanArgs, ctx: &Context) -> Res<Table> {
    let metric = match a.metric {
        MetricArg::Lyapunov => Metric::Lyapunov,
        MetricArg::Area => Metric::Area,
        MetricArg::Similarity => Metric::Similarity,
        MetricArg::Gamma => Metric::Gamma,
        MetricArg::Delta => Metric::Delta,
        MetricArg::QuantumLyapunov => Metric::QuantumLyapunov,
    };
    let default_count = if metric.is_quantum() { 40 } else { 60 };
    let spec = ScanSpec {
        metric,
        p: a.p,
        k_range: axis("--ks", a.ks, default_count)?,
        alpha_range: axis("--alphas", a.alphas, default_count)?,
        settings: MetricSettings {
            n_steps: a.steps as usize,
            n_transient: a.transient as usize,
            n_seeds: a.seeds as usize,
            n_tot: a.ntot as usize,
            d_min: a.dmin,
            t_max_list: a.tmax.0.clone(),
            d_alpha: a.dalpha,
            d_k: a.dk,
            kicks: a.kicks as usize,
            n_spins: a.ns,
            otoc_steps: a.otoc_steps as usize,
            fit: FitOptions::default(),
        },
        root_seed: ctx.seed,
    };
    spec.validate().map_err(|e| usage("--ks/--alphas", e))?;

    let mut table = match &a.checkpoint {
        Some(path) if path.exists() => {
            if !a.resume {
                return Err(usage("--checkpoint", format!("{} exists; pass --resume to continue it", path.display())));
            }
            resume_matching(path, &spec)?
        }
        _ => ScanTable::empty(spec.clone())?,
    };
    let opts = RunOptions {
        checkpoint: a.checkpoint.clone(),
        batch_size: a.batch as usize,
        cell_budget: a.max_cells.map(|n| n as usize),
    };
    continue_scan(&mut table, ctx.threads, &opts)?;

    let mut t = Table::new(&["p", "metric", "alpha_index", "k_index", "k", "alpha", "value", "status"]);
    let metric_name = serde_json::to_value(a.metric).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    for cell in 0..spec.n_cells() {
        let (i, j) = spec.cell_position(cell);
        let status = if table.complete[cell] {
            "ok"
        } else if table.failures.iter().any(|f| f.cell == cell) {
            "failed"
        } else {
            "pending"
        };
        t.push(vec![
            a.p.into(),
            metric_name.as_str().into(),
            i.into(),
            j.into(),
            spec.k_range.value(j).into(),
            spec.alpha_range.value(i).into(),
            table.get(i, j).into(),
            status.into(),
        ]);
    }
    for f in &table.failures {
        eprintln!("warning: cell {} failed: {}", f.cell, f.message);
    }
    Ok(t)
}

fn spectrum(a: &SpectrumArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let builder = FloquetBuilder::new(spins(a.ns)?)?;
    let op = builder.build(&params);
    let reduction = match a.reduction {
        Reduction::Full => SymmetryReduction::Full,
        Reduction::Parity => SymmetryReduction::Parity,
        Reduction::None => SymmetryReduction::None,
    };
    let stats = spectral_statistics_with(&op, builder.basis(), reduction)?;
    if let Some(path) = &a.dump_operator {
        dump::write_operator(&op, path)?;
    }
    if let Some(path) = &a.dump_spectrum {
        dump::write_spectrum(&params, op.rep, &eigensystem(&op.matrix)?, Path::new(path))?;
    }
    let mut t = Table::new(&[
        "p",
        "k",
        "alpha",
        "ns",
        "r_mean",
        "gamma",
        "ratios",
        "excluded_degenerate",
        "parity_resolved",
        "x_resolved",
    ]);
    let mut row = echo(&params);
    row.extend([
        a.ns.into(),
        stats.r_mean.into(),
        stats.gamma.into(),
        stats.n_ratios.into(),
        stats.excluded_degenerate.into(),
        stats.parity_resolved.into(),
        stats.x_resolved.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn ipr_delta(a: &IprArgs) -> Res<Table> {
    let params = model(&a.model)?;
    let builder = FloquetBuilder::new(spins(a.ns)?)?;
    let spectral = eigensystem(&builder.build(&params).matrix)?;
    let delta = floquet_delta(&spectral, builder.basis());
    let mut t = Table::new(&["p", "k", "alpha", "ns", "delta"]);
    let mut row = echo(&params);
    row.extend([a.ns.into(), delta.into()]);
    t.push(row);
    Ok(t)
}

fn otoc(a: &OtocArgs, ctx: &Context) -> Res<Table> {
    let params = model(&a.model)?;
    let rep = spins(a.ns)?;
    let op = FloquetBuilder::new(rep)?.build(&params);
    let jz = spin_operators(rep).jz;
    let mut series = otoc_series(&op, &jz, &jz, a.steps as usize)?;
    if a.coe_samples > 0 {
        series.c_coe = Some(coe_normalization(rep, &jz, &jz, a.coe_samples as usize, ctx.seed)?.c_coe);
    }
    let opts = FitOptions {
        floor_multiplier: a.floor_multiplier,
        floor_epsilon: a.floor_epsilon,
        saturation_fraction: a.saturation,
        min_points: a.min_points as usize,
    };
    let fit = fit_quantum_lyapunov(&series, &opts);
    let normalized = series.normalized();
    let mut t = Table::new(&["p", "k", "alpha", "ns", "n", "c", "c_normalized", "lambda_q", "fit_lo", "fit_hi"]);
    for (idx, (&n, &c)) in series.n.iter().zip(&series.c).enumerate() {
        let mut row = echo(&params);
        row.extend([
            a.ns.into(),
            n.into(),
            c.into(),
            normalized.as_ref().map(|v| v[idx]).into(),
            fit.map(|f| f.lambda_q).into(),
            fit.map(|f| f.n_lo).into(),
            fit.map(|f| f.n_hi).into(),
        ]);
        t.push(row);
    }
    Ok(t)
}
