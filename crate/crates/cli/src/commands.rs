use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thetalab::io::{generate_example, random_siegel, CheckResult, ExampleKind, PeriodMatrixDocument};
use thetalab::kp::{
    cube_grid, divisor_point, flex_fit_with, hirota_terms, kp_pde_residual, tangency_point, tangent_flex, FlexFit,
    FlexFitOptions, KpFrame, PdeMode,
};
use thetalab::kummer::{gw_rank, prop1_matrix, JetOperators};
use thetalab::numerics::{svd_rank, DEFAULT_RTOL};
use thetalab::theta::{
    reduce, theta2_eval, theta_eval_with_plan, theta_with_scale, DerivativeSpec, PeriodMatrix, DEFAULT_ABS_TOL,
};
use thetalab::translation::{
    frame_from_chart, gauss_rank, parallel_deviation, reconstruct, trace_theta_translation, verify_frame,
    ChartCurve, ChartFrameField, ReconstructOptions, ThetaDivisor, TraceOptions, TranslationFrame,
    TranslationSurface,
};
use thetalab::{Error, Result, C64};

use crate::{load_period, parse_vector, vector_arg, Cli, Command, Job, PeriodSource, Surface, Table};

const GAUGE: &str = "|U| = 1; max-modulus U_k real positive; sum V_i conj(U_i) = 0; Re of first nonzero V_i >= 0";
const KP_FRAME: &str = "x = U, y = V/2, t = W/4, constant d/16";
/// Tolerance of the exact specialization identities.
const IDENTITY_TOL: f64 = 1e-9;
/// PDE grids keep `|theta| / scale` above this.
const GRID_CLEARANCE: f64 = 0.05;

fn c64(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(c64).collect()
}

pub(crate) fn dispatch(cli: &Cli, job: &mut Job) -> Result<()> {
    let seed = cli.common.seed;
    let tol = cli.common.tol;
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput("--tol must be positive".into()));
        }
    }
    match &cli.command {
        Command::ThetaEval { source, z, derivs, eps } => {
            theta_eval(job, source, seed, tol, z.as_deref(), derivs, eps.as_deref())
        }
        Command::KummerRank { source } => kummer_rank(job, source, seed, tol),
        Command::GwTest { source, z, d1, d2, starts } => {
            gw_test(job, source, seed, tol, z.as_deref(), d1.as_deref(), d2.as_deref(), *starts)
        }
        Command::KpFit { source, starts, max_residual } => {
            let p = load_period(source, seed)?;
            fit(job, &p, seed, *starts, *max_residual).map(|_| ())
        }
        Command::KpCheck { source, starts, max_residual, points, grid, span, h } => {
            let p = load_period(source, seed)?;
            let f = fit(job, &p, seed, *starts, *max_residual)?;
            kp_check(job, &p, &f, seed, tol.unwrap_or(1e-6), *points, *grid, *span, *h)
        }
        Command::TranslateTrace { source, start, branch, span, step, cap } => {
            translate_trace(job, source, seed, tol.unwrap_or(1e-6), start.as_deref(), *branch, *span, *step, *cap)
        }
        Command::SurfaceVerify { surface, source, at, span, step } => match surface {
            Surface::Cubic => surface_cubic(job, tol.unwrap_or(1e-10), at.as_deref(), *span, *step),
            Surface::Theta => surface_theta(job, source, seed, tol.unwrap_or(1e-9), at.as_deref()),
        },
        Command::GenExample { kind, genus, min_lambda } => gen_example(job, *kind, seed, *genus, *min_lambda),
    }
}

fn parse_eps(text: &str, g: usize) -> Result<Vec<u8>> {
    let eps: Vec<u8> = text
        .chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidInput(format!("characteristic `{text}` must be a 0/1 string"))),
        })
        .collect::<Result<_>>()?;
    if eps.len() != g {
        return Err(Error::InvalidInput(format!("characteristic `{text}` must have {g} digits")));
    }
    Ok(eps)
}

fn theta_eval(
    job: &mut Job,
    source: &PeriodSource,
    seed: u64,
    tol: Option<f64>,
    z: Option<&str>,
    derivs: &[String],
    eps: Option<&str>,
) -> Result<()> {
    let p = load_period(source, seed)?;
    let g = p.g();
    let z = vector_arg(z, g, "z")?;
    let dirs = derivs
        .iter()
        .map(|d| vector_arg(Some(d), g, "derivative direction"))
        .collect::<Result<Vec<_>>>()?;
    let spec = DerivativeSpec::new(dirs)?;
    let abs_tol = tol.unwrap_or(DEFAULT_ABS_TOL);
    job.report.tolerances.insert("abs_tol".into(), abs_tol);
    job.report
        .conventions
        .insert("derivatives".into(), "term-wise, each term times prod_k 2 pi i <n, U_k>".into());
    let value = match eps {
        Some(text) => {
            let eps = parse_eps(text, g)?;
            job.report
                .conventions
                .insert("series".into(), "theta[eps; 0](2z, 2 Omega), derivatives in z".into());
            let value = theta2_eval(&eps, &z, &p, &spec, abs_tol)?;
            job.report.results = json!({ "value": c64(value), "abs": value.norm(), "eps": eps });
            value
        }
        None => {
            let (value, plan) = theta_eval_with_plan(&z, &p, &spec, abs_tol)?;
            let red = reduce(&z, &p);
            job.report.results = json!({ "value": c64(value), "abs": value.norm(), "plan": plan, "reduced": red });
            value
        }
    };
    job.table = Some(Table::numeric(vec!["value_re".into(), "value_im".into()], &[vec![value.re, value.im]]));
    Ok(())
}

fn kummer_rank(job: &mut Job, source: &PeriodSource, seed: u64, tol: Option<f64>) -> Result<()> {
    let p = load_period(source, seed)?;
    let g = p.g();
    let rtol = tol.unwrap_or(DEFAULT_RTOL);
    job.report.tolerances.insert("rtol".into(), rtol);
    job.report
        .conventions
        .insert("columns".into(), "theta2(0), then d_i d_j theta2(0) for i <= j".into());
    let rank = svd_rank(&prop1_matrix(&p)?, rtol)?;
    let full = g * (g + 1) / 2 + 1;
    job.report.results = json!({
        "g": g,
        "rank": rank.rank,
        "full_rank": full,
        "indecomposable": rank.rank == full,
        "singular_values": rank.singular_values,
    });
    job.table = Some(Table::numeric(
        vec!["index".into(), "singular_value".into()],
        &rank.singular_values.iter().enumerate().map(|(i, s)| vec![i as f64, *s]).collect::<Vec<_>>(),
    ));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gw_test(
    job: &mut Job,
    source: &PeriodSource,
    seed: u64,
    tol: Option<f64>,
    z: Option<&str>,
    d1: Option<&str>,
    d2: Option<&str>,
    starts: usize,
) -> Result<()> {
    let p = load_period(source, seed)?;
    let g = p.g();
    let z = vector_arg(z, g, "z")?;
    let rtol = tol.unwrap_or(DEFAULT_RTOL);
    job.report.tolerances.insert("rtol".into(), rtol);
    job.report.conventions.insert("delta2".into(), "D2 + D1^2 / 2".into());
    let jet = match d1 {
        Some(d1) => JetOperators::new(vector_arg(Some(d1), g, "d1")?, vector_arg(d2, g, "d2")?)?,
        None => {
            if d2.is_some() {
                return Err(Error::InvalidInput("--d2 needs --d1".into()));
            }
            let fit = flex_fit_with(
                &p,
                &FlexFitOptions {
                    starts,
                    seed,
                    ..FlexFitOptions::default()
                },
            )?;
            job.report.conventions.insert("jet".into(), "D1 = U, D2 = V of a fitted flex".into());
            JetOperators::new(fit.flex.u, fit.flex.v)?
        }
    };
    let rank = gw_rank(&z, &p, &jet, rtol)?;
    job.report.results = json!({ "rank": rank, "d1": pairs(&jet.d1), "d2": pairs(&jet.d2) });
    job.report.check(CheckResult::at_most("gw_rank", rank as f64, 2.0));
    Ok(())
}

fn fit(job: &mut Job, p: &PeriodMatrix, seed: u64, starts: usize, max_residual: f64) -> Result<FlexFit> {
    if !(max_residual > 0.0) {
        return Err(Error::InvalidInput("--max-residual must be positive".into()));
    }
    let opts = FlexFitOptions {
        starts,
        seed,
        rel_tol: max_residual,
        ..FlexFitOptions::default()
    };
    let fit = flex_fit_with(p, &opts)?;
    job.report.tolerances.insert("max_residual".into(), max_residual);
    job.report.conventions.insert("gauge".into(), GAUGE.into());
    job.report
        .conventions
        .insert("operator".into(), "[D_U^4 - D_U D_W + (3/4) D_V^2 + d] theta2(0)".into());
    job.report.check(CheckResult::at_most("flex_relative_residual", fit.relative_residual, max_residual));
    job.report.results = json!({ "fit": fit });
    Ok(fit)
}

fn random_point(rng: &mut ChaCha8Rng, g: usize) -> Vec<C64> {
    (0..g)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5)))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn kp_check(
    job: &mut Job,
    p: &PeriodMatrix,
    fit: &FlexFit,
    seed: u64,
    tol: f64,
    points: usize,
    grid: usize,
    span: f64,
    h: f64,
) -> Result<()> {
    if grid == 0 || !(span > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidInput("grid, span and h must be positive".into()));
    }
    let g = p.g();
    let f = &fit.flex;
    let frame = f.kp_frame();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    job.report.tolerances.insert("tol".into(), tol);
    job.report.tolerances.insert("identity_tol".into(), IDENTITY_TOL);
    job.report.tolerances.insert("fd_h".into(), h);
    job.report.conventions.insert("kp_frame".into(), KP_FRAME.into());

    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let t = hirota_terms(p, &frame, &random_point(&mut rng, g))?;
        worst = worst.max(t.residual().norm() / t.max_term());
    }
    job.report.check(CheckResult::at_most("hirota_relative_residual", worst, tol));

    let zd = seeded_divisor_point(p, &mut rng)?;
    let td = hirota_terms(p, &frame, &zd)?;
    let divisor_gap = (td.residual() - td.on_divisor()).norm() / td.max_term();
    job.report.check(CheckResult::at_most("divisor_specialization", divisor_gap, IDENTITY_TOL));
    let mut tangency = serde_json::Value::Null;
    if g >= 2 {
        let zt = tangency_point(p, &zd, &f.u)?;
        let tt = hirota_terms(p, &frame, &zt)?;
        let tangency_gap = (tt.on_divisor() - 3.0 * tt.at_tangency()).norm() / tt.max_term();
        let (fp, fm) = tt.factors();
        let factor_gap =
            (tt.at_tangency() - fp * fm).norm() / (tt.xx.norm_sqr() + tt.y.norm_sqr()).max(f64::MIN_POSITIVE);
        job.report.check(CheckResult::at_most("tangency_specialization", tangency_gap, IDENTITY_TOL));
        job.report.check(CheckResult::at_most("tangency_factorization", factor_gap, IDENTITY_TOL));
        tangency = json!({ "z": pairs(&zt), "theta_x": c64(tt.x), "f_plus": c64(fp), "f_minus": c64(fm) });
    }

    let cube = cube_grid(grid, span);
    let mut found = None;
    for _ in 0..32 {
        let z0 = random_point(&mut rng, g);
        if clearance(p, &frame, &z0, &cube)? >= GRID_CLEARANCE {
            found = Some(z0);
            break;
        }
    }
    let z0 = found.ok_or_else(|| Error::Evaluation("no grid centre away from theta zeros".into()))?;
    let exact = kp_pde_residual(p, f, &z0, &cube, PdeMode::Exact)?;
    job.report
        .check(CheckResult::at_most("pde_exact_relative_residual", exact.max_residual / exact.max_term, tol));
    let coarse = kp_pde_residual(p, f, &z0, &cube, PdeMode::FiniteDifference { h })?;
    let fine = kp_pde_residual(p, f, &z0, &cube, PdeMode::FiniteDifference { h: h / 2.0 })?;
    let order = (coarse.max_residual / fine.max_residual).log2();
    job.report.check(CheckResult::at_least("pde_fd_order", order, 1.8));

    job.report.results = json!({
        "fit": fit,
        "divisor_point": pairs(&zd),
        "tangency": tangency,
        "grid_centre": pairs(&z0),
        "grid_clearance": GRID_CLEARANCE,
        "pde_exact": { "max_residual": exact.max_residual, "max_term": exact.max_term },
        "pde_fd": {
            "h": h,
            "max_residual": coarse.max_residual,
            "max_residual_half_step": fine.max_residual,
            "observed_order": order,
        },
    });
    let rows: Vec<Vec<f64>> = cube
        .iter()
        .enumerate()
        .map(|(i, [x, y, t])| vec![*x, *y, *t, exact.residuals[i], coarse.residuals[i], fine.residuals[i]])
        .collect();
    job.table = Some(Table::numeric(
        ["x", "y", "t", "exact", "fd_h", "fd_half_h"].map(String::from).to_vec(),
        &rows,
    ));
    Ok(())
}

/// Smallest `|theta| / scale` over the grid points.
fn clearance(p: &PeriodMatrix, frame: &KpFrame, z0: &[C64], grid: &[[f64; 3]]) -> Result<f64> {
    let mut least = f64::INFINITY;
    for &[x, y, t] in grid {
        let (value, scale) = theta_with_scale(&frame.point(z0, x, y, t), p, DEFAULT_ABS_TOL)?;
        least = least.min(value.norm() / scale);
    }
    Ok(least)
}

/// Root of theta on a line through a random base point, redrawing the line when
/// Newton fails.
fn seeded_divisor_point(p: &PeriodMatrix, rng: &mut ChaCha8Rng) -> Result<Vec<C64>> {
    let mut last = None;
    for _ in 0..16 {
        let base = random_point(rng, p.g());
        let dir = random_point(rng, p.g());
        match divisor_point(p, &base, &dir) {
            Ok(z) => return Ok(z),
            Err(e @ Error::RootNotFound { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Evaluation("no divisor point found".into())))
}

fn default_divisor_point(p: &PeriodMatrix, seed: u64) -> Result<Vec<C64>> {
    seeded_divisor_point(p, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[allow(clippy::too_many_arguments)]
fn translate_trace(
    job: &mut Job,
    source: &PeriodSource,
    seed: u64,
    tol: f64,
    start: Option<&str>,
    branch: i8,
    span: f64,
    step: f64,
    cap: f64,
) -> Result<()> {
    if branch != 1 && branch != -1 {
        return Err(Error::InvalidInput("--branch must be 1 or -1".into()));
    }
    let p = load_period(source, seed)?;
    if p.g() != 2 {
        return Err(Error::InvalidInput("translate-trace needs a genus-2 period matrix".into()));
    }
    let z0 = match start {
        Some(s) => vector_arg(Some(s), 2, "start")?,
        None => default_divisor_point(&p, seed)?,
    };
    let opts = TraceOptions {
        step,
        correction_cap: cap,
        ..TraceOptions::default()
    };
    job.report.tolerances.insert("tol".into(), tol);
    job.report.tolerances.insert("correction_cap".into(), cap);
    job.report.tolerances.insert("step".into(), step);
    job.report.conventions.insert("frame".into(), "tau[slot] = 1, sigma[slot] = 0, lambda = sigma[other]".into());
    job.report
        .conventions
        .insert("second_base_point".into(), "start + (1, 0) + Omega e_2 (lattice translate)".into());

    let trace = trace_theta_translation(&p, &z0, branch, span, &opts)?;
    let consistency = trace.frame_consistency();
    job.report.check(CheckResult::at_most("theta_relative_before_correction", trace.max_theta_rel(), tol));
    job.report.check(CheckResult::at_most("max_correction", trace.max_correction(), cap));
    job.report.check(CheckResult::at_most("frame_consistency", consistency, 1e-6 + step * step));

    let translate: Vec<C64> = (0..2).map(|i| z0[i] + if i == 0 { 1.0 } else { 0.0 } + p.entry(i, 1)).collect();
    let divisor = ThetaDivisor { period: p.clone() };
    let field = trace.frame_field();
    let chart = reconstruct(
        &divisor,
        &field,
        &[z0.clone(), translate],
        (trace.start_tau2, trace.start_tau2 + span),
        &ReconstructOptions {
            step,
            ..ReconstructOptions::default()
        },
    )?;
    let mut curves = chart.curves.clone();
    curves.push(trace.curve());
    let deviation = parallel_deviation(&curves);
    job.report.check(CheckResult::at_most("reconstruct_relative_residual", chart.max_residual, tol));
    job.report.check(CheckResult::at_most("parallel_deviation", deviation, tol));

    job.report.results = json!({
        "start": pairs(&z0),
        "branch": trace.branch,
        "start_tau2": c64(trace.start_tau2),
        "samples": trace.samples.len(),
        "max_theta_relative": trace.max_theta_rel(),
        "max_correction": trace.max_correction(),
        "frame_consistency": consistency,
        "reconstruct_residual": chart.max_residual,
        "parallel_deviation": deviation,
        "end": pairs(&trace.samples.last().map(|s| s.z.clone()).unwrap_or_default()),
    });
    job.table = Some(Table::numeric(trace.csv_header(), &trace.csv_rows()));
    Ok(())
}

fn surface_cubic(job: &mut Job, tol: f64, at: Option<&str>, span: f64, step: f64) -> Result<()> {
    let (t1, t2) = match at {
        Some(text) => match parse_vector(text)?.as_slice() {
            [a, b] => (*a, *b),
            _ => return Err(Error::InvalidInput("--at needs `t1,t2` for the cubic surface".into())),
        },
        None => (C64::new(0.3, 0.1), C64::new(0.2, -0.1)),
    };
    let surface = TranslationSurface::cubic();
    let curve = surface.curve();
    let z = surface.chart_point(t1, t2);
    let frame = frame_from_chart(&curve, t1)?;
    let check = verify_frame(&surface, &z, &frame, tol)?;
    job.report.tolerances.insert("frame_tol".into(), tol);
    job.report.tolerances.insert("reconstruct_tol".into(), 1e-7);
    job.report.conventions.insert("surface".into(), "z3 = z1^3 + (z2 - z1^2)^2".into());
    job.report.check(CheckResult::at_most("frame_residual_i", check.res_i, tol));
    job.report.check(CheckResult::at_most("frame_residual_ii", check.res_ii, tol));
    let rank = gauss_rank(&surface, &z, DEFAULT_RTOL)?;
    job.report.check(CheckResult::at_most("gauss_rank_defect", (2.0 - rank as f64).abs(), 0.0));

    let field = ChartFrameField::new(&curve, t1)?;
    let bases = vec![z.clone(), surface.chart_point(t1, t2 + C64::new(0.4, -0.2))];
    let chart = reconstruct(
        &surface,
        &field,
        &bases,
        (frame.tau2, frame.tau2 + span),
        &ReconstructOptions {
            step,
            ..ReconstructOptions::default()
        },
    )?;
    let alpha0 = curve.point(t1);
    let mut chart_gap: f64 = 0.0;
    for (tau2, zz) in chart.curves[0].tau2.iter().zip(&chart.curves[0].points) {
        let t = field.solve_parameter(*tau2)?;
        let alpha = curve.point(t);
        for i in 0..3 {
            chart_gap = chart_gap.max(((zz[i] - z[i]) - (alpha[i] - alpha0[i])).norm());
        }
    }
    job.report.check(CheckResult::at_most("reconstruct_residual", chart.max_residual, 1e-7));
    job.report.check(CheckResult::at_most("chart_deviation", chart_gap, 1e-7));
    job.report.check(CheckResult::at_most("parallel_deviation", chart.max_deviation, 1e-7));
    job.report.results = json!({
        "point": pairs(&z),
        "frame": frame,
        "check": check,
        "gauss_rank": rank,
        "reconstruct_residual": chart.max_residual,
        "chart_deviation": chart_gap,
        "parallel_deviation": chart.max_deviation,
    });
    let rows: Vec<Vec<f64>> = chart.curves[0]
        .tau2
        .iter()
        .zip(&chart.curves[0].points)
        .map(|(t, zz)| {
            let mut row = vec![t.re, t.im];
            row.extend(zz.iter().flat_map(|x| [x.re, x.im]));
            row
        })
        .collect();
    job.table = Some(Table::numeric(
        ["tau2_re", "tau2_im", "z_1_re", "z_1_im", "z_2_re", "z_2_im", "z_3_re", "z_3_im"]
            .map(String::from)
            .to_vec(),
        &rows,
    ));
    Ok(())
}

fn surface_theta(job: &mut Job, source: &PeriodSource, seed: u64, tol: f64, at: Option<&str>) -> Result<()> {
    let p = load_period(source, seed)?;
    if p.g() != 2 {
        return Err(Error::InvalidInput("the theta surface check needs a genus-2 period matrix".into()));
    }
    let z = match at {
        Some(s) => vector_arg(Some(s), 2, "--at")?,
        None => default_divisor_point(&p, seed)?,
    };
    let divisor = ThetaDivisor { period: p.clone() };
    job.report.tolerances.insert("frame_tol".into(), tol);
    let mut frames = Vec::new();
    for branch in [1i8, -1] {
        let t = tangent_flex(&p, &z, branch, None)?;
        let frame = TranslationFrame::from(&t);
        let check = verify_frame(&divisor, &z, &frame, tol)?;
        job.report.check(CheckResult::at_most(format!("frame_residual_i_branch_{branch}"), check.res_i, tol));
        job.report.check(CheckResult::at_most(format!("frame_residual_ii_branch_{branch}"), check.res_ii, tol));
        frames.push(json!({ "branch": branch, "frame": frame, "check": check }));
    }
    let rank = gauss_rank(&divisor, &z, DEFAULT_RTOL)?;
    job.report.check(CheckResult::at_most("gauss_rank_defect", (1.0 - rank as f64).abs(), 0.0));
    job.report.results = json!({ "point": pairs(&z), "frames": frames, "gauss_rank": rank });
    Ok(())
}

fn gen_example(
    job: &mut Job,
    kind: ExampleKind,
    seed: u64,
    genus: Option<usize>,
    min_lambda: Option<f64>,
) -> Result<()> {
    let doc = if genus.is_some() || min_lambda.is_some() {
        if kind != ExampleKind::RandomSiegel {
            return Err(Error::InvalidInput("--genus and --min-lambda apply to random-siegel only".into()));
        }
        let (g, c) = (genus.unwrap_or(3), min_lambda.unwrap_or(0.3));
        PeriodMatrixDocument::from_period(&random_siegel(g, c, seed)?)
            .with_label(kind.name())
            .with_provenance(format!("generated: kind={kind}, g={g}, c={c}, seed={seed}"))
    } else {
        generate_example(kind, seed)?
    };
    let p = doc.to_period()?;
    let g = p.g();
    let mut rows = Vec::new();
    for i in 0..g {
        for j in 0..g {
            rows.push(vec![i as f64, j as f64, p.entry(i, j).re, p.entry(i, j).im]);
        }
    }
    job.table = Some(Table::numeric(["i", "j", "re", "im"].map(String::from).to_vec(), &rows));
    job.report.results = json!({ "document": doc, "lambda_min": p.lambda_min() });
    job.document = Some(doc.to_json());
    Ok(())
}
