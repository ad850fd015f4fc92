use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{point, ExperimentConfig};
use super::report::*;
use super::Command;
use crate::commutant::{
    commutant_basis, extract_symbols, rebuild_from_symbols, star_commutant_basis, symbols_to_twist, twist_to_symbols,
    CommutantBasis,
};
use crate::error::{Error, Result};
use crate::geometry::{
    curvature_at, curvature_field, kernel, kernel_nullspace_check, restriction_curvatures_distinct,
    restriction_weights, richardson_ratio, spectrum_estimate, weights_align, Annulus, IndexedWeights,
};
use crate::lattice::{match_minimal_to_residues, reducing_lattice_from, verify_reducing, LatticeKind, ShiftPowerSetup};
use crate::linalg;
use crate::operators::self_commutator;
use crate::scalar::Complex;
use crate::spaces::{classify_weights, make_weights, LaurentSeries, SpaceKind, WeightSequence, Window};

/// Fourier round trip between symbols and twist coefficients, relative to the
/// largest coefficient.
const FOURIER_TOL: f64 = 1e-12;
/// Allowed deviation of the Richardson ratio from 4.
const RICHARDSON_TOL: f64 = 0.8;
/// Relative accuracy required of the disk control `K(0) = −4`.
const DISK_CONTROL_TOL: f64 = 0.04;
const DISK_CONTROL_HI: i64 = 400;
const ALIGN_CONTROL_TRIALS: usize = 20;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub emit_matrices: bool,
}

/// A finished run: the deterministic report plus its side files and the
/// wall-clock timings, which are kept out of the report.
#[derive(Clone, Debug)]
pub struct Run {
    pub report: Report,
    pub side_files: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    opts: RunOptions,
    setup: ShiftPowerSetup<f64>,
    checks: Vec<Check>,
    skipped: Vec<Skipped>,
    files: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn measure(&mut self, name: &str, value: f64, tol: f64, relation: Relation) -> Measured {
        let measured = Measured::new(value, tol, relation);
        self.checks.push(Check { name: name.into(), measured: measured.clone() });
        measured
    }

    fn file(&mut self, name: &str, contents: String) -> String {
        self.files.push((name.into(), contents));
        name.into()
    }

    fn weights_on(&self, window: Window) -> Result<WeightSequence<f64>> {
        match &self.config.space {
            SpaceKind::Custom { .. } => Ok(self.setup.weights.clone()),
            kind => make_weights(kind, window),
        }
    }

    /// The annulus the space lives on, or the estimated spectral annulus.
    fn domain(&self, w: &WeightSequence<f64>) -> Result<Annulus<f64>> {
        match self.config.space {
            SpaceKind::BergmanAnnulus { r } | SpaceKind::HardyAnnulus { r } => Ok(Annulus::unit(r)),
            _ => Ok(spectrum_estimate(w)?.annulus()),
        }
    }

    fn theorem_applies(&self) -> bool {
        matches!(self.config.space, SpaceKind::BergmanAnnulus { .. } | SpaceKind::HardyAnnulus { .. })
    }
}

/// Errors that mean "this analysis does not apply here" rather than a failed
/// verification.
fn inapplicable(e: &Error) -> bool {
    matches!(e, Error::Domain(_) | Error::WindowTooShort { .. } | Error::InsufficientOverlap { .. })
}

fn weights_csv(w: &WeightSequence<f64>) -> String {
    let mut out = String::from("m,beta,lambda\n");
    let lambdas = w.lambdas();
    for (i, (m, b)) in w.window().indices().zip(w.betas()).enumerate() {
        match lambdas.get(i) {
            Some(l) => writeln!(out, "{m},{b:e},{l:e}"),
            None => writeln!(out, "{m},{b:e},"),
        }
        .unwrap();
    }
    out
}

fn classify(ctx: &mut Ctx) -> Result<ClassifySection> {
    let w = ctx.setup.weights.clone();
    let spectrum = spectrum_estimate(&w)?;
    let radius_hint = ctx.config.space.radius_hint().unwrap_or(spectrum.inner_radius);
    let class = classify_weights(&w, radius_hint)?;
    let sc = self_commutator(&ctx.setup.shift)?;
    let d = sc.dim();
    let interior: Vec<f64> = (1..d - 1).map(|i| sc.matrix()[(i, i)].re).collect();
    let min = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let max = interior.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hyponormal =
        ctx.measure("classify.hyponormal_negative_part", (-min).max(0.0), ctx.config.tolerances.verify_tol, Relation::AtMost);
    let weights_csv = ctx.file("weights.csv", weights_csv(&w));
    Ok(ClassifySection {
        label: w.label().to_string(),
        radius_hint,
        class,
        spectrum,
        self_commutator_min: min,
        self_commutator_max: max,
        hyponormal,
        weights_csv,
    })
}

fn summarize(ctx: &mut Ctx, name: &str, basis: &CommutantBasis<f64>) -> CommutantSummary {
    let a = ctx.setup.power.matrix().clone();
    let mut residual = basis.max_residual(&a);
    if basis.star {
        let adj = a.adjoint();
        residual = residual.max(basis.elements.iter().map(|x| linalg::frobenius(&(x * &adj - &adj * x))).fold(0.0, f64::max));
    }
    CommutantSummary {
        dim: basis.dim(),
        gap_ratio: basis.gap_ratio,
        smallest_kept: basis.smallest_kept,
        largest_dropped: basis.singular_values.first().copied().unwrap_or(0.0),
        rank_tol: basis.rank_tolerance,
        ill_conditioned: basis.ill_conditioned,
        residual: ctx.measure(&format!("{name}.residual"), residual, ctx.config.tolerances.verify_tol, Relation::AtMost),
    }
}

fn max_abs_coeff(f: &LaurentSeries<f64>) -> f64 {
    f.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

fn lattice(ctx: &mut Ctx) -> Result<LatticeSection> {
    let tol = ctx.config.tolerances;
    let n = ctx.setup.n;
    let plain = commutant_basis(&ctx.setup.power, tol.rank_tol)?;
    let star = star_commutant_basis(&ctx.setup.power, tol.rank_tol)?;
    let commutant = summarize(ctx, "commutant", &plain);
    let star_commutant = summarize(ctx, "star_commutant", &star);

    let mut round_trip = 0.0f64;
    let mut fourier = 0.0f64;
    for x in &plain.elements {
        let symbols = extract_symbols(x, n, &ctx.setup.weights, tol.verify_tol)?;
        let rebuilt = rebuild_from_symbols(&symbols, &ctx.setup.weights)?;
        round_trip = round_trip.max(linalg::frobenius(&(x - rebuilt)));
        let scale = symbols.iter().map(max_abs_coeff).fold(1.0, f64::max);
        let back = twist_to_symbols(&symbols_to_twist(&symbols));
        for (f, g) in symbols.iter().zip(&back) {
            fourier = fourier.max(f.max_diff(g) / scale);
        }
    }
    let symbol_round_trip = ctx.measure("commutant.symbol_round_trip", round_trip, tol.verify_tol, Relation::AtMost);
    let twist_round_trip = ctx.measure("commutant.twist_round_trip", fourier, FOURIER_TOL, Relation::AtMost);

    let lat = reducing_lattice_from(&ctx.setup.power, &star, tol.rank_tol, ctx.seed)?;
    let mut members = Vec::with_capacity(lat.members.len());
    for m in &lat.members {
        let rep = verify_reducing(&m.projection, &ctx.setup.power, tol.verify_tol)?;
        let residual = ctx.measure(&format!("lattice.member_{}", m.bitmask), rep.worst(), tol.verify_tol, Relation::AtMost);
        members.push(MemberSummary { bitmask: m.bitmask, residual });
    }
    let mut projection_residual = None;
    let mut residue_matching = Vec::new();
    if lat.kind == LatticeKind::Discrete {
        projection_residual = Some(ctx.measure(
            "lattice.projection_residual",
            lat.diagnostics.projection_residual,
            tol.verify_tol,
            Relation::AtMost,
        ));
        if lat.minimal_projections.len() == n {
            for m in match_minimal_to_residues(&lat, n)? {
                let distance = ctx.measure(
                    &format!("lattice.residue_match_{}", m.projection),
                    m.distance,
                    tol.match_tol,
                    Relation::AtMost,
                );
                residue_matching.push(MatchSummary { projection: m.projection, residue: m.residue, distance });
            }
        }
    }
    if ctx.opts.emit_matrices {
        let shift = ctx.setup.shift.to_csv();
        ctx.file("matrices/shift.csv", shift);
        let power = ctx.setup.power.to_csv();
        ctx.file("matrices/power.csv", power);
        for (j, p) in lat.minimal_projections.iter().enumerate() {
            let op = crate::operators::TruncatedOperator::from_matrix(
                p.clone(),
                lat.window,
                crate::operators::BasisMode::Orthonormal,
            )?;
            ctx.file(&format!("matrices/minimal_{j}.csv"), op.to_csv());
        }
    }
    Ok(LatticeSection {
        n,
        commutant,
        star_commutant,
        kind: lat.kind,
        member_count: lat.members.len(),
        members,
        algebra_dims: lat.algebra_dims,
        projection_residual,
        residue_matching,
        clustering_attempts: lat.diagnostics.attempts,
        symbol_round_trip,
        twist_round_trip,
    })
}

fn equivalence(ctx: &mut Ctx) -> Result<EquivalenceSection> {
    let n = ctx.setup.n;
    let align_tol = ctx.config.tolerances.align_tol;
    let subs = (0..n).map(|i| restriction_weights(&ctx.setup.weights, n, i)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(PairAlignment { i, j, shift: weights_align(&subs[i], &subs[j], align_tol)? });
        }
    }
    let pairwise_inequivalent = pairs.iter().all(|p| p.shift.is_none());

    // positive control on random sequences, independent of the space
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x5eed_a11e);
    let mut control = Vec::with_capacity(ALIGN_CONTROL_TRIALS);
    for _ in 0..ALIGN_CONTROL_TRIALS {
        let len = rng.random_range(16..40);
        let v = IndexedWeights::new(rng.random_range(-10..10), (0..len).map(|_| rng.random_range(0.1..2.0)).collect());
        let k: i64 = rng.random_range(-5..=5);
        control.push(ShiftRecovery { applied: k, recovered: weights_align(&v, &v.shifted(k), align_tol)? });
    }
    let failures = control.iter().filter(|c| c.recovered != Some(c.applied)).count();
    let control_failures = ctx.measure("equivalence.control_failures", failures as f64, 0.0, Relation::AtMost);
    if ctx.theorem_applies() && n > 1 {
        ctx.measure(
            "equivalence.aligned_pairs",
            pairs.iter().filter(|p| p.shift.is_some()).count() as f64,
            0.0,
            Relation::AtMost,
        );
    }
    Ok(EquivalenceSection { n, align_tol, pairs, pairwise_inequivalent, control, control_failures })
}

/// Test functions for the reproducing property.
fn probe_series() -> Vec<LaurentSeries<f64>> {
    let c = |re, im| Complex::new(re, im);
    let mut out: Vec<_> = (-3..=3).map(|j| LaurentSeries::monomial(j, c(1.0, 0.0))).collect();
    out.push(LaurentSeries::from_pairs([(0, c(1.0, 0.0)), (1, c(2.0, 0.0)), (-1, c(-0.5, 0.0))]));
    out.push(LaurentSeries::from_pairs([(2, c(0.0, 1.0)), (-2, c(0.25, -0.5)), (3, c(1.5, 0.0))]));
    out
}

fn kernel_section(ctx: &mut Ctx) -> Result<KernelSection> {
    let tol = ctx.config.tolerances;
    let window = ctx.config.kernel_window()?;
    let w = ctx.weights_on(window)?;
    let spectrum = spectrum_estimate(&w)?;
    let pts: Vec<[f64; 2]> = if ctx.config.kernel.points.is_empty() {
        let (a, b) = (spectrum.inner_radius, spectrum.outer_radius);
        [(0.3, 0.0), (0.5, std::f64::consts::FRAC_PI_3), (0.7, -std::f64::consts::FRAC_PI_4)]
            .iter()
            .map(|&(t, theta)| {
                let rho = a + (b - a) * t;
                [rho * f64::cos(theta), rho * f64::sin(theta)]
            })
            .collect()
    } else {
        ctx.config.kernel.points.clone()
    };
    let probes = probe_series();
    let mut points = Vec::with_capacity(pts.len());
    for (idx, p) in pts.iter().enumerate() {
        let omega = point(*p);
        let k = match kernel(&w, omega) {
            Ok(k) => k,
            Err(e) if inapplicable(&e) => {
                points.push(KernelPoint { omega: *p, admissible: false, tail_ratio: None, reproducing: None, nullspace: None });
                continue;
            }
            Err(e) => return Err(e),
        };
        let worst = probes
            .iter()
            .map(|f| {
                let want = f.eval(omega);
                (k.pair(f, &w) - want).norm() / want.norm().max(1.0)
            })
            .fold(0.0, f64::max);
        let reproducing = ctx.measure(&format!("kernel.reproducing_{idx}"), worst, tol.kernel_tol, Relation::AtMost);
        let ns = kernel_nullspace_check(&w, ctx.setup.n, omega, tol.nullspace_tol)?;
        let nullspace =
            ctx.measure(&format!("kernel.nullspace_{idx}"), ns.max_residual, tol.nullspace_tol, Relation::AtMost);
        points.push(KernelPoint {
            omega: *p,
            admissible: true,
            tail_ratio: Some(k.tail_ratio),
            reproducing: Some(reproducing),
            nullspace: Some(nullspace),
        });
    }
    if points.iter().all(|p| !p.admissible) {
        ctx.skipped.push(Skipped { section: "kernel".into(), reason: "no sample point inside the spectral annulus".into() });
    }
    Ok(KernelSection { window: [window.lo, window.hi], spectrum, margin: 0.02, points })
}

fn curvature_section(ctx: &mut Ctx) -> Result<CurvatureSection> {
    let g = ctx.config.grid.clone();
    let window = ctx.config.grid_window()?;
    let w = ctx.weights_on(window)?;
    let domain = ctx.domain(&w)?;
    let grid = g.spec(domain);
    let field = curvature_field(&w, domain, &grid, g.h)?;
    let max_value = ctx.measure("curvature.max_value", field.max_value(), 0.0, Relation::Below);

    let mid = 0.5 * (grid.inner_radius + grid.outer_radius);
    let rp = g.richardson_point.unwrap_or([mid * 0.3f64.cos(), mid * 0.3f64.sin()]);
    let ratio = richardson_ratio(&w, point(rp), g.h)?;
    let richardson_ratio =
        ctx.measure("curvature.richardson_ratio", ratio, RICHARDSON_TOL, Relation::Near { target: 4.0 });

    let disk = make_weights(&SpaceKind::Flat, Window::new(0, DISK_CONTROL_HI)?)?;
    let k0 = curvature_at(&disk, Complex::new(0.0, 0.0), g.h)?;
    let disk_control = ctx.measure("curvature.disk_control", k0, DISK_CONTROL_TOL, Relation::Near { target: -4.0 });

    let n = ctx.setup.n;
    let restrictions = if n >= 2 {
        let pts: Vec<Complex<f64>> = if g.restriction_points.is_empty() {
            let (a, b) = (domain.inner.powi(n as i32), domain.outer.powi(n as i32));
            (1..=6).map(|j| Complex::new(a + (b - a) * j as f64 / 7.0, 0.0)).collect()
        } else {
            g.restriction_points.iter().map(|&p| point(p)).collect()
        };
        let rep = restriction_curvatures_distinct(&w, n, &pts, g.restriction_h)?;
        if ctx.theorem_applies() {
            let best = rep
                .samples
                .iter()
                .filter(|s| s.in_domain)
                .map(|s| if s.threshold > 0.0 { s.min_gap / s.threshold } else { f64::MAX })
                .fold(0.0, f64::max);
            ctx.measure("curvature.restriction_separation", best, 1.0, Relation::AtLeast);
        }
        Some(RestrictionSummary { n, h: g.restriction_h, separated: rep.passed, samples: rep.samples })
    } else {
        None
    };
    let field_csv = ctx.file("curvature.csv", field.to_csv());
    Ok(CurvatureSection {
        window: [window.lo, window.hi],
        domain,
        grid,
        h: g.h,
        max_value,
        richardson_point: rp,
        richardson_ratio,
        disk_control,
        restrictions,
        field_csv,
    })
}

/// Runs `section`, recording inapplicable analyses as skipped and any other
/// error as a failed check.
fn guarded<S>(
    ctx: &mut Ctx,
    timings: &mut Vec<(String, f64)>,
    name: &str,
    section: impl FnOnce(&mut Ctx) -> Result<S>,
) -> Option<S> {
    let start = Instant::now();
    let out = match section(ctx) {
        Ok(s) => Some(s),
        Err(e) => {
            ctx.skipped.push(Skipped { section: name.into(), reason: e.to_string() });
            if !inapplicable(&e) {
                ctx.measure(&format!("{name}.completed"), f64::NAN, 0.0, Relation::AtMost);
            }
            None
        }
    };
    timings.push((name.into(), start.elapsed().as_secs_f64()));
    out
}

pub fn run(command: Command, config: &ExperimentConfig, seed: Option<u64>, opts: RunOptions) -> Result<Run> {
    config.validate()?;
    let seed = seed.unwrap_or(config.seed);
    let requested = config.main_window()?;
    let start = Instant::now();
    let setup = ShiftPowerSetup::new(&config.space, requested, config.n)
        .map_err(|e| Error::Config(format!("cannot build the operator: {e}")))?;
    let effective = setup.window();
    let mut ctx = Ctx {
        config,
        seed,
        opts,
        setup,
        checks: Vec::new(),
        skipped: Vec::new(),
        files: Vec::new(),
    };
    let mut timings = vec![("setup".to_string(), start.elapsed().as_secs_f64())];
    let all = command == Command::All;
    let classification =
        (all || command == Command::Classify).then(|| guarded(&mut ctx, &mut timings, "classify", classify)).flatten();
    let lattice =
        (all || command == Command::Lattice).then(|| guarded(&mut ctx, &mut timings, "lattice", lattice)).flatten();
    let equivalence = (all || command == Command::Equivalence)
        .then(|| guarded(&mut ctx, &mut timings, "equivalence", equivalence))
        .flatten();
    let kernel =
        (all || command == Command::Kernel).then(|| guarded(&mut ctx, &mut timings, "kernel", kernel_section)).flatten();
    let curvature = (all || command == Command::Curvature)
        .then(|| guarded(&mut ctx, &mut timings, "curvature", curvature_section))
        .flatten();

    let mut side_files: Vec<String> = ctx.files.iter().map(|(n, _)| n.clone()).collect();
    side_files.push(super::TIMINGS_FILE.into());
    side_files.sort();
    let passed = ctx.checks.iter().all(|c| c.measured.passed);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: command.name().into(),
        seed,
        config: config.clone(),
        window: WindowEcho { requested: [requested.lo, requested.hi], effective: [effective.lo, effective.hi] },
        classification,
        lattice,
        equivalence,
        kernel,
        curvature,
        skipped: ctx.skipped,
        checks: ctx.checks,
        side_files,
        passed,
    };
    Ok(Run { report, side_files: ctx.files, timings })
}

pub fn run_lattice(config: &ExperimentConfig) -> Result<Run> {
    run(Command::Lattice, config, None, RunOptions::default())
}

pub fn run_classify(config: &ExperimentConfig) -> Result<Run> {
    run(Command::Classify, config, None, RunOptions::default())
}

pub fn run_equivalence(config: &ExperimentConfig) -> Result<Run> {
    run(Command::Equivalence, config, None, RunOptions::default())
}

pub fn run_kernel(config: &ExperimentConfig) -> Result<Run> {
    run(Command::Kernel, config, None, RunOptions::default())
}

pub fn run_curvature(config: &ExperimentConfig) -> Result<Run> {
    run(Command::Curvature, config, None, RunOptions::default())
}

pub fn run_all(config: &ExperimentConfig) -> Result<Run> {
    run(Command::All, config, None, RunOptions::default())
}
