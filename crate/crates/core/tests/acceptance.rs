//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftlab::cli::{run_all, run_equivalence, run_lattice, write_run, ExperimentConfig, Report};
use shiftlab::geometry::{
    curvature_at, curvature_field, kernel, kernel_nullspace_check, log_kernel_norm_sq, restriction_curvatures_distinct,
    richardson_ratio, spectrum_estimate, weights_align, GridSpec, IndexedWeights,
};
use shiftlab::lattice::ShiftPowerSetup;
use shiftlab::linalg;
use shiftlab::operators::self_commutator;
use shiftlab::spaces::make_weights;
use shiftlab::{Annulus, CMatrix64, Complex, LatticeKind, LaurentSeries64, SpaceKind64, Window};

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn lattice_cases(hardy: bool) -> Vec<(SpaceKind64, usize)> {
    let mut out = Vec::new();
    for r in [0.3, 0.5, 0.7] {
        for n in [2usize, 3, 4] {
            let kind = if hardy { SpaceKind64::HardyAnnulus { r } } else { SpaceKind64::BergmanAnnulus { r } };
            out.push((kind, n));
        }
    }
    out
}

fn config(kind: SpaceKind64, n: usize, half: i64) -> ExperimentConfig {
    ExperimentConfig::new(kind, n, Window::symmetric(half))
}

struct LatticeRun {
    kind: SpaceKind64,
    n: usize,
    report: Report,
    seconds: f64,
}

fn run_lattice_cases(hardy: bool) -> Vec<LatticeRun> {
    lattice_cases(hardy)
        .into_iter()
        .map(|(kind, n)| {
            let start = Instant::now();
            let report = run_lattice(&config(kind.clone(), n, 8 * n as i64)).expect("lattice run").report;
            LatticeRun { kind, n, report, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

fn lattice_criterion(runs: &[LatticeRun]) -> Outcome {
    let mut min_gap = f64::INFINITY;
    let mut max_residual = 0.0f64;
    let mut slowest = 0.0f64;
    let mut failures = Vec::new();
    for run in runs {
        let Some(lat) = run.report.lattice.as_ref() else {
            failures.push(format!("{} n={}: no lattice section", run.kind.label(), run.n));
            continue;
        };
        let residual = lat.members.iter().filter_map(|m| m.residual.value).fold(0.0, f64::max);
        let all_members = lat.members.iter().all(|m| m.residual.passed && m.residual.tol <= 1e-8);
        min_gap = min_gap.min(lat.star_commutant.gap_ratio);
        max_residual = max_residual.max(residual);
        slowest = slowest.max(run.seconds);
        let ok = lat.kind == LatticeKind::Discrete
            && lat.member_count == 1 << run.n
            && all_members
            && lat.star_commutant.gap_ratio >= 1e4
            && run.seconds <= 60.0;
        if !ok {
            failures.push(format!(
                "{} n={}: kind {:?}, {} members, gap {:.2e}, residual {:.2e}",
                run.kind.label(),
                run.n,
                lat.kind,
                lat.member_count,
                lat.star_commutant.gap_ratio,
                residual
            ));
        }
    }
    let summary = format!(
        "{} cases, min gap ratio {:.2e}, max member residual {:.2e}, slowest {:.2} s",
        runs.len(),
        min_gap,
        max_residual,
        slowest
    );
    if failures.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary}; {}", failures.join("; ")))
    }
}

fn matching_criterion(runs: &[&LatticeRun]) -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for run in runs {
        let lat = run.report.lattice.as_ref().unwrap();
        let mut residues: Vec<usize> = lat.residue_matching.iter().map(|m| m.residue).collect();
        residues.sort();
        let perfect = residues == (0..run.n).collect::<Vec<_>>();
        let dist = lat.residue_matching.iter().map(|m| m.distance.value.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        worst = worst.max(dist);
        if !perfect || dist >= 1e-6 {
            failures.push(format!("{} n={}: residues {residues:?}, distance {dist:.2e}", run.kind.label(), run.n));
        }
    }
    let summary = format!("{} cases, max Frobenius distance {worst:.2e}", runs.len());
    outcome(failures.is_empty(), if failures.is_empty() { summary } else { format!("{summary}; {}", failures.join("; ")) })
}

fn inequivalence_criterion() -> Outcome {
    let mut failures = Vec::new();
    let mut cases = 0;
    for hardy in [false, true] {
        for (kind, n) in lattice_cases(hardy) {
            let mut c = config(kind.clone(), n, 8 * n as i64);
            c.tolerances.align_tol = 1e-6;
            let report = run_equivalence(&c).expect("equivalence run").report;
            let eq = report.equivalence.as_ref().unwrap();
            cases += 1;
            if !eq.pairwise_inequivalent || eq.pairs.len() != n * (n - 1) / 2 {
                failures.push(format!("{} n={n}: {:?}", kind.label(), eq.pairs));
            }
        }
    }
    // positive control: a random sequence against a shifted copy of itself
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut recovered = 0;
    for _ in 0..20 {
        let v = IndexedWeights::new(0, (0..24).map(|_| rng.random_range(0.1..2.0)).collect());
        let k: i64 = rng.random_range(-5..=5);
        if weights_align(&v, &v.shifted(k), 1e-6).unwrap() == Some(k) {
            recovered += 1;
        }
    }
    if recovered != 20 {
        failures.push(format!("control recovered {recovered}/20 shifts"));
    }
    let summary = format!("{cases} cases pairwise inequivalent at 1e-6, control {recovered}/20");
    outcome(failures.is_empty(), if failures.is_empty() { summary } else { format!("{summary}; {}", failures.join("; ")) })
}

/// Dimension of the *-commutant from the full Kronecker system
/// `[I⊗A − Aᵀ⊗I; I⊗A* − conj(A)⊗I] vec X = 0`.
fn brute_force_star_dim(a: &CMatrix64) -> usize {
    let d = a.nrows();
    let id = CMatrix64::identity(d, d);
    let adj = a.adjoint();
    let top = id.kronecker(a) - a.transpose().kronecker(&id);
    let bottom = id.kronecker(&adj) - adj.transpose().kronecker(&id);
    let mut m = CMatrix64::zeros(2 * d * d, d * d);
    m.view_mut((0, 0), (d * d, d * d)).copy_from(&top);
    m.view_mut((d * d, 0), (d * d, d * d)).copy_from(&bottom);
    let s = m.svd(false, false).singular_values;
    let smax = s.max();
    let numerically_zero = s.iter().filter(|&&v| v <= 1e-10 * smax).count();
    // the SVD of a tall matrix returns d² values
    numerically_zero
}

fn degenerate_criterion() -> Outcome {
    let flat = run_lattice(&config(SpaceKind64::Flat, 2, 16)).expect("flat run").report;
    let alt = run_lattice(&config(SpaceKind64::Alternating { a: 0.5, b: 2.0 }, 2, 16)).expect("alternating run").report;
    let fl = flat.lattice.as_ref().unwrap();
    let al = alt.lattice.as_ref().unwrap();
    let small = |kind: SpaceKind64| {
        let s = ShiftPowerSetup::new(&kind, Window::symmetric(6), 2).unwrap();
        brute_force_star_dim(s.power.matrix())
    };
    let flat_bf = small(SpaceKind64::Flat);
    let alt_bf = small(SpaceKind64::Alternating { a: 0.5, b: 2.0 });
    let ok = fl.star_commutant.dim == 4
        && fl.kind == LatticeKind::Continuum
        && al.kind == LatticeKind::Continuum
        && al.star_commutant.dim == 4
        && flat_bf == 4
        && alt_bf == 4
        && flat.passed
        && alt.passed;
    outcome(
        ok,
        format!(
            "flat: dim {} {:?} blocks {:?}; alternating: dim {} {:?}; brute force on [-6,6]: flat {flat_bf}, alternating {alt_bf}",
            fl.star_commutant.dim, fl.kind, fl.algebra_dims, al.star_commutant.dim, al.kind
        ),
    )
}

fn round_trip_criterion() -> Outcome {
    let report = run_lattice(&config(SpaceKind64::BergmanAnnulus { r: 0.5 }, 2, 16)).expect("lattice run").report;
    let lat = report.lattice.as_ref().unwrap();
    let rt = lat.symbol_round_trip.value.unwrap_or(f64::INFINITY);
    let tw = lat.twist_round_trip.value.unwrap_or(f64::INFINITY);
    outcome(
        rt <= 1e-8 && tw <= 1e-12,
        format!("{} commutant elements, rebuild residual {rt:.2e}, Fourier round trip {tw:.2e}", lat.commutant.dim),
    )
}

fn kernel_criterion() -> Outcome {
    let w = make_weights(&SpaceKind64::BergmanAnnulus { r: 0.5 }, Window::symmetric(64)).unwrap();
    let spec = spectrum_estimate(&w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let polys: Vec<LaurentSeries64> = (0..20)
        .map(|_| {
            let terms = rng.random_range(1..6);
            LaurentSeries64::from_pairs(
                (0..terms)
                    .map(|_| {
                        (rng.random_range(-6..=6), Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    })
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let points: Vec<Complex<f64>> = (0..10)
        .map(|j| {
            let t = (j as f64 + 0.5) / 10.0;
            let rho = spec.inner_radius * 1.03 + (spec.outer_radius * 0.97 - spec.inner_radius * 1.03) * t;
            Complex::from_polar(rho, 2.4 * j as f64)
        })
        .collect();
    let mut worst = 0.0f64;
    for &omega in &points {
        let k = kernel(&w, omega).expect("admissible point");
        for f in &polys {
            let want = f.eval(omega);
            worst = worst.max((k.pair(f, &w) - want).norm() / want.norm().max(1.0));
        }
    }
    let lambdas = [
        Complex::new(0.6, 0.0),
        Complex::from_polar(0.7, std::f64::consts::FRAC_PI_3),
        Complex::new(0.8, 0.0),
    ];
    let mut ns = 0.0f64;
    for lam in lambdas {
        ns = ns.max(kernel_nullspace_check(&w, 2, lam, 1e-4).unwrap().max_residual);
    }
    outcome(
        worst <= 1e-6 && ns < 1e-4,
        format!("reproducing error {worst:.2e} over 20 x 10, null-space residual {ns:.2e}"),
    )
}

fn interior_eigenvalues(kind: &SpaceKind64, half: i64) -> Vec<f64> {
    let w = make_weights(kind, Window::symmetric(half)).unwrap();
    let t = shiftlab::operators::shift_matrix(&w).unwrap();
    let sc = self_commutator(&t).unwrap();
    let d = sc.dim();
    let interior: CMatrix64 = sc.matrix().view((1, 1), (d - 2, d - 2)).into_owned();
    linalg::hermitian_eigen(&interior).unwrap().0
}

fn hyponormality_criterion() -> Outcome {
    let mut min_pos = f64::INFINITY;
    let mut detail = Vec::new();
    for r in [0.3, 0.5, 0.7] {
        for (kind, half) in [(SpaceKind64::BergmanAnnulus { r }, 64), (SpaceKind64::HardyAnnulus { r }, 8)] {
            let m = interior_eigenvalues(&kind, half).into_iter().fold(f64::INFINITY, f64::min);
            if m <= 1e-12 {
                detail.push(format!("{} min {m:.2e}", kind.label()));
            }
            min_pos = min_pos.min(m);
        }
    }
    let flat = interior_eigenvalues(&SpaceKind64::Flat, 64).into_iter().map(f64::abs).fold(0.0, f64::max);
    let ok = detail.is_empty() && flat <= 1e-12;
    outcome(ok, format!("Bergman/Hardy min interior eigenvalue {min_pos:.2e}, flat max |eigenvalue| {flat:.2e} {}", detail.join("; ")))
}

fn spectrum_criterion() -> Outcome {
    let w = make_weights(&SpaceKind64::BergmanAnnulus { r: 0.5 }, Window::symmetric(128)).unwrap();
    let s = spectrum_estimate(&w).unwrap();
    outcome(
        (s.inner_radius - 0.5).abs() <= 0.02 && (s.outer_radius - 1.0).abs() <= 0.02,
        format!("inner {:.4}, outer {:.4}", s.inner_radius, s.outer_radius),
    )
}

fn curvature_criterion() -> Outcome {
    let h = 1e-2;
    let disk = make_weights(&SpaceKind64::Flat, Window::new(0, 400).unwrap()).unwrap();
    let k0 = curvature_at(&disk, Complex::new(0.0, 0.0), h).unwrap();
    // closed form of the disk kernel: log ‖k_ω‖² = −log(1 − |ω|²)
    let oracle = [0.1, 0.3, 0.5]
        .iter()
        .map(|&rho: &f64| (log_kernel_norm_sq(&disk, Complex::new(rho, 0.0)).unwrap() + (1.0 - rho * rho).ln()).abs())
        .fold(0.0, f64::max);
    let disk_ok = (k0 + 4.0).abs() <= 0.04 && oracle < 1e-12;

    let w = make_weights(&SpaceKind64::BergmanAnnulus { r: 0.5 }, Window::symmetric(64)).unwrap();
    let grid = GridSpec { inner_radius: 0.55, outer_radius: 0.95, radial: 9, angular: 12 };
    let field = curvature_field(&w, Annulus::unit(0.5), &grid, h).unwrap();
    let kmax = field.max_value();

    let wide = make_weights(&SpaceKind64::BergmanAnnulus { r: 0.5 }, Window::symmetric(128)).unwrap();
    let samples: Vec<Complex<f64>> = (1..=6).map(|j| Complex::new(0.25 + 0.75 * j as f64 / 7.0, 0.0)).collect();
    let rep = restriction_curvatures_distinct(&wide, 2, &samples, 2.5e-4).unwrap();
    let best = rep
        .samples
        .iter()
        .filter(|s| s.separated)
        .map(|s| s.min_gap / s.threshold)
        .fold(0.0, f64::max);

    let ratio = richardson_ratio(&w, Complex::new(0.7, 0.1), 4e-2).unwrap();
    let ok = disk_ok && kmax < 0.0 && rep.passed && (ratio - 4.0).abs() <= 0.8;
    outcome(
        ok,
        format!(
            "K(0) = {k0:.4}, closed-form gap {oracle:.1e}; grid max K {kmax:.2}; restriction gap/threshold {best:.1}; Richardson {ratio:.3}"
        ),
    )
}

fn determinism_criterion() -> Outcome {
    let mut c = config(SpaceKind64::BergmanAnnulus { r: 0.5 }, 2, 16);
    c.seed = 11;
    c.kernel.window = Some([-64, 64]);
    let a = run_all(&c).expect("first run");
    let b = run_all(&c).expect("second run");
    let da = tempfile::tempdir().unwrap();
    let db = tempfile::tempdir().unwrap();
    write_run(&a, da.path()).unwrap();
    write_run(&b, db.path()).unwrap();
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("report.json")).unwrap();
    let same = read(&da) == read(&db);
    let side_same = a.side_files == b.side_files;
    let reparsed = Report::from_json(&a.report.to_json()).map(|r| r.to_json() == a.report.to_json()).unwrap_or(false);
    outcome(
        same && side_same && reparsed,
        format!("{} bytes, side files identical: {side_same}, schema round trip: {reparsed}", read(&da).len()),
    )
}

fn main() -> ExitCode {
    let bergman = run_lattice_cases(false);
    let hardy = run_lattice_cases(true);

    let criteria: Vec<(&str, Criterion)> = vec![
        ("2^n lattice, Bergman", Box::new(|| lattice_criterion(&bergman))),
        ("2^n lattice, Hardy", Box::new(|| lattice_criterion(&hardy))),
        ("minimal subspaces are residue classes", Box::new(|| {
            let both: Vec<&LatticeRun> = bergman.iter().chain(&hardy).collect();
            matching_criterion(&both)
        })),
        ("restrictions pairwise inequivalent", Box::new(inequivalence_criterion)),
        ("degenerate weights give a continuum", Box::new(degenerate_criterion)),
        ("commutant symbol round trip", Box::new(round_trip_criterion)),
        ("kernel reproducing and null-space checks", Box::new(kernel_criterion)),
        ("hyponormality", Box::new(hyponormality_criterion)),
        ("spectral annulus estimate", Box::new(spectrum_criterion)),
        ("curvature", Box::new(curvature_criterion)),
        ("determinism", Box::new(determinism_criterion)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        if !out.passed {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if out.passed { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
