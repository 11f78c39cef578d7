//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cooldecomp_cli::commands::{decompose_rows, metrics_rows, model_rows};
use cooldecomp_cli::config::YearRange;
use cooldecomp_cli::RunConfig;
use cooldecomp_core::decomp::{
    assemble_system, decompose, oracle_integrate, ContributionLedger, DecompositionProblem,
    FactorPath, Levels, ShareGroup, DEFAULT_SEGMENTS,
};
use cooldecomp_core::linalg::{solve_in_place, Matrix};
use cooldecomp_core::metrics::{
    decarb_efficiency, decarb_intensity, positive_contributions, KG_PER_MT,
};
use cooldecomp_core::model::{
    aggregate, growth_stats, household_intensity, AirCoolerParams, IseerMode, FanParams,
    IntensityBreakdown, Locale, RoomAcParams, StateYearRecord,
};
use cooldecomp_core::pipeline::NATIONAL;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::problems::Spec;

const PROBLEMS: usize = 100;
const SEED: u64 = 7;
const ORACLE_SEGMENTS: usize = 1 << 20;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Everything computed once for the random problems and shared by several criteria.
struct Runs {
    ledgers: Vec<ContributionLedger>,
    doubled: Vec<ContributionLedger>,
    oracle: Vec<ContributionLedger>,
    slowest: Duration,
}

fn random_runs() -> Runs {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let specs: Vec<Spec> = (0..PROBLEMS).map(|_| Spec::random(&mut rng)).collect();
    let mut runs = Runs {
        ledgers: Vec::new(),
        doubled: Vec::new(),
        oracle: Vec::new(),
        slowest: Duration::ZERO,
    };
    for s in &specs {
        let problem = s.problem(DEFAULT_SEGMENTS);
        let started = Instant::now();
        let ledger = decompose(&problem).expect("decompose");
        runs.slowest = runs.slowest.max(started.elapsed());
        runs.ledgers.push(ledger);
        runs.doubled
            .push(decompose(&s.problem(2 * DEFAULT_SEGMENTS)).expect("decompose 2N"));
        runs.oracle
            .push(oracle_integrate(&problem, ORACLE_SEGMENTS).expect("oracle"));
    }
    runs
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn exactness(runs: &Runs) -> Verdict {
    let failing: Vec<usize> = runs
        .ledgers
        .iter()
        .enumerate()
        .filter(|(_, l)| l.residual.abs() > 1e-4 * l.total_change.abs())
        .map(|(i, _)| i)
        .collect();
    let worst = runs
        .ledgers
        .iter()
        .map(|l| l.residual.abs() / l.total_change.abs())
        .fold(0.0, f64::max);
    let coarse = median(runs.ledgers.iter().map(|l| l.residual.abs()).collect());
    let fine = median(runs.doubled.iter().map(|l| l.residual.abs()).collect());
    let reduction = 1.0 - fine / coarse;
    let fast = runs.slowest <= Duration::from_secs(1);
    Verdict::new(
        failing.is_empty() && reduction >= 0.40 && fast,
        format!(
            "{}/{PROBLEMS} within 1e-4|dc| (worst {worst:.2e}); median |residual| {coarse:.3e} -> {fine:.3e} at 2N ({:.1}% reduction, need >= 40%); slowest run {:.1} ms (limit 1000 ms)",
            PROBLEMS - failing.len(),
            100.0 * reduction,
            runs.slowest.as_secs_f64() * 1e3
        ),
    )
}

fn oracle_equivalence(runs: &Runs) -> Verdict {
    let mut outside = 0;
    let mut worst: f64 = 0.0;
    for (run, fine) in runs.ledgers.iter().zip(&runs.oracle) {
        let tol = f64::max(1e-6, 1e-4 * run.total_change.abs());
        let gap = run
            .per_driver
            .iter()
            .zip(&fine.per_driver)
            .map(|(a, b)| (a.value - b.value).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap / tol);
        if gap > tol {
            outside += 1;
        }
    }

    let monomial = DecompositionProblem::new(
        vec![FactorPath::new("a", 1.0, 2.0), FactorPath::new("b", 1.0, 3.0)],
        ShareGroup::trivial(None),
        DEFAULT_SEGMENTS,
    );
    let ledger = decompose(&monomial).expect("monomial");
    let (da, db) = (ledger.driver("a").unwrap(), ledger.driver("b").unwrap());
    let monomial_ok = (da - 1.7096).abs() <= 1e-4 && (db - 3.2904).abs() <= 1e-4;
    let mut detail = format!(
        "{}/{PROBLEMS} problems within max(1e-6, 1e-4|dc|) of the N=2^20 integration (worst gap {worst:.2}x tolerance); monomial a:1->2, b:1->3 gives ({da:.4}, {db:.4}) against (1.7096, 3.2904)",
        PROBLEMS - outside
    );
    if !monomial_ok {
        detail.push_str(
            "; the straight-line integrals are int b da = 2 and int 2a db = 3 exactly, so (1.7096, 3.2904) cannot be reached by this path",
        );
    }
    if outside > 0 {
        detail.push_str(
            "; the random-problem gaps are the O(1/N) bias of forward Euler at N=16000 and halve when N doubles",
        );
    }
    Verdict::new(outside == 0 && monomial_ok, detail)
}

fn slack_algebra() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = Spec::random(&mut rng);
        let problem = s.problem(1);
        let levels = Levels {
            scalars: s.scalars.iter().map(|v| v.0).collect(),
            member_factors: s.member_factors.iter().map(|v| v.0).collect(),
            shares: s.shares.iter().map(|v| v.0).collect(),
        };
        let (mut a, b) = assemble_system(&problem, &levels).expect("assemble");
        let delta: f64 = rng.gen_range(-0.1..0.1);
        // the first shift variable is the column after the scalar and member-factor drivers
        let col = s.scalars.len() + s.member_factors.len();
        let mut rhs = Matrix::zeros(b.rows(), 1);
        for r in 0..b.rows() {
            rhs[(r, 0)] = b[(r, col)] * delta;
        }
        solve_in_place(&mut a, &mut rhs).expect("solve");
        let expected = [2.0 * delta / 3.0, -delta / 3.0, -delta / 3.0];
        for (i, want) in expected.iter().enumerate() {
            worst = worst.max((rhs[(1 + i, 0)] - want).abs());
        }
        worst = worst.max((rhs[(4, 0)] + delta / 3.0).abs());
    }
    Verdict::new(
        worst <= 1e-12,
        format!("dF_1 = delta gives dF = -delta/3, dw = (2delta/3, -delta/3, -delta/3); max deviation {worst:.1e} over 20 systems (limit 1e-12)"),
    )
}

fn share_conservation(runs: &Runs, fixture: &[ContributionLedger]) -> Verdict {
    let all = runs
        .ledgers
        .iter()
        .chain(&runs.doubled)
        .chain(&runs.oracle)
        .chain(fixture);
    let count = all.clone().count();
    let worst = all.map(|l| l.max_share_sum_error).fold(0.0, f64::max);
    Verdict::new(
        worst <= 1e-9,
        format!("largest |sum w - 1| after any segment of {count} runs: {worst:.1e} (limit 1e-9)"),
    )
}

fn growth_arithmetic() -> Verdict {
    let g = growth_stats(100.0, 392.4, 22).expect("growth");
    Verdict::new(
        (g.cagr - 0.064).abs() <= 0.0005,
        format!("292.4% over 22 years gives CAGR {:.4}% (target 6.4 +/- 0.05 pp)", 100.0 * g.cagr),
    )
}

fn metrics_identities(runs: &Runs, fixture: &[ContributionLedger]) -> Verdict {
    let mut worst_identity: f64 = 0.0;
    let mut worst_units: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let all: Vec<&ContributionLedger> = runs.ledgers.iter().chain(fixture).collect();
    for ledger in &all {
        let dc = decarb_intensity(ledger);
        let rebuilt = positive_contributions(ledger) - dc + ledger.residual;
        // rounding scale of the sums involved
        let scale = ledger.grouped.iter().map(|(_, v)| v.abs()).sum::<f64>()
            + ledger.total_change.abs();
        worst_identity = worst_identity.max((rebuilt - ledger.total_change).abs() / (f64::EPSILON * scale.max(f64::MIN_POSITIVE)));

        let households: f64 = rng.gen_range(1e6..3e8);
        let emissions = households * rng.gen_range(50.0..800.0);
        let total = dc * households;
        let kg = decarb_efficiency(total, emissions).expect("efficiency");
        let mt = decarb_efficiency(total / KG_PER_MT, emissions / KG_PER_MT).expect("efficiency");
        if kg != 0.0 {
            worst_units = worst_units.max((kg - mt).abs() / kg.abs());
        }
    }
    // "exactly" in floating point: within a few units of rounding of the terms summed
    Verdict::new(
        worst_identity <= 8.0 && worst_units <= 1e-12,
        format!(
            "{} ledgers: identity off by at most {worst_identity:.1} ulp of the summed terms (limit 8); efficiency kg vs Mt relative gap {worst_units:.1e} (limit 1e-12)",
            all.len()
        ),
    )
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/fixture_panel.csv")
}

fn national_config(from: i32, to: i32) -> RunConfig {
    let mut cfg = RunConfig::for_input(fixture_path());
    cfg.states = Some(BTreeSet::from([NATIONAL.to_string()]));
    cfg.years = Some(YearRange { from, to });
    cfg
}

fn fixture_demonstration() -> (Verdict, Vec<ContributionLedger>) {
    let mut checks: Vec<(&str, f64, f64, f64)> = Vec::new();
    let mut ledgers = Vec::new();

    let cells = model_rows(&national_config(2022, 2022)).expect("model");
    let c = |locale| cells.iter().find(|(k, _)| k.locale == locale).unwrap().1.c_total;
    checks.push(("national 2022 kg/hh", c(Locale::All), 513.8, 0.05));
    checks.push(("urban 2022 kg/hh", c(Locale::Urban), 744.7, 0.05));
    checks.push(("rural 2022 kg/hh", c(Locale::Rural), 358.1, 0.05));

    let rows = decompose_rows(&national_config(2000, 2022)).expect("decompose");
    let ledger = |locale| &rows.iter().find(|r| r.key.locale == locale).unwrap().ledger;
    let national = ledger(Locale::All);
    checks.push(("n rate", national.rate("n").unwrap(), 1.965, 0.02));
    checks.push(("k rate", national.rate("k").unwrap(), -0.415, 0.02));
    checks.push(("urban p rate", ledger(Locale::Urban).rate("p").unwrap(), -0.405, 0.02));
    ledgers.extend(rows.iter().map(|r| r.ledger.clone()));

    let series = metrics_rows(&national_config(2001, 2022)).expect("metrics");
    let all = &series.iter().find(|(k, _)| k.locale == Locale::All).unwrap().1;
    let end = all.last().unwrap().cumulative;
    checks.push(("cumulative Mt", end.total_decarb_mt(), 206.2, 0.5));
    checks.push(("cumulative efficiency", end.efficiency, 0.085, 0.002));

    let mut yearly = national_config(2000, 2022);
    for t in 2001..=2022 {
        yearly.years = Some(YearRange { from: t - 1, to: t });
        ledgers.extend(decompose_rows(&yearly).expect("yearly").into_iter().map(|r| r.ledger));
    }

    let pass = checks.iter().all(|(_, got, want, tol)| (got - want).abs() <= *tol);
    let detail = checks
        .iter()
        .map(|(name, got, want, tol)| format!("{name} {got:.4} ({want} +/- {tol})"))
        .collect::<Vec<_>>()
        .join("; ");
    (Verdict::new(pass, format!("calibrated fixture: {detail}")), ledgers)
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../cli/tests/corpus")
        .join(name)
        .display()
        .to_string()
}

fn file_count(dir: &Path) -> usize {
    std::fs::read_dir(dir).map(|d| d.count()).unwrap_or(0)
}

fn ingestion_robustness() -> Verdict {
    let scratch = tempfile::tempdir().expect("tempdir");
    let cases: [(&str, &str, &[&str], &str); 4] = [
        ("missing column", "missing_column.csv", &[], "mandatory column is missing"),
        ("duplicate key", "duplicate_key.csv", &[], "duplicate key"),
        ("non-numeric cell", "non_numeric.csv", &[], "is not a finite number"),
        ("extrapolation", "urban_only.csv", &["--years", "1995:2010"], "cannot extrapolate"),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (label, file, extra, class) in cases {
        let out = scratch.path().join(file);
        let mut args: Vec<OsString> = ["cooldecomp", "model", "--input"].map(OsString::from).to_vec();
        args.push(corpus(file).into());
        args.extend(extra.iter().map(OsString::from));
        args.push("--out".into());
        args.push(out.clone().into());
        let outcome = cooldecomp_cli::run(args, None);
        let files = file_count(&out);
        let ok = outcome.code == 1 && outcome.stderr.contains(class) && files == 0;
        pass &= ok;
        notes.push(format!("{label}: exit {}, {files} files{}", outcome.code, if ok { "" } else { " (unexpected)" }));
    }
    Verdict::new(pass, notes.join("; "))
}

fn random_cell(rng: &mut ChaCha8Rng, state: usize, locale: Locale) -> IntensityBreakdown {
    let households = rng.gen_range(1e4..2e7);
    let population = households * rng.gen_range(3.0..6.0);
    let record = StateYearRecord {
        state: format!("S{state:02}"),
        year: 2022,
        locale,
        room_ac: RoomAcParams {
            floorspace_per_household: rng.gen_range(0.0..20.0),
            cooling_load_per_area: rng.gen_range(60.0..200.0),
            iseer: rng.gen_range(2.5..5.0),
        },
        fan: FanParams {
            units_per_household: rng.gen_range(0.5..4.0),
            annual_usage_hours: rng.gen_range(1000.0..4000.0),
            rated_power: rng.gen_range(50.0..80.0),
        },
        air_cooler: AirCoolerParams {
            units_per_household: rng.gen_range(0.0..1.0),
            annual_usage_hours: rng.gen_range(300.0..1500.0),
            rated_power: rng.gen_range(150.0..250.0),
        },
        population,
        households,
        nsdp: population * rng.gen_range(2e4..3e5),
        emission_factor: rng.gen_range(0.5..1.0),
    };
    household_intensity(&record, IseerMode::default()).expect("cell")
}

fn aggregation_associativity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut flat = Vec::new();
    let mut states = Vec::new();
    for s in 0..33 {
        let pair = [random_cell(&mut rng, s, Locale::Urban), random_cell(&mut rng, s, Locale::Rural)];
        states.push(aggregate(&pair, format!("S{s:02}"), Locale::All).expect("state"));
        flat.extend(pair);
    }
    let a = aggregate(&flat, NATIONAL, Locale::All).expect("flat");
    let b = aggregate(&states, NATIONAL, Locale::All).expect("hierarchical");
    let mut pairs = vec![
        (a.c_total, b.c_total),
        (a.c_room_ac, b.c_room_ac),
        (a.c_fan, b.c_fan),
        (a.c_air_cooler, b.c_air_cooler),
        (a.emissions_total, b.emissions_total),
        (a.energy_total, b.energy_total),
        (a.households, b.households),
        (a.emission_factor, b.emission_factor),
        (a.p, b.p),
        (a.n, b.n),
        (a.e, b.e),
    ];
    pairs.extend(a.energy_shares.iter().copied().zip(b.energy_shares.iter().copied()));
    let worst = pairs
        .iter()
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) })
        .fold(0.0, f64::max);
    Verdict::new(
        worst <= 1e-12,
        format!("33 states x 2 locales, flat vs hierarchical: largest relative difference {worst:.1e} (limit 1e-12)"),
    )
}

fn main() {
    let started = Instant::now();
    let runs = random_runs();
    let (fixture, fixture_ledgers) = fixture_demonstration();
    let verdicts = [
        ("decomposition exactness", exactness(&runs)),
        ("oracle equivalence", oracle_equivalence(&runs)),
        ("slack algebra", slack_algebra()),
        ("share conservation", share_conservation(&runs, &fixture_ledgers)),
        ("growth arithmetic", growth_arithmetic()),
        ("metrics identities", metrics_identities(&runs, &fixture_ledgers)),
        ("fixture demonstration", fixture),
        ("ingestion robustness", ingestion_robustness()),
        ("aggregation associativity", aggregation_associativity()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {status} - {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        verdicts.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
