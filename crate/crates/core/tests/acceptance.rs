//! Acceptance criteria 1–12. Prints one PASS/FAIL line per criterion and
//! exits non-zero if the outcome differs from `EXPECTED_RED`.
//!
//! Trend criteria compare sweep points that share realization seeds, so the
//! margin is one standard error of the per-realization paired difference.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use uavtraj::antenna::{tx_gain, AntennaMode, LinkGeometry};
use uavtraj::config::{preset, RunConfig};
use uavtraj::geometry::Point3;
use uavtraj::grid::{Cell, Lattice};
use uavtraj::metrics::{monte_carlo_sweep, summarize, PathKind, PointQuery, Summary, SweepPoint, SweepResult};
use uavtraj::pathloss::{
    backhaul_path_loss, fspl, hata_path_loss, los_probability, mixture_path_loss, BuildingModel, HataCoefficients,
    LosVariant,
};
use uavtraj::planner::{enumerate_paths, solve_dp, ActionSet, StateGrid};
use uavtraj::radio::{relay_end_to_end_sir, Criterion, Mode};
use uavtraj::smoothing::{bernstein, BezierCurve};

/// Criteria expected to fail, with the reason. See the decisions ledger.
const EXPECTED_RED: &[(u32, &str)] = &[(
    11,
    "hand-evaluated Hata pin (A 132.39, 121.0 dB at 1 km) is not reproduced by the Hata closed form (130.79, 119.41 dB)",
)];

const T_EVAL: f64 = 240.0;
const LAMBDA_EVAL: f64 = 4.0;
const V_MAX_TOL: f64 = 1e-9;
const SMOOTH_GAP_REL: f64 = 0.05;
const SATURATION_RATIO: f64 = 0.25;
const DB_TOL: f64 = 1e-6;
const REL_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

/// Collects named sub-checks into one outcome.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if !ok {
            self.failed.push(what.clone());
        }
        self.notes.push(format!("{}{}", if ok { "" } else { "✗ " }, what));
    }

    fn outcome(self) -> Outcome {
        let pass = self.failed.is_empty();
        let detail = if pass { self.notes.join("; ") } else { format!("failed: {}", self.failed.join("; ")) };
        Outcome::new(pass, detail)
    }
}

fn load_preset(name: &str) -> RunConfig {
    RunConfig::from_toml(preset(name).expect("preset exists")).expect("preset parses")
}

fn sweep(name: &str) -> SweepResult {
    let t = Instant::now();
    let result = monte_carlo_sweep(&load_preset(name).sweep_input()).expect("sweep runs");
    eprintln!("  [{name} sweep: {:.1} s]", t.elapsed().as_secs_f64());
    result
}

fn point<'a>(s: &'a SweepResult, q: PointQuery) -> &'a SweepPoint {
    s.find(&q).unwrap_or_else(|| panic!("no unique sweep point for {q:?}"))
}

fn base_query<'a>() -> PointQuery<'a> {
    PointQuery {
        duration_s: Some(T_EVAL),
        mbs_density: Some(LAMBDA_EVAL),
        criterion: Some(Criterion::Pf),
        mode: Some(Mode::Standalone),
        uav_ue_model: Some("ohplm"),
        antenna: Some(AntennaMode::Omni),
        path: Some(PathKind::Discrete),
    }
}

/// Per-realization `a − b` for capacity and outage.
fn paired(a: &SweepPoint, b: &SweepPoint) -> (Summary, Summary) {
    let mut cap = Vec::new();
    let mut out = Vec::new();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.seed, y.seed, "sweep points are not paired");
        if let (Some(p), Some(q)) = (x.mean_capacity, y.mean_capacity) {
            cap.push(p - q);
        }
        if let (Some(p), Some(q)) = (x.outage, y.outage) {
            out.push(p - q);
        }
    }
    (summarize(&cap), summarize(&out))
}

fn fmt(s: &Summary) -> String {
    format!("{:+.4} (SE {:.4})", s.mean, s.stderr)
}

/// `mean > stderr`: a positive difference by more than one standard error.
fn exceeds(s: &Summary) -> bool {
    s.mean > s.stderr
}

/// `mean ≥ −stderr`: non-negative within one standard error.
fn within(s: &Summary) -> bool {
    s.mean >= -s.stderr
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0xacce_0001);
    let mut instances = 0;
    let mut mismatches = 0;
    while instances < 120 {
        let nx = 1 + below(&mut rng, 4);
        let ny = 1 + below(&mut rng, 4);
        let lattice = Lattice::new(uavtraj::geometry::Point2::new(0.0, 0.0), 100.0, nx, ny).unwrap();
        let start = Cell::new(below(&mut rng, nx), below(&mut rng, ny));
        let finish = Cell::new(below(&mut rng, nx), below(&mut rng, ny));
        let need = start.ix.abs_diff(finish.ix).max(start.iy.abs_diff(finish.iy));
        if need > 6 {
            continue;
        }
        let stages = need.max(1) + below(&mut rng, 7 - need.max(1));
        let grid = StateGrid { lattice, stages, start, finish };
        let actions = ActionSet::standard(100.0, 8.0);
        let rewards: Vec<f64> =
            (0..lattice.len()).map(|_| unit(&mut rng) * 10.0 - 5.0).collect();
        let dp = solve_dp(&rewards, &grid, &actions).unwrap();
        let brute = enumerate_paths(&rewards, &grid, &actions, 10_000_000).unwrap();
        if dp.value != brute.value {
            mismatches += 1;
        }
        instances += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome::new(
        mismatches == 0 && secs < 60.0,
        format!("{instances} instances (≤4×4, N≤6), {mismatches} value mismatches, {secs:.2} s"),
    )
}

fn below(rng: &mut Xoshiro256PlusPlus, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn unit(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn criterion_2(sweeps: &[(&str, &SweepResult)], run_dir: &Path, v_max: f64) -> Outcome {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for (name, s) in sweeps {
        for p in &s.points {
            for r in &p.samples {
                checked += 1;
                if !r.endpoints_ok || r.max_speed > v_max + V_MAX_TOL {
                    bad.push(format!(
                        "{name} T{} λ{} {} {} #{}: endpoints_ok={} v={:.3}",
                        p.duration_s,
                        p.mbs_density,
                        p.criterion.name(),
                        p.path.name(),
                        r.index,
                        r.endpoints_ok,
                        r.max_speed
                    ));
                }
            }
        }
    }
    let mut csv_files = 0;
    for entry in std::fs::read_dir(run_dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let column = if name.starts_with("trajectory_") {
            "v"
        } else if name.starts_with("smoothed_") {
            "speed"
        } else {
            continue;
        };
        csv_files += 1;
        for row in read_rows(&path) {
            if let Ok(v) = row[column].parse::<f64>() {
                if v > v_max + V_MAX_TOL {
                    bad.push(format!("{name}: speed {v}"));
                }
            }
        }
    }
    let detail = format!(
        "{checked} planned paths across sweeps and {csv_files} emitted path CSVs, {} violations{}",
        bad.len(),
        bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
    );
    Outcome::new(bad.is_empty(), detail)
}

fn read_rows(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

fn criterion_3(run_dir: &Path) -> Outcome {
    let cfg = load_preset("fig2");
    let m = &cfg.mission;
    let stages = (T_EVAL / m.stage_s).round() as i64;
    let cell = cfg.planner.cell_m;
    let steps = |a: (f64, f64), b: (f64, f64)| -> i64 {
        (((a.0 - b.0).abs() / cell).round() as i64).max(((a.1 - b.1).abs() / cell).round() as i64)
    };
    let start = (m.start.x, m.start.y);
    let finish = (m.finish.x, m.finish.y);
    let mut checks = Checks::default();
    for c in Criterion::ALL {
        let stem = format!("standalone_ohplm_omni_{}", c.name());
        let heat = read_rows(&run_dir.join(format!("heatmap_{stem}.csv")));
        let traj = read_rows(&run_dir.join(format!("trajectory_{stem}.csv")));
        let xy = |r: &HashMap<String, String>| (r["x"].parse::<f64>().unwrap(), r["y"].parse::<f64>().unwrap());
        let reachable: Vec<((f64, f64), f64)> = heat
            .iter()
            .map(|r| (xy(r), r["reward"].parse::<f64>().unwrap()))
            .filter(|&(p, _)| steps(start, p) + steps(p, finish) <= stages)
            .collect();
        let best = reachable.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
        let best_cells: Vec<(f64, f64)> = reachable.iter().filter(|&&(_, v)| v == best).map(|&(p, _)| p).collect();
        let hovers = traj
            .windows(2)
            .filter(|w| xy(&w[0]) == xy(&w[1]) && best_cells.contains(&xy(&w[0])))
            .count();
        checks.check(
            hovers >= 1,
            format!("{}: {hovers} hover stages at best cell {:?}", c.name(), best_cells.first().unwrap()),
        );
    }
    checks.outcome()
}

fn criterion_4(fig2: &SweepResult) -> Outcome {
    let pf = point(fig2, base_query());
    let sr = point(fig2, PointQuery { criterion: Some(Criterion::SumRate), ..base_query() });
    let (cap, out) = paired(sr, pf);
    let mut checks = Checks::default();
    checks.check(exceeds(&cap), format!("capacity sum_rate−pf {}", fmt(&cap)));
    checks.check(exceeds(&out), format!("outage sum_rate−pf {}", fmt(&out)));
    checks.outcome()
}

fn criterion_5(fig3: &SweepResult) -> Outcome {
    let ts = [80.0, 120.0, 160.0, 240.0, 320.0];
    let pts: Vec<&SweepPoint> =
        ts.iter().map(|&t| point(fig3, PointQuery { duration_s: Some(t), ..base_query() })).collect();
    let mut checks = Checks::default();
    let mut incs = Vec::new();
    for w in pts.windows(2) {
        let (cap, _) = paired(w[1], w[0]);
        checks.check(within(&cap), format!("T{}→{} {}", w[0].duration_s, w[1].duration_s, fmt(&cap)));
        incs.push(w[1].capacity.mean - w[0].capacity.mean);
    }
    let ratio = incs[incs.len() - 1] / incs[0];
    checks.check(ratio < SATURATION_RATIO, format!("last/first increment {ratio:.3}"));
    checks.outcome()
}

fn criterion_6(fig2: &SweepResult) -> Outcome {
    let mut checks = Checks::default();
    for c in Criterion::ALL {
        let q = PointQuery { criterion: Some(c), ..base_query() };
        let dense = point(fig2, q.clone());
        let sparse = point(fig2, PointQuery { mbs_density: Some(2.0), ..q });
        let (_, out) = paired(sparse, dense);
        checks.check(exceeds(&out), format!("{} outage λ2−λ4 {}", c.name(), fmt(&out)));
    }
    checks.outcome()
}

fn criterion_7(fig3: &SweepResult) -> Outcome {
    let mut checks = Checks::default();
    let mut worst: f64 = 0.0;
    for d in fig3.points.iter().filter(|p| p.path == PathKind::Discrete && p.criterion == Criterion::Pf) {
        let s = point(
            fig3,
            PointQuery {
                duration_s: Some(d.duration_s),
                mbs_density: Some(d.mbs_density),
                path: Some(PathKind::Smoothed),
                ..base_query()
            },
        );
        let gap = (s.capacity.mean - d.capacity.mean).abs() / d.capacity.mean;
        worst = worst.max(gap);
        checks.check(gap <= SMOOTH_GAP_REL, format!("T{} gap {:.4}", d.duration_s, gap));
    }
    let mut pou: f64 = 0.0;
    for n in 1..=40 {
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let sum: f64 = (0..=n).map(|i| bernstein(i, n, t).unwrap()).sum();
            pou = pou.max((sum - 1.0).abs());
        }
    }
    checks.check(pou <= REL_TOL, format!("partition of unity max error {pou:.1e}"));
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    let pts: Vec<uavtraj::geometry::Point2> = (0..31)
        .map(|_| {
            let x = unit(&mut rng) * 1200.0;
            uavtraj::geometry::Point2::new(x, unit(&mut rng) * 1200.0)
        })
        .collect();
    let curve = BezierCurve::new(pts.clone()).unwrap();
    let e0 = curve.eval(0.0).distance(pts[0]);
    let e1 = curve.eval(1.0).distance(pts[30]);
    checks.check(e0.max(e1) <= REL_TOL * 1200.0, format!("endpoint interpolation error {:.1e} m", e0.max(e1)));
    let mut o = checks.outcome();
    o.detail = format!("worst relative gap {worst:.4}; {}", o.detail);
    o
}

fn criterion_8(fig4: &SweepResult) -> Outcome {
    let get = |m: &'static str| point(fig4, PointQuery { uav_ue_model: Some(m), ..base_query() });
    let (fs, oh, mp) = (get("fspl"), get("ohplm"), get("mplm"));
    let mut checks = Checks::default();
    for (hi, lo, label) in [(fs, oh, "fspl−ohplm"), (oh, mp, "ohplm−mplm")] {
        let (cap, out) = paired(hi, lo);
        let cov = Summary { mean: -out.mean, ..out };
        checks.check(within(&cap), format!("capacity {label} {}", fmt(&cap)));
        checks.check(within(&cov), format!("coverage {label} {}", fmt(&cov)));
    }
    checks.outcome()
}

fn criterion_9(fig5: &SweepResult, fig6: &SweepResult) -> Outcome {
    let mut checks = Checks::default();
    let q = PointQuery { uav_ue_model: Some("mplm"), ..base_query() };
    let alone = point(fig5, q.clone());
    let relay = point(fig5, PointQuery { mode: Some(Mode::Relay), ..q });
    let (cap, out) = paired(alone, relay);
    let rel_out = Summary { mean: -out.mean, ..out };
    checks.check(exceeds(&cap), format!("capacity standalone−relay {}", fmt(&cap)));
    checks.check(exceeds(&rel_out), format!("outage relay−standalone {}", fmt(&rel_out)));

    let r = |m: &'static str| point(fig6, PointQuery { mode: Some(Mode::Relay), uav_ue_model: Some(m), ..base_query() });
    let fs = r("fspl");
    for other in ["ohplm", "mplm"] {
        let (cap, out) = paired(r(other), fs);
        let fs_out = Summary { mean: -out.mean, ..out };
        checks.check(exceeds(&cap), format!("relay capacity {other}−fspl {}", fmt(&cap)));
        checks.check(exceeds(&fs_out), format!("relay outage fspl−{other} {}", fmt(&fs_out)));
    }
    checks.outcome()
}

fn criterion_10(fig7: &SweepResult) -> Outcome {
    let q = PointQuery { mode: Some(Mode::Relay), ..base_query() };
    let omni = point(fig7, q.clone());
    let dip = point(fig7, PointQuery { antenna: Some(AntennaMode::CrossedDipole), ..q });
    let (cap, out) = paired(omni, dip);
    let dip_out = Summary { mean: -out.mean, ..out };
    let mut checks = Checks::default();
    checks.check(exceeds(&cap), format!("capacity omni−dipole {}", fmt(&cap)));
    checks.check(exceeds(&dip_out), format!("outage dipole−omni {}", fmt(&dip_out)));
    let nadir = tx_gain(&LinkGeometry {
        tx_position: Point3::new(500.0, 500.0, 120.0),
        rx_position: Point3::new(500.0, 500.0, 2.0),
        tx_mode: AntennaMode::CrossedDipole,
        rx_mode: AntennaMode::Omni,
    })
    .unwrap();
    let max = AntennaMode::CrossedDipole.max_gain();
    checks.check(nadir < max, format!("nadir gain {nadir} < max {max}"));
    checks.outcome()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Hand-evaluated values are compared at the precision they are stated with
/// (half a unit in the last quoted digit); frozen recomputations at 10⁻⁶ dB.
fn criterion_11() -> Outcome {
    let mut c = Checks::default();
    let hata = hata_path_loss(1000.0, 1500.0, 30.0, 2.0).unwrap();
    let coef = HataCoefficients::new(1500.0, 30.0, 2.0);
    c.check(close(coef.a_coef, 132.39, 0.005), format!("Hata A {:.4} vs 132.39", coef.a_coef));
    c.check(close(coef.b_coef, 35.22, 0.005), format!("Hata B {:.4} vs 35.22", coef.b_coef));
    c.check(close(coef.c_coef, -11.38, 0.005), format!("Hata C {:.4} vs −11.38", coef.c_coef));
    c.check(close(hata, 121.0, 0.05), format!("Hata 1 km {hata:.4} vs 121.0 dB"));
    c.check(close(hata, 119.41161297909187, DB_TOL), "Hata 1 km vs recomputed closed form 119.411613".to_string());
    let hata_uav = hata_path_loss(1000.0, 1500.0, 120.0, 2.0).unwrap();
    c.check(hata_uav < hata, format!("Hata h_tx 120 m {hata_uav:.3} < 30 m"));
    let doubled = hata_path_loss(2000.0, 1500.0, 30.0, 2.0).unwrap() - hata;
    c.check(close(doubled, coef.b_coef * 2f64.log10(), DB_TOL), "Hata doubling adds B·log10 2");

    let f = fspl(1000.0, 1500.0).unwrap();
    c.check(close(f, 95.97, 0.005), format!("FSPL 1 km {f:.4} vs 95.97"));
    c.check(close(f, 95.97182518111363, DB_TOL), "FSPL vs recomputed 95.971825");
    c.check(close(fspl(1.0, 1.0).unwrap(), -27.55, DB_TOL), "FSPL 1 m 1 MHz = −27.55");
    c.check(close(fspl(2000.0, 1500.0).unwrap() - f, 20.0 * 2f64.log10(), DB_TOL), "FSPL doubling 6.02 dB");

    let b = backhaul_path_loss(1000.0, 1500.0, 120.0).unwrap();
    c.check(close(b, 97.52, 0.005), format!("backhaul 1 km {b:.4} vs 97.52"));

    let bm = BuildingModel::default();
    let v = LosVariant::default();
    c.check(close(los_probability(0.0, 120.0, 2.0, &bm, v), 1.0, REL_TOL), "τ_L(0) = 1");
    c.check(bm.crossings(1000.0) == 2, format!("m(1000 m) = {}", bm.crossings(1000.0)));
    let tau = los_probability(1000.0, 120.0, 2.0, &bm, v);
    c.check(close(tau, 0.9043655476461222, REL_TOL), format!("τ_L(1000 m) {tau}"));
    let mut prev = 1.0;
    let mut monotone = true;
    for z in (0..=1500).step_by(5) {
        let t = los_probability(z as f64, 120.0, 2.0, &bm, v);
        monotone &= t <= prev + REL_TOL && (0.0..=1.0).contains(&t);
        prev = t;
    }
    c.check(monotone, "τ_L non-increasing on 0–1500 m");
    let mix = mixture_path_loss(500.0, 489.0, 120.0, 2.0, 2.09, 3.75, &bm, v).unwrap();
    c.check(close(mix, 56.408473126740574, 1e-9), format!("mixture d 500 z 489 {mix:.9}"));

    let r = relay_end_to_end_sir(4.0, 1.0).unwrap();
    c.check((r - 1.6).abs() <= REL_TOL * 1.6, format!("relay γ 4,1 → {r}"));
    c.outcome()
}

fn cli_run(out: &Path, jobs: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_uavtraj"))
        .args(["--jobs", &jobs.to_string(), "run", "--preset", "fig2", "--out"])
        .arg(out)
        .status()
        .expect("CLI starts");
    assert!(status.success(), "uavtraj run failed with {status}");
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

fn criterion_12(first: &Path, scratch: &Path) -> Outcome {
    let second = scratch.join("second");
    cli_run(&second, 4);
    let a = csv_files(first);
    let b = csv_files(&second);
    let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    if names(&a) != names(&b) {
        return Outcome::new(false, "runs produced different file sets");
    }
    let differing: Vec<String> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| std::fs::read(x).unwrap() != std::fs::read(y).unwrap())
        .map(|(x, _)| x.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    Outcome::new(
        differing.is_empty(),
        format!("{} CSVs compared across --jobs 1 and --jobs 4 runs, {} differ {:?}", a.len(), differing.len(), differing),
    )
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let run_dir = scratch.path().join("first");
    let t = Instant::now();
    cli_run(&run_dir, 1);
    eprintln!("  [fig2 CLI run: {:.1} s]", t.elapsed().as_secs_f64());

    let fig2 = sweep("fig2");
    let fig3 = sweep("fig3");
    let fig4 = sweep("fig4");
    let fig5 = sweep("fig5");
    let fig6 = sweep("fig6");
    let fig7 = sweep("fig7");
    let v_max = load_preset("fig2").physical.v_max;
    let all = [("fig2", &fig2), ("fig3", &fig3), ("fig4", &fig4), ("fig5", &fig5), ("fig6", &fig6), ("fig7", &fig7)];

    let outcomes: Vec<(u32, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2(&all, &run_dir, v_max)),
        (3, criterion_3(&run_dir)),
        (4, criterion_4(&fig2)),
        (5, criterion_5(&fig3)),
        (6, criterion_6(&fig2)),
        (7, criterion_7(&fig3)),
        (8, criterion_8(&fig4)),
        (9, criterion_9(&fig5, &fig6)),
        (10, criterion_10(&fig7)),
        (11, criterion_11()),
        (12, criterion_12(&run_dir, scratch.path())),
    ];

    let mut unexpected = Vec::new();
    for (n, o) in &outcomes {
        println!("criterion {n:>2}: {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        let red = EXPECTED_RED.iter().find(|(k, _)| k == n);
        if let Some((_, why)) = red {
            println!("              expected red: {why}");
        }
        if o.pass == red.is_some() {
            unexpected.push(*n);
        }
    }
    let passed = outcomes.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if !unexpected.is_empty() {
        println!("acceptance: outcome differs from expectation for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
