use proptest::prelude::*;

use uavtraj::geometry::{Point2, Point3, Rect};
use uavtraj::grid::{Cell, Lattice};
use uavtraj::metrics::summarize;
use uavtraj::pathloss::{
    backhaul_path_loss, fspl, hata_path_loss, los_probability, mixture_path_loss, BuildingModel, LosVariant,
    MixtureParams, PathLossModel,
};
use uavtraj::planner::{enumerate_paths, solve_dp, ActionSet, StateGrid};
use uavtraj::radio::relay_end_to_end_sir;
use uavtraj::rng::{poisson, rng_from_seed};
use uavtraj::scenario::{draw_ppp, generate_scenario, Mission, PhysicalConfig};
use uavtraj::smoothing::{bernstein, smooth, BezierCurve};

const CELL: f64 = 100.0;
const STAGE: f64 = 8.0;
const V_MAX: f64 = 17.7;

/// A small planning instance whose finish is reachable in `stages` moves.
fn instance(max_side: usize, max_stages: usize) -> impl Strategy<Value = (StateGrid, Vec<f64>)> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(move |(nx, ny)| {
            (Just((nx, ny)), 0..nx, 0..ny, 0..nx, 0..ny, 0..=max_stages, prop::collection::vec(-50i32..50, nx * ny))
        })
        .prop_filter_map("finish out of reach", |((nx, ny), sx, sy, fx, fy, n, raw)| {
            let need = sx.abs_diff(fx).max(sy.abs_diff(fy));
            if n < need {
                return None;
            }
            let lattice = Lattice::new(Point2::new(0.0, 0.0), CELL, nx, ny).ok()?;
            let grid = StateGrid { lattice, stages: n, start: Cell::new(sx, sy), finish: Cell::new(fx, fy) };
            // Quarter steps keep every partial sum exact.
            Some((grid, raw.into_iter().map(|r| f64::from(r) * 0.25).collect()))
        })
}

fn actions() -> ActionSet {
    ActionSet::standard(CELL, STAGE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn dp_matches_enumeration((grid, rewards) in instance(4, 5)) {
        let dp = solve_dp(&rewards, &grid, &actions()).unwrap();
        let brute = enumerate_paths(&rewards, &grid, &actions(), 1 << 24).unwrap();
        prop_assert_eq!(dp.value, brute.value);
        prop_assert_eq!(dp.actions, brute.actions);
    }

    #[test]
    fn constant_shift_moves_value_by_n_c((grid, rewards) in instance(5, 8), c in 0u8..40) {
        let c = f64::from(c) * 0.5;
        let shifted: Vec<f64> = rewards.iter().map(|r| r + c).collect();
        let a = solve_dp(&rewards, &grid, &actions()).unwrap();
        let b = solve_dp(&shifted, &grid, &actions()).unwrap();
        prop_assert_eq!(b.value, a.value + grid.stages as f64 * c);
        prop_assert_eq!(a.actions, b.actions);
    }

    #[test]
    fn trajectories_respect_endpoints_and_speed((grid, rewards) in instance(6, 10)) {
        let t = solve_dp(&rewards, &grid, &actions()).unwrap();
        prop_assert_eq!(t.cells.first().copied(), Some(grid.start));
        prop_assert_eq!(t.cells.last().copied(), Some(grid.finish));
        prop_assert_eq!(t.actions.len(), grid.stages);
        for a in &t.actions {
            prop_assert!(a.speed(CELL, STAGE) <= V_MAX);
        }
        for w in t.cells.windows(2) {
            prop_assert!(w[0].ix.abs_diff(w[1].ix) <= 1 && w[0].iy.abs_diff(w[1].iy) <= 1);
        }
    }

    #[test]
    fn longer_missions_never_lose_value((grid, raw) in instance(4, 6)) {
        // Non-negative rewards, as for sum-rate maps: an extra hover cannot hurt.
        let rewards: Vec<f64> = raw.iter().map(|r| r.abs()).collect();
        let short = solve_dp(&rewards, &grid, &actions()).unwrap();
        let longer = StateGrid { stages: grid.stages + 1, ..grid.clone() };
        let long = solve_dp(&rewards, &longer, &actions()).unwrap();
        prop_assert!(long.value >= short.value);
    }

    #[test]
    fn bernstein_partition_of_unity(n in 0usize..60, t in 0.0f64..=1.0) {
        let mut sum = 0.0;
        for i in 0..=n {
            let b = bernstein(i, n, t).unwrap();
            prop_assert!(b >= 0.0);
            sum += b;
        }
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bezier_stays_in_the_control_hull(
        pts in prop::collection::vec((-100.0f64..1100.0, -100.0f64..1100.0), 2..32),
        t in 0.0f64..=1.0,
    ) {
        let ctrl: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let p = BezierCurve::new(ctrl.clone()).unwrap().eval(t);
        // The curve is a convex combination, so no hull-supporting line is crossed.
        // Checked against every direction through a pair of control points
        // and the axis directions.
        let mut dirs = vec![(1.0, 0.0), (0.0, 1.0)];
        for a in &ctrl {
            for b in &ctrl {
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                if dx != 0.0 || dy != 0.0 {
                    dirs.push((-dy, dx));
                }
            }
        }
        for (ux, uy) in dirs {
            let proj = |q: &Point2| q.x * ux + q.y * uy;
            let lo = ctrl.iter().map(proj).fold(f64::INFINITY, f64::min);
            let hi = ctrl.iter().map(proj).fold(f64::NEG_INFINITY, f64::max);
            let slack = 1e-9 * (hi.abs().max(lo.abs()).max(1.0));
            prop_assert!(proj(&p) >= lo - slack && proj(&p) <= hi + slack);
        }
    }

    #[test]
    fn bezier_commutes_with_translation(
        pts in prop::collection::vec((-100.0f64..1100.0, -100.0f64..1100.0), 2..32),
        (dx, dy) in (-500.0f64..500.0, -500.0f64..500.0),
        t in 0.0f64..=1.0,
    ) {
        let ctrl: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let moved: Vec<Point2> = ctrl.iter().map(|p| Point2::new(p.x + dx, p.y + dy)).collect();
        let a = BezierCurve::new(ctrl).unwrap().eval(t);
        let b = BezierCurve::new(moved).unwrap().eval(t);
        prop_assert!((a.x + dx - b.x).abs() <= 1e-12 * 2000.0);
        prop_assert!((a.y + dy - b.y).abs() <= 1e-12 * 2000.0);
    }

    #[test]
    fn smoothed_speed_bounded_by_waypoint_speed((grid, rewards) in instance(6, 12)) {
        let t = solve_dp(&rewards, &grid, &actions()).unwrap();
        if t.positions.len() >= 2 {
            let s = smooth(&t, STAGE, V_MAX).unwrap();
            prop_assert_eq!(s.samples.first(), t.positions.first());
            prop_assert_eq!(s.samples.last(), t.positions.last());
            prop_assert!(s.is_feasible(), "max speed {}", s.max_speed());
        }
    }

    #[test]
    fn ppp_points_stay_in_their_region(
        seed in any::<u64>(),
        density in 0.5f64..200.0,
        (x0, y0, w, h) in (-500.0f64..500.0, -500.0f64..500.0, 1.0f64..2000.0, 1.0f64..2000.0),
    ) {
        let area = Rect::new(Point2::new(x0, y0), Point2::new(x0 + w, y0 + h));
        let mut rng = rng_from_seed(seed);
        for p in draw_ppp(&mut rng, density, &area) {
            prop_assert!(area.contains(p));
        }
    }

    #[test]
    fn relay_sir_is_symmetric_and_bounded(a in 1e-4f64..1e4, b in 1e-4f64..1e4) {
        let e = relay_end_to_end_sir(a, b).unwrap();
        prop_assert!((e - relay_end_to_end_sir(b, a).unwrap()).abs() <= 1e-12 * e);
        prop_assert!(e >= a.min(b) * (1.0 - 1e-12));
        prop_assert!(e <= 2.0 * a.min(b) * (1.0 + 1e-12));
    }

    #[test]
    fn losses_increase_with_distance(d in 1.0f64..5000.0, k in 1.001f64..3.0) {
        let f = 1500.0;
        prop_assert!(hata_path_loss(d * k, f, 30.0, 2.0).unwrap() > hata_path_loss(d, f, 30.0, 2.0).unwrap());
        prop_assert!(fspl(d * k, f).unwrap() > fspl(d, f).unwrap());
        prop_assert!(backhaul_path_loss(d * k, f, 120.0).unwrap() > backhaul_path_loss(d, f, 120.0).unwrap());
        let bm = BuildingModel::default();
        for v in [LosVariant::AsWritten, LosVariant::Corrected] {
            // Fixed horizontal range, so only the exponent laws move.
            let z = d.min(500.0);
            let near = mixture_path_loss(d.max(z), z, 120.0, 2.0, 2.09, 3.75, &bm, v).unwrap();
            let far = mixture_path_loss(d.max(z) * k, z, 120.0, 2.0, 2.09, 3.75, &bm, v).unwrap();
            prop_assert!(far > near);
        }
    }

    #[test]
    fn los_probability_is_a_probability(
        z in 0.0f64..5000.0,
        a_hat in 0.01f64..0.99,
        b_hat in 1.0f64..1000.0,
        c_hat in 0.5f64..100.0,
        h_uav in 10.0f64..300.0,
    ) {
        let bm = BuildingModel { a_hat, b_hat, c_hat };
        for v in [LosVariant::AsWritten, LosVariant::Corrected] {
            let p = los_probability(z, h_uav, 2.0, &bm, v);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(los_probability(z + 50.0, h_uav, 2.0, &bm, v) <= p + 1e-15);
        }
    }

    #[test]
    fn mixture_variants_agree_overhead(h in 0.0f64..300.0) {
        // Zero horizontal range: τ_L = 1 for both variants.
        let d = h.max(1.0);
        let bm = BuildingModel::default();
        let a = mixture_path_loss(d, 0.0, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::AsWritten).unwrap();
        let b = mixture_path_loss(d, 0.0, 120.0, 2.0, 2.09, 3.75, &bm, LosVariant::Corrected).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn path_loss_models_are_pure(x in 0.0f64..1000.0, y in 0.0f64..1000.0) {
        let tx = Point3::new(500.0, 500.0, 120.0);
        let rx = Point3::new(x, y, 2.0);
        for m in [PathLossModel::Ohplm, PathLossModel::Fspl, PathLossModel::Mplm(MixtureParams::default())] {
            let a = m.loss_db(tx, rx, 1500.0, 2.09, 3.75).unwrap();
            prop_assert_eq!(a, m.loss_db(tx, rx, 1500.0, 2.09, 3.75).unwrap());
        }
    }

    #[test]
    fn aggregation_ignores_realization_order(mut v in prop::collection::vec(0.0f64..5.0, 2..40), seed in any::<u64>()) {
        let a = summarize(&v);
        let n = v.len();
        v.rotate_left((seed % n as u64) as usize);
        v.swap(0, n - 1);
        let b = summarize(&v);
        prop_assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs().max(1.0));
        prop_assert!((a.stderr - b.stderr).abs() <= 1e-12 * a.stderr.max(1.0));
    }
}

#[test]
fn ue_count_mean_over_ten_thousand_seeds() {
    let c = PhysicalConfig::default();
    let m = Mission::default();
    let total: usize = (0..10_000u64).map(|s| generate_scenario(&c, &m, s).unwrap().ue_positions.len()).sum();
    let mean = total as f64 / 10_000.0;
    assert!((mean - 100.0).abs() <= 1.0, "mean UE count {mean}");
}

fn poisson_pmf(mean: f64, kmax: usize) -> Vec<f64> {
    let mut p = vec![(-mean).exp()];
    for k in 1..=kmax {
        p.push(p[k - 1] * mean / k as f64);
    }
    p
}

/// Pearson statistic over bins `lo..=hi` plus one tail bin `> hi`.
fn chi_square(counts: &[u64], probs: &[f64], lo: usize, hi: usize, n: f64) -> f64 {
    let mut stat = 0.0;
    for (k, &pk) in probs.iter().enumerate().take(hi + 1).skip(lo) {
        let e = n * pk;
        let o = counts.get(k).copied().unwrap_or(0) as f64;
        stat += (o - e).powi(2) / e;
    }
    let tail_p = 1.0 - probs[lo..=hi].iter().sum::<f64>();
    let tail_o: u64 = counts.iter().skip(hi + 1).sum();
    stat + (tail_o as f64 - n * tail_p).powi(2) / (n * tail_p)
}

fn histogram(values: impl Iterator<Item = usize>) -> Vec<u64> {
    let mut h = Vec::new();
    for v in values {
        if h.len() <= v {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
    }
    h
}

#[test]
fn mbs_draw_count_is_poisson_four() {
    let area = Mission::default().area_ue;
    let counts = histogram((0..10_000u64).map(|s| draw_ppp(&mut rng_from_seed(s), 4.0, &area).len()));
    let pmf = poisson_pmf(4.0, 10);
    let stat = chi_square(&counts, &pmf, 0, 10, 10_000.0);
    // 12 bins, 11 degrees of freedom, 1% level.
    assert!(stat < 24.725, "chi-square {stat}");
}

#[test]
fn scenario_mbs_count_is_zero_truncated_poisson() {
    // Empty draws are redrawn, so the scenario count is Poisson(4) given ≥ 1.
    let c = PhysicalConfig::default();
    let m = Mission::default();
    let counts = histogram((0..10_000u64).map(|s| generate_scenario(&c, &m, s).unwrap().mbs_positions.len()));
    assert_eq!(counts[0], 0);
    let raw = poisson_pmf(4.0, 10);
    let keep = 1.0 - raw[0];
    let pmf: Vec<f64> = raw.iter().enumerate().map(|(k, p)| if k == 0 { 0.0 } else { p / keep }).collect();
    let stat = chi_square(&counts, &pmf, 1, 10, 10_000.0);
    // 11 bins, 10 degrees of freedom, 1% level.
    assert!(stat < 23.209, "chi-square {stat}");
}

#[test]
fn count_depends_only_on_the_mean() {
    for seed in 0..2000u64 {
        let a = poisson(&mut rng_from_seed(seed), 4.0);
        let small = Rect::new(Point2::new(0.0, 0.0), Point2::new(500.0, 500.0));
        let big = Rect::new(Point2::new(0.0, 0.0), Point2::new(1000.0, 1000.0));
        let b = draw_ppp(&mut rng_from_seed(seed), 16.0, &small).len() as u64;
        let c = draw_ppp(&mut rng_from_seed(seed), 4.0, &big).len() as u64;
        assert_eq!((a, a), (b, c));
    }
}
