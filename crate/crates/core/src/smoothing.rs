//! Bezier smoothing of lattice trajectories.
//!
//! Every DP waypoint becomes one control point of a single Bezier curve, and
//! stage j is mapped to the curve parameter t = j / N. Repeated hover
//! waypoints pull the curve toward the hover point, so the smoothed UAV
//! slows down there instead of stopping dead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::planner::Trajectory;

/// Binomial coefficient as a double; exact for the small degrees it is used at.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bernstein basis polynomial `C(n, i) (1 − t)^(n − i) t^i`.
pub fn bernstein(i: usize, n: usize, t: f64) -> Result<f64> {
    if i > n {
        return Err(Error::InvalidParameter(format!("Bernstein index {i} exceeds degree {n}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("Bernstein parameter {t} outside [0, 1]")));
    }
    Ok(binomial(n, i) * (1.0 - t).powi((n - i) as i32) * t.powi(i as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    pub control_points: Vec<Point2>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point2>) -> Result<Self> {
        if control_points.is_empty() {
            return Err(Error::Empty("Bezier control points"));
        }
        Ok(Self { control_points })
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    /// Point at parameter `t` by de Casteljau's algorithm. The recursion runs
    /// on offsets from the first control point, so a degenerate curve (all
    /// points equal) evaluates to that point exactly.
    pub fn eval(&self, t: f64) -> Point2 {
        let base = self.control_points[0];
        let mut pts: Vec<(f64, f64)> =
            self.control_points.iter().map(|p| (p.x - base.x, p.y - base.y)).collect();
        let s = 1.0 - t;
        for level in (1..pts.len()).rev() {
            for i in 0..level {
                pts[i] = (s * pts[i].0 + t * pts[i + 1].0, s * pts[i].1 + t * pts[i + 1].1);
            }
        }
        Point2::new(base.x + pts[0].0, base.y + pts[0].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTrajectory {
    pub source: Trajectory,
    pub curve: BezierCurve,
    /// Curve positions at the N + 1 stage boundaries.
    pub samples: Vec<Point2>,
    /// Chord speed between consecutive samples (m/s), N entries.
    pub speeds: Vec<f64>,
    pub stage_s: f64,
    pub v_max: f64,
}

impl SmoothedTrajectory {
    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().copied().fold(0.0, f64::max)
    }

    /// Stages whose implied speed exceeds the limit.
    pub fn speed_violations(&self) -> Vec<usize> {
        self.speeds
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > self.v_max + 1e-9)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        self.speed_violations().is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            t: f64,
            x: f64,
            y: f64,
            speed: Option<f64>,
        }
        let mut out = csv::Writer::from_writer(w);
        for (j, p) in self.samples.iter().enumerate() {
            out.serialize(Row {
                t: j as f64 * self.stage_s,
                x: p.x,
                y: p.y,
                speed: self.speeds.get(j).copied(),
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Fit one Bezier curve through the trajectory's waypoints (as control points)
/// and sample it at the stage boundaries. Speed violations are reported on
/// the result, never repaired.
pub fn smooth(traj: &Trajectory, stage_s: f64, v_max: f64) -> Result<SmoothedTrajectory> {
    if traj.positions.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "smoothing needs at least 2 waypoints, got {}",
            traj.positions.len()
        )));
    }
    let curve = BezierCurve::new(traj.positions.clone())?;
    let n = curve.degree();
    let mut samples: Vec<Point2> = (0..=n).map(|j| curve.eval(j as f64 / n as f64)).collect();
    // endpoints pinned to the mission points exactly
    samples[0] = traj.positions[0];
    samples[n] = traj.positions[n];
    let speeds = samples.windows(2).map(|w| w[0].distance(w[1]) / stage_s).collect();
    let out = SmoothedTrajectory { source: traj.clone(), curve, samples, speeds, stage_s, v_max };
    if !out.is_feasible() {
        log::warn!(
            "smoothed trajectory exceeds v_max at {} stage(s), peak {:.3} m/s",
            out.speed_violations().len(),
            out.max_speed()
        );
    }
    Ok(out)
}
