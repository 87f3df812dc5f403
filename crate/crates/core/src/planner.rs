//! Backward-induction trajectory planner on the waypoint lattice, and a
//! brute-force enumerator used to check it.
//!
//! A stage reward is collected for the cell the UAV occupies during each of
//! the N stages; position N must be the finish cell. The value of a path is
//! the right fold `r(s_0) + (r(s_1) + (… + (r(s_{N−1}) + 0)))`, which is
//! exactly what the Bellman sweep produces in floating point, so the two
//! solvers agree bit for bit.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid::{Cell, Lattice};
use crate::scenario::Mission;

/// The nine stage actions, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Hover,
    East,
    North,
    West,
    South,
    NorthEast,
    NorthWest,
    SouthWest,
    SouthEast,
}

impl Action {
    pub const ALL: [Action; 9] = [
        Action::Hover,
        Action::East,
        Action::North,
        Action::West,
        Action::South,
        Action::NorthEast,
        Action::NorthWest,
        Action::SouthWest,
        Action::SouthEast,
    ];

    pub fn offset(&self) -> (i32, i32) {
        match self {
            Action::Hover => (0, 0),
            Action::East => (1, 0),
            Action::North => (0, 1),
            Action::West => (-1, 0),
            Action::South => (0, -1),
            Action::NorthEast => (1, 1),
            Action::NorthWest => (-1, 1),
            Action::SouthWest => (-1, -1),
            Action::SouthEast => (1, -1),
        }
    }

    /// Heading in degrees counter-clockwise from east; 0 for hover.
    pub fn heading_deg(&self) -> f64 {
        match self {
            Action::Hover | Action::East => 0.0,
            Action::NorthEast => 45.0,
            Action::North => 90.0,
            Action::NorthWest => 135.0,
            Action::West => 180.0,
            Action::SouthWest => 225.0,
            Action::South => 270.0,
            Action::SouthEast => 315.0,
        }
    }

    /// Ground speed that covers the move in one stage. Diagonals are kept
    /// lattice-exact at `cell √2 / δ` (17.68 m/s for 100 m and 8 s).
    pub fn speed(&self, cell_m: f64, stage_s: f64) -> f64 {
        let (dx, dy) = self.offset();
        cell_m * f64::from(dx * dx + dy * dy).sqrt() / stage_s
    }
}

/// Actions available at every stage plus the kinematics they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    pub actions: Vec<Action>,
    pub cell_m: f64,
    pub stage_s: f64,
}

// Table speeds are quoted to three significant figures (17.7 for 17.677…).
const SPEED_TOL: f64 = 0.05;

impl ActionSet {
    pub fn standard(cell_m: f64, stage_s: f64) -> Self {
        Self { actions: Action::ALL.to_vec(), cell_m, stage_s }
    }

    pub fn max_speed(&self) -> f64 {
        self.actions.iter().map(|a| a.speed(self.cell_m, self.stage_s)).fold(0.0, f64::max)
    }

    /// Check every action against the speed limit, allowing for the rounding
    /// of the quoted limit.
    pub fn check_speed(&self, v_max: f64) -> Result<()> {
        let top = self.max_speed();
        if top > v_max + SPEED_TOL {
            return Err(Error::InvalidParameter(format!(
                "fastest action needs {top:.3} m/s, above v_max = {v_max} m/s"
            )));
        }
        Ok(())
    }
}

/// Lattice, horizon, and mission endpoints for one planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    pub lattice: Lattice,
    pub stages: usize,
    pub start: Cell,
    pub finish: Cell,
}

impl StateGrid {
    pub fn for_mission(mission: &Mission, cell_m: f64) -> Result<Self> {
        let lattice = Lattice::covering(&mission.area_uav, cell_m)?;
        let on_grid = |p: Point2, what: &str| {
            lattice.cell_at(p).ok_or_else(|| {
                Error::InvalidParameter(format!("mission {what} ({}, {}) is not a lattice point", p.x, p.y))
            })
        };
        Ok(Self {
            lattice,
            stages: mission.stages()?,
            start: on_grid(mission.start, "start")?,
            finish: on_grid(mission.finish, "finish")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// N + 1 cells, first = start, last = finish.
    pub cells: Vec<Cell>,
    pub positions: Vec<Point2>,
    /// N actions; action i moves from cell i to cell i + 1.
    pub actions: Vec<Action>,
    /// Stage reward collected at cells 0..N.
    pub stage_rewards: Vec<f64>,
    pub value: f64,
}

impl Trajectory {
    pub fn stages(&self) -> usize {
        self.actions.len()
    }

    pub fn hover_stages(&self) -> usize {
        self.actions.iter().filter(|a| **a == Action::Hover).count()
    }

    fn from_actions(grid: &StateGrid, rewards: &[f64], actions: Vec<Action>, value: f64) -> Self {
        let mut cells = Vec::with_capacity(actions.len() + 1);
        let mut c = grid.start;
        cells.push(c);
        for a in &actions {
            let (dx, dy) = a.offset();
            c = grid.lattice.offset(c, dx, dy).expect("action stays on the lattice");
            cells.push(c);
        }
        let positions = cells.iter().map(|&c| grid.lattice.position(c)).collect();
        let stage_rewards = cells[..actions.len()].iter().map(|&c| rewards[grid.lattice.index(c)]).collect();
        Self { cells, positions, actions, stage_rewards, value }
    }

    pub fn write_csv<W: std::io::Write>(&self, stage_s: f64, cell_m: f64, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            stage: usize,
            t: f64,
            x: f64,
            y: f64,
            v: Option<f64>,
            heading: Option<f64>,
            stage_reward: Option<f64>,
        }
        let mut out = csv::Writer::from_writer(w);
        for (i, p) in self.positions.iter().enumerate() {
            let a = self.actions.get(i);
            out.serialize(Row {
                stage: i,
                t: i as f64 * stage_s,
                x: p.x,
                y: p.y,
                v: a.map(|a| a.speed(cell_m, stage_s)),
                heading: a.map(|a| a.heading_deg()),
                stage_reward: self.stage_rewards.get(i).copied(),
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Per-stage value function `J_i(s)`, `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub stages: Vec<Vec<f64>>,
}

fn check_rewards(rewards: &[f64], grid: &StateGrid) -> Result<()> {
    if rewards.len() != grid.lattice.len() {
        return Err(Error::InvalidParameter(format!(
            "reward map has {} cells, lattice has {}",
            rewards.len(),
            grid.lattice.len()
        )));
    }
    if let Some(i) = rewards.iter().position(|r| !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("reward at cell {i} is not finite")));
    }
    Ok(())
}

/// Backward Bellman sweep. Returns the value function of every stage.
pub fn value_function(rewards: &[f64], grid: &StateGrid, actions: &ActionSet) -> Result<ValueFunction> {
    check_rewards(rewards, grid)?;
    let lattice = &grid.lattice;
    let n = grid.stages;
    let mut stages = vec![vec![f64::NEG_INFINITY; lattice.len()]; n + 1];
    stages[n][lattice.index(grid.finish)] = 0.0;
    for i in (0..n).rev() {
        let (head, tail) = stages.split_at_mut(i + 1);
        let next = &tail[0];
        let cur = &mut head[i];
        for (s, slot) in cur.iter_mut().enumerate() {
            let cell = lattice.cell(s);
            let best = actions
                .actions
                .iter()
                .filter_map(|a| {
                    let (dx, dy) = a.offset();
                    lattice.offset(cell, dx, dy).map(|c| next[lattice.index(c)])
                })
                .fold(f64::NEG_INFINITY, f64::max);
            *slot = if best == f64::NEG_INFINITY { best } else { rewards[s] + best };
        }
    }
    Ok(ValueFunction { stages })
}

/// Optimal trajectory by backward induction. Among equally valued actions
/// the one listed first in `actions` wins, which yields the lexicographically
/// first optimal action sequence.
pub fn solve_dp(rewards: &[f64], grid: &StateGrid, actions: &ActionSet) -> Result<Trajectory> {
    let report = min_stages(grid, actions);
    match report {
        Some(req) if req <= grid.stages => {}
        Some(req) => return Err(Error::Unreachable { required: req, available: grid.stages }),
        None => return Err(Error::Unreachable { required: usize::MAX, available: grid.stages }),
    }
    let vf = value_function(rewards, grid, actions)?;
    let lattice = &grid.lattice;
    let mut chosen = Vec::with_capacity(grid.stages);
    let mut cell = grid.start;
    for i in 0..grid.stages {
        let next = &vf.stages[i + 1];
        let mut best: Option<(Action, Cell, f64)> = None;
        for &a in &actions.actions {
            let (dx, dy) = a.offset();
            if let Some(c) = lattice.offset(cell, dx, dy) {
                let v = next[lattice.index(c)];
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((a, c, v));
                }
            }
        }
        let (a, c, _) = best.expect("reachable state has a successor");
        chosen.push(a);
        cell = c;
    }
    let value = vf.stages[0][lattice.index(grid.start)];
    Ok(Trajectory::from_actions(grid, rewards, chosen, value))
}

/// Exhaustive search over every action sequence of length N, for checking
/// [`solve_dp`] on small instances. Fails if `|actions|^N > max_states`.
pub fn enumerate_paths(rewards: &[f64], grid: &StateGrid, actions: &ActionSet, max_states: u128) -> Result<Trajectory> {
    check_rewards(rewards, grid)?;
    let size = (actions.actions.len() as u128).checked_pow(grid.stages as u32).unwrap_or(u128::MAX);
    if size > max_states {
        return Err(Error::SearchSpaceExceeded { size, bound: max_states });
    }

    struct Search<'a> {
        rewards: &'a [f64],
        grid: &'a StateGrid,
        actions: &'a ActionSet,
        path: Vec<(Action, Cell)>,
        best: Option<(f64, Vec<Action>)>,
    }

    impl Search<'_> {
        fn visit(&mut self, cell: Cell) {
            if self.path.len() == self.grid.stages {
                if cell != self.grid.finish {
                    return;
                }
                // right fold over the visited cells
                let lattice = &self.grid.lattice;
                let mut cells = Vec::with_capacity(self.path.len());
                cells.push(self.grid.start);
                cells.extend(self.path.iter().map(|&(_, c)| c));
                cells.pop();
                let value = cells.iter().rev().fold(0.0, |acc, &c| self.rewards[lattice.index(c)] + acc);
                if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                    self.best = Some((value, self.path.iter().map(|&(a, _)| a).collect()));
                }
                return;
            }
            for &a in &self.actions.actions {
                let (dx, dy) = a.offset();
                if let Some(next) = self.grid.lattice.offset(cell, dx, dy) {
                    self.path.push((a, next));
                    self.visit(next);
                    self.path.pop();
                }
            }
        }
    }

    let mut search = Search { rewards, grid, actions, path: Vec::with_capacity(grid.stages), best: None };
    search.visit(grid.start);
    match search.best {
        Some((value, seq)) => Ok(Trajectory::from_actions(grid, rewards, seq, value)),
        None => Err(Error::Unreachable {
            required: min_stages(grid, actions).unwrap_or(usize::MAX),
            available: grid.stages,
        }),
    }
}

/// Fewest stages from start to finish under the action set (breadth-first).
fn min_stages(grid: &StateGrid, actions: &ActionSet) -> Option<usize> {
    let lattice = &grid.lattice;
    let mut dist = vec![usize::MAX; lattice.len()];
    let mut queue = VecDeque::new();
    dist[lattice.index(grid.start)] = 0;
    queue.push_back(grid.start);
    while let Some(c) = queue.pop_front() {
        let d = dist[lattice.index(c)];
        if c == grid.finish {
            return Some(d);
        }
        for a in &actions.actions {
            let (dx, dy) = a.offset();
            if let Some(n) = lattice.offset(c, dx, dy) {
                let slot = &mut dist[lattice.index(n)];
                if *slot == usize::MAX {
                    *slot = d + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `None` when the finish cannot be reached at all.
    pub min_stages: Option<usize>,
    pub available: usize,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.min_stages.is_some_and(|m| m <= self.available)
    }

    /// Stages left over for detours and hovering (negative if infeasible).
    pub fn slack(&self) -> Option<i64> {
        self.min_stages.map(|m| self.available as i64 - m as i64)
    }
}

pub fn feasibility_check(mission: &Mission, lattice: &Lattice, actions: &ActionSet) -> Result<FeasibilityReport> {
    let locate = |p: Point2| {
        lattice
            .cell_at(p)
            .ok_or_else(|| Error::InvalidParameter(format!("({}, {}) is not a lattice point", p.x, p.y)))
    };
    let grid = StateGrid {
        lattice: *lattice,
        stages: mission.stages()?,
        start: locate(mission.start)?,
        finish: locate(mission.finish)?,
    };
    Ok(FeasibilityReport { min_stages: min_stages(&grid, actions), available: grid.stages })
}
