//! The nuclear-waste-collector grid world.
//!
//! Agents move one cell north, east, south or west on a bounded grid and
//! collect whatever waste lies on the cell they enter. Each agent is protected
//! by the 3×3 block of cells around it; `lap<j>/2` holds of two agents whose
//! blocks share exactly `j` cells.
//!
//! Coordinates: `x` is the column and grows east, `y` is the row and grows north.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::condition::{AgentId, Condition, Interpretation, ProbeUniverse};
use crate::engine::World;
use crate::normative::Norm;
use crate::positions::{Consequence, Position};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell { x: self.x + dx, y: self.y + dy }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// `Surr_n(cell)`: the cells within Chebyshev distance `n`, on the unbounded plane.
pub fn surrounding(cell: Cell, n: u32) -> Vec<Cell> {
    let n = n as i32;
    let mut out = Vec::with_capacity(((2 * n + 1) * (2 * n + 1)) as usize);
    for x in cell.x - n..=cell.x + n {
        for y in cell.y - n..=cell.y + n {
            out.push(Cell::new(x, y));
        }
    }
    out
}

/// Number of cells shared by the 3×3 blocks around `a` and `b`.
pub fn overlap(a: Cell, b: Cell) -> u32 {
    let side = |d: i32| (3 - d.abs()).max(0) as u32;
    side(a.x - b.x) * side(a.y - b.y)
}

/// Overlap values two blocks can have.
pub const ATTAINABLE_OVERLAPS: [u32; 7] = [0, 1, 2, 3, 4, 6, 9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WasteAction {
    North,
    East,
    South,
    West,
    Pass,
}

impl WasteAction {
    pub const ALL: [WasteAction; 5] =
        [WasteAction::North, WasteAction::East, WasteAction::South, WasteAction::West, WasteAction::Pass];

    pub fn name(self) -> &'static str {
        match self {
            WasteAction::North => "north",
            WasteAction::East => "east",
            WasteAction::South => "south",
            WasteAction::West => "west",
            WasteAction::Pass => "pass",
        }
    }

    pub fn from_name(name: &str) -> Option<WasteAction> {
        WasteAction::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            WasteAction::North => (0, 1),
            WasteAction::East => (1, 0),
            WasteAction::South => (0, -1),
            WasteAction::West => (-1, 0),
            WasteAction::Pass => (0, 0),
        }
    }
}

impl fmt::Display for WasteAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Positions π, waste γ and collected amounts σ.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    width: u32,
    height: u32,
    positions: BTreeMap<AgentId, Cell>,
    /// Cells with a positive amount only.
    waste: BTreeMap<Cell, f64>,
    collected: BTreeMap<AgentId, f64>,
}

impl GridState {
    /// A validated state; every positioned agent starts with nothing collected.
    pub fn new(
        width: u32,
        height: u32,
        positions: impl IntoIterator<Item = (AgentId, Cell)>,
        waste: impl IntoIterator<Item = (Cell, f64)>,
    ) -> Result<Self> {
        let positions: BTreeMap<AgentId, Cell> = positions.into_iter().collect();
        let collected = positions.keys().map(|&a| (a, 0.0)).collect();
        Self::with_collected(width, height, positions, waste, collected)
    }

    pub fn with_collected(
        width: u32,
        height: u32,
        positions: BTreeMap<AgentId, Cell>,
        waste: impl IntoIterator<Item = (Cell, f64)>,
        collected: BTreeMap<AgentId, f64>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidState(msg));
        if width == 0 || height == 0 || width > i32::MAX as u32 || height > i32::MAX as u32 {
            return invalid(alloc::format!("grid {width}×{height} is empty or too large"));
        }
        let mut state = GridState { width, height, positions, waste: BTreeMap::new(), collected };
        for (&a, &c) in &state.positions {
            if !state.in_bounds(c) {
                return invalid(alloc::format!("agent {a} at {c} is outside the grid"));
            }
            if let Some((&b, _)) = state.positions.iter().find(|(&b, &d)| b < a && d == c) {
                return invalid(alloc::format!("agents {b} and {a} share cell {c}"));
            }
        }
        for (cell, amount) in waste {
            if !state.in_bounds(cell) {
                return invalid(alloc::format!("waste at {cell} is outside the grid"));
            }
            if !amount.is_finite() || amount < 0.0 {
                return invalid(alloc::format!("waste at {cell} must be finite and non-negative, got {amount}"));
            }
            if amount > 0.0 {
                *state.waste.entry(cell).or_insert(0.0) += amount;
            }
        }
        for (&a, &v) in &state.collected {
            if !state.positions.contains_key(&a) {
                return invalid(alloc::format!("collected amount for unplaced agent {a}"));
            }
            if !v.is_finite() || v < 0.0 {
                return invalid(alloc::format!("collected amount of {a} must be finite and non-negative"));
            }
        }
        for &a in state.positions.keys() {
            state.collected.entry(a).or_insert(0.0);
        }
        Ok(state)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as u32) < self.width && (c.y as u32) < self.height
    }

    pub fn position(&self, agent: AgentId) -> Option<Cell> {
        self.positions.get(&agent).copied()
    }

    pub fn positions(&self) -> &BTreeMap<AgentId, Cell> {
        &self.positions
    }

    pub fn occupant(&self, c: Cell) -> Option<AgentId> {
        self.positions.iter().find(|(_, &p)| p == c).map(|(&a, _)| a)
    }

    pub fn waste_at(&self, c: Cell) -> f64 {
        self.waste.get(&c).copied().unwrap_or(0.0)
    }

    /// Cells holding waste, in cell order.
    pub fn waste(&self) -> &BTreeMap<Cell, f64> {
        &self.waste
    }

    pub fn collected(&self, agent: AgentId) -> f64 {
        self.collected.get(&agent).copied().unwrap_or(0.0)
    }

    pub fn collected_all(&self) -> &BTreeMap<AgentId, f64> {
        &self.collected
    }

    pub fn total_waste(&self) -> f64 {
        self.waste.values().sum()
    }

    pub fn total_collected(&self) -> f64 {
        self.collected.values().sum()
    }

    /// Overlap of the two agents' blocks, if both are placed.
    pub fn overlap_of(&self, a: AgentId, b: AgentId) -> Option<u32> {
        Some(overlap(self.position(a)?, self.position(b)?))
    }

    /// Moves `agent` by `action` and collects the waste of the cell entered.
    /// Does not check feasibility.
    pub fn moved(&self, agent: AgentId, action: WasteAction) -> GridState {
        let mut next = self.clone();
        if action == WasteAction::Pass {
            return next;
        }
        let Some(from) = self.position(agent) else { return next };
        let (dx, dy) = action.delta();
        let to = from.offset(dx, dy);
        next.positions.insert(agent, to);
        if let Some(amount) = next.waste.remove(&to) {
            *next.collected.entry(agent).or_insert(0.0) += amount;
        }
        next
    }

    /// Stable byte encoding: dimensions, positions, waste and collected amounts
    /// in key order, numbers little-endian, reals by their bit patterns.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&(self.positions.len() as u64).to_le_bytes());
        for (a, c) in &self.positions {
            out.extend_from_slice(&a.0.to_le_bytes());
            out.extend_from_slice(&c.x.to_le_bytes());
            out.extend_from_slice(&c.y.to_le_bytes());
        }
        out.extend_from_slice(&(self.waste.len() as u64).to_le_bytes());
        for (c, v) in &self.waste {
            out.extend_from_slice(&c.x.to_le_bytes());
            out.extend_from_slice(&c.y.to_le_bytes());
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        out.extend_from_slice(&(self.collected.len() as u64).to_le_bytes());
        for (a, v) in &self.collected {
            out.extend_from_slice(&a.0.to_le_bytes());
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        out
    }
}

/// `lap0/2` … `lap9/2` and `distinct/2` over grid states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WasteAtoms;

impl WasteAtoms {
    fn lap_index(name: &str) -> Option<u32> {
        let j: u32 = name.strip_prefix("lap")?.parse().ok()?;
        (j <= 9 && name.len() == 4).then_some(j)
    }
}

impl Interpretation for WasteAtoms {
    type State = GridState;

    fn atom_arity(&self, name: &str) -> Option<usize> {
        (name == "distinct" || Self::lap_index(name).is_some()).then_some(2)
    }

    fn eval_atom(&self, name: &str, tuple: &[AgentId], state: &GridState) -> bool {
        if name == "distinct" {
            return tuple[0] != tuple[1];
        }
        match (Self::lap_index(name), state.overlap_of(tuple[0], tuple[1])) {
            (Some(j), Some(v)) => v == j,
            _ => false,
        }
    }
}

/// `lap<j>/2`.
pub fn lap(j: u32) -> Condition {
    Condition::atom(alloc::format!("lap{j}"), 2)
}

/// The non-identity condition `distinct/2`.
pub fn distinct() -> Condition {
    Condition::atom("distinct", 2)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Utility {
    /// `U_ω(s) = σ(ω)`.
    #[default]
    Collected,
    /// `U_ω(s) = k·σ(ω)`.
    Scaled(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WasteWorld {
    agents: Vec<AgentId>,
    pass_enabled: bool,
    utility: Utility,
}

impl WasteWorld {
    pub fn new(agents: Vec<AgentId>) -> Self {
        WasteWorld { agents, pass_enabled: false, utility: Utility::Collected }
    }

    pub fn with_pass(mut self, enabled: bool) -> Self {
        self.pass_enabled = enabled;
        self
    }

    pub fn with_utility(mut self, utility: Utility) -> Self {
        self.utility = utility;
        self
    }

    pub fn pass_enabled(&self) -> bool {
        self.pass_enabled
    }

    pub fn utility_kind(&self) -> Utility {
        self.utility
    }
}

impl Interpretation for WasteWorld {
    type State = GridState;

    fn atom_arity(&self, name: &str) -> Option<usize> {
        WasteAtoms.atom_arity(name)
    }

    fn eval_atom(&self, name: &str, tuple: &[AgentId], state: &GridState) -> bool {
        WasteAtoms.eval_atom(name, tuple, state)
    }
}

impl World for WasteWorld {
    type Action = WasteAction;

    fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    /// Moves into unoccupied in-bounds cells, then pass if enabled.
    fn feasible(&self, mover: AgentId, state: &GridState) -> Vec<WasteAction> {
        let Some(from) = state.position(mover) else { return Vec::new() };
        let mut out: Vec<WasteAction> = WasteAction::ALL[..4]
            .iter()
            .copied()
            .filter(|a| {
                let (dx, dy) = a.delta();
                let to = from.offset(dx, dy);
                state.in_bounds(to) && state.occupant(to).is_none()
            })
            .collect();
        if self.pass_enabled {
            out.push(WasteAction::Pass);
        }
        out
    }

    fn apply(&self, action: WasteAction, mover: AgentId, state: &GridState) -> GridState {
        state.moved(mover, action)
    }

    fn utility(&self, agent: AgentId, state: &GridState) -> f64 {
        match self.utility {
            Utility::Collected => state.collected(agent),
            Utility::Scaled(k) => k * state.collected(agent),
        }
    }
}

/// Every injective placement of `agents` agents on a `width`×`height` grid, without waste.
///
/// Placements are enumerated with the first agent's cell varying slowest,
/// cells in (x, y) order. Agents are `#0`, `#1`, ….
pub fn probe_universe(width: u32, height: u32, agents: u32) -> ProbeUniverse<WasteAtoms> {
    let ids: Vec<AgentId> = (0..agents).map(AgentId).collect();
    let cells: Vec<Cell> = (0..width as i32).flat_map(|x| (0..height as i32).map(move |y| Cell::new(x, y))).collect();
    let mut states = Vec::new();
    let mut current: Vec<Cell> = Vec::new();
    fn place(cells: &[Cell], ids: &[AgentId], current: &mut Vec<Cell>, out: &mut Vec<GridState>, w: u32, h: u32) {
        if current.len() == ids.len() {
            let state = GridState::new(w, h, ids.iter().copied().zip(current.iter().copied()), [])
                .expect("distinct in-bounds cells");
            out.push(state);
            return;
        }
        for &c in cells {
            if !current.contains(&c) {
                current.push(c);
                place(cells, ids, current, out, w, h);
                current.pop();
            }
        }
    }
    place(&cells, &ids, &mut current, &mut states, width, height);
    ProbeUniverse::new(ids, states, WasteAtoms)
}

/// `T_1 d ∨ T_2 d ∨ T_3 d ∨ T_5 d`: the types in which doing `d` is permitted.
fn may_do(d: Condition) -> Consequence {
    Consequence::any_of(&[Position::T1, Position::T2, Position::T3, Position::T5], &d)
}

/// `T_4 d ∨ T_6 d ∨ T_7 d`: the types in which doing `d` is not permitted.
fn may_not_do(d: Condition) -> Consequence {
    Consequence::any_of(&[Position::T4, Position::T6, Position::T7], &d)
}

/// The eleven norms of the reference normative system, ids `"1"` to `"11"`.
///
/// Norms 5 and 6 quantify over every `j` in 0..=9; each is represented as the
/// conjunction of its ten instances.
pub fn builtin_norms() -> Vec<Norm> {
    let each_j = || Consequence::all((0..=9).map(|j| may_do(lap(j)))).expect("ten instances");
    alloc::vec![
        Norm::new("1", lap(0), may_not_do(lap(2))).with_note("n1"),
        Norm::new("2", lap(0), may_not_do(lap(3))).with_note("n1"),
        Norm::new("3", lap(0), may_do(lap(0))).with_note("n2"),
        Norm::new("4", lap(0), may_do(lap(1))).with_note("n2"),
        Norm::new("5", lap(1), each_j()).with_note("n3"),
        Norm::new("6", lap(2), each_j()).with_note("n3"),
        Norm::new(
            "7",
            Condition::all([Condition::not(lap(4)), Condition::not(lap(6)), Condition::not(lap(9))]).expect("three"),
            Consequence::typed(Position::T7, lap(6)),
        )
        .with_note("n4"),
        Norm::new("8", lap(4), Consequence::typed(Position::T7, lap(3))).with_note("n5"),
        Norm::new(
            "9",
            lap(6),
            Consequence::typed(Position::T5, Condition::any([lap(4), lap(6), lap(9)]).expect("three")),
        )
        .with_note("n6"),
        Norm::new("10", distinct(), Consequence::typed(Position::T7, lap(9))).with_note("n7"),
        Norm::new("11", Condition::top(2), may_do(lap(0))).with_note("n8"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::evaluate;

    #[test]
    fn surroundings() {
        let p = Cell::new(3, 3);
        assert_eq!(surrounding(p, 0), alloc::vec![p]);
        assert_eq!(surrounding(p, 1).len(), 9);
        assert_eq!(surrounding(p, 2).len(), 25);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(Cell::new(0, 0), Cell::new(2, 1)), 2);
        assert_eq!(overlap(Cell::new(2, 1), Cell::new(2, 2)), 6);
        assert_eq!(overlap(Cell::new(1, 1), Cell::new(1, 1)), 9);
        assert_eq!(overlap(Cell::new(0, 0), Cell::new(5, 5)), 0);
    }

    #[test]
    fn east_collects_at_new_cell() {
        let a = AgentId(0);
        let s = GridState::new(5, 5, [(a, Cell::new(1, 1))], [(Cell::new(2, 1), 5.0)]).unwrap();
        let t = s.moved(a, WasteAction::East);
        assert_eq!(t.position(a), Some(Cell::new(2, 1)));
        assert_eq!(t.collected(a), 5.0);
        assert_eq!(t.waste_at(Cell::new(2, 1)), 0.0);
        assert_eq!(s.moved(a, WasteAction::Pass), s);
    }

    #[test]
    fn feasibility_clips_and_excludes_occupied() {
        let (a, b) = (AgentId(0), AgentId(1));
        let w = WasteWorld::new(alloc::vec![a, b]);
        let s = GridState::new(5, 5, [(a, Cell::new(0, 0)), (b, Cell::new(4, 4))], []).unwrap();
        assert_eq!(w.feasible(a, &s), alloc::vec![WasteAction::North, WasteAction::East]);
        let s = GridState::new(5, 5, [(a, Cell::new(2, 2)), (b, Cell::new(3, 2))], []).unwrap();
        assert_eq!(w.feasible(a, &s), alloc::vec![WasteAction::North, WasteAction::South, WasteAction::West]);
        let w = w.with_pass(true);
        assert_eq!(w.feasible(b, &s).last(), Some(&WasteAction::Pass));
    }

    #[test]
    fn state_validation() {
        let a = AgentId(0);
        assert!(GridState::new(5, 5, [(a, Cell::new(5, 0))], []).is_err());
        assert!(GridState::new(5, 5, [(a, Cell::new(0, 0)), (AgentId(1), Cell::new(0, 0))], []).is_err());
        assert!(GridState::new(5, 5, [(a, Cell::new(0, 0))], [(Cell::new(1, 1), -1.0)]).is_err());
        assert!(GridState::new(5, 5, [(a, Cell::new(0, 0))], [(Cell::new(1, 1), f64::NAN)]).is_err());
        let s = GridState::new(5, 5, [(a, Cell::new(0, 0))], [(Cell::new(1, 1), 0.0)]).unwrap();
        assert!(s.waste().is_empty());
    }

    #[test]
    fn lap_atoms() {
        let (a, b) = (AgentId(0), AgentId(1));
        let s = GridState::new(5, 5, [(a, Cell::new(0, 0)), (b, Cell::new(2, 1))], []).unwrap();
        for j in 0..=9 {
            assert_eq!(evaluate(&lap(j), &[a, b], &s, &WasteAtoms).unwrap(), j == 2);
            assert_eq!(evaluate(&lap(j), &[a, a], &s, &WasteAtoms).unwrap(), j == 9);
        }
        assert!(WasteAtoms.atom_arity("lap10").is_none());
        assert!(WasteAtoms.atom_arity("lap01").is_none());
    }

    #[test]
    fn probe_universe_enumerates_injective_placements() {
        let u = probe_universe(3, 3, 2);
        assert_eq!(u.states().len(), 9 * 8);
        assert_eq!(probe_universe(2, 2, 3).states().len(), 24);
    }

    #[test]
    fn builtin_norm_shapes() {
        let norms = builtin_norms();
        assert_eq!(norms.len(), 11);
        let elementary: Vec<&str> = norms.iter().filter(|n| n.is_elementary()).map(|n| n.id.as_str()).collect();
        assert_eq!(elementary, ["7", "8", "9", "10"]);
        assert_eq!(norms[7].to_string(), "⟨Mlap4/2, T7(lap3/2)⟩");
    }
}
