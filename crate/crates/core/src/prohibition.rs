//! From norms to prohibited actions.
//!
//! Each position type `T2`–`T7` is turned into an elimination test `E_i` on the
//! pair (state before, state after the candidate action). An action is
//! prohibited in ⟨ω, s⟩ when some elementary norm `⟨Mc, T_i d⟩` has its ground
//! satisfied by an agent tuple with ω moving and `E_i d` holds for that tuple.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::condition::{evaluate, AgentId, Condition, Interpretation};
use crate::engine::World;
use crate::normative::Norm;
use crate::positions::{move_holds, Consequence, Position};
use crate::{Error, Result};

/// The elimination operators `E2`–`E7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElimOp {
    E2 = 2,
    E3 = 3,
    E4 = 4,
    E5 = 5,
    E6 = 6,
    E7 = 7,
}

impl ElimOp {
    /// The operator stipulated for a position type; `T1` restricts nothing.
    pub fn for_position(p: Position) -> Option<ElimOp> {
        match p {
            Position::T1 => None,
            Position::T2 => Some(ElimOp::E2),
            Position::T3 => Some(ElimOp::E3),
            Position::T4 => Some(ElimOp::E4),
            Position::T5 => Some(ElimOp::E5),
            Position::T6 => Some(ElimOp::E6),
            Position::T7 => Some(ElimOp::E7),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    /// Truth of `E_i d` given the truth of `d` before and after the action.
    pub fn holds(self, before: bool, after: bool) -> bool {
        match self {
            ElimOp::E2 => before && !after,
            ElimOp::E3 => before == after,
            ElimOp::E4 => !before && after,
            ElimOp::E5 => !after,
            ElimOp::E6 => before != after,
            ElimOp::E7 => after,
        }
    }
}

impl fmt::Display for ElimOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.index())
    }
}

/// `E_i d(tuple; before, after)`.
pub fn e_op<I: Interpretation>(
    op: ElimOp,
    d: &Condition,
    tuple: &[AgentId],
    before: &I::State,
    after: &I::State,
    interp: &I,
) -> Result<bool> {
    let b = evaluate(d, tuple, before, interp)?;
    let a = evaluate(d, tuple, after, interp)?;
    Ok(op.holds(b, a))
}

/// Whether `T_i d(tuple, mover; mover, state)` eliminates `action`.
pub fn stipulation_prohibits<W: World>(
    position: Position,
    d: &Condition,
    tuple: &[AgentId],
    mover: AgentId,
    action: W::Action,
    state: &W::State,
    world: &W,
) -> Result<bool> {
    match ElimOp::for_position(position) {
        None => Ok(false),
        Some(op) => {
            let after = world.apply(action, mover, state);
            e_op(op, d, tuple, state, &after, world)
        }
    }
}

/// How the ground's agent tuple is quantified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Quantification {
    /// Every tuple over the agent set, repeats and the mover included.
    #[default]
    Free,
    /// Only tuples whose first agent is the mover.
    MoverFirst,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ProhibitionOptions {
    pub quantification: Quantification,
    /// Also apply the disjunctive/conjunctive rules to non-elementary norms.
    pub extended: bool,
}

/// One `E_i d` that held for a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fired {
    pub position: Position,
    pub op: ElimOp,
    pub base: Condition,
}

/// Why an action is prohibited: the norm, the agent tuple that satisfied its
/// ground, and the elimination tests that held.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<A> {
    pub norm_id: String,
    pub tuple: Vec<AgentId>,
    pub action: A,
    pub fired: Vec<Fired>,
}

impl<A: Copy> Witness<A> {
    /// Re-evaluates the ground and every recorded `E_i` in ⟨mover, state⟩.
    pub fn replay<W: World<Action = A>>(
        &self,
        norms: &[Norm],
        mover: AgentId,
        state: &W::State,
        world: &W,
    ) -> Result<bool> {
        let norm = norms
            .iter()
            .find(|n| n.id == self.norm_id)
            .ok_or_else(|| Error::InvalidState(alloc::format!("unknown norm `{}`", self.norm_id)))?;
        if !move_holds(&norm.ground, &self.tuple, mover, mover, state, world)? {
            return Ok(false);
        }
        let after = world.apply(self.action, mover, state);
        for f in &self.fired {
            if !e_op(f.op, &f.base, &self.tuple, state, &after, world)? {
                return Ok(false);
            }
        }
        Ok(!self.fired.is_empty())
    }
}

/// Feasible, prohibited (with witnesses) and permissible actions in one situation.
#[derive(Clone, Debug, PartialEq)]
pub struct DeonticVerdict<A> {
    pub feasible: Vec<A>,
    pub prohibited: Vec<(A, Vec<Witness<A>>)>,
    pub permissible: Vec<A>,
}

impl<A: PartialEq> DeonticVerdict<A> {
    pub fn is_prohibited(&self, a: &A) -> bool {
        self.prohibited.iter().any(|(x, _)| x == a)
    }

    pub fn witnesses(&self, a: &A) -> &[Witness<A>] {
        self.prohibited.iter().find(|(x, _)| x == a).map_or(&[], |(_, w)| w.as_slice())
    }
}

/// Which `E` tests make `term` prohibit, or `None` when it does not.
///
/// A typed atom fires through its own operator; a disjunction fires when every
/// disjunct fires; a conjunction when any conjunct fires. `⊤_T` restricts nothing.
fn fires<I: Interpretation>(
    term: &Consequence,
    tuple: &[AgentId],
    before: &I::State,
    after: &I::State,
    interp: &I,
) -> Result<Option<Vec<Fired>>> {
    Ok(match term {
        Consequence::Typed(t) => match ElimOp::for_position(t.position) {
            None => None,
            Some(op) => e_op(op, &t.base, tuple, before, after, interp)?
                .then(|| alloc::vec![Fired { position: t.position, op, base: t.base.clone() }]),
        },
        Consequence::Or(a, b) => {
            let left = fires(a, tuple, before, after, interp)?;
            let right = fires(b, tuple, before, after, interp)?;
            match (left, right) {
                (Some(mut l), Some(r)) => {
                    l.extend(r);
                    Some(l)
                }
                _ => None,
            }
        }
        Consequence::And(a, b) => {
            let left = fires(a, tuple, before, after, interp)?;
            let right = fires(b, tuple, before, after, interp)?;
            match (left, right) {
                (None, None) => None,
                (l, r) => Some(l.into_iter().chain(r).flatten().collect()),
            }
        }
        Consequence::Top(_) => None,
        Consequence::Not(_) | Consequence::Bottom(_) => return Err(Error::UnsupportedConsequence(term.to_string())),
    })
}

/// Checks that every norm term fits the world before any situation is evaluated.
pub fn validate_norms<I: Interpretation>(norms: &[Norm], interp: &I) -> Result<()> {
    for n in norms {
        n.check_arity()?;
        crate::condition::check_atoms(n.ground.base(), interp)?;
        for t in n.consequence.typed_atoms() {
            crate::condition::check_atoms(&t.base, interp)?;
        }
    }
    Ok(())
}

/// `Prohibited_{ω,s}` over `feasible`, and `Δ(ω,s)` as its complement.
///
/// Evaluation order is norm order, then lexicographic agent tuple, then action
/// order, so witness lists are deterministic.
pub fn prohibited_set<W: World>(
    world: &W,
    norms: &[Norm],
    mover: AgentId,
    state: &W::State,
    feasible: &[W::Action],
    options: ProhibitionOptions,
) -> Result<DeonticVerdict<W::Action>> {
    let afters: Vec<W::State> = feasible.iter().map(|&a| world.apply(a, mover, state)).collect();
    let mut witnesses: Vec<Vec<Witness<W::Action>>> = feasible.iter().map(|_| Vec::new()).collect();
    let agents = world.agents();

    for norm in norms {
        if !norm.is_elementary() && !options.extended {
            continue;
        }
        let arity = norm.ground.base().checked_arity()?;
        for tuple in tuples(agents, arity) {
            if options.quantification == Quantification::MoverFirst && tuple.first().is_some_and(|&w| w != mover) {
                continue;
            }
            if !move_holds(&norm.ground, &tuple, mover, mover, state, world)? {
                continue;
            }
            for (i, &action) in feasible.iter().enumerate() {
                if let Some(fired) = fires(&norm.consequence, &tuple, state, &afters[i], world)? {
                    witnesses[i].push(Witness { norm_id: norm.id.clone(), tuple: tuple.clone(), action, fired });
                }
            }
        }
    }

    let mut prohibited = Vec::new();
    let mut permissible = Vec::new();
    for (&a, w) in feasible.iter().zip(witnesses) {
        if w.is_empty() {
            permissible.push(a);
        } else {
            prohibited.push((a, w));
        }
    }
    Ok(DeonticVerdict { feasible: feasible.to_vec(), prohibited, permissible })
}

/// All `arity`-tuples over `agents`, lexicographic in agent order.
pub fn tuples(agents: &[AgentId], arity: usize) -> impl Iterator<Item = Vec<AgentId>> + '_ {
    let n = agents.len();
    let count = if n == 0 && arity > 0 { 0 } else { n.pow(arity as u32) };
    (0..count).map(move |mut index| {
        let mut t = alloc::vec![AgentId(0); arity];
        for slot in t.iter_mut().rev() {
            *slot = agents[index % n];
            index /= n;
        }
        t
    })
}
