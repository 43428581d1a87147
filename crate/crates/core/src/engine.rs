//! The deterministic run engine.
//!
//! A situation ⟨ω, s⟩ steps to ⟨τ(ω), γ(Γ(ω,s))(ω,s)⟩: feasible actions are
//! filtered by the prohibition engine, the best remaining ones by one-step
//! utility form the choice set Γ, and the tie-break γ picks one of them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::condition::{AgentId, Interpretation};
use crate::normative::Norm;
use crate::prohibition::{prohibited_set, validate_norms, DeonticVerdict, ProhibitionOptions};
use crate::{Error, Result};

/// A world the engine can run: agents, feasibility, action application and utility.
pub trait World: Interpretation {
    /// Actions; `Ord` is the documented default action order.
    type Action: Copy + Ord + Debug;

    fn agents(&self) -> &[AgentId];

    /// `𝒜(ω, s)`, in action order.
    fn feasible(&self, mover: AgentId, state: &Self::State) -> Vec<Self::Action>;

    /// `a(ω, s)`. Only called with feasible actions.
    fn apply(&self, action: Self::Action, mover: AgentId, state: &Self::State) -> Self::State;

    /// `U_ω(s)`.
    fn utility(&self, agent: AgentId, state: &Self::State) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Situation<S> {
    pub mover: AgentId,
    pub state: S,
}

/// The turn operator τ as an explicit total map on the agent set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurnOperator {
    next: BTreeMap<AgentId, AgentId>,
}

impl TurnOperator {
    /// `order[0] → order[1] → … → order[0]`.
    pub fn cyclic(order: &[AgentId]) -> Self {
        let next = order.iter().enumerate().map(|(i, &a)| (a, order[(i + 1) % order.len()])).collect();
        TurnOperator { next }
    }

    /// A map that must be total on `agents` and stay within it.
    pub fn from_map(agents: &[AgentId], next: BTreeMap<AgentId, AgentId>) -> Result<Self> {
        for a in agents {
            match next.get(a) {
                Some(b) if agents.contains(b) => {}
                Some(b) => return Err(Error::InvalidState(alloc::format!("turn map sends {a} to unknown agent {b}"))),
                None => return Err(Error::InvalidState(alloc::format!("turn map has no successor for {a}"))),
            }
        }
        if let Some(extra) = next.keys().find(|k| !agents.contains(k)) {
            return Err(Error::InvalidState(alloc::format!("turn map mentions unknown agent {extra}")));
        }
        Ok(TurnOperator { next })
    }

    pub fn next(&self, agent: AgentId) -> AgentId {
        self.next[&agent]
    }
}

/// One event of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Event<S, A> {
    /// 1-based event index.
    pub t: usize,
    pub mover: AgentId,
    pub verdict: DeonticVerdict<A>,
    /// One-step utility of every feasible action, in feasible order.
    pub scores: Vec<(A, f64)>,
    /// Γ(ω, s), in feasible order.
    pub choice: Vec<A>,
    /// `None` when Γ is empty: the mover passes and the state is unchanged.
    pub chosen: Option<A>,
    pub deadlock: bool,
    pub next: Situation<S>,
}

/// A k-event run: the initial situation and one record per event.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S, A> {
    pub initial: Situation<S>,
    pub events: Vec<Event<S, A>>,
}

impl<S, A> Trace<S, A> {
    /// `φ(ω, s, t)`: the situation after `t` events.
    pub fn phi(&self, t: usize) -> Option<&Situation<S>> {
        match t {
            0 => Some(&self.initial),
            _ => self.events.get(t - 1).map(|e| &e.next),
        }
    }

    pub fn deadlocks(&self) -> usize {
        self.events.iter().filter(|e| e.deadlock).count()
    }
}

/// A deterministic DALMAS: a world, its norms, τ, and γ.
pub struct DeterministicDalmas<W: World>
where
    W::State: Clone + PartialEq + Debug,
{
    world: W,
    norms: Vec<Norm>,
    turn: TurnOperator,
    tie_break: Vec<W::Action>,
    options: ProhibitionOptions,
}

impl<W: World> DeterministicDalmas<W>
where
    W::State: Clone + PartialEq + Debug,
{
    /// Validates every norm against the world; τ is cyclic in agent order and γ
    /// picks the first action in the action order.
    pub fn new(world: W, norms: Vec<Norm>) -> Result<Self> {
        validate_norms(&norms, &world)?;
        let turn = TurnOperator::cyclic(world.agents());
        Ok(DeterministicDalmas { world, norms, turn, tie_break: Vec::new(), options: ProhibitionOptions::default() })
    }

    pub fn with_turn(mut self, turn: TurnOperator) -> Self {
        self.turn = turn;
        self
    }

    /// Preference order for γ; actions it omits rank after it, in action order.
    pub fn with_tie_break(mut self, order: Vec<W::Action>) -> Self {
        self.tie_break = order;
        self
    }

    pub fn with_options(mut self, options: ProhibitionOptions) -> Self {
        self.options = options;
        self
    }

    pub fn world(&self) -> &W {
        &self.world
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn turn(&self) -> &TurnOperator {
        &self.turn
    }

    pub fn options(&self) -> ProhibitionOptions {
        self.options
    }

    /// Feasible, prohibited and permissible actions in ⟨mover, state⟩.
    pub fn verdict(&self, mover: AgentId, state: &W::State) -> Result<DeonticVerdict<W::Action>> {
        let feasible = self.world.feasible(mover, state);
        prohibited_set(&self.world, &self.norms, mover, state, &feasible, self.options)
    }

    /// `U_ω(a(ω, s))` for each action.
    pub fn scores(&self, mover: AgentId, state: &W::State, actions: &[W::Action]) -> Vec<(W::Action, f64)> {
        actions.iter().map(|&a| (a, self.world.utility(mover, &self.world.apply(a, mover, state)))).collect()
    }

    /// Γ: the permissible actions scoring at least as high as every permissible action.
    pub fn choice_set(&self, verdict: &DeonticVerdict<W::Action>, scores: &[(W::Action, f64)]) -> Vec<W::Action> {
        let score = |a: &W::Action| scores.iter().find(|(x, _)| x == a).map(|s| s.1);
        let permissible: Vec<(W::Action, f64)> =
            verdict.permissible.iter().filter_map(|a| score(a).map(|s| (*a, s))).collect();
        permissible.iter().filter(|(_, s)| permissible.iter().all(|(_, t)| s >= t)).map(|(a, _)| *a).collect()
    }

    /// γ: first action of the tie-break order present in `choice`, else the least.
    pub fn tie_break(&self, choice: &[W::Action]) -> Option<W::Action> {
        self.tie_break.iter().copied().find(|a| choice.contains(a)).or_else(|| choice.iter().copied().min())
    }

    /// `f(ω, s)` together with the event record.
    pub fn step(&self, sit: &Situation<W::State>, t: usize) -> Result<Event<W::State, W::Action>> {
        let mover = sit.mover;
        let verdict = self.verdict(mover, &sit.state)?;
        let scores = self.scores(mover, &sit.state, &verdict.feasible);
        let choice = self.choice_set(&verdict, &scores);
        let chosen = self.tie_break(&choice);
        let state = match chosen {
            Some(a) => self.world.apply(a, mover, &sit.state),
            None => sit.state.clone(),
        };
        Ok(Event {
            t,
            mover,
            verdict,
            scores,
            choice,
            chosen,
            deadlock: chosen.is_none(),
            next: Situation { mover: self.turn.next(mover), state },
        })
    }

    /// The k-event run from `initial`.
    pub fn run(&self, initial: Situation<W::State>, k: usize) -> Result<Trace<W::State, W::Action>> {
        if !self.world.agents().contains(&initial.mover) {
            return Err(Error::InvalidState(alloc::format!("mover {} is not an agent", initial.mover)));
        }
        let mut events: Vec<Event<W::State, W::Action>> = Vec::with_capacity(k);
        for t in 1..=k {
            let event = {
                let sit = events.last().map_or(&initial, |e| &e.next);
                self.step(sit, t)?
            };
            events.push(event);
        }
        Ok(Trace { initial, events })
    }

    /// Re-derives every recorded event from `initial` and compares.
    ///
    /// Replay follows the recorded actions, so every divergence is reported,
    /// not just the first. A recorded action that is infeasible or a digest that
    /// does not match the replayed state stops the audit as corruption.
    pub fn audit<D: PartialEq + Debug>(
        &self,
        initial: &Situation<W::State>,
        initial_digest: &D,
        recorded: &[RecordedEvent<W::Action, D>],
        digest: impl Fn(&W::State) -> D,
    ) -> Result<AuditReport<W::Action>> {
        let mut report = AuditReport { events_checked: 0, divergences: Vec::new(), corruption: None };
        if digest(&initial.state) != *initial_digest {
            report.corruption = Some(Corruption { t: 0, message: String::from("initial state digest mismatch") });
            return Ok(report);
        }
        let mut sit = initial.clone();
        for (i, rec) in recorded.iter().enumerate() {
            let t = i + 1;
            if rec.t != t {
                report.corruption =
                    Some(Corruption { t, message: alloc::format!("event index {} out of sequence", rec.t) });
                return Ok(report);
            }
            if rec.mover != sit.mover {
                report.divergences.push(Divergence::MoverMismatch { t, expected: sit.mover, found: rec.mover });
            }
            let verdict = self.verdict(rec.mover, &sit.state)?;
            let scores = self.scores(rec.mover, &sit.state, &verdict.feasible);
            let choice = self.choice_set(&verdict, &scores);
            let expected = self.tie_break(&choice);
            match rec.chosen {
                Some(a) if !choice.contains(&a) => {
                    report.divergences.push(Divergence::NotInChoiceSet { t, choice: choice.clone(), found: a })
                }
                Some(a) if Some(a) != expected => {
                    report.divergences.push(Divergence::TieBreak { t, expected, found: a })
                }
                None if !choice.is_empty() => {
                    report.divergences.push(Divergence::UnwarrantedDeadlock { t, choice: choice.clone() })
                }
                _ => {}
            }
            if rec.deadlock != rec.chosen.is_none() {
                report.divergences.push(Divergence::DeadlockFlag { t, recorded: rec.deadlock });
            }
            let state = match rec.chosen {
                Some(a) => {
                    if !verdict.feasible.contains(&a) {
                        report.corruption =
                            Some(Corruption { t, message: alloc::format!("recorded action {a:?} is infeasible") });
                        return Ok(report);
                    }
                    self.world.apply(a, rec.mover, &sit.state)
                }
                None => sit.state.clone(),
            };
            if digest(&state) != rec.digest {
                report.corruption = Some(Corruption { t, message: String::from("state digest mismatch") });
                return Ok(report);
            }
            sit = Situation { mover: self.turn.next(rec.mover), state };
            report.events_checked += 1;
        }
        Ok(report)
    }
}

/// What the audit reads from a stored trace for one event.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordedEvent<A, D> {
    pub t: usize,
    pub mover: AgentId,
    pub chosen: Option<A>,
    pub deadlock: bool,
    pub digest: D,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Divergence<A> {
    MoverMismatch {
        t: usize,
        expected: AgentId,
        found: AgentId,
    },
    /// The recorded action is not among the best permissible actions.
    NotInChoiceSet {
        t: usize,
        choice: Vec<A>,
        found: A,
    },
    /// The recorded action is in Γ but the tie-break picks another.
    TieBreak {
        t: usize,
        expected: Option<A>,
        found: A,
    },
    /// A pass was recorded although Γ is nonempty.
    UnwarrantedDeadlock {
        t: usize,
        choice: Vec<A>,
    },
    /// The deadlock flag disagrees with the recorded action.
    DeadlockFlag {
        t: usize,
        recorded: bool,
    },
}

impl<A> Divergence<A> {
    pub fn t(&self) -> usize {
        match self {
            Divergence::MoverMismatch { t, .. }
            | Divergence::NotInChoiceSet { t, .. }
            | Divergence::TieBreak { t, .. }
            | Divergence::UnwarrantedDeadlock { t, .. }
            | Divergence::DeadlockFlag { t, .. } => *t,
        }
    }
}

/// The recorded trace cannot be replayed past event `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corruption {
    pub t: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport<A> {
    pub events_checked: usize,
    pub divergences: Vec<Divergence<A>>,
    pub corruption: Option<Corruption>,
}

impl<A> AuditReport<A> {
    pub fn is_clean(&self) -> bool {
        self.divergences.is_empty() && self.corruption.is_none()
    }

    pub fn first_divergence(&self) -> Option<&Divergence<A>> {
        self.divergences.first()
    }
}

impl<S: Clone, A: Copy> Trace<S, A> {
    /// The fields the audit compares, with `digest` applied to each state.
    pub fn recorded<D>(&self, digest: impl Fn(&S) -> D) -> Vec<RecordedEvent<A, D>> {
        self.events
            .iter()
            .map(|e| RecordedEvent {
                t: e.t,
                mover: e.mover,
                chosen: e.chosen,
                deadlock: e.deadlock,
                digest: digest(&e.next.state),
            })
            .collect()
    }
}
