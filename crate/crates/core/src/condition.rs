//! State-conditions: symbolic terms over agents, their truth in a state, and
//! their extents over a finite probe universe.
//!
//! Implication between conditions is decided semantically: `a` implies `b` on
//! a universe when the extent of `a` is contained in the extent of `b`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitSet;
use crate::{Error, Result};

/// Index of an agent. Agents are ordered by this index everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A ν-ary state-condition.
///
/// Equality is structural; use [`q_equivalent`] for semantic equivalence.
/// Subterms are shared, so cloning a term is cheap.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Atom { name: String, arity: usize },
    And(Arc<Condition>, Arc<Condition>),
    Or(Arc<Condition>, Arc<Condition>),
    Not(Arc<Condition>),
    Top(usize),
    Bottom(usize),
}

impl Condition {
    pub fn atom(name: impl Into<String>, arity: usize) -> Condition {
        Condition::Atom { name: name.into(), arity }
    }

    pub fn top(arity: usize) -> Condition {
        Condition::Top(arity)
    }

    pub fn bottom(arity: usize) -> Condition {
        Condition::Bottom(arity)
    }

    pub fn try_and(a: Condition, b: Condition) -> Result<Condition> {
        same_arity(&a, &b)?;
        Ok(Condition::And(Arc::new(a), Arc::new(b)))
    }

    pub fn try_or(a: Condition, b: Condition) -> Result<Condition> {
        same_arity(&a, &b)?;
        Ok(Condition::Or(Arc::new(a), Arc::new(b)))
    }

    /// Conjunction. Panics if the arities differ; see [`Condition::try_and`].
    pub fn and(a: Condition, b: Condition) -> Condition {
        Self::try_and(a, b).expect("conjunction of conditions with different arity")
    }

    /// Disjunction. Panics if the arities differ; see [`Condition::try_or`].
    pub fn or(a: Condition, b: Condition) -> Condition {
        Self::try_or(a, b).expect("disjunction of conditions with different arity")
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Condition) -> Condition {
        Condition::Not(Arc::new(a))
    }

    /// Left-folded conjunction of a non-empty list.
    pub fn all(items: impl IntoIterator<Item = Condition>) -> Option<Condition> {
        items.into_iter().reduce(Condition::and)
    }

    /// Left-folded disjunction of a non-empty list.
    pub fn any(items: impl IntoIterator<Item = Condition>) -> Option<Condition> {
        items.into_iter().reduce(Condition::or)
    }

    /// Arity as read from the leftmost leaf.
    pub fn arity(&self) -> usize {
        match self {
            Condition::Atom { arity, .. } => *arity,
            Condition::Top(n) | Condition::Bottom(n) => *n,
            Condition::And(a, _) | Condition::Or(a, _) | Condition::Not(a) => a.arity(),
        }
    }

    /// Checks that every subterm has the same arity and returns it.
    pub fn checked_arity(&self) -> Result<usize> {
        match self {
            Condition::Atom { arity, .. } => Ok(*arity),
            Condition::Top(n) | Condition::Bottom(n) => Ok(*n),
            Condition::Not(a) => a.checked_arity(),
            Condition::And(a, b) | Condition::Or(a, b) => {
                let (l, r) = (a.checked_arity()?, b.checked_arity()?);
                if l == r {
                    Ok(l)
                } else {
                    Err(Error::ArityMismatch { expected: l, found: r })
                }
            }
        }
    }

    /// Distinct atoms, as `(name, arity)`, in first-occurrence order.
    pub fn atoms(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, usize)>) {
        match self {
            Condition::Atom { name, arity } => {
                if !out.iter().any(|(n, a)| *n == name && a == arity) {
                    out.push((name, *arity));
                }
            }
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Condition::Not(a) => a.collect_atoms(out),
            Condition::Top(_) | Condition::Bottom(_) => {}
        }
    }
}

fn same_arity(a: &Condition, b: &Condition) -> Result<()> {
    let (l, r) = (a.checked_arity()?, b.checked_arity()?);
    if l == r {
        Ok(())
    } else {
        Err(Error::ArityMismatch { expected: l, found: r })
    }
}

/// Canonical text form: `name/arity`, `top/n`, `bot/n`, `(and p q)`, `(or p q)`, `(not p)`.
impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Atom { name, arity } => write!(f, "{name}/{arity}"),
            Condition::Top(n) => write!(f, "top/{n}"),
            Condition::Bottom(n) => write!(f, "bot/{n}"),
            Condition::And(a, b) => write!(f, "(and {a} {b})"),
            Condition::Or(a, b) => write!(f, "(or {a} {b})"),
            Condition::Not(a) => write!(f, "(not {a})"),
        }
    }
}

/// Truth of atomic conditions in a state.
pub trait Interpretation {
    type State;

    /// Declared arity of `name`, or `None` when the atom is unknown.
    fn atom_arity(&self, name: &str) -> Option<usize>;

    /// Truth of a declared atom. Called only with `tuple.len()` equal to the declared arity.
    fn eval_atom(&self, name: &str, tuple: &[AgentId], state: &Self::State) -> bool;
}

impl<I: Interpretation + ?Sized> Interpretation for &I {
    type State = I::State;

    fn atom_arity(&self, name: &str) -> Option<usize> {
        (**self).atom_arity(name)
    }

    fn eval_atom(&self, name: &str, tuple: &[AgentId], state: &Self::State) -> bool {
        (**self).eval_atom(name, tuple, state)
    }
}

/// Checks that every atom of `term` is declared at its arity.
pub fn check_atoms<I: Interpretation>(term: &Condition, interp: &I) -> Result<()> {
    term.checked_arity()?;
    for (name, arity) in term.atoms() {
        match interp.atom_arity(name) {
            Some(a) if a == arity => {}
            _ => return Err(Error::UnknownAtom { name: name.to_string(), arity }),
        }
    }
    Ok(())
}

/// Truth of `term` for `tuple` in `state`.
pub fn evaluate<I: Interpretation>(term: &Condition, tuple: &[AgentId], state: &I::State, interp: &I) -> Result<bool> {
    let leaf_arity = |n: usize| {
        if n == tuple.len() {
            Ok(())
        } else {
            Err(Error::ArityMismatch { expected: n, found: tuple.len() })
        }
    };
    Ok(match term {
        Condition::Top(n) => {
            leaf_arity(*n)?;
            true
        }
        Condition::Bottom(n) => {
            leaf_arity(*n)?;
            false
        }
        Condition::Atom { name, arity } => {
            leaf_arity(*arity)?;
            match interp.atom_arity(name) {
                Some(a) if a == *arity => interp.eval_atom(name, tuple, state),
                _ => return Err(Error::UnknownAtom { name: name.clone(), arity: *arity }),
            }
        }
        Condition::Not(a) => !evaluate(a, tuple, state, interp)?,
        Condition::And(a, b) => {
            // both sides are evaluated so arity errors surface regardless of short-circuit
            let l = evaluate(a, tuple, state, interp)?;
            let r = evaluate(b, tuple, state, interp)?;
            l && r
        }
        Condition::Or(a, b) => {
            let l = evaluate(a, tuple, state, interp)?;
            let r = evaluate(b, tuple, state, interp)?;
            l || r
        }
    })
}

/// A finite carrier for deciding implication: agents and states in insertion order.
#[derive(Clone, Debug)]
pub struct ProbeUniverse<I: Interpretation> {
    agents: Vec<AgentId>,
    states: Vec<I::State>,
    interp: I,
}

impl<I: Interpretation> ProbeUniverse<I> {
    pub fn new(agents: Vec<AgentId>, states: Vec<I::State>, interp: I) -> Self {
        ProbeUniverse { agents, states, interp }
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn states(&self) -> &[I::State] {
        &self.states
    }

    pub fn interpretation(&self) -> &I {
        &self.interp
    }

    /// Number of agent tuples of the given arity.
    pub fn tuple_count(&self, arity: usize) -> usize {
        self.agents.len().pow(arity as u32)
    }

    /// Agent tuple with the given index, lexicographic over agent insertion order.
    pub fn tuple(&self, arity: usize, mut index: usize) -> Vec<AgentId> {
        let n = self.agents.len();
        let mut out = vec![AgentId(0); arity];
        for slot in out.iter_mut().rev() {
            *slot = self.agents[index % n];
            index /= n;
        }
        out
    }

    /// All tuples of the given arity, in index order.
    pub fn tuples(&self, arity: usize) -> impl Iterator<Item = Vec<AgentId>> + '_ {
        (0..self.tuple_count(arity)).map(move |i| self.tuple(arity, i))
    }

    /// Number of (tuple, state) points at the given arity.
    pub fn point_count(&self, arity: usize) -> usize {
        self.tuple_count(arity) * self.states.len()
    }
}

/// Extent of a condition: the set of (tuple, state) points where it holds.
///
/// Point `tuple_index * states + state_index` is the bit position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Denotation {
    arity: usize,
    states: usize,
    bits: BitSet,
}

impl Denotation {
    fn empty(arity: usize, tuples: usize, states: usize) -> Self {
        Denotation { arity, states, bits: BitSet::new(tuples * states) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.bits.count() == self.bits.len()
    }

    /// Size of the full product this extent lives in.
    pub fn universe_size(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, tuple_index: usize, state_index: usize) -> bool {
        self.bits.get(tuple_index * self.states + state_index)
    }

    /// `(tuple_index, state_index)` pairs in the extent.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.ones().map(|i| (i / self.states, i % self.states))
    }

    pub fn is_subset(&self, other: &Denotation) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersection(&self, other: &Denotation) -> Denotation {
        Denotation { bits: self.bits.and(&other.bits), ..*self }
    }

    pub fn union(&self, other: &Denotation) -> Denotation {
        Denotation { bits: self.bits.or(&other.bits), ..*self }
    }

    pub fn complement(&self) -> Denotation {
        Denotation { bits: self.bits.not(), ..*self }
    }
}

/// Extent of `term` over the universe.
pub fn denote<I: Interpretation>(term: &Condition, universe: &ProbeUniverse<I>) -> Result<Denotation> {
    check_atoms(term, &universe.interp)?;
    Ok(denote_checked(term, universe, &mut BTreeMap::new()))
}

fn denote_checked<'t, I: Interpretation>(
    term: &'t Condition,
    universe: &ProbeUniverse<I>,
    atom_cache: &mut BTreeMap<&'t str, Denotation>,
) -> Denotation {
    let arity = term.arity();
    let (tuples, states) = (universe.tuple_count(arity), universe.states.len());
    match term {
        Condition::Top(_) => Denotation { arity, states, bits: BitSet::full(tuples * states) },
        Condition::Bottom(_) => Denotation::empty(arity, tuples, states),
        Condition::Atom { name, .. } => {
            if let Some(d) = atom_cache.get(name.as_str()) {
                return d.clone();
            }
            let mut d = Denotation::empty(arity, tuples, states);
            for ti in 0..tuples {
                let tuple = universe.tuple(arity, ti);
                for (si, s) in universe.states.iter().enumerate() {
                    if universe.interp.eval_atom(name, &tuple, s) {
                        d.bits.set(ti * states + si);
                    }
                }
            }
            atom_cache.insert(name, d.clone());
            d
        }
        Condition::Not(a) => denote_checked(a, universe, atom_cache).complement(),
        Condition::And(a, b) => {
            let l = denote_checked(a, universe, atom_cache);
            l.intersection(&denote_checked(b, universe, atom_cache))
        }
        Condition::Or(a, b) => {
            let l = denote_checked(a, universe, atom_cache);
            l.union(&denote_checked(b, universe, atom_cache))
        }
    }
}

fn check_pair(a: &Condition, b: &Condition) -> Result<()> {
    let (l, r) = (a.checked_arity()?, b.checked_arity()?);
    if l != r {
        return Err(Error::ArityMismatch { expected: l, found: r });
    }
    Ok(())
}

/// `a` implies `b` on every point of the universe.
pub fn implies<I: Interpretation>(a: &Condition, b: &Condition, universe: &ProbeUniverse<I>) -> Result<bool> {
    check_pair(a, b)?;
    Ok(denote(a, universe)?.is_subset(&denote(b, universe)?))
}

/// Mutual implication: same Q-equivalence class.
pub fn q_equivalent<I: Interpretation>(a: &Condition, b: &Condition, universe: &ProbeUniverse<I>) -> Result<bool> {
    check_pair(a, b)?;
    Ok(denote(a, universe)? == denote(b, universe)?)
}

/// Interpretation given by explicit truth tables over state indices.
///
/// States are `usize` indices; each atom has a table indexed by
/// `tuple_index * state_count + state`, with tuples enumerated as in
/// [`ProbeUniverse::tuple`] over agents `0..agent_count`.
#[derive(Clone, Debug, Default)]
pub struct TableInterpretation {
    agent_count: usize,
    state_count: usize,
    tables: BTreeMap<String, (usize, Vec<bool>)>,
}

impl TableInterpretation {
    pub fn new(agent_count: usize, state_count: usize) -> Self {
        TableInterpretation { agent_count, state_count, tables: BTreeMap::new() }
    }

    /// Declares an atom; `truth` is called for every (tuple, state).
    pub fn declare(mut self, name: &str, arity: usize, truth: impl Fn(&[AgentId], usize) -> bool) -> Self {
        let tuples = self.agent_count.pow(arity as u32);
        let mut table = Vec::with_capacity(tuples * self.state_count);
        for ti in 0..tuples {
            let tuple = index_tuple(self.agent_count, arity, ti);
            for s in 0..self.state_count {
                table.push(truth(&tuple, s));
            }
        }
        self.tables.insert(name.to_string(), (arity, table));
        self
    }

    /// The probe universe over all agents and states of this table.
    pub fn universe(self) -> ProbeUniverse<TableInterpretation> {
        let agents = (0..self.agent_count as u32).map(AgentId).collect();
        let states = (0..self.state_count).collect();
        ProbeUniverse::new(agents, states, self)
    }
}

fn index_tuple(n: usize, arity: usize, mut index: usize) -> Vec<AgentId> {
    let mut out = vec![AgentId(0); arity];
    for slot in out.iter_mut().rev() {
        *slot = AgentId((index % n) as u32);
        index /= n;
    }
    out
}

impl Interpretation for TableInterpretation {
    type State = usize;

    fn atom_arity(&self, name: &str) -> Option<usize> {
        self.tables.get(name).map(|(a, _)| *a)
    }

    fn eval_atom(&self, name: &str, tuple: &[AgentId], state: &usize) -> bool {
        let (_, table) = &self.tables[name];
        let ti = tuple.iter().fold(0, |acc, a| acc * self.agent_count + a.0 as usize);
        table[ti * self.state_count + state]
    }
}
