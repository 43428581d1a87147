//! One-agent normative positions and the two operator families that turn
//! state-conditions into sit-conditions: the move operator `M` (grounds) and
//! the type operators `T1`–`T7` (consequences).
//!
//! Consequences get a finite model. Each base condition in use is reduced to
//! a vocabulary entry (its Q-class, paired with the class of its negation),
//! and a consequence denotes the set of assignments entry ↦ position type it
//! admits. `R_T` is inclusion of these sets. In this model the np-cis
//! requirements hold by construction:
//!
//! * each entry takes exactly one type, so `T_i d ∧ T_j d` is empty for `i ≠ j`
//!   and `T_1 d ∨ … ∨ T_7 d` is everything;
//! * `T_i d` and `T_σ(i) d′` address the same entry and the same type;
//! * Q-equivalent bases share an entry;
//! * the entry of `⊤`/`⊥` never takes a type that would make `T_i(⊤)` for
//!   `i ∈ {1,3,4,7}` (equivalently `T_i(⊥)` for `i ∈ {1,2,3,5}`) satisfiable.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::BitSet;
use crate::bqo::{verify_bqo, BooleanStructure, Bqo, BqoReport, Denoted, SemanticCis};
use crate::condition::{denote, evaluate, AgentId, Condition, Denotation, Interpretation, ProbeUniverse};
use crate::{Error, Result};

/// The seven types of one-agent normative position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    T1 = 1,
    T2 = 2,
    T3 = 3,
    T4 = 4,
    T5 = 5,
    T6 = 6,
    T7 = 7,
}

impl Position {
    pub const ALL: [Position; 7] =
        [Position::T1, Position::T2, Position::T3, Position::T4, Position::T5, Position::T6, Position::T7];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Result<Position> {
        match i {
            1..=7 => Ok(Position::ALL[i as usize - 1]),
            _ => Err(Error::InvalidPosition(i)),
        }
    }

    /// The position held towards `¬q` when this one is held towards `q`.
    pub fn symmetric(self) -> Position {
        match self {
            Position::T1 => Position::T1,
            Position::T2 => Position::T4,
            Position::T3 => Position::T3,
            Position::T4 => Position::T2,
            Position::T5 => Position::T7,
            Position::T6 => Position::T6,
            Position::T7 => Position::T5,
        }
    }

    /// Signs of (MayDo q, MayPass q, MayDo ¬q).
    pub fn signs(self) -> Signs {
        let (may_do, may_pass, may_do_not) = match self {
            Position::T1 => (true, true, true),
            Position::T2 => (true, true, false),
            Position::T3 => (true, false, true),
            Position::T4 => (false, true, true),
            Position::T5 => (true, false, false),
            Position::T6 => (false, true, false),
            Position::T7 => (false, false, true),
        };
        Signs { may_do, may_pass, may_do_not }
    }

    pub fn from_signs(signs: Signs) -> Option<Position> {
        Position::ALL.into_iter().find(|p| p.signs() == signs)
    }

    pub fn abbreviation(self) -> Option<&'static str> {
        match self {
            Position::T5 => Some("Shall Do"),
            Position::T6 => Some("Shall Pass"),
            Position::T7 => Some("Shall Do not"),
            _ => None,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.index())
    }
}

/// A sign pattern over (MayDo q, MayPass q, MayDo ¬q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signs {
    pub may_do: bool,
    pub may_pass: bool,
    pub may_do_not: bool,
}

impl Signs {
    /// All eight patterns, `+` before `−` in each slot.
    pub fn all() -> [Signs; 8] {
        let mut out = [Signs { may_do: false, may_pass: false, may_do_not: false }; 8];
        for (i, s) in out.iter_mut().enumerate() {
            *s = Signs { may_do: i & 4 == 0, may_pass: i & 2 == 0, may_do_not: i & 1 == 0 };
        }
        out
    }

    /// Doing q, passing, and doing ¬q are exhaustive and exclusive, so at least
    /// one of them must be permitted.
    pub fn is_consistent(self) -> bool {
        self.may_do || self.may_pass || self.may_do_not
    }

    /// The pattern towards `¬q`: doing q and doing ¬q swap roles.
    pub fn negated(self) -> Signs {
        Signs { may_do: self.may_do_not, may_pass: self.may_pass, may_do_not: self.may_do }
    }
}

impl fmt::Display for Signs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |b: bool| if b { '+' } else { '−' };
        write!(f, "({},{},{})", c(self.may_do), c(self.may_pass), c(self.may_do_not))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionDescriptor {
    pub position: Position,
    pub signs: Signs,
    pub abbreviation: Option<&'static str>,
}

/// The seven maxiconjunctions, `T1` through `T7`.
pub fn maxiconjunction_table() -> [PositionDescriptor; 7] {
    Position::ALL.map(|position| PositionDescriptor {
        position,
        signs: position.signs(),
        abbreviation: position.abbreviation(),
    })
}

/// `Mc`: the sit-condition "`c` holds of the first ν agents and the last agent is to move".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MoveTerm {
    base: Condition,
}

impl MoveTerm {
    pub fn new(base: Condition) -> Self {
        MoveTerm { base }
    }

    pub fn base(&self) -> &Condition {
        &self.base
    }

    /// Arity of the sit-condition: one more than the base.
    pub fn arity(&self) -> usize {
        self.base.arity() + 1
    }
}

impl fmt::Display for MoveTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.base)
    }
}

/// `Mc(tuple, last; mover, state)` iff `last = mover` and `c(tuple; state)`.
pub fn move_holds<I: Interpretation>(
    mc: &MoveTerm,
    tuple: &[AgentId],
    last: AgentId,
    mover: AgentId,
    state: &I::State,
    interp: &I,
) -> Result<bool> {
    let base = evaluate(&mc.base, tuple, state, interp)?;
    Ok(last == mover && base)
}

/// A move term with the extent of its base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveElem {
    pub term: MoveTerm,
    pub base: Denoted,
}

/// The m-cis over a semantic cis: `M` carried through meet, complement and order.
pub struct MoveCis<'u, I: Interpretation> {
    base: SemanticCis<'u, I>,
}

impl<'u, I: Interpretation> MoveCis<'u, I> {
    pub fn new(base: SemanticCis<'u, I>) -> Self {
        MoveCis { base }
    }

    pub fn lift(&self, base: Condition) -> Result<MoveElem> {
        let base = self.base.lift(base)?;
        Ok(MoveElem { term: MoveTerm::new(base.term.clone()), base })
    }

    fn wrap(base: Denoted) -> MoveElem {
        MoveElem { term: MoveTerm::new(base.term.clone()), base }
    }
}

impl<I: Interpretation> BooleanStructure for MoveCis<'_, I> {
    type Elem = MoveElem;

    /// `Mb ∧_M Mc = M(b ∧ c)`.
    fn meet(&self, a: &MoveElem, b: &MoveElem) -> MoveElem {
        Self::wrap(self.base.meet(&a.base, &b.base))
    }

    /// `(Mc)′_M = M(c′)`.
    fn complement(&self, a: &MoveElem) -> MoveElem {
        Self::wrap(self.base.complement(&a.base))
    }

    fn top(&self) -> MoveElem {
        Self::wrap(self.base.top())
    }

    fn bottom(&self) -> MoveElem {
        Self::wrap(self.base.bottom())
    }

    /// `Mb R_M Mc` iff `b R c`.
    fn leq(&self, a: &MoveElem, b: &MoveElem) -> bool {
        self.base.leq(&a.base, &b.base)
    }
}

/// The image of a semantic cis under `M`.
pub fn mcis_over<'u, I: Interpretation>(bqo: Bqo<SemanticCis<'u, I>>) -> Bqo<MoveCis<'u, I>> {
    let carrier = bqo.carrier.into_iter().map(MoveCis::<I>::wrap).collect();
    Bqo::new(MoveCis::new(bqo.structure), carrier)
}

/// A failure of `M` to be an isomorphism, found by pointwise evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoViolation {
    /// `M(b∧c)` differs from `Mb ∧ Mc` at some point.
    Meet { b: usize, c: usize },
    /// `M(c′)` differs from `last = mover ∧ ¬c` at some point.
    Complement { c: usize },
    /// `b R c` disagrees with inclusion of the sit-extents of `Mb` and `Mc`.
    Order { b: usize, c: usize },
}

/// Checks, by enumerating every (tuple, last, mover, state), that `M`
/// preserves meet, complement and order over `carrier`.
pub fn verify_move_isomorphism<I: Interpretation>(
    universe: &ProbeUniverse<I>,
    carrier: &[Condition],
) -> Result<Vec<IsoViolation>> {
    let interp = universe.interpretation();
    let agents = universe.agents();
    let sit_extent = |mc: &MoveTerm| -> Result<Vec<bool>> {
        let arity = mc.base.arity();
        let mut out = Vec::new();
        for tuple in universe.tuples(arity) {
            for &last in agents {
                for &mover in agents {
                    for s in universe.states() {
                        out.push(move_holds(mc, &tuple, last, mover, s, interp)?);
                    }
                }
            }
        }
        Ok(out)
    };
    let extents: Vec<Vec<bool>> =
        carrier.iter().map(|c| sit_extent(&MoveTerm::new(c.clone()))).collect::<Result<_>>()?;
    let base_extents: Vec<Denotation> = carrier.iter().map(|c| denote(c, universe)).collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (ci, c) in carrier.iter().enumerate() {
        // (Mc)′_M holds iff last = mover and c′ holds
        let comp = sit_extent(&MoveTerm::new(Condition::not(c.clone())))?;
        let mut expected = Vec::new();
        for tuple in universe.tuples(c.arity()) {
            for &last in agents {
                for &mover in agents {
                    for s in universe.states() {
                        expected.push(last == mover && !evaluate(c, &tuple, s, interp)?);
                    }
                }
            }
        }
        if comp != expected {
            out.push(IsoViolation::Complement { c: ci });
        }
        for (bi, b) in carrier.iter().enumerate() {
            if b.arity() != c.arity() {
                continue;
            }
            let meet = sit_extent(&MoveTerm::new(Condition::and(b.clone(), c.clone())))?;
            let pointwise: Vec<bool> = extents[bi].iter().zip(&extents[ci]).map(|(x, y)| *x && *y).collect();
            if meet != pointwise {
                out.push(IsoViolation::Meet { b: bi, c: ci });
            }
            let base_leq = base_extents[bi].is_subset(&base_extents[ci]);
            let sit_leq = extents[bi].iter().zip(&extents[ci]).all(|(x, y)| !*x || *y);
            if base_leq != sit_leq {
                out.push(IsoViolation::Order { b: bi, c: ci });
            }
        }
    }
    Ok(out)
}

/// `T_i d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypedAtom {
    pub position: Position,
    pub base: Condition,
}

impl TypedAtom {
    pub fn new(position: Position, base: Condition) -> Self {
        TypedAtom { position, base }
    }
}

impl fmt::Display for TypedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.position, self.base)
    }
}

/// A Boolean combination of typed atoms over base conditions of one arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Consequence {
    Typed(TypedAtom),
    And(Box<Consequence>, Box<Consequence>),
    Or(Box<Consequence>, Box<Consequence>),
    Not(Box<Consequence>),
    /// `⊤_T`, tagged with the base arity.
    Top(usize),
    /// `⊥_T`, tagged with the base arity.
    Bottom(usize),
}

impl Consequence {
    pub fn typed(position: Position, base: Condition) -> Consequence {
        Consequence::Typed(TypedAtom::new(position, base))
    }

    pub fn and(a: Consequence, b: Consequence) -> Consequence {
        Consequence::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Consequence, b: Consequence) -> Consequence {
        Consequence::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Consequence) -> Consequence {
        Consequence::Not(Box::new(a))
    }

    pub fn all(items: impl IntoIterator<Item = Consequence>) -> Option<Consequence> {
        items.into_iter().reduce(Consequence::and)
    }

    pub fn any(items: impl IntoIterator<Item = Consequence>) -> Option<Consequence> {
        items.into_iter().reduce(Consequence::or)
    }

    /// `T_{p1} d ∨ … ∨ T_{pn} d`.
    pub fn any_of(positions: &[Position], base: &Condition) -> Consequence {
        Self::any(positions.iter().map(|&p| Self::typed(p, base.clone()))).expect("at least one position")
    }

    /// The single typed atom of an elementary consequence.
    pub fn as_typed(&self) -> Option<&TypedAtom> {
        match self {
            Consequence::Typed(t) => Some(t),
            _ => None,
        }
    }

    /// Arity of the base conditions, read from the leftmost leaf.
    pub fn base_arity(&self) -> usize {
        match self {
            Consequence::Typed(t) => t.base.arity(),
            Consequence::Top(n) | Consequence::Bottom(n) => *n,
            Consequence::And(a, _) | Consequence::Or(a, _) | Consequence::Not(a) => a.base_arity(),
        }
    }

    /// Typed atoms in left-to-right order.
    pub fn typed_atoms(&self) -> Vec<&TypedAtom> {
        let mut out = Vec::new();
        self.walk(&mut |t| out.push(t));
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TypedAtom)) {
        match self {
            Consequence::Typed(t) => f(t),
            Consequence::And(a, b) | Consequence::Or(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Consequence::Not(a) => a.walk(f),
            Consequence::Top(_) | Consequence::Bottom(_) => {}
        }
    }
}

impl fmt::Display for Consequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consequence::Typed(t) => write!(f, "{t}"),
            Consequence::And(a, b) => write!(f, "(and {a} {b})"),
            Consequence::Or(a, b) => write!(f, "(or {a} {b})"),
            Consequence::Not(a) => write!(f, "(not {a})"),
            Consequence::Top(n) => write!(f, "top/{n}"),
            Consequence::Bottom(n) => write!(f, "bot/{n}"),
        }
    }
}

/// Largest number of vocabulary entries in one atom space (7^9 assignments).
pub const MAX_ENTRIES: usize = 9;

#[derive(Clone, Debug)]
struct Entry {
    representative: Condition,
    extent: Denotation,
}

impl Entry {
    /// Types the representative may not take: it is ⊤ or ⊥.
    fn forbidden(&self) -> &'static [Position] {
        if self.extent.is_full() {
            &[Position::T1, Position::T3, Position::T4, Position::T7]
        } else if self.extent.is_empty() {
            &[Position::T1, Position::T2, Position::T3, Position::T5]
        } else {
            &[]
        }
    }
}

/// Base conditions grouped into Q-classes, each paired with the class of its negation.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    arity: usize,
    entries: Vec<Entry>,
    resolved: BTreeMap<Condition, (usize, bool)>,
}

impl Vocabulary {
    /// Registers `bases` (plus `⊤` and `⊥` of the arity) against their extents on `universe`.
    pub fn build<I: Interpretation>(
        arity: usize,
        bases: impl IntoIterator<Item = Condition>,
        universe: &ProbeUniverse<I>,
    ) -> Result<Vocabulary> {
        let mut v = Vocabulary { arity, entries: Vec::new(), resolved: BTreeMap::new() };
        for base in bases.into_iter().chain([Condition::top(arity), Condition::bottom(arity)]) {
            v.register(base, universe)?;
        }
        Ok(v)
    }

    /// Collects every base mentioned by `consequences` and builds the vocabulary.
    pub fn for_consequences<'c, I: Interpretation>(
        arity: usize,
        consequences: impl IntoIterator<Item = &'c Consequence>,
        universe: &ProbeUniverse<I>,
    ) -> Result<Vocabulary> {
        let bases: Vec<Condition> =
            consequences.into_iter().flat_map(|c| c.typed_atoms().into_iter().map(|t| t.base.clone())).collect();
        Self::build(arity, bases, universe)
    }

    fn register<I: Interpretation>(&mut self, base: Condition, universe: &ProbeUniverse<I>) -> Result<()> {
        if self.resolved.contains_key(&base) {
            return Ok(());
        }
        let arity = base.checked_arity()?;
        if arity != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, found: arity });
        }
        let extent = denote(&base, universe)?;
        let complement = extent.complement();
        let slot = self.entries.iter().enumerate().find_map(|(i, e)| {
            if e.extent == extent {
                Some((i, false))
            } else if e.extent == complement {
                Some((i, true))
            } else {
                None
            }
        });
        let slot = slot.unwrap_or_else(|| {
            self.entries.push(Entry { representative: base.clone(), extent });
            (self.entries.len() - 1, false)
        });
        self.resolved.insert(base, slot);
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn representative(&self, entry: usize) -> &Condition {
        &self.entries[entry].representative
    }

    /// Registered bases with their `(entry, negated)` resolution.
    pub fn registered(&self) -> impl Iterator<Item = (&Condition, usize, bool)> {
        self.resolved.iter().map(|(c, &(e, n))| (c, e, n))
    }

    /// Entry of `base` and whether `base` is the negation of the entry's representative.
    pub fn resolve(&self, base: &Condition) -> Result<(usize, bool)> {
        if let Some(&slot) = self.resolved.get(base) {
            return Ok(slot);
        }
        if let Condition::Not(inner) = base {
            if let Ok((e, neg)) = self.resolve(inner) {
                return Ok((e, !neg));
            }
        }
        Err(Error::UnknownBase(base.to_string()))
    }

    /// Entries mentioned by `term`, sorted.
    pub fn mentioned(&self, term: &Consequence) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for t in term.typed_atoms() {
            let (e, _) = self.resolve(&t.base)?;
            if !out.contains(&e) {
                out.push(e);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    fn space(&self, entries: Vec<usize>) -> Result<AtomSpace<'_>> {
        if entries.len() > MAX_ENTRIES {
            return Err(Error::VocabularyTooLarge { entries: entries.len(), max: MAX_ENTRIES });
        }
        let size = 7usize.pow(entries.len() as u32);
        let mut valid = BitSet::full(size);
        for (digit, &e) in entries.iter().enumerate() {
            for &p in self.entries[e].forbidden() {
                valid = valid.and_not(&digit_mask(size, digit, p));
            }
        }
        Ok(AtomSpace { vocab: self, entries, size, valid })
    }
}

/// All assignments whose `digit`-th entry takes position `p`.
fn digit_mask(size: usize, digit: usize, p: Position) -> BitSet {
    let block = 7usize.pow(digit as u32);
    let period = block * 7;
    let offset = (p.index() as usize - 1) * block;
    let mut bits = BitSet::new(size);
    let mut start = 0;
    while start < size {
        bits.set_range(start + offset, start + offset + block);
        start += period;
    }
    bits
}

struct AtomSpace<'v> {
    vocab: &'v Vocabulary,
    entries: Vec<usize>,
    size: usize,
    valid: BitSet,
}

impl AtomSpace<'_> {
    fn atoms(&self, term: &Consequence) -> Result<BitSet> {
        Ok(match term {
            Consequence::Typed(t) => {
                let (entry, negated) = self.vocab.resolve(&t.base)?;
                let digit = self
                    .entries
                    .iter()
                    .position(|&e| e == entry)
                    .ok_or_else(|| Error::UnknownBase(t.base.to_string()))?;
                let p = if negated { t.position.symmetric() } else { t.position };
                digit_mask(self.size, digit, p).and(&self.valid)
            }
            Consequence::And(a, b) => self.atoms(a)?.and(&self.atoms(b)?),
            Consequence::Or(a, b) => self.atoms(a)?.or(&self.atoms(b)?),
            Consequence::Not(a) => self.valid.and_not(&self.atoms(a)?),
            Consequence::Top(_) => self.valid.clone(),
            Consequence::Bottom(_) => BitSet::new(self.size),
        })
    }
}

/// A set of assignments (entry ↦ position type) over a list of vocabulary entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSet {
    entries: Vec<usize>,
    bits: BitSet,
}

impl AtomSet {
    /// Vocabulary entries this set ranges over; assignment digit `k` is `entries[k]`.
    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Whether the assignment giving `entries[k]` the type `types[k]` is in the set.
    pub fn contains(&self, types: &[Position]) -> bool {
        assert_eq!(types.len(), self.entries.len());
        let index = types.iter().rev().fold(0, |acc, p| acc * 7 + (p.index() as usize - 1));
        self.bits.get(index)
    }

    /// Assignments in the set, each as one position per entry.
    pub fn assignments(&self) -> impl Iterator<Item = Vec<Position>> + '_ {
        let n = self.entries.len();
        self.bits.ones().map(move |mut i| {
            (0..n)
                .map(|_| {
                    let p = Position::ALL[i % 7];
                    i /= 7;
                    p
                })
                .collect()
        })
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        assert_eq!(self.entries, other.entries, "atom sets over different entries");
        self.bits.is_subset(&other.bits)
    }
}

/// Atom-tuples of `term` over every entry of the vocabulary.
pub fn atoms_of(term: &Consequence, vocab: &Vocabulary) -> Result<AtomSet> {
    atoms_over(term, vocab, (0..vocab.len()).collect())
}

/// Atom-tuples of `term` over the given entries (which must cover every entry it mentions).
pub fn atoms_over(term: &Consequence, vocab: &Vocabulary, entries: Vec<usize>) -> Result<AtomSet> {
    let space = vocab.space(entries)?;
    let bits = space.atoms(term)?;
    Ok(AtomSet { entries: space.entries, bits })
}

/// `a R_T b`: every assignment admitted by `a` is admitted by `b`.
///
/// Decided by searching for an assignment admitted by `a ∧ ¬b`, so the
/// number of entries is not limited by [`MAX_ENTRIES`].
pub fn rt_leq(a: &Consequence, b: &Consequence, vocab: &Vocabulary) -> Result<bool> {
    let term = Consequence::and(a.clone(), Consequence::not(b.clone()));
    Ok(!satisfiable(&term, vocab)?)
}

/// Whether some assignment is admitted by `term`.
pub fn satisfiable(term: &Consequence, vocab: &Vocabulary) -> Result<bool> {
    let mut slots = Vec::new();
    let compiled = compile(term, vocab, &mut slots)?;
    let domains: Vec<Vec<Position>> = slots
        .iter()
        .map(|&e| {
            let forbidden = vocab.entries[e].forbidden();
            Position::ALL.into_iter().filter(|p| !forbidden.contains(p)).collect()
        })
        .collect();
    let mut assignment = alloc::vec![None; slots.len()];
    Ok(search(&compiled, &domains, &mut assignment, 0))
}

/// A consequence with bases resolved to search slots.
enum Compiled {
    Const(bool),
    /// The entry in `slot` takes `position`.
    Leaf {
        slot: usize,
        position: Position,
    },
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Not(Box<Compiled>),
}

fn compile(term: &Consequence, vocab: &Vocabulary, slots: &mut Vec<usize>) -> Result<Compiled> {
    Ok(match term {
        Consequence::Typed(t) => {
            let (entry, negated) = vocab.resolve(&t.base)?;
            let position = if negated { t.position.symmetric() } else { t.position };
            if vocab.entries[entry].forbidden().contains(&position) {
                Compiled::Const(false)
            } else {
                let slot = slots.iter().position(|&e| e == entry).unwrap_or_else(|| {
                    slots.push(entry);
                    slots.len() - 1
                });
                Compiled::Leaf { slot, position }
            }
        }
        Consequence::And(a, b) => {
            Compiled::And(Box::new(compile(a, vocab, slots)?), Box::new(compile(b, vocab, slots)?))
        }
        Consequence::Or(a, b) => Compiled::Or(Box::new(compile(a, vocab, slots)?), Box::new(compile(b, vocab, slots)?)),
        Consequence::Not(a) => Compiled::Not(Box::new(compile(a, vocab, slots)?)),
        Consequence::Top(_) => Compiled::Const(true),
        Consequence::Bottom(_) => Compiled::Const(false),
    })
}

/// Kleene evaluation under a partial assignment; `None` is undetermined.
fn eval3(c: &Compiled, assignment: &[Option<Position>]) -> Option<bool> {
    match c {
        Compiled::Const(v) => Some(*v),
        Compiled::Leaf { slot, position } => assignment[*slot].map(|p| p == *position),
        Compiled::And(a, b) => match (eval3(a, assignment), eval3(b, assignment)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Compiled::Or(a, b) => match (eval3(a, assignment), eval3(b, assignment)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Compiled::Not(a) => eval3(a, assignment).map(|v| !v),
    }
}

fn search(c: &Compiled, domains: &[Vec<Position>], assignment: &mut [Option<Position>], next: usize) -> bool {
    match eval3(c, assignment) {
        Some(v) => v,
        None => {
            // an undetermined formula mentions an unassigned slot, so next < len
            for &p in &domains[next] {
                assignment[next] = Some(p);
                if search(c, domains, assignment, next + 1) {
                    assignment[next] = None;
                    return true;
                }
            }
            assignment[next] = None;
            false
        }
    }
}

/// `a Q_T b`.
pub fn rt_equivalent(a: &Consequence, b: &Consequence, vocab: &Vocabulary) -> Result<bool> {
    Ok(rt_leq(a, b, vocab)? && rt_leq(b, a, vocab)?)
}

/// A consequence with its atom set over a fixed entry list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpElem {
    pub term: Consequence,
    pub atoms: AtomSet,
}

/// The np-cis over a vocabulary, with `R_T` as atom-set inclusion.
pub struct NpCis<'v> {
    space: AtomSpace<'v>,
}

impl<'v> NpCis<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Result<Self> {
        Ok(NpCis { space: vocab.space((0..vocab.len()).collect())? })
    }

    pub fn lift(&self, term: Consequence) -> Result<NpElem> {
        let bits = self.space.atoms(&term)?;
        Ok(NpElem { term, atoms: AtomSet { entries: self.space.entries.clone(), bits } })
    }

    fn elem(&self, term: Consequence, bits: BitSet) -> NpElem {
        NpElem { term, atoms: AtomSet { entries: self.space.entries.clone(), bits } }
    }
}

impl BooleanStructure for NpCis<'_> {
    type Elem = NpElem;

    fn meet(&self, a: &NpElem, b: &NpElem) -> NpElem {
        self.elem(Consequence::and(a.term.clone(), b.term.clone()), a.atoms.bits.and(&b.atoms.bits))
    }

    fn complement(&self, a: &NpElem) -> NpElem {
        self.elem(Consequence::not(a.term.clone()), self.space.valid.and_not(&a.atoms.bits))
    }

    fn top(&self) -> NpElem {
        self.elem(Consequence::Top(self.space.vocab.arity), self.space.valid.clone())
    }

    fn bottom(&self) -> NpElem {
        self.elem(Consequence::Bottom(self.space.vocab.arity), BitSet::new(self.space.size))
    }

    fn leq(&self, a: &NpElem, b: &NpElem) -> bool {
        a.atoms.bits.is_subset(&b.atoms.bits)
    }
}

/// A failed np-cis requirement, numbered as in the definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NpcisViolation {
    /// `T_i d ∧ T_j d` is satisfiable for `i ≠ j`.
    Exclusive { entry: usize, i: Position, j: Position },
    /// `T_1 d ∨ … ∨ T_7 d` is not `⊤_T`.
    Exhaustive { entry: usize },
    /// `T_i d` and `T_σ(i) d′` differ.
    Symmetry { entry: usize, i: Position },
    /// Two Q-equivalent bases give different `T_i`.
    Congruence { left: Condition, right: Condition, i: Position },
    /// `T_i(⊤)` is not `⊥_T` for `i ∈ {1,3,4,7}`.
    TopType { i: Position },
    /// `T_i(⊥)` is not `⊥_T` for `i ∈ {1,2,3,5}`.
    BottomType { i: Position },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NpcisReport {
    pub violations: Vec<NpcisViolation>,
    pub bqo: BqoReport,
}

impl NpcisReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.bqo.is_ok()
    }
}

/// The np-cis with consequences as terms and `R_T` decided by [`rt_leq`].
pub struct TermNpCis<'v> {
    vocab: &'v Vocabulary,
}

impl<'v> TermNpCis<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        TermNpCis { vocab }
    }

    /// Checks that every base of `term` resolves, so `leq` cannot fail on it.
    pub fn lift(&self, term: Consequence) -> Result<Consequence> {
        self.vocab.mentioned(&term)?;
        Ok(term)
    }
}

impl BooleanStructure for TermNpCis<'_> {
    type Elem = Consequence;

    fn meet(&self, a: &Consequence, b: &Consequence) -> Consequence {
        Consequence::and(a.clone(), b.clone())
    }

    fn complement(&self, a: &Consequence) -> Consequence {
        Consequence::not(a.clone())
    }

    fn top(&self) -> Consequence {
        Consequence::Top(self.vocab.arity)
    }

    fn bottom(&self) -> Consequence {
        Consequence::Bottom(self.vocab.arity)
    }

    /// Panics on terms that were not lifted.
    fn leq(&self, a: &Consequence, b: &Consequence) -> bool {
        rt_leq(a, b, self.vocab).expect("lifted terms resolve")
    }
}

/// Checks requirements (1)–(6) for every entry and the Bqo axioms over `samples`.
pub fn verify_npcis(vocab: &Vocabulary, samples: &[Consequence]) -> Result<NpcisReport> {
    let typed = |p: Position, base: &Condition| Consequence::typed(p, base.clone());
    let empty = |t: &Consequence| -> Result<bool> { Ok(!satisfiable(t, vocab)?) };
    let top_t = Consequence::Top(vocab.arity);
    let mut violations = Vec::new();

    for entry in 0..vocab.len() {
        let d = vocab.representative(entry).clone();
        for i in Position::ALL {
            for j in Position::ALL {
                if i != j && !empty(&Consequence::and(typed(i, &d), typed(j, &d)))? {
                    violations.push(NpcisViolation::Exclusive { entry, i, j });
                }
            }
        }
        if !rt_leq(&top_t, &Consequence::any_of(&Position::ALL, &d), vocab)? {
            violations.push(NpcisViolation::Exhaustive { entry });
        }
        let negated = Condition::not(d.clone());
        for i in Position::ALL {
            if !rt_equivalent(&typed(i, &d), &typed(i.symmetric(), &negated), vocab)? {
                violations.push(NpcisViolation::Symmetry { entry, i });
            }
        }
    }

    let registered: Vec<_> = vocab.registered().collect();
    for &(c, ec, nc) in &registered {
        for &(d, ed, nd) in &registered {
            if c >= d || (ec, nc) != (ed, nd) {
                continue;
            }
            for i in Position::ALL {
                if !rt_equivalent(&typed(i, c), &typed(i, d), vocab)? {
                    violations.push(NpcisViolation::Congruence { left: c.clone(), right: d.clone(), i });
                }
            }
        }
    }

    let (top, bottom) = (Condition::top(vocab.arity), Condition::bottom(vocab.arity));
    for i in [Position::T1, Position::T3, Position::T4, Position::T7] {
        if !empty(&typed(i, &top))? {
            violations.push(NpcisViolation::TopType { i });
        }
    }
    for i in [Position::T1, Position::T2, Position::T3, Position::T5] {
        if !empty(&typed(i, &bottom))? {
            violations.push(NpcisViolation::BottomType { i });
        }
    }

    let np = TermNpCis::new(vocab);
    let carrier: Vec<Consequence> = samples.iter().map(|s| np.lift(s.clone())).collect::<Result<_>>()?;
    let bqo = verify_bqo(&np, &carrier);
    Ok(NpcisReport { violations, bqo })
}
