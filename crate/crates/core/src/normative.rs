//! Joining systems: norms as ⟨ground, consequence⟩ pairs between two
//! quasi-orderings, the subinterval relation, minimal norms and connectivity.
//!
//! The join set is a finite generator set. Closure under the joining-system
//! conditions is checked against finite carriers, never materialized.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::bqo::{verify_bqo, BqoReport, SemanticCis};
use crate::condition::{denote, Condition, Denotation, Interpretation, ProbeUniverse};
use crate::positions::{rt_leq, verify_npcis, Consequence, MoveCis, MoveTerm, NpcisReport, Vocabulary};
use crate::{Error, Result};

/// `⟨a1,a2⟩ ⊴ ⟨b1,b2⟩` iff `b1 R1 a1` and `a2 R2 b2`.
pub fn subinterval_leq<G, C>(
    a: (&G, &C),
    b: (&G, &C),
    r1: impl Fn(&G, &G) -> bool,
    r2: impl Fn(&C, &C) -> bool,
) -> bool {
    r1(b.0, a.0) && r2(a.1, b.1)
}

/// `⟨a1,a2⟩ ◁ ⟨b1,b2⟩` iff `(b1 S1 a1 ∧ a2 R2 b2) ∨ (b1 R1 a1 ∧ a2 S2 b2)`.
pub fn strict_below<G, C>(a: (&G, &C), b: (&G, &C), r1: impl Fn(&G, &G) -> bool, r2: impl Fn(&C, &C) -> bool) -> bool {
    let g_leq = r1(b.0, a.0);
    let g_strict = g_leq && !r1(a.0, b.0);
    let c_leq = r2(a.1, b.1);
    let c_strict = c_leq && !r2(b.1, a.1);
    (g_strict && c_leq) || (g_leq && c_strict)
}

/// A relation on `0..n` stored as a dense matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuasiOrder {
    n: usize,
    rel: Vec<bool>,
}

impl FiniteQuasiOrder {
    pub fn from_fn(n: usize, mut leq: impl FnMut(usize, usize) -> bool) -> Self {
        let mut rel = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rel.push(leq(i, j));
            }
        }
        FiniteQuasiOrder { n, rel }
    }

    pub fn try_from_fn(n: usize, mut leq: impl FnMut(usize, usize) -> Result<bool>) -> Result<Self> {
        let mut rel = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rel.push(if i == j { true } else { leq(i, j)? });
            }
        }
        Ok(FiniteQuasiOrder { n, rel })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.rel[a * self.n + b]
    }

    pub fn strictly_below(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) && !self.leq(b, a)
    }

    pub fn equivalent(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) && self.leq(b, a)
    }

    /// First failure of reflexivity (`(a, a, a)`) or transitivity (`(a, b, c)`).
    pub fn quasi_order_violation(&self) -> Option<(usize, usize, usize)> {
        for a in 0..self.n {
            if !self.leq(a, a) {
                return Some((a, a, a));
            }
        }
        for a in 0..self.n {
            for b in 0..self.n {
                if !self.leq(a, b) {
                    continue;
                }
                for c in 0..self.n {
                    if self.leq(b, c) && !self.leq(a, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    /// Least upper bounds of `subset`: the upper bounds below every upper bound.
    /// Empty when there is no upper bound; several when they are equivalent.
    pub fn lub(&self, subset: &[usize]) -> Vec<usize> {
        let upper: Vec<usize> = (0..self.n).filter(|&u| subset.iter().all(|&c| self.leq(c, u))).collect();
        upper.iter().copied().filter(|&u| upper.iter().all(|&v| self.leq(u, v))).collect()
    }

    /// Greatest lower bounds of `subset`.
    pub fn glb(&self, subset: &[usize]) -> Vec<usize> {
        let lower: Vec<usize> = (0..self.n).filter(|&l| subset.iter().all(|&c| self.leq(l, c))).collect();
        lower.iter().copied().filter(|&l| lower.iter().all(|&v| self.leq(v, l))).collect()
    }
}

/// Two finite quasi-orders and a set of joins `(ground index, consequence index)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoiningSystem {
    pub grounds: FiniteQuasiOrder,
    pub consequences: FiniteQuasiOrder,
    pub joins: Vec<(usize, usize)>,
}

/// Largest join group whose subsets are enumerated exhaustively by the closure check.
pub const CLOSURE_SUBSET_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosureViolation {
    /// Condition (1): `joins[from] ⊴ missing` but `missing` is not a join.
    Upward { from: usize, missing: (usize, usize) },
    /// Condition (2): every ground in `subset` is joined to `consequence`, but `missing` in their lub is not.
    Lub { subset: Vec<usize>, consequence: usize, missing: usize },
    /// Condition (3): `ground` is joined to every consequence in `subset`, but not to `missing` in their glb.
    Glb { ground: usize, subset: Vec<usize>, missing: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClosureReport {
    pub violations: Vec<ClosureViolation>,
    /// Some join group exceeded [`CLOSURE_SUBSET_LIMIT`]; only its pairs were checked.
    pub truncated: bool,
}

impl ClosureReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    /// For each join, a minimal join `⊴`-below it, if any.
    pub witnesses: Vec<(usize, Option<usize>)>,
}

impl ConnectivityReport {
    pub fn is_connected(&self) -> bool {
        self.witnesses.iter().all(|(_, w)| w.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = usize> + '_ {
        self.witnesses.iter().filter(|(_, w)| w.is_none()).map(|(j, _)| *j)
    }
}

impl JoiningSystem {
    pub fn new(grounds: FiniteQuasiOrder, consequences: FiniteQuasiOrder, joins: Vec<(usize, usize)>) -> Self {
        JoiningSystem { grounds, consequences, joins }
    }

    pub fn subinterval_leq(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        subinterval_leq(
            (&a.0, &a.1),
            (&b.0, &b.1),
            |x, y| self.grounds.leq(*x, *y),
            |x, y| self.consequences.leq(*x, *y),
        )
    }

    pub fn strict_below(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        strict_below((&a.0, &a.1), (&b.0, &b.1), |x, y| self.grounds.leq(*x, *y), |x, y| self.consequences.leq(*x, *y))
    }

    /// Indices of joins with no join strictly below them.
    pub fn minimal_norms(&self) -> Vec<usize> {
        (0..self.joins.len()).filter(|&n| !self.joins.iter().any(|&m| self.strict_below(m, self.joins[n]))).collect()
    }

    /// Connectivity against the computed minimal joins.
    pub fn check_connectivity(&self) -> ConnectivityReport {
        self.check_connectivity_against(&self.minimal_norms())
    }

    /// Connectivity against a given candidate set of minimal joins.
    pub fn check_connectivity_against(&self, minimal: &[usize]) -> ConnectivityReport {
        let witnesses = (0..self.joins.len())
            .map(|j| {
                let w = minimal.iter().copied().find(|&m| self.subinterval_leq(self.joins[m], self.joins[j]));
                (j, w)
            })
            .collect();
        ConnectivityReport { witnesses }
    }

    fn is_join(&self, pair: (usize, usize)) -> bool {
        self.joins.contains(&pair)
    }

    /// Checks conditions (1)–(3) with the explicit carriers as the universe of pairs.
    pub fn check_joining_closure(&self) -> ClosureReport {
        let mut report = ClosureReport::default();
        for (from, &j) in self.joins.iter().enumerate() {
            for g in 0..self.grounds.len() {
                for c in 0..self.consequences.len() {
                    if !self.is_join((g, c)) && self.subinterval_leq(j, (g, c)) {
                        report.violations.push(ClosureViolation::Upward { from, missing: (g, c) });
                    }
                }
            }
        }

        for consequence in 0..self.consequences.len() {
            let joined: Vec<usize> = (0..self.grounds.len()).filter(|&g| self.is_join((g, consequence))).collect();
            for subset in self.subsets(&joined, &mut report.truncated) {
                for missing in self.grounds.lub(&subset) {
                    if !self.is_join((missing, consequence)) {
                        report.violations.push(ClosureViolation::Lub { subset: subset.clone(), consequence, missing });
                    }
                }
            }
        }

        for ground in 0..self.grounds.len() {
            let joined: Vec<usize> = (0..self.consequences.len()).filter(|&c| self.is_join((ground, c))).collect();
            for subset in self.subsets(&joined, &mut report.truncated) {
                for missing in self.consequences.glb(&subset) {
                    if !self.is_join((ground, missing)) {
                        report.violations.push(ClosureViolation::Glb { ground, subset: subset.clone(), missing });
                    }
                }
            }
        }
        report
    }

    /// Nonempty subsets of `items`; singletons and pairs only past the limit.
    fn subsets(&self, items: &[usize], truncated: &mut bool) -> Vec<Vec<usize>> {
        if items.len() <= CLOSURE_SUBSET_LIMIT {
            (1u32..1 << items.len())
                .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect())
                .collect()
        } else {
            *truncated = true;
            let mut out: Vec<Vec<usize>> = items.iter().map(|&x| alloc::vec![x]).collect();
            for (i, &a) in items.iter().enumerate() {
                for &b in &items[i + 1..] {
                    out.push(alloc::vec![a, b]);
                }
            }
            out
        }
    }

    /// All carrier pairs `⊴`-above some join: the least join set satisfying condition (1).
    pub fn upward_closure(&self) -> JoiningSystem {
        let mut joins = Vec::new();
        for g in 0..self.grounds.len() {
            for c in 0..self.consequences.len() {
                if self.joins.iter().any(|&j| self.subinterval_leq(j, (g, c))) {
                    joins.push((g, c));
                }
            }
        }
        JoiningSystem { grounds: self.grounds.clone(), consequences: self.consequences.clone(), joins }
    }
}

/// A norm `⟨Mc, t⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Norm {
    pub id: String,
    pub ground: MoveTerm,
    pub consequence: Consequence,
    /// Free-form annotation, e.g. which informal rule the norm represents.
    pub note: Option<String>,
}

impl Norm {
    pub fn new(id: impl Into<String>, ground: Condition, consequence: Consequence) -> Self {
        Norm { id: id.into(), ground: MoveTerm::new(ground), consequence, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Elementary norms have a single typed atom `T_i d` as consequence.
    pub fn is_elementary(&self) -> bool {
        self.consequence.as_typed().is_some()
    }

    /// Ground and consequence bases share one arity.
    pub fn check_arity(&self) -> Result<usize> {
        let g = self.ground.base().checked_arity()?;
        let c = self.consequence.base_arity();
        if g != c {
            return Err(Error::ArityMismatch { expected: g, found: c });
        }
        Ok(g)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.ground, self.consequence)
    }
}

/// A normative system as a gc-system: grounds ordered by `R_M`, consequences
/// by `R_T`, one join per norm.
///
/// The carriers are the norms' own grounds and consequences, so joins are
/// `(i, i)`. Orders are decided on a probe universe when the system is built.
#[derive(Clone, Debug)]
pub struct GcSystem {
    norms: Vec<Norm>,
    arity: usize,
    vocabulary: Vocabulary,
    ground_extents: Vec<Denotation>,
    joining: JoiningSystem,
}

impl GcSystem {
    pub fn build<I: Interpretation>(norms: Vec<Norm>, universe: &ProbeUniverse<I>) -> Result<Self> {
        let arity = match norms.first() {
            Some(n) => n.check_arity()?,
            None => 0,
        };
        for n in &norms {
            let a = n.check_arity()?;
            if a != arity {
                return Err(Error::ArityMismatch { expected: arity, found: a });
            }
        }
        let vocabulary = Vocabulary::for_consequences(arity, norms.iter().map(|n| &n.consequence), universe)?;
        let ground_extents: Vec<Denotation> =
            norms.iter().map(|n| denote(n.ground.base(), universe)).collect::<Result<_>>()?;
        let grounds = FiniteQuasiOrder::from_fn(norms.len(), |a, b| ground_extents[a].is_subset(&ground_extents[b]));
        let consequences = FiniteQuasiOrder::try_from_fn(norms.len(), |a, b| {
            rt_leq(&norms[a].consequence, &norms[b].consequence, &vocabulary)
        })?;
        let joining = JoiningSystem::new(grounds, consequences, (0..norms.len()).map(|i| (i, i)).collect());
        Ok(GcSystem { norms, arity, vocabulary, ground_extents, joining })
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn joining(&self) -> &JoiningSystem {
        &self.joining
    }

    /// `norms[a].ground R_M norms[b].ground`.
    pub fn ground_leq(&self, a: usize, b: usize) -> bool {
        self.joining.grounds.leq(a, b)
    }

    /// `norms[a].consequence R_T norms[b].consequence`.
    pub fn consequence_leq(&self, a: usize, b: usize) -> bool {
        self.joining.consequences.leq(a, b)
    }

    pub fn ground_extent(&self, i: usize) -> &Denotation {
        &self.ground_extents[i]
    }

    pub fn minimal_norms(&self) -> Vec<&Norm> {
        self.joining.minimal_norms().into_iter().map(|i| &self.norms[i]).collect()
    }

    pub fn elementary_norms(&self) -> Vec<&Norm> {
        self.norms.iter().filter(|n| n.is_elementary()).collect()
    }

    pub fn check_connectivity(&self) -> ConnectivityReport {
        self.joining.check_connectivity()
    }

    pub fn check_joining_closure(&self) -> ClosureReport {
        self.joining.check_joining_closure()
    }

    /// Bqo axioms on the m-cis generated by the ground bases: every ground
    /// base, every atom it mentions, and their negations.
    pub fn ground_bqo_report<I: Interpretation>(&self, universe: &ProbeUniverse<I>) -> Result<BqoReport> {
        let cis = SemanticCis::new(universe, self.arity);
        let mcis = MoveCis::new(cis);
        let mut bases: Vec<Condition> = Vec::new();
        let mut push = |c: Condition| {
            if !bases.contains(&c) {
                bases.push(c);
            }
        };
        for n in &self.norms {
            let base = n.ground.base().clone();
            for (name, a) in base.atoms() {
                push(Condition::atom(name, a));
            }
            push(Condition::not(base.clone()));
            push(base);
        }
        let carrier = bases.into_iter().map(|b| mcis.lift(b)).collect::<Result<Vec<_>>>()?;
        Ok(verify_bqo(&mcis, &carrier))
    }

    /// np-cis requirements over the consequence vocabulary, Bqo axioms over
    /// the norms' consequences.
    pub fn consequence_npcis_report(&self) -> Result<NpcisReport> {
        let samples: Vec<Consequence> = self.norms.iter().map(|n| n.consequence.clone()).collect();
        verify_npcis(&self.vocabulary, &samples)
    }
}
