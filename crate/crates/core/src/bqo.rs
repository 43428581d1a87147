//! Boolean quasi-orderings: a Boolean algebra of elements together with a
//! reflexive, transitive relation compatible with meet and complement.
//!
//! [`verify_bqo`] checks every axiom by exhaustion over a finite carrier and
//! returns each violated instance. Elements are named by carrier index.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::condition::{denote, Condition, Denotation, Interpretation, ProbeUniverse};
use crate::Result;

/// Meet, complement, constants and the relation `R` of a Boolean quasi-ordering.
pub trait BooleanStructure {
    type Elem;

    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn complement(&self, a: &Self::Elem) -> Self::Elem;
    fn top(&self) -> Self::Elem;
    fn bottom(&self) -> Self::Elem;
    /// `a R b`.
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
}

/// A structure together with the finite carrier it is checked on.
#[derive(Clone, Debug)]
pub struct Bqo<S: BooleanStructure> {
    pub structure: S,
    pub carrier: Vec<S::Elem>,
}

impl<S: BooleanStructure> Bqo<S> {
    pub fn new(structure: S, carrier: Vec<S::Elem>) -> Self {
        Bqo { structure, carrier }
    }

    pub fn verify(&self) -> BqoReport {
        verify_bqo(&self.structure, &self.carrier)
    }

    /// Indifference part `Q`.
    pub fn equivalent(&self, a: &S::Elem, b: &S::Elem) -> bool {
        self.structure.leq(a, b) && self.structure.leq(b, a)
    }

    /// Strict part `S`.
    pub fn strictly_below(&self, a: &S::Elem, b: &S::Elem) -> bool {
        self.structure.leq(a, b) && !self.structure.leq(b, a)
    }
}

/// One failed axiom instance; indices refer to the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BqoViolation {
    /// not `a R a`.
    Reflexivity { a: usize },
    /// `a R b`, `b R c` but not `a R c`.
    Transitivity { a: usize, b: usize, c: usize },
    /// `a R b`, `a R c` but not `a R (b ∧ c)`.
    MeetIntroduction { a: usize, b: usize, c: usize },
    /// `a R b` but not `b' R a'`.
    Contraposition { a: usize, b: usize },
    /// not `(a ∧ b) R a`.
    MeetElimination { a: usize, b: usize },
    /// `⊤ R ⊥`.
    TopBelowBottom,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BqoReport {
    pub carrier_size: usize,
    pub violations: Vec<BqoViolation>,
}

impl BqoReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks reflexivity, transitivity and axioms (1)–(4) over all carrier tuples.
#[allow(clippy::needless_range_loop)] // index triples are the violation payload
pub fn verify_bqo<S: BooleanStructure>(s: &S, carrier: &[S::Elem]) -> BqoReport {
    let n = carrier.len();
    let mut violations = Vec::new();
    let leq: Vec<Vec<bool>> = carrier.iter().map(|a| carrier.iter().map(|b| s.leq(a, b)).collect()).collect();

    for a in 0..n {
        if !leq[a][a] {
            violations.push(BqoViolation::Reflexivity { a });
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a][b] {
                continue;
            }
            for c in 0..n {
                if leq[b][c] && !leq[a][c] {
                    violations.push(BqoViolation::Transitivity { a, b, c });
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a][b] {
                continue;
            }
            for c in 0..n {
                if leq[a][c] && !s.leq(&carrier[a], &s.meet(&carrier[b], &carrier[c])) {
                    violations.push(BqoViolation::MeetIntroduction { a, b, c });
                }
            }
        }
    }
    let complements: Vec<_> = carrier.iter().map(|a| s.complement(a)).collect();
    for a in 0..n {
        for b in 0..n {
            if leq[a][b] && !s.leq(&complements[b], &complements[a]) {
                violations.push(BqoViolation::Contraposition { a, b });
            }
            if !s.leq(&s.meet(&carrier[a], &carrier[b]), &carrier[a]) {
                violations.push(BqoViolation::MeetElimination { a, b });
            }
        }
    }
    if s.leq(&s.top(), &s.bottom()) {
        violations.push(BqoViolation::TopBelowBottom);
    }
    BqoReport { carrier_size: n, violations }
}

/// A condition paired with its extent on a probe universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Denoted {
    pub term: Condition,
    pub extent: Denotation,
}

/// Condition implication structure with `R` decided by extent inclusion.
pub struct SemanticCis<'u, I: Interpretation> {
    universe: &'u ProbeUniverse<I>,
    arity: usize,
    top: Denoted,
    bottom: Denoted,
}

impl<'u, I: Interpretation> SemanticCis<'u, I> {
    pub fn new(universe: &'u ProbeUniverse<I>, arity: usize) -> Self {
        let lift = |t: Condition| {
            let extent = denote(&t, universe).expect("constants always denote");
            Denoted { term: t, extent }
        };
        SemanticCis { universe, arity, top: lift(Condition::top(arity)), bottom: lift(Condition::bottom(arity)) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn lift(&self, term: Condition) -> Result<Denoted> {
        let extent = denote(&term, self.universe)?;
        if extent.arity() != self.arity {
            return Err(crate::Error::ArityMismatch { expected: self.arity, found: extent.arity() });
        }
        Ok(Denoted { term, extent })
    }

    pub fn lift_all(&self, terms: impl IntoIterator<Item = Condition>) -> Result<Vec<Denoted>> {
        terms.into_iter().map(|t| self.lift(t)).collect()
    }
}

impl<I: Interpretation> BooleanStructure for SemanticCis<'_, I> {
    type Elem = Denoted;

    fn meet(&self, a: &Denoted, b: &Denoted) -> Denoted {
        Denoted { term: Condition::and(a.term.clone(), b.term.clone()), extent: a.extent.intersection(&b.extent) }
    }

    fn complement(&self, a: &Denoted) -> Denoted {
        Denoted { term: Condition::not(a.term.clone()), extent: a.extent.complement() }
    }

    fn top(&self) -> Denoted {
        self.top.clone()
    }

    fn bottom(&self) -> Denoted {
        self.bottom.clone()
    }

    fn leq(&self, a: &Denoted, b: &Denoted) -> bool {
        a.extent.is_subset(&b.extent)
    }
}

/// A relation given by explicitly declared implication pairs.
///
/// Terms with no probe semantics can still be ordered this way. The pair set
/// is taken literally; [`DeclaredImplications::closure`] adds the reflexive
/// transitive closure over mentioned terms.
#[derive(Clone, Debug, Default)]
pub struct DeclaredImplications {
    arity: usize,
    pairs: BTreeSet<(Condition, Condition)>,
}

impl DeclaredImplications {
    pub fn new(arity: usize) -> Self {
        DeclaredImplications { arity, pairs: BTreeSet::new() }
    }

    pub fn declare(mut self, a: Condition, b: Condition) -> Self {
        self.pairs.insert((a, b));
        self
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Condition, Condition)> {
        self.pairs.iter()
    }

    /// Reflexive and transitive closure over every term mentioned in a pair.
    #[allow(clippy::needless_range_loop)] // Warshall reads and writes rows of the same matrix
    pub fn closure(&self) -> DeclaredImplications {
        let terms: Vec<Condition> =
            self.pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect::<BTreeSet<_>>().into_iter().collect();
        let n = terms.len();
        let idx = |t: &Condition| terms.binary_search(t).unwrap();
        let mut m = alloc::vec![alloc::vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in &self.pairs {
            m[idx(a)][idx(b)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if m[i][k] {
                    for j in 0..n {
                        if m[k][j] {
                            m[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut pairs = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if m[i][j] {
                    pairs.insert((terms[i].clone(), terms[j].clone()));
                }
            }
        }
        DeclaredImplications { arity: self.arity, pairs }
    }

    /// Declared pairs that do not hold semantically on `universe`.
    pub fn inconsistencies<I: Interpretation>(
        &self,
        universe: &ProbeUniverse<I>,
    ) -> Result<Vec<(Condition, Condition)>> {
        let mut out = Vec::new();
        for (a, b) in &self.pairs {
            if !crate::condition::implies(a, b, universe)? {
                out.push((a.clone(), b.clone()));
            }
        }
        Ok(out)
    }
}

impl BooleanStructure for DeclaredImplications {
    type Elem = Condition;

    fn meet(&self, a: &Condition, b: &Condition) -> Condition {
        Condition::and(a.clone(), b.clone())
    }

    fn complement(&self, a: &Condition) -> Condition {
        Condition::not(a.clone())
    }

    fn top(&self) -> Condition {
        Condition::top(self.arity)
    }

    fn bottom(&self) -> Condition {
        Condition::bottom(self.arity)
    }

    fn leq(&self, a: &Condition, b: &Condition) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::TableInterpretation;

    fn universe() -> ProbeUniverse<TableInterpretation> {
        TableInterpretation::new(2, 4)
            .declare("a", 1, |t, s| (s + t[0].0 as usize).is_multiple_of(2))
            .declare("b", 1, |_, s| s < 3)
            .universe()
    }

    #[test]
    fn semantic_relation_satisfies_axioms() {
        let u = universe();
        let cis = SemanticCis::new(&u, 1);
        let (a, b) = (Condition::atom("a", 1), Condition::atom("b", 1));
        let carrier = cis
            .lift_all([
                a.clone(),
                b.clone(),
                Condition::not(a.clone()),
                Condition::and(a.clone(), b.clone()),
                Condition::or(a, b),
                Condition::top(1),
                Condition::bottom(1),
            ])
            .unwrap();
        let report = Bqo::new(cis, carrier).verify();
        assert!(report.is_ok(), "{:?}", report.violations);
        assert_eq!(report.carrier_size, 7);
    }

    #[test]
    fn missing_transitivity_edge_is_named() {
        let (x, y, z) = (Condition::atom("x", 1), Condition::atom("y", 1), Condition::atom("z", 1));
        let declared = DeclaredImplications::new(1)
            .declare(x.clone(), x.clone())
            .declare(y.clone(), y.clone())
            .declare(z.clone(), z.clone())
            .declare(x.clone(), y.clone())
            .declare(y.clone(), z.clone());
        let report = verify_bqo(&declared, &[x.clone(), y.clone(), z.clone()]);
        assert!(report.violations.contains(&BqoViolation::Transitivity { a: 0, b: 1, c: 2 }));
        let closed = declared.closure();
        assert!(closed.leq(&x, &z));
        let report = verify_bqo(&closed, &[x, y, z]);
        assert!(!report.violations.iter().any(|v| matches!(v, BqoViolation::Transitivity { .. })));
    }

    #[test]
    fn declared_pairs_checked_against_semantics() {
        let u = universe();
        let (a, b) = (Condition::atom("a", 1), Condition::atom("b", 1));
        let declared = DeclaredImplications::new(1)
            .declare(Condition::and(a.clone(), b.clone()), a.clone())
            .declare(a.clone(), b.clone());
        let bad = declared.inconsistencies(&u).unwrap();
        assert_eq!(bad, alloc::vec![(a, b)]);
    }

    #[test]
    fn top_below_bottom_detected() {
        let r = DeclaredImplications::new(0).declare(Condition::top(0), Condition::bottom(0));
        assert!(verify_bqo(&r, &[]).violations.contains(&BqoViolation::TopBelowBottom));
    }
}
