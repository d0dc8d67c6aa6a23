//! Linear combinations of joint-entropy atoms with exact rational
//! coefficients, plus the canonicalization steps used by the elimination
//! pipeline: independence substitution and a greedy Shannon-nonnegativity
//! check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A set of variable names naming one entropy atom `H(set)`.
pub type VarSet = BTreeSet<String>;

/// Declared independence between two disjoint variable groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndepFact {
    pub a: VarSet,
    pub b: VarSet,
}

impl IndepFact {
    pub fn new(a: VarSet, b: VarSet) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Domain("independence fact needs nonempty groups".into()));
        }
        if !a.is_disjoint(&b) {
            return Err(Error::OverlappingGroups(format!(
                "independence fact groups overlap: {a:?} vs {b:?}"
            )));
        }
        // canonical side order so written direction does not matter
        if a <= b {
            Ok(Self { a, b })
        } else {
            Ok(Self { a: b, b: a })
        }
    }

    fn union(&self) -> VarSet {
        self.a.union(&self.b).cloned().collect()
    }
}

/// Canonical linear combination of entropy atoms: no zero coefficients and
/// no empty-set atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InfoExpr {
    terms: BTreeMap<VarSet, BigRational>,
}

impl InfoExpr {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn atom(set: VarSet, coeff: BigRational) -> Self {
        let mut e = Self::zero();
        e.add_atom(set, coeff);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VarSet, &BigRational)> {
        self.terms.iter()
    }

    pub fn add_atom(&mut self, set: VarSet, coeff: BigRational) {
        if set.is_empty() || coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(set.clone()).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&set);
        }
    }

    pub fn add(&self, other: &InfoExpr) -> InfoExpr {
        let mut out = self.clone();
        for (set, coeff) in &other.terms {
            out.add_atom(set.clone(), coeff.clone());
        }
        out
    }

    pub fn sub(&self, other: &InfoExpr) -> InfoExpr {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, factor: &BigRational) -> InfoExpr {
        if factor.is_zero() {
            return InfoExpr::zero();
        }
        InfoExpr {
            terms: self
                .terms
                .iter()
                .map(|(s, c)| (s.clone(), c * factor))
                .collect(),
        }
    }

    /// Evaluates the expression under an assignment of atoms to rationals.
    pub fn eval(&self, assignment: &BTreeMap<VarSet, BigRational>) -> BigRational {
        let mut acc = BigRational::zero();
        for (set, coeff) in &self.terms {
            if let Some(v) = assignment.get(set) {
                acc += coeff * v;
            }
        }
        acc
    }
}

#[cfg(test)]
fn varset(names: &[&str]) -> VarSet {
    names.iter().map(|s| s.to_string()).collect()
}

/// Expands `I(a; b | c)` into entropy atoms:
/// `H(a,c) + H(b,c) - H(a,b,c) - H(c)`.
pub fn expand_mi(a: &VarSet, b: &VarSet, c: &VarSet) -> Result<InfoExpr> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("mutual-information groups must be nonempty".into()));
    }
    if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
        return Err(Error::OverlappingGroups(format!(
            "groups of I({a:?};{b:?}|{c:?}) overlap"
        )));
    }
    let ac: VarSet = a.union(c).cloned().collect();
    let bc: VarSet = b.union(c).cloned().collect();
    let abc: VarSet = ac.union(b).cloned().collect();
    let mut e = InfoExpr::zero();
    e.add_atom(ac, BigRational::one());
    e.add_atom(bc, BigRational::one());
    e.add_atom(abc, -BigRational::one());
    e.add_atom(c.clone(), -BigRational::one());
    Ok(e)
}

/// Expands the conditional entropy `H(g | c) = H(g,c) - H(c)`.
pub fn expand_entropy(g: &VarSet, c: &VarSet) -> Result<InfoExpr> {
    if g.is_empty() {
        return Err(Error::Domain("entropy group must be nonempty".into()));
    }
    if !g.is_disjoint(c) {
        return Err(Error::OverlappingGroups(format!("groups of H({g:?}|{c:?}) overlap")));
    }
    let gc: VarSet = g.union(c).cloned().collect();
    let mut e = InfoExpr::zero();
    e.add_atom(gc, BigRational::one());
    e.add_atom(c.clone(), -BigRational::one());
    Ok(e)
}

/// Substitutes `H(A u B) -> H(A) + H(B)` for each fact whose exact union
/// atom appears; iterated to a fixpoint, so the result is idempotent.
pub fn apply_independence(e: &InfoExpr, facts: &[IndepFact]) -> InfoExpr {
    let mut cur = e.clone();
    loop {
        let mut next = InfoExpr::zero();
        let mut changed = false;
        'atoms: for (set, coeff) in &cur.terms {
            for fact in facts {
                if *set == fact.union() {
                    next.add_atom(fact.a.clone(), coeff.clone());
                    next.add_atom(fact.b.clone(), coeff.clone());
                    changed = true;
                    continue 'atoms;
                }
            }
            next.add_atom(set.clone(), coeff.clone());
        }
        if !changed {
            return next;
        }
        cur = next;
    }
}

const SHANNON_ITER_CAP: usize = 1000;

/// Greedy check that an expression is a nonnegative rational combination of
/// conditional mutual informations and conditional entropies. Conservative:
/// `false` only means the greedy decomposition failed, not that the
/// expression is negative somewhere.
pub fn shannon_nonneg(e: &InfoExpr) -> bool {
    let mut e = e.clone();
    for _ in 0..SHANNON_ITER_CAP {
        if e.is_zero() {
            return true;
        }
        if e.terms.values().all(|c| c.is_positive()) {
            // bare entropies are nonnegative
            return true;
        }
        let maximal: Vec<VarSet> = e
            .terms
            .keys()
            .filter(|s| !e.terms.keys().any(|t| *s != t && s.is_subset(t)))
            .cloned()
            .collect();
        // deterministic pick: largest cardinality, then reverse-lex order
        let pick = |sets: Vec<VarSet>| -> Option<VarSet> {
            sets.into_iter().max_by(|x, y| {
                x.len()
                    .cmp(&y.len())
                    .then_with(|| x.iter().cmp(y.iter()))
            })
        };

        let neg_maximal: Vec<VarSet> = maximal
            .iter()
            .filter(|s| e.terms[*s].is_negative())
            .cloned()
            .collect();
        if let Some(t) = pick(neg_maximal) {
            // t must be the union atom of a conditional mutual information
            let positives: Vec<VarSet> = e
                .terms
                .iter()
                .filter(|(s, c)| c.is_positive() && s.is_subset(&t) && **s != t)
                .map(|(s, _)| s.clone())
                .collect();
            let mut found = false;
            'pairs: for p in &positives {
                for q in &positives {
                    if p >= q {
                        continue;
                    }
                    let union: VarSet = p.union(q).cloned().collect();
                    if union != t {
                        continue;
                    }
                    let cond: VarSet = p.intersection(q).cloned().collect();
                    let lambda = min3(
                        &-e.terms[&t].clone(),
                        &e.terms[p].clone(),
                        &e.terms[q].clone(),
                    );
                    e.add_atom(p.clone(), -lambda.clone());
                    e.add_atom(q.clone(), -lambda.clone());
                    e.add_atom(t.clone(), lambda.clone());
                    e.add_atom(cond, lambda);
                    found = true;
                    break 'pairs;
                }
            }
            if !found {
                return false;
            }
        } else {
            // every maximal atom is positive: peel a conditional entropy
            // H(t) - H(c) covering the deepest negative atom
            let negatives: Vec<VarSet> = e
                .terms
                .iter()
                .filter(|(_, c)| c.is_negative())
                .map(|(s, _)| s.clone())
                .collect();
            let c = match pick(negatives) {
                Some(c) => c,
                None => return true,
            };
            let supersets: Vec<VarSet> = e
                .terms
                .iter()
                .filter(|(s, cf)| cf.is_positive() && c.is_subset(s) && **s != c)
                .map(|(s, _)| s.clone())
                .collect();
            match pick(supersets) {
                Some(t) => {
                    let lambda = min2(&e.terms[&t].clone(), &-e.terms[&c].clone());
                    e.add_atom(t, -lambda.clone());
                    e.add_atom(c, lambda);
                }
                None => return false,
            }
        }
    }
    false
}

fn min2(a: &BigRational, b: &BigRational) -> BigRational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn min3(a: &BigRational, b: &BigRational, c: &BigRational) -> BigRational {
    min2(&min2(a, b), c)
}

#[cfg(test)]
pub(crate) fn big(i: i64) -> BigRational {
    BigRational::from_integer(num_bigint::BigInt::from(i))
}

impl fmt::Display for InfoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (set, coeff) in &self.terms {
            let mag = coeff.abs();
            if first {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            write!(f, "H({})", names.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(names: &[&str]) -> VarSet {
        varset(names)
    }

    #[test]
    fn expand_mi_definition() {
        // I(X;Y) = H(X) + H(Y) - H(X,Y)
        let e = expand_mi(&vs(&["X"]), &vs(&["Y"]), &vs(&[])).unwrap();
        let mut expect = InfoExpr::zero();
        expect.add_atom(vs(&["X"]), big(1));
        expect.add_atom(vs(&["Y"]), big(1));
        expect.add_atom(vs(&["X", "Y"]), big(-1));
        assert_eq!(e, expect);
        assert!(expand_mi(&vs(&["X"]), &vs(&["X"]), &vs(&[])).is_err());
        assert!(expand_mi(&vs(&["X"]), &vs(&["Y"]), &vs(&["X"])).is_err());
    }

    #[test]
    fn chain_rule_cancels_atoms() {
        // I(V;S|X2) + I(U;S|V,X2) = I(U,V;S|X2)
        let lhs = expand_mi(&vs(&["V"]), &vs(&["S"]), &vs(&["X2"]))
            .unwrap()
            .add(&expand_mi(&vs(&["U"]), &vs(&["S"]), &vs(&["V", "X2"])).unwrap());
        let rhs = expand_mi(&vs(&["U", "V"]), &vs(&["S"]), &vs(&["X2"])).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn independence_substitution() {
        let fact = IndepFact::new(vs(&["X2"]), vs(&["S"])).unwrap();
        let e = InfoExpr::atom(vs(&["S", "X2"]), big(1));
        let sub = apply_independence(&e, std::slice::from_ref(&fact));
        let mut expect = InfoExpr::zero();
        expect.add_atom(vs(&["S"]), big(1));
        expect.add_atom(vs(&["X2"]), big(1));
        assert_eq!(sub, expect);
        // idempotent, and expressions without the atom are untouched
        assert_eq!(apply_independence(&sub, std::slice::from_ref(&fact)), sub);
        let other = InfoExpr::atom(vs(&["S", "V", "X2"]), big(1));
        assert_eq!(apply_independence(&other, &[fact]), other);
    }

    #[test]
    fn independence_merges_chain_rule_step() {
        // with X2 independent of S:
        // I(V;S|X2) + I(U;S|V,X2) equals I(U,V,X2;S) after substitution
        let fact = IndepFact::new(vs(&["S"]), vs(&["X2"])).unwrap();
        let lhs = expand_mi(&vs(&["V"]), &vs(&["S"]), &vs(&["X2"]))
            .unwrap()
            .add(&expand_mi(&vs(&["U"]), &vs(&["S"]), &vs(&["V", "X2"])).unwrap());
        let rhs = expand_mi(&vs(&["U", "V", "X2"]), &vs(&["S"]), &vs(&[])).unwrap();
        assert_eq!(
            apply_independence(&lhs, std::slice::from_ref(&fact)),
            apply_independence(&rhs, std::slice::from_ref(&fact))
        );
    }

    #[test]
    fn shannon_greedy_accepts_single_blocks() {
        let single = expand_mi(&vs(&["X2"]), &vs(&["Y"]), &vs(&[])).unwrap();
        assert!(shannon_nonneg(&single));
        let joint = expand_mi(&vs(&["V", "X2"]), &vs(&["Y"]), &vs(&[])).unwrap();
        assert!(shannon_nonneg(&joint));
        let cond = expand_mi(&vs(&["V"]), &vs(&["S"]), &vs(&["X2"])).unwrap();
        assert!(shannon_nonneg(&cond));
        let ent = expand_entropy(&vs(&["X"]), &vs(&["Y"])).unwrap();
        assert!(shannon_nonneg(&ent));
        assert!(shannon_nonneg(&InfoExpr::zero()));
    }

    #[test]
    fn shannon_greedy_accepts_sums() {
        let sum = expand_mi(&vs(&["X2"]), &vs(&["Y"]), &vs(&[]))
            .unwrap()
            .add(&expand_mi(&vs(&["V"]), &vs(&["S"]), &vs(&["X2"])).unwrap());
        assert!(shannon_nonneg(&sum));
    }

    #[test]
    fn shannon_greedy_rejects_signed_differences() {
        // I(V,X2;Y) - I(V,X2;S) is not nonnegative in general
        let diff = expand_mi(&vs(&["V", "X2"]), &vs(&["Y"]), &vs(&[]))
            .unwrap()
            .sub(&expand_mi(&vs(&["V", "X2"]), &vs(&["S"]), &vs(&[])).unwrap());
        assert!(!shannon_nonneg(&diff));
        let neg = expand_mi(&vs(&["X"]), &vs(&["Y"]), &vs(&[]))
            .unwrap()
            .scale(&big(-1));
        assert!(!shannon_nonneg(&neg));
    }

    #[test]
    fn chain_rule_property_random_subsets() {
        // I(A;B,C|D) = I(A;C|D) + I(A;B|C,D) as exact atom identities over a
        // few disjoint name pools
        let pools = [
            (vs(&["A"]), vs(&["B"]), vs(&["C"]), vs(&["D"])),
            (vs(&["A", "E"]), vs(&["B"]), vs(&["C", "F"]), vs(&[])),
            (vs(&["X1"]), vs(&["Y"]), vs(&["U", "V"]), vs(&["X2", "S"])),
        ];
        for (a, b, c, d) in pools {
            let bc: VarSet = b.union(&c).cloned().collect();
            let cd: VarSet = c.union(&d).cloned().collect();
            let lhs = expand_mi(&a, &bc, &d).unwrap();
            let rhs = expand_mi(&a, &c, &d)
                .unwrap()
                .add(&expand_mi(&a, &b, &cd).unwrap());
            assert_eq!(lhs, rhs);
        }
    }
}
