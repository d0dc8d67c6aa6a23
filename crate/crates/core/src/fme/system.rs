//! Rate-inequality systems and their projection: Fourier-Motzkin elimination
//! of rate variables plus redundancy pruning.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fme::expr::{apply_independence, shannon_nonneg, IndepFact, InfoExpr};

/// One inequality `sum_i lhs_i * R_i <= rhs`, with the rhs a combination of
/// entropy atoms. Strict inequalities are normalized to non-strict at parse
/// time; rate-region closures make the distinction immaterial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RateIneq {
    lhs: BTreeMap<String, BigRational>,
    rhs: InfoExpr,
}

impl RateIneq {
    pub fn new(lhs: BTreeMap<String, BigRational>, rhs: InfoExpr) -> Self {
        let mut ineq = Self { lhs, rhs };
        ineq.lhs.retain(|_, c| !c.is_zero());
        ineq.normalize();
        ineq
    }

    pub fn lhs(&self) -> &BTreeMap<String, BigRational> {
        &self.lhs
    }

    pub fn rhs(&self) -> &InfoExpr {
        &self.rhs
    }

    pub fn coeff(&self, var: &str) -> BigRational {
        self.lhs.get(var).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs.is_empty() && self.rhs.is_zero()
    }

    fn scaled_add(&self, sa: &BigRational, other: &RateIneq, sb: &BigRational) -> RateIneq {
        let mut lhs: BTreeMap<String, BigRational> = BTreeMap::new();
        for (k, v) in &self.lhs {
            lhs.insert(k.clone(), v * sa);
        }
        for (k, v) in &other.lhs {
            let entry = lhs.entry(k.clone()).or_insert_with(BigRational::zero);
            *entry += v * sb;
        }
        RateIneq::new(lhs, self.rhs.scale(sa).add(&other.rhs.scale(sb)))
    }

    /// Scales the inequality so every coefficient is an integer and their
    /// gcd is one. Multiplication is by a positive rational, preserving the
    /// inequality.
    fn normalize(&mut self) {
        let mut denom_lcm = BigInt::one();
        let mut numer_gcd = BigInt::zero();
        {
            let mut visit = |c: &BigRational| {
                denom_lcm = denom_lcm.lcm(c.denom());
            };
            for c in self.lhs.values() {
                visit(c);
            }
            for (_, c) in self.rhs.terms() {
                visit(c);
            }
        }
        for c in self.lhs.values() {
            numer_gcd = numer_gcd.gcd(&(c * &denom_lcm).to_integer());
        }
        for (_, c) in self.rhs.terms() {
            numer_gcd = numer_gcd.gcd(&(c * &denom_lcm).to_integer());
        }
        if numer_gcd.is_zero() {
            return;
        }
        let factor = BigRational::new(denom_lcm, numer_gcd);
        for c in self.lhs.values_mut() {
            *c *= &factor;
        }
        self.rhs = self.rhs.scale(&factor);
    }

    fn substituted(&self, facts: &[IndepFact]) -> RateIneq {
        RateIneq::new(self.lhs.clone(), apply_independence(&self.rhs, facts))
    }
}

/// A rate-inequality system: declared rate variables, those assumed
/// nonnegative, declared independence facts, and the inequalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IneqSystem {
    rates: Vec<String>,
    nonneg: BTreeSet<String>,
    facts: Vec<IndepFact>,
    ineqs: Vec<RateIneq>,
}

impl IneqSystem {
    pub fn new(
        rates: Vec<String>,
        nonneg: BTreeSet<String>,
        facts: Vec<IndepFact>,
        ineqs: Vec<RateIneq>,
    ) -> Result<Self> {
        for i in 1..rates.len() {
            if rates[..i].contains(&rates[i]) {
                return Err(Error::Domain(format!("rate {} declared twice", rates[i])));
            }
        }
        for n in &nonneg {
            if !rates.contains(n) {
                return Err(Error::UnknownVariable(n.clone()));
            }
        }
        for ineq in &ineqs {
            for var in ineq.lhs.keys() {
                if !rates.contains(var) {
                    return Err(Error::UnknownVariable(var.clone()));
                }
            }
        }
        let mut sys = Self {
            rates,
            nonneg,
            facts,
            ineqs,
        };
        sys.canonicalize();
        Ok(sys)
    }

    pub fn rates(&self) -> &[String] {
        &self.rates
    }
    pub fn nonneg(&self) -> &BTreeSet<String> {
        &self.nonneg
    }
    pub fn facts(&self) -> &[IndepFact] {
        &self.facts
    }
    pub fn inequalities(&self) -> &[RateIneq] {
        &self.ineqs
    }

    /// Applies independence substitutions, drops trivial `0 <= 0` rows,
    /// deduplicates, and sorts canonically (lexicographic by lhs then rhs).
    pub fn canonicalize(&mut self) {
        let facts = self.facts.clone();
        let mut seen: BTreeSet<RateIneq> = BTreeSet::new();
        for ineq in std::mem::take(&mut self.ineqs) {
            let ineq = ineq.substituted(&facts);
            if ineq.is_trivial() {
                continue;
            }
            seen.insert(ineq);
        }
        self.ineqs = seen.into_iter().collect();
    }

    /// Whether a rate variable occurs in any inequality.
    pub fn mentions(&self, var: &str) -> bool {
        self.ineqs.iter().any(|i| !i.coeff(var).is_zero())
    }

    /// Fourier-Motzkin elimination of one rate variable: pairs every upper
    /// bound with every lower bound (membership in the nonnegative set
    /// contributes the lower bound `0 <= var`). Eliminating a variable absent
    /// from all inequalities returns the system unchanged.
    pub fn fme_eliminate(&self, var: &str) -> IneqSystem {
        if !self.mentions(var) {
            return self.clone();
        }
        let mut uppers: Vec<&RateIneq> = vec![];
        let mut lowers: Vec<RateIneq> = vec![];
        let mut rest: Vec<RateIneq> = vec![];
        for ineq in &self.ineqs {
            let c = ineq.coeff(var);
            if c.is_zero() {
                rest.push(ineq.clone());
            } else if c.is_positive() {
                uppers.push(ineq);
            } else {
                lowers.push(ineq.clone());
            }
        }
        if self.nonneg.contains(var) {
            let mut lhs = BTreeMap::new();
            lhs.insert(var.to_string(), -BigRational::one());
            lowers.push(RateIneq::new(lhs, InfoExpr::zero()));
        }
        for u in &uppers {
            let cu = u.coeff(var);
            for l in &lowers {
                let cl = -l.coeff(var);
                let combined = u.scaled_add(&cl, l, &cu);
                debug_assert!(combined.coeff(var).is_zero());
                rest.push(combined);
            }
        }
        let rates = self
            .rates
            .iter()
            .filter(|r| r.as_str() != var)
            .cloned()
            .collect();
        let mut nonneg = self.nonneg.clone();
        nonneg.remove(var);
        IneqSystem::new(rates, nonneg, self.facts.clone(), rest)
            .expect("elimination preserves declarations")
    }

    /// Removes inequalities implied by another one: identical-or-dominating
    /// lhs (surplus supported on nonnegative rates) with the rhs slack
    /// Shannon-nonnegative under the greedy decomposition. Inequalities
    /// `0 <= E` with `E` Shannon-nonnegative are implied by the trivial
    /// inequality and removed too. Conservative and idempotent.
    pub fn prune_redundant(&self) -> IneqSystem {
        let mut alive: Vec<bool> = vec![true; self.ineqs.len()];
        loop {
            let mut changed = false;
            for i in 0..self.ineqs.len() {
                if !alive[i] {
                    continue;
                }
                // implied by the trivial inequality 0 <= 0?
                let a = &self.ineqs[i];
                let by_trivial = a.lhs.is_empty() && shannon_nonneg(a.rhs());
                let by_other = (0..self.ineqs.len()).any(|j| {
                    j != i && alive[j] && self.implies(&self.ineqs[j], a)
                });
                if by_trivial || by_other {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let ineqs = self
            .ineqs
            .iter()
            .zip(&alive)
            .filter(|(_, &keep)| keep)
            .map(|(i, _)| i.clone())
            .collect();
        IneqSystem::new(
            self.rates.clone(),
            self.nonneg.clone(),
            self.facts.clone(),
            ineqs,
        )
        .expect("pruning preserves declarations")
    }

    /// `b` implies `a` when `lhs(b) - lhs(a)` is componentwise nonnegative
    /// with support in the nonnegative rates, and `rhs(a) - rhs(b)` is
    /// Shannon-nonnegative.
    fn implies(&self, b: &RateIneq, a: &RateIneq) -> bool {
        let mut vars: BTreeSet<&String> = b.lhs.keys().collect();
        vars.extend(a.lhs.keys());
        for var in vars {
            let diff = b.coeff(var) - a.coeff(var);
            if diff.is_negative() {
                return false;
            }
            if !diff.is_zero() && !self.nonneg.contains(var.as_str()) {
                return false;
            }
        }
        shannon_nonneg(&a.rhs.sub(&b.rhs))
    }

    /// Eliminates the given variables in order, pruning after each step.
    pub fn reduce(&self, eliminate: &[String]) -> IneqSystem {
        let mut cur = self.prune_redundant();
        for var in eliminate {
            cur = cur.fme_eliminate(var).prune_redundant();
        }
        cur
    }

    /// The declared rates that are not projection targets, in declaration
    /// order: everything except `Rc` and `R1`.
    pub fn default_eliminations(&self) -> Vec<String> {
        self.rates
            .iter()
            .filter(|r| r.as_str() != "Rc" && r.as_str() != "R1")
            .cloned()
            .collect()
    }
}
