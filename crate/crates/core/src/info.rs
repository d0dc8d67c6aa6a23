//! Exact finite-alphabet probability and information quantities over dense
//! joint tables. All logarithms are base 2 and `0·log 0 = 0`.
//!
//! Every conditional mutual information is computed from joint-entropy atoms
//! via the four-entropy expansion `I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)`,
//! so the numeric path mirrors the symbolic canonicalization used elsewhere.

use crate::error::{Error, Result};
use crate::scalar::{cast, mass_tol, zero_mass_cutoff, Real};

/// Hard cap on dense table sizes (product of alphabet sizes).
pub const TABLE_ENTRY_CAP: u64 = 10_000_000;

/// Entropy of a Bernoulli(alpha) source, in bits.
pub fn binary_entropy<F: Real>(alpha: F) -> Result<F> {
    if alpha < F::zero() || alpha > F::one() {
        return Err(Error::Domain(format!(
            "binary_entropy requires alpha in [0,1], got {alpha}"
        )));
    }
    let term = |p: F| {
        if p <= zero_mass_cutoff::<F>() {
            F::zero()
        } else {
            -p * p.log2()
        }
    };
    Ok(term(alpha) + term(F::one() - alpha))
}

/// Binary convolution `p * q = p(1-q) + q(1-p)`, the crossover probability of
/// two cascaded binary symmetric channels.
pub fn binary_convolution<F: Real>(p: F, q: F) -> Result<F> {
    for v in [p, q] {
        if v < F::zero() || v > F::one() {
            return Err(Error::Domain(format!(
                "binary_convolution requires probabilities in [0,1], got {v}"
            )));
        }
    }
    Ok(p * (F::one() - q) + q * (F::one() - p))
}

/// A probability mass function over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<F: Real> {
    probs: Vec<F>,
}

impl<F: Real> Pmf<F> {
    /// Validates nonnegativity and unit mass (within `1e-12` for f64).
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("pmf must have at least one entry".into()));
        }
        let mut total = F::zero();
        for &p in &probs {
            if p < F::zero() || !p.is_finite() {
                return Err(Error::Domain(format!("pmf entry {p} is not a probability")));
            }
            total += p;
        }
        if (total - F::one()).abs() > mass_tol::<F>() {
            return Err(Error::Domain(format!("pmf mass {total} is not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        let p = F::one() / cast::<F>(n as f64);
        Self {
            probs: vec![p; n],
        }
    }

    /// Point mass on symbol `at`.
    pub fn delta(n: usize, at: usize) -> Self {
        let mut probs = vec![F::zero(); n];
        probs[at] = F::one();
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> F {
        self.probs[i]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.probs
    }

    /// Entropy of the pmf in bits.
    pub fn entropy(&self) -> F {
        entropy_of_masses(&self.probs)
    }
}

fn entropy_of_masses<F: Real>(masses: &[F]) -> F {
    let cutoff = zero_mass_cutoff::<F>();
    let mut h = F::zero();
    for &p in masses {
        if p > cutoff {
            h -= p * p.log2();
        }
    }
    h
}

/// A named variable of a joint distribution together with its alphabet size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDim {
    pub name: String,
    pub size: usize,
}

/// Dense joint probability table over named finite variables.
///
/// The table is row-major with the first variable slowest. Immutable after
/// construction; all query operations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<F: Real> {
    vars: Vec<VarDim>,
    table: Vec<F>,
}

impl<F: Real> JointPmf<F> {
    pub fn new(vars: Vec<(impl Into<String>, usize)>, table: Vec<F>) -> Result<Self> {
        let vars: Vec<VarDim> = vars
            .into_iter()
            .map(|(name, size)| VarDim {
                name: name.into(),
                size,
            })
            .collect();
        if vars.is_empty() {
            return Err(Error::Dimension("joint pmf needs at least one variable".into()));
        }
        let mut entries: u128 = 1;
        for v in &vars {
            if v.size == 0 {
                return Err(Error::Dimension(format!("variable {} has empty alphabet", v.name)));
            }
            entries = entries.saturating_mul(v.size as u128);
        }
        if entries > TABLE_ENTRY_CAP as u128 {
            return Err(Error::TableTooLarge {
                entries,
                cap: TABLE_ENTRY_CAP,
            });
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Dimension(format!("duplicate variable name {}", v.name)));
            }
        }
        if table.len() as u128 != entries {
            return Err(Error::Dimension(format!(
                "table has {} entries, expected {entries}",
                table.len()
            )));
        }
        let mut total = F::zero();
        for &p in &table {
            if p < F::zero() || !p.is_finite() {
                return Err(Error::Domain(format!("joint entry {p} is not a probability")));
            }
            total += p;
        }
        if (total - F::one()).abs() > mass_tol::<F>() {
            return Err(Error::Domain(format!("joint mass {total} is not 1")));
        }
        Ok(Self { vars, table })
    }

    pub fn vars(&self) -> &[VarDim] {
        &self.vars
    }

    pub fn table(&self) -> &[F] {
        &self.table
    }

    fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Strides of the row-major layout, one per variable.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].size;
        }
        strides
    }

    /// Marginal distribution over `keep`, in the order the variables appear
    /// in `self`. Mass is preserved exactly up to summation rounding.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf<F>> {
        let mut keep_idx: Vec<usize> = Vec::with_capacity(keep.len());
        for name in keep {
            let idx = self.var_index(name)?;
            if keep_idx.contains(&idx) {
                return Err(Error::OverlappingGroups(format!("{name} listed twice")));
            }
            keep_idx.push(idx);
        }
        if keep_idx.is_empty() {
            return Err(Error::Dimension("cannot marginalize onto no variables".into()));
        }
        keep_idx.sort_unstable();

        let kept: Vec<VarDim> = keep_idx.iter().map(|&i| self.vars[i].clone()).collect();
        let mut out_strides = vec![1usize; kept.len()];
        for i in (0..kept.len().saturating_sub(1)).rev() {
            out_strides[i] = out_strides[i + 1] * kept[i + 1].size;
        }
        // per input-variable contribution to the reduced index (0 for dropped vars)
        let mut contrib = vec![0usize; self.vars.len()];
        for (k, &i) in keep_idx.iter().enumerate() {
            contrib[i] = out_strides[k];
        }

        let in_strides = self.strides();
        let out_len: usize = kept.iter().map(|v| v.size).product();
        let mut out = vec![F::zero(); out_len];
        for (lin, &p) in self.table.iter().enumerate() {
            let mut rest = lin;
            let mut oi = 0usize;
            for (v, &stride) in in_strides.iter().enumerate() {
                let digit = rest / stride;
                rest %= stride;
                oi += digit * contrib[v];
            }
            out[oi] += p;
        }
        Ok(JointPmf {
            vars: kept,
            table: out,
        })
    }

    /// Joint entropy `H(group)` in bits.
    pub fn entropy(&self, group: &[&str]) -> Result<F> {
        if group.is_empty() {
            return Err(Error::Dimension("entropy group must be nonempty".into()));
        }
        let marg = self.marginalize(group)?;
        Ok(entropy_of_masses(&marg.table))
    }

    fn entropy_or_zero(&self, group: &[&str]) -> Result<F> {
        if group.is_empty() {
            Ok(F::zero())
        } else {
            self.entropy(group)
        }
    }

    /// Conditional mutual information `I(a; b | c)` in bits, expanded as
    /// `H(a,c) + H(b,c) - H(a,b,c) - H(c)`. Values within `-1e-12` of zero
    /// are clamped to zero.
    pub fn cond_mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<F> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Dimension("mutual-information groups must be nonempty".into()));
        }
        for name in a.iter().chain(b).chain(c) {
            self.var_index(name)?;
        }
        check_disjoint(a, b)?;
        check_disjoint(a, c)?;
        check_disjoint(b, c)?;

        let ac: Vec<&str> = a.iter().chain(c).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
        let v = self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)?
            - self.entropy_or_zero(c)?;
        if v < F::zero() && v > -mass_tol::<F>() {
            Ok(F::zero())
        } else {
            Ok(v)
        }
    }

    /// Mutual information `I(a; b)`.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<F> {
        self.cond_mutual_information(a, b, &[])
    }
}

fn check_disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    for x in a {
        if b.contains(x) {
            return Err(Error::OverlappingGroups(format!("variable {x} in both groups")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn joint2(p: [[f64; 2]; 2]) -> JointPmf<f64> {
        JointPmf::new(
            vec![("A", 2), ("B", 2)],
            vec![p[0][0], p[0][1], p[1][0], p[1][1]],
        )
        .unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5f64).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0f64).unwrap(), 0.0);
        // frozen from a high-precision evaluation of the defining formula
        assert!((binary_entropy(0.11f64).unwrap() - 0.499915958164528).abs() < 1e-12);
        assert!(binary_entropy(-0.1f64).is_err());
        assert!(binary_entropy(1.1f64).is_err());
    }

    #[test]
    fn binary_convolution_values() {
        for q in [0.0f64, 0.3, 0.9] {
            assert!((binary_convolution(0.5, q).unwrap() - 0.5).abs() < 1e-15);
            assert!((binary_convolution(0.0, q).unwrap() - q).abs() < 1e-15);
        }
        assert!((binary_convolution(0.1f64, 0.2).unwrap() - 0.26).abs() < 1e-15);
        assert!(binary_convolution(1.2f64, 0.2).is_err());
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::<f64>::new(vec![]).is_err());
        assert_eq!(Pmf::<f64>::uniform(4).entropy(), 2.0);
        assert_eq!(Pmf::<f64>::delta(3, 1).entropy(), 0.0);
    }

    #[test]
    fn entropy_basic() {
        let j = joint2([[0.25, 0.25], [0.25, 0.25]]);
        assert_eq!(j.entropy(&["A"]).unwrap(), 1.0);
        assert_eq!(j.entropy(&["A", "B"]).unwrap(), 2.0);
        // deterministic variable
        let d = joint2([[0.5, 0.0], [0.5, 0.0]]);
        assert_eq!(d.entropy(&["B"]).unwrap(), 0.0);
        // (0.26, 0.74) marginal against the closed form
        let j = joint2([[0.26 * 0.5, 0.26 * 0.5], [0.74 * 0.5, 0.74 * 0.5]]);
        let h = j.entropy(&["A"]).unwrap();
        assert!((h - binary_entropy(0.26f64).unwrap()).abs() < 1e-12);
        assert!(j.entropy(&["C"]).is_err());
    }

    #[test]
    fn cmi_basic() {
        // independent uniform bits
        let j = joint2([[0.25, 0.25], [0.25, 0.25]]);
        assert_eq!(j.mutual_information(&["A"], &["B"]).unwrap(), 0.0);
        // A = B uniform bit
        let j = joint2([[0.5, 0.0], [0.0, 0.5]]);
        assert_eq!(j.mutual_information(&["A"], &["B"]).unwrap(), 1.0);
        // BSC(0.1) with uniform input: I(X;Y) = 1 - h(0.1)
        let j = joint2([[0.45, 0.05], [0.05, 0.45]]);
        let expect = 1.0 - binary_entropy(0.1f64).unwrap();
        assert!((j.mutual_information(&["A"], &["B"]).unwrap() - expect).abs() < 1e-12);
        // overlap rejected
        assert!(j.cond_mutual_information(&["A"], &["A"], &[]).is_err());
        assert!(j.cond_mutual_information(&["A"], &["B"], &["A"]).is_err());
    }

    #[test]
    fn table_cap_enforced() {
        let err = JointPmf::<f64>::new(vec![("A", 100_000), ("B", 101)], vec![]).unwrap_err();
        assert!(matches!(err, Error::TableTooLarge { .. }));
    }

    fn arb_joint3() -> impl Strategy<Value = JointPmf<f64>> {
        // three variables with sizes 2..=3 and a random positive table
        (2usize..=3, 2usize..=3, 2usize..=3).prop_flat_map(|(a, b, c)| {
            let n = a * b * c;
            proptest::collection::vec(1e-3f64..1.0, n).prop_map(move |raw| {
                let total: f64 = raw.iter().sum();
                let table: Vec<f64> = raw.iter().map(|x| x / total).collect();
                JointPmf::new(vec![("A", a), ("B", b), ("C", c)], table).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn chain_rule(j in arb_joint3()) {
            // I(A; B,C) = I(A;C) + I(A;B|C)
            let lhs = j.cond_mutual_information(&["A"], &["B", "C"], &[]).unwrap();
            let rhs = j.cond_mutual_information(&["A"], &["C"], &[]).unwrap()
                + j.cond_mutual_information(&["A"], &["B"], &["C"]).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn cmi_nonnegative(j in arb_joint3()) {
            for c in [vec![], vec!["C"]] {
                let v = j.cond_mutual_information(&["A"], &["B"], &c).unwrap();
                prop_assert!(v >= -1e-12);
            }
        }

        #[test]
        fn subadditivity(j in arb_joint3()) {
            let joint = j.entropy(&["A", "B", "C"]).unwrap();
            let sum = j.entropy(&["A"]).unwrap()
                + j.entropy(&["B"]).unwrap()
                + j.entropy(&["C"]).unwrap();
            prop_assert!(joint <= sum + 1e-10);
        }

        #[test]
        fn convolution_envelope(p in 0.0f64..=0.5, q in 0.0f64..=0.5) {
            let r = binary_convolution(p, q).unwrap();
            prop_assert!(r >= p.max(q) - 1e-12);
            prop_assert!(r <= 0.5 + 1e-12);
        }

        #[test]
        fn marginal_mass_preserved(j in arb_joint3()) {
            let m = j.marginalize(&["A", "C"]).unwrap();
            let total: f64 = m.table().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
