//! Closed forms and a brute-force oracle for the binary modulo-additive
//! example: a BSC(p) with an additive uniform binary interference known at
//! the transmitter, under an average input-weight constraint `q1`.
//!
//! `cb_capacity` is the informed-receiver capacity `h(p * q1) - h(p)`;
//! `gp_rate` is the binning rate achievable when the helper encoder is
//! useless; their difference is strictly positive on the open parameter
//! rectangle.

use crate::error::{Error, Result};
use crate::info::{binary_convolution, binary_entropy, JointPmf};
use crate::scalar::{cast, Real};

/// Parameters of the binary example: crossover `p`, input-weight limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryParams<F: Real> {
    pub p: F,
    pub q1: F,
    /// Weight limit on the helper input; only `q2 >= 1/2` is supported, since
    /// the capacity formulas assume a uniform helper input.
    pub q2: F,
}

impl<F: Real> BinaryParams<F> {
    pub fn new(p: F, q1: F, q2: F) -> Result<Self> {
        let half = cast::<F>(0.5);
        if p < F::zero() || p > half {
            return Err(Error::Domain(format!("p must lie in [0, 1/2], got {p}")));
        }
        if q1 < F::zero() || q1 > half {
            return Err(Error::Domain(format!("q1 must lie in [0, 1/2], got {q1}")));
        }
        if q2 < half {
            return Err(Error::Domain(format!(
                "q2 = {q2} < 1/2 is outside the supported regime (uniform helper input)"
            )));
        }
        Ok(Self { p, q1, q2 })
    }
}

fn check_p_q1<F: Real>(p: F, q1: F) -> Result<()> {
    BinaryParams::new(p, q1, cast::<F>(0.5)).map(|_| ())
}

/// Informed-receiver capacity `h(p * q1) - h(p)`.
pub fn cb_capacity<F: Real>(p: F, q1: F) -> Result<F> {
    check_p_q1(p, q1)?;
    Ok(binary_entropy(binary_convolution(p, q1)?)? - binary_entropy(p)?)
}

/// The threshold weight `p* = 1 - 2^(-h(p))`.
pub fn pstar<F: Real>(p: F) -> Result<F> {
    if p < F::zero() || p > cast::<F>(0.5) {
        return Err(Error::Domain(format!("p must lie in [0, 1/2], got {p}")));
    }
    let two = cast::<F>(2.0);
    Ok(F::one() - two.powf(-binary_entropy(p)?))
}

/// Binning rate without helper assistance, piecewise in `q1`:
/// `G(q1) = h(q1) - h(p)` above the threshold `p*`, and
/// `q1 * log2((1 - p*)/p*)` below it.
pub fn gp_rate<F: Real>(p: F, q1: F) -> Result<F> {
    check_p_q1(p, q1)?;
    let ps = pstar(p)?;
    if q1 >= ps {
        // G(q) = h(q) - h(p) for p <= q <= 1/2, zero below p
        if q1 <= p {
            Ok(F::zero())
        } else {
            Ok(binary_entropy(q1)? - binary_entropy(p)?)
        }
    } else {
        // q1 < p* forces p > 0 and hence p* > 0
        Ok(q1 * ((F::one() - ps) / ps).log2())
    }
}

/// `cb_capacity - gp_rate`; strictly positive for `0 < p < 1/2`,
/// `0 < q1 < 1/2`.
pub fn gap<F: Real>(p: F, q1: F) -> Result<F> {
    Ok(cb_capacity(p, q1)? - gp_rate(p, q1)?)
}

/// Brute-force oracle for [`cb_capacity`]: maximizes `I(X1;Y1|S)` over the
/// conditional weights `P(X1=1|S=s)` on a `levels`-point grid, subject to the
/// average-weight constraint. Independent of the closed form: the objective
/// is evaluated on a dense joint table.
pub fn brute_force_cb<F: Real>(p: F, q1: F, levels: usize) -> Result<F> {
    check_p_q1(p, q1)?;
    if levels < 2 {
        return Err(Error::Domain("grid needs at least 2 levels".into()));
    }
    let step = F::one() / cast::<F>((levels - 1) as f64);
    let half = cast::<F>(0.5);
    let tol = cast::<F>(1e-12);
    let mut best = F::zero();
    for i in 0..levels {
        let a0 = cast::<F>(i as f64) * step;
        for j in 0..levels {
            let a1 = cast::<F>(j as f64) * step;
            if half * (a0 + a1) > q1 + tol {
                continue;
            }
            let v = informed_rate(p, a0, a1)?;
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// `I(X1;Y1|S)` with `S` uniform, `P(X1=1|S=s) = alpha_s`, and
/// `Y1 = X1 + S + Z1 (mod 2)` with `Z1 ~ Bernoulli(p)`.
fn informed_rate<F: Real>(p: F, alpha0: F, alpha1: F) -> Result<F> {
    let half = cast::<F>(0.5);
    let mut table = vec![F::zero(); 2 * 2 * 2];
    for s in 0..2usize {
        let alpha = if s == 0 { alpha0 } else { alpha1 };
        for x1 in 0..2usize {
            let px = if x1 == 1 { alpha } else { F::one() - alpha };
            for y1 in 0..2usize {
                let flip = y1 != (x1 ^ s);
                let w = if flip { p } else { F::one() - p };
                table[(s * 2 + x1) * 2 + y1] = half * px * w;
            }
        }
    }
    let j = JointPmf::new(vec![("S", 2), ("X1", 2), ("Y1", 2)], table)?;
    j.cond_mutual_information(&["X1"], &["Y1"], &["S"])
}
