//! Single-letter rate bounds for the discrete memoryless model, evaluated on
//! one assembled joint per call.
//!
//! Every bound pair is returned as-is, negative values included; emptiness
//! handling is the geometry module's job.

use crate::channel::{
    assemble_cm_joint, assemble_joint, assemble_nostate_joint, assemble_outer_joint, AuxJoint,
    CommonMsgAux, CommonZDist, DmMacChannel, InputDist,
};
use crate::error::{Error, Result};
use crate::info::JointPmf;
use crate::scalar::Real;

/// One distribution's bound pair: `a` bounds `R1`, `b` bounds `Rc + R1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds<F: Real> {
    pub a: F,
    pub b: F,
}

/// Inner-bound pair on the full measure class:
/// `a = I(U;Y|V,X2) - I(U;S|V,X2)`, `b = I(U,V,X2;Y) - I(U,V,X2;S)`.
pub fn inner_bounds<F: Real>(ch: &DmMacChannel<F>, aux: &AuxJoint<F>) -> Result<RateBounds<F>> {
    let j = assemble_joint(ch, aux)?;
    inner_bounds_on(&j)
}

/// Same as [`inner_bounds`] but on a pre-assembled joint over
/// `(S,U,V,X1,X2,Y)`; avoids re-assembly when several quantities are needed.
pub fn inner_bounds_on<F: Real>(j: &JointPmf<F>) -> Result<RateBounds<F>> {
    let a = j.cond_mutual_information(&["U"], &["Y"], &["V", "X2"])?
        - j.cond_mutual_information(&["U"], &["S"], &["V", "X2"])?;
    let b = j.mutual_information(&["U", "V", "X2"], &["Y"])?
        - j.mutual_information(&["U", "V", "X2"], &["S"])?;
    Ok(RateBounds { a, b })
}

/// Bound pair for the degenerate-V subregion (states ignored by the
/// common-message encoder): requires `|V| = 1`.
pub fn cprime_bounds<F: Real>(ch: &DmMacChannel<F>, aux: &AuxJoint<F>) -> Result<RateBounds<F>> {
    if aux.nv() != 1 {
        return Err(Error::Dimension(format!(
            "degenerate-V bounds require |V| = 1, got {}",
            aux.nv()
        )));
    }
    let j = assemble_joint(ch, aux)?;
    let a = j.cond_mutual_information(&["U"], &["Y"], &["X2"])?
        - j.cond_mutual_information(&["U"], &["S"], &["X2"])?;
    let b = j.mutual_information(&["U", "X2"], &["Y"])?
        - j.mutual_information(&["U", "X2"], &["S"])?;
    Ok(RateBounds { a, b })
}

/// Outer-bound pair on the input distribution:
/// `a = I(X1;Y|S,X2)`, `b = I(X1,X2;Y|S) - I(X2;S|Y)`.
pub fn outer_bounds_t3<F: Real>(ch: &DmMacChannel<F>, d: &InputDist<F>) -> Result<RateBounds<F>> {
    let j = assemble_outer_joint(ch, d)?;
    outer_bounds_t3_on(&j)
}

/// Same as [`outer_bounds_t3`] on a pre-assembled joint over `(S,X1,X2,Y)`.
pub fn outer_bounds_t3_on<F: Real>(j: &JointPmf<F>) -> Result<RateBounds<F>> {
    let a = j.cond_mutual_information(&["X1"], &["Y"], &["S", "X2"])?;
    let b = j.cond_mutual_information(&["X1", "X2"], &["Y"], &["S"])?
        - j.cond_mutual_information(&["X2"], &["S"], &["Y"])?;
    Ok(RateBounds { a, b })
}

/// Common-message rate `I(K,X2;Y) - I(K,X2;S)` of one measure.
pub fn cm_capacity_value<F: Real>(ch: &DmMacChannel<F>, k: &CommonMsgAux<F>) -> Result<F> {
    let j = assemble_cm_joint(ch, k)?;
    cm_capacity_value_on(&j)
}

/// Same as [`cm_capacity_value`] on a pre-assembled joint over `(S,K,X1,X2,Y)`.
pub fn cm_capacity_value_on<F: Real>(j: &JointPmf<F>) -> Result<F> {
    Ok(j.mutual_information(&["K", "X2"], &["Y"])?
        - j.mutual_information(&["K", "X2"], &["S"])?)
}

/// The compression-index decodability slack `I(V,X2;Y) - I(V,X2;S)`.
///
/// Chain rule gives the exact decomposition
/// `b = a + decodable_compression_slack` for every auxiliary distribution.
pub fn decodable_compression_slack<F: Real>(ch: &DmMacChannel<F>, aux: &AuxJoint<F>) -> Result<F> {
    let j = assemble_joint(ch, aux)?;
    decodable_compression_slack_on(&j)
}

/// Same as [`decodable_compression_slack`] on a pre-assembled joint.
pub fn decodable_compression_slack_on<F: Real>(j: &JointPmf<F>) -> Result<F> {
    Ok(j.mutual_information(&["V", "X2"], &["Y"])?
        - j.mutual_information(&["V", "X2"], &["S"])?)
}

/// Bound pair for a channel that does not depend on the state, under a
/// correlated-input distribution `P_Z P_{X1|Z} P_{X2|Z}`:
/// `a = I(X1;Y|Z,X2)`, `b = I(X1,X2;Y)`.
pub fn nostate_bounds<F: Real>(ch: &DmMacChannel<F>, d: &CommonZDist<F>) -> Result<RateBounds<F>> {
    let j = assemble_nostate_joint(ch, d)?;
    let a = j.cond_mutual_information(&["X1"], &["Y"], &["Z", "X2"])?;
    let b = j.mutual_information(&["X1", "X2"], &["Y"])?;
    Ok(RateBounds { a, b })
}

/// Marginalizes the joint induced by an auxiliary distribution down to the
/// outer-bound input distribution `P_X2 · P_{X1|X2,S}`.
pub fn induced_input_dist<F: Real>(
    ch: &DmMacChannel<F>,
    aux: &AuxJoint<F>,
) -> Result<InputDist<F>> {
    let j = assemble_joint(ch, aux)?;
    induced_input_dist_on(ch, &j)
}

/// Same as [`induced_input_dist`] on a pre-assembled joint.
pub fn induced_input_dist_on<F: Real>(
    ch: &DmMacChannel<F>,
    j: &JointPmf<F>,
) -> Result<InputDist<F>> {
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let m = j.marginalize(&["S", "X1", "X2"])?;
    // layout of m: S slowest, then X1, then X2
    let prob = |s: usize, x1: usize, x2: usize| m.table()[(s * nx1 + x1) * nx2 + x2];

    let mut px2 = vec![F::zero(); nx2];
    for s in 0..ns {
        for x1 in 0..nx1 {
            for (x2, slot) in px2.iter_mut().enumerate() {
                *slot += prob(s, x1, x2);
            }
        }
    }
    let mut rows = vec![F::zero(); nx2 * ns * nx1];
    for x2 in 0..nx2 {
        for s in 0..ns {
            let mut mass = F::zero();
            for x1 in 0..nx1 {
                mass += prob(s, x1, x2);
            }
            for x1 in 0..nx1 {
                let idx = (x2 * ns + s) * nx1 + x1;
                if mass > F::zero() {
                    rows[idx] = prob(s, x1, x2) / mass;
                } else {
                    // unreachable (s, x2) cell: any stochastic row works
                    rows[idx] = F::one() / F::from_usize(nx1).unwrap();
                }
            }
        }
    }
    InputDist::new(ch, crate::info::Pmf::new(px2)?, rows)
}
