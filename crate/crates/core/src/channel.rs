//! Data model, validation, and file ingestion for finite-alphabet
//! state-dependent MACs and the factored auxiliary distributions evaluated by
//! [`crate::region`].
//!
//! A channel is a state prior `Q_S` plus a transition kernel
//! `W[y | x1, x2, s]`. Product outputs are flattened row-major into a single
//! Y alphabet; the file format records component sizes for readability.

use crate::error::{Error, Result};
use crate::info::{JointPmf, Pmf};
use crate::scalar::{cast, mass_tol, Real};

/// Which channel input an average-value constraint applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstrainedInput {
    X1,
    X2,
}

impl ConstrainedInput {
    pub fn name(self) -> &'static str {
        match self {
            ConstrainedInput::X1 => "X1",
            ConstrainedInput::X2 => "X2",
        }
    }
}

/// First-moment input constraint `E[X] <= bound`, reading symbol indices as
/// numeric values.
#[derive(Debug, Clone, PartialEq)]
pub struct InputConstraint<F: Real> {
    pub input: ConstrainedInput,
    pub bound: F,
}

/// A stationary memoryless state-dependent MAC `W_{Y|X1,X2,S}` with state
/// prior `Q_S`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DmMacChannel<F: Real> {
    ns: usize,
    nx1: usize,
    nx2: usize,
    ny: usize,
    y_components: Option<Vec<usize>>,
    state_prior: Pmf<F>,
    /// Kernel table indexed `[x1][x2][s][y]`.
    kernel: Vec<F>,
    constraints: Vec<InputConstraint<F>>,
}

impl<F: Real> DmMacChannel<F> {
    pub fn new(
        ns: usize,
        nx1: usize,
        nx2: usize,
        ny: usize,
        state_prior: Pmf<F>,
        kernel: Vec<F>,
    ) -> Result<Self> {
        if ns == 0 || nx1 == 0 || nx2 == 0 || ny == 0 {
            return Err(Error::Dimension("alphabet sizes must be positive".into()));
        }
        if state_prior.len() != ns {
            return Err(Error::Dimension(format!(
                "state prior has {} entries, expected {ns}",
                state_prior.len()
            )));
        }
        if kernel.len() != nx1 * nx2 * ns * ny {
            return Err(Error::Dimension(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                nx1 * nx2 * ns * ny
            )));
        }
        let ch = Self {
            ns,
            nx1,
            nx2,
            ny,
            y_components: None,
            state_prior,
            kernel,
            constraints: vec![],
        };
        ch.check_stochastic()?;
        Ok(ch)
    }

    fn check_stochastic(&self) -> Result<()> {
        let tol = mass_tol::<F>();
        for x1 in 0..self.nx1 {
            for x2 in 0..self.nx2 {
                for s in 0..self.ns {
                    let mut total = F::zero();
                    for y in 0..self.ny {
                        let w = self.w(y, x1, x2, s);
                        if w < F::zero() || !w.is_finite() {
                            return Err(Error::Domain(format!(
                                "kernel entry W[{y}|{x1},{x2},{s}] = {w} is not a probability"
                            )));
                        }
                        total += w;
                    }
                    if (total - F::one()).abs() > tol {
                        return Err(Error::RowSum(format!(
                            "kernel row (x1={x1}, x2={x2}, s={s}) sums to {total}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn with_y_components(mut self, components: Vec<usize>) -> Result<Self> {
        let prod: usize = components.iter().product();
        if prod != self.ny {
            return Err(Error::Dimension(format!(
                "y components {components:?} multiply to {prod}, expected {}",
                self.ny
            )));
        }
        self.y_components = Some(components);
        Ok(self)
    }

    pub fn with_constraint(mut self, input: ConstrainedInput, bound: F) -> Self {
        self.constraints.push(InputConstraint { input, bound });
        self
    }

    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn nx1(&self) -> usize {
        self.nx1
    }
    pub fn nx2(&self) -> usize {
        self.nx2
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn y_components(&self) -> Option<&[usize]> {
        self.y_components.as_deref()
    }
    pub fn state_prior(&self) -> &Pmf<F> {
        &self.state_prior
    }
    pub fn constraints(&self) -> &[InputConstraint<F>] {
        &self.constraints
    }

    /// Kernel probability `W[y | x1, x2, s]`.
    #[inline]
    pub fn w(&self, y: usize, x1: usize, x2: usize, s: usize) -> F {
        self.kernel[((x1 * self.nx2 + x2) * self.ns + s) * self.ny + y]
    }

    /// Whether the kernel is actually independent of the state symbol.
    pub fn is_state_independent(&self) -> bool {
        if self.ns == 1 {
            return true;
        }
        for x1 in 0..self.nx1 {
            for x2 in 0..self.nx2 {
                for s in 1..self.ns {
                    for y in 0..self.ny {
                        if self.w(y, x1, x2, s) != self.w(y, x1, x2, 0) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Default cardinality caps `(|U|, |V|)` from the support-lemma bounds:
    /// `|V| <= m + 1` and `|U| <= (m + 1) m` with `m = |S||X1||X2|`.
    pub fn default_caps(&self) -> (usize, usize) {
        let m = self.ns * self.nx1 * self.nx2;
        ((m + 1) * m, m + 1)
    }

    /// Renders the channel in the `dmmac v1` text schema. Parsing the result
    /// reproduces the channel bit-exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("dmmac v1\n");
        out.push_str(&format!(
            "sizes {} {} {} {}\n",
            self.ns, self.nx1, self.nx2, self.ny
        ));
        if let Some(comps) = &self.y_components {
            out.push_str("ycomponents");
            for c in comps {
                out.push_str(&format!(" {c}"));
            }
            out.push('\n');
        }
        out.push_str("prior");
        for i in 0..self.ns {
            out.push_str(&format!(" {}", self.state_prior.get(i)));
        }
        out.push('\n');
        out.push_str("kernel\n");
        for x1 in 0..self.nx1 {
            for x2 in 0..self.nx2 {
                for s in 0..self.ns {
                    out.push_str(&format!("{x1} {x2} {s} :"));
                    for y in 0..self.ny {
                        out.push_str(&format!(" {}", self.w(y, x1, x2, s)));
                    }
                    out.push('\n');
                }
            }
        }
        for c in &self.constraints {
            out.push_str(&format!("constraint {} <= {}\n", c.input.name(), c.bound));
        }
        out
    }
}

/// The binary modulo-additive example channel: two output components
/// `Y = (Y1, Y2)` with `Y1 = X1 + S + Z1 (mod 2)`, `Z1 ~ Bernoulli(p)`,
/// `Y2 = X2`, and a uniform binary state.
pub fn binary_example_channel<F: Real>(p: F) -> Result<DmMacChannel<F>> {
    if p < F::zero() || p > cast::<F>(0.5) {
        return Err(Error::Domain(format!(
            "noise probability must lie in [0, 1/2], got {p}"
        )));
    }
    let (ns, nx1, nx2, ny) = (2usize, 2usize, 2usize, 4usize);
    let mut kernel = vec![F::zero(); nx1 * nx2 * ns * ny];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for s in 0..2 {
                for y1 in 0..2 {
                    let flip = y1 != (x1 ^ s);
                    let prob = if flip { p } else { F::one() - p };
                    let y = y1 * 2 + x2;
                    kernel[((x1 * nx2 + x2) * ns + s) * ny + y] = prob;
                }
            }
        }
    }
    DmMacChannel::new(ns, nx1, nx2, ny, Pmf::uniform(2), kernel)?
        .with_y_components(vec![2, 2])
}

/// Factored auxiliary distribution realizing the inner-bound measure class:
/// `P_X2 · P_{V|S,X2} · P_{U,X1|S,V,X2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxJoint<F: Real> {
    nu: usize,
    nv: usize,
    px2: Pmf<F>,
    /// Rows indexed `[s][x2]`, entries over `v`.
    pv_given_sx2: Vec<F>,
    /// Rows indexed `[s][v][x2]`, entries over `(u, x1)` with `u` slowest.
    pux1_given_svx2: Vec<F>,
    ns: usize,
    nx1: usize,
    nx2: usize,
}

impl<F: Real> AuxJoint<F> {
    pub fn new(
        ch: &DmMacChannel<F>,
        nu: usize,
        nv: usize,
        px2: Pmf<F>,
        pv_given_sx2: Vec<F>,
        pux1_given_svx2: Vec<F>,
    ) -> Result<Self> {
        let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
        if nu == 0 || nv == 0 {
            return Err(Error::Dimension("auxiliary alphabets must be nonempty".into()));
        }
        if px2.len() != nx2 {
            return Err(Error::Dimension(format!(
                "px2 has {} entries, expected {nx2}",
                px2.len()
            )));
        }
        if pv_given_sx2.len() != ns * nx2 * nv {
            return Err(Error::Dimension(format!(
                "pv table has {} entries, expected {}",
                pv_given_sx2.len(),
                ns * nx2 * nv
            )));
        }
        if pux1_given_svx2.len() != ns * nv * nx2 * nu * nx1 {
            return Err(Error::Dimension(format!(
                "pux1 table has {} entries, expected {}",
                pux1_given_svx2.len(),
                ns * nv * nx2 * nu * nx1
            )));
        }
        check_rows(&pv_given_sx2, nv, "P(V|S,X2)")?;
        check_rows(&pux1_given_svx2, nu * nx1, "P(U,X1|S,V,X2)")?;
        Ok(Self {
            nu,
            nv,
            px2,
            pv_given_sx2,
            pux1_given_svx2,
            ns,
            nx1,
            nx2,
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }
    pub fn nv(&self) -> usize {
        self.nv
    }
    pub fn px2(&self) -> &Pmf<F> {
        &self.px2
    }

    #[inline]
    pub fn pv(&self, v: usize, s: usize, x2: usize) -> F {
        self.pv_given_sx2[(s * self.nx2 + x2) * self.nv + v]
    }

    #[inline]
    pub fn pux1(&self, u: usize, x1: usize, s: usize, v: usize, x2: usize) -> F {
        self.pux1_given_svx2[(((s * self.nv + v) * self.nx2 + x2) * self.nu + u) * self.nx1 + x1]
    }
}

fn check_rows<F: Real>(table: &[F], row_len: usize, what: &str) -> Result<()> {
    let tol = mass_tol::<F>();
    for (r, row) in table.chunks(row_len).enumerate() {
        let mut total = F::zero();
        for &p in row {
            if p < F::zero() || !p.is_finite() {
                return Err(Error::Domain(format!("{what} row {r} entry {p} is not a probability")));
            }
            total += p;
        }
        if (total - F::one()).abs() > tol {
            return Err(Error::RowSum(format!("{what} row {r} sums to {total}")));
        }
    }
    Ok(())
}

/// Input distribution for the alternative outer bound:
/// `P_X2 · P_{X1|X2,S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDist<F: Real> {
    px2: Pmf<F>,
    /// Rows indexed `[x2][s]`, entries over `x1`.
    px1_given_x2s: Vec<F>,
    ns: usize,
    nx1: usize,
    nx2: usize,
}

impl<F: Real> InputDist<F> {
    pub fn new(ch: &DmMacChannel<F>, px2: Pmf<F>, px1_given_x2s: Vec<F>) -> Result<Self> {
        let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
        if px2.len() != nx2 {
            return Err(Error::Dimension(format!(
                "px2 has {} entries, expected {nx2}",
                px2.len()
            )));
        }
        if px1_given_x2s.len() != nx2 * ns * nx1 {
            return Err(Error::Dimension(format!(
                "px1 table has {} entries, expected {}",
                px1_given_x2s.len(),
                nx2 * ns * nx1
            )));
        }
        check_rows(&px1_given_x2s, nx1, "P(X1|X2,S)")?;
        Ok(Self {
            px2,
            px1_given_x2s,
            ns,
            nx1,
            nx2,
        })
    }

    pub fn px2(&self) -> &Pmf<F> {
        &self.px2
    }

    #[inline]
    pub fn px1(&self, x1: usize, x2: usize, s: usize) -> F {
        self.px1_given_x2s[(x2 * self.ns + s) * self.nx1 + x1]
    }
}

/// Auxiliary measure for the common-message capacity:
/// `P_X2 · P_{K,X1|S,X2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonMsgAux<F: Real> {
    nk: usize,
    px2: Pmf<F>,
    /// Rows indexed `[s][x2]`, entries over `(k, x1)` with `k` slowest.
    pkx1_given_sx2: Vec<F>,
    ns: usize,
    nx1: usize,
    nx2: usize,
}

impl<F: Real> CommonMsgAux<F> {
    pub fn new(
        ch: &DmMacChannel<F>,
        nk: usize,
        px2: Pmf<F>,
        pkx1_given_sx2: Vec<F>,
    ) -> Result<Self> {
        let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
        if nk == 0 {
            return Err(Error::Dimension("K alphabet must be nonempty".into()));
        }
        if px2.len() != nx2 {
            return Err(Error::Dimension(format!(
                "px2 has {} entries, expected {nx2}",
                px2.len()
            )));
        }
        if pkx1_given_sx2.len() != ns * nx2 * nk * nx1 {
            return Err(Error::Dimension(format!(
                "pkx1 table has {} entries, expected {}",
                pkx1_given_sx2.len(),
                ns * nx2 * nk * nx1
            )));
        }
        check_rows(&pkx1_given_sx2, nk * nx1, "P(K,X1|S,X2)")?;
        Ok(Self {
            nk,
            px2,
            pkx1_given_sx2,
            ns,
            nx1,
            nx2,
        })
    }

    pub fn nk(&self) -> usize {
        self.nk
    }
    pub fn px2(&self) -> &Pmf<F> {
        &self.px2
    }

    #[inline]
    pub fn pkx1(&self, k: usize, x1: usize, s: usize, x2: usize) -> F {
        self.pkx1_given_sx2[((s * self.nx2 + x2) * self.nk + k) * self.nx1 + x1]
    }
}

/// Correlated-input distribution `P_Z · P_{X1|Z} · P_{X2|Z}` for the
/// no-state reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonZDist<F: Real> {
    pz: Pmf<F>,
    /// Rows indexed `[z]`, entries over `x1`.
    px1_given_z: Vec<F>,
    /// Rows indexed `[z]`, entries over `x2`.
    px2_given_z: Vec<F>,
    nx1: usize,
    nx2: usize,
}

impl<F: Real> CommonZDist<F> {
    pub fn new(
        ch: &DmMacChannel<F>,
        pz: Pmf<F>,
        px1_given_z: Vec<F>,
        px2_given_z: Vec<F>,
    ) -> Result<Self> {
        let (nx1, nx2) = (ch.nx1(), ch.nx2());
        let nz = pz.len();
        if px1_given_z.len() != nz * nx1 || px2_given_z.len() != nz * nx2 {
            return Err(Error::Dimension("conditional tables must match |Z| rows".into()));
        }
        check_rows(&px1_given_z, nx1, "P(X1|Z)")?;
        check_rows(&px2_given_z, nx2, "P(X2|Z)")?;
        Ok(Self {
            pz,
            px1_given_z,
            px2_given_z,
            nx1,
            nx2,
        })
    }

    pub fn nz(&self) -> usize {
        self.pz.len()
    }
    pub fn pz(&self) -> &Pmf<F> {
        &self.pz
    }

    #[inline]
    pub fn px1(&self, x1: usize, z: usize) -> F {
        self.px1_given_z[z * self.nx1 + x1]
    }
    #[inline]
    pub fn px2(&self, x2: usize, z: usize) -> F {
        self.px2_given_z[z * self.nx2 + x2]
    }
}

/// Assembles the full joint `P(S,U,V,X1,X2,Y)` from the channel and a
/// factored auxiliary distribution. The result factorizes as
/// `Q_S · P_X2 · P_{V|S,X2} · P_{U,X1|S,V,X2} · W`, so `X2` is independent of
/// `S` and `(U,V) - (S,X1,X2) - Y` is a Markov chain.
pub fn assemble_joint<F: Real>(
    ch: &DmMacChannel<F>,
    aux: &AuxJoint<F>,
) -> Result<JointPmf<F>> {
    if aux.ns != ch.ns() || aux.nx1 != ch.nx1() || aux.nx2 != ch.nx2() {
        return Err(Error::Dimension(
            "auxiliary distribution does not match channel alphabets".into(),
        ));
    }
    let (ns, nu, nv, nx1, nx2, ny) = (ch.ns(), aux.nu, aux.nv, ch.nx1(), ch.nx2(), ch.ny());
    let mut table = vec![F::zero(); ns * nu * nv * nx1 * nx2 * ny];
    let mut idx = 0usize;
    for s in 0..ns {
        let qs = ch.state_prior().get(s);
        for u in 0..nu {
            for v in 0..nv {
                for x1 in 0..nx1 {
                    for x2 in 0..nx2 {
                        let base =
                            qs * aux.px2.get(x2) * aux.pv(v, s, x2) * aux.pux1(u, x1, s, v, x2);
                        for y in 0..ny {
                            table[idx] = base * ch.w(y, x1, x2, s);
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    JointPmf::new(
        vec![
            ("S", ns),
            ("U", nu),
            ("V", nv),
            ("X1", nx1),
            ("X2", nx2),
            ("Y", ny),
        ],
        table,
    )
}

/// Joint `P(S,X1,X2,Y) = Q_S · P_X2 · P_{X1|X2,S} · W` for the outer bound.
pub fn assemble_outer_joint<F: Real>(
    ch: &DmMacChannel<F>,
    d: &InputDist<F>,
) -> Result<JointPmf<F>> {
    if d.ns != ch.ns() || d.nx1 != ch.nx1() || d.nx2 != ch.nx2() {
        return Err(Error::Dimension("input distribution does not match channel".into()));
    }
    let (ns, nx1, nx2, ny) = (ch.ns(), ch.nx1(), ch.nx2(), ch.ny());
    let mut table = vec![F::zero(); ns * nx1 * nx2 * ny];
    let mut idx = 0usize;
    for s in 0..ns {
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                let base = ch.state_prior().get(s) * d.px2.get(x2) * d.px1(x1, x2, s);
                for y in 0..ny {
                    table[idx] = base * ch.w(y, x1, x2, s);
                    idx += 1;
                }
            }
        }
    }
    JointPmf::new(vec![("S", ns), ("X1", nx1), ("X2", nx2), ("Y", ny)], table)
}

/// Joint `P(S,K,X1,X2,Y) = Q_S · P_X2 · P_{K,X1|S,X2} · W` for the
/// common-message capacity.
pub fn assemble_cm_joint<F: Real>(
    ch: &DmMacChannel<F>,
    k: &CommonMsgAux<F>,
) -> Result<JointPmf<F>> {
    if k.ns != ch.ns() || k.nx1 != ch.nx1() || k.nx2 != ch.nx2() {
        return Err(Error::Dimension("common-message measure does not match channel".into()));
    }
    let (ns, nk, nx1, nx2, ny) = (ch.ns(), k.nk, ch.nx1(), ch.nx2(), ch.ny());
    let mut table = vec![F::zero(); ns * nk * nx1 * nx2 * ny];
    let mut idx = 0usize;
    for s in 0..ns {
        for kk in 0..nk {
            for x1 in 0..nx1 {
                for x2 in 0..nx2 {
                    let base =
                        ch.state_prior().get(s) * k.px2.get(x2) * k.pkx1(kk, x1, s, x2);
                    for y in 0..ny {
                        table[idx] = base * ch.w(y, x1, x2, s);
                        idx += 1;
                    }
                }
            }
        }
    }
    JointPmf::new(
        vec![("S", ns), ("K", nk), ("X1", nx1), ("X2", nx2), ("Y", ny)],
        table,
    )
}

/// Joint `P(Z,X1,X2,Y)` for a channel whose kernel does not depend on the
/// state, under the correlated-input distribution `P_Z P_{X1|Z} P_{X2|Z}`.
pub fn assemble_nostate_joint<F: Real>(
    ch: &DmMacChannel<F>,
    d: &CommonZDist<F>,
) -> Result<JointPmf<F>> {
    if !ch.is_state_independent() {
        return Err(Error::Domain(
            "no-state reduction requires a state-independent kernel".into(),
        ));
    }
    if d.nx1 != ch.nx1() || d.nx2 != ch.nx2() {
        return Err(Error::Dimension("input distribution does not match channel".into()));
    }
    let (nz, nx1, nx2, ny) = (d.nz(), ch.nx1(), ch.nx2(), ch.ny());
    let mut table = vec![F::zero(); nz * nx1 * nx2 * ny];
    let mut idx = 0usize;
    for z in 0..nz {
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                let base = d.pz.get(z) * d.px1(x1, z) * d.px2(x2, z);
                for y in 0..ny {
                    table[idx] = base * ch.w(y, x1, x2, 0);
                    idx += 1;
                }
            }
        }
    }
    JointPmf::new(vec![("Z", nz), ("X1", nx1), ("X2", nx2), ("Y", ny)], table)
}

/// Mean symbol value `E[X]` of one input under the joint measure induced by
/// an auxiliary distribution; used to enforce first-moment constraints.
pub fn input_mean<F: Real>(joint: &JointPmf<F>, input: ConstrainedInput) -> Result<F> {
    let marg = joint.marginalize(&[input.name()])?;
    let mut mean = F::zero();
    for (i, &p) in marg.table().iter().enumerate() {
        mean += cast::<F>(i as f64) * p;
    }
    Ok(mean)
}

/// Whether a joint satisfies every constraint of the channel within `1e-12`.
pub fn satisfies_constraints<F: Real>(ch: &DmMacChannel<F>, joint: &JointPmf<F>) -> Result<bool> {
    for c in ch.constraints() {
        if input_mean(joint, c.input)? > c.bound + mass_tol::<F>() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Text schema
// ---------------------------------------------------------------------------

/// Parses the `dmmac v1` channel schema. Lines starting with `#` and blank
/// lines are ignored; tokens are whitespace-separated and indices 0-based.
pub fn parse_channel<F: Real>(text: &str) -> Result<DmMacChannel<F>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty channel file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head != ["dmmac", "v1"] {
        return Err(Error::parse(ln, 1, "expected header `dmmac v1`"));
    }

    // (line, (x1, x2, s), weights)
    type KernelRow<F> = (usize, (usize, usize, usize), Vec<F>);
    let mut sizes: Option<(usize, usize, usize, usize)> = None;
    let mut ycomponents: Option<Vec<usize>> = None;
    let mut prior: Option<Vec<F>> = None;
    let mut kernel_rows: Vec<KernelRow<F>> = vec![];
    let mut constraints: Vec<(ConstrainedInput, F)> = vec![];
    let mut in_kernel = false;

    for (ln, line) in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "sizes" => {
                let v = parse_usizes(&tokens[1..], ln)?;
                if v.len() != 4 {
                    return Err(Error::parse(ln, 1, "sizes needs 4 entries: S X1 X2 Y"));
                }
                sizes = Some((v[0], v[1], v[2], v[3]));
                in_kernel = false;
            }
            "ycomponents" => {
                ycomponents = Some(parse_usizes(&tokens[1..], ln)?);
                in_kernel = false;
            }
            "prior" => {
                prior = Some(parse_reals(&tokens[1..], ln)?);
                in_kernel = false;
            }
            "kernel" => {
                if tokens.len() != 1 {
                    return Err(Error::parse(ln, 1, "kernel keyword takes no arguments"));
                }
                in_kernel = true;
            }
            "constraint" => {
                if tokens.len() != 4 || tokens[2] != "<=" {
                    return Err(Error::parse(ln, 1, "expected `constraint X1 <= q`"));
                }
                let input = match tokens[1] {
                    "X1" => ConstrainedInput::X1,
                    "X2" => ConstrainedInput::X2,
                    other => {
                        return Err(Error::parse(ln, 1, format!("unknown input `{other}`")))
                    }
                };
                let bound = parse_real(tokens[3], ln)?;
                constraints.push((input, bound));
                in_kernel = false;
            }
            _ if in_kernel => {
                let colon = tokens
                    .iter()
                    .position(|&t| t == ":")
                    .ok_or_else(|| Error::parse(ln, 1, "kernel line needs `x1 x2 s : w...`"))?;
                if colon != 3 {
                    return Err(Error::parse(ln, 1, "kernel line needs exactly 3 indices"));
                }
                let idx = parse_usizes(&tokens[..3], ln)?;
                let ws = parse_reals(&tokens[colon + 1..], ln)?;
                kernel_rows.push((ln, (idx[0], idx[1], idx[2]), ws));
            }
            other => {
                return Err(Error::parse(ln, 1, format!("unexpected keyword `{other}`")));
            }
        }
    }

    let (ns, nx1, nx2, ny) =
        sizes.ok_or_else(|| Error::parse(1, 1, "missing `sizes` declaration"))?;
    let prior = prior.ok_or_else(|| Error::parse(1, 1, "missing `prior` declaration"))?;
    if prior.len() != ns {
        return Err(Error::parse(1, 1, format!("prior has {} entries, expected {ns}", prior.len())));
    }

    let mut kernel = vec![None::<F>; nx1 * nx2 * ns * ny];
    for (ln, (x1, x2, s), ws) in kernel_rows {
        if x1 >= nx1 || x2 >= nx2 || s >= ns {
            return Err(Error::parse(ln, 1, "kernel indices out of range"));
        }
        if ws.len() != ny {
            return Err(Error::parse(ln, 1, format!("kernel row has {} weights, expected {ny}", ws.len())));
        }
        for (y, &w) in ws.iter().enumerate() {
            let slot = &mut kernel[((x1 * nx2 + x2) * ns + s) * ny + y];
            if slot.is_some() {
                return Err(Error::parse(ln, 1, format!("duplicate kernel row ({x1}, {x2}, {s})")));
            }
            *slot = Some(w);
        }
    }
    let kernel: Vec<F> = kernel
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.ok_or_else(|| {
                let row = i / ny;
                let s = row % ns;
                let x2 = (row / ns) % nx2;
                let x1 = row / (ns * nx2);
                Error::parse(1, 1, format!("missing kernel row ({x1}, {x2}, {s})"))
            })
        })
        .collect::<Result<_>>()?;

    let mut ch = DmMacChannel::new(ns, nx1, nx2, ny, Pmf::new(prior)?, kernel)?;
    if let Some(comps) = ycomponents {
        ch = ch.with_y_components(comps)?;
    }
    for (input, bound) in constraints {
        ch = ch.with_constraint(input, bound);
    }
    Ok(ch)
}

fn parse_usizes(tokens: &[&str], ln: usize) -> Result<Vec<usize>> {
    tokens
        .iter()
        .enumerate()
        .map(|(col, t)| {
            t.parse::<usize>()
                .map_err(|_| Error::parse(ln, col + 1, format!("expected integer, got `{t}`")))
        })
        .collect()
}

fn parse_reals<F: Real>(tokens: &[&str], ln: usize) -> Result<Vec<F>> {
    tokens
        .iter()
        .enumerate()
        .map(|(col, t)| parse_real(t, ln).map_err(|_| {
            Error::parse(ln, col + 1, format!("expected number, got `{t}`"))
        }))
        .collect()
}

fn parse_real<F: Real>(token: &str, ln: usize) -> Result<F> {
    token
        .parse::<f64>()
        .ok()
        .and_then(F::from_f64)
        .ok_or_else(|| Error::parse(ln, 1, format!("expected number, got `{token}`")))
}

// ---------------------------------------------------------------------------
// Convenience constructors used by searches and tests
// ---------------------------------------------------------------------------

impl<F: Real> AuxJoint<F> {
    /// Fully degenerate auxiliary: `|U| = |V| = 1`, `X1` pinned to symbol 0.
    pub fn degenerate(ch: &DmMacChannel<F>, px2: Pmf<F>) -> Result<Self> {
        let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
        let pv = vec![F::one(); ns * nx2];
        let mut pux1 = vec![F::zero(); ns * nx2 * nx1];
        for row in 0..ns * nx2 {
            pux1[row * nx1] = F::one();
        }
        Self::new(ch, 1, 1, px2, pv, pux1)
    }

    /// Structured point used throughout the binary example: `V` copies `S`,
    /// `U` copies `X1`, and `X1` is drawn from `weights[s]` independently of
    /// everything else given `S`.
    pub fn state_copy_with_x1_rows(
        ch: &DmMacChannel<F>,
        px2: Pmf<F>,
        x1_rows: &[Vec<F>],
    ) -> Result<Self> {
        let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
        let nv = ns;
        let nu = nx1;
        let mut pv = vec![F::zero(); ns * nx2 * nv];
        for s in 0..ns {
            for x2 in 0..nx2 {
                pv[(s * nx2 + x2) * nv + s] = F::one();
            }
        }
        let mut pux1 = vec![F::zero(); ns * nv * nx2 * nu * nx1];
        for s in 0..ns {
            for v in 0..nv {
                for x2 in 0..nx2 {
                    for x1 in 0..nx1 {
                        let u = x1;
                        pux1[(((s * nv + v) * nx2 + x2) * nu + u) * nx1 + x1] =
                            x1_rows[s][x1];
                    }
                }
            }
        }
        Self::new(ch, nu, nv, px2, pv, pux1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_example_kernel() {
        let ch = binary_example_channel(0.1f64).unwrap();
        assert_eq!((ch.ns(), ch.nx1(), ch.nx2(), ch.ny()), (2, 2, 2, 4));
        assert_eq!(ch.y_components(), Some(&[2, 2][..]));
        // deterministic Y2 = X2 component
        for x1 in 0..2 {
            for x2 in 0..2 {
                for s in 0..2 {
                    for y1 in 0..2 {
                        for y2 in 0..2 {
                            let w = ch.w(y1 * 2 + y2, x1, x2, s);
                            if y2 != x2 {
                                assert_eq!(w, 0.0);
                            }
                        }
                    }
                    // flip probability of the noisy component
                    let good = ch.w((x1 ^ s) * 2 + x2, x1, x2, s);
                    assert!((good - 0.9).abs() < 1e-15);
                    let bad = ch.w(((x1 ^ s) ^ 1) * 2 + x2, x1, x2, s);
                    assert!((bad - 0.1).abs() < 1e-15);
                }
            }
        }

        let noiseless = binary_example_channel(0.0f64).unwrap();
        for x1 in 0..2 {
            for s in 0..2 {
                assert_eq!(noiseless.w((x1 ^ s) * 2, x1, 0, s), 1.0);
            }
        }
        let full = binary_example_channel(0.5f64).unwrap();
        for y1 in 0..2 {
            assert_eq!(full.w(y1 * 2, 0, 0, 0), 0.5);
        }
        assert!(binary_example_channel(0.6f64).is_err());
    }

    #[test]
    fn serialize_parse_roundtrip_bit_exact() {
        let ch = binary_example_channel(0.1f64)
            .unwrap()
            .with_constraint(ConstrainedInput::X1, 0.5);
        let text = ch.serialize();
        let back: DmMacChannel<f64> = parse_channel(&text).unwrap();
        assert_eq!(ch, back);
        assert_eq!(text, back.serialize());
    }

    #[test]
    fn parse_rejects_bad_rows() {
        let ch = binary_example_channel(0.1f64).unwrap();
        let text = ch.serialize().replace("0.9 0 0.1 0", "0.8 0 0.1 0");
        assert!(matches!(
            parse_channel::<f64>(&text),
            Err(Error::RowSum(_))
        ));

        let mut no_prior = String::new();
        for line in ch.serialize().lines() {
            if !line.starts_with("prior") {
                no_prior.push_str(line);
                no_prior.push('\n');
            }
        }
        assert!(matches!(
            parse_channel::<f64>(&no_prior),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn assembled_joint_factorization() {
        let ch = binary_example_channel(0.1f64).unwrap();
        let aux = AuxJoint::state_copy_with_x1_rows(
            &ch,
            Pmf::uniform(2),
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let j = assemble_joint(&ch, &aux).unwrap();
        let total: f64 = j.table().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // marginal over S equals the prior
        let ms = j.marginalize(&["S"]).unwrap();
        assert!((ms.table()[0] - 0.5).abs() < 1e-12);
        // X2 independent of S
        assert!(j.mutual_information(&["X2"], &["S"]).unwrap() < 1e-12);
        // (U,V) - (S,X1,X2) - Y Markov chain
        let mk = j
            .cond_mutual_information(&["U", "V"], &["Y"], &["S", "X1", "X2"])
            .unwrap();
        assert!(mk.abs() < 1e-10);
    }

    #[test]
    fn degenerate_aux_collapses() {
        let ch = binary_example_channel(0.1f64).unwrap();
        let aux = AuxJoint::degenerate(&ch, Pmf::uniform(2)).unwrap();
        let j = assemble_joint(&ch, &aux).unwrap();
        // X1 pinned to zero: I(X1; anything) = 0 and H(X1) = 0
        assert_eq!(j.entropy(&["X1"]).unwrap(), 0.0);
        let total: f64 = j.table().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constraint_accounting() {
        let ch = binary_example_channel(0.1f64)
            .unwrap()
            .with_constraint(ConstrainedInput::X1, 0.3);
        let uniform = AuxJoint::state_copy_with_x1_rows(
            &ch,
            Pmf::uniform(2),
            &[vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let j = assemble_joint(&ch, &uniform).unwrap();
        assert!((input_mean(&j, ConstrainedInput::X1).unwrap() - 0.5).abs() < 1e-12);
        assert!(!satisfies_constraints(&ch, &j).unwrap());
        let light = AuxJoint::state_copy_with_x1_rows(
            &ch,
            Pmf::uniform(2),
            &[vec![0.8, 0.2], vec![0.8, 0.2]],
        )
        .unwrap();
        let j = assemble_joint(&ch, &light).unwrap();
        assert!(satisfies_constraints(&ch, &j).unwrap());
    }
}
