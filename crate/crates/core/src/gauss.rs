//! Closed-form capacity region of the additive Gaussian model
//! `Y = X1 + X2 + S + Z` with `S ~ N(0, Q)` known noncausally at the
//! private-message encoder and `Z ~ N(0, N)`, under powers `P1`, `P2`.
//!
//! The region is the union over feasible correlation pairs of pentagons; the
//! boundary is traced with support functions over a grid of correlation
//! coefficients followed by a step-halving pattern search.
//!
//! The `R1` bound is evaluated with the same correlation-to-state coefficient
//! as the sum-rate bound (the pairing consistent with a single informed
//! encoder).

use crate::error::{Error, Result};
use crate::geom::{intersect_halfplanes, pentagon_support, pentagon_support_vertex, RatePolygon};
use crate::region::RateBounds;
use crate::scalar::{cast, Real};

/// Channel parameters: transmit powers, state variance, noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams<F: Real> {
    pub p1: F,
    pub p2: F,
    pub q: F,
    pub n: F,
}

impl<F: Real> GaussianParams<F> {
    pub fn new(p1: F, p2: F, q: F, n: F) -> Result<Self> {
        if p1 < F::zero() || p2 < F::zero() || q < F::zero() {
            return Err(Error::Domain("powers and state variance must be >= 0".into()));
        }
        if n <= F::zero() {
            return Err(Error::Domain("noise variance must be positive".into()));
        }
        Ok(Self { p1, p2, q, n })
    }
}

/// Correlation pair: `rho12` between the two inputs in `[0,1]`, `rho1s`
/// between the informed input and the state in `[-1,0]`, with
/// `rho12^2 + rho1s^2 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrPair<F: Real> {
    pub rho12: F,
    pub rho1s: F,
}

impl<F: Real> CorrPair<F> {
    pub fn new(rho12: F, rho1s: F) -> Result<Self> {
        let tol = cast::<F>(1e-12);
        if rho12 < F::zero() || rho12 > F::one() {
            return Err(Error::Domain(format!("rho12 must lie in [0,1], got {rho12}")));
        }
        if rho1s > F::zero() || rho1s < -F::one() {
            return Err(Error::Domain(format!("rho1s must lie in [-1,0], got {rho1s}")));
        }
        if rho12 * rho12 + rho1s * rho1s > F::one() + tol {
            return Err(Error::Domain(format!(
                "infeasible correlation pair ({rho12}, {rho1s}): squares exceed 1"
            )));
        }
        Ok(Self { rho12, rho1s })
    }

    /// Residual power fraction `1 - rho12^2 - rho1s^2`, clamped at zero.
    fn residual(&self) -> F {
        (F::one() - self.rho12 * self.rho12 - self.rho1s * self.rho1s).max(F::zero())
    }
}

/// Bound pair of one correlation point:
/// `a = 1/2 log2(1 + P1 r / N)` with `r = 1 - rho12^2 - rho1s^2`, and
/// `b = 1/2 log2(1 + (sqrt(P2) + rho12 sqrt(P1))^2 /
///               (P1 r + (sqrt(Q) + rho1s sqrt(P1))^2 + N)) + a`.
pub fn gauss_bounds<F: Real>(gp: GaussianParams<F>, c: CorrPair<F>) -> Result<RateBounds<F>> {
    // re-validate so raw struct literals cannot smuggle in infeasible pairs
    let c = CorrPair::new(c.rho12, c.rho1s)?;
    let half = cast::<F>(0.5);
    let r = c.residual();
    let a = half * (F::one() + gp.p1 * r / gp.n).log2();
    let num = gp.p2.sqrt() + c.rho12 * gp.p1.sqrt();
    let state = gp.q.sqrt() + c.rho1s * gp.p1.sqrt();
    let denom = gp.p1 * r + state * state + gp.n;
    let b = half * (F::one() + num * num / denom).log2() + a;
    Ok(RateBounds { a, b })
}

fn feasible_grid<F: Real>(grid_steps: usize) -> Vec<CorrPair<F>> {
    let mut pts = Vec::new();
    let denom = cast::<F>((grid_steps - 1) as f64);
    for i in 0..grid_steps {
        let rho12 = cast::<F>(i as f64) / denom;
        for j in 0..grid_steps {
            let rho1s = -cast::<F>(j as f64) / denom;
            if let Ok(c) = CorrPair::new(rho12, rho1s) {
                pts.push(c);
            }
        }
    }
    pts
}

/// Pattern-search refinement: from `start`, repeatedly try axis moves of the
/// current step (projected onto the feasible set), halving the step whenever
/// no move improves the objective. Deterministic.
fn refine<F: Real>(
    gp: GaussianParams<F>,
    start: CorrPair<F>,
    objective: impl Fn(RateBounds<F>) -> F,
) -> (CorrPair<F>, F) {
    let mut best = start;
    let mut best_val = objective(gauss_bounds(gp, best).expect("feasible start"));
    let mut step = cast::<F>(0.1);
    for _ in 0..20 {
        let mut improved = true;
        while improved {
            improved = false;
            let moves = [
                (step, F::zero()),
                (-step, F::zero()),
                (F::zero(), step),
                (F::zero(), -step),
            ];
            for (d12, d1s) in moves {
                let cand = project(best.rho12 + d12, best.rho1s + d1s);
                if let Ok(c) = cand {
                    let v = objective(gauss_bounds(gp, c).expect("projected point feasible"));
                    if v > best_val {
                        best_val = v;
                        best = c;
                        improved = true;
                    }
                }
            }
        }
        step *= cast::<F>(0.5);

    }
    (best, best_val)
}

/// Clamps onto the box `[0,1] x [-1,0]` and scales back inside the unit disc.
fn project<F: Real>(rho12: F, rho1s: F) -> Result<CorrPair<F>> {
    let mut r12 = rho12.max(F::zero()).min(F::one());
    let mut r1s = rho1s.min(F::zero()).max(-F::one());
    let norm2 = r12 * r12 + r1s * r1s;
    if norm2 > F::one() {
        let scale = norm2.sqrt();
        r12 /= scale;
        r1s /= scale;
    }
    CorrPair::new(r12, r1s)
}

/// Evenly spaced directions `(wc, w1)` on the simplex, first `(1,0)` and last
/// `(0,1)`.
pub fn default_directions<F: Real>(count: usize) -> Vec<(F, F)> {
    let denom = cast::<F>((count - 1) as f64);
    (0..count)
        .map(|i| {
            let w1 = cast::<F>(i as f64) / denom;
            (F::one() - w1, w1)
        })
        .collect()
}

/// Traced capacity region: per direction, the support is maximized over the
/// correlation grid and refined by pattern search; the polygon is the
/// intersection of the resulting halfplanes with the nonnegative quadrant.
pub fn gauss_region<F: Real>(
    gp: GaussianParams<F>,
    grid_steps: usize,
    directions: &[(F, F)],
) -> Result<RatePolygon<F>> {
    let supports = gauss_supports(gp, grid_steps, directions, true)?;
    let constraints: Vec<((F, F), F)> = directions
        .iter()
        .copied()
        .zip(supports.iter().map(|s| s.value))
        .collect();
    Ok(intersect_halfplanes(&constraints))
}

/// One traced direction: the support value and the achieving point.
#[derive(Debug, Clone, Copy)]
pub struct GaussSupport<F: Real> {
    pub value: F,
    pub vertex: (F, F),
    pub corr: CorrPair<F>,
}

/// Support values over the correlation grid, optionally refined.
pub fn gauss_supports<F: Real>(
    gp: GaussianParams<F>,
    grid_steps: usize,
    directions: &[(F, F)],
    refine_enabled: bool,
) -> Result<Vec<GaussSupport<F>>> {
    if grid_steps < 2 {
        return Err(Error::Domain("grid needs at least 2 steps".into()));
    }
    let grid = feasible_grid::<F>(grid_steps);
    let mut out = Vec::with_capacity(directions.len());
    for &(wc, w1) in directions {
        let mut best: Option<(F, CorrPair<F>)> = None;
        for &c in &grid {
            let v = pentagon_support(gauss_bounds(gp, c)?, wc, w1);
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, c));
            }
        }
        let (mut val, mut corr) = best.expect("grid nonempty");
        if refine_enabled {
            let (c, v) = refine(gp, corr, |rb| pentagon_support(rb, wc, w1));
            if v > val {
                val = v;
                corr = c;
            }
        }
        let vertex = pentagon_support_vertex(gauss_bounds(gp, corr)?, wc, w1);
        out.push(GaussSupport {
            value: val,
            vertex,
            corr,
        });
    }
    Ok(out)
}

/// Common-message capacity: maximum of the sum-rate expression over feasible
/// correlation pairs, grid plus refinement.
pub fn gauss_cm_capacity<F: Real>(gp: GaussianParams<F>, grid_steps: usize) -> Result<F> {
    gauss_cm_capacity_impl(gp, grid_steps, true)
}

/// Grid-only variant used as an oracle in tests.
pub fn gauss_cm_capacity_grid_only<F: Real>(gp: GaussianParams<F>, grid_steps: usize) -> Result<F> {
    gauss_cm_capacity_impl(gp, grid_steps, false)
}

fn gauss_cm_capacity_impl<F: Real>(
    gp: GaussianParams<F>,
    grid_steps: usize,
    refine_enabled: bool,
) -> Result<F> {
    if grid_steps < 2 {
        return Err(Error::Domain("grid needs at least 2 steps".into()));
    }
    let mut best: Option<(F, CorrPair<F>)> = None;
    for c in feasible_grid::<F>(grid_steps) {
        let v = gauss_bounds(gp, c)?.b;
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, c));
        }
    }
    let (val, corr) = best.expect("grid nonempty");
    if !refine_enabled {
        return Ok(val);
    }
    let (_, refined) = refine(gp, corr, |rb| rb.b);
    Ok(val.max(refined))
}
