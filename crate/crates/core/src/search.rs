//! Deterministic optimization of rate bounds over auxiliary distributions:
//! structured seeds plus seeded random restarts, scalarized through the
//! closed-form pentagon support, with optional coordinate ascent.
//!
//! Determinism contract: identical `(channel, config, directions)` inputs
//! yield bit-identical outputs, including under parallel execution. Every
//! candidate has a fixed enumeration index; restarts draw from a
//! counter-based generator keyed by `(seed, restart index)`; the reduction is
//! a max with lexicographic tie-break on the enumeration index. Reported
//! support values carry a witness whose re-evaluation reproduces the value.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    assemble_cm_joint, assemble_joint, assemble_outer_joint, satisfies_constraints, AuxJoint,
    CommonMsgAux, DmMacChannel, InputDist,
};
use crate::error::{Error, Result};
use crate::geom::{intersect_halfplanes, pentagon_support, pentagon_support_vertex, RatePolygon};
use crate::info::Pmf;
use crate::region::{
    cm_capacity_value_on, decodable_compression_slack_on, inner_bounds_on, outer_bounds_t3_on,
    RateBounds,
};
use crate::scalar::{cast, Real};

/// Cap on the number of points a simplex grid may enumerate.
pub const GRID_POINT_CAP: u64 = 100_000_000;

/// Cap on structured-seed row combinations before rows are tied together.
const SEED_COMBO_CAP: usize = 4096;

/// Tolerance for the decodable-compression filter.
const FILTER_TOL: f64 = 1e-9;

/// Search parameters. `caps = None` uses the channel's support-lemma caps;
/// explicit caps override them.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub levels: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub caps: Option<(usize, usize)>,
    /// Cap on the common-message auxiliary alphabet; `None` uses
    /// `|S||X1||X2| + 1`.
    pub kmax: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            levels: 4,
            restarts: 200,
            seed: 0,
            max_iters: 8,
            caps: None,
            kmax: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::Domain("levels must be at least 2".into()));
        }
        Ok(())
    }

    pub fn caps_for<F: Real>(&self, ch: &DmMacChannel<F>) -> (usize, usize) {
        self.caps.unwrap_or_else(|| ch.default_caps())
    }

    pub fn kmax_for<F: Real>(&self, ch: &DmMacChannel<F>) -> usize {
        self.kmax
            .unwrap_or_else(|| ch.ns() * ch.nx1() * ch.nx2() + 1)
    }
}

/// Scalarization direction, normalized so `wc + w1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<F: Real> {
    wc: F,
    w1: F,
}

impl<F: Real> Direction<F> {
    pub fn new(wc: F, w1: F) -> Result<Self> {
        if wc < F::zero() || w1 < F::zero() || (wc == F::zero() && w1 == F::zero()) {
            return Err(Error::Domain(format!(
                "direction weights must be nonnegative and not both zero, got ({wc}, {w1})"
            )));
        }
        let total = wc + w1;
        Ok(Self {
            wc: wc / total,
            w1: w1 / total,
        })
    }

    pub fn wc(&self) -> F {
        self.wc
    }
    pub fn w1(&self) -> F {
        self.w1
    }

    /// Evenly spaced directions from `(1,0)` to `(0,1)`.
    pub fn fan(count: usize) -> Vec<Direction<F>> {
        let denom = cast::<F>((count.max(2) - 1) as f64);
        (0..count.max(2))
            .map(|i| {
                let w1 = cast::<F>(i as f64) / denom;
                Direction {
                    wc: F::one() - w1,
                    w1,
                }
            })
            .collect()
    }
}

/// All compositions of `levels` unit masses into `dim` bins, divided by
/// `levels`, in lexicographic order of the composition vectors.
pub fn simplex_grid<F: Real>(dim: usize, levels: usize) -> Result<Vec<Pmf<F>>> {
    if dim < 1 || levels < 1 {
        return Err(Error::Domain("simplex grid needs dim >= 1 and levels >= 1".into()));
    }
    let count = binomial(levels as u128 + dim as u128 - 1, dim as u128 - 1);
    if count > GRID_POINT_CAP as u128 {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: GRID_POINT_CAP,
        });
    }
    let scale = F::one() / cast::<F>(levels as f64);
    let mut out = Vec::with_capacity(count as usize);
    let mut comp = vec![0usize; dim];
    fill_compositions(&mut comp, 0, levels, scale, &mut out);
    Ok(out)
}

fn fill_compositions<F: Real>(
    comp: &mut [usize],
    pos: usize,
    remaining: usize,
    scale: F,
    out: &mut Vec<Pmf<F>>,
) {
    if pos + 1 == comp.len() {
        comp[pos] = remaining;
        let probs = comp.iter().map(|&k| cast::<F>(k as f64) * scale).collect();
        out.push(Pmf::new(probs).expect("grid point is a valid pmf"));
        return;
    }
    for k in 0..=remaining {
        comp[pos] = k;
        fill_compositions(comp, pos + 1, remaining - k, scale, out);
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Candidate filter applied on top of the channel's input constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxFilter {
    /// No extra filtering.
    None,
    /// Keep only candidates whose compression-index slack
    /// `I(V,X2;Y) - I(V,X2;S)` is at least `-1e-9`.
    DecodableCompression,
}

/// Support search outcome for one direction.
#[derive(Debug, Clone)]
pub struct SupportResult<F: Real> {
    pub value: F,
    pub vertex: (F, F),
    /// Enumeration index of the winning candidate, if any pentagon was
    /// nonempty.
    pub witness_index: Option<usize>,
}

/// Per-candidate evaluation kept by the enumeration passes.
#[derive(Debug, Clone, Copy)]
struct Eval<F: Real> {
    index: usize,
    bounds: RateBounds<F>,
}

// ---------------------------------------------------------------------------
// Dirichlet-style row sampling
// ---------------------------------------------------------------------------

fn random_row<F: Real>(rng: &mut ChaCha8Rng, dim: usize) -> Vec<F> {
    let mut raw = vec![0.0f64; dim];
    let mut total = 0.0;
    for slot in raw.iter_mut() {
        let u: f64 = rng.random::<f64>();
        let g = -(u.max(f64::MIN_POSITIVE)).ln();
        *slot = g;
        total += g;
    }
    raw.iter().map(|&g| cast::<F>(g / total)).collect()
}

fn rng_for(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

// ---------------------------------------------------------------------------
// Structured seeds
// ---------------------------------------------------------------------------

/// Points of a row grid plus the uniform row (appended so it is present at
/// every resolution).
fn rows_with_uniform<F: Real>(dim: usize, levels: usize) -> Result<Vec<Vec<F>>> {
    let mut rows: Vec<Vec<F>> = simplex_grid::<F>(dim, levels)?
        .into_iter()
        .map(|p| p.as_slice().to_vec())
        .collect();
    rows.push(Pmf::<F>::uniform(dim).as_slice().to_vec());
    Ok(rows)
}

/// Per-state row assignments: either every combination (lexicographic) or,
/// past the cap, one shared row for all states.
fn state_row_assignments<F: Real>(rows: &[Vec<F>], ns: usize) -> Vec<Vec<usize>> {
    let combos = (rows.len() as u128).checked_pow(ns as u32);
    match combos {
        Some(c) if c <= SEED_COMBO_CAP as u128 => {
            let mut out = Vec::with_capacity(c as usize);
            let mut idx = vec![0usize; ns];
            loop {
                out.push(idx.clone());
                let mut pos = ns;
                while pos > 0 {
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < rows.len() {
                        break;
                    }
                    idx[pos] = 0;
                    if pos == 0 {
                        return out;
                    }
                }
            }
        }
        _ => (0..rows.len()).map(|r| vec![r; ns]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VPattern {
    Degenerate,
    CopyState,
}

/// Structured seed descriptor: patterns, helper-input pmf, per-state row
/// assignment into the shared row grid.
type AuxSeedSpec<F> = (VPattern, UPattern, Vec<F>, Vec<usize>);
type CmSeedSpec<F> = (KPattern, Vec<F>, Vec<usize>);
type InputSeedSpecs<F> = (Vec<Vec<F>>, Vec<Vec<F>>, Vec<Vec<usize>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UPattern {
    CopyX1,
    /// `U = X1 + S (mod |X1|)`: the binning witness for additive-state
    /// channels, independent of the state when `X1` is uniform.
    AddState,
    CopyX1State,
}

fn build_seed_aux<F: Real>(
    ch: &DmMacChannel<F>,
    vp: VPattern,
    up: UPattern,
    px2: &[F],
    rows: &[Vec<F>],
    assignment: &[usize],
) -> Result<AuxJoint<F>> {
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let nv = match vp {
        VPattern::Degenerate => 1,
        VPattern::CopyState => ns,
    };
    let nu = match up {
        UPattern::CopyX1 | UPattern::AddState => nx1,
        UPattern::CopyX1State => nx1 * ns,
    };
    let mut pv = vec![F::zero(); ns * nx2 * nv];
    for s in 0..ns {
        for x2 in 0..nx2 {
            let v = match vp {
                VPattern::Degenerate => 0,
                VPattern::CopyState => s,
            };
            pv[(s * nx2 + x2) * nv + v] = F::one();
        }
    }
    let mut pux1 = vec![F::zero(); ns * nv * nx2 * nu * nx1];
    for s in 0..ns {
        let row = &rows[assignment[s]];
        for v in 0..nv {
            for x2 in 0..nx2 {
                for x1 in 0..nx1 {
                    let u = match up {
                        UPattern::CopyX1 => x1,
                        UPattern::AddState => (x1 + s) % nx1,
                        UPattern::CopyX1State => x1 * ns + s,
                    };
                    pux1[(((s * nv + v) * nx2 + x2) * nu + u) * nx1 + x1] = row[x1];
                }
            }
        }
    }
    AuxJoint::new(ch, nu, nv, Pmf::new(px2.to_vec())?, pv, pux1)
}

fn aux_seed_specs<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
) -> Result<Vec<AuxSeedSpec<F>>> {
    let (umax, vmax) = cfg.caps_for(ch);
    let px2s = rows_with_uniform::<F>(ch.nx2(), cfg.levels)?;
    let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
    let assignments = state_row_assignments(&x1rows, ch.ns());
    let mut specs = Vec::new();
    for vp in [VPattern::Degenerate, VPattern::CopyState] {
        let nv = match vp {
            VPattern::Degenerate => 1,
            VPattern::CopyState => ch.ns(),
        };
        if nv > vmax {
            continue;
        }
        for up in [UPattern::CopyX1, UPattern::AddState, UPattern::CopyX1State] {
            let nu = match up {
                UPattern::CopyX1 | UPattern::AddState => ch.nx1(),
                UPattern::CopyX1State => ch.nx1() * ch.ns(),
            };
            if nu > umax {
                continue;
            }
            for px2 in &px2s {
                for assignment in &assignments {
                    specs.push((vp, up, px2.clone(), assignment.clone()));
                }
            }
        }
    }
    Ok(specs)
}

fn random_aux<F: Real>(ch: &DmMacChannel<F>, cfg: &SearchConfig, restart: usize) -> AuxJoint<F> {
    let (umax, vmax) = cfg.caps_for(ch);
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let mut rng = rng_for(cfg.seed, restart);
    let px2 = Pmf::new(random_row::<F>(&mut rng, nx2)).expect("sampled row is stochastic");
    let mut pv = Vec::with_capacity(ns * nx2 * vmax);
    for _ in 0..ns * nx2 {
        pv.extend(random_row::<F>(&mut rng, vmax));
    }
    let mut pux1 = Vec::with_capacity(ns * vmax * nx2 * umax * nx1);
    for _ in 0..ns * vmax * nx2 {
        pux1.extend(random_row::<F>(&mut rng, umax * nx1));
    }
    AuxJoint::new(ch, umax, vmax, px2, pv, pux1).expect("sampled aux is valid")
}

/// Regenerates the candidate with the given enumeration index.
pub fn aux_candidate<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    index: usize,
) -> Result<AuxJoint<F>> {
    let specs = aux_seed_specs(ch, cfg)?;
    if index < specs.len() {
        let (vp, up, px2, assignment) = &specs[index];
        let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
        build_seed_aux(ch, *vp, *up, px2, &x1rows, assignment)
    } else {
        Ok(random_aux(ch, cfg, index - specs.len()))
    }
}

fn check_joint_size<F: Real>(ch: &DmMacChannel<F>, nu: usize, nv: usize) -> Result<()> {
    let entries = (ch.ns() as u128)
        * (nu as u128)
        * (nv as u128)
        * (ch.nx1() as u128)
        * (ch.nx2() as u128)
        * (ch.ny() as u128);
    if entries > crate::info::TABLE_ENTRY_CAP as u128 {
        return Err(Error::TableTooLarge {
            entries,
            cap: crate::info::TABLE_ENTRY_CAP,
        });
    }
    Ok(())
}

fn evaluate_aux_candidates<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    filter: AuxFilter,
) -> Result<Vec<Eval<F>>> {
    cfg.validate()?;
    let (umax, vmax) = cfg.caps_for(ch);
    check_joint_size(ch, umax, vmax)?;
    let specs = aux_seed_specs(ch, cfg)?;
    let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
    let total = specs.len() + cfg.restarts;
    let filter_tol = cast::<F>(FILTER_TOL);

    let evals: Vec<Option<Eval<F>>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let aux = if index < specs.len() {
                let (vp, up, px2, assignment) = &specs[index];
                build_seed_aux(ch, *vp, *up, px2, &x1rows, assignment).ok()?
            } else {
                random_aux(ch, cfg, index - specs.len())
            };
            let joint = assemble_joint(ch, &aux).ok()?;
            if !satisfies_constraints(ch, &joint).ok()? {
                return None;
            }
            if filter == AuxFilter::DecodableCompression
                && decodable_compression_slack_on(&joint).ok()? < -filter_tol
            {
                return None;
            }
            let bounds = inner_bounds_on(&joint).ok()?;
            Some(Eval { index, bounds })
        })
        .collect();
    Ok(evals.into_iter().flatten().collect())
}

fn best_support<F: Real>(evals: &[Eval<F>], dir: Direction<F>) -> SupportResult<F> {
    let mut value = F::neg_infinity();
    let mut vertex = (F::zero(), F::zero());
    let mut witness_index = None;
    for e in evals {
        let v = pentagon_support(e.bounds, dir.wc, dir.w1);
        if v > value {
            value = v;
            vertex = pentagon_support_vertex(e.bounds, dir.wc, dir.w1);
            witness_index = Some(e.index);
        }
    }
    SupportResult {
        value,
        vertex,
        witness_index,
    }
}

/// Maximum scalarized pentagon support over the sampled auxiliary
/// distributions, with the winning distribution as witness.
pub fn support_value<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    dir: Direction<F>,
) -> Result<(F, Option<AuxJoint<F>>)> {
    support_value_filtered(ch, cfg, dir, AuxFilter::None)
}

/// [`support_value`] with a candidate filter.
pub fn support_value_filtered<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    dir: Direction<F>,
    filter: AuxFilter,
) -> Result<(F, Option<AuxJoint<F>>)> {
    let evals = evaluate_aux_candidates(ch, cfg, filter)?;
    let sup = best_support(&evals, dir);
    let witness = match sup.witness_index {
        Some(i) => Some(aux_candidate(ch, cfg, i)?),
        None => None,
    };
    Ok((sup.value, witness))
}

/// Support values for a whole direction fan from a single enumeration pass.
pub fn supports<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    directions: &[Direction<F>],
    filter: AuxFilter,
) -> Result<Vec<SupportResult<F>>> {
    let evals = evaluate_aux_candidates(ch, cfg, filter)?;
    Ok(directions.iter().map(|&d| best_support(&evals, d)).collect())
}

/// Traced inner approximation of the rate region: the intersection of the
/// support halfplanes with the nonnegative quadrant.
pub fn trace_region<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    directions: &[Direction<F>],
) -> Result<RatePolygon<F>> {
    trace_region_filtered(ch, cfg, directions, AuxFilter::None)
}

/// [`trace_region`] with a candidate filter.
pub fn trace_region_filtered<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    directions: &[Direction<F>],
    filter: AuxFilter,
) -> Result<RatePolygon<F>> {
    if directions.len() < 3 {
        return Err(Error::Domain("need at least 3 directions to trace a region".into()));
    }
    let sups = supports(ch, cfg, directions, filter)?;
    let constraints: Vec<((F, F), F)> = directions
        .iter()
        .zip(&sups)
        .map(|(d, s)| ((d.wc, d.w1), s.value))
        .collect();
    Ok(intersect_halfplanes(&constraints))
}

// ---------------------------------------------------------------------------
// Coordinate ascent
// ---------------------------------------------------------------------------

const ASCENT_STEPS: [f64; 5] = [0.25, 0.125, 0.0625, 0.03125, 0.015625];

/// One conditional row at a time, local mass moves with step halving from
/// 0.25 (5 halvings), accepting only strict improvements of the scalarized
/// objective. Deterministic; the objective never decreases.
pub fn coordinate_ascent<F: Real>(
    ch: &DmMacChannel<F>,
    aux0: &AuxJoint<F>,
    dir: Direction<F>,
    max_iters: usize,
) -> Result<AuxJoint<F>> {
    let objective = |aux: &AuxJoint<F>| -> Result<F> {
        let joint = assemble_joint(ch, aux)?;
        if !satisfies_constraints(ch, &joint)? {
            return Ok(F::neg_infinity());
        }
        Ok(pentagon_support(inner_bounds_on(&joint)?, dir.wc, dir.w1))
    };

    let mut cur = aux0.clone();
    let mut cur_val = objective(&cur)?;
    for _ in 0..max_iters {
        let mut improved = false;
        for &step in &ASCENT_STEPS {
            let step = cast::<F>(step);
            let rows = row_count(&cur, ch);
            for row in 0..rows {
                let mut best: Option<(F, AuxJoint<F>)> = None;
                for cand in row_moves(&cur, ch, row, step) {
                    let v = objective(&cand)?;
                    if v > cur_val && best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                        best = Some((v, cand));
                    }
                }
                if let Some((v, cand)) = best {
                    cur = cand;
                    cur_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(cur)
}

fn row_count<F: Real>(aux: &AuxJoint<F>, ch: &DmMacChannel<F>) -> usize {
    1 + ch.ns() * ch.nx2() + ch.ns() * aux.nv() * ch.nx2()
}

/// All single-pair mass moves of size `step` on one conditional row.
fn row_moves<F: Real>(
    aux: &AuxJoint<F>,
    ch: &DmMacChannel<F>,
    row: usize,
    step: F,
) -> Vec<AuxJoint<F>> {
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let (nu, nv) = (aux.nu(), aux.nv());
    let mut out = Vec::new();

    let moved = |slice: &[F]| -> Vec<(usize, usize, F)> {
        let mut moves = Vec::new();
        for from in 0..slice.len() {
            if slice[from] <= F::zero() {
                continue;
            }
            let delta = step.min(slice[from]);
            for to in 0..slice.len() {
                if to != from {
                    moves.push((from, to, delta));
                }
            }
        }
        moves
    };

    if row == 0 {
        let base: Vec<F> = aux.px2().as_slice().to_vec();
        for (from, to, delta) in moved(&base) {
            let mut row = base.clone();
            row[from] -= delta;
            row[to] += delta;
            if let Ok(px2) = Pmf::new(row) {
                if let Ok(cand) = rebuild_aux(ch, aux, Some(px2), None, None) {
                    out.push(cand);
                }
            }
        }
        return out;
    }
    let row = row - 1;
    if row < ns * nx2 {
        let mut table: Vec<F> = (0..ns * nx2 * nv)
            .map(|i| {
                let s = i / (nx2 * nv);
                let rem = i % (nx2 * nv);
                aux.pv(rem % nv, s, rem / nv)
            })
            .collect();
        let start = row * nv;
        let base: Vec<F> = table[start..start + nv].to_vec();
        for (from, to, delta) in moved(&base) {
            let mut slice = base.clone();
            slice[from] -= delta;
            slice[to] += delta;
            table[start..start + nv].copy_from_slice(&slice);
            if let Ok(cand) = rebuild_aux(ch, aux, None, Some(table.clone()), None) {
                out.push(cand);
            }
            table[start..start + nv].copy_from_slice(&base);
        }
        return out;
    }
    let row = row - ns * nx2;
    let row_len = nu * nx1;
    let mut table: Vec<F> = (0..ns * nv * nx2 * row_len)
        .map(|i| {
            let r = i / row_len;
            let e = i % row_len;
            let x2 = r % nx2;
            let v = (r / nx2) % nv;
            let s = r / (nx2 * nv);
            aux.pux1(e / nx1, e % nx1, s, v, x2)
        })
        .collect();
    let start = row * row_len;
    let base: Vec<F> = table[start..start + row_len].to_vec();
    for (from, to, delta) in moved(&base) {
        let mut slice = base.clone();
        slice[from] -= delta;
        slice[to] += delta;
        table[start..start + row_len].copy_from_slice(&slice);
        if let Ok(cand) = rebuild_aux(ch, aux, None, None, Some(table.clone())) {
            out.push(cand);
        }
        table[start..start + row_len].copy_from_slice(&base);
    }
    out
}

fn rebuild_aux<F: Real>(
    ch: &DmMacChannel<F>,
    aux: &AuxJoint<F>,
    px2: Option<Pmf<F>>,
    pv: Option<Vec<F>>,
    pux1: Option<Vec<F>>,
) -> Result<AuxJoint<F>> {
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let (nu, nv) = (aux.nu(), aux.nv());
    let px2 = px2.unwrap_or_else(|| aux.px2().clone());
    let pv = pv.unwrap_or_else(|| {
        (0..ns * nx2 * nv)
            .map(|i| {
                let s = i / (nx2 * nv);
                let rem = i % (nx2 * nv);
                aux.pv(rem % nv, s, rem / nv)
            })
            .collect()
    });
    let pux1 = pux1.unwrap_or_else(|| {
        let row_len = nu * nx1;
        (0..ns * nv * nx2 * row_len)
            .map(|i| {
                let r = i / row_len;
                let e = i % row_len;
                let x2 = r % nx2;
                let v = (r / nx2) % nv;
                let s = r / (nx2 * nv);
                aux.pux1(e / nx1, e % nx1, s, v, x2)
            })
            .collect()
    });
    AuxJoint::new(ch, nu, nv, px2, pv, pux1)
}

// ---------------------------------------------------------------------------
// Outer-bound search over input distributions
// ---------------------------------------------------------------------------

fn input_dist_seed_specs<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
) -> Result<InputSeedSpecs<F>> {
    let px2s = rows_with_uniform::<F>(ch.nx2(), cfg.levels)?;
    let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
    // one row per (x2, s) cell; tie rows together when the combination count
    // explodes, preferring per-state variety
    let cells = ch.nx2() * ch.ns();
    let combos = (x1rows.len() as u128).checked_pow(cells as u32);
    let assignments: Vec<Vec<usize>> = match combos {
        Some(c) if c <= SEED_COMBO_CAP as u128 => full_assignments(x1rows.len(), cells),
        _ => {
            let per_state = (x1rows.len() as u128).checked_pow(ch.ns() as u32);
            match per_state {
                Some(c) if c <= SEED_COMBO_CAP as u128 => {
                    full_assignments(x1rows.len(), ch.ns())
                        .into_iter()
                        .map(|by_state| {
                            (0..cells).map(|cell| by_state[cell % ch.ns()]).collect()
                        })
                        .collect()
                }
                _ => (0..x1rows.len()).map(|r| vec![r; cells]).collect(),
            }
        }
    };
    Ok((px2s, x1rows, assignments))
}

fn full_assignments(n_rows: usize, cells: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; cells];
    loop {
        out.push(idx.clone());
        let mut pos = cells;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n_rows {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn build_input_dist<F: Real>(
    ch: &DmMacChannel<F>,
    px2: &[F],
    rows: &[Vec<F>],
    assignment: &[usize],
) -> Result<InputDist<F>> {
    let mut table = Vec::with_capacity(ch.nx2() * ch.ns() * ch.nx1());
    for cell in 0..ch.nx2() * ch.ns() {
        table.extend(rows[assignment[cell]].iter().copied());
    }
    InputDist::new(ch, Pmf::new(px2.to_vec())?, table)
}

fn random_input_dist<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    restart: usize,
) -> InputDist<F> {
    let mut rng = rng_for(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, restart);
    let px2 = Pmf::new(random_row::<F>(&mut rng, ch.nx2())).expect("row stochastic");
    let mut table = Vec::with_capacity(ch.nx2() * ch.ns() * ch.nx1());
    for _ in 0..ch.nx2() * ch.ns() {
        table.extend(random_row::<F>(&mut rng, ch.nx1()));
    }
    InputDist::new(ch, px2, table).expect("sampled input dist valid")
}

/// Regenerates the outer-search candidate with the given index.
pub fn input_dist_candidate<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    index: usize,
) -> Result<InputDist<F>> {
    let (px2s, x1rows, assignments) = input_dist_seed_specs(ch, cfg)?;
    let n_seeds = px2s.len() * assignments.len();
    if index < n_seeds {
        let (pi, ai) = (index / assignments.len(), index % assignments.len());
        build_input_dist(ch, &px2s[pi], &x1rows, &assignments[ai])
    } else {
        Ok(random_input_dist(ch, cfg, index - n_seeds))
    }
}

fn evaluate_outer_candidates<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
) -> Result<Vec<Eval<F>>> {
    cfg.validate()?;
    let (px2s, x1rows, assignments) = input_dist_seed_specs(ch, cfg)?;
    let n_seeds = px2s.len() * assignments.len();
    let total = n_seeds + cfg.restarts;
    let evals: Vec<Option<Eval<F>>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let d = if index < n_seeds {
                let (pi, ai) = (index / assignments.len(), index % assignments.len());
                build_input_dist(ch, &px2s[pi], &x1rows, &assignments[ai]).ok()?
            } else {
                random_input_dist(ch, cfg, index - n_seeds)
            };
            let joint = assemble_outer_joint(ch, &d).ok()?;
            if !satisfies_constraints(ch, &joint).ok()? {
                return None;
            }
            let bounds = outer_bounds_t3_on(&joint).ok()?;
            Some(Eval { index, bounds })
        })
        .collect();
    Ok(evals.into_iter().flatten().collect())
}

/// Sampled supports of the outer bound over input distributions. This traces
/// a sampled approximation of the outer boundary; only per-point dominance
/// against inner points is certified.
pub fn outer_supports<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    directions: &[Direction<F>],
) -> Result<Vec<SupportResult<F>>> {
    let evals = evaluate_outer_candidates(ch, cfg)?;
    Ok(directions.iter().map(|&d| best_support(&evals, d)).collect())
}

/// Polygon assembled from [`outer_supports`].
pub fn trace_outer_region<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    directions: &[Direction<F>],
) -> Result<RatePolygon<F>> {
    if directions.len() < 3 {
        return Err(Error::Domain("need at least 3 directions to trace a region".into()));
    }
    let sups = outer_supports(ch, cfg, directions)?;
    let constraints: Vec<((F, F), F)> = directions
        .iter()
        .zip(&sups)
        .map(|(d, s)| ((d.wc, d.w1), s.value))
        .collect();
    Ok(intersect_halfplanes(&constraints))
}

// ---------------------------------------------------------------------------
// Common-message capacity search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KPattern {
    Degenerate,
    CopyX1,
    AddState,
    CopyX1State,
}

fn build_cm_aux<F: Real>(
    ch: &DmMacChannel<F>,
    kp: KPattern,
    px2: &[F],
    rows: &[Vec<F>],
    assignment: &[usize],
) -> Result<CommonMsgAux<F>> {
    let (ns, nx1, nx2) = (ch.ns(), ch.nx1(), ch.nx2());
    let nk = match kp {
        KPattern::Degenerate => 1,
        KPattern::CopyX1 | KPattern::AddState => nx1,
        KPattern::CopyX1State => nx1 * ns,
    };
    let mut pkx1 = vec![F::zero(); ns * nx2 * nk * nx1];
    for s in 0..ns {
        let row = &rows[assignment[s]];
        for x2 in 0..nx2 {
            for x1 in 0..nx1 {
                let k = match kp {
                    KPattern::Degenerate => 0,
                    KPattern::CopyX1 => x1,
                    KPattern::AddState => (x1 + s) % nx1,
                    KPattern::CopyX1State => x1 * ns + s,
                };
                pkx1[((s * nx2 + x2) * nk + k) * nx1 + x1] = row[x1];
            }
        }
    }
    CommonMsgAux::new(ch, nk, Pmf::new(px2.to_vec())?, pkx1)
}

fn cm_seed_specs<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
) -> Result<Vec<CmSeedSpec<F>>> {
    let kmax = cfg.kmax_for(ch);
    let px2s = rows_with_uniform::<F>(ch.nx2(), cfg.levels)?;
    let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
    let assignments = state_row_assignments(&x1rows, ch.ns());
    let mut specs = Vec::new();
    for kp in [
        KPattern::Degenerate,
        KPattern::CopyX1,
        KPattern::AddState,
        KPattern::CopyX1State,
    ] {
        let nk = match kp {
            KPattern::Degenerate => 1,
            KPattern::CopyX1 | KPattern::AddState => ch.nx1(),
            KPattern::CopyX1State => ch.nx1() * ch.ns(),
        };
        if nk > kmax {
            continue;
        }
        for px2 in &px2s {
            for assignment in &assignments {
                specs.push((kp, px2.clone(), assignment.clone()));
            }
        }
    }
    Ok(specs)
}

fn random_cm_aux<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    restart: usize,
) -> CommonMsgAux<F> {
    let kmax = cfg.kmax_for(ch);
    let mut rng = rng_for(cfg.seed ^ 0x2545_f491_4f6c_dd1d, restart);
    let px2 = Pmf::new(random_row::<F>(&mut rng, ch.nx2())).expect("row stochastic");
    let mut pkx1 = Vec::with_capacity(ch.ns() * ch.nx2() * kmax * ch.nx1());
    for _ in 0..ch.ns() * ch.nx2() {
        pkx1.extend(random_row::<F>(&mut rng, kmax * ch.nx1()));
    }
    CommonMsgAux::new(ch, kmax, px2, pkx1).expect("sampled measure valid")
}

/// Regenerates the common-message candidate with the given index.
pub fn cm_candidate<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
    index: usize,
) -> Result<CommonMsgAux<F>> {
    let specs = cm_seed_specs(ch, cfg)?;
    if index < specs.len() {
        let (kp, px2, assignment) = &specs[index];
        let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
        build_cm_aux(ch, *kp, px2, &x1rows, assignment)
    } else {
        Ok(random_cm_aux(ch, cfg, index - specs.len()))
    }
}

/// Maximum sampled common-message rate with the winning measure's index.
pub fn cm_capacity_search<F: Real>(
    ch: &DmMacChannel<F>,
    cfg: &SearchConfig,
) -> Result<(F, Option<usize>)> {
    cfg.validate()?;
    check_joint_size(ch, cfg.kmax_for(ch), 1)?;
    let specs = cm_seed_specs(ch, cfg)?;
    let x1rows = rows_with_uniform::<F>(ch.nx1(), cfg.levels)?;
    let total = specs.len() + cfg.restarts;
    let evals: Vec<Option<(usize, F)>> = (0..total)
        .into_par_iter()
        .map(|index| {
            let k = if index < specs.len() {
                let (kp, px2, assignment) = &specs[index];
                build_cm_aux(ch, *kp, px2, &x1rows, assignment).ok()?
            } else {
                random_cm_aux(ch, cfg, index - specs.len())
            };
            let joint = assemble_cm_joint(ch, &k).ok()?;
            if !satisfies_constraints(ch, &joint).ok()? {
                return None;
            }
            Some((index, cm_capacity_value_on(&joint).ok()?))
        })
        .collect();
    let mut best = F::zero();
    let mut witness = None;
    for (index, v) in evals.into_iter().flatten() {
        if v > best {
            best = v;
            witness = Some(index);
        }
    }
    Ok((best, witness))
}
