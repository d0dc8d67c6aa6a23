//! Acceptance suite: every release criterion as one test, each printing a
//! pass line with the measured quantities (visible with `--nocapture`).
//!
//! Run with `cargo test --test acceptance`.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sdmac::binary::{brute_force_cb, cb_capacity, gap, pstar};
use sdmac::channel::{binary_example_channel, AuxJoint, DmMacChannel};
use sdmac::fme::{parse_system, render_system};
use sdmac::gauss::{
    default_directions, gauss_bounds, gauss_cm_capacity, gauss_cm_capacity_grid_only,
    gauss_region, CorrPair, GaussianParams,
};
use sdmac::geom::pentagon;
use sdmac::info::{binary_entropy, Pmf};
use sdmac::region::{
    decodable_compression_slack, induced_input_dist, inner_bounds, outer_bounds_t3, RateBounds,
};
use sdmac::search::{supports, AuxFilter, Direction, SearchConfig};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdmac"))
}

fn grid_9() -> Vec<f64> {
    (1..=9).map(|i| 0.05 * i as f64).collect()
}

/// Closed form vs brute force over the 9x9 parameter grid, within 1e-3,
/// under 60 seconds.
#[test]
fn criterion_1_binary_closed_form_vs_brute_force() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &p in &grid_9() {
        for &q1 in &grid_9() {
            let cb = cb_capacity(p, q1).unwrap();
            let bf = brute_force_cb(p, q1, 201).unwrap();
            worst = worst.max((cb - bf).abs());
            assert!(
                (cb - bf).abs() <= 1e-3,
                "p={p}, q1={q1}: closed form {cb} vs brute force {bf}"
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "runtime {secs:.1}s exceeds 60s");
    println!("criterion 1: PASS (max |CB - brute| = {worst:.2e}, {secs:.1}s)");
}

/// Strict positivity of the helper advantage on the open grid, and its
/// vanishing at the q1 = 1/2 and p -> 0 edges.
#[test]
fn criterion_2_strict_gap_and_limits() {
    let mut min_gap = f64::INFINITY;
    for &p in &grid_9() {
        for &q1 in &grid_9() {
            let g = gap(p, q1).unwrap();
            min_gap = min_gap.min(g);
            assert!(g > 1e-6, "gap({p}, {q1}) = {g} not strictly positive");
        }
    }
    for &p in &grid_9() {
        let g = gap(p, 0.5).unwrap();
        assert!(g.abs() <= 1e-9, "gap({p}, 0.5) = {g}");
    }
    for &q1 in &grid_9() {
        let g = gap(1e-6, q1).unwrap();
        assert!(g.abs() <= 1e-4, "gap(1e-6, {q1}) = {g}");
    }
    println!("criterion 2: PASS (min interior gap = {min_gap:.4e})");
}

/// Continuity of the binning rate across its threshold weight:
/// h(p*) - h(p) = p* log2((1-p*)/p*).
#[test]
fn criterion_3_piecewise_continuity() {
    let mut worst: f64 = 0.0;
    for &p in &grid_9() {
        let ps = pstar(p).unwrap();
        let lhs = binary_entropy(ps).unwrap() - binary_entropy(p).unwrap();
        let rhs = ps * ((1.0 - ps) / ps).log2();
        worst = worst.max((lhs - rhs).abs());
        assert!((lhs - rhs).abs() <= 1e-9, "p={p}: {lhs} vs {rhs}");
    }
    println!("criterion 3: PASS (max mismatch = {worst:.2e})");
}

/// The bundled inequality systems reduce to exactly the expected canonical
/// systems, symbolically, in under a second.
#[test]
fn criterion_4_fme_reproduction() {
    let start = Instant::now();

    let run = |file: &str| -> String {
        let out = bin().arg("fme").arg(fixture(file)).output().unwrap();
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    };

    let expect_nonunique = render_system(
        &parse_system(
            "rates R1 Rc\n\
             nonneg R1 Rc\n\
             fact S _|_ X2\n\
             R1 <= I(U;Y|V,X2) - I(U;S|V,X2)\n\
             Rc + R1 <= I(U,V,X2;Y) - I(U,V,X2;S)\n",
        )
        .unwrap(),
    );
    assert_eq!(run("binning_nonunique.ineq"), expect_nonunique);

    let expect_unique = render_system(
        &parse_system(
            "rates R1 Rc\n\
             nonneg R1 Rc\n\
             fact S _|_ X2\n\
             0 <= I(V,X2;Y) - I(V,X2;S)\n\
             R1 <= I(U;Y|V,X2) - I(U;S|V,X2)\n\
             Rc + R1 <= I(U,V,X2;Y) - I(U,V,X2;S)\n",
        )
        .unwrap(),
    );
    assert_eq!(run("binning_unique.ineq"), expect_unique);

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1.0, "runtime {secs:.2}s exceeds 1s");
    println!("criterion 4: PASS (both reductions exact, {secs:.2}s)");
}

fn random_binary_channel(seed: u64) -> DmMacChannel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: f64 = 0.2 + 0.6 * rng.random::<f64>();
    let prior = Pmf::new(vec![w, 1.0 - w]).unwrap();
    let mut kernel = Vec::with_capacity(16);
    for _ in 0..8 {
        let w: f64 = rng.random::<f64>();
        kernel.push(w);
        kernel.push(1.0 - w);
    }
    DmMacChannel::new(2, 2, 2, 2, prior, kernel).unwrap()
}

fn random_aux(ch: &DmMacChannel<f64>, rng: &mut ChaCha8Rng, nu: usize, nv: usize) -> AuxJoint<f64> {
    let row = |rng: &mut ChaCha8Rng, dim: usize| -> Vec<f64> {
        let raw: Vec<f64> = (0..dim)
            .map(|_| -(rng.random::<f64>().max(f64::MIN_POSITIVE)).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|g| g / total).collect()
    };
    let px2 = Pmf::new(row(rng, ch.nx2())).unwrap();
    let mut pv = Vec::new();
    for _ in 0..ch.ns() * ch.nx2() {
        pv.extend(row(rng, nv));
    }
    let mut pux1 = Vec::new();
    for _ in 0..ch.ns() * nv * ch.nx2() {
        pux1.extend(row(rng, nu * ch.nx1()));
    }
    AuxJoint::new(ch, nu, nv, px2, pv, pux1).unwrap()
}

/// Pointwise converse dominance and the exact chain-rule decomposition of the
/// sum-rate bound, over 20 seeded channels x 200 seeded auxiliaries.
#[test]
fn criterion_5_converse_dominance_suite() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut max_violation: f64 = f64::NEG_INFINITY;
    let mut max_decomp: f64 = 0.0;
    for cseed in 100..120u64 {
        let ch = random_binary_channel(cseed);
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + cseed);
        for _ in 0..200 {
            let aux = random_aux(&ch, &mut rng, 4, 3);
            let inner = inner_bounds(&ch, &aux).unwrap();
            let d = induced_input_dist(&ch, &aux).unwrap();
            let outer = outer_bounds_t3(&ch, &d).unwrap();
            max_violation = max_violation.max(inner.a - outer.a).max(inner.b - outer.b);
            assert!(inner.a <= outer.a + 1e-9, "a: {} > {}", inner.a, outer.a);
            assert!(inner.b <= outer.b + 1e-9, "b: {} > {}", inner.b, outer.b);

            let c1 = decodable_compression_slack(&ch, &aux).unwrap();
            let lhs = inner.b;
            let rhs = inner.a + c1;
            max_decomp = max_decomp.max((lhs - rhs).abs());
            assert!((lhs - rhs).abs() <= 1e-10, "decomposition: {lhs} vs {rhs}");
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 300.0, "runtime {secs:.1}s exceeds 5 min");
    println!(
        "criterion 5: PASS ({checked} pairs, max dominance slack {max_violation:.2e}, \
         max decomposition error {max_decomp:.2e}, {secs:.1}s)"
    );
}

/// The generic machinery reproduces the informed-receiver capacity on the
/// structured point V = S, U = X1, uniform inputs.
#[test]
fn criterion_6_generic_machinery_consistency() {
    let ch = binary_example_channel(0.1f64).unwrap();
    let aux = AuxJoint::state_copy_with_x1_rows(
        &ch,
        Pmf::uniform(2),
        &[vec![0.5, 0.5], vec![0.5, 0.5]],
    )
    .unwrap();
    let rb = inner_bounds(&ch, &aux).unwrap();
    let expect = 1.0 - binary_entropy(0.1f64).unwrap();
    assert!(
        (rb.a - expect).abs() <= 1e-9,
        "a = {} vs 1 - h(0.1) = {expect}",
        rb.a
    );
    println!("criterion 6: PASS (a = {:.6}, |a - (1-h(0.1))| = {:.2e})", rb.a, (rb.a - expect).abs());
}

/// Gaussian: refined coarse-grid capacity matches a fine-grid oracle, the
/// region shrinks with the state variance, contains the private-rate vertex,
/// and is scale invariant.
#[test]
fn criterion_7_gaussian() {
    let start = Instant::now();

    for q in [0.0f64, 1.0, 10.0] {
        let gp = GaussianParams::new(1.0, 1.0, q, 1.0).unwrap();
        let refined = gauss_cm_capacity(gp, 101).unwrap();
        let oracle = gauss_cm_capacity_grid_only(gp, 2001).unwrap();
        assert!(
            (refined - oracle).abs() <= 1e-4,
            "Q={q}: refined {refined} vs oracle {oracle}"
        );
    }

    let dirs = default_directions::<f64>(33);
    let region_at = |q: f64| {
        gauss_region(GaussianParams::new(1.0, 1.0, q, 1.0).unwrap(), 101, &dirs).unwrap()
    };
    let (r0, r1, r10) = (region_at(0.0), region_at(1.0), region_at(10.0));
    assert!(r1.includes(&r10, 1e-6), "region(Q=10) not inside region(Q=1)");
    assert!(r0.includes(&r1, 1e-6), "region(Q=1) not inside region(Q=0)");

    let r1max = 0.5 * (1.0f64 + 1.0).log2();
    let vertex = pentagon(RateBounds { a: r1max, b: r1max });
    assert!(r1.includes(&vertex, 1e-9), "(0, {r1max}) not in region(Q=1)");

    let gp = GaussianParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let pairs: [(f64, f64); 5] = [
        (0.0, 0.0),
        (0.5, -0.5),
        (0.3, -0.8),
        (1.0, 0.0),
        (0.0, -1.0),
    ];
    for lambda in [0.5, 2.0] {
        let scaled = GaussianParams::new(
            gp.p1 * lambda,
            gp.p2 * lambda,
            gp.q * lambda,
            gp.n * lambda,
        )
        .unwrap();
        for (r12, r1s) in pairs {
            let c = CorrPair::new(r12, r1s).unwrap();
            let a = gauss_bounds(gp, c).unwrap();
            let b = gauss_bounds(scaled, c).unwrap();
            assert!((a.a - b.a).abs() <= 1e-12 && (a.b - b.b).abs() <= 1e-12);
        }
    }

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "runtime {secs:.1}s exceeds 2 min");
    println!("criterion 7: PASS ({secs:.1}s)");
}

/// Decodable-compression filtering costs at most 0.02 bits of support on the
/// bundled random channels and never gains (subset property on a shared
/// sample set with the V cap raised by one).
#[test]
fn criterion_8_constrained_search_soft_check() {
    let start = Instant::now();
    let dirs = Direction::fan(33);
    let mut max_loss: f64 = 0.0;
    for name in ["random_a.ch", "random_b.ch", "random_c.ch"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let ch: DmMacChannel<f64> = sdmac::channel::parse_channel(&text).unwrap();
        let (umax, vmax) = ch.default_caps();
        let cfg = SearchConfig {
            levels: 5,
            restarts: 500,
            seed: 0,
            caps: Some((umax, vmax + 1)),
            ..SearchConfig::default()
        };
        let unconstrained = supports(&ch, &cfg, &dirs, AuxFilter::None).unwrap();
        let constrained = supports(&ch, &cfg, &dirs, AuxFilter::DecodableCompression).unwrap();
        for (u, c) in unconstrained.iter().zip(&constrained) {
            assert!(c.value <= u.value, "{name}: filtered support exceeds unfiltered");
            let loss = u.value - c.value;
            max_loss = max_loss.max(loss);
            assert!(
                loss <= 0.02,
                "{name}: filtering lost {loss} bits of support"
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "criterion 8: PASS (max filtering loss {max_loss:.2e} bits, {secs:.1}s; \
         grid-limited approximation of the region-equivalence claim)"
    );
}

/// Every CLI command is byte-deterministic across reruns and across thread
/// counts.
#[test]
fn criterion_9_cli_determinism() {
    let start = Instant::now();
    let binary_fixture = fixture("binary_p10.ch");
    let random_fixture = fixture("random_b.ch");
    let ineq_fixture = fixture("binning_unique.ineq");

    let invocations: Vec<Vec<String>> = vec![
        vec![
            "dm_region".into(),
            binary_fixture.display().to_string(),
            "--levels".into(),
            "2".into(),
            "--restarts".into(),
            "30".into(),
            "--seed".into(),
            "3".into(),
            "--umax".into(),
            "4".into(),
            "--vmax".into(),
            "2".into(),
        ],
        vec![
            "dm_region".into(),
            random_fixture.display().to_string(),
            "--levels".into(),
            "2".into(),
            "--restarts".into(),
            "20".into(),
            "--no_v".into(),
        ],
        vec![
            "dm_region".into(),
            random_fixture.display().to_string(),
            "--levels".into(),
            "2".into(),
            "--restarts".into(),
            "20".into(),
            "--umax".into(),
            "4".into(),
            "--constrained".into(),
        ],
        vec![
            "dm_outer".into(),
            binary_fixture.display().to_string(),
            "--levels".into(),
            "2".into(),
            "--restarts".into(),
            "30".into(),
        ],
        vec![
            "cm_capacity".into(),
            binary_fixture.display().to_string(),
            "--levels".into(),
            "2".into(),
            "--restarts".into(),
            "30".into(),
        ],
        vec![
            "binary_example".into(),
            "0.1".into(),
            "0.2".into(),
        ],
        vec![
            "gaussian".into(),
            "1".into(),
            "1".into(),
            "1".into(),
            "1".into(),
            "--grid".into(),
            "31".into(),
        ],
        vec!["fme".into(), ineq_fixture.display().to_string()],
    ];

    for args in &invocations {
        let run = |threads: Option<&str>| -> Vec<u8> {
            let mut cmd = bin();
            cmd.args(args);
            if let Some(t) = threads {
                cmd.env("RAYON_NUM_THREADS", t);
            }
            let out = cmd.output().unwrap();
            assert!(out.status.success(), "command {args:?} failed");
            out.stdout
        };
        let first = run(None);
        let second = run(None);
        let serial = run(Some("1"));
        let quad = run(Some("4"));
        assert_eq!(first, second, "rerun differs for {args:?}");
        assert_eq!(first, serial, "single-thread run differs for {args:?}");
        assert_eq!(first, quad, "4-thread run differs for {args:?}");
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "criterion 9: PASS ({} commands x 4 runs byte-identical, {secs:.1}s)",
        invocations.len()
    );
}
