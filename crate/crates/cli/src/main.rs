//! Command-line front end: evaluates and traces rate regions for
//! state-dependent MACs, reproduces the binary-example closed forms against
//! brute force, computes the Gaussian region, and reduces rate-inequality
//! systems by Fourier-Motzkin elimination.
//!
//! Every command is deterministic given its inputs and `--seed`; outputs are
//! CSV or canonical text with a `# key=value` manifest header, so reruns are
//! byte-identical. Wall-clock timing goes to stderr only.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use sdmac::channel::parse_channel;
use sdmac::gauss::{self, GaussianParams};
use sdmac::geom::RatePolygon;
use sdmac::search::{
    self, AuxFilter, Direction, SearchConfig, SupportResult,
};
use sdmac::{binary, fme, Channel};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_DIRECTIONS: usize = 33;

#[derive(Parser)]
#[command(name = "sdmac", version, about = "capacity-region bounds for state-dependent MACs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the inner rate region of a channel over sampled auxiliaries.
    #[command(name = "dm_region")]
    DmRegion {
        channel_file: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cardinality cap on U; defaults to the support-lemma bound.
        #[arg(long)]
        umax: Option<usize>,
        /// Cardinality cap on V; defaults to the support-lemma bound.
        #[arg(long)]
        vmax: Option<usize>,
        /// Restrict to a degenerate V (the no-state-at-helper subregion).
        #[arg(long = "no_v", default_value_t = false)]
        no_v: bool,
        /// Keep only auxiliaries with nonnegative compression-decoding slack;
        /// raises the default V cap by one.
        #[arg(long, default_value_t = false)]
        constrained: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the sampled outer-bound boundary over input distributions.
    #[command(name = "dm_outer")]
    DmOuter {
        channel_file: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the common-message capacity of a channel.
    #[command(name = "cm_capacity")]
    CmCapacity {
        channel_file: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cardinality cap on the auxiliary K; defaults to |S||X1||X2| + 1.
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed forms and brute force for the binary modulo-additive example.
    #[command(name = "binary_example")]
    BinaryExample {
        /// Crossover probability of the noise.
        p: Option<f64>,
        /// Input-weight limit of the informed encoder.
        q1: Option<f64>,
        /// Sweep the 9x9 grid p, q1 in {0.05, ..., 0.45}.
        #[arg(long, default_value_t = false)]
        sweep: bool,
        /// Grid levels of the brute-force oracle column.
        #[arg(long, default_value_t = 201)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form Gaussian capacity region and common-message capacity.
    #[command(name = "gaussian")]
    Gaussian {
        p1: f64,
        p2: f64,
        q: f64,
        n: f64,
        /// Correlation grid steps per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a rate-inequality system by Fourier-Motzkin elimination.
    #[command(name = "fme")]
    Fme {
        system_file: PathBuf,
        /// Comma-separated rate variables to project out; defaults to every
        /// declared rate other than Rc and R1, in declaration order.
        #[arg(long, value_delimiter = ',')]
        eliminate: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let start = Instant::now();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::DmRegion {
            channel_file,
            levels,
            restarts,
            seed,
            umax,
            vmax,
            no_v,
            constrained,
            out,
        } => cmd_dm_region(
            &channel_file,
            levels,
            restarts,
            seed,
            umax,
            vmax,
            no_v,
            constrained,
            out,
        ),
        Command::DmOuter {
            channel_file,
            levels,
            restarts,
            seed,
            out,
        } => cmd_dm_outer(&channel_file, levels, restarts, seed, out),
        Command::CmCapacity {
            channel_file,
            levels,
            restarts,
            seed,
            kmax,
            out,
        } => cmd_cm_capacity(&channel_file, levels, restarts, seed, kmax, out),
        Command::BinaryExample {
            p,
            q1,
            sweep,
            levels,
            out,
        } => cmd_binary_example(p, q1, sweep, levels, out),
        Command::Gaussian {
            p1,
            p2,
            q,
            n,
            grid,
            out,
        } => cmd_gaussian(p1, p2, q, n, grid, out),
        Command::Fme {
            system_file,
            eliminate,
            out,
        } => cmd_fme(&system_file, eliminate, out),
    };
    let elapsed = start.elapsed();
    eprintln!("# duration_ms={}", elapsed.as_millis());
    if let Err(msg) = result {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}

type CmdResult = Result<(), String>;

fn load_channel(path: &PathBuf) -> Result<Channel, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_channel(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_output(out: Option<PathBuf>, content: &str) -> CmdResult {
    match out {
        Some(path) => std::fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Six-decimal rendering with negative zero normalized away.
fn f6(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        return "-inf".to_string();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

fn push_supports_block(
    buf: &mut String,
    directions: &[Direction<f64>],
    supports: &[SupportResult<f64>],
) {
    buf.push_str("wc,w1,support,Rc,R1\n");
    for (d, s) in directions.iter().zip(supports) {
        let _ = writeln!(
            buf,
            "{},{},{},{},{}",
            f6(d.wc()),
            f6(d.w1()),
            f6(s.value),
            f6(s.vertex.0),
            f6(s.vertex.1)
        );
    }
}

fn push_polygon_block(buf: &mut String, poly: &RatePolygon<f64>) {
    buf.push_str("# polygon\n");
    buf.push_str("Rc,R1\n");
    for &(rc, r1) in poly.vertices() {
        let _ = writeln!(buf, "{},{}", f6(rc), f6(r1));
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dm_region(
    channel_file: &PathBuf,
    levels: usize,
    restarts: usize,
    seed: u64,
    umax: Option<usize>,
    vmax: Option<usize>,
    no_v: bool,
    constrained: bool,
    out: Option<PathBuf>,
) -> CmdResult {
    let ch = load_channel(channel_file)?;
    let (default_umax, default_vmax) = ch.default_caps();
    let vmax_effective = if no_v {
        1
    } else {
        vmax.unwrap_or(if constrained {
            default_vmax + 1
        } else {
            default_vmax
        })
    };
    let caps = (umax.unwrap_or(default_umax), vmax_effective);
    let cfg = SearchConfig {
        levels,
        restarts,
        seed,
        caps: Some(caps),
        ..SearchConfig::default()
    };
    let filter = if constrained {
        AuxFilter::DecodableCompression
    } else {
        AuxFilter::None
    };
    let directions = Direction::fan(DEFAULT_DIRECTIONS);
    let supports =
        search::supports(&ch, &cfg, &directions, filter).map_err(|e| e.to_string())?;
    let constraints: Vec<((f64, f64), f64)> = directions
        .iter()
        .zip(&supports)
        .map(|(d, s)| ((d.wc(), d.w1()), s.value))
        .collect();
    let poly = sdmac::geom::intersect_halfplanes(&constraints);

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=dm_region");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# channel={}", channel_file.display());
    let _ = writeln!(buf, "# levels={levels}");
    let _ = writeln!(buf, "# restarts={restarts}");
    let _ = writeln!(buf, "# seed={seed}");
    let _ = writeln!(buf, "# umax={}", caps.0);
    let _ = writeln!(buf, "# vmax={}", caps.1);
    let _ = writeln!(buf, "# no_v={no_v}");
    let _ = writeln!(buf, "# constrained={constrained}");
    let _ = writeln!(
        buf,
        "# note=inner approximation from sampled distributions; the gap to the true region is unquantified"
    );
    push_supports_block(&mut buf, &directions, &supports);
    push_polygon_block(&mut buf, &poly);
    write_output(out, &buf)
}

fn cmd_dm_outer(
    channel_file: &PathBuf,
    levels: usize,
    restarts: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> CmdResult {
    let ch = load_channel(channel_file)?;
    let cfg = SearchConfig {
        levels,
        restarts,
        seed,
        ..SearchConfig::default()
    };
    let directions = Direction::fan(DEFAULT_DIRECTIONS);
    let supports = search::outer_supports(&ch, &cfg, &directions).map_err(|e| e.to_string())?;
    let constraints: Vec<((f64, f64), f64)> = directions
        .iter()
        .zip(&supports)
        .map(|(d, s)| ((d.wc(), d.w1()), s.value))
        .collect();
    let poly = sdmac::geom::intersect_halfplanes(&constraints);

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=dm_outer");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# channel={}", channel_file.display());
    let _ = writeln!(buf, "# levels={levels}");
    let _ = writeln!(buf, "# restarts={restarts}");
    let _ = writeln!(buf, "# seed={seed}");
    let _ = writeln!(
        buf,
        "# note=sampled approximation of an outer bound's boundary; only per-point dominance checks are certified"
    );
    push_supports_block(&mut buf, &directions, &supports);
    push_polygon_block(&mut buf, &poly);
    write_output(out, &buf)
}

fn cmd_cm_capacity(
    channel_file: &PathBuf,
    levels: usize,
    restarts: usize,
    seed: u64,
    kmax: Option<usize>,
    out: Option<PathBuf>,
) -> CmdResult {
    let ch = load_channel(channel_file)?;
    let cfg = SearchConfig {
        levels,
        restarts,
        seed,
        kmax,
        ..SearchConfig::default()
    };
    let (value, witness_index) =
        search::cm_capacity_search(&ch, &cfg).map_err(|e| e.to_string())?;

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=cm_capacity");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# channel={}", channel_file.display());
    let _ = writeln!(buf, "# levels={levels}");
    let _ = writeln!(buf, "# restarts={restarts}");
    let _ = writeln!(buf, "# seed={seed}");
    let _ = writeln!(buf, "# kmax={}", cfg.kmax_for(&ch));
    let _ = writeln!(buf, "C,{}", f6(value));
    if let Some(index) = witness_index {
        let k = search::cm_candidate(&ch, &cfg, index).map_err(|e| e.to_string())?;
        let _ = writeln!(buf, "# witness_index={index}");
        let px2: Vec<String> = (0..ch.nx2()).map(|i| f6(k.px2().get(i))).collect();
        let _ = writeln!(buf, "# witness_px2={}", px2.join(" "));
        for s in 0..ch.ns() {
            for x2 in 0..ch.nx2() {
                let row: Vec<String> = (0..k.nk())
                    .flat_map(|kk| (0..ch.nx1()).map(move |x1| (kk, x1)))
                    .map(|(kk, x1)| f6(k.pkx1(kk, x1, s, x2)))
                    .collect();
                let _ = writeln!(buf, "# witness_pkx1[s={s},x2={x2}]={}", row.join(" "));
            }
        }
    }
    write_output(out, &buf)
}

fn cmd_binary_example(
    p: Option<f64>,
    q1: Option<f64>,
    sweep: bool,
    levels: usize,
    out: Option<PathBuf>,
) -> CmdResult {
    let pairs: Vec<(f64, f64)> = if sweep {
        let grid: Vec<f64> = (1..=9).map(|i| 0.05 * i as f64).collect();
        grid.iter()
            .flat_map(|&p| grid.iter().map(move |&q| (p, q)))
            .collect()
    } else {
        match (p, q1) {
            (Some(p), Some(q1)) => vec![(p, q1)],
            _ => return Err("provide both p and q1, or use --sweep".to_string()),
        }
    };

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=binary_example");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# levels={levels}");
    let _ = writeln!(buf, "# sweep={sweep}");
    buf.push_str("p,q1,CB,RGP,gap,CB_bruteforce\n");
    for (p, q1) in pairs {
        let cb = binary::cb_capacity(p, q1).map_err(|e| e.to_string())?;
        let rgp = binary::gp_rate(p, q1).map_err(|e| e.to_string())?;
        let gap = binary::gap(p, q1).map_err(|e| e.to_string())?;
        let bf = binary::brute_force_cb(p, q1, levels).map_err(|e| e.to_string())?;
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{}",
            f6(p),
            f6(q1),
            f6(cb),
            f6(rgp),
            f6(gap),
            f6(bf)
        );
    }
    write_output(out, &buf)
}

fn cmd_gaussian(
    p1: f64,
    p2: f64,
    q: f64,
    n: f64,
    grid: usize,
    out: Option<PathBuf>,
) -> CmdResult {
    let gp = GaussianParams::new(p1, p2, q, n).map_err(|e| e.to_string())?;
    let dirs_raw: Vec<(f64, f64)> = gauss::default_directions(DEFAULT_DIRECTIONS);
    let supports = gauss::gauss_supports(gp, grid, &dirs_raw, true).map_err(|e| e.to_string())?;
    let constraints: Vec<((f64, f64), f64)> = dirs_raw
        .iter()
        .copied()
        .zip(supports.iter().map(|s| s.value))
        .collect();
    let poly = sdmac::geom::intersect_halfplanes(&constraints);
    let cg = gauss::gauss_cm_capacity(gp, grid).map_err(|e| e.to_string())?;

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=gaussian");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# p1={p1}");
    let _ = writeln!(buf, "# p2={p2}");
    let _ = writeln!(buf, "# q={q}");
    let _ = writeln!(buf, "# n={n}");
    let _ = writeln!(buf, "# grid={grid}");
    let _ = writeln!(buf, "CG,{}", f6(cg));
    buf.push_str("wc,w1,support,Rc,R1\n");
    for (d, s) in dirs_raw.iter().zip(&supports) {
        let _ = writeln!(
            buf,
            "{},{},{},{},{}",
            f6(d.0),
            f6(d.1),
            f6(s.value),
            f6(s.vertex.0),
            f6(s.vertex.1)
        );
    }
    push_polygon_block(&mut buf, &poly);
    write_output(out, &buf)
}

fn cmd_fme(
    system_file: &PathBuf,
    eliminate: Option<Vec<String>>,
    out: Option<PathBuf>,
) -> CmdResult {
    let text = std::fs::read_to_string(system_file)
        .map_err(|e| format!("cannot read {}: {e}", system_file.display()))?;
    let sys = fme::parse_system(&text).map_err(|e| format!("{}: {e}", system_file.display()))?;
    let eliminate = eliminate.unwrap_or_else(|| sys.default_eliminations());
    let reduced = sys.reduce(&eliminate);

    let mut buf = String::new();
    let _ = writeln!(buf, "# command=fme");
    let _ = writeln!(buf, "# version={VERSION}");
    let _ = writeln!(buf, "# system={}", system_file.display());
    let _ = writeln!(buf, "# eliminated={}", eliminate.join(","));
    let _ = writeln!(buf, "# note=strict inequalities normalized to non-strict");
    buf.push_str(&fme::render_system(&reduced));
    write_output(out, &buf)
}
