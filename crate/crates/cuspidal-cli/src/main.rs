//! `cuspidal` — cusp points and singularity curves of planar 3-RPR parallel
//! manipulators, from the command line.
//!
//! Subcommands: `cusps` (find and verify all cusp points of a constant-L1
//! joint-space slice), `trace` (sample the slice's singularity curves into
//! CSV + SVG), `scan` (cusp counts over a range of L1 values), and `dkp`
//! (all assembly modes for one leg-length triple).
//!
//! Exit codes: 0 success (including "no cusps found"); 2 invalid input
//! (arguments, geometry file, output paths); 3 computational failure
//! (precision exhausted or a degenerate elimination), with a diagnostic on
//! stderr naming the failing stage. All numeric output uses fixed digit
//! counts, so reruns produce byte-identical files.

use clap::{Args, Parser, Subcommand};
use cuspidal_core::geometry::load_geometry_json;
use cuspidal_core::kinematics::{coincidence_multiplicity, direct_kinematics};
use cuspidal_core::pipeline::{find_cusps, scan_l1, CuspPoint, PipelineError, PipelineOptions};
use cuspidal_core::polysolve::PolyError;
use cuspidal_core::tracer::{emit_plot, points_csv, trace_slice};
use cuspidal_core::{digits_to_bits, BigGeometry, BigReal, BigSliceProblem, Scalar};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cuspidal",
    version,
    about = "Cusp points and singularity curves of planar 3-RPR parallel manipulators",
    after_help = "Exit codes: 0 success (a zero-cusp result is success), \
                  2 invalid input, 3 computational failure (stage named on stderr)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find all cusp points of the constant-L1 slice, verified by triple
    /// coincidence of direct-kinematics solutions.
    Cusps(CuspsArgs),
    /// Sample the slice's singularity curves into a CSV of points and an
    /// SVG plot (verified cusps overlaid as circles).
    Trace(TraceArgs),
    /// Count cusps across a range of L1 values; transitions where the count
    /// changes are summarized on stderr.
    Scan(ScanArgs),
    /// Solve the direct kinematics for one (L1, L2, L3) triple and report
    /// every assembly mode with its coincidence cluster.
    Dkp(DkpArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Geometry JSON file with fields a2x, a3x, a3y, d1, d2, d3.
    #[arg(long, value_name = "FILE")]
    geometry: PathBuf,

    /// Decimal working precision (minimum 30; mapped to bits as
    /// ceil(digits·log2(10))).
    #[arg(long, default_value_t = 90, value_parser = clap::value_parser!(u32).range(30..))]
    digits: u32,

    /// Worker threads; 1 gives a fully serial reference run.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,

    /// Radius (radians) within which direct-kinematics solutions count as
    /// coincident. A triple coincidence probed with leg lengths rounded to k
    /// decimals splits by roughly (10^-k)^(1/3) radians, so pass at least
    /// that much when the lengths are quoted coarsely (e.g. 0.25 for
    /// two-decimal lengths).
    #[arg(long, default_value = "1e-3", value_name = "RADIANS")]
    cluster_tol: String,

    /// Radius in the half-angle (t, t1) plane below which two cusp
    /// candidates merge.
    #[arg(long, default_value = "1e-6", value_name = "DIST")]
    merge_radius: String,

    /// Leg length below which the leg's angle is treated as undefined.
    #[arg(long, default_value = "1e-8", value_name = "LENGTH")]
    leg_epsilon: String,
}

#[derive(Args)]
struct CuspsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Slice value L1 (decimal literal; parsed at full precision).
    #[arg(long, value_name = "DECIMAL")]
    l1: String,
    /// Output CSV path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Optional SVG plot of the singularity curves with cusps circled.
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// Curve sampling resolution for the optional plot.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(16..))]
    samples: u32,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Slice value L1 (decimal literal; parsed at full precision).
    #[arg(long, value_name = "DECIMAL")]
    l1: String,
    /// Output CSV of curve points.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Output SVG plot.
    #[arg(long, value_name = "FILE")]
    plot: PathBuf,
    /// Number of orientation samples over (−180°, 180°] (minimum 16); the
    /// tracer refines adaptively where branches are steep.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(16..))]
    samples: u32,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Range start (decimal literal).
    #[arg(long, value_name = "DECIMAL", required_unless_present = "at", conflicts_with = "at")]
    from: Option<String>,
    /// Range end, inclusive (decimal literal).
    #[arg(long, value_name = "DECIMAL", required_unless_present = "at", conflicts_with = "at")]
    to: Option<String>,
    /// Scanning step.
    #[arg(long, value_name = "DECIMAL", default_value = "0.1", conflicts_with = "at")]
    step: String,
    /// Explicit comma-separated L1 samples instead of a range.
    #[arg(long, value_name = "L1,L1,…")]
    at: Option<String>,
    /// Output CSV with one row per slice (l1, cusp_count).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Output CSV collecting every cusp row across the scan.
    #[arg(long, value_name = "FILE")]
    cusps_out: PathBuf,
}

#[derive(Args)]
struct DkpArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Leg lengths as three comma-separated nonnegative decimals: L1,L2,L3.
    #[arg(long, value_name = "L1,L2,L3")]
    lengths: String,
}

/// A failure with its documented exit code: 2 for bad input, 3 for a
/// computation that could not finish.
enum Failure {
    Input(String),
    Compute(String),
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cusps(a) => cmd_cusps(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Dkp(a) => cmd_dkp(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn init_jobs(jobs: Option<usize>) -> CliResult<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("cannot configure {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn load_geometry(path: &Path, bits: u32) -> CliResult<BigGeometry> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::Input(format!("cannot read geometry file {}: {e}", path.display()))
    })?;
    load_geometry_json(&text, bits)
        .map_err(|e| Failure::Input(format!("invalid geometry {}: {e}", path.display())))
}

fn parse_decimal_arg(text: &str, bits: u32, what: &str) -> CliResult<BigReal> {
    BigReal::parse_decimal(text.trim(), bits)
        .map_err(|_| Failure::Input(format!("{what}: `{text}` is not a decimal number")))
}

fn parse_positive_arg(text: &str, bits: u32, what: &str) -> CliResult<BigReal> {
    let v = parse_decimal_arg(text, bits, what)?;
    if !v.is_finite() || v <= BigReal::from_i64(0, bits) {
        return Err(Failure::Input(format!("{what} must be positive, got `{text}`")));
    }
    Ok(v)
}

fn pipeline_options(common: &CommonArgs, bits: u32) -> CliResult<PipelineOptions<BigReal>> {
    let mut opts = PipelineOptions::standard(common.digits);
    opts.cluster_tol = parse_positive_arg(&common.cluster_tol, bits, "--cluster-tol")?;
    opts.merge_radius = parse_positive_arg(&common.merge_radius, bits, "--merge-radius")?;
    opts.leg_epsilon = parse_positive_arg(&common.leg_epsilon, bits, "--leg-epsilon")?;
    Ok(opts)
}

fn map_pipeline_error(e: PipelineError, l1: &BigReal) -> Failure {
    let at = format!("L1 = {:.12}", l1.to_f64());
    match e {
        PipelineError::Poly(PolyError::PrecisionExhausted { stage }) => Failure::Compute(format!(
            "precision exhausted during {stage} at {at}; rerun with a larger --digits"
        )),
        other => Failure::Compute(format!("{other} at {at}")),
    }
}

/// Write a file atomically: a complete temporary sibling is renamed over the
/// final path, so no partial output ever becomes visible.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    std::fs::write(&tmp, contents)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        Failure::Input(format!(
            "cannot move {} into place as {}: {e}",
            tmp.display(),
            path.display()
        ))
    })?;
    Ok(())
}

const CUSP_HEADER: &str = "alpha_deg,theta1_deg,L2,L3,res_f1,res_e1,res_sing,dkp_multiplicity";

fn push_cusp_row(out: &mut String, c: &CuspPoint<BigReal>) {
    writeln!(
        out,
        "{:.12},{:.12},{:.12},{:.12},{:.3e},{:.3e},{:.3e},{}",
        c.alpha.to_f64().to_degrees(),
        c.theta1.to_f64().to_degrees(),
        c.l2.to_f64(),
        c.l3.to_f64(),
        c.res_f1.to_f64(),
        c.res_e1.to_f64(),
        c.res_sing.to_f64(),
        c.dkp_multiplicity
    )
    .expect("writing to a String cannot fail");
}

fn cusps_csv(cusps: &[CuspPoint<BigReal>]) -> String {
    let mut out = String::from(CUSP_HEADER);
    out.push('\n');
    for c in cusps {
        push_cusp_row(&mut out, c);
    }
    out
}

fn cmd_cusps(args: CuspsArgs) -> CliResult<()> {
    init_jobs(args.common.jobs)?;
    let bits = digits_to_bits(args.common.digits);
    let geom = load_geometry(&args.common.geometry, bits)?;
    let l1 = parse_positive_arg(&args.l1, bits, "--l1")?;
    let opts = pipeline_options(&args.common, bits)?;

    let problem = BigSliceProblem::new(&geom, &l1, &opts);
    let report = find_cusps(&problem).map_err(|e| map_pipeline_error(e, &l1))?;
    eprintln!(
        "L1 = {:.12}: {} cusp point(s) from {} candidate(s); resultant degree {}; \
         coalescence condition: {}; degenerate-leg flags: {}",
        l1.to_f64(),
        report.cusps.len(),
        report.candidate_count,
        report.resultant_degree,
        if report.used_tangency_fallback {
            "curve-tangency fallback"
        } else {
            "adjugate form"
        },
        report.degenerate_leg_flags
    );
    write_atomic(&args.out, &cusps_csv(&report.cusps))?;

    if let Some(plot_path) = &args.plot {
        let geom64 = big_to_f64_geometry(&geom)?;
        let slice = trace_slice(&geom64, &l1.to_f64(), args.samples as usize);
        write_atomic(plot_path, &emit_plot(&slice, &report.cusps))?;
    }
    Ok(())
}

/// Re-load the geometry in double precision for curve tracing (plots don't
/// need 90 digits, and the quartic-per-sample scan is much faster in f64).
fn big_to_f64_geometry(geom: &BigGeometry) -> CliResult<cuspidal_core::GeometryF64> {
    cuspidal_core::geometry::validate_geometry(
        geom.a2x.to_f64(),
        geom.a3x.to_f64(),
        geom.a3y.to_f64(),
        geom.d1.to_f64(),
        geom.d2.to_f64(),
        geom.d3.to_f64(),
    )
    .map_err(|e| Failure::Input(format!("geometry invalid in double precision: {e}")))
}

fn cmd_trace(args: TraceArgs) -> CliResult<()> {
    init_jobs(args.common.jobs)?;
    let bits = digits_to_bits(args.common.digits);
    let geom = load_geometry(&args.common.geometry, bits)?;
    let l1 = parse_positive_arg(&args.l1, bits, "--l1")?;
    let opts = pipeline_options(&args.common, bits)?;

    let geom64 = big_to_f64_geometry(&geom)?;
    let slice = trace_slice(&geom64, &l1.to_f64(), args.samples as usize);
    let n_points: usize = slice.branches.iter().map(|b| b.len()).sum();
    if n_points == 0 {
        eprintln!(
            "warning: no singular curve found at L1 = {:.12} — the slice may be \
             outside the reachable joint space",
            l1.to_f64()
        );
    } else {
        eprintln!(
            "L1 = {:.12}: {} branch(es), {} point(s), {} degenerate-leg flag(s)",
            l1.to_f64(),
            slice.branches.len(),
            n_points,
            slice.degenerate_leg_flags
        );
    }

    let problem = BigSliceProblem::new(&geom, &l1, &opts);
    let report = find_cusps(&problem).map_err(|e| map_pipeline_error(e, &l1))?;
    eprintln!("{} verified cusp point(s) overlaid", report.cusps.len());

    write_atomic(&args.out, &points_csv(&slice))?;
    write_atomic(&args.plot, &emit_plot(&slice, &report.cusps))?;
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> CliResult<()> {
    init_jobs(args.common.jobs)?;
    let bits = digits_to_bits(args.common.digits);
    let geom = load_geometry(&args.common.geometry, bits)?;
    let opts = pipeline_options(&args.common, bits)?;

    let values: Vec<BigReal> = if let Some(list) = &args.at {
        list.split(',')
            .map(|s| parse_positive_arg(s, bits, "--at"))
            .collect::<CliResult<_>>()?
    } else {
        // clap guarantees from/to are present when --at is absent.
        let from = parse_positive_arg(args.from.as_deref().unwrap(), bits, "--from")?;
        let to = parse_positive_arg(args.to.as_deref().unwrap(), bits, "--to")?;
        let step = parse_positive_arg(&args.step, bits, "--step")?;
        if to < from {
            return Err(Failure::Input("--to must be at least --from".into()));
        }
        let mut values = Vec::new();
        let half = step.halve();
        let mut k: i64 = 0;
        loop {
            let v = from.add_ref(&step.mul_ref(&BigReal::from_i64(k, bits)));
            if v > to.add_ref(&half) {
                break;
            }
            values.push(v);
            k += 1;
        }
        values
    };
    if values.is_empty() {
        return Err(Failure::Input("the scan range contains no samples".into()));
    }

    let scan = scan_l1(&geom, &values, &opts);
    for t in &scan.transitions {
        eprintln!(
            "transition: cusp count {} -> {} between L1 = {:.12} and L1 = {:.12}",
            t.count_low,
            t.count_high,
            t.l1_low.to_f64(),
            t.l1_high.to_f64()
        );
    }
    if scan.transitions.is_empty() {
        eprintln!("no cusp-count transitions in the scanned range");
    }

    let mut counts = String::from("l1,cusp_count\n");
    let mut all_cusps = String::from("l1,");
    all_cusps.push_str(CUSP_HEADER);
    all_cusps.push('\n');
    for slice in &scan.slices {
        let report = slice
            .result
            .as_ref()
            .map_err(|e| map_pipeline_error(e.clone(), &slice.l1))?;
        writeln!(counts, "{:.12},{}", slice.l1.to_f64(), report.cusps.len())
            .expect("writing to a String cannot fail");
        for c in &report.cusps {
            write!(all_cusps, "{:.12},", slice.l1.to_f64())
                .expect("writing to a String cannot fail");
            push_cusp_row(&mut all_cusps, c);
        }
    }
    write_atomic(&args.out, &counts)?;
    write_atomic(&args.cusps_out, &all_cusps)?;
    Ok(())
}

fn cmd_dkp(args: DkpArgs) -> CliResult<()> {
    init_jobs(args.common.jobs)?;
    let bits = digits_to_bits(args.common.digits);
    let geom = load_geometry(&args.common.geometry, bits)?;
    let parts: Vec<&str> = args.lengths.split(',').collect();
    if parts.len() != 3 {
        return Err(Failure::Input(format!(
            "--lengths expects L1,L2,L3 — got {} value(s)",
            parts.len()
        )));
    }
    let mut lengths = Vec::with_capacity(3);
    for (i, p) in parts.iter().enumerate() {
        let v = parse_decimal_arg(p, bits, "--lengths")?;
        if !v.is_finite() || v < BigReal::from_i64(0, bits) {
            return Err(Failure::Input(format!(
                "--lengths component {} must be nonnegative, got `{p}`",
                i + 1
            )));
        }
        lengths.push(v);
    }
    let lengths: [BigReal; 3] = [
        lengths[0].clone(),
        lengths[1].clone(),
        lengths[2].clone(),
    ];
    let cluster_tol = parse_positive_arg(&args.common.cluster_tol, bits, "--cluster-tol")?;

    let modes = direct_kinematics(&geom, &lengths, args.common.digits, &cluster_tol)
        .map_err(|e| Failure::Compute(format!("direct kinematics failed: {e}")))?;
    if modes.is_empty() {
        println!("0 solutions");
        return Ok(());
    }
    println!(
        "{} solution(s)  [theta angles in degrees; residual is max |constraint|]",
        modes.len()
    );
    println!(
        "{:>16} {:>16} {:>16} {:>16} {:>12} {:>8}",
        "theta1_deg", "theta2_deg", "theta3_deg", "alpha_deg", "residual", "cluster"
    );
    for m in &modes {
        println!(
            "{:>16.12} {:>16.12} {:>16.12} {:>16.12} {:>12.3e} {:>8}",
            m.theta[0].to_f64().to_degrees(),
            m.theta[1].to_f64().to_degrees(),
            m.theta[2].to_f64().to_degrees(),
            m.alpha.to_f64().to_degrees(),
            m.residual.to_f64(),
            m.cluster_id
        );
    }
    let mult = coincidence_multiplicity(&modes, &cluster_tol);
    println!("coincidence multiplicity: {mult}");
    Ok(())
}
