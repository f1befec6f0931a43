//! Command-line surface: one thin subcommand per library capability.
//!
//! Every randomized subcommand takes `--seed` (or generates one and prints
//! it to stderr), and every output embeds the crate version, subcommand,
//! seed, and flag set, so any artifact can be regenerated byte-for-byte.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::extension_optimizer::{solve, ExtensionProblem, PriorMeasure};
use crate::function_model::{builtin, Polynomial, SmoothFunction};
use crate::general_noise::{debias_coeffs, MomentMatrix};
use crate::laplace_debias::{plug_in_bias_abs, plug_in_bias_mc, LaplaceEstimator};
use crate::mean_mechanisms::{sd_sweep, MssParams, MuParams};
use crate::noise::RngStream;
use crate::prdp::{policy, transform_release, TransformSpec};
use crate::report::{csv_document, sweep_csv, sweep_svg, write_atomic, Meta};

#[derive(Parser)]
#[command(
    name = "unbias",
    version,
    about = "Unbiased estimates of functions of noisy statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Debiased estimate f(x) − b²·f″(x) for one noisy value.
    Estimate {
        /// Function spec, e.g. power:3, inverse, kth_root:2, cos:1.5, identity:1
        #[arg(long)]
        function: String,
        /// Laplace noise scale of the input value
        #[arg(long)]
        b: f64,
        /// The noisy value
        #[arg(long)]
        x: f64,
    },
    /// Plug-in bias of |x̃|: closed form vs Monte Carlo, as CSV.
    BiasCheck {
        /// True values, comma-separated
        #[arg(long, default_value = "0,0.5,1,2")]
        q: String,
        /// Noise scales, comma-separated
        #[arg(long, default_value = "0.5,1")]
        b: String,
        /// Monte Carlo draws per grid point
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the constrained least-squares polynomial extension.
    Optimize {
        #[arg(long, default_value = "inverse")]
        function: String,
        /// Boundary below which the extension replaces the function
        #[arg(long = "L")]
        l: f64,
        /// Extension degree
        #[arg(long)]
        k: usize,
        /// Laplace noise scale
        #[arg(long)]
        b: f64,
        /// Prior over true values: uniform:lo:hi, atom:q, or
        /// discrete:q1=w1,q2=w2,...
        #[arg(long)]
        prior: String,
        /// Output JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a CSV of (q, e_g, var_g) over the profile grid
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Profile grid as lo:hi:points
        #[arg(long)]
        profile_grid: Option<String>,
    },
    /// Analytic SD sweep of the two mean mechanisms over an n-grid.
    MeanSweep {
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        /// Fixed true mean on the grid
        #[arg(long)]
        m: f64,
        /// Extension degree for the unbiased mechanism
        #[arg(long)]
        k: usize,
        /// Extension boundary
        #[arg(long = "L")]
        l: f64,
        /// Dataset-size grid as lo:hi
        #[arg(long)]
        n: String,
        /// Prior for the extension objective (default: uniform over the grid)
        #[arg(long)]
        prior: Option<String>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Render the sweep as a three-panel SVG chart
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Release a sum under per-record privacy via a root transformation.
    PrdpSum {
        /// CSV of record values, one nonnegative number per row
        #[arg(long)]
        records: PathBuf,
        /// Root order of the transformation f(x) = x^(1/k)
        #[arg(long)]
        k: u32,
        /// Offset added before transforming
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Laplace noise scale on the transformed value
        #[arg(long)]
        b: f64,
        /// Contribution bounds to tabulate the policy function at
        #[arg(long, default_value = "1")]
        policy_c: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Debias a polynomial under any noise with known moments.
    PolyDebias {
        /// Target polynomial coefficients, lowest degree first
        #[arg(long)]
        coeffs: String,
        /// Noise moments μ₀,μ₁,... (μ₀ = 1)
        #[arg(long)]
        moments: String,
        /// Optionally evaluate the debiased polynomial here
        #[arg(long)]
        x: Option<f64>,
        /// Print JSON instead of plain text
        #[arg(long)]
        json: bool,
        /// Output JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check that a debiased estimate is centered on f(q).
    McCheck {
        #[arg(long)]
        function: String,
        #[arg(long)]
        b: f64,
        /// True value of the statistic
        #[arg(long)]
        q: f64,
        /// Monte Carlo draws
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses argv, dispatches, and maps any validation error to exit code 2
/// with a message on stderr.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Estimate { function, b, x } => cmd_estimate(&function, b, x),
        Command::BiasCheck { q, b, n, seed, out } => {
            cmd_bias_check(&q, &b, n, resolve_seed(seed), out.as_deref())
        }
        Command::Optimize { function, l, k, b, prior, out, profile, profile_grid } => {
            cmd_optimize(
                &function,
                l,
                k,
                b,
                &prior,
                out.as_deref(),
                profile.as_deref(),
                profile_grid.as_deref(),
            )
        }
        Command::MeanSweep { eps1, eps2, m, k, l, n, prior, out, plot } => cmd_mean_sweep(
            eps1,
            eps2,
            m,
            k,
            l,
            &n,
            prior.as_deref(),
            out.as_deref(),
            plot.as_deref(),
        ),
        Command::PrdpSum { records, k, a, b, policy_c, seed, out } => {
            cmd_prdp_sum(&records, k, a, b, &policy_c, resolve_seed(seed), out.as_deref())
        }
        Command::PolyDebias { coeffs, moments, x, json, out } => {
            cmd_poly_debias(&coeffs, &moments, x, json, out.as_deref())
        }
        Command::McCheck { function, b, q, n, seed, out } => {
            cmd_mc_check(&function, b, q, n, resolve_seed(seed), out.as_deref())
        }
    }
}

fn cmd_estimate(function: &str, b: f64, x: f64) -> Result<()> {
    let est = LaplaceEstimator::new(parse_function(function)?, b)?;
    println!("{}", est.estimate(x));
    Ok(())
}

fn cmd_bias_check(
    q_list: &str,
    b_list: &str,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let qs = parse_f64_list(q_list)?;
    let bs = parse_f64_list(b_list)?;
    let meta = Meta::new("bias-check")
        .with_seed(seed)
        .flag("q", q_list)
        .flag("b", b_list)
        .flag("n", n);
    let mut rows = Vec::new();
    for (i, (&q, &b)) in qs
        .iter()
        .flat_map(|q| bs.iter().map(move |b| (q, b)))
        .enumerate()
    {
        let mut rng = RngStream::new(seed, i as u64);
        let (mc_bias, mc_se) = plug_in_bias_mc(&SmoothFunction::abs(), q, b, n, &mut rng)?;
        rows.push(format!("{q},{b},{},{mc_bias},{mc_se}", plug_in_bias_abs(q, b)));
    }
    emit(out, &csv_document(&meta, "q,b,analytic_bias,mc_bias,mc_se", &rows))
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    function: &str,
    l: f64,
    k: usize,
    b: f64,
    prior_spec: &str,
    out: Option<&Path>,
    profile: Option<&Path>,
    profile_grid: Option<&str>,
) -> Result<()> {
    let problem = ExtensionProblem::new(parse_function(function)?, l, k, b, parse_prior(prior_spec)?)?;
    let solution = solve(&problem)?;
    let meta = Meta::new("optimize")
        .flag("function", function)
        .flag("L", l)
        .flag("k", k)
        .flag("b", b)
        .flag("prior", prior_spec);
    let doc = json!({
        "a": solution.g().coeffs(),
        "h": solution.h().coeffs(),
        "objective": solution.objective(),
        "grad_norm": solution.grad_norm(),
        "condition_estimate": solution.condition_estimate(),
        "least_norm_fallback": solution.least_norm_fallback(),
        "meta": meta.json(),
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")))?;

    if let Some(path) = profile {
        let grid = match profile_grid {
            Some(spec) => parse_grid(spec)?,
            None => (0..=20).map(|i| l + 5.0 * i as f64).collect(),
        };
        let mut rows = Vec::new();
        for &q in &grid {
            let e = solution.estimator_expectation(q)?;
            let v = solution.estimator_variance(q)?;
            rows.push(format!("{q},{e},{v}"));
        }
        write_atomic(path, &csv_document(&meta, "q,e_g,var_g", &rows))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mean_sweep(
    eps1: f64,
    eps2: f64,
    m: f64,
    k: usize,
    l: f64,
    n_spec: &str,
    prior_spec: Option<&str>,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<()> {
    let grid = parse_u64_range(n_spec)?;
    let n_hi = *grid.last().expect("nonempty range") as f64;
    let prior = match prior_spec {
        Some(spec) => parse_prior(spec)?,
        None => PriorMeasure::uniform(l, n_hi.max(l + 1.0))?,
    };
    let mu = MuParams::build(eps1, eps2, k, l, prior)?;
    let mss = MssParams::default_split(eps1, eps2)?;
    let rows = sd_sweep(&grid, m, &mu, &mss)?;
    let meta = Meta::new("mean-sweep")
        .flag("eps1", eps1)
        .flag("eps2", eps2)
        .flag("m", m)
        .flag("k", k)
        .flag("L", l)
        .flag("n", n_spec)
        .flag("beta", mss.beta())
        .flag("tau", mss.tau());
    emit(out, &sweep_csv(&meta, &rows))?;
    if let Some(path) = plot {
        write_atomic(path, &sweep_svg(&rows)?)?;
    }
    Ok(())
}

fn cmd_prdp_sum(
    records: &Path,
    k: u32,
    a: f64,
    b: f64,
    policy_c: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let io_err = |source| Error::Io { path: records.display().to_string(), source };
    let text = std::fs::read_to_string(records).map_err(io_err)?;
    let mut q = 0.0f64;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::Invalid(format!(
                "{}:{}: expected one number per row, got {line:?}",
                records.display(),
                lineno + 1
            ))
        })?;
        if !(v >= 0.0) {
            return Err(Error::Invalid(format!(
                "{}:{}: record values must be ≥ 0, got {v}",
                records.display(),
                lineno + 1
            )));
        }
        q += v;
    }

    let spec = TransformSpec::kth_root(k, a, b)?;
    let mut rng = RngStream::new(seed, 0);
    let release = transform_release(q, &spec, &mut rng)?;
    let policy_table: Vec<(f64, f64)> = parse_f64_list(policy_c)?
        .into_iter()
        .map(|c| Ok((c, policy(c, &spec)?)))
        .collect::<Result<_>>()?;
    let meta = Meta::new("prdp-sum")
        .with_seed(seed)
        .flag("records", records.display())
        .flag("k", k)
        .flag("a", a)
        .flag("b", b)
        .flag("policy_c", policy_c);
    let doc = json!({
        "S_tilde": release.s_tilde,
        "v_tilde": release.v_tilde,
        "policy_table": policy_table,
        "meta": meta.json(),
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")))
}

fn cmd_poly_debias(
    coeffs: &str,
    moments: &str,
    x: Option<f64>,
    json_mode: bool,
    out: Option<&Path>,
) -> Result<()> {
    let target = Polynomial::new(parse_f64_list(coeffs)?);
    let mu = parse_f64_list(moments)?;
    let g = debias_coeffs(&target, &mu)?;
    let condition = MomentMatrix::new(&mu)?.condition_estimate();
    let value = x.map(|x| g.eval(x));

    if json_mode || out.is_some() {
        let meta = Meta::new("poly-debias").flag("coeffs", coeffs).flag("moments", moments);
        let mut doc = json!({
            "a": g.coeffs(),
            "condition_estimate": condition,
            "meta": meta.json(),
        });
        if let Some(x) = x {
            doc["x"] = json!(x);
            doc["value"] = json!(value.expect("x given"));
        }
        emit(out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")))
    } else {
        println!("g coefficients: {:?}", g.coeffs());
        if let (Some(x), Some(v)) = (x, value) {
            println!("g({x}) = {v}");
        }
        Ok(())
    }
}

fn cmd_mc_check(
    function: &str,
    b: f64,
    q: f64,
    n: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let est = LaplaceEstimator::new(parse_function(function)?, b)?;
    let target = est.f().value_at(q);
    let st = crate::mc::mc_stats(n, seed, 0, move |rng| est.estimate(q + rng.laplace(b)));
    let z = (st.mean - target) / st.se;
    let pass = z.abs() <= 4.0;
    let verdict = if pass { "PASS" } else { "FAIL" };

    if let Some(path) = out {
        let meta = Meta::new("mc-check")
            .with_seed(seed)
            .flag("function", function)
            .flag("b", b)
            .flag("q", q)
            .flag("n", n);
        let doc = json!({
            "target": target,
            "mc_mean": st.mean,
            "mc_se": st.se,
            "z": z,
            "pass": pass,
            "meta": meta.json(),
        });
        write_atomic(path, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable")))?;
    }
    println!("target f(q) = {target}");
    println!("mc mean = {} (se {})", st.mean, st.se);
    println!("z = {z}");
    println!("verdict: {verdict} (4 SE rule, {n} draws, seed {seed})");
    Ok(())
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s} (pass --seed {s} to reproduce)");
            s
        }
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// `name` or `name:param`, e.g. `power:3`, `kth_root:2`, `cos:1.5`.
fn parse_function(spec: &str) -> Result<SmoothFunction> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let params: Vec<f64> = parts
        .map(|p| {
            p.parse().map_err(|_| {
                Error::Invalid(format!("bad function parameter {p:?} in {spec:?}"))
            })
        })
        .collect::<Result<_>>()?;
    builtin(name, &params)
}

fn parse_prior(spec: &str) -> Result<PriorMeasure> {
    let bad = |why: &str| Error::Invalid(format!("bad prior {spec:?}: {why}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| {
        bad("expected uniform:lo:hi, atom:q, or discrete:q1=w1,q2=w2,...")
    })?;
    match kind {
        "uniform" => {
            let (lo, hi) = rest
                .split_once(':')
                .ok_or_else(|| bad("uniform needs lo:hi"))?;
            PriorMeasure::uniform(
                lo.parse().map_err(|_| bad("lo is not a number"))?,
                hi.parse().map_err(|_| bad("hi is not a number"))?,
            )
        }
        "atom" => PriorMeasure::atom(rest.parse().map_err(|_| bad("atom needs a number"))?),
        "discrete" => {
            let points: Vec<(f64, f64)> = rest
                .split(',')
                .map(|pair| {
                    let (q, w) = pair.split_once('=').ok_or_else(|| bad("expected q=w pairs"))?;
                    Ok((
                        q.parse().map_err(|_| bad("point is not a number"))?,
                        w.parse().map_err(|_| bad("weight is not a number"))?,
                    ))
                })
                .collect::<Result<_>>()?;
            PriorMeasure::discrete(points)
        }
        other => Err(bad(&format!("unknown prior kind {other:?}"))),
    }
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = spec
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad number {p:?} in list {spec:?}")))
        })
        .collect::<Result<_>>()?;
    if vals.is_empty() {
        return Err(Error::Invalid("empty list".to_string()));
    }
    Ok(vals)
}

/// `lo:hi` inclusive.
fn parse_u64_range(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Invalid(format!("bad range {spec:?}: expected lo:hi with lo ≤ hi"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: u64 = lo.parse().map_err(|_| bad())?;
    let hi: u64 = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

/// `lo:hi:points` with points ≥ 2, endpoints included.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Invalid(format!("bad grid {spec:?}: expected lo:hi:points"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let points: usize = parts[2].parse().map_err(|_| bad())?;
    if points < 2 || !(hi > lo) {
        return Err(bad());
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}
