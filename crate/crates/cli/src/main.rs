use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bergman_core::config::TorusConfig;
use bergman_core::cylinder::{rho_cyl_direct, rho_cyl_nd, rho_cyl_nd_direct, rho_cyl_poisson, CylinderParams};
use bergman_core::extrema::{self, compare_bundles, find_extrema_with, ExtremaOptions, Verdict};
use bergman_core::holonomy::{hol_closed, hol_ode};
use bergman_core::kernel::{fmt17, offdiag_bound, rho_diag, rho_grid};
use bergman_core::theta::ThetaOracle;
use bergman_core::{Error, Execution, PolarizedTorus, Semicharacter};
use clap::{Parser, Subcommand};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "bergman", version, about = "Bergman kernel densities of polarized complex tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Torus/bundle description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tensor power; overrides the config.
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Bound on the omitted part of the loop series.
    #[arg(long, global = true, default_value_t = 1e-12)]
    eps: f64,
    /// Grid resolution per lattice coordinate.
    #[arg(long, global = true)]
    res: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Point in lattice coordinates, `x1,...,x2n`.
    #[arg(long, global = true)]
    point: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the polarization and print lattice invariants.
    Validate,
    /// Density at `--point`.
    Rho,
    /// Density on the full lattice-coordinate grid (CSV).
    Grid,
    /// Loop series against the theta-function oracle, n = 1 (CSV).
    Oracle {
        #[arg(long, default_value_t = 128)]
        quad_res: usize,
    },
    /// Compare the densities of two semicharacters.
    Compare {
        /// Phases of the second semicharacter, comma separated.
        #[arg(long)]
        chi2: String,
    },
    /// Twisted cylinder density, series against Poisson form (CSV).
    Cylinder {
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        n_dim: usize,
    },
    /// Global extrema and their predicted locations; with `--k-range`, the
    /// localization table instead (CSV).
    Extrema {
        #[arg(long, default_value_t = 200)]
        refine_iters: usize,
        /// Inclusive range `a..b` or list `a,b,c`.
        #[arg(long)]
        k_range: Option<String>,
    },
    /// Recover a loop holonomy from the push-forward of the density.
    Rigidity {
        /// Primitive lattice vector, comma separated coordinates.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Off-diagonal bound between `--point` and `--point2`.
    Offdiag {
        #[arg(long)]
        point2: String,
    },
    /// Holonomy along the loop `--vector` based at `--point`.
    Hol {
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Run<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Error::InvalidArgument(format!("cannot parse {what} entry {s:?}")).into()))
        .collect()
}

fn parse_k_range(text: &str) -> Run<Vec<u32>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad k range {text:?}")))?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| Error::InvalidArgument(format!("bad k range {text:?}")))?;
        if a == 0 || b < a {
            return Err(Error::InvalidArgument(format!("bad k range {text:?}")).into());
        }
        Ok((a..=b).collect())
    } else {
        parse_list(text, "k")
    }
}

struct Context {
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: u32,
}

impl Cli {
    fn context(&self) -> Run<Context> {
        let path = self.config.as_ref().ok_or_else(|| Error::ConfigParseError("--config is required for this command".into()))?;
        let cfg = TorusConfig::from_path(path)?;
        let torus = cfg.torus()?;
        let chi = cfg.semicharacter()?;
        let k = self.k.unwrap_or_else(|| cfg.k());
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()).into());
        }
        Ok(Context { torus, chi, k })
    }

    fn point(&self, torus: &PolarizedTorus, text: Option<&str>, flag: &str) -> Run<Vec<f64>> {
        let text = text.ok_or_else(|| Error::InvalidArgument(format!("{flag} is required")))?;
        let p: Vec<f64> = parse_list(text, "point")?;
        if p.len() != torus.rank() || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("{flag} needs {} finite coordinates", torus.rank())).into());
        }
        Ok(p)
    }

    fn vector(&self, torus: &PolarizedTorus, text: &str) -> Run<Vec<i64>> {
        let v: Vec<i64> = parse_list(text, "vector")?;
        if v.len() != torus.rank() {
            return Err(Error::InvalidArgument(format!("--vector needs {} integer coordinates", torus.rank())).into());
        }
        Ok(v)
    }

    fn res(&self, default: usize) -> Run<usize> {
        let r = self.res.unwrap_or(default);
        if r < 2 {
            return Err(Error::InvalidArgument(format!("res must be >= 2, got {r}")).into());
        }
        Ok(r)
    }

    fn emit(&self, text: &str) -> Run<()> {
        match &self.out {
            Some(p) => fs::write(p, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn format_point(p: &[f64]) -> String {
    p.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(",")
}

fn run(cli: &Cli) -> Run<()> {
    if cli.eps.is_nan() || cli.eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {}", cli.eps)).into());
    }
    let exec = Execution::Parallel;
    let mut out = String::new();
    match &cli.command {
        Command::Validate => {
            let ctx = cli.context()?;
            let t = &ctx.torus;
            let r = t.report();
            let sh = t.shells();
            writeln!(out, "valid = true").unwrap();
            writeln!(out, "n = {}", r.n).unwrap();
            writeln!(out, "pfaffian_abs = {}", r.pfaffian_abs.map_or("none".into(), |p| p.to_string())).unwrap();
            writeln!(out, "min_eigenvalue = {}", fmt17(r.min_eigenvalue)).unwrap();
            writeln!(out, "integrality_residual = {}", fmt17(r.integrality_residual)).unwrap();
            for (i, row) in t.riemann().iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
                writeln!(out, "E[{i}] = {}", cells.join(",")).unwrap();
            }
            writeln!(out, "l1 = {}", fmt17(sh.l1)).unwrap();
            writeln!(out, "l2 = {}", fmt17(sh.l2)).unwrap();
            writeln!(out, "s1_count = {}", sh.s1.len()).unwrap();
            writeln!(out, "volume = {}", fmt17(t.volume())).unwrap();
        }
        Command::Rho => {
            let ctx = cli.context()?;
            let p = cli.point(&ctx.torus, cli.point.as_deref(), "--point")?;
            let r = rho_diag(&ctx.torus, &ctx.chi, ctx.k, &ctx.torus.point_from_coords(&p), cli.eps)?;
            let pre = bergman_core::kernel::prefactor(ctx.torus.n(), ctx.k);
            writeln!(out, "rho = {}", fmt17(r.value)).unwrap();
            writeln!(out, "two_pi_rho = {}", fmt17(2.0 * PI * r.value)).unwrap();
            writeln!(out, "tail = {}", fmt17(r.enclosure(pre))).unwrap();
            writeln!(out, "radius = {}", fmt17(r.radius)).unwrap();
            writeln!(out, "terms = {}", r.terms).unwrap();
        }
        Command::Grid => {
            let ctx = cli.context()?;
            let g = rho_grid(&ctx.torus, &ctx.chi, ctx.k, cli.res(32)?, cli.eps, exec)?;
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            out = String::from_utf8(buf).expect("ascii csv");
        }
        Command::Oracle { quad_res } => {
            let ctx = cli.context()?;
            let oracle = ThetaOracle::with_res(&ctx.torus, &ctx.chi, ctx.k, *quad_res, exec)?;
            let series = bergman_core::kernel::KernelSeries::new(&ctx.torus, &ctx.chi, ctx.k, cli.eps)?;
            let res = cli.res(16)?;
            writeln!(out, "x1,x2,rho_exact,rho_oracle,absdiff").unwrap();
            for i in 0..res {
                for j in 0..res {
                    let p = [i as f64 / res as f64, j as f64 / res as f64];
                    let a = series.value(&p);
                    let b = oracle.rho(&p);
                    writeln!(out, "{},{},{},{},{}", fmt17(p[0]), fmt17(p[1]), fmt17(a), fmt17(b), fmt17((a - b).abs())).unwrap();
                }
            }
        }
        Command::Compare { chi2 } => {
            let ctx = cli.context()?;
            let phases: Vec<f64> = parse_list(chi2, "chi2")?;
            if phases.len() != ctx.torus.rank() {
                return Err(Error::Shape(format!("--chi2 needs {} phases", ctx.torus.rank())).into());
            }
            let chi2 = Semicharacter::new(phases);
            let c = compare_bundles(&ctx.torus, &ctx.chi, &chi2, ctx.k, cli.res(16)?, exec)?;
            let verdict = match c.verdict {
                Verdict::IsomorphicPower => "isomorphic_power",
                Verdict::Distinct => "distinct",
            };
            writeln!(out, "verdict = {verdict}").unwrap();
            writeln!(out, "max_diff = {}", fmt17(c.max_diff)).unwrap();
            writeln!(out, "threshold = {}", fmt17(c.threshold)).unwrap();
            if let Some(w) = &c.witness {
                writeln!(out, "witness = {}", format_point(w)).unwrap();
                writeln!(out, "two_pi_diff = {}", fmt17(2.0 * PI * c.max_diff)).unwrap();
            }
            for (i, (a, b)) in c.phases.iter().enumerate() {
                writeln!(out, "phase[{i}] = {},{}", fmt17(*a), fmt17(*b)).unwrap();
            }
        }
        Command::Cylinder { eta, alpha, t_min, t_max, steps, n_dim } => {
            let k = cli.k.unwrap_or(1);
            if *steps < 1 || t_max.is_nan() || t_min.is_nan() || t_max < t_min {
                return Err(Error::InvalidArgument("need steps >= 1 and t_max >= t_min".into()).into());
            }
            writeln!(out, "t,rho_direct,rho_poisson,absdiff").unwrap();
            for i in 0..*steps {
                let t = if *steps == 1 { *t_min } else { t_min + (t_max - t_min) * i as f64 / (*steps - 1) as f64 };
                let p = CylinderParams::with_dim(*eta, *alpha, k, t, *n_dim)?;
                let (d, q) = if *n_dim == 1 {
                    (rho_cyl_direct(&p), rho_cyl_poisson(&p))
                } else {
                    (rho_cyl_nd_direct(&p, &vec![Complex64::new(0.0, 0.0); n_dim - 1]), rho_cyl_nd(&p))
                };
                writeln!(out, "{},{},{},{}", fmt17(t), fmt17(d), fmt17(q), fmt17((d - q).abs())).unwrap();
            }
        }
        Command::Extrema { refine_iters, k_range } => {
            let ctx = cli.context()?;
            if let Some(range) = k_range {
                let ks = parse_k_range(range)?;
                let rows = extrema::localization_sweep_with(&ctx.torus, &ctx.chi, &ks, exec)?;
                writeln!(out, "k,dist,bound,ratio").unwrap();
                for r in rows {
                    writeln!(out, "{},{},{},{}", r.k, fmt17(r.dist), fmt17(r.bound), fmt17(r.ratio)).unwrap();
                }
            } else {
                let opts = ExtremaOptions { res: cli.res(32)?, refine_iters: *refine_iters, exec, ..ExtremaOptions::default() };
                let r = find_extrema_with(&ctx.torus, &ctx.chi, ctx.k, &opts)?;
                writeln!(out, "k = {}", r.k).unwrap();
                writeln!(out, "s1_pairs_independent = {}", r.s1_pairs_independent).unwrap();
                for (name, list) in [("max", &r.maxima), ("min", &r.minima)] {
                    for e in list {
                        writeln!(
                            out,
                            "{name} location = {} value = {} enclosure = {} predicted = {} distance = {} radius_bound = {}",
                            format_point(&e.location.coords),
                            fmt17(e.value),
                            fmt17(e.enclosure),
                            format_point(&e.predicted.coords),
                            fmt17(e.distance),
                            fmt17(e.radius_bound)
                        )
                        .unwrap();
                    }
                }
            }
        }
        Command::Rigidity { vector, samples } => {
            let ctx = cli.context()?;
            let v = cli.vector(&ctx.torus, vector)?;
            let base = match &cli.point {
                Some(_) => cli.point(&ctx.torus, cli.point.as_deref(), "--point")?,
                None => vec![0.0; ctx.torus.rank()],
            };
            let f = extrema::pushforward_fit(&ctx.torus, &ctx.chi, ctx.k, &v, *samples, &base, exec)?;
            writeln!(out, "phase = {}", fmt17(f.phase)).unwrap();
            writeln!(out, "closed_form_phase = {}", fmt17(f.closed_form_phase)).unwrap();
            writeln!(out, "lambda = {}", f.lambda).unwrap();
            writeln!(out, "amplitude = {}", fmt17(f.amplitude)).unwrap();
            writeln!(out, "expected_amplitude = {}", fmt17(f.expected_amplitude)).unwrap();
            writeln!(out, "fiber_volume = {}", fmt17(f.nu)).unwrap();
            writeln!(out, "residual = {}", fmt17(f.residual)).unwrap();
        }
        Command::Offdiag { point2 } => {
            let ctx = cli.context()?;
            let t = &ctx.torus;
            let x = cli.point(t, cli.point.as_deref(), "--point")?;
            let y = cli.point(t, Some(point2), "--point2")?;
            let b = offdiag_bound(t, ctx.k, &t.point_from_coords(&x), &t.point_from_coords(&y), cli.eps)?;
            let pre = bergman_core::kernel::prefactor(t.n(), ctx.k);
            writeln!(out, "bound = {}", fmt17(b.value)).unwrap();
            writeln!(out, "tail = {}", fmt17(b.enclosure(pre))).unwrap();
            if t.n() == 1 {
                let oracle = ThetaOracle::with_res(t, &ctx.chi, ctx.k, 128, exec)?;
                writeln!(out, "oracle = {}", fmt17(oracle.offdiag(&x, &y))).unwrap();
            }
        }
        Command::Hol { vector, steps } => {
            let ctx = cli.context()?;
            let t = &ctx.torus;
            let p = t.point_from_coords(&cli.point(t, cli.point.as_deref(), "--point")?);
            let v = cli.vector(t, vector)?;
            let c = hol_closed(t, &ctx.chi, ctx.k, &p, &v);
            let o = hol_ode(t, &ctx.chi, ctx.k, &p, &v, *steps)?;
            writeln!(out, "closed = {},{}", fmt17(c.value.re), fmt17(c.value.im)).unwrap();
            writeln!(out, "ode = {},{}", fmt17(o.value.re), fmt17(o.value.im)).unwrap();
            writeln!(out, "alpha = {}", fmt17(c.alpha)).unwrap();
            writeln!(out, "absdiff = {}", fmt17((c.value - o.value).norm())).unwrap();
        }
    }
    cli.emit(&out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("InvalidArgument: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("Io: {e}");
            ExitCode::from(2)
        }
    }
}
