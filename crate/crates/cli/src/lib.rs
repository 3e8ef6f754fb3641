//! `harperlab` command-line driver.

pub mod cache;
pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use harperlab_core::contfrac::convergents;
use harperlab_core::dynamics::lyapunov_numeric;
use harperlab_core::fractal::{continuity_fit, convergent_fractions, dim_upper_estimate, thouless_scaling_table};
use harperlab_core::gauge::{ids_equality_check, isospectral_check, verify_all, AlphaSpec, Verdict};
use harperlab_core::model::Alpha;
use harperlab_core::spectral::{energy_grid, farey_fractions, ids, union_spectrum};
use harperlab_core::{BandSet, CfExpansion, Fraction};
use rayon::prelude::*;

use cache::{BandCache, CODE_VERSION};
use config::{
    parse_alpha, parse_alpha_spec, parse_cf, parse_fraction, parse_model, parse_range, write_artifact, ModelSpec,
    RunConfig, DEFAULT_CACHE_DIR,
};

#[derive(Debug, Parser)]
#[command(name = "harperlab", version, about = "Spectra and gauge checks for quasiperiodic Jacobi operators")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Band cache directory.
    #[arg(long, global = true, env = "HARPERLAB_CACHE_DIR", default_value = DEFAULT_CACHE_DIR)]
    pub cache_dir: PathBuf,
    /// Skip the band cache entirely.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "HARPERLAB_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Seed for Monte-Carlo phase averages.
    #[arg(long, global = true, env = "HARPERLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Artifact directory (bands/, tables/, plots/, reports/).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also emit SVG plots where available (needs --out).
    #[arg(long, global = true)]
    pub svg: bool,
    /// Suppress timestamps in emitted plots.
    #[arg(long, global = true)]
    pub reproducible: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continued-fraction coefficients and convergents.
    Cf {
        #[arg(long, value_parser = parse_cf)]
        alpha: CfExpansion,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Union spectrum over phases, one interval per line.
    Spectrum {
        #[arg(long, value_parser = parse_model)]
        model: ModelSpec,
        #[arg(long, value_parser = parse_fraction)]
        frac: Fraction,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Spectra for every reduced fraction up to a denominator.
    Butterfly {
        #[arg(long, value_parser = parse_model)]
        model: ModelSpec,
        #[arg(long)]
        qmax: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Integrated density of states on an energy grid.
    Ids {
        #[arg(long, value_parser = parse_model)]
        model: ModelSpec,
        #[arg(long, value_parser = parse_fraction)]
        frac: Fraction,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value_t = -4.2, allow_hyphen_values = true)]
        emin: f64,
        #[arg(long, default_value_t = 4.2, allow_hyphen_values = true)]
        emax: f64,
        #[arg(long, default_value_t = 64)]
        thetas: usize,
        #[arg(long, default_value_t = 16)]
        momenta: usize,
    },
    /// Lyapunov exponents averaged over seeded phases.
    Lyapunov {
        #[arg(long, value_parser = parse_model)]
        model: ModelSpec,
        #[arg(long, value_parser = parse_alpha)]
        alpha: Alpha,
        /// Energy; repeat for several.
        #[arg(long, required = true, allow_hyphen_values = true)]
        energy: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 40)]
        thetas: usize,
    },
    /// Exact check of the gauge relations.
    GaugeVerify {
        #[arg(long, default_value_t = 20)]
        krange: i64,
        #[arg(long, default_value_t = 20)]
        mrange: i64,
        #[arg(long, value_parser = parse_alpha_spec, default_value = "symbolic")]
        alpha: AlphaSpec,
    },
    /// Compares amo(1) at 2p/q with the shifted chiral model at p/q.
    ChiralCheck {
        #[arg(long, value_parser = parse_fraction)]
        frac: Fraction,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// `q |σ|` for amo(1) along convergents.
    Scaling {
        #[arg(long, value_parser = parse_cf, default_value = "golden")]
        alpha: CfExpansion,
        #[arg(long, default_value_t = 15)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Cover sums and box-counting slope along convergents.
    Dimension {
        #[arg(long, value_parser = parse_cf, default_value = "golden")]
        alpha: CfExpansion,
        #[arg(long, value_parser = parse_model, default_value = "amo:1")]
        model: ModelSpec,
        #[arg(long, default_value_t = 15)]
        nmax: usize,
        /// Smallest convergent index used.
        #[arg(long, default_value_t = 9)]
        nmin: usize,
        #[arg(long = "C", default_value_t = 2.0)]
        c: f64,
        #[arg(long, value_parser = parse_range, default_value = "0.5:0.8:0.05")]
        tgrid: Vec<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Fit of spectral deviation against frequency change.
    Continuity {
        #[arg(long, value_parser = parse_cf, default_value = "golden")]
        alpha: CfExpansion,
        #[arg(long, value_parser = parse_model, default_value = "chiral")]
        model: ModelSpec,
        #[arg(long, default_value_t = 6)]
        nmin: usize,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cf { .. } => "cf",
            Command::Spectrum { .. } => "spectrum",
            Command::Butterfly { .. } => "butterfly",
            Command::Ids { .. } => "ids",
            Command::Lyapunov { .. } => "lyapunov",
            Command::GaugeVerify { .. } => "gauge-verify",
            Command::ChiralCheck { .. } => "chiral-check",
            Command::Scaling { .. } => "scaling",
            Command::Dimension { .. } => "dimension",
            Command::Continuity { .. } => "continuity",
        }
    }
}

/// Output of one command: the stdout text, files to write under `--out`,
/// and whether a verification failed.
#[derive(Debug, Default)]
struct Report {
    stdout: String,
    files: Vec<(&'static str, String, String)>,
    failed: bool,
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 on computation or verification failure, 2 on usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = RunConfig {
        command: cli.command.name().to_string(),
        args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        cache_dir: (!cli.global.no_cache).then(|| cli.global.cache_dir.clone()),
        out_dir: cli.global.out.clone(),
        seed: cli.global.seed,
        workers: cli.global.workers,
        version: CODE_VERSION,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli, &config)) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
                return 1;
            }
            if let Some(dir) = &cli.global.out {
                for (sub, name, body) in &report.files {
                    if let Err(e) = write_artifact(dir, sub, name, body) {
                        eprintln!("error: writing {sub}/{name}: {e:#}");
                        return 1;
                    }
                }
            }
            if report.failed { 1 } else { 0 }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

struct Ctx<'a> {
    cache: Option<BandCache>,
    config: &'a RunConfig,
    stamp: Option<u64>,
}

impl Ctx<'_> {
    fn bands(&self, model: &ModelSpec, frac: Fraction, tol: f64) -> anyhow::Result<BandSet> {
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&model.label, frac, tol)) {
            return Ok(hit);
        }
        let bands = union_spectrum(&model.family()?, frac, tol).with_context(|| format!("spectrum at {frac}"))?;
        if let Some(c) = &self.cache {
            if let Err(e) = c.put(&model.label, model.lambda, frac, tol, &bands) {
                eprintln!("warning: cache write failed: {e:#}");
            }
        }
        Ok(bands)
    }

    fn csv_header(&self) -> String {
        format!("# {}\n", self.config.header_json())
    }
}

fn execute(cli: &Cli, config: &RunConfig) -> anyhow::Result<Report> {
    let ctx = Ctx {
        cache: (!cli.global.no_cache).then(|| BandCache::new(&cli.global.cache_dir)),
        config,
        stamp: (!cli.global.reproducible)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
    };
    let svg = cli.global.svg;
    let mut r = Report::default();
    match &cli.command {
        Command::Cf { alpha, depth } => {
            // one extra term gives ω for the last requested row when available
            let cs = convergents(alpha, depth + 1).or_else(|_| convergents(alpha, *depth))?;
            let mut s = String::from("n,a_n,p_n,q_n,omega_n\n");
            for c in cs.iter().take(*depth) {
                let omega = c.omega_f64().map(|w| format!("{w:e}")).unwrap_or_default();
                writeln!(s, "{},{},{},{},{}", c.n, c.a, c.p, c.q, omega)?;
            }
            r.files.push(("tables", "cf.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::Spectrum { model, frac, tol } => {
            let bands = ctx.bands(model, *frac, *tol)?;
            let s = jsonl_bands(&bands);
            let name = format!("{}_{}-{}.jsonl", sanitize(&model.label), frac.p, frac.q);
            r.files.push(("bands", name, format!("{{\"config\":{}}}\n{s}", config.header_json())));
            r.stdout = s;
        }
        Command::Butterfly { model, qmax, tol } => {
            let fracs = farey_fractions(*qmax);
            let results: Vec<(Fraction, Result<BandSet, String>)> = fracs
                .par_iter()
                .map(|f| (*f, ctx.bands(model, *f, *tol).map_err(|e| format!("{e:#}"))))
                .collect();
            let mut s = String::new();
            for (f, res) in &results {
                let line = match res {
                    Ok(b) => serde_json::json!({"p": f.p, "q": f.q, "bands": b.intervals()}),
                    Err(e) => serde_json::json!({"p": f.p, "q": f.q, "error": e}),
                };
                writeln!(s, "{line}")?;
            }
            if svg {
                let rows: Vec<(f64, Vec<[f64; 2]>)> = results
                    .iter()
                    .filter_map(|(f, res)| res.as_ref().ok().map(|b| (f.value(), b.intervals().to_vec())))
                    .collect();
                let (lo, hi) = rows
                    .iter()
                    .flat_map(|(_, b)| b.iter())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b[0]), hi.max(b[1])));
                let range = if lo < hi { (lo - 0.1, hi + 0.1) } else { (-4.5, 4.5) };
                let h = 1.0 / (2.0 * (*qmax as f64).powi(2));
                r.files.push(("plots", "butterfly.svg".into(), svg::butterfly(&rows, range, h, ctx.stamp)));
            }
            r.failed = results.iter().any(|(_, res)| res.is_err());
            r.files.push(("bands", "butterfly.jsonl".into(), format!("{{\"config\":{}}}\n{s}", config.header_json())));
            r.stdout = s;
        }
        Command::Ids { model, frac, grid, emin, emax, thetas, momenta } => {
            let energies = energy_grid(*emin, *emax, *grid);
            let sample = ids(&model.family()?, *frac, &energies, *thetas, *momenta)?;
            let mut s = String::from("E,N\n");
            for (e, n) in sample.energies.iter().zip(&sample.values) {
                writeln!(s, "{e},{n}")?;
            }
            r.files.push(("tables", format!("ids_{}-{}.csv", frac.p, frac.q), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::Lyapunov { model, alpha, energy, steps, thetas } => {
            let family = model.family()?;
            let mut s = String::from("E,L,stderr,n\n");
            for &e in energy {
                let est = lyapunov_numeric(&family, *alpha, e, *steps, *thetas, config.seed)?;
                writeln!(s, "{},{},{},{}", est.energy, est.lyapunov, est.stderr, est.steps)?;
            }
            r.files.push(("tables", "lyapunov.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::GaugeVerify { krange, mrange, alpha } => {
            let reports = verify_all(*krange, *mrange, *alpha);
            let mut s = String::from("relation,alpha,verdict,checked,skipped,failed\n");
            for rep in &reports {
                let verdict = match rep.verdict() {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Vacuous => "SKIP",
                };
                writeln!(s, "{},{},{},{},{},{}", rep.name, rep.alpha, verdict, rep.checked, rep.skipped, rep.failed)?;
                for w in &rep.witnesses {
                    eprintln!("{}: {} gives {} but {}", rep.name, w.state, w.lhs, w.rhs);
                }
            }
            r.failed = reports.iter().any(|rep| rep.verdict() == Verdict::Fail);
            r.files.push(("reports", "gauge.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::ChiralCheck { frac, tol, grid } => {
            let iso = isospectral_check(*frac, *tol)?;
            let energies = energy_grid(-4.2, 4.2, *grid);
            let idsq = ids_equality_check(*frac, &energies, 128, 32)?;
            let ids_ok = idsq.sup_deviation <= 1e-3;
            let mut s = String::from("check,fraction,doubled,value,threshold,verdict\n");
            let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
            writeln!(s, "spectrum,{},{},{:e},{:e},{}", iso.fraction, iso.doubled, iso.distance, 2.0 * tol, verdict(iso.passed()))?;
            writeln!(s, "ids,{},{},{:e},{:e},{}", idsq.fraction, idsq.doubled, idsq.sup_deviation, 1e-3, verdict(ids_ok))?;
            r.failed = !(iso.passed() && ids_ok);
            r.files.push(("reports", format!("chiral_{}-{}.csv", frac.p, frac.q), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::Scaling { alpha, nmax, tol } => {
            let table = thouless_scaling_table(alpha, *nmax, *tol)?;
            let mut s = String::from("n,p,q,measure,q_measure,reference\n");
            for row in &table.rows {
                writeln!(s, "{},{},{},{},{},{}", row.n, row.p, row.q, row.measure, row.scaled, table.reference)?;
            }
            if svg {
                let pts: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.q as f64, r.measure)).collect();
                r.files.push(("plots", "scaling.svg".into(), svg::loglog("q vs |sigma|", &[("measure", pts)], ctx.stamp)));
            }
            r.files.push(("tables", "scaling.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::Dimension { alpha, model, nmax, nmin, c, tgrid, tol } => {
            let fracs: Vec<Fraction> = convergent_fractions(alpha, *nmax)?
                .into_iter()
                .filter(|(n, f)| *n >= *nmin && f.q >= 2)
                .map(|(_, f)| f)
                .collect();
            let est = dim_upper_estimate(&model.family()?, &fracs, tgrid, *c, *tol)?;
            let mut s = String::from("t,q,delta,sum\n");
            for &t in &est.t_grid {
                for cv in &est.covers {
                    writeln!(s, "{t},{},{:e},{}", cv.q, cv.delta, cv.sum_at(t))?;
                }
            }
            let t_star = est.t_star.map(|t| t.to_string()).unwrap_or_else(|| "none".into());
            eprintln!("t_star = {t_star}, box slope = {:.6}", est.box_slope);
            let summary = serde_json::json!({"t_star": est.t_star, "box_slope": est.box_slope, "box_points": est.box_points});
            r.files.push(("reports", "dimension.json".into(), format!("{summary}\n")));
            if svg {
                let pts: Vec<(f64, f64)> = est.box_points.iter().map(|(x, y)| (x.exp(), y.exp())).collect();
                r.files.push(("plots", "dimension.svg".into(), svg::loglog("box counts", &[("N(delta)", pts)], ctx.stamp)));
            }
            r.files.push(("tables", "dimension.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
        Command::Continuity { alpha, model, nmin, nmax, tol } => {
            let fit = continuity_fit(&model.family()?, alpha, *nmin..=*nmax, *tol)?;
            let mut s = String::from("n,coarse,fine,delta_alpha,deviation\n");
            for row in &fit.rows {
                writeln!(s, "{},{},{},{:e},{:e}", row.n, row.coarse, row.fine, row.delta_alpha, row.deviation)?;
            }
            eprintln!("gamma = {:.4}, K = {:.4} (Holder baseline {})", fit.gamma, fit.k, fit.holder_baseline);
            let summary = serde_json::json!({"gamma": fit.gamma, "k": fit.k, "holder_baseline": fit.holder_baseline});
            r.files.push(("reports", "continuity.json".into(), format!("{summary}\n")));
            if svg {
                let pts: Vec<(f64, f64)> = fit.rows.iter().map(|r| (r.delta_alpha, r.deviation)).collect();
                r.files.push(("plots", "continuity.svg".into(), svg::loglog("deviation vs delta alpha", &[("d", pts)], ctx.stamp)));
            }
            r.files.push(("tables", "continuity.csv".into(), ctx.csv_header() + &s));
            r.stdout = s;
        }
    }
    Ok(r)
}

fn jsonl_bands(bands: &BandSet) -> String {
    bands.intervals().iter().map(|b| format!("[{:?},{:?}]\n", b[0], b[1])).collect()
}

fn sanitize(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}
