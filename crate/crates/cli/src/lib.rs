//! Command-line front end for `genexp-core`.

pub mod config;
mod fmt;
mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use genexp_core::{
    accumulate, build_shadow_params, classify_point, endpoint, is_g_bounded, partial_address, render_grid,
    trace_hair, verify_shadowing, write_grid_csv, write_ppm, write_trace_csv, AddressStatus, Complex64,
    ExternalAddress, GBoundedness, GenExpMap, GridJob, Verdict, Window,
};

use crate::config::{parse_config_fields, parse_mode, ConfigError, RunConfig};
use crate::fmt::sig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "genexp", version, about = "Generalised exponential maps: constants, hairs, basins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// certified | uncertified
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// x_min,x_max,y_min,y_max
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<String>,
    /// WIDTHxHEIGHT
    #[arg(long, global = true)]
    res: Option<String>,
    /// External address, e.g. "1,2|per:0,1"
    #[arg(long, global = true, allow_hyphen_values = true)]
    address: Option<String>,
    /// re,im
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,
    /// Accumulation depth
    #[arg(long, global = true)]
    p: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    levels: Option<usize>,
    #[arg(long, global = true)]
    x_max: Option<f64>,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check the map's hypotheses and sampled invariants
    Validate,
    /// Print the derived constants
    Constants,
    /// Classify one point
    Classify,
    /// Render the basin picture (PPM, or CSV for a .csv output)
    Render,
    /// Print the tract itinerary of a point
    Address,
    /// Trace a hair as CSV
    Hair,
    /// Compute a hair endpoint
    Endpoint,
    /// Decide g-boundedness of an address
    Admissible,
    /// Verify the shadowing squares of an address
    ShadowCheck,
    /// Compute an accumulation pair
    Accumulate,
}

/// Failure of a subcommand, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Validation(String, String),
    Runtime(String),
    /// The reader of stdout went away, as with `genexp ... | head`.
    ClosedOutput,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.code().into(), e.to_string())
    }
}

fn invalid(field: &str, message: impl std::fmt::Display) -> Failure {
    Failure::Validation("validation_error".into(), format!("{field}: {message}"))
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(Failure::Validation(code, msg)) => {
            let _ = writeln!(err, "error[{code}]: {msg}");
            EXIT_VALIDATION
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error[runtime_error]: {msg}");
            EXIT_RUNTIME
        }
        Err(Failure::ClosedOutput) => EXIT_OK,
    }
}

fn load(cli: &Cli) -> Result<(RunConfig, GenExpMap), Failure> {
    let path = cli.config.as_ref().ok_or_else(|| invalid("--config", "a configuration file is required"))?;
    let text = fs::read_to_string(path).map_err(|e| invalid("--config", format!("{}: {e}", path.display())))?;
    let mut config = parse_config_fields(&text)?;
    if let Some(mode) = &cli.mode {
        config.mode = parse_mode(mode)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let map = config.build_map()?;
    Ok((config, map))
}

fn parse_list<const N: usize>(field: &str, s: &str) -> Result<[f64; N], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(invalid(field, format!("expected {N} comma-separated numbers, got {s:?}")));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| invalid(field, format!("{p:?} is not a number")))?;
    }
    Ok(out)
}

fn parse_res(s: &str) -> Result<[usize; 2], Failure> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| invalid("--res", "expected WIDTHxHEIGHT"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid("--res", format!("{v:?} is not a count")));
    Ok([num(w)?, num(h)?])
}

struct Params<'a> {
    cli: &'a Cli,
    config: &'a RunConfig,
}

impl Params<'_> {
    fn max_iter(&self, default: usize) -> usize {
        self.cli.max_iter.or(self.config.run.max_iter).unwrap_or(default)
    }

    fn depth(&self, default: usize) -> usize {
        self.cli.depth.or(self.config.run.depth).unwrap_or(default)
    }

    fn window(&self) -> Result<Window, Failure> {
        let [x_min, x_max, y_min, y_max] = match &self.cli.window {
            Some(s) => parse_list::<4>("--window", s)?,
            None => self.config.run.window.unwrap_or([-4.0, 4.0, -4.0, 4.0]),
        };
        Ok(Window { x_min, x_max, y_min, y_max })
    }

    fn res(&self) -> Result<[usize; 2], Failure> {
        match &self.cli.res {
            Some(s) => parse_res(s),
            None => Ok(self.config.run.res.unwrap_or([512, 512])),
        }
    }

    fn address(&self) -> Result<ExternalAddress, Failure> {
        let s = self
            .cli
            .address
            .clone()
            .or_else(|| self.config.run.address.clone())
            .ok_or_else(|| invalid("--address", "an external address is required"))?;
        s.parse().map_err(|e| invalid("--address", e))
    }

    fn point(&self) -> Result<Complex64, Failure> {
        let [re, im] = match &self.cli.point {
            Some(s) => parse_list::<2>("--point", s)?,
            None => self.config.run.point.ok_or_else(|| invalid("--point", "a point re,im is required"))?,
        };
        Ok(Complex64::new(re, im))
    }

    fn out(&self) -> Option<PathBuf> {
        self.cli.out.clone().or_else(|| self.config.run.out.clone().map(PathBuf::from))
    }

    fn p(&self) -> usize {
        self.cli.p.or(self.config.run.p).unwrap_or(1)
    }

    fn tol(&self) -> f64 {
        self.cli.tol.or(self.config.run.tol).unwrap_or(1e-10)
    }

    fn t_max(&self) -> f64 {
        self.cli.t_max.or(self.config.run.t_max).unwrap_or(10.0)
    }

    fn samples(&self) -> usize {
        self.cli.samples.or(self.config.run.samples).unwrap_or(101)
    }

    fn levels(&self) -> usize {
        self.cli.levels.or(self.config.run.levels).unwrap_or(6)
    }

    fn x_max(&self, addr: &ExternalAddress) -> f64 {
        self.cli
            .x_max
            .or(self.config.run.x_max)
            .unwrap_or(2.0 * std::f64::consts::PI * addr.sup() as f64 + 100.0)
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let (config, map) = load(cli)?;
    let params = Params { cli, config: &config };
    let io = |e: std::io::Error| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Failure::ClosedOutput,
        _ => runtime(e),
    };
    if !map.is_certified() {
        writeln!(out, "stamp = uncertified").map_err(io)?;
    }
    match cli.command {
        Command::Validate => {
            let report = validate::run_checks(&map, config.seed);
            for line in &report.lines {
                writeln!(out, "{line}").map_err(io)?;
            }
            if report.all_passed {
                Ok(EXIT_OK)
            } else {
                Err(Failure::Validation("property_failed".into(), "one or more checks failed".into()))
            }
        }
        Command::Constants => {
            print_constants(&map, out).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Classify => {
            let z = params.point()?;
            let n = params.max_iter(100);
            let c = classify_point(&map, z, n);
            match c.verdict {
                Verdict::AttractedCertified { step } => {
                    writeln!(out, "verdict = attracted\nstep = {step}").map_err(io)?;
                    writeln!(out, "entry_re = {}", sig(c.entry_re.unwrap_or(f64::NAN))).map_err(io)?;
                }
                Verdict::JCandidate { iterations } => {
                    writeln!(out, "verdict = j_candidate\niterations = {iterations}").map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Render => {
            let [width, height] = params.res()?;
            let job = GridJob { window: params.window()?, width, height, max_iter: params.max_iter(50) };
            job.validate().map_err(|e| invalid("render", e))?;
            let path = params.out().ok_or_else(|| invalid("--out", "an output path is required"))?;
            let grid = render_grid(&map, &job).map_err(runtime)?;
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                let f = fs::File::create(&path).map_err(io)?;
                write_grid_csv(&grid, std::io::BufWriter::new(f)).map_err(runtime)?;
            } else {
                write_ppm(&grid, &path).map_err(runtime)?;
            }
            writeln!(out, "pixels = {}", grid.cells.len()).map_err(io)?;
            writeln!(out, "j_candidates = {}", grid.j_candidates()).map_err(io)?;
            writeln!(out, "written = {}", path.display()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Address => {
            let z = params.point()?;
            let pa = partial_address(&map, z, params.depth(10));
            let entries: Vec<String> = pa.entries.iter().map(i64::to_string).collect();
            writeln!(out, "entries = {}", entries.join(",")).map_err(io)?;
            let status = match pa.status {
                AddressStatus::AllInTracts => "all_in_tracts".to_string(),
                AddressStatus::LeftTractAt(n) => format!("left_tract_at {n}"),
                AddressStatus::PrecisionLost(n) => format!("precision_lost_at {n}"),
            };
            writeln!(out, "status = {status}").map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Hair => {
            let addr = params.address()?;
            let trace = trace_hair(&map, &addr, params.depth(20), params.t_max(), params.samples())
                .map_err(runtime)?;
            match params.out() {
                Some(path) => {
                    let f = fs::File::create(&path).map_err(io)?;
                    write_trace_csv(&trace, std::io::BufWriter::new(f)).map_err(runtime)?;
                    writeln!(out, "samples = {}", trace.samples.len()).map_err(io)?;
                    writeln!(out, "cauchy_gap = {}", sig(trace.cauchy_gap)).map_err(io)?;
                    writeln!(out, "written = {}", path.display()).map_err(io)?;
                }
                None => write_trace_csv(&trace, &mut *out).map_err(runtime)?,
            }
            Ok(EXIT_OK)
        }
        Command::Endpoint => {
            let addr = params.address()?;
            let e = endpoint(&map, &addr, params.tol()).map_err(runtime)?;
            writeln!(out, "address = {addr}").map_err(io)?;
            writeln!(out, "re = {}\nim = {}", sig(e.z.re), sig(e.z.im)).map_err(io)?;
            writeln!(out, "error_bound = {}", sig(e.error_bound)).map_err(io)?;
            writeln!(out, "levels = {}", e.levels).map_err(io)?;
            writeln!(out, "anchor = {}", sig(e.anchor.re)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Admissible => {
            let addr = params.address()?;
            let x_max = params.x_max(&addr);
            writeln!(out, "address = {addr}").map_err(io)?;
            match is_g_bounded(&map, &addr, params.depth(20), x_max) {
                GBoundedness::Bounded { witness } => {
                    writeln!(out, "g_bounded = true\nwitness = {}", sig(witness)).map_err(io)?
                }
                GBoundedness::Inconclusive => {
                    writeln!(out, "g_bounded = inconclusive\nx_max = {}", sig(x_max)).map_err(io)?
                }
            }
            Ok(EXIT_OK)
        }
        Command::ShadowCheck => {
            let addr = params.address()?;
            let levels = params.levels();
            let sp = build_shadow_params(&map, &addr, levels).map_err(runtime)?;
            writeln!(out, "kappa = {}\ndelta = {}", sig(sp.kappa), sig(sp.delta)).map_err(io)?;
            writeln!(out, "x0_pp = {}\nr0 = {}", sig(sp.x0_pp), sig(sp.r0)).map_err(io)?;
            for r in verify_shadowing(&map, &sp, levels) {
                writeln!(
                    out,
                    "level {} pullback_contained = {} annulus_contains = {} outside_h = {}",
                    r.level, r.pullback_contained, r.annulus_contains, r.outside_h
                )
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Accumulate => {
            let z0 = params.point()?;
            let p = params.p();
            let acc = accumulate(&map, z0, p).map_err(runtime)?;
            let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            writeln!(out, "z_minus = {} {}", sig(acc.z_minus.re), sig(acc.z_minus.im)).map_err(io)?;
            writeln!(out, "z_plus = {} {}", sig(acc.z_plus.re), sig(acc.z_plus.im)).map_err(io)?;
            writeln!(out, "base_entries = {}", join(&acc.base_entries)).map_err(io)?;
            writeln!(out, "minus_entries = {}", join(&acc.minus_entries)).map_err(io)?;
            writeln!(out, "plus_entries = {}", join(&acc.plus_entries)).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn print_constants(map: &GenExpMap, out: &mut dyn Write) -> std::io::Result<()> {
    let k = map.constants();
    let mode = if map.is_certified() { "certified" } else { "uncertified" };
    writeln!(out, "mode = {mode}")?;
    for (name, v) in [
        ("a", map.a()),
        ("h_min", k.h_min),
        ("lip_upper", k.lip),
        ("lip_lower", map.curve().lip_lower()),
        ("c_h", k.c_h),
        ("c", k.c),
        ("mu", k.mu),
        ("M", k.big_m),
        ("m", k.small_m),
        ("a_min", k.a_min),
    ] {
        writeln!(out, "{name} = {}", sig(v))?;
    }
    match k.xi {
        Some(xi) => writeln!(out, "xi_re = {}\nxi_im = {}", sig(xi.re), sig(xi.im))?,
        None => writeln!(out, "xi_re = none\nxi_im = none")?,
    }
    match k.k {
        Some(v) => writeln!(out, "K = {}", sig(v))?,
        None => writeln!(out, "K = none")?,
    }
    Ok(())
}
