mod parse;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hecke_core::arch::{self, ArchParams, Field, ProbeConfig, Which};
use hecke_core::kostka::DiskCache;
use hecke_core::lseries::{FourierInput, Status, VerifyReport};
use hecke_core::root_datum::RootDatumJson;
use hecke_core::{CartanLabel, Context, Error, Graded, RepSpec, RootDatum};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hecke", version, about = "Spherical Hecke algebras, basic functions and rho-Fourier kernels")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Preset group: gl1..gl4, or A1..A4, B2..B4, C2..C4, D3, D4, G2 (times a central Gm)
    #[arg(long, global = true, default_value = "gl2", conflicts_with = "datum")]
    group: String,
    /// Root datum JSON file, instead of a preset
    #[arg(long, global = true)]
    datum: Option<PathBuf>,
    /// Highest weight of rho: `std` or comma-separated integers
    #[arg(long, global = true, default_value = "std")]
    rho: String,
    /// Grade cap
    #[arg(long = "N", global = true, default_value_t = 4)]
    n: i64,
    /// Specialize X at the half-integer s (e.g. -1/2)
    #[arg(long, global = true, allow_hyphen_values = true)]
    specialize: Option<String>,
    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory of the on-disk Kostka cache
    #[arg(long, global = true, env = "HECKE_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Do not read or write the on-disk cache
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Basic function of rho on grades 0..N
    Basic,
    /// Kostka-Foulkes polynomial K_{lambda,mu}(q)
    Kostka {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
    /// Satake transform of a cell or element, or inverse Satake of a character
    Satake {
        /// Cell weight or element JSON file
        #[arg(allow_hyphen_values = true)]
        input: String,
        /// Treat the input weight as a character and invert
        #[arg(long)]
        inverse: bool,
    },
    /// Convolution of two elements (cell weights or element JSON files)
    Convolve {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Fourier kernel with s kept in X, exact on grades <= N
    Kernel,
    /// Fourier transform of a finitely supported element on grades <= N
    Fourier {
        #[arg(allow_hyphen_values = true)]
        input: String,
    },
    Verify {
        #[arg(value_enum)]
        which: VerifyKind,
    },
    /// Z/L as a finite X-Laurent polynomial, and optionally its value
    Zeta {
        /// Cell weight or element JSON file; defaults to the identity
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        /// Satake parameter, comma-separated complex numbers
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        s: String,
    },
    Arch {
        #[command(subcommand)]
        cmd: ArchCmd,
    },
    /// Irreducible decomposition of Sym^k rho, wedge^k rho or V(a) x V(b)
    Decomp {
        #[arg(long, conflicts_with_all = ["ext", "tensor"])]
        sym: Option<usize>,
        #[arg(long, conflicts_with = "tensor")]
        ext: Option<usize>,
        /// Two highest weights separated by ':'
        #[arg(long, allow_hyphen_values = true)]
        tensor: Option<String>,
    },
    Cache {
        #[command(subcommand)]
        cmd: CacheCmd,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyKind {
    FixedPoint,
    Unitarity,
    GjStandard,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Basic,
    Kernel,
}

#[derive(Args)]
struct SpectralArgs {
    /// Spectral parameter, comma-separated complex numbers
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    field: FieldArg,
}

#[derive(Subcommand)]
enum ArchCmd {
    Lfactor(SpectralArgs),
    Gamma(SpectralArgs),
    /// |Gamma(x+iy)| over the Stirling form
    Stirling {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Gamma^(n)(z) / (Gamma(z) log(z)^n)
    Derivative {
        #[arg(long = "n")]
        order: u32,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    Threshold {
        #[arg(long)]
        p: String,
        #[arg(long, value_enum, default_value_t = WhichArg::Basic)]
        which: WhichArg,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
    },
    Crho,
    Probe {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 0)]
        t: i32,
        #[arg(long, default_value_t = 60.0)]
        radius: f64,
        #[arg(long, default_value_t = 12)]
        shells: usize,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
    },
}

#[derive(Subcommand)]
enum CacheCmd {
    Stats,
    Clear,
    /// Write the cache as line-JSON to a file or stdout
    Export {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Import {
        file: PathBuf,
    },
}

/// Exit 1 is reserved for a verification mismatch.
enum Failure {
    Mismatch,
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Invalid(e.to_string())
    }
}

type Out = std::result::Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (out, code) = match run(&cli) {
        Ok(s) => (s, 0),
        Err(Failure::Mismatch) => (String::new(), 1),
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            (String::new(), 2)
        }
    };
    // a mismatch prints its report before failing
    let out = if code == 1 { MISMATCH_OUT.with(|m| m.take()) } else { out };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    ExitCode::from(code)
}

thread_local! {
    static MISMATCH_OUT: std::cell::RefCell<String> = const { std::cell::RefCell::new(String::new()) };
}

fn datum(g: &Global) -> Result<RootDatum, Error> {
    match &g.datum {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let j: RootDatumJson = serde_json::from_str(&text)?;
            RootDatum::from_json(&j)
        }
        None => RootDatum::preset(g.group.parse::<CartanLabel>()?),
    }
}

fn context(g: &Global) -> Result<Context, Error> {
    let ctx = Context::new(datum(g)?);
    match (&g.cache_dir, g.no_cache) {
        (Some(dir), false) => ctx.with_cache_dir(dir),
        _ => Ok(ctx),
    }
}

fn rho(ctx: &Context, g: &Global) -> Result<RepSpec, Error> {
    let rd = ctx.rd();
    let m = rd.rank();
    let hw = if g.rho == "std" {
        let mut v = hecke_core::WeightVec::unit(m, 0);
        if !matches!(rd.label(), CartanLabel::GL(_)) {
            // first fundamental weight in central degree one
            v.0[m - 1] += 1;
        }
        v
    } else {
        parse::weight(&g.rho)?
    };
    if hw.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: hw.len() });
    }
    ctx.rep(&hw)
}

/// `rho` after the torus-level validation; a failure prints the report.
fn valid_rho(ctx: &Context, g: &Global) -> Result<RepSpec, Failure> {
    let r = rho(ctx, g)?;
    let report = ctx.rd().validate_rho(&r);
    if !report.passed {
        let text = serde_json::to_string_pretty(&report).expect("report");
        return Err(Failure::Invalid(format!("representation failed validation\n{text}")));
    }
    Ok(r)
}

fn specialize<B: hecke_core::satake::BasisKind>(g: &Global, e: Graded<B>) -> Result<Graded<B>, Failure> {
    Ok(match &g.specialize {
        Some(s) => e.specialize(parse::half_integer(s)?),
        None => e,
    })
}

fn emit_element<B: hecke_core::satake::BasisKind>(g: &Global, header: Value, e: &Graded<B>) -> String {
    match g.format {
        Format::Json => {
            let mut v = header;
            v["element"] = e.to_json();
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        _ => {
            let mut s = String::new();
            if let Value::Object(m) = &header {
                let parts: Vec<String> = m
                    .iter()
                    .map(|(k, v)| match v {
                        Value::String(x) => format!("{k}={x}"),
                        x => format!("{k}={x}"),
                    })
                    .collect();
                s.push_str(&format!("# {}\n", parts.join(" ")));
            }
            s.push_str(&e.to_string());
            s
        }
    }
}

fn header(ctx: &Context, g: &Global, verb: &str) -> Value {
    let mut h = json!({"verb": verb, "group": ctx.rd().label().to_string()});
    if let Some(s) = &g.specialize {
        h["s"] = json!(s);
    }
    h
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn fmt_c(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{:.15e}+{:.15e}i", z.re, z.im)
    } else {
        format!("{:.15e}-{:.15e}i", z.re, -z.im)
    }
}

fn run(cli: &Cli) -> Out {
    let g = &cli.global;
    if g.n < 0 {
        return Err(Failure::Invalid(format!("--N must be nonnegative, got {}", g.n)));
    }
    match &cli.cmd {
        Cmd::Cache { cmd } => return cache(g, cmd),
        Cmd::Arch { cmd } => {
            if let ArchCmd::Stirling { x, y } = cmd {
                let r = arch::stirling_ratio(*x, *y)?;
                return Ok(match g.format {
                    Format::Json => format!("{}\n", json!({"x": x, "y": y, "ratio": r})),
                    _ => format!("{r:.15e}\n"),
                });
            }
            if let ArchCmd::Derivative { order, z } = cmd {
                let r = arch::derivative_ratio(*order, parse::complex(z)?)?;
                return Ok(match g.format {
                    Format::Json => format!("{}\n", json!({"n": order, "z": z, "ratio": cplx(r)})),
                    _ => format!("{}\n", fmt_c(r)),
                });
            }
        }
        _ => {}
    }
    let ctx = context(g)?;
    let rd = ctx.rd();
    let grade = |mu: &hecke_core::WeightVec| rd.sigma_grade(mu);
    match &cli.cmd {
        Cmd::Basic => {
            let r = valid_rho(&ctx, g)?;
            let b = ctx.basic_function(&r, g.n)?;
            let mut h = header(&ctx, g, "basic");
            h["rho"] = json!(r.highest_weight.to_string());
            h["N"] = json!(g.n);
            h["l"] = json!(b.l);
            let e = specialize(g, b.element)?;
            if g.format == Format::Json {
                let coeffs: Vec<Value> = b
                    .coeffs
                    .iter()
                    .rev()
                    .map(|(mu, c)| json!({"mu": mu, "c": c.to_string(), "qpoly": c.to_json()}))
                    .collect();
                h["coeffs"] = Value::Array(coeffs);
            }
            Ok(emit_element(g, h, &e))
        }
        Cmd::Kostka { lambda, mu } => {
            let (l, m) = (parse::weight(lambda)?, parse::weight(mu)?);
            let p = ctx.lusztig_q_analogue(&l, &m)?;
            Ok(match g.format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "group": rd.label().to_string(), "lambda": l, "mu": m,
                        "kostka": p.to_string(), "qpoly": p.to_json(),
                    }))
                    .expect("json")
                ),
                _ => format!("{p}\n"),
            })
        }
        Cmd::Satake { input, inverse } => {
            if *inverse {
                let lam = parse::weight(input)?;
                let chi = ctx.character(&lam, hecke_core::LaurentCoeff::one())?;
                let e = specialize(g, ctx.inverse_satake(&chi)?)?;
                Ok(emit_element(g, header(&ctx, g, "inverse-satake"), &e))
            } else {
                let f = parse::element(input, grade)?;
                let e = specialize(g, ctx.satake(&f)?)?;
                Ok(emit_element(g, header(&ctx, g, "satake"), &e))
            }
        }
        Cmd::Convolve { a, b } => {
            let (x, y) = (parse::element(a, grade)?, parse::element(b, grade)?);
            let e = specialize(g, ctx.convolve(&x, &y, None)?)?;
            Ok(emit_element(g, header(&ctx, g, "convolve"), &e))
        }
        Cmd::Kernel => {
            let r = valid_rho(&ctx, g)?;
            let k = ctx.gamma_kernel(&r, g.n)?;
            let mut h = header(&ctx, g, "kernel");
            h["rho"] = json!(r.highest_weight.to_string());
            h["N"] = json!(g.n);
            h["l"] = json!(k.l);
            Ok(emit_element(g, h, &specialize(g, k.element)?))
        }
        Cmd::Fourier { input } => {
            let r = valid_rho(&ctx, g)?;
            let f = parse::element(input, grade)?;
            let e = ctx.fourier(FourierInput::Hecke(&f), &r, g.n)?;
            let mut h = header(&ctx, g, "fourier");
            h["rho"] = json!(r.highest_weight.to_string());
            h["N"] = json!(g.n);
            Ok(emit_element(g, h, &e))
        }
        Cmd::Verify { which } => {
            let r = valid_rho(&ctx, g)?;
            let rep = match which {
                VerifyKind::FixedPoint => ctx.verify_fixed_point(&r, g.n)?,
                VerifyKind::Unitarity => ctx.verify_unitarity(&r, g.n)?,
                VerifyKind::GjStandard => ctx.verify_gj_standard(&r, g.n)?,
            };
            eprintln!("wall time: {:.1} ms", rep.wall_time_ms);
            let out = render_report(g, &rep);
            if rep.status == Status::Pass {
                Ok(out)
            } else {
                MISMATCH_OUT.with(|m| *m.borrow_mut() = out);
                Err(Failure::Mismatch)
            }
        }
        Cmd::Zeta { h, c, q, s } => {
            let r = valid_rho(&ctx, g)?;
            let hh = match h {
                Some(h) => parse::element(h, grade)?,
                None => hecke_core::HeckeElement::identity(rd.rank()),
            };
            let z = ctx.zeta_over_l(&r, &hh)?;
            let mut head = header(&ctx, g, "zeta");
            head["rho"] = json!(r.highest_weight.to_string());
            if let Some(c) = c {
                let cv = parse::complex_list(c)?;
                let sv = parse::complex(s)?;
                let closed = ctx.zeta_closed_form(&r, &hh, &cv, *q, sv)?;
                let f = ctx.schwartz_element(&r, &hh, g.n)?;
                let series = ctx.satake(&ctx.schwartz_value(&f)?.twist(1, -ctx.checked_l(&r)?))?;
                let top = series.window().hi.unwrap_or(g.n).min(g.n);
                let num = ctx.eval_numeric(&series, &cv, *q, sv, top)?;
                head["q"] = json!(q);
                head["s"] = json!(s);
                head["closed_form"] = json!(fmt_c(closed));
                head["truncated"] = json!(fmt_c(num.value));
                head["truncated_N"] = json!(top);
                head["rel_diff"] = json!(format!("{:.3e}", (num.value - closed).norm() / closed.norm()));
            }
            Ok(emit_element(g, head, &z))
        }
        Cmd::Decomp { sym, ext, tensor } => {
            let d = if let Some(t) = tensor {
                let (a, b) = t
                    .split_once(':')
                    .ok_or_else(|| Failure::Invalid("--tensor expects a:b".into()))?;
                let (a, b) = (parse::weight(a)?, parse::weight(b)?);
                let parts = ctx.tensor_decomp(&a, &b)?;
                hecke_core::IrrDecomp {
                    parts: parts.iter().map(|(l, m)| hecke_core::IrrPart { lambda: l.clone(), mult: *m }).collect(),
                }
            } else {
                let r = rho(&ctx, g)?;
                match (sym, ext) {
                    (Some(k), _) => ctx.sym_power_decomp(&r, *k)?,
                    (_, Some(k)) => ctx.ext_power_decomp(&r, *k)?,
                    _ => return Err(Failure::Invalid("give one of --sym, --ext, --tensor".into())),
                }
            };
            Ok(match g.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&d).expect("json")),
                _ => d.parts.iter().map(|p| format!("{} x{}\n", p.lambda, p.mult)).collect(),
            })
        }
        Cmd::Arch { cmd } => arch_cmd(&ctx, g, cmd),
        Cmd::Cache { .. } => unreachable!(),
    }
}

fn render_report(g: &Global, rep: &VerifyReport) -> String {
    match g.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(rep).expect("json")),
        _ => {
            let mut s = format!("{} {} rho={} N={}: {}\n", rep.check, rep.group, rep.rho, rep.n, rep.status);
            for st in &rep.stages {
                let status = if st.passed { "ok" } else { "MISMATCH" };
                s.push_str(&format!("  {} [{}, {}] {}\n", st.name, st.lo, st.hi, status));
            }
            if let Some(m) = &rep.first_mismatch {
                s.push_str(&format!(
                    "  first mismatch: stage {} grade {} mu {} expected {} got {}\n",
                    m.stage, m.grade, m.mu, m.expected, m.got
                ));
            }
            s
        }
    }
}

fn arch_cmd(ctx: &Context, g: &Global, cmd: &ArchCmd) -> Out {
    let r = valid_rho(ctx, g)?;
    let l = ctx.checked_l(&r)?;
    let params = |a: &SpectralArgs| -> Result<ArchParams, Failure> {
        Ok(ArchParams::new(&r, parse::complex_list(&a.lambda)?, parse::complex(&a.s)?, l, a.field.into()))
    };
    let json_mode = g.format == Format::Json;
    match cmd {
        ArchCmd::Lfactor(a) => {
            let v = arch::lfactor(&params(a)?)?;
            Ok(if json_mode { format!("{}\n", json!({"value": cplx(v)})) } else { format!("{}\n", fmt_c(v)) })
        }
        ArchCmd::Gamma(a) => {
            let gf = arch::gamma_factor(&params(a)?)?;
            Ok(if json_mode {
                format!(
                    "{}\n",
                    json!({"value": cplx(gf.value), "ratio_route": cplx(gf.ratio_route), "rel_discrepancy": gf.rel_discrepancy})
                )
            } else {
                format!("{}\nrel_discrepancy {:.3e}\n", fmt_c(gf.value), gf.rel_discrepancy)
            })
        }
        ArchCmd::Threshold { p, which, field } => {
            let w = match which {
                WhichArg::Basic => Which::Basic,
                WhichArg::Kernel => Which::Kernel,
            };
            let t = ctx.threshold(&r, &parse::rational(p)?, w, (*field).into())?;
            Ok(if json_mode { format!("{}\n", json!({"threshold": t.to_string()})) } else { format!("{t}\n") })
        }
        ArchCmd::Crho => {
            let c = ctx.c_rho_constant(&r)?;
            Ok(if json_mode { format!("{}\n", json!({"c_rho": c.to_string()})) } else { format!("{c}\n") })
        }
        ArchCmd::Probe { s, p, t, radius, shells, field } => {
            let cfg = ProbeConfig {
                s: parse::complex(s)?,
                p: parse::rational(p)?,
                t: *t,
                radius: *radius,
                shells: *shells,
                field: (*field).into(),
            };
            let rep = ctx.seminorm_probe(&r, &cfg)?;
            Ok(match g.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&rep).expect("json")),
                Format::Csv => {
                    let mut out = String::from("shell,radius,log_max\n");
                    for (i, v) in rep.shell_log_max.iter().enumerate() {
                        out.push_str(&format!("{i},{},{v:.12e}\n", radius * i as f64 / cfg.shells.max(2) as f64));
                    }
                    out
                }
                Format::Text => format!(
                    "max {:.6e} (log {:.6})\ndecaying {}\npole_flag {}\n",
                    rep.max, rep.log_max, rep.decaying, rep.pole_flag
                ),
            })
        }
        ArchCmd::Stirling { .. } | ArchCmd::Derivative { .. } => unreachable!(),
    }
}

fn cache(g: &Global, cmd: &CacheCmd) -> Out {
    let dir = g
        .cache_dir
        .as_ref()
        .ok_or_else(|| Failure::Invalid("no cache directory: pass --cache-dir or set HECKE_CACHE_DIR".into()))?;
    let c = DiskCache::open(dir)?;
    match cmd {
        CacheCmd::Stats => {
            let s = c.stats();
            Ok(match g.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&s).expect("json")),
                _ => format!("entries {}\nignored {}\nbytes {}\n", s.entries, s.ignored_lines, s.bytes),
            })
        }
        CacheCmd::Clear => {
            c.clear()?;
            Ok("cleared\n".into())
        }
        CacheCmd::Export { output } => {
            let mut buf = Vec::new();
            c.export(&mut buf)?;
            match output {
                Some(p) => {
                    std::fs::write(p, &buf).map_err(Error::from)?;
                    Ok(String::new())
                }
                None => Ok(String::from_utf8(buf).expect("utf8")),
            }
        }
        CacheCmd::Import { file } => {
            let f = File::open(file).map_err(Error::from)?;
            let n = c.import(BufReader::new(f))?;
            Ok(format!("imported {n}\n"))
        }
    }
}
