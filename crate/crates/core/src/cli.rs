//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{catalog_entries, verify_entry, CatalogError, VerificationReport};
use crate::expr::{parse, validate_analytic_at_zero_with};
use crate::numerics::{render_scientific_rational, PrecisionConfig, Scalar, MIN_FLOAT_BITS};
use crate::regularize::{regularize_expression, CrossCheck, Evaluation, RegularizeConfig, Verdict};
use crate::series::{maclaurin, MAX_ORDER};
use crate::zetafn::{check_bernoulli_sum, check_binomial_shift, IdentityCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  internal error
  2  usage, parse or validation error, or --exact-only violated
  3  eval: the regularization series diverges (partial sum still printed)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "zetareg",
    version,
    about = "Zeta-regularized values of divergent integrals over [0, inf)",
    after_help = EXIT_CODES
)]
pub struct Cli {
    /// Highest summand index K (series are expanded to order K + 2)
    #[arg(long, global = true, env = "ZETAREG_TERMS", default_value_t = 64,
          value_parser = clap::value_parser!(u64).range(0..=MAX_ORDER as u64))]
    pub terms: u64,

    /// Working precision of the float backend, in bits
    #[arg(long, global = true, default_value_t = 128,
          value_parser = clap::value_parser!(u64).range(MIN_FLOAT_BITS as u64..=1 << 20))]
    pub float_bits: u64,

    /// Significant digits when printing floats
    #[arg(long, global = true, default_value_t = 30,
          value_parser = clap::value_parser!(u64).range(1..=10_000))]
    pub digits: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Fail instead of falling back to float arithmetic
    #[arg(long, global = true)]
    pub exact_only: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regularize the integral of EXPR over [0, inf)
    Eval { expression: String },
    /// Print the Maclaurin coefficients of EXPR up to order K
    Series { expression: String },
    /// Run and audit the built-in examples
    Examples,
    /// Check the binomial and Bernoulli identities the method relies on
    Identities,
}

struct Ctx<'a> {
    cli: &'a Cli,
    precision: PrecisionConfig,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let precision = PrecisionConfig::new(cli.float_bits as usize, cli.digits as usize)
        .expect("ranges enforced by the argument parser");
    let mut ctx = Ctx {
        cli: &cli,
        precision,
        out,
        err,
    };
    let result = match &cli.command {
        Command::Eval { expression } => eval(&mut ctx, expression),
        Command::Series { expression } => series(&mut ctx, expression),
        Command::Examples => examples(&mut ctx),
        Command::Identities => identities(&mut ctx),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "zetareg: output error: {e}");
            EXIT_INTERNAL
        }
    }
}

fn sci(s: &Scalar) -> String {
    render_scientific_rational(&s.to_rational(), 3)
}

impl Ctx<'_> {
    fn config(&self) -> RegularizeConfig {
        RegularizeConfig {
            terms: self.cli.terms as usize,
            precision: self.precision,
            exact_only: self.cli.exact_only,
            ..RegularizeConfig::default()
        }
    }

    fn digits(&self) -> usize {
        self.cli.digits as usize
    }

    fn json<T: Serialize>(&mut self, value: &T) -> std::io::Result<()> {
        let s = serde_json::to_string_pretty(value).expect("plain data serializes");
        writeln!(self.out, "{s}")
    }
}

fn eval(ctx: &mut Ctx<'_>, text: &str) -> std::io::Result<i32> {
    let ev = match regularize_expression(text, &ctx.config()) {
        Ok(ev) => ev,
        Err(e) => {
            writeln!(ctx.err, "zetareg: {e}")?;
            return Ok(if e.is_user_error() { EXIT_USAGE } else { EXIT_INTERNAL });
        }
    };
    let divergent = ev.result.verdict == Verdict::SeriesDivergent;
    match ctx.cli.format {
        Format::Json => ctx.out.write_all(ev.to_json(ctx.digits()).as_bytes())?,
        Format::Text => eval_text(ctx, &ev)?,
    }
    if divergent {
        writeln!(ctx.err, "zetareg: the regularization series diverges")?;
        return Ok(EXIT_DIVERGENT);
    }
    if let CrossCheck::ExactMismatch { k } = ev.cross_check {
        writeln!(ctx.err, "zetareg: cross-check failed at k = {k}")?;
        return Ok(EXIT_INTERNAL);
    }
    Ok(EXIT_OK)
}

fn eval_text(ctx: &mut Ctx<'_>, ev: &Evaluation) -> std::io::Result<()> {
    let r = &ev.result;
    let digits = ctx.digits();
    let out = &mut *ctx.out;
    if r.verdict == Verdict::SeriesDivergent {
        writeln!(out, "*** DIVERGENT: the series does not converge; value is a partial sum, not a limit ***")?;
    }
    writeln!(out, "expression   {}", ev.expression)?;
    writeln!(out, "backend      {}", r.backend)?;
    writeln!(out, "terms        {} (k = 0..{})", r.terms_used, r.terms_used - 1)?;
    writeln!(out, "value        {}", r.value.render_decimal(digits))?;
    if let Scalar::Exact(_) = r.value {
        writeln!(out, "exact        {}", r.value.render(digits))?;
    }
    writeln!(out, "verdict      {}", r.verdict)?;
    match &r.tail_bound {
        Some(t) => writeln!(out, "tail bound   {}", sci(t))?,
        None => writeln!(out, "tail bound   none")?,
    }
    match &ev.cross_check {
        CrossCheck::ExactEqual => writeln!(out, "cross-check  exact-equal")?,
        CrossCheck::ExactMismatch { k } => writeln!(out, "cross-check  MISMATCH at k = {k}")?,
        CrossCheck::MaxDiscrepancy(d) => writeln!(out, "cross-check  max discrepancy {}", sci(d))?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CoefficientJson {
    k: usize,
    c_k: String,
    derivative: String,
}

#[derive(Serialize)]
struct SeriesJson {
    expression: String,
    order: usize,
    backend: &'static str,
    coefficients: Vec<CoefficientJson>,
}

fn series(ctx: &mut Ctx<'_>, text: &str) -> std::io::Result<i32> {
    let e = match parse(text) {
        Ok(e) => e,
        Err(err) => {
            writeln!(ctx.err, "zetareg: parse error at position {}: {}", err.position, err.message)?;
            return Ok(EXIT_USAGE);
        }
    };
    if let Err(err) = validate_analytic_at_zero_with(&e, &ctx.precision) {
        writeln!(ctx.err, "zetareg: analyticity error: {err}")?;
        return Ok(EXIT_USAGE);
    }
    let order = ctx.cli.terms as usize;
    let s = match maclaurin(&e, order, &ctx.precision) {
        Ok(s) => s,
        Err(err) => {
            writeln!(ctx.err, "zetareg: series error: {err}")?;
            return Ok(EXIT_INTERNAL);
        }
    };
    if ctx.cli.exact_only && !s.is_exact() {
        writeln!(ctx.err, "zetareg: backend error: expression needs float arithmetic but --exact-only was given")?;
        return Ok(EXIT_USAGE);
    }
    let digits = ctx.digits();
    let rows: Vec<CoefficientJson> = (0..=order)
        .map(|k| CoefficientJson {
            k,
            c_k: s.coeff(k).render(digits),
            derivative: s.derivative_at_zero(k).render(digits),
        })
        .collect();
    match ctx.cli.format {
        Format::Json => ctx.json(&SeriesJson {
            expression: e.render(),
            order,
            backend: if s.is_exact() { "exact" } else { "float" },
            coefficients: rows,
        })?,
        Format::Text => {
            writeln!(ctx.out, "# {} to order {}", e.render(), order)?;
            writeln!(ctx.out, "# k  c_k  f^(k)(0)")?;
            for r in rows {
                writeln!(ctx.out, "{}  {}  {}", r.k, r.c_k, r.derivative)?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ExampleJson {
    id: String,
    expression: String,
    terms: usize,
    engine_value: String,
    reference_form: String,
    reference: String,
    delta: String,
    status: &'static str,
    verdict: &'static str,
    tail_bound: Option<String>,
    paper_series: String,
    paper_series_value: String,
    paper_series_tail_bound: Option<String>,
    derived_sum: String,
    engine_matches_derived_sum: bool,
    agreement: &'static str,
    note: &'static str,
    classical_value: Option<String>,
}

fn examples(ctx: &mut Ctx<'_>) -> std::io::Result<i32> {
    let terms = ctx.cli.terms as usize;
    let entries = catalog_entries();
    let precision = ctx.precision;
    let reports: Vec<Result<VerificationReport, CatalogError>> = entries
        .par_iter()
        .map(|e| verify_entry(e, terms, &precision))
        .collect();
    let digits = ctx.digits();
    let mut rows = Vec::with_capacity(entries.len());
    for (entry, report) in entries.iter().zip(reports) {
        let r = match report {
            Ok(r) => r,
            Err(e) => {
                writeln!(ctx.err, "zetareg: example {}: {e}", entry.id)?;
                return Ok(EXIT_INTERNAL);
            }
        };
        rows.push(ExampleJson {
            id: r.id.clone(),
            expression: entry.expression_text.clone(),
            terms,
            engine_value: r.engine.value.render_decimal(digits),
            reference_form: entry.paper_closed_form.clone(),
            reference: r.reference.render_decimal(digits),
            delta: sci(&r.engine_vs_reference.delta),
            status: r.status.name(),
            verdict: r.engine.verdict.name(),
            tail_bound: r.engine.tail_bound.as_ref().map(sci),
            paper_series: entry.paper_series_text.clone(),
            paper_series_value: r.paper_series.value.render_decimal(digits),
            paper_series_tail_bound: r.paper_series.tail_bound.as_ref().map(sci),
            derived_sum: r.derived_sum.render_decimal(digits),
            engine_matches_derived_sum: r.engine_vs_derived.agrees,
            agreement: r.agreement(),
            note: r.note,
            classical_value: r.classical_value.as_ref().map(|v| v.render_decimal(digits)),
        });
    }
    match ctx.cli.format {
        Format::Json => ctx.json(&rows)?,
        Format::Text => examples_text(ctx, &rows)?,
    }
    Ok(EXIT_OK)
}

fn examples_text(ctx: &mut Ctx<'_>, rows: &[ExampleJson]) -> std::io::Result<()> {
    let header = ["id", "K", "engine value", "reference", "|delta|", "status"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.id.clone(),
                r.terms.to_string(),
                r.engine_value.clone(),
                r.reference.clone(),
                r.delta.clone(),
                r.status.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: [&str; 6]| {
        let mut s = String::new();
        for (i, (c, w)) in cols.iter().zip(widths).enumerate() {
            if i + 1 == cols.len() {
                s.push_str(c);
            } else {
                s.push_str(&format!("{c:<w$}  "));
            }
        }
        s
    };
    writeln!(ctx.out, "{}", line(header))?;
    for row in &cells {
        writeln!(ctx.out, "{}", line(row.each_ref().map(String::as_str)))?;
    }
    writeln!(ctx.out)?;
    writeln!(ctx.out, "audit")?;
    for r in rows {
        writeln!(ctx.out)?;
        writeln!(ctx.out, "{}: {}", r.id, r.agreement)?;
        writeln!(ctx.out, "  expression     {}", r.expression)?;
        writeln!(ctx.out, "  closed form    {} = {}", r.reference_form, r.reference)?;
        writeln!(ctx.out, "  engine         {} (tail {})", r.engine_value, r.tail_bound.as_deref().unwrap_or("none"))?;
        writeln!(
            ctx.out,
            "  printed series {} (tail {})",
            r.paper_series_value,
            r.paper_series_tail_bound.as_deref().unwrap_or("none")
        )?;
        writeln!(
            ctx.out,
            "  derived sum    {} ({})",
            r.derived_sum,
            if r.engine_matches_derived_sum { "matches engine" } else { "DIFFERS from engine" }
        )?;
        if let Some(v) = &r.classical_value {
            writeln!(ctx.out, "  classical      {v} (the ordinary integral converges)")?;
        }
        if !r.note.is_empty() {
            writeln!(ctx.out, "  note           {}", r.note)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentityJson {
    name: &'static str,
    range: String,
    cases: usize,
    passed: bool,
    failures: Vec<Vec<u64>>,
}

fn identities(ctx: &mut Ctx<'_>) -> std::io::Result<i32> {
    let (a, b) = rayon::join(|| check_binomial_shift(50), || check_bernoulli_sum(60));
    let checks: [IdentityCheck; 2] = [a, b];
    let ok = checks.iter().all(IdentityCheck::passed);
    match ctx.cli.format {
        Format::Json => {
            let rows: Vec<IdentityJson> = checks
                .iter()
                .map(|c| IdentityJson {
                    name: c.name,
                    range: c.range.clone(),
                    cases: c.cases,
                    passed: c.passed(),
                    failures: c.failures.clone(),
                })
                .collect();
            ctx.json(&rows)?;
        }
        Format::Text => {
            let describe = |c: &IdentityCheck| match c.name {
                "binomial-shift" => "C(k+1,p) = (p+1)/(k+2) * C(k+2,p+1)",
                _ => "sum_{p<m} C(m,p) B_p = 0",
            };
            for c in &checks {
                writeln!(
                    ctx.out,
                    "{} {}  [{}]  {}, {} cases",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    describe(c),
                    c.range,
                    c.cases
                )?;
                for f in &c.failures {
                    writeln!(ctx.out, "  failed at {f:?}")?;
                }
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_INTERNAL })
}
