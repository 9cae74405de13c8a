//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage, parse and dimension errors, 3 when
//! the design (or weighted Gram matrix) is singular.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::epistasis::{pairwise_scan, PairOutcome};
use crate::error::{Error, Result};
use crate::geninv::{generalized_inverse_from_basis, precision_element_direct, precision_matrix};
use crate::matrix::{prepend_ones, DenseMatrix};
use crate::ols::{coeff_single, coeffs_projected, fit_with_floor, solve_all};
use crate::oracle::{closed_form_p4, gauss_solve_normal_equations};
use crate::sgso::sgso;
use crate::table::{fmt_scalar, write_matrix, Table};
use crate::weighted::{diagonal_weights, weighted_coeffs, weighted_sgso};
use crate::gram_lu::lu_upper_augmented;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;

const INTERCEPT_NAME: &str = "(intercept)";

#[derive(Debug, Parser)]
#[command(name = "olsform", version, about = "Closed-form least squares from CSV data")]
pub struct RunConfig {
    /// Worker threads for parallel paths; output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit all coefficients; prints name,value lines then rss and dof.
    Fit(ModelArgs),
    /// Print a single coefficient (1-based index into the design).
    Coeff {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        index: usize,
    },
    /// Write the left generalized inverse of the design as CSV.
    Pinv(DesignArgs),
    /// Print one precision-matrix element, or the full matrix with --full.
    Precision {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long, requires = "j", conflicts_with = "full")]
        i: Option<usize>,
        #[arg(long, requires = "i", conflicts_with = "full")]
        j: Option<usize>,
        #[arg(long, required_unless_present = "i")]
        full: bool,
    },
    /// Weighted fit; --weights is a headerless CSV holding a column of
    /// diagonal weights or a full n×n matrix.
    Wfit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        weights: PathBuf,
    },
    /// Pairwise interaction scan over the selected locus columns.
    Epistasis {
        #[command(flatten)]
        input: InputArgs,
        /// Phenotype column.
        #[arg(long)]
        pheno: String,
        #[arg(long, default_value_t = 0)]
        perms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare every solver path with the elimination oracle.
    Verify(ModelArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// The first row is data rather than column names.
    #[arg(long)]
    pub no_header: bool,
    /// Comma-separated column names or 1-based indices.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    #[arg(long, default_value_t = crate::DEFAULT_PIVOT_FLOOR)]
    pub pivot_floor: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Prepend a column of ones.
    #[arg(long)]
    pub intercept: bool,
    /// Append powers 2..=DEG of a column, e.g. `--poly age=2`. Repeatable.
    #[arg(long, value_name = "COL=DEG")]
    pub poly: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long)]
    pub response: String,
}

struct Design {
    x: DenseMatrix,
    names: Vec<String>,
}

struct Model {
    design: Design,
    y: Vec<f64>,
}

fn load(input: &InputArgs) -> Result<Table> {
    if input.pivot_floor.is_nan() || input.pivot_floor < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "--pivot-floor must be non-negative, got {}",
            input.pivot_floor
        )));
    }
    Table::read_path(&input.input, !input.no_header)
}

fn select(table: &Table, columns: &Option<Vec<String>>, exclude: &[usize]) -> Result<Vec<usize>> {
    match columns {
        Some(refs) => refs.iter().map(|r| table.resolve(r.trim())).collect(),
        None => Ok((0..table.data.ncols()).filter(|j| !exclude.contains(j)).collect()),
    }
}

fn parse_poly(table: &Table, arg: &str) -> Result<(usize, u32)> {
    let bad = || Error::InvalidArgument(format!("--poly expects COL=DEG with DEG >= 2, got {arg:?}"));
    let (col, deg) = arg.rsplit_once('=').ok_or_else(bad)?;
    let deg: u32 = deg.trim().parse().map_err(|_| bad())?;
    if deg < 2 {
        return Err(bad());
    }
    Ok((table.resolve(col.trim())?, deg))
}

fn build_design(table: &Table, cols: &[usize], args: &DesignArgs) -> Result<Design> {
    let mut raw = table.data.select_columns(cols);
    let mut names: Vec<String> = cols.iter().map(|&j| table.column_name(j)).collect();
    for arg in &args.poly {
        let (j, deg) = parse_poly(table, arg)?;
        for k in 2..=deg {
            let v: Vec<f64> = table.data.col(j).iter().map(|a| a.powi(k as i32)).collect();
            raw = raw.hcat_column(&v)?;
            names.push(format!("{}^{k}", table.column_name(j)));
        }
    }
    let intercept = args.intercept;
    if names.is_empty() && !intercept {
        return Err(Error::Dimension("no predictor columns selected".into()));
    }
    let x = if intercept {
        names.insert(0, INTERCEPT_NAME.into());
        prepend_ones(&raw)
    } else {
        raw
    };
    Ok(Design { x, names })
}

fn load_design(args: &DesignArgs) -> Result<Design> {
    let table = load(&args.input)?;
    let cols = select(&table, &args.input.columns, &[])?;
    build_design(&table, &cols, args)
}

fn load_model(args: &ModelArgs) -> Result<Model> {
    let table = load(&args.design.input)?;
    let r = table.resolve(args.response.trim())?;
    let cols = select(&table, &args.design.input.columns, &[r])?;
    if cols.contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "response column {:?} is also selected as a predictor",
            table.column_name(r)
        )));
    }
    let design = build_design(&table, &cols, &args.design)?;
    Ok(Model {
        design,
        y: table.data.col(r).to_vec(),
    })
}

/// Rewrites column-indexed errors so the message names the column.
fn name_columns(e: Error, names: &[String]) -> CliError {
    match &e {
        Error::RankDeficient { column, .. } => match names.get(column.wrapping_sub(1)) {
            Some(name) => CliError::new(&e, format!("column {name:?}: {e}")),
            None => CliError::from(e),
        },
        _ => CliError::from(e),
    }
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(e: &Error, message: String) -> Self {
        CliError {
            code: exit_code(e),
            message,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(&e, e.to_string())
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_singular() {
        EXIT_SINGULAR
    } else {
        EXIT_INPUT
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn line(out: &mut Vec<u8>, label: &str, v: f64) {
    out.extend_from_slice(format!("{label},{}\n", fmt_scalar(v)).as_bytes());
}

fn cmd_fit(args: &ModelArgs) -> CliResult<Vec<u8>> {
    let m = load_model(args)?;
    let names = &m.design.names;
    let r = fit_with_floor(&m.design.x, &m.y, false, args.design.input.pivot_floor)
        .map_err(|e| name_columns(e, names))?;
    let mut out = Vec::new();
    for (name, b) in names.iter().zip(r.beta.iter()) {
        line(&mut out, name, *b);
    }
    line(&mut out, "rss", r.rss);
    out.extend_from_slice(format!("dof,{}\n", r.dof).as_bytes());
    Ok(out)
}

fn cmd_coeff(args: &ModelArgs, index: usize) -> CliResult<Vec<u8>> {
    let m = load_model(args)?;
    let b = sgso(&m.design.x, args.design.input.pivot_floor)
        .map_err(|e| name_columns(e, &m.design.names))?;
    let v = coeff_single(index, &m.design.x, &m.y, &b)?;
    Ok(format!("{}\n", fmt_scalar(v)).into_bytes())
}

fn cmd_pinv(args: &DesignArgs) -> CliResult<Vec<u8>> {
    let d = load_design(args)?;
    let b = sgso(&d.x, args.input.pivot_floor).map_err(|e| name_columns(e, &d.names))?;
    let mut out = Vec::new();
    write_matrix(&mut out, &generalized_inverse_from_basis(&d.x, &b).to_matrix())?;
    Ok(out)
}

fn cmd_precision(args: &DesignArgs, ij: Option<(usize, usize)>) -> CliResult<Vec<u8>> {
    let d = load_design(args)?;
    let b = sgso(&d.x, args.input.pivot_floor).map_err(|e| name_columns(e, &d.names))?;
    match ij {
        Some((i, j)) => {
            let v = precision_element_direct(i, j, &d.x, &b)?;
            Ok(format!("{}\n", fmt_scalar(v)).into_bytes())
        }
        None => {
            let s = precision_matrix(&generalized_inverse_from_basis(&d.x, &b));
            let mut out = Vec::new();
            write_matrix(&mut out, &s)?;
            Ok(out)
        }
    }
}

fn read_weights(path: &Path, n: usize) -> Result<DenseMatrix> {
    let t = Table::read_path(path, false)?;
    match t.data.shape() {
        (rows, 1) if rows == n => Ok(diagonal_weights(t.data.col(0))),
        (rows, cols) if rows == n && cols == n => Ok(t.data),
        shape => Err(Error::Dimension(format!(
            "weights file has shape {shape:?}; expected ({n}, 1) or ({n}, {n})"
        ))),
    }
}

fn cmd_wfit(args: &ModelArgs, weights: &Path) -> CliResult<Vec<u8>> {
    let m = load_model(args)?;
    let w = read_weights(weights, m.design.x.nrows())?;
    let wb = weighted_sgso(&m.design.x, &w, args.design.input.pivot_floor)
        .map_err(|e| name_columns(e, &m.design.names))?;
    let beta = weighted_coeffs(&m.design.x, &m.y, &wb)?;
    let mut out = Vec::new();
    for (name, b) in m.design.names.iter().zip(beta.iter()) {
        line(&mut out, name, *b);
    }
    Ok(out)
}

fn cmd_epistasis(input: &InputArgs, pheno: &str, perms: usize, seed: u64) -> CliResult<Vec<u8>> {
    let table = load(input)?;
    let pc = table.resolve(pheno.trim())?;
    let loci = select(&table, &input.columns, &[pc])?;
    let g = table.data.select_columns(&loci);
    let results = pairwise_scan(&g, table.data.col(pc), perms, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["i", "j", "locus_i", "locus_j", "beta3", "tstat", "dof", "p_perm", "status"])
        .map_err(io)?;
    for r in &results {
        let (a, b) = r.pair();
        let mut rec = vec![
            (a + 1).to_string(),
            (b + 1).to_string(),
            table.column_name(loci[a]),
            table.column_name(loci[b]),
        ];
        match r {
            PairOutcome::Tested { stat, p_perm } => {
                rec.push(fmt_scalar(stat.beta3));
                rec.push(fmt_scalar(stat.tstat));
                rec.push(stat.dof.to_string());
                rec.push(p_perm.map(fmt_scalar).unwrap_or_default());
                rec.push("ok".into());
            }
            PairOutcome::Skipped { .. } => {
                rec.extend(["", "", "", ""].map(String::from));
                rec.push("singular".into());
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()).into())
}

fn max_rel(a: &[f64], oracle: &[f64]) -> f64 {
    let scale = oracle.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(oracle)
        .map(|(x, o)| (x - o).abs() / o.abs().max(scale * 1e-12).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn cmd_verify(args: &ModelArgs) -> CliResult<Vec<u8>> {
    let m = load_model(args)?;
    let (x, y, names) = (&m.design.x, &m.y, &m.design.names);
    let floor = args.design.input.pivot_floor;
    let oracle = gauss_solve_normal_equations(x, y)?;
    let ob = oracle.beta.as_slice();

    let f = lu_upper_augmented(x, y, floor).map_err(|e| name_columns(e, names))?;
    let b = sgso(x, floor).map_err(|e| name_columns(e, names))?;
    let mut rows: Vec<(&str, f64)> = vec![
        ("solve_all", max_rel(&solve_all(&f)?, ob)),
        ("coeffs_projected", max_rel(&coeffs_projected(x, y, &b)?, ob)),
    ];
    let single: Vec<f64> = (1..=x.ncols())
        .map(|i| coeff_single(i, x, y, &b))
        .collect::<Result<_>>()?;
    rows.push(("coeff_single", max_rel(&single, ob)));
    let pinv = generalized_inverse_from_basis(x, &b);
    rows.push(("pinv_apply", max_rel(&pinv.apply(y)?, ob)));
    if x.ncols() == 4 {
        let (b3, b4) = closed_form_p4(x, y)?;
        rows.push(("closed_form_p4", max_rel(&[b3, b4], &ob[2..])));
    }
    let mut out = Vec::new();
    out.extend_from_slice(format!("oracle,{}\n", oracle.method.tag()).as_bytes());
    let mut worst = 0.0_f64;
    for (label, v) in rows {
        worst = worst.max(v);
        line(&mut out, label, v);
    }
    line(&mut out, "max", worst);
    Ok(out)
}

fn output_path(cmd: &Command) -> Option<&Path> {
    let input = match cmd {
        Command::Fit(m) | Command::Verify(m) => &m.design.input,
        Command::Coeff { model, .. } | Command::Wfit { model, .. } => &model.design.input,
        Command::Pinv(d) => &d.input,
        Command::Precision { design, .. } => &design.input,
        Command::Epistasis { input, .. } => input,
    };
    input.output.as_deref()
}

fn dispatch(cmd: &Command) -> CliResult<Vec<u8>> {
    match cmd {
        Command::Fit(m) => cmd_fit(m),
        Command::Coeff { model, index } => cmd_coeff(model, *index),
        Command::Pinv(d) => cmd_pinv(d),
        Command::Precision { design, i, j, .. } => cmd_precision(design, i.zip(*j)),
        Command::Wfit { model, weights } => cmd_wfit(model, weights),
        Command::Epistasis {
            input,
            pheno,
            perms,
            seed,
        } => cmd_epistasis(input, pheno, *perms, *seed),
        Command::Verify(m) => cmd_verify(m),
    }
}

fn execute(cfg: &RunConfig) -> CliResult<Vec<u8>> {
    match cfg.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be at least 1".into()).into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(|| dispatch(&cfg.command))
        }
        None => dispatch(&cfg.command),
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `stdout` or the `--output` file and diagnostics to `stderr`.
pub fn run<I, T, O, E>(args: I, stdout: &mut O, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = execute(&cfg).and_then(|bytes| {
        match output_path(&cfg.command) {
            Some(path) => File::create(path)
                .and_then(|mut f| f.write_all(&bytes))
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&bytes).map_err(Error::from)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Entry point for the binary.
pub fn run_main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}
