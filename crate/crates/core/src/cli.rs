//! Command-line experiment driver. Every command writes one table (CSV or
//! JSON) and, when `--output` is given, a `<output>.meta.json` sidecar with the
//! resolved arguments.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coherence::{coherence_bound, relative_entropy_of_coherence};
use crate::constrained::{
    constrained_bound, constrained_optimum, qubit_protocol, qutrit_protocol, ConstrainedReport, EnergyBudget,
};
use crate::correlation::{
    coherence_correlation_tradeoff, correlating_unitary, max_coherence_rotation, max_correlation_bound,
    mutual_information, verify_two_qubit_nogo, CompositeSystem,
};
use crate::error::Error;
use crate::search::{energy_window, maximize_over_unitaries, SearchConfig};
use crate::state::{conjugate, DensityMatrix, UnitaryMatrix};
use crate::thermal::{gibbs_state, Beta, Hamiltonian, ThermalState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug, Serialize)]
#[command(name = "thermocoh", version, about = "Coherence and correlation from thermal states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Table destination; stdout when absent (no sidecar is written then).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Constrained bound and achieved coherence on a budget grid from 0 to W_max.
    BoundSweep(BoundSweepArgs),
    /// Rotation sequence reaching the constrained optimum, step by step.
    Protocol(ProtocolArgs),
    /// Coherence versus total correlation on a budget grid for a composite.
    Tradeoff(TradeoffArgs),
    /// Multi-start search for a simultaneous coherence/correlation optimum on two qubits.
    Nogo(NogoArgs),
    /// Haar-sampling oracle checked against the analytic bounds.
    OracleCertify(OracleArgs),
}

#[derive(clap::Args, Debug, Serialize)]
pub struct BoundSweepArgs {
    #[arg(long)]
    pub energies: EnergyList,
    #[arg(long)]
    pub beta: Beta,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub energies: EnergyList,
    #[arg(long)]
    pub beta: Beta,
    #[arg(long = "delta-e")]
    pub delta_e: BudgetArg,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct TradeoffArgs {
    /// Local energy lists separated by `;`, e.g. `0,1;0,1`.
    #[arg(long)]
    pub subsystems: SubsystemList,
    #[arg(long)]
    pub beta: Beta,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// Least-squares starts for the correlating unitary.
    #[arg(long, default_value_t = 16)]
    pub attempts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct NogoArgs {
    #[arg(long = "eA")]
    pub e_a: f64,
    #[arg(long = "eB")]
    pub e_b: f64,
    #[arg(long)]
    pub beta: Beta,
    #[arg(long = "delta-e")]
    pub delta_e: BudgetArg,
    #[arg(long, default_value_t = 64)]
    pub attempts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub energies: EnergyList,
    #[arg(long)]
    pub beta: Beta,
    #[arg(long = "delta-e")]
    pub delta_e: BudgetArg,
    /// Optional composite for the correlation row.
    #[arg(long)]
    pub subsystems: Option<SubsystemList>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub window: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Comma-separated energies.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct EnergyList(pub Vec<f64>);

impl FromStr for EnergyList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad energy {x:?}: {e}")))
            .collect::<Result<_, _>>()
            .map(EnergyList)
    }
}

/// Semicolon-separated energy lists.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
pub struct SubsystemList(pub Vec<EnergyList>);

impl FromStr for SubsystemList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(';').map(EnergyList::from_str).collect::<Result<_, _>>().map(SubsystemList)
    }
}

/// A budget in energy units or `max` for `W_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetArg {
    Max,
    Value(f64),
}

impl FromStr for BudgetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("max") {
            return Ok(BudgetArg::Max);
        }
        s.parse().map(BudgetArg::Value).map_err(|e| format!("bad budget {s:?}: {e}"))
    }
}

impl Serialize for BudgetArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BudgetArg::Max => s.serialize_str("max"),
            BudgetArg::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl BudgetArg {
    fn resolve(self, t: &ThermalState) -> crate::Result<EnergyBudget> {
        match self {
            BudgetArg::Max => Ok(EnergyBudget::maximal(t)),
            BudgetArg::Value(v) => EnergyBudget::new(v, t),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotUnitary(_)
            | Error::ConvergenceFailure
            | Error::EnergyMismatch { .. }
            | Error::NoAdmissibleSample(_)
            | Error::NotMajorized => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_g12(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(x.to_string())),
            Cell::Int(i) => (*i).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Vec<serde_json::Value>> =
            self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

/// `%.12g`-style formatting.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let fixed = format!("{:.*}", (DIGITS - 1 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn hamiltonian(list: &EnergyList) -> crate::Result<Hamiltonian> {
    Hamiltonian::new(list.0.clone())
}

fn grid_points(max: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Validation("grid needs at least 2 points".into()));
    }
    Ok((0..n).map(|i| if i + 1 == n { max } else { max * i as f64 / (n - 1) as f64 }).collect())
}

fn bound_sweep(a: &BoundSweepArgs) -> Result<Table, CliError> {
    let t = gibbs_state(&hamiltonian(&a.energies)?, a.beta);
    let mut table = Table::new(&["delta_e", "beta_prime", "bound_bits", "achieved_bits", "gap", "energy_err"]);
    for de in grid_points(t.max_work(), a.grid)? {
        let r = constrained_optimum(&t, EnergyBudget::new(de, &t)?)?;
        table.push(vec![
            Cell::Num(de),
            Cell::Num(r.target_beta_prime.value()),
            Cell::Num(r.bound),
            Cell::Num(r.achieved_c_r),
            Cell::Num(r.gap()),
            Cell::Num(r.achieved_energy - de),
        ]);
    }
    Ok(table)
}

/// Closed forms for qubits and qutrits, the general chain otherwise.
pub fn protocol_report(t: &ThermalState, budget: EnergyBudget) -> crate::Result<ConstrainedReport> {
    match t.dim() {
        2 => qubit_protocol(t, budget),
        3 => qutrit_protocol(t, budget),
        _ => constrained_optimum(t, budget),
    }
}

fn protocol(a: &ProtocolArgs) -> Result<Table, CliError> {
    let t = gibbs_state(&hamiltonian(&a.energies)?, a.beta);
    let budget = a.delta_e.resolve(&t)?;
    let report = protocol_report(&t, budget)?;
    let h = t.hamiltonian();
    let mut table = Table::new(&["step", "axis_j", "axis_k", "angle_rad", "coherence_bits", "energy"]);
    let mut rho = t.state().clone();
    table.push(vec![
        Cell::Int(0),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Num(relative_entropy_of_coherence(&rho)?),
        Cell::Num(h.expectation(&rho.diagonal())),
    ]);
    for (i, step) in report.plan.steps.iter().enumerate() {
        let g = UnitaryMatrix::from_real(&step.matrix(t.dim()))?;
        rho = conjugate(&rho, &g)?;
        table.push(vec![
            Cell::Int(i as i64 + 1),
            Cell::Int(step.axes.0 as i64),
            Cell::Int(step.axes.1 as i64),
            Cell::Num(step.angle),
            Cell::Num(relative_entropy_of_coherence(&rho)?),
            Cell::Num(h.expectation(&rho.diagonal())),
        ]);
    }
    Ok(table)
}

fn composite(list: &SubsystemList) -> crate::Result<CompositeSystem> {
    CompositeSystem::new(list.0.iter().map(hamiltonian).collect::<crate::Result<_>>()?)
}

fn tradeoff(a: &TradeoffArgs) -> Result<Table, CliError> {
    let sys = composite(&a.subsystems)?;
    let t = sys.thermal(a.beta);
    let mut table =
        Table::new(&["delta_e", "i_max", "c_max", "corr_at_cmax", "coh_at_imax", "corr_at_imax"]);
    for de in grid_points(t.max_work(), a.grid)? {
        let budget = EnergyBudget::new(de, &t)?;
        let (u_c, _) = max_coherence_rotation(&sys, a.beta, budget)?;
        let at_c = coherence_correlation_tradeoff(&sys, a.beta, budget, &u_c)?;
        let u_i = correlating_unitary(&sys, a.beta, budget, a.attempts, a.seed)?;
        let at_i = coherence_correlation_tradeoff(&sys, a.beta, budget, &u_i.unitary)?;
        table.push(vec![
            Cell::Num(de),
            Cell::Num(at_c.i_max),
            Cell::Num(at_c.c_max),
            Cell::Num(at_c.correlation),
            Cell::Num(at_i.coherence),
            Cell::Num(at_i.correlation),
        ]);
    }
    Ok(table)
}

fn nogo(a: &NogoArgs) -> Result<Table, CliError> {
    let sys = CompositeSystem::two_qubits(a.e_a, a.e_b)?;
    let budget = a.delta_e.resolve(&sys.thermal(a.beta))?;
    let report = verify_two_qubit_nogo(&sys, a.beta, budget, a.attempts, a.seed)?;
    eprintln!(
        "min deviation {} at restart {}",
        format_g12(report.min_deviation),
        report.best_restart
    );
    let mut table =
        Table::new(&["restart", "deviation", "diagonal_deviation", "marginal_deviation", "energy_cost"]);
    for r in &report.restarts {
        table.push(vec![
            Cell::Int(r.restart as i64),
            Cell::Num(r.deviation),
            Cell::Num(r.diagonal_deviation),
            Cell::Num(r.marginal_deviation),
            Cell::Num(r.energy_cost),
        ]);
    }
    Ok(table)
}

fn oracle_certify(a: &OracleArgs) -> Result<Table, CliError> {
    let t = gibbs_state(&hamiltonian(&a.energies)?, a.beta);
    let budget = a.delta_e.resolve(&t)?;
    let cfg = SearchConfig {
        samples: a.samples,
        restarts: a.restarts,
        seed: a.seed,
        energy_window: a.window,
        ..SearchConfig::default()
    };
    cfg.validate()?;
    let mut table = Table::new(&[
        "kind",
        "delta_e",
        "bound_bits",
        "best_bits",
        "excess",
        "admissible_fraction",
        "evaluations",
    ]);
    let coherence = |rho: &DensityMatrix| relative_entropy_of_coherence(rho).unwrap_or(f64::NEG_INFINITY);
    let mut push = |kind: &str, de: f64, bound: f64, r: &crate::search::SearchResult| {
        table.push(vec![
            Cell::Text(kind.into()),
            Cell::Num(de),
            Cell::Num(bound),
            Cell::Num(r.best_value),
            Cell::Num(r.best_value - bound),
            Cell::Num(r.admissible_fraction),
            Cell::Int(r.evaluations as i64),
        ]);
    };

    let free = maximize_over_unitaries(coherence, &t, |_| true, &cfg)?;
    push("unconstrained", t.max_work(), coherence_bound(&t), &free);

    // the window admits energies up to ΔE + window, so the bound is taken there
    let de = budget.delta_e();
    let edge = EnergyBudget::new((de + a.window).min(t.max_work()), &t)?;
    let constrained = maximize_over_unitaries(coherence, &t, energy_window(&t, de, a.window), &cfg)?;
    push("constrained", de, constrained_bound(&t, edge)?.1, &constrained);

    if let Some(list) = &a.subsystems {
        let sys = composite(list)?;
        let joint = sys.thermal(a.beta);
        let p = sys.permutation();
        let budget = a.delta_e.resolve(&joint)?;
        let de = budget.delta_e();
        let edge = EnergyBudget::new((de + a.window).min(joint.max_work()), &joint)?;
        // the search runs in the sorted basis; correlation is measured in tensor order
        let correlation = |rho: &DensityMatrix| {
            conjugate(rho, &p)
                .and_then(|r| mutual_information(&r, &sys))
                .unwrap_or(f64::NEG_INFINITY)
        };
        let r = maximize_over_unitaries(correlation, &joint, energy_window(&joint, de, a.window), &cfg)?;
        push("correlation", de, max_correlation_bound(&sys, a.beta, edge)?, &r);
    }
    Ok(table)
}

pub fn execute(command: &Command) -> Result<Table, CliError> {
    match command {
        Command::BoundSweep(a) => bound_sweep(a),
        Command::Protocol(a) => protocol(a),
        Command::Tradeoff(a) => tradeoff(a),
        Command::Nogo(a) => nogo(a),
        Command::OracleCertify(a) => oracle_certify(a),
    }
}

fn seed_of(command: &Command) -> Option<u64> {
    match command {
        Command::Tradeoff(a) => Some(a.seed),
        Command::Nogo(a) => Some(a.seed),
        Command::OracleCertify(a) => Some(a.seed),
        Command::BoundSweep(_) | Command::Protocol(_) => None,
    }
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_outputs(cli: &Cli, table: &Table) -> Result<(), CliError> {
    let bytes = match cli.format {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &cli.output {
        None => std::io::stdout().write_all(&bytes).map_err(io),
        Some(path) => {
            std::fs::write(path, &bytes).map_err(io)?;
            let meta = serde_json::json!({
                "spec": cli,
                "seed": seed_of(&cli.command),
                "version": env!("CARGO_PKG_VERSION"),
                "results_path": path,
            });
            let mut text = serde_json::to_vec_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
            text.push(b'\n');
            std::fs::write(sidecar_path(path), text).map_err(io)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli.command).and_then(|table| write_outputs(&cli, &table)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("thermocoh: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(format_g12(0.0), "0");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(0.25), "0.25");
        assert_eq!(format_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g12(0.3193449399910715), "0.319344939991");
        assert_eq!(format_g12(-2.5e-9), "-2.5e-09");
        assert_eq!(format_g12(1.5e15), "1.5e+15");
        assert_eq!(format_g12(123456.0), "123456");
        assert_eq!(format_g12(1e-5), "1e-05");
        assert_eq!(format_g12(0.0001), "0.0001");
    }

    #[test]
    fn argument_parsing() {
        assert_eq!(BudgetArg::from_str("max").unwrap(), BudgetArg::Max);
        assert_eq!(BudgetArg::from_str("0.2").unwrap(), BudgetArg::Value(0.2));
        assert!(BudgetArg::from_str("lots").is_err());
        assert_eq!(EnergyList::from_str("0, 1,2").unwrap().0, vec![0.0, 1.0, 2.0]);
        assert!(EnergyList::from_str("0,x").is_err());
        assert_eq!(SubsystemList::from_str("0,1;0,2").unwrap().0.len(), 2);
        let cli = Cli::try_parse_from(["thermocoh", "protocol", "--energies", "0,1", "--beta", "inf", "--delta-e", "max"]).unwrap();
        match cli.command {
            Command::Protocol(a) => assert!(a.beta.is_infinite_temperature()),
            _ => panic!("wrong command"),
        }
        assert!(Cli::try_parse_from(["thermocoh", "protocol", "--bogus", "1"]).is_err());
    }

    #[test]
    fn bound_sweep_endpoints() {
        let args = BoundSweepArgs { energies: EnergyList(vec![0.0, 1.0]), beta: Beta::Finite(1.0986), grid: 11 };
        let table = bound_sweep(&args).unwrap();
        assert_eq!(table.rows.len(), 11);
        let Cell::Num(gap) = table.rows[10][4] else { panic!() };
        assert!(gap.abs() <= 1e-8);
        let Cell::Num(first) = table.rows[0][2] else { panic!() };
        assert_eq!(first, 0.0);
    }

    #[test]
    fn protocol_angles_in_range() {
        let args = ProtocolArgs {
            energies: EnergyList(vec![0.0, 1.0, 2.0]),
            beta: Beta::Finite(1.0),
            delta_e: BudgetArg::Value(0.2),
        };
        let table = protocol(&args).unwrap();
        assert_eq!(table.rows.len(), 3);
        for row in &table.rows[1..] {
            let Cell::Num(a) = row[3] else { panic!() };
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&a));
        }
    }

    #[test]
    fn exit_codes() {
        let bad = ["thermocoh", "protocol", "--energies", "1,0", "--beta", "1", "--delta-e", "0.1"];
        assert_eq!(run(bad), EXIT_VALIDATION);
        let unknown = ["thermocoh", "frobnicate"];
        assert_eq!(run(unknown), EXIT_VALIDATION);
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("no/such/dir/out.csv");
        let args = ["thermocoh", "bound-sweep", "--energies", "0,1", "--beta", "1", "--output", missing.to_str().unwrap()];
        assert_eq!(run(args), EXIT_IO);
        assert_eq!(CliError::from(Error::ConvergenceFailure).exit_code(), EXIT_NUMERICAL);
    }

    #[test]
    fn sidecar_written() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sweep.csv");
        let args = ["thermocoh", "bound-sweep", "--energies", "0,1", "--beta", "inf", "--grid", "3", "--output", out.to_str().unwrap()];
        assert_eq!(run(args), EXIT_OK);
        let meta: serde_json::Value =
            serde_json::from_slice(&std::fs::read(sidecar_path(&out)).unwrap()).unwrap();
        for key in ["spec", "seed", "version", "results_path"] {
            assert!(meta.get(key).is_some(), "{key}");
        }
        let csv = std::fs::read_to_string(&out).unwrap();
        assert!(csv.starts_with("delta_e,beta_prime,bound_bits,achieved_bits,gap,energy_err\n"));
        assert!(!csv.contains('\r'));
    }
}
