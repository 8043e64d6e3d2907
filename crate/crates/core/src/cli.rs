//! Command-line front end. Each subcommand builds a [`Report`] of tables and
//! PASS/FAIL checks, written as CSV or JSON.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::detectors::{
    cascade_closed_form, cascade_kk_closed_form, cascade_probability, cascade_probability_fock, CascadeConfig,
};
use crate::entanglement::is_ppt_fock;
use crate::error::{Error, Result};
use crate::experiments::{self as ex, AyDetection, InnsbruckConfig, Pol, VacuumWeightModel};
use crate::fock::{ModeLabel, TOL};
use crate::gaussian::PdcCoupling;
use crate::lithography::{self as litho, SuperpositionAnsatz, TargetPattern};
use crate::metrology;
use crate::optimizer::{de_minimize, DeConfig};

/// Version of the table layouts; bumped whenever a column changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "condprep", version, about = "Conditional state preparation in linear optics")]
pub struct Cli {
    /// RNG seed for randomised subcommands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file supplying defaults for any flag of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lift size guards and allow overwriting --out.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cascade click statistics p_N(k|m), Hermite vs Fock vs closed form.
    NportTable(NportArgs),
    /// Single-photon confidence against detector efficiency.
    ConfidenceCurve(ConfidenceArgs),
    /// Teleportation fidelities, efficiency bounds and third-order shifts.
    Teleport(TeleportArgs),
    /// Partial-transpose spectrum of the swapping output.
    SwapSpectrum,
    /// Three-photon GHZ post-selection.
    Ghz,
    /// Nonlinear-sign gate and the C-SIGN entangler.
    Nsgate(NsArgs),
    /// Down-converter pair statistics against a Poisson law.
    Pdc(PdcArgs),
    /// Fit a lithography pattern.
    LithoFit(LithoArgs),
}

#[derive(Args, Debug)]
pub struct NportArgs {
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, default_value_t = 3)]
    pub m_max: u32,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.1])]
    pub eta2: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct ConfidenceArgs {
    /// Finite cascade sizes; the infinite cascade is always included.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 4, 16])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 0.65)]
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AyArg {
    NoClick,
    Undetected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Derived,
    Published,
}

#[derive(Args, Debug)]
pub struct TeleportArgs {
    /// Pair probability of both sources unless --p1/--p2 are given.
    #[arg(long, default_value_t = 1e-4)]
    pub p: f64,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Cascade size.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Efficiency of every detector unless overridden.
    #[arg(long, default_value_t = 0.1)]
    pub eta2: f64,
    #[arg(long)]
    pub eta_u2: Option<f64>,
    #[arg(long)]
    pub eta_v2: Option<f64>,
    #[arg(long)]
    pub eta_c2: Option<f64>,
    #[arg(long, value_enum, default_value_t = AyArg::Undetected)]
    pub ay: AyArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Derived)]
    pub model: ModelArg,
    /// Skip the Fock-space simulation.
    #[arg(long)]
    pub no_simulate: bool,
}

#[derive(Args, Debug)]
pub struct NsArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct PdcArgs {
    /// Pair-creation probability (small-p law).
    #[arg(long, default_value_t = 1e-4)]
    pub p: f64,
    /// Real coupling τ; switches to the exact law with p = tanh²τ.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LithoMethod {
    Fourier,
    Superposition,
}

#[derive(Args, Debug)]
pub struct LithoArgs {
    /// Two-column (φ, F) file; defaults to the unit trench.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LithoMethod::Superposition)]
    pub method: LithoMethod,
    /// Photon budget.
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value_t = 1000)]
    pub generations: usize,
    /// Population size; 10 × genes when omitted.
    #[arg(long)]
    pub np: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn near(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, expected, tolerance, pass: (value - expected).abs() <= tolerance }
    }

    /// value ≤ bound.
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, expected: bound, tolerance: 0.0, pass: value <= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub schema: u32,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self { command: command.into(), schema: SCHEMA_VERSION, tables: Vec::new(), checks: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new("checks", &["check", "value", "expected", "tolerance", "status"]);
        for c in &self.checks {
            t.push(vec![
                c.name.as_str().into(),
                c.value.into(),
                c.expected.into(),
                c.tolerance.into(),
                if c.pass { "PASS" } else { "FAIL" }.into(),
            ]);
        }
        t
    }

    /// One block per table, each introduced by a `# name` line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {} schema {}\n", self.command, self.schema);
        for note in &self.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        let mut tables: Vec<&Table> = self.tables.iter().collect();
        let checks = self.checks_table();
        if !self.checks.is_empty() {
            tables.push(&checks);
        }
        for (i, t) in tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("# {}\n", t.name));
            out.push_str(&t.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
            for row in &t.rows {
                out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        // Debug formatting is the shortest representation that round-trips.
        Cell::Num(v) if v.is_finite() => format!("{v:?}"),
        Cell::Num(_) | Cell::Empty => String::new(),
        Cell::Text(s) => csv_text(s),
    }
}

// --------------------------------------------------------------- commands

pub fn cmd_nport_table(a: &NportArgs, force: bool) -> Result<Report> {
    if a.n_max > 6 && !force {
        return Err(Error::Domain(format!("--n-max {} exceeds the guard of 6; pass --force", a.n_max)));
    }
    if a.n_max == 0 {
        return Err(Error::Domain("--n-max must be at least 1".into()));
    }
    let mut r = Report::new("nport-table");
    let mut t = Table::new("p_N(k|m)", &["N", "k", "m", "eta2", "hermite", "fock", "closed_form", "abs_diff"]);
    let (mut worst_sim, mut worst_closed): (f64, f64) = (0.0, 0.0);
    for n in 1..=a.n_max {
        for &eta2 in &a.eta2 {
            let cfg = CascadeConfig::new(n, eta2)?;
            for m in 0..=a.m_max {
                for k in 0..=m.min(n as u32) {
                    let h = cascade_probability(&cfg, k, m)?;
                    let f = cascade_probability_fock(&cfg, k, m)?;
                    let closed = cascade_closed_form(&cfg, k, m).or((k == m).then(|| cascade_kk_closed_form(&cfg, k)));
                    worst_sim = worst_sim.max((h - f).abs());
                    if let Some(cf) = closed {
                        worst_closed = worst_closed.max((h - cf).abs());
                    }
                    t.push(vec![
                        n.into(),
                        k.into(),
                        m.into(),
                        eta2.into(),
                        h.into(),
                        f.into(),
                        closed.into(),
                        (h - f).abs().into(),
                    ]);
                }
            }
        }
    }
    r.tables.push(t);
    r.checks.push(Check::at_most("max |hermite - fock|", worst_sim, 1e-10));
    r.checks.push(Check::at_most("max |hermite - closed form|", worst_closed, 1e-10));
    if a.n_max >= 4 && a.m_max >= 2 {
        let v = cascade_probability(&CascadeConfig::new(4, 1.0)?, 2, 2)?;
        r.checks.push(Check::near("p_4(2|2) at eta2 = 1", v, 0.75, 1e-12));
    }
    Ok(r)
}

pub fn cmd_confidence_curve(a: &ConfidenceArgs) -> Result<Report> {
    if a.points < 2 {
        return Err(Error::Domain("--points must be at least 2".into()));
    }
    if a.n.contains(&0) {
        return Err(Error::Domain("cascade sizes must be positive".into()));
    }
    let mut r = Report::new("confidence-curve");
    let mut cols: Vec<String> = vec!["eta2".into()];
    cols.extend(a.n.iter().map(|n| format!("C_N{n}")));
    cols.push("C_inf".into());
    let mut curve = Table { name: "confidence".into(), columns: cols, rows: Vec::new() };
    let mut monotone = true;
    let mut prev: Vec<f64> = Vec::new();
    for i in 0..a.points {
        let eta2 = i as f64 / (a.points - 1) as f64;
        let mut vals: Vec<f64> = a.n.iter().map(|&n| metrology::confidence_cascade(n, eta2, a.delta)).collect();
        vals.push(metrology::confidence_cascade_limit(eta2, a.delta));
        if !prev.is_empty() {
            monotone &= vals.iter().zip(&prev).all(|(v, p)| *v >= *p - 1e-15);
        }
        let mut row = vec![eta2.into()];
        row.extend(vals.iter().map(|&v| Cell::from(v)));
        curve.push(row);
        prev = vals;
    }
    r.tables.push(curve);
    let mut th = Table::new("threshold", &["N", "eta2_at_threshold"]);
    let crossing = |n: Option<usize>| -> Result<Option<f64>> {
        if a.delta <= 0.0 {
            return Ok(None);
        }
        let e = metrology::efficiency_for_confidence(n, a.threshold, a.delta)?;
        Ok((0.0..=1.0).contains(&e).then_some(e))
    };
    for &n in &a.n {
        th.push(vec![n.to_string().into(), crossing(Some(n))?.into()]);
    }
    th.push(vec!["inf".into(), crossing(None)?.into()]);
    r.tables.push(th);
    r.checks.push(Check::near("monotone in eta2", f64::from(u8::from(monotone)), 1.0, 0.0));
    if (a.threshold - 0.65).abs() < 1e-12 && (a.delta - 1.0).abs() < 1e-12 {
        r.checks.push(Check::near(
            "eta2 at C = 0.65, N = 4",
            metrology::efficiency_for_confidence(Some(4), 0.65, 1.0)?,
            0.835,
            0.005,
        ));
        r.checks.push(Check::near(
            "eta2 at C = 0.65, N = inf",
            metrology::efficiency_for_confidence(None, 0.65, 1.0)?,
            0.731,
            0.005,
        ));
    }
    Ok(r)
}

fn teleport_config(a: &TeleportArgs) -> Result<InnsbruckConfig> {
    let cfg = InnsbruckConfig {
        p1: a.p1.unwrap_or(a.p),
        p2: a.p2.unwrap_or(a.p),
        theta: a.theta,
        phi: a.phi,
        n: a.n,
        eta_u2: a.eta_u2.unwrap_or(a.eta2),
        eta_v2: a.eta_v2.unwrap_or(a.eta2),
        eta_c2: a.eta_c2.unwrap_or(a.eta2),
        order: 2,
        ay: match a.ay {
            AyArg::NoClick => AyDetection::NoClick,
            AyArg::Undetected => AyDetection::Undetected,
        },
        model: match a.model {
            ModelArg::Derived => VacuumWeightModel::Derived,
            ModelArg::Published => VacuumWeightModel::Published,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn ay_label(ay: AyDetection) -> &'static str {
    match ay {
        AyDetection::NoClick => "a_y detected (no click)",
        AyDetection::Undetected => "a_y undetected",
    }
}

pub fn cmd_teleport(a: &TeleportArgs) -> Result<Report> {
    let cfg = teleport_config(a)?;
    let mut r = Report::new("teleport");
    let psi = ex::teleported_state(cfg.theta, cfg.phi);
    let closed = ex::innsbruck_closed_form(&cfg)?;
    if closed.extrapolated {
        r.notes.push(format!("N = {} lies beyond the verified range N <= 4 (unverified extrapolation)", cfg.n));
    }
    let rho_cf = closed.rho.evaluate(cfg.p1, cfg.p2)?;
    let f_cf = metrology::fidelity(&rho_cf, &psi)?;
    let mut fid = Table::new("fidelity", &["detection", "model", "formula", "closed_form", "simulated", "rel_diff"]);
    let model = format!("{:?}", cfg.model).to_lowercase();
    if a.no_simulate {
        fid.push(vec![
            ay_label(cfg.ay).into(),
            model.into(),
            ex::teleport_fidelity_2(&cfg).into(),
            f_cf.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    } else {
        let sim_cfg = InnsbruckConfig { model: VacuumWeightModel::Derived, ..cfg };
        let sim = ex::innsbruck_simulate(&sim_cfg)?;
        let f_sim = metrology::fidelity(&sim.evaluate(cfg.p1, cfg.p2)?, &psi)?;
        let diff = sim.max_relative_diff(&ex::innsbruck_closed_form(&sim_cfg)?.rho);
        fid.push(vec![
            ay_label(cfg.ay).into(),
            model.into(),
            ex::teleport_fidelity_2(&cfg).into(),
            f_cf.into(),
            f_sim.into(),
            diff.into(),
        ]);
        r.checks.push(Check::at_most("simulation vs derived closed form (relative)", diff, 1e-10));
    }
    r.tables.push(fid);

    let mut bounds = Table::new("efficiency_bound", &["N", "published", "derived", "F_published", "F_derived"]);
    for n in 1..=8 {
        let c = InnsbruckConfig { n, ay: AyDetection::NoClick, ..cfg };
        bounds.push(vec![
            n.into(),
            ex::cascade_efficiency_bound(n, cfg.p1, cfg.p2, VacuumWeightModel::Published).into(),
            ex::cascade_efficiency_bound(n, cfg.p1, cfg.p2, VacuumWeightModel::Derived).into(),
            ex::teleport_fidelity_2(&InnsbruckConfig { model: VacuumWeightModel::Published, ..c }).into(),
            ex::teleport_fidelity_2(&InnsbruckConfig { model: VacuumWeightModel::Derived, ..c }).into(),
        ]);
    }
    r.tables.push(bounds);

    let reference = InnsbruckConfig::new(1e-4, 0.3, 1, 0.98)?;
    let mut lim = Table::new("limits", &["quantity", "published", "derived"]);
    lim.push(vec![
        "eta2 bound, N -> inf, p1 = p2".into(),
        ex::cascade_efficiency_limit(VacuumWeightModel::Published).into(),
        ex::cascade_efficiency_limit(VacuumWeightModel::Derived).into(),
    ]);
    let min_n = |m| ex::minimal_cascade_size(&InnsbruckConfig { model: m, ..reference }, 0.75, 64).map(|n| n as f64);
    lim.push(vec![
        "minimal N for F >= 3/4 at eta2 = 0.98".into(),
        min_n(VacuumWeightModel::Published).into(),
        min_n(VacuumWeightModel::Derived).into(),
    ]);
    r.tables.push(lim);

    let p = cfg.p1;
    let e = cfg.eta_c2;
    let f2 = 1.0 / (4.0 - e);
    let mut o3 =
        Table::new("third_order", &["p", "eta2", "F2", "F3_published", "F3_derived", "shift_published", "shift_derived"]);
    let f3p = ex::teleport_fidelity_3(p, e);
    let f3d = ex::teleport_fidelity_3_derived(p, e);
    o3.push(vec![p.into(), e.into(), f2.into(), f3p.into(), f3d.into(), ((f2 - f3p) / f2).into(), ((f2 - f3d) / f2).into()]);
    r.tables.push(o3);

    let no_cascade = InnsbruckConfig { ay: AyDetection::Undetected, ..InnsbruckConfig::new(1e-4, 0.3, 1, 0.1)? };
    r.checks.push(Check::near(
        "F, no cascade, a_y undetected, eta2 = 0.1",
        ex::teleport_fidelity_2(&no_cascade),
        1.0 / 3.9,
        5e-4,
    ));
    r.checks.push(Check::near(
        "published bound limit",
        ex::cascade_efficiency_bound(1 << 30, 1.0, 1.0, VacuumWeightModel::Published),
        14.0 / 15.0,
        1e-8,
    ));
    r.checks.push(Check::near(
        "minimal N at eta2 = 0.98 (derived)",
        min_n(VacuumWeightModel::Derived).unwrap_or(f64::NAN),
        4.0,
        0.0,
    ));
    r.notes.push("the published vacuum weight 1+(5N-3)(1-eta2) differs from the simulated 1+(3N-1)(1-eta2) for N > 1".into());
    Ok(r)
}

pub fn cmd_swap_spectrum() -> Result<Report> {
    let mut r = Report::new("swap-spectrum");
    let ev = ex::swap_mixture_pt_spectrum()?;
    let mut t = Table::new("pt_spectrum", &["index", "eigenvalue", "times_8"]);
    for (i, v) in ev.iter().enumerate() {
        t.push(vec![i.into(), (*v).into(), (v * 8.0).into()]);
    }
    r.tables.push(t);
    let s3 = 3f64.sqrt();
    let mut want = vec![-s3, -1.0, 0.0, 0.0, s3];
    want.extend([1.0; 9]);
    want.sort_by(f64::total_cmp);
    let dev = if ev.len() == want.len() {
        ev.iter().zip(&want).map(|(a, b)| (a - b / 8.0).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    r.checks.push(Check::at_most("spectrum deviation from {0 x2, 1/8 x9, -1/8, +-sqrt3/8}", dev, 1e-10));
    r.checks.push(Check::near("trace of partial transpose", ev.iter().sum(), 1.0, 1e-12));
    let mut cond = Table::new("conditional_states", &["j", "k", "probability", "overlap_with_published", "pt_min_eigenvalue"]);
    for (j, k) in [(Pol::X, Pol::X), (Pol::X, Pol::Y), (Pol::Y, Pol::X), (Pol::Y, Pol::Y)] {
        let (s, p) = ex::swap_conditional(j, k)?;
        let ov = ex::swap_published(j, k).inner_product(&s)?.norm();
        let rho = crate::fock::DensityOperator::from_pure(&s);
        let ppt = is_ppt_fock(&rho, &[ModeLabel::x(3), ModeLabel::y(3)], TOL)?;
        let lab = |p: Pol| if p == Pol::X { "x" } else { "y" };
        cond.push(vec![lab(j).into(), lab(k).into(), p.into(), ov.into(), ppt.min_eigenvalue.into()]);
        r.checks.push(Check::near(&format!("({}, {}) matches published state", lab(j), lab(k)), ov, 1.0, 1e-12));
        r.checks.push(Check::at_most(
            &format!("({}, {}) has negative partial transpose", lab(j), lab(k)),
            ppt.min_eigenvalue,
            -1e-6,
        ));
    }
    r.tables.push(cond);
    Ok(r)
}

pub fn cmd_ghz() -> Result<Report> {
    let mut r = Report::new("ghz");
    let g = ex::ghz_postselect()?;
    let mut t = Table::new("branches", &["branch", "re", "im"]);
    for (label, a) in &g.branches {
        t.push(vec![format!("|{label}>").into(), a.re.into(), a.im.into()]);
    }
    r.tables.push(t);
    let mut s = Table::new("threefold_state", &["D1x", "D1y", "D2x", "D2y", "D3x", "D3y", "re", "im"]);
    for (o, a) in g.state.iter() {
        let mut row: Vec<Cell> = o.iter().map(|&n| Cell::from(u32::from(n))).collect();
        row.push(a.re.into());
        row.push(a.im.into());
        s.push(row);
    }
    r.tables.push(s);
    let mut published: Vec<&str> = ex::GHZ_BRANCHES.to_vec();
    published.sort_unstable();
    let mut got: Vec<&str> = g.branches.iter().map(|b| b.0.as_str()).collect();
    got.sort_unstable();
    r.checks.push(Check::near("branch count", g.branches.len() as f64, 8.0, 0.0));
    r.checks.push(Check::near("branches equal the published list", f64::from(u8::from(published == got)), 1.0, 0.0));
    r.checks.push(Check::near("three-fold fraction", g.threefold_fraction, 0.25, 1e-12));
    r.checks.push(Check::near("45-degree parity visibility", ex::ghz_parity(&g.state)?, 1.0, 1e-12));
    r.checks.push(Check::near("visibility of the incoherent mixture", ex::ghz_mixture_parity(&g.state)?, 0.0, 1e-12));
    Ok(r)
}

/// Random normalised (α₀, α₁, α₂).
pub fn random_qutrit(rng: &mut ChaCha8Rng) -> [Complex64; 3] {
    let v: [Complex64; 3] = std::array::from_fn(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

pub fn cmd_nsgate(a: &NsArgs, seed: u64) -> Result<Report> {
    let mut r = Report::new("nsgate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new("ns_samples", &["sample", "success", "output_error"]);
    let (mut lo, mut hi, mut worst) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for i in 0..a.samples {
        let alpha = random_qutrit(&mut rng);
        let (out, p) = ex::ns_gate(alpha)?;
        let want = [alpha[0], alpha[1], -alpha[2]];
        let err = out.iter().zip(&want).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        lo = lo.min(p);
        hi = hi.max(p);
        worst = worst.max(err);
        t.push(vec![i.into(), p.into(), err.into()]);
    }
    r.tables.push(t);
    let cs = ex::csign_entangler()?;
    let mut c = Table::new("csign", &["success", "entanglement_bits", "bell_fidelity", "detected_photons"]);
    c.push(vec![cs.success.into(), cs.entanglement.into(), cs.bell_fidelity.into(), cs.detected_photons.into()]);
    r.tables.push(c);
    if a.samples > 0 {
        r.checks.push(Check::near("NS success (min)", lo, 0.25, 1e-10));
        r.checks.push(Check::near("NS success (max)", hi, 0.25, 1e-10));
        r.checks.push(Check::at_most("NS output vs (a0, a1, -a2)", worst, 1e-10));
    }
    r.checks.push(Check::near("C-SIGN entanglement (bits)", cs.entanglement, 1.0, 1e-8));
    r.checks.push(Check::near("C-SIGN success", cs.success, 1.0 / 16.0, 1e-12));
    r.checks.push(Check::near("detected photons", f64::from(cs.detected_photons), 6.0, 0.0));
    Ok(r)
}

pub fn cmd_pdc(a: &PdcArgs) -> Result<Report> {
    let mut r = Report::new("pdc");
    let (p, dist) = match a.tau {
        Some(tau) => {
            let c = PdcCoupling::new(Complex64::new(tau, 0.0));
            (c.p(), metrology::pdc_distribution(&c, a.n_max))
        }
        None => {
            if !(a.p > 0.0 && a.p < 1.0) {
                return Err(Error::Domain(format!("p = {} outside (0, 1)", a.p)));
            }
            (a.p, metrology::pdc_distribution_small_p(a.p, a.n_max))
        }
    };
    let pois = metrology::poisson(dist.mean(), a.n_max);
    let mut t = Table::new("distribution", &["n", "pdc", "poisson"]);
    for (n, (x, y)) in dist.p.iter().zip(&pois.p).enumerate() {
        t.push(vec![n.into(), (*x).into(), (*y).into()]);
    }
    r.tables.push(t);
    let (ds2, needed) = metrology::pdc_poisson_distinguishability(p)?;
    let trials = 1.0 / (p * p);
    let mut s = Table::new(
        "distinguishability",
        &["p", "ds2", "p2_over_8", "ratio", "samples_required", "trials_per_pair_pair", "verdict"],
    );
    // The experiment needs 1/p² trials per two-pair event; when that is within
    // an order of magnitude of 1/ds² the laws separate after a few runs.
    let verdict = if needed / trials <= 10.0 { "distinguishable" } else { "not yet distinguishable" };
    s.push(vec![
        p.into(),
        ds2.into(),
        (p * p / 8.0).into(),
        (ds2 / (p * p / 8.0)).into(),
        needed.into(),
        trials.into(),
        verdict.into(),
    ]);
    r.tables.push(s);
    r.checks.push(Check::near("pdc column sum", dist.total(), 1.0, 10.0 * p * p));
    r.checks.push(Check::near("ds2 / (p^2/8)", ds2 / (p * p / 8.0), 1.0, 0.1));
    Ok(r)
}

fn load_target(a: &LithoArgs) -> Result<(TargetPattern, bool)> {
    match &a.target {
        Some(path) => Ok((TargetPattern::from_file(path, a.grid)?, false)),
        None => Ok((TargetPattern::trench(1.0, a.grid), true)),
    }
}

/// Superposition fit of `target` with branches m < N/2, θ ∈ {0, π}.
pub fn superposition_fit(
    target: TargetPattern,
    n: u32,
    generations: usize,
    np: Option<usize>,
    seed: u64,
) -> Result<(SuperpositionAnsatz, Vec<f64>, f64)> {
    let branches = (0..n.div_ceil(2)).flat_map(|m| [(m, 0.0), (m, std::f64::consts::PI)]).collect();
    let ansatz = SuperpositionAnsatz::new(n, branches, target)?;
    let mut cfg = DeConfig::lithography(ansatz.genes(), seed);
    cfg.gen_max = generations;
    if let Some(np) = np {
        cfg.np = np;
    }
    let res = de_minimize(&cfg, |x| ansatz.cost(x))?;
    Ok((ansatz, res.best, res.best_cost))
}

pub fn cmd_litho_fit(a: &LithoArgs, seed: u64) -> Result<Report> {
    if a.grid < 256 {
        return Err(Error::Domain("--grid must be at least 256".into()));
    }
    let mut r = Report::new("litho-fit");
    let (target, is_trench) = load_target(a)?;
    let fourier = litho::fourier_trench_fit(&target, a.n)?;
    let phis = target.phis();
    let mut summary = Table::new("fit", &["method", "objective", "forbidden_mean", "exposure_time", "penalty_q", "floor_qt"]);
    summary.push(vec![
        "fourier".into(),
        fourier.objective.into(),
        litho::forbidden_mean(&fourier.pattern).into(),
        fourier.t.into(),
        fourier.q.into(),
        fourier.floor().into(),
    ]);
    let mut curves = Table::new("curves", &["phi", "target", "fitted"]);
    match a.method {
        LithoMethod::Fourier => {
            for ((p, f), v) in phis.iter().zip(&target.samples).zip(&fourier.pattern) {
                curves.push(vec![(*p).into(), (*f).into(), (*v).into()]);
            }
        }
        LithoMethod::Superposition => {
            let (ansatz, best, cost) = superposition_fit(target.clone(), a.n, a.generations, a.np, seed)?;
            let t = best[best.len() - 1];
            let pattern: Vec<f64> = ansatz.deposition(&best)?.iter().map(|d| d * t).collect();
            let fm = litho::forbidden_mean(&pattern);
            summary.push(vec!["superposition".into(), cost.into(), fm.into(), t.into(), Cell::Empty, Cell::Empty]);
            for ((p, f), v) in phis.iter().zip(&target.samples).zip(&pattern) {
                curves.push(vec![(*p).into(), (*f).into(), (*v).into()]);
            }
            if is_trench {
                r.checks.push(Check::at_most("superposition forbidden mean / Fourier floor", fm / fourier.floor(), 0.2));
            }
        }
    }
    r.tables.push(summary);
    r.tables.push(curves);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let demo = litho::LithoState1D::new(
        20,
        vec![litho::LithoTerm { m: 9, theta: 0.0, alpha: h }, litho::LithoTerm { m: 5, theta: 0.0, alpha: h }],
    )?;
    let z = litho::deposition_superposition(&demo, std::f64::consts::FRAC_PI_2)
        .max(litho::deposition_superposition(&demo, 1.5 * std::f64::consts::PI));
    r.checks.push(Check::at_most("N = 20, m = 9/5 deposition at pi/2 and 3pi/2", z, 1e-12));
    if is_trench {
        r.checks.push(Check {
            name: "Fourier floor Q t > 0".into(),
            value: fourier.floor(),
            expected: 0.0,
            tolerance: 0.0,
            pass: fourier.floor() > 0.0,
        });
    }
    Ok(r)
}

// ------------------------------------------------------------------ driver

/// Parses a key=value file. Blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Adds `--key=value` for config entries the command line did not set.
fn merge_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let entries = parse_config(&text).map_err(|e| e.to_string())?;
    let cmd = Cli::command();
    let matches = cmd.clone().try_get_matches_from(&args).map_err(|e| e.to_string())?;
    let (sub_name, sub_matches) = matches.subcommand().ok_or("missing subcommand")?;
    let sub_cmd = cmd.find_subcommand(sub_name).ok_or("unknown subcommand")?;
    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err("config files cannot name another config".into());
        }
        let local = sub_cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str()));
        let arg = local
            .or_else(|| cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())))
            .ok_or_else(|| format!("unknown config key '{key}' for {sub_name}"))?;
        let id = arg.get_id().as_str();
        let source = if local.is_some() { sub_matches.value_source(id) } else { matches.value_source(id) };
        let given = source == Some(ValueSource::CommandLine);
        if given {
            continue;
        }
        let is_flag = matches!(arg.get_action(), clap::ArgAction::SetTrue);
        if is_flag {
            match value.as_str() {
                "true" => extra.push(OsString::from(format!("--{key}"))),
                "false" => {}
                other => return Err(format!("config key '{key}' expects true or false, got '{other}'")),
            }
        } else {
            extra.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = args;
    out.extend(extra);
    Ok(out)
}

/// Parses `args` (including the program name), applies any config file and
/// runs the command without writing output.
pub fn build_report<I, T>(args: I) -> Result<Report>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = merge_config(args.into_iter().map(Into::into).collect()).map_err(Error::Parse)?;
    let cli = Cli::try_parse_from(&args).map_err(|e| Error::Parse(e.to_string()))?;
    execute(&cli)
}

/// Runs the parsed command.
pub fn execute(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::NportTable(a) => cmd_nport_table(a, cli.force),
        Command::ConfidenceCurve(a) => cmd_confidence_curve(a),
        Command::Teleport(a) => cmd_teleport(a),
        Command::SwapSpectrum => cmd_swap_spectrum(),
        Command::Ghz => cmd_ghz(),
        Command::Nsgate(a) => cmd_nsgate(a, cli.seed),
        Command::Pdc(a) => cmd_pdc(a),
        Command::LithoFit(a) => cmd_litho_fit(a, cli.seed),
    }
}

fn emit(cli: &Cli, report: &Report) -> std::result::Result<(), String> {
    let text = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    match &cli.out {
        Some(path) => write_file(path, &text, cli.force),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn write_file(path: &Path, text: &str, force: bool) -> std::result::Result<(), String> {
    if path.exists() && !force {
        return Err(format!("{} exists; pass --force to overwrite", path.display()));
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Entry point; returns the process exit code (0 ok, 1 usage or runtime
/// error, 2 when a PASS/FAIL check fails).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: {e}");
        return 1;
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAIL {}: {} (expected {} ± {})", c.name, c.value, c.expected, c.tolerance);
    }
    if report.passed() {
        0
    } else {
        2
    }
}
