//! File formats: equilibrium and report JSON, trajectory, phase and figure
//! CSVs, each with a loader that reads back what the writer produced.

use std::fs;
use std::path::{Path, PathBuf};

use herdfield_core::population::EmpiricalTrajectory;
use herdfield_core::solver::NodeEquilibrium;
use herdfield_core::sweep::{Classification, PhasePoint, PhasePredicate, ThresholdResult};
use herdfield_core::trajectory::{HerdingReport, Trajectory};
use herdfield_core::{
    Action, EquilibriumTable, Grid, ModelParams, Prescription, SelectionRule, Solution,
    SolveReport, ValueTable,
};
use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::format::{fmt_f64, to_json_string};

pub const EQUILIBRIUM_FILE: &str = "equilibrium.json";
pub const SOLVE_REPORT_FILE: &str = "solve_report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const HERDING_FILE: &str = "herding.json";
pub const EMPIRICAL_FILE: &str = "empirical.csv";
pub const PHASE_FILE: &str = "phase.csv";
pub const THRESHOLD_FILE: &str = "threshold.json";

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|e| FormatError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| FormatError::parse(path, e))
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    p1: f64,
    p2: f64,
    alpha: f64,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    n_points: usize,
}

#[derive(Serialize, Deserialize)]
#[allow(non_snake_case)]
struct NodeDoc {
    z1: f64,
    g_minus: f64,
    g_plus: f64,
    V_minus: f64,
    V_plus: f64,
    multiplicity: bool,
    mixing: bool,
}

#[derive(Serialize, Deserialize)]
struct EquilibriumDoc {
    params: ParamsDoc,
    selection: String,
    grid: GridDoc,
    nodes: Vec<NodeDoc>,
}

/// A solved equilibrium as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredEquilibrium {
    pub params: ModelParams,
    pub selection: SelectionRule,
    pub theta: EquilibriumTable,
    pub values: ValueTable,
}

impl From<&Solution> for StoredEquilibrium {
    fn from(s: &Solution) -> Self {
        StoredEquilibrium {
            params: s.params,
            selection: s.selection,
            theta: s.theta.clone(),
            values: s.values.clone(),
        }
    }
}

pub fn equilibrium_json(eq: &StoredEquilibrium) -> String {
    use herdfield_core::AgentType::{Minus, Plus};
    let raw = eq.params.raw();
    let grid = eq.theta.grid();
    let nodes = grid
        .nodes()
        .enumerate()
        .map(|(i, z1)| {
            let node = eq.theta.node(i);
            NodeDoc {
                z1,
                g_minus: node.prescription.g_minus(),
                g_plus: node.prescription.g_plus(),
                V_minus: eq.values.get(i, Minus),
                V_plus: eq.values.get(i, Plus),
                multiplicity: node.multiplicity,
                mixing: node.mixing,
            }
        })
        .collect();
    to_json_string(&EquilibriumDoc {
        params: ParamsDoc {
            p1: raw.p1,
            p2: raw.p2,
            alpha: raw.alpha,
            delta: raw.delta,
        },
        selection: eq.selection.as_str().to_owned(),
        grid: GridDoc {
            n_points: grid.n_points(),
        },
        nodes,
    })
}

pub fn read_equilibrium(path: &Path) -> Result<StoredEquilibrium, FormatError> {
    let doc: EquilibriumDoc = read_json(path)?;
    let bad = |reason: String| FormatError::parse(path, reason);
    let params = ModelParams::new(
        doc.params.p1,
        doc.params.p2,
        doc.params.alpha,
        doc.params.delta,
    )
    .map_err(|e| bad(e.to_string()))?;
    let selection = doc
        .selection
        .parse()
        .map_err(|_| bad(format!("unknown selection rule {:?}", doc.selection)))?;
    let grid = Grid::new(doc.grid.n_points).map_err(|e| bad(e.to_string()))?;
    if doc.nodes.len() != grid.n_points() {
        return Err(bad(format!(
            "{} nodes for a grid of {}",
            doc.nodes.len(),
            grid.n_points()
        )));
    }
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.z1 != grid.node(i) {
            return Err(bad(format!("node {i} has z1 = {} off the grid", n.z1)));
        }
        let prescription =
            Prescription::new(n.g_minus, n.g_plus).map_err(|e| bad(format!("node {i}: {e}")))?;
        nodes.push(NodeEquilibrium {
            prescription,
            multiplicity: n.multiplicity,
            mixing: n.mixing,
        });
    }
    let theta = EquilibriumTable::new(grid, nodes).map_err(|e| bad(e.to_string()))?;
    let values = ValueTable::new(
        grid,
        doc.nodes.iter().map(|n| n.V_minus).collect(),
        doc.nodes.iter().map(|n| n.V_plus).collect(),
    )
    .map_err(|e| bad(e.to_string()))?;
    Ok(StoredEquilibrium {
        params,
        selection,
        theta,
        values,
    })
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct ReportDoc {
    iterations: usize,
    final_sup_change: f64,
    bellman_residual: f64,
    nodes_with_multiplicity: usize,
    nodes_with_mixing: usize,
    converged: bool,
}

pub fn solve_report_json(r: &SolveReport) -> String {
    to_json_string(&ReportDoc {
        iterations: r.iterations,
        final_sup_change: r.final_sup_change,
        bellman_residual: r.bellman_residual,
        nodes_with_multiplicity: r.nodes_with_multiplicity,
        nodes_with_mixing: r.nodes_with_mixing,
        converged: r.converged,
    })
}

pub fn read_solve_report(path: &Path) -> Result<SolveReport, FormatError> {
    let d: ReportDoc = read_json(path)?;
    Ok(SolveReport {
        iterations: d.iterations,
        final_sup_change: d.final_sup_change,
        bellman_residual: d.bellman_residual,
        nodes_with_multiplicity: d.nodes_with_multiplicity,
        nodes_with_mixing: d.nodes_with_mixing,
        converged: d.converged,
    })
}

/// Herding summary of one mean-field run.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct HerdingDoc {
    pub z0: f64,
    pub mu0: f64,
    pub herded: bool,
    pub onset: Option<usize>,
    /// `-1`, `1`, or absent for a mixed herd.
    pub herd_action: Option<i8>,
    pub limit_z1: f64,
    pub limit_mu1: f64,
    pub limit_residual: f64,
    pub limit_converged: bool,
}

impl HerdingDoc {
    pub fn new(traj: &Trajectory, report: &HerdingReport) -> Self {
        let first = traj.points.first();
        HerdingDoc {
            z0: first.map_or(f64::NAN, |p| p.z.z1()),
            mu0: first.map_or(f64::NAN, |p| p.mu.mu1()),
            herded: report.herded,
            onset: report.onset,
            herd_action: report.herd_action.map(Action::as_i8),
            limit_z1: report.limit.z1,
            limit_mu1: report.limit.mu1,
            limit_residual: report.limit.residual,
            limit_converged: report.limit.converged,
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

pub fn read_herding(path: &Path) -> Result<HerdingDoc, FormatError> {
    read_json(path)
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ThresholdDoc {
    pub predicate: String,
    pub alpha_star: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

impl From<&ThresholdResult> for ThresholdDoc {
    fn from(t: &ThresholdResult) -> Self {
        ThresholdDoc {
            predicate: t.predicate.as_str().to_owned(),
            alpha_star: t.alpha_star,
            bracket_lo: t.bracket_lo,
            bracket_hi: t.bracket_hi,
        }
    }
}

impl ThresholdDoc {
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn predicate(&self) -> Option<PhasePredicate> {
        self.predicate.parse().ok()
    }
}

pub fn read_threshold(path: &Path) -> Result<ThresholdDoc, FormatError> {
    let doc: ThresholdDoc = read_json(path)?;
    if doc.predicate().is_none() {
        return Err(FormatError::parse(
            path,
            format!("unknown predicate {:?}", doc.predicate),
        ));
    }
    Ok(doc)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV output is UTF-8")
}

/// Header and rows of a CSV file, with the header checked against `expect`
/// when given.
fn read_csv(
    path: &Path,
    expect: Option<&[&str]>,
) -> Result<(Vec<String>, Vec<csv::StringRecord>), FormatError> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| FormatError::parse(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if let Some(expect) = expect {
        if header != expect {
            return Err(FormatError::parse(
                path,
                format!("expected columns {expect:?}, found {header:?}"),
            ));
        }
    }
    let rows = r
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FormatError::parse(path, e))?;
    Ok((header, rows))
}

fn field<T: std::str::FromStr>(
    path: &Path,
    row: &csv::StringRecord,
    i: usize,
) -> Result<T, FormatError> {
    let raw = row
        .get(i)
        .ok_or_else(|| FormatError::parse(path, "short row"))?;
    raw.parse()
        .map_err(|_| FormatError::parse(path, format!("cannot parse {raw:?}")))
}

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["t", "z1", "g_minus", "g_plus", "mu1"];

/// One mean-field record as stored in CSV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub z1: f64,
    pub g_minus: f64,
    pub g_plus: f64,
    pub mu1: f64,
}

impl TrajectoryRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.t.to_string(),
            fmt_f64(self.z1),
            fmt_f64(self.g_minus),
            fmt_f64(self.g_plus),
            fmt_f64(self.mu1),
        ]
    }
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.points
        .iter()
        .map(|p| TrajectoryRow {
            t: p.t,
            z1: p.z.z1(),
            g_minus: p.gamma.g_minus(),
            g_plus: p.gamma.g_plus(),
            mu1: p.mu.mu1(),
        })
        .collect()
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    csv_text(
        &TRAJECTORY_COLUMNS,
        trajectory_rows(traj).iter().map(TrajectoryRow::fields),
    )
}

fn parse_trajectory_row(path: &Path, r: &csv::StringRecord) -> Result<TrajectoryRow, FormatError> {
    Ok(TrajectoryRow {
        t: field(path, r, 0)?,
        z1: field(path, r, 1)?,
        g_minus: field(path, r, 2)?,
        g_plus: field(path, r, 3)?,
        mu1: field(path, r, 4)?,
    })
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRow>, FormatError> {
    let (_, rows) = read_csv(path, Some(&TRAJECTORY_COLUMNS))?;
    rows.iter().map(|r| parse_trajectory_row(path, r)).collect()
}

pub const EMPIRICAL_COLUMNS: [&str; 9] = [
    "t", "z1", "g_minus", "g_plus", "mu1", "N", "seed", "z1_hat", "mu1_hat",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalRow {
    pub mean_field: TrajectoryRow,
    pub population: usize,
    pub seed: u64,
    pub z1_hat: f64,
    pub mu1_hat: f64,
}

/// Finite-population runs next to the mean-field reference, one block of
/// rows per run.
pub fn empirical_csv(reference: &Trajectory, runs: &[EmpiricalTrajectory]) -> String {
    let mf = trajectory_rows(reference);
    let rows = runs.iter().flat_map(|run| {
        mf.iter().enumerate().map(move |(t, row)| {
            let mut f = row.fields();
            f.push(run.population.to_string());
            f.push(run.seed.to_string());
            f.push(fmt_f64(run.z1_hat[t]));
            f.push(fmt_f64(run.mu1_hat[t]));
            f
        })
    });
    csv_text(&EMPIRICAL_COLUMNS, rows)
}

pub fn read_empirical(path: &Path) -> Result<Vec<EmpiricalRow>, FormatError> {
    let (_, rows) = read_csv(path, Some(&EMPIRICAL_COLUMNS))?;
    rows.iter()
        .map(|r| {
            Ok(EmpiricalRow {
                mean_field: parse_trajectory_row(path, r)?,
                population: field(path, r, 5)?,
                seed: field(path, r, 6)?,
                z1_hat: field(path, r, 7)?,
                mu1_hat: field(path, r, 8)?,
            })
        })
        .collect()
}

/// A phase point as stored in CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub alpha: f64,
    pub classification: Classification,
    /// `(z0, herd action)` per probe.
    pub probes: Vec<(f64, Option<Action>)>,
}

fn probe_column(z0: f64) -> String {
    format!("z0_{z0}")
}

/// Columns `alpha, classification, z0_<probe>...` with cells `-1`, `1` or
/// `none`. Probes are taken from the first classified point.
pub fn phase_csv(points: &[PhasePoint], probes: &[f64]) -> String {
    let mut header = vec!["alpha".to_owned(), "classification".to_owned()];
    header.extend(probes.iter().map(|&z| probe_column(z)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = points.iter().map(|p| {
        let mut row = vec![fmt_f64(p.alpha), p.classification.as_str().to_owned()];
        row.extend(probes.iter().map(|&z| {
            p.outcomes
                .iter()
                .find(|o| o.z0 == z)
                .and_then(|o| o.herd_action)
                .map_or_else(|| "none".to_owned(), |a| a.to_string())
        }));
        row
    });
    csv_text(&header, rows)
}

pub fn read_phase(path: &Path) -> Result<Vec<PhaseRow>, FormatError> {
    let (header, rows) = read_csv(path, None)?;
    if header.len() < 2 || header[0] != "alpha" || header[1] != "classification" {
        return Err(FormatError::parse(
            path,
            format!("unexpected columns {header:?}"),
        ));
    }
    let probes: Vec<f64> = header[2..]
        .iter()
        .map(|h| {
            h.strip_prefix("z0_")
                .and_then(|z| z.parse().ok())
                .ok_or_else(|| FormatError::parse(path, format!("bad probe column {h:?}")))
        })
        .collect::<Result<_, _>>()?;
    rows.iter()
        .map(|r| {
            let classification: String = field(path, r, 1)?;
            let classification = classification.parse().map_err(|_| {
                FormatError::parse(path, format!("unknown classification {classification:?}"))
            })?;
            let outcomes = probes
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    let cell: String = field(path, r, k + 2)?;
                    let action = match cell.as_str() {
                        "none" => None,
                        s => Some(
                            s.parse::<i8>()
                                .ok()
                                .and_then(Action::from_sign)
                                .ok_or_else(|| {
                                    FormatError::parse(path, format!("bad herd action {s:?}"))
                                })?,
                        ),
                    };
                    Ok((z, action))
                })
                .collect::<Result<_, FormatError>>()?;
            Ok(PhaseRow {
                alpha: field(path, r, 0)?,
                classification,
                probes: outcomes,
            })
        })
        .collect()
}

/// Curves over the grid, one per figure.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureBundle {
    pub z1: Vec<f64>,
    /// One step of the mean field under `theta[z]`.
    pub phi: Vec<f64>,
    /// Action share on `+1` under `theta[z]`.
    pub action_share: Vec<f64>,
    pub value_minus: Vec<f64>,
    pub value_plus: Vec<f64>,
    /// Probability of action `+1` for type `-1`.
    pub theta_minus: Vec<f64>,
    /// Probability of action `+1` for type `+1`.
    pub theta_plus: Vec<f64>,
}

pub const FIGURE_FILES: [&str; 6] = [
    "fig_phi.csv",
    "fig_action_share.csv",
    "fig_value_minus.csv",
    "fig_value_plus.csv",
    "fig_theta_minus.csv",
    "fig_theta_plus.csv",
];

const CURVE_COLUMNS: [&str; 2] = ["z1", "value"];

impl FigureBundle {
    pub fn new(theta: &EquilibriumTable, values: &ValueTable, params: &ModelParams) -> Self {
        use herdfield_core::AgentType::{Minus, Plus};
        use herdfield_core::{action_mean_field, propagate, TypeMeanField};
        let grid = theta.grid();
        let z1: Vec<f64> = grid.nodes().collect();
        let at = |i: usize| {
            (
                TypeMeanField::new(z1[i]).expect("grid node"),
                theta.prescription(i),
            )
        };
        let n = z1.len();
        FigureBundle {
            phi: (0..n)
                .map(|i| {
                    let (z, g) = at(i);
                    propagate(z, &g, params).z1()
                })
                .collect(),
            action_share: (0..n)
                .map(|i| {
                    let (z, g) = at(i);
                    action_mean_field(z, &g).mu1()
                })
                .collect(),
            value_minus: values.column(Minus).to_vec(),
            value_plus: values.column(Plus).to_vec(),
            theta_minus: (0..n).map(|i| theta.prescription(i).g_minus()).collect(),
            theta_plus: (0..n).map(|i| theta.prescription(i).g_plus()).collect(),
            z1,
        }
    }

    fn curves(&self) -> [&[f64]; 6] {
        [
            &self.phi,
            &self.action_share,
            &self.value_minus,
            &self.value_plus,
            &self.theta_minus,
            &self.theta_plus,
        ]
    }

    /// Writes one `(z1, value)` CSV per curve into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, FormatError> {
        let mut written = Vec::new();
        for (name, curve) in FIGURE_FILES.iter().zip(self.curves()) {
            let path = dir.join(name);
            let rows = self
                .z1
                .iter()
                .zip(curve)
                .map(|(&z, &v)| vec![fmt_f64(z), fmt_f64(v)]);
            write_text(&path, &csv_text(&CURVE_COLUMNS, rows))?;
            written.push(path);
        }
        Ok(written)
    }

    /// Reads the six curves back from `dir`.
    pub fn read(dir: &Path) -> Result<Self, FormatError> {
        let mut z1 = None;
        let mut curves = Vec::with_capacity(6);
        for name in FIGURE_FILES {
            let (zs, vs) = read_curve(&dir.join(name))?;
            match &z1 {
                None => z1 = Some(zs),
                Some(prev) if *prev != zs => {
                    return Err(FormatError::parse(
                        dir.join(name),
                        "grid differs from the other curves",
                    ));
                }
                Some(_) => {}
            }
            curves.push(vs);
        }
        let mut it = curves.into_iter();
        let mut next = || it.next().expect("six curves");
        Ok(FigureBundle {
            z1: z1.unwrap_or_default(),
            phi: next(),
            action_share: next(),
            value_minus: next(),
            value_plus: next(),
            theta_minus: next(),
            theta_plus: next(),
        })
    }
}

/// `(z1, value)` columns of one figure CSV.
pub fn read_curve(path: &Path) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
    let (_, rows) = read_csv(path, Some(&CURVE_COLUMNS))?;
    let mut z = Vec::with_capacity(rows.len());
    let mut v = Vec::with_capacity(rows.len());
    for r in &rows {
        z.push(field(path, r, 0)?);
        v.push(field(path, r, 1)?);
    }
    Ok((z, v))
}
