//! Linear programs, the LP solver front end, branch-and-bound for the
//! binary integer program, and the textual LP export format.
//!
//! All programs are maximization problems with default variable bounds
//! [0, 1]. Solving is delegated to the HiGHS simplex solver, pinned to
//! one thread so runs are deterministic for identical input, which is
//! what the replay and golden-file tests rely on.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

/// Row feasibility tolerance.
pub const EPS_FEAS: f64 = 1e-7;
/// Integrality classification tolerance.
pub const EPS_INT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

/// A sparse maximization LP over [0,1]-bounded variables.
///
/// Slots 0..num_node_vars are the node variables of the originating
/// model; the rest are auxiliary (edge) variables. Only node variables
/// count for integrality classification and branching.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub num_node_vars: usize,
    pub objective: Vec<(usize, f64)>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
    pub var_names: Vec<String>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, num_node_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            num_node_vars,
            objective: Vec::new(),
            rows: Vec::new(),
            bounds: vec![(0.0, 1.0); num_vars],
            var_names: (0..num_vars).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn push_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_vars));
        self.rows.push(LpRow { coeffs, rel, rhs });
    }

    /// Objective value of a full assignment, summed in slot order.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub solution: Vec<f64>,
    /// True iff every node variable is within [`EPS_INT`] of {0,1}.
    pub is_binary: bool,
    pub num_node_vars: usize,
    pub iterations: usize,
    pub wall_time: f64,
}

#[derive(Clone, Debug)]
pub struct IpReport {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub solution: Vec<f64>,
    pub is_binary: bool,
    pub num_node_vars: usize,
    pub iterations: usize,
    pub wall_time: f64,
    pub nodes_explored: usize,
    pub proven_optimal: bool,
    pub best_bound: f64,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed LP text at line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn backend_solve(lp: &LinearProgram, bounds: &[(f64, f64)]) -> (SolveStatus, f64, Vec<f64>) {
    use highs::{HighsModelStatus, RowProblem, Sense};

    let mut problem = RowProblem::default();
    let mut obj_dense = vec![0.0; lp.num_vars];
    for &(j, c) in &lp.objective {
        obj_dense[j] += c;
    }
    let cols: Vec<highs::Col> = (0..lp.num_vars)
        .map(|j| problem.add_column(obj_dense[j], bounds[j].0..=bounds[j].1))
        .collect();
    for row in &lp.rows {
        let expr: Vec<(highs::Col, f64)> =
            row.coeffs.iter().map(|&(j, c)| (cols[j], c)).collect();
        match row.rel {
            Relation::Le => problem.add_row(..=row.rhs, &expr),
            Relation::Eq => problem.add_row(row.rhs..=row.rhs, &expr),
            Relation::Ge => problem.add_row(row.rhs.., &expr),
        }
    }
    let mut model = problem.optimise(Sense::Maximise);
    // Single-threaded, silent simplex: runs are deterministic and the
    // solutions are vertices of the feasible region, so integrality of
    // an optimal solution is detectable from the solution itself.
    model.set_option("output_flag", false);
    model.set_option("threads", 1);
    model.set_option("solver", "simplex");
    let solved = model.solve();
    match solved.status() {
        HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
            let x = solved.get_solution().columns().to_vec();
            let mut x = x;
            x.resize(lp.num_vars, 0.0);
            let objective: f64 = obj_dense.iter().zip(&x).map(|(c, v)| c * v).sum();
            (SolveStatus::Optimal, objective, x)
        }
        HighsModelStatus::Infeasible => {
            (SolveStatus::Infeasible, f64::NEG_INFINITY, vec![0.0; lp.num_vars])
        }
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
            (SolveStatus::Unbounded, f64::INFINITY, vec![0.0; lp.num_vars])
        }
        _ => (SolveStatus::IterationLimit, f64::NAN, vec![0.0; lp.num_vars]),
    }
}

/// Solves the LP. Infeasibility and unboundedness are reported through
/// the status, never as a panic.
pub fn solve_lp(lp: &LinearProgram) -> SolveReport {
    let start = Instant::now();
    let (status, objective_value, solution) = backend_solve(lp, &lp.bounds);
    let wall_time = start.elapsed().as_secs_f64();
    let is_binary = status == SolveStatus::Optimal
        && solution[..lp.num_node_vars]
            .iter()
            .all(|&x| (x - x.round()).abs() <= EPS_INT && (0.0..=1.0).contains(&x.round()));
    SolveReport {
        status,
        objective_value,
        solution,
        is_binary,
        num_node_vars: lp.num_node_vars,
        iterations: 0,
        wall_time,
    }
}

/// Integrality classification and rounding of the node variables.
///
/// Values within `tol` of an integer are snapped; anything else rounds
/// to nearest with the 0.5 tie going to 0. Idempotent on binary input.
pub fn classify_and_round(report: &SolveReport, tol: f64) -> (bool, Vec<bool>) {
    let nodes = &report.solution[..report.num_node_vars];
    let is_binary = nodes.iter().all(|&x| (x - x.round()).abs() <= tol);
    let rounded = nodes
        .iter()
        .map(|&x| {
            if (x - x.round()).abs() <= tol {
                x.round() >= 1.0
            } else {
                x > 0.5
            }
        })
        .collect();
    (is_binary, rounded)
}

#[derive(Clone, Copy, Debug)]
pub struct IpOptions {
    /// Branch-and-bound node budget; exhaustion yields status
    /// `IterationLimit` with the best incumbent.
    pub max_nodes: usize,
}

impl Default for IpOptions {
    fn default() -> Self {
        IpOptions { max_nodes: 1_000_000 }
    }
}

/// Exact optimization over binary assignments to `binary_vars` by
/// branch-and-bound with LP bounding.
///
/// Branching picks the most fractional binary variable (ties by lowest
/// index); auxiliary variables are never branched, their LP values
/// become integral once the binary variables are fixed.
pub fn solve_binary_ip(lp: &LinearProgram, binary_vars: &[usize]) -> IpReport {
    solve_binary_ip_with(lp, binary_vars, IpOptions::default())
}

pub fn solve_binary_ip_with(lp: &LinearProgram, binary_vars: &[usize], opts: IpOptions) -> IpReport {
    let start = Instant::now();

    struct Node {
        fixings: Vec<(usize, f64)>,
        parent_bound: f64,
    }

    let mut stack = vec![Node {
        fixings: Vec::new(),
        parent_bound: f64::INFINITY,
    }];
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes_explored = 0usize;
    let mut exhausted = false;
    let mut any_feasible_lp = false;

    while let Some(node) = stack.pop() {
        if nodes_explored >= opts.max_nodes {
            exhausted = true;
            // the popped node still counts toward the open bound
            stack.push(node);
            break;
        }
        if let Some((inc_val, _)) = &incumbent {
            if node.parent_bound <= *inc_val + 1e-9 {
                continue;
            }
        }
        nodes_explored += 1;

        let mut bounds = lp.bounds.clone();
        for &(j, v) in &node.fixings {
            bounds[j] = (v, v);
        }
        let (status, bound, x) = backend_solve(lp, &bounds);
        match status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Optimal => {}
            _ => continue,
        }
        any_feasible_lp = true;
        if let Some((inc_val, _)) = &incumbent {
            if bound <= *inc_val + 1e-9 {
                continue;
            }
        }

        // most fractional binary variable, ties by lowest index
        let mut branch: Option<(usize, f64)> = None;
        let mut best_score = EPS_INT;
        for &j in binary_vars {
            let frac = x[j] - x[j].floor();
            let score = frac.min(1.0 - frac);
            if score > best_score {
                best_score = score;
                branch = Some((j, x[j]));
            }
        }

        match branch {
            None => {
                // integral on the binary variables
                if incumbent.as_ref().is_none_or(|(v, _)| bound > *v) {
                    let mut snapped = x;
                    for &j in binary_vars {
                        snapped[j] = snapped[j].round();
                    }
                    incumbent = Some((bound, snapped));
                }
            }
            Some((j, xj)) => {
                let first = if xj > 0.5 { 1.0 } else { 0.0 };
                for v in [1.0 - first, first] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    stack.push(Node {
                        fixings,
                        parent_bound: bound,
                    });
                }
            }
        }
    }

    let wall_time = start.elapsed().as_secs_f64();
    let open_bound = stack
        .iter()
        .map(|n| n.parent_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    match incumbent {
        Some((value, solution)) => {
            let status = if exhausted {
                SolveStatus::IterationLimit
            } else {
                SolveStatus::Optimal
            };
            IpReport {
                status,
                objective_value: value,
                solution,
                is_binary: true,
                num_node_vars: lp.num_node_vars,
                iterations: 0,
                wall_time,
                nodes_explored,
                proven_optimal: !exhausted,
                best_bound: if exhausted { open_bound.max(value) } else { value },
            }
        }
        None => IpReport {
            status: if exhausted {
                SolveStatus::IterationLimit
            } else if any_feasible_lp {
                // feasible LPs but no integral point found
                SolveStatus::Infeasible
            } else {
                SolveStatus::Infeasible
            },
            objective_value: f64::NEG_INFINITY,
            solution: vec![0.0; lp.num_vars],
            is_binary: false,
            num_node_vars: lp.num_node_vars,
            iterations: 0,
            wall_time,
            nodes_explored,
            proven_optimal: false,
            best_bound: open_bound,
        },
    }
}

/// Writes the LP in the conventional textual format, byte-stable for
/// identical input.
pub fn write_lp_text(lp: &LinearProgram) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "\\ nodes {}", lp.num_node_vars).unwrap();
    out.push_str("Maximize\n obj:");
    for &(j, c) in &lp.objective {
        write_term(&mut out, c, &lp.var_names[j]);
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        write!(out, " c{i}:").unwrap();
        for &(j, c) in &row.coeffs {
            write_term(&mut out, c, &lp.var_names[j]);
        }
        writeln!(out, " {} {}", row.rel, row.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars {
        writeln!(out, " {} <= {} <= {}", lp.bounds[j].0, lp.var_names[j], lp.bounds[j].1).unwrap();
    }
    out.push_str("End\n");
    out
}

fn write_term(out: &mut String, c: f64, name: &str) {
    use std::fmt::Write;
    if c >= 0.0 {
        write!(out, " +{c} {name}").unwrap();
    } else {
        write!(out, " -{} {name}", -c).unwrap();
    }
}

/// Parses the format produced by [`write_lp_text`].
pub fn parse_lp_text(text: &str) -> Result<LinearProgram, LpError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Done,
    }

    let err = |line: usize, message: &str| LpError::Parse {
        line,
        message: message.to_string(),
    };

    let mut num_node_vars = 0usize;
    let mut section = Section::Preamble;
    let mut objective_line = String::new();
    let mut row_lines: Vec<(usize, String)> = Vec::new();
    let mut bound_lines: Vec<(usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            let rest = rest.trim();
            if let Some(n) = rest.strip_prefix("nodes ") {
                num_node_vars = n
                    .trim()
                    .parse()
                    .map_err(|_| err(idx + 1, "bad node count"))?;
            }
            continue;
        }
        match line {
            "Maximize" => section = Section::Objective,
            "Subject To" => section = Section::Rows,
            "Bounds" => section = Section::Bounds,
            "End" => section = Section::Done,
            _ => match section {
                Section::Objective => objective_line.push_str(line),
                Section::Rows => row_lines.push((idx + 1, line.to_string())),
                Section::Bounds => bound_lines.push((idx + 1, line.to_string())),
                _ => return Err(err(idx + 1, "content outside any section")),
            },
        }
    }
    if section != Section::Done {
        return Err(err(text.lines().count(), "missing End"));
    }

    // variable order comes from the Bounds section
    let mut var_names = Vec::new();
    let mut bounds = Vec::new();
    let mut index_of = std::collections::HashMap::new();
    for (line_no, line) in &bound_lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 || parts[1] != "<=" || parts[3] != "<=" {
            return Err(err(*line_no, "expected `lo <= name <= hi`"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| err(*line_no, "bad lower bound"))?;
        let hi: f64 = parts[4].parse().map_err(|_| err(*line_no, "bad upper bound"))?;
        index_of.insert(parts[2].to_string(), var_names.len());
        var_names.push(parts[2].to_string());
        bounds.push((lo, hi));
    }

    let parse_terms = |line_no: usize, tokens: &[&str]| -> Result<Vec<(usize, f64)>, LpError> {
        if tokens.len() % 2 != 0 {
            return Err(err(line_no, "unpaired coefficient/name tokens"));
        }
        let mut coeffs = Vec::with_capacity(tokens.len() / 2);
        for pair in tokens.chunks(2) {
            let c: f64 = pair[0].parse().map_err(|_| err(line_no, "bad coefficient"))?;
            let j = *index_of
                .get(pair[1])
                .ok_or_else(|| err(line_no, "unknown variable"))?;
            coeffs.push((j, c));
        }
        Ok(coeffs)
    };

    let mut lp = LinearProgram::new(var_names.len(), num_node_vars);
    lp.var_names = var_names;
    lp.bounds = bounds;

    let obj_tokens: Vec<&str> = objective_line.split_whitespace().collect();
    if obj_tokens.is_empty() || !obj_tokens[0].ends_with(':') {
        return Err(err(0, "missing objective label"));
    }
    lp.objective = parse_terms(0, &obj_tokens[1..])?;

    for (line_no, line) in &row_lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 4 || !tokens[0].ends_with(':') {
            return Err(err(*line_no, "malformed constraint row"));
        }
        let rel = match tokens[tokens.len() - 2] {
            "<=" => Relation::Le,
            "=" => Relation::Eq,
            ">=" => Relation::Ge,
            _ => return Err(err(*line_no, "unknown relation")),
        };
        let rhs: f64 = tokens[tokens.len() - 1]
            .parse()
            .map_err(|_| err(*line_no, "bad right-hand side"))?;
        let coeffs = parse_terms(*line_no, &tokens[1..tokens.len() - 2])?;
        lp.push_row(coeffs, rel, rhs);
    }
    Ok(lp)
}
