//! Gallager LDPC code construction, LP decoding formulations (parity
//! polytope and clique-based), and the decoding pipeline.
//!
//! Parity is EVEN throughout: a word is feasible iff every parity row
//! covers an even number of ones.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hypergraph::{enumerate_lifted_clique_cycles, Clique, Hypergraph};
use crate::lp::{
    classify_and_round, solve_binary_ip_with, solve_lp, LinearProgram, SolveStatus, EPS_INT,
};
use crate::relax::{
    clique_rlt_inequalities, lifted_odd_cycle_inequalities, relaxation_rows, CutFamily, CutRow,
    RelaxationKind,
};

#[derive(Debug, Error)]
pub enum LdpcError {
    #[error("row weight {beta} must divide the code length {n}")]
    Divisibility { n: usize, beta: usize },
    #[error("need beta > gamma >= 2, got beta={beta} gamma={gamma}")]
    DegreeOrder { beta: usize, gamma: usize },
    #[error("could not draw a duplicate-free permutation for block {block} in {retries} tries")]
    RetriesExhausted { block: usize, retries: usize },
    #[error("parity rows do not form a valid clique hypergraph: {0}")]
    BadRows(#[from] crate::hypergraph::HypergraphError),
    #[error("malformed code text at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A regular (n, β, γ) code: n bits, every parity row has β ones,
/// every bit is covered by exactly γ rows, m = nγ/β rows in total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdpcCode {
    pub n: usize,
    pub beta: usize,
    pub gamma: usize,
    pub seed: u64,
    pub parity_rows: Vec<Clique>,
}

impl LdpcCode {
    pub fn m(&self) -> usize {
        self.n * self.gamma / self.beta
    }

    /// Even-parity feasibility of a full word.
    pub fn is_codeword(&self, word: &[bool]) -> bool {
        self.parity_rows.iter().all(|row| {
            row.nodes().iter().filter(|&&v| word[v]).count() % 2 == 0
        })
    }

    /// `n beta gamma m seed` header, then one parity row per line as
    /// 0-based column indices.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.n,
            self.beta,
            self.gamma,
            self.m(),
            self.seed
        );
        for row in &self.parity_rows {
            let cols: Vec<String> = row.nodes().iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cols.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LdpcError> {
        let err = |line: usize, message: &str| LdpcError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(ln + 1, "header must be `n beta gamma m seed`"));
        }
        let parse =
            |i: usize| -> Result<usize, LdpcError> { fields[i].parse().map_err(|_| err(ln + 1, "bad header field")) };
        let n = parse(0)?;
        let beta = parse(1)?;
        let gamma = parse(2)?;
        let m = parse(3)?;
        let seed: u64 = fields[4].parse().map_err(|_| err(ln + 1, "bad seed"))?;
        let mut parity_rows = Vec::with_capacity(m);
        for (ln, line) in lines {
            let cols: Result<Vec<usize>, _> =
                line.split_whitespace().map(|t| t.parse::<usize>()).collect();
            let cols = cols.map_err(|_| err(ln + 1, "bad column index"))?;
            if cols.len() != beta {
                return Err(err(ln + 1, "row weight does not match beta"));
            }
            if cols.iter().any(|&c| c >= n) {
                return Err(err(ln + 1, "column index out of range"));
            }
            parity_rows.push(Clique::new(cols));
        }
        if parity_rows.len() != m {
            return Err(err(text.lines().count(), "row count does not match header"));
        }
        Ok(LdpcCode {
            n,
            beta,
            gamma,
            seed,
            parity_rows,
        })
    }
}

const PERMUTATION_RETRIES: usize = 100;

/// Gallager's regular construction: a base block of n/β disjoint rows,
/// then γ−1 column permutations of it. A permutation producing a row
/// identical to an earlier one is redrawn (duplicates would not be
/// maximal cliques); deterministic per (n, β, γ, seed).
pub fn gallager_parity_check(
    n: usize,
    beta: usize,
    gamma: usize,
    seed: u64,
) -> Result<LdpcCode, LdpcError> {
    if !(2..beta).contains(&gamma) {
        return Err(LdpcError::DegreeOrder { beta, gamma });
    }
    if n % beta != 0 {
        return Err(LdpcError::Divisibility { n, beta });
    }
    let base: Vec<Vec<usize>> = (0..n / beta)
        .map(|i| (i * beta..(i + 1) * beta).collect())
        .collect();
    let mut rows: Vec<Vec<usize>> = base.clone();
    let mut seen: HashSet<Vec<usize>> = rows.iter().cloned().collect();
    for block in 1..gamma {
        let mut placed = false;
        for attempt in 0..PERMUTATION_RETRIES {
            // one independent, replayable stream per (block, attempt)
            let stream = seed ^ ((block as u64) << 32) ^ (attempt as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let block_rows: Vec<Vec<usize>> = base
                .iter()
                .map(|row| {
                    let mut r: Vec<usize> = row.iter().map(|&c| perm[c]).collect();
                    r.sort_unstable();
                    r
                })
                .collect();
            if block_rows.iter().any(|r| seen.contains(r)) {
                continue;
            }
            // rows within the block are disjoint, hence distinct
            for r in block_rows {
                seen.insert(r.clone());
                rows.push(r);
            }
            placed = true;
            break;
        }
        if !placed {
            return Err(LdpcError::RetriesExhausted {
                block,
                retries: PERMUTATION_RETRIES,
            });
        }
    }
    Ok(LdpcCode {
        n,
        beta,
        gamma,
        seed,
        parity_rows: rows.into_iter().map(Clique::new).collect(),
    })
}

/// The even-parity polytope of one row over node variables only:
/// Σ_{i∈S}(1−z_i) + Σ_{i∈C∖S} z_i ≥ 1 for every odd-cardinality
/// S ⊆ C, emitted in ≤ form with the constants folded into the rhs.
pub fn parity_lp_constraints(c: &Clique) -> Vec<CutRow> {
    let nodes = c.nodes();
    let k = nodes.len();
    let mut rows = Vec::with_capacity(1 << (k - 1));
    for s in 0u32..(1 << k) {
        if s.count_ones() % 2 == 0 {
            continue;
        }
        let mut map = BTreeMap::new();
        for (i, &v) in nodes.iter().enumerate() {
            map.insert(v, if s & (1 << i) != 0 { 1i64 } else { -1 });
        }
        let rhs = s.count_ones() as i64 - 1;
        let members: Vec<String> = nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| s & (1 << i) != 0)
            .map(|(_, v)| v.to_string())
            .collect();
        rows.push(CutRow {
            family: CutFamily::Parity,
            provenance: format!("C={c} S={{{}}}", members.join(",")),
            coeffs: map.into_iter().collect(),
            rel: crate::lp::Relation::Le,
            rhs,
        });
    }
    rows
}

/// The exact description of one parity row's even-parity multilinear
/// set: the clique's RLT rows plus the single equality
/// Σ_{∅≠p⊆C} (−2)^{|p|−1} z_p = 0 (which evaluates to the parity of
/// the word restricted to C).
pub fn clique_decode_constraints(
    h: &Hypergraph,
    clique_index: usize,
) -> Vec<CutRow> {
    let clique = &h.cliques()[clique_index];
    let nodes = clique.nodes();
    let k = nodes.len();
    let mut map = BTreeMap::new();
    for p in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k)
            .filter(|i| p & (1 << i) != 0)
            .map(|i| nodes[i])
            .collect();
        let slot = h
            .slot(&members)
            .expect("clique subsets always have slots in their own hypergraph");
        let coeff = (-2i64).pow(p.count_ones() - 1);
        *map.entry(slot).or_insert(0) += coeff;
    }
    let mut rows = clique_rlt_inequalities(h, clique_index);
    rows.push(
        CutRow::equality(
            CutFamily::ParityEquality,
            format!("C={clique}"),
            map,
            0,
        )
        .expect("parity equality is never empty"),
    );
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMethod {
    /// Jeroslow parity rows over node variables only.
    ParityLp,
    /// Per-row RLT plus parity equalities over the full slot space.
    CliqueLp,
    /// CliqueLp plus lifted odd-cycle rows for cycles of parity rows
    /// of length at most M.
    MultiCliqueLp(usize),
    /// Exact decoding by branch-and-bound over the CliqueLp rows.
    Ip,
    /// Experimental: a weaker relaxation of the multilinear set plus
    /// the parity equalities.
    StandardLp,
    FlowerLp,
    RunningIntersectionLp,
}

impl DecodeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DecodeMethod::ParityLp => "parLP",
            DecodeMethod::CliqueLp => "cliqueLP",
            DecodeMethod::MultiCliqueLp(_) => "McliqueLP",
            DecodeMethod::Ip => "IP",
            DecodeMethod::StandardLp => "stdLP",
            DecodeMethod::FlowerLp => "flLP",
            DecodeMethod::RunningIntersectionLp => "runLP",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "parLP" => Some(DecodeMethod::ParityLp),
            "cliqueLP" => Some(DecodeMethod::CliqueLp),
            "McliqueLP" => Some(DecodeMethod::MultiCliqueLp(4)),
            "IP" => Some(DecodeMethod::Ip),
            "stdLP" => Some(DecodeMethod::StandardLp),
            "flLP" => Some(DecodeMethod::FlowerLp),
            "runLP" => Some(DecodeMethod::RunningIntersectionLp),
            _ => None,
        }
    }
}

impl fmt::Display for DecodeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The channel objective Σ_{y_v=1} z_v − Σ_{y_v=0} z_v subject to the
/// decoding constraints of the chosen method.
pub fn build_decoder(
    code: &LdpcCode,
    y: &[bool],
    method: DecodeMethod,
) -> Result<LinearProgram, LdpcError> {
    assert_eq!(y.len(), code.n, "observed word length must match the code");
    let objective: Vec<(usize, f64)> = y
        .iter()
        .enumerate()
        .map(|(v, &b)| (v, if b { 1.0 } else { -1.0 }))
        .collect();

    if method == DecodeMethod::ParityLp {
        let mut lp = LinearProgram::new(code.n, code.n);
        lp.var_names = (0..code.n).map(|v| format!("z{v}")).collect();
        lp.objective = objective;
        for row in &code.parity_rows {
            for cut in parity_lp_constraints(row) {
                let (coeffs, rel, rhs) = cut.to_lp_row();
                lp.push_row(coeffs, rel, rhs);
            }
        }
        return Ok(lp);
    }

    let h = Hypergraph::build(code.parity_rows.clone(), code.n)?;
    let mut lp = LinearProgram::new(h.num_slots(), code.n);
    lp.var_names = (0..h.num_slots()).map(|s| h.slot_name(s)).collect();
    lp.objective = objective;
    let mut rows: Vec<CutRow> = Vec::new();
    match method {
        DecodeMethod::ParityLp => unreachable!(),
        DecodeMethod::CliqueLp | DecodeMethod::Ip => {
            for i in 0..h.cliques().len() {
                rows.extend(clique_decode_constraints(&h, i));
            }
        }
        DecodeMethod::MultiCliqueLp(m) => {
            assert!(m >= 3, "cycle length bound must be at least 3");
            for i in 0..h.cliques().len() {
                rows.extend(clique_decode_constraints(&h, i));
            }
            for cyc in enumerate_lifted_clique_cycles(h.cliques(), m) {
                rows.extend(
                    lifted_odd_cycle_inequalities(&h, &cyc)
                        .expect("enumerated cycles are embedded"),
                );
            }
        }
        DecodeMethod::StandardLp | DecodeMethod::FlowerLp | DecodeMethod::RunningIntersectionLp => {
            let kind = match method {
                DecodeMethod::StandardLp => RelaxationKind::Standard,
                DecodeMethod::FlowerLp => RelaxationKind::Flower,
                _ => RelaxationKind::RunningIntersection,
            };
            rows.extend(relaxation_rows(&h, kind));
            for i in 0..h.cliques().len() {
                let all = clique_decode_constraints(&h, i);
                rows.push(all.into_iter().last().expect("equality row present"));
            }
        }
    }
    let mut seen = HashSet::new();
    for cut in rows {
        if seen.insert((cut.coeffs.clone(), cut.rel == crate::lp::Relation::Eq, cut.rhs)) {
            let (coeffs, rel, rhs) = cut.to_lp_row();
            lp.push_row(coeffs, rel, rhs);
        }
    }
    Ok(lp)
}

#[derive(Clone, Debug)]
pub struct DecodeReport {
    pub method: DecodeMethod,
    pub status: SolveStatus,
    pub lp_value: f64,
    pub solution: Vec<f64>,
    pub is_binary: bool,
    /// Node variables rounded to a word.
    pub decoded: Vec<bool>,
    /// Fraction of bits agreeing with the all-zero ground truth.
    pub partial_recovery: f64,
    pub wall_time: f64,
}

/// Slack under the proven optimum accepted when re-optimizing for the
/// sparsest optimal solution.
const TIE_BREAK_SLACK: f64 = 1e-7;

/// Decodes the observed word and scores it against the all-zero
/// codeword (the transmitted word in all experiments).
///
/// The channel objective gives every bit the same log-odds weight, so
/// distinct codewords frequently tie at the optimum on short codes.
/// Ties are broken deterministically toward the minimum-weight optimum
/// by a second, lexicographic solve: minimize the number of ones
/// subject to staying within [`TIE_BREAK_SLACK`] of the proven value.
pub fn decode(code: &LdpcCode, y: &[bool], method: DecodeMethod) -> Result<DecodeReport, LdpcError> {
    decode_with_budget(code, y, method, crate::lp::IpOptions::default())
}

/// [`decode`] with an explicit branch-and-bound node budget for the
/// IP method.
pub fn decode_with_budget(
    code: &LdpcCode,
    y: &[bool],
    method: DecodeMethod,
    opts: crate::lp::IpOptions,
) -> Result<DecodeReport, LdpcError> {
    let lp = build_decoder(code, y, method)?;
    let solve_phase = |lp: &crate::lp::LinearProgram| -> crate::lp::SolveReport {
        if method == DecodeMethod::Ip {
            let binaries: Vec<usize> = (0..code.n).collect();
            let r = solve_binary_ip_with(lp, &binaries, opts);
            crate::lp::SolveReport {
                status: r.status,
                objective_value: r.objective_value,
                solution: r.solution,
                is_binary: r.is_binary,
                num_node_vars: r.num_node_vars,
                iterations: r.iterations,
                wall_time: r.wall_time,
            }
        } else {
            solve_lp(lp)
        }
    };
    let mut report = solve_phase(&lp);
    let status = report.status;
    let primary_value = report.objective_value;
    let primary_time = report.wall_time;
    if status == SolveStatus::Optimal {
        let mut tie = lp.clone();
        tie.push_row(
            lp.objective.clone(),
            crate::lp::Relation::Ge,
            primary_value - TIE_BREAK_SLACK,
        );
        tie.objective = (0..code.n).map(|v| (v, -1.0)).collect();
        let sparse = solve_phase(&tie);
        if sparse.status == SolveStatus::Optimal {
            report = sparse;
            report.objective_value = primary_value;
            report.wall_time += primary_time;
        }
    }
    let (is_binary, decoded) = classify_and_round(&report, EPS_INT);
    let partial_recovery =
        decoded.iter().filter(|&&b| !b).count() as f64 / code.n as f64;
    Ok(DecodeReport {
        method,
        status,
        lp_value: report.objective_value,
        solution: report.solution,
        is_binary,
        decoded,
        partial_recovery,
        wall_time: report.wall_time,
    })
}
