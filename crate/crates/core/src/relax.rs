//! Cutting-plane families over a UGM hypergraph and assembly of the
//! five LP relaxations of the multilinear polytope.
//!
//! All families are generated up front (no separation loops) and
//! per-clique: the standard linearization rows, flower inequalities,
//! running-intersection inequalities, the full RLT description of each
//! clique's multilinear polytope, and lifted odd-cycle inequalities for
//! short cycles of cliques. Every row has integer coefficients, which
//! keeps canonicalization, deduplication and exhaustive validity checks
//! exact.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::hypergraph::{Hypergraph, LiftedCliqueCycle, NodeId};
use crate::lp::{LinearProgram, Relation};
use crate::objective::MultilinearObjective;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxationKind {
    Standard,
    Flower,
    RunningIntersection,
    Clique,
    /// Clique relaxation plus lifted odd-cycle rows for cycles of
    /// cliques of length at most M (M ≥ 3).
    MultiClique(usize),
}

impl RelaxationKind {
    pub fn name(&self) -> &'static str {
        match self {
            RelaxationKind::Standard => "stdLP",
            RelaxationKind::Flower => "flLP",
            RelaxationKind::RunningIntersection => "runLP",
            RelaxationKind::Clique => "cliqueLP",
            RelaxationKind::MultiClique(_) => "McliqueLP",
        }
    }
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutFamily {
    StandardLinearization,
    Flower,
    RunningIntersection,
    CliqueRlt,
    LiftedOddCycle,
    Parity,
    ParityEquality,
}

impl fmt::Display for CutFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutFamily::StandardLinearization => "std",
            CutFamily::Flower => "flower",
            CutFamily::RunningIntersection => "run-int",
            CutFamily::CliqueRlt => "clique-rlt",
            CutFamily::LiftedOddCycle => "lifted-odd-cycle",
            CutFamily::Parity => "parity",
            CutFamily::ParityEquality => "parity-eq",
        })
    }
}

/// One generated inequality in canonical `Σ a_j x_j ≤ rhs` form with
/// integer coefficients, terms sorted by slot.
///
/// The provenance string records the generating tuple (center edge,
/// neighbors, w-sets, RLT subset, or cycle chord set) so a row can be
/// re-derived and audited independently of its coefficients.
#[derive(Clone, Debug)]
pub struct CutRow {
    pub family: CutFamily,
    pub provenance: String,
    pub coeffs: Vec<(usize, i64)>,
    /// `Le` for every inequality family; `Eq` only for parity equality
    /// rows. `Ge` never survives canonicalization.
    pub rel: Relation,
    pub rhs: i64,
}

impl CutRow {
    /// Builds the canonical `≤` form from an accumulated coefficient
    /// map; `None` if every coefficient cancels.
    fn from_map(
        family: CutFamily,
        provenance: String,
        map: BTreeMap<usize, i64>,
        rhs: i64,
    ) -> Option<CutRow> {
        let coeffs: Vec<(usize, i64)> = map.into_iter().filter(|&(_, a)| a != 0).collect();
        if coeffs.is_empty() {
            return None;
        }
        Some(CutRow {
            family,
            provenance,
            coeffs,
            rel: Relation::Le,
            rhs,
        })
    }

    /// An equality row; the sign is normalized so the first coefficient
    /// is positive.
    pub fn equality(
        family: CutFamily,
        provenance: String,
        map: BTreeMap<usize, i64>,
        rhs: i64,
    ) -> Option<CutRow> {
        let mut coeffs: Vec<(usize, i64)> = map.into_iter().filter(|&(_, a)| a != 0).collect();
        if coeffs.is_empty() {
            return None;
        }
        let mut rhs = rhs;
        if coeffs[0].1 < 0 {
            for c in &mut coeffs {
                c.1 = -c.1;
            }
            rhs = -rhs;
        }
        Some(CutRow {
            family,
            provenance,
            coeffs,
            rel: Relation::Eq,
            rhs,
        })
    }

    fn dedup_key(&self) -> (Vec<(usize, i64)>, bool, i64) {
        (self.coeffs.clone(), self.rel == Relation::Eq, self.rhs)
    }

    pub fn to_lp_row(&self) -> (Vec<(usize, f64)>, Relation, f64) {
        (
            self.coeffs.iter().map(|&(j, a)| (j, a as f64)).collect(),
            self.rel,
            self.rhs as f64,
        )
    }

    /// `<family> <provenance> : <canonical linear form>` using the
    /// hypergraph's slot names; the golden-file dump format.
    pub fn dump_line(&self, h: &Hypergraph) -> String {
        use std::fmt::Write;
        let mut out = format!("{} {} :", self.family, self.provenance);
        for &(j, a) in &self.coeffs {
            if a >= 0 {
                write!(out, " +{} {}", a, h.slot_name(j)).unwrap();
            } else {
                write!(out, " -{} {}", -a, h.slot_name(j)).unwrap();
            }
        }
        write!(out, " {} {}", self.rel, self.rhs).unwrap();
        out
    }
}

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("cycle is not embedded in the hypergraph: no slot for {{{0}}}")]
    MissingCycleSlot(String),
}

// --- per-clique bit-mask context -----------------------------------------

/// Node subsets of one clique as bit masks over the clique's sorted
/// node list. Rank is capped at 16, so u32 masks are enough.
struct CliqueCtx<'a> {
    h: &'a Hypergraph,
    nodes: &'a [NodeId],
}

impl CliqueCtx<'_> {
    fn slot_of_mask(&self, mask: u32) -> usize {
        debug_assert!(mask != 0);
        if mask.count_ones() == 1 {
            return self.h.node_slot(self.nodes[mask.trailing_zeros() as usize]);
        }
        let nodes: Vec<NodeId> = self.mask_nodes(mask);
        self.h
            .edge_slot(&nodes)
            .expect("clique subset must have an edge slot")
    }

    fn mask_nodes(&self, mask: u32) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| self.nodes[i])
            .collect()
    }

    fn set_name(&self, mask: u32) -> String {
        let names: Vec<String> = self.mask_nodes(mask).iter().map(|v| v.to_string()).collect();
        format!("{{{}}}", names.join(","))
    }
}

// --- standard linearization ----------------------------------------------

/// The linearization rows of every edge: nonnegativity, the lower
/// product bound, and one upper bound per member node (|e| + 2 rows per
/// edge). Node bounds 0 ≤ z_v ≤ 1 live in the variable bounds.
pub fn standard_linearization(h: &Hypergraph) -> Vec<CutRow> {
    let mut rows = Vec::new();
    for (i, e) in h.edges().iter().enumerate() {
        let se = h.num_slots() - h.edges().len() + i;
        debug_assert_eq!(Some(se), h.edge_slot(e.nodes()));
        let prov = |tag: &str| format!("e={} {}", e, tag);
        // z_e >= 0  ->  -z_e <= 0
        rows.push(CutRow {
            family: CutFamily::StandardLinearization,
            provenance: prov("nonneg"),
            coeffs: vec![(se, -1)],
            rel: Relation::Le,
            rhs: 0,
        });
        // z_e >= sum z_v - |e| + 1  ->  sum z_v - z_e <= |e| - 1
        let mut map = BTreeMap::new();
        for &v in e.nodes() {
            *map.entry(h.node_slot(v)).or_insert(0) += 1;
        }
        *map.entry(se).or_insert(0) -= 1;
        rows.push(CutRow::from_map(
            CutFamily::StandardLinearization,
            prov("lower"),
            map,
            e.len() as i64 - 1,
        )
        .expect("nontrivial row"));
        // z_e <= z_v
        for &v in e.nodes() {
            let mut map = BTreeMap::new();
            map.insert(se, 1);
            *map.entry(h.node_slot(v)).or_insert(0) -= 1;
            rows.push(
                CutRow::from_map(
                    CutFamily::StandardLinearization,
                    prov(&format!("upper v={v}")),
                    map,
                    0,
                )
                .expect("nontrivial row"),
            );
        }
    }
    rows
}

// --- flower inequalities --------------------------------------------------

/// True iff every neighbor contributes at least two nodes of its
/// intersection with the center that are exclusive against all other
/// neighbors. Anti-monotone under extending the neighbor set.
fn flower_condition(e0: u32, picked: &[u32]) -> bool {
    picked.iter().enumerate().all(|(k, &ek)| {
        let mut excl = e0 & ek;
        for (j, &ej) in picked.iter().enumerate() {
            if j != k {
                excl &= !(e0 & ej);
            }
        }
        excl.count_ones() >= 2
    })
}

fn flower_row(ctx: &CliqueCtx, e0: u32, picked: &[u32]) -> Option<CutRow> {
    let union: u32 = picked.iter().fold(0, |a, &m| a | m);
    let outside = e0 & !union;
    let mut map = BTreeMap::new();
    let mut m = outside;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        *map.entry(ctx.slot_of_mask(bit)).or_insert(0) += 1;
        m ^= bit;
    }
    for &ek in picked {
        *map.entry(ctx.slot_of_mask(ek)).or_insert(0) += 1;
    }
    *map.entry(ctx.slot_of_mask(e0)).or_insert(0) -= 1;
    let rhs = outside.count_ones() as i64 + picked.len() as i64 - 1;
    let prov = format!(
        "e0={} T=[{}]",
        ctx.set_name(e0),
        picked
            .iter()
            .map(|&m| ctx.set_name(m))
            .collect::<Vec<_>>()
            .join(",")
    );
    CutRow::from_map(CutFamily::Flower, prov, map, rhs)
}

fn flower_rows_for_clique(ctx: &CliqueCtx, out: &mut Vec<CutRow>) {
    let n = ctx.nodes.len();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut edge_masks: Vec<u32> = (1..=full).filter(|m| m.count_ones() >= 2).collect();
    edge_masks.sort_by_key(|&m| (m.count_ones(), m));

    for &e0 in &edge_masks {
        // candidate neighbors must share >= 2 nodes with the center
        let cands: Vec<u32> = edge_masks
            .iter()
            .copied()
            .filter(|&c| (c & e0).count_ones() >= 2)
            .collect();
        let mut picked = Vec::new();
        grow_flowers(ctx, e0, &cands, 0, &mut picked, out);
    }
}

fn grow_flowers(
    ctx: &CliqueCtx,
    e0: u32,
    cands: &[u32],
    from: usize,
    picked: &mut Vec<u32>,
    out: &mut Vec<CutRow>,
) {
    for i in from..cands.len() {
        picked.push(cands[i]);
        if flower_condition(e0, picked) {
            if let Some(row) = flower_row(ctx, e0, picked) {
                out.push(row);
            }
            grow_flowers(ctx, e0, cands, i + 1, picked, out);
        }
        picked.pop();
    }
}

/// All flower inequalities whose center and neighbors fit inside one
/// clique; out-of-clique flowers are implied by these.
pub fn flower_inequalities(h: &Hypergraph) -> Vec<CutRow> {
    let mut rows = Vec::new();
    for c in h.cliques() {
        let ctx = CliqueCtx { h, nodes: c.nodes() };
        flower_rows_for_clique(&ctx, &mut rows);
    }
    rows
}

// --- running intersection inequalities -----------------------------------

/// Graham elimination over masks; returns an ordering with the running
/// intersection property, or `None`. Deterministic: always removes the
/// lowest-index removable set.
fn rip_order_masks(sets: &[u32]) -> Option<Vec<usize>> {
    let mut alive: Vec<usize> = (0..sets.len()).collect();
    let mut removed = Vec::with_capacity(sets.len());
    while alive.len() > 1 {
        let mut pick = None;
        'outer: for (pos, &i) in alive.iter().enumerate() {
            let mut rest_union = 0u32;
            for &j in &alive {
                if j != i {
                    rest_union |= sets[j];
                }
            }
            let overlap = sets[i] & rest_union;
            for &j in &alive {
                if j != i && overlap & !sets[j] == 0 {
                    pick = Some(pos);
                    break 'outer;
                }
            }
        }
        let pos = pick?;
        removed.push(alive.remove(pos));
    }
    removed.push(alive[0]);
    removed.reverse();
    Some(removed)
}

fn run_int_rows_for_clique(ctx: &CliqueCtx, out: &mut Vec<CutRow>) {
    let n = ctx.nodes.len();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut edge_masks: Vec<u32> = (1..=full).filter(|m| m.count_ones() >= 2).collect();
    edge_masks.sort_by_key(|&m| (m.count_ones(), m));

    for &e0 in &edge_masks {
        // condition (i): the intersection with the center has >= 2 nodes
        let cands: Vec<u32> = edge_masks
            .iter()
            .copied()
            .filter(|&c| (c & e0).count_ones() >= 2)
            .collect();
        let mut picked = Vec::new();
        grow_run_int(ctx, e0, &cands, 0, &mut picked, out);
    }
}

fn grow_run_int(
    ctx: &CliqueCtx,
    e0: u32,
    cands: &[u32],
    from: usize,
    picked: &mut Vec<u32>,
    out: &mut Vec<CutRow>,
) {
    for i in from..cands.len() {
        let c = cands[i];
        let ci = c & e0;
        // condition (ii): intersections with the center are pairwise
        // non-nested
        let nested = picked
            .iter()
            .any(|&p| (p & e0) & !ci == 0 || ci & !(p & e0) == 0);
        if nested {
            continue;
        }
        picked.push(c);
        emit_run_int(ctx, e0, picked, out);
        grow_run_int(ctx, e0, cands, i + 1, picked, out);
        picked.pop();
    }
}

fn emit_run_int(ctx: &CliqueCtx, e0: u32, picked: &[u32], out: &mut Vec<CutRow>) {
    // condition (iii): the intersections admit a running intersection
    // ordering; the first ordering found defines the neighborhoods
    let inters: Vec<u32> = picked.iter().map(|&ek| ek & e0).collect();
    let Some(order) = rip_order_masks(&inters) else {
        return;
    };
    // neighborhood of the k-th set in the ordering: overlap with the
    // union of its predecessors
    let mut nbhd = vec![0u32; picked.len()];
    let mut seen = 0u32;
    for &k in &order {
        nbhd[k] = inters[k] & seen;
        seen |= inters[k];
    }
    let union: u32 = picked.iter().fold(0, |a, &m| a | m);
    let outside = e0 & !union;

    // every choice of w_k ⊆ N_k (the empty set, a node, or an edge —
    // inside a clique every subset qualifies)
    let mut w = vec![0u32; picked.len()];
    emit_w_choices(ctx, e0, picked, &nbhd, outside, 0, &mut w, out);
}

#[allow(clippy::too_many_arguments)]
fn emit_w_choices(
    ctx: &CliqueCtx,
    e0: u32,
    picked: &[u32],
    nbhd: &[u32],
    outside: u32,
    k: usize,
    w: &mut Vec<u32>,
    out: &mut Vec<CutRow>,
) {
    if k == picked.len() {
        // slack grows by one for every neighbor whose w_k stays empty;
        // with all w_k empty the row is exactly the flower inequality
        let omega = outside.count_ones() as i64 + w.iter().filter(|&&wk| wk == 0).count() as i64;
        let mut map = BTreeMap::new();
        for &wk in w.iter() {
            if wk != 0 {
                *map.entry(ctx.slot_of_mask(wk)).or_insert(0) -= 1;
            }
        }
        let mut m = outside;
        while m != 0 {
            let bit = m & m.wrapping_neg();
            *map.entry(ctx.slot_of_mask(bit)).or_insert(0) += 1;
            m ^= bit;
        }
        for &ek in picked {
            *map.entry(ctx.slot_of_mask(ek)).or_insert(0) += 1;
        }
        *map.entry(ctx.slot_of_mask(e0)).or_insert(0) -= 1;
        let prov = format!(
            "e0={} T=[{}] w=[{}]",
            ctx.set_name(e0),
            picked
                .iter()
                .map(|&m| ctx.set_name(m))
                .collect::<Vec<_>>()
                .join(","),
            w.iter()
                .map(|&m| ctx.set_name(m))
                .collect::<Vec<_>>()
                .join(",")
        );
        if let Some(row) = CutRow::from_map(CutFamily::RunningIntersection, prov, map, omega - 1)
        {
            out.push(row);
        }
        return;
    }
    // enumerate subsets of nbhd[k], including the empty set
    let nb = nbhd[k];
    let mut sub = nb;
    loop {
        w[k] = sub;
        emit_w_choices(ctx, e0, picked, nbhd, outside, k + 1, w, out);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & nb;
    }
}

/// All running-intersection inequalities confined to single cliques;
/// out-of-clique tuples are implied by these.
pub fn running_intersection_inequalities(h: &Hypergraph) -> Vec<CutRow> {
    let mut rows = Vec::new();
    for c in h.cliques() {
        let ctx = CliqueCtx { h, nodes: c.nodes() };
        run_int_rows_for_clique(&ctx, &mut rows);
    }
    rows
}

// --- clique RLT rows ------------------------------------------------------

/// The complete RLT description of one clique's multilinear polytope:
/// exactly 2^|C| rows, one per subset U of the clique, each valid
/// (and jointly exact) on the clique's binary assignments. The
/// empty-set term contributes the constant 1, folded into the rhs.
pub fn clique_rlt_inequalities(h: &Hypergraph, clique_index: usize) -> Vec<CutRow> {
    let nodes = h.cliques()[clique_index].nodes();
    let ctx = CliqueCtx { h, nodes };
    let n = nodes.len();
    let full: u32 = (1u32 << n) - 1;
    let mut rows = Vec::with_capacity(1 << n);
    for u in 0..=full {
        // row:  Σ_{W ⊆ U, |W| even} z_{(C\U)∪W} − Σ_{W ⊆ U, |W| odd} z_{(C\U)∪W} ≥ 0
        // emitted in ≤ form with signs flipped
        let base = full & !u;
        let mut map = BTreeMap::new();
        let mut rhs: i64 = 0;
        let mut w = u;
        loop {
            let sign: i64 = if w.count_ones() % 2 == 0 { 1 } else { -1 };
            let set = base | w;
            if set == 0 {
                rhs += sign; // z_∅ := 1 folded into the rhs
            } else {
                *map.entry(ctx.slot_of_mask(set)).or_insert(0) -= sign;
            }
            if w == 0 {
                break;
            }
            w = (w - 1) & u;
        }
        let prov = format!("C={} U={}", ctx.set_name(full), ctx.set_name(u));
        if let Some(row) = CutRow::from_map(CutFamily::CliqueRlt, prov, map, rhs) {
            rows.push(row);
        }
    }
    rows
}

// --- lifted odd-cycle inequalities ---------------------------------------

/// The two lifted rows per odd chord-set D of the cycle's link graph.
/// Fails if a required pair/triple slot is absent, which means the
/// cycle is not embedded in the hypergraph.
pub fn lifted_odd_cycle_inequalities(
    h: &Hypergraph,
    cycle: &LiftedCliqueCycle,
) -> Result<Vec<CutRow>, RelaxError> {
    let m = cycle.len();
    let vbar = cycle.shared_node;
    let links = &cycle.link_nodes;
    let slot_of = |nodes: &mut Vec<NodeId>| -> Result<usize, RelaxError> {
        nodes.sort_unstable();
        h.slot(nodes).ok_or_else(|| {
            RelaxError::MissingCycleSlot(
                nodes
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            )
        })
    };

    // cycle edges e_i = {v_i, v_{i+1}}, their slots, and the lifted
    // slots {v_i, v̄} and e_i ∪ {v̄}
    let mut node_slot = Vec::with_capacity(m);
    let mut pair_slot = Vec::with_capacity(m); // {v_i, v̄}
    let mut edge_slot = Vec::with_capacity(m); // {v_i, v_{i+1}}
    let mut lifted_slot = Vec::with_capacity(m); // {v_i, v_{i+1}, v̄}
    for i in 0..m {
        let a = links[i];
        let b = links[(i + 1) % m];
        node_slot.push(h.node_slot(a));
        pair_slot.push(slot_of(&mut vec![a, vbar])?);
        edge_slot.push(slot_of(&mut vec![a, b])?);
        lifted_slot.push(slot_of(&mut vec![a, b, vbar])?);
    }
    let vbar_slot = h.node_slot(vbar);

    let mut rows = Vec::new();
    for d in 1u32..(1 << m) {
        if d.count_ones() % 2 == 0 {
            continue;
        }
        // node membership: node i belongs to cycle edges i-1 and i
        let in_d = |i: usize| d & (1 << i) != 0;
        let node_in_d = |i: usize| in_d(i) || in_d((i + m - 1) % m);
        let node_in_rest = |i: usize| {
            let r = !d & ((1 << m) - 1);
            r & (1 << i) != 0 || r & (1 << ((i + m - 1) % m)) != 0
        };
        let half = (d.count_ones() / 2) as i64;
        let prov = format!(
            "vbar={} links=[{}] D=[{}]",
            vbar,
            links
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            (0..m)
                .filter(|&i| in_d(i))
                .map(|i| format!("{{{},{}}}", links[i], links[(i + 1) % m]))
                .collect::<Vec<_>>()
                .join(",")
        );

        // node sign: +1 on V_1(D) (covered only by D), -1 on V_2(D)
        // (not covered by D), 0 otherwise; edge sign: -1 on D, +1 off D
        let mut lifted = BTreeMap::new();
        let mut unlifted = BTreeMap::new();
        for i in 0..m {
            let s = match (node_in_d(i), node_in_rest(i)) {
                (true, false) => 1,
                (false, _) => -1,
                _ => 0,
            };
            if s != 0 {
                *lifted.entry(pair_slot[i]).or_insert(0) += s;
                *unlifted.entry(node_slot[i]).or_insert(0) += s;
                *unlifted.entry(pair_slot[i]).or_insert(0) -= s;
            }
            let t = if in_d(i) { -1 } else { 1 };
            *lifted.entry(lifted_slot[i]).or_insert(0) += t;
            *unlifted.entry(edge_slot[i]).or_insert(0) += t;
            *unlifted.entry(lifted_slot[i]).or_insert(0) -= t;
        }
        // lifted side: lhs ≤ half · z_v̄
        *lifted.entry(vbar_slot).or_insert(0) -= half;
        if let Some(row) = CutRow::from_map(
            CutFamily::LiftedOddCycle,
            format!("{prov} side=1"),
            lifted,
            0,
        ) {
            rows.push(row);
        }
        // complementary side: lhs ≤ half · (1 − z_v̄)
        *unlifted.entry(vbar_slot).or_insert(0) += half;
        if let Some(row) = CutRow::from_map(
            CutFamily::LiftedOddCycle,
            format!("{prov} side=0"),
            unlifted,
            half,
        ) {
            rows.push(row);
        }
    }
    Ok(rows)
}

// --- assembly -------------------------------------------------------------

fn dedup(rows: Vec<CutRow>) -> Vec<CutRow> {
    let mut seen = HashSet::new();
    rows.into_iter()
        .filter(|r| seen.insert(r.dedup_key()))
        .collect()
}

/// All cut rows of the given relaxation, deduplicated by canonical
/// form, in deterministic order.
pub fn relaxation_rows(h: &Hypergraph, kind: RelaxationKind) -> Vec<CutRow> {
    let mut rows = Vec::new();
    match kind {
        RelaxationKind::Standard => rows.extend(standard_linearization(h)),
        RelaxationKind::Flower => {
            rows.extend(standard_linearization(h));
            rows.extend(flower_inequalities(h));
        }
        RelaxationKind::RunningIntersection => {
            rows.extend(standard_linearization(h));
            rows.extend(flower_inequalities(h));
            rows.extend(running_intersection_inequalities(h));
        }
        RelaxationKind::Clique => {
            for i in 0..h.cliques().len() {
                rows.extend(clique_rlt_inequalities(h, i));
            }
        }
        RelaxationKind::MultiClique(m) => {
            assert!(m >= 3, "multi-clique relaxation requires M >= 3");
            for i in 0..h.cliques().len() {
                rows.extend(clique_rlt_inequalities(h, i));
            }
            for cyc in crate::hypergraph::enumerate_lifted_clique_cycles(h.cliques(), m) {
                rows.extend(
                    lifted_odd_cycle_inequalities(h, &cyc)
                        .expect("enumerated cycles are embedded in the hypergraph"),
                );
            }
        }
    }
    dedup(rows)
}

/// Assembles the relaxation as a ready-to-solve LP over the
/// hypergraph's slot layout.
pub fn build_relaxation(
    h: &Hypergraph,
    kind: RelaxationKind,
    objective: &MultilinearObjective,
) -> LinearProgram {
    let mut lp = LinearProgram::new(h.num_slots(), h.node_count());
    lp.var_names = (0..h.num_slots()).map(|s| h.slot_name(s)).collect();
    lp.objective = objective.lp_objective(h);
    for row in relaxation_rows(h, kind) {
        let (coeffs, rel, rhs) = row.to_lp_row();
        lp.push_row(coeffs, rel, rhs);
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Clique;
    use crate::lp::solve_lp;

    fn single_clique(n: usize) -> Hypergraph {
        Hypergraph::build(vec![Clique::new(0..n)], n).unwrap()
    }

    /// Evaluates a cut row at a binary node assignment, extending it
    /// multilinearly to the edge slots. Exact integer arithmetic.
    fn row_holds(h: &Hypergraph, row: &CutRow, bits: u32) -> bool {
        let mut lhs: i64 = 0;
        for &(slot, a) in &row.coeffs {
            let on = if slot < h.node_count() {
                bits & (1 << slot) != 0
            } else {
                let e = &h.edges()[slot - h.node_count()];
                e.nodes().iter().all(|&v| bits & (1 << v) != 0)
            };
            if on {
                lhs += a;
            }
        }
        lhs <= row.rhs
    }

    fn assert_all_valid(h: &Hypergraph, rows: &[CutRow]) {
        assert!(h.node_count() <= 20);
        for bits in 0..(1u32 << h.node_count()) {
            for row in rows {
                assert!(
                    row_holds(h, row, bits),
                    "row violated at {:b}: {}",
                    bits,
                    row.dump_line(h)
                );
            }
        }
    }

    #[test]
    fn standard_rows_count_and_validity() {
        let h = single_clique(4);
        let rows = standard_linearization(&h);
        let expect: usize = h.edges().iter().map(|e| e.len() + 2).sum();
        assert_eq!(rows.len(), expect);
        assert_eq!(expect, 11 * 2 + (2 * 6 + 3 * 4 + 4));
        assert_all_valid(&h, &rows);
    }

    #[test]
    fn flower_two_link_present() {
        // center {0,1,2} with neighbor {0,1}: z_2 + z_01 - z_012 <= 1
        let h = single_clique(3);
        let rows = flower_inequalities(&h);
        assert_all_valid(&h, &rows);
        let s2 = h.node_slot(2);
        let s01 = h.edge_slot(&[0, 1]).unwrap();
        let s012 = h.edge_slot(&[0, 1, 2]).unwrap();
        let want = vec![(s2, 1), (s01, 1), (s012, -1)];
        assert!(rows
            .iter()
            .any(|r| { r.rhs == 1 && { let mut c = r.coeffs.clone(); c.sort(); c } == { let mut w = want.clone(); w.sort(); w } }));
    }

    #[test]
    fn flower_disjoint_neighbors_on_quad() {
        // center {0,1,2,3}, neighbors {0,1} and {2,3}:
        // z_01 + z_23 - z_0123 <= 1
        let h = single_clique(4);
        let rows = flower_inequalities(&h);
        assert_all_valid(&h, &rows);
        let s01 = h.edge_slot(&[0, 1]).unwrap();
        let s23 = h.edge_slot(&[2, 3]).unwrap();
        let sall = h.edge_slot(&[0, 1, 2, 3]).unwrap();
        let mut want = vec![(s01, 1), (s23, 1), (sall, -1)];
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 1 && r.coeffs == want));
    }

    #[test]
    fn flower_rejects_single_exclusive_node() {
        // center {0,1,2} with T = {{0,1},{1,2}}: the second neighbor
        // keeps only one exclusive node, so no row with both neighbors
        let h = single_clique(3);
        let rows = flower_inequalities(&h);
        let s01 = h.edge_slot(&[0, 1]).unwrap();
        let s12 = h.edge_slot(&[1, 2]).unwrap();
        for r in &rows {
            let has = |s: usize| r.coeffs.iter().any(|&(j, a)| j == s && a > 0);
            assert!(!(has(s01) && has(s12)));
        }
    }

    #[test]
    fn run_int_example_row() {
        // center {0,1,2,3}, neighbors {0,1,2} and {1,2,3}, w_2 = {1,2}:
        // -z_12 + z_012 + z_123 - z_0123 <= 0
        let h = single_clique(4);
        let rows = running_intersection_inequalities(&h);
        assert_all_valid(&h, &rows);
        let s12 = h.edge_slot(&[1, 2]).unwrap();
        let s012 = h.edge_slot(&[0, 1, 2]).unwrap();
        let s123 = h.edge_slot(&[1, 2, 3]).unwrap();
        let sall = h.edge_slot(&[0, 1, 2, 3]).unwrap();
        let mut want = vec![(s12, -1), (s012, 1), (s123, 1), (sall, -1)];
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 0 && r.coeffs == want));
        // with w_2 = ∅ the same tuple reduces to a flower row
        let mut fl = vec![(s012, 1), (s123, 1), (sall, -1)];
        fl.sort();
        assert!(rows.iter().any(|r| r.rhs == 1 && r.coeffs == fl));
    }

    #[test]
    fn rlt_rank_two_is_mccormick() {
        let h = single_clique(2);
        let rows = clique_rlt_inequalities(&h, 0);
        assert_eq!(rows.len(), 4);
        assert_all_valid(&h, &rows);
        let s0 = h.node_slot(0);
        let s1 = h.node_slot(1);
        let se = h.edge_slot(&[0, 1]).unwrap();
        // U = {0,1}: 1 - z_0 - z_1 + z_01 >= 0
        let mut want = vec![(s0, 1), (s1, 1), (se, -1)];
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 1 && r.coeffs == want));
        // U = {0}: z_1 - z_01 >= 0
        let mut want = vec![(s1, -1), (se, 1)];
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 0 && r.coeffs == want));
    }

    #[test]
    fn rlt_counts_and_validity() {
        for n in 2..=4 {
            let h = single_clique(n);
            let rows = clique_rlt_inequalities(&h, 0);
            assert_eq!(rows.len(), 1 << n);
            assert_all_valid(&h, &rows);
        }
    }

    #[test]
    fn rlt_full_u_row_on_triple() {
        // U = C = {0,1,2}: (1 + z_01 + z_02 + z_12) - (z_0+z_1+z_2+z_012) >= 0
        let h = single_clique(3);
        let rows = clique_rlt_inequalities(&h, 0);
        let mut want = vec![
            (h.node_slot(0), 1),
            (h.node_slot(1), 1),
            (h.node_slot(2), 1),
            (h.edge_slot(&[0, 1]).unwrap(), -1),
            (h.edge_slot(&[0, 2]).unwrap(), -1),
            (h.edge_slot(&[1, 2]).unwrap(), -1),
            (h.edge_slot(&[0, 1, 2]).unwrap(), 1),
        ];
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 1 && r.coeffs == want));
    }

    fn three_cycle() -> Hypergraph {
        // three cliques around hub 0; links 1, 2, 3
        let cliques = vec![
            Clique::new([0, 1, 2, 4]),
            Clique::new([0, 2, 3, 5]),
            Clique::new([0, 3, 1, 6]),
        ];
        Hypergraph::build(cliques, 7).unwrap()
    }

    #[test]
    fn lifted_odd_cycle_counts_and_validity() {
        let h = three_cycle();
        let cycles = crate::hypergraph::enumerate_lifted_clique_cycles(h.cliques(), 4);
        assert_eq!(cycles.len(), 1);
        let rows = lifted_odd_cycle_inequalities(&h, &cycles[0]).unwrap();
        // |D| odd over a 3-cycle: C(3,1)+C(3,3) = 4 chord sets, 2 rows each
        assert_eq!(rows.len(), 8);
        assert_all_valid(&h, &rows);
    }

    #[test]
    fn lifted_odd_cycle_full_d_row() {
        // D = K on the 3-cycle: Σ z_{v_i,v̄} − Σ z_{e∪v̄} ≤ z_v̄
        let h = three_cycle();
        let cycles = crate::hypergraph::enumerate_lifted_clique_cycles(h.cliques(), 4);
        let rows = lifted_odd_cycle_inequalities(&h, &cycles[0]).unwrap();
        let vbar = cycles[0].shared_node;
        let links = cycles[0].link_nodes.clone();
        let mut want: Vec<(usize, i64)> = Vec::new();
        for i in 0..3 {
            let mut p = vec![links[i], vbar];
            p.sort();
            want.push((h.slot(&p).unwrap(), 1));
            let mut t = vec![links[i], links[(i + 1) % 3], vbar];
            t.sort();
            want.push((h.slot(&t).unwrap(), -1));
        }
        want.push((h.node_slot(vbar), -1));
        want.sort();
        assert!(rows.iter().any(|r| r.rhs == 0 && r.coeffs == want));
    }

    #[test]
    fn missing_slot_is_structured_error() {
        // a hand-built cycle not embedded in the hypergraph
        let h = single_clique(3);
        let fake = LiftedCliqueCycle {
            cliques: vec![
                Clique::new([0, 1, 9]),
                Clique::new([0, 2, 9]),
                Clique::new([1, 2, 9]),
            ],
            clique_indices: vec![0, 1, 2],
            shared_node: 9,
            link_nodes: vec![0, 1, 2],
        };
        assert!(lifted_odd_cycle_inequalities(&h, &fake).is_err());
    }

    #[test]
    fn no_duplicate_rows_after_canonicalization() {
        let h = Hypergraph::build(
            vec![Clique::new([0, 1, 2, 3]), Clique::new([2, 3, 4, 5])],
            6,
        )
        .unwrap();
        for kind in [
            RelaxationKind::Standard,
            RelaxationKind::Flower,
            RelaxationKind::RunningIntersection,
            RelaxationKind::Clique,
        ] {
            let rows = relaxation_rows(&h, kind);
            let mut keys: Vec<_> = rows.iter().map(|r| r.dedup_key()).collect();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), rows.len(), "{kind}");
        }
    }

    #[test]
    fn containment_chain_on_two_cliques() {
        let h = Hypergraph::build(
            vec![Clique::new([0, 1, 2, 3]), Clique::new([2, 3, 4, 5])],
            6,
        )
        .unwrap();
        let mut obj = MultilinearObjective::new(6, 1.0);
        // a deliberately frustrated objective
        for v in 0..6 {
            obj.add_node(v, if v % 2 == 0 { 1.5 } else { -0.7 });
        }
        obj.add_edge(crate::hypergraph::Edge::new([0, 1, 2, 3]), -2.0);
        obj.add_edge(crate::hypergraph::Edge::new([2, 3]), 1.3);
        obj.add_edge(crate::hypergraph::Edge::new([3, 4, 5]), -1.1);
        let mut prev = f64::INFINITY;
        for kind in [
            RelaxationKind::Standard,
            RelaxationKind::Flower,
            RelaxationKind::RunningIntersection,
            RelaxationKind::Clique,
        ] {
            let lp = build_relaxation(&h, kind, &obj);
            let r = solve_lp(&lp);
            assert_eq!(r.status, crate::lp::SolveStatus::Optimal);
            assert!(
                r.objective_value <= prev + 1e-7,
                "{kind} weaker than predecessor"
            );
            prev = r.objective_value;
        }
    }
}
