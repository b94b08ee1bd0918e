//! The multilinear objective of a binary UGM: per-node coefficients
//! (data term already folded in), per-edge coefficients, and a constant
//! that is reported but never optimized.

use std::collections::BTreeMap;

use crate::hypergraph::{Edge, Hypergraph, NodeId};

#[derive(Clone, Debug)]
pub struct MultilinearObjective {
    /// Data-term weight; kept for reporting.
    pub alpha: f64,
    /// Combined node coefficient per node (data term plus accumulated
    /// singleton clique coefficients).
    pub node_coeffs: Vec<f64>,
    /// Edge coefficients in canonical edge order.
    pub edge_coeffs: BTreeMap<Edge, f64>,
    /// Accumulated empty-set coefficients; an affine shift that does not
    /// change the argmax.
    pub constant: f64,
}

impl MultilinearObjective {
    pub fn new(node_count: usize, alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        MultilinearObjective {
            alpha,
            node_coeffs: vec![0.0; node_count],
            edge_coeffs: BTreeMap::new(),
            constant: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_coeffs.len()
    }

    pub fn add_node(&mut self, v: NodeId, c: f64) {
        self.node_coeffs[v] += c;
    }

    pub fn add_edge(&mut self, e: Edge, c: f64) {
        *self.edge_coeffs.entry(e).or_insert(0.0) += c;
    }

    /// Direct evaluation on a binary assignment, including the constant.
    /// This is the single evaluation path shared by the brute-force
    /// oracle and the branch-and-bound incumbent check, so that equal
    /// assignments produce bit-identical values.
    pub fn evaluate(&self, assignment: &[bool]) -> f64 {
        debug_assert_eq!(assignment.len(), self.node_coeffs.len());
        let mut total = 0.0;
        for (v, &c) in self.node_coeffs.iter().enumerate() {
            if assignment[v] {
                total += c;
            }
        }
        for (e, &c) in &self.edge_coeffs {
            if e.nodes().iter().all(|&v| assignment[v]) {
                total += c;
            }
        }
        total + self.constant
    }

    /// Sparse LP objective over the hypergraph's slot layout. The
    /// constant is excluded. Panics if an edge has no slot in `h`.
    pub fn lp_objective(&self, h: &Hypergraph) -> Vec<(usize, f64)> {
        let mut obj: Vec<(usize, f64)> = Vec::new();
        for (v, &c) in self.node_coeffs.iter().enumerate() {
            if c != 0.0 {
                obj.push((h.node_slot(v), c));
            }
        }
        for (e, &c) in &self.edge_coeffs {
            if c != 0.0 {
                let slot = h
                    .edge_slot(e.nodes())
                    .unwrap_or_else(|| panic!("objective edge {e} has no hypergraph slot"));
                obj.push((slot, c));
            }
        }
        obj.sort_by_key(|&(slot, _)| slot);
        obj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Clique;

    #[test]
    fn evaluate_counts_active_products() {
        let mut obj = MultilinearObjective::new(3, 1.0);
        obj.add_node(0, 2.0);
        obj.add_node(2, -1.0);
        obj.add_edge(Edge::new([0, 1]), 4.0);
        obj.add_edge(Edge::new([0, 1, 2]), 8.0);
        obj.constant = 0.5;
        assert_eq!(obj.evaluate(&[true, false, false]), 2.5);
        assert_eq!(obj.evaluate(&[true, true, false]), 6.5);
        assert_eq!(obj.evaluate(&[true, true, true]), 13.5);
    }

    #[test]
    fn lp_objective_uses_slots() {
        let h = Hypergraph::build(vec![Clique::new([0, 1, 2])], 3).unwrap();
        let mut obj = MultilinearObjective::new(3, 1.0);
        obj.add_node(1, 3.0);
        obj.add_edge(Edge::new([0, 1]), -2.0);
        let lp_obj = obj.lp_objective(&h);
        assert_eq!(lp_obj, vec![(1, 3.0), (3, -2.0)]);
    }
}
