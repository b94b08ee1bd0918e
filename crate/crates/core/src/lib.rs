//! MAP inference in higher-order binary undirected graphical models via
//! LP relaxations of the multilinear polytope, with applications to
//! image restoration and LDPC decoding.

pub mod experiment;
pub mod hypergraph;
pub mod ldpc;
pub mod lp;
pub mod objective;
pub mod oracle;
pub mod relax;
pub mod restore;

pub use hypergraph::{Clique, Edge, Hypergraph, HypergraphError, NodeId};
pub use lp::{
    classify_and_round, parse_lp_text, solve_binary_ip, solve_lp, write_lp_text, IpReport,
    LinearProgram, Relation, SolveReport, SolveStatus,
};
pub use objective::MultilinearObjective;
pub use relax::{build_relaxation, relaxation_rows, CutFamily, CutRow, RelaxationKind};

pub use experiment::{
    determinism_hash, parse_p_grid, plot_data, run_experiment, Application, ExperimentConfig,
    ExperimentOutput,
};
pub use ldpc::{
    build_decoder, decode, gallager_parity_check, DecodeMethod, DecodeReport, LdpcCode, LdpcError,
};
pub use oracle::{brute_force_decode, brute_force_map, validate_cut, OracleError, OracleResult};
pub use restore::{
    apply_bit_flip_noise, build_restoration_objective, generate_synthetic_image,
    learn_phi_from_frequencies, restore, BitImage, PatternPotentials, RestoreMethod, RestoreResult,
    SyntheticKind,
};
