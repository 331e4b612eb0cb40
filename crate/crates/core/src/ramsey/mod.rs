//! Partitioned high-girth hypergraphs and the counting behind them.

mod adversary;
mod counting;
mod hypergraph;
mod params;

pub use adversary::{bell, is_counterexample, vcvrp_adversary, AdversaryBudget, AdversaryMode, AdversaryReport};
pub use counting::{
    count_suitable, count_suitable_enumerated, dichotomy_holds, equal_parts, random_colouring, SuitableCounts,
};
pub use hypergraph::{
    certified_part_size, cycle_count_part_size, default_epsilon, edge_probability, expected_short_cycles,
    gen_witness_hypergraph, girth_at_least, hypergraph_girth, remove_short_cycles, shortest_cycle, BergeCycle,
    GenOptions, GenerationMeta, PartitionedHypergraph,
};
pub use params::{
    binomial, epsilon_condition, eval_poly, failure_bound, potential_cycle_bound, potential_cycle_count, ratio,
    suitable_params, suitable_polynomial, FailureBound, SuitableParams,
};
