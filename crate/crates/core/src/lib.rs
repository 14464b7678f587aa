//! Counting knapsack solutions with a prescribed number of items, exactly and
//! approximately, and counting two-player LPV / LTV allocations through it.
//!
//! - [`instance`]: instance types, document format, generator.
//! - [`exact`]: enumeration and DP oracles, exact `τ`, allocation census.
//! - [`fptas`]: the geometric-grid capacity table and approximate counter.
//! - [`allocations`]: classification predicates and the allocation reductions.

pub mod allocations;
pub mod count;
pub mod error;
pub mod exact;
pub mod fptas;
pub mod instance;

pub use allocations::{
    classify, count_lpv, count_ltv, reduce_lpv, reduce_ltv, ClassFlags, Method, ReducedSeries,
};
pub use count::{CountMode, CountResult, GridPower};
pub use error::{Error, Result};
pub use exact::{
    brute_force_allocation_census, brute_force_count, dp_exact_count, tau_exact, AllocationCensus,
    ExactCount, ExactLimits, ExtendedCapacity, TauOracle,
};
pub use fptas::{
    approx_count, approx_count_many, approx_params, build_capacity_table, minimize_step,
    minimize_step_exhaustive, ApproxParams, CapacityTable, Epsilon,
};
pub use instance::{
    generate_instance, parse_allocation_instance, parse_knapsack_instance, Allocation,
    AllocationInstance, Capacity, GeneratedInstance, GeneratorSpec, InstanceKind, ItemCountRule,
    KnapsackInstance,
};
