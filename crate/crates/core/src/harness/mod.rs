//! Ground-truth environments, reference oracles and the acceptance battery.

pub mod battery;
pub mod envs;
pub mod oracle;

pub use envs::{
    audit_side_info, builtin_environments, environment_by_name, Environment, SideInfoTier,
};
pub use oracle::{
    estimate_lipschitz, finite_horizon_lqr, lp_vertex_oracle, ode_oracle, optimal_oracle, rk45,
    OracleError,
};
