//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod lp_oracle;
pub mod mpc_oracle;
pub mod ridge;
