//! Off-grid home energy simulator: a PV, battery and air-conditioner house
//! plant, three controllers (baseline, rule-based, MPC over a mixed-integer
//! model), an embedded MILP solver and resiliency metrics.

pub mod controller;
pub mod data_io;
pub mod domain;
pub mod metrics;
pub mod milp;
pub mod models;
pub mod plant;
pub mod report;
pub mod sim;
