//! Contact path geometry of fourth-order ODEs.

pub mod classify;
pub mod cli;
pub mod forms;
pub mod geodesics;
pub mod lagrange;
pub mod odeparse;
pub mod reduction;
