pub mod expr;
pub mod jet;
pub mod swmhd;
pub mod liealg;
pub mod reductions;
pub mod fvsolver;
