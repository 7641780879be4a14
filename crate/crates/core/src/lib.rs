pub mod expr;
pub mod harness;
pub mod inclusion;
pub mod interval;
pub mod lp;
pub mod reach;
pub mod scp;
