pub mod bloch;
pub mod certifier;
pub mod error;
pub mod geometry;
pub mod incompatibility;
pub mod lp;
pub mod strategies;
pub mod witnesses;
