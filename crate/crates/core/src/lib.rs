pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod error;
pub mod oracle;
pub mod sum;
pub mod tolerance;
pub mod weights;
