pub mod constants;
pub mod fit;
pub mod geomean;
pub mod sums;
pub mod verify;
