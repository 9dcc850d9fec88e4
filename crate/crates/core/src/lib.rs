//! Projects where PV capacity should be built across a multi-region grid via
//! mixed-integer expansion co-optimization, constructs high-PV dynamic cases
//! by displacing conventional generation, and quantifies the resulting
//! frequency response with a reduced-order multi-area simulator.
//!
//! Pipeline stages:
//!
//! 1. [`bundle`] / [`data`] — load and validate a planning case from disk.
//! 2. [`blocks`] — reduce hourly series to representative time blocks.
//! 3. [`expansion`] — assemble the expansion MILP; evaluate and audit
//!    solutions.
//! 4. [`solver`] — in-repo simplex + branch-and-bound (plus MPS export for
//!    external cross-checks).
//! 5. [`scenario`] — displace conventional units with PV to hit target
//!    penetration levels.
//! 6. [`dynamics`] — flat-run and N-1 contingency simulation; frequency
//!    metric extraction.
//! 7. [`pipeline`] — end-to-end runs, manifests, and reports.

pub mod blocks;
pub mod bundle;
pub mod data;
pub mod dynamics;
pub mod expansion;
pub mod lp;
pub mod pipeline;
pub mod scenario;
pub mod solver;
