//! Special flows over the skew shift `(x, y) ↦ (x + α, y + x + β)`.

pub mod birkhoff;
pub mod cf;
pub mod roof;
pub mod shift;
pub mod special;
pub mod witness;

pub use birkhoff::{
    birkhoff_sum, birkhoff_sum_dd, envelope_exponent, shear_scan, shear_sequence, BirkhoffTable, PointPair, ShearSeries,
    ShearTable,
};
pub use cf::{continued_fraction, ContinuedFraction};
pub use roof::{Coefficient, RoofFunction};
pub use shift::{circle_dist, torus_dist, SkewShift};
pub use special::{metric_df, special_flow_evaluate, SpecialFlowPoint};
pub use witness::{
    first_shear_time, heis_r1prime, heis_r1prime_witness, lift_strong_r, lift_strong_r_report, HeisConfig,
    R1Witness, ShearTime,
};
