//! Photon-counting statistics: heralded pair sources, click streams,
//! g²(τ) estimation, fibre-coupling scans and detector/loss bookkeeping.

mod accounting;
mod g2;
mod smf;
mod source;

pub use accounting::{
    apd_calibrate, loss_chain_internal_efficiency, ApdCalibration, LossChain, MIN_CHAIN_PRODUCT,
};
pub use g2::{
    coincidence_histogram, g2_estimate, nonclassical_witness, CoincidenceHistogram, G2Estimate,
    ACCIDENTAL_OFFSET_WINDOWS, ACCIDENTAL_WINDOWS,
};
pub use smf::{g2_vs_position, smf_coupling, smf_coupling_scan, PositionG2, PositionScan};
pub use source::{
    analytic_g2, signal_noise_for_target_g2, simulate_pairs, Channel, ClickStreams, SourceModel,
    EVENT_LIMIT,
};
