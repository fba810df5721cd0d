//! Communication-constrained distributed Gaussian-process regression.
//!
//! The crate is organized around one pipeline: quantify how many bits a
//! machine fundamentally needs to convey a Gaussian batch at a given
//! inner-product distortion ([`rdbound`]), actually code batches at finite
//! rates ([`persym`], [`dimred`]), and measure what the lost bits cost a
//! downstream GP regression where machines pool their data over a metered
//! network ([`gp`], [`dist`]).

pub mod dimred;
pub mod dist;
pub mod error;
pub mod gp;
pub mod normal;
pub mod numerics;
pub mod persym;
pub mod rdbound;

pub use dimred::DimRedModel;
pub use dist::fusion::{fuse_predictions, predict_bcm, predict_poe, BcmPrediction, PredictiveDist};
pub use dist::ledger::{covariance_bits, BitLedger, LedgerEntry, PayloadKind, Recipient};
pub use dist::nystrom::{low_rank_marginal_and_gradient, nystrom_complete, NystromGram};
pub use dist::{
    run_broadcast, run_single_center, train_local_models, BroadcastRun, Codec, Machine,
    ProtocolOptions, SingleCenterRun,
};
pub use error::{Error, Result};
pub use gp::{
    gram_matrix, marginal_and_gradient, smse, AscentOptions, GpModel, KernelSpec, Posterior,
};
pub use numerics::{product_spectrum, ProductSpectrum, SpdMatrix};
pub use persym::{
    allocate_bits, decode, encode, measure_distortion, BitAllocation, EncodedBatch, MAX_RATE_BITS,
};
pub use rdbound::{rate_lower_bound, simulate_test_channel, water_fill, TestChannel, WaterFillSolution};
