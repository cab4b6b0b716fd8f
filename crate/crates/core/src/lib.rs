//! Numerical core for STAR-IOS aided NOMA downlinks: special functions,
//! cascaded Rician channel models, outage analysis and a deterministic
//! Monte Carlo engine.

pub mod channel;
pub mod error;
pub mod gamma_fit;
pub mod montecarlo;
pub mod network;
pub mod outage;
pub mod scenario;
pub mod specfun;

pub use channel::{ChannelModel, EffectiveChannelStats, GammaModelParams, LinkSide, ProtocolConfig, RicianParams};
pub use error::{Error, Result};
pub use gamma_fit::{FitMethod, FitResult};
pub use montecarlo::{McConfig, McEstimate};
pub use network::{Geometry, PowerConfig};
pub use outage::{ModelKind, OutageQuery, OutageValue};
pub use scenario::Scenario;
pub use specfun::Accuracy;
