//! The central-office / remote-unit topology: downlink up-conversion, the
//! over-the-air SI path, uplink re-modulation and balanced detection.

mod chain;
mod scenario;
mod session;

pub use chain::{
    make_received_signal, ru_y_modulated, run_downlink, run_uplink, uplink_fields, DownlinkOutput,
};
pub use scenario::{
    EdfaParams, EdfaPosition, FilterPlan, IfSignal, LaserParams, LinkScenario, ModulatorSet,
    SelfInterferencePath, SoiSignal, SoiSpec, ToneDrive,
};
pub use session::{
    run_full, LinkMetrics, LinkResult, LinkSession, PreparedUplink, ResidualProbe, SoiMetrics,
};
