//! Instance generation, station augmentation, sensitivity sweeps and the
//! power-law fit used to summarise them.

pub mod augment;
pub mod metro;
pub mod regression;
pub mod sweep;

pub use augment::{augment_2evrp_instance, AugmentConfig};
pub use metro::{generate_metro_instance, AxisConvention, MetroGenConfig};
pub use regression::{fit_power_law, PowerLawFit};
pub use sweep::{summarize, sweep, write_sweep_csv, LevelSummary, SweepConfig, SweepMode, SweepRecord, SWEEP_HEADER};
