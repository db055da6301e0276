//! Domain entities, the disrupted state, and schedule checks.

pub mod feasibility;
pub mod index;
pub mod instance;
pub mod schedule;
pub mod state;
pub mod validate;

pub use feasibility::{check_feasibility, check_schedule, CheckOptions, Violation, ViolationKind};
pub use index::{IndexError, InstanceIndex, LegPosition, MultilegGroup};
pub use instance::*;
pub use schedule::{
    operating_cost, scheduled_cost, FlightDisposition, IterationStats, MaintenanceDisposition,
    RecoverySchedule,
};
pub use state::{apply_disruptions, DisruptedState, FlightState, FlightStatus, ResourceStart, StateError};
pub use validate::{validate_instance, Diagnostic};
