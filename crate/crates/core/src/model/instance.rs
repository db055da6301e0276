use serde::{Deserialize, Serialize};

/// Integer minutes since a per-instance epoch.
pub type Minutes = i64;

pub type AirportId = String;
pub type AircraftId = String;
pub type CrewId = String;
pub type FlightId = String;
pub type MaintenanceId = String;
pub type SlotId = String;
pub type ItineraryId = String;

/// Half-open time window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: Minutes,
    pub end: Minutes,
}

impl Window {
    pub fn new(start: Minutes, end: Minutes) -> Self {
        Self { start, end }
    }

    #[inline]
    pub fn contains(&self, t: Minutes) -> bool {
        self.start <= t && t < self.end
    }

    /// True when `[a, b)` intersects this window.
    #[inline]
    pub fn overlaps(&self, a: Minutes, b: Minutes) -> bool {
        a < self.end && self.start < b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeAnchors {
    pub current_time: Minutes,
    pub recovery_start: Minutes,
    pub recovery_finish: Minutes,
    pub max_delay: Minutes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airport {
    pub id: AirportId,
    pub min_turnaround: Minutes,
    pub min_transit: Minutes,
    pub min_crew_connection: Minutes,
    /// Minimum connection time for passengers changing flights.
    #[serde(default = "default_pax_connection")]
    pub min_pax_connection: Minutes,
}

fn default_pax_connection() -> Minutes {
    30
}

/// Cabin classes, ordered from lowest to highest.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "snake_case")]
pub enum CabinClass {
    #[default]
    Economy,
    Premium,
    Business,
}

impl CabinClass {
    pub const ALL: [CabinClass; 3] = [CabinClass::Economy, CabinClass::Premium, CabinClass::Business];

    pub fn rank(self) -> u32 {
        self as u32
    }

    /// This class followed by every lower class, closest first.
    pub fn downgrade_ladder(self) -> impl Iterator<Item = CabinClass> {
        Self::ALL.into_iter().rev().filter(move |c| *c <= self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CabinClass::Economy => "economy",
            CabinClass::Premium => "premium",
            CabinClass::Business => "business",
        }
    }

    pub fn parse(s: &str) -> Option<CabinClass> {
        match s {
            "economy" => Some(CabinClass::Economy),
            "premium" => Some(CabinClass::Premium),
            "business" => Some(CabinClass::Business),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SeatCapacity {
    pub economy: u32,
    pub premium: u32,
    pub business: u32,
}

impl SeatCapacity {
    pub fn get(&self, cabin: CabinClass) -> u32 {
        match cabin {
            CabinClass::Economy => self.economy,
            CabinClass::Premium => self.premium,
            CabinClass::Business => self.business,
        }
    }

    pub fn get_mut(&mut self, cabin: CabinClass) -> &mut u32 {
        match cabin {
            CabinClass::Economy => &mut self.economy,
            CabinClass::Premium => &mut self.premium,
            CabinClass::Business => &mut self.business,
        }
    }

    pub fn total(&self) -> u32 {
        self.economy + self.premium + self.business
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flight {
    pub id: FlightId,
    pub origin: AirportId,
    pub destination: AirportId,
    pub sched_departure: Minutes,
    pub duration: Minutes,
    pub original_aircraft: AircraftId,
    pub original_crew: CrewId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multileg_group: Option<String>,
    #[serde(default)]
    pub leg_index: u32,
    pub seats: SeatCapacity,
}

impl Flight {
    pub fn sched_arrival(&self) -> Minutes {
        self.sched_departure + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aircraft {
    pub id: AircraftId,
    pub initial_position: AirportId,
    pub available_from: Minutes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrewGroup {
    pub id: CrewId,
    pub initial_position: AirportId,
    pub available_from: Minutes,
    pub flight_time_limit: Minutes,
}

/// An airport and the range of admissible start times for a maintenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceWindow {
    pub airport: AirportId,
    pub earliest_start: Minutes,
    pub latest_start: Minutes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maintenance {
    pub id: MaintenanceId,
    pub aircraft: AircraftId,
    pub duration: Minutes,
    pub allowed_windows: Vec<MaintenanceWindow>,
    pub fail_penalty: f64,
}

impl Maintenance {
    pub fn latest_start(&self) -> Minutes {
        self.allowed_windows
            .iter()
            .map(|w| w.latest_start)
            .max()
            .unwrap_or(Minutes::MIN)
    }
}

/// A departure slot at an airport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub id: SlotId,
    pub airport: AirportId,
    pub window: Window,
    pub capacity: u32,
    #[serde(default)]
    pub nonuse_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItineraryLeg {
    pub flight: FlightId,
    pub cabin: CabinClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub id: ItineraryId,
    pub passenger_count: u32,
    pub legs: Vec<ItineraryLeg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancellation_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub downgrade_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_cost: Option<f64>,
}

impl Itinerary {
    pub fn cancellation_cost(&self, c: &CostCoefficients) -> f64 {
        self.cancellation_cost.unwrap_or(c.pax_cancellation)
    }

    pub fn downgrade_cost(&self, c: &CostCoefficients) -> f64 {
        self.downgrade_cost.unwrap_or(c.pax_downgrade)
    }

    pub fn delay_cost(&self, c: &CostCoefficients) -> f64 {
        self.delay_cost.unwrap_or(c.pax_delay_per_minute)
    }

    /// Highest cabin booked on any leg.
    pub fn booked_class(&self) -> CabinClass {
        self.legs
            .iter()
            .map(|l| l.cabin)
            .max()
            .unwrap_or_default()
    }

    /// Passenger count times the per-passenger cancellation cost.
    pub fn estimated_cancellation_cost(&self, c: &CostCoefficients) -> f64 {
        self.passenger_count as f64 * self.cancellation_cost(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Disruption {
    FlightDelay { target: FlightId, minutes: Minutes },
    FlightCancellation { target: FlightId },
    AircraftUnavailability { target: AircraftId, window: Window },
    SlotChange { target: SlotId, capacity: u32 },
    AirportClosure { target: AirportId, window: Window },
}

impl Disruption {
    pub fn target(&self) -> &str {
        match self {
            Disruption::FlightDelay { target, .. }
            | Disruption::FlightCancellation { target }
            | Disruption::AircraftUnavailability { target, .. }
            | Disruption::SlotChange { target, .. }
            | Disruption::AirportClosure { target, .. } => target,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Disruption::FlightDelay { .. } => "flight_delay",
            Disruption::FlightCancellation { .. } => "flight_cancellation",
            Disruption::AircraftUnavailability { .. } => "aircraft_unavailability",
            Disruption::SlotChange { .. } => "slot_change",
            Disruption::AirportClosure { .. } => "airport_closure",
        }
    }
}

/// Cost coefficients. `swap_penalty` is charged per reassigned resource on a
/// scheduled option and steers the solver away from gratuitous swaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub delay_per_minute: f64,
    pub cancellation_per_flight: f64,
    #[serde(default)]
    pub swap_penalty: f64,
    pub pax_cancellation: f64,
    pub pax_downgrade: f64,
    pub pax_delay_per_minute: f64,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        Self {
            delay_per_minute: 10.0,
            cancellation_per_flight: 5000.0,
            swap_penalty: 5.0,
            pax_cancellation: 400.0,
            pax_downgrade: 60.0,
            pax_delay_per_minute: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(default)]
    pub name: String,
    pub anchors: TimeAnchors,
    #[serde(default)]
    pub costs: CostCoefficients,
    pub airports: Vec<Airport>,
    pub aircraft: Vec<Aircraft>,
    pub crew_groups: Vec<CrewGroup>,
    pub flights: Vec<Flight>,
    #[serde(default)]
    pub maintenances: Vec<Maintenance>,
    #[serde(default)]
    pub slots: Vec<Slot>,
    #[serde(default)]
    pub itineraries: Vec<Itinerary>,
    #[serde(default)]
    pub disruptions: Vec<Disruption>,
}

impl ProblemInstance {
    pub fn total_passengers(&self) -> u64 {
        self.itineraries.iter().map(|i| i.passenger_count as u64).sum()
    }
}
