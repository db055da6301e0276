//! One CSV table per entity kind plus a key/value `manifest.csv`.
//!
//! | file | columns |
//! |---|---|
//! | manifest.csv | key, value |
//! | airports.csv | id, min_turnaround, min_transit, min_crew_connection, min_pax_connection |
//! | aircraft.csv | id, initial_position, available_from |
//! | crews.csv | id, initial_position, available_from, flight_time_limit |
//! | flights.csv | id, origin, destination, sched_departure, duration, original_aircraft, original_crew, multileg_group, leg_index, seats_economy, seats_premium, seats_business |
//! | maintenances.csv | id, aircraft, duration, fail_penalty, airport, earliest_start, latest_start (one row per window) |
//! | slots.csv | id, airport, start, end, capacity, nonuse_penalty |
//! | itineraries.csv | id, passenger_count, cancellation_cost, downgrade_cost, delay_cost, flight, cabin (one row per leg) |
//! | disruptions.csv | kind, target, minutes, capacity, window_start, window_end |

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{fs_err, IoError};
use crate::model::*;

struct Table {
    file: String,
    entity: &'static str,
    headers: HashMap<String, usize>,
    rows: Vec<(usize, csv::StringRecord)>,
}

struct Row<'a> {
    table: &'a Table,
    line: usize,
    rec: &'a csv::StringRecord,
}

impl Table {
    fn read(dir: &Path, name: &str, entity: &'static str, required: bool) -> Result<Option<Table>, IoError> {
        let path = dir.join(name);
        if !path.exists() {
            if required {
                return Err(IoError::Fs {
                    path,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "required table is missing"),
                });
            }
            return Ok(None);
        }
        let file = path.display().to_string();
        let syntax = |e: csv::Error| IoError::Syntax {
            file: file.clone(),
            message: e.to_string(),
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(syntax)?;
        let headers = rdr
            .headers()
            .map_err(syntax)?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(syntax)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec));
        }
        Ok(Some(Table {
            file,
            entity,
            headers,
            rows,
        }))
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.rows.iter().map(move |(line, rec)| Row {
            table: self,
            line: *line,
            rec,
        })
    }
}

impl Row<'_> {
    fn cell(&self, field: &str) -> Option<&str> {
        self.table
            .headers
            .get(field)
            .and_then(|&i| self.rec.get(i))
            .filter(|s| !s.is_empty())
    }

    fn id(&self) -> &str {
        self.cell("id").or_else(|| self.cell("target")).unwrap_or("")
    }

    fn at(&self) -> String {
        format!("line {}", self.line)
    }

    fn str(&self, field: &str) -> Result<String, IoError> {
        self.cell(field)
            .map(str::to_string)
            .ok_or_else(|| IoError::MissingField {
                file: self.table.file.clone(),
                at: self.at(),
                entity: self.table.entity.into(),
                id: self.id().into(),
                field: field.into(),
            })
    }

    fn req<T: FromStr>(&self, field: &str) -> Result<T, IoError> {
        let s = self.str(field)?;
        self.parse(field, &s)
    }

    fn opt<T: FromStr>(&self, field: &str) -> Result<Option<T>, IoError> {
        match self.cell(field) {
            None => Ok(None),
            Some(s) => self.parse(field, s).map(Some),
        }
    }

    fn parse<T: FromStr>(&self, field: &str, s: &str) -> Result<T, IoError> {
        s.parse().map_err(|_| IoError::BadValue {
            file: self.table.file.clone(),
            at: self.at(),
            entity: self.table.entity.into(),
            id: self.id().into(),
            field: field.into(),
            value: s.into(),
        })
    }

    fn window(&self, start: &str, end: &str) -> Result<Window, IoError> {
        Ok(Window::new(self.req(start)?, self.req(end)?))
    }
}

pub fn read_dir(dir: &Path) -> Result<ProblemInstance, IoError> {
    let manifest = Table::read(dir, "manifest.csv", "manifest", true)?.unwrap();
    let mut kv: HashMap<String, (usize, String)> = HashMap::new();
    for row in manifest.rows() {
        kv.insert(row.str("key")?, (row.line, row.cell("value").unwrap_or("").to_string()));
    }
    let get = |key: &str| -> Result<&str, IoError> {
        kv.get(key)
            .map(|(_, v)| v.as_str())
            .filter(|v| !v.is_empty())
            .ok_or_else(|| IoError::MissingField {
                file: manifest.file.clone(),
                at: "manifest".into(),
                entity: "manifest".into(),
                id: String::new(),
                field: key.into(),
            })
    };
    fn num<T: FromStr>(file: &str, key: &str, v: &str) -> Result<T, IoError> {
        v.parse().map_err(|_| IoError::BadValue {
            file: file.into(),
            at: "manifest".into(),
            entity: "manifest".into(),
            id: String::new(),
            field: key.into(),
            value: v.into(),
        })
    }
    let mf = manifest.file.as_str();
    let anchors = TimeAnchors {
        current_time: num(mf, "current_time", get("current_time")?)?,
        recovery_start: num(mf, "recovery_start", get("recovery_start")?)?,
        recovery_finish: num(mf, "recovery_finish", get("recovery_finish")?)?,
        max_delay: num(mf, "max_delay", get("max_delay")?)?,
    };
    let mut costs = CostCoefficients::default();
    for (key, slot) in [
        ("delay_per_minute", &mut costs.delay_per_minute),
        ("cancellation_per_flight", &mut costs.cancellation_per_flight),
        ("swap_penalty", &mut costs.swap_penalty),
        ("pax_cancellation", &mut costs.pax_cancellation),
        ("pax_downgrade", &mut costs.pax_downgrade),
        ("pax_delay_per_minute", &mut costs.pax_delay_per_minute),
    ] {
        if let Ok(v) = get(key) {
            *slot = num(mf, key, v)?;
        }
    }
    let name = kv.get("name").map(|(_, v)| v.clone()).unwrap_or_default();

    let mut airports = Vec::new();
    for r in Table::read(dir, "airports.csv", "airport", true)?.unwrap().rows() {
        airports.push(Airport {
            id: r.str("id")?,
            min_turnaround: r.req("min_turnaround")?,
            min_transit: r.req("min_transit")?,
            min_crew_connection: r.req("min_crew_connection")?,
            min_pax_connection: r.opt("min_pax_connection")?.unwrap_or(30),
        });
    }
    let mut aircraft = Vec::new();
    for r in Table::read(dir, "aircraft.csv", "aircraft", true)?.unwrap().rows() {
        aircraft.push(Aircraft {
            id: r.str("id")?,
            initial_position: r.str("initial_position")?,
            available_from: r.req("available_from")?,
        });
    }
    let mut crew_groups = Vec::new();
    for r in Table::read(dir, "crews.csv", "crew_group", true)?.unwrap().rows() {
        crew_groups.push(CrewGroup {
            id: r.str("id")?,
            initial_position: r.str("initial_position")?,
            available_from: r.req("available_from")?,
            flight_time_limit: r.req("flight_time_limit")?,
        });
    }
    let mut flights = Vec::new();
    for r in Table::read(dir, "flights.csv", "flight", true)?.unwrap().rows() {
        flights.push(Flight {
            id: r.str("id")?,
            origin: r.str("origin")?,
            destination: r.str("destination")?,
            sched_departure: r.req("sched_departure")?,
            duration: r.req("duration")?,
            original_aircraft: r.str("original_aircraft")?,
            original_crew: r.str("original_crew")?,
            multileg_group: r.opt("multileg_group")?,
            leg_index: r.opt("leg_index")?.unwrap_or(0),
            seats: SeatCapacity {
                economy: r.req("seats_economy")?,
                premium: r.opt("seats_premium")?.unwrap_or(0),
                business: r.opt("seats_business")?.unwrap_or(0),
            },
        });
    }

    let mut maintenances: Vec<Maintenance> = Vec::new();
    if let Some(t) = Table::read(dir, "maintenances.csv", "maintenance", false)? {
        for r in t.rows() {
            let id = r.str("id")?;
            let window = MaintenanceWindow {
                airport: r.str("airport")?,
                earliest_start: r.req("earliest_start")?,
                latest_start: r.req("latest_start")?,
            };
            match maintenances.last_mut() {
                Some(m) if m.id == id => m.allowed_windows.push(window),
                _ => maintenances.push(Maintenance {
                    id,
                    aircraft: r.str("aircraft")?,
                    duration: r.req("duration")?,
                    allowed_windows: vec![window],
                    fail_penalty: r.req("fail_penalty")?,
                }),
            }
        }
    }
    let mut slots = Vec::new();
    if let Some(t) = Table::read(dir, "slots.csv", "slot", false)? {
        for r in t.rows() {
            slots.push(Slot {
                id: r.str("id")?,
                airport: r.str("airport")?,
                window: r.window("start", "end")?,
                capacity: r.req("capacity")?,
                nonuse_penalty: r.opt("nonuse_penalty")?.unwrap_or(0.0),
            });
        }
    }
    let mut itineraries: Vec<Itinerary> = Vec::new();
    if let Some(t) = Table::read(dir, "itineraries.csv", "itinerary", false)? {
        for r in t.rows() {
            let id = r.str("id")?;
            let cabin_s = r.str("cabin")?;
            let cabin = CabinClass::parse(&cabin_s).ok_or_else(|| IoError::BadValue {
                file: t.file.clone(),
                at: r.at(),
                entity: "itinerary".into(),
                id: id.clone(),
                field: "cabin".into(),
                value: cabin_s.clone(),
            })?;
            let leg = ItineraryLeg {
                flight: r.str("flight")?,
                cabin,
            };
            match itineraries.last_mut() {
                Some(it) if it.id == id => it.legs.push(leg),
                _ => itineraries.push(Itinerary {
                    id,
                    passenger_count: r.req("passenger_count")?,
                    legs: vec![leg],
                    cancellation_cost: r.opt("cancellation_cost")?,
                    downgrade_cost: r.opt("downgrade_cost")?,
                    delay_cost: r.opt("delay_cost")?,
                }),
            }
        }
    }
    let mut disruptions = Vec::new();
    if let Some(t) = Table::read(dir, "disruptions.csv", "disruption", false)? {
        for r in t.rows() {
            let kind = r.str("kind")?;
            let target = r.str("target")?;
            disruptions.push(match kind.as_str() {
                "flight_delay" => Disruption::FlightDelay {
                    target,
                    minutes: r.req("minutes")?,
                },
                "flight_cancellation" => Disruption::FlightCancellation { target },
                "aircraft_unavailability" => Disruption::AircraftUnavailability {
                    target,
                    window: r.window("window_start", "window_end")?,
                },
                "slot_change" => Disruption::SlotChange {
                    target,
                    capacity: r.req("capacity")?,
                },
                "airport_closure" => Disruption::AirportClosure {
                    target,
                    window: r.window("window_start", "window_end")?,
                },
                _ => {
                    return Err(IoError::BadValue {
                        file: t.file.clone(),
                        at: r.at(),
                        entity: "disruption".into(),
                        id: target,
                        field: "kind".into(),
                        value: kind,
                    })
                }
            });
        }
    }

    Ok(ProblemInstance {
        name,
        anchors,
        costs,
        airports,
        aircraft,
        crew_groups,
        flights,
        maintenances,
        slots,
        itineraries,
        disruptions,
    })
}

fn write_table(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), IoError> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| IoError::Syntax {
        file: path.display().to_string(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Syntax {
        file: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(&path, bytes).map_err(fs_err(&path))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn write_dir(inst: &ProblemInstance, dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(fs_err(dir))?;
    let a = &inst.anchors;
    let c = &inst.costs;
    let manifest = vec![
        ("name", inst.name.clone()),
        ("current_time", a.current_time.to_string()),
        ("recovery_start", a.recovery_start.to_string()),
        ("recovery_finish", a.recovery_finish.to_string()),
        ("max_delay", a.max_delay.to_string()),
        ("delay_per_minute", c.delay_per_minute.to_string()),
        ("cancellation_per_flight", c.cancellation_per_flight.to_string()),
        ("swap_penalty", c.swap_penalty.to_string()),
        ("pax_cancellation", c.pax_cancellation.to_string()),
        ("pax_downgrade", c.pax_downgrade.to_string()),
        ("pax_delay_per_minute", c.pax_delay_per_minute.to_string()),
    ];
    write_table(
        dir,
        "manifest.csv",
        &["key", "value"],
        manifest.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect(),
    )?;
    write_table(
        dir,
        "airports.csv",
        &["id", "min_turnaround", "min_transit", "min_crew_connection", "min_pax_connection"],
        inst.airports
            .iter()
            .map(|p| {
                vec![
                    p.id.clone(),
                    p.min_turnaround.to_string(),
                    p.min_transit.to_string(),
                    p.min_crew_connection.to_string(),
                    p.min_pax_connection.to_string(),
                ]
            })
            .collect(),
    )?;
    write_table(
        dir,
        "aircraft.csv",
        &["id", "initial_position", "available_from"],
        inst.aircraft
            .iter()
            .map(|x| vec![x.id.clone(), x.initial_position.clone(), x.available_from.to_string()])
            .collect(),
    )?;
    write_table(
        dir,
        "crews.csv",
        &["id", "initial_position", "available_from", "flight_time_limit"],
        inst.crew_groups
            .iter()
            .map(|x| {
                vec![
                    x.id.clone(),
                    x.initial_position.clone(),
                    x.available_from.to_string(),
                    x.flight_time_limit.to_string(),
                ]
            })
            .collect(),
    )?;
    write_table(
        dir,
        "flights.csv",
        &[
            "id",
            "origin",
            "destination",
            "sched_departure",
            "duration",
            "original_aircraft",
            "original_crew",
            "multileg_group",
            "leg_index",
            "seats_economy",
            "seats_premium",
            "seats_business",
        ],
        inst.flights
            .iter()
            .map(|f| {
                vec![
                    f.id.clone(),
                    f.origin.clone(),
                    f.destination.clone(),
                    f.sched_departure.to_string(),
                    f.duration.to_string(),
                    f.original_aircraft.clone(),
                    f.original_crew.clone(),
                    opt(&f.multileg_group),
                    f.leg_index.to_string(),
                    f.seats.economy.to_string(),
                    f.seats.premium.to_string(),
                    f.seats.business.to_string(),
                ]
            })
            .collect(),
    )?;
    write_table(
        dir,
        "maintenances.csv",
        &["id", "aircraft", "duration", "fail_penalty", "airport", "earliest_start", "latest_start"],
        inst.maintenances
            .iter()
            .flat_map(|m| {
                m.allowed_windows.iter().map(move |w| {
                    vec![
                        m.id.clone(),
                        m.aircraft.clone(),
                        m.duration.to_string(),
                        m.fail_penalty.to_string(),
                        w.airport.clone(),
                        w.earliest_start.to_string(),
                        w.latest_start.to_string(),
                    ]
                })
            })
            .collect(),
    )?;
    write_table(
        dir,
        "slots.csv",
        &["id", "airport", "start", "end", "capacity", "nonuse_penalty"],
        inst.slots
            .iter()
            .map(|s| {
                vec![
                    s.id.clone(),
                    s.airport.clone(),
                    s.window.start.to_string(),
                    s.window.end.to_string(),
                    s.capacity.to_string(),
                    s.nonuse_penalty.to_string(),
                ]
            })
            .collect(),
    )?;
    write_table(
        dir,
        "itineraries.csv",
        &[
            "id",
            "passenger_count",
            "cancellation_cost",
            "downgrade_cost",
            "delay_cost",
            "flight",
            "cabin",
        ],
        inst.itineraries
            .iter()
            .flat_map(|it| {
                it.legs.iter().map(move |l| {
                    vec![
                        it.id.clone(),
                        it.passenger_count.to_string(),
                        opt(&it.cancellation_cost),
                        opt(&it.downgrade_cost),
                        opt(&it.delay_cost),
                        l.flight.clone(),
                        l.cabin.as_str().to_string(),
                    ]
                })
            })
            .collect(),
    )?;
    write_table(
        dir,
        "disruptions.csv",
        &["kind", "target", "minutes", "capacity", "window_start", "window_end"],
        inst.disruptions
            .iter()
            .map(|d| {
                let mut row = vec![d.kind_name().to_string(), d.target().to_string()];
                let (minutes, capacity, window) = match d {
                    Disruption::FlightDelay { minutes, .. } => (Some(*minutes), None, None),
                    Disruption::FlightCancellation { .. } => (None, None, None),
                    Disruption::AircraftUnavailability { window, .. }
                    | Disruption::AirportClosure { window, .. } => (None, None, Some(*window)),
                    Disruption::SlotChange { capacity, .. } => (None, Some(*capacity), None),
                };
                row.push(opt(&minutes));
                row.push(opt(&capacity));
                row.push(opt(&window.map(|w| w.start)));
                row.push(opt(&window.map(|w| w.end)));
                row
            })
            .collect(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::example_instance;

    #[test]
    fn round_trip_example() {
        let inst = example_instance();
        let dir = tempfile::tempdir().unwrap();
        write_dir(&inst, dir.path()).unwrap();
        assert_eq!(read_dir(dir.path()).unwrap(), inst);
    }

    #[test]
    fn missing_duration_cell_names_flight() {
        let inst = example_instance();
        let dir = tempfile::tempdir().unwrap();
        write_dir(&inst, dir.path()).unwrap();
        let p = dir.path().join("flights.csv");
        let text = fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut cells: Vec<&str> = lines[1].split(',').collect();
        cells[4] = "";
        lines[1] = cells.join(",");
        fs::write(&p, lines.join("\n")).unwrap();
        match read_dir(dir.path()).unwrap_err() {
            IoError::MissingField { id, field, at, .. } => {
                assert_eq!(id, inst.flights[0].id);
                assert_eq!(field, "duration");
                assert_eq!(at, "line 2");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_number_is_reported() {
        let inst = example_instance();
        let dir = tempfile::tempdir().unwrap();
        write_dir(&inst, dir.path()).unwrap();
        let p = dir.path().join("aircraft.csv");
        let text = fs::read_to_string(&p).unwrap().replacen(",360\n", ",soon\n", 1);
        fs::write(&p, text).unwrap();
        assert!(matches!(read_dir(dir.path()), Err(IoError::BadValue { .. })));
    }
}
