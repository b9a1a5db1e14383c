use serde::{Deserialize, Serialize};

use super::{Duration, ModelError, StopId, Time, Timetable, TripId, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    /// Ride `trip` from stop position `board` to stop position `alight`.
    Trip {
        trip: TripId,
        board: usize,
        alight: usize,
    },
    Transfer {
        from: VertexId,
        to: VertexId,
        duration: Duration,
    },
}

/// A source-to-target itinerary of alternating trip and transfer legs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Journey {
    pub origin: StopId,
    pub destination: StopId,
    pub legs: Vec<Leg>,
    pub departure: Time,
    pub arrival: Time,
    pub num_trips: usize,
    pub transfer_duration_total: Duration,
}

impl Journey {
    /// Builds a journey and fills in the derived fields by replaying it.
    pub fn from_legs(
        tt: &Timetable,
        origin: StopId,
        destination: StopId,
        departure: Time,
        legs: Vec<Leg>,
    ) -> Result<Journey, ModelError> {
        let mut j = Journey {
            origin,
            destination,
            legs,
            departure,
            arrival: departure,
            num_trips: 0,
            transfer_duration_total: Duration::ZERO,
        };
        j.arrival = j.replay(tt)?;
        j.num_trips = j.legs.iter().filter(|l| matches!(l, Leg::Trip { .. })).count();
        j.transfer_duration_total = j
            .legs
            .iter()
            .map(|l| match l {
                Leg::Transfer { duration, .. } => *duration,
                Leg::Trip { .. } => Duration::ZERO,
            })
            .fold(Duration::ZERO, |a, b| a + b);
        Ok(j)
    }

    /// Forward simulation from `departure`: checks connectivity, boarding
    /// feasibility, and transfer durations, and returns the arrival time.
    pub fn replay(&self, tt: &Timetable) -> Result<Time, ModelError> {
        let broken = |leg: usize, reason: String| ModelError::BrokenJourney { leg, reason };
        let mut at = VertexId::from(self.origin);
        let mut now = self.departure;
        for (i, leg) in self.legs.iter().enumerate() {
            match *leg {
                Leg::Trip { trip, board, alight } => {
                    let t = tt.trips().get(trip.idx()).ok_or_else(|| broken(i, format!("unknown {trip}")))?;
                    let route = tt.route(t.route);
                    if board >= alight || alight >= route.stops.len() {
                        return Err(broken(i, format!("bad positions {board}->{alight}")));
                    }
                    if VertexId::from(route.stops[board]) != at {
                        return Err(broken(i, format!("boards at {} but traveller is at {at}", route.stops[board])));
                    }
                    if t.events[board].departure < now {
                        return Err(broken(
                            i,
                            format!("{trip} departs {} before arrival {now}", t.events[board].departure),
                        ));
                    }
                    now = t.events[alight].arrival;
                    at = route.stops[alight].into();
                }
                Leg::Transfer { from, to, duration } => {
                    if from != at {
                        return Err(broken(i, format!("transfer starts at {from} but traveller is at {at}")));
                    }
                    if from.idx() >= tt.vertex_count() {
                        return Err(broken(i, format!("unknown vertex {from}")));
                    }
                    let edge = tt.transfers().outgoing(from).iter().find(|e| e.target == to && e.duration == duration);
                    if edge.is_none() {
                        return Err(broken(i, format!("no transfer {from}->{to} of {duration}")));
                    }
                    now = now + duration;
                    at = to;
                }
            }
        }
        if at != VertexId::from(self.destination) {
            return Err(broken(self.legs.len(), format!("ends at {at}, not {}", self.destination)));
        }
        Ok(now)
    }

    /// Checks every stored field against a replay.
    pub fn check(&self, tt: &Timetable) -> Result<(), ModelError> {
        let rebuilt = Journey::from_legs(tt, self.origin, self.destination, self.departure, self.legs.clone())?;
        if rebuilt != *self {
            return Err(ModelError::BrokenJourney {
                leg: self.legs.len(),
                reason: format!(
                    "stored arrival {} / trips {} / walk {} differ from replay {} / {} / {}",
                    self.arrival,
                    self.num_trips,
                    self.transfer_duration_total,
                    rebuilt.arrival,
                    rebuilt.num_trips,
                    rebuilt.transfer_duration_total
                ),
            });
        }
        Ok(())
    }
}
