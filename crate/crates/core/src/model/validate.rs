use std::fmt;

use super::{Instance, LocationKind, Matrix};

/// What a violation is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Instance,
    Location(usize),
    Request(usize),
    Vehicle(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: Subject,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subject {
            Subject::Instance => write!(f, "{}", self.message),
            Subject::Location(id) => write!(f, "location {id}: {}", self.message),
            Subject::Request(id) => write!(f, "request {id}: {}", self.message),
            Subject::Vehicle(id) => write!(f, "vehicle {id}: {}", self.message),
        }
    }
}

/// Lists every breached instance invariant. Empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject: Subject, message: String| out.push(Violation { subject, message });
    let n = inst.locations.len();

    if !(inst.meta.speed_kmh > 0.0) {
        push(Subject::Instance, format!("speed must be positive, got {}", inst.meta.speed_kmh));
    }
    if !(inst.meta.horizon >= 0.0) {
        push(Subject::Instance, format!("horizon must be non-negative, got {}", inst.meta.horizon));
    }

    for (idx, loc) in inst.locations.iter().enumerate() {
        let s = Subject::Location(loc.id);
        if loc.id != idx {
            push(s, format!("id does not match its position {idx}"));
        }
        if !loc.x.is_finite() || !loc.y.is_finite() {
            push(s, "non-finite coordinates".into());
        }
        if !(loc.tw.open >= 0.0) {
            push(s, format!("time window opens before zero ({})", loc.tw.open));
        }
        if !(loc.tw.open <= loc.tw.close) {
            push(s, format!("time window opens after it closes ({} > {})", loc.tw.open, loc.tw.close));
        }
        if !(loc.service >= 0.0) {
            push(s, format!("negative service time {}", loc.service));
        }
    }

    let kind_of = |id: usize| inst.locations.get(id).map(|l| l.kind);
    let capacity = inst.capacity();
    let mut uses = vec![0usize; n];

    for (idx, v) in inst.vehicles.iter().enumerate() {
        let s = Subject::Vehicle(v.id);
        if v.id != idx {
            push(s, format!("id does not match its position {idx}"));
        }
        if kind_of(v.origin) != Some(LocationKind::DepotOrigin) {
            push(s, format!("origin {} is not a depot-origin location", v.origin));
        } else {
            uses[v.origin] += 1;
        }
        if kind_of(v.destination) != Some(LocationKind::DepotDestination) {
            push(s, format!("destination {} is not a depot-destination location", v.destination));
        } else {
            uses[v.destination] += 1;
        }
        if v.capacity != capacity {
            push(s, format!("capacity {} differs from fleet capacity {capacity}", v.capacity));
        }
    }

    for (idx, r) in inst.requests.iter().enumerate() {
        let s = Subject::Request(r.id);
        if r.id != idx {
            push(s, format!("id does not match its position {idx}"));
        }
        if r.pickup == r.delivery {
            push(s, "pickup and delivery are the same location".into());
        }
        if kind_of(r.pickup) != Some(LocationKind::Pickup) {
            push(s, format!("pickup {} is not a pickup location", r.pickup));
        } else {
            uses[r.pickup] += 1;
        }
        if kind_of(r.delivery) != Some(LocationKind::Delivery) {
            push(s, format!("delivery {} is not a delivery location", r.delivery));
        } else {
            uses[r.delivery] += 1;
        }
        if r.qty == 0 {
            push(s, "demand must be positive".into());
        }
        if r.qty > capacity {
            push(s, format!("demand exceeds capacity ({} > {capacity})", r.qty));
        }
    }

    for &t in &inst.transfers {
        if kind_of(t) != Some(LocationKind::Transfer) {
            push(Subject::Location(t), "listed as transfer but is not a transfer location".into());
        } else {
            uses[t] += 1;
        }
    }

    for loc in &inst.locations {
        if loc.id < n && uses[loc.id] > 1 {
            push(Subject::Location(loc.id), format!("referenced {} times", uses[loc.id]));
        }
    }

    check_matrix(inst.travel(), "travel", n, &mut push);
    check_matrix(inst.distance(), "distance", n, &mut push);
    out
}

fn check_matrix(m: &Matrix, name: &str, n: usize, push: &mut impl FnMut(Subject, String)) {
    if m.rows() != n || m.cols() != n {
        push(
            Subject::Instance,
            format!("matrix dimension mismatch: {name} is {}x{}, expected {n}x{n}", m.rows(), m.cols()),
        );
        return;
    }
    for i in 0..n {
        if m.get(i, i) != 0.0 {
            push(Subject::Location(i), format!("{name} matrix diagonal is not zero"));
        }
        for j in 0..n {
            let v = m.get(i, j);
            if !(v >= 0.0) || !v.is_finite() {
                push(Subject::Location(i), format!("{name} matrix entry to {j} is negative or not finite"));
            }
        }
    }
}
