//! Minkowski spacetime points, causal classification and the agent layout.
//!
//! Units are chosen so that the signal speed is `c = 1`: spatial coordinates
//! are in light-seconds and times in seconds. Points are written `(x, y, z, t)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// An event in 3+1 dimensional Minkowski space.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub t: T,
}

impl<T: Real> SpacetimePoint<T> {
    pub fn new(x: T, y: T, z: T, t: T) -> Self {
        Self { x, y, z, t }
    }

    /// A point on the `y = z = 0` line.
    pub fn on_line(x: T, t: T) -> Self {
        Self::new(x, T::zero(), T::zero(), t)
    }

    pub fn origin() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.t.is_finite()
    }

    /// Euclidean distance between the spatial parts of two points.
    pub fn spatial_distance(&self, other: &Self) -> T {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let dz = other.z - self.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Same spatial position, different time.
    pub fn at_time(&self, t: T) -> Self {
        Self { t, ..*self }
    }

    /// Moves the spatial position by `fraction` of the way towards `other`
    /// keeping the time coordinate.
    fn lerp_spatial(&self, other: &Self, fraction: T) -> Self {
        Self {
            x: self.x + (other.x - self.x) * fraction,
            y: self.y + (other.y - self.y) * fraction,
            z: self.z + (other.z - self.z) * fraction,
            t: self.t,
        }
    }
}

impl<T: Real> fmt::Display for SpacetimePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.z, self.t)
    }
}

/// Causal relation of `q` as seen from `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalRelation {
    TimelikeFuture,
    TimelikePast,
    LightlikeFuture,
    LightlikePast,
    Spacelike,
    Coincident,
}

impl CausalRelation {
    /// The relation of `p` as seen from `q`, given the relation of `q` from `p`.
    pub fn inverse(self) -> Self {
        use CausalRelation::*;
        match self {
            TimelikeFuture => TimelikePast,
            TimelikePast => TimelikeFuture,
            LightlikeFuture => LightlikePast,
            LightlikePast => LightlikeFuture,
            Spacelike => Spacelike,
            Coincident => Coincident,
        }
    }

    /// True when a light-speed signal emitted at `p` can be received at `q`.
    pub fn is_reachable(self) -> bool {
        matches!(
            self,
            CausalRelation::TimelikeFuture
                | CausalRelation::LightlikeFuture
                | CausalRelation::Coincident
        )
    }
}

/// `(Δt)² − (Δx)² − (Δy)² − (Δz)²`.
pub fn interval_squared<T: Real>(p: &SpacetimePoint<T>, q: &SpacetimePoint<T>) -> T {
    let dt = q.t - p.t;
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let dz = q.z - p.z;
    dt * dt - dx * dx - dy * dy - dz * dz
}

/// Classifies `q` relative to `p`.
///
/// Lightlike classification uses the scalar's absolute tolerance on
/// `|Δt| − |Δr|` rather than on the squared interval, which keeps the band
/// width independent of the separation.
pub fn causal_relation<T: Real>(p: &SpacetimePoint<T>, q: &SpacetimePoint<T>) -> CausalRelation {
    let tol = T::tolerance();
    let dt = q.t - p.t;
    let dr = p.spatial_distance(q);
    if dt.abs() <= tol && dr <= tol {
        return CausalRelation::Coincident;
    }
    let gap = dt.abs() - dr;
    if gap.abs() <= tol {
        if dt > T::zero() {
            CausalRelation::LightlikeFuture
        } else {
            CausalRelation::LightlikePast
        }
    } else if gap < T::zero() {
        CausalRelation::Spacelike
    } else if dt > T::zero() {
        CausalRelation::TimelikeFuture
    } else {
        CausalRelation::TimelikePast
    }
}

/// The commitment point `P`, the two unveiling points `Q0`, `Q1`, and the
/// nominal distance `d` of the unveiling agents from the committer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolLayout<T> {
    pub commit_point: SpacetimePoint<T>,
    pub unveil_points: [SpacetimePoint<T>; 2],
    pub distance: T,
}

/// A single violated layout condition.
#[derive(Clone, Debug, PartialEq)]
pub enum LayoutViolation {
    /// A coordinate is NaN or infinite.
    NonFinite { point: &'static str },
    /// The two named points are not spacelike separated.
    NotSpacelike {
        first: &'static str,
        second: &'static str,
        relation: CausalRelation,
    },
    /// `Q_i` does not have a later time coordinate than `P`.
    NotAfterCommitment { unveil_index: usize },
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutViolation::NonFinite { point } => {
                write!(f, "{point} has a non-finite coordinate")
            }
            LayoutViolation::NotSpacelike {
                first,
                second,
                relation,
            } => write!(
                f,
                "{first} and {second} are not spacelike separated ({relation:?})"
            ),
            LayoutViolation::NotAfterCommitment { unveil_index } => {
                write!(
                    f,
                    "Q{unveil_index} does not lie after P in the agreed frame"
                )
            }
        }
    }
}

/// Error returned by operations that need a valid layout.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("invalid layout: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidLayout(pub Vec<LayoutViolation>);

impl<T: Real> ProtocolLayout<T> {
    /// `P` at the origin and `Q0`, `Q1` at `x = ∓distance`, both at time `unveil_time`.
    pub fn symmetric(distance: T, unveil_time: T) -> Self {
        Self {
            commit_point: SpacetimePoint::origin(),
            unveil_points: [
                SpacetimePoint::on_line(-distance, unveil_time),
                SpacetimePoint::on_line(distance, unveil_time),
            ],
            distance,
        }
    }

    /// The layout shifted by a constant displacement; causal structure is unchanged.
    pub fn translated(&self, by: &SpacetimePoint<T>) -> Self {
        let shift = |p: &SpacetimePoint<T>| {
            SpacetimePoint::new(p.x + by.x, p.y + by.y, p.z + by.z, p.t + by.t)
        };
        Self {
            commit_point: shift(&self.commit_point),
            unveil_points: [shift(&self.unveil_points[0]), shift(&self.unveil_points[1])],
            distance: self.distance,
        }
    }

    pub fn unveil_point(&self, i: usize) -> &SpacetimePoint<T> {
        &self.unveil_points[i]
    }
}

/// Checks pairwise spacelike separation of `P`, `Q0`, `Q1` and that both
/// unveiling points come strictly after `P` in the agreed frame.
pub fn validate_layout<T: Real>(layout: &ProtocolLayout<T>) -> Result<(), InvalidLayout> {
    let named = [
        ("P", &layout.commit_point),
        ("Q0", &layout.unveil_points[0]),
        ("Q1", &layout.unveil_points[1]),
    ];
    let mut violations = Vec::new();
    for (name, point) in named {
        if !point.is_finite() {
            violations.push(LayoutViolation::NonFinite { point: name });
        }
    }
    if !violations.is_empty() {
        return Err(InvalidLayout(violations));
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let relation = causal_relation(named[a].1, named[b].1);
        if relation != CausalRelation::Spacelike {
            violations.push(LayoutViolation::NotSpacelike {
                first: named[a].0,
                second: named[b].0,
                relation,
            });
        }
    }
    for (i, q) in layout.unveil_points.iter().enumerate() {
        if q.t <= layout.commit_point.t {
            violations.push(LayoutViolation::NotAfterCommitment { unveil_index: i });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(InvalidLayout(violations))
    }
}

/// Earliest event on the spatial segment between `p` and `q` at which
/// light-speed broadcasts emitted at both `p` and `q` have arrived.
///
/// A point a spatial distance `u` from `p` along the segment of length `L`
/// hears `p` at `t_p + u` and `q` at `t_q + L − u`; the later of the two is
/// minimised where they are equal, clamped to the segment.
pub fn earliest_joint_reception_between<T: Real>(
    p: &SpacetimePoint<T>,
    q: &SpacetimePoint<T>,
) -> SpacetimePoint<T> {
    let length = p.spatial_distance(q);
    if length <= T::tolerance() {
        return p.at_time(p.t.max(q.t));
    }
    let two = T::one() + T::one();
    let u = ((q.t - p.t + length) / two).max(T::zero()).min(length);
    let time = (p.t + u).max(q.t + length - u);
    p.lerp_spatial(q, u / length).at_time(time)
}

/// Where Bob's verifier for bit value `i` first holds both the commitment
/// broadcast from `P` and the unveiling broadcast from `Q_i`.
pub fn earliest_joint_reception<T: Real>(
    layout: &ProtocolLayout<T>,
    i: usize,
) -> Result<SpacetimePoint<T>, InvalidLayout> {
    validate_layout(layout)?;
    Ok(earliest_joint_reception_between(
        &layout.commit_point,
        &layout.unveil_points[i & 1],
    ))
}
