use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn idx(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_idx(idx: usize) -> Self {
                $name(u32::try_from(idx).expect(concat!(stringify!($name), " overflow")))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

dense_id!(
    /// Index into the timetable's stop list.
    StopId,
    "s"
);
dense_id!(RouteId, "r");
dense_id!(TripId, "t");
dense_id!(
    /// Transfer graph vertex. Stops occupy `0..stop_count`; any vertices
    /// after that are non-stop points (e.g. street junctions).
    VertexId,
    "v"
);

impl From<StopId> for VertexId {
    fn from(s: StopId) -> VertexId {
        VertexId(s.0)
    }
}
