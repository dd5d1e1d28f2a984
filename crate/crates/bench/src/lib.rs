//! Shared fixtures for the benchmarks.

use roadsearch_core::{ControlPointSet, Point2D};

/// A winding seven-point road that stays inside the default map.
pub fn winding_road() -> ControlPointSet {
    ControlPointSet::new(
        [
            (15.0, 40.0),
            (45.0, 160.0),
            (75.0, 30.0),
            (100.0, 110.0),
            (130.0, 180.0),
            (160.0, 60.0),
            (185.0, 140.0),
        ]
        .into_iter()
        .map(Point2D::from)
        .collect(),
        200.0,
    )
    .expect("fixture inside the map")
}
