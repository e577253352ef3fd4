//! Shared fixtures for the kernel benchmarks.

use gabden_core::pointset::{lattice_points, Cube, Lattice2D, PointSet};
use gabden_core::signal::{make_preset, Preset, SampledSignal, TimeGrid};

pub fn default_gaussian() -> SampledSignal {
    make_preset(&Preset::Gaussian, &TimeGrid::default_grid()).expect("default gaussian")
}

pub fn unit_lattice_window(half: f64) -> PointSet {
    let lat = Lattice2D::new((1.0, 0.0), (0.0, 1.0)).expect("unit lattice");
    lattice_points(&lat, &Cube::new((0.0, 0.0), half).expect("window")).expect("points")
}
