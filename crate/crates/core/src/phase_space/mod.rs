//! Characteristic functions, Wigner functions, density reconstruction and
//! moment extraction.

pub mod characteristic;
pub mod grid;
pub mod moments;
pub mod reconstruct;
pub mod wigner;

pub use characteristic::{
    characteristic_function, CharacteristicField, ChiField, Ordering, PhaseSampler,
};
pub use grid::{GridLayout, PhaseGrid, RadialSpacing};
pub use moments::{moments_from_chi, Moment, OriginStencil};
pub use reconstruct::{reconstruct_density, Reconstruction};
pub use wigner::{wigner_field, wigner_function, wigner_guard, wigner_via_transform};
