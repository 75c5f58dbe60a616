//! Forward pattern maps for each supported antenna family.
//!
//! Every map is linear in the excitation. Sample points are far-field
//! directions except for the general array, which is observed at near-field
//! positions.

mod array;
mod dish;
mod fresnel;
mod horn;

pub use array::{
    array_nearfield_pattern, array_nearfield_terms, rect_array_pattern, rect_array_terms, GeneralArrayConfig,
    RectArrayConfig,
};
pub(crate) use dish::check_grid_size;
pub use dish::{dish_pattern, dish_pattern_on_grid, reflector_grid, DishConfig, Facet, DEFAULT_ANGULAR, DEFAULT_RADIAL};
pub use fresnel::fresnel;
pub use horn::{eplane_horn_pattern, HornConfig};
