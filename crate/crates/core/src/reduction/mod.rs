//! Active/inactive split of the eigencoordinates and the additive GP.

mod additive;
mod selection;

pub use additive::{fit_additive, AdditiveGpModel, AdditiveKernel};
pub use selection::{classify_active, select_active, ActiveSet, RangeMode, SelectionOptions};
