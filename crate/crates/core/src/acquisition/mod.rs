//! Expected Improvement, the random embedding and EI maximization.

mod ei;
mod embedding;
mod maximize;
mod surrogate;

pub use ei::{ei_gradient, ei_value, expected_improvement, normal_cdf, normal_pdf};
pub use embedding::{draw_embedding, embed_bounds, EmbeddingSpec};
pub use maximize::{
    maximize_ei, AcquisitionConfig, EiMaximum, InactiveFill, Incumbent, SearchDomain, Strategy,
};
pub use surrogate::{SubsetModel, Surrogate};
