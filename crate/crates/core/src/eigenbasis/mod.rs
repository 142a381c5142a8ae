//! PCA eigenbasis of a shape database, manifold diagnostics and pre-images.

mod io;
mod manifold;
mod pca;
mod space;

pub use io::{read_basis, write_basis, write_spectrum};
pub use manifold::{
    manifold_stats, nearest_neighbour_distances, upper_quantile, ManifoldStats, D0_EXACT_LIMIT,
};
pub use pca::{effective_dim, pca_fit, EigenBasis, PcaRoute, TruncationPolicy, RANK_TOL};
pub use space::{DesignSpace, IdentitySpace, PreImage, PreImageOptions, ShapeSpace};
