//! Concrete manifolds: Euclidean space, the unit sphere S², and SO(3).

mod euclidean;
pub mod matfun;
mod so3;
mod sphere;

use std::sync::Arc;

pub use euclidean::Euclidean;
pub use so3::{mat_to_row_major, row_major_to_mat, So3};
pub use sphere::Sphere;

use crate::manifold::Manifold;

/// Runtime selector for the bundled manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Euclidean(usize),
    Sphere,
    So3,
}

impl ManifoldKind {
    pub fn instantiate(self) -> Arc<dyn Manifold> {
        match self {
            ManifoldKind::Euclidean(n) => Arc::new(Euclidean::new(n)),
            ManifoldKind::Sphere => Arc::new(Sphere::new()),
            ManifoldKind::So3 => Arc::new(So3::new()),
        }
    }
}
