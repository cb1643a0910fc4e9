pub mod eigen;
pub mod quadrature;
pub mod special;

pub use eigen::{lowest_eigenpairs, BandedCholesky, EigenOptions, EigenPair, SparseHermitian};
pub use quadrature::{log_selfterm, Layout, QuadratureGrid};
pub use special::{macdonald, macdonald_derivative_identity_check, EULER_GAMMA};
