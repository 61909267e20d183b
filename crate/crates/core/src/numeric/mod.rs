//! Numerical building blocks: error function, normal distribution,
//! compensated summation, small dense linear algebra, and a BFGS maximizer.

pub mod erf;
pub mod linalg;
pub mod normal;
pub mod quasi_newton;
pub mod sum;

pub use erf::{erf, erfc};
pub use normal::{norm_cdf, norm_pdf, norm_quantile, norm_sf};
pub use sum::{kahan_sum, KahanSum};
