pub mod problems;
pub mod quadrature;
