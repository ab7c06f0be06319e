//! Reference-triangle Lagrange bases, quadrature rules and global dof maps.

mod quadrature;
mod reference;
mod space;

pub use quadrature::{gauss_legendre_unit, make_quadrature, QuadratureRule};
pub use reference::{make_reference_element, NodeKind, ReferenceElement};
pub use space::{build_dof_map, build_dof_map_periodic_x, FiniteElementSpace};

/// Quadrature exactness degree used for mass and stiffness forms of order-n
/// elements.
pub fn bilinear_quadrature_degree(order: usize) -> usize {
    2 * order + 1
}

/// Quadrature exactness degree used for the trilinear convection term.
pub fn convection_quadrature_degree(order: usize) -> usize {
    (3 * order).max(2)
}
