//! Exact computation of socle degrees `v_R(q)` of `R / m^[q]` over `F_p` for
//! determinantal, symmetric determinantal and Pfaffian hypersurfaces and for
//! rings of maximal minors, together with the `GL_n` weight combinatorics
//! used to reason about them.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`]: dense rank and kernel computations over `F_p`, bit-packed for `p = 2`;
//! * [`poly`]: monomials, sparse polynomials, truncated slices and multiplication maps;
//! * [`engine`]: socle-degree scans, annihilators, degenerations and threshold tables;
//! * [`weights`]: fundamental coordinates, base-`p` layers, Weyl dimensions, Euler characteristics.

pub mod arith;
pub mod engine;
pub mod linalg;
pub mod poly;
pub mod weights;

pub use engine::{
    compute_report, degenerate_pfaffian, indeg_annihilator, threshold_table, v_determinantal, v_hypersurface,
    v_polynomial_ring, Annihilator, BoundCheck, DegenerationReport, DegenerationRow, EngineError, Family, FamilyRange,
    FamilySpec, SliceRecord, SocleScan, ThresholdReport,
};
pub use linalg::{kernel_basis, rank, rank_of_column_stack, LinalgError, PrimeFieldMatrix};
pub use num_rational::Ratio;
pub use poly::{
    build_family_polynomial, mult_map_matrix, multiply_reduce, slice_basis, truncated_dimension,
    truncated_hilbert_series, ModularPolynomial, Monomial, PolyError, SliceBasis, VariableLayout,
};
pub use weights::{
    euler_characteristic, occurrence_excluded, p_adic_decompose, to_fundamental, vanishing_window, weyl_dimension,
    EulerCharacteristic, PAdicDecomposition, Weight, WeightError,
};
