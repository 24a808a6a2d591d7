//! Rigid-body (Euler) equations on algebras of classical pseudodifferential
//! operators on the circle, at truncated-Fourier scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: Fourier-mode bases, dense operators, trigonometric polynomials.
//! * [`symbol`]: formal classical symbols, composition, parity, parametrices and
//!   the Wodzicki residue.
//! * [`zeta`]: zeta-renormalized traces `tr^Q` over the class
//!   "polynomial in (Δ+π) plus trace-class kernel".
//! * [`pairing`]: Hermitian pairings `tr^Q(A Q₀ B*)`, inertia twists and the
//!   twisted adjoint `ad_𝔸`.
//! * [`dynamics`]: the Euler equation, its Lax pair, integrals of motion and
//!   time integration.
//! * [`geometry`]: connection, curvature, sectional curvature, Arnold's identity
//!   and the geodesic spray.
//!
//! Everything is pure: values are immutable after construction and may be
//! shared between threads.

#![forbid(unsafe_code)]

pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod pairing;
pub mod spectral;
pub mod symbol;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use dynamics::{
    euler_rhs, functional_derivative_hk, heat_dressed_identity, integrate, lax_matrix, lax_residual, motion_integrals,
    solve_weak_euler, FlowConfig, Integrator, MotionIntegrals, TrajectoryRecord,
};
pub use geometry::{
    arnold_identity_gap, connection, curvature, sectional_curvature, spray_consistency,
    BiplaneDatum, CurvatureConvention, SprayReport, SpraySign,
};
pub use pairing::{
    ad_twisted, gram_nondegeneracy, indefiniteness_witness, pairing, InertiaSpec, PairingValue,
    Q0Kind, TwistSpec,
};
pub use spectral::{
    build_canonical, multiplication_operator, Canonical, FourierOperator, ModeBasis, TrigPoly,
};
pub use symbol::{
    classify_parity, compose_symbols, invert_elliptic_symbol, parity_of_product, wodzicki_residue,
    ClassicalSymbol, ParityClass,
};
pub use zeta::{
    renormalized_trace, star_identity_check, trace_defect, zeta_trace_spectral, RegularizedOperator,
    SpectralPolynomial, TraceResult, WeightSpec,
};
