//! Exact cohomology of finite groups with coefficients in a prime field.
//!
//! The crate is organized as a stack:
//!
//! * [`linalg`] — dense vectors and matrices over `F_p` with canonical
//!   reduced row-echelon forms, affine solution sets, and a few duality
//!   helpers (inverse-transpose, proportionality of functionals).
//! * [`groups`] — finite groups as validated multiplication tables,
//!   homomorphisms, subgroups, and constructors (cyclic, elementary
//!   abelian, products, dihedral, quaternion, matrix closures).
//! * [`unipotent`] — upper unitriangular matrix groups `U_m(F_p)`, their
//!   central and superdiagonal quotients, and the conjugation action on
//!   the kernel of the superdiagonal projection.
//! * [`cohomology`] — inhomogeneous cochains, the coboundary operator,
//!   cup products with trivial coefficients, cocycle/coboundary spaces,
//!   restriction, and the kernel of restriction to cyclic subgroups.
//! * [`massey`] — defining systems, n-fold Massey products, the triple
//!   product as an explicit coset in `H^2`, and vanishing verdicts by
//!   enumeration or by lifting through unipotent groups.
//! * [`embed`] — weak embedding problems along group extensions, the
//!   obstruction class of an extension, lift searches, and local-global
//!   style criteria at finite scale.
//! * [`schema`] — versioned JSON descriptors for groups, characters,
//!   modules, and cochains, shared with the CLI.
//!
//! All computation is exact; every budgeted operation reports the
//! offending dimensions when it refuses.

pub mod cohomology;
pub mod embed;
pub mod groups;
pub mod limits;
pub mod linalg;
pub mod massey;
pub mod schema;
pub mod unipotent;
