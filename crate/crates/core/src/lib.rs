//! Exact computations for archimedean valuation rings `O` of `Q`, `Q(sqrt d)`
//! and `Q(i)`: cofibrations between free modules, the hyperoctahedral groups
//! `GL_n(O)`, the residue field `F_inf`, K-group descriptors and the object
//! sets of the S-construction.
//!
//! Everything is generic over the integer type behind the rationals; the
//! aliases below fix it to `BigInt`.

pub mod abelian;
pub mod error;
pub mod field;
pub mod ktheory;
pub mod omod;
pub mod residue;
pub mod sconstr;
pub mod wreath;

use num_bigint::BigInt;

pub use abelian::{AbGroupDescriptor, Qualifier, Rank};
pub use error::{Error, ParseError, Result};
pub use field::{FieldDescriptor, Scalar};
pub use residue::{Face, FaceModule, SignMatrix};

pub type FieldElement = field::Element<BigInt>;
pub type EElement = field::UnitElement<BigInt>;
pub type OVector = omod::Vector<BigInt>;
pub type OMatrix = omod::Matrix<BigInt>;
pub type CofibCertificate = omod::Certificate<BigInt>;
pub type ProjectiveModule = omod::Projective<BigInt>;
pub type HyperoctahedralElement = wreath::WreathElement<field::UnitElement<BigInt>>;
