//! Exact unramified Hecke algebra computations for split reductive groups:
//! root data, Weyl characters, Kostka–Foulkes polynomials, the Satake
//! transform, basic functions of L-series, and archimedean gamma factors.

pub mod arch;
pub mod characters;
pub mod context;
pub mod error;
pub mod kostka;
pub mod laurent;
pub mod linalg;
pub mod lseries;
pub mod root_datum;
pub mod satake;

pub use characters::{CharacterExpansion, IrrDecomp, IrrPart};
pub use context::Context;
pub use error::{Error, Result};
pub use kostka::{DiskCache, KlMatrix, KostkaKey, QPoly};
pub use laurent::LaurentCoeff;
pub use root_datum::{CartanLabel, RepSpec, RootDatum, WeightVec};
pub use satake::{Graded, HeckeElement, SatakeImage, Window};
