//! Modular invariants of Temperley-Lieb categories computed from quiver module categories.

pub mod cyclo;
pub mod int;
pub mod linalg;
pub mod scalar;
pub mod tl;
pub mod mtc;
pub mod quivmod;
pub mod alphainv;
pub mod frob;
