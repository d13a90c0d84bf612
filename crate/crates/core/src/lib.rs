//! Laguerre-minimal surfaces in the isotropic model: oriented planes and
//! spheres, biharmonic fields, surface reconstruction, building blocks,
//! pencils of circles and numerical verification.
//!
//! Everything is generic over the scalar type; the aliases at the crate root
//! fix it to `f64`.

pub mod biharmonic;
pub mod error;
pub mod geom;
pub mod isotropic;
pub mod jet;
pub mod linalg;
pub mod mesh;
pub mod pencils;
pub mod reconstruct;
pub mod scalar;
pub mod surfaces;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3 = geom::Vec3<f64>;
pub type OrientedPlane = geom::OrientedPlane<f64>;
pub type OrientedSphere = geom::OrientedSphere<f64>;
pub type ContactElement = geom::ContactElement<f64>;
pub type Line3 = geom::Line3<f64>;
pub type IsoPoint = isotropic::IsoPoint<f64>;
pub type IMSphere = isotropic::IMSphere<f64>;
pub type IMTransform = isotropic::IMTransform<f64>;
pub type Jet4 = jet::Jet<f64>;
pub type ScalarField = biharmonic::ScalarField<f64>;
pub type ParamSurface = reconstruct::ParamSurface<f64>;
pub type Cycle = pencils::Cycle<f64>;
pub type PencilClass = pencils::PencilClass<f64>;
pub type RuledPatch = surfaces::RuledPatch<f64>;
pub type CycloLine = surfaces::CycloLine<f64>;
pub type Mesh = mesh::Mesh<f64>;
