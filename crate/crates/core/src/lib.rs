//! Dynamics of one-parameter degenerating families of rational maps, studied
//! through their non-Archimedean limits over the field of Puiseux series.

pub mod berkovich;
pub mod dynamics;
pub mod error;
pub mod family;
pub mod lab;
pub mod newton;
pub mod poly;
pub mod puiseux;
pub mod roots;
pub mod spectra;

pub use error::{Error, Result};
pub use puiseux::{PuiseuxSeries, RatExp, Valuation};
