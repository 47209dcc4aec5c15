//! Random Dehn functions of finitely presented groups.
//!
//! Group models with solvable word problems, quasi-geodesic combings,
//! Markov chains on groups, area oracles, the `Fill` functional with its
//! corridor decomposition, and Monte Carlo estimation of growth laws.

pub mod area;
pub mod chains;
pub mod combing;
pub mod error;
pub mod filling;
pub mod lab;
pub mod model;
pub mod presentation;
pub mod report;
pub mod rng;
pub mod word;

pub use area::{AreaBudget, AreaConfig, AreaEstimate, AreaGrade};
pub use chains::{Bijection, Chain, ChainSpec, PathSample};
pub use combing::{Combing, CombingKind, QGCertificate};
pub use error::{Error, Result};
pub use filling::{CorridorDecomposition, CorridorParams};
pub use model::{Ball, Family, GroupModel, NormalForm};
pub use presentation::{builtin, Presentation, BUILTIN_NAMES};
pub use word::{parse_word, Letter, Word};
