//! Multiplicative seasonal ARIMA with zero-pinned coefficient slots.

mod candidates;
mod document;
mod fit;
mod likelihood;
mod optimize;
mod polynomial;
mod simulate;
mod spec;

pub use candidates::candidate_models;
pub use document::{ModelDocument, TrainWindow, DOCUMENT_FORMAT, DOCUMENT_VERSION};
pub use fit::{
    fit, information_criteria, score_at_estimate, CoefficientEstimate, FittedModel, InformationCriteria,
    StartRecord,
};
pub use likelihood::log_likelihood;
pub use polynomial::expand_polynomials;
pub use simulate::simulate;
pub use spec::{CoefficientSet, Factor, SarimaSpec, Slot};

pub(crate) use likelihood::InnovationsRun;
pub(crate) use polynomial::{integrated_ar, psi_weights};
