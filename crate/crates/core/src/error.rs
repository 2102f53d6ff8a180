use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix [[{a}, {b}], [{c}, {d}]] does not have determinant 1")]
    NotUnimodular {
        a: String,
        b: String,
        c: String,
        d: String,
    },

    #[error("point {x} + {y}i is not in the upper half-plane")]
    NotInUpperHalfPlane { x: f64, y: f64 },

    #[error("element {element} is not in {group}")]
    NotInGroup { element: String, group: String },

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("parameter condition violated: {0}")]
    Condition(String),

    #[error("{method} did not converge: {detail}")]
    NonConvergence {
        method: &'static str,
        detail: String,
    },

    #[error("invalid multiplier: {0}")]
    InvalidMultiplier(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("consistency factor depends on z: {0}")]
    ZDependence(String),

    #[error("in {term}: {source}")]
    InTerm {
        term: String,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Attaches the name of the term being evaluated.
    pub fn in_term(self, term: impl Into<String>) -> Self {
        Error::InTerm {
            term: term.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
