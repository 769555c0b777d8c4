use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A data file could not be parsed. Lines are 1-based.
    #[error("{path}:{line}: {message}")]
    Ingest {
        path: String,
        line: usize,
        message: String,
    },

    /// A caller-supplied value is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Training or prediction failed; names the learner and dataset so
    /// batch pipelines can report which cell broke.
    #[error("learner {learner} on dataset {dataset}: {source}")]
    Learner {
        learner: String,
        dataset: String,
        #[source]
        source: Box<Error>,
    },

    /// A serialized artifact (records file, matrix, scores) is malformed.
    #[error("{0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps `self` with the learner/dataset pair it occurred under.
    pub fn in_cell(self, learner: &str, dataset: &str) -> Error {
        Error::Learner {
            learner: learner.to_string(),
            dataset: dataset.to_string(),
            source: Box::new(self),
        }
    }
}
