use std::fmt;

/// Why a command failed, which decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameter values.
    Usage(anyhow::Error),
    /// Missing, unreadable or malformed input data.
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage-error",
            Failure::Data(_) => "data-error",
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<ctx2vec::Error> for Failure {
    fn from(e: ctx2vec::Error) -> Self {
        match e {
            ctx2vec::Error::InvalidParameter(_) | ctx2vec::Error::Domain(_) => Failure::Usage(e.into()),
            other => Failure::Data(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

/// Adds a description of what was being done to an error, keeping its kind.
pub trait WithContext<T> {
    fn context_for(self, what: impl fmt::Display) -> Result<T, Failure>;
}

impl<T, E: Into<Failure>> WithContext<T> for Result<T, E> {
    fn context_for(self, what: impl fmt::Display) -> Result<T, Failure> {
        self.map_err(|e| match e.into() {
            Failure::Usage(e) => Failure::Usage(e.context(what.to_string())),
            Failure::Data(e) => Failure::Data(e.context(what.to_string())),
        })
    }
}
