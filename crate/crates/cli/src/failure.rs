use std::fmt;

/// Everything that ends a run with a nonzero status.
#[derive(Debug)]
pub enum Failure {
    Core(omsense::Error),
    /// Declared scene assertions that did not hold.
    Assertions(Vec<String>),
    /// The input produced no DVS events, so ratios and fractions are undefined.
    NoSignal(String),
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_ASSERTION: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;
pub const EXIT_NO_SIGNAL: i32 = 6;

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) => match e {
                omsense::Error::Config(_) => EXIT_CONFIG,
                omsense::Error::Undefined(_) => EXIT_NO_SIGNAL,
                _ => EXIT_INPUT,
            },
            Failure::Assertions(_) => EXIT_ASSERTION,
            Failure::NoSignal(_) => EXIT_NO_SIGNAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Core(omsense::Error::Undefined(_)) => "no-signal",
            Failure::Core(e) => e.code(),
            Failure::Assertions(_) => "assertion",
            Failure::NoSignal(_) => "no-signal",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Assertions(failed) => write!(f, "{}", failed.join("; ")),
            Failure::NoSignal(msg) => f.write_str(msg),
        }
    }
}

impl From<omsense::Error> for Failure {
    fn from(e: omsense::Error) -> Self {
        Failure::Core(e)
    }
}

pub fn config_error(message: impl Into<String>) -> Failure {
    Failure::Core(omsense::Error::Config(message.into()))
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;
