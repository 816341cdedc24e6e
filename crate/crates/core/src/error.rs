use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by model construction and the type-level operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    DuplicateTypeName(String),
    UnresolvedTypeRef(String),
    UnknownPrefix(String),
    AmbiguousName(String),
    InvalidName(String),
    KindMismatch(String),
    UnresolvedInstanceRef(String),
    DuplicateInstanceId(String),
    DuplicateFunctionValue { instance: String, function: String },
    InvalidLiteral { datatype: String, lexical: String },
    NotComposable { first: String, second: String },
    UnresolvedRef(String),
    NameCollision(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateTypeName(n) => write!(f, "type `{n}` is already declared"),
            Error::UnresolvedTypeRef(n) => write!(f, "unresolved type reference `{n}`"),
            Error::UnknownPrefix(p) => write!(f, "no extends declaration binds prefix `{p}`"),
            Error::AmbiguousName(n) => write!(f, "name `{n}` is ambiguous"),
            Error::InvalidName(n) => write!(f, "`{n}` is not a legal name"),
            Error::KindMismatch(m) => write!(f, "kind mismatch: {m}"),
            Error::UnresolvedInstanceRef(n) => write!(f, "unresolved instance reference `{n}`"),
            Error::DuplicateInstanceId(n) => write!(f, "instance id `{n}` is already used"),
            Error::DuplicateFunctionValue { instance, function } => {
                write!(f, "function `{function}` already has a value on `{instance}`")
            }
            Error::InvalidLiteral { datatype, lexical } => {
                write!(f, "`{lexical}` is not a valid {datatype} literal")
            }
            Error::NotComposable { first, second } => {
                write!(f, "`{first}` and `{second}` are not composable")
            }
            Error::UnresolvedRef(n) => write!(f, "unresolved reference `{n}`"),
            Error::NameCollision(m) => write!(f, "name collision: {m}"),
        }
    }
}

impl core::error::Error for Error {}
