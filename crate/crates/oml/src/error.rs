use oml_core::{Code, Diagnostic, Loc, Severity};

use crate::xml::SyntaxError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{document}:{error}")]
    Syntax { document: String, error: SyntaxError },
    #[error("{document}:{}:{}: rule [{rule}]: {message}", .loc.line, .loc.column)]
    Grammar {
        document: String,
        rule: u8,
        message: String,
        loc: Loc,
    },
    #[error("{document}:{}:{}: {error}", .loc.line, .loc.column)]
    Model {
        document: String,
        loc: Loc,
        #[source]
        error: oml_core::Error,
    },
    #[error("no document available for imported ontology `{uri}`")]
    UnresolvableImport { uri: String },
    #[error("import cycle: {}", .chain.join(" -> "))]
    ImportCycle { chain: Vec<String> },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("instance `{instance}` has no entity classification")]
    MissingClassification { instance: String },
    #[error("instance `{instance}` has no unique most specific type among {}", .candidates.join(", "))]
    AmbiguousClassification { instance: String, candidates: Vec<String> },
    #[error("instance without id is referenced by `{referrer}`")]
    UnnamedInstance { referrer: String },
    #[error("`{name}` is a core tag name and cannot be a specific-style tag")]
    ReservedTag { name: String },
    #[error("{document}:{}:{}: element `{name}` is not a type of the ontology", .loc.line, .loc.column)]
    UnknownTag { document: String, name: String, loc: Loc },
    #[error("{document}:{}:{}: element `{element}` has no attribute `{attribute}`", .loc.line, .loc.column)]
    UnknownAttribute {
        document: String,
        element: String,
        attribute: String,
        loc: Loc,
    },
    #[error("{document}:{line}: {message}")]
    Format {
        document: String,
        line: u32,
        message: String,
    },
    #[error("{document}:{}:{}: {message}", .loc.line, .loc.column)]
    Xol { document: String, message: String, loc: Loc },
    #[error("higher-order construct cannot be exported: {0}")]
    HigherOrderUnsupported(String),
    #[error("datatype cannot be exported: {0}")]
    DataTypeUnsupported(String),
    #[error("construct not expressible in the target format: {0}")]
    UnsupportedConstruct(String),
    #[error(transparent)]
    Core(#[from] oml_core::Error),
}

impl Error {
    pub fn model(document: &str, e: oml_core::LocatedError) -> Self {
        Error::Model {
            document: document.to_string(),
            loc: e.loc,
            error: e.error,
        }
    }

    pub fn code(&self) -> Code {
        match self {
            Error::Syntax { .. } | Error::Format { .. } | Error::Xol { .. } => Code::SYN001,
            Error::Grammar { .. } => Code::GRM001,
            _ => Code::MOD001,
        }
    }

    /// This error as a diagnostic, keeping the position when there is one.
    pub fn to_diagnostic(&self) -> Diagnostic {
        let d = |document: &str, loc: Loc, message: String| {
            Diagnostic::new(Severity::Error, self.code(), message).at(document, loc)
        };
        match self {
            Error::Syntax { document, error } => d(document, error.loc, error.message.clone()),
            Error::Grammar {
                document,
                rule,
                message,
                loc,
            } => d(document, *loc, format!("rule [{rule}]: {message}")),
            Error::Model { document, loc, error } => d(document, *loc, error.to_string()),
            Error::UnknownTag { document, loc, name } => {
                d(document, *loc, format!("element `{name}` is not a type of the ontology"))
            }
            Error::UnknownAttribute {
                document,
                loc,
                element,
                attribute,
            } => d(document, *loc, format!("element `{element}` has no attribute `{attribute}`")),
            Error::Xol { document, message, loc } => d(document, *loc, message.clone()),
            Error::Format { document, line, message } => d(document, Loc::new(*line, 1), message.clone()),
            other => Diagnostic::new(Severity::Error, self.code(), other.to_string()),
        }
    }
}

pub(crate) trait ModelResult<T> {
    fn located(self, document: &str, loc: Loc) -> Result<T>;
}

impl<T> ModelResult<T> for std::result::Result<T, oml_core::Error> {
    fn located(self, document: &str, loc: Loc) -> Result<T> {
        self.map_err(|error| Error::Model {
            document: document.to_string(),
            loc,
            error,
        })
    }
}
