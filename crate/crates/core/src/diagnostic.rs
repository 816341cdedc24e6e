//! Uniform checker output.

use alloc::string::String;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
            Severity::Info => "INFO",
        }
    }
}

macro_rules! codes {
    ($($name:ident => $doc:literal,)*) => {
        /// Registry of diagnostic codes.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Code {
            $(#[doc = $doc] $name,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$name,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$name => stringify!($name),)*
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(Code::$name => $doc,)*
                }
            }
        }
    };
}

codes! {
    SYN001 => "document is not well-formed in the supported XML subset",
    GRM001 => "document violates a core grammar rule",
    MOD001 => "model construction failed (unresolved name, duplicate, kind mismatch) or a construct the output format cannot express",
    UNR001 => "type reference left unresolved; a placeholder object type stands in",
    REF001 => "target instance reference does not resolve to an instance of the collection",
    CYC001 => "subtype cycle: the listed types are equivalent",
    CLS001 => "classification not preserved: an endpoint lacks the relation's source/target type",
    CLS002 => "classification inferred from a relation instance's signature",
    ENT001 => "entailment not preserved: relation subtype without endpoint subtypes",
    DIS001 => "relation types derived disjoint from disjoint endpoint types",
    DIS002 => "an instance is classified by two disjoint types",
    INC001 => "type is incoherent (declared or derived)",
    INC002 => "an instance is classified by an incoherent type",
    SUG001 => "extension inclusion suggests a subtype axiom",
    HOT001 => "higher-order relation classification not preserved",
    HOT002 => "a name denotes both a type and an individual",
    DTD001 => "element not declared in the DTD",
    DTD002 => "element content does not match its content model",
    DTD003 => "required attribute missing",
    DTD004 => "ID value used more than once",
    DTD005 => "attribute not declared for the element",
    DTD006 => "attribute value does not match its declared type",
    DTD007 => "relation element inherited from a supertype's content",
    RDF001 => "triple outside the mapped RDF/S subset, or a resource without a type",
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub document: String,
    pub line: u32,
    pub column: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub location: Option<Location>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: Code, message: impl Into<String>) -> Self {
        Diagnostic {
            severity,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, document: &str, loc: crate::Loc) -> Self {
        self.location = Some(Location {
            document: document.into(),
            line: loc.line,
            column: loc.column,
        });
        self
    }

    fn sort_key(&self) -> (Option<&Location>, Code, &str) {
        (self.location.as_ref(), self.code, &self.message)
    }
}

/// Document order, then code.
pub fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

impl fmt::Display for Diagnostic {
    /// `SEVERITY CODE file:line:col message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.severity.as_str(), self.code)?;
        match &self.location {
            Some(l) => write!(f, "{}:{}:{}", l.document, l.line, l.column)?,
            None => f.write_str("-:0:0")?,
        }
        write!(f, " {}", self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn renders_one_line() {
        let d = Diagnostic::new(Severity::Error, Code::CLS001, "n is not a Country")
            .at("kb.oml", crate::Loc::new(3, 7));
        assert_eq!(d.to_string(), "ERROR CLS001 kb.oml:3:7 n is not a Country");
    }

    #[test]
    fn ordering_is_document_then_code() {
        let mut v = vec![
            Diagnostic::new(Severity::Info, Code::SUG001, "b").at("a", crate::Loc::new(2, 1)),
            Diagnostic::new(Severity::Error, Code::ENT001, "c").at("a", crate::Loc::new(1, 1)),
            Diagnostic::new(Severity::Error, Code::CLS001, "d").at("a", crate::Loc::new(1, 1)),
        ];
        sort(&mut v);
        let codes: alloc::vec::Vec<_> = v.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::CLS001, Code::ENT001, Code::SUG001]);
    }

    #[test]
    fn registry_codes_are_unique() {
        let mut names: alloc::vec::Vec<_> = Code::ALL.iter().map(|c| c.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), Code::ALL.len());
    }
}
