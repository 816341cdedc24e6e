//! Lexical rules for names: XML `Name`, type namespace names
//! (`[prefix ':'] name`) and instance namespace names (`[typeName '#'] id`).

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '.' | '-' | '_' | ':' | '\u{B7}')
}

/// Legal XML `Name`.
pub fn is_xml_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => chars.all(is_name_char),
        _ => false,
    }
}

/// XML name without colons; the unit that appears on either side of a prefix.
pub fn is_local_name(s: &str) -> bool {
    !s.contains(':') && is_xml_name(s)
}

/// A parsed `typeNSname`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeName<'a> {
    pub prefix: Option<&'a str>,
    pub local: &'a str,
}

impl<'a> TypeName<'a> {
    pub fn parse(s: &'a str) -> Option<Self> {
        match s.split_once(':') {
            Some((p, l)) if is_local_name(p) && is_local_name(l) => Some(TypeName {
                prefix: Some(p),
                local: l,
            }),
            Some(_) => None,
            None if is_local_name(s) => Some(TypeName {
                prefix: None,
                local: s,
            }),
            None => None,
        }
    }
}

/// A parsed `instanceNSname`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceName<'a> {
    pub type_name: Option<TypeName<'a>>,
    pub id: &'a str,
}

impl<'a> InstanceName<'a> {
    pub fn parse(s: &'a str) -> Option<Self> {
        match s.rsplit_once('#') {
            Some((t, id)) => {
                let type_name = TypeName::parse(t)?;
                is_local_name(id).then_some(InstanceName {
                    type_name: Some(type_name),
                    id,
                })
            }
            None => is_local_name(s).then_some(InstanceName {
                type_name: None,
                id: s,
            }),
        }
    }
}

/// `Natno` lexical space: a nonempty run of ASCII digits.
pub fn is_natno(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
