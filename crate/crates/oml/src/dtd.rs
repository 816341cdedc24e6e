//! Reading DTD text and validating documents against a DTD.

use std::collections::{BTreeMap, BTreeSet};

use oml_core::dtd::{AttDef, AttDefault, AttList, AttType, ContentModel, DtdDocument, ElementDecl, Occurs, Particle};
use oml_core::model::names::is_xml_name;
use oml_core::{Code, Diagnostic, Loc, Severity};

use crate::error::{Error, Result};
use crate::xml::{self, Element, Node};

/// Parse `<!ELEMENT>` and `<!ATTLIST>` declarations and comments.
pub fn parse_dtd(text: &str, document: &str) -> Result<DtdDocument> {
    let mut p = DtdParser {
        s: text,
        pos: 0,
        document,
    };
    let mut dtd = DtdDocument::default();
    loop {
        p.skip_ws();
        if p.pos >= p.s.len() {
            return Ok(dtd);
        }
        if p.eat("<!--") {
            match p.rest().find("-->") {
                Some(i) => p.pos += i + 3,
                None => return Err(p.error("unterminated comment")),
            }
        } else if p.eat("<!ELEMENT") {
            let name = p.name()?;
            let content = p.content_model()?;
            p.expect(">")?;
            dtd.elements.push(ElementDecl { name, content });
        } else if p.eat("<!ATTLIST") {
            let element = p.name()?;
            let mut attributes = Vec::new();
            loop {
                p.skip_ws();
                if p.eat(">") {
                    break;
                }
                let name = p.name()?;
                let ty = p.att_type()?;
                let default = p.att_default()?;
                attributes.push(AttDef { name, ty, default });
            }
            dtd.attlists.push(AttList { element, attributes });
        } else {
            return Err(p.error("expected <!ELEMENT, <!ATTLIST or a comment"));
        }
    }
}

struct DtdParser<'a> {
    s: &'a str,
    pos: usize,
    document: &'a str,
}

impl DtdParser<'_> {
    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn error(&self, message: &str) -> Error {
        let line = self.s[..self.pos].matches('\n').count() as u32 + 1;
        Error::Format {
            document: self.document.to_string(),
            line,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, t: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(t) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{t}`")))
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let r = self.rest();
        let n = r
            .find(|c: char| c.is_whitespace() || "()|,?*+>\"'".contains(c))
            .unwrap_or(r.len());
        let start = self.pos;
        self.pos += n;
        &self.s[start..start + n]
    }

    fn name(&mut self) -> Result<String> {
        let t = self.token().to_string();
        if is_xml_name(&t) {
            Ok(t)
        } else {
            Err(self.error(&format!("`{t}` is not a name")))
        }
    }

    fn occurs(&mut self) -> Occurs {
        let o = match self.rest().chars().next() {
            Some('?') => Occurs::Optional,
            Some('*') => Occurs::ZeroOrMore,
            Some('+') => Occurs::OneOrMore,
            _ => return Occurs::One,
        };
        self.pos += 1;
        o
    }

    fn content_model(&mut self) -> Result<ContentModel> {
        if self.eat("EMPTY") {
            return Ok(ContentModel::Empty);
        }
        if self.eat("ANY") {
            return Ok(ContentModel::Any);
        }
        let save = self.pos;
        if self.eat("(") && self.eat("#PCDATA") {
            let mut names = Vec::new();
            while self.eat("|") {
                names.push(self.name()?);
            }
            self.expect(")")?;
            if !names.is_empty() && !self.eat("*") {
                return Err(self.error("mixed content with element names must end in `)*`"));
            }
            self.eat("*");
            return Ok(ContentModel::Mixed(names));
        }
        self.pos = save;
        let p = self.particle()?;
        if matches!(p, Particle::Name(..)) {
            return Err(self.error("content model must be parenthesized"));
        }
        Ok(ContentModel::Children(p))
    }

    fn particle(&mut self) -> Result<Particle> {
        if !self.eat("(") {
            let n = self.name()?;
            return Ok(Particle::Name(n, self.occurs()));
        }
        let mut items = vec![self.particle()?];
        let mut sep = None;
        loop {
            if self.eat(")") {
                break;
            }
            let s = if self.eat("|") {
                '|'
            } else if self.eat(",") {
                ','
            } else {
                return Err(self.error("expected `|`, `,` or `)`"));
            };
            if sep.is_some_and(|x| x != s) {
                return Err(self.error("`|` and `,` mixed in one group"));
            }
            sep = Some(s);
            items.push(self.particle()?);
        }
        let o = self.occurs();
        Ok(match sep {
            Some('|') => Particle::Choice(items, o),
            _ => Particle::Seq(items, o),
        })
    }

    fn att_type(&mut self) -> Result<AttType> {
        if self.eat("(") {
            let mut vs = vec![self.token().to_string()];
            while self.eat("|") {
                vs.push(self.token().to_string());
            }
            self.expect(")")?;
            return Ok(AttType::Enumerated(vs));
        }
        Ok(match self.token() {
            "CDATA" => AttType::Cdata,
            "ID" => AttType::Id,
            "IDREF" => AttType::Idref,
            "NMTOKEN" => AttType::Nmtoken,
            "NMTOKENS" => AttType::Nmtokens,
            t => {
                let t = t.to_string();
                return Err(self.error(&format!("unsupported attribute type `{t}`")));
            }
        })
    }

    fn quoted(&mut self) -> Result<String> {
        self.skip_ws();
        let Some(q @ ('"' | '\'')) = self.rest().chars().next() else {
            return Err(self.error("expected a quoted value"));
        };
        let body = &self.rest()[1..];
        let Some(end) = body.find(q) else {
            return Err(self.error("unterminated value"));
        };
        let v = body[..end].to_string();
        self.pos += end + 2;
        Ok(v)
    }

    fn att_default(&mut self) -> Result<AttDefault> {
        if self.eat("#REQUIRED") {
            Ok(AttDefault::Required)
        } else if self.eat("#IMPLIED") {
            Ok(AttDefault::Implied)
        } else if self.eat("#FIXED") {
            Ok(AttDefault::Fixed(self.quoted()?))
        } else {
            Ok(AttDefault::Value(self.quoted()?))
        }
    }
}

/// End positions reachable by matching `p` against `names` from `start`.
fn matches(p: &Particle, names: &[&str], start: usize) -> BTreeSet<usize> {
    let once = |from: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &s in from {
            match p {
                Particle::Name(n, _) => {
                    if names.get(s) == Some(&n.as_str()) {
                        out.insert(s + 1);
                    }
                }
                Particle::Choice(items, _) => {
                    for i in items {
                        out.extend(matches(i, names, s));
                    }
                }
                Particle::Seq(items, _) => {
                    let mut cur = BTreeSet::from([s]);
                    for i in items {
                        cur = cur.iter().flat_map(|&c| matches(i, names, c)).collect();
                    }
                    out.extend(cur);
                }
            }
        }
        out
    };
    let occurs = match p {
        Particle::Name(_, o) | Particle::Choice(_, o) | Particle::Seq(_, o) => *o,
    };
    let start = BTreeSet::from([start]);
    match occurs {
        Occurs::One => once(&start),
        Occurs::Optional => &once(&start) | &start,
        Occurs::ZeroOrMore | Occurs::OneOrMore => {
            let mut reach = if occurs == Occurs::OneOrMore {
                once(&start)
            } else {
                start
            };
            loop {
                let next = &once(&reach) | &reach;
                if next == reach {
                    return reach;
                }
                reach = next;
            }
        }
    }
}

fn valid_nmtoken(v: &str) -> bool {
    !v.is_empty()
        && v
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '.' | '-' | '_' | ':'))
}

struct Validator<'a> {
    dtd: &'a DtdDocument,
    document: &'a str,
    ids: BTreeMap<String, Loc>,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn report(&mut self, code: Code, loc: Loc, message: String) {
        self.out
            .push(Diagnostic::new(Severity::Error, code, message).at(self.document, loc));
    }

    fn element(&mut self, e: &Element) {
        match self.dtd.element(&e.name) {
            None => self.report(Code::DTD001, e.loc, format!("element `{}` is not declared", e.name)),
            Some(decl) => self.content(e, &decl.content),
        }
        self.attributes(e);
        for c in e.elements() {
            self.element(c);
        }
    }

    fn content(&mut self, e: &Element, model: &ContentModel) {
        let has_text = e.children.iter().any(|n| matches!(n, Node::Text(..)) && !n.is_blank_text());
        let names: Vec<&str> = e.elements().map(|c| c.name.as_str()).collect();
        let ok = match model {
            ContentModel::Any => true,
            ContentModel::Empty => names.is_empty() && !has_text,
            ContentModel::Mixed(allowed) => names.iter().all(|n| allowed.iter().any(|a| a == n)),
            ContentModel::Children(p) => !has_text && matches(p, &names, 0).contains(&names.len()),
        };
        if !ok {
            let found = if names.is_empty() {
                "no elements".to_string()
            } else {
                names.join(", ")
            };
            self.report(
                Code::DTD002,
                e.loc,
                format!("content of `{}` ({found}) does not match {model}", e.name),
            );
        }
    }

    fn attributes(&mut self, e: &Element) {
        let decls: Vec<&AttDef> = self.dtd.attributes(&e.name).collect();
        for a in &e.attributes {
            let Some(d) = decls.iter().find(|d| d.name == a.name) else {
                if self.dtd.element(&e.name).is_some() {
                    self.report(
                        Code::DTD005,
                        a.loc,
                        format!("attribute `{}` is not declared for `{}`", a.name, e.name),
                    );
                }
                continue;
            };
            let ok = match &d.ty {
                AttType::Cdata => true,
                AttType::Id | AttType::Idref => is_xml_name(&a.value),
                AttType::Nmtoken => valid_nmtoken(&a.value),
                AttType::Nmtokens => a.value.split_whitespace().all(valid_nmtoken) && !a.value.trim().is_empty(),
                AttType::Enumerated(vs) => vs.contains(&a.value),
            } && match &d.default {
                AttDefault::Fixed(v) => &a.value == v,
                _ => true,
            };
            if !ok {
                self.report(
                    Code::DTD006,
                    a.loc,
                    format!("value `{}` of `{}` is not a valid {}", a.value, a.name, d.ty),
                );
            } else if d.ty == AttType::Id {
                if self.ids.contains_key(&a.value) {
                    self.report(Code::DTD004, a.loc, format!("ID `{}` is used more than once", a.value));
                } else {
                    self.ids.insert(a.value.clone(), a.loc);
                }
            }
        }
        for d in decls {
            if d.default == AttDefault::Required && e.attribute(&d.name).is_none() {
                self.report(
                    Code::DTD003,
                    e.loc,
                    format!("`{}` requires attribute `{}`", e.name, d.name),
                );
            }
        }
    }
}

/// Validate a document or fragment (several top-level elements) against
/// `dtd`. Text that is not well-formed gives a single SYN001 diagnostic.
pub fn validate(dtd: &DtdDocument, text: &str, document: &str) -> Vec<Diagnostic> {
    let nodes = match xml::parse(text) {
        Ok(n) => n,
        Err(e) => {
            return vec![Diagnostic::new(Severity::Error, Code::SYN001, e.message).at(document, e.loc)];
        }
    };
    let mut v = Validator {
        dtd,
        document,
        ids: BTreeMap::new(),
        out: Vec::new(),
    };
    for e in xml::top_elements(&nodes) {
        v.element(e);
    }
    v.out
}
