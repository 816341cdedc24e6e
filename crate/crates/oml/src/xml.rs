//! A small XML reader and writer for the subset OML documents use:
//! elements, attributes, character data, comments and the predefined and
//! numeric character references. CDATA sections, processing instructions
//! (other than a leading XML declaration) and DOCTYPE are rejected.

use std::fmt::Write;

use oml_core::model::names::is_xml_name;
use oml_core::Loc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {}", .loc.line, .loc.column, .message)]
pub struct SyntaxError {
    pub message: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub value: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Node>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String, Loc),
    Comment(String, Loc),
}

impl Element {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            _ => None,
        })
    }

    /// Non-whitespace character data directly inside this element.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t, _) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }
}

impl Node {
    pub fn is_blank_text(&self) -> bool {
        matches!(self, Node::Text(t, _) if t.trim().is_empty())
    }
}

/// Parse a document or fragment: any sequence of elements, comments and
/// whitespace at top level. A leading `<?xml ...?>` declaration is skipped.
pub fn parse(text: &str) -> Result<Vec<Node>, SyntaxError> {
    let mut r = Reader {
        s: text,
        pos: 0,
        line: 1,
        col: 1,
    };
    r.skip_bom();
    if r.starts_with("<?xml") {
        r.skip_past("?>")?;
    }
    let mut nodes = Vec::new();
    while !r.at_end() {
        match r.node()? {
            Node::Text(t, loc) if !t.trim().is_empty() => {
                return Err(SyntaxError {
                    message: "character data outside the document element".into(),
                    loc,
                })
            }
            Node::Text(..) => {}
            n => nodes.push(n),
        }
    }
    Ok(nodes)
}

/// Top-level elements of a parsed fragment.
pub fn top_elements(nodes: &[Node]) -> impl Iterator<Item = &Element> {
    nodes.iter().filter_map(|n| match n {
        Node::Element(e) => Some(e),
        _ => None,
    })
}

struct Reader<'a> {
    s: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Reader<'_> {
    fn loc(&self) -> Loc {
        Loc::new(self.line, self.col)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            message: message.into(),
            loc: self.loc(),
        })
    }

    fn rest(&self) -> &str {
        &self.s[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn starts_with(&self, p: &str) -> bool {
        self.rest().starts_with(p)
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn advance(&mut self, n: usize) {
        let end = self.pos + n;
        while self.pos < end {
            self.bump();
        }
    }

    fn skip_bom(&mut self) {
        if self.starts_with('\u{feff}'.encode_utf8(&mut [0; 4])) {
            self.pos += 3;
        }
    }

    fn skip_ws(&mut self) -> bool {
        let mut any = false;
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.bump();
            any = true;
        }
        any
    }

    fn skip_past(&mut self, end: &str) -> Result<(), SyntaxError> {
        match self.rest().find(end) {
            Some(i) => {
                self.advance(i + end.len());
                Ok(())
            }
            None => self.err(format!("unterminated construct, expected `{end}`")),
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.starts_with(p) {
            self.advance(p.len());
            Ok(())
        } else {
            self.err(format!("expected `{p}`"))
        }
    }

    fn name(&mut self) -> Result<String, SyntaxError> {
        let rest = self.rest();
        let len = rest
            .find(|c: char| c.is_whitespace() || matches!(c, '=' | '>' | '/' | '<' | '"' | '\''))
            .unwrap_or(rest.len());
        let name = &rest[..len];
        if !is_xml_name(name) {
            return self.err(format!("`{name}` is not a legal XML name"));
        }
        let name = name.to_string();
        self.advance(len);
        Ok(name)
    }

    fn node(&mut self) -> Result<Node, SyntaxError> {
        let loc = self.loc();
        if self.starts_with("<!--") {
            self.advance(4);
            let Some(end) = self.rest().find("-->") else {
                return self.err("unterminated comment");
            };
            let body = self.rest()[..end].to_string();
            if body.contains("--") {
                return self.err("`--` inside a comment");
            }
            self.advance(end + 3);
            Ok(Node::Comment(body, loc))
        } else if self.starts_with("<![CDATA[") {
            self.err("CDATA sections are not supported")
        } else if self.starts_with("<!") {
            self.err("DOCTYPE and other declarations are not supported")
        } else if self.starts_with("<?") {
            self.err("processing instructions are not supported")
        } else if self.starts_with("</") {
            self.err("unexpected end tag")
        } else if self.starts_with("<") {
            self.element().map(Node::Element)
        } else {
            let mut text = String::new();
            while !self.at_end() && !self.starts_with("<") {
                if self.starts_with("&") {
                    text.push(self.reference()?);
                } else if self.starts_with("]]>") {
                    return self.err("`]]>` in character data");
                } else {
                    text.push(self.bump().unwrap_or_default());
                }
            }
            Ok(Node::Text(text, loc))
        }
    }

    fn reference(&mut self) -> Result<char, SyntaxError> {
        let loc = self.loc();
        let Some(end) = self.rest().find(';') else {
            return self.err("unterminated character reference");
        };
        let body = &self.rest()[1..end];
        let c = match body {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ => {
                let code = if let Some(hex) = body.strip_prefix("#x") {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = body.strip_prefix('#') {
                    dec.parse().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32)
            }
        };
        match c {
            Some(c) => {
                self.advance(end + 1);
                Ok(c)
            }
            None => Err(SyntaxError {
                message: format!("unknown entity `&{body};`"),
                loc,
            }),
        }
    }

    fn attribute_value(&mut self) -> Result<String, SyntaxError> {
        let Some(quote @ ('"' | '\'')) = self.peek() else {
            return self.err("attribute value must be quoted");
        };
        self.bump();
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return self.err("unterminated attribute value"),
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(value);
                }
                Some('<') => return self.err("`<` in attribute value"),
                Some('&') => value.push(self.reference()?),
                // Literal whitespace is normalized; references are kept.
                Some('\t' | '\n' | '\r') => {
                    self.bump();
                    value.push(' ');
                }
                Some(_) => value.push(self.bump().unwrap_or_default()),
            }
        }
    }

    fn element(&mut self) -> Result<Element, SyntaxError> {
        let loc = self.loc();
        self.expect("<")?;
        let name = self.name()?;
        let mut attributes: Vec<Attribute> = Vec::new();
        loop {
            let ws = self.skip_ws();
            if self.starts_with("/>") {
                self.advance(2);
                return Ok(Element {
                    name,
                    attributes,
                    children: Vec::new(),
                    loc,
                });
            }
            if self.starts_with(">") {
                self.advance(1);
                break;
            }
            if !ws {
                return self.err("expected whitespace before attribute");
            }
            let aloc = self.loc();
            let aname = self.name()?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            let value = self.attribute_value()?;
            if attributes.iter().any(|a| a.name == aname) {
                return Err(SyntaxError {
                    message: format!("duplicate attribute `{aname}`"),
                    loc: aloc,
                });
            }
            attributes.push(Attribute {
                name: aname,
                value,
                loc: aloc,
            });
        }
        let mut children = Vec::new();
        loop {
            if self.at_end() {
                return Err(SyntaxError {
                    message: format!("element `{name}` is not closed"),
                    loc,
                });
            }
            if self.starts_with("</") {
                self.advance(2);
                let end = self.name()?;
                if end != name {
                    return self.err(format!("end tag `{end}` does not match `{name}`"));
                }
                self.skip_ws();
                self.expect(">")?;
                return Ok(Element {
                    name,
                    attributes,
                    children,
                    loc,
                });
            }
            children.push(self.node()?);
        }
    }
}

pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            c => out.push(c),
        }
    }
    out
}

pub fn escape_attribute(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

/// Indenting writer for element trees.
#[derive(Default)]
pub struct XmlWriter {
    out: String,
    depth: usize,
}

impl XmlWriter {
    pub fn new() -> Self {
        Self::default()
    }

    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
    }

    fn tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        for (k, v) in attrs {
            let _ = write!(self.out, " {k}=\"{}\"", escape_attribute(v));
        }
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.tag(name, attrs);
        self.out.push_str("/>\n");
    }

    pub fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.tag(name, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    pub fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.indent();
        let _ = writeln!(self.out, "</{name}>");
    }

    /// `<name>text</name>` on one line.
    pub fn text_element(&mut self, name: &str, text: &str) {
        self.indent();
        let _ = writeln!(self.out, "<{name}>{}</{name}>", escape_text(text));
    }

    pub fn comment(&mut self, body: &str) {
        self.indent();
        let _ = writeln!(self.out, "<!--{body}-->");
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root(text: &str) -> Element {
        match parse(text).unwrap().remove(0) {
            Node::Element(e) => e,
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn elements_attributes_and_positions() {
        let e = root("<?xml version=\"1.0\"?>\n<a x='1'>\n  <b y=\"&lt;&#65;&amp;\"/>\n  text &gt;\n</a>");
        assert_eq!(e.name, "a");
        assert_eq!(e.loc, Loc::new(2, 1));
        let b = e.elements().next().unwrap();
        assert_eq!(b.attribute("y"), Some("<A&"));
        assert_eq!((b.loc.line, b.loc.column), (3, 3));
        assert_eq!(e.text().trim(), "text >");
    }

    #[test]
    fn attribute_whitespace_normalization() {
        let e = root("<a v=\"x\ny&#10;z\"/>");
        assert_eq!(e.attribute("v"), Some("x y\nz"));
        assert_eq!(escape_attribute("y\nz"), "y&#10;z");
    }

    #[test]
    fn rejected_constructs() {
        for bad in [
            "<a><![CDATA[x]]></a>",
            "<!DOCTYPE a><a/>",
            "<a><?pi x?></a>",
            "<a></b>",
            "<a x=\"1\" x=\"2\"/>",
            "<a",
            "<a>&foo;</a>",
            "<a/>text",
            "<1a/>",
        ] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        let err = parse("<a>\n  <b>\n</a>").unwrap_err();
        assert_eq!(err.loc.line, 3);
    }

    #[test]
    fn fragments_and_comments() {
        let nodes = parse("<!-- h --><a/>\n<b/>").unwrap();
        assert_eq!(nodes.len(), 3);
        assert_eq!(top_elements(&nodes).count(), 2);
    }

    #[test]
    fn writer() {
        let mut w = XmlWriter::new();
        w.open("a", &[("k", "a\"b")]);
        w.empty("b", &[]);
        w.close("a");
        assert_eq!(w.finish(), "<a k=\"a&quot;b\">\n  <b/>\n</a>\n");
    }
}
