//! Minimal XML reader: enough of XML 1.0 to parse XML-RPC documents produced
//! by any mainstream implementation. Builds an element tree; comments,
//! processing instructions and the DOCTYPE are skipped, CDATA becomes text.

use crate::error::{CodecError, Position};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Element {
    pub name: String,
    pub children: Vec<Node>,
    /// Byte offset of the opening `<`.
    pub offset: usize,
}

impl Element {
    /// Child elements, failing if non-whitespace text is interleaved.
    pub fn element_children(&self, src: &str) -> Result<Vec<&Element>, CodecError> {
        let mut out = Vec::new();
        for child in &self.children {
            match child {
                Node::Element(e) => out.push(e),
                Node::Text(t) if t.chars().all(is_xml_space) => {}
                Node::Text(_) => {
                    return Err(CodecError::structure(
                        format!("unexpected text inside <{}>", self.name),
                        Position::at(src, self.offset),
                    ))
                }
            }
        }
        Ok(out)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for child in &self.children {
            if let Node::Text(t) = child {
                s.push_str(t);
            }
        }
        s
    }

    pub fn has_element_children(&self) -> bool {
        self.children.iter().any(|c| matches!(c, Node::Element(_)))
    }
}

pub(crate) fn is_xml_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

/// Parses a complete document and returns its root element.
pub(crate) fn parse_document(src: &str) -> Result<Element, CodecError> {
    let mut p = Parser { src, pos: 0 };
    p.skip_bom();
    p.skip_misc()?;
    if p.pos >= src.len() {
        return Err(p.err("document has no root element"));
    }
    let root = p.element()?;
    p.skip_misc()?;
    if p.pos < src.len() {
        return Err(p.err("content after the root element"));
    }
    Ok(root)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn err(&self, msg: impl Into<String>) -> CodecError {
        CodecError::xml(msg, Position::at(self.src, self.pos))
    }

    fn eof(&self) -> CodecError {
        self.err("unexpected end of document")
    }

    fn skip_bom(&mut self) {
        if self.rest().starts_with('\u{feff}') {
            self.pos += '\u{feff}'.len_utf8();
        }
    }

    fn skip_space(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start_matches(is_xml_space);
        self.pos += rest.len() - trimmed.len();
    }

    fn expect(&mut self, lit: &str) -> Result<(), CodecError> {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else if self.rest().len() < lit.len() && lit.starts_with(self.rest()) {
            Err(self.eof())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn skip_until(&mut self, end: &str) -> Result<&'a str, CodecError> {
        match self.rest().find(end) {
            Some(i) => {
                let body = &self.rest()[..i];
                self.pos += i + end.len();
                Ok(body)
            }
            None => {
                self.pos = self.src.len();
                Err(self.eof())
            }
        }
    }

    /// Whitespace, comments, PIs (including the XML declaration) and DOCTYPE.
    fn skip_misc(&mut self) -> Result<(), CodecError> {
        loop {
            self.skip_space();
            let rest = self.rest();
            if rest.starts_with("<?") {
                self.pos += 2;
                self.skip_until("?>")?;
            } else if rest.starts_with("<!--") {
                self.pos += 4;
                self.skip_until("-->")?;
            } else if rest.starts_with("<!DOCTYPE") {
                self.skip_doctype()?;
            } else {
                return Ok(());
            }
        }
    }

    fn skip_doctype(&mut self) -> Result<(), CodecError> {
        let mut depth = 0usize;
        for (i, c) in self.rest().char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth = depth.saturating_sub(1),
                '>' if depth == 0 => {
                    self.pos += i + 1;
                    return Ok(());
                }
                _ => {}
            }
        }
        self.pos = self.src.len();
        Err(self.eof())
    }

    fn name(&mut self) -> Result<&'a str, CodecError> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(if rest.is_empty() { self.eof() } else { self.err("expected a name") });
        }
        self.pos += end;
        Ok(&rest[..end])
    }

    fn attributes(&mut self) -> Result<bool, CodecError> {
        loop {
            self.skip_space();
            let rest = self.rest();
            if rest.starts_with("/>") {
                self.pos += 2;
                return Ok(true);
            }
            if rest.starts_with('>') {
                self.pos += 1;
                return Ok(false);
            }
            if rest.is_empty() {
                return Err(self.eof());
            }
            self.name()?;
            self.skip_space();
            self.expect("=")?;
            self.skip_space();
            let quote = match self.rest().chars().next() {
                Some(q @ ('"' | '\'')) => q,
                Some(_) => return Err(self.err("expected a quoted attribute value")),
                None => return Err(self.eof()),
            };
            self.pos += 1;
            self.skip_until(if quote == '"' { "\"" } else { "'" })?;
        }
    }

    fn element(&mut self) -> Result<Element, CodecError> {
        let offset = self.pos;
        self.expect("<")?;
        let name = self.name()?.to_string();
        let empty = self.attributes()?;
        let mut children = Vec::new();
        if empty {
            return Ok(Element { name, children, offset });
        }
        let mut text = String::new();
        loop {
            let rest = self.rest();
            if rest.is_empty() {
                return Err(self.eof());
            }
            if rest.starts_with("</") {
                flush_text(&mut text, &mut children);
                self.pos += 2;
                let close = self.name()?;
                if close != name {
                    return Err(self.err(format!("mismatched closing tag </{close}> for <{name}>")));
                }
                self.skip_space();
                self.expect(">")?;
                return Ok(Element { name, children, offset });
            } else if rest.starts_with("<!--") {
                self.pos += 4;
                self.skip_until("-->")?;
            } else if rest.starts_with("<![CDATA[") {
                self.pos += 9;
                text.push_str(self.skip_until("]]>")?);
            } else if rest.starts_with("<?") {
                self.pos += 2;
                self.skip_until("?>")?;
            } else if rest.starts_with('<') {
                flush_text(&mut text, &mut children);
                children.push(Node::Element(self.element()?));
            } else {
                self.char_data(&mut text)?;
            }
        }
    }

    /// Text up to the next `<`, with entity references resolved and line
    /// endings normalized to `\n`.
    fn char_data(&mut self, out: &mut String) -> Result<(), CodecError> {
        let rest = self.rest();
        let end = rest.find('<').unwrap_or(rest.len());
        let raw = &rest[..end];
        let mut chars = raw.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '&' => {
                    let semi = raw[i..].find(';').ok_or_else(|| {
                        CodecError::xml("unterminated entity reference", Position::at(self.src, self.pos + i))
                    })?;
                    let entity = &raw[i + 1..i + semi];
                    let decoded = decode_entity(entity).ok_or_else(|| {
                        CodecError::xml(
                            format!("unknown entity `&{entity};`"),
                            Position::at(self.src, self.pos + i),
                        )
                    })?;
                    out.push(decoded);
                    while let Some(&(j, _)) = chars.peek() {
                        if j > i + semi {
                            break;
                        }
                        chars.next();
                    }
                }
                '\r' => {
                    if matches!(chars.peek(), Some(&(_, '\n'))) {
                        chars.next();
                    }
                    out.push('\n');
                }
                c => out.push(c),
            }
        }
        self.pos += end;
        Ok(())
    }
}

fn flush_text(text: &mut String, children: &mut Vec<Node>) {
    if !text.is_empty() {
        children.push(Node::Text(std::mem::take(text)));
    }
}

fn decode_entity(entity: &str) -> Option<char> {
    match entity {
        "lt" => Some('<'),
        "gt" => Some('>'),
        "amp" => Some('&'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        _ => {
            let code = if let Some(hex) = entity.strip_prefix("#x") {
                u32::from_str_radix(hex, 16).ok()?
            } else {
                entity.strip_prefix('#')?.parse().ok()?
            };
            char::from_u32(code)
        }
    }
}

/// Escapes text content. `\r` is written as a character reference so that it
/// survives line-ending normalization on the reading side.
pub(crate) fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Characters that XML 1.0 can carry at all.
pub(crate) fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r') || (c >= '\u{20}' && c != '\u{fffe}' && c != '\u{ffff}')
}
