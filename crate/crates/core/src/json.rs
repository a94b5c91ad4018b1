//! Order- and duplicate-preserving JSON tree.
//!
//! Thing annotations in the wild repeat member names (the same key used
//! several times to express a list), which a map-based JSON model would
//! silently collapse. This parser keeps object members as an ordered list
//! of `(name, value)` pairs and keeps number lexemes verbatim, so a
//! parse → serialize → parse round trip is structurally lossless.

use std::fmt;

use thiserror::Error;

/// A JSON number, kept as its source lexeme so serialization is lossless.
#[derive(Debug, Clone)]
pub struct JsonNumber {
    lexeme: String,
}

impl JsonNumber {
    /// Builds a number from a pre-validated lexeme.
    pub fn from_lexeme(lexeme: impl Into<String>) -> Self {
        JsonNumber { lexeme: lexeme.into() }
    }

    pub fn from_f64(value: f64) -> Self {
        JsonNumber { lexeme: format_f64(value) }
    }

    pub fn lexeme(&self) -> &str {
        &self.lexeme
    }

    pub fn as_f64(&self) -> f64 {
        self.lexeme.parse().unwrap_or(f64::NAN)
    }
}

impl PartialEq for JsonNumber {
    fn eq(&self, other: &Self) -> bool {
        self.lexeme == other.lexeme
    }
}

pub(crate) fn format_f64(value: f64) -> String {
    if value.is_finite() && value == value.trunc() && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{}", value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JsonNode {
    Null,
    Bool(bool),
    Number(JsonNumber),
    String(String),
    Array(Vec<JsonNode>),
    /// Members in source order, duplicates preserved.
    Object(Vec<(String, JsonNode)>),
}

impl JsonNode {
    pub fn string(s: impl Into<String>) -> Self {
        JsonNode::String(s.into())
    }

    pub fn number(value: f64) -> Self {
        JsonNode::Number(JsonNumber::from_f64(value))
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            JsonNode::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            JsonNode::Number(n) => Some(n.as_f64()),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[JsonNode]> {
        match self {
            JsonNode::Array(items) => Some(items),
            _ => None,
        }
    }

    pub fn members(&self) -> Option<&[(String, JsonNode)]> {
        match self {
            JsonNode::Object(members) => Some(members),
            _ => None,
        }
    }

    /// First member with the given name, if this is an object.
    pub fn member(&self, name: &str) -> Option<&JsonNode> {
        self.members()?.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// All members with the given name, in source order.
    pub fn members_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a JsonNode> {
        self.members()
            .unwrap_or(&[])
            .iter()
            .filter(move |(n, _)| n == name)
            .map(|(_, v)| v)
    }

    pub fn is_object(&self) -> bool {
        matches!(self, JsonNode::Object(_))
    }

    pub fn to_json_string(&self) -> String {
        let mut out = String::new();
        write_node(&mut out, self, None, 0);
        out
    }

    pub fn to_json_string_pretty(&self) -> String {
        let mut out = String::new();
        write_node(&mut out, self, Some(2), 0);
        out.push('\n');
        out
    }
}

fn write_node(out: &mut String, node: &JsonNode, indent: Option<usize>, level: usize) {
    match node {
        JsonNode::Null => out.push_str("null"),
        JsonNode::Bool(true) => out.push_str("true"),
        JsonNode::Bool(false) => out.push_str("false"),
        JsonNode::Number(n) => out.push_str(n.lexeme()),
        JsonNode::String(s) => write_escaped(out, s),
        JsonNode::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                break_line(out, indent, level + 1);
                write_node(out, item, indent, level + 1);
            }
            if !items.is_empty() {
                break_line(out, indent, level);
            }
            out.push(']');
        }
        JsonNode::Object(members) => {
            out.push('{');
            for (i, (name, value)) in members.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                break_line(out, indent, level + 1);
                write_escaped(out, name);
                out.push(':');
                if indent.is_some() {
                    out.push(' ');
                }
                write_node(out, value, indent, level + 1);
            }
            if !members.is_empty() {
                break_line(out, indent, level);
            }
            out.push('}');
        }
    }
}

fn break_line(out: &mut String, indent: Option<usize>, level: usize) {
    if let Some(width) = indent {
        out.push('\n');
        for _ in 0..width * level {
            out.push(' ');
        }
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("json syntax error at line {line}, column {column} (byte {offset}): {message}")]
pub struct JsonError {
    pub message: String,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

/// Parses JSON source, retaining duplicate object members in order.
pub fn parse_json_preserving(text: &str) -> Result<JsonNode, JsonError> {
    let mut parser = Parser::new(text);
    parser.skip_ws();
    let node = parser.parse_value()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.error("trailing content after top-level value"));
    }
    Ok(node)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { bytes: text.as_bytes(), pos: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t') | Some(b'\n') | Some(b'\r')) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> JsonError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> JsonError {
        let mut line = 1;
        let mut column = 1;
        for &b in &self.bytes[..offset.min(self.bytes.len())] {
            if b == b'\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        JsonError { message: message.into(), offset, line, column }
    }

    fn expect(&mut self, b: u8) -> Result<(), JsonError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", b as char)))
        }
    }

    fn parse_value(&mut self) -> Result<JsonNode, JsonError> {
        match self.peek() {
            Some(b'{') => self.parse_object(),
            Some(b'[') => self.parse_array(),
            Some(b'"') => Ok(JsonNode::String(self.parse_string()?)),
            Some(b't') => self.parse_keyword("true", JsonNode::Bool(true)),
            Some(b'f') => self.parse_keyword("false", JsonNode::Bool(false)),
            Some(b'n') => self.parse_keyword("null", JsonNode::Null),
            Some(b'-') | Some(b'0'..=b'9') => self.parse_number(),
            Some(other) => Err(self.error(format!("unexpected character '{}'", other as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn parse_keyword(&mut self, word: &str, node: JsonNode) -> Result<JsonNode, JsonError> {
        if self.bytes[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            Ok(node)
        } else {
            Err(self.error(format!("expected '{}'", word)))
        }
    }

    fn parse_object(&mut self) -> Result<JsonNode, JsonError> {
        self.expect(b'{')?;
        let mut members = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(JsonNode::Object(members));
        }
        loop {
            self.skip_ws();
            if self.peek() != Some(b'"') {
                return Err(self.error("expected string member name"));
            }
            let name = self.parse_string()?;
            self.skip_ws();
            self.expect(b':')?;
            self.skip_ws();
            let value = self.parse_value()?;
            members.push((name, value));
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b'}') => return Ok(JsonNode::Object(members)),
                _ => return Err(self.error_at(self.pos.saturating_sub(1), "expected ',' or '}'")),
            }
        }
    }

    fn parse_array(&mut self) -> Result<JsonNode, JsonError> {
        self.expect(b'[')?;
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(JsonNode::Array(items));
        }
        loop {
            self.skip_ws();
            items.push(self.parse_value()?);
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b']') => return Ok(JsonNode::Array(items)),
                _ => return Err(self.error_at(self.pos.saturating_sub(1), "expected ',' or ']'")),
            }
        }
    }

    fn parse_string(&mut self) -> Result<String, JsonError> {
        self.expect(b'"')?;
        let mut out = String::new();
        loop {
            let start = self.pos;
            match self.bump() {
                None => return Err(self.error("unterminated string")),
                Some(b'"') => return Ok(out),
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push('"'),
                    Some(b'\\') => out.push('\\'),
                    Some(b'/') => out.push('/'),
                    Some(b'b') => out.push('\u{08}'),
                    Some(b'f') => out.push('\u{0c}'),
                    Some(b'n') => out.push('\n'),
                    Some(b'r') => out.push('\r'),
                    Some(b't') => out.push('\t'),
                    Some(b'u') => {
                        let cp = self.parse_hex4(start)?;
                        if (0xd800..0xdc00).contains(&cp) {
                            // high surrogate: require a following \uXXXX low surrogate
                            if self.bump() != Some(b'\\') || self.bump() != Some(b'u') {
                                return Err(self.error_at(start, "unpaired surrogate escape"));
                            }
                            let low = self.parse_hex4(start)?;
                            if !(0xdc00..0xe000).contains(&low) {
                                return Err(self.error_at(start, "invalid low surrogate"));
                            }
                            let combined =
                                0x10000 + ((cp - 0xd800) << 10) + (low - 0xdc00);
                            match char::from_u32(combined) {
                                Some(c) => out.push(c),
                                None => return Err(self.error_at(start, "invalid surrogate pair")),
                            }
                        } else if (0xdc00..0xe000).contains(&cp) {
                            return Err(self.error_at(start, "unpaired surrogate escape"));
                        } else {
                            match char::from_u32(cp) {
                                Some(c) => out.push(c),
                                None => return Err(self.error_at(start, "invalid unicode escape")),
                            }
                        }
                    }
                    _ => return Err(self.error_at(start, "invalid escape sequence")),
                },
                Some(b) if b < 0x20 => {
                    return Err(self.error_at(start, "raw control character in string"));
                }
                Some(b) if b < 0x80 => out.push(b as char),
                Some(b) => {
                    // multi-byte UTF-8: the input is a &str, so the sequence is valid
                    let len = utf8_len(b);
                    let end = start + len;
                    let slice = &self.bytes[start..end];
                    out.push_str(std::str::from_utf8(slice).expect("input was valid utf-8"));
                    self.pos = end;
                }
            }
        }
    }

    fn parse_hex4(&mut self, err_at: usize) -> Result<u32, JsonError> {
        let mut cp: u32 = 0;
        for _ in 0..4 {
            let d = match self.bump() {
                Some(b @ b'0'..=b'9') => (b - b'0') as u32,
                Some(b @ b'a'..=b'f') => (b - b'a' + 10) as u32,
                Some(b @ b'A'..=b'F') => (b - b'A' + 10) as u32,
                _ => return Err(self.error_at(err_at, "invalid \\u escape")),
            };
            cp = cp * 16 + d;
        }
        Ok(cp)
    }

    fn parse_number(&mut self) -> Result<JsonNode, JsonError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => self.pos += 1,
            Some(b'1'..=b'9') => self.take_digits(),
            _ => return Err(self.error("invalid number")),
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if !matches!(self.peek(), Some(b'0'..=b'9')) {
                return Err(self.error("digit expected after decimal point"));
            }
            self.take_digits();
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !matches!(self.peek(), Some(b'0'..=b'9')) {
                return Err(self.error("digit expected in exponent"));
            }
            self.take_digits();
        }
        let lexeme = std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("number lexemes are ascii")
            .to_string();
        Ok(JsonNode::Number(JsonNumber::from_lexeme(lexeme)))
    }

    fn take_digits(&mut self) {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
    }
}

fn utf8_len(lead: u8) -> usize {
    if lead >= 0xf0 {
        4
    } else if lead >= 0xe0 {
        3
    } else {
        2
    }
}

impl fmt::Display for JsonNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_members_are_retained_in_order() {
        let node = parse_json_preserving(r#"{"a":1,"a":2}"#).unwrap();
        let members = node.members().unwrap();
        assert_eq!(members.len(), 2);
        assert_eq!(members[0].0, "a");
        assert_eq!(members[1].0, "a");
        assert_eq!(members[0].1.as_f64(), Some(1.0));
        assert_eq!(members[1].1.as_f64(), Some(2.0));
    }

    #[test]
    fn empty_array() {
        assert_eq!(parse_json_preserving("[]").unwrap(), JsonNode::Array(vec![]));
    }

    #[test]
    fn number_lexemes_survive_round_trip() {
        let src = r#"[1, 1.0, 1e3, -0.25, 123456789012345678901234567890]"#;
        let node = parse_json_preserving(src).unwrap();
        let printed = node.to_json_string();
        assert_eq!(printed, "[1,1.0,1e3,-0.25,123456789012345678901234567890]");
        assert_eq!(parse_json_preserving(&printed).unwrap(), node);
    }

    #[test]
    fn string_escapes() {
        let node = parse_json_preserving(r#""a\"b\\c\ndA😀""#).unwrap();
        assert_eq!(node.as_str().unwrap(), "a\"b\\c\ndA😀");
        let printed = node.to_json_string();
        assert_eq!(parse_json_preserving(&printed).unwrap(), node);
    }

    #[test]
    fn error_reports_line_and_column() {
        let err = parse_json_preserving("{\n  \"a\": }").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.column > 1);
        assert!(err.offset > 0);
    }

    #[test]
    fn rejects_trailing_content() {
        assert!(parse_json_preserving("1 2").is_err());
    }

    #[test]
    fn rejects_unpaired_surrogate() {
        assert!(parse_json_preserving(r#""\ud800""#).is_err());
    }

    #[test]
    fn pretty_output_reparses_identically() {
        let src = r#"{"a":[1,{"b":null,"b":true}],"c":"x"}"#;
        let node = parse_json_preserving(src).unwrap();
        assert_eq!(parse_json_preserving(&node.to_json_string_pretty()).unwrap(), node);
    }
}
