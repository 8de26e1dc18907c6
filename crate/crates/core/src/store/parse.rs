//! Parser for the project document with byte-accurate error positions.
//!
//! Statements are read one line at a time. Structure is strict: statements
//! must appear in canonical order, which keeps every accepted document one
//! save away from its canonical bytes.

use std::fmt;

use serde::Serialize;

use crate::model::{
    is_printable, Control, ControlId, ControlKind, ControlState, EntryId, EventPayload, EventSequence, InteractionEvent,
    Mockup, MockupId, ModelError, PointerSource, Project, Rect, Scenario, ScenarioId, TimelineEntry, FORMAT_VERSION,
};

/// Closed list of reasons a document can be rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseReason {
    UnexpectedEof,
    InvalidUtf8,
    InvalidCharacter,
    UnterminatedString,
    InvalidEscape,
    UnknownKeyword,
    UnexpectedStatement,
    MissingArgument,
    UnexpectedArgument,
    InvalidInteger,
    IntegerOutOfRange,
    ExpectedString,
    InvalidIdentifier,
    UnknownControlKind,
    UnknownEventKind,
    UnknownPointerSource,
    IncompatibleInitial,
    InvalidKeyChar,
    NonMonotoneTimestamp,
    UnsupportedSchemaVersion,
}

impl ParseReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseReason::UnexpectedEof => "unexpected_eof",
            ParseReason::InvalidUtf8 => "invalid_utf8",
            ParseReason::InvalidCharacter => "invalid_character",
            ParseReason::UnterminatedString => "unterminated_string",
            ParseReason::InvalidEscape => "invalid_escape",
            ParseReason::UnknownKeyword => "unknown_keyword",
            ParseReason::UnexpectedStatement => "unexpected_statement",
            ParseReason::MissingArgument => "missing_argument",
            ParseReason::UnexpectedArgument => "unexpected_argument",
            ParseReason::InvalidInteger => "invalid_integer",
            ParseReason::IntegerOutOfRange => "integer_out_of_range",
            ParseReason::ExpectedString => "expected_string",
            ParseReason::InvalidIdentifier => "invalid_identifier",
            ParseReason::UnknownControlKind => "unknown_control_kind",
            ParseReason::UnknownEventKind => "unknown_event_kind",
            ParseReason::UnknownPointerSource => "unknown_pointer_source",
            ParseReason::IncompatibleInitial => "incompatible_initial",
            ParseReason::InvalidKeyChar => "invalid_key_char",
            ParseReason::NonMonotoneTimestamp => "non_monotone_timestamp",
            ParseReason::UnsupportedSchemaVersion => "unsupported_schema_version",
        }
    }
}

impl fmt::Display for ParseReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rejection of a document. `offset` is a byte offset in `0..=len`; `line`
/// and `column` are 1-based, columns counted in characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub reason: ParseReason,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.reason, self.message)
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn at(bytes: &[u8], offset: usize, reason: ParseReason, message: impl Into<String>) -> Self {
        let offset = offset.min(bytes.len());
        let before = &bytes[..offset];
        let line_start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let line = 1 + before.iter().filter(|&&b| b == b'\n').count();
        let column = 1 + before[line_start..].iter().filter(|&&b| b & 0xC0 != 0x80).count();
        Self { offset, line, column, reason, message: message.into() }
    }
}

const KEYWORDS: &[&str] = &[
    "schema_version",
    "mockup",
    "name",
    "image",
    "size",
    "control",
    "bbox",
    "initial",
    "label",
    "scenario",
    "entry",
    "event",
    "asset_dir",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenValue<'a> {
    Word(&'a str),
    Str(String),
}

#[derive(Debug, Clone)]
struct Token<'a> {
    offset: usize,
    value: TokenValue<'a>,
}

#[derive(Debug, Clone)]
struct Statement<'a> {
    keyword: Token<'a>,
    args: Vec<Token<'a>>,
    /// Offset of the line terminator (or end of input).
    end: usize,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    peeked: Option<Option<Statement<'a>>>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0, peeked: None }
    }

    fn err(&self, offset: usize, reason: ParseReason, message: impl Into<String>) -> ParseError {
        ParseError::at(self.text.as_bytes(), offset, reason, message)
    }

    fn lex_line(&mut self) -> PResult<Option<Statement<'a>>> {
        loop {
            if self.pos >= self.text.len() {
                return Ok(None);
            }
            let start = self.pos;
            let end = self.text[start..].find('\n').map_or(self.text.len(), |i| start + i);
            self.pos = (end + 1).min(self.text.len()).max(end);
            if end == self.text.len() {
                self.pos = end;
            }
            let tokens = self.lex_tokens(start, end)?;
            let mut iter = tokens.into_iter();
            if let Some(keyword) = iter.next() {
                return Ok(Some(Statement { keyword, args: iter.collect(), end }));
            }
        }
    }

    fn lex_tokens(&self, start: usize, end: usize) -> PResult<Vec<Token<'a>>> {
        let line = &self.text[start..end];
        let mut tokens = Vec::new();
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let offset = start + i;
            match c {
                ' ' | '\t' => {
                    chars.next();
                }
                '#' if tokens.is_empty() => break,
                '"' => {
                    chars.next();
                    let mut value = String::new();
                    let mut closed = false;
                    while let Some((j, c)) = chars.next() {
                        match c {
                            '"' => {
                                closed = true;
                                break;
                            }
                            '\\' => value.push(self.lex_escape(start + j, &mut chars, end)?),
                            c if c.is_control() => {
                                return Err(self.err(start + j, ParseReason::InvalidCharacter, format!("raw control character U+{:04X} in string", c as u32)));
                            }
                            c => value.push(c),
                        }
                    }
                    if !closed {
                        return Err(self.err(end, ParseReason::UnterminatedString, "string is not closed before end of line"));
                    }
                    if let Some(&(j, c)) = chars.peek() {
                        if c != ' ' && c != '\t' {
                            return Err(self.err(start + j, ParseReason::InvalidCharacter, "expected whitespace after string"));
                        }
                    }
                    tokens.push(Token { offset, value: TokenValue::Str(value) });
                }
                c if c.is_control() => {
                    return Err(self.err(offset, ParseReason::InvalidCharacter, format!("unexpected character U+{:04X}", c as u32)));
                }
                _ => {
                    let mut word_end = line.len();
                    while let Some(&(j, c)) = chars.peek() {
                        if c == ' ' || c == '\t' {
                            word_end = j;
                            break;
                        }
                        if c == '"' || c.is_control() {
                            return Err(self.err(start + j, ParseReason::InvalidCharacter, format!("unexpected character {c:?} in word")));
                        }
                        chars.next();
                    }
                    tokens.push(Token { offset, value: TokenValue::Word(&line[i..word_end]) });
                }
            }
        }
        Ok(tokens)
    }

    fn lex_escape(
        &self,
        offset: usize,
        chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>,
        end: usize,
    ) -> PResult<char> {
        let bad = |p: &Self| p.err(offset, ParseReason::InvalidEscape, "invalid escape sequence");
        match chars.next() {
            Some((_, 'n')) => Ok('\n'),
            Some((_, 't')) => Ok('\t'),
            Some((_, 'r')) => Ok('\r'),
            Some((_, '"')) => Ok('"'),
            Some((_, '\\')) => Ok('\\'),
            Some((_, 'u')) => {
                if !matches!(chars.next(), Some((_, '{'))) {
                    return Err(bad(self));
                }
                let mut hex = String::new();
                loop {
                    match chars.next() {
                        Some((_, '}')) => break,
                        Some((_, c)) if c.is_ascii_hexdigit() && hex.len() < 6 => hex.push(c),
                        Some(_) => return Err(bad(self)),
                        None => return Err(self.err(end, ParseReason::UnterminatedString, "string is not closed before end of line")),
                    }
                }
                u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32).ok_or_else(|| bad(self))
            }
            Some(_) => Err(bad(self)),
            None => Err(self.err(end, ParseReason::UnterminatedString, "string is not closed before end of line")),
        }
    }

    fn peek(&mut self) -> PResult<Option<&Statement<'a>>> {
        if self.peeked.is_none() {
            let st = self.lex_line()?;
            self.peeked = Some(st);
        }
        Ok(self.peeked.as_ref().and_then(|s| s.as_ref()))
    }

    fn next(&mut self) -> PResult<Option<Statement<'a>>> {
        self.peek()?;
        Ok(self.peeked.take().flatten())
    }

    fn peek_is(&mut self, keyword: &str) -> PResult<bool> {
        Ok(matches!(self.peek()?, Some(st) if st.keyword.value == TokenValue::Word(keyword)))
    }

    fn unexpected(&self, st: &Statement<'a>, wanted: &str) -> ParseError {
        match &st.keyword.value {
            TokenValue::Word(w) if !KEYWORDS.contains(w) => {
                self.err(st.keyword.offset, ParseReason::UnknownKeyword, format!("unknown keyword `{w}`, expected {wanted}"))
            }
            TokenValue::Word(w) => {
                self.err(st.keyword.offset, ParseReason::UnexpectedStatement, format!("expected {wanted}, found `{w}`"))
            }
            TokenValue::Str(_) => {
                self.err(st.keyword.offset, ParseReason::UnexpectedStatement, format!("expected {wanted}, found a string"))
            }
        }
    }

    fn expect(&mut self, keyword: &str) -> PResult<Statement<'a>> {
        match self.next()? {
            None => Err(self.err(self.text.len(), ParseReason::UnexpectedEof, format!("document ends before `{keyword}`"))),
            Some(st) if st.keyword.value == TokenValue::Word(keyword) => Ok(st),
            Some(st) => Err(self.unexpected(&st, &format!("`{keyword}`"))),
        }
    }

    fn arg<'s>(&self, st: &'s Statement<'a>, i: usize, what: &str) -> PResult<&'s Token<'a>> {
        st.args.get(i).ok_or_else(|| self.err(st.end, ParseReason::MissingArgument, format!("missing {what}")))
    }

    fn word<'s>(&self, st: &'s Statement<'a>, i: usize, what: &str) -> PResult<(&'a str, usize)> {
        let tok = self.arg(st, i, what)?;
        match tok.value {
            TokenValue::Word(w) => Ok((w, tok.offset)),
            TokenValue::Str(_) => Err(self.err(tok.offset, ParseReason::UnexpectedArgument, format!("expected {what}, found a string"))),
        }
    }

    fn string(&self, st: &Statement<'a>, i: usize, what: &str) -> PResult<(String, usize)> {
        let tok = self.arg(st, i, what)?;
        match &tok.value {
            TokenValue::Str(s) => Ok((s.clone(), tok.offset)),
            TokenValue::Word(_) => Err(self.err(tok.offset, ParseReason::ExpectedString, format!("expected quoted {what}"))),
        }
    }

    fn integer(&self, st: &Statement<'a>, i: usize, what: &str) -> PResult<(u64, usize)> {
        let (w, offset) = self.word(st, i, what)?;
        if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) || (w.len() > 1 && w.starts_with('0')) {
            return Err(self.err(offset, ParseReason::InvalidInteger, format!("{what} must be a decimal integer without sign or leading zeros, found `{w}`")));
        }
        w.parse::<u64>()
            .map(|v| (v, offset))
            .map_err(|_| self.err(offset, ParseReason::IntegerOutOfRange, format!("{what} `{w}` is too large")))
    }

    fn u32_arg(&self, st: &Statement<'a>, i: usize, what: &str) -> PResult<u32> {
        let (v, offset) = self.integer(st, i, what)?;
        u32::try_from(v).map_err(|_| self.err(offset, ParseReason::IntegerOutOfRange, format!("{what} {v} exceeds {}", u32::MAX)))
    }

    fn id<T: std::str::FromStr>(&self, st: &Statement<'a>, i: usize, what: &str) -> PResult<T> {
        let (w, offset) = self.word(st, i, what)?;
        w.parse::<T>().map_err(|_| {
            self.err(offset, ParseReason::InvalidIdentifier, format!("`{w}` is not a valid {what} (1-64 of A-Z a-z 0-9 _ -)"))
        })
    }

    fn done(&self, st: &Statement<'a>, n: usize) -> PResult<()> {
        match st.args.get(n) {
            Some(tok) => Err(self.err(tok.offset, ParseReason::UnexpectedArgument, format!("`{}` takes {n} argument(s)", keyword_text(st)))),
            None => Ok(()),
        }
    }

    fn document(&mut self) -> PResult<Project> {
        let st = self.expect("schema_version")?;
        let (version, offset) = self.integer(&st, 0, "schema version")?;
        self.done(&st, 1)?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(self.err(offset, ParseReason::UnsupportedSchemaVersion, format!("schema_version {version} is not supported (expected {FORMAT_VERSION})")));
        }
        let mut project = Project::new();
        while self.peek_is("mockup")? {
            let m = self.mockup()?;
            project.mockups.push(m);
        }
        while self.peek_is("scenario")? {
            let s = self.scenario()?;
            project.scenarios.push(s);
        }
        let st = self.expect("asset_dir")?;
        project.asset_dir = self.string(&st, 0, "asset directory")?.0;
        self.done(&st, 1)?;
        if let Some(st) = self.next()? {
            return Err(self.unexpected(&st, "end of document"));
        }
        Ok(project)
    }

    fn mockup(&mut self) -> PResult<Mockup> {
        let st = self.expect("mockup")?;
        let id: MockupId = self.id(&st, 0, "mockup id")?;
        self.done(&st, 1)?;
        let st = self.expect("name")?;
        let name = self.string(&st, 0, "mockup name")?.0;
        self.done(&st, 1)?;
        let st = self.expect("image")?;
        let image_ref = self.string(&st, 0, "image reference")?.0;
        self.done(&st, 1)?;
        let st = self.expect("size")?;
        let width_px = self.u32_arg(&st, 0, "width")?;
        let height_px = self.u32_arg(&st, 1, "height")?;
        self.done(&st, 2)?;
        let mut controls = Vec::new();
        while self.peek_is("control")? {
            controls.push(self.control()?);
        }
        Ok(Mockup { id, name, image_ref, width_px, height_px, controls })
    }

    fn control(&mut self) -> PResult<Control> {
        let st = self.expect("control")?;
        let id: ControlId = self.id(&st, 0, "control id")?;
        let (kind_word, kind_offset) = self.word(&st, 1, "control kind")?;
        let kind = ControlKind::parse(kind_word).ok_or_else(|| {
            self.err(kind_offset, ParseReason::UnknownControlKind, format!("unknown control kind `{kind_word}` (button, text_input, checkbox, hotspot)"))
        })?;
        self.done(&st, 2)?;
        let st = self.expect("bbox")?;
        let bbox = Rect::new(
            self.u32_arg(&st, 0, "bbox x")?,
            self.u32_arg(&st, 1, "bbox y")?,
            self.u32_arg(&st, 2, "bbox width")?,
            self.u32_arg(&st, 3, "bbox height")?,
        );
        self.done(&st, 4)?;
        let st = self.expect("initial")?;
        let tok = self.arg(&st, 0, "initial state")?;
        let initial = match (kind, &tok.value) {
            (ControlKind::Button, TokenValue::Word("released")) => Some(ControlState::Button { pressed: false }),
            (ControlKind::Button, TokenValue::Word("pressed")) => Some(ControlState::Button { pressed: true }),
            (ControlKind::Checkbox, TokenValue::Word("unchecked")) => Some(ControlState::Checkbox { checked: false }),
            (ControlKind::Checkbox, TokenValue::Word("checked")) => Some(ControlState::Checkbox { checked: true }),
            (ControlKind::TextInput, TokenValue::Str(text)) => Some(ControlState::TextInput { text: text.clone() }),
            (ControlKind::Hotspot, TokenValue::Word("none")) => Some(ControlState::Hotspot),
            _ => None,
        };
        let initial = initial.ok_or_else(|| {
            let expected = match kind {
                ControlKind::Button => "`released` or `pressed`",
                ControlKind::Checkbox => "`unchecked` or `checked`",
                ControlKind::TextInput => "a quoted text",
                ControlKind::Hotspot => "`none`",
            };
            self.err(tok.offset, ParseReason::IncompatibleInitial, format!("initial state of a {kind} must be {expected}"))
        })?;
        self.done(&st, 1)?;
        let label = if self.peek_is("label")? {
            let st = self.expect("label")?;
            let label = self.string(&st, 0, "label")?.0;
            self.done(&st, 1)?;
            Some(label)
        } else {
            None
        };
        Ok(Control { id, kind, bbox, initial, label })
    }

    fn scenario(&mut self) -> PResult<Scenario> {
        let st = self.expect("scenario")?;
        let id: ScenarioId = self.id(&st, 0, "scenario id")?;
        self.done(&st, 1)?;
        let st = self.expect("name")?;
        let name = self.string(&st, 0, "scenario name")?.0;
        self.done(&st, 1)?;
        let mut entries = Vec::new();
        while self.peek_is("entry")? {
            let st = self.expect("entry")?;
            let id: EntryId = self.id(&st, 0, "entry id")?;
            let mockup_id: MockupId = self.id(&st, 1, "mockup id")?;
            self.done(&st, 2)?;
            let mut sequence = EventSequence::new();
            while self.peek_is("event")? {
                let st = self.expect("event")?;
                let event = self.event(&st)?;
                sequence.push(event).map_err(|e| match e {
                    ModelError::NonMonotoneTimestamp { t_ms, neighbor_ms, .. } => self.err(
                        st.args[0].offset,
                        ParseReason::NonMonotoneTimestamp,
                        format!("timestamp {t_ms} is earlier than the previous event at {neighbor_ms}"),
                    ),
                    other => self.err(st.keyword.offset, ParseReason::InvalidKeyChar, other.to_string()),
                })?;
            }
            entries.push(TimelineEntry { id, mockup_id, sequence });
        }
        Ok(Scenario { id, name, entries })
    }

    fn event(&self, st: &Statement<'a>) -> PResult<InteractionEvent> {
        let (t_ms, _) = self.integer(st, 0, "timestamp")?;
        let (kind, kind_offset) = self.word(st, 1, "event kind")?;
        let source = |i: usize| -> PResult<PointerSource> {
            let (w, offset) = self.word(st, i, "pointer source")?;
            PointerSource::parse(w).ok_or_else(|| {
                self.err(offset, ParseReason::UnknownPointerSource, format!("unknown pointer source `{w}` (mouse, touch)"))
            })
        };
        let (payload, argc) = match kind {
            "pointer_move" => (EventPayload::PointerMove { x: self.u32_arg(st, 2, "x")?, y: self.u32_arg(st, 3, "y")? }, 4),
            "pointer_down" => (
                EventPayload::PointerDown { x: self.u32_arg(st, 2, "x")?, y: self.u32_arg(st, 3, "y")?, source: source(4)? },
                5,
            ),
            "pointer_up" => (
                EventPayload::PointerUp { x: self.u32_arg(st, 2, "x")?, y: self.u32_arg(st, 3, "y")?, source: source(4)? },
                5,
            ),
            "key_char" => {
                let (s, offset) = self.string(st, 2, "key character")?;
                let mut chars = s.chars();
                let char = match (chars.next(), chars.next()) {
                    (Some(c), None) if is_printable(c) => c,
                    _ => {
                        return Err(self.err(offset, ParseReason::InvalidKeyChar, "key_char takes exactly one printable character"))
                    }
                };
                (EventPayload::KeyChar { char }, 3)
            }
            "key_backspace" => (EventPayload::KeyBackspace, 2),
            other => {
                return Err(self.err(
                    kind_offset,
                    ParseReason::UnknownEventKind,
                    format!("unknown event kind `{other}` (pointer_move, pointer_down, pointer_up, key_char, key_backspace)"),
                ))
            }
        };
        self.done(st, argc)?;
        Ok(InteractionEvent { t_ms, payload })
    }
}

fn keyword_text<'a>(st: &Statement<'a>) -> &'a str {
    match st.keyword.value {
        TokenValue::Word(w) => w,
        TokenValue::Str(_) => "statement",
    }
}

fn decode(bytes: &[u8]) -> PResult<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        ParseError::at(bytes, e.valid_up_to(), ParseReason::InvalidUtf8, "document is not valid UTF-8")
    })
}

/// Parses a complete project document.
///
/// A document must end with a newline; anything else is reported as
/// `unexpected_eof` at the end of input, so a truncated file is always
/// rejected at the point where it was cut.
pub fn parse_project(bytes: &[u8]) -> Result<Project, ParseError> {
    if bytes.last() != Some(&b'\n') {
        return Err(ParseError::at(bytes, bytes.len(), ParseReason::UnexpectedEof, "document must end with a newline"));
    }
    let text = decode(bytes)?;
    Parser::new(text).document()
}

/// Parses a list of `event` statements (the same syntax used inside entries).
/// Ordering between the events is not checked here.
pub fn parse_events(bytes: &[u8]) -> Result<Vec<InteractionEvent>, ParseError> {
    let text = decode(bytes)?;
    let mut parser = Parser::new(text);
    let mut events = Vec::new();
    while let Some(st) = parser.next()? {
        if st.keyword.value != TokenValue::Word("event") {
            return Err(parser.unexpected(&st, "`event`"));
        }
        events.push(parser.event(&st)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::store::format::to_canonical_string;

    const DOC: &str = "schema_version 1
mockup m01
  name \"cart page\"
  image \"abc.png\"
  size 800 600
  control c01 button
    bbox 10 10 100 30
    initial released
    label \"Buy\"
  control c02 text_input
    bbox 10 50 200 20
    initial \"\"
scenario s01
  name \"buy\"
  entry e01 m01
    event 0 pointer_move 10 20
    event 120 pointer_down 12 20 touch
    event 120 key_char \"h\"
    event 240 key_backspace
  entry e02 m01
asset_dir \"assets\"
";

    fn reason(doc: &str) -> (ParseReason, usize, usize, usize) {
        let e = parse_project(doc.as_bytes()).unwrap_err();
        (e.reason, e.offset, e.line, e.column)
    }

    #[test]
    fn parses_reference_document() {
        let p = parse_project(DOC.as_bytes()).unwrap();
        assert_eq!(p.mockups.len(), 1);
        assert_eq!(p.mockups[0].controls.len(), 2);
        assert_eq!(p.mockups[0].controls[0].label.as_deref(), Some("Buy"));
        assert_eq!(p.scenarios[0].entries[0].sequence.len(), 4);
        assert!(p.scenarios[0].entries[1].sequence.is_empty());
        assert_eq!(to_canonical_string(&p), DOC);
    }

    #[test]
    fn comments_blank_lines_and_spacing_are_tolerated() {
        let loose = DOC.replace("  size 800 600\n", "\n# size follows\n\t size   800\t600\n");
        let p = parse_project(loose.as_bytes()).unwrap();
        assert_eq!(to_canonical_string(&p), DOC);
    }

    #[test]
    fn every_truncation_fails_at_the_cut() {
        let bytes = DOC.as_bytes();
        for cut in 0..bytes.len() {
            let e = parse_project(&bytes[..cut]).unwrap_err();
            assert_eq!(e.offset, cut, "cut at {cut}: {e}");
            assert_eq!(e.reason, ParseReason::UnexpectedEof);
        }
    }

    #[test]
    fn unsupported_version() {
        let doc = DOC.replace("schema_version 1", "schema_version 999");
        let (r, offset, line, col) = reason(&doc);
        assert_eq!((r, offset, line, col), (ParseReason::UnsupportedSchemaVersion, 15, 1, 16));
    }

    #[test]
    fn positioned_errors() {
        let doc = DOC.replace("control c02 text_input", "control c02 slider");
        let (r, _, line, col) = reason(&doc);
        assert_eq!((r, line, col), (ParseReason::UnknownControlKind, 10, 15));

        let doc = DOC.replace("event 240 key_backspace", "event 100 key_backspace");
        let (r, _, line, col) = reason(&doc);
        assert_eq!((r, line, col), (ParseReason::NonMonotoneTimestamp, 19, 11));

        let doc = DOC.replace("initial \"\"", "initial checked");
        assert_eq!(reason(&doc).0, ParseReason::IncompatibleInitial);

        let doc = DOC.replace("size 800 600", "size 800");
        let (r, offset, line, _) = reason(&doc);
        assert_eq!((r, line), (ParseReason::MissingArgument, 5));
        assert_eq!(&doc.as_bytes()[offset..offset + 1], b"\n");

        let doc = DOC.replace("size 800 600", "size 800 0600");
        assert_eq!(reason(&doc).0, ParseReason::InvalidInteger);

        let doc = DOC.replace("size 800 600", "size 800 99999999999");
        assert_eq!(reason(&doc).0, ParseReason::IntegerOutOfRange);

        let doc = DOC.replace("size 800 600", "size 800 600 1");
        assert_eq!(reason(&doc).0, ParseReason::UnexpectedArgument);

        let doc = DOC.replace("  image \"abc.png\"\n", "");
        assert_eq!(reason(&doc).0, ParseReason::UnexpectedStatement);

        let doc = DOC.replace("label", "lable");
        assert_eq!(reason(&doc).0, ParseReason::UnknownKeyword);

        let doc = DOC.replace("key_char \"h\"", "key_char \"hi\"");
        assert_eq!(reason(&doc).0, ParseReason::InvalidKeyChar);

        let doc = DOC.replace("key_char \"h\"", "key_char \"\\u{7}\"");
        assert_eq!(reason(&doc).0, ParseReason::InvalidKeyChar);

        let doc = DOC.replace("touch", "pen");
        assert_eq!(reason(&doc).0, ParseReason::UnknownPointerSource);

        let doc = DOC.replace("key_backspace", "key_delete");
        assert_eq!(reason(&doc).0, ParseReason::UnknownEventKind);

        let doc = DOC.replace("mockup m01", "mockup m.01");
        assert_eq!(reason(&doc).0, ParseReason::InvalidIdentifier);

        let doc = DOC.replace("\"cart page\"", "\"cart page");
        assert_eq!(reason(&doc).0, ParseReason::UnterminatedString);

        let doc = DOC.replace("\"cart page\"", "\"cart\\q\"");
        assert_eq!(reason(&doc).0, ParseReason::InvalidEscape);

        let doc = DOC.replace("\"cart page\"", "\"cart\"page");
        assert_eq!(reason(&doc).0, ParseReason::InvalidCharacter);

        let doc = DOC.replace("name \"buy\"", "name buy");
        assert_eq!(reason(&doc).0, ParseReason::ExpectedString);

        let doc = DOC.replace("\n", "\r\n");
        assert_eq!(reason(&doc).0, ParseReason::InvalidCharacter);

        let doc = format!("{DOC}mockup m02\n");
        assert_eq!(reason(&doc).0, ParseReason::UnexpectedStatement);
    }

    #[test]
    fn invalid_utf8_is_located() {
        let mut bytes = b"schema_version 1\nasset_dir \"a".to_vec();
        bytes.push(0xFF);
        bytes.extend_from_slice(b"\"\n");
        let e = parse_project(&bytes).unwrap_err();
        assert_eq!(e.reason, ParseReason::InvalidUtf8);
        assert_eq!(e.offset, 29);
        assert_eq!((e.line, e.column), (2, 13));
    }

    #[test]
    fn column_counts_characters() {
        let doc = "schema_version 1\nasset_dir \"ü\" x\n";
        let e = parse_project(doc.as_bytes()).unwrap_err();
        assert_eq!(e.reason, ParseReason::UnexpectedArgument);
        assert_eq!((e.line, e.column), (2, 15));
    }

    #[test]
    fn escapes_roundtrip() {
        let doc = "schema_version 1\nasset_dir \"a\\\"b\\\\c\\n\\t\\r\\u{1f600}\"\n";
        let p = parse_project(doc.as_bytes()).unwrap();
        assert_eq!(p.asset_dir, "a\"b\\c\n\t\r\u{1f600}");
        let canon = to_canonical_string(&p);
        assert_eq!(parse_project(canon.as_bytes()).unwrap(), p);
    }

    #[test]
    fn event_list() {
        let events = parse_events(b"event 5 pointer_move 1 2\n\nevent 1 key_char \" \"").unwrap();
        assert_eq!(events, vec![InteractionEvent::pointer_move(5, 1, 2), InteractionEvent::key_char(1, ' ')]);
        let e = parse_events(b"event 5 pointer_move 1 2\nentry e01 m01\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_events(b"").unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            if let Err(e) = parse_project(&bytes) {
                prop_assert!(e.offset <= bytes.len());
                prop_assert!(e.line >= 1 && e.column >= 1);
            }
            if let Err(e) = parse_events(&bytes) {
                prop_assert!(e.offset <= bytes.len());
            }
        }

        #[test]
        fn mutated_documents_never_panic(pos in 0usize..DOC.len(), byte in any::<u8>(), delete in any::<bool>()) {
            let mut bytes = DOC.as_bytes().to_vec();
            if delete { bytes.remove(pos); } else { bytes[pos] = byte; }
            match parse_project(&bytes) {
                Ok(p) => {
                    let canon = to_canonical_string(&p);
                    prop_assert_eq!(parse_project(canon.as_bytes()).unwrap(), p);
                }
                Err(e) => prop_assert!(e.offset <= bytes.len()),
            }
        }
    }
}
