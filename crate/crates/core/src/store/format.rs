//! Canonical writer for the project document.
//!
//! One statement per line, two-space indentation per nesting level, single
//! spaces between tokens, LF line endings, integers in plain decimal. Field
//! order is fixed, so equal projects always produce identical bytes.

use std::fmt::Write;

use crate::model::{Control, ControlState, EventPayload, InteractionEvent, Mockup, Project, Scenario};

/// Quotes a string, escaping `"`, `\` and every control character.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn initial_token(state: &ControlState) -> String {
    match state {
        ControlState::Button { pressed: true } => "pressed".into(),
        ControlState::Button { pressed: false } => "released".into(),
        ControlState::Checkbox { checked: true } => "checked".into(),
        ControlState::Checkbox { checked: false } => "unchecked".into(),
        ControlState::TextInput { text } => quote(text),
        ControlState::Hotspot => "none".into(),
    }
}

/// `event` statement body without indentation or newline.
pub fn event_statement(event: &InteractionEvent) -> String {
    let kind = event.payload.kind_name();
    match &event.payload {
        EventPayload::PointerMove { x, y } => format!("event {} {kind} {x} {y}", event.t_ms),
        EventPayload::PointerDown { x, y, source } | EventPayload::PointerUp { x, y, source } => {
            format!("event {} {kind} {x} {y} {}", event.t_ms, source.as_str())
        }
        EventPayload::KeyChar { char } => format!("event {} {kind} {}", event.t_ms, quote(&char.to_string())),
        EventPayload::KeyBackspace => format!("event {} {kind}", event.t_ms),
    }
}

fn write_control(out: &mut String, control: &Control) {
    let b = control.bbox;
    let _ = writeln!(out, "  control {} {}", control.id, control.kind);
    let _ = writeln!(out, "    bbox {} {} {} {}", b.x, b.y, b.w, b.h);
    let _ = writeln!(out, "    initial {}", initial_token(&control.initial));
    if let Some(label) = &control.label {
        let _ = writeln!(out, "    label {}", quote(label));
    }
}

fn write_mockup(out: &mut String, mockup: &Mockup) {
    let _ = writeln!(out, "mockup {}", mockup.id);
    let _ = writeln!(out, "  name {}", quote(&mockup.name));
    let _ = writeln!(out, "  image {}", quote(&mockup.image_ref));
    let _ = writeln!(out, "  size {} {}", mockup.width_px, mockup.height_px);
    for control in &mockup.controls {
        write_control(out, control);
    }
}

fn write_scenario(out: &mut String, scenario: &Scenario) {
    let _ = writeln!(out, "scenario {}", scenario.id);
    let _ = writeln!(out, "  name {}", quote(&scenario.name));
    for entry in &scenario.entries {
        let _ = writeln!(out, "  entry {} {}", entry.id, entry.mockup_id);
        for event in &entry.sequence {
            let _ = writeln!(out, "    {}", event_statement(event));
        }
    }
}

/// Serializes a project into its canonical document.
pub fn to_canonical_string(project: &Project) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema_version {}", project.format_version);
    for mockup in &project.mockups {
        write_mockup(&mut out, mockup);
    }
    for scenario in &project.scenarios {
        write_scenario(&mut out, scenario);
    }
    let _ = writeln!(out, "asset_dir {}", quote(&project.asset_dir));
    out
}
