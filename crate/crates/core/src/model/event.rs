use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerSource {
    Mouse,
    Touch,
}

impl PointerSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PointerSource::Mouse => "mouse",
            PointerSource::Touch => "touch",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mouse" => Some(PointerSource::Mouse),
            "touch" => Some(PointerSource::Touch),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventPayload {
    PointerMove { x: u32, y: u32 },
    PointerDown { x: u32, y: u32, source: PointerSource },
    PointerUp { x: u32, y: u32, source: PointerSource },
    KeyChar { char: char },
    KeyBackspace,
}

impl EventPayload {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EventPayload::PointerMove { .. } => "pointer_move",
            EventPayload::PointerDown { .. } => "pointer_down",
            EventPayload::PointerUp { .. } => "pointer_up",
            EventPayload::KeyChar { .. } => "key_char",
            EventPayload::KeyBackspace => "key_backspace",
        }
    }
}

/// One captured input event. `t_ms` is relative to the start of the owning
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub t_ms: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl InteractionEvent {
    pub fn new(t_ms: u64, payload: EventPayload) -> Self {
        Self { t_ms, payload }
    }

    pub fn pointer_move(t_ms: u64, x: u32, y: u32) -> Self {
        Self::new(t_ms, EventPayload::PointerMove { x, y })
    }

    pub fn pointer_down(t_ms: u64, x: u32, y: u32) -> Self {
        Self::new(t_ms, EventPayload::PointerDown { x, y, source: PointerSource::Mouse })
    }

    pub fn pointer_up(t_ms: u64, x: u32, y: u32) -> Self {
        Self::new(t_ms, EventPayload::PointerUp { x, y, source: PointerSource::Mouse })
    }

    pub fn key_char(t_ms: u64, char: char) -> Self {
        Self::new(t_ms, EventPayload::KeyChar { char })
    }

    pub fn key_backspace(t_ms: u64) -> Self {
        Self::new(t_ms, EventPayload::KeyBackspace)
    }

    /// Pointer position for pointer-bearing events.
    pub fn position(&self) -> Option<(u32, u32)> {
        match self.payload {
            EventPayload::PointerMove { x, y }
            | EventPayload::PointerDown { x, y, .. }
            | EventPayload::PointerUp { x, y, .. } => Some((x, y)),
            EventPayload::KeyChar { .. } | EventPayload::KeyBackspace => None,
        }
    }

    pub fn is_keyboard(&self) -> bool {
        matches!(self.payload, EventPayload::KeyChar { .. } | EventPayload::KeyBackspace)
    }

    /// Clamps pointer coordinates into `[0, width) x [0, height)`.
    pub fn clamped_to(mut self, width: u32, height: u32) -> Self {
        let cx = |v: u32| v.min(width.saturating_sub(1));
        let cy = |v: u32| v.min(height.saturating_sub(1));
        match &mut self.payload {
            EventPayload::PointerMove { x, y }
            | EventPayload::PointerDown { x, y, .. }
            | EventPayload::PointerUp { x, y, .. } => {
                *x = cx(*x);
                *y = cy(*y);
            }
            EventPayload::KeyChar { .. } | EventPayload::KeyBackspace => {}
        }
        self
    }
}

/// Printable means anything that is not a Unicode control character.
pub fn is_printable(c: char) -> bool {
    !c.is_control()
}

/// Timestamp-ordered list of events owned by one timeline entry.
///
/// Timestamps are non-decreasing; equal timestamps keep list order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<InteractionEvent>", into = "Vec<InteractionEvent>")]
pub struct EventSequence {
    events: Vec<InteractionEvent>,
}

impl EventSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: Vec<InteractionEvent>) -> Result<Self, ModelError> {
        for (index, event) in events.iter().enumerate() {
            check_event_payload(event)?;
            if index > 0 && event.t_ms < events[index - 1].t_ms {
                return Err(ModelError::NonMonotoneTimestamp {
                    index,
                    t_ms: event.t_ms,
                    neighbor_ms: events[index - 1].t_ms,
                });
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_t_ms(&self) -> Option<u64> {
        self.events.last().map(|e| e.t_ms)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, InteractionEvent> {
        self.events.iter()
    }

    pub fn push(&mut self, event: InteractionEvent) -> Result<(), ModelError> {
        let index = self.events.len();
        self.insert(event, index)
    }

    pub fn insert(&mut self, event: InteractionEvent, index: usize) -> Result<(), ModelError> {
        let len = self.events.len();
        if index > len {
            return Err(ModelError::IndexOutOfRange { index, len: len + 1 });
        }
        check_event_payload(&event)?;
        if let Some(prev) = index.checked_sub(1).map(|i| &self.events[i]) {
            if event.t_ms < prev.t_ms {
                return Err(ModelError::NonMonotoneTimestamp {
                    index,
                    t_ms: event.t_ms,
                    neighbor_ms: prev.t_ms,
                });
            }
        }
        if let Some(next) = self.events.get(index) {
            if event.t_ms > next.t_ms {
                return Err(ModelError::NonMonotoneTimestamp {
                    index,
                    t_ms: event.t_ms,
                    neighbor_ms: next.t_ms,
                });
            }
        }
        self.events.insert(index, event);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.events.clear();
    }
}

fn check_event_payload(event: &InteractionEvent) -> Result<(), ModelError> {
    match event.payload {
        EventPayload::KeyChar { char } if !is_printable(char) => {
            Err(ModelError::NonPrintableKey { codepoint: char as u32 })
        }
        _ => Ok(()),
    }
}

impl TryFrom<Vec<InteractionEvent>> for EventSequence {
    type Error = ModelError;
    fn try_from(events: Vec<InteractionEvent>) -> Result<Self, Self::Error> {
        Self::from_events(events)
    }
}

impl From<EventSequence> for Vec<InteractionEvent> {
    fn from(seq: EventSequence) -> Self {
        seq.events
    }
}

impl<'a> IntoIterator for &'a EventSequence {
    type Item = &'a InteractionEvent;
    type IntoIter = std::slice::Iter<'a, InteractionEvent>;
    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}
