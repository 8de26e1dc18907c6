//! Replay of captured interaction: a pure fold over event prefixes.
//!
//! `state_at` recomputes the state of every control on a mockup at any point
//! in time directly from the stored events, so a scenario can be simulated
//! without any video. [`Replayer`] answers the same queries from a cached
//! fold and must agree with `state_at` exactly.

mod timeline;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{Control, ControlId, ControlKind, ControlState, EventPayload, EventSequence, InteractionEvent, Mockup, Project, Scenario};

pub use timeline::{
    entry_duration, frame_count, frame_time, sample_frames, scenario_timeline, FrameSample, FrameSamples, ReplayConfig,
    ReplayError, ScenarioTimeline, TimelineSpan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

/// Runtime state of one control during replay.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LiveState {
    Button { pressed: bool, pressed_since_ms: Option<u64> },
    TextInput { text: String, focused: bool },
    Checkbox { checked: bool },
    Hotspot,
}

impl LiveState {
    fn initial(control: &Control) -> Self {
        match &control.initial {
            ControlState::Button { pressed } => LiveState::Button { pressed: *pressed, pressed_since_ms: None },
            ControlState::TextInput { text } => LiveState::TextInput { text: text.clone(), focused: false },
            ControlState::Checkbox { checked } => LiveState::Checkbox { checked: *checked },
            ControlState::Hotspot => LiveState::Hotspot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayState {
    pub control_states: BTreeMap<ControlId, LiveState>,
    /// Pointer position; interpolated when produced by a time query.
    pub cursor: Option<Point>,
    pub focused_control: Option<ControlId>,
    /// Released buttons whose press is still shown at the query time.
    pub flashing: BTreeSet<ControlId>,
}

impl ReplayState {
    pub fn initial(mockup: &Mockup) -> Self {
        Self {
            control_states: mockup.controls.iter().map(|c| (c.id.clone(), LiveState::initial(c))).collect(),
            cursor: None,
            focused_control: None,
            flashing: BTreeSet::new(),
        }
    }

    /// Whether a button should be drawn pressed.
    pub fn shows_pressed(&self, id: &ControlId) -> bool {
        matches!(self.control_states.get(id), Some(LiveState::Button { pressed: true, .. })) || self.flashing.contains(id)
    }

    /// Text currently held by a text input.
    pub fn text(&self, id: &ControlId) -> Option<&str> {
        match self.control_states.get(id) {
            Some(LiveState::TextInput { text, .. }) => Some(text),
            _ => None,
        }
    }

    fn set_focus(&mut self, target: Option<&ControlId>) {
        for (id, live) in self.control_states.iter_mut() {
            if let LiveState::TextInput { focused, .. } = live {
                *focused = Some(id) == target;
            }
        }
        self.focused_control = target.cloned();
    }

    fn focused_text(&mut self) -> Option<&mut String> {
        let id = self.focused_control.as_ref()?;
        match self.control_states.get_mut(id) {
            Some(LiveState::TextInput { text, .. }) => Some(text),
            _ => None,
        }
    }

    fn apply(&mut self, event: &InteractionEvent, mockup: &Mockup) {
        match event.payload {
            EventPayload::PointerMove { x, y } => self.cursor = Some(Point { x, y }),
            EventPayload::PointerDown { x, y, .. } => {
                self.cursor = Some(Point { x, y });
                match hit_test(mockup, x, y) {
                    Some(control) => match control.kind {
                        ControlKind::Button => {
                            if let Some(LiveState::Button { pressed, pressed_since_ms }) =
                                self.control_states.get_mut(&control.id)
                            {
                                *pressed = true;
                                *pressed_since_ms = Some(event.t_ms);
                            }
                        }
                        ControlKind::Checkbox => {
                            if let Some(LiveState::Checkbox { checked }) = self.control_states.get_mut(&control.id) {
                                *checked = !*checked;
                            }
                        }
                        ControlKind::TextInput => self.set_focus(Some(&control.id)),
                        ControlKind::Hotspot => self.set_focus(None),
                    },
                    None => self.set_focus(None),
                }
            }
            EventPayload::PointerUp { x, y, .. } => {
                self.cursor = Some(Point { x, y });
                for live in self.control_states.values_mut() {
                    if let LiveState::Button { pressed, .. } = live {
                        *pressed = false;
                    }
                }
            }
            EventPayload::KeyChar { char } => {
                if let Some(text) = self.focused_text() {
                    text.push(char);
                }
            }
            EventPayload::KeyBackspace => {
                if let Some(text) = self.focused_text() {
                    text.pop();
                }
            }
        }
    }

    /// Fills the time-dependent fields for a query at `t_ms`, given that the
    /// first `folded` events have been applied.
    fn finish_query(mut self, events: &[InteractionEvent], folded: usize, t_ms: u64, config: &ReplayConfig) -> Self {
        self.cursor = cursor_at(events, folded, t_ms);
        self.flashing = self
            .control_states
            .iter()
            .filter(|(_, live)| match live {
                LiveState::Button { pressed: false, pressed_since_ms: Some(since) } => {
                    t_ms < since.saturating_add(config.press_flash_ms)
                }
                _ => false,
            })
            .map(|(id, _)| id.clone())
            .collect();
        self
    }
}

/// Topmost control whose box contains the point. Left and top edges are
/// inside, right and bottom edges are outside.
pub fn hit_test(mockup: &Mockup, x: u32, y: u32) -> Option<&Control> {
    mockup.controls.iter().rev().find(|c| c.bbox.contains(x, y))
}

/// Single transition of the replay fold.
pub fn fold_event(mut state: ReplayState, event: &InteractionEvent, mockup: &Mockup) -> ReplayState {
    state.apply(event, mockup);
    state
}

fn round_div(num: i128, den: i128) -> i128 {
    (2 * num + den).div_euclid(2 * den)
}

/// Cursor at `t_ms`: hidden before the first pointer event, linearly
/// interpolated between consecutive pointer events, frozen after the last.
fn cursor_at(events: &[InteractionEvent], folded: usize, t_ms: u64) -> Option<Point> {
    let (last_t, (x0, y0)) = events[..folded].iter().rev().find_map(|e| e.position().map(|p| (e.t_ms, p)))?;
    let Some((next_t, (x1, y1))) = events[folded..].iter().find_map(|e| e.position().map(|p| (e.t_ms, p))) else {
        return Some(Point { x: x0, y: y0 });
    };
    let span = i128::from(next_t) - i128::from(last_t);
    if span <= 0 {
        return Some(Point { x: x0, y: y0 });
    }
    let elapsed = i128::from(t_ms) - i128::from(last_t);
    let lerp = |a: u32, b: u32| (i128::from(a) + round_div((i128::from(b) - i128::from(a)) * elapsed, span)) as u32;
    Some(Point { x: lerp(x0, x1), y: lerp(y0, y1) })
}

fn folded_count(events: &[InteractionEvent], t_ms: u64) -> usize {
    events.partition_point(|e| e.t_ms <= t_ms)
}

/// State of `mockup` at `t_ms`, folding every event with `t_ms` at or before
/// the query time over the initial control states.
pub fn state_at(mockup: &Mockup, sequence: &EventSequence, t_ms: u64, config: &ReplayConfig) -> ReplayState {
    let events = sequence.events();
    let n = folded_count(events, t_ms);
    let state = events[..n].iter().fold(ReplayState::initial(mockup), |s, e| fold_event(s, e, mockup));
    state.finish_query(events, n, t_ms, config)
}

/// Number of keyboard events that arrive while no text input has focus.
pub fn unfocused_key_events(mockup: &Mockup, sequence: &EventSequence) -> usize {
    let mut state = ReplayState::initial(mockup);
    let mut count = 0;
    for event in sequence {
        if event.is_keyboard() && state.focused_control.is_none() {
            count += 1;
        }
        state.apply(event, mockup);
    }
    count
}

const CHECKPOINT_EVERY: usize = 32;

/// Incremental replay of one sequence. Forward queries continue the cached
/// fold; backward queries resume from the nearest checkpoint.
#[derive(Debug, Clone)]
pub struct Replayer<'a> {
    mockup: &'a Mockup,
    events: &'a [InteractionEvent],
    config: ReplayConfig,
    folded: usize,
    state: ReplayState,
    checkpoints: Vec<ReplayState>,
}

impl<'a> Replayer<'a> {
    pub fn new(mockup: &'a Mockup, sequence: &'a EventSequence, config: ReplayConfig) -> Self {
        let state = ReplayState::initial(mockup);
        Self { mockup, events: sequence.events(), config, folded: 0, checkpoints: vec![state.clone()], state }
    }

    pub fn mockup(&self) -> &'a Mockup {
        self.mockup
    }

    pub fn state_at(&mut self, t_ms: u64) -> ReplayState {
        let target = folded_count(self.events, t_ms);
        if target < self.folded {
            let slot = (target / CHECKPOINT_EVERY).min(self.checkpoints.len() - 1);
            self.state = self.checkpoints[slot].clone();
            self.folded = slot * CHECKPOINT_EVERY;
        }
        while self.folded < target {
            self.state.apply(&self.events[self.folded], self.mockup);
            self.folded += 1;
            if self.folded % CHECKPOINT_EVERY == 0 && self.checkpoints.len() == self.folded / CHECKPOINT_EVERY {
                self.checkpoints.push(self.state.clone());
            }
        }
        self.state.clone().finish_query(self.events, self.folded, t_ms, &self.config)
    }
}

/// Replays a whole scenario on its global timeline.
#[derive(Debug, Clone)]
pub struct ScenarioPlayer<'a> {
    timeline: ScenarioTimeline,
    replayers: Vec<Replayer<'a>>,
    canvas: (u32, u32),
}

impl<'a> ScenarioPlayer<'a> {
    pub fn new(project: &'a Project, scenario: &'a Scenario, config: &ReplayConfig) -> Result<Self, ReplayError> {
        let timeline = scenario_timeline(project, scenario, config)?;
        let mut replayers = Vec::with_capacity(scenario.entries.len());
        let mut canvas = (0, 0);
        for entry in &scenario.entries {
            let mockup = project
                .mockup(&entry.mockup_id)
                .ok_or_else(|| ReplayError::DanglingMockup { entry: entry.id.to_string(), mockup: entry.mockup_id.to_string() })?;
            canvas = (canvas.0.max(mockup.width_px), canvas.1.max(mockup.height_px));
            replayers.push(Replayer::new(mockup, &entry.sequence, *config));
        }
        Ok(Self { timeline, replayers, canvas })
    }

    pub fn timeline(&self) -> &ScenarioTimeline {
        &self.timeline
    }

    /// Frame size shared by every frame of the scenario: the largest mockup
    /// width by the largest mockup height.
    pub fn canvas_size(&self) -> (u32, u32) {
        self.canvas
    }

    /// State of the entry at `span` at local time `local_t_ms`.
    pub fn entry_state(&mut self, span: usize, local_t_ms: u64) -> (&'a Mockup, ReplayState) {
        let replayer = &mut self.replayers[span];
        (replayer.mockup(), replayer.state_at(local_t_ms))
    }

    /// State at a global scenario time.
    pub fn state_at(&mut self, t_ms: u64) -> (usize, &'a Mockup, ReplayState) {
        let (span, local) = self.timeline.locate(t_ms);
        let (mockup, state) = self.entry_state(span, local);
        (span, mockup, state)
    }
}
