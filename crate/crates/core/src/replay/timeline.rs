use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EntryId, MockupId, Project, Scenario, TimelineEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("scenario has no entries")]
    EmptyScenario,
    #[error("entry {entry} refers to missing mockup {mockup}")]
    DanglingMockup { entry: String, mockup: String },
    #[error("fps must be at least 1")]
    InvalidFps,
}

/// Replay timings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayConfig {
    /// Dwell after an entry's last event before the next mockup is shown.
    pub hold_ms: u64,
    pub fps: u32,
    /// Minimum time a button press stays visible.
    pub press_flash_ms: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self { hold_ms: 500, fps: 30, press_flash_ms: 100 }
    }
}

impl ReplayConfig {
    pub fn new(hold_ms: u64, fps: u32, press_flash_ms: u64) -> Result<Self, ReplayError> {
        if fps == 0 {
            return Err(ReplayError::InvalidFps);
        }
        Ok(Self { hold_ms, fps, press_flash_ms })
    }
}

/// Time an entry occupies on the scenario timeline.
pub fn entry_duration(entry: &TimelineEntry, config: &ReplayConfig) -> u64 {
    entry.sequence.last_t_ms().unwrap_or(0).saturating_add(config.hold_ms)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimelineSpan {
    pub entry_id: EntryId,
    pub mockup_id: MockupId,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl TimelineSpan {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

/// Entries laid end to end: each span starts where the previous one ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioTimeline {
    pub spans: Vec<TimelineSpan>,
    pub total_ms: u64,
}

impl ScenarioTimeline {
    /// Span index and local time for a global time. Spans are right-open;
    /// times at or past `total_ms` land at the end of the final span.
    pub fn locate(&self, t_ms: u64) -> (usize, u64) {
        let idx = self.spans.partition_point(|s| s.end_ms <= t_ms);
        if idx < self.spans.len() {
            (idx, t_ms - self.spans[idx].start_ms)
        } else {
            let last = self.spans.len() - 1;
            (last, self.spans[last].duration_ms())
        }
    }
}

pub fn scenario_timeline(
    project: &Project,
    scenario: &Scenario,
    config: &ReplayConfig,
) -> Result<ScenarioTimeline, ReplayError> {
    if scenario.entries.is_empty() {
        return Err(ReplayError::EmptyScenario);
    }
    let mut spans = Vec::with_capacity(scenario.entries.len());
    let mut start = 0u64;
    for entry in &scenario.entries {
        if project.mockup(&entry.mockup_id).is_none() {
            return Err(ReplayError::DanglingMockup { entry: entry.id.to_string(), mockup: entry.mockup_id.to_string() });
        }
        let end = start.saturating_add(entry_duration(entry, config));
        spans.push(TimelineSpan { entry_id: entry.id.clone(), mockup_id: entry.mockup_id.clone(), start_ms: start, end_ms: end });
        start = end;
    }
    Ok(ScenarioTimeline { spans, total_ms: start })
}

/// `max(1, ceil(total_ms * fps / 1000))`.
pub fn frame_count(total_ms: u64, fps: u32) -> u64 {
    let scaled = u128::from(total_ms) * u128::from(fps);
    let n = scaled.div_ceil(1000);
    u64::try_from(n).unwrap_or(u64::MAX).max(1)
}

/// `round(k * 1000 / fps)` with halves rounded up.
pub fn frame_time(k: u64, fps: u32) -> u64 {
    let fps = u128::from(fps.max(1));
    let t = (2 * u128::from(k) * 1000 + fps) / (2 * fps);
    u64::try_from(t).unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrameSample {
    pub index: u64,
    /// Index into the timeline's spans (and the scenario's entries).
    pub span: usize,
    pub entry_id: EntryId,
    pub t_ms: u64,
    pub local_t_ms: u64,
}

/// Iterator over the frame times of a timeline, in frame order.
#[derive(Debug, Clone)]
pub struct FrameSamples<'a> {
    timeline: &'a ScenarioTimeline,
    fps: u32,
    next: u64,
    count: u64,
}

impl Iterator for FrameSamples<'_> {
    type Item = FrameSample;

    fn next(&mut self) -> Option<FrameSample> {
        if self.next >= self.count {
            return None;
        }
        let index = self.next;
        self.next += 1;
        let t_ms = frame_time(index, self.fps);
        let (span, local_t_ms) = self.timeline.locate(t_ms);
        Some(FrameSample { index, span, entry_id: self.timeline.spans[span].entry_id.clone(), t_ms, local_t_ms })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = usize::try_from(self.count - self.next).unwrap_or(usize::MAX);
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for FrameSamples<'_> {}

pub fn sample_frames<'a>(timeline: &'a ScenarioTimeline, config: &ReplayConfig) -> FrameSamples<'a> {
    FrameSamples { timeline, fps: config.fps.max(1), next: 0, count: frame_count(timeline.total_ms, config.fps.max(1)) }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use proptest::prelude::*;

    use super::*;
    use crate::model::{EventSequence, InteractionEvent, ScenarioId};

    fn project_with(durations_last_event: &[Option<u64>]) -> (Project, ScenarioId) {
        let assets: HashMap<String, (u32, u32)> = [("a.png".to_string(), (10, 10))].into_iter().collect();
        let mut p = Project::new();
        let m = p.add_mockup("m", "a.png", 10, 10, &assets).unwrap();
        let s = p.add_scenario("s").unwrap();
        for last in durations_last_event {
            let e = p.append_entry(&s, &m).unwrap();
            if let Some(t) = last {
                p.entry_mut(&e).unwrap().record_event(InteractionEvent::pointer_move(*t, 1, 1)).unwrap();
            }
        }
        (p, s)
    }

    #[test]
    fn entry_durations() {
        let cfg = ReplayConfig::default();
        let (p, s) = project_with(&[Some(1000), None]);
        let entries = &p.scenario(&s).unwrap().entries;
        assert_eq!(entry_duration(&entries[0], &cfg), 1500);
        assert_eq!(entry_duration(&entries[1], &cfg), 500);
        let (p, s) = project_with(&[Some(0)]);
        let zero = ReplayConfig { hold_ms: 0, ..cfg };
        assert_eq!(entry_duration(&p.scenario(&s).unwrap().entries[0], &zero), 0);
    }

    #[test]
    fn spans_are_prefix_sums() {
        let cfg = ReplayConfig::default();
        let (p, s) = project_with(&[Some(1000), None, Some(2000)]);
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap();
        let spans: Vec<(u64, u64)> = tl.spans.iter().map(|s| (s.start_ms, s.end_ms)).collect();
        assert_eq!(spans, vec![(0, 1500), (1500, 2000), (2000, 4500)]);
        assert_eq!(tl.total_ms, 4500);
    }

    #[test]
    fn single_still_entry_lasts_hold() {
        let (p, s) = project_with(&[None]);
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &ReplayConfig::default()).unwrap();
        assert_eq!(tl.total_ms, 500);
    }

    #[test]
    fn empty_and_dangling_scenarios_fail() {
        let (mut p, s) = project_with(&[]);
        let cfg = ReplayConfig::default();
        assert_eq!(scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg), Err(ReplayError::EmptyScenario));
        let m = p.mockups[0].id.clone();
        p.append_entry(&s, &m).unwrap();
        p.mockups.clear();
        assert!(matches!(
            scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg),
            Err(ReplayError::DanglingMockup { .. })
        ));
    }

    #[test]
    fn frame_count_formula() {
        assert_eq!(frame_count(1500, 30), 45);
        assert_eq!(frame_count(500, 30), 15);
        assert_eq!(frame_count(0, 30), 1);
        assert_eq!(frame_count(1, 30), 1);
        assert_eq!(frame_count(34, 30), 2);
        assert_eq!(frame_count(1000, 24), 24);
        assert_eq!(frame_count(1001, 24), 25);
    }

    #[test]
    fn frame_times_round_half_up() {
        assert_eq!(frame_time(0, 30), 0);
        assert_eq!(frame_time(1, 30), 33);
        assert_eq!(frame_time(2, 30), 67);
        assert_eq!(frame_time(45, 30), 1500);
        assert_eq!(frame_time(1, 16), 63); // 62.5 rounds up
    }

    #[test]
    fn frame_45_lands_at_start_of_second_entry() {
        let (p, s) = project_with(&[Some(1000), None]);
        let cfg = ReplayConfig::default();
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap();
        let frames: Vec<FrameSample> = sample_frames(&tl, &cfg).collect();
        assert_eq!(frames.len(), 60);
        let f = &frames[45];
        assert_eq!((f.t_ms, f.span, f.local_t_ms), (1500, 1, 0));
        assert_eq!(frames[44].span, 0);
    }

    #[test]
    fn degenerate_zero_length_scenario_renders_one_frame() {
        let (p, s) = project_with(&[Some(0)]);
        let cfg = ReplayConfig { hold_ms: 0, ..ReplayConfig::default() };
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap();
        let frames: Vec<FrameSample> = sample_frames(&tl, &cfg).collect();
        assert_eq!(frames.len(), 1);
        assert_eq!((frames[0].span, frames[0].local_t_ms), (0, 0));
    }

    #[test]
    fn last_frame_rounding_past_total_is_clamped() {
        // fps 3: t_2 = round(666.67) = 667 = total.
        let (p, s) = project_with(&[Some(167)]);
        let cfg = ReplayConfig { fps: 3, ..ReplayConfig::default() };
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap();
        assert_eq!(tl.total_ms, 667);
        let frames: Vec<FrameSample> = sample_frames(&tl, &cfg).collect();
        assert_eq!(frames.len(), 3);
        assert_eq!((frames[2].t_ms, frames[2].span, frames[2].local_t_ms), (667, 0, 667));
    }

    fn arb_lasts() -> impl Strategy<Value = Vec<Option<u64>>> {
        proptest::collection::vec(proptest::option::of(0u64..5000), 1..12)
    }

    proptest! {
        #[test]
        fn permuting_entries_keeps_total(lasts in arb_lasts(), seed in any::<u64>()) {
            let (mut p, s) = project_with(&lasts);
            let cfg = ReplayConfig::default();
            let before = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap().total_ms;
            let sc = p.scenario_mut(&s).unwrap();
            let n = sc.entries.len();
            let mut k = seed;
            for i in (1..n).rev() {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                sc.entries.swap(i, (k >> 33) as usize % (i + 1));
            }
            let after = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap().total_ms;
            prop_assert_eq!(before, after);
        }

        #[test]
        fn frames_cover_every_index_once(lasts in arb_lasts(), fps in 1u32..120, hold in 0u64..800) {
            let (p, s) = project_with(&lasts);
            let cfg = ReplayConfig { fps, hold_ms: hold, ..ReplayConfig::default() };
            let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &cfg).unwrap();
            let frames: Vec<FrameSample> = sample_frames(&tl, &cfg).collect();
            prop_assert_eq!(frames.len() as u64, frame_count(tl.total_ms, fps));
            let mut prev: Option<&FrameSample> = None;
            for (k, f) in frames.iter().enumerate() {
                prop_assert_eq!(f.index, k as u64);
                let span = &tl.spans[f.span];
                prop_assert!(f.local_t_ms <= span.duration_ms());
                if let Some(p) = prev {
                    prop_assert!(f.span >= p.span);
                    if f.span == p.span {
                        prop_assert!(f.local_t_ms >= p.local_t_ms);
                    }
                }
                prev = Some(f);
            }
        }
    }

    #[test]
    fn timeline_is_contiguous() {
        let (p, s) = project_with(&[Some(3), None, Some(0), Some(999)]);
        let tl = scenario_timeline(&p, p.scenario(&s).unwrap(), &ReplayConfig::default()).unwrap();
        assert_eq!(tl.spans[0].start_ms, 0);
        for w in tl.spans.windows(2) {
            assert_eq!(w[0].end_ms, w[1].start_ms);
        }
        let seqs: Vec<&EventSequence> = p.scenario(&s).unwrap().entries.iter().map(|e| &e.sequence).collect();
        assert_eq!(seqs.len(), tl.spans.len());
    }
}
