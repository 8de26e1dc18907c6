mod common;

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Command, Stdio};

use common::{code, digest, field, fixture, mockrec, p, stdout};
use mockrec_core::replay::{frame_count, scenario_timeline, ReplayConfig};
use mockrec_core::store::load_project;

#[test]
fn help_lists_every_subcommand() {
    let out = mockrec(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for cmd in ["validate", "info", "export", "render-frame", "export-images", "edit", "init", "fixture-webstore", "serve"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    let edit = stdout(&mockrec(&["edit", "--help"]));
    for cmd in ["add-entry", "move-entry", "delete-entry", "clear-seq", "insert-event", "record", "add-mockup", "add-control"] {
        assert!(edit.contains(cmd), "{cmd} missing from edit help");
    }
    assert_eq!(code(&mockrec(&["frobnicate"])), 2);
    assert_eq!(code(&mockrec(&[])), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let out = mockrec(&["validate", p(&path)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());

    let text = fs::read_to_string(&path).unwrap().replace("entry e04 m04", "entry e04 m42");
    fs::write(&path, text).unwrap();
    let out = mockrec(&["validate", p(&path)]);
    assert_eq!(code(&out), 1);
    let lines: Vec<_> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains("dangling_mockup_ref"));
    assert!(lines[0].starts_with("scenarios/s01/entries/e04"));

    assert_eq!(code(&mockrec(&["validate", p(&dir.path().join("nope.mrp"))])), 3);

    fs::write(&path, "schema_version 1\nmockup m01\n").unwrap();
    let out = mockrec(&["validate", p(&path)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains(":3:1: unexpected_eof"), "{}", stdout(&out));
}

#[test]
fn export_reports_formula_frames_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let a = dir.path().join("a.y4m");
    let b = dir.path().join("b.y4m");
    let out_a = mockrec(&["export", p(&path), "s01", "--fps", "30", "-o", p(&a)]);
    assert_eq!(code(&out_a), 0, "{}", String::from_utf8_lossy(&out_a.stderr));
    let out_b = mockrec(&["export", p(&path), "s01", "-o", p(&b)]);
    assert_eq!(code(&out_b), 0);
    assert_eq!(digest(&a), digest(&b));

    let line = stdout(&out_a);
    let project = load_project(&path).unwrap();
    let total = scenario_timeline(&project, &project.scenarios[0], &ReplayConfig::default()).unwrap().total_ms;
    assert_eq!(field(&line, "frames"), frame_count(total, 30).to_string());
    assert_eq!(field(&line, "duration_ms"), total.to_string());
    assert_eq!(field(&line, "bytes"), fs::metadata(&a).unwrap().len().to_string());
    assert_eq!(field(&line, "output"), p(&a));

    assert_eq!(code(&mockrec(&["export", p(&path), "s01", "--fps", "0", "-o", p(&a)])), 2);
    assert_eq!(code(&mockrec(&["export", p(&path), "s07", "-o", p(&a)])), 2);
    assert_eq!(code(&mockrec(&["export", p(&path), "s01", "--format", "gif", "-o", p(&a)])), 2);
    assert_eq!(code(&mockrec(&["export", p(&path), "s01", "-o", p(&dir.path().join("no/dir/x.y4m"))])), 3);

    assert_eq!(code(&mockrec(&["edit", p(&path), "add-scenario", "empty"])), 0);
    assert_eq!(code(&mockrec(&["export", p(&path), "s02", "-o", p(&a)])), 1);
    assert_eq!(digest(&a), digest(&b));
}

#[test]
fn png_export_and_image_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let frames = dir.path().join("frames");
    let out = mockrec(&["export", p(&path), "s01", "--fps", "10", "--format", "png", "-o", p(&frames)]);
    assert_eq!(code(&out), 0);
    let n: usize = field(&stdout(&out), "frames").parse().unwrap();
    assert_eq!(fs::read_dir(&frames).unwrap().count(), n);
    assert!(frames.join(format!("frame_{:06}.png", n - 1)).is_file());

    let images = dir.path().join("images");
    let out = mockrec(&["export-images", p(&path), p(&images)]);
    assert_eq!(code(&out), 0);
    assert_eq!(field(&stdout(&out), "files"), "11");
    assert!(images.join("m11.png").is_file());
}

#[test]
fn fixture_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let steps = fs::read_to_string(path.with_file_name("steps.txt")).unwrap();
    let lines: Vec<&str> = steps.lines().collect();
    assert_eq!(lines.len(), 19);
    for (i, line) in lines.iter().enumerate() {
        let (head, mockup) = line.rsplit_once(" -> ").expect("mockup reference");
        assert!(head.starts_with(&format!("{}. ", i + 1)));
        assert!(mockup.starts_with('m') && mockup.len() == 3);
    }
    let info = stdout(&mockrec(&["info", p(&path)]));
    assert!(info.starts_with("schema_version=1 mockups=11 scenarios=1"));

    assert_eq!(code(&mockrec(&["fixture-webstore", p(&dir.path().join("shop"))])), 2);
}

#[test]
fn edits_round_trip_through_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("new.mrp");
    assert_eq!(code(&mockrec(&["init", p(&path)])), 0);
    assert_eq!(code(&mockrec(&["init", p(&path)])), 2);

    let img = dir.path().join("screen.png");
    fs::write(&img, mockrec_core::raster::Frame::filled(800, 600, [240, 240, 240]).encode_png()).unwrap();
    let out = mockrec(&["edit", p(&path), "add-mockup", p(&img), "--name", "start"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("mockup=m01") && stdout(&out).contains("size=800x600"));
    let out = mockrec(&["edit", p(&path), "add-control", "m01", "--kind", "text-input", "--bbox", "10,10,200,20", "--initial", "hi"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&mockrec(&["edit", p(&path), "add-scenario", "first run"])), 0);
    assert_eq!(code(&mockrec(&["edit", p(&path), "add-entry", "s01", "m01"])), 0);
    assert_eq!(code(&mockrec(&["edit", p(&path), "clear-seq", "e01"])), 0);
    assert_eq!(code(&mockrec(&["edit", p(&path), "clear-seq", "e01"])), 0);

    let events = dir.path().join("ev.txt");
    fs::write(&events, "event 0 pointer_down 20 15 mouse\nevent 50 pointer_up 20 15 mouse\nevent 100 key_char \"!\"\n").unwrap();
    assert_eq!(code(&mockrec(&["edit", p(&path), "record", "e01", "--events", p(&events)])), 0);
    fs::write(&events, "event 75 key_backspace\n").unwrap();
    assert_eq!(code(&mockrec(&["edit", p(&path), "insert-event", "e01", "--at", "2", "--events", p(&events)])), 0);

    let project = load_project(&path).unwrap();
    let seq = project.scenarios[0].entries[0].sequence.events();
    assert_eq!(seq.len(), 4);
    assert_eq!(seq[2].t_ms, 75);
    let state = mockrec_core::replay::state_at(&project.mockups[0], &project.scenarios[0].entries[0].sequence, 100, &ReplayConfig::default());
    assert_eq!(state.text(&"c01".parse().unwrap()), Some("h!"));

    let frame = dir.path().join("f.png");
    let out = mockrec(&["render-frame", p(&path), "s01", "--t-ms", "100", "-o", p(&frame)]);
    assert_eq!(code(&out), 0);
    assert_eq!(field(&stdout(&out), "entry"), "e01");
    assert!(frame.is_file());
}

#[test]
fn failed_edits_leave_the_file_alone() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let before = fs::read(&path).unwrap();
    let events = dir.path().join("ev.txt");
    fs::write(&events, "event 0 key_backspace\n").unwrap();
    let out = mockrec(&["edit", p(&path), "insert-event", "e01", "--at", "3", "--events", p(&events)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non_monotone_timestamp"));
    assert_eq!(fs::read(&path).unwrap(), before);
    assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 3, "stray temporary file");
}

/// Per-entry frames at fixed local times are unchanged by a move.
#[test]
fn move_entry_keeps_entry_content() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let render = |tag: &str| -> Vec<(String, Vec<String>)> {
        let project = load_project(&path).unwrap();
        let tl = scenario_timeline(&project, &project.scenarios[0], &ReplayConfig::default()).unwrap();
        tl.spans
            .iter()
            .map(|span| {
                let digests = [0, span.duration_ms() / 2, span.duration_ms() - 1]
                    .iter()
                    .map(|local| {
                        let out = dir.path().join(format!("{tag}-{}-{local}.png", span.entry_id));
                        let t = (span.start_ms + local).to_string();
                        assert_eq!(code(&mockrec(&["render-frame", p(&path), "s01", "--t-ms", &t, "-o", p(&out)])), 0);
                        digest(&out)
                    })
                    .collect();
                (span.entry_id.to_string(), digests)
            })
            .collect()
    };
    let mut before = render("before");
    assert_eq!(code(&mockrec(&["edit", p(&path), "move-entry", "s01", "e02", "9"])), 0);
    let mut after = render("after");
    assert_eq!(after[9].0, "e02");
    before.sort();
    after.sort();
    assert_eq!(before, after);
}

#[test]
fn serve_answers_and_saves_on_interrupt() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture(dir.path());
    let before = fs::read(&path).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_mockrec"))
        .args(["serve", p(&path), "--bind", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let first = lines.next().unwrap().unwrap();
    let addr = first.strip_prefix("listening=http://").expect("ready line").to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/project HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"revision\":0"));

    let status = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(status.success());
    assert!(child.wait().unwrap().success());
    assert_eq!(lines.next().unwrap().unwrap(), "saved revision=0");
    assert_eq!(fs::read(&path).unwrap(), before);

    assert_eq!(code(&mockrec(&["serve", p(&dir.path().join("missing.mrp"))])), 3);
}
