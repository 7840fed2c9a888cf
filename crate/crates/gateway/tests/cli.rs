use std::path::Path;
use std::process::{Command, Output};

use improvise_core::midi::{serialize_smf, MidiEvent, MidiFile, MidiTrack};
use improvise_core::theory::Pitch;

fn improvise(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_improvise"))
        .args(args)
        .env("IMPROVISE_CONTENT_DIR", dir.join("content"))
        .env("IMPROVISE_REPORTS_DIR", dir.join("reports"))
        .env_remove("IMPROVISE_CONFIG")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn performance(dir: &Path) -> std::path::PathBuf {
    let mut events = Vec::new();
    for (i, n) in [62, 65, 69, 61].into_iter().enumerate() {
        let t = i as u64 * 480;
        events.push(MidiEvent::note_on(t, 0, Pitch::new(n).unwrap(), 90));
        events.push(MidiEvent::note_off(t + 240, 0, Pitch::new(n).unwrap()));
    }
    events.push(MidiEvent::end(1920));
    let path = dir.join("take.mid");
    std::fs::write(&path, serialize_smf(&MidiFile { format: 0, ppq: 480, tracks: vec![MidiTrack { events }] }))
        .unwrap();
    path
}

#[test]
fn lessons_lists_the_curriculum() {
    let dir = tempfile::tempdir().unwrap();
    let out = improvise(dir.path(), &["lessons"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "01 Swing");
    assert_eq!(lines[5], "06 Improvise (Compose in the moment)");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(improvise(dir.path(), &["juggle"]).status.code(), Some(2));
    assert_eq!(improvise(dir.path(), &["replay", "x", "notanumber"]).status.code(), Some(2));
}

#[test]
fn corrupt_ingest_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mid");
    std::fs::write(&bad, b"MThd garbage").unwrap();
    let out = improvise(dir.path(), &["ingest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!dir.path().join("content/manifest.json").exists());
}

#[test]
fn ingest_then_replay_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let take = performance(dir.path());
    let out = improvise(dir.path(), &["ingest", take.to_str().unwrap(), "--title", "take", "--tag", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let id = stdout(&out).trim().to_string();
    assert_eq!(id.len(), 16);

    let out = improvise(dir.path(), &["replay", &id, "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["lesson_id"], 4);
    assert_eq!(report["empty"], false);
    let saved: Vec<_> = std::fs::read_dir(dir.path().join("reports")).unwrap().collect();
    assert_eq!(saved.len(), 1);
    let saved: serde_json::Value =
        serde_json::from_slice(&std::fs::read(saved[0].as_ref().unwrap().path()).unwrap()).unwrap();
    assert_eq!(saved, report);

    // a plain path works too, and --no-save leaves the reports alone
    let out = improvise(dir.path(), &["replay", take.to_str().unwrap(), "4", "--speed", "2", "--no-save"]);
    assert!(out.status.success());
    let fast: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(fast["counts"], report["counts"]);
    assert_eq!(std::fs::read_dir(dir.path().join("reports")).unwrap().count(), 1);
}

#[test]
fn dump_lists_events() {
    let dir = tempfile::tempdir().unwrap();
    let take = performance(dir.path());
    let out = improvise(dir.path(), &["dump", take.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("format 0, ppq 480, 1 track(s), 1920 ticks"), "{text}");
    assert!(text.contains("track 0: 9 events"));
    assert!(text.contains("note_on   D4"), "{text}");
    assert!(text.contains("end_of_track"));
    assert_eq!(improvise(dir.path(), &["dump", "missing"]).status.code(), Some(1));
}
