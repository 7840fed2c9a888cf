//! The `improvise` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use improvise_core::curriculum::{builtin_lessons, ContentId, SessionReport};
use improvise_core::engine::replay_performance;
use improvise_core::midi::{parse_smf, EventKind, MidiEvent, MidiFile, RawEvent};

use crate::config::Config;
use crate::content::{ContentLibrary, IngestMeta};
use crate::server;

#[derive(Debug, Parser)]
#[command(name = "improvise", version, about = "Keyboard improvisation trainer: engine service and tools")]
pub struct Cli {
    /// JSON configuration file; IMPROVISE_* variables override its values
    #[arg(long, global = true, env = "IMPROVISE_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the WebSocket service (/ws) and health endpoint (/health)
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        host: Option<String>,
        /// Raw MIDI byte source to read notes from, e.g. /dev/snd/midiC1D0
        #[arg(long, value_name = "PATH")]
        midi_in: Option<PathBuf>,
    },
    /// Add a Standard MIDI File to the content library and print its id
    Ingest {
        file: PathBuf,
        #[arg(long)]
        title: Option<String>,
        /// Lesson number this content belongs to (repeatable)
        #[arg(long = "tag", value_name = "LESSON")]
        tags: Vec<u32>,
        /// Store under this id instead of one derived from the file contents
        #[arg(long)]
        id: Option<String>,
    },
    /// List the built-in lessons
    Lessons,
    /// Score a recorded performance against a lesson and print the report
    Replay {
        /// Library id, or a path to a .mid file
        content: String,
        lesson: u32,
        #[arg(long, default_value_t = 1.0)]
        speed: f64,
        /// Print the report without writing it under the reports directory
        #[arg(long)]
        no_save: bool,
    },
    /// Print the events of a MIDI file
    Dump {
        /// Library id, or a path to a .mid file
        content: String,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Serve { port, host, midi_in } => {
            config.port = port.unwrap_or(config.port);
            config.host = host.unwrap_or(config.host);
            serve(config, midi_in)
        }
        Command::Ingest { file, title, tags, id } => {
            let bytes = std::fs::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let title = title.unwrap_or_else(|| file.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into()));
            let mut library = ContentLibrary::open(&config.content_dir)?;
            let entry = library
                .ingest(&bytes, IngestMeta { title, lesson_tags: tags, id })
                .with_context(|| format!("ingesting {}", file.display()))?;
            println!("{}", entry.id);
            Ok(())
        }
        Command::Lessons => {
            for lesson in builtin_lessons() {
                println!("{}", lesson.label());
            }
            Ok(())
        }
        Command::Replay { content, lesson, speed, no_save } => {
            let library = ContentLibrary::open(&config.content_dir)?;
            let file = resolve(&library, &content)?;
            let report = replay_performance(&file, lesson, speed, config.settings()?, &library)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !no_save {
                let path = save_report(&config.reports_dir, &report)?;
                eprintln!("report written to {}", path.display());
            }
            Ok(())
        }
        Command::Dump { content } => {
            let library = ContentLibrary::open(&config.content_dir)?;
            print!("{}", dump(&resolve(&library, &content)?));
            Ok(())
        }
    }
}

fn serve(config: Config, midi_in: Option<PathBuf>) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let library = ContentLibrary::open(&config.content_dir)?;
        let listener = server::bind(&config.host, config.port).await?;
        let service = server::start(&config, library, listener)?;
        if let Some(path) = midi_in {
            server_midi(path, &service)?;
        }
        println!("serving on ws://{}/ws", service.addr);
        tokio::select! {
            r = service.http => r??,
            _ = tokio::signal::ctrl_c() => tracing::info!("shutting down"),
        }
        Ok(())
    })
}

fn server_midi(path: PathBuf, service: &server::Service) -> Result<()> {
    crate::midi_in::spawn_reader(path.clone(), service.commands.clone())
        .with_context(|| format!("opening MIDI input {}", path.display()))?;
    Ok(())
}

/// A library id first, then a file path.
pub fn resolve(library: &ContentLibrary, content: &str) -> Result<MidiFile> {
    let id = ContentId::new(content);
    if library.get(&id).is_some() {
        return Ok(library.load_file(&id)?);
    }
    let path = Path::new(content);
    if path.is_file() {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_smf(&bytes).with_context(|| format!("parsing {}", path.display()));
    }
    bail!("content {content} not found: not a library id and not a file")
}

pub fn save_report(dir: &Path, report: &SessionReport) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let path = dir.join(format!("{stamp}-lesson{:02}.json", report.lesson_id));
    std::fs::write(&path, serde_json::to_vec_pretty(report)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn describe(e: &MidiEvent) -> String {
    match &e.kind {
        EventKind::NoteOn { pitch, velocity } => format!("note_on   {pitch:<4} ({:>3}) vel {velocity}", pitch.number()),
        EventKind::NoteOff { pitch, velocity } => format!("note_off  {pitch:<4} ({:>3}) vel {velocity}", pitch.number()),
        EventKind::ControlChange { controller, value } => format!("control   {controller} = {value}"),
        EventKind::ProgramChange { program } => format!("program   {program}"),
        EventKind::MetaTempo { us_per_quarter } => {
            format!("tempo     {us_per_quarter} us/quarter ({:.2} BPM)", 60_000_000.0 / *us_per_quarter as f64)
        }
        EventKind::MetaEnd => "end_of_track".into(),
        EventKind::Other(RawEvent::Meta { meta_type, data }) => match meta_type {
            0x01..=0x07 => format!("meta 0x{meta_type:02x} {:?}", String::from_utf8_lossy(data)),
            _ => format!("meta 0x{meta_type:02x} {} bytes", data.len()),
        },
        EventKind::Other(RawEvent::SysEx { status, data }) => format!("sysex 0x{status:02x} {} bytes", data.len()),
        EventKind::Other(RawEvent::Channel { status, data }) => format!("channel 0x{status:02x} {data:02x?}"),
    }
}

/// Human-readable event listing.
pub fn dump(file: &MidiFile) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "format {}, ppq {}, {} track(s), {} ticks, {:.1} BPM",
        file.format,
        file.ppq,
        file.tracks.len(),
        file.duration_ticks(),
        file.initial_tempo_bpm()
    );
    for (i, track) in file.tracks.iter().enumerate() {
        let _ = writeln!(out, "track {i}: {} events", track.events.len());
        for e in &track.events {
            let _ = writeln!(out, "{:>10}  ch {:>2}  {}", e.tick, e.channel + 1, describe(e));
        }
    }
    out
}
