use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use ifvc::entropy::QuantConfig;
use ifvc::interact::Session;
use ifvc::motion::{render_wireframe, write_flo};
use ifvc::stream::{decode_stream, encode_stream, inspect_stream};
use ifvc::synth::{portrait, talking_head, TalkingHead};
use ifvc::trace_io::{export_trace, key_from_json, load_trace, TraceFormat};
use ifvc::{CodedStream, EncodeParams, MorphableModel, PreviewFrame};

use crate::api::{self, AppState};
use crate::resolve_model;
use crate::view::MeshView;

#[derive(Debug, Parser)]
#[command(
    name = "ifvc",
    version,
    about = "Facial-semantics video streams: encode, inspect, edit, preview"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a semantic trace and a key image into an .ifvc stream.
    Encode(EncodeArgs),
    /// Decode a stream's semantics to CSV or JSON.
    Decode(DecodeArgs),
    /// Print header fields and bitrate.
    Inspect(InspectArgs),
    /// Dump one frame's projected mesh as JSON.
    Mesh(MeshArgs),
    /// Write warped preview frames as PNG.
    Preview(PreviewArgs),
    /// Serve the editing API on localhost.
    Serve(ServeArgs),
    /// Generate demo inputs for the built-in synthetic model.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Trace file (.csv or .json).
    #[arg(long)]
    pub trace: PathBuf,
    /// Key-reference image, stored verbatim as the key payload.
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Quantization steps: five group values (mouth,eye,rot,trans,loc) or
    /// all fourteen, comma separated.
    #[arg(long)]
    pub steps: Option<String>,
    /// JSON key semantics overriding the trace's key.
    #[arg(long)]
    pub key_semantics: Option<PathBuf>,
    /// Frame size; defaults to the key image's size.
    #[arg(long, requires = "height")]
    pub width: Option<u16>,
    #[arg(long, requires = "width")]
    pub height: Option<u16>,
    #[arg(long, default_value = "")]
    pub model_id: String,
    /// Trace format when the extension is ambiguous.
    #[arg(long)]
    pub format: Option<TraceFormat>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output trace (.csv or .json).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub format: Option<TraceFormat>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Print the full report as JSON, per-frame sizes included.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub frame: usize,
    /// `.mmb` file or `synthetic`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// `a..b` (exclusive), `a..=b`, or a single index. Defaults to all.
    #[arg(long)]
    pub frames: Option<String>,
    #[arg(long)]
    pub outdir: PathBuf,
    /// Also write each frame's coarse flow as `.flo`.
    #[arg(long)]
    pub flow: bool,
    /// Also write wireframe renders.
    #[arg(long)]
    pub wireframe: bool,
    /// Animate this portrait instead of the stream's key image.
    #[arg(long)]
    pub key: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Write the synthetic face model as .mmb.
    Model {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a head-turn and blink trace.
    Trace {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 250)]
        frames: usize,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
    },
    /// Write a procedural portrait PNG.
    Key {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: u32,
        #[arg(long, default_value_t = 256)]
        height: u32,
    },
}

fn trace_format(path: &Path, explicit: Option<TraceFormat>) -> Result<TraceFormat> {
    explicit
        .or_else(|| TraceFormat::from_path(path))
        .with_context(|| format!("cannot tell trace format of {}; pass --format", path.display()))
}

/// Parses `a..b`, `a..=b` or `l` into a half-open range.
pub fn parse_frames(text: &str) -> Result<Range<usize>> {
    let num = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .with_context(|| format!("bad frame index `{s}` in `{text}`"))
    };
    let range = if let Some((a, b)) = text.split_once("..=") {
        num(a)?..num(b)? + 1
    } else if let Some((a, b)) = text.split_once("..") {
        num(a)?..num(b)?
    } else {
        let l = num(text)?;
        l..l + 1
    };
    ensure!(range.start < range.end, "empty frame range `{text}`");
    Ok(range)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Inspect(a) => inspect(a),
        Command::Mesh(a) => mesh(a),
        Command::Preview(a) => preview(a),
        Command::Serve(a) => serve(a),
        Command::Synth(c) => synth(c),
    }
}

fn encode(a: EncodeArgs) -> Result<()> {
    let mut trace = load_trace(&a.trace, trace_format(&a.trace, a.format)?)
        .with_context(|| format!("reading {}", a.trace.display()))?;
    let key_payload = fs::read(&a.key).with_context(|| format!("reading {}", a.key.display()))?;
    if let Some(path) = &a.key_semantics {
        let doc: serde_json::Value = serde_json::from_slice(&fs::read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        let (mut key, pose) = key_from_json(&doc)?;
        key.pose = pose.unwrap_or(trace.key.pose);
        key.validate()?;
        trace.key = key;
    }
    let (width, height) = match (a.width, a.height) {
        (Some(w), Some(h)) => (w, h),
        _ => {
            let img = PreviewFrame::decode(&key_payload)
                .context("key image is not decodable; pass --width and --height")?;
            (
                u16::try_from(img.width).context("key image too wide")?,
                u16::try_from(img.height).context("key image too tall")?,
            )
        }
    };
    let quant = match &a.steps {
        Some(s) => QuantConfig::parse_list(s)?,
        None => QuantConfig::default(),
    };
    let params = EncodeParams {
        quant,
        width,
        height,
        model_id: a.model_id,
        ..EncodeParams::default()
    };
    let stream = encode_stream(&trace, &key_payload, &params)?;
    stream
        .write(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    let report = inspect_stream(&stream)?;
    println!(
        "{} frames, {} semantic bytes, {:.3} kbps -> {}",
        stream.frames.len(),
        report.semantic_payload_bytes,
        report.kbps,
        a.out.display()
    );
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let stream = CodedStream::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let trace = decode_stream(&stream)?;
    export_trace(&trace, &a.out, trace_format(&a.out, a.format)?)?;
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let stream = CodedStream::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let report = inspect_stream(&stream)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{report}");
    }
    Ok(())
}

fn open(input: &Path, model: Option<&Path>) -> Result<(Session, MorphableModel)> {
    let session = Session::open(input).with_context(|| format!("opening {}", input.display()))?;
    let model = resolve_model(model, &session.stream().header.model_id)?;
    Ok((session, model))
}

fn mesh(a: MeshArgs) -> Result<()> {
    let (session, model) = open(&a.input, a.model.as_deref())?;
    let view = MeshView::for_frame(&session, a.frame, &model)?;
    fs::write(&a.out, serde_json::to_vec_pretty(&view)?)
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn preview(a: PreviewArgs) -> Result<()> {
    let (mut session, model) = open(&a.input, a.model.as_deref())?;
    if let Some(path) = &a.key {
        let image = PreviewFrame::decode(&fs::read(path)?)?;
        let key = session.stream().key_semantics.clone();
        session.substitute_key(image, key)?;
    }
    let n = session.frame_count();
    let range = match &a.frames {
        Some(s) => parse_frames(s)?,
        None => 0..n,
    };
    if range.end > n {
        bail!("frames {range:?} exceed the stream's {n} frames");
    }
    fs::create_dir_all(&a.outdir)?;
    for l in range {
        let p = session.preview(l, &model).with_context(|| format!("frame {l}"))?;
        fs::write(a.outdir.join(format!("frame_{l:05}.png")), p.frame.to_png()?)?;
        if a.flow {
            let f = fs::File::create(a.outdir.join(format!("flow_{l:05}.flo")))?;
            write_flo(&p.flow, std::io::BufWriter::new(f))?;
        }
        if a.wireframe {
            let cam = session.camera();
            let wf = render_wireframe(
                p.inter.mesh(),
                &model.triangles,
                &p.inter.eyes.map,
                (cam.width, cam.height),
            );
            fs::write(a.outdir.join(format!("wire_{l:05}.png")), wf.to_png()?)?;
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let (session, model) = open(&a.file, a.model.as_deref())?;
    let state = AppState::shared(session, model);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(api::serve(state, a.port))?;
    Ok(())
}

fn synth(c: SynthCommand) -> Result<()> {
    match c {
        SynthCommand::Model { out } => MorphableModel::synthetic().save(&out)?,
        SynthCommand::Trace { out, frames, fps } => {
            let trace = talking_head(&TalkingHead {
                frames,
                fps,
                ..TalkingHead::default()
            });
            export_trace(&trace, &out, trace_format(&out, None)?)?;
        }
        SynthCommand::Key { out, width, height } => fs::write(&out, portrait(width, height).to_png()?)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_ranges() {
        assert_eq!(parse_frames("3..7").unwrap(), 3..7);
        assert_eq!(parse_frames("3..=7").unwrap(), 3..8);
        assert_eq!(parse_frames("4").unwrap(), 4..5);
        assert!(parse_frames("7..3").is_err());
        assert!(parse_frames("a..b").is_err());
        assert!(parse_frames("5..5").is_err());
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["ifvc", "serve", "--port", "9000", "--file", "s.ifvc"]).unwrap();
        assert!(matches!(
            cli.command,
            Command::Serve(ServeArgs { port: 9000, .. })
        ));
        assert!(Cli::try_parse_from(["ifvc", "encode", "--trace", "t.csv"]).is_err());
    }
}
