use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use sixsense::classifier::{
    generate_synthetic_dataset, load_weights, save_weights, train, LabeledSample, Network, NetworkArch, TrainingConfig,
    MAX_CLASSES,
};
use sixsense::controlplane::protocol::{to_line, ServerMessage};
use sixsense::controlplane::server::{serve, ServerConfig};
use sixsense::controlplane::{CommandGrammar, ControlPlaneConfig, EntryConfig, MotionConfig, MotionDetector};
use sixsense::imaging::{decode_netpbm, encode_netpbm, ChannelRange, YCbCrMode};
use sixsense::markers::MappingConfig;
use sixsense::pipeline::{
    run_gesture_pipeline, run_marker_pipeline, to_json_lines, FrameSource, GestureConfig, MarkerConfig, DEFAULT_FPS,
};
use sixsense::segmentation::{GestureSample, SAMPLE_LEN, SAMPLE_SIDE};

use crate::output::{write_file, StagedDir};
use crate::{ClassifyArgs, Command, Failure, MarkersArgs, MotionArgs, ServeArgs, SynthArgs, TrainArgs, YCbCrArg};

const MANIFEST: &str = "labels.csv";

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train_cmd(a),
        Command::Classify(a) => classify(a),
        Command::Markers(a) => markers(a),
        Command::Motion(a) => motion(a),
        Command::Serve(a) => serve_cmd(a),
    }
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    if a.classes == 0 || a.classes > MAX_CLASSES {
        return Err(usage(format!("--classes must be in 1..={MAX_CLASSES}")));
    }
    if a.per_class == 0 {
        return Err(usage("--per-class must be at least 1"));
    }
    let samples = generate_synthetic_dataset(a.seed, a.classes, a.per_class).map_err(anyhow::Error::from)?;
    let staged = StagedDir::new(&a.out, a.force)?;
    let mut manifest = csv::Writer::from_writer(Vec::new());
    manifest.write_record(["file", "label"]).map_err(anyhow::Error::from)?;
    for (i, s) in samples.iter().enumerate() {
        let name = format!("class{:02}_{:04}.pgm", s.label, i % a.per_class);
        let mask = GestureSample::from_values(s.input.clone())
            .ok_or_else(|| anyhow!("generator produced an invalid sample"))?
            .to_mask();
        fs::write(staged.path().join(&name), encode_netpbm(&mask.to_frame())).context("writing sample")?;
        manifest
            .write_record([name, s.label.to_string()])
            .map_err(anyhow::Error::from)?;
    }
    let manifest = manifest.into_inner().map_err(|e| anyhow!("{e}"))?;
    fs::write(staged.path().join(MANIFEST), manifest).context("writing manifest")?;
    staged.commit()?;
    println!("wrote {} samples to {}", samples.len(), a.out.display());
    Ok(())
}

fn load_dataset(dir: &Path) -> Result<Vec<LabeledSample>> {
    let manifest = dir.join(MANIFEST);
    let mut reader = csv::Reader::from_path(&manifest).with_context(|| format!("opening {}", manifest.display()))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("reading {}", manifest.display()))?;
        let (file, label) = match (record.get(0), record.get(1)) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(anyhow!("{}: expected file,label rows", manifest.display())),
        };
        let label: usize = label.trim().parse().with_context(|| format!("label {label:?}"))?;
        let path = dir.join(file);
        let frame = decode_netpbm(&fs::read(&path).with_context(|| format!("reading {}", path.display()))?)
            .with_context(|| format!("decoding {}", path.display()))?;
        if frame.dimensions() != (SAMPLE_SIDE, SAMPLE_SIDE) {
            return Err(anyhow!(
                "{} is {:?}, samples are 50x50",
                path.display(),
                frame.dimensions()
            ));
        }
        let input = frame
            .to_gray()
            .data()
            .iter()
            .map(|&v| if v >= 128 { 1.0 } else { 0.0 })
            .collect();
        out.push(LabeledSample { input, label });
    }
    if out.is_empty() {
        return Err(anyhow!("{} lists no samples", manifest.display()));
    }
    Ok(out)
}

fn default_loss_path(weights: &Path) -> PathBuf {
    let stem = weights
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    weights.with_file_name(format!("{stem}.loss.csv"))
}

fn train_cmd(a: TrainArgs) -> Result<(), Failure> {
    let arch = NetworkArch::sigmoid(&a.arch.0).map_err(|e| usage(format!("--arch: {e}")))?;
    if arch.inputs() != SAMPLE_LEN {
        return Err(usage(format!("--arch must start with {SAMPLE_LEN} inputs")));
    }
    let cfg = TrainingConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        batch_size: a.batch,
        seed: a.seed,
        ..TrainingConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let loss_path = a.loss_csv.clone().unwrap_or_else(|| default_loss_path(&a.out));

    let data = load_dataset(&a.data)?;
    if let Some(s) = data.iter().find(|s| s.label == 0 || s.label > arch.outputs()) {
        return Err(Failure::Runtime(anyhow!(
            "label {} does not fit a network with {} outputs",
            s.label,
            arch.outputs()
        )));
    }
    let report = train(Network::init(arch, a.seed), &data, &cfg).map_err(anyhow::Error::from)?;
    let accuracy = report.network.accuracy(&data).map_err(anyhow::Error::from)?;

    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["epoch", "loss"]).map_err(anyhow::Error::from)?;
    for (i, loss) in report.loss_history.iter().enumerate() {
        csv.write_record([(i + 1).to_string(), loss.to_string()])
            .map_err(anyhow::Error::from)?;
    }
    let csv = csv.into_inner().map_err(|e| anyhow!("{e}"))?;
    write_file(&loss_path, &csv)?;
    write_file(&a.out, &save_weights(&report.network))?;
    println!(
        "trained {} epochs on {} samples: final loss {:.6}, training accuracy {:.4}",
        cfg.epochs,
        data.len(),
        report.loss_history.last().copied().unwrap_or(f64::NAN),
        accuracy
    );
    Ok(())
}

fn open_frames(dir: &Path) -> Result<FrameSource, Failure> {
    let source = FrameSource::open_dir(dir, DEFAULT_FPS).map_err(anyhow::Error::from)?;
    if source.is_empty() {
        return Err(Failure::Runtime(anyhow!(
            "no numbered .ppm/.pgm/.pnm frames in {}",
            dir.display()
        )));
    }
    Ok(source)
}

fn classify(a: ClassifyArgs) -> Result<(), Failure> {
    if a.queue == 0 {
        return Err(usage("--queue must be at least 1"));
    }
    if !(0.0..1.0).contains(&a.conf) {
        return Err(usage("--conf must be in [0, 1)"));
    }
    let cfg = GestureConfig {
        mode: match a.ycbcr {
            YCbCrArg::Verbatim => YCbCrMode::Verbatim,
            YCbCrArg::Standard => YCbCrMode::Standard,
        },
        skin: ChannelRange::skin(),
        min_blob_area: a.min_area,
        queue_len: a.queue,
        confidence: a.conf,
    };
    let bytes = fs::read(&a.weights).with_context(|| format!("reading {}", a.weights.display()))?;
    let net = load_weights(&bytes).with_context(|| format!("loading {}", a.weights.display()))?;
    let source = open_frames(&a.frames)?;
    let run = run_gesture_pipeline(&source, &net, &cfg).map_err(anyhow::Error::from)?;
    if let Some(trace) = &a.trace {
        write_file(trace, to_json_lines(&run.trace).as_bytes())?;
    }
    write_file(&a.out, to_json_lines(&run.events).as_bytes())?;
    println!("{} frames, {} gesture events", run.trace.len(), run.events.len());
    Ok(())
}

fn markers(a: MarkersArgs) -> Result<(), Failure> {
    if a.drag_hold == 0 {
        return Err(usage("--drag-hold must be at least 1"));
    }
    let source = open_frames(&a.frames)?;
    let (video_width, video_height) = match a.video {
        Some(v) => v,
        None => {
            let (_, first) = source
                .frames()
                .next()
                .expect("source is not empty")
                .map_err(anyhow::Error::from)?;
            (first.width() as u32, first.height() as u32)
        }
    };
    let mapping = MappingConfig {
        alpha: a.alpha,
        beta: a.beta,
        gamma: a.gamma,
        delta: a.delta,
        screen_width: a.screen.0,
        screen_height: a.screen.1,
        video_width,
        video_height,
    };
    mapping.validate().map_err(|e| usage(e.to_string()))?;
    let mut cfg = MarkerConfig {
        min_area: a.min_area,
        ..MarkerConfig::default()
    };
    cfg.pointer.mapping = mapping;
    cfg.pointer.drag_hold_frames = a.drag_hold;
    cfg.pointer.scroll_scale = a.scroll_scale;
    let events = run_marker_pipeline(&source, &cfg).map_err(anyhow::Error::from)?;
    write_file(&a.out, to_json_lines(&events).as_bytes())?;
    println!("{} frames, {} pointer events", source.len(), events.len());
    Ok(())
}

fn motion_config(background: usize, tau: f64, rho: f64) -> Result<MotionConfig, Failure> {
    if background == 0 {
        return Err(usage("--background must be at least 1"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(usage("--tau must be a non-negative number"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(usage("--rho must be in [0, 1]"));
    }
    Ok(MotionConfig {
        background_frames: background,
        tau,
        rho,
    })
}

fn motion(a: MotionArgs) -> Result<(), Failure> {
    let cfg = motion_config(a.background, a.tau, a.rho)?;
    let source = open_frames(&a.frames)?;
    let mut detector = MotionDetector::new(cfg);
    let mut out = String::new();
    let mut alerts = 0;
    for item in source.frames() {
        let (index, frame) = item.map_err(anyhow::Error::from)?;
        let report = detector.process(index, &frame).map_err(anyhow::Error::from)?;
        if report.alert {
            alerts += 1;
            out.push_str(&to_line(&ServerMessage::MotionAlert {
                changed: report.changed,
                frame: index,
            }));
            out.push('\n');
        }
    }
    write_file(&a.out, out.as_bytes())?;
    println!("{} frames, {alerts} alerts", source.len());
    Ok(())
}

fn serve_cmd(a: ServeArgs) -> Result<(), Failure> {
    let motion = motion_config(a.background, a.tau, a.rho)?;
    if a.ttl_ms == 0 || a.timeout_ms == 0 {
        return Err(usage("--ttl-ms and --timeout-ms must be positive"));
    }
    let ws_listen = match (a.ws_listen, &a.with_dashboard) {
        (Some(addr), _) => Some(addr),
        (None, Some(_)) => Some(([127, 0, 0, 1], 7879).into()),
        (None, None) => None,
    };
    let grammar = match &a.grammar {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            CommandGrammar::from_json(&bytes).with_context(|| format!("loading grammar {}", path.display()))?
        }
        None => CommandGrammar::lab_default(),
    };
    let cfg = ServerConfig {
        listen: a.listen,
        ws_listen,
        dashboard_dir: a.with_dashboard.clone(),
        plane: ControlPlaneConfig {
            entry: EntryConfig {
                unlock_ttl_ms: a.ttl_ms,
                decision_timeout_ms: a.timeout_ms,
            },
            motion,
            ..ControlPlaneConfig::default()
        },
        grammar,
        command_log: a.command_log.clone(),
        ..ServerConfig::default()
    };

    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async move {
        let server = serve(cfg).await?;
        let addrs = serde_json::json!({
            "tcp": server.tcp_addr().to_string(),
            "ws": server.ws_addr().map(|a| a.to_string()),
        });
        let mut stdout = std::io::stdout();
        writeln!(stdout, "{addrs}")?;
        stdout.flush()?;
        tokio::signal::ctrl_c().await.context("waiting for ctrl-c")?;
        server.shutdown().await;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}
