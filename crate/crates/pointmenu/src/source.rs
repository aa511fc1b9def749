//! Frame sources: synthetic scripts, PPM directories, and a camera adapter.
//!
//! Every source emits strictly increasing timestamps and, once it has
//! returned `Ok(None)`, keeps returning it.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use pointmenu_core::{Frame, SyntheticScript, SyntheticSource};

use crate::ppm::{read_ppm, PpmError};

#[derive(Debug, thiserror::Error)]
pub enum SourceError {
    #[error("invalid synthetic script: {0}")]
    Script(String),
    #[error("{path}: {source}")]
    Ppm {
        path: PathBuf,
        #[source]
        source: PpmError,
    },
    #[error("no .ppm files in {0}")]
    EmptyDirectory(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("camera {0} not found")]
    DeviceMissing(String),
    #[error("camera startup failed: {0}")]
    Startup(String),
    #[error("unrecognized source {0:?} (expected synthetic:<file>, dir:<path> or camera:<id>)")]
    Spec(String),
}

pub trait FrameSource {
    /// Next frame, or `Ok(None)` at end of stream.
    fn next_frame(&mut self) -> Result<Option<Frame>, SourceError>;

    /// Nominal frames per second.
    fn fps(&self) -> f64;
}

impl FrameSource for SyntheticSource {
    fn next_frame(&mut self) -> Result<Option<Frame>, SourceError> {
        Ok(self.next())
    }

    fn fps(&self) -> f64 {
        f64::from(SyntheticSource::fps(self))
    }
}

pub fn synthetic_source(script: SyntheticScript) -> Result<SyntheticSource, SourceError> {
    SyntheticSource::new(script).map_err(|e| SourceError::Script(e.to_string()))
}

pub fn load_script(path: &Path) -> Result<SyntheticScript, SourceError> {
    let text = fs::read_to_string(path).map_err(|source| SourceError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| SourceError::Script(format!("{}: {e}", path.display())))
}

/// Replays `*.ppm` files in lexicographic filename order.
#[derive(Debug)]
pub struct DirectorySource {
    files: Vec<PathBuf>,
    next_index: usize,
    fps: u32,
    done: bool,
}

impl DirectorySource {
    pub fn open(dir: &Path, fps: u32) -> Result<Self, SourceError> {
        if !(1..=1000).contains(&fps) {
            return Err(SourceError::Startup(format!("fps {fps} must be in 1..=1000")));
        }
        let io_err = |source| SourceError::Io {
            path: dir.to_owned(),
            source,
        };
        let mut files = Vec::new();
        for entry in fs::read_dir(dir).map_err(io_err)? {
            let path = entry.map_err(io_err)?.path();
            let is_ppm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
            if is_ppm && path.is_file() {
                files.push(path);
            }
        }
        if files.is_empty() {
            return Err(SourceError::EmptyDirectory(dir.to_owned()));
        }
        files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        Ok(DirectorySource {
            files,
            next_index: 0,
            fps,
            done: false,
        })
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

impl FrameSource for DirectorySource {
    fn next_frame(&mut self) -> Result<Option<Frame>, SourceError> {
        if self.done || self.next_index >= self.files.len() {
            self.done = true;
            return Ok(None);
        }
        let path = &self.files[self.next_index];
        let t = self.next_index as u64 * 1000 / u64::from(self.fps);
        self.next_index += 1;
        read_ppm(path, t).map(Some).map_err(|source| {
            self.done = true;
            SourceError::Ppm {
                path: path.clone(),
                source,
            }
        })
    }

    fn fps(&self) -> f64 {
        f64::from(self.fps)
    }
}

/// Camera selection: a device index or a platform path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CameraDevice {
    Index(u32),
    Path(PathBuf),
}

impl CameraDevice {
    pub fn parse(s: &str) -> Self {
        s.parse()
            .map_or_else(|_| CameraDevice::Path(s.into()), CameraDevice::Index)
    }

    fn ffmpeg_input(&self) -> Result<(&'static str, String), SourceError> {
        if cfg!(target_os = "macos") {
            let name = match self {
                CameraDevice::Index(i) => i.to_string(),
                CameraDevice::Path(p) => p.display().to_string(),
            };
            return Ok(("avfoundation", name));
        }
        let path = match self {
            CameraDevice::Index(i) => PathBuf::from(format!("/dev/video{i}")),
            CameraDevice::Path(p) => p.clone(),
        };
        if !path.exists() {
            return Err(SourceError::DeviceMissing(path.display().to_string()));
        }
        let format = if cfg!(windows) { "dshow" } else { "v4l2" };
        Ok((format, path.display().to_string()))
    }
}

#[derive(Default)]
struct LatestFrame {
    pixels: Option<Vec<u8>>,
    ended: Option<String>,
}

/// Live capture through an `ffmpeg` child process emitting raw RGB24.
///
/// A reader thread keeps only the newest frame, so a slow consumer skips
/// stale frames instead of falling behind.
pub struct CameraSource {
    child: Child,
    slot: Arc<(Mutex<LatestFrame>, Condvar)>,
    width: usize,
    height: usize,
    fps: u32,
    started: Instant,
    last_ts: Option<u64>,
    done: bool,
}

impl CameraSource {
    pub fn open(device: &CameraDevice, width: usize, height: usize, fps: u32) -> Result<Self, SourceError> {
        if width == 0 || height == 0 || fps == 0 {
            return Err(SourceError::Startup(format!(
                "invalid capture mode {width}x{height}@{fps}"
            )));
        }
        let (format, input) = device.ffmpeg_input()?;
        let mut child = Command::new("ffmpeg")
            .args(["-hide_banner", "-loglevel", "error", "-f", format])
            .args(["-framerate", &fps.to_string()])
            .args(["-video_size", &format!("{width}x{height}")])
            .args(["-i", &input])
            .args(["-vf", &format!("scale={width}:{height}")])
            .args(["-f", "rawvideo", "-pix_fmt", "rgb24", "-"])
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SourceError::Startup(format!("cannot run ffmpeg: {e}")))?;

        let slot: Arc<(Mutex<LatestFrame>, Condvar)> = Arc::default();
        let mut stdout = child.stdout.take().expect("piped stdout");
        let mut stderr = child.stderr.take().expect("piped stderr");
        let frame_len = width * height * 3;
        {
            let slot = Arc::clone(&slot);
            thread::spawn(move || loop {
                let mut buf = vec![0u8; frame_len];
                let result = stdout.read_exact(&mut buf);
                let (lock, ready) = &*slot;
                let mut latest = lock.lock().unwrap();
                match result {
                    Ok(()) => latest.pixels = Some(buf),
                    Err(e) => {
                        let mut msg = String::new();
                        let _ = stderr.read_to_string(&mut msg);
                        latest.ended = Some(if msg.trim().is_empty() {
                            e.to_string()
                        } else {
                            msg.trim().to_owned()
                        });
                        ready.notify_all();
                        return;
                    }
                }
                ready.notify_all();
            });
        }

        let mut source = CameraSource {
            child,
            slot,
            width,
            height,
            fps,
            started: Instant::now(),
            last_ts: None,
            done: false,
        };
        // Surface missing/busy devices at startup rather than on the first frame.
        {
            let (lock, ready) = &*source.slot;
            let guard = lock.lock().unwrap();
            let (guard, _) = ready
                .wait_timeout_while(guard, Duration::from_secs(5), |l| {
                    l.pixels.is_none() && l.ended.is_none()
                })
                .unwrap();
            if guard.pixels.is_none() {
                let reason = guard.ended.clone().unwrap_or_else(|| "no frame within 5 s".into());
                drop(guard);
                let _ = source.child.kill();
                return Err(SourceError::Startup(reason));
            }
        }
        source.started = Instant::now();
        Ok(source)
    }
}

impl FrameSource for CameraSource {
    fn next_frame(&mut self) -> Result<Option<Frame>, SourceError> {
        if self.done {
            return Ok(None);
        }
        let pixels = {
            let (lock, ready) = &*self.slot;
            let mut latest = lock.lock().unwrap();
            while latest.pixels.is_none() && latest.ended.is_none() {
                latest = ready.wait(latest).unwrap();
            }
            match latest.pixels.take() {
                Some(p) => p,
                None => {
                    self.done = true;
                    log::info!("camera stream ended: {}", latest.ended.as_deref().unwrap_or(""));
                    return Ok(None);
                }
            }
        };
        let elapsed = self.started.elapsed().as_millis() as u64;
        let ts = match self.last_ts {
            Some(prev) => elapsed.max(prev + 1),
            None => elapsed,
        };
        self.last_ts = Some(ts);
        let frame =
            Frame::from_rgb(self.width, self.height, pixels, ts).map_err(|e| SourceError::Startup(e.to_string()))?;
        Ok(Some(frame))
    }

    fn fps(&self) -> f64 {
        f64::from(self.fps)
    }
}

impl Drop for CameraSource {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Parsed `--source` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    Synthetic(PathBuf),
    Directory(PathBuf),
    Camera(CameraDevice),
}

impl std::str::FromStr for SourceSpec {
    type Err = SourceError;

    fn from_str(s: &str) -> Result<Self, SourceError> {
        match s.split_once(':') {
            Some(("synthetic", p)) if !p.is_empty() => Ok(SourceSpec::Synthetic(p.into())),
            Some(("dir", p)) if !p.is_empty() => Ok(SourceSpec::Directory(p.into())),
            Some(("camera", d)) if !d.is_empty() => Ok(SourceSpec::Camera(CameraDevice::parse(d))),
            _ => Err(SourceError::Spec(s.to_owned())),
        }
    }
}

/// Capture settings used for directory replay and camera sources.
#[derive(Debug, Clone, Copy)]
pub struct CaptureMode {
    pub width: usize,
    pub height: usize,
    pub fps: u32,
}

impl Default for CaptureMode {
    fn default() -> Self {
        CaptureMode {
            width: 640,
            height: 480,
            fps: 30,
        }
    }
}

pub fn open_source(spec: &SourceSpec, mode: CaptureMode) -> Result<Box<dyn FrameSource>, SourceError> {
    Ok(match spec {
        SourceSpec::Synthetic(path) => Box::new(synthetic_source(load_script(path)?)?),
        SourceSpec::Directory(path) => Box::new(DirectorySource::open(path, mode.fps)?),
        SourceSpec::Camera(device) => Box::new(CameraSource::open(device, mode.width, mode.height, mode.fps)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppm::write_ppm;

    #[test]
    fn parses_source_specs() {
        assert_eq!(
            "synthetic:a.json".parse::<SourceSpec>().unwrap(),
            SourceSpec::Synthetic("a.json".into())
        );
        assert_eq!(
            "dir:/tmp/x".parse::<SourceSpec>().unwrap(),
            SourceSpec::Directory("/tmp/x".into())
        );
        assert_eq!(
            "camera:2".parse::<SourceSpec>().unwrap(),
            SourceSpec::Camera(CameraDevice::Index(2))
        );
        assert_eq!(
            "camera:/dev/video7".parse::<SourceSpec>().unwrap(),
            SourceSpec::Camera(CameraDevice::Path("/dev/video7".into()))
        );
        assert!("webcam".parse::<SourceSpec>().is_err());
        assert!("dir:".parse::<SourceSpec>().is_err());
    }

    #[test]
    fn directory_ignores_other_files() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::filled(2, 2, [1, 2, 3], 0).unwrap();
        write_ppm(&dir.path().join("b.ppm"), &f).unwrap();
        write_ppm(&dir.path().join("a.ppm"), &f).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let src = DirectorySource::open(dir.path(), 10).unwrap();
        let names: Vec<_> = src.files().iter().map(|p| p.file_name().unwrap().to_owned()).collect();
        assert_eq!(names, ["a.ppm", "b.ppm"]);
    }

    #[cfg(target_os = "linux")]
    #[test]
    fn missing_camera_fails_at_startup() {
        let err = CameraSource::open(&CameraDevice::Index(977), 640, 480, 30)
            .err()
            .unwrap();
        assert!(
            matches!(err, SourceError::DeviceMissing(ref d) if d == "/dev/video977"),
            "{err}"
        );
        let err = CameraSource::open(&CameraDevice::Path("/nonexistent/cam".into()), 640, 480, 30)
            .err()
            .unwrap();
        assert!(matches!(err, SourceError::DeviceMissing(_)));
    }
}
