//! The JSON configuration document and live tuning patches.
//!
//! Every tunable of the pipeline lives here. Unknown keys are rejected at
//! every level; missing keys take their defaults.

use std::path::{Path, PathBuf};

use pointmenu_core::{default_menu, Connectivity, DwellParams, HsvRange, MenuModel, MenuRegion, RecognizerParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Upper bound on the configured blur radius; the per-frame limit
/// `min(width, height) / 2` is enforced by the blur itself.
pub const MAX_BLUR_RADIUS: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// `"default"` or an explicit list of regions.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum MenuSetting {
    #[default]
    Default,
    Layout(MenuModel),
}

impl MenuSetting {
    pub fn resolve(&self) -> MenuModel {
        match self {
            MenuSetting::Default => default_menu(),
            MenuSetting::Layout(m) => m.clone(),
        }
    }
}

impl Serialize for MenuSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MenuSetting::Default => s.serialize_str("default"),
            MenuSetting::Layout(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for MenuSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match Value::deserialize(d)? {
            Value::String(s) if s == "default" => Ok(MenuSetting::Default),
            Value::String(s) => Err(D::Error::custom(format!(
                "unknown menu preset {s:?} (expected \"default\")"
            ))),
            v @ Value::Array(_) => {
                let regions: Vec<MenuRegion> = serde_json::from_value(v).map_err(D::Error::custom)?;
                MenuModel::new(regions)
                    .map(MenuSetting::Layout)
                    .map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!(
                "menu must be \"default\" or a list of regions, found {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub blur_radius: usize,
    pub hsv_range: HsvRange,
    pub min_area: usize,
    pub connectivity: Connectivity,
    pub alpha: f64,
    pub dwell_ms: u64,
    pub cooldown_ms: u64,
    pub hysteresis_margin: f64,
    pub lost_timeout_ms: u64,
    pub menu: MenuSetting,
    pub player_socket_path: Option<PathBuf>,
    pub listen_address: Option<String>,
    /// Processing-rate ceiling in frames per second; `None` runs as fast as the source delivers.
    pub fps_cap: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let p = RecognizerParams::default();
        PipelineConfig {
            blur_radius: p.blur_radius,
            hsv_range: p.hsv_range,
            min_area: p.min_area,
            connectivity: p.connectivity,
            alpha: p.alpha,
            dwell_ms: p.dwell.dwell_ms,
            cooldown_ms: p.dwell.cooldown_ms,
            hysteresis_margin: p.dwell.hysteresis_margin,
            lost_timeout_ms: p.lost_timeout_ms,
            menu: MenuSetting::Default,
            player_socket_path: None,
            listen_address: None,
            fps_cap: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: PipelineConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Every field spelled out, defaults included.
    pub fn to_normalized_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn recognizer_params(&self) -> RecognizerParams {
        RecognizerParams {
            blur_radius: self.blur_radius,
            hsv_range: self.hsv_range,
            min_area: self.min_area,
            connectivity: self.connectivity,
            alpha: self.alpha,
            lost_timeout_ms: self.lost_timeout_ms,
            dwell: DwellParams {
                dwell_ms: self.dwell_ms,
                cooldown_ms: self.cooldown_ms,
                hysteresis_margin: self.hysteresis_margin,
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.blur_radius > MAX_BLUR_RADIUS {
            return invalid(format!("blur_radius {} exceeds {MAX_BLUR_RADIUS}", self.blur_radius));
        }
        if let Err(e) = self.recognizer_params().validate() {
            return invalid(e.to_string());
        }
        if let Some(fps) = self.fps_cap {
            if !(fps.is_finite() && fps > 0.0) {
                return invalid(format!("fps_cap {fps} must be a positive number"));
            }
        }
        if let Some(addr) = &self.listen_address {
            if addr
                .rsplit_once(':')
                .is_none_or(|(host, port)| host.is_empty() || port.parse::<u16>().is_err())
            {
                return invalid(format!("listen_address {addr:?} must look like host:port"));
            }
        }
        if self
            .player_socket_path
            .as_ref()
            .is_some_and(|p| p.as_os_str().is_empty())
        {
            return invalid("player_socket_path must not be empty".into());
        }
        Ok(())
    }

    pub fn tunables(&self) -> Tunables {
        Tunables {
            hsv_range: self.hsv_range,
            dwell_ms: self.dwell_ms,
            blur_radius: self.blur_radius,
            min_area: self.min_area,
            alpha: self.alpha,
        }
    }
}

/// The live-tunable subset, echoed in every snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tunables {
    pub hsv_range: HsvRange,
    pub dwell_ms: u64,
    pub blur_radius: usize,
    pub min_area: usize,
    pub alpha: f64,
}

/// Body of a `{"set": {...}}` request.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningPatch {
    pub hsv_range: Option<HsvRange>,
    pub dwell_ms: Option<u64>,
    pub blur_radius: Option<usize>,
    pub min_area: Option<usize>,
    pub alpha: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetRequest {
    set: TuningPatch,
}

impl TuningPatch {
    /// Parses a client control message of the form `{"set": {...}}`.
    pub fn parse_request(text: &str) -> Result<Self, String> {
        serde_json::from_str::<SetRequest>(text)
            .map(|r| r.set)
            .map_err(|e| format!("bad set request: {e}"))
    }

    /// The patched config, or the reason it was refused. `config` is never modified.
    pub fn apply_to(&self, config: &PipelineConfig) -> Result<PipelineConfig, String> {
        let mut next = config.clone();
        if let Some(v) = self.hsv_range {
            next.hsv_range = v;
        }
        if let Some(v) = self.dwell_ms {
            next.dwell_ms = v;
        }
        if let Some(v) = self.blur_radius {
            next.blur_radius = v;
        }
        if let Some(v) = self.min_area {
            next.min_area = v;
        }
        if let Some(v) = self.alpha {
            next.alpha = v;
        }
        next.validate().map_err(|e| e.to_string())?;
        Ok(next)
    }
}
