//! Experiment configuration: flat `key = value` files plus command-line
//! overrides, validated into a ready-to-run [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use doa_core::array_model::{ArrayConfig, Scenario, SourceSet};
use doa_core::estimation::DEFAULT_RESOLVE_THRESHOLD_DEG;
use doa_core::propagator::PiKMode;
use doa_core::spectral::BlockPartition;

/// Estimators the harness knows how to run, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorLabel {
    Psi51,
    Psi52,
    Psi53,
    Psi54,
    Psi55,
    Music,
    Esprit,
    Bartlett,
}

impl EstimatorLabel {
    pub const ALL: [EstimatorLabel; 8] = [
        EstimatorLabel::Psi51,
        EstimatorLabel::Psi52,
        EstimatorLabel::Psi53,
        EstimatorLabel::Psi54,
        EstimatorLabel::Psi55,
        EstimatorLabel::Music,
        EstimatorLabel::Esprit,
        EstimatorLabel::Bartlett,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorLabel::Psi51 => "psi51",
            EstimatorLabel::Psi52 => "psi52",
            EstimatorLabel::Psi53 => "psi53",
            EstimatorLabel::Psi54 => "psi54",
            EstimatorLabel::Psi55 => "psi55",
            EstimatorLabel::Music => "music",
            EstimatorLabel::Esprit => "esprit",
            EstimatorLabel::Bartlett => "bartlett",
        }
    }

    pub fn parse(s: &str) -> Option<EstimatorLabel> {
        EstimatorLabel::ALL.iter().copied().find(|l| l.as_str() == s)
    }

    /// Base-block index of a propagator row operator.
    pub fn psi_row_index(&self) -> Option<usize> {
        match self {
            EstimatorLabel::Psi51 => Some(1),
            EstimatorLabel::Psi52 => Some(2),
            EstimatorLabel::Psi53 => Some(3),
            EstimatorLabel::Psi54 => Some(4),
            EstimatorLabel::Psi55 => Some(5),
            _ => None,
        }
    }

    /// Whether the estimator produces an angular spectrum (ESPRIT does not).
    pub fn is_spectral(&self) -> bool {
        !matches!(self, EstimatorLabel::Esprit)
    }
}

impl fmt::Display for EstimatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    /// Grammar violation, with its source location.
    Parse { location: String, message: String },
    /// A well-formed value violating an invariant.
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(msg) => write!(f, "config i/o error: {msg}"),
            ConfigError::Parse { location, message } => {
                write!(f, "config parse error at {location}: {message}")
            }
            ConfigError::Validation(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: [&str; 15] = [
    "n_sensors",
    "spacing_ratio",
    "carrier_hz",
    "angles_deg",
    "powers",
    "snapshots",
    "snr_db",
    "seed",
    "grid_step_deg",
    "trials",
    "snr_sweep_db",
    "estimators",
    "pi_k_mode",
    "output_dir",
    "resolve_threshold_deg",
];

/// A fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_sensors: usize,
    pub spacing_ratio: f64,
    pub carrier_hz: f64,
    pub angles_deg: Vec<f64>,
    pub powers: Vec<f64>,
    pub snapshots: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub grid_step_deg: f64,
    pub trials: usize,
    pub snr_sweep_db: Vec<f64>,
    pub estimators: Vec<EstimatorLabel>,
    pub pi_k_mode: PiKMode,
    pub output_dir: PathBuf,
    pub resolve_threshold_deg: f64,
}

impl ExperimentConfig {
    pub fn array(&self) -> ArrayConfig {
        ArrayConfig::from_spacing_ratio(self.n_sensors, self.spacing_ratio, self.carrier_hz)
            .expect("validated at build time")
    }

    pub fn sources(&self) -> SourceSet {
        SourceSet::new(self.angles_deg.clone(), self.powers.clone())
            .expect("validated at build time")
    }

    pub fn scenario(&self, snr_db: f64) -> Scenario {
        Scenario::new(self.array(), self.sources(), self.snapshots, snr_db, self.seed)
            .expect("validated at build time")
    }

    pub fn p_sources(&self) -> usize {
        self.angles_deg.len()
    }

    /// Canonical text form of every experiment-relevant key (the output
    /// directory is excluded: it does not change the experiment).
    pub fn canonical_text(&self) -> String {
        let fmt_list = |xs: &[f64]| -> String {
            xs.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let estimators = self
            .estimators
            .iter()
            .map(|e| e.as_str())
            .collect::<Vec<_>>()
            .join(",");
        let mode = match self.pi_k_mode {
            PiKMode::First => "first",
            PiKMode::Average => "average",
        };
        format!(
            "angles_deg = {}\ncarrier_hz = {}\nestimators = {}\ngrid_step_deg = {}\n\
             n_sensors = {}\npi_k_mode = {}\npowers = {}\nresolve_threshold_deg = {}\n\
             seed = {}\nsnapshots = {}\nsnr_db = {}\nsnr_sweep_db = {}\n\
             spacing_ratio = {}\ntrials = {}\n",
            fmt_list(&self.angles_deg),
            self.carrier_hz,
            estimators,
            self.grid_step_deg,
            self.n_sensors,
            mode,
            fmt_list(&self.powers),
            self.resolve_threshold_deg,
            self.seed,
            self.snapshots,
            self.snr_db,
            fmt_list(&self.snr_sweep_db),
            self.spacing_ratio,
            self.trials,
        )
    }

    /// FNV-1a hash of the canonical text, the run's identity stamp.
    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Accumulates raw key/value assignments before validation.
#[derive(Debug, Default, Clone)]
pub struct ConfigBuilder {
    values: BTreeMap<String, String>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        ConfigBuilder::default()
    }

    /// Parses a flat config file: one `key = value` per line, `#` comments,
    /// blank lines ignored. Unknown keys are rejected with their line
    /// number.
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        self.load_text(&text, &path.display().to_string())
    }

    pub fn load_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (idx, raw_line) in text.lines().enumerate() {
            let location = format!("{origin}:{}", idx + 1);
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                location: location.clone(),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.assign(key.trim(), value.trim(), &location)?;
        }
        Ok(())
    }

    /// Applies one `KEY=VALUE` override (the `--set` flag).
    pub fn apply_override(&mut self, spec: &str, index: usize) -> Result<(), ConfigError> {
        let location = format!("--set #{}", index + 1);
        let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::Parse {
            location: location.clone(),
            message: format!("expected KEY=VALUE, got `{spec}`"),
        })?;
        self.assign(key.trim(), value.trim(), &location)
    }

    fn assign(&mut self, key: &str, value: &str, location: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::Parse {
                location: location.to_string(),
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() && key != "estimators" {
            return Err(ConfigError::Parse {
                location: location.to_string(),
                message: format!("key `{key}` has no value"),
            });
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Validates every assignment and fills defaults.
    pub fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        let get = |key: &str| self.values.get(key).map(|s| s.as_str());

        let n_sensors = parse_usize(get("n_sensors"), "n_sensors", 18)?;
        let spacing_ratio = parse_f64(get("spacing_ratio"), "spacing_ratio", 0.5)?;
        let carrier_hz = parse_f64(get("carrier_hz"), "carrier_hz", 1.0e9)?;
        let angles_deg = match get("angles_deg") {
            Some(v) => parse_f64_list(v, "angles_deg")?,
            None => {
                return Err(ConfigError::Validation(
                    "angles_deg is required (no default source placement exists)".into(),
                ))
            }
        };
        let powers = match get("powers") {
            Some(v) => parse_f64_list(v, "powers")?,
            None => vec![1.0; angles_deg.len()],
        };
        let snapshots = parse_usize(get("snapshots"), "snapshots", 200)?;
        let snr_db = parse_f64(get("snr_db"), "snr_db", 5.0)?;
        let seed = parse_u64(get("seed"), "seed", 1)?;
        let grid_step_deg = parse_f64(get("grid_step_deg"), "grid_step_deg", 0.1)?;
        let trials = parse_usize(get("trials"), "trials", 100)?;
        let snr_sweep_db = match get("snr_sweep_db") {
            Some(v) => parse_f64_list(v, "snr_sweep_db")?,
            None => (0..=20).map(f64::from).collect(),
        };
        let estimators = match get("estimators") {
            Some(v) => parse_estimators(v)?,
            None => EstimatorLabel::ALL.to_vec(),
        };
        let pi_k_mode = match get("pi_k_mode") {
            None | Some("first") => PiKMode::First,
            Some("average") => PiKMode::Average,
            Some(other) => {
                return Err(ConfigError::Validation(format!(
                    "pi_k_mode must be `first` or `average`, got `{other}`"
                )))
            }
        };
        let output_dir = PathBuf::from(get("output_dir").unwrap_or("."));
        let resolve_threshold_deg =
            parse_f64(
                get("resolve_threshold_deg"),
                "resolve_threshold_deg",
                DEFAULT_RESOLVE_THRESHOLD_DEG,
            )?;

        let cfg = ExperimentConfig {
            n_sensors,
            spacing_ratio,
            carrier_hz,
            angles_deg,
            powers,
            snapshots,
            snr_db,
            seed,
            grid_step_deg,
            trials,
            snr_sweep_db,
            estimators,
            pi_k_mode,
            output_dir,
            resolve_threshold_deg,
        };
        validate(&cfg)?;
        Ok(cfg)
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let array =
        ArrayConfig::from_spacing_ratio(cfg.n_sensors, cfg.spacing_ratio, cfg.carrier_hz)
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
    let sources = SourceSet::new(cfg.angles_deg.clone(), cfg.powers.clone())
        .map_err(|e| ConfigError::Validation(e.to_string()))?;
    Scenario::new(array, sources, cfg.snapshots, cfg.snr_db, cfg.seed)
        .map_err(|e| ConfigError::Validation(e.to_string()))?;
    BlockPartition::new(cfg.n_sensors, cfg.angles_deg.len())
        .map_err(|e| ConfigError::Validation(e.to_string()))?;
    if cfg.n_sensors <= cfg.angles_deg.len() + 1 {
        return Err(ConfigError::Validation(
            "n_sensors must exceed the source count + 1 (ESPRIT subarrays)".into(),
        ));
    }
    if cfg.grid_step_deg.is_nan() || cfg.grid_step_deg <= 0.0 || cfg.grid_step_deg > 5.0 {
        return Err(ConfigError::Validation(
            "grid_step_deg must lie in (0, 5]".into(),
        ));
    }
    if cfg.trials < 1 {
        return Err(ConfigError::Validation("trials must be at least 1".into()));
    }
    if cfg.trials > u32::MAX as usize {
        return Err(ConfigError::Validation("trials must fit in 32 bits".into()));
    }
    if cfg.snr_sweep_db.is_empty() {
        return Err(ConfigError::Validation(
            "snr_sweep_db must name at least one SNR point".into(),
        ));
    }
    if cfg.snr_sweep_db.len() > u32::MAX as usize {
        return Err(ConfigError::Validation("snr_sweep_db is too long".into()));
    }
    if cfg.snr_sweep_db.iter().any(|s| s.is_nan()) {
        return Err(ConfigError::Validation("snr_sweep_db must not contain NaN".into()));
    }
    if cfg.estimators.is_empty() {
        return Err(ConfigError::Validation(
            "estimators must name at least one estimator".into(),
        ));
    }
    if cfg.resolve_threshold_deg.is_nan() || cfg.resolve_threshold_deg <= 0.0 {
        return Err(ConfigError::Validation(
            "resolve_threshold_deg must be positive".into(),
        ));
    }
    Ok(())
}

fn parse_f64(value: Option<&str>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match value {
        None => Ok(default),
        Some(s) => parse_one_f64(s, key),
    }
}

fn parse_one_f64(s: &str, key: &str) -> Result<f64, ConfigError> {
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|_| {
            ConfigError::Validation(format!("{key}: `{s}` is not a number"))
        }),
    }
}

fn parse_f64_list(s: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<&str> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err(ConfigError::Validation(format!("{key}: empty list")));
    }
    items.into_iter().map(|t| parse_one_f64(t, key)).collect()
}

fn parse_usize(value: Option<&str>, key: &str, default: usize) -> Result<usize, ConfigError> {
    match value {
        None => Ok(default),
        Some(s) => s.parse::<usize>().map_err(|_| {
            ConfigError::Validation(format!("{key}: `{s}` is not a non-negative integer"))
        }),
    }
}

fn parse_u64(value: Option<&str>, key: &str, default: u64) -> Result<u64, ConfigError> {
    match value {
        None => Ok(default),
        Some(s) => s
            .parse::<u64>()
            .map_err(|_| ConfigError::Validation(format!("{key}: `{s}` is not a 64-bit integer"))),
    }
}

fn parse_estimators(s: &str) -> Result<Vec<EstimatorLabel>, ConfigError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let label = EstimatorLabel::parse(item).ok_or_else(|| {
            ConfigError::Validation(format!(
                "unknown estimator `{item}` (expected one of psi51..psi55, music, esprit, bartlett)"
            ))
        })?;
        if !out.contains(&label) {
            out.push(label);
        }
    }
    // canonical report order regardless of listing order
    out.sort_by_key(|l| EstimatorLabel::ALL.iter().position(|a| a == l).unwrap());
    Ok(out)
}

/// Loads, overrides and validates in one step (the CLI path).
pub fn load_config(
    path: Option<&Path>,
    overrides: &[String],
    output_override: Option<&Path>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut builder = ConfigBuilder::new();
    if let Some(p) = path {
        builder.load_file(p)?;
    }
    for (i, spec) in overrides.iter().enumerate() {
        builder.apply_override(spec, i)?;
    }
    if !builder.is_set("output_dir") {
        if let Ok(dir) = std::env::var("DOA_OUTPUT_DIR") {
            if !dir.is_empty() {
                builder
                    .assign("output_dir", &dir, "DOA_OUTPUT_DIR")
                    .expect("output_dir is a known key");
            }
        }
    }
    let mut cfg = builder.build()?;
    if let Some(dir) = output_override {
        cfg.output_dir = dir.to_path_buf();
    }
    Ok(cfg)
}
